//! Shortest edge-covering walks with fixed start and end vertices.
//!
//! The solver makes every vertex even except the two endpoints by
//! duplicating shortest paths, then reads an Euler trail off the augmented
//! multigraph. Endpoint parity decides how the duplication starts:
//!
//! | odd set                  | pre-step                                          |
//! |--------------------------|---------------------------------------------------|
//! | empty                    | duplicate the shortest `v_s`–`v_t` path           |
//! | contains both endpoints  | none                                              |
//! | contains one endpoint    | connect the even endpoint to its nearest odd vertex |
//! | contains neither         | connect both endpoints to two distinct odd vertices |
//!
//! after which the remaining odd vertices are paired by a minimum-weight
//! perfect matching on shortest-path distances. [`brute_force_ocpp`] is an
//! exhaustive optimum used to audit the heuristic cases.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("start and end are not connected to every edge of the graph")]
    DisconnectedEndpoints,
    #[error("odd vertex set has odd cardinality {0}")]
    OddCardinality(usize),
    #[error("odd vertices cannot all be paired (disconnected)")]
    Disconnected,
    #[error("degree parity does not admit a trail between the endpoints")]
    ParityViolation,
    #[error("exhaustive search limited to {max} edges, graph has {edges}")]
    TooLarge { edges: usize, max: usize },
    #[error("edge {0} has an invalid weight")]
    InvalidWeight(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected weighted multigraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            n,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) -> usize {
        self.n = self.n.max(u + 1).max(v + 1);
        self.edges.push(Edge { u, v, w });
        self.edges.len() - 1
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Incident edge indices per vertex, in edge order.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.u].push(i);
            if e.v != e.u {
                inc[e.v].push(i);
            }
        }
        inc
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    /// Component label per vertex (labels in order of lowest member).
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            label[v] = label[r];
        }
        label
    }

    fn check_vertex(&self, v: usize) -> Result<(), RouteError> {
        if v < self.n {
            Ok(())
        } else {
            Err(RouteError::UnknownVertex(v))
        }
    }

    fn check_weights(&self) -> Result<(), RouteError> {
        match self
            .edges
            .iter()
            .position(|e| !(e.w >= 0.0) || !e.w.is_finite())
        {
            Some(i) => Err(RouteError::InvalidWeight(i)),
            None => Ok(()),
        }
    }

    /// Every edge must be reachable from `v_s`, and `v_t` must share its
    /// component.
    fn check_route_preconditions(&self, v_s: usize, v_t: usize) -> Result<(), RouteError> {
        self.check_vertex(v_s)?;
        self.check_vertex(v_t)?;
        self.check_weights()?;
        if self.edges.is_empty() {
            return Err(RouteError::EmptyGraph);
        }
        let comp = self.components();
        let c = comp[v_s];
        if comp[v_t] != c || self.edges.iter().any(|e| comp[e.u] != c) {
            return Err(RouteError::DisconnectedEndpoints);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    /// Predecessor vertex and the edge used to reach each vertex.
    pub pred: Vec<Option<(usize, usize)>>,
}

impl ShortestPaths {
    /// Edge indices of the shortest path from the source to `target`, in
    /// travel order. `None` if unreachable.
    pub fn path_edges(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist.get(target)?.is_finite() {
            return None;
        }
        let mut out = Vec::new();
        let mut v = target;
        while let Some((p, e)) = self.pred[v] {
            out.push(e);
            v = p;
        }
        out.reverse();
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    d: f64,
    v: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (distance, vertex)
        other
            .d
            .total_cmp(&self.d)
            .then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths. Equal-length alternatives resolve to the
/// smallest predecessor vertex, then the smallest edge index.
pub fn dijkstra(g: &WeightedGraph, src: usize) -> Result<ShortestPaths, RouteError> {
    g.check_vertex(src)?;
    g.check_weights()?;
    let inc = g.incidence();
    let mut dist = vec![f64::INFINITY; g.n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; g.n];
    let mut done = vec![false; g.n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapEntry { d: 0.0, v: src });
    while let Some(HeapEntry { d, v: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        for &ei in &inc[u] {
            let e = g.edges[ei];
            let v = e.other(u);
            if done[v] {
                continue;
            }
            let nd = d + e.w;
            let better = match nd.total_cmp(&dist[v]) {
                Ordering::Less => true,
                Ordering::Equal => pred[v].is_some_and(|(pu, pe)| (u, ei) < (pu, pe)),
                Ordering::Greater => false,
            };
            if better {
                if nd < dist[v] {
                    heap.push(HeapEntry { d: nd, v });
                }
                dist[v] = nd;
                pred[v] = Some((u, ei));
            }
        }
    }
    Ok(ShortestPaths {
        source: src,
        dist,
        pred,
    })
}

/// Vertices of odd degree, ascending.
pub fn odd_vertices(g: &WeightedGraph) -> Vec<usize> {
    g.degrees()
        .into_iter()
        .enumerate()
        .filter(|(_, d)| d % 2 == 1)
        .map(|(v, _)| v)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    /// Pairs of vertex ids, each as (smaller, larger).
    pub pairs: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Largest odd set solved exactly by the subset dynamic program.
pub const EXACT_PAIRING_LIMIT: usize = 16;

/// Minimum-weight perfect matching of `odd` under `metric`, where
/// `metric[i][j]` is the distance between `odd[i]` and `odd[j]`.
///
/// Exact (subset DP) up to [`EXACT_PAIRING_LIMIT`] vertices, greedy with
/// pair-swap improvement beyond.
pub fn min_weight_pairing(odd: &[usize], metric: &[Vec<f64>]) -> Result<Pairing, RouteError> {
    let k = odd.len();
    if k % 2 == 1 {
        return Err(RouteError::OddCardinality(k));
    }
    if k == 0 {
        return Ok(Pairing {
            pairs: Vec::new(),
            cost: 0.0,
        });
    }
    let idx_pairs = if k <= EXACT_PAIRING_LIMIT {
        pairing_dp(metric, k)
    } else {
        pairing_greedy(metric, k)
    };
    let mut cost = 0.0;
    let mut pairs = Vec::with_capacity(k / 2);
    for (i, j) in idx_pairs {
        let d = metric[i][j];
        if !d.is_finite() {
            return Err(RouteError::Disconnected);
        }
        cost += d;
        let (a, b) = (odd[i], odd[j]);
        pairs.push((a.min(b), a.max(b)));
    }
    Ok(Pairing { pairs, cost })
}

fn pairing_dp(metric: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let full = (1usize << k) - 1;
    // best[mask] = cheapest pairing of the vertices NOT in mask
    let mut best = vec![f64::INFINITY; 1 << k];
    let mut choice = vec![(0usize, 0usize); 1 << k];
    best[full] = 0.0;
    for mask in (0..full).rev() {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = (!mask).trailing_zeros() as usize;
        for (j, &d) in metric[i].iter().enumerate().take(k).skip(i + 1) {
            if mask & (1 << j) != 0 {
                continue;
            }
            let next = mask | (1 << i) | (1 << j);
            let c = d + best[next];
            if c < best[mask] {
                best[mask] = c;
                choice[mask] = (i, j);
            }
        }
        if !best[mask].is_finite() {
            // keep a structurally valid choice so the caller can report it
            let j = (i + 1..k).find(|j| mask & (1 << j) == 0).unwrap_or(i);
            choice[mask] = (i, j);
        }
    }
    let mut out = Vec::new();
    let mut mask = 0usize;
    while mask != full {
        let (i, j) = choice[mask];
        out.push((i, j));
        mask |= (1 << i) | (1 << j);
    }
    out
}

fn pairing_greedy(metric: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let mut cand: Vec<(f64, usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| (metric[i][j], i, j))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut used = vec![false; k];
    let mut pairs = Vec::new();
    for (_, i, j) in cand {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            pairs.push((i, j));
        }
    }
    // 2-opt over pairs of pairs
    loop {
        let mut improved = false;
        for a in 0..pairs.len() {
            for b in a + 1..pairs.len() {
                let ((p, q), (r, s)) = (pairs[a], pairs[b]);
                let now = metric[p][q] + metric[r][s];
                let alt1 = metric[p][r] + metric[q][s];
                let alt2 = metric[p][s] + metric[q][r];
                if alt1 < now - 1e-12 && alt1 <= alt2 {
                    pairs[a] = (p.min(r), p.max(r));
                    pairs[b] = (q.min(s), q.max(s));
                    improved = true;
                } else if alt2 < now - 1e-12 {
                    pairs[a] = (p.min(s), p.max(s));
                    pairs[b] = (q.min(r), q.max(r));
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    pairs
}

/// Which endpoint-parity case applied during augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// No odd vertices: the shortest start–end path is duplicated.
    EulerianCase,
    BothOdd,
    /// Start even, end odd.
    TargetOdd,
    /// Start odd, end even.
    SourceOdd,
    BothEven,
    /// Start equals end: classic closed postman pairing of all odd vertices.
    ClosedCircuit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedGraph {
    pub base: WeightedGraph,
    /// Base edge indices that are traversed a second time, ascending.
    pub duplicated: Vec<usize>,
    pub provenance: Provenance,
    /// Shortest paths that were duplicated, as (from, to) vertex pairs,
    /// pre-step connections first.
    pub connections: Vec<(usize, usize)>,
}

impl AugmentedGraph {
    /// Base edges followed by the duplicates, as one multigraph.
    pub fn multigraph(&self) -> WeightedGraph {
        let mut g = self.base.clone();
        for &e in &self.duplicated {
            g.edges.push(self.base.edges[e]);
        }
        g
    }

    pub fn total_weight(&self) -> f64 {
        self.base.total_weight()
            + self
                .duplicated
                .iter()
                .map(|&e| self.base.edges[e].w)
                .sum::<f64>()
    }
}

fn expected_odd(v_s: usize, v_t: usize) -> Vec<usize> {
    if v_s == v_t {
        Vec::new()
    } else {
        vec![v_s.min(v_t), v_s.max(v_t)]
    }
}

/// Duplicate shortest paths until exactly `v_s` and `v_t` are odd.
pub fn augment_for_open_trail(
    g: &WeightedGraph,
    v_s: usize,
    v_t: usize,
) -> Result<AugmentedGraph, RouteError> {
    g.check_route_preconditions(v_s, v_t)?;
    let odd = odd_vertices(g);
    let is_odd = |v: usize| odd.binary_search(&v).is_ok();

    let mut sp: HashMap<usize, ShortestPaths> = HashMap::new();
    let mut tree = |v: usize| -> Result<ShortestPaths, RouteError> {
        if let Some(t) = sp.get(&v) {
            return Ok(t.clone());
        }
        let t = dijkstra(g, v)?;
        sp.insert(v, t.clone());
        Ok(t)
    };

    let mut connections: Vec<(usize, usize)> = Vec::new();
    let nearest_odd = |from: &ShortestPaths, exclude: &[usize]| -> Option<usize> {
        odd.iter()
            .copied()
            .filter(|c| !exclude.contains(c))
            .min_by(|&a, &b| from.dist[a].total_cmp(&from.dist[b]).then(a.cmp(&b)))
    };

    let (provenance, remaining): (Provenance, Vec<usize>) = if v_s == v_t {
        (Provenance::ClosedCircuit, odd.clone())
    } else if odd.is_empty() {
        connections.push((v_s, v_t));
        (Provenance::EulerianCase, Vec::new())
    } else {
        match (is_odd(v_s), is_odd(v_t)) {
            (true, true) => (
                Provenance::BothOdd,
                odd.iter()
                    .copied()
                    .filter(|&v| v != v_s && v != v_t)
                    .collect(),
            ),
            (false, true) => {
                let from = tree(v_s)?;
                let c = nearest_odd(&from, &[v_t]).ok_or(RouteError::ParityViolation)?;
                connections.push((v_s, c));
                (
                    Provenance::TargetOdd,
                    odd.iter()
                        .copied()
                        .filter(|&v| v != v_t && v != c)
                        .collect(),
                )
            }
            (true, false) => {
                let from = tree(v_t)?;
                let c = nearest_odd(&from, &[v_s]).ok_or(RouteError::ParityViolation)?;
                connections.push((v_t, c));
                (
                    Provenance::SourceOdd,
                    odd.iter()
                        .copied()
                        .filter(|&v| v != v_s && v != c)
                        .collect(),
                )
            }
            (false, false) => {
                let (ds, dt) = (tree(v_s)?, tree(v_t)?);
                let mut best: Option<(f64, usize, usize)> = None;
                for &c1 in &odd {
                    for &c2 in &odd {
                        if c1 == c2 {
                            continue;
                        }
                        let cost = ds.dist[c1] + dt.dist[c2];
                        if best.is_none_or(|(b, _, _)| cost < b) {
                            best = Some((cost, c1, c2));
                        }
                    }
                }
                let (_, c1, c2) = best.ok_or(RouteError::ParityViolation)?;
                connections.push((v_s, c1));
                connections.push((v_t, c2));
                (
                    Provenance::BothEven,
                    odd.iter()
                        .copied()
                        .filter(|&v| v != c1 && v != c2)
                        .collect(),
                )
            }
        }
    };

    let metric: Vec<Vec<f64>> = remaining
        .iter()
        .map(|&a| {
            let t = tree(a)?;
            Ok(remaining.iter().map(|&b| t.dist[b]).collect())
        })
        .collect::<Result<_, RouteError>>()?;
    let pairing = min_weight_pairing(&remaining, &metric)?;
    connections.extend(pairing.pairs.iter().copied());

    // Duplicate every connection path. Two copies of the same edge cancel:
    // parity and connectivity are unchanged and the walk gets shorter.
    let mut copies = vec![0usize; g.edges.len()];
    for &(a, b) in &connections {
        let path = tree(a)?.path_edges(b).ok_or(RouteError::Disconnected)?;
        for e in path {
            copies[e] += 1;
        }
    }
    let duplicated: Vec<usize> = copies
        .iter()
        .enumerate()
        .filter(|(_, c)| *c % 2 == 1)
        .map(|(e, _)| e)
        .collect();

    let ag = AugmentedGraph {
        base: g.clone(),
        duplicated,
        provenance,
        connections,
    };
    if odd_vertices(&ag.multigraph()) != expected_odd(v_s, v_t) {
        return Err(RouteError::ParityViolation);
    }
    Ok(ag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    /// Vertex sequence from `v_s` to `v_t`.
    pub walk: Vec<usize>,
    /// Base edge index traversed at each step.
    pub edge_sequence: Vec<usize>,
    /// Traversal count per base edge.
    pub edge_visits: Vec<usize>,
    pub total_length: f64,
}

/// Euler trail (Hierholzer) over the augmented multigraph from `v_s` to
/// `v_t`; a closed circuit when they coincide.
pub fn euler_trail(ag: &AugmentedGraph, v_s: usize, v_t: usize) -> Result<RoutePlan, RouteError> {
    let mg = ag.multigraph();
    mg.check_vertex(v_s)?;
    mg.check_vertex(v_t)?;
    if odd_vertices(&mg) != expected_odd(v_s, v_t) {
        return Err(RouteError::ParityViolation);
    }
    let base_edges = ag.base.edges.len();
    // multigraph edge -> base edge
    let base_of = |e: usize| {
        if e < base_edges {
            e
        } else {
            ag.duplicated[e - base_edges]
        }
    };

    let inc = mg.incidence();
    let mut next = vec![0usize; mg.n];
    let mut used = vec![false; mg.edges.len()];
    // stack of (vertex, edge used to arrive)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(v_s, None)];
    let mut rev: Vec<(usize, Option<usize>)> = Vec::with_capacity(mg.edges.len() + 1);
    while let Some(&(v, via)) = stack.last() {
        let mut advanced = false;
        while next[v] < inc[v].len() {
            let e = inc[v][next[v]];
            next[v] += 1;
            if !used[e] {
                used[e] = true;
                stack.push((mg.edges[e].other(v), Some(e)));
                advanced = true;
                break;
            }
        }
        if !advanced {
            stack.pop();
            rev.push((v, via));
        }
    }
    if used.iter().any(|u| !u) {
        return Err(RouteError::Disconnected);
    }
    rev.reverse();
    let walk: Vec<usize> = rev.iter().map(|(v, _)| *v).collect();
    // entry i+1 records the edge taken on step i
    let edge_sequence: Vec<usize> = rev
        .iter()
        .skip(1)
        .map(|(_, via)| base_of(via.expect("every entry after the start has an edge")))
        .collect();
    if walk.last() != Some(&v_t) && !mg.edges.is_empty() {
        return Err(RouteError::ParityViolation);
    }
    let mut edge_visits = vec![0usize; base_edges];
    let mut total_length = 0.0;
    for &e in &edge_sequence {
        edge_visits[e] += 1;
        total_length += ag.base.edges[e].w;
    }
    Ok(RoutePlan {
        walk,
        edge_sequence,
        edge_visits,
        total_length,
    })
}

pub fn vocpp(g: &WeightedGraph, v_s: usize, v_t: usize) -> Result<RoutePlan, RouteError> {
    Ok(vocpp_detailed(g, v_s, v_t)?.1)
}

pub fn vocpp_detailed(
    g: &WeightedGraph,
    v_s: usize,
    v_t: usize,
) -> Result<(AugmentedGraph, RoutePlan), RouteError> {
    let ag = augment_for_open_trail(g, v_s, v_t)?;
    let plan = euler_trail(&ag, v_s, v_t)?;
    Ok((ag, plan))
}

/// Largest edge count accepted by [`brute_force_ocpp`].
pub const BRUTE_FORCE_EDGE_LIMIT: usize = 14;

/// Exact optimum by enumerating every subset of edges to traverse twice.
pub fn brute_force_ocpp(
    g: &WeightedGraph,
    v_s: usize,
    v_t: usize,
) -> Result<RoutePlan, RouteError> {
    Ok(brute_force_detailed(g, v_s, v_t)?.1)
}

pub fn brute_force_detailed(
    g: &WeightedGraph,
    v_s: usize,
    v_t: usize,
) -> Result<(AugmentedGraph, RoutePlan), RouteError> {
    let m = g.edges.len();
    if m > BRUTE_FORCE_EDGE_LIMIT {
        return Err(RouteError::TooLarge {
            edges: m,
            max: BRUTE_FORCE_EDGE_LIMIT,
        });
    }
    g.check_route_preconditions(v_s, v_t)?;

    // compact ids for vertices that matter to parity
    let mut compact: HashMap<usize, u32> = HashMap::new();
    let mut id = |v: usize| -> u32 {
        let next = compact.len() as u32;
        *compact.entry(v).or_insert(next)
    };
    let toggles: Vec<u64> = g
        .edges
        .iter()
        .map(|e| (1u64 << id(e.u)) ^ (1u64 << id(e.v)))
        .collect();
    let target = (1u64 << id(v_s)) ^ (1u64 << id(v_t));
    let base_parity = toggles.iter().fold(0u64, |a, t| a ^ t);

    let mut best: Option<(f64, u32)> = None;
    for mask in 0u32..(1u32 << m) {
        let mut parity = base_parity;
        let mut cost = 0.0;
        for (e, t) in toggles.iter().enumerate() {
            if mask & (1 << e) != 0 {
                parity ^= t;
                cost += g.edges[e].w;
            }
        }
        // duplicates copy existing edges, so connectivity never changes
        if parity == target && best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, mask));
        }
    }
    let (_, mask) = best.ok_or(RouteError::ParityViolation)?;
    let odd = odd_vertices(g);
    let provenance = if v_s == v_t {
        Provenance::ClosedCircuit
    } else if odd.is_empty() {
        Provenance::EulerianCase
    } else {
        match (odd.contains(&v_s), odd.contains(&v_t)) {
            (true, true) => Provenance::BothOdd,
            (false, true) => Provenance::TargetOdd,
            (true, false) => Provenance::SourceOdd,
            (false, false) => Provenance::BothEven,
        }
    };
    let ag = AugmentedGraph {
        base: g.clone(),
        duplicated: (0..m).filter(|e| mask & (1 << e) != 0).collect(),
        provenance,
        connections: Vec::new(),
    };
    let plan = euler_trail(&ag, v_s, v_t)?;
    Ok((ag, plan))
}

/// Check a plan against its base graph: consecutive vertices joined by the
/// recorded edges, every edge covered, endpoints and length consistent.
pub fn validate_plan(
    g: &WeightedGraph,
    plan: &RoutePlan,
    v_s: usize,
    v_t: usize,
) -> Result<(), String> {
    if plan.walk.first() != Some(&v_s) || plan.walk.last() != Some(&v_t) {
        return Err(format!("walk does not run from {v_s} to {v_t}"));
    }
    if plan.walk.len() != plan.edge_sequence.len() + 1 {
        return Err("walk and edge sequence lengths disagree".into());
    }
    let mut visits = vec![0usize; g.edges.len()];
    let mut length = 0.0;
    for (i, &e) in plan.edge_sequence.iter().enumerate() {
        let edge = g.edges.get(e).ok_or_else(|| format!("unknown edge {e}"))?;
        let (a, b) = (plan.walk[i], plan.walk[i + 1]);
        if !((edge.u == a && edge.v == b) || (edge.u == b && edge.v == a)) {
            return Err(format!("step {i} ({a}->{b}) does not follow edge {e}"));
        }
        visits[e] += 1;
        length += edge.w;
    }
    if visits != plan.edge_visits {
        return Err("edge visit counts disagree with the walk".into());
    }
    if let Some(e) = visits.iter().position(|v| *v == 0) {
        return Err(format!("edge {e} is never visited"));
    }
    if (length - plan.total_length).abs() > 1e-9 * length.max(1.0) {
        return Err("total length disagrees with the walk".into());
    }
    Ok(())
}

/// Parse `u v w` lines into a graph. Vertex labels are arbitrary tokens,
/// numbered in order of first appearance; `#` starts a comment line.
pub fn parse_edge_list(text: &str) -> Result<(WeightedGraph, Vec<String>), RouteError> {
    let mut labels: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut g = WeightedGraph::new(0);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [u, v, w] = toks.as_slice() else {
            return Err(RouteError::Parse {
                line,
                msg: format!("expected 'u v w', found {} fields", toks.len()),
            });
        };
        let w: f64 = w.parse().map_err(|_| RouteError::Parse {
            line,
            msg: format!("invalid weight {w:?}"),
        })?;
        if !(w >= 0.0) || !w.is_finite() {
            return Err(RouteError::Parse {
                line,
                msg: format!("weight must be finite and non-negative, got {w}"),
            });
        }
        let mut id = |s: &str| {
            *ids.entry(s.to_string()).or_insert_with(|| {
                labels.push(s.to_string());
                labels.len() - 1
            })
        };
        let (a, b) = (id(u), id(v));
        if a == b {
            return Err(RouteError::Parse {
                line,
                msg: "self-loops are not supported".into(),
            });
        }
        g.add_edge(a, b, w);
    }
    g.n = labels.len();
    Ok((g, labels))
}
