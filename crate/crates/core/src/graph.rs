//! Bipartite graphs with weighted vertices, the direct sampler, intersection
//! graphs, components, BFS distances and clustering estimates.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError, Result};
use crate::rng::replicate_rng;
use crate::weights::CriticalPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    Black(usize),
    White(usize),
}

/// `1 - exp(-x y / z)`.
pub fn edge_probability(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && z > 0.0) {
        return invalid(format!("edge probability needs positive inputs, got ({x}, {y}, {z})"));
    }
    Ok(-(-x * y / z).exp_m1())
}

/// Simple bipartite graph; adjacency lists kept sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
    black_adj: Vec<Vec<usize>>,
    white_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn empty(x: Vec<f64>, y: Vec<f64>, z: f64) -> Self {
        let (n, m) = (x.len(), y.len());
        BipartiteGraph { x, y, z, black_adj: vec![Vec::new(); n], white_adj: vec![Vec::new(); m] }
    }

    /// Builds a graph from `(black, white)` pairs, dropping duplicates.
    pub fn from_edges<I>(x: Vec<f64>, y: Vec<f64>, z: f64, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if x.iter().chain(y.iter()).any(|&w| !(w > 0.0 && w.is_finite())) {
            return invalid("weights must be positive");
        }
        let mut g = Self::empty(x, y, z);
        for (i, j) in edges {
            if i >= g.x.len() || j >= g.y.len() {
                return Err(ModelError::OutOfRange(format!("edge b{i} w{j}")));
            }
            g.black_adj[i].push(j);
            g.white_adj[j].push(i);
        }
        for list in g.black_adj.iter_mut().chain(g.white_adj.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(g)
    }

    pub fn n_black(&self) -> usize {
        self.x.len()
    }

    pub fn n_white(&self) -> usize {
        self.y.len()
    }

    pub fn black_neighbors(&self, i: usize) -> &[usize] {
        &self.black_adj[i]
    }

    pub fn white_neighbors(&self, j: usize) -> &[usize] {
        &self.white_adj[j]
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let (list, black): (&[usize], bool) = match v {
            Vertex::Black(i) => (&self.black_adj[i], true),
            Vertex::White(j) => (&self.white_adj[j], false),
        };
        list.iter().map(move |&u| if black { Vertex::White(u) } else { Vertex::Black(u) })
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.black_adj[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.black_adj.iter().map(Vec::len).sum()
    }

    /// Sorted `(black, white)` edge list.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, list) in self.black_adj.iter().enumerate() {
            out.extend(list.iter().map(|&j| (i, j)));
        }
        out
    }

    /// Text dump: a header, the weight vectors, then one `b<i> w<j>` line per edge (1-based).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n {} m {} z {:?}", self.n_black(), self.n_white(), self.z);
        let join = |v: &[f64]| v.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "x {}", join(&self.x));
        let _ = writeln!(s, "y {}", join(&self.y));
        for (i, j) in self.edges() {
            let _ = writeln!(s, "b{} w{}", i + 1, j + 1);
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let bad = |msg: &str| ModelError::Parse(msg.to_string());
        let mut z = None;
        let mut x = None;
        let mut y = None;
        let mut edges = Vec::new();
        let floats = |rest: &str| -> Result<Vec<f64>> {
            rest.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| ModelError::Parse(e.to_string())))
                .collect()
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let pos = toks.iter().position(|&t| t == "z").ok_or_else(|| bad("missing z"))?;
                z = Some(toks.get(pos + 1).ok_or_else(|| bad("missing z value"))?.parse::<f64>().map_err(|e| ModelError::Parse(e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("x ").or(if line == "x" { Some("") } else { None }) {
                x = Some(floats(rest)?);
            } else if let Some(rest) = line.strip_prefix("y ").or(if line == "y" { Some("") } else { None }) {
                y = Some(floats(rest)?);
            } else {
                let mut parts = line.split_whitespace();
                let b = parts.next().and_then(|t| t.strip_prefix('b')).ok_or_else(|| bad(line))?;
                let w = parts.next().and_then(|t| t.strip_prefix('w')).ok_or_else(|| bad(line))?;
                let i: usize = b.parse().map_err(|_| bad(line))?;
                let j: usize = w.parse().map_err(|_| bad(line))?;
                if i == 0 || j == 0 {
                    return Err(bad("indices are 1-based"));
                }
                edges.push((i - 1, j - 1));
            }
        }
        Self::from_edges(
            x.ok_or_else(|| bad("missing x line"))?,
            y.ok_or_else(|| bad("missing y line"))?,
            z.ok_or_else(|| bad("missing header"))?,
            edges,
        )
    }
}

/// Independent edges with probability `edge_probability(x_i, y_j, z)`.
pub fn sample_direct<R: Rng + ?Sized>(x: &[f64], y: &[f64], z: f64, rng: &mut R) -> BipartiteGraph {
    let mut edges = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            let p = -(-xi * yj / z).exp_m1();
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    BipartiteGraph::from_edges(x.to_vec(), y.to_vec(), z, edges).expect("weights validated by caller")
}

/// Draws weights from the pair's laws and then samples edges with `z = √(mn)`.
pub fn sample_direct_pair(pair: &CriticalPair, seed: u64) -> BipartiteGraph {
    let mut rng = replicate_rng(seed, 0);
    let x: Vec<f64> = (0..pair.n).map(|_| pair.spec_b.sample(&mut rng)).collect();
    let y: Vec<f64> = (0..pair.m).map(|_| pair.spec_w.sample(&mut rng)).collect();
    sample_direct(&x, &y, pair.z(), &mut rng)
}

/// Undirected simple graph on `0..n` with sorted adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        SimpleGraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, l) in self.adj.iter().enumerate() {
            out.extend(l.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// BFS distances from `src`; `None` marks unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &u in &self.adj[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// Blacks `i ~ j` iff they share a white neighbour.
pub fn intersection_graph(g: &BipartiteGraph) -> SimpleGraph {
    let mut edges = Vec::new();
    for j in 0..g.n_white() {
        let blacks = g.white_neighbors(j);
        for (a, &u) in blacks.iter().enumerate() {
            for &v in &blacks[a + 1..] {
                edges.push((u, v));
            }
        }
    }
    SimpleGraph::from_edges(g.n_black(), &edges)
}

/// BFS distances from one vertex of a bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distances {
    pub black: Vec<Option<usize>>,
    pub white: Vec<Option<usize>>,
}

impl Distances {
    pub fn to(&self, v: Vertex) -> Option<usize> {
        match v {
            Vertex::Black(i) => self.black[i],
            Vertex::White(j) => self.white[j],
        }
    }
}

pub fn bfs_distances(g: &BipartiteGraph, src: Vertex) -> Distances {
    let mut d = Distances { black: vec![None; g.n_black()], white: vec![None; g.n_white()] };
    let set = |d: &mut Distances, v: Vertex, val: usize| match v {
        Vertex::Black(i) => d.black[i] = Some(val),
        Vertex::White(j) => d.white[j] = Some(val),
    };
    set(&mut d, src, 0);
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        let dv = d.to(v).unwrap();
        for u in g.neighbors(v) {
            if d.to(u).is_none() {
                set(&mut d, u, dv + 1);
                queue.push_back(u);
            }
        }
    }
    d
}

/// Graph distance, `None` across components.
pub fn distance(g: &BipartiteGraph, a: Vertex, b: Vertex) -> Option<usize> {
    bfs_distances(g, a).to(b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub blacks: Vec<usize>,
    pub whites: Vec<usize>,
    pub x_mass: f64,
    pub y_mass: f64,
    pub edge_count: usize,
    /// Edges beyond a spanning tree.
    pub surplus: usize,
    /// Twice the eccentricity of the first member: an upper bound on the diameter.
    pub diameter_bound: usize,
}

impl ComponentRecord {
    pub fn is_nontrivial(&self) -> bool {
        self.edge_count > 0
    }

    pub fn size(&self) -> usize {
        self.blacks.len() + self.whites.len()
    }
}

/// Connected components, blacks visited first in index order, then whites.
pub fn components(g: &BipartiteGraph) -> Vec<ComponentRecord> {
    let mut seen_b = vec![false; g.n_black()];
    let mut seen_w = vec![false; g.n_white()];
    let starts = (0..g.n_black()).map(Vertex::Black).chain((0..g.n_white()).map(Vertex::White));
    let mut out = Vec::new();
    for s in starts {
        let seen = match s {
            Vertex::Black(i) => seen_b[i],
            Vertex::White(j) => seen_w[j],
        };
        if seen {
            continue;
        }
        let mut rec = ComponentRecord {
            blacks: Vec::new(),
            whites: Vec::new(),
            x_mass: 0.0,
            y_mass: 0.0,
            edge_count: 0,
            surplus: 0,
            diameter_bound: 0,
        };
        let mut queue = VecDeque::from([(s, 0usize)]);
        match s {
            Vertex::Black(i) => seen_b[i] = true,
            Vertex::White(j) => seen_w[j] = true,
        }
        let mut ecc = 0;
        while let Some((v, d)) = queue.pop_front() {
            ecc = ecc.max(d);
            match v {
                Vertex::Black(i) => {
                    rec.blacks.push(i);
                    rec.x_mass += g.x[i];
                    rec.edge_count += g.black_neighbors(i).len();
                    for &j in g.black_neighbors(i) {
                        if !seen_w[j] {
                            seen_w[j] = true;
                            queue.push_back((Vertex::White(j), d + 1));
                        }
                    }
                }
                Vertex::White(j) => {
                    rec.whites.push(j);
                    rec.y_mass += g.y[j];
                    for &i in g.white_neighbors(j) {
                        if !seen_b[i] {
                            seen_b[i] = true;
                            queue.push_back((Vertex::Black(i), d + 1));
                        }
                    }
                }
            }
        }
        rec.blacks.sort_unstable();
        rec.whites.sort_unstable();
        rec.surplus = rec.edge_count + 1 - rec.size();
        rec.diameter_bound = 2 * ecc;
        out.push(rec);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub pairs_checked: usize,
    pub violations: usize,
}

impl IsometryReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `d_B(b_i, b_j) = 2 d_G(i, j)` for every pair of blacks in one component.
pub fn isometry_check(g: &BipartiteGraph, ig: &SimpleGraph) -> IsometryReport {
    let mut rep = IsometryReport { pairs_checked: 0, violations: 0 };
    for i in 0..g.n_black() {
        let db = bfs_distances(g, Vertex::Black(i));
        let dg = ig.bfs(i);
        for j in (i + 1)..g.n_black() {
            match (db.black[j], dg[j]) {
                (Some(a), Some(b)) => {
                    rep.pairs_checked += 1;
                    if a != 2 * b {
                        rep.violations += 1;
                    }
                }
                (None, None) => {}
                _ => rep.violations += 1,
            }
        }
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringEstimate {
    /// `None` when no vertex has two neighbours.
    pub value: Option<f64>,
    pub std_error: f64,
    pub wedges_sampled: usize,
}

/// Wedge weight `d(d-1)` of each vertex.
fn wedge_weights(ig: &SimpleGraph) -> Vec<f64> {
    (0..ig.len()).map(|v| {
        let d = ig.degree(v) as f64;
        d * (d - 1.0)
    }).collect()
}

fn sample_index<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().unwrap();
    let u = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// Samples a uniform ordered triple `(v1, v2, v3)` conditioned on `v1 ~ v2`, `v1 ~ v3`.
fn sample_wedge<R: Rng + ?Sized>(ig: &SimpleGraph, cumulative: &[f64], rng: &mut R) -> bool {
    let center = sample_index(cumulative, rng);
    let nb = ig.neighbors(center);
    let a = rng.gen_range(0..nb.len());
    let mut b = rng.gen_range(0..nb.len() - 1);
    if b >= a {
        b += 1;
    }
    ig.has_edge(nb[a], nb[b])
}

/// Clustering coefficient of a fixed graph by wedge sampling.
pub fn clustering_of_graph<R: Rng + ?Sized>(ig: &SimpleGraph, trials: usize, rng: &mut R) -> ClusteringEstimate {
    let w = wedge_weights(ig);
    let cumulative: Vec<f64> = w.iter().scan(0.0, |acc, &v| { *acc += v; Some(*acc) }).collect();
    if cumulative.last().copied().unwrap_or(0.0) == 0.0 || trials == 0 {
        return ClusteringEstimate { value: None, std_error: f64::NAN, wedges_sampled: 0 };
    }
    let closed = (0..trials).filter(|_| sample_wedge(ig, &cumulative, rng)).count();
    let p = closed as f64 / trials as f64;
    ClusteringEstimate { value: Some(p), std_error: (p * (1.0 - p) / trials as f64).sqrt(), wedges_sampled: trials }
}

/// `P(V2 ~ V3 | V1 ~ V2, V1 ~ V3)` for uniform distinct blacks, estimated over `graphs`
/// independent intersection graphs with `trials` wedges in total.
pub fn clustering_estimate(pair: &CriticalPair, graphs: usize, trials: usize, seed: u64) -> Result<ClusteringEstimate> {
    if pair.n < 3 {
        return invalid("clustering needs at least three black vertices");
    }
    if graphs == 0 {
        return invalid("need at least one graph");
    }
    let samples: Vec<SimpleGraph> = (0..graphs)
        .map(|k| intersection_graph(&sample_direct_pair(pair, seed.wrapping_add(k as u64))))
        .collect();
    let weights: Vec<Vec<f64>> = samples.iter().map(wedge_weights).collect();
    let per_graph: Vec<f64> = weights.iter().map(|w| w.iter().sum()).collect();
    let graph_cum: Vec<f64> = per_graph.iter().scan(0.0, |a, &v| { *a += v; Some(*a) }).collect();
    if *graph_cum.last().unwrap() == 0.0 {
        return Ok(ClusteringEstimate { value: None, std_error: f64::NAN, wedges_sampled: 0 });
    }
    let cums: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| w.iter().scan(0.0, |a, &v| { *a += v; Some(*a) }).collect())
        .collect();
    let mut rng = replicate_rng(seed, u64::MAX - 1);
    let mut closed = 0usize;
    for _ in 0..trials {
        let gi = sample_index(&graph_cum, &mut rng);
        if sample_wedge(&samples[gi], &cums[gi], &mut rng) {
            closed += 1;
        }
    }
    let p = closed as f64 / trials as f64;
    Ok(ClusteringEstimate { value: Some(p), std_error: (p * (1.0 - p) / trials as f64).sqrt(), wedges_sampled: trials })
}
