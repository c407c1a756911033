//! LIFO-queue exploration of the bipartite graph: exponential clocks, queue
//! evolution, spanning forest, black forest and surplus candidates.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{BipartiteGraph, Vertex};

/// Arrival clocks: black `i` rings at `Exp(x_i / z)`, white `j` at `Exp(y_j / z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockSet {
    pub black: Vec<f64>,
    pub white: Vec<f64>,
}

fn redraw_ties<R: Rng + ?Sized>(clocks: &mut [f64], weights: &[f64], z: f64, rng: &mut R) {
    loop {
        let mut idx: Vec<usize> = (0..clocks.len()).collect();
        idx.sort_by(|&a, &b| clocks[a].total_cmp(&clocks[b]));
        let mut tie = None;
        for w in idx.windows(2) {
            if clocks[w[0]] == clocks[w[1]] {
                tie = Some(w[1]);
                break;
            }
        }
        match tie {
            None => return,
            Some(k) => {
                let e: f64 = Exp1.sample(rng);
                clocks[k] = z * e / weights[k];
            }
        }
    }
}

impl ClockSet {
    pub fn new(black: Vec<f64>, white: Vec<f64>) -> Result<Self> {
        for set in [&black, &white] {
            if set.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
                return invalid("clocks must be finite and positive");
            }
            let mut s = set.clone();
            s.sort_by(f64::total_cmp);
            if s.windows(2).any(|w| w[0] == w[1]) {
                return invalid("clocks of one colour must be distinct");
            }
        }
        Ok(ClockSet { black, white })
    }

    pub fn sample<R: Rng + ?Sized>(x: &[f64], y: &[f64], z: f64, rng: &mut R) -> Self {
        let draw = |w: &[f64], rng: &mut R| -> Vec<f64> {
            w.iter()
                .map(|&wi| loop {
                    let e: f64 = Exp1.sample(rng);
                    let c = z * e / wi;
                    if c > 0.0 && c.is_finite() {
                        break c;
                    }
                })
                .collect()
        };
        let mut black = draw(x, rng);
        let mut white = draw(y, rng);
        redraw_ties(&mut black, x, z, rng);
        redraw_ties(&mut white, y, z, rng);
        ClockSet { black, white }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub white: usize,
    pub remaining: f64,
}

/// Queue contents listed from the head, with both dials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueState {
    pub step: usize,
    pub tau_b: f64,
    pub tau_w: f64,
    pub queue: Vec<QueueEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepKind {
    /// Queue was empty; the black starts a new tree.
    Root { black: usize },
    /// The black arrived while `server` was being served.
    Interrupt { black: usize, server: usize },
    /// The head white finished its service.
    Complete { white: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub kind: StepKind,
    pub state: QueueState,
}

/// A pair `(V_k, w_j)` with `w_j` waiting when `V_k` arrived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurplusCandidate {
    pub step: usize,
    pub black: usize,
    pub white: usize,
    /// Remaining service of the white at the black's arrival.
    pub remaining: f64,
}

/// Bipartite spanning forest with ordered children.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub black_parent: Vec<Option<usize>>,
    pub white_parent: Vec<Option<usize>>,
    pub black_children: Vec<Vec<usize>>,
    pub white_children: Vec<Vec<usize>>,
    /// Black roots in arrival order, followed by unreached whites.
    pub roots: Vec<Vertex>,
}

impl Forest {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (b, ws) in self.black_children.iter().enumerate() {
            out.extend(ws.iter().map(|&w| (b, w)));
        }
        for (w, bs) in self.white_children.iter().enumerate() {
            out.extend(bs.iter().map(|&b| (b, w)));
        }
        out
    }

    /// Depth with roots at height 1.
    pub fn height(&self, v: Vertex) -> usize {
        let mut h = 1;
        let mut cur = v;
        loop {
            let parent = match cur {
                Vertex::Black(i) => self.black_parent[i].map(Vertex::White),
                Vertex::White(j) => self.white_parent[j].map(Vertex::Black),
            };
            match parent {
                Some(p) => {
                    h += 1;
                    cur = p;
                }
                None => return h,
            }
        }
    }
}

/// Full trace of one exploration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
    pub clocks: ClockSet,
    pub steps: Vec<Step>,
    /// Blacks in the order they are appointed.
    pub black_order: Vec<usize>,
    /// Interval `I(i)` of white clocks claimed by black `i`.
    pub intervals: Vec<(f64, f64)>,
    /// Total white weight claimed by each black.
    pub delta: Vec<f64>,
    pub forest: Forest,
    pub candidates: Vec<SurplusCandidate>,
}

impl ExplorationRecord {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn offspring(&self, black: usize) -> &[usize] {
        &self.forest.black_children[black]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::ModelError::Parse(e.to_string()))
    }
}

fn snapshot(step: usize, tau_b: f64, tau_w: f64, stack: &[QueueEntry]) -> QueueState {
    QueueState { step, tau_b, tau_w, queue: stack.iter().rev().copied().collect() }
}

/// Runs the LIFO-queue exploration on fixed weights and clocks.
pub fn explore(x: &[f64], y: &[f64], z: f64, clocks: &ClockSet) -> ExplorationRecord {
    let n = x.len();
    let m = y.len();
    let mut black_sorted: Vec<usize> = (0..n).collect();
    black_sorted.sort_by(|&a, &b| clocks.black[a].total_cmp(&clocks.black[b]));
    let mut white_sorted: Vec<usize> = (0..m).collect();
    white_sorted.sort_by(|&a, &b| clocks.white[a].total_cmp(&clocks.white[b]));

    let mut forest = Forest {
        black_parent: vec![None; n],
        white_parent: vec![None; m],
        black_children: vec![Vec::new(); n],
        white_children: vec![Vec::new(); m],
        roots: Vec::new(),
    };
    let mut intervals = vec![(0.0, 0.0); n];
    let mut delta = vec![0.0; n];
    let mut steps = Vec::with_capacity(n + m);
    let mut candidates = Vec::new();
    let mut black_order = Vec::with_capacity(n);
    // top of the queue is the last element
    let mut stack: Vec<QueueEntry> = Vec::new();
    let mut tau_b = 0.0f64;
    let mut tau_w = 0.0f64;
    let mut next_black = 0usize;
    let mut next_white = 0usize;

    let appoint = |black: usize,
                       tau_w: &mut f64,
                       next_white: &mut usize,
                       stack: &mut Vec<QueueEntry>,
                       forest: &mut Forest,
                       intervals: &mut Vec<(f64, f64)>,
                       delta: &mut Vec<f64>| {
        let lo = *tau_w;
        let hi = lo + x[black];
        intervals[black] = (lo, hi);
        *tau_w = hi;
        let start = *next_white;
        while *next_white < m && clocks.white[white_sorted[*next_white]] <= hi {
            *next_white += 1;
        }
        let newcomers = &white_sorted[start..*next_white];
        for &w in newcomers {
            forest.white_parent[w] = Some(black);
        }
        forest.black_children[black] = newcomers.to_vec();
        delta[black] = newcomers.iter().map(|&w| y[w]).sum();
        for &w in newcomers.iter().rev() {
            stack.push(QueueEntry { white: w, remaining: y[w] });
        }
    };

    loop {
        let k = steps.len() + 1;
        let upcoming = black_sorted.get(next_black).copied();
        let kind = match stack.last().copied() {
            None => {
                let Some(v) = upcoming else { break };
                next_black += 1;
                tau_b = clocks.black[v];
                forest.roots.push(Vertex::Black(v));
                black_order.push(v);
                appoint(v, &mut tau_w, &mut next_white, &mut stack, &mut forest, &mut intervals, &mut delta);
                StepKind::Root { black: v }
            }
            Some(head) => {
                let interrupt = match upcoming {
                    Some(v) => clocks.black[v] - tau_b < head.remaining,
                    None => false,
                };
                if interrupt {
                    let v = upcoming.unwrap();
                    next_black += 1;
                    let elapsed = clocks.black[v] - tau_b;
                    let top = stack.len() - 1;
                    stack[top].remaining = head.remaining - elapsed;
                    for e in stack.iter().rev() {
                        candidates.push(SurplusCandidate { step: k, black: v, white: e.white, remaining: e.remaining });
                    }
                    tau_b = clocks.black[v];
                    forest.black_parent[v] = Some(head.white);
                    forest.white_children[head.white].push(v);
                    black_order.push(v);
                    appoint(v, &mut tau_w, &mut next_white, &mut stack, &mut forest, &mut intervals, &mut delta);
                    StepKind::Interrupt { black: v, server: head.white }
                } else {
                    tau_b += head.remaining;
                    stack.pop();
                    StepKind::Complete { white: head.white }
                }
            }
        };
        steps.push(Step { kind, state: snapshot(k, tau_b, tau_w, &stack) });
    }
    for &w in &white_sorted[next_white..] {
        forest.roots.push(Vertex::White(w));
    }

    ExplorationRecord {
        x: x.to_vec(),
        y: y.to_vec(),
        z,
        clocks: clocks.clone(),
        steps,
        black_order,
        intervals,
        delta,
        forest,
        candidates,
    }
}

/// Rooted ordered forest on `0..len`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedForest {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub roots: Vec<usize>,
}

impl OrderedForest {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Depth with roots at height 1.
    pub fn height(&self, v: usize) -> usize {
        let mut h = 1;
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            h += 1;
            cur = p;
        }
        h
    }

    /// Tree distance, `None` across trees.
    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        let path = |mut v: usize| {
            let mut p = vec![v];
            while let Some(u) = self.parent[v] {
                p.push(u);
                v = u;
            }
            p
        };
        let pa = path(a);
        let pb = path(b);
        if pa.last() != pb.last() {
            return None;
        }
        let (mut i, mut j) = (pa.len(), pb.len());
        while i > 0 && j > 0 && pa[i - 1] == pb[j - 1] {
            i -= 1;
            j -= 1;
        }
        Some(i + j)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len()).filter_map(|v| self.parent[v].map(|p| (p, v))).collect()
    }
}

/// Genealogy of a LIFO queue: client `i` is a child of `j` when its arrival
/// interrupts the service of `j`.
pub fn generic_lifo_genealogy(arrivals: &[f64], services: &[f64]) -> Result<OrderedForest> {
    if arrivals.len() != services.len() {
        return invalid("arrivals and services differ in length");
    }
    if services.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
        return invalid("services must be finite and nonnegative");
    }
    let len = arrivals.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| arrivals[a].total_cmp(&arrivals[b]));
    if order.windows(2).any(|w| arrivals[w[0]] >= arrivals[w[1]]) {
        return invalid("arrival times must be distinct");
    }
    let mut forest = OrderedForest { parent: vec![None; len], children: vec![Vec::new(); len], roots: Vec::new() };
    let mut stack: Vec<(usize, f64)> = Vec::new();
    let mut clock = f64::NEG_INFINITY;
    for &i in &order {
        let mut elapsed = arrivals[i] - clock;
        while let Some(top) = stack.last_mut() {
            if top.1 <= elapsed {
                elapsed -= top.1;
                stack.pop();
            } else {
                top.1 -= elapsed;
                break;
            }
        }
        clock = arrivals[i];
        match stack.last() {
            Some(&(j, _)) => {
                forest.parent[i] = Some(j);
                forest.children[j].push(i);
            }
            None => forest.roots.push(i),
        }
        if services[i] > 0.0 {
            stack.push((i, services[i]));
        }
    }
    Ok(forest)
}

/// Contracts the bipartite forest: `b` is the parent of `b'` iff `b` is the grandparent of `b'`.
pub fn black_forest(record: &ExplorationRecord) -> OrderedForest {
    let n = record.x.len();
    let f = &record.forest;
    let mut out = OrderedForest { parent: vec![None; n], children: vec![Vec::new(); n], roots: Vec::new() };
    for &b in &record.black_order {
        match f.black_parent[b].and_then(|w| f.white_parent[w]) {
            Some(p) => {
                out.parent[b] = Some(p);
                out.children[p].push(b);
            }
            None => out.roots.push(b),
        }
    }
    out
}

/// Keeps each candidate independently with probability `1 - exp(-remaining · x / z)`.
pub fn sample_surplus_direct<R: Rng + ?Sized>(record: &ExplorationRecord, rng: &mut R) -> Vec<(usize, usize)> {
    record
        .candidates
        .iter()
        .filter(|c| {
            let p = -(-c.remaining * record.x[c.black] / record.z).exp_m1();
            rng.gen::<f64>() < p
        })
        .map(|c| (c.black, c.white))
        .collect()
}

/// Forest edges plus surplus edges as a simple bipartite graph.
pub fn assemble_graph(record: &ExplorationRecord, surplus: &[(usize, usize)]) -> BipartiteGraph {
    let mut edges = record.forest.edges();
    edges.extend_from_slice(surplus);
    BipartiteGraph::from_edges(record.x.clone(), record.y.clone(), record.z, edges).expect("record weights are positive")
}
