//! Poissonized surplus: atoms under the reflected queue-load path, mapped to pairs of blacks.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::encoding::{Schedule, SigmaTransfer};
use crate::lifo::{black_forest, ExplorationRecord};

/// One Poisson atom `(s, y)` with its image `(t, t')` and the blacks served at those times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurplusAtom {
    pub s: f64,
    pub y: f64,
    pub t: f64,
    pub t_prime: f64,
    pub black: usize,
    pub partner: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonizedSurplus {
    pub atoms: Vec<SurplusAtom>,
    /// Distinct pairs `(b, b')` with `b ≠ b'`, sorted.
    pub edges: Vec<(usize, usize)>,
}

pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// `t' = sup{u ≤ t : R_u ≤ y}` and the black arriving at `t'`; `(t, served)` when `R_t ≤ y`.
pub fn map_atom(record: &ExplorationRecord, schedule: &Schedule, t: f64, y: f64, served: usize) -> Option<(f64, usize)> {
    if schedule.load_at(t) <= y {
        return Some((t, served));
    }
    let upto = schedule.arrivals.partition_point(|a| a.time <= t);
    schedule.arrivals[..upto]
        .iter()
        .rev()
        .find(|a| record.delta[a.client] > 0.0 && a.load_before <= y)
        .map(|a| (a.time, a.client))
}

/// Point process of rate `1/z` on `{(Σ(t), y) : 0 ≤ y ≤ R_t}`, mapped to black pairs.
pub fn poissonized_surplus<R: Rng + ?Sized>(record: &ExplorationRecord, sigma: &SigmaTransfer, rng: &mut R) -> PoissonizedSurplus {
    let schedule = &sigma.schedule;
    let mut atoms = Vec::new();
    for (idx, seg) in schedule.segments.iter().enumerate() {
        let len = seg.end - seg.start;
        if len <= 0.0 {
            continue;
        }
        let top = seg.load_start;
        // ∫ R over the segment, R decreasing linearly from `top`
        let under = top * len - 0.5 * len * len;
        let slope = sigma.slope(record, idx);
        let count = poisson_count(slope * under / record.z, rng);
        let s0 = sigma.path.value(seg.start);
        for _ in 0..count {
            let u: f64 = rng.gen();
            let tau = 2.0 * u * under / (top + (top * top - 2.0 * u * under).max(0.0).sqrt());
            let t = seg.start + tau.min(len);
            let y = rng.gen::<f64>() * seg.load_at(t);
            push_atom(record, schedule, s0 + slope * (t - seg.start), y, t, seg.client, &mut atoms);
        }
    }
    for a in &schedule.arrivals {
        if record.delta[a.client] > 0.0 || a.load_before <= 0.0 {
            continue;
        }
        let count = poisson_count(record.x[a.client] * a.load_before / record.z, rng);
        let s0 = sigma.path.left_limit(a.time);
        for _ in 0..count {
            let s = s0 + rng.gen::<f64>() * record.x[a.client];
            let y = rng.gen::<f64>() * a.load_before;
            push_atom(record, schedule, s, y, a.time, a.client, &mut atoms);
        }
    }
    let mut edges: Vec<(usize, usize)> = atoms.iter().filter(|a| a.black != a.partner).map(|a| (a.black, a.partner)).collect();
    edges.sort_unstable();
    edges.dedup();
    PoissonizedSurplus { atoms, edges }
}

fn push_atom(
    record: &ExplorationRecord,
    schedule: &Schedule,
    s: f64,
    y: f64,
    t: f64,
    black: usize,
    atoms: &mut Vec<SurplusAtom>,
) {
    if let Some((t_prime, partner)) = map_atom(record, schedule, t, y, black) {
        atoms.push(SurplusAtom { s, y, t, t_prime, black, partner });
    }
}

/// Maps direct surplus edges `(b, w)` to `(b, parent of w)`, as distinct sorted pairs.
pub fn direct_surplus_pairs(record: &ExplorationRecord, surplus: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = surplus
        .iter()
        .filter_map(|&(b, w)| record.forest.white_parent[w].map(|p| (b, p)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Surplus pair counts per tree of the black forest, for trees containing at least one edge.
pub fn surplus_counts_by_component(record: &ExplorationRecord, pairs: &[(usize, usize)]) -> Vec<usize> {
    let forest = black_forest(record);
    let n = forest.len();
    let mut root = vec![usize::MAX; n];
    for &r in &forest.roots {
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            root[v] = r;
            stack.extend(forest.children[v].iter().copied());
        }
    }
    let mut counts = vec![0usize; n];
    for &(b, _) in pairs {
        counts[root[b]] += 1;
    }
    forest
        .roots
        .iter()
        .filter(|&&r| record.delta[r] > 0.0)
        .map(|&r| counts[r])
        .collect()
}
