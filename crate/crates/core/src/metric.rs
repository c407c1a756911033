//! Metric spaces coded by nonnegative functions, shortcut graphs and GHP estimates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError, Result};
use crate::graph::SimpleGraph;
use crate::lifo::ExplorationRecord;

/// Points at `d_h` below this are identified.
pub const QUOTIENT_TOL: f64 = 1e-9;
/// Largest space accepted by the exhaustive GHP search.
pub const EXACT_SMALL_MAX: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Continuity {
    /// Linear interpolation between knots.
    Continuous,
    /// Right-continuous step function, constant on `[t_k, t_{k+1})`.
    FiniteRange,
}

/// Nonnegative function on `[0, ζ]` given by knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodedFunction {
    pub zeta: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub continuity: Continuity,
}

impl CodedFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>, zeta: f64, continuity: Continuity) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return invalid("need matching nonempty knot and value lists");
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("knots must start at 0 and increase strictly");
        }
        if !(zeta > 0.0) || *times.last().unwrap() > zeta {
            return invalid("domain end must be positive and cover the knots");
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return invalid("values must be finite and nonnegative");
        }
        Ok(CodedFunction { zeta, times, values, continuity })
    }

    /// Piecewise-linear function through `(t_k, v_k)` on `[0, t_last]`.
    pub fn continuous(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let zeta = times.last().copied().unwrap_or(0.0);
        Self::new(times, values, zeta, Continuity::Continuous)
    }

    /// Step function with value `v_k` on `[t_k, t_{k+1})` and the last value up to `ζ`.
    pub fn step(times: Vec<f64>, values: Vec<f64>, zeta: f64) -> Result<Self> {
        Self::new(times, values, zeta, Continuity::FiniteRange)
    }

    /// Step function with unit-length pieces.
    pub fn from_steps(values: &[f64]) -> Result<Self> {
        Self::step((0..values.len()).map(|k| k as f64).collect(), values.to_vec(), values.len() as f64)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.times.clone(), self.values.iter().map(|v| v * factor).collect(), self.zeta, self.continuity)
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.zeta);
        let k = self.times.partition_point(|&s| s <= t) - 1;
        match self.continuity {
            Continuity::FiniteRange => self.values[k],
            Continuity::Continuous => {
                if k + 1 == self.times.len() {
                    self.values[k]
                } else {
                    let (t0, t1) = (self.times[k], self.times[k + 1]);
                    let w = (t - t0) / (t1 - t0);
                    self.values[k] * (1.0 - w) + self.values[k + 1] * w
                }
            }
        }
    }

    /// `ĥ`: the function extended by zero past `ζ`.
    pub fn extended(&self, t: f64) -> f64 {
        if t > self.zeta {
            0.0
        } else {
            self.value(t)
        }
    }

    /// `ĥ(t−)`.
    fn extended_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.extended(0.0);
        }
        if t > self.zeta {
            return 0.0;
        }
        match self.continuity {
            Continuity::Continuous => self.value(t),
            Continuity::FiniteRange => {
                let k = self.times.partition_point(|&s| s < t);
                self.values[k - 1]
            }
        }
    }

    /// `min{h(u) : s ≤ u ≤ t}`.
    pub fn min_on(&self, s: f64, t: f64) -> f64 {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let a = self.times.partition_point(|&u| u <= lo);
        let b = self.times.partition_point(|&u| u < hi);
        let inner = self.values[a.min(b)..b].iter().copied().fold(f64::INFINITY, f64::min);
        inner.min(self.value(lo)).min(self.value(hi))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.times.clone();
        pts.push(self.zeta);
        pts
    }

    /// `sup |ĥ_1 − ĥ_2|`.
    pub fn sup_distance(&self, other: &CodedFunction) -> f64 {
        let mut pts = self.breakpoints();
        pts.extend(other.breakpoints());
        let far = self.zeta.max(other.zeta) + 1.0;
        pts.push(far);
        pts.iter()
            .map(|&t| {
                let right = (self.extended(t) - other.extended(t)).abs();
                let left = (self.extended_left(t) - other.extended_left(t)).abs();
                right.max(left)
            })
            .fold(0.0, f64::max)
    }

    /// `ω_δ(ĥ) = sup{|ĥ(s) − ĥ(t)| : |s − t| ≤ δ}`.
    pub fn modulus(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        let knots = self.breakpoints();
        let mut starts: Vec<f64> = vec![0.0];
        for &k in &knots {
            starts.push(k);
            if k - delta >= 0.0 {
                starts.push(k - delta);
            }
        }
        starts
            .into_iter()
            .map(|x| {
                let y = x + delta;
                let mut lo = self.extended(x).min(self.extended(y)).min(self.extended_left(y));
                let mut hi = self.extended(x).max(self.extended(y)).max(self.extended_left(y));
                for &k in knots.iter().filter(|&&k| k > x && k < y) {
                    for v in [self.extended(k), self.extended_left(k)] {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if y > self.zeta && x <= self.zeta {
                    lo = lo.min(0.0);
                }
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// `d_h(s, t) = h(s) + h(t) − 2 min_{[s,t]} h`.
pub fn d_h(h: &CodedFunction, s: f64, t: f64) -> f64 {
    if s == t {
        return 0.0;
    }
    (h.value(s) + h.value(t) - 2.0 * h.min_on(s, t)).max(0.0)
}

/// Finite metric space with point masses; `points` are representative times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasuredMetricSpace {
    pub points: Vec<f64>,
    dist: Vec<f64>,
    pub mass: Vec<f64>,
}

impl FiniteMeasuredMetricSpace {
    pub fn new(points: Vec<f64>, dist: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if dist.len() != n * n || mass.len() != n {
            return invalid("distance matrix and masses must match the point count");
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return invalid("diagonal must vanish");
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !(d >= 0.0) || (d - dist[j * n + i]).abs() > QUOTIENT_TOL {
                    return invalid("distances must be symmetric and nonnegative");
                }
            }
        }
        if mass.iter().any(|m| !(*m >= 0.0)) {
            return invalid("masses must be nonnegative");
        }
        Ok(FiniteMeasuredMetricSpace { points, dist, mass })
    }

    pub fn from_matrix(rows: &[Vec<f64>], mass: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        Self::new((0..n).map(|k| k as f64).collect(), rows.iter().flatten().copied().collect(), mass)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn triangle_violations(&self, tol: f64) -> usize {
        let n = self.len();
        let mut bad = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d(i, k) > self.d(i, j) + self.d(j, k) + tol {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    /// CSV: one row per point with its mass followed by its distance row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| ModelError::Io(e.to_string());
        let n = self.len();
        let mut header = vec!["point".to_string(), "mass".to_string()];
        header.extend((0..n).map(|j| format!("d{j}")));
        w.write_record(&header).map_err(io)?;
        for i in 0..n {
            let mut row = vec![self.points[i].to_string(), self.mass[i].to_string()];
            row.extend((0..n).map(|j| self.d(i, j).to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| ModelError::Io(e.to_string()))
    }
}

/// Violations of `d(1,2) + d(3,4) ≤ max{d(1,3) + d(2,4), d(1,4) + d(2,3)}` among the given times.
pub fn four_point_violations(h: &CodedFunction, quadruples: &[[f64; 4]], tol: f64) -> usize {
    quadruples
        .iter()
        .filter(|q| {
            let d = |a: usize, b: usize| d_h(h, q[a], q[b]);
            d(0, 1) + d(2, 3) > (d(0, 2) + d(1, 3)).max(d(0, 3) + d(1, 2)) + tol
        })
        .count()
}

/// Times with masses, sorted by time.
struct Sampled {
    times: Vec<f64>,
    mass: Vec<f64>,
}

fn uniform_samples(h: &CodedFunction, count: usize) -> Sampled {
    let step = h.zeta / (count - 1) as f64;
    let times: Vec<f64> = (0..count).map(|j| (j as f64 * step).min(h.zeta)).collect();
    let each = h.zeta / count as f64;
    let mut mass = vec![each; count];
    let rest: f64 = mass[..count - 1].iter().sum();
    mass[count - 1] = h.zeta - rest;
    Sampled { times, mass }
}

fn piece_samples(h: &CodedFunction) -> Sampled {
    let mut ends = h.times[1..].to_vec();
    ends.push(h.zeta);
    let mass = h.times.iter().zip(&ends).map(|(a, b)| b - a).collect();
    Sampled { times: h.times.clone(), mass }
}

/// Adds zero-mass points at `extra` times not already present; returns the index of each extra time.
fn with_extra(mut s: Sampled, extra: &[f64]) -> (Sampled, Vec<usize>) {
    for &t in extra {
        if s.times.binary_search_by(|u| u.total_cmp(&t)).is_err() {
            let at = s.times.partition_point(|&u| u < t);
            s.times.insert(at, t);
            s.mass.insert(at, 0.0);
        }
    }
    let idx = extra.iter().map(|&t| s.times.binary_search_by(|u| u.total_cmp(&t)).unwrap()).collect();
    (s, idx)
}

/// `d_h` among sorted times, one sweep per row.
fn dh_matrix(h: &CodedFunction, times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let vals: Vec<f64> = times.iter().map(|&t| h.value(t)).collect();
    // minimum of h over (t_{j−1}, t_j]
    let gap_min: Vec<f64> = (0..n)
        .map(|j| {
            if j == 0 {
                return vals[0];
            }
            let a = h.times.partition_point(|&u| u <= times[j - 1]);
            let b = h.times.partition_point(|&u| u < times[j]);
            h.values[a.min(b)..b].iter().copied().fold(vals[j], f64::min)
        })
        .collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        let mut low = vals[i];
        for j in i + 1..n {
            low = low.min(gap_min[j]);
            let d = (vals[i] + vals[j] - 2.0 * low).max(0.0);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    dist
}

fn merge_classes(times: Vec<f64>, dist: Vec<f64>, mass: Vec<f64>) -> FiniteMeasuredMetricSpace {
    let n = times.len();
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for i in 0..n {
        if class[i] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(i);
        for j in i..n {
            if class[j] == usize::MAX && dist[i * n + j] < QUOTIENT_TOL {
                class[j] = c;
            }
        }
    }
    let k = reps.len();
    let mut m = vec![0.0; k];
    for i in 0..n {
        m[class[i]] += mass[i];
    }
    let mut d = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            if a != b {
                d[a * k + b] = dist[reps[a] * n + reps[b]];
            }
        }
    }
    FiniteMeasuredMetricSpace { points: reps.iter().map(|&i| times[i]).collect(), dist: d, mass: m }
}

/// Sampling of `[0, ζ]` for the quotient constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    /// One point per constant piece; exact for step functions.
    Pieces,
    /// `count` uniform samples including both endpoints.
    Uniform(usize),
}

fn sample(h: &CodedFunction, resolution: Resolution) -> Result<Sampled> {
    match resolution {
        Resolution::Pieces => {
            if h.continuity != Continuity::FiniteRange {
                return invalid("piece sampling needs a step function");
            }
            Ok(piece_samples(h))
        }
        Resolution::Uniform(count) => {
            if count < 2 {
                return invalid("need at least two samples");
            }
            Ok(uniform_samples(h, count))
        }
    }
}

/// Sampled `𝓣_h`: points at `d_h = 0` merged, Lebesgue mass pushed forward.
pub fn quotient_space(h: &CodedFunction, resolution: Resolution) -> Result<FiniteMeasuredMetricSpace> {
    let s = sample(h, resolution)?;
    let dist = dh_matrix(h, &s.times);
    Ok(merge_classes(s.times, dist, s.mass))
}

/// `𝒢(h, ϖ, ε)`: shortest paths where each pair in `ϖ` costs `min(ε, d_h)`.
pub fn shortcut_graph(
    h: &CodedFunction,
    pairs: &[(f64, f64)],
    epsilon: f64,
    resolution: Resolution,
) -> Result<FiniteMeasuredMetricSpace> {
    if !(epsilon >= 0.0) {
        return invalid("ε must be nonnegative");
    }
    if pairs.iter().any(|&(u, v)| !(0.0..=h.zeta).contains(&u) || !(0.0..=h.zeta).contains(&v)) {
        return invalid("shortcut endpoints must lie in the domain");
    }
    let ends: Vec<f64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let (s, idx) = with_extra(sample(h, resolution)?, &ends);
    let n = s.times.len();
    let mut dist = dh_matrix(h, &s.times);
    if !pairs.is_empty() {
        let mut hubs: Vec<usize> = idx.clone();
        hubs.sort_unstable();
        hubs.dedup();
        let p = hubs.len();
        let pos = |v: usize| hubs.binary_search(&v).unwrap();
        let mut hub = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..p {
                hub[a * p + b] = dist[hubs[a] * n + hubs[b]];
            }
        }
        for k in 0..pairs.len() {
            let (a, b) = (pos(idx[2 * k]), pos(idx[2 * k + 1]));
            let c = epsilon.min(hub[a * p + b]);
            hub[a * p + b] = c;
            hub[b * p + a] = c;
        }
        for k in 0..p {
            for a in 0..p {
                for b in 0..p {
                    let via = hub[a * p + k] + hub[k * p + b];
                    if via < hub[a * p + b] {
                        hub[a * p + b] = via;
                    }
                }
            }
        }
        // reach[i][b]: best cost from point i to hub b entering the hub network anywhere
        let mut reach = vec![f64::INFINITY; n * p];
        for i in 0..n {
            for a in 0..p {
                let to_a = dist[i * n + hubs[a]];
                for b in 0..p {
                    let c = to_a + hub[a * p + b];
                    if c < reach[i * p + b] {
                        reach[i * p + b] = c;
                    }
                }
            }
        }
        let base = dist.clone();
        for i in 0..n {
            for j in 0..n {
                let mut best = base[i * n + j];
                for b in 0..p {
                    best = best.min(reach[i * p + b] + base[hubs[b] * n + j]);
                }
                dist[i * n + j] = best;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let d = dist[i * n + j].min(dist[j * n + i]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
    }
    Ok(merge_classes(s.times, dist, s.mass))
}

/// Two-sided GHP estimate: `lower ≤ d_GHP ≤ upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhpEstimate {
    pub upper: f64,
    pub lower: f64,
}

/// Distances `d(a, b)` of a gluing of `A ⊔ B`, plus `r`.
struct Gluing {
    cross: Vec<f64>,
}

fn bridge_gluing(a: &FiniteMeasuredMetricSpace, b: &FiniteMeasuredMetricSpace, relation: &[(usize, usize)]) -> Gluing {
    let mut dis = 0.0f64;
    for &(x, y) in relation {
        for &(x2, y2) in relation {
            dis = dis.max((a.d(x, x2) - b.d(y, y2)).abs());
        }
    }
    let r = 0.5 * dis;
    let (na, nb) = (a.len(), b.len());
    let mut cross = vec![f64::INFINITY; na * nb];
    for i in 0..na {
        for j in 0..nb {
            for &(x, y) in relation {
                let c = a.d(i, x) + r + b.d(y, j);
                if c < cross[i * nb + j] {
                    cross[i * nb + j] = c;
                }
            }
        }
    }
    Gluing { cross }
}

fn hausdorff(cross: &[f64], na: usize, nb: usize) -> f64 {
    let row = (0..na).map(|i| (0..nb).map(|j| cross[i * nb + j]).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let col = (0..nb).map(|j| (0..na).map(|i| cross[i * nb + j]).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    row.max(col)
}

/// `inf{ε : μ(F) ≤ ν(F^ε) + ε}` over all subsets `F` of the first space.
fn prokhorov_side(mass_f: &[f64], mass_g: &[f64], cross: impl Fn(usize, usize) -> f64) -> f64 {
    let nf = mass_f.len();
    let ng = mass_g.len();
    let mut worst = 0.0f64;
    for set in 1u32..(1 << nf) {
        let mu: f64 = (0..nf).filter(|i| set >> i & 1 == 1).map(|i| mass_f[i]).sum();
        let reach: Vec<f64> = (0..ng)
            .map(|j| (0..nf).filter(|i| set >> i & 1 == 1).map(|i| cross(i, j)).fold(f64::INFINITY, f64::min))
            .collect();
        let mut levels: Vec<f64> = reach.clone();
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut best = f64::INFINITY;
        for (k, &d) in levels.iter().enumerate() {
            let covered: f64 = (0..ng).filter(|&j| reach[j] <= d).map(|j| mass_g[j]).sum();
            let need = d.max(mu - covered);
            let next = levels.get(k + 1).copied().unwrap_or(f64::INFINITY);
            if need < next {
                best = best.min(need);
            }
        }
        worst = worst.max(best);
    }
    worst
}

fn prokhorov(a: &FiniteMeasuredMetricSpace, b: &FiniteMeasuredMetricSpace, cross: &[f64]) -> f64 {
    let nb = b.len();
    let ab = prokhorov_side(&a.mass, &b.mass, |i, j| cross[i * nb + j]);
    let ba = prokhorov_side(&b.mass, &a.mass, |j, i| cross[i * nb + j]);
    ab.max(ba)
}

fn maps(domain: usize, target: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = target.pow(domain as u32);
    (0..total).map(move |mut code| {
        (0..domain)
            .map(|_| {
                let v = code % target;
                code /= target;
                v
            })
            .collect()
    })
}

/// GHP (Hausdorff plus Prokhorov) between spaces of at most six points.
/// The upper value minimizes over bridge gluings `d(a, b) = min_R d_A(a, a') + r + d_B(b', b)`
/// with `R` the graph of a map `A → B` or `B → A` and `r = dis(R)/2`; the lower value is
/// `|diam A − diam B|/2 + |μ_A(A) − μ_B(B)|`.
pub fn ghp_exact_small(a: &FiniteMeasuredMetricSpace, b: &FiniteMeasuredMetricSpace) -> Result<GhpEstimate> {
    let biggest = a.len().max(b.len());
    if biggest > EXACT_SMALL_MAX {
        return Err(ModelError::TooLarge(biggest));
    }
    if a.is_empty() || b.is_empty() {
        return invalid("spaces must be nonempty");
    }
    let lower = 0.5 * (a.diameter() - b.diameter()).abs() + (a.total_mass() - b.total_mass()).abs();
    let mut upper = f64::INFINITY;
    let mut consider = |relation: Vec<(usize, usize)>| {
        let g = bridge_gluing(a, b, &relation);
        let v = hausdorff(&g.cross, a.len(), b.len()) + prokhorov(a, b, &g.cross);
        if v < upper {
            upper = v;
        }
    };
    for f in maps(a.len(), b.len()) {
        consider(f.into_iter().enumerate().collect());
    }
    for g in maps(b.len(), a.len()) {
        consider(g.into_iter().enumerate().map(|(j, i)| (i, j)).collect());
    }
    Ok(GhpEstimate { upper, lower: lower.min(upper) })
}

/// `(h, ϖ, ε)` describing `𝒢(h, ϖ, ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedGraph {
    pub h: CodedFunction,
    pub marks: Vec<(f64, f64)>,
    pub epsilon: f64,
}

impl EncodedGraph {
    pub fn space(&self, resolution: Resolution) -> Result<FiniteMeasuredMetricSpace> {
        shortcut_graph(&self.h, &self.marks, self.epsilon, resolution)
    }
}

/// `6(q+1)(‖ĥ_1 − ĥ_2‖_∞ + ω_δ(ĥ_1)) + 3q max(ε_1, ε_2) + |ζ_1 − ζ_2|`, with `δ` the largest mark displacement.
pub fn ghp_coded_bound(first: &EncodedGraph, second: &EncodedGraph) -> Result<f64> {
    if first.marks.len() != second.marks.len() {
        return invalid("both graphs need the same number of marks");
    }
    let q = first.marks.len() as f64;
    let delta = first
        .marks
        .iter()
        .zip(&second.marks)
        .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
        .fold(0.0, f64::max);
    let sup = first.h.sup_distance(&second.h);
    Ok(6.0 * (q + 1.0) * (sup + first.h.modulus(delta))
        + 3.0 * q * first.epsilon.max(second.epsilon)
        + (first.h.zeta - second.h.zeta).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GhpMode {
    ExactSmall,
    CodedBound,
}

pub fn ghp_distance(first: &EncodedGraph, second: &EncodedGraph, mode: GhpMode) -> Result<GhpEstimate> {
    match mode {
        GhpMode::ExactSmall => ghp_exact_small(&first.space(Resolution::Pieces)?, &second.space(Resolution::Pieces)?),
        GhpMode::CodedBound => Ok(GhpEstimate { upper: ghp_coded_bound(first, second)?, lower: 0.0 }),
    }
}

/// `#Π(2ε + a) + a`.
pub fn shortcut_ghp_bound(pairs: usize, epsilon: f64, scale: f64) -> f64 {
    pairs as f64 * (2.0 * epsilon + scale) + scale
}

/// Distortion between the graph distance and the forest-plus-reassigned-surplus distance on one component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDistortion {
    pub size: usize,
    pub surplus: usize,
    pub distortion: usize,
}

impl ComponentDistortion {
    pub fn holds(&self) -> bool {
        self.distortion <= self.surplus
    }
}

/// For each component of the explored graph with surplus edges `(b, w)`: `sup |d_gr − d''|`, where `d''`
/// is the distance in the spanning forest with each `(b, w)` replaced by `(b, parent of w)`.
/// Vertices are numbered blacks first, then whites.
pub fn distortion_certificate(record: &ExplorationRecord, surplus: &[(usize, usize)]) -> Vec<ComponentDistortion> {
    let n = record.x.len();
    let total = n + record.y.len();
    let forest: Vec<(usize, usize)> = record.forest.edges().into_iter().map(|(b, w)| (b, n + w)).collect();
    let mut actual = forest.clone();
    actual.extend(surplus.iter().map(|&(b, w)| (b, n + w)));
    let mut modified = forest;
    modified.extend(surplus.iter().filter_map(|&(b, w)| record.forest.white_parent[w].map(|p| (b, p))));
    let g = SimpleGraph::from_edges(total, &actual);
    let g2 = SimpleGraph::from_edges(total, &modified);
    let mut seen = vec![false; total];
    let mut out = Vec::new();
    for s in 0..total {
        if seen[s] || g.degree(s) == 0 {
            continue;
        }
        let from_s = g.bfs(s);
        let members: Vec<usize> = (0..total).filter(|&v| from_s[v].is_some()).collect();
        for &v in &members {
            seen[v] = true;
        }
        let surplus_here = surplus.iter().filter(|&&(b, _)| from_s[b].is_some()).count();
        let mut worst = 0usize;
        for &u in &members {
            let d1 = g.bfs(u);
            let d2 = g2.bfs(u);
            for &v in &members {
                let a = d1[v].expect("same component");
                let b = d2[v].unwrap_or(usize::MAX);
                worst = worst.max(a.abs_diff(b));
            }
        }
        out.push(ComponentDistortion { size: members.len(), surplus: surplus_here, distortion: worst });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifo::{explore, sample_surplus_direct, ClockSet};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn tent() -> CodedFunction {
        CodedFunction::continuous(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn dh_examples() {
        let zero = CodedFunction::continuous(vec![0.0, 3.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(d_h(&zero, 0.5, 2.5), 0.0);
        let t = tent();
        assert_eq!(d_h(&t, 0.0, 2.0), 0.0);
        assert_eq!(d_h(&t, 0.7, 0.7), 0.0);
        assert_eq!(d_h(&t, 0.5, 1.5), 0.0);
        assert!((d_h(&t, 0.25, 1.5) - 0.25).abs() < 1e-15);
        assert!((d_h(&t, 0.0, 1.0) - 1.0).abs() < 1e-15);
        let s = CodedFunction::from_steps(&[1.0, 3.0, 2.0, 0.0, 2.0]).unwrap();
        assert_eq!(d_h(&s, 1.5, 2.5), 1.0);
        assert_eq!(d_h(&s, 1.5, 4.5), 5.0);
        assert_eq!(s.value(2.0), 2.0);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(CodedFunction::continuous(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
        assert!(CodedFunction::continuous(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
        assert!(CodedFunction::step(vec![0.0, 2.0], vec![1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn quotient_examples() {
        let zero = CodedFunction::continuous(vec![0.0, 3.0], vec![0.0, 0.0]).unwrap();
        let q = quotient_space(&zero, Resolution::Uniform(50)).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q.total_mass() - 3.0).abs() < 1e-12);
        let q = quotient_space(&tent(), Resolution::Uniform(201)).unwrap();
        assert!((q.diameter() - 1.0).abs() < 1e-12);
        assert!((q.total_mass() - 2.0).abs() < 1e-12);
        assert_eq!(q.triangle_violations(1e-9), 0);
        // the root class holds both endpoints
        assert!((q.mass[0] - 2.0 * 2.0 / 201.0).abs() < 1e-12);
    }

    #[test]
    fn step_quotient_is_the_tree() {
        // pieces 0:1, 1:2, 2:1, 3:2, 4:0 give a star of height-1 classes above the root
        let s = CodedFunction::from_steps(&[1.0, 2.0, 1.0, 2.0, 0.0]).unwrap();
        let q = quotient_space(&s, Resolution::Pieces).unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(q.mass, vec![2.0, 1.0, 1.0, 1.0]);
        assert_eq!(q.d(1, 2), 2.0);
        assert_eq!(q.d(0, 3), 1.0);
        assert_eq!(q.d(1, 3), 2.0);
    }

    #[test]
    fn shortcut_examples() {
        let t = tent();
        let plain = quotient_space(&t, Resolution::Uniform(101)).unwrap();
        let same = shortcut_graph(&t, &[], 0.0, Resolution::Uniform(101)).unwrap();
        assert_eq!(plain, same);
        // gluing the peak to the root turns the segment into a loop of length 1
        let glued = shortcut_graph(&t, &[(0.0, 1.0)], 0.0, Resolution::Uniform(101)).unwrap();
        assert!((glued.diameter() - 0.5).abs() < 1e-12);
        let i0 = glued.points.iter().position(|&p| p == 0.0).unwrap();
        let i1 = glued.points.iter().position(|&p| (p - 1.0).abs() < 1e-12);
        assert!(i1.is_none() || glued.d(i0, i1.unwrap()) == 0.0);
        let soft = shortcut_graph(&t, &[(0.0, 1.0)], 0.1, Resolution::Uniform(101)).unwrap();
        assert_eq!(soft.triangle_violations(1e-9), 0);
        // a loop of length 1.1 sampled at heights on a 0.02 grid
        assert!((soft.diameter() - 0.54).abs() < 1e-12);
        assert!((soft.total_mass() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ghp_examples() {
        let s = FiniteMeasuredMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let e = ghp_exact_small(&s, &s).unwrap();
        assert_eq!((e.upper, e.lower), (0.0, 0.0));
        let p = FiniteMeasuredMetricSpace::from_matrix(&[vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(ghp_exact_small(&p, &p).unwrap().upper, 0.0);
        // point mass 1 against two points at distance 1: glue the point at the midpoint
        let e = ghp_exact_small(&p, &s).unwrap();
        assert!((e.upper - 1.0).abs() < 1e-12, "{e:?}");
        assert!((e.lower - 0.5).abs() < 1e-12);
        let big = FiniteMeasuredMetricSpace::new(vec![0.0; 7], vec![0.0; 49], vec![0.0; 7]).unwrap();
        assert!(matches!(ghp_exact_small(&big, &p), Err(ModelError::TooLarge(7))));
    }

    #[test]
    fn prokhorov_of_mass_shift() {
        let p = FiniteMeasuredMetricSpace::from_matrix(&[vec![0.0]], vec![1.0]).unwrap();
        let q = FiniteMeasuredMetricSpace::from_matrix(&[vec![0.0]], vec![0.7]).unwrap();
        let e = ghp_exact_small(&p, &q).unwrap();
        assert!((e.upper - 0.3).abs() < 1e-12);
        assert!((e.lower - 0.3).abs() < 1e-12);
    }

    #[test]
    fn coded_bound_example() {
        let h1 = CodedFunction::continuous(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]).unwrap();
        let h2 = CodedFunction::continuous(vec![0.0, 1.0, 2.0], vec![0.1, 1.1, 0.6]).unwrap();
        let a = EncodedGraph { h: h1, marks: vec![], epsilon: 0.0 };
        let b = EncodedGraph { h: h2, marks: vec![], epsilon: 0.0 };
        assert!((ghp_coded_bound(&a, &b).unwrap() - 0.6).abs() < 1e-12);
        let c = EncodedGraph { marks: vec![(0.5, 0.2)], ..a.clone() };
        assert!(ghp_coded_bound(&a, &c).is_err());
    }

    #[test]
    fn modulus_and_sup() {
        let t = tent();
        assert!((t.modulus(0.5) - 0.5).abs() < 1e-12);
        assert_eq!(t.modulus(0.0), 0.0);
        let s = CodedFunction::from_steps(&[1.0, 3.0]).unwrap();
        // extension by zero past ζ = 2 adds a drop of 3
        assert_eq!(s.modulus(0.1), 3.0);
        let z = CodedFunction::from_steps(&[0.0, 0.0]).unwrap();
        assert_eq!(s.sup_distance(&z), 3.0);
        let longer = CodedFunction::from_steps(&[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(z.sup_distance(&longer), 2.0);
    }

    #[test]
    fn distortion_examples() {
        let rec = explore(&[1.0, 1.0], &[1.0, 1.0], 1.0, &ClockSet::new(vec![0.2, 0.5], vec![0.3, 0.4]).unwrap());
        let none = distortion_certificate(&rec, &[]);
        assert!(none.iter().all(|c| c.distortion == 0));
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let n = rng.gen_range(1..8);
            let m = rng.gen_range(1..8);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..3.0)).collect();
            let clocks = ClockSet::sample(&x, &y, 2.0, &mut rng);
            let rec = explore(&x, &y, 2.0, &clocks);
            let surplus = sample_surplus_direct(&rec, &mut rng);
            for c in distortion_certificate(&rec, &surplus) {
                assert!(c.holds(), "{c:?}");
                if c.surplus == 1 {
                    assert!(c.distortion <= 1);
                }
            }
        }
    }

    #[test]
    fn csv_dump() {
        let s = FiniteMeasuredMetricSpace::from_matrix(&[vec![0.0, 2.0], vec![2.0, 0.0]], vec![1.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "point,mass,d0,d1\n0,1,0,2\n1,3,2,0\n");
    }

    fn arb_coded() -> impl Strategy<Value = CodedFunction> {
        (prop::collection::vec(0.0f64..3.0, 2..12), any::<bool>()).prop_map(|(vals, step)| {
            let times: Vec<f64> = (0..vals.len()).map(|k| k as f64 * 0.5).collect();
            if step {
                CodedFunction::step(times, vals.clone(), vals.len() as f64 * 0.5).unwrap()
            } else {
                CodedFunction::continuous(times, vals).unwrap()
            }
        })
    }

    proptest! {
        #[test]
        fn dh_is_tree_like(h in arb_coded(), raw in prop::collection::vec([0.0f64..1.0, 0.0..1.0, 0.0..1.0, 0.0..1.0], 20)) {
            let quads: Vec<[f64; 4]> = raw.iter().map(|q| q.map(|u| u * h.zeta)).collect();
            prop_assert_eq!(four_point_violations(&h, &quads, 1e-9), 0);
            for q in &quads {
                prop_assert!(d_h(&h, q[0], q[1]) >= 0.0);
                prop_assert!((d_h(&h, q[0], q[1]) - d_h(&h, q[1], q[0])).abs() < 1e-12);
            }
        }

        #[test]
        fn quotient_mass_and_metric(h in arb_coded(), count in 2usize..60) {
            let q = quotient_space(&h, Resolution::Uniform(count)).unwrap();
            prop_assert!((q.total_mass() - h.zeta).abs() <= 1e-12 * h.zeta);
            prop_assert_eq!(q.triangle_violations(1e-9), 0);
        }

        #[test]
        fn shortcut_graph_is_metric(h in arb_coded(), raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..4), eps in 0.01f64..1.0) {
            let pairs: Vec<(f64, f64)> = raw.iter().map(|&(u, v)| (u * h.zeta, v * h.zeta)).collect();
            let g = shortcut_graph(&h, &pairs, eps, Resolution::Uniform(30)).unwrap();
            prop_assert_eq!(g.triangle_violations(1e-9), 0);
            let t = shortcut_graph(&h, &pairs, f64::INFINITY, Resolution::Uniform(30)).unwrap();
            prop_assert!(g.diameter() <= t.diameter() + 1e-12);
            prop_assert!((g.total_mass() - h.zeta).abs() < 1e-12);
        }
    }
}
