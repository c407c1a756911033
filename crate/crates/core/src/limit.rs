//! Discretized limit objects: stable Lévy paths, tilted paths, height processes,
//! excursion ranking, shortcut marks and assembled limit graphs.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError, Result};
use crate::metric::{shortcut_graph, CodedFunction, FiniteMeasuredMetricSpace, Resolution};
use crate::numeric::{integrate, integrate_to_inf};
use crate::poisson::stable_constant;
use crate::stats::{ks_critical_two_sample, ks_two_sample};
use crate::surplus::poisson_count;
use crate::weights::{validate_critical_pair, CriticalPair, Regime};

/// Moments and tail constants entering the limit laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub regime: Regime,
    pub theta: f64,
    pub sigma_b2: f64,
    pub sigma_b3: f64,
    pub sigma_w2: f64,
    pub sigma_w3: f64,
    /// Stable index; 2 in the finite-third-moment regime.
    pub alpha: f64,
    pub c_b: f64,
    pub c_w: f64,
}

pub fn regime_from_index(index: u8) -> Result<Regime> {
    match index {
        1 => Ok(Regime::ThirdMoments),
        2 => Ok(Regime::DominantHeavy),
        3 => Ok(Regime::MatchedHeavy),
        _ => invalid(format!("regime must be 1, 2 or 3, got {index}")),
    }
}

impl LimitParams {
    pub fn third_moments(theta: f64, sigma_b2: f64, sigma_b3: f64, sigma_w2: f64, sigma_w3: f64) -> Result<Self> {
        Self::checked(LimitParams {
            regime: Regime::ThirdMoments,
            theta,
            sigma_b2,
            sigma_b3,
            sigma_w2,
            sigma_w3,
            alpha: 2.0,
            c_b: 0.0,
            c_w: 0.0,
        })
    }

    /// Heavy-tailed regimes; `c_w` is ignored in the dominant case.
    pub fn heavy(regime: Regime, theta: f64, sigma_b2: f64, sigma_w2: f64, alpha: f64, c_b: f64, c_w: f64) -> Result<Self> {
        Self::checked(LimitParams {
            regime,
            theta,
            sigma_b2,
            sigma_b3: f64::INFINITY,
            sigma_w2,
            sigma_w3: if regime == Regime::MatchedHeavy { f64::INFINITY } else { 0.0 },
            alpha,
            c_b,
            c_w: if regime == Regime::MatchedHeavy { c_w } else { 0.0 },
        })
    }

    /// Unit weights: every moment equals one.
    pub fn unit(theta: f64) -> Result<Self> {
        Self::third_moments(theta, 1.0, 1.0, 1.0, 1.0)
    }

    pub fn from_pair(pair: &CriticalPair) -> Result<Self> {
        let report = validate_critical_pair(pair)?;
        let sb2 = pair.spec_b.moment(2.0)?;
        let sw2 = pair.spec_w.moment(2.0)?;
        match report.regime {
            Regime::ThirdMoments => {
                Self::third_moments(pair.theta, sb2, pair.spec_b.moment(3.0)?, sw2, pair.spec_w.moment(3.0)?)
            }
            regime => Self::heavy(
                regime,
                pair.theta,
                sb2,
                sw2,
                report.alpha.expect("heavy regime has an index"),
                pair.spec_b.tail_constant().unwrap_or(0.0),
                pair.spec_w.tail_constant().unwrap_or(0.0),
            ),
        }
    }

    fn checked(self) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.theta) || !positive(self.sigma_b2) || !positive(self.sigma_w2) {
            return invalid("θ and second moments must be positive");
        }
        match self.regime {
            Regime::ThirdMoments => {
                if self.alpha != 2.0 || !positive(self.sigma_b3) || !positive(self.sigma_w3) {
                    return Err(ModelError::WrongRegime("regime 1 needs finite positive third moments and α = 2".into()));
                }
            }
            Regime::DominantHeavy | Regime::MatchedHeavy => {
                if !(self.alpha > 1.0 && self.alpha < 2.0) || !positive(self.c_b) {
                    return Err(ModelError::WrongRegime("heavy regimes need α in (1,2) and C^b > 0".into()));
                }
                if self.regime == Regime::MatchedHeavy && !positive(self.c_w) {
                    return Err(ModelError::WrongRegime("regime 3 needs C^w > 0".into()));
                }
            }
        }
        Ok(self)
    }

    pub fn c1(&self) -> f64 {
        self.sigma_w3 * self.sigma_b2 + self.theta.sqrt() * self.sigma_w2 * self.sigma_w2 * self.sigma_b3
    }

    pub fn c2(&self) -> f64 {
        self.c_b * self.theta.powf((self.alpha - 1.0) / 2.0) * self.sigma_w2.powf(self.alpha)
    }

    pub fn c3(&self) -> f64 {
        self.c_w * self.sigma_b2 + self.c2()
    }

    /// `C_i` of the active regime.
    pub fn constant(&self) -> f64 {
        match self.regime {
            Regime::ThirdMoments => self.c1(),
            Regime::DominantHeavy => self.c2(),
            Regime::MatchedHeavy => self.c3(),
        }
    }

    pub fn c_alpha(&self) -> f64 {
        stable_constant(self.alpha)
    }

    pub fn rho(&self) -> f64 {
        self.sigma_b2 / self.theta.sqrt()
    }

    /// `σ^b_2/θ`, the tilt rate.
    pub fn kappa(&self) -> f64 {
        self.sigma_b2 / self.theta
    }

    /// `Ψ_i(λ) = C(α) C_i λ^α`.
    pub fn psi(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return invalid("λ must be nonnegative");
        }
        Ok(self.c_alpha() * self.constant() * lambda.powf(self.alpha))
    }

    /// `(θ/σ^b_2) Ψ_i(σ^b_2 t/θ)`, the drift removed from the tilted path.
    pub fn drift(&self, t: f64) -> f64 {
        self.c_alpha() * self.constant() * self.kappa().powf(self.alpha - 1.0) * t.powf(self.alpha)
    }

    /// `∫_0^t Ψ_i(σ^b_2 s/θ) ds`.
    pub fn psi_integral(&self, t: f64) -> f64 {
        self.c_alpha() * self.constant() * self.kappa().powf(self.alpha) * t.powf(self.alpha + 1.0) / (self.alpha + 1.0)
    }

    /// Typical size of one grid increment: `√(C_1 h)` or `(C(α) C_i h)^{1/α}`.
    pub fn noise_scale(&self, step: f64) -> f64 {
        match self.regime {
            Regime::ThirdMoments => (self.c1() * step).sqrt(),
            _ => (self.c_alpha() * self.constant() * step).powf(1.0 / self.alpha),
        }
    }
}

/// Values on the grid `k·h`, with running infimum and any simulated jumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub step: f64,
    pub values: Vec<f64>,
    pub running_inf: Vec<f64>,
    /// `(time, size)` of jumps simulated exactly.
    pub jumps: Vec<(f64, f64)>,
}

impl GridPath {
    pub fn new(step: f64, values: Vec<f64>, jumps: Vec<(f64, f64)>) -> Result<Self> {
        if !(step > 0.0) || values.is_empty() {
            return invalid("grid step must be positive and the path nonempty");
        }
        let mut running_inf = Vec::with_capacity(values.len());
        let mut low = f64::INFINITY;
        for &v in &values {
            low = low.min(v);
            running_inf.push(low);
        }
        Ok(GridPath { step, values, running_inf, jumps })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.step).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// `Z_k − inf_{j ≤ k} Z_j`.
    pub fn reflected(&self, k: usize) -> f64 {
        self.values[k] - self.running_inf[k]
    }

    /// Reflected value by linear interpolation between grid points.
    pub fn reflected_at(&self, t: f64) -> f64 {
        let x = (t / self.step).clamp(0.0, (self.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.len() - 1);
        if k + 1 >= self.len() {
            return self.reflected(k);
        }
        let w = x - k as f64;
        self.reflected(k) * (1.0 - w) + self.reflected(k + 1) * w
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| ModelError::Io(e.to_string());
        w.write_record(["t", "value", "running_inf"]).map_err(io)?;
        for k in 0..self.len() {
            w.write_record([self.time(k), self.values[k], self.running_inf[k]].map(|v| v.to_string())).map_err(io)?;
        }
        w.flush().map_err(|e| ModelError::Io(e.to_string()))
    }
}

fn grid_len(horizon: f64, step: f64) -> Result<usize> {
    if !(horizon >= 0.0) || !(step > 0.0) {
        return invalid("horizon must be nonnegative and step positive");
    }
    Ok((horizon / step).round() as usize + 1)
}

/// One-sided stable variable with `E[e^{−λX}] = exp(λ^α / |cos(πα/2)|)`, by the Chambers–Mallows–Stuck transform.
pub fn standard_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let v = PI * (rng.gen::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let tan = (FRAC_PI_2 * alpha).tan();
    let shift = tan.atan() / alpha;
    let scale = (1.0 + tan * tan).powf(0.5 / alpha);
    let lead = (alpha * (v + shift)).sin() / v.cos().powf(1.0 / alpha);
    let tail = ((v - alpha * (v + shift)).cos() / w).powf((1.0 - alpha) / alpha);
    scale * lead * tail
}

/// Scale turning a standard one-sided stable variable into an increment with Laplace exponent `c λ^α` over `h`.
pub fn stable_increment_scale(alpha: f64, c: f64, h: f64) -> f64 {
    (c * (std::f64::consts::FRAC_PI_2 * alpha).cos().abs() * h).powf(1.0 / alpha)
}

/// Untilted `𝓛^(i)` on `[0, horizon]`.
pub fn simulate_l<R: Rng + ?Sized>(params: &LimitParams, horizon: f64, step: f64, rng: &mut R) -> Result<GridPath> {
    let n = grid_len(horizon, step)?;
    let mut values = Vec::with_capacity(n);
    values.push(0.0);
    let mut cur = 0.0;
    match params.regime {
        Regime::ThirdMoments => {
            let sd = (params.c1() * step).sqrt();
            for _ in 1..n {
                let g: f64 = StandardNormal.sample(rng);
                cur += sd * g;
                values.push(cur);
            }
        }
        _ => {
            let scale = stable_increment_scale(params.alpha, params.c_alpha() * params.constant(), step);
            for _ in 1..n {
                cur += scale * standard_positive_stable(params.alpha, rng);
                values.push(cur);
            }
        }
    }
    GridPath::new(step, values, Vec::new())
}

/// Compensated jump process with intensity `c (α+1) e^{−κ s x} x^{−α−1} dx ds`:
/// jumps above `ε_J` exact, jumps below replaced by Gaussian noise of matching variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltedStableSampler {
    pub alpha: f64,
    pub intensity: f64,
    pub kappa: f64,
    pub step: f64,
    pub truncation: f64,
    /// Cumulative compensator of jumps above the truncation, per grid point.
    compensator: Vec<f64>,
    /// Cumulative variance of jumps below the truncation, per grid point.
    small_variance: Vec<f64>,
}

impl TiltedStableSampler {
    /// Default truncation `ε_J = (C(α) c h)^{1/α}`, the scale of one grid increment.
    pub fn default_truncation(alpha: f64, intensity: f64, step: f64) -> f64 {
        (stable_constant(alpha) * intensity * step).powf(1.0 / alpha)
    }

    pub fn new(alpha: f64, intensity: f64, kappa: f64, horizon: f64, step: f64, truncation: Option<f64>) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) || !(intensity > 0.0) || !(kappa > 0.0) {
            return invalid("need α in (1,2) and positive intensity and tilt");
        }
        let n = grid_len(horizon, step)?;
        let eps = truncation.unwrap_or_else(|| Self::default_truncation(alpha, intensity, step));
        if !(eps > 0.0) {
            return invalid("truncation must be positive");
        }
        let lead = intensity * (alpha + 1.0) / kappa;
        let mut compensator = Vec::with_capacity(n);
        let mut small_variance = Vec::with_capacity(n);
        for k in 0..n {
            let t = k as f64 * step;
            if k == 0 {
                compensator.push(0.0);
                small_variance.push(0.0);
                continue;
            }
            let big = integrate_to_inf(|x| -(-kappa * t * x).exp_m1() * x.powf(-alpha - 1.0), eps, 1e-10);
            // x = ε e^{−u} tames the x^{1−α} singularity at 0
            let small = integrate_to_inf(
                |u| {
                    let x = eps * (-u).exp();
                    -(-kappa * t * x).exp_m1() * x.powf(-alpha) * x
                },
                0.0,
                1e-10,
            );
            compensator.push(lead * big);
            small_variance.push(lead * small);
        }
        Ok(TiltedStableSampler { alpha, intensity, kappa, step, truncation: eps, compensator, small_variance })
    }

    pub fn len(&self) -> usize {
        self.compensator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compensator.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    /// One martingale path; returns grid values and the accepted jumps.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<(f64, f64)>) {
        let n = self.len();
        let horizon = self.horizon();
        let eps = self.truncation;
        let rate = self.intensity * (self.alpha + 1.0) / self.alpha * eps.powf(-self.alpha);
        let proposals = poisson_count(rate * horizon, rng) as usize;
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for _ in 0..proposals {
            let t = horizon * rng.gen::<f64>();
            let u: f64 = 1.0 - rng.gen::<f64>();
            let x = eps * u.powf(-1.0 / self.alpha);
            if rng.gen::<f64>() < (-self.kappa * t * x).exp() {
                jumps.push((t, x));
            }
        }
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values = Vec::with_capacity(n);
        let mut next = 0usize;
        let mut jump_sum = 0.0;
        let mut noise = 0.0;
        values.push(0.0);
        for k in 1..n {
            let t = k as f64 * self.step;
            while next < jumps.len() && jumps[next].0 <= t {
                jump_sum += jumps[next].1;
                next += 1;
            }
            let var = (self.small_variance[k] - self.small_variance[k - 1]).max(0.0);
            let g: f64 = StandardNormal.sample(rng);
            noise += var.sqrt() * g;
            values.push(jump_sum - self.compensator[k] + noise);
        }
        (values, jumps)
    }
}

/// Precomputed state for repeated draws of `𝓩^(i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZSampler {
    pub params: LimitParams,
    pub horizon: f64,
    pub step: f64,
    stable: Option<TiltedStableSampler>,
}

impl ZSampler {
    pub fn new(params: &LimitParams, horizon: f64, step: f64, truncation: Option<f64>) -> Result<Self> {
        if horizon > 0.0 && step > 1e-3 * horizon {
            return invalid("step must be at most 1e-3 times the horizon");
        }
        let stable = match params.regime {
            Regime::ThirdMoments => None,
            _ => Some(TiltedStableSampler::new(params.alpha, params.constant(), params.kappa(), horizon, step, truncation)?),
        };
        Ok(ZSampler { params: params.clone(), horizon, step, stable })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GridPath> {
        if self.horizon == 0.0 {
            return GridPath::new(self.step, vec![0.0], Vec::new());
        }
        let n = grid_len(self.horizon, self.step)?;
        let p = &self.params;
        match &self.stable {
            None => {
                let sd = (p.c1() * self.step).sqrt();
                let mut values = Vec::with_capacity(n);
                let mut noise = 0.0;
                values.push(0.0);
                for k in 1..n {
                    let g: f64 = StandardNormal.sample(rng);
                    noise += sd * g;
                    values.push(noise - p.drift(k as f64 * self.step));
                }
                GridPath::new(self.step, values, Vec::new())
            }
            Some(s) => {
                let (mut values, jumps) = s.sample(rng);
                for (k, v) in values.iter_mut().enumerate() {
                    *v -= p.drift(k as f64 * self.step);
                }
                GridPath::new(self.step, values, jumps)
            }
        }
    }
}

/// Tilted path `𝓩^(i)` on `[0, horizon]`.
pub fn simulate_z<R: Rng + ?Sized>(params: &LimitParams, horizon: f64, step: f64, rng: &mut R) -> Result<GridPath> {
    ZSampler::new(params, horizon, step, None)?.sample(rng)
}

/// Height path with the level `ε` used and a note when `ε` sits at the grid noise floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightEstimate {
    pub path: GridPath,
    pub epsilon: Option<f64>,
    pub warning: Option<String>,
}

/// `𝓗^(i)`: `(2/C_1)(𝓩 − inf 𝓩)` in regime 1, otherwise the ε-occupation estimator
/// `(h/ε) #{s ∈ (g, t] : 𝓩_s ≤ min_{[s,t]} 𝓩 + ε}` within the current excursion `(g, d)`.
pub fn height_from_z(path: &GridPath, params: &LimitParams, epsilon: Option<f64>) -> Result<HeightEstimate> {
    let n = path.len();
    if params.regime == Regime::ThirdMoments {
        let factor = 2.0 / params.c1();
        let values = (0..n).map(|k| factor * path.reflected(k)).collect();
        return Ok(HeightEstimate { path: GridPath::new(path.step, values, Vec::new())?, epsilon: None, warning: None });
    }
    let floor = params.noise_scale(path.step);
    let eps = epsilon.unwrap_or(2.0 * floor);
    if !(eps > 0.0) {
        return invalid("ε must be positive");
    }
    let warning = (eps <= floor).then(|| format!("ε = {eps} is at or below the grid noise scale {floor}"));
    let mut values = vec![0.0; n];
    let mut start = 0usize;
    for k in 0..n {
        if path.reflected(k) <= 0.0 {
            start = k;
            continue;
        }
        let mut low = path.values[k];
        let mut count = 0usize;
        for s in (start + 1..=k).rev() {
            low = low.min(path.values[s]);
            if path.values[s] <= low + eps {
                count += 1;
            }
        }
        values[k] = path.step / eps * count as f64;
    }
    Ok(HeightEstimate { path: GridPath::new(path.step, values, Vec::new())?, epsilon: Some(eps), warning })
}

/// `Σ|H_ε − H_{ε/2}| / Σ H_ε` on one path.
pub fn height_self_consistency(path: &GridPath, params: &LimitParams, epsilon: f64) -> Result<f64> {
    let a = height_from_z(path, params, Some(epsilon))?;
    let b = height_from_z(path, params, Some(epsilon / 2.0))?;
    let diff: f64 = a.path.values.iter().zip(&b.path.values).map(|(x, y)| (x - y).abs()).sum();
    let size: f64 = a.path.values.iter().sum();
    Ok(if size > 0.0 { diff / size } else { 0.0 })
}

/// Grid excursion `[start, end]` of the reflected path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitExcursion {
    pub start_index: usize,
    pub end_index: usize,
    pub start: f64,
    pub end: f64,
    pub length: f64,
    /// False when the excursion is still running at the horizon.
    pub complete: bool,
    /// Length within one grid cell of a neighbour in the ranking.
    pub near_tie: bool,
}

/// Maximal runs with reflected value `> 0`, longest first, ties by left endpoint.
pub fn rank_excursions(path: &GridPath) -> Vec<LimitExcursion> {
    let n = path.len();
    let mut out = Vec::new();
    let mut k = 1;
    while k < n {
        if path.reflected(k) > 0.0 {
            let g = k - 1;
            let mut d = k;
            while d < n && path.reflected(d) > 0.0 {
                d += 1;
            }
            let complete = d < n;
            let d = d.min(n - 1);
            out.push(LimitExcursion {
                start_index: g,
                end_index: d,
                start: path.time(g),
                end: path.time(d),
                length: (d - g) as f64 * path.step,
                complete,
                near_tie: false,
            });
            k = d + 1;
        } else {
            k += 1;
        }
    }
    out.sort_by(|a, b| b.length.total_cmp(&a.length).then(a.start.total_cmp(&b.start)));
    let lengths: Vec<f64> = out.iter().map(|e| e.length).collect();
    for (i, e) in out.iter_mut().enumerate() {
        let close = |j: usize| (lengths[j] - lengths[i]).abs() <= path.step * (1.0 + 1e-9);
        e.near_tie = (i > 0 && close(i - 1)) || (i + 1 < lengths.len() && close(i + 1));
    }
    out
}

/// Total length of grid cells with both ends on the running infimum.
pub fn infimum_length(path: &GridPath) -> f64 {
    (1..path.len()).filter(|&k| path.reflected(k - 1) <= 0.0 && path.reflected(k) <= 0.0).count() as f64 * path.step
}

/// One shortcut atom `(s, y)` and its image `(t, t')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub s: f64,
    pub y: f64,
    pub t: f64,
    pub t_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkSet {
    pub marks: Vec<Mark>,
    /// `∫ reflected dt` over the grid.
    pub area: f64,
}

/// Area under the linearly interpolated reflected path.
pub fn reflected_area(path: &GridPath) -> f64 {
    (1..path.len()).map(|k| 0.5 * (path.reflected(k - 1) + path.reflected(k)) * path.step).sum()
}

/// `t' = sup{u ≤ t : reflected(u) ≤ y}` on the interpolated path.
pub fn mark_partner(path: &GridPath, t: f64, y: f64) -> f64 {
    let here = path.reflected_at(t);
    if here <= y {
        return t;
    }
    let mut k = ((t / path.step).floor() as usize).min(path.len() - 1);
    let (mut right_t, mut right_v) = (t, here);
    loop {
        let (left_t, left_v) = (path.time(k), path.reflected(k));
        if left_v <= y {
            if right_t <= left_t {
                return left_t;
            }
            return left_t + (y - left_v) / (right_v - left_v) * (right_t - left_t);
        }
        if k == 0 {
            return 0.0;
        }
        right_t = left_t;
        right_v = left_v;
        k -= 1;
    }
}

/// Poisson atoms of rate `1/√θ` under the reflected path with first coordinate `σ^b_2 t/√θ`.
pub fn sample_marks<R: Rng + ?Sized>(path: &GridPath, params: &LimitParams, rng: &mut R) -> MarkSet {
    let cells: Vec<f64> = (1..path.len()).map(|k| 0.5 * (path.reflected(k - 1) + path.reflected(k)) * path.step).collect();
    let mut cumulative = Vec::with_capacity(cells.len());
    let mut acc = 0.0;
    for c in &cells {
        acc += c;
        cumulative.push(acc);
    }
    let area = acc;
    let scale = params.sigma_b2 / params.theta.sqrt();
    let count = poisson_count(area * scale / params.theta.sqrt(), rng);
    let mut marks = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let target = rng.gen::<f64>() * area;
        let cell = cumulative.partition_point(|&c| c < target).min(cells.len() - 1);
        let (r0, r1) = (path.reflected(cell), path.reflected(cell + 1));
        // inverse cdf of the density ∝ r0 + (r1 − r0) w on [0, 1]
        let u = rng.gen::<f64>() * 0.5 * (r0 + r1);
        let slope = r1 - r0;
        let w = if slope.abs() < 1e-14 * (r0 + r1).max(1e-300) {
            u / r0.max(1e-300)
        } else {
            (-r0 + (r0 * r0 + 2.0 * slope * u).max(0.0).sqrt()) / slope
        };
        let t = path.time(cell) + w.clamp(0.0, 1.0) * path.step;
        let y = rng.gen::<f64>() * path.reflected_at(t);
        marks.push(Mark { s: scale * t, y, t, t_prime: mark_partner(path, t, y) });
    }
    MarkSet { marks, area }
}

/// A limit component as a finite measured metric space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitGraph {
    pub excursion: LimitExcursion,
    pub coding: CodedFunction,
    /// `(ρ(t − g), ρ(t' − g))` for marks inside the excursion.
    pub shortcuts: Vec<(f64, f64)>,
    pub space: FiniteMeasuredMetricSpace,
}

/// `𝒢(𝓗^{k}, ϖ_k, 0)` for the `k`-th longest excursion (`k ≥ 1`), sampled at `resolution` points.
pub fn build_limit_graph(
    params: &LimitParams,
    path: &GridPath,
    heights: &GridPath,
    marks: &MarkSet,
    k: usize,
    resolution: usize,
) -> Result<LimitGraph> {
    let ranked = rank_excursions(path);
    if k == 0 || k > ranked.len() {
        return Err(ModelError::OutOfRange(format!("excursion {k} of {}", ranked.len())));
    }
    let exc = ranked[k - 1];
    let rho = params.rho();
    let times: Vec<f64> = (exc.start_index..=exc.end_index).map(|j| rho * (path.time(j) - exc.start)).collect();
    let values: Vec<f64> = (exc.start_index..=exc.end_index).map(|j| heights.values[j]).collect();
    let coding = CodedFunction::continuous(times, values)?;
    let zeta = coding.zeta;
    let shortcuts: Vec<(f64, f64)> = marks
        .marks
        .iter()
        .filter(|m| m.t > exc.start && m.t < exc.end)
        .map(|m| ((rho * (m.t - exc.start)).min(zeta), (rho * (m.t_prime - exc.start)).clamp(0.0, zeta)))
        .collect();
    let space = shortcut_graph(&coding, &shortcuts, 0.0, Resolution::Uniform(resolution))?;
    Ok(LimitGraph { excursion: exc, coding, shortcuts, space })
}

/// `𝓔^(i)_t = exp{−∫ κ s d𝓛_s − ∫ Ψ_i(κ s) ds}`, the stochastic integral as a left-point grid sum.
pub fn limit_tilt_density(l_path: &GridPath, params: &LimitParams, t: f64) -> f64 {
    let kt = l_path.index_of(t);
    let kappa = params.kappa();
    let stochastic: f64 =
        (0..kt).map(|k| kappa * l_path.time(k) * (l_path.values[k + 1] - l_path.values[k])).sum();
    (-stochastic - params.psi_integral(l_path.time(kt))).exp()
}

/// `∫_0^t Ψ_i(κ s) ds` by quadrature, an oracle for `psi_integral`.
pub fn psi_integral_by_quadrature(params: &LimitParams, t: f64) -> f64 {
    integrate(|s| params.psi(params.kappa() * s).unwrap(), 0.0, t, 1e-12)
}

/// Two-sample comparison of `𝓗^(1)_{√θ t}` against `2(Ŝ_t − Î_t)` with
/// `Ŝ_u = θ^{1/4}(1+√θ)^{−1/2} B_u − u²/2`, for unit weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialCheck {
    pub statistic: f64,
    pub critical: f64,
}

pub fn binomial_consistency<R: Rng + ?Sized>(theta: f64, t: f64, paths: usize, step: f64, rng: &mut R) -> Result<BinomialCheck> {
    let params = LimitParams::unit(theta)?;
    let at = theta.sqrt() * t;
    let horizon_z = (at / step).ceil() * step;
    let sampler = ZSampler { params: params.clone(), horizon: horizon_z, step, stable: None };
    let mut first = Vec::with_capacity(paths);
    for _ in 0..paths {
        let z = sampler.sample(rng)?;
        let h = height_from_z(&z, &params, None)?;
        first.push(h.path.values[h.path.index_of(at)]);
    }
    let gamma = 1.0 + theta.sqrt();
    let sd = theta.powf(0.25) / gamma.sqrt() * step.sqrt();
    let steps = (t / step).round() as usize;
    let mut second = Vec::with_capacity(paths);
    for _ in 0..paths {
        let mut b = 0.0;
        let mut low: f64 = 0.0;
        let mut s_hat = 0.0;
        for k in 1..=steps {
            let g: f64 = StandardNormal.sample(rng);
            b += sd * g;
            let u = k as f64 * step;
            s_hat = b - 0.5 * u * u;
            low = low.min(s_hat);
        }
        second.push(2.0 * (s_hat - low));
    }
    Ok(BinomialCheck { statistic: ks_two_sample(&first, &second), critical: ks_critical_two_sample(paths, paths) })
}
