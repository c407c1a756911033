//! Poisson coupling of weights and clocks, compound-Poisson reference processes,
//! their Laplace exponents, the tilting density and scaled-exponent diagnostics.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::StepPath;
use crate::error::{invalid, ModelError, Result};
use crate::lifo::{explore, ClockSet, ExplorationRecord};
use crate::numeric::{exp_neg_compensated, gamma, integrate, integrate_to_inf};
use crate::rng::replicate_rng;
use crate::surplus::poisson_count;
use crate::weights::{CriticalPair, Regime, WeightKind, WeightSpec};

/// Atoms `(clock, weight)` of the black and white Poisson measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCoupling {
    pub black: Vec<(f64, f64)>,
    pub white: Vec<(f64, f64)>,
    pub n: usize,
    pub m: usize,
    pub z: f64,
}

impl PoissonCoupling {
    pub fn x(&self) -> Vec<f64> {
        self.black.iter().map(|a| a.1).collect()
    }

    pub fn y(&self) -> Vec<f64> {
        self.white.iter().map(|a| a.1).collect()
    }

    pub fn clocks(&self) -> Result<ClockSet> {
        ClockSet::new(self.black.iter().map(|a| a.0).collect(), self.white.iter().map(|a| a.0).collect())
    }

    pub fn explore(&self) -> Result<ExplorationRecord> {
        Ok(explore(&self.x(), &self.y(), self.z, &self.clocks()?))
    }
}

fn draw_atoms<R: Rng + ?Sized>(spec: &WeightSpec, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| spec.sample(rng)).collect()
}

fn couple<R: Rng + ?Sized>(pair: &CriticalPair, nb: usize, nw: usize, rng: &mut R) -> PoissonCoupling {
    let z = pair.z();
    let x = draw_atoms(&pair.spec_b, nb, rng);
    let y = draw_atoms(&pair.spec_w, nw, rng);
    let clocks = ClockSet::sample(&x, &y, z, rng);
    PoissonCoupling {
        black: clocks.black.into_iter().zip(x).collect(),
        white: clocks.white.into_iter().zip(y).collect(),
        n: pair.n,
        m: pair.m,
        z,
    }
}

/// Exactly `n` black and `m` white atoms: weights i.i.d., then clocks `Exp(w/√(mn))` given the weight.
pub fn sample_conditioned_with<R: Rng + ?Sized>(pair: &CriticalPair, rng: &mut R) -> PoissonCoupling {
    couple(pair, pair.n, pair.m, rng)
}

pub fn sample_conditioned(pair: &CriticalPair, seed: u64) -> PoissonCoupling {
    sample_conditioned_with(pair, &mut replicate_rng(seed, 0))
}

/// Atom counts `Poisson(n)` and `Poisson(m)`, atoms i.i.d. from the normalized intensity.
pub fn sample_unconditioned_with<R: Rng + ?Sized>(pair: &CriticalPair, rng: &mut R) -> Result<PoissonCoupling> {
    if pair.n == 0 || pair.m == 0 {
        return invalid("intensity must be positive: n and m must be at least 1");
    }
    let nb = poisson_count(pair.n as f64, rng) as usize;
    let nw = poisson_count(pair.m as f64, rng) as usize;
    Ok(couple(pair, nb, nw, rng))
}

pub fn sample_unconditioned(pair: &CriticalPair, seed: u64) -> Result<PoissonCoupling> {
    sample_unconditioned_with(pair, &mut replicate_rng(seed, 0))
}

/// `E[(e^{−λX} − 1) X]`.
pub fn size_biased_transform(spec: &WeightSpec, lambda: f64) -> f64 {
    match &spec.kind {
        WeightKind::PointMass { value } => value * (-lambda * value).exp_m1(),
        WeightKind::Exponential { rate } => rate / (rate + lambda).powi(2) - 1.0 / rate,
        _ => spec.expect(|x| (-lambda * x).exp_m1() * x),
    }
}

/// `E[(e^{−λX} − 1 + λX) X]`, free of cancellation for small `λ`.
pub fn compensated_transform(spec: &WeightSpec, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    match &spec.kind {
        WeightKind::PointMass { value } => value * exp_neg_compensated(lambda * value),
        _ => spec.expect(|x| exp_neg_compensated(lambda * x) * x),
    }
}

/// `E[1 − e^{−uX} − uX]`, so that `∫_0^U E[(e^{−sX/z} − 1)X] ds = z·E[1 − e^{−UX/z} − UX/z]`.
fn integrated_transform(spec: &WeightSpec, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    match &spec.kind {
        WeightKind::PointMass { value } => -exp_neg_compensated(u * value),
        _ => -spec.expect(|x| exp_neg_compensated(u * x)),
    }
}

/// Scaling sequences `(a_n, b_n)` for the regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub a_n: f64,
    pub b_n: f64,
}

impl Scaling {
    pub fn for_regime(n: usize, alpha: f64) -> Self {
        let n = n as f64;
        Scaling { a_n: n.powf(1.0 / (alpha + 1.0)), b_n: n.powf(alpha / (alpha + 1.0)) }
    }

    pub fn for_pair(pair: &CriticalPair) -> Result<Self> {
        let report = crate::weights::validate_critical_pair(pair)?;
        Ok(Scaling::for_regime(pair.n, report.alpha.unwrap_or(2.0)))
    }
}

/// Laplace exponents of the reference processes for one `(n, m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceExponentTable {
    pub spec_b: WeightSpec,
    pub spec_w: WeightSpec,
    pub n: f64,
    pub m: f64,
    pub sigma_b2: f64,
    pub sigma_w1: f64,
    pub sigma_w2: f64,
}

pub fn laplace_exponents(pair: &CriticalPair) -> Result<LaplaceExponentTable> {
    Ok(LaplaceExponentTable {
        spec_b: pair.spec_b.clone(),
        spec_w: pair.spec_w.clone(),
        n: pair.n as f64,
        m: pair.m as f64,
        sigma_b2: pair.spec_b.moment(2.0)?,
        sigma_w1: pair.spec_w.moment(1.0)?,
        sigma_w2: pair.spec_w.moment(2.0)?,
    })
}

impl LaplaceExponentTable {
    fn ratio(&self) -> f64 {
        (self.n / self.m).sqrt()
    }

    pub fn phi_b(&self, lambda: f64) -> f64 {
        self.ratio() * size_biased_transform(&self.spec_b, lambda)
    }

    pub fn phi_w(&self, lambda: f64) -> f64 {
        size_biased_transform(&self.spec_w, lambda) / self.ratio()
    }

    pub fn phi_hat_b(&self, lambda: f64) -> f64 {
        self.ratio() * compensated_transform(&self.spec_b, lambda)
    }

    pub fn phi_hat_w(&self, lambda: f64) -> f64 {
        compensated_transform(&self.spec_w, lambda) / self.ratio()
    }

    /// Exponent of `−t + L^w ∘ L^b`: `λ + φ^b(−φ^w(λ))`, assembled without cancellation.
    pub fn phi(&self, lambda: f64) -> f64 {
        let inner = -self.phi_w(lambda);
        self.phi_hat_b(inner) + self.ratio() * self.sigma_b2 * self.phi_hat_w(lambda)
            + lambda * (1.0 - self.sigma_b2 * self.sigma_w2)
    }

    /// `q_n = −φ^b(√(m/n) σ^w_1)`, the total jump rate of the composed process.
    pub fn q_n(&self) -> f64 {
        -self.phi_b(self.sigma_w1 / self.ratio())
    }

    /// Generating function `g_n(s) = 1 + (φ((1−s)q_n) − (1−s)q_n)/q_n`.
    pub fn g_n(&self, s: f64) -> f64 {
        let q = self.q_n();
        let lam = (1.0 - s) * q;
        1.0 + (self.phi_b(-self.phi_w(lam))) / q
    }

    /// `Ψ_n(u) = b_n (g_n(1 − u/a_n) − 1 + u/a_n)`, evaluated as `(b_n/q_n) φ(u q_n / a_n)`.
    pub fn psi_n(&self, u: f64, scaling: Scaling) -> f64 {
        let q = self.q_n();
        scaling.b_n / q * self.phi(u * q / scaling.a_n)
    }

    /// `Ψ_n` straight from the generating function.
    pub fn psi_n_from_g(&self, u: f64, scaling: Scaling) -> f64 {
        scaling.b_n * (self.g_n(1.0 - u / scaling.a_n) - 1.0 + u / scaling.a_n)
    }
}

/// `∫_y^{a_n} du / Ψ_n(u)`; an error if `Ψ_n` is not positive on the range.
pub fn dlg_condition(table: &LaplaceExponentTable, y: f64, scaling: Scaling) -> Result<f64> {
    if !(y > 0.0) {
        return invalid("lower limit must be positive");
    }
    if y >= scaling.a_n {
        return Ok(0.0);
    }
    let probes = 64;
    for k in 0..=probes {
        let u = y + (scaling.a_n - y) * k as f64 / probes as f64;
        let v = table.psi_n(u, scaling);
        if !(v > 0.0) {
            return Err(ModelError::OutOfRange(format!("Ψ_n({u}) = {v} is not positive")));
        }
    }
    // u = y·e^s spreads the quadrature nodes evenly in log scale
    let span = (scaling.a_n / y).ln();
    Ok(integrate(|s| y * s.exp() / table.psi_n(y * s.exp(), scaling), 0.0, span, 1e-8))
}

/// Black, white and composed reference paths on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePaths {
    pub black: StepPath,
    pub white: StepPath,
    pub composed: StepPath,
    pub z: f64,
}

fn compound_poisson<R: Rng + ?Sized>(spec: &WeightSpec, rate: f64, horizon: f64, rng: &mut R) -> StepPath {
    let count = poisson_count(rate * horizon, rng) as usize;
    let mut times: Vec<f64> = (0..count).map(|_| horizon * rng.gen::<f64>()).collect();
    times.sort_by(f64::total_cmp);
    let jumps = (0..count).map(|_| spec.sample_size_biased(rng)).collect();
    StepPath::new(times, jumps, 0.0, horizon).expect("sorted times")
}

pub fn reference_paths_with<R: Rng + ?Sized>(pair: &CriticalPair, horizon: f64, rng: &mut R) -> Result<ReferencePaths> {
    let ratio = (pair.n as f64 / pair.m as f64).sqrt();
    let black = compound_poisson(&pair.spec_b, ratio * pair.spec_b.moment(1.0)?, horizon, rng);
    let reach = black.value(horizon);
    let white = compound_poisson(&pair.spec_w, pair.spec_w.moment(1.0)? / ratio, reach, rng);
    let mut times = Vec::new();
    let mut jumps = Vec::new();
    for (k, &t) in black.times().iter().enumerate() {
        let jump = white.value(black.value(t)) - white.value(black.before_jump(k));
        if jump > 0.0 {
            times.push(t);
            jumps.push(jump);
        }
    }
    let composed = StepPath::new(times, jumps, -1.0, horizon)?;
    Ok(ReferencePaths { black, white, composed, z: pair.z() })
}

pub fn reference_paths(pair: &CriticalPair, horizon: f64, seed: u64) -> Result<ReferencePaths> {
    reference_paths_with(pair, horizon, &mut replicate_rng(seed, 0))
}

/// `E^{n,m}_t`: jump sums against `s/√(mn)` plus the two compensators.
pub fn tilt_density(table: &LaplaceExponentTable, paths: &ReferencePaths, t: f64) -> f64 {
    let z = paths.z;
    let reach = paths.black.value(t);
    let jump_sum = |p: &StepPath, upto: f64| -> f64 {
        p.times().iter().zip(p.jumps()).take_while(|(&s, _)| s <= upto).map(|(&s, &j)| s / z * j).sum()
    };
    let stochastic = jump_sum(&paths.white, reach) + jump_sum(&paths.black, t);
    let ratio = (table.n / table.m).sqrt();
    let comp_b = ratio * z * integrated_transform(&table.spec_b, t / z);
    let comp_w = z / ratio * integrated_transform(&table.spec_w, reach / z);
    (-stochastic - comp_b - comp_w).exp()
}

/// `∫_0^U φ(s/z) ds` by nested quadrature, for checking the closed Fubini form.
pub fn compensator_by_quadrature(table: &LaplaceExponentTable, black: bool, upper: f64, z: f64) -> f64 {
    integrate(|s| if black { table.phi_b(s / z) } else { table.phi_w(s / z) }, 0.0, upper, 1e-10)
}

/// `(α+1)Γ(2−α)/(α(α−1))` for `α ∈ (1,2)` and `1/2` at `α = 2`.
pub fn stable_constant(alpha: f64) -> f64 {
    if alpha == 2.0 {
        0.5
    } else {
        (alpha + 1.0) * gamma(2.0 - alpha) / (alpha * (alpha - 1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentTarget {
    ThirdMoment,
    PowerTail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledExponentCheck {
    pub n: f64,
    pub lambda: f64,
    pub value: f64,
    pub target: f64,
    pub rel_error: f64,
}

/// `n^{2/3} φ̂(n^{−1/3}λ)` against `½σ_3λ²`, or `n^{γ/(γ+1)} φ̂(n^{−1/(γ+1)}λ)` against `C_F C(γ) λ^γ`,
/// where `φ̂(λ) = E[(e^{−λX} − 1 + λX)X]`.
pub fn scaled_exponent_check(spec: &WeightSpec, target: ExponentTarget, lambda: f64, n: f64) -> Result<ScaledExponentCheck> {
    if lambda < 0.0 {
        return invalid("λ must be nonnegative");
    }
    let (value, goal) = match target {
        ExponentTarget::ThirdMoment => {
            let sigma3 = spec.moment(3.0)?;
            if !sigma3.is_finite() {
                return Err(ModelError::WrongRegime("third moment is infinite".into()));
            }
            (n.powf(2.0 / 3.0) * compensated_transform(spec, lambda * n.powf(-1.0 / 3.0)), 0.5 * sigma3 * lambda * lambda)
        }
        ExponentTarget::PowerTail => {
            let (Some(g), Some(c)) = (spec.tail_index(), spec.tail_constant()) else {
                return Err(ModelError::WrongRegime("spec has no power tail".into()));
            };
            let value = n.powf(g / (g + 1.0)) * compensated_transform(spec, lambda * n.powf(-1.0 / (g + 1.0)));
            (value, c * stable_constant(g) * lambda.powf(g))
        }
    };
    let rel_error = if goal == 0.0 { value.abs() } else { (value - goal).abs() / goal };
    Ok(ScaledExponentCheck { n, lambda, value, target: goal, rel_error })
}

pub fn appendix_a_checks(spec: &WeightSpec, target: ExponentTarget, lambdas: &[f64], ns: &[f64]) -> Result<Vec<ScaledExponentCheck>> {
    let mut out = Vec::new();
    for &n in ns {
        for &l in lambdas {
            out.push(scaled_exponent_check(spec, target, l, n)?);
        }
    }
    Ok(out)
}

pub fn write_checks_csv<W: Write>(checks: &[ScaledExponentCheck], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| ModelError::Io(e.to_string());
    w.write_record(["n", "lambda", "value", "target", "rel_error"]).map_err(io)?;
    for c in checks {
        w.write_record([c.n, c.lambda, c.value, c.target, c.rel_error].map(|v| v.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| ModelError::Io(e.to_string()))
}

/// Lower bound `φ̂(λ) ≥ C' λ^γ ∫_{λ_0}^∞ (1 − e^{−y}) y^{−γ} dy` on `[0, λ_0]`,
/// with `C' = inf_{x ≥ 1} (1 − F(x)) x^{1+γ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub tail_floor: f64,
    pub constant: f64,
    pub min_ratio: f64,
    pub holds: bool,
}

pub fn lower_bound_check(spec: &WeightSpec, lambda0: f64, grid: usize) -> Result<LowerBoundReport> {
    let (Some(g), WeightKind::PowerTail { cutoff, tail_const, .. }) = (spec.tail_index(), &spec.kind) else {
        return Err(ModelError::WrongRegime("spec has no power tail".into()));
    };
    let probes = 2000;
    let upper = cutoff.max(1.0);
    let mut floor = *tail_const;
    for k in 0..=probes {
        let x = 1.0 + (upper - 1.0) * k as f64 / probes as f64;
        floor = floor.min(spec.survival(x) * x.powf(1.0 + g));
    }
    let tail_integral = integrate_to_inf(|y| -(-y).exp_m1() * y.powf(-g), lambda0, 1e-10);
    let constant = floor * tail_integral;
    let mut min_ratio = f64::INFINITY;
    for k in 1..=grid {
        let l = lambda0 * k as f64 / grid as f64;
        min_ratio = min_ratio.min(compensated_transform(spec, l) / (constant * l.powf(g)));
    }
    Ok(LowerBoundReport { tail_floor: floor, constant, min_ratio, holds: min_ratio >= 1.0 })
}

/// Regime of a critical pair, used to pick `ExponentTarget` for the dominant colour.
pub fn exponent_target(regime: Regime) -> ExponentTarget {
    match regime {
        Regime::ThirdMoments => ExponentTarget::ThirdMoment,
        _ => ExponentTarget::PowerTail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stats::{ks_critical_one_sample, ks_one_sample, summarize};
    use crate::weights::Color;

    fn unit_pair(n: usize) -> CriticalPair {
        CriticalPair::new(
            WeightSpec::point_mass(1.0, Color::Black).unwrap(),
            WeightSpec::point_mass(1.0, Color::White).unwrap(),
            1.0,
            n,
        )
        .unwrap()
    }

    fn exp_pair(n: usize) -> CriticalPair {
        CriticalPair::calibrated(
            WeightSpec::exponential(1.0, Color::Black).unwrap(),
            WeightSpec::exponential(1.0, Color::White).unwrap(),
            1.0,
            n,
        )
        .unwrap()
    }

    #[test]
    fn conditioned_has_exact_counts_and_weight_marginal() {
        let pair = exp_pair(100_000);
        let c = sample_conditioned(&pair, 9);
        assert_eq!((c.black.len(), c.white.len()), (pair.n, pair.m));
        let x = c.x();
        let d = ks_one_sample(&x, |v| pair.spec_b.cdf(v));
        assert!(d < ks_critical_one_sample(x.len()), "{d}");
    }

    #[test]
    fn conditioned_clock_rate_scales_with_weight() {
        let pair = CriticalPair::new(
            WeightSpec::table(vec![(0.5, 0.5), (2.0, 0.5)], Color::Black).unwrap(),
            WeightSpec::point_mass(1.0, Color::White).unwrap(),
            1.0,
            40_000,
        )
        .unwrap();
        let c = sample_conditioned(&pair, 4);
        for w in [0.5, 2.0] {
            let clocks: Vec<f64> = c.black.iter().filter(|a| a.1 == w).map(|a| a.0).collect();
            let s = summarize(&clocks);
            let expected = pair.z() / w;
            assert!((s.mean - expected).abs() < 4.0 * s.std_error, "{w}: {} vs {expected}", s.mean);
        }
    }

    #[test]
    fn point_mass_clocks_are_exponential() {
        let pair = unit_pair(50_000);
        let c = sample_conditioned(&pair, 1);
        let z = pair.z();
        let clocks: Vec<f64> = c.black.iter().map(|a| a.0).collect();
        let d = ks_one_sample(&clocks, |t| 1.0 - (-t / z).exp());
        assert!(d < ks_critical_one_sample(clocks.len()));
    }

    #[test]
    fn unconditioned_counts_are_poisson() {
        let pair = unit_pair(50);
        let mut rng = rng_from_seed(2);
        let runs = 10_000;
        let counts: Vec<f64> =
            (0..runs).map(|_| sample_unconditioned_with(&pair, &mut rng).unwrap().black.len() as f64).collect();
        let s = summarize(&counts);
        assert!((s.mean - 50.0).abs() < 4.0 * (50.0f64 / runs as f64).sqrt());
        assert!((s.std_dev.powi(2) / 50.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn intensity_total_mass_is_n() {
        let pair = exp_pair(10);
        let z = pair.z();
        let n = pair.n as f64;
        let mass = pair
            .spec_b
            .expect(|x| crate::numeric::integrate_to_inf(|t| n * x / z * (-x * t / z).exp(), 0.0, 1e-10));
        assert!((mass / n - 1.0).abs() < 1e-6);
    }

    #[test]
    fn laplace_exponent_examples() {
        let t = laplace_exponents(&unit_pair(100)).unwrap();
        assert_eq!(t.phi_b(0.0), 0.0);
        assert!((t.phi_b(0.7) - ((-0.7f64).exp() - 1.0)).abs() < 1e-15);
        let spec = WeightSpec::exponential(1.0, Color::Black).unwrap();
        for &l in &[0.1, 1.0, 3.0] {
            let closed = 1.0 / (1.0 + l) / (1.0 + l) - 1.0;
            assert!((size_biased_transform(&spec, l) - closed).abs() < 1e-14);
            let quad = spec.expect(|x| (-l * x).exp_m1() * x);
            assert!((quad - closed).abs() < 1e-8 * closed.abs());
            let comp = closed + l * 2.0;
            assert!((compensated_transform(&spec, l) - comp).abs() < 1e-8 * comp);
        }
    }

    #[test]
    fn subordination_identity() {
        for pair in [exp_pair(1000), unit_pair(1000)] {
            let t = laplace_exponents(&pair).unwrap();
            for &l in &[0.01, 0.1, 0.5, 2.0] {
                let composed = t.phi_b(-t.phi_w(l));
                // nested quadrature: E_b[(exp(X·φ^w(λ)) − 1)X] with φ^w itself by quadrature
                let inner = t.spec_w.expect(|y| (-l * y).exp_m1() * y) / (t.n / t.m).sqrt();
                let nested = (t.n / t.m).sqrt() * t.spec_b.expect(|x| (x * inner).exp_m1() * x);
                assert!(((t.phi(l) - l) - composed).abs() <= 1e-6 * composed.abs());
                assert!((nested - composed).abs() <= 1e-6 * composed.abs());
            }
            assert!(t.q_n() > 0.0);
        }
    }

    #[test]
    fn psi_n_forms_agree() {
        let pair = exp_pair(10_000);
        let t = laplace_exponents(&pair).unwrap();
        let sc = Scaling::for_pair(&pair).unwrap();
        for &u in &[1.0, 5.0, 10.0] {
            let a = t.psi_n(u, sc);
            let b = t.psi_n_from_g(u, sc);
            assert!((a - b).abs() < 1e-5 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn dlg_condition_examples() {
        let pair = unit_pair(1_000_000);
        let t = laplace_exponents(&pair).unwrap();
        let sc = Scaling::for_pair(&pair).unwrap();
        let at10 = dlg_condition(&t, 10.0, sc).unwrap();
        let at20 = dlg_condition(&t, 20.0, sc).unwrap();
        assert!(at10 > 0.0 && at10.is_finite());
        assert!(at20 < at10);
        assert!(at20 <= 0.5 * at10 + 1e-12);
        assert_eq!(dlg_condition(&t, sc.a_n, sc).unwrap(), 0.0);
        assert!(dlg_condition(&t, -1.0, sc).is_err());
    }

    #[test]
    fn compensator_closed_form_matches_quadrature() {
        let pair = exp_pair(50);
        let t = laplace_exponents(&pair).unwrap();
        let z = pair.z();
        let ratio = (t.n / t.m).sqrt();
        for &u in &[0.5, 3.0, 20.0] {
            let closed = ratio * z * integrated_transform(&t.spec_b, u / z);
            let quad = compensator_by_quadrature(&t, true, u, z);
            assert!((closed - quad).abs() < 1e-8 * quad.abs(), "{closed} vs {quad}");
        }
    }

    #[test]
    fn reference_path_moments() {
        let pair = exp_pair(100);
        let ratio = (pair.n as f64 / pair.m as f64).sqrt();
        let mut rng = rng_from_seed(8);
        let horizon = 2.0;
        let runs = 10_000;
        let mut ends = Vec::with_capacity(runs);
        let mut counts = Vec::with_capacity(runs);
        for _ in 0..runs {
            let p = reference_paths_with(&pair, horizon, &mut rng).unwrap();
            ends.push(p.black.value(horizon));
            counts.push(p.black.jump_count() as f64);
        }
        let s = summarize(&ends);
        let goal = ratio * pair.spec_b.moment(2.0).unwrap() * horizon;
        assert!((s.mean - goal).abs() < 4.0 * s.std_error, "{} vs {goal}", s.mean);
        let c = summarize(&counts);
        let rate = ratio * pair.spec_b.moment(1.0).unwrap() * horizon;
        assert!((c.mean - rate).abs() < 4.0 * (rate / runs as f64).sqrt());
        let empty = reference_paths_with(&pair, 0.0, &mut rng).unwrap();
        assert_eq!(empty.black.jump_count() + empty.composed.jump_count(), 0);
    }

    #[test]
    fn tilt_density_examples() {
        let pair = exp_pair(20);
        let t = laplace_exponents(&pair).unwrap();
        let mut rng = rng_from_seed(12);
        let paths = reference_paths_with(&pair, 5.0, &mut rng).unwrap();
        // before any jump only the black compensator contributes
        let first = paths.black.times().first().copied().unwrap_or(5.0);
        let s = 0.5 * first;
        let z = pair.z();
        let expected = (-compensator_by_quadrature(&t, true, s, z)).exp();
        assert!((tilt_density(&t, &paths, s) - expected).abs() < 1e-9 * expected);
        assert!(expected > 1.0);
        assert_eq!(tilt_density(&t, &paths, 0.0), 1.0);
        // prefix consistency: a path cut at t gives the same density at s < t
        let cut = ReferencePaths {
            black: StepPath::new(
                paths.black.times().iter().copied().filter(|&u| u <= 2.0).collect(),
                paths.black.times().iter().zip(paths.black.jumps()).filter(|(&u, _)| u <= 2.0).map(|(_, &j)| j).collect(),
                0.0,
                2.0,
            )
            .unwrap(),
            ..paths.clone()
        };
        assert_eq!(tilt_density(&t, &paths, 1.5), tilt_density(&t, &cut, 1.5));
    }

    #[test]
    fn scaled_exponent_examples() {
        let exp1 = WeightSpec::exponential(1.0, Color::Black).unwrap();
        let c = scaled_exponent_check(&exp1, ExponentTarget::ThirdMoment, 1.0, 1e8).unwrap();
        assert!(c.rel_error < 0.05, "{c:?}");
        assert!((c.target - 3.0).abs() < 1e-12);
        let pm = WeightSpec::point_mass(1.0, Color::Black).unwrap();
        assert_eq!(scaled_exponent_check(&pm, ExponentTarget::ThirdMoment, 0.0, 1e8).unwrap().value, 0.0);
        assert!(matches!(
            scaled_exponent_check(&pm, ExponentTarget::PowerTail, 1.0, 1e8),
            Err(ModelError::WrongRegime(_))
        ));
        assert!((stable_constant(1.5) - 2.5 * std::f64::consts::PI.sqrt() / 0.75).abs() < 1e-12);
        let pt = WeightSpec::power_tail(1.5, 1.0, 1.0, Color::Black).unwrap();
        let errs: Vec<f64> = [1e4, 1e6, 1e8]
            .iter()
            .map(|&n| scaled_exponent_check(&pt, ExponentTarget::PowerTail, 1.0, n).unwrap().rel_error)
            .collect();
        assert!(errs[2] < 0.10, "{errs:?}");
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        let errs: Vec<f64> = [1e4, 1e6, 1e8]
            .iter()
            .map(|&n| scaled_exponent_check(&exp1, ExponentTarget::ThirdMoment, 1.0, n).unwrap().rel_error)
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn lower_bound_holds() {
        let pt = WeightSpec::power_tail(1.5, 1.0, 1.0, Color::Black).unwrap();
        let r = lower_bound_check(&pt, 2.0, 200).unwrap();
        assert!(r.holds, "{r:?}");
        let pt = WeightSpec::power_tail(1.3, 2.0, 1.5, Color::Black).unwrap();
        assert!(lower_bound_check(&pt, 1.0, 200).unwrap().holds);
    }

    #[test]
    fn checks_csv_has_header() {
        let mut buf = Vec::new();
        write_checks_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), "n,lambda,value,target,rel_error");
    }
}
