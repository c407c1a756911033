//! Weight laws for black and white vertices, their moments and samplers.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError, Result};
use crate::numeric::{integrate, integrate_to_inf};
use crate::rng::rng_from_seed;

/// Tolerance on `|σ^b_2 σ^w_2 - 1|` for a pair to count as critical.
pub const CRITICALITY_TOL: f64 = 1e-12;

const QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    PointMass { value: f64 },
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    /// `(value, probability)` atoms.
    DiscreteTable { atoms: Vec<(f64, f64)> },
    /// Uniform body on `(0, cutoff)` and survival `tail_const · x^{-γ-1}` above `cutoff`.
    PowerTail { gamma: f64, tail_const: f64, cutoff: f64 },
}

/// A weight distribution together with the colour it is used for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub kind: WeightKind,
    pub label: Color,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, label: Color) -> Result<Self> {
        let spec = WeightSpec { kind, label };
        spec.validate()?;
        Ok(spec)
    }

    pub fn point_mass(value: f64, label: Color) -> Result<Self> {
        Self::new(WeightKind::PointMass { value }, label)
    }

    pub fn exponential(rate: f64, label: Color) -> Result<Self> {
        Self::new(WeightKind::Exponential { rate }, label)
    }

    pub fn uniform(low: f64, high: f64, label: Color) -> Result<Self> {
        Self::new(WeightKind::Uniform { low, high }, label)
    }

    pub fn table(atoms: Vec<(f64, f64)>, label: Color) -> Result<Self> {
        Self::new(WeightKind::DiscreteTable { atoms }, label)
    }

    pub fn power_tail(gamma: f64, tail_const: f64, cutoff: f64, label: Color) -> Result<Self> {
        Self::new(WeightKind::PowerTail { gamma, tail_const, cutoff }, label)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        match &self.kind {
            WeightKind::PointMass { value } => {
                if !finite_pos(*value) {
                    return invalid(format!("point mass must be positive, got {value}"));
                }
            }
            WeightKind::Exponential { rate } => {
                if !finite_pos(*rate) {
                    return invalid(format!("rate must be positive, got {rate}"));
                }
            }
            WeightKind::Uniform { low, high } => {
                if !(finite_pos(*low) && high.is_finite() && high > low) {
                    return invalid(format!("uniform support ({low}, {high}) must satisfy 0 < low < high"));
                }
            }
            WeightKind::DiscreteTable { atoms } => {
                if atoms.is_empty() {
                    return invalid("empty atom table");
                }
                let mut total = 0.0;
                for &(v, p) in atoms {
                    if !finite_pos(v) || !(p.is_finite() && p >= 0.0) {
                        return invalid(format!("bad atom ({v}, {p})"));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return invalid(format!("atom probabilities sum to {total}"));
                }
            }
            WeightKind::PowerTail { gamma, tail_const, cutoff } => {
                if !(*gamma > 1.0 && *gamma < 2.0) {
                    return invalid(format!("tail index must lie in (1,2), got {gamma}"));
                }
                if !finite_pos(*tail_const) || !finite_pos(*cutoff) {
                    return invalid("tail constant and cutoff must be positive");
                }
                let p = tail_const * cutoff.powf(-gamma - 1.0);
                if p > 1.0 {
                    return invalid(format!("tail mass above cutoff is {p} > 1"));
                }
            }
        }
        Ok(())
    }

    /// Probability mass above the cutoff for the power-tail kind.
    fn tail_mass(&self) -> Option<f64> {
        match self.kind {
            WeightKind::PowerTail { gamma, tail_const, cutoff } => {
                Some(tail_const * cutoff.powf(-gamma - 1.0))
            }
            _ => None,
        }
    }

    /// Tail index γ when the law has a power tail.
    pub fn tail_index(&self) -> Option<f64> {
        match self.kind {
            WeightKind::PowerTail { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    /// Constant `C_F` in `1 - F(x) ~ C_F x^{-γ-1}`.
    pub fn tail_constant(&self) -> Option<f64> {
        match self.kind {
            WeightKind::PowerTail { tail_const, .. } => Some(tail_const),
            _ => None,
        }
    }

    /// `σ_r = E[X^r]`, `+∞` when the integral diverges.
    pub fn moment(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return invalid(format!("moment order must be positive, got {r}"));
        }
        Ok(match &self.kind {
            WeightKind::PointMass { value } => value.powf(r),
            WeightKind::Exponential { rate } => crate::numeric::gamma(r + 1.0) / rate.powf(r),
            WeightKind::Uniform { low, high } => {
                (high.powf(r + 1.0) - low.powf(r + 1.0)) / ((r + 1.0) * (high - low))
            }
            WeightKind::DiscreteTable { atoms } => atoms.iter().map(|&(v, p)| p * v.powf(r)).sum(),
            WeightKind::PowerTail { gamma, cutoff, .. } => {
                if r >= gamma + 1.0 {
                    f64::INFINITY
                } else {
                    let p = self.tail_mass().unwrap();
                    (1.0 - p) * cutoff.powf(r) / (r + 1.0)
                        + p * cutoff.powf(r) * (gamma + 1.0) / (gamma + 1.0 - r)
                }
            }
        })
    }

    /// Moment computed by quadrature against the density (or by summing atoms).
    pub fn moment_by_quadrature(&self, r: f64) -> f64 {
        self.expect(|x| x.powf(r))
    }

    /// `E[f(X)]` by exact summation for atomic laws and adaptive quadrature otherwise.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match &self.kind {
            WeightKind::PointMass { value } => f(*value),
            WeightKind::DiscreteTable { atoms } => atoms.iter().map(|&(v, p)| p * f(v)).sum(),
            WeightKind::Exponential { rate } => {
                let rate = *rate;
                // integrate in the scaled variable u = rate·x
                integrate_to_inf(|u| f(u / rate) * (-u).exp(), 0.0, QUAD_TOL)
            }
            WeightKind::Uniform { low, high } => {
                integrate(|x| f(x), *low, *high, QUAD_TOL) / (high - low)
            }
            WeightKind::PowerTail { gamma, cutoff, .. } => {
                let p = self.tail_mass().unwrap();
                let (gamma, cutoff) = (*gamma, *cutoff);
                let body = integrate(|x| f(x), 0.0, cutoff, QUAD_TOL) * (1.0 - p) / cutoff;
                // x = cutoff·e^s on the tail
                let tail = integrate_to_inf(
                    |s| {
                        let x = cutoff * s.exp();
                        f(x) * (gamma + 1.0) * (-(gamma + 1.0) * s).exp()
                    },
                    0.0,
                    QUAD_TOL,
                ) * p;
                body + tail
            }
        }
    }

    /// Survival function `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::PointMass { value } => {
                if x < *value {
                    1.0
                } else {
                    0.0
                }
            }
            WeightKind::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            WeightKind::Uniform { low, high } => {
                if x <= *low {
                    1.0
                } else if x >= *high {
                    0.0
                } else {
                    (high - x) / (high - low)
                }
            }
            WeightKind::DiscreteTable { atoms } => {
                atoms.iter().filter(|&&(v, _)| v > x).map(|&(_, p)| p).sum()
            }
            WeightKind::PowerTail { gamma, tail_const, cutoff } => {
                let p = self.tail_mass().unwrap();
                if x <= 0.0 {
                    1.0
                } else if x < *cutoff {
                    1.0 - (1.0 - p) * x / cutoff
                } else {
                    tail_const * x.powf(-gamma - 1.0)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            WeightKind::PointMass { value } => *value,
            WeightKind::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            WeightKind::Uniform { low, high } => low + (high - low) * open_unit(rng),
            WeightKind::DiscreteTable { atoms } => pick_atom(atoms.iter().map(|&(v, p)| (v, p)), rng),
            WeightKind::PowerTail { gamma, cutoff, .. } => {
                let p = self.tail_mass().unwrap();
                if rng.gen::<f64>() < p {
                    cutoff * open_unit(rng).powf(-1.0 / (gamma + 1.0))
                } else {
                    cutoff * open_unit(rng)
                }
            }
        }
    }

    /// Draw from the size-biased law `x dF(x) / σ_1`.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            WeightKind::PointMass { value } => *value,
            WeightKind::Exponential { rate } => {
                let a: f64 = Exp1.sample(rng);
                let b: f64 = Exp1.sample(rng);
                (a + b) / rate
            }
            WeightKind::Uniform { low, high } => {
                let u = rng.gen::<f64>();
                (low * low + u * (high * high - low * low)).sqrt()
            }
            WeightKind::DiscreteTable { atoms } => {
                let sigma1: f64 = atoms.iter().map(|&(v, p)| v * p).sum();
                pick_atom(atoms.iter().map(|&(v, p)| (v, v * p / sigma1)), rng)
            }
            WeightKind::PowerTail { gamma, cutoff, .. } => {
                let p = self.tail_mass().unwrap();
                let body = (1.0 - p) * cutoff / 2.0;
                let tail = p * cutoff * (gamma + 1.0) / gamma;
                if rng.gen::<f64>() * (body + tail) < tail {
                    cutoff * open_unit(rng).powf(-1.0 / gamma)
                } else {
                    cutoff * open_unit(rng).sqrt()
                }
            }
        }
    }

    /// The law of `factor · X`.
    pub fn scaled(&self, factor: f64) -> Result<WeightSpec> {
        if !(factor.is_finite() && factor > 0.0) {
            return invalid(format!("scale factor must be positive, got {factor}"));
        }
        let kind = match &self.kind {
            WeightKind::PointMass { value } => WeightKind::PointMass { value: value * factor },
            WeightKind::Exponential { rate } => WeightKind::Exponential { rate: rate / factor },
            WeightKind::Uniform { low, high } => WeightKind::Uniform {
                low: low * factor,
                high: high * factor,
            },
            WeightKind::DiscreteTable { atoms } => WeightKind::DiscreteTable {
                atoms: atoms.iter().map(|&(v, p)| (v * factor, p)).collect(),
            },
            WeightKind::PowerTail { gamma, tail_const, cutoff } => WeightKind::PowerTail {
                gamma: *gamma,
                tail_const: tail_const * factor.powf(gamma + 1.0),
                cutoff: cutoff * factor,
            },
        };
        WeightSpec::new(kind, self.label)
    }

    pub fn with_label(&self, label: Color) -> WeightSpec {
        WeightSpec { kind: self.kind.clone(), label }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn pick_atom<R: Rng + ?Sized, I: Iterator<Item = (f64, f64)>>(atoms: I, rng: &mut R) -> f64 {
    let u = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut last = 0.0;
    for (v, p) in atoms {
        acc += p;
        last = v;
        if u < acc {
            return v;
        }
    }
    last
}

/// `count` i.i.d. draws, reproducible from `seed`.
pub fn sample_weights(spec: &WeightSpec, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| spec.sample(&mut rng)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    ThirdMoments,
    DominantHeavy,
    MatchedHeavy,
}

impl Regime {
    pub fn index(self) -> u8 {
        match self {
            Regime::ThirdMoments => 1,
            Regime::DominantHeavy => 2,
            Regime::MatchedHeavy => 3,
        }
    }
}

/// Black and white weight laws with `m = ⌊θ n⌋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub spec_b: WeightSpec,
    pub spec_w: WeightSpec,
    pub theta: f64,
    pub n: usize,
    pub m: usize,
}

impl CriticalPair {
    pub fn new(spec_b: WeightSpec, spec_w: WeightSpec, theta: f64, n: usize) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return invalid(format!("theta must be positive, got {theta}"));
        }
        if n == 0 {
            return invalid("n must be positive");
        }
        spec_b.validate()?;
        spec_w.validate()?;
        let m = (theta * n as f64 + 1e-9).floor() as usize;
        if m == 0 {
            return invalid("floor(theta n) is zero");
        }
        Ok(CriticalPair {
            spec_b: spec_b.with_label(Color::Black),
            spec_w: spec_w.with_label(Color::White),
            theta,
            n,
            m,
        })
    }

    /// Rescales the white law so that `σ^b_2 σ^w_2 = 1`.
    pub fn calibrated(spec_b: WeightSpec, spec_w: WeightSpec, theta: f64, n: usize) -> Result<Self> {
        let sb2 = spec_b.moment(2.0)?;
        let sw2 = spec_w.moment(2.0)?;
        let factor = (1.0 / (sb2 * sw2)).sqrt();
        let spec_w = spec_w.scaled(factor)?;
        Self::new(spec_b, spec_w, theta, n)
    }

    pub fn z(&self) -> f64 {
        ((self.n as f64) * (self.m as f64)).sqrt()
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.spec_b.clone(), self.spec_w.clone(), self.theta, n)
    }

    pub fn rho(&self) -> f64 {
        self.spec_b.moment(2.0).unwrap() / self.theta.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub theta: f64,
    pub rho: f64,
    pub regime: Regime,
    /// Stable index for the heavy-tailed regimes.
    pub alpha: Option<f64>,
    pub product: f64,
}

pub fn validate_critical_pair(pair: &CriticalPair) -> Result<CriticalReport> {
    let sb2 = pair.spec_b.moment(2.0)?;
    let sw2 = pair.spec_w.moment(2.0)?;
    let product = sb2 * sw2;
    if (product - 1.0).abs() > CRITICALITY_TOL {
        return Err(ModelError::NotCritical { product });
    }
    let b_light = pair.spec_b.moment(3.0)?.is_finite();
    let w_light = pair.spec_w.moment(3.0)?.is_finite();
    let (regime, alpha) = match (b_light, w_light) {
        (true, true) => (Regime::ThirdMoments, None),
        (true, false) => return Err(ModelError::WhiteTailHeavier),
        (false, true) => (Regime::DominantHeavy, pair.spec_b.tail_index()),
        (false, false) => {
            let gb = pair.spec_b.tail_index().unwrap();
            let gw = pair.spec_w.tail_index().unwrap();
            if gb == gw {
                (Regime::MatchedHeavy, Some(gb))
            } else if gb < gw {
                (Regime::DominantHeavy, Some(gb))
            } else {
                return Err(ModelError::WhiteTailHeavier);
            }
        }
    };
    Ok(CriticalReport { theta: pair.theta, rho: sb2 / pair.theta.sqrt(), regime, alpha, product })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn heavy() -> WeightSpec {
        WeightSpec::power_tail(1.5, 0.5, 1.0, Color::Black).unwrap()
    }

    fn zoo() -> Vec<WeightSpec> {
        vec![
            WeightSpec::point_mass(1.3, Color::Black).unwrap(),
            WeightSpec::exponential(0.7, Color::Black).unwrap(),
            WeightSpec::uniform(0.5, 2.5, Color::Black).unwrap(),
            WeightSpec::table(vec![(0.5, 0.25), (1.0, 0.5), (4.0, 0.25)], Color::Black).unwrap(),
            heavy(),
        ]
    }

    #[test]
    fn moment_examples() {
        let e = WeightSpec::exponential(1.0, Color::Black).unwrap();
        assert!((e.moment(2.0).unwrap() - 2.0).abs() < 1e-12);
        let p = WeightSpec::point_mass(1.0, Color::White).unwrap();
        assert_eq!(p.moment(3.0).unwrap(), 1.0);
        assert!(heavy().moment(3.0).unwrap().is_infinite());
        assert!(e.moment(0.0).is_err());
        assert!(e.moment(-1.0).is_err());
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        for spec in zoo() {
            for &r in &[0.5, 1.0, 2.0, 2.4] {
                let exact = spec.moment(r).unwrap();
                let quad = spec.moment_by_quadrature(r);
                assert!(
                    ((quad - exact) / exact).abs() <= 1e-8,
                    "{:?} r={r}: {quad} vs {exact}",
                    spec.kind
                );
            }
        }
    }

    #[test]
    fn power_tail_is_continuous_at_cutoff() {
        let s = heavy();
        let below = s.survival(1.0 - 1e-12);
        let at = s.survival(1.0);
        assert!((below - at).abs() < 1e-10);
        assert!((s.survival(3.0) - 0.5 * 3f64.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(WeightSpec::point_mass(0.0, Color::Black).is_err());
        assert!(WeightSpec::uniform(0.0, 1.0, Color::Black).is_err());
        assert!(WeightSpec::power_tail(2.5, 1.0, 1.0, Color::Black).is_err());
        assert!(WeightSpec::power_tail(1.5, 2.0, 1.0, Color::Black).is_err());
        assert!(WeightSpec::table(vec![(1.0, 0.4)], Color::Black).is_err());
    }

    #[test]
    fn sampling_examples() {
        let p = WeightSpec::point_mass(1.0, Color::Black).unwrap();
        assert_eq!(sample_weights(&p, 5, 3), vec![1.0; 5]);
        let e = WeightSpec::exponential(1.0, Color::Black).unwrap();
        let a = sample_weights(&e, 100_000, 11);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 1.0).abs() < 0.02);
        assert_eq!(a, sample_weights(&e, 100_000, 11));
        assert!(a.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn empirical_moments_within_four_standard_errors() {
        for (k, spec) in zoo().into_iter().enumerate() {
            let draws = sample_weights(&spec, 100_000, 100 + k as u64);
            for &r in &[1.0, 2.0] {
                let vals: Vec<f64> = draws.iter().map(|x| x.powf(r)).collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
                let se = (var / vals.len() as f64).sqrt();
                let target = spec.moment(r).unwrap();
                let slack = 4.0 * se + 1e-9 * target;
                assert!((mean - target).abs() <= slack, "{:?} r={r}: {mean} vs {target}", spec.kind);
            }
        }
    }

    #[test]
    fn power_tail_empirical_survival() {
        let spec = heavy();
        let draws = sample_weights(&spec, 1_000_000, 5);
        let x = 10.0;
        let frac = draws.iter().filter(|&&v| v > x).count() as f64 / draws.len() as f64;
        let target = 0.5 * x.powf(-2.5);
        assert!((frac / target - 1.0).abs() < 0.2, "{frac} vs {target}");
    }

    #[test]
    fn size_biased_sampler_mean() {
        // E under the size-biased law is σ_2/σ_1
        for (k, spec) in zoo().into_iter().enumerate() {
            let mut rng = rng_from_seed(40 + k as u64);
            let count = 200_000;
            let draws: Vec<f64> = (0..count).map(|_| spec.sample_size_biased(&mut rng)).collect();
            let target = spec.moment(2.0).unwrap() / spec.moment(1.0).unwrap();
            let mean = draws.iter().sum::<f64>() / count as f64;
            // the size-biased power tail has infinite variance; use a loose band there
            let tol = if spec.tail_index().is_some() { 0.05 } else { 0.01 };
            assert!((mean / target - 1.0).abs() < tol, "{:?}: {mean} vs {target}", spec.kind);
        }
    }

    #[test]
    fn scaling_moves_second_moment_quadratically() {
        for spec in zoo() {
            let s = spec.scaled(1.7).unwrap();
            let ratio = s.moment(2.0).unwrap() / spec.moment(2.0).unwrap();
            assert!((ratio - 1.7f64.powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn regime_examples() {
        let one_b = WeightSpec::point_mass(1.0, Color::Black).unwrap();
        let one_w = WeightSpec::point_mass(1.0, Color::White).unwrap();
        let rep = validate_critical_pair(&CriticalPair::new(one_b.clone(), one_w.clone(), 1.0, 10).unwrap()).unwrap();
        assert_eq!(rep.regime, Regime::ThirdMoments);
        assert_eq!(rep.rho, 1.0);

        let e = WeightSpec::exponential(1.0, Color::Black).unwrap();
        let half = WeightSpec::point_mass(1.0 / 2f64.sqrt(), Color::White).unwrap();
        let theta = 2.0;
        let rep = validate_critical_pair(&CriticalPair::new(e, half, theta, 10).unwrap()).unwrap();
        assert!((rep.rho - 2.0 / theta.sqrt()).abs() < 1e-12);

        let pair = CriticalPair::calibrated(heavy(), one_w.clone(), 1.0, 10).unwrap();
        let rep = validate_critical_pair(&pair).unwrap();
        assert_eq!(rep.regime, Regime::DominantHeavy);
        assert_eq!(rep.alpha, Some(1.5));

        let pair = CriticalPair::calibrated(heavy(), heavy().with_label(Color::White), 1.0, 10).unwrap();
        assert_eq!(validate_critical_pair(&pair).unwrap().regime, Regime::MatchedHeavy);

        let bad = CriticalPair::new(one_b, WeightSpec::point_mass(2.0, Color::White).unwrap(), 1.0, 10).unwrap();
        match validate_critical_pair(&bad) {
            Err(ModelError::NotCritical { product }) => assert!((product - 4.0).abs() < 1e-12),
            other => panic!("expected a criticality error, got {other:?}"),
        }
    }

    #[test]
    fn m_is_floor_of_theta_n() {
        let one = WeightSpec::point_mass(1.0, Color::Black).unwrap();
        let p = CriticalPair::new(one.clone(), one, 0.75, 10).unwrap();
        assert_eq!(p.m, 7);
    }

    #[test]
    fn spec_json_round_trip() {
        for spec in zoo() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: WeightSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
    }

    proptest! {
        #[test]
        fn calibration_makes_pairs_critical(rate in 0.2f64..5.0, value in 0.1f64..10.0, theta in 0.2f64..4.0) {
            let b = WeightSpec::exponential(rate, Color::Black).unwrap();
            let w = WeightSpec::point_mass(value, Color::White).unwrap();
            let pair = CriticalPair::calibrated(b, w, theta, 100).unwrap();
            prop_assert!(validate_critical_pair(&pair).is_ok());
        }

        #[test]
        fn survival_is_monotone(x in 0.0f64..20.0, dx in 0.0f64..5.0) {
            for spec in zoo() {
                prop_assert!(spec.survival(x + dx) <= spec.survival(x) + 1e-15);
            }
        }
    }
}
