//! Adaptive Gauss-Kronrod quadrature and a few numerically careful helpers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integral of `f` over `[a, b]`, refined until the estimated error is below
/// `rel_tol` times the magnitude of the result (or an absolute floor).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, rel_tol);
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let abs_floor = 1e-300;
    while total_err > (rel_tol * total.abs()).max(abs_floor) && heap.len() < MAX_SEGMENTS {
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    heap.iter().map(|s| s.value).sum()
}

/// Integral over `[a, ∞)` through the map `x = a + t/(1-t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> f64 {
    integrate(
        |t: f64| {
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel_tol,
    )
}

/// `e^{-u} - 1 + u`, accurate for small `u`.
pub fn exp_neg_compensated(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        // u²/2 - u³/6 + u⁴/24 - u⁵/120
        let u2 = u * u;
        u2 * (0.5 - u / 6.0 + u2 / 24.0 - u2 * u / 120.0)
    } else {
        (-u).exp_m1() + u
    }
}

/// `1 - e^{-u} - u + u²/2`, the next-order compensated exponential.
pub fn exp_neg_second_order(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        let u2 = u * u;
        u2 * u * (1.0 / 6.0 - u / 24.0 + u2 / 120.0 - u2 * u / 720.0)
    } else {
        -(-u).exp_m1() - u + 0.5 * u * u
    }
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let v = integrate_to_inf(|x| (-x * x / 2.0).exp(), 0.0, 1e-10);
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn integrable_singularity() {
        let v = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-8);
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn compensated_exponential_matches_direct() {
        for &u in &[1e-6, 1e-4, 9e-4, 2e-3, 0.5, 3.0] {
            let direct = (-u as f64).exp() - 1.0 + u;
            let fast = exp_neg_compensated(u);
            assert!((fast - direct).abs() <= 1e-9 * direct.abs().max(1e-300) + 1e-15);
            let second = 1.0 - (-u as f64).exp() - u + 0.5 * u * u;
            let fast2 = exp_neg_second_order(u);
            assert!((fast2 - second).abs() <= 1e-6 * second.abs() + 1e-15);
        }
    }
}
