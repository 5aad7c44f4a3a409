//! Gauss–Legendre rules on `[-1, 1]` and their affine map onto elements.

use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 64;

/// An n-point Gauss–Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points and Jacobian-scaled weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&p, &w)| (mid + half * p, w * half))
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points, roots found by Newton's method
/// started from Chebyshev-like guesses.
pub fn gauss_rule(n: usize) -> Result<QuadRule> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::InvalidQuadrature(format!(
            "point count must be in 1..={MAX_POINTS}, got {n}"
        )));
    }
    if n == 1 {
        return Ok(QuadRule {
            points: vec![0.0],
            weights: vec![2.0],
        });
    }
    let nf = n as f64;
    let half = n.div_ceil(2);
    let mut pos = Vec::with_capacity(half);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        pos.push((x, w));
    }
    // assemble symmetric ascending points
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &pos {
        points.push(-x);
        weights.push(w);
    }
    let skip_middle = n % 2 == 1;
    for (k, &(x, w)) in pos.iter().enumerate().rev() {
        if skip_middle && k == half - 1 {
            continue;
        }
        points.push(x);
        weights.push(w);
    }
    if skip_middle {
        points[half - 1] = 0.0;
    }
    Ok(QuadRule { points, weights })
}

/// `∫_{x_left}^{x_right} f` with the rule mapped onto the element.
pub fn integrate_element<F: Fn(f64) -> f64>(f: F, element: (f64, f64), rule: &QuadRule) -> f64 {
    let (a, b) = element;
    rule.mapped(a, b).map(|(x, w)| w * f(x)).sum()
}

/// Default point count as a function of element size: 60 on the coarsest
/// grids down to 10 on the finest.
pub fn auto_points(h: f64) -> usize {
    if h >= 1.0 / 12.0 {
        60
    } else if h >= 1.0 / 30.0 {
        40
    } else if h >= 1.0 / 60.0 {
        20
    } else {
        10
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_rule() {
        let r = gauss_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points()[0] + s).abs() < 1e-15);
        assert!((r.points()[1] - s).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
        assert!((r.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_and_symmetry() {
        for n in 1..=MAX_POINTS {
            let r = gauss_rule(n).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n={n} sum={sum}");
            for i in 0..n {
                assert!((r.points()[i] + r.points()[n - 1 - i]).abs() < 1e-15);
                assert!(r.weights()[i] > 0.0);
            }
            assert!(r.points().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn ten_point_odd_power_vanishes() {
        let r = gauss_rule(10).unwrap();
        let v = integrate_element(|x| x.powi(19), (-1.0, 1.0), &r);
        assert!(v.abs() < 1e-15);
        let v = integrate_element(|x| x.powi(18), (-1.0, 1.0), &r);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn mapped_quadratic() {
        let r = gauss_rule(2).unwrap();
        let v = integrate_element(|x| x * x, (0.0, 1.0), &r);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let h = 0.37;
        assert!((integrate_element(|_| 1.0, (1.0, 1.0 + h), &r) - h).abs() < 1e-15);
    }

    #[test]
    fn hat_product_matches_element_mass() {
        let r = gauss_rule(2).unwrap();
        let (a, b) = (0.2, 0.45);
        let h = b - a;
        let p0 = |x: f64| (b - x) / h;
        let p1 = |x: f64| (x - a) / h;
        assert!((integrate_element(|x| p0(x) * p0(x), (a, b), &r) - h / 3.0).abs() < 1e-15);
        assert!((integrate_element(|x| p0(x) * p1(x), (a, b), &r) - h / 6.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_exponential_rule_refinement() {
        // self-consistency: 59 vs 60 points on a steep exponential enrichment product
        let (a, b) = (9.0 / 11.0, 10.0 / 11.0);
        let f = |x: f64| {
            let hat = (x - a) / (b - a);
            let e = (100.0 * (x - b)).exp() - 1.0;
            (hat * e).powi(2)
        };
        let i60 = integrate_element(f, (a, b), &gauss_rule(60).unwrap());
        let i59 = integrate_element(f, (a, b), &gauss_rule(59).unwrap());
        assert!((i60 - i59).abs() <= 1e-13 * i60.abs());
    }

    #[test]
    fn stabilizes_on_enrichment_integrands() {
        let (a, b) = (0.0, 1.0 / 11.0);
        let f = |x: f64| (100.0 * (x - b)).exp() * ((b - x) / (b - a));
        let i = |n| integrate_element(f, (a, b), &gauss_rule(n).unwrap());
        let diffs: Vec<f64> = [2usize, 4, 6, 8].iter().map(|&n| (i(n) - i(n + 4)).abs()).collect();
        assert!(diffs.windows(2).all(|w| w[1] <= w[0]), "{diffs:?}");
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(65).is_err());
    }

    #[test]
    fn schedule() {
        assert_eq!(auto_points(1.0 / 11.0), 60);
        assert_eq!(auto_points(1.0 / 23.0), 40);
        assert_eq!(auto_points(1.0 / 47.0), 20);
        assert_eq!(auto_points(1.0 / 95.0), 10);
    }

    proptest! {
        #[test]
        fn exact_for_polynomials(n in 1usize..=20, coeffs in prop::collection::vec(-1.0f64..1.0, 1..40)) {
            let deg = (2 * n - 1).min(coeffs.len() - 1);
            let c = &coeffs[..=deg];
            let rule = gauss_rule(n).unwrap();
            let num = integrate_element(|x| c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci), (-1.0, 1.0), &rule);
            let exact: f64 = c.iter().enumerate()
                .map(|(k, &ck)| if k % 2 == 0 { 2.0 * ck / (k as f64 + 1.0) } else { 0.0 })
                .sum();
            let scale: f64 = c.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            prop_assert!((num - exact).abs() < 1e-12 * scale);
        }
    }
}
