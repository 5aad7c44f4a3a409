//! Relative L2/H1 error norms, error time series and convergence rates.

use serde::{Deserialize, Serialize};

use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::quadrature::gauss_rule;
use crate::reference::ReferenceSolution;
use crate::solver::SolutionHistory;

/// A function of `x` with a slope, plus the points where the slope may jump.
pub trait SpatialField {
    fn eval(&self, x: f64) -> Result<(f64, f64)>;

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// GFEM solution for a fixed coefficient vector.
pub struct DiscreteField<'a> {
    pub disc: &'a Discretization,
    pub coeffs: &'a [f64],
}

impl SpatialField for DiscreteField<'_> {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        self.disc.evaluate(self.coeffs, x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.disc.mesh().nodes().to_vec()
    }
}

/// A reference solution frozen at time `t`.
pub struct ReferenceAt<'a> {
    pub reference: &'a ReferenceSolution,
    pub t: f64,
}

impl SpatialField for ReferenceAt<'_> {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        self.reference.eval(x, self.t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.reference.breakpoints(self.t)
    }
}

/// Closure-backed field, handy for synthetic checks.
pub struct FnField<F>(pub F);

impl<F: Fn(f64) -> (f64, f64)> SpatialField for FnField<F> {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        Ok((self.0)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    L2,
    H1,
}

/// Composite rule used for error integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErrorOptions {
    pub subintervals: usize,
    pub points: usize,
    /// Use only the derivative part for H1.
    pub h1_seminorm: bool,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        ErrorOptions {
            subintervals: 2000,
            points: 4,
            h1_seminorm: false,
        }
    }
}

/// Relative L2 and H1 errors at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSample {
    pub time: f64,
    pub rel_l2: f64,
    pub rel_h1: f64,
    pub dofs: usize,
}

fn partition(lo: f64, hi: f64, n: usize, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    pts.extend(extra.into_iter().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    let tol = 1e-13 * (hi - lo);
    pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    pts
}

/// Both relative norms of `u_h − u` over `domain`.
pub fn relative_errors(
    u_h: &dyn SpatialField,
    reference: &dyn SpatialField,
    domain: (f64, f64),
    opts: &ErrorOptions,
) -> Result<(f64, f64)> {
    let (lo, hi) = domain;
    if !(lo < hi) || opts.subintervals == 0 {
        return Err(Error::InvalidParameter("error integration needs lo < hi and subintervals > 0".into()));
    }
    let rule = gauss_rule(opts.points)?;
    let pts = partition(
        lo,
        hi,
        opts.subintervals,
        u_h.breakpoints().into_iter().chain(reference.breakpoints()),
    );
    let (mut e0, mut e1, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0);
    for w in pts.windows(2) {
        for (x, wq) in rule.mapped(w[0], w[1]) {
            let (uh, duh) = u_h.eval(x)?;
            let (u, du) = reference.eval(x)?;
            e0 += wq * (uh - u).powi(2);
            e1 += wq * (duh - du).powi(2);
            r0 += wq * u * u;
            r1 += wq * du * du;
        }
    }
    let l2 = if r0 > 0.0 { (e0 / r0).sqrt() } else { return Err(Error::ZeroReferenceNorm) };
    let (num, den) = if opts.h1_seminorm { (e1, r1) } else { (e0 + e1, r0 + r1) };
    if !(den > 0.0) {
        return Err(Error::ZeroReferenceNorm);
    }
    Ok((l2, (num / den).sqrt()))
}

/// One relative norm of `u_h − u` over `domain`.
pub fn relative_error(
    u_h: &dyn SpatialField,
    reference: &dyn SpatialField,
    domain: (f64, f64),
    norm: Norm,
    opts: &ErrorOptions,
) -> Result<f64> {
    let (l2, h1) = relative_errors(u_h, reference, domain, opts)?;
    Ok(match norm {
        Norm::L2 => l2,
        Norm::H1 => h1,
    })
}

/// Errors at every recorded snapshot of `history`.
pub fn error_time_series(
    disc: &Discretization,
    history: &SolutionHistory,
    reference: &ReferenceSolution,
    opts: &ErrorOptions,
) -> Result<Vec<ErrorSample>> {
    let domain = (disc.mesh().lo(), disc.mesh().hi());
    history
        .times
        .iter()
        .zip(&history.coefficients)
        .map(|(&t, c)| {
            let (rel_l2, rel_h1) = relative_errors(
                &DiscreteField { disc, coeffs: c },
                &ReferenceAt { reference, t },
                domain,
                opts,
            )?;
            Ok(ErrorSample {
                time: t,
                rel_l2,
                rel_h1,
                dofs: disc.total_dofs(),
            })
        })
        .collect()
}

/// `−log(e_f / e_c) / log(n_f / n_c)` between two grids; `None` when either
/// error is zero.
pub fn rate_between(e_coarse: f64, e_fine: f64, dofs_coarse: usize, dofs_fine: usize) -> Option<f64> {
    if e_coarse <= 0.0 || e_fine <= 0.0 {
        return None;
    }
    Some(-(e_fine / e_coarse).ln() / (dofs_fine as f64 / dofs_coarse as f64).ln())
}

/// Errors of several grids at one time, with rates from the finest two.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub time: f64,
    pub samples: Vec<ErrorSample>,
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
}

/// Rates `(L2, H1)` from the two finest of `samples`.
pub fn convergence_rate(samples: &[ErrorSample]) -> Result<(Option<f64>, Option<f64>)> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("a rate needs at least two grids".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by_key(|s| s.dofs);
    if sorted.windows(2).any(|w| w[0].dofs == w[1].dofs) {
        return Err(Error::InvalidParameter("grids must have distinct DOF counts".into()));
    }
    let c = sorted[sorted.len() - 2];
    let f = sorted[sorted.len() - 1];
    Ok((
        rate_between(c.rel_l2, f.rel_l2, c.dofs, f.dofs),
        rate_between(c.rel_h1, f.rel_h1, c.dofs, f.dofs),
    ))
}

impl ConvergenceTable {
    pub fn new(time: f64, mut samples: Vec<ErrorSample>) -> Result<Self> {
        let (rate_l2, rate_h1) = convergence_rate(&samples)?;
        samples.sort_by_key(|s| s.dofs);
        Ok(ConvergenceTable {
            time,
            samples,
            rate_l2,
            rate_h1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sin_field() -> FnField<impl Fn(f64) -> (f64, f64)> {
        FnField(|x: f64| ((PI * x).sin(), PI * (PI * x).cos()))
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let (l2, h1) = relative_errors(&sin_field(), &sin_field(), (0.0, 1.0), &Default::default()).unwrap();
        assert_eq!((l2, h1), (0.0, 0.0));
    }

    #[test]
    fn zero_approximation_has_unit_error() {
        let zero = FnField(|_| (0.0, 0.0));
        let (l2, h1) = relative_errors(&zero, &sin_field(), (0.0, 1.0), &Default::default()).unwrap();
        assert!((l2 - 1.0).abs() < 1e-14 && (h1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let zero = FnField(|_| (0.0, 0.0));
        assert!(matches!(
            relative_errors(&sin_field(), &zero, (0.0, 1.0), &Default::default()),
            Err(Error::ZeroReferenceNorm)
        ));
    }

    #[test]
    fn seminorm_switch() {
        let shifted = FnField(|x: f64| ((PI * x).sin() + 0.1, PI * (PI * x).cos()));
        let opts = ErrorOptions { h1_seminorm: true, ..Default::default() };
        let (_, h1) = relative_errors(&shifted, &sin_field(), (0.0, 1.0), &opts).unwrap();
        assert_eq!(h1, 0.0);
    }

    #[test]
    fn rates() {
        let s = |dofs, e| ErrorSample { time: 0.0, rel_l2: e, rel_h1: e, dofs };
        let (l2, _) = convergence_rate(&[s(100, 1e-2), s(200, 2.5e-3)]).unwrap();
        assert!((l2.unwrap() - 2.0).abs() < 1e-12);
        let (l2, _) = convergence_rate(&[s(50, 1.0), s(200, 0.3), s(100, 0.3)]).unwrap();
        assert_eq!(l2.unwrap(), 0.0);
        let (l2, _) = convergence_rate(&[s(100, 1e-2), s(200, 0.0)]).unwrap();
        assert!(l2.is_none());
        assert!(convergence_rate(&[s(100, 1e-2)]).is_err());
        assert!(convergence_rate(&[s(100, 1e-2), s(100, 1e-3)]).is_err());
    }

    proptest! {
        #[test]
        fn error_scales_linearly(lambda in 0.01f64..10.0, a in 0.1f64..2.0) {
            let reference = FnField(move |x: f64| ((PI * x).sin() + 1.0, PI * (PI * x).cos()));
            let pert = |l: f64| FnField(move |x: f64| {
                ((PI * x).sin() + 1.0 + l * a * x * x, PI * (PI * x).cos() + l * 2.0 * a * x)
            });
            let opts = ErrorOptions { subintervals: 50, ..Default::default() };
            let (l2_1, h1_1) = relative_errors(&pert(1.0), &reference, (0.0, 1.0), &opts).unwrap();
            let (l2_l, h1_l) = relative_errors(&pert(lambda), &reference, (0.0, 1.0), &opts).unwrap();
            prop_assert!((l2_l - lambda * l2_1).abs() <= 1e-12 * l2_l.max(1e-300));
            prop_assert!((h1_l - lambda * h1_1).abs() <= 1e-12 * h1_l.max(1e-300));
        }

        #[test]
        fn h1_numerator_dominates_l2(a in -2.0f64..2.0, k in 1.0f64..6.0) {
            let reference = FnField(|x: f64| ((PI * x).sin(), PI * (PI * x).cos()));
            let approx = FnField(move |x: f64| ((PI * x).sin() + a * (k * x).sin(), PI * (PI * x).cos() + a * k * (k * x).cos()));
            let opts = ErrorOptions { subintervals: 50, ..Default::default() };
            let (l2, h1) = relative_errors(&approx, &reference, (0.0, 1.0), &opts).unwrap();
            // compare absolute numerators
            let r_l2: f64 = 0.5;
            let r_h1: f64 = 0.5 + PI * PI / 2.0;
            prop_assert!(h1 * r_h1.sqrt() >= l2 * r_l2.sqrt() * (1.0 - 1e-9));
        }
    }
}
