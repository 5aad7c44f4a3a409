//! Reference solutions: Hopf–Cole Fourier series, inviscid characteristics,
//! the steady shock profile and fine-grid FEM runs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::Discretization;
use crate::enrichment::build_dof_map;
use crate::error::{Error, Result};
use crate::mesh::build_uniform_mesh;
use crate::problem::{InitialCondition, Problem};
use crate::quadrature::{auto_points, gauss_rule};
use crate::solver::{run_simulation, SolutionHistory, SolverSettings, TimeConfig};

/// Ramp initial condition: `b + 1` left of 1/2, `b − 1` right of 3/2.
pub fn riemann_ic(b: f64, x: f64) -> f64 {
    if x <= 0.5 {
        b + 1.0
    } else if x >= 1.5 {
        b - 1.0
    } else {
        b + 2.0 * (1.0 - x)
    }
}

/// `−1 / min u'` over `[lo, hi]` sampled at `samples + 1` points, or `None` if
/// the profile never decreases.
pub fn breaking_time(slope: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Option<f64> {
    let n = samples.max(1);
    let min = (0..=n)
        .map(|k| slope(lo + (hi - lo) * k as f64 / n as f64))
        .fold(f64::INFINITY, f64::min);
    (min < 0.0).then(|| -1.0 / min)
}

/// Central-difference slope of `u` with step `h`.
pub fn numerical_slope(u: impl Fn(f64) -> f64, h: f64) -> impl Fn(f64) -> f64 {
    move |x| (u(x + h) - u(x - h)) / (2.0 * h)
}

/// `2ν / max|u_IC|`, the coarsest grid spacing free of Péclet oscillations.
pub fn stability_h_limit(nu: f64, max_abs_ic: f64) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("viscosity must be >= 0, got {nu}")));
    }
    if !(max_abs_ic > 0.0) {
        return Err(Error::InvalidParameter("initial condition is identically zero".into()));
    }
    Ok(2.0 * nu / max_abs_ic)
}

fn steady_k_residual(nu: f64, k: f64) -> f64 {
    (2.0 * k).sqrt() * (k / (8.0 * nu * nu)).sqrt().tanh() - 1.0
}

/// Solves `√(2k) tanh √(k / 8ν²) = 1` for `k`.
pub fn solve_steady_k(nu: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!("steady shock needs ν > 0, got {nu}")));
    }
    let g = |k: f64| steady_k_residual(nu, k);
    let dg = |k: f64| {
        let s = (k / (8.0 * nu * nu)).sqrt();
        let th = s.tanh();
        let sech2 = 1.0 - th * th;
        th / (2.0 * k).sqrt() + (2.0 * k).sqrt() * sech2 * s / (2.0 * k)
    };
    let mut lo = 1e-6;
    let mut hi = 2.0;
    let mut grow = 0;
    while g(lo) * g(hi) > 0.0 {
        if grow == 60 {
            return Err(Error::RootNotFound(format!("no bracket for the steady-state constant at ν = {nu}")));
        }
        if g(hi) < 0.0 {
            hi *= 2.0;
        } else {
            lo *= 0.5;
        }
        grow += 1;
    }
    let mut k = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = g(k);
        if r.abs() <= 1e-15 {
            break;
        }
        if r < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let step = k - r / dg(k);
        k = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(k)
}

/// Steady viscous shock centred at `x = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyShock {
    pub nu: f64,
    pub k: f64,
}

impl SteadyShock {
    pub fn new(nu: f64) -> Result<Self> {
        Ok(SteadyShock { nu, k: solve_steady_k(nu)? })
    }

    fn scale(&self) -> f64 {
        (self.k / (2.0 * self.nu * self.nu)).sqrt()
    }

    pub fn value(&self, x: f64) -> f64 {
        (2.0 * self.k).sqrt() * (self.scale() * (0.5 - x)).tanh()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let th = (self.scale() * (0.5 - x)).tanh();
        -(2.0 * self.k).sqrt() * self.scale() * (1.0 - th * th)
    }
}

/// `u_ss(x)` for viscosity `nu`.
pub fn steady_state_shock(nu: f64, x: f64) -> Result<f64> {
    SteadyShock::new(nu).map(|s| s.value(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FourierParams {
    pub nu: f64,
    pub max_terms: usize,
    /// Relative size below which a term counts as negligible.
    pub term_tol: f64,
    /// Gauss points per panel of the coefficient quadrature.
    pub coeff_quad_points: usize,
    /// Largest accepted relative round-off in the denominator sum.
    pub max_cancellation: f64,
}

impl Default for FourierParams {
    fn default() -> Self {
        FourierParams {
            nu: 0.01,
            max_terms: 10_000,
            term_tol: 1e-14,
            coeff_quad_points: 20,
            max_cancellation: 1e-9,
        }
    }
}

/// Hopf–Cole series solution for `u_IC = sin(πx)` on `[0, 1]` with zero
/// boundary values.
#[derive(Debug, Clone)]
pub struct FourierSolution {
    params: FourierParams,
    /// `a_0, a_1, …`
    coeffs: Vec<f64>,
    panels: usize,
}

impl FourierSolution {
    pub fn new(params: FourierParams) -> Result<Self> {
        let nu = params.nu;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "the Fourier series is undefined for ν = {nu}; it needs ν > 0"
            )));
        }
        if params.max_terms == 0 || !(params.term_tol > 0.0) {
            return Err(Error::InvalidParameter("max_terms and term_tol must be positive".into()));
        }
        let rule = gauss_rule(params.coeff_quad_points)?;
        let mut panels = 10;
        let mut coeffs = fourier_coefficients(nu, &rule, panels, params.max_terms);
        loop {
            if panels > 1 << 16 {
                return Err(Error::InvalidParameter(
                    "Fourier coefficient quadrature did not settle".into(),
                ));
            }
            let finer = fourier_coefficients(nu, &rule, 2 * panels, params.max_terms);
            let n = coeffs.len().max(finer.len());
            let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
            let diff = (0..n).map(|i| (get(&coeffs, i) - get(&finer, i)).abs()).fold(0.0, f64::max);
            panels *= 2;
            coeffs = finer;
            if diff <= 1e-13 * coeffs[0] {
                break;
            }
        }
        Ok(FourierSolution { params, coeffs, panels })
    }

    pub fn params(&self) -> &FourierParams {
        &self.params
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of quadrature panels the coefficients settled on.
    pub fn panels(&self) -> usize {
        self.panels
    }

    /// `(u, u_x)` at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
        }
        let nu = self.params.nu;
        let tol = self.params.term_tol;
        let (mut num, mut den, mut dnum, mut dden) = (0.0, self.coeffs[0], 0.0, 0.0);
        let (mut s_num, mut s_den, mut s_dnum, mut s_dden) = (0.0, self.coeffs[0].abs(), 0.0, 0.0);
        let mut small = 0;
        let mut converged = false;
        for (n, &a) in self.coeffs.iter().enumerate().skip(1) {
            let nf = n as f64;
            let e = a * (-nf * nf * PI * PI * nu * t).exp();
            let (s, c) = (nf * PI * x).sin_cos();
            let terms = [e * nf * s, e * c, e * nf * nf * PI * c, -e * nf * PI * s];
            num += terms[0];
            den += terms[1];
            dnum += terms[2];
            dden += terms[3];
            s_num += terms[0].abs();
            s_den += terms[1].abs();
            s_dnum += terms[2].abs();
            s_dden += terms[3].abs();
            let negligible = terms[0].abs() <= tol * s_num
                && terms[1].abs() <= tol * s_den
                && terms[2].abs() <= tol * s_dnum
                && terms[3].abs() <= tol * s_dden;
            small = if negligible { small + 1 } else { 0 };
            if small == 3 {
                converged = true;
                break;
            }
        }
        if !converged && self.coeffs.len() >= self.params.max_terms {
            return Err(Error::SeriesNotConverged {
                terms: self.coeffs.len(),
                x,
                t,
            });
        }
        // coefficients carry round-off of about 1e-15 a_0
        let precision = 1e-15 * s_den / den.abs();
        if precision > self.params.max_cancellation {
            return Err(Error::SeriesIllConditioned { x, t, precision });
        }
        let u = 2.0 * PI * nu * num / den;
        let du = 2.0 * PI * nu * (dnum * den - num * dden) / (den * den);
        Ok((u, du))
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.eval(x, t).map(|(u, _)| u)
    }
}

/// `a_0, a_1, …` by composite Gauss quadrature, stopping once three
/// consecutive coefficients reach the round-off floor `1e-15 a_0` or at
/// `max_terms`.
fn fourier_coefficients(nu: f64, rule: &crate::quadrature::QuadRule, panels: usize, max_terms: usize) -> Vec<f64> {
    let z = 1.0 / (2.0 * PI * nu);
    let h = 1.0 / panels as f64;
    let mut pts = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in rule.mapped(a, a + h) {
            pts.push((x, w * (-z * (1.0 - (PI * x).cos())).exp()));
        }
    }
    let a0: f64 = pts.iter().map(|(_, g)| g).sum();
    let mut out = vec![a0];
    let mut small = 0;
    for n in 1..max_terms {
        let nf = n as f64;
        let an = 2.0 * pts.iter().map(|(x, g)| g * (nf * PI * x).cos()).sum::<f64>();
        out.push(an);
        small = if an.abs() <= 1e-15 * a0 { small + 1 } else { 0 };
        if small == 3 {
            break;
        }
    }
    out
}

/// Inviscid solution by characteristics `u = u_IC(x − u t)`.
///
/// After the breaking time only a stationary shock is handled: at the zero
/// crossing `x_b` the left state is the largest root and the right state the
/// smallest; a shock whose states do not cancel moves and is rejected.
#[derive(Debug, Clone)]
pub struct InviscidSolution {
    ic: InitialCondition,
    domain: (f64, f64),
    u_min: f64,
    u_max: f64,
    breaking: Option<f64>,
    shock: Option<f64>,
}

const ROOT_SCAN: usize = 4000;
const BRACKET_PAD: f64 = 1e-9;

impl InviscidSolution {
    pub fn new(ic: InitialCondition, domain: (f64, f64)) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("invalid domain [{lo}, {hi}]")));
        }
        let len = hi - lo;
        let u_min = -extreme_value(|x| -ic.value(x), lo - len, hi + len);
        let u_max = extreme_value(|x| ic.value(x), lo - len, hi + len);
        let breaking = breaking_time(|x| ic.derivative(x), lo, hi, 100_000);
        let shock = find_shock(&ic, lo, hi);
        Ok(InviscidSolution {
            ic,
            domain,
            u_min,
            u_max,
            breaking,
            shock,
        })
    }

    pub fn breaking_time(&self) -> Option<f64> {
        self.breaking
    }

    /// Zero crossing with negative slope, if any.
    pub fn shock_location(&self) -> Option<f64> {
        self.shock
    }

    fn residual(&self, x: f64, t: f64, u: f64) -> f64 {
        u - self.ic.value(x - u * t)
    }

    fn bisect(&self, x: f64, t: f64, mut a: f64, mut b: f64) -> f64 {
        let mut fa = self.residual(x, t, a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.residual(x, t, m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let mut u = 0.5 * (a + b);
        // Newton polish, kept only while it lowers the residual
        for _ in 0..3 {
            let f = self.residual(x, t, u);
            let d = 1.0 + t * self.ic.derivative(x - u * t);
            if d == 0.0 {
                break;
            }
            let next = u - f / d;
            if self.residual(x, t, next).abs() < f.abs() {
                u = next;
            } else {
                break;
            }
        }
        u
    }

    /// Largest (`from_top`) or smallest root of the characteristic equation.
    fn extreme_root(&self, x: f64, t: f64, from_top: bool) -> Result<f64> {
        let a = self.u_min - BRACKET_PAD;
        let b = self.u_max + BRACKET_PAD;
        let at = |k: usize| {
            let s = k as f64 / ROOT_SCAN as f64;
            if from_top {
                b - (b - a) * s
            } else {
                a + (b - a) * s
            }
        };
        let mut prev_u = at(0);
        let mut prev_f = self.residual(x, t, prev_u);
        for k in 1..=ROOT_SCAN {
            let u = at(k);
            let f = self.residual(x, t, u);
            if f == 0.0 {
                return Ok(u);
            }
            if (f < 0.0) != (prev_f < 0.0) {
                let (lo, hi) = if u < prev_u { (u, prev_u) } else { (prev_u, u) };
                return Ok(self.bisect(x, t, lo, hi));
            }
            prev_u = u;
            prev_f = f;
        }
        Err(Error::RootNotFound(format!("no characteristic root at x = {x}, t = {t}")))
    }

    fn check_stationary(&self, t: f64) -> Result<f64> {
        let xb = self.shock.ok_or_else(|| {
            Error::Unsupported("a moving shock forms; only stationary shocks are evaluated past breaking".into())
        })?;
        let left = self.extreme_root(xb, t, true)?;
        let right = self.extreme_root(xb, t, false)?;
        let scale = self.u_max.abs().max(self.u_min.abs()).max(1.0);
        if (left + right).abs() > 1e-8 * scale {
            return Err(Error::Unsupported(format!(
                "shock at x = {xb} has states {left} and {right} and moves; only stationary shocks are evaluated past breaking"
            )));
        }
        Ok(xb)
    }

    /// `u(x, t)`.
    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.eval(x, t).map(|(u, _)| u)
    }

    /// `(u, u_x)`; the slope follows from `u_x = u_IC'(ξ) / (1 + u_IC'(ξ) t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok((self.ic.value(x), self.ic.derivative(x)));
        }
        let u = match self.breaking {
            Some(tb) if t >= tb => {
                let xb = self.check_stationary(t)?;
                let tol = 1e-12 * (self.domain.1 - self.domain.0);
                if (x - xb).abs() <= tol {
                    return Ok((0.0, 0.0));
                }
                self.extreme_root(x, t, x < xb)?
            }
            _ => self.extreme_root(x, t, true)?,
        };
        let s = self.ic.derivative(x - u * t);
        Ok((u, s / (1.0 + s * t)))
    }
}

/// Maximum of `f` on `[a, b]`: a sampled scan refined by golden-section search.
fn extreme_value(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 20_000;
    let x = |k: usize| a + (b - a) * k as f64 / n as f64;
    let (best, mut fmax) = (0..=n)
        .map(|k| (k, f(x(k))))
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let (mut l, mut r) = (x(best.saturating_sub(1)), x((best + 1).min(n)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if r - l <= 1e-15 * (1.0 + l.abs()) {
            break;
        }
        let m1 = r - g * (r - l);
        let m2 = l + g * (r - l);
        let (f1, f2) = (f(m1), f(m2));
        fmax = fmax.max(f1).max(f2);
        if f1 < f2 {
            l = m1;
        } else {
            r = m2;
        }
    }
    fmax
}

fn find_shock(ic: &InitialCondition, lo: f64, hi: f64) -> Option<f64> {
    let n = 20_000;
    let tol = 1e-12;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    for w in 0..n {
        let (a, b) = (xs[w], xs[w + 1]);
        let (fa, fb) = (ic.value(a), ic.value(b));
        if fa.abs() <= tol && ic.derivative(a) < 0.0 {
            return Some(a);
        }
        if fa > tol && fb < -tol {
            let (mut l, mut r) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                if ic.value(m) > 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            return Some(0.5 * (l + r));
        }
    }
    let last = xs[n];
    (ic.value(last).abs() <= tol && ic.derivative(last) < 0.0).then_some(last)
}

/// Plain linear FEM run on a fine grid, sampled at its snapshot times.
#[derive(Debug, Clone)]
pub struct FineFemReference {
    disc: Discretization,
    history: SolutionHistory,
    dt: f64,
    n_elements: usize,
}

impl FineFemReference {
    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn history(&self) -> &SolutionHistory {
        &self.history
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    fn snapshot(&self, t: f64) -> Result<&[f64]> {
        self.history
            .snapshot_at(t, self.dt)
            .map(|i| self.history.coefficients[i].as_slice())
            .ok_or(Error::MissingSnapshot(t))
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        self.disc.evaluate(self.snapshot(t)?, x)
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.eval(x, t).map(|(u, _)| u)
    }
}

/// Runs linear FEM with `n_elements` elements and step `dt`, keeping the
/// snapshots in `time`.
pub fn fine_fem_reference(
    problem: &Problem,
    n_elements: usize,
    time: &TimeConfig,
    settings: &SolverSettings,
) -> Result<FineFemReference> {
    if problem.nu == 0.0 {
        return Err(Error::Unsupported(
            "linear FEM does not converge for ν = 0; use the characteristics reference".into(),
        ));
    }
    let (lo, hi) = problem.domain;
    let mesh = build_uniform_mesh(n_elements, lo, hi)?;
    let dofs = build_dof_map(&mesh, &[], Default::default())?;
    let rule = gauss_rule(auto_points(mesh.h()))?;
    let disc = Discretization::new(mesh, dofs, rule);
    let history = run_simulation(problem, &disc, time, settings).map_err(|f| f.error)?;
    Ok(FineFemReference {
        disc,
        history,
        dt: time.dt,
        n_elements,
    })
}

/// Any of the reference evaluators.
#[derive(Debug, Clone)]
pub enum ReferenceSolution {
    Fourier(FourierSolution),
    Characteristics(InviscidSolution),
    SteadyShock(SteadyShock),
    FineFem(FineFemReference),
}

impl ReferenceSolution {
    pub fn kind(&self) -> &'static str {
        match self {
            ReferenceSolution::Fourier(_) => "fourier",
            ReferenceSolution::Characteristics(_) => "characteristics",
            ReferenceSolution::SteadyShock(_) => "steady-shock",
            ReferenceSolution::FineFem(_) => "fine-fem",
        }
    }

    /// `(u, u_x)` at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        match self {
            ReferenceSolution::Fourier(f) => f.eval(x, t),
            ReferenceSolution::Characteristics(c) => c.eval(x, t),
            ReferenceSolution::SteadyShock(s) => Ok((s.value(x), s.derivative(x))),
            ReferenceSolution::FineFem(f) => f.eval(x, t),
        }
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.eval(x, t).map(|(u, _)| u)
    }

    /// Points where the evaluator's slope may jump at time `t`.
    pub fn breakpoints(&self, t: f64) -> Vec<f64> {
        match self {
            ReferenceSolution::FineFem(f) => f.disc.mesh().nodes().to_vec(),
            ReferenceSolution::Characteristics(c) => match (c.breaking, c.shock) {
                (Some(tb), Some(xb)) if t >= tb => vec![xb],
                _ => vec![],
            },
            _ => vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_profile() {
        assert_eq!(riemann_ic(0.0, 1.0), 0.0);
        assert_eq!(riemann_ic(0.3, 0.5), 1.3);
        assert!((riemann_ic(0.3, 1.5) - (-0.7)).abs() < 1e-15);
        for k in 0..=300 {
            let v = riemann_ic(1.25, -0.5 + k as f64 / 100.0);
            assert!((0.25..=2.25).contains(&v));
        }
    }

    #[test]
    fn breaking_times() {
        let tb = breaking_time(|x| InitialCondition::SinPi.derivative(x), 0.0, 1.0, 1000).unwrap();
        assert!((tb - 1.0 / PI).abs() < 1e-15);
        let tb = breaking_time(|x| InitialCondition::Riemann { b: 0.0 }.derivative(x), 0.0, 2.0, 1000).unwrap();
        assert_eq!(tb, 0.5);
        assert!(breaking_time(|_| 1.0, 0.0, 1.0, 10).is_none());
        let slope = numerical_slope(|x| (PI * x).sin(), 1e-5);
        let tb = breaking_time(slope, 0.0, 1.0, 1000).unwrap();
        assert!((tb - 1.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn steady_constant() {
        let k = solve_steady_k(1e-3).unwrap();
        assert!((k - 0.5).abs() < 1e-6);
        assert!(steady_k_residual(1e-3, k).abs() < 1e-14);
        for nu in [1.0 / 50.0, 1.0 / 100.0, 0.3, 1.0] {
            let k = solve_steady_k(nu).unwrap();
            assert!(steady_k_residual(nu, k).abs() < 1e-13, "{nu}");
            assert_eq!(steady_state_shock(nu, 0.5).unwrap(), 0.0);
        }
        let s = SteadyShock::new(1e-3).unwrap();
        assert!((s.value(0.0) - 1.0).abs() < 1e-12);
        let h = 1e-7;
        let fd = (s.value(0.51 + h) - s.value(0.51 - h)) / (2.0 * h);
        assert!((fd - s.derivative(0.51)).abs() < 1e-5 * fd.abs());
    }

    #[test]
    fn stability_limit() {
        assert_eq!(stability_h_limit(0.01, 1.0).unwrap(), 0.02);
        assert_eq!(stability_h_limit(0.0, 1.0).unwrap(), 0.0);
        assert!(stability_h_limit(0.01, 0.0).is_err());
    }

    #[test]
    fn fourier_boundaries_and_initial_profile() {
        let f = FourierSolution::new(FourierParams { nu: 0.1, ..Default::default() }).unwrap();
        for t in [0.0, 0.1, 0.5, 2.0] {
            assert!(f.value(0.0, t).unwrap().abs() < 1e-15);
            assert!(f.value(1.0, t).unwrap().abs() < 1e-13);
        }
        for x in [0.1, 0.3, 0.5, 0.8] {
            assert!((f.value(x, 0.0).unwrap() - (PI * x).sin()).abs() < 1e-11, "{x}");
        }
        assert!(f.value(0.5, 50.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fourier_slope_matches_difference() {
        let f = FourierSolution::new(FourierParams { nu: 0.05, ..Default::default() }).unwrap();
        let h = 1e-4;
        for x in [0.2, 0.7, 0.95] {
            let (_, du) = f.eval(x, 0.4).unwrap();
            let fd = (f.value(x + h, 0.4).unwrap() - f.value(x - h, 0.4).unwrap()) / (2.0 * h);
            assert!((du - fd).abs() < 1e-4 * du.abs().max(1.0), "{x}: {du} vs {fd}");
        }
    }

    #[test]
    fn fourier_flags_cancellation() {
        let f = FourierSolution::new(FourierParams { nu: 0.01, ..Default::default() }).unwrap();
        assert!(f.value(0.2, 0.0).is_ok());
        assert!(matches!(f.value(0.9, 0.0), Err(Error::SeriesIllConditioned { .. })));
    }

    #[test]
    fn fourier_rejects_inviscid() {
        assert!(FourierSolution::new(FourierParams { nu: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn characteristics_before_breaking() {
        let s = InviscidSolution::new(InitialCondition::SinPi, (0.0, 1.0)).unwrap();
        assert!((s.breaking_time().unwrap() - 1.0 / PI).abs() < 1e-12);
        assert_eq!(s.shock_location(), Some(1.0));
        for &(x, t) in &[(0.25, 0.2), (0.9, 0.3), (0.5, 0.1)] {
            let u = s.value(x, t).unwrap();
            assert!((u - (PI * (x - u * t)).sin()).abs() <= 1e-12);
        }
        assert_eq!(s.value(0.3, 0.0).unwrap(), (PI * 0.3).sin());
    }

    #[test]
    fn characteristics_stationary_shock() {
        let s = InviscidSolution::new(InitialCondition::SinPi, (0.0, 1.0)).unwrap();
        assert_eq!(s.value(1.0, 0.5).unwrap(), 0.0);
        let near = s.value(1.0 - 1e-9, 0.5).unwrap();
        assert!(near > 0.5, "{near}");
        let r = InviscidSolution::new(InitialCondition::Riemann { b: 0.0 }, (0.0, 2.0)).unwrap();
        assert_eq!(r.shock_location(), Some(1.0));
        assert!((r.value(0.9, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((r.value(1.1, 1.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn moving_shock_rejected_after_breaking() {
        let r = InviscidSolution::new(InitialCondition::Riemann { b: 1.25 }, (0.0, 2.0)).unwrap();
        assert!(r.value(1.0, 0.25).is_ok());
        assert!(matches!(r.value(1.0, 0.75), Err(Error::Unsupported(_))));
        let r = InviscidSolution::new(InitialCondition::Riemann { b: 0.5 }, (0.0, 2.0)).unwrap();
        assert!(matches!(r.value(1.0, 0.75), Err(Error::Unsupported(_))));
    }
}
