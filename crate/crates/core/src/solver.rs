//! Linear solves, Newton iteration and the Crank–Nicolson time loop.
//!
//! Each time step solves
//!
//! ```text
//! R(c) = (2/Δt) M c + A(c) c + K c + M_D c − rhs(cⁿ) = 0
//! rhs(cⁿ) = (2/Δt) M cⁿ − (A(cⁿ) + K) cⁿ + f_N(tⁿ) + f_N(tⁿ⁺¹) + f_D
//! ```
//!
//! by Newton's method with Jacobian `(2/Δt) M + A(c) + Ã(c) + K + M_D`.
//! Every linear system goes through [`linear_solve`]: symmetric diagonal
//! scaling, a perturbed factorization `A + ε₁ I`, and iterative refinement
//! until the energy ratio `|eᵀAe / cᵀAc|` drops to `ε₂`.

use serde::{Deserialize, Serialize};

use crate::assembly::{CoeffVector, Discretization};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, SystemMatrix};
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearSolveConfig {
    /// Diagonal perturbation of the scaled matrix.
    pub eps1: f64,
    /// Energy-ratio convergence criterion.
    pub eps2: f64,
    pub max_refinements: usize,
}

impl Default for LinearSolveConfig {
    fn default() -> Self {
        LinearSolveConfig {
            eps1: 1e-10,
            eps2: 1e-10,
            max_refinements: 50,
        }
    }
}

/// Diagnostics of one [`linear_solve`] call.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LinearSolveReport {
    pub refinements: usize,
    pub ratio: f64,
}

/// Solves `A x = b` by scaled, perturbed, iteratively refined LU.
pub fn linear_solve(a_raw: &SystemMatrix, b_raw: &[f64], cfg: &LinearSolveConfig) -> Result<CoeffVector> {
    linear_solve_with_report(a_raw, b_raw, cfg).map(|(x, _)| x)
}

/// [`linear_solve`] that also returns refinement diagnostics.
pub fn linear_solve_with_report(
    a_raw: &SystemMatrix,
    b_raw: &[f64],
    cfg: &LinearSolveConfig,
) -> Result<(CoeffVector, LinearSolveReport)> {
    let n = a_raw.dim();
    if b_raw.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b_raw.len(),
        });
    }
    let mut t = Vec::with_capacity(n);
    for (row, d) in a_raw.diagonal().into_iter().enumerate() {
        if d == 0.0 || !d.is_finite() {
            return Err(Error::ZeroDiagonal { row });
        }
        t.push(1.0 / d.abs().sqrt());
    }
    let mut a = a_raw.clone();
    a.scale_symmetric(&t);
    let b: Vec<f64> = b_raw.iter().zip(&t).map(|(v, s)| v * s).collect();

    let mut a_eps = a.clone();
    for i in 0..n {
        a_eps.add(i, i, cfg.eps1);
    }
    let lu = a_eps.factor()?;

    let mut c = lu.solve(&b);
    let residual = |c: &[f64]| -> Vec<f64> { a.matvec(c).iter().zip(&b).map(|(ac, bi)| bi - ac).collect() };
    let mut e = lu.solve(&residual(&c));
    let mut refinements = 0;
    loop {
        let cac = dot(&c, &a.matvec(&c));
        let eae = dot(&e, &a.matvec(&e));
        let ratio = if cac == 0.0 {
            if eae == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (eae / cac).abs()
        };
        if ratio <= cfg.eps2 {
            // fold in the last correction; it is already computed
            let x: Vec<f64> = c.iter().zip(&e).zip(&t).map(|((ci, ei), ti)| ti * (ci + ei)).collect();
            return Ok((x, LinearSolveReport { refinements, ratio }));
        }
        if refinements >= cfg.max_refinements {
            let last: Vec<f64> = c.iter().zip(&t).map(|(ci, ti)| ti * ci).collect();
            return Err(Error::RefinementNotConverged {
                iterations: refinements,
                ratio,
                last_iterate: last,
            });
        }
        for (ci, ei) in c.iter_mut().zip(&e) {
            *ci += ei;
        }
        e = lu.solve(&residual(&c));
        refinements += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    /// Bound on `‖ε‖₂ / max(‖c‖₂, 1)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Take exactly one linearization about `cⁿ` per step and accept it.
    pub single_linearization: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iters: 25,
            single_linearization: false,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "Newton tolerance must be positive and max_iters at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::InvalidParameter("dt and t_end must be positive".into()));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-12 * self.t_end.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} does not divide t_end = {}",
                self.dt, self.t_end
            )));
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end + 1e-12).contains(&t) {
                return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, {}]", self.t_end)));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Step index of a requested time: the nearest step.
    pub fn step_of(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }
}

/// Global settings shared by every simulation of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub newton: NewtonConfig,
    pub linear: LinearSolveConfig,
    /// `β = beta_scale · max diag((2/Δt) M + K)`.
    pub beta_scale: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            newton: NewtonConfig::default(),
            linear: LinearSolveConfig::default(),
            beta_scale: 1e8,
        }
    }
}

/// Time-independent pieces of the Crank–Nicolson system for one step size.
#[derive(Debug, Clone)]
pub struct CrankNicolsonSystem {
    /// `(2/Δt) M`
    mass_scaled: SystemMatrix,
    stiffness: SystemMatrix,
    /// `(2/Δt) M + K + M_D`
    constant: SystemMatrix,
    /// `f_N(tⁿ) + f_N(tⁿ⁺¹) + f_D`
    loads: Vec<f64>,
    beta: f64,
}

impl CrankNicolsonSystem {
    pub fn new(disc: &Discretization, problem: &Problem, dt: f64, beta_scale: f64) -> Result<Self> {
        problem.validate()?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let mut mass_scaled = disc.assemble_mass();
        mass_scaled.scale(2.0 / dt);
        let stiffness = disc.assemble_stiffness(problem.nu)?;
        let mut base = mass_scaled.clone();
        base.add_scaled(1.0, &stiffness);
        let beta = beta_scale * base.diagonal().into_iter().fold(0.0, f64::max);
        let (penalty, f_d) = disc.assemble_boundary_penalty(&problem.dirichlet, beta)?;
        let f_n = disc.assemble_neumann(&problem.neumann, &problem.dirichlet, problem.nu)?;
        let mut constant = base;
        constant.add_scaled(1.0, &penalty);
        // boundary data are constant in time, so f_N(tⁿ) = f_N(tⁿ⁺¹)
        let loads = f_n.iter().zip(&f_d).map(|(n, d)| 2.0 * n + d).collect();
        Ok(CrankNicolsonSystem {
            mass_scaled,
            stiffness,
            constant,
            loads,
            beta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Right-hand side built from the previous state.
    pub fn rhs(&self, disc: &Discretization, c_prev: &[f64]) -> Result<Vec<f64>> {
        let mc = self.mass_scaled.matvec(c_prev);
        let kc = self.stiffness.matvec(c_prev);
        let ac = disc.advection_action(c_prev)?;
        Ok((0..c_prev.len())
            .map(|i| mc[i] - kc[i] - ac[i] + self.loads[i])
            .collect())
    }

    pub fn residual(&self, disc: &Discretization, c: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let cc = self.constant.matvec(c);
        let ac = disc.advection_action(c)?;
        Ok((0..c.len()).map(|i| cc[i] + ac[i] - rhs[i]).collect())
    }

    pub fn jacobian(&self, disc: &Discretization, c: &[f64]) -> Result<SystemMatrix> {
        let (a, t) = disc.assemble_advection_pair(c)?;
        let mut j = self.constant.clone();
        j.add_scaled(1.0, &a);
        j.add_scaled(1.0, &t);
        Ok(j)
    }
}

/// Result of one Newton-solved step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub coefficients: CoeffVector,
    pub iterations: usize,
    pub last_correction: f64,
    pub max_refinements: usize,
}

/// Advances `c_prev` by one Crank–Nicolson step.
pub fn newton_solve_timestep(
    disc: &Discretization,
    system: &CrankNicolsonSystem,
    c_prev: &[f64],
    newton: &NewtonConfig,
    linear: &LinearSolveConfig,
) -> Result<StepOutcome> {
    newton.validate()?;
    let rhs = system.rhs(disc, c_prev)?;
    let mut c = c_prev.to_vec();
    let mut max_refinements = 0;
    let mut last = f64::INFINITY;
    let max_iters = if newton.single_linearization { 1 } else { newton.max_iters };
    for it in 1..=max_iters {
        let r = system.residual(disc, &c, &rhs)?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let jac = system.jacobian(disc, &c)?;
        let (eps, report) = linear_solve_with_report(&jac, &neg, linear)?;
        max_refinements = max_refinements.max(report.refinements);
        for (ci, ei) in c.iter_mut().zip(&eps) {
            *ci += ei;
        }
        last = norm2(&eps) / norm2(&c).max(1.0);
        if !last.is_finite() {
            break;
        }
        if newton.single_linearization || last <= newton.tol {
            return Ok(StepOutcome {
                coefficients: c,
                iterations: it,
                last_correction: last,
                max_refinements,
            });
        }
    }
    Err(Error::NewtonNotConverged {
        iterations: max_iters,
        last_correction: last,
    })
}

/// Coefficient snapshots of a run plus per-step solver statistics.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolutionHistory {
    pub times: Vec<f64>,
    pub coefficients: Vec<CoeffVector>,
    pub newton_iterations: Vec<usize>,
    pub max_refinements: usize,
    pub beta: f64,
}

impl SolutionHistory {
    /// Index of the snapshot closest to `t`, if within half a step.
    pub fn snapshot_at(&self, t: f64, dt: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 0.5 * dt + 1e-12)
    }

    pub fn total_newton_iterations(&self) -> usize {
        self.newton_iterations.iter().sum()
    }

    pub fn max_newton_iterations(&self) -> usize {
        self.newton_iterations.iter().copied().max().unwrap_or(0)
    }
}

/// A failed run: the error and everything recorded before it.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct SimulationFailure {
    pub partial: SolutionHistory,
    #[source]
    pub error: Error,
}

/// Projects the initial condition and marches to `t_end`.
pub fn run_simulation(
    problem: &Problem,
    disc: &Discretization,
    time: &TimeConfig,
    settings: &SolverSettings,
) -> std::result::Result<SolutionHistory, SimulationFailure> {
    let fail = |partial: SolutionHistory, error: Error| SimulationFailure { partial, error };
    let setup = (|| -> Result<_> {
        time.validate()?;
        settings.newton.validate()?;
        let system = CrankNicolsonSystem::new(disc, problem, time.dt, settings.beta_scale)?;
        let c0 = crate::assembly::project_initial_condition(
            disc,
            |x| problem.initial.value(x),
            Some((&problem.dirichlet, system.beta())),
            &settings.linear,
        )?;
        Ok((system, c0))
    })();
    let (system, c0) = match setup {
        Ok(v) => v,
        Err(e) => return Err(fail(SolutionHistory::default(), e)),
    };

    let steps = time.steps();
    let mut snap_steps: Vec<usize> = time.snapshot_times.iter().map(|&t| time.step_of(t)).collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let mut history = SolutionHistory {
        beta: system.beta(),
        ..Default::default()
    };
    let mut next = 0;
    let mut record = |h: &mut SolutionHistory, step: usize, c: &[f64]| {
        while next < snap_steps.len() && snap_steps[next] == step {
            h.times.push(step as f64 * time.dt);
            h.coefficients.push(c.to_vec());
            next += 1;
        }
    };
    record(&mut history, 0, &c0);

    let mut c = c0;
    for step in 1..=steps {
        match newton_solve_timestep(disc, &system, &c, &settings.newton, &settings.linear) {
            Ok(out) => {
                history.newton_iterations.push(out.iterations);
                history.max_refinements = history.max_refinements.max(out.max_refinements);
                c = out.coefficients;
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(fail(
                        history,
                        Error::StepFailed {
                            step,
                            source: Box::new(Error::InvalidParameter("non-finite coefficients".into())),
                        },
                    ));
                }
                record(&mut history, step, &c);
            }
            Err(e) => {
                return Err(fail(
                    history,
                    Error::StepFailed {
                        step,
                        source: Box::new(e),
                    },
                ))
            }
        }
    }
    Ok(history)
}

/// `u_h(x)` at snapshot `snapshot`.
pub fn evaluate_solution(history: &SolutionHistory, disc: &Discretization, x: f64, snapshot: usize) -> Result<f64> {
    disc.evaluate(coeffs(history, snapshot)?, x).map(|(u, _)| u)
}

/// `u_h'(x)` at snapshot `snapshot`.
pub fn evaluate_solution_derivative(
    history: &SolutionHistory,
    disc: &Discretization,
    x: f64,
    snapshot: usize,
) -> Result<f64> {
    disc.evaluate(coeffs(history, snapshot)?, x).map(|(_, du)| du)
}

fn coeffs(history: &SolutionHistory, snapshot: usize) -> Result<&[f64]> {
    history
        .coefficients
        .get(snapshot)
        .map(|c| c.as_slice())
        .ok_or(Error::MissingSnapshot(snapshot as f64))
}
