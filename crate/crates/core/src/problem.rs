//! Burgers problem data: viscosity, initial profile and boundary conditions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial profiles used by the studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `sin(π x)`
    SinPi,
    /// `cos(π x)`
    CosPi,
    /// Piecewise-linear ramp from `b + 1` down to `b − 1` over `(1/2, 3/2)`.
    Riemann { b: f64 },
    Constant { value: f64 },
}

impl InitialCondition {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::SinPi => (PI * x).sin(),
            InitialCondition::CosPi => (PI * x).cos(),
            InitialCondition::Riemann { b } => crate::reference::riemann_ic(b, x),
            InitialCondition::Constant { value } => value,
        }
    }

    /// Exact slope; the ramp takes its interior slope at the kinks.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::SinPi => PI * (PI * x).cos(),
            InitialCondition::CosPi => -PI * (PI * x).sin(),
            InitialCondition::Riemann { .. } => {
                if (0.5..=1.5).contains(&x) {
                    -2.0
                } else {
                    0.0
                }
            }
            InitialCondition::Constant { .. } => 0.0,
        }
    }

    /// `max |u_IC|` over `[lo, hi]`, sampled.
    pub fn max_abs(&self, lo: f64, hi: f64) -> f64 {
        let n = 10_000;
        (0..=n)
            .map(|k| self.value(lo + (hi - lo) * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// A prescribed value (Dirichlet) or slope (Neumann) at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValue {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub nu: f64,
    pub domain: (f64, f64),
    pub initial: InitialCondition,
    #[serde(default)]
    pub dirichlet: Vec<BoundaryValue>,
    #[serde(default)]
    pub neumann: Vec<BoundaryValue>,
}

impl Problem {
    /// `u_IC = sin(πx)` on `[0, 1]` with homogeneous Dirichlet data at both ends.
    pub fn boundary_layer(nu: f64) -> Self {
        Problem {
            nu,
            domain: (0.0, 1.0),
            initial: InitialCondition::SinPi,
            dirichlet: vec![BoundaryValue { x: 0.0, value: 0.0 }, BoundaryValue { x: 1.0, value: 0.0 }],
            neumann: vec![],
        }
    }

    /// `u_IC = cos(πx)` on `[0, 1]` with `u(0) = 1`, `u(1) = −1`.
    pub fn shock_formation(nu: f64) -> Self {
        Problem {
            nu,
            domain: (0.0, 1.0),
            initial: InitialCondition::CosPi,
            dirichlet: vec![BoundaryValue { x: 0.0, value: 1.0 }, BoundaryValue { x: 1.0, value: -1.0 }],
            neumann: vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("domain must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidParameter(format!("viscosity must be >= 0, got {}", self.nu)));
        }
        let tol = 1e-12 * (hi - lo);
        let on_boundary = |x: f64| (x - lo).abs() <= tol || (x - hi).abs() <= tol;
        for b in self.dirichlet.iter().chain(&self.neumann) {
            if !on_boundary(b.x) {
                return Err(Error::InvalidParameter(format!("boundary point x = {} is not on the domain boundary", b.x)));
            }
        }
        for d in &self.dirichlet {
            if self.neumann.iter().any(|n| (n.x - d.x).abs() <= tol) {
                return Err(Error::BoundaryConflict(format!(
                    "x = {} is both Dirichlet and Neumann; Γ_D ∩ Γ_N must be empty",
                    d.x
                )));
            }
        }
        Ok(())
    }

    /// Outward normal at boundary point `x`.
    pub fn outward_normal(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain;
        if (x - lo).abs() < (x - hi).abs() {
            -1.0
        } else {
            1.0
        }
    }
}
