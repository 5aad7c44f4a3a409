//! Study configuration files (TOML or JSON) and their resolution into
//! solver inputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ErrorOptions;
use crate::enrichment::{local_domain_for_tanh, EnrichmentKind, EnrichmentOptions, EnrichmentRule};
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::problem::{BoundaryValue, InitialCondition, Problem};
use crate::solver::{SolverSettings, TimeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// `sin(πx)` with zero Dirichlet data.
    BoundaryLayer,
    /// `cos(πx)` with `u(0) = 1`, `u(1) = −1`.
    ShockFormation,
    /// Everything taken from the override fields.
    Custom,
}

/// A preset problem with optional overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<Vec<BoundaryValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neumann: Option<Vec<BoundaryValue>>,
}

impl ProblemSpec {
    pub fn preset(kind: ProblemKind) -> Self {
        ProblemSpec {
            kind,
            domain: None,
            initial: None,
            dirichlet: None,
            neumann: None,
        }
    }

    /// The concrete problem for viscosity `nu`.
    pub fn resolve(&self, nu: f64) -> Result<Problem> {
        let mut p = match self.kind {
            ProblemKind::BoundaryLayer => Problem::boundary_layer(nu),
            ProblemKind::ShockFormation => Problem::shock_formation(nu),
            ProblemKind::Custom => {
                let (Some(domain), Some(initial)) = (self.domain, self.initial) else {
                    return Err(Error::Config("a custom problem needs `domain` and `initial`".into()));
                };
                Problem {
                    nu,
                    domain,
                    initial,
                    dirichlet: vec![],
                    neumann: vec![],
                }
            }
        };
        if let Some(d) = self.domain {
            p.domain = d;
        }
        if let Some(ic) = self.initial {
            p.initial = ic;
        }
        if let Some(d) = &self.dirichlet {
            p.dirichlet = d.clone();
        }
        if let Some(n) = &self.neumann {
            p.neumann = n.clone();
        }
        p.validate()?;
        Ok(p)
    }
}

/// Thickness of a tanh enrichment: a number or the string `"nu"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Thickness {
    Value(f64),
    Named(ThicknessName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThicknessName {
    Nu,
}

/// An enrichment as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnrichmentSpec {
    /// `exp(rate · x)` on `local`; the rate defaults to `max|u_IC| / ν`.
    Exponential {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate: Option<f64>,
        local: (f64, f64),
    },
    /// Discontinuous enrichment of the boundary node at `at`.
    HeavisideBoundary { at: f64 },
    /// `tanh((center − x) / (2 thickness))` on the region where it is below
    /// 0.99 in magnitude, padded by one element.
    TanhShock { center: f64, thickness: Thickness },
}

impl EnrichmentSpec {
    pub fn resolve(&self, problem: &Problem, mesh: &Mesh1D) -> Result<EnrichmentRule> {
        match *self {
            EnrichmentSpec::Exponential { rate, local } => {
                let rate = match rate {
                    Some(r) => r,
                    None => {
                        if problem.nu == 0.0 {
                            return Err(Error::Config("automatic exponential rate needs ν > 0".into()));
                        }
                        let (lo, hi) = problem.domain;
                        problem.initial.max_abs(lo, hi) / problem.nu
                    }
                };
                EnrichmentRule::new(EnrichmentKind::Exponential { rate }, local.0, local.1)
            }
            EnrichmentSpec::HeavisideBoundary { at } => {
                let pad = 1e-9 * mesh.length();
                EnrichmentRule::new(EnrichmentKind::HeavisideBoundary, at - pad, at + pad)
            }
            EnrichmentSpec::TanhShock { center, thickness } => {
                let thickness = match thickness {
                    Thickness::Value(v) => v,
                    Thickness::Named(ThicknessName::Nu) => problem.nu,
                };
                let (lo, hi) = local_domain_for_tanh(center, thickness, mesh.h())?;
                EnrichmentRule::new(EnrichmentKind::TanhShock { center, thickness }, lo, hi)
            }
        }
    }
}

/// One enrichment set; an empty set is plain linear FEM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub label: String,
    #[serde(default)]
    pub enrichments: Vec<EnrichmentSpec>,
}

impl VariantSpec {
    pub fn fem() -> Self {
        VariantSpec {
            label: "fem".into(),
            enrichments: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Characteristics for ν = 0; the Fourier series for the boundary-layer
    /// problem when it evaluates cleanly; fine-grid FEM otherwise.
    Auto,
    Fourier,
    Characteristics,
    FineFem,
    SteadyShock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSpec {
    pub kind: ReferenceKind,
    pub fine_elements: usize,
    pub fine_dt: f64,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec {
            kind: ReferenceKind::Auto,
            fine_elements: 1000,
            fine_dt: 1e-3,
        }
    }
}

/// A grid-refinement study of one problem family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub problem: ProblemSpec,
    pub nu: Vec<f64>,
    pub grids: Vec<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Spacing of the error time series; `None` samples only the snapshots.
    #[serde(default)]
    pub series_interval: Option<f64>,
    #[serde(default = "default_variants")]
    pub variants: Vec<VariantSpec>,
    #[serde(default)]
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Fixed Gauss rule size; `None` picks by element size.
    #[serde(default)]
    pub quadrature_points: Option<usize>,
    #[serde(default)]
    pub enrichment_options: EnrichmentOptions,
    #[serde(default)]
    pub error: ErrorOptions,
    /// Solution CSV sampling density.
    #[serde(default = "default_plot_points")]
    pub plot_points_per_element: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_variants() -> Vec<VariantSpec> {
    vec![VariantSpec::fem()]
}

fn default_plot_points() -> usize {
    10
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    /// Full-fidelity settings: 5000-element references with Δt = 1/5000,
    /// the same step in the study, one linearization per step and raw
    /// exponentials.
    pub fn paper_fidelity(mut self) -> Self {
        self.reference.fine_elements = 5000;
        self.reference.fine_dt = 2e-4;
        self.dt = 2e-4;
        self.solver.newton.single_linearization = true;
        self.enrichment_options.scaled_exponential = false;
        self
    }

    pub fn time_config(&self) -> TimeConfig {
        TimeConfig {
            dt: self.dt,
            t_end: self.t_end,
            snapshot_times: self.sample_times(),
        }
    }

    /// Snapshot times plus the error series grid, snapped to the step and
    /// sorted.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut steps: Vec<usize> = self.snapshot_times.iter().map(|&t| (t / self.dt).round() as usize).collect();
        if let Some(iv) = self.series_interval {
            let n = (self.t_end / iv).round() as usize;
            steps.extend((0..=n).map(|k| ((k as f64 * iv).min(self.t_end) / self.dt).round() as usize));
        }
        steps.sort_unstable();
        steps.dedup();
        steps.into_iter().map(|s| s as f64 * self.dt).collect()
    }

    /// Configured snapshot times snapped to the step.
    pub fn snapshot_steps_as_times(&self) -> Vec<f64> {
        let mut steps: Vec<usize> = self.snapshot_times.iter().map(|&t| (t / self.dt).round() as usize).collect();
        steps.sort_unstable();
        steps.dedup();
        steps.into_iter().map(|s| s as f64 * self.dt).collect()
    }

    /// Checks everything that can be checked without running numerics.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("study name is empty".into()));
        }
        if self.nu.is_empty() || self.grids.is_empty() || self.variants.is_empty() {
            return Err(Error::Config("nu, grids and variants must be non-empty".into()));
        }
        if self.grids.contains(&0) {
            return Err(Error::Config("grid sizes must be positive".into()));
        }
        let mut labels: Vec<&str> = self.variants.iter().map(|v| v.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) || labels.iter().any(|l| !valid_label(l)) {
            return Err(Error::Config(
                "variant labels must be unique and use only letters, digits, '-', '_' or '+'".into(),
            ));
        }
        self.time_config().validate()?;
        if let Some(iv) = self.series_interval {
            if !(iv > 0.0) {
                return Err(Error::Config("series_interval must be positive".into()));
            }
        }
        self.solver.newton.validate()?;
        if !(self.solver.beta_scale > 0.0) {
            return Err(Error::Config("beta_scale must be positive".into()));
        }
        if let Some(q) = self.quadrature_points {
            crate::quadrature::gauss_rule(q)?;
        }
        if self.error.subintervals == 0 {
            return Err(Error::Config("error subintervals must be positive".into()));
        }
        crate::quadrature::gauss_rule(self.error.points)?;
        if self.reference.fine_elements == 0 || !(self.reference.fine_dt > 0.0) {
            return Err(Error::Config("fine reference needs elements > 0 and dt > 0".into()));
        }
        TimeConfig {
            dt: self.reference.fine_dt,
            t_end: self.t_end,
            snapshot_times: vec![],
        }
        .validate()
        .map_err(|e| Error::Config(format!("fine reference: {e}")))?;
        for &nu in &self.nu {
            let p = self.problem.resolve(nu)?;
            match self.reference.kind {
                ReferenceKind::Fourier => {
                    if nu == 0.0 {
                        return Err(Error::Config(
                            "the Fourier reference is undefined for ν = 0 (the series needs ν ≠ 0)".into(),
                        ));
                    }
                    if self.problem.kind != ProblemKind::BoundaryLayer || p.initial != InitialCondition::SinPi {
                        return Err(Error::Config("the Fourier reference only covers the boundary-layer problem".into()));
                    }
                }
                ReferenceKind::FineFem | ReferenceKind::SteadyShock if nu == 0.0 => {
                    return Err(Error::Config(format!(
                        "{:?} reference needs ν > 0; use characteristics for ν = 0",
                        self.reference.kind
                    )));
                }
                _ => {}
            }
            for v in &self.variants {
                for e in &v.enrichments {
                    if let EnrichmentSpec::Exponential { rate: None, .. } = e {
                        if nu == 0.0 {
                            return Err(Error::Config(format!(
                                "variant {}: automatic exponential rate needs ν > 0",
                                v.label
                            )));
                        }
                    }
                    if let EnrichmentSpec::TanhShock { thickness: Thickness::Named(_), .. } = e {
                        if nu == 0.0 {
                            return Err(Error::Config(format!("variant {}: tanh thickness ν must be > 0", v.label)));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn valid_label(l: &str) -> bool {
    !l.is_empty() && l.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '+'))
}

/// Inviscid Riemann problems drawn by characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub b: Vec<f64>,
    #[serde(default = "default_riemann_domain")]
    pub domain: (f64, f64),
    pub times: Vec<f64>,
    #[serde(default = "default_riemann_points")]
    pub points: usize,
}

fn default_riemann_domain() -> (f64, f64) {
    (0.0, 2.0)
}

fn default_riemann_points() -> usize {
    401
}

impl RiemannConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b.is_empty() || self.times.is_empty() {
            return Err(Error::Config("b and times must be non-empty".into()));
        }
        if !(self.domain.0 < self.domain.1) || self.points < 2 {
            return Err(Error::Config("riemann domain must satisfy lo < hi with at least 2 points".into()));
        }
        if self.times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::Config("times must be >= 0".into()));
        }
        Ok(())
    }
}
