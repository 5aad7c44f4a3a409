//! Built-in studies at desk scale.

use std::f64::consts::PI;

use super::config::{
    EnrichmentSpec, ProblemKind, ProblemSpec, ReferenceSpec, RiemannConfig, StudyConfig, Thickness, ThicknessName,
    VariantSpec,
};
use crate::analysis::ErrorOptions;
use crate::enrichment::EnrichmentOptions;
use crate::solver::SolverSettings;

/// A registry entry.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinStudy {
    Simulation(StudyConfig),
    Riemann(RiemannConfig),
}

impl BuiltinStudy {
    pub fn name(&self) -> &str {
        match self {
            BuiltinStudy::Simulation(c) => &c.name,
            BuiltinStudy::Riemann(c) => &c.name,
        }
    }

    pub fn description(&self) -> &str {
        match self {
            BuiltinStudy::Simulation(c) => &c.description,
            BuiltinStudy::Riemann(c) => &c.description,
        }
    }
}

const DESK_GRIDS: [usize; 4] = [11, 23, 47, 95];

fn example1_times() -> Vec<f64> {
    vec![0.0, 0.25, 1.0 / PI, 0.5, 0.75, 1.0]
}

fn example2_times() -> Vec<f64> {
    vec![0.0, 0.25, 0.3, 0.35, 0.5, 0.75]
}

fn base(name: &str, description: &str, kind: ProblemKind, nu: Vec<f64>, t_end: f64, times: Vec<f64>) -> StudyConfig {
    StudyConfig {
        name: name.into(),
        description: description.into(),
        problem: ProblemSpec::preset(kind),
        nu,
        grids: DESK_GRIDS.to_vec(),
        dt: 1e-3,
        t_end,
        snapshot_times: times,
        series_interval: Some(0.01),
        variants: vec![VariantSpec::fem()],
        reference: ReferenceSpec::default(),
        solver: SolverSettings::default(),
        quadrature_points: None,
        enrichment_options: EnrichmentOptions::default(),
        error: ErrorOptions::default(),
        plot_points_per_element: 10,
    }
}

pub fn exponential_variant() -> VariantSpec {
    VariantSpec {
        label: "exp".into(),
        enrichments: vec![EnrichmentSpec::Exponential {
            rate: None,
            local: (0.8, 1.0),
        }],
    }
}

pub fn heaviside_variant() -> VariantSpec {
    VariantSpec {
        label: "disc".into(),
        enrichments: vec![EnrichmentSpec::HeavisideBoundary { at: 1.0 }],
    }
}

fn tanh(thickness: Thickness) -> EnrichmentSpec {
    EnrichmentSpec::TanhShock { center: 0.5, thickness }
}

pub fn steady_variant() -> VariantSpec {
    VariantSpec {
        label: "ss".into(),
        enrichments: vec![tanh(Thickness::Named(ThicknessName::Nu))],
    }
}

/// Steady-state enrichment plus tanh shocks of the given thicknesses.
pub fn rho_variant(label: &str, rhos: &[f64]) -> VariantSpec {
    let mut v = steady_variant();
    v.label = label.into();
    v.enrichments.extend(rhos.iter().map(|&r| tanh(Thickness::Value(r))));
    v
}

pub fn builtin_studies() -> Vec<BuiltinStudy> {
    let e1_nus = vec![0.1, 0.02, 0.01, 0.0];
    let e2_nus = vec![0.02, 0.01, 0.002, 0.001];
    let mut exp = base(
        "example1-exp-gfem",
        "boundary layer, ν = 1/100: linear FEM against exponential-enriched GFEM on [0.8, 1]",
        ProblemKind::BoundaryLayer,
        vec![0.01],
        1.0,
        example1_times(),
    );
    exp.variants.push(exponential_variant());
    let mut disc = base(
        "example1-disc-gfem",
        "boundary layer, ν = 0: linear FEM against Heaviside-enriched GFEM at x = 1",
        ProblemKind::BoundaryLayer,
        vec![0.0],
        1.0,
        example1_times(),
    );
    disc.variants.push(heaviside_variant());
    let mut ss = base(
        "example2-ss-gfem",
        "shock formation: linear FEM against steady-state tanh enrichment",
        ProblemKind::ShockFormation,
        e2_nus.clone(),
        0.75,
        example2_times(),
    );
    ss.variants.push(steady_variant());
    let mut rho = base(
        "example2-ss-rho",
        "shock formation, ν = 1/500: steady-state enrichment with extra shock thicknesses ρ",
        ProblemKind::ShockFormation,
        vec![0.002],
        0.75,
        example2_times(),
    );
    rho.variants = vec![
        steady_variant(),
        rho_variant("ss+rho50", &[1.0 / 50.0]),
        rho_variant("ss+rho100", &[1.0 / 100.0]),
        rho_variant("ss+rho200", &[1.0 / 200.0]),
        rho_variant("ss+rho-all", &[1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0]),
    ];
    vec![
        BuiltinStudy::Simulation(base(
            "example1-fem",
            "boundary layer u_IC = sin(πx): linear FEM for ν ∈ {1/10, 1/50, 1/100, 0}",
            ProblemKind::BoundaryLayer,
            e1_nus,
            1.0,
            example1_times(),
        )),
        BuiltinStudy::Simulation(exp),
        BuiltinStudy::Simulation(disc),
        BuiltinStudy::Simulation(base(
            "example2-fem",
            "shock formation u_IC = cos(πx): linear FEM for ν ∈ {1/50, 1/100, 1/500, 1/1000}",
            ProblemKind::ShockFormation,
            e2_nus,
            0.75,
            example2_times(),
        )),
        BuiltinStudy::Simulation(ss),
        BuiltinStudy::Simulation(rho),
        BuiltinStudy::Riemann(riemann_gallery()),
    ]
}

pub fn riemann_gallery() -> RiemannConfig {
    RiemannConfig {
        name: "riemann-gallery".into(),
        description: "inviscid ramp problems for b ∈ {−1.25, −1, 0, 0.5, 1, 1.25} by characteristics".into(),
        b: vec![-1.25, -1.0, 0.0, 0.5, 1.0, 1.25],
        domain: (0.0, 2.0),
        times: vec![0.0, 0.25, 0.45, 0.75, 1.0],
        points: 401,
    }
}

pub fn find_study(name: &str) -> Option<BuiltinStudy> {
    builtin_studies().into_iter().find(|s| s.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_contents() {
        let names: Vec<String> = builtin_studies().iter().map(|s| s.name().to_string()).collect();
        assert_eq!(
            names,
            [
                "example1-fem",
                "example1-exp-gfem",
                "example1-disc-gfem",
                "example2-fem",
                "example2-ss-gfem",
                "example2-ss-rho",
                "riemann-gallery"
            ]
        );
    }

    #[test]
    fn builtins_validate() {
        for s in builtin_studies() {
            match s {
                BuiltinStudy::Simulation(c) => {
                    c.validate().unwrap();
                    c.clone().paper_fidelity().validate().unwrap();
                }
                BuiltinStudy::Riemann(c) => c.validate().unwrap(),
            }
        }
    }
}
