//! Study execution: references, simulation cells, CSV files and the run
//! manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ProblemKind, ReferenceKind, RiemannConfig, StudyConfig};
use crate::analysis::{error_time_series, ConvergenceTable, ErrorSample};
use crate::assembly::Discretization;
use crate::enrichment::{build_dof_map, EnrichmentRule};
use crate::error::{Error, Result};
use crate::mesh::{build_uniform_mesh, Mesh1D};
use crate::problem::{InitialCondition, Problem};
use crate::quadrature::{auto_points, gauss_rule};
use crate::reference::{
    fine_fem_reference, FourierParams, FourierSolution, InviscidSolution, ReferenceSolution, SteadyShock,
};
use crate::solver::{run_simulation, SolutionHistory, TimeConfig};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads for independent cells; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub paper_fidelity: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRecord {
    pub nu: f64,
    pub kind: Option<String>,
    pub fine_elements: Option<usize>,
    pub fine_dt: Option<f64>,
    pub fourier_terms: Option<usize>,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub nu: f64,
    pub variant: String,
    pub elements: usize,
    pub dofs: usize,
    pub quadrature_points: usize,
    /// Enrichment rules after resolving defaults against the mesh and ν.
    pub enrichments: Vec<EnrichmentRule>,
    pub status: &'static str,
    pub error: Option<String>,
    pub newton_iterations_total: usize,
    pub newton_iterations_max: usize,
    pub max_refinements: usize,
    pub penalty_beta: f64,
    pub warnings: Vec<String>,
    pub wall_seconds: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub study: String,
    pub paper_fidelity: bool,
    pub threads: usize,
    /// The configuration with every default filled in.
    pub config: StudyConfig,
    pub references: Vec<ReferenceRecord>,
    pub cells: Vec<CellRecord>,
    pub convergence_files: Vec<String>,
    pub partial: bool,
    pub wall_seconds: f64,
    pub version: &'static str,
}

/// Errors of one cell, kept for tables and callers.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub nu: f64,
    pub variant: String,
    pub elements: usize,
    pub series: Vec<ErrorSample>,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub manifest: Manifest,
    pub cells: Vec<CellResult>,
    /// `(nu, variant, tables)` at the configured snapshot times.
    pub tables: Vec<(f64, String, Vec<ConvergenceTable>)>,
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Builds the discretization of one cell.
pub fn cell_discretization(
    config: &StudyConfig,
    problem: &Problem,
    variant: usize,
    elements: usize,
) -> Result<Discretization> {
    let (lo, hi) = problem.domain;
    let mesh = build_uniform_mesh(elements, lo, hi)?;
    let rules = resolve_rules(config, problem, variant, &mesh)?;
    let dofs = build_dof_map(&mesh, &rules, config.enrichment_options)?;
    let q = config.quadrature_points.unwrap_or_else(|| auto_points(mesh.h()));
    let rule = gauss_rule(q)?;
    Ok(Discretization::new(mesh, dofs, rule))
}

fn resolve_rules(config: &StudyConfig, problem: &Problem, variant: usize, mesh: &Mesh1D) -> Result<Vec<EnrichmentRule>> {
    config.variants[variant]
        .enrichments
        .iter()
        .map(|e| e.resolve(problem, mesh))
        .collect()
}

fn fourier_is_clean(f: &FourierSolution, times: &[f64]) -> bool {
    times
        .iter()
        .all(|&t| (0..=200).all(|k| f.eval(k as f64 / 200.0, t).is_ok()))
}

/// The reference of `config` for viscosity `nu`.
pub fn build_reference(config: &StudyConfig, nu: f64) -> Result<ReferenceSolution> {
    let problem = config.problem.resolve(nu)?;
    let times = config.sample_times();
    let fine = || -> Result<ReferenceSolution> {
        let tc = TimeConfig {
            dt: config.reference.fine_dt,
            t_end: config.t_end,
            snapshot_times: times.clone(),
        };
        fine_fem_reference(&problem, config.reference.fine_elements, &tc, &config.solver).map(ReferenceSolution::FineFem)
    };
    let fourier = || FourierSolution::new(FourierParams { nu, ..Default::default() });
    let characteristics =
        || InviscidSolution::new(problem.initial, problem.domain).map(ReferenceSolution::Characteristics);
    match config.reference.kind {
        ReferenceKind::Fourier => fourier().map(ReferenceSolution::Fourier),
        ReferenceKind::Characteristics => characteristics(),
        ReferenceKind::FineFem => fine(),
        ReferenceKind::SteadyShock => SteadyShock::new(nu).map(ReferenceSolution::SteadyShock),
        ReferenceKind::Auto => {
            if nu == 0.0 {
                return characteristics();
            }
            if config.problem.kind == ProblemKind::BoundaryLayer && problem.initial == InitialCondition::SinPi {
                let f = fourier()?;
                if fourier_is_clean(&f, &times) {
                    return Ok(ReferenceSolution::Fourier(f));
                }
            }
            fine()
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn cell_stem(nu: f64, variant: &str, elements: usize) -> String {
    format!("{variant}_nu{}_n{elements}", fmt(nu))
}

fn write_solution_csv(
    path: &Path,
    disc: &Discretization,
    history: &SolutionHistory,
    times: &[f64],
    per_element: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "t", "u"])?;
    let mesh = disc.mesh();
    let n = mesh.n_elements() * per_element.max(1);
    for (&t, c) in history.times.iter().zip(&history.coefficients) {
        if !times.contains(&t) {
            continue;
        }
        for k in 0..=n {
            let x = if k == n {
                mesh.hi()
            } else {
                mesh.lo() + mesh.length() * k as f64 / n as f64
            };
            let (u, _) = disc.evaluate(c, x)?;
            w.write_record([fmt(x), fmt(t), fmt(u)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_error_csv(path: &Path, series: &[ErrorSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "dofs", "rel_l2", "rel_h1"])?;
    for s in series {
        w.write_record([fmt(s.time), s.dofs.to_string(), fmt(s.rel_l2), fmt(s.rel_h1)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_convergence_csv(path: &Path, tables: &[ConvergenceTable]) -> Result<()> {
    let opt = |r: Option<f64>| r.map(fmt).unwrap_or_default();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "dofs", "rel_l2", "rel_h1", "rate_l2", "rate_h1"])?;
    for tab in tables {
        for s in &tab.samples {
            w.write_record([
                fmt(tab.time),
                s.dofs.to_string(),
                fmt(s.rel_l2),
                fmt(s.rel_h1),
                opt(tab.rate_l2),
                opt(tab.rate_h1),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct CellJob {
    nu_index: usize,
    variant: usize,
    elements: usize,
}

fn run_cell(
    config: &StudyConfig,
    job: &CellJob,
    nu: f64,
    reference: std::result::Result<&ReferenceSolution, &str>,
    out_dir: &Path,
) -> (CellRecord, Option<CellResult>) {
    let start = Instant::now();
    let label = config.variants[job.variant].label.clone();
    let mut record = CellRecord {
        nu,
        variant: label.clone(),
        elements: job.elements,
        dofs: 0,
        quadrature_points: 0,
        enrichments: vec![],
        status: "failed",
        error: None,
        newton_iterations_total: 0,
        newton_iterations_max: 0,
        max_refinements: 0,
        penalty_beta: 0.0,
        warnings: vec![],
        wall_seconds: 0.0,
        files: vec![],
    };
    let outcome = (|| -> Result<CellResult> {
        let problem = config.problem.resolve(nu)?;
        let disc = cell_discretization(config, &problem, job.variant, job.elements)?;
        record.enrichments = resolve_rules(config, &problem, job.variant, disc.mesh())?;
        record.dofs = disc.total_dofs();
        record.quadrature_points = disc.rule().len();
        record.warnings = disc.dof_map().warnings().to_vec();
        let stem = cell_stem(nu, &label, job.elements);
        let history = match run_simulation(&problem, &disc, &config.time_config(), &config.solver) {
            Ok(h) => h,
            Err(failure) => {
                // keep what was computed before the failing step
                let partial = out_dir.join(format!("{stem}_solution.csv"));
                if write_solution_csv(
                    &partial,
                    &disc,
                    &failure.partial,
                    &config.snapshot_steps_as_times(),
                    config.plot_points_per_element,
                )
                .is_ok()
                {
                    record.files.push(format!("{stem}_solution.csv"));
                }
                return Err(failure.error);
            }
        };
        record.newton_iterations_total = history.total_newton_iterations();
        record.newton_iterations_max = history.max_newton_iterations();
        record.max_refinements = history.max_refinements;
        record.penalty_beta = history.beta;
        write_solution_csv(
            &out_dir.join(format!("{stem}_solution.csv")),
            &disc,
            &history,
            &config.snapshot_steps_as_times(),
            config.plot_points_per_element,
        )?;
        record.files.push(format!("{stem}_solution.csv"));
        let reference = reference.map_err(|e| Error::Config(format!("reference unavailable: {e}")))?;
        let series = error_time_series(&disc, &history, reference, &config.error)?;
        write_error_csv(&out_dir.join(format!("{stem}_errors.csv")), &series)?;
        record.files.push(format!("{stem}_errors.csv"));
        Ok(CellResult {
            nu,
            variant: label.clone(),
            elements: job.elements,
            series,
        })
    })();
    record.wall_seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(r) => {
            record.status = "ok";
            (record, Some(r))
        }
        Err(e) => {
            record.error = Some(e.to_string());
            (record, None)
        }
    }
}

/// Runs every (ν, variant, grid) cell of `config` and writes all outputs.
pub fn run_study(config: &StudyConfig, opts: &RunOptions) -> Result<StudyOutcome> {
    let start = Instant::now();
    config.validate()?;
    fs::create_dir_all(&opts.out_dir)?;
    let pool = pool(opts.threads)?;
    let threads = pool.current_num_threads();

    let refs: Vec<(Result<ReferenceSolution>, f64)> = pool.install(|| {
        config
            .nu
            .par_iter()
            .map(|&nu| {
                let t = Instant::now();
                let r = build_reference(config, nu);
                (r, t.elapsed().as_secs_f64())
            })
            .collect()
    });
    let references: Vec<ReferenceRecord> = config
        .nu
        .iter()
        .zip(&refs)
        .map(|(&nu, (r, secs))| {
            let mut rec = ReferenceRecord {
                nu,
                kind: None,
                fine_elements: None,
                fine_dt: None,
                fourier_terms: None,
                wall_seconds: *secs,
                error: None,
            };
            match r {
                Ok(r) => {
                    rec.kind = Some(r.kind().to_string());
                    match r {
                        ReferenceSolution::FineFem(f) => {
                            rec.fine_elements = Some(f.n_elements());
                            rec.fine_dt = Some(f.dt());
                        }
                        ReferenceSolution::Fourier(f) => rec.fourier_terms = Some(f.coefficients().len()),
                        _ => {}
                    }
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    let ref_errors: Vec<String> = references.iter().map(|r| r.error.clone().unwrap_or_default()).collect();

    let mut jobs = Vec::new();
    for nu_index in 0..config.nu.len() {
        for variant in 0..config.variants.len() {
            for &elements in &config.grids {
                jobs.push(CellJob {
                    nu_index,
                    variant,
                    elements,
                });
            }
        }
    }
    let results: Vec<(CellRecord, Option<CellResult>)> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let reference = refs[job.nu_index].0.as_ref().map_err(|_| ref_errors[job.nu_index].as_str());
                run_cell(config, job, config.nu[job.nu_index], reference, &opts.out_dir)
            })
            .collect()
    });

    let snapshot_times = config.snapshot_steps_as_times();
    let mut tables = Vec::new();
    let mut convergence_files = Vec::new();
    let mut table_error = None;
    for &nu in &config.nu {
        for v in &config.variants {
            let cells: Vec<&CellResult> = results
                .iter()
                .filter_map(|(_, r)| r.as_ref())
                .filter(|r| r.nu == nu && r.variant == v.label)
                .collect();
            if cells.len() < 2 {
                continue;
            }
            let mut per_time = Vec::new();
            for &t in &snapshot_times {
                let samples: Vec<ErrorSample> = cells
                    .iter()
                    .filter_map(|c| c.series.iter().find(|s| s.time == t).copied())
                    .collect();
                match ConvergenceTable::new(t, samples) {
                    Ok(tab) => per_time.push(tab),
                    Err(e) => table_error = Some(e.to_string()),
                }
            }
            let name = format!("{}_nu{}_convergence.csv", v.label, fmt(nu));
            write_convergence_csv(&opts.out_dir.join(&name), &per_time)?;
            convergence_files.push(name);
            tables.push((nu, v.label.clone(), per_time));
        }
    }

    let partial = table_error.is_some()
        || references.iter().any(|r| r.error.is_some())
        || results.iter().any(|(c, _)| c.status != "ok");
    let (cell_records, cells): (Vec<CellRecord>, Vec<Option<CellResult>>) = results.into_iter().unzip();
    let manifest = Manifest {
        study: config.name.clone(),
        paper_fidelity: opts.paper_fidelity,
        threads,
        config: config.clone(),
        references,
        cells: cell_records,
        convergence_files,
        partial,
        wall_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION"),
    };
    fs::write(opts.out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(StudyOutcome {
        manifest,
        cells: cells.into_iter().flatten().collect(),
        tables,
    })
}

/// Writes `(x, t, u)` grids of each viscosity's reference.
pub fn write_reference_grids(config: &StudyConfig, out_dir: &Path, points: usize) -> Result<Vec<String>> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let problem = config.problem.resolve(config.nu[0])?;
    let (lo, hi) = problem.domain;
    let n = points.max(2) - 1;
    let mut files = Vec::new();
    for &nu in &config.nu {
        let reference = build_reference(config, nu)?;
        let name = format!("reference_nu{}.csv", fmt(nu));
        let mut w = csv::Writer::from_path(out_dir.join(&name))?;
        w.write_record(["x", "t", "u"])?;
        for &t in &config.snapshot_steps_as_times() {
            for k in 0..=n {
                let x = if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 };
                let u = reference.value(x, t)?;
                w.write_record([fmt(x), fmt(t), fmt(u)])?;
            }
        }
        w.flush()?;
        files.push(name);
    }
    Ok(files)
}

#[derive(Debug, Clone, Serialize)]
pub struct RiemannRecord {
    pub b: f64,
    pub breaking_time: Option<f64>,
    pub shock_location: Option<f64>,
    pub times: Vec<f64>,
    /// Times past breaking skipped because the shock moves.
    pub skipped: Vec<f64>,
    pub file: String,
}

/// Characteristics solutions of each ramp problem; post-breaking times of
/// moving shocks are skipped and listed in the manifest.
pub fn run_riemann(config: &RiemannConfig, out_dir: &Path) -> Result<Vec<RiemannRecord>> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let (lo, hi) = config.domain;
    let n = config.points - 1;
    let mut records = Vec::new();
    for &b in &config.b {
        let sol = InviscidSolution::new(InitialCondition::Riemann { b }, config.domain)?;
        let file = format!("riemann_b{}.csv", fmt(b));
        let mut w = csv::Writer::from_path(out_dir.join(&file))?;
        w.write_record(["x", "t", "u"])?;
        let mut rec = RiemannRecord {
            b,
            breaking_time: sol.breaking_time(),
            shock_location: sol.shock_location(),
            times: vec![],
            skipped: vec![],
            file,
        };
        for &t in &config.times {
            let xs: Vec<f64> = (0..=n)
                .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
                .collect();
            match xs.iter().map(|&x| sol.value(x, t)).collect::<Result<Vec<f64>>>() {
                Ok(us) => {
                    for (x, u) in xs.iter().zip(us) {
                        w.write_record([fmt(*x), fmt(t), fmt(u)])?;
                    }
                    rec.times.push(t);
                }
                Err(Error::Unsupported(_)) => rec.skipped.push(t),
                Err(e) => return Err(e),
            }
        }
        w.flush()?;
        records.push(rec);
    }
    #[derive(Serialize)]
    struct RiemannManifest<'a> {
        study: &'a str,
        config: &'a RiemannConfig,
        problems: &'a [RiemannRecord],
    }
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&RiemannManifest {
            study: &config.name,
            config,
            problems: &records,
        })?,
    )?;
    Ok(records)
}
