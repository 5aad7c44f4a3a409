use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use burgers_gfem::study::{
    builtin_studies, find_study, run_riemann, run_study, write_reference_grids, BuiltinStudy, RiemannConfig, RunOptions,
    StudyConfig,
};
use burgers_gfem::Error;

/// Output directory used when `--out` is absent.
const OUT_ENV: &str = "BURGERS_GFEM_OUT";

#[derive(Parser)]
#[command(name = "burgers-gfem", version, about = "GFEM solver and convergence studies for the 1D Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study: simulations, error series, convergence tables, manifest.
    Run(StudyArgs),
    /// Write reference solutions on uniform (x, t) grids.
    Reference {
        #[command(flatten)]
        study: StudyArgs,
        /// Points per snapshot.
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Run a study and print its convergence tables.
    Convergence(StudyArgs),
    /// Characteristics solutions of the inviscid ramp problems.
    Riemann {
        /// Riemann config file; the built-in gallery when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in studies.
    List,
    /// Validate a config without running any numerics.
    Validate {
        #[arg(long, conflicts_with = "study", required_unless_present = "study")]
        config: Option<PathBuf>,
        #[arg(long)]
        study: Option<String>,
        #[arg(long)]
        paper_fidelity: bool,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// Study config file (TOML, or JSON by extension).
    #[arg(long, conflicts_with = "study", required_unless_present = "study")]
    config: Option<PathBuf>,
    /// Built-in study name.
    #[arg(long)]
    study: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// 5000-element references with Δt = 1/5000 and one linearization per step.
    #[arg(long)]
    paper_fidelity: bool,
    #[arg(long)]
    threads: Option<usize>,
}

enum Loaded {
    Study(StudyConfig),
    Riemann(RiemannConfig),
}

fn load_riemann(path: &Path) -> Result<RiemannConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}

fn load(config: Option<&Path>, study: Option<&str>, paper_fidelity: bool) -> Result<Loaded, Error> {
    let loaded = match (config, study) {
        (Some(path), _) => match StudyConfig::load(path) {
            Ok(c) => Loaded::Study(c),
            Err(study_err) => match load_riemann(path) {
                Ok(r) => Loaded::Riemann(r),
                Err(_) => return Err(study_err),
            },
        },
        (None, Some(name)) => match find_study(name) {
            Some(BuiltinStudy::Simulation(c)) => Loaded::Study(c),
            Some(BuiltinStudy::Riemann(r)) => Loaded::Riemann(r),
            None => return Err(Error::Config(format!("unknown study `{name}`; see `list`"))),
        },
        (None, None) => return Err(Error::Config("either --config or --study is required".into())),
    };
    Ok(match loaded {
        Loaded::Study(c) if paper_fidelity => Loaded::Study(c.paper_fidelity()),
        other => other,
    })
}

fn out_dir(out: Option<PathBuf>, name: &str) -> PathBuf {
    out.or_else(|| std::env::var_os(OUT_ENV).map(|d| PathBuf::from(d).join(name)))
        .unwrap_or_else(|| PathBuf::from("out").join(name))
}

fn error_kind(e: &Error) -> String {
    let debug = format!("{e:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string()
}

fn fail(e: &Error, extra: serde_json::Value) -> ExitCode {
    let mut record = json!({ "status": "error", "kind": error_kind(e), "message": e.to_string() });
    if let (Some(r), Some(x)) = (record.as_object_mut(), extra.as_object()) {
        r.extend(x.clone());
    }
    eprintln!("{record}");
    ExitCode::from(1)
}

fn riemann(cfg: &RiemannConfig, out: PathBuf) -> ExitCode {
    match run_riemann(cfg, &out) {
        Ok(records) => {
            for r in &records {
                println!(
                    "b = {}: breaking time {:?}, {} times written, {} skipped",
                    r.b,
                    r.breaking_time,
                    r.times.len(),
                    r.skipped.len()
                );
            }
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e, json!({})),
    }
}

fn run(args: StudyArgs, print_tables: bool) -> ExitCode {
    let loaded = match load(args.config.as_deref(), args.study.as_deref(), args.paper_fidelity) {
        Ok(l) => l,
        Err(e) => return fail(&e, json!({})),
    };
    let config = match loaded {
        Loaded::Study(c) => c,
        Loaded::Riemann(r) => {
            let out = out_dir(args.out, &r.name);
            return riemann(&r, out);
        }
    };
    let out = out_dir(args.out, &config.name);
    let opts = RunOptions {
        out_dir: out.clone(),
        threads: args.threads,
        paper_fidelity: args.paper_fidelity,
    };
    let outcome = match run_study(&config, &opts) {
        Ok(o) => o,
        Err(e) => return fail(&e, json!({ "out": out })),
    };
    let m = &outcome.manifest;
    for c in &m.cells {
        match &c.error {
            None => println!(
                "ν = {:<6} {:<12} n = {:<4} dofs = {:<4} newton max {} ({:.2}s)",
                c.nu, c.variant, c.elements, c.dofs, c.newton_iterations_max, c.wall_seconds
            ),
            Some(err) => println!("ν = {:<6} {:<12} n = {:<4} FAILED: {err}", c.nu, c.variant, c.elements),
        }
    }
    if print_tables {
        for (nu, variant, tables) in &outcome.tables {
            println!("\nν = {nu}, {variant}");
            println!("{:>8} {:>6} {:>12} {:>12} {:>8} {:>8}", "t", "dofs", "rel_l2", "rel_h1", "rate_l2", "rate_h1");
            for t in tables {
                let rate = |r: Option<f64>| r.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
                for s in &t.samples {
                    println!(
                        "{:>8.4} {:>6} {:>12.4e} {:>12.4e} {:>8} {:>8}",
                        t.time,
                        s.dofs,
                        s.rel_l2,
                        s.rel_h1,
                        rate(t.rate_l2),
                        rate(t.rate_h1)
                    );
                }
            }
        }
    }
    println!("wrote {} ({:.1}s)", out.display(), m.wall_seconds);
    if m.partial {
        let failed: Vec<_> = m
            .cells
            .iter()
            .filter_map(|c| c.error.as_ref().map(|e| json!({ "nu": c.nu, "variant": c.variant, "elements": c.elements, "error": e })))
            .chain(
                m.references
                    .iter()
                    .filter_map(|r| r.error.as_ref().map(|e| json!({ "nu": r.nu, "reference": e }))),
            )
            .collect();
        eprintln!(
            "{}",
            json!({ "status": "partial", "kind": "StudyIncomplete", "out": out, "failures": failed })
        );
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args, false),
        Command::Convergence(args) => run(args, true),
        Command::Reference { study, points } => {
            let config = match load(study.config.as_deref(), study.study.as_deref(), study.paper_fidelity) {
                Ok(Loaded::Study(c)) => c,
                Ok(Loaded::Riemann(r)) => return riemann(&r, out_dir(study.out, &r.name)),
                Err(e) => return fail(&e, json!({})),
            };
            let out = out_dir(study.out, &config.name);
            match write_reference_grids(&config, &out, points) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", out.join(f).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, json!({ "out": out })),
            }
        }
        Command::Riemann { config, out } => {
            let cfg = match config {
                Some(path) => match load_riemann(&path) {
                    Ok(c) => c,
                    Err(e) => return fail(&e, json!({})),
                },
                None => burgers_gfem::study::registry::riemann_gallery(),
            };
            let out = out_dir(out, &cfg.name);
            riemann(&cfg, out)
        }
        Command::List => {
            for s in builtin_studies() {
                println!("{:<20} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate {
            config,
            study,
            paper_fidelity,
        } => {
            let checked = load(config.as_deref(), study.as_deref(), paper_fidelity).and_then(|l| match l {
                Loaded::Study(c) => c.validate().map(|_| (c.name.clone(), "study", c.nu.len() * c.grids.len() * c.variants.len())),
                Loaded::Riemann(r) => r.validate().map(|_| (r.name.clone(), "riemann", r.b.len())),
            });
            match checked {
                Ok((name, kind, cells)) => {
                    println!("{}", json!({ "status": "valid", "name": name, "kind": kind, "cells": cells }));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, json!({})),
            }
        }
    }
}
