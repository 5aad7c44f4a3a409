use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_burgers-gfem");

const SMALL: &str = r#"
name = "small"
nu = [0.02]
grids = [11, 23]
t_end = 0.1
snapshot_times = [0.0, 0.05, 0.1]
series_interval = 0.05

[problem]
kind = "shock-formation"

[reference]
fine_elements = 200

[[variants]]
label = "fem"
enrichments = []

[[variants]]
label = "ss"
enrichments = [{ kind = "tanh-shock", center = 0.5, thickness = "nu" }]
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("BURGERS_GFEM_OUT").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn error_record(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("no error record");
    serde_json::from_str(line).unwrap()
}

#[test]
fn list_names_every_builtin() {
    let out = cli(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "example1-fem",
        "example1-exp-gfem",
        "example1-disc-gfem",
        "example2-fem",
        "example2-ss-gfem",
        "example2-ss-rho",
        "riemann-gallery",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn validate_accepts_builtins_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "small.toml", SMALL);
    for args in [
        vec!["validate", "--study", "example2-ss-rho"],
        vec!["validate", "--study", "example1-fem", "--paper-fidelity"],
        vec!["validate", "--config", &path],
    ] {
        let out = cli(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validate_rejects_overlapping_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(
        "kind = \"shock-formation\"",
        "kind = \"shock-formation\"\nneumann = [{ x = 1.0, value = 0.0 }]",
    );
    let path = write(dir.path(), "bad.toml", &text);
    let out = cli(&["validate", "--config", &path]);
    assert!(!out.status.success());
    let record = error_record(&out);
    assert_eq!(record["status"], "error");
    assert!(record["message"].as_str().unwrap().contains("Γ_D ∩ Γ_N"));
}

#[test]
fn validate_rejects_inviscid_fourier() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("nu = [0.02]", "nu = [0.0]")
        .replace("shock-formation", "boundary-layer")
        .replace("fine_elements = 200", "kind = \"fourier\"")
        .replace("thickness = \"nu\"", "thickness = 0.01");
    let path = write(dir.path(), "bad.toml", &text);
    let out = cli(&["validate", "--config", &path]);
    assert!(!out.status.success());
    assert!(error_record(&out)["message"].as_str().unwrap().contains("ν = 0"));
}

#[test]
fn unknown_study_is_an_error_record() {
    let out = cli(&["run", "--study", "nope"]);
    assert!(!out.status.success());
    assert_eq!(error_record(&out)["kind"], "Config");
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "small.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = cli(&["run", "--config", &path, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = csv_files(&a);
    assert_eq!(files, csv_files(&b));
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "fem_nu0.02_n11_solution.csv",
        "fem_nu0.02_n23_errors.csv",
        "ss_nu0.02_n11_errors.csv",
        "fem_nu0.02_convergence.csv",
        "ss_nu0.02_convergence.csv",
    ] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }

    let solution = String::from_utf8(files.iter().find(|(n, _)| n == "ss_nu0.02_n11_solution.csv").unwrap().1.clone()).unwrap();
    assert_eq!(solution.lines().next(), Some("x,t,u"));
    // 3 snapshots of 11 · 10 + 1 points
    assert_eq!(solution.lines().count(), 1 + 3 * 111);
    let errors = String::from_utf8(files.iter().find(|(n, _)| n == "fem_nu0.02_n11_errors.csv").unwrap().1.clone()).unwrap();
    assert_eq!(errors.lines().next(), Some("t,dofs,rel_l2,rel_h1"));
    let conv = String::from_utf8(files.iter().find(|(n, _)| n == "fem_nu0.02_convergence.csv").unwrap().1.clone()).unwrap();
    assert_eq!(conv.lines().next(), Some("t,dofs,rel_l2,rel_h1,rate_l2,rate_h1"));

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], false);
    assert_eq!(manifest["config"]["dt"], 0.001);
    assert_eq!(manifest["config"]["solver"]["beta_scale"], 1e8);
    assert_eq!(manifest["config"]["reference"]["fine_dt"], 0.001);
    assert_eq!(manifest["config"]["error"]["subintervals"], 2000);
    assert_eq!(manifest["references"][0]["kind"], "fine-fem");
    let cells = manifest["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    let ss = cells.iter().find(|c| c["variant"] == "ss").unwrap();
    assert_eq!(ss["enrichments"][0]["thickness"], 0.02);
    assert!(ss["newton_iterations_max"].as_u64().unwrap() >= 1);
}

#[test]
fn failed_cells_mark_the_manifest_partial() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("[reference]", "[solver.newton]\nmax_iters = 1\n\n[reference]");
    let path = write(dir.path(), "strict.toml", &text);
    let out_dir = dir.path().join("out");
    let out = cli(&["run", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert!(!out.status.success());
    let record = error_record(&out);
    assert_eq!(record["status"], "partial");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], true);
    assert!(manifest["cells"].as_array().unwrap().iter().any(|c| c["status"] == "failed"));
}

#[test]
fn riemann_gallery_skips_moving_shocks_after_breaking() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["riemann", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let problems = manifest["problems"].as_array().unwrap();
    assert_eq!(problems.len(), 6);
    for p in problems {
        let b = p["b"].as_f64().unwrap();
        let skipped = p["skipped"].as_array().unwrap();
        if b == 0.0 {
            assert!(skipped.is_empty());
        } else {
            assert!(skipped.iter().all(|t| t.as_f64().unwrap() >= 0.5));
            assert!(!skipped.is_empty());
        }
        assert!(dir.path().join(p["file"].as_str().unwrap()).exists());
    }
}

#[test]
fn reference_grids_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "small.toml", SMALL);
    let out_dir = dir.path().join("refs");
    let out = cli(&["reference", "--config", &path, "--out", out_dir.to_str().unwrap(), "--points", "51"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("reference_nu0.02.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 51);
}
