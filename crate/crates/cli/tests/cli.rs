use std::path::Path;
use std::process::{Command, Output};

fn stmortar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stmortar"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn empty_level_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = stmortar(&["run", "--levels", "", "--out", "res"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("levels"));
    assert!(!dir.path().join("res").exists());
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "case = \"example1\"\n[gmres]\ntolerance = 1e-8\n",
    )
    .unwrap();
    let out = stmortar(&["run", "--config", "run.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "case = \"example1\"\nlevels = [0, 1]\nmortar = \"dgq2\"\n[diagnostics]\nspectral = true\n[output]\nvtk_times = [0.25]\n",
    )
    .unwrap();
    let files = [
        "convergence.csv",
        "residuals_0.csv",
        "residuals_1.csv",
        "spectral.csv",
        "vtk/1_t0_sub2.vtk",
    ];
    let mut runs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out = Command::new(env!("CARGO_BIN_EXE_stmortar"))
            .args(["run", "--config", "run.toml", "--out", name])
            .env("STMORTAR_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        runs.push(files.map(|f| std::fs::read(dir.path().join(name).join(f)).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    let table = String::from_utf8(runs[0][0].clone()).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "level,dofs,gmres_iters,e_u,rate_u,e_p_dg,rate_p_dg,e_p,rate_p,e_lambda,rate_lambda"
    );
    assert!(lines[1].starts_with("0,36,"));
}

#[test]
fn multiscale_row_is_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let out = stmortar(
        &[
            "run",
            "--case",
            "example2",
            "--mode",
            "multiscale",
            "--check-assumptions",
            "--out",
            "r",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = std::fs::read_to_string(dir.path().join("r/convergence.csv")).unwrap();
    assert!(table
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("multiscale,1536,"));
    assert!(dir.path().join("r/assumptions.csv").exists());
}
