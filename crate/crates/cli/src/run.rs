//! Executes a validated configuration and writes its artifacts.

use std::path::Path;

use anyhow::{Context, Result};
use stmortar::dd::DdSetup;
use stmortar::interface::{assemble_dense, spectral_diagnostics, GmresOptions, DENSE_CAP};
use stmortar::mortar::check_mortar_assumptions;
use stmortar::verification::oracle::{max_coefficient_difference, monolithic_oracle, ORACLE_CAP};
use stmortar::verification::study::{
    run_case, setup_example1, setup_example2, ConvergenceTable, Example2Mode, MortarKind, StudyRow,
};
use stmortar::verification::{example1, example2, ManufacturedCase};

use crate::config::{Case, Mode, Mortar, RunConfig};
use crate::output::{self, OracleRow, SpectralRow};

struct Artifacts {
    rows: Vec<(String, StudyRow)>,
    spectral: Vec<SpectralRow>,
    oracle: Vec<OracleRow>,
    assumptions: Vec<(String, stmortar::mortar::MortarAssumptionReport)>,
}

fn kind(m: Mortar) -> MortarKind {
    match m {
        Mortar::Dgq1 => MortarKind::Dgq1,
        Mortar::Dgq2 => MortarKind::Dgq2,
        Mortar::Matched => MortarKind::Matched,
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let opts = GmresOptions {
        tol: cfg.gmres.tol,
        max_iter: cfg.gmres.max_iter,
        preconditioner: None,
    };
    let mut art = Artifacts {
        rows: Vec::new(),
        spectral: Vec::new(),
        oracle: Vec::new(),
        assumptions: Vec::new(),
    };
    match cfg.case {
        Case::Example1 => {
            let case = example1();
            for &level in &cfg.levels {
                let setup = setup_example1(&case, level, kind(cfg.mortar))?;
                solve_one(cfg, &case, &opts, level.to_string(), setup, &mut art)?;
            }
        }
        Case::Example2 => {
            let case = example2();
            let modes: &[(Example2Mode, &str)] = match cfg.mode {
                Mode::Multiscale => &[(Example2Mode::Multiscale, "multiscale")],
                Mode::Fine => &[(Example2Mode::Fine, "fine")],
                Mode::Both => &[
                    (Example2Mode::Multiscale, "multiscale"),
                    (Example2Mode::Fine, "fine"),
                ],
            };
            for &(mode, label) in modes {
                let setup = setup_example2(&case, mode)?;
                solve_one(cfg, &case, &opts, label.to_string(), setup, &mut art)?;
            }
        }
    }
    Ok(())
}

fn solve_one(
    cfg: &RunConfig,
    case: &ManufacturedCase,
    opts: &GmresOptions<'_>,
    label: String,
    setup: DdSetup,
    art: &mut Artifacts,
) -> Result<()> {
    let out = &cfg.out;
    if cfg.diagnostics.check_assumptions {
        let rep = check_mortar_assumptions(&setup.decomposition, &setup.mortars)?;
        for w in &rep.warnings {
            eprintln!("warning [{label}]: {w}");
        }
        art.assumptions.push((label.clone(), rep));
        output::write_assumptions(&out.join("assumptions.csv"), &art.assumptions)?;
    }
    if cfg.diagnostics.spectral {
        spectral(&setup, &label, art, out)?;
    }

    let run = run_case(case, setup, opts).with_context(|| format!("solving {label}"))?;
    output::write_residuals(
        &out.join(format!("residuals_{label}.csv")),
        &run.solution.report,
    )?;
    if !run.solution.report.converged {
        eprintln!(
            "warning [{label}]: GMRES stopped after {} iterations at relative residual {:.3e}",
            run.solution.report.iterations,
            run.solution.report.relative_residual()
        );
    }
    let level: u32 = label.parse().unwrap_or(0);
    art.rows
        .push((label.clone(), StudyRow::from_run(level, &run)));
    write_table(cfg, art)?;
    let r = &art.rows.last().unwrap().1;
    println!(
        "{label}: {} mortar dofs, {} GMRES iterations, e_u {:.3e}, e_p_dg {:.3e}, e_p {:.3e}, e_lambda {:.3e}",
        r.mortar_dofs, r.gmres_iterations, r.errors.e_u, r.errors.e_p_dg, r.errors.e_p, r.errors.e_lambda
    );

    if cfg.diagnostics.oracle {
        let data = run.setup.sample_data(case, run.initial.p0.clone());
        match monolithic_oracle(&run.setup, &data, ORACLE_CAP) {
            Ok(o) => {
                let unknowns = o.lambda.len()
                    + o.trajectories
                        .iter()
                        .map(|t| t.u.iter().chain(&t.p).map(Vec::len).sum::<usize>())
                        .sum::<usize>();
                art.oracle.push(OracleRow {
                    label: label.clone(),
                    unknowns,
                    max_difference: max_coefficient_difference(
                        (&run.solution.trajectories, &run.solution.lambda),
                        (&o.trajectories, &o.lambda),
                    ),
                    residual: o.residual,
                    condition: o.condition,
                });
                output::write_oracle(&out.join("oracle.csv"), &art.oracle)?;
            }
            Err(e) => eprintln!("oracle skipped for {label}: {e}"),
        }
    }

    for (n, &t) in cfg.output.vtk_times.iter().enumerate() {
        let dir = out.join("vtk");
        std::fs::create_dir_all(&dir)?;
        for (s, tr) in run.setup.solvers.iter().zip(&run.solution.trajectories) {
            let k = s.spec.time.locate(t);
            output::write_vtk(
                &dir.join(format!("{label}_t{n}_sub{}.vtk", s.spec.id)),
                s,
                tr,
                k,
            )?;
        }
    }
    Ok(())
}

fn spectral(setup: &DdSetup, label: &str, art: &mut Artifacts, out: &Path) -> Result<()> {
    let dim = setup.n_mortar_dofs();
    if dim > DENSE_CAP {
        eprintln!("spectral report skipped for {label}: {dim} mortar dofs exceed {DENSE_CAP}");
        return Ok(());
    }
    let s = assemble_dense(&setup.operator(), DENSE_CAP)?;
    let gram: Vec<f64> = setup
        .mortars
        .iter()
        .flat_map(|m| m.gram_diagonal())
        .collect();
    art.spectral.push(SpectralRow {
        label: label.to_string(),
        dim,
        h: setup.decomposition.h(),
        euclidean: spectral_diagnostics(&s, None)?,
        l2: spectral_diagnostics(&s, Some(&gram))?,
    });
    output::write_spectral(&out.join("spectral.csv"), &art.spectral)
}

fn write_table(cfg: &RunConfig, art: &Artifacts) -> Result<()> {
    let rates = match cfg.case {
        Case::Example1 => {
            ConvergenceTable::from_rows(art.rows.iter().map(|(_, r)| r.clone()).collect()).rates
        }
        Case::Example2 => vec![None; art.rows.len()],
    };
    let rows: Vec<_> = art
        .rows
        .iter()
        .zip(rates)
        .map(|((l, r), rate)| (l.clone(), r.clone(), rate))
        .collect();
    output::write_convergence(&cfg.out.join("convergence.csv"), &rows)
}
