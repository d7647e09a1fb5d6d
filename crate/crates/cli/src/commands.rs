//! Command dispatch: each command runs the corresponding laboratory
//! operation, writes its CSV artifacts to the output directory, and
//! returns the verdicts it produced. The process exit status is a pure
//! function of those verdicts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvi_core::assembly::assemble_all;
use pvi_core::control::optimize;
use pvi_core::io::{control_csv, trajectory_binary, trajectory_csv, write_atomic};
use pvi_core::lab::{
    convexity_check, gradient_fd_check, max_principle_check, monotonicity_check,
    oracle_eps_comparison, sweep_eps, sweep_h_fixed_control, sweep_h_optimal, SweepReport,
    Verdict,
};
use pvi_core::mesh::Mesh;
use pvi_core::state::{solve_state, tresca_diagnostic, BoundaryControl, FrictionRegime, Variant};

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    Optimize,
    SweepH,
    SweepHOptimal,
    SweepEps,
    CheckConvexity,
    CheckMonotonicity,
    CheckMaxprinciple,
    CheckTrace,
    Gradcheck,
    OracleCompare,
    PaperSuite,
}

/// Run one command; artifacts go to `cfg.output_dir`.
pub fn dispatch(cmd: CommandKind, cfg: &RunConfig) -> Result<Vec<Verdict>> {
    let out = PathBuf::from(&cfg.output_dir);
    match cmd {
        CommandKind::Solve => run_solve(cfg, &out),
        CommandKind::Optimize => run_optimize(cfg, &out),
        CommandKind::SweepH => {
            let report = sweep_h_fixed_control(&cfg.lab_config(), &default_control(cfg)?, &cfg.h_list)?;
            finish_report(&report, &out, "sweep_h_fixed.csv")
        }
        CommandKind::SweepEps => {
            let report = sweep_eps(&cfg.lab_config(), &default_control(cfg)?, &cfg.eps_list)?;
            finish_report(&report, &out, "sweep_eps.csv")
        }
        CommandKind::SweepHOptimal => {
            let sweep = sweep_h_optimal(&cfg.lab_config(), &cfg.h_list)?;
            finish_report(&sweep.report, &out, "sweep_h_optimal.csv")
        }
        CommandKind::CheckTrace => {
            let sweep = sweep_h_optimal(&cfg.lab_config(), &cfg.h_list)?;
            finish_report(&sweep.trace_report, &out, "trace_check.csv")
        }
        CommandKind::CheckConvexity => {
            let (f1, f2) = check_controls(cfg)?;
            let report = convexity_check(&cfg.lab_config(), &f1, &f2, CHECK_BLEND_WEIGHTS)?;
            finish_report(&report, &out, "convexity.csv")
        }
        CommandKind::CheckMonotonicity => {
            let (f1, f2) = check_controls(cfg)?;
            let report = monotonicity_check(&cfg.lab_config(), &f1, &f2, CHECK_BLEND_WEIGHTS)?;
            finish_report(&report, &out, "monotonicity.csv")
        }
        CommandKind::CheckMaxprinciple => {
            let report = max_principle_check(&cfg.lab_config(), &default_control(cfg)?)?;
            finish_report(&report, &out, "maxprinciple.csv")
        }
        CommandKind::Gradcheck => {
            let report = run_gradcheck(cfg)?;
            finish_report(&report, &out, "gradcheck.csv")
        }
        CommandKind::OracleCompare => {
            let report = run_oracle_compare(cfg)?;
            finish_report(&report, &out, "oracle_compare.csv")
        }
        CommandKind::PaperSuite => run_paper_suite(cfg, &out),
    }
}

/// Blend weights used by the convexity and ordering checks.
pub const CHECK_BLEND_WEIGHTS: &[f64] = &[0.25, 0.5, 0.75];

/// Default fixed control of the solve and fixed-control sweep commands.
fn default_control(cfg: &RunConfig) -> Result<BoundaryControl> {
    let mesh = Mesh::unit_square(cfg.nx, cfg.ny)?;
    let n3 = mesh.boundary_nodes(pvi_core::mesh::BoundaryTag::Gamma3).len();
    Ok(BoundaryControl::zeros(cfg.steps, n3))
}

/// The two fixed feasible controls compared by the structure checks.
fn check_controls(cfg: &RunConfig) -> Result<(BoundaryControl, BoundaryControl)> {
    let mesh = Mesh::unit_square(cfg.nx, cfg.ny)?;
    let n3 = mesh.boundary_nodes(pvi_core::mesh::BoundaryTag::Gamma3).len();
    Ok((
        BoundaryControl::zeros(cfg.steps, n3),
        BoundaryControl::constant(-1.0, cfg.steps, n3),
    ))
}

fn finish_report(report: &SweepReport, out: &Path, file: &str) -> Result<Vec<Verdict>> {
    let path = out.join(file);
    write_atomic(&path, report.to_csv().as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    if !report.runtimes_s.is_empty() {
        let total: f64 = report.runtimes_s.iter().sum();
        println!("{}: {:.3}s solver time", report.label, total);
    }
    Ok(report.verdicts.clone())
}

fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Vec<Verdict>> {
    let lab = cfg.lab_config();
    let (mesh, ops) = lab.build()?;
    let control = default_control(cfg)?;
    let traj = solve_state(&mesh, &ops, &lab.data, &control, Variant::Dirichlet, &lab.newton)?;

    let echo = cfg.canonical_echo();
    write_atomic(&out.join("trajectory.csv"), trajectory_csv(&traj, &mesh, &echo).as_bytes())?;
    write_atomic(&out.join("trajectory.bin"), &trajectory_binary(&traj))?;
    println!("wrote {}", out.join("trajectory.csv").display());
    println!("wrote {}", out.join("trajectory.bin").display());

    let report = tresca_diagnostic(&traj, &ops, &lab.data);
    let stick = report
        .rows
        .iter()
        .filter(|r| r.regime == FrictionRegime::Stick)
        .count();
    println!(
        "friction edge: {} stick / {} slip rows, max |flux| = {:.6} (threshold q = {}), \
         stick tolerance {}",
        stick,
        report.rows.len() - stick,
        report.max_abs_flux,
        lab.data.q,
        report.stick_tol,
    );
    println!(
        "difference-quotient bound (diagnostic): {:.6}",
        traj.difference_quotient_bound(&ops, lab.data.dt())
    );
    Ok(Vec::new())
}

fn run_optimize(cfg: &RunConfig, out: &Path) -> Result<Vec<Verdict>> {
    let lab = cfg.lab_config();
    let (mesh, ops) = lab.build()?;
    let f_init = default_control(cfg)?;
    let result = optimize(
        &mesh,
        &ops,
        &lab.data,
        Variant::Dirichlet,
        &f_init,
        &lab.newton,
        &lab.opt,
    )?;

    let echo = cfg.canonical_echo();
    let mut trace = String::new();
    let _ = writeln!(trace, "# config: {echo}");
    let _ = writeln!(trace, "iter,cost,grad_norm,step");
    for rec in &result.cost_history {
        let _ = writeln!(trace, "{},{},{},{}", rec.iter, rec.cost, rec.grad_norm, rec.step);
    }
    write_atomic(&out.join("opt_trace.csv"), trace.as_bytes())?;
    write_atomic(
        &out.join("control.csv"),
        control_csv(&result.f_opt, &mesh, &ops, &echo).as_bytes(),
    )?;
    println!("wrote {}", out.join("opt_trace.csv").display());
    println!("wrote {}", out.join("control.csv").display());
    println!(
        "optimizer: cost {:.6e} after {} iterates, converged = {}",
        result.cost,
        result.cost_history.len(),
        result.converged
    );
    Ok(vec![Verdict::new(
        "optimizer-converged",
        result.converged,
        format!("final cost {:.6e}", result.cost),
    )])
}

fn run_gradcheck(cfg: &RunConfig) -> Result<SweepReport> {
    let lab = cfg.lab_config();
    let mesh = Mesh::unit_square(cfg.nx, cfg.ny)?;
    let n3 = mesh.boundary_nodes(pvi_core::mesh::BoundaryTag::Gamma3).len();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut control = BoundaryControl::zeros(cfg.steps, n3);
    for step in control.values.iter_mut() {
        for v in step.iter_mut() {
            *v = -(0.25 + 0.5 * rng.gen::<f64>());
        }
    }
    let mut coords: Vec<(usize, usize)> = Vec::new();
    while coords.len() < 5 {
        let c = (rng.gen_range(1..=cfg.steps), rng.gen_range(0..n3));
        if !coords.contains(&c) {
            coords.push(c);
        }
    }
    Ok(gradient_fd_check(&lab, &control, &coords, 1e-5)?)
}

/// Oracle comparison experiment: a fixed desk-scale configuration on which
/// the exact coordinate-descent reference is cheap and the regularization
/// error is dominated by sticking friction nodes, where it scales linearly
/// in ε. Mesh, step count, friction threshold and the ε ladder are pinned;
/// source, datum and time horizon come from the run configuration.
pub const ORACLE_COMPARE_MESH: usize = 4;
pub const ORACLE_COMPARE_STEPS: usize = 4;
pub const ORACLE_COMPARE_Q: f64 = 2.0;
pub const ORACLE_COMPARE_EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

fn run_oracle_compare(cfg: &RunConfig) -> Result<SweepReport> {
    let mut lab = cfg.lab_config();
    lab.nx = ORACLE_COMPARE_MESH;
    lab.ny = ORACLE_COMPARE_MESH;
    lab.data.n_steps = ORACLE_COMPARE_STEPS;
    lab.data.q = ORACLE_COMPARE_Q;
    let mesh = Mesh::unit_square(lab.nx, lab.ny)?;
    let ops = assemble_all(&mesh)?;
    let control = BoundaryControl::zeros(lab.data.n_steps, ops.gamma3.len());
    Ok(oracle_eps_comparison(&lab, &control, &ORACLE_COMPARE_EPS)?)
}

/// Every check with the current configuration; one verdict list.
fn run_paper_suite(cfg: &RunConfig, out: &Path) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();
    let lab = cfg.lab_config();

    let report = run_oracle_compare(cfg)?;
    verdicts.extend(finish_report(&report, out, "oracle_compare.csv")?);

    let report = run_gradcheck(cfg)?;
    verdicts.extend(finish_report(&report, out, "gradcheck.csv")?);

    let control = default_control(cfg)?;
    let report = sweep_eps(&lab, &control, &cfg.eps_list)?;
    verdicts.extend(finish_report(&report, out, "sweep_eps.csv")?);

    let report = sweep_h_fixed_control(&lab, &control, &cfg.h_list)?;
    verdicts.extend(finish_report(&report, out, "sweep_h_fixed.csv")?);

    // one optimization sweep feeds both the optimal-control report and the
    // boundary trace report
    let sweep = sweep_h_optimal(&lab, &cfg.h_list)?;
    verdicts.extend(finish_report(&sweep.report, out, "sweep_h_optimal.csv")?);
    verdicts.extend(finish_report(&sweep.trace_report, out, "trace_check.csv")?);

    let (f1, f2) = check_controls(cfg)?;
    let report = convexity_check(&lab, &f1, &f2, CHECK_BLEND_WEIGHTS)?;
    verdicts.extend(finish_report(&report, out, "convexity.csv")?);

    let report = monotonicity_check(&lab, &f1, &f2, CHECK_BLEND_WEIGHTS)?;
    verdicts.extend(finish_report(&report, out, "monotonicity.csv")?);

    let report = max_principle_check(&lab, &control)?;
    verdicts.extend(finish_report(&report, out, "maxprinciple.csv")?);

    Ok(verdicts)
}

/// Print verdicts and reduce them to an exit status.
pub fn report_verdicts(verdicts: &[Verdict]) -> bool {
    let mut all_pass = true;
    for v in verdicts {
        let status = if v.pass { "PASS" } else { "FAIL" };
        if v.detail.is_empty() {
            println!("{status} {}", v.name);
        } else {
            println!("{status} {} — {}", v.name, v.detail);
        }
        all_pass &= v.pass;
    }
    all_pass
}
