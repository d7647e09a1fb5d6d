//! Sweep drivers and structural checks: regularization sweeps, Robin
//! penalty sweeps at fixed and at optimal controls, trace convergence,
//! convexity and ordering checks, and the weak maximum principle. Each
//! driver returns a [`SweepReport`] whose verdicts are computed from the
//! stored metrics only; a failed verdict still carries the full report.
//! Sweep members are independent jobs run concurrently; results are
//! collected and written in parameter order, so the output never depends
//! on scheduling.

use rayon::prelude::*;

use crate::assembly::{AssembledOperators, ProblemData};
use crate::control::{optimize, OptParams, OptimizationResult};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::norms::{norm_control, norm_max_l2, norm_space_time, norm_space_time_h1, norm_trace};
use crate::oracle::oracle_state_trajectory;
use crate::state::{solve_state, BoundaryControl, NewtonParams, StateTrajectory, Variant};

/// Named pass/fail outcome of one check.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Verdict {
        Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// One row of a sweep: the parameter value and the metric values in
/// column order.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub parameter: f64,
    pub values: Vec<f64>,
}

/// Generic sweep result: rows ordered by parameter, named metric columns,
/// verdicts derived from the rows, wall-clock runtimes (reported on
/// stdout, never written to CSV so reruns stay byte-identical), and an
/// echo of the configuration that produced it.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub label: String,
    pub parameter_name: String,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<Verdict>,
    pub runtimes_s: Vec<f64>,
    pub config_echo: String,
}

impl SweepReport {
    /// CSV rendering: config comment line, header, then data rows.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "# config: {}", self.config_echo);
        let mut header = self.parameter_name.clone();
        for c in &self.columns {
            header.push(',');
            header.push_str(c);
        }
        let _ = writeln!(out, "{header}");
        for row in &self.rows {
            let _ = write!(out, "{}", row.parameter);
            for v in &row.values {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r.values[idx]).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    fn check_finite(&self) -> Result<()> {
        for row in &self.rows {
            if !row.parameter.is_finite() || row.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "sweep {} at parameter {}",
                    self.label, row.parameter
                )));
            }
        }
        Ok(())
    }
}

/// Floor below which a metric sequence counts as degenerate: when every
/// value is this small the quantities compared are equal to solver
/// accuracy and decrease verdicts pass vacuously (the zero-data case, and
/// control gaps when both optima coincide).
pub const DEGENERATE_STATE_FLOOR: f64 = 1e-12;
pub const DEGENERATE_COST_FLOOR: f64 = 1e-8;

/// Relative decay demanded from the last sweep value against the first.
pub const REL_TOL_H: f64 = 0.05;

/// Strict decrease across consecutive values, except that pairs already
/// below the floor pass.
pub fn strictly_decreasing(values: &[f64], floor: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] <= floor && w[1] <= floor))
    }

/// Final-over-initial decay test with the same degenerate escape.
pub fn decays_to_fraction(values: &[f64], rel: f64, floor: f64) -> bool {
    match (values.first(), values.last()) {
        (Some(&first), Some(&last)) => last <= rel * first || last <= floor,
        _ => false,
    }
}

/// Shared solver/optimizer configuration of a laboratory run.
#[derive(Clone, Debug)]
pub struct LabConfig {
    pub nx: usize,
    pub ny: usize,
    pub data: ProblemData,
    pub newton: NewtonParams,
    pub opt: OptParams,
    pub h_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    /// Coercivity constant used for the λ_h = λ₁·min(1,h) annotation.
    pub lambda1: f64,
    pub config_echo: String,
}

impl LabConfig {
    /// The default experiment configuration: a desk-scale run that
    /// exhibits nontrivial slip on the friction edge and visible Robin
    /// convergence within seconds.
    pub fn paper_suite() -> LabConfig {
        LabConfig {
            nx: 8,
            ny: 8,
            data: ProblemData {
                g: crate::assembly::Profile::Const(1.0),
                b: crate::assembly::Profile::Const(0.0),
                u_b: crate::assembly::Profile::Const(0.0),
                q: 0.1,
                t_final: 1.0,
                n_steps: 16,
                m_reg: 1.0,
                eps: 1e-2,
            },
            newton: NewtonParams::default(),
            opt: OptParams::default(),
            h_list: vec![1.0, 10.0, 100.0, 1000.0],
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            lambda1: 1.0,
            config_echo: String::from("defaults"),
        }
    }

    pub fn build(&self) -> Result<(Mesh, AssembledOperators)> {
        let mesh = Mesh::unit_square(self.nx, self.ny)?;
        let ops = crate::assembly::assemble_all(&mesh)?;
        self.data.validate()?;
        self.data.check_compatibility(&mesh)?;
        Ok((mesh, ops))
    }
}

fn enforce_sign_hypotheses(data: &ProblemData, controls: &[&BoundaryControl]) -> Result<()> {
    if data.g.min_value() < 0.0 || data.b.min_value() < 0.0 || data.u_b.min_value() < 0.0 {
        return Err(Error::Hypothesis(format!(
            "this check requires g ≥ 0, b ≥ 0 and u_b ≥ 0; got g={}, b={}, u_b={}",
            data.g, data.b, data.u_b
        )));
    }
    for control in controls {
        if !control.is_nonpositive() {
            return Err(Error::Hypothesis(format!(
                "this check requires nonpositive controls; max value {}",
                control.max_value()
            )));
        }
    }
    Ok(())
}

fn elapsed_s(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// Solve the state at each ε of a strictly decreasing list and report the
/// Cauchy differences between consecutive solutions.
pub fn sweep_eps(cfg: &LabConfig, control: &BoundaryControl, eps_list: &[f64]) -> Result<SweepReport> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two regularization values".into(),
        ));
    }
    if !eps_list.windows(2).all(|w| w[1] < w[0]) || eps_list.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter(
            "regularization values must be strictly decreasing and positive".into(),
        ));
    }

    let (mesh, ops) = cfg.build()?;
    let jobs: Vec<(f64, Result<(StateTrajectory, f64)>)> = eps_list
        .par_iter()
        .map(|&eps| {
            let start = std::time::Instant::now();
            let mut data = cfg.data.clone();
            data.eps = eps;
            let traj = solve_state(&mesh, &ops, &data, control, Variant::Dirichlet, &cfg.newton);
            (eps, traj.map(|t| (t, elapsed_s(start))))
        })
        .collect();

    let mut trajectories = Vec::with_capacity(eps_list.len());
    let mut runtimes = Vec::with_capacity(eps_list.len());
    for (_, job) in jobs {
        let (traj, rt) = job?;
        trajectories.push(traj);
        runtimes.push(rt);
    }

    let dt = cfg.data.dt();
    let mut rows = Vec::new();
    for k in 0..eps_list.len() - 1 {
        let diff = trajectories[k].difference(&trajectories[k + 1]);
        rows.push(SweepRow {
            parameter: eps_list[k],
            values: vec![
                eps_list[k + 1],
                norm_space_time_h1(&diff, &ops, dt),
                norm_max_l2(&diff, &ops),
            ],
        });
    }

    let cauchy_h1: Vec<f64> = rows.iter().map(|r| r.values[1]).collect();
    let cauchy_max: Vec<f64> = rows.iter().map(|r| r.values[2]).collect();
    let verdicts = vec![
        Verdict::new(
            "eps-cauchy-h1-decreasing",
            strictly_decreasing(&cauchy_h1, DEGENERATE_STATE_FLOOR),
            format!("{cauchy_h1:?}"),
        ),
        Verdict::new(
            "eps-cauchy-maxl2-decreasing",
            strictly_decreasing(&cauchy_max, DEGENERATE_STATE_FLOOR),
            format!("{cauchy_max:?}"),
        ),
    ];

    let report = SweepReport {
        label: "sweep_eps".into(),
        parameter_name: "eps_coarse".into(),
        columns: vec!["eps_fine".into(), "cauchy_h1".into(), "cauchy_max_l2".into()],
        rows,
        verdicts,
        runtimes_s: runtimes,
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}

/// Errors of the Robin state against the Dirichlet state for one fixed
/// control, along an increasing list of penalty coefficients.
pub fn sweep_h_fixed_control(
    cfg: &LabConfig,
    control: &BoundaryControl,
    h_list: &[f64],
) -> Result<SweepReport> {
    validate_h_list(h_list)?;
    let (mesh, ops) = cfg.build()?;
    let dt = cfg.data.dt();

    let dirichlet = solve_state(&mesh, &ops, &cfg.data, control, Variant::Dirichlet, &cfg.newton)?;

    let jobs: Vec<Result<(StateTrajectory, f64)>> = h_list
        .par_iter()
        .map(|&h| {
            let start = std::time::Instant::now();
            solve_state(&mesh, &ops, &cfg.data, control, Variant::Robin { h }, &cfg.newton)
                .map(|t| (t, elapsed_s(start)))
        })
        .collect();

    let mut rows = Vec::new();
    let mut runtimes = Vec::new();
    for (&h, job) in h_list.iter().zip(jobs) {
        let (robin, rt) = job?;
        runtimes.push(rt);
        let metrics = state_gap_metrics(&robin, &dirichlet, &ops, dt);
        rows.push(SweepRow {
            parameter: h,
            values: vec![
                crate::assembly::coercivity_lower_bound(h, cfg.lambda1)?,
                metrics.err_h1,
                metrics.err_max_l2,
                metrics.err_trace_gamma1,
            ],
        });
    }

    let err_h1: Vec<f64> = rows.iter().map(|r| r.values[1]).collect();
    let err_max: Vec<f64> = rows.iter().map(|r| r.values[2]).collect();
    let err_trace: Vec<f64> = rows.iter().map(|r| r.values[3]).collect();
    let verdicts = vec![
        Verdict::new(
            "h-fixed-h1-decreasing",
            strictly_decreasing(&err_h1, DEGENERATE_STATE_FLOOR),
            format!("{err_h1:?}"),
        ),
        Verdict::new(
            "h-fixed-h1-decay",
            decays_to_fraction(&err_h1, REL_TOL_H, DEGENERATE_STATE_FLOOR),
            format!("first {} last {}", err_h1[0], err_h1[err_h1.len() - 1]),
        ),
        Verdict::new(
            "h-fixed-maxl2-decreasing",
            strictly_decreasing(&err_max, DEGENERATE_STATE_FLOOR),
            format!("{err_max:?}"),
        ),
        Verdict::new(
            "h-fixed-trace-decreasing",
            strictly_decreasing(&err_trace, DEGENERATE_STATE_FLOOR),
            format!("{err_trace:?}"),
        ),
    ];

    let report = SweepReport {
        label: "sweep_h_fixed_control".into(),
        parameter_name: "h".into(),
        columns: vec![
            "lambda_h".into(),
            "err_h1".into(),
            "err_max_l2".into(),
            "err_trace_gamma1".into(),
        ],
        rows,
        verdicts,
        runtimes_s: runtimes,
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}

fn validate_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two penalty coefficients".into(),
        ));
    }
    if !h_list.windows(2).all(|w| w[1] > w[0]) || h_list.iter().any(|&h| h <= 0.0) {
        return Err(Error::InvalidParameter(
            "penalty coefficients must be strictly increasing and positive".into(),
        ));
    }
    Ok(())
}

/// Gap metrics between a Robin trajectory and the Dirichlet reference.
pub struct StateGapMetrics {
    pub err_h1: f64,
    pub err_max_l2: f64,
    pub err_trace_gamma1: f64,
    pub err_trace_boundary: f64,
}

/// All gap norms between two trajectories, including the full-boundary
/// trace assembled from the three tagged parts.
pub fn state_gap_metrics(
    robin: &StateTrajectory,
    dirichlet: &StateTrajectory,
    ops: &AssembledOperators,
    dt: f64,
) -> StateGapMetrics {
    let diff = robin.difference(dirichlet);
    let t1 = norm_trace(&diff, &ops.gamma1, dt);
    let t2 = norm_trace(&diff, &ops.gamma2, dt);
    let t3 = norm_trace(&diff, &ops.gamma3, dt);
    StateGapMetrics {
        err_h1: norm_space_time_h1(&diff, ops, dt),
        err_max_l2: norm_max_l2(&diff, ops),
        err_trace_gamma1: t1,
        err_trace_boundary: (t1 * t1 + t2 * t2 + t3 * t3).sqrt(),
    }
}

/// Rich result of the optimal-control penalty sweep: the CSV-facing
/// report, the full-boundary trace report derived from the same solves,
/// and the raw optimizer outputs for downstream consistency checks.
pub struct HOptimalSweep {
    pub report: SweepReport,
    pub trace_report: SweepReport,
    pub dirichlet: OptimizationResult,
    pub robin: Vec<(f64, OptimizationResult)>,
}

/// Optimize for every Robin(h) and once for the Dirichlet problem; report
/// control gaps, state gaps and cost gaps against the Dirichlet optimum.
pub fn sweep_h_optimal(cfg: &LabConfig, h_list: &[f64]) -> Result<HOptimalSweep> {
    validate_h_list(h_list)?;
    let (mesh, ops) = cfg.build()?;
    let dt = cfg.data.dt();
    let f_init = BoundaryControl::zeros(cfg.data.n_steps, ops.gamma3.len());
    enforce_sign_hypotheses(&cfg.data, &[&f_init])?;

    let dirichlet = optimize(
        &mesh,
        &ops,
        &cfg.data,
        Variant::Dirichlet,
        &f_init,
        &cfg.newton,
        &cfg.opt,
    )?;

    let jobs: Vec<Result<(OptimizationResult, f64)>> = h_list
        .par_iter()
        .map(|&h| {
            let start = std::time::Instant::now();
            optimize(
                &mesh,
                &ops,
                &cfg.data,
                Variant::Robin { h },
                &f_init,
                &cfg.newton,
                &cfg.opt,
            )
            .map(|r| (r, elapsed_s(start)))
        })
        .collect();

    let mut robin = Vec::new();
    let mut runtimes = Vec::new();
    let mut rows = Vec::new();
    let mut trace_rows = Vec::new();
    let mut all_converged = true;

    for (&h, job) in h_list.iter().zip(jobs) {
        let (result, rt) = job?;
        runtimes.push(rt);
        all_converged &= result.converged;

        let f_gap = norm_control(
            &result.f_opt.axpy(-1.0, &dirichlet.f_opt),
            &ops.gamma3,
            dt,
        );
        let metrics = state_gap_metrics(&result.state_opt, &dirichlet.state_opt, &ops, dt);
        let cost_gap = (result.cost - dirichlet.cost).abs();

        rows.push(SweepRow {
            parameter: h,
            values: vec![
                crate::assembly::coercivity_lower_bound(h, cfg.lambda1)?,
                f_gap,
                metrics.err_h1,
                metrics.err_max_l2,
                metrics.err_trace_gamma1,
                cost_gap,
                result.cost,
                if result.converged { 1.0 } else { 0.0 },
            ],
        });
        trace_rows.push(SweepRow {
            parameter: h,
            values: vec![metrics.err_trace_boundary, metrics.err_trace_gamma1],
        });
        robin.push((h, result));
    }

    let f_gaps: Vec<f64> = rows.iter().map(|r| r.values[1]).collect();
    let state_h1: Vec<f64> = rows.iter().map(|r| r.values[2]).collect();
    let cost_gaps: Vec<f64> = rows.iter().map(|r| r.values[5]).collect();
    let f_floor = 10.0 * cfg.opt.tol;
    let cost_rel_limit = if dirichlet.cost < 1e-6 {
        DEGENERATE_COST_FLOOR
    } else {
        0.01 * dirichlet.cost
    };

    let verdicts = vec![
        Verdict::new("h-optimal-all-converged", all_converged, ""),
        Verdict::new(
            "h-optimal-fgap-decreasing",
            strictly_decreasing(&f_gaps, f_floor),
            format!("{f_gaps:?}"),
        ),
        Verdict::new(
            "h-optimal-fgap-decay",
            decays_to_fraction(&f_gaps, REL_TOL_H, f_floor),
            format!("first {} last {}", f_gaps[0], f_gaps[f_gaps.len() - 1]),
        ),
        Verdict::new(
            "h-optimal-state-decreasing",
            strictly_decreasing(&state_h1, DEGENERATE_STATE_FLOOR),
            format!("{state_h1:?}"),
        ),
        Verdict::new(
            "h-optimal-state-decay",
            decays_to_fraction(&state_h1, REL_TOL_H, DEGENERATE_STATE_FLOOR),
            format!("first {} last {}", state_h1[0], state_h1[state_h1.len() - 1]),
        ),
        Verdict::new(
            "h-optimal-costgap-decreasing",
            strictly_decreasing(&cost_gaps, DEGENERATE_COST_FLOOR),
            format!("{cost_gaps:?}"),
        ),
        Verdict::new(
            "h-optimal-costgap-decay",
            cost_gaps.last().map(|&g| g < cost_rel_limit).unwrap_or(false),
            format!(
                "final gap {} vs limit {}",
                cost_gaps[cost_gaps.len() - 1],
                cost_rel_limit
            ),
        ),
    ];

    let trace_errors: Vec<f64> = trace_rows.iter().map(|r| r.values[0]).collect();
    let trace_verdicts = vec![Verdict::new(
        "trace-boundary-decreasing",
        strictly_decreasing(&trace_errors, DEGENERATE_STATE_FLOOR),
        format!("{trace_errors:?}"),
    )];

    let report = SweepReport {
        label: "sweep_h_optimal".into(),
        parameter_name: "h".into(),
        columns: vec![
            "lambda_h".into(),
            "f_gap".into(),
            "state_err_h1".into(),
            "state_err_max_l2".into(),
            "state_err_trace_gamma1".into(),
            "cost_gap".into(),
            "cost_robin".into(),
            "converged".into(),
        ],
        rows,
        verdicts,
        runtimes_s: runtimes.clone(),
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;

    let trace_report = SweepReport {
        label: "trace_convergence_check".into(),
        parameter_name: "h".into(),
        columns: vec!["err_trace_boundary".into(), "err_trace_gamma1".into()],
        rows: trace_rows,
        verdicts: trace_verdicts,
        runtimes_s: runtimes,
        config_echo: cfg.config_echo.clone(),
    };
    trace_report.check_finite()?;

    Ok(HOptimalSweep {
        report,
        trace_report,
        dirichlet,
        robin,
    })
}

/// Full-boundary trace convergence of the optimally controlled Robin
/// states against the optimally controlled Dirichlet state.
pub fn trace_convergence_check(cfg: &LabConfig, h_list: &[f64]) -> Result<SweepReport> {
    Ok(sweep_h_optimal(cfg, h_list)?.trace_report)
}

/// Convexity gap report: for each μ the gap
/// μJ(f₁)+(1−μ)J(f₂)−J(μf₁+(1−μ)f₂) against its certified lower bounds.
pub fn convexity_check(
    cfg: &LabConfig,
    f1: &BoundaryControl,
    f2: &BoundaryControl,
    mu_list: &[f64],
) -> Result<SweepReport> {
    enforce_sign_hypotheses(&cfg.data, &[f1, f2])?;
    let (mesh, ops) = cfg.build()?;
    let dt = cfg.data.dt();

    let start = std::time::Instant::now();
    let traj1 = solve_state(&mesh, &ops, &cfg.data, f1, Variant::Dirichlet, &cfg.newton)?;
    let traj2 = solve_state(&mesh, &ops, &cfg.data, f2, Variant::Dirichlet, &cfg.newton)?;
    let j1 = crate::control::cost_of_state(&ops, &cfg.data, f1, &traj1);
    let j2 = crate::control::cost_of_state(&ops, &cfg.data, f2, &traj2);

    let state_diff = traj1.difference(&traj2);
    let state_gap_sq = norm_space_time(&state_diff, &ops, dt).powi(2);
    let control_gap_sq = norm_control(&f1.axpy(-1.0, f2), &ops.gamma3, dt).powi(2);

    let tol_convex = 1e-10 * (1.0f64).max(j1.abs() + j2.abs());

    let mut rows = Vec::new();
    let mut pass_full = true;
    let mut pass_control = true;
    for &mu in mu_list {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "blend weight must lie in [0,1], got {mu}"
            )));
        }
        let f_blend = f1.blend(mu, f2);
        let traj_blend = solve_state(&mesh, &ops, &cfg.data, &f_blend, Variant::Dirichlet, &cfg.newton)?;
        let j_blend = crate::control::cost_of_state(&ops, &cfg.data, &f_blend, &traj_blend);
        let gap = mu * j1 + (1.0 - mu) * j2 - j_blend;
        let bound_control = 0.5 * cfg.data.m_reg * mu * (1.0 - mu) * control_gap_sq;
        let bound_full = bound_control + 0.5 * mu * (1.0 - mu) * state_gap_sq;
        pass_control &= gap >= bound_control - tol_convex;
        pass_full &= gap >= bound_full - tol_convex;
        rows.push(SweepRow {
            parameter: mu,
            values: vec![j1, j2, j_blend, gap, bound_control, bound_full],
        });
    }

    let verdicts = vec![
        Verdict::new(
            "convexity-gap-above-control-bound",
            pass_control,
            format!("tol {tol_convex:e}"),
        ),
        Verdict::new(
            "convexity-gap-above-full-bound",
            pass_full,
            format!("tol {tol_convex:e}"),
        ),
    ];

    let report = SweepReport {
        label: "convexity_check".into(),
        parameter_name: "mu".into(),
        columns: vec![
            "cost_f1".into(),
            "cost_f2".into(),
            "cost_blend".into(),
            "gap".into(),
            "bound_control".into(),
            "bound_full".into(),
        ],
        rows,
        verdicts,
        runtimes_s: vec![elapsed_s(start)],
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}

/// Ordering tolerance for the comparison checks.
pub const TOL_ORDER: f64 = 1e-8;

/// Nodal ordering check: the state of a blended control stays nonnegative
/// and below the blend of the states, at every node and level.
pub fn monotonicity_check(
    cfg: &LabConfig,
    f1: &BoundaryControl,
    f2: &BoundaryControl,
    mu_list: &[f64],
) -> Result<SweepReport> {
    enforce_sign_hypotheses(&cfg.data, &[f1, f2])?;
    let (mesh, ops) = cfg.build()?;

    let start = std::time::Instant::now();
    let traj1 = solve_state(&mesh, &ops, &cfg.data, f1, Variant::Dirichlet, &cfg.newton)?;
    let traj2 = solve_state(&mesh, &ops, &cfg.data, f2, Variant::Dirichlet, &cfg.newton)?;

    let mut rows = Vec::new();
    let mut pass = true;
    for &mu in mu_list {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "blend weight must lie in [0,1], got {mu}"
            )));
        }
        let f_blend = f1.blend(mu, f2);
        let combined = solve_state(&mesh, &ops, &cfg.data, &f_blend, Variant::Dirichlet, &cfg.newton)?;

        let mut min_combined = f64::INFINITY;
        let mut min_margin = f64::INFINITY;
        for level in 0..combined.u.len() {
            for node in 0..ops.n_nodes {
                let blended = mu * traj1.u[level][node] + (1.0 - mu) * traj2.u[level][node];
                min_combined = min_combined.min(combined.u[level][node]);
                min_margin = min_margin.min(blended - combined.u[level][node]);
            }
        }
        pass &= min_combined >= -TOL_ORDER && min_margin >= -TOL_ORDER;
        rows.push(SweepRow {
            parameter: mu,
            values: vec![min_combined, min_margin],
        });
    }

    let verdicts = vec![Verdict::new(
        "ordering-nonnegative-and-dominated",
        pass,
        format!("tolerance {TOL_ORDER:e}"),
    )];

    let report = SweepReport {
        label: "monotonicity_check".into(),
        parameter_name: "mu".into(),
        columns: vec!["min_combined".into(), "min_blend_minus_combined".into()],
        rows,
        verdicts,
        runtimes_s: vec![elapsed_s(start)],
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}

/// Nonnegativity tolerance of the maximum-principle check.
pub const TOL_MAX_PRINCIPLE: f64 = 1e-10;

/// Weak maximum principle: under nonnegative data and nonpositive control
/// the state stays nonnegative at every node and level.
pub fn max_principle_check(cfg: &LabConfig, control: &BoundaryControl) -> Result<SweepReport> {
    enforce_sign_hypotheses(&cfg.data, &[control])?;
    let (mesh, ops) = cfg.build()?;

    let start = std::time::Instant::now();
    let traj = solve_state(&mesh, &ops, &cfg.data, control, Variant::Dirichlet, &cfg.newton)?;
    let min_value = traj.min_value();

    let report = SweepReport {
        label: "max_principle_check".into(),
        parameter_name: "check".into(),
        columns: vec!["min_value".into(), "tolerance".into(), "levels".into(), "nodes".into()],
        rows: vec![SweepRow {
            parameter: 0.0,
            values: vec![
                min_value,
                TOL_MAX_PRINCIPLE,
                traj.u.len() as f64,
                ops.n_nodes as f64,
            ],
        }],
        verdicts: vec![Verdict::new(
            "state-nonnegative",
            min_value >= -TOL_MAX_PRINCIPLE,
            format!("min nodal value {min_value:e}"),
        )],
        runtimes_s: vec![elapsed_s(start)],
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}

/// Compare the regularized Newton path against the exact coordinate
/// descent oracle along a decreasing list of regularization parameters.
/// Reports the trajectory ∞-errors and their consecutive ratios.
pub fn oracle_eps_comparison(
    cfg: &LabConfig,
    control: &BoundaryControl,
    eps_list: &[f64],
) -> Result<SweepReport> {
    let (mesh, ops) = cfg.build()?;
    let start = std::time::Instant::now();
    let reference = oracle_state_trajectory(&mesh, &ops, &cfg.data, control, Variant::Dirichlet)?;

    let mut errors = Vec::new();
    let mut errors_max_l2 = Vec::new();
    for &eps in eps_list {
        let mut data = cfg.data.clone();
        data.eps = eps;
        let traj = solve_state(&mesh, &ops, &data, control, Variant::Dirichlet, &cfg.newton)?;
        let mut worst = 0.0f64;
        let diff: Vec<Vec<f64>> = traj
            .u
            .iter()
            .zip(&reference)
            .map(|(level, oracle_level)| {
                level
                    .iter()
                    .zip(oracle_level)
                    .map(|(a, b)| {
                        worst = worst.max((a - b).abs());
                        a - b
                    })
                    .collect()
            })
            .collect();
        errors.push(worst);
        errors_max_l2.push(norm_max_l2(&diff, &ops));
    }

    let degenerate = errors.iter().all(|&e| e <= 1e-15);
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for (k, &eps) in eps_list.iter().enumerate() {
        let ratio = if k == 0 || degenerate {
            0.0
        } else {
            errors[k - 1] / errors[k]
        };
        if k > 0 {
            ratios.push(ratio);
        }
        rows.push(SweepRow {
            parameter: eps,
            // the last column reports the observed constant of the linear
            // error model err ≈ C·eps in the max-in-time L2 norm
            values: vec![errors[k], ratio, errors_max_l2[k], errors_max_l2[k] / eps],
        });
    }

    let decreasing = strictly_decreasing(&errors, 1e-15);
    let halving = degenerate || ratios.iter().all(|&r| (1.6..=2.4).contains(&r));
    let verdicts = vec![
        Verdict::new(
            "oracle-error-decreasing",
            decreasing,
            format!("{errors:?}"),
        ),
        Verdict::new(
            "oracle-error-halving",
            halving,
            format!("ratios {ratios:?}"),
        ),
    ];

    let report = SweepReport {
        label: "oracle_compare".into(),
        parameter_name: "eps".into(),
        columns: vec![
            "linf_error".into(),
            "ratio_to_prev".into(),
            "max_l2_error".into(),
            "observed_constant".into(),
        ],
        rows,
        verdicts,
        runtimes_s: vec![elapsed_s(start)],
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}

/// Central finite-difference check of the adjoint gradient at randomly
/// chosen control coordinates. The perturbed cost evaluations use a
/// tightened Newton tolerance so the difference quotient is resolved well
/// below the comparison threshold.
pub fn gradient_fd_check(
    cfg: &LabConfig,
    control: &BoundaryControl,
    coords: &[(usize, usize)],
    delta: f64,
) -> Result<SweepReport> {
    let (mesh, ops) = cfg.build()?;
    let dt = cfg.data.dt();
    let start = std::time::Instant::now();

    let mut newton = cfg.newton;
    newton.tol = newton.tol.min(1e-12);

    let gradient = crate::control::reduced_gradient(
        &mesh,
        &ops,
        &cfg.data,
        control,
        Variant::Dirichlet,
        &newton,
    )?;

    let mut rows = Vec::new();
    let mut worst_rel = 0.0f64;
    for &(level, node_pos) in coords {
        if level == 0 || level > cfg.data.n_steps || node_pos >= ops.gamma3.len() {
            return Err(Error::InvalidParameter(format!(
                "coordinate (level {level}, node {node_pos}) out of range"
            )));
        }
        let mut plus = control.clone();
        plus.values[level - 1][node_pos] += delta;
        let mut minus = control.clone();
        minus.values[level - 1][node_pos] -= delta;

        let j_plus = crate::control::cost(&mesh, &ops, &cfg.data, &plus, Variant::Dirichlet, &newton)?;
        let j_minus = crate::control::cost(&mesh, &ops, &cfg.data, &minus, Variant::Dirichlet, &newton)?;
        let fd = (j_plus - j_minus) / (2.0 * delta);

        // directional derivative in the control inner product against the
        // coordinate direction
        let analytic = dt * ops.gamma3.weights[node_pos] * gradient.values[level - 1][node_pos];
        let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1e-12);
        worst_rel = worst_rel.max(rel);
        rows.push(SweepRow {
            parameter: level as f64,
            values: vec![node_pos as f64, fd, analytic, rel],
        });
    }

    let report = SweepReport {
        label: "gradcheck".into(),
        parameter_name: "time_level".into(),
        columns: vec![
            "node_position".into(),
            "fd_value".into(),
            "adjoint_value".into(),
            "rel_error".into(),
        ],
        rows,
        verdicts: vec![Verdict::new(
            "gradient-matches-finite-differences",
            worst_rel < 1e-4,
            format!("worst relative error {worst_rel:e}"),
        )],
        runtimes_s: vec![elapsed_s(start)],
        config_echo: cfg.config_echo.clone(),
    };
    report.check_finite()?;
    Ok(report)
}
