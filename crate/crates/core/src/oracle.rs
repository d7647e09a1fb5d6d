//! Independent dense solver for the exact (ε = 0) per-step minimization
//!
//!   F(x) = ½ xᵀA x − cᵀx + Σᵢ τᵢ|xᵢ|,
//!
//! by cyclic coordinate descent with closed-form soft-threshold updates.
//! Deliberately slow and dense: its only job is to cross-validate the
//! sparse Newton path on small meshes, so it shares nothing with it beyond
//! the assembled matrix entries that define the common discrete functional.
//! Single-threaded by design; callers may run several instances on
//! disjoint problems.

use crate::assembly::{AssembledOperators, ProblemData};
use crate::error::{Error, Result};
use crate::state::{BoundaryControl, StepContext, Variant};

/// Dense per-step problem with the essential boundary condition already
/// folded in: pinned rows are identity rows with the datum on the right
/// hand side and no nonsmooth weight.
#[derive(Clone, Debug)]
pub struct DenseStepProblem {
    pub n: usize,
    /// Row-major symmetric positive definite matrix.
    pub matrix: Vec<f64>,
    /// Linear term.
    pub linear: Vec<f64>,
    /// Per-node nonsmooth weights: τᵢ = wᵢ·q on free Γ₂ nodes, 0 elsewhere.
    pub tau: Vec<f64>,
}

impl DenseStepProblem {
    /// Build the dense eliminated system for one backward-Euler step.
    pub fn from_step(
        ops: &AssembledOperators,
        data: &ProblemData,
        ctx: &StepContext,
        u_prev: &[f64],
        f_step: &[f64],
    ) -> DenseStepProblem {
        let n = ops.n_nodes;
        let load = ctx.step_load(u_prev, f_step);

        let mut matrix = vec![0.0; n * n];
        let mut linear = vec![0.0; n];
        for i in 0..n {
            if ctx.dirichlet_mask[i] {
                matrix[i * n + i] = 1.0;
                linear[i] = ctx.datum[i];
            } else {
                linear[i] = load[i];
                for (j, v) in ctx.system.row(i) {
                    if ctx.dirichlet_mask[j] {
                        // lift: move the coupling to the pinned value into
                        // the linear term
                        linear[i] -= v * ctx.datum[j];
                    } else {
                        matrix[i * n + j] = v;
                    }
                }
            }
        }

        let mut tau = vec![0.0; n];
        for (k, &i) in ops.gamma2.nodes.iter().enumerate() {
            if !ctx.dirichlet_mask[i] {
                tau[i] = ops.gamma2.weights[k] * data.q;
            }
        }

        DenseStepProblem {
            n,
            matrix,
            linear,
            tau,
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let mut quad = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self.matrix[i * self.n + j] * x[j];
            }
            quad += x[i] * row;
        }
        let lin: f64 = self.linear.iter().zip(x).map(|(c, v)| c * v).sum();
        let nonsmooth: f64 = self.tau.iter().zip(x).map(|(t, v)| t * v.abs()).sum();
        0.5 * quad - lin + nonsmooth
    }

    /// Largest violation of the subdifferential optimality condition at x:
    /// for xᵢ ≠ 0 the smooth residual must cancel τᵢ·sign(xᵢ); for xᵢ = 0
    /// it must lie within [−τᵢ, τᵢ].
    pub fn optimality_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let mut grad = -self.linear[i];
            for j in 0..self.n {
                grad += self.matrix[i * self.n + j] * x[j];
            }
            let v = if x[i] != 0.0 {
                (grad + self.tau[i] * x[i].signum()).abs()
            } else {
                (grad.abs() - self.tau[i]).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }
}

/// Exact minimizer of ½a·x² − c·x + τ|x| for a > 0, τ ≥ 0.
pub fn soft_threshold_update(a: f64, c: f64, tau: f64) -> f64 {
    debug_assert!(a > 0.0 && tau >= 0.0);
    c.signum() * (c.abs() - tau).max(0.0) / a
}

const SWEEP_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100_000;

/// Cyclic coordinate descent from the origin until the sweep ∞-change
/// drops below 1e-12. The objective is strictly convex with a separable
/// nonsmooth part, so this converges to the unique global minimizer; the
/// objective is additionally asserted non-increasing every sweep.
pub fn solve_step_oracle(prob: &DenseStepProblem) -> Result<Vec<f64>> {
    let n = prob.n;
    let mut x = vec![0.0; n];
    let mut objective = prob.objective(&x);

    for _sweep in 0..MAX_SWEEPS {
        let mut change = 0.0f64;
        for i in 0..n {
            let a = prob.matrix[i * n + i];
            let mut off = 0.0;
            for j in 0..n {
                if j != i {
                    off += prob.matrix[i * n + j] * x[j];
                }
            }
            let c = prob.linear[i] - off;
            let updated = soft_threshold_update(a, c, prob.tau[i]);
            change = change.max((updated - x[i]).abs());
            x[i] = updated;
        }

        let new_objective = prob.objective(&x);
        if new_objective > objective + 1e-12 * (1.0 + objective.abs()) {
            return Err(Error::NonFinite(format!(
                "coordinate descent objective increased: {objective} -> {new_objective}"
            )));
        }
        objective = new_objective;

        if change < SWEEP_TOL {
            return Ok(x);
        }
    }

    Err(Error::SweepBudgetExhausted {
        sweeps: MAX_SWEEPS,
        change: f64::NAN,
    })
}

/// March a full trajectory with the oracle stepper: the exact ε = 0
/// reference path for regularization studies.
pub fn oracle_state_trajectory(
    mesh: &crate::mesh::Mesh,
    ops: &AssembledOperators,
    data: &ProblemData,
    control: &BoundaryControl,
    variant: Variant,
) -> Result<Vec<Vec<f64>>> {
    data.validate()?;
    data.check_compatibility(mesh)?;
    let ctx = StepContext::new(mesh, ops, data, variant);
    let mut levels = Vec::with_capacity(data.n_steps + 1);
    levels.push(data.u_b.eval_nodes(mesh));
    for n in 1..=data.n_steps {
        let prob = DenseStepProblem::from_step(ops, data, &ctx, &levels[n - 1], &control.values[n - 1]);
        let x = solve_step_oracle(&prob)?;
        let violation = prob.optimality_violation(&x);
        if violation > 1e-8 {
            return Err(Error::NonFinite(format!(
                "oracle certificate violated at level {n}: {violation:e}"
            )));
        }
        levels.push(x);
    }
    Ok(levels)
}
