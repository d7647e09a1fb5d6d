//! Discrete state problems: backward-Euler time stepping where every step
//! is a strictly convex minimization
//!
//!   E(v) = (1/2Δt)(v−u_prev)ᵀM(v−u_prev) + ½ vᵀA v + Φ_ε(v|_{Γ₂})
//!          − gᵀM v + Σ_{Γ₃} wᵢ fᵢ vᵢ − [Robin] h Σ_{Γ₁} wᵢ bᵢ vᵢ,
//!
//! with A the stiffness (Dirichlet variant, minimized over vectors pinned
//! to the datum on Γ₁) or stiffness + h·(lumped Γ₁ mass) (Robin variant,
//! unconstrained). The stationarity condition of this minimization is the
//! backward-Euler discretization of the governing variational inequality
//! with the friction term smoothed by ε.
//!
//! Each step is solved by Newton's method with the diagonal regularization
//! Hessian, falling back to Armijo backtracking if a full step fails to
//! decrease the energy.
//!
//! `solve_state` is a pure function of its inputs; concurrent solves may
//! share the same immutable mesh and operators.

use crate::assembly::{phi_eps, AssembledOperators, ProblemData};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::{dot, inf_norm, BandedCholesky, CsrMatrix};

/// Which boundary condition holds on Γ₁.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    /// State pinned to the datum b on Γ₁.
    Dirichlet,
    /// Flux condition −∂u/∂n = h(u−b) on Γ₁.
    Robin { h: f64 },
}

impl Variant {
    pub fn robin_coefficient(&self) -> Option<f64> {
        match self {
            Variant::Dirichlet => None,
            Variant::Robin { h } => Some(*h),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Dirichlet => write!(f, "dirichlet"),
            Variant::Robin { h } => write!(f, "robin(h={h})"),
        }
    }
}

/// Control flux values on the Γ₃ nodes, one vector per time level 1..=n.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryControl {
    pub values: Vec<Vec<f64>>,
}

impl BoundaryControl {
    pub fn zeros(n_steps: usize, n_gamma3: usize) -> BoundaryControl {
        BoundaryControl {
            values: vec![vec![0.0; n_gamma3]; n_steps],
        }
    }

    pub fn constant(value: f64, n_steps: usize, n_gamma3: usize) -> BoundaryControl {
        BoundaryControl {
            values: vec![vec![value; n_gamma3]; n_steps],
        }
    }

    pub fn n_steps(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn is_nonpositive(&self) -> bool {
        self.values.iter().flatten().all(|&v| v <= 0.0)
    }

    /// Componentwise a + s·b.
    pub fn axpy(&self, s: f64, other: &BoundaryControl) -> BoundaryControl {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + s * y).collect())
            .collect();
        BoundaryControl { values }
    }

    pub fn blend(&self, mu: f64, other: &BoundaryControl) -> BoundaryControl {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| mu * x + (1.0 - mu) * y)
                    .collect()
            })
            .collect();
        BoundaryControl { values }
    }
}

/// Nodal state values at every time level 0..=n_steps.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTrajectory {
    pub u: Vec<Vec<f64>>,
    pub variant: Variant,
    pub eps_used: f64,
}

impl StateTrajectory {
    pub fn n_levels(&self) -> usize {
        self.u.len()
    }

    pub fn min_value(&self) -> f64 {
        self.u
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Levelwise difference self − other.
    pub fn difference(&self, other: &StateTrajectory) -> Vec<Vec<f64>> {
        assert_eq!(self.u.len(), other.u.len());
        self.u
            .iter()
            .zip(&other.u)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect()
    }

    /// Largest discrete H-norm of the backward difference quotients,
    /// max_n ‖(uₙ − uₙ₋₁)/Δt‖_M. Reported as a diagnostic only.
    pub fn difference_quotient_bound(&self, ops: &AssembledOperators, dt: f64) -> f64 {
        let mut worst = 0.0f64;
        for n in 1..self.u.len() {
            let dq: Vec<f64> = self.u[n]
                .iter()
                .zip(&self.u[n - 1])
                .map(|(a, b)| (a - b) / dt)
                .collect();
            worst = worst.max(ops.mass.quadratic_form(&dq).max(0.0).sqrt());
        }
        worst
    }
}

/// Newton iteration controls for the per-step minimization.
#[derive(Clone, Copy, Debug)]
pub struct NewtonParams {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            tol: 1e-10,
            max_iters: 50,
        }
    }
}

const ARMIJO_SLOPE: f64 = 1e-4;
const ARMIJO_FACTOR: f64 = 0.5;
const ARMIJO_MAX_BACKTRACKS: usize = 30;

/// Precomputed per-variant step operators, shared by all time levels of a
/// solve and by the adjoint solves of the same trajectory.
pub struct StepContext<'a> {
    pub ops: &'a AssembledOperators,
    pub data: &'a ProblemData,
    pub variant: Variant,
    /// M/Δt + A(variant), untouched rows.
    pub system: CsrMatrix,
    /// Same with Γ₁ rows/columns replaced by the identity for the Dirichlet
    /// variant (equals `system` for Robin).
    pub newton_matrix: CsrMatrix,
    /// True on Γ₁ nodes for the Dirichlet variant, all false for Robin.
    pub dirichlet_mask: Vec<bool>,
    /// Datum values scattered to full length (zeros off Γ₁).
    pub datum: Vec<f64>,
    /// Fixed part of the step linear term: M·g + [Robin] h·(w₁∘b).
    pub fixed_load: Vec<f64>,
}

impl<'a> StepContext<'a> {
    pub fn new(
        mesh: &Mesh,
        ops: &'a AssembledOperators,
        data: &'a ProblemData,
        variant: Variant,
    ) -> StepContext<'a> {
        let n = ops.n_nodes;
        let dt = data.dt();

        let system = match variant {
            Variant::Dirichlet => {
                CsrMatrix::linear_combination(&[(1.0 / dt, &ops.mass), (1.0, &ops.stiff)])
            }
            Variant::Robin { h } => CsrMatrix::linear_combination(&[
                (1.0 / dt, &ops.mass),
                (1.0, &ops.stiff),
                (h, &ops.boundary_mass_gamma1),
            ]),
        };

        let mut dirichlet_mask = vec![false; n];
        if variant == Variant::Dirichlet {
            for &i in &ops.gamma1.nodes {
                dirichlet_mask[i] = true;
            }
        }
        let newton_matrix = match variant {
            Variant::Dirichlet => system.with_identity_rows(&dirichlet_mask),
            Variant::Robin { .. } => system.clone(),
        };

        let datum_on_gamma1: Vec<f64> = ops
            .gamma1
            .nodes
            .iter()
            .map(|&i| {
                let [x, y] = mesh.nodes[i];
                data.b.eval(x, y)
            })
            .collect();
        let datum = ops.gamma1.scatter(&datum_on_gamma1, n);

        let g_nodal = data.g.eval_nodes(mesh);
        let mut fixed_load = ops.mass.matvec(&g_nodal);
        if let Variant::Robin { h } = variant {
            for (k, &i) in ops.gamma1.nodes.iter().enumerate() {
                fixed_load[i] += h * ops.gamma1.weights[k] * datum_on_gamma1[k];
            }
        }

        StepContext {
            ops,
            data,
            variant,
            system,
            newton_matrix,
            dirichlet_mask,
            datum,
            fixed_load,
        }
    }

    /// Linear term of the step energy for a previous state and a control
    /// slice on Γ₃.
    pub fn step_load(&self, u_prev: &[f64], f_step: &[f64]) -> Vec<f64> {
        let dt = self.data.dt();
        let mut c = self.ops.mass.matvec(u_prev);
        for v in c.iter_mut() {
            *v /= dt;
        }
        for (ci, fi) in c.iter_mut().zip(&self.fixed_load) {
            *ci += fi;
        }
        for (k, &i) in self.ops.gamma3.nodes.iter().enumerate() {
            c[i] -= self.ops.gamma3.weights[k] * f_step[k];
        }
        c
    }

    fn energy(&self, v: &[f64], load: &[f64]) -> f64 {
        let quad = 0.5 * self.system.quadratic_form(v) - dot(load, v);
        let trace = self.ops.gamma2.gather(v);
        let phi = phi_eps(&trace, self.data, self.ops).expect("eps validated");
        quad + phi.value
    }
}

/// Solve one backward-Euler step: the unique minimizer of the regularized
/// step energy. Newton iteration with the diagonal friction Hessian,
/// Armijo backtracking when a full step fails to decrease the energy.
pub fn solve_step(
    ctx: &StepContext,
    u_prev: &[f64],
    f_step: &[f64],
    params: &NewtonParams,
) -> Result<Vec<f64>> {
    assert_eq!(f_step.len(), ctx.ops.gamma3.len());
    let n = ctx.ops.n_nodes;
    let load = ctx.step_load(u_prev, f_step);

    let mut v = u_prev.to_vec();
    for i in 0..n {
        if ctx.dirichlet_mask[i] {
            v[i] = ctx.datum[i];
        }
    }

    let mut history = Vec::with_capacity(params.max_iters);
    for _ in 0..params.max_iters {
        let trace = ctx.ops.gamma2.gather(&v);
        let phi = phi_eps(&trace, ctx.data, ctx.ops)?;

        let mut residual = ctx.system.matvec(&v);
        for (r, c) in residual.iter_mut().zip(&load) {
            *r -= c;
        }
        for (k, &i) in ctx.ops.gamma2.nodes.iter().enumerate() {
            residual[i] += phi.gradient[k];
        }
        for i in 0..n {
            if ctx.dirichlet_mask[i] {
                residual[i] = 0.0;
            }
        }

        let res_norm = inf_norm(&residual);
        history.push(res_norm);
        if res_norm < params.tol {
            return Ok(v);
        }

        let mut hess_diag = vec![0.0; n];
        for (k, &i) in ctx.ops.gamma2.nodes.iter().enumerate() {
            if !ctx.dirichlet_mask[i] {
                hess_diag[i] = phi.hessian_diag[k];
            }
        }
        let chol = BandedCholesky::factor(&ctx.newton_matrix, &hess_diag)?;
        let mut direction = chol.solve(&residual);
        for d in direction.iter_mut() {
            *d = -*d;
        }

        let slope = dot(&residual, &direction);
        let base_energy = ctx.energy(&v, &load);
        // once the predicted decrease falls below the rounding floor of the
        // energy the comparison is pure noise; the Hessian is SPD, so the
        // full Newton step is safe and quadratically convergent
        if slope.abs() <= 1e-13 * (1.0 + base_energy.abs()) {
            for (x, d) in v.iter_mut().zip(&direction) {
                *x += d;
            }
            continue;
        }
        let mut step = 1.0;
        let mut candidate: Vec<f64>;
        let mut backtracks = 0;
        loop {
            candidate = v
                .iter()
                .zip(&direction)
                .map(|(x, d)| x + step * d)
                .collect();
            if ctx.energy(&candidate, &load) <= base_energy + ARMIJO_SLOPE * step * slope {
                break;
            }
            backtracks += 1;
            if backtracks > ARMIJO_MAX_BACKTRACKS {
                // descent direction for an SPD Hessian: accept the last
                // (smallest) trial step rather than stall
                break;
            }
            step *= ARMIJO_FACTOR;
        }
        v = candidate;
    }

    Err(Error::NewtonNonConvergence {
        level: 0,
        iters: params.max_iters,
        history,
    })
}

/// Solve the full trajectory: interpolate the initial state, then march
/// `n_steps` backward-Euler steps.
pub fn solve_state(
    mesh: &Mesh,
    ops: &AssembledOperators,
    data: &ProblemData,
    control: &BoundaryControl,
    variant: Variant,
    params: &NewtonParams,
) -> Result<StateTrajectory> {
    data.validate()?;
    data.check_compatibility(mesh)?;
    if control.n_steps() != data.n_steps {
        return Err(Error::Mismatch(format!(
            "control has {} steps, expected {}",
            control.n_steps(),
            data.n_steps
        )));
    }
    for step in &control.values {
        if step.len() != ops.gamma3.len() {
            return Err(Error::Mismatch(format!(
                "control step has {} values, expected {} control nodes",
                step.len(),
                ops.gamma3.len()
            )));
        }
    }

    let ctx = StepContext::new(mesh, ops, data, variant);
    let mut levels = Vec::with_capacity(data.n_steps + 1);
    levels.push(data.u_b.eval_nodes(mesh));

    for n in 1..=data.n_steps {
        let u = solve_step(&ctx, &levels[n - 1], &control.values[n - 1], params).map_err(
            |e| match e {
                Error::NewtonNonConvergence { iters, history, .. } => {
                    Error::NewtonNonConvergence {
                        level: n,
                        iters,
                        history,
                    }
                }
                other => other,
            },
        )?;
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("state at time level {n}")));
        }
        levels.push(u);
    }

    Ok(StateTrajectory {
        u: levels,
        variant,
        eps_used: data.eps,
    })
}

/// Stick/slip classification of one Γ₂ node at one time level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrictionRegime {
    Stick,
    Slip,
}

#[derive(Clone, Debug)]
pub struct TrescaRow {
    pub level: usize,
    pub node: usize,
    pub trace_value: f64,
    /// Regularized boundary flux q·u/√(ε²+u²); bounded by q in magnitude.
    pub flux: f64,
    pub regime: FrictionRegime,
}

#[derive(Clone, Debug)]
pub struct TrescaReport {
    pub rows: Vec<TrescaRow>,
    pub max_abs_flux: f64,
    pub stick_tol: f64,
}

/// Classify every Γ₂ node at every solved time level. Below the stick
/// tolerance (10·ε) the regularization cannot resolve stick from slip, so
/// that band is reported as stick.
pub fn tresca_diagnostic(
    traj: &StateTrajectory,
    ops: &AssembledOperators,
    data: &ProblemData,
) -> TrescaReport {
    let stick_tol = 10.0 * traj.eps_used;
    let eps2 = traj.eps_used * traj.eps_used;
    let mut rows = Vec::new();
    let mut max_abs_flux = 0.0f64;
    for level in 1..traj.u.len() {
        for &node in &ops.gamma2.nodes {
            let u = traj.u[level][node];
            let flux = data.q * u / (eps2 + u * u).sqrt();
            max_abs_flux = max_abs_flux.max(flux.abs());
            let regime = if u.abs() < stick_tol {
                FrictionRegime::Stick
            } else {
                FrictionRegime::Slip
            };
            rows.push(TrescaRow {
                level,
                node,
                trace_value: u,
                flux,
                regime,
            });
        }
    }
    TrescaReport {
        rows,
        max_abs_flux,
        stick_tol,
    }
}
