//! Numerical laboratory for boundary flux control of parabolic problems
//! with Tresca-type friction on part of the boundary.
//!
//! The state is governed by a parabolic variational inequality of the
//! second kind on the unit square: a heat equation with a nonsmooth
//! friction condition on the bottom edge, a datum on the left edge imposed
//! either exactly (Dirichlet variant) or through a Robin penalty with
//! coefficient `h` (Robin variant), and a nonpositive control flux on the
//! remaining boundary. The crate provides
//!
//! - structured meshes and P1 finite element assembly ([`mesh`], [`assembly`]),
//! - backward-Euler state solvers for both variants ([`state`]),
//! - an independent dense coordinate-descent oracle for the exact
//!   nonsmooth per-step problem ([`oracle`]),
//! - reduced-cost optimization by projected gradient with a discrete
//!   adjoint ([`control`]),
//! - and sweep drivers that verify the structural and convergence
//!   properties of the whole construction numerically ([`lab`]).

// index arithmetic is the domain language of the assembly and banded
// factorization kernels, and `!(x > 0)` is the NaN-rejecting validation form
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod control;
pub mod error;
pub mod io;
pub mod lab;
pub mod mesh;
pub mod norms;
pub mod oracle;
pub mod sparse;
pub mod state;

pub use assembly::{
    assemble_all, coercivity_lower_bound, phi_eps, phi_exact, AssembledOperators, BoundarySet,
    PhiEps, ProblemData, Profile,
};
pub use control::{
    adjoint_solve, cost, optimize, project_nonpositive, reduced_gradient, CostRecord, OptParams,
    OptimizationResult,
};
pub use error::{Error, Result};
pub use mesh::{BoundaryTag, Facet, Mesh};
pub use oracle::{solve_step_oracle, soft_threshold_update, DenseStepProblem};
pub use sparse::{BandedCholesky, CsrMatrix};
pub use state::{
    solve_state, solve_step, tresca_diagnostic, BoundaryControl, FrictionRegime, NewtonParams,
    StateTrajectory, StepContext, TrescaReport, Variant,
};
