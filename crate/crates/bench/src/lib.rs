//! Shared fixtures for the criterion benchmarks.

use pvi_core::assembly::{assemble_all, AssembledOperators, ProblemData, Profile};
use pvi_core::mesh::Mesh;
use pvi_core::state::BoundaryControl;

pub struct Fixture {
    pub mesh: Mesh,
    pub ops: AssembledOperators,
    pub data: ProblemData,
    pub control: BoundaryControl,
}

/// A run with active friction on the bottom edge and a nonzero control.
pub fn fixture(n: usize, n_steps: usize) -> Fixture {
    let mesh = Mesh::unit_square(n, n).expect("mesh");
    let ops = assemble_all(&mesh).expect("assembly");
    let data = ProblemData {
        g: Profile::Const(1.0),
        b: Profile::Const(0.0),
        u_b: Profile::Const(0.0),
        q: 0.1,
        t_final: 1.0,
        n_steps,
        m_reg: 1.0,
        eps: 1e-2,
    };
    let control = BoundaryControl::constant(-0.5, n_steps, ops.gamma3.len());
    Fixture {
        mesh,
        ops,
        data,
        control,
    }
}
