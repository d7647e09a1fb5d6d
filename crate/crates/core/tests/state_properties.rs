//! Trajectory-level properties of the state solvers under randomized
//! controls with a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvi_core::assembly::{assemble_all, AssembledOperators, ProblemData, Profile};
use pvi_core::mesh::Mesh;
use pvi_core::norms::norm_trace;
use pvi_core::state::{solve_state, BoundaryControl, NewtonParams, Variant};

fn setup() -> (Mesh, AssembledOperators, ProblemData) {
    let mesh = Mesh::unit_square(6, 6).unwrap();
    let ops = assemble_all(&mesh).unwrap();
    let data = ProblemData {
        g: Profile::Const(1.0),
        b: Profile::Const(0.0),
        u_b: Profile::Const(0.0),
        q: 0.2,
        t_final: 1.0,
        n_steps: 8,
        m_reg: 1.0,
        eps: 1e-2,
    };
    (mesh, ops, data)
}

fn random_feasible_control(rng: &mut ChaCha8Rng, n_steps: usize, n3: usize) -> BoundaryControl {
    let values = (0..n_steps)
        .map(|_| (0..n3).map(|_| -rng.gen::<f64>()).collect())
        .collect();
    BoundaryControl { values }
}

#[test]
fn state_nonnegative_under_nonnegative_data_and_feasible_controls() {
    let (mesh, ops, data) = setup();
    let newton = NewtonParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..10 {
        let f = random_feasible_control(&mut rng, data.n_steps, ops.gamma3.len());
        for variant in [Variant::Dirichlet, Variant::Robin { h: 10.0 }] {
            let traj = solve_state(&mesh, &ops, &data, &f, variant, &newton).unwrap();
            assert!(
                traj.min_value() >= -1e-10,
                "trial {trial} {variant}: min {:e}",
                traj.min_value()
            );
        }
    }
}

#[test]
fn more_negative_control_raises_the_state() {
    let (mesh, ops, data) = setup();
    let newton = NewtonParams::default();
    let n3 = ops.gamma3.len();
    let weak = BoundaryControl::constant(-0.25, data.n_steps, n3);
    let strong = BoundaryControl::constant(-1.0, data.n_steps, n3);
    let u_weak = solve_state(&mesh, &ops, &data, &weak, Variant::Dirichlet, &newton).unwrap();
    let u_strong = solve_state(&mesh, &ops, &data, &strong, Variant::Dirichlet, &newton).unwrap();
    for level in 0..u_weak.u.len() {
        for node in 0..ops.n_nodes {
            assert!(u_strong.u[level][node] >= u_weak.u[level][node] - 1e-10);
        }
    }
}

#[test]
fn robin_trace_approaches_datum_as_penalty_grows() {
    let (mesh, ops, mut data) = setup();
    data.b = Profile::Const(0.5);
    data.u_b = Profile::Const(0.5);
    let newton = NewtonParams::default();
    let f = BoundaryControl::constant(-0.5, data.n_steps, ops.gamma3.len());
    let dt = data.dt();

    let datum_levels: Vec<Vec<f64>> = (0..=data.n_steps)
        .map(|_| {
            let values: Vec<f64> = ops
                .gamma1
                .nodes
                .iter()
                .map(|&i| {
                    let [x, y] = mesh.nodes[i];
                    data.b.eval(x, y)
                })
                .collect();
            ops.gamma1.scatter(&values, ops.n_nodes)
        })
        .collect();

    let mut previous = f64::INFINITY;
    for h in [1.0, 10.0, 100.0, 1000.0] {
        let traj = solve_state(&mesh, &ops, &data, &f, Variant::Robin { h }, &newton).unwrap();
        let off_datum: Vec<Vec<f64>> = traj
            .u
            .iter()
            .zip(&datum_levels)
            .map(|(u, b)| u.iter().zip(b).map(|(a, c)| a - c).collect())
            .collect();
        let gap = norm_trace(&off_datum, &ops.gamma1, dt);
        assert!(gap <= previous + 1e-14, "trace gap grew at h={h}: {gap}");
        previous = gap;
    }
}

#[test]
fn difference_quotients_stay_bounded() {
    let (mesh, ops, data) = setup();
    let newton = NewtonParams::default();
    let f = BoundaryControl::constant(-0.5, data.n_steps, ops.gamma3.len());
    let traj = solve_state(&mesh, &ops, &data, &f, Variant::Dirichlet, &newton).unwrap();
    let bound = traj.difference_quotient_bound(&ops, data.dt());
    assert!(bound.is_finite() && bound > 0.0);
}
