//! Randomized property suites for the mesh and the assembled operators.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvi_core::assembly::{assemble_all, phi_eps, phi_exact, ProblemData, Profile};
use pvi_core::mesh::{BoundaryTag, Mesh};
use pvi_core::sparse::CsrMatrix;

fn data(q: f64, eps: f64) -> ProblemData {
    ProblemData {
        g: Profile::Const(0.0),
        b: Profile::Const(0.0),
        u_b: Profile::Const(0.0),
        q,
        t_final: 1.0,
        n_steps: 1,
        m_reg: 1.0,
        eps,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_areas_tile_the_square(nx in 1usize..12, ny in 1usize..12) {
        let mesh = Mesh::unit_square(nx, ny).unwrap();
        let total: f64 = (0..mesh.triangles.len()).map(|t| mesh.triangle_area(t)).sum();
        prop_assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_weights_tile_the_perimeter(nx in 1usize..12, ny in 1usize..12) {
        let mesh = Mesh::unit_square(nx, ny).unwrap();
        let total: f64 = BoundaryTag::ALL
            .iter()
            .map(|&tag| mesh.trace_weights(tag).iter().sum::<f64>())
            .sum();
        prop_assert!((total - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rebuild_is_bitwise_identical(nx in 1usize..10, ny in 1usize..10) {
        prop_assert_eq!(Mesh::unit_square(nx, ny).unwrap(), Mesh::unit_square(nx, ny).unwrap());
    }

    #[test]
    fn stiffness_kernel_and_mass_total(nx in 1usize..9, ny in 1usize..9) {
        let mesh = Mesh::unit_square(nx, ny).unwrap();
        let ops = assemble_all(&mesh).unwrap();
        let ones = vec![1.0; ops.n_nodes];
        for v in ops.stiff.matvec(&ones) {
            prop_assert!(v.abs() < 1e-12);
        }
        prop_assert!((ops.mass.sum_entries() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn regularized_friction_decreases_toward_exact_as_eps_shrinks() {
    let mesh = Mesh::unit_square(4, 4).unwrap();
    let ops = assemble_all(&mesh).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let v: Vec<f64> = (0..ops.gamma2.len())
            .map(|_| rng.gen::<f64>() * 4.0 - 2.0)
            .collect();
        let exact = phi_exact(&v, &data(0.7, 1.0), &ops);
        let mut previous = f64::INFINITY;
        for eps in [1.0, 0.1, 0.01] {
            let value = phi_eps(&v, &data(0.7, eps), &ops).unwrap().value;
            assert!(value <= previous, "not monotone at eps={eps}");
            assert!(value >= exact);
            previous = value;
        }
    }
}

#[test]
fn regularized_friction_gradient_matches_finite_differences() {
    let mesh = Mesh::unit_square(4, 4).unwrap();
    let ops = assemble_all(&mesh).unwrap();
    let d = data(1.3, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let step = 1e-6;
    for _ in 0..100 {
        let v: Vec<f64> = (0..ops.gamma2.len())
            .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
            .collect();
        let phi = phi_eps(&v, &d, &ops).unwrap();
        let k = rng.gen_range(0..v.len());
        let mut plus = v.clone();
        plus[k] += step;
        let mut minus = v.clone();
        minus[k] -= step;
        let fd = (phi_eps(&plus, &d, &ops).unwrap().value
            - phi_eps(&minus, &d, &ops).unwrap().value)
            / (2.0 * step);
        let rel = (fd - phi.gradient[k]).abs() / fd.abs().max(phi.gradient[k].abs()).max(1e-12);
        assert!(rel < 1e-6, "gradient mismatch {rel:e} at coordinate {k}");
    }
}

#[test]
fn regularized_friction_is_convex() {
    let mesh = Mesh::unit_square(4, 4).unwrap();
    let ops = assemble_all(&mesh).unwrap();
    let d = data(0.4, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..100 {
        let n = ops.gamma2.len();
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
        let mu: f64 = rng.gen();
        let blend: Vec<f64> = v
            .iter()
            .zip(&w)
            .map(|(a, b)| mu * a + (1.0 - mu) * b)
            .collect();
        let lhs = phi_eps(&blend, &d, &ops).unwrap().value;
        let rhs = mu * phi_eps(&v, &d, &ops).unwrap().value
            + (1.0 - mu) * phi_eps(&w, &d, &ops).unwrap().value;
        assert!(lhs <= rhs + 1e-12);
    }
}

#[test]
fn robin_form_observed_coercive() {
    let mesh = Mesh::unit_square(5, 5).unwrap();
    let ops = assemble_all(&mesh).unwrap();
    let h = 3.0;
    let robin_form = CsrMatrix::linear_combination(&[(1.0, &ops.stiff), (h, &ops.boundary_mass_gamma1)]);
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..200 {
        let mut v: Vec<f64> = (0..ops.n_nodes)
            .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
            .collect();
        // normalize in the mass norm
        let m = ops.mass.quadratic_form(&v).sqrt();
        for x in v.iter_mut() {
            *x /= m;
        }
        let energy = robin_form.quadratic_form(&v);
        assert!(energy >= -1e-13);
        let datum_trace: f64 = ops.gamma1.nodes.iter().map(|&i| v[i].abs()).sum();
        if datum_trace > 1e-8 {
            assert!(energy > 0.0);
        }
    }
}
