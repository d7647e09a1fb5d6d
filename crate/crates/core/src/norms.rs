//! Discrete space-time norms with right-endpoint (backward-Euler
//! consistent) time quadrature. Time-integrated norms skip level 0; the
//! max-in-time norm includes it.

use crate::assembly::{AssembledOperators, BoundarySet};
use crate::state::BoundaryControl;

/// L²(0,T;L²(Ω)) norm: (Σ_{n≥1} Δt·uₙᵀM uₙ)^{1/2}.
pub fn norm_space_time(levels: &[Vec<f64>], ops: &AssembledOperators, dt: f64) -> f64 {
    let sum: f64 = levels
        .iter()
        .skip(1)
        .map(|u| ops.mass.quadratic_form(u))
        .sum();
    (dt * sum).max(0.0).sqrt()
}

/// L²(0,T;H¹(Ω)) norm: adds the stiffness energy to the mass term.
pub fn norm_space_time_h1(levels: &[Vec<f64>], ops: &AssembledOperators, dt: f64) -> f64 {
    let sum: f64 = levels
        .iter()
        .skip(1)
        .map(|u| ops.mass.quadratic_form(u) + ops.stiff.quadratic_form(u))
        .sum();
    (dt * sum).max(0.0).sqrt()
}

/// L∞(0,T;L²(Ω)) norm: max_n (uₙᵀM uₙ)^{1/2} over all levels.
pub fn norm_max_l2(levels: &[Vec<f64>], ops: &AssembledOperators) -> f64 {
    levels
        .iter()
        .map(|u| ops.mass.quadratic_form(u).max(0.0).sqrt())
        .fold(0.0, f64::max)
}

/// L²((0,T)×Γ) norm of the trace on one tagged boundary part, using the
/// part's lumped weights. `levels` are full nodal vectors.
pub fn norm_trace(levels: &[Vec<f64>], set: &BoundarySet, dt: f64) -> f64 {
    let mut sum = 0.0;
    for u in levels.iter().skip(1) {
        for (&node, &w) in set.nodes.iter().zip(&set.weights) {
            sum += w * u[node] * u[node];
        }
    }
    (dt * sum).max(0.0).sqrt()
}

/// L²((0,T)×Γ₃) norm of a control.
pub fn norm_control(control: &BoundaryControl, gamma3: &BoundarySet, dt: f64) -> f64 {
    let mut sum = 0.0;
    for step in &control.values {
        for (&w, &f) in gamma3.weights.iter().zip(step) {
            sum += w * f * f;
        }
    }
    (dt * sum).max(0.0).sqrt()
}

/// F-inner product of two controls, ⟨a,b⟩ = Σ_n Δt Σᵢ wᵢ aₙᵢ bₙᵢ.
pub fn control_inner(a: &BoundaryControl, b: &BoundaryControl, gamma3: &BoundarySet, dt: f64) -> f64 {
    let mut sum = 0.0;
    for (sa, sb) in a.values.iter().zip(&b.values) {
        for ((&w, &x), &y) in gamma3.weights.iter().zip(sa).zip(sb) {
            sum += w * x * y;
        }
    }
    dt * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_all;
    use crate::mesh::Mesh;

    #[test]
    fn zero_inputs_give_zero_norms() {
        let mesh = Mesh::unit_square(2, 2).unwrap();
        let ops = assemble_all(&mesh).unwrap();
        let levels = vec![vec![0.0; ops.n_nodes]; 5];
        let control = BoundaryControl::zeros(4, ops.gamma3.len());
        let dt = 0.25;
        assert_eq!(norm_space_time(&levels, &ops, dt), 0.0);
        assert_eq!(norm_space_time_h1(&levels, &ops, dt), 0.0);
        assert_eq!(norm_max_l2(&levels, &ops), 0.0);
        assert_eq!(norm_trace(&levels, &ops.gamma1, dt), 0.0);
        assert_eq!(norm_control(&control, &ops.gamma3, dt), 0.0);
    }

    #[test]
    fn constant_field_norm_is_exact() {
        let mesh = Mesh::unit_square(3, 3).unwrap();
        let ops = assemble_all(&mesh).unwrap();
        let n_steps = 8;
        let dt = 1.0 / n_steps as f64;
        let levels = vec![vec![1.0; ops.n_nodes]; n_steps + 1];
        // meas(Ω) = 1 and T = 1
        assert!((norm_space_time(&levels, &ops, dt) - 1.0).abs() < 1e-13);
        assert!((norm_max_l2(&levels, &ops) - 1.0).abs() < 1e-13);
        // constants carry no stiffness energy
        assert!((norm_space_time_h1(&levels, &ops, dt) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_control_norm_is_exact() {
        let mesh = Mesh::unit_square(2, 2).unwrap();
        let ops = assemble_all(&mesh).unwrap();
        let n_steps = 4;
        let dt = 1.0 / n_steps as f64;
        let control = BoundaryControl::constant(-1.0, n_steps, ops.gamma3.len());
        // meas(Γ₃) = 2, T = 1
        assert!((norm_control(&control, &ops.gamma3, dt) - 2.0_f64.sqrt()).abs() < 1e-13);
        let ip = control_inner(&control, &control, &ops.gamma3, dt);
        assert!((ip - 2.0).abs() < 1e-13);
    }

    #[test]
    fn trace_norm_counts_only_the_tagged_part() {
        let mesh = Mesh::unit_square(2, 2).unwrap();
        let ops = assemble_all(&mesh).unwrap();
        let dt = 1.0;
        // field equal to 1 on Γ₁ nodes only
        let field = ops.gamma1.scatter(&vec![1.0; ops.gamma1.len()], ops.n_nodes);
        let levels = vec![vec![0.0; ops.n_nodes], field];
        assert!((norm_trace(&levels, &ops.gamma1, dt) - 1.0).abs() < 1e-13);
        // the same field seen from Γ₂ touches only the shared corner (w=0.25)
        assert!((norm_trace(&levels, &ops.gamma2, dt) - 0.5).abs() < 1e-13);
    }
}
