//! Discrete operators for the variational forms: P1 mass and stiffness,
//! lumped boundary mass on the datum edge, trace weights per boundary part,
//! and the friction functional with its smooth regularization.
//!
//! The bilinear form is `a(u,v) = ∫ ∇u·∇v` and its Robin extension is
//! `a_h(u,v) = a(u,v) + h ∫_{Γ₁} u v`. The friction term on Γ₂ is the
//! nonsmooth `Φ(v) = ∫_{Γ₂} q |v| ds`, discretized with lumped nodal
//! quadrature so that it is separable across Γ₂ nodes. The regularization
//! replaces |s| by √(ε² + s²), which is smooth and convex and converges to
//! Φ from above as ε → 0.
//!
//! Assembly is single-threaded; the assembled operators are immutable and
//! safe to share across sweep workers.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::CsrMatrix;

/// Data profile for the given functions g, b, u_b. `Bump` is the centered
/// smooth bump 16·x(1−x)·y(1−y), scaled so its maximum is 1; it vanishes on
/// the whole boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Const(f64),
    Bump,
}

impl Profile {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Profile::Const(v) => *v,
            Profile::Bump => 16.0 * x * (1.0 - x) * y * (1.0 - y),
        }
    }

    pub fn eval_nodes(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.nodes.iter().map(|p| self.eval(p[0], p[1])).collect()
    }

    /// Lower bound of the profile over the closed unit square.
    pub fn min_value(&self) -> f64 {
        match self {
            Profile::Const(v) => *v,
            Profile::Bump => 0.0,
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Const(v) => write!(f, "{v}"),
            Profile::Bump => write!(f, "bump"),
        }
    }
}

/// All given functions and constants of a run.
#[derive(Clone, Debug)]
pub struct ProblemData {
    /// Volumetric source.
    pub g: Profile,
    /// Datum on Γ₁ (Dirichlet value, or Robin target).
    pub b: Profile,
    /// Initial state; must agree with `b` on Γ₁.
    pub u_b: Profile,
    /// Friction threshold on Γ₂, strictly positive.
    pub q: f64,
    /// Final time.
    pub t_final: f64,
    /// Number of backward-Euler steps.
    pub n_steps: usize,
    /// Control cost weight M.
    pub m_reg: f64,
    /// Regularization parameter ε for the friction term.
    pub eps: f64,
}

impl ProblemData {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "friction coefficient must satisfy q > 0, got {}",
                self.q
            )));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {}",
                self.t_final
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("need at least one time step".into()));
        }
        if !(self.m_reg > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cost weight must satisfy M > 0, got {}",
                self.m_reg
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization parameter must satisfy eps > 0, got {}",
                self.eps
            )));
        }
        Ok(())
    }

    /// The initial state must equal the boundary datum on Γ₁.
    pub fn check_compatibility(&self, mesh: &Mesh) -> Result<()> {
        for &n in &mesh.boundary_nodes(BoundaryTag::Gamma1) {
            let [x, y] = mesh.nodes[n];
            let ub = self.u_b.eval(x, y);
            let b = self.b.eval(x, y);
            if (ub - b).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "initial state and boundary datum disagree on the datum edge at ({x},{y}): \
                     u_b={ub}, b={b}"
                )));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }
}

/// Node indices of one tagged boundary part with their lumped quadrature
/// weights (aligned by position).
#[derive(Clone, Debug)]
pub struct BoundarySet {
    pub nodes: Vec<usize>,
    pub weights: Vec<f64>,
}

impl BoundarySet {
    fn from_mesh(mesh: &Mesh, tag: BoundaryTag) -> BoundarySet {
        BoundarySet {
            nodes: mesh.boundary_nodes(tag),
            weights: mesh.trace_weights(tag),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Scatter per-part values into a full-length nodal vector (zeros off
    /// the part).
    pub fn scatter(&self, values: &[f64], n_nodes: usize) -> Vec<f64> {
        assert_eq!(values.len(), self.nodes.len());
        let mut full = vec![0.0; n_nodes];
        for (&n, &v) in self.nodes.iter().zip(values) {
            full[n] = v;
        }
        full
    }

    /// Gather a full-length nodal vector down to the part.
    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&n| full[n]).collect()
    }
}

/// Assembled discrete operators of one mesh.
#[derive(Clone, Debug)]
pub struct AssembledOperators {
    pub n_nodes: usize,
    /// Consistent P1 mass matrix (∫ u v).
    pub mass: CsrMatrix,
    /// P1 stiffness matrix (∫ ∇u·∇v).
    pub stiff: CsrMatrix,
    /// Lumped boundary mass on Γ₁ (diagonal).
    pub boundary_mass_gamma1: CsrMatrix,
    pub gamma1: BoundarySet,
    pub gamma2: BoundarySet,
    pub gamma3: BoundarySet,
}

/// Assemble mass, stiffness and boundary operators for the mesh.
pub fn assemble_all(mesh: &Mesh) -> Result<AssembledOperators> {
    let n = mesh.n_nodes();
    let mut mass_triplets = Vec::with_capacity(9 * mesh.triangles.len());
    let mut stiff_triplets = Vec::with_capacity(9 * mesh.triangles.len());

    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        if !(area > 1e-14) {
            return Err(Error::DegenerateTriangle { index: t, area });
        }
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        // gradient of barycentric basis k: (b_k, c_k) / (2·area)
        let mut grads = [[0.0f64; 2]; 3];
        for k in 0..3 {
            let k1 = (k + 1) % 3;
            let k2 = (k + 2) % 3;
            grads[k][0] = p[k1][1] - p[k2][1];
            grads[k][1] = p[k2][0] - p[k1][0];
        }
        for a in 0..3 {
            for b in 0..3 {
                let stiff = (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]) / (4.0 * area);
                let mass = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                stiff_triplets.push((tri[a], tri[b], stiff));
                mass_triplets.push((tri[a], tri[b], mass));
            }
        }
    }

    let gamma1 = BoundarySet::from_mesh(mesh, BoundaryTag::Gamma1);
    let gamma2 = BoundarySet::from_mesh(mesh, BoundaryTag::Gamma2);
    let gamma3 = BoundarySet::from_mesh(mesh, BoundaryTag::Gamma3);

    let b1_triplets: Vec<_> = gamma1
        .nodes
        .iter()
        .zip(&gamma1.weights)
        .map(|(&n, &w)| (n, n, w))
        .collect();

    Ok(AssembledOperators {
        n_nodes: n,
        mass: CsrMatrix::from_triplets(n, n, &mass_triplets),
        stiff: CsrMatrix::from_triplets(n, n, &stiff_triplets),
        boundary_mass_gamma1: CsrMatrix::from_triplets(n, n, &b1_triplets),
        gamma1,
        gamma2,
        gamma3,
    })
}

/// Nonsmooth friction functional with lumped quadrature:
/// Σᵢ wᵢ q |vᵢ| over the Γ₂ nodes.
pub fn phi_exact(v_trace: &[f64], data: &ProblemData, ops: &AssembledOperators) -> f64 {
    assert_eq!(v_trace.len(), ops.gamma2.len());
    ops.gamma2
        .weights
        .iter()
        .zip(v_trace)
        .map(|(&w, &v)| w * data.q * v.abs())
        .sum()
}

/// Value, gradient and Hessian diagonal of the regularized friction
/// functional Σᵢ wᵢ q √(ε² + vᵢ²), evaluated at a Γ₂ trace.
#[derive(Clone, Debug)]
pub struct PhiEps {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian_diag: Vec<f64>,
}

pub fn phi_eps(v_trace: &[f64], data: &ProblemData, ops: &AssembledOperators) -> Result<PhiEps> {
    if !(data.eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularization parameter must be positive, got {}",
            data.eps
        )));
    }
    assert_eq!(v_trace.len(), ops.gamma2.len());
    let eps2 = data.eps * data.eps;
    let mut value = 0.0;
    let mut gradient = Vec::with_capacity(v_trace.len());
    let mut hessian_diag = Vec::with_capacity(v_trace.len());
    for (&w, &v) in ops.gamma2.weights.iter().zip(v_trace) {
        let root = (eps2 + v * v).sqrt();
        value += w * data.q * root;
        gradient.push(w * data.q * v / root);
        hessian_diag.push(w * data.q * eps2 / (root * root * root));
    }
    Ok(PhiEps {
        value,
        gradient,
        hessian_diag,
    })
}

/// Guaranteed coercivity constant of the Robin form: λ₁·min(1, h).
pub fn coercivity_lower_bound(h: f64, lambda1: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Robin coefficient must be positive, got {h}"
        )));
    }
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coercivity constant must be positive, got {lambda1}"
        )));
    }
    Ok(lambda1 * h.min(1.0))
}
