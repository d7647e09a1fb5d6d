//! Structured triangulations of the unit square with tagged boundary parts.
//!
//! The domain is always [0,1]², split into `nx × ny` cells, each cell cut
//! along its lower-left to upper-right diagonal. All triangles are right
//! triangles, which keeps the stiffness matrix inverse-positive on this
//! family of meshes. Boundary facets carry one of three tags:
//!
//! - `Gamma1`: left edge (x = 0), Dirichlet/Robin datum
//! - `Gamma2`: bottom edge (y = 0), friction condition
//! - `Gamma3`: right and top edges, control flux
//!
//! The three tags tile the whole boundary. Corner nodes shared by two
//! differently-tagged edges appear in both node lists; boundary integrals
//! are always computed with per-tag lumped weights, never by node-set
//! membership, so the overlap is harmless.

use crate::error::{Error, Result};

/// Tag identifying which part of the boundary a facet belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Left edge, x = 0.
    Gamma1,
    /// Bottom edge, y = 0.
    Gamma2,
    /// Right and top edges.
    Gamma3,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 3] = [BoundaryTag::Gamma1, BoundaryTag::Gamma2, BoundaryTag::Gamma3];
}

/// A boundary edge of the triangulation together with its tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Immutable structured triangulation of the unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_facets: Vec<Facet>,
}

impl Mesh {
    /// Build the structured mesh with `(nx+1)(ny+1)` nodes and `2·nx·ny`
    /// triangles. Node `j·(nx+1)+i` sits at `(i/nx, j/ny)`.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(format!(
                "mesh subdivisions must be positive, got nx={nx}, ny={ny}"
            )));
        }

        let idx = |i: usize, j: usize| j * (nx + 1) + i;

        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
            }
        }

        // Diagonal direction is fixed (lower-left to upper-right) so the
        // mesh is a pure function of (nx, ny).
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let v00 = idx(i, j);
                let v10 = idx(i + 1, j);
                let v01 = idx(i, j + 1);
                let v11 = idx(i + 1, j + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let mut boundary_facets = Vec::with_capacity(2 * (nx + ny));
        for j in 0..ny {
            boundary_facets.push(Facet {
                nodes: [idx(0, j), idx(0, j + 1)],
                tag: BoundaryTag::Gamma1,
            });
        }
        for i in 0..nx {
            boundary_facets.push(Facet {
                nodes: [idx(i, 0), idx(i + 1, 0)],
                tag: BoundaryTag::Gamma2,
            });
        }
        for j in 0..ny {
            boundary_facets.push(Facet {
                nodes: [idx(nx, j), idx(nx, j + 1)],
                tag: BoundaryTag::Gamma3,
            });
        }
        for i in 0..nx {
            boundary_facets.push(Facet {
                nodes: [idx(i, ny), idx(i + 1, ny)],
                tag: BoundaryTag::Gamma3,
            });
        }

        Ok(Mesh {
            nx,
            ny,
            nodes,
            triangles,
            boundary_facets,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Sorted, duplicate-free indices of the nodes lying on facets with the
    /// given tag. A corner node shared by two differently-tagged edges
    /// belongs to both lists.
    pub fn boundary_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary_facets
            .iter()
            .filter(|f| f.tag == tag)
            .flat_map(|f| f.nodes)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Trapezoidal lumped quadrature weights for the tagged boundary part,
    /// aligned with `boundary_nodes(tag)`: each facet of length ℓ contributes
    /// ℓ/2 to each endpoint. The weights sum to the measure of the part.
    pub fn trace_weights(&self, tag: BoundaryTag) -> Vec<f64> {
        let nodes = self.boundary_nodes(tag);
        let mut weights = vec![0.0; nodes.len()];
        for facet in self.boundary_facets.iter().filter(|f| f.tag == tag) {
            let [a, b] = facet.nodes;
            let pa = self.nodes[a];
            let pb = self.nodes[b];
            let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            for n in [a, b] {
                let pos = nodes.binary_search(&n).expect("facet node in node list");
                weights[pos] += 0.5 * len;
            }
        }
        weights
    }

    /// Signed area of triangle `t` (positive for the counter-clockwise
    /// orientation used by the builder).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        let pc = self.nodes[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }
}
