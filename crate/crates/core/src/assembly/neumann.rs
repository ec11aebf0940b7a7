//! Consistent boundary loads: edge tractions and diffusion flux.

use std::collections::BTreeSet;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::{gauss_1d, ElemKind, Mesh};

/// A natural boundary condition on a named node set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeLoad {
    /// Traction vector (tx, ty), MPa (per unit out-of-plane thickness).
    Traction([f64; 2]),
    /// Outward hydrogen flux q; enters the transport right-hand side as
    /// -(1/D) * integral of N q over the edge.
    Flux(f64),
}

/// Integrates `load` over every boundary edge whose nodes all belong to
/// `set_name`. Returns a global right-hand-side vector (2 dofs per node
/// for tractions, 1 for flux).
pub fn apply_neumann(
    mesh: &Mesh,
    set_name: &str,
    load: EdgeLoad,
    params: &MaterialParams,
) -> Result<DVector<f64>> {
    let set: BTreeSet<usize> = mesh.node_set(set_name)?.iter().copied().collect();
    let edges: Vec<_> = mesh
        .boundary_edges()
        .into_iter()
        .filter(|e| e.nodes().iter().all(|n| set.contains(n)))
        .collect();
    if edges.is_empty() {
        return Err(Error::mesh(format!(
            "node set '{set_name}' does not resolve to any boundary edge"
        )));
    }
    let per_node = match load {
        EdgeLoad::Traction(_) => 2,
        EdgeLoad::Flux(_) => 1,
    };
    if let EdgeLoad::Flux(_) = load {
        if params.diffusivity == 0.0 {
            return Err(Error::Material(
                "diffusivity must be positive for flux conditions".into(),
            ));
        }
    }
    let mut rhs = DVector::zeros(per_node * mesh.nnodes());
    let (sample_points, sample_weights) = gauss_1d(mesh.kind.edge_gauss());
    for edge in &edges {
        let nodes = edge.nodes();
        let coords: Vec<[f64; 2]> = nodes.iter().map(|&n| mesh.coords[n]).collect();
        for (&s, &w) in sample_points.iter().zip(&sample_weights) {
            let (shapes, dshapes) = edge_shapes(mesh.kind, s);
            let mut tangent = [0.0, 0.0];
            for (a, c) in coords.iter().enumerate() {
                tangent[0] += dshapes[a] * c[0];
                tangent[1] += dshapes[a] * c[1];
            }
            let jac = (tangent[0] * tangent[0] + tangent[1] * tangent[1]).sqrt();
            match load {
                EdgeLoad::Traction(t) => {
                    for (a, &n) in nodes.iter().enumerate() {
                        rhs[2 * n] += shapes[a] * t[0] * jac * w;
                        rhs[2 * n + 1] += shapes[a] * t[1] * jac * w;
                    }
                }
                EdgeLoad::Flux(q) => {
                    let scale = -q / params.diffusivity;
                    for (a, &n) in nodes.iter().enumerate() {
                        rhs[n] += scale * shapes[a] * jac * w;
                    }
                }
            }
        }
    }
    Ok(rhs)
}

/// 1D edge shape functions at parameter s in [-1, 1], ordered to match
/// BoundaryEdge::nodes(): the two corners, then the mid-side node.
fn edge_shapes(kind: ElemKind, s: f64) -> (Vec<f64>, Vec<f64>) {
    match kind {
        ElemKind::Quad4 => (
            vec![0.5 * (1.0 - s), 0.5 * (1.0 + s)],
            vec![-0.5, 0.5],
        ),
        ElemKind::Quad8 => (
            vec![0.5 * s * (s - 1.0), 0.5 * s * (s + 1.0), 1.0 - s * s],
            vec![s - 0.5, s + 0.5, -2.0 * s],
        ),
    }
}
