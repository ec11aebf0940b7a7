//! Shape functions and strain-displacement matrices for 4-node bilinear
//! and 8-node serendipity quadrilaterals.
//!
//! Node ordering is counter-clockwise corners first; for 8-node elements
//! the mid-side nodes follow, with node 4 between corners 0-1, node 5
//! between 1-2, node 6 between 2-3 and node 7 between 3-0.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::mesh::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemKind {
    Quad4,
    Quad8,
}

impl ElemKind {
    pub fn nnodes(self) -> usize {
        match self {
            ElemKind::Quad4 => 4,
            ElemKind::Quad8 => 8,
        }
    }

    /// Full-integration volume rule: 2x2 for bilinear, 3x3 for serendipity.
    pub fn quadrature(self) -> QuadratureRule {
        match self {
            ElemKind::Quad4 => QuadratureRule::tensor(2),
            ElemKind::Quad8 => QuadratureRule::tensor(3),
        }
    }

    pub fn ngauss(self) -> usize {
        match self {
            ElemKind::Quad4 => 4,
            ElemKind::Quad8 => 9,
        }
    }

    /// Gauss point count along one edge for consistent boundary loads.
    pub fn edge_gauss(self) -> usize {
        match self {
            ElemKind::Quad4 => 2,
            ElemKind::Quad8 => 3,
        }
    }

    /// Reference coordinates of the element nodes.
    pub fn reference_nodes(self) -> Vec<(f64, f64)> {
        let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
        match self {
            ElemKind::Quad4 => corners.to_vec(),
            ElemKind::Quad8 => {
                let mids = [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
                corners.iter().chain(mids.iter()).copied().collect()
            }
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "quad4" => Ok(ElemKind::Quad4),
            "quad8" => Ok(ElemKind::Quad8),
            other => Err(Error::mesh(format!("unknown element kind '{other}'"))),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            ElemKind::Quad4 => "quad4",
            ElemKind::Quad8 => "quad8",
        }
    }
}

/// Shape function values and reference-space gradients at (xi, eta).
///
/// Returns (values: n, gradients: n x 2) with gradients columns
/// (d/dxi, d/deta).
pub fn shape_functions(kind: ElemKind, xi: f64, eta: f64) -> (DVector<f64>, DMatrix<f64>) {
    match kind {
        ElemKind::Quad4 => {
            let n = DVector::from_vec(vec![
                0.25 * (1.0 - xi) * (1.0 - eta),
                0.25 * (1.0 + xi) * (1.0 - eta),
                0.25 * (1.0 + xi) * (1.0 + eta),
                0.25 * (1.0 - xi) * (1.0 + eta),
            ]);
            let mut d = DMatrix::zeros(4, 2);
            d[(0, 0)] = -0.25 * (1.0 - eta);
            d[(1, 0)] = 0.25 * (1.0 - eta);
            d[(2, 0)] = 0.25 * (1.0 + eta);
            d[(3, 0)] = -0.25 * (1.0 + eta);
            d[(0, 1)] = -0.25 * (1.0 - xi);
            d[(1, 1)] = -0.25 * (1.0 + xi);
            d[(2, 1)] = 0.25 * (1.0 + xi);
            d[(3, 1)] = 0.25 * (1.0 - xi);
            (n, d)
        }
        ElemKind::Quad8 => {
            let n = DVector::from_vec(vec![
                0.25 * (1.0 - xi) * (1.0 - eta) * (-xi - eta - 1.0),
                0.25 * (1.0 + xi) * (1.0 - eta) * (xi - eta - 1.0),
                0.25 * (1.0 + xi) * (1.0 + eta) * (xi + eta - 1.0),
                0.25 * (1.0 - xi) * (1.0 + eta) * (-xi + eta - 1.0),
                0.5 * (1.0 - xi * xi) * (1.0 - eta),
                0.5 * (1.0 + xi) * (1.0 - eta * eta),
                0.5 * (1.0 - xi * xi) * (1.0 + eta),
                0.5 * (1.0 - xi) * (1.0 - eta * eta),
            ]);
            let mut d = DMatrix::zeros(8, 2);
            d[(0, 0)] = 0.25 * (1.0 - eta) * (2.0 * xi + eta);
            d[(1, 0)] = 0.25 * (1.0 - eta) * (2.0 * xi - eta);
            d[(2, 0)] = 0.25 * (1.0 + eta) * (2.0 * xi + eta);
            d[(3, 0)] = 0.25 * (1.0 + eta) * (2.0 * xi - eta);
            d[(4, 0)] = -xi * (1.0 - eta);
            d[(5, 0)] = 0.5 * (1.0 - eta * eta);
            d[(6, 0)] = -xi * (1.0 + eta);
            d[(7, 0)] = -0.5 * (1.0 - eta * eta);
            d[(0, 1)] = 0.25 * (1.0 - xi) * (xi + 2.0 * eta);
            d[(1, 1)] = 0.25 * (1.0 + xi) * (2.0 * eta - xi);
            d[(2, 1)] = 0.25 * (1.0 + xi) * (xi + 2.0 * eta);
            d[(3, 1)] = 0.25 * (1.0 - xi) * (2.0 * eta - xi);
            d[(4, 1)] = -0.5 * (1.0 - xi * xi);
            d[(5, 1)] = -eta * (1.0 + xi);
            d[(6, 1)] = 0.5 * (1.0 - xi * xi);
            d[(7, 1)] = -eta * (1.0 - xi);
            (n, d)
        }
    }
}

/// Everything the element integrands need at one quadrature point.
pub struct PointGeometry {
    /// Shape function values, n.
    pub n: DVector<f64>,
    /// Strain-displacement matrix, 3 x 2n, Voigt (xx, yy, xy) with
    /// engineering shear.
    pub b_u: DMatrix<f64>,
    /// Scalar-gradient matrix, 2 x n.
    pub b_s: DMatrix<f64>,
    /// Jacobian determinant of the reference-to-physical map.
    pub det_j: f64,
}

/// Evaluates shape data and physical-space B-matrices for an element given
/// its nodal coordinates (n x 2, one row per node).
pub fn bmatrices(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    xi: f64,
    eta: f64,
) -> Result<PointGeometry> {
    let nn = kind.nnodes();
    debug_assert_eq!(coords.nrows(), nn);
    let (n, dref) = shape_functions(kind, xi, eta);

    // jacobian rows are (dx/dxi, dy/dxi) and (dx/deta, dy/deta), so that
    // physical gradients are J^-1 times reference gradients
    let mut j = Matrix2::<f64>::zeros();
    for a in 0..nn {
        j[(0, 0)] += coords[(a, 0)] * dref[(a, 0)];
        j[(0, 1)] += coords[(a, 1)] * dref[(a, 0)];
        j[(1, 0)] += coords[(a, 0)] * dref[(a, 1)];
        j[(1, 1)] += coords[(a, 1)] * dref[(a, 1)];
    }
    let det_j = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
    if det_j <= 0.0 {
        return Err(Error::mesh(format!(
            "non-positive jacobian determinant {det_j:.3e} at (xi, eta) = ({xi}, {eta})"
        )));
    }
    let inv_j = Matrix2::new(j[(1, 1)], -j[(0, 1)], -j[(1, 0)], j[(0, 0)]) / det_j;

    let mut b_s = DMatrix::zeros(2, nn);
    for a in 0..nn {
        b_s[(0, a)] = inv_j[(0, 0)] * dref[(a, 0)] + inv_j[(0, 1)] * dref[(a, 1)];
        b_s[(1, a)] = inv_j[(1, 0)] * dref[(a, 0)] + inv_j[(1, 1)] * dref[(a, 1)];
    }

    let mut b_u = DMatrix::zeros(3, 2 * nn);
    for a in 0..nn {
        b_u[(0, 2 * a)] = b_s[(0, a)];
        b_u[(1, 2 * a + 1)] = b_s[(1, a)];
        b_u[(2, 2 * a)] = b_s[(1, a)];
        b_u[(2, 2 * a + 1)] = b_s[(0, a)];
    }

    Ok(PointGeometry { n, b_u, b_s, det_j })
}
