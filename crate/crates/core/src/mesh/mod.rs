//! Mesh geometry, element technology and quadrature.

mod generate;
mod io;
mod quadrature;
mod shape;

pub use generate::{generate_rect_mesh, RefinementBand};
pub use io::{read_mesh, write_mesh};
pub use quadrature::{gauss_1d, QuadratureRule};
pub use shape::{bmatrices, shape_functions, ElemKind, PointGeometry};

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A 2D quadrilateral mesh of a single element kind.
///
/// Connectivity is stored flat with a fixed per-element stride; node
/// numbering is 0-based internally (the text format is 1-based). Named
/// sets use ordered maps so every iteration over them is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub coords: Vec<[f64; 2]>,
    pub kind: ElemKind,
    pub connectivity: Vec<usize>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub element_sets: BTreeMap<String, Vec<usize>>,
}

/// One element edge on the mesh boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub elem: usize,
    /// Corner node ids (global, counter-clockwise within the element).
    pub corners: [usize; 2],
    /// Mid-side node for 8-node elements.
    pub mid: Option<usize>,
}

impl BoundaryEdge {
    /// All global node ids on the edge.
    pub fn nodes(&self) -> Vec<usize> {
        let mut v = vec![self.corners[0], self.corners[1]];
        if let Some(m) = self.mid {
            v.push(m);
        }
        v
    }
}

impl Mesh {
    pub fn nnodes(&self) -> usize {
        self.coords.len()
    }

    pub fn nelems(&self) -> usize {
        self.connectivity.len() / self.kind.nnodes()
    }

    pub fn elem_nodes(&self, e: usize) -> &[usize] {
        let n = self.kind.nnodes();
        &self.connectivity[e * n..(e + 1) * n]
    }

    /// Nodal coordinates of element `e` as an n x 2 matrix.
    pub fn elem_coords(&self, e: usize) -> DMatrix<f64> {
        let nodes = self.elem_nodes(e);
        DMatrix::from_fn(nodes.len(), 2, |i, j| self.coords[nodes[i]][j])
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::mesh(format!("node set '{name}' does not exist")))
    }

    /// Checks connectivity ranges and that every element has a strictly
    /// positive Jacobian at each of its quadrature points.
    pub fn validate(&self) -> Result<()> {
        let nn = self.kind.nnodes();
        if self.connectivity.len() % nn != 0 {
            return Err(Error::mesh("connectivity length not a multiple of element size"));
        }
        for (e, chunk) in self.connectivity.chunks(nn).enumerate() {
            for &node in chunk {
                if node >= self.nnodes() {
                    return Err(Error::mesh(format!(
                        "element {} references node {} out of range",
                        e + 1,
                        node + 1
                    )));
                }
            }
        }
        let quad = self.kind.quadrature();
        for e in 0..self.nelems() {
            let coords = self.elem_coords(e);
            for &(xi, eta) in &quad.points {
                bmatrices(self.kind, &coords, xi, eta).map_err(|err| {
                    Error::mesh(format!("element {}: {err}", e + 1))
                })?;
            }
        }
        for (name, set) in &self.node_sets {
            for &node in set {
                if node >= self.nnodes() {
                    return Err(Error::mesh(format!(
                        "node set '{name}' references node {} out of range",
                        node + 1
                    )));
                }
            }
        }
        for (name, set) in &self.element_sets {
            for &elem in set {
                if elem >= self.nelems() {
                    return Err(Error::mesh(format!(
                        "element set '{name}' references element {} out of range",
                        elem + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Local corner pairs of each element edge, counter-clockwise.
    fn local_edges(&self) -> [(usize, usize); 4] {
        [(0, 1), (1, 2), (2, 3), (3, 0)]
    }

    /// Edges owned by exactly one element, in deterministic element order.
    pub fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in 0..self.nelems() {
            let nodes = self.elem_nodes(e);
            for (a, b) in self.local_edges() {
                let key = ordered(nodes[a], nodes[b]);
                *count.entry(key).or_insert(0) += 1;
            }
        }
        let mut edges = Vec::new();
        for e in 0..self.nelems() {
            let nodes = self.elem_nodes(e);
            for (i, (a, b)) in self.local_edges().into_iter().enumerate() {
                let key = ordered(nodes[a], nodes[b]);
                if count[&key] == 1 {
                    let mid = match self.kind {
                        ElemKind::Quad4 => None,
                        ElemKind::Quad8 => Some(nodes[4 + i]),
                    };
                    edges.push(BoundaryEdge {
                        elem: e,
                        corners: [nodes[a], nodes[b]],
                        mid,
                    });
                }
            }
        }
        edges
    }

    /// Shortest and longest corner-to-corner element edge in the mesh.
    pub fn edge_length_range(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for e in 0..self.nelems() {
            let nodes = self.elem_nodes(e);
            for (a, b) in self.local_edges() {
                let pa = self.coords[nodes[a]];
                let pb = self.coords[nodes[b]];
                let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
                min = min.min(len);
                max = max.max(len);
            }
        }
        (min, max)
    }

    /// Axis-aligned bounding box as (min_x, min_y, max_x, max_y).
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut bb = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.coords {
            bb.0 = bb.0.min(c[0]);
            bb.1 = bb.1.min(c[1]);
            bb.2 = bb.2.max(c[0]);
            bb.3 = bb.3.max(c[1]);
        }
        bb
    }

    /// Integral of a nodal scalar field over the mesh area.
    pub fn integrate_nodal(&self, field: &nalgebra::DVector<f64>) -> Result<f64> {
        if field.len() != self.nnodes() {
            return Err(Error::mesh("field length does not match node count"));
        }
        let quad = self.kind.quadrature();
        let mut total = 0.0;
        for e in 0..self.nelems() {
            let coords = self.elem_coords(e);
            let nodes = self.elem_nodes(e);
            for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
                let g = bmatrices(self.kind, &coords, xi, eta)?;
                let value: f64 = nodes.iter().enumerate().map(|(a, &n)| g.n[a] * field[n]).sum();
                total += value * g.det_j * w;
            }
        }
        Ok(total)
    }

    /// Smallest Jacobian determinant over all elements and Gauss points.
    pub fn min_det_j(&self) -> Result<f64> {
        let quad = self.kind.quadrature();
        let mut min = f64::INFINITY;
        for e in 0..self.nelems() {
            let coords = self.elem_coords(e);
            for &(xi, eta) in &quad.points {
                let g = bmatrices(self.kind, &coords, xi, eta)?;
                min = min.min(g.det_j);
            }
        }
        Ok(min)
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_area_matches_element_area() {
        for kind in [ElemKind::Quad4, ElemKind::Quad8] {
            let mesh = generate_rect_mesh(2.0, 3.0, 2, 3, kind, &[]).unwrap();
            let quad = kind.quadrature();
            let mut area = 0.0;
            for e in 0..mesh.nelems() {
                let coords = mesh.elem_coords(e);
                for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
                    area += bmatrices(kind, &coords, xi, eta).unwrap().det_j * w;
                }
            }
            assert_relative_eq!(area, 6.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn boundary_edges_of_unit_grid() {
        let mesh = generate_rect_mesh(1.0, 1.0, 3, 3, ElemKind::Quad4, &[]).unwrap();
        let edges = mesh.boundary_edges();
        assert_eq!(edges.len(), 12);
        // every boundary edge node is on the outline
        for edge in &edges {
            for n in edge.nodes() {
                let [x, y] = mesh.coords[n];
                let on_outline = x == 0.0 || y == 0.0 || (x - 1.0).abs() < 1e-12 || (y - 1.0).abs() < 1e-12;
                assert!(on_outline);
            }
        }
    }

    #[test]
    fn nodal_integral_of_linear_field() {
        for kind in [ElemKind::Quad4, ElemKind::Quad8] {
            let mesh = generate_rect_mesh(1.0, 1.0, 3, 2, kind, &[]).unwrap();
            let ones = nalgebra::DVector::from_element(mesh.nnodes(), 1.0);
            assert_relative_eq!(mesh.integrate_nodal(&ones).unwrap(), 1.0, max_relative = 1e-12);
            let x = nalgebra::DVector::from_fn(mesh.nnodes(), |i, _| mesh.coords[i][0]);
            assert_relative_eq!(mesh.integrate_nodal(&x).unwrap(), 0.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn validate_rejects_out_of_range_connectivity() {
        let mut mesh = generate_rect_mesh(1.0, 1.0, 1, 1, ElemKind::Quad4, &[]).unwrap();
        mesh.connectivity[2] = 99;
        assert!(mesh.validate().is_err());
    }
}
