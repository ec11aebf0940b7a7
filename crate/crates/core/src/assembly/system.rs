//! Global sparse system with symmetric Dirichlet elimination.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Which nodal field a system is assembled for; fixes the node-to-dof map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Two dofs per node, interleaved (ux, uy).
    Displacement,
    /// One dof per node (phase field or concentration).
    Scalar,
}

impl FieldKind {
    pub fn dofs_per_node(self) -> usize {
        match self {
            FieldKind::Displacement => 2,
            FieldKind::Scalar => 1,
        }
    }

    /// Global dofs of an element's nodes, in element-local order.
    pub fn global_dofs(self, nodes: &[usize], out: &mut Vec<usize>) {
        out.clear();
        match self {
            FieldKind::Displacement => {
                for &n in nodes {
                    out.push(2 * n);
                    out.push(2 * n + 1);
                }
            }
            FieldKind::Scalar => out.extend_from_slice(nodes),
        }
    }
}

/// Assembled linear(ized) system K x = f with Dirichlet constraints.
///
/// Triplets keep the full unconstrained operator; constraints are applied
/// at solve time by symmetric elimination with right-hand-side correction,
/// so constrained-row data stays available for reaction extraction.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    ndofs: usize,
    triplets: Vec<(usize, usize, f64)>,
    pub rhs: DVector<f64>,
    dirichlet: Vec<Option<f64>>,
}

impl SparseSystem {
    pub fn new(ndofs: usize) -> Self {
        SparseSystem {
            ndofs,
            triplets: Vec::new(),
            rhs: DVector::zeros(ndofs),
            dirichlet: vec![None; ndofs],
        }
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    /// Scatter-adds a dense element matrix at the given global dofs.
    pub fn add_matrix(&mut self, dofs: &[usize], k: &DMatrix<f64>) {
        debug_assert_eq!(k.nrows(), dofs.len());
        debug_assert_eq!(k.ncols(), dofs.len());
        for (j, &cj) in dofs.iter().enumerate() {
            for (i, &ri) in dofs.iter().enumerate() {
                let v = k[(i, j)];
                if v != 0.0 {
                    self.triplets.push((ri, cj, v));
                }
            }
        }
    }

    pub fn add_rhs(&mut self, dofs: &[usize], f: &DVector<f64>) {
        debug_assert_eq!(f.len(), dofs.len());
        for (i, &d) in dofs.iter().enumerate() {
            self.rhs[d] += f[i];
        }
    }

    pub fn add_rhs_global(&mut self, f: &DVector<f64>) {
        debug_assert_eq!(f.len(), self.ndofs);
        self.rhs += f;
    }

    /// Prescribes a dof value; the last write wins when a dof is listed by
    /// several boundary sets (validation upstream keeps programs unique).
    pub fn set_dirichlet(&mut self, dof: usize, value: f64) {
        self.dirichlet[dof] = Some(value);
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.dirichlet[dof].is_some()
    }

    pub fn prescribed(&self, dof: usize) -> Option<f64> {
        self.dirichlet[dof]
    }

    /// Indices of unconstrained dofs, ascending.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.ndofs).filter(|&d| self.dirichlet[d].is_none()).collect()
    }

    /// Full-operator product K x over all stored triplets (constraints
    /// ignored), used for reactions and equilibrium checks.
    pub fn kx(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.ndofs);
        let mut out = DVector::zeros(self.ndofs);
        for &(r, c, v) in &self.triplets {
            out[r] += v * x[c];
        }
        out
    }

    /// Dense copy of the unconstrained operator, for small diagnostics.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.ndofs, self.ndofs);
        for &(r, c, v) in &self.triplets {
            k[(r, c)] += v;
        }
        k
    }
}

/// Runs the element loop for one field and gathers everything into a
/// constrained sparse system.
pub fn assemble_global<F>(
    mesh: &Mesh,
    field: FieldKind,
    mut element_contributions: F,
    dirichlet: &[(usize, f64)],
) -> Result<SparseSystem>
where
    F: FnMut(usize) -> Result<(DMatrix<f64>, DVector<f64>)>,
{
    let ndofs = field.dofs_per_node() * mesh.nnodes();
    let mut sys = SparseSystem::new(ndofs);
    let mut dofs = Vec::with_capacity(field.dofs_per_node() * mesh.kind.nnodes());
    for e in 0..mesh.nelems() {
        let (k, f) = element_contributions(e)?;
        field.global_dofs(mesh.elem_nodes(e), &mut dofs);
        if k.nrows() != dofs.len() || k.ncols() != dofs.len() || f.len() != dofs.len() {
            return Err(Error::Assembly(format!(
                "element {} contribution is {}x{} with rhs {}, expected {} dofs",
                e + 1,
                k.nrows(),
                k.ncols(),
                f.len(),
                dofs.len()
            )));
        }
        sys.add_matrix(&dofs, &k);
        sys.add_rhs(&dofs, &f);
    }
    for &(dof, value) in dirichlet {
        if dof >= ndofs {
            return Err(Error::Assembly(format!(
                "dirichlet dof {dof} out of range for {ndofs} dofs"
            )));
        }
        sys.set_dirichlet(dof, value);
    }
    Ok(sys)
}
