use nalgebra::DVector;

use crate::assembly::GaussPointData;

/// Primary unknowns plus recovered and internal variables at one instant.
///
/// `gauss` is element-major: entry `e * ngauss + g` belongs to Gauss point
/// `g` of element `e`.
#[derive(Debug, Clone)]
pub struct FieldState {
    /// Interleaved (ux, uy) nodal displacements, length 2 * nnodes.
    pub displacement: DVector<f64>,
    /// Nodal phase field, length nnodes.
    pub phase: DVector<f64>,
    /// Nodal hydrogen concentration in wt ppm, length nnodes.
    pub concentration: DVector<f64>,
    /// Recovered nodal hydrostatic stress, length nnodes.
    pub sigma_h: DVector<f64>,
    /// Per-Gauss-point internal variables.
    pub gauss: Vec<GaussPointData>,
    /// Physical time, s.
    pub time: f64,
}

impl FieldState {
    pub fn zeros(nnodes: usize, nelems: usize, ngauss: usize) -> Self {
        FieldState {
            displacement: DVector::zeros(2 * nnodes),
            phase: DVector::zeros(nnodes),
            concentration: DVector::zeros(nnodes),
            sigma_h: DVector::zeros(nnodes),
            gauss: vec![GaussPointData::default(); nelems * ngauss],
            time: 0.0,
        }
    }

    pub fn nnodes(&self) -> usize {
        self.phase.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_mesh_dimensions() {
        let s = FieldState::zeros(10, 4, 9);
        assert_eq!(s.displacement.len(), 20);
        assert_eq!(s.phase.len(), 10);
        assert_eq!(s.concentration.len(), 10);
        assert_eq!(s.sigma_h.len(), 10);
        assert_eq!(s.gauss.len(), 36);
        assert_eq!(s.nnodes(), 10);
        assert_eq!(s.time, 0.0);
    }
}
