//! Gauss-point-to-node recovery of the hydrostatic stress driving
//! hydrogen drift.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::Result;
use crate::material::MaterialParams;
use crate::mesh::{bmatrices, shape_functions, ElemKind, Mesh};
use crate::physics::{degradation, hydrostatic_stress, plane_strain_stiffness};

/// Which stress feeds the recovered field. The transport equation assumes
/// the phase field does not influence diffusion, so the undamaged stress
/// is the default; the degraded variant is kept selectable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecoveryStress {
    #[default]
    Undamaged,
    Degraded,
}

impl RecoveryStress {
    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "undamaged" => Some(RecoveryStress::Undamaged),
            "degraded" => Some(RecoveryStress::Degraded),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RecoveryStress::Undamaged => "undamaged",
            RecoveryStress::Degraded => "degraded",
        }
    }
}

/// Recovers nodal hydrostatic stress: per element, sigma_h is evaluated at
/// the Gauss points, extrapolated to the element nodes by least-squares
/// inversion of the Gauss-point interpolation, then volume-weighted
/// averaged across elements sharing each node.
pub fn recover_sigma_h(
    mesh: &Mesh,
    u: &DVector<f64>,
    phi: &DVector<f64>,
    params: &MaterialParams,
    stress: RecoveryStress,
) -> Result<DVector<f64>> {
    let elasticity = plane_strain_stiffness(params.young_modulus, params.poisson_ratio)?;
    let kind = mesh.kind;
    let nn = kind.nnodes();
    let quad = kind.quadrature();
    let pinv = extrapolation_matrix(kind);
    let mut numer = DVector::<f64>::zeros(mesh.nnodes());
    let mut denom = DVector::<f64>::zeros(mesh.nnodes());
    let mut u_e = DVector::zeros(2 * nn);
    let mut phi_e = DVector::zeros(nn);
    let mut sh_gp = DVector::zeros(quad.len());
    for e in 0..mesh.nelems() {
        let nodes = mesh.elem_nodes(e);
        let coords = mesh.elem_coords(e);
        for (a, &n) in nodes.iter().enumerate() {
            u_e[2 * a] = u[2 * n];
            u_e[2 * a + 1] = u[2 * n + 1];
            phi_e[a] = phi[n];
        }
        let mut volume = 0.0;
        for (g, (&(xi, eta), &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
            let geo = bmatrices(kind, &coords, xi, eta)?;
            let strain = Vector3::from_iterator((&geo.b_u * &u_e).iter().copied());
            let mut stress0 = &elasticity.c0 * strain;
            if stress == RecoveryStress::Degraded {
                let phi_gp = geo.n.dot(&phi_e);
                stress0 *= degradation(phi_gp, params.stiffness_floor);
            }
            sh_gp[g] = hydrostatic_stress(&stress0, params.poisson_ratio);
            volume += geo.det_j * w;
        }
        let nodal = &pinv * &sh_gp;
        for (a, &n) in nodes.iter().enumerate() {
            numer[n] += volume * nodal[a];
            denom[n] += volume;
        }
    }
    Ok(DVector::from_fn(mesh.nnodes(), |i, _| {
        if denom[i] > 0.0 {
            numer[i] / denom[i]
        } else {
            0.0
        }
    }))
}

/// Least-squares inverse of the ngauss x nnodes matrix of shape values at
/// the Gauss points. Square and exactly invertible for 4-node elements.
fn extrapolation_matrix(kind: ElemKind) -> DMatrix<f64> {
    let quad = kind.quadrature();
    let nn = kind.nnodes();
    let a = DMatrix::from_fn(quad.len(), nn, |g, j| {
        let (xi, eta) = quad.points[g];
        shape_functions(kind, xi, eta).0[j]
    });
    let ata = a.transpose() * &a;
    let inv = ata
        .try_inverse()
        .expect("Gauss-point shape matrix has full column rank");
    inv * a.transpose()
}
