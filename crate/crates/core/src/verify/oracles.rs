//! Closed-form reference solutions, evaluated independently of the
//! element kernels so suite comparisons are genuine cross-checks.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::{bmatrices, Mesh};
use crate::verify::special::erfc;

/// Regularized crack surface energy of a nodal profile, per unit crack
/// width (the mesh's y extent):
/// integral of phi^2/(2 ell) + ell |grad phi|^2 / 2.
pub fn gamma_functional(mesh: &Mesh, phi: &DVector<f64>, ell: f64) -> Result<f64> {
    if phi.len() != mesh.nnodes() {
        return Err(Error::mesh("profile length does not match node count"));
    }
    if !(ell > 0.0) {
        return Err(Error::Material("length scale must be positive".into()));
    }
    let quad = mesh.kind.quadrature();
    let mut total = 0.0;
    for e in 0..mesh.nelems() {
        let coords = mesh.elem_coords(e);
        let nodes = mesh.elem_nodes(e);
        let phi_e = DVector::from_fn(nodes.len(), |a, _| phi[nodes[a]]);
        for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
            let geo = bmatrices(mesh.kind, &coords, xi, eta)?;
            let value = geo.n.dot(&phi_e);
            let grad = &geo.b_s * &phi_e;
            let density = value * value / (2.0 * ell) + 0.5 * ell * grad.norm_squared();
            total += density * geo.det_j * w;
        }
    }
    let (_, y_min, _, y_max) = mesh.bounding_box();
    let width = y_max - y_min;
    if !(width > 0.0) {
        return Err(Error::mesh("mesh has no extent across the crack"));
    }
    Ok(total / width)
}

/// Concentration in a semi-infinite bar with a step boundary value:
/// c_b erfc(x / (2 sqrt(D t))). The t <= 0 limit is the initial state.
pub fn diffusion_1d_oracle(x: f64, t: f64, c_boundary: f64, d: f64) -> f64 {
    if t <= 0.0 {
        return if x == 0.0 { c_boundary } else { 0.0 };
    }
    c_boundary * erfc(x / (2.0 * (d * t).sqrt()))
}

/// Zero-flux steady state of stress-assisted transport:
/// c_far exp(Vh sigma_h / (R T)).
pub fn steady_enrichment_oracle(sigma_h: f64, c_far: f64, params: &MaterialParams) -> f64 {
    c_far * (params.molar_volume * sigma_h / (params.gas_constant * params.temperature)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::default_iron_params;
    use crate::mesh::{generate_rect_mesh, ElemKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn centered_strip(ell: f64, per_ell: usize) -> Mesh {
        let width = 20.0 * ell;
        let nx = 20 * per_ell;
        let h = width / nx as f64;
        let mut mesh = generate_rect_mesh(width, h, nx, 1, ElemKind::Quad8, &[]).unwrap();
        for c in &mut mesh.coords {
            c[0] -= width / 2.0;
        }
        mesh
    }

    #[test]
    fn zero_profile_has_zero_energy() {
        let mesh = centered_strip(0.1, 5);
        let phi = DVector::zeros(mesh.nnodes());
        assert_eq!(gamma_functional(&mesh, &phi, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn constant_profile_measures_domain_width() {
        let ell = 0.1;
        let mesh = centered_strip(ell, 5);
        let phi = DVector::from_element(mesh.nnodes(), 1.0);
        // W/(2 ell) with W = 20 ell
        assert_relative_eq!(gamma_functional(&mesh, &phi, ell).unwrap(), 10.0, max_relative = 1e-10);
    }

    #[test]
    fn optimal_profile_approaches_unity() {
        let ell = 0.1;
        let mesh = centered_strip(ell, 10);
        let phi = DVector::from_fn(mesh.nnodes(), |i, _| (-mesh.coords[i][0].abs() / ell).exp());
        let gamma = gamma_functional(&mesh, &phi, ell).unwrap();
        assert_relative_eq!(gamma, 1.0, max_relative = 2e-2);
    }

    #[test]
    fn diffusion_oracle_frozen_point() {
        let d = 0.0127f64;
        let t = 3.0;
        let x = 2.0 * (d * t).sqrt();
        assert_relative_eq!(
            diffusion_1d_oracle(x, t, 2.0, d),
            2.0 * 0.157299207050285,
            max_relative = 1e-12
        );
        assert_eq!(diffusion_1d_oracle(0.0, t, 2.0, d), 2.0);
        assert!(diffusion_1d_oracle(100.0, t, 2.0, d) < 1e-250);
    }

    #[test]
    fn enrichment_frozen_ratio() {
        let params = default_iron_params();
        assert_relative_eq!(
            steady_enrichment_oracle(100.0, 1.0, &params),
            1.08348861204038,
            max_relative = 1e-12
        );
        assert_eq!(steady_enrichment_oracle(0.0, 0.7, &params), 0.7);
    }

    proptest! {
        #[test]
        fn enrichment_is_multiplicative(s1 in -200.0f64..200.0, s2 in -200.0f64..200.0) {
            let params = default_iron_params();
            let lhs = steady_enrichment_oracle(s1 + s2, 1.0, &params);
            let rhs = steady_enrichment_oracle(s1, 1.0, &params)
                * steady_enrichment_oracle(s2, 1.0, &params);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        #[test]
        fn diffusion_profile_decreases_in_x(x in 0.0f64..5.0, dx in 0.01f64..1.0) {
            let c1 = diffusion_1d_oracle(x, 1.0, 1.0, 0.0127);
            let c2 = diffusion_1d_oracle(x + dx, 1.0, 1.0, 0.0127);
            prop_assert!(c2 < c1);
        }
    }
}
