//! Element-level integrals of the three sub-problems.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::{bmatrices, ElemKind};
use crate::physics::{
    coverage_from_concentration, degradation, gc_degraded, strain_energy_density,
    PlaneStrainElasticity,
};

/// Internal variables carried at one Gauss point.
#[derive(Debug, Clone)]
pub struct GaussPointData {
    /// History field H, the largest undamaged strain energy density seen
    /// at this point, MPa. Non-decreasing across accepted increments.
    pub history: f64,
    /// Hydrogen surface coverage feeding the fracture energy degradation.
    pub theta: f64,
    /// Hydrostatic stress interpolated from the recovered nodal field, MPa.
    pub sigma_h: f64,
    /// Strain at the last history update, Voigt (xx, yy, xy) engineering.
    pub strain: Vector3<f64>,
}

impl Default for GaussPointData {
    fn default() -> Self {
        GaussPointData {
            history: 0.0,
            theta: 0.0,
            sigma_h: 0.0,
            strain: Vector3::zeros(),
        }
    }
}

/// Degraded-elasticity internal force and stiffness:
/// r_u = sum_gp g(phi) B_u^T C0 B_u u detJ w and K_u its u-derivative.
pub fn element_displacement(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    u_nodal: &DVector<f64>,
    phi_nodal: &DVector<f64>,
    elasticity: &PlaneStrainElasticity,
    params: &MaterialParams,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let nn = kind.nnodes();
    debug_assert_eq!(u_nodal.len(), 2 * nn);
    debug_assert_eq!(phi_nodal.len(), nn);
    let quad = kind.quadrature();
    let mut r = DVector::zeros(2 * nn);
    let mut k = DMatrix::zeros(2 * nn, 2 * nn);
    for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let phi = geo.n.dot(phi_nodal);
        let g = degradation(phi, params.stiffness_floor);
        let scale = g * geo.det_j * w;
        let cb = &elasticity.c0 * &geo.b_u;
        // K += g * B^T C0 B, r = K_e u accumulated per point
        let strain = &geo.b_u * u_nodal;
        let stress0 = &elasticity.c0 * strain;
        r.axpy(scale, &(geo.b_u.transpose() * stress0), 1.0);
        k += (geo.b_u.transpose() * cb) * scale;
    }
    Ok((r, k))
}

/// Internal force alone, for reaction extraction where the tangent is
/// not needed.
pub fn element_internal_force(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    u_nodal: &DVector<f64>,
    phi_nodal: &DVector<f64>,
    elasticity: &PlaneStrainElasticity,
    params: &MaterialParams,
) -> Result<DVector<f64>> {
    let nn = kind.nnodes();
    debug_assert_eq!(u_nodal.len(), 2 * nn);
    let quad = kind.quadrature();
    let mut r = DVector::zeros(2 * nn);
    for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let phi = geo.n.dot(phi_nodal);
        let g = degradation(phi, params.stiffness_floor);
        let strain = &geo.b_u * u_nodal;
        let stress0 = &elasticity.c0 * strain;
        r.axpy(g * geo.det_j * w, &(geo.b_u.transpose() * stress0), 1.0);
    }
    Ok(r)
}

/// Phase-field residual and exact tangent with hydrogen-degraded Gc:
/// r_phi = sum_gp [-2(1-phi) H N + Gc(theta) (phi/l N + l B^T grad phi)],
/// K_phi = sum_gp [(2H + Gc/l) N N^T + Gc l B^T B].
pub fn element_phase(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    phi_nodal: &DVector<f64>,
    gp_data: &[GaussPointData],
    params: &MaterialParams,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let nn = kind.nnodes();
    debug_assert_eq!(phi_nodal.len(), nn);
    let quad = kind.quadrature();
    debug_assert_eq!(gp_data.len(), quad.len());
    let ell = params.length_scale;
    let mut r = DVector::zeros(nn);
    let mut k = DMatrix::zeros(nn, nn);
    for (g, (&(xi, eta), &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let dv = geo.det_j * w;
        let h = gp_data[g].history;
        let gc = gc_degraded(gp_data[g].theta, params.gc0, params.damage_coeff)?;
        let phi = geo.n.dot(phi_nodal);
        let grad_phi = &geo.b_s * phi_nodal;
        let coeff = -2.0 * (1.0 - phi) * h + gc * phi / ell;
        r.axpy(coeff * dv, &geo.n, 1.0);
        r.axpy(gc * ell * dv, &(geo.b_s.transpose() * grad_phi), 1.0);
        let nnt = &geo.n * geo.n.transpose();
        k += nnt * ((2.0 * h + gc / ell) * dv);
        k += (geo.b_s.transpose() * &geo.b_s) * (gc * ell * dv);
    }
    Ok((r, k))
}

/// Updates H <- max(H, psi0(eps(u))) at each Gauss point and records the
/// strain. Unloading leaves H unchanged.
pub fn update_history(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    u_nodal: &DVector<f64>,
    elasticity: &PlaneStrainElasticity,
    gp_data: &mut [GaussPointData],
) -> Result<()> {
    let quad = kind.quadrature();
    debug_assert_eq!(gp_data.len(), quad.len());
    for (g, &(xi, eta)) in quad.points.iter().enumerate() {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let strain = Vector3::from_iterator((&geo.b_u * u_nodal).iter().copied());
        let psi0 = strain_energy_density(&strain, elasticity);
        gp_data[g].history = gp_data[g].history.max(psi0);
        gp_data[g].strain = strain;
    }
    Ok(())
}

/// Refreshes the coverage theta at each Gauss point from the lagged nodal
/// concentration field.
pub fn update_theta(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    c_nodal: &DVector<f64>,
    params: &MaterialParams,
    gp_data: &mut [GaussPointData],
) -> Result<()> {
    let quad = kind.quadrature();
    debug_assert_eq!(gp_data.len(), quad.len());
    for (g, &(xi, eta)) in quad.points.iter().enumerate() {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let c = geo.n.dot(c_nodal);
        gp_data[g].theta = coverage_from_concentration(c, params);
    }
    Ok(())
}

/// Transport matrices for one element:
/// K_c = sum_gp (B^T B - B^T (Vh/RT) grad(sigma_h) N^T) detJ w,
/// M = sum_gp N N^T / D detJ w, and the stiffness part of the residual
/// r_c = K_c c.
pub fn element_diffusion(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    c_nodal: &DVector<f64>,
    sigma_h_nodal: &DVector<f64>,
    params: &MaterialParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
    if params.diffusivity == 0.0 {
        return Err(Error::Material(
            "diffusivity must be positive for transport assembly".into(),
        ));
    }
    let nn = kind.nnodes();
    debug_assert_eq!(c_nodal.len(), nn);
    debug_assert_eq!(sigma_h_nodal.len(), nn);
    let quad = kind.quadrature();
    let drift_coeff = params.molar_volume / (params.gas_constant * params.temperature);
    let mut k_c = DMatrix::zeros(nn, nn);
    let mut m = DMatrix::zeros(nn, nn);
    for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let dv = geo.det_j * w;
        let grad_sh = &geo.b_s * sigma_h_nodal;
        k_c += (geo.b_s.transpose() * &geo.b_s) * dv;
        let bt_grad = geo.b_s.transpose() * grad_sh;
        k_c += (&bt_grad * geo.n.transpose()) * (-drift_coeff * dv);
        m += (&geo.n * geo.n.transpose()) * (dv / params.diffusivity);
    }
    let r_c = &k_c * c_nodal;
    Ok((k_c, m, r_c))
}

/// Undamaged elastic stiffness matching `element_displacement` with phi = 0
/// and no floor, for rigid-body and patch diagnostics.
pub fn element_elastic_stiffness(
    kind: ElemKind,
    coords: &DMatrix<f64>,
    elasticity: &PlaneStrainElasticity,
) -> Result<DMatrix<f64>> {
    let nn = kind.nnodes();
    let quad = kind.quadrature();
    let mut k = DMatrix::zeros(2 * nn, 2 * nn);
    for (&(xi, eta), &w) in quad.points.iter().zip(&quad.weights) {
        let geo = bmatrices(kind, coords, xi, eta)?;
        let cb = &elasticity.c0 * &geo.b_u;
        k += (geo.b_u.transpose() * cb) * (geo.det_j * w);
    }
    Ok(k)
}

/// Interpolates nodal sigma_h onto the Gauss points for post-processing.
pub fn update_sigma_h_at_gauss(
    kind: ElemKind,
    sigma_h_nodal: &DVector<f64>,
    gp_data: &mut [GaussPointData],
) {
    let quad = kind.quadrature();
    debug_assert_eq!(gp_data.len(), quad.len());
    for (g, &(xi, eta)) in quad.points.iter().enumerate() {
        let (n, _) = crate::mesh::shape_functions(kind, xi, eta);
        gp_data[g].sigma_h = n.dot(sigma_h_nodal);
    }
}

/// Uniform-state phase-field root 2H / (2H + Gc/l), the converged solution
/// of the element equations when H and theta are spatially constant.
pub fn uniform_phase_root(h: f64, gc: f64, ell: f64) -> f64 {
    2.0 * h / (2.0 * h + gc / ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::default_iron_params;
    use crate::physics::plane_strain_stiffness;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn unit_square() -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0])
    }

    fn distorted_quad4() -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.1, 0.1, 1.3, 0.9, -0.2, 1.2])
    }

    fn distorted_quad8() -> DMatrix<f64> {
        let c = distorted_quad4();
        let mut out = DMatrix::zeros(8, 2);
        for i in 0..4 {
            out[(i, 0)] = c[(i, 0)];
            out[(i, 1)] = c[(i, 1)];
        }
        for i in 0..4 {
            let j = (i + 1) % 4;
            out[(4 + i, 0)] = 0.5 * (c[(i, 0)] + c[(j, 0)]);
            out[(4 + i, 1)] = 0.5 * (c[(i, 1)] + c[(j, 1)]);
        }
        out
    }

    fn pseudo_random(seed: &mut u64) -> f64 {
        // xorshift64*, deterministic across platforms
        *seed ^= *seed << 13;
        *seed ^= *seed >> 7;
        *seed ^= *seed << 17;
        (seed.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn undamaged_stiffness_scaling() {
        let p = default_iron_params();
        let el = plane_strain_stiffness(p.young_modulus, p.poisson_ratio).unwrap();
        let coords = distorted_quad4();
        let zero_u = DVector::zeros(8);
        let phi0 = DVector::zeros(4);
        let (_, k0) = element_displacement(
            ElemKind::Quad4,
            &coords,
            &zero_u,
            &phi0,
            &el,
            &p,
        )
        .unwrap();
        let k_pure = element_elastic_stiffness(ElemKind::Quad4, &coords, &el).unwrap();
        assert_relative_eq!(
            k0.norm(),
            (1.0 + p.stiffness_floor) * k_pure.norm(),
            max_relative = 1e-12
        );

        let phi1 = DVector::from_element(4, 1.0);
        let (_, k1) =
            element_displacement(ElemKind::Quad4, &coords, &zero_u, &phi1, &el, &p).unwrap();
        assert_relative_eq!(
            k1.norm(),
            p.stiffness_floor / (1.0 + p.stiffness_floor) * k0.norm(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn displacement_tangent_matches_finite_differences() {
        let p = default_iron_params();
        let el = plane_strain_stiffness(p.young_modulus, p.poisson_ratio).unwrap();
        for kind in [ElemKind::Quad4, ElemKind::Quad8] {
            let coords = match kind {
                ElemKind::Quad4 => distorted_quad4(),
                ElemKind::Quad8 => distorted_quad8(),
            };
            let nn = kind.nnodes();
            let mut seed = 0x9E3779B97F4A7C15u64;
            let u = DVector::from_fn(2 * nn, |_, _| 1e-3 * (pseudo_random(&mut seed) - 0.5));
            let phi = DVector::from_fn(nn, |_, _| 0.8 * pseudo_random(&mut seed));
            let (_, k) = element_displacement(kind, &coords, &u, &phi, &el, &p).unwrap();
            let step = 1e-7 * u.norm();
            let mut max_rel: f64 = 0.0;
            for j in 0..2 * nn {
                let mut up = u.clone();
                let mut um = u.clone();
                up[j] += step;
                um[j] -= step;
                let (rp, _) = element_displacement(kind, &coords, &up, &phi, &el, &p).unwrap();
                let (rm, _) = element_displacement(kind, &coords, &um, &phi, &el, &p).unwrap();
                let fd = (rp - rm) / (2.0 * step);
                for i in 0..2 * nn {
                    let denom = k.norm().max(1.0);
                    max_rel = max_rel.max((fd[i] - k[(i, j)]).abs() / denom);
                }
            }
            assert!(max_rel < 1e-6, "{kind:?}: tangent mismatch {max_rel}");
        }
    }

    #[test]
    fn phase_tangent_matches_finite_differences() {
        let p = default_iron_params();
        for kind in [ElemKind::Quad4, ElemKind::Quad8] {
            let coords = match kind {
                ElemKind::Quad4 => distorted_quad4(),
                ElemKind::Quad8 => distorted_quad8(),
            };
            let nn = kind.nnodes();
            let mut seed = 0xD1B54A32D192ED03u64;
            let phi = DVector::from_fn(nn, |_, _| 0.9 * pseudo_random(&mut seed));
            let gp: Vec<GaussPointData> = (0..kind.ngauss())
                .map(|_| GaussPointData {
                    history: 50.0 * pseudo_random(&mut seed),
                    theta: 0.5 * pseudo_random(&mut seed),
                    ..Default::default()
                })
                .collect();
            let (_, k) = element_phase(kind, &coords, &phi, &gp, &p).unwrap();
            let step = 1e-7 * phi.norm().max(1e-3);
            let mut max_rel: f64 = 0.0;
            for j in 0..nn {
                let mut pp = phi.clone();
                let mut pm = phi.clone();
                pp[j] += step;
                pm[j] -= step;
                let (rp, _) = element_phase(kind, &coords, &pp, &gp, &p).unwrap();
                let (rm, _) = element_phase(kind, &coords, &pm, &gp, &p).unwrap();
                let fd = (rp - rm) / (2.0 * step);
                for i in 0..nn {
                    max_rel = max_rel.max((fd[i] - k[(i, j)]).abs() / k.norm().max(1.0));
                }
            }
            assert!(max_rel < 1e-6, "{kind:?}: tangent mismatch {max_rel}");
        }
    }

    #[test]
    fn undamaged_equilibrium_has_zero_phase_residual() {
        let p = default_iron_params();
        let gp = vec![GaussPointData::default(); 4];
        let phi = DVector::zeros(4);
        let (r, _) = element_phase(ElemKind::Quad4, &unit_square(), &phi, &gp, &p).unwrap();
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn uniform_element_converges_to_scalar_root() {
        let p = default_iron_params();
        let h = 37.5;
        let gp = vec![
            GaussPointData { history: h, ..Default::default() };
            4
        ];
        let mut phi = DVector::zeros(4);
        // one Newton step suffices: the residual is linear in phi
        let (r, k) = element_phase(ElemKind::Quad4, &unit_square(), &phi, &gp, &p).unwrap();
        let delta = k.clone().lu().solve(&(-r)).unwrap();
        phi += delta;
        let expected = uniform_phase_root(h, p.gc0, p.length_scale);
        for i in 0..4 {
            assert_relative_eq!(phi[i], expected, max_relative = 1e-12);
        }
        let (r2, _) = element_phase(ElemKind::Quad4, &unit_square(), &phi, &gp, &p).unwrap();
        assert!(r2.norm() < 1e-12 * k.norm());
    }

    #[test]
    fn history_follows_kuhn_tucker() {
        let p = default_iron_params();
        let el = plane_strain_stiffness(p.young_modulus, p.poisson_ratio).unwrap();
        let coords = unit_square();
        let mut gp = vec![GaussPointData::default(); 4];
        // uniaxial strain via x-stretch
        let eps = 1e-3;
        let u = DVector::from_fn(8, |i, _| {
            if i % 2 == 0 {
                eps * coords[(i / 2, 0)]
            } else {
                0.0
            }
        });
        update_history(ElemKind::Quad4, &coords, &u, &el, &mut gp).unwrap();
        let c11 = el.c0[(0, 0)];
        let expected = 0.5 * c11 * eps * eps;
        for g in &gp {
            assert_relative_eq!(g.history, expected, max_relative = 1e-12);
            assert_relative_eq!(g.strain[0], eps, max_relative = 1e-12);
        }
        // unload: H stays
        let zero = DVector::zeros(8);
        update_history(ElemKind::Quad4, &coords, &zero, &el, &mut gp).unwrap();
        for g in &gp {
            assert_relative_eq!(g.history, expected, max_relative = 1e-12);
            assert_relative_eq!(g.strain.norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn history_update_branches() {
        let mut gp = vec![GaussPointData { history: 3.0, ..Default::default() }];
        // psi0 = 5 > 3 -> takes new value; emulate via direct max
        gp[0].history = gp[0].history.max(5.0);
        assert_eq!(gp[0].history, 5.0);
        gp[0].history = gp[0].history.max(1.0);
        assert_eq!(gp[0].history, 5.0);
    }

    #[test]
    fn uniform_sigma_h_reduces_to_laplacian() {
        let p = default_iron_params();
        let c = DVector::from_element(4, 1.0);
        let sh = DVector::from_element(4, 250.0);
        let (k_c, _, _) =
            element_diffusion(ElemKind::Quad4, &unit_square(), &c, &sh, &p).unwrap();
        let zero_sh = DVector::zeros(4);
        let (k_lap, _, _) =
            element_diffusion(ElemKind::Quad4, &unit_square(), &c, &zero_sh, &p).unwrap();
        assert_relative_eq!((k_c - k_lap).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn drift_block_matches_symbolic_integral() {
        // exact integral of B_x^T N^T over the unit square
        let oracle = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0 / 6.0, -1.0 / 6.0, -1.0 / 12.0, -1.0 / 12.0,
                1.0 / 6.0, 1.0 / 6.0, 1.0 / 12.0, 1.0 / 12.0,
                1.0 / 12.0, 1.0 / 12.0, 1.0 / 6.0, 1.0 / 6.0,
                -1.0 / 12.0, -1.0 / 12.0, -1.0 / 6.0, -1.0 / 6.0,
            ],
        );
        let p = default_iron_params();
        let coords = unit_square();
        let grad = 40.0; // sigma_h = 40 x
        let sh = DVector::from_fn(4, |i, _| grad * coords[(i, 0)]);
        let c = DVector::zeros(4);
        let (k_c, _, _) = element_diffusion(ElemKind::Quad4, &coords, &c, &sh, &p).unwrap();
        let zero_sh = DVector::zeros(4);
        let (k_lap, _, _) =
            element_diffusion(ElemKind::Quad4, &coords, &c, &zero_sh, &p).unwrap();
        let drift = k_c - k_lap;
        let coeff = -params_drift(&p) * grad;
        assert_relative_eq!((&drift - oracle * coeff).norm(), 0.0, epsilon = 1e-12);
        // columns of the drift block sum to zero: mass-conserving transport
        for j in 0..4 {
            let s: f64 = (0..4).map(|i| drift[(i, j)]).sum();
            assert_relative_eq!(s, 0.0, epsilon = 1e-13);
        }
    }

    fn params_drift(p: &crate::material::MaterialParams) -> f64 {
        p.molar_volume / (p.gas_constant * p.temperature)
    }

    #[test]
    fn capacity_row_sums_are_shape_integrals() {
        let p = default_iron_params();
        let c = DVector::zeros(4);
        let sh = DVector::zeros(4);
        let (_, m, _) = element_diffusion(ElemKind::Quad4, &unit_square(), &c, &sh, &p).unwrap();
        for i in 0..4 {
            let row_sum: f64 = (0..4).map(|j| m[(i, j)]).sum();
            assert_relative_eq!(row_sum, 0.25 / p.diffusivity, max_relative = 1e-12);
        }

        // 8-node: integral of serendipity shape functions is -1/12 at
        // corners and 1/3 at mid-sides
        let coords8 = {
            let mut out = DMatrix::zeros(8, 2);
            let c4 = unit_square();
            for i in 0..4 {
                out[(i, 0)] = c4[(i, 0)];
                out[(i, 1)] = c4[(i, 1)];
            }
            for i in 0..4 {
                let j = (i + 1) % 4;
                out[(4 + i, 0)] = 0.5 * (c4[(i, 0)] + c4[(j, 0)]);
                out[(4 + i, 1)] = 0.5 * (c4[(i, 1)] + c4[(j, 1)]);
            }
            out
        };
        let c8 = DVector::zeros(8);
        let sh8 = DVector::zeros(8);
        let (_, m8, _) = element_diffusion(ElemKind::Quad8, &coords8, &c8, &sh8, &p).unwrap();
        for i in 0..8 {
            let row_sum: f64 = (0..8).map(|j| m8[(i, j)]).sum();
            let expected = if i < 4 { -1.0 / 12.0 } else { 1.0 / 3.0 };
            assert_relative_eq!(row_sum, expected / p.diffusivity, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_diffusivity_is_rejected() {
        let mut p = default_iron_params();
        p.diffusivity = 0.0;
        let c = DVector::zeros(4);
        let sh = DVector::zeros(4);
        let err = element_diffusion(ElemKind::Quad4, &unit_square(), &c, &sh, &p).unwrap_err();
        assert!(err.to_string().contains("diffusivity"));
    }

    #[test]
    fn diffusion_residual_is_stiffness_times_concentration() {
        let p = default_iron_params();
        let mut seed = 42u64;
        let c = DVector::from_fn(4, |_, _| pseudo_random(&mut seed));
        let sh = DVector::from_fn(4, |_, _| 100.0 * pseudo_random(&mut seed));
        let (k_c, _, r_c) =
            element_diffusion(ElemKind::Quad4, &distorted_quad4(), &c, &sh, &p).unwrap();
        assert_relative_eq!((&k_c * &c - r_c).norm(), 0.0, epsilon = 1e-14);
    }
}
