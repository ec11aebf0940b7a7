//! Pointwise constitutive laws: stiffness degradation, hydrogen-dependent
//! fracture energy, the Langmuir-McLean surface isotherm, plane-strain
//! elasticity, and the closed-form homogeneous 1D solution family used by
//! the verification oracles.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::material::MaterialParams;

/// Fraction of gc0 below which the degraded fracture energy is clamped,
/// keeping the phase-field operator positive definite when chi*theta -> 1.
pub const GC_FLOOR_FRACTION: f64 = 1e-4;

/// Plane-strain constitutive matrix in Voigt order (xx, yy, xy) with
/// engineering shear strain.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneStrainElasticity {
    pub c0: Matrix3<f64>,
}

/// Stiffness multiplier of the damaged material: (1 - phi)^2 + k.
pub fn degradation(phi: f64, k: f64) -> f64 {
    (1.0 - phi) * (1.0 - phi) + k
}

/// Derivative of the degradation function with respect to phi: -2(1 - phi).
pub fn degradation_derivative(phi: f64) -> f64 {
    -2.0 * (1.0 - phi)
}

/// Critical energy release rate reduced by hydrogen coverage:
/// gc0 * (1 - chi * theta), clamped below at GC_FLOOR_FRACTION * gc0.
pub fn gc_degraded(theta: f64, gc0: f64, chi: f64) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&theta) {
        return Err(Error::Material(format!(
            "surface coverage {theta} outside [0, 1]"
        )));
    }
    let theta = theta.clamp(0.0, 1.0);
    Ok((gc0 * (1.0 - chi * theta)).max(GC_FLOOR_FRACTION * gc0))
}

/// Converts a mass concentration in wt ppm to an impurity mole fraction
/// for a binary host/impurity mixture.
pub fn wtppm_to_mole_fraction(
    c_wtppm: f64,
    host_molar_mass: f64,
    impurity_molar_mass: f64,
) -> f64 {
    let w = c_wtppm * 1e-6;
    let imp = w / impurity_molar_mass;
    let host = (1.0 - w) / host_molar_mass;
    imp / (imp + host)
}

/// Langmuir-McLean isotherm: equilibrium fraction of interface sites
/// occupied by the impurity, from its bulk mole fraction.
pub fn surface_coverage(c_mole_fraction: f64, delta_g: f64, r: f64, t: f64) -> f64 {
    c_mole_fraction / (c_mole_fraction + (-delta_g / (r * t)).exp())
}

/// Coverage at a point directly from a wt ppm concentration.
pub fn coverage_from_concentration(c_wtppm: f64, p: &MaterialParams) -> f64 {
    // Negative concentrations can transiently appear from drift-dominated
    // transport; treat them as hydrogen-free rather than extrapolating the
    // isotherm outside its domain.
    let x = wtppm_to_mole_fraction(
        c_wtppm.max(0.0),
        p.host_molar_mass,
        p.impurity_molar_mass,
    );
    surface_coverage(x, p.binding_energy, p.gas_constant, p.temperature)
}

/// Degraded fracture energy at a point directly from a wt ppm concentration.
pub fn gc_from_concentration(c_wtppm: f64, p: &MaterialParams) -> f64 {
    let theta = coverage_from_concentration(c_wtppm, p);
    // theta is in [0, 1) by construction of the isotherm.
    (p.gc0 * (1.0 - p.damage_coeff * theta)).max(GC_FLOOR_FRACTION * p.gc0)
}

/// Plane-strain elastic stiffness in Voigt form.
pub fn plane_strain_stiffness(e: f64, nu: f64) -> Result<PlaneStrainElasticity> {
    if e <= 0.0 {
        return Err(Error::Material("young_modulus must be positive".into()));
    }
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::Material("poisson_ratio must lie in [0, 0.5)".into()));
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut c0 = Matrix3::zeros();
    c0[(0, 0)] = lambda + 2.0 * mu;
    c0[(1, 1)] = lambda + 2.0 * mu;
    c0[(0, 1)] = lambda;
    c0[(1, 0)] = lambda;
    c0[(2, 2)] = mu;
    Ok(PlaneStrainElasticity { c0 })
}

/// Elastic strain energy density of the undamaged solid, 1/2 e^T C0 e.
pub fn strain_energy_density(strain: &Vector3<f64>, stiffness: &PlaneStrainElasticity) -> f64 {
    0.5 * strain.dot(&(stiffness.c0 * strain))
}

/// Hydrostatic stress under plane strain: the out-of-plane stress is
/// nu*(s_xx + s_yy), so the trace/3 reduces to (1+nu)(s_xx+s_yy)/3.
pub fn hydrostatic_stress(stress: &Vector3<f64>, nu: f64) -> f64 {
    (1.0 + nu) * (stress[0] + stress[1]) / 3.0
}

/// Spatially uniform phase field sustained by a homogeneous 1D strain.
pub fn homogeneous_phi(strain_1d: f64, e: f64, gc: f64, ell: f64) -> f64 {
    let drive = e * strain_1d * strain_1d * ell;
    drive / (gc + drive)
}

/// Stress carried by the homogeneously damaged 1D bar at a given strain.
pub fn homogeneous_stress(strain_1d: f64, e: f64, gc: f64, ell: f64) -> f64 {
    let drive = e * strain_1d * strain_1d * ell;
    let g = gc / (gc + drive);
    g * g * e * strain_1d
}

/// Peak stress of the homogeneous 1D response.
pub fn critical_stress(e: f64, gc: f64, ell: f64) -> f64 {
    (27.0 * e * gc / (256.0 * ell)).sqrt()
}

/// Strain at which the homogeneous 1D response peaks.
pub fn critical_strain(e: f64, gc: f64, ell: f64) -> f64 {
    (gc / (3.0 * ell * e)).sqrt()
}

/// Largest element size that still resolves the cohesive process zone.
pub fn cohesive_mesh_bound(e: f64, gc: f64, sigma_c: f64) -> f64 {
    std::f64::consts::PI / 160.0 * e * gc / (sigma_c * sigma_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::default_iron_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn degradation_limits() {
        assert_eq!(degradation(0.0, 1e-7), 1.0 + 1e-7);
        assert_eq!(degradation(1.0, 1e-7), 1e-7);
        assert_eq!(degradation(0.5, 1e-7), 0.25 + 1e-7);
        assert_eq!(degradation_derivative(0.0), -2.0);
        assert_eq!(degradation_derivative(1.0), 0.0);
        assert_eq!(degradation_derivative(0.25), -1.5);
    }

    #[test]
    fn fracture_energy_reduction() {
        assert_relative_eq!(gc_degraded(0.0, 2.7, 0.89).unwrap(), 2.7);
        assert_relative_eq!(gc_degraded(0.5, 2.7, 0.89).unwrap(), 1.4985);
        // nickel: full coverage removes 41% of the fracture energy
        assert_relative_eq!(gc_degraded(1.0, 1.0, 0.41).unwrap(), 0.59);
        assert!(gc_degraded(1.1, 2.7, 0.89).is_err());
        assert!(gc_degraded(-0.1, 2.7, 0.89).is_err());
        // floor engages for chi ~ 1 at full coverage
        assert_relative_eq!(gc_degraded(1.0, 2.7, 1.0).unwrap(), 2.7e-4);
    }

    #[test]
    fn mole_fraction_conversion() {
        assert_eq!(wtppm_to_mole_fraction(0.0, 55.85, 1.008), 0.0);
        // frozen from a high-precision evaluation of the exact formula
        assert_relative_eq!(
            wtppm_to_mole_fraction(1.0, 55.85, 1.008),
            5.5403731694986e-5,
            max_relative = 1e-10
        );
        assert_relative_eq!(wtppm_to_mole_fraction(1e6, 55.85, 1.008), 1.0);
    }

    #[test]
    fn coverage_isotherm() {
        assert_eq!(surface_coverage(0.0, 3.0e7, 8314.0, 300.0), 0.0);
        // exp(-3e7/2494200) = exp(-12.028) = 5.975e-6, frozen oracle values
        assert_relative_eq!(
            surface_coverage(1.0, 3.0e7, 8314.0, 300.0),
            0.999994024905917,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            surface_coverage(5.5403731694986e-5, 3.0e7, 8314.0, 300.0),
            0.902651667997886,
            max_relative = 1e-10
        );
    }

    #[test]
    fn one_wtppm_iron_coverage_near_ninety_percent() {
        let p = default_iron_params();
        let theta = coverage_from_concentration(1.0, &p);
        assert_relative_eq!(theta, 0.902651667997886, max_relative = 1e-10);
    }

    #[test]
    fn plane_strain_matrix_entries() {
        let c = plane_strain_stiffness(210_000.0, 0.3).unwrap();
        assert_relative_eq!(c.c0[(0, 0)], 282692.307692307692, max_relative = 1e-12);
        assert_relative_eq!(c.c0[(0, 1)], c.c0[(1, 0)]);
        let c = plane_strain_stiffness(100.0, 0.0).unwrap();
        assert_relative_eq!(c.c0[(0, 0)], 100.0);
        assert_relative_eq!(c.c0[(0, 1)], 0.0);
        assert_relative_eq!(c.c0[(2, 2)], 50.0);
        assert!(plane_strain_stiffness(100.0, 0.5).is_err());
    }

    #[test]
    fn energy_density_quadratic_form() {
        let c = plane_strain_stiffness(210_000.0, 0.3).unwrap();
        assert_eq!(strain_energy_density(&Vector3::zeros(), &c), 0.0);
        let e = Vector3::new(1e-3, 0.0, 0.0);
        assert_relative_eq!(
            strain_energy_density(&e, &c),
            0.5 * c.c0[(0, 0)] * 1e-6,
            max_relative = 1e-12
        );
        let e = Vector3::new(2e-3, -1e-3, 5e-4);
        let s0 = c.c0 * e;
        assert_relative_eq!(strain_energy_density(&e, &c), 0.5 * e.dot(&s0));
    }

    #[test]
    fn hydrostatic_stress_plane_strain_trace() {
        let s = Vector3::new(90.0, 0.0, 40.0);
        assert_relative_eq!(hydrostatic_stress(&s, 0.3), 1.3 * 90.0 / 3.0);
    }

    #[test]
    fn homogeneous_family_closed_forms() {
        let (e, gc, ell) = (210_000.0, 2.7, 0.0075);
        assert_eq!(homogeneous_phi(0.0, e, gc, ell), 0.0);
        let eps_c = critical_strain(e, gc, ell);
        // at the critical strain: E*eps^2*ell = gc/3, so phi = 1/4
        assert_relative_eq!(homogeneous_phi(eps_c, e, gc, ell), 0.25, max_relative = 1e-12);
        assert_relative_eq!(
            homogeneous_stress(eps_c, e, gc, ell),
            0.75 * 0.75 * e * eps_c,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            homogeneous_stress(eps_c, e, gc, ell),
            critical_stress(e, gc, ell),
            max_relative = 1e-12
        );
        assert!(homogeneous_phi(1e6, e, gc, ell) > 1.0 - 1e-9);
    }

    #[test]
    fn critical_values_for_iron() {
        // frozen from a high-precision scalar evaluation
        assert_relative_eq!(
            critical_stress(210_000.0, 2.7, 0.0075),
            2823.72758955250,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            critical_strain(210_000.0, 2.7, 0.0075),
            0.0239045721866879,
            max_relative = 1e-10
        );
    }

    #[test]
    fn strength_scaling_with_coverage() {
        let (e, gc, ell) = (210_000.0, 2.7, 0.0075);
        for theta in [0.1, 0.45, 0.9] {
            let gc_h = gc_degraded(theta, gc, 0.89).unwrap();
            let ratio = critical_stress(e, gc_h, ell) / critical_stress(e, gc, ell);
            assert_relative_eq!(ratio, (1.0 - 0.89 * theta).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn mesh_bound_for_iron() {
        let sigma_c = critical_stress(210_000.0, 2.7, 0.0075);
        let h = cohesive_mesh_bound(210_000.0, 2.7, sigma_c);
        assert_relative_eq!(h, 0.00139626340159546, max_relative = 1e-10);
        // algebraically h = (pi/160)(256/27) * ell, about ell/5.37
        assert_relative_eq!(0.0075 / h, 5.37147932935147, max_relative = 1e-10);
        assert_relative_eq!(
            cohesive_mesh_bound(210_000.0, 5.4, sigma_c),
            2.0 * h,
            max_relative = 1e-12
        );
    }

    /// Golden-section maximum search on a unimodal function.
    fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-14 * b {
            let x1 = b - inv_phi * (b - a);
            let x2 = a + inv_phi * (b - a);
            if f(x1) < f(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn homogeneous_peak_found_by_search_matches_critical_values() {
        let (e, gc, ell) = (210_000.0, 2.7, 0.0075);
        let eps_star = golden_max(|x| homogeneous_stress(x, e, gc, ell), 0.0, 0.2);
        assert_relative_eq!(eps_star, critical_strain(e, gc, ell), max_relative = 1e-7);
        assert_relative_eq!(
            homogeneous_stress(eps_star, e, gc, ell),
            critical_stress(e, gc, ell),
            max_relative = 1e-10
        );
    }

    proptest! {
        #[test]
        fn degradation_strictly_decreasing(a in 0.0..1.0f64, d in 1e-6..1.0f64) {
            let b = (a + d).min(1.0);
            prop_assume!(b > a);
            prop_assert!(degradation(b, 1e-7) < degradation(a, 1e-7));
            prop_assert!(degradation(a, 1e-7) <= 1.0 + 1e-7);
            prop_assert!(degradation(a, 1e-7) >= 1e-7);
        }

        #[test]
        fn coverage_strictly_increasing(a in 0.0..1.0f64, d in 1e-9..1.0f64) {
            let b = (a + d).min(1.0);
            prop_assume!(b > a);
            let (ca, cb) = (
                surface_coverage(a, 3.0e7, 8314.0, 300.0),
                surface_coverage(b, 3.0e7, 8314.0, 300.0),
            );
            prop_assert!(cb > ca);
            prop_assert!((0.0..1.0).contains(&ca));
        }

        #[test]
        fn stress_curves_ordered_by_coverage(
            theta_lo in 0.0..0.98f64,
            gap in 0.01..0.5f64,
            eps_rel in 0.05..3.0f64,
        ) {
            // normalized stress response drops pointwise as coverage grows
            let theta_hi = (theta_lo + gap).min(1.0);
            let (e, gc0, ell) = (210_000.0, 2.7, 0.0075);
            let eps = eps_rel * critical_strain(e, gc0, ell);
            let s_lo = homogeneous_stress(eps, e, gc_degraded(theta_lo, gc0, 0.89).unwrap(), ell);
            let s_hi = homogeneous_stress(eps, e, gc_degraded(theta_hi, gc0, 0.89).unwrap(), ell);
            prop_assert!(s_hi < s_lo);
        }
    }
}
