//! Material data and unit conventions.
//!
//! Everything in the solver is expressed in a consistent N-mm-s-mol-K
//! system: lengths in mm, stresses and elastic moduli in MPa (N/mm^2),
//! fracture energies in N/mm (numerically equal to kJ/m^2), molar volumes
//! in mm^3/mol, diffusivities in mm^2/s and temperatures in K. Hydrogen
//! content is carried as a mass concentration in wt ppm; it is converted
//! to a lattice mole fraction only inside the surface-coverage isotherm.

use crate::error::{Error, Result};

/// Universal gas constant in N*mm/(mol*K).
pub const GAS_CONSTANT: f64 = 8314.0;

/// Molar mass of atomic hydrogen in g/mol.
pub const MOLAR_MASS_HYDROGEN: f64 = 1.008;

/// Molar mass of iron in g/mol.
pub const MOLAR_MASS_IRON: f64 = 55.85;

/// Physical parameters of the coupled elasticity / fracture / diffusion model.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    /// Young's modulus E in MPa.
    pub young_modulus: f64,
    /// Poisson's ratio.
    pub poisson_ratio: f64,
    /// Critical energy release rate of the hydrogen-free material, N/mm.
    pub gc0: f64,
    /// Phase-field regularization length in mm.
    pub length_scale: f64,
    /// Residual stiffness factor keeping the fully damaged stiffness positive.
    pub stiffness_floor: f64,
    /// Hydrogen damage coefficient weighting the fracture-energy reduction.
    pub damage_coeff: f64,
    /// Hydrogen diffusivity in mm^2/s.
    pub diffusivity: f64,
    /// Partial molar volume of hydrogen in mm^3/mol.
    pub molar_volume: f64,
    /// Gibbs free energy difference between interface and surrounding
    /// matrix, N*mm/mol.
    pub binding_energy: f64,
    /// Absolute temperature in K.
    pub temperature: f64,
    /// Universal gas constant in N*mm/(mol*K); fixed at 8314.
    pub gas_constant: f64,
    /// Molar mass of the host lattice in g/mol.
    pub host_molar_mass: f64,
    /// Molar mass of the diffusing impurity in g/mol.
    pub impurity_molar_mass: f64,
}

/// Parameter set for a generic iron-based steel, used throughout the
/// built-in verification scenarios.
pub fn default_iron_params() -> MaterialParams {
    MaterialParams {
        young_modulus: 210_000.0,
        poisson_ratio: 0.3,
        gc0: 2.7,
        length_scale: 0.0075,
        stiffness_floor: 1e-7,
        damage_coeff: 0.89,
        diffusivity: 0.0127,
        molar_volume: 2000.0,
        // 30 kJ/mol expressed in N*mm/mol.
        binding_energy: 3.0e7,
        temperature: 300.0,
        gas_constant: GAS_CONSTANT,
        host_molar_mass: MOLAR_MASS_IRON,
        impurity_molar_mass: MOLAR_MASS_HYDROGEN,
    }
}

impl MaterialParams {
    /// Rejects parameter combinations that make the model ill-posed.
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Material(msg.to_string()))
            }
        };
        check(self.young_modulus > 0.0, "young_modulus must be positive")?;
        check(
            (0.0..0.5).contains(&self.poisson_ratio),
            "poisson_ratio must lie in [0, 0.5)",
        )?;
        check(self.gc0 > 0.0, "gc0 must be positive")?;
        check(self.length_scale > 0.0, "length_scale must be positive")?;
        check(
            self.stiffness_floor > 0.0 && self.stiffness_floor < 1e-3,
            "stiffness_floor must lie in (0, 1e-3)",
        )?;
        check(
            (0.0..=1.0).contains(&self.damage_coeff),
            "damage_coeff must lie in [0, 1]",
        )?;
        check(self.diffusivity >= 0.0, "diffusivity must be non-negative")?;
        check(self.molar_volume >= 0.0, "molar_volume must be non-negative")?;
        check(self.temperature > 0.0, "temperature must be positive")?;
        check(
            self.gas_constant == GAS_CONSTANT,
            "gas_constant is fixed at 8314 N*mm/(mol*K)",
        )?;
        check(self.host_molar_mass > 0.0, "host_molar_mass must be positive")?;
        check(
            self.impurity_molar_mass > 0.0,
            "impurity_molar_mass must be positive",
        )?;
        Ok(())
    }
}
