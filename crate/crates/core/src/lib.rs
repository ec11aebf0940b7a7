//! Finite element solver for hydrogen-assisted cracking.
//!
//! Couples plane-strain elasticity, phase-field fracture with a
//! hydrogen-degraded critical energy release rate, and stress-assisted
//! hydrogen transport, advanced by an implicit staggered scheme.
//!
//! Units are N, mm, s, mol, K throughout: stresses in MPa, energies per
//! area in N/mm, diffusivity in mm^2/s, concentrations in wt ppm.

pub mod assembly;
pub mod config;
pub mod error;
pub mod material;
pub mod mesh;
pub mod output;
pub mod physics;
pub mod solver;
pub mod state;
pub mod verify;

pub use assembly::GaussPointData;
pub use config::{parse_config, parse_config_str, MeshSource, OutputSchedule, ScenarioConfig};
pub use error::{Error, Result};
pub use material::{default_iron_params, MaterialParams};
pub use output::{history_csv_string, vtk_string, write_history_csv, write_vtk};
pub use mesh::{generate_rect_mesh, read_mesh, write_mesh, ElemKind, Mesh, RefinementBand};
pub use solver::{
    run_scenario, BcProgram, DirichletSpec, DofComponent, IncrementRecord, NeumannSpec,
    RunResult, Scenario, ScenarioDriver, SolverSettings,
};
pub use state::FieldState;
