//! Element integrals, boundary loads, nodal recovery and global assembly.

mod elements;
mod neumann;
mod recovery;
mod system;

pub use elements::{
    element_diffusion, element_displacement, element_elastic_stiffness, element_internal_force,
    element_phase, uniform_phase_root, update_history, update_sigma_h_at_gauss, update_theta,
    GaussPointData,
};
pub use neumann::{apply_neumann, EdgeLoad};
pub use recovery::{recover_sigma_h, RecoveryStress};
pub use system::{assemble_global, FieldKind, SparseSystem};
