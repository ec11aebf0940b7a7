//! Analytical oracles and the verification suite that cross-checks the
//! solver against closed-form solutions.

mod oracles;
mod special;
mod suite;

pub use oracles::{diffusion_1d_oracle, gamma_functional, steady_enrichment_oracle};
pub use special::{erf, erfc};
pub use suite::{format_table, run_verification_suite, to_csv, OracleReport, VerifyLevel};
