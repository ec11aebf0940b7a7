//! Empty library target; the crate exists for benches/kernels.rs.
