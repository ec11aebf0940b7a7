//! Direct sparse solution of assembled systems.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DVector;

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;

/// Chooses the factorization. Displacement and phase-field operators are
/// symmetric positive definite; the transport operator carries the
/// non-self-adjoint drift term and needs partial-pivoting LU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixClass {
    SymmetricPositiveDefinite,
    General,
}

/// Solves the constrained system by symmetric Dirichlet elimination and a
/// direct sparse factorization. The returned vector carries prescribed
/// values at constrained dofs. A residual check at 1e-10 relative guards
/// every solve.
pub fn solve_linear(system: &SparseSystem, class: MatrixClass) -> Result<DVector<f64>> {
    let n = system.ndofs();
    let free = system.free_dofs();
    let mut full = DVector::zeros(n);
    for d in 0..n {
        if let Some(v) = system.prescribed(d) {
            full[d] = v;
        }
    }
    if free.is_empty() {
        return Ok(full);
    }
    let mut index_of = vec![usize::MAX; n];
    for (i, &d) in free.iter().enumerate() {
        index_of[d] = i;
    }
    let nf = free.len();
    let mut rhs = DVector::<f64>::zeros(nf);
    for (i, &d) in free.iter().enumerate() {
        rhs[i] = system.rhs[d];
    }
    let mut triplets: Vec<Triplet<usize, usize, f64>> = Vec::new();
    for &(r, c, v) in system.triplets() {
        let (fr, fc) = (index_of[r], index_of[c]);
        match (fr != usize::MAX, fc != usize::MAX) {
            (true, true) => triplets.push(Triplet::new(fr, fc, v)),
            (true, false) => {
                // column elimination moves known values to the rhs
                rhs[fr] -= v * system.prescribed(c).expect("constrained dof has value");
            }
            _ => {}
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(nf, nf, &triplets)
        .map_err(|e| Error::LinearSolve(format!("matrix construction failed: {e:?}")))?;
    let b = faer::Mat::<f64>::from_fn(nf, 1, |i, _| rhs[i]);
    // the factorization panics on an exact zero pivot; fold that into the
    // error path so a failed solve can trigger a time step cut
    let x = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match class {
        MatrixClass::SymmetricPositiveDefinite => {
            let llt = a
                .sp_cholesky(faer::Side::Lower)
                .map_err(|e| Error::LinearSolve(format!("Cholesky factorization failed: {e:?}")))?;
            Ok(llt.solve(&b))
        }
        MatrixClass::General => {
            let lu = a
                .sp_lu()
                .map_err(|e| Error::LinearSolve(format!("LU factorization failed: {e:?}")))?;
            Ok(lu.solve(&b))
        }
    }))
    .unwrap_or_else(|_| {
        Err(Error::LinearSolve("factorization hit a zero pivot".into()))
    })?;
    let x = DVector::<f64>::from_fn(nf, |i, _| x[(i, 0)]);
    // guard against a silently inaccurate factorization
    let mut residual = rhs.clone();
    for t in &triplets {
        residual[t.row] -= t.val * x[t.col];
    }
    let denom = rhs.norm().max(1e-300);
    let rel = residual.norm() / denom;
    if !rel.is_finite() || (rel > RESIDUAL_TOL && rhs.norm() > 0.0) {
        return Err(Error::LinearSolve(format!(
            "residual check failed: |Ax-b|/|b| = {rel:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    for (i, &d) in free.iter().enumerate() {
        full[d] = x[i];
    }
    Ok(full)
}
