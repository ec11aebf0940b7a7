//! Time-stepped staggered solution of the coupled deformation,
//! phase-field and hydrogen transport problem.

mod linear;
mod scenario;

pub use linear::{solve_linear, MatrixClass};
pub use scenario::{reaction_force, run_scenario, RunResult, ScenarioDriver};

use crate::assembly::RecoveryStress;
use crate::error::{Error, Result};

/// Time stepping and convergence control.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Initial time increment, s.
    pub dt: f64,
    /// End time, s.
    pub t_end: f64,
    /// Upper bound on staggered passes per increment; 1 reproduces the
    /// classic one-pass scheme.
    pub staggered_passes: usize,
    /// Relative pass-to-pass field change below which an increment is
    /// considered staggered-converged.
    pub staggered_tol: f64,
    /// Relative residual drop required of each Newton sub-solve.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Multiplier applied to dt when an increment fails; the cut persists.
    pub dt_cut_factor: f64,
    pub max_cuts: usize,
    /// Replace transient transport by the steady solve K_c C = F each
    /// increment (hydrogen always in equilibrium with the stress field).
    pub hydrogen_equilibrium: bool,
    /// Stress entering the drift-term recovery.
    pub recovery_stress: RecoveryStress,
    /// Stop once |reaction| falls below this fraction of the peak seen so
    /// far (softening tail cut-off); None runs to t_end.
    pub stop_reaction_fraction: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dt: 1.0,
            t_end: 1.0,
            staggered_passes: 1,
            staggered_tol: 1e-6,
            newton_tol: 1e-8,
            max_newton_iters: 20,
            dt_cut_factor: 0.5,
            max_cuts: 8,
            hydrogen_equilibrium: false,
            recovery_stress: RecoveryStress::Undamaged,
            stop_reaction_fraction: None,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Material("dt must be positive".into()));
        }
        if !(self.t_end >= self.dt) {
            return Err(Error::Material("t_end must be at least dt".into()));
        }
        if self.staggered_passes < 1 {
            return Err(Error::Material("staggered_passes must be at least 1".into()));
        }
        for (name, v) in [
            ("staggered_tol", self.staggered_tol),
            ("newton_tol", self.newton_tol),
            ("dt_cut_factor", self.dt_cut_factor),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Material(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.max_newton_iters < 1 {
            return Err(Error::Material("max_newton_iters must be at least 1".into()));
        }
        if let Some(f) = self.stop_reaction_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Material(
                    "stop_reaction_fraction must lie in (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which nodal degree of freedom a boundary condition constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofComponent {
    Ux,
    Uy,
    Concentration,
}

impl DofComponent {
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "ux" => Ok(DofComponent::Ux),
            "uy" => Ok(DofComponent::Uy),
            "c" => Ok(DofComponent::Concentration),
            other => Err(Error::Material(format!(
                "unknown dof component '{other}' (expected ux, uy or c)"
            ))),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            DofComponent::Ux => "ux",
            DofComponent::Uy => "uy",
            DofComponent::Concentration => "c",
        }
    }
}

/// Prescribed boundary value over time: a constant or a piecewise-linear
/// table with non-decreasing time knots, held constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub enum BcProgram {
    Constant(f64),
    Table(Vec<(f64, f64)>),
}

impl BcProgram {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            BcProgram::Constant(v) => *v,
            BcProgram::Table(knots) => {
                if knots.is_empty() {
                    return 0.0;
                }
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                for w in knots.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        if t1 == t0 {
                            return v1;
                        }
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                knots.last().unwrap().1
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            BcProgram::Constant(_) => true,
            BcProgram::Table(knots) => knots.iter().all(|&(_, v)| v == knots[0].1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BcProgram::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::Material("boundary value must be finite".into()));
                }
            }
            BcProgram::Table(knots) => {
                if knots.is_empty() {
                    return Err(Error::Material("ramp table must have at least one knot".into()));
                }
                let mut prev = f64::NEG_INFINITY;
                for &(t, v) in knots {
                    if !t.is_finite() || !v.is_finite() {
                        return Err(Error::Material("ramp knots must be finite".into()));
                    }
                    if t < prev {
                        return Err(Error::Material(
                            "ramp time knots must be non-decreasing".into(),
                        ));
                    }
                    prev = t;
                }
            }
        }
        Ok(())
    }
}

/// Essential boundary condition on a named node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSpec {
    pub set: String,
    pub component: DofComponent,
    pub program: BcProgram,
}

/// Natural boundary condition on a named node set.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSpec {
    pub set: String,
    pub load: crate::assembly::EdgeLoad,
}

/// Everything a run needs: geometry, material, schedule and conditions.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mesh: crate::mesh::Mesh,
    pub params: crate::material::MaterialParams,
    pub settings: SolverSettings,
    pub dirichlet: Vec<DirichletSpec>,
    pub neumann: Vec<NeumannSpec>,
    /// Uniform initial hydrogen concentration, wt ppm.
    pub c_initial: f64,
    /// Initial-defect polygons; Gauss points inside are seeded with a
    /// large history value so the first phase solve opens the defect.
    pub defects: Vec<Vec<[f64; 2]>>,
    /// Emit a field snapshot every n accepted increments.
    pub snapshot_every: Option<usize>,
    /// Additional snapshot times; each fires once at the first increment
    /// reaching it.
    pub snapshot_times: Vec<f64>,
}

/// Per-increment scalar history, one row of the history CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementRecord {
    pub time: f64,
    /// Value of the loading program at `time` (0 when no program).
    pub prescribed: f64,
    /// Reaction along the loading component over the loading set, N per
    /// unit thickness.
    pub reaction: f64,
    pub max_phi: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub passes: usize,
}
