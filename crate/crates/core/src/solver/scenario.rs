//! Scenario driver: initial conditions, the staggered increment, time
//! marching with persistent step cuts, and reaction extraction.

use log::{debug, warn};
use nalgebra::DVector;

use crate::assembly::{
    assemble_global, element_diffusion, element_displacement, element_internal_force,
    element_phase, recover_sigma_h, update_history, update_sigma_h_at_gauss, update_theta,
    FieldKind,
};
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::{shape_functions, Mesh};
use crate::physics::{plane_strain_stiffness, PlaneStrainElasticity};
use crate::solver::linear::{solve_linear, MatrixClass};
use crate::solver::{DofComponent, IncrementRecord, Scenario};
use crate::state::FieldState;

/// Seeded history value for initial defects, in units of Gc0/ell; large
/// enough to drive the first phase solve to phi near 1 inside the defect.
const DEFECT_SEED_FACTOR: f64 = 1e3;

/// Relative undershoot of the concentration field (vs its maximum) that
/// fails a run instead of being silently tolerated.
const UNDERSHOOT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: FieldState,
    pub records: Vec<IncrementRecord>,
    pub snapshots: Vec<(f64, FieldState)>,
}

/// Validated scenario with precomputed constant data.
pub struct ScenarioDriver<'a> {
    scenario: &'a Scenario,
    elasticity: PlaneStrainElasticity,
    traction_rhs: DVector<f64>,
    flux_rhs: DVector<f64>,
    mechanics_active: bool,
    hydrogen_active: bool,
    /// Index into scenario.dirichlet of the single time-varying program.
    loading: Option<usize>,
}

impl<'a> ScenarioDriver<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.params.validate()?;
        scenario.settings.validate()?;
        scenario.mesh.validate()?;
        let mesh = &scenario.mesh;
        let mut loading = None;
        for (i, spec) in scenario.dirichlet.iter().enumerate() {
            mesh.node_set(&spec.set)?;
            spec.program.validate()?;
            if !spec.program.is_constant() {
                if spec.component == DofComponent::Concentration {
                    return Err(Error::Material(
                        "time-varying concentration programs are not supported; \
                         the loading program must drive a displacement component"
                            .into(),
                    ));
                }
                if loading.is_some() {
                    return Err(Error::Material(
                        "at most one loading program per scenario".into(),
                    ));
                }
                loading = Some(i);
            }
        }
        let mut traction_rhs = DVector::zeros(2 * mesh.nnodes());
        let mut flux_rhs = DVector::zeros(mesh.nnodes());
        let mut any_flux = false;
        for spec in &scenario.neumann {
            let rhs = crate::assembly::apply_neumann(mesh, &spec.set, spec.load, &scenario.params)?;
            match spec.load {
                crate::assembly::EdgeLoad::Traction(_) => traction_rhs += rhs,
                crate::assembly::EdgeLoad::Flux(_) => {
                    flux_rhs += rhs;
                    any_flux = true;
                }
            }
        }
        for (i, poly) in scenario.defects.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::Material(format!(
                    "defect polygon {} needs at least 3 vertices",
                    i + 1
                )));
            }
            if poly.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                return Err(Error::Material(format!("defect polygon {} not finite", i + 1)));
            }
        }
        if !(scenario.c_initial >= 0.0) || !scenario.c_initial.is_finite() {
            return Err(Error::Material("initial concentration must be >= 0".into()));
        }
        if scenario.snapshot_every == Some(0) {
            return Err(Error::Material("snapshot interval must be at least 1".into()));
        }
        let any_disp_bc = scenario
            .dirichlet
            .iter()
            .any(|s| s.component != DofComponent::Concentration);
        let any_conc_bc = scenario
            .dirichlet
            .iter()
            .any(|s| s.component == DofComponent::Concentration);
        let mechanics_active = any_disp_bc || traction_rhs.norm() > 0.0;
        if traction_rhs.norm() > 0.0 && !any_disp_bc {
            return Err(Error::Material(
                "tractions need at least one displacement constraint".into(),
            ));
        }
        let hydrogen_active = scenario.c_initial > 0.0 || any_conc_bc || any_flux;
        if scenario.settings.hydrogen_equilibrium && hydrogen_active && !any_conc_bc {
            return Err(Error::Material(
                "hydrogen equilibrium mode needs a prescribed boundary concentration".into(),
            ));
        }
        if scenario.settings.stop_reaction_fraction.is_some() && loading.is_none() {
            return Err(Error::Material(
                "reaction-based stopping needs a loading program".into(),
            ));
        }
        let elasticity =
            plane_strain_stiffness(scenario.params.young_modulus, scenario.params.poisson_ratio)?;
        Ok(ScenarioDriver {
            scenario,
            elasticity,
            traction_rhs,
            flux_rhs,
            mechanics_active,
            hydrogen_active,
            loading,
        })
    }

    pub fn loading_spec(&self) -> Option<&crate::solver::DirichletSpec> {
        self.loading.map(|i| &self.scenario.dirichlet[i])
    }

    fn dirichlet_at(&self, t: f64) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
        let mesh = &self.scenario.mesh;
        let mut disp = Vec::new();
        let mut conc = Vec::new();
        for spec in &self.scenario.dirichlet {
            let v = spec.program.value_at(t);
            let nodes = mesh.node_set(&spec.set).expect("validated in new()");
            match spec.component {
                DofComponent::Ux => disp.extend(nodes.iter().map(|&n| (2 * n, v))),
                DofComponent::Uy => disp.extend(nodes.iter().map(|&n| (2 * n + 1, v))),
                DofComponent::Concentration => conc.extend(nodes.iter().map(|&n| (n, v))),
            }
        }
        (disp, conc)
    }

    /// Uniform initial concentration, boundary values at t = 0, defect
    /// seeding, and an initial phase solve when defects are present.
    pub fn initial_state(&self) -> Result<FieldState> {
        let mesh = &self.scenario.mesh;
        let params = &self.scenario.params;
        let ng = mesh.kind.ngauss();
        let mut state = FieldState::zeros(mesh.nnodes(), mesh.nelems(), ng);
        state
            .concentration
            .iter_mut()
            .for_each(|c| *c = self.scenario.c_initial);
        let (_, conc_bc) = self.dirichlet_at(0.0);
        for (dof, v) in conc_bc {
            state.concentration[dof] = v;
        }
        let seed = DEFECT_SEED_FACTOR * params.gc0 / params.length_scale;
        let mut seeded = false;
        if !self.scenario.defects.is_empty() {
            let quad = mesh.kind.quadrature();
            for e in 0..mesh.nelems() {
                let coords = mesh.elem_coords(e);
                for (g, &(xi, eta)) in quad.points.iter().enumerate() {
                    let n = shape_functions(mesh.kind, xi, eta).0;
                    let mut p = [0.0, 0.0];
                    for a in 0..coords.nrows() {
                        p[0] += n[a] * coords[(a, 0)];
                        p[1] += n[a] * coords[(a, 1)];
                    }
                    if self.scenario.defects.iter().any(|poly| point_in_polygon(p, poly)) {
                        state.gauss[e * ng + g].history = seed;
                        seeded = true;
                    }
                }
            }
        }
        for e in 0..mesh.nelems() {
            let coords = mesh.elem_coords(e);
            let c_e = gather_scalar(mesh, e, &state.concentration);
            update_theta(
                mesh.kind,
                &coords,
                &c_e,
                params,
                &mut state.gauss[e * ng..(e + 1) * ng],
            )?;
        }
        if seeded {
            self.newton_phase(&mut state.phase, &state.gauss)
                .map_err(|e| Error::solver(0.0, format!("initial defect phase solve: {e}")))?;
        }
        Ok(state)
    }

    fn solve_displacement(
        &self,
        phase: &DVector<f64>,
        disp_bc: &[(usize, f64)],
    ) -> Result<DVector<f64>> {
        let mesh = &self.scenario.mesh;
        let params = &self.scenario.params;
        let nn = mesh.kind.nnodes();
        let zero_u = DVector::zeros(2 * nn);
        let mut sys = assemble_global(
            mesh,
            FieldKind::Displacement,
            |e| {
                let coords = mesh.elem_coords(e);
                let phi_e = gather_scalar(mesh, e, phase);
                let (_, k) = element_displacement(
                    mesh.kind,
                    &coords,
                    &zero_u,
                    &phi_e,
                    &self.elasticity,
                    params,
                )?;
                Ok((k, DVector::zeros(2 * nn)))
            },
            disp_bc,
        )?;
        sys.add_rhs_global(&self.traction_rhs);
        solve_linear(&sys, MatrixClass::SymmetricPositiveDefinite)
    }

    /// Newton loop on the phase sub-problem; the residual is linear in
    /// phi, so one step converges. Clamps the result into [0, 1].
    fn newton_phase(
        &self,
        phase: &mut DVector<f64>,
        gauss: &[crate::assembly::GaussPointData],
    ) -> Result<usize> {
        let mesh = &self.scenario.mesh;
        let params = &self.scenario.params;
        let settings = &self.scenario.settings;
        let ng = mesh.kind.ngauss();
        let mut first_norm: Option<f64> = None;
        for iter in 0..=settings.max_newton_iters {
            let sys = assemble_global(
                mesh,
                FieldKind::Scalar,
                |e| {
                    let coords = mesh.elem_coords(e);
                    let phi_e = gather_scalar(mesh, e, phase);
                    let (r, k) =
                        element_phase(mesh.kind, &coords, &phi_e, &gauss[e * ng..(e + 1) * ng], params)?;
                    Ok((k, -r))
                },
                &[],
            )?;
            let rnorm = sys.rhs.norm();
            let reference = *first_norm.get_or_insert(rnorm.max(1e-300));
            if rnorm <= settings.newton_tol * reference {
                clamp_phase(phase);
                return Ok(iter);
            }
            if iter == settings.max_newton_iters {
                break;
            }
            let delta = solve_linear(&sys, MatrixClass::SymmetricPositiveDefinite)?;
            *phase += &delta;
            // phi is dimensionless and order one, so a vanishing update is
            // itself convergence even when the first residual sits at
            // roundoff and the relative test above cannot be met
            if delta.norm() <= settings.newton_tol * phase.norm().max(1.0) {
                clamp_phase(phase);
                return Ok(iter + 1);
            }
        }
        Err(Error::LinearSolve(format!(
            "phase-field Newton did not converge in {} iterations",
            settings.max_newton_iters
        )))
    }

    fn solve_transport(
        &self,
        c_old: &DVector<f64>,
        sigma_h: &DVector<f64>,
        conc_bc: &[(usize, f64)],
        dt: f64,
    ) -> Result<DVector<f64>> {
        let mesh = &self.scenario.mesh;
        let params = &self.scenario.params;
        let settings = &self.scenario.settings;
        let equilibrium = settings.hydrogen_equilibrium;
        if !equilibrium && !(dt > 0.0) {
            return Err(Error::LinearSolve(
                "transient transport step needs dt > 0".into(),
            ));
        }
        let mut sys = assemble_global(
            mesh,
            FieldKind::Scalar,
            |e| {
                let coords = mesh.elem_coords(e);
                let c_e = gather_scalar(mesh, e, c_old);
                let sh_e = gather_scalar(mesh, e, sigma_h);
                let (k_c, m, _) = element_diffusion(mesh.kind, &coords, &c_e, &sh_e, params)?;
                if equilibrium {
                    let n = k_c.nrows();
                    Ok((k_c, DVector::zeros(n)))
                } else {
                    let m_dt = m / dt;
                    let rhs = &m_dt * &c_e;
                    Ok((k_c + m_dt, rhs))
                }
            },
            conc_bc,
        )?;
        sys.add_rhs_global(&self.flux_rhs);
        solve_linear(&sys, MatrixClass::General)
    }

    /// One time increment of the staggered scheme: per pass, displacement
    /// solve, history and coverage update, phase solve, stress recovery,
    /// transport step. Passes repeat until each field's relative change
    /// drops below staggered_tol or the pass budget is exhausted.
    pub fn staggered_increment(
        &self,
        state: &FieldState,
        t_new: f64,
        dt: f64,
    ) -> Result<(FieldState, usize)> {
        let mesh = &self.scenario.mesh;
        let params = &self.scenario.params;
        let settings = &self.scenario.settings;
        let ng = mesh.kind.ngauss();
        let (disp_bc, conc_bc) = self.dirichlet_at(t_new);
        let mut work = state.clone();
        work.time = t_new;
        let mut passes_used = settings.staggered_passes;
        for pass in 1..=settings.staggered_passes {
            let u_ref = work.displacement.clone();
            let phi_ref = work.phase.clone();
            let c_ref = work.concentration.clone();

            if self.mechanics_active {
                work.displacement = self
                    .solve_displacement(&work.phase, &disp_bc)
                    .map_err(|e| Error::solver(t_new, format!("displacement solve: {e}")))?;
            }

            for e in 0..mesh.nelems() {
                let coords = mesh.elem_coords(e);
                let gp = &mut work.gauss[e * ng..(e + 1) * ng];
                // restart from the last accepted increment so H reflects
                // this pass's displacement, not a transient overshoot
                gp.clone_from_slice(&state.gauss[e * ng..(e + 1) * ng]);
                let c_e = gather_scalar(mesh, e, &work.concentration);
                update_theta(mesh.kind, &coords, &c_e, params, gp)?;
                let u_e = gather_vector2(mesh, e, &work.displacement);
                update_history(mesh.kind, &coords, &u_e, &self.elasticity, gp)?;
            }

            self.newton_phase(&mut work.phase, &work.gauss)
                .map_err(|e| Error::solver(t_new, format!("phase solve: {e}")))?;

            if self.mechanics_active {
                work.sigma_h = recover_sigma_h(
                    mesh,
                    &work.displacement,
                    &work.phase,
                    params,
                    settings.recovery_stress,
                )?;
                for e in 0..mesh.nelems() {
                    let sh_e = gather_scalar(mesh, e, &work.sigma_h);
                    update_sigma_h_at_gauss(
                        mesh.kind,
                        &sh_e,
                        &mut work.gauss[e * ng..(e + 1) * ng],
                    );
                }
            }

            if self.hydrogen_active {
                work.concentration = self
                    .solve_transport(&state.concentration, &work.sigma_h, &conc_bc, dt)
                    .map_err(|e| Error::solver(t_new, format!("transport solve: {e}")))?;
            }

            let du = rel_change(&work.displacement, &u_ref);
            let dphi = rel_change(&work.phase, &phi_ref);
            let dc = rel_change(&work.concentration, &c_ref);
            if du <= settings.staggered_tol
                && dphi <= settings.staggered_tol
                && dc <= settings.staggered_tol
            {
                passes_used = pass;
                break;
            }
        }
        Ok((work, passes_used))
    }

    /// Marches from t = 0 to t_end, cutting dt persistently on failed
    /// increments, recording scalars per increment and snapshots per
    /// schedule (initial and final states always included).
    pub fn run(&self) -> Result<RunResult> {
        self.run_with_observer(|_, _| {})
    }

    /// Like `run`, but calls `observer` with the accepted state and its
    /// record after every increment, so callers can monitor long runs
    /// without retaining snapshots.
    pub fn run_with_observer<F>(&self, mut observer: F) -> Result<RunResult>
    where
        F: FnMut(&FieldState, &IncrementRecord),
    {
        let settings = &self.scenario.settings;
        let mut state = self.initial_state()?;
        let mut records: Vec<IncrementRecord> = Vec::new();
        let mut snapshots = vec![(0.0, state.clone())];
        let mut times = self.scenario.snapshot_times.clone();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut next_time = 0usize;
        let mut dt = settings.dt;
        let mut cuts = 0usize;
        let mut increment = 0usize;
        let mut peak_reaction = 0.0f64;
        let mut last_max_phi = 0.0f64;
        while state.time < settings.t_end - 1e-12 * settings.t_end {
            let t_new = (state.time + dt).min(settings.t_end);
            match self.staggered_increment(&state, t_new, t_new - state.time) {
                Err(e) => {
                    cuts += 1;
                    if cuts > settings.max_cuts {
                        return Err(Error::solver(
                            state.time,
                            format!("increment {} failed after {} cuts: {e}", increment + 1, cuts - 1),
                        ));
                    }
                    dt *= settings.dt_cut_factor;
                    warn!("increment {} failed ({e}); cutting dt to {dt:.3e}", increment + 1);
                }
                Ok((new_state, passes)) => {
                    let (min_c, max_c) = extremes(&new_state.concentration);
                    if self.hydrogen_active && min_c < -UNDERSHOOT_FRACTION * max_c.abs().max(1e-12)
                    {
                        return Err(Error::solver(
                            t_new,
                            format!(
                                "concentration undershoot {min_c:.3e} against maximum {max_c:.3e}; \
                                 refine the mesh or the time step"
                            ),
                        ));
                    }
                    increment += 1;
                    let prescribed = self
                        .loading_spec()
                        .map(|s| s.program.value_at(t_new))
                        .unwrap_or(0.0);
                    let reaction = match self.loading_spec() {
                        Some(spec) => {
                            let nodes = self.scenario.mesh.node_set(&spec.set)?;
                            reaction_force(
                                &self.scenario.mesh,
                                &self.scenario.params,
                                &new_state,
                                nodes,
                                spec.component,
                            )?
                        }
                        None => 0.0,
                    };
                    let max_phi = new_state.phase.max();
                    debug!(
                        "t = {t_new:.6e}: passes = {passes}, reaction = {reaction:.6e}, max phi = {max_phi:.4}"
                    );
                    if max_phi < last_max_phi - 1e-9 {
                        warn!(
                            "max phi decreased from {last_max_phi:.6} to {max_phi:.6} at t = {t_new:.6e}"
                        );
                    }
                    last_max_phi = last_max_phi.max(max_phi);
                    records.push(IncrementRecord {
                        time: t_new,
                        prescribed,
                        reaction,
                        max_phi,
                        min_c,
                        max_c,
                        passes,
                    });
                    observer(&new_state, records.last().unwrap());
                    let mut want = self
                        .scenario
                        .snapshot_every
                        .map(|n| increment % n == 0)
                        .unwrap_or(false);
                    while next_time < times.len() && times[next_time] <= t_new + 1e-12 {
                        want = true;
                        next_time += 1;
                    }
                    if want {
                        snapshots.push((t_new, new_state.clone()));
                    }
                    if let Some(frac) = settings.stop_reaction_fraction {
                        let a = reaction.abs();
                        if a > peak_reaction {
                            peak_reaction = a;
                        } else if peak_reaction > 0.0 && a < frac * peak_reaction {
                            state = new_state;
                            break;
                        }
                    }
                    state = new_state;
                }
            }
        }
        if snapshots
            .last()
            .map(|(t, _)| (*t - state.time).abs() > 1e-12 * state.time.max(1.0))
            .unwrap_or(true)
        {
            snapshots.push((state.time, state.clone()));
        }
        Ok(RunResult { state, records, snapshots })
    }
}

/// Entry point: validates and runs a scenario.
pub fn run_scenario(scenario: &Scenario) -> Result<RunResult> {
    ScenarioDriver::new(scenario)?.run()
}

/// Sum of internal nodal forces (degraded stress) over `set` along a
/// displacement component, N per unit thickness.
pub fn reaction_force(
    mesh: &Mesh,
    params: &MaterialParams,
    state: &FieldState,
    set: &[usize],
    component: DofComponent,
) -> Result<f64> {
    let offset = match component {
        DofComponent::Ux => 0,
        DofComponent::Uy => 1,
        DofComponent::Concentration => {
            return Err(Error::Material(
                "reaction force needs a displacement component".into(),
            ))
        }
    };
    let elasticity = plane_strain_stiffness(params.young_modulus, params.poisson_ratio)?;
    let mut f_int = DVector::<f64>::zeros(2 * mesh.nnodes());
    for e in 0..mesh.nelems() {
        let coords = mesh.elem_coords(e);
        let u_e = gather_vector2(mesh, e, &state.displacement);
        let phi_e = gather_scalar(mesh, e, &state.phase);
        let r = element_internal_force(mesh.kind, &coords, &u_e, &phi_e, &elasticity, params)?;
        for (a, &n) in mesh.elem_nodes(e).iter().enumerate() {
            f_int[2 * n] += r[2 * a];
            f_int[2 * n + 1] += r[2 * a + 1];
        }
    }
    Ok(set.iter().map(|&n| f_int[2 * n + offset]).sum())
}

fn gather_scalar(mesh: &Mesh, e: usize, v: &DVector<f64>) -> DVector<f64> {
    let nodes = mesh.elem_nodes(e);
    DVector::from_fn(nodes.len(), |a, _| v[nodes[a]])
}

fn gather_vector2(mesh: &Mesh, e: usize, v: &DVector<f64>) -> DVector<f64> {
    let nodes = mesh.elem_nodes(e);
    DVector::from_fn(2 * nodes.len(), |i, _| {
        let (a, d) = (i / 2, i % 2);
        v[2 * nodes[a] + d]
    })
}

fn rel_change(new: &DVector<f64>, old: &DVector<f64>) -> f64 {
    (new - old).norm() / new.norm().max(1e-300)
}

fn extremes(v: &DVector<f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in v.iter() {
        min = min.min(x);
        max = max.max(x);
    }
    if v.is_empty() {
        (0.0, 0.0)
    } else {
        (min, max)
    }
}

fn clamp_phase(phase: &mut DVector<f64>) {
    let (raw_min, raw_max) = extremes(phase);
    if raw_min < -1e-8 || raw_max > 1.0 + 1e-8 {
        debug!("clamping phase field, raw range [{raw_min:.3e}, {raw_max:.3e}]");
    }
    phase.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
}

/// Even-odd ray casting; points exactly on an edge count by crossing
/// parity, adequate for Gauss points strictly inside elements.
fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::default_iron_params;
    use crate::mesh::{generate_rect_mesh, ElemKind};
    use crate::solver::{BcProgram, DirichletSpec, NeumannSpec, SolverSettings};
    use approx::assert_relative_eq;

    fn base_scenario(mesh: crate::mesh::Mesh) -> Scenario {
        Scenario {
            mesh,
            params: default_iron_params(),
            settings: SolverSettings::default(),
            dirichlet: Vec::new(),
            neumann: Vec::new(),
            c_initial: 0.0,
            defects: Vec::new(),
            snapshot_every: None,
            snapshot_times: Vec::new(),
        }
    }

    #[test]
    fn point_in_polygon_square() {
        let poly = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(point_in_polygon([0.5, 0.5], &poly));
        assert!(!point_in_polygon([1.5, 0.5], &poly));
        assert!(!point_in_polygon([-0.1, 0.5], &poly));
        assert!(point_in_polygon([0.01, 0.99], &poly));
    }

    #[test]
    fn zero_load_scenario_stays_pristine() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.settings.dt = 0.5;
        sc.settings.t_end = 1.5;
        sc.dirichlet.push(DirichletSpec {
            set: "bottom".into(),
            component: DofComponent::Uy,
            program: BcProgram::Constant(0.0),
        });
        sc.dirichlet.push(DirichletSpec {
            set: "bottom".into(),
            component: DofComponent::Ux,
            program: BcProgram::Constant(0.0),
        });
        let out = run_scenario(&sc).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_relative_eq!(out.state.displacement.norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(out.state.phase.norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(out.state.concentration.norm(), 0.0, epsilon = 1e-12);
        for r in &out.records {
            assert_eq!(r.reaction, 0.0);
            assert_eq!(r.prescribed, 0.0);
            assert_eq!(r.max_phi, 0.0);
        }
    }

    #[test]
    fn diffusion_relaxes_to_boundary_concentration() {
        let mesh = generate_rect_mesh(1.0, 1.0, 3, 3, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.params.diffusivity = 50.0; // fast transport: interior follows boundary
        sc.settings.dt = 0.2;
        sc.settings.t_end = 1.0;
        let cb = 0.75;
        for set in ["left", "right", "top", "bottom"] {
            sc.dirichlet.push(DirichletSpec {
                set: set.into(),
                component: DofComponent::Concentration,
                program: BcProgram::Constant(cb),
            });
        }
        let out = run_scenario(&sc).unwrap();
        for &c in out.state.concentration.iter() {
            assert_relative_eq!(c, cb, max_relative = 1e-6);
        }
        assert_relative_eq!(out.state.phase.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn equilibrium_mode_reaches_uniform_state_in_one_increment() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad8, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.settings.hydrogen_equilibrium = true;
        sc.settings.dt = 1.0;
        sc.settings.t_end = 1.0;
        let cb = 0.4;
        for set in ["left", "right"] {
            sc.dirichlet.push(DirichletSpec {
                set: set.into(),
                component: DofComponent::Concentration,
                program: BcProgram::Constant(cb),
            });
        }
        let out = run_scenario(&sc).unwrap();
        assert_eq!(out.records.len(), 1);
        for &c in out.state.concentration.iter() {
            assert_relative_eq!(c, cb, max_relative = 1e-9);
        }
    }

    #[test]
    fn defect_seeding_opens_the_phase_field() {
        let mesh = generate_rect_mesh(1.0, 1.0, 8, 8, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        // band across the lower-left quarter
        sc.defects.push(vec![
            [0.0, 0.4],
            [0.5, 0.4],
            [0.5, 0.6],
            [0.0, 0.6],
        ]);
        let driver = ScenarioDriver::new(&sc).unwrap();
        let state = driver.initial_state().unwrap();
        let mut inside_max = 0.0f64;
        let mut far_max = 0.0f64;
        for n in 0..sc.mesh.nnodes() {
            let [x, y] = sc.mesh.coords[n];
            let phi = state.phase[n];
            if x < 0.45 && (y - 0.5).abs() < 0.05 {
                inside_max = inside_max.max(phi);
            }
            if x > 0.8 || (y - 0.5).abs() > 0.3 {
                far_max = far_max.max(phi);
            }
        }
        assert!(inside_max > 0.95, "defect zone phi = {inside_max}");
        assert!(far_max < 0.2, "far field phi = {far_max}");
    }

    #[test]
    fn zero_dt_transient_step_is_rejected() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.c_initial = 1.0;
        let driver = ScenarioDriver::new(&sc).unwrap();
        let state = driver.initial_state().unwrap();
        let err = driver.staggered_increment(&state, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("dt > 0"), "{err}");
    }

    #[test]
    fn two_loading_programs_are_rejected() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        let ramp = BcProgram::Table(vec![(0.0, 0.0), (1.0, 1.0)]);
        sc.dirichlet.push(DirichletSpec {
            set: "top".into(),
            component: DofComponent::Uy,
            program: ramp.clone(),
        });
        sc.dirichlet.push(DirichletSpec {
            set: "right".into(),
            component: DofComponent::Ux,
            program: ramp,
        });
        let err = ScenarioDriver::new(&sc).err().unwrap();
        assert!(err.to_string().contains("loading program"), "{err}");
    }

    #[test]
    fn ramped_concentration_is_rejected() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.dirichlet.push(DirichletSpec {
            set: "left".into(),
            component: DofComponent::Concentration,
            program: BcProgram::Table(vec![(0.0, 0.0), (1.0, 1.0)]),
        });
        assert!(ScenarioDriver::new(&sc).is_err());
    }

    #[test]
    fn missing_set_is_reported() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.dirichlet.push(DirichletSpec {
            set: "nowhere".into(),
            component: DofComponent::Ux,
            program: BcProgram::Constant(0.0),
        });
        let err = ScenarioDriver::new(&sc).err().unwrap();
        assert!(err.to_string().contains("nowhere"), "{err}");
    }

    #[test]
    fn traction_without_support_is_rejected() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.neumann.push(NeumannSpec {
            set: "top".into(),
            load: crate::assembly::EdgeLoad::Traction([0.0, 10.0]),
        });
        let err = ScenarioDriver::new(&sc).err().unwrap();
        assert!(err.to_string().contains("displacement constraint"), "{err}");
    }

    #[test]
    fn reactions_balance_between_opposite_sets() {
        let mesh = generate_rect_mesh(1.0, 2.0, 2, 4, ElemKind::Quad4, &[]).unwrap();
        let mut sc = base_scenario(mesh);
        sc.settings.dt = 1.0;
        sc.settings.t_end = 1.0;
        sc.settings.staggered_passes = 10;
        sc.settings.staggered_tol = 1e-10;
        sc.dirichlet.push(DirichletSpec {
            set: "bottom".into(),
            component: DofComponent::Uy,
            program: BcProgram::Constant(0.0),
        });
        sc.dirichlet.push(DirichletSpec {
            set: "bottom".into(),
            component: DofComponent::Ux,
            program: BcProgram::Constant(0.0),
        });
        sc.dirichlet.push(DirichletSpec {
            set: "top".into(),
            component: DofComponent::Uy,
            program: BcProgram::Table(vec![(0.0, 0.0), (1.0, 1e-4)]),
        });
        let out = run_scenario(&sc).unwrap();
        let top = sc.mesh.node_set("top").unwrap();
        let bottom = sc.mesh.node_set("bottom").unwrap();
        let r_top =
            reaction_force(&sc.mesh, &sc.params, &out.state, top, DofComponent::Uy).unwrap();
        let r_bottom =
            reaction_force(&sc.mesh, &sc.params, &out.state, bottom, DofComponent::Uy).unwrap();
        assert!(r_top > 0.0);
        assert_relative_eq!(r_top, -r_bottom, max_relative = 1e-9);
        assert_relative_eq!(out.records.last().unwrap().reaction, r_top, max_relative = 1e-12);
    }
}
