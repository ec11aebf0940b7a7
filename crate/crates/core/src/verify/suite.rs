//! Verification suite: runs the solver against closed-form references
//! and reports structured pass/fail rows.

use log::error;
use nalgebra::{DMatrix, DVector};

use crate::assembly::{
    assemble_global, element_diffusion, element_displacement, element_phase, FieldKind,
    GaussPointData,
};
use crate::error::Result;
use crate::material::default_iron_params;
use crate::mesh::{bmatrices, generate_rect_mesh, ElemKind, Mesh};
use crate::physics::{
    coverage_from_concentration, critical_strain, critical_stress, gc_from_concentration,
    homogeneous_stress, plane_strain_stiffness,
};
use crate::solver::{
    run_scenario, solve_linear, BcProgram, DirichletSpec, DofComponent, MatrixClass, Scenario,
    SolverSettings,
};
use crate::verify::oracles::{diffusion_1d_oracle, gamma_functional, steady_enrichment_oracle};
use crate::verify::special::erfc;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    /// Relative to the reference when it is nonzero, absolute otherwise.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(name: &str, computed: f64, reference: f64, tolerance: f64) -> Self {
        let error = if reference.abs() > 0.0 {
            (computed - reference).abs() / reference.abs()
        } else {
            computed.abs()
        };
        OracleReport {
            name: name.into(),
            computed,
            reference,
            error,
            tolerance,
            pass: error.is_finite() && error <= tolerance,
        }
    }

    fn failed(name: &str, err: &crate::error::Error) -> Self {
        error!("verification check {name} failed to run: {err}");
        OracleReport {
            name: name.into(),
            computed: f64::NAN,
            reference: f64::NAN,
            error: f64::INFINITY,
            tolerance: 0.0,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

impl VerifyLevel {
    pub fn parse(token: &str) -> Option<VerifyLevel> {
        match token {
            "fast" => Some(VerifyLevel::Fast),
            "full" => Some(VerifyLevel::Full),
            _ => None,
        }
    }
}

/// Runs every analytical cross-check and returns the reports sorted by
/// name. Check failures become failed rows, never panics or errors.
pub fn run_verification_suite(level: VerifyLevel) -> Vec<OracleReport> {
    let mut reports = scalar_reports();

    match single_element_curve(0.0) {
        Ok(run) => {
            reports.push(OracleReport::new("homog_curve_max_dev", run.max_dev, 0.0, 1e-6));
            reports.push(OracleReport::new(
                "homog_peak_stress",
                run.peak_stress,
                run.reference_peak_stress,
                1e-3,
            ));
            reports.push(OracleReport::new(
                "homog_peak_strain",
                run.peak_strain,
                run.reference_peak_strain,
                1e-3,
            ));
            match single_element_curve(1.0) {
                Ok(hydro) => reports.push(OracleReport::new(
                    "hydrogen_peak_ratio",
                    hydro.peak_stress / run.peak_stress,
                    0.44344110711782406,
                    1e-3,
                )),
                Err(e) => reports.push(OracleReport::failed("hydrogen_peak_ratio", &e)),
            }
        }
        Err(e) => {
            for name in [
                "homog_curve_max_dev",
                "homog_peak_stress",
                "homog_peak_strain",
                "hydrogen_peak_ratio",
            ] {
                reports.push(OracleReport::failed(name, &e));
            }
        }
    }

    reports.extend(gamma_reports(level));

    match transient_bar_error(60, 160) {
        Ok(err) => reports.push(OracleReport::new("transport_transient_bar", err, 0.0, 1e-2)),
        Err(e) => reports.push(OracleReport::failed("transport_transient_bar", &e)),
    }
    match stressed_bar_error(ElemKind::Quad8) {
        Ok(err) => reports.push(OracleReport::new("transport_stressed_bar", err, 0.0, 5e-3)),
        Err(e) => reports.push(OracleReport::failed("transport_stressed_bar", &e)),
    }
    if level == VerifyLevel::Full {
        match (transient_bar_error(60, 160), transient_bar_error(120, 320)) {
            (Ok(coarse), Ok(fine)) => reports.push(OracleReport::new(
                "transport_refinement_ratio",
                fine / coarse,
                0.0,
                0.95,
            )),
            (Err(e), _) | (_, Err(e)) => {
                reports.push(OracleReport::failed("transport_refinement_ratio", &e))
            }
        }
        match stressed_bar_error(ElemKind::Quad4) {
            Ok(err) => {
                reports.push(OracleReport::new("transport_stressed_bar_quad4", err, 0.0, 5e-3))
            }
            Err(e) => reports.push(OracleReport::failed("transport_stressed_bar_quad4", &e)),
        }
    }

    match tangent_fd_errors() {
        Ok((du, dphi)) => {
            reports.push(OracleReport::new("tangent_fd_displacement", du, 0.0, 1e-5));
            reports.push(OracleReport::new("tangent_fd_phase", dphi, 0.0, 1e-5));
        }
        Err(e) => {
            reports.push(OracleReport::failed("tangent_fd_displacement", &e));
            reports.push(OracleReport::failed("tangent_fd_phase", &e));
        }
    }

    for (name, kind) in [
        ("patch_strain_quad4", ElemKind::Quad4),
        ("patch_strain_quad8", ElemKind::Quad8),
    ] {
        match patch_test_error(kind) {
            Ok(dev) => reports.push(OracleReport::new(name, dev, 0.0, 1e-10)),
            Err(e) => reports.push(OracleReport::failed(name, &e)),
        }
    }

    reports.sort_by(|a, b| a.name.cmp(&b.name));
    reports
}

/// Plain-text table with a trailing pass count line.
pub fn format_table(reports: &[OracleReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<32} {:>15} {:>15} {:>12} {:>10}  {}\n",
        "check", "computed", "reference", "error", "tolerance", "status"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<32} {:>15.6e} {:>15.6e} {:>12.3e} {:>10.1e}  {}\n",
            r.name,
            r.computed,
            r.reference,
            r.error,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} checks passed\n", reports.len()));
    out
}

/// Machine-readable rows: name,computed,reference,error,tolerance,pass.
pub fn to_csv(reports: &[OracleReport]) -> String {
    let mut out = String::from("name,computed,reference,error,tolerance,pass\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.9e},{:.9e},{:.9e},{:.9e},{}\n",
            r.name, r.computed, r.reference, r.error, r.tolerance, r.pass
        ));
    }
    out
}

fn scalar_reports() -> Vec<OracleReport> {
    let params = default_iron_params();
    vec![
        OracleReport::new("scalar_erfc_1", erfc(1.0), 0.157299207050285, 1e-12),
        OracleReport::new(
            "hydrogen_coverage_1wtppm",
            coverage_from_concentration(1.0, &params),
            0.902651667997886,
            1e-10,
        ),
        OracleReport::new(
            "scalar_critical_stress",
            critical_stress(params.young_modulus, params.gc0, params.length_scale),
            2823.72758955250497,
            1e-12,
        ),
        OracleReport::new(
            "scalar_critical_strain",
            critical_strain(params.young_modulus, params.gc0, params.length_scale),
            0.0239045721866879,
            1e-12,
        ),
        OracleReport::new(
            "scalar_enrichment_100mpa",
            steady_enrichment_oracle(100.0, 1.0, &params),
            1.08348861204038,
            1e-12,
        ),
    ]
}

struct CurveRun {
    max_dev: f64,
    peak_stress: f64,
    peak_strain: f64,
    reference_peak_stress: f64,
    reference_peak_strain: f64,
}

/// One fully constrained element under uniaxial strain control, ramped
/// through twice the critical strain on a grid that contains the peak.
fn single_element_curve(c_wtppm: f64) -> Result<CurveRun> {
    let mut params = default_iron_params();
    params.poisson_ratio = 0.0; // uniaxial strain then follows the 1d law
    let gc = if c_wtppm > 0.0 {
        gc_from_concentration(c_wtppm, &params)
    } else {
        params.gc0
    };
    let eps_c = critical_strain(params.young_modulus, gc, params.length_scale);
    let sigma_c = critical_stress(params.young_modulus, gc, params.length_scale);
    let increments = 40usize;
    let mesh = generate_rect_mesh(1.0, 1.0, 1, 1, ElemKind::Quad4, &[])?;
    let constant = |set: &str, component: DofComponent| DirichletSpec {
        set: set.into(),
        component,
        program: BcProgram::Constant(0.0),
    };
    let scenario = Scenario {
        mesh,
        params: params.clone(),
        settings: SolverSettings {
            dt: 1.0 / increments as f64,
            t_end: 1.0,
            staggered_passes: 500,
            staggered_tol: 1e-8,
            newton_tol: 1e-10,
            ..SolverSettings::default()
        },
        dirichlet: vec![
            constant("left", DofComponent::Ux),
            constant("right", DofComponent::Ux),
            constant("bottom", DofComponent::Uy),
            DirichletSpec {
                set: "top".into(),
                component: DofComponent::Uy,
                program: BcProgram::Table(vec![(0.0, 0.0), (1.0, 2.0 * eps_c)]),
            },
        ],
        neumann: Vec::new(),
        c_initial: c_wtppm,
        defects: Vec::new(),
        snapshot_every: None,
        snapshot_times: Vec::new(),
    };
    let out = run_scenario(&scenario)?;
    let mut max_dev = 0.0f64;
    let mut peak = (0.0, 0.0);
    for r in &out.records {
        let eps = r.prescribed; // unit height: top displacement is the strain
        let sigma = r.reaction; // unit edge, unit thickness
        let reference = homogeneous_stress(eps, params.young_modulus, gc, params.length_scale);
        if reference > 0.0 {
            max_dev = max_dev.max((sigma - reference).abs() / reference);
        }
        if sigma > peak.1 {
            peak = (eps, sigma);
        }
    }
    Ok(CurveRun {
        max_dev,
        peak_stress: peak.1,
        peak_strain: peak.0,
        reference_peak_stress: sigma_c,
        reference_peak_strain: eps_c,
    })
}

/// A one-element-tall strip of 8-node elements centered on the crack
/// plane; the optimal profile's kink lands on a node line.
fn centered_strip(ell: f64, per_ell: usize) -> Result<Mesh> {
    let width = 20.0 * ell;
    let nx = 20 * per_ell;
    let h = width / nx as f64;
    let mut mesh = generate_rect_mesh(width, h, nx, 1, ElemKind::Quad8, &[])?;
    for c in &mut mesh.coords {
        c[0] -= width / 2.0;
    }
    Ok(mesh)
}

fn gamma_strip_error(ell: f64, per_ell: usize) -> Result<f64> {
    let mesh = centered_strip(ell, per_ell)?;
    let phi = DVector::from_fn(mesh.nnodes(), |i, _| (-mesh.coords[i][0].abs() / ell).exp());
    Ok((gamma_functional(&mesh, &phi, ell)? - 1.0).abs())
}

fn gamma_reports(level: VerifyLevel) -> Vec<OracleReport> {
    let ell = 0.0075;
    let mut reports = Vec::new();
    match centered_strip(ell, 5) {
        Ok(mesh) => {
            let ones = DVector::from_element(mesh.nnodes(), 1.0);
            let zeros = DVector::zeros(mesh.nnodes());
            match gamma_functional(&mesh, &ones, ell) {
                Ok(g) => reports.push(OracleReport::new("gamma_constant_field", g, 10.0, 1e-10)),
                Err(e) => reports.push(OracleReport::failed("gamma_constant_field", &e)),
            }
            match gamma_functional(&mesh, &zeros, ell) {
                Ok(g) => reports.push(OracleReport::new("gamma_zero_field", g, 0.0, 1e-12)),
                Err(e) => reports.push(OracleReport::failed("gamma_zero_field", &e)),
            }
        }
        Err(e) => {
            reports.push(OracleReport::failed("gamma_constant_field", &e));
            reports.push(OracleReport::failed("gamma_zero_field", &e));
        }
    }
    let ladder: Result<Vec<f64>> = [5usize, 10, 20]
        .iter()
        .map(|&m| gamma_strip_error(ell, m))
        .collect();
    match ladder {
        Ok(errs) => {
            reports.push(OracleReport::new("gamma_profile_h_ell5", errs[0], 0.0, 5e-2));
            reports.push(OracleReport::new("gamma_profile_h_ell10", errs[1], 0.0, 2e-2));
            reports.push(OracleReport::new("gamma_profile_h_ell20", errs[2], 0.0, 2e-2));
            // observed order of the functional error; at least quadratic
            let order = |coarse: f64, fine: f64| (coarse / fine).log2();
            let shortfall = |p: f64| ((2.0 - p) / 2.0).max(0.0);
            reports.push(OracleReport::new(
                "gamma_order_coarse",
                shortfall(order(errs[0], errs[1])),
                0.0,
                0.1,
            ));
            reports.push(OracleReport::new(
                "gamma_order_fine",
                shortfall(order(errs[1], errs[2])),
                0.0,
                0.1,
            ));
        }
        Err(e) => {
            for name in [
                "gamma_profile_h_ell5",
                "gamma_profile_h_ell10",
                "gamma_profile_h_ell20",
                "gamma_order_coarse",
                "gamma_order_fine",
            ] {
                reports.push(OracleReport::failed(name, &e));
            }
        }
    }
    if level == VerifyLevel::Full {
        match gamma_strip_error(ell, 40) {
            Ok(err) => reports.push(OracleReport::new("gamma_profile_h_ell40", err, 0.0, 2e-2)),
            Err(e) => reports.push(OracleReport::failed("gamma_profile_h_ell40", &e)),
        }
    }
    reports
}

/// Transient bar with a step boundary concentration, compared against
/// the semi-infinite solution over the first third of the bar at the
/// time where the penetration depth reaches a third of the length.
fn transient_bar_error(nx: usize, nt: usize) -> Result<f64> {
    let params = default_iron_params();
    let d = params.diffusivity;
    let length = 1.0;
    let t_star = length * length / (144.0 * d);
    let h = length / nx as f64;
    let mesh = generate_rect_mesh(length, h, nx, 1, ElemKind::Quad8, &[])?;
    let scenario = Scenario {
        mesh,
        params,
        settings: SolverSettings {
            dt: t_star / nt as f64,
            t_end: t_star,
            staggered_passes: 3,
            staggered_tol: 1e-12,
            ..SolverSettings::default()
        },
        dirichlet: vec![DirichletSpec {
            set: "left".into(),
            component: DofComponent::Concentration,
            program: BcProgram::Constant(1.0),
        }],
        neumann: Vec::new(),
        c_initial: 0.0,
        defects: Vec::new(),
        snapshot_every: None,
        snapshot_times: Vec::new(),
    };
    let out = run_scenario(&scenario)?;
    let mesh = &scenario.mesh;
    let mut max_err = 0.0f64;
    for n in 0..mesh.nnodes() {
        let x = mesh.coords[n][0];
        if x <= length / 3.0 + 1e-12 {
            let exact = diffusion_1d_oracle(x, t_star, 1.0, d);
            max_err = max_err.max((out.state.concentration[n] - exact).abs());
        }
    }
    Ok(max_err)
}

/// Steady transport under a prescribed linear hydrostatic stress ramp;
/// the zero-flux steady state must match the enrichment oracle at every
/// node.
fn stressed_bar_error(kind: ElemKind) -> Result<f64> {
    let params = default_iron_params();
    let nx = 24;
    let mesh = generate_rect_mesh(1.0, 1.0 / nx as f64, nx, 1, kind, &[])?;
    let sigma_h = DVector::from_fn(mesh.nnodes(), |i, _| 100.0 * mesh.coords[i][0]);
    let bc: Vec<(usize, f64)> = mesh.node_set("left")?.iter().map(|&n| (n, 1.0)).collect();
    let nn = kind.nnodes();
    let sys = assemble_global(
        &mesh,
        FieldKind::Scalar,
        |e| {
            let coords = mesh.elem_coords(e);
            let nodes = mesh.elem_nodes(e);
            let zero_c = DVector::zeros(nn);
            let sh_e = DVector::from_fn(nn, |a, _| sigma_h[nodes[a]]);
            let (k_c, _, _) = element_diffusion(kind, &coords, &zero_c, &sh_e, &params)?;
            Ok((k_c, DVector::zeros(nn)))
        },
        &bc,
    )?;
    let c = solve_linear(&sys, MatrixClass::General)?;
    let mut max_err = 0.0f64;
    for n in 0..mesh.nnodes() {
        let exact = steady_enrichment_oracle(sigma_h[n], 1.0, &params);
        max_err = max_err.max((c[n] - exact).abs() / exact);
    }
    Ok(max_err)
}

fn pseudo_random(state: &mut u64) -> f64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn distorted_element(kind: ElemKind, rng: &mut u64) -> DMatrix<f64> {
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut pts: Vec<[f64; 2]> = corners
        .iter()
        .map(|p| {
            [
                p[0] + 0.2 * (pseudo_random(rng) - 0.5),
                p[1] + 0.2 * (pseudo_random(rng) - 0.5),
            ]
        })
        .collect();
    if kind == ElemKind::Quad8 {
        for i in 0..4 {
            let a = pts[i];
            let b = pts[(i + 1) % 4];
            pts.push([
                0.5 * (a[0] + b[0]) + 0.06 * (pseudo_random(rng) - 0.5),
                0.5 * (a[1] + b[1]) + 0.06 * (pseudo_random(rng) - 0.5),
            ]);
        }
    }
    DMatrix::from_fn(pts.len(), 2, |i, j| pts[i][j])
}

/// Central-difference check of both analytic tangents on random
/// distorted elements of both kinds; returns the worst relative errors
/// in the matrix max norm.
fn tangent_fd_errors() -> Result<(f64, f64)> {
    let params = default_iron_params();
    let elasticity = plane_strain_stiffness(params.young_modulus, params.poisson_ratio)?;
    let mut rng = 0x5eed_5eed_5eed_5eedu64;
    let mut worst_u = 0.0f64;
    let mut worst_phi = 0.0f64;
    for kind in [ElemKind::Quad4, ElemKind::Quad8] {
        let nn = kind.nnodes();
        for _ in 0..3 {
            let coords = distorted_element(kind, &mut rng);
            let u = DVector::from_fn(2 * nn, |_, _| 2e-3 * (pseudo_random(&mut rng) - 0.5));
            let phi = DVector::from_fn(nn, |_, _| 0.8 * pseudo_random(&mut rng));
            let gp: Vec<GaussPointData> = (0..kind.ngauss())
                .map(|_| GaussPointData {
                    history: 200.0 * pseudo_random(&mut rng),
                    theta: 0.9 * pseudo_random(&mut rng),
                    ..GaussPointData::default()
                })
                .collect();

            let (_, k_u) = element_displacement(kind, &coords, &u, &phi, &elasticity, &params)?;
            let mut k_fd = DMatrix::zeros(2 * nn, 2 * nn);
            let step = 1e-7;
            for j in 0..2 * nn {
                let mut up = u.clone();
                let mut um = u.clone();
                up[j] += step;
                um[j] -= step;
                let (rp, _) = element_displacement(kind, &coords, &up, &phi, &elasticity, &params)?;
                let (rm, _) = element_displacement(kind, &coords, &um, &phi, &elasticity, &params)?;
                k_fd.set_column(j, &((rp - rm) / (2.0 * step)));
            }
            worst_u = worst_u.max((&k_fd - &k_u).abs().max() / k_u.abs().max());

            let (_, k_phi) = element_phase(kind, &coords, &phi, &gp, &params)?;
            let mut k_fd = DMatrix::zeros(nn, nn);
            let step = 1e-6;
            for j in 0..nn {
                let mut pp = phi.clone();
                let mut pm = phi.clone();
                pp[j] += step;
                pm[j] -= step;
                let (rp, _) = element_phase(kind, &coords, &pp, &gp, &params)?;
                let (rm, _) = element_phase(kind, &coords, &pm, &gp, &params)?;
                k_fd.set_column(j, &((rp - rm) / (2.0 * step)));
            }
            worst_phi = worst_phi.max((&k_fd - &k_phi).abs().max() / k_phi.abs().max());
        }
    }
    Ok((worst_u, worst_phi))
}

/// Linear displacement field imposed on every boundary node of a
/// distorted mesh must reproduce constant strain at every Gauss point.
fn patch_test_error(kind: ElemKind) -> Result<f64> {
    let params = default_iron_params();
    let elasticity = plane_strain_stiffness(params.young_modulus, params.poisson_ratio)?;
    let mut mesh = generate_rect_mesh(1.0, 1.0, 3, 3, kind, &[])?;
    let mut boundary = vec![false; mesh.nnodes()];
    for set in ["left", "right", "bottom", "top"] {
        for &n in mesh.node_set(set)? {
            boundary[n] = true;
        }
    }
    let mut corner = vec![false; mesh.nnodes()];
    for e in 0..mesh.nelems() {
        for &n in &mesh.elem_nodes(e)[..4] {
            corner[n] = true;
        }
    }
    let mut rng = 0xfeed_beef_dead_c0deu64;
    for n in 0..mesh.nnodes() {
        if corner[n] && !boundary[n] {
            mesh.coords[n][0] += 0.12 * (pseudo_random(&mut rng) - 0.5);
            mesh.coords[n][1] += 0.12 * (pseudo_random(&mut rng) - 0.5);
        }
    }
    if kind == ElemKind::Quad8 {
        // straight edges: mid-side nodes sit on the corner chords
        for e in 0..mesh.nelems() {
            let nodes: Vec<usize> = mesh.elem_nodes(e).to_vec();
            for i in 0..4 {
                let a = mesh.coords[nodes[i]];
                let b = mesh.coords[nodes[(i + 1) % 4]];
                mesh.coords[nodes[4 + i]] = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            }
        }
    }
    mesh.validate()?;
    let (a, b, c, d) = (3e-4, -2e-4, 1e-4, 2.5e-4);
    let mut bc = Vec::new();
    for n in 0..mesh.nnodes() {
        if boundary[n] {
            let [x, y] = mesh.coords[n];
            bc.push((2 * n, a * x + b * y));
            bc.push((2 * n + 1, c * x + d * y));
        }
    }
    let nn = kind.nnodes();
    let sys = assemble_global(
        &mesh,
        FieldKind::Displacement,
        |e| {
            let coords = mesh.elem_coords(e);
            let phi_e = DVector::zeros(nn);
            let zero_u = DVector::zeros(2 * nn);
            let (_, k) =
                element_displacement(kind, &coords, &zero_u, &phi_e, &elasticity, &params)?;
            Ok((k, DVector::zeros(2 * nn)))
        },
        &bc,
    )?;
    let u = solve_linear(&sys, MatrixClass::SymmetricPositiveDefinite)?;
    let expected = nalgebra::Vector3::new(a, d, b + c);
    let quad = kind.quadrature();
    let mut worst = 0.0f64;
    for e in 0..mesh.nelems() {
        let coords = mesh.elem_coords(e);
        let nodes = mesh.elem_nodes(e);
        let u_e = DVector::from_fn(2 * nn, |i, _| {
            let (node, comp) = (nodes[i / 2], i % 2);
            u[2 * node + comp]
        });
        for &(xi, eta) in &quad.points {
            let geo = bmatrices(kind, &coords, xi, eta)?;
            let strain = &geo.b_u * &u_e;
            worst = worst.max((strain - expected).abs().max());
        }
    }
    Ok(worst / expected.abs().max())
}
