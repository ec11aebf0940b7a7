//! Batch driver: runs scenario files, self-checks the numerics, and
//! inspects meshes, with deterministic file outputs suitable for diffing.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use hacfem::output::fmt_e9;
use hacfem::physics;
use hacfem::verify::{self, VerifyLevel};
use hacfem::{
    default_iron_params, parse_config, write_history_csv, write_vtk, Error, ScenarioDriver,
};

/// Print to stdout, treating a closed pipe as a normal early exit rather
/// than a panic.
fn emit(text: &str) -> Option<ExitCode> {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => None,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Some(ExitCode::SUCCESS),
        Err(_) => Some(ExitCode::FAILURE),
    }
}

const EXIT_SOLVER: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_CONFIG: u8 = 65;

#[derive(Parser)]
#[command(
    name = "hacfem",
    about = "Coupled deformation, fracture and hydrogen transport solver",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file and write its outputs.
    Run {
        /// Path to the scenario config.
        config: PathBuf,
    },
    /// Run the built-in oracle checks and report a pass/fail table.
    Verify {
        /// Check depth: fast skips the refinement studies.
        #[arg(long, default_value = "full")]
        level: String,
        /// Where to write the machine-readable results.
        #[arg(long, default_value = "verification.csv")]
        csv: PathBuf,
    },
    /// Print size, quality and resolution facts about a mesh file.
    MeshInfo {
        /// Path to the mesh file.
        mesh: PathBuf,
        /// Phase-field length scale the mesh is judged against, mm.
        #[arg(long, default_value_t = 0.0075)]
        ell: f64,
    },
    /// Print the homogeneous stress-strain response and its peak.
    Homog {
        /// Young's modulus, MPa.
        #[arg(long, default_value_t = 210000.0)]
        young: f64,
        /// Critical energy release rate, N/mm.
        #[arg(long, default_value_t = 2.7)]
        gc: f64,
        /// Phase-field length scale, mm.
        #[arg(long, default_value_t = 0.0075)]
        ell: f64,
        /// Number of curve samples between 0 and twice the critical strain.
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Verify { level, csv } => cmd_verify(&level, &csv),
        Command::MeshInfo { mesh, ell } => cmd_mesh_info(&mesh, ell),
        Command::Homog {
            young,
            gc,
            ell,
            samples,
        } => cmd_homog(young, gc, ell, samples),
    };
    match outcome {
        Ok(code) => code,
        Err((code, err)) => {
            eprintln!("error: {err}");
            ExitCode::from(code)
        }
    }
}

type CmdResult = std::result::Result<ExitCode, (u8, Error)>;

fn config_err(err: Error) -> (u8, Error) {
    (EXIT_CONFIG, err)
}

fn solver_err(err: Error) -> (u8, Error) {
    (EXIT_SOLVER, err)
}

fn cmd_run(config_path: &Path) -> CmdResult {
    let config = parse_config(config_path).map_err(config_err)?;
    let scenario = config.build().map_err(config_err)?;
    let driver = ScenarioDriver::new(&scenario).map_err(config_err)?;

    let out_dir = PathBuf::from(&config.output.directory);
    std::fs::create_dir_all(&out_dir).map_err(|e| config_err(e.into()))?;
    std::fs::write(out_dir.join("resolved.cfg"), config.resolved_text())
        .map_err(|e| config_err(e.into()))?;

    let result = driver.run().map_err(solver_err)?;

    write_history_csv(out_dir.join("history.csv"), &result.records).map_err(solver_err)?;
    for (i, (_, state)) in result.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:04}.vtk");
        write_vtk(out_dir.join(name), &scenario.mesh, state).map_err(solver_err)?;
    }

    let peak = result
        .records
        .iter()
        .map(|r| r.reaction.abs())
        .fold(0.0f64, f64::max);
    let mut text = format!(
        "completed {} increments to t = {:.6e}\n",
        result.records.len(),
        result.state.time
    );
    text.push_str(&format!(
        "peak |reaction| = {peak:.6e} N/mm, final max phi = {:.6e}\n",
        result.state.phase.max()
    ));
    text.push_str(&format!(
        "wrote {} snapshots and history.csv to {}\n",
        result.snapshots.len(),
        out_dir.display()
    ));
    Ok(emit(&text).unwrap_or(ExitCode::SUCCESS))
}

fn cmd_verify(level: &str, csv_path: &Path) -> CmdResult {
    let level = VerifyLevel::parse(level)
        .ok_or_else(|| (EXIT_USAGE, Error::config(0, "level must be fast or full")))?;
    let reports = verify::run_verification_suite(level);
    std::fs::write(csv_path, verify::to_csv(&reports)).map_err(|e| solver_err(e.into()))?;
    let text = format!(
        "{}wrote {}\n",
        verify::format_table(&reports),
        csv_path.display()
    );
    if let Some(code) = emit(&text) {
        return Ok(code);
    }
    if reports.iter().all(|r| r.pass) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_mesh_info(path: &Path, ell: f64) -> CmdResult {
    let mesh = hacfem::read_mesh(path).map_err(config_err)?;
    let params = default_iron_params();
    let (x0, y0, x1, y1) = mesh.bounding_box();
    let (h_min, h_max) = mesh.edge_length_range();
    let min_det_j = mesh.min_det_j().map_err(config_err)?;
    let names: Vec<&str> = mesh.node_sets.keys().map(String::as_str).collect();
    let mut text = format!(
        "kind: {}\nnodes: {}\nelements: {}\nnode sets: {}\n",
        mesh.kind.token(),
        mesh.nnodes(),
        mesh.nelems(),
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join(", ")
        }
    );
    text.push_str(&format!(
        "bounding box: [{x0:.6e}, {x1:.6e}] x [{y0:.6e}, {y1:.6e}]\n"
    ));
    text.push_str(&format!("min det J: {min_det_j:.6e}\n"));
    text.push_str(&format!("edge length: min {h_min:.6e}, max {h_max:.6e}\n"));
    let sigma_c = physics::critical_stress(params.young_modulus, params.gc0, ell);
    let bound = physics::cohesive_mesh_bound(params.young_modulus, params.gc0, sigma_c);
    text.push_str(&format!(
        "resolution bound for ell = {ell:.6e}: h < {bound:.6e}\n"
    ));
    if h_min > bound {
        text.push_str(&format!(
            "warning: finest edge {h_min:.6e} exceeds {bound:.6e} (about ell/5.4); \
             crack bands will be under-resolved everywhere\n"
        ));
    }
    Ok(emit(&text).unwrap_or(ExitCode::SUCCESS))
}

fn cmd_homog(young: f64, gc: f64, ell: f64, samples: usize) -> CmdResult {
    if !(young > 0.0 && gc > 0.0 && ell > 0.0 && samples >= 3) {
        return Err((
            EXIT_USAGE,
            Error::config(0, "homog needs positive young, gc, ell and samples >= 3"),
        ));
    }
    let sigma_c = physics::critical_stress(young, gc, ell);
    let eps_c = physics::critical_strain(young, gc, ell);
    let mut text = format!(
        "sigma_c = {}\neps_c = {}\nstrain,stress\n",
        fmt_e9(sigma_c),
        fmt_e9(eps_c)
    );
    // odd sample count puts the midpoint sample exactly on the peak
    let n = if samples % 2 == 0 { samples + 1 } else { samples };
    for i in 0..n {
        let eps = 2.0 * eps_c * i as f64 / (n - 1) as f64;
        let sigma = physics::homogeneous_stress(eps, young, gc, ell);
        text.push_str(&format!("{},{}\n", fmt_e9(eps), fmt_e9(sigma)));
    }
    Ok(emit(&text).unwrap_or(ExitCode::SUCCESS))
}
