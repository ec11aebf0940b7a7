//! Scenario configuration files: flat `key = value` lines grouped under
//! `[section]` headers, with `#` comments.
//!
//! The singleton sections `[mesh]`, `[material]`, `[solver]`, `[hydrogen]`
//! and `[output]` may each appear at most once.  `[dirichlet]`, `[neumann]`
//! and `[defect]` open a new block every time they appear.  Unknown sections
//! and keys are rejected with the offending line number, as are duplicate
//! keys inside a block.
//!
//! `resolved_text` echoes a configuration back, defaults filled in, in a
//! fixed order; parsing that echo reproduces the configuration exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::assembly::{EdgeLoad, RecoveryStress};
use crate::error::{Error, Result};
use crate::material::{default_iron_params, MaterialParams};
use crate::mesh::{generate_rect_mesh, read_mesh, ElemKind, RefinementBand};
use crate::solver::{
    BcProgram, DirichletSpec, DofComponent, NeumannSpec, Scenario, SolverSettings,
};

/// Where the mesh comes from: an external file or a generated rectangle.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(String),
    Rect {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
        kind: ElemKind,
        bands: Vec<RefinementBand>,
    },
}

/// Snapshot directory and schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSchedule {
    pub directory: String,
    pub every: Option<usize>,
    pub times: Vec<f64>,
}

impl Default for OutputSchedule {
    fn default() -> Self {
        OutputSchedule {
            directory: "out".to_string(),
            every: None,
            times: Vec::new(),
        }
    }
}

/// A parsed configuration, one boundary-value problem per file.
///
/// Exactly one Dirichlet block must carry a time-varying displacement
/// program; it is the loading program the reaction history is reported
/// against.  `c_boundary` stays unexpanded here so the file round-trips;
/// `build` turns it into concentration conditions on the outline sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mesh: MeshSource,
    pub params: MaterialParams,
    pub settings: SolverSettings,
    pub dirichlet: Vec<DirichletSpec>,
    pub neumann: Vec<NeumannSpec>,
    pub c_initial: f64,
    pub c_boundary: Option<f64>,
    pub defects: Vec<Vec<[f64; 2]>>,
    pub output: OutputSchedule,
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    Parser::new().run(text)
}

const OUTLINE_SETS: [&str; 4] = ["left", "right", "bottom", "top"];

impl ScenarioConfig {
    /// Materialize the scenario: load or generate the mesh and expand the
    /// boundary-concentration shorthand into per-set conditions.
    pub fn build(&self) -> Result<Scenario> {
        let mesh = match &self.mesh {
            MeshSource::File(path) => read_mesh(path)?,
            MeshSource::Rect {
                width,
                height,
                nx,
                ny,
                kind,
                bands,
            } => generate_rect_mesh(*width, *height, *nx, *ny, *kind, bands)?,
        };
        let mut dirichlet = self.dirichlet.clone();
        if let Some(cb) = self.c_boundary {
            let mut found = false;
            for set in OUTLINE_SETS {
                if mesh.node_sets.contains_key(set) {
                    found = true;
                    dirichlet.push(DirichletSpec {
                        set: set.to_string(),
                        component: DofComponent::Concentration,
                        program: BcProgram::Constant(cb),
                    });
                }
            }
            if !found {
                return Err(Error::mesh(
                    "c_boundary needs at least one of the outline node sets \
                     left, right, bottom, top",
                ));
            }
        }
        Ok(Scenario {
            mesh,
            params: self.params.clone(),
            settings: self.settings.clone(),
            dirichlet,
            neumann: self.neumann.clone(),
            c_initial: self.c_initial,
            defects: self.defects.clone(),
            snapshot_every: self.output.every,
            snapshot_times: self.output.times.clone(),
        })
    }

    /// Echo the configuration with every default filled in.  The result
    /// parses back to an equal `ScenarioConfig`.
    pub fn resolved_text(&self) -> String {
        let mut s = String::new();
        s.push_str("[mesh]\n");
        match &self.mesh {
            MeshSource::File(path) => {
                let _ = writeln!(s, "file = {path}");
            }
            MeshSource::Rect {
                width,
                height,
                nx,
                ny,
                kind,
                bands,
            } => {
                let _ = writeln!(s, "kind = {}", kind.token());
                let _ = writeln!(s, "width = {width:e}");
                let _ = writeln!(s, "height = {height:e}");
                let _ = writeln!(s, "nx = {nx}");
                let _ = writeln!(s, "ny = {ny}");
                for b in bands {
                    let _ = writeln!(
                        s,
                        "band = {:e} {:e} {:e} {:e} {:e}",
                        b.x_min, b.x_max, b.y_min, b.y_max, b.h
                    );
                }
            }
        }
        let p = &self.params;
        s.push_str("\n[material]\n");
        let _ = writeln!(s, "young_modulus = {:e}", p.young_modulus);
        let _ = writeln!(s, "poisson_ratio = {:e}", p.poisson_ratio);
        let _ = writeln!(s, "gc0 = {:e}", p.gc0);
        let _ = writeln!(s, "length_scale = {:e}", p.length_scale);
        let _ = writeln!(s, "stiffness_floor = {:e}", p.stiffness_floor);
        let _ = writeln!(s, "damage_coeff = {:e}", p.damage_coeff);
        let _ = writeln!(s, "diffusivity = {:e}", p.diffusivity);
        let _ = writeln!(s, "molar_volume = {:e}", p.molar_volume);
        let _ = writeln!(s, "binding_energy = {:e}", p.binding_energy);
        let _ = writeln!(s, "temperature = {:e}", p.temperature);
        let _ = writeln!(s, "gas_constant = {:e}", p.gas_constant);
        let _ = writeln!(s, "host_molar_mass = {:e}", p.host_molar_mass);
        let _ = writeln!(s, "impurity_molar_mass = {:e}", p.impurity_molar_mass);
        let t = &self.settings;
        s.push_str("\n[solver]\n");
        let _ = writeln!(s, "dt = {:e}", t.dt);
        let _ = writeln!(s, "t_end = {:e}", t.t_end);
        let _ = writeln!(s, "staggered_passes = {}", t.staggered_passes);
        let _ = writeln!(s, "staggered_tol = {:e}", t.staggered_tol);
        let _ = writeln!(s, "newton_tol = {:e}", t.newton_tol);
        let _ = writeln!(s, "max_newton_iters = {}", t.max_newton_iters);
        let _ = writeln!(s, "dt_cut_factor = {:e}", t.dt_cut_factor);
        let _ = writeln!(s, "max_cuts = {}", t.max_cuts);
        let _ = writeln!(s, "hydrogen_equilibrium = {}", t.hydrogen_equilibrium);
        let _ = writeln!(s, "recovery_stress = {}", t.recovery_stress.token());
        if let Some(f) = t.stop_reaction_fraction {
            let _ = writeln!(s, "stop_reaction_fraction = {f:e}");
        }
        s.push_str("\n[hydrogen]\n");
        let _ = writeln!(s, "c_initial = {:e}", self.c_initial);
        if let Some(cb) = self.c_boundary {
            let _ = writeln!(s, "c_boundary = {cb:e}");
        }
        s.push_str("\n[output]\n");
        let _ = writeln!(s, "directory = {}", self.output.directory);
        if let Some(n) = self.output.every {
            let _ = writeln!(s, "every = {n}");
        }
        if !self.output.times.is_empty() {
            let list: Vec<String> = self.output.times.iter().map(|t| format!("{t:e}")).collect();
            let _ = writeln!(s, "times = {}", list.join(" "));
        }
        for d in &self.dirichlet {
            s.push_str("\n[dirichlet]\n");
            let _ = writeln!(s, "set = {}", d.set);
            let _ = writeln!(s, "component = {}", d.component.token());
            match &d.program {
                BcProgram::Constant(v) => {
                    let _ = writeln!(s, "value = {v:e}");
                }
                BcProgram::Table(knots) => {
                    let list: Vec<String> = knots
                        .iter()
                        .map(|(t, v)| format!("{t:e} {v:e}"))
                        .collect();
                    let _ = writeln!(s, "table = {}", list.join(" "));
                }
            }
        }
        for n in &self.neumann {
            s.push_str("\n[neumann]\n");
            let _ = writeln!(s, "set = {}", n.set);
            match n.load {
                EdgeLoad::Traction([tx, ty]) => {
                    let _ = writeln!(s, "traction = {tx:e} {ty:e}");
                }
                EdgeLoad::Flux(q) => {
                    let _ = writeln!(s, "flux = {q:e}");
                }
            }
        }
        for poly in &self.defects {
            s.push_str("\n[defect]\n");
            let list: Vec<String> = poly
                .iter()
                .map(|p| format!("{:e} {:e}", p[0], p[1]))
                .collect();
            let _ = writeln!(s, "polygon = {}", list.join(" "));
        }
        s
    }
}

/// Names the block a key line belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Mesh,
    Material,
    Solver,
    Hydrogen,
    Output,
    Dirichlet,
    Neumann,
    Defect,
}

#[derive(Default)]
struct MeshDraft {
    file: Option<String>,
    kind: Option<ElemKind>,
    width: Option<f64>,
    height: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    bands: Vec<RefinementBand>,
}

struct DirichletDraft {
    line: usize,
    set: Option<String>,
    component: Option<DofComponent>,
    value: Option<f64>,
    table: Option<Vec<(f64, f64)>>,
}

struct NeumannDraft {
    line: usize,
    set: Option<String>,
    traction: Option<[f64; 2]>,
    flux: Option<f64>,
}

struct DefectDraft {
    line: usize,
    polygon: Option<Vec<[f64; 2]>>,
}

struct Parser {
    section: Section,
    seen_sections: Vec<Section>,
    seen_keys: Vec<String>,
    mesh: MeshDraft,
    mesh_line: usize,
    params: MaterialParams,
    settings: SolverSettings,
    c_initial: Option<f64>,
    c_boundary: Option<f64>,
    output: OutputSchedule,
    dirichlet: Vec<DirichletSpec>,
    neumann: Vec<NeumannSpec>,
    defects: Vec<Vec<[f64; 2]>>,
    open_dirichlet: Option<DirichletDraft>,
    open_neumann: Option<NeumannDraft>,
    open_defect: Option<DefectDraft>,
}

impl Parser {
    fn new() -> Self {
        Parser {
            section: Section::Preamble,
            seen_sections: Vec::new(),
            seen_keys: Vec::new(),
            mesh: MeshDraft::default(),
            mesh_line: 0,
            params: default_iron_params(),
            settings: SolverSettings::default(),
            c_initial: None,
            c_boundary: None,
            output: OutputSchedule::default(),
            dirichlet: Vec::new(),
            neumann: Vec::new(),
            defects: Vec::new(),
            open_dirichlet: None,
            open_neumann: None,
            open_defect: None,
        }
    }

    fn run(mut self, text: &str) -> Result<ScenarioConfig> {
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line, "unterminated section header"))?
                    .trim();
                self.open_section(line, name)?;
            } else {
                let (key, value) = content.split_once('=').ok_or_else(|| {
                    Error::config(line, format!("expected key = value, got '{content}'"))
                })?;
                self.handle_key(line, key.trim(), value.trim())?;
            }
        }
        self.close_block(last_line + 1)?;
        self.finish()
    }

    fn open_section(&mut self, line: usize, name: &str) -> Result<()> {
        self.close_block(line)?;
        let section = match name {
            "mesh" => Section::Mesh,
            "material" => Section::Material,
            "solver" => Section::Solver,
            "hydrogen" => Section::Hydrogen,
            "output" => Section::Output,
            "dirichlet" => Section::Dirichlet,
            "neumann" => Section::Neumann,
            "defect" => Section::Defect,
            other => return Err(Error::config(line, format!("unknown section '[{other}]'"))),
        };
        match section {
            Section::Dirichlet => {
                self.open_dirichlet = Some(DirichletDraft {
                    line,
                    set: None,
                    component: None,
                    value: None,
                    table: None,
                });
            }
            Section::Neumann => {
                self.open_neumann = Some(NeumannDraft {
                    line,
                    set: None,
                    traction: None,
                    flux: None,
                });
            }
            Section::Defect => {
                self.open_defect = Some(DefectDraft {
                    line,
                    polygon: None,
                });
            }
            _ => {
                if self.seen_sections.contains(&section) {
                    return Err(Error::config(
                        line,
                        format!("section '[{name}]' appears more than once"),
                    ));
                }
                self.seen_sections.push(section);
                if section == Section::Mesh {
                    self.mesh_line = line;
                }
            }
        }
        self.section = section;
        self.seen_keys.clear();
        Ok(())
    }

    /// Finalize any open repeatable block before a new section or EOF.
    fn close_block(&mut self, line: usize) -> Result<()> {
        if let Some(d) = self.open_dirichlet.take() {
            let set = d
                .set
                .ok_or_else(|| Error::config(d.line, "[dirichlet] block needs set ="))?;
            let component = d
                .component
                .ok_or_else(|| Error::config(d.line, "[dirichlet] block needs component ="))?;
            let program = match (d.value, d.table) {
                (Some(v), None) => BcProgram::Constant(v),
                (None, Some(knots)) => BcProgram::Table(knots),
                (None, None) => {
                    return Err(Error::config(
                        d.line,
                        "[dirichlet] block needs value = or table =",
                    ))
                }
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        d.line,
                        "[dirichlet] block has both value = and table =",
                    ))
                }
            };
            program
                .validate()
                .map_err(|e| Error::config(d.line, e.to_string()))?;
            self.dirichlet.push(DirichletSpec {
                set,
                component,
                program,
            });
        }
        if let Some(n) = self.open_neumann.take() {
            let set = n
                .set
                .ok_or_else(|| Error::config(n.line, "[neumann] block needs set ="))?;
            let load = match (n.traction, n.flux) {
                (Some(t), None) => EdgeLoad::Traction(t),
                (None, Some(q)) => EdgeLoad::Flux(q),
                (None, None) => {
                    return Err(Error::config(
                        n.line,
                        "[neumann] block needs traction = or flux =",
                    ))
                }
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        n.line,
                        "[neumann] block has both traction = and flux =",
                    ))
                }
            };
            self.neumann.push(NeumannSpec { set, load });
        }
        if let Some(d) = self.open_defect.take() {
            let polygon = d
                .polygon
                .ok_or_else(|| Error::config(d.line, "[defect] block needs polygon ="))?;
            self.defects.push(polygon);
        }
        let _ = line;
        Ok(())
    }

    fn note_key(&mut self, line: usize, key: &str) -> Result<()> {
        if self.seen_keys.iter().any(|k| k == key) {
            return Err(Error::config(line, format!("duplicate key '{key}'")));
        }
        self.seen_keys.push(key.to_string());
        Ok(())
    }

    fn handle_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        if self.section != Section::Mesh || key != "band" {
            self.note_key(line, key)?;
        }
        match self.section {
            Section::Preamble => Err(Error::config(
                line,
                format!("key '{key}' appears before any [section]"),
            )),
            Section::Mesh => self.mesh_key(line, key, value),
            Section::Material => self.material_key(line, key, value),
            Section::Solver => self.solver_key(line, key, value),
            Section::Hydrogen => self.hydrogen_key(line, key, value),
            Section::Output => self.output_key(line, key, value),
            Section::Dirichlet => self.dirichlet_key(line, key, value),
            Section::Neumann => self.neumann_key(line, key, value),
            Section::Defect => self.defect_key(line, key, value),
        }
    }

    fn mesh_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "file" => self.mesh.file = Some(value.to_string()),
            "kind" => {
                self.mesh.kind =
                    Some(ElemKind::parse(value).map_err(|e| Error::config(line, e.to_string()))?)
            }
            "width" => self.mesh.width = Some(float_value(line, key, value)?),
            "height" => self.mesh.height = Some(float_value(line, key, value)?),
            "nx" => self.mesh.nx = Some(usize_value(line, key, value)?),
            "ny" => self.mesh.ny = Some(usize_value(line, key, value)?),
            "band" => {
                let nums = float_list(line, key, value)?;
                if nums.len() != 5 {
                    return Err(Error::config(
                        line,
                        "band = needs five numbers: x_min x_max y_min y_max h",
                    ));
                }
                self.mesh.bands.push(RefinementBand {
                    x_min: nums[0],
                    x_max: nums[1],
                    y_min: nums[2],
                    y_max: nums[3],
                    h: nums[4],
                });
            }
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [mesh] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn material_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let v = float_value(line, key, value)?;
        match key {
            "young_modulus" => self.params.young_modulus = v,
            "poisson_ratio" => self.params.poisson_ratio = v,
            "gc0" => self.params.gc0 = v,
            "length_scale" => self.params.length_scale = v,
            "stiffness_floor" => self.params.stiffness_floor = v,
            "damage_coeff" => self.params.damage_coeff = v,
            "diffusivity" => self.params.diffusivity = v,
            "molar_volume" => self.params.molar_volume = v,
            "binding_energy" => self.params.binding_energy = v,
            "temperature" => self.params.temperature = v,
            "gas_constant" => self.params.gas_constant = v,
            "host_molar_mass" => self.params.host_molar_mass = v,
            "impurity_molar_mass" => self.params.impurity_molar_mass = v,
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [material] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn solver_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "dt" => self.settings.dt = float_value(line, key, value)?,
            "t_end" => self.settings.t_end = float_value(line, key, value)?,
            "staggered_passes" => self.settings.staggered_passes = usize_value(line, key, value)?,
            "staggered_tol" => self.settings.staggered_tol = float_value(line, key, value)?,
            "newton_tol" => self.settings.newton_tol = float_value(line, key, value)?,
            "max_newton_iters" => self.settings.max_newton_iters = usize_value(line, key, value)?,
            "dt_cut_factor" => self.settings.dt_cut_factor = float_value(line, key, value)?,
            "max_cuts" => self.settings.max_cuts = usize_value(line, key, value)?,
            "hydrogen_equilibrium" => {
                self.settings.hydrogen_equilibrium = bool_value(line, key, value)?
            }
            "recovery_stress" => {
                self.settings.recovery_stress = RecoveryStress::parse(value).ok_or_else(|| {
                    Error::config(
                        line,
                        format!("recovery_stress must be undamaged or degraded, got '{value}'"),
                    )
                })?
            }
            "stop_reaction_fraction" => {
                self.settings.stop_reaction_fraction = Some(float_value(line, key, value)?)
            }
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [solver] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn hydrogen_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "c_initial" => self.c_initial = Some(float_value(line, key, value)?),
            "c_boundary" => self.c_boundary = Some(float_value(line, key, value)?),
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [hydrogen] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn output_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "directory" => self.output.directory = value.to_string(),
            "every" => self.output.every = Some(usize_value(line, key, value)?),
            "times" => self.output.times = float_list(line, key, value)?,
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [output] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn dirichlet_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let d = self.open_dirichlet.as_mut().expect("open dirichlet block");
        match key {
            "set" => d.set = Some(value.to_string()),
            "component" => {
                d.component = Some(
                    DofComponent::parse(value).map_err(|e| Error::config(line, e.to_string()))?,
                )
            }
            "value" => d.value = Some(float_value(line, key, value)?),
            "table" => {
                let nums = float_list(line, key, value)?;
                if nums.len() < 4 || nums.len() % 2 != 0 {
                    return Err(Error::config(
                        line,
                        "table = needs an even number of values (>= 2 time value pairs)",
                    ));
                }
                d.table = Some(nums.chunks(2).map(|c| (c[0], c[1])).collect());
            }
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [dirichlet] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn neumann_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let n = self.open_neumann.as_mut().expect("open neumann block");
        match key {
            "set" => n.set = Some(value.to_string()),
            "traction" => {
                let nums = float_list(line, key, value)?;
                if nums.len() != 2 {
                    return Err(Error::config(line, "traction = needs two numbers: tx ty"));
                }
                n.traction = Some([nums[0], nums[1]]);
            }
            "flux" => n.flux = Some(float_value(line, key, value)?),
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [neumann] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn defect_key(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let d = self.open_defect.as_mut().expect("open defect block");
        match key {
            "polygon" => {
                let nums = float_list(line, key, value)?;
                if nums.len() < 6 || nums.len() % 2 != 0 {
                    return Err(Error::config(
                        line,
                        "polygon = needs an even number of values (>= 3 x y vertices)",
                    ));
                }
                d.polygon = Some(nums.chunks(2).map(|c| [c[0], c[1]]).collect());
            }
            other => {
                return Err(Error::config(
                    line,
                    format!("unknown [defect] key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<ScenarioConfig> {
        let mesh = self.finish_mesh()?;
        self.params
            .validate()
            .map_err(|e| Error::config(0, e.to_string()))?;
        self.settings
            .validate()
            .map_err(|e| Error::config(0, e.to_string()))?;
        let loading = self
            .dirichlet
            .iter()
            .filter(|d| d.component != DofComponent::Concentration && !d.program.is_constant())
            .count();
        if loading != 1 {
            return Err(Error::config(
                0,
                format!("{loading} time-varying displacement programs given, expected one"),
            ));
        }
        // the shorthand doubles as the initial condition unless overridden
        let c_initial = match (self.c_initial, self.c_boundary) {
            (Some(c0), _) => c0,
            (None, Some(cb)) => cb,
            (None, None) => 0.0,
        };
        if !(c_initial >= 0.0) || !c_initial.is_finite() {
            return Err(Error::config(0, "c_initial must be finite and >= 0"));
        }
        Ok(ScenarioConfig {
            mesh,
            params: self.params,
            settings: self.settings,
            dirichlet: self.dirichlet,
            neumann: self.neumann,
            c_initial,
            c_boundary: self.c_boundary,
            defects: self.defects,
            output: self.output,
        })
    }

    fn finish_mesh(&self) -> Result<MeshSource> {
        if !self.seen_sections.contains(&Section::Mesh) {
            return Err(Error::config(0, "missing [mesh] section"));
        }
        let m = &self.mesh;
        let line = self.mesh_line;
        if let Some(file) = &m.file {
            if m.kind.is_some()
                || m.width.is_some()
                || m.height.is_some()
                || m.nx.is_some()
                || m.ny.is_some()
                || !m.bands.is_empty()
            {
                return Err(Error::config(
                    line,
                    "[mesh] gives both file = and rectangle keys; use one or the other",
                ));
            }
            return Ok(MeshSource::File(file.clone()));
        }
        let missing = [
            ("kind", m.kind.is_none()),
            ("width", m.width.is_none()),
            ("height", m.height.is_none()),
            ("nx", m.nx.is_none()),
            ("ny", m.ny.is_none()),
        ]
        .iter()
        .filter(|(_, absent)| *absent)
        .map(|(k, _)| *k)
        .collect::<Vec<_>>();
        if !missing.is_empty() {
            return Err(Error::config(
                line,
                format!(
                    "[mesh] needs file = or a full rectangle; missing {}",
                    missing.join(", ")
                ),
            ));
        }
        Ok(MeshSource::Rect {
            width: m.width.unwrap(),
            height: m.height.unwrap(),
            nx: m.nx.unwrap(),
            ny: m.ny.unwrap(),
            kind: m.kind.unwrap(),
            bands: m.bands.clone(),
        })
    }
}

fn float_value(line: usize, key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::config(line, format!("key '{key}': '{value}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::config(line, format!("key '{key}' must be finite")));
    }
    Ok(v)
}

fn usize_value(line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::config(
            line,
            format!("key '{key}': '{value}' is not a non-negative integer"),
        )
    })
}

fn bool_value(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::config(
            line,
            format!("key '{key}': '{other}' is not true or false"),
        )),
    }
}

fn float_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|tok| float_value(line, key, tok))
        .collect()
}
