//! Result files: legacy ASCII VTK snapshots and history CSVs.
//!
//! Both writers use a fixed nine-digit scientific float format, so
//! re-emitting unchanged data is byte identical and outputs diff cleanly
//! across runs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{ElemKind, Mesh};
use crate::solver::IncrementRecord;
use crate::state::FieldState;

/// C-style `%.9e`: one leading digit, nine decimals, sign and at least two
/// digits in the exponent.
pub fn fmt_e9(x: f64) -> String {
    let s = format!("{x:.9e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mant}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

fn vtk_cell_type(kind: ElemKind) -> u8 {
    match kind {
        ElemKind::Quad4 => 9,
        ElemKind::Quad8 => 23,
    }
}

/// Render a snapshot as a legacy ASCII VTK unstructured grid with point
/// arrays `displacement` (3 components, z = 0), `phi`, `concentration`
/// and `sigma_h`.
pub fn vtk_string(mesh: &Mesh, state: &FieldState) -> Result<String> {
    let n = mesh.nnodes();
    if state.displacement.len() != 2 * n
        || state.phase.len() != n
        || state.concentration.len() != n
        || state.sigma_h.len() != n
    {
        return Err(Error::mesh("state fields do not match the mesh size"));
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "coupled fields at t = {}", fmt_e9(state.time));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for i in 0..n {
        let _ = writeln!(
            s,
            "{} {} {}",
            fmt_e9(mesh.coords[i][0]),
            fmt_e9(mesh.coords[i][1]),
            fmt_e9(0.0)
        );
    }
    let nn = mesh.kind.nnodes();
    let _ = writeln!(s, "CELLS {} {}", mesh.nelems(), mesh.nelems() * (1 + nn));
    for e in 0..mesh.nelems() {
        let _ = write!(s, "{nn}");
        for &node in mesh.elem_nodes(e) {
            let _ = write!(s, " {node}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.nelems());
    for _ in 0..mesh.nelems() {
        let _ = writeln!(s, "{}", vtk_cell_type(mesh.kind));
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("VECTORS displacement double\n");
    for i in 0..n {
        let _ = writeln!(
            s,
            "{} {} {}",
            fmt_e9(state.displacement[2 * i]),
            fmt_e9(state.displacement[2 * i + 1]),
            fmt_e9(0.0)
        );
    }
    for (name, field) in [
        ("phi", &state.phase),
        ("concentration", &state.concentration),
        ("sigma_h", &state.sigma_h),
    ] {
        let _ = writeln!(s, "SCALARS {name} double 1");
        s.push_str("LOOKUP_TABLE default\n");
        for i in 0..n {
            let _ = writeln!(s, "{}", fmt_e9(field[i]));
        }
    }
    Ok(s)
}

pub fn write_vtk(path: impl AsRef<Path>, mesh: &Mesh, state: &FieldState) -> Result<()> {
    let text = vtk_string(mesh, state)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub const HISTORY_HEADER: &str = "time,prescribed,reaction,max_phi,min_c,max_c,passes";

/// Render per-increment records as CSV, one row per accepted increment.
pub fn history_csv_string(records: &[IncrementRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(HISTORY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_e9(r.time),
            fmt_e9(r.prescribed),
            fmt_e9(r.reaction),
            fmt_e9(r.max_phi),
            fmt_e9(r.min_c),
            fmt_e9(r.max_c),
            r.passes
        );
    }
    s
}

pub fn write_history_csv(path: impl AsRef<Path>, records: &[IncrementRecord]) -> Result<()> {
    std::fs::write(path, history_csv_string(records))?;
    Ok(())
}
