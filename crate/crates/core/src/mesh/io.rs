//! Plain-text mesh reader and writer.
//!
//! Format (UTF-8, 1-based contiguous ids):
//! ```text
//! $nodes
//! <id> <x> <y>
//! $elements <quad4|quad8>
//! <id> <n1> ... <n4|n8>
//! $nodeset <name>
//! <id> ...
//! $end
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{ElemKind, Mesh};

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mesh = parse_mesh(&text, &name)?;
    mesh.validate()?;
    Ok(mesh)
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::MeshParse { path: path.into(), line, msg: msg.into() }
}

fn parse_mesh(text: &str, path: &str) -> Result<Mesh> {
    enum Section {
        None,
        Nodes,
        Elements,
        NodeSet(String),
    }

    let mut nodes: Vec<(usize, [f64; 2])> = Vec::new();
    let mut elems: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut kind: Option<ElemKind> = None;
    let mut node_sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut section = Section::None;
    let mut ended = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ended {
            return Err(parse_err(path, lineno, "content after $end"));
        }
        if let Some(rest) = line.strip_prefix('$') {
            let mut parts = rest.split_whitespace();
            match parts.next() {
                Some("nodes") => section = Section::Nodes,
                Some("elements") => {
                    let token = parts
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "$elements requires a kind (quad4 or quad8)"))?;
                    let k = ElemKind::parse(token)
                        .map_err(|e| parse_err(path, lineno, e.to_string()))?;
                    if let Some(prev) = kind {
                        if prev != k {
                            return Err(parse_err(path, lineno, "mixed element kinds are not supported"));
                        }
                    }
                    kind = Some(k);
                    section = Section::Elements;
                }
                Some("nodeset") => {
                    let name = parts
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "$nodeset requires a name"))?;
                    if node_sets.contains_key(name) {
                        return Err(parse_err(path, lineno, format!("duplicate node set '{name}'")));
                    }
                    node_sets.insert(name.to_string(), Vec::new());
                    section = Section::NodeSet(name.to_string());
                }
                Some("end") => {
                    ended = true;
                    section = Section::None;
                }
                other => {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("unknown section '${}'", other.unwrap_or("")),
                    ))
                }
            }
            if let Some(extra) = parts.next() {
                return Err(parse_err(path, lineno, format!("unexpected token '{extra}'")));
            }
            continue;
        }
        match &mut section {
            Section::None => return Err(parse_err(path, lineno, "data outside any section")),
            Section::Nodes => {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(parse_err(path, lineno, "node line must be: <id> <x> <y>"));
                }
                let id = parse_id(fields[0], path, lineno)?;
                let x = parse_float(fields[1], path, lineno)?;
                let y = parse_float(fields[2], path, lineno)?;
                nodes.push((id, [x, y]));
            }
            Section::Elements => {
                let k = kind.expect("kind set when entering $elements");
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 1 + k.nnodes() {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("element line must have {} node ids", k.nnodes()),
                    ));
                }
                let id = parse_id(fields[0], path, lineno)?;
                let mut conn = Vec::with_capacity(k.nnodes());
                for f in &fields[1..] {
                    conn.push(parse_id(f, path, lineno)?);
                }
                elems.push((id, conn));
            }
            Section::NodeSet(name) => {
                let set = node_sets.get_mut(name.as_str()).expect("set inserted on entry");
                for f in line.split_whitespace() {
                    set.push(parse_id(f, path, lineno)?);
                }
            }
        }
    }
    if !ended {
        return Err(parse_err(path, text.lines().count(), "missing $end"));
    }
    if nodes.is_empty() {
        return Err(parse_err(path, 1, "no nodes defined"));
    }
    let kind = kind.ok_or_else(|| parse_err(path, 1, "no elements defined"))?;

    let coords = contiguous(nodes, "node", path)?;
    let conn_by_id = contiguous(elems, "element", path)?;
    let nnodes = coords.len();
    let mut connectivity = Vec::with_capacity(conn_by_id.len() * kind.nnodes());
    for conn in conn_by_id {
        for id in conn {
            connectivity.push(to_index(id, nnodes, path)?);
        }
    }
    let mut sets = BTreeMap::new();
    for (name, ids) in node_sets {
        let mut indices = Vec::with_capacity(ids.len());
        for id in ids {
            indices.push(to_index(id, nnodes, path)?);
        }
        sets.insert(name, indices);
    }
    Ok(Mesh {
        coords,
        kind,
        connectivity,
        node_sets: sets,
        element_sets: BTreeMap::new(),
    })
}

fn parse_id(s: &str, path: &str, line: usize) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| parse_err(path, line, format!("invalid integer '{s}'")))
}

fn parse_float(s: &str, path: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite number '{s}'")));
    }
    Ok(v)
}

/// Reorders (id, payload) pairs into a dense vector, requiring ids to be
/// exactly 1..=N with no gaps or duplicates.
fn contiguous<T>(items: Vec<(usize, T)>, what: &str, path: &str) -> Result<Vec<T>> {
    let n = items.len();
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for (id, payload) in items {
        if id < 1 || id > n {
            return Err(parse_err(path, 0, format!("{what} id {id} not in 1..={n}")));
        }
        if slots[id - 1].is_some() {
            return Err(parse_err(path, 0, format!("duplicate {what} id {id}")));
        }
        slots[id - 1] = Some(payload);
    }
    Ok(slots.into_iter().map(|s| s.expect("all slots filled")).collect())
}

fn to_index(id: usize, nnodes: usize, path: &str) -> Result<usize> {
    if id < 1 || id > nnodes {
        return Err(parse_err(path, 0, format!("node id {id} not in 1..={nnodes}")));
    }
    Ok(id - 1)
}

/// Writes `mesh` in the text format; `{:e}` float formatting round-trips
/// exactly through read_mesh. Element sets are not part of the format.
pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str("$nodes\n");
    for (i, c) in mesh.coords.iter().enumerate() {
        writeln!(out, "{} {:e} {:e}", i + 1, c[0], c[1]).expect("string write");
    }
    writeln!(out, "$elements {}", mesh.kind.token()).expect("string write");
    for e in 0..mesh.nelems() {
        write!(out, "{}", e + 1).expect("string write");
        for &n in mesh.elem_nodes(e) {
            write!(out, " {}", n + 1).expect("string write");
        }
        out.push('\n');
    }
    for (name, set) in &mesh.node_sets {
        writeln!(out, "$nodeset {name}").expect("string write");
        for chunk in set.chunks(16) {
            let ids: Vec<String> = chunk.iter().map(|n| (n + 1).to_string()).collect();
            writeln!(out, "{}", ids.join(" ")).expect("string write");
        }
    }
    out.push_str("$end\n");
    std::fs::write(path, out)?;
    Ok(())
}
