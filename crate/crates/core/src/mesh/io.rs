//! Plain-text polygon mesh format.
//!
//! ```text
//! POLYMESH v1 <n_vertices> <n_cells>
//! v <x1> <x2>
//! ...
//! c <cell id> <vertex id> <vertex id> ...
//! ```
//!
//! Vertex loops are counterclockwise; connectivity is re-derived on load.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::PolyMesh;
use crate::error::{Error, Result};

/// Serializes the vertex table and loops; coordinates keep 17 significant
/// digits so a round trip is bit-exact.
pub fn write_mesh(mesh: &PolyMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "POLYMESH v1 {} {}", mesh.vertices.len(), mesh.cells.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.16e} {:.16e}", v[0], v[1]);
    }
    for (k, c) in mesh.cells.iter().enumerate() {
        let _ = write!(out, "c {k}");
        for id in &c.vertices {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
    }
    out
}

pub fn save_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_mesh(mesh)).map_err(|e| Error::io(path, e))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

/// Parses the text format; periodic seams are not stored, so the result
/// is non-periodic.
pub fn parse_mesh(text: &str) -> Result<PolyMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("POLYMESH") || tok.next() != Some("v1") {
        return Err(parse_err(hl, "expected header `POLYMESH v1 <n_vertices> <n_cells>`"));
    }
    let nv: usize = field(tok.next(), hl, "vertex count")?;
    let nc: usize = field(tok.next(), hl, "cell count")?;
    if tok.next().is_some() {
        return Err(parse_err(hl, "trailing tokens in header"));
    }

    let mut vertices = Vec::with_capacity(nv);
    let mut loops = Vec::with_capacity(nc);
    let mut last_line = hl;
    for (ln, line) in lines {
        last_line = ln;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                if !loops.is_empty() {
                    return Err(parse_err(ln, "vertex after the first cell"));
                }
                if vertices.len() == nv {
                    return Err(parse_err(ln, format!("more than {nv} vertices")));
                }
                let x: f64 = field(tok.next(), ln, "x1")?;
                let y: f64 = field(tok.next(), ln, "x2")?;
                if tok.next().is_some() {
                    return Err(parse_err(ln, "trailing tokens after vertex"));
                }
                vertices.push([x, y]);
            }
            Some("c") => {
                let k: usize = field(tok.next(), ln, "cell id")?;
                if k != loops.len() {
                    return Err(parse_err(ln, format!("expected cell {}, found {k}", loops.len())));
                }
                if k == nc {
                    return Err(parse_err(ln, format!("more than {nc} cells")));
                }
                let mut lp = Vec::new();
                for t in tok {
                    let id: usize = field(Some(t), ln, "vertex id")?;
                    if id >= nv {
                        return Err(parse_err(ln, format!("vertex id {id} out of range")));
                    }
                    lp.push(id);
                }
                if lp.len() < 3 {
                    return Err(parse_err(ln, "cell needs at least 3 vertices"));
                }
                loops.push(lp);
            }
            Some(other) => return Err(parse_err(ln, format!("unknown record `{other}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }
    if vertices.len() != nv || loops.len() != nc {
        return Err(parse_err(
            last_line,
            format!(
                "expected {nv} vertices and {nc} cells, found {} and {}",
                vertices.len(),
                loops.len()
            ),
        ));
    }
    PolyMesh::from_polygons(vertices, loops, [false, false])
}
