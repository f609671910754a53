use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::MeshError;
use crate::Point;

/// Reads the plain-text mesh format:
///
/// ```text
/// # comment
/// NV NT
/// x y            (NV lines)
/// i j k          (NT lines, 0-based, counterclockwise)
/// ```
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hl, header) = lines.next().ok_or(MeshError::Parse {
        line: 0,
        msg: "empty mesh file".into(),
    })?;
    let counts = numbers::<usize>(hl, header, 2)?;
    let (nv, nt) = (counts[0], counts[1]);

    let mut nodes: Vec<Point> = Vec::with_capacity(nv);
    let mut triangles = Vec::with_capacity(nt);
    for k in 0..nv + nt {
        let (ln, l) = lines.next().ok_or(MeshError::Parse {
            line: 0,
            msg: format!("expected {} data lines, found {k}", nv + nt),
        })?;
        if k < nv {
            let xy = numbers::<f64>(ln, l, 2)?;
            if !xy.iter().all(|v| v.is_finite()) {
                return Err(MeshError::Parse { line: ln, msg: "non-finite coordinate".into() });
            }
            nodes.push([xy[0], xy[1]]);
        } else {
            let ijk = numbers::<usize>(ln, l, 3)?;
            triangles.push([ijk[0], ijk[1], ijk[2]]);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(MeshError::Parse { line: ln, msg: "trailing data after last triangle".into() });
    }
    Mesh::from_parts(nodes, triangles)
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<T>, MeshError> {
    let parsed: Result<Vec<T>, _> = text.split_whitespace().map(str::parse).collect();
    match parsed {
        Ok(v) if v.len() == count => Ok(v),
        Ok(v) => Err(MeshError::Parse {
            line,
            msg: format!("expected {count} values, found {}", v.len()),
        }),
        Err(_) => Err(MeshError::Parse { line, msg: format!("cannot parse '{text}'") }),
    }
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", mesh.num_nodes(), mesh.num_triangles());
    for p in mesh.nodes() {
        let _ = writeln!(out, "{:.17e} {:.17e}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    std::fs::write(path, out)?;
    Ok(())
}
