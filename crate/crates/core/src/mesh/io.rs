//! Mesh file I/O: a small line-oriented text format and legacy-VTK export.
//!
//! Text format:
//! ```text
//! vem-mesh 1
//! <n_vertices> <n_cells>
//! <x> <y>                 (one line per vertex)
//! <m> <i1> ... <im>       (one CCW loop per cell, 0-based)
//! boundary <v0> <v1> <label>   (zero or more)
//! ```

use super::{build_mesh, PolygonalMesh};
use crate::error::{Result, VemError};
use crate::geometry::Vec2;
use std::fmt::Write as _;
use std::path::Path;

fn format_err(line: usize, detail: impl Into<String>) -> VemError {
    VemError::MeshFormat {
        line,
        detail: detail.into(),
    }
}

/// Parse a mesh from its text representation.
pub fn read_mesh_str(text: &str) -> Result<PolygonalMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| format_err(1, "empty mesh file"))?;
    if header != "vem-mesh 1" {
        return Err(format_err(ln, format!("bad header {header:?}, expected \"vem-mesh 1\"")));
    }
    let (ln, counts) = lines
        .next()
        .ok_or_else(|| format_err(ln, "missing count line"))?;
    let mut it = counts.split_whitespace();
    let nv: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| format_err(ln, "bad vertex count"))?;
    let nc: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| format_err(ln, "bad cell count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| format_err(0, "unexpected end of file in vertex block"))?;
        let mut it = l.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(ln, "bad x coordinate"))?;
        let y: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(ln, "bad y coordinate"))?;
        if it.next().is_some() {
            return Err(format_err(ln, "trailing tokens on vertex line"));
        }
        vertices.push(Vec2::new(x, y));
    }

    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| format_err(0, "unexpected end of file in cell block"))?;
        let mut it = l.split_whitespace();
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(ln, "bad cell vertex count"))?;
        let loop_: Vec<usize> = it
            .map(|t| t.parse().map_err(|_| format_err(ln, format!("bad vertex index {t:?}"))))
            .collect::<Result<_>>()?;
        if loop_.len() != m {
            return Err(format_err(
                ln,
                format!("cell declares {m} vertices but lists {}", loop_.len()),
            ));
        }
        cells.push(loop_);
    }

    let mut labels = Vec::new();
    for (ln, l) in lines {
        let mut it = l.split_whitespace();
        if it.next() != Some("boundary") {
            return Err(format_err(ln, "expected a `boundary` line"));
        }
        let v0: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(ln, "bad boundary vertex"))?;
        let v1: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(ln, "bad boundary vertex"))?;
        let name = it
            .next()
            .ok_or_else(|| format_err(ln, "missing boundary label"))?;
        labels.push((v0, v1, name.to_string()));
    }
    build_mesh(vertices, cells, &labels)
}

/// Render a mesh in the text format. Coordinates keep 17 significant digits,
/// enough to round-trip f64 exactly.
pub fn write_mesh_string(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vem-mesh 1");
    let _ = writeln!(s, "{} {}", mesh.n_vertices(), mesh.n_cells());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e}", v.x, v.y);
    }
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.len());
        for v in c {
            let _ = write!(s, " {v}");
        }
        let _ = writeln!(s);
    }
    for e in &mesh.edges {
        if let Some(li) = e.label {
            let _ = writeln!(s, "boundary {} {} {}", e.v0, e.v1, mesh.labels[li]);
        }
    }
    s
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &PolygonalMesh) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

/// Field data attached to a VTK export.
#[derive(Debug, Clone, Default)]
pub struct VtkData {
    /// Vector fields sampled at mesh vertices.
    pub point_vectors: Vec<(String, Vec<Vec2>)>,
    /// Scalar fields, one value per cell.
    pub cell_scalars: Vec<(String, Vec<f64>)>,
}

/// Write mesh and fields as legacy ASCII VTK PolyData, viewable in ParaView.
pub fn write_vtk(path: impl AsRef<Path>, mesh: &PolygonalMesh, data: &VtkData) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "vem2d polygonal mesh");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET POLYDATA");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.10e} {:.10e} 0.0", v.x, v.y);
    }
    let list_len: usize = mesh.cells.iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "POLYGONS {} {}", mesh.n_cells(), list_len);
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.len());
        for v in c {
            let _ = write!(s, " {v}");
        }
        let _ = writeln!(s);
    }
    if !data.point_vectors.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.n_vertices());
        for (name, field) in &data.point_vectors {
            assert_eq!(field.len(), mesh.n_vertices(), "point field size mismatch");
            let _ = writeln!(s, "VECTORS {name} double");
            for v in field {
                let _ = writeln!(s, "{:.10e} {:.10e} 0.0", v.x, v.y);
            }
        }
    }
    if !data.cell_scalars.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
        for (name, field) in &data.cell_scalars {
            assert_eq!(field.len(), mesh.n_cells(), "cell field size mismatch");
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for v in field {
                let _ = writeln!(s, "{:.10e}", v);
            }
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}
