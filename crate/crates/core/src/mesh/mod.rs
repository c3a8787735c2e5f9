//! Polygonal mesh data structures, validation, and per-element geometry.

mod generate;
mod io;

pub use generate::{
    channel_mesh, square_grid, square_grid_on, voronoi_lloyd, ChannelConfig, CHANNEL_RECT,
    UNIT_SQUARE,
};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string, write_vtk, VtkData};

use crate::error::{Result, VemError};
use crate::geometry::{
    polygon_centroid, polygon_diameter, polygon_signed_area, Vec2,
};
use std::collections::HashMap;

/// One unique mesh edge. `left` traverses the edge as (v0 -> v1) in its CCW
/// cell loop; `right` (if any) traverses it backwards. Boundary edges have
/// exactly one incident cell and may carry a label index into
/// [`PolygonalMesh::labels`].
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub v0: usize,
    pub v1: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub label: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.left.is_none() || self.right.is_none()
    }
}

/// A conforming mesh of simple CCW polygons.
#[derive(Debug, Clone, Default)]
pub struct PolygonalMesh {
    pub vertices: Vec<Vec2>,
    /// CCW vertex loops, one per cell.
    pub cells: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
    /// Per cell: (edge id, true if the cell traverses the edge v0 -> v1),
    /// aligned with the cell's vertex loop (entry i joins loop vertices i and
    /// i+1).
    pub cell_edges: Vec<Vec<(usize, bool)>>,
    /// Interned boundary label strings.
    pub labels: Vec<String>,
}

/// Geometry of one cell, in the order of its vertex loop.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub verts: Vec<Vec2>,
    pub area: f64,
    pub centroid: Vec2,
    pub diameter: f64,
    /// Outward unit normal of local edge i (joining loop vertices i, i+1).
    pub normals: Vec<Vec2>,
    /// Unit tangent of local edge i, oriented along the loop.
    pub tangents: Vec<Vec2>,
    pub edge_lengths: Vec<f64>,
}

/// Summary statistics used to judge mesh quality.
#[derive(Debug, Clone)]
pub struct MeshQualityReport {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_cells: usize,
    pub h_max: f64,
    pub h_min: f64,
    pub total_area: f64,
    /// min over cells of (shortest edge) / (cell diameter).
    pub min_edge_ratio: f64,
    pub max_cell_vertices: usize,
}

/// Assemble a validated mesh from vertex coordinates, CCW cell loops, and
/// optional boundary edge labels given as (v0, v1, label) with arbitrary
/// endpoint order.
pub fn build_mesh(
    vertices: Vec<Vec2>,
    cells: Vec<Vec<usize>>,
    boundary_labels: &[(usize, usize, String)],
) -> Result<PolygonalMesh> {
    let nv = vertices.len();
    if cells.is_empty() {
        return Err(VemError::InvalidMesh("mesh has no cells".into()));
    }
    for (c, loop_) in cells.iter().enumerate() {
        if loop_.len() < 3 {
            return Err(VemError::InvalidMesh(format!(
                "cell {c} has {} vertices (need >= 3)",
                loop_.len()
            )));
        }
        for &v in loop_ {
            if v >= nv {
                return Err(VemError::InvalidMesh(format!(
                    "cell {c} references vertex {v} out of {nv}"
                )));
            }
        }
        let mut sorted = loop_.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(VemError::InvalidMesh(format!(
                "cell {c} repeats a vertex"
            )));
        }
        let coords: Vec<Vec2> = loop_.iter().map(|&v| vertices[v]).collect();
        let area = polygon_signed_area(&coords);
        if area <= 0.0 {
            return Err(VemError::InvalidMesh(format!(
                "cell {c} is not counter-clockwise (signed area {area:.3e})"
            )));
        }
    }

    // Unique edges keyed by unordered endpoints; ids in first-encounter order.
    let mut key_to_edge: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut cell_edges: Vec<Vec<(usize, bool)>> = Vec::with_capacity(cells.len());
    for (c, loop_) in cells.iter().enumerate() {
        let m = loop_.len();
        let mut local = Vec::with_capacity(m);
        for i in 0..m {
            let (a, b) = (loop_[i], loop_[(i + 1) % m]);
            let key = (a.min(b), a.max(b));
            match key_to_edge.get(&key) {
                None => {
                    let id = edges.len();
                    key_to_edge.insert(key, id);
                    edges.push(Edge {
                        v0: a,
                        v1: b,
                        left: Some(c),
                        right: None,
                        label: None,
                    });
                    local.push((id, true));
                }
                Some(&id) => {
                    let e = &mut edges[id];
                    if e.right.is_some() {
                        return Err(VemError::InvalidMesh(format!(
                            "edge ({a}, {b}) is shared by more than two cells"
                        )));
                    }
                    if (e.v0, e.v1) == (a, b) {
                        return Err(VemError::InvalidMesh(format!(
                            "edge ({a}, {b}) is traversed twice in the same direction; \
                             inconsistent cell orientation"
                        )));
                    }
                    e.right = Some(c);
                    local.push((id, false));
                }
            }
        }
        cell_edges.push(local);
    }

    // Attach labels to boundary edges.
    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();
    for (v0, v1, name) in boundary_labels {
        let key = (*v0.min(v1), *v0.max(v1));
        let &id = key_to_edge.get(&key).ok_or_else(|| {
            VemError::InvalidMesh(format!("labeled edge ({v0}, {v1}) does not exist"))
        })?;
        if !edges[id].is_boundary() {
            return Err(VemError::InvalidMesh(format!(
                "labeled edge ({v0}, {v1}) is interior"
            )));
        }
        let li = *label_index.entry(name.clone()).or_insert_with(|| {
            labels.push(name.clone());
            labels.len() - 1
        });
        edges[id].label = Some(li);
    }

    Ok(PolygonalMesh {
        vertices,
        cells,
        edges,
        cell_edges,
        labels,
    })
}

impl PolygonalMesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Coordinates of one cell's vertex loop.
    pub fn cell_coords(&self, c: usize) -> Vec<Vec2> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Full geometry of cell `c`.
    pub fn element_geometry(&self, c: usize) -> ElementGeometry {
        let verts = self.cell_coords(c);
        let m = verts.len();
        let mut normals = Vec::with_capacity(m);
        let mut tangents = Vec::with_capacity(m);
        let mut edge_lengths = Vec::with_capacity(m);
        for i in 0..m {
            let d = verts[(i + 1) % m] - verts[i];
            let len = d.norm();
            let t = d / len;
            tangents.push(t);
            // Outward normal of a CCW loop: rotate the tangent by -90 deg.
            normals.push(Vec2::new(t.y, -t.x));
            edge_lengths.push(len);
        }
        ElementGeometry {
            area: polygon_signed_area(&verts),
            centroid: polygon_centroid(&verts),
            diameter: polygon_diameter(&verts),
            verts,
            normals,
            tangents,
            edge_lengths,
        }
    }

    /// Boundary label of an edge, if any.
    pub fn edge_label(&self, e: usize) -> Option<&str> {
        self.edges[e].label.map(|li| self.labels[li].as_str())
    }

    /// Ids of all boundary edges.
    pub fn boundary_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].is_boundary())
            .collect()
    }

    pub fn quality_report(&self) -> MeshQualityReport {
        let mut h_max: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        let mut total_area = 0.0;
        let mut min_edge_ratio = f64::INFINITY;
        let mut max_cell_vertices = 0;
        for c in 0..self.n_cells() {
            let g = self.element_geometry(c);
            h_max = h_max.max(g.diameter);
            h_min = h_min.min(g.diameter);
            total_area += g.area;
            let shortest = g.edge_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
            min_edge_ratio = min_edge_ratio.min(shortest / g.diameter);
            max_cell_vertices = max_cell_vertices.max(self.cells[c].len());
        }
        MeshQualityReport {
            n_vertices: self.n_vertices(),
            n_edges: self.n_edges(),
            n_cells: self.n_cells(),
            h_max,
            h_min,
            total_area,
            min_edge_ratio,
            max_cell_vertices,
        }
    }
}

/// Two unit squares sharing one edge; the smallest mesh with an interior
/// edge, used widely in tests.
pub fn two_unit_squares() -> PolygonalMesh {
    let v = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(2.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(2.0, 1.0),
    ];
    let cells = vec![vec![0, 1, 4, 3], vec![1, 2, 5, 4]];
    build_mesh(v, cells, &[]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_squares() -> PolygonalMesh {
        two_unit_squares()
    }

    #[test]
    fn two_square_topology() {
        let m = two_squares();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_edges(), 7);
        // Exactly one interior edge: (1,4), left = cell 0, right = cell 1.
        let interior: Vec<&Edge> = m.edges.iter().filter(|e| !e.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!((interior[0].v0, interior[0].v1), (1, 4));
        assert_eq!(interior[0].left, Some(0));
        assert_eq!(interior[0].right, Some(1));
        // The right cell traverses it flipped.
        assert!(m.cell_edges[0].iter().any(|&(e, fwd)| fwd && !m.edges[e].is_boundary()));
        assert!(m.cell_edges[1].iter().any(|&(e, fwd)| !fwd && !m.edges[e].is_boundary()));
    }

    #[test]
    fn rejects_clockwise_cell() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
        ];
        let err = build_mesh(v, vec![vec![0, 2, 1]], &[]).unwrap_err();
        assert!(matches!(err, VemError::InvalidMesh(_)));
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        // Second cell also CCW on its own, but listed so the shared edge is
        // traversed in the same direction -> must be rejected. Construct by
        // flipping the second square (which makes it CW and caught earlier),
        // so instead duplicate the same cell twice: shared edges all repeat
        // in the same direction.
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let err = build_mesh(v, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]], &[]).unwrap_err();
        assert!(matches!(err, VemError::InvalidMesh(_)));
    }

    #[test]
    fn geometry_normals_outward() {
        let m = two_squares();
        let g = m.element_geometry(0);
        assert_eq!(g.verts.len(), 4);
        assert!((g.area - 1.0).abs() < 1e-14);
        // Every outward normal points away from the centroid.
        for i in 0..4 {
            let mid = 0.5 * (g.verts[i] + g.verts[(i + 1) % 4]);
            assert!(g.normals[i].dot(&(mid - g.centroid)) > 0.0);
            assert!((g.normals[i].norm() - 1.0).abs() < 1e-14);
            // Tangent is the normal rotated +90 degrees.
            let rot = Vec2::new(-g.normals[i].y, g.normals[i].x);
            assert!((rot - g.tangents[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn labels_attach_to_boundary() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let m = build_mesh(
            v,
            vec![vec![0, 1, 2, 3]],
            &[(1, 0, "bottom".into()), (2, 1, "right".into())],
        )
        .unwrap();
        let bottom = m.edges.iter().find(|e| (e.v0, e.v1) == (0, 1)).unwrap();
        assert_eq!(m.labels[bottom.label.unwrap()], "bottom");
        let quality = m.quality_report();
        assert!((quality.total_area - 1.0).abs() < 1e-14);
        assert!((quality.min_edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }
}
