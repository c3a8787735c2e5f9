//! Browser bindings for the vem2d solver. Everything crosses the JS boundary
//! as flat typed arrays: a vertex-coordinate stream plus polygon offsets for
//! drawing, one scalar per cell for coloring, and a plain-text summary.

use vem2d::bench::{self, layer_metrics};
use vem2d::forms::CipDeltas;
use vem2d::mesh::{
    channel_mesh, square_grid, voronoi_lloyd, ChannelConfig, PolygonalMesh, UNIT_SQUARE,
};
use vem2d::system::{Discretization, Solution};
use wasm_bindgen::prelude::*;

/// Mesh (and optionally solution) data ready for canvas rendering.
#[wasm_bindgen]
pub struct Bundle {
    coords: Vec<f64>,
    offsets: Vec<u32>,
    cell_values: Vec<f64>,
    vertex_velocity: Vec<f64>,
    summary: String,
}

#[wasm_bindgen]
impl Bundle {
    /// Polygon vertex stream: x0 y0 x1 y1 ... for every cell back to back.
    #[wasm_bindgen(getter)]
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// Start of each polygon in `coords` (in points), plus a final end mark.
    #[wasm_bindgen(getter)]
    pub fn offsets(&self) -> Vec<u32> {
        self.offsets.clone()
    }

    /// One scalar per cell (field value or mesh statistic) for coloring.
    #[wasm_bindgen(getter, js_name = cellValues)]
    pub fn cell_values(&self) -> Vec<f64> {
        self.cell_values.clone()
    }

    /// u,v pairs per mesh vertex; empty for pure mesh views.
    #[wasm_bindgen(getter, js_name = vertexVelocity)]
    pub fn vertex_velocity(&self) -> Vec<f64> {
        self.vertex_velocity.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

fn polygon_stream(mesh: &PolygonalMesh) -> (Vec<f64>, Vec<u32>) {
    let mut coords = Vec::new();
    let mut offsets = Vec::with_capacity(mesh.n_cells() + 1);
    let mut count = 0u32;
    for cell in &mesh.cells {
        offsets.push(count);
        for &v in cell {
            let p = mesh.vertices[v];
            coords.push(p.x);
            coords.push(p.y);
            count += 1;
        }
    }
    offsets.push(count);
    (coords, offsets)
}

fn solution_bundle(disc: &Discretization, sol: &Solution, summary: String) -> Bundle {
    let (coords, offsets) = polygon_stream(&disc.mesh);
    let cell_values = (0..disc.mesh.n_cells())
        .map(|c| {
            sol.velocity_at(disc, c, disc.ops[c].geo.centroid).norm()
        })
        .collect();
    let vertex_velocity = (0..disc.mesh.n_vertices())
        .flat_map(|v| [sol.velocity[2 * v], sol.velocity[2 * v + 1]])
        .collect();
    Bundle {
        coords,
        offsets,
        cell_values,
        vertex_velocity,
        summary,
    }
}

fn err_js(e: vem2d::VemError) -> JsError {
    JsError::new(&e.to_string())
}

/// Lloyd-relaxed Voronoi tessellation of the unit square. Cell colors show
/// the vertex count of each polygon.
#[wasm_bindgen(js_name = lloydMesh)]
pub fn lloyd_mesh(n_seeds: usize, iters: usize, seed: u32) -> Result<Bundle, JsError> {
    let mesh = voronoi_lloyd(n_seeds.clamp(4, 600), iters.min(200), seed as u64, UNIT_SQUARE)
        .map_err(err_js)?;
    let (coords, offsets) = polygon_stream(&mesh);
    let cell_values = mesh.cells.iter().map(|c| c.len() as f64).collect();
    let q = mesh.quality_report();
    let summary = format!(
        "{} cells, {} vertices | h = [{:.3}, {:.3}] | worst edge/diameter {:.3}",
        q.n_cells, q.n_vertices, q.h_min, q.h_max, q.min_edge_ratio
    );
    Ok(Bundle {
        coords,
        offsets,
        cell_values,
        vertex_velocity: Vec::new(),
        summary,
    })
}

/// Boundary-layer problem at nu = 1e-9 on an n x n grid, with adjustable
/// jump-penalty levels. Cell colors show the vertical velocity component,
/// which is where spurious oscillations appear when the penalties are off.
#[wasm_bindgen(js_name = solveLayer)]
pub fn solve_layer(n: usize, k: usize, d1: f64, d2: f64, d3: f64) -> Result<Bundle, JsError> {
    let n = n.clamp(4, 32);
    let mut problem = bench::boundary_layer();
    problem.deltas = CipDeltas::new(d1.max(0.0), d2.max(0.0), d3.max(0.0));
    let mesh = square_grid(n).map_err(err_js)?;
    let (disc, sol) = bench::run_case(&problem, mesh, k).map_err(err_js)?;
    let m = layer_metrics(&disc, &sol);
    let summary = format!(
        "{} unknowns | smooth-region error {:.2e} | peak |u2| {:.3} (exact <= 1)",
        sol.n_unknowns, m.smooth_region_error, m.peak_u2
    );
    let mut bundle = solution_bundle(&disc, &sol, summary);
    // Color by u2, the oscillation-prone component, rather than speed.
    for (c, v) in bundle.cell_values.iter_mut().enumerate() {
        *v = sol.velocity_at(&disc, c, disc.ops[c].geo.centroid).y;
    }
    Ok(bundle)
}

/// Pipe-with-obstacles flow: parabolic inflow on the left, natural outflow
/// on the right, no-slip elsewhere. Cell colors show flow speed.
#[wasm_bindgen(js_name = solveChannel)]
pub fn solve_channel(n_seeds: usize, k: usize) -> Result<Bundle, JsError> {
    let cfg = ChannelConfig {
        n_seeds: n_seeds.clamp(60, 700),
        lloyd_iters: 30,
        ..ChannelConfig::default()
    };
    let mesh = channel_mesh(&cfg).map_err(err_js)?;
    let problem = bench::channel();
    let (disc, sol) = bench::run_case(&problem, mesh, k).map_err(err_js)?;
    let r = bench::channel_report(&disc, &sol);
    let summary = format!(
        "{} unknowns | inflow {:.4}, outflow {:.4}, imbalance {:.1e} | peak speed {:.2}",
        sol.n_unknowns, r.inflow, r.outflow, r.imbalance, r.peak_speed
    );
    Ok(solution_bundle(&disc, &sol, summary))
}
