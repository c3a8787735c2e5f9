//! Mesh generators: structured grids, Lloyd-relaxed Voronoi tessellations of
//! a rectangle, and the channel-with-obstacles domain.

use super::{build_mesh, PolygonalMesh};
use crate::error::{Result, VemError};
use crate::geometry::{clip_halfplane, polygon_centroid, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Axis-aligned rectangle (x0, y0, x1, y1).
pub type Rect = (f64, f64, f64, f64);

pub const UNIT_SQUARE: Rect = (0.0, 0.0, 1.0, 1.0);
/// Channel domain: 4 x 1 rectangle centred on the x-axis.
pub const CHANNEL_RECT: Rect = (0.0, -0.5, 4.0, 0.5);

fn rect_polygon(r: Rect) -> Vec<Vec2> {
    vec![
        Vec2::new(r.0, r.1),
        Vec2::new(r.2, r.1),
        Vec2::new(r.2, r.3),
        Vec2::new(r.0, r.3),
    ]
}

fn rect_diameter(r: Rect) -> f64 {
    ((r.2 - r.0).powi(2) + (r.3 - r.1).powi(2)).sqrt()
}

/// Label boundary edges of a mesh on rectangle `r` by which side they lie on
/// ("left", "right", "bottom", "top"). Edges matching no side get
/// `fallback`, or cause an error when `fallback` is None.
fn side_labels(
    vertices: &[Vec2],
    edges: &[(usize, usize)],
    r: Rect,
    tol: f64,
    fallback: Option<&str>,
) -> Result<Vec<(usize, usize, String)>> {
    let mut out = Vec::new();
    for &(a, b) in edges {
        let (p, q) = (vertices[a], vertices[b]);
        let name = if (p.x - r.0).abs() < tol && (q.x - r.0).abs() < tol {
            "left"
        } else if (p.x - r.2).abs() < tol && (q.x - r.2).abs() < tol {
            "right"
        } else if (p.y - r.1).abs() < tol && (q.y - r.1).abs() < tol {
            "bottom"
        } else if (p.y - r.3).abs() < tol && (q.y - r.3).abs() < tol {
            "top"
        } else {
            fallback.ok_or_else(|| {
                VemError::InvalidMesh(format!(
                    "boundary edge ({a}, {b}) lies on no rectangle side"
                ))
            })?
        };
        out.push((a, b, name.to_string()));
    }
    Ok(out)
}

/// Boundary edges of a cell list: edges appearing in exactly one loop.
fn boundary_of(cells: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    for loop_ in cells {
        let m = loop_.len();
        for i in 0..m {
            let (a, b) = (loop_[i], loop_[(i + 1) % m]);
            let e = count.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
            e.0 += 1;
        }
    }
    let mut edges: Vec<(usize, usize)> = count
        .values()
        .filter(|(n, _)| *n == 1)
        .map(|(_, e)| *e)
        .collect();
    edges.sort_unstable();
    edges
}

/// n x n structured quadrilateral grid on the unit square, with boundary
/// edges labeled by side.
pub fn square_grid(n: usize) -> Result<PolygonalMesh> {
    square_grid_on(n, n, UNIT_SQUARE)
}

/// nx x ny structured grid on an arbitrary rectangle.
pub fn square_grid_on(nx: usize, ny: usize, r: Rect) -> Result<PolygonalMesh> {
    if nx == 0 || ny == 0 {
        return Err(VemError::InvalidArgument("grid size must be positive".into()));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec2::new(
                r.0 + (r.2 - r.0) * i as f64 / nx as f64,
                r.1 + (r.3 - r.1) * j as f64 / ny as f64,
            ));
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let tol = 1e-12 * rect_diameter(r);
    let labels = side_labels(&vertices, &boundary_of(&cells), r, tol, None)?;
    build_mesh(vertices, cells, &labels)
}

/// Voronoi tessellation machinery. Cells are built per seed by clipping the
/// bounding rectangle against the perpendicular bisectors with all other
/// seeds, visiting seeds nearest-first so most bisectors are skipped.
#[derive(Debug)]
struct Tessellation {
    /// One convex CCW polygon per seed (empty polygons are an error).
    polys: Vec<Vec<Vec2>>,
}

fn tessellate(seeds: &[Vec2], r: Rect) -> Result<Tessellation> {
    let n = seeds.len();
    let scale = rect_diameter(r);
    let base = rect_polygon(r);
    // Order of candidate cutters for each seed: nearest first.
    let mut polys = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            let da = (seeds[a] - seeds[i]).norm_squared();
            let db = (seeds[b] - seeds[i]).norm_squared();
            da.partial_cmp(&db).unwrap()
        });
        let mut poly = base.clone();
        for &j in &order {
            let d = seeds[j] - seeds[i];
            let dist = d.norm();
            if dist < 1e-12 * scale {
                return Err(VemError::DegenerateSeeds(format!(
                    "seeds {i} and {j} coincide at ({:.6}, {:.6})",
                    seeds[i].x, seeds[i].y
                )));
            }
            // The bisector cannot cut the cell if seed j is more than twice
            // the current max vertex distance away.
            let reach = poly
                .iter()
                .map(|v| (v - seeds[i]).norm())
                .fold(0.0f64, f64::max);
            if dist > 2.0 * reach {
                break;
            }
            let c = 0.5 * (d.dot(&seeds[j]) + d.dot(&seeds[i]));
            poly = clip_halfplane(&poly, d, c, 1e-13 * dist * scale);
            if poly.len() < 3 {
                return Err(VemError::DegenerateSeeds(format!(
                    "seed {i} produced an empty Voronoi cell"
                )));
            }
        }
        polys.push(poly);
    }
    Ok(Tessellation { polys })
}

/// Merge per-seed polygons into a conforming mesh by snapping vertices onto a
/// quantization grid (~1e-9 of the domain diameter). Voronoi vertices shared
/// by adjacent cells (including near-degenerate multiple circumcenters) land
/// on the same snapped vertex, producing matching edges.
fn merge_polygons(polys: &[Vec<Vec2>], r: Rect, keep: impl Fn(usize) -> bool) -> (Vec<Vec2>, Vec<Vec<usize>>) {
    let scale = rect_diameter(r);
    let q = 1e-9 * scale;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Vec2> = Vec::new();
    let mut cells = Vec::new();
    let vertex_id = |p: Vec2, vertices: &mut Vec<Vec2>, grid: &mut HashMap<(i64, i64), Vec<usize>>| -> usize {
        let (ix, iy) = ((p.x / q).round() as i64, (p.y / q).round() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = grid.get(&(ix + dx, iy + dy)) {
                    for &id in ids {
                        if (vertices[id] - p).norm() <= q {
                            return id;
                        }
                    }
                }
            }
        }
        let id = vertices.len();
        vertices.push(p);
        grid.entry((ix, iy)).or_default().push(id);
        id
    };
    for (i, poly) in polys.iter().enumerate() {
        if !keep(i) {
            continue;
        }
        let mut loop_: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let id = vertex_id(p, &mut vertices, &mut grid);
            // Snapping can collapse short edges; drop immediate repeats.
            if loop_.last() != Some(&id) {
                loop_.push(id);
            }
        }
        while loop_.len() > 1 && loop_.first() == loop_.last() {
            loop_.pop();
        }
        cells.push(loop_);
    }
    (vertices, cells)
}

/// Lloyd relaxation: move every non-pinned seed to the centroid of its
/// Voronoi cell, `iters` times.
fn lloyd(seeds: &mut [Vec2], pinned: &[bool], r: Rect, iters: usize) -> Result<()> {
    for _ in 0..iters {
        let t = tessellate(seeds, r)?;
        for (i, poly) in t.polys.iter().enumerate() {
            if !pinned[i] {
                seeds[i] = polygon_centroid(poly);
            }
        }
    }
    Ok(())
}

/// Lloyd-relaxed Voronoi mesh of a rectangle. Deterministic in (n_seeds,
/// lloyd_iters, rng_seed). Boundary edges are labeled by rectangle side.
pub fn voronoi_lloyd(
    n_seeds: usize,
    lloyd_iters: usize,
    rng_seed: u64,
    r: Rect,
) -> Result<PolygonalMesh> {
    if n_seeds < 1 {
        return Err(VemError::InvalidArgument("need at least one seed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<Vec2> = (0..n_seeds)
        .map(|_| {
            Vec2::new(
                rng.gen_range(r.0..r.2),
                rng.gen_range(r.1..r.3),
            )
        })
        .collect();
    let pinned = vec![false; n_seeds];
    lloyd(&mut seeds, &pinned, r, lloyd_iters)?;
    let t = tessellate(&seeds, r)?;
    let (vertices, cells) = merge_polygons(&t.polys, r, |_| true);
    let tol = 1e-7 * rect_diameter(r);
    let labels = side_labels(&vertices, &boundary_of(&cells), r, tol, None)?;
    build_mesh(vertices, cells, &labels)
}

/// Geometry of the channel benchmark: a 4 x 1 rectangle with two polygonal
/// obstacles ("pipes") removed.
#[derive(Debug, Clone)]
pub struct ChannelConfig {
    /// Number of free (relaxed) seeds before hole carving.
    pub n_seeds: usize,
    pub lloyd_iters: usize,
    pub rng_seed: u64,
    /// Obstacle centres.
    pub holes: Vec<Vec2>,
    /// Apothem of the polygonal obstacle (half-width across flats).
    pub radius: f64,
    /// Number of obstacle sides.
    pub sides: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            n_seeds: 600,
            lloyd_iters: 50,
            rng_seed: 1,
            holes: vec![Vec2::new(1.0, 0.0), Vec2::new(2.5, 0.0)],
            radius: 0.15,
            sides: 12,
        }
    }
}

impl ChannelConfig {
    /// Exact area of one obstacle: a regular polygon with `sides` sides and
    /// apothem `radius` has area m r^2 tan(pi/m).
    pub fn hole_area(&self) -> f64 {
        let m = self.sides as f64;
        m * self.radius * self.radius * (std::f64::consts::PI / m).tan()
    }
}

/// Voronoi mesh of the channel with polygonal holes.
///
/// Each hole is realized by seed pairs: for each of `sides` directions u_j
/// from the hole centre, a pinned seed is placed at r - d and one at r + d
/// along u_j. The pair bisector is the tangent line at distance `radius`, so
/// the union of inner cells is exactly the regular polygon with apothem
/// `radius`; dropping them leaves a polygonal hole whose edges are labeled
/// "pipe". Free seeds too close to a hole are discarded, and pinned seeds do
/// not move during Lloyd relaxation.
pub fn channel_mesh(cfg: &ChannelConfig) -> Result<PolygonalMesh> {
    let r = CHANNEL_RECT;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let d = 0.2 * cfg.radius;
    let clearance = cfg.radius + 2.5 * d;
    let mut seeds: Vec<Vec2> = Vec::new();
    let mut pinned: Vec<bool> = Vec::new();
    let mut inner: Vec<bool> = Vec::new();
    for hole in &cfg.holes {
        for j in 0..cfg.sides {
            let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / cfg.sides as f64;
            let u = Vec2::new(th.cos(), th.sin());
            seeds.push(hole + u * (cfg.radius - d));
            pinned.push(true);
            inner.push(true);
            seeds.push(hole + u * (cfg.radius + d));
            pinned.push(true);
            inner.push(false);
        }
    }
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < cfg.n_seeds {
        attempts += 1;
        if attempts > 100 * cfg.n_seeds + 1000 {
            return Err(VemError::DegenerateSeeds(
                "could not place the requested number of channel seeds".into(),
            ));
        }
        let p = Vec2::new(rng.gen_range(r.0..r.2), rng.gen_range(r.1..r.3));
        if cfg.holes.iter().any(|h| (p - h).norm() < clearance) {
            continue;
        }
        seeds.push(p);
        pinned.push(false);
        inner.push(false);
        accepted += 1;
    }
    lloyd(&mut seeds, &pinned, r, cfg.lloyd_iters)?;
    // Lloyd can pull free centroids toward the holes; that only affects
    // quality, not the hole geometry, which pinned pairs fix exactly.
    let t = tessellate(&seeds, r)?;
    let (vertices, cells) = merge_polygons(&t.polys, r, |i| !inner[i]);
    let tol = 1e-7 * rect_diameter(r);
    let mut labels = Vec::new();
    for (a, b) in boundary_of(&cells) {
        let (p, q) = (vertices[a], vertices[b]);
        let mid = 0.5 * (p + q);
        let near_hole = cfg
            .holes
            .iter()
            .any(|h| (mid - h).norm() < cfg.radius + d);
        let name = if near_hole {
            "pipe"
        } else if (p.x - r.0).abs() < tol && (q.x - r.0).abs() < tol {
            "left"
        } else if (p.x - r.2).abs() < tol && (q.x - r.2).abs() < tol {
            "right"
        } else if (p.y - r.1).abs() < tol && (q.y - r.1).abs() < tol {
            "bottom"
        } else if (p.y - r.3).abs() < tol && (q.y - r.3).abs() < tol {
            "top"
        } else {
            return Err(VemError::InvalidMesh(format!(
                "channel boundary edge at ({:.4}, {:.4}) matches no side or pipe",
                mid.x, mid.y
            )));
        };
        labels.push((a, b, name.to_string()));
    }
    build_mesh(vertices, cells, &labels)
}
