//! Small planar-geometry helpers shared by mesh construction and quadrature.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Signed area of a simple polygon (positive when counter-clockwise).
pub fn polygon_signed_area(verts: &[Vec2]) -> f64 {
    let n = verts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = verts[i];
        let q = verts[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(verts: &[Vec2]) -> Vec2 {
    let n = verts.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut a = 0.0;
    for i in 0..n {
        let p = verts[i];
        let q = verts[(i + 1) % n];
        let w = p.x * q.y - q.x * p.y;
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if a.abs() < f64::MIN_POSITIVE {
        // Degenerate polygon; fall back to the vertex mean so callers can
        // still report a location in diagnostics.
        let s: Vec2 = verts.iter().sum();
        return s / verts.len() as f64;
    }
    Vec2::new(cx / (3.0 * a), cy / (3.0 * a))
}

/// Maximum pairwise vertex distance.
pub fn polygon_diameter(verts: &[Vec2]) -> f64 {
    let mut d2: f64 = 0.0;
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            d2 = d2.max((verts[i] - verts[j]).norm_squared());
        }
    }
    d2.sqrt()
}

/// Cross product z-component of (b - a) x (c - a).
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Strict convexity test for a CCW polygon, with `tol` an absolute area
/// tolerance for collinear corners.
pub fn is_convex(verts: &[Vec2], tol: f64) -> bool {
    let n = verts.len();
    (0..n).all(|i| orient(verts[i], verts[(i + 1) % n], verts[(i + 2) % n]) > -tol)
}

/// True if every fan triangle (centroid, v_i, v_{i+1}) is positively
/// oriented, i.e. the polygon is star-shaped with respect to its centroid.
pub fn star_shaped_from_centroid(verts: &[Vec2], tol: f64) -> bool {
    let c = polygon_centroid(verts);
    let n = verts.len();
    (0..n).all(|i| orient(c, verts[i], verts[(i + 1) % n]) > tol)
}

fn point_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2, tol: f64) -> bool {
    orient(a, b, p) >= -tol && orient(b, c, p) >= -tol && orient(c, a, p) >= -tol
}

/// Ear-clipping triangulation of a simple CCW polygon. Returns index triples
/// into `verts`. Works for non-convex (but non-self-intersecting) polygons.
pub fn triangulate_ear_clip(verts: &[Vec2]) -> Vec<[usize; 3]> {
    let n = verts.len();
    assert!(n >= 3, "polygon needs at least 3 vertices");
    let scale2 = polygon_diameter(verts).powi(2);
    let tol = 1e-14 * scale2;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ip, ic, iq) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (verts[ip], verts[ic], verts[iq]);
            if orient(a, b, c) <= tol {
                continue; // reflex or degenerate corner
            }
            let blocked = idx
                .iter()
                .filter(|&&j| j != ip && j != ic && j != iq)
                .any(|&j| point_in_triangle(verts[j], a, b, c, tol));
            if !blocked {
                tris.push([ip, ic, iq]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        guard += 1;
        assert!(
            clipped && guard <= 2 * n,
            "ear clipping failed; polygon is likely self-intersecting"
        );
    }
    tris.push([idx[0], idx[1], idx[2]]);
    tris
}

/// Clip a convex CCW polygon against the half-plane { x : n.x <= c }.
/// Returns the (possibly empty) clipped polygon.
pub fn clip_halfplane(poly: &[Vec2], normal: Vec2, c: f64, tol: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let dp = normal.dot(&p) - c;
        let dq = normal.dot(&q) - c;
        if dp <= tol {
            out.push(p);
        }
        // Edge crosses the boundary: insert the intersection point.
        if (dp > tol && dq < -tol) || (dp < -tol && dq > tol) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_area_centroid() {
        let s = unit_square();
        assert_relative_eq!(polygon_signed_area(&s), 1.0);
        let c = polygon_centroid(&s);
        assert_relative_eq!(c.x, 0.5);
        assert_relative_eq!(c.y, 0.5);
        assert_relative_eq!(polygon_diameter(&s), 2f64.sqrt());
    }

    #[test]
    fn regular_pentagon_area() {
        // Circumradius-1 regular pentagon: area = (5/2) sin(2 pi / 5).
        let verts: Vec<Vec2> = (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let exact = 2.5 * (2.0 * std::f64::consts::PI / 5.0).sin();
        assert_relative_eq!(polygon_signed_area(&verts), exact, max_relative = 1e-14);
    }

    #[test]
    fn ear_clip_l_shape() {
        // Non-convex L-shape: 6 vertices, 4 triangles, total area 3/4.
        let l = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.5, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!is_convex(&l, 1e-12));
        let tris = triangulate_ear_clip(&l);
        assert_eq!(tris.len(), 4);
        let total: f64 = tris
            .iter()
            .map(|t| 0.5 * orient(l[t[0]], l[t[1]], l[t[2]]))
            .sum();
        assert_relative_eq!(total, 0.75, max_relative = 1e-14);
        assert!(tris
            .iter()
            .all(|t| orient(l[t[0]], l[t[1]], l[t[2]]) > 0.0));
    }

    #[test]
    fn halfplane_clip_square() {
        // Keep x <= 0.25 of the unit square.
        let clipped = clip_halfplane(&unit_square(), Vec2::new(1.0, 0.0), 0.25, 1e-12);
        assert_relative_eq!(polygon_signed_area(&clipped), 0.25, max_relative = 1e-12);
        // Clip everything away.
        let gone = clip_halfplane(&unit_square(), Vec2::new(0.0, 1.0), -1.0, 1e-12);
        assert!(gone.is_empty());
    }
}
