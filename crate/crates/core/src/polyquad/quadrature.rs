//! Quadrature rules: Gauss-Legendre and Gauss-Lobatto on intervals, collapsed
//! tensor rules on triangles, and composite rules on polygons.

use crate::geometry::{
    polygon_centroid, polygon_diameter, star_shaped_from_centroid, triangulate_ear_clip, Vec2,
};

/// Points and weights for integration over one polygonal cell.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl CellQuadrature {
    pub fn integrate(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Legendre P_n(x) and its first two derivatives, by the three-term
/// recurrence and the standard derivative identities.
fn legendre(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    for m in 1..n {
        let p2 = ((2 * m + 1) as f64 * x * p1 - m as f64 * p0) / (m + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n); the ODE gives P_n''.
    let omx2 = 1.0 - x * x;
    let d1 = if omx2.abs() < 1e-300 {
        // Endpoint limit: P_n'(+-1) = (+-1)^(n-1) n(n+1)/2.
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (p0 - x * p1) / omx2
    };
    let d2 = if omx2.abs() < 1e-300 {
        0.0 // unused at endpoints
    } else {
        (2.0 * x * d1 - (n * (n + 1)) as f64 * p1) / omx2
    };
    (p1, d1, d2)
}

/// n-point Gauss-Legendre rule on [-1, 1]; exact for degree 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one Gauss point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp, _) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp, _) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// n-point Gauss-Lobatto rule on [-1, 1] (n >= 2): endpoints plus the roots
/// of P'_{n-1}; exact for degree 2n - 3.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Lobatto rule needs at least two points");
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    let endpoint_w = 2.0 / (n * m) as f64;
    weights[0] = endpoint_w;
    weights[n - 1] = endpoint_w;
    for i in 1..=(n - 1) / 2 {
        // Interior nodes: Newton on P'_m from an interlacing initial guess.
        let mut x = (std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (_, d1, d2) = legendre(m, x);
            let dx = d1 / d2;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (p, _, _) = legendre(m, x);
        let w = 2.0 / ((n * m) as f64 * p * p);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss points and weights mapped to the segment [a, b] in the plane.
/// Weights sum to |b - a|.
pub fn edge_gauss(a: Vec2, b: Vec2, n: usize) -> (Vec<Vec2>, Vec<f64>) {
    let (nodes, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let len = (b - a).norm();
    let points = nodes.iter().map(|t| mid + half * *t).collect();
    let weights = ws.iter().map(|w| 0.5 * len * w).collect();
    (points, weights)
}

/// Quadrature on the triangle (p0, p1, p2), exact for bivariate polynomials
/// of total degree <= `order`, built by collapsing a tensor Gauss rule
/// through the Duffy map (u, v) = (s, t(1 - s)) with Jacobian (1 - s).
pub fn triangle_quadrature(p0: Vec2, p1: Vec2, p2: Vec2, order: usize) -> CellQuadrature {
    // Degree in s after collapsing rises by one from the Jacobian.
    let ns = (order + 3) / 2;
    let nt = (order + 2) / 2;
    let (xs, ws) = gauss_legendre(ns);
    let (xt, wt) = gauss_legendre(nt);
    // |det| of the affine map from the reference triangle = 2 * area.
    let det = (p1 - p0).x * (p2 - p0).y - (p1 - p0).y * (p2 - p0).x;
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for (i, &w1) in ws.iter().enumerate() {
        let s = 0.5 * (xs[i] + 1.0);
        for (j, &w2) in wt.iter().enumerate() {
            let t = 0.5 * (xt[j] + 1.0);
            let (u, v) = (s, t * (1.0 - s));
            points.push(p0 + (p1 - p0) * u + (p2 - p0) * v);
            weights.push(0.25 * w1 * w2 * (1.0 - s) * det);
        }
    }
    CellQuadrature { points, weights }
}

/// Composite quadrature over a simple CCW polygon, exact for total degree
/// <= `order`. The polygon is fanned from its centroid when star-shaped with
/// respect to it (the common case for Voronoi cells), otherwise ear-clipped.
/// All weights are positive either way.
pub fn cell_quadrature(verts: &[Vec2], order: usize) -> CellQuadrature {
    assert!(verts.len() >= 3, "cell needs at least 3 vertices");
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let diam2 = polygon_diameter(verts).powi(2);
    if star_shaped_from_centroid(verts, 1e-12 * diam2) {
        let c = polygon_centroid(verts);
        for i in 0..verts.len() {
            let q = triangle_quadrature(c, verts[i], verts[(i + 1) % verts.len()], order);
            points.extend(q.points);
            weights.extend(q.weights);
        }
    } else {
        for t in triangulate_ear_clip(verts) {
            let q = triangle_quadrature(verts[t[0]], verts[t[1]], verts[t[2]], order);
            points.extend(q.points);
            weights.extend(q.weights);
        }
    }
    CellQuadrature { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gauss_legendre_matches_tables() {
        let (x, w) = gauss_legendre(1);
        assert_relative_eq!(x[0], 0.0);
        assert_relative_eq!(w[0], 2.0);
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert_relative_eq!(x[0], -r, max_relative = 1e-14);
        assert_relative_eq!(x[1], r, max_relative = 1e-14);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-14);
        let (x, w) = gauss_legendre(3);
        assert_relative_eq!(x[1], 0.0);
        assert_relative_eq!(x[2], (0.6f64).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(w[1], 8.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(w[2], 5.0 / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_exactness() {
        // n points integrate monomials up to degree 2n-1 exactly on [-1,1].
        for n in 1..=20usize {
            let (x, w) = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!(
                    (got - exact).abs() < 1e-13,
                    "n={n} degree={d}: got {got}, want {exact}"
                );
            }
        }
    }

    #[test]
    fn gauss_lobatto_matches_tables() {
        // n=3: nodes {-1,0,1}, weights {1/3, 4/3, 1/3}.
        let (x, w) = gauss_lobatto(3);
        assert_relative_eq!(x[1], 0.0);
        assert_relative_eq!(w[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(w[1], 4.0 / 3.0, max_relative = 1e-14);
        // n=4: interior nodes +-1/sqrt(5), weights {1/6, 5/6, 5/6, 1/6}.
        let (x, w) = gauss_lobatto(4);
        assert_relative_eq!(x[1], -1.0 / 5f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(x[2], 1.0 / 5f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(w[0], 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(w[1], 5.0 / 6.0, max_relative = 1e-14);
        // n=5: interior nodes {-sqrt(3/7), 0, sqrt(3/7)}, center weight 32/45.
        let (x, w) = gauss_lobatto(5);
        assert_relative_eq!(x[1], -(3f64 / 7.0).sqrt(), max_relative = 1e-13);
        assert_relative_eq!(x[2], 0.0);
        assert_relative_eq!(w[2], 32.0 / 45.0, max_relative = 1e-13);
        assert_relative_eq!(w[0], 1.0 / 10.0, max_relative = 1e-14);
    }

    #[test]
    fn lobatto_exactness() {
        for n in 2..=12usize {
            let (x, w) = gauss_lobatto(n);
            for d in 0..=(2 * n - 3) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} d={d}");
            }
        }
    }

    fn mono_integral_unit_square(a: u32, b: u32) -> f64 {
        1.0 / ((a as f64 + 1.0) * (b as f64 + 1.0))
    }

    #[test]
    fn polygon_rule_exact_on_unit_square() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        for order in [2usize, 5, 8, 12] {
            let q = cell_quadrature(&sq, order);
            assert!(q.weights.iter().all(|w| *w > 0.0));
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let got = q.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    let exact = mono_integral_unit_square(a, b);
                    assert!(
                        (got - exact).abs() < 1e-13 * exact.max(1.0),
                        "order={order} x^{a} y^{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn pentagon_weight_sum_is_area() {
        let verts: Vec<Vec2> = (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let q = cell_quadrature(&verts, 6);
        let area: f64 = q.weights.iter().sum();
        let exact = 2.5 * (2.0 * std::f64::consts::PI / 5.0).sin();
        assert_relative_eq!(area, exact, max_relative = 1e-13);
    }

    #[test]
    fn nonconvex_cell_uses_ear_clipping() {
        // U-shaped cell: not star-shaped with respect to its centroid (both
        // prongs are hidden behind the notch), forcing the ear-clip path.
        let u = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.7, 1.0),
            Vec2::new(0.7, 0.3),
            Vec2::new(0.3, 0.3),
            Vec2::new(0.3, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!crate::geometry::star_shaped_from_centroid(&u, 1e-12));
        let q = cell_quadrature(&u, 4);
        assert!(q.weights.iter().all(|w| *w > 0.0));
        assert_relative_eq!(q.weights.iter().sum::<f64>(), 0.72, max_relative = 1e-13);
        // int x^2 y over the U = full square minus the [0.3,0.7]x[0.3,1] notch.
        let notch = ((0.7f64.powi(3) - 0.3f64.powi(3)) / 3.0) * ((1.0 - 0.09) / 2.0);
        let exact = 1.0 / 6.0 - notch;
        assert_relative_eq!(
            q.integrate(|p| p.x * p.x * p.y),
            exact,
            max_relative = 1e-13
        );
    }

    #[test]
    fn edge_rule_exact() {
        let a = Vec2::new(0.2, -0.4);
        let b = Vec2::new(1.1, 0.9);
        let (pts, ws) = edge_gauss(a, b, 4);
        assert_relative_eq!(ws.iter().sum::<f64>(), (b - a).norm(), max_relative = 1e-14);
        // Integrate x^3 y^2 along the segment against a parametric reference.
        let got: f64 = pts
            .iter()
            .zip(&ws)
            .map(|(p, w)| w * p.x.powi(3) * p.y * p.y)
            .sum();
        let n = 2000;
        let mut reference = 0.0;
        let len = (b - a).norm();
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let p = a + (b - a) * t;
            reference += p.x.powi(3) * p.y * p.y * len / n as f64;
        }
        assert_relative_eq!(got, reference, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn random_triangle_affine_exactness(ax in -1.0..1.0f64, ay in -1.0..1.0f64,
                                            bx in 1.5..2.5f64, by in -1.0..1.0f64,
                                            cx in -1.0..1.0f64, cy in 1.5..2.5f64) {
            let (a, b, c) = (Vec2::new(ax, ay), Vec2::new(bx, by), Vec2::new(cx, cy));
            let q = triangle_quadrature(a, b, c, 3);
            let area = 0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x);
            prop_assume!(area > 1e-3);
            let got_area: f64 = q.weights.iter().sum();
            prop_assert!((got_area - area).abs() < 1e-12 * area);
            // Linear exactness: integral of x equals area * centroid_x.
            let gx = q.integrate(|p| p.x);
            let cx = (a.x + b.x + c.x) / 3.0;
            prop_assert!((gx - area * cx).abs() < 1e-12 * area.max(gx.abs()));
        }
    }
}
