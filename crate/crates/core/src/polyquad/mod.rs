//! Scaled monomial bases, polynomial calculus in coefficient space, and
//! quadrature on polygons and edges.
//!
//! All element-local polynomials are expressed in the scaled monomial basis
//!   m_a(x) = ((x - x_E)/h_E)^a1 * ((y - y_E)/h_E)^a2,
//! ordered degree-major and, within a degree d, as (d,0), (d-1,1), ..., (0,d).
//! Vector polynomials stack two component coefficient blocks [u1; u2]; tensor
//! polynomials stack four blocks row-major [T11; T12; T21; T22].

mod quadrature;

pub use quadrature::{
    cell_quadrature, edge_gauss, gauss_legendre, gauss_lobatto, triangle_quadrature, CellQuadrature,
};

use crate::geometry::Vec2;
use nalgebra::{DMatrix, DVector};

/// dim P_n = (n+1)(n+2)/2; dim P_{-1} = 0 by convention (empty space).
pub fn dim_p(n: isize) -> usize {
    if n < 0 {
        0
    } else {
        let n = n as usize;
        (n + 1) * (n + 2) / 2
    }
}

/// Exponent pair of the i-th basis monomial.
pub fn exponents(i: usize) -> (usize, usize) {
    // Degree d is the largest with d(d+1)/2 <= i.
    let mut d = 0usize;
    while (d + 1) * (d + 2) / 2 <= i {
        d += 1;
    }
    let a2 = i - d * (d + 1) / 2;
    (d - a2, a2)
}

/// Basis index of the monomial with exponents (a1, a2).
pub fn mono_index(a1: usize, a2: usize) -> usize {
    let d = a1 + a2;
    d * (d + 1) / 2 + a2
}

/// Scaled monomial basis attached to one element (center and diameter).
#[derive(Debug, Clone, Copy)]
pub struct ScaledBasis {
    pub center: Vec2,
    pub h: f64,
}

fn falling(a: usize, o: usize) -> f64 {
    if o > a {
        return 0.0;
    }
    let mut f = 1.0;
    for j in 0..o {
        f *= (a - j) as f64;
    }
    f
}

impl ScaledBasis {
    pub fn new(center: Vec2, h: f64) -> Self {
        assert!(h > 0.0, "basis scale must be positive");
        Self { center, h }
    }

    /// Local coordinates ((x - x_E)/h_E, (y - y_E)/h_E).
    pub fn local(&self, x: Vec2) -> Vec2 {
        (x - self.center) / self.h
    }

    /// Values of all monomials of degree <= n at `x`.
    pub fn eval_row(&self, x: Vec2, n: usize) -> DVector<f64> {
        self.eval_deriv_row(x, n, 0, 0)
    }

    /// Values of d^(o1+o2) m_a / dx^o1 dy^o2 for all monomials of degree <= n.
    ///
    /// The derivative of a scaled monomial is analytic to arbitrary order:
    /// d^o (t^a) = a(a-1)...(a-o+1) t^(a-o) / h^o, vanishing when o > a.
    pub fn eval_deriv_row(&self, x: Vec2, n: usize, o1: usize, o2: usize) -> DVector<f64> {
        let loc = self.local(x);
        let mut pow_x = vec![1.0; n + 1];
        let mut pow_y = vec![1.0; n + 1];
        for j in 1..=n {
            pow_x[j] = pow_x[j - 1] * loc.x;
            pow_y[j] = pow_y[j - 1] * loc.y;
        }
        let scale = self.h.powi(-((o1 + o2) as i32));
        let mut row = DVector::zeros(dim_p(n as isize));
        for i in 0..row.len() {
            let (a1, a2) = exponents(i);
            if o1 > a1 || o2 > a2 {
                continue;
            }
            row[i] = falling(a1, o1) * falling(a2, o2) * pow_x[a1 - o1] * pow_y[a2 - o2] * scale;
        }
        row
    }

    /// Value of a scalar polynomial (coefficients over degree <= n) at `x`.
    pub fn eval_poly(&self, coeffs: &DVector<f64>, n: usize, x: Vec2) -> f64 {
        self.eval_row(x, n).dot(coeffs)
    }

    /// Coefficient-space d/dx and d/dy: maps coefficients over P_n to
    /// coefficients over P_{n-1}.
    pub fn diff_matrices(&self, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let rows = dim_p(n as isize - 1);
        let cols = dim_p(n as isize);
        let mut dx = DMatrix::zeros(rows, cols);
        let mut dy = DMatrix::zeros(rows, cols);
        for j in 0..cols {
            let (a1, a2) = exponents(j);
            if a1 > 0 {
                dx[(mono_index(a1 - 1, a2), j)] = a1 as f64 / self.h;
            }
            if a2 > 0 {
                dy[(mono_index(a1, a2 - 1), j)] = a2 as f64 / self.h;
            }
        }
        (dx, dy)
    }

    /// The rotated scaled position field m_perp = ((y-y_E)/h, -(x-x_E)/h) as a
    /// vector polynomial of degree <= n_out (requires n_out >= 1).
    pub fn mperp(&self, n_out: usize) -> DVector<f64> {
        self.mperp_times_monomial(0, n_out)
    }

    /// Vector polynomial m_perp * m_a with coefficients over degree <= n_out.
    /// The product of same-center scaled monomials is again a scaled monomial,
    /// so the coefficients are exact: component 1 is m_{a+(0,1)}, component 2
    /// is -m_{a+(1,0)}.
    pub fn mperp_times_monomial(&self, a: usize, n_out: usize) -> DVector<f64> {
        let (a1, a2) = exponents(a);
        assert!(a1 + a2 + 1 <= n_out, "target degree too small");
        let nk = dim_p(n_out as isize);
        let mut v = DVector::zeros(2 * nk);
        v[mono_index(a1, a2 + 1)] = 1.0;
        v[nk + mono_index(a1 + 1, a2)] = -1.0;
        v
    }
}

/// Gradient of a scalar polynomial: coefficients over P_n -> two coefficient
/// blocks over P_{n-1}.
pub fn poly_grad(
    basis: &ScaledBasis,
    coeffs: &DVector<f64>,
    n: usize,
) -> (DVector<f64>, DVector<f64>) {
    let (dx, dy) = basis.diff_matrices(n);
    (&dx * coeffs, &dy * coeffs)
}

/// Divergence of a vector polynomial (stacked [u1; u2] over P_n) as
/// coefficients over P_{n-1}.
pub fn poly_div(basis: &ScaledBasis, coeffs: &DVector<f64>, n: usize) -> DVector<f64> {
    let nk = dim_p(n as isize);
    assert_eq!(coeffs.len(), 2 * nk);
    let (dx, dy) = basis.diff_matrices(n);
    &dx * coeffs.rows(0, nk) + &dy * coeffs.rows(nk, nk)
}

/// Monomial mass matrix H_ij = int_E m_i m_j for degrees <= n, by quadrature
/// (exact: the rule integrates degree 2n).
pub fn mass_matrix(basis: &ScaledBasis, quad: &CellQuadrature, n: usize) -> DMatrix<f64> {
    let dim = dim_p(n as isize);
    let mut h = DMatrix::zeros(dim, dim);
    for (x, w) in quad.points.iter().zip(&quad.weights) {
        let row = basis.eval_row(*x, n);
        h.ger(*w, &row, &row, 1.0);
    }
    h
}

/// Spanning-set coefficient matrix for the decomposition
///   [P_n]^2 = grad P_{n+1}  (+)  m_perp P_{n-1}.
/// Columns are, in order, grad m_g for 1 <= |g| <= n+1 followed by
/// m_perp m_a for |a| <= n-1, all expressed over the vector monomial basis of
/// degree <= n. The matrix is square (2 dim P_n) and invertible.
pub fn decomposition_matrix(basis: &ScaledBasis, n: usize) -> DMatrix<f64> {
    let nk = dim_p(n as isize);
    let n_grad = dim_p(n as isize + 1) - 1;
    let n_perp = dim_p(n as isize - 1);
    assert_eq!(n_grad + n_perp, 2 * nk, "decomposition dimension mismatch");
    let mut t = DMatrix::zeros(2 * nk, 2 * nk);
    let (dx, dy) = basis.diff_matrices(n + 1);
    for g in 1..=dim_p(n as isize + 1) - 1 {
        // grad m_g: column g-1.
        for i in 0..nk {
            t[(i, g - 1)] = dx[(i, g)];
            t[(nk + i, g - 1)] = dy[(i, g)];
        }
    }
    for a in 0..n_perp {
        let col = n_grad + a;
        let v = basis.mperp_times_monomial(a, n);
        t.column_mut(col).copy_from(&v);
    }
    t
}
