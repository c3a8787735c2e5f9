//! Per-element virtual element operators.
//!
//! The local velocity space on a polygon E is the enhanced divergence-free
//! VEM space of order k >= 2. A discrete function v is known only through its
//! degrees of freedom:
//!   - values at the polygon vertices (2 components each),
//!   - values at the k-1 internal Gauss-Lobatto nodes of every edge,
//!   - scaled moments (1/|E|) int_E v . (m_perp m_a) for |a| <= k-3,
//!   - scaled divergence moments (h_E/|E|) int_E div(v) m_a for 0 < |a| <= k-1,
//! where m_perp = ((y-y_E)/h_E, -(x-x_E)/h_E) and m_a are scaled monomials.
//!
//! From these one computes exactly: the coefficient polynomial of div v, the
//! H1-seminorm projection Pi_nabla onto [P_k]^2, the L2 projection Pi0 onto
//! [P_k]^2 (using the enhancement property that equates the missing m_perp
//! moments of degree k-2, k-1 with those of Pi_nabla v), and the L2
//! projections of the full gradient onto tensor polynomials of degree k-1
//! and k. Everything reduces to boundary traces (polynomial Lagrange data on
//! edges), the divergence polynomial, and the moment degrees of freedom.

use crate::error::{Result, VemError};
use crate::geometry::Vec2;
use crate::mesh::ElementGeometry;
use crate::polyquad::{
    cell_quadrature, decomposition_matrix, dim_p, exponents, gauss_legendre, gauss_lobatto,
    mass_matrix, mono_index, CellQuadrature, ScaledBasis,
};
use nalgebra::{DMatrix, DVector};

/// Local degree-of-freedom layout for one element with `n_verts` vertices.
/// Order: vertex values (2 per vertex), edge-node values (2 per node, k-1
/// nodes per edge, edges in loop order), m_perp moments, divergence moments.
#[derive(Debug, Clone, Copy)]
pub struct DofLayout {
    pub k: usize,
    pub n_verts: usize,
}

impl DofLayout {
    pub fn new(k: usize, n_verts: usize) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(VemError::UnsupportedOrder(k));
        }
        Ok(Self { k, n_verts })
    }

    pub fn n_vertex_dofs(&self) -> usize {
        2 * self.n_verts
    }

    pub fn n_edge_dofs(&self) -> usize {
        2 * self.n_verts * (self.k - 1)
    }

    pub fn n_xperp(&self) -> usize {
        dim_p(self.k as isize - 3)
    }

    pub fn n_div(&self) -> usize {
        dim_p(self.k as isize - 1) - 1
    }

    pub fn total(&self) -> usize {
        self.n_vertex_dofs() + self.n_edge_dofs() + self.n_xperp() + self.n_div()
    }

    /// Dof index of velocity component `c` at vertex `i` of the loop.
    pub fn vertex_dof(&self, i: usize, c: usize) -> usize {
        2 * i + c
    }

    /// Dof index of component `c` at internal node `t` (0-based, ordered
    /// along the loop direction) of local edge `j`.
    pub fn edge_dof(&self, j: usize, t: usize, c: usize) -> usize {
        self.n_vertex_dofs() + 2 * ((self.k - 1) * j + t) + c
    }

    /// Dof index of the m_perp moment against monomial `a` (|a| <= k-3).
    pub fn xperp_dof(&self, a: usize) -> usize {
        self.n_vertex_dofs() + self.n_edge_dofs() + a
    }

    /// Dof index of the divergence moment against monomial `a` (1-based
    /// monomial index, the constant moment is fixed by the boundary).
    pub fn div_dof(&self, a: usize) -> usize {
        debug_assert!(a >= 1);
        self.n_vertex_dofs() + self.n_edge_dofs() + self.n_xperp() + (a - 1)
    }
}

/// Boundary trace machinery for one local edge: Gauss points, weights, the
/// outward normal, and the Lagrange evaluation table from the k+1 edge nodes
/// (two endpoints plus k-1 internal Lobatto nodes).
#[derive(Debug, Clone)]
pub struct EdgeTrace {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub normal: Vec2,
    /// lagrange[(q, i)] = L_i(s_q); node i=0 is the start vertex, i=k the end
    /// vertex, 1..k are the internal nodes in loop order.
    pub lagrange: DMatrix<f64>,
    /// Component-0 dof index of each of the k+1 nodes (component 1 is +1).
    pub node_dofs: Vec<usize>,
}

/// Internal Lobatto node parameters in (0, 1) for order k edges.
pub fn edge_node_params(k: usize) -> Vec<f64> {
    let (nodes, _) = gauss_lobatto(k + 1);
    nodes[1..k].iter().map(|x| 0.5 * (x + 1.0)).collect()
}

/// Physical positions of the k-1 internal nodes of edge (a, b).
pub fn edge_node_points(a: Vec2, b: Vec2, k: usize) -> Vec<Vec2> {
    edge_node_params(k).iter().map(|&s| a + (b - a) * s).collect()
}

fn lagrange_weights(nodes: &[f64], s: f64) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let mut l = 1.0;
            for j in 0..n {
                if j != i {
                    l *= (s - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            l
        })
        .collect()
}

/// Build the trace tables for all edges of the element, with an `n_q`-point
/// Gauss rule per edge.
pub fn edge_traces(geo: &ElementGeometry, layout: &DofLayout, n_q: usize) -> Vec<EdgeTrace> {
    let k = layout.k;
    let nv = layout.n_verts;
    let mut node_s = Vec::with_capacity(k + 1);
    node_s.push(0.0);
    node_s.extend(edge_node_params(k));
    node_s.push(1.0);
    let (gx, gw) = gauss_legendre(n_q);
    let mut out = Vec::with_capacity(nv);
    for j in 0..nv {
        let a = geo.verts[j];
        let b = geo.verts[(j + 1) % nv];
        let len = geo.edge_lengths[j];
        let mut points = Vec::with_capacity(n_q);
        let mut weights = Vec::with_capacity(n_q);
        let mut lagrange = DMatrix::zeros(n_q, k + 1);
        for (q, (&t, &w)) in gx.iter().zip(&gw).enumerate() {
            let s = 0.5 * (t + 1.0);
            points.push(a + (b - a) * s);
            weights.push(0.5 * len * w);
            for (i, l) in lagrange_weights(&node_s, s).into_iter().enumerate() {
                lagrange[(q, i)] = l;
            }
        }
        let mut node_dofs = Vec::with_capacity(k + 1);
        node_dofs.push(layout.vertex_dof(j, 0));
        for t in 0..(k - 1) {
            node_dofs.push(layout.edge_dof(j, t, 0));
        }
        node_dofs.push(layout.vertex_dof((j + 1) % nv, 0));
        out.push(EdgeTrace {
            points,
            weights,
            normal: geo.normals[j],
            lagrange,
            node_dofs,
        });
    }
    out
}

/// All computable projection operators of one element.
///
/// Matrix conventions: scalar polynomial coefficient blocks are ordered
/// degree-major; vector polynomials stack [comp1; comp2]; tensor polynomials
/// stack [T11; T12; T21; T22]. Operator rows map the N local dofs to such
/// coefficient stacks.
pub struct ElementOperators {
    pub k: usize,
    pub geo: ElementGeometry,
    pub basis: ScaledBasis,
    pub layout: DofLayout,
    /// Monomial mass matrix up to degree k+1.
    pub mass: DMatrix<f64>,
    /// Cell quadrature of order 2k+2 (reused by the local forms).
    pub quad: CellQuadrature,
    /// Dofs of every vector monomial basis field: N x 2 dim P_k.
    pub dof_matrix: DMatrix<f64>,
    /// Exact divergence: dim P_{k-1} x N.
    pub div_coeffs: DMatrix<f64>,
    /// H1-seminorm projection onto [P_k]^2: 2 dim P_k x N.
    pub pi_nabla: DMatrix<f64>,
    /// Moments int_E v . (vector monomial) for degrees <= k: 2 dim P_k x N.
    pub moments_k: DMatrix<f64>,
    /// L2 projection onto [P_k]^2: 2 dim P_k x N.
    pub pi0: DMatrix<f64>,
    /// L2 projection of the gradient onto degree k-1 tensors: 4 dim P_{k-1} x N.
    pub pi0_grad_km1: DMatrix<f64>,
    /// L2 projection of the gradient onto degree k tensors: 4 dim P_k x N.
    pub pi0_grad_k: DMatrix<f64>,
    /// dofi-dofi stabilization (I - D Pi0)^T (I - D Pi0): N x N.
    pub stab: DMatrix<f64>,
}

/// Cheap condition estimate of a square LU: ratio of extreme |U_ii|.
fn lu_cond_estimate(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..u.nrows().min(u.ncols()) {
        let d = u[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

impl ElementOperators {
    pub fn build(geo: ElementGeometry, k: usize) -> Result<Self> {
        let nv = geo.verts.len();
        let layout = DofLayout::new(k, nv)?;
        if geo.area <= 0.0 || !geo.area.is_finite() {
            return Err(VemError::InvalidMesh(format!(
                "element has non-positive area {}",
                geo.area
            )));
        }
        let basis = ScaledBasis::new(geo.centroid, geo.diameter);
        let n = layout.total();
        let nk = dim_p(k as isize);
        let nkm1 = dim_p(k as isize - 1);
        let area = geo.area;
        let h = geo.diameter;

        let quad = cell_quadrature(&geo.verts, 2 * k + 2);
        let mass = mass_matrix(&basis, &quad, k + 1);
        let h_k = mass.view((0, 0), (nk, nk)).clone_owned();
        let h_km1 = mass.view((0, 0), (nkm1, nkm1)).clone_owned();
        let (dx_k, dy_k) = basis.diff_matrices(k);

        let traces = edge_traces(&geo, &layout, k + 2);

        // --- Dof matrix D: dofs of each vector monomial field. ------------
        let mut dof_matrix = DMatrix::zeros(n, 2 * nk);
        for c in 0..2 {
            for b in 0..nk {
                let col = c * nk + b;
                for i in 0..nv {
                    let val = basis.eval_row(geo.verts[i], k)[b];
                    dof_matrix[(layout.vertex_dof(i, c), col)] = val;
                }
                for j in 0..nv {
                    let a = geo.verts[j];
                    let bb = geo.verts[(j + 1) % nv];
                    for (t, p) in edge_node_points(a, bb, k).into_iter().enumerate() {
                        dof_matrix[(layout.edge_dof(j, t, c), col)] = basis.eval_row(p, k)[b];
                    }
                }
                for a in 0..layout.n_xperp() {
                    let (a1, a2) = exponents(a);
                    // int e_c m_b . m_perp m_a with m_perp m_a =
                    // (m_{a+(0,1)}, -m_{a+(1,0)}).
                    let v = if c == 0 {
                        mass[(b, mono_index(a1, a2 + 1))]
                    } else {
                        -mass[(b, mono_index(a1 + 1, a2))]
                    };
                    dof_matrix[(layout.xperp_dof(a), col)] = v / area;
                }
                if layout.n_div() > 0 {
                    let dcol = if c == 0 { dx_k.column(b) } else { dy_k.column(b) };
                    for a in 1..nkm1 {
                        let mut mom = 0.0;
                        for d in 0..nkm1 {
                            mom += h_km1[(a, d)] * dcol[d];
                        }
                        dof_matrix[(layout.div_dof(a), col)] = h * mom / area;
                    }
                }
            }
        }

        // --- Exact divergence coefficients. --------------------------------
        // Moments int div(v) m_a: a = 0 from the boundary flux, a >= 1 from
        // the divergence dofs (their scaling is h/|E|).
        let mut div_moments = DMatrix::zeros(nkm1, n);
        for tr in &traces {
            for (q, &w) in tr.weights.iter().enumerate() {
                // v . n at the quadrature point, as a row over dofs.
                for (i, &d0) in tr.node_dofs.iter().enumerate() {
                    let l = tr.lagrange[(q, i)];
                    div_moments[(0, d0)] += w * l * tr.normal.x;
                    div_moments[(0, d0 + 1)] += w * l * tr.normal.y;
                }
            }
        }
        for a in 1..nkm1 {
            div_moments[(a, layout.div_dof(a))] = area / h;
        }
        let chol_km1 = h_km1
            .clone()
            .cholesky()
            .ok_or_else(|| VemError::SingularElement {
                element: usize::MAX,
                detail: "monomial mass matrix is not SPD".into(),
            })?;
        let div_coeffs = chol_km1.solve(&div_moments);

        // --- Pi_nabla. ------------------------------------------------------
        // Stiffness of the scalar monomials, exactly in coefficient space.
        let g_scalar = dx_k.transpose() * &h_km1 * &dx_k + dy_k.transpose() * &h_km1 * &dy_k;
        let mut g = DMatrix::zeros(2 * nk, 2 * nk);
        g.view_mut((0, 0), (nk, nk)).copy_from(&g_scalar);
        g.view_mut((nk, nk), (nk, nk)).copy_from(&g_scalar);

        let mut b_mat = DMatrix::zeros(2 * nk, n);
        // Boundary term: sum_e int_e (grad m_b . n) v_c.
        for tr in &traces {
            for (q, (&w, &p)) in tr.weights.iter().zip(&tr.points).enumerate() {
                let gx = basis.eval_deriv_row(p, k, 1, 0);
                let gy = basis.eval_deriv_row(p, k, 0, 1);
                for b in 0..nk {
                    let gn = gx[b] * tr.normal.x + gy[b] * tr.normal.y;
                    if gn == 0.0 {
                        continue;
                    }
                    for (i, &d0) in tr.node_dofs.iter().enumerate() {
                        let l = tr.lagrange[(q, i)];
                        b_mat[(b, d0)] += w * gn * l;
                        b_mat[(nk + b, d0 + 1)] += w * gn * l;
                    }
                }
            }
        }
        // Volume term: - int Delta(q) . v via the decomposition
        // Delta q = grad s + m_perp p with s in P_{k-1} (no constant) and
        // p in P_{k-3}; then int Delta q . v = -int s div v
        // + bnd int s (v.n) + |E| sum_a p_a xperp_dof_a(v).
        if k >= 2 {
            let nkm2 = dim_p(k as isize - 2);
            let t_dec = decomposition_matrix(&basis, k - 2);
            let t_lu = t_dec.lu();
            if lu_cond_estimate(&t_lu) > 1e12 {
                log::warn!(
                    "ill-conditioned polynomial decomposition (cond ~{:.1e})",
                    lu_cond_estimate(&t_lu)
                );
            }
            let (dx_km1, dy_km1) = basis.diff_matrices(k - 1);
            // Laplacians of all scalar monomials of degree <= k.
            let lap = &dx_km1 * dx_k.view((0, 0), (nkm1, nk))
                + &dy_km1 * dy_k.view((0, 0), (nkm1, nk));
            debug_assert_eq!(lap.nrows(), nkm2);
            let n_grad = dim_p(k as isize - 1) - 1;
            for c in 0..2 {
                for b in 0..nk {
                    let mut rhs = DVector::zeros(2 * nkm2);
                    rhs.rows_mut(c * nkm2, nkm2).copy_from(&lap.column(b));
                    let w = t_lu.solve(&rhs).ok_or_else(|| VemError::SingularElement {
                        element: usize::MAX,
                        detail: "polynomial decomposition failed".into(),
                    })?;
                    // s coefficients over P_{k-1}, constant term zero.
                    let mut s_full = DVector::zeros(nkm1);
                    for gidx in 0..n_grad {
                        s_full[gidx + 1] = w[gidx];
                    }
                    let row = c * nk + b;
                    // -(-int s div v) = +int s div v  contributes with +sign:
                    // B_row -= int Delta q . v, and int Delta q . v contains
                    // -int s div v, so B_row += int s div v.
                    let s_h = (&h_km1 * &s_full).transpose() * &div_coeffs;
                    for j in 0..n {
                        b_mat[(row, j)] += s_h[(0, j)];
                    }
                    // Boundary: -int_e s (v . n).
                    for tr in &traces {
                        for (q, (&wq, &p)) in tr.weights.iter().zip(&tr.points).enumerate() {
                            let sval = basis.eval_row(p, k - 1).dot(&s_full);
                            if sval == 0.0 {
                                continue;
                            }
                            for (i, &d0) in tr.node_dofs.iter().enumerate() {
                                let l = tr.lagrange[(q, i)];
                                b_mat[(row, d0)] -= wq * sval * l * tr.normal.x;
                                b_mat[(row, d0 + 1)] -= wq * sval * l * tr.normal.y;
                            }
                        }
                    }
                    // m_perp moments: -|E| p_a dof_a.
                    for a in 0..layout.n_xperp() {
                        b_mat[(row, layout.xperp_dof(a))] -= area * w[n_grad + a];
                    }
                }
            }
        }
        // Fix the kernel (constants) by matching the vertex average.
        for c in 0..2 {
            let row = c * nk;
            for col in 0..2 * nk {
                g[(row, col)] = 0.0;
            }
            for j in 0..n {
                b_mat[(row, j)] = 0.0;
            }
            for b in 0..nk {
                let mut avg = 0.0;
                for i in 0..nv {
                    avg += basis.eval_row(geo.verts[i], k)[b];
                }
                g[(row, c * nk + b)] = avg / nv as f64;
            }
            for i in 0..nv {
                b_mat[(row, layout.vertex_dof(i, c))] = 1.0 / nv as f64;
            }
        }
        let g_lu = g.lu();
        let cond = lu_cond_estimate(&g_lu);
        if cond > 1e12 {
            log::warn!("ill-conditioned Pi_nabla system (cond ~{cond:.1e})");
        }
        let pi_nabla = g_lu.solve(&b_mat).ok_or_else(|| VemError::SingularElement {
            element: usize::MAX,
            detail: "Pi_nabla system is singular".into(),
        })?;

        // --- Full moments of v for degrees <= k, then Pi0. ------------------
        // Moments against the spanning set grad P_{k+1} (+) m_perp P_{k-1},
        // converted to the monomial basis through the decomposition matrix.
        let t_k = decomposition_matrix(&basis, k);
        let n_grad_k = dim_p(k as isize + 1) - 1;
        let mut span_moments = DMatrix::zeros(2 * nk, n);
        // Gradient part: int v . grad m_g = -int m_g div v + bnd m_g (v.n).
        for tr in &traces {
            for (q, (&w, &p)) in tr.weights.iter().zip(&tr.points).enumerate() {
                let vals = basis.eval_row(p, k + 1);
                for gidx in 1..=n_grad_k {
                    let mg = vals[gidx];
                    if mg == 0.0 {
                        continue;
                    }
                    for (i, &d0) in tr.node_dofs.iter().enumerate() {
                        let l = tr.lagrange[(q, i)];
                        span_moments[(gidx - 1, d0)] += w * mg * l * tr.normal.x;
                        span_moments[(gidx - 1, d0 + 1)] += w * mg * l * tr.normal.y;
                    }
                }
            }
        }
        for gidx in 1..=n_grad_k {
            // -int m_g div v over the divergence coefficients.
            for j in 0..n {
                let mut acc = 0.0;
                for d in 0..nkm1 {
                    acc += mass[(gidx, d)] * div_coeffs[(d, j)];
                }
                span_moments[(gidx - 1, j)] -= acc;
            }
        }
        // m_perp part: dofs where available, Pi_nabla substitution for the
        // two highest degrees (the enhancement property of the space).
        for a in 0..nkm1 {
            let row = n_grad_k + a;
            if a < layout.n_xperp() {
                span_moments[(row, layout.xperp_dof(a))] = area;
            } else {
                let (a1, a2) = exponents(a);
                // int (Pi_nabla v) . m_perp m_a over monomial coefficients.
                let c1 = mono_index(a1, a2 + 1);
                let c2 = mono_index(a1 + 1, a2);
                for j in 0..n {
                    let mut acc = 0.0;
                    for b in 0..nk {
                        acc += mass[(b, c1)] * pi_nabla[(b, j)];
                        acc -= mass[(b, c2)] * pi_nabla[(nk + b, j)];
                    }
                    span_moments[(row, j)] = acc;
                }
            }
        }
        let moments_k = t_k
            .transpose()
            .lu()
            .solve(&span_moments)
            .ok_or_else(|| VemError::SingularElement {
                element: usize::MAX,
                detail: "moment conversion failed".into(),
            })?;
        let chol_k = h_k.clone().cholesky().ok_or_else(|| VemError::SingularElement {
            element: usize::MAX,
            detail: "mass matrix Cholesky failed".into(),
        })?;
        let mut pi0 = DMatrix::zeros(2 * nk, n);
        pi0.view_mut((0, 0), (nk, n))
            .copy_from(&chol_k.solve(&moments_k.view((0, 0), (nk, n)).clone_owned()));
        pi0.view_mut((nk, 0), (nk, n))
            .copy_from(&chol_k.solve(&moments_k.view((nk, 0), (nk, n)).clone_owned()));

        // --- Gradient projections onto tensors of degree k-1 and k. ---------
        let pi0_grad_km1 = Self::grad_projection(
            k - 1,
            k,
            &basis,
            &layout,
            &traces,
            &mass,
            &moments_k,
            area,
        )?;
        let pi0_grad_k = Self::grad_projection(
            k,
            k,
            &basis,
            &layout,
            &traces,
            &mass,
            &moments_k,
            area,
        )?;

        // --- Stabilization. --------------------------------------------------
        let m_proj = &dof_matrix * &pi0;
        let mut eye = DMatrix::identity(n, n);
        eye -= &m_proj;
        let stab = eye.transpose() * &eye;

        Ok(Self {
            k,
            geo,
            basis,
            layout,
            mass,
            quad,
            dof_matrix,
            div_coeffs,
            pi_nabla,
            moments_k,
            pi0,
            pi0_grad_km1,
            pi0_grad_k,
            stab,
        })
    }

    /// L2 projection of grad v onto tensor polynomials of degree `d` (d <= k),
    /// via integration by parts:
    ///   int grad v : P = -int v . div P + bnd v . (P n),
    /// where the volume term uses the exact moments of v up to degree k.
    #[allow(clippy::too_many_arguments)]
    fn grad_projection(
        d: usize,
        k: usize,
        basis: &ScaledBasis,
        layout: &DofLayout,
        traces: &[EdgeTrace],
        mass: &DMatrix<f64>,
        moments_k: &DMatrix<f64>,
        _area: f64,
    ) -> Result<DMatrix<f64>> {
        let nd = dim_p(d as isize);
        let nk = dim_p(k as isize);
        let n = layout.total();
        let (dx_d, dy_d) = basis.diff_matrices(d);
        let mut rhs = DMatrix::zeros(4 * nd, n);
        // Volume: tensor with single entry (r, c) = m_b has div = e_r d_c m_b.
        for r in 0..2 {
            for c in 0..2 {
                let dmat = if c == 0 { &dx_d } else { &dy_d };
                for b in 0..nd {
                    let row = (2 * r + c) * nd + b;
                    let col = dmat.column(b);
                    for j in 0..n {
                        let mut acc = 0.0;
                        for dd in 0..col.len() {
                            if col[dd] != 0.0 {
                                acc += col[dd] * moments_k[(r * nk + dd, j)];
                            }
                        }
                        rhs[(row, j)] = -acc;
                    }
                }
            }
        }
        // Boundary: v . (P n) = v_r m_b n_c.
        for tr in traces {
            for (q, (&w, &p)) in tr.weights.iter().zip(&tr.points).enumerate() {
                let vals = basis.eval_row(p, d);
                for r in 0..2 {
                    for c in 0..2 {
                        let nc = if c == 0 { tr.normal.x } else { tr.normal.y };
                        if nc == 0.0 {
                            continue;
                        }
                        for b in 0..nd {
                            let row = (2 * r + c) * nd + b;
                            let coeff = w * vals[b] * nc;
                            for (i, &d0) in tr.node_dofs.iter().enumerate() {
                                rhs[(row, d0 + r)] += coeff * tr.lagrange[(q, i)];
                            }
                        }
                    }
                }
            }
        }
        let h_d = mass.view((0, 0), (nd, nd)).clone_owned();
        let chol = h_d.cholesky().ok_or_else(|| VemError::SingularElement {
            element: usize::MAX,
            detail: "tensor mass Cholesky failed".into(),
        })?;
        let mut out = DMatrix::zeros(4 * nd, n);
        for blk in 0..4 {
            let sol = chol.solve(&rhs.view((blk * nd, 0), (nd, n)).clone_owned());
            out.view_mut((blk * nd, 0), (nd, n)).copy_from(&sol);
        }
        Ok(out)
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.total()
    }

    /// Value of the Pi0 projection of a dof vector at a point.
    pub fn pi0_value(&self, dofs: &DVector<f64>, x: Vec2) -> Vec2 {
        let nk = dim_p(self.k as isize);
        let coeffs = &self.pi0 * dofs;
        let row = self.basis.eval_row(x, self.k);
        let mut v = Vec2::zeros();
        for b in 0..nk {
            v.x += row[b] * coeffs[b];
            v.y += row[b] * coeffs[nk + b];
        }
        v
    }
}

/// Interpolate a smooth vector field into the local space: point values at
/// vertex and edge nodes, moment dofs by quadrature. `div_f` supplies the
/// divergence of `f` (exactly zero for solenoidal fields).
pub fn interpolate(
    ops: &ElementOperators,
    f: &dyn Fn(Vec2) -> Vec2,
    div_f: &dyn Fn(Vec2) -> f64,
) -> DVector<f64> {
    let layout = &ops.layout;
    let geo = &ops.geo;
    let k = ops.k;
    let nv = layout.n_verts;
    let mut dofs = DVector::zeros(layout.total());
    for i in 0..nv {
        let v = f(geo.verts[i]);
        dofs[layout.vertex_dof(i, 0)] = v.x;
        dofs[layout.vertex_dof(i, 1)] = v.y;
    }
    for j in 0..nv {
        let a = geo.verts[j];
        let b = geo.verts[(j + 1) % nv];
        for (t, p) in edge_node_points(a, b, k).into_iter().enumerate() {
            let v = f(p);
            dofs[layout.edge_dof(j, t, 0)] = v.x;
            dofs[layout.edge_dof(j, t, 1)] = v.y;
        }
    }
    let area = geo.area;
    let h = geo.diameter;
    for a in 0..layout.n_xperp() {
        let (a1, a2) = exponents(a);
        let mut acc = 0.0;
        for (x, w) in ops.quad.points.iter().zip(&ops.quad.weights) {
            let loc = ops.basis.local(*x);
            let ma = loc.x.powi(a1 as i32) * loc.y.powi(a2 as i32);
            let mperp = Vec2::new(loc.y, -loc.x);
            acc += w * f(*x).dot(&mperp) * ma;
        }
        dofs[layout.xperp_dof(a)] = acc / area;
    }
    for a in 1..dim_p(k as isize - 1) {
        let (a1, a2) = exponents(a);
        let mut acc = 0.0;
        for (x, w) in ops.quad.points.iter().zip(&ops.quad.weights) {
            let loc = ops.basis.local(*x);
            let ma = loc.x.powi(a1 as i32) * loc.y.powi(a2 as i32);
            acc += w * div_f(*x) * ma;
        }
        dofs[layout.div_dof(a)] = h * acc / area;
    }
    dofs
}
