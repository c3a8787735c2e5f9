//! Global assembly and direct solution of the discrete Oseen saddle system
//!
//!   [ K   B^T  0 ] [u]   [F]
//!   [ B   0    m ] [p] = [0]
//!   [ 0   m^T  0 ] [l]   [0]
//!
//! where K collects the viscous/reaction form, the skew advection and the
//! CIP jumps, B the (exact) divergence coupling, and the multiplier column m
//! enforces a zero-mean pressure. The multiplier is present exactly when all
//! boundary edges carry Dirichlet data; with a Neumann (do-nothing) portion
//! the pressure is already pinned and the multiplier is dropped.
//!
//! Dirichlet velocity dofs are eliminated: boundary vertex and edge-node
//! values are fixed from the datum and lifted into the right-hand side.

use crate::element::{edge_node_points, ElementOperators};
use crate::error::{Result, VemError};
use crate::forms::{self, CipDeltas, Oseen, VecFn};
use crate::geometry::Vec2;
use crate::mesh::PolygonalMesh;
use crate::polyquad::dim_p;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a boundary label is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Strongly imposed velocity.
    Dirichlet,
    /// Natural (do-nothing) outflow: no constraint and no boundary term.
    Neumann,
}

/// Boundary data: a kind per label and the Dirichlet datum.
#[derive(Clone)]
pub struct BoundaryConditions {
    pub kind: Arc<dyn Fn(Option<&str>) -> BcKind + Send + Sync>,
    pub value: VecFn,
}

impl BoundaryConditions {
    /// Dirichlet everywhere with datum `g`.
    pub fn dirichlet(value: VecFn) -> Self {
        Self {
            kind: Arc::new(|_| BcKind::Dirichlet),
            value,
        }
    }

    pub fn mixed(
        kind: Arc<dyn Fn(Option<&str>) -> BcKind + Send + Sync>,
        value: VecFn,
    ) -> Self {
        Self { kind, value }
    }
}

/// A mesh of order-k elements with their operators, plus the global velocity
/// dof numbering: vertex dofs first (2 per vertex), then 2(k-1) per edge in
/// the edge's canonical v0 -> v1 orientation, then per-cell moment dofs.
pub struct Discretization {
    pub mesh: PolygonalMesh,
    pub k: usize,
    pub ops: Vec<ElementOperators>,
}

impl Discretization {
    pub fn new(mesh: PolygonalMesh, k: usize) -> Result<Self> {
        let build = |c: usize| ElementOperators::build(mesh.element_geometry(c), k);
        #[cfg(feature = "parallel")]
        let ops = (0..mesh.n_cells())
            .into_par_iter()
            .map(build)
            .collect::<Result<Vec<_>>>()?;
        #[cfg(not(feature = "parallel"))]
        let ops = (0..mesh.n_cells()).map(build).collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, k, ops })
    }

    fn edge_dof_base(&self) -> usize {
        2 * self.mesh.n_vertices()
    }

    fn moment_dof_base(&self) -> usize {
        self.edge_dof_base() + 2 * (self.k - 1) * self.mesh.n_edges()
    }

    /// Moment dofs per cell (same for every cell at fixed k).
    fn moments_per_cell(&self) -> usize {
        dim_p(self.k as isize - 3) + dim_p(self.k as isize - 1) - 1
    }

    pub fn n_velocity_dofs(&self) -> usize {
        self.moment_dof_base() + self.moments_per_cell() * self.mesh.n_cells()
    }

    /// Pressure coefficients per cell: dim P_{k-1}.
    pub fn pressure_block(&self) -> usize {
        dim_p(self.k as isize - 1)
    }

    pub fn n_pressure_dofs(&self) -> usize {
        self.pressure_block() * self.mesh.n_cells()
    }

    /// Global velocity dof of each local dof of cell `c`, in the local
    /// layout order. A cell traversing an edge against its canonical
    /// orientation sees the internal nodes reversed; Gauss-Lobatto nodes are
    /// symmetric, so local node t maps to canonical node k-2-t.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let k = self.k;
        let cell = &self.mesh.cells[c];
        let layout = &self.ops[c].layout;
        let mut g = vec![0usize; layout.total()];
        for (i, &v) in cell.iter().enumerate() {
            g[layout.vertex_dof(i, 0)] = 2 * v;
            g[layout.vertex_dof(i, 1)] = 2 * v + 1;
        }
        let ebase = self.edge_dof_base();
        for (j, &(e, fwd)) in self.mesh.cell_edges[c].iter().enumerate() {
            for t in 0..(k - 1) {
                let canon = if fwd { t } else { k - 2 - t };
                let gdof = ebase + 2 * ((k - 1) * e + canon);
                g[layout.edge_dof(j, t, 0)] = gdof;
                g[layout.edge_dof(j, t, 1)] = gdof + 1;
            }
        }
        let mbase = self.moment_dof_base() + self.moments_per_cell() * c;
        for a in 0..layout.n_xperp() {
            g[layout.xperp_dof(a)] = mbase + a;
        }
        for a in 1..dim_p(k as isize - 1) {
            g[layout.div_dof(a)] = mbase + layout.n_xperp() + (a - 1);
        }
        g
    }
}

/// The assembled linear system before factorization, kept in triplet form so
/// tests can compare against independent assemblies and the solver can
/// compute true residuals.
pub struct AssembledSystem {
    pub n: usize,
    pub n_unknowns: usize,
    pub n_pressure: usize,
    pub has_multiplier: bool,
    pub triplets: Vec<Triplet<usize, usize, f64>>,
    pub rhs: Vec<f64>,
    /// Dirichlet value per velocity dof, None for unknowns.
    pub fixed: Vec<Option<f64>>,
    /// Compacted unknown index per velocity dof.
    pub unknown_of: Vec<Option<usize>>,
}

impl AssembledSystem {
    /// Dense copy of the system matrix (small systems / tests only).
    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for t in &self.triplets {
            m[(t.row, t.col)] += t.val;
        }
        m
    }
}

/// Discrete velocity-pressure solution on a `Discretization`.
pub struct Solution {
    /// All velocity dofs, Dirichlet values included.
    pub velocity: DVector<f64>,
    /// Stacked per-cell pressure coefficients (dim P_{k-1} each).
    pub pressure: DVector<f64>,
    /// Zero-mean multiplier, when the constraint was active.
    pub multiplier: Option<f64>,
    /// Relative residual of the solved linear system.
    pub residual: f64,
    pub n_unknowns: usize,
}

impl Solution {
    pub fn cell_velocity_dofs(&self, disc: &Discretization, c: usize) -> DVector<f64> {
        let dofs = disc.cell_dofs(c);
        DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| self.velocity[g]))
    }

    /// Pi0-projected velocity value inside cell `c`.
    pub fn velocity_at(&self, disc: &Discretization, c: usize, x: Vec2) -> Vec2 {
        let dofs = self.cell_velocity_dofs(disc, c);
        disc.ops[c].pi0_value(&dofs, x)
    }

    pub fn pressure_coeffs(&self, disc: &Discretization, c: usize) -> DVector<f64> {
        let np = disc.pressure_block();
        self.pressure.rows(c * np, np).clone_owned()
    }

    pub fn pressure_at(&self, disc: &Discretization, c: usize, x: Vec2) -> f64 {
        let ops = &disc.ops[c];
        let row = ops.basis.eval_row(x, disc.k - 1);
        row.dot(&self.pressure_coeffs(disc, c))
    }

    /// L2 norm of div(u_h) over the whole mesh; exactly representable since
    /// the divergence of every discrete velocity is a known polynomial.
    pub fn divergence_l2(&self, disc: &Discretization) -> f64 {
        let nd = dim_p(disc.k as isize - 1);
        let mut acc = 0.0;
        for c in 0..disc.mesh.n_cells() {
            let ops = &disc.ops[c];
            let d = &ops.div_coeffs * self.cell_velocity_dofs(disc, c);
            acc += (d.transpose() * ops.mass.view((0, 0), (nd, nd)) * &d)[(0, 0)];
        }
        acc.max(0.0).sqrt()
    }

    /// Mean of p_h over the mesh (should vanish under the multiplier).
    pub fn pressure_mean(&self, disc: &Discretization) -> f64 {
        let mut acc = 0.0;
        let mut area = 0.0;
        for c in 0..disc.mesh.n_cells() {
            let ops = &disc.ops[c];
            let coeffs = self.pressure_coeffs(disc, c);
            for (a, &ca) in coeffs.iter().enumerate() {
                acc += ca * ops.mass[(a, 0)];
            }
            area += ops.geo.area;
        }
        acc / area
    }
}

fn scatter(
    tri: &mut Vec<Triplet<usize, usize, f64>>,
    rhs: &mut [f64],
    block: &DMatrix<f64>,
    rows: &[usize],
    cols: &[usize],
    unknown_of: &[Option<usize>],
    fixed: &[Option<f64>],
) {
    for (il, &gi) in rows.iter().enumerate() {
        let Some(ui) = unknown_of[gi] else { continue };
        for (jl, &gj) in cols.iter().enumerate() {
            let v = block[(il, jl)];
            if v == 0.0 {
                continue;
            }
            match unknown_of[gj] {
                Some(uj) => tri.push(Triplet::new(ui, uj, v)),
                None => rhs[ui] -= v * fixed[gj].unwrap(),
            }
        }
    }
}

/// Assemble the full saddle system for the Oseen problem with load `f`.
pub fn assemble(
    disc: &Discretization,
    p: &Oseen,
    deltas: &CipDeltas,
    bcs: &BoundaryConditions,
    f: &VecFn,
) -> Result<AssembledSystem> {
    let mesh = &disc.mesh;
    let k = disc.k;
    let n_vel = disc.n_velocity_dofs();

    // Fix Dirichlet dofs edge by edge; shared vertices may be written twice
    // with the same value.
    let mut fixed: Vec<Option<f64>> = vec![None; n_vel];
    let mut has_neumann = false;
    for (eid, e) in mesh.edges.iter().enumerate() {
        if !e.is_boundary() {
            continue;
        }
        match (bcs.kind)(mesh.edge_label(eid)) {
            BcKind::Neumann => has_neumann = true,
            BcKind::Dirichlet => {
                let a = mesh.vertices[e.v0];
                let b = mesh.vertices[e.v1];
                for (v, x) in [(e.v0, a), (e.v1, b)] {
                    let g = (bcs.value)(x);
                    fixed[2 * v] = Some(g.x);
                    fixed[2 * v + 1] = Some(g.y);
                }
                let base = disc.edge_dof_base() + 2 * (k - 1) * eid;
                for (t, x) in edge_node_points(a, b, k).into_iter().enumerate() {
                    let g = (bcs.value)(x);
                    fixed[base + 2 * t] = Some(g.x);
                    fixed[base + 2 * t + 1] = Some(g.y);
                }
            }
        }
    }

    let mut unknown_of: Vec<Option<usize>> = vec![None; n_vel];
    let mut n_u = 0;
    for g in 0..n_vel {
        if fixed[g].is_none() {
            unknown_of[g] = Some(n_u);
            n_u += 1;
        }
    }

    let has_multiplier = !has_neumann;
    let np_cell = disc.pressure_block();
    let n_p = disc.n_pressure_dofs();
    let n = n_u + n_p + has_multiplier as usize;
    let mcol = n_u + n_p;

    let mut tri: Vec<Triplet<usize, usize, f64>> = Vec::new();
    let mut rhs = vec![0.0; n];

    for c in 0..mesh.n_cells() {
        let ops = &disc.ops[c];
        let kloc = forms::local_k(ops, p, deltas)?;
        let bloc = forms::local_b(ops);
        let floc = forms::local_rhs(ops, f);
        let gdofs = disc.cell_dofs(c);
        scatter(&mut tri, &mut rhs, &kloc, &gdofs, &gdofs, &unknown_of, &fixed);
        for (il, &gi) in gdofs.iter().enumerate() {
            if let Some(ui) = unknown_of[gi] {
                rhs[ui] += floc[il];
            }
        }
        for a in 0..np_cell {
            let prow = n_u + c * np_cell + a;
            for (jl, &gj) in gdofs.iter().enumerate() {
                let v = bloc[(a, jl)];
                if v == 0.0 {
                    continue;
                }
                match unknown_of[gj] {
                    Some(uj) => {
                        tri.push(Triplet::new(prow, uj, v));
                        tri.push(Triplet::new(uj, prow, v));
                    }
                    None => rhs[prow] -= v * fixed[gj].unwrap(),
                }
            }
            if has_multiplier {
                let v = ops.mass[(a, 0)];
                tri.push(Triplet::new(prow, mcol, v));
                tri.push(Triplet::new(mcol, prow, v));
            }
        }
    }

    if !deltas.is_zero() {
        for e in &mesh.edges {
            let (Some(cl), Some(cr)) = (e.left, e.right) else {
                continue;
            };
            let block = forms::cip_edge_block(
                &disc.ops[cl],
                &disc.ops[cr],
                mesh.vertices[e.v0],
                mesh.vertices[e.v1],
                p,
                deltas,
            );
            let mut cat = disc.cell_dofs(cl);
            cat.extend(disc.cell_dofs(cr));
            scatter(&mut tri, &mut rhs, &block, &cat, &cat, &unknown_of, &fixed);
        }
    }

    Ok(AssembledSystem {
        n,
        n_unknowns: n_u,
        n_pressure: n_p,
        has_multiplier,
        triplets: tri,
        rhs,
        fixed,
        unknown_of,
    })
}

/// Residual b - A x from the triplet representation.
fn residual(sys: &AssembledSystem, x: &[f64]) -> Vec<f64> {
    let mut r = sys.rhs.clone();
    for t in &sys.triplets {
        r[t.row] -= t.val * x[t.col];
    }
    r
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse LU solve with iterative refinement; returns the solution vector
/// and the final relative residual.
fn solve_sparse(sys: &AssembledSystem) -> Result<(Vec<f64>, f64)> {
    let n = sys.n;
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &sys.triplets)
        .map_err(|e| VemError::SolverFailure(format!("building sparse matrix: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| VemError::SolverFailure(format!("sparse LU failed: {e:?}")))?;
    let mut x = sys.rhs.clone();
    lu.solve_in_place(faer::MatMut::from_column_major_slice_mut(&mut x, n, 1));
    let bnorm = norm2(&sys.rhs).max(1e-300);
    let mut rel = f64::INFINITY;
    for _ in 0..3 {
        let mut r = residual(sys, &x);
        let new_rel = norm2(&r) / bnorm;
        if !new_rel.is_finite() {
            return Err(VemError::SolverFailure(
                "non-finite residual; system is singular or badly scaled".into(),
            ));
        }
        if new_rel >= rel * 0.5 || new_rel < 1e-15 {
            rel = new_rel.min(rel);
            break;
        }
        rel = new_rel;
        lu.solve_in_place(faer::MatMut::from_column_major_slice_mut(&mut r, n, 1));
        for i in 0..n {
            x[i] += r[i];
        }
    }
    Ok((x, rel))
}

/// Assemble and solve; reconstruct the full velocity dof vector (Dirichlet
/// values included) and the per-cell pressure coefficients.
pub fn solve_oseen(
    disc: &Discretization,
    p: &Oseen,
    deltas: &CipDeltas,
    bcs: &BoundaryConditions,
    f: &VecFn,
) -> Result<Solution> {
    let sys = assemble(disc, p, deltas, bcs, f)?;
    let (x, rel) = solve_sparse(&sys)?;
    let n_vel = disc.n_velocity_dofs();
    let mut velocity = DVector::zeros(n_vel);
    for g in 0..n_vel {
        velocity[g] = match sys.unknown_of[g] {
            Some(u) => x[u],
            None => sys.fixed[g].unwrap(),
        };
    }
    let mut pressure = DVector::zeros(sys.n_pressure);
    for i in 0..sys.n_pressure {
        pressure[i] = x[sys.n_unknowns + i];
    }
    let multiplier = sys
        .has_multiplier
        .then(|| x[sys.n_unknowns + sys.n_pressure]);
    if !velocity.iter().all(|v| v.is_finite()) {
        return Err(VemError::SolverFailure(
            "non-finite velocity in solution".into(),
        ));
    }
    Ok(Solution {
        velocity,
        pressure,
        multiplier,
        residual: rel,
        n_unknowns: sys.n_unknowns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Advection, ScalarFn};
    use crate::mesh::{square_grid, two_unit_squares, voronoi_lloyd, UNIT_SQUARE};
    use nalgebra::Matrix2;

    /// Linear divergence-free advection for exactness tests.
    fn linear_beta() -> Advection {
        Advection::new(
            Arc::new(|x: Vec2| Vec2::new(x.y, x.x)),
            Arc::new(|_| Matrix2::new(0.0, 1.0, 1.0, 0.0)),
            Arc::new(|_| [Matrix2::zeros(), Matrix2::zeros()]),
        )
    }

    /// Manufactured polynomial case with velocity of degree k-1, so that
    /// deg(u beta^T) <= k with the linear beta and every consistency error
    /// of the skew advection form vanishes identically. Returns
    /// (u, p, f) with f = -nu div(eps(u)) + (grad u) beta + sigma u - grad p
    /// and p of zero mean on the unit square.
    fn exact_case(k: usize, nu: f64, sigma: f64) -> (VecFn, ScalarFn, VecFn) {
        match k {
            // u = curl(x^2 - 3xy) = (-3x, -2x + 3y), p = x + 2y - 3/2.
            2 => (
                Arc::new(|x: Vec2| Vec2::new(-3.0 * x.x, -2.0 * x.x + 3.0 * x.y)),
                Arc::new(|x: Vec2| x.x + 2.0 * x.y - 1.5),
                Arc::new(move |x: Vec2| {
                    let u = Vec2::new(-3.0 * x.x, -2.0 * x.x + 3.0 * x.y);
                    // grad u = [[-3,0],[-2,3]], div eps(u) = (0,0).
                    let conv = Vec2::new(-3.0 * x.y, -2.0 * x.y + 3.0 * x.x);
                    conv + sigma * u - Vec2::new(1.0, 2.0)
                }),
            ),
            // u = curl(x^3 - 2x^2 y + y^3) = (-2x^2 + 3y^2, -3x^2 + 4xy),
            // p = x^2 + y^2 + xy - 11/12, div eps(u) = (1, -3).
            3 => (
                Arc::new(|x: Vec2| {
                    Vec2::new(
                        -2.0 * x.x * x.x + 3.0 * x.y * x.y,
                        -3.0 * x.x * x.x + 4.0 * x.x * x.y,
                    )
                }),
                Arc::new(|x: Vec2| x.x * x.x + x.y * x.y + x.x * x.y - 11.0 / 12.0),
                Arc::new(move |x: Vec2| {
                    let u = Vec2::new(
                        -2.0 * x.x * x.x + 3.0 * x.y * x.y,
                        -3.0 * x.x * x.x + 4.0 * x.x * x.y,
                    );
                    let conv = Vec2::new(
                        -4.0 * x.x * x.y + 6.0 * x.y * x.x,
                        (-6.0 * x.x + 4.0 * x.y) * x.y + 4.0 * x.x * x.x,
                    );
                    let grad_p = Vec2::new(2.0 * x.x + x.y, 2.0 * x.y + x.x);
                    -nu * Vec2::new(1.0, -3.0) + conv + sigma * u - grad_p
                }),
            ),
            // u = curl(x^4 + y^4 - 2x^3 y) = (4y^3 - 2x^3, -4x^3 + 6x^2 y),
            // p = x^3 - 1/4, div eps(u) = (-6x + 12y, -12x + 6y).
            4 => (
                Arc::new(|x: Vec2| {
                    Vec2::new(
                        4.0 * x.y.powi(3) - 2.0 * x.x.powi(3),
                        -4.0 * x.x.powi(3) + 6.0 * x.x * x.x * x.y,
                    )
                }),
                Arc::new(|x: Vec2| x.x.powi(3) - 0.25),
                Arc::new(move |x: Vec2| {
                    let (xx, yy) = (x.x, x.y);
                    let u = Vec2::new(
                        4.0 * yy.powi(3) - 2.0 * xx.powi(3),
                        -4.0 * xx.powi(3) + 6.0 * xx * xx * yy,
                    );
                    let div_eps = Vec2::new(-6.0 * xx + 12.0 * yy, -12.0 * xx + 6.0 * yy);
                    let conv = Vec2::new(
                        -6.0 * xx * xx * yy + 12.0 * xx * yy * yy,
                        (-12.0 * xx * xx + 12.0 * xx * yy) * yy + 6.0 * xx.powi(3),
                    );
                    let grad_p = Vec2::new(3.0 * xx * xx, 0.0);
                    -nu * div_eps + conv + sigma * u - grad_p
                }),
            ),
            _ => unreachable!(),
        }
    }

    fn exactness_on(mesh: PolygonalMesh, k: usize) {
        let nu = 0.35;
        let sigma = 1.2;
        let p = Oseen {
            nu,
            sigma,
            beta: linear_beta(),
        };
        let (u_exact, p_exact, f) = exact_case(k, nu, sigma);
        let deltas = CipDeltas::new(0.1, 0.01, 0.01);
        let disc = Discretization::new(mesh, k).unwrap();
        let bcs = BoundaryConditions::dirichlet(u_exact.clone());
        let sol = solve_oseen(&disc, &p, &deltas, &bcs, &f).unwrap();
        assert!(sol.residual < 1e-10, "residual {}", sol.residual);

        // The discrete solution must coincide with the interpolant: compare
        // Pi0 velocity values and pressure values at interior points.
        let mut worst_u = 0.0_f64;
        let mut worst_p = 0.0_f64;
        for c in 0..disc.mesh.n_cells() {
            let ops = &disc.ops[c];
            for q in &ops.quad.points {
                let uh = sol.velocity_at(&disc, c, *q);
                let ph = sol.pressure_at(&disc, c, *q);
                worst_u = worst_u.max((uh - u_exact(*q)).norm());
                worst_p = worst_p.max((ph - p_exact(*q)).abs());
            }
        }
        assert!(worst_u < 1e-9, "velocity defect {worst_u} at k={k}");
        assert!(worst_p < 1e-8, "pressure defect {worst_p} at k={k}");
        assert!(sol.divergence_l2(&disc) < 1e-10);
        assert!(sol.pressure_mean(&disc).abs() < 1e-10);
    }

    #[test]
    fn polynomial_exactness_grid() {
        // Degree k-1 velocity + linear advection keeps every consistency
        // error identically zero, so the solver must reproduce the exact
        // fields to rounding, CIP terms included.
        exactness_on(square_grid(3).unwrap(), 2);
        exactness_on(square_grid(3).unwrap(), 3);
        exactness_on(square_grid(2).unwrap(), 4);
    }

    #[test]
    fn polynomial_exactness_voronoi() {
        let mesh = voronoi_lloyd(24, 3, 7, UNIT_SQUARE).unwrap();
        exactness_on(mesh, 3);
    }

    #[test]
    fn dof_map_respects_edge_orientation() {
        // Each interior edge must be seen with opposite orientations by its
        // two cells and map to the same global dofs (reversed node order).
        let mesh = square_grid(2).unwrap();
        let disc = Discretization::new(mesh, 3).unwrap();
        let mesh = &disc.mesh;
        for e in 0..mesh.n_edges() {
            let edge = &mesh.edges[e];
            let (Some(cl), Some(cr)) = (edge.left, edge.right) else {
                continue;
            };
            let jl = mesh.cell_edges[cl].iter().position(|&(id, _)| id == e).unwrap();
            let jr = mesh.cell_edges[cr].iter().position(|&(id, _)| id == e).unwrap();
            let dl = disc.cell_dofs(cl);
            let dr = disc.cell_dofs(cr);
            let ll = &disc.ops[cl].layout;
            let lr = &disc.ops[cr].layout;
            let k = disc.k;
            for t in 0..(k - 1) {
                // Node t of the left cell is node k-2-t of the right cell.
                assert_eq!(
                    dl[ll.edge_dof(jl, t, 0)],
                    dr[lr.edge_dof(jr, k - 2 - t, 0)]
                );
            }
        }
    }

    #[test]
    fn assembly_matches_dense_scatter() {
        // Independent dense assembly on the two-square mesh: place local
        // blocks by hand and compare entry by entry.
        let mesh = two_unit_squares();
        let k = 2;
        let p = Oseen {
            nu: 0.9,
            sigma: 0.4,
            beta: linear_beta(),
        };
        let deltas = CipDeltas::new(0.1, 0.01, 0.01);
        let disc = Discretization::new(mesh, k).unwrap();
        let g0: VecFn = Arc::new(|_| Vec2::zeros());
        let bcs = BoundaryConditions::dirichlet(g0.clone());
        let f: VecFn = Arc::new(|x: Vec2| Vec2::new(x.y, -x.x));
        let sys = assemble(&disc, &p, &deltas, &bcs, &f).unwrap();
        let got = sys.dense();

        // By-hand dense assembly over all velocity dofs, then restriction.
        let n_vel = disc.n_velocity_dofs();
        let np_cell = disc.pressure_block();
        let n_p = disc.n_pressure_dofs();
        let mut kfull = DMatrix::<f64>::zeros(n_vel, n_vel);
        let mut bfull = DMatrix::<f64>::zeros(n_p, n_vel);
        let mut ffull = DVector::<f64>::zeros(n_vel);
        for c in 0..disc.mesh.n_cells() {
            let ops = &disc.ops[c];
            let kloc = forms::local_k(ops, &p, &deltas).unwrap();
            let bloc = forms::local_b(ops);
            let floc = forms::local_rhs(ops, &f);
            let gd = disc.cell_dofs(c);
            for (il, &gi) in gd.iter().enumerate() {
                ffull[gi] += floc[il];
                for (jl, &gj) in gd.iter().enumerate() {
                    kfull[(gi, gj)] += kloc[(il, jl)];
                }
                for a in 0..np_cell {
                    bfull[(c * np_cell + a, gi)] += bloc[(a, il)];
                }
            }
        }
        for e in &disc.mesh.edges {
            let (Some(cl), Some(cr)) = (e.left, e.right) else {
                continue;
            };
            let block = forms::cip_edge_block(
                &disc.ops[cl],
                &disc.ops[cr],
                disc.mesh.vertices[e.v0],
                disc.mesh.vertices[e.v1],
                &p,
                &deltas,
            );
            let mut cat = disc.cell_dofs(cl);
            cat.extend(disc.cell_dofs(cr));
            for (il, &gi) in cat.iter().enumerate() {
                for (jl, &gj) in cat.iter().enumerate() {
                    kfull[(gi, gj)] += block[(il, jl)];
                }
            }
        }
        let free: Vec<usize> = (0..n_vel).filter(|&g| sys.fixed[g].is_none()).collect();
        assert_eq!(free.len(), sys.n_unknowns);
        let n = sys.n;
        let mut want = DMatrix::<f64>::zeros(n, n);
        for (ui, &gi) in free.iter().enumerate() {
            for (uj, &gj) in free.iter().enumerate() {
                want[(ui, uj)] = kfull[(gi, gj)];
            }
            for pr in 0..n_p {
                want[(sys.n_unknowns + pr, ui)] = bfull[(pr, gi)];
                want[(ui, sys.n_unknowns + pr)] = bfull[(pr, gi)];
            }
        }
        assert!(sys.has_multiplier);
        let mcol = sys.n_unknowns + n_p;
        for c in 0..disc.mesh.n_cells() {
            for a in 0..np_cell {
                let v = disc.ops[c].mass[(a, 0)];
                want[(sys.n_unknowns + c * np_cell + a, mcol)] = v;
                want[(mcol, sys.n_unknowns + c * np_cell + a)] = v;
            }
        }
        let gap = (got - &want).norm() / want.norm();
        assert!(gap < 1e-13, "assembly mismatch {gap}");
        // Homogeneous Dirichlet data: the lift contributes nothing, rhs is
        // the load restricted to the unknowns.
        for (ui, &gi) in free.iter().enumerate() {
            assert!((sys.rhs[ui] - ffull[gi]).abs() < 1e-14);
        }
    }

    #[test]
    fn solution_invariant_under_cell_reordering() {
        // Solving on a mesh with permuted cell order gives the same fields.
        let base = voronoi_lloyd(12, 2, 11, UNIT_SQUARE).unwrap();
        let mut cells = base.cells.clone();
        cells.reverse();
        let permuted =
            crate::mesh::build_mesh(base.vertices.clone(), cells, &[]).unwrap();

        let p = Oseen {
            nu: 1e-3,
            sigma: 1.0,
            beta: linear_beta(),
        };
        let deltas = CipDeltas::new(0.1, 0.01, 0.01);
        let f: VecFn = Arc::new(|x: Vec2| Vec2::new((3.0 * x.y).sin(), x.x.cos()));
        let bcs = BoundaryConditions::dirichlet(Arc::new(|_| Vec2::zeros()));

        let d1 = Discretization::new(base, 2).unwrap();
        let s1 = solve_oseen(&d1, &p, &deltas, &bcs, &f).unwrap();
        let d2 = Discretization::new(permuted, 2).unwrap();
        let s2 = solve_oseen(&d2, &p, &deltas, &bcs, &f).unwrap();

        let probe = [
            Vec2::new(0.3, 0.4),
            Vec2::new(0.71, 0.22),
            Vec2::new(0.5, 0.86),
        ];
        for x in probe {
            let (c1, c2) = (locate(&d1, x), locate(&d2, x));
            let (u1, u2) = (s1.velocity_at(&d1, c1, x), s2.velocity_at(&d2, c2, x));
            assert!((u1 - u2).norm() < 1e-8 * (1.0 + u1.norm()));
            let (p1, p2) = (s1.pressure_at(&d1, c1, x), s2.pressure_at(&d2, c2, x));
            assert!((p1 - p2).abs() < 1e-7 * (1.0 + p1.abs()));
        }
    }

    fn locate(disc: &Discretization, x: Vec2) -> usize {
        // Point-in-cell by winding of the convex loop (Voronoi cells are
        // convex); falls back to nearest centroid.
        let mesh = &disc.mesh;
        for c in 0..mesh.n_cells() {
            let vs = mesh.cell_coords(c);
            let inside = (0..vs.len()).all(|i| {
                let a = vs[i];
                let b = vs[(i + 1) % vs.len()];
                (b - a).perp(&(x - a)) >= -1e-12
            });
            if inside {
                return c;
            }
        }
        (0..mesh.n_cells())
            .min_by(|&a, &b| {
                let da = (disc.ops[a].geo.centroid - x).norm();
                let db = (disc.ops[b].geo.centroid - x).norm();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
    }

    #[test]
    fn neumann_outflow_drops_multiplier() {
        // Left/bottom/top Dirichlet, right Neumann: no multiplier, system
        // still solvable, and the pressure no longer needs a gauge fix.
        let mesh = square_grid(3).unwrap();
        let p = Oseen {
            nu: 0.1,
            sigma: 0.5,
            beta: Advection::constant(Vec2::new(1.0, 0.0)),
        };
        let deltas = CipDeltas::new(0.1, 0.01, 0.01);
        let disc = Discretization::new(mesh, 2).unwrap();
        let kind = Arc::new(|l: Option<&str>| {
            if l == Some("right") {
                BcKind::Neumann
            } else {
                BcKind::Dirichlet
            }
        });
        let inflow: VecFn = Arc::new(|x: Vec2| Vec2::new(4.0 * x.y * (1.0 - x.y), 0.0));
        let bcs = BoundaryConditions::mixed(kind, inflow);
        let f: VecFn = Arc::new(|_| Vec2::zeros());
        let sys = assemble(&disc, &p, &deltas, &bcs, &f).unwrap();
        assert!(!sys.has_multiplier);
        let sol = solve_oseen(&disc, &p, &deltas, &bcs, &f).unwrap();
        assert!(sol.residual < 1e-9);
        assert!(sol.multiplier.is_none());
        // Flow goes to the right on average.
        let mut flux = 0.0;
        for c in 0..disc.mesh.n_cells() {
            let ops = &disc.ops[c];
            for (q, w) in ops.quad.points.iter().zip(&ops.quad.weights) {
                flux += w * sol.velocity_at(&disc, c, *q).x;
            }
        }
        assert!(flux > 0.1, "bulk flux {flux}");
    }
}
