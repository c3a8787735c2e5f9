//! Built-in benchmark problems and the measurements that go with them:
//! error norms against manufactured solutions, convergence tables, the CIP
//! on/off ablation for the boundary-layer case, a pressure-robustness probe
//! with a purely gradient load, and mass-balance bookkeeping for the channel
//! flow around obstacles.

use crate::element::edge_node_params;
use crate::error::Result;
use crate::forms::{Advection, CipDeltas, MatFn, Oseen, ScalarFn, VecFn};
use crate::geometry::Vec2;
use crate::mesh::{channel_mesh, square_grid, voronoi_lloyd, ChannelConfig, PolygonalMesh, UNIT_SQUARE};
use crate::polyquad::{cell_quadrature, dim_p, gauss_legendre};
use crate::system::{
    solve_oseen, BcKind, BoundaryConditions, Discretization, Solution,
};
use nalgebra::Matrix2;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

/// A complete problem setup: coefficients, stabilization, load, boundary
/// data, and (when manufactured) the exact solution.
pub struct Problem {
    pub name: &'static str,
    pub oseen: Oseen,
    pub deltas: CipDeltas,
    pub forcing: VecFn,
    pub bcs: BoundaryConditions,
    pub exact: Option<Exact>,
}

/// Exact fields of a manufactured solution; `velocity_grad[(i, j)]` is
/// d u_i / d x_j.
pub struct Exact {
    pub velocity: VecFn,
    pub velocity_grad: MatFn,
    pub pressure: ScalarFn,
}

/// exp with the argument clamped away from extreme underflow; the boundary
/// layer exponent reaches -1e9 where a plain exp would waste time producing
/// subnormals.
fn exp_clamped(t: f64) -> f64 {
    if t < -500.0 {
        0.0
    } else {
        t.exp()
    }
}

/// Advection (y^2, x^2): divergence-free, with constant second derivatives.
fn beta_squares() -> Advection {
    Advection::new(
        Arc::new(|x: Vec2| Vec2::new(x.y * x.y, x.x * x.x)),
        Arc::new(|x: Vec2| Matrix2::new(0.0, 2.0 * x.y, 2.0 * x.x, 0.0)),
        Arc::new(|_| {
            [
                Matrix2::new(0.0, 0.0, 0.0, 2.0),
                Matrix2::new(2.0, 0.0, 0.0, 0.0),
            ]
        }),
    )
}

/// Advection-dominated boundary layer on the unit square:
///   u = (0, x - E(x)),  E(x) = (e^{(x-1)/nu} - e^{-1/nu}) / (1 - e^{-1/nu}),
///   p = 1/2 - y,  nu = 1e-9, sigma = 1, beta = (y^2, x^2).
/// Away from x = 1 the layer terms vanish to double precision and
/// f = (0, y^2 + sigma x + 1).
pub fn boundary_layer() -> Problem {
    let nu = 1e-9;
    let sigma = 1.0;
    let layer = move |x: f64| {
        let den = 1.0 - exp_clamped(-1.0 / nu);
        (exp_clamped((x - 1.0) / nu) - exp_clamped(-1.0 / nu)) / den
    };
    let layer_d = move |x: f64| {
        let den = 1.0 - exp_clamped(-1.0 / nu);
        exp_clamped((x - 1.0) / nu) / (nu * den)
    };
    let velocity: VecFn = Arc::new(move |x: Vec2| Vec2::new(0.0, x.x - layer(x.x)));
    let forcing: VecFn = Arc::new(move |x: Vec2| {
        // f2 = E'/2 + (1 - E') y^2 + sigma (x - E) + 1, from
        // -nu div(eps(u)) = (0, nu E''/2) and E'' = E'/nu.
        let e = layer(x.x);
        let ed = layer_d(x.x);
        Vec2::new(
            0.0,
            0.5 * ed + (1.0 - ed) * x.y * x.y + sigma * (x.x - e) + 1.0,
        )
    });
    Problem {
        name: "boundary-layer",
        oseen: Oseen {
            nu,
            sigma,
            beta: beta_squares(),
        },
        deltas: CipDeltas::new(0.1, 0.01, 0.01),
        forcing,
        bcs: BoundaryConditions::dirichlet(velocity.clone()),
        exact: Some(Exact {
            velocity,
            velocity_grad: Arc::new(move |x: Vec2| {
                Matrix2::new(0.0, 0.0, 1.0 - layer_d(x.x), 0.0)
            }),
            pressure: Arc::new(|x: Vec2| 0.5 - x.y),
        }),
    }
}

/// Smooth trigonometric solution for convergence studies, nu = 1e-5:
///   u = ( -1/4 sin^2(pi x) sin(2 pi y),  1/4 sin^2(pi y) sin(2 pi x) ),
///   p = 1/4 (cos(4 pi x) - sin(4 pi y)),
///   beta = (sin 2pi x sin 2pi y, cos 2pi x cos 2pi y).
pub fn trig_convergence() -> Problem {
    trig_problem(1e-5, CipDeltas::new(0.1, 0.01, 0.01))
}

/// The trig fields with adjustable viscosity and penalties, for separating
/// regime effects (advection-dominated error bounds) from discretization
/// order in convergence diagnostics.
pub fn trig_problem(nu: f64, deltas: CipDeltas) -> Problem {
    let sigma = 1.0;
    let u1 = |x: f64, y: f64| -0.25 * (PI * x).sin().powi(2) * (2.0 * PI * y).sin();
    // u2(x, y) = -u1(y, x)
    let velocity: VecFn = Arc::new(move |p: Vec2| Vec2::new(u1(p.x, p.y), -u1(p.y, p.x)));
    let du1 = move |x: f64, y: f64| {
        // (d/dx, d/dy) of u1
        (
            -0.25 * PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
            -0.5 * PI * (PI * x).sin().powi(2) * (2.0 * PI * y).cos(),
        )
    };
    let lap_u1 = move |x: f64, y: f64| {
        -0.5 * PI * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).sin()
            + PI * PI * (PI * x).sin().powi(2) * (2.0 * PI * y).sin()
    };
    let grad: MatFn = Arc::new(move |p: Vec2| {
        let (a, b) = du1(p.x, p.y);
        let (c, d) = du1(p.y, p.x);
        // grad u2 = (-d/dx u1(y,x), -d/dy u1(y,x)) = (-d, -c) as functions
        // of (x, y).
        Matrix2::new(a, b, -d, -c)
    });
    let beta_val = |p: Vec2| {
        Vec2::new(
            (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin(),
            (2.0 * PI * p.x).cos() * (2.0 * PI * p.y).cos(),
        )
    };
    let beta = Advection::new(
        Arc::new(beta_val),
        Arc::new(|p: Vec2| {
            let (sx, cx) = (2.0 * PI * p.x).sin_cos();
            let (sy, cy) = (2.0 * PI * p.y).sin_cos();
            2.0 * PI * Matrix2::new(cx * sy, sx * cy, -sx * cy, -cx * sy)
        }),
        Arc::new(|p: Vec2| {
            let (sx, cx) = (2.0 * PI * p.x).sin_cos();
            let (sy, cy) = (2.0 * PI * p.y).sin_cos();
            let s = 4.0 * PI * PI;
            [
                s * Matrix2::new(-sx * sy, cx * cy, cx * cy, -sx * sy),
                s * Matrix2::new(-cx * cy, sx * sy, sx * sy, -cx * cy),
            ]
        }),
    );
    let pressure: ScalarFn =
        Arc::new(|p: Vec2| 0.25 * ((4.0 * PI * p.x).cos() - (4.0 * PI * p.y).sin()));
    let grad_p = |p: Vec2| {
        Vec2::new(
            -PI * (4.0 * PI * p.x).sin(),
            -PI * (4.0 * PI * p.y).cos(),
        )
    };
    let velocity_f = velocity.clone();
    let grad_f = grad.clone();
    let forcing: VecFn = Arc::new(move |p: Vec2| {
        // div eps(u) = 1/2 laplace(u) for solenoidal u.
        let lap = Vec2::new(lap_u1(p.x, p.y), -lap_u1(p.y, p.x));
        let conv = grad_f(p) * beta_val(p);
        -0.5 * nu * lap + conv + sigma * velocity_f(p) - grad_p(p)
    });
    Problem {
        name: "trig-convergence",
        oseen: Oseen { nu, sigma, beta },
        deltas,
        forcing,
        bcs: BoundaryConditions::dirichlet(velocity.clone()),
        exact: Some(Exact {
            velocity,
            velocity_grad: grad,
            pressure,
        }),
    }
}

/// Pressure-robustness probe: exact velocity is zero and the load is the
/// pure pressure gradient f = -grad p with p = 3 cos x - 3 cos y (zero mean
/// on the unit square). A divergence-free method keeps the discrete velocity
/// at the consistency-error level regardless of 1/nu.
pub fn pressure_robust() -> Problem {
    let nu = 1e-9;
    let sigma = 1.0;
    Problem {
        name: "pressure-robust",
        oseen: Oseen {
            nu,
            sigma,
            beta: beta_squares(),
        },
        deltas: CipDeltas::new(0.1, 0.01, 0.01),
        forcing: Arc::new(|x: Vec2| Vec2::new(3.0 * x.x.sin(), -3.0 * x.y.sin())),
        bcs: BoundaryConditions::dirichlet(Arc::new(|_| Vec2::zeros())),
        exact: Some(Exact {
            velocity: Arc::new(|_| Vec2::zeros()),
            velocity_grad: Arc::new(|_| Matrix2::zeros()),
            pressure: Arc::new(|x: Vec2| 3.0 * x.x.cos() - 3.0 * x.y.cos()),
        }),
    }
}

/// Channel (0,4) x (-1/2,1/2) with two polygonal obstacles: parabolic
/// inflow at the left (flux 5/3), no-slip walls and obstacle boundaries,
/// do-nothing outflow at the right; beta = (1, 0), nu = 1e-5, sigma = 0.
pub fn channel() -> Problem {
    let kind = Arc::new(|label: Option<&str>| {
        if label == Some("right") {
            BcKind::Neumann
        } else {
            BcKind::Dirichlet
        }
    });
    let value: VecFn = Arc::new(|x: Vec2| {
        if x.x.abs() < 1e-12 {
            Vec2::new(-10.0 * (x.y - 0.5) * (x.y + 0.5), 0.0)
        } else {
            Vec2::zeros()
        }
    });
    Problem {
        name: "channel",
        oseen: Oseen {
            nu: 1e-5,
            sigma: 0.0,
            beta: Advection::constant(Vec2::new(1.0, 0.0)),
        },
        deltas: CipDeltas::new(0.1, 0.01, 0.01),
        forcing: Arc::new(|_| Vec2::zeros()),
        bcs: BoundaryConditions::mixed(kind, value),
        exact: None,
    }
}

/// Problem registry for the CLI.
pub fn builtin(name: &str) -> Option<Problem> {
    match name {
        "boundary-layer" => Some(boundary_layer()),
        "trig" | "trig-convergence" => Some(trig_convergence()),
        "pressure-robust" => Some(pressure_robust()),
        "channel" => Some(channel()),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["boundary-layer", "trig", "pressure-robust", "channel"]
}

/// Approximation errors against a manufactured solution:
///   e_h1 = || grad(u - Pi_nabla u_h) ||,  e_l2 = || u - Pi0 u_h ||,
///   e_p  = || p - p_h ||, all global L2 norms, quadrature order 2k+4.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub h_max: f64,
    pub n_cells: usize,
    pub n_unknowns: usize,
    pub e_h1: f64,
    pub e_l2: f64,
    pub e_p: f64,
}

pub fn compute_errors(
    disc: &Discretization,
    sol: &Solution,
    exact: &Exact,
) -> Result<ErrorReport> {
    let k = disc.k;
    let nk = dim_p(k as isize);
    let nkm1 = dim_p(k as isize - 1);
    let mut h1: f64 = 0.0;
    let mut l2: f64 = 0.0;
    let mut ep: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    for c in 0..disc.mesh.n_cells() {
        let ops = &disc.ops[c];
        h_max = h_max.max(ops.geo.diameter);
        let dofs = sol.cell_velocity_dofs(disc, c);
        let pn = &ops.pi_nabla * &dofs;
        let p0 = &ops.pi0 * &dofs;
        let pc = sol.pressure_coeffs(disc, c);
        let quad = cell_quadrature(&ops.geo.verts, 2 * k + 4);
        for (x, w) in quad.points.iter().zip(&quad.weights) {
            let row = ops.basis.eval_row(*x, k);
            let gx = ops.basis.eval_deriv_row(*x, k, 1, 0);
            let gy = ops.basis.eval_deriv_row(*x, k, 0, 1);
            let mut uh = Vec2::zeros();
            let mut gh = Matrix2::zeros();
            for b in 0..nk {
                uh.x += row[b] * p0[b];
                uh.y += row[b] * p0[nk + b];
                gh[(0, 0)] += gx[b] * pn[b];
                gh[(0, 1)] += gy[b] * pn[b];
                gh[(1, 0)] += gx[b] * pn[nk + b];
                gh[(1, 1)] += gy[b] * pn[nk + b];
            }
            let mut ph = 0.0;
            for b in 0..nkm1 {
                ph += row[b] * pc[b];
            }
            let du = uh - (exact.velocity)(*x);
            let dg = gh - (exact.velocity_grad)(*x);
            let dp = ph - (exact.pressure)(*x);
            l2 += w * du.norm_squared();
            h1 += w * dg.norm_squared();
            ep += w * dp * dp;
        }
    }
    Ok(ErrorReport {
        h_max,
        n_cells: disc.mesh.n_cells(),
        n_unknowns: sol.n_unknowns,
        e_h1: h1.max(0.0).sqrt(),
        e_l2: l2.max(0.0).sqrt(),
        e_p: ep.max(0.0).sqrt(),
    })
}

/// Solve `problem` on one mesh and measure errors.
pub fn run_case(problem: &Problem, mesh: PolygonalMesh, k: usize) -> Result<(Discretization, Solution)> {
    let disc = Discretization::new(mesh, k)?;
    let sol = solve_oseen(
        &disc,
        &problem.oseen,
        &problem.deltas,
        &problem.bcs,
        &problem.forcing,
    )?;
    Ok((disc, sol))
}

/// One line of a convergence table; rates are slopes against the previous
/// (coarser) mesh in log h.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub errors: ErrorReport,
    pub rate_h1: Option<f64>,
    pub rate_l2: Option<f64>,
    pub rate_p: Option<f64>,
}

pub fn convergence_study(
    problem: &Problem,
    k: usize,
    meshes: Vec<PolygonalMesh>,
) -> Result<Vec<ConvergenceRow>> {
    let exact = problem
        .exact
        .as_ref()
        .expect("convergence study needs an exact solution");
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for mesh in meshes {
        let (disc, sol) = run_case(problem, mesh, k)?;
        let errors = compute_errors(&disc, &sol, exact)?;
        let rate = |prev: f64, cur: f64, hp: f64, hc: f64| (prev / cur).ln() / (hp / hc).ln();
        let rates = rows.last().map(|p| {
            (
                rate(p.errors.e_h1, errors.e_h1, p.errors.h_max, errors.h_max),
                rate(p.errors.e_l2, errors.e_l2, p.errors.h_max, errors.h_max),
                rate(p.errors.e_p, errors.e_p, p.errors.h_max, errors.h_max),
            )
        });
        rows.push(ConvergenceRow {
            errors,
            rate_h1: rates.map(|r| r.0),
            rate_l2: rates.map(|r| r.1),
            rate_p: rates.map(|r| r.2),
        });
    }
    Ok(rows)
}

/// Lloyd-relaxed Voronoi meshes of the unit square with the given cell
/// counts, deterministic in `seed`.
pub fn voronoi_sequence(cells: &[usize], seed: u64) -> Result<Vec<PolygonalMesh>> {
    cells
        .iter()
        .map(|&n| voronoi_lloyd(n, 80, seed, UNIT_SQUARE))
        .collect()
}

pub fn convergence_csv(k: usize, rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("k,cells,unknowns,h,e_h1,rate_h1,e_l2,rate_l2,e_p,rate_p\n");
    for r in rows {
        let fmt = |o: Option<f64>| o.map(|v| format!("{v:.3}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{:.6e},{:.6e},{},{:.6e},{},{:.6e},{}",
            k,
            r.errors.n_cells,
            r.errors.n_unknowns,
            r.errors.h_max,
            r.errors.e_h1,
            fmt(r.rate_h1),
            r.errors.e_l2,
            fmt(r.rate_l2),
            r.errors.e_p,
            fmt(r.rate_p),
        );
    }
    s
}

/// Boundary-layer quality metrics.
///
/// `smooth_region_error` is the rms deviation of the second velocity
/// component from its smooth limit x, over element quadrature points with
/// x <= 0.8. The cutoff keeps two cell layers between the sample region and
/// the layer at x = 1 (which is orders of magnitude thinner than any cell),
/// so the metric sees interior pollution, not the unavoidable smearing of
/// an unresolved feature into its neighbour cells.
///
/// `peak_u2` is the peak of |u_2| over the vertex values, i.e. over the
/// exported field. The exact solution stays within |u_2| <= 1, so vertex
/// overshoot means oscillation. Projected (quadrature-point) values are not
/// used: the cellwise L2 projection of the unresolved layer overshoots by
/// ~16% even for the exact solution's interpolant, which would drown the
/// signal.
#[derive(Debug, Clone, Copy)]
pub struct LayerMetrics {
    pub smooth_region_error: f64,
    pub peak_u2: f64,
}

pub fn layer_metrics(disc: &Discretization, sol: &Solution) -> LayerMetrics {
    let mut dev2 = 0.0;
    let mut wsum = 0.0;
    for c in 0..disc.mesh.n_cells() {
        let ops = &disc.ops[c];
        for (x, w) in ops.quad.points.iter().zip(&ops.quad.weights) {
            if x.x <= 0.8 {
                let d = sol.velocity_at(disc, c, *x).y - x.x;
                dev2 += w * d * d;
                wsum += w;
            }
        }
    }
    let mut peak: f64 = 0.0;
    for v in 0..disc.mesh.n_vertices() {
        peak = peak.max(sol.velocity[2 * v + 1].abs());
    }
    LayerMetrics {
        smooth_region_error: (dev2 / wsum).sqrt(),
        peak_u2: peak,
    }
}

/// Solve the boundary-layer problem with the given jump penalties (same
/// mesh and order for every entry) and report the layer metrics.
pub fn layer_ablation(
    k: usize,
    n_grid: usize,
    cases: &[CipDeltas],
) -> Result<Vec<(CipDeltas, LayerMetrics)>> {
    let mut problem = boundary_layer();
    let mut out = Vec::new();
    for &deltas in cases {
        problem.deltas = deltas;
        let (disc, sol) = run_case(&problem, square_grid(n_grid)?, k)?;
        out.push((deltas, layer_metrics(&disc, &sol)));
    }
    Ok(out)
}

/// Outward flux of the discrete velocity through all boundary edges carrying
/// `label`. Edge traces are polynomials determined by the edge-node dofs, so
/// a (k+1)-point Gauss rule is exact.
pub fn boundary_flux(disc: &Discretization, sol: &Solution, label: &str) -> f64 {
    let mesh = &disc.mesh;
    let k = disc.k;
    let mut node_s = Vec::with_capacity(k + 1);
    node_s.push(0.0);
    node_s.extend(edge_node_params(k));
    node_s.push(1.0);
    let (gx, gw) = gauss_legendre(k + 1);
    let mut flux = 0.0;
    for (eid, e) in mesh.edges.iter().enumerate() {
        if !e.is_boundary() || mesh.edge_label(eid) != Some(label) {
            continue;
        }
        let a = mesh.vertices[e.v0];
        let b = mesh.vertices[e.v1];
        let len = (b - a).norm();
        // Outward normal: the left cell traverses v0 -> v1 CCW, so outward
        // is the tangent rotated -90 degrees.
        let t = (b - a) / len;
        let n = Vec2::new(t.y, -t.x);
        // Node values: v0, internal nodes in canonical order, v1.
        let mut nodes = Vec::with_capacity(k + 1);
        nodes.push(Vec2::new(sol.velocity[2 * e.v0], sol.velocity[2 * e.v0 + 1]));
        let ebase = 2 * mesh.n_vertices() + 2 * (k - 1) * eid;
        for tnode in 0..(k - 1) {
            nodes.push(Vec2::new(
                sol.velocity[ebase + 2 * tnode],
                sol.velocity[ebase + 2 * tnode + 1],
            ));
        }
        nodes.push(Vec2::new(sol.velocity[2 * e.v1], sol.velocity[2 * e.v1 + 1]));
        for (&q, &w) in gx.iter().zip(&gw) {
            let s = 0.5 * (q + 1.0);
            let mut u = Vec2::zeros();
            for (i, &si) in node_s.iter().enumerate() {
                let mut l = 1.0;
                for (j, &sj) in node_s.iter().enumerate() {
                    if i != j {
                        l *= (s - sj) / (si - sj);
                    }
                }
                u += l * nodes[i];
            }
            flux += 0.5 * len * w * u.dot(&n);
        }
    }
    flux
}

/// Mass balance of the channel run: inflow through "left", outflow through
/// "right", and their mismatch (zero for an exactly divergence-free field
/// with impermeable walls).
#[derive(Debug, Clone, Copy)]
pub struct ChannelReport {
    pub inflow: f64,
    pub outflow: f64,
    pub imbalance: f64,
    pub divergence_l2: f64,
    pub peak_speed: f64,
}

pub fn channel_report(disc: &Discretization, sol: &Solution) -> ChannelReport {
    let inflow = -boundary_flux(disc, sol, "left");
    let outflow = boundary_flux(disc, sol, "right");
    let mut peak: f64 = 0.0;
    for c in 0..disc.mesh.n_cells() {
        let ops = &disc.ops[c];
        for x in &ops.quad.points {
            peak = peak.max(sol.velocity_at(disc, c, *x).norm());
        }
    }
    ChannelReport {
        inflow,
        outflow,
        imbalance: (inflow - outflow).abs(),
        divergence_l2: sol.divergence_l2(disc),
        peak_speed: peak,
    }
}

/// Default channel discretization from the built-in generator.
pub fn channel_case(k: usize, cfg: &ChannelConfig) -> Result<(Discretization, Solution)> {
    let problem = channel();
    run_case(&problem, channel_mesh(cfg)?, k)
}

/// Cross-check of a manufactured problem: recompute the forcing from the
/// exact solution closures with high-order finite differences of u and p,
///   f = -nu div(eps(u)) + (grad u) beta + sigma u - grad p,
/// and return the worst relative mismatch over the sample points. Fourth
/// order central differences with step `h` keep the truncation error near
/// rounding for smooth fields.
pub fn forcing_residual(problem: &Problem, samples: &[Vec2], h: f64) -> f64 {
    let exact = problem
        .exact
        .as_ref()
        .expect("forcing check needs exact fields");
    let u = &exact.velocity;
    let p = &exact.pressure;
    let beta = &problem.oseen.beta.value;
    let (nu, sigma) = (problem.oseen.nu, problem.oseen.sigma);

    let d1 = |g: &dyn Fn(f64) -> f64, t: f64| {
        (8.0 * (g(t + h) - g(t - h)) - (g(t + 2.0 * h) - g(t - 2.0 * h))) / (12.0 * h)
    };
    let d2 = |g: &dyn Fn(f64) -> f64, t: f64| {
        (-g(t + 2.0 * h) + 16.0 * g(t + h) - 30.0 * g(t) + 16.0 * g(t - h) - g(t - 2.0 * h))
            / (12.0 * h * h)
    };

    let mut worst: f64 = 0.0;
    for &x0 in samples {
        let comp = |c: usize, p: Vec2| if c == 0 { u(p).x } else { u(p).y };
        // First derivatives of both components.
        let dx = |c: usize, p: Vec2| d1(&|t| comp(c, Vec2::new(t, p.y)), p.x);
        let dy = |c: usize, p: Vec2| d1(&|t| comp(c, Vec2::new(p.x, t)), p.y);
        // Second derivatives, including the mixed one as a nested stencil.
        let dxx = |c: usize| d2(&|t| comp(c, Vec2::new(t, x0.y)), x0.x);
        let dyy = |c: usize| d2(&|t| comp(c, Vec2::new(x0.x, t)), x0.y);
        let dxy = |c: usize| d1(&|t| dy(c, Vec2::new(t, x0.y)), x0.x);

        // div eps(u) = ( u1_xx + (u1_yy + u2_xy)/2, (u2_xx + u1_xy)/2 + u2_yy )
        let div_eps = Vec2::new(
            dxx(0) + 0.5 * (dyy(0) + dxy(1)),
            0.5 * (dxx(1) + dxy(0)) + dyy(1),
        );
        let grad = Matrix2::new(dx(0, x0), dy(0, x0), dx(1, x0), dy(1, x0));
        let grad_p = Vec2::new(
            d1(&|t| p(Vec2::new(t, x0.y)), x0.x),
            d1(&|t| p(Vec2::new(x0.x, t)), x0.y),
        );
        let f_fd = -nu * div_eps + grad * beta(x0) + sigma * u(x0) - grad_p;
        let f = (problem.forcing)(x0);
        let denom = 1.0 + f.norm();
        worst = worst.max((f_fd - f).norm() / denom);
    }
    worst
}

/// Visualization payload: velocity vectors at mesh vertices (their dofs,
/// no reconstruction needed) and per-cell pressure mean, speed, and
/// divergence norm.
pub fn solution_vtk(disc: &Discretization, sol: &Solution) -> crate::mesh::VtkData {
    let mesh = &disc.mesh;
    let velocity: Vec<Vec2> = (0..mesh.n_vertices())
        .map(|v| Vec2::new(sol.velocity[2 * v], sol.velocity[2 * v + 1]))
        .collect();
    let mut p_mean = Vec::with_capacity(mesh.n_cells());
    let mut speed = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let ops = &disc.ops[c];
        let pc = sol.pressure_coeffs(disc, c);
        let mut acc = 0.0;
        for (a, &ca) in pc.iter().enumerate() {
            acc += ca * ops.mass[(a, 0)];
        }
        p_mean.push(acc / ops.geo.area);
        speed.push(sol.velocity_at(disc, c, ops.geo.centroid).norm());
    }
    crate::mesh::VtkData {
        point_vectors: vec![("velocity".into(), velocity)],
        cell_scalars: vec![
            ("pressure".into(), p_mean),
            ("speed".into(), speed),
        ],
    }
}

/// Regular sample points strictly inside the unit square, avoiding the
/// rightmost strip where the boundary-layer derivatives blow up.
pub fn smooth_region_samples(n: usize) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = 0.05 + 0.8 * (i as f64 + 0.5) / n as f64;
            let y = 0.05 + 0.9 * (j as f64 + 0.5) / n as f64;
            out.push(Vec2::new(x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_matches_exact_fields() {
        // Finite-difference reconstruction of f from (u, p) agrees with the
        // closed-form forcing for every manufactured problem.
        let samples = smooth_region_samples(7);
        for problem in [boundary_layer(), trig_convergence(), pressure_robust()] {
            let res = forcing_residual(&problem, &samples, 1e-3);
            assert!(
                res < 5e-7,
                "{}: forcing mismatch {res}",
                problem.name
            );
        }
    }

    #[test]
    fn trig_solution_is_divergence_free_and_zero_on_walls() {
        let problem = trig_convergence();
        let exact = problem.exact.as_ref().unwrap();
        let h = 1e-4;
        for &x in &smooth_region_samples(5) {
            let dxu1 = ((exact.velocity)(Vec2::new(x.x + h, x.y)).x
                - (exact.velocity)(Vec2::new(x.x - h, x.y)).x)
                / (2.0 * h);
            let dyu2 = ((exact.velocity)(Vec2::new(x.x, x.y + h)).y
                - (exact.velocity)(Vec2::new(x.x, x.y - h)).y)
                / (2.0 * h);
            assert!((dxu1 + dyu2).abs() < 1e-6);
            // closure gradient agrees with FD
            let g = (exact.velocity_grad)(x);
            assert!((g[(0, 0)] - dxu1).abs() < 1e-6);
        }
        for t in [0.0, 0.3, 0.77, 1.0] {
            for edge in [
                Vec2::new(t, 0.0),
                Vec2::new(t, 1.0),
                Vec2::new(0.0, t),
                Vec2::new(1.0, t),
            ] {
                assert!((exact.velocity)(edge).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_layer_profile_endpoints() {
        let problem = boundary_layer();
        let exact = problem.exact.as_ref().unwrap();
        // E(1) = 1 exactly, so u2(1, y) = 0; away from the layer u2 = x.
        assert!((exact.velocity)(Vec2::new(1.0, 0.3)).y.abs() < 1e-12);
        let u = (exact.velocity)(Vec2::new(0.5, 0.8));
        assert!((u.y - 0.5).abs() < 1e-12);
        // Forcing in the smooth region reduces to (0, y^2 + x + 1).
        let f = (problem.forcing)(Vec2::new(0.5, 0.8));
        assert!((f.y - (0.64 + 0.5 + 1.0)).abs() < 1e-12);
        assert_eq!(f.x, 0.0);
    }

    #[test]
    fn small_trig_errors_shrink_with_refinement() {
        // Cheap sanity run (coarse meshes, k=2): both velocity errors must
        // drop substantially under one refinement; full-rate checks live in
        // the acceptance suite.
        let problem = trig_convergence();
        let meshes = voronoi_sequence(&[16, 64], 5).unwrap();
        let rows = convergence_study(&problem, 2, meshes).unwrap();
        assert_eq!(rows.len(), 2);
        let (c, f) = (rows[0].errors, rows[1].errors);
        assert!(f.e_l2 < 0.5 * c.e_l2, "L2 {} -> {}", c.e_l2, f.e_l2);
        assert!(f.e_h1 < 0.7 * c.e_h1, "H1 {} -> {}", c.e_h1, f.e_h1);
    }

    #[test]
    fn channel_mass_balance_small_case() {
        let cfg = ChannelConfig {
            n_seeds: 160,
            lloyd_iters: 30,
            rng_seed: 1,
            ..ChannelConfig::default()
        };
        let (disc, sol) = channel_case(2, &cfg).unwrap();
        let report = channel_report(&disc, &sol);
        assert!((report.inflow - 5.0 / 3.0).abs() < 1e-9, "inflow {}", report.inflow);
        assert!(report.imbalance <= 1e-8 * report.inflow, "imbalance {}", report.imbalance);
        assert!(report.divergence_l2 < 1e-9);
        assert!(report.peak_speed.is_finite());
    }

    /// Diagnostic: how much of the boundary-layer "overshoot" is genuine
    /// numerical oscillation vs Gibbs overshoot of the cellwise projection
    /// of the unresolved layer. Prints interpolant peaks (no solve) next to
    /// solved peaks for four penalty choices, from none to the default.
    #[test]
    #[ignore = "slow diagnostic"]
    fn probe_layer_metrics() {
        use crate::element::interpolate;
        let problem = boundary_layer();
        let exact = problem.exact.as_ref().unwrap();
        let (k, n) = (3usize, 16usize);
        let mesh = square_grid(n).unwrap();
        let disc = Discretization::new(mesh, k).unwrap();
        // Interpolant peaks: quad-point Pi0 values vs vertex dof values.
        let mut quad_peak: f64 = 0.0;
        let mut vertex_peak: f64 = 0.0;
        for c in 0..disc.mesh.n_cells() {
            let ops = &disc.ops[c];
            let u = exact.velocity.clone();
            let dofs = interpolate(ops, &move |x| u(x), &|_| 0.0);
            for x in &ops.quad.points {
                quad_peak = quad_peak.max(ops.pi0_value(&dofs, *x).y.abs());
            }
            for (i, _) in disc.mesh.cells[c].iter().enumerate() {
                vertex_peak = vertex_peak.max(dofs[ops.layout.vertex_dof(i, 1)].abs());
            }
        }
        println!("interpolant peak |u2|: quad-point Pi0 {quad_peak:.4}, vertex dofs {vertex_peak:.4}");
        for d in [
            CipDeltas::ZERO,
            CipDeltas::new(0.1, 0.0, 0.0),
            CipDeltas::new(0.1, 0.01, 0.0),
            CipDeltas::new(0.1, 0.01, 0.01),
        ] {
            let mut p = boundary_layer();
            p.deltas = d;
            let (disc, sol) = run_case(&p, square_grid(n).unwrap(), k).unwrap();
            let m = layer_metrics(&disc, &sol);
            // Candidate interior metrics: max vs rms deviation, two cutoffs.
            let mut cand = [0.0f64; 4];
            let mut wsum = [0.0f64; 2];
            for c in 0..disc.mesh.n_cells() {
                let ops = &disc.ops[c];
                for (x, w) in ops.quad.points.iter().zip(&ops.quad.weights) {
                    let dev = (sol.velocity_at(&disc, c, *x).y - x.x).abs();
                    if x.x <= 0.9 {
                        cand[0] = cand[0].max(dev);
                        cand[1] += w * dev * dev;
                        wsum[0] += w;
                    }
                    if x.x <= 0.8 {
                        cand[2] = cand[2].max(dev);
                        cand[3] += w * dev * dev;
                        wsum[1] += w;
                    }
                }
            }
            cand[1] = (cand[1] / wsum[0]).sqrt();
            cand[3] = (cand[3] / wsum[1]).sqrt();
            println!(
                "deltas ({},{},{}): nodal peak {:.4} | max.9 {:.4e} rms.9 {:.4e} max.8 {:.4e} rms.8 {:.4e}",
                d.d1, d.d2, d.d3, m.peak_u2, cand[0], cand[1], cand[2], cand[3]
            );
        }
    }

    /// Diagnostic, not part of the suite: full k=3 rate tables that separate
    /// the advection-dominated regime from plain discretization order.
    /// `cargo test -p vem2d --lib probe_rate_tables -- --ignored --nocapture`
    #[test]
    #[ignore = "slow diagnostic"]
    fn probe_rate_tables() {
        for (label, nu, deltas) in [
            ("nu=1 no CIP", 1.0, CipDeltas::ZERO),
            ("nu=1e-5 no CIP", 1e-5, CipDeltas::ZERO),
            ("nu=1e-5 CIP", 1e-5, CipDeltas::new(0.1, 0.01, 0.01)),
        ] {
            let p = trig_problem(nu, deltas);
            let meshes = voronoi_sequence(&[64, 256, 1024], 1).unwrap();
            let rows = convergence_study(&p, 3, meshes).unwrap();
            println!("--- {label}\n{}", convergence_csv(3, &rows));
        }
    }
}
