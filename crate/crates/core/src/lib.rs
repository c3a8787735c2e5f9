//! Divergence-free virtual element method (VEM) for the steady 2D Oseen problem
//!
//!   -nu div(eps(u)) + (grad u) beta + sigma u - grad p = f,   div u = 0
//!
//! on polygonal meshes. Velocities are approximated in an enhanced virtual
//! space whose discrete divergence is an explicit piecewise polynomial, so the
//! computed velocity is exactly divergence-free and the method is
//! pressure-robust. Advection-dominated regimes are handled by a three-level
//! continuous interior penalty acting on jumps of streamline derivatives of
//! the element-wise velocity projections.
//!
//! Crate layout follows the pipeline: [`mesh`] builds and generates polygonal
//! meshes, [`polyquad`] provides scaled monomial bases and quadrature,
//! [`element`] constructs the per-element projection operators, [`forms`]
//! evaluates the local bilinear forms and penalty blocks, [`system`]
//! assembles and solves the global saddle-point system, and [`bench`] drives
//! the built-in benchmark problems (convergence studies, stabilization
//! ablations, pressure-robustness checks, channel flow).

pub mod bench;
pub mod element;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod mesh;
pub mod polyquad;
pub mod system;

pub use error::VemError;
