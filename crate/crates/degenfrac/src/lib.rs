//! Solver suite for initial-boundary value problems of the form
//!
//! ```text
//!   D^alpha_x u + x^beta * L_y u = 0,        (x, y) in (0, x_max) x (0, 1),
//!   L_y u = (-1)^s d^2s/dy^2s [u]/K(y) + sum_j (-1)^j d^j/dy^j [ p_j(y) d^j u/dy^j ] / K(y),
//!   u(0, y) = phi(y),   u and its first s-1 normal derivatives vanish at y = 0, 1,
//! ```
//!
//! where `D^alpha_x` is the Caputo fractional derivative of order `alpha` in
//! `(0, 1)`, the coefficient `K` may degenerate (vanish) at `y = 0`, and
//! `beta > -alpha` allows a second degeneracy line along `x = 0`.
//!
//! The solution is built by separation of variables: a self-adjoint
//! discretization of the spatial operator yields eigenpairs
//! `(lambda_n, Y_n)`, the initial profile is expanded over the eigenbasis,
//! and each modal amplitude solves a scalar fractional relaxation equation
//! whose exact solution is a Kilbas-Saigo function
//! `E_{alpha,m,l}(-lambda_n x^{alpha+beta})`.
//!
//! Module map:
//! - [`expr`]: arithmetic expression parser/evaluator for coefficient input
//! - [`specfn`]: log-gamma, gamma ratios, Kilbas-Saigo and Mittag-Leffler series
//! - [`grid`]: uniform interior grids in `y`, graded meshes in `x`
//! - [`linalg`]: symmetric banded factorizations and eigensolvers
//! - [`spectral`]: discrete spatial operator, eigenpairs, Green kernel routes
//! - [`fode`]: L1 scheme for Caputo relaxation, modal trajectories
//! - [`solver`]: Fourier coefficients, truncation control, field assembly, residuals
//! - [`config`]: run configuration (JSON)
//! - [`driver`]: end-to-end commands behind the CLI
//! - [`io`]: deterministic CSV/JSON artifact writers

pub mod config;
pub mod driver;
pub mod expr;
pub mod fode;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod solver;
pub mod specfn;
pub mod spectral;
mod util;
