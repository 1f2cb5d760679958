//! Numerical kernels shared by the physics modules: bracketed root finding,
//! adaptive quadrature with endpoint singularities, banded symmetric
//! factorizations, smallest generalized eigenvalues and a damped-Newton
//! two-point boundary value solver.

mod band;
mod bvp;
mod diff;
mod eigen;
mod quadrature;
mod roots;

pub use band::{solve_tridiagonal, BandLdlt, SymBand};
pub use bvp::{solve_bvp, BvpOptions, BvpReport, GridFunction, Scheme, SecondOrderOde};
pub use diff::{differentiate, second_derivative};
pub use eigen::{count_eigenvalues_below, min_eigenvalue};
pub use quadrature::{gauss_legendre, integrate, integrate_singular, simpson, Endpoint};
pub use roots::{find_root, Bracket};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("{what} did not converge after {iterations} steps (error estimate {estimate:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },
    #[error("integrand or function value is not finite at x = {at}")]
    NonFinite { at: f64 },
    #[error("damped Newton stalled after {} iterations, residual {:e}", .0.iterations, .0.final_residual())]
    NewtonDiverged(BvpReport),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
