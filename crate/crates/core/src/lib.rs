//! Equilibria of nematic liquid crystals on a 2D annulus `b < r < 1` and
//! its sectors.
//!
//! - [`of_strong`]: Oseen-Frank theory with tangent Dirichlet data: the
//!   defect-free state, its critical anisotropy, the pitchfork and the
//!   spiral branch.
//! - [`of_weak`]: the same stability problem under Rapini-Papoular
//!   anchoring.
//! - [`harmonic`]: one-constant boundary-defect states on sectors via
//!   series of canonical harmonic functions, and their energies.
//! - [`pde`]: finite-difference Euler-Lagrange solver for general
//!   anisotropy, with corner-energy decomposition and stability probes.
//! - [`ldg`]: Landau-de Gennes order-parameter profiles and the stability
//!   of the defect-free Q-tensor.
//! - [`numerics`]: shared kernels.

// NaN inputs must fail parameter checks, so `!(x > 0.0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

pub mod harmonic;
pub mod ldg;
pub mod numerics;
pub mod of_strong;
pub mod of_weak;
pub mod pde;
