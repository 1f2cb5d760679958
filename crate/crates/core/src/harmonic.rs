//! One-constant defect states on the sector `Ω_N = {b < r < 1, 0 < φ < 2π/N}`.
//!
//! A state is `θ = a0·φ + a1·f1 + a2·f2 + a3·f3 + a4·f4` where the canonical
//! harmonic functions `f_i` vanish on both straight edges and carry the
//! data 1, φ on the outer circle (`f1`, `f2`) or the inner circle (`f3`,
//! `f4`). Everything is evaluated in the conformal rectangle
//! `x = ln r + ln(1/b) ∈ [0, L]`, `y = φ ∈ [0, H]`, `H = 2π/N`, where
//! `|∇θ|² dA = (θ_x² + θ_y²) dx dy`.
//!
//! Each `f_i` has two series representations: a sine series in `y` whose
//! terms decay away from the data edge, and a sine series in `x` (after
//! subtracting the linear interpolant of the data) whose terms decay away
//! from the straight edges. Evaluation picks whichever needs fewer terms, so
//! only points near a corner are expensive.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::gauss_legendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarmonicError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{kind:?} needs an even N to tile the full annulus, got N = {n}")]
    InvalidTiling { kind: StateKind, n: u32 },
    #[error("series at (r, φ) = ({r}, {phi}) needs {needed} terms, budget is {budget}")]
    SlowConvergence {
        r: f64,
        phi: f64,
        needed: usize,
        budget: usize,
    },
    #[error("corner exclusion radius {eps} does not fit the quadrature corner cells")]
    QuadratureBudget { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateKind {
    U1,
    U2,
    U3,
    D,
}

impl StateKind {
    pub const ALL: [StateKind; 4] = [StateKind::U1, StateKind::U2, StateKind::U3, StateKind::D];
}

/// Whether a state lives on one sector or is repeated around the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tiling {
    Sector,
    FullAnnulus,
}

/// Harmonic field `a0·φ + Σ a_i f_i` on `Ω_N` with arbitrary coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorField {
    pub n: u32,
    pub coefficients: [f64; 5],
}

/// Corner order: `(b, 0)`, `(1, 0)`, `(1, 2π/N)`, `(b, 2π/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectStateSpec {
    pub kind: StateKind,
    pub n: u32,
    pub coefficients: [f64; 5],
    pub corner_strengths: [i8; 4],
}

impl DefectStateSpec {
    pub fn field(&self) -> SectorField {
        SectorField {
            n: self.n,
            coefficients: self.coefficients,
        }
    }
}

/// Term budget and target tail for the canonical-function series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub n_terms: usize,
    pub tail_bound: f64,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self {
            n_terms: 1_000_000,
            tail_bound: 1e-13,
        }
    }
}

impl SeriesTruncation {
    /// Smallest `n` with `exp(−(N/2)·n·|ln b|)/n < 1e-12`, the decay of the
    /// energy series `s1..s4`; the tail bound is the geometric remainder.
    pub fn for_energy_series(n: u32, b: f64) -> Self {
        let rate = 0.5 * n as f64 * -b.ln();
        let mut terms = 1usize;
        while (-rate * terms as f64).exp() / terms as f64 >= 1e-12 {
            terms += 1;
        }
        let next = (terms + 1) as f64;
        let tail_bound = (-rate * next).exp() / (next * (1.0 - (-rate).exp()));
        Self {
            n_terms: terms,
            tail_bound,
        }
    }
}

fn check_sector(n: u32, b: f64) -> Result<(), HarmonicError> {
    if n == 0 {
        return Err(HarmonicError::InvalidParameter("N must be positive".into()));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(HarmonicError::InvalidParameter(format!(
            "b = {b} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Coefficients of the four defect states.
///
/// The straight-edge data `θ(r, 2π/N) = a0·2π/N` must equal `2π/N` or
/// `2π/N ± π`, which fixes `a0 ∈ {1, 1 ± N/2}`; the circle data fix
/// `a1, a3 = ±π/2` and `a2 = a4 = 1 − a0`.
pub fn state_coefficients(
    kind: StateKind,
    n: u32,
    tiling: Tiling,
) -> Result<DefectStateSpec, HarmonicError> {
    if n == 0 {
        return Err(HarmonicError::InvalidParameter("N must be positive".into()));
    }
    if tiling == Tiling::FullAnnulus && n % 2 == 1 && matches!(kind, StateKind::U3 | StateKind::D) {
        return Err(HarmonicError::InvalidTiling { kind, n });
    }
    let half = 0.5 * n as f64;
    let q = PI / 2.0;
    let (a0, a1, a3) = match kind {
        StateKind::U1 => (1.0 + half, q, q),
        StateKind::U2 => (1.0 - half, -q, -q),
        StateKind::U3 => (1.0, -q, q),
        StateKind::D => (1.0, q, q),
    };
    let coefficients = [a0, a1, 1.0 - a0, a3, 1.0 - a0];
    Ok(DefectStateSpec {
        kind,
        n,
        coefficients,
        corner_strengths: corner_strengths(n, &coefficients),
    })
}

/// Winding of `θ` across each corner in units of `π/2`, i.e. the defect
/// strength for a quarter turn of the boundary tangent.
fn corner_strengths(n: u32, a: &[f64; 5]) -> [i8; 4] {
    let h = 2.0 * PI / n as f64;
    let c = (a[0] - 1.0) * h;
    let s = [
        2.0 * a[3] / PI,
        -2.0 * a[1] / PI,
        2.0 / PI * (a[1] - c),
        2.0 / PI * (c - a[3]),
    ];
    s.map(|v| v.round() as i8)
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    n: f64,
    len: f64,
    height: f64,
}

impl Rect {
    fn new(n: u32, b: f64) -> Self {
        Self {
            n: n as f64,
            len: -b.ln(),
            height: 2.0 * PI / n as f64,
        }
    }
}

/// Terms needed for `Σ e^{−step·k·d}` (with gradient weight) to drop below `tol`.
fn terms_needed(step: f64, d: f64, tol: f64) -> f64 {
    if d <= 0.0 {
        return f64::INFINITY;
    }
    let a = step * d;
    ((1.0 / (tol * a.min(1.0).powi(2))).ln() / a).max(0.0) + 2.0
}

/// Value and rectangle-coordinate gradient of `f_i` at `(x, y)`.
fn canonical_grad(
    i: u8,
    rect: Rect,
    x: f64,
    y: f64,
    trunc: SeriesTruncation,
) -> Result<(f64, f64, f64), usize> {
    let Rect { n, len, height } = rect;
    let odd = matches!(i, 1 | 3);
    let outer = matches!(i, 1 | 2);
    let d_data = if outer { len - x } else { x };
    let d_edge = if odd { y.min(height - y) } else { height - y };
    let step_y = if odd { n } else { 0.5 * n };
    let n_y = terms_needed(step_y, d_data, trunc.tail_bound);
    let n_x = terms_needed(PI / len, d_edge, trunc.tail_bound);
    let needed = n_y.min(n_x);
    if !(needed <= trunc.n_terms as f64) {
        return Err(if needed.is_finite() {
            needed as usize
        } else {
            usize::MAX
        });
    }
    let (mut v, mut vx, mut vy) = (0.0, 0.0, 0.0);
    if n_y <= n_x {
        for k in 1..=n_y as usize {
            let kf = k as f64;
            let (m, c) = if odd {
                ((2.0 * kf - 1.0) * n / 2.0, 4.0 / ((2.0 * kf - 1.0) * PI))
            } else {
                (
                    kf * n / 2.0,
                    4.0 * if k % 2 == 1 { 1.0 } else { -1.0 } / (n * kf),
                )
            };
            let den = 1.0 - (-2.0 * m * len).exp();
            let (e1, e2) = if outer {
                ((-m * (len - x)).exp(), (-m * (len + x)).exp())
            } else {
                ((-m * x).exp(), (-m * (2.0 * len - x)).exp())
            };
            let r = (e1 - e2) / den;
            let rx = if outer {
                m * (e1 + e2) / den
            } else {
                -m * (e1 + e2) / den
            };
            let (s, co) = (m * y).sin_cos();
            v += c * s * r;
            vx += c * s * rx;
            vy += c * m * co * r;
        }
        return Ok((v, vx, vy));
    }
    for k in 1..=n_x as usize {
        let kf = k as f64;
        let kap = kf * PI / len;
        let c = if outer {
            2.0 * if k % 2 == 1 { 1.0 } else { -1.0 } / (kf * PI)
        } else {
            2.0 / (kf * PI)
        };
        let (sx, cx) = (kap * x).sin_cos();
        let (yv, yd) = if odd {
            let den = 1.0 + (-kap * height).exp();
            let (a, bb) = ((-kap * (height - y)).exp(), (-kap * y).exp());
            ((a + bb) / den, kap * (a - bb) / den)
        } else {
            let den = 1.0 - (-2.0 * kap * height).exp();
            let (a, bb) = ((-kap * (height - y)).exp(), (-kap * (height + y)).exp());
            (height * (a - bb) / den, height * kap * (a + bb) / den)
        };
        v += c * sx * yv;
        vx += c * kap * cx * yv;
        vy += c * sx * yd;
    }
    Ok(match i {
        1 => (x / len - v, 1.0 / len - vx, -vy),
        3 => ((len - x) / len - v, -1.0 / len - vx, -vy),
        2 => (y * x / len - v, y / len - vx, x / len - vy),
        _ => (y * (len - x) / len - v, -y / len - vx, (len - x) / len - vy),
    })
}

fn to_rect(rect: Rect, r: f64, phi: f64, b: f64) -> Result<(f64, f64), HarmonicError> {
    if !(r >= b && r <= 1.0 && phi >= 0.0 && phi <= rect.height) {
        return Err(HarmonicError::InvalidParameter(format!(
            "(r, φ) = ({r}, {phi}) lies outside the sector"
        )));
    }
    Ok((r.ln() + rect.len, phi))
}

/// Canonical harmonic function `f_i(r, φ)` on `Ω_N`.
pub fn canonical_f(
    i: u8,
    n: u32,
    b: f64,
    r: f64,
    phi: f64,
    trunc: SeriesTruncation,
) -> Result<f64, HarmonicError> {
    Ok(canonical_f_grad(i, n, b, r, phi, trunc)?.0)
}

/// `f_i` with its polar derivatives `(f, ∂f/∂r, ∂f/∂φ)`.
pub fn canonical_f_grad(
    i: u8,
    n: u32,
    b: f64,
    r: f64,
    phi: f64,
    trunc: SeriesTruncation,
) -> Result<(f64, f64, f64), HarmonicError> {
    check_sector(n, b)?;
    if !(1..=4).contains(&i) {
        return Err(HarmonicError::InvalidParameter(format!(
            "canonical index {i} must be 1..=4"
        )));
    }
    let rect = Rect::new(n, b);
    let (x, y) = to_rect(rect, r, phi, b)?;
    let (v, vx, vy) =
        canonical_grad(i, rect, x, y, trunc).map_err(|needed| HarmonicError::SlowConvergence {
            r,
            phi,
            needed,
            budget: trunc.n_terms,
        })?;
    Ok((v, vx / r, vy))
}

fn field_grad(
    field: &SectorField,
    rect: Rect,
    x: f64,
    y: f64,
    trunc: SeriesTruncation,
) -> Result<(f64, f64, f64), usize> {
    let a = field.coefficients;
    let (mut v, mut gx, mut gy) = (a[0] * y, 0.0, a[0]);
    for i in 1..=4u8 {
        let c = a[i as usize];
        if c != 0.0 {
            let (f, fx, fy) = canonical_grad(i, rect, x, y, trunc)?;
            v += c * f;
            gx += c * fx;
            gy += c * fy;
        }
    }
    Ok((v, gx, gy))
}

/// Director angle of a harmonic sector field at `(r, φ)`.
pub fn field_angle(field: &SectorField, b: f64, r: f64, phi: f64) -> Result<f64, HarmonicError> {
    check_sector(field.n, b)?;
    let rect = Rect::new(field.n, b);
    let (x, y) = to_rect(rect, r, phi, b)?;
    let trunc = SeriesTruncation::default();
    field_grad(field, rect, x, y, trunc)
        .map(|g| g.0)
        .map_err(|needed| HarmonicError::SlowConvergence {
            r,
            phi,
            needed,
            budget: trunc.n_terms,
        })
}

/// Director angle `θ(r, φ)` of a defect state.
pub fn director(spec: &DefectStateSpec, b: f64, r: f64, phi: f64) -> Result<f64, HarmonicError> {
    field_angle(&spec.field(), b, r, phi)
}

/// The energy series `s1..s4`; every term is negative.
pub fn series_s(i: u8, n: u32, b: f64) -> Result<f64, HarmonicError> {
    check_sector(n, b)?;
    if !(1..=4).contains(&i) {
        return Err(HarmonicError::InvalidParameter(format!(
            "series index {i} must be 1..=4"
        )));
    }
    let lb = b.ln();
    let mut sum = 0.0;
    for k in 1.. {
        let j = if i <= 2 { (2 * k - 1) as f64 } else { k as f64 };
        let x = 0.5 * n as f64 * j * lb;
        // With q = e^{2x} < 1: coth x + 1 = −2q/(1−q), csch x = −2e^x/(1−q).
        let q = (2.0 * x).exp();
        let term = if i % 2 == 1 {
            -2.0 * q / (1.0 - q)
        } else {
            -2.0 * x.exp() / (1.0 - q)
        } / j;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    Ok(8.0 * sum)
}

/// Closed-form normalized energy `Ẽ`, the finite part of `E/(Kπ)` after
/// removing `log(1/ε)`.
pub fn normalized_energy(kind: StateKind, n: u32, b: f64) -> Result<f64, HarmonicError> {
    let s = [
        series_s(1, n, b)?,
        series_s(2, n, b)?,
        series_s(3, n, b)?,
        series_s(4, n, b)?,
    ];
    let nf = n as f64;
    let log_inv_b = -b.ln();
    let rotated = (s[0] + s[3] - s[1] - s[2]) / 4.0 + 0.5 * (b / (nf * nf)).ln();
    let diagonal = log_inv_b / nf + 0.5 * (16.0 * b / (nf * nf)).ln();
    Ok(match kind {
        StateKind::U1 => rotated + (nf + 2.0).powi(2) / (4.0 * nf) * log_inv_b,
        StateKind::U2 => rotated + (nf - 2.0).powi(2) / (4.0 * nf) * log_inv_b,
        StateKind::U3 => -(s[0] + s[1]) / 4.0 + diagonal,
        StateKind::D => (s[1] - s[0]) / 4.0 + diagonal,
    })
}

/// `Kπ(log(1/ε) + Ẽ)`, dropping the `O(ε)` contributions of the core arcs.
pub fn total_energy(
    kind: StateKind,
    n: u32,
    b: f64,
    eps: f64,
    k: f64,
) -> Result<f64, HarmonicError> {
    if !(eps > 0.0 && eps < b / 4.0) {
        return Err(HarmonicError::InvalidParameter(format!(
            "core radius ε = {eps} must lie in (0, b/4)"
        )));
    }
    if !(k > 0.0) {
        return Err(HarmonicError::InvalidParameter(format!(
            "elastic constant K = {k} must be positive"
        )));
    }
    Ok(k * PI * ((1.0 / eps).ln() + normalized_energy(kind, n, b)?))
}

/// Gauss-Legendre order and panel count per direction of each quadrature cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub order: usize,
    pub panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            order: 16,
            panels: 4,
        }
    }
}

fn composite_rule(
    a: f64,
    b: f64,
    opts: QuadratureOptions,
    gl: &(Vec<f64>, Vec<f64>),
) -> Vec<(f64, f64)> {
    let h = (b - a) / opts.panels as f64;
    (0..opts.panels)
        .flat_map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            gl.0.iter()
                .zip(&gl.1)
                .map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
        .collect()
}

/// `½∫|∇θ|²` over `Ω_N` minus physical disks of radius `ε` at the four
/// corners, by direct 2D quadrature of the series gradient.
///
/// The rectangle is split into a cross-shaped region integrated by tensor
/// Gauss-Legendre and four corner squares integrated in local polar
/// coordinates `(ρ, ψ)` with `ρ = e^u`, which absorbs the `1/ρ²` growth of
/// the energy density at a defect. The physical disk `|z − z_c| < ε` maps to
/// `|exp(ρe^{iψ}) − 1| < ε/r_c` in the rectangle.
pub fn energy_quadrature_oracle(
    field: &SectorField,
    b: f64,
    eps: f64,
) -> Result<f64, HarmonicError> {
    energy_quadrature_with(field, b, eps, QuadratureOptions::default())
}

pub fn energy_quadrature_with(
    field: &SectorField,
    b: f64,
    eps: f64,
    opts: QuadratureOptions,
) -> Result<f64, HarmonicError> {
    check_sector(field.n, b)?;
    if !(eps > 0.0 && eps < b / 4.0) {
        return Err(HarmonicError::InvalidParameter(format!(
            "core radius ε = {eps} must lie in (0, b/4)"
        )));
    }
    let rect = Rect::new(field.n, b);
    let Rect { len, height, .. } = rect;
    let c = len.min(height) / 3.0;
    let gl = gauss_legendre(opts.order);
    let trunc = SeriesTruncation::default();
    let density = |x: f64, y: f64| -> Result<f64, HarmonicError> {
        let (_, gx, gy) = field_grad(field, rect, x, y, trunc).map_err(|needed| {
            HarmonicError::SlowConvergence {
                r: (x - len).exp(),
                phi: y,
                needed,
                budget: trunc.n_terms,
            }
        })?;
        Ok(0.5 * (gx * gx + gy * gy))
    };

    // Each job is one outer quadrature node with its inner rule; the sums
    // are collected in order so the result is deterministic.
    let mut jobs: Vec<Box<dyn Fn() -> Result<f64, HarmonicError> + Sync + '_>> = Vec::new();
    for (xa, xb, ya, yb) in [
        (c, len - c, 0.0, height),
        (0.0, c, c, height - c),
        (len - c, len, c, height - c),
    ] {
        let ys = composite_rule(ya, yb, opts, &gl);
        for (x, wx) in composite_rule(xa, xb, opts, &gl) {
            let ys = ys.clone();
            let density = &density;
            jobs.push(Box::new(move || {
                let mut s = 0.0;
                for &(y, wy) in &ys {
                    s += wy * density(x, y)?;
                }
                Ok(wx * s)
            }));
        }
    }
    let corners = [
        (0.0, 0.0, 1.0, 1.0, b),
        (0.0, height, 1.0, -1.0, b),
        (len, 0.0, -1.0, 1.0, 1.0),
        (len, height, -1.0, -1.0, 1.0),
    ];
    for (xc, yc, sx, sy, rc) in corners {
        for (pa, pb) in [(0.0, PI / 4.0), (PI / 4.0, PI / 2.0)] {
            for (psi, wpsi) in composite_rule(pa, pb, opts, &gl) {
                let (ux, uy) = (sx * psi.cos(), sy * psi.sin());
                let rho_max = c / psi.cos().max(psi.sin());
                let rho_min = exclusion_radius(ux, uy, eps / rc);
                if !(rho_min < 0.5 * rho_max) {
                    return Err(HarmonicError::QuadratureBudget { eps });
                }
                let us = composite_rule(rho_min.ln(), rho_max.ln(), opts, &gl);
                let density = &density;
                jobs.push(Box::new(move || {
                    let mut s = 0.0;
                    for &(u, wu) in &us {
                        let rho = u.exp();
                        s += wu * rho * rho * density(xc + rho * ux, yc + rho * uy)?;
                    }
                    Ok(wpsi * s)
                }));
            }
        }
    }
    let parts: Vec<f64> = jobs.par_iter().map(|job| job()).collect::<Result<_, _>>()?;
    Ok(parts.iter().sum())
}

/// Root `ρ` of `|exp(ρ(ux + i·uy)) − 1| = target` by Newton's method.
fn exclusion_radius(ux: f64, uy: f64, target: f64) -> f64 {
    let mut rho = target;
    for _ in 0..50 {
        let ex = (rho * ux).exp();
        let (s, c) = (rho * uy).sin_cos();
        let (zr, zi) = (ex * c - 1.0, ex * s);
        let modulus = zr.hypot(zi);
        // d|z|/dρ = Re(conj(z)·w·e^{ρw}) / |z|.
        let (er, ei) = (ex * c, ex * s);
        let (dr, di) = (ux * er - uy * ei, ux * ei + uy * er);
        let step = (modulus - target) / ((zr * dr + zi * di) / modulus);
        rho -= step;
        if step.abs() < 1e-15 * rho {
            break;
        }
    }
    rho
}

/// Smallest even `N ≤ n_max` at which the diagonal state has lower
/// normalized energy than `U2`.
pub fn crossover_n(b: f64, n_max: u32) -> Result<Option<u32>, HarmonicError> {
    if n_max < 2 {
        return Err(HarmonicError::InvalidParameter(
            "N_max must be at least 2".into(),
        ));
    }
    for n in (2..=n_max).step_by(2) {
        if normalized_energy(StateKind::D, n, b)? < normalized_energy(StateKind::U2, n, b)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_polar(f: impl Fn(f64, f64) -> f64, r: f64, phi: f64, h: f64) -> f64 {
        let c = f(r, phi);
        let frr = (f(r + h, phi) - 2.0 * c + f(r - h, phi)) / (h * h);
        let fr = (f(r + h, phi) - f(r - h, phi)) / (2.0 * h);
        let fpp = (f(r, phi + h) - 2.0 * c + f(r, phi - h)) / (h * h);
        frr + fr / r + fpp / (r * r)
    }

    #[test]
    fn canonical_functions_are_harmonic() {
        let t = SeriesTruncation {
            n_terms: 1_000_000,
            tail_bound: 1e-15,
        };
        for n in [1, 2, 4, 7] {
            let b: f64 = 0.4;
            let h = 2.0 * PI / n as f64;
            for i in 1..=4u8 {
                for &(r, phi) in &[(b.sqrt(), 0.3 * h), (0.9, 0.5 * h), (0.45, 0.8 * h)] {
                    let f = |r: f64, p: f64| canonical_f(i, n, b, r, p, t).unwrap();
                    let coarse = laplacian_polar(f, r, phi, 1e-3);
                    let fine = laplacian_polar(f, r, phi, 5e-4);
                    let ratio = coarse / fine;
                    assert!(
                        (3.5..4.5).contains(&ratio) || coarse.abs() < 1e-6,
                        "f{i} N={n}: {coarse} -> {fine}"
                    );
                    let extrapolated = (4.0 * fine - coarse) / 3.0;
                    assert!(extrapolated.abs() < 1e-6, "f{i} N={n}: {extrapolated}");
                }
            }
        }
    }

    #[test]
    fn series_choice_matches_dense_sine_sum() {
        // Reference: the y-series summed densely with sinh ratios.
        let rect = Rect::new(3, 0.3);
        for i in 1..=4u8 {
            for &(fx, fy) in &[(0.55, 0.4), (0.97, 0.5), (0.03, 0.5), (0.5, 0.02)] {
                let (x, y) = (fx * rect.len, fy * rect.height);
                let got = canonical_grad(i, rect, x, y, SeriesTruncation::default()).unwrap();
                let arg = if i <= 2 { x } else { rect.len - x };
                let mut dense = 0.0;
                for k in 1..200_000usize {
                    let kf = k as f64;
                    let (m, c) = if i % 2 == 1 {
                        (
                            (2.0 * kf - 1.0) * rect.n / 2.0,
                            4.0 / ((2.0 * kf - 1.0) * PI),
                        )
                    } else {
                        (
                            kf * rect.n / 2.0,
                            4.0 * if k % 2 == 1 { 1.0 } else { -1.0 } / (rect.n * kf),
                        )
                    };
                    let ratio = (-m * (rect.len - arg)).exp() * (1.0 - (-2.0 * m * arg).exp())
                        / (1.0 - (-2.0 * m * rect.len).exp());
                    dense += c * (m * y).sin() * ratio;
                    if m * (rect.len - arg) > 40.0 {
                        break;
                    }
                }
                assert!(
                    (got.0 - dense).abs() < 1e-9,
                    "f{i} at ({fx}, {fy}): {} vs {dense}",
                    got.0
                );
            }
        }
    }

    #[test]
    fn boundary_data_recovered() {
        let t = SeriesTruncation::default();
        let (n, b) = (4, 0.5);
        let h = 2.0 * PI / n as f64;
        let phi = 0.37 * h;
        assert!((canonical_f(1, n, b, 1.0, phi, t).unwrap() - 1.0).abs() < 1e-10);
        assert!(canonical_f(1, n, b, b, phi, t).unwrap().abs() < 1e-10);
        assert!((canonical_f(2, n, b, 1.0, phi, t).unwrap() - phi).abs() < 1e-10);
        assert!((canonical_f(3, n, b, b, phi, t).unwrap() - 1.0).abs() < 1e-10);
        assert!((canonical_f(4, n, b, b, phi, t).unwrap() - phi).abs() < 1e-10);
        for i in 1..=4u8 {
            assert_eq!(canonical_f(i, n, b, 0.7, 0.0, t).unwrap(), 0.0);
            assert!(canonical_f(i, n, b, 0.7, h, t).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn corner_evaluation_is_flagged() {
        let t = SeriesTruncation {
            n_terms: 1000,
            tail_bound: 1e-13,
        };
        let err = canonical_f(1, 4, 0.5, 1.0 - 1e-9, 1e-9, t).unwrap_err();
        assert!(matches!(err, HarmonicError::SlowConvergence { .. }));
    }

    #[test]
    fn coefficient_table() {
        let u2 = state_coefficients(StateKind::U2, 4, Tiling::FullAnnulus).unwrap();
        assert_eq!(u2.coefficients[0], -1.0);
        assert_eq!(u2.coefficients[2], 2.0);
        let u1 = state_coefficients(StateKind::U1, 2, Tiling::Sector).unwrap();
        assert_eq!(
            (u1.coefficients[0], u1.coefficients[2], u1.coefficients[4]),
            (2.0, -1.0, -1.0)
        );
        // U2 carries its +1 defects at the outer corners.
        assert_eq!(u2.corner_strengths, [-1, 1, 1, -1]);
        for kind in StateKind::ALL {
            let s = state_coefficients(kind, 6, Tiling::Sector).unwrap();
            assert!(s.corner_strengths.iter().all(|c| c.abs() == 1));
            assert_eq!(s.corner_strengths.iter().map(|&c| c as i32).sum::<i32>(), 0);
        }
        assert!(matches!(
            state_coefficients(StateKind::D, 3, Tiling::FullAnnulus),
            Err(HarmonicError::InvalidTiling { .. })
        ));
        assert!(state_coefficients(StateKind::D, 3, Tiling::Sector).is_ok());
    }

    #[test]
    fn director_matches_tangent_data() {
        let (n, b) = (4, 0.5);
        let h = 2.0 * PI / n as f64;
        for kind in StateKind::ALL {
            let spec = state_coefficients(kind, n, Tiling::Sector).unwrap();
            for &phi in &[0.2 * h, 0.5 * h, 0.9 * h] {
                for r in [b, 1.0] {
                    let off = director(&spec, b, r, phi).unwrap() - phi;
                    let m = (off / PI).rem_euclid(1.0);
                    assert!((m - 0.5).abs() < 1e-9, "{kind:?} r={r}: {off}");
                }
            }
            for &r in &[0.6, 0.8] {
                assert!(director(&spec, b, r, 0.0).unwrap().abs() < 1e-12);
                let end = director(&spec, b, r, h).unwrap() - h;
                let m = (end / PI).rem_euclid(1.0);
                assert!(!(1e-9..=1.0 - 1e-9).contains(&m), "{kind:?}: {end}");
            }
        }
    }

    #[test]
    fn energy_series_signs_and_limits() {
        for n in 1..=8 {
            for b in [0.1, 0.5, 0.9] {
                let s: Vec<f64> = (1..=4).map(|i| series_s(i, n, b).unwrap()).collect();
                assert!(s.iter().all(|v| *v < 0.0));
                assert!(s[3] <= s[1]);
            }
        }
        for i in 1..=4 {
            assert!(series_s(i, 4, 1e-12).unwrap().abs() < 1e-20);
        }
        let t = SeriesTruncation::for_energy_series(4, 0.5);
        assert!(t.tail_bound <= 1e-10);
    }

    #[test]
    fn closed_form_identities() {
        for n in 1..=10 {
            for b in [0.1, 0.3, 0.5, 0.9] {
                let e = |k| normalized_energy(k, n, b).unwrap();
                assert!((e(StateKind::U1) - e(StateKind::U2) - 2.0 * (1.0 / b).ln()).abs() < 1e-12);
                let s2 = series_s(2, n, b).unwrap();
                assert!((e(StateKind::U3) - e(StateKind::D) + s2 / 2.0).abs() < 1e-12);
            }
        }
        let best = StateKind::ALL
            .into_iter()
            .min_by(|a, b| {
                normalized_energy(*a, 4, 0.5)
                    .unwrap()
                    .total_cmp(&normalized_energy(*b, 4, 0.5).unwrap())
            })
            .unwrap();
        assert_eq!(best, StateKind::U2);
    }

    #[test]
    fn total_energy_log_core() {
        let e1 = total_energy(StateKind::U2, 4, 0.5, 2e-3, 1.0).unwrap();
        let e2 = total_energy(StateKind::U2, 4, 0.5, 1e-3, 1.0).unwrap();
        assert!((e2 - e1 - PI * 2f64.ln()).abs() < 1e-12);
        assert!(total_energy(StateKind::U2, 4, 0.5, 0.2, 1.0).is_err());
    }

    #[test]
    fn crossover_increases_with_b() {
        let nc = |b| crossover_n(b, 60).unwrap().unwrap();
        assert!(nc(0.3) <= nc(0.5) && nc(0.5) <= nc(0.7));
        assert!(nc(0.3) > 2);
    }

    #[test]
    fn oracle_defect_free_reduction() {
        let field = SectorField {
            n: 1,
            coefficients: [1.0, 0.0, 0.0, 0.0, 0.0],
        };
        for b in [0.3, 0.5] {
            let e = energy_quadrature_oracle(&field, b, 1e-3).unwrap();
            assert!((e - PI * (1.0 / b).ln()).abs() < 1e-5, "{e}");
        }
    }

    #[test]
    fn oracle_matches_closed_form_u2() {
        let (n, b, eps) = (4, 0.5, 1e-3);
        let spec = state_coefficients(StateKind::U2, n, Tiling::Sector).unwrap();
        let e = energy_quadrature_oracle(&spec.field(), b, eps).unwrap();
        let et = e / PI - (1.0 / eps).ln();
        let closed = normalized_energy(StateKind::U2, n, b).unwrap();
        assert!(
            (et - closed).abs() < 0.01 * closed.abs(),
            "{et} vs {closed}"
        );
    }
}
