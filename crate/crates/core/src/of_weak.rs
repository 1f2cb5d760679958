//! Stability of the defect-free state under weak (Rapini-Papoular) tangent
//! anchoring of dimensionless strength `α = W R / K3` on both circles.
//!
//! Perturbations `η = f(r) cos(kφ)` of `θ* = φ + π/2` become unstable at the
//! smallest anisotropy `δ_{1,k}` for which the radial problem with Robin
//! conditions has a nontrivial solution; these are the roots of the
//! compatibility residuals below.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{find_root, integrate, Bracket, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeakError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tangent argument within 1e-9 of the pole π/2 + {m}π at δ = {delta}")]
    PoleProximity { delta: f64, m: i64 },
    #[error("eigenmode coefficient degenerates: α = {alpha} equals δ = {delta}")]
    DegenerateCoefficient { alpha: f64, delta: f64 },
    #[error("no critical anisotropy for α = {alpha}, b = {b}")]
    NoCriticalRoot { alpha: f64, b: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Rapini-Papoular anchoring on both circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchoringParams {
    alpha: f64,
    preferred_offset: f64,
}

impl AnchoringParams {
    /// Tangent anchoring: preferred angle `φ + π/2`.
    pub fn tangent(alpha: f64) -> Result<Self, WeakError> {
        Self::new(alpha, FRAC_PI_2)
    }

    pub fn new(alpha: f64, preferred_offset: f64) -> Result<Self, WeakError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(WeakError::InvalidParameter(format!(
                "anchoring strength α = {alpha} must be ≥ 0"
            )));
        }
        Ok(Self {
            alpha,
            preferred_offset,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Preferred director angle relative to the polar angle `φ`.
    pub fn preferred_offset(&self) -> f64 {
        self.preferred_offset
    }
}

/// Critical anisotropy of azimuthal order `k` as a function of `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCurve {
    pub k: u32,
    pub b: f64,
    /// `(α, δ_crit)` pairs sorted by `α`; values of `α` without a root are
    /// omitted.
    pub points: Vec<(f64, f64)>,
}

fn check_inputs(delta: f64, alpha: f64, b: f64) -> Result<(), WeakError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(WeakError::InvalidParameter(format!(
            "δ = {delta} must lie in (0, 1)"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(WeakError::InvalidParameter(format!(
            "α = {alpha} must be positive"
        )));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(WeakError::InvalidParameter(format!(
            "b = {b} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Left-hand side of the compatibility condition.
///
/// `k = 0`: `tan(ω ln(1/b)) + α(1+b)√(δ(1−δ)) / (αδ − αbδ + α²b − δ)` with
/// `ω = √(δ/(1−δ))`.
/// `k ≥ 1`: `tanh(μ ln(1/b)) + (1−δ)α(1+b)μ / (αδ + α²b − αbδ − δ + k²(1−δ))`
/// with `μ = √((k²−δ)/(1−δ))`.
pub fn compat_residual(delta: f64, alpha: f64, b: f64, k: u32) -> Result<f64, WeakError> {
    check_inputs(delta, alpha, b)?;
    let len = -b.ln();
    if k == 0 {
        let omega = (delta / (1.0 - delta)).sqrt();
        let arg = omega * len;
        let m = ((arg - FRAC_PI_2) / PI).round();
        if (arg - (FRAC_PI_2 + m * PI)).abs() < 1e-9 {
            return Err(WeakError::PoleProximity { delta, m: m as i64 });
        }
        let den = alpha * delta - alpha * b * delta + alpha * alpha * b - delta;
        Ok(arg.tan() + alpha * (1.0 + b) * (delta * (1.0 - delta)).sqrt() / den)
    } else {
        let k2 = (k as f64).powi(2);
        let mu = ((k2 - delta) / (1.0 - delta)).sqrt();
        let den =
            alpha * delta + alpha * alpha * b - alpha * b * delta - delta + k2 * (1.0 - delta);
        Ok((mu * len).tanh() + (1.0 - delta) * alpha * (1.0 + b) * mu / den)
    }
}

/// Pole of the rational term in `δ`, where its denominator vanishes.
fn rational_pole(alpha: f64, b: f64, k: u32) -> f64 {
    let k2 = (k as f64).powi(2);
    (alpha * alpha * b + k2) / (1.0 + k2 + alpha * b - alpha)
}

/// Closed-form `δ_{1,1}`, defined whenever the denominator is nonzero.
pub fn delta_weak_k1_closed_form(alpha: f64, b: f64) -> f64 {
    0.5 * (alpha * b * b + alpha * alpha * b + alpha + 1.0 - b * b * alpha * alpha - b)
        / (alpha * b - b + 1.0)
}

/// Scans the continuous cell `(lo, hi)` of `δ` for the first sign change of
/// the residual, sampling uniformly in `ω = √(δ/(1−δ))`.
fn first_root_in_cell(alpha: f64, b: f64, k: u32, lo: f64, hi: f64) -> Option<f64> {
    const SAMPLES: usize = 256;
    let to_omega = |d: f64| (d / (1.0 - d)).sqrt();
    let to_delta = |w: f64| w * w / (1.0 + w * w);
    let (w_lo, w_hi) = (to_omega(lo), to_omega(hi));
    let margin = 1e-9 * (w_hi - w_lo).max(1e-300);
    let (w_lo, w_hi) = (w_lo + margin, w_hi - margin);
    if !(w_hi > w_lo) {
        return None;
    }
    let eval = |w: f64| {
        compat_residual(to_delta(w), alpha, b, k)
            .ok()
            .filter(|v| v.is_finite())
    };
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=SAMPLES {
        let w = w_lo + (w_hi - w_lo) * i as f64 / SAMPLES as f64;
        let Some(v) = eval(w) else {
            prev = None;
            continue;
        };
        if v == 0.0 {
            return Some(to_delta(w));
        }
        if let Some((wp, vp)) = prev {
            if vp.signum() != v.signum() {
                let bracket = Bracket::new(wp, w).ok()?;
                let root = find_root(|w| eval(w).unwrap_or(f64::NAN), bracket, 1e-15).ok()?;
                return Some(to_delta(root));
            }
        }
        prev = Some((w, v));
    }
    None
}

/// Smallest critical anisotropy `δ_{1,k}(α, b)` in `(0, 1)`, if any.
///
/// For `k = 0` the interval is cut at every pole of the tangent and of the
/// rational term, and the cells are scanned in increasing order. `k = 1`
/// uses the closed form. For `k ≥ 1` no root exists when `α ≥ 1`; otherwise
/// the root lies above the rational pole.
pub fn delta_weak(alpha: f64, b: f64, k: u32) -> Option<f64> {
    if !(alpha > 0.0 && b > 0.0 && b < 1.0) {
        return None;
    }
    let len = -b.ln();
    match k {
        0 => {
            let pole = rational_pole(alpha, b, 0);
            let mut lo = 0.0;
            for m in 0..10_000 {
                let x = (FRAC_PI_2 + m as f64 * PI) / len;
                let tan_pole = x * x / (1.0 + x * x);
                if !(tan_pole < 1.0) || tan_pole <= lo {
                    break;
                }
                let mut cells = vec![(lo, tan_pole)];
                if pole > lo && pole < tan_pole {
                    cells = vec![(lo, pole), (pole, tan_pole)];
                }
                for (a, c) in cells {
                    if let Some(root) = first_root_in_cell(alpha, b, 0, a, c) {
                        return Some(root);
                    }
                }
                lo = tan_pole;
            }
            None
        }
        _ if alpha >= 1.0 => None,
        1 => {
            let d = delta_weak_k1_closed_form(alpha, b);
            (d > 0.0 && d < 1.0).then_some(d)
        }
        _ => {
            let pole = rational_pole(alpha, b, k);
            if !(pole < 1.0) {
                return None;
            }
            first_root_in_cell(alpha, b, k, pole.max(0.0), 1.0 - 1e-12)
        }
    }
}

/// Critical radial eigenfunction
/// `sin(ω ln(1/r)) + (√(δ(1−δ))/(α−δ)) cos(ω ln(1/r))`, `ω = √(δ/(1−δ))`.
pub fn weak_eigenmode(r: f64, delta: f64, alpha: f64, b: f64) -> Result<f64, WeakError> {
    let (omega, beta) = mode_coefficients(delta, alpha)?;
    if !(r >= b * (1.0 - 1e-12) && r <= 1.0 + 1e-12) {
        return Err(WeakError::InvalidParameter(format!(
            "radius {r} lies outside [{b}, 1]"
        )));
    }
    let t = -r.ln();
    Ok((omega * t).sin() + beta * (omega * t).cos())
}

fn mode_coefficients(delta: f64, alpha: f64) -> Result<(f64, f64), WeakError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(WeakError::InvalidParameter(format!(
            "δ = {delta} must lie in (0, 1)"
        )));
    }
    if (alpha - delta).abs() < 1e-12 {
        return Err(WeakError::DegenerateCoefficient { alpha, delta });
    }
    Ok((
        (delta / (1.0 - delta)).sqrt(),
        (delta * (1.0 - delta)).sqrt() / (alpha - delta),
    ))
}

/// Critical curves `δ_{1,k}(α)` for `k = 0..=k_max` on an increasing grid of
/// positive anchoring strengths.
pub fn stability_region(
    b: f64,
    k_max: u32,
    alpha_grid: &[f64],
) -> Result<Vec<StabilityCurve>, WeakError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(WeakError::InvalidParameter(format!(
            "b = {b} must lie in (0, 1)"
        )));
    }
    if alpha_grid.iter().any(|a| !(*a > 0.0)) || alpha_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(WeakError::InvalidParameter(
            "α grid must be positive and increasing".into(),
        ));
    }
    Ok((0..=k_max)
        .map(|k| {
            let points = alpha_grid
                .par_iter()
                .map(|&a| delta_weak(a, b, k).map(|d| (a, d)))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect();
            StabilityCurve { k, b, points }
        })
        .collect())
}

/// Coefficients `(E1, E3)` of the amplitude equation `A³E3 − δ2·A·E1 = 0`
/// for the weak-anchoring pitchfork at `δ1 = δ_{1,0}(α, b)`, with the
/// critical mode normalized as in [`weak_eigenmode`].
///
/// In `t = −ln r` the solvability condition of the third-order problem reads
/// `A³Q − δ2·A·P = 0` with
/// `P = ∫ η(η'' − η) dt − η(0)(η(0) − η'(0)) + η(L)(η(L) − η'(L))` and `Q` the
/// cubic bulk and boundary terms; `E1 = −P`, `E3 = −Q`, oriented so that
/// `E1 = ∫(η'² + η²) dt` in the strong-anchoring limit.
pub fn weak_pitchfork_coeffs(alpha: f64, b: f64) -> Result<(f64, f64), WeakError> {
    let delta1 = delta_weak(alpha, b, 0).ok_or(WeakError::NoCriticalRoot { alpha, b })?;
    let (omega, beta) = mode_coefficients(delta1, alpha)?;
    let len = -b.ln();
    let eta = |t: f64| (omega * t).sin() + beta * (omega * t).cos();
    let eta_t = |t: f64| omega * ((omega * t).cos() - beta * (omega * t).sin());
    let eta_tt = |t: f64| -omega * omega * eta(t);

    let p_bulk = integrate(|t| eta(t) * (eta_tt(t) - eta(t)), 0.0, len, 1e-13)?;
    let (e0, d0) = (eta(0.0), eta_t(0.0));
    let (el, dl) = (eta(len), eta_t(len));
    let p = p_bulk - e0 * (e0 - d0) + el * (el - dl);

    let q_bulk = integrate(
        |t| {
            let (e, et) = (eta(t), eta_t(t));
            e * e * et * et - 2.0 / 3.0 * e.powi(4) + e.powi(3) * eta_tt(t)
        },
        0.0,
        len,
        1e-13,
    )?;
    let outer = e0 * (2.0 / 3.0 * e0.powi(3) * (alpha - delta1) + delta1 * e0 * e0 * d0);
    let inner = el * (2.0 / 3.0 * el.powi(3) * (alpha * b + delta1) - delta1 * el * el * dl);
    let q = delta1 * q_bulk + outer + inner;
    Ok((-p, -q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::of_strong::delta_n;

    #[test]
    fn k1_closed_form_value() {
        let d = delta_weak(0.5, 0.5, 1).unwrap();
        assert!((d - 0.791_666_666_666_666_7).abs() < 1e-9);
        assert!((d - 0.5 * 1.1875 / 0.75).abs() < 1e-15);
        assert!(compat_residual(d, 0.5, 0.5, 1).unwrap().abs() < 1e-12);
        assert_eq!(delta_weak(1.5, 0.5, 1), None);
    }

    #[test]
    fn k0_recovers_strong_limit() {
        let d = delta_weak(1e6, 0.5, 0).unwrap();
        let strong = delta_n(0.5, 1);
        assert!((d - 0.95356).abs() < 1e-4);
        assert!((d - strong).abs() < 1e-4, "{d} vs {strong}");
    }

    #[test]
    fn roots_satisfy_residual() {
        for &(alpha, b) in &[(0.3, 0.4), (1.0, 0.5), (4.0, 0.2), (0.05, 0.8)] {
            for k in 0..4 {
                if let Some(d) = delta_weak(alpha, b, k) {
                    let r = compat_residual(d, alpha, b, k).unwrap();
                    assert!(r.abs() < 1e-9, "α={alpha} b={b} k={k}: {r}");
                }
            }
        }
    }

    #[test]
    fn k_ge_1_roots_respect_pole_bound() {
        for &b in &[0.2, 0.5, 0.8] {
            for &alpha in &[0.1, 0.5, 0.9] {
                for k in 2..5 {
                    let d = delta_weak(alpha, b, k).expect("root exists for α < 1");
                    let kk = (k * k) as f64;
                    let lower = (kk + alpha * alpha * b) / (alpha * b - alpha + 1.0 + kk);
                    assert!(d > lower && d < 1.0);
                }
            }
        }
    }

    #[test]
    fn no_azimuthal_roots_for_strong_enough_anchoring() {
        for &b in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &alpha in &[1.0, 1.5, 3.0, 100.0] {
                for k in 1..6 {
                    assert_eq!(delta_weak(alpha, b, k), None);
                }
            }
        }
    }

    #[test]
    fn pole_proximity_is_flagged() {
        let b: f64 = 0.5;
        let x = FRAC_PI_2 / -b.ln();
        let pole = x * x / (1.0 + x * x);
        assert!(matches!(
            compat_residual(pole, 1.0, b, 0),
            Err(WeakError::PoleProximity { m: 0, .. })
        ));
    }

    #[test]
    fn eigenmode_robin_conditions_and_ode() {
        let (alpha, b) = (0.8, 0.4);
        let delta = delta_weak(alpha, b, 0).unwrap();
        let (omega, beta) = mode_coefficients(delta, alpha).unwrap();
        assert!((weak_eigenmode(1.0, delta, alpha, b).unwrap() - beta).abs() < 1e-15);
        // Exact derivatives: f' = −f_t / r, f'' = (f_tt + f_t) / r².
        let parts = |r: f64| {
            let t = -r.ln();
            let f = (omega * t).sin() + beta * (omega * t).cos();
            let ft = omega * ((omega * t).cos() - beta * (omega * t).sin());
            (f, -ft / r, (-omega * omega * f + ft) / (r * r))
        };
        let (f1, d1, _) = parts(1.0);
        assert!((d1 - (delta - alpha) / (1.0 - delta) * f1).abs() < 1e-8);
        let (fb, db, _) = parts(b);
        assert!((db - (alpha + delta / b) / (1.0 - delta) * fb).abs() < 1e-8);
        for i in 0..=50 {
            let r = b + (1.0 - b) * i as f64 / 50.0;
            let (f, fr, frr) = parts(r);
            let res = (1.0 - delta) * (frr + fr / r) + delta * f / (r * r);
            assert!(res.abs() < 1e-8);
        }
        assert!(matches!(
            weak_eigenmode(0.5, 0.5, 0.5, b),
            Err(WeakError::DegenerateCoefficient { .. })
        ));
    }

    #[test]
    fn k0_curve_increases_toward_strong_limit() {
        for &b in &[0.2, 0.5, 0.8] {
            let grid: Vec<f64> = (1..=60).map(|i| 0.05 * 1.15f64.powi(i)).collect();
            let curves = stability_region(b, 3, &grid).unwrap();
            let k0 = &curves[0];
            assert_eq!(k0.points.len(), grid.len());
            assert!(k0.points.windows(2).all(|w| w[1].1 > w[0].1));
            assert!(k0.points.iter().all(|p| p.1 < delta_n(b, 1)));
            for c in &curves[1..] {
                assert!(c.points.iter().all(|p| p.0 < 1.0 && p.1 > 0.0 && p.1 < 1.0));
            }
            for p in &curves[1].points {
                assert!(p.1 > 0.5);
            }
        }
    }

    #[test]
    fn pitchfork_coefficients_positive() {
        for &alpha in &[0.5, 1.0, 2.0, 5.0] {
            for &b in &[0.2, 0.5, 0.8] {
                let (e1, e3) = weak_pitchfork_coeffs(alpha, b).unwrap();
                assert!(e1 > 0.0 && e3 > 0.0, "α={alpha} b={b}: E1={e1} E3={e3}");
            }
        }
    }

    #[test]
    fn pitchfork_ratio_strong_limit() {
        let b = 0.5;
        let (e1, e3) = weak_pitchfork_coeffs(1e6, b).unwrap();
        let d1 = delta_n(b, 1);
        assert!(
            ((e3 / e1) - d1 / 2.0).abs() < 0.05 * d1 / 2.0,
            "{} vs {}",
            e3 / e1,
            d1 / 2.0
        );
    }
}
