//! Landau-de Gennes defect-free state `Q* = s(r)(n⊗n − m⊗m)` on the annulus.
//!
//! Profiles are computed in `x = ln r`, where the radial equation
//! `s'' + s'/r − 4s/r² = t·s(2s² − 1)` becomes `s_xx = 4s + t·e^{2x}·s(2s² − 1)`
//! with no first-derivative term, and is discretized with Numerov's scheme.
//! The parameter `t = |A|/L` is the rescaled inverse-square correlation length.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    differentiate, min_eigenvalue, simpson, solve_bvp, BvpOptions, BvpReport, GridFunction,
    NumericsError, Scheme, SecondOrderOde, SymBand,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LdgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("perturbation has {got} nodes, profile grid has {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("perturbation component {component} does not vanish at the boundary")]
    NonVanishingBoundary { component: usize },
    #[error("profile residual {residual:e} above 1e-8 after continuation in t")]
    NotConverged { residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdgParams {
    t: f64,
}

impl LdgParams {
    pub fn new(t: f64) -> Result<Self, LdgError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(LdgError::InvalidParameter(format!(
                "t = {t} must be finite and ≥ 0"
            )));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `s(b) = s(1) = 1/√2`.
    S,
    /// `u(b) = 0`, `u(1) = 1/√2`.
    U,
}

/// Order-parameter profile on a grid uniform in `ln r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderProfile {
    pub kind: ProfileKind,
    pub b: f64,
    pub params: LdgParams,
    /// Radii, increasing from `b` to 1.
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub report: BvpReport,
}

impl OrderProfile {
    /// Grid spacing in `x = ln r`.
    pub fn log_step(&self) -> f64 {
        -self.b.ln() / (self.r.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Location and value of the minimum, refined by a parabola through the
    /// smallest node and its neighbours.
    pub fn minimum(&self) -> (f64, f64) {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
            );
        if i == 0 || i + 1 == self.values.len() {
            return (self.r[i], self.values[i]);
        }
        let h = self.log_step();
        let (ym, y0, yp) = (self.values[i - 1], self.values[i], self.values[i + 1]);
        let curv = ym - 2.0 * y0 + yp;
        if curv <= 0.0 {
            return (self.r[i], y0);
        }
        let off = 0.5 * (ym - yp) / curv;
        (
            (self.r[i].ln() + off * h).exp(),
            y0 - 0.25 * (ym - yp) * off,
        )
    }
}

struct RadialOde {
    t: f64,
}

impl SecondOrderOde for RadialOde {
    fn rhs(&self, x: f64, y: f64, _dy: f64) -> f64 {
        4.0 * y + self.t * (2.0 * x).exp() * y * (2.0 * y * y - 1.0)
    }

    fn partials(&self, x: f64, y: f64, _dy: f64) -> (f64, f64) {
        (4.0 + self.t * (2.0 * x).exp() * (6.0 * y * y - 1.0), 0.0)
    }

    fn slope_free(&self) -> bool {
        true
    }
}

/// Solution at `t = 0`: `C1 r² + C2 r⁻²` through the boundary data.
pub fn linear_profile(kind: ProfileKind, b: f64, r: f64) -> f64 {
    let c = FRAC_1_SQRT_2;
    match kind {
        ProfileKind::S => c * (r * r + b * b / (r * r)) / (b * b + 1.0),
        ProfileKind::U => {
            let b4 = b.powi(4);
            c * (r * r - b4 / (r * r)) / (1.0 - b4)
        }
    }
}

fn boundary_values(kind: ProfileKind) -> (f64, f64) {
    match kind {
        ProfileKind::S => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        ProfileKind::U => (0.0, FRAC_1_SQRT_2),
    }
}

fn solve_profile(
    kind: ProfileKind,
    b: f64,
    params: LdgParams,
    n_nodes: usize,
) -> Result<OrderProfile, LdgError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(LdgError::InvalidParameter(format!(
            "b = {b} must lie in (0, 1)"
        )));
    }
    if n_nodes < 5 {
        return Err(LdgError::InvalidParameter("need at least 5 nodes".into()));
    }
    let init = GridFunction::uniform(b.ln(), 0.0, n_nodes, |x| linear_profile(kind, b, x.exp()));
    let (sol, report) = continuation(kind, params.t, &init)?;
    if !(report.final_residual() <= 1e-8) {
        return Err(LdgError::NotConverged {
            residual: report.final_residual(),
        });
    }
    Ok(OrderProfile {
        kind,
        b,
        params,
        r: sol.nodes.iter().map(|x| x.exp()).collect(),
        values: sol.values,
        report,
    })
}

/// Newton solve at `t`; on failure, solve at `t/2` first and seed from it.
fn continuation(
    kind: ProfileKind,
    t: f64,
    init: &GridFunction,
) -> Result<(GridFunction, BvpReport), LdgError> {
    let (left, right) = boundary_values(kind);
    let opts = BvpOptions {
        scheme: Scheme::Numerov,
        tol: 1e-10,
        max_iter: 60,
    };
    match solve_bvp(&RadialOde { t }, left, right, init, &opts) {
        Ok((sol, report)) if report.final_residual() <= 1e-8 => Ok((sol, report)),
        _ if t > 1e-3 => {
            let (half, _) = continuation(kind, 0.5 * t, init)?;
            Ok(solve_bvp(&RadialOde { t }, left, right, &half, &opts)?)
        }
        Ok(found) => Ok(found),
        Err(e) => Err(e.into()),
    }
}

/// Defect-free order parameter `s` with `s(b) = s(1) = 1/√2`.
pub fn solve_s(b: f64, params: LdgParams, n_nodes: usize) -> Result<OrderProfile, LdgError> {
    solve_profile(ProfileKind::S, b, params, n_nodes)
}

/// Comparison profile `u` with `u(b) = 0`, `u(1) = 1/√2`.
pub fn solve_u(b: f64, params: LdgParams, n_nodes: usize) -> Result<OrderProfile, LdgError> {
    solve_profile(ProfileKind::U, b, params, n_nodes)
}

/// `2π∫(s'² + 4s²/r² + (t/4)(2s² − 1)²) r dr`, evaluated in `x = ln r`.
pub fn ldg_energy(profile: &OrderProfile) -> f64 {
    let h = profile.log_step();
    let t = profile.params.t;
    let sx = differentiate(&profile.values, h);
    let density: Vec<f64> = profile
        .values
        .iter()
        .zip(&sx)
        .zip(&profile.r)
        .map(|((s, d), r)| d * d + 4.0 * s * s + 0.25 * t * r * r * (2.0 * s * s - 1.0).powi(2))
        .collect();
    2.0 * PI * simpson(&density, h)
}

/// Second-variation functional `L_n[a, b, c, d]` for perturbation components
/// sampled on the grid of `s`.
///
/// In `x = ln r` the integrand is
/// `Σ(φ_x² + (n² + 4)φ²) + 8n(ad − bc) + t r²(2s² − 1)Σφ² + 4t r² s²(a² + b²)`.
pub fn ln_value(n: u32, comps: [&[f64]; 4], s: &OrderProfile) -> Result<f64, LdgError> {
    let len = s.len();
    for (k, c) in comps.iter().enumerate() {
        if c.len() != len {
            return Err(LdgError::GridMismatch {
                expected: len,
                got: c.len(),
            });
        }
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if c[0].abs() > 1e-12 * scale || c[len - 1].abs() > 1e-12 * scale {
            return Err(LdgError::NonVanishingBoundary { component: k });
        }
    }
    let h = s.log_step();
    let t = s.params.t;
    let nf = n as f64;
    let ders: Vec<Vec<f64>> = comps.iter().map(|c| differentiate(c, h)).collect();
    let density: Vec<f64> = (0..len)
        .map(|i| {
            let [a, b, c, d] = comps.map(|v| v[i]);
            let sum_sq = a * a + b * b + c * c + d * d;
            let grad: f64 = ders.iter().map(|v| v[i] * v[i]).sum();
            let (r, sv) = (s.r[i], s.values[i]);
            grad + (nf * nf + 4.0) * sum_sq
                + 8.0 * nf * (a * d - b * c)
                + t * r * r * (2.0 * sv * sv - 1.0) * sum_sq
                + 4.0 * t * r * r * sv * sv * (a * a + b * b)
        })
        .collect();
    Ok(simpson(&density, h))
}

/// Smallest eigenvalue of the discretized `L_n` relative to the mass
/// `∫(a² + b² + c² + d²) r dr`, over components vanishing at `r = b, 1`.
pub fn min_eig_ln(n: u32, b: f64, params: LdgParams, n_nodes: usize) -> Result<f64, LdgError> {
    min_eig_ln_for(n, &solve_s(b, params, n_nodes)?)
}

/// As [`min_eig_ln`], reusing a computed `s` profile.
///
/// Unknowns are interleaved `(a, b, c, d)` per interior node, giving a
/// symmetric band of half-width 4: linear elements for the gradient terms,
/// lumped (nodal) quadrature for the potential and the coupling.
pub fn min_eig_ln_for(n: u32, s: &OrderProfile) -> Result<f64, LdgError> {
    let interior = s.len() - 2;
    let h = s.log_step();
    let t = s.params.t;
    let nf = n as f64;
    let mut form = SymBand::zeros(4 * interior, 4);
    let mut mass = vec![0.0; 4 * interior];
    for i in 0..interior {
        let (r, sv) = (s.r[i + 1], s.values[i + 1]);
        let base = (nf * nf + 4.0) + t * r * r * (2.0 * sv * sv - 1.0);
        for comp in 0..4 {
            let k = 4 * i + comp;
            let pot = if comp < 2 {
                base + 4.0 * t * r * r * sv * sv
            } else {
                base
            };
            form.add(k, k, 2.0 / h + h * pot);
            if i + 1 < interior {
                form.add(k + 4, k, -1.0 / h);
            }
            mass[k] = h * r * r;
        }
        form.add(4 * i + 3, 4 * i, 4.0 * nf * h);
        form.add(4 * i + 2, 4 * i + 1, -4.0 * nf * h);
    }
    Ok(min_eigenvalue(&form, &mass)?)
}

/// Sufficient condition for local stability: `t > 3(b² + 1)²/(2b⁴)`.
pub fn stability_threshold(b: f64) -> f64 {
    3.0 * (b * b + 1.0).powi(2) / (2.0 * b.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub u_monotone: bool,
    pub u_below_s: bool,
    pub s_has_interior_min: bool,
    /// `min s ≥ √(1/2 − 2/(t r*²))` at the minimizer `r*`.
    pub s_min_bound: bool,
    /// `s ≥ √2 b/(b² + 1)` everywhere.
    pub golovaty_bound: bool,
    pub r_star: f64,
    pub s_min: f64,
}

/// Evaluates the qualitative properties of `s` and `u` at one parameter point.
pub fn check_propositions(
    b: f64,
    params: LdgParams,
    n_nodes: usize,
) -> Result<PropositionReport, LdgError> {
    let s = solve_s(b, params, n_nodes)?;
    let u = solve_u(b, params, n_nodes)?;
    let slack = 1e-10;
    let u_monotone = u.values.windows(2).all(|w| w[1] - w[0] >= -slack);
    let u_below_s = u.values.iter().zip(&s.values).all(|(u, s)| *u <= s + slack);
    let (r_star, s_min) = s.minimum();
    let s_has_interior_min = r_star > b && r_star < 1.0 && s_min < FRAC_1_SQRT_2;
    let t = params.t;
    let floor = if t > 0.0 {
        0.5 - 2.0 / (t * r_star * r_star)
    } else {
        f64::NEG_INFINITY
    };
    let s_min_bound = floor <= 0.0 || s_min >= floor.sqrt() - slack;
    let golovaty = 2f64.sqrt() * b / (b * b + 1.0);
    let golovaty_bound = s.values.iter().all(|v| *v >= golovaty - slack);
    Ok(PropositionReport {
        u_monotone,
        u_below_s,
        s_has_interior_min,
        s_min_bound,
        golovaty_bound,
        r_star,
        s_min,
    })
}
