//! Oseen-Frank theory of the defect-free state `θ* = φ + π/2` on an annulus
//! with strong (Dirichlet) tangent anchoring: energies, radial stability
//! thresholds, the pitchfork amplitude and the spiral branch `θ* + U(t)`.
//!
//! Radial functions are written either in `r ∈ [b, 1]` or in the logarithmic
//! variable `t = −ln r ∈ [0, ln(1/b)]`, in which the radial operators have
//! constant coefficients.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    differentiate, find_root, integrate, integrate_singular, second_derivative, simpson, Bracket,
    Endpoint, NumericsError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrongError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("δ = {delta} does not exceed the critical anisotropy δ1 = {delta1}")]
    SubcriticalInput { delta: f64, delta1: f64 },
    #[error("no spiral branch at δ = {delta} (critical anisotropy δ1 = {delta1})")]
    NoSpiralBranch { delta: f64, delta1: f64 },
    #[error("outside the domain: {0}")]
    DomainError(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Annulus `b < r < 1` (radii rescaled by the outer radius), optionally cut
/// into `N` sectors and with a defect-core radius `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGeometry {
    b: f64,
    n_sectors: Option<u32>,
    eps: Option<f64>,
}

impl AnnulusGeometry {
    pub fn new(b: f64) -> Result<Self, StrongError> {
        if !(b > 0.0 && b < 1.0) {
            return Err(StrongError::InvalidParameter(format!(
                "radius ratio b = {b} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            b,
            n_sectors: None,
            eps: None,
        })
    }

    pub fn with_sectors(mut self, n: u32) -> Result<Self, StrongError> {
        if n == 0 {
            return Err(StrongError::InvalidParameter(
                "sector count must be at least 1".into(),
            ));
        }
        self.n_sectors = Some(n);
        Ok(self)
    }

    pub fn with_core_radius(mut self, eps: f64) -> Result<Self, StrongError> {
        if !(eps > 0.0 && eps < self.b / 4.0) {
            return Err(StrongError::InvalidParameter(format!(
                "core radius {eps} must lie in (0, b/4) with b = {}",
                self.b
            )));
        }
        self.eps = Some(eps);
        Ok(self)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_sectors(&self) -> Option<u32> {
        self.n_sectors
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    /// `ln(1/b)`, the length of the annulus in the variable `t = −ln r`.
    pub fn log_width(&self) -> f64 {
        -self.b.ln()
    }
}

/// Frank constants expressed through the anisotropy `δ = 1 − K1/K3` and `K3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticParams {
    delta: f64,
    k3: f64,
}

impl ElasticParams {
    pub fn new(delta: f64, k3: f64) -> Result<Self, StrongError> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(StrongError::InvalidParameter(format!(
                "anisotropy δ = {delta} must lie in [0, 1]"
            )));
        }
        if !(k3 > 0.0 && k3.is_finite()) {
            return Err(StrongError::InvalidParameter(format!(
                "bend constant K3 = {k3} must be positive"
            )));
        }
        Ok(Self { delta, k3 })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn k3(&self) -> f64 {
        self.k3
    }

    pub fn k1(&self) -> f64 {
        (1.0 - self.delta) * self.k3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialVariable {
    /// The radius itself, nodes spanning `[b, 1]`.
    R,
    /// `t = −ln r`, nodes spanning `[0, ln(1/b)]`.
    T,
}

/// A function of the radius sampled on increasing nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub variable: RadialVariable,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    /// Builds a profile and checks that its nodes span the annulus `[b, 1]`
    /// in the chosen variable.
    pub fn new(
        variable: RadialVariable,
        nodes: Vec<f64>,
        values: Vec<f64>,
        b: f64,
    ) -> Result<Self, StrongError> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(StrongError::InvalidParameter(
                "profile needs matching nodes and values".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(StrongError::InvalidParameter(
                "profile nodes must increase".into(),
            ));
        }
        let profile = Self {
            variable,
            nodes,
            values,
        };
        profile.check_span(b)?;
        Ok(profile)
    }

    /// Checks that the nodes span the annulus with inner radius `b`.
    pub fn check_span(&self, b: f64) -> Result<(), StrongError> {
        let (lo, hi) = match self.variable {
            RadialVariable::R => (b, 1.0),
            RadialVariable::T => (0.0, -b.ln()),
        };
        let n = self.nodes.len();
        let tol = 1e-12 * (1.0 + hi.abs());
        if n == 0 || (self.nodes[0] - lo).abs() > tol || (self.nodes[n - 1] - hi).abs() > tol {
            return Err(StrongError::InvalidParameter(format!(
                "profile nodes do not span [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Samples `f(t)` on `n` uniform nodes in `t ∈ [0, ln(1/b)]`.
    pub fn sample_t<F: Fn(f64) -> f64>(b: f64, n: usize, f: F) -> Self {
        let len = -b.ln();
        let nodes: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 == n {
                    len
                } else {
                    len * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self {
            variable: RadialVariable::T,
            nodes,
            values,
        }
    }

    /// Samples `f(r)` on `n` uniform nodes in `r ∈ [b, 1]`.
    pub fn sample_r<F: Fn(f64) -> f64>(b: f64, n: usize, f: F) -> Self {
        let nodes: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 == n {
                    1.0
                } else {
                    b + (1.0 - b) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        let values = nodes.iter().map(|&r| f(r)).collect();
        Self {
            variable: RadialVariable::R,
            nodes,
            values,
        }
    }

    /// Radii of the nodes.
    pub fn radii(&self) -> Vec<f64> {
        match self.variable {
            RadialVariable::R => self.nodes.clone(),
            RadialVariable::T => self.nodes.iter().map(|t| (-t).exp()).collect(),
        }
    }

    fn uniform_spacing(&self) -> Result<f64, StrongError> {
        let n = self.nodes.len();
        let h = (self.nodes[n - 1] - self.nodes[0]) / (n - 1) as f64;
        if n < 5
            || self
                .nodes
                .windows(2)
                .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h)
        {
            return Err(StrongError::InvalidParameter(
                "quadrature needs at least five uniformly spaced nodes".into(),
            ));
        }
        Ok(h)
    }
}

/// Energy of the defect-free state, `π K3 ln(1/b)`.
pub fn defect_free_energy(geometry: &AnnulusGeometry, elastic: &ElasticParams) -> f64 {
    PI * elastic.k3 * geometry.log_width()
}

/// Critical anisotropy of the n-th radial mode, `π²n² / (π²n² + ln²b)`.
pub fn delta_n(b: f64, n: u32) -> f64 {
    let pn = PI * n as f64;
    let lb = b.ln();
    pn * pn / (pn * pn + lb * lb)
}

/// Radial null mode `sin(πn ln r / ln b)` of the second variation at `δ = δ_n`.
pub fn eigenmode(b: f64, n: u32, r: f64) -> f64 {
    (PI * n as f64 * r.ln() / b.ln()).sin()
}

/// Second variation of the energy about `θ*` for a radial perturbation
/// `η(r)` vanishing at both circles, with `K3` factored out:
/// `2π ∫ [(η')² − δ(η/r + η')²] r dr`.
///
/// Derivatives use fourth-order differences and the integral Simpson's rule,
/// so `eta` must be sampled on uniform nodes in its own variable.
pub fn second_variation_radial(
    eta: &RadialProfile,
    delta: f64,
    b: f64,
) -> Result<f64, StrongError> {
    eta.check_span(b)?;
    let h = eta.uniform_spacing()?;
    let d = differentiate(&eta.values, h);
    let integrand: Vec<f64> = match eta.variable {
        RadialVariable::T => eta
            .values
            .iter()
            .zip(&d)
            .map(|(e, et)| et * et - delta * (e - et).powi(2))
            .collect(),
        RadialVariable::R => eta
            .nodes
            .iter()
            .zip(eta.values.iter().zip(&d))
            .map(|(r, (e, er))| (er * er - delta * (e / r + er).powi(2)) * r)
            .collect(),
    };
    Ok(2.0 * PI * simpson(&integrand, h))
}

/// Leading-order amplitude `√(2(δ − δ1)/δ1)` of the bifurcating radial mode.
pub fn pitchfork_amplitude(delta: f64, b: f64) -> Result<f64, StrongError> {
    let delta1 = delta_n(b, 1);
    if delta < delta1 {
        return Err(StrongError::SubcriticalInput { delta, delta1 });
    }
    Ok((2.0 * (delta - delta1) / delta1).sqrt())
}

/// Coefficient of `η²` in the second variation about the exact `δ = 1`
/// spiral, `(2b − b² − 1)/(b²e^{2t} + e^{−2t} − b² − 1)`; at least 1 inside
/// the annulus.
pub fn delta1_stability_coefficient(b: f64, t: f64) -> Result<f64, StrongError> {
    let len = -b.ln();
    if !(t > 0.0 && t < len) {
        return Err(StrongError::DomainError(format!(
            "t = {t} must lie strictly inside (0, {len})"
        )));
    }
    let num = 2.0 * b - b * b - 1.0;
    let den = b * b * (2.0 * t).exp() + (-2.0 * t).exp() - b * b - 1.0;
    Ok(num / den)
}

/// Exact `δ = 1` spiral offset `U(t) = arccos(b e^t/(b+1) + e^{−t}/(b+1))`.
pub fn spiral_delta_one(b: f64, t: f64) -> f64 {
    ((b * t.exp() + (-t).exp()) / (b + 1.0))
        .clamp(-1.0, 1.0)
        .acos()
}

/// One-maximum spiral equilibrium `θ = φ + π/2 + U(t)` with `U ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiralState {
    pub geometry: AnnulusGeometry,
    pub delta: f64,
    /// Maximum offset, reached at the middle `t = ln(1/b)/2`.
    pub u0: f64,
    /// `U` on a uniform `t`-grid.
    pub profile: RadialProfile,
    /// The reflected branch `−U` is an equilibrium with the same energy.
    pub has_mirror_branch: bool,
}

/// `dt/dψ` under the substitution `sin U = sin U0 · sin ψ`, which maps the
/// half period `t ∈ [0, ln(1/b)/2]` to `ψ ∈ [0, π/2]` and removes the
/// square-root flattening at the maximum.
fn dt_dpsi(delta: f64, u0: f64, psi: f64) -> f64 {
    let (s, c) = (u0.sin(), u0.cos());
    // cos²u = cos²U0 + sin²U0 cos²ψ and 1 − δcos²u = (1 − δ) + δ sin²u avoid
    // cancellation near the turning point and near U = 0.
    let sin2 = (s * psi.sin()).powi(2);
    let cos2 = c * c + (s * psi.cos()).powi(2);
    (((1.0 - delta) + delta * sin2) / (delta * cos2)).sqrt()
}

/// Half period `∫₀^{U0} √((1 − δcos²u)/(δ(cos²u − cos²U0))) du` evaluated
/// with the endpoint-singular quadrature.
pub fn spiral_half_period(delta: f64, u0: f64) -> Result<f64, StrongError> {
    let f = |u: f64| {
        // cos²u − cos²U0 = sin(U0 − u) sin(U0 + u), free of cancellation.
        let gap = (u0 - u).sin() * (u0 + u).sin();
        ((1.0 - delta * u.cos().powi(2)) / (delta * gap)).sqrt()
    };
    Ok(integrate_singular(f, 0.0, u0, Endpoint::Upper, 1e-10)?)
}

/// Same half period through the smooth `ψ` substitution.
pub fn spiral_half_period_smooth(delta: f64, u0: f64) -> Result<f64, StrongError> {
    Ok(integrate(
        |psi| dt_dpsi(delta, u0, psi),
        0.0,
        FRAC_PI_2,
        1e-14,
    )?)
}

/// Solves for the one-maximum spiral on a 2001-node `t`-grid.
pub fn spiral_solve(delta: f64, b: f64) -> Result<SpiralState, StrongError> {
    spiral_solve_with_nodes(delta, b, 2001)
}

/// Solves for the spiral offset: the maximum `U0` from the half-period
/// condition, then `U(t)` by inverting `t(ψ)` node by node.
pub fn spiral_solve_with_nodes(
    delta: f64,
    b: f64,
    n_nodes: usize,
) -> Result<SpiralState, StrongError> {
    let geometry = AnnulusGeometry::new(b)?;
    let delta1 = delta_n(b, 1);
    if !(delta <= 1.0) {
        return Err(StrongError::InvalidParameter(format!(
            "anisotropy δ = {delta} exceeds 1"
        )));
    }
    if delta <= delta1 {
        return Err(StrongError::NoSpiralBranch { delta, delta1 });
    }
    if n_nodes < 5 {
        return Err(StrongError::InvalidParameter(
            "spiral grid needs at least five nodes".into(),
        ));
    }
    let len = geometry.log_width();
    let half = 0.5 * len;

    // The smooth route is accurate to round-off, which the root finder needs.
    let period = |u0: f64| spiral_half_period_smooth(delta, u0).unwrap_or(f64::NAN) - half;
    // The half period diverges like ln(1/cos U0); back off from π/2 only as
    // far as needed so the quadrature never meets the near-singular spike.
    let mut gap = 1e-3;
    while gap > 1e-8 && period(FRAC_PI_2 - gap) < 0.0 {
        gap *= 0.1;
    }
    let bracket = Bracket::new(1e-8, FRAC_PI_2 - gap)?;
    let u0 = match find_root(period, bracket, 1e-14) {
        Ok(u0) => u0,
        Err(NumericsError::NoSignChange { .. }) => {
            return Err(StrongError::NoSpiralBranch { delta, delta1 })
        }
        Err(e) => return Err(e.into()),
    };

    let sin_u0 = u0.sin();
    let nodes: Vec<f64> = (0..n_nodes)
        .map(|i| {
            if i + 1 == n_nodes {
                len
            } else {
                len * i as f64 / (n_nodes - 1) as f64
            }
        })
        .collect();
    let mut values = vec![0.0; n_nodes];
    let mid = (n_nodes - 1) / 2;
    let (mut psi_prev, mut t_prev) = (0.0, 0.0);
    for i in 1..=mid {
        let t = nodes[i];
        if 2 * i == n_nodes - 1 {
            values[i] = u0;
            break;
        }
        let target = t - t_prev;
        let g = |psi: f64| {
            integrate(|p| dt_dpsi(delta, u0, p), psi_prev, psi, 1e-15).unwrap_or(f64::NAN) - target
        };
        let psi = find_root(g, Bracket::new(psi_prev, FRAC_PI_2)?, 1e-15)?;
        values[i] = (sin_u0 * psi.sin()).asin();
        psi_prev = psi;
        t_prev = t;
    }
    for i in mid + 1..n_nodes {
        values[i] = values[n_nodes - 1 - i];
    }
    values[0] = 0.0;
    values[n_nodes - 1] = 0.0;
    Ok(SpiralState {
        geometry,
        delta,
        u0,
        profile: RadialProfile {
            variable: RadialVariable::T,
            nodes,
            values,
        },
        has_mirror_branch: true,
    })
}

impl SpiralState {
    /// Residual of `(1 − δcos²U) U'' + (δ/2) sin 2U (U'² + 1) = 0` at interior
    /// nodes, with fourth-order differences in `t`.
    pub fn ode_residual(&self) -> Vec<f64> {
        let u = &self.profile.values;
        let h = self.profile.nodes[1] - self.profile.nodes[0];
        let ut = differentiate(u, h);
        let utt = second_derivative(u, h);
        (1..u.len() - 1)
            .map(|i| {
                (1.0 - self.delta * u[i].cos().powi(2)) * utt[i]
                    + 0.5 * self.delta * (2.0 * u[i]).sin() * (ut[i] * ut[i] + 1.0)
            })
            .collect()
    }
}

/// Energy of `θ = φ + π/2 + U(t)` for a profile given on a uniform grid,
/// `π ∫ [K1(sin U − cos U U')² + K3(cos U + sin U U')²] dt`.
pub fn radial_state_energy(u: &RadialProfile, elastic: &ElasticParams) -> Result<f64, StrongError> {
    let h = u.uniform_spacing()?;
    let d = differentiate(&u.values, h);
    let integrand: Vec<f64> = match u.variable {
        RadialVariable::T => u
            .values
            .iter()
            .zip(&d)
            .map(|(&v, &vt)| {
                elastic.k1() * (v.sin() - v.cos() * vt).powi(2)
                    + elastic.k3 * (v.cos() + v.sin() * vt).powi(2)
            })
            .collect(),
        RadialVariable::R => u
            .nodes
            .iter()
            .zip(u.values.iter().zip(&d))
            .map(|(&r, (&v, &vr))| {
                let vt = -r * vr;
                (elastic.k1() * (v.sin() - v.cos() * vt).powi(2)
                    + elastic.k3 * (v.cos() + v.sin() * vt).powi(2))
                    / r
            })
            .collect(),
    };
    Ok(PI * simpson(&integrand, h))
}

/// Energy of a spiral state, integrated over the smooth `ψ` variable.
pub fn spiral_energy(state: &SpiralState, elastic: &ElasticParams) -> Result<f64, StrongError> {
    if (elastic.delta - state.delta).abs() > 1e-12 {
        return Err(StrongError::InvalidParameter(format!(
            "elastic anisotropy {} differs from the state's {}",
            elastic.delta, state.delta
        )));
    }
    let delta = state.delta;
    let sin_u0 = state.u0.sin();
    // Over one half period the cross term δ sin 2U U' integrates to ±δ sin²U0
    // and cancels against the other half; the rest is symmetric. The first
    // integral gives U'²(1 − δcos²U) = δ(cos²U − cos²U0) = δ sin²U0 cos²ψ.
    let integrand = |psi: f64| {
        let sin2 = (sin_u0 * psi.sin()).powi(2);
        let kinetic = delta * (sin_u0 * psi.cos()).powi(2);
        (1.0 - delta * sin2 + kinetic) * dt_dpsi(delta, state.u0, psi)
    };
    let half = integrate(integrand, 0.0, FRAC_PI_2, 1e-13)?;
    Ok(2.0 * PI * elastic.k3 * half)
}
