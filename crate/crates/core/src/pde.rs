//! Finite-difference minimization of the anisotropic Oseen-Frank energy on
//! the annulus or a sector, in coordinates `(s, φ)` with `s = ln r`.
//!
//! With `ψ = θ − φ` the energy per unit `K3` is
//! `∫∫ ½(1 − δ sin²ψ)θ_s² + ½(1 − δ cos²ψ)θ_φ² + (δ/2) sin 2ψ θ_s θ_φ ds dφ`,
//! plus `(α/2)∫ sin²(θ − θ0) r dφ` on each circle under weak anchoring.
//! The discrete energy is a sum of local terms: one per grid edge for the
//! squared derivatives, one per cell for the mixed term (centred
//! differences over the cell), and one per boundary node for the anchoring.
//! The Euler-Lagrange residual is the exact gradient of this energy, so the
//! solver is a minimization: modified Newton (diagonal shift until the
//! banded `LDLᵀ` factorization is positive definite) with an Armijo line
//! search, falling back to nonlinear Gauss-Seidel sweeps when the line search
//! stalls. `θ* = φ + π/2` is an exact critical point of the discrete energy.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonic::{self, DefectStateSpec};
use crate::numerics::{gauss_legendre, min_eigenvalue, NumericsError, SymBand};
use crate::of_weak::AnchoringParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),
    #[error("anisotropy δ = {delta} outside the validated range [0, 0.99]")]
    SingularAnisotropy { delta: f64 },
    #[error("solver did not converge: residual {:e} after {} iterations", .0.final_residual, .0.iterations)]
    NewtonDiverged(Box<SolveReport>),
    #[error("corner-energy fit needs at least {0} cells between adjacent corners")]
    FitUnavailable(usize),
    #[error(transparent)]
    Harmonic(#[from] harmonic::HarmonicError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// Full annulus, periodic in `φ`.
    Annulus,
    /// Sector `0 ≤ φ ≤ 2π/N`.
    Sector { n: u32 },
}

/// Grid uniform in `s = ln r` and in `φ`. Periodic grids omit the node at
/// `φ = 2π`; sector grids include both straight edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    b: f64,
    nr: usize,
    nphi: usize,
    domain: Domain,
}

impl PolarGrid {
    pub fn annulus(b: f64, nr: usize, nphi: usize) -> Result<Self, PdeError> {
        Self::new(b, nr, nphi, Domain::Annulus)
    }

    pub fn sector(b: f64, n: u32, nr: usize, nphi: usize) -> Result<Self, PdeError> {
        if n == 0 {
            return Err(PdeError::InvalidGrid(
                "sector count must be positive".into(),
            ));
        }
        Self::new(b, nr, nphi, Domain::Sector { n })
    }

    fn new(b: f64, nr: usize, nphi: usize, domain: Domain) -> Result<Self, PdeError> {
        if !(b > 0.0 && b < 1.0) {
            return Err(PdeError::InvalidGrid(format!("b = {b} must lie in (0, 1)")));
        }
        if nr < 16 || nphi < 16 {
            return Err(PdeError::InvalidGrid(format!(
                "need at least 16 nodes per direction, got {nr} × {nphi}"
            )));
        }
        Ok(Self {
            b,
            nr,
            nphi,
            domain,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nphi(&self) -> usize {
        self.nphi
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_periodic(&self) -> bool {
        self.domain == Domain::Annulus
    }

    /// Angular extent of the domain.
    pub fn height(&self) -> f64 {
        match self.domain {
            Domain::Annulus => 2.0 * PI,
            Domain::Sector { n } => 2.0 * PI / n as f64,
        }
    }

    pub fn h_s(&self) -> f64 {
        -self.b.ln() / (self.nr - 1) as f64
    }

    pub fn h_phi(&self) -> f64 {
        match self.domain {
            Domain::Annulus => 2.0 * PI / self.nphi as f64,
            Domain::Sector { .. } => self.height() / (self.nphi - 1) as f64,
        }
    }

    pub fn s(&self, i: usize) -> f64 {
        self.b.ln() + i as f64 * self.h_s()
    }

    pub fn r(&self, i: usize) -> f64 {
        if i + 1 == self.nr {
            1.0
        } else {
            self.s(i).exp()
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * self.h_phi()
    }

    pub fn r_nodes(&self) -> Vec<f64> {
        (0..self.nr).map(|i| self.r(i)).collect()
    }

    pub fn phi_nodes(&self) -> Vec<f64> {
        (0..self.nphi).map(|j| self.phi(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.nr * self.nphi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Storage index of node `(i, j)`; rows are radial levels.
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * self.nphi + j
    }

    fn row_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nr {
            0.5
        } else {
            1.0
        }
    }

    fn col_weight(&self, j: usize) -> f64 {
        if !self.is_periodic() && (j == 0 || j + 1 == self.nphi) {
            0.5
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Boundary values of the field are held fixed.
    Dirichlet,
    /// Rapini-Papoular anchoring on both circles (full annulus only).
    Weak(AnchoringParams),
}

/// Director angle `θ` at every grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectorField {
    pub grid: PolarGrid,
    /// Row-major values, `theta[grid.node(i, j)]`.
    pub theta: Vec<f64>,
    pub bc: BoundaryCondition,
    /// On the annulus, `θ(φ + 2π) = θ(φ) + 2π·winding`.
    pub winding: i32,
}

impl DirectorField {
    pub fn from_fn(
        grid: PolarGrid,
        bc: BoundaryCondition,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, PdeError> {
        if matches!(bc, BoundaryCondition::Weak(_)) && !grid.is_periodic() {
            return Err(PdeError::InvalidBoundary(
                "weak anchoring is only supported on the full annulus".into(),
            ));
        }
        let mut theta = Vec::with_capacity(grid.len());
        for i in 0..grid.nr {
            for j in 0..grid.nphi {
                theta.push(f(grid.r(i), grid.phi(j)));
            }
        }
        Ok(Self {
            grid,
            theta,
            bc,
            winding: 1,
        })
    }

    /// `θ* = φ + π/2`.
    pub fn defect_free(grid: PolarGrid, bc: BoundaryCondition) -> Result<Self, PdeError> {
        Self::from_fn(grid, bc, |_, phi| phi + FRAC_PI_2)
    }

    /// Sector field with the tangent Dirichlet data of a defect state:
    /// `θ = 0` on `φ = 0`, `a0·H` on `φ = H`, `φ + a1` on `r = 1` and
    /// `φ + a3` on `r = b`, corners averaged. Interior values come from
    /// the one-constant series solution.
    pub fn defect_state(grid: PolarGrid, spec: &DefectStateSpec) -> Result<Self, PdeError> {
        let n = match grid.domain {
            Domain::Sector { n } if n == spec.n => n,
            _ => {
                return Err(PdeError::InvalidBoundary(format!(
                    "grid is not a sector Ω_{}",
                    spec.n
                )))
            }
        };
        let _ = n;
        let b = grid.b;
        let a = spec.coefficients;
        let height = grid.height();
        let field = spec.field();
        let rows: Vec<Vec<f64>> = (0..grid.nr)
            .into_par_iter()
            .map(|i| {
                (0..grid.nphi)
                    .map(|j| {
                        let (r, phi) = (grid.r(i), grid.phi(j));
                        let edge_r = match i {
                            0 => Some(phi + a[3]),
                            _ if i + 1 == grid.nr => Some(phi + a[1]),
                            _ => None,
                        };
                        let edge_phi = match j {
                            0 => Some(0.0),
                            _ if j + 1 == grid.nphi => Some(a[0] * height),
                            _ => None,
                        };
                        match (edge_r, edge_phi) {
                            (Some(x), Some(y)) => Ok(0.5 * (x + y)),
                            (Some(x), None) | (None, Some(x)) => Ok(x),
                            (None, None) => harmonic::field_angle(&field, b, r, phi),
                        }
                    })
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            grid,
            theta: rows.concat(),
            bc: BoundaryCondition::Dirichlet,
            winding: 0,
        })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.theta[self.grid.node(i, j)]
    }

    /// `(r, φ, θ)` for every node in storage order.
    pub fn samples(&self) -> Vec<(f64, f64, f64)> {
        let g = &self.grid;
        (0..g.nr)
            .flat_map(|i| (0..g.nphi).map(move |j| (g.r(i), g.phi(j), self.at(i, j))))
            .collect()
    }

    /// Largest `|θ − θ*|` over the grid.
    pub fn deviation_from_defect_free(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .map(|k| (self.theta[k] - g.phi(k % g.nphi) - FRAC_PI_2).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// Newton steps that needed a diagonal shift, a shortened line-search
    /// step, or a Gauss-Seidel fallback.
    pub damping_events: usize,
    pub converged: bool,
    /// Discrete energy (per `K3`) after each accepted step, starting with
    /// the initial field.
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Max-norm target for the Euler-Lagrange residual (gradient per unit
    /// node area).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TermKind {
    SEdge,
    PhiEdge,
    Cell,
    Surface { offset: f64 },
}

/// One local contribution to the discrete energy.
#[derive(Debug, Clone, Copy)]
struct Term {
    kind: TermKind,
    nodes: [usize; 4],
    len: usize,
    /// Unwrapped `φ` of each node and the `θ` offset across the periodic seam.
    phi: [f64; 4],
    shift: [f64; 4],
    weight: f64,
    /// Position in `(s, φ)` used for corner exclusion.
    centroid: (f64, f64),
}

type Local = (f64, [f64; 4], [[f64; 4]; 4]);

impl Term {
    fn eval(&self, theta: &[f64], delta: f64, h_s: f64, h_phi: f64) -> Local {
        let mut th = [0.0; 4];
        for k in 0..self.len {
            th[k] = theta[self.nodes[k]] + self.shift[k];
        }
        let mut grad = [0.0; 4];
        let mut hess = [[0.0; 4]; 4];
        let w = self.weight;
        match self.kind {
            TermKind::SEdge | TermKind::PhiEdge => {
                let h = if self.kind == TermKind::SEdge {
                    h_s
                } else {
                    h_phi
                };
                let g = (th[1] - th[0]) / h;
                let psi = 0.5 * (th[0] + th[1]) - 0.5 * (self.phi[0] + self.phi[1]);
                let (s2, c2) = (2.0 * psi).sin_cos();
                // S = 1 − δ sin²ψ on s-edges, C = 1 − δ cos²ψ on φ-edges.
                let (f, f1, f2) = if self.kind == TermKind::SEdge {
                    (
                        1.0 - delta * psi.sin().powi(2),
                        -delta * s2,
                        -2.0 * delta * c2,
                    )
                } else {
                    (
                        1.0 - delta * psi.cos().powi(2),
                        delta * s2,
                        2.0 * delta * c2,
                    )
                };
                let a = [-1.0 / h, 1.0 / h];
                let c = [0.5, 0.5];
                for k in 0..2 {
                    grad[k] = w * (0.5 * f1 * c[k] * g * g + f * g * a[k]);
                    for l in 0..2 {
                        hess[k][l] = w
                            * (0.5 * f2 * c[k] * c[l] * g * g
                                + f1 * g * (c[k] * a[l] + c[l] * a[k])
                                + f * a[k] * a[l]);
                    }
                }
                (w * 0.5 * f * g * g, grad, hess)
            }
            TermKind::Cell => {
                // Node order (i, j), (i, j+1), (i+1, j), (i+1, j+1).
                let a_s = [-0.5 / h_s, -0.5 / h_s, 0.5 / h_s, 0.5 / h_s];
                let a_p = [-0.5 / h_phi, 0.5 / h_phi, -0.5 / h_phi, 0.5 / h_phi];
                let gs: f64 = (0..4).map(|k| a_s[k] * th[k]).sum();
                let gp: f64 = (0..4).map(|k| a_p[k] * th[k]).sum();
                let psi = 0.25 * (th.iter().sum::<f64>() - self.phi.iter().sum::<f64>());
                let (s2, c2) = (2.0 * psi).sin_cos();
                let (p, p1, p2) = (0.5 * delta * s2, delta * c2, -2.0 * delta * s2);
                let c = 0.25;
                for k in 0..4 {
                    let dk = a_s[k] * gp + gs * a_p[k];
                    grad[k] = w * (p1 * c * gs * gp + p * dk);
                    for l in 0..4 {
                        let dl = a_s[l] * gp + gs * a_p[l];
                        hess[k][l] = w
                            * (p2 * c * c * gs * gp
                                + p1 * c * (dk + dl)
                                + p * (a_s[k] * a_p[l] + a_p[k] * a_s[l]));
                    }
                }
                (w * p * gs * gp, grad, hess)
            }
            TermKind::Surface { offset } => {
                let x = th[0] - self.phi[0] - offset;
                let (s2, c2) = (2.0 * x).sin_cos();
                grad[0] = w * s2;
                hess[0][0] = 2.0 * w * c2;
                (w * x.sin().powi(2), grad, hess)
            }
        }
    }
}

struct Problem {
    grid: PolarGrid,
    delta: f64,
    terms: Vec<Term>,
    /// Unknown index of each node, `None` for Dirichlet nodes.
    unknown: Vec<Option<usize>>,
    free: Vec<usize>,
    bandwidth: usize,
}

impl Problem {
    fn new(field: &DirectorField, delta: f64) -> Result<Self, PdeError> {
        if !(0.0..=0.99).contains(&delta) {
            return Err(PdeError::SingularAnisotropy { delta });
        }
        let grid = field.grid;
        if field.theta.len() != grid.len() {
            return Err(PdeError::InvalidGrid(format!(
                "field has {} values for {} nodes",
                field.theta.len(),
                grid.len()
            )));
        }
        if let Some(k) = field.theta.iter().position(|v| !v.is_finite()) {
            return Err(PdeError::InvalidGrid(format!("non-finite θ at node {k}")));
        }
        let weak = match field.bc {
            BoundaryCondition::Weak(p) if grid.is_periodic() => Some(p),
            BoundaryCondition::Weak(_) => {
                return Err(PdeError::InvalidBoundary(
                    "weak anchoring is only supported on the full annulus".into(),
                ))
            }
            BoundaryCondition::Dirichlet => None,
        };
        let terms = build_terms(&grid, field.winding, weak);
        let fixed = |i: usize, j: usize| {
            let radial = weak.is_none() && (i == 0 || i + 1 == grid.nr);
            let side = !grid.is_periodic() && (j == 0 || j + 1 == grid.nphi);
            radial || side
        };
        // Order unknowns so that the fast index runs along the shorter
        // direction; periodic grids keep φ fast so the seam stays in-band.
        let phi_fast = grid.is_periodic() || grid.nphi <= grid.nr;
        let mut free = Vec::new();
        if phi_fast {
            for i in 0..grid.nr {
                for j in 0..grid.nphi {
                    if !fixed(i, j) {
                        free.push(grid.node(i, j));
                    }
                }
            }
        } else {
            for j in 0..grid.nphi {
                for i in 0..grid.nr {
                    if !fixed(i, j) {
                        free.push(grid.node(i, j));
                    }
                }
            }
        }
        let mut unknown = vec![None; grid.len()];
        for (k, &p) in free.iter().enumerate() {
            unknown[p] = Some(k);
        }
        let mut bandwidth = 0;
        for t in &terms {
            for a in 0..t.len {
                for b in 0..t.len {
                    if let (Some(x), Some(y)) = (unknown[t.nodes[a]], unknown[t.nodes[b]]) {
                        bandwidth = bandwidth.max(x.abs_diff(y));
                    }
                }
            }
        }
        Ok(Self {
            grid,
            delta,
            terms,
            unknown,
            free,
            bandwidth,
        })
    }

    fn eval(&self, t: &Term, theta: &[f64]) -> Local {
        t.eval(theta, self.delta, self.grid.h_s(), self.grid.h_phi())
    }

    fn energy(&self, theta: &[f64]) -> f64 {
        self.terms.iter().map(|t| self.eval(t, theta).0).sum()
    }

    fn gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut e = 0.0;
        let mut g = vec![0.0; self.free.len()];
        for t in &self.terms {
            let (v, gr, _) = self.eval(t, theta);
            e += v;
            for a in 0..t.len {
                if let Some(k) = self.unknown[t.nodes[a]] {
                    g[k] += gr[a];
                }
            }
        }
        (e, g)
    }

    fn hessian(&self, theta: &[f64]) -> SymBand {
        let mut h = SymBand::zeros(self.free.len(), self.bandwidth);
        for t in &self.terms {
            let (_, _, hs) = self.eval(t, theta);
            for a in 0..t.len {
                let Some(x) = self.unknown[t.nodes[a]] else {
                    continue;
                };
                for b in 0..t.len {
                    let Some(y) = self.unknown[t.nodes[b]] else {
                        continue;
                    };
                    if y <= x {
                        h.add(x, y, hs[a][b]);
                    }
                }
            }
        }
        h
    }

    /// Max-norm of the gradient divided by the quadrature area of each node.
    fn residual(&self, g: &[f64]) -> f64 {
        let area = self.grid.h_s() * self.grid.h_phi();
        self.free
            .iter()
            .zip(g)
            .map(|(&p, gk)| {
                let (i, j) = (p / self.grid.nphi, p % self.grid.nphi);
                (gk / (area * self.grid.row_weight(i) * self.grid.col_weight(j))).abs()
            })
            .fold(0.0, f64::max)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.grid.len()];
        for (k, t) in self.terms.iter().enumerate() {
            for a in 0..t.len {
                adj[t.nodes[a]].push(k);
            }
        }
        adj
    }

    /// One under-relaxed nonlinear Gauss-Seidel sweep; each node update is
    /// kept only if it lowers the energy of the adjacent terms.
    fn gauss_seidel_sweep(&self, theta: &mut [f64], adj: &[Vec<usize>]) {
        for &p in &self.free {
            let local = |theta: &[f64]| -> (f64, f64, f64) {
                let mut acc = (0.0, 0.0, 0.0);
                for &k in &adj[p] {
                    let t = &self.terms[k];
                    let (v, g, h) = self.eval(t, theta);
                    let a = (0..t.len).find(|&a| t.nodes[a] == p).unwrap_or(0);
                    acc.0 += v;
                    acc.1 += g[a];
                    acc.2 += h[a][a];
                }
                acc
            };
            let (e0, g, h) = local(theta);
            let curvature = if h > 0.0 { h } else { h.abs() + g.abs() + 1.0 };
            let mut step = -0.8 * g / curvature;
            let old = theta[p];
            for _ in 0..10 {
                theta[p] = old + step;
                if local(theta).0 <= e0 {
                    break;
                }
                theta[p] = old;
                step *= 0.5;
            }
        }
    }
}

fn build_terms(grid: &PolarGrid, winding: i32, weak: Option<AnchoringParams>) -> Vec<Term> {
    let (nr, nphi) = (grid.nr, grid.nphi);
    let (hs, hp) = (grid.h_s(), grid.h_phi());
    let area = hs * hp;
    let periodic = grid.is_periodic();
    let seam = 2.0 * PI * winding as f64;
    let ncols = if periodic { nphi } else { nphi - 1 };
    // Neighbour to the right of column j, with unwrapped φ and θ offset.
    let right = |j: usize| -> (usize, f64, f64) {
        if periodic && j + 1 == nphi {
            (0, 2.0 * PI, seam)
        } else {
            (j + 1, grid.phi(j + 1), 0.0)
        }
    };
    let mut terms = Vec::new();
    let blank = Term {
        kind: TermKind::SEdge,
        nodes: [0; 4],
        len: 0,
        phi: [0.0; 4],
        shift: [0.0; 4],
        weight: 0.0,
        centroid: (0.0, 0.0),
    };
    for i in 0..nr {
        for j in 0..nphi {
            let p = grid.node(i, j);
            let phi = grid.phi(j);
            if i + 1 < nr {
                terms.push(Term {
                    kind: TermKind::SEdge,
                    nodes: [p, grid.node(i + 1, j), 0, 0],
                    len: 2,
                    phi: [phi, phi, 0.0, 0.0],
                    weight: area * grid.col_weight(j),
                    centroid: (grid.s(i) + 0.5 * hs, phi),
                    ..blank
                });
            }
            if j < ncols {
                let (jr, phi_r, shift) = right(j);
                terms.push(Term {
                    kind: TermKind::PhiEdge,
                    nodes: [p, grid.node(i, jr), 0, 0],
                    len: 2,
                    phi: [phi, phi_r, 0.0, 0.0],
                    shift: [0.0, shift, 0.0, 0.0],
                    weight: area * grid.row_weight(i),
                    centroid: (grid.s(i), phi + 0.5 * hp),
                });
                if i + 1 < nr {
                    terms.push(Term {
                        kind: TermKind::Cell,
                        nodes: [
                            p,
                            grid.node(i, jr),
                            grid.node(i + 1, j),
                            grid.node(i + 1, jr),
                        ],
                        len: 4,
                        phi: [phi, phi_r, phi, phi_r],
                        shift: [0.0, shift, 0.0, shift],
                        weight: area,
                        centroid: (grid.s(i) + 0.5 * hs, phi + 0.5 * hp),
                    });
                }
            }
            if let Some(anchor) = weak {
                if i == 0 || i + 1 == nr {
                    terms.push(Term {
                        kind: TermKind::Surface {
                            offset: anchor.preferred_offset(),
                        },
                        nodes: [p, 0, 0, 0],
                        len: 1,
                        phi: [phi, 0.0, 0.0, 0.0],
                        weight: 0.5 * anchor.alpha() * grid.r(i) * hp,
                        centroid: (grid.s(i), phi),
                        ..blank
                    });
                }
            }
        }
    }
    terms
}

/// Minimizes the discrete energy from `init`, keeping Dirichlet nodes fixed.
pub fn solve_el(
    init: &DirectorField,
    delta: f64,
    opts: &SolveOptions,
) -> Result<(DirectorField, SolveReport), PdeError> {
    let problem = Problem::new(init, delta)?;
    let mut theta = init.theta.clone();
    let mut report = SolveReport::default();
    let (mut energy, mut grad) = problem.gradient(&theta);
    report.energy_history.push(energy);
    let mut residual = problem.residual(&grad);
    let mut adjacency = None;
    while residual > opts.tol && report.iterations < opts.max_iter {
        report.iterations += 1;
        let mut hess = problem.hessian(&theta);
        let mut ldlt = hess.ldlt();
        if !ldlt.is_positive_definite() {
            report.damping_events += 1;
            let scale = hess.norm_inf().max(1e-300);
            let mut shift = 1e-8 * scale;
            loop {
                ldlt = hess.ldlt_shifted(-shift);
                if ldlt.is_positive_definite() {
                    break;
                }
                shift *= 10.0;
                if shift > 1e8 * scale {
                    hess = SymBand::zeros(problem.free.len(), 0);
                    hess.add_to_diagonal(&vec![scale; problem.free.len()]);
                    ldlt = hess.ldlt();
                    break;
                }
            }
        }
        let dir: Vec<f64> = ldlt.solve(&grad).iter().map(|v| -v).collect();
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-10 {
            let mut trial = theta.clone();
            for (k, &p) in problem.free.iter().enumerate() {
                trial[p] += lambda * dir[k];
            }
            let (e, g) = problem.gradient(&trial);
            let r = problem.residual(&g);
            let armijo = e <= energy + 1e-4 * lambda * slope;
            // Near convergence the energy decrease drops below round-off;
            // accept steps that keep the energy flat and shrink the residual.
            let flat = e <= energy + 1e-13 * energy.abs().max(1.0) && r < residual;
            if armijo || flat {
                accepted = Some((trial, e, g, r));
                break;
            }
            lambda *= 0.5;
        }
        if lambda < 1.0 {
            report.damping_events += 1;
        }
        match accepted {
            Some((t, e, g, r)) => {
                theta = t;
                energy = e;
                grad = g;
                residual = r;
            }
            None => {
                report.damping_events += 1;
                let adj = adjacency.get_or_insert_with(|| problem.adjacency());
                for _ in 0..20 {
                    problem.gauss_seidel_sweep(&mut theta, adj);
                }
                let (e, g) = problem.gradient(&theta);
                energy = e;
                grad = g;
                residual = problem.residual(&grad);
            }
        }
        report.energy_history.push(energy);
    }
    report.final_residual = residual;
    report.converged = residual <= opts.tol;
    if !report.converged {
        return Err(PdeError::NewtonDiverged(Box::new(report)));
    }
    Ok((
        DirectorField {
            theta,
            ..init.clone()
        },
        report,
    ))
}

/// Discrete energy of a field, including the anchoring energy under weak
/// boundary conditions, in units of `K3`.
pub fn discrete_energy(field: &DirectorField, delta: f64) -> Result<f64, PdeError> {
    let problem = Problem::new(field, delta)?;
    Ok(problem.energy(&field.theta))
}

/// Bulk Oseen-Frank energy `K3·∫∫ e dA` by the second-order quadrature
/// implicit in the discretization.
///
/// With `eps` on a sector grid the energy is the core-regularized value
/// `K3(A_out log(1/ε) + A_in log(b/ε) + C)` from [`corner_energy_fit`],
/// i.e. the energy outside physical disks of radius `ε` at the corners.
pub fn of_energy_2d(
    field: &DirectorField,
    delta: f64,
    k3: f64,
    eps: Option<f64>,
) -> Result<f64, PdeError> {
    let problem = Problem::new(field, delta)?;
    match (eps, field.grid.domain) {
        (Some(eps), Domain::Sector { .. }) => {
            let fit = corner_energy_fit(field, delta)?;
            let b = field.grid.b;
            Ok(k3 * (fit.a_outer * (1.0 / eps).ln() + fit.a_inner * (b / eps).ln() + fit.constant))
        }
        _ => {
            let bulk: f64 = problem
                .terms
                .iter()
                .filter(|t| !matches!(t.kind, TermKind::Surface { .. }))
                .map(|t| problem.eval(t, &field.theta).0)
                .sum();
            Ok(k3 * bulk)
        }
    }
}

/// Logarithmic decomposition of the energy near the four sector corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerEnergyFit {
    /// Coefficient of `log(1/ρ)` for the two outer corners together, from
    /// the angular corner problem.
    pub a_outer: f64,
    pub a_inner: f64,
    pub constant: f64,
    /// `(A_out + A_in)/π`, the defect-core prefactor per `K3π`.
    pub log_coefficient: f64,
    /// Finite part `(C − A_in log(1/b))/π` of `E/(K3π)`.
    pub normalized_energy: f64,
    /// Root-mean-square misfit of the least-squares model.
    pub misfit: f64,
}

/// Splits the energy outside `(s, φ)`-disks of radii `ρ_out` (outer
/// corners) and `ρ_in` (inner corners) into
/// `A_out log(1/ρ_out) + A_in log(1/ρ_in) + C` plus terms linear and
/// quadratic in the radii. The `A` come from [`corner_coefficient`]; `C`
/// and the polynomial terms are fitted by least squares.
///
/// Since the map to the plane is conformal with scale `r`, a physical core
/// of radius `ε` corresponds to `ρ_out ≈ ε` and `ρ_in ≈ ε/b`.
/// The disks are smooth cutoffs of relative width one, which keeps the
/// lattice sampling error of order `(h/ρ)²`.
pub fn corner_energy_fit(field: &DirectorField, delta: f64) -> Result<CornerEnergyFit, PdeError> {
    let problem = Problem::new(field, delta)?;
    let grid = field.grid;
    if grid.is_periodic() {
        return Err(PdeError::InvalidGrid(
            "corner energies need a sector grid".into(),
        ));
    }
    let (hs, hp) = (grid.h_s(), grid.h_phi());
    let h = hs.max(hp);
    let len = -grid.b.ln();
    let rho_max = len.min(grid.height()) / 4.0;
    let rho_min = 5.0 * h;
    if rho_max < 2.0 * rho_min {
        return Err(PdeError::FitUnavailable(40));
    }
    let (s0, height) = (grid.b.ln(), grid.height());
    let pieces: Vec<(f64, f64, f64)> = problem
        .terms
        .iter()
        .map(|t| {
            let (s, phi) = t.centroid;
            let d_in = (s - s0).hypot(phi).min((s - s0).hypot(height - phi));
            let d_out = s.hypot(phi).min(s.hypot(height - phi));
            (problem.eval(t, &field.theta).0, d_out, d_in)
        })
        .collect();
    let radii: Vec<f64> = (0..6)
        .map(|k| rho_min * (rho_max / rho_min).powf(k as f64 / 5.0))
        .collect();
    let (a_outer, a_inner) = corner_log_coefficients(field, delta)?;
    let kappa = cutoff_log_shift();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &ro in &radii {
        for &ri in &radii {
            let e: f64 = pieces
                .iter()
                .map(|&(v, d_out, d_in)| v * cutoff(d_out / ro) * cutoff(d_in / ri))
                .sum();
            let singular =
                a_outer * ((1.0 / ro).ln() + kappa) + a_inner * ((1.0 / ri).ln() + kappa);
            rows.push(vec![1.0, ro, ri, ro * ro, ri * ri]);
            rhs.push(e - singular);
        }
    }
    let coef = least_squares(&rows, &rhs);
    let misfit = (rows
        .iter()
        .zip(&rhs)
        .map(|(row, y)| (row.iter().zip(&coef).map(|(a, c)| a * c).sum::<f64>() - y).powi(2))
        .sum::<f64>()
        / rhs.len() as f64)
        .sqrt();
    let constant = coef[0];
    Ok(CornerEnergyFit {
        a_outer,
        a_inner,
        constant,
        log_coefficient: (a_outer + a_inner) / PI,
        normalized_energy: (constant - a_inner * (1.0 / grid.b).ln()) / PI,
        misfit,
    })
}

/// Log coefficients `(A_out, A_in)` of the outer and inner corner pairs.
///
/// Near a corner `c` the field approaches `θ = Θ(ω)` in local polar
/// coordinates `(ρ, ω)` of the `(s, φ)` plane, where the energy density is
/// `Θ'²(1 − δ cos²(Θ − φ_c − ω))/(2ρ²)`. The coefficient of `log(1/ρ)` is
/// the minimum of the angular energy with the edge values of the field,
/// read off by linear extrapolation along each edge.
fn corner_log_coefficients(field: &DirectorField, delta: f64) -> Result<(f64, f64), PdeError> {
    let g = &field.grid;
    let (nr, np) = (g.nr, g.nphi);
    let edge = |i0: usize, j0: usize, di: isize, dj: isize| {
        let at = |k: isize| {
            field.at(
                (i0 as isize + k * di) as usize,
                (j0 as isize + k * dj) as usize,
            )
        };
        2.0 * at(1) - at(2)
    };
    let h = g.height();
    let (top, last) = (nr - 1, np - 1);
    let q = FRAC_PI_2;
    // (φ_c, ω0, Θ(ω0), ω1, Θ(ω1)) for inner (s = ln b) then outer corners.
    let inner = [
        (0.0, 0.0, edge(0, 0, 1, 0), q, edge(0, 0, 0, 1)),
        (
            h,
            3.0 * q,
            edge(0, last, 0, -1),
            4.0 * q,
            edge(0, last, 1, 0),
        ),
    ];
    let outer = [
        (0.0, q, edge(top, 0, 0, 1), 2.0 * q, edge(top, 0, -1, 0)),
        (
            h,
            2.0 * q,
            edge(top, last, -1, 0),
            3.0 * q,
            edge(top, last, 0, -1),
        ),
    ];
    let sum = |corners: &[(f64, f64, f64, f64, f64)]| -> Result<f64, PdeError> {
        corners
            .iter()
            .map(|&(pc, w0, t0, w1, t1)| corner_coefficient(delta, pc, (w0, t0), (w1, t1)))
            .sum()
    };
    Ok((sum(&outer)?, sum(&inner)?))
}

/// `min ∫ ½Θ'²(1 − δ cos²(Θ − φ_c − ω)) dω` over `Θ` with the given end
/// values, by Newton iteration on a uniform midpoint discretization.
pub fn corner_coefficient(
    delta: f64,
    phi_c: f64,
    start: (f64, f64),
    end: (f64, f64),
) -> Result<f64, PdeError> {
    const CELLS: usize = 400;
    let h = (end.0 - start.0) / CELLS as f64;
    let mut theta: Vec<f64> = (0..=CELLS)
        .map(|k| start.1 + (end.1 - start.1) * k as f64 / CELLS as f64)
        .collect();
    let terms: Vec<Term> = (0..CELLS)
        .map(|k| Term {
            kind: TermKind::PhiEdge,
            nodes: [k, k + 1, 0, 0],
            len: 2,
            phi: [
                phi_c + start.0 + k as f64 * h,
                phi_c + start.0 + (k + 1) as f64 * h,
                0.0,
                0.0,
            ],
            shift: [0.0; 4],
            weight: h,
            centroid: (0.0, 0.0),
        })
        .collect();
    let energy =
        |theta: &[f64]| -> f64 { terms.iter().map(|t| t.eval(theta, delta, h, h).0).sum() };
    for _ in 0..100 {
        let mut grad = vec![0.0; CELLS - 1];
        let mut hess = SymBand::zeros(CELLS - 1, 1);
        for t in &terms {
            let (_, g, hs) = t.eval(&theta, delta, h, h);
            for a in 0..2 {
                let na = t.nodes[a];
                if na == 0 || na == CELLS {
                    continue;
                }
                grad[na - 1] += g[a];
                for b in 0..2 {
                    let nb = t.nodes[b];
                    if nb != 0 && nb != CELLS && nb <= na {
                        hess.add(na - 1, nb - 1, hs[a][b]);
                    }
                }
            }
        }
        let gnorm = grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) / h;
        if gnorm < 1e-9 * (end.1 - start.1).abs().max(1.0) {
            return Ok(energy(&theta));
        }
        let mut shift = 0.0;
        let mut ldlt = hess.ldlt();
        while !ldlt.is_positive_definite() {
            shift = if shift == 0.0 {
                1e-8 * hess.norm_inf()
            } else {
                10.0 * shift
            };
            ldlt = hess.ldlt_shifted(-shift);
        }
        let step = ldlt.solve(&grad);
        let e0 = energy(&theta);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = theta
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    if k == 0 || k == CELLS {
                        v
                    } else {
                        v - lambda * step[k - 1]
                    }
                })
                .collect();
            if energy(&trial) <= e0 + 1e-14 * e0.abs() || lambda < 1e-8 {
                theta = trial;
                break;
            }
            lambda *= 0.5;
        }
    }
    Err(PdeError::Numerics(NumericsError::NonConvergence {
        what: "corner angular profile",
        iterations: 100,
        estimate: energy(&theta),
    }))
}

/// Smooth cutoff rising from 0 at `u = 1/2` to 1 at `u = 3/2`.
fn cutoff(u: f64) -> f64 {
    let x = (u - 0.5).clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// `−∫ χ'(u) ln u du`: with the smooth cutoff `χ(d/ρ)` a `1/d²` density
/// contributes `A(log(1/ρ) + κ)` instead of `A log(1/ρ)`.
fn cutoff_log_shift() -> f64 {
    let (nodes, weights) = gauss_legendre(32);
    nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| {
            let u = 1.0 + 0.5 * x;
            let t = u - 0.5;
            let dchi = 30.0 * t * t * (1.0 - t) * (1.0 - t);
            -0.5 * w * dchi * u.ln()
        })
        .sum()
}

/// Least squares through the normal equations (few, well-scaled unknowns).
fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let m = rows[0].len();
    let mut a = vec![vec![0.0; m]; m];
    let mut y = vec![0.0; m];
    for (row, v) in rows.iter().zip(rhs) {
        for k in 0..m {
            y[k] += row[k] * v;
            for l in 0..m {
                a[k][l] += row[k] * row[l];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &z| a[x][col].abs().total_cmp(&a[z][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        y.swap(col, piv);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= f * a[col][k];
            }
            y[row] -= f * y[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (y[row] - s) / a[row][row];
    }
    x
}

/// One point of a pitchfork scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub delta: f64,
    /// `max |θ − θ*|` of the converged state.
    pub amplitude: f64,
    pub iterations: usize,
}

/// Default scan grid: 161 radial nodes, 16 angular nodes (the radial
/// branch is independent of `φ`).
pub fn bifurcation_scan(
    b: f64,
    deltas: &[f64],
    seed_amplitude: f64,
) -> Result<Vec<BifurcationPoint>, PdeError> {
    bifurcation_scan_on(PolarGrid::annulus(b, 161, 16)?, deltas, seed_amplitude)
}

/// Solves from `θ* + seed·sin(π ln r / ln b)` with tangent Dirichlet data at
/// each `δ`; the scan runs in parallel and keeps the input order.
pub fn bifurcation_scan_on(
    grid: PolarGrid,
    deltas: &[f64],
    seed: f64,
) -> Result<Vec<BifurcationPoint>, PdeError> {
    let lb = grid.b.ln();
    let init = DirectorField::from_fn(grid, BoundaryCondition::Dirichlet, |r, phi| {
        phi + FRAC_PI_2 + seed * (PI * r.ln() / lb).sin()
    })?;
    let opts = SolveOptions {
        tol: 1e-10,
        max_iter: 400,
    };
    deltas
        .par_iter()
        .map(|&delta| {
            let (field, report) = solve_el(&init, delta, &opts)?;
            Ok(BifurcationPoint {
                delta,
                amplitude: field.deviation_from_defect_free(),
                iterations: report.iterations,
            })
        })
        .collect()
}

/// Onset of a supercritical branch from a scan: the root of the
/// least-squares line through `(δ, A²)` over points with `A > min_amplitude`.
pub fn pitchfork_onset(points: &[BifurcationPoint], min_amplitude: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.amplitude > min_amplitude)
        .map(|p| (p.delta, p.amplitude.powi(2)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 || sxy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(mx - my / slope)
}

/// Smallest eigenvalue of the discrete energy Hessian at `base`, restricted
/// to perturbations `f(r) cos kφ + g(r) sin kφ` on the full annulus.
///
/// The mass is the nodal quadrature of `∫∫ η² ds dφ`. For a `φ`-equivariant
/// base such as `θ*` the Fourier modes decouple exactly; otherwise this is
/// the Galerkin restriction to azimuthal order `k`.
pub fn stability_probe(base: &DirectorField, delta: f64, k: u32) -> Result<f64, PdeError> {
    let grid = base.grid;
    if !grid.is_periodic() {
        return Err(PdeError::InvalidGrid(
            "stability probes need the full annulus".into(),
        ));
    }
    let problem = Problem::new(base, delta)?;
    let nb = if k == 0 { 1 } else { 2 };
    let rows: Vec<usize> = (0..grid.nr)
        .filter(|&i| problem.unknown[grid.node(i, 0)].is_some())
        .collect();
    let mut row_index = vec![None; grid.nr];
    for (m, &i) in rows.iter().enumerate() {
        row_index[i] = Some(m);
    }
    let basis = |a: usize, j: usize| {
        let x = k as f64 * grid.phi(j);
        if a == 0 {
            x.cos()
        } else {
            x.sin()
        }
    };
    let mut form = SymBand::zeros(rows.len() * nb, 2 * nb - 1);
    for t in &problem.terms {
        let (_, _, hs) = problem.eval(t, &base.theta);
        for p in 0..t.len {
            let (ip, jp) = (t.nodes[p] / grid.nphi, t.nodes[p] % grid.nphi);
            let Some(mp) = row_index[ip] else { continue };
            for q in 0..t.len {
                let (iq, jq) = (t.nodes[q] / grid.nphi, t.nodes[q] % grid.nphi);
                let Some(mq) = row_index[iq] else { continue };
                for a in 0..nb {
                    for c in 0..nb {
                        let (x, y) = (mp * nb + a, mq * nb + c);
                        if y <= x {
                            form.add(x, y, basis(a, jp) * hs[p][q] * basis(c, jq));
                        }
                    }
                }
            }
        }
    }
    let area = grid.h_s() * grid.h_phi();
    let mass: Vec<f64> = rows
        .iter()
        .flat_map(|&i| {
            (0..nb).map(move |a| {
                area * grid.row_weight(i) * (0..grid.nphi).map(|j| basis(a, j).powi(2)).sum::<f64>()
            })
        })
        .collect();
    Ok(min_eigenvalue(&form, &mass)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{state_coefficients, StateKind, Tiling};
    use crate::of_strong::{delta_n, pitchfork_amplitude};
    use crate::of_weak::delta_weak;

    fn annulus(b: f64, nr: usize, nphi: usize) -> PolarGrid {
        PolarGrid::annulus(b, nr, nphi).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = annulus(0.5, 21, 32);
        assert_eq!(g.r(0), 0.5);
        assert_eq!(g.r(20), 1.0);
        assert!((g.h_phi() - 2.0 * PI / 32.0).abs() < 1e-15);
        let s = PolarGrid::sector(0.5, 4, 21, 17).unwrap();
        assert!((s.phi(16) - PI / 2.0).abs() < 1e-15);
        assert!(PolarGrid::annulus(0.5, 8, 32).is_err());
    }

    #[test]
    fn defect_free_energy_is_exact() {
        for delta in [0.0, 0.5, 0.9] {
            let f = DirectorField::defect_free(annulus(0.3, 21, 16), BoundaryCondition::Dirichlet)
                .unwrap();
            let e = of_energy_2d(&f, delta, 2.0, None).unwrap();
            assert!((e - 2.0 * PI * (1.0 / 0.3f64).ln()).abs() < 1e-10, "{e}");
        }
    }

    #[test]
    fn defect_free_is_fixed_point() {
        let weak = BoundaryCondition::Weak(AnchoringParams::tangent(0.7).unwrap());
        for bc in [BoundaryCondition::Dirichlet, weak] {
            for delta in [0.0, 0.5, 0.9] {
                let init = DirectorField::defect_free(annulus(0.4, 24, 16), bc).unwrap();
                let (f, rep) = solve_el(&init, delta, &SolveOptions::default()).unwrap();
                assert_eq!(rep.iterations, 0, "{bc:?} δ={delta}");
                assert!(f.deviation_from_defect_free() < 1e-14);
            }
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let grid = PolarGrid::annulus(0.4, 16, 16).unwrap();
        let weak = BoundaryCondition::Weak(AnchoringParams::tangent(1.3).unwrap());
        let f = DirectorField::from_fn(grid, weak, |r, phi| {
            phi + 1.2 + 0.3 * (3.0 * r).sin() * (2.0 * phi).cos()
        })
        .unwrap();
        let p = Problem::new(&f, 0.6).unwrap();
        let (_, g) = p.gradient(&f.theta);
        let h = p.hessian(&f.theta);
        let eps = 1e-6;
        for &k in &[0usize, 17, 100, 255] {
            let node = p.free[k];
            let mut tp = f.theta.clone();
            tp[node] += eps;
            let mut tm = f.theta.clone();
            tm[node] -= eps;
            let fd = (p.energy(&tp) - p.energy(&tm)) / (2.0 * eps);
            assert!(
                (fd - g[k]).abs() < 1e-7 * g[k].abs().max(1.0),
                "grad {k}: {fd} vs {}",
                g[k]
            );
            let (_, gp) = p.gradient(&tp);
            let (_, gm) = p.gradient(&tm);
            for &l in &[
                k,
                (k + 1) % p.free.len(),
                (k + 16) % p.free.len(),
                (k + 17) % p.free.len(),
            ] {
                let fd = (gp[l] - gm[l]) / (2.0 * eps);
                let exact = if l.abs_diff(k) <= p.bandwidth {
                    h.get(k.max(l), k.min(l))
                } else {
                    0.0
                };
                assert!(
                    (fd - exact).abs() < 1e-5 * exact.abs().max(1.0),
                    "hess ({k},{l}): {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn seam_is_consistent() {
        // A rotated copy of a field has the same energy.
        let grid = annulus(0.5, 16, 32);
        let base = |r: f64, phi: f64| {
            phi + FRAC_PI_2 + 0.2 * (PI * r.ln() / 0.5f64.ln()).sin() * phi.cos()
        };
        let f1 = DirectorField::from_fn(grid, BoundaryCondition::Dirichlet, base).unwrap();
        let shift = 5.0 * grid.h_phi();
        let f2 = DirectorField::from_fn(grid, BoundaryCondition::Dirichlet, |r, phi| {
            let p = (phi - shift).rem_euclid(2.0 * PI);
            let wrap = if phi - shift < 0.0 { -2.0 * PI } else { 0.0 };
            base(r, p) + wrap + shift
        })
        .unwrap();
        let e1 = discrete_energy(&f1, 0.7).unwrap();
        let e2 = discrete_energy(&f2, 0.7).unwrap();
        assert!((e1 - e2).abs() < 1e-11 * e1, "{e1} vs {e2}");
    }

    #[test]
    fn one_constant_sector_matches_series() {
        let spec = state_coefficients(StateKind::U2, 4, Tiling::Sector).unwrap();
        let errors: Vec<f64> = [1usize, 2]
            .iter()
            .map(|&m| {
                let grid = PolarGrid::sector(0.5, 4, 16 * m + 1, 32 * m + 1).unwrap();
                let exact = DirectorField::defect_state(grid, &spec).unwrap();
                let mut init = exact.clone();
                for i in 1..grid.nr - 1 {
                    for j in 1..grid.nphi - 1 {
                        init.theta[grid.node(i, j)] = 0.0;
                    }
                }
                let (sol, _) = solve_el(&init, 0.0, &SolveOptions::default()).unwrap();
                // Compare on the coarse nodes away from the corners.
                let mut worst = 0.0f64;
                for i in (4..=12).map(|i| i * m) {
                    for j in (8..=24).map(|j| j * m) {
                        worst = worst.max((sol.at(i, j) - exact.at(i, j)).abs());
                    }
                }
                worst
            })
            .collect();
        assert!(errors[1] < errors[0] / 3.5, "{errors:?}");
    }

    #[test]
    fn energy_decreases_during_solve() {
        let spec = state_coefficients(StateKind::U1, 2, Tiling::Sector).unwrap();
        let grid = PolarGrid::sector(0.3, 2, 21, 31).unwrap();
        let init = DirectorField::defect_state(grid, &spec).unwrap();
        let (_, rep) = solve_el(&init, 0.8, &SolveOptions::default()).unwrap();
        assert!(rep.iterations > 0);
        for w in rep.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }

    #[test]
    fn probe_null_mode_at_critical_anisotropy() {
        let b: f64 = 0.3;
        let base =
            DirectorField::defect_free(annulus(b, 201, 16), BoundaryCondition::Dirichlet).unwrap();
        let d1 = delta_n(b, 1);
        let at = stability_probe(&base, d1, 0).unwrap();
        assert!(at.abs() < 1e-3, "{at}");
        assert!(stability_probe(&base, d1 - 0.01, 0).unwrap() > 0.0);
        assert!(stability_probe(&base, d1 + 0.01, 0).unwrap() < 0.0);
        for k in 0..4 {
            assert!(stability_probe(&base, 0.0, k).unwrap() > 0.0);
        }
    }

    #[test]
    fn probe_agrees_with_weak_roots() {
        let (alpha, b) = (0.5, 0.5);
        let weak = BoundaryCondition::Weak(AnchoringParams::tangent(alpha).unwrap());
        let base = DirectorField::defect_free(annulus(b, 101, 64), weak).unwrap();
        let d11 = delta_weak(alpha, b, 1).unwrap();
        assert!(stability_probe(&base, d11 + 0.005, 1).unwrap() < 0.0);
        assert!(stability_probe(&base, d11 - 0.005, 1).unwrap() > 0.0);
        let d10 = delta_weak(alpha, b, 0).unwrap();
        assert!(stability_probe(&base, d10 + 0.005, 0).unwrap() < 0.0);
        assert!(stability_probe(&base, d10 - 0.005, 0).unwrap() > 0.0);
    }

    #[test]
    fn scan_below_and_above_onset() {
        let b = 0.2;
        let d1 = delta_n(b, 1);
        let pts = bifurcation_scan(b, &[d1 - 0.02, d1 + 0.01], 0.05).unwrap();
        assert!(pts[0].amplitude < 1e-6, "{pts:?}");
        let expected = pitchfork_amplitude(d1 + 0.01, b).unwrap();
        assert!(
            (pts[1].amplitude - expected).abs() < 0.1 * expected,
            "{} vs {expected}",
            pts[1].amplitude
        );
    }

    #[test]
    fn corner_coefficient_matches_angular_minimum() {
        // One-constant value (Δθ)²/π and independent minimizations at δ = 0.9.
        let q = FRAC_PI_2;
        let c = corner_coefficient(0.0, 0.0, (0.0, 0.0), (q, 1.3)).unwrap();
        assert!((c - 1.3f64.powi(2) / PI).abs() < 1e-12);
        let plus = corner_coefficient(0.9, 0.0, (0.0, 0.0), (q, q)).unwrap();
        assert!((plus - 0.0785398163397448).abs() < 1e-9, "{plus}");
        let minus = corner_coefficient(0.9, 0.0, (0.0, 0.0), (q, -q)).unwrap();
        assert!((minus - 0.3320443).abs() < 2e-5, "{minus}");
    }

    #[test]
    fn corner_fit_reproduces_one_constant_energy() {
        let spec = state_coefficients(StateKind::U2, 4, Tiling::Sector).unwrap();
        let grid = PolarGrid::sector(0.5, 4, 70, 158).unwrap();
        let init = DirectorField::defect_state(grid, &spec).unwrap();
        let (sol, _) = solve_el(&init, 0.0, &SolveOptions::default()).unwrap();
        let fit = corner_energy_fit(&sol, 0.0).unwrap();
        let closed = harmonic::normalized_energy(StateKind::U2, 4, 0.5).unwrap();
        assert!((fit.log_coefficient - 1.0).abs() < 0.01, "{fit:?}");
        assert!(
            (fit.normalized_energy - closed).abs() < 0.01 * closed.abs(),
            "{fit:?} vs {closed}"
        );
        let eps = 1e-3;
        let e = of_energy_2d(&sol, 0.0, 1.0, Some(eps)).unwrap();
        let expected = PI * ((1.0 / eps).ln() + closed);
        assert!((e - expected).abs() < 0.01 * expected);
    }
}
