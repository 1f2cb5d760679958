use serde::{Deserialize, Serialize};

use super::{solve_tridiagonal, NumericsError};

/// Values sampled on a strictly increasing set of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self, NumericsError> {
        if nodes.len() != values.len() {
            return Err(NumericsError::InvalidInput(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(NumericsError::InvalidInput(
                "nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self { nodes, values })
    }

    /// Samples `f` on `n` uniformly spaced nodes spanning `[a, b]`.
    pub fn uniform<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Self {
        assert!(
            n >= 2 && a < b,
            "need at least two nodes on a nonempty interval"
        );
        let h = (b - a) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|i| if i + 1 == n { b } else { a + h * i as f64 })
            .collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self { nodes, values }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Uniform spacing, or `None` when the nodes are not equispaced.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let n = self.nodes.len();
        if n < 2 {
            return None;
        }
        let h = (self.nodes[n - 1] - self.nodes[0]) / (n - 1) as f64;
        let uniform = self
            .nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of `y'' = F(x, y, y')`.
pub trait SecondOrderOde {
    fn rhs(&self, x: f64, y: f64, dy: f64) -> f64;

    /// `(∂F/∂y, ∂F/∂y')`; the default uses central differences.
    fn partials(&self, x: f64, y: f64, dy: f64) -> (f64, f64) {
        let hy = 1e-6 * (1.0 + y.abs());
        let hd = 1e-6 * (1.0 + dy.abs());
        (
            (self.rhs(x, y + hy, dy) - self.rhs(x, y - hy, dy)) / (2.0 * hy),
            (self.rhs(x, y, dy + hd) - self.rhs(x, y, dy - hd)) / (2.0 * hd),
        )
    }

    /// Whether `F` ignores `y'`, which the Numerov scheme requires.
    fn slope_free(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Second-order central differences.
    Central,
    /// Fourth-order Numerov scheme for `y'' = F(x, y)`.
    Numerov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpOptions {
    pub scheme: Scheme,
    /// Target for the max-norm of the discrete residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Central,
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BvpReport {
    pub iterations: usize,
    /// Residual max-norm before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    /// Accepted damping factor of each Newton step.
    pub damping: Vec<f64>,
    pub converged: bool,
}

impl BvpReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Discretization<'a, O: ?Sized> {
    ode: &'a O,
    x: &'a [f64],
    h: f64,
    scheme: Scheme,
}

impl<O: SecondOrderOde + ?Sized> Discretization<'_, O> {
    /// Interior residuals; endpoints are pinned by the Dirichlet data.
    fn residual(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let h2 = self.h * self.h;
        let mut r = vec![0.0; n];
        match self.scheme {
            Scheme::Central => {
                for i in 1..n - 1 {
                    let dy = (y[i + 1] - y[i - 1]) / (2.0 * self.h);
                    r[i] =
                        (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2 - self.ode.rhs(self.x[i], y[i], dy);
                }
            }
            Scheme::Numerov => {
                let f: Vec<f64> = (0..n).map(|i| self.ode.rhs(self.x[i], y[i], 0.0)).collect();
                for i in 1..n - 1 {
                    r[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2
                        - (f[i + 1] + 10.0 * f[i] + f[i - 1]) / 12.0;
                }
            }
        }
        r
    }

    /// Newton correction for the interior unknowns.
    fn newton_step(&self, y: &[f64], r: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = y.len();
        let m = n - 2;
        let h = self.h;
        let h2 = h * h;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        match self.scheme {
            Scheme::Central => {
                for k in 0..m {
                    let i = k + 1;
                    let dy = (y[i + 1] - y[i - 1]) / (2.0 * h);
                    let (fy, fd) = self.ode.partials(self.x[i], y[i], dy);
                    lower[k] = 1.0 / h2 + fd / (2.0 * h);
                    diag[k] = -2.0 / h2 - fy;
                    upper[k] = 1.0 / h2 - fd / (2.0 * h);
                }
            }
            Scheme::Numerov => {
                let fy: Vec<f64> = (0..n)
                    .map(|i| self.ode.partials(self.x[i], y[i], 0.0).0)
                    .collect();
                for k in 0..m {
                    let i = k + 1;
                    lower[k] = 1.0 / h2 - fy[i - 1] / 12.0;
                    diag[k] = -2.0 / h2 - 10.0 * fy[i] / 12.0;
                    upper[k] = 1.0 / h2 - fy[i + 1] / 12.0;
                }
            }
        }
        let rhs: Vec<f64> = r[1..n - 1].iter().map(|v| -v).collect();
        let dx = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        let mut step = vec![0.0; n];
        step[1..n - 1].copy_from_slice(&dx);
        Ok(step)
    }
}

/// Solves `y'' = F(x, y, y')` with Dirichlet data `y(a) = left`, `y(b) = right`
/// on the uniform grid carried by `init`, by damped Newton iteration.
///
/// Each Newton step is halved until the residual max-norm decreases; the
/// iteration stops once that norm is below `opts.tol`, or when the step has
/// shrunk to round-off while the residual sits at the round-off floor of the
/// difference quotient.
pub fn solve_bvp<O: SecondOrderOde + ?Sized>(
    ode: &O,
    left: f64,
    right: f64,
    init: &GridFunction,
    opts: &BvpOptions,
) -> Result<(GridFunction, BvpReport), NumericsError> {
    let n = init.len();
    if n < 3 {
        return Err(NumericsError::InvalidInput(
            "need at least three nodes".into(),
        ));
    }
    let h = init
        .uniform_spacing()
        .ok_or_else(|| NumericsError::InvalidInput("solve_bvp needs a uniform grid".into()))?;
    if opts.scheme == Scheme::Numerov && !ode.slope_free() {
        return Err(NumericsError::InvalidInput(
            "Numerov scheme requires a right-hand side independent of y'".into(),
        ));
    }
    let disc = Discretization {
        ode,
        x: &init.nodes,
        h,
        scheme: opts.scheme,
    };
    let mut y = init.values.clone();
    y[0] = left;
    y[n - 1] = right;

    let scale = max_norm(&y).max(1.0);
    let floor = 64.0 * f64::EPSILON * scale / (h * h);
    let mut report = BvpReport::default();
    let mut r = disc.residual(&y);
    let mut rn = max_norm(&r);
    report.residual_history.push(rn);
    if !rn.is_finite() {
        return Err(NumericsError::NonFinite { at: init.nodes[0] });
    }
    while rn > opts.tol {
        if report.iterations >= opts.max_iter {
            return Err(NumericsError::NewtonDiverged(report));
        }
        let step = disc.newton_step(&y, &r)?;
        let step_norm = max_norm(&step);
        let mut lambda = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = y.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            let tr = disc.residual(&trial);
            let trn = max_norm(&tr);
            if trn.is_finite() && trn < rn {
                break Some((trial, tr, trn));
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                break None;
            }
        };
        report.iterations += 1;
        match accepted {
            Some((trial, tr, trn)) => {
                y = trial;
                r = tr;
                rn = trn;
                report.damping.push(lambda);
                report.residual_history.push(rn);
            }
            None => {
                // No decrease possible: either round-off dominates or Newton failed.
                if rn <= floor.max(opts.tol) || step_norm <= 1e-14 * scale {
                    break;
                }
                return Err(NumericsError::NewtonDiverged(report));
            }
        }
        if step_norm * lambda <= 4.0 * f64::EPSILON * scale && rn <= floor.max(opts.tol) {
            break;
        }
    }
    report.converged = true;
    Ok((
        GridFunction {
            nodes: init.nodes.clone(),
            values: y,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear;
    impl SecondOrderOde for Linear {
        // y'' = y on [0, 1], y(0) = 0, y(1) = sinh 1  →  y = sinh x.
        fn rhs(&self, _x: f64, y: f64, _dy: f64) -> f64 {
            y
        }
        fn slope_free(&self) -> bool {
            true
        }
    }

    struct Bratu;
    impl SecondOrderOde for Bratu {
        // y'' + e^y = 0 with y(0) = y(1) = 0 (lower branch, λ = 1).
        fn rhs(&self, _x: f64, y: f64, _dy: f64) -> f64 {
            -y.exp()
        }
        fn partials(&self, _x: f64, y: f64, _dy: f64) -> (f64, f64) {
            (-y.exp(), 0.0)
        }
        fn slope_free(&self) -> bool {
            true
        }
    }

    struct Damped;
    impl SecondOrderOde for Damped {
        // y'' = -y' with y(0)=0, y(1)=1 - e^{-1}  →  y = 1 - e^{-x}.
        fn rhs(&self, _x: f64, _y: f64, dy: f64) -> f64 {
            -dy
        }
    }

    fn sinh_error(n: usize, scheme: Scheme) -> f64 {
        let init = GridFunction::uniform(0.0, 1.0, n, |x| x);
        let opts = BvpOptions {
            scheme,
            ..Default::default()
        };
        let (sol, rep) = solve_bvp(&Linear, 0.0, 1f64.sinh(), &init, &opts).unwrap();
        assert!(rep.converged);
        sol.nodes
            .iter()
            .zip(&sol.values)
            .map(|(x, y)| (y - x.sinh()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn central_scheme_is_second_order() {
        let e1 = sinh_error(41, Scheme::Central);
        let e2 = sinh_error(81, Scheme::Central);
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn numerov_scheme_is_fourth_order() {
        let e1 = sinh_error(21, Scheme::Numerov);
        let e2 = sinh_error(41, Scheme::Numerov);
        assert!(e1 / e2 >= 14.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn slope_dependent_problem() {
        let init = GridFunction::uniform(0.0, 1.0, 201, |x| x);
        let (sol, _) = solve_bvp(
            &Damped,
            0.0,
            1.0 - (-1f64).exp(),
            &init,
            &BvpOptions::default(),
        )
        .unwrap();
        let err = sol
            .nodes
            .iter()
            .zip(&sol.values)
            .map(|(x, y)| (y - (1.0 - (-x).exp())).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5);
    }

    #[test]
    fn bratu_residual_decreases_monotonically() {
        let init = GridFunction::uniform(0.0, 1.0, 101, |_| 0.0);
        let opts = BvpOptions {
            scheme: Scheme::Numerov,
            ..Default::default()
        };
        let (sol, rep) = solve_bvp(&Bratu, 0.0, 0.0, &init, &opts).unwrap();
        assert!(rep.residual_history.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.final_residual() <= 1e-8);
        // Lower Bratu branch: y(x) = -2 ln(cosh((x - 1/2)θ/2) / cosh(θ/4))
        // with θ = √2 cosh(θ/4), so y(1/2) = 2 ln cosh(θ/4).
        let mut theta: f64 = 1.0;
        for _ in 0..200 {
            theta = 2f64.sqrt() * (theta / 4.0).cosh();
        }
        let exact_mid = 2.0 * (theta / 4.0).cosh().ln();
        assert!(
            (sol.values[50] - exact_mid).abs() < 1e-7,
            "{} vs {}",
            sol.values[50],
            exact_mid
        );
    }

    #[test]
    fn numerov_rejects_slope_dependence() {
        let init = GridFunction::uniform(0.0, 1.0, 11, |x| x);
        let opts = BvpOptions {
            scheme: Scheme::Numerov,
            ..Default::default()
        };
        assert!(solve_bvp(&Damped, 0.0, 1.0, &init, &opts).is_err());
    }
}
