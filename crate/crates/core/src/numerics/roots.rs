use super::NumericsError;

/// A closed interval `[lo, hi]` with `lo < hi`, used to bracket a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(NumericsError::InvalidInput(format!(
                "bracket [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

const MAX_ITER: usize = 500;

/// Finds a root of `f` inside `bracket` using Brent's bracketed combination of
/// bisection, secant and inverse quadratic interpolation.
///
/// The root stays bracketed throughout; the returned point lies in a final
/// bracket of width at most `tol` (or a few ulps when `tol` is below machine
/// resolution at the root).
pub fn find_root<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = (0.5 * tol).max(2.0 * f64::EPSILON * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(NumericsError::NonFinite { at: b });
        }
    }
    Err(NumericsError::NonConvergence {
        what: "find_root",
        iterations: MAX_ITER,
        estimate: (c - b).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tan_plus_x_root_past_first_pole() {
        // tan x + x = 0 on (π/2, π); reference from a fixed-point iteration
        // x = π - atan(x), which contracts there.
        let mut x: f64 = 2.0;
        for _ in 0..200 {
            x = std::f64::consts::PI - x.atan();
        }
        let root = find_root(|x| x.tan() + x, Bracket::new(1.7, 3.0).unwrap(), 1e-13).unwrap();
        assert!((root - x).abs() < 1e-12, "{root} vs {x}");
        assert!((root - 2.028_757_838_110_434_6).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let err = find_root(|x| x * x + 1.0, Bracket::new(-1.0, 1.0).unwrap(), 1e-12);
        assert!(matches!(err, Err(NumericsError::NoSignChange { .. })));
    }

    #[test]
    fn endpoint_root_is_returned() {
        let r = find_root(|x| x - 1.0, Bracket::new(1.0, 2.0).unwrap(), 1e-12).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn invalid_bracket_rejected() {
        assert!(Bracket::new(1.0, 1.0).is_err());
        assert!(Bracket::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn width_contract_with_loose_tolerance() {
        // With a loose tolerance the answer must still be within tol of the root.
        let root = find_root(|x| x.powi(3) - 2.0, Bracket::new(0.0, 4.0).unwrap(), 1e-3).unwrap();
        assert!((root - 2f64.cbrt()).abs() <= 1e-3);
    }

    proptest::proptest! {
        #[test]
        fn brackets_any_linear_root(r in -10.0f64..10.0, slope in 0.1f64..100.0) {
            let root = find_root(|x| slope * (x - r), Bracket::new(-11.0, 11.0).unwrap(), 1e-10).unwrap();
            proptest::prop_assert!((root - r).abs() <= 1e-10);
        }
    }
}
