use super::{NumericsError, SymBand};

fn scaled(form: &SymBand, mass: &[f64]) -> Result<SymBand, NumericsError> {
    if mass.len() != form.dim() {
        return Err(NumericsError::InvalidInput(format!(
            "mass has {} entries, form has dimension {}",
            mass.len(),
            form.dim()
        )));
    }
    if let Some(m) = mass.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(NumericsError::InvalidInput(format!(
            "mass entry {m} is not positive"
        )));
    }
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut b = form.clone();
    for i in 0..form.dim() {
        for j in i.saturating_sub(form.bandwidth())..=i {
            b.set(i, j, form.get(i, j) * inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    Ok(b)
}

/// Number of generalized eigenvalues of `form·v = λ·diag(mass)·v` below `sigma`.
pub fn count_eigenvalues_below(
    form: &SymBand,
    mass: &[f64],
    sigma: f64,
) -> Result<usize, NumericsError> {
    Ok(scaled(form, mass)?.ldlt_shifted(sigma).negative_pivots())
}

/// Smallest eigenvalue of the symmetric generalized problem
/// `form·v = λ·diag(mass)·v`, computed by Sturm-count bisection on the
/// inertia of banded LDLᵀ factorizations.
///
/// The result carries a relative accuracy of about 1e-12, with an absolute
/// floor of 1e-14 times the spectral scale for eigenvalues near zero.
pub fn min_eigenvalue(form: &SymBand, mass: &[f64]) -> Result<f64, NumericsError> {
    if form.dim() == 0 {
        return Err(NumericsError::InvalidInput("empty eigenproblem".into()));
    }
    let b = scaled(form, mass)?;
    let (glo, ghi) = b.gershgorin();
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let mut lo = glo - 1e-12 * scale;
    let mut hi = ghi + 1e-12 * scale;
    let mut iterations = 0;
    while hi - lo > 1e-12 * lo.abs().max(hi.abs()) && hi - lo > 1e-14 * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if b.ldlt_shifted(mid).negative_pivots() >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > 400 {
            return Err(NumericsError::NonConvergence {
                what: "eigenvalue bisection",
                iterations,
                estimate: hi - lo,
            });
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(n_nodes: usize, len: f64) -> (SymBand, Vec<f64>) {
        // -y'' with Dirichlet ends, interior unknowns only.
        let n = n_nodes - 2;
        let h = len / (n_nodes - 1) as f64;
        let form = SymBand::from_tridiagonal(&vec![2.0 / h; n], &vec![-1.0 / h; n - 1]);
        (form, vec![h; n])
    }

    #[test]
    fn dirichlet_laplacian_on_zero_pi() {
        let (form, mass) = laplacian(400, PI);
        let lam = min_eigenvalue(&form, &mass).unwrap();
        assert!((lam - 1.0).abs() < 1e-4, "{lam}");
        // Discrete eigenvalue is known exactly: (4/h²) sin²(h/2).
        let h = PI / 399.0;
        let exact = 4.0 / (h * h) * (h / 2.0).sin().powi(2);
        assert!((lam - exact).abs() < 1e-8 * exact, "{lam} vs {exact}");
    }

    #[test]
    fn diagonal_generalized_problem() {
        let form = SymBand::from_tridiagonal(&[3.0, 8.0, 1.0], &[0.0, 0.0]);
        let lam = min_eigenvalue(&form, &[1.0, 2.0, 4.0]).unwrap();
        assert!((lam - 0.25).abs() < 1e-13);
        assert_eq!(
            count_eigenvalues_below(&form, &[1.0, 2.0, 4.0], 3.5).unwrap(),
            2
        );
    }

    #[test]
    fn indefinite_form_gives_negative_minimum() {
        let form = SymBand::from_tridiagonal(&[1.0, 1.0], &[2.0]);
        let lam = min_eigenvalue(&form, &[1.0, 1.0]).unwrap();
        assert!((lam + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_mass() {
        let form = SymBand::from_tridiagonal(&[1.0, 1.0], &[0.0]);
        assert!(min_eigenvalue(&form, &[1.0, 0.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn positive_definite_forms_have_positive_minimum(
            diag in proptest::collection::vec(2.1f64..10.0, 3..30),
            seed in 0u64..1000,
        ) {
            // Diagonally dominant with off-diagonals in (-1, 1).
            let n = diag.len();
            let off: Vec<f64> = (0..n - 1).map(|i| ((i as u64 * 31 + seed) as f64).sin()).collect();
            let form = SymBand::from_tridiagonal(&diag, &off);
            let lam = min_eigenvalue(&form, &vec![1.0; n]).unwrap();
            proptest::prop_assert!(lam > 0.0);
        }
    }
}
