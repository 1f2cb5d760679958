/// Fourth-order finite-difference derivative of samples on a uniform grid.
///
/// Interior nodes use the five-point central stencil; the two nodes at each
/// end use one-sided five-point stencils. Needs at least five samples.
pub fn differentiate(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "fourth-order differences need five samples");
    let v = values;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
    d[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4]
        + 3.0 * v[n - 5])
        / (12.0 * h);
    d[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5])
        / (12.0 * h);
    d
}

/// Fourth-order finite-difference second derivative on a uniform grid:
/// five-point central stencil inside, six-point one-sided stencils at the two
/// nodes nearest each end. Needs at least six samples.
pub fn second_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 6, "fourth-order second differences need six samples");
    let v = values;
    let h2 = 12.0 * h * h;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / h2;
    }
    let edge = |w: [f64; 6]| {
        (10.0 * w[0] - 15.0 * w[1] - 4.0 * w[2] + 14.0 * w[3] - 6.0 * w[4] + w[5]) / h2
    };
    let corner = |w: [f64; 6]| {
        (45.0 * w[0] - 154.0 * w[1] + 214.0 * w[2] - 156.0 * w[3] + 61.0 * w[4] - 10.0 * w[5]) / h2
    };
    let head = [v[0], v[1], v[2], v[3], v[4], v[5]];
    let tail = [v[n - 1], v[n - 2], v[n - 3], v[n - 4], v[n - 5], v[n - 6]];
    d[0] = corner(head);
    d[1] = edge(head);
    d[n - 1] = corner(tail);
    d[n - 2] = edge(tail);
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics() {
        let h = 0.1;
        let vals: Vec<f64> = (0..9)
            .map(|i| (i as f64 * h).powi(4) - 2.0 * (i as f64 * h))
            .collect();
        let d = differentiate(&vals, h);
        for (i, di) in d.iter().enumerate() {
            let x = i as f64 * h;
            assert!((di - (4.0 * x.powi(3) - 2.0)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn second_derivative_exact_on_quintics() {
        let h = 0.25;
        let p = |x: f64| x.powi(5) - 3.0 * x.powi(3) + x;
        let pxx = |x: f64| 20.0 * x.powi(3) - 18.0 * x;
        let vals: Vec<f64> = (0..8).map(|i| p(i as f64 * h)).collect();
        for (i, d) in second_derivative(&vals, h).iter().enumerate() {
            assert!((d - pxx(i as f64 * h)).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| (3.0 * i as f64 * h).sin()).collect();
            differentiate(&vals, h)
                .iter()
                .enumerate()
                .map(|(i, d)| (d - 3.0 * (3.0 * i as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(21) / err(41) > 14.0);
    }
}
