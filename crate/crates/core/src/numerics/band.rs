use super::NumericsError;

/// Symmetric matrix stored by its lower band.
///
/// Row `i` keeps columns `i - bw ..= i`; entries outside the band are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    /// Builds the symmetric tridiagonal matrix with the given diagonal and
    /// off-diagonal (`off.len() == diag.len() - 1`).
    pub fn from_tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len().max(1),
            "off-diagonal length mismatch"
        );
        let mut m = Self::zeros(diag.len(), 1);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        for (i, &o) in off.iter().enumerate() {
            m.set(i + 1, i, o);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r >= self.n || r - c > self.bw {
            None
        } else {
            Some(r * (self.bw + 1) + (c + self.bw - r))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets entry `(i, j)` (and by symmetry `(j, i)`). Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j).expect("entry outside the band");
        self.data[k] = v;
    }

    /// Adds `v` to entry `(i, j)`; off-diagonal contributions are counted once,
    /// so a symmetric pair `(i, j)`, `(j, i)` must be added only once.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j).expect("entry outside the band");
        self.data[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn add_to_diagonal(&mut self, shift: &[f64]) {
        assert_eq!(shift.len(), self.n);
        for (i, s) in shift.iter().enumerate() {
            self.add(i, i, *s);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let j0 = i.saturating_sub(self.bw);
            let mut acc = 0.0;
            for j in j0..i {
                let a = row[j + self.bw - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc + row[self.bw] * x[i];
        }
        y
    }

    /// Largest absolute row sum, an upper bound for the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let a = self.get(i, j).abs();
                sums[i] += a;
                if j != i {
                    sums[j] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..i {
                let a = self.get(i, j).abs();
                radius[i] += a;
                radius[j] += a;
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, r) in radius.iter().enumerate() {
            let d = self.get(i, i);
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// Unpivoted LDLᵀ factorization of `self - sigma·I`.
    ///
    /// Exactly vanishing pivots are replaced by a tiny positive value so the
    /// factorization always completes; by Sylvester's law of inertia the
    /// number of negative pivots counts the eigenvalues below `sigma`.
    pub fn ldlt_shifted(&self, sigma: f64) -> BandLdlt {
        let (n, bw) = (self.n, self.bw);
        let width = bw + 1;
        let mut l = vec![0.0; n * width];
        let mut d = vec![0.0; n];
        let tiny = f64::EPSILON * self.norm_inf().max(f64::MIN_POSITIVE);
        for j in 0..n {
            let j0 = j.saturating_sub(bw);
            // Row j of L: L[j][k] for k in j0..j.
            for k in j0..j {
                let mut acc = self.data[j * width + (k + bw - j)];
                let m0 = j0.max(k.saturating_sub(bw));
                for m in m0..k {
                    acc -= l[j * width + (m + bw - j)] * l[k * width + (m + bw - k)] * d[m];
                }
                l[j * width + (k + bw - j)] = acc / d[k];
            }
            let mut dj = self.data[j * width + bw] - sigma;
            for m in j0..j {
                let ljm = l[j * width + (m + bw - j)];
                dj -= ljm * ljm * d[m];
            }
            if dj == 0.0 {
                dj = tiny;
            }
            d[j] = dj;
            l[j * width + bw] = 1.0;
        }
        BandLdlt { n, bw, l, d }
    }

    pub fn ldlt(&self) -> BandLdlt {
        self.ldlt_shifted(0.0)
    }
}

/// Banded `L·D·Lᵀ` factors with unit lower-triangular `L`.
#[derive(Debug, Clone)]
pub struct BandLdlt {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandLdlt {
    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.d.iter().all(|&x| x > 0.0 && x.is_finite())
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let (n, bw, width) = (self.n, self.bw, self.bw + 1);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut acc = x[i];
            for k in i.saturating_sub(bw)..i {
                acc -= self.l[i * width + (k + bw - i)] * x[k];
            }
            x[i] = acc;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let xi = x[i];
            for k in i.saturating_sub(bw)..i {
                x[k] -= self.l[i * width + (k + bw - i)] * xi;
            }
        }
        x
    }
}

/// Thomas algorithm for a general tridiagonal system
/// `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`
/// (`lower[0]` and `upper[n-1]` are ignored).
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, NumericsError> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(NumericsError::InvalidInput(
            "tridiagonal length mismatch".into(),
        ));
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(NumericsError::InvalidInput(
            "zero pivot in tridiagonal solve".into(),
        ));
    }
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(NumericsError::InvalidInput(
                "zero pivot in tridiagonal solve".into(),
            ));
        }
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &SymBand) -> Vec<Vec<f64>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    fn sample(n: usize, bw: usize) -> SymBand {
        let mut m = SymBand::zeros(n, bw);
        for i in 0..n {
            m.set(i, i, 4.0 + bw as f64 + (i as f64 * 0.37).sin());
            for j in i.saturating_sub(bw)..i {
                m.set(i, j, ((i * 7 + j * 3) as f64).cos());
            }
        }
        m
    }

    #[test]
    fn matvec_matches_dense() {
        let m = sample(9, 3);
        let x: Vec<f64> = (0..9).map(|i| i as f64 - 3.5).collect();
        let y = m.mul_vec(&x);
        let d = dense(&m);
        for i in 0..9 {
            let yi: f64 = (0..9).map(|j| d[i][j] * x[j]).sum();
            assert!((yi - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn ldlt_solves() {
        let m = sample(40, 4);
        let f = m.ldlt();
        assert!(f.is_positive_definite());
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sqrt()).collect();
        let b = m.mul_vec(&x);
        let y = f.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_of_diagonal() {
        let m = SymBand::from_tridiagonal(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 0.0]);
        assert_eq!(m.ldlt_shifted(2.5).negative_pivots(), 2);
        assert_eq!(m.ldlt_shifted(0.5).negative_pivots(), 0);
        assert_eq!(m.ldlt_shifted(10.0).negative_pivots(), 4);
    }

    #[test]
    fn tridiagonal_solver() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x = [1.0, 2.0, -1.0, 0.5];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { lower[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { upper[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let y = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
