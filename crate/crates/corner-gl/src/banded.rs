//! Symmetric banded Cholesky factorization.

/// Lower band of a symmetric matrix: `band[i * (kd + 1) + k]` holds `A[i][i - k]`.
#[derive(Debug, Clone)]
pub(crate) struct SymBand {
    pub n: usize,
    pub kd: usize,
    pub band: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, kd: usize) -> Self {
        SymBand { n, kd, band: vec![0.0; n * (kd + 1)] }
    }

    /// Adds `v` to `A[i][j]` for `j <= i`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && i - j <= self.kd);
        self.band[i * (self.kd + 1) + (i - j)] += v;
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            for j in lo..=i {
                let a = self.band[i * (self.kd + 1) + (i - j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.band[i * (self.kd + 1)].abs()).fold(0.0, f64::max)
    }

    /// Cholesky factor `L` with `A = L Lᵀ`, or `None` if `A` is not positive definite.
    pub fn cholesky(&self) -> Option<BandCholesky> {
        let (n, kd) = (self.n, self.kd);
        let w = kd + 1;
        let mut l = self.band.clone();
        for j in 0..n {
            let lo = j.saturating_sub(kd);
            let mut s = l[j * w];
            for k in lo..j {
                let v = l[j * w + (j - k)];
                s -= v * v;
            }
            if !(s > 0.0) || !s.is_finite() {
                return None;
            }
            let d = s.sqrt();
            l[j * w] = d;
            for i in (j + 1)..n.min(j + kd + 1) {
                let lo_i = i.saturating_sub(kd);
                let mut s = l[i * w + (i - j)];
                for k in lo_i..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / d;
            }
        }
        Some(BandCholesky { n, kd, l })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    kd: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, kd, w) = (self.n, self.kd, self.kd + 1);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let hi = (i + kd + 1).min(n);
            let mut s = y[i];
            for k in (i + 1)..hi {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}
