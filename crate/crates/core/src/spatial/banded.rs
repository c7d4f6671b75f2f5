use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric band matrix; only the lower band is stored.
///
/// `data[i * (bw + 1) + d]` holds `A[i][i - d]` for `d <= min(i, bw)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBanded {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        (d <= self.bw).then(|| i * (self.bw + 1) + d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to entry (i, j) (and implicitly to (j, i)).
    ///
    /// Panics if (i, j) lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside the band");
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            y[i] += row[0] * x[i];
            for d in 1..=self.bw.min(i) {
                let j = i - d;
                y[i] += row[d] * x[j];
                y[j] += row[d] * x[i];
            }
        }
        y
    }

    /// xᵀ·A·y
    pub fn bilinear(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&self.mul_vec(y))
    }

    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        self.bilinear(x, x)
    }

    /// Σ coefᵢ·Aᵢ over matrices sharing dimension and bandwidth.
    pub fn combine(terms: &[(f64, &SymBanded)]) -> SymBanded {
        let first = terms[0].1;
        let mut out = SymBanded::zeros(first.n, first.bw);
        for (coef, m) in terms {
            assert!(m.n == first.n && m.bw == first.bw, "incompatible band matrices");
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += coef * v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Largest |A − Aᵀ| entry of the expanded matrix (zero by construction).
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.transpose()).amax()
    }

    pub fn factor(&self) -> Result<BandedLdlt> {
        BandedLdlt::new(self)
    }
}

/// LDLᵀ factorization without pivoting, preserving the band.
#[derive(Clone, Debug)]
pub struct BandedLdlt {
    n: usize,
    bw: usize,
    /// Unit lower factor in the same layout as [`SymBanded`]; slot d = 0 holds D.
    data: Vec<f64>,
}

impl BandedLdlt {
    pub fn new(a: &SymBanded) -> Result<Self> {
        let (n, bw) = (a.n, a.bw);
        let w = bw + 1;
        let mut l = a.data.clone();
        let scale = a.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            // D_j
            let mut dj = l[j * w];
            for k in j.saturating_sub(bw)..j {
                let ljk = l[j * w + (j - k)];
                dj -= ljk * ljk * l[k * w];
            }
            if !(dj.abs() > 1e-14 * scale) || !dj.is_finite() {
                return Err(Error::Numerical(format!(
                    "banded LDLt: pivot {j} vanished ({dj:e}, matrix scale {scale:e})"
                )));
            }
            l[j * w] = dj;
            for i in j + 1..(j + bw + 1).min(n) {
                let mut v = l[i * w + (i - j)];
                for k in i.saturating_sub(bw)..j {
                    v -= l[i * w + (i - k)] * l[j * w + (j - k)] * l[k * w];
                }
                l[i * w + (i - j)] = v / dj;
            }
        }
        Ok(BandedLdlt { n, bw, data: l })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n);
        let w = self.bw + 1;
        let mut x = b.clone();
        for i in 0..self.n {
            let mut v = x[i];
            for d in 1..=self.bw.min(i) {
                v -= self.data[i * w + d] * x[i - d];
            }
            x[i] = v;
        }
        for i in 0..self.n {
            x[i] /= self.data[i * w];
        }
        for i in (0..self.n).rev() {
            let mut v = x[i];
            for d in 1..=self.bw.min(self.n - 1 - i) {
                v -= self.data[(i + d) * w + d] * x[i + d];
            }
            x[i] = v;
        }
        x
    }

    /// Number of negative pivots, i.e. the count of negative eigenvalues.
    pub fn negative_pivots(&self) -> usize {
        (0..self.n).filter(|&i| self.data[i * (self.bw + 1)] < 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SymBanded {
        let mut a = SymBanded::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 4.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn matvec_matches_dense() {
        let mut a = SymBanded::zeros(6, 2);
        let mut k = 1.0;
        for i in 0..6usize {
            for j in i.saturating_sub(2)..=i {
                a.add(i, j, k);
                k += 0.5;
            }
        }
        let x = DVector::from_fn(6, |i, _| (i as f64).sin() + 0.3);
        let dense = a.to_dense() * &x;
        assert!((a.mul_vec(&x) - dense).amax() < 1e-14);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn ldlt_solves() {
        let a = tridiag(10);
        let x = DVector::from_fn(10, |i, _| 1.0 + i as f64);
        let b = a.mul_vec(&x);
        let f = a.factor().unwrap();
        assert!((f.solve(&b) - x).amax() < 1e-12);
        assert_eq!(f.negative_pivots(), 0);
    }

    #[test]
    fn ldlt_indefinite_counts_negative_pivots() {
        let mut a = tridiag(5);
        a.add(4, 4, -10.0);
        let f = a.factor().unwrap();
        assert_eq!(f.negative_pivots(), 1);
        let x = DVector::from_element(5, 1.0);
        assert!((f.solve(&a.mul_vec(&x)) - x).amax() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = SymBanded::zeros(3, 1);
        assert!(matches!(a.factor(), Err(Error::Numerical(_))));
    }
}
