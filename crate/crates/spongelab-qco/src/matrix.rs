//! Dense complex matrices with one-sided Jacobi SVD.
//!
//! Dimensions here stay in the hundreds, so plain row-major storage and
//! O(n^3) algorithms are the right tool. The Jacobi SVD computes all
//! singular values to near machine precision, which the capacity checks
//! rely on.

use num_complex::Complex64;
use spongelab::Rng64;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build a dense matrix by applying an operator to each basis vector.
    pub fn from_apply(dim: usize, apply: impl Fn(&[C64]) -> Vec<C64>) -> Self {
        let mut m = CMat::zeros(dim, dim);
        let mut basis = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            basis[j] = C64::new(1.0, 0.0);
            let col = apply(&basis);
            basis[j] = C64::new(0.0, 0.0);
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.sub(other).max_abs()
    }

    /// Max-entry deviation of A^dagger A from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.dagger()
            .mul(self)
            .max_abs_diff(&CMat::identity(self.cols))
    }

    /// All singular values, descending, via one-sided Jacobi: rotate
    /// column pairs until they are pairwise orthogonal; the column norms
    /// are then the singular values.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.cols;
        let m = self.rows;
        // Column-major working copy.
        let mut a: Vec<Vec<C64>> = (0..n)
            .map(|j| (0..m).map(|i| self[(i, j)]).collect())
            .collect();
        let tol = 1e-14;
        for _sweep in 0..64 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (mut app, mut aqq) = (0.0f64, 0.0f64);
                    let mut apq = C64::new(0.0, 0.0);
                    for i in 0..m {
                        app += a[p][i].norm_sqr();
                        aqq += a[q][i].norm_sqr();
                        apq += a[p][i].conj() * a[q][i];
                    }
                    let scale = (app * aqq).sqrt();
                    if apq.norm() <= tol * scale || scale == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let vp = a[p][i];
                        let vq = a[q][i];
                        a[p][i] = c * vp - s * phase.conj() * vq;
                        a[q][i] = s * phase * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = a
            .iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sv
    }

    /// Dump as JSON: shape header plus row-major (re, im) pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.data.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        })
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.singular_values()[0]
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the R
/// diagonal phases normalized.
pub fn haar_unitary(dim: usize, rng: &mut Rng64) -> CMat {
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| C64::new(rng.next_gaussian(), rng.next_gaussian()))
                .collect()
        })
        .collect();
    // Modified Gram-Schmidt with phase fixing.
    for j in 0..dim {
        for k in 0..j {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..dim {
                dot += cols[k][i].conj() * cols[j][i];
            }
            for i in 0..dim {
                let prev = cols[k][i];
                cols[j][i] -= dot * prev;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lead = cols[j].iter().find(|z| z.norm() > 1e-12).copied().unwrap();
        let phase = lead / lead.norm();
        for z in cols[j].iter_mut() {
            *z /= norm * phase;
        }
    }
    CMat::from_fn(dim, dim, |i, j| cols[j][i])
}
