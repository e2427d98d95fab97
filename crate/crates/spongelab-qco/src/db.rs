//! Dimension bookkeeping, database basis indexing, and amplitude
//! vectors over the joint (workspace, input, output, function) space.

use num_complex::Complex64;

use crate::{dense_cap, Error, Result};

type C64 = Complex64;

/// Domain size M and range size N of the oracle function. The function
/// register ranges over all maps [M] -> [N] u {bot}, indexed as M digits
/// base N+1 with digit value N meaning bot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    m: usize,
    n: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Shape("domain and range must be non-empty".into()));
        }
        let d = Dims { m, n };
        let joint = (m as u128) * (d.db_dim() as u128) * (n as u128);
        let cap = dense_cap() as u128;
        if joint > cap {
            return Err(Error::CapExceeded(format!(
                "joint dimension M*(N+1)^M*N = {joint} exceeds cap {cap}"
            )));
        }
        Ok(d)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// The undefined output marker.
    #[inline]
    pub fn bot(&self) -> usize {
        self.n
    }

    /// (N+1)^M, the dimension of the compressed function register.
    #[inline]
    pub fn db_dim(&self) -> usize {
        (self.n + 1).pow(self.m as u32)
    }

    /// N^M, the dimension of the total-function register.
    #[inline]
    pub fn total_fn_dim(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    /// M * N * (N+1)^M.
    #[inline]
    pub fn joint_dim(&self) -> usize {
        self.m * self.n * self.db_dim()
    }

    /// Output symbol of database `d` at input `x` (N means bot).
    #[inline]
    pub fn digit(&self, d: usize, x: usize) -> usize {
        (d / (self.n + 1).pow(x as u32)) % (self.n + 1)
    }

    /// Database with the symbol at `x` replaced.
    #[inline]
    pub fn with_digit(&self, d: usize, x: usize, v: usize) -> usize {
        let base = (self.n + 1).pow(x as u32);
        let old = self.digit(d, x);
        d - old * base + v * base
    }

    /// Number of defined (non-bot) entries.
    #[inline]
    pub fn entry_count(&self, d: usize) -> usize {
        (0..self.m).filter(|&x| self.digit(d, x) != self.bot()).count()
    }

    /// The all-bot (empty) database index.
    #[inline]
    pub fn empty_db(&self) -> usize {
        let mut d = 0;
        for x in 0..self.m {
            d = self.with_digit(d, x, self.bot());
        }
        d
    }

    /// Total-function value at `x` for a total-function index (digits
    /// base N).
    #[inline]
    pub fn total_digit(&self, f: usize, x: usize) -> usize {
        (f / self.n.pow(x as u32)) % self.n
    }

    /// Flat joint index over X tensor Y tensor F (X slowest).
    #[inline]
    pub fn xyf(&self, x: usize, y: usize, d: usize) -> usize {
        (x * self.n + y) * self.db_dim() + d
    }

    /// Inverse of [`Dims::xyf`].
    #[inline]
    pub fn split_xyf(&self, idx: usize) -> (usize, usize, usize) {
        let d = idx % self.db_dim();
        let xy = idx / self.db_dim();
        (xy / self.n, xy % self.n, d)
    }
}

/// A complex amplitude vector over workspace (dim `anc`) tensor X tensor
/// Y tensor F, with F the compressed (N+1)^M function register.
#[derive(Debug, Clone)]
pub struct AmpVector {
    pub dims: Dims,
    pub anc: usize,
    pub data: Vec<C64>,
}

impl AmpVector {
    /// |0> |0> |0> |empty database>.
    pub fn initial(dims: Dims) -> Self {
        Self::initial_with_anc(dims, 1)
    }

    pub fn initial_with_anc(dims: Dims, anc: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); anc * dims.joint_dim()];
        data[dims.empty_db()] = C64::new(1.0, 0.0);
        AmpVector { dims, anc, data }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, a: usize, x: usize, y: usize, d: usize) -> usize {
        a * self.dims.joint_dim() + self.dims.xyf(x, y, d)
    }

    /// Mutable amplitude accessor (avoids borrow tangles at call sites).
    #[inline]
    pub fn at(&mut self, a: usize, x: usize, y: usize, d: usize) -> &mut C64 {
        let idx = self.index(a, x, y, d);
        &mut self.data[idx]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &AmpVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &AmpVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Dump as JSON: a register-shape header plus (re, im) pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "registers": {
                "workspace": self.anc,
                "x": self.dims.m(),
                "y": self.dims.n(),
                "f_registers": self.dims.m(),
                "f_radix": self.dims.n() + 1,
            },
            "amplitudes": self.data.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        })
    }
}
