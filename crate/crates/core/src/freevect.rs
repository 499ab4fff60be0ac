//! Free vector spaces over finite sets and the linear maps induced by a
//! [`FinFunction`]: pushforward (sum over fibers, "collect") and pullback
//! (copy along the function, "distribute").
//!
//! The loop-based `*_apply` functions are the semantics used everywhere else;
//! the matrix builders exist for verification and for callers that want an
//! explicit `K` / `Kᵀ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::finset::FinFunction;
use crate::opensys::FinsetAlgebra;

/// `φ_*(x)_j = Σ_{i ∈ φ⁻¹(j)} x_i`.
pub fn pushforward_apply(phi: &FinFunction, x: &[f64]) -> Result<Vec<f64>> {
    check_dim("pushforward", phi.dom_size(), x.len())?;
    let mut out = vec![0.0; phi.codom_size()];
    pushforward_into(phi, x, &mut out);
    Ok(out)
}

/// Accumulates `φ_*(x)` into `out` without clearing it. Sizes are the caller's problem.
pub(crate) fn pushforward_into(phi: &FinFunction, x: &[f64], out: &mut [f64]) {
    for (&j, &xi) in phi.as_slice().iter().zip(x) {
        out[j] += xi;
    }
}

/// `φ*(y)_i = y_{φ(i)}`.
pub fn pullback_apply(phi: &FinFunction, y: &[f64]) -> Result<Vec<f64>> {
    check_dim("pullback", phi.codom_size(), y.len())?;
    Ok(pullback_unchecked(phi, y))
}

pub(crate) fn pullback_unchecked(phi: &FinFunction, y: &[f64]) -> Vec<f64> {
    phi.as_slice().iter().map(|&j| y[j]).collect()
}

/// Dense `codom × dom` indicator matrix of the pushforward.
pub fn pushforward_matrix(phi: &FinFunction) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(phi.codom_size(), phi.dom_size());
    for (i, &j) in phi.as_slice().iter().enumerate() {
        m[(j, i)] = 1.0;
    }
    m
}

/// Dense `dom × codom` matrix of the pullback (the transpose of [`pushforward_matrix`]).
pub fn pullback_matrix(phi: &FinFunction) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(phi.dom_size(), phi.codom_size());
    for (i, &j) in phi.as_slice().iter().enumerate() {
        m[(i, j)] = 1.0;
    }
    m
}

/// Coordinate-format sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplets {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries.push((row, col, value));
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `y = M x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// `y = Mᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
        y
    }
}

/// Vectors under pushforward: the "collect" algebra.
#[derive(Debug, Clone, Copy, Default)]
pub struct Collect;

impl FinsetAlgebra for Collect {
    type Object = Vec<f64>;

    fn dimension(&self, obj: &Vec<f64>) -> usize {
        obj.len()
    }

    fn act(&self, phi: &FinFunction, obj: &Vec<f64>) -> Result<Vec<f64>> {
        pushforward_apply(phi, obj)
    }

    fn unit(&self) -> Vec<f64> {
        Vec::new()
    }

    fn product(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        let mut out = a.clone();
        out.extend_from_slice(b);
        out
    }

    fn combine(&self, objs: &[Vec<f64>]) -> Vec<f64> {
        objs.concat()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}
