//! Dense complex matrix helpers shared by the dynamics modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |m - m^dagger|` elementwise.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Ascending eigenvalues and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let scale = max_abs(m);
    let eig = m.clone().try_symmetric_eigen(1e-15 * scale.max(1.0), 10_000).ok_or(Error::Eigensolver { dim: n, scale })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|(v, _)| v)
}

/// Propagator of the classical RK4 scheme for a constant-coefficient linear
/// system `dy/dt = A y`.
///
/// One RK4 step of length `h` is exactly multiplication by
/// `T(Ah) = I + Ah + (Ah)²/2 + (Ah)³/6 + (Ah)⁴/24`, so `n` steps are `T(Ah)^n`.
/// Powers are cached per (step count, step length) so that a uniform output
/// grid costs one matrix-vector product per point.
#[derive(Debug, Clone)]
pub struct Rk4Propagator {
    generator: CMatrix,
    substep: f64,
    cache: Option<(usize, f64, CMatrix)>,
}

impl Rk4Propagator {
    pub fn new(generator: CMatrix, substep: f64) -> Self {
        Rk4Propagator { generator, substep, cache: None }
    }

    /// `T(A dt)`.
    pub fn step_matrix(&self, dt: f64) -> CMatrix {
        let n = self.generator.nrows();
        let a = &self.generator * c(dt);
        let mut term = CMatrix::identity(n, n);
        let mut total = term.clone();
        for k in 1..=4 {
            term = &term * &a / c(k as f64);
            total += &term;
        }
        total
    }

    /// Propagator across (approximately) `span`, split into the fewest equal
    /// substeps not longer than the configured substep, together with the
    /// span it actually covers. A cached power is reused when the requested
    /// span differs from the cached one by at most `1e-9` relative, so a
    /// uniform grid with rounding noise in its spacing hits the cache.
    pub fn interval(&mut self, span: f64) -> (&CMatrix, f64) {
        let steps = (span / self.substep).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let hit = matches!(&self.cache, Some((s, cached, _)) if *s == steps && (cached - dt).abs() <= 1e-9 * dt);
        if !hit {
            let m = matrix_power(&self.step_matrix(dt), steps);
            self.cache = Some((steps, dt, m));
        }
        let (steps, dt, m) = self.cache.as_ref().expect("cache filled above");
        (m, *steps as f64 * dt)
    }
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut k: usize) -> CMatrix {
    let n = m.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Nonzero entries of a matrix, for repeated products against dense operands.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        SparseMatrix { dim: m.nrows(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// `self * rhs`.
    pub fn mul_dense(&self, rhs: &CMatrix, out: &mut CMatrix) {
        out.fill(C64::new(0.0, 0.0));
        let n = rhs.ncols();
        for &(i, k, v) in &self.entries {
            for j in 0..n {
                out[(i, j)] += v * rhs[(k, j)];
            }
        }
    }

    /// `lhs * self`.
    pub fn dense_mul(&self, lhs: &CMatrix, out: &mut CMatrix) {
        out.fill(C64::new(0.0, 0.0));
        let n = lhs.nrows();
        for &(k, j, v) in &self.entries {
            for i in 0..n {
                out[(i, j)] += lhs[(i, k)] * v;
            }
        }
    }

    pub fn mul_vec(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for &(i, k, v) in &self.entries {
            out[i] += v * x[k];
        }
    }
}
