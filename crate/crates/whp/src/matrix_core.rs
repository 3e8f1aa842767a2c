//! Dense complex linear algebra: Kronecker products, partial traces, a
//! self-contained cyclic-Jacobi Hermitian eigensolver, and Schatten p-norms
//! of positive semidefinite spectra.

use num_complex::Complex64;

use crate::error::{Result, WhpError};

/// Hard cap on matrix dimension; Kronecker products refuse to grow past it.
pub const MAX_DIM: usize = 4096;

/// Maximum number of cyclic Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 64;

/// Square or rectangular complex matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

/// Spectrum of a Hermitian matrix, sorted non-increasing, with the worst
/// eigenpair residual max_i ||A v_i - lambda_i v_i||_inf.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residual: f64,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(WhpError::DimensionMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", entries.len()),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(WhpError::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest |Im| over all entries; zero for structurally real matrices.
    pub fn max_imag(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(WhpError::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(WhpError::DimensionMismatch {
                expected: format!("inner dimension {}", self.cols),
                got: format!("{}", other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }
}

/// Plain transpose, no conjugation: result(i,j) = a(j,i).
pub fn transpose(a: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out.set(j, i, a.get(i, j));
        }
    }
    out
}

/// Conjugate transpose.
pub fn adjoint(a: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out.set(j, i, a.get(i, j).conj());
        }
    }
    out
}

/// Kronecker product: entry ((i*b.rows+k),(j*b.cols+l)) = a(i,j) * b(k,l).
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let rows = a.rows.saturating_mul(b.rows);
    let cols = a.cols.saturating_mul(b.cols);
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(WhpError::DimensionOverflow {
            dim: rows.max(cols),
            max: MAX_DIM,
        });
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.set(i * b.rows + k, j * b.cols + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace of a (d1*d2)x(d1*d2) matrix over the named factor.
///
/// `Side::First` traces out the d1 factor and returns a d2 x d2 matrix;
/// `Side::Second` traces out the d2 factor and returns d1 x d1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

pub fn partial_trace(a: &DenseMatrix, d1: usize, d2: usize, side: Side) -> Result<DenseMatrix> {
    let n = d1 * d2;
    if a.rows != n || a.cols != n {
        return Err(WhpError::DimensionMismatch {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", a.rows, a.cols),
        });
    }
    match side {
        Side::First => {
            let mut out = DenseMatrix::zeros(d2, d2);
            for k in 0..d2 {
                for l in 0..d2 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for i in 0..d1 {
                        s += a.get(i * d2 + k, i * d2 + l);
                    }
                    out.set(k, l, s);
                }
            }
            Ok(out)
        }
        Side::Second => {
            let mut out = DenseMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..d2 {
                        s += a.get(i * d2 + k, j * d2 + k);
                    }
                    out.set(i, j, s);
                }
            }
            Ok(out)
        }
    }
}

/// Cyclic Jacobi on a real symmetric matrix stored row-major in `a` (n x n).
/// Returns eigenvalues (unsorted) and the accumulated rotation matrix V
/// (columns are eigenvectors), plus the achieved off-diagonal norm.
pub(crate) fn jacobi_real_symmetric(n: usize, a: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut m = a.to_vec();
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let target = tol.max(f64::EPSILON) * fro;

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..MAX_SWEEPS {
        if off_norm(&m) <= target {
            let eig = (0..n).map(|i| m[i * n + i]).collect();
            return Ok((eig, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= target / (n as f64) {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // rotate rows/columns p and q
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let off = off_norm(&m);
    if off <= target {
        let eig = (0..n).map(|i| m[i * n + i]).collect();
        return Ok((eig, v));
    }
    Err(WhpError::NonConvergence {
        sweeps: MAX_SWEEPS,
        off,
    })
}

fn eigenpair_residual(n: usize, a: &[f64], eig: &[f64], v: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for col in 0..n {
        for i in 0..n {
            let mut av = 0.0;
            for k in 0..n {
                av += a[i * n + k] * v[k * n + col];
            }
            worst = worst.max((av - eig[col] * v[i * n + col]).abs());
        }
    }
    worst
}

/// Sorted descending eigenvalues of a real symmetric matrix given as a flat
/// row-major slice. Used directly on real workloads to skip the complex
/// embedding.
pub fn symmetric_eigenvalues(n: usize, a: &[f64], tol: f64) -> Result<SpectrumResult> {
    let (eig, v) = jacobi_real_symmetric(n, a, tol)?;
    let residual = eigenpair_residual(n, a, &eig, &v);
    let mut sorted = eig;
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(SpectrumResult {
        eigenvalues: sorted,
        residual,
    })
}

/// Full real spectrum of a Hermitian matrix via cyclic Jacobi rotations.
///
/// Real-valued inputs are diagonalized directly; genuinely complex Hermitian
/// inputs go through the 2n x 2n real-symmetric embedding [[X, -Y], [Y, X]],
/// whose spectrum is that of X + iY with every eigenvalue doubled.
pub fn hermitian_eigenvalues(a: &DenseMatrix, tol: f64) -> Result<SpectrumResult> {
    if !a.is_square() {
        return Err(WhpError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows, a.cols),
        });
    }
    let n = a.rows;
    for i in 0..n {
        for j in i..n {
            let dev = (a.get(i, j) - a.get(j, i).conj()).norm();
            if dev > tol {
                return Err(WhpError::NotHermitian {
                    row: i,
                    col: j,
                    deviation: dev,
                });
            }
        }
    }

    if a.max_imag() <= tol {
        // symmetrize the real part to kill roundoff asymmetry
        let mut sym = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                sym[i * n + j] = 0.5 * (a.get(i, j).re + a.get(j, i).re);
            }
        }
        return symmetric_eigenvalues(n, &sym, tol);
    }

    // 2n x 2n embedding; Hermitian A = X + iY maps to symmetric [[X,-Y],[Y,X]]
    let m = 2 * n;
    let mut emb = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let x = 0.5 * (a.get(i, j).re + a.get(j, i).re);
            let y = 0.5 * (a.get(i, j).im - a.get(j, i).im);
            emb[i * m + j] = x;
            emb[(i + n) * m + (j + n)] = x;
            emb[i * m + (j + n)] = -y;
            emb[(i + n) * m + j] = y;
        }
    }
    let full = symmetric_eigenvalues(m, &emb, tol)?;
    // doubled spectrum: keep every second entry of the sorted list
    let eigenvalues = full.eigenvalues.iter().step_by(2).copied().collect();
    Ok(SpectrumResult {
        eigenvalues,
        residual: full.residual,
    })
}

/// Schatten p-norm of a PSD matrix given its eigenvalues: (sum lambda_i^p)^(1/p).
///
/// Tiny negative eigenvalues (roundoff from an analytically PSD matrix) are
/// clamped to zero; anything below -1e-12 * len signals a genuinely non-PSD
/// input upstream.
pub fn pnorm_psd(eigenvalues: &[f64], p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(WhpError::InvalidArgument(format!(
            "p must be >= 1, got {p}"
        )));
    }
    let tol = 1e-12 * eigenvalues.len().max(1) as f64;
    let mut sum = 0.0;
    for &e in eigenvalues {
        if e < -tol {
            return Err(WhpError::NotPsd { value: e, tol });
        }
        sum += e.max(0.0).powf(p);
    }
    Ok(sum.powf(1.0 / p))
}
