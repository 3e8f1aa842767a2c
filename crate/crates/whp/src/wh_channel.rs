//! The Werner-Holevo channel map and the product-channel output density
//! matrix parameterized by a Schmidt vector on the simplex.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WhpError};
use crate::matrix_core::{adjoint, hermitian_eigenvalues, kron, transpose, DenseMatrix};

/// Entries below this are clamped to exactly zero before spectrum work, so
/// the secular machinery sees exact zeros instead of 1e-16 noise.
pub const LAMBDA_CLAMP: f64 = 1e-14;

/// The channel mu -> (I Tr(mu) - mu^T) / (d - 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WHChannel {
    d: usize,
}

impl WHChannel {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(WhpError::InvalidArgument(format!(
                "channel dimension must be >= 2, got {d}"
            )));
        }
        Ok(Self { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn apply(&self, mu: &DenseMatrix) -> Result<DenseMatrix> {
        if mu.rows() != self.d || mu.cols() != self.d {
            return Err(WhpError::DimensionMismatch {
                expected: format!("{0}x{0}", self.d),
                got: format!("{}x{}", mu.rows(), mu.cols()),
            });
        }
        let id = DenseMatrix::identity(self.d).scale(mu.trace());
        let out = id.sub(&transpose(mu))?;
        Ok(out.scale(Complex64::new(1.0 / (self.d - 1) as f64, 0.0)))
    }
}

/// Point on the probability simplex: the Schmidt coefficients of a bipartite
/// pure state, sorted or not. Canonicalized on construction: entries below
/// [`LAMBDA_CLAMP`] become exactly zero and the vector is renormalized.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SchmidtVector {
    coeffs: Vec<f64>,
}

impl SchmidtVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(WhpError::SimplexViolation("empty vector".into()));
        }
        let mut c = coeffs;
        for x in &mut c {
            if !x.is_finite() || *x < -1e-12 {
                return Err(WhpError::SimplexViolation(format!(
                    "coefficient {x} is negative beyond tolerance"
                )));
            }
            if *x < LAMBDA_CLAMP {
                *x = 0.0;
            }
        }
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(WhpError::SimplexViolation(format!(
                "coefficients sum to {sum}, expected 1"
            )));
        }
        for x in &mut c {
            *x /= sum;
        }
        Ok(Self { coeffs: c })
    }

    pub fn vertex(d: usize) -> Self {
        let mut c = vec![0.0; d];
        c[0] = 1.0;
        Self { coeffs: c }
    }

    pub fn barycenter(d: usize) -> Self {
        Self {
            coeffs: vec![1.0 / d as f64; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Canonical ordering of the two factor dimensions: the spectrum of the
/// product output is symmetric under factor exchange, so everything
/// downstream assumes d1 <= d2.
pub(crate) fn canonical_dims(d1: usize, d2: usize) -> Result<(usize, usize)> {
    if d1 < 2 || d2 < 2 {
        return Err(WhpError::InvalidArgument(format!(
            "factor dimensions must be >= 2, got ({d1}, {d2})"
        )));
    }
    Ok(if d1 <= d2 { (d1, d2) } else { (d2, d1) })
}

/// Output of the product channel on the pure state with Schmidt vector
/// `lambda`: sigma_12 = sum_{ab} sqrt(lambda_a lambda_b)
/// Phi_1(|a><b|) (x) Phi_2(|a><b|), assembled in the Schmidt bases.
///
/// The result is real symmetric, PSD, with unit trace.
pub fn product_output(lambda: &SchmidtVector, d1: usize, d2: usize) -> Result<DenseMatrix> {
    let (d1, d2) = canonical_dims(d1, d2)?;
    let d = d1;
    if lambda.dim() != d {
        return Err(WhpError::DimensionMismatch {
            expected: format!("Schmidt vector of length {d}"),
            got: format!("{}", lambda.dim()),
        });
    }
    let lam = lambda.coeffs();
    let mut sigma = DenseMatrix::zeros(d1 * d2, d1 * d2);
    for a in 0..d {
        for b in 0..d {
            let w = (lam[a] * lam[b]).sqrt();
            if w == 0.0 {
                continue;
            }
            // Phi(|a><b|) = (I delta_ab - |b><a|) / (dim - 1)
            let f1 = channel_on_basis_projector(d1, a, b);
            let f2 = channel_on_basis_projector(d2, a, b);
            let term = kron(&f1, &f2)?.scale(Complex64::new(w, 0.0));
            sigma = sigma.add(&term)?;
        }
    }
    Ok(sigma)
}

fn channel_on_basis_projector(dim: usize, a: usize, b: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(dim, dim);
    let scale = 1.0 / (dim - 1) as f64;
    if a == b {
        for i in 0..dim {
            m.set(i, i, Complex64::new(scale, 0.0));
        }
    }
    let v = m.get(b, a) - Complex64::new(scale, 0.0);
    m.set(b, a, v);
    m
}

/// Schmidt coefficients of a bipartite unit vector: the eigenvalues of the
/// smaller-side reduced density matrix, clamped, renormalized, sorted
/// descending.
pub fn schmidt_from_state(psi: &[Complex64], d1: usize, d2: usize) -> Result<SchmidtVector> {
    if psi.len() != d1 * d2 {
        return Err(WhpError::DimensionMismatch {
            expected: format!("state vector of length {}", d1 * d2),
            got: format!("{}", psi.len()),
        });
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(WhpError::InvalidArgument("zero state vector".into()));
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(WhpError::InvalidArgument(format!(
            "state vector has norm {norm}, expected 1"
        )));
    }
    // reshape to d1 x d2 and take the Gram matrix of the smaller side
    let a = DenseMatrix::new(d1, d2, psi.to_vec())?;
    let gram = if d1 <= d2 {
        a.matmul(&adjoint(&a))?
    } else {
        adjoint(&a).matmul(&a)?
    };
    let spec = hermitian_eigenvalues(&gram, 1e-10)?;
    let coeffs: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&e| if e < LAMBDA_CLAMP { 0.0 } else { e })
        .collect();
    let sum: f64 = coeffs.iter().sum();
    SchmidtVector::new(coeffs.iter().map(|&c| c / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::pnorm_psd;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let entries: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let g = DenseMatrix::new(n, n, entries).unwrap();
        let psd = g.matmul(&adjoint(&g)).unwrap();
        psd.scale(Complex64::new(1.0, 0.0) / psd.trace())
    }

    fn random_pure(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, v[i] * v[j].conj());
            }
        }
        m
    }

    use crate::testutil::random_simplex;

    #[test]
    fn rejects_dimension_one() {
        assert!(WHChannel::new(1).is_err());
    }

    #[test]
    fn unital_on_maximally_mixed() {
        let ch = WHChannel::new(2).unwrap();
        let mm = DenseMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        let out = ch.apply(&mm).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((out.get(i, j) - mm.get(i, j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_input_hand_expansion() {
        // Phi_3(|0><0|) = (I - diag(1,0,0)) / 2 = diag(0, 1/2, 1/2)
        let ch = WHChannel::new(3).unwrap();
        let mut p0 = DenseMatrix::zeros(3, 3);
        p0.set(0, 0, Complex64::new(1.0, 0.0));
        let out = ch.apply(&p0).unwrap();
        let expected = DenseMatrix::diag(&[0.0, 0.5, 0.5]);
        for i in 0..3 {
            for j in 0..3 {
                assert!((out.get(i, j) - expected.get(i, j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn trace_preserving_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=5 {
            let ch = WHChannel::new(d).unwrap();
            let entries: Vec<Complex64> = (0..d * d)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let mu = DenseMatrix::new(d, d, entries).unwrap();
            let out = ch.apply(&mu).unwrap();
            assert!((out.trace() - mu.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn output_psd_unit_trace_on_density_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in 2..=5 {
            let ch = WHChannel::new(d).unwrap();
            let rho = random_density(&mut rng, d);
            let out = ch.apply(&rho).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            let eig = hermitian_eigenvalues(&out, 1e-10).unwrap().eigenvalues;
            assert!(eig.iter().all(|&e| e > -1e-10));
        }
    }

    #[test]
    fn pure_output_spectrum_state_independent() {
        // eigenvalues {0 x1, 1/(d-1) x(d-1)} for any pure input
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in 2..=6 {
            let ch = WHChannel::new(d).unwrap();
            let rho = random_pure(&mut rng, d);
            let out = ch.apply(&rho).unwrap();
            let eig = hermitian_eigenvalues(&out, 1e-10).unwrap().eigenvalues;
            let inv = 1.0 / (d - 1) as f64;
            for &e in &eig[..d - 1] {
                assert!((e - inv).abs() < 1e-10);
            }
            assert!(eig[d - 1].abs() < 1e-10);
            // single-channel maximum: ||Phi(pure)||_p^p = (d-1)^(1-p)
            let p = 1.7;
            let norm = pnorm_psd(&eig, p).unwrap();
            let expected = ((d - 1) as f64).powf(1.0 / p - 1.0);
            assert!((norm - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_vector_validation() {
        assert!(SchmidtVector::new(vec![0.5, 0.6]).is_err());
        assert!(SchmidtVector::new(vec![0.5, -0.5, 1.0]).is_err());
        let v = SchmidtVector::new(vec![0.5, 0.5, 1e-16]).unwrap();
        assert_eq!(v.coeffs()[2], 0.0);
    }

    #[test]
    fn product_output_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for d1 in 2..=6usize {
            for d2 in 2..=6usize {
                let lam = random_simplex(&mut rng, d1.min(d2));
                let sigma = product_output(&lam, d1, d2).unwrap();
                assert!((sigma.trace().re - 1.0).abs() < 1e-10);
                assert!(sigma.max_imag() < 1e-15);
            }
        }
    }

    #[test]
    fn product_output_vertex_spectrum() {
        let lam = SchmidtVector::vertex(3);
        let sigma = product_output(&lam, 3, 3).unwrap();
        let eig = hermitian_eigenvalues(&sigma, 1e-10).unwrap().eigenvalues;
        for &e in &eig[..4] {
            assert!((e - 0.25).abs() < 1e-10);
        }
        for &e in &eig[4..] {
            assert!(e.abs() < 1e-10);
        }
    }

    #[test]
    fn product_output_barycenter_closed_form() {
        // sigma_12 at the barycenter equals
        // ((d-2) I(x)I + d |Omega><Omega|) / (d (d-1)^2), Omega maximally entangled
        let d = 3usize;
        let lam = SchmidtVector::barycenter(d);
        let sigma = product_output(&lam, d, d).unwrap();
        let n = d * d;
        let mut closed = DenseMatrix::zeros(n, n);
        let denom = (d * (d - 1) * (d - 1)) as f64;
        for i in 0..n {
            let v = closed.get(i, i) + Complex64::new((d - 2) as f64 / denom, 0.0);
            closed.set(i, i, v);
        }
        for a in 0..d {
            for b in 0..d {
                let i = a * d + a;
                let j = b * d + b;
                let v = closed.get(i, j) + Complex64::new(1.0 / denom, 0.0);
                closed.set(i, j, v);
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert!((sigma.get(i, j) - closed.get(i, j)).norm() < 1e-12);
            }
        }
        let eig = hermitian_eigenvalues(&sigma, 1e-10).unwrap().eigenvalues;
        assert!((eig[0] - 1.0 / 3.0).abs() < 1e-10);
        for &e in &eig[1..] {
            assert!((e - 1.0 / 12.0).abs() < 1e-10);
        }
    }

    #[test]
    fn product_output_spectrum_basis_independent() {
        // conjugating both Schmidt bases by orthogonal matrices conjugates
        // sigma_12 by an orthogonal matrix, so the sorted spectrum is fixed
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let (d1, d2) = (3usize, 4usize);
        let lam = random_simplex(&mut rng, 3);
        let o1 = random_orthogonal(&mut rng, d1);
        let o2 = random_orthogonal(&mut rng, d2);
        let sigma = product_output(&lam, d1, d2).unwrap();
        let o12 = kron(&o1, &o2).unwrap();
        let rotated = o12
            .matmul(&sigma)
            .unwrap()
            .matmul(&transpose(&o12))
            .unwrap();
        let s1 = hermitian_eigenvalues(&sigma, 1e-10).unwrap().eigenvalues;
        let s2 = hermitian_eigenvalues(&rotated, 1e-10).unwrap().eigenvalues;
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let mut o = DenseMatrix::identity(n);
        for _ in 0..3 * n {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n);
            if i == j {
                j = (j + 1) % n;
            }
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let (s, c) = theta.sin_cos();
            let mut g = DenseMatrix::identity(n);
            g.set(i, i, Complex64::new(c, 0.0));
            g.set(j, j, Complex64::new(c, 0.0));
            g.set(i, j, Complex64::new(-s, 0.0));
            g.set(j, i, Complex64::new(s, 0.0));
            o = g.matmul(&o).unwrap();
        }
        o
    }

    #[test]
    fn schmidt_from_product_state() {
        let mut psi = vec![Complex64::new(0.0, 0.0); 4];
        psi[1] = Complex64::new(1.0, 0.0); // |0> (x) |1>
        let lam = schmidt_from_state(&psi, 2, 2).unwrap();
        assert_eq!(lam.coeffs(), &[1.0, 0.0]);
    }

    #[test]
    fn schmidt_from_bell_state() {
        let r = Complex64::new(0.5f64.sqrt(), 0.0);
        let psi = vec![r, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), r];
        let lam = schmidt_from_state(&psi, 2, 2).unwrap();
        assert!((lam.coeffs()[0] - 0.5).abs() < 1e-12);
        assert!((lam.coeffs()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn schmidt_matches_reshaped_gram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut psi: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        let lam = schmidt_from_state(&psi, 2, 2).unwrap();
        // oracle: 2x2 Gram matrix eigenvalues computed by the quadratic formula
        let a = psi[0].norm_sqr() + psi[1].norm_sqr();
        let b = psi[0] * psi[2].conj() + psi[1] * psi[3].conj();
        let c = psi[2].norm_sqr() + psi[3].norm_sqr();
        let disc = ((a - c) * (a - c) / 4.0 + b.norm_sqr()).sqrt();
        let mid = (a + c) / 2.0;
        assert!((lam.coeffs()[0] - (mid + disc)).abs() < 1e-10);
        assert!((lam.coeffs()[1] - (mid - disc)).abs() < 1e-10);
    }

    #[test]
    fn schmidt_rejects_bad_norm() {
        let psi = vec![Complex64::new(1.0, 0.0); 4];
        assert!(schmidt_from_state(&psi, 2, 2).is_err());
        let zero = vec![Complex64::new(0.0, 0.0); 4];
        assert!(schmidt_from_state(&zero, 2, 2).is_err());
    }
}
