//! Closed-form spectrum of the product-channel output: the three eigenvalue
//! classes, the secular solver for the g-class, the tilde rescalings and the
//! T1 + T2 + T3 decomposition of ||sigma_12||_p^p.
//!
//! A note on normalization: unit trace forces sum(g) = 1/(d2-1), which is
//! what the identity sum(gamma) = d1 - 1 of the rank-one-update matrix gives;
//! the tilde rescaling used here is g~ = (d2-1) g with c3 = (d2-1)^-p.

use serde::Serialize;

use crate::error::{Result, WhpError};
use crate::matrix_core::symmetric_eigenvalues;
use crate::wh_channel::{canonical_dims, SchmidtVector};

/// The analytic spectrum of sigma_12(lambda) for factor dimensions
/// d1 <= d2, d = d1:
///
/// * `e_pairs`: d(d-1) eigenvalues (1 - l_a - l_b)/((d1-1)(d2-1)), a != b
/// * `h_vals`: d eigenvalues (1 - l_a)/((d1-1)(d2-1)), each of
///   multiplicity d2 - d1
/// * `g_vals`: d eigenvalues gamma_a/((d1-1)(d2-1)), where gamma are the
///   secular roots
#[derive(Clone, Debug, Serialize)]
pub struct EigenClasses {
    pub d1: usize,
    pub d2: usize,
    pub e_pairs: Vec<f64>,
    pub h_vals: Vec<f64>,
    pub g_vals: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl EigenClasses {
    pub fn sum_e(&self) -> f64 {
        self.e_pairs.iter().sum()
    }

    pub fn sum_h(&self) -> f64 {
        self.h_vals.iter().sum()
    }

    pub fn sum_g(&self) -> f64 {
        self.g_vals.iter().sum()
    }

    /// h-class multiplicity.
    pub fn h_multiplicity(&self) -> usize {
        self.d2 - self.d1
    }

    /// All d1*d2 eigenvalues, sorted descending.
    pub fn flattened(&self) -> Vec<f64> {
        let mut all = Vec::with_capacity(self.d1 * self.d2);
        all.extend_from_slice(&self.e_pairs);
        for &h in &self.h_vals {
            for _ in 0..self.h_multiplicity() {
                all.push(h);
            }
        }
        all.extend_from_slice(&self.g_vals);
        all.sort_by(|x, y| y.partial_cmp(x).unwrap());
        all
    }

    /// sum_i E_i^p through the class structure (no flattening allocation).
    pub fn pnorm_pth_power(&self, p: f64) -> f64 {
        let e: f64 = self.e_pairs.iter().map(|&x| x.max(0.0).powf(p)).sum();
        let h: f64 = self.h_vals.iter().map(|&x| x.max(0.0).powf(p)).sum();
        let g: f64 = self.g_vals.iter().map(|&x| x.max(0.0).powf(p)).sum();
        e + self.h_multiplicity() as f64 * h + g
    }
}

/// The (T1, T2, T3) split of ||sigma_12||_p^p with the dimension constants
/// and the unit-sum tilde variables. Degenerate classes carry `None`:
/// d1 = 2 kills the e-class, d1 = d2 kills the h-class.
#[derive(Clone, Debug, Serialize)]
pub struct PNormDecomposition {
    pub p: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub e_tilde: Option<Vec<f64>>,
    pub h_tilde: Option<Vec<f64>>,
    pub g_tilde: Vec<f64>,
}

impl PNormDecomposition {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2 + self.t3
    }
}

fn clamp_class(vals: &mut [f64]) -> Result<()> {
    for v in vals {
        if *v < -1e-12 {
            return Err(WhpError::SimplexViolation(format!(
                "analytic eigenvalue {v} below clamping tolerance"
            )));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Roots gamma_1..gamma_d of the secular equation
/// prod_a (1 - 2 l_a - gamma) {1 + sum_a l_a / (1 - 2 l_a - gamma)} = 0,
/// sorted descending.
///
/// Solved as the symmetric eigenproblem diag(1 - 2 lambda) + sqrt(lambda)
/// sqrt(lambda)^T, which handles repeated coefficients with no deflation
/// logic: a coalesced pole is itself a root.
pub fn solve_secular(lambda: &SchmidtVector) -> Result<Vec<f64>> {
    let d = lambda.dim();
    let lam = lambda.coeffs();
    let mut m = vec![0.0f64; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = (lam[i] * lam[j]).sqrt();
        }
        m[i * d + i] += 1.0 - 2.0 * lam[i];
    }
    let spec = symmetric_eigenvalues(d, &m, 1e-13)?;
    let mut gamma = spec.eigenvalues;
    for g in &mut gamma {
        if *g < -1e-12 {
            return Err(WhpError::SimplexViolation(format!(
                "secular root {g} below clamping tolerance"
            )));
        }
        if *g < 0.0 {
            *g = 0.0;
        }
    }
    Ok(gamma)
}

/// Cross-validation path: bisection directly on the secular function
/// w(gamma) = 1 + sum_a l_a / (mu_a - gamma) with poles mu_a = 1 - 2 l_a.
/// Exposed for the CLI `--secular-method bisection` flag and the tests.
pub fn solve_secular_bisection(lambda: &SchmidtVector) -> Result<Vec<f64>> {
    let lam = lambda.coeffs();
    let d = lam.len();
    let mut roots: Vec<f64> = Vec::with_capacity(d);

    // zero-weight coefficients decouple: gamma = 1 exactly
    let zero_count = lam.iter().filter(|&&l| l == 0.0).count();
    roots.extend(std::iter::repeat_n(1.0, zero_count));

    // aggregate equal poles among the positive-weight coefficients
    let mut poles: Vec<(f64, f64, usize)> = Vec::new(); // (mu, weight, count)
    let mut positive: Vec<f64> = lam.iter().copied().filter(|&l| l > 0.0).collect();
    positive.sort_by(|a, b| b.partial_cmp(a).unwrap()); // mu ascending
    for l in positive {
        let mu = 1.0 - 2.0 * l;
        match poles.last_mut() {
            Some(p) if (p.0 - mu).abs() <= 1e-12 => {
                p.1 += l;
                p.2 += 1;
            }
            _ => poles.push((mu, l, 1)),
        }
    }
    // a pole of multiplicity c is a root of multiplicity c - 1
    for &(mu, _, count) in &poles {
        roots.extend(std::iter::repeat_n(mu, count - 1));
    }

    let w = |gamma: f64| -> f64 {
        1.0 + poles
            .iter()
            .map(|&(mu, wt, _)| wt / (mu - gamma))
            .sum::<f64>()
    };
    let total_weight: f64 = poles.iter().map(|p| p.1).sum();

    // one root in each inter-pole interval, one above the largest pole
    for i in 0..poles.len() {
        let lo = poles[i].0;
        let hi = if i + 1 < poles.len() {
            poles[i + 1].0
        } else {
            lo + total_weight + 1.0
        };
        roots.push(bisect_secular(&w, lo, hi, i + 1 == poles.len())?);
    }

    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    for r in &mut roots {
        if *r < 0.0 && *r > -1e-12 {
            *r = 0.0;
        }
    }
    Ok(roots)
}

/// Bisection on (lo, hi) where w -> -inf at lo+ and w(hi) > 0 (interior
/// interval ends just left of the next pole; the top interval has a finite
/// right end beyond the last root).
fn bisect_secular(w: &dyn Fn(f64) -> f64, lo: f64, hi: f64, top: bool) -> Result<f64> {
    let span = hi - lo;
    let mut a = lo + span * 1e-15;
    let mut b = if top { hi } else { hi - span * 1e-15 };
    // walk the endpoints inward until the signs bracket
    let mut fa = w(a);
    let mut shrink = 1e-15;
    while fa >= 0.0 && shrink < 1e-3 {
        shrink *= 10.0;
        a = lo + span * shrink;
        fa = w(a);
    }
    if fa >= 0.0 || w(b) <= 0.0 {
        // degenerate bracket: the root is numerically at the pole
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if w(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// The three eigenvalue classes of sigma_12(lambda).
pub fn analytic_spectrum(lambda: &SchmidtVector, d1: usize, d2: usize) -> Result<EigenClasses> {
    let (d1, d2) = canonical_dims(d1, d2)?;
    let d = d1;
    if lambda.dim() != d {
        return Err(WhpError::DimensionMismatch {
            expected: format!("Schmidt vector of length {d}"),
            got: format!("{}", lambda.dim()),
        });
    }
    let lam = lambda.coeffs();
    let denom = ((d1 - 1) * (d2 - 1)) as f64;

    let mut e_pairs = Vec::with_capacity(d * (d - 1));
    for a in 0..d {
        for b in 0..d {
            if a != b {
                e_pairs.push((1.0 - lam[a] - lam[b]) / denom);
            }
        }
    }
    clamp_class(&mut e_pairs)?;

    let mut h_vals: Vec<f64> = lam.iter().map(|&l| (1.0 - l) / denom).collect();
    clamp_class(&mut h_vals)?;

    let gamma = solve_secular(lambda)?;
    let mut g_vals: Vec<f64> = gamma.iter().map(|&g| g / denom).collect();
    clamp_class(&mut g_vals)?;

    Ok(EigenClasses {
        d1,
        d2,
        e_pairs,
        h_vals,
        g_vals,
        gamma,
    })
}

/// The T1 + T2 + T3 split with tilde variables and dimension constants:
/// c1 = ((d1-2)/(d2-1))^p, c2 = (d2-d1) (d2-1)^-p, c3 = (d2-1)^-p.
pub fn pnorm_decomposition(
    lambda: &SchmidtVector,
    d1: usize,
    d2: usize,
    p: f64,
) -> Result<PNormDecomposition> {
    if p < 1.0 {
        return Err(WhpError::InvalidArgument(format!(
            "p must be >= 1, got {p}"
        )));
    }
    let classes = analytic_spectrum(lambda, d1, d2)?;
    let (d1, d2) = (classes.d1, classes.d2);
    let dm1 = (d2 - 1) as f64;

    let c1 = ((d1 as f64 - 2.0) / dm1).powf(p);
    let c2 = (d2 - d1) as f64 * dm1.powf(-p);
    let c3 = dm1.powf(-p);

    let (e_tilde, t1) = if d1 == 2 {
        (None, 0.0)
    } else {
        let scale = dm1 / (d1 as f64 - 2.0);
        let et: Vec<f64> = classes.e_pairs.iter().map(|&e| scale * e).collect();
        let t1 = c1 * et.iter().map(|&x| x.powf(p)).sum::<f64>();
        (Some(et), t1)
    };

    let (h_tilde, t2) = if d1 == d2 {
        (None, 0.0)
    } else {
        let ht: Vec<f64> = classes.h_vals.iter().map(|&h| dm1 * h).collect();
        let t2 = c2 * ht.iter().map(|&x| x.powf(p)).sum::<f64>();
        (Some(ht), t2)
    };

    let g_tilde: Vec<f64> = classes.g_vals.iter().map(|&g| dm1 * g).collect();
    let t3 = c3 * g_tilde.iter().map(|&x| x.powf(p)).sum::<f64>();

    Ok(PNormDecomposition {
        p,
        t1,
        t2,
        t3,
        c1,
        c2,
        c3,
        e_tilde,
        h_tilde,
        g_tilde,
    })
}

/// All elementary symmetric polynomials s_0..s_n of `x` via the stable
/// recurrence expanding prod (1 + t x_i) coefficient by coefficient.
pub fn symmetric_polynomials(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut s = vec![0.0f64; n + 1];
    s[0] = 1.0;
    for (i, &xi) in x.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            s[k] += xi * s[k - 1];
        }
    }
    s
}

/// s_k of the secular roots gamma(lambda).
pub fn s_hat(lambda: &SchmidtVector, k: usize) -> Result<f64> {
    let gamma = solve_secular(lambda)?;
    if k > gamma.len() {
        return Err(WhpError::InvalidArgument(format!(
            "k = {k} exceeds dimension {}",
            gamma.len()
        )));
    }
    Ok(symmetric_polynomials(&gamma)[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::hermitian_eigenvalues;
    use crate::testutil::random_simplex;
    use crate::wh_channel::product_output;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn secular_vertex() {
        let lam = SchmidtVector::vertex(3);
        let gamma = solve_secular(&lam).unwrap();
        let expected = [1.0, 1.0, 0.0];
        for (g, e) in gamma.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12, "gamma {gamma:?}");
        }
    }

    #[test]
    fn secular_half_half() {
        let lam = SchmidtVector::new(vec![0.5, 0.5]).unwrap();
        let gamma = solve_secular(&lam).unwrap();
        assert!((gamma[0] - 1.0).abs() < 1e-12);
        assert!(gamma[1].abs() < 1e-12);
    }

    #[test]
    fn secular_barycenter() {
        let lam = SchmidtVector::barycenter(3);
        let gamma = solve_secular(&lam).unwrap();
        assert!((gamma[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((gamma[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((gamma[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn secular_trace_identity_and_bisection_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=6 {
            for _ in 0..20 {
                let lam = random_simplex(&mut rng, d);
                let gamma = solve_secular(&lam).unwrap();
                let sum: f64 = gamma.iter().sum();
                assert!((sum - (d as f64 - 1.0)).abs() < 1e-10);
                let gb = solve_secular_bisection(&lam).unwrap();
                for (a, b) in gamma.iter().zip(&gb) {
                    assert!((a - b).abs() < 1e-9, "eigen {gamma:?} vs bisect {gb:?}");
                }
            }
        }
    }

    #[test]
    fn secular_bisection_handles_repeats_and_zeros() {
        for lam in [
            SchmidtVector::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
            SchmidtVector::new(vec![0.4, 0.4, 0.2, 0.0]).unwrap(),
            SchmidtVector::vertex(4),
        ] {
            let a = solve_secular(&lam).unwrap();
            let b = solve_secular_bisection(&lam).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn secular_roots_interlace_poles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            // distinct lambdas -> distinct poles
            let lam = loop {
                let l = random_simplex(&mut rng, 4);
                let mut v = l.coeffs().to_vec();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if v.windows(2).all(|w| w[1] - w[0] > 1e-3) {
                    break l;
                }
            };
            let mut poles: Vec<f64> = lam.coeffs().iter().map(|&l| 1.0 - 2.0 * l).collect();
            poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut gamma = solve_secular(&lam).unwrap();
            gamma.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let d = gamma.len();
            // ascending: gamma[i] in (poles[i], poles[i+1]) and gamma[d-1] above the top pole
            for i in 0..d - 1 {
                assert!(
                    gamma[i] > poles[i] && gamma[i] < poles[i + 1],
                    "root {i} out of bracket: {gamma:?} vs {poles:?}"
                );
            }
            assert!(gamma[d - 1] > poles[d - 1]);
        }
    }

    #[test]
    fn analytic_spectrum_vertex_golden() {
        let lam = SchmidtVector::vertex(3);
        let c = analytic_spectrum(&lam, 3, 3).unwrap();
        let mut e = c.e_pairs.clone();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(e.len(), 6);
        for &x in &e[..4] {
            assert!(x.abs() < 1e-12);
        }
        for &x in &e[4..] {
            assert!((x - 0.25).abs() < 1e-12);
        }
        assert!((c.gamma[0] - 1.0).abs() < 1e-12);
        assert!((c.gamma[1] - 1.0).abs() < 1e-12);
        assert!(c.gamma[2].abs() < 1e-12);
        assert!((c.g_vals[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn analytic_spectrum_barycenter_golden() {
        let lam = SchmidtVector::barycenter(3);
        let c = analytic_spectrum(&lam, 3, 3).unwrap();
        for &x in &c.e_pairs {
            assert!((x - 1.0 / 12.0).abs() < 1e-12);
        }
        let mut g = c.g_vals.clone();
        g.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((g[1] - 1.0 / 12.0).abs() < 1e-12);
        assert!((g[2] - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_rectangular_case_matches_dense_oracle() {
        let lam = SchmidtVector::new(vec![0.5, 0.5]).unwrap();
        let c = analytic_spectrum(&lam, 2, 4).unwrap();
        assert!(c.e_pairs.iter().all(|&e| e.abs() < 1e-12));
        for &h in &c.h_vals {
            assert!((h - 1.0 / 6.0).abs() < 1e-12);
        }
        assert_eq!(c.h_multiplicity(), 2);
        let sigma = product_output(&lam, 2, 4).unwrap();
        let dense = hermitian_eigenvalues(&sigma, 1e-11).unwrap().eigenvalues;
        let analytic = c.flattened();
        for (a, b) in analytic.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{analytic:?} vs {dense:?}");
        }
    }

    #[test]
    fn class_sums_and_oracle_equivalence_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let d1 = rng.random_range(2..=5usize);
            let d2 = rng.random_range(d1..=6usize);
            let lam = random_simplex(&mut rng, d1);
            let c = analytic_spectrum(&lam, d1, d2).unwrap();
            let dm = (d2 - 1) as f64;
            assert!((c.sum_e() - (d1 as f64 - 2.0) / dm).abs() < 1e-10);
            assert!((c.sum_h() - 1.0 / dm).abs() < 1e-10);
            assert!((c.sum_g() - 1.0 / dm).abs() < 1e-10);
            let total = c.sum_e() + (d2 - d1) as f64 * c.sum_h() + c.sum_g();
            assert!((total - 1.0).abs() < 1e-10);

            let sigma = product_output(&lam, d1, d2).unwrap();
            let dense = hermitian_eigenvalues(&sigma, 1e-11).unwrap().eigenvalues;
            for (a, b) in c.flattened().iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_dimensions_still_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // d1 = d2: h-class empty
        let lam = random_simplex(&mut rng, 4);
        let c = analytic_spectrum(&lam, 4, 4).unwrap();
        assert_eq!(c.h_multiplicity(), 0);
        let sigma = product_output(&lam, 4, 4).unwrap();
        let dense = hermitian_eigenvalues(&sigma, 1e-11).unwrap().eigenvalues;
        for (a, b) in c.flattened().iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9);
        }
        // d1 = 2: e-class identically zero
        let lam2 = random_simplex(&mut rng, 2);
        let c2 = analytic_spectrum(&lam2, 2, 5).unwrap();
        assert!(c2.e_pairs.iter().all(|&e| e.abs() < 1e-12));
    }

    #[test]
    fn decomposition_barycenter_p2() {
        let lam = SchmidtVector::barycenter(3);
        let dec = pnorm_decomposition(&lam, 3, 3, 2.0).unwrap();
        assert!((dec.total() - 1.0 / 6.0).abs() < 1e-12);
        assert!((dec.t1 - 6.0 / 144.0).abs() < 1e-12);
        assert_eq!(dec.t2, 0.0);
        assert!(dec.h_tilde.is_none());
        // unit tilde sums
        let et = dec.e_tilde.as_ref().unwrap();
        assert!((et.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((dec.g_tilde.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decomposition_vertex_p2() {
        let lam = SchmidtVector::vertex(3);
        let dec = pnorm_decomposition(&lam, 3, 3, 2.0).unwrap();
        assert!((dec.total() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn decomposition_d1_2_kills_t1() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lam = random_simplex(&mut rng, 2);
        for p in [1.3, 2.0, 3.0] {
            let dec = pnorm_decomposition(&lam, 2, 5, p).unwrap();
            assert_eq!(dec.t1, 0.0);
            assert!(dec.e_tilde.is_none());
        }
    }

    #[test]
    fn decomposition_reproduces_flattened_power_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let d1 = rng.random_range(2..=5usize);
            let d2 = rng.random_range(d1..=6usize);
            let p = 1.0 + rng.random::<f64>();
            let lam = random_simplex(&mut rng, d1);
            let dec = pnorm_decomposition(&lam, d1, d2, p).unwrap();
            let c = analytic_spectrum(&lam, d1, d2).unwrap();
            let direct: f64 = c.flattened().iter().map(|&x| x.powf(p)).sum();
            assert!((dec.total() - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_polynomials_examples() {
        assert_eq!(
            symmetric_polynomials(&[1.0, 1.0, 1.0]),
            vec![1.0, 3.0, 3.0, 1.0]
        );
        let s = symmetric_polynomials(&[2.0, 3.0]);
        assert_eq!(s, vec![1.0, 5.0, 6.0]);
    }

    #[test]
    fn symmetric_polynomials_root_reconstruction() {
        // coefficients (-1)^(n-k) s_(n-k) vanish at every root
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let s = symmetric_polynomials(&x);
        let n = x.len();
        for &root in &x {
            let mut val = 0.0;
            for k in 0..=n {
                let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
                val += root.powi(k as i32) * sign * s[n - k];
            }
            assert!(val.abs() < 1e-10, "residual {val}");
        }
    }

    #[test]
    fn s_hat_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for d in 2..=5 {
            let lam = random_simplex(&mut rng, d);
            assert!((s_hat(&lam, 0).unwrap() - 1.0).abs() < 1e-14);
            assert!((s_hat(&lam, 1).unwrap() - (d as f64 - 1.0)).abs() < 1e-10);
        }
        let bary = SchmidtVector::barycenter(3);
        assert!((s_hat(&bary, 2).unwrap() - 1.0).abs() < 1e-10);
    }
}
