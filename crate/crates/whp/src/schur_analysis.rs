//! Majorization preorder, the Schur-convexity property harness, and the
//! divided-difference calculus behind the monotonicity of power sums in the
//! elementary symmetric polynomials.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, WhpError};
use crate::wh_channel::SchmidtVector;

/// Divided-difference formulas refuse nodes closer than this: the implicit
/// function regime requires simple roots, and the formulas lose all accuracy
/// near coalescence.
pub const SEPARATION_THRESHOLD: f64 = 1e-6;

/// Violation tolerance of the Schur monotonicity harness.
pub const SCHUR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Convex,
    Concave,
}

/// Ordered pair with lower majorized by upper.
#[derive(Clone, Debug, Serialize)]
pub struct MajorizationPair {
    pub lower: SchmidtVector,
    pub upper: SchmidtVector,
}

/// Outcome of a Schur monotonicity sweep, JSON-serializable.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TestReport {
    pub function: String,
    pub direction: Direction,
    pub d1: usize,
    pub d2: Option<usize>,
    pub p: Option<f64>,
    pub pairs: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub seed: u64,
}

/// True iff x is majorized by y: partial sums of the descending
/// rearrangements satisfy sum_{j<=k} x <= sum_{j<=k} y for every k, with
/// equality at k = n (automatic on the simplex).
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(WhpError::DimensionMismatch {
            expected: format!("{}", x.len()),
            got: format!("{}", y.len()),
        });
    }
    for (name, v) in [("x", x), ("y", y)] {
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-10 || v.iter().any(|&t| t < -1e-10) {
            return Err(WhpError::SimplexViolation(format!(
                "{name} is not on the simplex (sum {sum})"
            )));
        }
    }
    let desc = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    };
    let xd = desc(x);
    let yd = desc(y);
    let mut sx = 0.0;
    let mut sy = 0.0;
    for k in 0..x.len() {
        sx += xd[k];
        sy += yd[k];
        if sx > sy + 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// lower = D upper for D a convex combination of permutation matrices.
pub(crate) fn apply_permutation_mixture(
    upper: &[f64],
    perms: &[Vec<usize>],
    weights: &[f64],
) -> Vec<f64> {
    let d = upper.len();
    let mut lower = vec![0.0; d];
    for (perm, &w) in perms.iter().zip(weights) {
        for i in 0..d {
            lower[i] += w * upper[perm[i]];
        }
    }
    lower
}

/// Doubly stochastic mixing of `mixes` seeded random permutations applied to
/// `upper`; the result is majorized by `upper` by Birkhoff's theorem.
pub fn random_majorization_pair(
    upper: &SchmidtVector,
    seed: u64,
    mixes: usize,
) -> Result<MajorizationPair> {
    if mixes == 0 {
        return Err(WhpError::InvalidArgument("mixes must be >= 1".into()));
    }
    let d = upper.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perms = Vec::with_capacity(mixes);
    for _ in 0..mixes {
        let mut p: Vec<usize> = (0..d).collect();
        // Fisher-Yates
        for i in (1..d).rev() {
            let j = rng.random_range(0..=i);
            p.swap(i, j);
        }
        perms.push(p);
    }
    let mut weights: Vec<f64> = (0..mixes).map(|_| -(rng.random::<f64>()).ln()).collect();
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);

    let lower = apply_permutation_mixture(upper.coeffs(), &perms, &weights);
    Ok(MajorizationPair {
        lower: SchmidtVector::new(lower)?,
        upper: upper.clone(),
    })
}

/// Uniform Dirichlet sample, optionally sparsified: each coordinate is
/// zeroed with probability 0.2 (keeping at least one) so that faces and
/// near-vertex regions are exercised too.
pub fn sample_simplex(rng: &mut ChaCha8Rng, d: usize, sparsify: bool) -> SchmidtVector {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| -(rng.random::<f64>()).ln()).collect();
        if sparsify {
            for x in v.iter_mut() {
                if rng.random::<f64>() < 0.2 {
                    *x = 0.0;
                }
            }
        }
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
            return SchmidtVector::new(v).unwrap();
        }
    }
}

/// Dirichlet sample with all pairwise node gaps above `min_gap`, suitable
/// for [`DividedDifferenceProbe`] construction.
pub fn sample_probe_nodes(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let v = sample_simplex(rng, n, false).coeffs().to_vec();
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[1] - w[0] > min_gap) {
            return v;
        }
    }
}

/// Samples `pairs` majorization pairs and counts violations of
/// f(lower) <= f(upper) (convex) or f(lower) >= f(upper) (concave) beyond
/// [`SCHUR_TOL`]. Per-sample seeds are derived by counter, so the report is
/// identical for a fixed seed regardless of evaluation order.
pub fn schur_test<F>(
    function: &str,
    f: F,
    d: usize,
    pairs: usize,
    seed: u64,
    direction: Direction,
) -> Result<TestReport>
where
    F: Fn(&SchmidtVector) -> Result<f64>,
{
    if pairs == 0 {
        return Err(WhpError::InvalidArgument("pairs must be >= 1".into()));
    }
    let mut violations = 0usize;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_pair = None;
    for i in 0..pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 + i as u64);
        let upper = sample_simplex(&mut rng, d, true);
        let mixes = rng.random_range(1..=d.max(2));
        let pair_seed = seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1));
        let pair = random_majorization_pair(&upper, pair_seed, mixes)?;

        let eval = |v: &SchmidtVector| {
            f(v).map_err(|e| WhpError::EvalFailure {
                sample: v.coeffs().to_vec(),
                source: Box::new(e),
            })
        };
        let fl = eval(&pair.lower)?;
        let fu = eval(&pair.upper)?;
        let margin = match direction {
            Direction::Convex => fl - fu,
            Direction::Concave => fu - fl,
        };
        if margin > worst_margin {
            worst_margin = margin;
            worst_pair = Some((pair.lower.coeffs().to_vec(), pair.upper.coeffs().to_vec()));
        }
        if margin > SCHUR_TOL {
            violations += 1;
        }
    }
    Ok(TestReport {
        function: function.to_string(),
        direction,
        d1: d,
        d2: None,
        p: None,
        pairs,
        violations,
        worst_margin,
        worst_pair,
        seed,
    })
}

/// Monic polynomial with the given roots: coefficient of t^k is
/// (-1)^(n-k) s_(n-k), returned ascending in k.
pub fn char_poly_coeffs(roots: &[f64]) -> Vec<f64> {
    let n = roots.len();
    let s = crate::spectrum_analytic::symmetric_polynomials(roots);
    (0..=n)
        .map(|k| {
            let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * s[n - k]
        })
        .collect()
}

fn check_separation(nodes: &[f64]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let gap = (nodes[i] - nodes[j]).abs();
            if gap <= SEPARATION_THRESHOLD {
                return Err(WhpError::NodeCoalescence {
                    gap,
                    threshold: SEPARATION_THRESHOLD,
                });
            }
        }
    }
    Ok(())
}

/// Strictly distinct nonnegative nodes on the probability simplex with an
/// exponent p in (1,2] and a symmetric-polynomial index m in 2..=n.
#[derive(Clone, Debug, Serialize)]
pub struct DividedDifferenceProbe {
    pub nodes: Vec<f64>,
    pub p: f64,
    pub m: usize,
}

impl DividedDifferenceProbe {
    pub fn new(nodes: Vec<f64>, p: f64, m: usize) -> Result<Self> {
        let n = nodes.len();
        if n < 2 {
            return Err(WhpError::InvalidArgument("need at least 2 nodes".into()));
        }
        if !(1.0 < p && p <= 2.0) {
            return Err(WhpError::InvalidArgument(format!(
                "p must lie in (1, 2], got {p}"
            )));
        }
        if m < 2 || m > n {
            return Err(WhpError::InvalidArgument(format!(
                "m must lie in 2..={n}, got {m}"
            )));
        }
        let sum: f64 = nodes.iter().sum();
        if (sum - 1.0).abs() > 1e-10 || nodes.iter().any(|&x| x < 0.0) {
            return Err(WhpError::SimplexViolation(format!(
                "probe nodes must be nonnegative and sum to 1 (sum {sum})"
            )));
        }
        check_separation(&nodes)?;
        Ok(Self { nodes, p, m })
    }
}

/// dx_j/ds_m = (-1)^(m+1) x_j^(n-m) / prod_{i != j} (x_j - x_i), the
/// implicit derivative of root j with respect to the m-th elementary
/// symmetric polynomial of the roots. `j` is zero-based.
pub fn droot_dsm(nodes: &[f64], j: usize, m: usize) -> Result<f64> {
    let n = nodes.len();
    if j >= n || m < 2 || m > n {
        return Err(WhpError::InvalidArgument(format!(
            "require j < {n} and 2 <= m <= {n}, got j={j}, m={m}"
        )));
    }
    check_separation(nodes)?;
    let sign = if (m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut denom = 1.0;
    for (i, &xi) in nodes.iter().enumerate() {
        if i != j {
            denom *= nodes[j] - xi;
        }
    }
    Ok(sign * nodes[j].powi((n - m) as i32) / denom)
}

/// df/ds_m for f(x) = sum x_i^p: the chain-rule sum
/// sum_j (-1)^(m+1) x_j^(n-m) p x_j^(p-1) / prod_{i != j}(x_j - x_i).
///
/// Strictly negative for 1 < p < 2 and every m in 2..=n; at p = 2 it is
/// negative for m = 2 and vanishes for m >= 3.
pub fn df_dsm(probe: &DividedDifferenceProbe) -> Result<f64> {
    let n = probe.nodes.len();
    let (p, m) = (probe.p, probe.m);
    let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut total = 0.0;
    for j in 0..n {
        let xj = probe.nodes[j];
        let mut denom = 1.0;
        for (i, &xi) in probe.nodes.iter().enumerate() {
            if i != j {
                denom *= xj - xi;
            }
        }
        total += sign * xj.powi((n - m) as i32) * p * xj.powf(p - 1.0) / denom;
    }
    Ok(total)
}

/// Convenience: g_m(x) = (-1)^(m+1) p x^(n-m+p-1), whose Newton divided
/// difference over the probe nodes equals df/ds_m.
pub fn lemma_gm(p: f64, n: usize, m: usize) -> impl Fn(f64) -> f64 {
    let sign = if (m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let exponent = (n - m) as f64 + p - 1.0;
    move |x: f64| sign * p * x.powf(exponent)
}

/// (n-1)-th derivative of g_m:
/// (-1)^(m+1) p (p-m+1)(p-m+2)...(p-m+n-1) x^(p-m).
pub fn lemma_gm_deriv(p: f64, n: usize, m: usize) -> impl Fn(f64) -> f64 {
    let sign = if (m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut factor = p;
    for k in 1..n {
        factor *= p - m as f64 + k as f64;
    }
    let exponent = p - m as f64;
    move |x: f64| sign * factor * x.powf(exponent)
}

/// Leading interpolation coefficient through the nodes:
/// sum_j g(x_j) / prod_{i != j}(x_j - x_i). Symmetric in the nodes.
pub fn newton_divided_difference<G>(g: G, nodes: &[f64]) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    check_separation(nodes)?;
    let mut total = 0.0;
    for (j, &xj) in nodes.iter().enumerate() {
        let mut denom = 1.0;
        for (i, &xi) in nodes.iter().enumerate() {
            if i != j {
                denom *= xj - xi;
            }
        }
        total += g(xj) / denom;
    }
    Ok(total)
}

/// Monte-Carlo divided-difference estimate with its standard error.
#[derive(Clone, Debug, Serialize)]
pub struct HermiteGenocchiEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// The divided difference as a simplex integral: the average of
/// g^(n-1)(p . x) over uniform Dirichlet weights p, divided by (n-1)!.
/// Deterministic for a fixed seed.
pub fn hermite_genocchi<G>(
    g_deriv: G,
    nodes: &[f64],
    samples: usize,
    seed: u64,
) -> Result<HermiteGenocchiEstimate>
where
    G: Fn(f64) -> f64,
{
    if samples == 0 {
        return Err(WhpError::InvalidArgument("samples must be >= 1".into()));
    }
    check_separation(nodes)?;
    let n = nodes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let mut w: Vec<f64> = (0..n).map(|_| -(rng.random::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let point: f64 = w.iter().zip(nodes).map(|(wi, xi)| wi * xi).sum();
        let v = g_deriv(point);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    let fact: f64 = (1..n).map(|k| k as f64).product();
    Ok(HermiteGenocchiEstimate {
        estimate: mean / fact,
        std_error: (var / samples as f64).sqrt() / fact,
        samples,
    })
}
