//! Maximal p-norms: the closed-form single-channel value, multi-start
//! projected-gradient maximization of ||sigma_12(lambda)||_p^p over the
//! simplex, multiplicativity gaps, and the counterexample crossover finder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, WhpError};
use crate::matrix_core::hermitian_eigenvalues;
use crate::schur_analysis::sample_simplex;
use crate::spectrum_analytic::analytic_spectrum;
use crate::wh_channel::{canonical_dims, product_output, SchmidtVector};

const MAX_ITERS_PER_START: usize = 200;
const GRAD_STEP: f64 = 1e-6;
const INITIAL_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-12;
const OBJ_DELTA_STOP: f64 = 1e-13;
/// Ties between an interior maximum and the vertex resolve to the vertex.
const VERTEX_TIE_TOL: f64 = 1e-12;

/// Best local maximum of ||sigma_12(lambda)||_p^p found over the restarts,
/// with the exact vertex value always reported alongside.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OptimizationResult {
    pub d1: usize,
    pub d2: usize,
    pub p: f64,
    pub best_lambda: SchmidtVector,
    pub best_value: f64,
    pub vertex_value: f64,
    pub gap: f64,
    pub restarts: usize,
    pub converged: bool,
    pub iterations_total: usize,
}

impl OptimizationResult {
    /// d1,d2,p,best_value,vertex_value,gap,converged at full precision.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.d1, self.d2, self.p, self.best_value, self.vertex_value, self.gap, self.converged
        )
    }
}

/// nu_p of a single channel: the output spectrum of any pure input is
/// {0, 1/(d-1) x (d-1)}, so nu_p = (d-1)^(1/p - 1) independent of the state.
pub fn nu_single(d: usize, p: f64) -> Result<f64> {
    if d < 2 {
        return Err(WhpError::InvalidArgument(format!(
            "dimension must be >= 2, got {d}"
        )));
    }
    if p < 1.0 {
        return Err(WhpError::InvalidArgument(format!(
            "p must be >= 1, got {p}"
        )));
    }
    Ok(((d - 1) as f64).powf(1.0 / p - 1.0))
}

/// sum_i E_i(lambda)^p through the analytic spectrum.
pub fn product_pnorm_pth_power(
    lambda: &SchmidtVector,
    d1: usize,
    d2: usize,
    p: f64,
) -> Result<f64> {
    Ok(analytic_spectrum(lambda, d1, d2)?.pnorm_pth_power(p))
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    // kill the residual roundoff in the sum
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x /= s);
    } else {
        out[n - 1] = 1.0;
    }
    out
}

struct RestartOutcome {
    lambda: SchmidtVector,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn ascend<F>(objective: &F, start: &SchmidtVector) -> Result<RestartOutcome>
where
    F: Fn(&SchmidtVector) -> Result<f64>,
{
    let d = start.dim();
    let mut x = start.coeffs().to_vec();
    let mut fx = objective(&SchmidtVector::new(x.clone())?)?;
    let mut iterations = 0usize;
    let mut converged = false;

    'outer: for _ in 0..MAX_ITERS_PER_START {
        iterations += 1;
        // central finite differences on the simplex (probes projected back)
        let mut grad = vec![0.0f64; d];
        for i in 0..d {
            let mut plus = x.clone();
            plus[i] += GRAD_STEP;
            let mut minus = x.clone();
            minus[i] -= GRAD_STEP;
            let fp = objective(&SchmidtVector::new(project_simplex(&plus))?)?;
            let fm = objective(&SchmidtVector::new(project_simplex(&minus))?)?;
            grad[i] = (fp - fm) / (2.0 * GRAD_STEP);
        }
        // tangent of the sum constraint
        let mean: f64 = grad.iter().sum::<f64>() / d as f64;
        grad.iter_mut().for_each(|g| *g -= mean);

        let mut step = INITIAL_STEP;
        loop {
            if step <= MIN_STEP {
                converged = true;
                break 'outer;
            }
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + step * gi).collect();
            let cand = project_simplex(&cand);
            let fc = objective(&SchmidtVector::new(cand.clone())?)?;
            if fc > fx {
                let delta = fc - fx;
                x = cand;
                fx = fc;
                if delta <= OBJ_DELTA_STOP {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            step *= 0.5;
        }
    }

    Ok(RestartOutcome {
        lambda: SchmidtVector::new(x)?,
        value: fx,
        iterations,
        converged,
    })
}

/// Multi-start projected-gradient ascent of lambda -> sum E_i(lambda)^p over
/// the simplex. The vertex and the barycenter are always among the starts;
/// the remaining `restarts - 2` starts are seeded Dirichlet samples.
pub fn maximize_product_pnorm(
    d1: usize,
    d2: usize,
    p: f64,
    restarts: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    if restarts == 0 {
        return Err(WhpError::InvalidArgument("restarts must be >= 1".into()));
    }
    if p < 1.0 {
        return Err(WhpError::InvalidArgument(format!(
            "p must be >= 1, got {p}"
        )));
    }
    let (d1, d2) = canonical_dims(d1, d2)?;
    let d = d1;
    let objective =
        |lam: &SchmidtVector| -> Result<f64> { product_pnorm_pth_power(lam, d1, d2, p) };

    let mut starts = vec![SchmidtVector::vertex(d), SchmidtVector::barycenter(d)];
    for r in 0..restarts.saturating_sub(2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 + r as u64);
        starts.push(sample_simplex(&mut rng, d, false));
    }

    let vertex_value = objective(&SchmidtVector::vertex(d))?;

    let mut best: Option<RestartOutcome> = None;
    let mut iterations_total = 0usize;
    let mut any_converged = false;
    for start in &starts {
        let outcome = ascend(&objective, start)?;
        spot_check_dense(&outcome.lambda, d1, d2, p, outcome.value)?;
        iterations_total += outcome.iterations;
        any_converged |= outcome.converged;
        let better = match &best {
            None => true,
            Some(b) => outcome.value > b.value,
        };
        if better {
            best = Some(outcome);
        }
    }
    if !any_converged {
        return Err(WhpError::NonConvergence {
            sweeps: MAX_ITERS_PER_START,
            off: f64::NAN,
        });
    }
    let best = best.expect("at least one start");

    let (best_lambda, best_value, gap) = if best.value <= vertex_value + VERTEX_TIE_TOL {
        (SchmidtVector::vertex(d), vertex_value, 0.0)
    } else {
        let gap = best.value - vertex_value;
        (best.lambda, best.value, gap)
    };

    Ok(OptimizationResult {
        d1,
        d2,
        p,
        best_lambda,
        best_value,
        vertex_value,
        gap,
        restarts: starts.len(),
        converged: true,
        iterations_total,
    })
}

/// The analytic-spectrum objective must agree with the dense eigensolver at
/// every accepted final iterate.
fn spot_check_dense(
    lambda: &SchmidtVector,
    d1: usize,
    d2: usize,
    p: f64,
    analytic_value: f64,
) -> Result<()> {
    let sigma = product_output(lambda, d1, d2)?;
    let dense = hermitian_eigenvalues(&sigma, 1e-11)?;
    let dense_value: f64 = dense.eigenvalues.iter().map(|&e| e.max(0.0).powf(p)).sum();
    if (dense_value - analytic_value).abs() > 1e-9 {
        return Err(WhpError::InvalidArgument(format!(
            "analytic objective {analytic_value} disagrees with dense oracle {dense_value}"
        )));
    }
    Ok(())
}

/// Best found value minus the multiplicative bound
/// (nu_p(d1) nu_p(d2))^p = ((d1-1)(d2-1))^(1-p).
pub fn multiplicativity_gap(
    d1: usize,
    d2: usize,
    p: f64,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    let result = maximize_product_pnorm(d1, d2, p, restarts, seed)?;
    let bound = (((d1 - 1) * (d2 - 1)) as f64).powf(1.0 - p);
    Ok(result.best_value - bound)
}

/// Bisection on p of F(p) = [barycenter ||sigma_12||_p^p] - [vertex value]
/// for the d = d1 = d2 channel pair; the sign change locates the exponent
/// where the maximally entangled input overtakes the unentangled one.
pub fn find_crossover(d: usize, p_lo: f64, p_hi: f64, tol: f64) -> Result<f64> {
    if d < 3 {
        return Err(WhpError::InvalidArgument(format!(
            "crossover requires d >= 3, got {d}"
        )));
    }
    if p_lo >= p_hi || tol <= 0.0 {
        return Err(WhpError::InvalidArgument(
            "require p_lo < p_hi and tol > 0".into(),
        ));
    }
    let bary = analytic_spectrum(&SchmidtVector::barycenter(d), d, d)?;
    let vert = analytic_spectrum(&SchmidtVector::vertex(d), d, d)?;
    let f = |p: f64| bary.pnorm_pth_power(p) - vert.pnorm_pth_power(p);

    let (mut lo, mut hi) = (p_lo, p_hi);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(WhpError::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
