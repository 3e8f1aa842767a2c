//! Independent reference routes used by the test suites to cross-check the
//! closed-form derivative machinery. Nothing here shares code with the
//! formulas it validates.

use crate::error::{Result, WhpError};
use crate::schur_analysis::char_poly_coeffs;

/// Re-solves the monic polynomial with the given roots after shifting its
/// m-th elementary symmetric polynomial by `eps`, by Newton iteration from
/// each unperturbed root. Valid for small shifts and well-separated roots.
pub fn perturbed_roots(nodes: &[f64], m: usize, eps: f64) -> Result<Vec<f64>> {
    let n = nodes.len();
    if m < 2 || m > n {
        return Err(WhpError::InvalidArgument(format!(
            "m must lie in 2..={n}, got {m}"
        )));
    }
    let mut coeffs = char_poly_coeffs(nodes);
    // coefficient of t^(n-m) is (-1)^m s_m
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    coeffs[n - m] += sign * eps;

    let eval = |x: f64| -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };

    let mut roots = Vec::with_capacity(n);
    for &x0 in nodes {
        let mut x = x0;
        for _ in 0..60 {
            let (p, dp) = eval(x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (residual, _) = eval(x);
        if residual.abs() > 1e-9 {
            return Err(WhpError::NonConvergence {
                sweeps: 60,
                off: residual.abs(),
            });
        }
        roots.push(x);
    }
    Ok(roots)
}

/// f(x) = sum x_i^p evaluated on a root set; the quantity whose sensitivity
/// to the symmetric polynomials the perturbation oracle probes.
pub fn power_sum(roots: &[f64], p: f64) -> f64 {
    roots.iter().map(|&x| x.max(0.0).powf(p)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_returns_roots() {
        let nodes = [0.5, 0.3, 0.2];
        let r = perturbed_roots(&nodes, 2, 0.0).unwrap();
        for (a, b) in r.iter().zip(&nodes) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_moves_symmetric_polynomial() {
        use crate::spectrum_analytic::symmetric_polynomials;
        let nodes = [0.5, 0.3, 0.2];
        let eps = 1e-7;
        for m in 2..=3usize {
            let r = perturbed_roots(&nodes, m, eps).unwrap();
            let s0 = symmetric_polynomials(&nodes);
            let s1 = symmetric_polynomials(&r);
            for k in 1..=3 {
                let expected = if k == m { eps } else { 0.0 };
                assert!(
                    (s1[k] - s0[k] - expected).abs() < 1e-12,
                    "m={m} k={k}: {} vs {}",
                    s1[k] - s0[k],
                    expected
                );
            }
        }
    }
}
