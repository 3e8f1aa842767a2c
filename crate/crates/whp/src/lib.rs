//! Maximal p-norms of Werner-Holevo channels and their tensor products.
//!
//! The library computes the output spectrum of `Phi_d1 (x) Phi_d2` on pure
//! inputs both densely (Jacobi eigensolver) and in closed form (three
//! eigenvalue classes plus a diagonal-plus-rank-one secular problem),
//! maximizes the Schatten p-norm of the output over the Schmidt simplex, and
//! property-tests the majorization / Schur-convexity / divided-difference
//! machinery that makes the multiplicativity
//! `nu_p(Phi_d1 (x) Phi_d2) = nu_p(Phi_d1) nu_p(Phi_d2)` work for 1 < p <= 2
//! while failing for large p.

pub mod error;
pub mod matrix_core;
pub mod oracle;
pub mod pnorm_optimizer;
pub mod schur_analysis;
pub mod spectrum_analytic;
pub mod wh_channel;

pub use error::{Result, WhpError};

#[cfg(test)]
pub(crate) mod testutil {
    use rand_chacha::ChaCha8Rng;

    use crate::wh_channel::SchmidtVector;

    pub fn random_simplex(rng: &mut ChaCha8Rng, d: usize) -> SchmidtVector {
        crate::schur_analysis::sample_simplex(rng, d, false)
    }

    /// Distinct simplex nodes with all pairwise gaps above `min_gap`.
    pub fn random_probe_nodes(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<f64> {
        crate::schur_analysis::sample_probe_nodes(rng, n, min_gap)
    }
}
