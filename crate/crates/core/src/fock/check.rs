use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DEFAULT_DIMENSION_CAP;
use super::{displaced_parity_expectation, squeezed_state_vector, FockWorkspace};
use crate::error::Result;
use crate::kernel::squeezed_correlation;
use crate::types::{Displacement, SqueezedParams};

/// Outcome of comparing the closed-form kernel with the truncated oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub r: f64,
    pub cutoff: usize,
    pub samples: usize,
    /// `max |kernel - oracle|` at `cutoff`.
    pub max_deviation: f64,
    /// `max |oracle(cutoff) - oracle(2 cutoff)|`.
    pub max_cutoff_shift: f64,
    pub leakage: f64,
    pub doubled_leakage: f64,
}

/// `samples` tuples of `n` displacements drawn uniformly from the disk `|α| ≤ radius`.
pub fn random_displacements(
    n: usize,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Vec<Vec<Displacement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let rho = radius * rng.gen::<f64>().sqrt();
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    Displacement::new(rho * phi.cos(), rho * phi.sin())
                })
                .collect()
        })
        .collect()
}

/// Oracle values for each displacement tuple at the given cutoff.
pub fn oracle_correlations(
    params: &SqueezedParams,
    cutoff: usize,
    displacements: &[Vec<Displacement>],
    leakage_tolerance: f64,
) -> Result<(Vec<f64>, f64)> {
    let ws = FockWorkspace::with_cap(params.n_modes(), cutoff, DEFAULT_DIMENSION_CAP)?;
    let state = squeezed_state_vector(params, &ws, leakage_tolerance)?;
    let values = displacements
        .par_iter()
        .map(|alphas| displaced_parity_expectation(&state.amplitudes, alphas, &ws))
        .collect::<Result<Vec<_>>>()?;
    Ok((values, state.leakage))
}

/// Compares kernel and oracle at `cutoff`, and the oracle at `cutoff` with
/// the oracle at `2 cutoff`. Fails with [`crate::Error::Leakage`] when the
/// truncated state loses more than `leakage_tolerance` of its norm.
pub fn oracle_check(
    params: &SqueezedParams,
    cutoff: usize,
    displacements: &[Vec<Displacement>],
    leakage_tolerance: f64,
) -> Result<OracleReport> {
    let (at_d, leakage) = oracle_correlations(params, cutoff, displacements, leakage_tolerance)?;
    let (at_2d, doubled_leakage) =
        oracle_correlations(params, 2 * cutoff, displacements, leakage_tolerance)?;
    let mut max_deviation = 0.0f64;
    let mut max_cutoff_shift = 0.0f64;
    for ((alphas, o1), o2) in displacements.iter().zip(&at_d).zip(&at_2d) {
        let k = squeezed_correlation(params, alphas)?;
        max_deviation = max_deviation.max((k - o1).abs());
        max_cutoff_shift = max_cutoff_shift.max((o1 - o2).abs());
    }
    Ok(OracleReport {
        n: params.n_modes(),
        r: params.r(),
        cutoff,
        samples: displacements.len(),
        max_deviation,
        max_cutoff_shift,
        leakage,
        doubled_leakage,
    })
}
