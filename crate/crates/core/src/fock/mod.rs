//! Brute-force oracle in a truncated number basis.
//!
//! Every mode keeps the states `|0⟩ ... |d-1⟩`. Product states are indexed
//! lexicographically with mode 1 most significant, so the index of
//! `|n_1 ... n_N⟩` is `Σ_i n_i d^{N-i}`.
//!
//! The squeezed state is produced with the truncated generators in a larger
//! working space and then projected back onto the cutoff `d`; the norm lost
//! in that projection is the reported leakage.

mod check;
mod displacement;
mod expm;
mod generators;
mod sparse;
mod state;

pub use check::{oracle_check, oracle_correlations, random_displacements, OracleReport};
pub use displacement::{
    displaced_parity_expectation, displacement_matrix, displacement_matrix_expm,
    IMAGINARY_TOLERANCE,
};
pub use expm::{expm, expm_action};
pub use generators::{build_generators, commutator_residuals, CommutatorResiduals, GeneratorSet};
pub use sparse::SparseOp;
pub use state::{
    bogoliubov_residual, squeezed_state_vector, SqueezedState, DEFAULT_LEAKAGE_TOLERANCE,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::SqueezedParams;

/// Default cap on `d^N`.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// Largest mode count the oracle accepts.
pub const MAX_ORACLE_MODES: usize = 4;

/// Per-mode cutoff used when none is given.
pub fn default_cutoff(n_modes: usize) -> usize {
    match n_modes {
        0..=2 => 24,
        3 => 14,
        _ => 8,
    }
}

#[derive(Debug, Clone)]
pub struct FockWorkspace {
    n_modes: usize,
    cutoff: usize,
    dim: usize,
    /// Single-mode `â`; `â†` is its transpose.
    annihilation: DMatrix<f64>,
    creation: DMatrix<f64>,
    /// `(-1)^n` on the full product space.
    parity: Vec<f64>,
}

impl FockWorkspace {
    pub fn new(params: &SqueezedParams, cutoff: usize) -> Result<Self> {
        Self::with_cap(params.n_modes(), cutoff, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(n_modes: usize, cutoff: usize, cap: usize) -> Result<Self> {
        if n_modes > MAX_ORACLE_MODES {
            return Err(Error::OracleUnsupported(n_modes));
        }
        if n_modes == 0 {
            return Err(Error::ModeCount {
                n: 0,
                max: MAX_ORACLE_MODES,
            });
        }
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall { cutoff, min: 2 });
        }
        let dim = cutoff
            .checked_pow(n_modes as u32)
            .filter(|&d| d <= cap)
            .ok_or(Error::DimensionCap {
                dim: cutoff.saturating_pow(n_modes as u32),
                cap,
            })?;
        let annihilation = DMatrix::from_fn(cutoff, cutoff, |i, j| {
            if j == i + 1 {
                (j as f64).sqrt()
            } else {
                0.0
            }
        });
        let creation = annihilation.transpose();
        let mut ws = Self {
            n_modes,
            cutoff,
            dim,
            annihilation,
            creation,
            parity: Vec::new(),
        };
        ws.parity = (0..dim)
            .map(|idx| {
                if ws.total_photons(idx) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Ok(ws)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn annihilation(&self) -> &DMatrix<f64> {
        &self.annihilation
    }

    pub fn creation(&self) -> &DMatrix<f64> {
        &self.creation
    }

    pub fn parity(&self) -> &[f64] {
        &self.parity
    }

    /// Stride of `mode` in the flat index.
    pub fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.n_modes - 1 - mode) as u32)
    }

    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.stride(mode)) % self.cutoff
    }

    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        (0..self.n_modes).map(|m| self.occupation(idx, m)).collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> usize {
        occupations.iter().fold(0, |acc, &n| acc * self.cutoff + n)
    }

    pub fn total_photons(&self, idx: usize) -> usize {
        (0..self.n_modes).map(|m| self.occupation(idx, m)).sum()
    }

    /// Basis indices with total photon number at most `max_total`.
    pub fn low_block(&self, max_total: usize) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| self.total_photons(i) <= max_total)
            .collect()
    }

    /// `â_mode` on the full product space.
    pub fn mode_annihilation(&self, mode: usize) -> SparseOp {
        let stride = self.stride(mode);
        let triplets = (0..self.dim)
            .filter_map(|col| {
                let n = self.occupation(col, mode);
                (n > 0).then(|| (col - stride, col, (n as f64).sqrt()))
            })
            .collect();
        SparseOp::from_triplets(self.dim, triplets)
    }

    pub fn mode_creation(&self, mode: usize) -> SparseOp {
        self.mode_annihilation(mode).transpose()
    }

    /// Workspace with the same mode count and a larger cutoff, bypassing the cap.
    fn enlarged(&self, cutoff: usize) -> Result<Self> {
        Self::with_cap(self.n_modes, cutoff, usize::MAX)
    }
}

/// Maps a vector from `small` into the enlarged space `big` (zero padding).
fn embed(small: &FockWorkspace, big: &FockWorkspace, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; big.dim()];
    for (idx, &x) in v.iter().enumerate() {
        out[big.index_of(&small.occupations(idx))] = x;
    }
    out
}

/// Restricts a vector of `big` onto the basis of `small`.
fn project(small: &FockWorkspace, big: &FockWorkspace, v: &[f64]) -> Vec<f64> {
    (0..small.dim())
        .map(|idx| v[big.index_of(&small.occupations(idx))])
        .collect()
}
