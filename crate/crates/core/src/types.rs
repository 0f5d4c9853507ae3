//! Shared domain types: squeezing parameters, displacements, setting tables,
//! correlation tensors and Bell forms.
//!
//! Tensor index convention: the flat index of a joint setting word
//! `(k_1, ..., k_N)` with `k_i ∈ {1, 2}` is the binary number whose most
//! significant bit is `k_1 - 1` and whose least significant bit is `k_N - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper limit on the number of modes.
pub const DEFAULT_MAX_MODES: usize = 10;

/// Values outside `[-1 - TENSOR_SLACK, 1 + TENSOR_SLACK]` are rejected by
/// [`CorrelationTensor::new`].
pub const TENSOR_SLACK: f64 = 1e-12;

/// Mode count `N` and squeezing parameter `r` of an N-mode squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedParams {
    n_modes: usize,
    r: f64,
}

impl SqueezedParams {
    pub fn new(n_modes: usize, r: f64) -> Result<Self> {
        Self::with_max_modes(n_modes, r, DEFAULT_MAX_MODES)
    }

    pub fn with_max_modes(n_modes: usize, r: f64, max_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > max_modes {
            return Err(Error::ModeCount {
                n: n_modes,
                max: max_modes,
            });
        }
        if !r.is_finite() {
            return Err(Error::NonFinite {
                what: "squeezing parameter r".into(),
            });
        }
        Ok(Self { n_modes, r })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Same mode count, different squeezing.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::with_max_modes(self.n_modes, r, self.n_modes.max(DEFAULT_MAX_MODES))
    }
}

/// A complex phase-space displacement `α = re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Displacement {
    pub re: f64,
    pub im: f64,
}

impl Displacement {
    pub const ZERO: Displacement = Displacement { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }
}

impl From<Displacement> for num_complex::Complex64 {
    fn from(d: Displacement) -> Self {
        num_complex::Complex64::new(d.re, d.im)
    }
}

/// Two displacement settings per party: `rows[i][j]` is setting `j + 1` of
/// party `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingTable {
    rows: Vec<[Displacement; 2]>,
}

impl SettingTable {
    pub fn new(rows: Vec<[Displacement; 2]>) -> Self {
        Self { rows }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![[Displacement::ZERO; 2]; n])
    }

    /// Builds a table of real displacements from `[party][setting]` pairs.
    pub fn from_real(rows: &[[f64; 2]]) -> Self {
        Self::new(
            rows.iter()
                .map(|&[a, b]| [Displacement::real(a), Displacement::real(b)])
                .collect(),
        )
    }

    pub fn n_parties(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[Displacement; 2]] {
        &self.rows
    }

    /// Setting `setting` (0 or 1) of party `party` (0-based).
    pub fn get(&self, party: usize, setting: usize) -> Displacement {
        self.rows[party][setting]
    }

    /// The displacement tuple selected by a flat tensor index.
    pub fn select(&self, flat_index: usize) -> Vec<Displacement> {
        let n = self.rows.len();
        (0..n)
            .map(|party| self.rows[party][setting_bit(flat_index, n, party)])
            .collect()
    }
}

/// Checks that `table` fits `params` and holds only finite values.
pub fn validate_setting_table(params: &SqueezedParams, table: &SettingTable) -> Result<()> {
    if table.n_parties() != params.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: params.n_modes(),
            found: table.n_parties(),
        });
    }
    for (party, row) in table.rows().iter().enumerate() {
        for (setting, d) in row.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("setting [{party}][{setting}]"),
                });
            }
        }
    }
    Ok(())
}

/// Flat index of a setting word given as 0-based setting choices per party.
pub fn word_to_index(word: &[usize]) -> usize {
    word.iter().fold(0, |acc, &k| {
        debug_assert!(k < 2);
        (acc << 1) | k
    })
}

/// Inverse of [`word_to_index`] for `n` parties.
pub fn index_to_word(index: usize, n: usize) -> Vec<usize> {
    (0..n).map(|party| setting_bit(index, n, party)).collect()
}

/// 0-based setting choice of `party` encoded in `index`.
#[inline]
pub fn setting_bit(index: usize, n: usize, party: usize) -> usize {
    (index >> (n - 1 - party)) & 1
}

/// Full-correlation values `E(k_1, ..., k_N)` over all `2^N` joint settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTensor {
    n_modes: usize,
    values: Vec<f64>,
}

impl CorrelationTensor {
    pub fn new(n_modes: usize, values: Vec<f64>) -> Result<Self> {
        if n_modes == 0 || n_modes >= usize::BITS as usize {
            return Err(Error::ModeCount {
                n: n_modes,
                max: usize::BITS as usize - 1,
            });
        }
        if values.len() != 1 << n_modes {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_modes,
                found: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v.abs() <= 1.0 + TENSOR_SLACK) {
                return Err(Error::CorrelationOutOfRange { index: i, value: v });
            }
        }
        Ok(Self { n_modes, values })
    }

    pub fn filled(n_modes: usize, value: f64) -> Result<Self> {
        Self::new(
            n_modes,
            vec![value; 1 << n_modes.min(usize::BITS as usize - 1)],
        )
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry for a 0-based setting word.
    pub fn at(&self, word: &[usize]) -> f64 {
        self.values[word_to_index(word)]
    }
}

/// Linear combination of full correlations with its local-realistic bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellForm {
    name: String,
    n_modes: usize,
    coefficients: Vec<f64>,
    classical_bound: f64,
}

impl BellForm {
    pub fn new(
        name: impl Into<String>,
        n_modes: usize,
        coefficients: Vec<f64>,
        classical_bound: f64,
    ) -> Result<Self> {
        if n_modes == 0 || n_modes >= usize::BITS as usize {
            return Err(Error::ModeCount {
                n: n_modes,
                max: usize::BITS as usize - 1,
            });
        }
        if coefficients.len() != 1 << n_modes {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_modes,
                found: coefficients.len(),
            });
        }
        if !(classical_bound > 0.0) || !classical_bound.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "classical bound must be positive, got {classical_bound}"
            )));
        }
        Ok(Self {
            name: name.into(),
            n_modes,
            coefficients,
            classical_bound,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn classical_bound(&self) -> f64 {
        self.classical_bound
    }

    /// Largest value reachable by any tensor with entries in [-1, 1].
    pub fn algebraic_max(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }
}
