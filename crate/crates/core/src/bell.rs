//! Correlation tensors and Bell quantities built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel;
use crate::types::{
    setting_bit, validate_setting_table, word_to_index, BellForm, CorrelationTensor, SettingTable,
    SqueezedParams,
};

/// Slack used when deciding whether a ZB sum exceeds its bound.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Left-hand side of the Żukowski-Brukner inequality together with its bound `2^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZbResult {
    pub lhs: f64,
    pub bound: f64,
    pub violated: bool,
}

impl ZbResult {
    fn from_lhs(lhs: f64, n: usize) -> Self {
        let bound = (1u64 << n) as f64;
        Self {
            lhs,
            bound,
            violated: lhs > bound + VIOLATION_SLACK,
        }
    }
}

/// Evaluates the squeezed-state correlation on every joint setting.
pub fn correlation_tensor(
    params: &SqueezedParams,
    table: &SettingTable,
) -> Result<CorrelationTensor> {
    validate_setting_table(params, table)?;
    let n = params.n_modes();
    let values = (0..1usize << n)
        .map(|idx| kernel::squeezed_correlation(params, &table.select(idx)))
        .collect::<Result<Vec<_>>>()?;
    CorrelationTensor::new(n, values)
}

/// Two-party CHSH combination `E(1,1) + E(1,2) + E(2,1) - E(2,2)`, bound 2.
pub fn chsh_form() -> BellForm {
    BellForm::new("chsh", 2, vec![1.0, 1.0, 1.0, -1.0], 2.0).expect("static form")
}

/// Three-party Mermin combination `E(1,1,2) + E(1,2,1) + E(2,1,1) - E(2,2,2)`, bound 2.
///
/// With settings `α_1 = (0, a)`, `α_2 = (0, a)`, `α_3 = (-a, 0)` the four
/// terms are `E'(0,0,0)`, `E'(0,a,-a)`, `E'(a,0,-a)` and `E'(a,a,0)`.
pub fn mermin3_form() -> BellForm {
    let mut c = vec![0.0; 8];
    c[word_to_index(&[0, 0, 1])] = 1.0;
    c[word_to_index(&[0, 1, 0])] = 1.0;
    c[word_to_index(&[1, 0, 0])] = 1.0;
    c[word_to_index(&[1, 1, 1])] = -1.0;
    BellForm::new("mermin3", 3, c, 2.0).expect("static form")
}

/// Settings `α_1 = (0, a)`, `α_2 = (0, a)`, `α_3 = (-a, 0)`.
pub fn mermin3_settings(a: f64) -> SettingTable {
    SettingTable::from_real(&[[0.0, a], [0.0, a], [-a, 0.0]])
}

/// Closed form of the three-party combination at [`mermin3_settings`]:
/// `1 + 2 exp{(-4 cosh 2r - 4 sinh 2r) a²} - exp{(-4 cosh 2r + (4/3) sinh 2r) a²}`.
pub fn mermin3_closed_form(r: f64, a: f64) -> f64 {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let a2 = a * a;
    1.0 + 2.0 * ((-4.0 * c - 8.0 / 3.0 * s - 4.0 / 3.0 * s) * a2).exp()
        - ((-4.0 * c + 8.0 / 3.0 * s - 4.0 / 3.0 * s) * a2).exp()
}

/// Large-|r| limit (r < 0) of [`mermin3_closed_form`]: `3 - exp{-(8/3) e^{-2r} a²}`.
pub fn mermin3_asymptotic(r: f64, a: f64) -> f64 {
    3.0 - (-(8.0 / 3.0) * (-2.0 * r).exp() * a * a).exp()
}

/// Four-party combination with local-realistic bound 4. Coefficients are
/// listed in flat-index order (party 1 slowest).
pub fn mermin4_form() -> BellForm {
    #[rustfmt::skip]
    let c = vec![
        -1.0,  1.0,  1.0,  1.0,
         1.0,  1.0,  1.0, -1.0,
         1.0,  1.0,  1.0, -1.0,
         1.0, -1.0, -1.0, -1.0,
    ];
    BellForm::new("mermin4", 4, c, 4.0).expect("static form")
}

/// Dot product of the form's coefficients with the tensor.
pub fn evaluate_form(form: &BellForm, tensor: &CorrelationTensor) -> Result<f64> {
    if form.n_modes() != tensor.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: form.n_modes(),
            found: tensor.n_modes(),
        });
    }
    Ok(dot(form.coefficients(), tensor.values()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_s |Σ_k (Π_j s_j^{k_j-1}) E(k)|` over all sign vectors `s ∈ {±1}^N`.
///
/// The inner sums are the Walsh-Hadamard transform of the tensor, computed
/// with `N` butterfly passes.
pub fn zb_lhs(tensor: &CorrelationTensor) -> ZbResult {
    let mut buf = tensor.values().to_vec();
    ZbResult::from_lhs(zb_lhs_in_place(&mut buf), tensor.n_modes())
}

/// Same as [`zb_lhs`], enumerating every (sign vector, setting word) pair.
pub fn zb_lhs_enumerated(tensor: &CorrelationTensor) -> ZbResult {
    let values = tensor.values();
    let len = values.len();
    let lhs = (0..len)
        .map(|neg| {
            values
                .iter()
                .enumerate()
                .map(|(k, &e)| {
                    // party j contributes s_j^{k_j - 1}, which is -1 iff s_j = -1 and k_j = 2
                    if (neg & k).count_ones() % 2 == 1 {
                        -e
                    } else {
                        e
                    }
                })
                .sum::<f64>()
                .abs()
        })
        .sum();
    ZbResult::from_lhs(lhs, tensor.n_modes())
}

/// Transforms `buf` in place and returns the sum of absolute values.
pub(crate) fn zb_lhs_in_place(buf: &mut [f64]) -> f64 {
    let len = buf.len();
    let mut half = 1;
    while half < len {
        for block in buf.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    buf.iter().map(|v| v.abs()).sum()
}

/// Equatorial-measurement GHZ correlations: entry `k` is `cos(Σ_j φ_j^{k_j})`.
///
/// `angles[j]` holds the two measurement angles of party `j`.
pub fn ghz_correlation_tensor(angles: &[[f64; 2]]) -> Result<CorrelationTensor> {
    let n = angles.len();
    if n < 2 {
        return Err(Error::ModeCount {
            n,
            max: usize::BITS as usize - 1,
        });
    }
    if angles.iter().flatten().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite {
            what: "GHZ angle".into(),
        });
    }
    let values = (0..1usize << n)
        .map(|idx| {
            (0..n)
                .map(|j| angles[j][setting_bit(idx, n, j)])
                .sum::<f64>()
                .cos()
        })
        .collect();
    CorrelationTensor::new(n, values)
}

/// Multiplies every correlation by the visibility `v ∈ [0, 1]`.
pub fn scale_tensor(tensor: &CorrelationTensor, v: f64) -> Result<CorrelationTensor> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!(
            "visibility {v} outside [0, 1]"
        )));
    }
    CorrelationTensor::new(
        tensor.n_modes(),
        tensor.values().iter().map(|e| e * v).collect(),
    )
}
