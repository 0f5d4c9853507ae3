//! Closed-form displaced-parity correlation of the N-mode squeezed vacuum.
//!
//! For displacements `α_1, ..., α_N` the correlation is `exp(K)` with
//!
//! ```text
//! K = -2 cosh 2r Σ_i |α_i|²
//!     + (4/N) sinh 2r Σ_{i<j} (α_i α_j + α_i* α_j*)
//!     - ((N-2)/N) sinh 2r Σ_i (α_i² + α_i*²)
//! ```
//!
//! All three sums are gathered in one pass using
//! `Σ_{i<j} α_i α_j = ((Σ α_i)² - Σ α_i²) / 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Displacement, SqueezedParams};

/// The exponent `K` before exponentiation. Non-positive for physical input.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct KernelExponent(pub f64);

impl KernelExponent {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn correlation(self) -> f64 {
        self.0.exp()
    }
}

/// Zero-squeezing correlation `exp(-2 Σ |α_i|²)`.
pub fn vacuum_correlation(displacements: &[Displacement]) -> Result<f64> {
    if displacements.is_empty() {
        return Err(Error::EmptyDisplacements);
    }
    check_finite(displacements)?;
    let total: f64 = displacements.iter().map(Displacement::norm_sqr).sum();
    Ok((-2.0 * total).exp())
}

pub fn squeezed_exponent(
    params: &SqueezedParams,
    displacements: &[Displacement],
) -> Result<KernelExponent> {
    let n = params.n_modes();
    if displacements.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: displacements.len(),
        });
    }
    check_finite(displacements)?;
    Ok(KernelExponent(exponent_unchecked(
        n,
        params.r(),
        displacements,
    )))
}

/// Parity correlation `E'(α_1, ..., α_N)` of the squeezed state; lies in (0, 1].
pub fn squeezed_correlation(
    params: &SqueezedParams,
    displacements: &[Displacement],
) -> Result<f64> {
    squeezed_exponent(params, displacements).map(KernelExponent::correlation)
}

/// Four-mode correlation for real displacements:
/// `exp{(-2 cosh 2r - sinh 2r) Σ α_i² + 2 sinh 2r Σ_{i<j} α_i α_j}`.
pub fn squeezed_correlation_real4(params: &SqueezedParams, alphas: &[f64; 4]) -> Result<f64> {
    if params.n_modes() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: params.n_modes(),
        });
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite {
            what: "displacement".into(),
        });
    }
    let two_r = 2.0 * params.r();
    let (c, s) = (two_r.cosh(), two_r.sinh());
    let sum: f64 = alphas.iter().sum();
    let sq: f64 = alphas.iter().map(|a| a * a).sum();
    let pairs = 0.5 * (sum * sum - sq);
    Ok(((-2.0 * c - s) * sq + 2.0 * s * pairs).exp())
}

/// Exponent without validation; `alphas.len()` must equal `n`.
pub(crate) fn exponent_unchecked(n: usize, r: f64, alphas: &[Displacement]) -> f64 {
    let two_r = 2.0 * r;
    let (c, s) = (two_r.cosh(), two_r.sinh());
    let mut norm = 0.0;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = Complex64::new(0.0, 0.0);
    for a in alphas {
        let z = Complex64::new(a.re, a.im);
        norm += z.norm_sqr();
        sum += z;
        sum_sq += z * z;
    }
    let nf = n as f64;
    // α α' + c.c. = 2 Re(α α')
    let pairs = 0.5 * (sum * sum - sum_sq);
    -2.0 * c * norm + (4.0 / nf) * s * 2.0 * pairs.re - ((nf - 2.0) / nf) * s * 2.0 * sum_sq.re
}

fn check_finite(displacements: &[Displacement]) -> Result<()> {
    match displacements.iter().position(|d| !d.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            what: format!("displacement {i}"),
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(re: f64, im: f64) -> Displacement {
        Displacement::new(re, im)
    }

    /// Term-by-term transcription with an explicit double loop over pairs.
    fn exponent_direct(n: usize, r: f64, alphas: &[Displacement]) -> f64 {
        let a: Vec<Complex64> = alphas.iter().map(|&x| x.into()).collect();
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let nf = n as f64;
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        let mut t3 = 0.0;
        for i in 0..n {
            t1 += a[i].norm_sqr();
            t3 += (a[i] * a[i] + a[i].conj() * a[i].conj()).re;
            for j in (i + 1)..n {
                t2 += (a[i] * a[j] + a[i].conj() * a[j].conj()).re;
            }
        }
        -2.0 * c * t1 + 4.0 / nf * s * t2 - (nf - 2.0) / nf * s * t3
    }

    #[test]
    fn vacuum_values() {
        assert_eq!(vacuum_correlation(&[d(0.0, 0.0); 3]).unwrap(), 1.0);
        let v = vacuum_correlation(&[d(1.0, 0.0)]).unwrap();
        assert!((v - 0.135_335_283_236_612_7).abs() < 1e-15);
        let v = vacuum_correlation(&[d(0.3, 0.4), d(0.0, 0.0)]).unwrap();
        // |α|² = 0.09 + 0.16
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(vacuum_correlation(&[]), Err(Error::EmptyDisplacements));
    }

    #[test]
    fn zero_squeezing_reduces_to_vacuum() {
        let alphas = [d(0.3, -0.2), d(-0.7, 0.1), d(0.05, 0.9)];
        let p = SqueezedParams::new(3, 0.0).unwrap();
        let a = squeezed_correlation(&p, &alphas).unwrap();
        let b = vacuum_correlation(&alphas).unwrap();
        assert!(((a - b) / b).abs() <= 1e-15);
    }

    #[test]
    fn two_mode_single_displacement() {
        let p = SqueezedParams::new(2, 0.5).unwrap();
        let v = squeezed_correlation(&p, &[d(0.3, 0.0), d(0.0, 0.0)]).unwrap();
        let expected = (-2.0 * 1.0f64.cosh() * 0.09).exp();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn three_mode_mermin_term() {
        let a: f64 = 0.5;
        let r: f64 = -0.3;
        let p = SqueezedParams::new(3, r).unwrap();
        let v = squeezed_correlation(&p, &[d(0.0, 0.0), d(a, 0.0), d(-a, 0.0)]).unwrap();
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let expected = ((-4.0 * c - 8.0 / 3.0 * s - 4.0 / 3.0 * s) * a * a).exp();
        assert!((v - expected).abs() < 1e-15, "{v} vs {expected}");
    }

    #[test]
    fn real4_matches_general_form() {
        let p = SqueezedParams::new(4, 0.4).unwrap();
        let a = [0.2, 0.2, 0.0, 0.0];
        let x = squeezed_correlation_real4(&p, &a).unwrap();
        let alphas: Vec<_> = a.iter().map(|&v| Displacement::real(v)).collect();
        let y = squeezed_correlation(&p, &alphas).unwrap();
        assert!((x - y).abs() < 1e-15);
        let p0 = SqueezedParams::new(4, 0.0).unwrap();
        assert_eq!(squeezed_correlation_real4(&p0, &[0.0; 4]).unwrap(), 1.0);
        let v = squeezed_correlation_real4(&p0, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        let p3 = SqueezedParams::new(3, 0.4).unwrap();
        assert!(squeezed_correlation_real4(&p3, &a).is_err());
    }

    #[test]
    fn single_mode_is_allowed() {
        let p = SqueezedParams::new(1, 0.3).unwrap();
        let v = squeezed_correlation(&p, &[d(0.2, 0.1)]).unwrap();
        assert!(v > 0.0 && v <= 1.0);
        let direct = exponent_direct(1, 0.3, &[d(0.2, 0.1)]).exp();
        assert!((v - direct).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let p = SqueezedParams::new(3, 0.3).unwrap();
        assert_eq!(
            squeezed_correlation(&p, &[d(0.0, 0.0); 2]),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn one_pass_matches_pairwise_sum() {
        let alphas = [
            d(0.3, -0.2),
            d(-0.7, 0.1),
            d(0.05, 0.9),
            d(1.1, -0.4),
            d(0.0, 0.3),
        ];
        for n in 1..=5 {
            for &r in &[-1.3, -0.2, 0.0, 0.4, 2.0] {
                let a = exponent_unchecked(n, r, &alphas[..n]);
                let b = exponent_direct(n, r, &alphas[..n]);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "n={n} r={r}");
            }
        }
    }
}
