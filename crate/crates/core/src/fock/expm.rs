//! Matrix exponentials: dense (via nalgebra's Padé scaling-and-squaring)
//! and the action `exp(tA) v` of a sparse generator by a scaled Taylor
//! series.

use nalgebra::{ComplexField, DMatrix};

use super::sparse::SparseOp;

/// Dense `exp(A)`.
pub fn expm<T: ComplexField>(a: &DMatrix<T>) -> DMatrix<T> {
    a.exp()
}

/// Largest step norm handed to one Taylor series.
const STEP_NORM: f64 = 2.0;
const MAX_TERMS: usize = 60;

/// `exp(t·A) v` for a real sparse `A`.
///
/// The interval is split into `s` pieces with `|t|·‖A‖₁ / s ≤ 2`, and each
/// piece sums Taylor terms until they stop contributing at `f64` precision.
pub fn expm_action(a: &SparseOp, t: f64, v: &[f64]) -> Vec<f64> {
    let dim = a.dim();
    assert_eq!(v.len(), dim);
    let norm = (t * a.norm_one()).abs();
    let steps = ((norm / STEP_NORM).ceil() as usize).max(1);
    let h = t / steps as f64;

    let mut x = v.to_vec();
    let mut term = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    for _ in 0..steps {
        term.copy_from_slice(&x);
        let mut acc = x.clone();
        for k in 1..=MAX_TERMS {
            a.apply(&term, &mut next);
            let scale = h / k as f64;
            let mut term_norm = 0.0f64;
            for (tn, nx) in term.iter_mut().zip(&next) {
                *tn = nx * scale;
                term_norm = term_norm.max(tn.abs());
            }
            for (ac, tn) in acc.iter_mut().zip(&term) {
                *ac += tn;
            }
            let acc_norm = acc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if term_norm <= f64::EPSILON * 1e-2 * acc_norm.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        x = acc;
    }
    x
}
