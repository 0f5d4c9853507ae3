use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expm::expm;
use super::FockWorkspace;
use crate::error::{Error, Result};
use crate::types::Displacement;

/// Largest imaginary part tolerated in a parity expectation value.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Number-basis matrix of `D(α) = exp(α â† - α* â)` restricted to `|0⟩..|d-1⟩`.
///
/// Uses the closed form
/// `⟨m|D|n⟩ = e^{-|α|²/2} √(n!/m!) α^{m-n} L_n^{(m-n)}(|α|²)` for `m ≥ n`
/// and `⟨m|D|n⟩ = e^{-|α|²/2} √(m!/n!) (-α*)^{n-m} L_m^{(n-m)}(|α|²)` for `m < n`,
/// so entries are those of the untruncated operator.
pub fn displacement_matrix(alpha: Displacement, d: usize) -> DMatrix<Complex64> {
    let a: Complex64 = alpha.into();
    let x = a.norm_sqr();
    let gauss = (-0.5 * x).exp();
    DMatrix::from_fn(d, d, |m, n| {
        let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
        let k = hi - lo;
        // √(lo!/hi!)
        let ratio = ((lo + 1)..=hi).fold(1.0f64, |acc, j| acc / (j as f64).sqrt());
        let lag = laguerre(lo, k, x);
        let base = if m >= n { a } else { -a.conj() };
        base.powu(k as u32) * (gauss * ratio * lag)
    })
}

/// Same operator from the dense exponential of the truncated generator.
/// Agrees with [`displacement_matrix`] away from the truncation edge.
pub fn displacement_matrix_expm(alpha: Displacement, d: usize) -> DMatrix<Complex64> {
    let a: Complex64 = alpha.into();
    let gen = DMatrix::from_fn(d, d, |i, j| {
        if i == j + 1 {
            a * (i as f64).sqrt()
        } else if j == i + 1 {
            -a.conj() * (j as f64).sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    expm(&gen)
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by upward recurrence.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Applies a single-mode matrix to `mode` of a product-space vector.
fn apply_mode(
    ws: &FockWorkspace,
    op: &DMatrix<Complex64>,
    mode: usize,
    v: &[Complex64],
) -> Vec<Complex64> {
    let d = ws.cutoff();
    let stride = ws.stride(mode);
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for base in 0..ws.dim() {
        if ws.occupation(base, mode) != 0 {
            continue;
        }
        for m in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..d {
                acc += op[(m, n)] * v[base + n * stride];
            }
            out[base + m * stride] = acc;
        }
    }
    out
}

/// `⟨ψ| Π_i D_i(α_i) (-1)^{Σ n_i} Π_i D_i(α_i)⁻¹ |ψ⟩` for a real state vector.
pub fn displaced_parity_expectation(
    state: &[f64],
    displacements: &[Displacement],
    ws: &FockWorkspace,
) -> Result<f64> {
    if displacements.len() != ws.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: ws.n_modes(),
            found: displacements.len(),
        });
    }
    if state.len() != ws.dim() {
        return Err(Error::DimensionMismatch {
            expected: ws.dim(),
            found: state.len(),
        });
    }
    let d = ws.cutoff();
    let psi: Vec<Complex64> = state.iter().map(|&a| Complex64::new(a, 0.0)).collect();

    // D(α)⁻¹ = D(-α)
    let mut phi = psi.clone();
    for (mode, alpha) in displacements.iter().enumerate() {
        let inv = displacement_matrix(Displacement::new(-alpha.re, -alpha.im), d);
        phi = apply_mode(ws, &inv, mode, &phi);
    }
    for (p, s) in phi.iter_mut().zip(ws.parity()) {
        *p *= *s;
    }
    for (mode, alpha) in displacements.iter().enumerate() {
        phi = apply_mode(ws, &displacement_matrix(*alpha, d), mode, &phi);
    }
    let value: Complex64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    if value.im.abs() > IMAGINARY_TOLERANCE {
        return Err(Error::ImaginaryResidual {
            residual: value.im.abs(),
            tolerance: IMAGINARY_TOLERANCE,
        });
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_DIMENSION_CAP;

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).map(|z| z.norm()).max()
    }

    #[test]
    fn zero_displacement_is_identity() {
        let m = displacement_matrix(Displacement::ZERO, 6);
        assert_eq!(m, DMatrix::identity(6, 6));
    }

    #[test]
    fn vacuum_overlap() {
        let alpha = Displacement::new(0.4, -0.7);
        let m = displacement_matrix(alpha, 5);
        let want = (-0.5 * alpha.norm_sqr()).exp();
        assert!((m[(0, 0)] - Complex64::new(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn first_column_is_coherent_state() {
        let a: f64 = 0.5;
        let m = displacement_matrix(Displacement::real(a), 16);
        let mut fact = 1.0f64;
        for n in 0..16 {
            if n > 0 {
                fact *= n as f64;
            }
            let want = (-0.5 * a * a).exp() * a.powi(n as i32) / fact.sqrt();
            assert!((m[(n, 0)].re - want).abs() < 1e-15 && m[(n, 0)].im.abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_exponential() {
        // the exponential route is exact only away from the edge: compare the
        // top-left block of a much larger truncation
        for alpha in [
            Displacement::real(0.5),
            Displacement::new(0.3, -0.8),
            Displacement::new(-1.0, 0.2),
        ] {
            let closed = displacement_matrix(alpha, 16);
            let big = displacement_matrix_expm(alpha, 60);
            let block = big.view((0, 0), (16, 16)).into_owned();
            assert!(max_diff(&closed, &block) < 1e-12, "{alpha:?}");
        }
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3, 1.7), 1.0);
        assert!((laguerre(1, 2, 0.5) - 2.5).abs() < 1e-15);
        // L_2^{(1)}(x) = (x² - 6x + 6)/2
        let x = 0.8;
        assert!((laguerre(2, 1, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_parity() {
        let ws = FockWorkspace::with_cap(2, 16, DEFAULT_DIMENSION_CAP).unwrap();
        let mut vac = vec![0.0; ws.dim()];
        vac[0] = 1.0;
        let zero = [Displacement::ZERO; 2];
        assert!((displaced_parity_expectation(&vac, &zero, &ws).unwrap() - 1.0).abs() < 1e-15);
        let alphas = [Displacement::new(0.3, 0.1), Displacement::new(-0.2, 0.4)];
        let want = (-2.0 * (0.1 + 0.2f64)).exp();
        let got = displaced_parity_expectation(&vac, &alphas, &ws).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn expectation_dimension_checks() {
        let ws = FockWorkspace::with_cap(2, 4, DEFAULT_DIMENSION_CAP).unwrap();
        let vac = vec![0.0; ws.dim()];
        assert!(displaced_parity_expectation(&vac, &[Displacement::ZERO], &ws).is_err());
        assert!(displaced_parity_expectation(&vac[1..], &[Displacement::ZERO; 2], &ws).is_err());
    }
}
