use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::expm::expm_action;
use super::generators::build_generators;
use super::{embed, project, FockWorkspace};
use crate::error::{Error, Result};
use crate::types::SqueezedParams;

pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-8;

/// Squeezed vacuum in the workspace basis, renormalized after truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedState {
    pub amplitudes: Vec<f64>,
    /// `|1 - ‖P_d ψ‖|` where `ψ` is the state in the enlarged working space.
    pub leakage: f64,
    pub working_cutoff: usize,
}

fn working_cutoff(d: usize) -> usize {
    d + (d / 2).max(4)
}

/// `exp[r(W_+ - W_-)] |0⟩`, evolved at an enlarged cutoff and projected onto `ws`.
pub fn squeezed_state_vector(
    params: &SqueezedParams,
    ws: &FockWorkspace,
    leakage_tolerance: f64,
) -> Result<SqueezedState> {
    if params.n_modes() != ws.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: ws.n_modes(),
            found: params.n_modes(),
        });
    }
    let work_d = working_cutoff(ws.cutoff());
    let big = ws.enlarged(work_d)?;
    let gen = build_generators(&big).squeeze_generator();
    let mut vacuum = vec![0.0; big.dim()];
    vacuum[0] = 1.0;
    let evolved = expm_action(&gen, params.r(), &vacuum);

    let mut amplitudes = project(ws, &big, &evolved);
    let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    let leakage = (1.0 - norm).abs();
    if !(leakage <= leakage_tolerance) {
        return Err(Error::Leakage {
            leakage,
            tolerance: leakage_tolerance,
        });
    }
    amplitudes.iter_mut().for_each(|a| *a /= norm);
    Ok(SqueezedState {
        amplitudes,
        leakage,
        working_cutoff: work_d,
    })
}

/// Operator-norm residual of the Bogoliubov relation
/// `V⁻¹ â_i V = cosh r â_i + sinh r ((2-N)/N â_i† + (2/N) Σ_{j≠i} â_j†)`,
/// maximized over modes `i`, with inputs and outputs both restricted to
/// states of total photon number `≤ d/2`.
///
/// Matrix elements are `⟨V e_k, â_i V e_m⟩`, with `V` applied in an enlarged
/// working space.
pub fn bogoliubov_residual(params: &SqueezedParams, ws: &FockWorkspace) -> Result<f64> {
    let d = ws.cutoff();
    if d < 4 {
        return Err(Error::CutoffTooSmall { cutoff: d, min: 4 });
    }
    let n = ws.n_modes();
    if params.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: params.n_modes(),
        });
    }
    let r = params.r();
    let nf = n as f64;
    let (ch, sh) = (r.cosh(), r.sinh());
    let self_coef = (2.0 - nf) / nf;
    let pair_coef = 2.0 / nf;

    let big = ws.enlarged(working_cutoff(d))?;
    let gen = build_generators(&big).squeeze_generator();
    let block = ws.low_block(d / 2);
    let position: HashMap<Vec<usize>, usize> = block
        .iter()
        .enumerate()
        .map(|(p, &k)| (ws.occupations(k), p))
        .collect();
    let v_cols: Vec<Vec<f64>> = block
        .iter()
        .map(|&k| {
            let mut e = vec![0.0; ws.dim()];
            e[k] = 1.0;
            expm_action(&gen, r, &embed(ws, &big, &e))
        })
        .collect();

    let size = block.len();
    let mut worst = 0.0f64;
    let mut tmp = vec![0.0; big.dim()];
    for i in 0..n {
        let a_i = big.mode_annihilation(i);
        let mut residual = DMatrix::<f64>::zeros(size, size);
        for (c, &m) in block.iter().enumerate() {
            a_i.apply(&v_cols[c], &mut tmp);
            for (k, vk) in v_cols.iter().enumerate() {
                residual[(k, c)] = vk.iter().zip(&tmp).map(|(a, b)| a * b).sum();
            }
            let occ = ws.occupations(m);
            let mut sub = |shifted: &[usize], w: f64| {
                if let Some(&k) = position.get(shifted) {
                    residual[(k, c)] -= w;
                }
            };
            if occ[i] > 0 {
                let mut o = occ.clone();
                o[i] -= 1;
                sub(&o, ch * (occ[i] as f64).sqrt());
            }
            for j in 0..n {
                let coef = if j == i { self_coef } else { pair_coef };
                if coef != 0.0 {
                    let mut o = occ.clone();
                    o[j] += 1;
                    sub(&o, sh * coef * (o[j] as f64).sqrt());
                }
            }
        }
        let gram = residual.transpose() * &residual;
        let top = SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        worst = worst.max(top.max(0.0).sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{expm, DEFAULT_DIMENSION_CAP};

    fn ws(n: usize, d: usize) -> FockWorkspace {
        FockWorkspace::with_cap(n, d, DEFAULT_DIMENSION_CAP).unwrap()
    }

    #[test]
    fn zero_squeezing_is_vacuum() {
        let w = ws(3, 6);
        let p = SqueezedParams::new(3, 0.0).unwrap();
        let s = squeezed_state_vector(&p, &w, 1e-12).unwrap();
        assert_eq!(s.amplitudes[0], 1.0);
        assert!(s.amplitudes[1..].iter().all(|&a| a == 0.0));
        assert_eq!(s.leakage, 0.0);
    }

    #[test]
    fn two_mode_amplitudes_are_thermal() {
        let r: f64 = 0.3;
        let w = ws(2, 20);
        let s = squeezed_state_vector(&SqueezedParams::new(2, r).unwrap(), &w, 1e-10).unwrap();
        for idx in 0..w.dim() {
            let occ = w.occupations(idx);
            let want = if occ[0] == occ[1] {
                r.tanh().powi(occ[0] as i32) / r.cosh()
            } else {
                0.0
            };
            assert!((s.amplitudes[idx] - want).abs() < 1e-12, "{occ:?}");
        }
    }

    #[test]
    fn three_mode_leakage_small() {
        let s =
            squeezed_state_vector(&SqueezedParams::new(3, 0.2).unwrap(), &ws(3, 12), 1e-6).unwrap();
        assert!(s.leakage <= 1e-10, "{}", s.leakage);
    }

    #[test]
    fn strong_squeezing_leaks() {
        let err = squeezed_state_vector(&SqueezedParams::new(2, 2.5).unwrap(), &ws(2, 8), 1e-8)
            .unwrap_err();
        assert!(matches!(err, Error::Leakage { .. }));
    }

    #[test]
    fn matches_dense_exponential() {
        // dense route at the same working cutoff, then projected
        let w = ws(2, 6);
        let p = SqueezedParams::new(2, 0.15).unwrap();
        let s = squeezed_state_vector(&p, &w, 1e-3).unwrap();
        let big = w.enlarged(s.working_cutoff).unwrap();
        let g = build_generators(&big).squeeze_generator().to_dense();
        let v = expm(&(g * p.r()));
        let col: Vec<f64> = v.column(0).iter().copied().collect();
        let mut proj = project(&w, &big, &col);
        let norm = proj.iter().map(|a| a * a).sum::<f64>().sqrt();
        proj.iter_mut().for_each(|a| *a /= norm);
        for (a, b) in proj.iter().zip(&s.amplitudes) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unitarity_on_low_block() {
        let w = ws(2, 6);
        let big = w.enlarged(10).unwrap();
        let g = build_generators(&big).squeeze_generator().to_dense();
        let v = expm(&(g * 0.4));
        let vtv = v.transpose() * &v;
        let id = DMatrix::<f64>::identity(big.dim(), big.dim());
        assert!((vtv - id).abs().max() < 1e-10);
    }

    #[test]
    fn bogoliubov_zero_squeezing() {
        let p = SqueezedParams::new(2, 0.0).unwrap();
        assert_eq!(bogoliubov_residual(&p, &ws(2, 8)).unwrap(), 0.0);
    }

    #[test]
    fn bogoliubov_two_modes() {
        let p = SqueezedParams::new(2, 0.3).unwrap();
        let res = bogoliubov_residual(&p, &ws(2, 24)).unwrap();
        assert!(res <= 1e-6, "{res}");
    }

    #[test]
    fn bogoliubov_three_modes() {
        let p = SqueezedParams::new(3, 0.2).unwrap();
        let res = bogoliubov_residual(&p, &ws(3, 12)).unwrap();
        assert!(res <= 1e-5, "{res}");
    }

    #[test]
    fn bogoliubov_negative_squeezing() {
        let p = SqueezedParams::new(3, -0.3).unwrap();
        let res = bogoliubov_residual(&p, &ws(3, 10)).unwrap();
        assert!(res <= 1e-5, "{res}");
    }

    #[test]
    fn bogoliubov_cutoff_too_small() {
        let p = SqueezedParams::new(2, 0.3).unwrap();
        assert!(matches!(
            bogoliubov_residual(&p, &ws(2, 3)),
            Err(Error::CutoffTooSmall { .. })
        ));
    }
}
