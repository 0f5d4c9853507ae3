use serde::{Deserialize, Serialize};

use super::sparse::SparseOp;
use super::FockWorkspace;
use crate::error::{Error, Result};

/// The squeezing generators `W_+`, `W_- = W_+^T` and the diagonal `B`.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub n_modes: usize,
    /// Coefficient of `Σ_i â_i†²`: `(2 - N) / (2N)`.
    pub self_coefficient: f64,
    /// Coefficient of `Σ_{i<j} â_i† â_j†`: `2 / N`.
    pub pair_coefficient: f64,
    pub w_plus: SparseOp,
    pub w_minus: SparseOp,
    /// Diagonal of `B = (1/2) Σ_i â_i† â_i + N/4`.
    pub b: Vec<f64>,
}

impl GeneratorSet {
    /// `W_+ - W_-`, the antisymmetric exponent of the squeezing unitary.
    pub fn squeeze_generator(&self) -> SparseOp {
        self.w_plus.sub(&self.w_minus)
    }
}

pub fn build_generators(ws: &FockWorkspace) -> GeneratorSet {
    let n = ws.n_modes();
    let nf = n as f64;
    let x = (2.0 - nf) / (2.0 * nf);
    let y = 2.0 / nf;
    let d = ws.cutoff();

    let mut triplets = Vec::new();
    for col in 0..ws.dim() {
        let occ = ws.occupations(col);
        for i in 0..n {
            if x != 0.0 && occ[i] + 2 < d {
                let amp = (((occ[i] + 1) * (occ[i] + 2)) as f64).sqrt();
                triplets.push((col + 2 * ws.stride(i), col, x * amp));
            }
            for j in (i + 1)..n {
                if occ[i] + 1 < d && occ[j] + 1 < d {
                    let amp = (((occ[i] + 1) * (occ[j] + 1)) as f64).sqrt();
                    triplets.push((col + ws.stride(i) + ws.stride(j), col, y * amp));
                }
            }
        }
    }
    let w_plus = SparseOp::from_triplets(ws.dim(), triplets);
    let w_minus = w_plus.transpose();
    let b = (0..ws.dim())
        .map(|idx| 0.5 * ws.total_photons(idx) as f64 + nf / 4.0)
        .collect();
    GeneratorSet {
        n_modes: n,
        self_coefficient: x,
        pair_coefficient: y,
        w_plus,
        w_minus,
        b,
    }
}

/// Largest entries of `[W+,W-] + 2B`, `[W+,B] + W+` and `[W-,B] - W-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorResiduals {
    pub plus_minus: f64,
    pub plus_b: f64,
    pub minus_b: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.plus_minus.max(self.plus_b).max(self.minus_b)
    }
}

/// Commutation residuals on columns with total photon number `≤ d - 3`,
/// where no intermediate state reaches the truncation edge.
pub fn commutator_residuals(gen: &GeneratorSet, ws: &FockWorkspace) -> Result<CommutatorResiduals> {
    let d = ws.cutoff();
    if d < 4 {
        return Err(Error::CutoffTooSmall { cutoff: d, min: 4 });
    }
    let dim = ws.dim();
    let mut e = vec![0.0; dim];
    let (mut p, mut m, mut pm, mut mp) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut res = CommutatorResiduals {
        plus_minus: 0.0,
        plus_b: 0.0,
        minus_b: 0.0,
    };
    let max_abs = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, |a, x| a.max(x.abs()));

    for col in ws.low_block(d - 3) {
        e[col] = 1.0;
        gen.w_plus.apply(&e, &mut p);
        gen.w_minus.apply(&e, &mut m);
        gen.w_plus.apply(&m, &mut pm);
        gen.w_minus.apply(&p, &mut mp);
        let bc = gen.b[col];

        // [W+,W-] e + 2B e
        let r1 =
            max_abs(&mut (0..dim).map(|k| pm[k] - mp[k] + if k == col { 2.0 * bc } else { 0.0 }));
        // [W+,B] e + W+ e = W+ B e - B W+ e + W+ e
        let r2 = max_abs(&mut (0..dim).map(|k| p[k] * bc - gen.b[k] * p[k] + p[k]));
        // [W-,B] e - W- e
        let r3 = max_abs(&mut (0..dim).map(|k| m[k] * bc - gen.b[k] * m[k] - m[k]));
        res.plus_minus = res.plus_minus.max(r1);
        res.plus_b = res.plus_b.max(r2);
        res.minus_b = res.minus_b.max(r3);
        e[col] = 0.0;
    }
    Ok(res)
}
