//! Threshold visibilities for maximally entangled (GHZ) and oscillator states.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{multistart, optimize_bell, Objective, OptimizationResult, OptimizerConfig, Squeezing};
use crate::bell::{self, mermin3_form, mermin4_form};
use crate::error::{Error, Result};

/// Restart agreement required of a row before it counts as robust.
pub const ROBUST_FRACTION: f64 = 0.25;
/// Two restarts agree when their values differ by at most this.
pub const AGREEMENT_TOL: f64 = 1e-4;
/// Rows with more modes than this are not subject to the robustness check.
pub const ROBUST_CHECK_MAX_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRow {
    pub n: usize,
    /// `2^{-(N-1)/2}`, the GHZ threshold.
    pub v_me: f64,
    /// Strongest oscillator threshold over the objectives tried.
    pub v_osc: f64,
    /// Optimum of the objective that produced `v_osc`.
    pub b_opt: f64,
    pub form_used: String,
    pub argmax_r: f64,
    pub r_at_bound: bool,
    /// `2^N / max zb_lhs`.
    pub v_zb: f64,
    /// `bound / max` of the named form for this N, if one exists.
    pub v_form: Option<f64>,
    /// ZB threshold with each party's first setting pinned to zero displacement.
    pub v_osc_anchored: f64,
    /// Restart agreement of the objective that produced `v_osc`.
    pub agreement: f64,
    pub robust: bool,
}

/// Analytic GHZ threshold `1 / √(2^{N-1})`.
pub fn ghz_threshold(n: usize) -> f64 {
    2f64.powf(-((n as f64) - 1.0) / 2.0)
}

/// Named form for `n` parties, if there is one.
pub fn named_form(n: usize) -> Option<Objective> {
    match n {
        3 => Some(Objective::Form(mermin3_form())),
        4 => Some(Objective::Form(mermin4_form())),
        _ => None,
    }
}

fn threshold(res: &OptimizationResult) -> f64 {
    res.classical_bound / res.best_value
}

/// One row per `n`: the GHZ threshold and the oscillator threshold with `r`
/// searched in `[-r_bound, r_bound]`.
pub fn visibility_table(ns: &[usize], config: &OptimizerConfig) -> Result<Vec<VisibilityRow>> {
    ns.iter().map(|&n| visibility_row(n, config)).collect()
}

pub fn visibility_row(n: usize, config: &OptimizerConfig) -> Result<VisibilityRow> {
    if n < 2 {
        return Err(Error::ModeCount {
            n,
            max: crate::types::DEFAULT_MAX_MODES,
        });
    }
    let squeezing = Squeezing::free_default(config.r_bound);
    let zb = optimize_bell(n, squeezing, &Objective::Zb(n), config)?;
    let form = named_form(n)
        .map(|obj| optimize_bell(n, squeezing, &obj, config))
        .transpose()?;
    let anchored = optimize_bell(
        n,
        squeezing,
        &Objective::Zb(n),
        &OptimizerConfig {
            anchored: true,
            ..config.clone()
        },
    )?;

    let v_zb = threshold(&zb);
    let v_form = form.as_ref().map(threshold);
    let chosen = match &form {
        Some(f) if threshold(f) < v_zb => f,
        _ => &zb,
    };
    let agreement = chosen.agreement_fraction(AGREEMENT_TOL);
    Ok(VisibilityRow {
        n,
        v_me: ghz_threshold(n),
        v_osc: threshold(chosen),
        b_opt: chosen.best_value,
        form_used: chosen.objective_name.clone(),
        argmax_r: chosen.best_r,
        r_at_bound: chosen.r_at_bound,
        v_zb,
        v_form,
        v_osc_anchored: threshold(&anchored),
        agreement,
        robust: n > ROBUST_CHECK_MAX_N || agreement >= ROBUST_FRACTION,
    })
}

/// Largest ZB left-hand side of the GHZ state over equatorial measurement
/// angles, found by multi-start search.
pub fn ghz_max_zb(n: usize, config: &OptimizerConfig) -> Result<(f64, Vec<[f64; 2]>)> {
    if n < 2 {
        return Err(Error::ModeCount {
            n,
            max: crate::types::DEFAULT_MAX_MODES,
        });
    }
    let bounds = vec![(-PI, PI); 2 * n];
    let to_angles = |x: &[f64]| -> Vec<[f64; 2]> { x.chunks(2).map(|c| [c[0], c[1]]).collect() };
    let runs = multistart(
        config,
        &bounds,
        |rng| (0..2 * n).map(|_| rng.gen_range(-PI..=PI)).collect(),
        || {
            move |x: &[f64]| {
                bell::ghz_correlation_tensor(&to_angles(x))
                    .map(|t| bell::zb_lhs(&t).lhs)
                    .unwrap_or(f64::NEG_INFINITY)
            }
        },
    )?;
    let (x, res) = runs
        .into_iter()
        .reduce(|a, b| if b.1.f < a.1.f { b } else { a })
        .expect("at least one restart");
    Ok((-res.f, to_angles(&x)))
}
