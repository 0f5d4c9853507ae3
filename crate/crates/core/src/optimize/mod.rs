//! Multi-start maximization of Bell quantities over displacement settings
//! and, optionally, the squeezing parameter.

mod nelder_mead;
pub mod visibility;

pub use nelder_mead::{LocalResult, NelderMead};
pub use visibility::{ghz_max_zb, ghz_threshold, visibility_row, visibility_table, VisibilityRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{self, dot};
use crate::error::{Error, Result};
use crate::kernel;
use crate::types::{BellForm, Displacement, SettingTable, SqueezedParams};

/// What to maximize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    Form(BellForm),
    /// Left-hand side of the Żukowski-Brukner inequality for `N` parties.
    Zb(usize),
}

impl Objective {
    pub fn name(&self) -> &str {
        match self {
            Objective::Form(f) => f.name(),
            Objective::Zb(_) => "zb",
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            Objective::Form(f) => f.n_modes(),
            Objective::Zb(n) => *n,
        }
    }

    /// Local-realistic bound of the quantity.
    pub fn classical_bound(&self) -> f64 {
        match self {
            Objective::Form(f) => f.classical_bound(),
            Objective::Zb(n) => (1u64 << n) as f64,
        }
    }

    /// Upper bound over all tensors with entries in [-1, 1].
    pub fn algebraic_max(&self) -> f64 {
        match self {
            Objective::Form(f) => f.algebraic_max(),
            Objective::Zb(n) => (1u64 << (2 * n)) as f64,
        }
    }

    /// Evaluates on raw tensor values; `scratch` must have length `2^N`.
    fn evaluate_raw(&self, values: &[f64], scratch: &mut [f64]) -> f64 {
        match self {
            Objective::Form(f) => dot(f.coefficients(), values),
            Objective::Zb(_) => {
                scratch.copy_from_slice(values);
                bell::zb_lhs_in_place(scratch)
            }
        }
    }

    /// Value at the given state and settings through the public tensor path.
    pub fn evaluate(&self, params: &SqueezedParams, table: &SettingTable) -> Result<f64> {
        if params.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                found: params.n_modes(),
            });
        }
        let tensor = bell::correlation_tensor(params, table)?;
        match self {
            Objective::Form(f) => bell::evaluate_form(f, &tensor),
            Objective::Zb(_) => Ok(bell::zb_lhs(&tensor).lhs),
        }
    }
}

/// How the squeezing parameter is treated during a search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Squeezing {
    Fixed(f64),
    /// Searched as an extra coordinate within `[lo, hi]`.
    Free {
        lo: f64,
        hi: f64,
    },
}

impl Squeezing {
    pub fn free_default(r_bound: f64) -> Self {
        Squeezing::Free {
            lo: -r_bound,
            hi: r_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Bound on the magnitude of each displacement component.
    pub alpha_bound: f64,
    /// Bound on `|r|` when the squeezing is free.
    pub r_bound: f64,
    pub real_only: bool,
    /// Pin each party's first setting to zero displacement.
    #[serde(default)]
    pub anchored: bool,
    pub seed: u64,
    /// Worker thread cap; `None` uses the global rayon pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 2000,
            tolerance: 1e-10,
            alpha_bound: 6.0,
            r_bound: 5.0,
            real_only: true,
            anchored: false,
            seed: 0,
            threads: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if !(self.alpha_bound > 0.0) || !(self.r_bound >= 0.0) {
            return Err(Error::InvalidArgument("bounds must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub value: f64,
    pub r: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub objective_name: String,
    pub n_modes: usize,
    pub best_value: f64,
    pub best_settings: SettingTable,
    pub best_r: f64,
    /// True when a free `r` ended on a face of its interval.
    pub r_at_bound: bool,
    pub classical_bound: f64,
    pub restarts: Vec<RestartOutcome>,
}

impl OptimizationResult {
    /// Fraction of restarts whose final value is within `tol` of the best.
    pub fn agreement_fraction(&self, tol: f64) -> f64 {
        let hits = self
            .restarts
            .iter()
            .filter(|o| o.value >= self.best_value - tol)
            .count();
        hits as f64 / self.restarts.len() as f64
    }
}

/// Search-space layout: settings first (party-major, setting-minor, real
/// parts then imaginary parts when complex), then `r` when free.
struct Layout {
    n: usize,
    real_only: bool,
    anchored: bool,
    squeezing: Squeezing,
}

impl Layout {
    fn per_component(&self) -> usize {
        if self.anchored {
            self.n
        } else {
            2 * self.n
        }
    }

    fn setting_dims(&self) -> usize {
        if self.real_only {
            self.per_component()
        } else {
            2 * self.per_component()
        }
    }

    fn r(&self, x: &[f64]) -> f64 {
        match self.squeezing {
            Squeezing::Fixed(r) => r,
            Squeezing::Free { .. } => x[self.setting_dims()],
        }
    }

    fn displacement(&self, x: &[f64], party: usize, setting: usize) -> Displacement {
        let k = if self.anchored {
            if setting == 0 {
                return Displacement::ZERO;
            }
            party
        } else {
            2 * party + setting
        };
        if self.real_only {
            Displacement::real(x[k])
        } else {
            Displacement::new(x[k], x[self.per_component() + k])
        }
    }

    fn table(&self, x: &[f64]) -> SettingTable {
        SettingTable::new(
            (0..self.n)
                .map(|i| [self.displacement(x, i, 0), self.displacement(x, i, 1)])
                .collect(),
        )
    }

    fn bounds(&self, alpha_bound: f64) -> Vec<(f64, f64)> {
        let mut b = vec![(-alpha_bound, alpha_bound); self.setting_dims()];
        if let Squeezing::Free { lo, hi } = self.squeezing {
            b.push((lo, hi));
        }
        b
    }
}

/// Reusable buffers for objective evaluation.
struct Evaluator<'a> {
    objective: &'a Objective,
    layout: &'a Layout,
    tensor: Vec<f64>,
    scratch: Vec<f64>,
    tuple: Vec<Displacement>,
}

impl<'a> Evaluator<'a> {
    fn new(objective: &'a Objective, layout: &'a Layout) -> Self {
        let len = 1 << layout.n;
        Self {
            objective,
            layout,
            tensor: vec![0.0; len],
            scratch: vec![0.0; len],
            tuple: vec![Displacement::ZERO; layout.n],
        }
    }

    fn value(&mut self, x: &[f64]) -> f64 {
        let n = self.layout.n;
        let r = self.layout.r(x);
        for idx in 0..self.tensor.len() {
            for party in 0..n {
                let bit = crate::types::setting_bit(idx, n, party);
                self.tuple[party] = self.layout.displacement(x, party, bit);
            }
            self.tensor[idx] = kernel::exponent_unchecked(n, r, &self.tuple).exp();
        }
        self.objective.evaluate_raw(&self.tensor, &mut self.scratch)
    }
}

/// Maximizes `objective` for an `n`-mode state.
///
/// Each restart draws its starting point from its own generator, seeded
/// from `config.seed` and the restart index, so results do not depend on
/// scheduling.
pub fn optimize_bell(
    n: usize,
    squeezing: Squeezing,
    objective: &Objective,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    config.validate()?;
    if objective.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: objective.n_modes(),
            found: n,
        });
    }
    match squeezing {
        Squeezing::Fixed(r) => {
            SqueezedParams::new(n, r)?;
        }
        Squeezing::Free { lo, hi } => {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "invalid r interval [{lo}, {hi}]"
                )));
            }
            SqueezedParams::new(n, lo)?;
        }
    }
    let layout = Layout {
        n,
        real_only: config.real_only,
        anchored: config.anchored,
        squeezing,
    };
    let bounds = layout.bounds(config.alpha_bound);
    let runs = multistart(
        config,
        &bounds,
        |rng| initial_point(&layout, config, rng),
        || {
            let mut eval = Evaluator::new(objective, &layout);
            move |x: &[f64]| eval.value(x)
        },
    )?;
    let runs: Vec<(Vec<f64>, RestartOutcome)> = runs
        .into_iter()
        .map(|(x, res)| {
            let outcome = RestartOutcome {
                value: -res.f,
                r: layout.r(&x),
                iterations: res.iterations,
                evaluations: res.evaluations,
                converged: res.converged,
            };
            (x, outcome)
        })
        .collect();

    // first index wins ties
    let best = runs.iter().enumerate().fold(
        0,
        |b, (i, (_, o))| if o.value > runs[b].1.value { i } else { b },
    );
    let (best_x, _) = &runs[best];
    let best_r = layout.r(best_x);
    let best_settings = layout.table(best_x);
    let params = SqueezedParams::with_max_modes(n, best_r, n.max(crate::types::DEFAULT_MAX_MODES))?;
    // recompute through the public path so the reported value is reproducible from the settings
    let best_value = objective.evaluate(&params, &best_settings)?;
    let r_at_bound = match squeezing {
        Squeezing::Free { lo, hi } => {
            let eps = 1e-6 * (hi - lo).max(1.0);
            best_r <= lo + eps || best_r >= hi - eps
        }
        Squeezing::Fixed(_) => false,
    };
    let mut restarts: Vec<RestartOutcome> = runs.into_iter().map(|(_, o)| o).collect();
    // keep best_value >= every restart value exactly
    for o in &mut restarts {
        o.value = o.value.min(best_value);
    }

    Ok(OptimizationResult {
        objective_name: objective.name().to_string(),
        n_modes: n,
        best_value,
        best_settings,
        best_r,
        r_at_bound,
        classical_bound: objective.classical_bound(),
        restarts,
    })
}

/// Runs one seeded local maximization per restart, in parallel, and
/// returns `(argmax, local result of the negated objective)` in restart order.
///
/// `make_objective` builds a fresh objective (with its own buffers) per restart.
pub(crate) fn multistart<I, M, F>(
    config: &OptimizerConfig,
    bounds: &[(f64, f64)],
    init: I,
    make_objective: M,
) -> Result<Vec<(Vec<f64>, LocalResult)>>
where
    I: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
    M: Fn() -> F + Sync,
    F: FnMut(&[f64]) -> f64,
{
    let local = NelderMead {
        max_iterations: config.max_iterations,
        f_tol: config.tolerance,
        x_tol: config.tolerance.sqrt() * 1e-2,
        initial_step: 0.05,
    };
    let run = |index: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index as u64);
        let x0 = init(&mut rng);
        let mut f = make_objective();
        let res = local.minimize(|x| -f(x), &x0, bounds);
        (res.x.clone(), res)
    };
    match config.threads {
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| (0..config.restarts).into_par_iter().map(run).collect())),
        None => Ok((0..config.restarts).into_par_iter().map(run).collect()),
    }
}

fn initial_point(layout: &Layout, config: &OptimizerConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = match layout.squeezing {
        Squeezing::Fixed(r) => r,
        Squeezing::Free { lo, hi } => rng.gen_range(lo..=hi),
    };
    // displacement scale that keeps the correlations away from 0 at this r
    let scale = (-r.abs()).exp().min(config.alpha_bound);
    let mut x: Vec<f64> = (0..layout.setting_dims())
        .map(|_| rng.gen_range(-1.0..=1.0) * scale)
        .collect();
    if let Squeezing::Free { .. } = layout.squeezing {
        x.push(r);
    }
    x
}

/// Best value of `objective` at each fixed `r` in `grid`.
pub fn optimize_r_profile(
    n: usize,
    objective: &Objective,
    grid: &[f64],
    config: &OptimizerConfig,
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty r grid".into()));
    }
    grid.iter()
        .map(|&r| {
            optimize_bell(n, Squeezing::Fixed(r), objective, config).map(|res| (r, res.best_value))
        })
        .collect()
}
