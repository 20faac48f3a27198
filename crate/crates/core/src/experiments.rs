//! Single long runs paired with their gBm baseline, and the sweep over the
//! herding constant that measures disequilibrium as `max |σ|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{exogenous_move, step};
use crate::error::{Error, Result};
use crate::model::{init_population, MarketParams};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::stats::{self, DailyAggregator, DailySeries, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig<T> {
    pub params: MarketParams<T>,
    pub horizon_years: usize,
    /// Years excluded from `max |σ|`.
    pub burn_in_years: usize,
    /// Keep every step's observables, not just daily closes.
    pub record_step_level: bool,
}

impl<T: Scalar> Default for RunConfig<T> {
    fn default() -> Self {
        Self {
            params: MarketParams::default(),
            horizon_years: 40,
            burn_in_years: 10,
            record_step_level: false,
        }
    }
}

impl<T: Scalar> RunConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.horizon_years == 0 {
            return Err(Error::InvalidParam {
                field: "horizon_years",
                constraint: ">= 1",
                value: "0".into(),
            });
        }
        if self.burn_in_years > 0 && self.horizon_years <= self.burn_in_years {
            return Err(Error::InvalidParam {
                field: "burn_in_years",
                constraint: "burn_in_years < horizon_years",
                value: self.burn_in_years.to_string(),
            });
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.horizon_years * self.params.steps_per_year()
    }

    pub fn burn_in_days(&self) -> usize {
        self.burn_in_years * self.params.days_per_year
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig<T> {
    /// Herding constants to visit, ascending.
    pub c_values: Vec<T>,
    pub runs_per_value: usize,
    pub base_seed: u64,
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            c_values: (0..=20).map(|k| T::of(2.0 * k as f64)).collect(),
            runs_per_value: 20,
            base_seed: 1,
        }
    }
}

impl<T: Scalar> SweepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() {
            return Err(Error::Usage("c_values must not be empty".into()));
        }
        if self.c_values.iter().any(|c| !(*c >= T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidParam {
                field: "c_values",
                constraint: "finite and >= 0",
                value: format!("{:?}", self.c_values),
            });
        }
        if self.c_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParam {
                field: "c_values",
                constraint: "strictly ascending",
                value: format!("{:?}", self.c_values),
            });
        }
        if self.runs_per_value == 0 {
            return Err(Error::InvalidParam {
                field: "runs_per_value",
                constraint: ">= 1",
                value: "0".into(),
            });
        }
        Ok(())
    }
}

/// Output of [`run_single`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput<T> {
    pub model: DailySeries<T>,
    /// gBm path driven by the same exogenous increments.
    pub baseline: DailySeries<T>,
    /// Present when `record_step_level` was set.
    pub steps: Option<Vec<StepRecord<T>>>,
    /// Sum of the exogenous increments consumed by the model.
    pub exo_total: T,
    /// Sum of the exogenous increments consumed by the baseline.
    pub baseline_exo_total: T,
    pub total_switches: usize,
    pub largest_step_cascade: usize,
}

/// Runs the model from a balanced start on stream 0 of `params.seed`.
pub fn run_single<T: Scalar>(config: &RunConfig<T>) -> Result<RunOutput<T>> {
    run_with_stream(config, &mut RngStream::from_seed(config.params.seed))
}

/// Runs the model drawing from `rng`, alongside a gBm path that accumulates
/// only the exogenous increments of each step.
pub fn run_with_stream<T: Scalar>(config: &RunConfig<T>, rng: &mut RngStream) -> Result<RunOutput<T>> {
    config.validate()?;
    let params = &config.params;
    let total_steps = config.total_steps();

    let mut state = init_population(params, rng)?;
    let mut model_days = DailyAggregator::new(params.steps_per_day)?;
    let mut baseline_days = DailyAggregator::new(params.steps_per_day)?;
    let days = total_steps / params.steps_per_day;
    let mut model = Vec::with_capacity(days);
    let mut baseline = Vec::with_capacity(days);
    let mut steps = config.record_step_level.then(|| Vec::with_capacity(total_steps));

    let mut gbm_log_price = T::zero();
    let mut exo_total = T::zero();
    let mut baseline_exo_total = T::zero();
    let mut total_switches = 0;
    let mut largest_step_cascade = 0;

    for _ in 0..total_steps {
        let out = step(state, params, rng)?;
        state = out.new_state;

        exo_total = exo_total + out.exo_increment;
        baseline_exo_total = baseline_exo_total + out.exo_increment;
        gbm_log_price = gbm_log_price + exogenous_move(params, out.exo_increment);
        total_switches += out.switch_count;
        largest_step_cascade = largest_step_cascade.max(out.switch_count);

        let record = StepRecord {
            log_price: state.log_price(),
            sentiment: state.sentiment(),
            switches: out.switch_count,
        };
        if let Some(steps) = steps.as_mut() {
            steps.push(record);
        }
        if let Some(day) = model_days.push(record) {
            model.push(day);
        }
        let gbm_record = StepRecord {
            log_price: gbm_log_price,
            sentiment: T::zero(),
            switches: 0,
        };
        if let Some(day) = baseline_days.push(gbm_record) {
            baseline.push(day);
        }
    }

    Ok(RunOutput {
        model: DailySeries { records: model },
        baseline: DailySeries { records: baseline },
        steps,
        exo_total,
        baseline_exo_total,
        total_switches,
        largest_step_cascade,
    })
}

/// Independent stream for sweep cell `(c_index, run_index)`.
pub fn derive_stream(base_seed: u64, cell: (u32, u32)) -> RngStream {
    RngStream::derive(base_seed, cell.0, cell.1)
}

/// Per-C summary of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CSummary<T> {
    pub c: T,
    /// `max |σ|` per run index; `None` where the run failed.
    pub runs: Vec<Option<T>>,
    /// Mean over successful runs.
    pub mean: Option<T>,
    /// Sample standard deviation over successful runs.
    pub std: Option<T>,
}

impl<T: Scalar> CSummary<T> {
    pub fn successful(&self) -> Vec<T> {
        self.runs.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellError<T> {
    pub c_index: usize,
    pub c: T,
    pub run_index: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    /// One entry per C, in ascending C.
    pub per_c: Vec<CSummary<T>>,
    pub errors: Vec<CellError<T>>,
}

/// Disequilibrium `max |σ|` after burn-in for one sweep cell.
pub fn run_cell<T: Scalar>(base: &RunConfig<T>, herding: T, stream: &mut RngStream) -> Result<T> {
    let config = RunConfig {
        params: MarketParams { herding, ..base.params },
        record_step_level: false,
        ..*base
    };
    let out = run_with_stream(&config, stream)?;
    stats::max_abs_sentiment(&out.model, config.burn_in_days())
}

/// Runs every `(C, run)` cell on the current rayon pool.
///
/// Each cell draws from its own derived stream, so the result does not
/// depend on scheduling. Failed cells are reported in `errors` and leave a
/// gap in their row; they do not abort the sweep.
pub fn run_sweep<T: Scalar>(sweep: &SweepConfig<T>, base: &RunConfig<T>) -> Result<SweepResult<T>> {
    sweep.validate()?;
    base.validate()?;
    if base.burn_in_years >= base.horizon_years {
        return Err(Error::Usage("sweep runs must extend past the burn-in".into()));
    }
    let runs = sweep.runs_per_value;
    let cells: Vec<(usize, usize)> = (0..sweep.c_values.len())
        .flat_map(|ci| (0..runs).map(move |k| (ci, k)))
        .collect();

    let values: Vec<Result<T>> = cells
        .par_iter()
        .map(|&(ci, k)| {
            let mut stream = derive_stream(sweep.base_seed, (ci as u32, k as u32));
            run_cell(base, sweep.c_values[ci], &mut stream)
        })
        .collect();

    let mut per_c: Vec<CSummary<T>> = sweep
        .c_values
        .iter()
        .map(|&c| CSummary {
            c,
            runs: vec![None; runs],
            mean: None,
            std: None,
        })
        .collect();
    let mut errors = Vec::new();
    for (&(ci, k), value) in cells.iter().zip(values) {
        match value {
            Ok(v) => per_c[ci].runs[k] = Some(v),
            Err(error) => {
                log::error!("sweep cell C={} run {k} failed: {error}", sweep.c_values[ci]);
                errors.push(CellError {
                    c_index: ci,
                    c: sweep.c_values[ci],
                    run_index: k,
                    error,
                });
            }
        }
    }
    for row in &mut per_c {
        let ok = row.successful();
        row.mean = stats::mean(&ok);
        row.std = stats::std_dev(&ok);
    }
    Ok(SweepResult { per_c, errors })
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads<T: Scalar>(
    sweep: &SweepConfig<T>,
    base: &RunConfig<T>,
    threads: usize,
) -> Result<SweepResult<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_sweep(sweep, base))
}
