//! Herding market simulator.
//!
//! `M` slow agents each hold a binary position and a log-price threshold
//! interval. The log-price follows Brownian forcing plus a kick of `±2κ/M`
//! whenever an agent switches; agents in the minority have their thresholds
//! pulled inward at a rate proportional to `|σ|`, which couples the population
//! and can tip the market into switching cascades.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the usual double-precision choice.

// Negated comparisons let NaN fail parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use dynamics::{exogenous_move, resolve_cascade, sgn, step, CascadeOutcome, StepOutcome};
pub use error::{Error, Result};
pub use experiments::{
    derive_stream, run_cell, run_single, run_sweep, run_sweep_with_threads, run_with_stream,
    CSummary, CellError, RunConfig, RunOutput, SweepConfig, SweepResult,
};
pub use model::{
    flip, init_population, interval_from_draws, reinject, sentiment, Agent, AgentState,
    MarketParams, MarketState,
};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use stats::{
    aggregate_daily, calibrate_herding, default_thresholds, exceedance, excess_kurtosis,
    max_abs_sentiment, DailyAggregator, DailyRecord, DailySeries, ExceedanceCurve, StepRecord,
};

pub type Agent64 = Agent<f64>;
pub type MarketParams64 = MarketParams<f64>;
pub type MarketState64 = MarketState<f64>;
pub type StepOutcome64 = StepOutcome<f64>;
pub type DailySeries64 = DailySeries<f64>;
pub type RunConfig64 = RunConfig<f64>;
pub type SweepConfig64 = SweepConfig<f64>;
pub type SweepResult64 = SweepResult<f64>;

pub type MarketParams32 = MarketParams<f32>;
pub type MarketState32 = MarketState<f32>;
pub type RunConfig32 = RunConfig<f32>;
