use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use herding_core::{
    calibrate_herding, default_thresholds, exceedance, excess_kurtosis, max_abs_sentiment,
    run_single, run_sweep, run_sweep_with_threads, RunConfig64, RunOutput, SweepConfig64,
    SweepResult64,
};
use log::info;

use crate::output::{self, RunSidecar};

/// Environment variable fixing the sweep's worker count.
pub const THREADS_ENV: &str = "HERDING_THREADS";

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n| *n > 0)
}

fn sidecar(config: &RunConfig64, out: &RunOutput<f64>) -> RunSidecar {
    RunSidecar {
        config: *config,
        days: out.model.len(),
        total_switches: out.total_switches,
        largest_step_cascade: out.largest_step_cascade,
        model_excess_kurtosis: excess_kurtosis(&out.model.returns()).ok(),
        gbm_excess_kurtosis: excess_kurtosis(&out.baseline.returns()).ok(),
        max_abs_sentiment_after_burn_in: max_abs_sentiment(&out.model, config.burn_in_days()).ok(),
    }
}

fn simulate(config: &RunConfig64, out_dir: &Path) -> Result<RunOutput<f64>> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    info!(
        "simulating {} years, M={}, C={}, kappa={}, seed={}",
        config.horizon_years,
        config.params.num_agents,
        config.params.herding,
        config.params.kick_strength,
        config.params.seed
    );
    Ok(run_single(config)?)
}

/// Model run plus paired gBm: daily series, four panel files and a sidecar.
pub fn run(config: &RunConfig64, out_dir: &Path) -> Result<RunOutput<f64>> {
    let out = simulate(config, out_dir)?;
    let digits = output::precision_from_env();
    let grid = default_thresholds::<f64>();
    let model_curve = exceedance(&out.model.returns(), &grid)?;
    let gbm_curve = exceedance(&out.baseline.returns(), &grid)?;

    output::write_daily_csv(&out.model, &out_dir.join("model_daily.csv"), digits)?;
    output::write_daily_csv(&out.baseline, &out_dir.join("baseline_daily.csv"), digits)?;
    output::write_panels(&out.model, &out.baseline, (&model_curve, &gbm_curve), out_dir, digits)?;
    if let Some(steps) = &out.steps {
        let mut text = String::from("step,log_price,sentiment,switches\n");
        for (i, s) in steps.iter().enumerate() {
            text.push_str(&format!(
                "{i},{},{},{}\n",
                output::fmt_float(s.log_price, digits),
                output::fmt_float(s.sentiment, digits),
                s.switches
            ));
        }
        fs::write(out_dir.join("steps.csv"), text).context("cannot write steps.csv")?;
    }
    output::write_json(&sidecar(config, &out), &out_dir.join("run.json"))?;
    Ok(out)
}

/// The gBm path paired with the model run for this config.
pub fn baseline(config: &RunConfig64, out_dir: &Path) -> Result<RunOutput<f64>> {
    let out = simulate(config, out_dir)?;
    let digits = output::precision_from_env();
    let curve = exceedance(&out.baseline.returns(), &default_thresholds::<f64>())?;
    output::write_daily_csv(&out.baseline, &out_dir.join("baseline_daily.csv"), digits)?;
    let mut text = String::from("threshold,gbm_days\n");
    for (t, n) in curve.thresholds.iter().zip(&curve.counts) {
        text.push_str(&format!("{},{n}\n", output::fmt_float(*t, digits)));
    }
    fs::write(out_dir.join("baseline_exceedance.csv"), text)
        .context("cannot write baseline_exceedance.csv")?;
    output::write_json(&sidecar(config, &out), &out_dir.join("baseline.json"))?;
    Ok(out)
}

/// Runs the sweep (on `threads` workers when given, else `HERDING_THREADS`,
/// else rayon's default) and writes `sweep.csv` with its sidecar.
pub fn sweep(
    sweep: &SweepConfig64,
    run: &RunConfig64,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<SweepResult64> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    info!(
        "sweeping {} values of C x {} runs",
        sweep.c_values.len(),
        sweep.runs_per_value
    );
    let result = match threads.or_else(threads_from_env) {
        Some(n) => run_sweep_with_threads(sweep, run, n)?,
        None => run_sweep(sweep, run)?,
    };
    output::write_sweep(
        &result,
        sweep,
        run,
        &out_dir.join("sweep.csv"),
        output::precision_from_env(),
    )?;
    Ok(result)
}

pub fn calibrate(
    report_days: f64,
    sentiment: f64,
    threshold_distance: f64,
    day_length: f64,
) -> Result<f64> {
    Ok(calibrate_herding(report_days, sentiment, threshold_distance, day_length)?)
}
