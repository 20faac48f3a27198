//! CSV series and JSON provenance sidecars.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use herding_core::{
    CSummary, DailyRecord, DailySeries64, ExceedanceCurve, RunConfig64, SweepConfig64,
    SweepResult64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Significant digits for floats in CSV output; 17 round-trips any `f64`.
pub const DEFAULT_PRECISION: usize = 17;

/// Environment variable overriding [`DEFAULT_PRECISION`].
pub const PRECISION_ENV: &str = "HERDING_PRECISION";

pub const DAILY_HEADER: &str = "day,log_price,daily_log_return,sentiment,switches";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Precision from [`PRECISION_ENV`], clamped to 1..=17.
pub fn precision_from_env() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|p| p.clamp(1, 17))
        .unwrap_or(DEFAULT_PRECISION)
}

/// Scientific notation with `digits` significant digits.
pub fn fmt_float(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn write_daily_csv(series: &DailySeries64, path: &Path, digits: usize) -> Result<(), OutputError> {
    let mut out = String::with_capacity(64 * (series.len() + 1));
    out.push_str(DAILY_HEADER);
    out.push('\n');
    for d in &series.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            d.day,
            fmt_float(d.log_price_close, digits),
            fmt_float(d.daily_log_return, digits),
            fmt_float(d.sentiment_close, digits),
            d.switches_in_day
        );
    }
    write_text(path, &out)
}

pub fn read_daily_csv(path: &Path) -> Result<DailySeries64, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: String| OutputError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(DAILY_HEADER) => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(format!("line {}: expected 5 fields", n + 2)));
        }
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| bad(format!("line {}: {e}", n + 2)))
        };
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| bad(format!("line {}: {e}", n + 2)))
        };
        records.push(DailyRecord {
            day: int(fields[0])?,
            log_price_close: float(fields[1])?,
            daily_log_return: float(fields[2])?,
            sentiment_close: float(fields[3])?,
            switches_in_day: int(fields[4])?,
        });
    }
    Ok(DailySeries64 { records })
}

/// The four plot panels: price, sentiment, daily percentage change and
/// exceedance counts, each model vs paired gBm.
pub fn write_panels(
    model: &DailySeries64,
    baseline: &DailySeries64,
    curves: (&ExceedanceCurve<f64>, &ExceedanceCurve<f64>),
    dir: &Path,
    digits: usize,
) -> Result<(), OutputError> {
    let f = |x: f64| fmt_float(x, digits);

    let mut price = String::from("day,model_price,gbm_price\n");
    let mut sentiment = String::from("day,sentiment\n");
    let mut returns = String::from("day,model_change,gbm_change\n");
    for (m, b) in model.records.iter().zip(&baseline.records) {
        let _ = writeln!(price, "{},{},{}", m.day, f(m.log_price_close.exp()), f(b.log_price_close.exp()));
        let _ = writeln!(sentiment, "{},{}", m.day, f(m.sentiment_close));
        let _ = writeln!(
            returns,
            "{},{},{}",
            m.day,
            f(m.daily_log_return.exp_m1()),
            f(b.daily_log_return.exp_m1())
        );
    }
    let (mc, bc) = curves;
    let mut exceed = String::from("threshold,model_days,gbm_days\n");
    for ((t, m), b) in mc.thresholds.iter().zip(&mc.counts).zip(&bc.counts) {
        let _ = writeln!(exceed, "{},{m},{b}", f(*t));
    }

    write_text(&dir.join("price.csv"), &price)?;
    write_text(&dir.join("sentiment.csv"), &sentiment)?;
    write_text(&dir.join("returns.csv"), &returns)?;
    write_text(&dir.join("exceedance.csv"), &exceed)
}

/// Provenance for a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub config: RunConfig64,
    pub days: usize,
    pub total_switches: usize,
    pub largest_step_cascade: usize,
    pub model_excess_kurtosis: Option<f64>,
    pub gbm_excess_kurtosis: Option<f64>,
    pub max_abs_sentiment_after_burn_in: Option<f64>,
}

/// Provenance for a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSidecar {
    pub sweep: SweepConfig64,
    pub run: RunConfig64,
    pub rows: Vec<CSummary<f64>>,
    pub errors: Vec<String>,
}

pub fn write_json<S: Serialize>(value: &S, path: &Path) -> Result<(), OutputError> {
    let text = serde_json::to_string_pretty(value).map_err(|source| OutputError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    write_text(path, &text)
}

pub fn read_json<S: for<'de> Deserialize<'de>>(path: &Path) -> Result<S, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| OutputError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Sidecar path for a CSV file: `sweep.csv` -> `sweep.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `C,mean_max_abs_sentiment,std,run_0..` rows in ascending C, plus a
/// JSON sidecar carrying both configs. Failed runs are empty fields.
pub fn write_sweep(
    result: &SweepResult64,
    sweep: &SweepConfig64,
    run: &RunConfig64,
    path: &Path,
    digits: usize,
) -> Result<(), OutputError> {
    let f = |x: Option<f64>| x.map(|v| fmt_float(v, digits)).unwrap_or_default();
    let mut rows: Vec<&CSummary<f64>> = result.per_c.iter().collect();
    rows.sort_by(|a, b| a.c.total_cmp(&b.c));

    let mut out = String::from("C,mean_max_abs_sentiment,std");
    for k in 0..sweep.runs_per_value {
        let _ = write!(out, ",run_{k}");
    }
    out.push('\n');
    for row in &rows {
        let _ = write!(out, "{},{},{}", fmt_float(row.c, digits), f(row.mean), f(row.std));
        for v in &row.runs {
            out.push(',');
            out.push_str(&f(*v));
        }
        out.push('\n');
    }
    write_text(path, &out)?;

    let sidecar = SweepSidecar {
        sweep: sweep.clone(),
        run: *run,
        rows: rows.into_iter().cloned().collect(),
        errors: result
            .errors
            .iter()
            .map(|e| format!("C={} run {}: {}", e.c, e.run_index, e.error))
            .collect(),
    };
    write_json(&sidecar, &sidecar_path(path))
}
