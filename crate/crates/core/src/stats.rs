//! Observables derived from a trajectory: daily series, tail-exceedance
//! counts, kurtosis and the disequilibrium measure `max |σ|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{count, Scalar};

/// Observables after one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub log_price: T,
    pub sentiment: T,
    pub switches: usize,
}

/// One trading day, closed at the day's last step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord<T> {
    pub day: usize,
    pub log_price_close: T,
    pub daily_log_return: T,
    pub sentiment_close: T,
    pub switches_in_day: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DailySeries<T> {
    pub records: Vec<DailyRecord<T>>,
}

impl<T: Scalar> DailySeries<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn returns(&self) -> Vec<T> {
        self.records.iter().map(|d| d.daily_log_return).collect()
    }

    pub fn sentiments(&self) -> Vec<T> {
        self.records.iter().map(|d| d.sentiment_close).collect()
    }

    pub fn final_log_price(&self) -> Option<T> {
        self.records.last().map(|d| d.log_price_close)
    }
}

/// Streaming day-closer: feed step records, get a [`DailyRecord`] every
/// `steps_per_day` steps. Returns are measured from log-price 0 on day 0.
#[derive(Debug, Clone)]
pub struct DailyAggregator<T> {
    steps_per_day: usize,
    steps_in_day: usize,
    switches: usize,
    prev_close: T,
    day: usize,
}

impl<T: Scalar> DailyAggregator<T> {
    pub fn new(steps_per_day: usize) -> Result<Self> {
        if steps_per_day == 0 {
            return Err(Error::Usage("steps_per_day must be at least 1".into()));
        }
        Ok(Self {
            steps_per_day,
            steps_in_day: 0,
            switches: 0,
            prev_close: T::zero(),
            day: 0,
        })
    }

    #[inline]
    pub fn push(&mut self, record: StepRecord<T>) -> Option<DailyRecord<T>> {
        self.steps_in_day += 1;
        self.switches += record.switches;
        if self.steps_in_day < self.steps_per_day {
            return None;
        }
        let out = DailyRecord {
            day: self.day,
            log_price_close: record.log_price,
            daily_log_return: record.log_price - self.prev_close,
            sentiment_close: record.sentiment,
            switches_in_day: self.switches,
        };
        self.prev_close = record.log_price;
        self.day += 1;
        self.steps_in_day = 0;
        self.switches = 0;
        Some(out)
    }

    /// Steps accumulated toward an unfinished day.
    pub fn pending_steps(&self) -> usize {
        self.steps_in_day
    }
}

/// Sums step-level records into trading days. A trailing partial day is
/// dropped with a warning.
pub fn aggregate_daily<T: Scalar>(
    step_records: &[StepRecord<T>],
    steps_per_day: usize,
) -> Result<DailySeries<T>> {
    if step_records.is_empty() {
        return Err(Error::Usage("no step records to aggregate".into()));
    }
    let mut agg = DailyAggregator::new(steps_per_day)?;
    let records = step_records.iter().filter_map(|r| agg.push(*r)).collect();
    if agg.pending_steps() > 0 {
        log::warn!(
            "dropping {} trailing steps that do not complete a day",
            agg.pending_steps()
        );
    }
    Ok(DailySeries { records })
}

/// Number of days whose absolute percentage price change exceeds each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceCurve<T> {
    /// Fractional price changes (0.01 = 1%).
    pub thresholds: Vec<T>,
    pub counts: Vec<usize>,
}

/// Thirty log-spaced thresholds from 0.1% to 20%.
pub fn default_thresholds<T: Scalar>() -> Vec<T> {
    let (lo, hi, n) = (0.001f64, 0.2f64, 30usize);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|j| T::of(lo * (ratio * j as f64).exp())).collect()
}

/// Counts days with `|exp(return) − 1|` strictly above each threshold.
pub fn exceedance<T: Scalar>(daily_returns: &[T], thresholds: &[T]) -> Result<ExceedanceCurve<T>> {
    if thresholds.iter().any(|t| !(*t > T::zero())) {
        return Err(Error::Usage("exceedance thresholds must be positive".into()));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Usage("exceedance thresholds must be ascending".into()));
    }
    let mut changes: Vec<T> = daily_returns
        .iter()
        .map(|r| r.exp_m1().abs())
        .collect();
    changes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Less));
    let counts = thresholds
        .iter()
        .map(|t| changes.len() - changes.partition_point(|c| c <= t))
        .collect();
    Ok(ExceedanceCurve {
        thresholds: thresholds.to_vec(),
        counts,
    })
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Scalar>(samples: &[T]) -> Option<T> {
    if samples.is_empty() {
        return None;
    }
    Some(samples.iter().copied().sum::<T>() / count(samples.len()))
}

/// Sample standard deviation with the `n − 1` denominator; 0 for one sample.
pub fn std_dev<T: Scalar>(samples: &[T]) -> Option<T> {
    let m = mean(samples)?;
    if samples.len() < 2 {
        return Some(T::zero());
    }
    let ss: T = samples.iter().map(|x| (*x - m) * (*x - m)).sum();
    Some((ss / count(samples.len() - 1)).sqrt())
}

/// Moment-ratio excess kurtosis `m4 / m2² − 3` with population moments and
/// no small-sample correction.
pub fn excess_kurtosis<T: Scalar>(samples: &[T]) -> Result<T> {
    if samples.len() < 4 {
        return Err(Error::Usage(format!(
            "kurtosis needs at least 4 samples (got {})",
            samples.len()
        )));
    }
    let n = count::<T>(samples.len());
    let m = samples.iter().copied().sum::<T>() / n;
    let (mut m2, mut m4) = (T::zero(), T::zero());
    for x in samples {
        let d = *x - m;
        let d2 = d * d;
        m2 = m2 + d2;
        m4 = m4 + d2 * d2;
    }
    m2 = m2 / n;
    m4 = m4 / n;
    if !(m2 > T::zero()) {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok(m4 / (m2 * m2) - T::of(3.0))
}

/// Largest `|σ|` over days at or after `burn_in_days`.
pub fn max_abs_sentiment<T: Scalar>(daily: &DailySeries<T>, burn_in_days: usize) -> Result<T> {
    if daily.len() <= burn_in_days {
        return Err(Error::Usage(format!(
            "series of {} days does not extend past a burn-in of {burn_in_days} days",
            daily.len()
        )));
    }
    Ok(daily.records[burn_in_days..]
        .iter()
        .map(|d| d.sentiment_close.abs())
        .fold(T::zero(), T::max))
}

/// Herding constant at which a typical minority agent's thresholds, drifting
/// inward at `C·|σ|`, close a `threshold_distance` gap in `report_days` days.
pub fn calibrate_herding<T: Scalar>(
    report_days: T,
    sentiment_level: T,
    threshold_distance: T,
    day_length: T,
) -> Result<T> {
    for (name, v) in [
        ("report_days", report_days),
        ("sentiment_level", sentiment_level),
        ("threshold_distance", threshold_distance),
        ("day_length", day_length),
    ] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::Usage(format!("{name} must be positive (got {v})")));
        }
    }
    Ok(threshold_distance / (report_days * sentiment_level * day_length))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(prices: &[f64]) -> Vec<StepRecord<f64>> {
        prices
            .iter()
            .map(|&p| StepRecord {
                log_price: p,
                sentiment: 0.0,
                switches: 1,
            })
            .collect()
    }

    #[test]
    fn twenty_steps_make_two_days() {
        let daily = aggregate_daily(&steps(&[0.0; 20]), 10).unwrap();
        assert_eq!(daily.len(), 2);
        assert!(daily.returns().iter().all(|r| *r == 0.0));
        assert_eq!(daily.records[1].switches_in_day, 10);
    }

    #[test]
    fn equal_increments_sum_per_day() {
        let c = 0.25;
        let prices: Vec<f64> = (1..=30).map(|k| k as f64 * c).collect();
        let daily = aggregate_daily(&steps(&prices), 10).unwrap();
        assert_eq!(daily.len(), 3);
        for r in daily.returns() {
            assert!((r - 10.0 * c).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_day_is_dropped() {
        let daily = aggregate_daily(&steps(&[0.0; 25]), 10).unwrap();
        assert_eq!(daily.len(), 2);
    }

    #[test]
    fn empty_input_is_usage_error() {
        assert!(aggregate_daily::<f64>(&[], 10).is_err());
    }

    #[test]
    fn exceedance_enumeration() {
        let curve = exceedance(&[0.0, 0.1, -0.2], &[0.05]).unwrap();
        assert_eq!(curve.counts, vec![2]);
        let curve = exceedance(&[0.0, 0.1, -0.2], &[0.05, 0.15, 0.5]).unwrap();
        assert_eq!(curve.counts, vec![2, 1, 0]);
    }

    #[test]
    fn exceedance_rejects_unsorted_grid() {
        assert!(exceedance(&[0.1f64], &[0.2, 0.1]).is_err());
        assert!(exceedance(&[0.1f64], &[0.0]).is_err());
    }

    #[test]
    fn default_grid_spans_tenth_of_percent_to_twenty() {
        let g = default_thresholds::<f64>();
        assert_eq!(g.len(), 30);
        assert!((g[0] - 0.001).abs() < 1e-15);
        assert!((g[29] - 0.2).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rademacher_kurtosis() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((excess_kurtosis(&xs).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_errors() {
        assert!(matches!(excess_kurtosis(&[1.0f64; 10]), Err(Error::Degenerate(_))));
        assert!(matches!(excess_kurtosis(&[1.0f64, 2.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn max_abs_sentiment_examples() {
        let mk = |s: &[f64]| DailySeries {
            records: s
                .iter()
                .enumerate()
                .map(|(day, &sentiment_close)| DailyRecord {
                    day,
                    log_price_close: 0.0,
                    daily_log_return: 0.0,
                    sentiment_close,
                    switches_in_day: 0,
                })
                .collect(),
        };
        assert_eq!(max_abs_sentiment(&mk(&[0.9, 0.0, 0.0]), 1).unwrap(), 0.0);
        assert_eq!(max_abs_sentiment(&mk(&[1.0, 0.1, -0.97, 0.2]), 1).unwrap(), 0.97);
        assert!(max_abs_sentiment(&mk(&[0.1, 0.2]), 2).is_err());
    }

    #[test]
    fn calibration_examples() {
        let c = calibrate_herding(80.0, 0.5, 0.85f64.ln().abs(), 0.00004).unwrap();
        assert!((c - 101.6).abs() < 0.1, "{c}");
        let c2 = calibrate_herding(160.0, 0.5, 0.85f64.ln().abs(), 0.00004).unwrap();
        assert!((c2 - c / 2.0).abs() < 1e-9);
        assert_eq!(calibrate_herding(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(calibrate_herding(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sample_std() {
        assert_eq!(std_dev(&[2.0f64]).unwrap(), 0.0);
        let s = std_dev(&[1.0f64, 2.0, 3.0, 4.0]).unwrap();
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean::<f64>(&[]).is_none());
    }
}
