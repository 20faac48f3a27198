//! Agents, market parameters and the population container.
//!
//! An agent holds a binary position and an open log-price interval
//! `(lower, upper)` that must contain the current log-price. Sentiment is the
//! mean position, kept as an exact integer net position so the cached value
//! can never drift from the agents it summarizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::{count, Scalar};

/// Investment position of a slow agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentState {
    /// Owns the asset (+1).
    Plus,
    /// Does not own the asset (−1).
    Minus,
}

impl AgentState {
    #[inline]
    pub fn value(self) -> i64 {
        match self {
            AgentState::Plus => 1,
            AgentState::Minus => -1,
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            AgentState::Plus => AgentState::Minus,
            AgentState::Minus => AgentState::Plus,
        }
    }

    #[inline]
    pub fn as_scalar<T: Scalar>(self) -> T {
        match self {
            AgentState::Plus => T::one(),
            AgentState::Minus => -T::one(),
        }
    }
}

/// A slow trader: position plus threshold interval on log-price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent<T> {
    pub state: AgentState,
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> Agent<T> {
    pub fn new(state: AgentState, lower: T, upper: T) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::Usage(format!(
                "agent interval must satisfy lower < upper (got {lower}, {upper})"
            )));
        }
        Ok(Self {
            state,
            lower,
            upper,
        })
    }

    /// Whether `log_price` lies strictly inside the interval.
    #[inline]
    pub fn straddles(&self, log_price: T) -> bool {
        self.lower < log_price && log_price < self.upper
    }

    /// Midpoint offset and half-width, i.e. the agent's particle coordinates
    /// relative to the current log-price.
    pub fn particle_position(&self, log_price: T) -> (T, T) {
        let two = T::of(2.0);
        (
            (self.upper + self.lower) / two - log_price,
            (self.upper - self.lower) / two,
        )
    }
}

/// All model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams<T> {
    /// Number of agents `M`; even, at least 2.
    pub num_agents: usize,
    /// Time step `h` in model time.
    pub step_size: T,
    /// Per-threshold diffusion rate `α`.
    pub threshold_diffusion: T,
    /// Price impact `κ`; one switch kicks the log-price by `2κ/M`.
    pub kick_strength: T,
    /// Herding constant `C`.
    pub herding: T,
    /// Smallest fractional distance of a fresh threshold from the price.
    pub reinject_lo: T,
    /// Largest fractional distance of a fresh threshold from the price.
    pub reinject_hi: T,
    /// Exogenous drift `a`.
    pub drift: T,
    /// Exogenous volatility `b`.
    pub exo_volatility: T,
    pub seed: u64,
    pub steps_per_day: usize,
    pub days_per_year: usize,
}

impl<T: Scalar> Default for MarketParams<T> {
    fn default() -> Self {
        Self {
            num_agents: 1000,
            step_size: T::of(0.000004),
            threshold_diffusion: T::of(0.2),
            kick_strength: T::of(0.2),
            herding: T::of(100.0),
            reinject_lo: T::of(0.05),
            reinject_hi: T::of(0.25),
            drift: T::zero(),
            exo_volatility: T::one(),
            seed: 1,
            steps_per_day: 10,
            days_per_year: 252,
        }
    }
}

fn invalid<T: Scalar>(field: &'static str, constraint: &'static str, value: T) -> Error {
    Error::InvalidParam {
        field,
        constraint,
        value: value.to_string(),
    }
}

impl<T: Scalar> MarketParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.num_agents < 2 || !self.num_agents.is_multiple_of(2) {
            return Err(Error::InvalidParam {
                field: "num_agents",
                constraint: "even and >= 2",
                value: self.num_agents.to_string(),
            });
        }
        if !(self.step_size > T::zero()) || !self.step_size.is_finite() {
            return Err(invalid("step_size", "> 0", self.step_size));
        }
        for (field, v) in [
            ("threshold_diffusion", self.threshold_diffusion),
            ("kick_strength", self.kick_strength),
            ("herding", self.herding),
            ("exo_volatility", self.exo_volatility),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(invalid(field, ">= 0", v));
            }
        }
        if !self.drift.is_finite() {
            return Err(invalid("drift", "finite", self.drift));
        }
        if !(self.reinject_lo > T::zero() && self.reinject_lo < self.reinject_hi) {
            return Err(invalid(
                "reinject_lo",
                "0 < reinject_lo < reinject_hi",
                self.reinject_lo,
            ));
        }
        if !(self.reinject_hi < T::one()) {
            return Err(invalid("reinject_hi", "reinject_hi < 1", self.reinject_hi));
        }
        if self.steps_per_day == 0 {
            return Err(Error::InvalidParam {
                field: "steps_per_day",
                constraint: ">= 1",
                value: "0".into(),
            });
        }
        if self.days_per_year == 0 {
            return Err(Error::InvalidParam {
                field: "days_per_year",
                constraint: ">= 1",
                value: "0".into(),
            });
        }
        Ok(())
    }

    /// Log-price kick of a single switch, `2κ/M`.
    #[inline]
    pub fn kick(&self) -> T {
        T::of(2.0) * self.kick_strength / count(self.num_agents)
    }

    /// Model time spanned by one trading day.
    pub fn day_length(&self) -> T {
        self.step_size * count(self.steps_per_day)
    }

    pub fn steps_per_year(&self) -> usize {
        self.steps_per_day * self.days_per_year
    }
}

/// Market log-price plus the agent population.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState<T> {
    log_price: T,
    time_step: u64,
    agents: Vec<Agent<T>>,
    net_position: i64,
}

impl<T: Scalar> MarketState<T> {
    /// Builds a state from explicit parts; the sentiment cache is computed here.
    pub fn from_parts(log_price: T, time_step: u64, agents: Vec<Agent<T>>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::Usage("market needs at least one agent".into()));
        }
        let net_position = agents.iter().map(|a| a.state.value()).sum();
        Ok(Self {
            log_price,
            time_step,
            agents,
            net_position,
        })
    }

    #[inline]
    pub fn log_price(&self) -> T {
        self.log_price
    }

    #[inline]
    pub fn time_step(&self) -> u64 {
        self.time_step
    }

    #[inline]
    pub fn agents(&self) -> &[Agent<T>] {
        &self.agents
    }

    #[inline]
    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// `Σ s_i`, an exact integer.
    #[inline]
    pub fn net_position(&self) -> i64 {
        self.net_position
    }

    /// Cached sentiment `σ = (1/M) Σ s_i`.
    #[inline]
    pub fn sentiment(&self) -> T {
        T::of(self.net_position as f64) / count(self.agents.len())
    }

    /// Recomputes sentiment from the agents and compares it with the cache.
    pub fn sentiment_cache_consistent(&self) -> bool {
        self.agents.iter().map(|a| a.state.value()).sum::<i64>() == self.net_position
    }

    /// True when every agent's interval strictly contains the log-price.
    pub fn all_straddle(&self) -> bool {
        self.agents.iter().all(|a| a.straddles(self.log_price))
    }

    pub(crate) fn log_price_mut(&mut self) -> &mut T {
        &mut self.log_price
    }

    pub(crate) fn agents_mut(&mut self) -> &mut [Agent<T>] {
        &mut self.agents
    }

    pub(crate) fn advance_time(&mut self) {
        self.time_step += 1;
    }

    /// Replaces agent `i` with its flipped self and keeps the cache in step.
    pub(crate) fn apply_flip(&mut self, i: usize, lower: T, upper: T) -> AgentState {
        let agent = &mut self.agents[i];
        *agent = flip(*agent, (lower, upper));
        self.net_position += 2 * agent.state.value();
        agent.state
    }
}

/// Mean position of a population.
pub fn sentiment<T: Scalar>(agents: &[Agent<T>]) -> Result<T> {
    if agents.is_empty() {
        return Err(Error::Usage("sentiment of an empty population".into()));
    }
    let net: i64 = agents.iter().map(|a| a.state.value()).sum();
    Ok(T::of(net as f64) / count(agents.len()))
}

/// Threshold interval for fractional offsets `u_lo`, `u_hi` in `(0, 1)`:
/// `(r + ln(1 − u_lo), r + ln(1 + u_hi))`.
#[inline]
pub fn interval_from_draws<T: Scalar>(log_price: T, u_lo: f64, u_hi: f64) -> (T, T) {
    (
        log_price + T::of((-u_lo).ln_1p()),
        log_price + T::of(u_hi.ln_1p()),
    )
}

/// Draws a fresh interval straddling `log_price`, each side an independent
/// uniform fraction in `[reinject_lo, reinject_hi)` away in price terms.
#[inline]
pub fn reinject<T: Scalar>(log_price: T, params: &MarketParams<T>, rng: &mut RngStream) -> (T, T) {
    let lo = params.reinject_lo.as_f64();
    let hi = params.reinject_hi.as_f64();
    let u_lo = rng.uniform(lo, hi);
    let u_hi = rng.uniform(lo, hi);
    interval_from_draws(log_price, u_lo, u_hi)
}

/// Balanced initial population at log-price 0: even indices Plus, odd Minus,
/// intervals from the reinjection law.
pub fn init_population<T: Scalar>(
    params: &MarketParams<T>,
    rng: &mut RngStream,
) -> Result<MarketState<T>> {
    params.validate()?;
    let r = T::zero();
    let agents = (0..params.num_agents)
        .map(|i| {
            let state = if i % 2 == 0 {
                AgentState::Plus
            } else {
                AgentState::Minus
            };
            let (lower, upper) = reinject(r, params, rng);
            Agent {
                state,
                lower,
                upper,
            }
        })
        .collect();
    MarketState::from_parts(r, 0, agents)
}

/// Switches an agent's position and gives it a new interval.
#[inline]
pub fn flip<T: Scalar>(agent: Agent<T>, new_interval: (T, T)) -> Agent<T> {
    Agent {
        state: agent.state.flipped(),
        lower: new_interval.0,
        upper: new_interval.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(state: AgentState) -> Agent<f64> {
        Agent {
            state,
            lower: -0.1,
            upper: 0.1,
        }
    }

    #[test]
    fn sentiment_examples() {
        let all_plus = vec![agent(AgentState::Plus); 10];
        assert_eq!(sentiment(&all_plus).unwrap(), 1.0);

        let mut half: Vec<_> = vec![agent(AgentState::Plus); 5];
        half.extend(vec![agent(AgentState::Minus); 5]);
        assert_eq!(sentiment(&half).unwrap(), 0.0);

        let mixed = [
            agent(AgentState::Plus),
            agent(AgentState::Plus),
            agent(AgentState::Plus),
            agent(AgentState::Minus),
        ];
        assert_eq!(sentiment(&mixed).unwrap(), 0.5);
    }

    #[test]
    fn sentiment_of_empty_is_usage_error() {
        assert!(matches!(sentiment::<f64>(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn interval_at_mid_draws() {
        let (lo, hi) = interval_from_draws(0.0f64, 0.15, 0.15);
        assert!((lo - 0.85f64.ln()).abs() < 1e-15);
        assert!((hi - 1.15f64.ln()).abs() < 1e-15);
        assert!((lo + 0.1625).abs() < 1e-4);
        assert!((hi - 0.1398).abs() < 1e-4);
    }

    #[test]
    fn interval_at_lower_bound_draws() {
        let (lo, hi) = interval_from_draws(0.0f64, 0.05, 0.05);
        assert!((lo + 0.0513).abs() < 1e-4);
        assert!((hi - 0.0488).abs() < 1e-4);
    }

    #[test]
    fn init_two_agents() {
        let params = MarketParams::<f64> {
            num_agents: 2,
            ..Default::default()
        };
        let state = init_population(&params, &mut RngStream::from_seed(3)).unwrap();
        assert_eq!(state.agents()[0].state, AgentState::Plus);
        assert_eq!(state.agents()[1].state, AgentState::Minus);
        assert_eq!(state.sentiment(), 0.0);
    }

    #[test]
    fn init_paper_population_is_balanced_and_straddles_zero() {
        let params = MarketParams::<f64>::default();
        let state = init_population(&params, &mut RngStream::from_seed(3)).unwrap();
        assert_eq!(state.num_agents(), 1000);
        assert_eq!(state.sentiment(), 0.0);
        assert_eq!(state.log_price(), 0.0);
        assert!(state.all_straddle());
    }

    #[test]
    fn init_rejects_odd_population() {
        let params = MarketParams::<f64> {
            num_agents: 3,
            ..Default::default()
        };
        let err = init_population(&params, &mut RngStream::from_seed(3)).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParam {
                field: "num_agents",
                ..
            }
        ));
    }

    #[test]
    fn init_is_bit_reproducible() {
        let params = MarketParams::<f64>::default();
        let a = init_population(&params, &mut RngStream::from_seed(11)).unwrap();
        let b = init_population(&params, &mut RngStream::from_seed(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flip_examples() {
        let a = Agent {
            state: AgentState::Plus,
            lower: -0.1,
            upper: 0.1,
        };
        let f = flip(a, (-0.05, 0.07));
        assert_eq!(
            f,
            Agent {
                state: AgentState::Minus,
                lower: -0.05,
                upper: 0.07
            }
        );
        assert_eq!(flip(flip(a, (-0.1, 0.1)), (-0.1, 0.1)), a);
    }

    #[test]
    fn minus_to_plus_flip_moves_sentiment_by_two_over_m() {
        let mut state = MarketState::from_parts(
            0.0f64,
            0,
            vec![agent(AgentState::Minus), agent(AgentState::Minus), agent(AgentState::Plus), agent(AgentState::Plus)],
        )
        .unwrap();
        let before = state.sentiment();
        state.apply_flip(0, -0.1, 0.1);
        assert_eq!(state.sentiment() - before, 2.0 / 4.0);
        assert!(state.sentiment_cache_consistent());
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let base = MarketParams::<f64>::default();
        assert!(base.validate().is_ok());
        let cases = [
            MarketParams { kick_strength: -1.0, ..base },
            MarketParams { step_size: 0.0, ..base },
            MarketParams { herding: -0.5, ..base },
            MarketParams { reinject_lo: 0.3, ..base },
            MarketParams { reinject_hi: 1.0, ..base },
            MarketParams { num_agents: 0, ..base },
        ];
        for p in cases {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn particle_coordinates() {
        let a = Agent {
            state: AgentState::Plus,
            lower: -0.1f64,
            upper: 0.3,
        };
        let (x, y) = a.particle_position(0.05);
        assert!((x - 0.05).abs() < 1e-15);
        assert!((y - 0.2).abs() < 1e-15);
        // inside D: -y < x < y
        assert!(-y < x && x < y);
    }
}
