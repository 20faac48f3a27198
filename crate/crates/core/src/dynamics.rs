//! One Euler–Maruyama step of the coupled price/agent system.
//!
//! Within a step the continuous motions are applied first (exogenous price
//! move, threshold diffusion, minority herding drift) and threshold events are
//! resolved afterwards by repeated ascending-index passes. Each switch kicks
//! the log-price by `±2κ/M` and reinjects the switcher around the post-kick
//! price, so the straddle invariant holds once a pass finds nothing to flip.

use crate::error::{Error, Result};
use crate::model::{reinject, AgentState, MarketParams, MarketState};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Flip budget per step, as a multiple of the population size.
pub const CASCADE_FLIPS_PER_AGENT: usize = 100;

/// Result of [`step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub new_state: MarketState<T>,
    /// Flips this step, counting re-flips.
    pub switch_count: usize,
    /// Passes that flipped at least one agent.
    pub cascade_rounds: usize,
    /// The `b·√h·ξ` draw that drove the price this step.
    pub exo_increment: T,
    /// Sum of all kicks applied this step; equals `κ·Δσ`.
    pub kick_total: T,
}

/// Result of [`resolve_cascade`].
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome<T> {
    pub state: MarketState<T>,
    pub switch_count: usize,
    pub rounds: usize,
    pub kick_total: T,
}

/// Signum with `sgn(0) = 0`.
#[inline]
pub fn sgn<T: Scalar>(x: T) -> i64 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

/// Price move from drift plus the exogenous increment, `a·h + b·√h·ξ`.
///
/// Shared by the model and the paired gBm baseline so both accumulate
/// bit-identical increments.
#[inline]
pub fn exogenous_move<T: Scalar>(params: &MarketParams<T>, exo_increment: T) -> T {
    params.drift * params.step_size + exo_increment
}

/// Advances the market by one time step.
pub fn step<T: Scalar>(
    mut state: MarketState<T>,
    params: &MarketParams<T>,
    rng: &mut RngStream,
) -> Result<StepOutcome<T>> {
    let sqrt_h = params.step_size.sqrt();

    let xi = T::of(rng.standard_normal());
    let exo_increment = params.exo_volatility * sqrt_h * xi;
    *state.log_price_mut() = state.log_price() + exogenous_move(params, exo_increment);

    // Minority classification uses sentiment as of step start.
    let majority = sgn(state.sentiment());
    let inward = params.herding * state.sentiment().abs() * params.step_size;
    let spread = params.threshold_diffusion * sqrt_h;

    for agent in state.agents_mut() {
        agent.lower = agent.lower + spread * T::of(rng.standard_normal());
        agent.upper = agent.upper + spread * T::of(rng.standard_normal());
        if majority != 0 && agent.state.value() != majority {
            agent.lower = agent.lower + inward;
            agent.upper = agent.upper - inward;
        }
    }

    let cascade = resolve_cascade(state, params, rng)?;
    let mut new_state = cascade.state;
    new_state.advance_time();
    Ok(StepOutcome {
        new_state,
        switch_count: cascade.switch_count,
        cascade_rounds: cascade.rounds,
        exo_increment,
        kick_total: cascade.kick_total,
    })
}

/// Flips every agent whose interval no longer strictly contains the price,
/// applying kicks, until a full pass flips nobody.
///
/// A collapsed interval (`lower >= upper`) always counts as crossed.
pub fn resolve_cascade<T: Scalar>(
    mut state: MarketState<T>,
    params: &MarketParams<T>,
    rng: &mut RngStream,
) -> Result<CascadeOutcome<T>> {
    let kick = params.kick();
    let bound = CASCADE_FLIPS_PER_AGENT * state.num_agents();
    let mut switch_count = 0usize;
    let mut rounds = 0usize;
    let mut kick_total = T::zero();

    loop {
        let mut flipped_this_pass = 0usize;
        for i in 0..state.num_agents() {
            let r = state.log_price();
            let agent = state.agents()[i];
            if r > agent.lower && r < agent.upper {
                continue;
            }
            let dr = match agent.state.flipped() {
                AgentState::Plus => kick,
                AgentState::Minus => -kick,
            };
            let r = r + dr;
            *state.log_price_mut() = r;
            kick_total = kick_total + dr;
            let (lower, upper) = reinject(r, params, rng);
            state.apply_flip(i, lower, upper);

            flipped_this_pass += 1;
            switch_count += 1;
            if switch_count > bound {
                return Err(Error::CascadeOverflow {
                    step: state.time_step(),
                    flips: switch_count,
                    bound,
                    num_agents: state.num_agents(),
                    kick_strength: params.kick_strength.as_f64(),
                    herding: params.herding.as_f64(),
                });
            }
        }
        if flipped_this_pass == 0 {
            break;
        }
        rounds += 1;
    }

    Ok(CascadeOutcome {
        state,
        switch_count,
        rounds,
        kick_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_population, Agent};

    fn wide(state: AgentState) -> Agent<f64> {
        Agent {
            state,
            lower: -10.0,
            upper: 10.0,
        }
    }

    #[test]
    fn sgn_examples() {
        assert_eq!(sgn(0.5f64), 1);
        assert_eq!(sgn(0.0f64), 0);
        assert_eq!(sgn(-1e-12f64), -1);
    }

    #[test]
    fn no_violation_is_a_fixed_point() {
        let params = MarketParams::<f64>::default();
        let state = init_population(&params, &mut RngStream::from_seed(5)).unwrap();
        let out = resolve_cascade(state.clone(), &params, &mut RngStream::from_seed(6)).unwrap();
        assert_eq!(out.switch_count, 0);
        assert_eq!(out.rounds, 0);
        assert_eq!(out.state, state);
    }

    #[test]
    fn two_agent_cascade_hand_trace() {
        // Agent 0 crossed upward; its kick of +0.2 carries r past agent 1's
        // upper threshold, which adds another +0.2.
        let params = MarketParams::<f64> {
            num_agents: 2,
            kick_strength: 0.2,
            // Reinjection distance above the 0.2 kick rules out re-flips here.
            reinject_lo: 0.5,
            reinject_hi: 0.9,
            ..Default::default()
        };
        let agents = vec![
            Agent { state: AgentState::Minus, lower: -0.3, upper: 0.0 },
            Agent { state: AgentState::Minus, lower: -0.3, upper: 0.1 },
        ];
        let state = MarketState::from_parts(0.0, 0, agents).unwrap();
        let out = resolve_cascade(state, &params, &mut RngStream::from_seed(1)).unwrap();
        assert_eq!(out.switch_count, 2);
        assert!((out.state.log_price() - 0.4).abs() < 1e-15);
        assert!((out.kick_total - 0.4).abs() < 1e-15);
        assert_eq!(out.state.sentiment(), 1.0);
        assert!(out.state.all_straddle());
    }

    #[test]
    fn single_flip_kick_matches_hand_trace() {
        let m = 10;
        let params = MarketParams::<f64> {
            num_agents: m,
            ..Default::default()
        };
        let mut agents = vec![wide(AgentState::Plus); m];
        agents[3] = Agent { state: AgentState::Minus, lower: -0.1, upper: -0.01 };
        let state = MarketState::from_parts(0.0, 0, agents).unwrap();
        let out = resolve_cascade(state, &params, &mut RngStream::from_seed(1)).unwrap();
        assert_eq!(out.switch_count, 1);
        assert_eq!(out.rounds, 1);
        assert!((out.state.log_price() - 0.2 * (2.0 / m as f64)).abs() < 1e-15);
    }

    #[test]
    fn collapsed_interval_is_crossed() {
        let params = MarketParams::<f64> {
            num_agents: 2,
            ..Default::default()
        };
        let agents = vec![
            Agent { state: AgentState::Plus, lower: 0.05, upper: -0.05 },
            wide(AgentState::Minus),
        ];
        let state = MarketState::from_parts(0.0, 0, agents).unwrap();
        let out = resolve_cascade(state, &params, &mut RngStream::from_seed(1)).unwrap();
        assert_eq!(out.switch_count, 1);
        assert_eq!(out.state.agents()[0].state, AgentState::Minus);
    }

    #[test]
    fn runaway_feedback_overflows() {
        // Kicks larger than any reinjection distance make the two agents
        // push each other back and forth indefinitely.
        let params = MarketParams::<f64> {
            num_agents: 2,
            kick_strength: 5.0,
            ..Default::default()
        };
        let agents = vec![
            Agent { state: AgentState::Minus, lower: -0.3, upper: 0.0 },
            Agent { state: AgentState::Plus, lower: -10.0, upper: 1.0 },
        ];
        let state = MarketState::from_parts(0.0, 7, agents).unwrap();
        let err = resolve_cascade(state, &params, &mut RngStream::from_seed(1)).unwrap_err();
        assert!(matches!(err, Error::CascadeOverflow { step: 7, bound: 200, .. }), "{err:?}");
    }

    #[test]
    fn balanced_start_applies_no_herding_drift() {
        // With alpha = 0 and sigma = 0 the thresholds must not move at all.
        let params = MarketParams::<f64> {
            num_agents: 4,
            threshold_diffusion: 0.0,
            exo_volatility: 0.0,
            herding: 1e6,
            ..Default::default()
        };
        let state = init_population(&params, &mut RngStream::from_seed(2)).unwrap();
        let before: Vec<_> = state.agents().to_vec();
        let out = step(state, &params, &mut RngStream::from_seed(3)).unwrap();
        assert_eq!(out.switch_count, 0);
        assert_eq!(out.new_state.agents(), &before[..]);
    }

    #[test]
    fn herding_drift_moves_only_minority() {
        let params = MarketParams::<f64> {
            num_agents: 4,
            threshold_diffusion: 0.0,
            exo_volatility: 0.0,
            herding: 100.0,
            ..Default::default()
        };
        let agents = vec![
            wide(AgentState::Plus),
            wide(AgentState::Plus),
            wide(AgentState::Plus),
            wide(AgentState::Minus),
        ];
        let state = MarketState::from_parts(0.0, 0, agents).unwrap();
        let out = step(state, &params, &mut RngStream::from_seed(3)).unwrap();
        let d = 100.0 * 0.5 * params.step_size;
        let a = out.new_state.agents();
        assert_eq!(a[0].lower, -10.0);
        assert_eq!(a[3].lower, -10.0 + d);
        assert_eq!(a[3].upper, 10.0 - d);
        assert_eq!(out.new_state.time_step(), 1);
    }
}
