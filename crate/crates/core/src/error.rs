use thiserror::Error;

/// Errors raised by the simulator and its statistics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated its constraint.
    #[error("invalid parameter `{field}`: must satisfy {constraint} (got {value})")]
    InvalidParam {
        field: &'static str,
        constraint: &'static str,
        value: String,
    },

    /// An operation was called with input it cannot act on.
    #[error("usage error: {0}")]
    Usage(String),

    /// A switching cascade exceeded the per-step flip budget.
    #[error(
        "cascade overflow at step {step}: {flips} flips exceeded bound {bound} \
         (M={num_agents}, kappa={kick_strength}, C={herding})"
    )]
    CascadeOverflow {
        step: u64,
        flips: usize,
        bound: usize,
        num_agents: usize,
        kick_strength: f64,
        herding: f64,
    },

    /// Sample variance was zero where a ratio with it was required.
    #[error("degenerate sample: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
