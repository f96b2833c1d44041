// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rf angular frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("Lorentzian term k = {order} diverges: gamma = 0 at integer detuning with J_k(xi) != 0")]
    DivergentTerm { order: i64 },

    #[error("required step size {step:e} fell below the minimum at t = {t}")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("mean waiting time diverges: {0}")]
    DivergentWaitingTime(&'static str),

    #[error("no max-min pair found for n = {n} at gamma = {gamma}")]
    NoPairFound { n: usize, gamma: f64 },

    #[error("only {found} ladder points retained a maximum, need at least {needed}")]
    FitWindowTooNarrow { found: usize, needed: usize },

    #[error("periodic steady state not reached within {periods} rf periods")]
    NoConvergence { periods: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
