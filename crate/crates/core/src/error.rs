use thiserror::Error;

use crate::model::ItemSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("{reason}{}", fmt_witness(.witness))]
    InvalidInstance {
        reason: String,
        witness: Option<(ItemSet, ItemSet)>,
    },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid payments: {0}")]
    InvalidPayments(String),

    #[error("allocation is not envy-freeable: positive-weight cycle {cycle:?} of weight {weight}")]
    NotEnvyFreeable { cycle: Vec<usize>, weight: String },

    #[error("NSW undefined for negative utility (agent {agent})")]
    NegativeUtility { agent: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("guarantee violated: {0}")]
    GuaranteeViolated(String),
}

fn fmt_witness(w: &Option<(ItemSet, ItemSet)>) -> String {
    match w {
        Some((a, b)) => format!(" (witness {a}, {b})"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
