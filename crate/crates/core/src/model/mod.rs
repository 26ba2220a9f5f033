//! Instances, valuations, allocations, payments and welfare functionals.

mod allocation;
mod instance;
pub mod io;
mod itemset;
mod payments;
mod valuation;
pub mod welfare;

pub use allocation::Allocation;
pub use instance::{Instance, VALIDATION_CAP};
pub use itemset::ItemSet;
pub use payments::{PaymentKind, PaymentVector};
pub use valuation::{Valuation, ValuationClass, MAX_ADDITIVE_ITEMS, MAX_TABLE_ITEMS};
pub use welfare::{nash_product, rho_mean, social_welfare, utilities, WelfareReport};
