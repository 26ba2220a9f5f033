//! Brute-force ground truth and instance generators.

pub mod enumerate;
pub mod generators;
pub mod lp;
pub mod transfer;

pub use enumerate::{
    all_allocations, brute_nsw_opt, brute_sw_opt, enumerate_envy_freeable, NashKey, ValueCache,
    ENUMERATION_CAP,
};
pub use generators::{gen_bad_nsw, gen_constant_sum, gen_imposs, gen_random, gen_sqrt, gen_tightness};
pub use transfer::{min_total_transfer, min_transfer_at_welfare, TransferOptimum, WelfareKind, WelfareTransfer};
