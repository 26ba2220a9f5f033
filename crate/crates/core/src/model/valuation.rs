use serde::{Deserialize, Serialize};

use super::ItemSet;
use crate::scalar::Scalar;

/// Hard cap on items for explicit tables (2^m entries).
pub const MAX_TABLE_ITEMS: usize = 20;
/// Hard cap on items for additive valuations (bitmask width).
pub const MAX_ADDITIVE_ITEMS: usize = 63;

/// A set function `v : 2^M → T` with `v(∅) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation<T> {
    /// One value per item; `v(S)` is the sum over `S`.
    Additive(Vec<T>),
    /// Explicit value for every subset, indexed by bitmask.
    Table(Vec<T>),
    /// `v(S) = scale · √|S|`.
    SqrtCardinality { scale: T },
}

impl<T: Scalar> Valuation<T> {
    pub fn value(&self, s: ItemSet) -> T {
        match self {
            Valuation::Additive(values) => s
                .iter()
                .fold(T::zero(), |acc, g| acc + values[g].clone()),
            Valuation::Table(table) => table[s.bits() as usize].clone(),
            Valuation::SqrtCardinality { scale } => {
                let root = T::sqrt_of_int(s.len() as u64)
                    .expect("scalar type cannot represent square roots");
                scale.clone() * root
            }
        }
    }

    /// `v(S ∪ {g}) − v(S)`.
    pub fn marginal(&self, s: ItemSet, g: usize) -> T {
        match self {
            Valuation::Additive(values) if !s.contains(g) => values[g].clone(),
            _ => self.value(s.with(g)) - self.value(s),
        }
    }

    /// True when `v(S)` depends on `|S|` only.
    pub fn is_cardinality_based(&self) -> bool {
        match self {
            Valuation::SqrtCardinality { .. } => true,
            Valuation::Additive(values) => values.windows(2).all(|w| w[0] == w[1]),
            Valuation::Table(table) => {
                let mut by_size: Vec<Option<&T>> = vec![None; 65];
                table.iter().enumerate().all(|(mask, v)| {
                    let k = (mask as u64).count_ones() as usize;
                    match by_size[k] {
                        Some(seen) => seen == v,
                        None => {
                            by_size[k] = Some(v);
                            true
                        }
                    }
                })
            }
        }
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Valuation<U> {
        match self {
            Valuation::Additive(values) => Valuation::Additive(values.iter().map(&f).collect()),
            Valuation::Table(table) => Valuation::Table(table.iter().map(&f).collect()),
            Valuation::SqrtCardinality { scale } => Valuation::SqrtCardinality { scale: f(scale) },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Valuation::Additive(_) => "additive",
            Valuation::Table(_) => "table",
            Valuation::SqrtCardinality { .. } => "sqrt_cardinality",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationClass {
    Additive,
    Subadditive,
    MatroidRank,
    Monotone,
}

impl ValuationClass {
    pub fn name(self) -> &'static str {
        match self {
            ValuationClass::Additive => "additive",
            ValuationClass::Subadditive => "subadditive",
            ValuationClass::MatroidRank => "matroid_rank",
            ValuationClass::Monotone => "monotone",
        }
    }

    /// Additive and matroid-rank valuations are both subadditive.
    pub fn is_subadditive(self) -> bool {
        !matches!(self, ValuationClass::Monotone)
    }
}

impl std::str::FromStr for ValuationClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "additive" => Ok(ValuationClass::Additive),
            "subadditive" => Ok(ValuationClass::Subadditive),
            "matroid_rank" | "matroid-rank" => Ok(ValuationClass::MatroidRank),
            "monotone" => Ok(ValuationClass::Monotone),
            other => Err(format!("unknown valuation class {other:?}")),
        }
    }
}
