use super::valuation::{MAX_ADDITIVE_ITEMS, MAX_TABLE_ITEMS};
use super::{ItemSet, Valuation, ValuationClass};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Full class checks (subadditivity is 3^m disjoint pairs) run only up to this many items.
pub const VALIDATION_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    items: usize,
    class: ValuationClass,
    class_verified: bool,
    valuations: Vec<Valuation<T>>,
}

impl<T: Scalar> Instance<T> {
    /// Build and validate an instance. The declared class is checked
    /// exhaustively when `items <= VALIDATION_CAP`; above the cap it is
    /// recorded as unverified.
    pub fn new(items: usize, class: ValuationClass, valuations: Vec<Valuation<T>>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(invalid("instance needs at least one agent"));
        }
        for (agent, v) in valuations.iter().enumerate() {
            check_shape(agent, items, v)?;
        }
        let mut inst = Instance {
            items,
            class,
            class_verified: false,
            valuations,
        };
        for agent in 0..inst.agents() {
            inst.check_basic(agent)?;
        }
        if items <= VALIDATION_CAP {
            for agent in 0..inst.agents() {
                inst.check_class(agent)?;
            }
            inst.class_verified = true;
        }
        Ok(inst)
    }

    pub fn agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn class(&self) -> ValuationClass {
        self.class
    }

    pub fn class_verified(&self) -> bool {
        self.class_verified
    }

    pub fn valuations(&self) -> &[Valuation<T>] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation<T> {
        &self.valuations[agent]
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.items)
    }

    pub fn value(&self, agent: usize, s: ItemSet) -> T {
        debug_assert!(s.is_subset(self.all_items()));
        self.valuations[agent].value(s)
    }

    pub fn marginal(&self, agent: usize, s: ItemSet, g: usize) -> T {
        self.valuations[agent].marginal(s, g)
    }

    pub fn is_additive(&self) -> bool {
        self.valuations.iter().all(|v| matches!(v, Valuation::Additive(_)))
            || (self.class == ValuationClass::Additive && self.class_verified)
    }

    /// Every agent's value depends only on how many items it holds.
    pub fn is_cardinality_based(&self) -> bool {
        self.valuations.iter().all(Valuation::is_cardinality_based)
    }

    /// The largest single-item marginal over all agents and contexts.
    pub fn max_marginal(&self) -> T {
        let mut best = T::zero();
        for v in &self.valuations {
            let local = match v {
                Valuation::Additive(values) => values.iter().cloned().fold(T::zero(), max),
                Valuation::SqrtCardinality { scale } if self.items > 0 => scale.clone(),
                Valuation::SqrtCardinality { .. } => T::zero(),
                Valuation::Table(_) => {
                    let mut m = T::zero();
                    for mask in 0..(1u64 << self.items) {
                        let s = ItemSet(mask);
                        for g in self.all_items().minus(s).iter() {
                            m = max(m, v.marginal(s, g));
                        }
                    }
                    m
                }
            };
            best = max(best, local);
        }
        best
    }

    /// Scale all valuations so the largest marginal is exactly 1.
    /// All-zero instances are returned unchanged.
    pub fn normalize(&self) -> Instance<T> {
        let mu = self.max_marginal();
        if !mu.is_positive_strict() {
            return self.clone();
        }
        self.scale_by(&(T::one() / mu))
    }

    /// Multiply every valuation by `lambda > 0`. Skips revalidation of the
    /// class, which scaling preserves (except matroid rank, whose binary
    /// marginals it breaks; the result is then marked unverified).
    pub fn scale_by(&self, lambda: &T) -> Instance<T> {
        let valuations = self
            .valuations
            .iter()
            .map(|v| v.map(|x| x.clone() * lambda.clone()))
            .collect();
        Instance {
            items: self.items,
            class: self.class,
            class_verified: self.class_verified
                && (self.class != ValuationClass::MatroidRank || lambda.is_one()),
            valuations,
        }
    }

    /// Like [`Instance::new`] but keeps the declared class unverified and
    /// skips the normalization check; for scaled copies used in tests.
    pub fn new_unnormalized(
        items: usize,
        class: ValuationClass,
        valuations: Vec<Valuation<T>>,
    ) -> Result<Self> {
        for (agent, v) in valuations.iter().enumerate() {
            check_shape(agent, items, v)?;
        }
        Ok(Instance {
            items,
            class,
            class_verified: false,
            valuations,
        })
    }

    fn check_basic(&self, agent: usize) -> Result<()> {
        let v = &self.valuations[agent];
        let one = T::one();
        match v {
            Valuation::Additive(values) => {
                for (g, x) in values.iter().enumerate() {
                    let s = ItemSet::singleton(g);
                    if x.is_negative_strict() {
                        return Err(witness(
                            format!("agent {agent}: valuation is not monotone"),
                            ItemSet::EMPTY,
                            s,
                        ));
                    }
                    if x.gt_strict(&one) {
                        return Err(witness(
                            format!("agent {agent}: marginal value {x} exceeds 1"),
                            ItemSet::EMPTY,
                            s,
                        ));
                    }
                }
            }
            Valuation::SqrtCardinality { scale } => {
                if scale.is_negative_strict() {
                    return Err(invalid(format!("agent {agent}: negative sqrt scale")));
                }
                if self.items > 0 && scale.gt_strict(&one) {
                    return Err(witness(
                        format!("agent {agent}: marginal value {scale} exceeds 1"),
                        ItemSet::EMPTY,
                        ItemSet::singleton(0),
                    ));
                }
            }
            Valuation::Table(table) => {
                if !table[0].is_zero() {
                    return Err(invalid(format!("agent {agent}: nonzero empty-set value")));
                }
                for mask in 0..table.len() as u64 {
                    let s = ItemSet(mask);
                    for g in self.all_items().minus(s).iter() {
                        let bigger = s.with(g);
                        let d = v.value(bigger) - v.value(s);
                        if d.is_negative_strict() {
                            return Err(witness(
                                format!("agent {agent}: valuation is not monotone"),
                                s,
                                bigger,
                            ));
                        }
                        if d.gt_strict(&one) {
                            return Err(witness(
                                format!("agent {agent}: marginal value {d} exceeds 1"),
                                s,
                                bigger,
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_class(&self, agent: usize) -> Result<()> {
        let v = &self.valuations[agent];
        let m = self.items;
        let full = self.all_items();
        let mismatch = |what: &str, a: ItemSet, b: ItemSet| {
            witness(
                format!("agent {agent}: class mismatch, valuation is not {what}"),
                a,
                b,
            )
        };
        match self.class {
            ValuationClass::Monotone => Ok(()),
            ValuationClass::Additive => {
                if matches!(v, Valuation::Additive(_)) {
                    return Ok(());
                }
                for mask in 0..(1u64 << m) {
                    let s = ItemSet(mask);
                    let by_items = s
                        .iter()
                        .fold(T::zero(), |acc, g| acc + v.value(ItemSet::singleton(g)));
                    if !by_items.approx_eq(&v.value(s)) {
                        return Err(mismatch("additive", s, s));
                    }
                }
                Ok(())
            }
            ValuationClass::Subadditive => {
                // additive and sqrt-of-cardinality are subadditive by construction
                if !matches!(v, Valuation::Table(_)) {
                    return Ok(());
                }
                // for monotone v, disjoint pairs suffice
                for mask in 1..(1u64 << m) {
                    let s = ItemSet(mask);
                    let vs = v.value(s);
                    for t in full.minus(s).subsets().skip(1) {
                        if v.value(s.union(t)).gt_strict(&(vs.clone() + v.value(t))) {
                            return Err(mismatch("subadditive", s, t));
                        }
                    }
                }
                Ok(())
            }
            ValuationClass::MatroidRank => {
                let zero = T::zero();
                let one = T::one();
                for mask in 0..(1u64 << m) {
                    let s = ItemSet(mask);
                    let rest = full.minus(s);
                    for g in rest.iter() {
                        let d = v.marginal(s, g);
                        if !(d.approx_eq(&zero) || d.approx_eq(&one)) {
                            return Err(mismatch("matroid rank (non-binary marginal)", s, s.with(g)));
                        }
                        for h in rest.without(g).iter() {
                            let later = v.marginal(s.with(h), g);
                            if later.gt_strict(&d) {
                                return Err(mismatch("submodular", s.with(g), s.with(h).with(g)));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Convert the scalar type, e.g. lift a rational instance into surds.
    pub fn convert<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Instance<U> {
        Instance {
            items: self.items,
            class: self.class,
            class_verified: self.class_verified,
            valuations: self.valuations.iter().map(|v| v.map(&f)).collect(),
        }
    }
}

fn check_shape<T: Scalar>(agent: usize, items: usize, v: &Valuation<T>) -> Result<()> {
    match v {
        Valuation::Additive(values) => {
            if items > MAX_ADDITIVE_ITEMS {
                return Err(Error::TooLarge(format!(
                    "additive valuations support at most {MAX_ADDITIVE_ITEMS} items"
                )));
            }
            if values.len() != items {
                return Err(invalid(format!(
                    "agent {agent}: expected {items} additive values, got {}",
                    values.len()
                )));
            }
        }
        Valuation::Table(table) => {
            if items > MAX_TABLE_ITEMS {
                return Err(Error::TooLarge(format!(
                    "explicit tables support at most {MAX_TABLE_ITEMS} items"
                )));
            }
            if table.len() != 1usize << items {
                return Err(invalid(format!(
                    "agent {agent}: table must cover all 2^{items} subsets"
                )));
            }
        }
        Valuation::SqrtCardinality { .. } => {
            if items > MAX_ADDITIVE_ITEMS {
                return Err(Error::TooLarge(format!(
                    "at most {MAX_ADDITIVE_ITEMS} items supported"
                )));
            }
            if T::sqrt_of_int(2).is_none() {
                return Err(Error::Unsupported(
                    "sqrt_cardinality valuations need a scalar type with square roots".into(),
                ));
            }
        }
    }
    Ok(())
}

fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

fn invalid(reason: impl Into<String>) -> Error {
    Error::InvalidInstance {
        reason: reason.into(),
        witness: None,
    }
}

fn witness(reason: String, a: ItemSet, b: ItemSet) -> Error {
    Error::InvalidInstance {
        reason,
        witness: Some((a, b)),
    }
}
