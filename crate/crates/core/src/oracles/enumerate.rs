//! Exhaustive search over allocations.
//!
//! Complete allocations are indexed by their assignment string read as a
//! base-`n` number (item 0 most significant), so numeric order is
//! lexicographic order. Parallel reductions break ties by lowest index and
//! therefore do not depend on the worker count.

use rayon::prelude::*;

use crate::envy::{EnvyGraph, PositiveCycle};
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance, ItemSet, Valuation};
use crate::scalar::{sum, Scalar};

/// Largest `n^m` any enumeration will visit.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// Subset tables are precomputed up to this many items.
const CACHE_ITEMS: usize = 16;

/// `n^m`, or `None` on overflow.
pub fn allocation_count(agents: usize, items: usize) -> Option<u64> {
    (agents as u64).checked_pow(items as u32)
}

pub(crate) fn check_enumerable(agents: usize, items: usize) -> Result<u64> {
    match allocation_count(agents, items) {
        Some(c) if c <= ENUMERATION_CAP => Ok(c),
        _ => Err(Error::TooLarge(format!(
            "{agents}^{items} allocations exceed the enumeration cap of {ENUMERATION_CAP}"
        ))),
    }
}

/// Bundles of the allocation with lexicographic index `code`.
pub fn decode(code: u64, agents: usize, items: usize) -> Vec<ItemSet> {
    let mut bundles = vec![ItemSet::EMPTY; agents];
    let mut c = code;
    for g in (0..items).rev() {
        let a = (c % agents as u64) as usize;
        c /= agents as u64;
        bundles[a] = bundles[a].with(g);
    }
    bundles
}

/// Lexicographic index of a complete allocation.
pub fn encode(alloc: &Allocation) -> u64 {
    let n = alloc.agents() as u64;
    alloc
        .assignment()
        .iter()
        .fold(0u64, |acc, a| acc * n + a.expect("complete allocation") as u64)
}

/// Values `v_i(S)` with per-agent subset tables when `m` is small.
pub struct ValueCache<'a, T> {
    inst: &'a Instance<T>,
    tables: Option<Vec<Vec<T>>>,
}

impl<'a, T: Scalar> ValueCache<'a, T> {
    pub fn new(inst: &'a Instance<T>) -> Self {
        let m = inst.items();
        let tables = (m <= CACHE_ITEMS).then(|| {
            inst.valuations()
                .iter()
                .map(|v| match v {
                    Valuation::Table(t) => t.clone(),
                    Valuation::Additive(values) => {
                        let mut t: Vec<T> = Vec::with_capacity(1 << m);
                        t.push(T::zero());
                        for mask in 1usize..(1 << m) {
                            let low = mask.trailing_zeros() as usize;
                            let rest = t[mask & (mask - 1)].clone();
                            t.push(rest + values[low].clone());
                        }
                        t
                    }
                    other => (0..1u64 << m).map(|mask| other.value(ItemSet(mask))).collect(),
                })
                .collect()
        });
        ValueCache { inst, tables }
    }

    pub fn instance(&self) -> &'a Instance<T> {
        self.inst
    }

    pub fn value(&self, agent: usize, s: ItemSet) -> T {
        match &self.tables {
            Some(t) => t[agent][s.bits() as usize].clone(),
            None => self.inst.value(agent, s),
        }
    }

    pub fn social_welfare(&self, bundles: &[ItemSet]) -> T {
        sum(bundles.iter().enumerate().map(|(i, &b)| self.value(i, b)))
    }

    pub fn envy_graph(&self, bundles: &[ItemSet]) -> EnvyGraph<T> {
        let n = bundles.len();
        let weights = (0..n)
            .map(|i| {
                let own = self.value(i, bundles[i]);
                (0..n).map(|j| self.value(i, bundles[j]) - own.clone()).collect()
            })
            .collect();
        let alloc = Allocation::new(self.inst.items(), bundles.to_vec()).expect("partition");
        EnvyGraph::from_weights(alloc, weights)
    }

    pub fn is_envy_freeable(&self, bundles: &[ItemSet]) -> bool {
        self.longest_paths(bundles).is_ok()
    }

    pub fn longest_paths(&self, bundles: &[ItemSet]) -> std::result::Result<Vec<T>, PositiveCycle<T>> {
        self.envy_graph(bundles).longest_paths()
    }
}

/// Index and score of the best allocation under `better`, lowest index on ties.
fn par_argmax<T, K, S, B>(inst: &Instance<T>, score: S, better: B) -> Result<(u64, K)>
where
    T: Scalar,
    K: Send,
    S: Fn(&[ItemSet]) -> K + Sync,
    B: Fn(&K, &K) -> bool + Sync,
{
    let (n, m) = (inst.agents(), inst.items());
    let count = check_enumerable(n, m)?;
    let best = (0..count as usize)
        .into_par_iter()
        .with_min_len(256)
        .map(|c| (c as u64, score(&decode(c as u64, n, m))))
        .reduce_with(|a, b| {
            if better(&b.1, &a.1) || (!better(&a.1, &b.1) && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one allocation");
    Ok(best)
}

/// Utilitarian optimum; lexicographically first among ties.
pub fn brute_sw_opt<T: Scalar>(inst: &Instance<T>) -> Result<Allocation> {
    let (n, m) = (inst.agents(), inst.items());
    if inst.valuations().iter().all(|v| matches!(v, Valuation::Additive(_))) {
        // Each item to its highest-value agent, lowest index on ties.
        let assignment: Vec<usize> = (0..m)
            .map(|g| {
                let mut best = 0;
                for i in 1..n {
                    if inst.marginal(i, ItemSet::EMPTY, g).gt_strict(&inst.marginal(best, ItemSet::EMPTY, g)) {
                        best = i;
                    }
                }
                best
            })
            .collect();
        return Ok(Allocation::from_assignment(n, &assignment));
    }
    brute_sw_opt_enumerated(inst)
}

/// [`brute_sw_opt`] without the additive closed form.
pub fn brute_sw_opt_enumerated<T: Scalar>(inst: &Instance<T>) -> Result<Allocation> {
    let cache = ValueCache::new(inst);
    let (code, _) = par_argmax(inst, |b| cache.social_welfare(b), |a: &T, b: &T| a.gt_strict(b))?;
    Ok(Allocation::new(inst.items(), decode(code, inst.agents(), inst.items()))?)
}

/// Nash objective used for ranking: first the number of agents with positive
/// utility, then the product of those utilities.
#[derive(Clone, Debug, PartialEq)]
pub struct NashKey<T> {
    pub positive: usize,
    pub product: T,
}

impl<T: Scalar> NashKey<T> {
    pub fn of(utilities: &[T]) -> Self {
        let mut positive = 0;
        let mut product = T::one();
        for u in utilities {
            if u.is_positive_strict() {
                positive += 1;
                product = product * u.clone();
            }
        }
        NashKey { positive, product }
    }

    pub fn beats(&self, other: &Self) -> bool {
        self.positive > other.positive
            || (self.positive == other.positive && self.product.gt_strict(&other.product))
    }

    /// The full Nash product `Π u_i`.
    pub fn nash_product(&self, agents: usize) -> T {
        if self.positive == agents {
            self.product.clone()
        } else {
            T::zero()
        }
    }
}

/// Nash-welfare optimum. Ranks by [`NashKey`] so that when every allocation
/// has product zero the optimum still serves as many agents as possible;
/// lexicographically first among ties.
pub fn brute_nsw_opt<T: Scalar>(inst: &Instance<T>) -> Result<Allocation> {
    if inst.is_cardinality_based() {
        return Ok(cardinality_nsw_opt(inst));
    }
    brute_nsw_opt_enumerated(inst)
}

/// [`brute_nsw_opt`] without the cardinality shortcut.
pub fn brute_nsw_opt_enumerated<T: Scalar>(inst: &Instance<T>) -> Result<Allocation> {
    let cache = ValueCache::new(inst);
    let key = |b: &[ItemSet]| {
        let u: Vec<T> = b.iter().enumerate().map(|(i, &s)| cache.value(i, s)).collect();
        NashKey::of(&u)
    };
    let (code, _) = par_argmax(inst, key, NashKey::beats)?;
    Ok(Allocation::new(inst.items(), decode(code, inst.agents(), inst.items()))?)
}

/// When values depend only on bundle sizes, search over size vectors
/// `(k_0, …, k_{n−1})`; the lexicographically first allocation with given
/// sizes hands out items in contiguous blocks, and larger `k_0` (then `k_1`,
/// …) comes first.
fn cardinality_nsw_opt<T: Scalar>(inst: &Instance<T>) -> Allocation {
    let (n, m) = (inst.agents(), inst.items());
    let by_size: Vec<Vec<T>> = (0..n)
        .map(|i| (0..=m).map(|k| inst.value(i, ItemSet::full(k))).collect())
        .collect();
    let mut best: Option<(Vec<usize>, NashKey<T>)> = None;
    let mut sizes = vec![0usize; n];
    fn recurse<T: Scalar>(
        agent: usize,
        left: usize,
        sizes: &mut Vec<usize>,
        by_size: &[Vec<T>],
        best: &mut Option<(Vec<usize>, NashKey<T>)>,
    ) {
        let n = sizes.len();
        if agent == n - 1 {
            sizes[agent] = left;
            let u: Vec<T> = (0..n).map(|i| by_size[i][sizes[i]].clone()).collect();
            let key = NashKey::of(&u);
            if best.as_ref().map_or(true, |(_, b)| key.beats(b)) {
                *best = Some((sizes.clone(), key));
            }
            return;
        }
        for k in (0..=left).rev() {
            sizes[agent] = k;
            recurse(agent + 1, left - k, sizes, by_size, best);
        }
    }
    recurse(0, m, &mut sizes, &by_size, &mut best);
    let (sizes, _) = best.expect("some size vector");
    let assignment: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat(i).take(k))
        .collect();
    Allocation::from_assignment(n, &assignment)
}

/// All envy-freeable complete allocations in lexicographic order.
pub fn enumerate_envy_freeable<T: Scalar>(inst: &Instance<T>) -> Result<Vec<Allocation>> {
    let (n, m) = (inst.agents(), inst.items());
    let count = check_enumerable(n, m)?;
    let cache = ValueCache::new(inst);
    let codes: Vec<u64> = (0..count as usize)
        .into_par_iter()
        .with_min_len(256)
        .map(|c| c as u64)
        .filter(|&c| cache.is_envy_freeable(&decode(c, n, m)))
        .collect();
    codes
        .into_iter()
        .map(|c| Allocation::new(m, decode(c, n, m)))
        .collect()
}

/// Every complete allocation, in lexicographic order.
pub fn all_allocations(agents: usize, items: usize) -> Result<impl Iterator<Item = Allocation>> {
    let count = check_enumerable(agents, items)?;
    Ok((0..count).map(move |c| Allocation::new(items, decode(c, agents, items)).expect("partition")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ValuationClass;
    use crate::scalar::Rational;
    use crate::surd::Surd;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn additive(rows: Vec<Vec<Rational>>) -> Instance<Rational> {
        let m = rows[0].len();
        Instance::new(m, ValuationClass::Additive, rows.into_iter().map(Valuation::Additive).collect())
            .unwrap()
    }

    fn bad_nsw() -> Instance<Rational> {
        additive(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 100)]])
    }

    #[test]
    fn codes_are_lexicographic() {
        assert_eq!(decode(0, 2, 2), vec![ItemSet(0b11), ItemSet(0)]);
        assert_eq!(decode(1, 2, 2), vec![ItemSet(0b01), ItemSet(0b10)]);
        assert_eq!(decode(2, 2, 2), vec![ItemSet(0b10), ItemSet(0b01)]);
        for c in 0..81 {
            let a = Allocation::new(4, decode(c, 3, 4)).unwrap();
            assert_eq!(encode(&a), c);
        }
        assert_eq!(allocation_count(3, 4), Some(81));
        assert!(check_enumerable(10, 10).is_err());
    }

    #[test]
    fn sw_optimum_examples() {
        assert_eq!(brute_sw_opt(&bad_nsw()).unwrap(), Allocation::grand_bundle(2, 2, 0));
        let same = additive(vec![vec![q(1, 2); 3]; 2]);
        assert_eq!(brute_sw_opt(&same).unwrap(), Allocation::grand_bundle(2, 3, 0));
        assert_eq!(brute_sw_opt_enumerated(&same).unwrap(), Allocation::grand_bundle(2, 3, 0));
    }

    #[test]
    fn nsw_optimum_examples() {
        let a = brute_nsw_opt(&bad_nsw()).unwrap();
        assert_eq!(a.bundles(), &[ItemSet(0b10), ItemSet(0b01)]);
        let single = additive(vec![vec![q(1, 2), q(1, 3)]]);
        assert_eq!(brute_nsw_opt(&single).unwrap(), Allocation::grand_bundle(1, 2, 0));
        // more agents than items: serve as many as possible
        let wide = additive(vec![vec![q(1, 1)]; 3]);
        let a = brute_nsw_opt(&wide).unwrap();
        assert_eq!(a.bundles(), &[ItemSet(1), ItemSet(0), ItemSet(0)]);
    }

    #[test]
    fn cardinality_shortcut_matches_enumeration() {
        let inst = Instance::new(
            12,
            ValuationClass::Subadditive,
            vec![
                Valuation::Additive(vec![Surd::from_rational(q(1, 1)); 12]),
                Valuation::SqrtCardinality {
                    scale: Surd::from_rational(q(1, 1)),
                },
            ],
        )
        .unwrap();
        let fast = brute_nsw_opt(&inst).unwrap();
        assert_eq!(fast.bundle(0).len(), 8);
        assert_eq!(fast.bundle(1).len(), 4);
        assert_eq!(fast, brute_nsw_opt_enumerated(&inst).unwrap());

        let flat = additive(vec![vec![q(1, 3); 4]; 3]);
        assert_eq!(brute_nsw_opt(&flat).unwrap(), brute_nsw_opt_enumerated(&flat).unwrap());
    }

    #[test]
    fn envy_freeable_enumeration() {
        let all = enumerate_envy_freeable(&bad_nsw()).unwrap();
        assert_eq!(
            all,
            vec![
                Allocation::grand_bundle(2, 2, 0),
                Allocation::new(2, vec![ItemSet(0b01), ItemSet(0b10)]).unwrap()
            ]
        );
        let same = additive(vec![vec![q(1, 2), q(1, 4)]; 2]);
        assert_eq!(enumerate_envy_freeable(&same).unwrap().len(), 4);
        let single = additive(vec![vec![q(1, 2), q(1, 4)]]);
        assert_eq!(enumerate_envy_freeable(&single).unwrap().len(), 1);
    }

    #[test]
    fn results_independent_of_worker_count() {
        let inst = additive(vec![
            vec![q(1, 2), q(1, 3), q(1, 1), q(1, 5), q(2, 3)],
            vec![q(1, 4), q(1, 1), q(1, 2), q(1, 5), q(1, 3)],
            vec![q(1, 2), q(1, 3), q(1, 1), q(1, 5), q(2, 3)],
        ]);
        let run = |k| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .unwrap()
                .install(|| {
                    (
                        brute_nsw_opt(&inst).unwrap(),
                        brute_sw_opt_enumerated(&inst).unwrap(),
                        enumerate_envy_freeable(&inst).unwrap(),
                    )
                })
        };
        assert_eq!(run(1), run(4));
    }
}
