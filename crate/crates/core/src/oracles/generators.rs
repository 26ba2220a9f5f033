//! Instance families: small hand constructions with known answers, and seeded
//! random instances per valuation class.

use num_integer::Roots;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, ItemSet, Valuation, ValuationClass, MAX_TABLE_ITEMS};
use crate::scalar::{Rational, Scalar};
use crate::surd::Surd;

fn q<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(n, d)
}

fn check_eps(eps: &Rational) -> Result<()> {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if *eps <= zero || *eps >= one {
        return Err(Error::Precondition(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Two agents, two items: `v_1 = (1, 1/2)`, `v_2 = (1/2, ε)`.
pub fn gen_bad_nsw<T: Scalar>(eps: &Rational) -> Result<Instance<T>> {
    check_eps(eps)?;
    Instance::new(
        2,
        ValuationClass::Additive,
        vec![
            Valuation::Additive(vec![q(1, 1), q(1, 2)]),
            Valuation::Additive(vec![q(1, 2), T::from_rational(eps)]),
        ],
    )
}

/// `n` agents and `n` items; agent `i` values only item `i`, at 1.
pub fn gen_tightness<T: Scalar>(n: usize) -> Result<Instance<T>> {
    if n == 0 {
        return Err(Error::Precondition("need at least one agent".into()));
    }
    let rows = (0..n)
        .map(|i| Valuation::Additive((0..n).map(|j| q((i == j) as i64, 1)).collect()))
        .collect();
    Instance::new(n, ValuationClass::Additive, rows)
}

/// The first `n − 1` agents value every item at `ε`, the last at 1.
pub fn gen_imposs<T: Scalar>(n: usize, m: usize, eps: &Rational) -> Result<Instance<T>> {
    check_eps(eps)?;
    if n < 2 {
        return Err(Error::Precondition("need at least two agents".into()));
    }
    let low = T::from_rational(eps);
    let mut rows: Vec<Valuation<T>> = (0..n - 1).map(|_| Valuation::Additive(vec![low.clone(); m])).collect();
    rows.push(Valuation::Additive(vec![T::one(); m]));
    Instance::new(m, ValuationClass::Additive, rows)
}

/// Constant-sum instance with `r = √n` high agents and `n − r` low agents.
/// Items split into `r` consecutive blocks of `m / r`; high agent `ℓ` values
/// block `ℓ` at 1 per item and nothing else, low agents value every item at
/// `1/r`. Every agent values the grand bundle at `m / r`.
pub fn gen_constant_sum<T: Scalar>(n: usize, m: usize) -> Result<Instance<T>> {
    let r = n.sqrt();
    if n == 0 || r * r != n {
        return Err(Error::Precondition("sqrt(n) must be integral".into()));
    }
    if m % r != 0 {
        return Err(Error::Precondition(format!("m must be divisible by sqrt(n) = {r}")));
    }
    let block = m / r;
    let mut rows = Vec::with_capacity(n);
    for l in 0..r {
        rows.push(Valuation::Additive(
            (0..m).map(|g| q((g / block == l) as i64, 1)).collect(),
        ));
    }
    for _ in r..n {
        rows.push(Valuation::Additive(vec![q(1, r as i64); m]));
    }
    Instance::new(m, ValuationClass::Additive, rows)
}

/// Two agents: `v_1(S) = |S|` and `v_2(S) = √|S|`.
pub fn gen_sqrt(m: usize) -> Result<Instance<Surd>> {
    if m > MAX_TABLE_ITEMS.max(63) {
        return Err(Error::TooLarge(format!("at most 63 items, got {m}")));
    }
    Instance::new(
        m,
        ValuationClass::Subadditive,
        vec![
            Valuation::Additive(vec![q(1, 1); m]),
            Valuation::SqrtCardinality { scale: q(1, 1) },
        ],
    )
}

/// Seeded random instance of the given class.
///
/// * additive: values `k/64`, `k ∈ {0, …, 64}`.
/// * monotone: `v(S) = max_g v(S∖{g}) + k/64`, then normalized.
/// * subadditive: max of one to three additive clauses, optionally capped, normalized.
/// * matroid rank: rank function of a random partition matroid, optionally truncated.
pub fn gen_random<T: Scalar>(n: usize, m: usize, class: ValuationClass, seed: u64) -> Result<Instance<T>> {
    if n == 0 {
        return Err(Error::Precondition("need at least one agent".into()));
    }
    if class != ValuationClass::Additive && m > MAX_TABLE_ITEMS {
        return Err(Error::TooLarge(format!(
            "table valuations support at most {MAX_TABLE_ITEMS} items"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let valuations: Vec<Valuation<T>> = (0..n)
        .map(|_| match class {
            ValuationClass::Additive => {
                Valuation::Additive((0..m).map(|_| q(rng.gen_range(0..=64), 64)).collect())
            }
            ValuationClass::Monotone => Valuation::Table(normalize(random_monotone(m, &mut rng))),
            ValuationClass::Subadditive => Valuation::Table(normalize(random_xos(m, &mut rng))),
            ValuationClass::MatroidRank => Valuation::Table(random_partition_rank(m, &mut rng)),
        })
        .collect();
    Instance::new(m, class, valuations)
}

fn random_monotone<T: Scalar>(m: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut table: Vec<T> = vec![T::zero(); 1 << m];
    for mask in 1usize..(1 << m) {
        let s = ItemSet(mask as u64);
        let base = s
            .iter()
            .map(|g| table[s.without(g).bits() as usize].clone())
            .fold(T::zero(), |a, b| if b > a { b } else { a });
        table[mask] = base + q(rng.gen_range(0..=64), 64);
    }
    table
}

fn random_xos<T: Scalar>(m: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let clauses: Vec<Vec<T>> = (0..rng.gen_range(1..=3))
        .map(|_| (0..m).map(|_| q(rng.gen_range(0..=64), 64)).collect())
        .collect();
    let cap: Option<T> = rng.gen_bool(0.5).then(|| q(rng.gen_range(16..=128), 64));
    (0..1u64 << m)
        .map(|mask| {
            let s = ItemSet(mask);
            let best = clauses
                .iter()
                .map(|c| s.iter().fold(T::zero(), |a, g| a + c[g].clone()))
                .fold(T::zero(), |a, b| if b > a { b } else { a });
            match &cap {
                Some(c) if best > *c => c.clone(),
                _ => best,
            }
        })
        .collect()
}

fn random_partition_rank<T: Scalar>(m: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let groups = rng.gen_range(1..=m.max(1));
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let part: Vec<usize> = (0..m).map(|_| rng.gen_range(0..groups)).collect();
    let caps: Vec<usize> = (0..groups).map(|_| rng.gen_range(1..=3)).collect();
    let truncate = rng.gen_bool(0.3).then(|| rng.gen_range(1..=m.max(1)));
    (0..1u64 << m)
        .map(|mask| {
            let mut count = vec![0usize; groups];
            for g in ItemSet(mask).iter() {
                count[part[order[g]]] += 1;
            }
            let rank: usize = count.iter().zip(&caps).map(|(c, k)| (*c).min(*k)).sum();
            let rank = truncate.map_or(rank, |t| rank.min(t));
            q(rank as i64, 1)
        })
        .collect()
}

/// Scale a monotone table so its largest single-item marginal is 1.
fn normalize<T: Scalar>(table: Vec<T>) -> Vec<T> {
    let mut mu = T::zero();
    for mask in 0..table.len() {
        let mut rest = !mask & (table.len() - 1);
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            let d = table[mask | bit].clone() - table[mask].clone();
            if d > mu {
                mu = d;
            }
        }
    }
    if !mu.is_positive_strict() {
        return table;
    }
    table.into_iter().map(|x| x / mu.clone()).collect()
}
