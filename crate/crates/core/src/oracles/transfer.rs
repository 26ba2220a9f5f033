//! Minimum total transfer `Σ|t_i|` over zero-sum payments that make a fixed
//! allocation envy-free, and its minimum over welfare-constrained allocations.

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::{brute_nsw_opt, brute_sw_opt, decode, NashKey, ValueCache};
use super::lp::{minimize, Constraint, LpOutcome, Relation};
use crate::envy::{EnvyGraph, PositiveCycle};
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance, ItemSet, PaymentVector};
use crate::scalar::{max_of, sum, ExactScalar, Rational};

/// Vertex enumeration is used up to this many agents, the simplex beyond.
pub const VERTEX_AGENTS: usize = 6;

/// Search-tree nodes [`min_transfer_at_welfare`] may visit.
pub const SEARCH_NODE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TransferOptimum<T> {
    pub transfers: PaymentVector<T>,
    pub total: T,
}

/// Exact minimizer of `Σ|t_i|` subject to `t_i − t_j ≥ w(i,j)` and `Σt = 0`.
pub fn min_total_transfer<T: ExactScalar>(inst: &Instance<T>, alloc: &Allocation) -> Result<TransferOptimum<T>> {
    min_total_transfer_for(&EnvyGraph::build(inst, alloc))
}

pub fn min_total_transfer_for<T: ExactScalar>(g: &EnvyGraph<T>) -> Result<TransferOptimum<T>> {
    let l = g.longest_paths().map_err(cycle_error)?;
    let (t, total) = if g.agents() <= VERTEX_AGENTS {
        transfer_lp_vertices(g)
    } else {
        transfer_lp_simplex(g)
    };
    let (lower, upper) = transfer_bounds(&l);
    if total < lower || total > upper {
        return Err(Error::GuaranteeViolated(format!(
            "transfer LP value {total} outside [{lower}, {upper}]"
        )));
    }
    Ok(TransferOptimum {
        transfers: PaymentVector::transfer(t)?,
        total,
    })
}

fn cycle_error<T: ExactScalar>(c: PositiveCycle<T>) -> Error {
    Error::NotEnvyFreeable {
        cycle: c.agents,
        weight: c.weight.to_string(),
    }
}

/// Bounds on the optimum from the minimal subsidies `l`: every feasible `t`
/// has `Σ|t| ≥ t_i − t_k ≥ l_i`, and the natural transfers `l − mean(l)` are
/// feasible.
pub fn transfer_bounds<T: ExactScalar>(l: &[T]) -> (T, T) {
    let n = l.len();
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let lower = l.iter().cloned().fold(T::zero(), |a, b| if b > a { b } else { a });
    let mean = sum(l.iter().cloned()) / T::from_int(n as i64);
    let upper = sum(l.iter().map(|x| (x.clone() - mean.clone()).abs_val()));
    (lower, upper)
}

fn is_feasible<T: ExactScalar>(g: &EnvyGraph<T>, t: &[T]) -> bool {
    let n = g.agents();
    (0..n).all(|i| (0..n).all(|j| i == j || t[i].clone() - t[j].clone() >= *g.weight(i, j)))
}

/// Enumerates the candidate vertices of the piecewise-linear program: every
/// choice of `n − 1` independent tight constraints among `t_i − t_j = w(i,j)`
/// and `t_i = 0`, together with `Σt = 0`. Independent choices are exactly
/// forests on the agents plus a zero node with two components.
pub fn transfer_lp_vertices<T: ExactScalar>(g: &EnvyGraph<T>) -> (Vec<T>, T) {
    let n = g.agents();
    if n <= 1 {
        return (vec![T::zero(); n], T::zero());
    }
    // Edges: (i, j) with t_i = t_j + w(i,j); node n stands for the constant 0.
    let mut edges: Vec<(usize, usize, T)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                edges.push((i, j, g.weight(i, j).clone()));
            }
        }
        edges.push((i, n, T::zero()));
    }
    let mut best: Option<(Vec<T>, T)> = None;
    let mut chosen: Vec<usize> = Vec::with_capacity(n - 1);
    let mut comp: Vec<usize> = (0..=n).collect();
    forest_search(g, &edges, 0, &mut chosen, &mut comp, &mut best);
    best.expect("a feasible program has a vertex")
}

fn forest_search<T: ExactScalar>(
    g: &EnvyGraph<T>,
    edges: &[(usize, usize, T)],
    from: usize,
    chosen: &mut Vec<usize>,
    comp: &mut Vec<usize>,
    best: &mut Option<(Vec<T>, T)>,
) {
    let n = g.agents();
    if chosen.len() == n - 1 {
        let t = solve_forest(n, edges, chosen);
        if is_feasible(g, &t) {
            let total = sum(t.iter().map(|x| x.abs_val()));
            if best.as_ref().map_or(true, |(_, b)| total < *b) {
                *best = Some((t, total));
            }
        }
        return;
    }
    let need = n - 1 - chosen.len();
    for e in from..edges.len() {
        if edges.len() - e < need {
            break;
        }
        let (a, b) = (comp[edges[e].0], comp[edges[e].1]);
        if a == b {
            continue;
        }
        let saved = comp.clone();
        for c in comp.iter_mut() {
            if *c == b {
                *c = a;
            }
        }
        chosen.push(e);
        forest_search(g, edges, e + 1, chosen, comp, best);
        chosen.pop();
        *comp = saved;
    }
}

/// Values forced by a two-component forest plus `Σt = 0`.
fn solve_forest<T: ExactScalar>(n: usize, edges: &[(usize, usize, T)], chosen: &[usize]) -> Vec<T> {
    let mut adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n + 1];
    for &e in chosen {
        let (i, j, ref w) = edges[e];
        // t_i = t_j + w
        adj[j].push((i, w.clone()));
        adj[i].push((j, T::zero() - w.clone()));
    }
    let mut val: Vec<Option<T>> = vec![None; n + 1];
    let spread = |root: usize, val: &mut Vec<Option<T>>| {
        val[root] = Some(T::zero());
        let mut stack = vec![root];
        let mut members = vec![];
        while let Some(u) = stack.pop() {
            members.push(u);
            for (v, w) in &adj[u] {
                if val[*v].is_none() {
                    val[*v] = Some(val[u].clone().unwrap() + w.clone());
                    stack.push(*v);
                }
            }
        }
        members
    };
    let anchored = spread(n, &mut val);
    let root = (0..n).find(|&i| val[i].is_none()).expect("two components");
    let free = spread(root, &mut val);
    let fixed_sum = sum(anchored.iter().filter(|&&u| u < n).map(|&u| val[u].clone().unwrap()));
    let free_sum = sum(free.iter().map(|&u| val[u].clone().unwrap()));
    let shift = (T::zero() - fixed_sum - free_sum) / T::from_int(free.len() as i64);
    for &u in &free {
        val[u] = Some(val[u].clone().unwrap() + shift.clone());
    }
    val.into_iter().take(n).map(Option::unwrap).collect()
}

/// The same program as a simplex over `t = p − q`, `p, q ≥ 0`, minimizing `Σ(p + q)`.
pub fn transfer_lp_simplex<T: ExactScalar>(g: &EnvyGraph<T>) -> (Vec<T>, T) {
    let n = g.agents();
    let minus_one = T::zero() - T::one();
    let mut constraints = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut coeffs = vec![T::zero(); 2 * n];
            coeffs[i] = T::one();
            coeffs[n + i] = minus_one.clone();
            coeffs[j] = minus_one.clone();
            coeffs[n + j] = T::one();
            constraints.push(Constraint {
                coeffs,
                relation: Relation::Ge,
                rhs: g.weight(i, j).clone(),
            });
        }
    }
    let mut coeffs = vec![T::one(); n];
    coeffs.extend(vec![minus_one; n]);
    constraints.push(Constraint {
        coeffs,
        relation: Relation::Eq,
        rhs: T::zero(),
    });
    match minimize(&vec![T::one(); 2 * n], &constraints) {
        LpOutcome::Optimal { x, value } => {
            let t = (0..n).map(|i| x[i].clone() - x[n + i].clone()).collect();
            (t, value)
        }
        other => panic!("transfer program of an envy-freeable allocation is {other:?}"),
    }
}

/// Which welfare a guarantee `welfare(A) ≥ α · welfare(A*)` refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareKind {
    /// Utilitarian: sum of values.
    Sw,
    /// Nash: geometric mean of values, compared as `Π ≥ α^n · Π*`.
    Nsw,
}

impl FromStr for WelfareKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sw" => Ok(WelfareKind::Sw),
            "nsw" => Ok(WelfareKind::Nsw),
            other => Err(Error::Parse(format!("unknown welfare {other:?} (expected sw or nsw)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WelfareTransfer<T> {
    pub allocation: Allocation,
    pub transfers: PaymentVector<T>,
    pub total: T,
}

/// The least total transfer over envy-freeable allocations whose welfare
/// (before transfers) is at least `α` times optimal; `None` when no
/// allocation qualifies. Lexicographically first minimizer.
///
/// Branch and bound over item assignments: a partial assignment is cut when
/// even handing every remaining item to every agent misses the threshold.
/// For subadditive utilitarian welfare the cut also uses the sum over the
/// remaining items of their best singleton value.
pub fn min_transfer_at_welfare<T: ExactScalar>(
    inst: &Instance<T>,
    alpha: &Rational,
    welfare: WelfareKind,
) -> Result<Option<WelfareTransfer<T>>> {
    let (n, m) = (inst.agents(), inst.items());
    let a = T::from_rational(alpha);
    let threshold = match welfare {
        WelfareKind::Sw => {
            let opt = brute_sw_opt(inst)?;
            a * crate::model::social_welfare(inst, &opt, None)
        }
        WelfareKind::Nsw => {
            let opt = brute_nsw_opt(inst)?;
            let u = crate::model::utilities(inst, &opt, None);
            let power = (0..n).fold(T::one(), |acc, _| acc * a.clone());
            power * NashKey::of(&u).nash_product(n)
        }
    };
    let cache = ValueCache::new(inst);
    let singleton_suffix = (welfare == WelfareKind::Sw && inst.class().is_subadditive()).then(|| {
        let mut suffix = vec![T::zero(); m + 1];
        for g in (0..m).rev() {
            let best = max_of((0..n).map(|i| cache.value(i, ItemSet::singleton(g)))).unwrap_or_else(T::zero);
            suffix[g] = suffix[g + 1].clone() + best;
        }
        suffix
    });
    let search = Search {
        cache,
        welfare,
        threshold,
        singleton_suffix,
        nodes: AtomicU64::new(0),
    };
    let depth = (0..=m).find(|&d| (n as u64).saturating_pow(d as u32) >= 64).unwrap_or(m);
    let prefixes = (n as u64).pow(depth as u32);
    let results: Vec<Option<(T, u64, Vec<T>)>> = (0..prefixes)
        .into_par_iter()
        .map(|p| {
            let mut bundles = vec![ItemSet::EMPTY; n];
            let head = decode(p, n, depth);
            for (i, b) in head.iter().enumerate() {
                bundles[i] = *b;
            }
            let mut best = None;
            search.dfs(&mut bundles, depth, p, &mut best)?;
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let best = results.into_iter().flatten().fold(None, |acc: Option<(T, u64, Vec<T>)>, r| match acc {
        Some(b) if b.0 < r.0 || (b.0 == r.0 && b.1 <= r.1) => Some(b),
        _ => Some(r),
    });
    Ok(match best {
        Some((total, code, t)) => Some(WelfareTransfer {
            allocation: Allocation::new(m, decode(code, n, m))?,
            transfers: PaymentVector::transfer(t)?,
            total,
        }),
        None => None,
    })
}

struct Search<'a, T> {
    cache: ValueCache<'a, T>,
    welfare: WelfareKind,
    threshold: T,
    /// `Σ_{g ≥ k} max_i v_i({g})` for each `k`.
    singleton_suffix: Option<Vec<T>>,
    nodes: AtomicU64,
}

impl<T: ExactScalar> Search<'_, T> {
    fn welfare_of(&self, bundles: &[ItemSet], extra: ItemSet) -> T {
        let vals = bundles.iter().enumerate().map(|(i, &b)| self.cache.value(i, b.union(extra)));
        match self.welfare {
            WelfareKind::Sw => sum(vals),
            WelfareKind::Nsw => vals.fold(T::one(), |a, b| a * b),
        }
    }

    fn dfs(
        &self,
        bundles: &mut Vec<ItemSet>,
        next: usize,
        code: u64,
        best: &mut Option<(T, u64, Vec<T>)>,
    ) -> Result<()> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= SEARCH_NODE_BUDGET {
            return Err(Error::TooLarge(format!(
                "welfare-constrained search exceeded {SEARCH_NODE_BUDGET} nodes"
            )));
        }
        let (n, m) = (bundles.len(), self.cache.instance().items());
        let rest = ItemSet::full(m).minus(ItemSet::full(next));
        if let Some(suffix) = &self.singleton_suffix {
            if self.welfare_of(bundles, ItemSet::EMPTY) + suffix[next].clone() < self.threshold {
                return Ok(());
            }
        }
        if self.welfare_of(bundles, rest) < self.threshold {
            return Ok(());
        }
        if next == m {
            let Ok(l) = self.cache.longest_paths(bundles) else {
                return Ok(());
            };
            let (lower, _) = transfer_bounds(&l);
            if best.as_ref().is_some_and(|(b, _, _)| lower >= *b) {
                return Ok(());
            }
            let opt = min_total_transfer_for(&self.cache.envy_graph(bundles))?;
            if best.as_ref().map_or(true, |(b, _, _)| opt.total < *b) {
                *best = Some((opt.total, code, opt.transfers.values().to_vec()));
            }
            return Ok(());
        }
        for a in 0..n {
            bundles[a] = bundles[a].with(next);
            let r = self.dfs(bundles, next + 1, code * n as u64 + a as u64, best);
            bundles[a] = bundles[a].without(next);
            r?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Valuation, ValuationClass};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn additive(rows: Vec<Vec<Rational>>) -> Instance<Rational> {
        let m = rows[0].len();
        Instance::new(m, ValuationClass::Additive, rows.into_iter().map(Valuation::Additive).collect())
            .unwrap()
    }

    fn tightness(n: usize) -> Instance<Rational> {
        additive(
            (0..n)
                .map(|i| (0..n).map(|j| q((i == j) as i64, 1)).collect())
                .collect(),
        )
    }

    #[test]
    fn transfer_examples() {
        let inst = tightness(3);
        let diag = Allocation::new(3, vec![ItemSet(1), ItemSet(2), ItemSet(4)]).unwrap();
        assert_eq!(min_total_transfer(&inst, &diag).unwrap().total, q(0, 1));
        let grand = Allocation::grand_bundle(3, 3, 0);
        let opt = min_total_transfer(&inst, &grand).unwrap();
        assert_eq!(opt.total, q(4, 3));
        assert_eq!(transfer_lp_simplex(&EnvyGraph::build(&inst, &grand)).1, q(4, 3));

        let bad = additive(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 100)]]);
        let split = Allocation::new(2, vec![ItemSet(1), ItemSet(2)]).unwrap();
        assert_eq!(min_total_transfer(&bad, &split).unwrap().total, q(49, 100));
        let swap = Allocation::new(2, vec![ItemSet(2), ItemSet(1)]).unwrap();
        assert!(matches!(min_total_transfer(&bad, &swap), Err(Error::NotEnvyFreeable { .. })));
    }

    #[test]
    fn natural_transfers_can_be_beaten() {
        // Agent 1 envies agent 0 by 1; agent 2 is content. l = (0, 1, 0) gives
        // natural total 4/3, but t = (−1/2, 1/2, 0) costs 1.
        let inst = additive(vec![
            vec![q(1, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1)],
        ]);
        let a = Allocation::new(2, vec![ItemSet(1), ItemSet(0), ItemSet(2)]).unwrap();
        let opt = min_total_transfer(&inst, &a).unwrap();
        assert_eq!(opt.total, q(1, 1));
        let l = EnvyGraph::build(&inst, &a).longest_paths().unwrap();
        assert_eq!(transfer_bounds(&l).1, q(4, 3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn vertices_agree_with_simplex(n in 2usize..5, m in 1usize..5, cells in prop::collection::vec(0i64..9, 20), code in 0u64..1024) {
            let rows = (0..n).map(|i| (0..m).map(|g| q(cells[i * 5 + g], 8)).collect()).collect();
            let inst = additive(rows);
            let count = (n as u64).pow(m as u32);
            let a = Allocation::new(m, decode(code % count, n, m)).unwrap();
            let g = EnvyGraph::build(&inst, &a);
            if let Ok(l) = g.longest_paths() {
                let (tv, v) = transfer_lp_vertices(&g);
                let (ts, s) = transfer_lp_simplex(&g);
                prop_assert_eq!(&v, &s);
                prop_assert!(is_feasible(&g, &tv) && is_feasible(&g, &ts));
                let (lo, hi) = transfer_bounds(&l);
                prop_assert!(lo <= v && v <= hi);
            }
        }
    }

    #[test]
    fn welfare_constrained_minimum() {
        let bad = additive(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 100)]]);
        // The grand bundle is optimal and envy-freeable with transfers 51/100.
        let r = min_transfer_at_welfare(&bad, &q(1, 1), WelfareKind::Sw).unwrap().unwrap();
        assert_eq!(r.allocation, Allocation::grand_bundle(2, 2, 0));
        assert_eq!(r.total, q(51, 100));
        // Relaxing α admits ({a},{b}) with transfer 49/100.
        let r = min_transfer_at_welfare(&bad, &q(1, 2), WelfareKind::Sw).unwrap().unwrap();
        assert_eq!(r.total, q(49, 100));
        let diag = tightness(3);
        let r = min_transfer_at_welfare(&diag, &q(1, 1), WelfareKind::Sw).unwrap().unwrap();
        assert_eq!(r.total, q(0, 1));
        let r = min_transfer_at_welfare(&diag, &q(1, 1), WelfareKind::Nsw).unwrap().unwrap();
        assert_eq!(r.total, q(0, 1));
        // No envy-freeable allocation reaches the swap's Nash welfare.
        assert_eq!(min_transfer_at_welfare(&bad, &q(1, 1), WelfareKind::Nsw).unwrap(), None);
    }
}
