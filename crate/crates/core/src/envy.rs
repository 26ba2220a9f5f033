//! Envy graphs and envy-freeability.
//!
//! For an allocation `A` the envy graph is the complete digraph on agents with
//! arc weight `w(i, j) = v_i(A_j) − v_i(A_i)`. `A` can be made envy-free by
//! payments iff this graph has no positive-weight cycle, and then the
//! componentwise-minimal subsidies are the longest-path weights `l(i)` (the
//! empty path counts, so `l(i) ≥ 0`).

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance, ItemSet, PaymentVector};
use crate::scalar::{sum, Scalar};

/// Factorial enumeration limit for [`is_envy_freeable_by_permutation`].
pub const MAX_PERMUTATION_AGENTS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct EnvyGraph<T> {
    alloc: Allocation,
    weights: Vec<Vec<T>>,
}

impl<T: Scalar> EnvyGraph<T> {
    pub fn build(inst: &Instance<T>, alloc: &Allocation) -> Self {
        let values = value_matrix(inst, alloc);
        let weights = values
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|v| v.clone() - row[i].clone()).collect())
            .collect();
        EnvyGraph {
            alloc: alloc.clone(),
            weights,
        }
    }

    /// Graph with explicit weights (diagonal must be zero).
    pub fn from_weights(alloc: Allocation, weights: Vec<Vec<T>>) -> Self {
        EnvyGraph { alloc, weights }
    }

    pub fn agents(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> &T {
        &self.weights[i][j]
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn allocation(&self) -> &Allocation {
        &self.alloc
    }

    pub fn cycle_weight(&self, cycle: &[usize]) -> T {
        let k = cycle.len();
        sum((0..k).map(|t| self.weights[cycle[t]][cycle[(t + 1) % k]].clone()))
    }

    /// Longest-path weights from every agent, or a positive cycle.
    ///
    /// Runs `n` rounds of exact relaxation `l(i) ← max(l(i), w(i,j) + l(j))`
    /// starting from `l ≡ 0`; if round `n + 1` still improves some entry the
    /// successor pointers are walked back onto a cycle, which is then
    /// necessarily of positive weight.
    pub fn longest_paths(&self) -> std::result::Result<Vec<T>, PositiveCycle<T>> {
        let n = self.agents();
        let mut dist = vec![T::zero(); n];
        let mut succ: Vec<Option<usize>> = vec![None; n];
        for _ in 0..n {
            if !self.relax_round(&mut dist, &mut succ) {
                return Ok(dist);
            }
        }
        let mut start = None;
        for i in 0..n {
            if let Some(j) = self.improving_arc(&dist, i) {
                dist[i] = self.weights[i][j].clone() + dist[j].clone();
                succ[i] = Some(j);
                start = Some(i);
                break;
            }
        }
        let Some(start) = start else {
            return Ok(dist);
        };
        let cycle = walk_to_cycle(&succ, start, n)
            .filter(|c| self.cycle_weight(c).is_positive_strict())
            .or_else(|| self.search_positive_cycle())
            .expect("relaxation kept improving, so a positive cycle exists");
        let weight = self.cycle_weight(&cycle);
        Err(PositiveCycle {
            agents: cycle,
            weight,
        })
    }

    fn improving_arc(&self, dist: &[T], i: usize) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for j in 0..self.agents() {
            if j == i {
                continue;
            }
            let cand = self.weights[i][j].clone() + dist[j].clone();
            let beats_best = match &best {
                Some((_, b)) => cand.gt_strict(b),
                None => true,
            };
            if cand.gt_strict(&dist[i]) && beats_best {
                best = Some((j, cand));
            }
        }
        best.map(|(j, _)| j)
    }

    fn relax_round(&self, dist: &mut [T], succ: &mut [Option<usize>]) -> bool {
        let mut changed = false;
        for i in 0..self.agents() {
            if let Some(j) = self.improving_arc(dist, i) {
                dist[i] = self.weights[i][j].clone() + dist[j].clone();
                succ[i] = Some(j);
                changed = true;
            }
        }
        changed
    }

    /// Exhaustive search for a simple positive cycle, lowest start first.
    fn search_positive_cycle(&self) -> Option<Vec<usize>> {
        let n = self.agents();
        fn dfs<T: Scalar>(
            g: &EnvyGraph<T>,
            path: &mut Vec<usize>,
            acc: T,
            used: &mut [bool],
        ) -> Option<Vec<usize>> {
            let start = path[0];
            let last = *path.last().unwrap();
            if path.len() > 1 && (acc.clone() + g.weights[last][start].clone()).is_positive_strict() {
                return Some(path.clone());
            }
            for next in start + 1..g.agents() {
                if used[next] {
                    continue;
                }
                used[next] = true;
                path.push(next);
                let found = dfs(g, path, acc.clone() + g.weights[last][next].clone(), used);
                path.pop();
                used[next] = false;
                if found.is_some() {
                    return found;
                }
            }
            None
        }
        (0..n).find_map(|s| {
            let mut used = vec![false; n];
            used[s] = true;
            dfs(self, &mut vec![s], T::zero(), &mut used)
        })
    }
}

fn walk_to_cycle(succ: &[Option<usize>], start: usize, n: usize) -> Option<Vec<usize>> {
    let mut v = start;
    for _ in 0..n {
        v = succ[v]?;
    }
    let mut cycle = vec![v];
    let mut u = succ[v]?;
    while u != v {
        if cycle.len() > n {
            return None;
        }
        cycle.push(u);
        u = succ[u]?;
    }
    let lo = (0..cycle.len()).min_by_key(|&k| cycle[k]).unwrap();
    cycle.rotate_left(lo);
    Some(cycle)
}

/// A directed cycle `agents[0] → agents[1] → … → agents[0]` with positive total weight.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveCycle<T> {
    pub agents: Vec<usize>,
    pub weight: T,
}

impl<T: Scalar> PositiveCycle<T> {
    fn into_error(self) -> Error {
        Error::NotEnvyFreeable {
            cycle: self.agents,
            weight: self.weight.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvyFreeabilityWitness<T> {
    /// Longest-path weights `l(i)`; they satisfy `l(i) ≥ w(i,j) + l(j)` and `l ≥ 0`.
    Potentials(Vec<T>),
    Cycle(PositiveCycle<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvyFreeabilityCertificate<T> {
    pub verdict: bool,
    pub witness: EnvyFreeabilityWitness<T>,
}

/// `v_i(A_j)` for all agents `i` and bundles `j`.
pub fn value_matrix<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Vec<Vec<T>> {
    (0..inst.agents())
        .map(|i| alloc.bundles().iter().map(|&b| inst.value(i, b)).collect())
        .collect()
}

pub fn build_envy_graph<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> EnvyGraph<T> {
    EnvyGraph::build(inst, alloc)
}

pub fn is_envy_freeable<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
) -> EnvyFreeabilityCertificate<T> {
    match EnvyGraph::build(inst, alloc).longest_paths() {
        Ok(l) => EnvyFreeabilityCertificate {
            verdict: true,
            witness: EnvyFreeabilityWitness::Potentials(l),
        },
        Err(c) => EnvyFreeabilityCertificate {
            verdict: false,
            witness: EnvyFreeabilityWitness::Cycle(c),
        },
    }
}

/// Envy-freeability via the bundle-permutation criterion: no reassignment of
/// the bundles raises utilitarian welfare. Factorial; kept as an independent
/// check of the cycle criterion.
pub fn is_envy_freeable_by_permutation<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
) -> Result<bool> {
    let n = inst.agents();
    if n > MAX_PERMUTATION_AGENTS {
        return Err(Error::TooLarge(format!(
            "permutation check supports at most {MAX_PERMUTATION_AGENTS} agents"
        )));
    }
    let values = value_matrix(inst, alloc);
    let base = sum((0..n).map(|i| values[i][i].clone()));
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let total = sum((0..n).map(|a| values[a][perm[a]].clone()));
            if total.gt_strict(&base) {
                return Ok(false);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(true)
}

/// Minimal subsidies `s_i = l(i)` making `alloc` envy-free.
pub fn min_subsidies<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Result<PaymentVector<T>> {
    let l = EnvyGraph::build(inst, alloc)
        .longest_paths()
        .map_err(PositiveCycle::into_error)?;
    PaymentVector::subsidy(l)
}

/// `t_i = s_i − mean(s)`.
pub fn natural_transfers<T: Scalar>(s: &PaymentVector<T>) -> PaymentVector<T> {
    let n = s.len();
    if n == 0 {
        return PaymentVector::zero_transfers(0);
    }
    let mean = s.values().iter().cloned().fold(T::zero(), |a, b| a + b) / T::from_int(n as i64);
    let t = s.values().iter().map(|x| x.clone() - mean.clone()).collect();
    PaymentVector::transfer(t).expect("centered payments sum to zero")
}

/// The largest envy `v_i(A_j) + p_j − v_i(A_i) − p_i` over ordered pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvyViolation<T> {
    pub envious: usize,
    pub envied: usize,
    pub amount: T,
}

/// Checks `v_i(A_i) + p_i ≥ v_i(A_j) + p_j` for all `i ≠ j`; returns the
/// worst violation if any.
pub fn is_envy_free<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
    payments: &[T],
) -> (bool, Option<EnvyViolation<T>>) {
    let values = value_matrix(inst, alloc);
    let mut worst: Option<EnvyViolation<T>> = None;
    for i in 0..inst.agents() {
        let own = values[i][i].clone() + payments[i].clone();
        for j in 0..inst.agents() {
            if i == j {
                continue;
            }
            let other = values[i][j].clone() + payments[j].clone();
            if other.gt_strict(&own) {
                let amount = other - own.clone();
                if worst.as_ref().map_or(true, |w| amount > w.amount) {
                    worst = Some(EnvyViolation {
                        envious: i,
                        envied: j,
                        amount,
                    });
                }
            }
        }
    }
    (worst.is_none(), worst)
}

/// Envy-free up to one good: any envy disappears after removing some single
/// item from the envied bundle.
pub fn is_ef1<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> bool {
    ef1_violation(inst, alloc).is_none()
}

pub fn ef1_violation<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Option<(usize, usize)> {
    for i in 0..inst.agents() {
        let own = inst.value(i, alloc.bundle(i));
        for j in 0..inst.agents() {
            let other: ItemSet = alloc.bundle(j);
            if i == j || other.is_empty() || own.ge_loose(&inst.value(i, other)) {
                continue;
            }
            if !other.iter().any(|g| own.ge_loose(&inst.value(i, other.without(g)))) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Smallest `b ≥ 0` with `v_i(A_j) − v_i(A_i) ≤ b` for all pairs.
pub fn bounded_envy<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> T {
    worst_envy(inst, alloc).map_or_else(T::zero, |v| v.amount)
}

/// The pair realizing [`bounded_envy`], when there is positive envy.
pub fn worst_envy<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Option<EnvyViolation<T>> {
    is_envy_free(inst, alloc, &vec![T::zero(); inst.agents()]).1
}
