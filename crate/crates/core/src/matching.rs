//! Exact maximum-weight assignment and the two matching-based allocation
//! subroutines: bundle reassignment and iterated item matching.

use crate::model::{Allocation, Instance, ItemSet};
use crate::scalar::{sum, Scalar};

/// Rows are agents; columns are bundles or items.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<T>>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn new(data: Vec<Vec<T>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        assert!(data.iter().all(|r| r.len() == cols), "ragged weight matrix");
        WeightMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i][j]
    }

    /// Square copy padded with zero rows/columns.
    pub fn padded(&self) -> WeightMatrix<T> {
        let k = self.rows.max(self.cols);
        let data = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i < self.rows && j < self.cols {
                            self.data[i][j].clone()
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        WeightMatrix { rows: k, cols: k, data }
    }
}

/// A permutation `perm` (row `i` takes column `perm[i]`) and its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<T> {
    pub perm: Vec<usize>,
    pub weight: T,
}

/// Maximum-weight perfect matching of a square matrix. Among optimal
/// permutations the lexicographically smallest is returned.
pub fn max_weight_assignment<T: Scalar>(w: &WeightMatrix<T>) -> Assignment<T> {
    assert_eq!(w.rows, w.cols, "assignment needs a square matrix");
    let n = w.rows;
    if n == 0 {
        return Assignment {
            perm: vec![],
            weight: T::zero(),
        };
    }
    let (u, v) = hungarian_duals(w);
    // An assignment is optimal iff it only uses edges tight under optimal duals.
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (u[i].clone() + v[j].clone()).approx_eq(&(T::zero() - w.data[i][j].clone())))
                .collect()
        })
        .collect();
    let perm = lex_min_perfect_matching(&tight).expect("tight subgraph has a perfect matching");
    let weight = sum((0..n).map(|i| w.data[i][perm[i]].clone()));
    Assignment { perm, weight }
}

/// Dual potentials of the min-cost problem with cost `−w`:
/// `u_i + v_j ≤ −w_ij`, with equality along some optimal assignment.
fn hungarian_duals<T: Scalar>(w: &WeightMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = w.rows;
    let cost = |i: usize, j: usize| T::zero() - w.data[i - 1][j - 1].clone();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<T>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<T> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0].clone() - v[j].clone();
                if minv[j].as_ref().map_or(true, |m| m.gt_strict(&cur)) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().unwrap();
                if delta.as_ref().map_or(true, |d| d.gt_strict(mj)) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else if let Some(m) = minv[j].as_mut() {
                    *m = m.clone() - delta.clone();
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (u[1..].to_vec(), v[1..].to_vec())
}

/// Fix rows in order, each to its smallest column that still admits a
/// perfect matching of the remaining rows.
fn lex_min_perfect_matching(allowed: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = allowed.len();
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for i in 0..n {
        let mut chosen = None;
        for j in 0..n {
            if !allowed[i][j] || taken[j] {
                continue;
            }
            taken[j] = true;
            if completes(allowed, i + 1, &taken) {
                chosen = Some(j);
                break;
            }
            taken[j] = false;
        }
        perm[i] = chosen?;
    }
    Some(perm)
}

/// Whether rows `from..n` can be matched into the untaken columns (Kuhn).
fn completes(allowed: &[Vec<bool>], from: usize, taken: &[bool]) -> bool {
    let n = allowed.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        allowed: &[Vec<bool>],
        taken: &[bool],
        row: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..allowed.len() {
            if !allowed[row][j] || taken[j] || seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].map_or(true, |r| augment(allowed, taken, r, seen, owner)) {
                owner[j] = Some(row);
                return true;
            }
        }
        false
    }
    (from..n).all(|row| {
        let mut seen = vec![false; n];
        augment(allowed, taken, row, &mut seen, &mut owner)
    })
}

/// The bundle permutation of `base` maximizing `Σ_i v_i(assigned bundle)`;
/// agent `i` receives `base`'s bundle `perm[i]`.
pub fn reassign_bundles<T: Scalar>(inst: &Instance<T>, base: &Allocation) -> (Allocation, Vec<usize>) {
    let w = WeightMatrix::new(
        (0..inst.agents())
            .map(|i| base.bundles().iter().map(|&b| inst.value(i, b)).collect())
            .collect(),
    );
    let a = max_weight_assignment(&w);
    (base.permuted(&a.perm), a.perm)
}

/// Allocate `items` on top of `start`, one item per agent per round, each
/// round a maximum-weight matching on marginal values.
pub fn iterated_matching<T: Scalar>(inst: &Instance<T>, items: ItemSet, start: &Allocation) -> Allocation {
    debug_assert!(items.is_disjoint(start.allocated()));
    let n = inst.agents();
    let mut alloc = start.clone();
    let mut remaining = items;
    while !remaining.is_empty() && n > 0 {
        let goods: Vec<usize> = remaining.iter().collect();
        let w = WeightMatrix::new(
            (0..n)
                .map(|i| {
                    let bundle = alloc.bundle(i);
                    goods.iter().map(|&g| inst.marginal(i, bundle, g)).collect()
                })
                .collect(),
        );
        let a = max_weight_assignment(&w.padded());
        for (i, &col) in a.perm.iter().enumerate().take(n) {
            if col < goods.len() {
                alloc.give(i, goods[col]);
                remaining = remaining.without(goods[col]);
            }
        }
    }
    alloc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Valuation, ValuationClass};
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn brute(w: &WeightMatrix<Rational>) -> (Vec<usize>, Rational) {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = vec![];
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut p2 = p.clone();
                    p2.insert(pos, k - 1);
                    out.push(p2);
                }
            }
            out.sort();
            out
        }
        let mut best: Option<(Vec<usize>, Rational)> = None;
        for p in perms(w.rows()) {
            let t = sum((0..w.rows()).map(|i| w.get(i, p[i]).clone()));
            if best.as_ref().map_or(true, |(_, b)| t > *b) {
                best = Some((p, t));
            }
        }
        best.unwrap()
    }

    #[test]
    fn assignment_examples() {
        let id = WeightMatrix::new(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]);
        assert_eq!(max_weight_assignment(&id), Assignment { perm: vec![0, 1], weight: q(2, 1) });
        let ex = WeightMatrix::new(vec![vec![q(1, 2), q(1, 1)], vec![q(1, 100), q(1, 2)]]);
        assert_eq!(max_weight_assignment(&ex), Assignment { perm: vec![1, 0], weight: q(101, 100) });
        let flat = WeightMatrix::new(vec![vec![q(3, 7); 4]; 4]);
        assert_eq!(max_weight_assignment(&flat).perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn float_assignment() {
        let w = WeightMatrix::new(vec![vec![0.5, 1.0], vec![0.01, 0.5]]);
        assert_eq!(max_weight_assignment(&w).perm, vec![1, 0]);
    }

    proptest! {
        #[test]
        fn hungarian_matches_enumeration(n in 1usize..6, cells in prop::collection::vec(-4i64..5, 36)) {
            let w = WeightMatrix::new(
                (0..n).map(|i| (0..n).map(|j| q(cells[i * 6 + j], 3)).collect()).collect(),
            );
            let (perm, weight) = brute(&w);
            let a = max_weight_assignment(&w);
            prop_assert_eq!(a.weight, weight);
            prop_assert_eq!(a.perm, perm);
        }
    }

    fn additive(rows: Vec<Vec<Rational>>) -> Instance<Rational> {
        let m = rows[0].len();
        Instance::new(m, ValuationClass::Additive, rows.into_iter().map(Valuation::Additive).collect())
            .unwrap()
    }

    #[test]
    fn reassign_examples() {
        let inst = additive(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 100)]]);
        let nsw = Allocation::new(2, vec![ItemSet(0b10), ItemSet(0b01)]).unwrap();
        let (a, perm) = reassign_bundles(&inst, &nsw);
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(a.bundles(), &[ItemSet(0b01), ItemSet(0b10)]);
        let (b, _) = reassign_bundles(&inst, &a);
        assert_eq!(b, a);
        let same = additive(vec![vec![q(1, 3), q(1, 3), q(1, 3)]; 3]);
        let base = Allocation::new(3, vec![ItemSet(0b011), ItemSet(0), ItemSet(0b100)]).unwrap();
        assert_eq!(reassign_bundles(&same, &base).0, base);
    }

    #[test]
    fn iterated_matching_examples() {
        let inst = additive(vec![
            vec![q(1, 1), q(9, 10), q(1, 10), q(1, 10)],
            vec![q(1, 5), q(1, 5), q(4, 5), q(7, 10)],
        ]);
        let start = Allocation::partial(4, vec![ItemSet(0b0001), ItemSet(0b0100)]).unwrap();
        let a = iterated_matching(&inst, ItemSet(0b1010), &start);
        assert_eq!(a.bundles(), &[ItemSet(0b0011), ItemSet(0b1100)]);
        assert_eq!(iterated_matching(&inst, ItemSet::EMPTY, &start), start);

        let single = additive(vec![vec![q(1, 4), q(1, 2), q(1, 8)]]);
        let a = iterated_matching(&single, ItemSet::full(3), &Allocation::empty(1, 3));
        assert_eq!(a.bundles(), &[ItemSet::full(3)]);
    }
}
