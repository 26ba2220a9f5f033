//! Dense two-phase simplex over an exact field, with Bland's rule.

use crate::scalar::ExactScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
}

impl<T: ExactScalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / p.clone();
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for j in 0..self.rows[i].len() {
                if !self.rows[r][j].is_zero() {
                    let d = f.clone() * self.rows[r][j].clone();
                    self.rows[i][j] = self.rows[i][j].clone() - d;
                }
            }
            self.rhs[i] = self.rhs[i].clone() - f * self.rhs[r].clone();
        }
        self.basis[r] = c;
    }

    /// Minimize `cost · x` over columns `0..cols` from the current basis.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[T], cols: usize) -> bool {
        loop {
            let reduced = |j: usize| {
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        d = d - cost[b].clone() * self.rows[i][j].clone();
                    }
                }
                d
            };
            let Some(enter) = (0..cols)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| reduced(j).is_negative_strict())
            else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive_strict() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Minimize `cost · x` subject to `constraints` and `x ≥ 0`.
pub fn minimize<T: ExactScalar>(cost: &[T], constraints: &[Constraint<T>]) -> LpOutcome<T> {
    let nvars = cost.len();
    let slack_count = constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let rows_count = constraints.len();
    let art_start = nvars + slack_count;
    let total = art_start + rows_count;

    let mut t = Tableau {
        rows: Vec::with_capacity(rows_count),
        rhs: Vec::with_capacity(rows_count),
        basis: Vec::with_capacity(rows_count),
    };
    let mut slack = nvars;
    for (i, c) in constraints.iter().enumerate() {
        let mut row = vec![T::zero(); total];
        row[..nvars].clone_from_slice(&c.coeffs);
        match c.relation {
            Relation::Le => {
                row[slack] = T::one();
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = T::zero() - T::one();
                slack += 1;
            }
            Relation::Eq => {}
        }
        let mut rhs = c.rhs.clone();
        if rhs.is_negative_strict() {
            for x in row.iter_mut() {
                *x = T::zero() - x.clone();
            }
            rhs = T::zero() - rhs;
        }
        row[art_start + i] = T::one();
        t.rows.push(row);
        t.rhs.push(rhs);
        t.basis.push(art_start + i);
    }

    // Phase 1: drive the artificial variables to zero.
    let mut phase1 = vec![T::zero(); total];
    for x in phase1.iter_mut().skip(art_start) {
        *x = T::one();
    }
    t.optimize(&phase1, total);
    let infeasibility = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&b, _)| b >= art_start)
        .fold(T::zero(), |acc, (_, v)| acc + v.clone());
    if infeasibility.is_positive_strict() {
        return LpOutcome::Infeasible;
    }
    // Pivot remaining (zero-valued) artificials out, dropping redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= art_start {
            match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                Some(c) => t.pivot(r, c),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2.
    let mut phase2 = vec![T::zero(); total];
    phase2[..nvars].clone_from_slice(cost);
    if !t.optimize(&phase2, art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); nvars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < nvars {
            x[b] = t.rhs[i].clone();
        }
    }
    let value = cost
        .iter()
        .zip(&x)
        .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    LpOutcome::Optimal { x, value }
}
