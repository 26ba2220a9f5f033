use super::{check_alpha, finish, max_own_value, two_n_squared, AlgorithmSpec, Certificate, SolveResult};
use super::bounded::envy_cycles;
use crate::error::{Error, Result};
use crate::matching::{iterated_matching, reassign_bundles};
use crate::model::{social_welfare, Allocation, Instance, ItemSet, MAX_TABLE_ITEMS};
use crate::oracles::brute_sw_opt;
use crate::scalar::{Rational, Scalar};

/// Item cap for the subset scan of [`algorithm2_general`].
pub const ALG2_MAX_ITEMS: usize = MAX_TABLE_ITEMS;

fn welfare_certificates<T: Scalar>(r: &mut SolveResult<T>, inst: &Instance<T>, opt: &Allocation, alpha: &T, bound: T) {
    r.certificates.push(Certificate::at_least(
        "sw >= alpha*sw_opt",
        &r.report.sw,
        &(alpha.clone() * social_welfare(inst, opt, None)),
    ));
    let name = if r.algorithm.name == "alg1" {
        "total_transfer <= n*(alpha*max_i v_i(A*_i) + 2)"
    } else {
        "total_transfer <= 2n^2*(3*alpha*max_i v_i(A*_i) + 2)"
    };
    r.certificates.push(Certificate::at_most(name, &r.total_transfer(), &bound));
}

/// Additive valuations, `α ∈ (0, 1]`: keep a cheapest-by-count prefix `X_i`
/// of each optimal bundle worth `α` of it, hand out the rest by iterated
/// matching. Welfare is at least `α` times optimal and
/// `Σ|t| ≤ n(α·max_i v_i(A*_i) + 2)`.
pub fn algorithm1_additive<T: Scalar>(inst: &Instance<T>, alpha: &Rational) -> Result<SolveResult<T>> {
    if !inst.is_additive() {
        return Err(Error::Unsupported(format!(
            "alg1 needs additive valuations, got {}",
            inst.class().name()
        )));
    }
    check_alpha(alpha, &Rational::from_integer(1.into()), "alg1")?;
    let (n, m) = (inst.agents(), inst.items());
    let a = T::from_rational(alpha);
    let opt = brute_sw_opt(inst)?;
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let target = a.clone() * inst.value(i, opt.bundle(i));
        let mut items: Vec<(T, usize)> = opt
            .bundle(i)
            .iter()
            .map(|g| (inst.value(i, ItemSet::singleton(g)), g))
            .collect();
        items.sort_by(|p, q| q.0.total_cmp_approx(&p.0).then(p.1.cmp(&q.1)));
        let mut xi = ItemSet::EMPTY;
        for (_, g) in items {
            if inst.value(i, xi).ge_loose(&target) {
                break;
            }
            xi = xi.with(g);
        }
        x.push(xi);
    }
    let start = Allocation::partial(m, x)?;
    let alloc = iterated_matching(inst, start.unallocated(), &start);
    let mut r = finish(
        inst,
        alloc,
        AlgorithmSpec {
            name: "alg1",
            alpha: Some(alpha.clone()),
            rho: Some(Rational::from_integer(1.into())),
        },
    )?;
    let bound = T::from_int(n as i64) * (a.clone() * max_own_value(inst, &opt) + T::from_int(2));
    welfare_certificates(&mut r, inst, &opt, &a, bound);
    Ok(r)
}

/// General monotone valuations, `α ∈ (0, 1/3]`. Agents are visited in
/// decreasing order of their optimal value; each step hands the smallest
/// piece of a single optimal bundle worth `3α` of that value (to some agent
/// still without a bundle) to the lowest-index such agent. Leftovers go out
/// by envy-cycles and the bundles are then reassigned.
pub fn algorithm2_general<T: Scalar>(inst: &Instance<T>, alpha: &Rational) -> Result<SolveResult<T>> {
    check_alpha(alpha, &Rational::new(1.into(), 3.into()), "alg2")?;
    let (n, m) = (inst.agents(), inst.items());
    if m > ALG2_MAX_ITEMS {
        return Err(Error::TooLarge(format!("alg2 supports at most {ALG2_MAX_ITEMS} items")));
    }
    let a = T::from_rational(alpha);
    let opt = brute_sw_opt(inst)?;
    let own: Vec<T> = (0..n).map(|i| inst.value(i, opt.bundle(i))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| own[j].total_cmp_approx(&own[i]).then(i.cmp(&j)));

    let mut bundles = vec![ItemSet::EMPTY; n];
    let mut served = vec![false; n];
    let mut used = ItemSet::EMPTY;
    for &agent in &order {
        let threshold = T::from_int(3) * a.clone() * own[agent].clone();
        let qualifies = |x: ItemSet| (0..n).find(|&j| !served[j] && inst.value(j, x).ge_loose(&threshold));
        let mut best: Option<(ItemSet, usize)> = None;
        for i in 0..n {
            for x in opt.bundle(i).minus(used).subsets() {
                if x.is_empty() {
                    continue;
                }
                let better = best.map_or(true, |(b, _)| (x.len(), x.bits()) < (b.len(), b.bits()));
                if !better {
                    continue;
                }
                if let Some(j) = qualifies(x) {
                    best = Some((x, j));
                }
            }
        }
        if let Some((x, j)) = best {
            bundles[j] = x;
            served[j] = true;
            used = used.union(x);
        }
    }
    let partial = Allocation::partial(m, bundles)?;
    let filled = envy_cycles(inst, partial.unallocated(), &partial)?;
    let (alloc, _) = reassign_bundles(inst, &filled);
    let mut r = finish(
        inst,
        alloc,
        AlgorithmSpec {
            name: "alg2",
            alpha: Some(alpha.clone()),
            rho: Some(Rational::from_integer(1.into())),
        },
    )?;
    let bound = two_n_squared::<T>(n) * (T::from_int(3) * a.clone() * max_own_value(inst, &opt) + T::from_int(2));
    welfare_certificates(&mut r, inst, &opt, &a, bound);
    Ok(r)
}
