use super::{finish, two_n_squared, AlgorithmSpec, Certificate, SolveResult};
use crate::envy::{bounded_envy, worst_envy};
use crate::error::{Error, Result};
use crate::matching::reassign_bundles;
use crate::model::{Allocation, Instance, ItemSet};
use crate::scalar::Scalar;

/// Turn an allocation with `b`-bounded envy into an envy-free one with
/// transfers totalling at most `2bn²`, by reassigning its bundles.
pub fn make_envy_free_from_bounded<T: Scalar>(inst: &Instance<T>, base: &Allocation, b: &T) -> Result<SolveResult<T>> {
    if !base.is_complete() {
        return Err(Error::Precondition(format!(
            "base allocation leaves items {} unallocated",
            base.unallocated()
        )));
    }
    if let Some(w) = worst_envy(inst, base) {
        if !b.ge_loose(&w.amount) {
            return Err(Error::Precondition(format!(
                "agent {} envies agent {} by {}, more than b = {b}",
                w.envious, w.envied, w.amount
            )));
        }
    }
    let (alloc, _) = reassign_bundles(inst, base);
    let mut r = finish(
        inst,
        alloc,
        AlgorithmSpec {
            name: "bounded",
            alpha: None,
            rho: None,
        },
    )?;
    let n = inst.agents();
    let two = T::from_int(2);
    r.certificates.push(Certificate::at_most(
        "total_transfer <= 2*b*n^2",
        &r.total_transfer(),
        &(b.clone() * two_n_squared::<T>(n)),
    ));
    r.certificates.push(Certificate::at_most(
        "max_subsidy <= 2*b*(n-1)",
        &r.subsidies.max_entry(),
        &(two * b.clone() * T::from_int(n as i64 - 1)),
    ));
    Ok(r)
}

/// Add `items` one at a time (ascending) to an agent nobody strictly envies,
/// first rotating bundles along strict-envy cycles until such an agent exists.
/// Among unenvied agents the item goes to the one with the largest marginal
/// value for it, lowest index on ties.
/// Envy rises by at most one (the marginal cap) over `start`.
pub fn envy_cycles<T: Scalar>(inst: &Instance<T>, items: ItemSet, start: &Allocation) -> Result<Allocation> {
    if !items.is_disjoint(start.allocated()) {
        return Err(Error::Precondition("items overlap the start allocation".into()));
    }
    let n = inst.agents();
    let before = bounded_envy(inst, start);
    let mut alloc = start.clone();
    for g in items.iter() {
        let source = loop {
            let values: Vec<Vec<T>> = (0..n)
                .map(|i| alloc.bundles().iter().map(|&b| inst.value(i, b)).collect())
                .collect();
            let envies = |i: usize, j: usize| i != j && values[i][j].gt_strict(&values[i][i]);
            let marginal = |j: usize| inst.value(j, alloc.bundle(j).with(g)) - values[j][j].clone();
            let mut best: Option<(usize, T)> = None;
            for j in (0..n).filter(|&j| (0..n).all(|i| !envies(i, j))) {
                let mj = marginal(j);
                if best.as_ref().map_or(true, |(_, b)| mj.gt_strict(b)) {
                    best = Some((j, mj));
                }
            }
            if let Some((s, _)) = best {
                break s;
            }
            // Everyone is envied: walk to an envier repeatedly until a repeat.
            let mut seen = vec![usize::MAX; n];
            let mut walk = vec![0usize];
            seen[0] = 0;
            let cycle = loop {
                let cur = *walk.last().unwrap();
                let next = (0..n).find(|&i| envies(i, cur)).expect("every agent is envied");
                if seen[next] != usize::MAX {
                    break walk[seen[next]..].to_vec();
                }
                seen[next] = walk.len();
                walk.push(next);
            };
            // cycle[k + 1] envies cycle[k]; it takes that bundle.
            let old: Vec<ItemSet> = alloc.bundles().to_vec();
            let k = cycle.len();
            let mut rotated = old.clone();
            for t in 0..k {
                rotated[cycle[(t + 1) % k]] = old[cycle[t]];
            }
            alloc = Allocation::partial(inst.items(), rotated)?;
        };
        alloc.give(source, g);
    }
    let after = bounded_envy(inst, &alloc);
    if !(before + T::one()).ge_loose(&after) {
        return Err(Error::GuaranteeViolated(format!(
            "envy-cycles raised bounded envy to {after}"
        )));
    }
    Ok(alloc)
}
