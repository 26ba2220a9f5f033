use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{finish, two_n_squared, AlgorithmSpec, Certificate, SolveResult};
use crate::error::{Error, Result};
use crate::matching::{iterated_matching, reassign_bundles};
use crate::model::welfare::{check_rho, rho_mean_of};
use crate::model::{nash_product, social_welfare, Allocation, Instance};
use crate::oracles::enumerate::{allocation_count, decode, ENUMERATION_CAP};
use crate::oracles::{brute_nsw_opt, brute_sw_opt, ValueCache};
use crate::scalar::{Rational, Scalar};

/// Iterated matching from scratch, bundle reassignment, natural transfers.
/// For subadditive valuations every agent keeps at least `v_i(M)/n`, so
/// ρ-mean welfare is at least `1/n` of optimal, and `Σ|t| ≤ 2n²`.
pub fn subadditive_baseline<T: Scalar>(inst: &Instance<T>, rho: Option<&Rational>) -> Result<SolveResult<T>> {
    if !inst.class().is_subadditive() {
        return Err(Error::Unsupported(format!(
            "the baseline needs subadditive valuations, got {}",
            inst.class().name()
        )));
    }
    if let Some(r) = rho {
        check_rho(r)?;
    }
    let (n, m) = (inst.agents(), inst.items());
    let matched = iterated_matching(inst, crate::model::ItemSet::full(m), &Allocation::empty(n, m));
    let (alloc, _) = reassign_bundles(inst, &matched);
    let mut r = finish(
        inst,
        alloc,
        AlgorithmSpec {
            name: "baseline",
            alpha: None,
            rho: rho.cloned(),
        },
    )?;
    r.certificates.push(Certificate::at_most(
        "total_transfer <= 2n^2",
        &r.total_transfer(),
        &two_n_squared(n),
    ));
    let per_agent = Certificate::at_most(
        "max_subsidy <= 2(n-1)",
        &r.subsidies.max_entry(),
        &T::from_int(2 * (n as i64 - 1)),
    );
    r.certificates.push(if inst.is_additive() { per_agent } else { per_agent.advisory() });
    let nn = T::from_int(n as i64);
    let floor_holds = (0..n).all(|i| {
        r.report.utilities[i]
            .clone()
            .ge_loose(&(inst.value(i, inst.all_items()) / nn.clone()))
    });
    let worst = (0..n)
        .map(|i| r.report.utilities[i].clone() - inst.value(i, inst.all_items()) / nn.clone())
        .fold(None, |acc: Option<T>, d| match acc {
            Some(a) if a <= d => Some(a),
            _ => Some(d),
        })
        .unwrap_or_else(T::zero);
    r.certificates.push(Certificate {
        holds: floor_holds,
        ..Certificate::at_least("min_i (u_i - v_i(M)/n) >= 0", &worst, &T::zero())
    });
    if let Some(rho) = rho {
        r.certificates.push(rho_certificate(inst, &r, rho)?);
    }
    Ok(r)
}

/// `W^ρ(A,t) ≥ (1/n)·W^ρ(A*)`: exact for ρ ∈ {0, 1}, double precision otherwise.
fn rho_certificate<T: Scalar>(inst: &Instance<T>, r: &SolveResult<T>, rho: &Rational) -> Result<Certificate> {
    let n = inst.agents();
    let nn = T::from_int(n as i64);
    if rho.is_one() {
        let opt = brute_sw_opt(inst)?;
        return Ok(Certificate::at_least(
            "sw >= sw_opt/n",
            &r.report.sw,
            &(social_welfare(inst, &opt, None) / nn),
        ));
    }
    if rho.is_zero() {
        let opt = brute_nsw_opt(inst)?;
        let bound = nash_product(inst, &opt, None)? / (0..n).fold(T::one(), |acc, _| acc * nn.clone());
        let got = r.report.nash_product.clone().unwrap_or_else(T::zero);
        return Ok(Certificate::at_least("nash_product >= nash_product_opt/n^n", &got, &bound));
    }
    let best = rho_optimum(inst, rho)?;
    let got = rho_mean_of(&r.report.utilities, rho)?;
    Ok(Certificate::approx_at_least(
        format!("W^{rho} >= W^{rho}_opt/n"),
        got,
        best / n as f64,
    ))
}

/// Largest ρ-mean welfare over all allocations, in double precision.
fn rho_optimum<T: Scalar>(inst: &Instance<T>, rho: &Rational) -> Result<f64> {
    let (n, m) = (inst.agents(), inst.items());
    match allocation_count(n, m) {
        Some(c) if c <= ENUMERATION_CAP => {
            let cache = ValueCache::new(inst);
            let r = rho.to_f64().unwrap_or(1.0);
            let best = (0..c as usize)
                .into_par_iter()
                .map(|code| {
                    let b = decode(code as u64, n, m);
                    let s: f64 = (0..n).map(|i| cache.value(i, b[i]).as_f64().max(0.0).powf(r)).sum();
                    s
                })
                .reduce(|| 0.0, f64::max);
            Ok((best / n as f64).powf(1.0 / r))
        }
        _ => Err(Error::TooLarge(format!(
            "rho-mean optimum needs enumerating {n}^{m} allocations"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Valuation, ValuationClass};
    use crate::oracles::{gen_imposs, gen_random};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn baseline_examples() {
        let inst: Instance<Rational> = gen_imposs(3, 6, &q(1, 10)).unwrap();
        for rho in [q(1, 1), q(0, 1), q(1, 2)] {
            let r = subadditive_baseline(&inst, Some(&rho)).unwrap();
            assert!(r.all_hold(), "{:?}", r.certificates);
        }
        let one = Instance::new(2, ValuationClass::Additive, vec![Valuation::Additive(vec![q(1, 2), q(1, 3)])]).unwrap();
        let r = subadditive_baseline(&one, Some(&q(1, 1))).unwrap();
        assert_eq!(r.allocation, Allocation::grand_bundle(1, 2, 0));
        assert_eq!(r.certificate("sw >= sw_opt/n").unwrap().lhs, "5/6");
        let same = Instance::new(4, ValuationClass::Additive, vec![Valuation::Additive(vec![q(1, 2); 4]); 2]).unwrap();
        let r = subadditive_baseline(&same, None).unwrap();
        assert_eq!(r.total_transfer(), q(0, 1));
    }

    #[test]
    fn baseline_rejects_monotone() {
        let inst: Instance<Rational> = gen_random(2, 3, ValuationClass::Monotone, 3).unwrap();
        assert!(matches!(subadditive_baseline(&inst, None), Err(Error::Unsupported(_))));
    }
}
