use super::{finish, two_n_squared, AlgorithmSpec, Certificate, SolveResult};
use crate::envy::{bounded_envy, is_ef1};
use crate::error::{Error, Result};
use crate::matching::reassign_bundles;
use crate::model::{nash_product, Allocation, Instance, ValuationClass};
use crate::oracles::brute_nsw_opt;
use crate::scalar::{inv_e_pow_inv_e, Rational, Scalar};
use num_traits::ToPrimitive;

/// Inputs of the Nash-welfare pipelines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NswOptions {
    /// An EF1 allocation to start from instead of the exact optimum.
    pub input: Option<Allocation>,
    /// Approximation factor of `input` relative to the optimal Nash welfare.
    pub alpha: Option<Rational>,
    /// `input` came out of an EF1 conversion that may halve Nash welfare.
    pub ef1_conversion: bool,
}

/// `(num / den)^{1/n}` in double precision; a zero denominator gives 1 or ∞.
fn nsw_ratio<T: Scalar>(num: &T, den: &T, n: usize) -> f64 {
    if !den.is_positive_strict() {
        return if num.is_positive_strict() { f64::INFINITY } else { 1.0 };
    }
    (num.clone() / den.clone()).as_f64().max(0.0).powf(1.0 / n as f64)
}

/// Reassign the bundles of `base` to maximize utilitarian welfare and add
/// natural transfers; Nash welfare drops by at most a factor `e^{-1/e}`.
pub fn nsw_reassign<T: Scalar>(inst: &Instance<T>, base: &Allocation) -> Result<SolveResult<T>> {
    if !base.is_complete() {
        return Err(Error::Precondition("base allocation must allocate every item".into()));
    }
    let (alloc, _) = reassign_bundles(inst, base);
    let mut r = finish(
        inst,
        alloc,
        AlgorithmSpec {
            name: "nsw-reassign",
            alpha: None,
            rho: Some(Rational::from_integer(0.into())),
        },
    )?;
    let n = inst.agents();
    let with_t = r.report.nash_product.clone().unwrap_or_else(T::zero);
    let before = nash_product(inst, base, None)?;
    r.certificates.push(Certificate::approx_at_least(
        "nsw_ratio_vs_base >= e^(-1/e)",
        nsw_ratio(&with_t, &before, n),
        inv_e_pow_inv_e(),
    ));
    Ok(r)
}

fn pipeline<T: Scalar>(
    inst: &Instance<T>,
    base: &Allocation,
    optimum: Option<&Allocation>,
    factor: f64,
    algorithm: AlgorithmSpec,
) -> Result<SolveResult<T>> {
    let mut r = nsw_reassign(inst, base)?;
    r.algorithm = algorithm;
    let n = inst.agents();
    if let Some(opt) = optimum {
        let with_t = r.report.nash_product.clone().unwrap_or_else(T::zero);
        let best = nash_product(inst, opt, None)?;
        r.certificates.push(Certificate::approx_at_least(
            "nsw_ratio_vs_opt >= factor*e^(-1/e)",
            nsw_ratio(&with_t, &best, n),
            factor * inv_e_pow_inv_e(),
        ));
    }
    r.certificates.push(Certificate::at_most(
        "bounded_envy(base) <= 1",
        &bounded_envy(inst, base),
        &T::one(),
    ));
    r.certificates.push(Certificate::at_most(
        "total_transfer <= 2n^2",
        &r.total_transfer(),
        &two_n_squared(n),
    ));
    Ok(r)
}

/// Nash-welfare pipeline for additive valuations: start from an EF1
/// allocation (by default the exact Nash optimum), then [`nsw_reassign`].
pub fn nsw_pipeline_additive<T: Scalar>(inst: &Instance<T>, opts: &NswOptions) -> Result<SolveResult<T>> {
    if !inst.is_additive() {
        return Err(Error::Unsupported(format!(
            "the additive Nash pipeline needs additive valuations, got {}",
            inst.class().name()
        )));
    }
    let alpha = opts.alpha.clone().unwrap_or_else(|| Rational::from_integer(1.into()));
    if alpha <= Rational::from_integer(0.into()) || alpha > Rational::from_integer(1.into()) {
        return Err(Error::Precondition(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let factor = alpha.to_f64().unwrap_or(1.0) * if opts.ef1_conversion { 0.5 } else { 1.0 };
    let algorithm = AlgorithmSpec {
        name: "nsw",
        alpha: opts.alpha.clone(),
        rho: Some(Rational::from_integer(0.into())),
    };
    match &opts.input {
        Some(input) => {
            if input.agents() != inst.agents() || input.items() != inst.items() || !input.is_complete() {
                return Err(Error::Precondition("input allocation does not fit the instance".into()));
            }
            if !is_ef1(inst, input) {
                return Err(Error::Precondition("input allocation is not EF1".into()));
            }
            let optimum = match brute_nsw_opt(inst) {
                Ok(a) => Some(a),
                Err(Error::TooLarge(_)) => None,
                Err(e) => return Err(e),
            };
            pipeline(inst, input, optimum.as_ref(), factor, algorithm)
        }
        None => {
            let opt = brute_nsw_opt(inst)?;
            pipeline(inst, &opt, Some(&opt), factor, algorithm)
        }
    }
}

/// Nash-welfare pipeline for matroid-rank valuations, from the exact optimum.
/// The optimum is EF1 for this class; a violation is reported as an error.
pub fn nsw_pipeline_matroid<T: Scalar>(inst: &Instance<T>) -> Result<SolveResult<T>> {
    if inst.class() != ValuationClass::MatroidRank || !inst.class_verified() {
        return Err(Error::Unsupported(
            "the matroid Nash pipeline needs a verified matroid_rank instance".into(),
        ));
    }
    let opt = brute_nsw_opt(inst)?;
    if !is_ef1(inst, &opt) {
        return Err(Error::GuaranteeViolated(format!(
            "Nash-optimal allocation {opt} is not EF1"
        )));
    }
    let algorithm = AlgorithmSpec {
        name: "nsw-matroid",
        alpha: None,
        rho: Some(Rational::from_integer(0.into())),
    };
    pipeline(inst, &opt, Some(&opt), 1.0, algorithm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ItemSet, Valuation};
    use crate::oracles::gen_bad_nsw;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn reassign_from_nsw_optimum() {
        let inst: Instance<Rational> = gen_bad_nsw(&q(1, 100)).unwrap();
        let base = Allocation::new(2, vec![ItemSet(2), ItemSet(1)]).unwrap();
        let r = nsw_reassign(&inst, &base).unwrap();
        assert_eq!(r.report.utilities, vec![q(151, 200), q(51, 200)]);
        let c = r.certificate("nsw_ratio_vs_base >= e^(-1/e)").unwrap();
        let lhs: f64 = c.lhs.parse().unwrap();
        assert!((lhs - (7701.0f64 / 40000.0).sqrt() / 0.5).abs() < 1e-12);
        assert!((lhs - 0.8776).abs() < 1e-4);
        assert!(c.holds);
    }

    #[test]
    fn additive_pipeline() {
        let inst: Instance<Rational> = gen_bad_nsw(&q(1, 100)).unwrap();
        let r = nsw_pipeline_additive(&inst, &NswOptions::default()).unwrap();
        assert_eq!(r.total_transfer(), q(49, 100));
        assert!(r.all_hold());

        let one = Instance::new(2, ValuationClass::Additive, vec![Valuation::Additive(vec![q(1, 2), q(1, 3)])]).unwrap();
        let r = nsw_pipeline_additive(&one, &NswOptions::default()).unwrap();
        assert_eq!(r.allocation, Allocation::grand_bundle(1, 2, 0));
        assert_eq!(r.total_transfer(), q(0, 1));

        let same = Instance::new(2, ValuationClass::Additive, vec![Valuation::Additive(vec![q(1, 1), q(1, 1)]); 2]).unwrap();
        let r = nsw_pipeline_additive(&same, &NswOptions::default()).unwrap();
        assert_eq!(r.allocation.bundles(), &[ItemSet(1), ItemSet(2)]);
        assert_eq!(r.total_transfer(), q(0, 1));

        let not_ef1 = NswOptions {
            input: Some(Allocation::grand_bundle(2, 2, 0)),
            ..NswOptions::default()
        };
        assert!(matches!(nsw_pipeline_additive(&inst, &not_ef1), Err(Error::Precondition(_))));
    }

    #[test]
    fn matroid_pipeline() {
        let table: Vec<Rational> = (0..8u32).map(|s| q(s.count_ones().min(2) as i64, 1)).collect();
        let inst = Instance::new(3, ValuationClass::MatroidRank, vec![Valuation::Table(table); 2]).unwrap();
        let r = nsw_pipeline_matroid(&inst).unwrap();
        let sizes: Vec<usize> = r.allocation.bundles().iter().map(|b| b.len()).collect();
        assert!(sizes == vec![2, 1] || sizes == vec![1, 2]);
        assert!(r.all_hold());

        let unit = |g: u64| -> Vec<Rational> { (0..4u64).map(|s| q(((s >> g) & 1) as i64, 1)).collect() };
        let inst = Instance::new(2, ValuationClass::MatroidRank, vec![Valuation::Table(unit(0)), Valuation::Table(unit(1))]).unwrap();
        let r = nsw_pipeline_matroid(&inst).unwrap();
        assert_eq!(r.allocation.bundles(), &[ItemSet(1), ItemSet(2)]);
        assert_eq!(r.total_transfer(), q(0, 1));

        let additive: Instance<Rational> = gen_bad_nsw(&q(1, 100)).unwrap();
        assert!(matches!(nsw_pipeline_matroid(&additive), Err(Error::Unsupported(_))));
    }
}
