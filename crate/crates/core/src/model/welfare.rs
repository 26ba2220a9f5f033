use num_traits::{One, ToPrimitive, Zero};

use super::{Allocation, Instance, PaymentVector};
use crate::error::{Error, Result};
use crate::scalar::{sum, Rational, Scalar};

/// `v_i(A_i) + p_i` for every agent.
pub fn utilities<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
    payments: Option<&PaymentVector<T>>,
) -> Vec<T> {
    (0..inst.agents())
        .map(|i| {
            let v = inst.value(i, alloc.bundle(i));
            match payments {
                Some(p) => v + p.get(i).clone(),
                None => v,
            }
        })
        .collect()
}

/// Utilitarian welfare Σ_i (v_i(A_i) + t_i); zero-sum transfers leave it unchanged.
pub fn social_welfare<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
    transfers: Option<&PaymentVector<T>>,
) -> T {
    sum(utilities(inst, alloc, transfers))
}

/// Π_i (v_i(A_i) + t_i), the n-th power of the Nash social welfare.
pub fn nash_product<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
    transfers: Option<&PaymentVector<T>>,
) -> Result<T> {
    product_of(&utilities(inst, alloc, transfers))
}

pub fn product_of<T: Scalar>(utilities: &[T]) -> Result<T> {
    if let Some(agent) = utilities.iter().position(|u| u.is_negative_strict()) {
        return Err(Error::NegativeUtility { agent });
    }
    Ok(utilities.iter().fold(T::one(), |acc, u| acc * u.clone()))
}

/// The ρ-mean welfare `((1/n) Σ u_i^ρ)^{1/ρ}` for ρ ∈ (0, 1]; ρ = 0 gives the
/// geometric mean. At ρ = 1 the mean is formed exactly before conversion.
pub fn rho_mean<T: Scalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
    transfers: Option<&PaymentVector<T>>,
    rho: &Rational,
) -> Result<f64> {
    rho_mean_of(&utilities(inst, alloc, transfers), rho)
}

pub fn rho_mean_of<T: Scalar>(utilities: &[T], rho: &Rational) -> Result<f64> {
    check_rho(rho)?;
    if let Some(agent) = utilities.iter().position(|u| u.is_negative_strict()) {
        return Err(Error::NegativeUtility { agent });
    }
    let n = utilities.len();
    if rho.is_one() {
        let total = sum(utilities.iter().cloned());
        return Ok((total / T::from_int(n as i64)).as_f64());
    }
    if rho.is_zero() {
        let prod = product_of(utilities)?;
        return Ok(prod.as_f64().max(0.0).powf(1.0 / n as f64));
    }
    let r = rho.to_f64().unwrap_or(f64::NAN);
    let mean = utilities
        .iter()
        .map(|u| u.as_f64().max(0.0).powf(r))
        .sum::<f64>()
        / n as f64;
    Ok(mean.powf(1.0 / r))
}

pub fn check_rho(rho: &Rational) -> Result<()> {
    if *rho < Rational::zero() || *rho > Rational::one() {
        return Err(Error::Unsupported(format!(
            "rho-mean welfare is supported for rho in [0, 1], got {rho}"
        )));
    }
    Ok(())
}

/// Welfare summary of an allocation with transfers.
#[derive(Clone, Debug, PartialEq)]
pub struct WelfareReport<T> {
    pub sw: T,
    /// Π u_i; `None` when some utility is negative.
    pub nash_product: Option<T>,
    pub rho: Option<Rational>,
    pub rho_mean: Option<f64>,
    pub utilities: Vec<T>,
}

impl<T: Scalar> WelfareReport<T> {
    pub fn compute(
        inst: &Instance<T>,
        alloc: &Allocation,
        transfers: Option<&PaymentVector<T>>,
        rho: Option<&Rational>,
    ) -> Self {
        let utilities = utilities(inst, alloc, transfers);
        WelfareReport {
            sw: sum(utilities.iter().cloned()),
            nash_product: product_of(&utilities).ok(),
            rho: rho.cloned(),
            rho_mean: rho.and_then(|r| rho_mean_of(&utilities, r).ok()),
            utilities,
        }
    }

    /// NSW itself, as a float; only ever used for display.
    pub fn nsw(&self) -> Option<f64> {
        let n = self.utilities.len() as f64;
        self.nash_product.as_ref().map(|p| p.as_f64().max(0.0).powf(1.0 / n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ItemSet, Valuation, ValuationClass};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn bad_nsw() -> Instance<Rational> {
        Instance::new(
            2,
            ValuationClass::Additive,
            vec![
                Valuation::Additive(vec![q(1, 1), q(1, 2)]),
                Valuation::Additive(vec![q(1, 2), q(1, 100)]),
            ],
        )
        .unwrap()
    }

    fn tightness3() -> Instance<Rational> {
        let rows = (0..3)
            .map(|i| Valuation::Additive((0..3).map(|j| q((i == j) as i64, 1)).collect()))
            .collect();
        Instance::new(3, ValuationClass::Additive, rows).unwrap()
    }

    #[test]
    fn social_welfare_ignores_transfers() {
        let inst = tightness3();
        let grand = Allocation::grand_bundle(3, 3, 0);
        assert_eq!(social_welfare(&inst, &grand, None), q(1, 1));
        let t = PaymentVector::transfer(vec![q(-2, 3), q(1, 3), q(1, 3)]).unwrap();
        assert_eq!(social_welfare(&inst, &grand, Some(&t)), q(1, 1));
        let empty = Instance::new(0, ValuationClass::Additive, vec![Valuation::<Rational>::Additive(vec![])]).unwrap();
        assert_eq!(social_welfare(&empty, &Allocation::empty(1, 0), None), q(0, 1));
    }

    #[test]
    fn nash_product_examples() {
        let inst = bad_nsw();
        let swap = Allocation::new(2, vec![ItemSet(0b10), ItemSet(0b01)]).unwrap();
        assert_eq!(nash_product(&inst, &swap, None).unwrap(), q(1, 4));
        let grand = Allocation::grand_bundle(2, 2, 0);
        assert_eq!(nash_product(&inst, &grand, None).unwrap(), q(0, 1));
        let split = Allocation::new(2, vec![ItemSet(0b01), ItemSet(0b10)]).unwrap();
        let t = PaymentVector::transfer(vec![q(-49, 200), q(49, 200)]).unwrap();
        assert_eq!(nash_product(&inst, &split, Some(&t)).unwrap(), q(7701, 40000));
        let bad = PaymentVector::transfer(vec![q(2, 1), q(-2, 1)]).unwrap();
        assert_eq!(
            nash_product(&inst, &split, Some(&bad)),
            Err(Error::NegativeUtility { agent: 1 })
        );
    }

    #[test]
    fn rho_mean_examples() {
        let inst = tightness3();
        let grand = Allocation::grand_bundle(3, 3, 0);
        assert_eq!(rho_mean(&inst, &grand, None, &q(1, 1)).unwrap(), 1.0 / 3.0);
        assert!((rho_mean_of(&[q(1, 1), q(1, 1), q(1, 1)], &q(1, 2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((rho_mean_of(&[q(4, 1), q(1, 1)], &q(1, 2)).unwrap() - 2.25).abs() < 1e-12);
        assert!(rho_mean_of(&[q(4, 1)], &q(3, 2)).is_err());
        assert!(rho_mean_of(&[q(4, 1)], &q(-1, 2)).is_err());
        assert!((rho_mean_of(&[q(4, 1), q(1, 1)], &q(0, 1)).unwrap() - 2.0).abs() < 1e-12);
    }
}
