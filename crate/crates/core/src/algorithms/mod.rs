//! End-to-end constructions producing an allocation with envy-eliminating
//! transfers and a list of checked bounds.

mod baseline;
mod bounded;
mod nsw;
mod welfare;

pub use baseline::subadditive_baseline;
pub use bounded::{envy_cycles, make_envy_free_from_bounded};
pub use nsw::{nsw_pipeline_additive, nsw_pipeline_matroid, nsw_reassign, NswOptions};
pub use welfare::{algorithm1_additive, algorithm2_general, ALG2_MAX_ITEMS};

use crate::envy::{is_envy_free, min_subsidies, natural_transfers};
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance, PaymentVector, WelfareReport};
use crate::scalar::{Rational, Scalar};

/// Relative tolerance of floating-point certificates.
pub const APPROX_TOLERANCE: f64 = 1e-9;

/// Name and parameters of the algorithm that produced a result.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSpec {
    pub name: &'static str,
    pub alpha: Option<Rational>,
    pub rho: Option<Rational>,
}

/// One checked inequality `lhs ≤ rhs` or `lhs ≥ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    /// Evaluated in floating point with [`APPROX_TOLERANCE`].
    pub approx: bool,
    /// Reported but not part of the pass/fail verdict.
    pub advisory: bool,
}

impl Certificate {
    pub fn at_most<T: Scalar>(name: impl Into<String>, lhs: &T, rhs: &T) -> Self {
        Certificate {
            name: name.into(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            holds: rhs.ge_loose(lhs),
            approx: !T::EXACT,
            advisory: false,
        }
    }

    pub fn at_least<T: Scalar>(name: impl Into<String>, lhs: &T, rhs: &T) -> Self {
        Certificate {
            holds: lhs.ge_loose(rhs),
            ..Certificate::at_most(name, lhs, rhs)
        }
    }

    /// `lhs ≥ rhs` in double precision, with relative tolerance.
    pub fn approx_at_least(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Certificate {
            name: name.into(),
            lhs: format!("{lhs}"),
            rhs: format!("{rhs}"),
            holds: lhs >= rhs * (1.0 - APPROX_TOLERANCE),
            approx: true,
            advisory: false,
        }
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<T> {
    pub algorithm: AlgorithmSpec,
    pub allocation: Allocation,
    /// Minimal subsidies before centering.
    pub subsidies: PaymentVector<T>,
    pub transfers: PaymentVector<T>,
    pub report: WelfareReport<T>,
    pub certificates: Vec<Certificate>,
}

impl<T: Scalar> SolveResult<T> {
    /// Whether every non-advisory certificate holds.
    pub fn all_hold(&self) -> bool {
        self.certificates.iter().all(|c| c.holds || c.advisory)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Certificate> {
        self.certificates.iter().filter(|c| !c.holds && !c.advisory)
    }

    pub fn certificate(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }

    /// `Σ|t_i|`.
    pub fn total_transfer(&self) -> T {
        self.transfers.total()
    }
}

/// Minimal subsidies, natural transfers and the welfare report for an
/// allocation that the calling algorithm guarantees to be envy-freeable.
pub(crate) fn finish<T: Scalar>(
    inst: &Instance<T>,
    allocation: Allocation,
    algorithm: AlgorithmSpec,
) -> Result<SolveResult<T>> {
    let subsidies = min_subsidies(inst, &allocation).map_err(|e| {
        Error::GuaranteeViolated(format!("{} produced a non-envy-freeable allocation: {e}", algorithm.name))
    })?;
    let transfers = natural_transfers(&subsidies);
    let (ok, worst) = is_envy_free(inst, &allocation, transfers.values());
    if !ok {
        return Err(Error::GuaranteeViolated(format!(
            "{}: transfers leave envy {worst:?}",
            algorithm.name
        )));
    }
    let report = WelfareReport::compute(inst, &allocation, Some(&transfers), algorithm.rho.as_ref());
    Ok(SolveResult {
        algorithm,
        allocation,
        subsidies,
        transfers,
        report,
        certificates: Vec::new(),
    })
}

/// `2n²` as a scalar.
pub(crate) fn two_n_squared<T: Scalar>(n: usize) -> T {
    T::from_int(2 * (n * n) as i64)
}

pub(crate) fn check_alpha(alpha: &Rational, max: &Rational, what: &str) -> Result<()> {
    let zero = Rational::from_integer(0.into());
    if *alpha <= zero || alpha > max {
        return Err(Error::Precondition(format!("{what} needs alpha in (0, {max}], got {alpha}")));
    }
    Ok(())
}

/// `max_i v_i(A_i)`.
pub(crate) fn max_own_value<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> T {
    (0..inst.agents())
        .map(|i| inst.value(i, alloc.bundle(i)))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}
