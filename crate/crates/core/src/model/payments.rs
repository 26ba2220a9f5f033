use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentKind {
    /// Every entry is nonnegative; money enters from outside.
    Subsidy,
    /// Entries sum to zero; money moves only between agents.
    Transfer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaymentVector<T> {
    kind: PaymentKind,
    values: Vec<T>,
}

impl<T: Scalar> PaymentVector<T> {
    pub fn subsidy(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|x| x.is_negative_strict()) {
            return Err(Error::InvalidPayments(format!(
                "subsidy for agent {i} is negative ({})",
                values[i]
            )));
        }
        Ok(PaymentVector {
            kind: PaymentKind::Subsidy,
            values,
        })
    }

    pub fn transfer(values: Vec<T>) -> Result<Self> {
        let total = sum(values.iter().cloned());
        if total.abs_val().gt_strict(&T::zero()) {
            return Err(Error::InvalidPayments(format!(
                "transfers sum to {total}, not 0"
            )));
        }
        Ok(PaymentVector {
            kind: PaymentKind::Transfer,
            values,
        })
    }

    pub fn zero_transfers(n: usize) -> Self {
        PaymentVector {
            kind: PaymentKind::Transfer,
            values: vec![T::zero(); n],
        }
    }

    pub fn kind(&self) -> PaymentKind {
        self.kind
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, agent: usize) -> &T {
        &self.values[agent]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Σ |p_i|.
    pub fn total(&self) -> T {
        sum(self.values.iter().map(|x| x.abs_val()))
    }

    pub fn max_entry(&self) -> T {
        self.values
            .iter()
            .cloned()
            .fold(None, |best: Option<T>, x| match best {
                Some(b) if b >= x => Some(b),
                _ => Some(x),
            })
            .unwrap_or_else(T::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn subsidy_and_transfer_invariants() {
        assert!(PaymentVector::subsidy(vec![q(0, 1), q(1, 2)]).is_ok());
        assert!(PaymentVector::subsidy(vec![q(-1, 2)]).is_err());
        let t = PaymentVector::transfer(vec![q(-2, 3), q(1, 3), q(1, 3)]).unwrap();
        assert_eq!(t.total(), q(4, 3));
        assert_eq!(t.max_entry(), q(1, 3));
        assert!(PaymentVector::transfer(vec![q(-2, 3), q(1, 3), q(1, 2)]).is_err());
        assert!(PaymentVector::<f64>::transfer(vec![0.1, 0.2, -0.3]).is_ok());
    }
}
