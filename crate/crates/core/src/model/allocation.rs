use std::fmt;

use super::ItemSet;
use crate::error::{Error, Result};

/// A partition of the items into one (possibly empty) bundle per agent.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    items: usize,
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn new(items: usize, bundles: Vec<ItemSet>) -> Result<Self> {
        let full = ItemSet::full(items);
        let mut seen = ItemSet::EMPTY;
        for (agent, b) in bundles.iter().enumerate() {
            if !b.is_subset(full) {
                return Err(Error::InvalidAllocation(format!(
                    "bundle of agent {agent} contains items outside 0..{items}"
                )));
            }
            if !seen.is_disjoint(*b) {
                return Err(Error::InvalidAllocation(format!(
                    "bundle of agent {agent} overlaps an earlier bundle on {}",
                    seen.intersect(*b)
                )));
            }
            seen = seen.union(*b);
        }
        if seen != full {
            return Err(Error::InvalidAllocation(format!(
                "items {} are unallocated",
                full.minus(seen)
            )));
        }
        Ok(Allocation { items, bundles })
    }

    /// A partial allocation: disjoint bundles that need not cover every item.
    pub fn partial(items: usize, bundles: Vec<ItemSet>) -> Result<Self> {
        let assigned = bundles.iter().fold(ItemSet::EMPTY, |acc, b| acc.union(*b));
        let mut padded = bundles;
        let rest = ItemSet::full(items).minus(assigned);
        // validate disjointness by temporarily parking leftovers in a phantom bundle
        padded.push(rest);
        let mut checked = Allocation::new(items, padded)?;
        checked.bundles.pop();
        Ok(checked)
    }

    pub fn empty(agents: usize, items: usize) -> Self {
        Allocation {
            items,
            bundles: vec![ItemSet::EMPTY; agents],
        }
    }

    pub fn grand_bundle(agents: usize, items: usize, to: usize) -> Self {
        let mut bundles = vec![ItemSet::EMPTY; agents];
        bundles[to] = ItemSet::full(items);
        Allocation { items, bundles }
    }

    /// `assignment[g]` is the agent receiving item `g`.
    pub fn from_assignment(agents: usize, assignment: &[usize]) -> Self {
        let mut bundles = vec![ItemSet::EMPTY; agents];
        for (g, &a) in assignment.iter().enumerate() {
            bundles[a] = bundles[a].with(g);
        }
        Allocation {
            items: assignment.len(),
            bundles,
        }
    }

    pub fn assignment(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.items];
        for (a, b) in self.bundles.iter().enumerate() {
            for g in b.iter() {
                out[g] = Some(a);
            }
        }
        out
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> ItemSet {
        self.bundles[agent]
    }

    pub fn allocated(&self) -> ItemSet {
        self.bundles.iter().fold(ItemSet::EMPTY, |acc, b| acc.union(*b))
    }

    pub fn unallocated(&self) -> ItemSet {
        ItemSet::full(self.items).minus(self.allocated())
    }

    pub fn is_complete(&self) -> bool {
        self.unallocated().is_empty()
    }

    pub(crate) fn give(&mut self, agent: usize, g: usize) {
        self.bundles[agent] = self.bundles[agent].with(g);
    }

    /// Agent `i` receives bundle `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Allocation {
        Allocation {
            items: self.items,
            bundles: perm.iter().map(|&j| self.bundles[j]).collect(),
        }
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, b) in self.bundles.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_partition() {
        let a = Allocation::new(3, vec![ItemSet(0b011), ItemSet(0b100)]).unwrap();
        assert_eq!(a.assignment(), vec![Some(0), Some(0), Some(1)]);
        assert!(Allocation::new(3, vec![ItemSet(0b011), ItemSet(0b110)]).is_err());
        assert!(Allocation::new(3, vec![ItemSet(0b011), ItemSet(0b000)]).is_err());
        assert!(Allocation::new(2, vec![ItemSet(0b111)]).is_err());
        assert!(Allocation::new(0, vec![ItemSet::EMPTY, ItemSet::EMPTY]).is_ok());
    }

    #[test]
    fn partial_allows_leftovers() {
        let p = Allocation::partial(3, vec![ItemSet(0b001), ItemSet::EMPTY]).unwrap();
        assert_eq!(p.unallocated(), ItemSet(0b110));
        assert!(Allocation::partial(3, vec![ItemSet(0b001), ItemSet(0b001)]).is_err());
    }

    #[test]
    fn assignment_round_trip() {
        let a = Allocation::from_assignment(3, &[2, 0, 2, 1]);
        assert_eq!(a.bundles(), &[ItemSet(0b0010), ItemSet(0b1000), ItemSet(0b0101)]);
        assert_eq!(a.permuted(&[2, 0, 1]).bundle(0), ItemSet(0b0101));
    }
}
