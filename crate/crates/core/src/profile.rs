//! Valuation profiles.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Agent values sorted nonincreasing, with the original agent id of every rank.
///
/// Rank `r` (0-based) holds the `r+1`-st highest value. Equal values keep their
/// original id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationProfile {
    values: Vec<Rational>,
    ids: Vec<usize>,
}

impl ValuationProfile {
    /// Profile from values already sorted nonincreasing; ids are the ranks.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        check_entries(&values)?;
        if let Some(i) = (1..values.len()).find(|&i| values[i] > values[i - 1]) {
            return Err(Error::InvalidProfile(format!(
                "values must be nonincreasing, but entry {} exceeds entry {}",
                i + 1,
                i
            )));
        }
        let ids = (0..values.len()).collect();
        Ok(Self { values, ids })
    }

    /// Sorts `by_id` (indexed by agent id) stably into rank order.
    pub fn from_unsorted(by_id: Vec<Rational>) -> Result<Self> {
        check_entries(&by_id)?;
        let mut ids: Vec<usize> = (0..by_id.len()).collect();
        ids.sort_by(|&a, &b| by_id[b].cmp(&by_id[a]));
        let values = ids.iter().map(|&i| by_id[i].clone()).collect();
        Ok(Self { values, ids })
    }

    pub fn from_ints(vals: &[i64]) -> Result<Self> {
        Self::from_unsorted(vals.iter().map(|&v| crate::rational::int(v)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Sorted values, `values()[0]` is the highest.
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// The 1-based value `v_i`, with `v_0 = +inf` unrepresented and `v_{n+1} = 0`.
    pub fn v(&self, i: usize) -> Result<Rational> {
        if i == 0 || i > self.n() + 1 {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(self.values.get(i - 1).cloned().unwrap_or_else(Rational::zero))
    }

    /// Original agent id at each rank.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Values indexed by original agent id.
    pub fn by_id(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.n()];
        for (r, &id) in self.ids.iter().enumerate() {
            out[id] = self.values[r].clone();
        }
        out
    }

    /// Rank of each agent id.
    pub fn ranks(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (r, &id) in self.ids.iter().enumerate() {
            out[id] = r;
        }
        out
    }

    /// `v⁽²⁾`: the top value lowered to the second.
    pub fn second_price_profile(&self) -> Self {
        let mut p = self.clone();
        if p.n() >= 2 {
            p.values[0] = p.values[1].clone();
        }
        p
    }

    /// `v_S`: agents outside `keep` (given per agent id) get value 0, re-sorted.
    /// Ids are preserved, so the result still has `n` agents.
    pub fn restricted(&self, keep: &[bool]) -> Self {
        let mut by_id = self.by_id();
        for (id, v) in by_id.iter_mut().enumerate() {
            if !keep[id] {
                *v = Rational::zero();
            }
        }
        Self::from_unsorted(by_id).expect("zeroing keeps a valid profile")
    }

    pub fn total(&self) -> Rational {
        crate::rational::sum(&self.values)
    }
}

fn check_entries(values: &[Rational]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidProfile("at least one agent is required".into()));
    }
    if let Some(i) = values.iter().position(|v| v.is_negative()) {
        return Err(Error::InvalidProfile(format!("value of agent {i} is negative")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn stable_sort_keeps_id_order_on_ties() {
        let p = ValuationProfile::from_ints(&[4, 6, 4]).unwrap();
        assert_eq!(p.values(), &[int(6), int(4), int(4)]);
        assert_eq!(p.ids(), &[1, 0, 2]);
        assert_eq!(p.by_id(), vec![int(4), int(6), int(4)]);
        assert_eq!(p.ranks(), vec![1, 0, 2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ValuationProfile::new(vec![int(1), int(2)]).is_err());
        assert!(ValuationProfile::from_ints(&[1, -2]).is_err());
        assert!(ValuationProfile::from_ints(&[]).is_err());
    }

    #[test]
    fn derived_profiles() {
        let p = ValuationProfile::from_ints(&[6, 4, 4]).unwrap();
        assert_eq!(p.second_price_profile().values(), &[int(4), int(4), int(4)]);
        let s = p.restricted(&[false, true, false]);
        assert_eq!(s.values(), &[int(4), int(0), int(0)]);
        assert_eq!(s.ids(), &[1, 0, 2]);
        assert_eq!(p.v(4).unwrap(), int(0));
        assert!(p.v(0).is_err());
    }
}
