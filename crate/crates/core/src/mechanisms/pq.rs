//! The two-tier lottery a `k`-unit sampling auction induces on the market, and the
//! linear functions used to bound its revenue.

use num_traits::{Signed, Zero};

use crate::curves::{build_curve, VirtualValuation};
use crate::error::{Error, Result};
use crate::incentive::MechanismRun;
use crate::outcome::Partition;
use crate::profile::ValuationProfile;
use crate::rational::{int, Rational};

/// Sure winners at or above `p`, a lottery among agents in `[q, p)`.
///
/// `p` is `None` when the lottery class is the sample's top class, in which case `i = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PQLottery {
    pub p: Option<Rational>,
    pub q: Rational,
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// `(k−i)q + i(p − (p−q)(k−i+1)/(j−i+1))`.
pub fn r_hat(p: &Rational, q: &Rational, i: usize, j: usize, k: usize) -> Rational {
    let (i_, j_, k_) = (int(i as i64), int(j as i64), int(k as i64));
    let tail = (&k_ - &i_) * q;
    if i == 0 {
        return tail;
    }
    tail + &i_ * (p - (p - q) * (&k_ - &i_ + int(1)) / (&j_ - &i_ + int(1)))
}

/// Best revenue from at most `k` units: the largest `r̂_{i,j}(k)` over `0 ≤ i ≤ k ≤ j ≤ n`
/// with `p = v_i`, `q = v_j`, or a posted price `v_j` selling `j < k` units.
pub fn max_r_hat(v: &ValuationProfile, k: usize) -> Result<Rational> {
    let n = v.n();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let mut best = build_curve(v).max_r_upto(k);
    for i in 0..=k {
        let p = if i == 0 { Rational::zero() } else { v.v(i)? };
        for j in k.max(1)..=n {
            if i == j && i != k {
                continue;
            }
            let q = v.v(j)?;
            best = best.max(r_hat(&p, &q, i, j, k));
        }
    }
    Ok(best)
}

impl PQLottery {
    pub fn new(p: Option<Rational>, q: Rational, i: usize, j: usize, k: usize) -> Result<Self> {
        let ok = i <= k && k < j && !q.is_negative() && p.as_ref().is_none_or(|p| *p > q) && (p.is_some() || i == 0);
        if !ok {
            return Err(Error::Precondition(format!("invalid lottery: i={i}, k={k}, j={j}")));
        }
        Ok(Self { p, q, i, j, k })
    }

    fn p_or_zero(&self) -> Rational {
        self.p.clone().unwrap_or_else(Rational::zero)
    }

    fn interpolate(&self, at_i: Rational, at_j: Rational, k: usize) -> Rational {
        let (i, j, k) = (int(self.i as i64), int(self.j as i64), int(k as i64));
        ((&j - &k) * at_i + (&k - &i) * at_j) / (j - i)
    }

    /// `L(i) = p·i`.
    pub fn l_i(&self) -> Rational {
        self.p_or_zero() * int(self.i as i64)
    }

    /// `L(j) = q·j`.
    pub fn l_j(&self) -> Rational {
        &self.q * int(self.j as i64)
    }

    /// The line through `(i, L(i))` and `(j, L(j))`.
    pub fn l(&self, k: usize) -> Rational {
        self.interpolate(self.l_i(), self.l_j(), k)
    }

    /// Revenue of the lottery when `k` units are sold.
    pub fn rsem(&self, k: usize) -> Rational {
        r_hat(&self.p_or_zero(), &self.q, self.i, self.j, k)
    }

    /// `H(j) = qjλ`, `H(i) = min(piλ, H(j))`, linear in between.
    pub fn h(&self, k: usize, lambda: &Rational) -> Rational {
        let hj = self.l_j() * lambda;
        let hi = (self.l_i() * lambda).min(hj.clone());
        self.interpolate(hi, hj, k)
    }

    /// Whether `L` is nondecreasing on `[i, j]`.
    pub fn increasing(&self) -> bool {
        self.l_i() <= self.l_j()
    }
}

/// The lottery of a `k`-unit sampling auction on `v` under `partition`, or `None` when the
/// `(k+1)`-st market agent is absent or has nonpositive `φ̄^S` (a plain posted price).
pub fn pq_quantities(v: &ValuationProfile, k: usize, partition: &Partition) -> Result<Option<PQLottery>> {
    if partition.n() != v.n() {
        return Err(Error::Precondition("partition and profile sizes differ".into()));
    }
    let sample = v.restricted(&partition.in_sample().to_vec());
    let phi = crate::curves::virtual_valuation(&sample);
    let market: Vec<Rational> = v.values().iter().zip(v.ids()).filter(|(_, &id)| !partition.is_sample(id)).map(|(x, _)| x.clone()).collect();
    let Some(pivot) = market.get(k) else { return Ok(None) };
    let level = phi.phi_bar_at(pivot)?;
    if !level.is_positive() {
        return Ok(None);
    }
    let (q, p) = class_bounds(&phi, &level);
    let i = p.as_ref().map_or(0, |p| market.iter().filter(|x| *x >= p).count());
    let j = market.iter().filter(|x| **x >= q).count();
    Ok(Some(PQLottery::new(p, q, i, j, k)?))
}

/// Lowest value with `φ̄ = level` and the lowest value above it with a larger `φ̄`.
fn class_bounds(phi: &VirtualValuation, level: &Rational) -> (Rational, Option<Rational>) {
    let b = phi.breakpoints();
    let seg = phi.phi_bar_segments();
    // segment s (1-based) covers [b[s-1], b[s-2])
    let members: Vec<usize> = (1..=b.len()).filter(|&s| seg[s - 1] == *level).collect();
    let lowest = *members.last().expect("level occurs");
    let highest = members[0];
    let q = b[lowest - 1].clone();
    let p = (highest >= 2).then(|| b[highest - 2].clone());
    (q, p)
}

/// The lottery of a realized `k`-unit sampling run.
pub fn pq_from_run(run: &MechanismRun, k: usize) -> Result<Option<PQLottery>> {
    let v = ValuationProfile::from_unsorted(run.reports.clone())?;
    pq_quantities(&v, k, &super::rsem::run_partition(run))
}

/// Imbalance `λ = max_i Y_i/(i − Y_i)` over prefixes with a market agent, where `Y_i`
/// counts sample agents among the top `i`.
pub fn imbalance(v: &ValuationProfile, partition: &Partition) -> Rational {
    let mut y = 0i64;
    let mut best = Rational::zero();
    for (idx, &id) in v.ids().iter().enumerate() {
        if partition.is_sample(id) {
            y += 1;
        }
        let m = idx as i64 + 1 - y;
        if m > 0 {
            best = best.max(int(y) / int(m));
        }
    }
    best
}

/// `IR^S(k)`, the sample's ironed revenue after `k` sales.
pub fn sample_ironed_revenue(v: &ValuationProfile, partition: &Partition, k: usize) -> Rational {
    let c = build_curve(&v.restricted(&partition.in_sample().to_vec()));
    c.ir()[k.min(v.n())].clone()
}
