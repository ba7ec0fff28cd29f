//! `k`-unit auctions from digital-good auctions.

use num_traits::{One, Signed, Zero};
use rand::RngCore;

use super::digital::DigitalGoodAuction;
use crate::error::{Error, Result};
use crate::incentive::{all_flips, random_flips, Coins, Mechanism, MechanismRun, PaymentRule};
use crate::profile::ValuationProfile;
use crate::rational::Rational;

/// Simulates `k`-unit Vickrey, runs the digital-good auction on its winners, and serves the
/// agents winning both at the larger of the two prices.
pub struct MultiUnitReduction<D> {
    pub auction: D,
    pub k: usize,
    pub n: usize,
}

/// Both simulated stages of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stages {
    /// Vickrey winners, by id.
    pub winners: Vec<usize>,
    /// Highest losing report (the Vickrey price), 0 if nobody lost.
    pub vickrey_price: Rational,
    /// Digital-good outcome of each winner, aligned with `winners`.
    pub served: Vec<bool>,
    pub dg_prices: Vec<Rational>,
}

impl<D: DigitalGoodAuction> MultiUnitReduction<D> {
    pub fn new(auction: D, k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidEnvironment(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
        }
        Ok(Self { auction, k, n })
    }

    pub fn stages(&self, reports: &[Rational], flips: &[bool]) -> Result<Stages> {
        if reports.len() != self.n || flips.len() != self.n {
            return Err(Error::Precondition(format!("expected {} reports and coin flips", self.n)));
        }
        let mut order: Vec<usize> = (0..self.n).filter(|&a| reports[a].is_positive()).collect();
        order.sort_by(|&a, &b| reports[b].cmp(&reports[a]).then(a.cmp(&b)));
        let cut = order.len().min(self.k);
        let mut winners = order[..cut].to_vec();
        winners.sort_unstable();
        let vickrey_price = order.get(cut).map(|&a| reports[a].clone()).unwrap_or_else(Rational::zero);
        let sub_reports: Vec<Rational> = winners.iter().map(|&a| reports[a].clone()).collect();
        let sub_flips: Vec<bool> = winners.iter().map(|&a| flips[a]).collect();
        let (served, dg_prices) = self.auction.outcome(&sub_reports, &sub_flips);
        Ok(Stages { winners, vickrey_price, served, dg_prices })
    }
}

impl<D: DigitalGoodAuction> Mechanism for MultiUnitReduction<D> {
    fn name(&self) -> String {
        format!("mu-reduction({})", self.auction.name())
    }

    fn n(&self) -> usize {
        self.n
    }

    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let s = self.stages(reports, &coins.flips)?;
        let mut x = vec![Rational::zero(); self.n];
        for (t, &a) in s.winners.iter().enumerate() {
            if s.served[t] {
                x[a] = Rational::one();
            }
        }
        Ok(x)
    }

    fn payment_rule(&self) -> PaymentRule {
        PaymentRule::Custom
    }

    fn payments(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let s = self.stages(reports, &coins.flips)?;
        let mut p = vec![Rational::zero(); self.n];
        for (t, &a) in s.winners.iter().enumerate() {
            if s.served[t] {
                p[a] = s.vickrey_price.clone().max(s.dg_prices[t].clone());
            }
        }
        Ok(p)
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        (self.n <= 12).then(|| all_flips(self.n).into_iter().map(|(f, p)| (Coins::with_flips(f), p)).collect())
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        Coins::with_flips(random_flips(self.n, rng))
    }
}

/// One realized run of the reduction.
pub fn multi_unit_reduction<D: DigitalGoodAuction>(auction: D, k: usize, v: &ValuationProfile, seed: u64) -> Result<MechanismRun> {
    let m = MultiUnitReduction::new(auction, k, v.n())?;
    let coins = m.draw_coins(&mut crate::seed::rng(seed));
    crate::incentive::run(&m, &v.by_id(), coins)
}
