//! Digital-good auctions: unlimited supply, any set of agents may be served.

use num_traits::{One, Signed, Zero};
use rand::RngCore;

use crate::error::Result;
use crate::incentive::{all_flips, random_flips, Coins, Mechanism, PaymentRule};
use crate::rational::{int, Rational};

pub trait DigitalGoodAuction: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether truthful reporting is dominant.
    fn truthful(&self) -> bool;

    /// Who is served and what each served agent pays, for one coin flip per agent.
    fn outcome(&self, reports: &[Rational], flips: &[bool]) -> (Vec<bool>, Vec<Rational>);
}

/// The revenue-maximizing single price for `values` (the highest among equally good
/// prices), or `None` if no value is positive.
pub fn optimal_price(values: &[Rational]) -> Option<Rational> {
    let mut sorted: Vec<&Rational> = values.iter().filter(|x| x.is_positive()).collect();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut best: Option<(Rational, Rational)> = None;
    for (i, v) in sorted.iter().enumerate() {
        let rev = *v * int(i as i64 + 1);
        if best.as_ref().is_none_or(|(b, _)| rev > *b) {
            best = Some((rev, (*v).clone()));
        }
    }
    best.map(|(_, p)| p)
}

/// Posts the optimal price of the reports themselves. Not truthful; used as a benchmark
/// oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct OptimalPrice;

impl DigitalGoodAuction for OptimalPrice {
    fn name(&self) -> &'static str {
        "optimal-price"
    }

    fn truthful(&self) -> bool {
        false
    }

    fn outcome(&self, reports: &[Rational], _flips: &[bool]) -> (Vec<bool>, Vec<Rational>) {
        let n = reports.len();
        match optimal_price(reports) {
            Some(p) => {
                let served: Vec<bool> = reports.iter().map(|r| *r >= p).collect();
                let pay = served.iter().map(|&s| if s { p.clone() } else { Rational::zero() }).collect();
                (served, pay)
            }
            None => (vec![false; n], vec![Rational::zero(); n]),
        }
    }
}

/// Random sampling optimal price: each side is offered the other side's optimal price.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rsop;

impl DigitalGoodAuction for Rsop {
    fn name(&self) -> &'static str {
        "rsop"
    }

    fn truthful(&self) -> bool {
        true
    }

    fn outcome(&self, reports: &[Rational], flips: &[bool]) -> (Vec<bool>, Vec<Rational>) {
        let side = |s: bool| -> Vec<Rational> {
            reports.iter().zip(flips).filter(|(_, &f)| f == s).map(|(r, _)| r.clone()).collect()
        };
        let prices = [optimal_price(&side(true)), optimal_price(&side(false))];
        let mut served = Vec::with_capacity(reports.len());
        let mut pay = Vec::with_capacity(reports.len());
        for (r, &f) in reports.iter().zip(flips) {
            // an agent on side `f` faces the price of the other side
            match &prices[usize::from(f)] {
                Some(p) if r >= p => {
                    served.push(true);
                    pay.push(p.clone());
                }
                _ => {
                    served.push(false);
                    pay.push(Rational::zero());
                }
            }
        }
        (served, pay)
    }
}

/// A digital-good auction as a mechanism on `n` agents.
pub struct DigitalGoodMechanism<D> {
    pub auction: D,
    pub n: usize,
}

impl<D: DigitalGoodAuction> Mechanism for DigitalGoodMechanism<D> {
    fn name(&self) -> String {
        self.auction.name().into()
    }

    fn n(&self) -> usize {
        self.n
    }

    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let (served, _) = self.auction.outcome(reports, &coins.flips);
        Ok(served.into_iter().map(|s| if s { Rational::one() } else { Rational::zero() }).collect())
    }

    fn payment_rule(&self) -> PaymentRule {
        PaymentRule::Custom
    }

    fn payments(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        Ok(self.auction.outcome(reports, &coins.flips).1)
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        (self.n <= 12).then(|| all_flips(self.n).into_iter().map(|(f, p)| (Coins::with_flips(f), p)).collect())
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        Coins::with_flips(random_flips(self.n, rng))
    }
}
