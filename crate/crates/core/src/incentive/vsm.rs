//! Virtual-surplus maximizers as mechanisms.

use num_traits::{One, Zero};
use rand::RngCore;

use super::{threshold_payment, Coins, Mechanism, MechanismRun};
use crate::curves::{virtual_valuation, VirtualValuation};
use crate::environment::{random_permutation, Environment};
use crate::envyfree::ef_payments;
use crate::error::{Error, Result};
use crate::maximizer::{expected_service, Ties, EXACT_PERMUTATION_LIMIT};
use crate::outcome::Allocation;
use crate::profile::ValuationProfile;
use crate::rational::Rational;

/// How a report becomes a score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreFn {
    /// A fixed ironed virtual valuation, possibly computed from another profile.
    Ivv(VirtualValuation),
    /// The bid itself, eligible only at or above the reserve.
    Bid { reserve: Rational },
}

impl ScoreFn {
    pub fn score(&self, report: &Rational) -> Result<Option<Rational>> {
        match self {
            ScoreFn::Ivv(phi) => phi.phi_bar_at(report).map(Some),
            ScoreFn::Bid { reserve } => Ok((report >= reserve).then(|| report.clone())),
        }
    }

    fn breakpoints(&self) -> Vec<Rational> {
        match self {
            ScoreFn::Ivv(phi) => phi.jump_points(),
            ScoreFn::Bid { reserve } => vec![reserve.clone()],
        }
    }
}

/// Serves a feasible set maximizing the total positive score.
#[derive(Debug, Clone)]
pub struct ScoreMaximizer {
    pub env: Environment,
    pub score: ScoreFn,
}

impl ScoreMaximizer {
    pub fn ivv(env: Environment, phi_bar: VirtualValuation) -> Self {
        Self { env, score: ScoreFn::Ivv(phi_bar) }
    }

    pub fn bids(env: Environment, reserve: Rational) -> Self {
        Self { env, score: ScoreFn::Bid { reserve } }
    }

    pub fn scores(&self, reports: &[Rational]) -> Result<Vec<Option<Rational>>> {
        reports.iter().map(|r| self.score.score(r)).collect()
    }

    fn exact(&self) -> bool {
        !(self.env.is_permuted() && !self.env.is_symmetric_kind() && self.env.n() > EXACT_PERMUTATION_LIMIT)
    }
}

impl Mechanism for ScoreMaximizer {
    fn name(&self) -> String {
        match &self.score {
            ScoreFn::Ivv(_) => "ivv-maximizer".into(),
            ScoreFn::Bid { .. } => "bid-maximizer".into(),
        }
    }

    fn n(&self) -> usize {
        self.env.n()
    }

    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let scores = self.scores(reports)?;
        let ties = Ties { roles: coins.roles.as_deref(), priority: coins.priority.as_deref() };
        expected_service(&self.env, &scores, ties)
    }

    fn extra_breakpoints(&self) -> Vec<Rational> {
        self.score.breakpoints()
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        self.exact().then(|| vec![(Coins::none(), Rational::one())])
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        let n = self.env.n();
        let roles = self.env.is_permuted().then(|| random_permutation(n, &mut &mut *rng));
        let priority = Some(random_permutation(n, &mut &mut *rng));
        Coins { roles, priority, ..Coins::default() }
    }
}

/// Runs the `φ̄`-maximizer on `v` with ties and roles averaged exactly when feasible, and
/// realized from `seed` otherwise.
pub fn run_vsm(env: &Environment, phi_bar: &VirtualValuation, v: &ValuationProfile, seed: u64) -> Result<MechanismRun> {
    check_size(env, v)?;
    let m = ScoreMaximizer::ivv(env.clone(), phi_bar.clone());
    let coins = match m.coin_space() {
        Some(mut space) => space.swap_remove(0).0,
        None => m.draw_coins(&mut crate::seed::rng(seed)),
    };
    super::run(&m, &v.by_id(), coins)
}

fn check_size(env: &Environment, v: &ValuationProfile) -> Result<()> {
    if env.n() != v.n() {
        return Err(Error::Precondition(format!("environment has {} agents, profile {}", env.n(), v.n())));
    }
    Ok(())
}

/// Expected threshold payment of every agent (by id) and their total.
pub fn ic_revenue_exact(env: &Environment, phi_bar: &VirtualValuation, v: &ValuationProfile) -> Result<(Vec<Rational>, Rational)> {
    check_size(env, v)?;
    let m = ScoreMaximizer::ivv(env.clone(), phi_bar.clone());
    if m.coin_space().is_none() {
        return Err(Error::SizeLimit { n: env.n(), limit: EXACT_PERMUTATION_LIMIT, what: "exact IC revenue" });
    }
    let reports = v.by_id();
    let coins = Coins::none();
    let per: Vec<Rational> = (0..env.n()).map(|a| threshold_payment(&m, &reports, &coins, a)).collect::<Result<_>>()?;
    let total = per.iter().fold(Rational::zero(), |s, x| s + x);
    Ok((per, total))
}

/// Per-agent IC and EF revenue of one maximizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcEf {
    /// By agent id.
    pub ic: Vec<Rational>,
    /// By agent id.
    pub ef: Vec<Rational>,
}

impl IcEf {
    pub fn ic_total(&self) -> Rational {
        crate::rational::sum(&self.ic)
    }

    pub fn ef_total(&self) -> Rational {
        crate::rational::sum(&self.ef)
    }
}

/// Compares threshold and envy-free payments of the maximizer whose `φ̄` comes from `v`
/// with the agents in `zero_set` valued at zero.
pub fn compare_ic_ef(env: &Environment, v: &ValuationProfile, zero_set: &[usize]) -> Result<IcEf> {
    check_size(env, v)?;
    let n = v.n();
    if let Some(&a) = zero_set.iter().find(|&&a| a >= n) {
        return Err(Error::IndexOutOfRange { index: a, n });
    }
    let keep: Vec<bool> = (0..n).map(|a| !zero_set.contains(&a)).collect();
    let phi = virtual_valuation(&v.restricted(&keep));
    let (ic, _) = ic_revenue_exact(env, &phi, v)?;
    let m = ScoreMaximizer::ivv(env.clone(), phi);
    let x = m.allocate(&v.by_id(), &Coins::none())?;
    let by_rank: Vec<Rational> = v.ids().iter().map(|&id| x[id].clone()).collect();
    let o = ef_payments(&Allocation::new(by_rank)?, v)?;
    let mut ef = vec![Rational::zero(); n];
    for (rank, &id) in v.ids().iter().enumerate() {
        ef[id] = o.payments[rank].clone();
    }
    Ok(IcEf { ic, ef })
}
