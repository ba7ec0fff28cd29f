//! Random sampling empirical Myerson auctions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rand::RngCore;

use crate::curves::{virtual_valuation, VirtualValuation};
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::incentive::{all_flips, random_flips, threshold_payment, Coins, Mechanism, MechanismRun};
use crate::maximizer::{expected_service, Ties};
use crate::outcome::Partition;
use crate::profile::ValuationProfile;
use crate::rational::Rational;

/// Largest `n` for which all `2^n` partitions are enumerated.
pub const EXACT_PARTITION_LIMIT: usize = 12;

/// Fair-coin partition; the side holding the top reporter is the market, priced by the
/// ironed virtual values of the other side.
///
/// With `prime` set, the maximizer runs over all agents and only market winners are
/// served. Sample agents always lose and pay nothing.
#[derive(Debug, Clone)]
pub struct Rsem {
    pub env: Environment,
    pub prime: bool,
    cache: SampleCache,
}

const SAMPLE_CACHE_LIMIT: usize = 1 << 12;

/// Memoized `φ̄` of sample-side reports.
#[derive(Debug, Default)]
struct SampleCache(Mutex<HashMap<Vec<Rational>, Arc<VirtualValuation>>>);

impl Clone for SampleCache {
    fn clone(&self) -> Self {
        Self::default()
    }
}

impl SampleCache {
    fn get(&self, sample: Vec<Rational>) -> Result<Arc<VirtualValuation>> {
        let mut map = self.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(phi) = map.get(&sample) {
            return Ok(phi.clone());
        }
        let phi = Arc::new(virtual_valuation(&ValuationProfile::from_unsorted(sample.clone())?));
        if map.len() >= SAMPLE_CACHE_LIMIT {
            map.clear();
        }
        map.insert(sample, phi.clone());
        Ok(phi)
    }
}

/// How a coin vector splits the reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub partition: Partition,
    /// `φ̄` of the reports with the market zeroed.
    pub phi_sample: Arc<VirtualValuation>,
}

impl Rsem {
    pub fn new(env: Environment) -> Self {
        Self { env, prime: false, cache: SampleCache::default() }
    }

    pub fn prime(env: Environment) -> Self {
        Self { env, prime: true, cache: SampleCache::default() }
    }

    /// Market side and sample virtual values for `flips`.
    pub fn split(&self, reports: &[Rational], flips: &[bool]) -> Result<Split> {
        let n = reports.len();
        if flips.len() != n {
            return Err(Error::Precondition(format!("expected {n} coin flips, got {}", flips.len())));
        }
        let top = (0..n).fold(0, |b, a| if reports[a] > reports[b] { a } else { b });
        let in_sample: Vec<bool> = flips.iter().map(|&f| f != flips[top]).collect();
        let sample_values: Vec<Rational> =
            (0..n).map(|a| if in_sample[a] { reports[a].clone() } else { Rational::zero() }).collect();
        let phi_sample = self.cache.get(sample_values)?;
        Ok(Split { partition: Partition::new(in_sample), phi_sample })
    }
}

impl Mechanism for Rsem {
    fn name(&self) -> String {
        if self.prime { "rsem-prime".into() } else { "rsem".into() }
    }

    fn n(&self) -> usize {
        self.env.n()
    }

    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let s = self.split(reports, &coins.flips)?;
        let n = reports.len();
        let scores: Vec<Option<Rational>> = (0..n)
            .map(|a| {
                if !self.prime && s.partition.is_sample(a) {
                    Ok(None)
                } else {
                    s.phi_sample.phi_bar_at(&reports[a]).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        let ties = Ties { roles: coins.roles.as_deref(), priority: coins.priority.as_deref() };
        let mut x = expected_service(&self.env, &scores, ties)?;
        for (a, xa) in x.iter_mut().enumerate() {
            if s.partition.is_sample(a) {
                *xa = Rational::zero();
            }
        }
        Ok(x)
    }

    fn allocate_one(&self, reports: &[Rational], coins: &Coins, agent: usize) -> Result<Rational> {
        let n = reports.len();
        if coins.flips.len() == n {
            let top = (0..n).fold(0, |b, a| if reports[a] > reports[b] { a } else { b });
            if coins.flips[agent] != coins.flips[top] {
                return Ok(Rational::zero());
            }
        }
        Ok(self.allocate(reports, coins)?.swap_remove(agent))
    }

    /// Threshold payments; losers of a monotone rule pay nothing, so only winners are traced.
    fn payments(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let x = self.allocate(reports, coins)?;
        (0..self.n())
            .map(|a| if x[a].is_zero() { Ok(Rational::zero()) } else { threshold_payment(self, reports, coins, a) })
            .collect()
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        let n = self.n();
        (n <= EXACT_PARTITION_LIMIT).then(|| all_flips(n).into_iter().map(|(f, p)| (Coins::with_flips(f), p)).collect())
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        Coins::with_flips(random_flips(self.n(), rng))
    }
}

fn run_with_seed(m: &Rsem, v: &ValuationProfile, seed: u64) -> Result<MechanismRun> {
    if m.n() != v.n() {
        return Err(Error::Precondition(format!("environment has {} agents, profile {}", m.n(), v.n())));
    }
    let coins = m.draw_coins(&mut crate::seed::rng(seed));
    crate::incentive::run(m, &v.by_id(), coins)
}

/// One realized run of the sampling auction.
pub fn rsem(env: &Environment, v: &ValuationProfile, seed: u64) -> Result<MechanismRun> {
    run_with_seed(&Rsem::new(env.clone()), v, seed)
}

/// One realized run of the variant that optimizes over all agents.
pub fn rsem_prime(env: &Environment, v: &ValuationProfile, seed: u64) -> Result<MechanismRun> {
    run_with_seed(&Rsem::prime(env.clone()), v, seed)
}

/// Partition of a run's coins into sample and market.
pub fn run_partition(run: &MechanismRun) -> Partition {
    let n = run.coins.flips.len();
    let top = (0..n).fold(0, |b, a| if run.reports[a] > run.reports[b] { a } else { b });
    Partition::new(run.coins.flips.iter().map(|&f| f != run.coins.flips[top]).collect())
}

/// Exact expected revenue over all partitions.
pub fn expected_rsem_revenue(env: &Environment, v: &ValuationProfile, prime: bool) -> Result<Rational> {
    let m = if prime { Rsem::prime(env.clone()) } else { Rsem::new(env.clone()) };
    if m.n() > EXACT_PARTITION_LIMIT {
        return Err(Error::SizeLimit { n: m.n(), limit: EXACT_PARTITION_LIMIT, what: "partition enumeration" });
    }
    crate::incentive::expected_revenue(&m, &v.by_id())
}
