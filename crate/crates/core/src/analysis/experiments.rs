//! Benchmarks, approximation-ratio experiments and the exact checks of the balance chain.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng as _;

use super::partition::{dominance_holds, is_balanced, ranked_partition};
use super::runner::parallel_trials;
use super::Mode;
use crate::curves::{build_curve, virtual_valuation};
use crate::environment::{Environment, Kind};
use crate::envyfree::{ef_payments, efo_benchmark2, efo_with, foreign_allocation, Expectation};
use crate::error::{Error, Result};
use crate::incentive::{expected_revenue, ic_revenue_exact, Mechanism};
use crate::maximizer::{expected_service, Ties};
use crate::mechanisms::vcgr_benchmark;
use crate::outcome::Partition;
use crate::profile::ValuationProfile;
use crate::rational::{int, q, sum, to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Efo2,
    Efo,
    Vcgr,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::Efo2, Benchmark::Efo, Benchmark::Vcgr];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Efo2 => "efo2",
            Benchmark::Efo => "efo",
            Benchmark::Vcgr => "vcgr",
        }
    }

    pub fn value(self, env: &Environment, v: &ValuationProfile) -> Result<Rational> {
        match self {
            Benchmark::Efo2 => efo_benchmark2(env, v),
            Benchmark::Efo => Ok(crate::envyfree::efo(env, v, crate::seed::default_seed())?.revenue),
            Benchmark::Vcgr => vcgr_benchmark(env, v),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown { what: "benchmark (efo2, efo, vcgr)", name: s.into() })
    }
}

/// The composite approximation factor `2 · 4/3 · 4.68` of the `k`-unit sampling auction.
pub fn rsem_factor() -> Rational {
    int(2) * q(4, 3) * super::partition::ams_constant()
}

/// Approximation factor of the variant on downward-closed permutation environments.
pub fn rsem_prime_factor() -> Rational {
    int(189)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub mechanism: String,
    pub benchmark: Benchmark,
    pub benchmark_value: Rational,
    /// Expected revenue when computed exactly.
    pub exact_revenue: Option<Rational>,
    pub mean_revenue: f64,
    pub trials: usize,
    /// `E[revenue] / benchmark`.
    pub ratio: f64,
    pub stderr: f64,
}

impl RatioReport {
    /// Whether the ratio clears `1/factor`; sampled ratios get three standard errors.
    pub fn clears(&self, factor: &Rational) -> bool {
        if self.benchmark_value.is_zero() {
            return true;
        }
        match &self.exact_revenue {
            Some(r) => r * factor >= self.benchmark_value,
            None => self.ratio + 3.0 * self.stderr >= 1.0 / to_f64(factor),
        }
    }
}

/// `E[revenue of mech]/benchmark(v)`, exact over the coin space or sampled.
pub fn ratio_experiment(
    mech: &dyn Mechanism,
    env: &Environment,
    v: &ValuationProfile,
    benchmark: Benchmark,
    mode: Mode,
    workers: usize,
) -> Result<RatioReport> {
    if mech.n() != v.n() || env.n() != v.n() {
        return Err(Error::Precondition("mechanism, environment and profile sizes differ".into()));
    }
    let b = benchmark.value(env, v)?;
    let bf = to_f64(&b);
    let reports = v.by_id();
    let (exact, mean, se, trials) = match mode {
        Mode::Exact => {
            let r = expected_revenue(mech, &reports)?;
            let f = to_f64(&r);
            (Some(r), f, 0.0, 0)
        }
        Mode::MonteCarlo { trials, seed } => {
            if trials < 2 {
                return Err(Error::Precondition("need at least two trials".into()));
            }
            let failed = std::sync::Mutex::new(None);
            let s = parallel_trials(trials, seed, workers, |rng| {
                let coins = mech.draw_coins(rng);
                match mech.payments(&reports, &coins) {
                    Ok(p) => to_f64(&sum(&p)),
                    Err(e) => {
                        failed.lock().expect("lock").get_or_insert(e);
                        f64::NAN
                    }
                }
            });
            if let Some(e) = failed.into_inner().expect("lock") {
                return Err(e);
            }
            (None, s.mean, s.stderr, trials)
        }
    };
    let (ratio, stderr) = if bf == 0.0 { (f64::INFINITY, 0.0) } else { (mean / bf, se / bf) };
    Ok(RatioReport {
        mechanism: mech.name(),
        benchmark,
        benchmark_value: b,
        exact_revenue: exact,
        mean_revenue: mean,
        trials,
        ratio,
        stderr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub efo: Rational,
    pub efo2: Rational,
    pub vcgr: Rational,
    /// `EFO ≤ 2·VCGr`, for digital-good and `k`-unit environments.
    pub efo_within_twice_vcgr: Option<bool>,
    pub splits_checked: usize,
    /// `EFO(v_S) + EFO(v_M) ≥ EFO(v)` on every split.
    pub subadditive: bool,
    /// `EFO⁽²⁾ ≥ s·v₂`, where `s` is the best service probability of a lone agent
    /// (`s = 1` unless no agent can be served for sure).
    pub efo2_above_second_value: bool,
}

fn exact_efo(env: &Environment, v: &ValuationProfile) -> Result<Rational> {
    Ok(efo_with(env, v, Expectation::Exact)?.revenue)
}

pub fn benchmark_bounds(env: &Environment, v: &ValuationProfile, splits: usize, seed: u64) -> Result<BoundsReport> {
    let efo = exact_efo(env, v)?;
    let efo2 = exact_efo(env, &v.second_price_profile())?;
    let vcgr = vcgr_benchmark(env, v)?;
    let efo_within_twice_vcgr = matches!(env.kind(), Kind::MultiUnit { .. } | Kind::DigitalGood).then(|| efo <= int(2) * &vcgr);
    let mut rng = crate::seed::rng(seed);
    let mut subadditive = true;
    for _ in 0..splits {
        let keep: Vec<bool> = (0..v.n()).map(|_| rng.gen_bool(0.5)).collect();
        let other: Vec<bool> = keep.iter().map(|k| !k).collect();
        let s = exact_efo(env, &v.restricted(&keep))?;
        let m = exact_efo(env, &v.restricted(&other))?;
        subadditive &= s + m >= efo;
    }
    let v2 = v.v(2).unwrap_or_else(|_| Rational::zero());
    Ok(BoundsReport {
        efo2_above_second_value: efo2 >= lone_service(env)? * v2,
        efo,
        efo2,
        vcgr,
        efo_within_twice_vcgr,
        splits_checked: splits,
        subadditive,
    })
}

/// Largest probability with which one agent can be served when nobody else is.
pub fn lone_service(env: &Environment) -> Result<Rational> {
    let n = env.n();
    let mut best = Rational::zero();
    for a in 0..n {
        let scores: Vec<Option<Rational>> = (0..n).map(|b| (b == a).then(|| int(1))).collect();
        best = best.max(expected_service(env, &scores, Ties::default())?.swap_remove(a));
    }
    Ok(best)
}

/// Closed form of `EFO/VCGr` on `v = (k, 1, …, 1)` with `k` units among `n` agents.
pub fn tight_family_ratio(n: usize, k: usize) -> Rational {
    let (n, k) = (int(n as i64), int(k as i64));
    ((&n - &k) * &k / (&n - int(1)) + (&k - int(1)) * &n / (&n - int(1))) / k
}

pub fn tight_family(n: usize, k: usize) -> Result<(Environment, ValuationProfile)> {
    let mut vals = vec![int(1); n];
    vals[0] = int(k as i64);
    Ok((Environment::multi_unit(n, k)?, ValuationProfile::new(vals)?))
}

pub const CHAIN_LIMIT: usize = 6;

/// The four links of the balance chain for the market/sample split `part` (by agent id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainReport {
    /// `IC^S_M(v_N)`: threshold revenue from the market of the `φ̄^S` maximizer over all agents.
    pub ic_market: Rational,
    /// `EF^S_M(v_N)`.
    pub ef_market: Rational,
    /// `EF^S_N(v_N)`.
    pub ef_all: Rational,
    /// `EFO(v_S)`.
    pub efo_sample: Rational,
    /// `IC ≥ EF/2`, `EF_M ≥ EF_N/4`, `EF_N ≥ EFO(v_S)/4`, `IC ≥ EFO(v_S)/32`.
    pub links: [bool; 4],
    /// Prefix-quarter dominance of the market on the envy-free payments.
    pub dominance: bool,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.links.iter().all(|&l| l) && self.dominance
    }
}

pub fn balance_chain_check(env: &Environment, v: &ValuationProfile, part: &Partition) -> Result<ChainReport> {
    let n = v.n();
    if n > CHAIN_LIMIT {
        return Err(Error::SizeLimit { n, limit: CHAIN_LIMIT, what: "exact balance chain" });
    }
    if env.n() != n || part.n() != n {
        return Err(Error::Precondition("environment, profile and partition sizes differ".into()));
    }
    let ranked = ranked_partition(v, part);
    if !is_balanced(&ranked) {
        return Err(Error::Precondition("partition is not balanced".into()));
    }
    let sample = v.restricted(part.in_sample());
    let phi = virtual_valuation(&sample);
    let (ic, _) = ic_revenue_exact(env, &phi, v)?;
    let ic_market: Rational = part.market().iter().map(|&a| &ic[a]).sum();
    let x = foreign_allocation(env, v, &phi)?;
    let ef = ef_payments(&x, v)?.payments;
    let ef_all = sum(&ef);
    let ef_market: Rational = (0..n).filter(|&r| !ranked.is_sample(r)).map(|r| &ef[r]).sum();
    let efo_sample = exact_efo(env, &sample)?;
    let links = [
        int(2) * &ic_market >= ef_market,
        int(4) * &ef_market >= ef_all,
        int(4) * &ef_all >= efo_sample,
        int(32) * &ic_market >= efo_sample,
    ];
    let dominance = dominance_holds(&ranked, &ef);
    Ok(ChainReport { ic_market, ef_market, ef_all, efo_sample, links, dominance })
}

/// `E[EFO(v_S) | balanced]` over all partitions with the top agent in the market, and
/// `EFO⁽²⁾(v)/2`.
pub fn conditional_sample_bound(env: &Environment, v: &ValuationProfile) -> Result<(Rational, Rational)> {
    let n = v.n();
    if n > CHAIN_LIMIT {
        return Err(Error::SizeLimit { n, limit: CHAIN_LIMIT, what: "exact balance chain" });
    }
    let mut total = Rational::zero();
    let mut count = 0i64;
    for mask in 0u64..(1 << n.saturating_sub(1)) {
        let by_rank: Vec<bool> = (0..n).map(|r| r > 0 && mask >> (r - 1) & 1 == 1).collect();
        if !is_balanced(&Partition::new(by_rank.clone())) {
            continue;
        }
        let mut keep = vec![false; n];
        for (r, &id) in v.ids().iter().enumerate() {
            keep[id] = by_rank[r];
        }
        total += exact_efo(env, &v.restricted(&keep))?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Precondition("no balanced partition exists for this many agents".into()));
    }
    Ok((total / int(count), efo_benchmark2(env, v)? / int(2)))
}

/// `ER(i) ≥ IR^S(i)` for all `i`, with `φ̄^S` from `v_S`.
pub fn effective_dominance(v: &ValuationProfile, part: &Partition) -> Result<bool> {
    let sample = v.restricted(part.in_sample());
    let c = crate::envyfree::effective_curves(v, &virtual_valuation(&sample))?;
    let irs = build_curve(&sample);
    Ok((1..=v.n()).all(|i| c.er[i] >= irs.ir()[i]))
}

/// Whether the `φ̄^S` maximizer on `v` and the self-`φ̄` maximizer on `v̂` allocate alike
/// (by rank), with negative `v̂` entries clamped to zero.
pub fn v_hat_identity(env: &Environment, v: &ValuationProfile, part: &Partition) -> Result<bool> {
    let phi = virtual_valuation(&v.restricted(part.in_sample()));
    let c = crate::envyfree::effective_curves(v, &phi)?;
    let x = foreign_allocation(env, v, &phi)?;
    let v_hat: Vec<Rational> = c.v_hat.iter().map(crate::rational::pos).collect();
    let vh = ValuationProfile::new(v_hat)?;
    let y = foreign_allocation(env, &vh, &virtual_valuation(&vh))?;
    Ok(x == y)
}
