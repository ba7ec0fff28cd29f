//! Envy-free payments, envy-free revenue and the envy-free optimal outcome.
//!
//! Allocations here are indexed by rank (position in the sorted profile), so
//! `x[0]` belongs to the highest-valued agent.

mod brute;

pub use brute::{brute_force_efo, BruteForce, BRUTE_FORCE_LIMIT};

use num_traits::{Signed, Zero};
use rand::SeedableRng;

use crate::curves::{build_curve, virtual_valuation, VirtualValuation};
use crate::environment::{random_permutation, Environment};
use crate::error::{Error, Result};
use crate::maximizer::{expected_service, Ties, EXACT_PERMUTATION_LIMIT};
use crate::outcome::{Allocation, Outcome};
use crate::profile::ValuationProfile;
use crate::rational::{int, Rational};

/// Monte Carlo permutations used by [`efo`] above the exact limit.
pub const DEFAULT_EFO_TRIALS: usize = 2_000;

pub fn is_swap_monotone(x: &Allocation, v: &ValuationProfile) -> bool {
    x.len() == v.n() && x.is_swap_monotone()
}

fn check_swap_monotone(x: &Allocation, v: &ValuationProfile) -> Result<()> {
    if x.len() != v.n() {
        return Err(Error::Precondition(format!("allocation has {} entries for {} agents", x.len(), v.n())));
    }
    if let Some(i) = x.probs().windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::NotSwapMonotone(i + 1));
    }
    Ok(())
}

/// Largest envy-free payments: `p_i = Σ_{j ≥ i} v_j (x_j − x_{j+1})`.
pub fn ef_payments(x: &Allocation, v: &ValuationProfile) -> Result<Outcome> {
    check_swap_monotone(x, v)?;
    let (xs, vs) = (x.probs(), v.values());
    let n = xs.len();
    let mut p = vec![Rational::zero(); n];
    let mut acc = Rational::zero();
    for i in (0..n).rev() {
        let next = xs.get(i + 1).cloned().unwrap_or_else(Rational::zero);
        acc += &vs[i] * (&xs[i] - next);
        p[i] = acc.clone();
    }
    Outcome::new(x.clone(), p, vs)
}

/// `Σ R(i)(x_i − x_{i+1})`.
pub fn ef_revenue(x: &Allocation, v: &ValuationProfile) -> Result<Rational> {
    check_swap_monotone(x, v)?;
    let xs = x.probs();
    let mut total = Rational::zero();
    for (i, vi) in v.values().iter().enumerate() {
        let next = xs.get(i + 1).cloned().unwrap_or_else(Rational::zero);
        let d = &xs[i] - next;
        if !d.is_zero() {
            total += vi * int(i as i64 + 1) * d;
        }
    }
    Ok(total)
}

/// How expectations over role permutations are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
    /// Exact up to the permutation limit, Monte Carlo above it.
    Auto { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Efo {
    /// Outcome in rank order.
    pub outcome: Outcome,
    pub revenue: Rational,
    /// Standard error of the revenue when permutations were sampled.
    pub stderr: Option<f64>,
}

/// Envy-free optimal outcome with randomly broken ties (exact in expectation).
pub fn efo(env: &Environment, v: &ValuationProfile, seed: u64) -> Result<Efo> {
    efo_with(env, v, Expectation::Auto { trials: DEFAULT_EFO_TRIALS, seed })
}

pub fn efo_with(env: &Environment, v: &ValuationProfile, mode: Expectation) -> Result<Efo> {
    if !env.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    if env.n() != v.n() {
        return Err(Error::Precondition(format!("environment has {} agents, profile {}", env.n(), v.n())));
    }
    let vv = virtual_valuation(v);
    let ranks = v.ranks();
    let scores: Vec<Option<Rational>> = ranks.iter().map(|&r| Some(vv.at_ranks()[r].clone())).collect();
    let n = v.n();
    let sampled = match mode {
        Expectation::Exact => None,
        Expectation::MonteCarlo { trials, seed } => Some((trials, seed)),
        Expectation::Auto { trials, seed } => {
            (env.is_permuted() && !env.is_symmetric_kind() && n > EXACT_PERMUTATION_LIMIT).then_some((trials, seed))
        }
    };
    let (by_id, stderr) = match sampled {
        Some((trials, seed)) if env.is_permuted() && !env.is_symmetric_kind() => {
            sampled_service(env, &scores, v, trials.max(2), seed)?
        }
        _ => (expected_service(env, &scores, Ties::default())?, None),
    };
    let by_rank: Vec<Rational> = v.ids().iter().map(|&id| by_id[id].clone()).collect();
    let x = Allocation::new(class_average(&by_rank, vv.at_ranks()))?;
    let outcome = ef_payments(&x, v)?;
    let revenue = ef_revenue(&x, v)?;
    Ok(Efo { outcome, revenue, stderr })
}

/// Averages `x` over runs of equal `classes` values.
pub fn class_average(x: &[Rational], classes: &[Rational]) -> Vec<Rational> {
    let mut out = x.to_vec();
    let mut i = 0;
    while i < x.len() {
        let mut j = i;
        while j < x.len() && classes[j] == classes[i] {
            j += 1;
        }
        if j - i > 1 {
            let avg = x[i..j].iter().fold(Rational::zero(), |s, a| s + a) / int((j - i) as i64);
            for o in &mut out[i..j] {
                *o = avg.clone();
            }
        }
        i = j;
    }
    out
}

fn sampled_service(
    env: &Environment,
    scores: &[Option<Rational>],
    v: &ValuationProfile,
    trials: usize,
    seed: u64,
) -> Result<(Vec<Rational>, Option<f64>)> {
    let n = env.n();
    let curve = build_curve(v);
    let mut acc = vec![Rational::zero(); n];
    let mut revs = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, t as u64));
        let pi = random_permutation(n, &mut rng);
        let x = expected_service(env, scores, Ties { roles: Some(&pi), priority: None })?;
        // revenue of this draw after class averaging, for the error bar
        let by_rank: Vec<Rational> = v.ids().iter().map(|&id| x[id].clone()).collect();
        let vv = virtual_valuation(v);
        let xr = class_average(&by_rank, vv.at_ranks());
        let rev = (0..n).fold(Rational::zero(), |s, i| {
            let next = xr.get(i + 1).cloned().unwrap_or_else(Rational::zero);
            s + &curve.r()[i + 1] * (&xr[i] - next)
        });
        revs.push(crate::rational::to_f64(&rev));
        for (a, b) in acc.iter_mut().zip(&x) {
            *a += b;
        }
    }
    let d = int(trials as i64);
    let mean: Vec<Rational> = acc.into_iter().map(|a| a / &d).collect();
    Ok((mean, Some(crate::analysis::stats::mean_stderr(&revs).1)))
}

/// `EFO(v⁽²⁾)`.
pub fn efo_benchmark2(env: &Environment, v: &ValuationProfile) -> Result<Rational> {
    Ok(efo(env, &v.second_price_profile(), crate::seed::default_seed())?.revenue)
}

/// Effective and perceived revenue curves of a profile under a foreign `φ̄`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveCurves {
    /// `ER(0..=n)`.
    pub er: Vec<Rational>,
    /// `R̂(0..=n)`.
    pub r_hat: Vec<Rational>,
    /// `v̂_i = R̂(i)/i` for `i = 1..=n`.
    pub v_hat: Vec<Rational>,
    /// Class boundaries `n_1 < n_2 < … < n_t` of equal nonnegative `φ̄`.
    pub class_ends: Vec<usize>,
}

pub fn effective_curves(v: &ValuationProfile, phi_bar_s: &VirtualValuation) -> Result<EffectiveCurves> {
    let n = v.n();
    let vals = v.values();
    let phis: Vec<Rational> = vals.iter().map(|x| phi_bar_s.phi_bar_at(x)).collect::<Result<_>>()?;
    let r: Vec<Rational> = (0..=n).map(|i| if i == 0 { Rational::zero() } else { &vals[i - 1] * int(i as i64) }).collect();
    let mut class_ends = Vec::new();
    let mut i = 0;
    while i < n && !phis[i].is_negative() {
        let mut j = i;
        while j < n && phis[j] == phis[i] {
            j += 1;
        }
        class_ends.push(j);
        i = j;
    }
    let mut er = vec![Rational::zero(); n + 1];
    let mut start = 0usize;
    for &end in &class_ends {
        let slope = (&r[end] - &r[start]) / int((end - start) as i64);
        for t in start..=end {
            er[t] = &r[start] + &slope * int((t - start) as i64);
        }
        start = end;
    }
    for t in start + 1..=n {
        er[t] = er[start].clone();
    }
    let mut r_hat = vec![Rational::zero(); n + 1];
    for t in 1..=n {
        r_hat[t] = &r_hat[t - 1] + &phis[t - 1];
    }
    let v_hat = (1..=n).map(|t| &r_hat[t] / int(t as i64)).collect();
    Ok(EffectiveCurves { er, r_hat, v_hat, class_ends })
}

/// Envy-free revenue by agent rank of the `φ̄`-maximizer on `v` in `env`
/// (expected allocation, rank order).
pub fn foreign_allocation(env: &Environment, v: &ValuationProfile, phi_bar: &VirtualValuation) -> Result<Allocation> {
    let by_id = v.by_id();
    let scores: Vec<Option<Rational>> = by_id.iter().map(|x| phi_bar.phi_bar_at(x).map(Some)).collect::<Result<_>>()?;
    let x = expected_service(env, &scores, Ties::default())?;
    Allocation::new(v.ids().iter().map(|&id| x[id].clone()).collect())
}
