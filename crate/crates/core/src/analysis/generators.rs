//! Instance generators: the lower-bound constructions and random corpora.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::Rng as _;

use super::distribution::{optimal_single_item_revenue, second_price_reserve_revenue, DiscreteDistribution};
use super::runner::{default_workers, parallel_map};
use super::Mode;
use crate::environment::{Environment, EXPLICIT_LIMIT};
use crate::error::{Error, Result};
use crate::profile::ValuationProfile;
use crate::rational::{int, q, to_f64, Rational};
use crate::seed::rng;

/// `n` small agents sharing a size-`n` set against one big agent alone in a singleton.
///
/// Values come from virtual values `v + jε` (small) and `nv + n(n+1)ε/2 − ε²` (big); with
/// `ε = 0` the small agents value `(n+j)/(j+1)·v` for `j = 1..n` and the big one `n·v`.
/// Agent 0 is the big agent; roles `0..n` form the large set and role `n` the singleton.
pub fn gen_one_vs_n(n: usize, v: &Rational, eps: &Rational) -> Result<(Environment, ValuationProfile)> {
    let values = one_vs_n_values(n, v, eps)?;
    Ok((one_vs_n_fixed(n)?.permutation(), ValuationProfile::new(values)?))
}

/// The "1 vs n" set system with the identity role assignment.
pub fn one_vs_n_fixed(n: usize) -> Result<Environment> {
    let agents = n + 1;
    if agents <= EXPLICIT_LIMIT {
        Environment::downward_closed(agents, &[(0..n).collect(), vec![n]])
    } else {
        let oracle = Arc::new(move |set: &[usize]| set.iter().all(|&r| r < n) || set.iter().all(|&r| r == n));
        Environment::downward_closed_oracle(agents, oracle)
    }
}

fn one_vs_n_values(n: usize, v: &Rational, eps: &Rational) -> Result<Vec<Rational>> {
    if n == 0 || !v.is_positive() || eps.is_negative() {
        return Err(Error::Precondition("need n ≥ 1, v > 0 and ε ≥ 0".into()));
    }
    let ni = int(n as i64);
    let mut r = &ni * v + &ni * (&ni + int(1)) / int(2) * eps - eps * eps;
    let mut values = vec![r.clone()];
    // rank i + 1 carries virtual value v + (n + 1 − i)ε
    for i in 1..=n {
        r += v + int((n + 1 - i) as i64) * eps;
        values.push(&r / int(i as i64 + 1));
    }
    if values.windows(2).any(|w| w[0] < w[1]) || values.iter().any(|x| x.is_negative()) {
        return Err(Error::Precondition("ε too large for the construction".into()));
    }
    Ok(values)
}

/// Closed-form revenues of the self-`φ̄` maximizer on the "1 vs n" instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneVsN {
    pub n: usize,
    pub ic: Rational,
    pub ef: Rational,
}

/// With probability `n/(n+1)` the big agent shares the large set and all `n` winners pay
/// the reserve `v_{n+1}`; otherwise the small agents win and each pays her own value.
/// Every agent wins with probability `n/(n+1)`, so the envy-free revenue is `n·v_{n+1}`.
pub fn one_vs_n_revenues(n: usize, v: &Rational, eps: &Rational) -> Result<OneVsN> {
    let values = one_vs_n_values(n, v, eps)?;
    let reserve = values[n].clone();
    let (ni, d) = (int(n as i64), int(n as i64 + 1));
    let small: Rational = crate::rational::sum(&values[1..]);
    let ic = &ni / &d * &ni * &reserve + small / &d;
    let ef = ni * reserve;
    Ok(OneVsN { n, ic, ef })
}

/// Smallest `n` in `2..=max_n` with IC revenue above EF revenue at `ε = 0`.
pub fn one_vs_n_sweep(max_n: usize, v: &Rational) -> Result<Option<OneVsN>> {
    for n in 2..=max_n {
        let r = one_vs_n_revenues(n, v, &Rational::zero())?;
        if r.ic > r.ef {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// The partition-matroid instance with tiers of sectors and its value distribution.
#[derive(Debug, Clone)]
pub struct OperaHouse {
    pub m: usize,
    pub env: Environment,
    pub distribution: DiscreteDistribution,
    /// `(number of sectors, agents per sector)` for types `k = 1..=m`.
    pub sector_types: Vec<(usize, usize)>,
}

pub const OPERA_HOUSE_MAX_M: usize = 3;

/// Type-`k` sectors (`k = 1..=m`): `m^{2m−2k}` of them, one seat and `m^{3k−1}` agents each.
/// Values `m^{2k+1}` with mass `m^{−3k} − m^{−3k−3}` for `k < m` and `m^{−3m}` at `k = m`.
pub fn gen_opera_house(m: usize) -> Result<OperaHouse> {
    if !(2..=OPERA_HOUSE_MAX_M).contains(&m) {
        return Err(Error::SizeLimit { n: m, limit: OPERA_HOUSE_MAX_M, what: "opera-house tiers (m ∈ {2, 3})" });
    }
    let p = |e: usize| m.pow(e as u32);
    let sector_types: Vec<(usize, usize)> = (1..=m).map(|k| (p(2 * m - 2 * k), p(3 * k - 1))).collect();
    let mut sector = Vec::new();
    let mut s = 0usize;
    for &(count, size) in &sector_types {
        for _ in 0..count {
            sector.extend(std::iter::repeat_n(s, size));
            s += 1;
        }
    }
    let env = Environment::partition_matroid(sector, vec![1; s])?;
    let mi = m as i64;
    let values = (0..=m).map(|k| int(mi.pow(2 * k as u32 + 1))).collect();
    let probs = (0..=m)
        .map(|k| {
            let base = q(1, mi.pow(3 * k as u32));
            if k < m {
                &base - q(1, mi.pow(3 * k as u32 + 3))
            } else {
                base
            }
        })
        .collect();
    Ok(OperaHouse { m, env, distribution: DiscreteDistribution::new(values, probs)?, sector_types })
}

/// Optimal (Myerson) versus best anonymous-reserve VCG revenue on an opera house.
#[derive(Debug, Clone, PartialEq)]
pub struct OperaRevenues {
    pub myerson: f64,
    pub vcgr: f64,
    pub best_reserve: Rational,
    pub stderr: Option<(f64, f64)>,
    pub exact: Option<(Rational, Rational)>,
}

impl OperaRevenues {
    pub fn ratio(&self) -> f64 {
        self.vcgr / self.myerson
    }
}

/// Exact mode is limited to `m = 2` (order statistics of thousands of draws blow up).
pub fn opera_house_revenues(house: &OperaHouse, mode: Mode) -> Result<OperaRevenues> {
    let f = &house.distribution;
    match mode {
        Mode::Exact => {
            if house.m > 2 {
                return Err(Error::SizeLimit { n: house.m, limit: 2, what: "exact opera-house revenues" });
            }
            let mut myerson = Rational::zero();
            for &(count, size) in &house.sector_types {
                myerson += int(count as i64) * optimal_single_item_revenue(f, size);
            }
            let mut best: Option<(Rational, Rational)> = None;
            for r in f.values() {
                let mut total = Rational::zero();
                for &(count, size) in &house.sector_types {
                    total += int(count as i64) * second_price_reserve_revenue(f, size, r);
                }
                if best.as_ref().is_none_or(|(b, _)| total > *b) {
                    best = Some((total, r.clone()));
                }
            }
            let (vcgr, best_reserve) = best.expect("nonempty support");
            Ok(OperaRevenues {
                myerson: to_f64(&myerson),
                vcgr: to_f64(&vcgr),
                best_reserve,
                stderr: None,
                exact: Some((myerson, vcgr)),
            })
        }
        Mode::MonteCarlo { trials, seed } => {
            if trials < 2 {
                return Err(Error::Precondition("need at least two trials".into()));
            }
            let cum = f.cumulative_f64();
            let vals: Vec<f64> = f.values().iter().map(to_f64).collect();
            let phi: Vec<f64> = f.ironed_virtual_values().iter().map(|p| to_f64(p).max(0.0)).collect();
            let rows = parallel_map(trials, default_workers(), |t| {
                let mut rng = crate::seed::trial_rng(seed, t as u64);
                let mut out = vec![0.0; 1 + vals.len()];
                for &(count, size) in &house.sector_types {
                    for _ in 0..count {
                        let (mut hi, mut second) = (None::<usize>, None::<usize>);
                        for _ in 0..size {
                            let i = f.sample_index(&cum, &mut rng);
                            if hi.is_none_or(|h| i >= h) {
                                second = hi;
                                hi = Some(i);
                            } else if second.is_none_or(|s| i > s) {
                                second = Some(i);
                            }
                        }
                        let hi = hi.expect("nonempty sector");
                        out[0] += phi[hi];
                        for (ri, r) in vals.iter().enumerate() {
                            if vals[hi] >= *r {
                                out[1 + ri] += second.map_or(*r, |s| vals[s].max(*r));
                            }
                        }
                    }
                }
                out
            });
            let column = |c: usize| super::stats::mean_stderr(&rows.iter().map(|r| r[c]).collect::<Vec<_>>());
            let (my, my_se) = column(0);
            let (bi, (vc, vc_se)) = (1..=vals.len())
                .map(|c| (c - 1, column(c)))
                .fold(None::<(usize, (f64, f64))>, |b, x| match b {
                    Some(b) if b.1 .0 >= x.1 .0 => Some(b),
                    _ => Some(x),
                })
                .expect("nonempty support");
            Ok(OperaRevenues {
                myerson: my,
                vcgr: vc,
                best_reserve: f.values()[bi].clone(),
                stderr: Some((my_se, vc_se)),
                exact: None,
            })
        }
    }
}

/// Integer values uniform in `1..=max`, by agent id.
pub fn random_values(n: usize, max: i64, rng: &mut impl rand::Rng) -> ValuationProfile {
    ValuationProfile::from_unsorted((0..n).map(|_| int(rng.gen_range(1..=max))).collect()).expect("positive values")
}

/// `k`-unit environment with `k` uniform in `1..=n` and values in `1..=max`.
pub fn random_multi_unit(n: usize, max: i64, seed: u64) -> Result<(Environment, ValuationProfile)> {
    let mut r = rng(seed);
    let k = r.gen_range(1..=n);
    Ok((Environment::multi_unit(n, k)?, random_values(n, max, &mut r)))
}

/// Permutation environment over the downward closure of one to three random nonempty sets.
pub fn random_downward_closed(n: usize, max: i64, seed: u64) -> Result<(Environment, ValuationProfile)> {
    if n == 0 || n > EXPLICIT_LIMIT {
        return Err(Error::SizeLimit { n, limit: EXPLICIT_LIMIT, what: "random explicit families" });
    }
    let mut r = rng(seed);
    let count = r.gen_range(1..=3);
    let sets: Vec<Vec<usize>> = (0..count)
        .map(|_| {
            let mut s: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
            if s.is_empty() {
                s.push(r.gen_range(0..n));
            }
            s
        })
        .collect();
    Ok((Environment::downward_closed(n, &sets)?.permutation(), random_values(n, max, &mut r)))
}

/// Permutation environment over a random uniform, partition or transversal matroid.
pub fn random_matroid(n: usize, max: i64, seed: u64) -> Result<(Environment, ValuationProfile)> {
    if n == 0 {
        return Err(Error::Precondition("no agents".into()));
    }
    let mut r = rng(seed);
    let env = match r.gen_range(0..3) {
        0 => Environment::uniform_matroid(n, r.gen_range(1..=n))?,
        1 => {
            let sectors = r.gen_range(1..=n);
            let sector: Vec<usize> = (0..n).map(|a| if a < sectors { a } else { r.gen_range(0..sectors) }).collect();
            let mut counts = vec![0usize; sectors];
            for &s in &sector {
                counts[s] += 1;
            }
            let capacity = counts.iter().map(|&c| r.gen_range(1..=c)).collect();
            Environment::partition_matroid(sector, capacity)?
        }
        _ => {
            let items = r.gen_range(1..=n);
            let desires = (0..n)
                .map(|_| {
                    let mut d: Vec<usize> = (0..items).filter(|_| r.gen_bool(0.4)).collect();
                    if d.is_empty() {
                        d.push(r.gen_range(0..items));
                    }
                    d
                })
                .collect();
            Environment::transversal_matroid(items, desires)?
        }
    };
    Ok((env.permutation(), random_values(n, max, &mut r)))
}

/// A random symmetric environment of any kind, paired with values.
pub fn random_symmetric(n: usize, max: i64, seed: u64) -> Result<(Environment, ValuationProfile)> {
    let mut r = rng(seed);
    match r.gen_range(0..5) {
        0 => Ok((Environment::digital_good(n), random_values(n, max, &mut r))),
        1 => random_multi_unit(n, max, r.gen()),
        2 => {
            let mut w: Vec<Rational> = (0..n).map(|_| q(r.gen_range(0..=8), 8)).collect();
            w.sort_by(|a, b| b.cmp(a));
            Ok((Environment::position(n, w)?, random_values(n, max, &mut r)))
        }
        3 => random_matroid(n, max, r.gen()),
        _ => random_downward_closed(n, max, r.gen()),
    }
}
