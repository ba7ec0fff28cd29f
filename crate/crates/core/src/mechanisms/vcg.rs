//! Vickrey and VCG with a reserve.

use num_traits::Zero;

use crate::curves::build_curve;
use crate::environment::{Environment, Kind};
use crate::error::{Error, Result};
use crate::incentive::{expected_revenue, run, Coins, MechanismRun, ScoreMaximizer};
use crate::profile::ValuationProfile;
use crate::rational::Rational;

fn check(env: &Environment, v: &ValuationProfile) -> Result<()> {
    if env.n() != v.n() {
        return Err(Error::Precondition(format!("environment has {} agents, profile {}", env.n(), v.n())));
    }
    Ok(())
}

/// Rejects reports below `r`, maximizes surplus over the rest and charges thresholds.
pub fn vcg_with_reserve(env: &Environment, v: &ValuationProfile, r: &Rational) -> Result<MechanismRun> {
    check(env, v)?;
    run(&ScoreMaximizer::bids(env.clone(), r.clone()), &v.by_id(), Coins::none())
}

/// The surplus maximizer without a reserve.
pub fn vickrey(env: &Environment, v: &ValuationProfile) -> Result<MechanismRun> {
    vcg_with_reserve(env, v, &Rational::zero())
}

/// Best revenue of VCG with a reserve chosen in hindsight.
///
/// For `k` identical units this is `max_{i≤k} R(i)`; other environments search the
/// reserves `r ∈ {v_i}` exactly.
pub fn vcgr_benchmark(env: &Environment, v: &ValuationProfile) -> Result<Rational> {
    check(env, v)?;
    let c = build_curve(v);
    match env.kind() {
        Kind::DigitalGood => Ok(c.max_r_upto(v.n())),
        Kind::MultiUnit { k } => Ok(c.max_r_upto(*k)),
        _ => vcgr_search(env, v),
    }
}

/// Hindsight reserve search by running the mechanism at every candidate reserve.
pub fn vcgr_search(env: &Environment, v: &ValuationProfile) -> Result<Rational> {
    Ok(best_reserve(env, v)?.1)
}

/// The reserve among `{0} ∪ {v_i}` with the highest expected revenue (the lowest on ties),
/// and that revenue.
pub fn best_reserve(env: &Environment, v: &ValuationProfile) -> Result<(Rational, Rational)> {
    check(env, v)?;
    let mut best = (Rational::zero(), expected_revenue(&ScoreMaximizer::bids(env.clone(), Rational::zero()), &v.by_id())?);
    let mut reserves = v.values().to_vec();
    reserves.dedup();
    for r in reserves.into_iter().rev() {
        let rev = expected_revenue(&ScoreMaximizer::bids(env.clone(), r.clone()), &v.by_id())?;
        if rev > best.1 {
            best = (r, rev);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn prof(v: &[i64]) -> ValuationProfile {
        ValuationProfile::from_ints(v).unwrap()
    }

    #[test]
    fn benchmark_examples() {
        let env = Environment::multi_unit(3, 2).unwrap();
        assert_eq!(vcgr_benchmark(&env, &prof(&[6, 4, 4])).unwrap(), int(8));
        assert_eq!(vcgr_search(&env, &prof(&[6, 4, 4])).unwrap(), int(8));
        let env = Environment::multi_unit(4, 2).unwrap();
        assert_eq!(vcgr_benchmark(&env, &prof(&[2, 1, 1, 1])).unwrap(), int(2));
        assert_eq!(vcgr_search(&env, &prof(&[2, 1, 1, 1])).unwrap(), int(2));
    }

    #[test]
    fn reserve_above_top_earns_nothing() {
        let env = Environment::multi_unit(3, 2).unwrap();
        let r = vcg_with_reserve(&env, &prof(&[6, 4, 4]), &int(7)).unwrap();
        assert_eq!(r.revenue(), int(0));
    }

    #[test]
    fn vickrey_single_unit() {
        let env = Environment::multi_unit(3, 1).unwrap();
        let r = vickrey(&env, &prof(&[6, 4, 4])).unwrap();
        assert_eq!(r.outcome.payments, vec![int(4), int(0), int(0)]);
    }

    #[test]
    fn search_agrees_with_closed_form_on_uniform_matroids() {
        for v in [[9, 7, 3, 1], [5, 5, 5, 2], [8, 2, 2, 2]] {
            let v = prof(&v);
            for k in 1..=4 {
                let a = vcgr_benchmark(&Environment::multi_unit(4, k).unwrap(), &v).unwrap();
                let b = vcgr_search(&Environment::uniform_matroid(4, k).unwrap(), &v).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}
