//! Mechanisms by name.

use super::digital::Rsop;
use super::matroid::{characteristic_weights, MatroidReduction, WeightMode};
use super::multi_unit::MultiUnitReduction;
use super::position::PositionReduction;
use super::rsem::Rsem;
use super::vcg::best_reserve;
use crate::environment::{Environment, Kind};
use crate::error::{Error, Result};
use crate::incentive::{Mechanism, ScoreMaximizer};
use crate::maximizer::EXACT_PERMUTATION_LIMIT;
use crate::profile::ValuationProfile;
use crate::rational::Rational;
use num_traits::Zero;

pub const MECHANISMS: [&str; 7] =
    ["vickrey", "vcg-reserve", "rsem", "rsem-prime", "mu-reduction", "position-reduction", "matroid-reduction"];

/// Seed for Monte Carlo characteristic weights of large matroids.
const WEIGHT_SEED: u64 = 0x77e1_6475;
const WEIGHT_TRIALS: usize = 20_000;

/// Vickrey for `k = 1..=n` units.
pub fn vickrey_family(n: usize) -> Result<Vec<Box<dyn Mechanism>>> {
    (1..=n)
        .map(|k| Ok(Box::new(ScoreMaximizer::bids(Environment::multi_unit(n, k)?, Rational::zero())) as Box<dyn Mechanism>))
        .collect()
}

/// The sampling auction for `k = 1..=n` units.
pub fn rsem_family(n: usize) -> Result<Vec<Box<dyn Mechanism>>> {
    (1..=n).map(|k| Ok(Box::new(Rsem::new(Environment::multi_unit(n, k)?)) as Box<dyn Mechanism>)).collect()
}

/// The digital-good reduction with RSOP for `k = 1..=n` units.
pub fn mu_family(n: usize) -> Result<Vec<Box<dyn Mechanism>>> {
    (1..=n).map(|k| Ok(Box::new(MultiUnitReduction::new(Rsop, k, n)?) as Box<dyn Mechanism>)).collect()
}

/// The mechanism called `name` for `env`. `vcg-reserve` fixes the best reserve in
/// hindsight for `v`; every other mechanism ignores `v`.
pub fn build_mechanism(name: &str, env: &Environment, v: &ValuationProfile) -> Result<Box<dyn Mechanism>> {
    let n = env.n();
    Ok(match name {
        "vickrey" => Box::new(ScoreMaximizer::bids(env.clone(), Rational::zero())),
        "vcg-reserve" => Box::new(ScoreMaximizer::bids(env.clone(), best_reserve(env, v)?.0)),
        "rsem" => Box::new(Rsem::new(env.clone())),
        "rsem-prime" => Box::new(Rsem::prime(env.clone())),
        "mu-reduction" => {
            let k = match env.kind() {
                Kind::MultiUnit { k } => *k,
                Kind::DigitalGood => n,
                _ => return Err(Error::Precondition("mu-reduction needs a k-unit or digital-good environment".into())),
            };
            Box::new(MultiUnitReduction::new(Rsop, k, n)?)
        }
        "position-reduction" => {
            let w = env
                .position_weights()
                .ok_or_else(|| Error::Precondition("position-reduction needs a position environment".into()))?;
            Box::new(PositionReduction::new(mu_family(n)?, w)?)
        }
        "matroid-reduction" => {
            let mode = if n <= EXACT_PERMUTATION_LIMIT {
                WeightMode::Exact
            } else {
                WeightMode::MonteCarlo { trials: WEIGHT_TRIALS, seed: WEIGHT_SEED }
            };
            let w = characteristic_weights(env, mode)?.weights;
            Box::new(MatroidReduction::new(PositionReduction::new(mu_family(n)?, w)?, env.clone())?)
        }
        other => {
            return Err(Error::Unknown { what: "mechanism", name: format!("{other} (known: {})", MECHANISMS.join(", ")) })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    #[test]
    fn every_name_builds() {
        let v = ValuationProfile::from_ints(&[5, 3, 2]).unwrap();
        let envs = [
            Environment::multi_unit(3, 2).unwrap(),
            Environment::position(3, vec![int(1), q(1, 2), int(0)]).unwrap(),
            Environment::uniform_matroid(3, 2).unwrap().permutation(),
        ];
        for name in MECHANISMS {
            let built = envs.iter().filter(|e| build_mechanism(name, e, &v).is_ok()).count();
            assert!(built >= 1, "{name}");
        }
    }

    #[test]
    fn unknown_lists_registry() {
        let v = ValuationProfile::from_ints(&[1]).unwrap();
        let e = build_mechanism("myerson", &Environment::digital_good(1), &v).err().unwrap();
        assert!(e.to_string().contains("rsem-prime"));
    }
}
