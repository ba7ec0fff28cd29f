//! Characteristic weights of matroids and the matroid-permutation reduction.

use num_traits::Zero;
use rand::RngCore;

use super::position::{uniform_unit, PositionReduction};
use crate::environment::{random_permutation, Environment};
use crate::error::{Error, Result};
use crate::incentive::{Coins, Mechanism, MechanismRun};
use crate::maximizer::{expected_service, for_each_permutation, Ties, EXACT_PERMUTATION_LIMIT};
use crate::profile::ValuationProfile;
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicWeights {
    /// `w_r`: probability that the `r`-th ranked agent is served.
    pub weights: Vec<Rational>,
    /// Per-rank standard errors when sampled.
    pub stderr: Option<Vec<f64>>,
}

/// Service probability by rank of greedy on distinct values under uniform random roles.
pub fn characteristic_weights(env: &Environment, mode: WeightMode) -> Result<CharacteristicWeights> {
    if !env.is_matroid() {
        return Err(Error::Precondition("characteristic weights need a matroid".into()));
    }
    let n = env.n();
    let greedy = |roles: &[usize], counts: &mut [u64]| {
        let mut ind = env.independence().expect("matroid");
        for (rank, &role) in roles.iter().enumerate() {
            if ind.try_add(role) {
                counts[rank] += 1;
            }
        }
    };
    let mut counts = vec![0u64; n];
    match mode {
        WeightMode::Exact => {
            if n > EXACT_PERMUTATION_LIMIT {
                return Err(Error::SizeLimit { n, limit: EXACT_PERMUTATION_LIMIT, what: "exact characteristic weights" });
            }
            let mut total = 0u64;
            for_each_permutation(n, |pi| {
                greedy(pi, &mut counts);
                total += 1;
            });
            let d = int(total as i64);
            Ok(CharacteristicWeights { weights: counts.iter().map(|&c| int(c as i64) / &d).collect(), stderr: None })
        }
        WeightMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::Precondition("need at least one trial".into()));
            }
            for t in 0..trials {
                let mut rng = crate::seed::trial_rng(seed, t as u64);
                greedy(&random_permutation(n, &mut rng), &mut counts);
            }
            let d = int(trials as i64);
            let stderr = counts
                .iter()
                .map(|&c| {
                    let p = c as f64 / trials as f64;
                    (p * (1.0 - p) / trials as f64).sqrt()
                })
                .collect();
            Ok(CharacteristicWeights { weights: counts.iter().map(|&c| int(c as i64) / &d).collect(), stderr: Some(stderr) })
        }
    }
}

/// Runs a position auction with the matroid's characteristic weights, rejects agents
/// without a position and serves the rest greedily by position under random roles.
pub struct MatroidReduction {
    pub position: PositionReduction,
    /// A matroid permutation environment.
    pub env: Environment,
}

impl MatroidReduction {
    pub fn new(position: PositionReduction, env: Environment) -> Result<Self> {
        if !env.is_matroid() || !env.is_permuted() {
            return Err(Error::Precondition("the reduction needs a matroid permutation environment".into()));
        }
        if position.n() != env.n() {
            return Err(Error::Precondition("position auction and environment sizes differ".into()));
        }
        Ok(Self { position, env })
    }

    /// Greedy service given each agent's position; earlier positions go first.
    ///
    /// Rejected agents take the free ranks in the greedy pass but are never served, so the
    /// holder of position `j` is served with probability `w_j`.
    pub fn serve(&self, positions: &[Option<usize>], roles: Option<&[usize]>) -> Result<Vec<Rational>> {
        let n = self.env.n();
        let mut taken = vec![false; n];
        for &j in positions.iter().flatten() {
            taken[j] = true;
        }
        let mut free = (0..n).filter(|&j| !taken[j]);
        let ranks: Vec<usize> = positions.iter().map(|p| p.unwrap_or_else(|| free.next().expect("a free rank"))).collect();
        let scores: Vec<Option<Rational>> = ranks.iter().map(|&j| Some(int((n - j) as i64))).collect();
        let mut x = expected_service(&self.env, &scores, Ties { roles, priority: None })?;
        for (xa, p) in x.iter_mut().zip(positions) {
            if p.is_none() {
                *xa = Rational::zero();
            }
        }
        Ok(x)
    }
}

impl Mechanism for MatroidReduction {
    fn name(&self) -> String {
        format!("matroid-reduction({})", self.position.family[0].name())
    }

    fn n(&self) -> usize {
        self.env.n()
    }

    /// Expected service over the position auction's assignment lottery.
    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let asg = self.position.assign(reports, coins, &Rational::zero())?;
        let n = self.n();
        let mut x = vec![Rational::zero(); n];
        for (r, perm) in &asg.decomposition.terms {
            let positions: Vec<Option<usize>> =
                (0..n).map(|a| (perm[a] < n && !asg.padded_weights[perm[a]].is_zero()).then_some(perm[a])).collect();
            for (xa, s) in x.iter_mut().zip(self.serve(&positions, coins.roles.as_deref())?) {
                if !s.is_zero() {
                    *xa += r * s;
                }
            }
        }
        Ok(x)
    }

    fn extra_breakpoints(&self) -> Vec<Rational> {
        self.position.extra_breakpoints()
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        self.position.coin_space()
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        let mut c = self.position.draw_coins(rng);
        c.roles = Some(random_permutation(self.n(), &mut &mut *rng));
        c
    }
}

/// Realized positions and service of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidRun {
    pub run: MechanismRun,
    pub positions: Vec<Option<usize>>,
    pub served: Vec<Rational>,
}

/// One run: coins and the assignment are drawn from `seed`; `run` reports the expected
/// outcome given the drawn coins.
pub fn matroid_perm_reduction(position: PositionReduction, env: &Environment, v: &ValuationProfile, seed: u64) -> Result<MatroidRun> {
    let m = MatroidReduction::new(position, env.clone())?;
    if m.n() != v.n() {
        return Err(Error::Precondition(format!("environment has {} agents, profile {}", m.n(), v.n())));
    }
    let mut rng = crate::seed::rng(seed);
    let coins = m.draw_coins(&mut rng);
    let u = uniform_unit(&mut rng);
    let reports = v.by_id();
    let asg = m.position.assign(&reports, &coins, &u)?;
    let served = m.serve(&asg.positions, coins.roles.as_deref())?;
    let run = crate::incentive::run(&m, &reports, coins)?;
    Ok(MatroidRun { run, positions: asg.positions, served })
}
