//! Prefix statistics of sample/market partitions: imbalance, balance, and the Monte Carlo
//! estimators built on them.
//!
//! Agents here are indexed by rank: agent `a` (0-based) is the `a+1`-st highest.

use num_traits::{Signed, Zero};
use rand::RngCore;

use super::runner::{parallel_trials, TrialSummary};
use crate::error::{Error, Result};
use crate::outcome::Partition;
use crate::profile::ValuationProfile;
use crate::rational::{int, q, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionStats {
    /// `Y_i = |S ∩ {1..i}|` for `i = 1..=n`.
    pub y: Vec<usize>,
    /// `max_i Y_i/(i − Y_i)`; `None` stands for `+∞` (some prefix lies wholly in `S`).
    pub lambda: Option<Rational>,
    pub balanced: bool,
}

pub fn partition_stats(part: &Partition) -> PartitionStats {
    let n = part.n();
    let mut y = Vec::with_capacity(n);
    let mut s = 0usize;
    let mut lambda = Some(Rational::zero());
    for i in 1..=n {
        if part.is_sample(i - 1) {
            s += 1;
        }
        y.push(s);
        lambda = match lambda {
            Some(l) if s < i => Some(l.max(int(s as i64) / int((i - s) as i64))),
            _ => None,
        };
    }
    PartitionStats { y, lambda, balanced: is_balanced(part) }
}

/// `1 ∈ M`, `2 ∈ S`, and both sides hold at least a quarter of every prefix of length ≥ 3.
pub fn is_balanced(part: &Partition) -> bool {
    let n = part.n();
    if n < 2 || part.is_sample(0) || !part.is_sample(1) {
        return false;
    }
    let mut s = 1usize;
    for i in 3..=n {
        if part.is_sample(i - 1) {
            s += 1;
        }
        if 4 * s < i || 4 * (i - s) < i {
            return false;
        }
    }
    true
}

/// The partition re-indexed by rank of `v`.
pub fn ranked_partition(v: &ValuationProfile, part: &Partition) -> Partition {
    Partition::new(v.ids().iter().map(|&id| part.is_sample(id)).collect())
}

/// `Σ_{M ∩ [i]} a_j ≥ ¼ Σ_{[i]} a_j` for all prefixes `i`.
pub fn dominance_holds(part: &Partition, a: &[Rational]) -> bool {
    let (mut market, mut all) = (Rational::zero(), Rational::zero());
    for (j, aj) in a.iter().enumerate() {
        all += aj;
        if !part.is_sample(j) {
            market += aj;
        }
        if int(4) * &market < all {
            return false;
        }
    }
    true
}

/// Root of `r⁴ − 2r + 1` in `(0, 1)` by rational bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct RuinRoot {
    pub root: Rational,
    /// `|f(root)|`.
    pub residual: f64,
}

pub fn ruin_root() -> RuinRoot {
    let f = |r: &Rational| r * r * r * r - int(2) * r + int(1);
    // f(0) = 1 > 0 and f(9/10) < 0; f is decreasing on [0, 0.79]
    let (mut lo, mut hi) = (Rational::zero(), q(9, 10));
    for _ in 0..48 {
        let mid = (&lo + &hi) / int(2);
        if f(&mid).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = (lo + hi) / int(2);
    let residual = to_f64(&f(&root)).abs();
    RuinRoot { root, residual }
}

/// Lower bound `(1 − 2r³)/2` on the balance probability.
pub fn balance_bound(root: &Rational) -> Rational {
    (int(1) - int(2) * root * root * root) / int(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub root: RuinRoot,
    pub bound: Rational,
}

pub const MIN_BALANCE_TRIALS: usize = 10_000;

/// Frequency of balanced fair-coin partitions of `n` agents given `1 ∈ M`.
pub fn balanced_probability(n: usize, trials: usize, seed: u64) -> Result<BalanceEstimate> {
    balanced_probability_with(n, trials, seed, super::runner::default_workers())
}

pub fn balanced_probability_with(n: usize, trials: usize, seed: u64, workers: usize) -> Result<BalanceEstimate> {
    if trials < MIN_BALANCE_TRIALS {
        return Err(Error::Precondition(format!("need at least {MIN_BALANCE_TRIALS} trials, got {trials}")));
    }
    if n < 2 {
        return Err(Error::Precondition("balance needs at least two agents".into()));
    }
    let TrialSummary { mean, stderr, .. } = parallel_trials(trials, seed, workers, |rng| {
        if sample_balanced(n, rng) {
            1.0
        } else {
            0.0
        }
    });
    let root = ruin_root();
    let bound = balance_bound(&root.root);
    Ok(BalanceEstimate { estimate: mean, stderr, trials, root, bound })
}

fn sample_balanced(n: usize, rng: &mut dyn RngCore) -> bool {
    let mut bits = Bits::new(rng);
    // agent 1 is in the market; agent 2 must be in the sample
    if !bits.next() {
        return false;
    }
    let mut s = 1usize;
    for i in 3..=n {
        if bits.next() {
            s += 1;
        }
        if 4 * s < i || 4 * (i - s) < i {
            return false;
        }
    }
    true
}

/// Fair coins drawn 64 at a time.
struct Bits<'r> {
    rng: &'r mut dyn RngCore,
    word: u64,
    left: u32,
}

impl<'r> Bits<'r> {
    fn new(rng: &'r mut dyn RngCore) -> Self {
        Self { rng, word: 0, left: 0 }
    }

    /// `true` means "in the sample".
    fn next(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        b
    }
}

/// Approximation factor of the random sampling auction for digital goods.
pub fn ams_constant() -> Rational {
    q(468, 100)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmsEstimate {
    /// Mean of `1/X = (Y_r/r)/λ`.
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Mean of `1/X` over fair-coin partitions with `1 ∈ M`, where `1/X = 0` when `Y_r = 0`.
pub fn ams_quantity(n: usize, r: usize, trials: usize, seed: u64) -> Result<AmsEstimate> {
    ams_quantity_with(n, r, trials, seed, super::runner::default_workers())
}

pub fn ams_quantity_with(n: usize, r: usize, trials: usize, seed: u64, workers: usize) -> Result<AmsEstimate> {
    if r == 0 || r > n {
        return Err(Error::Precondition(format!("need 1 ≤ r ≤ n, got r={r}, n={n}")));
    }
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let s = parallel_trials(trials, seed, workers, |rng| inverse_x(n, r, rng));
    Ok(AmsEstimate { mean: s.mean, stderr: s.stderr, trials })
}

fn inverse_x(n: usize, r: usize, rng: &mut dyn RngCore) -> f64 {
    let mut bits = Bits::new(rng);
    let (mut y, mut y_r) = (0u64, 0u64);
    // λ as a fraction best_num/best_den
    let (mut best_num, mut best_den) = (0u64, 1u64);
    for i in 1..=n as u64 {
        if i > 1 && bits.next() {
            y += 1;
        }
        let m = i - y;
        if y * best_den > best_num * m {
            best_num = y;
            best_den = m;
        }
        if i == r as u64 {
            y_r = y;
        }
    }
    if y_r == 0 {
        return 0.0;
    }
    (y_r as f64 / r as f64) * (best_den as f64 / best_num as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stats_example() {
        let p = Partition::from_sample(5, &[1, 3]).unwrap();
        let s = partition_stats(&p);
        assert_eq!(s.y, vec![0, 1, 1, 2, 2]);
        assert_eq!(s.lambda, Some(int(1)));
        assert!(s.balanced);
    }

    #[test]
    fn empty_sample() {
        let s = partition_stats(&Partition::new(vec![false; 4]));
        assert_eq!(s.lambda, Some(int(0)));
        assert!(!s.balanced);
    }

    #[test]
    fn balanced_example() {
        // M = {1, 4}, S = {2, 3}
        let p = Partition::from_sample(4, &[1, 2]).unwrap();
        assert!(partition_stats(&p).balanced);
        // a lone sample agent is under a quarter of five
        assert!(!is_balanced(&Partition::from_sample(5, &[1]).unwrap()));
        assert!(is_balanced(&Partition::from_sample(4, &[1]).unwrap()));
    }

    #[test]
    fn top_in_sample_is_unbounded() {
        let s = partition_stats(&Partition::from_sample(3, &[0]).unwrap());
        assert_eq!(s.lambda, None);
    }

    #[test]
    fn root_and_bound() {
        let r = ruin_root();
        assert!(r.residual < 1e-12);
        assert!((to_f64(&r.root) - 0.543689).abs() < 1e-6);
        assert!(balance_bound(&r.root) >= q(339, 1000));
    }

    #[test]
    fn ams_first_rank_is_degenerate() {
        let e = ams_quantity_with(50, 1, 200, 4, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn ams_worker_invariance() {
        let a = ams_quantity_with(100, 10, 3000, 9, 1).unwrap();
        let b = ams_quantity_with(100, 10, 3000, 9, 3).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    fn partitions(n: usize) -> impl Strategy<Value = Partition> {
        proptest::collection::vec(any::<bool>(), n).prop_map(Partition::new)
    }

    proptest! {
        #[test]
        fn balance_caps_imbalance(p in (3usize..14).prop_flat_map(partitions)) {
            let s = partition_stats(&p);
            if s.balanced {
                for i in 3..=p.n() {
                    let y = s.y[i - 1];
                    prop_assert!(int(y as i64) / int((i - y) as i64) <= int(3));
                }
                prop_assert!(s.lambda.is_some());
            }
            if !p.is_sample(0) {
                prop_assert!(s.lambda.is_some());
            }
        }

        #[test]
        fn balance_gives_prefix_dominance(
            p in (3usize..12).prop_flat_map(partitions),
            raw in proptest::collection::vec(0i64..20, 12),
        ) {
            let mut a: Vec<Rational> = raw[..p.n()].iter().map(|&x| int(x)).collect();
            a.sort_by(|x, y| y.cmp(x));
            if is_balanced(&p) {
                prop_assert!(dominance_holds(&p, &a));
            }
        }
    }
}
