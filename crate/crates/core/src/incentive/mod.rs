//! Incentive-compatible mechanisms: allocation traces, threshold payments, exact expected
//! revenue and truthfulness checking.
//!
//! Mechanisms work on reports indexed by agent id. A mechanism's randomness is passed in
//! as [`Coins`], which never depend on the reports, so holding the coins fixed and varying
//! one report traces that agent's allocation rule.

mod vsm;

pub use vsm::{compare_ic_ef, ic_revenue_exact, run_vsm, IcEf, ScoreFn, ScoreMaximizer};

use num_traits::{One, Signed, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::outcome::{Allocation, Outcome};
use crate::rational::{int, q, Rational};

/// Random choices of one mechanism run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Coins {
    /// One fair coin per agent id.
    pub flips: Vec<bool>,
    /// Realized roles of a permutation environment; `None` averages over all of them.
    pub roles: Option<Vec<usize>>,
    /// Value-independent tie order; `None` averages over ties exactly.
    pub priority: Option<Vec<usize>>,
    /// Coins of inner mechanisms.
    pub inner: Vec<Coins>,
}

impl Coins {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_flips(flips: Vec<bool>) -> Self {
        Self { flips, ..Self::default() }
    }
}

/// Every assignment of `n` fair coins, each with probability `2^-n`.
pub fn all_flips(n: usize) -> Vec<(Vec<bool>, Rational)> {
    let p = Rational::new(1.into(), num_bigint::BigInt::from(1u64) << n);
    (0u64..1 << n).map(|m| ((0..n).map(|a| m >> a & 1 == 1).collect(), p.clone())).collect()
}

pub fn random_flips(n: usize, rng: &mut dyn RngCore) -> Vec<bool> {
    (0..n).map(|_| rng.next_u32() & 1 == 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaymentRule {
    /// `p_i = v_i x_i(v) − ∫₀^{v_i} x_i(z) dz`.
    Threshold,
    /// The mechanism charges by its own rule.
    Custom,
}

pub trait Mechanism: Send + Sync {
    fn name(&self) -> String;

    fn n(&self) -> usize;

    /// Service probability of every agent for fixed coins.
    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>>;

    /// Service probability of `agent` alone.
    fn allocate_one(&self, reports: &[Rational], coins: &Coins, agent: usize) -> Result<Rational> {
        Ok(self.allocate(reports, coins)?.swap_remove(agent))
    }

    /// Report levels, besides the other agents' reports and 0, where an allocation may jump.
    fn extra_breakpoints(&self) -> Vec<Rational> {
        Vec::new()
    }

    fn payment_rule(&self) -> PaymentRule {
        PaymentRule::Threshold
    }

    /// Payments for fixed coins.
    fn payments(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        (0..self.n()).map(|i| threshold_payment(self, reports, coins, i)).collect()
    }

    /// Payment of one agent for fixed coins.
    fn payment_of(&self, reports: &[Rational], coins: &Coins, agent: usize) -> Result<Rational> {
        match self.payment_rule() {
            PaymentRule::Threshold => threshold_payment(self, reports, coins, agent),
            PaymentRule::Custom => Ok(self.payments(reports, coins)?[agent].clone()),
        }
    }

    /// All coin outcomes with their probabilities, when small enough to enumerate.
    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>>;

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins;
}

/// One agent's allocation as a function of her report, others fixed.
///
/// Piece `k` covers `[starts[k], starts[k+1])`, the last piece is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationTrace {
    pub agent: usize,
    pub starts: Vec<Rational>,
    pub levels: Vec<Rational>,
}

impl AllocationTrace {
    pub fn is_monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[0] <= w[1])
    }

    /// `∫₀^z x(t) dt`.
    pub fn integral(&self, z: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for k in 0..self.starts.len() {
            let a = &self.starts[k];
            if a >= z {
                break;
            }
            let b = self.starts.get(k + 1).filter(|b| *b < z).unwrap_or(z);
            acc += (b - a) * &self.levels[k];
        }
        acc
    }

    /// Level of the piece containing `z`.
    pub fn level_at(&self, z: &Rational) -> Rational {
        let k = self.starts.partition_point(|s| s <= z).saturating_sub(1);
        self.levels[k].clone()
    }
}

fn breakpoints<M: Mechanism + ?Sized>(m: &M, reports: &[Rational], agent: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = reports
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != agent)
        .map(|(_, r)| r.clone())
        .chain(m.extra_breakpoints())
        .chain(std::iter::once(Rational::zero()))
        .filter(|x| !x.is_negative())
        .collect();
    b.sort();
    b.dedup();
    b
}

/// Evaluates the allocation rule once per piece between breakpoints.
pub fn trace<M: Mechanism + ?Sized>(m: &M, reports: &[Rational], coins: &Coins, agent: usize) -> Result<AllocationTrace> {
    trace_below(m, reports, coins, agent, None)
}

/// As [`trace`], keeping only the pieces that start below `cap`.
fn trace_below<M: Mechanism + ?Sized>(
    m: &M,
    reports: &[Rational],
    coins: &Coins,
    agent: usize,
    cap: Option<&Rational>,
) -> Result<AllocationTrace> {
    let mut starts = breakpoints(m, reports, agent);
    let keep = cap.map_or(starts.len(), |c| starts.partition_point(|s| s < c).max(1));
    let mut probe = reports.to_vec();
    let mut levels = Vec::with_capacity(keep);
    for k in 0..keep {
        probe[agent] = match starts.get(k + 1) {
            Some(next) => (&starts[k] + next) / int(2),
            None => &starts[k] + Rational::one(),
        };
        levels.push(m.allocate_one(&probe, coins, agent)?);
    }
    starts.truncate(keep);
    Ok(AllocationTrace { agent, starts, levels })
}

/// `v_i x_i(v) − ∫₀^{v_i} x_i(z) dz` for fixed coins.
pub fn threshold_payment<M: Mechanism + ?Sized>(m: &M, reports: &[Rational], coins: &Coins, agent: usize) -> Result<Rational> {
    let t = trace_below(m, reports, coins, agent, Some(&reports[agent]))?;
    let own = m.allocate_one(reports, coins, agent)?;
    Ok(&reports[agent] * own - t.integral(&reports[agent]))
}

/// A realized run: allocation, payments and every agent's trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismRun {
    pub reports: Vec<Rational>,
    pub coins: Coins,
    pub traces: Vec<AllocationTrace>,
    /// Indexed by agent id.
    pub outcome: Outcome,
}

impl MechanismRun {
    pub fn revenue(&self) -> Rational {
        self.outcome.revenue()
    }
}

pub fn run<M: Mechanism + ?Sized>(m: &M, reports: &[Rational], coins: Coins) -> Result<MechanismRun> {
    check_reports(m, reports)?;
    let x = m.allocate(reports, &coins)?;
    let p = m.payments(reports, &coins)?;
    let traces = (0..m.n()).map(|i| trace(m, reports, &coins, i)).collect::<Result<_>>()?;
    let outcome = Outcome::new(Allocation::new(x)?, p, reports)?;
    Ok(MechanismRun { reports: reports.to_vec(), coins, traces, outcome })
}

fn check_reports<M: Mechanism + ?Sized>(m: &M, reports: &[Rational]) -> Result<()> {
    if reports.len() != m.n() {
        return Err(Error::Precondition(format!("{} expects {} reports, got {}", m.name(), m.n(), reports.len())));
    }
    if reports.iter().any(|r| r.is_negative()) {
        return Err(Error::Precondition("reports must be nonnegative".into()));
    }
    Ok(())
}

/// Expected allocation and payments over the whole coin space.
pub fn expected_outcome<M: Mechanism + ?Sized>(m: &M, reports: &[Rational]) -> Result<(Vec<Rational>, Vec<Rational>)> {
    check_reports(m, reports)?;
    let space = m
        .coin_space()
        .ok_or(Error::SizeLimit { n: m.n(), limit: 0, what: "exact coin enumeration" })?;
    let n = m.n();
    let mut x = vec![Rational::zero(); n];
    let mut p = vec![Rational::zero(); n];
    for (coins, pr) in &space {
        let xi = m.allocate(reports, coins)?;
        let pi = m.payments(reports, coins)?;
        for a in 0..n {
            if !xi[a].is_zero() {
                x[a] += &xi[a] * pr;
            }
            if !pi[a].is_zero() {
                p[a] += &pi[a] * pr;
            }
        }
    }
    Ok((x, p))
}

pub fn expected_revenue<M: Mechanism + ?Sized>(m: &M, reports: &[Rational]) -> Result<Rational> {
    Ok(crate::rational::sum(&expected_outcome(m, reports)?.1))
}

/// Monte Carlo mean revenue and its standard error; trial `t` uses seed `derive(seed, t)`.
pub fn sampled_revenue<M: Mechanism + ?Sized>(m: &M, reports: &[Rational], trials: usize, seed: u64) -> Result<(f64, f64)> {
    check_reports(m, reports)?;
    let mut revs = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = crate::seed::trial_rng(seed, t as u64);
        let coins = m.draw_coins(&mut rng);
        let p = m.payments(reports, &coins)?;
        revs.push(crate::rational::to_f64(&crate::rational::sum(&p)));
    }
    Ok(crate::analysis::stats::mean_stderr(&revs))
}

/// A profitable deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub agent: usize,
    pub misreport: Rational,
    pub truthful_utility: Rational,
    pub deviating_utility: Rational,
    pub coins: Option<Coins>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthMode {
    /// Every coin outcome separately (universal truthfulness).
    EachCoin,
    /// Utilities averaged over the coin space.
    InExpectation,
}

/// Misreports probed for one agent: breakpoints, midpoints, offsets of `gap/grid`
/// around each breakpoint, and values above everything.
pub fn misreports<M: Mechanism + ?Sized>(m: &M, reports: &[Rational], agent: usize, grid: usize) -> Vec<Rational> {
    let b = breakpoints(m, reports, agent);
    let grid = int(grid.max(1) as i64);
    let top = b.last().cloned().unwrap_or_else(Rational::zero).max(reports[agent].clone());
    let mut z: Vec<Rational> = b.clone();
    for w in b.windows(2) {
        let gap = &w[1] - &w[0];
        z.push((&w[0] + &w[1]) / int(2));
        z.push(&w[0] + &gap / &grid);
        z.push(&w[1] - &gap / &grid);
    }
    let unit = b.windows(2).map(|w| &w[1] - &w[0]).min().unwrap_or_else(Rational::one);
    for x in &b {
        z.push(x + &unit / &grid);
    }
    z.push(&top + Rational::one());
    z.push(&top * int(2) + int(1));
    z.retain(|x| !x.is_negative());
    z.sort();
    z.dedup();
    z
}

/// Checks `v_i x_i(v) − p_i(v) ≥ v_i x_i(v₋ᵢ, z) − p_i(v₋ᵢ, z)` exactly for every probed `z`.
pub fn check_truthful_mechanism<M: Mechanism + ?Sized>(
    m: &M,
    values: &[Rational],
    grid: usize,
    mode: TruthMode,
) -> Result<std::result::Result<(), Counterexample>> {
    check_reports(m, values)?;
    let space = m
        .coin_space()
        .ok_or(Error::SizeLimit { n: m.n(), limit: 0, what: "exact coin enumeration" })?;
    check_over(m, values, grid, mode, &space)
}

/// As [`check_truthful_mechanism`] over an explicit list of coin outcomes.
pub fn check_over<M: Mechanism + ?Sized>(
    m: &M,
    values: &[Rational],
    grid: usize,
    mode: TruthMode,
    space: &[(Coins, Rational)],
) -> Result<std::result::Result<(), Counterexample>> {
    let utility = |coins: &Coins, reports: &[Rational], agent: usize| -> Result<Rational> {
        let x = m.allocate(reports, coins)?[agent].clone();
        let p = m.payment_of(reports, coins, agent)?;
        Ok(&values[agent] * x - p)
    };
    for agent in 0..m.n() {
        let zs = misreports(m, values, agent, grid);
        let scopes: Vec<Vec<(Coins, Rational)>> = match mode {
            TruthMode::EachCoin => space.iter().map(|c| vec![(c.0.clone(), Rational::one())]).collect(),
            TruthMode::InExpectation => vec![space.to_vec()],
        };
        for scope in &scopes {
            let mut truthful = Rational::zero();
            for (c, pr) in scope {
                truthful += utility(c, values, agent)? * pr;
            }
            let mut probe = values.to_vec();
            for z in &zs {
                probe[agent] = z.clone();
                let mut dev = Rational::zero();
                for (c, pr) in scope {
                    dev += utility(c, &probe, agent)? * pr;
                }
                if dev > truthful {
                    return Ok(Err(Counterexample {
                        agent,
                        misreport: z.clone(),
                        truthful_utility: truthful,
                        deviating_utility: dev,
                        coins: (scope.len() == 1).then(|| scope[0].0.clone()),
                    }));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// Convex combination of two mechanisms chosen by an extra coin with probability `weight`
/// for the first.
pub struct Mixture<A, B> {
    pub first: A,
    pub second: B,
    /// Probability of running `first`, with denominator a power of two up to 2^8.
    pub weight_num: u32,
    pub weight_log2_den: u32,
}

impl<A: Mechanism, B: Mechanism> Mixture<A, B> {
    fn weight(&self) -> Rational {
        q(self.weight_num as i64, 1 << self.weight_log2_den)
    }
}

impl<A: Mechanism, B: Mechanism> Mechanism for Mixture<A, B> {
    fn name(&self) -> String {
        format!("mix({},{})", self.first.name(), self.second.name())
    }

    fn n(&self) -> usize {
        self.first.n()
    }

    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        if coins.flips.first().copied().unwrap_or(true) {
            self.first.allocate(reports, &coins.inner[0])
        } else {
            self.second.allocate(reports, &coins.inner[0])
        }
    }

    fn extra_breakpoints(&self) -> Vec<Rational> {
        let mut b = self.first.extra_breakpoints();
        b.extend(self.second.extra_breakpoints());
        b
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        let w = self.weight();
        let mut out = Vec::new();
        for (c, p) in self.first.coin_space()? {
            out.push((Coins { flips: vec![true], inner: vec![c], ..Coins::default() }, &p * &w));
        }
        for (c, p) in self.second.coin_space()? {
            out.push((Coins { flips: vec![false], inner: vec![c], ..Coins::default() }, &p * (Rational::one() - &w)));
        }
        Some(out)
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        let pick = (rng.next_u32() % (1 << self.weight_log2_den)) < self.weight_num;
        let inner = if pick { self.first.draw_coins(rng) } else { self.second.draw_coins(rng) };
        Coins { flips: vec![pick], inner: vec![inner], ..Coins::default() }
    }
}

/// Serves the top bidder and charges her bid: a deliberately untruthful control.
pub struct PayYourBid {
    pub n: usize,
}

impl Mechanism for PayYourBid {
    fn name(&self) -> String {
        "pay-your-bid".into()
    }

    fn n(&self) -> usize {
        self.n
    }

    fn allocate(&self, reports: &[Rational], _coins: &Coins) -> Result<Vec<Rational>> {
        let top = reports.iter().cloned().max().unwrap_or_else(Rational::zero);
        let winners: Vec<usize> = (0..self.n).filter(|&a| reports[a] == top && top.is_positive()).collect();
        let mut x = vec![Rational::zero(); self.n];
        for &a in &winners {
            x[a] = q(1, winners.len() as i64);
        }
        Ok(x)
    }

    fn payment_rule(&self) -> PaymentRule {
        PaymentRule::Custom
    }

    fn payments(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let x = self.allocate(reports, coins)?;
        Ok(x.iter().zip(reports).map(|(a, b)| a * b).collect())
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        Some(vec![(Coins::none(), Rational::one())])
    }

    fn draw_coins(&self, _rng: &mut dyn RngCore) -> Coins {
        Coins::none()
    }
}
