//! Finite-support value distributions, their discrete ironed virtual values, and the
//! Vickrey-versus-optimal comparison that defines tail regularity.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::runner::{default_workers, parallel_map};
use super::Mode;
use crate::error::{Error, Result};
use crate::rational::{int, pos, to_f64, Rational};

/// Values in increasing order with positive probabilities summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DiscreteDistribution {
    values: Vec<Rational>,
    probs: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    #[serde(with = "crate::rational::serde_rational_vec")]
    values: Vec<Rational>,
    #[serde(with = "crate::rational::serde_rational_vec")]
    probs: Vec<Rational>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(r: RawDistribution) -> Result<Self> {
        Self::new(r.values, r.probs)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        Self { values: d.values, probs: d.probs }
    }
}

impl DiscreteDistribution {
    /// Zero-probability points are dropped.
    pub fn new(values: Vec<Rational>, probs: Vec<Rational>) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(Error::Precondition("need one probability per support point".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::Precondition("values must be nonnegative".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::Precondition("probabilities must be nonnegative".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("support must be strictly increasing".into()));
        }
        if crate::rational::sum(&probs) != Rational::one() {
            return Err(Error::Precondition("probabilities must sum to 1".into()));
        }
        let (values, probs) = values.into_iter().zip(probs).filter(|(_, p)| !p.is_zero()).unzip();
        Ok(Self { values, probs })
    }

    pub fn point_mass(c: Rational) -> Result<Self> {
        Self::new(vec![c], vec![Rational::one()])
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `F(a_t) = P(v ≤ a_t)` for every support point.
    pub fn cdf(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc.clone()
            })
            .collect()
    }

    pub fn mean(&self) -> Rational {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    /// Ironed virtual value of every support point: slopes of the concave hull of the
    /// revenue curve `q ↦ a·q` in quantile space.
    pub fn ironed_virtual_values(&self) -> Vec<Rational> {
        let m = self.len();
        // points by increasing quantile: (0, 0), then support from the top down
        let mut xs = vec![Rational::zero()];
        let mut ys = vec![Rational::zero()];
        let mut q = Rational::zero();
        for t in (0..m).rev() {
            q += &self.probs[t];
            ys.push(&self.values[t] * &q);
            xs.push(q.clone());
        }
        let hull = upper_hull(&xs, &ys);
        let mut ir = vec![Rational::zero(); m + 1];
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            let slope = (&ys[b] - &ys[a]) / (&xs[b] - &xs[a]);
            for i in a..=b {
                ir[i] = &ys[a] + &slope * (&xs[i] - &xs[a]);
            }
        }
        // support point t sits at hull index m - t
        (0..m).map(|t| (&ir[m - t] - &ir[m - t - 1]) / &self.probs[t]).collect()
    }

    /// Index of a draw.
    pub fn sample_index(&self, cum: &[f64], rng: &mut impl rand::Rng) -> usize {
        let u: f64 = rng.gen();
        cum.partition_point(|&c| c <= u).min(self.len() - 1)
    }

    /// Cumulative probabilities as floats, for sampling.
    pub fn cumulative_f64(&self) -> Vec<f64> {
        self.cdf().iter().map(to_f64).collect()
    }
}

fn upper_hull(xs: &[Rational], ys: &[Rational]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            let lhs = (&ys[b] - &ys[a]) * (&xs[i] - &xs[a]);
            let rhs = (&ys[i] - &ys[a]) * (&xs[b] - &xs[a]);
            if lhs <= rhs {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

fn pow(x: &Rational, e: usize) -> Rational {
    num_traits::pow::pow(x.clone(), e)
}

/// `P(max of n draws ≤ a_t)` and `P(second highest ≤ a_t)` for every support point.
pub fn order_statistic_cdfs(f: &DiscreteDistribution, n: usize) -> (Vec<Rational>, Vec<Rational>) {
    let cdf = f.cdf();
    let first = cdf.iter().map(|c| pow(c, n)).collect();
    let second = cdf
        .iter()
        .map(|c| pow(c, n) + int(n as i64) * pow(c, n - 1) * (Rational::one() - c))
        .collect();
    (first, second)
}

fn expectation_by_cdf(values: &[Rational], cdf: &[Rational], weight: impl Fn(usize) -> Rational) -> Rational {
    let mut prev = Rational::zero();
    let mut total = Rational::zero();
    for t in 0..values.len() {
        total += weight(t) * (&cdf[t] - &prev);
        prev = cdf[t].clone();
    }
    total
}

/// Expected revenue of `n`-agent Vickrey and of the optimal auction for i.i.d. `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRegularity {
    pub vickrey: f64,
    pub optimal: f64,
    /// Both revenues exactly, when computed in closed form.
    pub exact: Option<(Rational, Rational)>,
    /// Standard errors of the two means when sampled.
    pub stderr: Option<(f64, f64)>,
    /// `optimal / vickrey`.
    pub ratio: f64,
    /// Whether Vickrey is a 2-approximation.
    pub tail_regular: bool,
}

pub fn tail_regular(f: &DiscreteDistribution, n: usize, mode: Mode) -> Result<TailRegularity> {
    if n < 2 {
        return Err(Error::Precondition("tail regularity compares auctions with at least two agents".into()));
    }
    let phi = f.ironed_virtual_values();
    match mode {
        Mode::Exact => {
            let (first, second) = order_statistic_cdfs(f, n);
            let vickrey = expectation_by_cdf(f.values(), &second, |t| f.values()[t].clone());
            let optimal = expectation_by_cdf(f.values(), &first, |t| pos(&phi[t]));
            let regular = optimal <= int(2) * &vickrey;
            let ratio = if vickrey.is_zero() { f64::INFINITY } else { to_f64(&(&optimal / &vickrey)) };
            Ok(TailRegularity {
                vickrey: to_f64(&vickrey),
                optimal: to_f64(&optimal),
                exact: Some((vickrey, optimal)),
                stderr: None,
                ratio,
                tail_regular: regular,
            })
        }
        Mode::MonteCarlo { trials, seed } => {
            if trials < 2 {
                return Err(Error::Precondition("need at least two trials".into()));
            }
            let cum = f.cumulative_f64();
            let vals: Vec<f64> = f.values().iter().map(to_f64).collect();
            let phis: Vec<f64> = phi.iter().map(|p| to_f64(p).max(0.0)).collect();
            let draws = parallel_map(trials, default_workers(), |t| {
                let mut rng = crate::seed::trial_rng(seed, t as u64);
                let (mut hi, mut second) = (0usize, None::<usize>);
                for a in 0..n {
                    let i = f.sample_index(&cum, &mut rng);
                    if a == 0 {
                        hi = i;
                    } else if i >= hi {
                        second = Some(hi);
                        hi = i;
                    } else if second.is_none_or(|s| i > s) {
                        second = Some(i);
                    }
                }
                (vals[second.expect("n ≥ 2")], phis[hi])
            });
            let (v, o): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
            let (vm, vs) = super::stats::mean_stderr(&v);
            let (om, os) = super::stats::mean_stderr(&o);
            let ratio = om / vm;
            Ok(TailRegularity {
                vickrey: vm,
                optimal: om,
                exact: None,
                stderr: Some((vs, os)),
                ratio,
                tail_regular: ratio <= 2.0,
            })
        }
    }
}

/// Expected revenue of a single-item second-price auction with reserve `r` among `n`
/// i.i.d. draws of `f`.
pub fn second_price_reserve_revenue(f: &DiscreteDistribution, n: usize, r: &Rational) -> Rational {
    let (first, second) = order_statistic_cdfs(f, n);
    let below = f.values().partition_point(|a| a < r);
    let (f_below, g_below) = if below == 0 {
        (Rational::zero(), Rational::zero())
    } else {
        (first[below - 1].clone(), second[below - 1].clone())
    };
    // highest clears the reserve, second does not: pay r
    let mut total = r * (&g_below - &f_below);
    let mut prev = g_below;
    for t in below..f.len() {
        total += &f.values()[t] * (&second[t] - &prev);
        prev = second[t].clone();
    }
    total
}

/// Expected revenue of the optimal single-item auction among `n` i.i.d. draws of `f`.
pub fn optimal_single_item_revenue(f: &DiscreteDistribution, n: usize) -> Rational {
    let phi = f.ironed_virtual_values();
    let (first, _) = order_statistic_cdfs(f, n);
    expectation_by_cdf(f.values(), &first, |t| pos(&phi[t]))
}
