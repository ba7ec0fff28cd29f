//! Grid search for the envy-free optimum over the feasible-allocation polytope.
//!
//! The polytope of a symmetric environment is the convex hull of the (permutation-averaged)
//! characteristic vectors of feasible sets. Because it is symmetric and downward closed,
//! a sorted `x` belongs to it iff its prefix sums are dominated by those of a convex
//! combination of sorted vertices; membership is decided by a cutting-plane loop whose
//! separation step maximizes a nonnegative sorted weight vector over all feasible sets.

use num_traits::{Signed, Zero};

use super::ef_revenue;
use crate::environment::{Environment, Kind};
use crate::error::{Error, Result};
use crate::lp::maximize;
use crate::maximizer::for_each_permutation;
use crate::outcome::Allocation;
use crate::profile::ValuationProfile;
use crate::rational::{int, Rational};

pub const BRUTE_FORCE_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForce {
    pub revenue: Rational,
    /// Best grid allocation, rank order.
    pub allocation: Allocation,
    /// Grid points examined before the first feasible one.
    pub examined: usize,
}

/// Best envy-free revenue over swap-monotone allocations on the grid `{0, 1/g, …, 1}`.
pub fn brute_force_efo(env: &Environment, v: &ValuationProfile, grid: usize) -> Result<BruteForce> {
    let n = v.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit { n, limit: BRUTE_FORCE_LIMIT, what: "brute-force EFO" });
    }
    if grid == 0 {
        return Err(Error::Precondition("grid must be positive".into()));
    }
    if !env.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    if env.n() != n {
        return Err(Error::Precondition("environment and profile sizes differ".into()));
    }
    let g = int(grid as i64);
    let mut candidates: Vec<(Rational, Vec<Rational>)> = Vec::new();
    let mut cur = Vec::with_capacity(n);
    nonincreasing(n, grid, &mut cur, &mut |steps| {
        let x: Vec<Rational> = steps.iter().map(|&s| int(s as i64) / &g).collect();
        let a = Allocation::new(x.clone()).expect("grid point");
        let rev = ef_revenue(&a, v).expect("monotone");
        candidates.push((rev, x));
    });
    candidates.sort_by(|a, b| b.0.cmp(&a.0));
    let mut poly = Polytope::new(env)?;
    for (examined, (rev, x)) in candidates.into_iter().enumerate() {
        if poly.contains(&x)? {
            return Ok(BruteForce { revenue: rev, allocation: Allocation::new(x)?, examined: examined + 1 });
        }
    }
    unreachable!("the zero allocation is always feasible")
}

fn nonincreasing(n: usize, max: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == n {
        f(cur);
        return;
    }
    let top = cur.last().copied().unwrap_or(max);
    for s in (0..=top).rev() {
        cur.push(s);
        nonincreasing(n, max, cur, f);
        cur.pop();
    }
}

fn prefix(x: &[Rational]) -> Vec<Rational> {
    let mut acc = Rational::zero();
    x.iter()
        .map(|a| {
            acc += a;
            acc.clone()
        })
        .collect()
}

/// Symmetric feasible-allocation polytope with a cache of sorted vertices.
struct Polytope<'e> {
    env: &'e Environment,
    /// Feasible role sets (bitmasks) for set-system kinds.
    feasible: Vec<u64>,
    vertices: Vec<Vec<Rational>>,
    /// Prefix-sum caps `max_{y∈P} Σ_{i≤j} y_i`.
    caps: Vec<Rational>,
}

impl<'e> Polytope<'e> {
    fn new(env: &'e Environment) -> Result<Self> {
        let n = env.n();
        let feasible = if env.is_symmetric_kind() {
            Vec::new()
        } else {
            (0u64..1 << n)
                .filter(|&m| {
                    let roles: Vec<usize> = (0..n).filter(|&a| m >> a & 1 == 1).collect();
                    env.roles_feasible(&roles)
                })
                .collect()
        };
        let mut p = Polytope { env, feasible, vertices: Vec::new(), caps: Vec::new() };
        for j in 1..=n {
            let c: Vec<Rational> = (0..n).map(|i| if i < j { int(1) } else { int(0) }).collect();
            let (h, y) = p.support(&c);
            p.caps.push(h);
            p.add_vertex(y);
        }
        Ok(p)
    }

    fn add_vertex(&mut self, mut y: Vec<Rational>) {
        y.sort_by(|a, b| b.cmp(a));
        let s = prefix(&y);
        if !self.vertices.contains(&s) {
            self.vertices.push(s);
        }
    }

    /// `max_{y∈P} c·y` for sorted nonnegative `c`, with a maximizing point.
    fn support(&self, c: &[Rational]) -> (Rational, Vec<Rational>) {
        let n = self.env.n();
        match self.env.kind() {
            Kind::DigitalGood => (crate::rational::sum(c), vec![int(1); n]),
            Kind::Position { .. } => {
                let w = self.env.position_weights().expect("position");
                let h = c.iter().zip(&w).fold(Rational::zero(), |s, (a, b)| s + a * b);
                (h, w)
            }
            _ if self.env.is_symmetric_kind() => {
                let k = self.env.units().expect("counting kind");
                let y: Vec<Rational> = (0..n).map(|i| if i < k { int(1) } else { int(0) }).collect();
                (c.iter().take(k).fold(Rational::zero(), |s, a| s + a), y)
            }
            _ => {
                // average over role permutations of the best feasible set
                let mut total = Rational::zero();
                let mut y = vec![Rational::zero(); n];
                let mut count = 0i64;
                for_each_permutation(n, |pi| {
                    let mut best = Rational::zero();
                    let mut arg = 0u64;
                    for &f in &self.feasible {
                        let mut s = Rational::zero();
                        let mut agents = 0u64;
                        for (a, &role) in pi.iter().enumerate() {
                            if f >> role & 1 == 1 {
                                s += &c[a];
                                agents |= 1 << a;
                            }
                        }
                        if s > best {
                            best = s;
                            arg = agents;
                        }
                    }
                    total += best;
                    for (a, ya) in y.iter_mut().enumerate() {
                        if arg >> a & 1 == 1 {
                            *ya += int(1);
                        }
                    }
                    count += 1;
                });
                let d = int(count);
                (total / &d, y.into_iter().map(|a| a / &d).collect())
            }
        }
    }

    fn contains(&mut self, x: &[Rational]) -> Result<bool> {
        let n = x.len();
        let sx = prefix(x);
        if sx.iter().zip(&self.caps).any(|(a, b)| a > b) {
            return Ok(false);
        }
        if self.vertices.iter().any(|sy| sx.iter().zip(sy).all(|(a, b)| a <= b)) {
            return Ok(true);
        }
        loop {
            // variables d_1..d_n, mu; maximize d·s(x) − mu
            let mut obj = sx.clone();
            obj.push(int(-1));
            let mut rows: Vec<Vec<Rational>> = self
                .vertices
                .iter()
                .map(|sy| {
                    let mut r = sy.clone();
                    r.push(int(-1));
                    r
                })
                .collect();
            let mut norm = vec![int(1); n];
            norm.push(int(0));
            rows.push(norm);
            let mut rhs = vec![Rational::zero(); rows.len()];
            *rhs.last_mut().expect("norm row") = int(1);
            let sol = maximize(&obj, &rows, &rhs)?.expect("bounded by the norm row");
            if !sol.value.is_positive() {
                return Ok(true);
            }
            let d = &sol.z[..n];
            let mut c = vec![Rational::zero(); n];
            let mut acc = Rational::zero();
            for i in (0..n).rev() {
                acc += &d[i];
                c[i] = acc.clone();
            }
            let cx = c.iter().zip(x).fold(Rational::zero(), |s, (a, b)| s + a * b);
            let (h, y) = self.support(&c);
            if cx > h {
                return Ok(false);
            }
            let before = self.vertices.len();
            self.add_vertex(y);
            if self.vertices.len() == before {
                return Err(Error::Precondition("cutting plane made no progress".into()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn prof(v: &[i64]) -> ValuationProfile {
        ValuationProfile::from_ints(v).unwrap()
    }

    #[test]
    fn worked_example() {
        let env = Environment::multi_unit(3, 2).unwrap();
        let b = brute_force_efo(&env, &prof(&[6, 4, 4]), 4).unwrap();
        assert_eq!(b.revenue, int(9));
        assert_eq!(b.allocation.probs(), &[int(1), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn single_unit_and_single_agent() {
        let env = Environment::multi_unit(3, 1).unwrap();
        let b = brute_force_efo(&env, &prof(&[6, 4, 4]), 4).unwrap();
        assert_eq!(b.revenue, int(6));
        assert_eq!(b.allocation.probs(), &[int(1), int(0), int(0)]);
        let one = brute_force_efo(&Environment::digital_good(1), &prof(&[5]), 2).unwrap();
        assert_eq!(one.revenue, int(5));
    }

    #[test]
    fn permuted_one_vs_two() {
        // roles 0,1 small side, role 2 singleton
        let env = Environment::downward_closed(3, &[vec![0, 1], vec![2]]).unwrap().permutation();
        let mut p = Polytope::new(&env).unwrap();
        // the top agent is served at most w.p. 1 and two agents in total at most 4/3
        assert!(p.contains(&[int(1), q(1, 3), int(0)]).unwrap());
        assert!(!p.contains(&[int(1), q(1, 2), int(0)]).unwrap());
        assert!(p.contains(&[q(2, 3), q(2, 3), q(2, 3)]).unwrap());
        assert!(!p.contains(&[q(3, 4), q(3, 4), q(3, 4)]).unwrap());
    }

    #[test]
    fn rejects_large_and_asymmetric() {
        let v = prof(&[1; 7]);
        assert!(brute_force_efo(&Environment::digital_good(7), &v, 2).is_err());
        let env = Environment::downward_closed(2, &[vec![0]]).unwrap();
        assert_eq!(brute_force_efo(&env, &prof(&[2, 1]), 2).unwrap_err(), Error::Asymmetric);
    }
}
