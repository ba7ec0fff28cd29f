//! Feasibility environments.
//!
//! Asymmetric set systems are described over *roles* `0..n`. An agent's role is its id
//! unless the environment carries a relabeling (see [`permute_environment`]). A permutation
//! environment (`permuted = true`) stands for the distribution over uniformly random
//! relabelings; its feasibility oracle answers for the identity labeling.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::matching::{transversal_is_independent, Bipartite, IncrementalMatching};
use crate::rational::Rational;

/// Explicit families are limited to this many agents.
pub const EXPLICIT_LIMIT: usize = 20;

pub type SetOracle = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Matroid {
    Uniform { k: usize },
    /// `sector[a]` is the sector of role `a`; at most `capacity[s]` roles from sector `s`.
    Partition { sector: Vec<usize>, capacity: Vec<usize> },
    Transversal(Bipartite),
}

#[derive(Clone)]
pub enum Family {
    /// Downward closure of the listed sets (stored as bitmasks, only maximal ones kept).
    Explicit(Vec<u64>),
    Oracle(SetOracle),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Explicit(m) => f.debug_tuple("Explicit").field(m).finish(),
            Family::Oracle(_) => f.write_str("Oracle(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Kind {
    DigitalGood,
    MultiUnit { k: usize },
    /// Nonincreasing weights; positions past the end have weight 0.
    Position { weights: Vec<Rational> },
    Matroid(Matroid),
    DownwardClosed(Family),
    /// Role `a` wants `bundles[a]` out of `items` goods.
    SingleMinded { items: usize, bundles: Vec<Vec<usize>> },
}

#[derive(Debug, Clone)]
pub struct Environment {
    n: usize,
    kind: Kind,
    permuted: bool,
    relabel: Option<Vec<usize>>,
    /// Maximal feasible role sets for explicit and single-minded systems.
    maximal: Option<Arc<Vec<u64>>>,
}

impl Environment {
    pub fn new(n: usize, kind: Kind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidEnvironment("no agents".into()));
        }
        validate(n, &kind)?;
        let maximal = match &kind {
            Kind::DownwardClosed(Family::Explicit(sets)) => Some(Arc::new(keep_maximal(sets.clone()))),
            Kind::SingleMinded { bundles, .. } if n <= EXPLICIT_LIMIT => {
                Some(Arc::new(maximal_disjoint(bundles)))
            }
            _ => None,
        };
        Ok(Self { n, kind, permuted: false, relabel: None, maximal })
    }

    pub fn digital_good(n: usize) -> Self {
        Self::new(n, Kind::DigitalGood).expect("valid")
    }

    pub fn multi_unit(n: usize, k: usize) -> Result<Self> {
        Self::new(n, Kind::MultiUnit { k })
    }

    pub fn position(n: usize, weights: Vec<Rational>) -> Result<Self> {
        Self::new(n, Kind::Position { weights })
    }

    pub fn uniform_matroid(n: usize, k: usize) -> Result<Self> {
        Self::new(n, Kind::Matroid(Matroid::Uniform { k }))
    }

    pub fn partition_matroid(sector: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        Self::new(sector.len(), Kind::Matroid(Matroid::Partition { sector, capacity }))
    }

    pub fn transversal_matroid(items: usize, desires: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(desires.len(), Kind::Matroid(Matroid::Transversal(Bipartite { items, desires })))
    }

    /// Downward closure of `sets` (lists of roles).
    pub fn downward_closed(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if n > EXPLICIT_LIMIT {
            return Err(Error::SizeLimit { n, limit: EXPLICIT_LIMIT, what: "explicit set families" });
        }
        let mut masks = Vec::with_capacity(sets.len());
        for s in sets {
            let mut m = 0u64;
            for &a in s {
                if a >= n {
                    return Err(Error::IndexOutOfRange { index: a, n });
                }
                m |= 1 << a;
            }
            masks.push(m);
        }
        Self::new(n, Kind::DownwardClosed(Family::Explicit(masks)))
    }

    pub fn downward_closed_oracle(n: usize, oracle: SetOracle) -> Result<Self> {
        Self::new(n, Kind::DownwardClosed(Family::Oracle(oracle)))
    }

    pub fn single_minded(items: usize, bundles: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(bundles.len(), Kind::SingleMinded { items, bundles })
    }

    /// The permutation environment over this set system.
    pub fn permutation(mut self) -> Self {
        self.permuted = true;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn is_permuted(&self) -> bool {
        self.permuted
    }

    pub fn relabeling(&self) -> Option<&[usize]> {
        self.relabel.as_deref()
    }

    /// Kinds whose feasibility depends only on set sizes.
    pub fn is_symmetric_kind(&self) -> bool {
        matches!(
            self.kind,
            Kind::DigitalGood | Kind::MultiUnit { .. } | Kind::Position { .. } | Kind::Matroid(Matroid::Uniform { .. })
        )
    }

    pub fn is_symmetric(&self) -> bool {
        self.permuted || self.is_symmetric_kind()
    }

    pub fn is_matroid(&self) -> bool {
        matches!(self.kind, Kind::DigitalGood | Kind::MultiUnit { .. } | Kind::Matroid(_))
    }

    /// Number of units for counting kinds (`n` for digital goods).
    pub fn units(&self) -> Option<usize> {
        match self.kind {
            Kind::DigitalGood => Some(self.n),
            Kind::MultiUnit { k } | Kind::Matroid(Matroid::Uniform { k }) => Some(k.min(self.n)),
            _ => None,
        }
    }

    /// Weight of each position `0..n` for position environments.
    pub fn position_weights(&self) -> Option<Vec<Rational>> {
        match &self.kind {
            Kind::Position { weights } => {
                Some((0..self.n).map(|j| weights.get(j).cloned().unwrap_or_else(Rational::zero)).collect())
            }
            _ => None,
        }
    }

    pub fn role_of(&self, agent: usize) -> usize {
        self.relabel.as_ref().map_or(agent, |r| r[agent])
    }

    /// True iff the agents in `set` may be served together.
    pub fn is_feasible(&self, set: &[usize]) -> Result<bool> {
        if let Some(&a) = set.iter().find(|&&a| a >= self.n) {
            return Err(Error::IndexOutOfRange { index: a, n: self.n });
        }
        let mut roles: Vec<usize> = set.iter().map(|&a| self.role_of(a)).collect();
        roles.sort_unstable();
        roles.dedup();
        Ok(self.roles_feasible(&roles))
    }

    /// Feasibility of a duplicate-free set of roles in the underlying set system.
    pub fn roles_feasible(&self, roles: &[usize]) -> bool {
        match &self.kind {
            Kind::DigitalGood => true,
            Kind::MultiUnit { k } | Kind::Matroid(Matroid::Uniform { k }) => roles.len() <= *k,
            Kind::Position { .. } => roles.len() <= self.n,
            Kind::Matroid(Matroid::Partition { sector, capacity }) => {
                let mut used = vec![0usize; capacity.len()];
                roles.iter().all(|&a| {
                    used[sector[a]] += 1;
                    used[sector[a]] <= capacity[sector[a]]
                })
            }
            Kind::Matroid(Matroid::Transversal(g)) => transversal_is_independent(g, roles),
            Kind::DownwardClosed(Family::Explicit(_)) => {
                let m = mask(roles);
                self.maximal.as_ref().expect("cached").iter().any(|&f| m & !f == 0)
            }
            Kind::DownwardClosed(Family::Oracle(f)) => f(roles),
            Kind::SingleMinded { items, bundles } => {
                let mut taken = vec![false; *items];
                roles.iter().all(|&a| {
                    bundles[a].iter().all(|&g| !std::mem::replace(&mut taken[g], true))
                })
            }
        }
    }

    /// Maximal feasible role sets as bitmasks, when the system is small and explicit.
    pub fn maximal_sets(&self) -> Option<&[u64]> {
        self.maximal.as_deref().map(|v| v.as_slice())
    }

    /// Same set system under the relabeling `roles` (agent id -> role).
    pub fn relabeled(&self, roles: Vec<usize>) -> Self {
        let mut e = self.clone();
        e.relabel = Some(roles);
        e.permuted = false;
        e
    }

    /// Incremental independence tester over roles, for matroid kinds.
    pub fn independence(&self) -> Option<Independence<'_>> {
        Some(match &self.kind {
            Kind::DigitalGood => Independence::Free,
            Kind::MultiUnit { k } | Kind::Matroid(Matroid::Uniform { k }) => Independence::Count { left: *k },
            Kind::Matroid(Matroid::Partition { sector, capacity }) => {
                Independence::Sectors { sector, left: capacity.clone() }
            }
            Kind::Matroid(Matroid::Transversal(g)) => Independence::Matching(IncrementalMatching::new(g)),
            _ => return None,
        })
    }
}

/// Greedy independence state.
pub enum Independence<'e> {
    Free,
    Count { left: usize },
    Sectors { sector: &'e [usize], left: Vec<usize> },
    Matching(IncrementalMatching<'e>),
}

impl Independence<'_> {
    /// Adds `role` if the current set stays independent.
    pub fn try_add(&mut self, role: usize) -> bool {
        match self {
            Independence::Free => true,
            Independence::Count { left } => {
                if *left > 0 {
                    *left -= 1;
                    true
                } else {
                    false
                }
            }
            Independence::Sectors { sector, left } => {
                let s = sector[role];
                if left[s] > 0 {
                    left[s] -= 1;
                    true
                } else {
                    false
                }
            }
            Independence::Matching(m) => m.try_add(role),
        }
    }
}

/// Draws a uniform relabeling and applies it to the feasibility oracle.
pub fn permute_environment(env: &Environment, seed: u64) -> Result<Environment> {
    if env.permuted || env.relabel.is_some() {
        return Err(Error::Precondition("environment is already permuted".into()));
    }
    let mut rng = crate::seed::rng(seed);
    Ok(env.relabeled(random_permutation(env.n, &mut rng)))
}

pub fn random_permutation(n: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn mask(roles: &[usize]) -> u64 {
    roles.iter().fold(0u64, |m, &a| m | (1 << a))
}

pub fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&a| mask >> a & 1 == 1).collect()
}

fn keep_maximal(mut sets: Vec<u64>) -> Vec<u64> {
    sets.sort_unstable_by_key(|m| std::cmp::Reverse(m.count_ones()));
    sets.dedup();
    let mut out: Vec<u64> = Vec::new();
    for s in sets {
        if !out.iter().any(|&f| s & !f == 0) {
            out.push(s);
        }
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

/// Maximal sets of roles with pairwise disjoint bundles.
fn maximal_disjoint(bundles: &[Vec<usize>]) -> Vec<u64> {
    let n = bundles.len();
    let conflict: Vec<u64> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a && bundles[a].iter().any(|g| bundles[b].contains(g)))
                .fold(0u64, |m, b| m | 1 << b)
        })
        .collect();
    // an agent with a self-overlapping bundle never conflicts with itself here
    let mut out = Vec::new();
    bron_kerbosch(0, (1u64 << n) - 1, 0, &conflict, &mut out);
    keep_maximal(out)
}

fn bron_kerbosch(r: u64, p: u64, x: u64, conflict: &[u64], out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let (mut p, mut x) = (p, x);
    while p != 0 {
        let v = p.trailing_zeros() as usize;
        let keep = !conflict[v] & !(1 << v);
        bron_kerbosch(r | 1 << v, p & keep, x & keep, conflict, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

fn validate(n: usize, kind: &Kind) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidEnvironment(m));
    match kind {
        Kind::DigitalGood => {}
        Kind::MultiUnit { k } | Kind::Matroid(Matroid::Uniform { k }) => {
            if *k == 0 {
                return bad("number of units must be positive".into());
            }
        }
        Kind::Position { weights } => {
            if weights.iter().any(|w| w.is_negative() || *w > Rational::one()) {
                return bad("position weights must lie in [0,1]".into());
            }
            if weights.windows(2).any(|p| p[1] > p[0]) {
                return bad("position weights must be nonincreasing".into());
            }
        }
        Kind::Matroid(Matroid::Partition { sector, capacity }) => {
            if let Some(a) = sector.iter().position(|&s| s >= capacity.len()) {
                return bad(format!("agent {a} lies in an undeclared sector"));
            }
        }
        Kind::Matroid(Matroid::Transversal(g)) => {
            if !g.well_formed() {
                return bad("desire graph names an unknown item".into());
            }
        }
        Kind::DownwardClosed(Family::Explicit(_)) => {
            if n > EXPLICIT_LIMIT {
                return Err(Error::SizeLimit { n, limit: EXPLICIT_LIMIT, what: "explicit set families" });
            }
        }
        Kind::DownwardClosed(Family::Oracle(_)) => {}
        Kind::SingleMinded { items, bundles } => {
            if bundles.iter().flatten().any(|&g| g >= *items) {
                return bad("bundle names an unknown item".into());
            }
            if n > 63 {
                return Err(Error::SizeLimit { n, limit: 63, what: "single-minded environments" });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_unit_counts() {
        let e = Environment::multi_unit(3, 2).unwrap();
        assert!(e.is_feasible(&[0, 2]).unwrap());
        assert!(!e.is_feasible(&[0, 1, 2]).unwrap());
        assert!(e.is_feasible(&[3]).is_err());
    }

    #[test]
    fn single_minded_overlap() {
        let e = Environment::single_minded(2, vec![vec![0], vec![0, 1]]).unwrap();
        assert!(!e.is_feasible(&[0, 1]).unwrap());
        assert!(e.is_feasible(&[1]).unwrap());
        assert_eq!(e.maximal_sets().unwrap().len(), 2);
    }

    #[test]
    fn one_vs_n_family() {
        // roles 0,1 are small, role 2 is big
        let e = Environment::downward_closed(3, &[vec![0, 1], vec![2]]).unwrap();
        assert!(e.is_feasible(&[2]).unwrap());
        assert!(!e.is_feasible(&[2, 0]).unwrap());
        assert!(e.is_feasible(&[]).unwrap());
    }

    #[test]
    fn partition_capacity() {
        let e = Environment::partition_matroid(vec![0, 0, 1], vec![1, 1]).unwrap();
        assert!(!e.is_feasible(&[0, 1]).unwrap());
        assert!(e.is_feasible(&[0, 2]).unwrap());
    }

    #[test]
    fn relabeling_moves_roles() {
        let e = Environment::downward_closed(3, &[vec![0, 1], vec![2]]).unwrap();
        let r = e.relabeled(vec![2, 0, 1]);
        assert!(r.is_feasible(&[0]).unwrap());
        assert!(!r.is_feasible(&[0, 1]).unwrap());
        assert!(r.is_feasible(&[1, 2]).unwrap());
    }

    #[test]
    fn permute_is_deterministic() {
        let e = Environment::downward_closed(3, &[vec![0, 1], vec![2]]).unwrap();
        let a = permute_environment(&e, 9).unwrap();
        let b = permute_environment(&e, 9).unwrap();
        assert_eq!(a.relabeling(), b.relabeling());
        assert!(permute_environment(&a, 1).is_err());
    }

    #[test]
    fn invalid_position_weights() {
        use crate::rational::q;
        assert!(Environment::position(2, vec![q(1, 2), q(1, 1)]).is_err());
        assert!(Environment::position(2, vec![q(3, 2)]).is_err());
    }
}
