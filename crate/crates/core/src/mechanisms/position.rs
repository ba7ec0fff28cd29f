//! Position auctions from families of `k`-unit auctions, via a decomposition of the
//! mixed allocation into distributions over position assignments.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::incentive::{Coins, Mechanism, MechanismRun, PaymentRule};
use crate::profile::ValuationProfile;
use crate::rational::{sum, Rational};

/// `x = Σ_t r_t π_t(w)` with `π_t(w)_i = w[perm_t[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDecomposition {
    pub terms: Vec<(Rational, Vec<usize>)>,
}

impl WeightDecomposition {
    pub fn reconstruct(&self, w: &[Rational]) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); w.len()];
        for (r, perm) in &self.terms {
            for (i, &j) in perm.iter().enumerate() {
                if !w[j].is_zero() {
                    x[i] += r * &w[j];
                }
            }
        }
        x
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Picks a term with probability `r_t` from a uniform `u ∈ [0, 1)`.
    pub fn pick(&self, u: &Rational) -> &[usize] {
        let mut acc = Rational::zero();
        for (r, perm) in &self.terms {
            acc += r;
            if *u < acc {
                return perm;
            }
        }
        &self.terms.last().expect("nonempty").1
    }
}

/// Writes `x` as a convex combination of permutations of the nonincreasing `w`.
///
/// Requires equal sums and `w` majorizing `x`. Builds a doubly stochastic matrix from a
/// chain of T-transforms, splits it into permutation matrices by bottleneck weight, and
/// prunes affinely dependent terms until at most `n` remain.
pub fn decompose_majorized(w: &[Rational], x: &[Rational]) -> Result<WeightDecomposition> {
    let m = w.len();
    if x.len() != m || m == 0 {
        return Err(Error::Precondition("weights and target must have the same positive length".into()));
    }
    if w.windows(2).any(|p| p[0] < p[1]) {
        return Err(Error::Precondition("weights must be nonincreasing".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| x[b].cmp(&x[a]).then(a.cmp(&b)));
    let xs: Vec<Rational> = order.iter().map(|&i| x[i].clone()).collect();
    let (mut pw, mut px) = (Rational::zero(), Rational::zero());
    for k in 0..m {
        pw += &w[k];
        px += &xs[k];
        if px > pw {
            return Err(Error::Precondition(format!("majorization fails at prefix {}: {} > {}", k + 1, px, pw)));
        }
    }
    if px != pw {
        return Err(Error::Precondition(format!("sums differ: {px} vs {pw}")));
    }
    let d = t_transform_chain(w, &xs);
    let terms = birkhoff(d);
    let mut terms: Vec<(Rational, Vec<usize>)> = terms
        .into_iter()
        .map(|(r, cols)| {
            let mut perm = vec![0; m];
            for (row, c) in cols.into_iter().enumerate() {
                perm[order[row]] = c;
            }
            (r, perm)
        })
        .collect();
    prune(&mut terms, w);
    Ok(WeightDecomposition { terms })
}

/// Doubly stochastic `D` with `D w = xs`, both sorted nonincreasing.
fn t_transform_chain(w: &[Rational], xs: &[Rational]) -> Vec<Vec<Rational>> {
    let m = w.len();
    let mut d: Vec<Vec<Rational>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    let mut y = w.to_vec();
    while let Some(j) = (0..m).rev().find(|&i| y[i] > xs[i]) {
        let k = (j + 1..m).find(|&i| y[i] < xs[i]).expect("majorization leaves a deficit below");
        let delta = (&y[j] - &xs[j]).min(&xs[k] - &y[k]);
        let lambda = &delta / (&y[j] - &y[k]);
        let keep = Rational::one() - &lambda;
        let (rj, rk) = (d[j].clone(), d[k].clone());
        for c in 0..m {
            d[j][c] = &keep * &rj[c] + &lambda * &rk[c];
            d[k][c] = &lambda * &rj[c] + &keep * &rk[c];
        }
        y[j] -= &delta;
        y[k] += &delta;
    }
    d
}

/// Greedy Birkhoff split: `(weight, column of each row)`.
fn birkhoff(mut d: Vec<Vec<Rational>>) -> Vec<(Rational, Vec<usize>)> {
    let m = d.len();
    let mut out = Vec::new();
    loop {
        let Some(cols) = perfect_matching(&d) else { break };
        let r = (0..m).map(|i| d[i][cols[i]].clone()).min().expect("nonempty");
        for i in 0..m {
            d[i][cols[i]] -= &r;
        }
        out.push((r, cols));
    }
    out
}

fn perfect_matching(d: &[Vec<Rational>]) -> Option<Vec<usize>> {
    let m = d.len();
    let mut owner: Vec<Option<usize>> = vec![None; m];
    fn augment(d: &[Vec<Rational>], row: usize, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for c in 0..d.len() {
            if d[row][c].is_positive() && !seen[c] {
                seen[c] = true;
                if owner[c].is_none_or(|r| augment(d, r, seen, owner)) {
                    owner[c] = Some(row);
                    return true;
                }
            }
        }
        false
    }
    for row in 0..m {
        let mut seen = vec![false; m];
        if !augment(d, row, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut cols = vec![0; m];
    for (c, r) in owner.into_iter().enumerate() {
        cols[r.expect("perfect")] = c;
    }
    Some(cols)
}

/// Carathéodory pruning: while more than `n` distinct points remain, move weight along
/// an affine dependence until a term vanishes.
fn prune(terms: &mut Vec<(Rational, Vec<usize>)>, w: &[Rational]) {
    let m = w.len();
    let point = |perm: &[usize]| -> Vec<Rational> { perm.iter().map(|&j| w[j].clone()).collect() };
    // merge terms giving the same point
    let mut merged: Vec<(Rational, Vec<usize>, Vec<Rational>)> = Vec::new();
    for (r, perm) in terms.drain(..) {
        let p = point(&perm);
        match merged.iter_mut().find(|t| t.2 == p) {
            Some(t) => t.0 += r,
            None => merged.push((r, perm, p)),
        }
    }
    while merged.len() > m {
        let pts: Vec<&Vec<Rational>> = merged.iter().take(m + 1).map(|t| &t.2).collect();
        let c = affine_dependence(&pts);
        let alpha = (0..c.len())
            .filter(|&t| c[t].is_positive())
            .map(|t| &merged[t].0 / &c[t])
            .min()
            .expect("a dependence with zero sum has a positive entry");
        for (t, ct) in c.iter().enumerate() {
            merged[t].0 -= &alpha * ct;
        }
        merged.retain(|t| t.0.is_positive());
    }
    terms.extend(merged.into_iter().map(|(r, perm, _)| (r, perm)));
}

/// Nonzero `c` with `Σ c_t` = 0 and `Σ c_t p_t = 0`, for `m + 1` points in `Q^m` whose
/// coordinates share a common sum.
fn affine_dependence(pts: &[&Vec<Rational>]) -> Vec<Rational> {
    let cols = pts.len();
    let rows = pts[0].len() + 1;
    // matrix with a row of ones on top
    let mut a: Vec<Vec<Rational>> = (0..rows)
        .map(|r| (0..cols).map(|t| if r == 0 { Rational::one() } else { pts[t][r - 1].clone() }).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = Rational::one() / &a[row][col];
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        let pr = a[row].clone();
        for (r, line) in a.iter_mut().enumerate() {
            if r != row && !line[col].is_zero() {
                let f = line[col].clone();
                for (x, y) in line.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    let free = (0..cols).find(|c| !pivots.contains(c)).expect("more points than the affine dimension allows");
    let mut c = vec![Rational::zero(); cols];
    c[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        c[pc] = -a[r][free].clone();
    }
    c
}

/// The mixture of `k`-unit mechanisms with weights `w_k − w_{k+1}`, realized as a position
/// auction. All family members share one coin structure and receive the same coins.
pub struct PositionReduction {
    /// Member `k − 1` sells `k` units to the same `n` agents.
    pub family: Vec<Box<dyn Mechanism>>,
    pub weights: Vec<Rational>,
}

/// A sampled position assignment of the real agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub decomposition: WeightDecomposition,
    /// Padded weights `(w, 0ⁿ)`.
    pub padded_weights: Vec<Rational>,
    /// Padded target of real agents followed by dummies.
    pub padded_target: Vec<Rational>,
    /// Position (0-based) of each real agent, `None` for a dummy or zero-weight position.
    pub positions: Vec<Option<usize>>,
}

impl PositionReduction {
    pub fn new(family: Vec<Box<dyn Mechanism>>, weights: Vec<Rational>) -> Result<Self> {
        let n = weights.len();
        if family.len() != n || family.iter().any(|m| m.n() != n) {
            return Err(Error::Precondition(format!("need one {n}-agent mechanism per unit count")));
        }
        if weights.windows(2).any(|p| p[0] < p[1]) || weights.iter().any(|x| x.is_negative() || *x > Rational::one()) {
            return Err(Error::InvalidEnvironment("position weights must be nonincreasing in [0, 1]".into()));
        }
        Ok(Self { family, weights })
    }

    fn mix(&self, k: usize) -> Rational {
        let next = self.weights.get(k).cloned().unwrap_or_else(Rational::zero);
        &self.weights[k - 1] - next
    }

    /// The decomposition of the padded mixture and the assignment selected by `u ∈ [0,1)`.
    pub fn assign(&self, reports: &[Rational], coins: &Coins, u: &Rational) -> Result<Assignment> {
        let n = self.weights.len();
        let mut target = vec![Rational::zero(); 2 * n];
        for k in 1..=n {
            let f = self.mix(k);
            if f.is_zero() {
                continue;
            }
            let mut xk = self.family[k - 1].allocate(reports, coins)?;
            let mut left = Rational::from_integer(BigInt::from(k)) - sum(&xk);
            // leftover units go to the dummies for free
            for _ in 0..n {
                let give = left.clone().min(Rational::one());
                xk.push(give.clone());
                left -= give;
            }
            for (t, xi) in target.iter_mut().zip(&xk) {
                *t += &f * xi;
            }
        }
        let mut padded = self.weights.clone();
        padded.extend((0..n).map(|_| Rational::zero()));
        let decomposition = decompose_majorized(&padded, &target)?;
        let perm = decomposition.pick(u).to_vec();
        let positions = (0..n).map(|a| (perm[a] < n && padded[perm[a]].is_positive()).then_some(perm[a])).collect();
        Ok(Assignment { decomposition, padded_weights: padded, padded_target: target, positions })
    }
}

impl Mechanism for PositionReduction {
    fn name(&self) -> String {
        format!("position-reduction({})", self.family[0].name())
    }

    fn n(&self) -> usize {
        self.weights.len()
    }

    fn allocate(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let mut x = vec![Rational::zero(); self.n()];
        for k in 1..=self.n() {
            let f = self.mix(k);
            if f.is_zero() {
                continue;
            }
            for (a, b) in x.iter_mut().zip(self.family[k - 1].allocate(reports, coins)?) {
                *a += &f * b;
            }
        }
        Ok(x)
    }

    fn payment_rule(&self) -> PaymentRule {
        PaymentRule::Custom
    }

    /// The same mixture of the simulated `k`-unit payments.
    fn payments(&self, reports: &[Rational], coins: &Coins) -> Result<Vec<Rational>> {
        let mut p = vec![Rational::zero(); self.n()];
        for k in 1..=self.n() {
            let f = self.mix(k);
            if f.is_zero() {
                continue;
            }
            for (a, b) in p.iter_mut().zip(self.family[k - 1].payments(reports, coins)?) {
                *a += &f * b;
            }
        }
        Ok(p)
    }

    fn extra_breakpoints(&self) -> Vec<Rational> {
        self.family.iter().flat_map(|m| m.extra_breakpoints()).collect()
    }

    fn coin_space(&self) -> Option<Vec<(Coins, Rational)>> {
        self.family[0].coin_space()
    }

    fn draw_coins(&self, rng: &mut dyn RngCore) -> Coins {
        self.family[0].draw_coins(rng)
    }
}

/// Uniform rational in `[0, 1)` with 53 random bits.
pub fn uniform_unit(rng: &mut dyn RngCore) -> Rational {
    Rational::new(BigInt::from(rng.next_u64() >> 11), BigInt::from(1u64) << 53)
}

/// One run of the position reduction with its sampled assignment.
pub fn position_reduction(family: Vec<Box<dyn Mechanism>>, w: Vec<Rational>, v: &ValuationProfile, seed: u64) -> Result<(MechanismRun, Assignment)> {
    let m = PositionReduction::new(family, w)?;
    if m.n() != v.n() {
        return Err(Error::Precondition(format!("weights cover {} agents, profile has {}", m.n(), v.n())));
    }
    let mut rng = crate::seed::rng(seed);
    let coins = m.draw_coins(&mut rng);
    let u = uniform_unit(&mut rng);
    let reports = v.by_id();
    let assignment = m.assign(&reports, &coins, &u)?;
    Ok((crate::incentive::run(&m, &reports, coins)?, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};
    use proptest::prelude::*;

    #[test]
    fn worked_decomposition() {
        let w = vec![int(1), q(1, 2), int(0)];
        let x = vec![q(3, 4), q(1, 2), q(1, 4)];
        let d = decompose_majorized(&w, &x).unwrap();
        assert_eq!(d.reconstruct(&w), x);
        assert_eq!(sum(d.terms.iter().map(|t| &t.0)), int(1));
        assert!(d.len() <= 5);
    }

    #[test]
    fn identity_and_average() {
        let w = vec![int(3), int(2), int(1)];
        let d = decompose_majorized(&w, &w).unwrap();
        assert_eq!(d.terms, vec![(int(1), vec![0, 1, 2])]);
        let avg = vec![int(2); 3];
        let d = decompose_majorized(&w, &avg).unwrap();
        assert_eq!(d.reconstruct(&w), avg);
    }

    #[test]
    fn rejects_non_majorized() {
        let w = vec![int(2), int(1), int(0)];
        let e = decompose_majorized(&w, &[int(3), int(0), int(0)]).unwrap_err();
        assert!(matches!(e, Error::Precondition(s) if s.contains("prefix 1")));
    }

    fn majorized_pair() -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>)> {
        (2usize..7).prop_flat_map(|m| {
            (proptest::collection::vec(0i64..6, m), proptest::collection::vec(0i64..4, m * m)).prop_map(move |(w, mix)| {
                let mut w: Vec<Rational> = w.into_iter().map(int).collect();
                w.sort_by(|a, b| b.cmp(a));
                // x = D w for a random doubly stochastic D (average of permutation-like rows)
                let perms: Vec<Vec<usize>> = (0..m).map(|s| (0..m).map(|i| (i * (mix[s] as usize + 1) + s) % m).collect()).collect();
                let identity: Vec<usize> = (0..m).collect();
                let mut valid: Vec<&Vec<usize>> = perms.iter().filter(|p| {
                    let mut q = (*p).clone();
                    q.sort_unstable();
                    q == identity
                }).collect();
                valid.push(&identity);
                let t = int(valid.len() as i64);
                let x: Vec<Rational> = (0..m)
                    .map(|i| valid.iter().fold(Rational::zero(), |s, p| s + &w[p[i]]) / &t)
                    .collect();
                (w, x)
            })
        })
    }

    proptest! {
        #[test]
        fn reconstruction_is_exact((w, x) in majorized_pair()) {
            let d = decompose_majorized(&w, &x).unwrap();
            prop_assert_eq!(d.reconstruct(&w), x);
            prop_assert_eq!(sum(d.terms.iter().map(|t| &t.0)), int(1));
            prop_assert!(d.len() <= (w.len() - 1).pow(2) + 1);
            prop_assert!(d.terms.iter().all(|t| t.0.is_positive()));
        }
    }
}
