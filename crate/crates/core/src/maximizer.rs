//! Score-surplus maximization over an environment.
//!
//! Agents carry a score (an ironed virtual value, a bid, ...) or are ineligible. Only
//! eligible agents with strictly positive score are ever served. Equal scores are broken
//! at random, either exactly in expectation or by an explicit priority order.

use num_traits::{Signed, Zero};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::rational::{factorial, int, Rational};

/// Largest `n` for which role permutations are enumerated exactly.
pub const EXACT_PERMUTATION_LIMIT: usize = 8;
/// Largest number of tie orders enumerated exactly.
pub const EXACT_ORDER_LIMIT: usize = 40_320;

/// Randomness that resolves ties and roles.
///
/// * `roles` realizes a permutation environment (agent id -> role). If absent, the
///   expectation over all role permutations is taken.
/// * `priority` is a value-independent tie order (agent id -> rank, lower wins). If
///   absent, ties are averaged uniformly (in a permuted environment ties follow roles).
#[derive(Debug, Clone, Copy, Default)]
pub struct Ties<'a> {
    pub roles: Option<&'a [usize]>,
    pub priority: Option<&'a [usize]>,
}

/// Expected service probability of every agent (by id).
pub fn expected_service(env: &Environment, scores: &[Option<Rational>], ties: Ties<'_>) -> Result<Vec<Rational>> {
    let n = env.n();
    if scores.len() != n {
        return Err(Error::Precondition(format!("expected {n} scores, got {}", scores.len())));
    }
    if env.is_symmetric_kind() {
        return Ok(match ties.priority {
            Some(p) => realized(env, scores, &identity(n), p),
            None => class_average(env, scores),
        });
    }
    let positive: Vec<usize> = (0..n).filter(|&a| is_positive(&scores[a])).collect();
    if positive.is_empty() {
        return Ok(vec![Rational::zero(); n]);
    }
    if env.is_permuted() {
        if let Some(roles) = ties.roles {
            let prio = ties.priority.unwrap_or(roles);
            return Ok(realized(env, scores, roles, prio));
        }
        if n > EXACT_PERMUTATION_LIMIT {
            return Err(Error::SizeLimit { n, limit: EXACT_PERMUTATION_LIMIT, what: "exact role enumeration" });
        }
        let mut acc = vec![Rational::zero(); n];
        let mut count = 0u64;
        for_each_permutation(n, |pi| {
            let prio = ties.priority.unwrap_or(pi);
            add(&mut acc, &realized(env, scores, pi, prio));
            count += 1;
        });
        return Ok(scale(acc, count));
    }
    let roles: Vec<usize> = (0..n).map(|a| env.role_of(a)).collect();
    if let Some(p) = ties.priority {
        return Ok(realized(env, scores, &roles, p));
    }
    average_over_orders(env, scores, &roles, &positive)
}

fn is_positive(s: &Option<Rational>) -> bool {
    s.as_ref().is_some_and(|x| x.is_positive())
}

fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn add(acc: &mut [Rational], x: &[Rational]) {
    for (a, b) in acc.iter_mut().zip(x) {
        if !b.is_zero() {
            *a += b;
        }
    }
}

fn scale(acc: Vec<Rational>, count: u64) -> Vec<Rational> {
    let d = int(count as i64);
    acc.into_iter().map(|a| a / &d).collect()
}

/// Positive eligible agents sorted by score descending, then by `prio`.
fn order(scores: &[Option<Rational>], prio: &[usize]) -> Vec<usize> {
    let mut ord: Vec<usize> = (0..scores.len()).filter(|&a| is_positive(&scores[a])).collect();
    ord.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(prio[a].cmp(&prio[b])));
    ord
}

/// Deterministic service for fixed roles and a fixed tie order.
pub fn realized(env: &Environment, scores: &[Option<Rational>], roles: &[usize], prio: &[usize]) -> Vec<Rational> {
    let n = env.n();
    let mut out = vec![Rational::zero(); n];
    let ord = order(scores, prio);
    if let Some(w) = env.position_weights() {
        for (j, &a) in ord.iter().enumerate() {
            out[a] = w[j].clone();
        }
        return out;
    }
    if let Some(mut ind) = env.independence() {
        for &a in &ord {
            if ind.try_add(roles[a]) {
                out[a] = int(1);
            }
        }
        return out;
    }
    let served = best_set(env, scores, roles, prio, &ord);
    for a in served {
        out[a] = int(1);
    }
    out
}

/// Surplus-maximizing feasible set of positive agents; equal surplus goes to the set
/// that contains the higher-priority agent at the first difference.
fn best_set(env: &Environment, scores: &[Option<Rational>], roles: &[usize], prio: &[usize], ord: &[usize]) -> Vec<usize> {
    let key = |set: &[usize]| -> u128 { set.iter().map(|&a| 1u128 << (127 - prio[a].min(127))).sum() };
    let surplus = |set: &[usize]| -> Rational {
        set.iter().fold(Rational::zero(), |s, &a| s + scores[a].as_ref().expect("eligible"))
    };
    if let Some(maximal) = env.maximal_sets() {
        let mut best: Option<(Rational, u128, Vec<usize>)> = None;
        for &f in maximal {
            let set: Vec<usize> = ord.iter().copied().filter(|&a| f >> roles[a] & 1 == 1).collect();
            let (s, k) = (surplus(&set), key(&set));
            let better = match &best {
                None => true,
                Some((bs, bk, _)) => s > *bs || (s == *bs && k > *bk),
            };
            if better {
                best = Some((s, k, set));
            }
        }
        return best.map(|b| b.2).unwrap_or_default();
    }
    // exhaustive search over feasible subsets, extending only feasible sets
    let mut by_prio = ord.to_vec();
    by_prio.sort_by_key(|&a| prio[a]);
    let mut best = (Rational::zero(), 0u128, Vec::new());
    let mut cur: Vec<usize> = Vec::new();
    dfs(env, scores, roles, &by_prio, 0, &mut cur, &mut best, &key);
    best.2
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    env: &Environment,
    scores: &[Option<Rational>],
    roles: &[usize],
    cand: &[usize],
    at: usize,
    cur: &mut Vec<usize>,
    best: &mut (Rational, u128, Vec<usize>),
    key: &dyn Fn(&[usize]) -> u128,
) {
    if at == cand.len() {
        let s = cur.iter().fold(Rational::zero(), |s, &a| s + scores[a].as_ref().expect("eligible"));
        let k = key(cur);
        if s > best.0 || (s == best.0 && k > best.1) {
            *best = (s, k, cur.clone());
        }
        return;
    }
    let a = cand[at];
    cur.push(a);
    let mut r: Vec<usize> = cur.iter().map(|&b| roles[b]).collect();
    r.sort_unstable();
    if env.roles_feasible(&r) {
        dfs(env, scores, roles, cand, at + 1, cur, best, key);
    }
    cur.pop();
    dfs(env, scores, roles, cand, at + 1, cur, best, key);
}

/// Exact class averaging for kinds whose feasibility only counts agents.
fn class_average(env: &Environment, scores: &[Option<Rational>]) -> Vec<Rational> {
    let n = env.n();
    let mut out = vec![Rational::zero(); n];
    let ord = order(scores, &identity(n));
    let weights = env.position_weights();
    let units = env.units().unwrap_or(n);
    let mut slot = 0usize;
    let mut i = 0usize;
    while i < ord.len() {
        let mut j = i;
        while j < ord.len() && scores[ord[j]] == scores[ord[i]] {
            j += 1;
        }
        let size = j - i;
        let share = match &weights {
            Some(w) => {
                let total = (slot..slot + size).filter(|&p| p < w.len()).fold(Rational::zero(), |s, p| s + &w[p]);
                total / int(size as i64)
            }
            None => {
                let take = units.saturating_sub(slot).min(size);
                Rational::new((take as i64).into(), (size as i64).into())
            }
        };
        for &a in &ord[i..j] {
            out[a] = share.clone();
        }
        slot += size;
        i = j;
    }
    out
}

/// Uniform average over tie orders of the positive agents.
fn average_over_orders(env: &Environment, scores: &[Option<Rational>], roles: &[usize], positive: &[usize]) -> Result<Vec<Rational>> {
    let n = env.n();
    let matroid = env.independence().is_some() || env.position_weights().is_some();
    // groups whose internal order is averaged; matroid greedy only sees order within classes
    let groups: Vec<Vec<usize>> = if matroid {
        let ord = order(scores, &identity(n));
        let mut g: Vec<Vec<usize>> = Vec::new();
        for &a in &ord {
            match g.last_mut() {
                Some(last) if scores[last[0]] == scores[a] => last.push(a),
                _ => g.push(vec![a]),
            }
        }
        g
    } else {
        vec![positive.to_vec()]
    };
    let total = groups.iter().fold(num_bigint::BigInt::from(1), |acc, g| acc * factorial(g.len()));
    if total > num_bigint::BigInt::from(EXACT_ORDER_LIMIT) {
        let orders = usize::try_from(&total).unwrap_or(usize::MAX);
        return Err(Error::SizeLimit { n: orders, limit: EXACT_ORDER_LIMIT, what: "exact enumeration of tie orders (n counts orders)" });
    }
    let mut acc = vec![Rational::zero(); n];
    let mut count = 0u64;
    let mut prio = vec![usize::MAX; n];
    enumerate_group_orders(&groups, 0, 0, &mut prio, &mut |p| {
        add(&mut acc, &realized(env, scores, roles, p));
        count += 1;
    });
    Ok(scale(acc, count))
}

fn enumerate_group_orders(groups: &[Vec<usize>], g: usize, base: usize, prio: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if g == groups.len() {
        f(prio);
        return;
    }
    let members = &groups[g];
    for_each_permutation(members.len(), |perm| {
        for (slot, &m) in perm.iter().enumerate() {
            prio[members[m]] = base + slot;
        }
        enumerate_group_orders(groups, g + 1, base + members.len(), &mut prio.clone(), f);
    });
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn s(v: &[i64]) -> Vec<Option<Rational>> {
        v.iter().map(|&x| Some(int(x))).collect()
    }

    #[test]
    fn permutations_enumerated_once() {
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(4, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn multi_unit_ties_average() {
        let env = Environment::multi_unit(3, 2).unwrap();
        let x = expected_service(&env, &s(&[6, 3, 3]), Ties::default()).unwrap();
        assert_eq!(x, vec![int(1), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn priority_realization_matches_average() {
        let env = Environment::multi_unit(4, 2).unwrap();
        let sc = s(&[5, 5, 5, 1]);
        let avg = expected_service(&env, &sc, Ties::default()).unwrap();
        let mut acc = vec![Rational::zero(); 4];
        let mut cnt = 0;
        for_each_permutation(4, |p| {
            add(&mut acc, &expected_service(&env, &sc, Ties { roles: None, priority: Some(p) }).unwrap());
            cnt += 1;
        });
        assert_eq!(scale(acc, cnt), avg);
        assert_eq!(avg, vec![q(2, 3), q(2, 3), q(2, 3), int(0)]);
    }

    #[test]
    fn nonpositive_and_ineligible_never_served() {
        let env = Environment::digital_good(3);
        let sc = vec![Some(int(2)), Some(int(0)), None];
        assert_eq!(expected_service(&env, &sc, Ties::default()).unwrap(), vec![int(1), int(0), int(0)]);
    }

    #[test]
    fn position_classes_share_weights() {
        let env = Environment::position(3, vec![int(1), q(1, 2), int(0)]).unwrap();
        let x = expected_service(&env, &s(&[3, 3, 1]), Ties::default()).unwrap();
        assert_eq!(x, vec![q(3, 4), q(3, 4), int(0)]);
    }

    #[test]
    fn downward_closed_picks_heavier_side() {
        let env = Environment::downward_closed(3, &[vec![0, 1], vec![2]]).unwrap();
        let x = expected_service(&env, &s(&[2, 2, 3]), Ties::default()).unwrap();
        assert_eq!(x, vec![int(1), int(1), int(0)]);
        let y = expected_service(&env, &s(&[1, 2, 3]), Ties::default()).unwrap();
        // tied sets: the one holding the top-priority agent wins under a uniform order
        assert_eq!(y, vec![q(2, 3), q(2, 3), q(1, 3)]);
    }

    #[test]
    fn permuted_agrees_with_explicit_relabel_average() {
        let base = Environment::downward_closed(3, &[vec![0, 1], vec![2]]).unwrap();
        let env = base.clone().permutation();
        let sc = s(&[5, 2, 2]);
        let x = expected_service(&env, &sc, Ties::default()).unwrap();
        let mut acc = vec![Rational::zero(); 3];
        let mut cnt = 0;
        for_each_permutation(3, |p| {
            let r = base.relabeled(p.to_vec());
            add(&mut acc, &expected_service(&r, &sc, Ties { roles: None, priority: Some(p) }).unwrap());
            cnt += 1;
        });
        assert_eq!(scale(acc, cnt), x);
    }

    #[test]
    fn transversal_greedy() {
        let env = Environment::transversal_matroid(1, vec![vec![0], vec![0]]).unwrap().permutation();
        let x = expected_service(&env, &s(&[3, 3]), Ties::default()).unwrap();
        assert_eq!(x, vec![q(1, 2), q(1, 2)]);
    }
}
