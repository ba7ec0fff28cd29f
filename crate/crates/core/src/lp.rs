//! Small exact simplex solver for `max c·z` subject to `A z ≤ b`, `z ≥ 0`, with `b ≥ 0`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub z: Vec<Rational>,
}

/// Returns `None` when the objective is unbounded. Uses Bland's rule, so it terminates on
/// degenerate problems.
pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Result<Option<LpSolution>> {
    let (m, n) = (a.len(), c.len());
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Precondition("constraint matrix shape mismatch".into()));
    }
    if b.iter().any(|x| x.is_negative()) {
        return Err(Error::Precondition("right-hand side must be nonnegative".into()));
    }
    // tableau rows: [A | I | b]; basis starts at the slacks
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..m).map(|j| if i == j { Rational::from_integer(1.into()) } else { Rational::zero() }));
            row.push(b[i].clone());
            row
        })
        .collect();
    // reduced costs: maximize c·z  <=>  objective row holds -c
    let mut obj: Vec<Rational> = c.iter().map(|x| -x).chain((0..=m).map(|_| Rational::zero())).collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) else { break };
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width - 1] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else { return Ok(None) };
        let piv = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x /= &piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (x, p) in obj.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        basis[r] = enter;
    }
    let mut z = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            z[bv] = t[i][width - 1].clone();
        }
    }
    Ok(Some(LpSolution { value: obj[width - 1].clone(), z }))
}
