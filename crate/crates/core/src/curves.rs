//! Revenue curves, ironing and (ironed) virtual values.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::profile::ValuationProfile;
use crate::rational::{int, Rational};

/// `R(i) = i·v_i` on `0..=n+1` with `R(0) = R(n+1) = 0`, and its least concave majorant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevenueCurve {
    r: Vec<Rational>,
    ir: Vec<Rational>,
    hull: Vec<usize>,
}

impl RevenueCurve {
    pub fn n(&self) -> usize {
        self.r.len() - 2
    }

    /// `R(0..=n+1)`.
    pub fn r(&self) -> &[Rational] {
        &self.r
    }

    /// `IR(0..=n+1)`.
    pub fn ir(&self) -> &[Rational] {
        &self.ir
    }

    /// Vertices of the upper hull, increasing, always including `0` and `n+1`.
    pub fn hull_indices(&self) -> &[usize] {
        &self.hull
    }

    /// Indices where the curve touches its hull.
    pub fn touch_indices(&self) -> Vec<usize> {
        (0..self.r.len()).filter(|&i| self.r[i] == self.ir[i]).collect()
    }

    /// `max_{i ≤ k} IR(i)`.
    pub fn max_ir_upto(&self, k: usize) -> Rational {
        self.ir[..=k.min(self.n())].iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// `max_{i ≤ k} R(i)`.
    pub fn max_r_upto(&self, k: usize) -> Rational {
        self.r[..=k.min(self.n())].iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

pub fn build_curve(v: &ValuationProfile) -> RevenueCurve {
    let n = v.n();
    let mut r = Vec::with_capacity(n + 2);
    r.push(Rational::zero());
    for (i, vi) in v.values().iter().enumerate() {
        r.push(vi * int(i as i64 + 1));
    }
    r.push(Rational::zero());
    let hull = upper_hull(&r);
    let mut ir = vec![Rational::zero(); n + 2];
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let slope = (&r[b] - &r[a]) / int((b - a) as i64);
        for (t, i) in (a..=b).enumerate() {
            ir[i] = &r[a] + &slope * int(t as i64);
        }
    }
    RevenueCurve { r, ir, hull }
}

/// Monotone-chain upper hull over abscissae `0..ys.len()`.
fn upper_hull(ys: &[Rational]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(ys.len());
    for i in 0..ys.len() {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            // drop b when it lies on or below the chord a-i
            let lhs = (&ys[b] - &ys[a]) * int((i - a) as i64);
            let rhs = (&ys[i] - &ys[a]) * int((b - a) as i64);
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

/// Piecewise-constant virtual value functions of a profile.
///
/// A query `w` falls in `[v_i, v_{i-1})` for the smallest `i` with `v_i ≤ w`
/// (`v_0 = +∞`); queries below `v_n` fall in the final segment `i = n+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualValuation {
    breakpoints: Vec<Rational>,
    phi: Vec<Rational>,
    phi_bar: Vec<Rational>,
}

impl VirtualValuation {
    pub fn n(&self) -> usize {
        self.breakpoints.len()
    }

    /// The profile values `v_1 ≥ … ≥ v_n`.
    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    /// `φ` on segments `1..=n+1` (0-based index `i-1`).
    pub fn phi_segments(&self) -> &[Rational] {
        &self.phi
    }

    /// `φ̄` on segments `1..=n+1` (0-based index `i-1`).
    pub fn phi_bar_segments(&self) -> &[Rational] {
        &self.phi_bar
    }

    /// `φ̄(v_i)` for the profile's own agents, by rank.
    pub fn at_ranks(&self) -> &[Rational] {
        &self.phi_bar[..self.n()]
    }

    /// 1-based segment containing `w`.
    pub fn segment(&self, w: &Rational) -> usize {
        self.breakpoints.partition_point(|b| b > w) + 1
    }

    pub fn phi_bar_at(&self, w: &Rational) -> Result<Rational> {
        if w.is_negative() {
            return Err(Error::Precondition("query value is negative".into()));
        }
        Ok(self.phi_bar[self.segment(w) - 1].clone())
    }

    pub fn phi_at(&self, w: &Rational) -> Result<Rational> {
        if w.is_negative() {
            return Err(Error::Precondition("query value is negative".into()));
        }
        Ok(self.phi[self.segment(w) - 1].clone())
    }

    /// Report levels at which `φ̄` can change.
    pub fn jump_points(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.breakpoints.clone();
        out.dedup();
        out
    }
}

pub fn ironed_virtual_values(curve: &RevenueCurve, v: &ValuationProfile) -> Result<VirtualValuation> {
    if curve.n() != v.n() {
        return Err(Error::Precondition("curve was built for a different profile".into()));
    }
    let n = v.n();
    let phi = (1..=n + 1).map(|i| &curve.r[i] - &curve.r[i - 1]).collect();
    let phi_bar = (1..=n + 1).map(|i| &curve.ir[i] - &curve.ir[i - 1]).collect();
    Ok(VirtualValuation { breakpoints: v.values().to_vec(), phi, phi_bar })
}

/// Curve and ironed virtual values in one step.
pub fn virtual_valuation(v: &ValuationProfile) -> VirtualValuation {
    ironed_virtual_values(&build_curve(v), v).expect("same profile")
}

/// `φ̄_S(w)` using another profile's breakpoints.
pub fn evaluate_foreign(phi_bar: &VirtualValuation, w: &Rational) -> Result<Rational> {
    phi_bar.phi_bar_at(w)
}

/// One row of the curve table: `(i, R(i), IR(i), φ(v_i), φ̄(v_i))`, with the
/// virtual values of row `i` taken from segment `i` (row 0 has none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRow {
    pub i: usize,
    pub r: Rational,
    pub ir: Rational,
    pub phi: Option<Rational>,
    pub phi_bar: Option<Rational>,
}

pub fn curve_table(v: &ValuationProfile) -> Vec<CurveRow> {
    let c = build_curve(v);
    let vv = ironed_virtual_values(&c, v).expect("same profile");
    (0..=v.n() + 1)
        .map(|i| CurveRow {
            i,
            r: c.r[i].clone(),
            ir: c.ir[i].clone(),
            phi: (i >= 1).then(|| vv.phi[i - 1].clone()),
            phi_bar: (i >= 1).then(|| vv.phi_bar[i - 1].clone()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn prof(v: &[i64]) -> ValuationProfile {
        ValuationProfile::from_ints(v).unwrap()
    }

    /// Least concave majorant on the integer grid by checking every chord.
    fn hull_oracle(r: &[Rational]) -> Vec<Rational> {
        let m = r.len();
        (0..m)
            .map(|i| {
                let mut best = r[i].clone();
                for a in 0..=i {
                    for b in i..m {
                        if a == b {
                            continue;
                        }
                        let t = q((i - a) as i64, (b - a) as i64);
                        let y = &r[a] + (&r[b] - &r[a]) * t;
                        if y > best {
                            best = y;
                        }
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn worked_example() {
        let v = prof(&[6, 4, 4]);
        let c = build_curve(&v);
        assert_eq!(c.r(), &[int(0), int(6), int(8), int(12), int(0)]);
        assert_eq!(&c.ir()[1..4], &[int(6), int(9), int(12)]);
        let vv = ironed_virtual_values(&c, &v).unwrap();
        assert_eq!(vv.at_ranks(), &[int(6), int(3), int(3)]);
    }

    #[test]
    fn ironing_small_profile() {
        let v = prof(&[2, 1, 1, 1]);
        let vv = virtual_valuation(&v);
        let c = build_curve(&v);
        let oracle = hull_oracle(c.r());
        assert_eq!(c.ir(), oracle.as_slice());
        assert_eq!(c.ir()[2], q(8, 3));
        assert_eq!(c.ir()[3], q(10, 3));
        assert_eq!(vv.at_ranks(), &[int(2), q(2, 3), q(2, 3), q(2, 3)]);
    }

    #[test]
    fn constant_profile_is_linear() {
        let v = prof(&[5, 5, 5, 5]);
        let c = build_curve(&v);
        assert_eq!(&c.ir()[..5], &c.r()[..5]);
    }

    #[test]
    fn foreign_queries() {
        let vv = virtual_valuation(&prof(&[6, 4, 4]));
        assert_eq!(evaluate_foreign(&vv, &int(5)).unwrap(), int(3));
        assert_eq!(evaluate_foreign(&vv, &int(6)).unwrap(), int(6));
        assert_eq!(evaluate_foreign(&vv, &int(100)).unwrap(), int(6));
        assert_eq!(evaluate_foreign(&vv, &int(0)).unwrap(), -int(12));
        assert!(evaluate_foreign(&vv, &int(-1)).is_err());
    }

    #[test]
    fn distinct_values_without_ironing() {
        let v = prof(&[10, 9, 8]);
        let vv = virtual_valuation(&v);
        // R = 10, 18, 24 is concave
        assert_eq!(vv.at_ranks(), &[int(10), int(8), int(6)]);
        assert_eq!(vv.phi_segments()[..3], vv.phi_bar_segments()[..3]);
    }

    fn profile_strategy() -> impl Strategy<Value = ValuationProfile> {
        prop::collection::vec(0i64..30, 1..=10).prop_map(|v| ValuationProfile::from_ints(&v).unwrap())
    }

    proptest! {
        #[test]
        fn hull_is_least_concave_majorant(v in profile_strategy()) {
            let c = build_curve(&v);
            let oracle = hull_oracle(c.r());
            prop_assert_eq!(c.ir(), oracle.as_slice());
            for i in 1..c.ir().len() - 1 {
                let d1 = &c.ir()[i] - &c.ir()[i - 1];
                let d2 = &c.ir()[i + 1] - &c.ir()[i];
                prop_assert!(d2 <= d1);
            }
        }

        #[test]
        fn telescoping_and_monotonicity(v in profile_strategy()) {
            let c = build_curve(&v);
            let vv = ironed_virtual_values(&c, &v).unwrap();
            let mut acc_bar = Rational::zero();
            let mut acc = Rational::zero();
            for j in 1..=v.n() {
                acc_bar += &vv.at_ranks()[j - 1];
                acc += &vv.phi_segments()[j - 1];
                prop_assert_eq!(&acc_bar, &c.ir()[j]);
                prop_assert_eq!(&acc, &c.r()[j]);
            }
            for w in vv.at_ranks().windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            // own-value lookup agrees with the per-rank slope, including ties
            for (i, vi) in v.values().iter().enumerate() {
                prop_assert_eq!(vv.phi_bar_at(vi).unwrap(), vv.at_ranks()[i].clone());
            }
        }

        #[test]
        fn phi_bar_nondecreasing_in_query(v in profile_strategy(), a in 0i64..40, b in 0i64..40) {
            let vv = virtual_valuation(&v);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(vv.phi_bar_at(&int(lo)).unwrap() <= vv.phi_bar_at(&int(hi)).unwrap());
        }

        #[test]
        fn ray_exits_sample_curve_first(v in profile_strategy(), mask in prop::collection::vec(any::<bool>(), 10), num in 1i64..40, den in 1i64..5) {
            let keep: Vec<bool> = (0..v.n()).map(|i| mask[i]).collect();
            let vs = v.restricted(&keep);
            let (c, cs) = (build_curve(&v), build_curve(&vs));
            let t = q(num, den);
            // last abscissa at which each curve still lies on or above the ray y = t x
            let exit = |r: &[Rational]| (0..r.len()).filter(|&i| r[i] >= &t * int(i as i64)).max().unwrap();
            prop_assert!(exit(c.r()) >= exit(cs.r()));
        }
    }
}
