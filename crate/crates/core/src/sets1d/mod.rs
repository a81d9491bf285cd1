//! Exact bounded subsets of the real line.
//!
//! An [`IntervalUnion`] is a finite union of closed intervals kept in
//! canonical form: sorted, pairwise disjoint, with a strict gap between
//! consecutive intervals. Degenerate intervals `[x, x]` represent points.

mod constructors;
mod spec;

pub use constructors::{
    a_string, alpha_orbit, cantor_cover, cantor_depth, cantor_level, make_points, Orbit,
    CANTOR_DEPTH_CAP,
};
pub use spec::{RealizedSet, SetSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Builds the canonical union of `intervals`, merging overlapping and
    /// touching ones.
    pub fn new(intervals: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = intervals.into_iter().collect();
        if raw.is_empty() {
            return Err(Error::domain("interval union must be nonempty"));
        }
        for &(lo, hi) in &raw {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Ok(IntervalUnion { intervals: out })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn hull(&self) -> (f64, f64) {
        (
            self.intervals[0].0,
            self.intervals[self.intervals.len() - 1].1,
        )
    }

    pub fn hull_length(&self) -> f64 {
        let (lo, hi) = self.hull();
        hi - lo
    }

    /// Lengths of the gaps between consecutive intervals, in position order.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.intervals.windows(2).map(|w| w[1].0 - w[0].1)
    }

    /// Image under `x ↦ λx`, `λ > 0`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        Ok(IntervalUnion {
            intervals: self
                .intervals
                .iter()
                .map(|&(lo, hi)| (lo * lambda, hi * lambda))
                .collect(),
        })
    }

    /// Image under `x ↦ x + t`.
    pub fn translate(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::domain("translation must be finite"));
        }
        // Rounding can close a tiny gap, so renormalize.
        IntervalUnion::new(self.intervals.iter().map(|&(lo, hi)| (lo + t, hi + t)))
    }
}

/// Lebesgue measure of the closed ε-neighborhood of `u` in `R`.
///
/// Each interval is widened by `eps` on both sides; overlapping widened
/// intervals are merged and the lengths summed.
pub fn tube_measure_1d(u: &IntervalUnion, eps: f64) -> Result<f64> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::domain(format!("eps must be nonnegative, got {eps}")));
    }
    let mut total = 0.0;
    let mut iter = u.intervals.iter().map(|&(lo, hi)| (lo - eps, hi + eps));
    let Some(mut current) = iter.next() else {
        return Ok(0.0);
    };
    for (lo, hi) in iter {
        if lo <= current.1 {
            current.1 = current.1.max(hi);
        } else {
            total += current.1 - current.0;
            current = (lo, hi);
        }
    }
    total += current.1 - current.0;
    Ok(total)
}

/// Gap-sorted summary of an interval union, for `O(log n)` tube evaluation:
///
/// `meas(U_ε) = L + 2ε + Σ_g min(g, 2ε)`
///
/// where `L` is the total length and `g` ranges over the gaps.
#[derive(Debug, Clone)]
pub struct GapProfile {
    total_length: f64,
    /// Gaps in ascending order.
    gaps: Vec<f64>,
    /// `prefix[i]` is the sum of the `i` smallest gaps.
    prefix: Vec<f64>,
}

impl GapProfile {
    pub fn new(u: &IntervalUnion) -> Self {
        let mut gaps: Vec<f64> = u.gaps().collect();
        gaps.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(gaps.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for g in &gaps {
            acc += g;
            prefix.push(acc);
        }
        GapProfile {
            total_length: u.total_length(),
            gaps,
            prefix,
        }
    }

    pub fn tube_measure(&self, eps: f64) -> f64 {
        let width = 2.0 * eps;
        let covered = self.gaps.partition_point(|&g| g <= width);
        let open = (self.gaps.len() - covered) as f64;
        self.total_length + width + self.prefix[covered] + width * open
    }

    pub fn smallest_gap(&self) -> Option<f64> {
        self.gaps.first().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_merges_and_sorts() {
        let u = IntervalUnion::new([(2.0, 3.0), (0.0, 1.0), (1.0, 1.5), (2.5, 2.7)]).unwrap();
        assert_eq!(u.intervals(), &[(0.0, 1.5), (2.0, 3.0)]);
        assert_eq!(u.total_length(), 2.5);
        assert_eq!(u.hull(), (0.0, 3.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(IntervalUnion::new(Vec::new()).is_err());
        assert!(IntervalUnion::new([(1.0, 0.0)]).is_err());
        assert!(IntervalUnion::new([(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn tube_examples() {
        let x = 0.37;
        let point = IntervalUnion::new([(x, x)]).unwrap();
        for eps in [1.0, 0.1, 1e-6] {
            assert!(
                (tube_measure_1d(&point, eps).unwrap() - 2.0 * eps).abs()
                    <= 4.0 * f64::EPSILON * (x + eps)
            );
        }
        let seg = IntervalUnion::new([(0.5, 2.0)]).unwrap();
        assert!((tube_measure_1d(&seg, 0.25).unwrap() - 2.0).abs() < 1e-15);

        let two = IntervalUnion::new([(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(tube_measure_1d(&two, 0.25).unwrap(), 1.0);
        assert!((tube_measure_1d(&two, 0.6).unwrap() - 2.2).abs() < 1e-15);
        assert!(tube_measure_1d(&two, -1.0).is_err());
    }

    fn arb_union() -> impl Strategy<Value = IntervalUnion> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..2.0), 1..40).prop_map(|v| {
            IntervalUnion::new(v.into_iter().map(|(lo, len)| (lo, lo + len))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(u in arb_union()) {
            let again = IntervalUnion::new(u.intervals().iter().copied()).unwrap();
            prop_assert_eq!(&again, &u);
            for w in u.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
        }

        #[test]
        fn gap_profile_matches_merge_sweep(u in arb_union(), eps in 0.0f64..3.0) {
            let sweep = tube_measure_1d(&u, eps).unwrap();
            let fast = GapProfile::new(&u).tube_measure(eps);
            prop_assert!((sweep - fast).abs() <= 1e-12 * sweep.max(1.0));
        }

        #[test]
        fn tube_bounds_and_monotonicity(u in arb_union(), e1 in 0.0f64..2.0, e2 in 0.0f64..2.0) {
            let (a, b) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let ma = tube_measure_1d(&u, a).unwrap();
            let mb = tube_measure_1d(&u, b).unwrap();
            prop_assert!(ma <= mb + 1e-12);
            prop_assert!(2.0 * b <= mb + 1e-12);
            prop_assert!(mb <= u.hull_length() + 2.0 * b + 1e-12);
        }

        #[test]
        fn dyadic_scaling_is_exact(u in arb_union(), eps in 0.0f64..2.0, k in -8i32..8) {
            let lambda = 2f64.powi(k);
            let scaled = u.scale(lambda).unwrap();
            prop_assert_eq!(
                tube_measure_1d(&scaled, lambda * eps).unwrap(),
                lambda * tube_measure_1d(&u, eps).unwrap()
            );
        }

        #[test]
        fn scaling_covariance(u in arb_union(), eps in 0.0f64..2.0, lambda in 0.01f64..100.0) {
            let scaled = u.scale(lambda).unwrap();
            let lhs = tube_measure_1d(&scaled, lambda * eps).unwrap();
            let rhs = lambda * tube_measure_1d(&u, eps).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn translation_invariance(u in arb_union(), eps in 0.01f64..2.0, t in -50.0f64..50.0) {
            let moved = u.translate(t).unwrap();
            let a = tube_measure_1d(&moved, eps).unwrap();
            let b = tube_measure_1d(&u, eps).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
