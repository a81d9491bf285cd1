use serde::{Deserialize, Serialize};

use super::IntervalUnion;
use crate::error::{Error, Result};

/// Default cap on the middle-thirds level used by [`cantor_cover`].
pub const CANTOR_DEPTH_CAP: u32 = 40;

// α-orbit iterates below this are dropped.
const ORBIT_FLOOR: f64 = 1e-300;

pub fn make_points(xs: &[f64]) -> Result<IntervalUnion> {
    if xs.is_empty() {
        return Err(Error::domain("point list must be nonempty"));
    }
    IntervalUnion::new(xs.iter().map(|&x| (x, x)))
}

/// The a-string boundary `{n^{-a} : 1 ≤ n ≤ n_terms} ∪ {0}`.
pub fn a_string(a: f64, n_terms: u64) -> Result<IntervalUnion> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain(format!(
            "a-string exponent must be positive, got {a}"
        )));
    }
    if n_terms < 2 {
        return Err(Error::domain("a-string needs at least 2 terms"));
    }
    let points = std::iter::once(0.0)
        .chain((1..=n_terms).map(|n| (n as f64).powf(-a)))
        .map(|x| (x, x));
    IntervalUnion::new(points)
}

/// A finite orbit of `g(x) = x - x^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub set: IntervalUnion,
    pub requested_terms: u64,
    pub realized_terms: u64,
    /// Smallest iterate kept.
    pub last: f64,
    /// Set when iteration stopped before `requested_terms`.
    pub truncation: Option<String>,
}

pub fn alpha_orbit(alpha: f64, x0: f64, n_terms: u64) -> Result<Orbit> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::domain(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::domain(format!("x0 must lie in (0, 1), got {x0}")));
    }
    if x0 - x0.powf(alpha) <= 0.0 {
        return Err(Error::domain("first iterate leaves (0, 1)"));
    }
    if n_terms == 0 {
        return Err(Error::domain("orbit needs at least one term"));
    }
    let mut points = Vec::with_capacity(n_terms as usize);
    let mut x = x0;
    let mut truncation = None;
    while (points.len() as u64) < n_terms {
        if !(x > ORBIT_FLOOR && x < 1.0) {
            truncation = Some(format!(
                "iterate {} = {x:e} left (1e-300, 1); kept {} of {n_terms} terms",
                points.len(),
                points.len()
            ));
            break;
        }
        points.push(x);
        x -= x.powf(alpha);
    }
    let last = *points.last().expect("x0 is always kept");
    let realized_terms = points.len() as u64;
    Ok(Orbit {
        set: super::make_points(&points)?,
        requested_terms: n_terms,
        realized_terms,
        last,
        truncation,
    })
}

/// Smallest `k ≥ 0` with `3^{-(k+1)} / 2 ≤ eps`.
pub fn cantor_depth(eps: f64) -> Result<u32> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let mut k = 0u32;
    let mut half_gap = 1.0 / 6.0;
    while half_gap > eps {
        k += 1;
        half_gap /= 3.0;
    }
    Ok(k)
}

/// The level-`k` middle-thirds cover of the Cantor set whose ε-neighborhood
/// coincides with that of the Cantor set itself, `k = cantor_depth(eps)`.
///
/// Every point of a level-`k` interval lies within `3^{-(k+1)}/2 ≤ eps` of the
/// Cantor set, and the interval endpoints belong to it.
pub fn cantor_cover(eps: f64, depth_cap: u32) -> Result<IntervalUnion> {
    if eps >= 1.0 {
        return Err(Error::domain(format!(
            "cantor_cover needs eps < 1, got {eps}"
        )));
    }
    let k = cantor_depth(eps)?;
    cantor_level(k, depth_cap)
}

/// The `2^k` closed intervals of length `3^{-k}` at middle-thirds level `k`.
pub fn cantor_level(k: u32, depth_cap: u32) -> Result<IntervalUnion> {
    if k > depth_cap.min(CANTOR_DEPTH_CAP) {
        return Err(Error::Resolution(format!(
            "Cantor depth {k} exceeds the cap {}",
            depth_cap.min(CANTOR_DEPTH_CAP)
        )));
    }
    let scale = 3u64.pow(k) as f64;
    // Left endpoints have ternary digits in {0, 2}; bit j of m picks digit j.
    let intervals = (0..1u64 << k).map(|m| {
        let mut numerator = 0u64;
        for j in 0..k {
            if m >> (k - 1 - j) & 1 == 1 {
                numerator += 2 * 3u64.pow(k - 1 - j);
            }
        }
        let lo = numerator as f64 / scale;
        (lo, (numerator + 1) as f64 / scale)
    });
    IntervalUnion::new(intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets1d::tube_measure_1d;

    #[test]
    fn points() {
        assert_eq!(make_points(&[0.0]).unwrap().intervals(), &[(0.0, 0.0)]);
        assert_eq!(
            make_points(&[3.0, 1.0, 1.0]).unwrap().intervals(),
            &[(1.0, 1.0), (3.0, 3.0)]
        );
        assert_eq!(
            make_points(&[0.0, 0.5, 1.0]).unwrap().intervals(),
            &[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]
        );
        assert!(make_points(&[]).is_err());
    }

    #[test]
    fn small_a_string() {
        let u = a_string(1.0, 3).unwrap();
        let xs: Vec<f64> = u.intervals().iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![0.0, 1.0 / 3.0, 0.5, 1.0]);
        assert!(a_string(0.0, 10).is_err());
        assert!(a_string(1.0, 1).is_err());
    }

    #[test]
    fn small_orbit() {
        let o = alpha_orbit(2.0, 0.5, 3).unwrap();
        let xs: Vec<f64> = o.set.intervals().iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![0.1875, 0.25, 0.5]);
        assert_eq!(o.realized_terms, 3);
        assert!(o.truncation.is_none());
        assert!(alpha_orbit(1.0, 0.5, 3).is_err());
        assert!(alpha_orbit(2.0, 1.5, 3).is_err());
    }

    #[test]
    fn orbit_truncation_is_metadata() {
        // Near α = 1 each step roughly halves an iterate of order 1e-299.
        let o = alpha_orbit(1.001, 1e-299, 10).unwrap();
        assert!(o.truncation.is_some());
        assert!(o.realized_terms < 10 && o.realized_terms >= 1);
        assert!(o.last > 1e-300);
    }

    #[test]
    fn cantor_depth_thresholds() {
        assert_eq!(cantor_depth(0.2).unwrap(), 0);
        assert_eq!(cantor_depth(0.1).unwrap(), 1);
        // 3^{-12} ≈ 1.88e-6 ≤ 2e-6 < 3^{-11}
        assert_eq!(cantor_depth(1e-6).unwrap(), 11);
    }

    #[test]
    fn cantor_cover_examples() {
        assert_eq!(
            cantor_cover(0.2, CANTOR_DEPTH_CAP).unwrap().intervals(),
            &[(0.0, 1.0)]
        );
        assert_eq!(
            cantor_cover(0.1, CANTOR_DEPTH_CAP).unwrap().intervals(),
            &[(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]
        );
        let u = cantor_cover(1e-6, CANTOR_DEPTH_CAP).unwrap();
        assert_eq!(u.len(), 1 << 11);
        assert!(cantor_cover(1e-6, 5).is_err());
        assert!(cantor_cover(1.5, CANTOR_DEPTH_CAP).is_err());
    }

    #[test]
    fn cantor_cover_tube_is_depth_stable() {
        for eps in [1e-2, 1e-3, 1e-4, 1e-6] {
            let k = cantor_depth(eps).unwrap();
            let base = tube_measure_1d(&cantor_level(k, 40).unwrap(), eps).unwrap();
            for extra in 1..=2 {
                let deeper = tube_measure_1d(&cantor_level(k + extra, 40).unwrap(), eps).unwrap();
                assert!(
                    (deeper - base).abs() <= 1e-14 * base,
                    "eps = {eps}, extra = {extra}"
                );
            }
        }
    }
}
