use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{a_string, alpha_orbit, IntervalUnion, CANTOR_DEPTH_CAP};
use crate::error::{Error, Result};
use crate::estimate::EpsSchedule;
use crate::tube::{product_with_unit_interval, CantorTube, Exact1d, SharedTube, TubeFunction};

/// Largest share of the tube volume the truncation may remove before the
/// finite set stops standing in for the infinite construction.
pub const TRUNCATION_DISTORTION: f64 = 1e-3;

fn default_depth_cap() -> u32 {
    CANTOR_DEPTH_CAP
}

/// Smallest ε at which the neighborhood of the truncated set misses at most
/// [`TRUNCATION_DISTORTION`] of its volume relative to the full set. The full
/// set fills the `hole` next to its accumulation point; the truncated one
/// leaves `hole - 2ε` of it uncovered.
fn truncation_eps(tube: &Exact1d, hole: f64) -> f64 {
    let distortion = |eps: f64| {
        let v = tube.eval(eps).map(|m| m.value).unwrap_or(f64::NAN);
        (hole - 2.0 * eps).max(0.0) / v
    };
    let (mut lo, mut hi) = ((hole * 1e-15).ln(), (0.5 * hole).ln());
    if distortion(lo.exp()) <= TRUNCATION_DISTORTION {
        return lo.exp();
    }
    // The distortion grows as ε shrinks.
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if distortion(mid.exp()) <= TRUNCATION_DISTORTION {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.exp()
}

/// Declarative description of a bounded set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Points {
        points: Vec<f64>,
    },
    Intervals {
        intervals: Vec<[f64; 2]>,
    },
    /// `{n^{-a} : 1 ≤ n ≤ n_terms} ∪ {0}`.
    AString {
        a: f64,
        n_terms: u64,
    },
    /// Orbit of `x ↦ x - x^α` from `x0`.
    AlphaOrbit {
        alpha: f64,
        x0: f64,
        n_terms: u64,
    },
    /// Middle-thirds Cantor set in `[0, 1]`.
    Cantor {
        #[serde(default = "default_depth_cap")]
        depth_cap: u32,
    },
    /// `inner × [0, 1]`.
    ProductUnitInterval {
        inner: Box<SetSpec>,
    },
}

impl SetSpec {
    pub fn point(x: f64) -> Self {
        SetSpec::Points { points: vec![x] }
    }

    pub fn segment(lo: f64, hi: f64) -> Self {
        SetSpec::Intervals {
            intervals: vec![[lo, hi]],
        }
    }

    pub fn unit_interval() -> Self {
        Self::segment(0.0, 1.0)
    }

    pub fn cantor() -> Self {
        SetSpec::Cantor {
            depth_cap: CANTOR_DEPTH_CAP,
        }
    }

    /// Ambient dimension the set lives in before any embedding.
    pub fn ambient_n(&self) -> usize {
        match self {
            SetSpec::ProductUnitInterval { inner } => inner.ambient_n() + 1,
            _ => 1,
        }
    }

    /// The exact interval union for the finite one-dimensional kinds.
    pub fn interval_union(&self) -> Result<Option<IntervalUnion>> {
        Ok(match self {
            SetSpec::Points { points } => Some(super::make_points(points)?),
            SetSpec::Intervals { intervals } => Some(IntervalUnion::new(
                intervals.iter().map(|&[lo, hi]| (lo, hi)),
            )?),
            SetSpec::AString { a, n_terms } => Some(a_string(*a, *n_terms)?),
            SetSpec::AlphaOrbit { alpha, x0, n_terms } => {
                Some(alpha_orbit(*alpha, *x0, *n_terms)?.set)
            }
            SetSpec::Cantor { .. } | SetSpec::ProductUnitInterval { .. } => None,
        })
    }

    /// Builds the exact tube function. `quad_tol` is the relative quadrature
    /// tolerance of any lift the construction needs.
    pub fn realize(&self, quad_tol: f64) -> Result<RealizedSet> {
        match self {
            SetSpec::Points { .. } | SetSpec::Intervals { .. } => {
                let u = self.interval_union()?.expect("finite kind");
                Ok(RealizedSet::from_union(self.clone(), &u, None, Vec::new()))
            }
            SetSpec::AString { a, n_terms } => {
                let u = a_string(*a, *n_terms)?;
                Ok(RealizedSet::truncated(
                    self.clone(),
                    &u,
                    (*n_terms as f64).powf(-a),
                    Vec::new(),
                ))
            }
            SetSpec::AlphaOrbit { alpha, x0, n_terms } => {
                let orbit = alpha_orbit(*alpha, *x0, *n_terms)?;
                let notes = orbit.truncation.iter().cloned().collect();
                Ok(RealizedSet::truncated(
                    self.clone(),
                    &orbit.set,
                    orbit.last,
                    notes,
                ))
            }
            SetSpec::Cantor { depth_cap } => {
                if *depth_cap == 0 || *depth_cap > CANTOR_DEPTH_CAP {
                    return Err(Error::domain(format!(
                        "Cantor depth cap must lie in 1..={CANTOR_DEPTH_CAP}, got {depth_cap}"
                    )));
                }
                Ok(RealizedSet {
                    spec: self.clone(),
                    ambient_n: 1,
                    tube: Arc::new(CantorTube),
                    hull_length: 1.0,
                    truncation_eps: None,
                    notes: Vec::new(),
                })
            }
            SetSpec::ProductUnitInterval { inner } => {
                let base = inner.realize(quad_tol)?;
                let tube = product_with_unit_interval(base.tube.clone(), quad_tol)?;
                Ok(RealizedSet {
                    spec: self.clone(),
                    ambient_n: base.ambient_n + 1,
                    tube,
                    hull_length: base.hull_length.max(1.0),
                    truncation_eps: base.truncation_eps,
                    notes: base.notes,
                })
            }
        }
    }
}

/// A [`SetSpec`] together with its exact tube function.
#[derive(Debug, Clone)]
pub struct RealizedSet {
    pub spec: SetSpec,
    pub ambient_n: usize,
    pub tube: SharedTube,
    pub hull_length: f64,
    /// Below this ε the finite truncation distorts the tube of the infinite
    /// construction by more than [`TRUNCATION_DISTORTION`].
    pub truncation_eps: Option<f64>,
    pub notes: Vec<String>,
}

impl RealizedSet {
    fn from_union(
        spec: SetSpec,
        u: &IntervalUnion,
        truncation_eps: Option<f64>,
        notes: Vec<String>,
    ) -> Self {
        RealizedSet {
            spec,
            ambient_n: 1,
            tube: Arc::new(Exact1d::new(u)),
            hull_length: u.hull_length(),
            truncation_eps,
            notes,
        }
    }

    fn truncated(spec: SetSpec, u: &IntervalUnion, hole: f64, notes: Vec<String>) -> Self {
        let tube = Exact1d::new(u);
        let eps = truncation_eps(&tube, hole);
        Self::from_union(spec, u, Some(eps), notes)
    }

    /// `eps_max` a tenth of the hull length (of `[0, 1]` for a single point),
    /// `eps_min` at the truncation bound, or four decades lower for sets
    /// without truncation.
    pub fn default_schedule(&self, points_per_decade: u32) -> Result<EpsSchedule> {
        let hull = if self.hull_length > 0.0 {
            self.hull_length
        } else {
            1.0
        };
        let eps_max = hull / 10.0;
        let eps_min = match self.truncation_eps {
            Some(t) if t < eps_max / 10.0 => t,
            Some(t) => {
                return Err(Error::Resolution(format!(
                    "truncation bound {t:e} leaves less than a decade below eps_max = {eps_max:e}; add terms"
                )))
            }
            None => eps_max * 1e-4,
        };
        EpsSchedule::new(eps_max, eps_min, points_per_decade)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn toml_shape() {
        let spec = SetSpec::ProductUnitInterval {
            inner: Box::new(SetSpec::AString {
                a: 1.0,
                n_terms: 1000,
            }),
        };
        let text = toml::to_string(&spec).unwrap();
        assert!(text.contains("kind = \"product_unit_interval\""), "{text}");
        let cantor: SetSpec = toml::from_str("kind = \"cantor\"").unwrap();
        assert_eq!(cantor, SetSpec::cantor());
        assert!(toml::from_str::<SetSpec>("kind = \"cantor\"\nbogus = 1").is_err());
    }

    #[test]
    fn truncation_bounds() {
        let r = SetSpec::AString {
            a: 1.0,
            n_terms: 1_000_000,
        }
        .realize(1e-8)
        .unwrap();
        let t = r.truncation_eps.unwrap();
        // Direct check of the distortion on either side of the bound.
        let v = |e: f64| r.tube.eval(e).unwrap().value;
        assert!(((1e-6 - 2.0 * t) / v(t) - TRUNCATION_DISTORTION).abs() < 1e-9);
        assert!((1e-6 - 2.0 * t * 0.9) / v(0.9 * t) > TRUNCATION_DISTORTION);
        assert!(t > 5e-8 && t < 2e-7, "{t}");
        let sched = r.default_schedule(8).unwrap();
        assert_eq!(sched.eps_min(), t);
        let short = SetSpec::AString {
            a: 1.0,
            n_terms: 10,
        }
        .realize(1e-8)
        .unwrap();
        assert!(matches!(
            short.default_schedule(8),
            Err(Error::Resolution(_))
        ));
        let r = SetSpec::segment(0.0, 2.0).realize(1e-8).unwrap();
        assert!(r.truncation_eps.is_none());
        let sched = r.default_schedule(8).unwrap();
        assert!((sched.eps_max() - 0.2).abs() < 1e-15);
        assert!((sched.eps_min() - 2e-5).abs() < 1e-18);
    }

    #[test]
    fn product_realization() {
        let r = SetSpec::ProductUnitInterval {
            inner: Box::new(SetSpec::point(0.0)),
        }
        .realize(1e-10)
        .unwrap();
        assert_eq!(r.ambient_n, 2);
        let v = r.tube.eval(0.5).unwrap().value;
        assert!((v - (1.0 + std::f64::consts::PI * 0.25)).abs() < 1e-9);
    }

    fn leaf() -> impl Strategy<Value = SetSpec> {
        prop_oneof![
            prop::collection::vec(-1e3f64..1e3, 1..5).prop_map(|points| SetSpec::Points { points }),
            prop::collection::vec((-1e3f64..1e3, 0.0f64..10.0), 1..4).prop_map(|v| {
                SetSpec::Intervals {
                    intervals: v.into_iter().map(|(lo, len)| [lo, lo + len]).collect(),
                }
            }),
            (1e-3f64..10.0, 2u64..1_000_000)
                .prop_map(|(a, n_terms)| SetSpec::AString { a, n_terms }),
            (1.0001f64..5.0, 1e-6f64..0.999, 1u64..1000)
                .prop_map(|(alpha, x0, n_terms)| SetSpec::AlphaOrbit { alpha, x0, n_terms }),
            (1u32..=40).prop_map(|depth_cap| SetSpec::Cantor { depth_cap }),
        ]
    }

    fn spec() -> impl Strategy<Value = SetSpec> {
        leaf().prop_recursive(2, 4, 1, |inner| {
            inner.prop_map(|s| SetSpec::ProductUnitInterval { inner: Box::new(s) })
        })
    }

    proptest! {
        #[test]
        fn toml_round_trip_is_bit_exact(s in spec()) {
            let text = toml::to_string(&s).unwrap();
            let back: SetSpec = toml::from_str(&text).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
