//! The dimension lift and products with the unit interval.
//!
//! For `U ⊂ R^N` placed in the hyperplane `{x_{N+1} = 0}`,
//!
//! `meas_{N+1}(U_ε) = 2 ∫₀^ε meas_N(U_{√(ε²-y²)}) dy = ∫₀^{π/2} 2ε cos t · meas_N(U_{ε cos t}) dt`,
//!
//! the second form being the one integrated here. It has no square-root
//! behaviour at `y = ε`.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use parking_lot::Mutex;

use super::{check_eps, Measurement, SharedTube, TubeFunction, TubeKind};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions, MAX_PANELS};

const CACHE_LIMIT: usize = 1 << 16;

/// `U ⊂ R^N` regarded as a subset of `R^{N+1}`.
#[derive(Debug)]
pub struct Lifted {
    inner: SharedTube,
    tol: f64,
    max_panels: usize,
    // Keyed by the bit pattern of ε.
    cache: Mutex<HashMap<u64, Measurement>>,
}

/// Lifts `f` into one more ambient dimension; each evaluation has relative
/// quadrature error at most `tol`.
pub fn lift_tube(f: SharedTube, tol: f64) -> Result<Arc<Lifted>> {
    Lifted::new(f, tol).map(Arc::new)
}

impl Lifted {
    pub fn new(inner: SharedTube, tol: f64) -> Result<Self> {
        if !inner.kind().is_liftable() {
            return Err(Error::Unsupported(format!(
                "cannot lift a {:?} tube; the lift needs a deterministic exact or quadrature backend",
                inner.kind()
            )));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::domain(format!(
                "lift tolerance must be positive, got {tol}"
            )));
        }
        Ok(Lifted {
            inner,
            tol,
            max_panels: MAX_PANELS,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    pub fn inner(&self) -> &SharedTube {
        &self.inner
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn compute(&self, eps: f64) -> Result<Measurement> {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let inner_rel = Cell::new(0.0f64);
        let integrand = |t: f64| {
            let r = eps * t.cos();
            match self.inner.eval(r) {
                Ok(m) => {
                    inner_rel.set(inner_rel.get().max(m.rel_err()));
                    2.0 * r * m.value
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let opts = QuadOptions {
            max_panels: self.max_panels,
            ..QuadOptions::relative(self.tol)
        };
        let result = integrate(integrand, 0.0, FRAC_PI_2, opts);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let q = result?;
        Ok(Measurement {
            value: q.value,
            abs_err: q.abs_err + inner_rel.get() * q.value,
        })
    }
}

impl TubeFunction for Lifted {
    fn ambient_n(&self) -> usize {
        self.inner.ambient_n() + 1
    }

    fn kind(&self) -> TubeKind {
        TubeKind::Lifted
    }

    fn eval(&self, eps: f64) -> Result<Measurement> {
        check_eps(eps)?;
        if eps == 0.0 {
            return Ok(Measurement {
                value: 0.0,
                abs_err: 0.0,
            });
        }
        let key = eps.to_bits();
        if let Some(m) = self.cache.lock().get(&key) {
            return Ok(*m);
        }
        let m = self.compute(eps)?;
        let mut cache = self.cache.lock();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, m);
        Ok(m)
    }
}

/// `U × [0, 1] ⊂ R^{N+1}`, through
/// `meas_{N+1}((U×[0,1])_ε) = meas_N(U_ε) + meas_{N+1}(U_ε)`.
#[derive(Debug)]
pub struct ProductUnit {
    inner: SharedTube,
    lifted: Lifted,
}

pub fn product_with_unit_interval(f: SharedTube, tol: f64) -> Result<Arc<ProductUnit>> {
    let lifted = Lifted::new(f.clone(), tol)?;
    Ok(Arc::new(ProductUnit { inner: f, lifted }))
}

impl ProductUnit {
    pub fn inner(&self) -> &SharedTube {
        &self.inner
    }

    pub fn lifted(&self) -> &Lifted {
        &self.lifted
    }
}

impl TubeFunction for ProductUnit {
    fn ambient_n(&self) -> usize {
        self.inner.ambient_n() + 1
    }

    fn kind(&self) -> TubeKind {
        TubeKind::Product
    }

    fn eval(&self, eps: f64) -> Result<Measurement> {
        let base = self.inner.eval(eps)?;
        let lifted = self.lifted.eval(eps)?;
        Ok(Measurement {
            value: base.value + lifted.value,
            abs_err: base.abs_err + lifted.abs_err,
        })
    }
}

/// Measure of `(U × [0,1])_ε` by slicing along the new axis: the slice at
/// height `y` is `U_ρ` with `ρ = √(ε² - dist(y, [0,1])²)`. The caps are
/// integrated in `y` directly, independent of the lift's substitution.
pub fn slice_product_measure(f: &dyn TubeFunction, eps: f64, tol: f64) -> Result<f64> {
    check_eps(eps)?;
    if !f.kind().is_liftable() {
        return Err(Error::Unsupported(format!(
            "cannot slice a {:?} tube",
            f.kind()
        )));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let cap = |h: f64| {
        let rho = ((eps - h) * (eps + h)).max(0.0).sqrt();
        match f.eval(rho) {
            Ok(m) => m.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let caps = integrate(cap, 0.0, eps, QuadOptions::relative(tol));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(f.eval(eps)?.value + 2.0 * caps?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma_ball;
    use crate::sets1d::{a_string, make_points, IntervalUnion};
    use crate::tube::{CantorTube, Exact1d, MonteCarloTube, PointCloud};
    use std::f64::consts::PI;

    fn point() -> SharedTube {
        Arc::new(Exact1d::new(&make_points(&[0.0]).unwrap()))
    }

    fn segment(l: f64) -> SharedTube {
        Arc::new(Exact1d::new(&IntervalUnion::new([(0.0, l)]).unwrap()))
    }

    #[test]
    fn lifted_point_is_a_disk() {
        let tol = 1e-10;
        let lifted = lift_tube(point(), tol).unwrap();
        assert_eq!(lifted.ambient_n(), 2);
        for eps in [1.0, 0.1, 0.01, 1e-5] {
            let want = PI * eps * eps;
            let got = lifted.eval(eps).unwrap();
            assert!((got.value - want).abs() <= tol * want, "eps = {eps}");
            assert!(got.abs_err <= tol * want);
        }
    }

    #[test]
    fn lifted_segment_is_a_stadium() {
        let tol = 1e-10;
        for l in [1.0, 0.3] {
            let lifted = lift_tube(segment(l), tol).unwrap();
            for eps in [1.0, 0.1, 0.01] {
                let want = 2.0 * l * eps + PI * eps * eps;
                let got = lifted.eval(eps).unwrap().value;
                assert!((got - want).abs() <= tol * want, "l = {l}, eps = {eps}");
            }
        }
    }

    #[test]
    fn iterated_lifts_of_a_point_give_ball_volumes() {
        let tol = 1e-9;
        let mut tube = point();
        for k in 1..=3usize {
            tube = lift_tube(tube, tol).unwrap();
            let want = gamma_ball(1.0 + k as f64).unwrap();
            for eps in [1.0, 0.1] {
                let c = tube.eval(eps).unwrap().value / eps.powi(1 + k as i32);
                assert!(
                    (c - want).abs() <= 10.0 * tol * want,
                    "k = {k}, eps = {eps}: {c}"
                );
            }
        }
    }

    #[test]
    fn double_lift_of_point_is_a_ball() {
        let tol = 1e-10;
        let twice = lift_tube(lift_tube(point(), tol).unwrap(), tol).unwrap();
        let eps: f64 = 0.5;
        let want = 4.0 / 3.0 * PI * eps.powi(3);
        assert!((twice.eval(eps).unwrap().value - want).abs() <= 2.0 * tol * want);
    }

    #[test]
    fn cached_values_are_identical() {
        let lifted = lift_tube(Arc::new(CantorTube), 1e-9).unwrap();
        let a = lifted.eval(0.0123).unwrap();
        let b = lifted.eval(0.0123).unwrap();
        assert_eq!(a, b);
        let fresh = lift_tube(Arc::new(CantorTube), 1e-9).unwrap();
        assert_eq!(fresh.eval(0.0123).unwrap(), a);
    }

    #[test]
    fn product_closed_forms() {
        let tol = 1e-10;
        let p = product_with_unit_interval(point(), tol).unwrap();
        let s = product_with_unit_interval(segment(1.0), tol).unwrap();
        for eps in [1.0, 0.1, 0.01] {
            let want = 2.0 * eps + PI * eps * eps;
            assert!((p.eval(eps).unwrap().value - want).abs() <= tol * want);
            let want = 1.0 + 4.0 * eps + PI * eps * eps;
            assert!((s.eval(eps).unwrap().value - want).abs() <= tol * want);
        }
    }

    #[test]
    fn product_identity_against_slicing() {
        let tol = 1e-10;
        let base: SharedTube = Arc::new(Exact1d::new(&a_string(1.0, 2000).unwrap()));
        let product = product_with_unit_interval(base.clone(), tol).unwrap();
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let via_identity = product.eval(eps).unwrap().value;
            let via_slices = slice_product_measure(base.as_ref(), eps, tol).unwrap();
            assert!(
                (via_identity - via_slices).abs() <= 1e-8 * via_identity,
                "eps = {eps}: {via_identity} vs {via_slices}"
            );
        }
    }

    #[test]
    fn stochastic_tubes_cannot_be_lifted() {
        let cloud = PointCloud::new(2, vec![0.0, 0.0]).unwrap();
        let mc: SharedTube = Arc::new(MonteCarloTube::new(cloud, 10_000, 1));
        assert!(matches!(lift_tube(mc, 1e-6), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exhausted_budget_is_a_convergence_error() {
        let lifted = Lifted::new(Arc::new(CantorTube), 1e-14)
            .unwrap()
            .with_max_panels(3);
        assert!(matches!(lifted.eval(0.3), Err(Error::Convergence { .. })));
    }
}
