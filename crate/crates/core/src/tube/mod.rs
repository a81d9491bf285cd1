//! Tube-volume backends.
//!
//! A [`TubeFunction`] maps `ε > 0` to the Lebesgue measure of the closed
//! ε-neighborhood of a fixed bounded set in `R^N`, together with an error
//! bar. Exact and quadrature-based kinds can be lifted into one more
//! dimension ([`lift_tube`]); the Monte Carlo and grid kinds work on point
//! clouds in `R^2..R^6`.

mod cloud;
mod grid;
mod lift;
mod mc;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cloud::PointCloud;
pub use grid::{grid_tube_measure, GridEstimate, GridTube, DEFAULT_CELL_BUDGET};
pub use lift::{lift_tube, product_with_unit_interval, slice_product_measure, Lifted, ProductUnit};
pub use mc::{mc_tube_measure, MonteCarloTube};

use crate::error::{Error, Result};
use crate::sets1d::{cantor_depth, GapProfile, IntervalUnion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TubeKind {
    Exact1d,
    Lifted,
    Product,
    MonteCarlo,
    Grid,
}

impl TubeKind {
    /// Kinds that can feed the dimension lift.
    pub fn is_liftable(self) -> bool {
        matches!(
            self,
            TubeKind::Exact1d | TubeKind::Lifted | TubeKind::Product
        )
    }

    pub fn is_stochastic(self) -> bool {
        self == TubeKind::MonteCarlo
    }
}

/// A tube volume with its absolute error bar (rounding, quadrature estimate,
/// standard error or rigorous grid bound depending on the backend).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub abs_err: f64,
}

impl Measurement {
    pub fn exact(value: f64) -> Self {
        // A few ulps of rounding from the summation.
        Measurement {
            value,
            abs_err: 8.0 * f64::EPSILON * value.abs(),
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.abs_err / self.value.abs()
        }
    }
}

pub trait TubeFunction: Send + Sync + fmt::Debug {
    fn ambient_n(&self) -> usize;

    fn kind(&self) -> TubeKind;

    /// Measure of the ε-neighborhood. `eps = 0` is accepted by the exact
    /// kinds and returns the measure of the set itself.
    fn eval(&self, eps: f64) -> Result<Measurement>;
}

pub type SharedTube = Arc<dyn TubeFunction>;

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("eps must be nonnegative, got {eps}")))
    }
}

/// Exact tube of a finite interval union on the line.
#[derive(Debug, Clone)]
pub struct Exact1d {
    profile: GapProfile,
}

impl Exact1d {
    pub fn new(u: &IntervalUnion) -> Self {
        Exact1d {
            profile: GapProfile::new(u),
        }
    }
}

impl TubeFunction for Exact1d {
    fn ambient_n(&self) -> usize {
        1
    }

    fn kind(&self) -> TubeKind {
        TubeKind::Exact1d
    }

    fn eval(&self, eps: f64) -> Result<Measurement> {
        check_eps(eps)?;
        Ok(Measurement::exact(self.profile.tube_measure(eps)))
    }
}

/// Exact tube of the middle-thirds Cantor set.
///
/// With `k` the smallest level whose gaps `3^{-(k+1)}` are at most `2ε`, the
/// neighborhood is that of the `2^k` level-`k` intervals, all of whose gaps
/// stay open: `meas = 2^{k+1} ε + (2/3)^k`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CantorTube;

impl TubeFunction for CantorTube {
    fn ambient_n(&self) -> usize {
        1
    }

    fn kind(&self) -> TubeKind {
        TubeKind::Exact1d
    }

    fn eval(&self, eps: f64) -> Result<Measurement> {
        check_eps(eps)?;
        if eps == 0.0 {
            return Ok(Measurement::exact(0.0));
        }
        let k = cantor_depth(eps)? as i32;
        Ok(Measurement::exact(
            2f64.powi(k + 1) * eps + (2.0 / 3.0f64).powi(k),
        ))
    }
}
