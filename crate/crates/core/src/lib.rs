//! Tube volumes, box dimensions and normalized Minkowski contents of bounded
//! subsets of Euclidean space.
//!
//! The crate is organised bottom-up:
//!
//! - [`gamma`]: Gamma/Beta functions and the unit-ball constant `γ_k`.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature with deterministic error control.
//! - [`sets1d`]: exact subsets of the real line and the set library
//!   (points, intervals, a-strings, α-orbits, the Cantor set).
//! - [`tube`]: tube-volume backends. Exact 1D, the dimension lift, products
//!   with `[0,1]`, Monte Carlo and grid distance transforms.
//! - [`estimate`]: log-log dimension fits and windowed content estimates.
//! - [`invariance`]: the embedding experiments (`R^N ↪ R^{N+1}`).
//!
//! Data-parallel loops go through [`par::Exec`]; with the `parallel` feature
//! disabled every loop runs sequentially and produces identical output.

pub mod error;
pub mod estimate;
pub mod gamma;
pub mod invariance;
pub mod par;
pub mod quad;
pub mod sets1d;
pub mod tube;

pub use error::{Error, Result};
pub use estimate::{ContentEstimate, DimensionFit, EpsSchedule, Verdict, VerdictPolicy};
pub use gamma::{gamma_ball, gamma_fn, gamma_ratio, GammaRatio};
pub use par::Exec;
pub use sets1d::{IntervalUnion, RealizedSet, SetSpec};
pub use tube::{Measurement, TubeFunction, TubeKind};
