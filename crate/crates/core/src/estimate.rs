//! Box-dimension fits and windowed content estimates.
//!
//! Tube volumes are sampled on a geometric ε schedule. The dimension is read
//! off the log-log slope, and the lower and upper `s`-dimensional contents are
//! the minimum and maximum of `q(ε) = meas(U_ε) / ε^{N-s}` over the final
//! decades of the schedule.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::gamma::{check_exponent, gamma_ball};
use crate::par::Exec;
use crate::tube::{Measurement, TubeFunction, TubeKind};

pub const DEFAULT_POINTS_PER_DECADE: u32 = 8;
pub const DEFAULT_WINDOW_DECADES: f64 = 2.0;

// Window membership tolerates this much rounding in the decade arithmetic.
const WINDOW_SLOP: f64 = 1e-9;

/// Descending geometric sequence from `eps_max` to `eps_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    eps_max: f64,
    eps_min: f64,
    points_per_decade: u32,
}

impl EpsSchedule {
    pub fn new(eps_max: f64, eps_min: f64, points_per_decade: u32) -> Result<Self> {
        if !(eps_min.is_finite() && eps_min > 0.0 && eps_max.is_finite() && eps_min < eps_max) {
            return Err(Error::domain(format!(
                "schedule needs 0 < eps_min < eps_max, got [{eps_min:e}, {eps_max:e}]"
            )));
        }
        if points_per_decade < 4 {
            return Err(Error::domain(format!(
                "schedule needs at least 4 points per decade, got {points_per_decade}"
            )));
        }
        Ok(EpsSchedule {
            eps_max,
            eps_min,
            points_per_decade,
        })
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    pub fn points_per_decade(&self) -> u32 {
        self.points_per_decade
    }

    pub fn decades(&self) -> f64 {
        (self.eps_max / self.eps_min).log10()
    }

    /// The schedule values. The step is the largest constant ratio not
    /// exceeding `10^{1/points_per_decade}` that lands exactly on `eps_min`.
    pub fn values(&self) -> Vec<f64> {
        let steps = ((self.decades() * self.points_per_decade as f64) - WINDOW_SLOP)
            .ceil()
            .max(1.0) as usize;
        let (hi, lo) = (self.eps_max.ln(), self.eps_min.ln());
        let mut v: Vec<f64> = (0..=steps)
            .map(|i| (hi + (lo - hi) * i as f64 / steps as f64).exp())
            .collect();
        v[0] = self.eps_max;
        v[steps] = self.eps_min;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Measurable,
    Nondegenerate,
    DegenerateZero,
    DegenerateInfinite,
    Inconclusive,
}

/// Thresholds of [`measurability_verdict`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictPolicy {
    /// Largest `upper / lower - 1` still called measurable.
    pub rel_tol: f64,
    /// A window trend of `q` beyond this factor per decade (up or down)
    /// counts as divergence to infinity or decay to zero.
    pub growth_per_decade: f64,
    /// Windows whose upper value falls below this are degenerate at zero.
    pub zero_floor: f64,
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        VerdictPolicy {
            rel_tol: 0.02,
            growth_per_decade: 1.05,
            zero_floor: 1e-300,
        }
    }
}

impl VerdictPolicy {
    /// The default policy with `rel_tol` matched to the backend's accuracy.
    pub fn for_kind(kind: TubeKind) -> Self {
        VerdictPolicy {
            rel_tol: if kind.is_stochastic() { 0.05 } else { 0.02 },
            ..Self::default()
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        VerdictPolicy { rel_tol, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub eps: f64,
    pub value: f64,
}

/// Window estimate of the lower and upper `s`-dimensional contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub s: f64,
    pub ambient_n: usize,
    pub kind: TubeKind,
    pub schedule: EpsSchedule,
    pub window_decades: f64,
    /// `γ_{N-s}`; the normalized fields are the raw ones divided by it.
    pub gamma_norm: f64,
    pub lower: f64,
    pub upper: f64,
    pub normalized_lower: f64,
    pub normalized_upper: f64,
    /// Largest backend error of `q` inside the window.
    pub backend_err: f64,
    /// Least-squares growth factor of `q` per decade as ε decreases.
    pub trend_per_decade: f64,
    /// The window minimum (maximum) sits on the first or last window point,
    /// so the true extremum may lie outside the schedule.
    pub min_at_boundary: bool,
    pub max_at_boundary: bool,
    /// Index into `trace` of the first window point.
    pub window_start: usize,
    /// `(ε, q(ε))` over the whole schedule.
    pub trace: Vec<TracePoint>,
    pub policy: VerdictPolicy,
    pub verdict: Verdict,
}

impl ContentEstimate {
    pub fn window_trace(&self) -> &[TracePoint] {
        &self.trace[self.window_start..]
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn normalized_midpoint(&self) -> f64 {
        0.5 * (self.normalized_lower + self.normalized_upper)
    }

    pub fn spread(&self) -> f64 {
        self.upper - self.lower
    }

    /// Backend error plus window spread, in units of `q`.
    pub fn error_bar(&self) -> f64 {
        self.backend_err + self.spread()
    }

    pub fn normalized_error_bar(&self) -> f64 {
        self.error_bar() / self.gamma_norm
    }
}

/// Log-log fit of tube volume against ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    pub ambient_n: usize,
    /// `ambient_n - slope`, clamped to `[0, ambient_n]`.
    pub fitted_d: f64,
    pub raw_d: f64,
    /// 95% Student-t half-width of the slope plus the shift that the
    /// backend's relative error could cause.
    pub ci_halfwidth: f64,
    /// Largest absolute deviation of `ln meas` from the fitted line.
    pub residual: f64,
    /// `(ε, meas(U_ε))`; the fit is on their logarithms.
    pub trace: Vec<TracePoint>,
}

fn evaluate(f: &dyn TubeFunction, eps: &[f64], exec: Exec) -> Result<Vec<Measurement>> {
    let results = exec.map_slice(eps, |&e| f.eval(e));
    let mut out = Vec::with_capacity(eps.len());
    for (&e, r) in eps.iter().zip(results) {
        let m = r?;
        if !(m.value.is_finite() && m.value > 0.0) {
            return Err(Error::Data {
                eps: e,
                value: m.value,
            });
        }
        out.push(m);
    }
    Ok(out)
}

struct Line {
    slope: f64,
    intercept: f64,
    se_slope: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let se_slope = if x.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Line {
        slope,
        intercept,
        se_slope,
    }
}

/// Fits `meas(U_ε) ≈ C ε^{N-d}` over the schedule.
pub fn box_dimension_fit(
    f: &dyn TubeFunction,
    sched: &EpsSchedule,
    exec: Exec,
) -> Result<DimensionFit> {
    let eps = sched.values();
    let meas = evaluate(f, &eps, exec)?;
    if f.kind().is_stochastic() {
        if let Some((e, m)) = eps.iter().zip(&meas).find(|(_, m)| m.rel_err() > 0.01) {
            return Err(Error::domain(format!(
                "stochastic error {:.3}% at eps = {e:e} exceeds 1% of the value",
                100.0 * m.rel_err()
            )));
        }
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = meas.iter().map(|m| m.value.ln()).collect();
    let line = least_squares(&x, &y);
    let residual = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - line.intercept - line.slope * a).abs())
        .fold(0.0, f64::max);
    let dof = (x.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::domain(e.to_string()))?
        .inverse_cdf(0.975);
    let max_rel = meas.iter().map(Measurement::rel_err).fold(0.0, f64::max);
    let span = x[0] - x[x.len() - 1];
    let n = f.ambient_n() as f64;
    let raw_d = n - line.slope;
    Ok(DimensionFit {
        ambient_n: f.ambient_n(),
        fitted_d: raw_d.clamp(0.0, n),
        raw_d,
        ci_halfwidth: t * line.se_slope + 2.0 * max_rel / span,
        residual,
        trace: eps
            .iter()
            .zip(&meas)
            .map(|(&eps, m)| TracePoint {
                eps,
                value: m.value,
            })
            .collect(),
    })
}

/// Window estimate of the `s`-dimensional contents of `f`.
pub fn content_estimate(
    f: &dyn TubeFunction,
    s: f64,
    sched: &EpsSchedule,
    window_decades: f64,
    policy: &VerdictPolicy,
    exec: Exec,
) -> Result<ContentEstimate> {
    let n = f.ambient_n();
    check_exponent(n, s)?;
    if !(window_decades.is_finite() && window_decades > 0.0) {
        return Err(Error::domain(format!(
            "window must span a positive number of decades, got {window_decades}"
        )));
    }
    let gamma_norm = gamma_ball(n as f64 - s)?;
    let eps = sched.values();
    let meas = evaluate(f, &eps, exec)?;
    let p = n as f64 - s;
    let trace: Vec<TracePoint> = eps
        .iter()
        .zip(&meas)
        .map(|(&e, m)| TracePoint {
            eps: e,
            value: m.value / e.powf(p),
        })
        .collect();
    let cutoff = sched.eps_min() * 10f64.powf(window_decades) * (1.0 + WINDOW_SLOP);
    let window_start = eps.iter().position(|&e| e <= cutoff).unwrap_or(0);
    let window = &trace[window_start..];
    let last = window.len() - 1;

    let (mut lower, mut upper) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut i_min, mut i_max) = (0, 0);
    for (i, t) in window.iter().enumerate() {
        if t.value < lower {
            lower = t.value;
            i_min = i;
        }
        if t.value > upper {
            upper = t.value;
            i_max = i;
        }
    }
    let backend_err = eps[window_start..]
        .iter()
        .zip(&meas[window_start..])
        .map(|(&e, m)| m.abs_err / e.powf(p))
        .fold(0.0, f64::max);
    let trend_per_decade = if window.len() >= 2 {
        let x: Vec<f64> = window.iter().map(|t| -t.eps.log10()).collect();
        let y: Vec<f64> = window.iter().map(|t| t.value.ln()).collect();
        least_squares(&x, &y).slope.exp()
    } else {
        f64::NAN
    };

    let mut est = ContentEstimate {
        s,
        ambient_n: n,
        kind: f.kind(),
        schedule: *sched,
        window_decades,
        gamma_norm,
        lower,
        upper,
        normalized_lower: lower / gamma_norm,
        normalized_upper: upper / gamma_norm,
        backend_err,
        trend_per_decade,
        min_at_boundary: i_min == 0 || i_min == last,
        max_at_boundary: i_max == 0 || i_max == last,
        window_start,
        trace,
        policy: *policy,
        verdict: Verdict::Inconclusive,
    };
    est.verdict = measurability_verdict(&est, policy);
    Ok(est)
}

/// Classifies a window estimate. Divergence is judged first from the window
/// trend, then the spread decides between measurable and nondegenerate.
pub fn measurability_verdict(est: &ContentEstimate, policy: &VerdictPolicy) -> Verdict {
    let (lower, upper) = (est.lower, est.upper);
    if !(lower.is_finite() && upper.is_finite()) || est.window_trace().len() < 3 {
        return Verdict::Inconclusive;
    }
    if upper < policy.zero_floor {
        return Verdict::DegenerateZero;
    }
    let trend = est.trend_per_decade;
    if trend.is_nan() {
        return Verdict::Inconclusive;
    }
    if trend > policy.growth_per_decade {
        return Verdict::DegenerateInfinite;
    }
    if trend < 1.0 / policy.growth_per_decade {
        return Verdict::DegenerateZero;
    }
    if lower > 0.0 && upper / lower <= 1.0 + policy.rel_tol {
        return Verdict::Measurable;
    }
    if lower > 0.0 {
        return Verdict::Nondegenerate;
    }
    Verdict::Inconclusive
}
