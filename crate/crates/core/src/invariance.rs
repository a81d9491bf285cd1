//! Embedding experiments: content estimates of one set in `R^N` and, through
//! the dimension lift, in `R^{N+1}`.
//!
//! Every inequality is checked on window estimates. The allowance of a link
//! `a ≤ b` is the sum of the error bars of both sides, each being the backend
//! error plus the window spread of its estimate.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{
    box_dimension_fit, content_estimate, ContentEstimate, DimensionFit, EpsSchedule, Verdict,
    VerdictPolicy,
};
use crate::gamma::{check_exponent, gamma_ratio, GammaRatio};
use crate::par::Exec;
use crate::sets1d::{RealizedSet, SetSpec};
use crate::tube::{lift_tube, product_with_unit_interval, GridTube, PointCloud, SharedTube};

/// Relative grid resolution used for products of two finite point sets.
pub const PRODUCT_GRID_RESOLUTION: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    /// Relative tolerance of every lift quadrature.
    pub quad_tol: f64,
    pub window_decades: f64,
    /// Allowed `|ratio - 1|` of normalized contents (and relative slack of
    /// the extremal ratios).
    pub tol: f64,
    pub policy: VerdictPolicy,
    pub exec: Exec,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            quad_tol: 1e-10,
            window_decades: 2.0,
            tol: 0.02,
            policy: VerdictPolicy::default(),
            exec: Exec::default(),
        }
    }
}

impl HarnessOptions {
    fn estimate(&self, f: &SharedTube, s: f64, sched: &EpsSchedule) -> Result<ContentEstimate> {
        content_estimate(
            f.as_ref(),
            s,
            sched,
            self.window_decades,
            &self.policy,
            self.exec,
        )
    }
}

/// One inequality `left ≤ right` of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub left: String,
    pub right: String,
    pub left_value: f64,
    pub right_value: f64,
    /// `right - left`; negative values are tolerated down to `-allowance`.
    pub slack: f64,
    pub allowance: f64,
    pub holds: bool,
}

fn chain(items: &[(&str, f64, f64)]) -> Vec<ChainLink> {
    items
        .windows(2)
        .map(|w| {
            let (l, r) = (w[0], w[1]);
            let slack = r.1 - l.1;
            let allowance = l.2 + r.2;
            ChainLink {
                left: l.0.to_string(),
                right: r.0.to_string(),
                left_value: l.1,
                right_value: r.1,
                slack,
                allowance,
                holds: slack >= -allowance,
            }
        })
        .collect()
}

fn violations(links: &[ChainLink]) -> usize {
    links.iter().filter(|l| !l.holds).count()
}

struct Paired {
    realized: RealizedSet,
    est_n: ContentEstimate,
    est_n1: ContentEstimate,
}

fn paired(spec: &SetSpec, s: f64, sched: &EpsSchedule, opts: &HarnessOptions) -> Result<Paired> {
    let realized = spec.realize(opts.quad_tol).map_err(|e| e.at("realize"))?;
    check_exponent(realized.ambient_n, s).map_err(|e| e.at("exponent"))?;
    let lifted: SharedTube =
        lift_tube(realized.tube.clone(), opts.quad_tol).map_err(|e| e.at("lift"))?;
    let est_n = opts
        .estimate(&realized.tube, s, sched)
        .map_err(|e| e.at("estimate in R^N"))?;
    let est_n1 = opts
        .estimate(&lifted, s, sched)
        .map_err(|e| e.at("estimate in R^(N+1)"))?;
    Ok(Paired {
        realized,
        est_n,
        est_n1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub spec: SetSpec,
    pub s: f64,
    pub base_ambient: usize,
    pub est_n: ContentEstimate,
    pub est_n1: ContentEstimate,
    /// Ratio of normalized window midpoints, `R^{N+1}` over `R^N`.
    pub normalized_ratio: f64,
    pub gamma_ratio_used: GammaRatio,
    pub tolerance: f64,
    pub truncation_eps: Option<f64>,
    pub notes: Vec<String>,
    pub pass: bool,
}

pub fn embedding_report(
    spec: &SetSpec,
    s: f64,
    sched: &EpsSchedule,
    opts: &HarnessOptions,
) -> Result<EmbeddingReport> {
    let p = paired(spec, s, sched, opts)?;
    let n = p.realized.ambient_n;
    let normalized_ratio = p.est_n1.normalized_midpoint() / p.est_n.normalized_midpoint();
    let pass = (normalized_ratio - 1.0).abs() <= opts.tol
        && p.est_n.verdict == Verdict::Measurable
        && p.est_n1.verdict == Verdict::Measurable;
    Ok(EmbeddingReport {
        spec: spec.clone(),
        s,
        base_ambient: n,
        normalized_ratio,
        gamma_ratio_used: gamma_ratio(n, s)?,
        tolerance: opts.tol,
        truncation_eps: p.realized.truncation_eps,
        notes: p.realized.notes,
        est_n: p.est_n,
        est_n1: p.est_n1,
        pass,
    })
}

/// Observations on the two questions the embedding theorem leaves open.
/// Nothing here is a pass/fail statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenQuestionProbe {
    pub verdict_n: Verdict,
    pub verdict_n1: Verdict,
    /// Measurable after the embedding although not before.
    pub measurable_only_after_embedding: bool,
    /// Normalized lower content gained by the embedding.
    pub lower_gap: f64,
    /// Normalized upper content lost by the embedding.
    pub upper_gap: f64,
    pub relative_lower_gap: f64,
    pub relative_upper_gap: f64,
}

fn probe(est_n: &ContentEstimate, est_n1: &ContentEstimate) -> OpenQuestionProbe {
    let lower_gap = est_n1.normalized_lower - est_n.normalized_lower;
    let upper_gap = est_n.normalized_upper - est_n1.normalized_upper;
    OpenQuestionProbe {
        verdict_n: est_n.verdict,
        verdict_n1: est_n1.verdict,
        measurable_only_after_embedding: est_n1.verdict == Verdict::Measurable
            && est_n.verdict != Verdict::Measurable,
        lower_gap,
        upper_gap,
        relative_lower_gap: lower_gap / est_n.normalized_lower,
        relative_upper_gap: upper_gap / est_n.normalized_upper,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub spec: SetSpec,
    pub s: f64,
    pub base_ambient: usize,
    /// Normalized lower in `R^N`, lower in `R^{N+1}`, upper in `R^{N+1}`,
    /// upper in `R^N`.
    pub normalized: [f64; 4],
    pub links: Vec<ChainLink>,
    pub violations: usize,
    pub pass: bool,
    pub probe: OpenQuestionProbe,
    pub est_n: ContentEstimate,
    pub est_n1: ContentEstimate,
}

pub fn sandwich_check(
    spec: &SetSpec,
    s: f64,
    sched: &EpsSchedule,
    opts: &HarnessOptions,
) -> Result<SandwichReport> {
    let p = paired(spec, s, sched, opts)?;
    let (a, b) = (&p.est_n, &p.est_n1);
    let (ea, eb) = (a.normalized_error_bar(), b.normalized_error_bar());
    let links = chain(&[
        ("lower_n", a.normalized_lower, ea),
        ("lower_n1", b.normalized_lower, eb),
        ("upper_n1", b.normalized_upper, eb),
        ("upper_n", a.normalized_upper, ea),
    ]);
    let v = violations(&links);
    Ok(SandwichReport {
        spec: spec.clone(),
        s,
        base_ambient: p.realized.ambient_n,
        normalized: [
            a.normalized_lower,
            b.normalized_lower,
            b.normalized_upper,
            a.normalized_upper,
        ],
        violations: v,
        pass: v == 0,
        probe: probe(a, b),
        links,
        est_n: p.est_n,
        est_n1: p.est_n1,
    })
}

/// The crude ambient constants against the sharp ratio `γ_{N+1-s}/γ_{N-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantSlack {
    pub ambient_n: usize,
    pub s: f64,
    /// `2^{-(N-1-s)/2}`.
    pub lower_const: f64,
    pub gamma_ratio: f64,
    pub upper_const: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
}

pub fn constant_slack(ambient_n: usize, s: f64) -> Result<ConstantSlack> {
    let g = gamma_ratio(ambient_n, s)?.value;
    let lower_const = 2f64.powf(-(ambient_n as f64 - 1.0 - s) / 2.0);
    Ok(ConstantSlack {
        ambient_n,
        s,
        lower_const,
        gamma_ratio: g,
        upper_const: 2.0,
        lower_slack: g - lower_const,
        upper_slack: 2.0 - g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbientConstantReport {
    pub spec: SetSpec,
    pub s: f64,
    pub base_ambient: usize,
    pub constants: ConstantSlack,
    /// `c·lower_N`, `lower_{N+1}`, `upper_{N+1}`, `2·upper_N` (unnormalized).
    pub values: [f64; 4],
    pub links: Vec<ChainLink>,
    pub violations: usize,
    pub pass: bool,
}

pub fn ambient_constant_check(
    spec: &SetSpec,
    s: f64,
    sched: &EpsSchedule,
    opts: &HarnessOptions,
) -> Result<AmbientConstantReport> {
    let p = paired(spec, s, sched, opts)?;
    let n = p.realized.ambient_n;
    let c = constant_slack(n, s)?;
    let (a, b) = (&p.est_n, &p.est_n1);
    let values = [
        c.lower_const * a.lower,
        b.lower,
        b.upper,
        c.upper_const * a.upper,
    ];
    let links = chain(&[
        ("scaled_lower_n", values[0], c.lower_const * a.error_bar()),
        ("lower_n1", values[1], b.error_bar()),
        ("upper_n1", values[2], b.error_bar()),
        ("scaled_upper_n", values[3], c.upper_const * a.error_bar()),
    ]);
    let v = violations(&links);
    Ok(AmbientConstantReport {
        spec: spec.clone(),
        s,
        base_ambient: n,
        constants: c,
        values,
        links,
        violations: v,
        pass: v == 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductRoute {
    /// One factor is `[0, 1]`; exact lift identity.
    UnitInterval,
    /// Both factors are finite point sets on the line; grid backend in `R^2`.
    PointGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductReport {
    pub spec_a: SetSpec,
    pub spec_b: SetSpec,
    pub s: f64,
    pub r: f64,
    pub route: ProductRoute,
    /// `√2^{-(M+N-s-r)/2}`.
    pub lower_const: f64,
    /// `c·lower_A·lower_B`, `lower_{A×B}`, `upper_{A×B}`, `upper_A·upper_B`.
    pub values: [f64; 4],
    pub links: Vec<ChainLink>,
    pub violations: usize,
    pub pass: bool,
    pub est_a: ContentEstimate,
    pub est_b: ContentEstimate,
    pub est_ab: ContentEstimate,
}

fn is_unit_interval(spec: &SetSpec) -> bool {
    matches!(spec, SetSpec::Intervals { intervals } if intervals.as_slice() == [[0.0, 1.0]])
}

fn product_tube(
    a: &SetSpec,
    b: &SetSpec,
    ra: &RealizedSet,
    rb: &RealizedSet,
    quad_tol: f64,
    exec: Exec,
) -> Result<(SharedTube, ProductRoute)> {
    if is_unit_interval(b) {
        return Ok((
            product_with_unit_interval(ra.tube.clone(), quad_tol)?,
            ProductRoute::UnitInterval,
        ));
    }
    if is_unit_interval(a) {
        // A×B and B×A are isometric.
        return Ok((
            product_with_unit_interval(rb.tube.clone(), quad_tol)?,
            ProductRoute::UnitInterval,
        ));
    }
    if let (SetSpec::Points { points: pa }, SetSpec::Points { points: pb }) = (a, b) {
        let cloud = PointCloud::new(1, pa.clone())?.product(&PointCloud::new(1, pb.clone())?)?;
        let grid = GridTube::new(cloud, PRODUCT_GRID_RESOLUTION).with_exec(exec);
        return Ok((Arc::new(grid), ProductRoute::PointGrid));
    }
    Err(Error::Unsupported(
        "product checks need one factor equal to [0, 1] or two finite point sets on the line"
            .into(),
    ))
}

fn product_err(x: f64, ex: f64, y: f64, ey: f64) -> f64 {
    x * ey + y * ex + ex * ey
}

pub fn product_inequality_check(
    spec_a: &SetSpec,
    spec_b: &SetSpec,
    s: f64,
    r: f64,
    sched: &EpsSchedule,
    opts: &HarnessOptions,
) -> Result<ProductReport> {
    let ra = spec_a
        .realize(opts.quad_tol)
        .map_err(|e| e.at("realize A"))?;
    let rb = spec_b
        .realize(opts.quad_tol)
        .map_err(|e| e.at("realize B"))?;
    let (ab, route) = product_tube(spec_a, spec_b, &ra, &rb, opts.quad_tol, opts.exec)
        .map_err(|e| e.at("product"))?;
    let est_a = opts
        .estimate(&ra.tube, s, sched)
        .map_err(|e| e.at("estimate A"))?;
    let est_b = opts
        .estimate(&rb.tube, r, sched)
        .map_err(|e| e.at("estimate B"))?;
    let est_ab = opts
        .estimate(&ab, s + r, sched)
        .map_err(|e| e.at("estimate A×B"))?;
    let (m, n) = (ra.ambient_n as f64, rb.ambient_n as f64);
    let lower_const = 2f64.sqrt().powf(-(m + n - s - r) / 2.0);
    let (ea, eb, eab) = (est_a.error_bar(), est_b.error_bar(), est_ab.error_bar());
    let values = [
        lower_const * est_a.lower * est_b.lower,
        est_ab.lower,
        est_ab.upper,
        est_a.upper * est_b.upper,
    ];
    let links = chain(&[
        (
            "scaled_lower_product",
            values[0],
            lower_const * product_err(est_a.lower, ea, est_b.lower, eb),
        ),
        ("lower_ab", values[1], eab),
        ("upper_ab", values[2], eab),
        (
            "upper_product",
            values[3],
            product_err(est_a.upper, ea, est_b.upper, eb),
        ),
    ]);
    let v = violations(&links);
    Ok(ProductReport {
        spec_a: spec_a.clone(),
        spec_b: spec_b.clone(),
        s,
        r,
        route,
        lower_const,
        values,
        links,
        violations: v,
        pass: v == 0,
        est_a,
        est_b,
        est_ab,
    })
}

/// One member of an extremality family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub name: String,
    pub spec: SetSpec,
    pub schedule: EpsSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityEntry {
    pub name: String,
    pub spec: SetSpec,
    pub fit: DimensionFit,
    pub gamma_ratio: f64,
    /// `lower_{N+1} / lower_N` (unnormalized).
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub measurable: bool,
    /// For measurable members: the midpoint ratio equals the γ ratio within
    /// tolerance.
    pub attains: Option<bool>,
    pub est_n: ContentEstimate,
    pub est_n1: ContentEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub s: f64,
    pub tolerance: f64,
    pub entries: Vec<ExtremalityEntry>,
    pub pass: bool,
}

fn extremality_entry(m: &FamilyMember, s: f64, opts: &HarnessOptions) -> Result<ExtremalityEntry> {
    let p = paired(&m.spec, s, &m.schedule, opts)?;
    let fit = box_dimension_fit(p.realized.tube.as_ref(), &m.schedule, opts.exec)
        .map_err(|e| e.at("dimension fit"))?;
    let (a, b) = (&p.est_n, &p.est_n1);
    let finite_positive = [a.lower, a.upper, b.lower, b.upper]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
    if (fit.fitted_d - s).abs() > 0.05 && !finite_positive {
        return Err(Error::domain(format!(
            "{}: fitted dimension {:.4} is not within 0.05 of s = {s} and the contents degenerate",
            m.name, fit.fitted_d
        )));
    }
    let g = gamma_ratio(p.realized.ambient_n, s)?.value;
    let ratio_lower = b.lower / a.lower;
    let ratio_upper = b.upper / a.upper;
    // Backend errors only; the window spread is what the ratios measure.
    let err_lower = ratio_lower * (a.backend_err / a.lower + b.backend_err / b.lower);
    let err_upper = ratio_upper * (a.backend_err / a.upper + b.backend_err / b.upper);
    let measurable = a.verdict == Verdict::Measurable && b.verdict == Verdict::Measurable;
    let attains = measurable.then(|| ((b.midpoint() / a.midpoint()) / g - 1.0).abs() <= opts.tol);
    Ok(ExtremalityEntry {
        name: m.name.clone(),
        spec: m.spec.clone(),
        fit,
        gamma_ratio: g,
        ratio_lower,
        ratio_upper,
        lower_ok: ratio_lower >= g * (1.0 - opts.tol) - err_lower,
        upper_ok: ratio_upper <= g * (1.0 + opts.tol) + err_upper,
        measurable,
        attains,
        est_n: p.est_n,
        est_n1: p.est_n1,
    })
}

/// Checks that `γ_{N+1-s}/γ_{N-s}` bounds the lower ratios from below and the
/// upper ratios from above, and that measurable members attain it.
pub fn extremality_check(
    family: &[FamilyMember],
    s: f64,
    opts: &HarnessOptions,
) -> Result<ExtremalityReport> {
    let results = opts
        .exec
        .map_slice(family, |m| extremality_entry(m, s, opts));
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = entries
        .iter()
        .all(|e| e.lower_ok && e.upper_ok && e.attains.unwrap_or(true));
    Ok(ExtremalityReport {
        s,
        tolerance: opts.tol,
        entries,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma_ball;
    use std::f64::consts::PI;

    fn sched() -> EpsSchedule {
        EpsSchedule::new(1e-1, 1e-5, 8).unwrap()
    }

    #[test]
    fn point_embeds_with_unit_ratio() {
        let rep = embedding_report(
            &SetSpec::point(0.0),
            0.0,
            &sched(),
            &HarnessOptions::default(),
        )
        .unwrap();
        assert!((rep.est_n.normalized_midpoint() - 1.0).abs() < 1e-12);
        assert!((rep.est_n1.normalized_midpoint() - 1.0).abs() < 1e-8);
        assert!((rep.normalized_ratio - 1.0).abs() < 1e-8);
        assert!((rep.gamma_ratio_used.value - PI / 2.0).abs() < 1e-14);
        assert!(rep.pass);
    }

    #[test]
    fn segment_embeds_with_unit_ratio() {
        let sched = EpsSchedule::new(1e-3, 1e-7, 8).unwrap();
        let rep = embedding_report(
            &SetSpec::unit_interval(),
            1.0,
            &sched,
            &HarnessOptions::default(),
        )
        .unwrap();
        assert!((rep.est_n1.midpoint() - 2.0).abs() < 1e-4);
        assert!((rep.normalized_ratio - 1.0).abs() < 1e-5);
        assert!(rep.pass);
    }

    #[test]
    fn cantor_fails_embedding_but_keeps_the_chain() {
        let d = 2f64.ln() / 3f64.ln();
        let cantor = SetSpec::cantor();
        let opts = HarnessOptions::default();
        let rep = embedding_report(&cantor, d, &sched(), &opts).unwrap();
        assert!(!rep.pass);
        let sw = sandwich_check(&cantor, d, &sched(), &opts).unwrap();
        assert!(sw.pass, "{:?}", sw.links);
        assert!(sw.normalized[3] / sw.normalized[0] > 1.01);
        assert!(sw.normalized[2] / sw.normalized[1] > 1.0);
    }

    #[test]
    fn point_chain_collapses() {
        let sw = sandwich_check(
            &SetSpec::point(0.0),
            0.0,
            &sched(),
            &HarnessOptions::default(),
        )
        .unwrap();
        for v in sw.normalized {
            assert!((v - 1.0).abs() < 1e-8);
        }
        assert!(sw.pass);
    }

    #[test]
    fn ambient_constant_examples() {
        let opts = HarnessOptions::default();
        let rep = ambient_constant_check(&SetSpec::point(0.0), 0.0, &sched(), &opts).unwrap();
        let want = [2.0, PI, PI, 4.0];
        for (v, w) in rep.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-8, "{:?}", rep.values);
        }
        assert!(rep.pass);
        let rep = ambient_constant_check(
            &SetSpec::unit_interval(),
            1.0,
            &EpsSchedule::new(1e-3, 1e-7, 8).unwrap(),
            &opts,
        )
        .unwrap();
        assert!(rep.pass);
        assert!((rep.values[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn constants_bracket_the_gamma_ratio() {
        for n in 1..=3usize {
            let mut i = 0;
            while i as f64 * 0.05 <= n as f64 + 1e-12 {
                let s = (i as f64 * 0.05).min(n as f64);
                let c = constant_slack(n, s).unwrap();
                assert!(c.lower_slack >= 0.0 && c.upper_slack >= 0.0, "{c:?}");
                if s > 0.0 && s < n as f64 {
                    assert!(c.lower_slack > 0.0 && c.upper_slack > 0.0, "{c:?}");
                }
                i += 1;
            }
        }
        let c = constant_slack(1, 0.0).unwrap();
        assert!((c.gamma_ratio - PI / 2.0).abs() < 1e-14 && c.gamma_ratio < 2.0);
    }

    #[test]
    fn product_examples() {
        let opts = HarnessOptions::default();
        let rep = product_inequality_check(
            &SetSpec::point(0.0),
            &SetSpec::unit_interval(),
            0.0,
            1.0,
            &EpsSchedule::new(1e-3, 1e-7, 8).unwrap(),
            &opts,
        )
        .unwrap();
        assert_eq!(rep.route, ProductRoute::UnitInterval);
        assert!((rep.lower_const - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((rep.values[1] - 2.0).abs() < 1e-4 && (rep.values[3] - 2.0).abs() < 1e-4);
        assert!(rep.pass, "{:?}", rep.links);

        let rep = product_inequality_check(
            &SetSpec::point(0.0),
            &SetSpec::point(0.0),
            0.0,
            0.0,
            &EpsSchedule::new(1e-1, 1e-3, 4).unwrap(),
            &opts,
        )
        .unwrap();
        assert_eq!(rep.route, ProductRoute::PointGrid);
        assert!((rep.values[0] - 4.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((rep.values[1] - PI).abs() < 0.05 * PI);
        assert!(rep.pass, "{:?}", rep.links);

        let bad = product_inequality_check(
            &SetSpec::cantor(),
            &SetSpec::point(0.0),
            0.5,
            0.0,
            &sched(),
            &opts,
        );
        assert!(matches!(bad, Err(Error::Stage { .. })));
    }

    #[test]
    fn extremality_for_point_and_segment() {
        let family = vec![FamilyMember {
            name: "point".into(),
            spec: SetSpec::point(0.0),
            schedule: sched(),
        }];
        let rep = extremality_check(&family, 0.0, &HarnessOptions::default()).unwrap();
        let e = &rep.entries[0];
        assert!((e.ratio_lower - PI / 2.0).abs() < 1e-8 && e.attains == Some(true));
        assert!(rep.pass);
        let family = vec![FamilyMember {
            name: "segment".into(),
            spec: SetSpec::unit_interval(),
            schedule: EpsSchedule::new(1e-3, 1e-7, 8).unwrap(),
        }];
        let rep = extremality_check(&family, 1.0, &HarnessOptions::default()).unwrap();
        assert!((rep.entries[0].ratio_upper - 2.0).abs() < 1e-5);
        assert!(rep.pass);
    }

    #[test]
    fn double_embedding_keeps_the_normalized_content() {
        let opts = HarnessOptions::default();
        let spec = SetSpec::AString {
            a: 1.0,
            n_terms: 100_000,
        };
        let realized = spec.realize(opts.quad_tol).unwrap();
        let sched = realized.default_schedule(8).unwrap();
        let once: SharedTube = lift_tube(realized.tube.clone(), 1e-8).unwrap();
        let twice: SharedTube = lift_tube(once.clone(), 1e-8).unwrap();
        let base = opts.estimate(&realized.tube, 0.5, &sched).unwrap();
        let e1 = opts.estimate(&once, 0.5, &sched).unwrap();
        let e2 = opts.estimate(&twice, 0.5, &sched).unwrap();
        assert!((e2.gamma_norm - gamma_ball(2.5).unwrap()).abs() < 1e-15);
        let r1 = e1.normalized_midpoint() / base.normalized_midpoint();
        let r2 = e2.normalized_midpoint() / base.normalized_midpoint();
        assert!((r1 - 1.0).abs() <= opts.tol, "{r1}");
        assert!((r2 - 1.0).abs() <= 2.0 * opts.tol, "{r2}");
    }
}
