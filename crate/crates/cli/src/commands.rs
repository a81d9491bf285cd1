use anyhow::{bail, ensure, Context, Result};
use minkowski::estimate::{box_dimension_fit, content_estimate, TracePoint};
use minkowski::gamma::lift_power_integral;
use minkowski::invariance::{
    ambient_constant_check, embedding_report, extremality_check, product_inequality_check,
    sandwich_check, FamilyMember,
};
use minkowski::tube::{
    grid_tube_measure, lift_tube, mc_tube_measure, product_with_unit_interval,
    slice_product_measure, PointCloud, DEFAULT_CELL_BUDGET,
};
use minkowski::{
    gamma_ball, gamma_fn, gamma_ratio, ContentEstimate, EpsSchedule, Exec, RealizedSet,
    TubeFunction, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, NamedSet};
use crate::output::{fmt17, Sink};

/// Agreement required between the product identity and the slice integral.
const PRODUCT_IDENTITY_TOL: f64 = 1e-8;
const GAMMA_TABLE_TOL: f64 = 1e-13;
const MC_SAMPLES: usize = 1_000_000;
const CLOUD_POINTS: usize = 20;

pub struct Ctx {
    pub config: ExperimentConfig,
    pub sink: Sink,
}

struct Prepared<'a> {
    set: &'a NamedSet,
    realized: RealizedSet,
    schedule: EpsSchedule,
}

impl Ctx {
    fn prepare(&self, name: &str) -> Result<Prepared<'_>> {
        let set = self.config.set(name)?;
        let realized = set
            .spec
            .realize(self.config.tolerances.quad)
            .with_context(|| format!("realizing {name}"))?;
        let schedule = self
            .config
            .schedule_for(set, &realized)
            .with_context(|| format!("schedule of {name}"))?;
        Ok(Prepared {
            set,
            realized,
            schedule,
        })
    }

    fn fitted_d(&self, p: &Prepared) -> Result<f64> {
        let fit = box_dimension_fit(p.realized.tube.as_ref(), &p.schedule, Exec::default())
            .with_context(|| format!("fitting the dimension of {}", p.set.name))?;
        Ok(fit.fitted_d)
    }

    fn exponent(&self, p: &Prepared, s: Option<f64>) -> Result<f64> {
        match s {
            Some(s) => Ok(s),
            None => self.fitted_d(p),
        }
    }
}

fn normalized(est: &ContentEstimate) -> Vec<(f64, f64)> {
    est.trace
        .iter()
        .map(|t| (t.eps, t.value / est.gamma_norm))
        .collect()
}

fn pairs(trace: &[TracePoint]) -> Vec<(f64, f64)> {
    trace.iter().map(|t| (t.eps, t.value)).collect()
}

fn verdict_line(label: &str, est: &ContentEstimate) -> String {
    format!(
        "  {label}: lower {} upper {} normalized [{}, {}] trend {:.6} {:?}",
        fmt17(est.lower),
        fmt17(est.upper),
        fmt17(est.normalized_lower),
        fmt17(est.normalized_upper),
        est.trend_per_decade,
        est.verdict
    )
}

#[derive(Serialize)]
struct DimReport<'a> {
    set: &'a NamedSet,
    schedule: &'a EpsSchedule,
    base: minkowski::DimensionFit,
    lifted: minkowski::DimensionFit,
    difference: f64,
    allowance: f64,
}

pub fn dim(ctx: &Ctx, name: &str) -> Result<bool> {
    let p = ctx.prepare(name)?;
    let exec = Exec::default();
    let base =
        box_dimension_fit(p.realized.tube.as_ref(), &p.schedule, exec).context("base fit")?;
    let lifted_tube = lift_tube(p.realized.tube.clone(), ctx.config.tolerances.quad)?;
    let lifted =
        box_dimension_fit(lifted_tube.as_ref(), &p.schedule, exec).context("lifted fit")?;
    let difference = (base.fitted_d - lifted.fitted_d).abs();
    let allowance = base.ci_halfwidth + lifted.ci_halfwidth;
    let pass = difference <= allowance;
    println!("dim {name}");
    for (label, f) in [("R^N", &base), ("R^N+1", &lifted)] {
        println!(
            "  {label}: d = {:.6} ± {:.6} (N = {})",
            f.fitted_d, f.ci_halfwidth, f.ambient_n
        );
    }
    println!(
        "  |difference| {difference:.3e} allowance {allowance:.3e}: {}",
        pass_word(pass)
    );
    ctx.sink
        .trace(&format!("dim-{name}-n.csv"), pairs(&base.trace))?;
    ctx.sink
        .trace(&format!("dim-{name}-n1.csv"), pairs(&lifted.trace))?;
    let report = DimReport {
        set: p.set,
        schedule: &p.schedule,
        base,
        lifted,
        difference,
        allowance,
    };
    ctx.sink.report(
        &format!("dim-{name}.json"),
        "dim",
        pass,
        &ctx.config,
        report,
    )?;
    Ok(pass)
}

pub fn content(ctx: &Ctx, name: &str, s: Option<f64>) -> Result<bool> {
    let p = ctx.prepare(name)?;
    let s = ctx.exponent(&p, s)?;
    let opts = ctx.config.harness();
    let est = content_estimate(
        p.realized.tube.as_ref(),
        s,
        &p.schedule,
        opts.window_decades,
        &opts.policy,
        opts.exec,
    )
    .context("content estimate")?;
    let pass = matches!(est.verdict, Verdict::Measurable | Verdict::Nondegenerate);
    println!("content {name} s = {s}");
    println!("{}", verdict_line("R^N", &est));
    ctx.sink
        .trace(&format!("content-{name}.csv"), pairs(est.window_trace()))?;
    ctx.sink
        .trace(&format!("content-{name}-normalized.csv"), normalized(&est))?;
    ctx.sink.report(
        &format!("content-{name}.json"),
        "content",
        pass,
        &ctx.config,
        &est,
    )?;
    Ok(pass)
}

#[derive(Serialize)]
struct InvarianceReport {
    embedding: minkowski::invariance::EmbeddingReport,
    sandwich: minkowski::invariance::SandwichReport,
}

pub fn invariance(ctx: &Ctx, name: &str, s: Option<f64>) -> Result<bool> {
    let p = ctx.prepare(name)?;
    let s = ctx.exponent(&p, s)?;
    let opts = ctx.config.harness();
    let embedding =
        embedding_report(&p.set.spec, s, &p.schedule, &opts).context("embedding report")?;
    let sandwich = sandwich_check(&p.set.spec, s, &p.schedule, &opts).context("sandwich check")?;
    let pass = embedding.pass && sandwich.pass;
    println!("invariance {name} s = {s}");
    println!("{}", verdict_line("R^N  ", &embedding.est_n));
    println!("{}", verdict_line("R^N+1", &embedding.est_n1));
    println!(
        "  normalized ratio {} (tolerance {}): {}",
        fmt17(embedding.normalized_ratio),
        embedding.tolerance,
        pass_word(embedding.pass)
    );
    println!(
        "  ordering chain: {} violations: {}",
        sandwich.violations,
        pass_word(sandwich.pass)
    );
    ctx.sink.trace(
        &format!("invariance-{name}-n.csv"),
        normalized(&embedding.est_n),
    )?;
    ctx.sink.trace(
        &format!("invariance-{name}-n1.csv"),
        normalized(&embedding.est_n1),
    )?;
    let report = InvarianceReport {
        embedding,
        sandwich,
    };
    ctx.sink.report(
        &format!("invariance-{name}.json"),
        "invariance",
        pass,
        &ctx.config,
        report,
    )?;
    Ok(pass)
}

#[derive(Serialize)]
struct SandwichReport {
    ordering: minkowski::invariance::SandwichReport,
    constants: minkowski::invariance::AmbientConstantReport,
}

pub fn sandwich(ctx: &Ctx, name: &str, s: Option<f64>) -> Result<bool> {
    let p = ctx.prepare(name)?;
    let s = ctx.exponent(&p, s)?;
    let opts = ctx.config.harness();
    let ordering = sandwich_check(&p.set.spec, s, &p.schedule, &opts).context("sandwich check")?;
    let constants =
        ambient_constant_check(&p.set.spec, s, &p.schedule, &opts).context("constant check")?;
    let pass = ordering.pass && constants.pass;
    println!("sandwich {name} s = {s}");
    for l in ordering.links.iter().chain(&constants.links) {
        println!(
            "  {} <= {}: slack {:.3e} allowance {:.3e} {}",
            l.left,
            l.right,
            l.slack,
            l.allowance,
            pass_word(l.holds)
        );
    }
    let pr = &ordering.probe;
    println!(
        "  gaps (report only): lower {:.3e} upper {:.3e}, measurable only after embedding: {}",
        pr.lower_gap, pr.upper_gap, pr.measurable_only_after_embedding
    );
    ctx.sink.trace(
        &format!("sandwich-{name}-n.csv"),
        normalized(&ordering.est_n),
    )?;
    ctx.sink.trace(
        &format!("sandwich-{name}-n1.csv"),
        normalized(&ordering.est_n1),
    )?;
    let report = SandwichReport {
        ordering,
        constants,
    };
    ctx.sink.report(
        &format!("sandwich-{name}.json"),
        "sandwich",
        pass,
        &ctx.config,
        report,
    )?;
    Ok(pass)
}

pub fn product(ctx: &Ctx, names: &[String], s: Option<f64>, r: Option<f64>) -> Result<bool> {
    let [a, b] = names else {
        bail!(
            "product needs exactly two --set arguments, got {}",
            names.len()
        );
    };
    let (pa, pb) = (ctx.prepare(a)?, ctx.prepare(b)?);
    let s = ctx.exponent(&pa, s)?;
    let r = ctx.exponent(&pb, r)?;
    // Both factors must stay resolved, so the schedules intersect.
    let hi = pa.schedule.eps_max().min(pb.schedule.eps_max());
    let lo = pa.schedule.eps_min().max(pb.schedule.eps_min());
    let sched = EpsSchedule::new(hi, lo, ctx.config.schedule.points_per_decade)
        .with_context(|| format!("the schedules of {a} and {b} do not overlap"))?;
    let rep = product_inequality_check(
        &pa.set.spec,
        &pb.set.spec,
        s,
        r,
        &sched,
        &ctx.config.harness(),
    )?;
    println!("product {a} x {b} s = {s} r = {r} via {:?}", rep.route);
    for l in &rep.links {
        println!(
            "  {} <= {}: slack {:.3e} allowance {:.3e} {}",
            l.left,
            l.right,
            l.slack,
            l.allowance,
            pass_word(l.holds)
        );
    }
    ctx.sink
        .trace(&format!("product-{a}-{b}.csv"), normalized(&rep.est_ab))?;
    let pass = rep.pass;
    ctx.sink.report(
        &format!("product-{a}-{b}.json"),
        "product",
        pass,
        &ctx.config,
        &rep,
    )?;
    Ok(pass)
}

pub fn extremality(ctx: &Ctx, names: &[String], s: Option<f64>) -> Result<bool> {
    let chosen: Vec<Prepared> = if names.is_empty() {
        let s = s.context("extremality needs --s or at least one --set")?;
        let mut out = Vec::new();
        for set in &ctx.config.sets {
            let p = ctx.prepare(&set.name)?;
            if p.realized.ambient_n == 1 && (ctx.fitted_d(&p)? - s).abs() <= 0.05 {
                out.push(p);
            }
        }
        out
    } else {
        names
            .iter()
            .map(|n| ctx.prepare(n))
            .collect::<Result<_>>()?
    };
    ensure!(
        !chosen.is_empty(),
        "no set in the configuration has a fitted dimension near s"
    );
    let s = match s {
        Some(s) => s,
        None => ctx.fitted_d(&chosen[0])?,
    };
    let family: Vec<FamilyMember> = chosen
        .iter()
        .map(|p| FamilyMember {
            name: p.set.name.clone(),
            spec: p.set.spec.clone(),
            schedule: p.schedule,
        })
        .collect();
    let rep = extremality_check(&family, s, &ctx.config.harness())?;
    println!("extremality s = {s}");
    for e in &rep.entries {
        println!(
            "  {}: gamma ratio {:.6} lower ratio {:.6} upper ratio {:.6} attains {} {}",
            e.name,
            e.gamma_ratio,
            e.ratio_lower,
            e.ratio_upper,
            e.attains.map_or("-".to_string(), |a| a.to_string()),
            pass_word(e.lower_ok && e.upper_ok && e.attains.unwrap_or(true))
        );
    }
    let pass = rep.pass;
    ctx.sink
        .report("extremality.json", "extremality", pass, &ctx.config, &rep)?;
    Ok(pass)
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    check: &'static str,
    n: Option<usize>,
    s: Option<f64>,
    eps: Option<f64>,
    got: f64,
    want: f64,
    error: f64,
    tolerance: f64,
    pass: bool,
}

impl Row {
    fn new(check: &'static str, got: f64, want: f64, error: f64, tolerance: f64) -> Self {
        Row {
            check,
            n: None,
            s: None,
            eps: None,
            got,
            want,
            error,
            tolerance,
            pass: error <= tolerance,
        }
    }

    fn at(mut self, n: Option<usize>, s: Option<f64>, eps: Option<f64>) -> Self {
        self.n = n;
        self.s = s;
        self.eps = eps;
        self
    }

    fn key(&self) -> String {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v}"));
        format!(
            "({}, {}, {})",
            self.n.map_or("-".to_string(), |n| n.to_string()),
            show(self.s),
            show(self.eps)
        )
    }
}

fn quadrature_rows(tol: f64) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for n in 1..=3usize {
        for k in 0..=(4 * n) {
            let s = k as f64 * 0.25;
            for eps in [1.0, 0.1, 0.01] {
                let got = lift_power_integral(n, s, eps, tol / 10.0)?;
                let want = gamma_ratio(n, s)?.value * eps.powf(n as f64 + 1.0 - s);
                // Absolute, turning relative once the values exceed one.
                let err = (got - want).abs() / want.abs().max(1.0);
                rows.push(Row::new("lift_quadrature", got, want, err, tol).at(
                    Some(n),
                    Some(s),
                    Some(eps),
                ));
            }
        }
    }
    Ok(rows)
}

fn gamma_rows() -> Result<Vec<Row>> {
    let pi = std::f64::consts::PI;
    let mut rows = Vec::new();
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    for (x, want) in [(1.0, 1.0), (0.5, pi.sqrt()), (5.0, 24.0)] {
        let got = gamma_fn(x)?;
        rows.push(
            Row::new("gamma", got, want, rel(got, want), GAMMA_TABLE_TOL).at(None, Some(x), None),
        );
    }
    for (k, want) in [(0usize, 1.0), (1, 2.0), (2, pi), (3, 4.0 * pi / 3.0)] {
        let got = gamma_ball(k as f64)?;
        rows.push(
            Row::new("ball", got, want, rel(got, want), GAMMA_TABLE_TOL).at(Some(k), None, None),
        );
    }
    Ok(rows)
}

fn product_rows(ctx: &Ctx) -> Result<Vec<Row>> {
    let quad = ctx.config.tolerances.quad;
    let mut jobs = Vec::new();
    for set in &ctx.config.sets {
        let p = ctx.prepare(&set.name)?;
        if p.realized.ambient_n != 1 {
            continue;
        }
        let product = product_with_unit_interval(p.realized.tube.clone(), quad)?;
        for eps in p.schedule.values() {
            jobs.push((product.clone(), p.realized.tube.clone(), eps));
        }
    }
    let rows = Exec::default().map_slice(&jobs, |(product, base, eps)| -> Result<Row> {
        let got = product.eval(*eps)?.value;
        let want = slice_product_measure(base.as_ref(), *eps, quad)?;
        let err = (got - want).abs() / got;
        Ok(
            Row::new("product_identity", got, want, err, PRODUCT_IDENTITY_TOL).at(
                Some(1),
                None,
                Some(*eps),
            ),
        )
    });
    rows.into_iter().collect()
}

fn backend_rows(seed: u64) -> Result<Vec<Row>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..2 * CLOUD_POINTS).map(|_| rng.random::<f64>()).collect();
    let cloud = PointCloud::new(2, coords)?;
    let exec = Exec::default();
    let mut rows = Vec::new();
    for eps in [0.05, 0.1] {
        let (mc, stderr) = mc_tube_measure(&cloud, eps, MC_SAMPLES, seed, exec)?;
        let grid = grid_tube_measure(&cloud, eps, eps / 16.0, DEFAULT_CELL_BUDGET, exec)?;
        let err = (mc - grid.estimate).abs();
        rows.push(
            Row::new(
                "mc_vs_grid",
                mc,
                grid.estimate,
                err,
                3.0 * stderr + grid.bound,
            )
            .at(Some(2), None, Some(eps)),
        );
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SelftestReport {
    max_quadrature_error: f64,
    failures: Vec<String>,
    rows: Vec<Row>,
}

pub fn selftest(ctx: &Ctx) -> Result<bool> {
    let mut rows = quadrature_rows(ctx.config.tolerances.selftest)?;
    rows.extend(gamma_rows()?);
    rows.extend(product_rows(ctx)?);
    rows.extend(backend_rows(ctx.config.seed)?);
    println!(
        "{:<17} {:>2} {:>5} {:>6}  {:>24} {:>24} {:>10} {:>10}",
        "check", "N", "s", "eps", "got", "want", "error", "tol"
    );
    for r in &rows {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v}"));
        println!(
            "{:<17} {:>2} {:>5} {:>6}  {:>24} {:>24} {:>10.3e} {:>10.3e} {}",
            r.check,
            r.n.map_or("-".to_string(), |n| n.to_string()),
            show(r.s),
            show(r.eps),
            fmt17(r.got),
            fmt17(r.want),
            r.error,
            r.tolerance,
            pass_word(r.pass)
        );
    }
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} {}", r.check, r.key()))
        .collect();
    let max_quadrature_error = rows
        .iter()
        .filter(|r| r.check == "lift_quadrature")
        .map(|r| r.error)
        .fold(0.0, f64::max);
    println!(
        "{} rows, {} failing, max quadrature error {max_quadrature_error:.3e}",
        rows.len(),
        failures.len()
    );
    for f in &failures {
        eprintln!("failed: {f}");
    }
    let pass = failures.is_empty();
    let report = SelftestReport {
        max_quadrature_error,
        failures,
        rows,
    };
    ctx.sink
        .report("selftest.json", "selftest", pass, &ctx.config, report)?;
    Ok(pass)
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
