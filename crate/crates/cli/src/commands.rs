//! One function per subcommand. Each returns the payloads to emit and,
//! when a checked identity fails, the reason.

use gabor_lab::config::ExperimentConfig;
use gabor_lab::counterexamples::{constants_report, Comparison, Counterexample};
use gabor_lab::frame::{self, CMatrix, FrameBounds, IterativeOptions};
use gabor_lab::gabor::{BoundsMethod, DualMethod, FrameData, GaborSystem, RemovalStrategy};
use gabor_lab::geometry::Geometry;
use gabor_lab::localization::{IndexedFamily, Localization};
use gabor_lab::measure::{measure_profile, reciprocity_check, Centers};
use gabor_lab::pointset::RefLattice;
use gabor_lab::signal::{self, Signal, WindowKind};
use gabor_lab::{suite, Error};
use serde::Serialize;

use crate::plot::{self, Series};
use crate::reports::*;

/// Relative slack on identities that hold exactly for dense computations.
const DENSE_SLACK: f64 = 1e-9;
/// Relative slack when bounds come from power iteration.
const ITERATIVE_SLACK: f64 = 1e-6;

pub enum Failure {
    /// Bad input: unknown names, invalid parameters, unreadable files.
    Usage(String),
    /// A checked identity or required property failed.
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotAFrame { .. } | Error::NoConvergence { .. } | Error::EmptyBoxes => {
                Failure::Assertion(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// What a command produced.
pub struct Output {
    pub stem: &'static str,
    pub json: String,
    /// CSV tables `(file name, contents)`; the first goes to stdout.
    pub csv: Vec<(String, String)>,
    /// Files written with `--out` regardless of format.
    pub extras: Vec<(String, String)>,
    pub plots: Vec<(String, String)>,
    pub failure: Option<String>,
}

impl Output {
    fn new(stem: &'static str, report: &impl Serialize) -> Self {
        Self {
            stem,
            json: serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
            csv: Vec::new(),
            extras: Vec::new(),
            plots: Vec::new(),
            failure: None,
        }
    }
}

/// Inputs shared by every command besides the configuration.
pub struct Context {
    pub points_text: Option<String>,
    pub plot: bool,
    pub log_scale: bool,
}

fn csv_table<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

fn options(cfg: &ExperimentConfig) -> IterativeOptions {
    IterativeOptions {
        seed: cfg.seed,
        tolerance: 1e-11,
        ..Default::default()
    }
}

fn bounds_method(cfg: &ExperimentConfig) -> BoundsMethod {
    if cfg.iterative {
        BoundsMethod::Iterative(options(cfg))
    } else {
        BoundsMethod::Dense
    }
}

fn dual_method(cfg: &ExperimentConfig) -> DualMethod {
    if cfg.iterative {
        DualMethod::ConjugateGradient(options(cfg))
    } else {
        DualMethod::Dense
    }
}

fn method_name(cfg: &ExperimentConfig) -> String {
    if cfg.iterative { "iterative" } else { "dense" }.into()
}

fn window_name(cfg: &ExperimentConfig) -> Result<String, Failure> {
    Ok(cfg.window_kind()?.name())
}

fn lattice_label(cfg: &ExperimentConfig, ctx: &Context) -> String {
    match (&cfg.points, &ctx.points_text) {
        (Some(path), Some(_)) => format!("points:{path}"),
        _ => match &cfg.union {
            Some(u) => format!("{}+{u}", cfg.lattice),
            None => cfg.lattice.clone(),
        },
    }
}

fn system(cfg: &ExperimentConfig, ctx: &Context) -> Result<GaborSystem, Failure> {
    if cfg.points.is_none() {
        cfg.lattice()?;
    }
    Ok(cfg.system(ctx.points_text.as_deref())?)
}

fn bounds(sys: &GaborSystem, cfg: &ExperimentConfig) -> Result<FrameBounds, Failure> {
    Ok(sys.frame_bounds(bounds_method(cfg))?)
}

fn density_plot(
    title: &str,
    rows: &[(usize, f64, f64)],
    y_label: &str,
    labels: [&str; 2],
) -> Result<String, Failure> {
    let s = |pick: fn(&(usize, f64, f64)) -> f64, label| Series {
        label,
        points: rows.iter().map(|r| (r.0 as f64, pick(r))).collect(),
    };
    plot::line_plot(
        title,
        "N",
        y_label,
        &[s(|r| r.1, labels[0]), s(|r| r.2, labels[1])],
        false,
    )
    .map_err(Failure::Usage)
}

pub fn density(cfg: &ExperimentConfig, ctx: &Context) -> Result<Output, Failure> {
    let sides = cfg.sides()?;
    if cfg.points.is_none() {
        cfg.lattice()?;
    }
    let points = cfg.point_set(ctx.points_text.as_deref())?;
    let mut levels = Vec::new();
    for &n in &sides {
        let d = points.density_bounds(n)?;
        levels.push(DensityLevel {
            n,
            d_minus: d.minus,
            d_plus: d.plus,
        });
    }
    let report = DensityReport {
        l: cfg.l,
        lattice: lattice_label(cfg, ctx),
        n_points: points.len(),
        levels: levels.clone(),
        config: ConfigRecord::new(cfg, &sides),
    };
    let mut out = Output::new("density", &report);
    out.csv.push(("density.csv".into(), csv_table(&levels)));
    if ctx.plot {
        let rows: Vec<_> = levels.iter().map(|l| (l.n, l.d_minus, l.d_plus)).collect();
        out.plots.push((
            "density.svg".into(),
            density_plot("Box densities", &rows, "density", ["D_minus", "D_plus"])?,
        ));
    }
    Ok(out)
}

/// Smallest and largest box average at side `n`, and the `r1` residual there.
fn measure_at(sys: &GaborSystem, data: &FrameData, n: usize) -> Result<(f64, f64, f64), Failure> {
    let profile = measure_profile(sys, data, &[n], &Centers::IntegerGrid)?;
    let level = profile.level(n).expect("requested side");
    let r1 = reciprocity_check(sys, data, n)?.r1;
    Ok((level.minus, level.plus, r1))
}

pub fn framebounds(cfg: &ExperimentConfig, ctx: &Context) -> Result<Output, Failure> {
    let sides = cfg.sides()?;
    let sys = system(cfg, ctx)?;
    let b = bounds(&sys, cfg)?;
    let n = *sides.last().expect("at least one side");
    let d = sys.points().density_bounds(n)?;
    let (measure_minus, measure_plus, reciprocity_residual) = if b.is_frame() {
        let data = sys.canonical_dual_with(dual_method(cfg))?;
        let (lo, hi, r1) = measure_at(&sys, &data, n)?;
        (Some(lo), Some(hi), Some(r1))
    } else {
        (None, None, None)
    };
    let report = FrameReport {
        l: cfg.l,
        window: window_name(cfg)?,
        lattice: lattice_label(cfg, ctx),
        n_points: sys.len(),
        a: b.lower,
        b: b.upper,
        d_minus: d.minus,
        d_plus: d.plus,
        measure_minus,
        measure_plus,
        reciprocity_residual,
        n,
        method: method_name(cfg),
        is_frame: b.is_frame(),
        config: ConfigRecord::new(cfg, &sides),
    };
    let mut out = Output::new("framebounds", &report);
    out.csv.push((
        "framebounds.csv".into(),
        csv_table(&[FrameRow::from(&report)]),
    ));
    let whole = sys.points().density_bounds(cfg.l)?;
    let energy = sys.window().norm().powi(2);
    let slack = if cfg.iterative {
        ITERATIVE_SLACK
    } else {
        DENSE_SLACK
    } * b.upper.max(1.0);
    let (lo, hi) = (whole.minus * energy, whole.plus * energy);
    if !(b.lower <= lo + slack && lo <= hi + slack && hi <= b.upper + slack) {
        out.failure = Some(format!(
            "frame-bound sandwich violated at N = L: A = {}, D||g||^2 in [{lo}, {hi}], B = {}",
            b.lower, b.upper
        ));
    }
    if ctx.plot {
        let grid = signal::stft(sys.window(), sys.window())?.magnitude();
        out.plots.push((
            "window_stft.svg".into(),
            plot::heatmap("|V_g g|", &grid, ctx.log_scale).map_err(Failure::Usage)?,
        ));
    }
    Ok(out)
}

/// [`FrameReport`] without the embedded configuration, for CSV.
#[derive(Serialize)]
struct FrameRow {
    #[serde(rename = "L")]
    l: usize,
    window: String,
    lattice: String,
    n_points: usize,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "D_minus")]
    d_minus: f64,
    #[serde(rename = "D_plus")]
    d_plus: f64,
    measure_minus: Option<f64>,
    measure_plus: Option<f64>,
    reciprocity_residual: Option<f64>,
}

impl From<&FrameReport> for FrameRow {
    fn from(r: &FrameReport) -> Self {
        Self {
            l: r.l,
            window: r.window.clone(),
            lattice: r.lattice.clone(),
            n_points: r.n_points,
            a: r.a,
            b: r.b,
            d_minus: r.d_minus,
            d_plus: r.d_plus,
            measure_minus: r.measure_minus,
            measure_plus: r.measure_plus,
            reciprocity_residual: r.reciprocity_residual,
        }
    }
}

#[derive(Serialize)]
struct DualRow {
    index: usize,
    x: f64,
    omega: f64,
    n: usize,
    re: f64,
    im: f64,
}

pub fn dual(cfg: &ExperimentConfig, ctx: &Context) -> Result<Output, Failure> {
    let sides = cfg.sides()?;
    let sys = system(cfg, ctx)?;
    let data = sys.canonical_dual_with(dual_method(cfg))?;
    let v = sys.elements();
    let residual = frame::frame_operator(&v) * &data.duals - &v;
    let max_residual = (0..v.ncols())
        .map(|i| residual.column(i).norm() / v.column(i).norm())
        .fold(0.0, f64::max);
    let diag: Vec<f64> = data.diagonal(&v).iter().map(|z| z.re).collect();
    let report = DualReport {
        l: cfg.l,
        window: window_name(cfg)?,
        lattice: lattice_label(cfg, ctx),
        n_points: sys.len(),
        a: data.bounds.lower,
        b: data.bounds.upper,
        method: method_name(cfg),
        max_residual,
        diagonal_min: diag.iter().copied().fold(f64::INFINITY, f64::min),
        diagonal_max: diag.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        config: ConfigRecord::new(cfg, &sides),
    };
    let mut out = Output::new("dual", &report);
    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(rename = "L")]
        l: usize,
        n_points: usize,
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        method: &'a str,
        max_residual: f64,
        diagonal_min: f64,
        diagonal_max: f64,
    }
    let row = Row {
        l: report.l,
        n_points: report.n_points,
        a: report.a,
        b: report.b,
        method: &report.method,
        max_residual,
        diagonal_min: report.diagonal_min,
        diagonal_max: report.diagonal_max,
    };
    out.csv.push(("dual.csv".into(), csv_table(&[row])));
    out.extras
        .push(("duals.csv".into(), dual_dump(&sys, &data.duals)));
    if ctx.plot {
        let first = Signal::new(sys.torus(), data.duals.column(0).iter().copied().collect())?;
        let grid = signal::stft(&first, sys.window())?.magnitude();
        out.plots.push((
            "dual_stft.svg".into(),
            plot::heatmap("|V_g g~_0|", &grid, ctx.log_scale).map_err(Failure::Usage)?,
        ));
    }
    if max_residual > 1e-8 {
        out.failure = Some(format!("dual residual {max_residual:e} exceeds 1e-8"));
    }
    Ok(out)
}

/// CSV `index,x,omega,n,re,im`: every sample of every dual element.
fn dual_dump(sys: &GaborSystem, duals: &CMatrix) -> String {
    let l = sys.torus().len();
    let rows: Vec<DualRow> = sys
        .points()
        .points()
        .iter()
        .enumerate()
        .flat_map(|(i, p)| (0..l).map(move |n| (i, *p, n)))
        .map(|(i, p, n)| DualRow {
            index: i,
            x: p.x,
            omega: p.omega,
            n,
            re: duals[(n, i)].re,
            im: duals[(n, i)].im,
        })
        .collect();
    csv_table(&rows)
}

pub fn localize(cfg: &ExperimentConfig, ctx: &Context) -> Result<Output, Failure> {
    if !cfg.p.is_finite() {
        return Err(Failure::Usage(
            "localize needs a finite exponent p (tail sums of r^p)".into(),
        ));
    }
    let sides = cfg.sides()?;
    let sys = system(cfg, ctx)?;
    let t = cfg.torus()?;
    let reflat: RefLattice = cfg.reference_lattice()?;
    let reference = GaborSystem::lattice(WindowKind::parse(&cfg.ref_window)?.build(t)?, reflat);
    let fam = IndexedFamily::from_gabor(&sys, reflat);
    let fam_ref = IndexedFamily::from_gabor(&reference, reflat);
    let loc = Localization::new(&fam, &fam_ref, Geometry::torus(cfg.l))?;
    let column = loc.column_decay_profile(cfg.p, &sides)?;
    let row = loc.row_decay_profile(cfg.p, &sides)?;
    let env = loc.envelope();
    let decay: Vec<DecayRow> = column
        .n_values
        .iter()
        .zip(column.eps.iter().zip(&row.eps))
        .map(|(&n, (&c, &r))| DecayRow {
            n,
            column_eps: c,
            row_eps: r,
        })
        .collect();
    let report = LocalizeReport {
        l: cfg.l,
        window: window_name(cfg)?,
        ref_window: WindowKind::parse(&cfg.ref_window)?.name(),
        lattice: lattice_label(cfg, ctx),
        reflattice: reflat.to_string(),
        p: cfg.p,
        n_points: fam.len(),
        n_reference: fam_ref.len(),
        decay: decay.clone(),
        envelope_norm: env.p_norm(cfg.p),
        envelope_support: env.support(0.0).len(),
        domination_violation: loc.domination_violation(&env),
        config: ConfigRecord::new(cfg, &sides),
    };
    let mut out = Output::new("localize", &report);
    out.csv.push(("column_decay.csv".into(), column.to_csv()));
    out.csv.push(("row_decay.csv".into(), row.to_csv()));
    out.extras.push(("envelope.csv".into(), env.to_csv()));
    if ctx.plot {
        let series = |label, p: &gabor_lab::localization::DecayProfile| Series {
            label,
            points: p
                .n_values
                .iter()
                .zip(&p.eps)
                .map(|(&n, &e)| (n as f64, e))
                .collect(),
        };
        let curves = [series("column", &column), series("row", &row)];
        let svg = plot::line_plot("Tail decay", "N", "eps", &curves, true)
            .or_else(|_| plot::line_plot("Tail decay", "N", "eps", &curves, false))
            .map_err(Failure::Usage)?;
        out.plots.push(("decay.svg".into(), svg));
    }
    if report.domination_violation > 0.0 {
        out.failure = Some(format!(
            "envelope fails to dominate the cross-Gram by {}",
            report.domination_violation
        ));
    }
    Ok(out)
}

pub fn measure(cfg: &ExperimentConfig, ctx: &Context) -> Result<Output, Failure> {
    let sides = cfg.sides()?;
    let sys = system(cfg, ctx)?;
    let data = sys.canonical_dual_with(dual_method(cfg))?;
    let profile = measure_profile(&sys, &data, &sides, &Centers::IntegerGrid)?;
    let mut levels = Vec::new();
    for &n in &sides {
        let level = profile.level(n).expect("every side has a level");
        let d = sys.points().density_bounds(n)?;
        let rec = reciprocity_check(&sys, &data, n)?;
        levels.push(MeasureSummary {
            n,
            measure_minus: level.minus,
            measure_plus: level.plus,
            d_minus: d.minus,
            d_plus: d.plus,
            lower_product: level.minus * d.plus,
            upper_product: level.plus * d.minus,
            reciprocity_r1: rec.r1,
            reciprocity_r2: rec.r2,
            skipped_centers: level.skipped.len(),
        });
    }
    let last = levels.last().expect("at least one side");
    let report = MeasureReport {
        l: cfg.l,
        window: window_name(cfg)?,
        lattice: lattice_label(cfg, ctx),
        n_points: sys.len(),
        a: data.bounds.lower,
        b: data.bounds.upper,
        reciprocity_residual: last.reciprocity_r1,
        levels: levels.clone(),
        warnings: profile.warnings.clone(),
        config: ConfigRecord::new(cfg, &sides),
    };
    let mut out = Output::new("measure", &report);
    out.csv.push(("measure.csv".into(), profile.to_csv()));
    if ctx.plot {
        let s = |label, f: fn(&MeasureSummary) -> f64| Series {
            label,
            points: levels.iter().map(|l| (l.n as f64, f(l))).collect(),
        };
        let svg = plot::line_plot(
            "Relative measure against inverse density",
            "N",
            "value",
            &[
                s("M_minus", |l| l.measure_minus),
                s("M_plus", |l| l.measure_plus),
                s("1/D_plus", |l| 1.0 / l.d_plus),
                s("1/D_minus", |l| 1.0 / l.d_minus),
            ],
            false,
        )
        .map_err(Failure::Usage)?;
        out.plots.push(("measure.svg".into(), svg));
    }
    let slack = if cfg.iterative {
        ITERATIVE_SLACK
    } else {
        DENSE_SLACK
    };
    if last.n == cfg.l && last.reciprocity_r1 > slack {
        out.failure = Some(format!(
            "reciprocity at N = L off by {} (trace identity)",
            last.reciprocity_r1
        ));
    }
    Ok(out)
}

pub fn excess(cfg: &ExperimentConfig, ctx: &Context) -> Result<Output, Failure> {
    let sides = cfg.sides()?;
    let sys = system(cfg, ctx)?;
    let t = cfg.torus()?;
    let before = bounds(&sys, cfg)?;
    if !before.is_frame() {
        return Err(Error::NotAFrame {
            lower: before.lower,
            upper: before.upper,
        }
        .into());
    }
    let cell = RefLattice::parse(&cfg.cell, t)?;
    let strategy = RemovalStrategy::PerCell {
        fraction: cfg.fraction,
        cell,
        seed: cfg.seed,
    };
    let (survivors, removed) = sys.remove_subset(&strategy)?;
    let after = bounds(&survivors, cfg)?;
    let report = ExcessReport {
        l: cfg.l,
        window: window_name(cfg)?,
        lattice: lattice_label(cfg, ctx),
        cell: cell.to_string(),
        fraction: cfg.fraction,
        n_before: sys.len(),
        n_removed: removed.len(),
        n_after: survivors.len(),
        a_before: before.lower,
        b_before: before.upper,
        a_after: after.lower,
        b_after: after.upper,
        ratio: after.lower / before.lower,
        frame_after: after.is_frame(),
        config: ConfigRecord::new(cfg, &sides),
    };
    let mut out = Output::new("excess", &report);
    #[derive(Serialize)]
    struct Row {
        n_before: usize,
        n_removed: usize,
        n_after: usize,
        #[serde(rename = "A_before")]
        a_before: f64,
        #[serde(rename = "B_before")]
        b_before: f64,
        #[serde(rename = "A_after")]
        a_after: f64,
        #[serde(rename = "B_after")]
        b_after: f64,
        ratio: f64,
    }
    let row = Row {
        n_before: report.n_before,
        n_removed: report.n_removed,
        n_after: report.n_after,
        a_before: report.a_before,
        b_before: report.b_before,
        a_after: report.a_after,
        b_after: report.b_after,
        ratio: report.ratio,
    };
    out.csv.push(("excess.csv".into(), csv_table(&[row])));
    Ok(out)
}

pub fn counterexample(cfg: &ExperimentConfig, name: &str) -> Result<Output, Failure> {
    let kind = Counterexample::parse(name).map_err(|_| {
        let known: Vec<_> = Counterexample::ALL.iter().map(|c| c.name()).collect();
        Failure::Usage(format!(
            "unknown counterexample {name:?} (known: {})",
            known.join(", ")
        ))
    })?;
    let size = cfg.size.unwrap_or_else(|| kind.default_size());
    let report = constants_report(kind, size)?;
    let checks: Vec<CheckRecord> = report
        .checks
        .iter()
        .map(|c| CheckRecord {
            name: c.name.clone(),
            expected: c.expected,
            computed: c.computed,
            comparison: match c.comparison {
                Comparison::Equal => "equal",
                Comparison::AtLeast => "at_least",
                Comparison::AtMost => "at_most",
            }
            .into(),
            tolerance: c.tolerance,
            pass: c.pass,
        })
        .collect();
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    let record = CounterexampleReport {
        name: report.name.clone(),
        size,
        all_pass: failing.is_empty(),
        checks: checks.clone(),
        config: ConfigRecord::new(cfg, &[]),
    };
    let mut out = Output::new("counterexample", &record);
    out.csv
        .push(("counterexample.csv".into(), csv_table(&checks)));
    if !failing.is_empty() {
        out.failure = Some(format!(
            "{} (size {size}): failing constants {}",
            report.name,
            failing.join(", ")
        ));
    }
    Ok(out)
}

pub fn suite(cfg: &ExperimentConfig, criteria: &[usize]) -> Result<Output, Failure> {
    let ids: Vec<usize> = if criteria.is_empty() {
        (1..=suite::CRITERIA).collect()
    } else {
        criteria.to_vec()
    };
    let mut records = Vec::new();
    for id in ids {
        let r = suite::run(id)?;
        eprintln!("{}", r.line());
        records.push(CriterionRecord {
            id: r.id,
            name: r.name,
            pass: r.pass,
            residual: r.residual,
            threshold: r.threshold,
            detail: r.detail,
        });
    }
    let failed: Vec<String> = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.id.to_string())
        .collect();
    let report = SuiteReport {
        passed: records.len() - failed.len(),
        failed: failed.len(),
        criteria: records.clone(),
        config: ConfigRecord::new(cfg, &[]),
    };
    let mut out = Output::new("suite", &report);
    #[derive(Serialize)]
    struct Row<'a> {
        id: usize,
        name: &'a str,
        pass: bool,
        residual: f64,
        threshold: f64,
    }
    let rows: Vec<Row> = records
        .iter()
        .map(|r| Row {
            id: r.id,
            name: &r.name,
            pass: r.pass,
            residual: r.residual,
            threshold: r.threshold,
        })
        .collect();
    out.csv.push(("suite.csv".into(), csv_table(&rows)));
    if !failed.is_empty() {
        out.failure = Some(format!("criteria failing: {}", failed.join(", ")));
    }
    Ok(out)
}
