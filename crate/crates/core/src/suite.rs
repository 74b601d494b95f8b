//! The acceptance suite: one evaluator per numbered criterion, each
//! returning a headline residual, its threshold and a pass flag.

use serde::{Deserialize, Serialize};

use crate::counterexamples::{
    self, column_not_row_pair, constants_report, double_index_example, dual_localized_not_self,
    harmonic_tail, infinite_density_bessel, no_hap_pair, perturbed_basis, relations_suite_with,
    weak_not_strong_pair, BlockSpace, Counterexample, FramePair, PairDuals,
};
use crate::error::{Error, Result};
use crate::frame::{self, FrameBounds};
use crate::gabor::{BoundsMethod, GaborSystem, RemovalStrategy};
use crate::geometry::Geometry;
use crate::localization::{molecule_domination_violation, molecule_envelope, IndexedFamily};
use crate::measure::{self, measure_profile, reciprocity_check, Centers};
use crate::pointset::{PointSet, RefLattice, TorusParams};
use crate::signal::{gaussian_window, WindowKind};

pub const CRITERIA: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    /// Headline quantity compared against `threshold`; always finite.
    pub residual: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionResult {
    /// One `PASS`/`FAIL` line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {:<28} residual {:.3e} (threshold {:.1e}) {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.threshold,
            self.detail
        )
    }
}

fn result(
    id: usize,
    name: &str,
    pass: bool,
    residual: f64,
    threshold: f64,
    detail: String,
) -> CriterionResult {
    CriterionResult {
        id,
        name: name.into(),
        pass,
        residual,
        threshold,
        detail,
    }
}

fn sci(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn torus(l: usize) -> TorusParams {
    TorusParams::new(l).expect("suite tori are valid")
}

fn lattice_system(window: WindowKind, l: usize, a: usize, b: usize) -> Result<GaborSystem> {
    let t = torus(l);
    Ok(GaborSystem::lattice(
        window.build(t)?,
        RefLattice::new(a, b, t)?,
    ))
}

pub fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "lattice_measure",
        2 => "density_measure_reciprocity",
        3 => "frame_bound_sandwich",
        4 => "no_hap_tail",
        5 => "perturbed_basis_bounds",
        6 => "column_not_row_blocks",
        7 => "bridge_inequalities",
        8 => "riesz_basis_measure",
        9 => "gaussian_criticality",
        10 => "dual_molecule",
        11 => "excess_removal",
        12 => "double_index",
        _ => "unknown",
    }
}

/// Evaluate criterion `id` (1-based).
pub fn run(id: usize) -> Result<CriterionResult> {
    match id {
        1 => lattice_measure(),
        2 => reciprocity(),
        3 => sandwich(),
        4 => no_hap_tail(),
        5 => perturbed_bounds(),
        6 => column_not_row(),
        7 => bridges(),
        8 => riesz_measure(),
        9 => criticality(),
        10 => dual_molecule(),
        11 => excess(),
        12 => double_index(),
        _ => Err(Error::OutOfRange(format!(
            "criterion {id} is not in 1..={CRITERIA}"
        ))),
    }
}

pub fn run_all() -> Result<Vec<CriterionResult>> {
    (1..=CRITERIA).map(run).collect()
}

fn lattice_measure() -> Result<CriterionResult> {
    let sys = lattice_system(WindowKind::Gaussian, 144, 4, 6)?;
    let data = sys.canonical_dual()?;
    let expected = 24.0 / 144.0;
    let residual = data
        .diagonal(&sys.elements())
        .iter()
        .map(|z| (z - expected).norm())
        .fold(0.0, f64::max);
    let tol = 1e-9;
    Ok(result(
        1,
        criterion_name(1),
        residual < tol,
        residual,
        tol,
        format!("max |<g, S^-1 g> - 1/6| over {} elements", sys.len()),
    ))
}

fn reciprocity() -> Result<CriterionResult> {
    let l = 144;
    let base = lattice_system(WindowKind::Gaussian, l, 4, 6)?;
    let jittered = |delta: f64, seed: u64| {
        GaborSystem::new(base.window().clone(), base.points().jitter(delta, seed))
    };
    let mut worst = 0.0f64;
    let mut half = 0.0f64;
    for seed in 1..=5 {
        let sys = jittered(0.5, seed)?;
        let data = sys.canonical_dual()?;
        worst = worst.max(reciprocity_check(&sys, &data, l)?.r1);
        half = half.max(reciprocity_check(&sys, &data, l / 2)?.r1);
    }
    let mut trend = Vec::new();
    for delta in [0.1, 0.01, 1e-4, 0.0] {
        let sys = jittered(delta, 1)?;
        let data = sys.canonical_dual()?;
        trend.push(reciprocity_check(&sys, &data, l)?.r1);
    }
    let limit = *trend.last().unwrap();
    let pass = worst < 0.05 && limit < 1e-9;
    Ok(result(
        2,
        criterion_name(2),
        pass,
        worst,
        0.05,
        format!(
            "delta=0.5 seeds 1..5 r1(N=L)={worst:.2e}, r1(N=L/2)={half:.2e}; delta->0 r1=[{}]",
            sci(&trend)
        ),
    ))
}

/// The 18 systems of the sandwich matrix, labelled.
pub fn sandwich_matrix() -> Result<Vec<(String, GaborSystem)>> {
    let mut out = Vec::new();
    for (l, (a, b), (ua, ub)) in [(64, (4, 4), (8, 8)), (144, (4, 6), (6, 8))] {
        let t = torus(l);
        let lat = RefLattice::new(a, b, t)?;
        let base = PointSet::lattice_points(lat, t);
        let sets = [
            ("lattice", base.clone()),
            ("jittered", base.jitter(0.5, 1)),
            (
                "union",
                base.union(&PointSet::lattice_points(RefLattice::new(ua, ub, t)?, t))?,
            ),
        ];
        for window in ["gaussian", "box", "cosine_bump"] {
            let g = WindowKind::parse(window)?.build(t)?;
            for (name, ps) in &sets {
                out.push((
                    format!("L={l} {window} {name}"),
                    GaborSystem::new(g.clone(), ps.clone())?,
                ));
            }
        }
    }
    Ok(out)
}

/// `(A, D^- ||g||^2, D^+ ||g||^2, B)` at box side `L`.
pub fn sandwich_terms(sys: &GaborSystem) -> Result<[f64; 4]> {
    let bounds = sys.frame_bounds(BoundsMethod::Dense)?;
    let d = sys.points().density_bounds(sys.torus().len())?;
    let energy = sys.window().norm().powi(2);
    Ok([
        bounds.lower,
        d.minus * energy,
        d.plus * energy,
        bounds.upper,
    ])
}

fn sandwich() -> Result<CriterionResult> {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_label = String::new();
    let systems = sandwich_matrix()?;
    for (label, sys) in &systems {
        let [a, lo, hi, b] = sandwich_terms(sys)?;
        let scale = 1e-12 * b.max(1.0);
        let gap = (a - lo).max(lo - hi).max(hi - b) - scale;
        if gap > worst {
            worst = gap;
            worst_label = label.clone();
        }
    }
    Ok(result(
        3,
        criterion_name(3),
        worst <= 0.0,
        worst.max(0.0),
        0.0,
        format!(
            "{} systems; tightest margin at {worst_label}",
            systems.len()
        ),
    ))
}

fn no_hap_tail() -> Result<CriterionResult> {
    let mut worst = 0.0f64;
    for n in [8, 32, 64] {
        for radius in 0..n {
            let expected = (n - radius - 1) as f64 / n as f64;
            worst = worst.max((harmonic_tail(n, radius) - expected).abs());
        }
    }
    let tol = 1e-12;
    Ok(result(
        4,
        criterion_name(4),
        worst <= tol,
        worst,
        tol,
        "max |tail - (n-N-1)/n| over n in {8,32,64}, N < n".into(),
    ))
}

fn perturbed_bounds() -> Result<CriterionResult> {
    let mut in_range = true;
    let mut values = Vec::new();
    let mut last = FrameBounds {
        lower: 0.0,
        upper: 0.0,
    };
    for m in [16, 64, 256] {
        let b = frame::dense_bounds(&perturbed_basis(m).system.vectors);
        in_range &= b.lower >= 0.25 - 1e-12 && b.upper <= 2.25 + 1e-12;
        values.push(format!("M={m}: A={:.5} B={:.5}", b.lower, b.upper));
        last = b;
    }
    let rel = (last.lower - 0.25).abs() / 0.25;
    Ok(result(
        5,
        criterion_name(5),
        in_range && rel <= 0.05,
        rel,
        0.05,
        format!(
            "{}; bounds in [1/4, 9/4]: {in_range}; |A/0.25 - 1| at M=256",
            values.join(", ")
        ),
    ))
}

fn column_not_row() -> Result<CriterionResult> {
    let mut worst = 0.0f64;
    let mut pass = true;
    for n in [4, 16, 64] {
        let report = constants_report(Counterexample::ColumnNotRow, n)?;
        pass &= report.all_pass();
        for c in &report.checks {
            if c.name == "row_tail_N2" {
                worst = worst.max((c.computed - c.expected).abs());
            }
        }
    }
    Ok(result(
        6,
        criterion_name(6),
        pass,
        worst,
        1e-12,
        "Riesz bounds within [1/2, 3/2] +/- 1e-10 and row tail (n-1)/(4n) for n in {4,16,64}"
            .into(),
    ))
}

/// Every construction of the counterexample module plus one Gabor pair,
/// with the duals used for the bridge checks.
pub fn constructed_pairs() -> Result<Vec<(String, FramePair, PairDuals, Vec<usize>)>> {
    let mut out = Vec::new();
    let blocks = |pair: FramePair, n_max: usize, tail: usize, name: &str| {
        let duals = PairDuals::blockwise(&pair, &BlockSpace::triangular(n_max, tail));
        (name.to_string(), pair, duals, vec![2, 4, 8, 16])
    };
    out.push(blocks(no_hap_pair(16, 4), 16, 4, "no-hap"));
    out.push(blocks(
        weak_not_strong_pair(16, 4),
        16,
        4,
        "weak-not-strong",
    ));
    out.push(blocks(column_not_row_pair(16), 16, 0, "column-not-row"));
    let dense = |pair: FramePair, name: &str, ns: Vec<usize>| {
        let duals = PairDuals::dense(&pair);
        (name.to_string(), pair, duals, ns)
    };
    out.push(dense(
        perturbed_basis(32),
        "perturbed-basis",
        vec![2, 8, 32, 64],
    ));
    out.push(dense(
        double_index_example(8).pair,
        "double-index",
        vec![2, 6, 10, 16],
    ));
    let dl = dual_localized_not_self(16, 0.75, 1.0)?;
    let dim = dl.frame.family.len();
    let reference = IndexedFamily {
        vectors: frame::CMatrix::identity(dim, dim),
        sites: dl.frame.family.sites.clone(),
    };
    let pair = FramePair {
        system: dl.frame.family,
        reference,
        geometry: dl.frame.geometry,
    };
    out.push(dense(pair, "dual-localized-not-self", vec![2, 8, 16, 32]));
    out.push(dense(
        infinite_density_bessel(12),
        "infinite-density-bessel",
        vec![2, 4, 8],
    ));
    let t = torus(32);
    let sys = GaborSystem::lattice(gaussian_window(t), RefLattice::new(2, 4, t)?);
    let reference = GaborSystem::lattice(gaussian_window(t), RefLattice::new(4, 4, t)?);
    let lat = RefLattice::new(4, 4, t)?;
    let pair = FramePair {
        system: IndexedFamily::from_gabor(&sys, lat),
        reference: IndexedFamily::from_gabor(&reference, lat),
        geometry: Geometry::torus(32),
    };
    out.push(dense(pair, "gabor-L32", vec![4, 8, 16, 32]));
    Ok(out)
}

fn bridges() -> Result<CriterionResult> {
    let trials = 1000;
    let fuzz = counterexamples::fuzz_relations(trials, 40, 7)?;
    let mut violations = fuzz.len();
    let mut checked = 0;
    let mut worst = 0.0f64;
    for (_, pair, duals, ns) in constructed_pairs()? {
        let report = relations_suite_with(&pair, &duals, &ns)?;
        checked += report.bridges.len();
        for b in report.violations() {
            worst = worst.max(b.lhs - b.rhs);
        }
        violations += report.violations().len();
    }
    for b in &fuzz {
        worst = worst.max(b.lhs - b.rhs);
    }
    Ok(result(
        7,
        criterion_name(7),
        violations == 0,
        violations as f64,
        0.0,
        format!("{trials} random pairs (dim <= 40) plus {checked} checks on constructions; worst excess {worst:.2e}"),
    ))
}

fn riesz_measure() -> Result<CriterionResult> {
    let mut worst = 0.0f64;
    let mut tested = 0;
    for (window, l, a, b) in [
        (WindowKind::Box { width: 8 }, 64, 8, 8),
        (WindowKind::Box { width: 4 }, 16, 4, 4),
        (WindowKind::Gaussian, 25, 5, 5),
        (WindowKind::Gaussian, 81, 9, 9),
    ] {
        let sys = lattice_system(window, l, a, b)?;
        let data = sys.canonical_dual()?;
        let sides: Vec<usize> = [2, 4, (l / 2) & !1, l & !1]
            .into_iter()
            .filter(|&n| n >= 2)
            .collect();
        let profile = measure_profile(&sys, &data, &sides, &Centers::IntegerGrid)?;
        for row in &profile.rows {
            worst = worst.max((row.avg - 1.0).abs());
        }
        tested += 1;
    }
    for m in [8, 32] {
        let pair = perturbed_basis(m);
        let duals = frame::canonical_dual(&pair.system.vectors);
        let centers: Vec<_> = (-(m as i64)..=m as i64).map(|c| [c, 0]).collect();
        for n in [2, 4, 8] {
            for v in
                measure::relative_measure(&pair.system, &duals, None, pair.geometry, n, &centers)
                    .into_iter()
                    .flatten()
            {
                worst = worst.max((v - 1.0).abs());
            }
        }
        tested += 1;
    }
    let tol = 1e-9;
    Ok(result(
        8,
        criterion_name(8),
        worst <= tol,
        worst,
        tol,
        format!("{tested} Riesz bases, max |avg - 1|"),
    ))
}

/// Condition number `B / A`, `+inf` below the frame threshold.
fn condition(sys: &GaborSystem) -> Result<f64> {
    Ok(sys.frame_bounds(BoundsMethod::Dense)?.condition())
}

fn criticality() -> Result<CriterionResult> {
    let critical = [(32, 4, 8), (64, 8, 8), (128, 8, 16)];
    let half = [(32, 4, 4), (64, 4, 8), (128, 8, 8)];
    let mut kappas = Vec::new();
    for (l, a, b) in critical {
        kappas.push(condition(&lattice_system(WindowKind::Gaussian, l, a, b)?)?);
    }
    let monotone = kappas.windows(2).all(|w| w[1] >= w[0]);
    let mut half_max = 0.0f64;
    for (l, a, b) in half {
        half_max = half_max.max(condition(&lattice_system(WindowKind::Gaussian, l, a, b)?)?);
    }
    let mut odd = Vec::new();
    for s in [5usize, 7, 9, 11] {
        odd.push(condition(&lattice_system(
            WindowKind::Gaussian,
            s * s,
            s,
            s,
        )?)?);
    }
    let odd_growth = odd.windows(2).all(|w| w[1] > w[0]);
    let pass = monotone && half_max < 20.0 && odd_growth;
    Ok(result(
        9,
        criterion_name(9),
        pass,
        half_max,
        20.0,
        format!("critical kappa [{}] over L=32,64,128; odd-square critical kappa [{}]; max kappa at ab=L/2", sci(&kappas), sci(&odd)),
    ))
}

/// Tail fraction and domination violation of the dual envelope for the
/// L = 96, 4x6 lattice jittered by `delta`.
pub fn dual_molecule_stats(delta: f64, seed: u64) -> Result<(f64, f64, f64)> {
    let t = torus(96);
    let lat = RefLattice::new(4, 6, t)?;
    let sys = GaborSystem::new(
        gaussian_window(t),
        PointSet::lattice_points(lat, t).jitter(delta, seed),
    )?;
    let data = sys.canonical_dual()?;
    let gamma = gaussian_window(t);
    let env = molecule_envelope(&data.duals, sys.points(), &gamma)?;
    let violation = molecule_domination_violation(&data.duals, sys.points(), &gamma, &env)?;
    let amalgam = env.amalgam(1.0, lat)?;
    Ok((violation, amalgam, env.amalgam_tail_fraction(lat, 24.0)))
}

fn dual_molecule() -> Result<CriterionResult> {
    let (violation, amalgam, tail) = dual_molecule_stats(0.5, 1)?;
    let pass = violation <= 1e-12 && amalgam.is_finite() && tail < 1e-4;
    Ok(result(
        10,
        criterion_name(10),
        pass,
        tail,
        1e-4,
        format!("domination violation {violation:.1e}, amalgam l1 {amalgam:.4}; tail share outside radius L/4"),
    ))
}

fn excess() -> Result<CriterionResult> {
    let t = torus(144);
    let sys = lattice_system(WindowKind::Gaussian, 144, 4, 6)?;
    let a = sys.frame_bounds(BoundsMethod::Dense)?.lower;
    let strategy = RemovalStrategy::PerCell {
        fraction: 1.0 / 6.0,
        cell: RefLattice::new(12, 12, t)?,
        seed: 1,
    };
    let (survivors, removed) = sys.remove_subset(&strategy)?;
    let a_after = survivors.frame_bounds(BoundsMethod::Dense)?.lower;
    let ratio = a_after / a;
    Ok(result(
        11,
        criterion_name(11),
        ratio > 0.1,
        ratio,
        0.1,
        format!(
            "removed {} of {} points; A={a:.4} A'={a_after:.4}; A'/A",
            removed.len(),
            sys.len()
        ),
    ))
}

fn double_index() -> Result<CriterionResult> {
    let mut worst = 0.0f64;
    let mut pass = true;
    for m in [4, 8, 32] {
        let report = constants_report(Counterexample::DoubleIndex, m)?;
        pass &= report.all_pass();
        for c in &report.checks {
            worst = worst.max((c.computed - c.expected).abs());
        }
    }
    let tol = 1e-12;
    Ok(result(
        12,
        criterion_name(12),
        pass && worst <= tol,
        worst,
        tol,
        "density 2, measure 1/2, product 1 for M in {4,8,32}".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion() {
        assert!(run(0).is_err());
        assert!(run(13).is_err());
        assert_eq!(criterion_name(13), "unknown");
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 4, 6, 12] {
            let r = run(id).unwrap();
            assert!(r.pass, "{}", r.line());
            assert!(r.residual.is_finite());
        }
    }

    #[test]
    fn sandwich_matrix_shape() {
        let m = sandwich_matrix().unwrap();
        assert_eq!(m.len(), 18);
        let labels: std::collections::BTreeSet<_> = m.iter().map(|(l, _)| l.clone()).collect();
        assert_eq!(labels.len(), 18);
    }
}
