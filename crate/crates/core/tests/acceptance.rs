//! Acceptance run: one PASS/FAIL line per criterion, each backed by an
//! independent check built from closed forms or naive loops.
//!
//! Exits nonzero when an oracle disagrees with the library or when a
//! criterion outside `KNOWN_UNMET` fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use gabor_lab::counterexamples::{
    column_not_row_pair, column_not_row_riesz_bounds, double_index_example, perturbed_basis,
};
use gabor_lab::frame::{self, CMatrix};
use gabor_lab::gabor::{BoundsMethod, GaborSystem, RemovalStrategy};
use gabor_lab::localization::molecule_envelope;
use gabor_lab::measure::reciprocity_check;
use gabor_lab::pointset::{PointSet, RefLattice, TorusParams};
use gabor_lab::signal::{gaussian_window, Signal, WindowKind};
use gabor_lab::suite;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met in the finite model; see the README.
const KNOWN_UNMET: [usize; 2] = [5, 10];

/// Wall-clock limits in seconds for the criteria that state one.
const LIMITS: [(usize, f64); 3] = [(1, 10.0), (2, 60.0), (10, 120.0)];

fn torus(l: usize) -> TorusParams {
    TorusParams::new(l).unwrap()
}

/// `g_λ(n) = e^{2πi ω n / L} g(n - x)` with `(x, ω)` rounded, by direct loops.
fn naive_elements(window: &Signal, points: &PointSet) -> CMatrix {
    let l = window.len();
    let g = window.samples();
    let mut m = CMatrix::zeros(l, points.len());
    for (c, p) in points.points().iter().enumerate() {
        let x = (p.x.round() as i64).rem_euclid(l as i64) as usize;
        let w = (p.omega.round() as i64).rem_euclid(l as i64) as usize;
        for n in 0..l {
            let phase = 2.0 * PI * ((w * n) % l) as f64 / l as f64;
            m[(n, c)] = Complex64::from_polar(1.0, phase) * g[(n + l - x) % l];
        }
    }
    m
}

fn naive_frame_operator(v: &CMatrix) -> CMatrix {
    let (l, k) = v.shape();
    CMatrix::from_fn(l, l, |r, c| {
        (0..k).map(|i| v[(r, i)] * v[(c, i)].conj()).sum()
    })
}

/// Duals by LU solves of `S x = g_λ`.
fn lu_duals(v: &CMatrix) -> CMatrix {
    naive_frame_operator(v)
        .lu()
        .solve(v)
        .expect("frame operator is invertible")
}

/// `S - t I` is positive definite: a Cholesky sweep with a real positive pivot at every step.
fn above(s: &CMatrix, t: f64) -> bool {
    let n = s.nrows();
    let mut a = s - CMatrix::identity(n, n) * Complex64::from(t);
    for k in 0..n {
        let pivot = a[(k, k)].re;
        if !(pivot > 0.0) {
            return false;
        }
        let d = pivot.sqrt();
        for i in k..n {
            a[(i, k)] /= d;
        }
        for j in k + 1..n {
            for i in j..n {
                let update = a[(i, k)] * a[(j, k)].conj();
                a[(i, j)] -= update;
            }
        }
    }
    true
}

fn in_box(v: f64, c: i64, n: usize, l: usize) -> bool {
    (v - c as f64 + (n / 2) as f64).rem_euclid(l as f64) < n as f64
}

/// `max_c |avg_N(c) D_N(c) - 1|` by looping over centers and points.
fn naive_r1(points: &PointSet, diag: &[f64], n: usize) -> f64 {
    let l = points.torus().len();
    let mut worst = 0.0f64;
    for cx in 0..l as i64 {
        for cw in 0..l as i64 {
            let members: Vec<usize> = (0..points.len())
                .filter(|&i| {
                    let p = points.points()[i];
                    in_box(p.x, cx, n, l) && in_box(p.omega, cw, n, l)
                })
                .collect();
            if members.is_empty() {
                continue;
            }
            let avg = members.iter().map(|&i| diag[i]).sum::<f64>() / members.len() as f64;
            let density = l as f64 * members.len() as f64 / (n * n) as f64;
            worst = worst.max((avg * density - 1.0).abs());
        }
    }
    worst
}

type Oracle = fn() -> Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Result<String, String> {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn oracle_1() -> Result<String, String> {
    let t = torus(144);
    let g = gaussian_window(t);
    let points = PointSet::lattice_points(RefLattice::new(4, 6, t).unwrap(), t);
    let v = naive_elements(&g, &points);
    let s = naive_frame_operator(&v);
    let x = s.lu().solve(&v.column(0).into_owned()).unwrap();
    let value = v.column(0).dotc(&x);
    let err = (value - 1.0 / 6.0).norm();
    check(
        err < 1e-9,
        format!("LU <g, S^-1 g> - 1/6 = {err:.1e}"),
        format!("LU oracle off by {err:.3e}"),
    )
}

fn oracle_2() -> Result<String, String> {
    let t = torus(48);
    let base = PointSet::lattice_points(RefLattice::new(4, 6, t).unwrap(), t).jitter(0.5, 3);
    let sys = GaborSystem::new(gaussian_window(t), base.clone()).unwrap();
    let v = naive_elements(sys.window(), &base);
    let duals = lu_duals(&v);
    let diag: Vec<f64> = (0..v.ncols())
        .map(|i| duals.column(i).dotc(&v.column(i)).re)
        .collect();
    let data = sys.canonical_dual().unwrap();
    let mut worst = 0.0f64;
    for n in [12, 24, 48] {
        let lib = reciprocity_check(&sys, &data, n).unwrap().r1;
        worst = worst.max((lib - naive_r1(&base, &diag, n)).abs());
    }
    check(
        worst < 1e-9,
        format!("naive box loop agrees to {worst:.1e}"),
        format!("r1 mismatch {worst:.3e}"),
    )
}

fn oracle_3() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (label, sys) in suite::sandwich_matrix().unwrap() {
        let v = naive_elements(sys.window(), sys.points());
        let trace: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let [a, lo, hi, b] = suite::sandwich_terms(&sys).unwrap();
        let mean = trace / sys.torus().len() as f64;
        let rel = ((lo - mean) / mean).abs().max(((hi - mean) / mean).abs());
        worst = worst.max(rel);
        if !(a <= mean * (1.0 + 1e-12) && mean <= b * (1.0 + 1e-12)) {
            return Err(format!(
                "{label}: mean eigenvalue {mean} outside [{a}, {b}]"
            ));
        }
    }
    check(
        worst < 1e-12,
        format!("D ||g||^2 equals trace(S)/L to {worst:.1e}"),
        format!("trace mismatch {worst:.3e}"),
    )
}

fn oracle_4() -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in [8usize, 32, 64] {
        for radius in 0..n {
            let tail: f64 = (radius + 1..n)
                .map(|k| {
                    let z = Complex64::from_polar(
                        1.0 / (n as f64).sqrt(),
                        2.0 * PI * (k + 1) as f64 / n as f64,
                    );
                    z.norm_sqr()
                })
                .sum();
            worst = worst.max((tail - gabor_lab::counterexamples::harmonic_tail(n, radius)).abs());
        }
    }
    check(
        worst < 1e-12,
        format!("direct sums agree to {worst:.1e}"),
        format!("tail mismatch {worst:.3e}"),
    )
}

fn oracle_5() -> Result<String, String> {
    let mut worst = 0.0f64;
    for m in [16usize, 64, 256] {
        let eig = |j: usize, sign: f64| (1.0 + sign * (4.0 + j as f64).powf(-0.5)).powi(2);
        let lower = (1..=m).map(|j| eig(j, -1.0)).fold(f64::INFINITY, f64::min);
        let upper = (0..=m).map(|j| eig(j, 1.0)).fold(0.0, f64::max);
        let b = frame::dense_bounds(&perturbed_basis(m).system.vectors);
        worst = worst
            .max((b.lower - lower).abs())
            .max((b.upper - upper).abs());
    }
    check(
        worst < 1e-10,
        format!("2x2 block closed form agrees to {worst:.1e}, A = (1 - 5^-1/2)^2"),
        format!("bounds mismatch {worst:.3e}"),
    )
}

fn oracle_6() -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in [4usize, 16, 64] {
        let v = ((n - 1) as f64 / (4 * n) as f64).sqrt();
        let root = (v * v + 4.0).sqrt();
        let (lo, hi) = column_not_row_riesz_bounds(n);
        worst = worst
            .max((lo - (root - v) / 2.0).abs())
            .max((hi - (root + v) / 2.0).abs());
        let pair = column_not_row_pair(n);
        worst = worst.max((pair.localization().row_tail(2.0, 2) - v * v).abs());
    }
    check(
        worst < 1e-12,
        format!("singular values (sqrt(v^2+4) +/- v)/2 and tail v^2 agree to {worst:.1e}"),
        format!("mismatch {worst:.3e}"),
    )
}

fn oracle_7() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = rng.random_range(2..=40);
        let (kf, ke) = (rng.random_range(1..=60), rng.random_range(1..=60));
        let mut random = |k: usize| {
            CMatrix::from_fn(d, k, |_, _| {
                if rng.random_bool(0.3) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }
            })
        };
        let (f, e) = (random(kf), random(ke));
        let naive = CMatrix::from_fn(kf, ke, |i, j| {
            (0..d).map(|r| f[(r, i)] * e[(r, j)].conj()).sum()
        });
        worst = worst.max(
            (frame::cross_gram(&f, &e) - naive)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
    }
    check(
        worst < 1e-12,
        format!("sparse cross-Gram matches naive loops to {worst:.1e}"),
        format!("Gram mismatch {worst:.3e}"),
    )
}

fn oracle_8() -> Result<String, String> {
    let t = torus(16);
    let points = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t);
    let v = naive_elements(&WindowKind::Box { width: 4 }.build(t).unwrap(), &points);
    let duals = lu_duals(&v);
    let diag: Vec<f64> = (0..v.ncols())
        .map(|i| duals.column(i).dotc(&v.column(i)).re)
        .collect();
    let worst = diag.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
    check(
        worst < 1e-12,
        format!("LU duals give <g, g~> = 1 to {worst:.1e}"),
        format!("diag off by {worst:.3e}"),
    )
}

fn oracle_9() -> Result<String, String> {
    let s_of = |l: usize, a: usize, b: usize| {
        let t = torus(l);
        let points = PointSet::lattice_points(RefLattice::new(a, b, t).unwrap(), t);
        naive_frame_operator(&naive_elements(&gaussian_window(t), &points))
    };
    for (l, a, b) in [(32, 4, 8), (64, 8, 8), (128, 8, 16)] {
        let s = s_of(l, a, b);
        let upper = s.iter().map(|z| z.norm()).sum::<f64>();
        if above(&s, 1e-10 * upper / l as f64) {
            return Err(format!(
                "L={l} {a}x{b}: Cholesky certifies a positive lower bound"
            ));
        }
    }
    let s = s_of(64, 4, 8);
    let b = frame::dense_bounds(&s);
    let a = frame::hermitian_eigen(&s)
        .0
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    check(
        above(&s, 0.99 * a) && !above(&s, 1.01 * a) && b.upper / a < 20.0,
        format!("Cholesky brackets: critical S singular at L=32,64,128; L=64 4x8 A = {a:.4}"),
        "Cholesky bracket disagrees with the eigenvalue bound".into(),
    )
}

fn oracle_10() -> Result<String, String> {
    let t = torus(96);
    let points = PointSet::lattice_points(RefLattice::new(4, 6, t).unwrap(), t).jitter(0.5, 1);
    let sys = GaborSystem::new(gaussian_window(t), points.clone()).unwrap();
    let data = sys.canonical_dual().unwrap();
    let gamma = gaussian_window(t);
    let env = molecule_envelope(&data.duals, &points, &gamma).unwrap();
    let l = 96;
    let g = gamma.samples();
    let grid = points.grid_positions();
    let mut worst = f64::NEG_INFINITY;
    for i in [0usize, 101, 250, 383] {
        let f = data.duals.column(i);
        let (px, pw) = grid[i];
        for x in (0..l).step_by(3) {
            for w in 0..l {
                let v: Complex64 = (0..l)
                    .map(|n| {
                        f[n] * (g[(n + l - x) % l]
                            * Complex64::from_polar(
                                1.0,
                                2.0 * PI * ((w * n) % l) as f64 / l as f64,
                            ))
                        .conj()
                    })
                    .sum();
                worst = worst.max(v.norm() - env.grid.get((x + l - px) % l, (w + l - pw) % l));
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("naive STFT of sampled duals stays under the envelope (margin {worst:.1e})"),
        format!("naive STFT exceeds the envelope by {worst:.3e}"),
    )
}

fn oracle_11() -> Result<String, String> {
    let t = torus(144);
    let sys = GaborSystem::lattice(gaussian_window(t), RefLattice::new(4, 6, t).unwrap());
    let a = sys.frame_bounds(BoundsMethod::Dense).unwrap().lower;
    let cell = RefLattice::new(12, 12, t).unwrap();
    let strategy = RemovalStrategy::PerCell {
        fraction: 1.0 / 6.0,
        cell,
        seed: 1,
    };
    let (survivors, removed) = sys.remove_subset(&strategy).unwrap();
    let mut per_cell = std::collections::BTreeMap::new();
    for p in removed.points() {
        *per_cell
            .entry(((p.x / 12.0).floor() as i64, (p.omega / 12.0).floor() as i64))
            .or_insert(0) += 1;
    }
    let one_each = per_cell.len() == 144 && per_cell.values().all(|&c| c == 1);
    let s = naive_frame_operator(&naive_elements(survivors.window(), survivors.points()));
    check(
        one_each && above(&s, 0.1 * a),
        "one point removed from each of 144 cells; Cholesky certifies A' > 0.1 A".into(),
        format!("per-cell removal ok: {one_each}; certificate failed"),
    )
}

fn oracle_12() -> Result<String, String> {
    let m = 8;
    let ex = double_index_example(m);
    let p = ex.period as i64;
    let n = 2 * m;
    let mut worst = 0.0f64;
    for c in 0..p {
        let members = ex
            .pair
            .system
            .sites
            .iter()
            .filter(|s| (s[0] - c + (n / 2) as i64).rem_euclid(p) < n as i64)
            .count();
        worst = worst.max((members as f64 / n as f64 - 2.0).abs());
    }
    check(
        worst == 0.0,
        format!("direct count gives density 2 at all {p} centers"),
        format!("density off by {worst}"),
    )
}

const ORACLES: [Oracle; 12] = [
    oracle_1, oracle_2, oracle_3, oracle_4, oracle_5, oracle_6, oracle_7, oracle_8, oracle_9,
    oracle_10, oracle_11, oracle_12,
];

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for id in 1..=suite::CRITERIA {
        let start = Instant::now();
        let outcome = suite::run(id);
        let elapsed = start.elapsed().as_secs_f64();
        let oracle = ORACLES[id - 1]();
        match outcome {
            Ok(mut r) => {
                if let Some(&(_, limit)) = LIMITS.iter().find(|(i, _)| *i == id) {
                    if elapsed > limit {
                        r.pass = false;
                        r.detail.push_str(&format!(" [over the {limit}s limit]"));
                    }
                }
                println!("{} [{elapsed:.1}s]", r.line());
                if !r.pass && !KNOWN_UNMET.contains(&id) {
                    unexpected.push(format!("criterion {id} failed"));
                }
            }
            Err(e) => {
                println!(
                    "criterion {id:>2} FAIL {:<28} error: {e}",
                    suite::criterion_name(id)
                );
                unexpected.push(format!("criterion {id} errored: {e}"));
            }
        }
        match oracle {
            Ok(msg) => println!("             oracle ok: {msg}"),
            Err(msg) => {
                println!("             oracle FAILED: {msg}");
                unexpected.push(format!("criterion {id} oracle: {msg}"));
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: only the known-unmet criteria {KNOWN_UNMET:?} fail");
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
