//! Relative measure: box averages of `<g_λ, g̃_λ>` and their reciprocity
//! with the finite-box densities of the point set.
//!
//! The discrete averaging identity uses the normaliser `L / N^2`, the same
//! one as [`PointSet::box_stats`], so that for a lattice frame
//! `(L / N^2) * sum_{λ ∈ Q_N(c)} <g_λ, g̃_λ> = 1` exactly when `N = L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::CMatrix;
use crate::gabor::{FrameData, GaborSystem};
use crate::geometry::{Geometry, Site};
use crate::localization::IndexedFamily;
use crate::pointset::{periodic_box_sums, RefLattice, TorusParams};

/// Imaginary parts of `<g_λ, g̃_λ>` above this trigger a solver warning.
pub const IMAGINARY_WARNING: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Centers {
    /// Every integer point of the torus.
    IntegerGrid,
    /// The points of a reference lattice.
    Lattice(RefLattice),
    /// Explicit centers (a "sequence of centers" experiment).
    List(Vec<Site>),
}

impl Centers {
    pub fn resolve(&self, torus: TorusParams) -> Result<Vec<Site>> {
        let l = torus.len() as i64;
        Ok(match self {
            Centers::IntegerGrid => (0..l).flat_map(|x| (0..l).map(move |w| [x, w])).collect(),
            Centers::Lattice(lat) => {
                RefLattice::new(lat.a_step(), lat.b_step(), torus)?.sites(torus)
            }
            Centers::List(v) => v
                .iter()
                .map(|c| [c[0].rem_euclid(l), c[1].rem_euclid(l)])
                .collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub n: usize,
    pub center: Site,
    pub count: usize,
    pub avg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureLevel {
    pub n: usize,
    pub minus: f64,
    pub plus: f64,
    /// Centers whose box holds no point.
    pub skipped: Vec<Site>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    pub rows: Vec<MeasureRow>,
    pub levels: Vec<MeasureLevel>,
    pub warnings: Vec<String>,
}

impl MeasureProfile {
    pub fn level(&self, n: usize) -> Option<&MeasureLevel> {
        self.levels.iter().find(|lv| lv.n == n)
    }

    /// CSV with header `N,center_x,center_w,avg` (nonempty boxes only).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,center_x,center_w,avg\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.16e}\n",
                r.n, r.center[0], r.center[1], r.avg
            ));
        }
        out
    }
}

/// Per-center box sums of `Re <g_λ, g̃_λ>` and box counts, for every integer center.
struct BoxAverages {
    l: usize,
    sums: Vec<f64>,
    counts: Vec<f64>,
}

impl BoxAverages {
    fn new(sys: &GaborSystem, diagonal: &[f64], n: usize) -> Result<Self> {
        let torus = sys.torus();
        torus.check_box(n)?;
        let l = torus.len();
        let mut weights = vec![0.0; l * l];
        let mut ones = vec![0.0; l * l];
        for (cell, d) in sys.points().floor_cells().into_iter().zip(diagonal) {
            weights[cell] += d;
            ones[cell] += 1.0;
        }
        Ok(Self {
            l,
            sums: periodic_box_sums(&weights, l, n),
            counts: periodic_box_sums(&ones, l, n),
        })
    }

    fn index(&self, c: Site) -> usize {
        (c[0] as usize) * self.l + c[1] as usize
    }
}

fn real_diagonal(
    sys: &GaborSystem,
    data: &FrameData,
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    if data.duals.ncols() != sys.len() || data.duals.nrows() != sys.torus().len() {
        return Err(Error::LengthMismatch {
            expected: sys.len(),
            got: data.duals.ncols(),
        });
    }
    let diag = data.diagonal(&sys.elements());
    let worst = diag.iter().map(|d| d.im.abs()).fold(0.0, f64::max);
    if worst > IMAGINARY_WARNING {
        warnings.push(format!(
            "imaginary residue {worst:e} in <g, dual g>: dual solve quality is poor"
        ));
    }
    Ok(diag.iter().map(|d| d.re).collect())
}

/// Box averages of `<g_λ, g̃_λ>` over `Λ ∩ Q_N(c)` for every requested side and center.
pub fn measure_profile(
    sys: &GaborSystem,
    data: &FrameData,
    ns: &[usize],
    centers: &Centers,
) -> Result<MeasureProfile> {
    let mut profile = MeasureProfile::default();
    let diagonal = real_diagonal(sys, data, &mut profile.warnings)?;
    let centers = centers.resolve(sys.torus())?;
    let mut any = false;
    for &n in ns {
        let boxes = BoxAverages::new(sys, &diagonal, n)?;
        let mut level = MeasureLevel {
            n,
            minus: f64::INFINITY,
            plus: f64::NEG_INFINITY,
            skipped: Vec::new(),
        };
        for &c in &centers {
            let idx = boxes.index(c);
            let count = boxes.counts[idx];
            if count == 0.0 {
                level.skipped.push(c);
                continue;
            }
            let avg = boxes.sums[idx] / count;
            level.minus = level.minus.min(avg);
            level.plus = level.plus.max(avg);
            profile.rows.push(MeasureRow {
                n,
                center: c,
                count: count as usize,
                avg,
            });
            any = true;
        }
        profile.levels.push(level);
    }
    if !any {
        return Err(Error::EmptyBoxes);
    }
    Ok(profile)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reciprocity {
    pub n: usize,
    /// `max_c |avg_N(c) D_N(c) - 1|` over centers with nonempty boxes.
    pub r1: f64,
    /// `max_c |(L / N^2) sum_{λ ∈ Q_N(c)} <g_λ, g̃_λ> - 1|` over every center.
    pub r2: f64,
}

/// Both residual forms of the density-measure reciprocity at box side `n`.
pub fn reciprocity_check(sys: &GaborSystem, data: &FrameData, n: usize) -> Result<Reciprocity> {
    if !data.bounds.is_frame() {
        return Err(Error::NotAFrame {
            lower: data.bounds.lower,
            upper: data.bounds.upper,
        });
    }
    let diagonal = real_diagonal(sys, data, &mut Vec::new())?;
    let boxes = BoxAverages::new(sys, &diagonal, n)?;
    let scale = sys.torus().len() as f64 / (n * n) as f64;
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for (&sum, &count) in boxes.sums.iter().zip(&boxes.counts) {
        if count > 0.0 {
            let avg = sum / count;
            let density = scale * count;
            r1 = r1.max((avg * density - 1.0).abs());
        }
        r2 = r2.max((scale * sum - 1.0).abs());
    }
    Ok(Reciprocity { n, r1, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDensityLevel {
    pub n: usize,
    pub measure_minus: f64,
    pub measure_plus: f64,
    pub density_minus: f64,
    pub density_plus: f64,
    /// `M^-_N D^+_N`.
    pub lower_product: f64,
    /// `M^+_N D^-_N`.
    pub upper_product: f64,
    /// Distance of both products from 1.
    pub tau: f64,
}

/// Compares `M^∓_N` with `1 / D^±_N` over all integer centers.
pub fn measure_density_bounds_check(
    sys: &GaborSystem,
    data: &FrameData,
    ns: &[usize],
) -> Result<Vec<MeasureDensityLevel>> {
    let profile = measure_profile(sys, data, ns, &Centers::IntegerGrid)?;
    ns.iter()
        .map(|&n| {
            let level = profile.level(n).expect("every side has a level");
            let d = sys.points().density_bounds(n)?;
            let lower_product = level.minus * d.plus;
            let upper_product = level.plus * d.minus;
            Ok(MeasureDensityLevel {
                n,
                measure_minus: level.minus,
                measure_plus: level.plus,
                density_minus: d.minus,
                density_plus: d.plus,
                lower_product,
                upper_product,
                tau: (lower_product - 1.0).abs().max((upper_product - 1.0).abs()),
            })
        })
        .collect()
}

/// `(1 / |I_N(c)|) sum_{i ∈ I_N(c)} Re <P f_i, f̃_i>` for each center (None on empty boxes).
///
/// `projection` is the orthogonal projection onto the span of a second
/// family; `None` means the identity.
pub fn relative_measure(
    family: &IndexedFamily,
    duals: &CMatrix,
    projection: Option<&CMatrix>,
    geometry: Geometry,
    n: usize,
    centers: &[Site],
) -> Vec<Option<f64>> {
    let projected = projection.map(|p| p * &family.vectors);
    let vectors = projected.as_ref().unwrap_or(&family.vectors);
    let diag: Vec<f64> = (0..family.len())
        .map(|i| duals.column(i).dotc(&vectors.column(i)).re)
        .collect();
    centers
        .iter()
        .map(|&c| {
            let members: Vec<usize> = (0..family.len())
                .filter(|&i| geometry.in_box_around(family.sites[i], c, n))
                .collect();
            if members.is_empty() {
                None
            } else {
                Some(members.iter().map(|&i| diag[i]).sum::<f64>() / members.len() as f64)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::PointSet;
    use crate::signal::{box_window, gaussian_window};
    use num_complex::Complex64;

    fn torus(l: usize) -> TorusParams {
        TorusParams::new(l).unwrap()
    }

    #[test]
    fn riesz_basis_measure_is_one() {
        let t = torus(16);
        let sys =
            GaborSystem::lattice(box_window(t, 4).unwrap(), RefLattice::new(4, 4, t).unwrap());
        let data = sys.canonical_dual().unwrap();
        let prof = measure_profile(&sys, &data, &[4, 8, 16], &Centers::IntegerGrid).unwrap();
        assert!(prof.rows.iter().all(|r| (r.avg - 1.0).abs() < 1e-9));
        let rec = reciprocity_check(&sys, &data, 16).unwrap();
        assert!(rec.r1 < 1e-9 && rec.r2 < 1e-9);
    }

    #[test]
    fn lattice_measure_and_reciprocity() {
        let t = torus(48);
        let sys = GaborSystem::lattice(gaussian_window(t), RefLattice::new(4, 6, t).unwrap());
        let data = sys.canonical_dual().unwrap();
        let prof = measure_profile(&sys, &data, &[12, 24, 48], &Centers::IntegerGrid).unwrap();
        for r in &prof.rows {
            assert!((r.avg - 0.5).abs() < 1e-9);
        }
        let rec = reciprocity_check(&sys, &data, 48).unwrap();
        assert!(rec.r1 < 1e-9 && (rec.r1 - rec.r2).abs() < 1e-12);
        let check = measure_density_bounds_check(&sys, &data, &[48]).unwrap();
        assert!(check[0].tau < 1e-9);
    }

    #[test]
    fn empty_boxes_are_skipped() {
        let t = torus(16);
        let sys =
            GaborSystem::lattice(box_window(t, 4).unwrap(), RefLattice::new(4, 4, t).unwrap());
        let data = sys.canonical_dual().unwrap();
        // box side 2 around (2, 2) holds no lattice point
        let prof =
            measure_profile(&sys, &data, &[2], &Centers::List(vec![[0, 0], [2, 2]])).unwrap();
        assert_eq!(prof.rows.len(), 1);
        assert_eq!(prof.levels[0].skipped, vec![[2, 2]]);
        assert!(matches!(
            measure_profile(&sys, &data, &[2], &Centers::List(vec![[2, 2]])),
            Err(Error::EmptyBoxes)
        ));
    }

    #[test]
    fn global_phase_invariance() {
        let t = torus(32);
        let ps = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t).jitter(1.0, 3);
        let g = gaussian_window(t);
        let a = GaborSystem::new(g.clone(), ps.clone()).unwrap();
        let b = GaborSystem::new(g.scale(Complex64::from_polar(1.0, 0.7)), ps).unwrap();
        let pa = measure_profile(
            &a,
            &a.canonical_dual().unwrap(),
            &[8, 16],
            &Centers::IntegerGrid,
        )
        .unwrap();
        let pb = measure_profile(
            &b,
            &b.canonical_dual().unwrap(),
            &[8, 16],
            &Centers::IntegerGrid,
        )
        .unwrap();
        for (x, y) in pa.rows.iter().zip(&pb.rows) {
            assert!((x.avg - y.avg).abs() < 1e-12);
        }
        assert!(pa.rows.iter().all(|r| r.avg >= 0.0 && r.avg <= 1.0));
    }

    #[test]
    fn csv_header() {
        assert!(MeasureProfile::default()
            .to_csv()
            .starts_with("N,center_x,center_w,avg\n"));
    }
}
