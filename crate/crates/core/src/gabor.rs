//! Gabor systems `G(g, Λ) = {M_ω T_x g}` over arbitrary point multisets.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, CMatrix, CVector, FrameBounds, IterativeOptions};
use crate::pointset::{PointSet, RefLattice, TorusParams};
use crate::signal::{self, Signal};

/// Largest `L` for which dense eigen-decompositions are used.
pub const DENSE_MAX_L: usize = 512;

/// Residual bound for dual solves, relative to `||g_λ||`.
pub const DUAL_RESIDUAL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GaborSystem {
    window: Signal,
    points: PointSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundsMethod {
    Dense,
    Iterative(IterativeOptions),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DualMethod {
    /// One eigen-decomposition of `S`, shared by every element.
    Dense,
    /// Matrix-free conjugate gradient per element.
    ConjugateGradient(IterativeOptions),
}

/// Frame bounds plus canonical dual (and optionally Parseval) elements as matrix columns.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub bounds: FrameBounds,
    pub duals: CMatrix,
    pub parseval: Option<CMatrix>,
}

impl FrameData {
    pub fn dual(&self, i: usize, torus: TorusParams) -> Signal {
        Signal::new(torus, self.duals.column(i).iter().copied().collect())
            .expect("column length is L")
    }

    /// `<g_λ, g̃_λ>` for every λ.
    pub fn diagonal(&self, elements: &CMatrix) -> Vec<Complex64> {
        (0..elements.ncols())
            .map(|i| self.duals.column(i).dotc(&elements.column(i)))
            .collect()
    }

    /// `sum_λ <f, g_λ> g̃_λ`.
    pub fn reconstruct(&self, elements: &CMatrix, f: &Signal) -> Signal {
        let v = CVector::from_column_slice(f.samples());
        let coeffs = elements.adjoint() * v;
        let out = &self.duals * coeffs;
        Signal::new(f.torus(), out.iter().copied().collect()).expect("length L")
    }
}

/// How `remove_subset` picks the points to drop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RemovalStrategy {
    /// Drop each point independently with probability `fraction`.
    RandomThinning { fraction: f64, seed: u64 },
    /// In every cell of the superlattice `cell`, drop `round(fraction * m)` of its `m` points.
    PerCell {
        fraction: f64,
        cell: RefLattice,
        seed: u64,
    },
    /// Drop exactly these indices.
    Explicit(Vec<usize>),
}

impl GaborSystem {
    pub fn new(window: Signal, points: PointSet) -> Result<Self> {
        if window.torus() != points.torus() {
            return Err(Error::LengthMismatch {
                expected: points.torus().len(),
                got: window.len(),
            });
        }
        Ok(Self { window, points })
    }

    pub fn lattice(window: Signal, lat: RefLattice) -> Self {
        let points = PointSet::lattice_points(lat, window.torus());
        Self { window, points }
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn torus(&self) -> TorusParams {
        self.window.torus()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn element(&self, i: usize) -> Signal {
        let p = self.points.points()[i];
        signal::tf_shift(&self.window, p.x, p.omega)
    }

    /// All elements `g_λ` as the columns of an `L x |Λ|` matrix.
    pub fn elements(&self) -> CMatrix {
        let l = self.torus().len();
        let grid = self.points.grid_positions();
        let columns: Vec<Vec<Complex64>> = grid
            .par_iter()
            .map(|&(x, w)| {
                let mut col = vec![Complex64::new(0.0, 0.0); l];
                signal::tf_shift_into(self.window.samples(), x, w, &mut col);
                col
            })
            .collect();
        CMatrix::from_fn(l, columns.len(), |r, c| columns[c][r])
    }

    /// `<f, g_λ>` for every λ.
    pub fn analysis(&self, f: &Signal) -> Result<Vec<Complex64>> {
        self.check_signal(f)?;
        let v = CVector::from_column_slice(f.samples());
        Ok((self.elements().adjoint() * v).iter().copied().collect())
    }

    /// `sum_λ c_λ g_λ`.
    pub fn synthesis(&self, coeffs: &[Complex64]) -> Result<Signal> {
        if coeffs.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        let out = self.elements() * CVector::from_column_slice(coeffs);
        Signal::new(self.torus(), out.iter().copied().collect())
    }

    pub fn apply_frame_operator(&self, f: &Signal) -> Result<Signal> {
        self.synthesis(&self.analysis(f)?)
    }

    pub fn frame_operator(&self) -> CMatrix {
        frame::frame_operator(&self.elements())
    }

    pub fn frame_bounds(&self, method: BoundsMethod) -> Result<FrameBounds> {
        let l = self.torus().len();
        match method {
            BoundsMethod::Dense => {
                if l > DENSE_MAX_L {
                    return Err(Error::TooLargeForDense {
                        l,
                        max: DENSE_MAX_L,
                    });
                }
                Ok(frame::dense_bounds(&self.elements()))
            }
            BoundsMethod::Iterative(opts) => {
                if self.is_empty() {
                    return Ok(FrameBounds {
                        lower: 0.0,
                        upper: 0.0,
                    });
                }
                let v = self.elements();
                let vh = v.adjoint();
                frame::iterative_bounds(|x: &CVector| &v * (&vh * x), l, &opts)
            }
        }
    }

    /// Canonical dual by the default route (dense up to [`DENSE_MAX_L`]).
    pub fn canonical_dual(&self) -> Result<FrameData> {
        if self.torus().len() <= DENSE_MAX_L {
            self.canonical_dual_with(DualMethod::Dense)
        } else {
            self.canonical_dual_with(DualMethod::ConjugateGradient(IterativeOptions {
                tolerance: 1e-11,
                ..Default::default()
            }))
        }
    }

    pub fn canonical_dual_with(&self, method: DualMethod) -> Result<FrameData> {
        let v = self.elements();
        let (bounds, duals) = match method {
            DualMethod::Dense => {
                let bounds = self.frame_bounds(BoundsMethod::Dense)?;
                require_frame(bounds)?;
                let s = frame::frame_operator(&v);
                let inv = frame::hermitian_function(&s, |x| 1.0 / x);
                (bounds, inv * &v)
            }
            DualMethod::ConjugateGradient(opts) => {
                let bounds = self.frame_bounds(BoundsMethod::Iterative(opts))?;
                require_frame(bounds)?;
                let vh = v.adjoint();
                let apply = |x: &CVector| &v * (&vh * x);
                let cols: Vec<CVector> = (0..v.ncols())
                    .into_par_iter()
                    .map(|i| frame::conjugate_gradient(apply, &v.column(i).into_owned(), &opts))
                    .collect::<Result<_>>()?;
                (bounds, CMatrix::from_columns(&cols))
            }
        };
        let s = frame::frame_operator(&v);
        let residual = &s * &duals - &v;
        for i in 0..v.ncols() {
            let r = residual.column(i).norm();
            let scale = v.column(i).norm();
            if r > DUAL_RESIDUAL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    ritz: vec![r / scale],
                });
            }
        }
        Ok(FrameData {
            bounds,
            duals,
            parseval: None,
        })
    }

    /// Canonical Parseval frame `S^{-1/2} g_λ` (columns).
    pub fn parseval(&self) -> Result<CMatrix> {
        let bounds = self.frame_bounds(BoundsMethod::Dense)?;
        require_frame(bounds)?;
        let v = self.elements();
        let s = frame::frame_operator(&v);
        Ok(frame::hermitian_function(&s, |x| 1.0 / x.sqrt()) * v)
    }

    /// Canonical dual with the Parseval frame filled in.
    pub fn frame_data_with_parseval(&self) -> Result<FrameData> {
        let mut data = self.canonical_dual_with(DualMethod::Dense)?;
        data.parseval = Some(self.parseval()?);
        Ok(data)
    }

    /// The system restricted to the indices for which `keep` is true.
    pub fn subsystem(&self, keep: impl FnMut(usize) -> bool) -> GaborSystem {
        GaborSystem {
            window: self.window.clone(),
            points: self.points.filter_indices(keep),
        }
    }

    /// Remove a subset of points; returns the survivors and the removed points.
    pub fn remove_subset(&self, strategy: &RemovalStrategy) -> Result<(GaborSystem, PointSet)> {
        let n = self.len();
        let mut removed = vec![false; n];
        match strategy {
            RemovalStrategy::RandomThinning { fraction, seed } => {
                check_fraction(*fraction)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for r in removed.iter_mut() {
                    *r = rng.random_bool(*fraction);
                }
            }
            RemovalStrategy::PerCell {
                fraction,
                cell,
                seed,
            } => {
                check_fraction(*fraction)?;
                let cell = RefLattice::new(cell.a_step(), cell.b_step(), self.torus())?;
                let mut groups: BTreeMap<[i64; 2], Vec<usize>> = BTreeMap::new();
                for (i, site) in self.points.round_map(cell).into_iter().enumerate() {
                    groups.entry(site).or_default().push(i);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for members in groups.values_mut() {
                    let k = (fraction * members.len() as f64).round() as usize;
                    members.shuffle(&mut rng);
                    for &i in members.iter().take(k) {
                        removed[i] = true;
                    }
                }
            }
            RemovalStrategy::Explicit(indices) => {
                for &i in indices {
                    if i >= n {
                        return Err(Error::OutOfRange(format!("index {i} >= {n}")));
                    }
                    removed[i] = true;
                }
            }
        }
        let survivors = self.subsystem(|i| !removed[i]);
        let gone = self.points.filter_indices(|i| removed[i]);
        Ok((survivors, gone))
    }

    fn check_signal(&self, f: &Signal) -> Result<()> {
        if f.len() != self.torus().len() {
            return Err(Error::LengthMismatch {
                expected: self.torus().len(),
                got: f.len(),
            });
        }
        Ok(())
    }
}

fn require_frame(bounds: FrameBounds) -> Result<()> {
    if !bounds.is_frame() {
        return Err(Error::NotAFrame {
            lower: bounds.lower,
            upper: bounds.upper,
        });
    }
    Ok(())
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidFraction(fraction));
    }
    Ok(())
}

/// Entry `(i, j) = <f_i, e_j>` for two lists of signals.
pub fn cross_gram(f: &[Signal], e: &[Signal]) -> Result<CMatrix> {
    let to_matrix = |s: &[Signal]| -> Result<CMatrix> {
        let l = s.first().map(Signal::len).unwrap_or(0);
        if let Some(bad) = s.iter().find(|x| x.len() != l) {
            return Err(Error::LengthMismatch {
                expected: l,
                got: bad.len(),
            });
        }
        Ok(CMatrix::from_fn(l, s.len(), |r, c| s[c].samples()[r]))
    };
    let (fm, em) = (to_matrix(f)?, to_matrix(e)?);
    if !f.is_empty() && !e.is_empty() && fm.nrows() != em.nrows() {
        return Err(Error::LengthMismatch {
            expected: fm.nrows(),
            got: em.nrows(),
        });
    }
    Ok(frame::cross_gram(&fm, &em))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::TfPoint;
    use crate::signal::{box_window, gaussian_window};

    fn torus(l: usize) -> TorusParams {
        TorusParams::new(l).unwrap()
    }

    fn random_signal(t: TorusParams, seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Signal::new(
            t,
            (0..t.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_element_analysis() {
        let t = torus(16);
        let g = gaussian_window(t);
        let sys = GaborSystem::new(g.clone(), PointSet::new(t, [TfPoint::new(0.0, 0.0)])).unwrap();
        let c = sys.analysis(&g).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn analysis_synthesis_adjoint() {
        let t = torus(16);
        let points = PointSet::new(
            t,
            (0..40).map(|i| TfPoint::new(i as f64 * 2.3, i as f64 * 5.1)),
        );
        let sys = GaborSystem::new(gaussian_window(t), points).unwrap();
        let f = random_signal(t, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c: Vec<Complex64> = (0..40)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let lhs: Complex64 = sys
            .analysis(&f)
            .unwrap()
            .iter()
            .zip(&c)
            .map(|(a, b)| a * b.conj())
            .sum();
        let rhs = f.inner(&sys.synthesis(&c).unwrap());
        assert!((lhs - rhs).norm() < 1e-10);
        let sf = sys.apply_frame_operator(&f).unwrap();
        let dense = sys.frame_operator() * CVector::from_column_slice(f.samples());
        for (a, b) in sf.samples().iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(sys.synthesis(&c[..3]).is_err());
    }

    #[test]
    fn orthonormal_box_basis() {
        let t = torus(16);
        let sys =
            GaborSystem::lattice(box_window(t, 4).unwrap(), RefLattice::new(4, 4, t).unwrap());
        let b = sys.frame_bounds(BoundsMethod::Dense).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        let data = sys.canonical_dual().unwrap();
        let v = sys.elements();
        let bi = v.adjoint() * &data.duals;
        assert!((bi - CMatrix::identity(16, 16)).norm() < 1e-10);
    }

    #[test]
    fn empty_and_union_bounds() {
        let t = torus(16);
        let empty = GaborSystem::new(gaussian_window(t), PointSet::empty(t)).unwrap();
        assert_eq!(
            empty.frame_bounds(BoundsMethod::Dense).unwrap(),
            FrameBounds {
                lower: 0.0,
                upper: 0.0
            }
        );
        assert!(matches!(
            empty.canonical_dual(),
            Err(Error::NotAFrame { .. })
        ));

        let onb = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t);
        let doubled = GaborSystem::new(
            box_window(t, 4).unwrap(),
            onb.union(&onb.translate(4.0, 8.0)).unwrap(),
        )
        .unwrap();
        let b = doubled.frame_bounds(BoundsMethod::Dense).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-12 && (b.upper - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tight_dual_is_scaled() {
        let t = torus(16);
        let onb = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t);
        let sys = GaborSystem::new(box_window(t, 4).unwrap(), onb.union(&onb).unwrap()).unwrap();
        let data = sys.canonical_dual().unwrap();
        let v = sys.elements();
        assert!((&data.duals - &v * Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn wexler_raz_small_lattice() {
        let t = torus(48);
        let lat = RefLattice::new(4, 6, t).unwrap();
        let sys = GaborSystem::lattice(gaussian_window(t), lat);
        let data = sys.canonical_dual().unwrap();
        let diag = data.diagonal(&sys.elements());
        for d in diag {
            assert!((d.re - 24.0 / 48.0).abs() < 1e-10, "{d}");
            assert!(d.im.abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_and_parseval() {
        let t = torus(32);
        let ps = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t).jitter(1.3, 9);
        let sys = GaborSystem::new(gaussian_window(t), ps).unwrap();
        let data = sys.frame_data_with_parseval().unwrap();
        let v = sys.elements();
        let f = random_signal(t, 3);
        let rec = data.reconstruct(&v, &f);
        for (a, b) in rec.samples().iter().zip(f.samples()) {
            assert!((a - b).norm() < 1e-8);
        }
        let p = data.parseval.as_ref().unwrap();
        let pb = frame::dense_bounds(p);
        assert!((pb.lower - 1.0).abs() < 1e-8 && (pb.upper - 1.0).abs() < 1e-8);
        for (i, d) in data.diagonal(&v).iter().enumerate() {
            assert!((d.re - p.column(i).norm_squared()).abs() < 1e-9);
            assert!(d.re >= -1e-12 && d.re <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn cg_dual_agrees_with_dense() {
        let t = torus(32);
        let ps = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t).jitter(1.0, 4);
        let sys = GaborSystem::new(gaussian_window(t), ps).unwrap();
        let dense = sys.canonical_dual_with(DualMethod::Dense).unwrap();
        let cg = sys
            .canonical_dual_with(DualMethod::ConjugateGradient(IterativeOptions {
                tolerance: 1e-12,
                ..Default::default()
            }))
            .unwrap();
        assert!((&dense.duals - &cg.duals).norm() < 1e-8 * dense.duals.norm());
        assert!((dense.bounds.lower - cg.bounds.lower).abs() < 1e-6 * dense.bounds.upper);
    }

    #[test]
    fn dense_limit_enforced() {
        let t = torus(520);
        let sys = GaborSystem::new(gaussian_window(t), PointSet::empty(t)).unwrap();
        assert!(matches!(
            sys.frame_bounds(BoundsMethod::Dense),
            Err(Error::TooLargeForDense { .. })
        ));
    }

    #[test]
    fn removal_strategies() {
        let t = torus(48);
        let lat = RefLattice::new(4, 6, t).unwrap();
        let sys = GaborSystem::lattice(gaussian_window(t), lat);
        let (same, gone) = sys
            .remove_subset(&RemovalStrategy::Explicit(vec![]))
            .unwrap();
        assert_eq!(same, sys);
        assert!(gone.is_empty());

        let cell = RefLattice::new(8, 18, t);
        assert!(cell.is_err(), "18 does not divide 48");
        let cell = RefLattice::new(8, 12, t).unwrap();
        let (survivors, removed) = sys
            .remove_subset(&RemovalStrategy::PerCell {
                fraction: 0.25,
                cell,
                seed: 1,
            })
            .unwrap();
        assert_eq!(removed.len(), sys.len() / 4);
        assert_eq!(survivors.len() + removed.len(), sys.len());
        // one removed point per cell
        let mut per_cell = BTreeMap::new();
        for s in removed.round_map(cell) {
            *per_cell.entry(s).or_insert(0) += 1;
        }
        assert!(per_cell.values().all(|&c| c == 1));
        assert_eq!(per_cell.len(), (48 / 8) * (48 / 12));

        assert!(matches!(
            sys.remove_subset(&RemovalStrategy::RandomThinning {
                fraction: 1.0,
                seed: 0
            }),
            Err(Error::InvalidFraction(_))
        ));
        let all: Vec<usize> = (0..sys.len()).collect();
        let (nothing, _) = sys.remove_subset(&RemovalStrategy::Explicit(all)).unwrap();
        assert_eq!(
            nothing.frame_bounds(BoundsMethod::Dense).unwrap(),
            FrameBounds {
                lower: 0.0,
                upper: 0.0
            }
        );
    }

    #[test]
    fn cross_gram_of_signals() {
        let t = torus(16);
        let onb: Vec<Signal> = (0..16).map(|k| Signal::impulse(t, k)).collect();
        let g = cross_gram(&onb, &onb).unwrap();
        assert!((g - CMatrix::identity(16, 16)).norm() < 1e-15);
        let f: Vec<Signal> = (0..3).map(|s| random_signal(t, s)).collect();
        let e: Vec<Signal> = (3..7).map(|s| random_signal(t, s)).collect();
        let fe = cross_gram(&f, &e).unwrap();
        let ef = cross_gram(&e, &f).unwrap();
        assert!((fe.adjoint() - ef).norm() < 1e-12);
        assert!(cross_gram(&f, &[Signal::zeros(torus(8))]).is_err());
    }
}
