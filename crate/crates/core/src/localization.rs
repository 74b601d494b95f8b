//! Localization of a system `F = {f_i}` against a reference `E = {e_j}`
//! along an index map `a`: envelopes dominating the cross-Gram matrix,
//! column and row tail profiles, homogeneous approximation errors (and
//! their dual versions), self-localization, and Gabor-molecule envelopes.
//!
//! Families are stored as matrix columns together with the site each
//! element is attached to: `a(i)` for the system, the position of `j` in
//! the reference group for the reference.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, CMatrix, CVector};
use crate::gabor::GaborSystem;
use crate::geometry::{Geometry, Site};
use crate::pointset::{PointSet, RefLattice};
use crate::signal::{self, cell_maxima, RealGrid, Signal};

#[derive(Clone, Debug, PartialEq)]
pub struct IndexedFamily {
    pub vectors: CMatrix,
    pub sites: Vec<Site>,
}

impl IndexedFamily {
    pub fn new(vectors: CMatrix, sites: Vec<Site>) -> Result<Self> {
        if vectors.ncols() != sites.len() {
            return Err(Error::LengthMismatch {
                expected: vectors.ncols(),
                got: sites.len(),
            });
        }
        Ok(Self { vectors, sites })
    }

    /// Elements of a Gabor system attached to `a(λ)` on `lat`.
    pub fn from_gabor(sys: &GaborSystem, lat: RefLattice) -> Self {
        Self {
            vectors: sys.elements(),
            sites: sys.points().round_map(lat),
        }
    }

    /// Same sites, different vectors (e.g. the canonical duals).
    pub fn with_vectors(&self, vectors: CMatrix) -> Result<Self> {
        Self::new(vectors, self.sites.clone())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// `max_j |a^{-1}(j)|`.
    pub fn max_multiplicity(&self) -> usize {
        let mut counts: BTreeMap<Site, usize> = BTreeMap::new();
        for s in &self.sites {
            *counts.entry(*s).or_default() += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }
}

/// Which index is held fixed when summing a tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Fixed reference index `j`, summing over `i ∉ I_N(j)`.
    Column,
    /// Fixed system index `i`, summing over `j ∉ S_N(a(i))`.
    Row,
}

/// Nonnegative function on group offsets; absent offsets are zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub values: BTreeMap<Site, f64>,
}

impl Envelope {
    fn raise(&mut self, k: Site, v: f64) {
        let slot = self.values.entry(k).or_insert(0.0);
        if v > *slot {
            *slot = v;
        }
    }

    pub fn get(&self, k: Site) -> f64 {
        self.values.get(&k).copied().unwrap_or(0.0)
    }

    /// `(sum_k r(k)^p)^{1/p}`; `p = inf` gives the maximum.
    pub fn p_norm(&self, p: f64) -> f64 {
        signal::lp_norm(self.values.values().copied(), p)
    }

    /// `sum_{k ∉ S_N(0)} r(k)^p`, with the box reflected for rows.
    pub fn tail(&self, geometry: Geometry, p: f64, n: usize, orientation: Orientation) -> f64 {
        self.values
            .iter()
            .filter(|(k, _)| {
                let k = match orientation {
                    Orientation::Column => **k,
                    Orientation::Row => geometry.offset([0, 0], **k),
                };
                !geometry.in_box(k, n)
            })
            .map(|(_, v)| v.powf(p))
            .fold(0.0, |acc, v| acc + v)
    }

    /// Offsets carrying a value above `tol`.
    pub fn support(&self, tol: f64) -> Vec<Site> {
        self.values
            .iter()
            .filter(|(_, &v)| v > tol)
            .map(|(k, _)| *k)
            .collect()
    }

    /// CSV with header `dx,domega,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dx,domega,value\n");
        for (k, v) in &self.values {
            out.push_str(&format!("{},{},{:.16e}\n", k[0], k[1], v));
        }
        out
    }
}

/// Worst-case tail sums for an increasing list of box sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub n_values: Vec<usize>,
    pub eps: Vec<f64>,
}

impl DecayProfile {
    pub fn is_nonincreasing(&self) -> bool {
        self.eps.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn at(&self, n: usize) -> Option<f64> {
        self.n_values
            .iter()
            .position(|&m| m == n)
            .map(|i| self.eps[i])
    }

    pub fn last(&self) -> Option<f64> {
        self.eps.last().copied()
    }

    /// CSV with header `N,eps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,eps\n");
        for (n, e) in self.n_values.iter().zip(&self.eps) {
            out.push_str(&format!("{n},{e:.16e}\n"));
        }
        out
    }
}

fn sorted_sides(ns: &[usize]) -> Result<Vec<usize>> {
    let mut v = ns.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.first() == Some(&0) {
        return Err(Error::InvalidBox { n: 0, l: 0 });
    }
    Ok(v)
}

/// A system and a reference sharing one Hilbert space and one index geometry.
#[derive(Clone, Debug)]
pub struct Localization<'a> {
    system: &'a IndexedFamily,
    reference: &'a IndexedFamily,
    geometry: Geometry,
    gram: CMatrix,
}

impl<'a> Localization<'a> {
    pub fn new(
        system: &'a IndexedFamily,
        reference: &'a IndexedFamily,
        geometry: Geometry,
    ) -> Result<Self> {
        if system.dim() != reference.dim() {
            return Err(Error::LengthMismatch {
                expected: reference.dim(),
                got: system.dim(),
            });
        }
        let gram = frame::cross_gram(&system.vectors, &reference.vectors);
        Ok(Self {
            system,
            reference,
            geometry,
            gram,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn system(&self) -> &IndexedFamily {
        self.system
    }

    pub fn reference(&self) -> &IndexedFamily {
        self.reference
    }

    /// `gram[(i, j)] = <f_i, e_j>`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// `a(i) - position(j)` reduced in the geometry.
    pub fn offset(&self, i: usize, j: usize) -> Site {
        self.geometry
            .offset(self.system.sites[i], self.reference.sites[j])
    }

    /// `i ∈ I_N(j)`.
    pub fn in_column_box(&self, i: usize, j: usize, n: usize) -> bool {
        self.geometry.in_box(self.offset(i, j), n)
    }

    /// `j ∈ S_N(a(i))`.
    pub fn in_row_box(&self, i: usize, j: usize, n: usize) -> bool {
        self.geometry
            .in_box_around(self.reference.sites[j], self.system.sites[i], n)
    }

    /// Tightest envelope: `r(k) = max_{a(i) - j = k} |<f_i, e_j>|`.
    pub fn envelope(&self) -> Envelope {
        let mut env = Envelope::default();
        for i in 0..self.system.len() {
            for j in 0..self.reference.len() {
                env.raise(self.offset(i, j), self.gram[(i, j)].norm());
            }
        }
        env
    }

    /// Largest amount by which a cross-Gram entry exceeds `env` (0 when dominated).
    pub fn domination_violation(&self, env: &Envelope) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.system.len() {
            for j in 0..self.reference.len() {
                worst = worst.max(self.gram[(i, j)].norm() - env.get(self.offset(i, j)));
            }
        }
        worst
    }

    /// `max_j sum_{i ∉ I_N(j)} |<f_i, e_j>|^p`.
    pub fn column_tail(&self, p: f64, n: usize) -> f64 {
        (0..self.reference.len())
            .map(|j| {
                (0..self.system.len())
                    .filter(|&i| !self.in_column_box(i, j, n))
                    .map(|i| self.gram[(i, j)].norm().powf(p))
                    .fold(0.0, |acc, v| acc + v)
            })
            .fold(0.0, f64::max)
    }

    /// `max_i sum_{j ∉ S_N(a(i))} |<f_i, e_j>|^p`.
    pub fn row_tail(&self, p: f64, n: usize) -> f64 {
        (0..self.system.len())
            .map(|i| {
                (0..self.reference.len())
                    .filter(|&j| !self.in_row_box(i, j, n))
                    .map(|j| self.gram[(i, j)].norm().powf(p))
                    .fold(0.0, |acc, v| acc + v)
            })
            .fold(0.0, f64::max)
    }

    pub fn column_decay_profile(&self, p: f64, ns: &[usize]) -> Result<DecayProfile> {
        signal::check_exponent(p)?;
        let n_values = sorted_sides(ns)?;
        let eps = n_values.iter().map(|&n| self.column_tail(p, n)).collect();
        Ok(DecayProfile { n_values, eps })
    }

    pub fn row_decay_profile(&self, p: f64, ns: &[usize]) -> Result<DecayProfile> {
        signal::check_exponent(p)?;
        let n_values = sorted_sides(ns)?;
        let eps = n_values.iter().map(|&n| self.row_tail(p, n)).collect();
        Ok(DecayProfile { n_values, eps })
    }

    /// `max_j ||e_j - sum_{i ∈ I_N(j)} <e_j, f_i> f̃_i||`.
    pub fn strong_hap_error(&self, system_duals: &CMatrix, n: usize) -> f64 {
        (0..self.reference.len())
            .into_par_iter()
            .map(|j| {
                let mut r = self.reference.vectors.column(j).into_owned();
                for i in (0..self.system.len()).filter(|&i| self.in_column_box(i, j, n)) {
                    r.axpy(
                        -self.gram[(i, j)].conj(),
                        &system_duals.column(i),
                        Complex64::new(1.0, 0.0),
                    );
                }
                r.norm()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max_j dist(e_j, span{f̃_i : i ∈ I_N(j)})`.
    pub fn weak_hap_error(&self, system_duals: &CMatrix, n: usize) -> f64 {
        (0..self.reference.len())
            .into_par_iter()
            .map(|j| {
                let members: Vec<usize> = (0..self.system.len())
                    .filter(|&i| self.in_column_box(i, j, n))
                    .collect();
                let sub = select_columns(system_duals, &members);
                frame::distance_to_span(&self.reference.vectors.column(j).into_owned(), &sub)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max_i ||f_i - sum_{j ∈ S_N(a(i))} <f_i, e_j> ẽ_j||`.
    pub fn strong_dual_hap_error(&self, reference_duals: &CMatrix, n: usize) -> f64 {
        (0..self.system.len())
            .into_par_iter()
            .map(|i| {
                let mut r = self.system.vectors.column(i).into_owned();
                for j in (0..self.reference.len()).filter(|&j| self.in_row_box(i, j, n)) {
                    r.axpy(
                        -self.gram[(i, j)],
                        &reference_duals.column(j),
                        Complex64::new(1.0, 0.0),
                    );
                }
                r.norm()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max_i dist(f_i, span{ẽ_j : j ∈ S_N(a(i))})`.
    pub fn weak_dual_hap_error(&self, reference_duals: &CMatrix, n: usize) -> f64 {
        (0..self.system.len())
            .into_par_iter()
            .map(|i| {
                let members: Vec<usize> = (0..self.reference.len())
                    .filter(|&j| self.in_row_box(i, j, n))
                    .collect();
                let sub = select_columns(reference_duals, &members);
                frame::distance_to_span(&self.system.vectors.column(i).into_owned(), &sub)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max_j ||S e_j||` for the system's frame operator.
    pub fn max_frame_operator_image(&self) -> f64 {
        let zero = Complex64::new(0.0, 0.0);
        (0..self.reference.len())
            .into_par_iter()
            .map(|j| {
                let mut image = CVector::zeros(self.system.dim());
                for i in (0..self.system.len()).filter(|&i| self.gram[(i, j)] != zero) {
                    image.axpy(
                        self.gram[(i, j)].conj(),
                        &self.system.vectors.column(i),
                        Complex64::new(1.0, 0.0),
                    );
                }
                image.norm()
            })
            .reduce(|| 0.0, f64::max)
    }
}

fn select_columns(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

/// `r(k) = max_{a(i) - a(j) = k} |<f_i, f_j>|`.
pub fn self_localization_envelope(family: &IndexedFamily, geometry: Geometry) -> Envelope {
    pair_envelope(family, &family.vectors, geometry)
}

/// `r(k) = max_{a(i) - a(j) = k} |<f_i, f̃_j>|`.
pub fn dual_localization_envelope(
    family: &IndexedFamily,
    duals: &CMatrix,
    geometry: Geometry,
) -> Envelope {
    pair_envelope(family, duals, geometry)
}

fn pair_envelope(family: &IndexedFamily, other: &CMatrix, geometry: Geometry) -> Envelope {
    let gram = frame::cross_gram(&family.vectors, other);
    let mut env = Envelope::default();
    for i in 0..family.len() {
        for j in 0..family.len() {
            env.raise(
                geometry.offset(family.sites[i], family.sites[j]),
                gram[(i, j)].norm(),
            );
        }
    }
    env
}

/// Minimal common STFT envelope of a family attached to a point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeEnvelope {
    /// `Γ(z)` indexed by offset `z` (time-major, offsets mod L).
    pub grid: RealGrid,
    /// Largest l-infinity distance from a point to the grid position used.
    pub quantization: f64,
}

impl MoleculeEnvelope {
    pub fn amalgam(&self, p: f64, lat: RefLattice) -> Result<f64> {
        signal::amalgam_norm(&self.grid, p, lat)
    }

    /// Share of the amalgam-`l^1` mass carried by cells lying entirely
    /// outside the l-infinity torus ball of radius `radius`.
    pub fn amalgam_tail_fraction(&self, lat: RefLattice, radius: f64) -> f64 {
        let l = self.grid.l;
        let cells = cell_maxima(&self.grid, lat);
        let (a, b) = (lat.a_step(), lat.b_step());
        let nb = l / b;
        let dist = |v: usize| {
            let v = v % l;
            v.min(l - v) as f64
        };
        let mut total = 0.0;
        let mut tail = 0.0;
        for (idx, &m) in cells.iter().enumerate() {
            let (k, n) = (idx / nb, idx % nb);
            let dx = (k * a..(k + 1) * a).map(dist).fold(f64::INFINITY, f64::min);
            let dw = (n * b..(n + 1) * b).map(dist).fold(f64::INFINITY, f64::min);
            total += m;
            if dx.max(dw) > radius {
                tail += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Largest value at l-infinity torus distance greater than `radius`.
    pub fn max_outside(&self, radius: f64) -> f64 {
        let l = self.grid.l;
        let dist = |v: usize| v.min(l - v) as f64;
        let mut worst = 0.0f64;
        for x in 0..l {
            for w in 0..l {
                if dist(x).max(dist(w)) > radius {
                    worst = worst.max(self.grid.get(x, w));
                }
            }
        }
        worst
    }
}

fn stft_moduli(family: &CMatrix, gamma: &Signal) -> Result<Vec<RealGrid>> {
    let torus = gamma.torus();
    if family.nrows() != torus.len() {
        return Err(Error::LengthMismatch {
            expected: torus.len(),
            got: family.nrows(),
        });
    }
    (0..family.ncols())
        .into_par_iter()
        .map(|i| {
            let f = Signal::new(torus, family.column(i).iter().copied().collect())?;
            Ok(signal::stft(&f, gamma)?.magnitude())
        })
        .collect()
}

/// `Γ(z) = max_λ |V_γ f_λ(z + λ)|`, with λ rounded to the grid.
pub fn molecule_envelope(
    family: &CMatrix,
    points: &PointSet,
    gamma: &Signal,
) -> Result<MoleculeEnvelope> {
    if family.ncols() != points.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: family.ncols(),
        });
    }
    let l = gamma.len();
    let moduli = stft_moduli(family, gamma)?;
    let mut grid = RealGrid::zeros(l);
    for (v, &(px, pw)) in moduli.iter().zip(points.grid_positions().iter()) {
        for zx in 0..l {
            for zw in 0..l {
                let value = v.get((zx + px) % l, (zw + pw) % l);
                let slot = &mut grid.values[zx * l + zw];
                if value > *slot {
                    *slot = value;
                }
            }
        }
    }
    Ok(MoleculeEnvelope {
        grid,
        quantization: points.quantization_error(),
    })
}

/// Largest `|V_γ f_λ(z)| - Γ(z - λ)` over every λ and grid point.
pub fn molecule_domination_violation(
    family: &CMatrix,
    points: &PointSet,
    gamma: &Signal,
    envelope: &MoleculeEnvelope,
) -> Result<f64> {
    let l = gamma.len();
    let moduli = stft_moduli(family, gamma)?;
    let mut worst = 0.0f64;
    for (v, &(px, pw)) in moduli.iter().zip(points.grid_positions().iter()) {
        for x in 0..l {
            for w in 0..l {
                let gamma_value = envelope.grid.get((x + l - px) % l, (w + l - pw) % l);
                worst = worst.max(v.get(x, w) - gamma_value);
            }
        }
    }
    Ok(worst)
}

/// Column vector view of a signal.
pub fn signal_vector(s: &Signal) -> CVector {
    CVector::from_column_slice(s.samples())
}
