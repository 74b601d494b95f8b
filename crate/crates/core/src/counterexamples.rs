//! Finite truncations of the abstract frames that separate the localization,
//! decay and approximation properties, plus a driver that checks the bridge
//! inequalities between them on arbitrary pairs.
//!
//! Index sets over `Z` become integer sites on a [`Geometry::line`] (or a
//! cycle where the construction is translation invariant). Blocks of a
//! direct sum `H_1 ⊕ H_2 ⊕ ...` are flattened block-major, each block
//! occupying consecutive sites starting at 1; optional `ℓ²` tail indices sit
//! at sites `0, -1, -2, ...` with `f_k = e_k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, CMatrix, FrameBounds};
use crate::geometry::{site_box_ratios, Geometry, Site};
use crate::localization::{
    dual_localization_envelope, self_localization_envelope, IndexedFamily, Localization,
    Orientation,
};
use crate::measure::relative_measure;
use crate::signal::root_of_unity;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `ℓ²(tail) ⊕ H_{n_1} ⊕ ... ⊕ H_{n_m}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpace {
    pub blocks: Vec<usize>,
    pub tail: usize,
}

impl BlockSpace {
    pub fn new(blocks: Vec<usize>, tail: usize) -> Self {
        Self { blocks, tail }
    }

    /// Blocks of sizes `1, 2, ..., n_max`.
    pub fn triangular(n_max: usize, tail: usize) -> Self {
        Self::new((1..=n_max).collect(), tail)
    }

    pub fn dim(&self) -> usize {
        self.tail + self.blocks.iter().sum::<usize>()
    }

    /// Row of the first coordinate of block `b` (tail rows come first).
    pub fn block_offset(&self, b: usize) -> usize {
        self.tail + self.blocks[..b].iter().sum::<usize>()
    }

    /// Site of the first coordinate of block `b`.
    pub fn block_site(&self, b: usize) -> i64 {
        self.block_offset(b) as i64 - self.tail as i64 + 1
    }

    /// Sites of every coordinate: the tail at `0, -1, ...`, then blocks from 1.
    pub fn sites(&self) -> Vec<Site> {
        let tail = (0..self.tail as i64).rev().map(|k| [-k, 0]);
        let body = (1..=self.blocks.iter().sum::<usize>() as i64).map(|k| [k, 0]);
        tail.chain(body).collect()
    }

    /// The standard orthonormal basis, one vector per coordinate.
    pub fn standard_basis(&self) -> IndexedFamily {
        IndexedFamily {
            vectors: CMatrix::identity(self.dim(), self.dim()),
            sites: self.sites(),
        }
    }

    /// Places one matrix per block on the block diagonal; the tail stays the identity.
    pub fn block_diagonal(&self, block: impl Fn(usize) -> CMatrix) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for k in 0..self.tail {
            m[(k, k)] = ONE;
        }
        for (b, &n) in self.blocks.iter().enumerate() {
            let off = self.block_offset(b);
            m.view_mut((off, off), (n, n)).copy_from(&block(n));
        }
        m
    }

    fn ranges(&self) -> Vec<(usize, usize)> {
        let tail = (0..self.tail).map(|k| (k, 1));
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(b, &n)| (self.block_offset(b), n));
        tail.chain(blocks).collect()
    }

    /// Frame bounds and canonical duals of a family whose vectors each live
    /// inside one block, computed block by block.
    pub fn blockwise_frame(&self, vectors: &CMatrix) -> (FrameBounds, CMatrix) {
        assert_eq!(vectors.nrows(), self.dim());
        let ranges = self.ranges();
        let mut members = vec![Vec::new(); ranges.len()];
        for (c, col) in vectors.column_iter().enumerate() {
            let rows: Vec<usize> = col
                .iter()
                .enumerate()
                .filter(|(_, z)| **z != ZERO)
                .map(|(r, _)| r)
                .collect();
            let (Some(&first), Some(&last)) = (rows.first(), rows.last()) else {
                continue;
            };
            let b = ranges
                .iter()
                .position(|&(off, n)| first >= off && first < off + n)
                .expect("row inside space");
            let (off, n) = ranges[b];
            assert!(last < off + n, "vector {c} straddles blocks");
            members[b].push(c);
        }
        let mut duals = CMatrix::zeros(vectors.nrows(), vectors.ncols());
        let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
        for (&(off, n), cols) in ranges.iter().zip(&members) {
            let sub = CMatrix::from_fn(n, cols.len(), |r, c| vectors[(off + r, cols[c])]);
            let b = frame::dense_bounds(&sub);
            lower = lower.min(b.lower);
            upper = upper.max(b.upper);
            let d = frame::canonical_dual(&sub);
            for (c, &col) in cols.iter().enumerate() {
                duals.view_mut((off, col), (n, 1)).copy_from(&d.column(c));
            }
        }
        (FrameBounds { lower, upper }, duals)
    }
}

/// A finite family with its index map and index geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractFrame {
    pub family: IndexedFamily,
    pub geometry: Geometry,
}

impl AbstractFrame {
    pub fn bounds(&self) -> FrameBounds {
        frame::dense_bounds(&self.family.vectors)
    }

    pub fn gram(&self) -> CMatrix {
        frame::cross_gram(&self.family.vectors, &self.family.vectors)
    }
}

/// A system `F`, a reference `E` and the shared index geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePair {
    pub system: IndexedFamily,
    pub reference: IndexedFamily,
    pub geometry: Geometry,
}

impl FramePair {
    pub fn localization(&self) -> Localization<'_> {
        Localization::new(&self.system, &self.reference, self.geometry)
            .expect("pair shares one space")
    }
}

/// Canonical duals and frame bounds of both members of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDuals {
    pub system: CMatrix,
    pub reference: CMatrix,
    pub system_bounds: FrameBounds,
    pub reference_bounds: FrameBounds,
}

impl PairDuals {
    pub fn dense(pair: &FramePair) -> Self {
        Self {
            system: frame::canonical_dual(&pair.system.vectors),
            reference: frame::canonical_dual(&pair.reference.vectors),
            system_bounds: frame::dense_bounds(&pair.system.vectors),
            reference_bounds: frame::dense_bounds(&pair.reference.vectors),
        }
    }

    /// For pairs whose members are block diagonal over `space`.
    pub fn blockwise(pair: &FramePair, space: &BlockSpace) -> Self {
        let (system_bounds, system) = space.blockwise_frame(&pair.system.vectors);
        let (reference_bounds, reference) = space.blockwise_frame(&pair.reference.vectors);
        Self {
            system,
            reference,
            system_bounds,
            reference_bounds,
        }
    }
}

/// `(E_n, F_n)`: the standard basis of `C^n` and the harmonic basis
/// `f_k = n^{-1/2} sum_j ω_n^{jk} e_j`, `j, k = 1..n`.
pub fn harmonic_block(n: usize) -> (CMatrix, CMatrix) {
    assert!(n >= 1, "block dimension must be positive");
    let scale = 1.0 / (n as f64).sqrt();
    let f = CMatrix::from_fn(n, n, |j, k| {
        root_of_unity(((j + 1) * (k + 1) % n) as i64, n) * scale
    });
    (CMatrix::identity(n, n), f)
}

/// `sum_{k > N} |<f_k^n, e_1^n>|^2` with `k` counted as the offset `0..n-1`
/// from `e_1`, i.e. the column mass beyond a closed window of radius `N`.
pub fn harmonic_tail(n: usize, radius: usize) -> f64 {
    let (e, f) = harmonic_block(n);
    let gram = frame::cross_gram(&f, &e);
    (radius + 1..n).map(|k| gram[(k, 0)].norm_sqr()).sum()
}

/// Orthonormal pair `(F, E)` over blocks `1..=n_max` (plus `tail` identity
/// indices) with `F` harmonic in every block and `a` the identity.
pub fn no_hap_pair(n_max: usize, tail: usize) -> FramePair {
    let space = BlockSpace::triangular(n_max, tail);
    let f = space.block_diagonal(|n| harmonic_block(n).1);
    FramePair {
        system: IndexedFamily {
            vectors: f,
            sites: space.sites(),
        },
        reference: space.standard_basis(),
        geometry: Geometry::line(),
    }
}

/// Parseval frame `g_{2i} = e_i / √2`, `g_{2i-1} = f_i / √2` per block,
/// both attached to the site of `e_i`; the reference is the standard basis.
pub fn weak_not_strong_pair(n_max: usize, tail: usize) -> FramePair {
    let space = BlockSpace::triangular(n_max, tail);
    let dim = space.dim();
    let harmonic = no_hap_pair(n_max, tail).system.vectors;
    let reference = space.standard_basis();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut vectors = CMatrix::zeros(dim, tail + 2 * (dim - tail));
    let mut sites = Vec::with_capacity(vectors.ncols());
    for k in 0..tail {
        vectors[(k, k)] = ONE;
        sites.push(reference.sites[k]);
    }
    for k in tail..dim {
        let col = tail + 2 * (k - tail);
        vectors.set_column(col, &(harmonic.column(k) * Complex64::from(h)));
        vectors[(k, col + 1)] = Complex64::from(h);
        sites.push(reference.sites[k]);
        sites.push(reference.sites[k]);
    }
    FramePair {
        system: IndexedFamily { vectors, sites },
        reference,
        geometry: Geometry::line(),
    }
}

/// `f_j = e_j + (4 + |j|)^{-1/2} e_{-j}` for `j ∈ [-M, M]` against the standard basis.
pub fn perturbed_basis(m: usize) -> FramePair {
    let dim = 2 * m + 1;
    let mid = m as i64;
    let mut vectors = CMatrix::identity(dim, dim);
    for c in 0..dim {
        let j = c as i64 - mid;
        let mirror = (mid - j) as usize;
        vectors[(mirror, c)] += Complex64::from((4.0 + j.abs() as f64).powf(-0.5));
    }
    let sites: Vec<Site> = (-mid..=mid).map(|j| [j, 0]).collect();
    FramePair {
        system: IndexedFamily {
            vectors,
            sites: sites.clone(),
        },
        reference: IndexedFamily {
            vectors: CMatrix::identity(dim, dim),
            sites,
        },
        geometry: Geometry::line(),
    }
}

/// Column tail of [`perturbed_basis`] at box side `n`: 0 for `-n/4 < j <= n/4`, else `1 / (4 + |j|)`, maximised over `j`.
pub fn perturbed_basis_column_tail(m: usize, n: usize) -> f64 {
    let m = m as i64;
    (-m..=m)
        .filter(|&j| !(4 * j > -(n as i64) && 4 * j <= n as i64))
        .map(|j| 1.0 / (4.0 + j.abs() as f64))
        .fold(0.0, f64::max)
}

/// The Riesz block `f_1 = e_1`, `f_i = e_1 / (2√n) + e_i`.
pub fn column_not_row_block(n: usize) -> CMatrix {
    let mut m = CMatrix::identity(n, n);
    let c = Complex64::from(1.0 / (2.0 * (n as f64).sqrt()));
    for i in 1..n {
        m[(0, i)] = c;
    }
    m
}

/// Smallest and largest singular value of [`column_not_row_block`].
pub fn column_not_row_riesz_bounds(n: usize) -> (f64, f64) {
    let sv = frame::singular_values(&column_not_row_block(n));
    (*sv.last().unwrap(), sv[0])
}

/// System = standard basis, reference = the Riesz blocks `{f_i^n}` over
/// `n = 1..=n_max`: column decay holds, row decay fails with tail `(n-1)/(4n)`.
pub fn column_not_row_pair(n_max: usize) -> FramePair {
    let space = BlockSpace::triangular(n_max, 0);
    FramePair {
        system: space.standard_basis(),
        reference: IndexedFamily {
            vectors: space.block_diagonal(column_not_row_block),
            sites: space.sites(),
        },
        geometry: Geometry::line(),
    }
}

/// Orthonormal `F = {f_0, ..., f_{2P-1}}` on the cycle `Z_P`, `P = 2M + 1`,
/// with `a(2n) = a(2n+1) = n`, and the Riesz sequence `E = {f_{2n}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleIndex {
    pub pair: FramePair,
    pub period: usize,
}

pub fn double_index_example(m: usize) -> DoubleIndex {
    let period = 2 * m + 1;
    let dim = 2 * period;
    let sites: Vec<Site> = (0..dim as i64).map(|i| [i / 2, 0]).collect();
    let even = CMatrix::from_fn(dim, period, |r, c| if r == 2 * c { ONE } else { ZERO });
    DoubleIndex {
        pair: FramePair {
            system: IndexedFamily {
                vectors: CMatrix::identity(dim, dim),
                sites,
            },
            reference: IndexedFamily {
                vectors: even,
                sites: (0..period as i64).map(|n| [n, 0]).collect(),
            },
            geometry: Geometry::cycle(period),
        },
        period,
    }
}

impl DoubleIndex {
    fn centers(&self) -> Vec<Site> {
        (0..self.period as i64).map(|c| [c, 0]).collect()
    }

    /// `(min, max)` of `|I_N(c)| / N` over every center.
    pub fn density(&self, n: usize) -> (f64, f64) {
        min_max(&site_box_ratios(
            &self.pair.system.sites,
            self.pair.geometry,
            n,
            &self.centers(),
        ))
    }

    /// `(min, max)` of the measure of `F` relative to `E` over every center.
    pub fn relative_measure(&self, n: usize) -> (f64, f64) {
        let fam = &self.pair.system;
        let duals = frame::canonical_dual(&fam.vectors);
        let proj = frame::span_projection(&self.pair.reference.vectors);
        let values: Vec<f64> = relative_measure(
            fam,
            &duals,
            Some(&proj),
            self.pair.geometry,
            n,
            &self.centers(),
        )
        .into_iter()
        .map(|v| v.expect("every box holds indices"))
        .collect();
        min_max(&values)
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Riesz basis `f_0 = sum_i c_i e_i`, `f_i = e_i` (`i ≠ 0`) on `[-M, M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualLocalized {
    pub frame: AbstractFrame,
    /// `c_i` for `i = -M..=M`.
    pub coefficients: Vec<f64>,
    pub c0: f64,
}

/// `c_i ∝ |i|^{-s} / log(2 + |i|)` for `i ≠ 0`, scaled so `sum_{i≠0} c_i^2 = 1 - c0^2`.
pub fn dual_localized_not_self(m: usize, c0: f64, tail_exponent: f64) -> Result<DualLocalized> {
    if !(c0 > 0.5 && c0 < 1.0) {
        return Err(Error::OutOfRange(format!("c0 = {c0} must lie in (1/2, 1)")));
    }
    if !(0.5..=1.0).contains(&tail_exponent) {
        return Err(Error::OutOfRange(format!(
            "tail exponent {tail_exponent} must lie in [1/2, 1]"
        )));
    }
    if m == 0 {
        return Err(Error::OutOfRange("truncation M must be positive".into()));
    }
    let raw = |i: i64| (i.abs() as f64).powf(-tail_exponent) / (2.0 + i.abs() as f64).ln();
    dual_localized_with(m, c0, raw)
}

/// As [`dual_localized_not_self`] with a caller-supplied positive profile `c(i)`, `i ≠ 0`.
pub fn dual_localized_with(
    m: usize,
    c0: f64,
    profile: impl Fn(i64) -> f64,
) -> Result<DualLocalized> {
    if !(c0 > 0.5 && c0 < 1.0) {
        return Err(Error::OutOfRange(format!("c0 = {c0} must lie in (1/2, 1)")));
    }
    let mid = m as i64;
    let raw: Vec<f64> = (-mid..=mid)
        .map(|i| if i == 0 { 0.0 } else { profile(i) })
        .collect();
    if raw.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::OutOfRange(
            "coefficients must be finite and nonnegative".into(),
        ));
    }
    let mass: f64 = raw.iter().map(|c| c * c).sum();
    if mass <= 0.0 {
        return Err(Error::OutOfRange("coefficients vanish".into()));
    }
    let scale = ((1.0 - c0 * c0) / mass).sqrt();
    let mut coefficients: Vec<f64> = raw.iter().map(|c| c * scale).collect();
    coefficients[m] = c0;
    let dim = 2 * m + 1;
    let mut vectors = CMatrix::identity(dim, dim);
    for (r, &c) in coefficients.iter().enumerate() {
        vectors[(r, m)] = Complex64::from(c);
    }
    Ok(DualLocalized {
        frame: AbstractFrame {
            family: IndexedFamily {
                vectors,
                sites: (-mid..=mid).map(|i| [i, 0]).collect(),
            },
            geometry: Geometry::line(),
        },
        coefficients,
        c0,
    })
}

impl DualLocalized {
    /// Largest singular value of `1 - T`, `T e_i = f_i`.
    pub fn defect_norm(&self) -> f64 {
        let t = &self.frame.family.vectors;
        let defect = CMatrix::identity(t.nrows(), t.ncols()) - t;
        frame::singular_values(&defect)[0]
    }

    pub fn duals(&self) -> CMatrix {
        frame::canonical_dual(&self.frame.family.vectors)
    }

    /// `max_{i,j} |<f_i, f̃_j> - δ_ij|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let g = frame::cross_gram(&self.frame.family.vectors, &self.duals());
        (&g - CMatrix::identity(g.nrows(), g.ncols()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `sum_{j} <f_0, f_j>` over `j ≠ 0`, i.e. `sum c_j`.
    pub fn partial_sum(&self) -> f64 {
        let m = self.coefficients.len() / 2;
        let f = &self.frame.family.vectors;
        (0..f.ncols())
            .filter(|&j| j != m)
            .map(|j| f.column(m).dotc(&f.column(j)).re)
            .sum()
    }

    pub fn self_envelope_l1(&self) -> f64 {
        self_localization_envelope(&self.frame.family, self.frame.geometry).p_norm(1.0)
    }

    pub fn dual_envelope_l1(&self) -> f64 {
        dual_localization_envelope(&self.frame.family, &self.duals(), self.frame.geometry)
            .p_norm(1.0)
    }
}

/// `F = {e_1, ..., e_M} ∪ {2^n e_0 : -M <= n <= -1}` with `a = 0` on the
/// second part, against the standard basis `{e_0, ..., e_M}`.
pub fn infinite_density_bessel(m: usize) -> FramePair {
    let dim = m + 1;
    let mut vectors = CMatrix::zeros(dim, 2 * m);
    let mut sites = Vec::with_capacity(2 * m);
    for k in 1..=m {
        vectors[(k, k - 1)] = ONE;
        sites.push([k as i64, 0]);
    }
    for (c, n) in (1..=m as i32).enumerate() {
        vectors[(0, m + c)] = Complex64::from(2f64.powi(-n));
        sites.push([0, 0]);
    }
    FramePair {
        system: IndexedFamily { vectors, sites },
        reference: IndexedFamily {
            vectors: CMatrix::identity(dim, dim),
            sites: (0..dim as i64).map(|k| [k, 0]).collect(),
        },
        geometry: Geometry::line(),
    }
}

/// One quantitative implication `lhs <= rhs` at a box side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeCheck {
    pub name: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Whether a profile gets below `tolerance` somewhere in the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyFlag {
    pub name: String,
    pub values: Vec<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationsReport {
    pub n_values: Vec<usize>,
    pub bridges: Vec<BridgeCheck>,
    pub properties: Vec<PropertyFlag>,
}

impl RelationsReport {
    pub fn violations(&self) -> Vec<&BridgeCheck> {
        self.bridges.iter().filter(|b| !b.holds).collect()
    }

    pub fn property(&self, name: &str) -> Option<&PropertyFlag> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Relative slack allowed on each bridge inequality.
pub const BRIDGE_TOLERANCE: f64 = 1e-9;
/// A sweep "decays" when some value drops to this level.
pub const DECAY_TOLERANCE: f64 = 0.1;

fn bridge(name: &str, n: usize, lhs: f64, rhs: f64) -> BridgeCheck {
    let holds = lhs <= rhs + BRIDGE_TOLERANCE * (1.0 + rhs.abs());
    BridgeCheck {
        name: name.into(),
        n,
        lhs,
        rhs,
        holds,
    }
}

fn reciprocal_lower(bounds: FrameBounds) -> Option<f64> {
    bounds.is_frame().then(|| 1.0 / bounds.lower)
}

/// Evaluates the seven `ℓ²` bridge inequalities at every side in `ns`:
/// strong HAP vs column decay (both directions), strong dual HAP vs row
/// decay, weak <= strong for HAP and dual HAP, and column / row decay vs
/// the envelope tail. The two `1 / A` bridges are skipped when that family
/// is not a frame. Also flags which properties decay over the sweep.
pub fn relations_suite(pair: &FramePair, ns: &[usize]) -> Result<RelationsReport> {
    relations_suite_with(pair, &PairDuals::dense(pair), ns)
}

/// [`relations_suite`] with precomputed duals and bounds.
pub fn relations_suite_with(
    pair: &FramePair,
    duals: &PairDuals,
    ns: &[usize],
) -> Result<RelationsReport> {
    let loc = Localization::new(&pair.system, &pair.reference, pair.geometry)?;
    let mut n_values: Vec<usize> = ns.to_vec();
    n_values.sort_unstable();
    n_values.dedup();
    if n_values.is_empty() || n_values.iter().any(|&n| n < 2 || n % 2 == 1) {
        return Err(Error::OutOfRange(
            "box sides must be even and at least 2".into(),
        ));
    }
    let (sys_duals, ref_duals) = (&duals.system, &duals.reference);
    let inv_a = reciprocal_lower(duals.system_bounds);
    let inv_ae = reciprocal_lower(duals.reference_bounds);
    let c = loc.max_frame_operator_image();
    let k_sys = pair.system.max_multiplicity() as f64;
    let k_ref = pair.reference.max_multiplicity() as f64;
    let env = loc.envelope();

    let mut bridges = Vec::new();
    let (mut col, mut row, mut strong, mut weak, mut strong_d, mut weak_d, mut env_tail) =
        (vec![], vec![], vec![], vec![], vec![], vec![], vec![]);
    for &n in &n_values {
        let ct = loc.column_tail(2.0, n);
        let rt = loc.row_tail(2.0, n);
        let s = loc.strong_hap_error(sys_duals, n);
        let w = loc.weak_hap_error(sys_duals, n);
        let sd = loc.strong_dual_hap_error(ref_duals, n);
        let wd = loc.weak_dual_hap_error(ref_duals, n);
        let et_col = env.tail(pair.geometry, 2.0, n, Orientation::Column);
        let et_row = env.tail(pair.geometry, 2.0, n, Orientation::Row);
        if let Some(inv_a) = inv_a {
            bridges.push(bridge(
                "strong_hap_sq <= column_tail / A",
                n,
                s * s,
                inv_a * ct,
            ));
        }
        bridges.push(bridge(
            "column_tail <= max|S e_j| * strong_hap",
            n,
            ct,
            c * s,
        ));
        if let Some(inv_ae) = inv_ae {
            bridges.push(bridge(
                "strong_dual_hap_sq <= row_tail / A_E",
                n,
                sd * sd,
                inv_ae * rt,
            ));
        }
        bridges.push(bridge("weak_hap <= strong_hap", n, w, s));
        bridges.push(bridge("weak_dual_hap <= strong_dual_hap", n, wd, sd));
        bridges.push(bridge(
            "column_tail <= K * envelope_tail",
            n,
            ct,
            k_sys * et_col,
        ));
        bridges.push(bridge(
            "row_tail <= K_E * reflected_envelope_tail",
            n,
            rt,
            k_ref * et_row,
        ));
        col.push(ct);
        row.push(rt);
        strong.push(s);
        weak.push(w);
        strong_d.push(sd);
        weak_d.push(wd);
        env_tail.push(et_col.max(et_row));
    }
    let flag = |name: &str, values: Vec<f64>| {
        let holds = values.iter().any(|&v| v <= DECAY_TOLERANCE);
        PropertyFlag {
            name: name.into(),
            values,
            holds,
        }
    };
    let properties = vec![
        flag("column_decay", col),
        flag("row_decay", row),
        flag("l2_localization", env_tail),
        flag("strong_hap", strong),
        flag("weak_hap", weak),
        flag("strong_dual_hap", strong_d),
        flag("weak_dual_hap", weak_d),
    ];
    Ok(RelationsReport {
        n_values,
        bridges,
        properties,
    })
}

/// A random pair in `C^dim`: a spanning system and a reference, with
/// random sites on a line or cycle and a few random box sides.
pub fn random_pair(rng: &mut impl Rng, max_dim: usize) -> (FramePair, Vec<usize>) {
    let dim = rng.random_range(2..=max_dim.max(2));
    let mut matrix = |cols: usize| {
        CMatrix::from_fn(dim, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    };
    let n_sys = dim + (dim as f64 * 0.5) as usize;
    let sys = matrix(n_sys);
    let reference = if dim % 3 == 0 {
        CMatrix::identity(dim, dim)
    } else {
        matrix(dim)
    };
    let span = 2 * dim as i64;
    let periodic = rng.random_bool(0.5);
    let geometry = if periodic {
        Geometry::cycle(span as usize)
    } else {
        Geometry::line()
    };
    let sys_sites = (0..n_sys).map(|_| [rng.random_range(0..span), 0]).collect();
    let ref_sites = (0..dim)
        .map(|j| [2 * j as i64 + rng.random_range(0..2), 0])
        .collect();
    let mut ns: Vec<usize> = (0..3).map(|_| 2 * rng.random_range(1..=dim)).collect();
    ns.sort_unstable();
    (
        FramePair {
            system: IndexedFamily {
                vectors: sys,
                sites: sys_sites,
            },
            reference: IndexedFamily {
                vectors: reference,
                sites: ref_sites,
            },
            geometry,
        },
        ns,
    )
}

/// Runs [`relations_suite`] on `trials` seeded random pairs; returns every violated bridge.
pub fn fuzz_relations(trials: usize, max_dim: usize, seed: u64) -> Result<Vec<BridgeCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..trials {
        let (pair, ns) = random_pair(&mut rng, max_dim);
        violations.extend(
            relations_suite(&pair, &ns)?
                .violations()
                .into_iter()
                .cloned(),
        );
    }
    Ok(violations)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Equal,
    AtLeast,
    AtMost,
}

/// One asserted constant of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantCheck {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConstantCheck {
    pub fn new(
        name: impl Into<String>,
        expected: f64,
        computed: f64,
        comparison: Comparison,
        tolerance: f64,
    ) -> Self {
        let pass = match comparison {
            Comparison::Equal => (computed - expected).abs() <= tolerance,
            Comparison::AtLeast => computed >= expected - tolerance,
            Comparison::AtMost => computed <= expected + tolerance,
        };
        Self {
            name: name.into(),
            expected,
            computed,
            comparison,
            tolerance,
            pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counterexample {
    Harmonic,
    NoHap,
    WeakNotStrong,
    PerturbedBasis,
    ColumnNotRow,
    DoubleIndex,
    DualLocalizedNotSelf,
    InfiniteDensityBessel,
}

impl Counterexample {
    pub const ALL: [Counterexample; 8] = [
        Counterexample::Harmonic,
        Counterexample::NoHap,
        Counterexample::WeakNotStrong,
        Counterexample::PerturbedBasis,
        Counterexample::ColumnNotRow,
        Counterexample::DoubleIndex,
        Counterexample::DualLocalizedNotSelf,
        Counterexample::InfiniteDensityBessel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Counterexample::Harmonic => "harmonic",
            Counterexample::NoHap => "no-hap",
            Counterexample::WeakNotStrong => "weak-not-strong",
            Counterexample::PerturbedBasis => "perturbed-basis",
            Counterexample::ColumnNotRow => "column-not-row",
            Counterexample::DoubleIndex => "double-index",
            Counterexample::DualLocalizedNotSelf => "dual-localized-not-self",
            Counterexample::InfiniteDensityBessel => "infinite-density-bessel",
        }
    }

    /// Accepts the kebab-case name or its snake-case spelling.
    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown counterexample {s:?}")))
    }

    pub fn default_size(&self) -> usize {
        match self {
            Counterexample::Harmonic | Counterexample::NoHap => 32,
            Counterexample::WeakNotStrong => 32,
            Counterexample::PerturbedBasis => 64,
            Counterexample::ColumnNotRow => 16,
            Counterexample::DoubleIndex => 8,
            Counterexample::DualLocalizedNotSelf => 64,
            Counterexample::InfiniteDensityBessel => 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub name: String,
    pub size: usize,
    pub checks: Vec<ConstantCheck>,
}

impl ConstantsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Builds the construction at `size` and checks its published constants.
pub fn constants_report(kind: Counterexample, size: usize) -> Result<ConstantsReport> {
    if size == 0 {
        return Err(Error::OutOfRange("size must be positive".into()));
    }
    use Comparison::*;
    let mut checks = Vec::new();
    match kind {
        Counterexample::Harmonic => {
            let (_, f) = harmonic_block(size);
            let gram = frame::cross_gram(&f, &f);
            let dev = (&gram - CMatrix::identity(size, size))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            checks.push(ConstantCheck::new(
                "gram_identity_deviation",
                0.0,
                dev,
                AtMost,
                1e-12,
            ));
            for radius in 0..size {
                let expected = (size - radius - 1) as f64 / size as f64;
                checks.push(ConstantCheck::new(
                    format!("tail_radius_{radius}"),
                    expected,
                    harmonic_tail(size, radius),
                    Equal,
                    1e-12,
                ));
            }
        }
        Counterexample::NoHap => {
            let pair = no_hap_pair(size, 0);
            let loc = pair.localization();
            let duals = PairDuals::blockwise(&pair, &BlockSpace::triangular(size, 0)).system;
            for n in side_sweep(size) {
                let bound = (size as f64 - (n / 2) as f64) / size as f64;
                checks.push(ConstantCheck::new(
                    format!("column_tail_N{n}"),
                    bound,
                    loc.column_tail(2.0, n),
                    AtLeast,
                    1e-12,
                ));
                checks.push(ConstantCheck::new(
                    format!("strong_hap_N{n}"),
                    bound.sqrt(),
                    loc.strong_hap_error(&duals, n),
                    AtLeast,
                    1e-9,
                ));
            }
        }
        Counterexample::WeakNotStrong => {
            let pair = weak_not_strong_pair(size, 0);
            let PairDuals {
                system: duals,
                system_bounds: bounds,
                ..
            } = PairDuals::blockwise(&pair, &BlockSpace::triangular(size, 0));
            checks.push(ConstantCheck::new(
                "lower_bound",
                1.0,
                bounds.lower,
                Equal,
                1e-10,
            ));
            checks.push(ConstantCheck::new(
                "upper_bound",
                1.0,
                bounds.upper,
                Equal,
                1e-10,
            ));
            let loc = pair.localization();
            for n in side_sweep(size) {
                checks.push(ConstantCheck::new(
                    format!("weak_hap_N{n}"),
                    0.0,
                    loc.weak_hap_error(&duals, n),
                    AtMost,
                    1e-12,
                ));
                if n <= size / 2 {
                    let strong = loc.strong_hap_error(&duals, n);
                    checks.push(ConstantCheck::new(
                        format!("strong_hap_N{n}"),
                        0.4,
                        strong,
                        AtLeast,
                        0.0,
                    ));
                }
            }
        }
        Counterexample::PerturbedBasis => {
            let pair = perturbed_basis(size);
            let bounds = frame::dense_bounds(&pair.system.vectors);
            checks.push(ConstantCheck::new(
                "lower_bound",
                0.25,
                bounds.lower,
                AtLeast,
                1e-12,
            ));
            checks.push(ConstantCheck::new(
                "upper_bound",
                2.25,
                bounds.upper,
                AtMost,
                1e-12,
            ));
            checks.push(ConstantCheck::new(
                "lower_bound_near_quarter",
                0.25,
                bounds.lower,
                Equal,
                0.0125,
            ));
            let loc = pair.localization();
            let env = loc.envelope();
            for j in [1i64, 2, (size / 2) as i64, size as i64]
                .into_iter()
                .filter(|&j| j >= 1 && j <= size as i64)
            {
                let expected = (4.0 + j as f64).powf(-0.5);
                checks.push(ConstantCheck::new(
                    format!("envelope_offset_{}", 2 * j),
                    expected,
                    env.get([2 * j, 0]),
                    Equal,
                    1e-12,
                ));
            }
            for n in side_sweep(size) {
                checks.push(ConstantCheck::new(
                    format!("column_tail_N{n}"),
                    perturbed_basis_column_tail(size, n),
                    loc.column_tail(2.0, n),
                    Equal,
                    1e-12,
                ));
            }
        }
        Counterexample::ColumnNotRow => {
            let (lo, hi) = column_not_row_riesz_bounds(size);
            checks.push(ConstantCheck::new("riesz_lower", 0.5, lo, AtLeast, 1e-10));
            checks.push(ConstantCheck::new("riesz_upper", 1.5, hi, AtMost, 1e-10));
            let pair = column_not_row_pair(size);
            let loc = pair.localization();
            let expected = (size as f64 - 1.0) / (4.0 * size as f64);
            checks.push(ConstantCheck::new(
                "row_tail_N2",
                expected,
                loc.row_tail(2.0, 2),
                Equal,
                1e-12,
            ));
        }
        Counterexample::DoubleIndex => {
            let ex = double_index_example(size);
            let n = 2 * size;
            let (d_lo, d_hi) = ex.density(n);
            let (m_lo, m_hi) = ex.relative_measure(n);
            checks.push(ConstantCheck::new("density_minus", 2.0, d_lo, Equal, 1e-12));
            checks.push(ConstantCheck::new("density_plus", 2.0, d_hi, Equal, 1e-12));
            checks.push(ConstantCheck::new("measure_minus", 0.5, m_lo, Equal, 1e-12));
            checks.push(ConstantCheck::new("measure_plus", 0.5, m_hi, Equal, 1e-12));
            checks.push(ConstantCheck::new(
                "product",
                1.0,
                d_lo * m_lo,
                Equal,
                1e-12,
            ));
            let env = self_localization_envelope(&ex.pair.system, ex.pair.geometry);
            checks.push(ConstantCheck::new(
                "self_envelope_off_zero",
                0.0,
                env.p_norm(1.0) - env.get([0, 0]),
                AtMost,
                1e-12,
            ));
        }
        Counterexample::DualLocalizedNotSelf => {
            let c0 = 0.75;
            let ex = dual_localized_not_self(size, c0, 1.0)?;
            let sigma = ex.defect_norm();
            checks.push(ConstantCheck::new(
                "defect_norm_squared",
                2.0 - 2.0 * c0,
                sigma * sigma,
                Equal,
                1e-10,
            ));
            checks.push(ConstantCheck::new("defect_norm", 1.0, sigma, AtMost, 0.0));
            checks.push(ConstantCheck::new(
                "biorthogonality",
                0.0,
                ex.biorthogonality_error(),
                AtMost,
                1e-9,
            ));
            let direct: f64 = ex
                .coefficients
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != size)
                .map(|(_, c)| c)
                .sum();
            checks.push(ConstantCheck::new(
                "partial_sum",
                direct,
                ex.partial_sum(),
                Equal,
                1e-12,
            ));
            checks.push(ConstantCheck::new(
                "dual_envelope_l1",
                1.0,
                ex.dual_envelope_l1(),
                Equal,
                1e-9,
            ));
            checks.push(ConstantCheck::new(
                "self_envelope_l1",
                1.0 + direct,
                ex.self_envelope_l1(),
                Equal,
                1e-12,
            ));
        }
        Counterexample::InfiniteDensityBessel => {
            let pair = infinite_density_bessel(size);
            let env = pair.localization().envelope();
            let off: f64 = env.p_norm(1.0) - env.get([0, 0]);
            checks.push(ConstantCheck::new(
                "envelope_at_zero",
                1.0,
                env.get([0, 0]),
                Equal,
                1e-15,
            ));
            checks.push(ConstantCheck::new(
                "envelope_off_zero",
                0.0,
                off,
                AtMost,
                1e-15,
            ));
            checks.push(ConstantCheck::new(
                "multiplicity_at_zero",
                size as f64,
                pair.system.max_multiplicity() as f64,
                Equal,
                0.0,
            ));
            let min_norm = pair
                .system
                .vectors
                .column_iter()
                .map(|c| c.norm())
                .fold(f64::INFINITY, f64::min);
            checks.push(ConstantCheck::new(
                "min_norm",
                2f64.powi(-(size as i32)),
                min_norm,
                Equal,
                1e-300,
            ));
        }
    }
    Ok(ConstantsReport {
        name: kind.name().into(),
        size,
        checks,
    })
}

fn side_sweep(size: usize) -> Vec<usize> {
    let mut ns = vec![2];
    while *ns.last().unwrap() * 2 <= size.max(2) {
        ns.push(ns.last().unwrap() * 2);
    }
    ns
}

/// Naive `sum_k conj(e_k) f_k` for every pair of columns, as an oracle for the fast Gram.
pub fn naive_cross_gram(f: &CMatrix, e: &CMatrix) -> CMatrix {
    DMatrix::from_fn(f.ncols(), e.ncols(), |i, j| {
        let mut acc = ZERO;
        for k in 0..f.nrows() {
            acc += f[(k, i)] * e[(k, j)].conj();
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn harmonic_block_basics() {
        let (e, f) = harmonic_block(1);
        assert!(max_abs_diff(&e, &f) < 1e-15);
        for n in [2, 5, 16] {
            let (e, f) = harmonic_block(n);
            assert!(max_abs_diff(&naive_cross_gram(&f, &f), &CMatrix::identity(n, n)) < 1e-12);
            let g = frame::cross_gram(&f, &e);
            assert!(max_abs_diff(&g, &naive_cross_gram(&f, &e)) < 1e-12);
            assert!((0..n).all(|k| (g[(k, 0)].norm_sqr() - 1.0 / n as f64).abs() < 1e-14));
        }
    }

    #[test]
    fn harmonic_tail_constant() {
        for n in [8, 32, 64] {
            for radius in 0..n {
                let expected = (n - radius - 1) as f64 / n as f64;
                assert!((harmonic_tail(n, radius) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonic_tail_is_column_tail_of_first_block_index() {
        // closed radius r is the half-open side 2r + 2 on integer sites
        let n = 16;
        let pair = no_hap_pair(n, 0);
        let loc = pair.localization();
        let space = BlockSpace::triangular(n, 0);
        let j = space.block_offset(n - 1);
        for radius in 0..n {
            let side = 2 * radius + 2;
            let tail: f64 = (0..pair.system.len())
                .filter(|&i| !loc.in_column_box(i, j, side))
                .map(|i| loc.gram()[(i, j)].norm_sqr())
                .sum();
            assert!((tail - harmonic_tail(n, radius)).abs() < 1e-12);
        }
    }

    #[test]
    fn no_hap_column_tail() {
        let loc_pair = no_hap_pair(64, 4);
        let loc = loc_pair.localization();
        assert!(loc.column_tail(2.0, 8) >= 55.0 / 64.0);
        let duals = PairDuals::blockwise(&loc_pair, &BlockSpace::triangular(64, 4)).system;
        assert!(loc.strong_hap_error(&duals, 8) > 0.9);
        let small = no_hap_pair(8, 2);
        assert!(small.localization().column_tail(2.0, 16) < 1e-28);
    }

    #[test]
    fn blockwise_matches_dense() {
        let space = BlockSpace::triangular(6, 2);
        let pair = weak_not_strong_pair(6, 2);
        let fast = PairDuals::blockwise(&pair, &space);
        let dense = PairDuals::dense(&pair);
        assert!(max_abs_diff(&fast.system, &dense.system) < 1e-12);
        assert!((fast.system_bounds.lower - dense.system_bounds.lower).abs() < 1e-12);
        assert!((fast.system_bounds.upper - dense.system_bounds.upper).abs() < 1e-12);
    }

    #[test]
    fn block_space_layout() {
        let s = BlockSpace::triangular(3, 2);
        assert_eq!(s.dim(), 8);
        assert_eq!(s.block_offset(2), 5);
        assert_eq!(s.block_site(0), 1);
        assert_eq!(s.sites()[..3], [[-1, 0], [0, 0], [1, 0]]);
    }

    #[test]
    fn weak_not_strong() {
        let pair = weak_not_strong_pair(64, 3);
        let PairDuals {
            system: duals,
            system_bounds: b,
            ..
        } = PairDuals::blockwise(&pair, &BlockSpace::triangular(64, 3));
        assert!((b.lower - 1.0).abs() < 1e-10 && (b.upper - 1.0).abs() < 1e-10);
        let loc = pair.localization();
        assert!(loc.weak_hap_error(&duals, 2) < 1e-12);
        for n in [2, 4, 8, 16] {
            assert!(loc.strong_hap_error(&duals, n) >= 0.4);
        }
    }

    #[test]
    fn perturbed_basis_constants() {
        for m in [4, 16] {
            let pair = perturbed_basis(m);
            let b = frame::dense_bounds(&pair.system.vectors);
            assert!(b.lower >= 0.25 && b.upper <= 2.25 + 1e-12);
            assert!((b.lower - (1.0 - 5f64.powf(-0.5)).powi(2)).abs() < 1e-12);
            assert!((b.upper - 2.25).abs() < 1e-12);
            let loc = pair.localization();
            let env = loc.envelope();
            for j in 1..=m as i64 {
                assert!((env.get([2 * j, 0]) - (4.0 + j as f64).powf(-0.5)).abs() < 1e-14);
            }
            for n in [2, 4, 6, 8, 16, 32] {
                assert!(
                    (loc.column_tail(2.0, n) - perturbed_basis_column_tail(m, n)).abs() < 1e-14
                );
            }
        }
    }

    #[test]
    fn column_not_row_constants() {
        for n in [2, 4, 16, 64] {
            let (lo, hi) = column_not_row_riesz_bounds(n);
            assert!(lo >= 0.5 - 1e-10 && hi <= 1.5 + 1e-10);
            let pair = column_not_row_pair(n);
            let loc = pair.localization();
            assert!((loc.row_tail(2.0, 2) - (n as f64 - 1.0) / (4.0 * n as f64)).abs() < 1e-12);
        }
        let pair = column_not_row_pair(32);
        let loc = pair.localization();
        let col = loc.column_decay_profile(2.0, &[2, 8, 32, 128]).unwrap();
        assert!(col.last().unwrap() < 1e-2);
        assert!((loc.row_tail(2.0, 32) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn double_index_constants() {
        for m in [2, 5, 8] {
            let ex = double_index_example(m);
            for n in (2..ex.period).step_by(2) {
                let (dl, dh) = ex.density(n);
                let (ml, mh) = ex.relative_measure(n);
                assert!((dl - 2.0).abs() < 1e-12 && (dh - 2.0).abs() < 1e-12);
                assert!((ml - 0.5).abs() < 1e-12 && (mh - 0.5).abs() < 1e-12);
            }
            let env = self_localization_envelope(&ex.pair.system, ex.pair.geometry);
            assert_eq!(env.support(1e-14), vec![[0, 0]]);
        }
    }

    #[test]
    fn dual_localized_constants() {
        let mut last = 0.0;
        for m in [8, 64, 128] {
            let ex = dual_localized_not_self(m, 0.75, 1.0).unwrap();
            let sigma = ex.defect_norm();
            assert!((sigma * sigma - 0.5).abs() < 1e-10);
            assert!(sigma < 1.0);
            let sum_sq: f64 = ex.coefficients.iter().map(|c| c * c).sum();
            assert!((sum_sq - 1.0).abs() < 1e-12);
            if m <= 64 {
                assert!(ex.biorthogonality_error() < 1e-9);
                assert!((ex.dual_envelope_l1() - 1.0).abs() < 1e-9);
                assert!(ex.self_envelope_l1() >= ex.partial_sum());
            }
            let s = ex.partial_sum();
            assert!(s > last);
            last = s;
        }
        assert!(dual_localized_not_self(8, 0.5, 1.0).is_err());
        assert!(dual_localized_not_self(8, 0.8, 1.5).is_err());
    }

    #[test]
    fn infinite_density_bessel_constants() {
        let pair = infinite_density_bessel(10);
        assert_eq!(pair.system.max_multiplicity(), 10);
        let env = pair.localization().envelope();
        assert_eq!(env.support(0.0), vec![[0, 0]]);
        assert_eq!(env.get([0, 0]), 1.0);
        let min = pair
            .system
            .vectors
            .column_iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, 2f64.powi(-10));
        let d = site_box_ratios(&pair.system.sites, pair.geometry, 2, &[[0, 0]]);
        assert!(d[0] >= 5.0);
    }

    #[test]
    fn orthonormal_pair_passes_everything() {
        let space = BlockSpace::new(vec![6], 0);
        let pair = FramePair {
            system: space.standard_basis(),
            reference: space.standard_basis(),
            geometry: Geometry::line(),
        };
        let rep = relations_suite(&pair, &[2, 4]).unwrap();
        assert!(rep.violations().is_empty());
        assert!(rep.properties.iter().all(|p| p.holds));
    }

    #[test]
    fn suite_flags_no_hap_consistently() {
        let pair = no_hap_pair(32, 0);
        let duals = PairDuals::blockwise(&pair, &BlockSpace::triangular(32, 0));
        let rep = relations_suite_with(&pair, &duals, &[2, 4, 8, 16]).unwrap();
        assert!(rep.violations().is_empty());
        assert!(!rep.property("column_decay").unwrap().holds);
        assert!(!rep.property("strong_hap").unwrap().holds);
    }

    #[test]
    fn suite_perturbed_basis_decays_without_localization() {
        let rep = relations_suite(&perturbed_basis(64), &[8, 16, 32]).unwrap();
        assert!(rep.violations().is_empty());
        assert!(rep.property("column_decay").unwrap().holds);
        assert!(rep.property("row_decay").unwrap().holds);
        assert!(!rep.property("l2_localization").unwrap().holds);
    }

    #[test]
    fn small_fuzz() {
        assert!(fuzz_relations(40, 20, 7).unwrap().is_empty());
    }

    #[test]
    fn names_round_trip() {
        for c in Counterexample::ALL {
            assert_eq!(Counterexample::parse(c.name()).unwrap(), c);
        }
        assert_eq!(
            Counterexample::parse("no_hap").unwrap(),
            Counterexample::NoHap
        );
        assert!(Counterexample::parse("nope").is_err());
    }

    #[test]
    fn constants_reports() {
        for c in Counterexample::ALL {
            let rep = constants_report(c, c.default_size()).unwrap();
            let failing: Vec<_> = rep
                .checks
                .iter()
                .filter(|k| !k.pass)
                .map(|k| k.name.as_str())
                .collect();
            match c {
                Counterexample::PerturbedBasis => {
                    assert_eq!(failing, vec!["lower_bound_near_quarter"])
                }
                _ => assert!(failing.is_empty(), "{}: {failing:?}", c.name()),
            }
        }
    }
}
