//! Time-frequency point sets on the discrete torus, the rounding map onto a
//! reference lattice, and finite-box Beurling density statistics.
//!
//! Local density at a box of side `N` is normalised as `(L / N^2) * count`,
//! so a set with the density of an orthonormal Gabor basis (exactly `L`
//! points spread uniformly) has local density 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Site;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusParams {
    l: usize,
}

impl TorusParams {
    pub const MIN_LEN: usize = 8;

    pub fn new(l: usize) -> Result<Self> {
        if l < Self::MIN_LEN {
            return Err(Error::InvalidTorus(l));
        }
        Ok(Self { l })
    }

    /// Signal length, equal to the number of grid points on each axis.
    pub fn len(&self) -> usize {
        self.l
    }

    /// Reduce a real coordinate into `[0, L)`.
    pub fn reduce(&self, v: f64) -> f64 {
        let l = self.l as f64;
        let r = v.rem_euclid(l);
        if r >= l {
            0.0
        } else {
            r
        }
    }

    /// Nearest grid index of a real coordinate.
    pub fn nearest(&self, v: f64) -> usize {
        (v.round() as i64).rem_euclid(self.l as i64) as usize
    }

    /// Signed torus distance between two real coordinates, in `[0, L/2]`.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        let d = self.reduce(a - b);
        d.min(self.l as f64 - d)
    }

    /// Box side check shared by every box statistic: even, `2 <= N <= L`.
    pub fn check_box(&self, n: usize) -> Result<()> {
        if n < 2 || !n.is_multiple_of(2) || n > self.l {
            return Err(Error::InvalidBox { n, l: self.l });
        }
        Ok(())
    }
}

/// Rectangular reference lattice `a_step Z x b_step Z` tiling the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RefLattice {
    a_step: usize,
    b_step: usize,
}

impl RefLattice {
    pub fn new(a_step: usize, b_step: usize, torus: TorusParams) -> Result<Self> {
        let l = torus.len();
        if a_step == 0 || b_step == 0 || !l.is_multiple_of(a_step) || !l.is_multiple_of(b_step) {
            return Err(Error::InvalidLattice {
                a: a_step,
                b: b_step,
                l,
            });
        }
        Ok(Self { a_step, b_step })
    }

    /// Parse `"AxB"` (e.g. `"4x6"`) and validate against the torus.
    pub fn parse(spec: &str, torus: TorusParams) -> Result<Self> {
        let (a, b) = parse_lattice_steps(spec)?;
        Self::new(a, b, torus)
    }

    pub fn a_step(&self) -> usize {
        self.a_step
    }

    pub fn b_step(&self) -> usize {
        self.b_step
    }

    /// Number of lattice points on the torus.
    pub fn cardinality(&self, torus: TorusParams) -> usize {
        (torus.len() / self.a_step) * (torus.len() / self.b_step)
    }

    /// All lattice sites, time-major.
    pub fn sites(&self, torus: TorusParams) -> Vec<Site> {
        let l = torus.len();
        let mut out = Vec::with_capacity(self.cardinality(torus));
        for j in 0..l / self.a_step {
            for k in 0..l / self.b_step {
                out.push([(j * self.a_step) as i64, (k * self.b_step) as i64]);
            }
        }
        out
    }
}

impl std::fmt::Display for RefLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.a_step, self.b_step)
    }
}

/// Split `"AxB"` into positive step sizes without checking divisibility.
pub fn parse_lattice_steps(spec: &str) -> Result<(usize, usize)> {
    let bad = || {
        Error::Parse(format!(
            "lattice must look like AxB with positive integers, got {spec:?}"
        ))
    };
    let (a, b) = spec.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfPoint {
    pub x: f64,
    pub omega: f64,
}

impl TfPoint {
    pub fn new(x: f64, omega: f64) -> Self {
        Self { x, omega }
    }
}

/// Finite multiset of time-frequency points; repeats are kept and counted.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    torus: TorusParams,
    points: Vec<TfPoint>,
}

/// Box counts at a list of centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub centers: Vec<Site>,
    pub counts: Vec<usize>,
    pub normalized: Vec<f64>,
}

/// Finite-`N` surrogates of the lower and upper Beurling densities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub n: usize,
    pub minus: f64,
    pub plus: f64,
}

impl PointSet {
    pub fn new(torus: TorusParams, points: impl IntoIterator<Item = TfPoint>) -> Self {
        let points = points
            .into_iter()
            .map(|p| TfPoint::new(torus.reduce(p.x), torus.reduce(p.omega)))
            .collect();
        Self { torus, points }
    }

    pub fn empty(torus: TorusParams) -> Self {
        Self {
            torus,
            points: Vec::new(),
        }
    }

    /// `{(j a, k b)}` over the whole torus, time-major.
    pub fn lattice_points(lat: RefLattice, torus: TorusParams) -> Self {
        let points = lat
            .sites(torus)
            .into_iter()
            .map(|[x, w]| TfPoint::new(x as f64, w as f64))
            .collect();
        Self { torus, points }
    }

    pub fn torus(&self) -> TorusParams {
        self.torus
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TfPoint] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &TfPoint> {
        self.points.iter()
    }

    /// Displace every point by an independent uniform offset in `[-delta, delta]^2`.
    pub fn jitter(&self, delta: f64, seed: u64) -> Self {
        if delta <= 0.0 {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = self.points.iter().map(|p| {
            let dx = rng.random_range(-delta..=delta);
            let dw = rng.random_range(-delta..=delta);
            TfPoint::new(p.x + dx, p.omega + dw)
        });
        Self::new(self.torus, points)
    }

    /// Add a fixed vector to every point (mod L).
    pub fn translate(&self, dx: f64, domega: f64) -> Self {
        Self::new(
            self.torus,
            self.points
                .iter()
                .map(|p| TfPoint::new(p.x + dx, p.omega + domega)),
        )
    }

    /// Multiset union; both sets must live on the same torus.
    pub fn union(&self, other: &PointSet) -> Result<Self> {
        if self.torus != other.torus {
            return Err(Error::LengthMismatch {
                expected: self.torus.len(),
                got: other.torus.len(),
            });
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(Self {
            torus: self.torus,
            points,
        })
    }

    /// Keep the points whose index passes `keep`.
    pub fn filter_indices(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let points = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, p)| *p)
            .collect();
        Self {
            torus: self.torus,
            points,
        }
    }

    /// The rounding map `a(x, omega) = (a floor(x / a), b floor(omega / b))`.
    pub fn round_map(&self, lat: RefLattice) -> Vec<Site> {
        let (a, b) = (lat.a_step as f64, lat.b_step as f64);
        let l = self.torus.len() as i64;
        self.points
            .iter()
            .map(|p| {
                let x = (a * (p.x / a).floor()) as i64;
                let w = (b * (p.omega / b).floor()) as i64;
                [x.rem_euclid(l), w.rem_euclid(l)]
            })
            .collect()
    }

    /// Nearest integer grid position of every point.
    pub fn grid_positions(&self) -> Vec<(usize, usize)> {
        self.points
            .iter()
            .map(|p| (self.torus.nearest(p.x), self.torus.nearest(p.omega)))
            .collect()
    }

    /// Largest distance from a point to its nearest grid position (l-infinity).
    pub fn quantization_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| {
                (p.x - p.x.round())
                    .abs()
                    .max((p.omega - p.omega.round()).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Integer cell of each point, `(floor x, floor omega)`.
    pub(crate) fn floor_cells(&self) -> Vec<usize> {
        let l = self.torus.len();
        self.points
            .iter()
            .map(|p| {
                let x = (p.x.floor() as usize).min(l - 1);
                let w = (p.omega.floor() as usize).min(l - 1);
                x * l + w
            })
            .collect()
    }

    /// Counts of `Λ ∩ Q_N(c)` for every integer center `c`, time-major.
    pub fn box_count_grid(&self, n: usize) -> Result<Vec<f64>> {
        self.torus.check_box(n)?;
        let l = self.torus.len();
        let mut grid = vec![0.0; l * l];
        for cell in self.floor_cells() {
            grid[cell] += 1.0;
        }
        Ok(periodic_box_sums(&grid, l, n))
    }

    pub fn box_stats(&self, n: usize, centers: &[Site]) -> Result<BoxStats> {
        let sums = self.box_count_grid(n)?;
        let l = self.torus.len() as i64;
        let scale = self.torus.len() as f64 / (n * n) as f64;
        let counts: Vec<usize> = centers
            .iter()
            .map(|c| {
                let idx = c[0].rem_euclid(l) * l + c[1].rem_euclid(l);
                sums[idx as usize] as usize
            })
            .collect();
        let normalized = counts.iter().map(|&c| scale * c as f64).collect();
        Ok(BoxStats {
            n,
            centers: centers.to_vec(),
            counts,
            normalized,
        })
    }

    /// Min and max normalised box counts over every integer center.
    pub fn density_bounds(&self, n: usize) -> Result<DensityBounds> {
        let sums = self.box_count_grid(n)?;
        let scale = self.torus.len() as f64 / (n * n) as f64;
        let (lo, hi) = sums
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Ok(DensityBounds {
            n,
            minus: scale * lo,
            plus: scale * hi,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,omega\n");
        for p in &self.points {
            out.push_str(&format!("{:.16e},{:.16e}\n", p.x, p.omega));
        }
        out
    }

    /// Parse the `x,omega` CSV format. Coordinates are reduced mod L.
    pub fn from_csv(text: &str, torus: TorusParams) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "omega" {
            return Err(Error::Parse(format!(
                "expected header x,omega, got {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut points = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse(format!(
                    "row {}: expected 2 fields, got {}",
                    row + 1,
                    record.len()
                )));
            }
            let x = parse_coordinate(&record[0], row)?;
            let w = parse_coordinate(&record[1], row)?;
            points.push(TfPoint::new(x, w));
        }
        Ok(Self::new(torus, points))
    }

    pub fn to_json(&self) -> String {
        let doc = PointSetJson {
            l: self.torus.len(),
            points: self.points.iter().map(|p| [p.x, p.omega]).collect(),
        };
        serde_json::to_string(&doc).expect("finite floats serialize")
    }

    /// Parse `{"L": int, "points": [[x, w], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PointSetJson = serde_json::from_str(text)?;
        let torus = TorusParams::new(doc.l)?;
        let mut points = Vec::with_capacity(doc.points.len());
        for (row, [x, w]) in doc.points.into_iter().enumerate() {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::Parse(format!("point {row}: non-finite coordinate")));
            }
            points.push(TfPoint::new(x, w));
        }
        Ok(Self::new(torus, points))
    }
}

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    #[serde(rename = "L")]
    l: usize,
    points: Vec<[f64; 2]>,
}

fn parse_coordinate(field: &str, row: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", row + 1)))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "row {}: non-finite coordinate",
            row + 1
        )));
    }
    Ok(v)
}

/// Sums of `grid` (an `l x l` time-major array) over every half-open periodic
/// box `[c - n/2, c + n/2)^2`, indexed by center.
pub(crate) fn periodic_box_sums(grid: &[f64], l: usize, n: usize) -> Vec<f64> {
    debug_assert_eq!(grid.len(), l * l);
    debug_assert!(n <= l && n.is_multiple_of(2));
    let half = n / 2;
    let window = |line: &[f64], out: &mut [f64]| {
        let mut prefix = vec![0.0; 2 * l + 1];
        for i in 0..2 * l {
            prefix[i + 1] = prefix[i] + line[i % l];
        }
        for (c, slot) in out.iter_mut().enumerate() {
            let start = (c + l - half) % l;
            *slot = prefix[start + n] - prefix[start];
        }
    };
    // along omega for each x
    let mut stage = vec![0.0; l * l];
    for x in 0..l {
        window(&grid[x * l..(x + 1) * l], &mut stage[x * l..(x + 1) * l]);
    }
    // along x for each omega
    let mut out = vec![0.0; l * l];
    let mut column = vec![0.0; l];
    let mut summed = vec![0.0; l];
    for w in 0..l {
        for x in 0..l {
            column[x] = stage[x * l + w];
        }
        window(&column, &mut summed);
        for x in 0..l {
            out[x * l + w] = summed[x];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(l: usize) -> TorusParams {
        TorusParams::new(l).unwrap()
    }

    #[test]
    fn lattice_cardinality() {
        let t = torus(24);
        let lat = RefLattice::new(4, 6, t).unwrap();
        assert_eq!(PointSet::lattice_points(lat, t).len(), 24);
        let t16 = torus(16);
        let axis = PointSet::lattice_points(RefLattice::new(1, 16, t16).unwrap(), t16);
        assert_eq!(axis.len(), 16);
        assert!(axis.iter().all(|p| p.omega == 0.0));
    }

    #[test]
    fn non_divisor_lattice_rejected() {
        assert!(matches!(
            RefLattice::new(3, 5, torus(16)),
            Err(Error::InvalidLattice { .. })
        ));
        assert!(matches!(
            RefLattice::parse("4x5", torus(144)),
            Err(Error::InvalidLattice { .. })
        ));
        assert!(RefLattice::parse("4y6", torus(144)).is_err());
        assert!(RefLattice::parse("0x6", torus(144)).is_err());
    }

    #[test]
    fn small_torus_rejected() {
        assert!(TorusParams::new(7).is_err());
    }

    #[test]
    fn jitter_zero_and_determinism() {
        let t = torus(24);
        let ps = PointSet::lattice_points(RefLattice::new(4, 6, t).unwrap(), t);
        assert_eq!(ps.jitter(0.0, 3), ps);
        assert_eq!(ps.jitter(0.7, 11), ps.jitter(0.7, 11));
        assert_ne!(ps.jitter(0.7, 11), ps.jitter(0.7, 12));
    }

    #[test]
    fn jitter_offsets_recomputed_from_generator() {
        let t = torus(24);
        let ps = PointSet::lattice_points(RefLattice::new(4, 6, t).unwrap(), t);
        let jittered = ps.jitter(1.0, 7);
        assert_eq!(jittered.len(), 24);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, q) in ps.iter().zip(jittered.iter()) {
            let dx: f64 = rng.random_range(-1.0..=1.0);
            let dw: f64 = rng.random_range(-1.0..=1.0);
            assert!((t.reduce(p.x + dx) - q.x).abs() < 1e-12);
            assert!((t.reduce(p.omega + dw) - q.omega).abs() < 1e-12);
            assert!(t.distance(p.x, q.x) <= 1.0 && t.distance(p.omega, q.omega) <= 1.0);
        }
    }

    #[test]
    fn round_map_floor() {
        let t = torus(24);
        let lat = RefLattice::new(4, 6, t).unwrap();
        let ps = PointSet::new(t, [TfPoint::new(5.7, 13.2)]);
        assert_eq!(ps.round_map(lat), vec![[4, 12]]);
        let lp = PointSet::lattice_points(lat, t);
        assert_eq!(lp.round_map(lat), lat.sites(t));
    }

    #[test]
    fn box_counts_lattice() {
        let t = torus(24);
        let lat = RefLattice::new(4, 6, t).unwrap();
        let ps = PointSet::lattice_points(lat, t);
        let stats = ps.box_stats(24, &[[0, 0], [5, 17]]).unwrap();
        assert_eq!(stats.counts, vec![24, 24]);
        assert_eq!(stats.normalized, vec![1.0, 1.0]);
        // N = lcm(4, 6) = 12: every box holds 144 / 24 = 6 points
        let d = ps.density_bounds(12).unwrap();
        assert_eq!((d.minus, d.plus), (1.0, 1.0));
    }

    #[test]
    fn critical_square_lattice_density_one() {
        let t = torus(16);
        let ps = PointSet::lattice_points(RefLattice::new(4, 4, t).unwrap(), t);
        for n in [4, 8, 12, 16] {
            let sums = ps.box_stats(n, &[[0, 0], [1, 2], [3, 3]]).unwrap();
            if n % 4 == 0 {
                assert!(sums.normalized.iter().all(|&v| v == 1.0));
            }
        }
    }

    #[test]
    fn box_errors_and_empty() {
        let t = torus(16);
        let empty = PointSet::empty(t);
        assert!(matches!(
            empty.box_stats(18, &[[0, 0]]),
            Err(Error::InvalidBox { .. })
        ));
        assert!(matches!(
            empty.box_stats(3, &[[0, 0]]),
            Err(Error::InvalidBox { .. })
        ));
        let s = empty.box_stats(8, &[[0, 0], [4, 4]]).unwrap();
        assert_eq!(s.counts, vec![0, 0]);
    }

    #[test]
    fn single_point_full_box() {
        let t = torus(16);
        let ps = PointSet::new(t, [TfPoint::new(3.3, 9.9)]);
        let d = ps.density_bounds(16).unwrap();
        assert_eq!(d.minus, 1.0 / 16.0);
        assert_eq!(d.plus, 1.0 / 16.0);
    }

    #[test]
    fn union_doubles_density() {
        let t = torus(24);
        let lat = RefLattice::new(4, 6, t).unwrap();
        let a = PointSet::lattice_points(lat, t);
        let b = a.translate(1.5, 2.5);
        let u = a.union(&b).unwrap();
        let d1 = a.density_bounds(12).unwrap();
        let d2 = u.density_bounds(12).unwrap();
        assert_eq!(d2.minus, 2.0 * d1.minus);
        assert_eq!(d2.plus, 2.0 * d1.plus);
    }

    #[test]
    fn box_sums_match_brute_force() {
        let t = torus(12);
        let ps = PointSet::new(
            t,
            (0..30).map(|i| TfPoint::new(i as f64 * 1.37, i as f64 * 2.91)),
        );
        for n in [2, 6, 12] {
            let grid = ps.box_count_grid(n).unwrap();
            for cx in 0..12i64 {
                for cw in 0..12i64 {
                    let brute = ps
                        .iter()
                        .filter(|p| {
                            let inside = |v: f64, c: i64| {
                                let lo = (c - n as i64 / 2) as f64;
                                (0..3).any(|k| {
                                    let v = v + (k as f64 - 1.0) * 12.0;
                                    v >= lo && v < lo + n as f64
                                })
                            };
                            inside(p.x, cx) && inside(p.omega, cw)
                        })
                        .count();
                    assert_eq!(
                        grid[(cx * 12 + cw) as usize] as usize,
                        brute,
                        "n={n} c=({cx},{cw})"
                    );
                }
            }
        }
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let t = torus(16);
        let ps = PointSet::new(
            t,
            [TfPoint::new(0.1, 15.999999999), TfPoint::new(3.0, 1e-9)],
        );
        assert_eq!(PointSet::from_csv(&ps.to_csv(), t).unwrap(), ps);
        assert_eq!(PointSet::from_json(&ps.to_json()).unwrap(), ps);
    }

    #[test]
    fn malformed_inputs_rejected() {
        let t = torus(16);
        assert!(PointSet::from_csv("a,b\n1,2\n", t).is_err());
        assert!(PointSet::from_csv("x,omega\n1,nan\n", t).is_err());
        assert!(PointSet::from_csv("x,omega\n1\n", t).is_err());
        assert!(PointSet::from_json(r#"{"L": 4, "points": []}"#).is_err());
        assert!(PointSet::from_json(r#"{"L": 16, "points": [[1]]}"#).is_err());
    }

    #[test]
    fn reduce_never_returns_length() {
        let t = torus(24);
        let r = t.reduce(-1e-17);
        assert!((0.0..24.0).contains(&r));
    }
}
