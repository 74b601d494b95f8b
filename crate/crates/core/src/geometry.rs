//! Integer index sites, torus-aware offsets and half-open boxes.
//!
//! Every reference index set in the lab is a set of integer sites, either
//! on the `L x L` time-frequency torus (Gabor systems, sample units) or on a
//! one-dimensional line / cycle (the abstract frames built in
//! [`crate::counterexamples`]). One-dimensional sites keep their second
//! coordinate at zero.

use serde::{Deserialize, Serialize};

/// A point of the reference group, `[time, frequency]` on the torus or `[k, 0]` on a line.
pub type Site = [i64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    dims: u8,
    period: Option<i64>,
}

impl Geometry {
    /// The `L x L` torus of a Gabor experiment.
    pub fn torus(l: usize) -> Self {
        Self {
            dims: 2,
            period: Some(l as i64),
        }
    }

    /// The integers, without wraparound.
    pub fn line() -> Self {
        Self {
            dims: 1,
            period: None,
        }
    }

    /// The cyclic group `Z_n`.
    pub fn cycle(n: usize) -> Self {
        Self {
            dims: 1,
            period: Some(n as i64),
        }
    }

    pub fn dims(&self) -> usize {
        self.dims as usize
    }

    pub fn period(&self) -> Option<i64> {
        self.period
    }

    fn reduce(&self, k: i64) -> i64 {
        match self.period {
            Some(p) => (k + p / 2).rem_euclid(p) - p / 2,
            None => k,
        }
    }

    /// `a - b`, each coordinate reduced to `[-P/2, P/2)` when periodic.
    pub fn offset(&self, a: Site, b: Site) -> Site {
        [self.reduce(a[0] - b[0]), self.reduce(a[1] - b[1])]
    }

    /// Whether `offset` lies in the half-open box `[-N/2, N/2)^d`.
    pub fn in_box(&self, offset: Site, n: usize) -> bool {
        let n = n as i64;
        let inside = |k: i64| 2 * k >= -n && 2 * k < n;
        inside(offset[0]) && (self.dims == 1 || inside(offset[1]))
    }

    /// Whether `site` lies in `S_N(center)`.
    pub fn in_box_around(&self, site: Site, center: Site, n: usize) -> bool {
        self.in_box(self.offset(site, center), n)
    }

    /// Number of unit-spaced sites in a box of side `n`.
    pub fn unit_box_volume(&self, n: usize) -> usize {
        let side = match self.period {
            Some(p) => n.min(p as usize),
            None => n,
        };
        side.pow(self.dims as u32)
    }
}

/// Finite-box density of a family indexed by `sites` against unit-spaced
/// reference sites: `|I_N(c)| / |S_N(c)|` for each center.
pub fn site_box_ratios(sites: &[Site], geometry: Geometry, n: usize, centers: &[Site]) -> Vec<f64> {
    let volume = geometry.unit_box_volume(n) as f64;
    centers
        .iter()
        .map(|&c| {
            let count = sites
                .iter()
                .filter(|&&s| geometry.in_box_around(s, c, n))
                .count();
            count as f64 / volume
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_offsets_wrap() {
        let g = Geometry::torus(16);
        assert_eq!(g.offset([1, 15], [15, 1]), [2, -2]);
        assert_eq!(g.offset([8, 0], [0, 0]), [-8, 0]);
    }

    #[test]
    fn full_box_covers_torus() {
        let g = Geometry::torus(10);
        for x in 0..10 {
            for w in 0..10 {
                assert!(g.in_box_around([x, w], [3, 7], 10));
            }
        }
    }

    #[test]
    fn half_open_box() {
        let g = Geometry::line();
        assert!(g.in_box([-2, 0], 4));
        assert!(!g.in_box([2, 0], 4));
        assert!(
            g.in_box([1, 99], 4),
            "second coordinate ignored in one dimension"
        );
    }

    #[test]
    fn odd_cycle_full_box() {
        let g = Geometry::cycle(7);
        for k in 0..7 {
            assert!(g.in_box_around([k, 0], [0, 0], 7));
        }
        assert_eq!(g.unit_box_volume(9), 7);
    }

    #[test]
    fn double_map_density_is_two() {
        let g = Geometry::cycle(9);
        let sites: Vec<Site> = (0..18).map(|i| [i / 2, 0]).collect();
        let centers: Vec<Site> = (0..9).map(|c| [c, 0]).collect();
        for n in [2, 4, 6] {
            for r in site_box_ratios(&sites, g, n, &centers) {
                assert_eq!(r, 2.0);
            }
        }
    }
}
