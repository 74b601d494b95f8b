use approx::assert_relative_eq;
use gabor_lab::config::{parse_n_list, ExperimentConfig};
use gabor_lab::gabor::{BoundsMethod, GaborSystem};
use gabor_lab::measure::{measure_profile, reciprocity_check, Centers};
use gabor_lab::pointset::{PointSet, RefLattice, TfPoint, TorusParams};
use gabor_lab::signal::{self, gaussian_window, Signal};
use num_complex::Complex64;
use proptest::prelude::*;

const L: usize = 24;

fn torus() -> TorusParams {
    TorusParams::new(L).unwrap()
}

fn points() -> impl Strategy<Value = PointSet> {
    prop::collection::vec((0.0..L as f64, 0.0..L as f64), 1..60)
        .prop_map(|v| PointSet::new(torus(), v.into_iter().map(|(x, w)| TfPoint::new(x, w))))
}

fn signal() -> impl Strategy<Value = Signal> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), L).prop_map(|v| {
        Signal::new(
            torus(),
            v.into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .unwrap()
    })
}

fn lattice() -> impl Strategy<Value = RefLattice> {
    prop::sample::select(vec![(2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (4, 2)])
        .prop_map(|(a, b)| RefLattice::new(a, b, torus()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integer_translation_keeps_densities(ps in points(), dx in 0..L, dw in 0..L, n in prop::sample::select(vec![2usize, 4, 6, 12, 24])) {
        let moved = ps.translate(dx as f64, dw as f64);
        let (a, b) = (ps.density_bounds(n).unwrap(), moved.density_bounds(n).unwrap());
        prop_assert_eq!(a.minus, b.minus);
        prop_assert_eq!(a.plus, b.plus);
    }

    #[test]
    fn density_bounds_are_ordered_and_average_out(ps in points(), n in prop::sample::select(vec![2usize, 4, 8, 12, 24])) {
        let d = ps.density_bounds(n).unwrap();
        let mean = ps.len() as f64 / L as f64;
        prop_assert!(d.minus <= mean + 1e-12 && mean <= d.plus + 1e-12);
        if n == L {
            assert_relative_eq!(d.minus, mean, max_relative = 1e-12);
        }
    }

    #[test]
    fn integer_translation_keeps_frame_bounds(lat in lattice(), delta in 0.0..0.5f64, seed in 0u64..1000, dx in 0..L, dw in 0..L) {
        let ps = PointSet::lattice_points(lat, torus()).jitter(delta, seed);
        let a = GaborSystem::new(gaussian_window(torus()), ps.clone()).unwrap().frame_bounds(BoundsMethod::Dense).unwrap();
        let b = GaborSystem::new(gaussian_window(torus()), ps.translate(dx as f64, dw as f64)).unwrap().frame_bounds(BoundsMethod::Dense).unwrap();
        assert_relative_eq!(a.lower, b.lower, epsilon = 1e-10 * a.upper);
        assert_relative_eq!(a.upper, b.upper, max_relative = 1e-10);
    }

    #[test]
    fn mp_norm_is_a_norm(f in signal(), g in signal(), re in -3.0..3.0f64, im in -3.0..3.0f64, p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY])) {
        let c = Complex64::new(re, im);
        let nf = signal::mp_norm(&f, p).unwrap();
        assert_relative_eq!(signal::mp_norm(&f.scale(c), p).unwrap(), c.norm() * nf, max_relative = 1e-9, epsilon = 1e-12);
        let sum = Signal::new(torus(), f.samples().iter().zip(g.samples()).map(|(a, b)| a + b).collect()).unwrap();
        prop_assert!(signal::mp_norm(&sum, p).unwrap() <= nf + signal::mp_norm(&g, p).unwrap() + 1e-9);
    }

    #[test]
    fn relative_measure_lies_in_unit_interval(lat in lattice(), delta in 0.0..0.5f64, seed in 0u64..1000) {
        let ps = PointSet::lattice_points(lat, torus()).jitter(delta, seed);
        let sys = GaborSystem::new(gaussian_window(torus()), ps).unwrap();
        let data = sys.canonical_dual().unwrap();
        let profile = measure_profile(&sys, &data, &[4, 12, L], &Centers::IntegerGrid).unwrap();
        for level in &profile.levels {
            prop_assert!(level.minus > 0.0 && level.minus <= level.plus && level.plus <= 1.0 + 1e-9);
        }
        prop_assert!(reciprocity_check(&sys, &data, L).unwrap().r1 < 1e-9);
    }

    #[test]
    fn config_round_trips(l in prop::sample::select(vec![24usize, 48, 144]), jitter in 0.0..2.0f64, seed: u64, p in prop::sample::select(vec![1.0, 2.5, f64::INFINITY]), iterative: bool, size in prop::option::of(1usize..100)) {
        let mut cfg = ExperimentConfig { l, jitter, seed, p, iterative, size, ..Default::default() };
        cfg.sides = vec![2, 8, l];
        let mut back = ExperimentConfig::default();
        back.apply_file(&cfg.to_key_values()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn n_lists_round_trip(mut sides in prop::collection::vec((1usize..200).prop_map(|k| 2 * k), 1..20)) {
        let text = sides.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        sides.sort_unstable();
        sides.dedup();
        prop_assert_eq!(parse_n_list(&text).unwrap(), sides);
    }
}
