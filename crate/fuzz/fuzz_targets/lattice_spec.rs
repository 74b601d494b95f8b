#![no_main]

use gabor_lab::pointset::{parse_lattice_steps, RefLattice, TorusParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_lattice_steps(text);
    let torus = TorusParams::new(144).unwrap();
    if let Ok(lat) = RefLattice::parse(text, torus) {
        assert_eq!(144 % lat.a_step(), 0);
        assert_eq!(144 % lat.b_step(), 0);
    }
});
