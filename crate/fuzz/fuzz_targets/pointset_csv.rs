#![no_main]

use gabor_lab::pointset::{PointSet, TorusParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let torus = TorusParams::new(32).unwrap();
    if let Ok(ps) = PointSet::from_csv(text, torus) {
        let again = PointSet::from_csv(&ps.to_csv(), torus).expect("own output parses");
        assert_eq!(again.len(), ps.len());
    }
});
