#![no_main]

use gabor_lab::pointset::PointSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ps) = PointSet::from_json(text) {
        let again = PointSet::from_json(&ps.to_json()).expect("own output parses");
        assert_eq!(again.len(), ps.len());
    }
});
