#![no_main]

use gabor_lab::pointset::TorusParams;
use gabor_lab::signal::WindowKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kind) = WindowKind::parse(text) {
        assert_eq!(WindowKind::parse(&kind.name()).unwrap(), kind);
        let _ = kind.build(TorusParams::new(64).unwrap());
    }
});
