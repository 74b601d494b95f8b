#![no_main]

use gabor_lab::config::parse_n_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sides) = parse_n_list(text) {
        assert!(sides.windows(2).all(|w| w[0] < w[1]));
        assert!(sides.iter().all(|&n| n >= 2 && n % 2 == 0));
    }
});
