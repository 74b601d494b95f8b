#![no_main]

use gabor_lab::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut cfg = ExperimentConfig::default();
    if cfg.apply_file(text).is_ok() {
        let mut again = ExperimentConfig::default();
        again.apply_file(&cfg.to_key_values()).expect("own output parses");
    }
});
