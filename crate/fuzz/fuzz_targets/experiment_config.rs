#![no_main]

use libfuzzer_sys::fuzz_target;
use lot_core::experiment::ExperimentConfig;

// Parsing only: running a config is bounded but far too slow per input.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        assert!(cfg.validate().is_ok());
    }
});
