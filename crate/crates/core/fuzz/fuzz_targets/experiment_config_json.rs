#![no_main]

use hypercomm::experiments::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        let pixels = cfg.pixels().expect("validated config expands");
        assert!(!pixels.is_empty());
    }
});
