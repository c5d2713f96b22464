#![no_main]

use hypercomm::io::{model_spec_from_json, model_spec_to_json};
use hypercomm::thresholds::divergences;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = model_spec_from_json(text) else {
        return;
    };
    assert_eq!(model_spec_from_json(&model_spec_to_json(&spec)).expect("re-parse"), spec);
    if let Ok(r) = divergences(&spec) {
        assert!(r.d_sdp <= r.d_gh + 1e-9 || !spec.is_assortative());
    }
});
