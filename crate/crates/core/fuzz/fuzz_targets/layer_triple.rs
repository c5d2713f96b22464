#![no_main]

use hypercomm::io::{format_layer_triple, parse_layer_triple};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((m, a, b)) = parse_layer_triple(text) {
        assert!(m >= 2 && a > 0.0 && b > 0.0);
        assert_eq!(parse_layer_triple(&format_layer_triple(m, a, b)).unwrap(), (m, a, b));
    }
});
