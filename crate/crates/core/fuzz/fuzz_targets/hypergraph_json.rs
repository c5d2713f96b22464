#![no_main]

use hypercomm::io::HypergraphFile;
use hypercomm::model::contract;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = HypergraphFile::from_json(text) else {
        return;
    };
    // accepted files must survive a round trip unchanged
    let again = HypergraphFile::from_json(&file.to_json()).expect("re-parse");
    assert_eq!(again, file);
    if file.hypergraph.n() <= 64 {
        let a = contract(&file.hypergraph);
        assert_eq!(a.n(), file.hypergraph.n());
    }
});
