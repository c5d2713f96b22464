#![no_main]

use hypercomm::LabelVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = serde_json::from_slice::<LabelVector>(data) {
        let sum: i64 = labels.as_slice().iter().map(|&x| x as i64).sum();
        assert_eq!(sum, 0);
        assert!(labels.as_slice().iter().all(|&x| x == 1 || x == -1));
    }
});
