#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::evaluation::{krippendorff_alpha, IaaRecord};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(record) = IaaRecord::parse_tsv(text) {
        if let Ok(alpha) = krippendorff_alpha(&record) {
            assert!(alpha.is_finite() && alpha <= 1.0 + 1e-9);
        }
    }
});
