#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::neuralnet::PretrainedVectors;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = PretrainedVectors::parse(text, None, None) {
        assert!(v.vectors.values().all(|row| row.len() == v.dim));
    }
});
