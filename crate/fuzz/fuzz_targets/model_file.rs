#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::neuralnet::Model;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = Model::from_bytes(data) {
        assert_eq!(Model::from_bytes(&model.to_bytes()).unwrap(), model);
    }
});
