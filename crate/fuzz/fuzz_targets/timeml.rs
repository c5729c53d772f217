#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::corpus::parse_timeml;

fuzz_target!(|data: &[u8]| {
    if let Ok(xml) = std::str::from_utf8(data) {
        if let Ok(doc) = parse_timeml(xml, "fuzz") {
            doc.validate().unwrap();
        }
    }
});
