#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::corpus::Document;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = Document::from_json(text) {
        assert_eq!(Document::from_json(&doc.to_json()).unwrap(), doc);
    }
});
