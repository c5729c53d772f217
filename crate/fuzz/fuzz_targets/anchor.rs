#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::timecore::parse_anchor;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(anchor) = parse_anchor(text) {
        // Canonical text parses back to the same anchor.
        assert_eq!(parse_anchor(&anchor.to_string()).unwrap(), anchor);
    }
});
