#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::corpus::{read_links, write_links};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(links) = read_links(text) {
        assert_eq!(read_links(&write_links(&links)).unwrap(), links);
    }
});
