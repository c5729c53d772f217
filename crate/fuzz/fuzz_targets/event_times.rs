#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::corpus::EventTimeTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = EventTimeTable::parse(text) {
        let again = EventTimeTable::parse(&table.to_tsv()).unwrap();
        assert_eq!(again.len(), table.len());
    }
});
