#![no_main]
use libfuzzer_sys::fuzz_target;

use evtime::timecore::{normalize_timex, TimeAnchor, TimexType};

fuzz_target!(|data: &[u8]| {
    let Some((&kind, rest)) = data.split_first() else { return };
    let Ok(value) = std::str::from_utf8(rest) else { return };
    let kind = match kind % 4 {
        0 => TimexType::Date,
        1 => TimexType::Time,
        2 => TimexType::Duration,
        _ => TimexType::Set,
    };
    let dct: TimeAnchor = "1998-02-06".parse().unwrap();
    if let Ok(Some(anchor)) = normalize_timex(value, kind, &dct) {
        assert_eq!(TimeAnchor::from_quadruple(anchor.quadruple()).unwrap(), anchor);
    }
});
