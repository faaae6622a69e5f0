#![no_main]

use libfuzzer_sys::fuzz_target;
use maser_tur::config::{Command, Format};
use maser_tur::explorer::Scale;
use maser_tur::Param;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = s.parse::<Command>() {
        assert_eq!(c.to_string().parse::<Command>(), Ok(c));
    }
    let _ = s.parse::<Format>();
    if let Ok(p) = s.parse::<Param>() {
        assert_eq!(p.to_string().parse::<Param>(), Ok(p));
    }
    let _ = s.parse::<Scale>();
});
