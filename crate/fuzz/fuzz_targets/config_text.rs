#![no_main]

use libfuzzer_sys::fuzz_target;
use maser_tur::config::{parse_config, Command};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = parse_config(text, Command::Point) else {
        return;
    };
    let _ = cfg.validate();
    // whatever parses must survive a write/read cycle unchanged
    let again = parse_config(&cfg.to_text(), Command::Point).expect("re-parse of to_text output");
    assert_eq!(again.to_text(), cfg.to_text());
});
