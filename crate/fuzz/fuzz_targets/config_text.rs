//! Fuzzes the experiment config text parser: any byte string must produce
//! Ok or a typed error — never a panic, hang, or runaway allocation.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = rsplink::harness::parse_config(text) {
            // A config that parses must also survive re-validation.
            let _ = cfg.validate();
        }
    }
});
