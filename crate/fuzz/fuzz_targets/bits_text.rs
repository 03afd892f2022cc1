//! Fuzzes the bit-string reader used by the CLI (`--bits`/`--mask`
//! arguments and the config `selection_mask` key).

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(bits) = rsplink::harness::parse_bit_string(text) {
            // Accepted strings contain only 0/1 digits plus whitespace, so
            // the parsed length can never exceed the input length.
            assert!(bits.len() <= text.len());
            assert!(!bits.is_empty());
        }
    }
});
