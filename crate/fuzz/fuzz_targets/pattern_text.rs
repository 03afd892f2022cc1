//! Fuzzes the one-based pattern listing parser (`FromStr` for
//! `InterleavingPattern`). Valid permutations must round-trip through
//! invert∘apply; everything else must return a typed error.

#![no_main]

use std::str::FromStr;

use libfuzzer_sys::fuzz_target;
use rsplink::interleaver::InterleavingPattern;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pattern) = InterleavingPattern::from_str(text) {
            let n = pattern.len();
            let input: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
            let shuffled = pattern.apply(&input).unwrap();
            let restored = pattern.invert().apply(&shuffled).unwrap();
            assert_eq!(restored, input);
        }
    }
});
