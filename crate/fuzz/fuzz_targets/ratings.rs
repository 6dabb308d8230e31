#![no_main]

use std::collections::HashSet;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // First byte picks the delimiter so both common layouts get explored.
    let Some((&sel, body)) = data.split_first() else {
        return;
    };
    let delim = ["::", "\t", ","][sel as usize % 3];
    if let Ok(triples) = coactive::io::parse_ratings(body, delim) {
        let mut seen = HashSet::new();
        for t in &triples {
            assert!((1..=5).contains(&t.rating));
            assert!(seen.insert((t.user, t.item)), "duplicate pair survived");
        }
    }
});
