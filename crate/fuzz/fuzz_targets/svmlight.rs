#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(queries) = coactive::io::parse_svmlight_bytes(data) {
        for q in &queries {
            assert!(!q.documents.is_empty());
            let dim = q.documents[0].dim();
            assert!(q.documents.iter().all(|d| d.dim() == dim));
            assert!(q.documents.iter().all(|d| d.as_slice().iter().all(|v| v.is_finite())));
            assert!(q.labels.as_ref().is_some_and(|l| l.len() == q.documents.len() && l.iter().all(|&x| x <= 4)));
        }
    }
});
