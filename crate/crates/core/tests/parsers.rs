use coactive::io::{parse_ratings, parse_svmlight_bytes, RatingsTriple};
use coactive::Error;
use proptest::prelude::*;

fn svmlight_line(label: u8, qid: u64, features: &[(usize, f64)]) -> String {
    let mut s = format!("{label} qid:{qid}");
    for (i, v) in features {
        s.push_str(&format!(" {i}:{v:?}"));
    }
    s
}

/// `(qid, label, sparse features)`.
type Doc = (u64, u8, Vec<(usize, f64)>);

/// Documents in file order.
fn documents() -> impl Strategy<Value = Vec<Doc>> {
    let doc = (0u64..4, 0u8..=4, prop::collection::btree_map(1usize..12, -1e3f64..1e3, 0..6));
    prop::collection::vec(doc, 1..25).prop_map(|docs| {
        docs.into_iter()
            .map(|(q, l, f)| (q, l, f.into_iter().collect()))
            .collect()
    })
}

proptest! {
    #[test]
    fn svmlight_round_trip(docs in documents()) {
        let text: String = docs.iter().map(|(q, l, f)| svmlight_line(*l, *q, f) + "\n").collect();
        let parsed = parse_svmlight_bytes(text.as_bytes()).unwrap();
        let dim = docs.iter().flat_map(|d| d.2.iter().map(|p| p.0)).max().unwrap_or(0);

        let mut qids: Vec<u64> = Vec::new();
        for d in &docs {
            if !qids.contains(&d.0) {
                qids.push(d.0);
            }
        }
        prop_assert_eq!(parsed.iter().map(|c| c.query_id).collect::<Vec<_>>(), qids);
        for ctx in &parsed {
            let mine: Vec<_> = docs.iter().filter(|d| d.0 == ctx.query_id).collect();
            prop_assert_eq!(ctx.len(), mine.len());
            for (doc, (_, _, feats)) in ctx.documents.iter().zip(&mine) {
                let mut dense = vec![0.0; dim];
                for &(i, v) in feats {
                    dense[i - 1] = v;
                }
                prop_assert_eq!(doc.as_slice(), &dense[..]);
            }
            let labels: Vec<u8> = mine.iter().map(|d| d.1).collect();
            prop_assert_eq!(ctx.labels.clone(), Some(labels));
        }
    }

    #[test]
    fn svmlight_never_panics(text in "[0-9qid:. #\\-e\n]{0,200}") {
        let _ = parse_svmlight_bytes(text.as_bytes());
    }

    #[test]
    fn ratings_round_trip(rows in prop::collection::vec((0u64..6, 0u64..6, 1u8..=5, prop::option::of(0u64..1_000_000)), 0..40)) {
        let text: String = rows
            .iter()
            .map(|(u, m, r, ts)| match ts {
                Some(ts) => format!("{u}::{m}::{r}::{ts}\n"),
                None => format!("{u}::{m}::{r}\n"),
            })
            .collect();
        let parsed = parse_ratings(text.as_bytes(), "::").unwrap();

        // Last occurrence of each (user, item) pair survives, at its own position.
        let mut want: Vec<RatingsTriple> = Vec::new();
        for &(user, item, rating, timestamp) in &rows {
            want.retain(|t| (t.user, t.item) != (user, item));
            want.push(RatingsTriple { user, item, rating, timestamp });
        }
        prop_assert_eq!(parsed, want);
    }

    #[test]
    fn ratings_never_panic(text in "[0-9:,\t\n\\-]{0,200}") {
        let _ = parse_ratings(text.as_bytes(), "::");
        let _ = parse_ratings(text.as_bytes(), "\t");
    }
}

#[test]
fn svmlight_error_line_counts_blank_and_comment_lines() {
    let text = "# header\n\n1 qid:1 1:1\n2 qid:1 1:0.5 1:1\n";
    match parse_svmlight_bytes(text.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn svmlight_zero_feature_documents_are_allowed() {
    let q = parse_svmlight_bytes(b"3 qid:9\n1 qid:9 2:1\n").unwrap();
    assert_eq!(q[0].documents[0].as_slice(), &[0.0, 0.0]);
    assert_eq!(q[0].labels.as_deref(), Some(&[3u8, 1][..]));
}

#[test]
fn ratings_ids_must_be_unsigned() {
    assert!(matches!(parse_ratings(&b"-1::2::3\n"[..], "::"), Err(Error::Parse { line: 1, .. })));
}
