//! svmlight-style ranking files:
//!
//! ```text
//! <label> qid:<q> <idx>:<val> <idx>:<val> ... [# comment]
//! ```
//!
//! Feature indices are 1-based and strictly increasing within a line; absent
//! indices are zero. Documents are grouped by `qid` in order of first
//! appearance, so a query whose lines are not contiguous is still one group.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::tasks::ranking::RankingContext;
use crate::vector::FeatureVector;

/// Largest feature index accepted. Guards the dense expansion.
pub const MAX_FEATURE_INDEX: usize = 1 << 20;

/// Highest relevance grade.
pub const MAX_LABEL: u8 = 4;

struct Line {
    label: u8,
    qid: u64,
    features: Vec<(usize, f64)>,
}

fn parse_line(text: &str, lineno: usize) -> Result<Option<Line>> {
    let body = match text.find('#') {
        Some(pos) => &text[..pos],
        None => text,
    };
    let mut tokens = body.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let label: i64 = label_tok
        .parse()
        .map_err(|_| Error::parse(lineno, format!("label '{label_tok}' is not an integer")))?;
    if !(0..=MAX_LABEL as i64).contains(&label) {
        return Err(Error::parse(lineno, format!("label {label} outside 0..={MAX_LABEL}")));
    }

    let qid_tok = tokens
        .next()
        .ok_or_else(|| Error::parse(lineno, "missing qid"))?;
    let qid = qid_tok
        .strip_prefix("qid:")
        .and_then(|q| q.parse::<u64>().ok())
        .ok_or_else(|| Error::parse(lineno, format!("expected qid:<integer>, found '{qid_tok}'")))?;

    let mut features = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| Error::parse(lineno, format!("expected <index>:<value>, found '{tok}'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad feature index '{idx}'")))?;
        if idx == 0 || idx > MAX_FEATURE_INDEX {
            return Err(Error::parse(lineno, format!("feature index {idx} outside 1..={MAX_FEATURE_INDEX}")));
        }
        if idx <= last {
            return Err(Error::parse(lineno, format!("feature index {idx} not increasing")));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad feature value '{val}'")))?;
        if !val.is_finite() {
            return Err(Error::parse(lineno, format!("non-finite feature value '{val}'")));
        }
        features.push((idx, val));
        last = idx;
    }
    Ok(Some(Line {
        label: label as u8,
        qid,
        features,
    }))
}

/// Reads every query in the stream. The dimension is the largest feature
/// index seen anywhere in the file.
pub fn parse_svmlight_ranking<R: BufRead>(reader: R) -> Result<Vec<RankingContext>> {
    let mut groups: Vec<(u64, Vec<Line>)> = Vec::new();
    let mut by_qid: HashMap<u64, usize> = HashMap::new();
    let mut dim = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let Some(parsed) = parse_line(&line, lineno)? else {
            continue;
        };
        if let Some(&(idx, _)) = parsed.features.last() {
            dim = dim.max(idx);
        }
        let slot = *by_qid.entry(parsed.qid).or_insert_with(|| {
            groups.push((parsed.qid, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(parsed);
    }

    groups
        .into_iter()
        .map(|(qid, lines)| {
            let mut docs = Vec::with_capacity(lines.len());
            let mut labels = Vec::with_capacity(lines.len());
            for line in lines {
                let mut dense = vec![0.0; dim];
                for (idx, val) in line.features {
                    dense[idx - 1] = val;
                }
                docs.push(FeatureVector::new(dense)?);
                labels.push(line.label);
            }
            RankingContext::new(qid, docs, Some(labels))
        })
        .collect()
}

/// Convenience wrapper over an in-memory buffer.
pub fn parse_svmlight_bytes(data: &[u8]) -> Result<Vec<RankingContext>> {
    parse_svmlight_ranking(std::io::Cursor::new(data))
}
