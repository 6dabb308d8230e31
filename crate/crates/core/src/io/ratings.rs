//! Delimiter-separated rating triples, e.g. `1::1193::5::978300760`.

use std::collections::HashMap;
use std::io::BufRead;

use log::warn;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatingsTriple {
    pub user: u64,
    pub item: u64,
    /// In `1..=5`.
    pub rating: u8,
    pub timestamp: Option<u64>,
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str, lineno: usize) -> Result<T> {
    let field = field.ok_or_else(|| Error::parse(lineno, format!("missing {name}")))?;
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad {name} '{field}'")))
}

/// Parses `<user><delim><item><delim><rating>[<delim><timestamp>]` lines.
///
/// Blank lines are skipped. When a `(user, item)` pair repeats, the later
/// line replaces the earlier one and a warning is logged.
pub fn parse_ratings<R: BufRead>(reader: R, delimiter: &str) -> Result<Vec<RatingsTriple>> {
    if delimiter.is_empty() {
        return Err(Error::config("empty ratings delimiter"));
    }
    let mut out: Vec<Option<RatingsTriple>> = Vec::new();
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(delimiter);
        let user = parse_field(fields.next(), "user id", lineno)?;
        let item = parse_field(fields.next(), "item id", lineno)?;
        let rating: i64 = parse_field(fields.next(), "rating", lineno)?;
        if !(1..=5).contains(&rating) {
            return Err(Error::parse(lineno, format!("rating {rating} outside 1..=5")));
        }
        let timestamp = match fields.next() {
            Some(ts) => Some(parse_field(Some(ts), "timestamp", lineno)?),
            None => None,
        };
        if fields.next().is_some() {
            return Err(Error::parse(lineno, "too many fields"));
        }

        let triple = RatingsTriple {
            user,
            item,
            rating: rating as u8,
            timestamp,
        };
        if let Some(prev) = seen.insert((user, item), out.len()) {
            warn!("line {lineno}: duplicate rating for user {user} item {item}; keeping the later one");
            out[prev] = None;
        }
        out.push(Some(triple));
    }
    Ok(out.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, delim: &str) -> Result<Vec<RatingsTriple>> {
        parse_ratings(text.as_bytes(), delim)
    }

    #[test]
    fn movielens_line() {
        let r = parse("1::1193::5::978300760\n", "::").unwrap();
        assert_eq!(
            r,
            vec![RatingsTriple {
                user: 1,
                item: 1193,
                rating: 5,
                timestamp: Some(978300760)
            }]
        );
    }

    #[test]
    fn tab_delimited_without_timestamp() {
        let r = parse("3\t4\t2\n\n5\t6\t1\r\n", "\t").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!((r[1].user, r[1].item, r[1].rating, r[1].timestamp), (5, 6, 1, None));
    }

    #[test]
    fn duplicate_last_wins() {
        let r = parse("1,2,3\n1,9,4\n1,2,5\n", ",").unwrap();
        assert_eq!(r.iter().map(|t| (t.item, t.rating)).collect::<Vec<_>>(), vec![(9, 4), (2, 5)]);
    }

    #[test]
    fn bad_ratings_rejected() {
        for (text, line) in [("1,2,0\n", 1), ("1,2,3\n1,2,6\n", 2), ("1,2,3.5\n", 1), ("1,2\n", 1), ("a,2,3\n", 1), ("1,2,3,4,5\n", 1)] {
            match parse(text, ",") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(parse("1,2,3", "").is_err());
    }
}
