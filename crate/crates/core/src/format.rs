//! SPMF-style text formats.
//!
//! Sequences: space-separated positive item ids, `-1` closes an element,
//! `-2` closes a sequence. Lines starting with `#` or `@` are ignored.
//!
//! Patterns: the same layout, except that a `!` token (or a `!` glued to the
//! first item) opens a negative element, e.g. `1 -1 ! 2 -1 3 -1 -2` is
//! `<(1),¬(2),(3)>`. Pattern files start with a `# min_sup=<f>` header and
//! each pattern line carries a trailing `# sup=<f>` comment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::miner::PatternCollection;
use crate::seq::{DataSequence, Element, Item, Pattern, Polarity, SequenceDatabase};

fn parse_item(tok: &str, line: usize) -> Result<Item> {
    match tok.parse::<Item>() {
        Ok(0) | Err(_) => Err(Error::Parse {
            line,
            msg: format!("expected a positive item id, found {tok:?}"),
        }),
        Ok(v) => Ok(v),
    }
}

/// Parses every sequence in `text`. Sequences may span lines.
pub fn parse_sequences(text: &str) -> Result<Vec<DataSequence>> {
    let mut out = Vec::new();
    let mut elements: Vec<Vec<Item>> = Vec::new();
    let mut current: Vec<Item> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with('@') {
            continue;
        }
        last_line = line;
        for tok in body.split_whitespace() {
            match tok {
                "-1" => {
                    if current.is_empty() {
                        return Err(Error::Parse {
                            line,
                            msg: "empty element".into(),
                        });
                    }
                    elements.push(std::mem::take(&mut current));
                }
                "-2" => {
                    if !current.is_empty() {
                        elements.push(std::mem::take(&mut current));
                    }
                    if elements.is_empty() {
                        return Err(Error::Parse {
                            line,
                            msg: "empty sequence".into(),
                        });
                    }
                    out.push(
                        DataSequence::new(std::mem::take(&mut elements))
                            .map_err(|e| Error::Parse { line, msg: e.to_string() })?,
                    );
                }
                _ => current.push(parse_item(tok, line)?),
            }
        }
    }
    if !current.is_empty() || !elements.is_empty() {
        return Err(Error::Parse {
            line: last_line,
            msg: "sequence not terminated by -2".into(),
        });
    }
    Ok(out)
}

/// Parses a database; the universe is `universe` or the largest item seen.
pub fn parse_database(text: &str, universe: Option<u32>) -> Result<SequenceDatabase> {
    let seqs = parse_sequences(text)?;
    if seqs.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no sequences found".into(),
        });
    }
    match universe {
        Some(n) => SequenceDatabase::new(seqs, n),
        None => SequenceDatabase::from_sequences(seqs),
    }
}

pub fn read_database(path: &Path, universe: Option<u32>) -> Result<SequenceDatabase> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_database(&text, universe)
}

pub fn format_sequence(s: &DataSequence) -> String {
    let mut out = String::new();
    for e in s.elements() {
        for item in e {
            write!(out, "{item} ").unwrap();
        }
        out.push_str("-1 ");
    }
    out.push_str("-2");
    out
}

pub fn format_database(db: &SequenceDatabase) -> String {
    let mut out = String::new();
    for s in db.sequences() {
        out.push_str(&format_sequence(s));
        out.push('\n');
    }
    out
}

pub fn write_database(path: &Path, db: &SequenceDatabase) -> Result<()> {
    fs::write(path, format_database(db)).map_err(|e| Error::io(path, e))
}

pub fn format_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    for e in p.elements() {
        if e.is_negative() {
            out.push_str("! ");
        }
        for item in e.items() {
            write!(out, "{item} ").unwrap();
        }
        out.push_str("-1 ");
    }
    out.push_str("-2");
    out
}

/// Parses one pattern body (no trailing comment).
pub fn parse_pattern(body: &str, line: usize) -> Result<Pattern> {
    let mut elements = Vec::new();
    let mut items: Vec<Item> = Vec::new();
    let mut negative = false;
    let mut closed = false;
    for tok in body.split_whitespace() {
        if closed {
            return Err(Error::Parse {
                line,
                msg: format!("unexpected token {tok:?} after -2"),
            });
        }
        match tok {
            "-1" | "-2" => {
                if !items.is_empty() {
                    let polarity = if negative {
                        Polarity::Negative
                    } else {
                        Polarity::Positive
                    };
                    elements.push(
                        Element::new(std::mem::take(&mut items), polarity)
                            .map_err(|e| Error::Parse { line, msg: e.to_string() })?,
                    );
                } else if tok == "-1" || negative {
                    return Err(Error::Parse {
                        line,
                        msg: "empty element".into(),
                    });
                }
                negative = false;
                closed = tok == "-2";
            }
            "!" => {
                if !items.is_empty() || negative {
                    return Err(Error::Parse {
                        line,
                        msg: "'!' must precede the first item of an element".into(),
                    });
                }
                negative = true;
            }
            _ => {
                let tok = match tok.strip_prefix('!') {
                    Some(rest) if items.is_empty() && !negative => {
                        negative = true;
                        rest
                    }
                    Some(_) => {
                        return Err(Error::Parse {
                            line,
                            msg: "'!' must precede the first item of an element".into(),
                        })
                    }
                    None => tok,
                };
                items.push(parse_item(tok, line)?);
            }
        }
    }
    if !closed {
        return Err(Error::Parse {
            line,
            msg: "pattern not terminated by -2".into(),
        });
    }
    Pattern::new(elements).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

/// A parsed pattern file.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternFile {
    pub min_sup: Option<f64>,
    pub entries: Vec<(Pattern, Option<f64>)>,
}

impl PatternFile {
    /// Converts to a collection; every entry must carry a support.
    pub fn into_collection(self) -> Result<PatternCollection> {
        let min_sup = self.min_sup.ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing '# min_sup=' header".into(),
        })?;
        let entries = self
            .entries
            .into_iter()
            .enumerate()
            .map(|(i, (p, s))| {
                s.map(|s| (p, s)).ok_or_else(|| Error::Parse {
                    line: i + 2,
                    msg: "missing '# sup=' annotation".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PatternCollection::new(entries, min_sup)
    }
}

fn parse_kv(comment: &str, key: &str) -> Option<String> {
    comment
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .map(str::to_string)
}

pub fn parse_patterns(text: &str) -> Result<PatternFile> {
    let mut min_sup = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (body, comment) = match trimmed.find('#') {
            Some(pos) => (trimmed[..pos].trim(), Some(&trimmed[pos + 1..])),
            None => (trimmed, None),
        };
        if body.is_empty() {
            if let Some(v) = comment.and_then(|c| parse_kv(c, "min_sup")) {
                min_sup = Some(v.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad min_sup {v:?}"),
                })?);
            }
            continue;
        }
        let pattern = parse_pattern(body, line)?;
        let sup = match comment.and_then(|c| parse_kv(c, "sup")) {
            Some(v) => Some(v.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad support {v:?}"),
            })?),
            None => None,
        };
        entries.push((pattern, sup));
    }
    Ok(PatternFile { min_sup, entries })
}

pub fn read_patterns(path: &Path) -> Result<PatternFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_patterns(&text)
}

pub fn format_collection(coll: &PatternCollection) -> String {
    format_pattern_subset(coll, 0..coll.len())
}

/// Pattern file containing only the given ids of `coll`.
pub fn format_pattern_subset(
    coll: &PatternCollection,
    ids: impl IntoIterator<Item = usize>,
) -> String {
    let mut out = format!("# min_sup={}\n", coll.source_min_sup());
    for id in ids {
        writeln!(
            out,
            "{} # sup={}",
            format_pattern(coll.pattern(id)),
            coll.support(id)
        )
        .unwrap();
    }
    out
}

pub fn write_collection(path: &Path, coll: &PatternCollection) -> Result<()> {
    fs::write(path, format_collection(coll)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_spmf_sequences() {
        let text = "@CONVERTED_FROM_TEXT\n1 2 -1 3 -1 -2\n# comment\n4 -1 -2\n";
        let seqs = parse_sequences(text).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].elements(), &[vec![1, 2], vec![3]]);
        assert_eq!(seqs[1].elements(), &[vec![4]]);
    }

    #[test]
    fn sequence_parse_errors_carry_line() {
        let err = parse_sequences("1 -1 -2\n1 x -1 -2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_sequences("1 -1 -1 -2").is_err());
        assert!(parse_sequences("1 -1").is_err());
        assert!(parse_sequences("0 -1 -2").is_err());
    }

    #[test]
    fn negative_marker_forms() {
        let expected =
            Pattern::new(vec![Element::pos(&[1]), Element::neg(&[2]), Element::pos(&[3])])
                .unwrap();
        assert_eq!(parse_pattern("1 -1 ! 2 -1 3 -1 -2", 1).unwrap(), expected);
        assert_eq!(parse_pattern("1 -1 !2 -1 3 -1 -2", 1).unwrap(), expected);
        assert_eq!(format_pattern(&expected), "1 -1 ! 2 -1 3 -1 -2");
        assert!(parse_pattern("1 -1 2 ! 3 -1 -2", 1).is_err());
        assert!(parse_pattern("! 1 -1 ! 2 -1 -2", 1).is_err());
        assert!(parse_pattern("1 -1", 1).is_err());
    }

    #[test]
    fn pattern_file_header_and_supports() {
        let text = "# min_sup=0.5\n1 -1 -2 # sup=0.75\n1 -1 ! 2 -1 -2 # sup=0.5\n";
        let file = parse_patterns(text).unwrap();
        assert_eq!(file.min_sup, Some(0.5));
        let coll = file.into_collection().unwrap();
        assert_eq!(coll.len(), 2);
        assert_eq!(format_collection(&coll), text);
    }

    fn arb_pattern() -> impl Strategy<Value = Pattern> {
        let elem = (prop::collection::btree_set(1u32..20, 1..4), any::<bool>());
        prop::collection::vec(elem, 1..6).prop_filter_map("format constraints", |els| {
            let elements = els
                .into_iter()
                .map(|(items, neg)| {
                    let pol = if neg { Polarity::Negative } else { Polarity::Positive };
                    Element::new(items, pol).unwrap()
                })
                .collect();
            Pattern::new(elements).ok()
        })
    }

    proptest! {
        #[test]
        fn pattern_text_round_trips(p in arb_pattern()) {
            prop_assert_eq!(parse_pattern(&format_pattern(&p), 1).unwrap(), p);
        }

        #[test]
        fn sequence_text_round_trips(
            els in prop::collection::vec(prop::collection::btree_set(1u32..30, 1..5), 1..8)
        ) {
            let s = DataSequence::new(els.into_iter().map(|e| e.into_iter().collect()).collect()).unwrap();
            let parsed = parse_sequences(&format_sequence(&s)).unwrap();
            prop_assert_eq!(parsed, vec![s]);
        }
    }
}
