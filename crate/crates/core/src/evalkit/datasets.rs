//! Evaluation dataset loaders.
//!
//! * word-similarity CSV: `word1,word2,score`, optional header line;
//! * contextual-similarity TSV: tab-separated
//!   `id, word1, pos1, word2, pos2, context1, context2, mean_rating, ...`
//!   where each context marks its target as `<b>word</b>`;
//! * WSD key / cluster map / sense map: whitespace-separated pairs, one
//!   per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::lexicon::{tokenize, Pos, Token};
use crate::{Error, Result};

use super::{MarkedContext, SimilarityPair};

pub fn load_wordsim_csv(path: &Path) -> Result<Vec<SimilarityPair>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(Error::parse(path, line_no, "expected word1,word2,score"));
        }
        let gold: f64 = match fields[2].parse() {
            Ok(v) => v,
            Err(_) if line_no == 1 => continue, // header
            Err(_) => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("non-numeric score {:?}", fields[2]),
                ))
            }
        };
        let word1 = Token::normalize(fields[0])
            .ok_or_else(|| Error::parse(path, line_no, "empty word1"))?;
        let word2 = Token::normalize(fields[1])
            .ok_or_else(|| Error::parse(path, line_no, "empty word2"))?;
        pairs.push(SimilarityPair {
            word1,
            word2,
            pos1: None,
            pos2: None,
            gold,
            context1: None,
            context2: None,
        });
    }
    if pairs.is_empty() {
        return Err(Error::parse(path, 1, "no pairs in file"));
    }
    Ok(pairs)
}

pub fn load_scws_tsv(path: &Path) -> Result<Vec<SimilarityPair>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 8 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected ≥8 tab-separated fields, got {}", fields.len()),
            ));
        }
        let word1 = Token::normalize(fields[1])
            .ok_or_else(|| Error::parse(path, line_no, "empty word1"))?;
        let word2 = Token::normalize(fields[3])
            .ok_or_else(|| Error::parse(path, line_no, "empty word2"))?;
        let gold: f64 = fields[7].parse().map_err(|_| {
            Error::parse(path, line_no, format!("non-numeric rating {:?}", fields[7]))
        })?;
        let context1 = parse_marked(fields[5]);
        let context2 = parse_marked(fields[6]);
        if context1.is_none() || context2.is_none() {
            log::warn!("{}:{line_no}: context without <b>...</b> marker", path.display());
        }
        pairs.push(SimilarityPair {
            word1,
            word2,
            pos1: Pos::from_code(&fields[2].to_lowercase()),
            pos2: Pos::from_code(&fields[4].to_lowercase()),
            gold,
            context1,
            context2,
        });
    }
    if pairs.is_empty() {
        return Err(Error::parse(path, 1, "no pairs in file"));
    }
    Ok(pairs)
}

/// Extract the `<b>...</b>`-marked target from a raw context string.
/// Marker parsing happens before tokenization so the angle brackets never
/// reach the tokenizer.
pub fn parse_marked(text: &str) -> Option<MarkedContext> {
    let start = text.find("<b>")?;
    let rest = &text[start + 3..];
    let end = rest.find("</b>")?;
    let target_text = &rest[..end];
    let pre = &text[..start];
    let post = &rest[end + 4..];

    let mut tokens = tokenize(pre);
    let target_tokens = tokenize(target_text);
    if target_tokens.is_empty() {
        return None;
    }
    let target = tokens.len();
    tokens.extend(target_tokens);
    tokens.extend(tokenize(post));
    Some(MarkedContext { tokens, target })
}

/// `instance_id sense_id` per line; extra whitespace-separated fields are
/// ignored. Later duplicates of an instance id win, with a warning.
pub fn load_wsd_key(path: &Path) -> Result<HashMap<String, String>> {
    load_pair_lines(path, "instance_id sense_id")
}

/// `sense_id cluster_id` per line.
pub fn load_cluster_map(path: &Path) -> Result<HashMap<String, String>> {
    load_pair_lines(path, "sense_id cluster_id")
}

/// `sense_id sense_id` substitution lines, applied to predictions.
pub fn load_sense_map(path: &Path) -> Result<HashMap<String, String>> {
    load_pair_lines(path, "sense_id sense_id")
}

fn load_pair_lines(path: &Path, what: &str) -> Result<HashMap<String, String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(path, line_no, format!("expected {what}")));
        };
        if map.insert(a.to_string(), b.to_string()).is_some() {
            log::warn!("{}:{line_no}: duplicate entry for {a}; keeping the last", path.display());
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{contents}").unwrap();
        f
    }

    #[test]
    fn wordsim_header_detected_and_parsed() {
        let f = write_file("Word 1,Word 2,Human (mean)\ntiger,cat,7.35\nbook,paper,7.46\n");
        let pairs = load_wordsim_csv(f.path()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].word1.as_str(), "tiger");
        assert!((pairs[0].gold - 7.35).abs() < 1e-12);
    }

    #[test]
    fn wordsim_headerless_works_too() {
        let f = write_file("tiger,cat,7.35\n");
        let pairs = load_wordsim_csv(f.path()).unwrap();
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn wordsim_bad_score_reports_line() {
        let f = write_file("tiger,cat,7.35\nbook,paper,seven\n");
        match load_wordsim_csv(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scws_row_parses_contexts_and_targets() {
        let row = "1\tbank\tn\tmoney\tn\tI sat on the <b>bank</b> of the river.\tShe deposited <b>money</b> yesterday.\t5.5\t6\t5\n";
        let f = write_file(row);
        let pairs = load_scws_tsv(f.path()).unwrap();
        assert_eq!(pairs.len(), 1);
        let c1 = pairs[0].context1.as_ref().unwrap();
        assert_eq!(c1.tokens[c1.target].as_str(), "bank");
        assert_eq!(c1.target, 4);
        let c2 = pairs[0].context2.as_ref().unwrap();
        assert_eq!(c2.tokens[c2.target].as_str(), "money");
        assert_eq!(pairs[0].pos1, Some(Pos::Noun));
        assert!((pairs[0].gold - 5.5).abs() < 1e-12);
    }

    #[test]
    fn marked_target_at_ends() {
        let c = parse_marked("<b>alpha</b> beta").unwrap();
        assert_eq!(c.target, 0);
        let c = parse_marked("beta <b>alpha</b>").unwrap();
        assert_eq!(c.target, 1);
        assert!(parse_marked("no marker here").is_none());
    }

    #[test]
    fn key_and_cluster_files_parse() {
        let f = write_file("d001.s001.t001 bank%1 !! extra comment\nd001.s002.t002 star%2\n");
        let key = load_wsd_key(f.path()).unwrap();
        assert_eq!(key.len(), 2);
        assert_eq!(key["d001.s001.t001"], "bank%1");

        let f = write_file("bank%1 c1\nbank%2 c1\n");
        let clusters = load_cluster_map(f.path()).unwrap();
        assert_eq!(clusters["bank%2"], "c1");
    }
}
