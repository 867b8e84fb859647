//! Sense inventory: lemmas, senses, synonyms, and tokenized glosses.
//!
//! The on-disk format is UTF-8 JSON lines, one object per line:
//!
//! ```text
//! {"sense_id": "bank%1", "lemma": "bank", "pos": "n",
//!  "synonyms": ["depository_financial_institution"],
//!  "gloss": "a financial institution that accepts deposits"}
//! ```
//!
//! `pos` is one of `n`, `v`, `a`, `r` (noun/verb/adjective/adverb) or `x`
//! for anything else. Records whose gloss tokenizes to nothing are skipped
//! with a warning; their senses simply do not exist in the loaded lexicon.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lowercase token with no internal whitespace. Multi-word lemmas are
/// stored with underscores, matching common pretrained-vector conventions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    /// Normalize one word: trim, lowercase, join internal whitespace runs
    /// with underscores. Returns `None` for empty or whitespace-only input.
    pub fn normalize(raw: &str) -> Option<Token> {
        let lowered = raw.trim().to_lowercase();
        if lowered.is_empty() {
            return None;
        }
        let joined = lowered.split_whitespace().collect::<Vec<_>>().join("_");
        Some(Token(joined))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation
/// from each piece, drop pieces that end up empty. Internal punctuation
/// (hyphens, apostrophes) survives.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|piece| {
            let lowered = piece.to_lowercase();
            let stripped = lowered.trim_matches(|c: char| c.is_ascii_punctuation());
            if stripped.is_empty() {
                None
            } else {
                Some(Token(stripped.to_string()))
            }
        })
        .collect()
}

/// Part of speech. Only the four content classes matter for context
/// embeddings; everything else is `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl Pos {
    pub fn from_code(code: &str) -> Option<Pos> {
        match code {
            "n" => Some(Pos::Noun),
            "v" => Some(Pos::Verb),
            "a" => Some(Pos::Adj),
            "r" => Some(Pos::Adv),
            "x" => Some(Pos::Other),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adj => "a",
            Pos::Adv => "r",
            Pos::Other => "x",
        }
    }

    pub fn is_content(self) -> bool {
        !matches!(self, Pos::Other)
    }
}

/// One word sense: a lemma, its synset co-members, and the tokenized gloss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SenseEntry {
    pub sense_id: String,
    pub lemma: Token,
    pub pos: Pos,
    /// Co-members of the synset, excluding the lemma itself.
    pub synonyms: Vec<Token>,
    /// Tokenized definition; never empty for an entry that made it into
    /// the lexicon.
    pub gloss: Vec<Token>,
}

/// Immutable sense inventory with lemma and id indexes. Safe to share
/// across threads once loaded.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<SenseEntry>,
    by_lemma: HashMap<Token, Vec<usize>>,
    by_id: HashMap<String, usize>,
    content_lemmas: HashSet<Token>,
    skipped_empty_gloss: usize,
}

#[derive(Deserialize)]
struct RawEntry {
    sense_id: String,
    lemma: String,
    pos: String,
    synonyms: Vec<String>,
    gloss: String,
}

impl Lexicon {
    /// Load a JSON-lines inventory file. Blank lines are ignored; records
    /// with empty glosses are skipped with a warning; malformed lines and
    /// duplicate sense ids are fatal.
    pub fn load(path: &Path) -> Result<Lexicon> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);

        let mut entries = Vec::new();
        let mut seen_ids: HashMap<String, usize> = HashMap::new();
        let mut skipped = 0usize;

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawEntry = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path, line_no, e.to_string()))?;

            if raw.sense_id.is_empty() || raw.sense_id.contains(char::is_whitespace) {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("invalid sense_id {:?}", raw.sense_id),
                ));
            }
            if let Some(first) = seen_ids.get(&raw.sense_id) {
                log::debug!("sense id first seen on line {first}");
                return Err(Error::DuplicateSenseId {
                    path: path.to_path_buf(),
                    id: raw.sense_id,
                    line: line_no,
                });
            }

            let pos = Pos::from_code(&raw.pos)
                .ok_or_else(|| Error::parse(path, line_no, format!("unknown pos {:?}", raw.pos)))?;
            let lemma = Token::normalize(&raw.lemma)
                .ok_or_else(|| Error::parse(path, line_no, "empty lemma"))?;

            let gloss = tokenize(&raw.gloss);
            if gloss.is_empty() {
                log::warn!(
                    "{}:{line_no}: gloss of {} tokenizes to nothing; record skipped",
                    path.display(),
                    raw.sense_id
                );
                skipped += 1;
                continue;
            }

            let synonyms: Vec<Token> = raw
                .synonyms
                .iter()
                .filter_map(|s| Token::normalize(s))
                .filter(|s| *s != lemma)
                .collect();

            seen_ids.insert(raw.sense_id.clone(), line_no);
            entries.push(SenseEntry {
                sense_id: raw.sense_id,
                lemma,
                pos,
                synonyms,
                gloss,
            });
        }

        let mut lex = Self::from_entries(entries)?;
        lex.skipped_empty_gloss = skipped;
        log::info!(
            "loaded lexicon: {} senses, {} lemmas ({} empty-gloss records skipped)",
            lex.len(),
            lex.lemma_count(),
            skipped
        );
        Ok(lex)
    }

    /// Build a lexicon from pre-tokenized entries, indexing them in the
    /// given order. Fails on duplicate sense ids or empty glosses.
    pub fn from_entries(entries: Vec<SenseEntry>) -> Result<Lexicon> {
        let mut by_lemma: HashMap<Token, Vec<usize>> = HashMap::new();
        let mut by_id: HashMap<String, usize> = HashMap::new();
        let mut content_lemmas: HashSet<Token> = HashSet::new();

        for (i, entry) in entries.iter().enumerate() {
            if entry.gloss.is_empty() {
                return Err(Error::Metric(format!(
                    "entry {} has an empty gloss",
                    entry.sense_id
                )));
            }
            if by_id.insert(entry.sense_id.clone(), i).is_some() {
                return Err(Error::DuplicateSenseId {
                    path: "<entries>".into(),
                    id: entry.sense_id.clone(),
                    line: i + 1,
                });
            }
            by_lemma.entry(entry.lemma.clone()).or_default().push(i);
            if entry.pos.is_content() {
                content_lemmas.insert(entry.lemma.clone());
            }
        }

        Ok(Lexicon {
            entries,
            by_lemma,
            by_id,
            content_lemmas,
            skipped_empty_gloss: 0,
        })
    }

    pub fn entries(&self) -> &[SenseEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct lemmas.
    pub fn lemma_count(&self) -> usize {
        self.by_lemma.len()
    }

    pub fn skipped_empty_gloss(&self) -> usize {
        self.skipped_empty_gloss
    }

    /// All senses of a lemma, in file order. Empty if the lemma is unknown.
    pub fn senses_of(&self, lemma: &Token) -> Vec<&SenseEntry> {
        self.by_lemma
            .get(lemma)
            .map(|ids| ids.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    pub fn sense_count(&self, lemma: &Token) -> usize {
        self.by_lemma.get(lemma).map_or(0, |ids| ids.len())
    }

    pub fn is_monosemous(&self, lemma: &Token) -> bool {
        self.sense_count(lemma) == 1
    }

    /// Exactly the lemmas with one sense.
    pub fn monosemous_words(&self) -> HashSet<Token> {
        self.by_lemma
            .iter()
            .filter(|(_, ids)| ids.len() == 1)
            .map(|(lemma, _)| lemma.clone())
            .collect()
    }

    /// True iff the token has any entry with a content part of speech
    /// (noun, verb, adjective, adverb).
    pub fn is_content_word(&self, t: &Token) -> bool {
        self.content_lemmas.contains(t)
    }

    pub fn entry_by_id(&self, sense_id: &str) -> Option<&SenseEntry> {
        self.by_id.get(sense_id).map(|&i| &self.entries[i])
    }

    pub fn entry_index(&self, sense_id: &str) -> Option<usize> {
        self.by_id.get(sense_id).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
    }

    #[test]
    fn tokenize_strips_boundary_punctuation() {
        let toks: Vec<_> = tokenize("A large, natural stream.")
            .into_iter()
            .map(|t| t.as_str().to_string())
            .collect();
        assert_eq!(toks, ["a", "large", "natural", "stream"]);
    }

    #[test]
    fn tokenize_keeps_internal_hyphen() {
        let toks = tokenize("Self-evident");
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].as_str(), "self-evident");
    }

    #[test]
    fn tokenize_drops_pure_punctuation() {
        let toks: Vec<_> = tokenize("well -- (yes)")
            .into_iter()
            .map(|t| t.as_str().to_string())
            .collect();
        assert_eq!(toks, ["well", "yes"]);
    }

    #[test]
    fn normalize_joins_multiword() {
        let t = Token::normalize("  Depository  Financial Institution ").unwrap();
        assert_eq!(t.as_str(), "depository_financial_institution");
        assert!(Token::normalize("   ").is_none());
    }

    fn fixture() -> Lexicon {
        let f = write_lines(&[
            r#"{"sense_id":"bank%1","lemma":"bank","pos":"n","synonyms":["depository"],"gloss":"a financial institution"}"#,
            r#"{"sense_id":"bank%2","lemma":"bank","pos":"n","synonyms":[],"gloss":"sloping land beside a river"}"#,
            r#"{"sense_id":"river%1","lemma":"river","pos":"n","synonyms":[],"gloss":"a large natural stream"}"#,
        ]);
        Lexicon::load(f.path()).unwrap()
    }

    #[test]
    fn load_counts() {
        let lex = fixture();
        assert_eq!(lex.len(), 3);
        assert_eq!(lex.lemma_count(), 2);
        assert_eq!(lex.skipped_empty_gloss(), 0);
    }

    #[test]
    fn load_missing_field_reports_line() {
        let f = write_lines(&[
            r#"{"sense_id":"a%1","lemma":"a","pos":"n","synonyms":[],"gloss":"x y"}"#,
            r#"{"sense_id":"b%1","lemma":"b","pos":"n","synonyms":[]}"#,
        ]);
        let err = Lexicon::load(f.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_duplicate_sense_id() {
        let f = write_lines(&[
            r#"{"sense_id":"bank%1","lemma":"bank","pos":"n","synonyms":[],"gloss":"one"}"#,
            r#"{"sense_id":"bank%1","lemma":"bank","pos":"n","synonyms":[],"gloss":"two"}"#,
        ]);
        let err = Lexicon::load(f.path()).unwrap_err();
        match err {
            Error::DuplicateSenseId { id, line, .. } => {
                assert_eq!(id, "bank%1");
                assert_eq!(line, 2);
            }
            other => panic!("expected duplicate id error, got {other:?}"),
        }
    }

    #[test]
    fn load_skips_empty_gloss_records() {
        let f = write_lines(&[
            r#"{"sense_id":"a%1","lemma":"a","pos":"n","synonyms":[],"gloss":"real words"}"#,
            r#"{"sense_id":"b%1","lemma":"b","pos":"n","synonyms":[],"gloss":"..."}"#,
        ]);
        let lex = Lexicon::load(f.path()).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.skipped_empty_gloss(), 1);
        assert!(lex.entry_by_id("b%1").is_none());
    }

    #[test]
    fn load_rejects_unknown_pos() {
        let f =
            write_lines(&[r#"{"sense_id":"a%1","lemma":"a","pos":"q","synonyms":[],"gloss":"x"}"#]);
        assert!(matches!(
            Lexicon::load(f.path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn senses_of_preserves_file_order() {
        let lex = fixture();
        let bank = Token::normalize("bank").unwrap();
        let senses = lex.senses_of(&bank);
        assert_eq!(senses.len(), 2);
        assert_eq!(senses[0].sense_id, "bank%1");
        assert_eq!(senses[1].sense_id, "bank%2");

        let unknown = Token::normalize("zzz").unwrap();
        assert!(lex.senses_of(&unknown).is_empty());

        let river = Token::normalize("river").unwrap();
        assert_eq!(lex.senses_of(&river).len(), 1);
    }

    #[test]
    fn monosemous_words_matches_definition() {
        let lex = fixture();
        let mono = lex.monosemous_words();
        assert_eq!(mono.len(), 1);
        assert!(mono.contains(&Token::normalize("river").unwrap()));

        // Exhaustive scan agrees.
        for entry in lex.entries() {
            let expected = lex.senses_of(&entry.lemma).len() == 1;
            assert_eq!(mono.contains(&entry.lemma), expected);
        }
    }

    #[test]
    fn adding_second_sense_removes_monosemy() {
        let f = write_lines(&[
            r#"{"sense_id":"river%1","lemma":"river","pos":"n","synonyms":[],"gloss":"a stream"}"#,
            r#"{"sense_id":"river%2","lemma":"river","pos":"n","synonyms":[],"gloss":"a casino term"}"#,
        ]);
        let lex = Lexicon::load(f.path()).unwrap();
        assert!(lex.monosemous_words().is_empty());
    }

    #[test]
    fn content_word_requires_content_pos() {
        let f = write_lines(&[
            r#"{"sense_id":"river%1","lemma":"river","pos":"n","synonyms":[],"gloss":"a stream"}"#,
            r#"{"sense_id":"of%1","lemma":"of","pos":"x","synonyms":[],"gloss":"function word"}"#,
        ]);
        let lex = Lexicon::load(f.path()).unwrap();
        assert!(lex.is_content_word(&Token::normalize("river").unwrap()));
        assert!(!lex.is_content_word(&Token::normalize("of").unwrap()));
        assert!(!lex.is_content_word(&Token::normalize("the").unwrap()));
    }

    #[test]
    fn synonyms_exclude_lemma() {
        let f = write_lines(&[
            r#"{"sense_id":"a%1","lemma":"cat","pos":"n","synonyms":["cat","feline"],"gloss":"a small animal"}"#,
        ]);
        let lex = Lexicon::load(f.path()).unwrap();
        let entry = lex.entry_by_id("a%1").unwrap();
        assert_eq!(entry.synonyms.len(), 1);
        assert_eq!(entry.synonyms[0].as_str(), "feline");
    }

    #[test]
    fn reload_roundtrips_ids_and_counts() {
        let lex = fixture();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for e in lex.entries() {
            let obj = serde_json::json!({
                "sense_id": e.sense_id,
                "lemma": e.lemma.as_str(),
                "pos": e.pos.code(),
                "synonyms": e.synonyms.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                "gloss": e.gloss.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" "),
            });
            writeln!(f, "{obj}").unwrap();
        }
        let reloaded = Lexicon::load(f.path()).unwrap();
        assert_eq!(reloaded.len(), lex.len());
        for e in lex.entries() {
            assert!(reloaded.entry_by_id(&e.sense_id).is_some());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tokenize_idempotent(s in ".{0,80}") {
                let once = tokenize(&s);
                let joined = once.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ");
                let twice = tokenize(&joined);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn tokens_are_nonempty_without_whitespace(s in ".{0,80}") {
                for t in tokenize(&s) {
                    prop_assert!(!t.as_str().is_empty());
                    prop_assert!(!t.as_str().contains(char::is_whitespace));
                }
            }
        }
    }
}
