//! Greedy word-sense assignment.
//!
//! Targets are resolved simple-to-complex: ascending sense count, ties
//! left to right. Each target picks the sense whose vector has the largest
//! cosine with the context embedding — the unweighted mean over the other
//! content-word tokens, each represented by its already-assigned sense
//! vector when one exists and by its word vector otherwise. Earlier
//! decisions are visible to later ones.

use std::collections::{BTreeMap, HashSet};

use crate::embeddings::{cosine_unchecked, nearest, EmbeddingStore};
use crate::lexicon::{tokenize, Lexicon, Pos, Token};
use crate::neuralnet::{forward, ModelParams};
use crate::trainer::SenseTable;
use crate::{Error, Result, Vector};

/// A token sequence with the positions to disambiguate.
#[derive(Debug, Clone)]
pub struct ContextInstance {
    pub tokens: Vec<Token>,
    pub targets: Vec<usize>,
    /// Optional part of speech per target, parallel to `targets`. Carried
    /// for diagnostics; sense selection does not filter on it.
    pub target_pos: Vec<Option<Pos>>,
}

impl ContextInstance {
    pub fn new(tokens: Vec<Token>, targets: Vec<usize>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut seen = HashSet::new();
        for &t in &targets {
            if t >= tokens.len() {
                return Err(Error::Metric(format!(
                    "target position {t} out of range for {} tokens",
                    tokens.len()
                )));
            }
            if !seen.insert(t) {
                return Err(Error::Metric(format!("duplicate target position {t}")));
            }
        }
        let target_pos = vec![None; targets.len()];
        Ok(ContextInstance {
            tokens,
            targets,
            target_pos,
        })
    }
}

/// One step of the resolution trace, in processing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionStep {
    pub position: usize,
    /// Lexicon sense count of the token at this position (0 = unknown).
    pub sense_count: usize,
    /// Chosen sense, or `None` when the token has no lexicon entry.
    pub sense_id: Option<String>,
}

/// Output of [`s2c`]: position → sense id, plus the order things happened.
#[derive(Debug, Clone, Default)]
pub struct SenseAssignment {
    pub assigned: BTreeMap<usize, String>,
    pub trace: Vec<ResolutionStep>,
    /// Target positions whose token has no lexicon entry.
    pub unassigned: Vec<usize>,
}

/// Unweighted mean embedding of the content-word tokens at positions other
/// than `pos`. Resolved positions contribute their sense vector, the rest
/// their word vector; tokens lacking both are skipped. Zero vector when
/// nothing contributes.
pub fn context_embedding(
    inst: &ContextInstance,
    pos: usize,
    senses: &SenseTable,
    store: &EmbeddingStore,
    resolved: &SenseAssignment,
    lex: &Lexicon,
) -> Vector {
    context_mean(&inst.tokens, pos, senses, store, &resolved.assigned, lex)
}

pub(crate) fn context_mean(
    tokens: &[Token],
    pos: usize,
    senses: &SenseTable,
    store: &EmbeddingStore,
    assigned: &BTreeMap<usize, String>,
    lex: &Lexicon,
) -> Vector {
    let mut sum = Vector::zeros(store.dim());
    let mut n = 0usize;
    for (j, tok) in tokens.iter().enumerate() {
        if j == pos || !lex.is_content_word(tok) {
            continue;
        }
        let v = assigned
            .get(&j)
            .and_then(|sid| senses.get(sid))
            .or_else(|| store.get(tok));
        if let Some(v) = v {
            sum += v;
            n += 1;
        }
    }
    if n > 0 {
        sum /= n as f64;
    }
    sum
}

/// Simple-to-complex greedy assignment over the instance's targets.
/// Deterministic: cosine ties break by lexicon file order of senses, and
/// ordering ties by sentence position.
pub fn s2c(
    inst: &ContextInstance,
    lex: &Lexicon,
    senses: &SenseTable,
    store: &EmbeddingStore,
) -> SenseAssignment {
    let mut order: Vec<(usize, usize)> = inst
        .targets
        .iter()
        .map(|&pos| (lex.sense_count(&inst.tokens[pos]), pos))
        .collect();
    order.sort_unstable();

    let mut out = SenseAssignment::default();
    for (sense_count, pos) in order {
        let token = &inst.tokens[pos];
        let entries = lex.senses_of(token);
        if entries.is_empty() {
            out.unassigned.push(pos);
            out.trace.push(ResolutionStep {
                position: pos,
                sense_count: 0,
                sense_id: None,
            });
            continue;
        }
        let ctx = context_mean(&inst.tokens, pos, senses, store, &out.assigned, lex);
        let mut best: Option<(f64, &str)> = None;
        for entry in &entries {
            let score = senses
                .get(&entry.sense_id)
                .map_or(0.0, |v| cosine_unchecked(v, &ctx));
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, entry.sense_id.as_str()));
            }
        }
        let (_, sense_id) = best.expect("entries nonempty");
        out.assigned.insert(pos, sense_id.to_string());
        out.trace.push(ResolutionStep {
            position: pos,
            sense_count,
            sense_id: Some(sense_id.to_string()),
        });
    }
    out
}

/// Encode a free-text description with the trained model and rank all
/// senses by cosine with the result.
pub fn match_description(
    params: &ModelParams,
    store: &EmbeddingStore,
    senses: &SenseTable,
    text: &str,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    let tokens = tokenize(text);
    let inputs: Vec<&Vector> = tokens.iter().filter_map(|t| store.get(t)).collect();
    if inputs.is_empty() {
        return Err(Error::NoResolvableTokens);
    }
    let views: Vec<_> = inputs.iter().map(|v| v.view()).collect();
    let states = forward(params, &views)?;
    Ok(nearest(senses.iter(), &states.e_hat, k, &HashSet::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::SenseEntry;
    use crate::trainer::Provenance;

    fn tok(s: &str) -> Token {
        Token::normalize(s).unwrap()
    }

    fn toks(words: &[&str]) -> Vec<Token> {
        words.iter().map(|w| tok(w)).collect()
    }

    fn entry(id: &str, lemma: &str, gloss: &[&str]) -> SenseEntry {
        SenseEntry {
            sense_id: id.to_string(),
            lemma: tok(lemma),
            pos: Pos::Noun,
            synonyms: vec![],
            gloss: toks(gloss),
        }
    }

    /// Two-sense "bank" plus monosemous context words, d=2.
    fn bank_fixture() -> (Lexicon, SenseTable, EmbeddingStore) {
        let lex = Lexicon::from_entries(vec![
            entry("bank%1", "bank", &["money", "institution"]),
            entry("bank%2", "bank", &["land", "river"]),
            entry("water%1", "water", &["clear", "liquid"]),
            entry("river%1", "river", &["a", "stream"]),
        ])
        .unwrap();

        let mut senses = SenseTable::new(2);
        senses
            .insert(
                "bank%1".into(),
                Vector::from_vec(vec![1.0, 0.0]),
                Provenance::Fallback,
            )
            .unwrap();
        senses
            .insert(
                "bank%2".into(),
                Vector::from_vec(vec![0.0, 1.0]),
                Provenance::Fallback,
            )
            .unwrap();
        senses
            .insert(
                "water%1".into(),
                Vector::from_vec(vec![0.1, 0.9]),
                Provenance::OwnWord,
            )
            .unwrap();
        senses
            .insert(
                "river%1".into(),
                Vector::from_vec(vec![0.2, 0.8]),
                Provenance::OwnWord,
            )
            .unwrap();

        let store = EmbeddingStore::from_pairs(
            2,
            vec![
                (tok("water"), Vector::from_vec(vec![0.1, 0.9])),
                (tok("river"), Vector::from_vec(vec![0.2, 0.8])),
                (tok("bank"), Vector::from_vec(vec![0.7, 0.3])),
                (tok("the"), Vector::from_vec(vec![0.5, 0.5])),
            ],
        )
        .unwrap();

        (lex, senses, store)
    }

    #[test]
    fn context_embedding_is_plain_mean() {
        let (lex, senses, store) = bank_fixture();
        // "bank water river": context of position 0 = mean([0.1,0.9],[0.2,0.8])
        let inst = ContextInstance::new(toks(&["bank", "water", "river"]), vec![0]).unwrap();
        let ctx = context_embedding(&inst, 0, &senses, &store, &SenseAssignment::default(), &lex);
        assert!((ctx[0] - 0.15).abs() < 1e-12);
        assert!((ctx[1] - 0.85).abs() < 1e-12);
    }

    #[test]
    fn context_embedding_all_stopwords_is_zero() {
        let (lex, senses, store) = bank_fixture();
        let inst = ContextInstance::new(toks(&["bank", "the", "the"]), vec![0]).unwrap();
        let ctx = context_embedding(&inst, 0, &senses, &store, &SenseAssignment::default(), &lex);
        assert!(ctx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn context_embedding_prefers_resolved_sense_vector() {
        let (lex, senses, store) = bank_fixture();
        let inst = ContextInstance::new(toks(&["water", "bank"]), vec![0]).unwrap();
        let mut resolved = SenseAssignment::default();
        resolved.assigned.insert(1, "bank%2".to_string());
        let ctx = context_embedding(&inst, 0, &senses, &store, &resolved, &lex);
        // bank resolved to sense 2 → its sense vector [0,1], not word vector [0.7,0.3]
        assert!((ctx[0] - 0.0).abs() < 1e-12);
        assert!((ctx[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s2c_assigns_monosemous_targets_unconditionally() {
        let (lex, senses, store) = bank_fixture();
        let inst = ContextInstance::new(toks(&["water", "river"]), vec![0, 1]).unwrap();
        let got = s2c(&inst, &lex, &senses, &store);
        assert_eq!(got.assigned[&0], "water%1");
        assert_eq!(got.assigned[&1], "river%1");
        assert!(got.unassigned.is_empty());
    }

    #[test]
    fn s2c_picks_argmax_sense_by_hand_values() {
        let (lex, senses, store) = bank_fixture();
        // context mean = mean(water, river vectors) = [0.15, 0.85]:
        // cos(bank2, ctx) > cos(bank1, ctx)
        let inst = ContextInstance::new(toks(&["bank", "water", "river"]), vec![0]).unwrap();
        let got = s2c(&inst, &lex, &senses, &store);
        assert_eq!(got.assigned[&0], "bank%2");

        // the exact two-cosine hand check from a [0.1, 0.9] context
        let ctx = Vector::from_vec(vec![0.1, 0.9]);
        let b1 = Vector::from_vec(vec![1.0, 0.0]);
        let b2 = Vector::from_vec(vec![0.0, 1.0]);
        let c1 = crate::embeddings::cosine(&b1, &ctx).unwrap();
        let c2 = crate::embeddings::cosine(&b2, &ctx).unwrap();
        assert!((c1 - 0.110).abs() < 5e-4);
        assert!((c2 - 0.994).abs() < 5e-4);
        assert!(c2 > c1);
    }

    #[test]
    fn s2c_zero_context_ties_break_by_file_order() {
        let (lex, senses, store) = bank_fixture();
        // no content context at all → zero context vector → all cosines 0
        let inst = ContextInstance::new(toks(&["bank", "the"]), vec![0]).unwrap();
        let got = s2c(&inst, &lex, &senses, &store);
        assert_eq!(got.assigned[&0], "bank%1");
    }

    #[test]
    fn s2c_marks_unknown_tokens_unassigned() {
        let (lex, senses, store) = bank_fixture();
        let inst = ContextInstance::new(toks(&["qwerty", "water"]), vec![0, 1]).unwrap();
        let got = s2c(&inst, &lex, &senses, &store);
        assert_eq!(got.unassigned, vec![0]);
        assert_eq!(got.assigned[&1], "water%1");
    }

    #[test]
    fn s2c_trace_is_sorted_by_sense_count_then_position() {
        let (lex, senses, store) = bank_fixture();
        let inst =
            ContextInstance::new(toks(&["bank", "water", "river", "bank"]), vec![3, 0, 1, 2])
                .unwrap();
        let got = s2c(&inst, &lex, &senses, &store);
        let keys: Vec<(usize, usize)> = got
            .trace
            .iter()
            .map(|s| (s.sense_count, s.position))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        // monosemous words resolved before the two bank positions
        assert_eq!(got.trace[0].position, 1);
        assert_eq!(got.trace[1].position, 2);
    }

    #[test]
    fn s2c_is_deterministic() {
        let (lex, senses, store) = bank_fixture();
        let inst = ContextInstance::new(toks(&["bank", "water", "river"]), vec![0, 1, 2]).unwrap();
        let a = s2c(&inst, &lex, &senses, &store);
        let b = s2c(&inst, &lex, &senses, &store);
        assert_eq!(a.assigned, b.assigned);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn s2c_result_survives_sense_order_permutation_when_untied() {
        let (_, senses, store) = bank_fixture();
        // same lexicon but bank senses listed in the opposite order
        let lex = Lexicon::from_entries(vec![
            entry("bank%2", "bank", &["land", "river"]),
            entry("bank%1", "bank", &["money", "institution"]),
            entry("water%1", "water", &["clear", "liquid"]),
            entry("river%1", "river", &["a", "stream"]),
        ])
        .unwrap();
        let inst = ContextInstance::new(toks(&["bank", "water", "river"]), vec![0]).unwrap();
        let got = s2c(&inst, &lex, &senses, &store);
        assert_eq!(got.assigned[&0], "bank%2");
    }

    #[test]
    fn match_description_rejects_unresolvable_text() {
        let (_, senses, store) = bank_fixture();
        let params = crate::neuralnet::init_params(crate::neuralnet::CellKind::Gru, 2, 2, 2, 1);
        let err = match_description(&params, &store, &senses, "zzz qqq", 3).unwrap_err();
        assert!(matches!(err, Error::NoResolvableTokens));
    }

    #[test]
    fn match_description_k_zero_is_empty() {
        let (_, senses, store) = bank_fixture();
        let params = crate::neuralnet::init_params(crate::neuralnet::CellKind::Gru, 2, 2, 2, 1);
        let got = match_description(&params, &store, &senses, "the water", 0).unwrap();
        assert!(got.is_empty());
    }
}
