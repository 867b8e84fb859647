//! Sense-embedding initialization.
//!
//! For each sense, in lexicon order:
//!
//! 1. monosemous lemma with a word vector → its own word vector;
//! 2. otherwise (multi-sense), the first listed synonym that is monosemous
//!    as a lemma and has a word vector → that synonym's word vector;
//! 3. otherwise, the gloss token (content word or not) whose word vector
//!    has the largest cosine with the lemma's word vector, used only when
//!    that cosine exceeds the threshold;
//! 4. otherwise the lemma's own word vector;
//! 5. senses whose lemma has no word vector and no qualifying source start
//!    at zero, are logged, and stay untrained.

use crate::embeddings::{cosine_unchecked, EmbeddingStore};
use crate::lexicon::{Lexicon, SenseEntry};
use crate::Vector;

use super::{Provenance, SenseTable};

pub fn init_sense_embeddings(lex: &Lexicon, store: &EmbeddingStore, threshold: f64) -> SenseTable {
    let mut table = SenseTable::new(store.dim());
    for entry in lex.entries() {
        let (vector, tag) = init_one(lex, store, threshold, entry);
        table
            .insert(entry.sense_id.clone(), vector, tag)
            .expect("lexicon guarantees unique sense ids and uniform dims");
    }
    let counts = table.tag_counts();
    if counts.zero_init > 0 {
        log::warn!(
            "{} senses have no vector source and were initialized to zero; they will not be trained",
            counts.zero_init
        );
    }
    log::info!(
        "initialized {} senses: {} own-word, {} mono-synonym, {} gloss-word, {} fallback, {} zero",
        table.len(),
        counts.own_word,
        counts.mono_synonym,
        counts.gloss_word,
        counts.fallback,
        counts.zero_init
    );
    table
}

fn init_one(
    lex: &Lexicon,
    store: &EmbeddingStore,
    threshold: f64,
    entry: &SenseEntry,
) -> (Vector, Provenance) {
    let lemma_vec = store.get(&entry.lemma);

    if lex.is_monosemous(&entry.lemma) {
        if let Some(v) = lemma_vec {
            return (v.clone(), Provenance::OwnWord);
        }
    } else {
        for syn in &entry.synonyms {
            if lex.sense_count(syn) == 1 {
                if let Some(v) = store.get(syn) {
                    return (v.clone(), Provenance::MonoSynonym);
                }
            }
        }
    }

    if let Some(lv) = lemma_vec {
        let mut best: Option<(f64, &Vector)> = None;
        for tok in &entry.gloss {
            if let Some(tv) = store.get(tok) {
                let c = cosine_unchecked(tv, lv);
                if best.is_none_or(|(bc, _)| c > bc) {
                    best = Some((c, tv));
                }
            }
        }
        if let Some((c, tv)) = best {
            if c > threshold {
                return (tv.clone(), Provenance::GlossWord);
            }
        }
        return (lv.clone(), Provenance::Fallback);
    }

    log::warn!(
        "sense {} ({}): no word vector and no qualifying source; zero-initialized",
        entry.sense_id,
        entry.lemma
    );
    (Vector::zeros(store.dim()), Provenance::ZeroInit)
}
