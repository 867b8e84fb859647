use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vector};

/// Where a sense vector's initial value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Monosemous lemma: its own word vector.
    OwnWord,
    /// First listed synonym that is monosemous and has a word vector.
    MonoSynonym,
    /// Gloss token most similar to the lemma's word vector, above threshold.
    GlossWord,
    /// The lemma's own word vector, when nothing better qualified.
    Fallback,
    /// No usable source; starts at zero and is never trained.
    ZeroInit,
}

/// Counts per provenance tag, reported by the initializer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TagCounts {
    pub own_word: usize,
    pub mono_synonym: usize,
    pub gloss_word: usize,
    pub fallback: usize,
    pub zero_init: usize,
}

/// The trainable output of the system: one vector per sense id, in lexicon
/// entry order, with its provenance tag.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseTable {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vector>,
    tags: Vec<Provenance>,
    index: HashMap<String, usize>,
}

impl SenseTable {
    pub fn new(dim: usize) -> Self {
        SenseTable {
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
            tags: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_parts(
        dim: usize,
        ids: Vec<String>,
        vectors: Vec<Vector>,
        tags: Vec<Provenance>,
    ) -> Result<Self> {
        if ids.len() != vectors.len() || ids.len() != tags.len() {
            return Err(Error::Checkpoint("sense table parts disagree in length".into()));
        }
        let mut table = SenseTable::new(dim);
        for ((id, v), tag) in ids.into_iter().zip(vectors).zip(tags) {
            table.insert(id, v, tag)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, id: String, vector: Vector, tag: Provenance) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateSenseId {
                path: "<sense table>".into(),
                id,
                line: self.ids.len() + 1,
            });
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.vectors.push(vector);
        self.tags.push(tag);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Vector> {
        self.index_of(id).map(|i| &self.vectors[i])
    }

    pub fn tag_of(&self, id: &str) -> Option<Provenance> {
        self.index_of(id).map(|i| self.tags[i])
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.ids[idx]
    }

    pub fn vector(&self, idx: usize) -> &Vector {
        &self.vectors[idx]
    }

    pub fn vector_mut(&mut self, idx: usize) -> &mut Vector {
        &mut self.vectors[idx]
    }

    pub fn tag(&self, idx: usize) -> Provenance {
        self.tags[idx]
    }

    /// True iff the sense vector is exactly zero (untrainable by the
    /// cosine-of-zero convention).
    pub fn is_zero(&self, idx: usize) -> bool {
        self.vectors[idx].iter().all(|v| *v == 0.0)
    }

    /// Iterate `(id, vector)` in insertion (lexicon entry) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Vector)> {
        self.ids.iter().map(|s| s.as_str()).zip(self.vectors.iter())
    }

    pub fn tag_counts(&self) -> TagCounts {
        let mut c = TagCounts::default();
        for tag in &self.tags {
            match tag {
                Provenance::OwnWord => c.own_word += 1,
                Provenance::MonoSynonym => c.mono_synonym += 1,
                Provenance::GlossWord => c.gloss_word += 1,
                Provenance::Fallback => c.fallback += 1,
                Provenance::ZeroInit => c.zero_init += 1,
            }
        }
        c
    }

    /// Bit pattern of every stored value, for byte-level comparisons in
    /// tests and integrity checks.
    pub fn bit_fingerprint(&self) -> Vec<u64> {
        self.vectors
            .iter()
            .flat_map(|v| v.iter().map(|x| x.to_bits()))
            .collect()
    }
}
