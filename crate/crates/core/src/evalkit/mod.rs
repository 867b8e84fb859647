//! Quantitative evaluation: Spearman rank correlation, context-free
//! weighted similarity over sense pairs, contextual similarity via greedy
//! disambiguation, and cluster-aware WSD scoring.

pub mod datasets;

use std::collections::HashMap;

use serde::Serialize;

use crate::disambig::{s2c, ContextInstance};
use crate::embeddings::{cosine, EmbeddingStore};
use crate::exec;
use crate::lexicon::{Lexicon, Pos, Token};
use crate::trainer::SenseTable;
use crate::{Error, Result, Vector};

/// One dataset row: a word pair with a human score, optionally with
/// marked contexts for the contextual protocol.
#[derive(Debug, Clone)]
pub struct SimilarityPair {
    pub word1: Token,
    pub word2: Token,
    pub pos1: Option<Pos>,
    pub pos2: Option<Pos>,
    pub gold: f64,
    pub context1: Option<MarkedContext>,
    pub context2: Option<MarkedContext>,
}

/// A tokenized context with the target position marked.
#[derive(Debug, Clone)]
pub struct MarkedContext {
    pub tokens: Vec<Token>,
    pub target: usize,
}

/// Gold answers for a WSD task plus the sense clustering (identity when a
/// sense has no cluster entry).
#[derive(Debug, Clone, Default)]
pub struct WsdKey {
    gold: HashMap<String, String>,
    clusters: HashMap<String, String>,
}

impl WsdKey {
    pub fn new(gold: HashMap<String, String>) -> Self {
        WsdKey {
            gold,
            clusters: HashMap::new(),
        }
    }

    pub fn with_clusters(mut self, clusters: HashMap<String, String>) -> Self {
        self.clusters = clusters;
        self
    }

    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }

    pub fn gold(&self) -> &HashMap<String, String> {
        &self.gold
    }

    pub fn cluster_of<'s>(&'s self, sense: &'s str) -> &'s str {
        self.clusters.get(sense).map(String::as_str).unwrap_or(sense)
    }
}

/// Metric name, score, and per-item diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub metric: String,
    pub score: f64,
    pub n_items: usize,
    pub n_skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    pub items: Vec<ItemRecord>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct ItemRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_sense: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_sense: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Spearman's ρ: Pearson correlation of the two rank vectors, with ties
/// receiving average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Metric("need at least 2 points".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

/// 1-based ranks; tied values share the average of their rank range.
pub(crate) fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Metric("zero rank variance".into()));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Uniform-weight similarity of two words from their sense vectors: the
/// mean of all pairwise cosines.
pub fn weisim(a: &[&Vector], b: &[&Vector]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Metric("empty sense list".into()));
    }
    let mut sum = 0.0;
    for u in a {
        for v in b {
            sum += cosine(u, v)?;
        }
    }
    Ok(sum / (a.len() * b.len()) as f64)
}

fn sense_vectors<'t>(lex: &Lexicon, senses: &'t SenseTable, w: &Token) -> Vec<&'t Vector> {
    lex.senses_of(w)
        .iter()
        .filter_map(|e| senses.get(&e.sense_id))
        .collect()
}

fn has_nonzero(vs: &[&Vector]) -> bool {
    vs.iter().any(|v| v.iter().any(|x| *x != 0.0))
}

/// Context-free word similarity: per pair, [`weisim`] over each word's
/// sense vectors; ρ against the gold scores. Pairs where either word has
/// no senses with nonzero vectors are skipped and counted.
pub fn eval_wordsim(
    pairs: &[SimilarityPair],
    lex: &Lexicon,
    senses: &SenseTable,
) -> Result<EvalReport> {
    let items: Vec<ItemRecord> = exec::map(pairs, |pair| {
        let mut rec = ItemRecord {
            id: format!("{}-{}", pair.word1, pair.word2),
            gold: Some(pair.gold),
            ..Default::default()
        };
        let v1 = sense_vectors(lex, senses, &pair.word1);
        let v2 = sense_vectors(lex, senses, &pair.word2);
        if !has_nonzero(&v1) {
            rec.skipped = Some(format!("{}: no nonzero sense vectors", pair.word1));
            return rec;
        }
        if !has_nonzero(&v2) {
            rec.skipped = Some(format!("{}: no nonzero sense vectors", pair.word2));
            return rec;
        }
        match weisim(&v1, &v2) {
            Ok(score) => rec.predicted = Some(score),
            Err(e) => rec.skipped = Some(e.to_string()),
        }
        rec
    });
    finish_similarity_report("wordsim-spearman", pairs.len(), items)
}

/// Contextual word similarity: each target is disambiguated in its own
/// context; the pair's similarity is the cosine of the two chosen sense
/// vectors.
pub fn eval_scws(
    pairs: &[SimilarityPair],
    lex: &Lexicon,
    senses: &SenseTable,
    store: &EmbeddingStore,
) -> Result<EvalReport> {
    let items: Vec<ItemRecord> = exec::map(pairs, |pair| {
        let mut rec = ItemRecord {
            id: format!("{}-{}", pair.word1, pair.word2),
            gold: Some(pair.gold),
            ..Default::default()
        };
        let (Some(c1), Some(c2)) = (&pair.context1, &pair.context2) else {
            rec.skipped = Some("missing context".into());
            return rec;
        };
        match (
            choose_in_context(&pair.word1, c1, lex, senses, store),
            choose_in_context(&pair.word2, c2, lex, senses, store),
        ) {
            (Ok(s1), Ok(s2)) => {
                let v1 = senses.get(&s1).expect("chosen sense exists");
                let v2 = senses.get(&s2).expect("chosen sense exists");
                rec.predicted = Some(cosine(v1, v2).expect("uniform dims"));
                rec.predicted_sense = Some(format!("{s1}|{s2}"));
            }
            (Err(reason), _) | (_, Err(reason)) => rec.skipped = Some(reason),
        }
        rec
    });
    finish_similarity_report("scws-spearman", pairs.len(), items)
}

fn choose_in_context(
    word: &Token,
    ctx: &MarkedContext,
    lex: &Lexicon,
    senses: &SenseTable,
    store: &EmbeddingStore,
) -> std::result::Result<String, String> {
    let vs = sense_vectors(lex, senses, word);
    if vs.is_empty() {
        return Err(format!("{word}: not in sense inventory"));
    }
    if !has_nonzero(&vs) {
        return Err(format!("{word}: no nonzero sense vectors"));
    }
    if ctx.target >= ctx.tokens.len() || ctx.tokens[ctx.target] != *word {
        return Err(format!("{word}: marked target does not match"));
    }
    let inst = ContextInstance::new(ctx.tokens.clone(), vec![ctx.target])
        .map_err(|e| e.to_string())?;
    let assignment = s2c(&inst, lex, senses, store);
    assignment
        .assigned
        .get(&ctx.target)
        .cloned()
        .ok_or_else(|| format!("{word}: unassigned"))
}

fn finish_similarity_report(
    metric: &str,
    n_items: usize,
    items: Vec<ItemRecord>,
) -> Result<EvalReport> {
    let scored: Vec<(f64, f64)> = items
        .iter()
        .filter_map(|r| Some((r.predicted?, r.gold?)))
        .collect();
    let n_skipped = items.iter().filter(|r| r.skipped.is_some()).count();
    if scored.len() < 2 {
        return Err(Error::Metric(format!(
            "{metric}: only {} of {n_items} pairs scored",
            scored.len()
        )));
    }
    let preds: Vec<f64> = scored.iter().map(|(p, _)| *p).collect();
    let golds: Vec<f64> = scored.iter().map(|(_, g)| *g).collect();
    let rho = spearman(&preds, &golds)?;
    Ok(EvalReport {
        metric: metric.to_string(),
        score: rho,
        n_items,
        n_skipped,
        precision: None,
        recall: None,
        items,
    })
}

/// Cluster-aware WSD scoring. A prediction is correct iff its cluster
/// equals the gold sense's cluster. Precision counts attempted instances,
/// recall counts all keyed instances; scores are reported ×100.
pub fn score_wsd(predictions: &HashMap<String, String>, key: &WsdKey) -> EvalReport {
    let mut ids: Vec<&String> = key.gold.keys().collect();
    ids.sort();

    let mut items = Vec::with_capacity(ids.len());
    let mut attempted = 0usize;
    let mut correct = 0usize;
    for id in &ids {
        let gold = &key.gold[*id];
        let mut rec = ItemRecord {
            id: (*id).clone(),
            gold_sense: Some(gold.clone()),
            ..Default::default()
        };
        match predictions.get(*id) {
            Some(pred) => {
                attempted += 1;
                let ok = key.cluster_of(pred) == key.cluster_of(gold);
                if ok {
                    correct += 1;
                }
                rec.predicted_sense = Some(pred.clone());
                rec.correct = Some(ok);
            }
            None => rec.skipped = Some("unattempted".into()),
        }
        items.push(rec);
    }

    let mut unknown: Vec<&String> = predictions
        .keys()
        .filter(|id| !key.gold.contains_key(*id))
        .collect();
    unknown.sort();
    for id in unknown {
        log::warn!("prediction for unknown instance id {id}; ignored");
        items.push(ItemRecord {
            id: id.clone(),
            predicted_sense: predictions.get(id).cloned(),
            skipped: Some("unknown instance id".into()),
            ..Default::default()
        });
    }

    let precision = if attempted > 0 {
        correct as f64 / attempted as f64
    } else {
        0.0
    };
    let recall = if key.len() > 0 {
        correct as f64 / key.len() as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };

    EvalReport {
        metric: "wsd-f1".to_string(),
        score: f1 * 100.0,
        n_items: key.len(),
        n_skipped: key.len() - attempted,
        precision: Some(precision * 100.0),
        recall: Some(recall * 100.0),
        items,
    }
}

#[cfg(test)]
mod tests;
