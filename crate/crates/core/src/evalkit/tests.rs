use super::*;
use crate::lexicon::SenseEntry;
use crate::trainer::Provenance;
use crate::Vector;

fn tok(s: &str) -> Token {
    Token::normalize(s).unwrap()
}

fn toks(words: &[&str]) -> Vec<Token> {
    words.iter().map(|w| tok(w)).collect()
}

// --- spearman ---------------------------------------------------------

#[test]
fn spearman_identity_and_reverse() {
    let xs = [1.0, 2.0, 5.0, 9.0];
    let ys_same = [10.0, 20.0, 30.0, 40.0];
    let ys_rev = [40.0, 30.0, 20.0, 10.0];
    assert!((spearman(&xs, &ys_same).unwrap() - 1.0).abs() < 1e-12);
    assert!((spearman(&xs, &ys_rev).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn spearman_hand_value() {
    // d = (0, 1, -1, 0): 1 - 6*2/(4*15) = 0.8
    let xs = [1.0, 2.0, 3.0, 4.0];
    let ys = [1.0, 3.0, 2.0, 4.0];
    assert!((spearman(&xs, &ys).unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn spearman_errors() {
    assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    assert!(spearman(&[1.0], &[1.0]).is_err());
    // zero rank variance
    assert!(spearman(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
}

/// Independent midrank oracle: rank by counting, correlate by raw sums.
fn spearman_bruteforce(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |vals: &[f64]| -> Vec<f64> {
        vals.iter()
            .map(|&v| {
                let less = vals.iter().filter(|&&o| o < v).count() as f64;
                let equal = vals.iter().filter(|&&o| o == v).count() as f64;
                1.0 + less + (equal - 1.0) / 2.0
            })
            .collect()
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx: f64 = rx.iter().sum::<f64>() / n;
    let my: f64 = ry.iter().sum::<f64>() / n;
    let num: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let dx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>().sqrt();
    let dy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum::<f64>().sqrt();
    num / (dx * dy)
}

#[test]
fn spearman_matches_rank_difference_formula_when_tie_free() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for n in [3usize, 5, 10, 25] {
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut ys = xs.clone();
        ys.shuffle(&mut rng);
        // tie-free closed form: 1 - 6 Σd² / (n(n²-1))
        let rank_of = |vals: &[f64], v: f64| 1.0 + vals.iter().filter(|&&o| o < v).count() as f64;
        let d2: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let d = rank_of(&xs, *x) - rank_of(&ys, *y);
                d * d
            })
            .sum();
        let nf = n as f64;
        let formula = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        let got = spearman(&xs, &ys).unwrap();
        assert!((got - formula).abs() < 1e-12, "n={n}: {got} vs {formula}");
    }
}

#[test]
fn spearman_matches_bruteforce_on_tied_lists() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(3..30);
        // small integer values force plenty of ties
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
        let got = match spearman(&xs, &ys) {
            Ok(v) => v,
            Err(_) => continue, // zero variance draw
        };
        let want = spearman_bruteforce(&xs, &ys);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

// --- weisim -----------------------------------------------------------

#[test]
fn weisim_singletons_reduce_to_cosine() {
    let a = Vector::from_vec(vec![1.0, 2.0]);
    let b = Vector::from_vec(vec![2.0, 1.0]);
    let got = weisim(&[&a], &[&b]).unwrap();
    assert!((got - 0.8).abs() < 1e-12);
}

#[test]
fn weisim_orthonormal_hand_values() {
    let e1 = Vector::from_vec(vec![1.0, 0.0, 0.0]);
    let e2 = Vector::from_vec(vec![0.0, 1.0, 0.0]);
    let e3 = Vector::from_vec(vec![0.0, 0.0, 1.0]);
    // {e1,e2} vs {e1}: (1+0)/2
    assert!((weisim(&[&e1, &e2], &[&e1]).unwrap() - 0.5).abs() < 1e-12);
    // identical sets of n orthonormal senses: 1/n
    let got = weisim(&[&e1, &e2, &e3], &[&e1, &e2, &e3]).unwrap();
    assert!((got - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn weisim_rejects_empty() {
    let a = Vector::from_vec(vec![1.0]);
    assert!(weisim(&[], &[&a]).is_err());
    assert!(weisim(&[&a], &[]).is_err());
}

#[test]
fn weisim_is_symmetric_and_matches_matrix_mean() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n1 = rng.random_range(1..=10);
        let n2 = rng.random_range(1..=10);
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            Vector::from_shape_fn(4, |_| rng.random_range(-1.0..1.0))
        };
        let a: Vec<Vector> = (0..n1).map(|_| mk(&mut rng)).collect();
        let b: Vec<Vector> = (0..n2).map(|_| mk(&mut rng)).collect();
        let ar: Vec<&Vector> = a.iter().collect();
        let br: Vec<&Vector> = b.iter().collect();

        let got = weisim(&ar, &br).unwrap();
        let sym = weisim(&br, &ar).unwrap();
        assert!((got - sym).abs() < 1e-12);

        // brute force: materialize the full pairwise cosine matrix
        let mut matrix = Vec::new();
        for u in &a {
            for v in &b {
                matrix.push(crate::embeddings::cosine(u, v).unwrap());
            }
        }
        let mean: f64 = matrix.iter().sum::<f64>() / matrix.len() as f64;
        assert!((got - mean).abs() <= 1e-12);
    }
}

// --- score_wsd --------------------------------------------------------

fn preds(pairs: &[(&str, &str)]) -> HashMap<String, String> {
    pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[test]
fn wsd_perfect_predictions_score_100() {
    let key = WsdKey::new(preds(&[("i1", "a%1"), ("i2", "b%2")]));
    let report = score_wsd(&preds(&[("i1", "a%1"), ("i2", "b%2")]), &key);
    assert!((report.score - 100.0).abs() < 1e-12);
    assert_eq!(report.n_skipped, 0);
}

#[test]
fn wsd_cluster_mate_counts_as_correct() {
    let key = WsdKey::new(preds(&[("i1", "a%1")]))
        .with_clusters(preds(&[("a%1", "c9"), ("a%2", "c9")]));
    let report = score_wsd(&preds(&[("i1", "a%2")]), &key);
    assert!((report.score - 100.0).abs() < 1e-12);

    // without the cluster map the same prediction is wrong
    let key_plain = WsdKey::new(preds(&[("i1", "a%1")]));
    let report = score_wsd(&preds(&[("i1", "a%2")]), &key_plain);
    assert_eq!(report.score, 0.0);
}

#[test]
fn wsd_half_correct_full_coverage_is_50() {
    let key = WsdKey::new(preds(&[("i1", "a%1"), ("i2", "b%1")]));
    let report = score_wsd(&preds(&[("i1", "a%1"), ("i2", "b%9")]), &key);
    assert!((report.score - 50.0).abs() < 1e-12);
    assert!((report.precision.unwrap() - 50.0).abs() < 1e-12);
    assert!((report.recall.unwrap() - 50.0).abs() < 1e-12);
}

#[test]
fn wsd_unattempted_hurts_recall_not_precision() {
    let key = WsdKey::new(preds(&[("i1", "a%1"), ("i2", "b%1")]));
    let report = score_wsd(&preds(&[("i1", "a%1")]), &key);
    assert!((report.precision.unwrap() - 100.0).abs() < 1e-12);
    assert!((report.recall.unwrap() - 50.0).abs() < 1e-12);
    // F1 = 2*1*0.5/1.5
    assert!((report.score - 200.0 / 3.0).abs() < 1e-9);
    assert_eq!(report.n_skipped, 1);
}

#[test]
fn wsd_unknown_instance_ids_are_reported_not_counted() {
    let key = WsdKey::new(preds(&[("i1", "a%1")]));
    let report = score_wsd(&preds(&[("i1", "a%1"), ("ghost", "x%1")]), &key);
    assert!((report.score - 100.0).abs() < 1e-12);
    assert!(report
        .items
        .iter()
        .any(|r| r.id == "ghost" && r.skipped.is_some()));
}

#[test]
fn wsd_identity_clusters_equal_exact_match_f1() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let n = rng.random_range(1..=100);
        let mut gold = HashMap::new();
        let mut predictions = HashMap::new();
        let mut exact = 0usize;
        let mut attempted = 0usize;
        for i in 0..n {
            let id = format!("inst{i:03}");
            let g = format!("s{}", rng.random_range(0..10));
            gold.insert(id.clone(), g.clone());
            if rng.random_range(0..10) < 8 {
                attempted += 1;
                let p = format!("s{}", rng.random_range(0..10));
                if p == g {
                    exact += 1;
                }
                predictions.insert(id, p);
            }
        }
        let report = score_wsd(&predictions, &WsdKey::new(gold));
        let p = if attempted > 0 { exact as f64 / attempted as f64 } else { 0.0 };
        let r = exact as f64 / n as f64;
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        assert!((report.score - f1 * 100.0).abs() < 1e-9);
    }
}

// --- protocol-level fixtures -------------------------------------------

fn entry(id: &str, lemma: &str, gloss: &[&str]) -> SenseEntry {
    SenseEntry {
        sense_id: id.to_string(),
        lemma: tok(lemma),
        pos: Pos::Noun,
        synonyms: vec![],
        gloss: toks(gloss),
    }
}

/// Three single-sense words on orthogonal-ish axes plus two-sense "bank".
fn eval_fixture() -> (Lexicon, SenseTable, EmbeddingStore) {
    let lex = Lexicon::from_entries(vec![
        entry("cat%1", "cat", &["an", "animal"]),
        entry("tiger%1", "tiger", &["a", "big", "animal"]),
        entry("coin%1", "coin", &["metal", "money"]),
        entry("bank%1", "bank", &["money", "institution"]),
        entry("bank%2", "bank", &["river", "land"]),
        entry("river%1", "river", &["a", "stream"]),
    ])
    .unwrap();

    let mut senses = SenseTable::new(3);
    let mut add = |id: &str, v: Vec<f64>| {
        senses
            .insert(id.to_string(), Vector::from_vec(v), Provenance::OwnWord)
            .unwrap();
    };
    add("cat%1", vec![1.0, 0.1, 0.0]);
    add("tiger%1", vec![1.0, 0.0, 0.1]);
    add("coin%1", vec![0.0, 1.0, 0.0]);
    add("bank%1", vec![0.2, 1.0, 0.0]);
    add("bank%2", vec![0.0, 0.1, 1.0]);
    add("river%1", vec![0.0, 0.0, 1.0]);

    let store = EmbeddingStore::from_pairs(
        3,
        vec![
            (tok("cat"), Vector::from_vec(vec![1.0, 0.1, 0.0])),
            (tok("tiger"), Vector::from_vec(vec![1.0, 0.0, 0.1])),
            (tok("coin"), Vector::from_vec(vec![0.0, 1.0, 0.0])),
            (tok("bank"), Vector::from_vec(vec![0.3, 0.7, 0.2])),
            (tok("river"), Vector::from_vec(vec![0.0, 0.0, 1.0])),
            (tok("money"), Vector::from_vec(vec![0.0, 0.9, 0.1])),
            (tok("water"), Vector::from_vec(vec![0.0, 0.1, 0.9])),
        ],
    )
    .unwrap();

    (lex, senses, store)
}

fn pair(w1: &str, w2: &str, gold: f64) -> SimilarityPair {
    SimilarityPair {
        word1: tok(w1),
        word2: tok(w2),
        pos1: None,
        pos2: None,
        gold,
        context1: None,
        context2: None,
    }
}

#[test]
fn eval_wordsim_rank_match_gives_rho_one() {
    let (lex, senses, _) = eval_fixture();
    // cat~tiger is high, cat~river is low; gold agrees
    let pairs = vec![pair("cat", "tiger", 9.0), pair("cat", "coin", 4.0), pair("cat", "river", 1.0)];
    let report = eval_wordsim(&pairs, &lex, &senses).unwrap();
    assert!((report.score - 1.0).abs() < 1e-12, "rho = {}", report.score);
    assert_eq!(report.n_skipped, 0);
}

#[test]
fn eval_wordsim_skips_oov_pairs() {
    let (lex, senses, _) = eval_fixture();
    let pairs = vec![
        pair("cat", "tiger", 9.0),
        pair("cat", "zebra", 5.0), // zebra has no senses
        pair("cat", "river", 1.0),
    ];
    let report = eval_wordsim(&pairs, &lex, &senses).unwrap();
    assert_eq!(report.n_skipped, 1);
    assert_eq!(report.n_items, 3);
}

#[test]
fn eval_wordsim_errors_when_everything_skipped() {
    let (lex, senses, _) = eval_fixture();
    let pairs = vec![pair("zebra", "yak", 5.0)];
    assert!(eval_wordsim(&pairs, &lex, &senses).is_err());
}

fn marked(words: &[&str], target: usize) -> MarkedContext {
    MarkedContext {
        tokens: toks(words),
        target,
    }
}

#[test]
fn eval_scws_monosemous_pair_ignores_context() {
    let (lex, senses, store) = eval_fixture();
    let mut p1 = pair("cat", "tiger", 9.0);
    p1.context1 = Some(marked(&["the", "cat", "sat"], 1));
    p1.context2 = Some(marked(&["a", "tiger", "ran"], 1));
    let mut p2 = pair("cat", "river", 1.0);
    p2.context1 = Some(marked(&["the", "cat", "swam"], 1));
    p2.context2 = Some(marked(&["the", "river", "flowed"], 1));

    let report = eval_scws(&[p1, p2], &lex, &senses, &store).unwrap();
    // predicted similarity equals the plain sense-vector cosine
    let want = crate::embeddings::cosine(
        senses.get("cat%1").unwrap(),
        senses.get("tiger%1").unwrap(),
    )
    .unwrap();
    assert!((report.items[0].predicted.unwrap() - want).abs() < 1e-12);
}

#[test]
fn eval_scws_context_flips_bank_sense() {
    let (lex, senses, store) = eval_fixture();
    let mut p = pair("bank", "river", 8.0);
    // "river water bank": context pushes bank to its river sense
    p.context1 = Some(marked(&["river", "water", "bank"], 2));
    p.context2 = Some(marked(&["the", "river", "flowed"], 1));
    let mut q = pair("bank", "coin", 5.0);
    // money context keeps the money sense
    q.context1 = Some(marked(&["money", "coin", "bank"], 2));
    q.context2 = Some(marked(&["a", "coin", "please"], 1));

    let report = eval_scws(&[p, q], &lex, &senses, &store).unwrap();
    assert_eq!(report.items[0].predicted_sense.as_deref(), Some("bank%2|river%1"));
    assert_eq!(report.items[1].predicted_sense.as_deref(), Some("bank%1|coin%1"));

    let want = crate::embeddings::cosine(
        senses.get("bank%2").unwrap(),
        senses.get("river%1").unwrap(),
    )
    .unwrap();
    assert!((report.items[0].predicted.unwrap() - want).abs() < 1e-12);
}

#[test]
fn eval_scws_missing_context_is_skipped() {
    let (lex, senses, store) = eval_fixture();
    let mut with_ctx = pair("cat", "tiger", 9.0);
    with_ctx.context1 = Some(marked(&["the", "cat"], 1));
    with_ctx.context2 = Some(marked(&["a", "tiger"], 1));
    let mut with_ctx2 = pair("coin", "river", 2.0);
    with_ctx2.context1 = Some(marked(&["a", "coin"], 1));
    with_ctx2.context2 = Some(marked(&["the", "river"], 1));
    let without = pair("cat", "coin", 5.0);

    let report = eval_scws(&[with_ctx, with_ctx2, without], &lex, &senses, &store).unwrap();
    assert_eq!(report.n_skipped, 1);
}
