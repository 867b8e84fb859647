use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use serde::Deserialize;

use glossvec_core::checkpoint::{load_checkpoint, save_checkpoint};
use glossvec_core::disambig::{match_description, s2c, ContextInstance};
use glossvec_core::embeddings::{nearest, write_vectors, EmbeddingStore};
use glossvec_core::evalkit::{self, datasets, EvalReport};
use glossvec_core::lexicon::{Lexicon, Token};
use glossvec_core::trainer::{EpochStats, TrainState, Trainer};

use crate::args::*;
use crate::config::{merged_train_config, required_path, FileConfig};
use crate::CliError;

pub struct Globals {
    pub seed: u64,
    pub json: bool,
}

fn load_lexicon(path: &Path) -> Result<Lexicon, CliError> {
    Ok(Lexicon::load(path)?)
}

fn load_store(path: &Path) -> Result<EmbeddingStore, CliError> {
    Ok(EmbeddingStore::load(path)?)
}

fn load_ckpt(path: &Path) -> Result<TrainState, CliError> {
    Ok(load_checkpoint(path)?)
}

fn print_epoch(stats: &EpochStats) {
    println!(
        "{}",
        serde_json::to_string(stats).expect("epoch stats serialize")
    );
}

pub fn train(args: &TrainArgs, file: &FileConfig, g: &Globals) -> Result<(), CliError> {
    let lexicon_path = required_path(args.lexicon.as_ref(), file.lexicon.as_ref(), "lexicon")?;
    let vectors_path = required_path(args.vectors.as_ref(), file.vectors.as_ref(), "vectors")?;
    let cfg = merged_train_config(args, file, g.seed)?;

    let lex = load_lexicon(&lexicon_path)?;
    let store = load_store(&vectors_path)?;

    let mut trainer = match &args.resume {
        Some(ckpt) => {
            let state = load_ckpt(ckpt)?;
            if state.params.kind != cfg.cell && args.cell.is_some() {
                log::warn!(
                    "--cell {} ignored: checkpoint was trained with {}",
                    cfg.cell.name(),
                    state.params.kind.name()
                );
            }
            Trainer::from_state(&lex, &store, cfg, state)?
        }
        None => {
            if matches!(args.phase, PhaseArg::Two | PhaseArg::Three) {
                return Err(CliError::Usage(
                    "--phase 2 and --phase 3 resume earlier training; pass --in CKPT".into(),
                ));
            }
            Trainer::new(&lex, &store, cfg)?
        }
    };

    let run_and_log = |t: &mut Trainer, which: u8| -> Result<(), CliError> {
        let stats = match which {
            1 => t.run_phase1()?,
            2 => t.run_phase2()?,
            _ => t.run_phase3()?,
        };
        for s in &stats {
            print_epoch(s);
        }
        Ok(())
    };

    match args.phase {
        PhaseArg::One => run_and_log(&mut trainer, 1)?,
        PhaseArg::Two => run_and_log(&mut trainer, 2)?,
        PhaseArg::Three => run_and_log(&mut trainer, 3)?,
        PhaseArg::All => {
            run_and_log(&mut trainer, 1)?;
            run_and_log(&mut trainer, 2)?;
            run_and_log(&mut trainer, 3)?;
        }
    }

    save_checkpoint(&args.out, &trainer.state)?;
    log::info!("checkpoint written to {}", args.out.display());
    Ok(())
}

pub fn export_senses(args: &ExportArgs) -> Result<(), CliError> {
    let state = load_ckpt(&args.ckpt)?;
    let mut out = File::create(&args.out)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    write_vectors(&mut out, state.senses.dim(), state.senses.iter())
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    Ok(())
}

fn print_ranked(ranked: &[(String, f64)], json: bool) {
    if json {
        let rows: Vec<serde_json::Value> = ranked
            .iter()
            .map(|(id, score)| serde_json::json!({"id": id, "score": score}))
            .collect();
        println!("{}", serde_json::Value::Array(rows));
    } else {
        for (id, score) in ranked {
            println!("{id}\t{score:.6}");
        }
    }
}

pub fn nearest_cmd(args: &NearestArgs, file: &FileConfig, g: &Globals) -> Result<(), CliError> {
    let ranked = match (&args.sense, &args.word) {
        (Some(sense_id), None) => {
            let ckpt = required_path(args.ckpt.as_ref(), None, "ckpt")?;
            let state = load_ckpt(&ckpt)?;
            let query = state
                .senses
                .get(sense_id)
                .ok_or_else(|| CliError::Data(format!("unknown sense id `{sense_id}`")))?
                .clone();
            let exclude: HashSet<String> = [sense_id.clone()].into();
            nearest(state.senses.iter(), &query, args.k, &exclude)
        }
        (None, Some(word)) => {
            let vectors = required_path(args.vectors.as_ref(), file.vectors.as_ref(), "vectors")?;
            let store = load_store(&vectors)?;
            let token = Token::normalize(word)
                .ok_or_else(|| CliError::Usage("--word must be non-empty".into()))?;
            let query = store
                .get(&token)
                .ok_or_else(|| CliError::Data(format!("no vector for `{token}`")))?
                .clone();
            let exclude: HashSet<String> = [token.as_str().to_string()].into();
            let items: Vec<(&str, &glossvec_core::Vector)> =
                store.iter().map(|(t, v)| (t.as_str(), v)).collect();
            nearest(items, &query, args.k, &exclude)
        }
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --sense ID or --word W".into(),
            ))
        }
    };
    print_ranked(&ranked, g.json);
    Ok(())
}

pub fn match_cmd(args: &MatchArgs, file: &FileConfig, g: &Globals) -> Result<(), CliError> {
    let vectors = required_path(args.vectors.as_ref(), file.vectors.as_ref(), "vectors")?;
    let state = load_ckpt(&args.ckpt)?;
    let store = load_store(&vectors)?;
    let ranked = match_description(&state.params, &store, &state.senses, &args.text, args.k)?;
    print_ranked(&ranked, g.json);
    Ok(())
}

#[derive(Deserialize)]
struct DisambigLine {
    tokens: Vec<String>,
    targets: Vec<usize>,
    #[serde(default)]
    ids: Option<Vec<String>>,
}

fn read_lines(input: Option<&PathBuf>) -> Result<Vec<String>, CliError> {
    let mut lines = Vec::new();
    let read_from = |r: Box<dyn BufRead>, lines: &mut Vec<String>| -> std::io::Result<()> {
        for line in r.lines() {
            lines.push(line?);
        }
        Ok(())
    };
    let result = match input {
        Some(path) if path.as_os_str() != "-" => {
            let f = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            read_from(Box::new(BufReader::new(f)), &mut lines)
        }
        _ => read_from(Box::new(std::io::stdin().lock()), &mut lines),
    };
    result.map_err(|e| CliError::Data(format!("reading input: {e}")))?;
    Ok(lines)
}

fn parse_context_line(line: &str, line_no: usize) -> Result<(ContextInstance, Option<Vec<String>>), CliError> {
    let parsed: DisambigLine = serde_json::from_str(line)
        .map_err(|e| CliError::Data(format!("input line {line_no}: {e}")))?;
    let tokens: Vec<Token> = parsed
        .tokens
        .iter()
        .map(|t| {
            Token::normalize(t)
                .ok_or_else(|| CliError::Data(format!("input line {line_no}: empty token")))
        })
        .collect::<Result<_, _>>()?;
    if let Some(ids) = &parsed.ids {
        if ids.len() != parsed.targets.len() {
            return Err(CliError::Data(format!(
                "input line {line_no}: ids and targets differ in length"
            )));
        }
    }
    let inst = ContextInstance::new(tokens, parsed.targets)
        .map_err(|e| CliError::Data(format!("input line {line_no}: {e}")))?;
    Ok((inst, parsed.ids))
}

pub fn disambiguate(args: &DisambiguateArgs, file: &FileConfig) -> Result<(), CliError> {
    let vectors = required_path(args.vectors.as_ref(), file.vectors.as_ref(), "vectors")?;
    let lexicon = required_path(args.lexicon.as_ref(), file.lexicon.as_ref(), "lexicon")?;
    let state = load_ckpt(&args.ckpt)?;
    let store = load_store(&vectors)?;
    let lex = load_lexicon(&lexicon)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (idx, line) in read_lines(args.input.as_ref())?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (inst, _) = parse_context_line(line, idx + 1)?;
        let assignment = s2c(&inst, &lex, &state.senses, &store);
        if !assignment.unassigned.is_empty() {
            log::warn!(
                "line {}: positions {:?} have no lexicon entry",
                idx + 1,
                assignment.unassigned
            );
        }
        let map: BTreeMap<String, String> = assignment
            .assigned
            .iter()
            .map(|(pos, sid)| (pos.to_string(), sid.clone()))
            .collect();
        let obj = serde_json::json!({ "assignments": map });
        writeln!(out, "{obj}").map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(())
}

fn print_similarity_report(report: &EvalReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string(report).expect("report serialize"));
    } else {
        println!("metric: {}", report.metric);
        println!("rho: {:.4}  (x100: {:.2})", report.score, report.score * 100.0);
        println!(
            "pairs: {} scored / {} total ({} skipped)",
            report.n_items - report.n_skipped,
            report.n_items,
            report.n_skipped
        );
    }
}

pub fn eval_wordsim(args: &EvalWordsimArgs, file: &FileConfig, g: &Globals) -> Result<(), CliError> {
    let lexicon = required_path(args.lexicon.as_ref(), file.lexicon.as_ref(), "lexicon")?;
    let state = load_ckpt(&args.ckpt)?;
    let lex = load_lexicon(&lexicon)?;
    let pairs = datasets::load_wordsim_csv(&args.data)?;
    let report = evalkit::eval_wordsim(&pairs, &lex, &state.senses)?;
    print_similarity_report(&report, g.json);
    Ok(())
}

pub fn eval_scws(args: &EvalScwsArgs, file: &FileConfig, g: &Globals) -> Result<(), CliError> {
    let lexicon = required_path(args.lexicon.as_ref(), file.lexicon.as_ref(), "lexicon")?;
    let vectors = required_path(args.vectors.as_ref(), file.vectors.as_ref(), "vectors")?;
    let state = load_ckpt(&args.ckpt)?;
    let lex = load_lexicon(&lexicon)?;
    let store = load_store(&vectors)?;
    let pairs = datasets::load_scws_tsv(&args.data)?;
    let report = evalkit::eval_scws(&pairs, &lex, &state.senses, &store)?;
    print_similarity_report(&report, g.json);
    Ok(())
}

pub fn eval_wsd(args: &EvalWsdArgs, file: &FileConfig, g: &Globals) -> Result<(), CliError> {
    let lexicon = required_path(args.lexicon.as_ref(), file.lexicon.as_ref(), "lexicon")?;
    let vectors = required_path(args.vectors.as_ref(), file.vectors.as_ref(), "vectors")?;
    let state = load_ckpt(&args.ckpt)?;
    let lex = load_lexicon(&lexicon)?;
    let store = load_store(&vectors)?;

    let gold = datasets::load_wsd_key(&args.key)?;
    let mut key = evalkit::WsdKey::new(gold);
    if let Some(path) = &args.clusters {
        key = key.with_clusters(datasets::load_cluster_map(path)?);
    }
    let sense_map = match &args.sense_map {
        Some(path) => Some(datasets::load_sense_map(path)?),
        None => None,
    };

    let f = File::open(&args.instances)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.instances.display())))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(g.seed);
    let mut predictions: HashMap<String, String> = HashMap::new();
    for (idx, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("reading instances: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let (inst, ids) = parse_context_line(&line, idx + 1)?;
        let Some(ids) = ids else {
            return Err(CliError::Data(format!(
                "instances line {}: missing \"ids\"",
                idx + 1
            )));
        };
        if args.random_baseline {
            for (pos, id) in inst.targets.iter().zip(&ids) {
                let senses = lex.senses_of(&inst.tokens[*pos]);
                if senses.is_empty() {
                    continue;
                }
                let pick = rng.random_range(0..senses.len());
                predictions.insert(id.clone(), senses[pick].sense_id.clone());
            }
        } else {
            let assignment = s2c(&inst, &lex, &state.senses, &store);
            for (pos, id) in inst.targets.iter().zip(&ids) {
                if let Some(sid) = assignment.assigned.get(pos) {
                    predictions.insert(id.clone(), sid.clone());
                }
            }
        }
    }

    if let Some(map) = &sense_map {
        for value in predictions.values_mut() {
            if let Some(mapped) = map.get(value) {
                *value = mapped.clone();
            }
        }
    }

    let report = evalkit::score_wsd(&predictions, &key);
    if g.json {
        println!("{}", serde_json::to_string(&report).expect("report serialize"));
    } else {
        println!("metric: {}", report.metric);
        println!(
            "F1: {:.2}  P: {:.2}  R: {:.2}",
            report.score,
            report.precision.unwrap_or(0.0),
            report.recall.unwrap_or(0.0)
        );
        println!(
            "instances: {} keyed, {} unattempted",
            report.n_items, report.n_skipped
        );
    }
    Ok(())
}

pub fn gradcheck(args: &GradcheckArgs, g: &Globals) -> Result<(), CliError> {
    use glossvec_core::neuralnet::{grad_check, CellKind};
    let kinds: Vec<CellKind> = match args.cell {
        Some(c) => vec![c.to_kind()],
        None => CellKind::ALL.to_vec(),
    };
    let mut all_ok = true;
    for kind in kinds {
        let report = grad_check(kind, g.seed);
        let ok = report.passed(args.tolerance);
        all_ok &= ok;
        if g.json {
            println!(
                "{}",
                serde_json::json!({
                    "cell": kind.name(),
                    "max_rel_error": report.max_rel_error,
                    "worst": report.worst_coord,
                    "coords": report.n_coords,
                    "pass": ok,
                })
            );
        } else {
            println!(
                "cell {:7}: max rel error {:.3e} over {} coords ({})",
                kind.name(),
                report.max_rel_error,
                report.n_coords,
                if ok { "PASS" } else { "FAIL" }
            );
        }
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Data(format!(
            "gradient check failed at tolerance {}",
            args.tolerance
        )))
    }
}
