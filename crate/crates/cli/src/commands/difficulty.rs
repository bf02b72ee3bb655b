//! `finocr difficulty` — tabular attribute extraction, correlation
//! screening, difficulty scoring and curriculum stratification over a table
//! corpus.
//!
//! Corpus lines: `{"id": ..., "table_html": ..., "teds": optional,
//! "line_style": optional}`. Repeated-run TEDS lists arrive separately via
//! `--runs` as `{"id": ..., "teds_runs": [...]}`; without them the ICD term
//! drops out of the difficulty score and the ICD columns stay empty.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use finocr_core::difficulty::{
    attributes_csv, correlation_table, difficulty_score, extract_attributes, icd, stratify,
    structural_complexity, CorrelationSample, DifficultyWeights, IcdSample, LineStyle, Stage,
    TableAttributes,
};
use finocr_core::table::parse_table;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::util::{atomic_write, read_to_string, Failure};

#[derive(Args)]
pub struct DifficultyArgs {
    /// Table corpus (JSON Lines).
    pub corpus: PathBuf,
    /// Repeated high-temperature TEDS runs per sample (JSON Lines).
    #[arg(long)]
    pub runs: Option<PathBuf>,
    /// Output directory for the CSV/JSON reports.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Structural-complexity weight of the difficulty score.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// ICD weight of the difficulty score.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Lower difficulty quantile.
    #[arg(long, default_value_t = 0.3)]
    pub q1: f64,
    /// Upper difficulty quantile.
    #[arg(long, default_value_t = 0.7)]
    pub q2: f64,
}

#[derive(Deserialize)]
struct CorpusLine {
    id: String,
    table_html: String,
    #[serde(default)]
    teds: Option<f64>,
    #[serde(default)]
    line_style: Option<LineStyle>,
}

#[derive(Deserialize)]
struct RunsLine {
    id: String,
    teds_runs: Vec<f64>,
}

#[derive(Serialize)]
struct ScoreLine<'a> {
    id: &'a str,
    structural_complexity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    icd_std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    icd_range: Option<f64>,
    d: f64,
    stage: Stage,
}

#[derive(Serialize)]
struct PlanWire<'a> {
    q1: f64,
    q2: f64,
    bound_low: f64,
    bound_high: f64,
    easy: &'a [String],
    mid: &'a [String],
    hard: &'a [String],
}

struct Sample {
    id: String,
    attributes: TableAttributes,
    icd: Option<IcdSample>,
    teds: Option<f64>,
    d: f64,
}

fn parse_corpus(args: &DifficultyArgs) -> Result<Vec<(CorpusLine, usize)>, Failure> {
    let raw = read_to_string(&args.corpus)?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<CorpusLine>(l)
                .map(|line| (line, i + 1))
                .map_err(|e| {
                    Failure::Input(format!("{} line {}: {e}", args.corpus.display(), i + 1))
                })
        })
        .collect()
}

fn parse_runs(args: &DifficultyArgs) -> Result<BTreeMap<String, Vec<f64>>, Failure> {
    let Some(path) = &args.runs else {
        return Ok(BTreeMap::new());
    };
    let raw = read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, line) in raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed: RunsLine = serde_json::from_str(line)
            .map_err(|e| Failure::Input(format!("{} line {}: {e}", path.display(), i + 1)))?;
        map.insert(parsed.id, parsed.teds_runs);
    }
    Ok(map)
}

pub fn run(args: &DifficultyArgs) -> Result<(), Failure> {
    if args.alpha + args.beta <= 0.0 {
        return Err(Failure::Input("alpha + beta must be positive".into()));
    }
    let corpus = parse_corpus(args)?;
    if corpus.is_empty() {
        return Err(Failure::Input(format!(
            "{}: corpus is empty",
            args.corpus.display()
        )));
    }
    let runs = parse_runs(args)?;
    if args.runs.is_none() {
        eprintln!("warning: no --runs supplied; ICD columns empty, difficulty uses the structural term only");
    }
    let weights = DifficultyWeights {
        alpha: args.alpha,
        beta: args.beta,
    };

    let parsed: Result<Vec<Sample>, Failure> = corpus
        .par_iter()
        .map(|(line, line_no)| {
            let table = parse_table(&line.table_html).map_err(|e| {
                Failure::Input(format!(
                    "{} line {line_no} (id {}): {e}",
                    args.corpus.display(),
                    line.id
                ))
            })?;
            let mut attributes = extract_attributes(&table);
            if let Some(style) = line.line_style {
                attributes.line_style = style;
            }
            let icd_sample = runs.get(&line.id).and_then(|r| icd(r).ok());
            let d = difficulty_score(&attributes, icd_sample.as_ref(), &weights);
            Ok(Sample {
                id: line.id.clone(),
                attributes,
                icd: icd_sample,
                teds: line.teds,
                d,
            })
        })
        .collect();
    let samples = parsed?;
    for (line, _) in &corpus {
        if let Some(r) = runs.get(&line.id) {
            if r.len() < 2 {
                eprintln!(
                    "warning: sample {} has {} run(s); ICD needs at least 2, skipped",
                    line.id,
                    r.len()
                );
            }
        }
    }

    let csv = attributes_csv(
        samples
            .iter()
            .map(|s| (s.id.as_str(), &s.attributes, s.icd.as_ref())),
    );
    atomic_write(&args.output.join("attributes.csv"), csv.as_bytes())?;

    let correlation_inputs: Vec<CorrelationSample> = samples
        .iter()
        .filter_map(|s| {
            s.teds.map(|t| CorrelationSample {
                attributes: s.attributes.clone(),
                icd: s.icd.clone(),
                teds: t,
            })
        })
        .collect();
    if correlation_inputs.len() >= 2 {
        let report =
            correlation_table(&correlation_inputs).map_err(|e| Failure::Input(e.to_string()))?;
        for warning in &report.warnings {
            eprintln!("warning: {warning}");
        }
        atomic_write(
            &args.output.join("correlation.csv"),
            report.to_csv().as_bytes(),
        )?;
    } else {
        eprintln!(
            "warning: correlation.csv skipped; {} sample(s) carry an observed teds",
            correlation_inputs.len()
        );
    }

    let scored: Vec<(String, f64)> = samples.iter().map(|s| (s.id.clone(), s.d)).collect();
    let plan = stratify(&scored, args.q1, args.q2).map_err(|e| Failure::Input(e.to_string()))?;

    let mut jsonl = String::new();
    for s in &samples {
        let line = ScoreLine {
            id: &s.id,
            structural_complexity: structural_complexity(&s.attributes),
            icd_std: s.icd.as_ref().map(|i| i.icd_std),
            icd_range: s.icd.as_ref().map(|i| i.icd_range),
            d: s.d,
            stage: plan.assignments[&s.id],
        };
        jsonl.push_str(&serde_json::to_string(&line).expect("score serializes"));
        jsonl.push('\n');
    }
    atomic_write(&args.output.join("difficulty.jsonl"), jsonl.as_bytes())?;

    let plan_wire = PlanWire {
        q1: plan.q1,
        q2: plan.q2,
        bound_low: plan.bound_low,
        bound_high: plan.bound_high,
        easy: &plan.easy,
        mid: &plan.mid,
        hard: &plan.hard,
    };
    atomic_write(
        &args.output.join("plan.json"),
        serde_json::to_string_pretty(&plan_wire)
            .map_err(|e| Failure::Internal(e.to_string()))?
            .as_bytes(),
    )?;

    println!(
        "{} sample(s): {} easy, {} mid, {} hard",
        samples.len(),
        plan.easy.len(),
        plan.mid.len(),
        plan.hard.len()
    );
    Ok(())
}
