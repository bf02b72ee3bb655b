//! `finocr eval` — score a prediction document against gold and emit the
//! flat metric report.
//!
//! Table scores (teds, teds_s) are reported ×100 to match published tables;
//! toc_eds, ned, ard and the cell-IoU block stay in their natural [0, 1]
//! ranges. Metrics whose inputs are missing are skipped with a warning, not
//! an error. Overall/Overall* combine the aggregate text edit distance and
//! table TEDS, with a `--formula-cdm` score supplied externally when a
//! three-way Overall is wanted; explicit `--text-edit` / `--table-teds`
//! overrides allow assembling the composite from external runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use finocr_core::dhr::Heading;
use finocr_core::doc::{Category, DocumentFile};
use finocr_core::grounding::BBox;
use finocr_core::metrics::{
    ard, cell_iou_report, ned, overall_scores, teds, toc_eds, MetricReport, TedsConfig,
};
use finocr_core::table::HtmlTable;

use crate::util::{atomic_write, read_document, Failure};

#[derive(Args)]
pub struct EvalArgs {
    /// Prediction document (JSON Lines).
    pub pred: Option<PathBuf>,
    /// Gold document (JSON Lines).
    pub gold: Option<PathBuf>,
    /// Metrics to compute: teds, teds_s, toc_eds, ned, ard, ciou, overall.
    /// Default: every metric whose inputs are present.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Externally computed formula score in [0, 100]; enables Overall.
    #[arg(long)]
    pub formula_cdm: Option<f64>,
    /// Override the aggregate text edit distance entering Overall.
    #[arg(long)]
    pub text_edit: Option<f64>,
    /// Override the aggregate table TEDS (×100) entering Overall.
    #[arg(long)]
    pub table_teds: Option<f64>,
    /// IoU thresholds for the cell-grounding recall block.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.5, 0.7])]
    pub ciou_thresholds: Vec<f64>,
    /// Metric report output path (JSON).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn wanted(args: &EvalArgs, name: &str) -> bool {
    args.metrics.is_empty() || args.metrics.iter().any(|m| m == name)
}

fn gold_tables(gold: &DocumentFile) -> Vec<HtmlTable> {
    if let Some(g) = gold.gold.as_ref().filter(|g| !g.tables.is_empty()) {
        return g.tables.clone();
    }
    gold.elements_of(Category::Table)
        .filter_map(|e| e.table().cloned())
        .collect()
}

fn headings_of(doc: &DocumentFile) -> Vec<Heading> {
    doc.elements_of(Category::Heading)
        .map(|el| {
            let mut h = Heading::new(el.text().unwrap_or_default());
            h.level = el.level;
            h
        })
        .collect()
}

fn gold_headings(gold: &DocumentFile) -> Vec<Heading> {
    if let Some(g) = gold.gold.as_ref().filter(|g| !g.headings.is_empty()) {
        return g.headings.clone();
    }
    headings_of(gold)
}

fn joined_text(doc: &DocumentFile) -> String {
    doc.elements_of(Category::Text)
        .filter_map(|e| e.text())
        .collect::<Vec<_>>()
        .join("\n")
}

fn reading_order(doc: &DocumentFile, prefer_gold: bool) -> Vec<String> {
    if prefer_gold {
        if let Some(g) = doc.gold.as_ref().filter(|g| !g.reading_order.is_empty()) {
            return g.reading_order.clone();
        }
    }
    doc.elements.iter().map(|e| e.id.clone()).collect()
}

fn cell_box_map(records: &[finocr_core::doc::CellBoxRecord]) -> BTreeMap<(String, usize), BBox> {
    records
        .iter()
        .map(|r| ((r.table_id.clone(), r.cell_index), r.bbox()))
        .collect()
}

struct Computed {
    report: MetricReport,
    warnings: Vec<String>,
    mean_teds_100: Option<f64>,
    ned_value: Option<f64>,
}

fn compute_pairwise_teds(
    pred_tables: &[HtmlTable],
    gold_tables: &[HtmlTable],
    cfg: &TedsConfig,
    warnings: &mut Vec<String>,
) -> Option<f64> {
    if pred_tables.is_empty() || gold_tables.is_empty() {
        return None;
    }
    if pred_tables.len() != gold_tables.len() {
        warnings.push(format!(
            "table count mismatch ({} pred vs {} gold); scoring the paired prefix",
            pred_tables.len(),
            gold_tables.len()
        ));
    }
    let n = pred_tables.len().min(gold_tables.len());
    let mut total = 0.0;
    for (p, g) in pred_tables.iter().zip(gold_tables).take(n) {
        match teds(p, g, cfg) {
            Ok(v) => total += v,
            Err(e) => {
                warnings.push(format!("table pair skipped: {e}"));
                return None;
            }
        }
    }
    Some(total / n as f64)
}

fn compute(args: &EvalArgs, pred: &DocumentFile, gold: &DocumentFile) -> Computed {
    let mut report = MetricReport::new();
    let mut warnings = Vec::new();
    let mut mean_teds_100 = None;
    let mut ned_value = None;

    let pred_tables: Vec<HtmlTable> = pred
        .elements_of(Category::Table)
        .filter_map(|e| e.table().cloned())
        .collect();
    let golds = gold_tables(gold);

    if wanted(args, "teds") {
        match compute_pairwise_teds(&pred_tables, &golds, &TedsConfig::default(), &mut warnings) {
            Some(mean) => {
                report.set("teds", mean * 100.0);
                mean_teds_100 = Some(mean * 100.0);
            }
            None => warnings.push("teds skipped: no table pairs".into()),
        }
    }
    if wanted(args, "teds_s") {
        match compute_pairwise_teds(
            &pred_tables,
            &golds,
            &TedsConfig::structure_only(),
            &mut warnings,
        ) {
            Some(mean) => report.set("teds_s", mean * 100.0),
            None => warnings.push("teds_s skipped: no table pairs".into()),
        }
    }
    if wanted(args, "toc_eds") {
        let pred_headings = headings_of(pred);
        let golds = gold_headings(gold);
        if pred_headings.is_empty() && golds.is_empty() {
            warnings.push("toc_eds skipped: no headings".into());
        } else {
            match toc_eds(&pred_headings, &golds) {
                Ok(v) => report.set("toc_eds", v),
                Err(e) => warnings.push(format!("toc_eds skipped: {e}")),
            }
        }
    }
    if wanted(args, "ned") {
        let p = joined_text(pred);
        let g = joined_text(gold);
        if p.is_empty() && g.is_empty() {
            warnings.push("ned skipped: no text elements".into());
        } else {
            let v = ned(&p, &g);
            report.set("ned", v);
            ned_value = Some(v);
        }
    }
    if wanted(args, "ard") {
        let pred_order = reading_order(pred, false);
        let gold_order = reading_order(gold, true);
        match ard(&pred_order, &gold_order) {
            Ok(v) => report.set("ard", v),
            Err(e) => warnings.push(format!("ard skipped: {e}")),
        }
    }
    if wanted(args, "ciou") {
        let pred_map = cell_box_map(&pred.cell_boxes);
        let gold_records = gold
            .gold
            .as_ref()
            .filter(|g| !g.cell_boxes.is_empty())
            .map(|g| g.cell_boxes.clone())
            .unwrap_or_else(|| gold.cell_boxes.clone());
        let gold_map = cell_box_map(&gold_records);
        let keys: Vec<_> = pred_map
            .keys()
            .filter(|k| gold_map.contains_key(*k))
            .cloned()
            .collect();
        if keys.is_empty() {
            warnings.push("ciou skipped: no aligned cell boxes".into());
        } else {
            if keys.len() != pred_map.len() || keys.len() != gold_map.len() {
                warnings.push(format!(
                    "ciou aligned {} of {} pred / {} gold cell boxes",
                    keys.len(),
                    pred_map.len(),
                    gold_map.len()
                ));
            }
            let pred_boxes: Vec<BBox> = keys.iter().map(|k| pred_map[k]).collect();
            let gold_boxes: Vec<BBox> = keys.iter().map(|k| gold_map[k]).collect();
            match cell_iou_report(&pred_boxes, &gold_boxes, &args.ciou_thresholds) {
                Ok(r) => report.set_cell_iou(&r),
                Err(e) => warnings.push(format!("ciou skipped: {e}")),
            }
        }
    }

    Computed {
        report,
        warnings,
        mean_teds_100,
        ned_value,
    }
}

pub fn run(args: &EvalArgs) -> Result<(), Failure> {
    let mut computed = match (&args.pred, &args.gold) {
        (Some(pred_path), Some(gold_path)) => {
            let pred = read_document(pred_path)?;
            let gold = read_document(gold_path)?;
            compute(args, &pred, &gold)
        }
        (None, None) => Computed {
            report: MetricReport::new(),
            warnings: Vec::new(),
            mean_teds_100: None,
            ned_value: None,
        },
        _ => {
            return Err(Failure::Input(
                "eval needs both PRED and GOLD paths, or neither (pure Overall mode)".into(),
            ))
        }
    };

    if wanted(args, "overall") {
        let text_edit = args.text_edit.or(computed.ned_value);
        let table_teds = args.table_teds.or(computed.mean_teds_100);
        match (text_edit, table_teds) {
            (Some(te), Some(tt)) => {
                let score = overall_scores(te, args.formula_cdm, tt)
                    .map_err(|e| Failure::Input(e.to_string()))?;
                computed.report.set_overall(&score);
            }
            _ if args.pred.is_none() => {
                return Err(Failure::Input(
                    "pure Overall mode needs --text-edit and --table-teds".into(),
                ))
            }
            _ => computed
                .warnings
                .push("overall skipped: text edit or table TEDS unavailable".into()),
        }
    }

    for warning in &computed.warnings {
        eprintln!("warning: {warning}");
    }
    if computed.report.is_empty() {
        eprintln!("warning: no metrics were computable");
    }
    for (key, value) in computed.report.iter() {
        println!("{key:<12} {value:.4}");
    }
    if let Some(out) = &args.output {
        atomic_write(out, computed.report.to_json().as_bytes())?;
    }
    Ok(())
}
