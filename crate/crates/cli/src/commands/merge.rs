//! `finocr merge` — cross-page consolidation of one document file.

use std::path::PathBuf;

use clap::Args;
use finocr_core::merge::{consolidate_document, MergeReport};
use finocr_core::table::serialize_table;
use serde::Serialize;

use crate::util::{atomic_write, read_document, Failure};

#[derive(Args)]
pub struct MergeArgs {
    /// Input document (JSON Lines).
    pub input: PathBuf,
    /// Consolidated output document; a `<output>.report.json` sidecar
    /// records the merge groups.
    pub output: PathBuf,
}

#[derive(Serialize)]
struct TableGroupWire {
    source_ids: Vec<String>,
    branch: finocr_core::merge::MergeBranch,
    body_rows: usize,
    table_html: String,
}

#[derive(Serialize)]
struct TextGroupWire {
    source_ids: Vec<String>,
    text: String,
}

#[derive(Serialize)]
struct ReportWire {
    merged_tables: Vec<TableGroupWire>,
    merged_texts: Vec<TextGroupWire>,
    warnings: Vec<String>,
}

fn report_wire(report: &MergeReport) -> ReportWire {
    ReportWire {
        merged_tables: report
            .merged_tables
            .iter()
            .map(|g| TableGroupWire {
                source_ids: g.source_ids.clone(),
                branch: g.branch,
                body_rows: g.table.body_rows.len(),
                table_html: serialize_table(&g.table),
            })
            .collect(),
        merged_texts: report
            .merged_texts
            .iter()
            .map(|g| TextGroupWire {
                source_ids: g.source_ids.clone(),
                text: g.text.clone(),
            })
            .collect(),
        warnings: report.warnings.clone(),
    }
}

pub fn run(args: &MergeArgs) -> Result<(), Failure> {
    let doc = read_document(&args.input)?;
    let (merged, report) = consolidate_document(&doc);
    atomic_write(&args.output, merged.to_jsonl().as_bytes())?;

    let mut sidecar = args.output.as_os_str().to_owned();
    sidecar.push(".report.json");
    let wire = report_wire(&report);
    let json = serde_json::to_string_pretty(&wire)
        .map_err(|e| Failure::Internal(format!("report serialization failed: {e}")))?;
    atomic_write(std::path::Path::new(&sidecar), json.as_bytes())?;

    let merged_groups = report
        .merged_tables
        .iter()
        .filter(|g| g.source_ids.len() > 1)
        .count();
    println!(
        "merged {merged_groups} table group(s) and {} text run(s); {} element(s) out",
        report.merged_texts.len(),
        merged.elements.len()
    );
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}
