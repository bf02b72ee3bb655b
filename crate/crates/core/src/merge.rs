//! Cross-page content consolidation over an ordered element stream.
//!
//! Table reconstruction scans table fragments with an anchor/next pass. A
//! pair merges only when the expanded column counts agree and nothing but
//! non-content artifacts (headers, footers, page numbers) lies between the
//! fragments. A continuation with no header, or with a header identical to
//! the anchor's, splices seamlessly: the redundant header is discarded and
//! only the body rows are appended. A continuation with a distinct header is
//! a categorical transition, so the whole fragment merges and its header
//! rows survive as is_header-flagged body rows.
//!
//! Text consolidation joins the trailing text of one page with the leading
//! text of the next when only non-content artifacts intervene and the
//! trailing fragment does not already end a sentence. A trailing hyphen
//! rejoins the split word; CJK boundaries concatenate directly; everything
//! else joins with a single space.

use thiserror::Error;

use crate::doc::{Category, Content, DocumentElement, DocumentFile};
use crate::table::{expand_grid, normalize_table, HtmlTable, Row};

#[derive(Debug, Error, PartialEq)]
pub enum MergeError {
    #[error("element id {0:?} not found in the stream")]
    UnknownId(String),
    #[error("element {a:?} does not precede {b:?} in reading order")]
    OrderViolation { a: String, b: String },
}

/// Which reconstruction branch produced a table group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeBranch {
    /// Redundant-header continuation: bodies appended only.
    Seamless,
    /// Distinct sub-header: the entire fragment merged, header preserved.
    Full,
    /// Not merged with anything.
    None,
}

/// One output table and the element ids it consumed. A group merged in
/// several steps reports `Full` if any step preserved a distinct sub-header,
/// otherwise `Seamless`.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedTable {
    pub table: HtmlTable,
    pub source_ids: Vec<String>,
    pub branch: MergeBranch,
}

/// One consolidated text run and the element ids it consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedText {
    pub text: String,
    pub source_ids: Vec<String>,
}

/// Consolidation outcome. Every table element of the input appears in
/// exactly one `merged_tables` group (singletons carry branch `None`);
/// `merged_texts` lists only runs that actually merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergeReport {
    pub merged_tables: Vec<MergedTable>,
    pub merged_texts: Vec<MergedText>,
    pub warnings: Vec<String>,
}

/// Elements strictly between `a` and `b` in reading order, excluding
/// non-content artifacts (header, footer, page number).
pub fn intervening_elements<'a>(
    stream: &'a [DocumentElement],
    a_id: &str,
    b_id: &str,
) -> Result<Vec<&'a DocumentElement>, MergeError> {
    let pos = |id: &str| -> Result<usize, MergeError> {
        stream
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| MergeError::UnknownId(id.to_string()))
    };
    let a = pos(a_id)?;
    let b = pos(b_id)?;
    if stream[a].order_rank >= stream[b].order_rank {
        return Err(MergeError::OrderViolation {
            a: a_id.to_string(),
            b: b_id.to_string(),
        });
    }
    Ok(stream[a + 1..b]
        .iter()
        .filter(|e| !e.category.is_non_content())
        .collect())
}

/// True iff the normalized head-row cell texts and span structures of both
/// tables match exactly.
pub fn headers_equal(a: &HtmlTable, b: &HtmlTable) -> bool {
    let na = normalize_table(a);
    let nb = normalize_table(b);
    let key = |rows: &[Row]| -> Vec<Vec<(String, u32, u32)>> {
        rows.iter()
            .map(|r| {
                r.cells
                    .iter()
                    .map(|c| (c.text.clone(), c.rowspan, c.colspan))
                    .collect()
            })
            .collect()
    };
    key(&na.head_rows) == key(&nb.head_rows)
}

/// A table "has a header" when it has head rows, or when its first body row
/// is entirely is_header-flagged cells.
fn has_header(t: &HtmlTable) -> bool {
    if !t.head_rows.is_empty() {
        return true;
    }
    t.body_rows
        .first()
        .is_some_and(|r| r.cells.iter().all(|c| c.is_header))
}

fn grid_cols(t: &HtmlTable) -> usize {
    expand_grid(t).n_cols
}

struct Anchor {
    table: HtmlTable,
    source_ids: Vec<String>,
    last_id: String,
    any_full: bool,
}

impl Anchor {
    fn start(el: &DocumentElement, table: HtmlTable) -> Self {
        Anchor {
            table,
            source_ids: vec![el.id.clone()],
            last_id: el.id.clone(),
            any_full: false,
        }
    }

    fn finish(self) -> MergedTable {
        let branch = if self.source_ids.len() < 2 {
            MergeBranch::None
        } else if self.any_full {
            MergeBranch::Full
        } else {
            MergeBranch::Seamless
        };
        MergedTable {
            table: self.table,
            source_ids: self.source_ids,
            branch,
        }
    }
}

/// Reconstruct cross-page tables over a stream sorted by order_rank.
///
/// Degenerate inputs pass through: non-table elements are untouched and a
/// stream without tables yields an empty report.
pub fn merge_tables(stream: &[DocumentElement]) -> MergeReport {
    let mut report = MergeReport::default();
    let mut anchor: Option<Anchor> = None;

    for el in stream.iter().filter(|e| e.category == Category::Table) {
        let Some(table) = el.table() else {
            report
                .warnings
                .push(format!("table element {:?} has no table content", el.id));
            continue;
        };
        let Some(current) = anchor.as_mut() else {
            anchor = Some(Anchor::start(el, table.clone()));
            continue;
        };

        let aligned = grid_cols(&current.table) == grid_cols(table);
        let between = intervening_elements(stream, &current.last_id, &el.id)
            .map(|v| v.is_empty())
            .unwrap_or(false);
        if aligned && between {
            if !has_header(table) || headers_equal(table, &current.table) {
                // Seamless: drop the redundant header, append the body.
                current.table.body_rows.extend(table.body_rows.iter().cloned());
            } else {
                // Full: the distinct header becomes flagged body rows.
                current
                    .table
                    .body_rows
                    .extend(table.head_rows.iter().cloned());
                current.table.body_rows.extend(table.body_rows.iter().cloned());
                current.any_full = true;
            }
            current.source_ids.push(el.id.clone());
            current.last_id = el.id.clone();
        } else {
            let done = anchor.take().expect("anchor present").finish();
            report.merged_tables.push(done);
            anchor = Some(Anchor::start(el, table.clone()));
        }
    }
    if let Some(last) = anchor {
        report.merged_tables.push(last.finish());
    }
    report
}

/// Sentence-terminal punctuation; a trailing fragment ending in one of these
/// is a finished sentence and never merges forward.
const TERMINALS: [char; 7] = ['.', '!', '?', '。', '！', '？', ':'];

fn ends_terminal(text: &str) -> bool {
    text.trim_end()
        .chars()
        .next_back()
        .is_some_and(|c| TERMINALS.contains(&c))
}

fn is_cjk(c: char) -> bool {
    matches!(c,
        '\u{3040}'..='\u{30FF}'   // kana
        | '\u{3400}'..='\u{4DBF}'
        | '\u{4E00}'..='\u{9FFF}'
        | '\u{F900}'..='\u{FAFF}')
}

/// Join a trailing and leading fragment across a page boundary.
fn join_fragments(trailing: &str, leading: &str) -> String {
    let a = trailing.trim_end();
    let b = leading.trim_start();
    if let Some(stripped) = a.strip_suffix('-') {
        // Mid-word hyphenation: rejoin the word.
        return format!("{stripped}{b}");
    }
    let cjk_boundary = a.chars().next_back().is_some_and(is_cjk)
        || b.chars().next().is_some_and(is_cjk);
    if cjk_boundary {
        format!("{a}{b}")
    } else {
        format!("{a} {b}")
    }
}

struct TextRun {
    text: String,
    source_ids: Vec<String>,
    last_page: usize,
    last_index: usize,
}

/// Consolidate cross-page text runs over a stream sorted by order_rank.
/// The trailing text of page n merges with the leading text of page n+1
/// when only non-content artifacts intervene and the trailing fragment does
/// not end with sentence-terminal punctuation.
pub fn merge_texts(stream: &[DocumentElement]) -> MergeReport {
    let mut report = MergeReport::default();
    let mut run: Option<TextRun> = None;

    let flush = |report: &mut MergeReport, run: Option<TextRun>| {
        if let Some(r) = run {
            if r.source_ids.len() >= 2 {
                report.merged_texts.push(MergedText {
                    text: r.text,
                    source_ids: r.source_ids,
                });
            }
        }
    };

    for (index, el) in stream.iter().enumerate() {
        if el.category != Category::Text {
            continue;
        }
        let Some(text) = el.text() else { continue };
        if let Some(current) = run.as_mut() {
            let only_artifacts = stream[current.last_index + 1..index]
                .iter()
                .all(|e| e.category.is_non_content());
            let next_page = el.page_index == current.last_page + 1;
            if only_artifacts && next_page && !ends_terminal(&current.text) {
                current.text = join_fragments(&current.text, text);
                current.source_ids.push(el.id.clone());
                current.last_page = el.page_index;
                current.last_index = index;
                continue;
            }
            flush(&mut report, run.take());
        }
        run = Some(TextRun {
            text: text.to_string(),
            source_ids: vec![el.id.clone()],
            last_page: el.page_index,
            last_index: index,
        });
    }
    flush(&mut report, run);
    report
}

/// Run both consolidations over a document and materialize the result: each
/// merged group collapses onto its first element's identity, consumed
/// elements disappear, everything else passes through. Merged text elements
/// take the page of their last fragment so an already-consolidated document
/// is a fixed point.
pub fn consolidate_document(doc: &DocumentFile) -> (DocumentFile, MergeReport) {
    let tables = merge_tables(&doc.elements);
    let texts = merge_texts(&doc.elements);

    let mut report = MergeReport {
        merged_tables: tables.merged_tables,
        merged_texts: texts.merged_texts,
        warnings: tables
            .warnings
            .into_iter()
            .chain(texts.warnings)
            .collect(),
    };

    let mut out = doc.clone();
    let mut drop_ids: Vec<String> = Vec::new();
    for group in report.merged_tables.iter().filter(|g| g.source_ids.len() >= 2) {
        drop_ids.extend(group.source_ids[1..].iter().cloned());
    }
    for group in &report.merged_texts {
        drop_ids.extend(group.source_ids[1..].iter().cloned());
    }
    out.elements.retain(|e| !drop_ids.contains(&e.id));
    for group in report.merged_tables.iter().filter(|g| g.source_ids.len() >= 2) {
        if let Some(el) = out.elements.iter_mut().find(|e| e.id == group.source_ids[0]) {
            el.content = Content::Table(group.table.clone());
        }
    }
    for group in &report.merged_texts {
        if let Some(el) = out.elements.iter_mut().find(|e| e.id == group.source_ids[0]) {
            el.content = Content::Text(group.text.clone());
            if let Some(last_id) = group.source_ids.last() {
                if let Some(last) = doc.elements.iter().find(|e| &e.id == last_id) {
                    el.page_index = last.page_index;
                }
            }
        }
    }
    report.warnings.sort();
    report.warnings.dedup();
    (out, report)
}
