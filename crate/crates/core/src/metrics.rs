//! Scalar evaluation metrics: TEDS / TEDS-S, concatenated cross-page TEDS,
//! TocEDS, NED, ARD, cell-IoU reports and the Overall report formulas.
//!
//! Tables and TOC trees both lower to [`OrderedTree`] and are scored with
//! the tree edit engine. Values are kept in [0, 1] internally; the report
//! layer scales table scores by 100 where the published tables do.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dhr::Heading;
use crate::grounding::{iou, BBox};
use crate::table::{normalize_table, HtmlTable};
use crate::tree_edit::{tree_edit_distance, tree_size, CostModel, NodeKind, OrderedTree, TreeEditError};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("input must not be empty")]
    EmptyInput,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("pred and gold id sets differ")]
    IdSetMismatch,
    #[error("input out of range: {0}")]
    RangeError(String),
    #[error(transparent)]
    Tree(#[from] TreeEditError),
}

/// Separator between a content node's structural identity and its text
/// payload inside the tree label.
const CONTENT_SEP: char = '\u{1f}';

fn split_content_label(label: &str) -> (&str, &str) {
    match label.split_once(CONTENT_SEP) {
        Some((prefix, text)) => (prefix, text),
        None => ("", label),
    }
}

/// TEDS configuration: structure-only mode erases cell text; the relabel
/// function prices content-node relabels and must return values in [0, 1].
#[derive(Clone, Copy)]
pub struct TedsConfig {
    pub structure_only: bool,
    pub content_relabel: fn(&str, &str) -> f64,
}

impl Default for TedsConfig {
    fn default() -> Self {
        TedsConfig {
            structure_only: false,
            content_relabel: ned,
        }
    }
}

impl TedsConfig {
    pub fn structure_only() -> Self {
        TedsConfig {
            structure_only: true,
            ..TedsConfig::default()
        }
    }
}

impl std::fmt::Debug for TedsConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TedsConfig")
            .field("structure_only", &self.structure_only)
            .finish()
    }
}

/// Cost model shared by TEDS and TocEDS: unit insert/delete, 0/1 relabel on
/// structural nodes, and on content nodes 1 when the structural prefixes
/// (e.g. td span suffixes) differ, otherwise the configured text relabel.
struct EditCost {
    content_relabel: fn(&str, &str) -> f64,
}

impl CostModel for EditCost {
    fn insert_cost(&self, _node: &OrderedTree) -> f64 {
        1.0
    }

    fn delete_cost(&self, _node: &OrderedTree) -> f64 {
        1.0
    }

    fn relabel_cost(&self, a: &OrderedTree, b: &OrderedTree) -> f64 {
        match (a.kind, b.kind) {
            (NodeKind::Structural, NodeKind::Structural) => {
                if a.label == b.label {
                    0.0
                } else {
                    1.0
                }
            }
            (NodeKind::Content, NodeKind::Content) => {
                let (pa, ta) = split_content_label(&a.label);
                let (pb, tb) = split_content_label(&b.label);
                if pa != pb {
                    1.0
                } else {
                    (self.content_relabel)(ta, tb)
                }
            }
            _ => 1.0,
        }
    }
}

/// Lower a table to its ordered tree: table → (thead?, tbody) → tr* → td*.
/// Each td is a content node whose label carries the rowspan/colspan as a
/// structural suffix (so span changes are relabels of cost 1) followed by
/// the cell text, or no text in structure-only mode.
pub fn table_to_tree(table: &HtmlTable, structure_only: bool) -> OrderedTree {
    let row_nodes = |rows: &[crate::table::Row]| -> Vec<OrderedTree> {
        rows.iter()
            .map(|row| {
                let cells = row
                    .cells
                    .iter()
                    .map(|cell| {
                        let text = if structure_only { "" } else { cell.text.as_str() };
                        OrderedTree::content(
                            format!(
                                "td[{},{}]{}{}",
                                cell.rowspan, cell.colspan, CONTENT_SEP, text
                            ),
                            vec![],
                        )
                    })
                    .collect();
                OrderedTree::structural("tr", cells)
            })
            .collect()
    };
    let mut children = Vec::new();
    if !table.head_rows.is_empty() {
        children.push(OrderedTree::structural("thead", row_nodes(&table.head_rows)));
    }
    children.push(OrderedTree::structural("tbody", row_nodes(&table.body_rows)));
    OrderedTree::structural("table", children)
}

fn tree_similarity(a: &OrderedTree, b: &OrderedTree, cfg: &TedsConfig) -> Result<f64, MetricError> {
    let cost = EditCost {
        content_relabel: cfg.content_relabel,
    };
    let d = tree_edit_distance(a, b, &cost)?;
    let denom = tree_size(a).max(tree_size(b)) as f64;
    Ok((1.0 - d / denom).max(0.0))
}

/// Tree edit-distance-based similarity between two tables:
/// `1 − d(tree(pred), tree(gold)) / max(|tree(pred)|, |tree(gold)|)`,
/// with both tables normalized first.
pub fn teds(pred: &HtmlTable, gold: &HtmlTable, cfg: &TedsConfig) -> Result<f64, MetricError> {
    let p = table_to_tree(&normalize_table(pred), cfg.structure_only);
    let g = table_to_tree(&normalize_table(gold), cfg.structure_only);
    tree_similarity(&p, &g, cfg)
}

/// Concatenate cross-page fragments (pruning the head rows of every
/// non-initial fragment, appending bodies in order) and score against gold.
pub fn crosspage_teds(
    pred_fragments: &[HtmlTable],
    gold: &HtmlTable,
    cfg: &TedsConfig,
) -> Result<f64, MetricError> {
    let merged = concat_fragments(pred_fragments).ok_or(MetricError::EmptyInput)?;
    teds(&merged, gold, cfg)
}

/// Metric-side fragment concatenation: fragment 1 keeps its header, the head
/// rows of fragments 2..k are pruned and their bodies appended in order.
pub fn concat_fragments(fragments: &[HtmlTable]) -> Option<HtmlTable> {
    let (first, rest) = fragments.split_first()?;
    let mut merged = first.clone();
    for fragment in rest {
        merged.body_rows.extend(fragment.body_rows.iter().cloned());
    }
    Some(merged)
}

/// Build the TOC tree under a synthetic root: each heading nests under the
/// nearest preceding heading with a smaller level; same-level siblings keep
/// reading order; a heading more than one level deeper than its predecessor
/// still nests directly under it (no phantom nodes). Headings without an
/// assigned level count as level 1.
pub fn build_toc_tree(headings: &[Heading]) -> OrderedTree {
    // parent[i] = index of parent heading, or None for root children
    let mut parents: Vec<Option<usize>> = Vec::with_capacity(headings.len());
    let mut stack: Vec<(u32, usize)> = Vec::new();
    for (i, heading) in headings.iter().enumerate() {
        let level = heading.level.unwrap_or(1).max(1);
        while stack.last().is_some_and(|&(l, _)| l >= level) {
            stack.pop();
        }
        parents.push(stack.last().map(|&(_, idx)| idx));
        stack.push((level, i));
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); headings.len()];
    let mut roots: Vec<usize> = Vec::new();
    for (i, parent) in parents.iter().enumerate() {
        match parent {
            Some(p) => children[*p].push(i),
            None => roots.push(i),
        }
    }
    fn build(idx: usize, headings: &[Heading], children: &[Vec<usize>]) -> OrderedTree {
        OrderedTree::content(
            headings[idx].text.clone(),
            children[idx]
                .iter()
                .map(|&c| build(c, headings, children))
                .collect(),
        )
    }
    OrderedTree::structural(
        "toc",
        roots
            .into_iter()
            .map(|r| build(r, headings, &children))
            .collect(),
    )
}

/// TocEDS: TEDS-style similarity between the TOC trees of two heading
/// lists, with normalized string edit distance as the relabel cost on
/// heading text.
pub fn toc_eds(pred: &[Heading], gold: &[Heading]) -> Result<f64, MetricError> {
    let cfg = TedsConfig::default();
    tree_similarity(&build_toc_tree(pred), &build_toc_tree(gold), &cfg)
}

/// Normalized edit distance: Levenshtein over Unicode scalar values divided
/// by `max(len(pred), len(gold), 1)`.
pub fn ned(pred: &str, gold: &str) -> f64 {
    let a: Vec<char> = pred.chars().collect();
    let b: Vec<char> = gold.chars().collect();
    levenshtein(&a, &b) as f64 / a.len().max(b.len()).max(1) as f64
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Cell-level IoU summary over index-aligned box lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CellIouReport {
    pub per_cell_iou: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Fraction of cells with IoU ≥ the matching threshold.
    pub recall_at: Vec<f64>,
    pub mean_iou: f64,
    pub median_iou: f64,
}

/// Per-cell IoU plus recall at each threshold, mean and median. Alignment by
/// cell index is produced upstream by grid position.
pub fn cell_iou_report(
    pred: &[BBox],
    gold: &[BBox],
    thresholds: &[f64],
) -> Result<CellIouReport, MetricError> {
    if pred.len() != gold.len() {
        return Err(MetricError::LengthMismatch(pred.len(), gold.len()));
    }
    if pred.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let per_cell_iou: Vec<f64> = pred.iter().zip(gold).map(|(p, g)| iou(p, g)).collect();
    Ok(summarize_ious(per_cell_iou, thresholds))
}

/// Summarize an already-computed per-cell IoU list.
pub fn summarize_ious(per_cell_iou: Vec<f64>, thresholds: &[f64]) -> CellIouReport {
    let n = per_cell_iou.len() as f64;
    let recall_at = thresholds
        .iter()
        .map(|&t| per_cell_iou.iter().filter(|&&v| v >= t).count() as f64 / n)
        .collect();
    let mean_iou = per_cell_iou.iter().sum::<f64>() / n;
    let mut sorted = per_cell_iou.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median_iou = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    CellIouReport {
        per_cell_iou,
        thresholds: thresholds.to_vec(),
        recall_at,
        mean_iou,
        median_iou,
    }
}

/// Average relative displacement between two reading orders over the same
/// id set: `(1/N) · Σ |rank_pred(i) − rank_gold(i)| / N`.
pub fn ard<S: AsRef<str>>(pred_order: &[S], gold_order: &[S]) -> Result<f64, MetricError> {
    if pred_order.is_empty() && gold_order.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if pred_order.len() != gold_order.len() {
        return Err(MetricError::IdSetMismatch);
    }
    fn rank<S: AsRef<str>>(order: &[S]) -> BTreeMap<&str, usize> {
        order
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_ref(), i))
            .collect()
    }
    let pred_ranks = rank(pred_order);
    let gold_ranks = rank(gold_order);
    if pred_ranks.len() != pred_order.len()
        || gold_ranks.len() != gold_order.len()
        || pred_ranks.keys().ne(gold_ranks.keys())
    {
        return Err(MetricError::IdSetMismatch);
    }
    let n = pred_order.len() as f64;
    let total: f64 = pred_ranks
        .iter()
        .map(|(id, &rp)| (rp as f64 - gold_ranks[id] as f64).abs())
        .sum();
    Ok(total / (n * n))
}

/// Composite report scores. `overall` requires a formula score; `overall_star`
/// never does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverallScore {
    pub text_edit: f64,
    pub formula_cdm: Option<f64>,
    pub table_teds: f64,
    pub overall: Option<f64>,
    pub overall_star: f64,
}

/// Combine component scores:
/// `overall = ((1 − text_edit)·100 + formula_cdm + table_teds) / 3` and
/// `overall_star = ((1 − text_edit)·100 + table_teds) / 2`. `text_edit` is in
/// [0, 1]; the other components are percentages in [0, 100].
pub fn overall_scores(
    text_edit: f64,
    formula_cdm: Option<f64>,
    table_teds: f64,
) -> Result<OverallScore, MetricError> {
    if !(0.0..=1.0).contains(&text_edit) {
        return Err(MetricError::RangeError(format!(
            "text_edit {text_edit} outside [0,1]"
        )));
    }
    if !(0.0..=100.0).contains(&table_teds) {
        return Err(MetricError::RangeError(format!(
            "table_teds {table_teds} outside [0,100]"
        )));
    }
    if let Some(f) = formula_cdm {
        if !(0.0..=100.0).contains(&f) {
            return Err(MetricError::RangeError(format!(
                "formula_cdm {f} outside [0,100]"
            )));
        }
    }
    let text_score = (1.0 - text_edit) * 100.0;
    Ok(OverallScore {
        text_edit,
        formula_cdm,
        table_teds,
        overall: formula_cdm.map(|f| (text_score + f + table_teds) / 3.0),
        overall_star: (text_score + table_teds) / 2.0,
    })
}

/// Flat key/value metric report with the fixed key names used by the report
/// files: teds, teds_s, toc_eds, ned, ard, ciou_mean, ciou_median,
/// ciou_at_<t>, overall, overall_star.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    values: BTreeMap<String, f64>,
}

impl MetricReport {
    pub fn new() -> Self {
        MetricReport::default()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn set_cell_iou(&mut self, report: &CellIouReport) {
        self.set("ciou_mean", report.mean_iou);
        self.set("ciou_median", report.median_iou);
        for (t, r) in report.thresholds.iter().zip(&report.recall_at) {
            self.set(&format!("ciou_at_{t}"), *r);
        }
    }

    pub fn set_overall(&mut self, score: &OverallScore) {
        if let Some(overall) = score.overall {
            self.set("overall", overall);
        }
        self.set("overall_star", score.overall_star);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.values).expect("flat map serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{parse_table, Cell, Row};

    fn table(html: &str) -> HtmlTable {
        parse_table(html).unwrap()
    }

    fn leveled(specs: &[(&str, u32)]) -> Vec<Heading> {
        specs
            .iter()
            .map(|(t, l)| Heading::new(*t).with_level(*l))
            .collect()
    }

    #[test]
    fn single_cell_table_tree_has_four_nodes() {
        let t = table("<table><tr><td>A</td></tr></table>");
        let tree = table_to_tree(&t, false);
        assert_eq!(tree_size(&tree), 4);
        assert_eq!(tree.label, "table");
        assert_eq!(tree.children[0].label, "tbody");
    }

    #[test]
    fn structure_only_erases_content_differences() {
        let a = table("<table><tr><td>x</td></tr></table>");
        let b = table("<table><tr><td>y</td></tr></table>");
        assert_eq!(teds(&a, &b, &TedsConfig::structure_only()).unwrap(), 1.0);
    }

    #[test]
    fn span_change_is_a_unit_relabel() {
        let a = table("<table><tr><td colspan=\"2\">x</td></tr></table>");
        let b = table("<table><tr><td>x</td></tr></table>");
        // one relabel of cost 1 over max tree size 4
        assert!((teds(&a, &b, &TedsConfig::default()).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn teds_identity_is_one() {
        let t = table("<table><thead><tr><td>h</td></tr></thead><tbody><tr><td>b</td></tr></tbody></table>");
        assert_eq!(teds(&t, &t, &TedsConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn teds_single_text_relabel() {
        let a = table("<table><tr><td>a</td></tr></table>");
        let b = table("<table><tr><td>b</td></tr></table>");
        assert!((teds(&a, &b, &TedsConfig::default()).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn teds_s_at_least_teds_on_content_diffs() {
        let a = table("<table><tr><td>alpha</td><td>beta</td></tr></table>");
        let b = table("<table><tr><td>gamma</td><td>beta</td></tr></table>");
        let full = teds(&a, &b, &TedsConfig::default()).unwrap();
        let structural = teds(&a, &b, &TedsConfig::structure_only()).unwrap();
        assert!(structural >= full);
    }

    #[test]
    fn crosspage_single_fragment_equal_to_gold() {
        let gold = table("<table><thead><tr><td>h</td></tr></thead><tbody><tr><td>1</td></tr></tbody></table>");
        assert_eq!(
            crosspage_teds(std::slice::from_ref(&gold), &gold, &TedsConfig::default()).unwrap(),
            1.0
        );
    }

    #[test]
    fn crosspage_prunes_repeated_headers() {
        let gold = table(
            "<table><thead><tr><td>h</td></tr></thead><tbody><tr><td>1</td></tr><tr><td>2</td></tr></tbody></table>",
        );
        let frag1 = table("<table><thead><tr><td>h</td></tr></thead><tbody><tr><td>1</td></tr></tbody></table>");
        let frag2 = table("<table><thead><tr><td>h</td></tr></thead><tbody><tr><td>2</td></tr></tbody></table>");
        assert_eq!(
            crosspage_teds(&[frag1, frag2], &gold, &TedsConfig::default()).unwrap(),
            1.0
        );
    }

    #[test]
    fn crosspage_empty_input_is_an_error() {
        let gold = table("<table><tr><td>1</td></tr></table>");
        assert_eq!(
            crosspage_teds(&[], &gold, &TedsConfig::default()),
            Err(MetricError::EmptyInput)
        );
    }

    #[test]
    fn crosspage_mismatched_fragments_equal_naive_concat() {
        // fragments with differing column counts vs a 3-row gold
        let gold = table(
            "<table><tbody><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr><tr><td>e</td><td>f</td></tr></tbody></table>",
        );
        let frag1 = table("<table><tbody><tr><td>a</td><td>b</td></tr></tbody></table>");
        let frag2 = table("<table><tbody><tr><td>c</td><td>d</td><td>x</td></tr></tbody></table>");
        let merged = concat_fragments(&[frag1.clone(), frag2.clone()]).unwrap();
        let direct = teds(&merged, &gold, &TedsConfig::default()).unwrap();
        let via = crosspage_teds(&[frag1, frag2], &gold, &TedsConfig::default()).unwrap();
        assert_eq!(via, direct);
        assert!(via < 1.0);
    }

    #[test]
    fn toc_tree_nests_by_level() {
        let h = leveled(&[("a", 1), ("b", 2), ("c", 2), ("d", 1)]);
        let tree = build_toc_tree(&h);
        assert_eq!(tree.children.len(), 2);
        assert_eq!(tree.children[0].children.len(), 2);
        assert_eq!(tree.children[1].children.len(), 0);
    }

    #[test]
    fn toc_tree_of_nothing_is_root_only() {
        assert_eq!(tree_size(&build_toc_tree(&[])), 1);
    }

    #[test]
    fn toc_tree_skipped_level_nests_without_phantoms() {
        let h = leveled(&[("a", 1), ("b", 3)]);
        let tree = build_toc_tree(&h);
        assert_eq!(tree.children.len(), 1);
        assert_eq!(tree.children[0].children.len(), 1);
        assert_eq!(tree_size(&tree), 3);
    }

    #[test]
    fn toc_eds_identity_and_text_relabel() {
        let gold = leveled(&[("Risk", 1)]);
        assert_eq!(toc_eds(&gold, &gold).unwrap(), 1.0);
        let pred = leveled(&[("Risks", 1)]);
        // relabel cost 1/5 over trees of size 2
        assert!((toc_eds(&gold, &pred).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn toc_eds_missing_leaf() {
        let gold = leveled(&[("a", 1), ("b", 2), ("c", 2), ("d", 1), ("e", 2)]);
        let pred = leveled(&[("a", 1), ("b", 2), ("c", 2), ("d", 1)]);
        assert!((toc_eds(&pred, &gold).unwrap() - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn toc_eds_invariant_under_uniform_level_shift() {
        let gold = leveled(&[("a", 1), ("b", 2), ("c", 3), ("d", 2)]);
        let shifted = leveled(&[("a", 2), ("b", 3), ("c", 4), ("d", 3)]);
        assert_eq!(toc_eds(&shifted, &gold).unwrap(), 1.0);
    }

    #[test]
    fn ned_examples() {
        assert_eq!(ned("abc", "abc"), 0.0);
        assert_eq!(ned("", ""), 0.0);
        assert!((ned("abc", "abd") - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(ned("", "ab"), 1.0);
    }

    #[test]
    fn cell_iou_report_hand_fixture() {
        let report = summarize_ious(vec![1.0, 0.6, 0.4, 0.2], &[0.3, 0.5, 0.7]);
        assert_eq!(report.recall_at, vec![0.75, 0.5, 0.25]);
        assert!((report.mean_iou - 0.55).abs() < 1e-12);
        assert!((report.median_iou - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cell_iou_of_identical_boxes() {
        let boxes = vec![
            BBox::new(0.1, 0.1, 0.2, 0.2),
            BBox::new(0.5, 0.5, 0.3, 0.1),
        ];
        let report = cell_iou_report(&boxes, &boxes, &[0.3, 0.5, 0.7]).unwrap();
        assert_eq!(report.recall_at, vec![1.0, 1.0, 1.0]);
        assert_eq!(report.mean_iou, 1.0);
        assert_eq!(report.median_iou, 1.0);
    }

    #[test]
    fn cell_iou_recall_monotone_in_threshold() {
        let report = summarize_ious(vec![0.9, 0.55, 0.31, 0.2, 0.7], &[0.1, 0.3, 0.5, 0.7, 0.9]);
        for pair in report.recall_at.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn cell_iou_length_mismatch() {
        let a = vec![BBox::new(0.0, 0.0, 0.1, 0.1)];
        assert_eq!(
            cell_iou_report(&a, &[], &[0.5]),
            Err(MetricError::LengthMismatch(1, 0))
        );
    }

    #[test]
    fn ard_examples() {
        let ids = ["a", "b", "c"];
        assert_eq!(ard(&ids, &ids).unwrap(), 0.0);
        let rev = ["c", "b", "a"];
        assert!((ard(&ids, &rev).unwrap() - 4.0 / 9.0).abs() < 1e-12);
        let four = ["a", "b", "c", "d"];
        let swapped = ["b", "a", "c", "d"];
        assert!((ard(&swapped, &four).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn ard_rejects_different_id_sets() {
        assert_eq!(
            ard(&["a", "b"], &["a", "c"]),
            Err(MetricError::IdSetMismatch)
        );
        assert_eq!(
            ard::<&str>(&[], &[]),
            Err(MetricError::EmptyInput)
        );
    }

    #[test]
    fn overall_reproduces_published_row() {
        let s = overall_scores(0.048, Some(94.21), 92.82).unwrap();
        assert!((s.overall.unwrap() - 94.08).abs() < 0.01);
        assert!((s.overall_star - 94.01).abs() < 0.01);
    }

    #[test]
    fn overall_of_perfect_scores_is_hundred() {
        let s = overall_scores(0.0, Some(100.0), 100.0).unwrap();
        assert_eq!(s.overall, Some(100.0));
        assert_eq!(s.overall_star, 100.0);
    }

    #[test]
    fn overall_requires_documented_ranges() {
        assert!(matches!(
            overall_scores(1.5, None, 50.0),
            Err(MetricError::RangeError(_))
        ));
        assert!(matches!(
            overall_scores(0.5, Some(120.0), 50.0),
            Err(MetricError::RangeError(_))
        ));
    }

    #[test]
    fn report_serializes_fixed_keys() {
        let mut report = MetricReport::new();
        report.set("teds", 0.92);
        report.set("toc_eds", 0.63);
        let ciou = summarize_ious(vec![0.9765, 0.9095, 0.6411, 0.7199, 0.7555], &[0.3, 0.5, 0.7]);
        report.set_cell_iou(&ciou);
        let json = report.to_json();
        for key in ["teds", "toc_eds", "ciou_mean", "ciou_median", "ciou_at_0.3", "ciou_at_0.5", "ciou_at_0.7"] {
            assert!(json.contains(&format!("\"{key}\"")), "missing {key} in {json}");
        }
        let parsed: BTreeMap<String, f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.len(), 7);
    }

    #[test]
    fn teds_symmetric_under_default_costs() {
        let a = table("<table><tr><td>a</td><td>b</td></tr></table>");
        let b = table("<table><tr><td>a</td></tr><tr><td>b</td></tr></table>");
        let cfg = TedsConfig::default();
        assert_eq!(teds(&a, &b, &cfg).unwrap(), teds(&b, &a, &cfg).unwrap());
    }

    #[test]
    fn header_flag_alone_does_not_change_teds() {
        let a = HtmlTable::new(vec![], vec![Row::new(vec![Cell::text("x").header()])]);
        let b = HtmlTable::new(vec![], vec![Row::new(vec![Cell::text("x")])]);
        assert_eq!(teds(&a, &b, &TedsConfig::default()).unwrap(), 1.0);
    }
}
