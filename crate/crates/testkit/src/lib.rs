//! Test-only oracles and fixture generators shared by the workspace test
//! targets. This crate is only ever a dev-dependency; nothing in it ships.
//!
//! The tree-edit oracle here evaluates the recursive definition of ordered
//! forest edit distance directly and stays independent of the keyroot DP it
//! is used to check.

use std::collections::HashMap;

use finocr_core::table::{Cell, HtmlTable, Row};
use finocr_core::tree_edit::{CostModel, OrderedTree};
use rand::prelude::*;

// ---------------------------------------------------------------------------
// Brute-force tree edit distance

/// Arena of subtree references with stable ids for memoization.
struct Arena<'a> {
    nodes: Vec<&'a OrderedTree>,
    children: Vec<Vec<usize>>,
}

impl<'a> Arena<'a> {
    fn build(root: &'a OrderedTree) -> Self {
        let mut arena = Arena {
            nodes: Vec::new(),
            children: Vec::new(),
        };
        arena.add(root);
        arena
    }

    fn add(&mut self, node: &'a OrderedTree) -> usize {
        let id = self.nodes.len();
        self.nodes.push(node);
        self.children.push(Vec::new());
        let child_ids: Vec<usize> = node.children.iter().map(|c| self.add(c)).collect();
        self.children[id] = child_ids;
        id
    }
}

/// Exhaustive minimal edit-script cost between two trees, evaluated from the
/// recursive forest-distance definition (delete rightmost root, insert
/// rightmost root, or match the pair and recurse on child forests).
///
/// Exponential without memoization; intended for small trees only.
pub fn brute_force_distance(a: &OrderedTree, b: &OrderedTree, cost: &impl CostModel) -> f64 {
    let arena_a = Arena::build(a);
    let arena_b = Arena::build(b);
    let mut memo: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    forest_distance(&[0], &[0], &arena_a, &arena_b, cost, &mut memo)
}

fn forest_distance(
    f: &[usize],
    g: &[usize],
    arena_a: &Arena,
    arena_b: &Arena,
    cost: &impl CostModel,
    memo: &mut HashMap<(Vec<usize>, Vec<usize>), f64>,
) -> f64 {
    if f.is_empty() && g.is_empty() {
        return 0.0;
    }
    let key = (f.to_vec(), g.to_vec());
    if let Some(&d) = memo.get(&key) {
        return d;
    }

    let mut best = f64::INFINITY;
    if let Some((&v, rest)) = f.split_last() {
        // Delete v: its children are spliced into its place.
        let mut spliced: Vec<usize> = rest.to_vec();
        spliced.extend(&arena_a.children[v]);
        let d = cost.delete_cost(arena_a.nodes[v])
            + forest_distance(&spliced, g, arena_a, arena_b, cost, memo);
        best = best.min(d);
    }
    if let Some((&w, rest)) = g.split_last() {
        let mut spliced: Vec<usize> = rest.to_vec();
        spliced.extend(&arena_b.children[w]);
        let d = cost.insert_cost(arena_b.nodes[w])
            + forest_distance(f, &spliced, arena_a, arena_b, cost, memo);
        best = best.min(d);
    }
    if let (Some((&v, rest_f)), Some((&w, rest_g))) = (f.split_last(), g.split_last()) {
        let d = cost.relabel_cost(arena_a.nodes[v], arena_b.nodes[w])
            + forest_distance(
                &arena_a.children[v],
                &arena_b.children[w],
                arena_a,
                arena_b,
                cost,
                memo,
            )
            + forest_distance(rest_f, rest_g, arena_a, arena_b, cost, memo);
        best = best.min(d);
    }

    memo.insert(key, best);
    best
}

/// Oracle-side replica of the metric cost model: unit insert/delete, 0/1
/// relabel on structural labels; content labels split at the unit separator
/// into a structural prefix (cost 1 when different) and a text payload
/// priced by normalized string edit distance.
pub struct MetricOracleCost;

impl CostModel for MetricOracleCost {
    fn insert_cost(&self, _: &OrderedTree) -> f64 {
        1.0
    }

    fn delete_cost(&self, _: &OrderedTree) -> f64 {
        1.0
    }

    fn relabel_cost(&self, a: &OrderedTree, b: &OrderedTree) -> f64 {
        use finocr_core::tree_edit::NodeKind;
        match (a.kind, b.kind) {
            (NodeKind::Structural, NodeKind::Structural) => {
                if a.label == b.label {
                    0.0
                } else {
                    1.0
                }
            }
            (NodeKind::Content, NodeKind::Content) => {
                let split = |l: &str| match l.split_once('\u{1f}') {
                    Some((p, t)) => (p.to_string(), t.to_string()),
                    None => (String::new(), l.to_string()),
                };
                let (pa, ta) = split(&a.label);
                let (pb, tb) = split(&b.label);
                if pa != pb {
                    1.0
                } else {
                    finocr_core::metrics::ned(&ta, &tb)
                }
            }
            _ => 1.0,
        }
    }
}

/// TEDS computed through the brute-force distance: the independent route of
/// the dual check against the keyroot DP.
pub fn oracle_teds(pred: &HtmlTable, gold: &HtmlTable, structure_only: bool) -> f64 {
    use finocr_core::metrics::table_to_tree;
    use finocr_core::table::normalize_table;
    use finocr_core::tree_edit::tree_size;
    let a = table_to_tree(&normalize_table(pred), structure_only);
    let b = table_to_tree(&normalize_table(gold), structure_only);
    let d = brute_force_distance(&a, &b, &MetricOracleCost);
    let denom = tree_size(&a).max(tree_size(&b)) as f64;
    (1.0 - d / denom).max(0.0)
}

// ---------------------------------------------------------------------------
// Random fixtures

/// Random ordered tree with exactly `nodes` nodes, labels drawn from a small
/// alphabet so collisions occur, mixed structural/content kinds.
pub fn random_tree(rng: &mut impl Rng, nodes: usize) -> OrderedTree {
    assert!(nodes >= 1);
    let mut root = random_node(rng);
    for _ in 1..nodes {
        let child = random_node(rng);
        let total = count_nodes(&root);
        let target = rng.gen_range(0..total);
        let mut seen = 0usize;
        insert_at(&mut root, child, target, &mut seen);
    }
    root
}

fn random_node(rng: &mut impl Rng) -> OrderedTree {
    let labels = ["a", "b", "c", "x", "y"];
    let label = *labels.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        OrderedTree::structural(label, vec![])
    } else {
        OrderedTree::content(label, vec![])
    }
}

fn count_nodes(node: &OrderedTree) -> usize {
    1 + node.children.iter().map(count_nodes).sum::<usize>()
}

fn insert_at(
    node: &mut OrderedTree,
    child: OrderedTree,
    target: usize,
    seen: &mut usize,
) -> Option<OrderedTree> {
    if *seen == target {
        let pos = child.label.len() % (node.children.len() + 1);
        node.children.insert(pos.min(node.children.len()), child);
        *seen += 1;
        return None;
    }
    *seen += 1;
    let mut pending = Some(child);
    for c in node.children.iter_mut() {
        pending = Some(insert_at(c, pending.take().unwrap(), target, seen)?);
    }
    pending
}

const WORDS: &[&str] = &[
    "revenue", "net", "total", "assets", "cash", "2024", "2023", "1,204", "96.5", "(312)", "",
    "income", "费用", "合计", "profit", "loss",
];

fn random_text(rng: &mut impl Rng) -> String {
    WORDS.choose(rng).unwrap().to_string()
}

/// Configuration for [`random_table`].
#[derive(Debug, Clone)]
pub struct TableGen {
    pub max_head_rows: usize,
    pub max_body_rows: usize,
    pub max_cols: usize,
    pub allow_rowspan: bool,
    pub allow_colspan: bool,
    /// Occasionally flag body cells as headers (serializes as `th`).
    pub header_cells_in_body: bool,
}

impl Default for TableGen {
    fn default() -> Self {
        TableGen {
            max_head_rows: 2,
            max_body_rows: 6,
            max_cols: 5,
            allow_rowspan: true,
            allow_colspan: true,
            header_cells_in_body: false,
        }
    }
}

/// Random valid table in the restricted dialect. Spans never overflow the
/// table boundary and every row is generated at the full logical width, so
/// expanded row widths are uniform.
pub fn random_table(rng: &mut impl Rng, cfg: &TableGen) -> HtmlTable {
    let n_cols = rng.gen_range(1..=cfg.max_cols);
    let head_rows = rng.gen_range(0..=cfg.max_head_rows);
    let body_rows = rng.gen_range(1..=cfg.max_body_rows);
    let total_rows = head_rows + body_rows;

    // Pending rowspan coverage per column: rows still covered below.
    let mut carry = vec![0usize; n_cols];
    let mut rows: Vec<Row> = Vec::new();
    for r in 0..total_rows {
        let in_head = r < head_rows;
        let mut cells = Vec::new();
        let mut col = 0usize;
        while col < n_cols {
            if carry[col] > 0 {
                carry[col] -= 1;
                col += 1;
                continue;
            }
            let max_cs = {
                let mut free = 1usize;
                while col + free < n_cols && carry[col + free] == 0 {
                    free += 1;
                }
                free
            };
            let colspan = if cfg.allow_colspan && max_cs > 1 && rng.gen_bool(0.2) {
                rng.gen_range(2..=max_cs.min(3))
            } else {
                1
            };
            let max_rs = total_rows - r;
            let rowspan = if cfg.allow_rowspan && !in_head && max_rs > 1 && rng.gen_bool(0.15) {
                rng.gen_range(2..=max_rs.min(3))
            } else {
                1
            };
            let mut cell = Cell::text(random_text(rng)).with_span(rowspan as u32, colspan as u32);
            if in_head || (cfg.header_cells_in_body && rng.gen_bool(0.05)) {
                cell.is_header = true;
            }
            cells.push(cell);
            for dc in 0..colspan {
                carry[col + dc] = rowspan - 1;
            }
            col += colspan;
        }
        if cells.is_empty() {
            // Entire row covered by carryovers; keep the row valid anyway.
            for c in carry.iter_mut() {
                if *c > 0 {
                    *c -= 1;
                }
            }
            cells.push(Cell::text(random_text(rng)));
        }
        rows.push(Row::new(cells));
    }
    let body = rows.split_off(head_rows);
    HtmlTable::new(rows, body)
}

/// Random gold table suitable for split/merge round trips: one full-width
/// header row and a rowspan-free body, so any body-row boundary is a valid
/// page split.
pub fn random_mergeable_gold(rng: &mut impl Rng) -> HtmlTable {
    let cfg = TableGen {
        max_head_rows: 0,
        max_body_rows: 10,
        max_cols: 5,
        allow_rowspan: false,
        allow_colspan: true,
        header_cells_in_body: false,
    };
    let mut t = random_table(rng, &cfg);
    let n_cols = finocr_core::table::expand_grid(&t).n_cols;
    let header = Row::new(
        (0..n_cols)
            .map(|i| Cell::text(format!("col {i}")).header())
            .collect(),
    );
    while t.body_rows.len() < 2 {
        t.body_rows.push(Row::new(
            (0..n_cols).map(|_| Cell::text(random_text(rng))).collect(),
        ));
    }
    t.head_rows = vec![header];
    t
}

/// Split a gold table at random body-row boundaries into `k` fragments, each
/// repeating the gold header.
pub fn split_with_repeated_headers(
    gold: &HtmlTable,
    rng: &mut impl Rng,
    k: usize,
) -> Vec<HtmlTable> {
    assert!(k >= 1 && gold.body_rows.len() >= k);
    let mut cuts: Vec<usize> = (1..gold.body_rows.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    cuts.push(gold.body_rows.len());

    let mut fragments = Vec::new();
    let mut start = 0usize;
    for end in cuts {
        fragments.push(HtmlTable::new(
            gold.head_rows.clone(),
            gold.body_rows[start..end].to_vec(),
        ));
        start = end;
    }
    fragments
}

// ---------------------------------------------------------------------------
// Tokenizers for anchor-detection tests

enum Piece<'a> {
    Open { name: &'a str, attrs: Vec<&'a str> },
    Close { name: &'a str },
    Text(&'a str),
}

/// Scan canonical dialect output into tag/text pieces. Only handles the
/// shapes `serialize_table` emits.
fn scan_pieces(html: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut rest = html;
    while !rest.is_empty() {
        if let Some(stripped) = rest.strip_prefix("</") {
            let end = stripped.find('>').expect("canonical html");
            pieces.push(Piece::Close {
                name: &stripped[..end],
            });
            rest = &stripped[end + 1..];
        } else if rest.starts_with('<') {
            let end = rest.find('>').expect("canonical html");
            let inner = &rest[1..end];
            let mut parts = inner.split(' ');
            let name = parts.next().unwrap();
            // Attribute tokens keep their leading space so token
            // concatenation reproduces the source string exactly.
            let mut attrs = Vec::new();
            let mut offset = 1 + name.len();
            for part in parts {
                attrs.push(&rest[offset..offset + 1 + part.len()]);
                offset += 1 + part.len();
            }
            pieces.push(Piece::Open { name, attrs });
            rest = &rest[end + 1..];
        } else {
            let end = rest.find('<').unwrap_or(rest.len());
            pieces.push(Piece::Text(&rest[..end]));
            rest = &rest[end..];
        }
    }
    pieces
}

/// Start-tag tokenization: each opening tag starts with a `"<td"`-style
/// token, attributes and `">"` follow separately; closing tags are single
/// tokens. Token concatenation reproduces the input.
pub fn tokenize_start_tag_style(html: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for piece in scan_pieces(html) {
        match piece {
            Piece::Open { name, attrs } => {
                tokens.push(format!("<{name}"));
                for attr in attrs {
                    tokens.push(attr.to_string());
                }
                tokens.push(">".to_string());
            }
            Piece::Close { name } => tokens.push(format!("</{name}>")),
            Piece::Text(t) => tokens.push(t.to_string()),
        }
    }
    tokens
}

/// Compact tokenization: adjacent tag boundaries fuse into `"><"` /
/// `"></"` tokens and tag names stand alone, the shape dense HTML takes
/// under subword tokenizers. Token concatenation reproduces the input.
pub fn tokenize_compact_style(html: &str) -> Vec<String> {
    let mut tokens: Vec<String> = Vec::new();
    let mut pending_gt = false;
    for piece in scan_pieces(html) {
        match piece {
            Piece::Open { name, attrs } => {
                tokens.push(if pending_gt { "><" } else { "<" }.to_string());
                tokens.push(name.to_string());
                for attr in attrs {
                    tokens.push(attr.to_string());
                }
                pending_gt = true;
            }
            Piece::Close { name } => {
                tokens.push(if pending_gt { "></" } else { "</" }.to_string());
                tokens.push(name.to_string());
                pending_gt = true;
            }
            Piece::Text(t) => {
                if pending_gt {
                    tokens.push(">".to_string());
                    pending_gt = false;
                }
                tokens.push(t.to_string());
            }
        }
    }
    if pending_gt {
        tokens.push(">".to_string());
    }
    tokens
}

// ---------------------------------------------------------------------------
// Numeric helpers

/// Central finite difference of `f` along coordinate `i` at `x`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    hi[i] += h;
    lo[i] -= h;
    (f(&hi) - f(&lo)) / (2.0 * h)
}

/// Random heading level sequence: starts at 1, each next level at most one
/// deeper than its predecessor, shallower jumps free.
pub fn random_level_sequence(rng: &mut impl Rng, n: usize, max_level: u32) -> Vec<u32> {
    let mut levels = Vec::with_capacity(n);
    let mut prev = 1u32;
    for i in 0..n {
        let level = if i == 0 {
            1
        } else {
            let upper = (prev + 1).min(max_level);
            rng.gen_range(1..=upper)
        };
        levels.push(level);
        prev = level;
    }
    levels
}
