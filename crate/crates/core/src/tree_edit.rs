//! Ordered labeled tree edit distance.
//!
//! The engine beneath TEDS and TocEDS: both table trees and TOC trees lower
//! to [`OrderedTree`] and are compared with [`tree_edit_distance`] under a
//! pluggable [`CostModel`].
//!
//! The algorithm is the classic keyroot dynamic program of Zhang and Shasha
//! (1989), chosen for worst-case polynomial behavior on the deep, narrow
//! trees that TOCs produce. Scratch tables are per call, so concurrent
//! invocations share nothing.

use thiserror::Error;

/// Hard cap on node count per tree; bounds the quadratic DP tables.
pub const MAX_TREE_NODES: usize = 20_000;

/// Distinguishes purely structural nodes (tags, synthetic roots) from nodes
/// whose label carries recognized content (cell text, heading text). Cost
/// models may price relabels differently per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Structural,
    Content,
}

/// A finite ordered tree with string labels.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedTree {
    pub label: String,
    pub kind: NodeKind,
    pub children: Vec<OrderedTree>,
}

impl OrderedTree {
    pub fn structural(label: impl Into<String>, children: Vec<OrderedTree>) -> Self {
        OrderedTree {
            label: label.into(),
            kind: NodeKind::Structural,
            children,
        }
    }

    pub fn content(label: impl Into<String>, children: Vec<OrderedTree>) -> Self {
        OrderedTree {
            label: label.into(),
            kind: NodeKind::Content,
            children,
        }
    }

    /// Node count of the tree (always ≥ 1).
    pub fn size(&self) -> usize {
        tree_size(self)
    }
}

/// Edit operation costs. Implementations must satisfy:
/// `relabel_cost(a, a) == 0`, all costs ≥ 0, and
/// `relabel_cost(a, b) <= insert_cost(b) + delete_cost(a)` so matching a
/// node pair is never worse than replacing it by a delete plus an insert.
pub trait CostModel {
    fn insert_cost(&self, node: &OrderedTree) -> f64;
    fn delete_cost(&self, node: &OrderedTree) -> f64;
    fn relabel_cost(&self, a: &OrderedTree, b: &OrderedTree) -> f64;
}

/// Unit costs: insert/delete 1, relabel 0 iff label and kind agree, else 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitCost;

impl CostModel for UnitCost {
    fn insert_cost(&self, _node: &OrderedTree) -> f64 {
        1.0
    }

    fn delete_cost(&self, _node: &OrderedTree) -> f64 {
        1.0
    }

    fn relabel_cost(&self, a: &OrderedTree, b: &OrderedTree) -> f64 {
        if a.label == b.label && a.kind == b.kind {
            0.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeEditError {
    #[error("tree has {0} nodes, exceeding the {MAX_TREE_NODES}-node limit")]
    TreeTooLarge(usize),
}

/// Node count of a tree.
pub fn tree_size(root: &OrderedTree) -> usize {
    let mut count = 0;
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        count += 1;
        stack.extend(node.children.iter());
    }
    count
}

/// Postorder view of a tree with the auxiliary arrays the keyroot DP needs.
struct PostOrder<'a> {
    /// Nodes in postorder.
    nodes: Vec<&'a OrderedTree>,
    /// Leftmost leaf descendant of each node, as a postorder index.
    lld: Vec<usize>,
    /// Keyroots in ascending postorder: the root plus every node with a left
    /// sibling; equivalently the highest postorder index per distinct lld.
    keyroots: Vec<usize>,
}

impl<'a> PostOrder<'a> {
    fn build(root: &'a OrderedTree) -> Result<Self, TreeEditError> {
        let mut nodes = Vec::new();
        let mut lld = Vec::new();
        // Iterative postorder; `Emit` marks a node whose children are done.
        enum Visit<'a> {
            Enter(&'a OrderedTree),
            Emit(&'a OrderedTree),
        }
        let mut stack = vec![Visit::Enter(root)];
        while let Some(visit) = stack.pop() {
            match visit {
                Visit::Enter(node) => {
                    stack.push(Visit::Emit(node));
                    for child in node.children.iter().rev() {
                        stack.push(Visit::Enter(child));
                    }
                }
                Visit::Emit(node) => {
                    let idx = nodes.len();
                    let node_lld = if node.children.is_empty() {
                        idx
                    } else {
                        // First child's subtree was emitted earliest: its span
                        // starts at idx - (size of all children subtrees).
                        let span: usize = node.children.iter().map(tree_size).sum();
                        lld[idx - span]
                    };
                    nodes.push(node);
                    lld.push(node_lld);
                    if nodes.len() > MAX_TREE_NODES {
                        return Err(TreeEditError::TreeTooLarge(tree_size(root)));
                    }
                }
            }
        }
        // Highest postorder index per lld value is a keyroot.
        let n = nodes.len();
        let mut keyroots = Vec::new();
        for i in 0..n {
            if !(i + 1..n).any(|j| lld[j] == lld[i]) {
                keyroots.push(i);
            }
        }
        Ok(PostOrder {
            nodes,
            lld,
            keyroots,
        })
    }
}

/// Minimal total cost of an edit script (insert, delete, relabel) turning
/// `a` into `b` under ordered-tree edit semantics.
///
/// Symmetric whenever the cost model is symmetric; returns
/// [`TreeEditError::TreeTooLarge`] past [`MAX_TREE_NODES`] nodes.
pub fn tree_edit_distance(
    a: &OrderedTree,
    b: &OrderedTree,
    cost: &impl CostModel,
) -> Result<f64, TreeEditError> {
    let t1 = PostOrder::build(a)?;
    let t2 = PostOrder::build(b)?;
    let n1 = t1.nodes.len();
    let n2 = t2.nodes.len();

    let mut treedist = vec![0.0f64; n1 * n2];
    // Forest-distance scratch, reused across keyroot pairs.
    let mut fd = vec![0.0f64; (n1 + 1) * (n2 + 1)];

    for &k1 in &t1.keyroots {
        for &k2 in &t2.keyroots {
            let l1 = t1.lld[k1];
            let l2 = t2.lld[k2];
            let m = k1 - l1 + 1;
            let n = k2 - l2 + 1;
            let w = n + 1; // row stride of fd
            fd[0] = 0.0;
            for di in 1..=m {
                fd[di * w] = fd[(di - 1) * w] + cost.delete_cost(t1.nodes[l1 + di - 1]);
            }
            for dj in 1..=n {
                fd[dj] = fd[dj - 1] + cost.insert_cost(t2.nodes[l2 + dj - 1]);
            }
            for di in 1..=m {
                let x = l1 + di - 1;
                for dj in 1..=n {
                    let y = l2 + dj - 1;
                    let del = fd[(di - 1) * w + dj] + cost.delete_cost(t1.nodes[x]);
                    let ins = fd[di * w + dj - 1] + cost.insert_cost(t2.nodes[y]);
                    if t1.lld[x] == l1 && t2.lld[y] == l2 {
                        let rel =
                            fd[(di - 1) * w + dj - 1] + cost.relabel_cost(t1.nodes[x], t2.nodes[y]);
                        let d = del.min(ins).min(rel);
                        fd[di * w + dj] = d;
                        treedist[x * n2 + y] = d;
                    } else {
                        // Both spans contain complete subtrees rooted at x and
                        // y whose distance is already in `treedist`.
                        let sub = fd[(t1.lld[x] - l1) * w + (t2.lld[y] - l2)]
                            + treedist[x * n2 + y];
                        fd[di * w + dj] = del.min(ins).min(sub);
                    }
                }
            }
        }
    }

    Ok(treedist[(n1 - 1) * n2 + (n2 - 1)])
}
