//! Recursive sign-quadrant biclustering.
//!
//! Each node re-prunes and re-merges its block of the original table, runs
//! TCA, and sends every row and column to the child named by the signs of
//! its scores. Only the diagonal blocks survive a split; cells linking rows
//! and columns of different children are counted as leakage.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::{preprocess, DroppedLine, LineAxis, MergeAxes, MergeMap};
use crate::error::{Error, Result};
use crate::matrix::{adjusted_sparsity, sparsity, LabeledMatrix};
use crate::scalar::{sign, Scalar};
use crate::taxicab::{axis_contributions, contributions, tca, AxisStrategy, QsrRow, TcaResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Signs of the first two axes; two path letters per recursion.
    #[default]
    Quadrant,
    /// Sign of the first axis only.
    Binary,
}

impl SplitMode {
    pub fn axes(self) -> usize {
        match self {
            SplitMode::Quadrant => 2,
            SplitMode::Binary => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub mode: SplitMode,
    /// Number of recursions below the root.
    pub levels: usize,
    pub min_rows: usize,
    pub min_cols: usize,
    pub topic_k: usize,
    /// Re-merge equivalent lines at every node.
    pub merge: bool,
    pub strategy: AxisStrategy,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            mode: SplitMode::Quadrant,
            levels: 1,
            min_rows: 2,
            min_cols: 2,
            topic_k: 10,
            merge: true,
            strategy: AxisStrategy::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "detail")]
pub enum StopReason {
    /// Interior node.
    Split,
    LevelBudget,
    TooSmall(String),
    Degenerate(String),
    /// Nothing left after pruning.
    Empty,
    /// No child received both rows and columns.
    NoBlocks,
}

impl StopReason {
    pub fn describe(&self) -> String {
        match self {
            StopReason::Split => "split".into(),
            StopReason::LevelBudget => "level budget".into(),
            StopReason::TooSmall(d) => format!("too small ({d})"),
            StopReason::Degenerate(d) => format!("degenerate ({d})"),
            StopReason::Empty => "empty after pruning".into(),
            StopReason::NoBlocks => "no diagonal block".into(),
        }
    }
}

/// TCA figures of a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary<T> {
    /// Shape of the node's block of the original table, before re-preprocessing.
    pub raw_rows: usize,
    pub raw_cols: usize,
    /// Shape after pruning and merging.
    pub rows: usize,
    pub cols: usize,
    pub sparsity: f64,
    /// `None` when the table is too small for the index to be defined.
    pub adjusted_sparsity: Option<f64>,
    pub dispersions: Vec<T>,
    pub qsr: Vec<QsrRow<T>>,
}

/// Cells of a split node that join rows and columns of different children.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Leakage<T> {
    pub cells: usize,
    pub mass: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TreeNode<T> {
    pub path: String,
    /// Original labels in original order.
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Block after pruning and merging; not serialized.
    #[serde(skip)]
    pub submatrix: Option<LabeledMatrix<T>>,
    pub summary: Option<NodeSummary<T>>,
    /// Plane (or first-axis) contribution of every current column, in
    /// column order.
    pub col_contributions: Vec<(String, T)>,
    pub row_contributions: Vec<(String, T)>,
    pub topics: Vec<(String, T)>,
    pub phrases: Vec<(String, T)>,
    pub dropped: Vec<DroppedLine>,
    /// Lines sent to a child that received nothing on the other axis.
    pub unassigned: Vec<DroppedLine>,
    pub leakage: Leakage<T>,
    pub stop: StopReason,
    /// Ordered by key: NN, NP, PN, PP (or N, P).
    pub children: Vec<TreeNode<T>>,
}

impl<T: Scalar> TreeNode<T> {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Depth-first, children in key order.
    pub fn walk(&self) -> Vec<&TreeNode<T>> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    pub fn leaves(&self) -> Vec<&TreeNode<T>> {
        self.walk().into_iter().filter(|n| n.is_leaf()).collect()
    }
}

/// Labels that reached no leaf.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConservationAudit {
    pub rows_in_leaves: usize,
    pub cols_in_leaves: usize,
    pub lost_rows: Vec<String>,
    pub lost_cols: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BiclusterTree<T> {
    pub root: TreeNode<T>,
    /// Length of the longest leaf path.
    pub depth: usize,
    pub params: TreeParams,
    pub audit: ConservationAudit,
}

impl<T: Scalar> BiclusterTree<T> {
    pub fn leaf_paths(&self) -> Vec<String> {
        self.root.leaves().iter().map(|n| n.path.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One child of a split: indices into the split matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Block<T> {
    pub key: String,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub matrix: LabeledMatrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split<T> {
    /// Keys holding both rows and columns, in key order.
    pub blocks: Vec<Block<T>>,
    /// Keys holding rows or columns but not both: `(key, rows, cols)`.
    pub empty: Vec<(String, Vec<usize>, Vec<usize>)>,
    pub leakage: Leakage<T>,
}

fn key_letter(s: i8) -> char {
    if s > 0 {
        'P'
    } else {
        'N'
    }
}

fn sign_split<T: Scalar>(
    m: &LabeledMatrix<T>,
    result: &TcaResult<T>,
    n_axes: usize,
) -> Result<Split<T>> {
    if result.axes.len() < n_axes {
        return Err(Error::invalid(format!(
            "split needs {n_axes} axes, result has {}",
            result.axes.len()
        )));
    }
    if result.row_labels.len() != m.nrows() || result.col_labels.len() != m.ncols() {
        return Err(Error::invalid("result does not match the matrix shape"));
    }
    let key = |scores: &dyn Fn(usize) -> T| -> String {
        (0..n_axes).map(|a| key_letter(sign(scores(a)))).collect()
    };
    let row_keys: Vec<String> = (0..m.nrows())
        .map(|i| key(&|a| result.axes[a].f[i]))
        .collect();
    let col_keys: Vec<String> = (0..m.ncols())
        .map(|j| key(&|a| result.axes[a].g[j]))
        .collect();

    let mut groups: BTreeMap<String, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, k) in row_keys.iter().enumerate() {
        groups.entry(k.clone()).or_default().0.push(i);
    }
    for (j, k) in col_keys.iter().enumerate() {
        groups.entry(k.clone()).or_default().1.push(j);
    }

    let mut leakage = Leakage {
        cells: 0,
        mass: T::zero(),
    };
    for &(i, j, x) in m.triplets() {
        if row_keys[i] != col_keys[j] {
            leakage.cells += 1;
            leakage.mass = leakage.mass + x;
        }
    }

    let mut blocks = Vec::new();
    let mut empty = Vec::new();
    for (k, (rows, cols)) in groups {
        if rows.is_empty() || cols.is_empty() {
            empty.push((k, rows, cols));
        } else {
            let matrix = m.submatrix(&rows, &cols);
            blocks.push(Block {
                key: k,
                rows,
                cols,
                matrix,
            });
        }
    }
    Ok(Split {
        blocks,
        empty,
        leakage,
    })
}

/// Splits by the signs of the first two axes into diagonal blocks keyed
/// `NN`, `NP`, `PN`, `PP`.
pub fn quadrant_split<T: Scalar>(m: &LabeledMatrix<T>, result: &TcaResult<T>) -> Result<Split<T>> {
    sign_split(m, result, 2)
}

/// Splits by the sign of the first axis into blocks keyed `N`, `P`.
pub fn binary_split<T: Scalar>(m: &LabeledMatrix<T>, result: &TcaResult<T>) -> Result<Split<T>> {
    sign_split(m, result, 1)
}

/// Top `k` entries by contribution, descending; ties keep label order.
fn top_k<T: Scalar>(items: &[(String, T)], k: usize) -> Vec<(String, T)> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    v.truncate(k);
    v
}

/// Columns with the largest contribution to the node's principal plane.
pub fn topics<T: Scalar>(node: &TreeNode<T>, k: usize) -> Vec<(String, T)> {
    top_k(&node.col_contributions, k)
}

/// Rows with the largest contribution to the node's principal plane.
pub fn phrase_evidence<T: Scalar>(node: &TreeNode<T>, m: usize) -> Vec<(String, T)> {
    top_k(&node.row_contributions, m)
}

/// Per-line contributions to the plane of axes 1-2, or to axis 1 alone.
type Weighted<T> = Vec<(String, T)>;

fn line_contributions<T: Scalar>(result: &TcaResult<T>) -> Result<(Weighted<T>, Weighted<T>)> {
    let (rows, cols) = if result.axes.len() >= 2 {
        let c = contributions(result, [0, 1])?;
        (
            c.rows.into_iter().map(|p| (p.label, p.plane)).collect(),
            c.cols.into_iter().map(|p| (p.label, p.plane)).collect(),
        )
    } else {
        let (r, c) = axis_contributions(result, 0)?;
        (
            result.row_labels.iter().cloned().zip(r).collect(),
            result.col_labels.iter().cloned().zip(c).collect(),
        )
    };
    Ok((rows, cols))
}

struct Ctx<'a, T> {
    original: &'a LabeledMatrix<T>,
    row_index: HashMap<&'a str, usize>,
    col_index: HashMap<&'a str, usize>,
    params: &'a TreeParams,
}

impl<T: Scalar> Ctx<'_, T> {
    fn originals(
        &self,
        map: &MergeMap,
        axis: LineAxis,
        current: &[String],
        picked: &[usize],
    ) -> Vec<usize> {
        let index = match axis {
            LineAxis::Row => &self.row_index,
            LineAxis::Column => &self.col_index,
        };
        let mut out: Vec<usize> = picked
            .iter()
            .flat_map(|&k| {
                let label = &current[k];
                map.members_of(axis, label)
                    .map(|m| m.to_vec())
                    .unwrap_or_else(|| vec![label.clone()])
            })
            .map(|l| index[l.as_str()])
            .collect();
        out.sort_unstable();
        out
    }

    fn lines(&self, axis: LineAxis, idx: &[usize]) -> Vec<DroppedLine> {
        let labels = match axis {
            LineAxis::Row => self.original.row_labels(),
            LineAxis::Column => self.original.col_labels(),
        };
        idx.iter()
            .map(|&k| DroppedLine {
                label: labels[k].clone(),
                axis,
            })
            .collect()
    }

    fn node(
        &self,
        path: String,
        rows: Vec<usize>,
        cols: Vec<usize>,
        level: usize,
    ) -> Result<TreeNode<T>> {
        let p = self.params;
        let raw = self.original.submatrix(&rows, &cols);
        let mut node = TreeNode {
            path,
            row_labels: raw.row_labels().to_vec(),
            col_labels: raw.col_labels().to_vec(),
            submatrix: None,
            summary: None,
            col_contributions: Vec::new(),
            row_contributions: Vec::new(),
            topics: Vec::new(),
            phrases: Vec::new(),
            dropped: Vec::new(),
            unassigned: Vec::new(),
            leakage: Leakage {
                cells: 0,
                mass: T::zero(),
            },
            stop: StopReason::Split,
            children: Vec::new(),
        };
        let is_root = level == 0;

        if raw.nnz() == 0 {
            if is_root {
                return Err(Error::EmptyResult("table has no nonzero cells".into()));
            }
            node.dropped = self
                .lines(LineAxis::Row, &rows)
                .into_iter()
                .chain(self.lines(LineAxis::Column, &cols))
                .collect();
            node.stop = StopReason::Empty;
            return Ok(node);
        }
        let (m, map) = preprocess(&raw, p.merge.then_some(MergeAxes::Both))?;
        node.dropped = map.dropped.clone();

        let want = p.mode.axes();
        let bound = m.nrows().min(m.ncols()).saturating_sub(1);
        let k = want.min(bound);
        let mut result = None;
        let mut stop = None;
        if k > 0 {
            match tca(&m, k, p.strategy) {
                Ok(r) => result = Some(r),
                Err(Error::DegenerateAxis { axis }) => {
                    if is_root {
                        return Err(Error::DegenerateAxis { axis });
                    }
                    stop = Some(StopReason::Degenerate(format!(
                        "axis {axis} has zero dispersion"
                    )));
                    if axis > 1 {
                        result = Some(tca(&m, axis - 1, p.strategy)?);
                    }
                }
                Err(e) => return Err(e),
            }
        }

        let sp = sparsity(&m)?;
        node.summary = Some(NodeSummary {
            raw_rows: raw.nrows(),
            raw_cols: raw.ncols(),
            rows: m.nrows(),
            cols: m.ncols(),
            sparsity: sp,
            adjusted_sparsity: adjusted_sparsity(&m).ok().map(|a| a.adjusted),
            dispersions: result.as_ref().map(|r| r.dispersions()).unwrap_or_default(),
            qsr: result.as_ref().map(|r| r.qsr.clone()).unwrap_or_default(),
        });
        if let Some(r) = &result {
            let (rc, cc) = line_contributions(r)?;
            node.row_contributions = rc;
            node.col_contributions = cc;
            node.topics = topics(&node, p.topic_k);
            node.phrases = phrase_evidence(&node, p.topic_k);
        }

        let stop = stop.or_else(|| {
            if m.nrows() < p.min_rows.max(want + 1) || m.ncols() < p.min_cols.max(want + 1) {
                Some(StopReason::TooSmall(format!(
                    "{}x{} after preprocessing",
                    m.nrows(),
                    m.ncols()
                )))
            } else if level >= p.levels {
                Some(StopReason::LevelBudget)
            } else {
                None
            }
        });
        if let Some(s) = stop {
            node.stop = s;
            node.submatrix = Some(m);
            return Ok(node);
        }
        let result = result.expect("TCA ran for a splittable node");

        let split = sign_split(&m, &result, want)?;
        node.leakage = split.leakage.clone();
        for (_, r, c) in &split.empty {
            let ro = self.originals(&map, LineAxis::Row, m.row_labels(), r);
            let co = self.originals(&map, LineAxis::Column, m.col_labels(), c);
            node.unassigned.extend(self.lines(LineAxis::Row, &ro));
            node.unassigned.extend(self.lines(LineAxis::Column, &co));
        }
        if split.blocks.is_empty() {
            node.stop = StopReason::NoBlocks;
            node.submatrix = Some(m);
            return Ok(node);
        }
        let children: Vec<Result<TreeNode<T>>> = split
            .blocks
            .par_iter()
            .map(|b| {
                let ro = self.originals(&map, LineAxis::Row, m.row_labels(), &b.rows);
                let co = self.originals(&map, LineAxis::Column, m.col_labels(), &b.cols);
                self.node(format!("{}{}", node.path, b.key), ro, co, level + 1)
            })
            .collect();
        node.children = children.into_iter().collect::<Result<_>>()?;
        node.submatrix = Some(m);
        Ok(node)
    }
}

/// Builds the sign-path tree of a table.
pub fn build_tree<T: Scalar>(
    m: &LabeledMatrix<T>,
    params: &TreeParams,
) -> Result<BiclusterTree<T>> {
    if params.min_rows < 2 || params.min_cols < 2 {
        return Err(Error::invalid("minimum node size is 2x2"));
    }
    let ctx = Ctx {
        original: m,
        row_index: m
            .row_labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect(),
        col_index: m
            .col_labels()
            .iter()
            .enumerate()
            .map(|(j, l)| (l.as_str(), j))
            .collect(),
        params,
    };
    let root = ctx.node(
        String::new(),
        (0..m.nrows()).collect(),
        (0..m.ncols()).collect(),
        0,
    )?;

    let leaves = root.leaves();
    let mut row_seen = vec![false; m.nrows()];
    let mut col_seen = vec![false; m.ncols()];
    for leaf in &leaves {
        let Some(sub) = &leaf.submatrix else { continue };
        let dropped: Vec<&str> = leaf.dropped.iter().map(|d| d.label.as_str()).collect();
        for l in &leaf.row_labels {
            if !dropped.contains(&l.as_str()) && sub.nrows() > 0 {
                row_seen[ctx.row_index[l.as_str()]] = true;
            }
        }
        for l in &leaf.col_labels {
            if !dropped.contains(&l.as_str()) && sub.ncols() > 0 {
                col_seen[ctx.col_index[l.as_str()]] = true;
            }
        }
    }
    let lost = |seen: &[bool], labels: &[String]| -> Vec<String> {
        seen.iter()
            .zip(labels)
            .filter(|(s, _)| !**s)
            .map(|(_, l)| l.clone())
            .collect()
    };
    let audit = ConservationAudit {
        rows_in_leaves: row_seen.iter().filter(|&&s| s).count(),
        cols_in_leaves: col_seen.iter().filter(|&&s| s).count(),
        lost_rows: lost(&row_seen, m.row_labels()),
        lost_cols: lost(&col_seen, m.col_labels()),
    };
    let depth = leaves.iter().map(|n| n.path.len()).max().unwrap_or(0);
    Ok(BiclusterTree {
        root,
        depth,
        params: params.clone(),
        audit,
    })
}

/// Flat per-node table: one line per node in depth-first key order.
pub fn node_csv<T: Scalar>(tree: &BiclusterTree<T>) -> String {
    let mut out = String::from(
        "path,level,raw_rows,raw_cols,rows,cols,sparsity,adjusted_sparsity,delta1,delta2,qsr1,qsr2,leak_cells,stop,topics\n",
    );
    let per_level = tree.params.mode.axes();
    for n in tree.root.walk() {
        let s = n.summary.as_ref();
        let num = |x: Option<f64>, d: usize| x.map(|v| format!("{v:.d$}")).unwrap_or_default();
        let disp = |a: usize| {
            num(
                s.and_then(|s| s.dispersions.get(a))
                    .and_then(|x| x.to_f64()),
                4,
            )
        };
        let q = |a: usize| {
            num(
                s.and_then(|s| s.qsr.get(a))
                    .and_then(|x| x.overall.to_f64()),
                2,
            )
        };
        let topics = n
            .topics
            .iter()
            .map(|t| t.0.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            if n.path.is_empty() { "root" } else { &n.path },
            n.path.len() / per_level,
            s.map(|s| s.raw_rows).unwrap_or(n.row_labels.len()),
            s.map(|s| s.raw_cols).unwrap_or(n.col_labels.len()),
            s.map(|s| s.rows).unwrap_or(0),
            s.map(|s| s.cols).unwrap_or(0),
            num(s.map(|s| s.sparsity), 2),
            num(s.and_then(|s| s.adjusted_sparsity), 2),
            disp(0),
            disp(1),
            q(0),
            q(1),
            n.leakage.cells,
            csv_field(&n.stop.describe()),
            csv_field(&topics),
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(sizes: &[(usize, usize)]) -> LabeledMatrix<f64> {
        let (nr, nc) = sizes.iter().fold((0, 0), |a, s| (a.0 + s.0, a.1 + s.1));
        let mut rows = vec![vec![0.0; nc]; nr];
        let (mut r0, mut c0) = (0, 0);
        for (b, &(h, w)) in sizes.iter().enumerate() {
            for i in 0..h {
                for j in 0..w {
                    // Distinct profiles inside a block so nothing merges.
                    if (i + j + b) % 3 != 0 || i == j {
                        rows[r0 + i][c0 + j] = 1.0;
                    }
                }
            }
            r0 += h;
            c0 += w;
        }
        LabeledMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn four_blocks_give_four_leaves() {
        let m = blocks(&[(5, 4), (5, 4), (5, 4), (5, 4)]);
        let t = build_tree(&m, &TreeParams::default()).unwrap();
        assert_eq!(t.leaf_paths(), vec!["NN", "NP", "PN", "PP"]);
        assert_eq!(t.root.leakage.cells, 0);
        assert_eq!(t.depth, 2);
        assert!(t.audit.lost_rows.is_empty() && t.audit.lost_cols.is_empty());
        for leaf in t.root.leaves() {
            assert_eq!(leaf.row_labels.len(), 5);
            assert_eq!(leaf.stop, StopReason::LevelBudget);
        }
    }

    #[test]
    fn binary_split_separates_two_blocks() {
        let m = blocks(&[(4, 3), (3, 4)]);
        let r = tca(&m, 1, AxisStrategy::Auto).unwrap();
        let s = binary_split(&m, &r).unwrap();
        assert_eq!(s.blocks.len(), 2);
        assert_eq!(s.leakage.cells, 0);
        let sizes: Vec<usize> = s.blocks.iter().map(|b| b.rows.len()).collect();
        assert!(sizes == vec![4, 3] || sizes == vec![3, 4]);
    }

    #[test]
    fn topics_sorted_with_label_ties() {
        let node = TreeNode::<f64> {
            path: String::new(),
            row_labels: vec![],
            col_labels: vec![],
            submatrix: None,
            summary: None,
            col_contributions: vec![("b".into(), 10.0), ("a".into(), 10.0), ("c".into(), 80.0)],
            row_contributions: vec![],
            topics: vec![],
            phrases: vec![],
            dropped: vec![],
            unassigned: vec![],
            leakage: Leakage::default(),
            stop: StopReason::Split,
            children: vec![],
        };
        let t = topics(&node, 10);
        let names: Vec<&str> = t.iter().map(|x| x.0.as_str()).collect();
        assert_eq!(names, ["c", "a", "b"]);
        assert_eq!(topics(&node, 1).len(), 1);
    }

    #[test]
    fn independence_root_is_an_error() {
        let m = LabeledMatrix::<f64>::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![1.0, 2.0, 3.0],
        ])
        .unwrap();
        let p = TreeParams {
            merge: false,
            ..TreeParams::default()
        };
        assert!(matches!(
            build_tree(&m, &p),
            Err(Error::DegenerateAxis { axis: 1 })
        ));
    }

    #[test]
    fn csv_has_one_line_per_node() {
        let m = blocks(&[(5, 4), (5, 4), (5, 4), (5, 4)]);
        let t = build_tree(&m, &TreeParams::default()).unwrap();
        let csv = node_csv(&t);
        assert_eq!(csv.lines().count(), 1 + 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("root,0,20,16,"));
    }
}
