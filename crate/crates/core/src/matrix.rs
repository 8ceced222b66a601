//! Labeled nonnegative count tables and their sparsity diagnostics.
//!
//! Cells are kept as coordinate triplets in row-major order with explicit
//! zeros removed, so two matrices with the same content compare equal and
//! serialize identically.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis selector for marginal statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Rows => "row",
            Axis::Columns => "column",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix<T> {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    /// `(row, col, value)` with `value > 0`, sorted row-major.
    cells: Vec<(usize, usize, T)>,
}

impl<T: Scalar> LabeledMatrix<T> {
    /// Builds a matrix from triplets. Duplicate coordinates are summed and
    /// zero values dropped.
    pub fn from_triplets(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        check_labels(&row_labels, "row")?;
        check_labels(&col_labels, "column")?;
        let (nr, nc) = (row_labels.len(), col_labels.len());
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (i, j, x) in triplets {
            if i >= nr || j >= nc {
                return Err(Error::invalid(format!(
                    "cell ({i}, {j}) outside {nr}x{nc} table"
                )));
            }
            if !x.is_finite() || x < T::zero() {
                return Err(Error::invalid(format!(
                    "cell ({i}, {j}) = {x} is not a nonnegative count"
                )));
            }
            let e = acc.entry((i, j)).or_insert_with(T::zero);
            *e = *e + x;
        }
        let cells = acc
            .into_iter()
            .filter(|&(_, x)| x > T::zero())
            .map(|((i, j), x)| (i, j, x))
            .collect();
        Ok(Self {
            row_labels,
            col_labels,
            cells,
        })
    }

    pub fn from_dense(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        dense: &Dense<T>,
    ) -> Result<Self> {
        if dense.nrows() != row_labels.len() || dense.ncols() != col_labels.len() {
            return Err(Error::invalid(format!(
                "{}x{} values for {} row and {} column labels",
                dense.nrows(),
                dense.ncols(),
                row_labels.len(),
                col_labels.len()
            )));
        }
        let triplets = (0..dense.nrows())
            .flat_map(|i| (0..dense.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, dense[(i, j)]))
            .collect::<Vec<_>>();
        Self::from_triplets(row_labels, col_labels, triplets)
    }

    /// Dense constructor with generated labels `R1..` / `C1..`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dense = Dense::from_rows(rows);
        Self::from_dense(
            default_labels("R", dense.nrows()),
            default_labels("C", dense.ncols()),
            &dense,
        )
    }

    /// Like [`from_triplets`](Self::from_triplets) but rejects non-integral
    /// cells, as required for contingency data.
    pub fn from_counts(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let m = Self::from_triplets(row_labels, col_labels, triplets)?;
        if let Some(&(i, j, x)) = m.cells.iter().find(|c| c.2.fract() != T::zero()) {
            return Err(Error::invalid(format!(
                "cell ({}, {}) = {x} is not an integer count",
                m.row_labels[i], m.col_labels[j]
            )));
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Nonzero cells in row-major order.
    pub fn triplets(&self) -> &[(usize, usize, T)] {
        &self.cells
    }

    pub fn nnz(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nrows() == 0 || self.ncols() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.cells
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&(i, j)))
            .map_or(T::zero(), |k| self.cells[k].2)
    }

    pub fn total(&self) -> T {
        self.cells.iter().map(|c| c.2).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.cells.iter().all(|c| c.2.fract() == T::zero())
    }

    pub fn row_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.nrows()];
        for &(i, _, x) in &self.cells {
            out[i] = out[i] + x;
        }
        out
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.ncols()];
        for &(_, j, x) in &self.cells {
            out[j] = out[j] + x;
        }
        out
    }

    pub fn marginals(&self, axis: Axis) -> Vec<T> {
        match axis {
            Axis::Rows => self.row_sums(),
            Axis::Columns => self.col_sums(),
        }
    }

    pub fn labels(&self, axis: Axis) -> &[String] {
        match axis {
            Axis::Rows => &self.row_labels,
            Axis::Columns => &self.col_labels,
        }
    }

    pub fn to_dense(&self) -> Dense<T> {
        let mut d = Dense::zeros(self.nrows(), self.ncols());
        for &(i, j, x) in &self.cells {
            d[(i, j)] = x;
        }
        d
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.col_labels.clone(),
            self.row_labels.clone(),
            self.cells.iter().map(|&(i, j, x)| (j, i, x)),
        )
        .expect("transpose of a valid matrix is valid")
    }

    /// Keeps the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut rmap = vec![usize::MAX; self.nrows()];
        for (new, &old) in rows.iter().enumerate() {
            rmap[old] = new;
        }
        let mut cmap = vec![usize::MAX; self.ncols()];
        for (new, &old) in cols.iter().enumerate() {
            cmap[old] = new;
        }
        let triplets = self
            .cells
            .iter()
            .filter(|&&(i, j, _)| rmap[i] != usize::MAX && cmap[j] != usize::MAX)
            .map(|&(i, j, x)| (rmap[i], cmap[j], x));
        Self::from_triplets(
            rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            triplets,
        )
        .expect("submatrix of a valid matrix is valid")
    }

    /// Checks the analysis precondition `n > 0`.
    pub fn require_nonzero_total(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid("matrix has no rows or no columns"));
        }
        if self.total() <= T::zero() {
            return Err(Error::invalid("grand total is zero"));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> LabeledMatrix<U> {
        LabeledMatrix {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            cells: self
                .cells
                .iter()
                .map(|&(i, j, x)| {
                    (
                        i,
                        j,
                        U::from_f64(x.to_f64().unwrap_or(0.0)).unwrap_or_else(U::zero),
                    )
                })
                .collect(),
        }
    }
}

pub fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn check_labels(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::invalid(format!("duplicate {what} label `{l}`")));
        }
    }
    Ok(())
}

/// Percentage of zero cells.
pub fn sparsity<T: Scalar>(m: &LabeledMatrix<T>) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::invalid("sparsity of an empty matrix"));
    }
    let cells = (m.nrows() * m.ncols()) as f64;
    Ok(100.0 * (cells - m.nnz() as f64) / cells)
}

/// Sparsity rescaled by the sparsest attainable value for the shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjustedSparsity {
    pub sparsity: f64,
    /// `100 (1 - 1/min(I, J))`, the sparsity of a permuted diagonal table.
    pub upper_boundary: f64,
    pub adjusted: f64,
    /// `adjusted >= 98`: maps are expected to be hard to interpret.
    pub hard_to_interpret: bool,
}

/// Interpretability threshold on the adjusted index, in percent.
pub const INTERPRETABILITY_THRESHOLD: f64 = 98.0;

/// Adjusted sparsity from a shape and a sparsity percentage.
pub fn adjusted_sparsity_from(
    rows: usize,
    cols: usize,
    sparsity_pct: f64,
) -> Result<AdjustedSparsity> {
    let k = rows.min(cols);
    if k < 2 {
        return Err(Error::invalid(format!(
            "adjusted sparsity needs min(I, J) >= 2, got {rows}x{cols}"
        )));
    }
    let bound = 1.0 - 1.0 / k as f64;
    let adjusted = sparsity_pct / bound;
    Ok(AdjustedSparsity {
        sparsity: sparsity_pct,
        upper_boundary: 100.0 * bound,
        adjusted,
        hard_to_interpret: adjusted >= INTERPRETABILITY_THRESHOLD,
    })
}

pub fn adjusted_sparsity<T: Scalar>(m: &LabeledMatrix<T>) -> Result<AdjustedSparsity> {
    let s = sparsity(m)?;
    adjusted_sparsity_from(m.nrows(), m.ncols(), s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub axis: Axis,
    /// `(marginal value, number of rows or columns with that value)`, ascending.
    pub histogram: Vec<(f64, usize)>,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl MarginalSummary {
    pub fn count(&self) -> usize {
        self.histogram.iter().map(|h| h.1).sum()
    }
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn marginal_summary<T: Scalar>(m: &LabeledMatrix<T>, axis: Axis) -> Result<MarginalSummary> {
    if m.is_empty() {
        return Err(Error::invalid("marginal summary of an empty matrix"));
    }
    let mut values: Vec<f64> = m
        .marginals(axis)
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect();
    values.sort_by(f64::total_cmp);
    let mut histogram: Vec<(f64, usize)> = Vec::new();
    for &v in &values {
        match histogram.last_mut() {
            Some((last, n)) if *last == v => *n += 1,
            _ => histogram.push((v, 1)),
        }
    }
    Ok(MarginalSummary {
        axis,
        histogram,
        min: values[0],
        q1: quantile_sorted(&values, 0.25),
        median: quantile_sorted(&values, 0.5),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        q3: quantile_sorted(&values, 0.75),
        max: values[values.len() - 1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HapaxReport {
    pub axis: Axis,
    pub count: usize,
    pub labels: Vec<String>,
}

/// Rows or columns whose marginal total is exactly one.
pub fn hapax_report<T: Scalar>(m: &LabeledMatrix<T>, axis: Axis) -> HapaxReport {
    let labels: Vec<String> = m
        .marginals(axis)
        .into_iter()
        .zip(m.labels(axis))
        .filter(|(s, _)| *s == T::one())
        .map(|(_, l)| l.clone())
        .collect();
    HapaxReport {
        axis,
        count: labels.len(),
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> LabeledMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        LabeledMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn identity_sparsity() {
        assert!((sparsity(&identity(3)).unwrap() - 66.666_666_666_7).abs() < 1e-9);
    }

    #[test]
    fn dense_ones_have_no_zeros() {
        let m = LabeledMatrix::from_rows(&vec![vec![1.0; 5]; 4]).unwrap();
        assert_eq!(sparsity(&m).unwrap(), 0.0);
    }

    #[test]
    fn thirty_seven_nonzeros_in_15_by_21() {
        let triplets = (0..37).map(|k| (k % 15, k % 21, 1.0));
        let m = LabeledMatrix::from_triplets(
            default_labels("R", 15),
            default_labels("C", 21),
            triplets,
        )
        .unwrap();
        assert_eq!(m.nnz(), 37);
        let s = sparsity(&m).unwrap();
        assert!((s - 100.0 * 278.0 / 315.0).abs() < 1e-12);
        assert!((s - 88.254).abs() < 5e-4);
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let m = LabeledMatrix::<f64>::from_triplets(vec![], vec!["a".into()], []).unwrap();
        assert!(sparsity(&m).is_err());
    }

    #[test]
    fn adjusted_sparsity_values() {
        let a = adjusted_sparsity_from(15, 21, 88.25).unwrap();
        assert!((a.upper_boundary - 93.33).abs() < 0.005);
        assert!((a.adjusted - 94.55).abs() < 0.005);
        assert!(!a.hard_to_interpret);

        for n in 2..12 {
            let a = adjusted_sparsity(&identity(n)).unwrap();
            assert!((a.sparsity - 100.0 * (1.0 - 1.0 / n as f64)).abs() < 1e-9);
            assert!((a.adjusted - 100.0).abs() < 1e-9);
            assert!(a.hard_to_interpret);
        }
        assert!(adjusted_sparsity_from(1, 40, 10.0).is_err());
    }

    #[test]
    fn marginal_histograms() {
        let s = marginal_summary(&identity(3), Axis::Rows).unwrap();
        assert_eq!(s.histogram, vec![(1.0, 3)]);
        assert_eq!((s.min, s.max), (1.0, 1.0));

        let m = LabeledMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![2.0, 2.0, 1.0],
        ])
        .unwrap();
        let s = marginal_summary(&m, Axis::Rows).unwrap();
        assert_eq!(s.histogram, vec![(2.0, 2), (5.0, 1)]);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.count(), 3);
    }

    #[test]
    fn type7_quartiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.75), 3.25);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn hapaxes() {
        assert_eq!(hapax_report(&identity(3), Axis::Columns).count, 3);
        let twos = LabeledMatrix::from_rows(&vec![vec![2.0; 3]; 3]).unwrap();
        assert_eq!(hapax_report(&twos, Axis::Columns).count, 0);

        // 36 unit columns next to 7 columns used twice.
        let mut triplets = Vec::new();
        for j in 0..36 {
            triplets.push((j % 18, j, 1.0));
        }
        for j in 36..43 {
            triplets.push((0, j, 1.0));
            triplets.push((1, j, 1.0));
        }
        let z = LabeledMatrix::from_triplets(
            default_labels("R", 18),
            default_labels("C", 43),
            triplets,
        )
        .unwrap();
        let h = hapax_report(&z, Axis::Columns);
        assert_eq!(h.count, 36);
        assert_eq!(h.labels[0], "C1");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LabeledMatrix::from_triplets(
            vec!["a".into(), "a".into()],
            vec!["x".into()],
            [(0, 0, 1.0)]
        )
        .is_err());
        assert!(
            LabeledMatrix::from_triplets(vec!["a".into()], vec!["x".into()], [(0, 0, -1.0)])
                .is_err()
        );
        assert!(
            LabeledMatrix::from_counts(vec!["a".into()], vec!["x".into()], [(0, 0, 1.5)]).is_err()
        );
        assert!(
            LabeledMatrix::from_triplets(vec!["a".into()], vec!["x".into()], [(1, 0, 1.0)])
                .is_err()
        );
    }

    #[test]
    fn f32_tables() {
        let m = LabeledMatrix::<f32>::from_rows(&[vec![1.0, 0.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(m.total(), 6.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(sparsity(&m).unwrap(), 25.0);
    }
}
