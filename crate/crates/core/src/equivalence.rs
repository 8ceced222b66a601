//! Distributional-equivalence preprocessing.
//!
//! Rows or columns with proportional profiles carry the same information for
//! correspondence analysis, so they are summed into a single line whose label
//! joins the originals with `+`. Zero-marginal lines are removed first.

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::ca::ca;
use crate::error::{Error, Result};
use crate::matrix::{Axis, LabeledMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineAxis {
    Row,
    Column,
}

impl From<Axis> for LineAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Rows => LineAxis::Row,
            Axis::Columns => LineAxis::Column,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeGroup {
    pub label: String,
    pub members: Vec<String>,
    pub axis: LineAxis,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedLine {
    pub label: String,
    pub axis: LineAxis,
}

/// Provenance of every original label: merged into a group, or dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeMap {
    pub groups: Vec<MergeGroup>,
    pub dropped: Vec<DroppedLine>,
}

impl MergeMap {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Number of groups that actually merged two or more lines.
    pub fn merged_count(&self, axis: LineAxis) -> usize {
        self.groups
            .iter()
            .filter(|g| g.axis == axis && g.members.len() > 1)
            .count()
    }

    /// Original members behind a current label on the given axis.
    pub fn members_of(&self, axis: LineAxis, label: &str) -> Option<&[String]> {
        self.groups
            .iter()
            .find(|g| g.axis == axis && g.label == label)
            .map(|g| g.members.as_slice())
    }
}

/// Which axes [`merge_equivalent`] may merge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeAxes {
    Columns,
    Rows,
    #[default]
    Both,
}

/// Removes zero-marginal rows and columns until none remain.
pub fn prune_zero_marginals<T: Scalar>(
    m: &LabeledMatrix<T>,
) -> Result<(LabeledMatrix<T>, Vec<DroppedLine>)> {
    let mut rows: Vec<usize> = (0..m.nrows()).collect();
    let mut cols: Vec<usize> = (0..m.ncols()).collect();
    let mut dropped = Vec::new();
    loop {
        let sub = m.submatrix(&rows, &cols);
        let rs = sub.row_sums();
        let cs = sub.col_sums();
        let keep_r: Vec<usize> = (0..rows.len()).filter(|&i| rs[i] > T::zero()).collect();
        let keep_c: Vec<usize> = (0..cols.len()).filter(|&j| cs[j] > T::zero()).collect();
        if keep_r.len() == rows.len() && keep_c.len() == cols.len() {
            if rows.is_empty() {
                return Err(Error::EmptyResult("every row has a zero marginal".into()));
            }
            return Ok((sub, dropped));
        }
        for (i, &s) in rs.iter().enumerate() {
            if s <= T::zero() {
                dropped.push(DroppedLine {
                    label: sub.row_labels()[i].clone(),
                    axis: LineAxis::Row,
                });
            }
        }
        for (j, &s) in cs.iter().enumerate() {
            if s <= T::zero() {
                dropped.push(DroppedLine {
                    label: sub.col_labels()[j].clone(),
                    axis: LineAxis::Column,
                });
            }
        }
        rows = keep_r.into_iter().map(|i| rows[i]).collect();
        cols = keep_c.into_iter().map(|j| cols[j]).collect();
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptyResult("every row has a zero marginal".into()));
        }
    }
}

/// Sparse integer profile: `(index, count)` sorted by index.
type Profile = Vec<(usize, u64)>;

fn to_count<T: Scalar>(x: T) -> Result<u64> {
    if x.fract() != T::zero() {
        return Err(Error::invalid(format!(
            "merging needs integer counts, found {x}"
        )));
    }
    x.to_u64()
        .ok_or_else(|| Error::invalid(format!("count {x} out of range")))
}

/// Exact proportionality test: `x·sum(y) == y·sum(x)` entrywise.
pub(crate) fn proportional(x: &Profile, y: &Profile) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let sx: u128 = x.iter().map(|e| e.1 as u128).sum();
    let sy: u128 = y.iter().map(|e| e.1 as u128).sum();
    x.iter()
        .zip(y)
        .all(|(a, b)| a.0 == b.0 && a.1 as u128 * sy == b.1 as u128 * sx)
}

/// Profile reduced by the gcd of its entries; proportional nonnegative
/// profiles share this key.
fn primitive(p: &Profile) -> Profile {
    let g = p.iter().fold(0u64, |g, e| g.gcd(&e.1));
    p.iter().map(|&(i, x)| (i, x / g.max(1))).collect()
}

/// Groups lines with proportional profiles; groups ordered by first member.
fn proportional_groups(profiles: &[Profile]) -> Vec<Vec<usize>> {
    let mut buckets: HashMap<Profile, Vec<usize>> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for (k, p) in profiles.iter().enumerate() {
        let key = primitive(p);
        let bucket = buckets.entry(key).or_default();
        // The key is exact, but confirm with cross-multiplication.
        match bucket.iter().find(|&&rep| proportional(&profiles[rep], p)) {
            Some(&rep) => {
                let g = group_of[&rep];
                groups[g].push(k);
            }
            None => {
                bucket.push(k);
                group_of.insert(k, groups.len());
                groups.push(vec![k]);
            }
        }
    }
    groups
}

struct Lines {
    /// Original labels behind each current line.
    members: Vec<Vec<usize>>,
}

impl Lines {
    fn identity(n: usize) -> Self {
        Self {
            members: (0..n).map(|k| vec![k]).collect(),
        }
    }

    fn regroup(&mut self, groups: &[Vec<usize>]) {
        self.members = groups
            .iter()
            .map(|g| {
                let mut m: Vec<usize> = g
                    .iter()
                    .flat_map(|&k| self.members[k].iter().copied())
                    .collect();
                m.sort_unstable();
                m
            })
            .collect();
    }
}

/// Merges proportional columns and/or rows of a matrix without zero
/// marginals. With [`MergeAxes::Both`], column and row passes alternate until
/// a full round merges nothing.
pub fn merge_equivalent<T: Scalar>(
    m: &LabeledMatrix<T>,
    axes: MergeAxes,
) -> Result<(LabeledMatrix<T>, MergeMap)> {
    m.require_nonzero_total()?;
    if let Some(i) = m.row_sums().iter().position(|&s| s <= T::zero()) {
        return Err(Error::ZeroMarginal {
            axis: "row",
            label: m.row_labels()[i].clone(),
        });
    }
    if let Some(j) = m.col_sums().iter().position(|&s| s <= T::zero()) {
        return Err(Error::ZeroMarginal {
            axis: "column",
            label: m.col_labels()[j].clone(),
        });
    }

    // Work on integer triplets throughout.
    let mut cells: Vec<(usize, usize, u64)> = m
        .triplets()
        .iter()
        .map(|&(i, j, x)| Ok((i, j, to_count(x)?)))
        .collect::<Result<_>>()?;
    let mut rows = Lines::identity(m.nrows());
    let mut cols = Lines::identity(m.ncols());

    let do_cols = matches!(axes, MergeAxes::Columns | MergeAxes::Both);
    let do_rows = matches!(axes, MergeAxes::Rows | MergeAxes::Both);
    loop {
        let mut changed = false;
        if do_cols {
            changed |= merge_pass(&mut cells, &mut cols, true);
        }
        if do_rows {
            changed |= merge_pass(&mut cells, &mut rows, false);
        }
        if !changed || axes != MergeAxes::Both {
            break;
        }
    }

    let join = |members: &[usize], labels: &[String]| -> String {
        members
            .iter()
            .map(|&k| labels[k].as_str())
            .collect::<Vec<_>>()
            .join("+")
    };
    let row_labels: Vec<String> = rows
        .members
        .iter()
        .map(|g| join(g, m.row_labels()))
        .collect();
    let col_labels: Vec<String> = cols
        .members
        .iter()
        .map(|g| join(g, m.col_labels()))
        .collect();

    let mut groups = Vec::new();
    for (g, label) in cols.members.iter().zip(&col_labels) {
        groups.push(MergeGroup {
            label: label.clone(),
            members: g.iter().map(|&k| m.col_labels()[k].clone()).collect(),
            axis: LineAxis::Column,
        });
    }
    for (g, label) in rows.members.iter().zip(&row_labels) {
        groups.push(MergeGroup {
            label: label.clone(),
            members: g.iter().map(|&k| m.row_labels()[k].clone()).collect(),
            axis: LineAxis::Row,
        });
    }

    let merged = LabeledMatrix::from_triplets(
        row_labels,
        col_labels,
        cells
            .into_iter()
            .map(|(i, j, x)| (i, j, T::from_u64(x).expect("count fits scalar"))),
    )?;
    Ok((
        merged,
        MergeMap {
            groups,
            dropped: Vec::new(),
        },
    ))
}

/// One merge pass over columns (`by_col`) or rows. Returns true if any lines
/// were merged.
fn merge_pass(cells: &mut Vec<(usize, usize, u64)>, lines: &mut Lines, by_col: bool) -> bool {
    let n = lines.members.len();
    let mut profiles: Vec<Profile> = vec![Vec::new(); n];
    for &(i, j, x) in cells.iter() {
        let (line, pos) = if by_col { (j, i) } else { (i, j) };
        profiles[line].push((pos, x));
    }
    for p in &mut profiles {
        p.sort_unstable();
    }
    let groups = proportional_groups(&profiles);
    if groups.len() == n {
        return false;
    }
    let mut new_index = vec![0usize; n];
    for (g, members) in groups.iter().enumerate() {
        for &k in members {
            new_index[k] = g;
        }
    }
    let mut acc: HashMap<(usize, usize), u64> = HashMap::new();
    for &(i, j, x) in cells.iter() {
        let key = if by_col {
            (i, new_index[j])
        } else {
            (new_index[i], j)
        };
        *acc.entry(key).or_default() += x;
    }
    let mut next: Vec<(usize, usize, u64)> = acc.into_iter().map(|((i, j), x)| (i, j, x)).collect();
    next.sort_unstable();
    *cells = next;
    lines.regroup(&groups);
    true
}

/// Prunes zero marginals then merges equivalent lines; the returned map
/// accounts for every original label.
pub fn preprocess<T: Scalar>(
    m: &LabeledMatrix<T>,
    merge: Option<MergeAxes>,
) -> Result<(LabeledMatrix<T>, MergeMap)> {
    let (pruned, dropped) = prune_zero_marginals(m)?;
    let (out, mut map) = match merge {
        Some(axes) => merge_equivalent(&pruned, axes)?,
        None => {
            let mut groups: Vec<MergeGroup> = pruned
                .col_labels()
                .iter()
                .map(|l| MergeGroup {
                    label: l.clone(),
                    members: vec![l.clone()],
                    axis: LineAxis::Column,
                })
                .collect();
            groups.extend(pruned.row_labels().iter().map(|l| MergeGroup {
                label: l.clone(),
                members: vec![l.clone()],
                axis: LineAxis::Row,
            }));
            (
                pruned,
                MergeMap {
                    groups,
                    dropped: Vec::new(),
                },
            )
        }
    };
    map.dropped = dropped;
    Ok((out, map))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub original_shape: (usize, usize),
    pub merged_shape: (usize, usize),
    pub original_singular_values: Vec<f64>,
    pub merged_singular_values: Vec<f64>,
    /// Largest absolute difference over the aligned spectra; values present in
    /// only one spectrum are compared against zero.
    pub max_abs_diff: f64,
}

/// Runs CA before and after merging and compares the spectra.
pub fn equivalence_invariance_check<T: Scalar>(m: &LabeledMatrix<T>) -> Result<InvarianceReport> {
    let (pruned, _) = prune_zero_marginals(m)?;
    let (merged, _) = merge_equivalent(&pruned, MergeAxes::Both)?;
    let spectrum = |x: &LabeledMatrix<T>| -> Result<Vec<f64>> {
        let k = x.nrows().min(x.ncols()).saturating_sub(1);
        if k == 0 {
            return Ok(Vec::new());
        }
        Ok(ca(x, 0)?
            .singular_values
            .iter()
            .map(|s| s.to_f64().unwrap_or(f64::NAN))
            .collect())
    };
    let a = spectrum(&pruned)?;
    let b = spectrum(&merged)?;
    let n = a.len().max(b.len());
    let max_abs_diff = (0..n)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    Ok(InvarianceReport {
        original_shape: pruned.shape(),
        merged_shape: merged.shape(),
        original_singular_values: a,
        merged_singular_values: b,
        max_abs_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::default_labels;

    fn m(rows: &[Vec<f64>]) -> LabeledMatrix<f64> {
        LabeledMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn prune_removes_zero_row() {
        let x = m(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![3.0, 0.0]]);
        let (p, dropped) = prune_zero_marginals(&x).unwrap();
        assert_eq!(p.row_labels(), &["R1", "R3"]);
        assert_eq!(p.col_labels(), &["C1", "C2"]);
        assert_eq!(
            dropped,
            vec![DroppedLine {
                label: "R2".into(),
                axis: LineAxis::Row
            }]
        );
    }

    #[test]
    fn prune_drops_rows_and_columns_together() {
        // With nonnegative cells a zero row adds nothing to any column, so
        // one pass reaches the fixpoint; R3 and C2, C3 all go.
        let x = m(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let (p, dropped) = prune_zero_marginals(&x).unwrap();
        assert_eq!(p.shape(), (2, 1));
        assert_eq!(dropped.len(), 3);
        assert!(prune_zero_marginals(&m(&[vec![0.0, 0.0]])).is_err());
    }

    #[test]
    fn identical_columns_merge() {
        let x = m(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ]);
        let (y, map) = merge_equivalent(&x, MergeAxes::Columns).unwrap();
        assert_eq!(y.col_labels(), &["C1+C2", "C3"]);
        assert_eq!(y.get(0, 0), 2.0);
        assert_eq!(y.get(2, 0), 2.0);
        assert_eq!(map.merged_count(LineAxis::Column), 1);
        assert_eq!(
            map.members_of(LineAxis::Column, "C1+C2").unwrap(),
            &["C1", "C2"]
        );
    }

    #[test]
    fn proportional_columns_merge() {
        let x = m(&[
            vec![1.0, 2.0, 1.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let (y, _) = merge_equivalent(&x, MergeAxes::Columns).unwrap();
        assert_eq!(y.col_labels(), &["C1+C2", "C3"]);
        assert_eq!(y.get(0, 0), 3.0);
        assert_eq!(y.get(1, 0), 6.0);
    }

    #[test]
    fn shared_single_row_terms_merge() {
        // Four words that occur only in R4 become one term of weight 4.
        let mut triplets: Vec<(usize, usize, f64)> = (0..4).map(|j| (3, j, 1.0)).collect();
        for j in 4..43 {
            triplets.push((j % 18, j, 1.0));
            triplets.push(((j + 5) % 18, j, 1.0));
        }
        let mut labels = default_labels("w", 43);
        labels[..4].clone_from_slice(&[
            "social".into(),
            "political".into(),
            "equality".into(),
            "rights".into(),
        ]);
        let z = LabeledMatrix::from_triplets(default_labels("R", 18), labels, triplets).unwrap();
        let (n, _) = merge_equivalent(&z, MergeAxes::Columns).unwrap();
        let k = n
            .col_labels()
            .iter()
            .position(|l| l == "social+political+equality+rights")
            .unwrap();
        assert_eq!(n.get(3, k), 4.0);
        assert_eq!(n.col_sums()[k], 4.0);
    }

    #[test]
    fn merge_preserves_margins_and_is_idempotent() {
        let x = m(&[
            vec![1.0, 1.0, 0.0, 2.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0, 2.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        let (y, _) = merge_equivalent(&x, MergeAxes::Columns).unwrap();
        assert_eq!(y.total(), x.total());
        assert_eq!(y.row_sums(), x.row_sums());
        let (yy, map) = merge_equivalent(&y, MergeAxes::Both).unwrap();
        let (yyy, _) = merge_equivalent(&yy, MergeAxes::Both).unwrap();
        assert_eq!(yy, yyy);
        assert_eq!(yy.col_labels(), &["C1+C2+C4", "C3"]);
        assert_eq!(yy.row_labels(), &["R1", "R2+R4", "R3"]);
        assert!(map.groups.iter().all(|g| !g.members.is_empty()));
    }

    #[test]
    fn unequal_binary_columns_never_merge() {
        let x = m(&[vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let (y, _) = merge_equivalent(&x, MergeAxes::Columns).unwrap();
        assert_eq!(y.ncols(), 2);
    }

    #[test]
    fn merge_requires_pruned_integer_input() {
        assert!(matches!(
            merge_equivalent(&m(&[vec![1.0, 0.0]]), MergeAxes::Both),
            Err(Error::ZeroMarginal { .. })
        ));
        let x = LabeledMatrix::from_rows(&[vec![0.5, 1.0]]).unwrap();
        assert!(merge_equivalent(&x, MergeAxes::Both).is_err());
    }

    #[test]
    fn preprocess_accounts_for_every_label() {
        let x = m(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 1.0, 3.0],
        ]);
        let (_, map) = preprocess(&x, Some(MergeAxes::Both)).unwrap();
        let mut seen: Vec<String> = map
            .groups
            .iter()
            .flat_map(|g| g.members.iter().cloned())
            .chain(map.dropped.iter().map(|d| d.label.clone()))
            .collect();
        seen.sort();
        assert_eq!(seen, vec!["C1", "C2", "C3", "R1", "R2", "R3"]);
        let back = MergeMap::from_json(&map.to_json().unwrap()).unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn cross_multiplication() {
        assert!(proportional(&vec![(0, 1), (1, 2)], &vec![(0, 2), (1, 4)]));
        assert!(!proportional(&vec![(0, 1), (1, 2)], &vec![(0, 2), (1, 3)]));
        assert!(!proportional(&vec![(0, 1)], &vec![(1, 1)]));
    }
}
