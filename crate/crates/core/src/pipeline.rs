//! End-to-end runs: configuration, analysis records and output files.
//!
//! Everything printed by [`crate::report`] is read back from the records
//! built here, so a report can be regenerated from the JSON alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ca::{ca, connected_components, leading_non_unit, CaResult, LATERAL_ORDERING_THRESHOLD};
use crate::equivalence::{
    merge_equivalent, prune_zero_marginals, DroppedLine, MergeAxes, MergeMap,
};
use crate::error::{Error, Result};
use crate::io::{write_matrix, MatrixFormat};
use crate::matrix::{
    adjusted_sparsity, hapax_report, marginal_summary, sparsity, AdjustedSparsity, Axis,
    LabeledMatrix, MarginalSummary,
};
use crate::taxicab::{
    contribution_coordinates, contributions, tca, AxisStrategy, Contributions, TcaResult,
};
use crate::tree::{build_tree, node_csv, BiclusterTree, SplitMode, TreeParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ca,
    Tca,
    #[default]
    Both,
}

impl Method {
    pub fn runs_ca(self) -> bool {
        matches!(self, Method::Ca | Method::Both)
    }

    pub fn runs_tca(self) -> bool {
        matches!(self, Method::Tca | Method::Both)
    }
}

/// All knobs of a run. Serialized next to the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub format: MatrixFormat,
    pub merge: bool,
    pub method: Method,
    pub axes: usize,
    pub mode: SplitMode,
    pub levels: usize,
    pub min_rows: usize,
    pub min_cols: usize,
    pub topics: usize,
    pub threshold_lateral: f64,
    pub unit_tol: f64,
    pub out: Option<PathBuf>,
    /// Always true: no run draws random numbers.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            format: MatrixFormat::Csv,
            merge: true,
            method: Method::Both,
            axes: 2,
            mode: SplitMode::Quadrant,
            levels: 1,
            min_rows: 2,
            min_cols: 2,
            topics: 10,
            threshold_lateral: LATERAL_ORDERING_THRESHOLD,
            unit_tol: 1e-8,
            out: None,
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.axes == 0 {
            return Err(Error::invalid("--axes must be at least 1"));
        }
        if self.min_rows < 2 || self.min_cols < 2 {
            return Err(Error::invalid(
                "--min-rows and --min-cols must be at least 2",
            ));
        }
        if !(self.threshold_lateral > 0.0 && self.threshold_lateral < 1.0) {
            return Err(Error::invalid("--threshold-lateral must lie in (0, 1)"));
        }
        if !(self.unit_tol > 0.0 && self.unit_tol < 1e-2) {
            return Err(Error::invalid("unit tolerance must lie in (0, 0.01)"));
        }
        if !self.deterministic {
            return Err(Error::invalid("nondeterministic runs are not supported"));
        }
        Ok(())
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            mode: self.mode,
            levels: self.levels,
            min_rows: self.min_rows,
            min_cols: self.min_cols,
            topic_k: self.topics,
            merge: self.merge,
            strategy: AxisStrategy::Auto,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Size, sparsity and marginal distributions of one table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub total: f64,
    pub sparsity: f64,
    pub adjusted: Option<AdjustedSparsity>,
    pub row_marginals: MarginalSummary,
    pub col_marginals: MarginalSummary,
    pub hapax_cols: usize,
}

pub fn table_summary(m: &LabeledMatrix<f64>) -> Result<TableSummary> {
    Ok(TableSummary {
        rows: m.nrows(),
        cols: m.ncols(),
        nnz: m.nnz(),
        total: m.total(),
        sparsity: sparsity(m)?,
        adjusted: adjusted_sparsity(m).ok(),
        row_marginals: marginal_summary(m, Axis::Rows)?,
        col_marginals: marginal_summary(m, Axis::Columns)?,
        hapax_cols: hapax_report(m, Axis::Columns).count,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSize {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LateralOrdering {
    pub leading: f64,
    pub threshold: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaSection {
    /// CA of the whole merged table.
    pub full: CaResult<f64>,
    pub unit_singular_values: usize,
    pub lateral: Option<LateralOrdering>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcaSection {
    /// TCA runs on the principal block: the whole table when connected.
    pub result: TcaResult<f64>,
    pub contributions: Option<Contributions<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: RunConfig,
    /// Before pruning and merging.
    pub input: TableSummary,
    pub dropped: Vec<DroppedLine>,
    /// After pruning, before merging.
    pub apparent: TableSummary,
    /// After merging.
    pub merged: TableSummary,
    pub merge_map: MergeMap,
    pub components: Vec<ComponentSize>,
    pub principal: TableSummary,
    pub ca: Option<CaSection>,
    pub principal_ca: Option<CaResult<f64>>,
    pub tca: Option<TcaSection>,
}

/// Analysis plus the intermediate tables needed to write matrix files.
pub struct Analysis {
    pub report: AnalysisReport,
    pub merged: LabeledMatrix<f64>,
    pub principal: LabeledMatrix<f64>,
}

/// prune → merge → components → CA and/or TCA.
pub fn analyze(m: &LabeledMatrix<f64>, cfg: &RunConfig) -> Result<Analysis> {
    cfg.validate()?;
    let input = table_summary(m)?;
    let (pruned, dropped) = prune_zero_marginals(m)?;
    let apparent = table_summary(&pruned)?;
    let (merged, merge_map) = if cfg.merge {
        merge_equivalent(&pruned, MergeAxes::Both)?
    } else {
        let (p, mut map) = crate::equivalence::preprocess(&pruned, None)?;
        map.dropped.clear();
        (p, map)
    };
    let comps = connected_components(&merged);
    let principal = merged.submatrix(&comps[0].rows, &comps[0].cols);

    let bound = |t: &LabeledMatrix<f64>| t.nrows().min(t.ncols()).saturating_sub(1);
    let ca_section = if cfg.method.runs_ca() {
        let full = ca(&merged, cfg.axes.min(bound(&merged)))?;
        let unit = full.unit_count(cfg.unit_tol);
        let lateral = leading_non_unit(&full).map(|rho| LateralOrdering {
            leading: rho,
            threshold: cfg.threshold_lateral,
            flagged: rho > cfg.threshold_lateral,
        });
        Some(CaSection {
            full,
            unit_singular_values: unit,
            lateral,
        })
    } else {
        None
    };
    let principal_ca = if cfg.method.runs_ca() && comps.len() > 1 && bound(&principal) > 0 {
        Some(ca(&principal, cfg.axes.min(bound(&principal)))?)
    } else {
        None
    };
    let tca_section = if cfg.method.runs_tca() {
        let k = cfg.axes.min(bound(&principal));
        if k == 0 {
            return Err(Error::DegenerateStructure(format!(
                "principal block is only {}x{}",
                principal.nrows(),
                principal.ncols()
            )));
        }
        let result = tca(&principal, k, AxisStrategy::Auto)?;
        let contributions = if k >= 2 {
            Some(contributions(&result, [0, 1])?)
        } else {
            None
        };
        Some(TcaSection {
            result,
            contributions,
        })
    } else {
        None
    };

    let report = AnalysisReport {
        config: cfg.clone(),
        input,
        dropped,
        apparent,
        merged: table_summary(&merged)?,
        merge_map,
        components: comps
            .iter()
            .map(|c| ComponentSize {
                rows: c.rows.len(),
                cols: c.cols.len(),
            })
            .collect(),
        principal: table_summary(&principal)?,
        ca: ca_section,
        principal_ca,
        tca: tca_section,
    };
    Ok(Analysis {
        report,
        merged,
        principal,
    })
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Labeled score table with one column per axis.
fn score_csv(labels: &[String], masses: &[f64], cols: &[Vec<f64>], prefix: &str) -> String {
    let mut s = String::from("label,mass");
    for a in 0..cols.len() {
        s.push_str(&format!(",{prefix}{}", a + 1));
    }
    s.push('\n');
    for (i, l) in labels.iter().enumerate() {
        s.push_str(&csv_escape(l));
        s.push_str(&format!(",{}", masses[i]));
        for c in cols {
            s.push_str(&format!(",{}", c[i]));
        }
        s.push('\n');
    }
    s
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Writes JSON, CSV blocks and `report.txt` into `dir`.
pub fn write_analysis(a: &Analysis, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let r = &a.report;
    write(dir, "config.json", r.config.to_json()?)?;
    write(dir, "analysis.json", serde_json::to_string_pretty(r)?)?;
    write(dir, "merge_map.json", r.merge_map.to_json()?)?;
    write_matrix(&a.merged, &dir.join("merged.csv"), MatrixFormat::Csv)?;
    if let Some(c) = &r.ca {
        let f = &c.full;
        let cols_of = |d: &crate::dense::Dense<f64>| {
            (0..d.ncols())
                .map(|k| (0..d.nrows()).map(|i| d[(i, k)]).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        let sv: String = std::iter::once("axis,singular_value\n".to_string())
            .chain(
                f.singular_values
                    .iter()
                    .enumerate()
                    .map(|(k, s)| format!("{},{s}\n", k + 1)),
            )
            .collect();
        write(dir, "ca_singular_values.csv", sv)?;
        write(
            dir,
            "ca_rows.csv",
            score_csv(&f.row_labels, &f.row_masses, &cols_of(&f.row_coords), "F"),
        )?;
        write(
            dir,
            "ca_cols.csv",
            score_csv(&f.col_labels, &f.col_masses, &cols_of(&f.col_coords), "G"),
        )?;
    }
    if let Some(t) = &r.tca {
        let res = &t.result;
        let f: Vec<Vec<f64>> = res.axes.iter().map(|a| a.f.clone()).collect();
        let g: Vec<Vec<f64>> = res.axes.iter().map(|a| a.g.clone()).collect();
        write(
            dir,
            "tca_rows.csv",
            score_csv(&res.row_labels, &res.row_masses, &f, "f"),
        )?;
        write(
            dir,
            "tca_cols.csv",
            score_csv(&res.col_labels, &res.col_masses, &g, "g"),
        )?;
        let mut q = String::from("axis,qsr_pp,qsr_nn,qsr_np,qsr_pn,qsr,delta\n");
        for (k, (row, ax)) in res.qsr.iter().zip(&res.axes).enumerate() {
            q.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                k + 1,
                row.pp,
                row.nn,
                row.np,
                row.pn,
                row.overall,
                ax.lambda
            ));
        }
        write(dir, "tca_qsr.csv", q)?;
    }
    write(dir, "report.txt", crate::report::analysis_text(r))?;
    Ok(())
}

pub fn run_tree(m: &LabeledMatrix<f64>, cfg: &RunConfig) -> Result<BiclusterTree<f64>> {
    cfg.validate()?;
    let (pruned, _) = prune_zero_marginals(m)?;
    build_tree(&pruned, &cfg.tree_params())
}

pub fn write_tree(tree: &BiclusterTree<f64>, cfg: &RunConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write(dir, "config.json", cfg.to_json()?)?;
    write(dir, "tree.json", tree.to_json()?)?;
    write(dir, "nodes.csv", node_csv(tree))?;
    write(dir, "tree_report.txt", crate::report::tree_text(tree))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Principal,
    Contribution,
}

/// Map of an analysis on two zero-based axes.
pub fn plot(
    r: &AnalysisReport,
    method: Method,
    kind: PlotKind,
    axes: [usize; 2],
) -> Result<crate::svg::Map> {
    use crate::svg::{Map, Point};
    let pts = |labels: &[String], xy: Vec<[f64; 2]>| -> Vec<Point> {
        labels
            .iter()
            .zip(xy)
            .map(|(l, p)| Point {
                label: l.clone(),
                x: p[0],
                y: p[1],
            })
            .collect()
    };
    let missing = |n: usize| {
        Error::invalid(format!(
            "axes {} and {} requested but the result has {n}",
            axes[0] + 1,
            axes[1] + 1
        ))
    };
    match method {
        Method::Ca => {
            if kind == PlotKind::Contribution {
                return Err(Error::invalid(
                    "contribution maps are drawn from TCA results",
                ));
            }
            let c = &r
                .ca
                .as_ref()
                .ok_or_else(|| Error::invalid("result holds no CA"))?
                .full;
            let n = c.axes();
            if axes[0] >= n || axes[1] >= n {
                return Err(missing(n));
            }
            let at = |d: &crate::dense::Dense<f64>| {
                (0..d.nrows())
                    .map(|i| [d[(i, axes[0])], d[(i, axes[1])]])
                    .collect()
            };
            Ok(Map {
                title: "CA principal map".into(),
                x_caption: format!("CA axis {}", axes[0] + 1),
                y_caption: format!("CA axis {}", axes[1] + 1),
                rows: pts(&c.row_labels, at(&c.row_coords)),
                cols: pts(&c.col_labels, at(&c.col_coords)),
            })
        }
        Method::Tca | Method::Both => {
            let t = &r
                .tca
                .as_ref()
                .ok_or_else(|| Error::invalid("result holds no TCA"))?
                .result;
            let n = t.axes.len();
            if axes[0] >= n || axes[1] >= n || axes[0] == axes[1] {
                return Err(missing(n));
            }
            let (rows, cols, title) = match kind {
                PlotKind::Principal => {
                    let (x, y) = (&t.axes[axes[0]], &t.axes[axes[1]]);
                    (
                        x.f.iter().zip(&y.f).map(|(&a, &b)| [a, b]).collect(),
                        x.g.iter().zip(&y.g).map(|(&a, &b)| [a, b]).collect(),
                        "TCA principal map",
                    )
                }
                PlotKind::Contribution => {
                    let c = contribution_coordinates(t, axes)?;
                    (c.rows, c.cols, "TCA contribution map")
                }
            };
            Ok(Map {
                title: title.into(),
                x_caption: format!("TCA axis {}", axes[0] + 1),
                y_caption: format!("TCA axis {}", axes[1] + 1),
                rows: pts(&t.row_labels, rows),
                cols: pts(&t.col_labels, cols),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_validates() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        let partial = RunConfig::from_json(r#"{"axes": 3, "method": "tca"}"#).unwrap();
        assert_eq!(partial.axes, 3);
        assert_eq!(partial.method, Method::Tca);
        assert!(RunConfig {
            axes: 0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            deterministic: false,
            ..c
        }
        .validate()
        .is_err());
    }

    #[test]
    fn block_diagonal_analysis() {
        let mut rows = vec![vec![0.0; 8]; 8];
        for b in 0..4 {
            rows[2 * b][2 * b] = 2.0;
            rows[2 * b][2 * b + 1] = 1.0;
            rows[2 * b + 1][2 * b] = 1.0;
            rows[2 * b + 1][2 * b + 1] = 3.0;
        }
        let m = LabeledMatrix::from_rows(&rows).unwrap();
        let a = analyze(
            &m,
            &RunConfig {
                method: Method::Ca,
                ..RunConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a.report.components.len(), 4);
        assert_eq!(a.report.ca.as_ref().unwrap().unit_singular_values, 3);
    }
}
