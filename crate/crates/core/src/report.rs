//! Plain-text tables. Percentages carry two decimals, dispersions and
//! singular values four. Nothing here computes; every figure is read from a
//! serialized record.

use std::fmt::Write as _;

use crate::matrix::MarginalSummary;
use crate::pipeline::{AnalysisReport, TableSummary};
use crate::taxicab::TcaResult;
use crate::tree::{BiclusterTree, StopReason, TreeNode};

fn pct(x: f64) -> String {
    format!("{x:.2}")
}

fn disp(x: f64) -> String {
    format!("{x:.4}")
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn histogram(s: &mut String, name: &str, m: &MarginalSummary) {
    let values: Vec<String> = m.histogram.iter().map(|(v, _)| format!("{v}")).collect();
    let counts: Vec<String> = m.histogram.iter().map(|(_, c)| c.to_string()).collect();
    let w = values
        .iter()
        .chain(&counts)
        .map(|x| x.len())
        .max()
        .unwrap_or(1)
        .max(2);
    let row = |cells: &[String]| {
        cells
            .iter()
            .map(|c| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(s, "  {name}");
    let _ = writeln!(s, "    values {}", row(&values));
    let _ = writeln!(s, "    counts {}", row(&counts));
    let _ = writeln!(
        s,
        "    min {} | Q1 {} | median {} | mean {} | Q3 {} | max {}",
        m.min,
        pct(m.q1),
        pct(m.median),
        pct(m.mean),
        pct(m.q3),
        m.max
    );
}

fn size(t: &TableSummary) -> String {
    format!("{}×{}", t.rows, t.cols)
}

/// Singular values, eight per line, prefixed by the index of the first.
pub fn spectrum_lines(values: &[f64]) -> String {
    let mut s = String::new();
    for (k, chunk) in values.chunks(8).enumerate() {
        let body = chunk.iter().map(|&v| disp(v)).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "[{}] {body}", k * 8 + 1);
    }
    s
}

/// Per-axis QSR blocks and dispersion.
pub fn qsr_table(t: &TcaResult<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<6}{:<22}{:<22}{:>9}{:>10}",
        "Axis", "QSR(V+U+, V-U-)", "QSR(V-U+, V+U-)", "QSR", "delta"
    );
    for (k, (q, a)) in t.qsr.iter().zip(&t.axes).enumerate() {
        let _ = writeln!(
            s,
            "{:<6}{:<22}{:<22}{:>9}{:>10}",
            k + 1,
            format!("({}, {})", pct(q.pp), pct(q.nn)),
            format!("({}, {})", pct(q.np), pct(q.pn)),
            pct(q.overall),
            disp(a.lambda)
        );
    }
    s
}

fn sparsity_row(s: &mut String, name: &str, t: &TableSummary) {
    let (b, a) = match &t.adjusted {
        Some(a) => (pct(a.upper_boundary), pct(a.adjusted)),
        None => ("-".into(), "-".into()),
    };
    let flag = match &t.adjusted {
        Some(a) if a.hard_to_interpret => "  maps hard to interpret",
        _ => "",
    };
    let _ = writeln!(
        s,
        "{:<12}{:>12}{:>12}{:>18}{:>20}{flag}",
        name,
        size(t),
        pct(t.sparsity),
        b,
        a
    );
}

pub fn analysis_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "TABLE SIZES");
    let _ = writeln!(
        s,
        "{:<16}{:>12}{:>8}{:>12}",
        "", "size", "nnz", "sparsity %"
    );
    for (name, t) in [
        ("input", &r.input),
        ("after pruning", &r.apparent),
        ("after merging", &r.merged),
    ] {
        let _ = writeln!(
            s,
            "{:<16}{:>12}{:>8}{:>12}",
            name,
            size(t),
            t.nnz,
            pct(t.sparsity)
        );
    }
    if !r.dropped.is_empty() {
        let labels: Vec<String> = r
            .dropped
            .iter()
            .map(|d| {
                format!(
                    "{} ({})",
                    d.label,
                    serde_json::to_value(d.axis)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default()
                )
            })
            .collect();
        let _ = writeln!(s, "dropped (zero marginal): {}", labels.join(", "));
    }
    let merged: Vec<&str> = r
        .merge_map
        .groups
        .iter()
        .filter(|g| g.members.len() > 1)
        .map(|g| g.label.as_str())
        .collect();
    if !merged.is_empty() {
        let _ = writeln!(s, "merged: {}", merged.join(", "));
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "COLUMN MARGINALS");
    histogram(
        &mut s,
        &format!("before merging, {}", size(&r.apparent)),
        &r.apparent.col_marginals,
    );
    histogram(
        &mut s,
        &format!("after merging, {}", size(&r.merged)),
        &r.merged.col_marginals,
    );
    let _ = writeln!(
        s,
        "  hapax columns: {} before merging, {} after",
        r.apparent.hapax_cols, r.merged.hapax_cols
    );
    let _ = writeln!(s, "ROW MARGINALS");
    histogram(
        &mut s,
        &format!("before merging, {}", size(&r.apparent)),
        &r.apparent.row_marginals,
    );
    histogram(
        &mut s,
        &format!("after merging, {}", size(&r.merged)),
        &r.merged.row_marginals,
    );
    let _ = writeln!(s);

    let _ = writeln!(s, "STRUCTURE");
    let sizes: Vec<String> = r
        .components
        .iter()
        .map(|c| format!("{}×{}", c.rows, c.cols))
        .collect();
    match &r.ca {
        Some(c) => {
            let _ = writeln!(
                s,
                "{}; {}",
                plural(r.components.len(), "component"),
                plural(c.unit_singular_values, "unit singular value")
            );
        }
        None => {
            let _ = writeln!(s, "{}", plural(r.components.len(), "component"));
        }
    }
    let _ = writeln!(s, "component sizes: {}", sizes.join(", "));
    let _ = writeln!(s, "principal block: {}", size(&r.principal));
    let _ = writeln!(s);

    if let Some(c) = &r.ca {
        let _ = writeln!(s, "CA SINGULAR VALUES ({})", size(&r.merged));
        s.push_str(&spectrum_lines(&c.full.singular_values));
        if let Some(l) = &c.lateral {
            let verdict = if l.flagged {
                "above threshold: lateral ordering (quasi-block-diagonal or Guttman structure)"
            } else if l.threshold - l.leading < 0.01 {
                "close to threshold"
            } else {
                "below threshold"
            };
            let _ = writeln!(
                s,
                "leading non-unit singular value {} vs {}: {verdict}",
                disp(l.leading),
                disp(l.threshold)
            );
        }
        if let Some(p) = &r.principal_ca {
            let _ = writeln!(s, "CA of principal block ({}):", size(&r.principal));
            s.push_str(&spectrum_lines(&p.singular_values));
        }
        let _ = writeln!(s);
    }

    if let Some(t) = &r.tca {
        let _ = writeln!(
            s,
            "TCA QSR (%) AND DISPERSION, principal block {}",
            size(&r.principal)
        );
        s.push_str(&qsr_table(&t.result));
        for d in &t.result.diagnostics {
            let _ = writeln!(s, "note: {d}");
        }
        if let Some(c) = &t.contributions {
            let mut cols: Vec<_> = c.cols.iter().collect();
            cols.sort_by(|a, b| {
                b.plane
                    .partial_cmp(&a.plane)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.label.cmp(&b.label))
            });
            let top: Vec<String> = cols
                .iter()
                .take(10)
                .map(|p| format!("{} {}", p.label, pct(p.plane)))
                .collect();
            let _ = writeln!(
                s,
                "top columns by plane contribution (%): {}",
                top.join(", ")
            );
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "SPARSITY");
    let _ = writeln!(
        s,
        "{:<12}{:>12}{:>12}{:>18}{:>20}",
        "data set", "size", "sparsity %", "upper boundary %", "adjusted sparsity %"
    );
    sparsity_row(&mut s, "apparent", &r.apparent);
    sparsity_row(&mut s, "merged", &r.merged);
    sparsity_row(&mut s, "principal", &r.principal);
    s
}

fn node_name(path: &str) -> String {
    format!("Data{path}")
}

/// The `DataPPPP 108×23 sparsity=91.63%` line of a node.
pub fn node_line(n: &TreeNode<f64>) -> String {
    match &n.summary {
        Some(sm) => format!(
            "{} {}×{} sparsity={}%",
            node_name(&n.path),
            sm.rows,
            sm.cols,
            pct(sm.sparsity)
        ),
        None => format!("{} 0×0 ({})", node_name(&n.path), n.stop.describe()),
    }
}

pub fn tree_text(t: &BiclusterTree<f64>) -> String {
    let mut s = String::new();
    let leaves = t.root.leaves();
    let mode = serde_json::to_value(t.params.mode)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let _ = writeln!(
        s,
        "TREE: {mode} mode, {}, depth {}, {}",
        plural(t.params.levels, "recursion"),
        t.depth,
        plural(leaves.len(), "leaf").replace("leafs", "leaves")
    );
    let _ = writeln!(s);
    for n in t.root.walk() {
        let indent = "  ".repeat(n.path.len());
        let _ = writeln!(s, "{indent}{}", node_line(n));
        if let Some(sm) = &n.summary {
            let mut stats = Vec::new();
            for (k, d) in sm.dispersions.iter().enumerate() {
                stats.push(format!("δ{}={}", k + 1, disp(*d)));
            }
            for (k, q) in sm.qsr.iter().enumerate() {
                stats.push(format!("QSR{}={}%", k + 1, pct(q.overall)));
            }
            if let Some(a) = sm.adjusted_sparsity {
                stats.push(format!("adjusted={}%", pct(a)));
            }
            if (sm.raw_rows, sm.raw_cols) != (sm.rows, sm.cols) {
                stats.push(format!(
                    "block {}×{} before preprocessing",
                    sm.raw_rows, sm.raw_cols
                ));
            }
            if !stats.is_empty() {
                let _ = writeln!(s, "{indent}  {}", stats.join(" "));
            }
        }
        if !n.topics.is_empty() {
            let words: Vec<&str> = n.topics.iter().map(|t| t.0.as_str()).collect();
            let _ = writeln!(s, "{indent}  Topic{} {}", n.path, words.join(","));
        }
        if n.stop == StopReason::Split {
            if n.leakage.cells > 0 {
                let _ = writeln!(
                    s,
                    "{indent}  leakage: {} off-block cells, mass {}",
                    n.leakage.cells, n.leakage.mass
                );
            }
        } else {
            let _ = writeln!(s, "{indent}  stop: {}", n.stop.describe());
        }
        if !n.unassigned.is_empty() {
            let l: Vec<&str> = n.unassigned.iter().map(|d| d.label.as_str()).collect();
            let _ = writeln!(s, "{indent}  unassigned: {}", l.join(", "));
        }
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "PATHS BY LEVEL");
    for level in 1..=t.depth {
        let names: Vec<String> = t
            .root
            .walk()
            .iter()
            .filter(|n| n.path.len() == level)
            .map(|n| node_name(&n.path))
            .collect();
        if !names.is_empty() {
            let _ = writeln!(s, "level {level}: {}", names.join(" "));
        }
    }
    let _ = writeln!(s);

    let a = &t.audit;
    let _ = writeln!(s, "CONSERVATION");
    let _ = writeln!(
        s,
        "rows in leaves: {}; columns in leaves: {}",
        a.rows_in_leaves, a.cols_in_leaves
    );
    let _ = writeln!(
        s,
        "rows lost: {}",
        if a.lost_rows.is_empty() {
            "none".into()
        } else {
            a.lost_rows.join(", ")
        }
    );
    let _ = writeln!(
        s,
        "columns lost: {}",
        if a.lost_cols.is_empty() {
            "none".into()
        } else {
            a.lost_cols.join(", ")
        }
    );
    s
}
