use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn taxitree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taxitree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

/// Four disconnected 2×2 blocks.
fn block_diagonal(dir: &Path) -> String {
    let block = [[2, 1], [1, 3]];
    let mut s = String::from(",");
    s.push_str(
        &(1..=8)
            .map(|j| format!("t{j}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    s.push('\n');
    for i in 0..8 {
        let cells: Vec<String> = (0..8)
            .map(|j| {
                if i / 2 == j / 2 {
                    block[i % 2][j % 2].to_string()
                } else {
                    "0".into()
                }
            })
            .collect();
        s.push_str(&format!("d{},{}\n", i + 1, cells.join(",")));
    }
    write(dir, "blocks.csv", &s)
}

fn doi_dtm(dir: &Path) -> String {
    let out = path(dir.join("dtm"));
    let o = taxitree(&[
        "dtm",
        &path(fixture("doi/phrases.txt")),
        &path(fixture("doi/vocab.txt")),
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path(dir.join("dtm/dtm.csv"))
}

#[test]
fn block_diagonal_report_counts_unit_values() {
    let dir = TempDir::new().unwrap();
    let m = block_diagonal(dir.path());
    let out = path(dir.path().join("a"));
    let o = taxitree(&[
        "analyze", &m, "--out", &out, "--method", "ca", "--axes", "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(
        stdout(&o).contains("4 components; 3 unit singular values"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let m = block_diagonal(dir.path());
    let out = path(dir.path().join("a"));
    assert_eq!(
        code(&taxitree(&["analyze", &m, "--out", &out, "--axes", "0"])),
        1
    );
    assert_eq!(code(&taxitree(&["analyze", &m])), 1);
    assert_eq!(
        code(&taxitree(&[
            "analyze", &m, "--out", &out, "--method", "nope"
        ])),
        1
    );
    assert_eq!(code(&taxitree(&["frobnicate"])), 1);
    assert_eq!(code(&taxitree(&["--help"])), 0);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let coo = write(dir.path(), "bad.coo", "2 2 2\n1 1 3\n3 1 1\n");
    let out = path(dir.path().join("a"));
    let o = taxitree(&["analyze", &coo, "--format", "coo", "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let missing = path(dir.path().join("missing.csv"));
    assert_eq!(code(&taxitree(&["analyze", &missing, "--out", &out])), 2);
}

#[test]
fn independent_table_exits_3() {
    let dir = TempDir::new().unwrap();
    // Rows are proportional with merging off, so the residual is zero.
    let m = write(
        dir.path(),
        "indep.csv",
        ",a,b,c\nx,1,2,3\ny,2,4,6\nz,3,6,9\n",
    );
    let out = path(dir.path().join("a"));
    let o = taxitree(&[
        "analyze", &m, "--merge", "off", "--method", "tca", "--axes", "1", "--out", &out,
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn doi_end_to_end() {
    let dir = TempDir::new().unwrap();
    let dtm = doi_dtm(dir.path());
    let phrases = std::fs::read_to_string(dir.path().join("dtm/phrases.tsv")).unwrap();
    assert_eq!(phrases.lines().count(), 21);

    let a = path(dir.path().join("analysis"));
    let o = taxitree(&["analyze", &dtm, "--out", &a]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "analysis.json",
        "merge_map.json",
        "tca_qsr.csv",
        "ca_singular_values.csv",
        "report.txt",
    ] {
        assert!(dir.path().join("analysis").join(f).exists(), "{f}");
    }

    let result = path(dir.path().join("analysis/analysis.json"));
    let svg = path(dir.path().join("maps/tca.svg"));
    assert_eq!(code(&taxitree(&["plot", &result, "--out", &svg])), 0);
    let doc = std::fs::read_to_string(&svg).unwrap();
    assert!(
        doc.starts_with("<svg") && doc.contains("class=\"row\"") && doc.contains("class=\"col\"")
    );
    let contrib = path(dir.path().join("maps/contrib.svg"));
    assert_eq!(
        code(&taxitree(&[
            "plot",
            &result,
            "--kind",
            "contribution",
            "--out",
            &contrib
        ])),
        0
    );
    assert_eq!(
        code(&taxitree(&[
            "plot", &result, "--axes", "1,9", "--out", &contrib
        ])),
        1
    );
    assert_eq!(
        code(&taxitree(&[
            "plot",
            &result,
            "--kind",
            "contribution",
            "--method",
            "ca",
            "--out",
            &contrib
        ])),
        1
    );

    let t = path(dir.path().join("tree"));
    let o = taxitree(&["tree", &dtm, "--out", &t]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for p in ["NN", "NP", "PN", "PP"] {
        assert!(text.contains(&format!("Data{p} ")), "{text}");
    }

    let from_tree = taxitree(&["report", &path(dir.path().join("tree/tree.json"))]);
    assert_eq!(code(&from_tree), 0);
    assert_eq!(stdout(&from_tree), text);
    let from_analysis = taxitree(&["report", &result]);
    assert_eq!(code(&from_analysis), 0);
    assert!(stdout(&from_analysis).contains("QSR"));
    let junk = write(dir.path(), "junk.json", "{\"x\": 1}");
    assert_eq!(code(&taxitree(&["report", &junk])), 2);
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let dtm = doi_dtm(dir.path());
    let mut dumps = Vec::new();
    // Same paths both times: the echoed config names the output directory.
    let base = dir.path().join("run");
    for _ in 0..2 {
        let _ = std::fs::remove_dir_all(&base);
        let a = path(base.join("analysis"));
        let t = path(base.join("tree"));
        assert_eq!(code(&taxitree(&["analyze", &dtm, "--out", &a])), 0);
        assert_eq!(
            code(&taxitree(&["tree", &dtm, "--levels", "2", "--out", &t])),
            0
        );
        let svg = path(base.join("map.svg"));
        assert_eq!(
            code(&taxitree(&[
                "plot",
                &path(base.join("analysis/analysis.json")),
                "--out",
                &svg
            ])),
            0
        );
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        for sub in ["analysis", "tree"] {
            let mut entries: Vec<_> = std::fs::read_dir(base.join(sub))
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            entries.sort();
            for e in entries {
                let name = e.file_name().unwrap().to_string_lossy().into_owned();
                files.push((format!("{sub}/{name}"), std::fs::read(&e).unwrap()));
            }
        }
        files.push(("map.svg".into(), std::fs::read(&svg).unwrap()));
        dumps.push(files);
    }
    assert_eq!(dumps[0].len(), dumps[1].len());
    for (x, y) in dumps[0].iter().zip(&dumps[1]) {
        assert_eq!(x.0, y.0);
        assert!(x.1 == y.1, "{} differs between runs", x.0);
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = TempDir::new().unwrap();
    let m = block_diagonal(dir.path());
    let out = path(dir.path().join("a"));
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!("{{\"method\": \"ca\", \"axes\": 1, \"out\": {out:?}}}"),
    );
    let o = taxitree(&["--config", &cfg, "analyze", &m]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("a/analysis.json").exists());
    let bad = write(dir.path(), "bad.json", "{\"axes\": 0}");
    assert_eq!(
        code(&taxitree(&["--config", &bad, "analyze", &m, "--out", &out])),
        1
    );
}

#[test]
fn coo_output_and_input() {
    let dir = TempDir::new().unwrap();
    let out = path(dir.path().join("dtm"));
    let o = taxitree(&[
        "dtm",
        &path(fixture("doi/phrases.txt")),
        &path(fixture("doi/vocab.txt")),
        "--format",
        "coo",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("R6"));
    let coo = path(dir.path().join("dtm/dtm.coo"));
    assert!(dir.path().join("dtm/dtm.coo.rows").exists());
    let a = path(dir.path().join("a"));
    let o = taxitree(&["analyze", &coo, "--format", "coo", "--out", &a]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
