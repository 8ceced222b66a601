use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use taxitree::pipeline::{self, AnalysisReport, Method, PlotKind, RunConfig};
use taxitree::text::{self, Segmentation, Vocabulary};
use taxitree::tree::{BiclusterTree, SplitMode};
use taxitree::{io, report, svg, MatrixFormat};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "taxitree",
    version,
    about = "CA, taxicab CA and sign-quadrant trees of document-term tables"
)]
struct Cli {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a binary phrase-by-term table from text and a vocabulary.
    Dtm(DtmArgs),
    /// Prune, merge, and run CA and/or TCA on a table.
    Analyze(AnalyzeArgs),
    /// Build the sign-quadrant tree of a table.
    Tree(TreeArgs),
    /// Draw a map from an analysis.json.
    Plot(PlotArgs),
    /// Print the text report of an analysis.json or tree.json.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Coo,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Coo => MatrixFormat::Coo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ca,
    Tca,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ca => Method::Ca,
            MethodArg::Tca => Method::Tca,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Quadrant,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum SegmentArg {
    Line,
    Delimiter,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Principal,
    Contribution,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum)]
    merge: Option<OnOff>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DtmArgs {
    /// Phrase text, one phrase per line unless --segment delimiter.
    text: PathBuf,
    /// Vocabulary file: `label` or `label = token sequence` per line.
    vocab: PathBuf,
    #[arg(long, value_enum, default_value = "line")]
    segment: SegmentArg,
    #[arg(long, default_value = text::DEFAULT_DELIMITERS)]
    delimiters: String,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    matrix: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    axes: Option<usize>,
    #[arg(long)]
    threshold_lateral: Option<f64>,
}

#[derive(Args)]
struct TreeArgs {
    matrix: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Number of recursions; quadrant mode adds two path letters per recursion.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    min_rows: Option<usize>,
    #[arg(long)]
    min_cols: Option<usize>,
    #[arg(long)]
    topics: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// analysis.json written by `analyze`.
    result: PathBuf,
    #[arg(long, value_enum, default_value = "principal")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "tca")]
    method: MethodArg,
    /// Two one-based axes, e.g. `1,2`.
    #[arg(long, default_value = "1,2", value_delimiter = ',', num_args = 2)]
    axes: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// analysis.json or tree.json.
    result: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Marks failures caused by the command line itself.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<taxitree::Error>() {
            return if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_PARSE
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
        {
            return EXIT_PARSE;
        }
    }
    EXIT_USAGE
}

fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn apply_common(cfg: &mut RunConfig, c: &Common) {
    if let Some(f) = c.format {
        cfg.format = f.into();
    }
    if let Some(m) = c.merge {
        cfg.merge = matches!(m, OnOff::On);
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
}

fn validated(cfg: RunConfig) -> anyhow::Result<RunConfig> {
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    cfg.out.clone().ok_or_else(|| usage("--out is required"))
}

fn read(path: &Path, format: MatrixFormat) -> anyhow::Result<taxitree::Matrix> {
    io::read_matrix(path, format).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Dtm(a) => {
            if let Some(f) = a.format {
                cfg.format = f.into();
            }
            if let Some(o) = a.out {
                cfg.out = Some(o);
            }
            cfg.inputs = vec![a.text.clone(), a.vocab.clone()];
            let cfg = validated(cfg)?;
            let dir = out_dir(&cfg)?;
            let raw = std::fs::read_to_string(&a.text)
                .with_context(|| format!("reading {}", a.text.display()))?;
            let vocab = Vocabulary::from_file(&a.vocab)
                .with_context(|| format!("reading {}", a.vocab.display()))?;
            let seg = match a.segment {
                SegmentArg::Line => Segmentation::Line,
                SegmentArg::Delimiter => Segmentation::Delimiter(a.delimiters),
            };
            let phrases = text::split_phrases(&raw, &seg)?;
            let m: taxitree::Matrix = text::build_dtm(&phrases, &vocab)?;
            std::fs::create_dir_all(&dir)?;
            let name = match cfg.format {
                MatrixFormat::Csv => "dtm.csv",
                MatrixFormat::Coo => "dtm.coo",
            };
            io::write_matrix(&m, &dir.join(name), cfg.format)?;
            let listing: String = phrases
                .iter()
                .map(|(id, t)| format!("{id}\t{t}\n"))
                .collect();
            std::fs::write(dir.join("phrases.tsv"), listing)?;
            std::fs::write(dir.join("config.json"), cfg.to_json()?)?;
            let empty = text::empty_rows(&m);
            println!("{} phrases × {} terms", m.nrows(), m.ncols());
            if !empty.is_empty() {
                println!("phrases without any term: {}", empty.join(", "));
            }
        }
        Command::Analyze(a) => {
            apply_common(&mut cfg, &a.common);
            if let Some(m) = a.method {
                cfg.method = m.into();
            }
            if let Some(k) = a.axes {
                cfg.axes = k;
            }
            if let Some(t) = a.threshold_lateral {
                cfg.threshold_lateral = t;
            }
            cfg.inputs = vec![a.matrix.clone()];
            let cfg = validated(cfg)?;
            let dir = out_dir(&cfg)?;
            let m = read(&a.matrix, cfg.format)?;
            let analysis = pipeline::analyze(&m, &cfg)?;
            pipeline::write_analysis(&analysis, &dir)?;
            print!("{}", report::analysis_text(&analysis.report));
        }
        Command::Tree(a) => {
            apply_common(&mut cfg, &a.common);
            if let Some(m) = a.mode {
                cfg.mode = match m {
                    ModeArg::Quadrant => SplitMode::Quadrant,
                    ModeArg::Binary => SplitMode::Binary,
                };
            }
            if let Some(l) = a.levels {
                cfg.levels = l;
            }
            if let Some(r) = a.min_rows {
                cfg.min_rows = r;
            }
            if let Some(c) = a.min_cols {
                cfg.min_cols = c;
            }
            if let Some(k) = a.topics {
                cfg.topics = k;
            }
            cfg.inputs = vec![a.matrix.clone()];
            let cfg = validated(cfg)?;
            let dir = out_dir(&cfg)?;
            let m = read(&a.matrix, cfg.format)?;
            let tree = pipeline::run_tree(&m, &cfg)?;
            pipeline::write_tree(&tree, &cfg, &dir)?;
            print!("{}", report::tree_text(&tree));
        }
        Command::Plot(a) => {
            if a.axes.len() != 2 || a.axes.contains(&0) || a.axes[0] == a.axes[1] {
                bail!(usage("--axes takes two distinct one-based axis numbers"));
            }
            let text = std::fs::read_to_string(&a.result)
                .with_context(|| format!("reading {}", a.result.display()))?;
            let r: AnalysisReport = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", a.result.display()))?;
            let kind = match a.kind {
                KindArg::Principal => PlotKind::Principal,
                KindArg::Contribution => PlotKind::Contribution,
            };
            let map = pipeline::plot(&r, a.method.into(), kind, [a.axes[0] - 1, a.axes[1] - 1])
                .map_err(|e| usage(e.to_string()))?;
            let (doc, warnings) = svg::render(&map);
            for w in warnings {
                eprintln!("warning: {w}");
            }
            if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&a.out, doc)?;
        }
        Command::Report(a) => {
            let text = std::fs::read_to_string(&a.result)
                .with_context(|| format!("reading {}", a.result.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", a.result.display()))?;
            let body = if value.get("root").is_some() {
                let t: BiclusterTree<f64> = serde_json::from_value(value)?;
                report::tree_text(&t)
            } else if value.get("merge_map").is_some() {
                let r: AnalysisReport = serde_json::from_value(value)?;
                report::analysis_text(&r)
            } else {
                return Err(anyhow!(taxitree::Error::Parse {
                    line: 1,
                    msg: "neither an analysis nor a tree record".into()
                }));
            };
            match a.out {
                Some(p) => std::fs::write(p, body)?,
                None => print!("{body}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
