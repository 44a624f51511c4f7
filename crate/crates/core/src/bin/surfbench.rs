use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use surfbench::dataset::{load_dataset, DatasetError, Strictness};
use surfbench::ensemble::{score_wires, ScoreError};
use surfbench::report::{
    build_report, render, round_half_up, RenderFormat, ReportConfig, ReportError,
};
use surfbench::scheme::SchemeError;
use surfbench::stats::{self, MwuMode, StatsError, TestResult};
use surfbench::{RankVariant, SchemeRegistry, ScoringConfig, Weighting};

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {{
        let _ = writeln!($out, $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "surfbench",
    version,
    about = "Shoulder-surfing vulnerability metrics for authentication schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one guess against its original password.
    Score(ScoreArgs),
    /// Score a dataset of observations and write report tables.
    Analyze(AnalyzeArgs),
    /// Run a single statistical test on numbers given on the command line.
    Stats {
        #[command(subcommand)]
        test: StatsCommand,
    },
    /// List the available schemes.
    Schemes(SchemesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Log2,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Log,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Normal,
}

#[derive(Args)]
struct SchemeSource {
    /// Directory of extra scheme JSON files (presets are always available).
    #[arg(long, env = "SURFBENCH_SCHEMES")]
    schemes_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ScoringArgs {
    /// Score C and D metrics per match group.
    #[arg(long, value_enum, default_value = "on")]
    adjusted: Toggle,
    #[arg(long, value_enum, default_value = "log2")]
    weighting: WeightingArg,
    #[arg(long, value_enum, default_value = "log")]
    rank_variant: VariantArg,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    original: String,
    #[arg(long)]
    guess: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    source: SchemeSource,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV or JSON observation file.
    #[arg(long)]
    dataset: PathBuf,
    /// Output directory for the report files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "markdown")]
    format: Format,
    /// Skip invalid rows instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Scoring threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Leave the generation time out of metadata.json.
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long, value_enum, default_value = "auto")]
    mwu_mode: ModeArg,
    #[command(flatten)]
    source: SchemeSource,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Mann-Whitney U test of two samples.
    Mwu {
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Bonferroni family size.
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Also report a Monte-Carlo permutation p from this many resamples.
        #[arg(long)]
        permutations: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Kruskal-Wallis H test of three or more samples.
    Kw {
        /// CSV file with one column per group; blank cells are ignored.
        #[arg(long, conflicts_with = "group")]
        groups: Option<PathBuf>,
        /// Comma-separated values of one group; repeat per group.
        #[arg(long, allow_hyphen_values = true)]
        group: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Bonferroni adjustment of a single p-value.
    Bonferroni {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Args)]
struct SchemesArgs {
    /// Print the full definition of one scheme as JSON.
    #[arg(long)]
    show: Option<String>,
    #[command(flatten)]
    source: SchemeSource,
}

enum Failure {
    Usage(String),
    Validation(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<SchemeError> for Failure {
    fn from(e: SchemeError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ScoreError> for Failure {
    fn from(e: ScoreError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } | ReportError::Serialize { .. } | ReportError::Pool(_) => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut out = String::new();
    let result = match cli.command {
        Command::Score(args) => cmd_score(args, &mut out),
        Command::Analyze(args) => cmd_analyze(args, &mut out),
        Command::Stats { test } => cmd_stats(test, &mut out),
        Command::Schemes(args) => cmd_schemes(args, &mut out),
    };
    // a closed pipe on the reader's side is not our failure
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn registry(source: &SchemeSource) -> Result<SchemeRegistry, Failure> {
    match &source.schemes_dir {
        Some(dir) => Ok(SchemeRegistry::with_dir(dir)?),
        None => Ok(SchemeRegistry::with_presets()),
    }
}

fn scoring_config(a: &ScoringArgs) -> ScoringConfig {
    ScoringConfig {
        adjusted: matches!(a.adjusted, Toggle::On),
        weighting: match a.weighting {
            WeightingArg::Log2 => Weighting::Log2,
            WeightingArg::Linear => Weighting::Linear,
        },
        rank_variant: match a.rank_variant {
            VariantArg::Log => RankVariant::Log,
            VariantArg::Linear => RankVariant::Linear,
        },
        ..ScoringConfig::default()
    }
}

fn mwu_mode(m: ModeArg) -> MwuMode {
    match m {
        ModeArg::Auto => MwuMode::Auto,
        ModeArg::Exact => MwuMode::Exact,
        ModeArg::Normal => MwuMode::Normal,
    }
}

fn unsupported(format: Format, allowed: &[Format], what: &str) -> Result<(), Failure> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        let name = format
            .to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default();
        Err(Failure::Usage(format!(
            "--format {name} is not available for {what}"
        )))
    }
}

fn cmd_score(args: ScoreArgs, out: &mut String) -> Result<(), Failure> {
    unsupported(
        args.format,
        &[Format::Text, Format::Json, Format::Csv],
        "score",
    )?;
    let reg = registry(&args.source)?;
    let scheme = reg.require(&args.scheme)?;
    let config = scoring_config(&args.scoring);
    let (vector, clusters) = score_wires(&args.original, &args.guess, scheme, &config)?;
    let composites = [
        ("C", "Characteristics", clusters.characteristics),
        ("D", "Distance", clusters.distance),
        ("G", "Guessing Order*", clusters.guessing_order),
    ];
    match args.format {
        Format::Json => {
            let doc = json!({
                "scheme": scheme.id,
                "metrics": vector,
                "clusters": clusters,
            });
            say!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).expect("json values")
            );
        }
        Format::Csv => {
            say!(out, "code,name,value");
            for (id, v) in vector.iter() {
                say!(out, "{},{},{}", id.code(), id.name(), v);
            }
            for (code, name, v) in composites {
                say!(out, "{code},{name},{v}");
            }
        }
        _ => {
            say!(out, "scheme    {}", scheme.id);
            say!(
                out,
                "adjusted  {}",
                if vector.adjusted { "yes" } else { "no" }
            );
            for (id, v) in vector.iter() {
                let star = if id.complementary() { "*" } else { "" };
                let label = format!("{}{}", id.name(), star);
                say!(
                    out,
                    "{:<3} {:<16} {}",
                    id.code(),
                    label,
                    round_half_up(v, 4)
                );
            }
            for (code, name, v) in composites {
                say!(out, "{:<3} {:<16} {}", code, name, round_half_up(v, 4));
            }
        }
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs, out: &mut String) -> Result<(), Failure> {
    let format = match args.format {
        Format::Markdown => RenderFormat::Markdown,
        Format::Csv => RenderFormat::Csv,
        Format::Json => RenderFormat::Json,
        Format::Text => return unsupported(args.format, &[], "analyze"),
    };
    let reg = registry(&args.source)?;
    let strictness = if args.lenient {
        Strictness::Lenient
    } else {
        Strictness::Strict
    };
    let loaded = load_dataset(&args.dataset, &reg, strictness)?;
    for d in &loaded.skipped {
        eprintln!("skipped {d}");
    }
    let generated_unix_s = if args.no_timestamp {
        None
    } else {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())
    };
    let config = ReportConfig {
        scoring: scoring_config(&args.scoring),
        mwu_mode: mwu_mode(args.mwu_mode),
        jobs: args.jobs,
        generated_unix_s,
    };
    let bundle = build_report(&loaded.records, &reg, &config)?;
    let written = render(&bundle, format, &args.out)?;

    say!(out, "records: {}", bundle.metadata.records);
    for g in &bundle.metadata.groups {
        say!(out, "  {:<24} {}", g.group, g.n);
    }
    for notice in &bundle.metadata.notices {
        say!(out, "note: {notice}");
    }
    say!(
        out,
        "significant pairs (p_adjusted < 0.05): {}",
        bundle.significant_pairs()
    );
    for p in written {
        say!(out, "wrote {}", p.display());
    }
    Ok(())
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::Validation(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

fn read_group_columns(path: &Path) -> Result<Vec<Vec<f64>>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        let mut parsed = Vec::with_capacity(row.len());
        let mut header = line == 0;
        for cell in row.iter() {
            match cell.parse::<f64>() {
                Ok(v) => {
                    header = false;
                    parsed.push(Some(v));
                }
                Err(_) if cell.is_empty() => parsed.push(None),
                Err(_) if header => parsed.push(None),
                Err(_) => {
                    return Err(Failure::Validation(format!(
                        "{} line {}: `{cell}` is not a number",
                        path.display(),
                        line + 1
                    )))
                }
            }
        }
        // a first line of non-numeric labels is a header
        if line == 0 && header {
            continue;
        }
        if columns.len() < parsed.len() {
            columns.resize(parsed.len(), Vec::new());
        }
        for (c, v) in parsed.into_iter().enumerate() {
            if let Some(v) = v {
                columns[c].push(v);
            }
        }
    }
    Ok(columns)
}

fn print_test(
    out: &mut String,
    t: &TestResult,
    format: Format,
    extra: &[(&str, serde_json::Value)],
) -> Result<(), Failure> {
    unsupported(format, &[Format::Text, Format::Json], "stats")?;
    if format == Format::Json {
        let mut doc = serde_json::to_value(t).expect("test result serializes");
        for (k, v) in extra {
            doc[*k] = v.clone();
        }
        say!(
            out,
            "{}",
            serde_json::to_string_pretty(&doc).expect("json values")
        );
        return Ok(());
    }
    let method = serde_json::to_value(t.method).ok();
    let method = method.as_ref().and_then(|v| v.as_str()).unwrap_or("");
    match t.test {
        stats::TestKind::MannWhitney => say!(out, "U          {}", t.statistic),
        stats::TestKind::KruskalWallis => {
            say!(out, "H          {}", round_half_up(t.statistic, 4));
            if let Some(df) = t.df {
                say!(out, "df         {df}");
            }
        }
    }
    if let Some(z) = t.z {
        say!(out, "z          {}", round_half_up(z, 4));
    }
    say!(out, "p          {}", round_half_up(t.p_raw, 4));
    say!(
        out,
        "p_adjusted {} (m = {})",
        round_half_up(t.p_adjusted, 4),
        t.m
    );
    say!(out, "method     {method}");
    if let (Some(r), Some(label)) = (t.effect_r, t.effect_label) {
        say!(out, "effect r   {} ({label})", round_half_up(r, 4));
    }
    say!(out, "n          {}", t.n);
    for (k, v) in extra {
        say!(out, "{k:<10} {v}");
    }
    Ok(())
}

fn cmd_stats(test: StatsCommand, out: &mut String) -> Result<(), Failure> {
    match test {
        StatsCommand::Mwu {
            a,
            b,
            m,
            mode,
            permutations,
            seed,
            format,
        } => {
            if m == 0 {
                return Err(Failure::Usage("--m must be at least 1".into()));
            }
            let a = parse_list(&a, "--a")?;
            let b = parse_list(&b, "--b")?;
            let t = stats::mann_whitney(&a, &b, mwu_mode(mode))?.with_family(m);
            let mut extra = Vec::new();
            if let Some(n) = permutations {
                let p = stats::permutation_p(&a, &b, n, seed)?;
                extra.push(("p_permutation", json!(p)));
                extra.push(("seed", json!(seed)));
            }
            print_test(out, &t, format, &extra)
        }
        StatsCommand::Kw {
            groups,
            group,
            format,
        } => {
            let samples = match groups {
                Some(path) => read_group_columns(&path)?,
                None => group
                    .iter()
                    .map(|g| parse_list(g, "--group"))
                    .collect::<Result<_, _>>()?,
            };
            let t = stats::kruskal_wallis(&samples)?;
            print_test(out, &t, format, &[])
        }
        StatsCommand::Bonferroni { p, m } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Failure::Validation(format!("p = {p} is outside [0, 1]")));
            }
            if m == 0 {
                return Err(Failure::Usage("--m must be at least 1".into()));
            }
            say!(out, "{}", stats::bonferroni(p, m));
            Ok(())
        }
    }
}

fn cmd_schemes(args: SchemesArgs, out: &mut String) -> Result<(), Failure> {
    let reg = registry(&args.source)?;
    if let Some(id) = args.show {
        let scheme = reg.require(&id)?;
        let text = serde_json::to_string_pretty(scheme.definition())
            .map_err(|e| Failure::Internal(e.to_string()))?;
        say!(out, "{text}");
        return Ok(());
    }
    for scheme in reg.iter() {
        let groups: Vec<String> = scheme
            .match_groups()
            .iter()
            .map(|g| format!("{}:{}", g.name, g.size))
            .collect();
        say!(
            out,
            "{:<16} pool {:<5} symbols {:<6} groups {}",
            scheme.id,
            scheme.definition().pool_size,
            scheme.symbol_count(),
            groups.join(",")
        );
    }
    Ok(())
}
