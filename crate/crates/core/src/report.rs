//! Aggregation of scored observations into descriptive tables, pairwise test
//! grids and box-plot data, plus rendering to Markdown, CSV or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{group_records, GroupBy, GroupKey, ObservationRecord, ObserverType};
use crate::ensemble::{score_record, ScoreError, ScoringConfig};
use crate::metrics::MetricId;
use crate::scheme::SchemeRegistry;
use crate::stats::{
    box_summary, describe, kruskal_wallis, mann_whitney, BoxSummary, DescriptiveStats, MwuMode,
    TestResult,
};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records")]
    NoRecords,
    #[error("record {record_id}: unknown scheme `{scheme_id}`")]
    UnknownScheme {
        record_id: String,
        scheme_id: String,
    },
    #[error("record {record_id}: {source}")]
    Score {
        record_id: String,
        #[source]
        source: ScoreError,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize {path}: {source}")]
    Serialize {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// A row of the report tables: one of the fourteen metrics, a cluster
/// composite, or the login time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportRow {
    Metric(MetricId),
    Characteristics,
    Distance,
    GuessingOrder,
    LoginTime,
}

impl ReportRow {
    pub fn all() -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = MetricId::ALL
            .iter()
            .map(|&m| ReportRow::Metric(m))
            .collect();
        rows.extend([
            ReportRow::Characteristics,
            ReportRow::Distance,
            ReportRow::GuessingOrder,
            ReportRow::LoginTime,
        ]);
        rows
    }

    /// Rows that also get box-plot summaries.
    pub const BOXPLOT: [ReportRow; 4] = [
        ReportRow::LoginTime,
        ReportRow::Characteristics,
        ReportRow::Distance,
        ReportRow::GuessingOrder,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ReportRow::Metric(m) => m.code(),
            ReportRow::Characteristics => "C",
            ReportRow::Distance => "D",
            ReportRow::GuessingOrder => "G",
            ReportRow::LoginTime => "login_time_s",
        }
    }

    pub fn label(self) -> String {
        match self {
            ReportRow::Metric(m) if m.complementary() => format!("{}*", m.name()),
            ReportRow::Metric(m) => m.name().to_string(),
            ReportRow::Characteristics => "Characteristics".into(),
            ReportRow::Distance => "Distance".into(),
            ReportRow::GuessingOrder => "Guessing Order*".into(),
            ReportRow::LoginTime => "Login time (s)".into(),
        }
    }

    fn slot(self) -> usize {
        match self {
            ReportRow::Metric(m) => m.index(),
            ReportRow::Characteristics => 14,
            ReportRow::Distance => 15,
            ReportRow::GuessingOrder => 16,
            ReportRow::LoginTime => 17,
        }
    }
}

impl Serialize for ReportRow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub scoring: ScoringConfig,
    pub mwu_mode: MwuMode,
    /// Worker threads for scoring; 0 lets the pool decide.
    pub jobs: usize,
    /// Recorded in metadata when set.
    pub generated_unix_s: Option<u64>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            scoring: ScoringConfig::default(),
            mwu_mode: MwuMode::Auto,
            jobs: 0,
            generated_unix_s: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1 {
    pub rows: Vec<ReportRow>,
    pub columns: Vec<GroupKey>,
    /// `cells[row][column]`; `None` when the group has no values for the row.
    pub cells: Vec<Vec<Option<DescriptiveStats>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseGrid {
    pub name: String,
    pub rows: Vec<ReportRow>,
    pub columns: Vec<String>,
    /// Bonferroni family size applied to every cell.
    pub m: usize,
    /// Kruskal-Wallis across the compared groups, one per row, when it applies.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub omnibus: Vec<Option<TestResult>>,
    /// `cells[row][column]`; `None` when one side has no values.
    pub cells: Vec<Vec<Option<TestResult>>>,
}

impl PairwiseGrid {
    pub fn significant_count(&self) -> usize {
        self.cells
            .iter()
            .flatten()
            .flatten()
            .filter(|t| t.significant(SIGNIFICANCE))
            .count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupBoxplots {
    pub group: GroupKey,
    pub series: BTreeMap<String, Option<BoxSummary>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupCount {
    pub group: String,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Family {
    pub name: String,
    pub m: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: String,
    pub weighting: String,
    pub rank_variant: String,
    pub adjusted: bool,
    pub ngram_n: usize,
    pub mwu_mode: MwuMode,
    pub records: usize,
    pub groups: Vec<GroupCount>,
    pub families: Vec<Family>,
    pub notices: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix_s: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub table1: Table1,
    pub pairwise_methods: Vec<PairwiseGrid>,
    pub pairwise_observers: Option<PairwiseGrid>,
    pub boxplots: Vec<GroupBoxplots>,
    pub metadata: Metadata,
}

impl ReportBundle {
    pub fn significant_pairs(&self) -> usize {
        self.pairwise_methods
            .iter()
            .chain(self.pairwise_observers.iter())
            .map(PairwiseGrid::significant_count)
            .sum()
    }
}

type RowValues = [Option<f64>; 18];

fn score_all(
    records: &[ObservationRecord],
    schemes: &SchemeRegistry,
    config: &ReportConfig,
) -> Result<Vec<RowValues>, ReportError> {
    let score_one = |r: &ObservationRecord| -> Result<RowValues, ReportError> {
        let scheme = schemes
            .get(&r.scheme_id)
            .ok_or_else(|| ReportError::UnknownScheme {
                record_id: r.record_id.clone(),
                scheme_id: r.scheme_id.clone(),
            })?;
        let (v, c) =
            score_record(r, scheme, &config.scoring).map_err(|source| ReportError::Score {
                record_id: r.record_id.clone(),
                source,
            })?;
        let mut out = [None; 18];
        for (id, x) in v.iter() {
            out[id.index()] = Some(x);
        }
        out[14] = Some(c.characteristics);
        out[15] = Some(c.distance);
        out[16] = Some(c.guessing_order);
        out[17] = r.login_time_s;
        Ok(out)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| ReportError::Pool(e.to_string()))?;
    // collect keeps input order regardless of scheduling
    pool.install(|| records.par_iter().map(score_one).collect())
}

fn column(scored: &[RowValues], idx: &[usize], row: ReportRow) -> Vec<f64> {
    idx.iter().filter_map(|&i| scored[i][row.slot()]).collect()
}

fn pair_test(a: &[f64], b: &[f64], mode: MwuMode, m: usize) -> Option<TestResult> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    mann_whitney(a, b, mode).ok().map(|t| t.with_family(m))
}

fn methods_grid(
    name: &str,
    groups: &[(String, Vec<usize>)],
    scored: &[RowValues],
    rows: &[ReportRow],
    mode: MwuMode,
) -> PairwiseGrid {
    let mut pairs = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            pairs.push((i, j));
        }
    }
    let m = pairs.len();
    let mut omnibus = Vec::new();
    let mut cells = Vec::new();
    for &row in rows {
        let samples: Vec<Vec<f64>> = groups
            .iter()
            .map(|(_, idx)| column(scored, idx, row))
            .collect();
        let present: Vec<Vec<f64>> = samples.iter().filter(|s| !s.is_empty()).cloned().collect();
        omnibus.push(kruskal_wallis(&present).ok());
        cells.push(
            pairs
                .iter()
                .map(|&(i, j)| pair_test(&samples[i], &samples[j], mode, m))
                .collect(),
        );
    }
    PairwiseGrid {
        name: name.to_string(),
        rows: rows.to_vec(),
        columns: pairs
            .iter()
            .map(|&(i, j)| format!("{} vs {}", groups[i].0, groups[j].0))
            .collect(),
        m,
        omnibus,
        cells,
    }
}

/// Scores every record and aggregates per scheme and observer group.
pub fn build_report(
    records: &[ObservationRecord],
    schemes: &SchemeRegistry,
    config: &ReportConfig,
) -> Result<ReportBundle, ReportError> {
    if records.is_empty() {
        return Err(ReportError::NoRecords);
    }
    let scored = score_all(records, schemes, config)?;
    let rows = ReportRow::all();
    let groups = group_records(records, GroupBy::SchemeObserver);

    let cells = rows
        .iter()
        .map(|&row| {
            groups
                .iter()
                .map(|(_, idx)| describe(&column(&scored, idx, row)).ok())
                .collect()
        })
        .collect();
    let table1 = Table1 {
        rows: rows.clone(),
        columns: groups.iter().map(|(k, _)| k.clone()).collect(),
        cells,
    };

    let boxplots = groups
        .iter()
        .map(|(k, idx)| GroupBoxplots {
            group: k.clone(),
            series: ReportRow::BOXPLOT
                .iter()
                .map(|&row| {
                    (
                        row.code().to_string(),
                        box_summary(&column(&scored, idx, row)).ok(),
                    )
                })
                .collect(),
        })
        .collect();

    let mut notices = Vec::new();
    let mut families = Vec::new();
    let mut pairwise_methods = Vec::new();
    if groups.len() < 2 {
        notices.push(format!(
            "single group {}: pairwise comparisons omitted",
            groups[0].0
        ));
    } else {
        let strata: [(&str, Option<ObserverType>); 3] = [
            ("all", None),
            ("active", Some(ObserverType::Active)),
            ("passive", Some(ObserverType::Passive)),
        ];
        for (name, observer) in strata {
            let mut by_scheme: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for (k, idx) in &groups {
                if observer.is_none() || k.observer_type == observer {
                    by_scheme
                        .entry(k.scheme_id.clone())
                        .or_default()
                        .extend(idx);
                }
            }
            if by_scheme.len() < 2 {
                notices.push(format!(
                    "{name}: fewer than two schemes, method comparisons omitted"
                ));
                continue;
            }
            let mut per_scheme: Vec<(String, Vec<usize>)> = by_scheme.into_iter().collect();
            for (_, idx) in &mut per_scheme {
                idx.sort_unstable();
            }
            let grid = methods_grid(name, &per_scheme, &scored, &rows, config.mwu_mode);
            families.push(Family {
                name: format!("methods/{name}"),
                m: grid.m,
            });
            pairwise_methods.push(grid);
        }
    }

    let mut observer_pairs = Vec::new();
    for (i, (k, idx)) in groups.iter().enumerate() {
        if k.observer_type != Some(ObserverType::Active) {
            continue;
        }
        if let Some((_, passive)) = groups.get(i + 1).filter(|(p, _)| {
            p.scheme_id == k.scheme_id && p.observer_type == Some(ObserverType::Passive)
        }) {
            observer_pairs.push((k.scheme_id.clone(), idx, passive));
        }
    }
    let pairwise_observers = if observer_pairs.is_empty() {
        if groups.len() >= 2 {
            notices.push("no scheme has both observer types, observer comparisons omitted".into());
        }
        None
    } else {
        let m = observer_pairs.len();
        let cells = rows
            .iter()
            .map(|&row| {
                observer_pairs
                    .iter()
                    .map(|(_, a, p)| {
                        pair_test(
                            &column(&scored, a, row),
                            &column(&scored, p, row),
                            config.mwu_mode,
                            m,
                        )
                    })
                    .collect()
            })
            .collect();
        families.push(Family {
            name: "observers".into(),
            m,
        });
        Some(PairwiseGrid {
            name: "active vs passive".into(),
            rows: rows.clone(),
            columns: observer_pairs.iter().map(|(s, _, _)| s.clone()).collect(),
            m,
            omnibus: Vec::new(),
            cells,
        })
    };

    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        weighting: config.scoring.weighting.to_string(),
        rank_variant: config.scoring.rank_variant.to_string(),
        adjusted: config.scoring.adjusted,
        ngram_n: config.scoring.ngram_n,
        mwu_mode: config.mwu_mode,
        records: records.len(),
        groups: groups
            .iter()
            .map(|(k, idx)| GroupCount {
                group: k.to_string(),
                n: idx.len(),
            })
            .collect(),
        families,
        notices,
        generated_unix_s: config.generated_unix_s,
    };

    Ok(ReportBundle {
        table1,
        pairwise_methods,
        pairwise_observers,
        boxplots,
        metadata,
    })
}

/// Rounds half away from zero on the shortest decimal representation of `x`,
/// so 0.34815 becomes "0.3482" even though its binary value is slightly below.
pub fn round_half_up(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().take(decimals))
        .collect();
    digits.extend(std::iter::repeat_n(
        b'0',
        int_part.len() + decimals - digits.len(),
    ));
    if frac_part
        .as_bytes()
        .get(decimals)
        .is_some_and(|&d| d >= b'5')
    {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::from_utf8(digits[..split].to_vec()).expect("ascii digits");
    if decimals > 0 {
        out.push('.');
        out.push_str(std::str::from_utf8(&digits[split..]).expect("ascii digits"));
    }
    if x < 0.0 && out.bytes().any(|b| (b'1'..=b'9').contains(&b)) {
        out.insert(0, '-');
    }
    out
}

fn r4(x: f64) -> String {
    round_half_up(x, 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Markdown,
    Csv,
    Json,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T, path: &Path) -> Result<Vec<u8>, ReportError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| ReportError::Serialize {
        path: path.display().to_string(),
        source,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the bundle into `out_dir` and returns the written paths.
pub fn render(
    bundle: &ReportBundle,
    format: RenderFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    match format {
        RenderFormat::Json => {
            let p = out_dir.join("report.json");
            let bytes = to_json(bundle, &p)?;
            files.push((p, bytes));
        }
        RenderFormat::Markdown => {
            files.push((
                out_dir.join("table1.md"),
                table1_markdown(&bundle.table1).into_bytes(),
            ));
            files.push((
                out_dir.join("pairwise_methods.md"),
                grids_markdown(&bundle.pairwise_methods).into_bytes(),
            ));
            files.push((
                out_dir.join("pairwise_observers.md"),
                grids_markdown(bundle.pairwise_observers.as_slice()).into_bytes(),
            ));
        }
        RenderFormat::Csv => {
            files.push((out_dir.join("table1.csv"), table1_csv(&bundle.table1)));
            files.push((
                out_dir.join("pairwise_methods.csv"),
                grids_csv(&bundle.pairwise_methods),
            ));
            files.push((
                out_dir.join("pairwise_observers.csv"),
                grids_csv(bundle.pairwise_observers.as_slice()),
            ));
        }
    }
    if format != RenderFormat::Json {
        let p = out_dir.join("boxplots.json");
        let bytes = to_json(&bundle.boxplots, &p)?;
        files.push((p, bytes));
        let p = out_dir.join("metadata.json");
        let bytes = to_json(&bundle.metadata, &p)?;
        files.push((p, bytes));
    }
    for (path, bytes) in &files {
        write_file(path, bytes)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn md_rule(n: usize) -> String {
    md_row(&vec!["---".to_string(); n])
}

pub fn table1_markdown(t: &Table1) -> String {
    let mut header = vec!["Metric".to_string()];
    header.extend(t.columns.iter().map(|c| c.to_string()));
    let mut out = String::from("# Means and standard deviations\n\n");
    out += &md_row(&header);
    out += &md_rule(header.len());
    let mut counts = vec!["n".to_string()];
    counts.extend((0..t.columns.len()).map(|j| {
        t.cells
            .iter()
            .filter_map(|row| row[j].as_ref())
            .map(|d| d.n)
            .max()
            .unwrap_or(0)
            .to_string()
    }));
    out += &md_row(&counts);
    for (row, cells) in t.rows.iter().zip(&t.cells) {
        let mut line = vec![format!("{} {}", row.code(), row.label())];
        line.extend(cells.iter().map(|c| match c {
            Some(d) => format!("{} ({})", r4(d.mean), r4(d.sd)),
            None => "-".to_string(),
        }));
        out += &md_row(&line);
    }
    out
}

fn p_cell(t: &Option<TestResult>) -> String {
    match t {
        Some(t) if t.significant(SIGNIFICANCE) => format!("{}*", r4(t.p_adjusted)),
        Some(t) => r4(t.p_adjusted),
        None => "-".to_string(),
    }
}

pub fn grids_markdown(grids: &[PairwiseGrid]) -> String {
    let mut out = String::from("# Bonferroni-adjusted pairwise p-values\n");
    if grids.is_empty() {
        out += "\nNo comparisons.\n";
    }
    for g in grids {
        let _ = write!(out, "\n## {} (m = {})\n\n", g.name, g.m);
        let mut header = vec!["Metric".to_string()];
        let with_kw = !g.omnibus.is_empty();
        if with_kw {
            header.push("Kruskal-Wallis H (p)".into());
        }
        header.extend(g.columns.iter().cloned());
        out += &md_row(&header);
        out += &md_rule(header.len());
        for (i, row) in g.rows.iter().enumerate() {
            let mut line = vec![format!("{} {}", row.code(), row.label())];
            if with_kw {
                line.push(match &g.omnibus[i] {
                    Some(t) => format!("{} ({})", r4(t.statistic), r4(t.p_raw)),
                    None => "-".to_string(),
                });
            }
            line.extend(g.cells[i].iter().map(p_cell));
            out += &md_row(&line);
        }
    }
    out += "\n`*` marks p_adjusted < 0.05.\n";
    out
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn opt4(x: Option<f64>) -> String {
    x.map(r4).unwrap_or_default()
}

pub fn table1_csv(t: &Table1) -> Vec<u8> {
    let mut rows = Vec::new();
    for (row, cells) in t.rows.iter().zip(&t.cells) {
        for (col, cell) in t.columns.iter().zip(cells) {
            let Some(d) = cell else { continue };
            rows.push(vec![
                row.code().to_string(),
                col.scheme_id.clone(),
                col.observer_type.map(|o| o.to_string()).unwrap_or_default(),
                d.n.to_string(),
                r4(d.mean),
                r4(d.sd),
                r4(d.median),
                r4(d.q1),
                r4(d.q3),
                r4(d.min),
                r4(d.max),
            ]);
        }
    }
    csv_bytes(
        &[
            "metric",
            "scheme_id",
            "observer_type",
            "n",
            "mean",
            "sd",
            "median",
            "q1",
            "q3",
            "min",
            "max",
        ],
        rows,
    )
}

pub fn grids_csv(grids: &[PairwiseGrid]) -> Vec<u8> {
    let mut rows = Vec::new();
    for g in grids {
        for (i, row) in g.rows.iter().enumerate() {
            let omnibus = g.omnibus.get(i).cloned().flatten();
            let tests = omnibus
                .iter()
                .map(|t| ("kruskal-wallis".to_string(), t))
                .chain(
                    g.columns
                        .iter()
                        .zip(&g.cells[i])
                        .filter_map(|(c, t)| t.as_ref().map(|t| (c.clone(), t))),
                )
                .map(|(comparison, t)| {
                    vec![
                        g.name.clone(),
                        row.code().to_string(),
                        comparison,
                        serde_json::to_value(t.test)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                        r4(t.statistic),
                        opt4(t.z),
                        r4(t.p_raw),
                        r4(t.p_adjusted),
                        t.m.to_string(),
                        opt4(t.effect_r),
                        t.effect_label.map(|l| l.to_string()).unwrap_or_default(),
                        t.n.to_string(),
                        t.significant(SIGNIFICANCE).to_string(),
                    ]
                })
                .collect::<Vec<_>>();
            rows.extend(tests);
        }
    }
    csv_bytes(
        &[
            "family",
            "metric",
            "comparison",
            "test",
            "statistic",
            "z",
            "p_raw",
            "p_adjusted",
            "m",
            "effect_r",
            "effect_label",
            "n",
            "significant",
        ],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(
        id: usize,
        scheme: &str,
        obs: ObserverType,
        o: &str,
        g: &str,
        t: f64,
    ) -> ObservationRecord {
        ObservationRecord {
            record_id: format!("r{id}"),
            scheme_id: scheme.into(),
            participant_id: format!("p{id}"),
            observer_type: obs,
            original: o.into(),
            guess: g.into(),
            login_time_s: Some(t),
        }
    }

    #[test]
    fn rounding_half_up() {
        assert_eq!(round_half_up(0.34812, 4), "0.3481");
        assert_eq!(round_half_up(0.34815, 4), "0.3482");
        assert_eq!(round_half_up(0.99995, 4), "1.0000");
        assert_eq!(round_half_up(1.0, 4), "1.0000");
        assert_eq!(round_half_up(-0.00004, 4), "0.0000");
        assert_eq!(round_half_up(-2.5, 0), "-3");
        assert_eq!(round_half_up(1e-7, 4), "0.0000");
        assert_eq!(round_half_up(12.3, 2), "12.30");
    }

    #[test]
    fn identical_groups_not_significant() {
        let reg = SchemeRegistry::with_presets();
        let pairs = [
            ("Ab1cd", "Ab1"),
            ("qwerty", "qwe"),
            ("hello1", "hellO1"),
            ("pass", "word"),
        ];
        let mut records = Vec::new();
        for (i, (o, g)) in pairs.iter().enumerate() {
            for obs in [ObserverType::Active, ObserverType::Passive] {
                records.push(rec(records.len(), "textual", obs, o, g, 10.0 + i as f64));
            }
        }
        let b = build_report(&records, &reg, &ReportConfig::default()).unwrap();
        let grid = b.pairwise_observers.as_ref().unwrap();
        assert_eq!(grid.m, 1);
        for t in grid.cells.iter().flatten().flatten() {
            assert_eq!(t.p_adjusted, 1.0);
            assert_eq!(t.effect_label, Some(crate::stats::EffectLabel::Negligible));
        }
        assert!(b.pairwise_methods.is_empty());
        assert!(!b.metadata.notices.is_empty());
    }

    #[test]
    fn table_inventory_and_families() {
        let reg = SchemeRegistry::with_presets();
        let mut records = Vec::new();
        let samples = [
            ("textual", "abc1", "abc2"),
            ("gcps", "W:N:f3 B:Q:d8", "W:N:f3"),
            ("assoc-list", "anchor kettle violin", "anchor kettle"),
        ];
        for (s, o, g) in samples {
            for obs in [ObserverType::Active, ObserverType::Passive] {
                for k in 0..3 {
                    records.push(rec(records.len(), s, obs, o, g, k as f64));
                }
            }
        }
        let b = build_report(&records, &reg, &ReportConfig::default()).unwrap();
        assert_eq!(b.table1.rows.len(), 18);
        assert_eq!(b.table1.columns.len(), 6);
        assert!(b.table1.cells.iter().flatten().all(Option::is_some));
        assert_eq!(b.pairwise_methods.len(), 3);
        assert!(b
            .pairwise_methods
            .iter()
            .all(|g| g.m == 3 && g.columns.len() == 3));
        assert_eq!(b.pairwise_observers.as_ref().unwrap().m, 3);
        assert_eq!(b.metadata.families.len(), 4);
        assert_eq!(b.boxplots.len(), 6);
    }

    #[test]
    fn missing_login_times_marked_absent() {
        let reg = SchemeRegistry::with_presets();
        let mut r = rec(0, "textual", ObserverType::Active, "abc", "abc", 0.0);
        r.login_time_s = None;
        let b = build_report(&[r], &reg, &ReportConfig::default()).unwrap();
        let last = b.table1.cells.last().unwrap();
        assert!(last[0].is_none());
        assert!(table1_markdown(&b.table1).contains("| login_time_s Login time (s) | - |"));
    }

    #[test]
    fn empty_dataset() {
        let reg = SchemeRegistry::with_presets();
        let err = build_report(&[], &reg, &ReportConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "no records");
    }

    #[test]
    fn significant_marker() {
        let t = TestResult {
            test: crate::stats::TestKind::MannWhitney,
            statistic: 1.0,
            df: None,
            z: Some(2.0),
            p_raw: 0.008,
            p_adjusted: 0.048,
            m: 6,
            effect_r: None,
            effect_label: None,
            method: crate::stats::PMethod::NormalApprox,
            n: 10,
        };
        assert_eq!(p_cell(&Some(t.clone())), "0.0480*");
        let t = t.with_family(7);
        assert_eq!(p_cell(&Some(t)), "0.0560");
    }
}
