//! Observation records: loading, validation and grouping.
//!
//! CSV header (exact, ordered):
//! `record_id,scheme_id,participant_id,observer_type,original,guess,login_time_s`.
//! The JSON form is `{"records": [{...same fields...}]}`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::SchemeRegistry;

pub const CSV_HEADER: [&str; 7] = [
    "record_id",
    "scheme_id",
    "participant_id",
    "observer_type",
    "original",
    "guess",
    "login_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserverType {
    Active,
    Passive,
}

impl ObserverType {
    pub fn as_str(self) -> &'static str {
        match self {
            ObserverType::Active => "active",
            ObserverType::Passive => "passive",
        }
    }
}

impl fmt::Display for ObserverType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ObserverType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "active" => Ok(ObserverType::Active),
            "passive" => Ok(ObserverType::Passive),
            other => Err(format!(
                "observer_type must be `active` or `passive`, got {other:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub record_id: String,
    pub scheme_id: String,
    pub participant_id: String,
    pub observer_type: ObserverType,
    pub original: String,
    pub guess: String,
    #[serde(default)]
    pub login_time_s: Option<f64>,
}

/// One problem with one input row. `row` is 1-based and counts data rows only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowDiagnostic {
    pub row: usize,
    pub column: String,
    pub reason: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row {}, column `{}`: {}",
            self.row, self.column, self.reason
        )
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no records")]
    NoRecords,
    #[error("unexpected CSV header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: String,
    },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("{} invalid row(s):\n{}", .0.len(), join_diagnostics(.0))]
    Invalid(Vec<RowDiagnostic>),
}

fn join_diagnostics(d: &[RowDiagnostic]) -> String {
    d.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Any invalid row fails the whole load.
    #[default]
    Strict,
    /// Invalid rows are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadedDataset {
    pub records: Vec<ObservationRecord>,
    /// Rows skipped in lenient mode.
    pub skipped: Vec<RowDiagnostic>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJsonRecord {
    #[serde(default)]
    record_id: Option<String>,
    scheme_id: Option<String>,
    participant_id: Option<String>,
    observer_type: Option<String>,
    original: Option<String>,
    #[serde(default)]
    guess: Option<String>,
    #[serde(default)]
    login_time_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDataset {
    records: Vec<RawJsonRecord>,
}

struct RawRow {
    record_id: String,
    scheme_id: String,
    participant_id: String,
    observer_type: String,
    original: String,
    guess: String,
    login_time: LoginField,
}

enum LoginField {
    Text(String),
    Number(Option<f64>),
}

/// Loads a CSV (or, with a `.json` extension, JSON) dataset and validates
/// every row against the registry.
pub fn load_dataset(
    path: &Path,
    schemes: &SchemeRegistry,
    strictness: Strictness,
) -> Result<LoadedDataset, DatasetError> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        parse_json(&text, schemes, strictness)
    } else {
        parse_csv(&text, schemes, strictness)
    }
}

pub fn parse_csv(
    text: &str,
    schemes: &SchemeRegistry,
    strictness: Strictness,
) -> Result<LoadedDataset, DatasetError> {
    if text.trim().is_empty() {
        return Err(DatasetError::NoRecords);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| DatasetError::Parse(e.to_string()))?
        .clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(DatasetError::Header {
            found: header.iter().map(str::to_string).collect(),
            expected: CSV_HEADER.join(","),
        });
    }
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 1;
        match result {
            Ok(rec) if rec.len() == CSV_HEADER.len() => rows.push((
                row,
                RawRow {
                    record_id: rec[0].to_string(),
                    scheme_id: rec[1].to_string(),
                    participant_id: rec[2].to_string(),
                    observer_type: rec[3].to_string(),
                    original: rec[4].to_string(),
                    guess: rec[5].to_string(),
                    login_time: LoginField::Text(rec[6].to_string()),
                },
            )),
            Ok(rec) => diagnostics.push(RowDiagnostic {
                row,
                column: "*".into(),
                reason: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            }),
            Err(e) => diagnostics.push(RowDiagnostic {
                row,
                column: "*".into(),
                reason: e.to_string(),
            }),
        }
    }
    validate(rows, diagnostics, schemes, strictness)
}

pub fn parse_json(
    text: &str,
    schemes: &SchemeRegistry,
    strictness: Strictness,
) -> Result<LoadedDataset, DatasetError> {
    if text.trim().is_empty() {
        return Err(DatasetError::NoRecords);
    }
    let doc: JsonDataset =
        serde_json::from_str(text).map_err(|e| DatasetError::Parse(e.to_string()))?;
    let rows = doc
        .records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            (
                i + 1,
                RawRow {
                    record_id: r.record_id.unwrap_or_default(),
                    scheme_id: r.scheme_id.unwrap_or_default(),
                    participant_id: r.participant_id.unwrap_or_default(),
                    observer_type: r.observer_type.unwrap_or_default(),
                    original: r.original.unwrap_or_default(),
                    guess: r.guess.unwrap_or_default(),
                    login_time: LoginField::Number(r.login_time_s),
                },
            )
        })
        .collect();
    validate(rows, Vec::new(), schemes, strictness)
}

fn validate(
    rows: Vec<(usize, RawRow)>,
    mut diagnostics: Vec<RowDiagnostic>,
    schemes: &SchemeRegistry,
    strictness: Strictness,
) -> Result<LoadedDataset, DatasetError> {
    let mut records = Vec::with_capacity(rows.len());
    let mut seen_pairs: HashSet<(String, String)> = HashSet::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (row, raw) in rows {
        match validate_row(row, raw, schemes) {
            Ok(rec) => {
                let pair = (rec.participant_id.clone(), rec.scheme_id.clone());
                if seen_pairs.contains(&pair) {
                    diagnostics.push(RowDiagnostic {
                        row,
                        column: "participant_id".into(),
                        reason: format!(
                            "participant {:?} already observed scheme {:?}",
                            pair.0, pair.1
                        ),
                    });
                } else if seen_ids.contains(&rec.record_id) {
                    diagnostics.push(RowDiagnostic {
                        row,
                        column: "record_id".into(),
                        reason: format!("duplicate record_id {:?}", rec.record_id),
                    });
                } else {
                    seen_pairs.insert(pair);
                    seen_ids.insert(rec.record_id.clone());
                    records.push(rec);
                }
            }
            Err(d) => diagnostics.push(d),
        }
    }
    diagnostics.sort_by_key(|d| d.row);
    match strictness {
        Strictness::Strict if !diagnostics.is_empty() => Err(DatasetError::Invalid(diagnostics)),
        _ => Ok(LoadedDataset {
            records,
            skipped: diagnostics,
        }),
    }
}

fn validate_row(
    row: usize,
    raw: RawRow,
    schemes: &SchemeRegistry,
) -> Result<ObservationRecord, RowDiagnostic> {
    let err = |column: &str, reason: String| RowDiagnostic {
        row,
        column: column.to_string(),
        reason,
    };
    if raw.participant_id.is_empty() {
        return Err(err("participant_id", "must be non-empty".into()));
    }
    let scheme = schemes
        .get(&raw.scheme_id)
        .ok_or_else(|| err("scheme_id", format!("unknown scheme {:?}", raw.scheme_id)))?;
    let observer_type = raw
        .observer_type
        .parse::<ObserverType>()
        .map_err(|e| err("observer_type", e))?;
    let original = scheme
        .decode(&raw.original)
        .map_err(|e| err("original", e.to_string()))?;
    if original.is_empty() {
        return Err(err("original", "original password is empty".into()));
    }
    scheme
        .decode(&raw.guess)
        .map_err(|e| err("guess", e.to_string()))?;
    let login_time_s = match raw.login_time {
        LoginField::Text(t) if t.trim().is_empty() => None,
        LoginField::Text(t) => Some(
            t.trim()
                .parse::<f64>()
                .map_err(|_| err("login_time_s", format!("not a number: {t:?}")))?,
        ),
        LoginField::Number(n) => n,
    };
    if let Some(t) = login_time_s {
        if !t.is_finite() || t < 0.0 {
            return Err(err(
                "login_time_s",
                format!("must be a non-negative number, got {t}"),
            ));
        }
    }
    let record_id = if raw.record_id.is_empty() {
        format!("row-{row}")
    } else {
        raw.record_id
    };
    Ok(ObservationRecord {
        record_id,
        scheme_id: raw.scheme_id,
        participant_id: raw.participant_id,
        observer_type,
        original: raw.original,
        guess: raw.guess,
        login_time_s,
    })
}

/// Writes records in the documented CSV layout.
pub fn write_csv<W: Write>(records: &[ObservationRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let login = r.login_time_s.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([
            r.record_id.as_str(),
            r.scheme_id.as_str(),
            r.participant_id.as_str(),
            r.observer_type.as_str(),
            r.original.as_str(),
            r.guess.as_str(),
            login.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Scheme,
    SchemeObserver,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupKey {
    pub scheme_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observer_type: Option<ObserverType>,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.observer_type {
            Some(o) => write!(f, "{}/{}", self.scheme_id, o),
            None => f.write_str(&self.scheme_id),
        }
    }
}

/// Stable partition of record indices. Groups are ordered by scheme id, then
/// active before passive; members keep input order.
pub fn group_records(records: &[ObservationRecord], key: GroupBy) -> Vec<(GroupKey, Vec<usize>)> {
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let k = GroupKey {
            scheme_id: r.scheme_id.clone(),
            observer_type: match key {
                GroupBy::Scheme => None,
                GroupBy::SchemeObserver => Some(r.observer_type),
            },
        };
        groups.entry(k).or_default().push(i);
    }
    groups.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "record_id,scheme_id,participant_id,observer_type,original,guess,login_time_s\n";

    fn reg() -> SchemeRegistry {
        SchemeRegistry::with_presets()
    }

    #[test]
    fn loads_valid_rows() {
        let csv = format!(
            "{HEADER}r1,textual,p1,active,Ab1!,Ab1,12.5\n\
             r2,gcps,p1,passive,W:N:f3 B:P:a1,W:N:f3,\n\
             r3,assoc-list,p2,active,#1 #2 #3,,30\n\
             ,textual,p3,passive,\"a,b\",\"a b\",4\n"
        );
        let d = parse_csv(&csv, &reg(), Strictness::Strict).unwrap();
        assert_eq!(d.records.len(), 4);
        assert!(d.skipped.is_empty());
        assert_eq!(d.records[1].login_time_s, None);
        assert_eq!(d.records[2].guess, "");
        assert_eq!(d.records[3].record_id, "row-4");
        assert_eq!(d.records[3].original, "a,b");
    }

    #[test]
    fn rejects_unknown_observer_type() {
        let csv = format!("{HEADER}r1,textual,p1,watcher,abc,abc,\n");
        match parse_csv(&csv, &reg(), Strictness::Strict) {
            Err(DatasetError::Invalid(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].row, 1);
                assert_eq!(d[0].column, "observer_type");
                assert!(d[0].reason.contains("watcher"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_bad_guess_token() {
        let csv = format!("{HEADER}r1,gcps,p1,active,W:N:f3,W:N:f3 W:Z:a1,\n");
        match parse_csv(&csv, &reg(), Strictness::Strict) {
            Err(DatasetError::Invalid(d)) => {
                assert_eq!(d[0].column, "guess");
                assert!(d[0].reason.contains("W:Z:a1"), "{}", d[0].reason);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strict_all_or_nothing_lenient_skips() {
        let csv = format!(
            "{HEADER}r1,textual,p1,active,abc,abc,\n\
             r2,textual,p1,passive,abc,ab,\n\
             r3,nope,p2,active,abc,abc,\n\
             r4,textual,p3,active,,abc,\n\
             r5,textual,p4,active,abc,abc,-1\n\
             r6,textual,p5,active,abc,abc,\n"
        );
        let err = parse_csv(&csv, &reg(), Strictness::Strict).unwrap_err();
        match err {
            DatasetError::Invalid(d) => {
                let cols: Vec<_> = d.iter().map(|x| (x.row, x.column.as_str())).collect();
                assert_eq!(
                    cols,
                    vec![
                        (2, "participant_id"),
                        (3, "scheme_id"),
                        (4, "original"),
                        (5, "login_time_s")
                    ]
                );
            }
            other => panic!("{other:?}"),
        }
        let d = parse_csv(&csv, &reg(), Strictness::Lenient).unwrap();
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.skipped.len(), 4);
    }

    #[test]
    fn header_must_match() {
        let csv = "id,scheme\n1,textual\n";
        assert!(matches!(
            parse_csv(csv, &reg(), Strictness::Strict),
            Err(DatasetError::Header { .. })
        ));
        assert!(matches!(
            parse_csv("", &reg(), Strictness::Strict),
            Err(DatasetError::NoRecords)
        ));
        let d = parse_csv(HEADER, &reg(), Strictness::Strict).unwrap();
        assert!(d.records.is_empty());
    }

    #[test]
    fn json_form() {
        let json = r##"{"records":[
            {"record_id":"a","scheme_id":"textual","participant_id":"p1","observer_type":"active","original":"xyz","guess":"xy","login_time_s":3.5},
            {"scheme_id":"assoc-list","participant_id":"p2","observer_type":"passive","original":"#1 #2"}
        ]}"##;
        let d = parse_json(json, &reg(), Strictness::Strict).unwrap();
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.records[1].record_id, "row-2");
        assert_eq!(d.records[1].guess, "");
        assert_eq!(d.records[0].login_time_s, Some(3.5));
    }

    #[test]
    fn csv_round_trip() {
        let csv = format!(
            "{HEADER}r1,textual,p1,active,\"Ab,1\"\"\",Ab,12.5\n\
             r2,gcps,p2,passive,W:N:f3,,\n"
        );
        let d = parse_csv(&csv, &reg(), Strictness::Strict).unwrap();
        let mut out = Vec::new();
        write_csv(&d.records, &mut out).unwrap();
        let again = parse_csv(
            std::str::from_utf8(&out).unwrap(),
            &reg(),
            Strictness::Strict,
        )
        .unwrap();
        assert_eq!(again.records, d.records);
    }

    fn rec(id: &str, scheme: &str, obs: ObserverType) -> ObservationRecord {
        ObservationRecord {
            record_id: id.into(),
            scheme_id: scheme.into(),
            participant_id: id.into(),
            observer_type: obs,
            original: "a".into(),
            guess: "a".into(),
            login_time_s: None,
        }
    }

    #[test]
    fn grouping_order_and_stability() {
        use ObserverType::*;
        let records = vec![
            rec("1", "textual", Passive),
            rec("2", "gcps", Active),
            rec("3", "textual", Active),
            rec("4", "gcps", Passive),
            rec("5", "textual", Passive),
        ];
        let g = group_records(&records, GroupBy::SchemeObserver);
        let keys: Vec<String> = g.iter().map(|(k, _)| k.to_string()).collect();
        assert_eq!(
            keys,
            vec![
                "gcps/active",
                "gcps/passive",
                "textual/active",
                "textual/passive"
            ]
        );
        assert_eq!(g[3].1, vec![0, 4]);
        let g = group_records(&records, GroupBy::Scheme);
        assert_eq!(g[1].1, vec![0, 2, 4]);
        assert!(group_records(&[], GroupBy::Scheme).is_empty());
    }
}
