//! Per-record scoring: the fourteen-metric vector, partial-guess group
//! weighting and the three composite cluster scores.

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dataset::ObservationRecord;
use crate::guess_order::{
    entropy_drop_score, pool_guess_score, position_guess_score, GuessOrderError, RankVariant,
};
use crate::metrics::{self, MetricError, MetricId};
use crate::scheme::{DecodeError, PasswordSeq, Scheme};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("{0}")]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Decode(#[from] DecodeError),
    #[error("record uses scheme `{found}` but was scored with `{expected}`")]
    SchemeMismatch { expected: String, found: String },
    #[error("{metric} is not computed per match group")]
    NotAdjustable { metric: MetricId },
}

impl From<GuessOrderError> for ScoreError {
    fn from(e: GuessOrderError) -> Self {
        match e {
            GuessOrderError::Metric(m) => ScoreError::Metric(m),
            GuessOrderError::Decode(d) => ScoreError::Decode(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Weight proportional to `log2(group size)`.
    #[default]
    Log2,
    /// Weight proportional to group size.
    Linear,
}

impl std::str::FromStr for Weighting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log2" => Ok(Weighting::Log2),
            "linear" => Ok(Weighting::Linear),
            other => Err(format!(
                "unknown weighting `{other}` (expected log2 or linear)"
            )),
        }
    }
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::Log2 => "log2",
            Weighting::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScoringConfig {
    /// Compute characteristics and distance metrics per match group.
    pub adjusted: bool,
    pub weighting: Weighting,
    pub rank_variant: RankVariant,
    pub ngram_n: usize,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            adjusted: true,
            weighting: Weighting::Log2,
            rank_variant: RankVariant::Log,
            ngram_n: 2,
        }
    }
}

/// Per match-group weights, in match-group order, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupWeights(pub Vec<(String, f64)>);

impl GroupWeights {
    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|(_, w)| *w).collect()
    }
}

pub fn group_weights(scheme: &Scheme, weighting: Weighting) -> GroupWeights {
    let raw: Vec<f64> = scheme
        .match_groups()
        .iter()
        .map(|g| match weighting {
            Weighting::Log2 => (g.size as f64).log2(),
            Weighting::Linear => g.size as f64,
        })
        .collect();
    let total: f64 = raw.iter().sum();
    GroupWeights(
        scheme
            .match_groups()
            .iter()
            .zip(raw)
            .map(|(g, w)| (g.name.clone(), w / total))
            .collect(),
    )
}

fn plain_metric(metric: MetricId, o: &[u32], g: &[u32], ngram_n: usize) -> Result<f64, ScoreError> {
    if metric == MetricId::D5 {
        return Ok(metrics::ngram_dice(o, g, ngram_n)?);
    }
    match metric.evaluate(o, g) {
        Some(r) => Ok(r?),
        None => Err(ScoreError::NotAdjustable { metric }),
    }
}

/// Weighted sum of a characteristics/distance metric evaluated on each
/// match-group projection.
pub fn adjusted_metric(
    metric: MetricId,
    o: &PasswordSeq,
    g: &PasswordSeq,
    scheme: &Scheme,
    weights: &GroupWeights,
    ngram_n: usize,
) -> Result<f64, ScoreError> {
    if !metric.group_adjustable() {
        return Err(ScoreError::NotAdjustable { metric });
    }
    let mut total = 0.0;
    for (gi, (_, w)) in weights.0.iter().enumerate() {
        let po = scheme.project_index(o, gi);
        let pg = scheme.project_index(g, gi);
        total += w * plain_metric(metric, &po, &pg, ngram_n)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// The fourteen individual metric values of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricVector {
    values: [f64; 14],
    pub adjusted: bool,
}

impl MetricVector {
    pub fn new(values: [f64; 14], adjusted: bool) -> Self {
        Self { values, adjusted }
    }

    pub fn get(&self, id: MetricId) -> f64 {
        self.values[id.index()]
    }

    pub fn values(&self) -> &[f64; 14] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (MetricId, f64)> + '_ {
        MetricId::ALL.iter().map(move |&id| (id, self.get(id)))
    }

    pub fn clusters(&self) -> ClusterScores {
        let pick = |ids: &[MetricId]| -> Vec<f64> { ids.iter().map(|&m| self.get(m)).collect() };
        ClusterScores::from_components(
            pick(&MetricId::CHARACTERISTICS).try_into().unwrap(),
            pick(&MetricId::DISTANCE).try_into().unwrap(),
            pick(&MetricId::GUESSING).try_into().unwrap(),
        )
    }
}

impl Serialize for MetricVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(15))?;
        for (id, v) in self.iter() {
            map.serialize_entry(id.code(), &v)?;
        }
        map.serialize_entry("adjusted", &self.adjusted)?;
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterScores {
    pub characteristics: f64,
    pub distance: f64,
    /// Complementary: higher means more resistant.
    pub guessing_order: f64,
}

impl ClusterScores {
    /// Composite means. Dif-in-guess is complemented before entering the
    /// characteristics mean; the guessing cluster is averaged as-is.
    pub fn from_components(c: [f64; 5], d: [f64; 5], g: [f64; 3]) -> Self {
        let characteristics = (c[0] + c[1] + c[2] + c[3] + (1.0 - c[4])) / 5.0;
        let distance = d.iter().sum::<f64>() / 5.0;
        let guessing_order = g.iter().sum::<f64>() / 3.0;
        Self {
            characteristics,
            distance,
            guessing_order,
        }
    }
}

/// Scores a decoded (original, guess) pair.
pub fn score_pair(
    o: &PasswordSeq,
    g: &PasswordSeq,
    scheme: &Scheme,
    config: &ScoringConfig,
) -> Result<(MetricVector, ClusterScores), ScoreError> {
    for seq in [o, g] {
        if seq.scheme_id != scheme.id {
            return Err(ScoreError::SchemeMismatch {
                expected: scheme.id.clone(),
                found: seq.scheme_id.clone(),
            });
        }
    }
    if o.is_empty() {
        return Err(MetricError::EmptyOriginal.into());
    }
    let adjusted = config.adjusted && scheme.match_groups().len() > 1;
    let weights = group_weights(scheme, config.weighting);
    let (oi, gi) = (o.ids(), g.ids());

    let mut values = [0.0; 14];
    for id in MetricId::ALL {
        let v = match id {
            MetricId::L1 => metrics::length_dif(&oi, &gi)?,
            MetricId::G1 => pool_guess_score(o, g, scheme, config.rank_variant)?,
            MetricId::G2 => position_guess_score(o, g, scheme, config.rank_variant)?,
            MetricId::G3 => entropy_drop_score(o, g, scheme)?,
            m if adjusted => adjusted_metric(m, o, g, scheme, &weights, config.ngram_n)?,
            m => plain_metric(m, &oi, &gi, config.ngram_n)?,
        };
        values[id.index()] = v;
    }
    let vector = MetricVector::new(values, adjusted);
    let clusters = vector.clusters();
    Ok((vector, clusters))
}

pub fn score_wires(
    original: &str,
    guess: &str,
    scheme: &Scheme,
    config: &ScoringConfig,
) -> Result<(MetricVector, ClusterScores), ScoreError> {
    let o = scheme.decode(original)?;
    let g = scheme.decode(guess)?;
    score_pair(&o, &g, scheme, config)
}

pub fn score_record(
    record: &ObservationRecord,
    scheme: &Scheme,
    config: &ScoringConfig,
) -> Result<(MetricVector, ClusterScores), ScoreError> {
    if record.scheme_id != scheme.id {
        return Err(ScoreError::SchemeMismatch {
            expected: scheme.id.clone(),
            found: record.scheme_id.clone(),
        });
    }
    score_wires(&record.original, &record.guess, scheme, config)
}
