use serde::{Deserialize, Serialize};

use super::{SweepPlan, SweepRecord};
use crate::error::{Error, Result};

/// Plan plus full records, unitaries included. Written next to the CSV so a
/// sweep can be inspected or resumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArtifact {
    pub plans: Vec<SweepPlan>,
    pub records: Vec<Vec<SweepRecord>>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    realization: usize,
    index: usize,
    label: f64,
    h: f64,
    j_min: f64,
    j_max: f64,
    f_min: f64,
    g: f64,
    endpoint: bool,
    distance_to_prev: Option<f64>,
    distance_to_next: Option<f64>,
    iters: usize,
    converged: bool,
    stop: &'a str,
    seed: u64,
}

/// One CSV row per record (no comment header).
pub fn records_csv(realizations: &[Vec<SweepRecord>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidParameter(e.to_string());
    for (r, recs) in realizations.iter().enumerate() {
        for rec in recs {
            let js = rec.model.couplings();
            let stop = serde_json::to_value(rec.stop)?;
            w.serialize(CsvRow {
                realization: r,
                index: rec.index,
                label: rec.label,
                h: rec.model.h,
                j_min: js.iter().copied().fold(f64::INFINITY, f64::min),
                j_max: js.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                f_min: rec.f_min,
                g: rec.g,
                endpoint: rec.endpoint,
                distance_to_prev: rec.distance_to_prev,
                distance_to_next: rec.distance_to_next,
                iters: rec.iters,
                converged: rec.converged,
                stop: stop.as_str().unwrap_or_default(),
                seed: rec.seed,
            })
            .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Operators as `{dim, data}` with row-major interleaved (re, im).
pub(crate) mod unitary {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::opspace::{from_interleaved, to_interleaved, Operator};

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        dim: usize,
        data: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(op: &Operator, s: S) -> Result<S::Ok, S::Error> {
        Raw { dim: op.nrows(), data: to_interleaved(op) }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Operator, D::Error> {
        let raw = Raw::deserialize(d)?;
        from_interleaved(raw.dim, &raw.data).map_err(serde::de::Error::custom)
    }
}
