use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// Allowed deviation of a probability row's sum from 1.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// T x M row-major matrix of per-pass class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    passes: usize,
    classes: usize,
    data: Vec<f64>,
}

impl ProbMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let passes = rows.len();
        let classes = rows.first().map_or(0, Vec::len);
        if passes == 0 || classes == 0 {
            return Err(Error::Schema("probability matrix must be non-empty".into()));
        }
        if let Some(t) = rows.iter().position(|r| r.len() != classes) {
            return Err(Error::Schema(format!(
                "ragged matrix: row {t} has {} columns, row 0 has {classes}",
                rows[t].len()
            )));
        }
        Self::from_flat(passes, classes, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(passes: usize, classes: usize, data: Vec<f64>) -> Result<Self> {
        if passes == 0 || classes == 0 || data.len() != passes * classes {
            return Err(Error::Schema(format!(
                "matrix shape {passes}x{classes} does not match {} entries",
                data.len()
            )));
        }
        for (t, row) in data.chunks_exact(classes).enumerate() {
            check_simplex(row).map_err(|msg| Error::Validation(format!("row {t}: {msg}")))?;
        }
        Ok(ProbMatrix {
            passes,
            classes,
            data,
        })
    }

    /// Number of stochastic passes (T).
    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Number of candidate classes (M).
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.classes..(t + 1) * self.classes]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.classes)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Same matrix with its columns reordered: column `k` of the result is
    /// column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.classes {
            return Err(Error::domain("permutation length differs from column count"));
        }
        let data = self
            .rows()
            .flat_map(|row| perm.iter().map(move |&k| row[k]))
            .collect();
        Self::from_flat(self.passes, self.classes, data)
    }
}

/// Returns a message describing the first simplex violation, if any.
pub(crate) fn check_simplex(row: &[f64]) -> std::result::Result<(), String> {
    if row.is_empty() {
        return Err("empty probability vector".into());
    }
    if let Some((k, p)) = row
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0)
    {
        return Err(format!("entry {k} = {p} outside [0, 1]"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(format!("row sums to {sum}, expected 1 within {SIMPLEX_TOLERANCE}"));
    }
    Ok(())
}

/// Monte-Carlo predictive samples for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSamples {
    pub instance_id: String,
    pub matrix: ProbMatrix,
    /// Optional dropout-off forward pass, used as the MP source when present.
    pub deterministic: Option<Vec<f64>>,
    pub provenance: String,
    /// Optional copy of the candidate order the exporter used.
    pub candidates: Option<Vec<String>>,
}

impl PredictiveSamples {
    pub fn new(instance_id: impl Into<String>, matrix: ProbMatrix) -> Self {
        PredictiveSamples {
            instance_id: instance_id.into(),
            matrix,
            deterministic: None,
            provenance: String::new(),
            candidates: None,
        }
    }

    pub fn with_deterministic(mut self, row: Vec<f64>) -> Result<Self> {
        if row.len() != self.matrix.classes() {
            return Err(Error::Schema(format!(
                "instance {}: deterministic row has {} entries, matrix has {} columns",
                self.instance_id,
                row.len(),
                self.matrix.classes()
            )));
        }
        check_simplex(&row).map_err(|msg| {
            Error::Validation(format!(
                "instance {}: deterministic row: {msg}",
                self.instance_id
            ))
        })?;
        self.deterministic = Some(row);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<String>,
    instance_id: String,
    matrix: Vec<Vec<f64>>,
    provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deterministic: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidates: Option<Vec<String>>,
}

pub fn load_samples(path: &Path) -> Result<Vec<PredictiveSamples>> {
    read_samples(jsonl::open(path)?, path)
}

/// Reads a samples JSONL stream, enforcing a constant T and unique ids.
pub fn read_samples(reader: impl BufRead, label: &Path) -> Result<Vec<PredictiveSamples>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut passes: Option<(usize, String)> = None;
    for item in jsonl::lines::<SampleLine>(reader, label) {
        let (line_no, line) = item?;
        jsonl::check_version(line.schema_version.as_deref(), label, line_no)?;
        let id = line.instance_id;
        let located = |e: Error| match e {
            Error::Schema(m) => Error::Schema(format!("{}:{line_no}: instance {id}: {m}", label.display())),
            Error::Validation(m) => {
                Error::Validation(format!("{}:{line_no}: instance {id}: {m}", label.display()))
            }
            other => other,
        };
        let matrix = ProbMatrix::new(line.matrix).map_err(located)?;
        match &passes {
            None => passes = Some((matrix.passes(), id.clone())),
            Some((t, first)) if *t != matrix.passes() => {
                return Err(Error::Schema(format!(
                    "{}:{line_no}: instance {id} has T={} but instance {first} has T={t}; T must be constant",
                    label.display(),
                    matrix.passes()
                )))
            }
            _ => {}
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Schema(format!(
                "{}:{line_no}: duplicate instance_id {id}",
                label.display()
            )));
        }
        if let Some(c) = &line.candidates {
            if c.len() != matrix.classes() {
                return Err(Error::Schema(format!(
                    "{}:{line_no}: instance {id}: {} candidates listed for {} columns",
                    label.display(),
                    c.len(),
                    matrix.classes()
                )));
            }
        }
        let mut s = PredictiveSamples::new(id, matrix).with_provenance(line.provenance);
        s.candidates = line.candidates;
        if let Some(row) = line.deterministic {
            s = s.with_deterministic(row).map_err(|e| match e {
                Error::Schema(m) | Error::Validation(m) => {
                    Error::Validation(format!("{}:{line_no}: {m}", label.display()))
                }
                other => other,
            })?;
        }
        out.push(s);
    }
    Ok(out)
}

pub fn write_samples(out: &mut impl Write, samples: &[PredictiveSamples]) -> std::io::Result<()> {
    for s in samples {
        let line = SampleLine {
            schema_version: None,
            instance_id: s.instance_id.clone(),
            matrix: s.matrix.to_rows(),
            provenance: s.provenance.clone(),
            deterministic: s.deterministic.clone(),
            candidates: s.candidates.clone(),
        };
        jsonl::write_line(out, &line)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Vec<PredictiveSamples>> {
        read_samples(text.as_bytes(), Path::new("samples.jsonl"))
    }

    #[test]
    fn single_row_matrix() {
        let s = read(r#"{"instance_id":"a","matrix":[[0.5,0.5]],"provenance":"test"}"#).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].matrix.passes(), s[0].matrix.classes()), (1, 2));
        assert_eq!(s[0].provenance, "test");
    }

    #[test]
    fn row_sum_violation_names_instance_and_row() {
        let err = read(r#"{"instance_id":"a","matrix":[[0.5,0.5],[1.0,0.5]],"provenance":""}"#)
            .unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation(_)));
        assert!(msg.contains("instance a") && msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn inconsistent_pass_count_is_schema_error() {
        let row = "[0.5,0.5]";
        let m20 = vec![row; 20].join(",");
        let m19 = vec![row; 19].join(",");
        let text = format!(
            "{{\"instance_id\":\"a\",\"matrix\":[{m20}],\"provenance\":\"\"}}\n{{\"instance_id\":\"b\",\"matrix\":[{m19}],\"provenance\":\"\"}}\n"
        );
        assert!(matches!(read(&text).unwrap_err(), Error::Schema(_)));
    }

    #[test]
    fn ragged_and_duplicate_are_schema_errors() {
        let ragged = r#"{"instance_id":"a","matrix":[[0.5,0.5],[1.0]],"provenance":""}"#;
        assert!(matches!(read(ragged).unwrap_err(), Error::Schema(_)));
        let dup = "{\"instance_id\":\"a\",\"matrix\":[[1.0]],\"provenance\":\"\"}\n".repeat(2);
        assert!(matches!(read(&dup).unwrap_err(), Error::Schema(_)));
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = read("{\"instance_id\":\"a\",\"matrix\":[[1.0]],\"provenance\":\"\"}\n{oops\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn deterministic_row_is_validated() {
        let bad = r#"{"instance_id":"a","matrix":[[0.5,0.5]],"provenance":"","deterministic":[0.9,0.9]}"#;
        assert!(read(bad).is_err());
        let ok = r#"{"instance_id":"a","matrix":[[0.5,0.5]],"provenance":"","deterministic":[0.9,0.1]}"#;
        assert_eq!(read(ok).unwrap()[0].deterministic.as_deref(), Some(&[0.9, 0.1][..]));
    }

    #[test]
    fn write_then_read_is_identity() {
        let m = ProbMatrix::new(vec![vec![0.25, 0.75], vec![0.1, 0.9]]).unwrap();
        let s = PredictiveSamples::new("x", m)
            .with_deterministic(vec![0.0, 1.0])
            .unwrap()
            .with_provenance("sim");
        let mut buf = Vec::new();
        write_samples(&mut buf, std::slice::from_ref(&s)).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, vec![s]);
    }
}
