//! Judging uncertainty scores by how well they rank errors.
//!
//! RCC is the discrete area under the risk-coverage curve: instances are
//! retained from most to least certain, the risk at each coverage level is the
//! mean loss of the retained set, and the scalar is the mean of those risks
//! (reported x100). RPP is the fraction of ordered pairs whose uncertainty
//! order contradicts their loss order (x100). Lower is better for both.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scores::{ScoreName, UeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCoveragePoint {
    pub k: usize,
    pub coverage: f64,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RccResult {
    /// Area under the curve, in percent.
    pub value: f64,
    pub curve: Vec<RiskCoveragePoint>,
}

fn common_score(records: &[UeRecord]) -> Result<ScoreName> {
    let first = records
        .first()
        .ok_or_else(|| Error::domain("metric over an empty record list"))?;
    if let Some(r) = records.iter().find(|r| r.score_name != first.score_name) {
        return Err(Error::domain(format!(
            "records mix score names {} and {}",
            first.score_name, r.score_name
        )));
    }
    if let Some(r) = records
        .iter()
        .find(|r| !r.value.is_finite() || !r.loss.is_finite())
    {
        return Err(Error::domain(format!(
            "instance {} has a non-finite value or loss",
            r.instance_id
        )));
    }
    Ok(first.score_name)
}

/// Risk-coverage curve and its normalised area. Ties in uncertainty are
/// ordered by instance id.
pub fn rcc(records: &[UeRecord]) -> Result<RccResult> {
    common_score(records)?;
    let mut order: Vec<&UeRecord> = records.iter().collect();
    order.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.instance_id.cmp(&b.instance_id))
    });
    let n = order.len();
    let mut cumulative = 0.0;
    let curve: Vec<RiskCoveragePoint> = order
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let k = i + 1;
            cumulative += r.loss;
            RiskCoveragePoint {
                k,
                coverage: k as f64 / n as f64,
                risk: cumulative / k as f64,
            }
        })
        .collect();
    let area = curve.iter().map(|p| p.risk).sum::<f64>() / n as f64;
    Ok(RccResult {
        value: 100.0 * area,
        curve,
    })
}

/// Number of ordered pairs `(i, j)` with `u_i < u_j` and `l_i > l_j`, in
/// `O(n log n)`.
pub fn reversed_pair_count(values: &[f64], losses: &[f64]) -> u64 {
    assert_eq!(values.len(), losses.len());
    let n = values.len();
    // dense ranks of the losses for the Fenwick tree
    let mut sorted_losses: Vec<f64> = losses.to_vec();
    sorted_losses.sort_by(f64::total_cmp);
    sorted_losses.dedup();
    let rank = |l: f64| {
        sorted_losses
            .binary_search_by(|x| x.total_cmp(&l))
            .expect("loss present")
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut tree = Fenwick::new(sorted_losses.len());
    let mut inserted = 0u64;
    let mut count = 0u64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]].total_cmp(&values[order[start]]) == Ordering::Equal {
            end += 1;
        }
        // all strictly smaller uncertainties are already in the tree
        for &j in &order[start..end] {
            let at_most = tree.prefix(rank(losses[j]) + 1);
            count += inserted - at_most;
        }
        for &j in &order[start..end] {
            tree.add(rank(losses[j]));
            inserted += 1;
        }
        start = end;
    }
    count
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, idx: usize) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over ranks `[0, len)`.
    fn prefix(&self, len: usize) -> u64 {
        let mut i = len;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Reversed pair proportion, in percent.
pub fn rpp(records: &[UeRecord]) -> Result<f64> {
    common_score(records)?;
    let values: Vec<f64> = records.iter().map(|r| r.value).collect();
    let losses: Vec<f64> = records.iter().map(|r| r.loss).collect();
    let n = records.len() as f64;
    Ok(100.0 * reversed_pair_count(&values, &losses) as f64 / (n * n))
}

/// Accuracy as F1 (every instance is attempted with a single prediction, so
/// precision, recall and accuracy coincide), in percent.
pub fn f1(records: &[UeRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::domain("F1 over an empty record list"));
    }
    if let Some(r) = records.iter().find(|r| r.loss != 0.0 && r.loss != 1.0) {
        return Err(Error::domain(format!(
            "F1 needs 0/1 losses; instance {} has loss {}",
            r.instance_id, r.loss
        )));
    }
    let wrong: f64 = records.iter().map(|r| r.loss).sum();
    Ok(100.0 * (1.0 - wrong / records.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub n: usize,
    pub f1: f64,
    pub ue_all: f64,
    /// Absent when the cohort has no correct predictions.
    pub ue_correct: Option<f64>,
    /// Absent when the cohort has no errors.
    pub ue_wrong: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortDelta {
    pub f1: f64,
    pub ue_all: f64,
    pub ue_correct: Option<f64>,
    pub ue_wrong: Option<f64>,
}

/// Side-by-side UE summary of two cohorts; deltas are `b - a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub score_name: ScoreName,
    pub a: CohortSummary,
    pub b: CohortSummary,
    pub delta: CohortDelta,
}

fn mean_of<'a>(it: impl Iterator<Item = &'a UeRecord>) -> Option<f64> {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), r| (s + r.value, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(records: &[UeRecord]) -> Result<CohortSummary> {
    Ok(CohortSummary {
        n: records.len(),
        f1: f1(records)?,
        ue_all: mean_of(records.iter()).expect("non-empty"),
        ue_correct: mean_of(records.iter().filter(|r| r.is_correct())),
        ue_wrong: mean_of(records.iter().filter(|r| !r.is_correct())),
    })
}

pub fn compare_cohorts(a: &[UeRecord], b: &[UeRecord]) -> Result<CohortReport> {
    let score_a = common_score(a)?;
    let score_b = common_score(b)?;
    if score_a != score_b {
        return Err(Error::domain(format!(
            "cohorts use different scores ({score_a} vs {score_b})"
        )));
    }
    let (sa, sb) = (summarize(a)?, summarize(b)?);
    let diff = |x: Option<f64>, y: Option<f64>| x.zip(y).map(|(x, y)| y - x);
    let delta = CohortDelta {
        f1: sb.f1 - sa.f1,
        ue_all: sb.ue_all - sa.ue_all,
        ue_correct: diff(sa.ue_correct, sb.ue_correct),
        ue_wrong: diff(sa.ue_wrong, sb.ue_wrong),
    };
    Ok(CohortReport {
        score_name: score_a,
        a: sa,
        b: sb,
        delta,
    })
}

/// One row of a dataset x score comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub dataset: String,
    pub score: ScoreName,
    pub rcc: f64,
    pub rpp: f64,
    pub f1: f64,
}

impl MetricsRow {
    pub fn compute(dataset: impl Into<String>, records: &[UeRecord]) -> Result<Self> {
        let score = common_score(records)?;
        Ok(MetricsRow {
            dataset: dataset.into(),
            score,
            rcc: rcc(records)?.value,
            rpp: rpp(records)?,
            f1: f1(records)?,
        })
    }

    pub const CSV_HEADER: &'static str = "dataset,score,RCC,RPP,F1";

    /// Two-decimal CSV rendering, e.g. `senseval2,SMP,5.78,9.14,71.20`.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:.2},{:.2},{:.2}",
            self.dataset, self.score, self.rcc, self.rpp, self.f1
        )
    }
}

/// Fixed-width text table of metric rows.
pub fn render_table(rows: &[MetricsRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.dataset.len())
        .chain(std::iter::once("dataset".len()))
        .max()
        .unwrap_or(7);
    let mut out = format!(
        "{:<width$}  {:<5}  {:>7}  {:>7}  {:>7}\n",
        "dataset", "score", "RCC", "RPP", "F1"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:<5}  {:>7.2}  {:>7.2}  {:>7.2}\n",
            r.dataset,
            r.score.as_str(),
            r.rcc,
            r.rpp,
            r.f1
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn recs(values: &[f64], losses: &[f64]) -> Vec<UeRecord> {
        values
            .iter()
            .zip(losses)
            .enumerate()
            .map(|(i, (&v, &l))| UeRecord {
                instance_id: format!("i{i:03}"),
                score_name: ScoreName::Smp,
                value: v,
                predicted: "s".into(),
                loss: l,
            })
            .collect()
    }

    #[test]
    fn rcc_examples() {
        assert_eq!(rcc(&recs(&[0.3, 0.1, 0.2], &[0.0; 3])).unwrap().value, 0.0);
        let r = rcc(&recs(&[0.1, 0.2, 0.3, 0.4], &[0.0, 0.0, 1.0, 1.0])).unwrap();
        let risks: Vec<f64> = r.curve.iter().map(|p| p.risk).collect();
        assert_eq!(risks, vec![0.0, 0.0, 1.0 / 3.0, 0.5]);
        assert_abs_diff_eq!(r.value, 100.0 * (5.0 / 6.0) / 4.0, epsilon = 1e-12);
        let r = rcc(&recs(&[0.4, 0.3, 0.2, 0.1], &[0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(r.value, 100.0 * (1.0 + 1.0 + 2.0 / 3.0 + 0.5) / 4.0, epsilon = 1e-12);
        assert_eq!(r.curve.last().unwrap().coverage, 1.0);
    }

    #[test]
    fn rcc_ties_ordered_by_instance_id() {
        // same value: i000 (loss 1) retained before i001 (loss 0)
        let r = rcc(&recs(&[0.5, 0.5], &[1.0, 0.0])).unwrap();
        assert_eq!(r.curve[0].risk, 1.0);
    }

    #[test]
    fn rpp_examples() {
        assert_eq!(rpp(&recs(&[0.1, 0.5, 0.9], &[0.0, 0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(rpp(&recs(&[0.1, 0.9], &[1.0, 0.0])).unwrap(), 25.0);
        assert_eq!(rpp(&recs(&[0.9, 0.1, 0.4], &[1.0, 1.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn rpp_ignores_tied_uncertainty() {
        assert_eq!(reversed_pair_count(&[0.5, 0.5], &[1.0, 0.0]), 0);
        assert_eq!(reversed_pair_count(&[0.1, 0.5, 0.5], &[1.0, 0.0, 0.0]), 2);
    }

    #[test]
    fn empty_and_mixed_inputs_are_domain_errors() {
        assert!(matches!(rcc(&[]), Err(Error::Domain(_))));
        assert!(matches!(rpp(&[]), Err(Error::Domain(_))));
        assert!(matches!(f1(&[]), Err(Error::Domain(_))));
        let mut r = recs(&[0.1, 0.2], &[0.0, 1.0]);
        r[1].score_name = ScoreName::Mp;
        assert!(matches!(rcc(&r), Err(Error::Domain(_))));
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1(&recs(&[0.1; 4], &[0.0; 4])).unwrap(), 100.0);
        assert_eq!(f1(&recs(&[0.1; 4], &[0.0, 0.0, 1.0, 0.0])).unwrap(), 75.0);
        assert_eq!(f1(&recs(&[0.1; 4], &[1.0; 4])).unwrap(), 0.0);
        assert!(f1(&recs(&[0.1], &[0.3])).is_err());
    }

    #[test]
    fn identical_cohorts_have_zero_deltas() {
        let a = recs(&[0.1, 0.4, 0.2], &[0.0, 1.0, 0.0]);
        let rep = compare_cohorts(&a, &a).unwrap();
        assert_eq!(rep.delta.f1, 0.0);
        assert_eq!(rep.delta.ue_all, 0.0);
        assert_eq!(rep.delta.ue_wrong, Some(0.0));
        assert_eq!(rep.delta.ue_correct, Some(0.0));
    }

    #[test]
    fn error_free_cohort_reports_absent_wrong_mean() {
        let a = recs(&[0.1, 0.2], &[0.0, 0.0]);
        let b = recs(&[0.3, 0.6], &[0.0, 1.0]);
        let rep = compare_cohorts(&a, &b).unwrap();
        assert_eq!(rep.a.ue_wrong, None);
        assert_eq!(rep.delta.ue_wrong, None);
        assert_abs_diff_eq!(rep.b.ue_wrong.unwrap(), 0.6);
        assert_abs_diff_eq!(rep.delta.ue_all, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn table_rendering() {
        let row = MetricsRow {
            dataset: "senseval2".into(),
            score: ScoreName::Smp,
            rcc: 5.78,
            rpp: 9.14,
            f1: 71.2,
        };
        assert_eq!(row.csv_line(), "senseval2,SMP,5.78,9.14,71.20");
        let all = MetricsRow {
            dataset: "ALL".into(),
            score: ScoreName::Smp,
            rcc: 6.11,
            rpp: 9.44,
            f1: 70.0,
        };
        assert!(all.csv_line().starts_with("ALL,SMP,6.11,9.44,"));
        let table = render_table(&[row, all]);
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().nth(1).unwrap().contains("5.78"));
    }

    #[test]
    fn single_instance_row_is_valid() {
        let row = MetricsRow::compute("tiny", &recs(&[0.2], &[1.0])).unwrap();
        assert_eq!((row.rcc, row.rpp, row.f1), (100.0, 0.0, 0.0));
    }
}
