use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Corpus, PredictiveSamples};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MMismatch {
    pub instance_id: String,
    /// Candidate count in the corpus.
    pub expected: usize,
    /// Column count in the sample matrix.
    pub found: usize,
}

/// Differences between a corpus and a set of predictive samples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub missing_samples: Vec<String>,
    pub orphan_samples: Vec<String>,
    pub m_mismatches: Vec<MMismatch>,
    /// Samples whose declared candidate list differs from the corpus order.
    pub order_mismatches: Vec<String>,
}

impl AlignmentReport {
    pub fn is_clean(&self) -> bool {
        self.missing_samples.is_empty()
            && self.orphan_samples.is_empty()
            && self.m_mismatches.is_empty()
            && self.order_mismatches.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "{} instances without samples, {} samples without instances, {} candidate-count mismatches, {} candidate-order mismatches",
            self.missing_samples.len(),
            self.orphan_samples.len(),
            self.m_mismatches.len(),
            self.order_mismatches.len()
        )
    }

    /// Instance ids that can be scored despite a dirty report.
    pub(crate) fn bad_ids(&self) -> HashSet<&str> {
        self.m_mismatches
            .iter()
            .map(|m| m.instance_id.as_str())
            .chain(self.order_mismatches.iter().map(String::as_str))
            .collect()
    }
}

pub fn validate_alignment(corpus: &Corpus, samples: &[PredictiveSamples]) -> AlignmentReport {
    let by_id: HashMap<&str, &PredictiveSamples> =
        samples.iter().map(|s| (s.instance_id.as_str(), s)).collect();
    let mut report = AlignmentReport::default();
    for inst in corpus.instances() {
        let Some(s) = by_id.get(inst.instance_id.as_str()) else {
            report.missing_samples.push(inst.instance_id.clone());
            continue;
        };
        if s.matrix.classes() != inst.candidates.len() {
            report.m_mismatches.push(MMismatch {
                instance_id: inst.instance_id.clone(),
                expected: inst.candidates.len(),
                found: s.matrix.classes(),
            });
        } else if s.candidates.as_ref().is_some_and(|c| *c != inst.candidates) {
            report.order_mismatches.push(inst.instance_id.clone());
        }
    }
    report.orphan_samples = samples
        .iter()
        .filter(|s| corpus.instance(&s.instance_id).is_none())
        .map(|s| s.instance_id.clone())
        .collect();
    report.missing_samples.sort();
    report.orphan_samples.sort();
    report.m_mismatches.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    report.order_mismatches.sort();
    report
}
