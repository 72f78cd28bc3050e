//! Ordinary least squares via Householder QR, with per-coefficient standard
//! errors and two-tailed t-test p-values.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Effect, ttest::two_tailed_p};
use crate::corpus::{Corpus, Pos};
use crate::error::{Error, Result};
use crate::scores::UeRecord;

/// Predictor columns (without the intercept).
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsSummary {
    pub n: usize,
    pub dof: usize,
    pub r_squared: f64,
    /// Intercept first, then the design columns in order.
    pub coefficients: Vec<Coefficient>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    /// Rows left out because they lacked a requested effect.
    #[serde(default)]
    pub dropped: usize,
}

impl OlsSummary {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

pub const INTERCEPT: &str = "intercept";

/// Fits `response = b0 + sum_j b_j * column_j`. A column (nearly) spanned by
/// the intercept and the columns before it is reported as collinear.
pub fn ols_regression(design: &Design, response: &[f64]) -> Result<OlsSummary> {
    let n = response.len();
    let k = design.columns.len() + 1;
    if design.names.len() != design.columns.len() {
        return Err(Error::domain("design has different numbers of names and columns"));
    }
    if let Some((name, _)) = design.names.iter().zip(&design.columns).find(|(_, c)| c.len() != n) {
        return Err(Error::domain(format!("design column {name} does not match the response length {n}")));
    }
    if n <= k {
        return Err(Error::domain(format!(
            "regression needs more observations ({n}) than coefficients ({k})"
        )));
    }
    if response.iter().chain(design.columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::domain("regression input contains a non-finite value"));
    }
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { design.columns[j - 1][i] });
    let y = DVector::from_column_slice(response);
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let col_norm = x.column(j).norm();
        if r[(j, j)].abs() <= 1e-10 * col_norm.max(f64::MIN_POSITIVE) {
            let name = if j == 0 { INTERCEPT } else { &design.names[j - 1] };
            let earlier: Vec<&str> = std::iter::once(INTERCEPT)
                .chain(design.names[..j.saturating_sub(1)].iter().map(String::as_str))
                .take(j)
                .collect();
            return Err(Error::domain(format!(
                "design is rank deficient: column {name} is collinear with {}",
                if earlier.is_empty() { "nothing (it is all zeros)".to_string() } else { earlier.join(", ") }
            )));
        }
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::domain("design is rank deficient"))?;
    let fitted = &x * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let dof = n - k;
    let sigma2 = sse / dof as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::domain("design is rank deficient"))?;
    let ybar = response.iter().sum::<f64>() / n as f64;
    let sst: f64 = response.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let coefficients = (0..k)
        .map(|j| {
            let var: f64 = r_inv.row(j).iter().map(|v| v * v).sum::<f64>() * sigma2;
            let se = var.sqrt();
            let b = beta[j];
            let (t, p) = if se > 0.0 {
                let t = b / se;
                (t, two_tailed_p(t, dof as f64))
            } else if b == 0.0 {
                (0.0, 1.0)
            } else {
                (b.signum() * f64::INFINITY, 0.0)
            };
            Coefficient {
                name: if j == 0 { INTERCEPT.into() } else { design.names[j - 1].clone() },
                beta: b,
                se,
                t,
                p,
            }
        })
        .collect();
    Ok(OlsSummary {
        n,
        dof,
        r_squared: if sst > 0.0 { 1.0 - sse / sst } else { 1.0 },
        coefficients,
        residuals,
        dropped: 0,
    })
}

/// Instance-level design over the given effects. POS becomes three dummies
/// (`POS=VERB`, `POS=ADJ`, `POS=ADV`; NOUN is the reference); numeric
/// effects enter raw. Rows missing any requested effect are dropped and
/// counted in the summary's `dropped` field by the caller.
pub fn regression_design(
    records: &[UeRecord],
    corpus: &Corpus,
    effects: &[Effect],
) -> Result<(Design, Vec<f64>, usize)> {
    let mut names = Vec::new();
    for e in effects {
        if *e == Effect::Pos {
            names.extend(["POS=VERB", "POS=ADJ", "POS=ADV"].map(String::from));
        } else {
            names.push(e.as_str().to_string());
        }
    }
    let mut columns = vec![Vec::new(); names.len()];
    let mut response = Vec::new();
    let mut missing: HashMap<Effect, usize> = HashMap::new();
    let mut dropped = 0;
    for r in records {
        let inst = corpus.instance(&r.instance_id).ok_or_else(|| {
            Error::domain(format!("record for unknown instance {}", r.instance_id))
        })?;
        let mut row = Vec::with_capacity(names.len());
        let mut complete = true;
        for &e in effects {
            if e == Effect::Pos {
                row.extend([Pos::Verb, Pos::Adj, Pos::Adv].map(|p| f64::from(u8::from(inst.pos == p))));
            } else if let Some(v) = e.value(&inst.meta) {
                row.push(v);
            } else {
                *missing.entry(e).or_default() += 1;
                complete = false;
            }
        }
        if !complete {
            dropped += 1;
            continue;
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
        response.push(r.value);
    }
    if response.is_empty() && !records.is_empty() {
        let mut fields: Vec<String> = missing.iter().map(|(e, c)| format!("{e} ({c} missing)")).collect();
        fields.sort();
        return Err(Error::domain(format!(
            "no instance carries every regression effect: {}",
            fields.join(", ")
        )));
    }
    Ok((Design { names, columns }, response, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(cols: &[(&str, Vec<f64>)]) -> Design {
        Design {
            names: cols.iter().map(|(n, _)| n.to_string()).collect(),
            columns: cols.iter().map(|(_, c)| c.clone()).collect(),
        }
    }

    #[test]
    fn exact_fit_recovers_coefficients() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 2.0 * v).collect();
        let s = ols_regression(&design(&[("x", x)]), &y).unwrap();
        assert!((s.coefficients[0].beta - 0.5).abs() < 1e-10);
        assert!((s.coefficients[1].beta - 2.0).abs() < 1e-10);
        assert!(s.residuals.iter().all(|e| e.abs() < 1e-10));
        assert!(s.coefficients[1].p < 1e-6);
        assert_eq!(s.coefficients[0].name, INTERCEPT);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let err = ols_regression(&design(&[("a", x.clone()), ("b", x)]), &y).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("column b") && m.contains("a")), "{err}");
        let constant = vec![3.0; 10];
        let err = ols_regression(&design(&[("c", constant)]), &y).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("column c")), "{err}");
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let x1: Vec<f64> = (0..30).map(|i| (i as f64 * 1.3).cos()).collect();
        let x2: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64).collect();
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.77).sin() + 0.1 * x2[i]).collect();
        let s = ols_regression(&design(&[("x1", x1.clone()), ("x2", x2.clone())]), &y).unwrap();
        for col in [vec![1.0; 30], x1, x2] {
            let dot: f64 = col.iter().zip(&s.residuals).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-8);
        }
        assert!(s.r_squared > 0.0 && s.r_squared < 1.0);
    }

    #[test]
    fn too_few_rows() {
        let err = ols_regression(&design(&[("x", vec![1.0, 2.0])]), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
