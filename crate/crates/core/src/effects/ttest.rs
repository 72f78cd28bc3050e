//! Two-sample t-tests (Welch by default, Student on request) and pairwise
//! significance matrices.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Pairs with `p > ALPHA` are flagged not significant.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `n_a + n_b - 2` degrees of freedom.
    Student,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub kind: TTestKind,
    pub t: f64,
    pub dof: f64,
    /// Two-tailed.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Two-tailed p-value of `t` under a t distribution with `dof` degrees of
/// freedom: `I_{dof/(dof+t^2)}(dof/2, 1/2)`.
pub(crate) fn two_tailed_p(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    beta_reg(dof / 2.0, 0.5, dof / (dof + t * t)).clamp(0.0, 1.0)
}

pub fn ttest(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest> {
    for (name, s) in [("first", a), ("second", b)] {
        if s.len() < 2 {
            return Err(Error::domain(format!(
                "t-test needs at least 2 values per sample; {name} sample has {}",
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("{name} t-test sample has a non-finite value")));
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (se2, dof) = match kind {
        TTestKind::Welch => {
            let (sa, sb) = (va / na, vb / nb);
            let se2 = sa + sb;
            (se2, se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0)))
        }
        TTestKind::Student => {
            let dof = na + nb - 2.0;
            let se2 = if a.len() == b.len() {
                va / na + vb / nb
            } else {
                ((na - 1.0) * va + (nb - 1.0) * vb) / dof * (1.0 / na + 1.0 / nb)
            };
            (se2, dof)
        }
    };
    if se2 == 0.0 {
        let dof = na + nb - 2.0;
        return Ok(if ma == mb {
            TTest { kind, t: 0.0, dof, p: 1.0 }
        } else {
            let t = if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY };
            TTest { kind, t, dof, p: 0.0 }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    Ok(TTest { kind, t, dof, p: two_tailed_p(t, dof) })
}

pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    ttest(a, b, TTestKind::Welch)
}

pub fn student_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    ttest(a, b, TTestKind::Student)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCell {
    pub t: f64,
    pub p: f64,
    pub significant: bool,
}

/// Full `k x k` matrix of pairwise tests; the diagonal is empty and
/// `cells[j][i]` mirrors `cells[i][j]` with `t` negated.
pub fn pairwise_significance(levels: &[Vec<f64>], kind: TTestKind) -> Result<Vec<Vec<Option<PairCell>>>> {
    if levels.len() < 2 {
        return Err(Error::domain(format!(
            "pairwise significance needs at least 2 levels, got {}",
            levels.len()
        )));
    }
    let k = levels.len();
    let mut cells = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = ttest(&levels[i], &levels[j], kind)?;
            let significant = r.p <= ALPHA;
            cells[i][j] = Some(PairCell { t: r.t, p: r.p, significant });
            cells[j][i] = Some(PairCell { t: -r.t, p: r.p, significant });
        }
    }
    Ok(cells)
}
