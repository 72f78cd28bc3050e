//! t-test and OLS results against frozen reference values (scipy / statsmodels).

use serde::Deserialize;
use wsd_ue::effects::{ols_regression, student_ttest, welch_ttest, Design};

#[derive(Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Case {
    Welch(TCase),
    Student(TCase),
    Ols(OlsCase),
}

#[derive(Deserialize)]
struct TCase {
    name: String,
    a: Vec<f64>,
    b: Vec<f64>,
    t: f64,
    dof: f64,
    p: f64,
}

#[derive(Deserialize)]
struct OlsCase {
    name: String,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
    beta: Vec<f64>,
    se: Vec<f64>,
    t: Vec<f64>,
    p: Vec<f64>,
}

const TOL: f64 = 1e-6;

fn fixture() -> Fixture {
    serde_json::from_str(include_str!("fixtures/stats_oracle.json")).unwrap()
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= TOL * want.abs().max(1.0)
}

#[test]
fn t_tests_match_reference() {
    for case in fixture().cases {
        let (c, r) = match &case {
            Case::Welch(c) => (c, welch_ttest(&c.a, &c.b).unwrap()),
            Case::Student(c) => (c, student_ttest(&c.a, &c.b).unwrap()),
            Case::Ols(_) => continue,
        };
        assert!(close(r.t, c.t), "{}: t {} vs {}", c.name, r.t, c.t);
        assert!(close(r.dof, c.dof), "{}: dof {} vs {}", c.name, r.dof, c.dof);
        assert!((r.p - c.p).abs() <= TOL, "{}: p {} vs {}", c.name, r.p, c.p);
        // tiny p-values should agree in relative terms too
        if c.p > 0.0 {
            assert!(((r.p - c.p) / c.p).abs() < 1e-6, "{}: p {:e} vs {:e}", c.name, r.p, c.p);
        }
    }
}

#[test]
fn ols_matches_reference() {
    for case in fixture().cases {
        let Case::Ols(c) = case else { continue };
        let design = Design { names: c.names.clone(), columns: c.columns.clone() };
        let s = ols_regression(&design, &c.response).unwrap();
        assert_eq!(s.coefficients.len(), c.beta.len(), "{}", c.name);
        for (j, coef) in s.coefficients.iter().enumerate() {
            assert!((coef.beta - c.beta[j]).abs() <= TOL, "{} beta[{j}]", c.name);
            assert!((coef.se - c.se[j]).abs() <= TOL, "{} se[{j}]", c.name);
            assert!((coef.p - c.p[j]).abs() <= TOL, "{} p[{j}] {} vs {}", c.name, coef.p, c.p[j]);
            if c.t[j].abs() < 1e6 {
                assert!(close(coef.t, c.t[j]), "{} t[{j}] {} vs {}", c.name, coef.t, c.t[j]);
            }
        }
        for (j, name) in c.names.iter().enumerate() {
            assert_eq!(&s.coefficients[j + 1].name, name);
        }
    }
}
