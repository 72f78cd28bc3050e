"""Regenerate crates/core/tests/fixtures/stats_oracle.json.

Reference values come from scipy.stats.ttest_ind and statsmodels OLS. The
Rust test suite compares against the frozen JSON; this script only needs to be
run again if cases are added.
"""
import json
import sys

import numpy as np
import statsmodels.api as sm
from scipy import stats


def ttest_case(name, a, b, equal_var):
    res = stats.ttest_ind(a, b, equal_var=equal_var)
    na, nb = len(a), len(b)
    va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
    if equal_var:
        dof = na + nb - 2
    else:
        sa, sb = va / na, vb / nb
        dof = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    return {
        "kind": "student" if equal_var else "welch",
        "name": name,
        "a": [float(x) for x in a],
        "b": [float(x) for x in b],
        "t": float(res.statistic),
        "dof": float(dof),
        "p": float(res.pvalue),
    }


def ols_case(name, columns, names, y):
    X = sm.add_constant(np.column_stack(columns))
    fit = sm.OLS(y, X).fit()
    return {
        "kind": "ols",
        "name": name,
        "names": names,
        "columns": [[float(v) for v in c] for c in columns],
        "response": [float(v) for v in y],
        "beta": [float(v) for v in fit.params],
        "se": [float(v) for v in fit.bse],
        "t": [float(v) for v in fit.tvalues],
        "p": [float(v) for v in fit.pvalues],
    }


def main(out):
    rng = np.random.default_rng(20230817)
    cases = []
    cases.append(ttest_case("hand_small", [0, 0, 1], [1, 1, 2], False))
    cases.append(ttest_case("unequal_sizes", rng.normal(0.12, 0.08, 30), rng.normal(0.22, 0.15, 12), False))
    cases.append(ttest_case("near_null", rng.normal(0.5, 0.1, 40), rng.normal(0.5, 0.1, 40), False))
    cases.append(ttest_case("large_gap", rng.normal(0.04, 0.03, 200), rng.normal(0.16, 0.06, 150), False))
    cases.append(ttest_case("tiny_samples", [0.1, 0.3], [0.2, 0.9, 0.4], False))
    cases.append(ttest_case("skewed", rng.exponential(0.1, 60), rng.exponential(0.14, 45), False))
    cases.append(ttest_case("very_unequal_var", rng.normal(1.0, 0.01, 25), rng.normal(1.2, 1.0, 8), False))
    cases.append(ttest_case("extreme_p", rng.normal(0.0, 0.05, 300), rng.normal(0.3, 0.05, 300), False))
    cases.append(ttest_case("negative_values", rng.normal(-2.0, 1.0, 15), rng.normal(-1.5, 0.5, 18), False))
    cases.append(ttest_case("student_equal", rng.normal(0.2, 0.1, 20), rng.normal(0.25, 0.1, 20), True))
    cases.append(ttest_case("student_unequal_n", rng.normal(0.13, 0.05, 11), rng.normal(0.11, 0.05, 27), True))
    cases.append(ttest_case("student_hand", [0, 0, 1], [1, 1, 2], True))

    n = 60
    x1 = rng.normal(0, 1, n)
    cases.append(ols_case("exact_line", [x1], ["x1"], 0.5 + 2.0 * x1))
    cases.append(ols_case("noisy_line", [x1], ["x1"], 0.1 + 0.3 * x1 + rng.normal(0, 0.5, n)))
    x2 = rng.uniform(1, 10, n)
    x3 = rng.integers(1, 6, n).astype(float)
    cases.append(ols_case("two_predictors", [x2, x3], ["nPD", "nMorph"], 0.02 * x2 - 0.01 * x3 + rng.normal(0, 0.05, n)))
    noise = rng.normal(0, 1, 80)
    z1, z2, z3 = rng.normal(0, 1, 80), rng.normal(0, 1, 80), rng.normal(0, 1, 80)
    cases.append(ols_case("pure_noise", [z1, z2, z3], ["z1", "z2", "z3"], noise))
    pos = rng.integers(0, 4, 120)
    verb, adj, adv = (pos == 1).astype(float), (pos == 2).astype(float), (pos == 3).astype(float)
    npd = rng.integers(1, 30, 120).astype(float)
    y = 0.1 + 0.08 * verb - 0.01 * adj - 0.03 * adv + 0.004 * npd + rng.normal(0, 0.05, 120)
    cases.append(ols_case("pos_dummies", [verb, adj, adv, npd], ["POS=VERB", "POS=ADJ", "POS=ADV", "nPD"], y))
    small_x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    cases.append(ols_case("small_hand", [small_x], ["x"], np.array([1.1, 1.9, 3.2, 3.9, 5.1])))
    w1, w2 = rng.normal(5, 2, 40), rng.normal(0, 3, 40)
    cases.append(ols_case("offset_scale", [w1, w2], ["w1", "w2"], 3.0 - 0.2 * w1 + 0.05 * w2 + rng.normal(0, 0.3, 40)))
    k = rng.integers(1, 44, 90).astype(float)
    s = rng.integers(1, 29, 90).astype(float)
    g = rng.integers(1, 3, 90).astype(float)
    cases.append(ols_case("effects_mix", [k, s, g], ["dHypo", "dSyno", "nGT"], 0.2 - 0.004 * k + 0.0 * s + 0.09 * g + rng.normal(0, 0.04, 90)))

    assert len(cases) == 20
    with open(out, "w") as f:
        json.dump({"generator": "scipy.stats.ttest_ind / statsmodels.OLS", "cases": cases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures/stats_oracle.json")
