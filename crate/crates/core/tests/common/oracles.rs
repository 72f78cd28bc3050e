//! Literal, loop-by-loop reimplementations used as independent references.
//! Deliberately naive: no shared helpers with the library.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

const FLOOR: f64 = 1e-12;

pub fn mp(row: &[f64]) -> f64 {
    let mut best = row[0];
    for &p in row {
        if p > best {
            best = p;
        }
    }
    1.0 - best
}

pub fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let t = rows.len();
    let m = rows[0].len();
    let mut out = vec![0.0; m];
    for j in 0..m {
        let mut s = 0.0;
        for row in rows {
            s += row[j];
        }
        out[j] = s / t as f64;
    }
    out
}

pub fn smp(rows: &[Vec<f64>]) -> f64 {
    mp(&mean_rows(rows))
}

pub fn pv(rows: &[Vec<f64>]) -> f64 {
    let t = rows.len() as f64;
    let m = rows[0].len();
    let mean = mean_rows(rows);
    let mut total = 0.0;
    for j in 0..m {
        let mut var = 0.0;
        for row in rows {
            var += (row[j] - mean[j]) * (row[j] - mean[j]);
        }
        total += var / t;
    }
    total / m as f64
}

fn entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * x.max(FLOOR).ln();
        }
    }
    h
}

pub fn bald(rows: &[Vec<f64>]) -> f64 {
    let mean = mean_rows(rows);
    let mut mean_h = 0.0;
    for row in rows {
        mean_h += entropy(row);
    }
    mean_h /= rows.len() as f64;
    entropy(&mean) - mean_h
}

/// Retain in ascending (value, id) order; average the running risks.
pub fn rcc(values: &[f64], losses: &[f64], ids: &[String]) -> f64 {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(ids[a].cmp(&ids[b])));
    let mut area = 0.0;
    for k in 1..=n {
        let mut s = 0.0;
        for &i in &idx[..k] {
            s += losses[i];
        }
        area += s / k as f64;
    }
    100.0 * area / n as f64
}

pub fn reversed_pairs(values: &[f64], losses: &[f64]) -> u64 {
    let mut c = 0;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if values[i] < values[j] && losses[i] > losses[j] {
                c += 1;
            }
        }
    }
    c
}

pub fn window(w: usize, i: usize, l: Option<usize>) -> BTreeSet<usize> {
    (0..w)
        .filter(|&j| match l {
            None => true,
            Some(l) => j.abs_diff(i) <= l,
        })
        .collect()
}

/// Tokens within `h` undirected hops of `i`; `heads[k]` is the head of token k.
pub fn hops(heads: &[Option<usize>], i: usize, h: Option<usize>) -> BTreeSet<usize> {
    let n = heads.len();
    let mut dist = vec![usize::MAX; n];
    dist[i] = 0;
    let mut queue = VecDeque::from([i]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            let linked = heads[v] == Some(u) || heads[u] == Some(v);
            if linked && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (0..n)
        .filter(|&v| dist[v] != usize::MAX && h.is_none_or(|h| dist[v] <= h))
        .collect()
}

/// Fisher-Pearson g1.
pub fn skewness(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}
