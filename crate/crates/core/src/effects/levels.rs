//! Level boundaries: `(a,b]`, `[a,b]`, `(a,b)`, `[a,b)`, a point `1`, or a
//! ray `>1`, `>=1`, `<1`, `<=1`. Categorical levels are POS tags.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Pos;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
    label: String,
}

impl Interval {
    pub fn new(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Result<Self> {
        let label = if lo == hi {
            format!("{lo}")
        } else if hi == f64::INFINITY {
            format!(">{}{lo}", if lo_closed { "=" } else { "" })
        } else if lo == f64::NEG_INFINITY {
            format!("<{}{hi}", if hi_closed { "=" } else { "" })
        } else {
            format!(
                "{}{lo},{hi}{}",
                if lo_closed { '[' } else { '(' },
                if hi_closed { ']' } else { ')' }
            )
        };
        Self::labelled(lo, lo_closed, hi, hi_closed, label)
    }

    fn labelled(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool, label: String) -> Result<Self> {
        let nonempty = lo < hi || (lo == hi && lo_closed && hi_closed);
        if lo.is_nan() || hi.is_nan() || !nonempty {
            return Err(Error::domain(format!("empty or invalid interval `{label}`")));
        }
        Ok(Interval { lo, lo_closed, hi, hi_closed, label })
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_closed { v >= self.lo } else { v > self.lo };
        let below = if self.hi_closed { v <= self.hi } else { v < self.hi };
        above && below
    }

    /// True when `self` lies entirely below `next` with no shared point.
    fn precedes(&self, next: &Interval) -> bool {
        self.hi < next.lo || (self.hi == next.lo && !(self.hi_closed && next.lo_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn number(s: &str, whole: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| Error::domain(format!("bad number `{s}` in interval `{whole}`"))),
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        let label = s.to_string();
        for (prefix, closed, upper) in [(">=", true, false), ("<=", true, true), (">", false, false), ("<", false, true)] {
            if let Some(rest) = s.strip_prefix(prefix) {
                let v = number(rest, s)?;
                return if upper {
                    Self::labelled(f64::NEG_INFINITY, false, v, closed, label)
                } else {
                    Self::labelled(v, closed, f64::INFINITY, false, label)
                };
            }
        }
        let lo_closed = match s.chars().next() {
            Some('[') => Some(true),
            Some('(') => Some(false),
            _ => None,
        };
        let Some(lo_closed) = lo_closed else {
            let v = number(s, s)?;
            return Self::labelled(v, true, v, true, label);
        };
        let hi_closed = match s.chars().last() {
            Some(']') if s.len() > 1 => true,
            Some(')') if s.len() > 1 => false,
            _ => return Err(Error::domain(format!("interval `{s}` is missing its closing bracket"))),
        };
        let inner = &s[1..s.len() - 1];
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::domain(format!("interval `{s}` needs two bounds")))?;
        Self::labelled(number(a, s)?, lo_closed, number(b, s)?, hi_closed, label)
    }
}

impl From<Interval> for String {
    fn from(i: Interval) -> String {
        i.label
    }
}

impl TryFrom<String> for Interval {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Level {
    Range(Interval),
    Category(Pos),
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Range(i) => i.fmt(f),
            Level::Category(p) => p.fmt(f),
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(pos) = s.trim().parse::<Pos>() {
            return Ok(Level::Category(pos));
        }
        s.parse().map(Level::Range)
    }
}

impl From<Level> for String {
    fn from(l: Level) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for Level {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// An ordered list of levels: disjoint, increasing intervals, or distinct
/// POS categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Level>", into = "Vec<Level>")]
pub struct LevelBounds {
    levels: Vec<Level>,
}

impl LevelBounds {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("no levels given"));
        }
        let ranges: Vec<&Interval> = levels
            .iter()
            .filter_map(|l| match l {
                Level::Range(i) => Some(i),
                Level::Category(_) => None,
            })
            .collect();
        if !ranges.is_empty() && ranges.len() != levels.len() {
            return Err(Error::domain("levels mix intervals and POS categories"));
        }
        for pair in ranges.windows(2) {
            if !pair[0].precedes(pair[1]) {
                return Err(Error::domain(format!(
                    "levels {} and {} overlap or are out of order",
                    pair[0], pair[1]
                )));
            }
        }
        if ranges.is_empty() {
            let mut seen = Vec::new();
            for l in &levels {
                if seen.contains(l) {
                    return Err(Error::domain(format!("level {l} listed twice")));
                }
                seen.push(l.clone());
            }
        }
        Ok(LevelBounds { levels })
    }

    pub fn parse_list(items: &[&str]) -> Result<Self> {
        Self::new(items.iter().map(|s| s.parse()).collect::<Result<_>>()?)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.levels[0], Level::Category(_))
    }

    /// Index of the interval containing `v`.
    pub fn assign(&self, v: f64) -> Option<usize> {
        self.levels.iter().position(|l| matches!(l, Level::Range(i) if i.contains(v)))
    }

    pub fn assign_pos(&self, pos: Pos) -> Option<usize> {
        self.levels.iter().position(|l| *l == Level::Category(pos))
    }
}

impl TryFrom<Vec<Level>> for LevelBounds {
    type Error = Error;

    fn try_from(levels: Vec<Level>) -> Result<Self> {
        LevelBounds::new(levels)
    }
}

impl From<LevelBounds> for Vec<Level> {
    fn from(b: LevelBounds) -> Vec<Level> {
        b.levels
    }
}

/// Level index per value. Values outside every level are reported together.
pub fn bin_levels(values: &[f64], bounds: &LevelBounds) -> Result<Vec<usize>> {
    if bounds.is_categorical() {
        return Err(Error::domain("numeric values cannot be binned into POS levels"));
    }
    let assigned: Vec<Option<usize>> = values.iter().map(|&v| bounds.assign(v)).collect();
    let offenders: Vec<String> = values
        .iter()
        .zip(&assigned)
        .filter(|(_, a)| a.is_none())
        .map(|(v, _)| v.to_string())
        .collect();
    if !offenders.is_empty() {
        let shown: Vec<&str> = offenders.iter().take(10).map(String::as_str).collect();
        let levels: Vec<String> = bounds.levels.iter().map(Level::to_string).collect();
        return Err(Error::domain(format!(
            "{} value(s) outside levels {}: {}{}",
            offenders.len(),
            levels.join(" "),
            shown.join(", "),
            if offenders.len() > shown.len() { ", ..." } else { "" }
        )));
    }
    Ok(assigned.into_iter().map(|a| a.expect("checked")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(items: &[&str]) -> LevelBounds {
        LevelBounds::parse_list(items).unwrap()
    }

    #[test]
    fn interval_forms() {
        let i: Interval = "(0,2]".parse().unwrap();
        assert!(!i.contains(0.0) && i.contains(2.0) && i.contains(1e-9));
        let i: Interval = "[2,2]".parse().unwrap();
        assert!(i.contains(2.0) && !i.contains(2.0001));
        let i: Interval = "(0,2)".parse().unwrap();
        assert!(!i.contains(2.0));
        let i: Interval = ">1".parse().unwrap();
        assert!(!i.contains(1.0) && i.contains(1.5) && i.contains(1e300));
        let i: Interval = "1".parse().unwrap();
        assert!(i.contains(1.0) && !i.contains(2.0));
        assert_eq!(i.to_string(), "1");
        assert_eq!("(1.30,2]".parse::<Interval>().unwrap().to_string(), "(1.30,2]");
        assert_eq!(Interval::new(2.0, false, 6.0, true).unwrap().to_string(), "(2,6]");
        for bad in ["(2,1]", "(2,2]", "[a,b]", "(1,2", "(1]", ""] {
            assert!(bad.parse::<Interval>().is_err(), "{bad}");
        }
    }

    #[test]
    fn n_pd_levels() {
        let b = bounds(&["(0,2]", "(2,6]", "(6,50]"]);
        assert_eq!(bin_levels(&[2.0, 3.0, 50.0], &b).unwrap(), vec![0, 1, 2]);
        let err = bin_levels(&[51.0, 1.0, 0.0], &b).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("51") && m.contains("2 value")), "{err}");
    }

    #[test]
    fn fractional_n_morph_levels() {
        let b = bounds(&["(0,1.67]", "(1.67,2]", "(2,9]"]);
        assert_eq!(bin_levels(&[1.5, 1.67, 1.7, 2.0, 2.5], &b).unwrap(), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn point_and_open_levels() {
        let b = bounds(&["(0,2)", "[2,2]", "(2,6]"]);
        assert_eq!(bin_levels(&[1.0, 2.0, 3.0], &b).unwrap(), vec![0, 1, 2]);
        let b = bounds(&["1", ">1"]);
        assert_eq!(bin_levels(&[1.0, 2.0, 7.0], &b).unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn overlapping_or_unordered_levels_are_rejected() {
        assert!(LevelBounds::parse_list(&["(0,2]", "[2,2]"]).is_err());
        assert!(LevelBounds::parse_list(&["(2,6]", "(0,2]"]).is_err());
        assert!(LevelBounds::parse_list(&["NOUN", "(0,2]"]).is_err());
        assert!(LevelBounds::parse_list(&["NOUN", "NOUN"]).is_err());
        assert!(LevelBounds::parse_list(&[]).is_err());
    }

    #[test]
    fn categorical_levels() {
        let b = bounds(&["NOUN", "VERB", "ADJ", "ADV"]);
        assert!(b.is_categorical());
        assert_eq!(b.assign_pos(Pos::Adj), Some(2));
        assert!(bin_levels(&[1.0], &b).is_err());
    }
}
