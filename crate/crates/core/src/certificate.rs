//! Outcome records for grid-based numerical checks.
//!
//! A certificate is Lipschitz-margin numerics: a quantity is sampled on a grid,
//! a slack bounds how much it can change between grid points, and the check
//! passes when the worst sampled value still clears the slack.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// A point (in whatever coordinates the check uses) supporting the verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    #[serde(serialize_with = "finite_vec")]
    pub coords: Vec<f64>,
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
}

impl Witness {
    pub fn new(label: impl Into<String>, coords: Vec<f64>, value: f64) -> Self {
        Witness { label: label.into(), coords, value }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub check: String,
    pub status: Status,
    pub pass: bool,
    #[serde(serialize_with = "finite_or_null")]
    pub margin: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub slack: f64,
    pub grid: usize,
    pub witnesses: Vec<Witness>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub parts: Vec<Certificate>,
}

impl Certificate {
    pub fn new(check: impl Into<String>, status: Status, margin: f64, slack: f64, grid: usize) -> Self {
        Certificate {
            check: check.into(),
            status,
            pass: status == Status::Pass,
            margin,
            slack,
            grid,
            witnesses: Vec::new(),
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
            parts: Vec::new(),
        }
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn with_tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.pass = status == Status::Pass;
    }

    /// Combines sub-checks: FAIL if any part fails, else INCONCLUSIVE if any
    /// part is inconclusive, else PASS. The margin is the smallest part margin.
    pub fn combine(check: impl Into<String>, parts: Vec<Certificate>) -> Certificate {
        let status = if parts.iter().any(|p| p.status == Status::Fail) {
            Status::Fail
        } else if parts.iter().any(|p| p.status == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        let margin = parts.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
        let slack = parts.iter().map(|p| p.slack).fold(0.0, f64::max);
        let grid = parts.iter().map(|p| p.grid).max().unwrap_or(0);
        let mut c = Certificate::new(check, status, margin, slack, grid);
        c.witnesses = parts.iter().flat_map(|p| p.witnesses.iter().cloned()).collect();
        c.parts = parts;
        c
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn finite_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mapped: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
    mapped.serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_precedence() {
        let p = Certificate::new("a", Status::Pass, 2.0, 0.1, 8);
        let i = Certificate::new("b", Status::Inconclusive, 0.0, 0.1, 8);
        let f = Certificate::new("c", Status::Fail, -1.0, 0.1, 16);
        assert_eq!(Certificate::combine("x", vec![p.clone(), i.clone()]).status, Status::Inconclusive);
        let all = Certificate::combine("x", vec![p, i, f]);
        assert_eq!(all.status, Status::Fail);
        assert_eq!(all.margin, -1.0);
        assert_eq!(all.grid, 16);
    }

    #[test]
    fn infinite_margin_serializes_as_null() {
        let c = Certificate::new("a", Status::Pass, f64::INFINITY, 0.0, 0);
        let v = serde_json::to_value(&c).unwrap();
        assert!(v["margin"].is_null());
        assert_eq!(v["pass"], true);
    }
}
