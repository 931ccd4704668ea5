//! Structured audit records, one per algorithm action.
//!
//! Serialized as one JSON object per line with keys in the fixed order
//! `iter, kind, pair, firm, old, new, m, r`; absent fields are omitted.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Initial salary of a pair.
    Init,
    /// A pair in the allocation after a matching round, with its salary and
    /// the firm payoff `r`.
    Match,
    /// A favourite pair left out of the allocation.
    Reject,
    SalaryCut,
    /// The cut would have left the salary range; the pair is clamped and
    /// becomes firm-unacceptable.
    #[serde(rename = "prune_L")]
    PruneL,
    /// The worker no longer accepts the pair at its new salary.
    #[serde(rename = "prune_W0")]
    PruneW0,
    Terminate,
}

/// Salaries are integers and payoffs reals; keeping them apart keeps the
/// printed form stable (`4` versus `4.0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Real(v) => v,
        }
    }

    pub fn as_i64(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iter: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub firm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl TraceEvent {
    pub fn new(iter: u64, kind: EventKind) -> Self {
        TraceEvent {
            iter,
            kind,
            pair: None,
            firm: None,
            old: None,
            new: None,
            m: None,
            r: None,
        }
    }

    pub fn pair(mut self, worker: &str, firm: &str) -> Self {
        self.pair = Some((worker.to_string(), firm.to_string()));
        self
    }

    pub fn old(mut self, v: i64) -> Self {
        self.old = Some(Value::Int(v));
        self
    }

    pub fn new_salary(mut self, v: i64) -> Self {
        self.new = Some(Value::Int(v));
        self
    }

    pub fn m(mut self, m: i64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace event serializes")
    }
}

pub fn write_jsonl<W: Write>(mut out: W, events: &[TraceEvent]) -> io::Result<()> {
    for e in events {
        writeln!(out, "{}", e.to_json_line())?;
    }
    out.flush()
}

pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Vec<TraceEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        events.push(event);
    }
    Ok(events)
}
