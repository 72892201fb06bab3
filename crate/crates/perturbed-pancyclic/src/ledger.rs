//! Concrete bounds standing in for asymptotic guarantees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How an exceeded bound is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// Overruns are recorded and the run continues.
    #[default]
    Experiment,
    /// Overruns abort the run.
    Strict,
}

/// How "choose any" selections are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Uniformly over the candidate list, from the run's generator.
    #[default]
    Random,
    /// First candidate in index order.
    LowestIndex,
}

/// One checked bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("bound {name} exceeded: {value} > {bound}")]
pub struct BoundExceeded {
    pub name: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub strictness: Strictness,
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn new(strictness: Strictness) -> Self {
        Ledger { strictness, entries: Vec::new() }
    }

    /// Records `value ≤ bound`; errors only in strict mode.
    pub fn check(&mut self, name: &str, value: f64, bound: f64) -> Result<(), BoundExceeded> {
        let ok = value <= bound;
        self.entries.push(LedgerEntry { name: name.to_string(), value, bound, ok });
        if !ok && self.strictness == Strictness::Strict {
            return Err(BoundExceeded { name: name.to_string(), value, bound });
        }
        Ok(())
    }

    pub fn flagged(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(|e| !e.ok)
    }

    pub fn is_clean(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }
}

/// `(ln n)²`.
pub fn log_sq(n: usize) -> f64 {
    (n.max(2) as f64).ln().powi(2)
}
