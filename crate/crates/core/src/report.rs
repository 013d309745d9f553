use serde::{Deserialize, Serialize};

use crate::specfn::MbValue;

/// Convergence record of one summand of a closed-form expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub term: String,
    pub value: f64,
    pub converged: bool,
    pub error_estimate: f64,
    pub imag: f64,
    pub evaluations: usize,
}

impl TermRecord {
    pub fn from_mb(term: &str, weight: f64, v: &MbValue) -> Self {
        Self {
            term: term.to_string(),
            value: weight * v.value,
            converged: v.converged,
            error_estimate: weight.abs() * v.error_estimate,
            imag: weight * v.imag,
            evaluations: v.evaluations,
        }
    }

    pub fn closed_form(term: &str, value: f64) -> Self {
        Self {
            term: term.to_string(),
            value,
            converged: true,
            error_estimate: 0.0,
            imag: 0.0,
            evaluations: 0,
        }
    }
}

/// A value assembled from several terms, with their records and any warnings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: f64,
    pub terms: Vec<TermRecord>,
    pub warnings: Vec<String>,
}

impl Evaluated {
    pub fn single(value: f64, term: TermRecord) -> Self {
        Self {
            value,
            terms: vec![term],
            warnings: Vec::new(),
        }
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn absorb(&mut self, other: Evaluated) {
        self.terms.extend(other.terms);
        self.warnings.extend(other.warnings);
    }
}
