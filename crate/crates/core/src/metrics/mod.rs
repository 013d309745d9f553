//! Outage probability, average bit-error rate and average channel capacity of
//! the dual-hop link, exact and high-SNR asymptotic, plus diversity orders.

mod asymptotic;
mod exact;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::e2e::{Protocol, RelayConfig};
use crate::error::{Error, Result};
use crate::report::{Evaluated, TermRecord};
use crate::rf_link::RfLinkFit;
use crate::uwoc::EggParams;

pub use crate::uwoc::ModulationParams;
pub use asymptotic::{
    aber_af_asymptotic, aber_df_asymptotic, af_outage_terms, op_af_asymptotic, op_df_asymptotic, PowerTerm,
};
pub use exact::{acc_af, acc_df, aber_af, aber_df, op_af, op_df, rf_aber, rf_acc, uwoc_acc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Asymptotic,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "asymptotic" | "asym" => Ok(Method::Asymptotic),
            "monte_carlo" | "mc" | "montecarlo" => Ok(Method::MonteCarlo),
            _ => Err(Error::InvalidParams(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Op,
    Aber,
    Acc,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Op => "op",
            Metric::Aber => "aber",
            Metric::Acc => "acc",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "op" | "outage" => Ok(Metric::Op),
            "aber" | "ber" => Ok(Metric::Aber),
            "acc" | "capacity" => Ok(Metric::Acc),
            _ => Err(Error::InvalidParams(format!("unknown metric {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub method: Method,
    pub diagnostics: Vec<TermRecord>,
    pub warnings: Vec<String>,
    /// Present exactly when `method` is Monte Carlo.
    pub mc_std_err: Option<f64>,
}

impl MetricResult {
    pub(crate) fn from_evaluated(e: Evaluated, method: Method) -> Self {
        Self {
            value: e.value,
            method,
            diagnostics: e.terms,
            warnings: e.warnings,
            mc_std_err: None,
        }
    }

    pub fn monte_carlo(value: f64, std_err: f64, warnings: Vec<String>) -> Self {
        Self {
            value,
            method: Method::MonteCarlo,
            diagnostics: Vec::new(),
            warnings,
            mc_std_err: Some(std_err),
        }
    }

    pub fn converged(&self) -> bool {
        self.diagnostics.iter().all(|t| t.converged)
    }
}

/// High-SNR slope magnitude of the outage probability.
///
/// AF: `min(m_w, k_w, 2/r, 2ac/r)`; DF: `min(m_w, k_w, 1/r, ac/r)`.
/// The optical candidates come from every mixture part, so the exponential
/// part contributes `1/r` (resp. `2/r`).
pub fn diversity_order(rf: &RfLinkFit, uw: &EggParams, protocol: Protocol) -> f64 {
    let hop = match protocol {
        Protocol::Af => 2.0,
        Protocol::Df => 1.0,
    };
    let rf_min = rf.shapes().into_iter().fold(f64::INFINITY, f64::min);
    uw.components()
        .iter()
        .map(|c| hop * c.exponent())
        .fold(rf_min, f64::min)
}

/// Everything needed to evaluate one metric at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub rf: RfLinkFit,
    pub uw: EggParams,
    pub relay: RelayConfig,
    pub gamma_th: f64,
    pub modulation: ModulationParams,
}

impl Scenario {
    pub fn evaluate(&self, metric: Metric, method: Method) -> Result<MetricResult> {
        let Scenario {
            rf,
            uw,
            relay,
            gamma_th,
            modulation,
        } = self;
        let af = relay.protocol == Protocol::Af;
        match (method, metric, af) {
            (Method::Exact, Metric::Op, true) => op_af(rf, uw, relay, *gamma_th),
            (Method::Exact, Metric::Op, false) => op_df(rf, uw, *gamma_th),
            (Method::Exact, Metric::Aber, true) => aber_af(rf, uw, relay, *modulation),
            (Method::Exact, Metric::Aber, false) => aber_df(rf, uw, *modulation),
            (Method::Exact, Metric::Acc, true) => acc_af(rf, uw, relay),
            (Method::Exact, Metric::Acc, false) => acc_df(rf, uw),
            (Method::Asymptotic, Metric::Op, true) => op_af_asymptotic(rf, uw, relay, *gamma_th),
            (Method::Asymptotic, Metric::Op, false) => op_df_asymptotic(rf, uw, *gamma_th),
            (Method::Asymptotic, Metric::Aber, true) => aber_af_asymptotic(rf, uw, relay, *modulation),
            (Method::Asymptotic, Metric::Aber, false) => aber_df_asymptotic(rf, uw, *modulation),
            (Method::Asymptotic, Metric::Acc, _) => Err(Error::InvalidParams(
                "no asymptotic capacity expression is available".into(),
            )),
            (Method::MonteCarlo, _, _) => Err(Error::InvalidParams(
                "Monte-Carlo estimates are produced by the mc module".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rf_link::{fit_kg, RfLinkParams};
    use crate::uwoc::{Detection, EggShape, TABLE};

    fn fit(k: f64, m: f64) -> RfLinkFit {
        let mut f = fit_kg(&RfLinkParams::new(2, 2.0, 1.0).unwrap()).unwrap();
        f.k_w = k;
        f.m_w = m;
        f
    }

    #[test]
    fn diversity_examples() {
        let shape = TABLE[0].shape;
        let hd = EggParams::new(shape, Detection::Hd, 1.0).unwrap();
        let im = EggParams::new(shape, Detection::Imdd, 1.0).unwrap();
        let rf = fit(3.1, 2.5);
        assert_eq!(diversity_order(&rf, &hd, Protocol::Af), 2.0);
        assert_eq!(diversity_order(&rf, &im, Protocol::Df), 0.5);
        for e in [&hd, &im] {
            assert!(diversity_order(&rf, e, Protocol::Df) <= diversity_order(&rf, e, Protocol::Af));
        }
        let thin = EggShape {
            omega: 0.2,
            lambda: 0.3,
            a: 0.4,
            b: 1.2,
            c: 1.5,
        };
        let e = EggParams::new(thin, Detection::Imdd, 1.0).unwrap();
        assert!((diversity_order(&rf, &e, Protocol::Df) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for m in [Metric::Op, Metric::Aber, Metric::Acc] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        for m in [Method::Exact, Method::Asymptotic, Method::MonteCarlo] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Metric>().is_err());
    }
}
