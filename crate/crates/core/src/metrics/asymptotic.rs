use serde::{Deserialize, Serialize};

use crate::e2e::RelayConfig;
use crate::error::Result;
use crate::report::{Evaluated, TermRecord};
use crate::rf_link::{ln_gamma_sum, separate_shapes, RfLinkFit, DEGENERACY_GAP};
use crate::specfn::ln_gamma_real;
use crate::uwoc::{Component, EggParams};

use super::{Method, MetricResult, ModulationParams};

/// One summand `sign · exp(ln_coef) · γ^exponent` of a high-SNR expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub label: String,
    pub sign: f64,
    pub ln_coef: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn value(&self, gamma: f64) -> f64 {
        self.sign * (self.ln_coef + self.exponent * gamma.ln()).exp()
    }

    /// The matching error-rate term: `∫ q^p/(2Γ(p)) x^{p-1} e^{-qx} · term(x) dx`.
    pub fn averaged(&self, modulation: ModulationParams) -> f64 {
        let ModulationParams { p, q } = modulation;
        let e = self.exponent;
        let ln = lg(p + e).0 - lg(p).0 - e * q.ln() - std::f64::consts::LN_2;
        self.sign * (self.ln_coef + ln).exp()
    }
}

fn lg(x: f64) -> (f64, f64) {
    ln_gamma_real(x).unwrap_or((f64::NAN, 1.0))
}

fn near_pole(x: f64) -> bool {
    x < DEGENERACY_GAP && (x - x.round()).abs() < DEGENERACY_GAP
}

/// Shapes after the perturbation policy: pairwise integer gaps and optical
/// pole coincidences are moved off by `DEGENERACY_GAP`.
fn regularised_shapes(rf: &RfLinkFit, comps: &[Component], warnings: &mut Vec<String>) -> Vec<f64> {
    let mut shapes = rf.shapes();
    for _ in 0..16 {
        let (sep, w) = separate_shapes(&shapes);
        shapes = sep;
        warnings.extend(w);
        let mut moved = false;
        for j in 0..shapes.len() {
            for c in comps {
                let e = shapes[j];
                let a1 = e - c.exponent();
                let a2 = c.alpha - c.rho * e;
                if near_pole(a1) || near_pole(a2) {
                    shapes[j] += DEGENERACY_GAP;
                    warnings.push(format!(
                        "singular gamma argument ({a1:.6}, {a2:.6}) for shape {e} and the {} part; shape perturbed by {DEGENERACY_GAP}",
                        c.label
                    ));
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    shapes
}

fn rf_leading(shapes: &[f64], beta: f64) -> PowerTerm {
    let j = (0..shapes.len())
        .min_by(|&a, &b| shapes[a].total_cmp(&shapes[b]))
        .unwrap_or(0);
    let e = shapes[j];
    let mut ln = -ln_gamma_sum(shapes) - e.ln() + e * beta.ln();
    let mut sign = 1.0;
    for (i, &ei) in shapes.iter().enumerate() {
        if i != j {
            let (l, s) = lg(ei - e);
            ln += l;
            sign *= s;
        }
    }
    PowerTerm {
        label: "rf".into(),
        sign,
        ln_coef: ln,
        exponent: e,
    }
}

/// High-SNR expansion of the AF outage probability in powers of `γ_th`:
/// the leading RF term, then per optical part one term with the optical
/// exponent and one per RF shape.
pub fn af_outage_terms(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig) -> Result<(Vec<PowerTerm>, Vec<String>)> {
    let c = relay.gain()?;
    let comps = uw.components();
    let mut warnings = Vec::new();
    let shapes = regularised_shapes(rf, &comps, &mut warnings);
    let beta = rf.beta();
    let lsum = ln_gamma_sum(&shapes);
    let mut terms = vec![rf_leading(&shapes, beta)];
    for comp in &comps {
        let ln_z = (c * beta / comp.theta).ln();
        let ln_w = comp.pdf_weight.ln();
        let x = comp.exponent();
        let mut ln = ln_w - comp.alpha.ln() - lsum + x * ln_z;
        let mut sign = 1.0;
        for &e in &shapes {
            let (l, s) = lg(e - x);
            ln += l;
            sign *= s;
        }
        terms.push(PowerTerm {
            label: format!("{}_optical", comp.label),
            sign,
            ln_coef: ln,
            exponent: x,
        });
        for (j, &ej) in shapes.iter().enumerate() {
            let (l, mut sign) = lg(comp.alpha - comp.rho * ej);
            let mut ln = ln_w + l - lsum - ej.ln() + ej * ln_z;
            for (i, &ei) in shapes.iter().enumerate() {
                if i != j {
                    let (l, s) = lg(ei - ej);
                    ln += l;
                    sign *= s;
                }
            }
            terms.push(PowerTerm {
                label: format!("{}_rf{j}", comp.label),
                sign,
                ln_coef: ln,
                exponent: ej,
            });
        }
    }
    Ok((terms, warnings))
}

fn df_outage_terms(rf: &RfLinkFit, uw: &EggParams) -> (Vec<PowerTerm>, Vec<String>) {
    let (shapes, w) = separate_shapes(&rf.shapes());
    let mut terms = vec![rf_leading(&shapes, rf.beta())];
    for comp in uw.components() {
        let x = comp.exponent();
        terms.push(PowerTerm {
            label: format!("{}_optical", comp.label),
            sign: 1.0,
            ln_coef: comp.pdf_weight.ln() - comp.alpha.ln() - x * comp.theta.ln(),
            exponent: x,
        });
    }
    (terms, w.into_iter().collect())
}

fn assemble(terms: Vec<PowerTerm>, warnings: Vec<String>, f: impl Fn(&PowerTerm) -> f64, kind: &str) -> MetricResult {
    let mut out = Evaluated::default();
    for t in &terms {
        let v = f(t);
        out.value += v;
        out.terms.push(TermRecord::closed_form(&format!("{kind}_{}", t.label), v));
    }
    for w in warnings {
        out.warn(w);
    }
    MetricResult::from_evaluated(out, Method::Asymptotic)
}

pub fn op_af_asymptotic(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig, gamma_th: f64) -> Result<MetricResult> {
    let (terms, w) = af_outage_terms(rf, uw, relay)?;
    Ok(assemble(terms, w, |t| t.value(gamma_th), "op_af"))
}

pub fn aber_af_asymptotic(
    rf: &RfLinkFit,
    uw: &EggParams,
    relay: &RelayConfig,
    modulation: ModulationParams,
) -> Result<MetricResult> {
    let (terms, w) = af_outage_terms(rf, uw, relay)?;
    Ok(assemble(terms, w, |t| t.averaged(modulation), "aber_af"))
}

pub fn op_df_asymptotic(rf: &RfLinkFit, uw: &EggParams, gamma_th: f64) -> Result<MetricResult> {
    let (terms, w) = df_outage_terms(rf, uw);
    Ok(assemble(terms, w, |t| t.value(gamma_th), "op_df"))
}

pub fn aber_df_asymptotic(rf: &RfLinkFit, uw: &EggParams, modulation: ModulationParams) -> Result<MetricResult> {
    let (terms, w) = df_outage_terms(rf, uw);
    Ok(assemble(terms, w, |t| t.averaged(modulation), "aber_df"))
}
