use std::f64::consts::LN_2;

use crate::e2e::{af_cdf, af_cdf_coeffs, clamp_probability, df_cdf, RelayConfig};
use crate::error::{term, Error, Result};
use crate::report::{Evaluated, TermRecord};
use crate::rf_link::{cdf_coeffs, ln_gamma_sum, RfLinkFit};
use crate::specfn::{fox_h, fox_h_bivariate, gamma_real, GammaTerm, HCoeffs, JointGammaTerm};
use crate::uwoc::{uwoc_aber, EggParams};

use super::{Method, MetricResult, ModulationParams};

fn check_threshold(gamma_th: f64) -> Result<()> {
    if gamma_th > 0.0 && gamma_th.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("threshold must be positive, got {gamma_th}")))
    }
}

/// `ln(1 + z) = (1/2πi) ∫ Γ(1+u) Γ(-u)² / Γ(1-u) z^{-u} du`, `-1 < Re u < 0`.
fn log1p_kernel() -> Vec<GammaTerm> {
    vec![
        GammaTerm::num(1.0, 1.0),
        GammaTerm::num(0.0, -1.0),
        GammaTerm::num(0.0, -1.0),
        GammaTerm::den(1.0, -1.0),
    ]
}

pub fn op_af(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig, gamma_th: f64) -> Result<MetricResult> {
    check_threshold(gamma_th)?;
    Ok(MetricResult::from_evaluated(af_cdf(rf, uw, relay, gamma_th)?, Method::Exact))
}

pub fn op_df(rf: &RfLinkFit, uw: &EggParams, gamma_th: f64) -> Result<MetricResult> {
    check_threshold(gamma_th)?;
    Ok(MetricResult::from_evaluated(df_cdf(rf, uw, gamma_th)?, Method::Exact))
}

/// Average BER of the RF hop alone.
pub fn rf_aber(rf: &RfLinkFit, modulation: ModulationParams) -> Result<Evaluated> {
    let ModulationParams { p, q } = modulation;
    let shapes = rf.shapes();
    let mut h = cdf_coeffs(&shapes);
    h.s_terms.push(GammaTerm::num(p, -1.0));
    let v = term("aber_rf", fox_h(&h, rf.beta() / q))?;
    let w = (-ln_gamma_sum(&shapes)).exp() / (2.0 * gamma_real(p)?);
    Ok(Evaluated::single(w * v.value, TermRecord::from_mb("aber_rf", w, &v)))
}

pub fn aber_af(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig, modulation: ModulationParams) -> Result<MetricResult> {
    let c = relay.gain()?;
    let ModulationParams { p, q } = modulation;
    let shapes = rf.shapes();
    let beta = rf.beta();
    let a1 = beta * (-ln_gamma_sum(&shapes)).exp();
    let mut out = rf_aber(rf, modulation)?;
    let gp = gamma_real(p)?;
    for comp in uw.components() {
        let name = format!("aber_af_{}", comp.label);
        let mut h = af_cdf_coeffs(&shapes, &comp);
        h.t_terms.push(GammaTerm::num(p + 1.0, -1.0));
        let v = term(&name, fox_h_bivariate(&h, c / comp.theta, beta / q))?;
        let w = comp.cdf_weight() * a1 / (2.0 * gp * q);
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    let out = clamp_probability(out, "AF ABER")?;
    Ok(MetricResult::from_evaluated(out, Method::Exact))
}

pub fn aber_df(rf: &RfLinkFit, uw: &EggParams, modulation: ModulationParams) -> Result<MetricResult> {
    let p1 = rf_aber(rf, modulation)?;
    let p2 = uwoc_aber(uw, modulation)?;
    let mut out = Evaluated {
        value: p1.value + p2.value - 2.0 * p1.value * p2.value,
        ..Evaluated::default()
    };
    out.absorb(p1);
    out.absorb(p2);
    let out = clamp_probability(out, "DF ABER")?;
    Ok(MetricResult::from_evaluated(out, Method::Exact))
}

/// `(1/2) E[log2(1 + τγ_1)]` of the RF hop alone (bits per channel use).
pub fn rf_acc(rf: &RfLinkFit, tau: f64) -> Result<Evaluated> {
    let shapes = rf.shapes();
    let mut terms = log1p_kernel();
    terms.extend(shapes.iter().map(|&e| GammaTerm::num(e, -1.0)));
    let v = term("acc_rf", fox_h(&HCoeffs::univariate(terms), tau / rf.beta()))?;
    let w = (-ln_gamma_sum(&shapes)).exp() / (2.0 * LN_2);
    Ok(Evaluated::single(w * v.value, TermRecord::from_mb("acc_rf", w, &v)))
}

/// `(1/2) E[log2(1 + τγ_2)]` of the optical hop alone.
pub fn uwoc_acc(uw: &EggParams) -> Result<Evaluated> {
    let tau = uw.detection.tau();
    let mut out = Evaluated::default();
    for comp in uw.components() {
        let name = format!("acc_uwoc_{}", comp.label);
        let mut terms = log1p_kernel();
        terms.push(GammaTerm::num(comp.alpha, -comp.rho));
        let v = term(&name, fox_h(&HCoeffs::univariate(terms), tau * comp.theta))?;
        let w = comp.pdf_weight / (2.0 * LN_2);
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    Ok(out)
}

fn check_capacity(mut e: Evaluated, context: &str) -> Result<Evaluated> {
    if e.value >= 0.0 {
        return Ok(e);
    }
    let scale: f64 = e.terms.iter().map(|t| t.value.abs()).sum();
    if e.value >= -1e-6 * scale.max(1e-300) {
        let v = e.value;
        e.value = 0.0;
        e.warn(format!("{context}: value {v:e} clamped to 0"));
        Ok(e)
    } else {
        Err(Error::OutOfRange {
            value: e.value,
            context: context.to_string(),
        })
    }
}

/// AF capacity, `(1/2) E[log2(1 + τγ)]`, with `τ` set by the detection
/// technique of `uw` (a lower bound for IM/DD).
pub fn acc_af(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig) -> Result<MetricResult> {
    let c = relay.gain()?;
    let tau = uw.detection.tau();
    let shapes = rf.shapes();
    let beta = rf.beta();
    let mut out = Evaluated::default();
    let inv = (-ln_gamma_sum(&shapes)).exp();
    for comp in uw.components() {
        let name = format!("acc_af_{}", comp.label);
        let mut s_terms = comp.pdf_kernel();
        s_terms.push(GammaTerm::num(0.0, 1.0));
        let mut t_terms: Vec<GammaTerm> = shapes.iter().map(|&e| GammaTerm::num(e, 1.0)).collect();
        t_terms.extend([
            GammaTerm::num(1.0, -1.0),
            GammaTerm::num(0.0, 1.0),
            GammaTerm::den(1.0, 1.0),
        ]);
        let h = HCoeffs::bivariate(vec![JointGammaTerm::num(0.0, -1.0, 1.0)], s_terms, t_terms);
        let v = term(&name, fox_h_bivariate(&h, c / comp.theta, beta / tau))?;
        let w = comp.pdf_weight * inv / (2.0 * LN_2);
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    let out = check_capacity(out, "AF ACC")?;
    Ok(MetricResult::from_evaluated(out, Method::Exact))
}

/// DF capacity, `(1/2) E[log2(1 + τ min(γ_1, γ_2))]`, assembled as
/// `∫ln(1+τγ)(f_1 + f_2 − f_1F_2 − f_2F_1)`.
pub fn acc_df(rf: &RfLinkFit, uw: &EggParams) -> Result<MetricResult> {
    let tau = uw.detection.tau();
    let shapes = rf.shapes();
    let beta = rf.beta();
    let inv = (-ln_gamma_sum(&shapes)).exp();
    let c1 = rf_acc(rf, tau)?;
    let c2 = uwoc_acc(uw)?;
    let mut out = Evaluated {
        value: c1.value + c2.value,
        ..Evaluated::default()
    };
    out.absorb(c1);
    out.absorb(c2);
    for comp in uw.components() {
        // f_1 F_2 part
        let name = format!("acc_df_f1F2_{}", comp.label);
        let joint = shapes.iter().map(|&e| JointGammaTerm::num(e, -1.0, -1.0)).collect();
        let h = HCoeffs::bivariate(joint, comp.cdf_kernel(), log1p_kernel());
        let v = term(&name, fox_h_bivariate(&h, 1.0 / (beta * comp.theta), tau / beta))?;
        let w = -comp.cdf_weight() * inv / (2.0 * LN_2);
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));

        // f_2 F_1 part
        let name = format!("acc_df_f2F1_{}", comp.label);
        let joint = vec![JointGammaTerm::num(comp.alpha, -comp.rho, -comp.rho)];
        let h = HCoeffs::bivariate(joint, log1p_kernel(), cdf_coeffs(&shapes).s_terms);
        let v = term(&name, fox_h_bivariate(&h, tau * comp.theta, beta * comp.theta))?;
        let w = -comp.pdf_weight * inv / (2.0 * LN_2);
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    let out = check_capacity(out, "DF ACC")?;
    Ok(MetricResult::from_evaluated(out, Method::Exact))
}
