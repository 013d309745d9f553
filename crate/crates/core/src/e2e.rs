//! End-to-end SNR statistics at the destination for fixed-gain
//! amplify-and-forward (`γ = γ_1 γ_2 / (γ_2 + C)`) and decode-and-forward
//! (`γ = min(γ_1, γ_2)`) relaying.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{term, Error, Result};
use crate::report::{Evaluated, TermRecord};
use crate::rf_link::{ln_gamma_sum, snr1_cdf, snr1_pdf, RfLinkFit};
use crate::specfn::{fox_h, fox_h_bivariate, GammaTerm, HCoeffs, JointGammaTerm};
use crate::uwoc::{snr2_cdf, snr2_pdf, Component, EggParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Af,
    Df,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Af => "af",
            Protocol::Df => "df",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "af" | "fixed_gain_af" => Ok(Protocol::Af),
            "df" => Ok(Protocol::Df),
            _ => Err(Error::InvalidParams(format!("unknown protocol {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayConfig {
    pub protocol: Protocol,
    /// Fixed relay gain constant `C` (AF only).
    pub gain_const: Option<f64>,
}

impl RelayConfig {
    pub fn af(gain_const: f64) -> Result<Self> {
        if !(gain_const > 0.0 && gain_const.is_finite()) {
            return Err(Error::InvalidParams(format!("gain constant must be positive, got {gain_const}")));
        }
        Ok(Self {
            protocol: Protocol::Af,
            gain_const: Some(gain_const),
        })
    }

    pub fn df() -> Self {
        Self {
            protocol: Protocol::Df,
            gain_const: None,
        }
    }

    pub(crate) fn gain(&self) -> Result<f64> {
        match (self.protocol, self.gain_const) {
            (Protocol::Af, Some(c)) if c > 0.0 => Ok(c),
            (Protocol::Af, _) => Err(Error::InvalidParams("AF relaying requires a positive gain constant".into())),
            (Protocol::Df, _) => Err(Error::InvalidParams("operation requires AF relaying".into())),
        }
    }
}

/// Slack beyond [0, 1] attributed to quadrature noise.
pub const PROBABILITY_SLACK: f64 = 1e-5;

pub(crate) fn clamp_probability(mut e: Evaluated, context: &str) -> Result<Evaluated> {
    let v = e.value;
    if (0.0..=1.0).contains(&v) {
        return Ok(e);
    }
    if (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&v) {
        e.value = v.clamp(0.0, 1.0);
        e.warn(format!("{context}: value {v:e} clamped into [0, 1]"));
        Ok(e)
    } else {
        Err(Error::OutOfRange {
            value: v,
            context: context.to_string(),
        })
    }
}

/// `Γ(t + e_j − 1)` for every RF shape, the t-side of every AF integrand.
fn rf_t_terms(shapes: &[f64]) -> Vec<GammaTerm> {
    shapes.iter().map(|&e| GammaTerm::num(e - 1.0, 1.0)).collect()
}

/// Bivariate part of the AF CDF for one optical component:
/// `∫∫ Γ(t−s−1) K(s) Γ(1+s) Π Γ(t+e−1) / Γ(t) · (C/θ)^{-s} (βγ)^{-t}`.
pub(crate) fn af_cdf_coeffs(shapes: &[f64], comp: &Component) -> HCoeffs {
    let mut s_terms = comp.cdf_kernel();
    s_terms.push(GammaTerm::num(1.0, 1.0));
    let mut t_terms = rf_t_terms(shapes);
    t_terms.push(GammaTerm::den(0.0, 1.0));
    HCoeffs::bivariate(vec![JointGammaTerm::num(-1.0, -1.0, 1.0)], s_terms, t_terms)
}

fn check_af(relay: &RelayConfig, gamma: f64) -> Result<f64> {
    let c = relay.gain()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParams(format!("gamma must be positive, got {gamma}")));
    }
    Ok(c)
}

pub fn af_cdf(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig, gamma: f64) -> Result<Evaluated> {
    let c = check_af(relay, gamma)?;
    let shapes = rf.shapes();
    let beta = rf.beta();
    let mut out = snr1_cdf(rf, gamma)?;
    let a1 = beta * (-ln_gamma_sum(&shapes)).exp();
    for comp in uw.components() {
        let name = format!("cdf_af_{}", comp.label);
        let h = af_cdf_coeffs(&shapes, &comp);
        let v = term(&name, fox_h_bivariate(&h, c / comp.theta, beta * gamma))?;
        let w = comp.cdf_weight() * a1 * gamma;
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    clamp_probability(out, "AF CDF")
}

/// Bivariate part of the AF PDF for one optical component:
/// `∫∫ Γ(t−s−1) Γ(α+ρs) Γ(s) Π Γ(t+e−1) / Γ(t−1) · x^{-s} y^{-t}`.
fn af_pdf_coeffs(shapes: &[f64], comp: &Component) -> HCoeffs {
    let mut s_terms = comp.pdf_kernel();
    s_terms.push(GammaTerm::num(0.0, 1.0));
    let mut t_terms = rf_t_terms(shapes);
    t_terms.push(GammaTerm::den(-1.0, 1.0));
    HCoeffs::bivariate(vec![JointGammaTerm::num(-1.0, -1.0, 1.0)], s_terms, t_terms)
}

/// The same integral with the t-contour moved left across the pole at
/// `t = 1 + s`, for small `y`. Above that pole the zero of `1/Γ(t−1)` kills
/// the leading residue and the contour integral cancels to many digits.
///
/// With `Γ(z) = −Γ(1+z) Γ(−z) / Γ(1−z)` the strip `s < t < 1 + s` becomes an
/// ordinary admissible region. The crossed residue reduces to a univariate
/// `y^{-1} ∫ Γ(α+ρs) Π Γ(s+e) (xy)^{-s}`.
fn af_pdf_shifted(shapes: &[f64], comp: &Component) -> (HCoeffs, HCoeffs) {
    let mut residue = comp.pdf_kernel();
    residue.extend(shapes.iter().map(|&e| GammaTerm::num(e, 1.0)));
    let mut s_terms = comp.pdf_kernel();
    s_terms.push(GammaTerm::num(0.0, 1.0));
    let mut t_terms = rf_t_terms(shapes);
    t_terms.push(GammaTerm::den(-1.0, 1.0));
    let joint = vec![
        JointGammaTerm::num(0.0, -1.0, 1.0),
        JointGammaTerm::num(1.0, 1.0, -1.0),
        JointGammaTerm::den(2.0, 1.0, -1.0),
    ];
    (HCoeffs::univariate(residue), HCoeffs::bivariate(joint, s_terms, t_terms))
}

pub fn af_pdf(rf: &RfLinkFit, uw: &EggParams, relay: &RelayConfig, gamma: f64) -> Result<Evaluated> {
    let c = check_af(relay, gamma)?;
    let shapes = rf.shapes();
    let beta = rf.beta();
    let a1 = beta * (-ln_gamma_sum(&shapes)).exp();
    let (x_scale, y) = (c, beta * gamma);
    let mut out = Evaluated::default();
    for comp in uw.components() {
        let name = format!("pdf_af_{}", comp.label);
        let w = comp.pdf_weight * a1;
        let x = x_scale / comp.theta;
        if y < 1.0 {
            let (residue, shifted) = af_pdf_shifted(&shapes, &comp);
            let r = term(&name, fox_h(&residue, x * y))?;
            let v = term(&name, fox_h_bivariate(&shifted, x, y))?;
            out.value += w * (r.value / y - v.value);
            out.terms.push(TermRecord::from_mb(&format!("{name}_residue"), w / y, &r));
            out.terms.push(TermRecord::from_mb(&format!("{name}_shifted"), -w, &v));
        } else {
            let v = term(&name, fox_h_bivariate(&af_pdf_coeffs(&shapes, &comp), x, y))?;
            out.value += w * v.value;
            out.terms.push(TermRecord::from_mb(&name, w, &v));
        }
    }
    Ok(out)
}

pub fn df_cdf(rf: &RfLinkFit, uw: &EggParams, gamma: f64) -> Result<Evaluated> {
    let f1 = snr1_cdf(rf, gamma)?;
    let f2 = snr2_cdf(uw, gamma)?;
    let mut out = Evaluated {
        value: f1.value + f2.value - f1.value * f2.value,
        ..Evaluated::default()
    };
    out.absorb(f1);
    out.absorb(f2);
    clamp_probability(out, "DF CDF")
}

pub fn df_pdf(rf: &RfLinkFit, uw: &EggParams, gamma: f64) -> Result<Evaluated> {
    let p1 = snr1_pdf(rf, gamma)?;
    let p2 = snr2_pdf(uw, gamma)?;
    let f1 = snr1_cdf(rf, gamma)?;
    let f2 = snr2_cdf(uw, gamma)?;
    let mut out = Evaluated {
        value: p1 + p2.value - p1 * f2.value - p2.value * f1.value,
        terms: vec![TermRecord::closed_form("pdf_rf", p1)],
        warnings: Vec::new(),
    };
    out.absorb(p2);
    out.absorb(f1);
    out.absorb(f2);
    Ok(out)
}
