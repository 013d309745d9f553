//! RIS-cascaded RF hop: moments of the co-phased sum of Nakagami × Rayleigh
//! products, the moment-matched squared generalized-K law, and the SNR
//! statistics derived from it.
//!
//! Both the fitted law and the direct single-antenna Rayleigh baseline are
//! expressed through a list of gamma shapes `e`: the normalised SNR
//! `βγ_1` has Mellin transform `Π Γ(e_j + s) / Π Γ(e_j)`, so every closed
//! form downstream is written once for an arbitrary shape list.

use serde::{Deserialize, Serialize};

use crate::error::{term, Error, Result};
use crate::report::{Evaluated, TermRecord};
use crate::specfn::bessel::ln_bessel_k;
use crate::specfn::{fox_h, ln_gamma_real, GammaTerm, HCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfLinkParams {
    /// Number of reflecting elements.
    pub n: u32,
    /// Nakagami fading parameter of the source–RIS channels.
    pub m: f64,
    /// Mean SNR `γ̄_1` (linear).
    pub mean_snr: f64,
}

impl RfLinkParams {
    pub fn new(n: u32, m: f64, mean_snr: f64) -> Result<Self> {
        let p = Self { n, m, mean_snr };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(self.m >= 0.5 && self.m.is_finite()) {
            return Err(Error::InvalidParams(format!("m must be >= 0.5, got {}", self.m)));
        }
        if !(self.mean_snr > 0.0 && self.mean_snr.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "mean SNR must be positive, got {}",
                self.mean_snr
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RfModel {
    /// RIS cascade approximated by a squared generalized-K law.
    SquaredKg,
    /// Direct source–relay Rayleigh link without RIS (exponential SNR).
    DirectRayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfLinkFit {
    pub k_w: f64,
    pub m_w: f64,
    /// Mean power of the cascade amplitude.
    pub omega_w: f64,
    /// `k_w m_w / Ω_w`
    pub xi_tilde: f64,
    /// `Ξ̃ / γ̄_1`
    pub xi: f64,
    /// Smallest shape, the RF contribution to the diversity order.
    pub t_min: f64,
    pub mean_snr: f64,
    pub model: RfModel,
}

impl RfLinkFit {
    /// Exponential SNR with mean `mean_snr`.
    pub fn direct_rayleigh(mean_snr: f64) -> Self {
        Self {
            k_w: f64::INFINITY,
            m_w: 1.0,
            omega_w: 1.0,
            xi_tilde: 1.0,
            xi: 1.0 / mean_snr,
            t_min: 1.0,
            mean_snr,
            model: RfModel::DirectRayleigh,
        }
    }

    /// Same fitted shape at a different mean SNR.
    pub fn with_mean_snr(&self, mean_snr: f64) -> Self {
        Self {
            xi: self.xi_tilde / mean_snr,
            mean_snr,
            ..*self
        }
    }

    pub fn shapes(&self) -> Vec<f64> {
        match self.model {
            RfModel::SquaredKg => vec![self.k_w, self.m_w],
            RfModel::DirectRayleigh => vec![1.0],
        }
    }

    /// Scale `β` such that `βγ_1` has unit-free Mellin transform `Π Γ(e_j + s)/Π Γ(e_j)`.
    pub fn beta(&self) -> f64 {
        self.xi
    }
}

/// `E[(αβ)^n]` for α Nakagami-m with unit power and β Rayleigh with unit power.
pub fn product_moment(m: f64, n: u32) -> f64 {
    let h = n as f64 / 2.0;
    let lg = |x: f64| ln_gamma_real(x).map(|v| v.0).unwrap_or(f64::NAN);
    (lg(m + h) - lg(m) - h * m.ln() + lg(1.0 + h)).exp()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E[Z^n]` for `Z = Σ_{i≤N} α_i β_i`, by repeated binomial convolution.
pub fn sum_moment(params: &RfLinkParams, n: u32) -> f64 {
    let single: Vec<f64> = (0..=n).map(|j| product_moment(params.m, j)).collect();
    let mut acc = single.clone();
    for _ in 1..params.n {
        acc = (0..=n)
            .map(|order| {
                (0..=order)
                    .map(|j| binomial(order, j) * acc[j as usize] * single[(order - j) as usize])
                    .sum()
            })
            .collect();
    }
    acc[n as usize]
}

/// Matches the normalised second and third moments of `W = Z²` to the
/// squared generalized-K law, `E[W^j]/E[W]^j = Π_{i<j} (1 + i/k)(1 + i/m)`.
///
/// With `x = 1/k`, `y = 1/m` the two equations reduce to the symmetric
/// functions `x + y` and `xy`, so the shapes are roots of a quadratic; a
/// complex pair is replaced by its modulus.
pub fn fit_kg(params: &RfLinkParams) -> Result<RfLinkFit> {
    params.validate()?;
    let mu2 = sum_moment(params, 2);
    let a = sum_moment(params, 4) / (mu2 * mu2);
    let b = sum_moment(params, 6) / (mu2 * mu2 * mu2);
    let prod = 0.5 * (b / a - 2.0 * a + 1.0);
    let sum = a - 1.0 - prod;
    if !(prod > 0.0 && sum > 0.0) {
        return Err(Error::FitFailure(format!(
            "moment ratios ({a}, {b}) admit no positive shapes"
        )));
    }
    let disc = sum * sum - 4.0 * prod;
    let (k_w, m_w) = if disc >= 0.0 {
        let root = disc.sqrt();
        // larger shape pairs with the smaller reciprocal
        let small = 0.5 * (sum - root);
        let large = 0.5 * (sum + root);
        if !(small > 0.0) {
            return Err(Error::FitFailure(format!("non-positive reciprocal shape {small}")));
        }
        (1.0 / small, 1.0 / large)
    } else {
        let modulus = 1.0 / prod.sqrt();
        (modulus, modulus)
    };
    let omega_w = mu2;
    let xi_tilde = k_w * m_w / omega_w;
    Ok(RfLinkFit {
        k_w,
        m_w,
        omega_w,
        xi_tilde,
        xi: xi_tilde / params.mean_snr,
        t_min: k_w.min(m_w),
        mean_snr: params.mean_snr,
        model: RfModel::SquaredKg,
    })
}

pub(crate) fn ln_gamma_sum(shapes: &[f64]) -> f64 {
    shapes
        .iter()
        .map(|&e| ln_gamma_real(e).map(|v| v.0).unwrap_or(f64::NAN))
        .sum()
}

/// PDF of `γ_1` (modified-Bessel form for the fitted law).
pub fn snr1_pdf(fit: &RfLinkFit, gamma1: f64) -> Result<f64> {
    if !(gamma1 > 0.0) {
        return Err(Error::InvalidParams(format!("gamma1 must be positive, got {gamma1}")));
    }
    let beta = fit.beta();
    match fit.model {
        RfModel::DirectRayleigh => Ok(beta * (-beta * gamma1).exp()),
        RfModel::SquaredKg => {
            let (k, m) = (fit.k_w, fit.m_w);
            let z = beta * gamma1;
            let half = 0.5 * (k + m);
            let ln = 2f64.ln() + half * beta.ln() + (half - 1.0) * gamma1.ln()
                + ln_bessel_k(k - m, 2.0 * z.sqrt())
                - ln_gamma_sum(&[k, m]);
            Ok(ln.exp())
        }
    }
}

/// The same density as a Meijer G-function of `βγ_1`.
pub fn snr1_pdf_meijer(fit: &RfLinkFit, gamma1: f64) -> Result<Evaluated> {
    let shapes = fit.shapes();
    let terms = shapes.iter().map(|&e| GammaTerm::num(e - 1.0, 1.0)).collect();
    let c = HCoeffs::univariate(terms);
    let v = term("pdf_rf", fox_h(&c, fit.beta() * gamma1))?;
    let w = fit.beta() * (-ln_gamma_sum(&shapes)).exp();
    Ok(Evaluated::single(w * v.value, TermRecord::from_mb("pdf_rf", w, &v)))
}

/// Mellin–Barnes kernel of `F_1(x) = H[βx]`.
pub(crate) fn cdf_coeffs(shapes: &[f64]) -> HCoeffs {
    let mut terms: Vec<GammaTerm> = shapes.iter().map(|&e| GammaTerm::num(e, 1.0)).collect();
    terms.push(GammaTerm::num(0.0, -1.0));
    terms.push(GammaTerm::den(1.0, -1.0));
    HCoeffs::univariate(terms)
}

pub fn snr1_cdf(fit: &RfLinkFit, gamma1: f64) -> Result<Evaluated> {
    if gamma1 < 0.0 || gamma1.is_nan() {
        return Err(Error::InvalidParams(format!("gamma1 must be >= 0, got {gamma1}")));
    }
    if gamma1 == 0.0 {
        return Ok(Evaluated::single(0.0, TermRecord::closed_form("cdf_rf", 0.0)));
    }
    let shapes = fit.shapes();
    let v = term("cdf_rf", fox_h(&cdf_coeffs(&shapes), fit.beta() * gamma1))?;
    let w = (-ln_gamma_sum(&shapes)).exp();
    Ok(Evaluated::single(w * v.value, TermRecord::from_mb("cdf_rf", w, &v)))
}

/// Distance below which two shapes, or a shape and a pole, count as coincident.
pub const DEGENERACY_GAP: f64 = 1e-3;

/// Moves the second shape by `DEGENERACY_GAP` when the shape difference is
/// within the gap of an integer, where `Γ(e_i - e_j)` has a pole.
pub fn separate_shapes(shapes: &[f64]) -> (Vec<f64>, Option<String>) {
    let mut out = shapes.to_vec();
    if out.len() == 2 {
        let d = out[0] - out[1];
        if (d - d.round()).abs() < DEGENERACY_GAP {
            out[1] += DEGENERACY_GAP;
            return (
                out,
                Some(format!(
                    "k_w - m_w = {d} is within {DEGENERACY_GAP} of an integer; m_w perturbed by {DEGENERACY_GAP}"
                )),
            );
        }
    }
    (out, None)
}

/// `Π_{i≠j} Γ(e_i − e_j) / (Π Γ(e) e_j)`: coefficient of `(βγ)^{e_j}` in
/// the small-argument expansion of `F_1`.
pub(crate) fn leading_coefficient(shapes: &[f64], j: usize) -> f64 {
    let mut ln = -ln_gamma_sum(shapes) - shapes[j].ln();
    let mut sign = 1.0;
    for (i, &e) in shapes.iter().enumerate() {
        if i != j {
            let (l, s) = ln_gamma_real(e - shapes[j]).unwrap_or((f64::NAN, 1.0));
            ln += l;
            sign *= s;
        }
    }
    sign * ln.exp()
}

/// High-SNR CDF of `γ_1`: the smallest-shape term of the expansion.
pub fn snr1_cdf_asymptotic(fit: &RfLinkFit, gamma1: f64) -> Evaluated {
    let (shapes, warning) = separate_shapes(&fit.shapes());
    let j = (0..shapes.len())
        .min_by(|&a, &b| shapes[a].total_cmp(&shapes[b]))
        .unwrap_or(0);
    let value = leading_coefficient(&shapes, j) * (fit.beta() * gamma1).powf(shapes[j]);
    let mut out = Evaluated::single(value, TermRecord::closed_form("cdf_rf_asymptotic", value));
    if let Some(w) = warning {
        out.warn(w);
    }
    out
}
