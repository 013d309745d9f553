//! Underwater optical hop: Exponential–Generalized-Gamma irradiance
//! mixture, its measured parameter tables, and the SNR statistics for
//! heterodyne and intensity-modulation/direct detection.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{term, Error, Result};
use crate::report::{Evaluated, TermRecord};
use crate::specfn::{fox_h, gamma_real, GammaTerm, HCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    /// Heterodyne detection, `r = 1`.
    Hd,
    /// Intensity modulation with direct detection, `r = 2`.
    Imdd,
}

impl Detection {
    pub fn r(self) -> f64 {
        match self {
            Detection::Hd => 1.0,
            Detection::Imdd => 2.0,
        }
    }

    /// Capacity scaling `τ` in `log2(1 + τγ)`.
    pub fn tau(self) -> f64 {
        match self {
            Detection::Hd => 1.0,
            Detection::Imdd => std::f64::consts::E / (2.0 * std::f64::consts::PI),
        }
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detection::Hd => "hd",
            Detection::Imdd => "imdd",
        })
    }
}

impl FromStr for Detection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hd" | "heterodyne" => Ok(Detection::Hd),
            "imdd" | "im/dd" | "im-dd" => Ok(Detection::Imdd),
            _ => Err(Error::InvalidParams(format!("unknown detection mode {s:?}"))),
        }
    }
}

/// Mixture parameters of the irradiance law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggShape {
    pub omega: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EggShape {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParams(format!(
                "mixture weight must lie in (0, 1), got {}",
                self.omega
            )));
        }
        for (name, v) in [("lambda", self.lambda), ("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggParams {
    pub omega: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub detection: Detection,
    /// Mean SNR `γ̄_2` (linear).
    pub mean_snr: f64,
    /// Electrical SNR `μ_r`.
    pub mu_r: f64,
}

impl EggParams {
    pub fn new(shape: EggShape, detection: Detection, mean_snr: f64) -> Result<Self> {
        shape.validate()?;
        if !(mean_snr > 0.0 && mean_snr.is_finite()) {
            return Err(Error::InvalidParams(format!("mean SNR must be positive, got {mean_snr}")));
        }
        let mu_r = match detection {
            Detection::Hd => mean_snr,
            Detection::Imdd => mean_snr / second_moment(&shape)?,
        };
        Ok(Self {
            omega: shape.omega,
            lambda: shape.lambda,
            a: shape.a,
            b: shape.b,
            c: shape.c,
            detection,
            mean_snr,
            mu_r,
        })
    }

    pub fn shape(&self) -> EggShape {
        EggShape {
            omega: self.omega,
            lambda: self.lambda,
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }

    pub fn with_mean_snr(&self, mean_snr: f64) -> Result<Self> {
        Self::new(self.shape(), self.detection, mean_snr)
    }

    pub fn r(&self) -> f64 {
        self.detection.r()
    }

    /// The exponential and generalized-Gamma parts of the SNR law.
    pub fn components(&self) -> [Component; 2] {
        let r = self.r();
        [
            Component {
                label: "exp",
                alpha: 1.0,
                rho: r,
                theta: self.lambda.powf(r) * self.mu_r,
                pdf_weight: self.omega,
            },
            Component {
                label: "gg",
                alpha: self.a,
                rho: r / self.c,
                theta: self.b.powf(r) * self.mu_r,
                pdf_weight: (1.0 - self.omega) / gamma_real(self.a).unwrap_or(f64::NAN),
            },
        ]
    }
}

/// `E[I²]` of the mixture, the IM/DD electrical-SNR normaliser.
pub fn second_moment(shape: &EggShape) -> Result<f64> {
    let ratio = gamma_real(shape.a + 2.0 / shape.c)? / gamma_real(shape.a)?;
    let d = 2.0 * shape.omega * shape.lambda * shape.lambda
        + shape.b * shape.b * (1.0 - shape.omega) * ratio;
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::InvalidParams(format!("non-positive second moment {d}")))
    }
}

/// One mixture part of the SNR law, parameterised so that
///
/// * PDF: `(pdf_weight/γ) · (1/2πi) ∫ Γ(α + ρs) (γ/θ)^{-s} ds`
/// * CDF: `pdf_weight·ρ · (1/2πi) ∫ Γ(α + ρs) Γ(-ρs)/Γ(1 - ρs) (γ/θ)^{-s} ds`
///
/// with `(α, ρ) = (1, r)` for the exponential part and `(a, r/c)` for the
/// generalized-Gamma part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub label: &'static str,
    pub alpha: f64,
    pub rho: f64,
    pub theta: f64,
    pub pdf_weight: f64,
}

impl Component {
    pub fn cdf_weight(&self) -> f64 {
        self.pdf_weight * self.rho
    }

    /// Exponent of the small-argument power law of the CDF part.
    pub fn exponent(&self) -> f64 {
        self.alpha / self.rho
    }

    /// `Γ(α + ρs) Γ(-ρs) / Γ(1 - ρs)`
    pub fn cdf_kernel(&self) -> Vec<GammaTerm> {
        vec![
            GammaTerm::num(self.alpha, self.rho),
            GammaTerm::num(0.0, -self.rho),
            GammaTerm::den(1.0, -self.rho),
        ]
    }

    /// `Γ(α + ρs)`
    pub fn pdf_kernel(&self) -> Vec<GammaTerm> {
        vec![GammaTerm::num(self.alpha, self.rho)]
    }

    /// Leading small-γ behaviour of the CDF part.
    pub fn cdf_asymptotic(&self, gamma: f64) -> f64 {
        self.pdf_weight / self.alpha * (gamma / self.theta).powf(self.exponent())
    }
}

pub fn snr2_pdf(p: &EggParams, gamma2: f64) -> Result<Evaluated> {
    if !(gamma2 > 0.0) {
        return Err(Error::InvalidParams(format!("gamma2 must be positive, got {gamma2}")));
    }
    let mut out = Evaluated::default();
    for comp in p.components() {
        let name = format!("pdf_uwoc_{}", comp.label);
        let v = term(&name, fox_h(&HCoeffs::univariate(comp.pdf_kernel()), gamma2 / comp.theta))?;
        let w = comp.pdf_weight / gamma2;
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    Ok(out)
}

pub fn snr2_cdf(p: &EggParams, gamma2: f64) -> Result<Evaluated> {
    if gamma2 < 0.0 || gamma2.is_nan() {
        return Err(Error::InvalidParams(format!("gamma2 must be >= 0, got {gamma2}")));
    }
    let mut out = Evaluated::default();
    if gamma2 == 0.0 {
        out.terms.push(TermRecord::closed_form("cdf_uwoc", 0.0));
        return Ok(out);
    }
    for comp in p.components() {
        let name = format!("cdf_uwoc_{}", comp.label);
        let v = term(&name, fox_h(&HCoeffs::univariate(comp.cdf_kernel()), gamma2 / comp.theta))?;
        let w = comp.cdf_weight();
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    Ok(out)
}

pub fn snr2_cdf_asymptotic(p: &EggParams, gamma2: f64) -> Evaluated {
    let mut out = Evaluated::default();
    for comp in p.components() {
        let v = comp.cdf_asymptotic(gamma2);
        out.value += v;
        out.terms.push(TermRecord::closed_form(&format!("cdf_uwoc_{}_asymptotic", comp.label), v));
    }
    out
}

/// Binary-modulation error-rate parameters: conditional BER `Γ(p, qγ)/(2Γ(p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub p: f64,
    pub q: f64,
}

impl ModulationParams {
    pub const BPSK: ModulationParams = ModulationParams { p: 0.5, q: 1.0 };

    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParams(format!("modulation (p, q) = ({p}, {q}) must be positive")));
        }
        Ok(Self { p, q })
    }
}

/// Average BER of the optical hop alone.
pub fn uwoc_aber(p: &EggParams, modulation: ModulationParams) -> Result<Evaluated> {
    let ModulationParams { p: pp, q } = modulation;
    let mut out = Evaluated::default();
    let gp = gamma_real(pp)?;
    for comp in p.components() {
        let name = format!("aber_uwoc_{}", comp.label);
        let mut terms = comp.cdf_kernel();
        terms.push(GammaTerm::num(pp, -1.0));
        let v = term(&name, fox_h(&HCoeffs::univariate(terms), 1.0 / (q * comp.theta)))?;
        let w = comp.cdf_weight() / (2.0 * gp);
        out.value += w * v.value;
        out.terms.push(TermRecord::from_mb(&name, w, &v));
    }
    Ok(out)
}

/// High-SNR average BER of the optical hop.
pub fn uwoc_aber_asymptotic(p: &EggParams, modulation: ModulationParams) -> Evaluated {
    let ModulationParams { p: pp, q } = modulation;
    let mut out = Evaluated::default();
    for comp in p.components() {
        let e = comp.exponent();
        let v = comp.cdf_asymptotic(1.0 / q) * gamma_real(pp + e).unwrap_or(f64::NAN)
            / (2.0 * gamma_real(pp).unwrap_or(f64::NAN));
        out.value += v;
        out.terms.push(TermRecord::closed_form(&format!("aber_uwoc_{}_asymptotic", comp.label), v));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Water {
    Fresh,
    Salty,
    /// Fresh water with a temperature gradient.
    Thermal,
}

impl fmt::Display for Water {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Water::Fresh => "fresh",
            Water::Salty => "salty",
            Water::Thermal => "thermal",
        })
    }
}

impl FromStr for Water {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fresh" => Ok(Water::Fresh),
            "salty" | "salt" => Ok(Water::Salty),
            "thermal" => Ok(Water::Thermal),
            _ => Err(Error::InvalidParams(format!("unknown water type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub water: Water,
    /// Bubble level in L/min.
    pub bubble_level: f64,
    /// Temperature gradient in °C/cm (thermal rows only).
    pub temp_gradient: Option<f64>,
    pub shape: EggShape,
}

impl TableRow {
    pub fn key(&self) -> String {
        match self.temp_gradient {
            Some(t) => format!("{}:{}:{}", self.water, self.bubble_level, t),
            None => format!("{}:{}", self.water, self.bubble_level),
        }
    }
}

const fn row(water: Water, bl: f64, dt: Option<f64>, p: [f64; 5]) -> TableRow {
    TableRow {
        water,
        bubble_level: bl,
        temp_gradient: dt,
        shape: EggShape {
            omega: p[0],
            lambda: p[1],
            a: p[2],
            b: p[3],
            c: p[4],
        },
    }
}

pub static TABLE: [TableRow; 9] = [
    row(Water::Thermal, 2.4, Some(0.05), [0.2130, 0.3291, 1.4299, 1.1817, 17.1984]),
    row(Water::Thermal, 2.4, Some(0.20), [0.1665, 0.1207, 0.1559, 1.5216, 22.8754]),
    row(Water::Thermal, 4.7, Some(0.05), [0.4580, 0.3449, 1.0421, 1.5768, 35.9424]),
    row(Water::Salty, 4.7, None, [0.2064, 0.3953, 0.5307, 1.2154, 35.7368]),
    row(Water::Salty, 7.1, None, [0.4344, 0.4747, 0.3935, 1.4506, 77.0245]),
    row(Water::Salty, 16.5, None, [0.4951, 0.1368, 0.0161, 3.2033, 82.1030]),
    row(Water::Fresh, 4.7, None, [0.2190, 0.4603, 1.2526, 1.1501, 41.3258]),
    row(Water::Fresh, 7.1, None, [0.3489, 0.4771, 0.4319, 1.4531, 74.3650]),
    row(Water::Fresh, 16.5, None, [0.5117, 0.1602, 0.0075, 2.9963, 216.8356]),
];

fn available() -> String {
    TABLE.iter().map(TableRow::key).collect::<Vec<_>>().join(", ")
}

pub fn table_lookup(water: Water, bubble_level: f64, temp_gradient: Option<f64>) -> Result<EggShape> {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    TABLE
        .iter()
        .find(|r| {
            r.water == water
                && close(r.bubble_level, bubble_level)
                && match (r.temp_gradient, temp_gradient) {
                    (None, None) => true,
                    (Some(a), Some(b)) => close(a, b),
                    _ => false,
                }
        })
        .map(|r| r.shape)
        .ok_or_else(|| Error::UnknownCondition {
            requested: match temp_gradient {
                Some(t) => format!("{water}:{bubble_level}:{t}"),
                None => format!("{water}:{bubble_level}"),
            },
            available: available(),
        })
}

/// Parses `water:bubble_level[:temp_gradient]`, e.g. `thermal:2.4:0.05`.
pub fn lookup_key(key: &str) -> Result<EggShape> {
    let parts: Vec<&str> = key.trim().split(':').collect();
    let bad = || Error::UnknownCondition {
        requested: key.to_string(),
        available: available(),
    };
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let water: Water = parts[0].parse().map_err(|_| bad())?;
    let bl: f64 = parts[1].parse().map_err(|_| bad())?;
    let dt = match parts.get(2) {
        Some(s) => Some(s.parse::<f64>().map_err(|_| bad())?),
        None => None,
    };
    table_lookup(water, bl, dt)
}

/// Writes the embedded parameter tables as CSV.
pub fn write_tables_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidParams(format!("csv output failed: {e}"));
    w.write_record([
        "param_water",
        "param_bubble_level",
        "param_temp_gradient",
        "omega",
        "lambda",
        "a",
        "b",
        "c",
    ])
    .map_err(io)?;
    for r in &TABLE {
        let s = r.shape;
        w.write_record([
            r.water.to_string(),
            r.bubble_level.to_string(),
            r.temp_gradient.map(|t| t.to_string()).unwrap_or_default(),
            s.omega.to_string(),
            s.lambda.to_string(),
            s.a.to_string(),
            s.b.to_string(),
            s.c.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidParams(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let s = table_lookup(Water::Thermal, 2.4, Some(0.05)).unwrap();
        assert_eq!((s.omega, s.lambda, s.a, s.b, s.c), (0.2130, 0.3291, 1.4299, 1.1817, 17.1984));
        let s = table_lookup(Water::Salty, 16.5, None).unwrap();
        assert_eq!((s.omega, s.lambda, s.a, s.b, s.c), (0.4951, 0.1368, 0.0161, 3.2033, 82.1030));
        let s = lookup_key("fresh:7.1").unwrap();
        assert_eq!((s.omega, s.lambda, s.a, s.b, s.c), (0.3489, 0.4771, 0.4319, 1.4531, 74.3650));
        match table_lookup(Water::Fresh, 3.0, None) {
            Err(Error::UnknownCondition { available, .. }) => assert!(available.contains("thermal:2.4:0.05")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn second_moment_positive_for_all_rows() {
        for r in &TABLE {
            assert!(second_moment(&r.shape).unwrap() > 0.0);
        }
    }

    #[test]
    fn electrical_snr_mapping() {
        let s = TABLE[0].shape;
        let hd = EggParams::new(s, Detection::Hd, 10.0).unwrap();
        assert_eq!(hd.mu_r, 10.0);
        let im = EggParams::new(s, Detection::Imdd, 10.0).unwrap();
        assert!((im.mu_r * second_moment(&s).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn two_exponential_mixture() {
        let s = EggShape {
            omega: 0.5,
            lambda: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
        };
        let p = EggParams::new(s, Detection::Hd, 1.0).unwrap();
        let v = snr2_cdf(&p, 1.0).unwrap().value;
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn tables_csv_has_all_rows() {
        let mut buf = Vec::new();
        write_tables_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.lines().nth(1).unwrap().starts_with("thermal,2.4,0.05,0.213,"));
    }
}
