//! Meijer G, Fox H and bivariate Fox H functions evaluated by quadrature of
//! their Mellin–Barnes integrals along straight vertical contours.
//!
//! An instance is described literally as a product of gamma factors
//! `Γ(offset + slope·s)` (numerator or denominator) times `x^{-s}`, so any
//! integrand built from shifted and scaled gammas can be expressed without
//! going through the `(a_j, A_j)/(b_j, B_j)` display notation.

pub mod bessel;
mod contour;
pub mod lgamma;
mod mellin;
pub mod quadrature;

use thiserror::Error;

pub use lgamma::{digamma, gamma_real, ln_gamma, ln_gamma_real, trigamma};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFnError {
    #[error("gamma function pole at {re}{im:+}i")]
    GammaPole { re: f64, im: f64 },
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("argument must be positive and finite, got {0}")]
    InvalidArgument(f64),
    #[error("no admissible contour: {0}")]
    ContourInfeasible(String),
    #[error("integrand does not decay along the contour: {0}")]
    Divergent(String),
    #[error("quadrature did not converge (value {value:e}, error estimate {error_estimate:e}, tolerance {tolerance:e})")]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        tolerance: f64,
    },
}

/// Pole family of a gamma factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Position {
    /// Numerator factor with positive slope; its poles lie left of the contour.
    NumeratorLeft,
    /// Numerator factor with negative slope; its poles lie right of the contour.
    NumeratorRight,
    Denominator,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaTerm {
    pub offset: f64,
    pub slope: f64,
    pub position: Position,
}

impl GammaTerm {
    /// Numerator factor `Γ(offset + slope·s)`; the pole family follows the slope sign.
    pub fn num(offset: f64, slope: f64) -> Self {
        let position = if slope < 0.0 {
            Position::NumeratorRight
        } else {
            Position::NumeratorLeft
        };
        Self {
            offset,
            slope,
            position,
        }
    }

    /// Denominator factor `1/Γ(offset + slope·s)`.
    pub fn den(offset: f64, slope: f64) -> Self {
        Self {
            offset,
            slope,
            position: Position::Denominator,
        }
    }

    pub fn is_numerator(&self) -> bool {
        self.position != Position::Denominator
    }
}

/// Factor `Γ(offset + slope_s·s + slope_t·t)` coupling both contour variables.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JointGammaTerm {
    pub offset: f64,
    pub slope_s: f64,
    pub slope_t: f64,
    pub numerator: bool,
}

impl JointGammaTerm {
    pub fn num(offset: f64, slope_s: f64, slope_t: f64) -> Self {
        Self {
            offset,
            slope_s,
            slope_t,
            numerator: true,
        }
    }

    pub fn den(offset: f64, slope_s: f64, slope_t: f64) -> Self {
        Self {
            offset,
            slope_s,
            slope_t,
            numerator: false,
        }
    }
}

pub const DEFAULT_TOL_UNIVARIATE: f64 = 1e-8;
pub const DEFAULT_TOL_BIVARIATE: f64 = 1e-6;

/// Gamma-factor lists and contour controls of a (bi)variate instance.
///
/// `t_terms` and `joint_terms` are empty for univariate instances.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct HCoeffs {
    pub s_terms: Vec<GammaTerm>,
    pub t_terms: Vec<GammaTerm>,
    pub joint_terms: Vec<JointGammaTerm>,
    /// Contour abscissas `(c_s[, c_t])`; chosen automatically when absent.
    pub contour_abscissa: Option<Vec<f64>>,
    /// Half-length of the integration range along each contour; derived
    /// from the integrand decay when absent.
    pub truncation_height: Option<f64>,
    pub quad_tolerance: Option<f64>,
}

impl HCoeffs {
    pub fn univariate(terms: Vec<GammaTerm>) -> Self {
        Self {
            s_terms: terms,
            ..Self::default()
        }
    }

    pub fn bivariate(
        joint_terms: Vec<JointGammaTerm>,
        s_terms: Vec<GammaTerm>,
        t_terms: Vec<GammaTerm>,
    ) -> Self {
        Self {
            s_terms,
            t_terms,
            joint_terms,
            ..Self::default()
        }
    }

    /// `G^{m,n}_{p,q}(x | a; b)` with `p = a.len()`, `q = b.len()`.
    pub fn meijer(m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<Self, SpecFnError> {
        let a: Vec<_> = a.iter().map(|&v| (v, 1.0)).collect();
        let b: Vec<_> = b.iter().map(|&v| (v, 1.0)).collect();
        Self::fox(m, n, &a, &b)
    }

    /// `H^{m,n}_{p,q}[x | (a_j, A_j); (b_j, B_j)]`.
    pub fn fox(
        m: usize,
        n: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
    ) -> Result<Self, SpecFnError> {
        if m > b.len() || n > a.len() {
            return Err(SpecFnError::InvalidCoefficients(format!(
                "orders m={m}, n={n} exceed q={}, p={}",
                b.len(),
                a.len()
            )));
        }
        if let Some(&(_, bad)) = a.iter().chain(b).find(|(_, s)| !(*s > 0.0)) {
            return Err(SpecFnError::InvalidCoefficients(format!(
                "H-function slopes must be positive, got {bad}"
            )));
        }
        let mut terms = Vec::with_capacity(a.len() + b.len());
        terms.extend(b[..m].iter().map(|&(bj, bs)| GammaTerm::num(bj, bs)));
        terms.extend(a[..n].iter().map(|&(aj, asl)| GammaTerm::num(1.0 - aj, -asl)));
        terms.extend(b[m..].iter().map(|&(bj, bs)| GammaTerm::den(1.0 - bj, -bs)));
        terms.extend(a[n..].iter().map(|&(aj, asl)| GammaTerm::den(aj, asl)));
        Ok(Self::univariate(terms))
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.quad_tolerance = Some(tol);
        self
    }

    pub fn with_abscissa(mut self, c: Vec<f64>) -> Self {
        self.contour_abscissa = Some(c);
        self
    }

    pub fn with_truncation(mut self, t: f64) -> Self {
        self.truncation_height = Some(t);
        self
    }

    pub fn is_bivariate(&self) -> bool {
        !self.t_terms.is_empty() || !self.joint_terms.is_empty()
    }

    fn validate(&self) -> Result<(), SpecFnError> {
        let all_s = self.s_terms.iter().chain(&self.t_terms);
        for g in all_s {
            if !(g.offset.is_finite() && g.slope.is_finite()) {
                return Err(SpecFnError::InvalidCoefficients(format!("non-finite term {g:?}")));
            }
            let ok = match g.position {
                Position::NumeratorLeft => g.slope >= 0.0,
                Position::NumeratorRight => g.slope <= 0.0,
                Position::Denominator => true,
            };
            if !ok {
                return Err(SpecFnError::InvalidCoefficients(format!(
                    "slope sign disagrees with pole family in {g:?}"
                )));
            }
        }
        for j in &self.joint_terms {
            if !(j.offset.is_finite() && j.slope_s.is_finite() && j.slope_t.is_finite()) {
                return Err(SpecFnError::InvalidCoefficients(format!("non-finite term {j:?}")));
            }
        }
        if let Some(t) = self.truncation_height {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SpecFnError::InvalidCoefficients(format!(
                    "truncation height must be positive, got {t}"
                )));
            }
        }
        if let Some(tol) = self.quad_tolerance {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(SpecFnError::InvalidCoefficients(format!(
                    "tolerance must lie in (0, 1), got {tol}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of a Mellin–Barnes quadrature with its diagnostics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MbValue {
    pub value: f64,
    /// Imaginary part of the computed integral; zero in exact arithmetic.
    pub imag: f64,
    pub converged: bool,
    /// Accuracy was limited by cancellation against the integrand's
    /// absolute mass rather than by the requested tolerance.
    pub floor_limited: bool,
    pub abscissa: Vec<f64>,
    pub truncation: Vec<f64>,
    pub evaluations: usize,
    pub error_estimate: f64,
    /// Relative change when the integration range is doubled.
    pub tail_change: f64,
}

fn check_arg(x: f64) -> Result<(), SpecFnError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SpecFnError::InvalidArgument(x))
    }
}

fn finish(v: MbValue, tol: f64) -> Result<MbValue, SpecFnError> {
    if v.converged {
        Ok(v)
    } else {
        Err(SpecFnError::NonConvergence {
            value: v.value,
            error_estimate: v.error_estimate,
            tolerance: tol,
        })
    }
}

/// Meijer G-function; every slope must have unit magnitude.
pub fn meijer_g(coeffs: &HCoeffs, x: f64) -> Result<MbValue, SpecFnError> {
    if let Some(g) = coeffs.s_terms.iter().find(|g| g.slope.abs() != 1.0) {
        return Err(SpecFnError::InvalidCoefficients(format!(
            "Meijer G requires unit slopes, got {}",
            g.slope
        )));
    }
    fox_h(coeffs, x)
}

/// Univariate Fox H-function (any real slopes).
pub fn fox_h(coeffs: &HCoeffs, x: f64) -> Result<MbValue, SpecFnError> {
    coeffs.validate()?;
    check_arg(x)?;
    if coeffs.is_bivariate() {
        return Err(SpecFnError::InvalidCoefficients(
            "bivariate coefficients passed to univariate evaluator".into(),
        ));
    }
    let tol = coeffs.quad_tolerance.unwrap_or(DEFAULT_TOL_UNIVARIATE);
    let v = mellin::integrate_1d(coeffs, x.ln(), tol)?;
    finish(v, tol)
}

/// Bivariate Fox H-function: `(2πi)^{-2} ∮∮ Π Γ(...) x^{-s} y^{-t} ds dt`.
pub fn fox_h_bivariate(coeffs: &HCoeffs, x: f64, y: f64) -> Result<MbValue, SpecFnError> {
    coeffs.validate()?;
    check_arg(x)?;
    check_arg(y)?;
    let tol = coeffs.quad_tolerance.unwrap_or(DEFAULT_TOL_BIVARIATE);
    let v = mellin::integrate_2d(coeffs, x.ln(), y.ln(), tol)?;
    finish(v, tol)
}
