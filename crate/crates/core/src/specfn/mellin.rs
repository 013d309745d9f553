//! Vertical-line quadrature of one- and two-dimensional Mellin–Barnes
//! integrals.
//!
//! With `s = c + iu` the integral becomes `(1/2π) ∫ f(c + iu) du`. The
//! integrand is normalised by its value at the real axis crossing, the range
//! `|u| <= R` is derived from the exponential decay rate of the gamma
//! product and then verified pointwise, and the result is accepted only if
//! the contribution of `R <= |u| <= 2R` stays below the tolerance.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::contour;
use super::lgamma::ln_gamma_unchecked;
use super::quadrature::{self, QuadLimits};
use super::{HCoeffs, MbValue, SpecFnError};

/// Gamma factor `Γ(offset + ds·s + dt·t)` in numerator or denominator.
#[derive(Debug, Clone, Copy)]
pub struct Factor {
    pub offset: f64,
    pub ds: f64,
    pub dt: f64,
    pub numerator: bool,
}

pub fn factors(coeffs: &HCoeffs) -> Vec<Factor> {
    let mut out = Vec::new();
    for g in &coeffs.s_terms {
        out.push(Factor {
            offset: g.offset,
            ds: g.slope,
            dt: 0.0,
            numerator: g.is_numerator(),
        });
    }
    for g in &coeffs.t_terms {
        out.push(Factor {
            offset: g.offset,
            ds: 0.0,
            dt: g.slope,
            numerator: g.is_numerator(),
        });
    }
    for j in &coeffs.joint_terms {
        out.push(Factor {
            offset: j.offset,
            ds: j.slope_s,
            dt: j.slope_t,
            numerator: j.numerator,
        });
    }
    cancel_pairs(out)
}

/// Drops numerator/denominator pairs with identical arguments.
fn cancel_pairs(mut fs: Vec<Factor>) -> Vec<Factor> {
    let same = |a: &Factor, b: &Factor| a.offset == b.offset && a.ds == b.ds && a.dt == b.dt;
    let mut i = 0;
    while i < fs.len() {
        if fs[i].numerator {
            if let Some(j) = fs.iter().position(|d| !d.numerator && same(d, &fs[i])) {
                let (hi, lo) = if j > i { (j, i) } else { (i, j) };
                fs.remove(hi);
                fs.remove(lo);
                continue;
            }
        }
        i += 1;
    }
    fs
}

struct Integrand<'a> {
    factors: &'a [Factor],
    c: [f64; 2],
    ln_args: [f64; 2],
    shift: f64,
}

impl Integrand<'_> {
    fn log(&self, u: f64, v: f64) -> Complex64 {
        let s = Complex64::new(self.c[0], u);
        let t = Complex64::new(self.c[1], v);
        let mut acc = -(s * self.ln_args[0] + t * self.ln_args[1]);
        for f in self.factors {
            let z = f.ds * s + f.dt * t + f.offset;
            let l = ln_gamma_unchecked(z);
            if f.numerator {
                acc += l;
            } else {
                acc -= l;
            }
        }
        acc - self.shift
    }

    fn eval(&self, u: f64, v: f64) -> Complex64 {
        let l = self.log(u, v);
        if l.re.is_nan() || l.re == f64::NEG_INFINITY {
            // zero of a reciprocal gamma
            return Complex64::new(0.0, 0.0);
        }
        l.exp()
    }

    fn log_abs(&self, u: f64, v: f64) -> f64 {
        let l = self.log(u, v).re;
        if l.is_nan() {
            f64::NEG_INFINITY
        } else {
            l
        }
    }
}

/// Exponential decay rate of |f| along direction `(cos θ, sin θ)`.
fn decay(factors: &[Factor], dir: [f64; 2]) -> f64 {
    factors
        .iter()
        .map(|f| {
            let w = (f.ds * dir[0] + f.dt * dir[1]).abs();
            if f.numerator {
                w
            } else {
                -w
            }
        })
        .sum::<f64>()
        * FRAC_PI_2
}

/// Exponent of the algebraic prefactor `|u|^ρ` in the Stirling asymptote.
fn power(factors: &[Factor], c: [f64; 2]) -> f64 {
    factors
        .iter()
        .filter(|f| f.ds != 0.0 || f.dt != 0.0)
        .map(|f| {
            let re = f.offset + f.ds * c[0] + f.dt * c[1] - 0.5;
            if f.numerator {
                re
            } else {
                -re
            }
        })
        .sum()
}

/// Distance along the contour after which Stirling asymptotics hold for every factor.
fn onset(factors: &[Factor], c: [f64; 2]) -> f64 {
    factors
        .iter()
        .filter_map(|f| {
            let norm = f.ds.hypot(f.dt);
            (norm > 0.0).then(|| ((f.offset + f.ds * c[0] + f.dt * c[1]).abs() + 3.0) / norm)
        })
        .fold(0.0, f64::max)
}

fn log_budget(tol: f64) -> f64 {
    (1.0 / tol).ln() + 12.0
}

/// Breakpoints on `[-r, r]`: geometric near the origin (to resolve peaks
/// from nearby poles), uniform further out (to resolve oscillation).
fn breaks(r: f64, h0: f64, spacing: f64, max_uniform: usize) -> Vec<f64> {
    let mut pos = vec![0.0];
    let mut h = h0.min(r);
    while h < r {
        pos.push(h);
        h *= 2.0;
    }
    let n = ((r / spacing).ceil() as usize).clamp(1, max_uniform);
    for k in 1..n {
        pos.push(r * k as f64 / n as f64);
    }
    pos.push(r);
    pos.sort_by(f64::total_cmp);
    pos.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * r);
    let mut all: Vec<f64> = pos.iter().skip(1).rev().map(|x| -x).collect();
    all.extend(pos);
    all
}

struct Axis {
    slope: f64,
    clearance: f64,
    freq: f64,
}

fn axis(factors: &[Factor], it: &Integrand, k: usize, r: f64) -> Axis {
    let slope_of = |f: &Factor| if k == 0 { f.ds } else { f.dt };
    let slope = factors
        .iter()
        .map(|f| slope_of(f).abs())
        .fold(0.0, f64::max);
    let clearance = factors
        .iter()
        .filter(|f| f.numerator && slope_of(f) != 0.0)
        .map(|f| (f.offset + f.ds * it.c[0] + f.dt * it.c[1]) / slope_of(f).abs())
        .fold(f64::INFINITY, f64::min);
    let freq = it.ln_args[k].abs()
        + factors
            .iter()
            .map(|f| {
                let b = slope_of(f).abs();
                b * (2.0 + b * r).ln()
            })
            .sum::<f64>();
    Axis {
        slope: slope.max(1e-300),
        clearance,
        freq,
    }
}

fn axis_breaks(ax: &Axis, r: f64, max_uniform: usize) -> Vec<f64> {
    let scale = 1.0 / ax.slope;
    let h0 = 0.5 * ax.clearance.min(scale).max(1e-8 * scale);
    let spacing = (2.0 * PI / ax.freq.max(1e-12)).min(2.0 * scale);
    breaks(r, h0, spacing, max_uniform)
}

fn abscissa(coeffs: &HCoeffs, factors: &[Factor], ln_args: [f64; 2], dim: usize) -> Result<[f64; 2], SpecFnError> {
    match &coeffs.contour_abscissa {
        Some(c) => {
            if c.len() != dim {
                return Err(SpecFnError::InvalidCoefficients(format!(
                    "expected {dim} contour abscissas, got {}",
                    c.len()
                )));
            }
            let mut cc = [0.0; 2];
            cc[..dim].copy_from_slice(c);
            contour::check(factors, &cc)?;
            Ok(cc)
        }
        None => contour::select(factors, ln_args, dim),
    }
}

/// `bound · scale` bounds either the integral (mass) or its error; below
/// `1e-300` the value is settled for every purpose.
fn underflows(mass: f64, scale: f64) -> bool {
    mass.is_finite() && mass * scale < 1e-300
}

/// Saddle magnitudes below `e^-800` scale every finite integral to zero.
const NEGLIGIBLE_SHIFT: f64 = -800.0;

const MAX_EVALS_1D: usize = 4_000_000;
const MAX_EVALS_2D: usize = 12_000_000;

pub fn integrate_1d(coeffs: &HCoeffs, ln_x: f64, tol: f64) -> Result<MbValue, SpecFnError> {
    let fs = factors(coeffs);
    let ln_args = [ln_x, 0.0];
    let c = abscissa(coeffs, &fs, ln_args, 1)?;
    let kappa = decay(&fs, [1.0, 0.0]);
    if !(kappa > 1e-12) {
        return Err(SpecFnError::Divergent(format!("decay rate {kappa:e}")));
    }
    let mut it = Integrand {
        factors: &fs,
        c,
        ln_args,
        shift: 0.0,
    };
    it.shift = it.log(0.0, 0.0).re;
    if !it.shift.is_finite() {
        it.shift = 0.0;
    }
    let budget = log_budget(tol);
    let r = match coeffs.truncation_height {
        Some(t) => t,
        None => {
            let rho = power(&fs, c).max(0.0);
            let start = onset(&fs, c);
            let mut r = start + (budget + rho * (2.0 + start + budget / kappa).ln()) / kappa;
            for _ in 0..40 {
                let peak = [r, 1.5 * r, 2.0 * r]
                    .iter()
                    .flat_map(|&u| [it.log_abs(u, 0.0), it.log_abs(-u, 0.0)])
                    .fold(f64::NEG_INFINITY, f64::max);
                if peak < -budget {
                    break;
                }
                r *= 1.5;
            }
            r
        }
    };
    let ax = axis(&fs, &it, 0, r);
    let bk = axis_breaks(&ax, r, 4000);
    let limits = QuadLimits {
        rel_tol: 0.25 * tol,
        abs_tol: 0.0,
        mass_rel: 1e-12,
        max_evals: if it.shift < NEGLIGIBLE_SHIFT { 20_000 } else { MAX_EVALS_1D },
    };
    let main = quadrature::integrate(|u| it.eval(u, 0.0), &bk, limits);
    let tail_limits = QuadLimits {
        rel_tol: 0.1,
        abs_tol: 0.1 * tol * main.value.norm(),
        mass_rel: 1e-12,
        max_evals: MAX_EVALS_1D / 4,
    };
    let far = axis(&fs, &it, 0, 2.0 * r);
    let tail_breaks: Vec<f64> = axis_breaks(&far, r, 2000).iter().map(|u| u.abs() + r).filter(|u| *u > r).collect();
    let mut tb = vec![r];
    tb.extend(tail_breaks);
    tb.sort_by(f64::total_cmp);
    tb.dedup();
    let tail_r = quadrature::integrate(|u| it.eval(u, 0.0), &tb, tail_limits);
    let tl: Vec<f64> = tb.iter().rev().map(|u| -u).collect();
    let tail_l = quadrature::integrate(|u| it.eval(u, 0.0), &tl, tail_limits);
    let tail = tail_r.value + tail_l.value;
    let denom = main.value.norm().max(main.abs_mass * 1e-12).max(f64::MIN_POSITIVE);
    let tail_change = tail.norm() / denom;
    let scale = it.shift.exp() / (2.0 * PI);
    let total = (main.value + tail) * scale;
    Ok(MbValue {
        value: total.re,
        imag: total.im,
        converged: (main.converged && tail_change <= tol) || underflows(main.abs_mass.min(main.error + tail_r.error + tail_l.error), scale),
        floor_limited: main.floor_limited,
        abscissa: vec![c[0]],
        truncation: vec![r],
        evaluations: main.evals + tail_r.evals + tail_l.evals,
        error_estimate: (main.error + tail_r.error + tail_l.error) * scale,
        tail_change,
    })
}

pub fn integrate_2d(coeffs: &HCoeffs, ln_x: f64, ln_y: f64, tol: f64) -> Result<MbValue, SpecFnError> {
    let fs = factors(coeffs);
    let ln_args = [ln_x, ln_y];
    let c = abscissa(coeffs, &fs, ln_args, 2)?;
    let mut it = Integrand {
        factors: &fs,
        c,
        ln_args,
        shift: 0.0,
    };
    it.shift = it.log(0.0, 0.0).re;
    if !it.shift.is_finite() {
        it.shift = 0.0;
    }
    let budget = log_budget(tol);
    // decay is positively homogeneous; the sublevel set {decay <= L} is star-shaped
    let angles = 1440;
    let mut kappa_min = f64::INFINITY;
    let mut reach = [0.0f64; 2];
    let rho = power(&fs, c).max(0.0);
    let start = onset(&fs, c);
    for k in 0..angles {
        let th = 2.0 * PI * k as f64 / angles as f64;
        let dir = [th.cos(), th.sin()];
        let kap = decay(&fs, dir);
        kappa_min = kappa_min.min(kap);
        if kap > 0.0 {
            let rad = start + (budget + rho * (2.0 + start + budget / kap).ln()) / kap;
            reach[0] = reach[0].max(rad * dir[0].abs());
            reach[1] = reach[1].max(rad * dir[1].abs());
        }
    }
    if !(kappa_min > 1e-12) {
        return Err(SpecFnError::Divergent(format!("minimum directional decay rate {kappa_min:e}")));
    }
    let mut r = match coeffs.truncation_height {
        Some(t) => [t, t],
        None => reach,
    };
    if coeffs.truncation_height.is_none() {
        for _ in 0..30 {
            let mut peak = f64::NEG_INFINITY;
            for scale in [1.0, 1.5, 2.0] {
                let (ru, rv) = (r[0] * scale, r[1] * scale);
                for k in 0..=64 {
                    let x = -1.0 + 2.0 * k as f64 / 64.0;
                    for (u, v) in [(x * ru, rv), (x * ru, -rv), (ru, x * rv), (-ru, x * rv)] {
                        peak = peak.max(it.log_abs(u, v));
                    }
                }
            }
            if peak < -budget {
                break;
            }
            r = [r[0] * 1.4, r[1] * 1.4];
        }
    }
    let ax_u = axis(&fs, &it, 0, r[0]);
    let ax_v = axis(&fs, &it, 1, r[1]);
    let bu = axis_breaks(&ax_u, r[0], 12);
    // g(-u, -v) is the conjugate of g(u, v) for real parameters, so only the
    // upper half plane is integrated
    let bv: Vec<f64> = axis_breaks(&ax_v, r[1], 12).into_iter().filter(|&v| v >= 0.0).collect();
    let limits = QuadLimits {
        rel_tol: 0.25 * tol,
        abs_tol: 0.0,
        mass_rel: 1e-12,
        max_evals: if it.shift < NEGLIGIBLE_SHIFT { 50_000 } else { MAX_EVALS_2D },
    };
    let f = |u: f64, v: f64| it.eval(u, v);
    let main = quadrature::integrate_2d(f, &bu, &bv, limits);
    let tail_limits = QuadLimits {
        rel_tol: 0.1,
        abs_tol: 0.05 * tol * main.value.re.abs(),
        mass_rel: 1e-12,
        max_evals: MAX_EVALS_2D / 8,
    };
    let (ru, rv) = (r[0], r[1]);
    let frame = [
        ([-2.0 * ru, 2.0 * ru], [rv, 2.0 * rv]),
        ([ru, 2.0 * ru], [0.0, rv]),
        ([-2.0 * ru, -ru], [0.0, rv]),
    ];
    let mut tail = Complex64::new(0.0, 0.0);
    let mut tail_err = 0.0;
    let mut evals = main.evals;
    for (uu, vv) in frame {
        let bu: Vec<f64> = (0..=4).map(|k| uu[0] + (uu[1] - uu[0]) * k as f64 / 4.0).collect();
        let bv: Vec<f64> = (0..=2).map(|k| vv[0] + (vv[1] - vv[0]) * k as f64 / 2.0).collect();
        let part = quadrature::integrate_2d(f, &bu, &bv, tail_limits);
        tail += part.value;
        tail_err += part.error;
        evals += part.evals;
    }
    let denom = main.value.re.abs().max(main.abs_mass * 1e-12).max(f64::MIN_POSITIVE);
    let tail_change = tail.re.abs() / denom;
    let scale = it.shift.exp() / (4.0 * PI * PI);
    let total = 2.0 * (main.value.re + tail.re) * scale;
    Ok(MbValue {
        value: total,
        imag: 0.0,
        converged: (main.converged && tail_change <= tol) || underflows(main.abs_mass.min(main.error + tail_err), scale),
        floor_limited: main.floor_limited,
        abscissa: vec![c[0], c[1]],
        truncation: vec![ru, rv],
        evaluations: evals,
        error_estimate: 2.0 * (main.error + tail_err) * scale,
        tail_change,
    })
}
