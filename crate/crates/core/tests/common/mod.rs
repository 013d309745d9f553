//! Independent reference computations shared by the integration tests.
//!
//! Expectations are computed by direct quadrature over the channel laws in
//! their elementary forms (RF Bessel density, optical mixture as an
//! exponential plus a Gamma variate), never through Mellin–Barnes integrals.
#![allow(dead_code)]

use num_complex::Complex64;
use ris_uwoc::rf_link::{snr1_pdf, RfLinkFit};
use ris_uwoc::specfn::quadrature::{integrate, QuadLimits};
use ris_uwoc::uwoc::EggParams;
use statrs::function::gamma::ln_gamma;

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn quad(f: impl Fn(f64) -> f64, breaks: &[f64], rel: f64) -> f64 {
    let r = integrate(
        |x| Complex64::new(f(x), 0.0),
        breaks,
        QuadLimits {
            rel_tol: rel,
            abs_tol: 1e-300,
            mass_rel: 0.0,
            max_evals: 400_000,
        },
    );
    r.value.re
}

fn log_grid(lo: f64, hi: f64, step: f64, extra: &[f64]) -> Vec<f64> {
    let mut v = vec![];
    let mut t = lo;
    while t < hi {
        v.push(t);
        t += step;
    }
    v.push(hi);
    v.extend(extra.iter().copied().filter(|&e| e > lo && e < hi));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `E[g(γ_1)]` by quadrature of the Bessel density in `ln γ_1`.
pub fn rf_expect(rf: &RfLinkFit, g: impl Fn(f64) -> f64, kinks: &[f64]) -> f64 {
    let mean = rf.mean_snr;
    let (lo, hi) = ((1e-14 * mean).ln(), (2e3 * mean).ln());
    let extra: Vec<f64> = kinks.iter().filter(|&&k| k > 0.0).map(|k| k.ln()).collect();
    let br = log_grid(lo, hi, 1.0, &extra);
    quad(
        |t| {
            let x = t.exp();
            g(x) * snr1_pdf(rf, x).unwrap() * x
        },
        &br,
        1e-10,
    )
}

/// `∫_0^∞ z^{a-1} e^{-z} h(z) dz / Γ(a)`, robust for small `a`.
fn gamma_expect(a: f64, h: impl Fn(f64) -> f64) -> f64 {
    // z < 1 part through z = v^{1/a}, which removes the z^{a-1} singularity
    let near: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
    let low = quad(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let z = v.powf(1.0 / a);
            (-z).exp() * h(z)
        },
        &near,
        1e-10,
    ) / a;
    let far = log_grid(0.0, (60.0 + 4.0 * a).ln(), 0.25, &[]);
    let high = quad(
        |t| {
            let z = t.exp();
            (a * t - z).exp() * h(z)
        },
        &far,
        1e-10,
    );
    (low + high) * (-ln_gamma(a)).exp()
}

/// `E[g(γ_2)]` over the exponential/generalized-Gamma mixture.
pub fn uwoc_expect(uw: &EggParams, g: impl Fn(f64) -> f64) -> f64 {
    let r = uw.r();
    let te = uw.lambda.powf(r) * uw.mu_r;
    let tg = uw.b.powf(r) * uw.mu_r;
    // exponential part: (γ_2 / θ_e)^{1/r} is a unit exponential
    let exp_part = gamma_expect(1.0, |w| g(te * w.powf(r)));
    // generalized-Gamma part: (γ_2 / θ_g)^{c/r} is a unit-scale Gamma(a)
    let gg_part = gamma_expect(uw.a, |z| g(tg * z.powf(r / uw.c)));
    uw.omega * exp_part + (1.0 - uw.omega) * gg_part
}

/// Closed-form CDF of the optical SNR.
pub fn uwoc_cdf(uw: &EggParams, y: f64) -> f64 {
    use statrs::function::gamma::gamma_lr;
    let r = uw.r();
    let te = uw.lambda.powf(r) * uw.mu_r;
    let tg = uw.b.powf(r) * uw.mu_r;
    let lz = (uw.c / r) * (y / tg).ln();
    let gg = if lz < -20.0 {
        (uw.a * lz - ln_gamma(uw.a + 1.0)).exp()
    } else {
        let z = lz.exp();
        if z.is_finite() {
            gamma_lr(uw.a, z)
        } else {
            1.0
        }
    };
    uw.omega * (-(-(y / te).powf(1.0 / r)).exp_m1()) + (1.0 - uw.omega) * gg
}

/// `E[h(γ_1 γ_2 / (γ_2 + C))]`.
pub fn af_expect(rf: &RfLinkFit, uw: &EggParams, gain: f64, h: impl Fn(f64) -> f64 + Copy) -> f64 {
    uwoc_expect(uw, |y| {
        let k = y / (y + gain);
        rf_expect(rf, |x| h(k * x), &[])
    })
}

/// `E[h(min(γ_1, γ_2))]`.
pub fn df_expect(rf: &RfLinkFit, uw: &EggParams, h: impl Fn(f64) -> f64 + Copy) -> f64 {
    uwoc_expect(uw, |y| rf_expect(rf, |x| h(x.min(y)), &[y]))
}

/// Conditional BER `Γ(p, qγ) / (2Γ(p))`.
pub fn ber(p: f64, q: f64, g: f64) -> f64 {
    if g <= 0.0 {
        return 0.5;
    }
    let x = q * g;
    if !x.is_finite() {
        return 0.0;
    }
    0.5 * statrs::function::gamma::gamma_ur(p, x)
}

/// Capacity kernel `(1/2) log2(1 + τγ)`.
pub fn cap(tau: f64, g: f64) -> f64 {
    0.5 * (tau * g).ln_1p() / std::f64::consts::LN_2
}
