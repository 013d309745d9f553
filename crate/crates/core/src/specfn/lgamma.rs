//! Gamma-function primitives used by every Mellin–Barnes integrand.
//!
//! The complex log-gamma is a Lanczos approximation (g = 607/128, 15 terms)
//! on `Re z >= 0.5`; smaller real parts are lifted with the upward recurrence
//! `ln Γ(z) = ln Γ(z + n) - Σ ln(z + k)`, which keeps the principal branch
//! (the imaginary part is continuous away from the negative real axis).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::SpecFnError;

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// ln(sqrt(2π))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

/// Above this many recurrence steps the reflection formula is used instead.
/// Reflection returns a value whose exponential is correct but whose
/// imaginary part may differ from the principal branch by a multiple of 2π.
const MAX_RECURRENCE: f64 = 4096.0;

/// Distance from a non-positive integer below which Γ is treated as a pole.
pub const POLE_EPS: f64 = 1e-14;

/// Principal branch of `ln Γ(z)`.
pub fn ln_gamma(z: Complex64) -> Result<Complex64, SpecFnError> {
    if near_pole(z) {
        return Err(SpecFnError::GammaPole { re: z.re, im: z.im });
    }
    Ok(ln_gamma_unchecked(z))
}

/// `ln Γ(z)` without the pole guard; returns non-finite values at poles.
#[inline]
pub fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos(z);
    }
    let steps = (0.5 - z.re).ceil();
    if steps > MAX_RECURRENCE {
        // ln Γ(z) = ln π - ln sin(πz) - ln Γ(1 - z)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - lanczos(Complex64::new(1.0, 0.0) - z);
    }
    let n = steps as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    for _ in 0..n {
        acc += w.ln();
        w += 1.0;
    }
    lanczos(w) - acc
}

#[inline]
fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + (LANCZOS_G + 0.5);
    (z + 0.5) * t.ln() - t + x.ln() + LN_SQRT_2PI
}

fn near_pole(z: Complex64) -> bool {
    if z.im.abs() > POLE_EPS || z.re > 0.5 {
        return false;
    }
    (z.re - z.re.round()).abs() <= POLE_EPS
}

/// `(ln |Γ(x)|, sign Γ(x))` for real `x`.
pub fn ln_gamma_real(x: f64) -> Result<(f64, f64), SpecFnError> {
    let v = ln_gamma(Complex64::new(x, 0.0))?;
    // The imaginary part is π times the number of negative factors.
    let sign = if (v.im / PI).round() as i64 % 2 == 0 { 1.0 } else { -1.0 };
    Ok((v.re, sign))
}

/// Γ(x) for real `x` (may overflow to ±inf for large arguments).
pub fn gamma_real(x: f64) -> Result<f64, SpecFnError> {
    let (l, s) = ln_gamma_real(x)?;
    Ok(s * l.exp())
}

/// Digamma ψ(x) for real `x` not at a pole.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    if x <= 0.0 {
        // reflection: ψ(1 - x) - ψ(x) = π cot(πx)
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    acc + x.ln() - 0.5 * inv - series
}

/// Trigamma ψ'(x) for real `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)));
    acc + series
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling series at z + 20 followed by downward recurrence; shares no
    /// code with the Lanczos path.
    fn stirling_oracle(z: Complex64) -> Complex64 {
        const BERNOULLI: [f64; 8] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
            -3617.0 / 510.0,
        ];
        let shift = 20usize;
        let w = z + shift as f64;
        let mut s = (w - 0.5) * w.ln() - w + LN_SQRT_2PI;
        let mut pow = w;
        let w2 = w * w;
        for (k, b) in BERNOULLI.iter().enumerate() {
            let n = 2.0 * (k as f64 + 1.0);
            s += *b / (n * (n - 1.0) * pow);
            pow *= w2;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..shift {
            acc += (z + j as f64).ln();
        }
        s - acc
    }

    #[test]
    fn known_real_values() {
        assert!(ln_gamma(Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = ln_gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((half.re - 0.572_364_942_924_700_087).abs() < 1e-14);
        assert!(half.im.abs() < 1e-15);
        let g5 = gamma_real(5.0).unwrap();
        assert!((g5 - 24.0).abs() < 1e-12);
        let gneg = gamma_real(-0.5).unwrap();
        assert!((gneg + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn matches_stirling_oracle_on_lattice() {
        let mut worst: f64 = 0.0;
        for i in -12..=12 {
            for j in -12..=12 {
                let z = Complex64::new(i as f64 * 0.73 + 0.11, j as f64 * 1.9);
                if near_pole(z) {
                    continue;
                }
                let a = ln_gamma(z).unwrap();
                let b = stirling_oracle(z);
                // relative error of Γ itself, and agreement of the branch
                let rel = ((a - b).exp() - 1.0).norm();
                worst = worst.max(rel);
                assert!((a.im - b.im).abs() < 1e-9, "branch mismatch at {z}");
            }
        }
        assert!(worst < 1e-12, "worst relative error {worst}");
    }

    #[test]
    fn two_plus_three_i() {
        let z = Complex64::new(2.0, 3.0);
        let a = ln_gamma(z).unwrap();
        let b = stirling_oracle(z);
        assert!(((a - b).exp() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn recurrence_identity() {
        for &(re, im) in &[(0.3, 0.0), (-2.7, 0.4), (-7.5, -3.0), (4.0, 25.0)] {
            let z = Complex64::new(re, im);
            let lhs = ln_gamma(z + 1.0).unwrap();
            let rhs = ln_gamma(z).unwrap() + z.ln();
            assert!((lhs - rhs).norm() < 1e-11, "{z}");
        }
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(
            ln_gamma(Complex64::new(-3.0, 0.0)),
            Err(SpecFnError::GammaPole { .. })
        ));
        assert!(ln_gamma(Complex64::new(0.0, 0.0)).is_err());
        assert!(ln_gamma(Complex64::new(-3.0 + 1e-9, 0.0)).is_ok());
    }

    #[test]
    fn polygamma_against_finite_differences() {
        for &x in &[0.2f64, 1.0, 3.7, 15.0, 80.0] {
            let h = 1e-5 * x.max(1.0);
            let (lp, _) = ln_gamma_real(x + h).unwrap();
            let (lm, _) = ln_gamma_real(x - h).unwrap();
            let (l0, _) = ln_gamma_real(x).unwrap();
            let d1 = (lp - lm) / (2.0 * h);
            let d2 = (lp - 2.0 * l0 + lm) / (h * h);
            assert!((digamma(x) - d1).abs() < 1e-7 * d1.abs().max(1.0), "psi {x}");
            assert!((trigamma(x) - d2).abs() < 1e-4 * d2.abs().max(1.0), "psi' {x}");
        }
        assert!((digamma(1.0) + 0.577_215_664_901_532_9).abs() < 1e-13);
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-12);
    }
}
