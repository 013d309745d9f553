mod common;

use common::{db, uwoc_cdf, uwoc_expect};
use num_complex::Complex64;
use ris_uwoc::mc::{sample_gamma2, McConfig};
use ris_uwoc::specfn::quadrature::{integrate, QuadLimits};
use ris_uwoc::uwoc::{second_moment, snr2_cdf, snr2_pdf, Detection, EggParams, EggShape, TABLE};

fn params(row: usize, det: Detection, snr_db: f64) -> EggParams {
    EggParams::new(TABLE[row].shape, det, db(snr_db)).unwrap()
}

/// `∫ pdf` over `ln γ` on `[mean·1e-16, mean·1e2]`.
fn pdf_mass(uw: &EggParams) -> f64 {
    let (lo, hi) = ((1e-16 * uw.mean_snr).ln(), (1e2 * uw.mean_snr).ln());
    let breaks: Vec<f64> = (0..=16).map(|k| lo + (hi - lo) * k as f64 / 16.0).collect();
    let lim = QuadLimits {
        rel_tol: 1e-9,
        abs_tol: 1e-300,
        mass_rel: 0.0,
        max_evals: 200_000,
    };
    integrate(
        |t| {
            let x = t.exp();
            Complex64::new(snr2_pdf(uw, x).unwrap().value * x, 0.0)
        },
        &breaks,
        lim,
    )
    .value
    .re
}

#[test]
fn pdf_integrates_to_one() {
    for (row, det) in [(0, Detection::Hd), (0, Detection::Imdd), (4, Detection::Imdd), (8, Detection::Imdd)] {
        {
            let uw = params(row, det, 10.0);
            let total = pdf_mass(&uw);
            // both tails outside the grid come from the closed form
            let total = total + uwoc_cdf(&uw, 1e-16 * uw.mean_snr) + 1.0 - uwoc_cdf(&uw, 1e2 * uw.mean_snr);
            assert!((total - 1.0).abs() < 1e-6, "row {row} {det:?}: {total}");
        }
    }
}

#[test]
fn cdf_matches_closed_form() {
    for row in [0, 4, 8] {
        for det in [Detection::Hd, Detection::Imdd] {
            let uw = params(row, det, 15.0);
            for x in [1e-3, 0.3, 5.0, 30.0, 300.0] {
                let y = x * uw.mean_snr / 30.0;
                let got = snr2_cdf(&uw, y).unwrap().value;
                let expect = uwoc_cdf(&uw, y);
                assert!((got - expect).abs() < 1e-9 + 1e-8 * expect, "row {row} {det:?} y={y}: {got} vs {expect}");
            }
        }
    }
}

#[test]
fn exponential_limit_of_the_mixture() {
    let shape = EggShape {
        omega: 1.0 - 1e-9,
        ..TABLE[2].shape
    };
    let uw = EggParams::new(shape, Detection::Hd, 20.0).unwrap();
    let theta = uw.lambda * uw.mu_r;
    for y in [0.1, 2.0, 20.0, 90.0] {
        let expect = (-y / theta).exp() / theta;
        let got = snr2_pdf(&uw, y).unwrap().value;
        assert!((got / expect - 1.0).abs() < 1e-6, "y={y}: {got} vs {expect}");
    }
}

#[test]
fn gamma_part_mean_with_unit_c() {
    let shape = EggShape {
        c: 1.0,
        ..TABLE[5].shape
    };
    let uw = EggParams::new(shape, Detection::Hd, 8.0).unwrap();
    let mean = uwoc_expect(&uw, |y| y);
    let expect = uw.mu_r * (uw.omega * uw.lambda + (1.0 - uw.omega) * uw.a * uw.b);
    assert!((mean / expect - 1.0).abs() < 1e-8, "{mean} vs {expect}");
}

#[test]
fn samples_follow_the_cdf() {
    let uw = params(1, Detection::Imdd, 10.0);
    let mut g = sample_gamma2(&uw, &McConfig::new(1_000_000, 9)).unwrap();
    g.sort_by(f64::total_cmp);
    let n = g.len() as f64;
    let ks = g
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = uwoc_cdf(&uw, y);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.005, "KS distance {ks}");
    for k in [1, 50, 500, 950] {
        let y = g[k * g.len() / 1000];
        let empirical = (k * g.len() / 1000) as f64 / n;
        let model = snr2_cdf(&uw, y).unwrap().value;
        assert!((model - empirical).abs() < 0.003, "q={k}: {model} vs {empirical}");
    }
}

#[test]
fn electrical_snr_sets_the_mean() {
    for row in [0, 3, 7] {
        let hd = params(row, Detection::Hd, 12.0);
        let im = params(row, Detection::Imdd, 12.0);
        assert!((uwoc_expect(&hd, |y| y) / (hd.mu_r * irradiance_mean(&hd)) - 1.0).abs() < 1e-8);
        // IM/DD: γ_2 = μ_r I², E[I²] normalised so that E[γ_2] = γ̄_2
        assert!((uwoc_expect(&im, |y| y) / im.mean_snr - 1.0).abs() < 1e-8);
    }
}

fn irradiance_mean(uw: &EggParams) -> f64 {
    let lg = statrs::function::gamma::ln_gamma;
    uw.omega * uw.lambda + (1.0 - uw.omega) * uw.b * (lg(uw.a + 1.0 / uw.c) - lg(uw.a)).exp()
}

#[test]
fn gamma_part_of_cdf_matches_density_quadrature() {
    // unit generalized-Gamma scale: b^r μ_r = 1
    let shape = TABLE[0].shape;
    let mean = second_moment(&shape).unwrap() / (shape.b * shape.b);
    let uw = EggParams::new(shape, Detection::Imdd, mean).unwrap();
    let cdf = snr2_cdf(&uw, 1.0).unwrap();
    let gg = cdf.terms.iter().find(|t| t.term == "cdf_uwoc_gg").unwrap().value;
    let (a, k) = (shape.a, shape.c / 2.0);
    let lg = statrs::function::gamma::ln_gamma(a);
    let density = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let ln = (k * y.ln()).exp();
        (1.0 - shape.omega) * k / y * (a * k * y.ln() - ln - lg).exp()
    };
    let breaks: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let lim = QuadLimits {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        mass_rel: 0.0,
        max_evals: 100_000,
    };
    let expect = integrate(|y| Complex64::new(density(y), 0.0), &breaks, lim).value.re;
    assert!((gg / expect - 1.0).abs() < 1e-8, "{gg} vs {expect}");
}
