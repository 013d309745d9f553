mod common;

use common::*;
use ris_uwoc::e2e::RelayConfig;
use ris_uwoc::metrics::*;
use ris_uwoc::rf_link::{fit_kg, RfLinkFit, RfLinkParams};
use ris_uwoc::uwoc::{Detection, EggParams, TABLE};

struct Case {
    rf: RfLinkFit,
    uw: EggParams,
}

fn case(n: u32, row: usize, det: Detection, snr_db: f64) -> Case {
    Case {
        rf: fit_kg(&RfLinkParams::new(n, 2.0, db(snr_db)).unwrap()).unwrap(),
        uw: EggParams::new(TABLE[row].shape, det, db(snr_db)).unwrap(),
    }
}

fn cases() -> Vec<Case> {
    let mut v = vec![
        case(2, 0, Detection::Imdd, 15.0),
        case(3, 1, Detection::Hd, 10.0),
        case(4, 3, Detection::Hd, 20.0),
    ];
    v.push(Case {
        rf: RfLinkFit::direct_rayleigh(db(12.0)),
        uw: EggParams::new(TABLE[6].shape, Detection::Imdd, db(12.0)).unwrap(),
    });
    v
}

fn close(got: f64, want: f64, rel: f64, what: &str) {
    let err = (got - want).abs() / want.abs();
    assert!(err <= rel, "{what}: got {got:e}, reference {want:e}, rel {err:e}");
}

#[test]
fn single_hop_averages_match_quadrature() {
    let m = ModulationParams::BPSK;
    for c in cases() {
        let tau = c.uw.detection.tau();
        let want = rf_expect(&c.rf, |x| ber(m.p, m.q, x), &[]);
        close(rf_aber(&c.rf, m).unwrap().value, want, 1e-7, "rf aber");
        let want = rf_expect(&c.rf, |x| cap(tau, x), &[]);
        close(rf_acc(&c.rf, tau).unwrap().value, want, 1e-7, "rf acc");
        let want = uwoc_expect(&c.uw, |y| cap(tau, y));
        close(uwoc_acc(&c.uw).unwrap().value, want, 1e-7, "uwoc acc");
    }
}

#[test]
fn af_aber_matches_quadrature() {
    let relay = RelayConfig::af(1.5).unwrap();
    for (i, c) in cases().iter().enumerate() {
        let m = if i % 2 == 0 { ModulationParams::BPSK } else { ModulationParams::new(1.0, 0.5).unwrap() };
        let got = aber_af(&c.rf, &c.uw, &relay, m).unwrap();
        assert!(got.converged());
        let want = af_expect(&c.rf, &c.uw, 1.5, |g| ber(m.p, m.q, g));
        close(got.value, want, 2e-5, "af aber");
    }
}

#[test]
fn af_acc_matches_quadrature() {
    let relay = RelayConfig::af(1.5).unwrap();
    for c in cases() {
        let tau = c.uw.detection.tau();
        let got = acc_af(&c.rf, &c.uw, &relay).unwrap();
        let want = af_expect(&c.rf, &c.uw, 1.5, |g| cap(tau, g));
        close(got.value, want, 2e-5, "af acc");
    }
}

#[test]
fn df_metrics_match_quadrature() {
    let m = ModulationParams::BPSK;
    for c in cases() {
        let tau = c.uw.detection.tau();
        let got = acc_df(&c.rf, &c.uw).unwrap();
        let want = df_expect(&c.rf, &c.uw, |g| cap(tau, g));
        close(got.value, want, 2e-5, "df acc");

        let p1 = rf_expect(&c.rf, |x| ber(m.p, m.q, x), &[]);
        let p2 = uwoc_expect(&c.uw, |y| ber(m.p, m.q, y));
        close(aber_df(&c.rf, &c.uw, m).unwrap().value, p1 + p2 - 2.0 * p1 * p2, 1e-6, "df aber");

        let g = db(2.0);
        let f1 = rf_expect(&c.rf, |x| if x < g { 1.0 } else { 0.0 }, &[g]);
        let f2 = uwoc_cdf(&c.uw, g);
        close(op_df(&c.rf, &c.uw, g).unwrap().value, f1 + f2 - f1 * f2, 1e-6, "df op");
    }
}

#[test]
fn af_outage_matches_quadrature() {
    let relay = RelayConfig::af(1.5).unwrap();
    let g = db(2.0);
    for c in cases() {
        let got = op_af(&c.rf, &c.uw, &relay, g).unwrap();
        // P(γ_1 γ_2/(γ_2 + C) < g) = E_y[F_1(g (y + C)/y)]
        let want = uwoc_expect(&c.uw, |y| {
            let t = g * (y + 1.5) / y;
            rf_expect(&c.rf, |x| if x < t { 1.0 } else { 0.0 }, &[t])
        });
        close(got.value, want, 2e-5, "af op");
    }
}
