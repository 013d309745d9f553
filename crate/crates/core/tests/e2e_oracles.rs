mod common;

use common::db;
use ris_uwoc::e2e::{af_cdf, af_pdf, df_cdf, df_pdf, RelayConfig};
use ris_uwoc::mc::{sample_gamma1, sample_gamma2, McConfig, RfChannel};
use ris_uwoc::rf_link::{fit_kg, snr1_cdf, RfLinkFit, RfLinkParams};
use ris_uwoc::uwoc::{snr2_cdf, Detection, EggParams, TABLE};

fn setup(n: u32, row: usize, det: Detection, snr_db: f64) -> (RfLinkFit, EggParams) {
    let rf = fit_kg(&RfLinkParams::new(n, 2.0, db(snr_db)).unwrap()).unwrap();
    let uw = EggParams::new(TABLE[row].shape, det, db(snr_db)).unwrap();
    (rf, uw)
}

#[test]
fn af_is_worse_than_the_rf_hop() {
    let (rf, uw) = setup(2, 1, Detection::Imdd, 10.0);
    let relay = RelayConfig::af(1.5).unwrap();
    for g in [0.1, 1.0, 5.0, 30.0] {
        let af = af_cdf(&rf, &uw, &relay, g).unwrap().value;
        let f1 = snr1_cdf(&rf, g).unwrap().value;
        assert!(af >= f1, "γ={g}: {af} < {f1}");
        assert!((0.0..=1.0).contains(&af));
    }
}

#[test]
fn df_is_worse_than_either_hop() {
    let (rf, uw) = setup(3, 4, Detection::Hd, 12.0);
    for g in [0.05, 1.0, 8.0, 60.0] {
        let df = df_cdf(&rf, &uw, g).unwrap().value;
        let f1 = snr1_cdf(&rf, g).unwrap().value;
        let f2 = snr2_cdf(&uw, g).unwrap().value;
        assert!(df >= f1.max(f2) - 1e-15, "γ={g}");
    }
}

#[test]
fn vanishing_gain_recovers_the_rf_hop() {
    let (rf, uw) = setup(2, 0, Detection::Hd, 10.0);
    let relay = RelayConfig::af(1e-4).unwrap();
    for g in [0.5, 3.0, 20.0] {
        let af = af_cdf(&rf, &uw, &relay, g).unwrap().value;
        let f1 = snr1_cdf(&rf, g).unwrap().value;
        assert!((af / f1 - 1.0).abs() < 1e-3, "γ={g}: {af} vs {f1}");
    }
}

#[test]
fn af_cdf_matches_sampled_fitted_law() {
    let (rf, uw) = setup(2, 1, Detection::Imdd, 10.0);
    let c = 1.5;
    let relay = RelayConfig::af(c).unwrap();
    let cfg = McConfig::new(1_000_000, 21);
    let g1 = sample_gamma1(&RfChannel::Fitted(rf), &cfg).unwrap();
    let g2 = sample_gamma2(&uw, &cfg).unwrap();
    let n = g1.len() as f64;
    for th in [0.5, 2.0, 8.0] {
        let hits = g1.iter().zip(&g2).filter(|(&x, &y)| x * y / (y + c) < th).count() as f64;
        let p = hits / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let exact = af_cdf(&rf, &uw, &relay, th).unwrap().value;
        assert!((p - exact).abs() < 3.0 * se, "γ={th}: {p} ± {se} vs {exact}");
    }
}

#[test]
fn densities_are_cdf_slopes() {
    let (rf, uw) = setup(2, 3, Detection::Hd, 10.0);
    let relay = RelayConfig::af(1.5).unwrap();
    for g in [0.2, 2.0, 15.0] {
        let h = 0.01 * g;
        let fd = (af_cdf(&rf, &uw, &relay, g + h).unwrap().value - af_cdf(&rf, &uw, &relay, g - h).unwrap().value)
            / (2.0 * h);
        let pdf = af_pdf(&rf, &uw, &relay, g).unwrap().value;
        assert!((fd / pdf - 1.0).abs() < 1e-3, "AF γ={g}: {fd} vs {pdf}");
        let fd = (df_cdf(&rf, &uw, g + h).unwrap().value - df_cdf(&rf, &uw, g - h).unwrap().value) / (2.0 * h);
        let pdf = df_pdf(&rf, &uw, g).unwrap().value;
        assert!((fd / pdf - 1.0).abs() < 1e-3, "DF γ={g}: {fd} vs {pdf}");
    }
}
