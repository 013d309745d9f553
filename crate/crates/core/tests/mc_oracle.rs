mod common;

use common::db;
use ris_uwoc::e2e::Protocol;
use ris_uwoc::mc::{estimate_metric, estimate_metrics, McConfig, McPoint, RfChannel};
use ris_uwoc::metrics::{Metric, ModulationParams};
use ris_uwoc::rf_link::{fit_kg, snr1_cdf, RfLinkParams};
use ris_uwoc::uwoc::{snr2_cdf, Detection, EggParams, TABLE};

fn point() -> McPoint {
    McPoint {
        gamma_th: db(2.0),
        modulation: ModulationParams::new(0.5, 1.0).unwrap(),
        gain: Some(1.5),
    }
}

#[test]
fn df_outage_is_product_of_hop_survivals() {
    let p = RfLinkParams::new(2, 2.0, db(10.0)).unwrap();
    let rf = fit_kg(&p).unwrap();
    let uw = EggParams::new(TABLE[1].shape, Detection::Imdd, db(10.0)).unwrap();
    let pt = point();
    let est = estimate_metric(Metric::Op, Protocol::Df, &RfChannel::Fitted(rf), &uw, &pt, &McConfig::new(1_000_000, 4))
        .unwrap();
    let f1 = snr1_cdf(&rf, pt.gamma_th).unwrap().value;
    let f2 = snr2_cdf(&uw, pt.gamma_th).unwrap().value;
    let exact = 1.0 - (1.0 - f1) * (1.0 - f2);
    let se = est.mc_std_err.unwrap();
    assert!((est.value - exact).abs() < 3.0 * se, "{} ± {se} vs {exact}", est.value);
}

#[test]
fn standard_error_halves_with_four_times_the_samples() {
    let rf = RfChannel::Cascade(RfLinkParams::new(3, 2.0, db(8.0)).unwrap());
    let uw = EggParams::new(TABLE[0].shape, Detection::Hd, db(8.0)).unwrap();
    let targets = [(Protocol::Af, Metric::Op), (Protocol::Af, Metric::Aber), (Protocol::Df, Metric::Acc)];
    let small = estimate_metrics(&targets, &rf, &uw, &point(), &McConfig::new(250_000, 8)).unwrap();
    let large = estimate_metrics(&targets, &rf, &uw, &point(), &McConfig::new(1_000_000, 8)).unwrap();
    for (s, l) in small.iter().zip(&large) {
        let ratio = l.mc_std_err.unwrap() / s.mc_std_err.unwrap();
        assert!((ratio / 0.5 - 1.0).abs() < 0.2, "ratio {ratio}");
    }
}

#[test]
fn thread_count_does_not_change_estimates() {
    let rf = RfChannel::Cascade(RfLinkParams::new(4, 2.0, db(12.0)).unwrap());
    let uw = EggParams::new(TABLE[5].shape, Detection::Imdd, db(12.0)).unwrap();
    let targets = [
        (Protocol::Af, Metric::Op),
        (Protocol::Df, Metric::Aber),
        (Protocol::Af, Metric::Acc),
    ];
    let cfg = McConfig {
        batch: 10_000,
        ..McConfig::new(200_000, 77)
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_metrics(&targets, &rf, &uw, &point(), &cfg).unwrap())
    };
    let one = run(1);
    let many = run(4);
    for (a, b) in one.iter().zip(&many) {
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.mc_std_err.unwrap().to_bits(), b.mc_std_err.unwrap().to_bits());
    }
}

#[test]
fn rayleigh_direct_link_outage() {
    let mean = db(10.0);
    let uw = EggParams::new(TABLE[3].shape, Detection::Hd, mean).unwrap();
    let pt = point();
    let est = estimate_metric(
        Metric::Op,
        Protocol::Df,
        &RfChannel::Rayleigh { mean_snr: mean },
        &uw,
        &pt,
        &McConfig::new(1_000_000, 13),
    )
    .unwrap();
    let f1 = -(-pt.gamma_th / mean).exp_m1();
    let f2 = snr2_cdf(&uw, pt.gamma_th).unwrap().value;
    let exact = 1.0 - (1.0 - f1) * (1.0 - f2);
    assert!((est.value - exact).abs() < 3.0 * est.mc_std_err.unwrap());
}
