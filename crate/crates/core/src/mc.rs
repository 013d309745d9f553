//! Monte-Carlo estimation of every metric by sampling the physical channel
//! chain: co-phased RIS cascade on the RF hop, exponential/generalized-Gamma
//! irradiance on the optical hop.
//!
//! Samples are generated in fixed batches; batch `b` draws from its own
//! ChaCha8 stream, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::e2e::Protocol;
use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricResult, ModulationParams};
use crate::rf_link::{RfLinkFit, RfLinkParams};
use crate::uwoc::EggParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Samples per batch (the unit of parallel work and of RNG streams).
    pub batch: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batch: 1 << 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.batch == 0 {
            return Err(Error::InvalidParams("samples and batch must be positive".into()));
        }
        Ok(())
    }

    fn batches(&self) -> Vec<(u64, u64)> {
        let n = self.samples.div_ceil(self.batch);
        (0..n)
            .map(|b| (b, self.batch.min(self.samples - b * self.batch)))
            .collect()
    }

    fn rng(&self, batch: u64, kind: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream((batch << 2) | kind);
        r
    }
}

/// What generates `γ_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RfChannel {
    /// `(Σ α_i β_i)² γ̄_1`, Nakagami-m `α_i`, Rayleigh `β_i`.
    Cascade(RfLinkParams),
    /// Direct Rayleigh link without the surface.
    Rayleigh { mean_snr: f64 },
    /// The fitted squared-K_G law itself (product of two Gamma variates).
    Fitted(RfLinkFit),
}

enum RfSampler {
    Cascade { n: u32, naka: Gamma<f64>, mean_snr: f64 },
    Rayleigh { mean_snr: f64 },
    Fitted { x: Gamma<f64>, y: Option<Gamma<f64>>, inv_beta: f64 },
}

fn gamma_dist(shape: f64, scale: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, scale).map_err(|e| Error::InvalidParams(format!("gamma law ({shape}, {scale}): {e}")))
}

impl RfSampler {
    fn new(rf: &RfChannel) -> Result<Self> {
        Ok(match *rf {
            RfChannel::Cascade(p) => {
                p.validate()?;
                RfSampler::Cascade {
                    n: p.n,
                    naka: gamma_dist(p.m, 1.0 / p.m)?,
                    mean_snr: p.mean_snr,
                }
            }
            RfChannel::Rayleigh { mean_snr } => {
                if !(mean_snr > 0.0 && mean_snr.is_finite()) {
                    return Err(Error::InvalidParams(format!("mean SNR must be positive, got {mean_snr}")));
                }
                RfSampler::Rayleigh { mean_snr }
            }
            RfChannel::Fitted(fit) => {
                let shapes = fit.shapes();
                RfSampler::Fitted {
                    x: gamma_dist(shapes[0], 1.0)?,
                    y: shapes.get(1).map(|&s| gamma_dist(s, 1.0)).transpose()?,
                    inv_beta: 1.0 / fit.beta(),
                }
            }
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            RfSampler::Cascade { n, naka, mean_snr } => {
                let mut z = 0.0;
                for _ in 0..*n {
                    let alpha: f64 = naka.sample(rng).sqrt();
                    let beta: f64 = Exp1.sample(rng);
                    z += alpha * beta.sqrt();
                }
                z * z * mean_snr
            }
            RfSampler::Rayleigh { mean_snr } => {
                let e: f64 = Exp1.sample(rng);
                e * mean_snr
            }
            RfSampler::Fitted { x, y, inv_beta } => {
                let a = x.sample(rng);
                let b = y.as_ref().map_or(1.0, |d| d.sample(rng));
                a * b * inv_beta
            }
        }
    }
}

struct UwocSampler {
    omega: f64,
    lambda: f64,
    a: f64,
    b: f64,
    c: f64,
    r: f64,
    mu_r: f64,
    /// `Gamma(a + 1)` for the small-shape log transform, else `Gamma(a)`.
    g: Gamma<f64>,
    small: bool,
}

impl UwocSampler {
    fn new(uw: &EggParams) -> Result<Self> {
        uw.shape().validate()?;
        let small = uw.a < 1.0;
        Ok(Self {
            omega: uw.omega,
            lambda: uw.lambda,
            a: uw.a,
            b: uw.b,
            c: uw.c,
            r: uw.r(),
            mu_r: uw.mu_r,
            g: gamma_dist(if small { uw.a + 1.0 } else { uw.a }, 1.0)?,
            small,
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let ln_i = if rng.random::<f64>() < self.omega {
            let e: f64 = Exp1.sample(rng);
            self.lambda.ln() + e.ln()
        } else {
            // G = G' U^{1/a} with G' ~ Gamma(a+1) keeps tiny shapes in log space
            let ln_g = if self.small {
                let u: f64 = 1.0 - rng.random::<f64>();
                self.g.sample(rng).ln() + u.ln() / self.a
            } else {
                self.g.sample(rng).ln()
            };
            self.b.ln() + ln_g / self.c
        };
        self.mu_r * (self.r * ln_i).exp()
    }
}

fn draw_all<S: Sync>(cfg: &McConfig, kind: u64, sampler: &S, draw: impl Fn(&S, &mut ChaCha8Rng) -> f64 + Sync) -> Vec<f64> {
    let parts: Vec<Vec<f64>> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = cfg.rng(b, kind);
            (0..len).map(|_| draw(sampler, &mut rng)).collect()
        })
        .collect();
    parts.concat()
}

/// All `cfg.samples` draws of `γ_1`, in batch order.
pub fn sample_gamma1(rf: &RfChannel, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let s = RfSampler::new(rf)?;
    Ok(draw_all(cfg, 1, &s, RfSampler::draw))
}

/// All `cfg.samples` draws of `γ_2`, in batch order.
pub fn sample_gamma2(uw: &EggParams, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let s = UwocSampler::new(uw)?;
    Ok(draw_all(cfg, 2, &s, UwocSampler::draw))
}

/// Operating point of the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub gamma_th: f64,
    pub modulation: ModulationParams,
    /// AF relay gain constant; required when any target uses AF.
    pub gain: Option<f64>,
}

/// Conditional BER `Γ(p, qγ)/(2Γ(p))`.
fn ber(m: &ModulationParams, g: f64) -> f64 {
    let x = m.q * g;
    if x <= 0.0 {
        0.5
    } else if !x.is_finite() {
        0.0
    } else {
        0.5 * gamma_ur(m.p, x)
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

/// Estimates several (protocol, metric) pairs from one shared sample set.
///
/// DF error rate uses the decode-and-forward chain: an end-to-end error
/// occurs when exactly one hop errs, `P_1(1 − P_2) + P_2(1 − P_1)` given the
/// two SNRs. The remaining estimators apply their kernel to `γ^AF` or
/// `γ^DF = min(γ_1, γ_2)`; capacity uses `(1/2) log2(1 + τγ)`.
pub fn estimate_metrics(
    targets: &[(Protocol, Metric)],
    rf: &RfChannel,
    uw: &EggParams,
    point: &McPoint,
    cfg: &McConfig,
) -> Result<Vec<MetricResult>> {
    cfg.validate()?;
    let gain = if targets.iter().any(|t| t.0 == Protocol::Af) {
        match point.gain {
            Some(c) if c > 0.0 && c.is_finite() => c,
            _ => return Err(Error::InvalidParams("AF estimation requires a positive gain constant".into())),
        }
    } else {
        1.0
    };
    if !(point.gamma_th > 0.0) && targets.iter().any(|t| t.1 == Metric::Op) {
        return Err(Error::InvalidParams(format!("threshold must be positive, got {}", point.gamma_th)));
    }
    let s1 = RfSampler::new(rf)?;
    let s2 = UwocSampler::new(uw)?;
    let tau = uw.detection.tau();
    let m = point.modulation;
    let partials: Vec<Vec<Moments>> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, len)| {
            let mut r1 = cfg.rng(b, 1);
            let mut r2 = cfg.rng(b, 2);
            let mut acc = vec![Moments::default(); targets.len()];
            for _ in 0..len {
                let g1 = s1.draw(&mut r1);
                let g2 = s2.draw(&mut r2);
                let af = g1 * g2 / (g2 + gain);
                let df = g1.min(g2);
                for (k, &(protocol, metric)) in targets.iter().enumerate() {
                    let x = match (protocol, metric) {
                        (Protocol::Af, Metric::Op) => (af < point.gamma_th) as u8 as f64,
                        (Protocol::Df, Metric::Op) => (df < point.gamma_th) as u8 as f64,
                        (Protocol::Af, Metric::Aber) => ber(&m, af),
                        (Protocol::Df, Metric::Aber) => {
                            let (p1, p2) = (ber(&m, g1), ber(&m, g2));
                            p1 * (1.0 - p2) + p2 * (1.0 - p1)
                        }
                        (Protocol::Af, Metric::Acc) => 0.5 * (tau * af).ln_1p() / std::f64::consts::LN_2,
                        (Protocol::Df, Metric::Acc) => 0.5 * (tau * df).ln_1p() / std::f64::consts::LN_2,
                    };
                    acc[k].sum += x;
                    acc[k].sum_sq += x * x;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); targets.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.sum += p.sum;
            t.sum_sq += p.sum_sq;
        }
    }
    let n = cfg.samples as f64;
    Ok(targets
        .iter()
        .zip(&total)
        .map(|(&(protocol, metric), t)| {
            let mean = t.sum / n;
            let var = if cfg.samples > 1 {
                ((t.sum_sq - t.sum * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            let mut warnings = Vec::new();
            if mean < 10.0 / n {
                let msg = format!(
                    "{protocol} {metric}: estimate {mean:e} is below 10/samples; rare-event regime, increase samples"
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
            MetricResult::monte_carlo(mean, (var / n).sqrt(), warnings)
        })
        .collect())
}

/// Single-metric convenience wrapper around [`estimate_metrics`].
pub fn estimate_metric(
    metric: Metric,
    protocol: Protocol,
    rf: &RfChannel,
    uw: &EggParams,
    point: &McPoint,
    cfg: &McConfig,
) -> Result<MetricResult> {
    Ok(estimate_metrics(&[(protocol, metric)], rf, uw, point, cfg)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uwoc::{Detection, TABLE};

    #[test]
    fn batches_cover_samples() {
        let cfg = McConfig {
            samples: 10,
            seed: 1,
            batch: 4,
        };
        assert_eq!(cfg.batches(), vec![(0, 4), (1, 4), (2, 2)]);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let rf = RfChannel::Cascade(RfLinkParams::new(3, 2.0, 10.0).unwrap());
        let cfg = McConfig {
            samples: 5000,
            seed: 7,
            batch: 512,
        };
        let a = sample_gamma1(&rf, &cfg).unwrap();
        assert_eq!(a, sample_gamma1(&rf, &cfg).unwrap());
        let b = sample_gamma1(&rf, &McConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, b);
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn small_shape_gg_stays_positive() {
        let uw = EggParams::new(TABLE[8].shape, Detection::Imdd, 100.0).unwrap();
        let s = sample_gamma2(&uw, &McConfig::new(20_000, 3)).unwrap();
        assert!(s.iter().all(|&x| x >= 0.0 && x.is_finite()));
    }

    #[test]
    fn empty_event_warns() {
        let rf = RfChannel::Cascade(RfLinkParams::new(2, 2.0, 1e6).unwrap());
        let uw = EggParams::new(TABLE[0].shape, Detection::Hd, 1e6).unwrap();
        let point = McPoint {
            gamma_th: 1e-12,
            modulation: ModulationParams::BPSK,
            gain: Some(1.5),
        };
        let r = estimate_metric(Metric::Op, Protocol::Af, &rf, &uw, &point, &McConfig::new(10_000, 1)).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.mc_std_err, Some(0.0));
    }
}
