//! Configuration-driven parameter sweeps.
//!
//! A sweep file is TOML with one `[[sweep]]` table per sweep. Inputs are in
//! dB; conversion to linear scale happens once, when the run plan is built.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::e2e::{Protocol, RelayConfig};
use crate::error::{Error, Result};
use crate::mc::{estimate_metric, McConfig, McPoint, RfChannel};
use crate::metrics::{Method, Metric, MetricResult, ModulationParams, Scenario};
use crate::report::TermRecord;
use crate::rf_link::{fit_kg, RfLinkFit, RfLinkParams};
use crate::uwoc::{lookup_key, Detection, EggParams, EggShape};

pub const DEFAULT_GAMMA_TH_DB: f64 = 2.0;
pub const DEFAULT_M: f64 = 2.0;
pub const DEFAULT_GAIN: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrAxis {
    /// Both hops share the swept mean SNR.
    Joint,
    /// Only the RF hop is swept; the optical hop sits at `fixed_snr_db`.
    Rf,
    /// Only the optical hop is swept; the RF hop sits at `fixed_snr_db`.
    Uwoc,
}

impl std::fmt::Display for SnrAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SnrAxis::Joint => "joint",
            SnrAxis::Rf => "rf",
            SnrAxis::Uwoc => "uwoc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomWater {
    pub label: String,
    #[serde(flatten)]
    pub shape: EggShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub samples: u64,
    pub seed: u64,
    #[serde(default = "default_batch")]
    pub batch: u64,
}

fn default_batch() -> u64 {
    1 << 16
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 1,
            batch: default_batch(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub metric: Metric,
    pub protocol: Protocol,
    pub detection: Detection,
    /// Numbers of reflecting elements.
    #[serde(default)]
    pub n: Vec<u32>,
    /// Also evaluate the direct Rayleigh link without the surface.
    #[serde(default)]
    pub baseline: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// Table row keys such as `"thermal:2.4:0.05"` or `"salty:7.1"`.
    #[serde(default)]
    pub water: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub custom_water: Vec<CustomWater>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_th_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationParams>,
    pub snr_axis: SnrAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_snr_db: Option<f64>,
    pub points: Vec<f64>,
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub sweep: Vec<SweepSpec>,
}

fn cfg_err(path: String, message: impl Into<String>) -> Error {
    Error::Config {
        path,
        message: message.into(),
    }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err("<file>".into(), e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err("<file>".into(), e.to_string()))
    }

    /// CLI overrides: replace every sweep's method list and/or MC seed.
    pub fn override_with(&mut self, methods: Option<&[Method]>, seed: Option<u64>) {
        for s in &mut self.sweep {
            if let Some(m) = methods {
                s.methods = m.to_vec();
            }
            if let Some(seed) = seed {
                s.mc.get_or_insert_with(McSection::default).seed = seed;
            }
        }
    }

    pub fn plan(&self) -> Result<Vec<PlanPoint>> {
        if self.sweep.is_empty() {
            return Err(cfg_err("sweep".into(), "no [[sweep]] tables"));
        }
        let mut out = Vec::new();
        for (i, s) in self.sweep.iter().enumerate() {
            s.plan_into(&format!("sweep[{i}]"), &mut out)?;
        }
        Ok(out)
    }
}

/// RF hop of one plan point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RfSetup {
    Ris { n: u32, m: f64 },
    Baseline,
}

/// One fully resolved evaluation: linear-scale parameters and one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanPoint {
    pub sweep: String,
    pub metric: Metric,
    pub protocol: Protocol,
    pub detection: Detection,
    pub rf: RfSetup,
    pub water: String,
    pub shape: EggShape,
    pub gain: Option<f64>,
    pub gamma_th_db: Option<f64>,
    pub modulation: Option<ModulationParams>,
    pub snr_axis: SnrAxis,
    pub snr_db: f64,
    pub mean_snr_rf: f64,
    pub mean_snr_uwoc: f64,
    pub method: Method,
    pub mc: Option<McConfig>,
}

impl SweepSpec {
    fn plan_into(&self, path: &str, out: &mut Vec<PlanPoint>) -> Result<()> {
        let p = |f: &str| format!("{path}.{f}");
        if self.name.trim().is_empty() {
            return Err(cfg_err(p("name"), "must not be empty"));
        }
        if self.points.is_empty() {
            return Err(cfg_err(p("points"), "must list at least one SNR value in dB"));
        }
        if let Some(k) = self.points.iter().position(|x| !x.is_finite()) {
            return Err(cfg_err(format!("{path}.points[{k}]"), "must be finite"));
        }
        if self.methods.is_empty() {
            return Err(cfg_err(p("methods"), "must list at least one method"));
        }
        if self.metric == Metric::Acc && self.methods.contains(&Method::Asymptotic) {
            return Err(cfg_err(p("methods"), "capacity has no asymptotic expression"));
        }
        if self.n.is_empty() && !self.baseline {
            return Err(cfg_err(p("n"), "list element counts or set baseline = true"));
        }
        if let Some(k) = self.n.iter().position(|&n| n == 0) {
            return Err(cfg_err(format!("{path}.n[{k}]"), "must be at least 1"));
        }
        let m = self.m.unwrap_or(DEFAULT_M);
        if !(m >= 0.5 && m.is_finite()) {
            return Err(cfg_err(p("m"), format!("Nakagami m must be >= 0.5, got {m}")));
        }
        let gain = match (self.protocol, self.gain) {
            (Protocol::Af, g) => {
                let g = g.unwrap_or(DEFAULT_GAIN);
                if !(g > 0.0 && g.is_finite()) {
                    return Err(cfg_err(p("gain"), format!("must be positive, got {g}")));
                }
                Some(g)
            }
            (Protocol::Df, Some(_)) => return Err(cfg_err(p("gain"), "only meaningful for protocol af")),
            (Protocol::Df, None) => None,
        };
        let gamma_th_db = match (self.metric, self.gamma_th_db) {
            (Metric::Op, g) => Some(g.unwrap_or(DEFAULT_GAMMA_TH_DB)),
            (_, Some(_)) => return Err(cfg_err(p("gamma_th_db"), "only meaningful for metric op")),
            (_, None) => None,
        };
        if let Some(g) = gamma_th_db {
            if !g.is_finite() {
                return Err(cfg_err(p("gamma_th_db"), "must be finite"));
            }
        }
        let modulation = match (self.metric, self.modulation) {
            (Metric::Aber, m) => {
                let m = m.unwrap_or(ModulationParams::BPSK);
                ModulationParams::new(m.p, m.q).map_err(|e| cfg_err(p("modulation"), e.to_string()))?;
                Some(m)
            }
            (_, Some(_)) => return Err(cfg_err(p("modulation"), "only meaningful for metric aber")),
            (_, None) => None,
        };
        match (self.snr_axis, self.fixed_snr_db) {
            (SnrAxis::Joint, Some(_)) => {
                return Err(cfg_err(p("fixed_snr_db"), "not used when snr_axis = \"joint\""))
            }
            (SnrAxis::Rf | SnrAxis::Uwoc, None) => {
                return Err(cfg_err(p("fixed_snr_db"), "required when only one hop is swept"))
            }
            (_, Some(f)) if !f.is_finite() => return Err(cfg_err(p("fixed_snr_db"), "must be finite")),
            _ => {}
        }
        let mut waters = Vec::new();
        for (k, key) in self.water.iter().enumerate() {
            let shape = lookup_key(key).map_err(|e| cfg_err(format!("{path}.water[{k}]"), e.to_string()))?;
            waters.push((key.clone(), shape));
        }
        for (k, c) in self.custom_water.iter().enumerate() {
            c.shape
                .validate()
                .map_err(|e| cfg_err(format!("{path}.custom_water[{k}]"), e.to_string()))?;
            waters.push((c.label.clone(), c.shape));
        }
        if waters.is_empty() {
            return Err(cfg_err(p("water"), "list at least one table row or custom_water entry"));
        }
        let mc = if self.methods.contains(&Method::MonteCarlo) {
            let s = self.mc.unwrap_or_default();
            let cfg = McConfig {
                samples: s.samples,
                seed: s.seed,
                batch: s.batch,
            };
            cfg.validate().map_err(|e| cfg_err(p("mc"), e.to_string()))?;
            Some(cfg)
        } else {
            None
        };
        let mut rfs: Vec<RfSetup> = Vec::new();
        if self.baseline {
            rfs.push(RfSetup::Baseline);
        }
        rfs.extend(self.n.iter().map(|&n| RfSetup::Ris { n, m }));
        for rf in &rfs {
            for (label, shape) in &waters {
                for &snr_db in &self.points {
                    let (r, u) = match self.snr_axis {
                        SnrAxis::Joint => (snr_db, snr_db),
                        SnrAxis::Rf => (snr_db, self.fixed_snr_db.unwrap_or(0.0)),
                        SnrAxis::Uwoc => (self.fixed_snr_db.unwrap_or(0.0), snr_db),
                    };
                    for &method in &self.methods {
                        out.push(PlanPoint {
                            sweep: self.name.clone(),
                            metric: self.metric,
                            protocol: self.protocol,
                            detection: self.detection,
                            rf: *rf,
                            water: label.clone(),
                            shape: *shape,
                            gain,
                            gamma_th_db,
                            modulation,
                            snr_axis: self.snr_axis,
                            snr_db,
                            mean_snr_rf: db(r),
                            mean_snr_uwoc: db(u),
                            method,
                            mc: mc.filter(|_| method == Method::MonteCarlo).map(|c| McConfig {
                                seed: point_seed(c.seed, out.len() as u64),
                                ..c
                            }),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Decorrelates the Monte-Carlo streams of distinct plan points.
fn point_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Result of one plan point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(flatten)]
    pub point: PlanPoint,
    pub value: Option<f64>,
    pub std_err: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub diagnostics: Vec<TermRecord>,
}

impl PlanPoint {
    pub fn rf_fit(&self) -> Result<RfLinkFit> {
        match self.rf {
            RfSetup::Ris { n, m } => fit_kg(&RfLinkParams::new(n, m, self.mean_snr_rf)?),
            RfSetup::Baseline => Ok(RfLinkFit::direct_rayleigh(self.mean_snr_rf)),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let relay = match self.protocol {
            Protocol::Af => RelayConfig::af(self.gain.unwrap_or(DEFAULT_GAIN))?,
            Protocol::Df => RelayConfig::df(),
        };
        Ok(Scenario {
            rf: self.rf_fit()?,
            uw: EggParams::new(self.shape, self.detection, self.mean_snr_uwoc)?,
            relay,
            gamma_th: db(self.gamma_th_db.unwrap_or(DEFAULT_GAMMA_TH_DB)),
            modulation: self.modulation.unwrap_or(ModulationParams::BPSK),
        })
    }

    pub fn evaluate(&self) -> Result<MetricResult> {
        let sc = self.scenario()?;
        match self.method {
            Method::MonteCarlo => {
                let rf = match self.rf {
                    RfSetup::Ris { n, m } => RfChannel::Cascade(RfLinkParams::new(n, m, self.mean_snr_rf)?),
                    RfSetup::Baseline => RfChannel::Rayleigh {
                        mean_snr: self.mean_snr_rf,
                    },
                };
                let point = McPoint {
                    gamma_th: sc.gamma_th,
                    modulation: sc.modulation,
                    gain: sc.relay.gain_const,
                };
                let cfg = self.mc.unwrap_or_else(|| McConfig::new(1_000_000, 1));
                estimate_metric(self.metric, self.protocol, &rf, &sc.uw, &point, &cfg)
            }
            m => sc.evaluate(self.metric, m),
        }
    }

    fn run(&self) -> Row {
        let (value, std_err, converged, error, warnings, diagnostics) = match self.evaluate() {
            Ok(r) => {
                let conv = r.converged();
                (Some(r.value), r.mc_std_err, conv, None, r.warnings, r.diagnostics)
            }
            Err(e) => (None, None, false, Some(e.to_string()), Vec::new(), Vec::new()),
        };
        Row {
            point: self.clone(),
            value,
            std_err,
            converged,
            error,
            warnings,
            diagnostics,
        }
    }
}

/// Evaluates every plan point (in parallel) and returns rows in plan order.
pub fn run_plan(plan: &[PlanPoint]) -> Vec<Row> {
    plan.par_iter().map(PlanPoint::run).collect()
}

pub fn run_sweep(file: &SweepFile) -> Result<Vec<Row>> {
    Ok(run_plan(&file.plan()?))
}

pub const CSV_HEADER: [&str; 17] = [
    "param_sweep",
    "param_protocol",
    "param_detection",
    "param_n",
    "param_m",
    "param_water",
    "param_gain",
    "param_gamma_th_db",
    "param_p",
    "param_q",
    "param_snr_axis",
    "snr_db",
    "method",
    "value",
    "std_err",
    "converged",
    "error",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidParams(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let p = &r.point;
        let (n, m) = match p.rf {
            RfSetup::Ris { n, m } => (n.to_string(), m.to_string()),
            RfSetup::Baseline => ("none".to_string(), String::new()),
        };
        w.write_record([
            p.sweep.clone(),
            p.protocol.to_string(),
            p.detection.to_string(),
            n,
            m,
            p.water.clone(),
            opt(p.gain),
            opt(p.gamma_th_db),
            opt(p.modulation.map(|m| m.p)),
            opt(p.modulation.map(|m| m.q)),
            p.snr_axis.to_string(),
            p.snr_db.to_string(),
            p.method.to_string(),
            opt(r.value),
            opt(r.std_err),
            r.converged.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParams(format!("csv output failed: {e}")))
}

pub fn write_json<W: Write>(rows: &[Row], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows).map_err(|e| Error::InvalidParams(format!("json output failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[[sweep]]
name = "fig2"
metric = "op"
protocol = "af"
detection = "imdd"
n = [2, 4]
baseline = true
water = ["thermal:2.4:0.05", "thermal:4.7:0.05"]
snr_axis = "joint"
points = [0.0, 10.0]
methods = ["exact", "monte_carlo"]

[sweep.mc]
samples = 1000
seed = 9
"#;

    #[test]
    fn plan_shape_and_defaults() {
        let f = SweepFile::parse(SAMPLE).unwrap();
        let plan = f.plan().unwrap();
        assert_eq!(plan.len(), 3 * 2 * 2 * 2);
        assert_eq!(plan[0].rf, RfSetup::Baseline);
        assert_eq!(plan[0].gamma_th_db, Some(DEFAULT_GAMMA_TH_DB));
        assert_eq!(plan[0].gain, Some(DEFAULT_GAIN));
        assert!((plan[2].mean_snr_rf - 10.0).abs() < 1e-12);
        assert!(plan[0].mc.is_none() && plan[1].mc.is_some());
    }

    #[test]
    fn validation_names_fields() {
        let bad = SAMPLE.replace("points = [0.0, 10.0]", "points = []");
        let e = SweepFile::parse(&bad).unwrap().plan().unwrap_err();
        assert!(matches!(&e, Error::Config { path, .. } if path == "sweep[0].points"), "{e}");
        let bad = SAMPLE.replace("metric = \"op\"", "metric = \"acc\"\ngamma_th_db = 3.0");
        let e = SweepFile::parse(&bad).unwrap().plan().unwrap_err();
        assert!(e.to_string().starts_with("sweep[0].gamma_th_db"), "{e}");
        let bad = SAMPLE.replace("snr_axis = \"joint\"", "snr_axis = \"rf\"");
        let e = SweepFile::parse(&bad).unwrap().plan().unwrap_err();
        assert!(e.to_string().starts_with("sweep[0].fixed_snr_db"), "{e}");
        let bad = SAMPLE.replace("thermal:4.7:0.05", "thermal:9:9");
        let e = SweepFile::parse(&bad).unwrap().plan().unwrap_err();
        assert!(e.to_string().starts_with("sweep[0].water[1]"), "{e}");
        assert!(SweepFile::parse("[[sweep]]\nname = 3").is_err());
    }

    #[test]
    fn overrides_apply_everywhere() {
        let mut f = SweepFile::parse(SAMPLE).unwrap();
        f.override_with(Some(&[Method::Exact]), Some(42));
        assert!(f.plan().unwrap().iter().all(|p| p.method == Method::Exact));
        assert_eq!(f.sweep[0].mc.unwrap().seed, 42);
    }
}
