//! Parameter sweeps across the evaluation paths, CSV rows and the run manifest.

use std::io::{Read, Write};
use std::time::Instant;

use serde::Serialize;

use super::config_file::{to_config_text, ConfigDoc, Ties};
use crate::analytic::{ip_asymptotic, ip_closed_form, ip_lemma1, AnalyticError};
use crate::config::{db_to_linear, NetworkConfig};
use crate::montecarlo::{estimate_ip_with, EvalPath, IPEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    GammaI,
    GammaS,
    GammaSJ,
    MuD,
    Omega,
    B,
    GammaTh,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::GammaI,
        SweepParam::GammaS,
        SweepParam::GammaSJ,
        SweepParam::MuD,
        SweepParam::Omega,
        SweepParam::B,
        SweepParam::GammaTh,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::GammaI => "gamma_i",
            SweepParam::GammaS => "gamma_s",
            SweepParam::GammaSJ => "gamma_sj",
            SweepParam::MuD => "mu_d",
            SweepParam::Omega => "omega",
            SweepParam::B => "b",
            SweepParam::GammaTh => "gamma_th",
        }
    }

    pub fn parse(s: &str) -> Option<SweepParam> {
        SweepParam::ALL.iter().copied().find(|p| p.name() == s)
    }

    /// SNR-like parameters are swept in dB, Omega and b linearly.
    pub fn in_db(&self) -> bool {
        !matches!(self, SweepParam::Omega | SweepParam::B)
    }

    /// Sets the parameter, then re-applies the ties. Omega and b move all three shadowed-Rician links.
    pub fn apply(&self, cfg: &NetworkConfig, ties: &Ties, value: f64) -> NetworkConfig {
        let mut c = cfg.clone();
        let lin = if self.in_db() { db_to_linear(value) } else { value };
        match self {
            SweepParam::GammaI => c.power.gi = lin,
            SweepParam::GammaS => c.power.gs = lin,
            SweepParam::GammaSJ => c.power.gsj = lin,
            SweepParam::MuD => c.d.mu = lin,
            SweepParam::Omega => c.set_sr_all(None, Some(lin)),
            SweepParam::B => c.set_sr_all(Some(lin), None),
            SweepParam::GammaTh => c.power.gth = lin,
        }
        ties.apply(&mut c);
        c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub jammer: Vec<bool>,
    pub paths: Vec<EvalPath>,
    pub n_samples: u64,
    pub seed: u64,
}

impl SweepSpec {
    /// Parses `param=start:stop:step`; a bare `param=value` is a single point.
    pub fn parse_range(s: &str) -> Result<(SweepParam, f64, f64, f64), String> {
        let (name, range) = s.split_once('=').ok_or_else(|| format!("sweep '{s}' is not of the form param=start:stop:step"))?;
        let param = SweepParam::parse(name.trim()).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            format!("unknown sweep parameter '{name}' (one of {})", names.join(", "))
        })?;
        let nums = range
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("sweep bound '{t}' is not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        match nums[..] {
            [v] => Ok((param, v, v, 1.0)),
            [a, b, c] => Ok((param, a, b, c)),
            _ => Err(format!("sweep '{s}' needs start:stop:step")),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err("sweep bounds must be finite".into());
        }
        if self.start > self.stop {
            return Err(format!("sweep start {} exceeds stop {}", self.start, self.stop));
        }
        if self.step <= 0.0 {
            return Err(format!("sweep step must be positive, got {}", self.step));
        }
        if self.paths.is_empty() || self.jammer.is_empty() {
            return Err("sweep needs at least one path and one jammer mode".into());
        }
        if (self.stop - self.start) / self.step > 1e5 {
            return Err("sweep has more than 1e5 points".into());
        }
        Ok(())
    }

    /// Grid values in ascending order, computed from the index to avoid drift.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub jammer: bool,
    pub ip_mc: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub ip_lemma1: Option<f64>,
    pub ip_closed: Option<f64>,
    pub ip_asymptotic: Option<f64>,
    pub n: Option<u64>,
    pub seed: u64,
    pub elapsed_ms: u64,
}

pub const CSV_HEADER: [&str; 12] = [
    "param",
    "value",
    "jammer",
    "ip_mc",
    "ci_lo",
    "ci_hi",
    "ip_lemma1",
    "ip_closed",
    "ip_asymptotic",
    "n",
    "seed",
    "elapsed_ms",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PointMeta {
    pub value: f64,
    pub jammer: bool,
    /// analytic error estimates by path
    pub lemma1_error: Option<f64>,
    pub closed_error: Option<f64>,
    pub asymptotic_error: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub n_samples: u64,
    pub sweep: String,
    pub paths: Vec<String>,
    pub jammer: Vec<String>,
    pub wall_clock_ms: u64,
    pub overrides: Vec<String>,
    pub notes: Vec<String>,
    /// full resolved configuration document
    pub config: String,
    pub points: Vec<PointMeta>,
}

pub fn jammer_name(on: bool) -> &'static str {
    if on {
        "on"
    } else {
        "off"
    }
}

fn record(res: Result<IPEstimate, AnalyticError>, what: &str, meta: &mut PointMeta) -> (Option<f64>, Option<f64>) {
    match res {
        Ok(v) => (Some(v.value), Some(v.error)),
        Err(e) => {
            meta.errors.push(format!("{what}: {e}"));
            (None, None)
        }
    }
}

/// Evaluates every requested path at one configuration.
pub fn evaluate_point(
    cfg: &NetworkConfig,
    paths: &[EvalPath],
    n: u64,
    seed: u64,
    workers: Option<usize>,
    param: &str,
    value: f64,
) -> (SweepRow, PointMeta) {
    let t = Instant::now();
    let jammer = cfg.power.jammer_on;
    let mut meta = PointMeta { value, jammer, ..Default::default() };
    let mut row = SweepRow {
        param: param.to_string(),
        value,
        jammer,
        ip_mc: None,
        ci_lo: None,
        ci_hi: None,
        ip_lemma1: None,
        ip_closed: None,
        ip_asymptotic: None,
        n: None,
        seed,
        elapsed_ms: 0,
    };
    if let Err(e) = cfg.validate() {
        meta.errors.push(format!("config: {e}"));
        return (row, meta);
    }
    for path in paths {
        match path {
            EvalPath::Mc => {
                let est = estimate_ip_with(cfg, n, seed, workers);
                row.ip_mc = Some(est.value);
                row.ci_lo = Some(est.ci_low);
                row.ci_hi = Some(est.ci_high);
                row.n = Some(n);
            }
            EvalPath::Lemma1 => (row.ip_lemma1, meta.lemma1_error) = record(ip_lemma1(cfg), "lemma1", &mut meta),
            EvalPath::Closed => (row.ip_closed, meta.closed_error) = record(ip_closed_form(cfg), "closed", &mut meta),
            EvalPath::Asymptotic if jammer => {
                (row.ip_asymptotic, meta.asymptotic_error) = record(ip_asymptotic(cfg), "asymptotic", &mut meta)
            }
            EvalPath::Asymptotic => {}
        }
    }
    row.elapsed_ms = t.elapsed().as_millis() as u64;
    (row, meta)
}

/// Runs the sweep point by point; evaluator errors stay with their row.
pub fn run_sweep(
    spec: &SweepSpec,
    doc: &ConfigDoc,
    workers: Option<usize>,
) -> Result<(Vec<SweepRow>, RunManifest), String> {
    spec.validate()?;
    if let Some(p) = doc.ties.pinned().into_iter().find(|p| *p == spec.param.name()) {
        return Err(format!("sweep parameter {p} is pinned by a tie in the configuration"));
    }
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for value in spec.points() {
        for &on in &spec.jammer {
            let cfg = spec.param.apply(&doc.network.with_jammer(on), &doc.ties, value);
            let (row, meta) = evaluate_point(&cfg, &spec.paths, spec.n_samples, spec.seed, workers, spec.param.name(), value);
            rows.push(row);
            points.push(meta);
        }
    }
    let mut notes = Vec::new();
    if spec.paths.contains(&EvalPath::Asymptotic) && spec.jammer.contains(&false) {
        notes.push("asymptotic column left empty without the jammer: no large-budget limit exists there".into());
    }
    if !doc.ties.is_empty() {
        notes.push(
            "tied ratios are re-applied after every sweep step; they over-determine gamma_S, gamma_SJ, gamma_th, mu_D and \
             mu_E2 relative to the default table, and the tie wins"
                .into(),
        );
    }
    if let Some(n) = &doc.note {
        notes.push(n.clone());
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        n_samples: spec.n_samples,
        sweep: format!("{}={}:{}:{}", spec.param.name(), spec.start, spec.stop, spec.step),
        paths: spec.paths.iter().map(|p| p.name().to_string()).collect(),
        jammer: spec.jammer.iter().map(|&j| jammer_name(j).to_string()).collect(),
        wall_clock_ms: t.elapsed().as_millis() as u64,
        overrides: doc.ties.describe(),
        notes,
        config: to_config_text(doc),
        points,
    };
    Ok((rows, manifest))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.param.clone(),
            r.value.to_string(),
            jammer_name(r.jammer).to_string(),
            opt(r.ip_mc),
            opt(r.ci_lo),
            opt(r.ci_hi),
            opt(r.ip_lemma1),
            opt(r.ip_closed),
            opt(r.ip_asymptotic),
            opt(r.n),
            r.seed.to_string(),
            r.elapsed_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, String> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(format!("unexpected CSV header: {}", header.iter().collect::<Vec<_>>().join(",")));
    }
    let num = |s: &str, line: usize| -> Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| format!("line {line}: '{s}' is not a number"))
        }
    };
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let f = |k: usize| rec.get(k).unwrap_or("");
        let jammer = match f(2) {
            "on" => true,
            "off" => false,
            other => return Err(format!("line {line}: jammer must be on or off, got '{other}'")),
        };
        rows.push(SweepRow {
            param: f(0).to_string(),
            value: num(f(1), line)?.ok_or(format!("line {line}: missing value"))?,
            jammer,
            ip_mc: num(f(3), line)?,
            ci_lo: num(f(4), line)?,
            ci_hi: num(f(5), line)?,
            ip_lemma1: num(f(6), line)?,
            ip_closed: num(f(7), line)?,
            ip_asymptotic: num(f(8), line)?,
            n: num(f(9), line)?.map(|v| v as u64),
            seed: num(f(10), line)?.map(|v| v as u64).unwrap_or(0),
            elapsed_ms: num(f(11), line)?.map(|v| v as u64).unwrap_or(0),
        });
    }
    Ok(rows)
}
