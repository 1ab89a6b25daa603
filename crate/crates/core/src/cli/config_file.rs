//! Flat dotted-key configuration documents.
//!
//! Every key is optional and defaults to the simulation table. SNR-like values accept either a
//! `_db` key or a linear key (not both). `tie.*` keys pin ratios to gamma_I and are re-applied
//! whenever a sweep moves a parameter.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::channels::{OpticalLinkParams, RayleighGainParams, ShadowedRicianParams};
use crate::config::{db_to_linear, linear_to_db, NetworkConfig};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{key}: {msg}")]
    Key { key: String, msg: String },
}

fn key_err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Key { key: key.to_string(), msg: msg.into() }
}

/// Ratios held fixed relative to gamma_I.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ties {
    /// gamma_I / gamma_S
    pub sigma_s: Option<f64>,
    /// gamma_I / gamma_SJ
    pub sigma_sj: Option<f64>,
    /// gamma_th / gamma_I
    pub eps_i: Option<f64>,
    /// gamma_S / mu_D and gamma_S / mu_E2
    pub rho_d: Option<f64>,
    pub rho_e2: Option<f64>,
}

impl Ties {
    pub fn is_empty(&self) -> bool {
        *self == Ties::default()
    }

    pub fn apply(&self, cfg: &mut NetworkConfig) {
        let gi = cfg.power.gi;
        if let Some(s) = self.sigma_s {
            cfg.power.gs = gi / s;
        }
        if let Some(s) = self.sigma_sj {
            cfg.power.gsj = gi / s;
        }
        if let Some(e) = self.eps_i {
            cfg.power.gth = e * gi;
        }
        if let Some(r) = self.rho_d {
            cfg.d.mu = cfg.power.gs / r;
        }
        if let Some(r) = self.rho_e2 {
            cfg.e2.mu = cfg.power.gs / r;
        }
    }

    /// Sweep parameters a tie overwrites.
    pub fn pinned(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.sigma_s.is_some() {
            out.push("gamma_s");
        }
        if self.sigma_sj.is_some() {
            out.push("gamma_sj");
        }
        if self.eps_i.is_some() {
            out.push("gamma_th");
        }
        if self.rho_d.is_some() {
            out.push("mu_d");
        }
        out
    }

    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in [
            ("sigma_s", self.sigma_s),
            ("sigma_sj", self.sigma_sj),
            ("eps_i", self.eps_i),
            ("rho_d", self.rho_d),
            ("rho_e2", self.rho_e2),
        ] {
            if let Some(v) = v {
                out.push(format!("tie.{k} = {v}"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigDoc {
    /// ties already applied
    pub network: NetworkConfig,
    pub ties: Ties,
    pub name: Option<String>,
    pub note: Option<String>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn number(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = match v {
        toml::Value::Float(f) => *f,
        toml::Value::Integer(i) => *i as f64,
        _ => return Err(key_err(key, "expected a number")),
    };
    if !x.is_finite() {
        return Err(key_err(key, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = number(key, v)?;
    if x <= 0.0 {
        return Err(key_err(key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn integer(key: &str, v: &toml::Value, what: &str) -> Result<u32, ConfigError> {
    let x = number(key, v)?;
    if x != x.round() || x < 1.0 || x > u32::MAX as f64 {
        return Err(key_err(key, format!("{what} must be a positive integer, got {x}")));
    }
    Ok(x as u32)
}

fn text(key: &str, v: &toml::Value) -> Result<String, ConfigError> {
    v.as_str().map(str::to_string).ok_or_else(|| key_err(key, "expected a string"))
}

const SR_LINKS: [&str; 3] = ["SR", "SE1", "SJE1"];
const OPTICAL_LINKS: [&str; 2] = ["D", "E2"];

/// A value given in dB under `<key>_db` or linearly under `<key>`.
fn snr_value(map: &BTreeMap<String, toml::Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    let db_key = format!("{key}_db");
    match (map.get(key), map.get(&db_key)) {
        (Some(_), Some(_)) => Err(key_err(&db_key, format!("give either {key} or {db_key}, not both"))),
        (Some(v), None) => positive(key, v).map(Some),
        (None, Some(v)) => number(&db_key, v).map(|db| Some(db_to_linear(db))),
        (None, None) => Ok(None),
    }
}

fn known_keys() -> Vec<String> {
    let mut k: Vec<String> = ["gamma_s", "gamma_sj", "gamma_i", "gamma_th"]
        .iter()
        .flat_map(|n| [format!("power.{n}"), format!("power.{n}_db")])
        .collect();
    k.push("power.jammer".into());
    k.extend(["SP", "SJP"].iter().map(|l| format!("rayleigh.{l}.lambda")));
    for l in SR_LINKS {
        k.extend(["b", "m", "omega"].iter().map(|f| format!("sr.{l}.{f}")));
    }
    for l in OPTICAL_LINKS {
        k.extend(["alpha", "beta", "xi", "mu", "mu_db", "r"].iter().map(|f| format!("optical.{l}.{f}")));
    }
    k.extend(["sigma_s", "sigma_sj", "eps_i", "rho_d", "rho_e2"].iter().map(|f| format!("tie.{f}")));
    k.extend(["meta.name".to_string(), "meta.note".to_string()]);
    k
}

pub fn parse_document(src: &str) -> Result<ConfigDoc, ConfigError> {
    let table: toml::Table = src.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1).unwrap_or(0);
        ConfigError::Parse { line, msg: e.message().to_string() }
    })?;
    let mut map = BTreeMap::new();
    flatten("", &table, &mut map);
    let known = known_keys();
    if let Some(k) = map.keys().find(|k| !known.contains(k)) {
        return Err(key_err(k, "unknown key"));
    }

    let mut cfg = NetworkConfig::defaults(true);
    if let Some(v) = snr_value(&map, "power.gamma_s")? {
        cfg.power.gs = v;
    }
    if let Some(v) = snr_value(&map, "power.gamma_sj")? {
        cfg.power.gsj = v;
    }
    if let Some(v) = snr_value(&map, "power.gamma_i")? {
        cfg.power.gi = v;
    }
    if let Some(v) = snr_value(&map, "power.gamma_th")? {
        cfg.power.gth = v;
    }
    if let Some(v) = map.get("power.jammer") {
        cfg.power.jammer_on = v.as_bool().ok_or_else(|| key_err("power.jammer", "expected true or false"))?;
    }
    for (l, slot) in [("SP", &mut cfg.sp), ("SJP", &mut cfg.sjp)] {
        let key = format!("rayleigh.{l}.lambda");
        if let Some(v) = map.get(&key) {
            *slot = RayleighGainParams::new(positive(&key, v)?).map_err(|e| key_err(&key, e))?;
        }
    }
    for (l, slot) in SR_LINKS.iter().zip([&mut cfg.sr, &mut cfg.se1, &mut cfg.sje1]) {
        let k = |f: &str| format!("sr.{l}.{f}");
        let b = map.get(&k("b")).map(|v| positive(&k("b"), v)).transpose()?.unwrap_or(slot.b);
        let m = map.get(&k("m")).map(|v| integer(&k("m"), v, "shaping parameter m")).transpose()?.unwrap_or(slot.m);
        let o = map.get(&k("omega")).map(|v| positive(&k("omega"), v)).transpose()?.unwrap_or(slot.omega);
        *slot = ShadowedRicianParams::new(b, m, o).map_err(|e| key_err(&format!("sr.{l}"), e))?;
    }
    for (l, slot) in OPTICAL_LINKS.iter().zip([&mut cfg.d, &mut cfg.e2]) {
        let k = |f: &str| format!("optical.{l}.{f}");
        let a = map.get(&k("alpha")).map(|v| positive(&k("alpha"), v)).transpose()?.unwrap_or(slot.alpha);
        let b = map.get(&k("beta")).map(|v| positive(&k("beta"), v)).transpose()?.unwrap_or(slot.beta);
        let xi = map.get(&k("xi")).map(|v| positive(&k("xi"), v)).transpose()?.unwrap_or(slot.xi);
        let mu = snr_value(&map, &k("mu"))?.unwrap_or(slot.mu);
        let r = map.get(&k("r")).map(|v| integer(&k("r"), v, "detection index r")).transpose()?.unwrap_or(slot.r);
        *slot = OpticalLinkParams::new(a, b, xi, mu, r).map_err(|e| key_err(&format!("optical.{l}"), e))?;
    }

    let tie = |f: &str| -> Result<Option<f64>, ConfigError> {
        let key = format!("tie.{f}");
        map.get(&key).map(|v| positive(&key, v)).transpose()
    };
    let ties = Ties {
        sigma_s: tie("sigma_s")?,
        sigma_sj: tie("sigma_sj")?,
        eps_i: tie("eps_i")?,
        rho_d: tie("rho_d")?,
        rho_e2: tie("rho_e2")?,
    };
    ties.apply(&mut cfg);
    cfg.validate().map_err(|e| key_err("power", e))?;
    Ok(ConfigDoc {
        network: cfg,
        ties,
        name: map.get("meta.name").map(|v| text("meta.name", v)).transpose()?,
        note: map.get("meta.note").map(|v| text("meta.note", v)).transpose()?,
    })
}

pub fn parse_config(src: &str) -> Result<NetworkConfig, ConfigError> {
    Ok(parse_document(src)?.network)
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Writes every key with exact linear values; dB equivalents go in comments.
pub fn to_config_text(doc: &ConfigDoc) -> String {
    let mut s = String::new();
    let c = &doc.network;
    if let Some(n) = &doc.name {
        writeln!(s, "meta.name = {}", quote(n)).unwrap();
    }
    if let Some(n) = &doc.note {
        writeln!(s, "meta.note = {}", quote(n)).unwrap();
    }
    for (k, v) in [("gamma_s", c.power.gs), ("gamma_sj", c.power.gsj), ("gamma_i", c.power.gi), ("gamma_th", c.power.gth)] {
        writeln!(s, "power.{k} = {v:?}  # {:.4} dB", linear_to_db(v)).unwrap();
    }
    writeln!(s, "power.jammer = {}", c.power.jammer_on).unwrap();
    writeln!(s, "rayleigh.SP.lambda = {:?}", c.sp.lambda).unwrap();
    writeln!(s, "rayleigh.SJP.lambda = {:?}", c.sjp.lambda).unwrap();
    for (l, p) in SR_LINKS.iter().zip([&c.sr, &c.se1, &c.sje1]) {
        writeln!(s, "sr.{l}.b = {:?}", p.b).unwrap();
        writeln!(s, "sr.{l}.m = {}", p.m).unwrap();
        writeln!(s, "sr.{l}.omega = {:?}", p.omega).unwrap();
    }
    for (l, p) in OPTICAL_LINKS.iter().zip([&c.d, &c.e2]) {
        for note in &p.perturbations {
            writeln!(s, "# optical.{l}: {note}").unwrap();
        }
        writeln!(s, "optical.{l}.alpha = {:?}", p.alpha).unwrap();
        writeln!(s, "optical.{l}.beta = {:?}", p.beta).unwrap();
        writeln!(s, "optical.{l}.xi = {:?}", p.xi).unwrap();
        writeln!(s, "optical.{l}.mu = {:?}  # {:.4} dB", p.mu, linear_to_db(p.mu)).unwrap();
        writeln!(s, "optical.{l}.r = {}", p.r).unwrap();
    }
    for line in doc.ties.describe() {
        writeln!(s, "{line}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_document_is_the_default_table() {
        assert_eq!(parse_config("").unwrap(), NetworkConfig::defaults(true));
    }

    #[test]
    fn db_keys_convert() {
        let c = parse_config("power.gamma_i_db = 20\noptical.D.mu_db = 30\n").unwrap();
        assert!((c.power.gi - 100.0).abs() < 1e-9);
        assert!((c.d.mu - 1000.0).abs() < 1e-9);
        let c = parse_config("[optical.D]\nmu_db = 30\n").unwrap();
        assert!((c.d.mu - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn fractional_m_names_the_key() {
        let e = parse_config("sr.SR.m = 2.5").unwrap_err();
        match &e {
            ConfigError::Key { key, msg } => {
                assert_eq!(key, "sr.SR.m");
                assert!(msg.contains("integer"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_config("sr.SE1.m = 3.0").unwrap().se1.m, 3);
    }

    #[test]
    fn errors_carry_location() {
        match parse_config("power.gamma_s_db = 60\npower.gamma_i_db = = 3\n").unwrap_err() {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("power.gamma_x = 1"), Err(ConfigError::Key { key, .. }) if key == "power.gamma_x"));
        assert!(matches!(parse_config("power.gamma_s = 1\npower.gamma_s_db = 0"), Err(ConfigError::Key { .. })));
        assert!(matches!(parse_config("optical.E2.r = 3"), Err(ConfigError::Key { key, .. }) if key == "optical.E2"));
        assert!(matches!(parse_config("rayleigh.SP.lambda = -1"), Err(ConfigError::Key { key, .. }) if key == "rayleigh.SP.lambda"));
    }

    #[test]
    fn ties_follow_gamma_i() {
        let d = parse_document("power.gamma_i_db = 30\ntie.sigma_s = 1\ntie.eps_i = 0.1\ntie.rho_d = 0.001\n").unwrap();
        let c = &d.network;
        assert!((c.power.gs - 1000.0).abs() < 1e-9);
        assert!((c.power.gth - 100.0).abs() < 1e-9);
        assert!((c.d.mu - 1e6).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn round_trip(gs in -10.0..80.0f64, gi in -10.0..60.0f64, b in 0.1..8.0f64, m in 1u32..6, om in 0.1..10.0f64,
                      mu in 0.0..60.0f64, alpha in 1.5..9.0f64, lam in 0.1..5.0f64, on in any::<bool>(), tie in any::<bool>()) {
            let src = format!(
                "power.gamma_s_db = {gs}\npower.gamma_i_db = {gi}\npower.jammer = {on}\nsr.SE1.b = {b}\nsr.SE1.m = {m}\n\
                 sr.SR.omega = {om}\noptical.E2.mu_db = {mu}\noptical.D.alpha = {alpha}\nrayleigh.SJP.lambda = {lam}\n{}",
                if tie { "tie.sigma_sj = 0.5\ntie.rho_e2 = 0.01\nmeta.name = \"x \\\"q\\\"\"\n" } else { "" }
            );
            let first = parse_document(&src).unwrap();
            let again = parse_document(&to_config_text(&first)).unwrap();
            prop_assert_eq!(first, again);
        }
    }
}
