//! Flat `key = value` scenario files.
//!
//! ```text
//! # one IRS close to the users
//! antennas = 4
//! users = 4
//! irs.count = 1
//! irs.0.nh = 4
//! irs.0.nv = 4
//! irs.0.position = 50, 5, 0
//! rician.beta_ai = 10dB
//! power_dbm = 5
//! ```
//!
//! Every key has a default, so an empty file is a valid scenario. Rician
//! factors accept a `dB` suffix and are linear otherwise; `power_dbm`,
//! `noise_dbm` and `pathloss.c0_db` are always logarithmic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{
    AmplitudeMode, CorrelationCoeffs, IrsPanel, LinkDistances, NetworkConfig, PathLossExponents, RicianFactors,
};
use crate::error::{Error, Result};
use crate::zosga::{DecaySchedule, ScheduleParams, TheoremConstants};

/// Raw key-value pairs as read from a file, before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScenarioSpec {
    entries: BTreeMap<String, String>,
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    /// Copy with `key = value` for every key in `keys`.
    pub fn with(&self, keys: &[String], value: &str) -> Self {
        let mut out = self.clone();
        for k in keys {
            out.set(k.clone(), value);
        }
        out
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn resolve(&self) -> Result<Scenario> {
        Scenario::from_spec(self)
    }
}

/// Node positions in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub ap: [f64; 3],
    pub irs: Vec<[f64; 3]>,
    pub users: Vec<[f64; 3]>,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl Geometry {
    pub fn distances(&self) -> LinkDistances {
        LinkDistances {
            ap_user: self.users.iter().map(|u| distance(self.ap, *u)).collect(),
            ap_irs: self.irs.iter().map(|p| distance(self.ap, *p)).collect(),
            irs_user: self.irs.iter().map(|p| self.users.iter().map(|u| distance(*p, *u)).collect()).collect(),
        }
    }
}

/// `Auto` asks the harness to estimate the constant from a pilot run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimated {
    Fixed(f64),
    Auto,
}

/// Outer-loop knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZosgaSettings {
    pub mu: f64,
    pub schedule: ScheduleParams<f64>,
    /// Only meaningful for the constant schedule.
    pub b_f: Estimated,
    pub l_h0: Estimated,
    pub phase_wrap: bool,
    /// IRS indices whose parameters are learned; `None` means all.
    pub optimize: Option<Vec<usize>>,
    pub thin: usize,
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub geometry: Geometry,
    pub wmmse_iters: usize,
    pub zosga: ZosgaSettings,
    /// Outer iterations per simulation.
    pub iters: usize,
    /// Fraction of the trailing series averaged into the final sumrate.
    pub tail_fraction: f64,
    canonical: BTreeMap<String, String>,
}

struct Reader<'a> {
    spec: &'a ScenarioSpec,
    used: BTreeSet<String>,
    canonical: BTreeMap<String, String>,
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| config(format!("`{key}`: expected a number, got `{s}`")))
}

fn strip_suffix_ci<'s>(s: &'s str, suffix: &str) -> Option<&'s str> {
    let n = s.len().checked_sub(suffix.len())?;
    (s.is_char_boundary(n) && s[n..].eq_ignore_ascii_case(suffix)).then(|| s[..n].trim())
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear number, or decibels with a `dB` suffix.
fn parse_db_or_linear(key: &str, s: &str) -> Result<f64> {
    match strip_suffix_ci(s.trim(), "db") {
        Some(db) => Ok(db_to_linear(parse_f64(key, db)?)),
        None => parse_f64(key, s),
    }
}

fn parse_list<T>(key: &str, s: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(|x| f(key, x.trim())).collect()
}

fn parse_point(key: &str, s: &str) -> Result<[f64; 3]> {
    let v = parse_list(key, s, parse_f64)?;
    match v.as_slice() {
        [x, y] => Ok([*x, *y, 0.0]),
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(config(format!("`{key}`: expected `x, y[, z]`, got `{s}`"))),
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_point(p: [f64; 3]) -> String {
    format!("{:?}, {:?}, {:?}", p[0], p[1], p[2])
}

impl<'a> Reader<'a> {
    fn raw(&mut self, key: &str) -> Option<&'a str> {
        let v = self.spec.get(key);
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn value<T>(
        &mut self,
        key: &str,
        default: T,
        parse: impl Fn(&str, &str) -> Result<T>,
        render: impl Fn(&T) -> String,
    ) -> Result<T> {
        let v = match self.raw(key) {
            Some(s) => parse(key, s)?,
            None => default,
        };
        self.canonical.insert(key.to_string(), render(&v));
        Ok(v)
    }

    fn number(&mut self, key: &str, default: f64) -> Result<f64> {
        self.value(key, default, parse_f64, |x| fmt_f64(*x))
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize> {
        self.value(
            key,
            default,
            |k, s| s.parse::<usize>().map_err(|_| config(format!("`{k}`: expected a nonnegative integer, got `{s}`"))),
            |x| x.to_string(),
        )
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool> {
        self.value(
            key,
            default,
            |k, s| match s.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(config(format!("`{k}`: expected true/false, got `{s}`"))),
            },
            |x| x.to_string(),
        )
    }

    fn linear(&mut self, key: &str, default: f64) -> Result<f64> {
        self.value(key, default, parse_db_or_linear, |x| fmt_f64(*x))
    }

    fn point(&mut self, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        self.value(key, default, parse_point, |p| fmt_point(*p))
    }

    /// One value per user; a single entry is broadcast.
    fn per_user(&mut self, key: &str, users: usize, default: f64, conv: fn(f64) -> f64) -> Result<Vec<f64>> {
        let v = self.value(
            key,
            vec![default; users],
            |k, s| {
                let v = parse_list(k, s, parse_f64)?;
                match v.len() {
                    1 => Ok(vec![v[0]; users]),
                    n if n == users => Ok(v),
                    n => Err(config(format!("`{k}`: expected 1 or {users} values, got {n}"))),
                }
            },
            |v| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "),
        )?;
        Ok(v.into_iter().map(conv).collect())
    }

    fn estimated(&mut self, key: &str) -> Result<Estimated> {
        self.value(
            key,
            Estimated::Fixed(1.0),
            |k, s| {
                if s.eq_ignore_ascii_case("auto") {
                    Ok(Estimated::Auto)
                } else {
                    Ok(Estimated::Fixed(parse_f64(k, s)?))
                }
            },
            |e| match e {
                Estimated::Auto => "auto".to_string(),
                Estimated::Fixed(x) => fmt_f64(*x),
            },
        )
    }
}

fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

impl Scenario {
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        let mut r = Reader { spec, used: BTreeSet::new(), canonical: BTreeMap::new() };

        let antennas = r.count("antennas", 4)?;
        let users = r.count("users", 4)?;
        let amplitude_mode = r.value(
            "amplitude_mode",
            AmplitudeMode::Adjustable,
            |k, s| match s.to_ascii_lowercase().as_str() {
                "adjustable" | "aa" => Ok(AmplitudeMode::Adjustable),
                "unit" | "ua" => Ok(AmplitudeMode::Unit),
                _ => Err(config(format!("`{k}`: expected adjustable or unit, got `{s}`"))),
            },
            |m| match m {
                AmplitudeMode::Adjustable => "adjustable".to_string(),
                AmplitudeMode::Unit => "unit".to_string(),
            },
        )?;

        let n_irs = r.count("irs.count", 1)?;
        let mut panels = Vec::with_capacity(n_irs);
        let mut irs_pos = Vec::with_capacity(n_irs);
        for i in 0..n_irs {
            let nh = r.count(&format!("irs.{i}.nh"), 8)?;
            let nv = r.count(&format!("irs.{i}.nv"), 4)?;
            panels.push(IrsPanel { nh, nv });
            irs_pos.push(r.point(&format!("irs.{i}.position"), [50.0, 5.0 + 10.0 * i as f64, 0.0])?);
        }

        let ap = r.point("ap.position", [0.0, 0.0, 0.0])?;
        let center = r.point("users.center", [50.0, 0.0, 0.0])?;
        let radius = r.number("users.radius", 3.0)?;
        let mut user_pos = Vec::with_capacity(users);
        for k in 0..users {
            let angle = std::f64::consts::TAU * k as f64 / users as f64;
            let default = [center[0] + radius * angle.cos(), center[1] + radius * angle.sin(), center[2]];
            user_pos.push(r.point(&format!("user.{k}.position"), default)?);
        }
        let geometry = Geometry { ap, irs: irs_pos, users: user_pos };

        let mut distances = geometry.distances();
        for (k, d) in distances.ap_user.iter_mut().enumerate() {
            *d = r.number(&format!("dist.ap_user.{k}"), *d)?;
        }
        for (i, d) in distances.ap_irs.iter_mut().enumerate() {
            *d = r.number(&format!("dist.ap_irs.{i}"), *d)?;
        }
        for (i, row) in distances.irs_user.iter_mut().enumerate() {
            for (k, d) in row.iter_mut().enumerate() {
                *d = r.number(&format!("dist.irs_user.{i}.{k}"), *d)?;
            }
        }

        let rician = RicianFactors {
            irs_user: r.linear("rician.beta_iu", 10.0)?,
            ap_irs: r.linear("rician.beta_ai", 10.0)?,
            ap_user: r.linear("rician.beta_au", 0.0)?,
        };
        let correlation = CorrelationCoeffs {
            irs_user: r.number("corr.r_rk", 0.0)?,
            irs: r.number("corr.r_r", 0.0)?,
            ap: r.number("corr.r_d", 0.0)?,
        };
        let pathloss_c0 = db_to_linear(r.number("pathloss.c0_db", -30.0)?);
        let exponents = PathLossExponents {
            ap_irs: r.number("pathloss.ai.alpha", 2.2)?,
            irs_user: r.number("pathloss.iu.alpha", 2.8)?,
            ap_user: r.number("pathloss.au.alpha", 3.5)?,
        };
        let power = dbm_to_watts(r.number("power_dbm", 5.0)?);
        let noise = r.per_user("noise_dbm", users, -80.0, dbm_to_watts)?;
        let weights = r.per_user("weights", users, 1.0, |x| x)?;

        let network = NetworkConfig {
            antennas,
            users,
            irs: panels,
            rician,
            correlation,
            pathloss_c0,
            exponents,
            distances,
            power,
            noise,
            weights,
            amplitude_mode,
        };
        network.validate().map_err(|e| config(e.to_string()))?;

        let wmmse_iters = r.count("wmmse.iters", 20)?;
        let iters = r.count("iters", 300)?;
        let tail_fraction = r.number("final.tail", 0.1)?;

        let mu = r.number("zosga.mu", 1e-6)?;
        let schedule_kind = r.value(
            "zosga.schedule",
            "decay".to_string(),
            |k, s| match s.to_ascii_lowercase().as_str() {
                "decay" | "constant" => Ok(s.to_ascii_lowercase()),
                _ => Err(config(format!("`{k}`: expected decay or constant, got `{s}`"))),
            },
            |s| s.clone(),
        )?;
        let (schedule, b_f, l_h0) = if schedule_kind == "decay" {
            let d = DecaySchedule::<f64>::default();
            let decay = DecaySchedule {
                eta_phase: r.number("zosga.eta_phase", d.eta_phase)?,
                eta_amplitude: r.number("zosga.eta_amplitude", d.eta_amplitude)?,
                gamma: r.number("zosga.gamma", d.gamma)?,
                cutoff: r.count("zosga.cutoff", d.cutoff)?,
            };
            (ScheduleParams::GeometricDecay(decay), Estimated::Fixed(1.0), Estimated::Fixed(1.0))
        } else {
            let b_f = r.estimated("zosga.b_f")?;
            let l_h0 = r.estimated("zosga.l_h0")?;
            let known = |e: Estimated| match e {
                Estimated::Fixed(x) => x,
                Estimated::Auto => 1.0,
            };
            let constants = TheoremConstants {
                delta_phi: r.number("zosga.delta_phi", 1.0)?,
                rho: r.number("zosga.rho", 1.0)?,
                b_f: known(b_f),
                l_h0: known(l_h0),
                l_h1: r.number("zosga.l_h1", 1.0)?,
                delta_k: r.number("zosga.delta_k", 1.0)?,
            };
            let horizon = match r.raw("zosga.horizon") {
                Some(_) => Some(r.count("zosga.horizon", 0)?),
                None => None,
            };
            (ScheduleParams::ConstantTheorem { constants, horizon }, b_f, l_h0)
        };
        let phase_wrap = r.flag("zosga.phase_wrap", false)?;
        let optimize = r.value(
            "zosga.optimize",
            None,
            |k, s| {
                if s.eq_ignore_ascii_case("all") {
                    return Ok(None);
                }
                let v = parse_list(k, s, |k, x| {
                    x.parse::<usize>().map_err(|_| config(format!("`{k}`: bad IRS index `{x}`")))
                })?;
                Ok(Some(v))
            },
            |o| match o {
                None => "all".to_string(),
                Some(v) => v.iter().map(usize::to_string).collect::<Vec<_>>().join(", "),
            },
        )?;
        let thin = r.count("zosga.thin", 100)?;

        if let Some(bad) = spec.entries.keys().find(|k| !r.used.contains(*k)) {
            return Err(config(format!("unknown key `{bad}`")));
        }
        if !(mu > 0.0) {
            return Err(config("`zosga.mu` must be positive"));
        }
        schedule.validate().map_err(|e| config(e.to_string()))?;
        if iters == 0 {
            return Err(config("`iters` must be at least 1"));
        }
        if wmmse_iters == 0 {
            return Err(config("`wmmse.iters` must be at least 1"));
        }
        if thin == 0 {
            return Err(config("`zosga.thin` must be at least 1"));
        }
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(config("`final.tail` must lie in (0, 1]"));
        }
        if let Some(bad) = optimize.iter().flatten().find(|&&i| i >= n_irs) {
            return Err(config(format!("`zosga.optimize`: IRS {bad} does not exist ({n_irs} configured)")));
        }
        for (key, e) in [("zosga.b_f", b_f), ("zosga.l_h0", l_h0)] {
            if let Estimated::Fixed(x) = e {
                if !(x > 0.0) {
                    return Err(config(format!("`{key}` must be positive")));
                }
            }
        }

        Ok(Self {
            network,
            geometry,
            wmmse_iters,
            zosga: ZosgaSettings { mu, schedule, b_f, l_h0, phase_wrap, optimize, thin },
            iters,
            tail_fraction,
            canonical: r.canonical,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ScenarioSpec::load(path)?.resolve()
    }

    /// Every key with its effective value, defaults included.
    pub fn canonical(&self) -> &BTreeMap<String, String> {
        &self.canonical
    }

    /// Canonical scenario file; parses back to an equal scenario.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.canonical {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Hex SHA-256 of [`Scenario::render`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Step-size schedule with any `auto` constants replaced.
    pub fn schedule_with(&self, b_f: f64, l_h0: f64) -> ScheduleParams<f64> {
        match self.zosga.schedule {
            ScheduleParams::ConstantTheorem { mut constants, horizon } => {
                if self.zosga.b_f == Estimated::Auto {
                    constants.b_f = b_f;
                }
                if self.zosga.l_h0 == Estimated::Auto {
                    constants.l_h0 = l_h0;
                }
                ScheduleParams::ConstantTheorem { constants, horizon }
            }
            other => other,
        }
    }

    pub fn needs_pilot(&self) -> bool {
        matches!(self.zosga.schedule, ScheduleParams::ConstantTheorem { .. })
            && (self.zosga.b_f == Estimated::Auto || self.zosga.l_h0 == Estimated::Auto)
    }
}
