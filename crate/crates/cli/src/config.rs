//! Scenario configs: a flat `key = value` document with `#` comments.
//!
//! Numeric values accept a trailing `pi` factor (`30pi`, `6*pi`, `-pi`) so
//! that multiples of pi can be written exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use photon_store::{
    coupling_from_bandwidth, DoubleLobePulse, InputPulse, PhysicalParams, SampledPulse, TimeGrid,
};

use crate::error::{CliError, ConfigError, Violation, ViolationKind};

/// Environment variable that replaces the default output directory.
pub const OUTPUT_ENV: &str = "PHOTON_STORE_OUT";
pub const DEFAULT_OUTPUT: &str = "photon-store-out";
const UNIT_SUSPECT_ABOVE: f64 = 1e6;

pub const KEYS: &[&str] = &[
    "mode",
    "preset",
    "g_cav",
    "gamma_L",
    "delta1",
    "delta2",
    "big_gamma",
    "bandwidth_w",
    "rho_offset",
    "pulse_duration",
    "pulse",
    "grid.dt",
    "grid.span",
    "output",
    "oracle.n_modes",
    "oracle.band",
    "sweep.param",
    "sweep.values",
    "sweep.link_delta1",
    "workers",
];

const FREQUENCY_KEYS: &[&str] = &[
    "g_cav",
    "gamma_L",
    "delta1",
    "delta2",
    "big_gamma",
    "bandwidth_w",
    "oracle.band",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Design,
    Simulate,
    Markovian,
    Oracle,
    Dark,
    Sweep,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Design,
        Mode::Simulate,
        Mode::Markovian,
        Mode::Oracle,
        Mode::Dark,
        Mode::Sweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Design => "design",
            Mode::Simulate => "simulate",
            Mode::Markovian => "markovian",
            Mode::Oracle => "oracle",
            Mode::Dark => "dark",
            Mode::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown mode `{s}` (expected one of {})",
                    names(Mode::ALL.map(Mode::as_str))
                )
            })
    }
}

/// Figure presets. Each one pins the parameters of a published figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    Fig2a,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
    Fig7a,
    Fig7c,
    Fig7e,
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::Fig2a,
        Preset::Fig2c,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7a,
        Preset::Fig7c,
        Preset::Fig7e,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2c => "fig2c",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7a => "fig7a",
            Preset::Fig7c => "fig7c",
            Preset::Fig7e => "fig7e",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Preset::Fig2a => Mode::Design,
            Preset::Fig2c => Mode::Simulate,
            Preset::Fig3a | Preset::Fig3b | Preset::Fig5 => Mode::Markovian,
            Preset::Fig4 | Preset::Fig6 => Mode::Sweep,
            Preset::Fig7a | Preset::Fig7c | Preset::Fig7e => Mode::Dark,
        }
    }

    /// Parameter values the preset pins, as config text.
    pub fn entries(self) -> Vec<(&'static str, &'static str)> {
        let mut e = vec![
            ("g_cav", "30pi"),
            ("gamma_L", "6pi"),
            ("delta1", "0"),
            ("delta2", "0"),
            ("pulse", DoubleLobePulse::NAME),
            ("pulse_duration", "pi"),
        ];
        match self {
            Preset::Fig2a | Preset::Fig2c => {
                e.extend([("bandwidth_w", "1.6716"), ("rho_offset", "0.002")])
            }
            Preset::Fig3a => e.extend([("bandwidth_w", "0.5"), ("rho_offset", "0.0075")]),
            Preset::Fig3b => e.extend([("bandwidth_w", "25"), ("rho_offset", "0.0075")]),
            Preset::Fig4 => e.extend([
                ("bandwidth_w", "0.5"),
                ("rho_offset", "0.0075"),
                ("sweep.param", "bandwidth_w"),
                ("sweep.values", "0.5, 1, 2, 5, 25"),
                ("sweep.link_delta1", "false"),
            ]),
            Preset::Fig5 => e.extend([("bandwidth_w", "1"), ("rho_offset", "0.004")]),
            Preset::Fig6 => e.extend([
                ("bandwidth_w", "0.5"),
                ("rho_offset", "0.003"),
                ("sweep.param", "delta2"),
                ("sweep.values", "-10, -5, 0, 5, 10"),
                ("sweep.link_delta1", "true"),
            ]),
            Preset::Fig7a => e.extend([("bandwidth_w", "0.5"), ("rho_offset", "0.00075")]),
            Preset::Fig7c => e.extend([("bandwidth_w", "25"), ("rho_offset", "0.00075")]),
            Preset::Fig7e => {
                e[0] = ("g_cav", "14pi");
                e.extend([("bandwidth_w", "25"), ("rho_offset", "0.00075")]);
            }
        }
        e
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.tag() == s)
            .ok_or_else(|| {
                format!(
                    "unknown preset `{s}` (expected one of {})",
                    names(Preset::ALL.map(Preset::tag))
                )
            })
    }
}

fn names<const N: usize>(all: [&str; N]) -> String {
    all.join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseSource {
    Builtin,
    /// Two-column `t, Phi_in` samples read from a file.
    Sampled {
        path: PathBuf,
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    BandwidthW,
    Delta2,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::BandwidthW => "bandwidth_w",
            SweepParam::Delta2 => "delta2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub param: SweepParam,
    /// Sorted ascending, no duplicates.
    pub values: Vec<f64>,
    /// Set `delta1 = delta2` at every point of a `delta2` sweep.
    pub link_delta1: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub n_modes: usize,
    pub band: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_modes: 2000,
            band: 80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub preset: Option<Preset>,
    pub params: PhysicalParams,
    /// `true` when `big_gamma` came from the equilibrium condition rather
    /// than the config.
    pub derive_gamma: bool,
    pub pulse: PulseSource,
    pub dt: f64,
    pub span: f64,
    pub output: PathBuf,
    pub oracle: OracleConfig,
    pub sweep: Option<SweepConfig>,
    pub workers: Option<usize>,
    /// Keys whose value in the document was replaced by the preset.
    pub preset_overrides: Vec<String>,
}

/// Values that take precedence over the document, typically command-line
/// flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub preset: Option<Preset>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Directory that relative pulse paths are resolved against.
    pub base_dir: Option<PathBuf>,
    /// Output directory when neither the document nor `output` names one.
    pub default_output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn pulse_duration(&self) -> f64 {
        self.params.pulse_duration
    }

    pub fn grid(&self) -> photon_store::Result<TimeGrid> {
        TimeGrid::with_step(self.span, self.dt)
    }

    pub fn build_pulse(&self) -> photon_store::Result<Box<dyn InputPulse>> {
        build_pulse(&self.pulse, self.params.pulse_duration, self.dt)
    }

    /// Parameters at one point of the sweep, re-deriving `big_gamma` when
    /// it was not given explicitly.
    pub fn params_at(&self, value: f64) -> photon_store::Result<PhysicalParams> {
        let mut p = self.params;
        let Some(sweep) = &self.sweep else {
            return Ok(p);
        };
        match sweep.param {
            SweepParam::BandwidthW => {
                p.bandwidth_w = value;
                if self.derive_gamma {
                    p.big_gamma = coupling_from_bandwidth(&*self.build_pulse()?, value)?;
                }
            }
            SweepParam::Delta2 => {
                p.delta2 = value;
                if sweep.link_delta1 {
                    p.delta1 = value;
                }
            }
        }
        Ok(p)
    }
}

fn build_pulse(
    src: &PulseSource,
    duration: f64,
    dt: f64,
) -> photon_store::Result<Box<dyn InputPulse>> {
    Ok(match src {
        PulseSource::Builtin => Box::new(DoubleLobePulse::new(duration)?),
        PulseSource::Sampled { times, values, .. } => {
            let span = times.last().copied().unwrap_or(0.0);
            Box::new(SampledPulse::from_samples(
                times.clone(),
                values.clone(),
                dt.min(0.25 * span),
            )?)
        }
    })
}

/// Parses a numeric value, with an optional trailing `pi` factor.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let value = match s.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .parse::<f64>()
                    .map_err(|_| format!("`{text}` is not a number"))?,
            };
            c * PI
        }
        None => s
            .parse::<f64>()
            .map_err(|_| format!("`{text}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{text}` is not a boolean")),
    }
}

/// Closest known key within edit distance 2.
pub fn suggest_key(unknown: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(unknown, k), *k))
        .filter(|(d, _)| *d <= 2)
        .min()
        .map(|(_, k)| k.to_string())
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

struct Collector {
    entries: BTreeMap<&'static str, Entry>,
    violations: Vec<Violation>,
}

impl Collector {
    fn bad(&mut self, line: usize, key: &str, kind: ViolationKind) {
        self.violations.push(Violation {
            line,
            key: key.to_string(),
            kind,
        });
    }

    fn invalid(&mut self, key: &'static str, msg: impl Into<String>) {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        self.bad(line, key, ViolationKind::Invalid(msg.into()));
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn number(&mut self, key: &'static str) -> Option<f64> {
        let e = self.entries.get(key)?.clone();
        match parse_number(&e.value) {
            Ok(v) => {
                if FREQUENCY_KEYS.contains(&key) && v.abs() > UNIT_SUSPECT_ABOVE {
                    self.bad(e.line, key, ViolationKind::UnitSuspect { value: v });
                }
                Some(v)
            }
            Err(msg) => {
                self.bad(e.line, key, ViolationKind::Invalid(msg));
                None
            }
        }
    }

    fn required(&mut self, key: &'static str) -> Option<f64> {
        if self.entries.contains_key(key) {
            self.number(key)
        } else {
            self.bad(0, key, ViolationKind::Missing);
            None
        }
    }

    /// Reads `key`, checks it with `ok`, and falls back to `default`.
    fn checked(
        &mut self,
        key: &'static str,
        default: Option<f64>,
        ok: fn(f64) -> bool,
        rule: &str,
    ) -> Option<f64> {
        let v = match default {
            Some(d) if !self.entries.contains_key(key) => Some(d),
            _ => self.required(key),
        }?;
        if ok(v) {
            Some(v)
        } else {
            self.invalid(key, format!("{rule}, got {v}"));
            None
        }
    }
}

/// Parses a config document with no overrides.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

/// Reads and parses a config file; relative pulse paths resolve against the
/// file's directory.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut ov = overrides.clone();
    if ov.base_dir.is_none() {
        ov.base_dir = path.parent().map(Path::to_path_buf);
    }
    Ok(parse_config_with(&text, &ov)?)
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let mut c = Collector {
        entries: BTreeMap::new(),
        violations: Vec::new(),
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw_line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            c.bad(
                line,
                body,
                ViolationKind::Invalid("expected `key = value`".into()),
            );
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(&key) = KEYS.iter().find(|known| **known == k) else {
            c.bad(
                line,
                k,
                ViolationKind::UnknownKey {
                    suggestion: suggest_key(k),
                },
            );
            continue;
        };
        if let Some(first) = c.entries.get(key) {
            let first_line = first.line;
            c.bad(line, key, ViolationKind::Duplicate { first_line });
            continue;
        }
        if v.is_empty() {
            c.bad(line, key, ViolationKind::Invalid("empty value".into()));
            continue;
        }
        c.entries.insert(
            key,
            Entry {
                line,
                value: v.to_string(),
            },
        );
    }

    // preset: command line wins over the document
    let preset = match overrides.preset {
        Some(p) => Some(p),
        None => c
            .raw("preset")
            .cloned()
            .and_then(|e| match e.value.parse::<Preset>() {
                Ok(p) => Some(p),
                Err(msg) => {
                    c.bad(e.line, "preset", ViolationKind::Invalid(msg));
                    None
                }
            }),
    };

    // mode: command line, then document, then preset
    let doc_mode = c
        .raw("mode")
        .cloned()
        .map(|e| (e.line, e.value.parse::<Mode>()));
    let mode = match (overrides.mode, doc_mode) {
        (Some(m), _) => Some(m),
        (None, Some((_, Ok(m)))) => Some(m),
        (None, Some((line, Err(msg)))) => {
            c.bad(line, "mode", ViolationKind::Invalid(msg));
            None
        }
        (None, None) => match preset {
            Some(p) => Some(p.mode()),
            None => {
                c.bad(0, "mode", ViolationKind::Missing);
                None
            }
        },
    };

    let mut preset_overrides = Vec::new();
    if let Some(p) = preset {
        for (k, v) in p.entries() {
            if let Some(old) = c.entries.get(k) {
                if old.value != v {
                    preset_overrides.push(k.to_string());
                }
            }
            c.entries.insert(
                k,
                Entry {
                    line: 0,
                    value: v.to_string(),
                },
            );
        }
    }

    let g_cav = c.checked("g_cav", None, |v| v > 0.0, "must be > 0");
    let gamma_l = c.checked("gamma_L", None, |v| v >= 0.0, "must be >= 0");
    let delta1 = c.checked("delta1", Some(0.0), |_| true, "");
    let delta2 = c.checked("delta2", Some(0.0), |_| true, "");
    let rho_offset = c.checked(
        "rho_offset",
        None,
        |v| v > 0.0 && v < 1.0,
        "must lie in (0, 1)",
    );

    let pulse_name = c
        .raw("pulse")
        .map_or(DoubleLobePulse::NAME.to_string(), |e| e.value.clone());
    let pulse = if pulse_name == DoubleLobePulse::NAME {
        Some(PulseSource::Builtin)
    } else {
        let path = match &overrides.base_dir {
            Some(dir) => dir.join(&pulse_name),
            None => PathBuf::from(&pulse_name),
        };
        match read_samples(&path) {
            Ok((times, values)) => Some(PulseSource::Sampled {
                path,
                times,
                values,
            }),
            Err(msg) => {
                c.invalid("pulse", msg);
                None
            }
        }
    };
    let duration = match &pulse {
        Some(PulseSource::Sampled { times, .. }) => {
            let end = *times.last().unwrap();
            if c.raw("pulse_duration").is_some() {
                if let Some(d) = c.number("pulse_duration") {
                    if (d - end).abs() > 1e-9 * end {
                        c.invalid(
                            "pulse_duration",
                            format!("sampled pulse ends at {end}, not {d}"),
                        );
                    }
                }
            }
            Some(end)
        }
        _ => c.checked("pulse_duration", Some(PI), |v| v > 0.0, "must be > 0"),
    };
    let span = match duration {
        Some(d) => {
            let s = c.checked("grid.span", Some(d), |v| v > 0.0, "must be > 0");
            match s {
                Some(s) if s < d * (1.0 - 1e-12) => {
                    c.invalid(
                        "grid.span",
                        format!("must cover the pulse duration {d}, got {s}"),
                    );
                    None
                }
                other => other,
            }
        }
        None => None,
    };
    let dt = c.checked("grid.dt", Some(1e-4), |v| v > 0.0, "must be > 0");
    if let (Some(dt), Some(span)) = (dt, span) {
        if dt > 0.25 * span {
            c.invalid(
                "grid.dt",
                format!("must be at most a quarter of the span {span}, got {dt}"),
            );
        }
    }

    let sweep = match mode {
        Some(Mode::Sweep) => parse_sweep(&mut c),
        _ => {
            for key in ["sweep.param", "sweep.values", "sweep.link_delta1"] {
                if c.raw(key).is_some_and(|e| e.line != 0) {
                    c.invalid(key, "only used with mode = sweep");
                }
            }
            None
        }
    };
    let w = match (&sweep, c.raw("bandwidth_w")) {
        (Some(s), None) if s.param == SweepParam::BandwidthW => s.values.first().copied(),
        _ => c.checked("bandwidth_w", None, |v| v > 0.0, "must be > 0"),
    };

    let explicit_gamma = c
        .raw("big_gamma")
        .is_some()
        .then(|| c.checked("big_gamma", None, |v| v > 0.0, "must be > 0"));
    let big_gamma = match (explicit_gamma, &pulse, duration, w, dt) {
        (Some(g), ..) => g,
        (None, Some(src), Some(d), Some(w), Some(dt)) => match build_pulse(src, d, dt) {
            Ok(p) => match coupling_from_bandwidth(&*p, w) {
                Ok(g) => Some(g),
                Err(e) => {
                    c.invalid("bandwidth_w", format!("cannot derive big_gamma: {e}"));
                    None
                }
            },
            Err(e) => {
                c.invalid("pulse", e.to_string());
                None
            }
        },
        _ => None,
    };

    let mut oracle = OracleConfig::default();
    if c.raw("oracle.n_modes").is_some() {
        match c.number("oracle.n_modes") {
            Some(v) if v >= 2.0 && v.fract() == 0.0 && v <= 1e7 => oracle.n_modes = v as usize,
            Some(v) => c.invalid(
                "oracle.n_modes",
                format!("must be an integer >= 2, got {v}"),
            ),
            None => {}
        }
    }
    if let Some(b) = c.checked("oracle.band", Some(oracle.band), |v| v > 0.0, "must be > 0") {
        oracle.band = b;
    }

    let workers = match overrides.workers {
        Some(0) => {
            c.invalid("workers", "must be >= 1");
            None
        }
        Some(n) => Some(n),
        None => match c
            .raw("workers")
            .is_some()
            .then(|| c.number("workers"))
            .flatten()
        {
            Some(v) if v >= 1.0 && v.fract() == 0.0 => Some(v as usize),
            Some(v) => {
                c.invalid("workers", format!("must be a positive integer, got {v}"));
                None
            }
            None => None,
        },
    };

    let output = overrides
        .output
        .clone()
        .or_else(|| c.raw("output").map(|e| PathBuf::from(&e.value)))
        .or_else(|| overrides.default_output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));

    if !c.violations.is_empty() {
        c.violations.sort_by_key(|v| v.line);
        return Err(ConfigError(c.violations));
    }
    // every Option below is Some once no violation was recorded
    let params = PhysicalParams {
        g_cav: g_cav.unwrap(),
        gamma_l: gamma_l.unwrap(),
        delta1: delta1.unwrap(),
        delta2: delta2.unwrap(),
        big_gamma: big_gamma.unwrap(),
        bandwidth_w: w.unwrap(),
        rho_offset: rho_offset.unwrap(),
        pulse_duration: duration.unwrap(),
    };
    Ok(ScenarioConfig {
        mode: mode.unwrap(),
        preset,
        params,
        derive_gamma: explicit_gamma.is_none(),
        pulse: pulse.unwrap(),
        dt: dt.unwrap(),
        span: span.unwrap(),
        output,
        oracle,
        sweep,
        workers,
        preset_overrides,
    })
}

fn parse_sweep(c: &mut Collector) -> Option<SweepConfig> {
    let param = match c.raw("sweep.param").cloned() {
        None => {
            c.bad(0, "sweep.param", ViolationKind::Missing);
            None
        }
        Some(e) => match e.value.as_str() {
            "bandwidth_w" => Some(SweepParam::BandwidthW),
            "delta2" => Some(SweepParam::Delta2),
            other => {
                c.bad(
                    e.line,
                    "sweep.param",
                    ViolationKind::Invalid(format!(
                        "can sweep `bandwidth_w` or `delta2`, not `{other}`"
                    )),
                );
                None
            }
        },
    };
    let values = match c.raw("sweep.values").cloned() {
        None => {
            c.bad(0, "sweep.values", ViolationKind::Missing);
            None
        }
        Some(e) => {
            let mut vals = Vec::new();
            let mut ok = true;
            for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match parse_number(item) {
                    Ok(v) if v.abs() > UNIT_SUSPECT_ABOVE => {
                        c.bad(
                            e.line,
                            "sweep.values",
                            ViolationKind::UnitSuspect { value: v },
                        );
                        ok = false;
                    }
                    Ok(v) => vals.push(v),
                    Err(msg) => {
                        c.bad(e.line, "sweep.values", ViolationKind::Invalid(msg));
                        ok = false;
                    }
                }
            }
            if ok && vals.is_empty() {
                c.bad(
                    e.line,
                    "sweep.values",
                    ViolationKind::Invalid("empty range".into()),
                );
                ok = false;
            }
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            ok.then_some(vals)
        }
    };
    if let (Some(SweepParam::BandwidthW), Some(vals)) = (param, &values) {
        if vals.iter().any(|v| *v <= 0.0) {
            c.invalid("sweep.values", "bandwidths must be > 0");
        }
    }
    let link_delta1 = match c.raw("sweep.link_delta1").cloned() {
        None => false,
        Some(e) => parse_bool(&e.value).unwrap_or_else(|msg| {
            c.bad(e.line, "sweep.link_delta1", ViolationKind::Invalid(msg));
            false
        }),
    };
    if link_delta1 && param == Some(SweepParam::BandwidthW) {
        c.invalid("sweep.link_delta1", "only applies to a delta2 sweep");
    }
    Some(SweepConfig {
        param: param?,
        values: values?,
        link_delta1,
    })
}

/// Reads a two-column `t, Phi_in` text file (whitespace or comma
/// separated, `#` comments).
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let cols: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let bad = || format!("{}:{}: expected two numbers", path.display(), idx + 1);
        if cols.len() != 2 {
            return Err(bad());
        }
        let t: f64 = cols[0].parse().map_err(|_| bad())?;
        let v: f64 = cols[1].parse().map_err(|_| bad())?;
        if times.last().is_some_and(|&last| t <= last) {
            return Err(format!(
                "{}:{}: times must increase",
                path.display(),
                idx + 1
            ));
        }
        times.push(t);
        values.push(v);
    }
    if times.len() < 4 {
        return Err(format!("{}: need at least 4 samples", path.display()));
    }
    Ok((times, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("30pi").unwrap(), 30.0 * PI);
        assert_eq!(parse_number("6 * pi").unwrap(), 6.0 * PI);
        assert_eq!(parse_number("-pi").unwrap(), -PI);
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number("1.5e-3").unwrap(), 1.5e-3);
        assert!(parse_number("3p").is_err());
        assert!(parse_number("inf").is_err());
    }

    #[test]
    fn preset_fills_everything() {
        let cfg = parse_config("preset = fig2a\n").unwrap();
        assert_eq!(cfg.mode, Mode::Design);
        assert_eq!(cfg.params.bandwidth_w, 1.6716);
        assert_eq!(cfg.params.rho_offset, 0.002);
        assert_eq!(cfg.params.g_cav, 30.0 * PI);
        assert!(cfg.derive_gamma);
        assert_eq!(cfg.span, PI);
        assert_eq!(cfg.dt, 1e-4);
    }

    #[test]
    fn preset_overrides_are_recorded() {
        let cfg = parse_config("preset = fig3a\nbandwidth_w = 7\nrho_offset = 0.0075\n").unwrap();
        assert_eq!(cfg.params.bandwidth_w, 0.5);
        assert_eq!(cfg.preset_overrides, vec!["bandwidth_w".to_string()]);
    }

    #[test]
    fn explicit_mode_beats_preset_mode() {
        let cfg = parse_config("mode = simulate\npreset = fig2a\n").unwrap();
        assert_eq!(cfg.mode, Mode::Simulate);
    }

    #[test]
    fn zero_step_names_the_key() {
        let err = parse_config("preset = fig2a\ngrid.dt = 0\n").unwrap_err();
        assert!(err.mentions("grid.dt"));
        assert_eq!(err.0[0].line, 2);
    }

    #[test]
    fn typo_gets_a_suggestion() {
        let err = parse_config("preset = fig2a\ngama_L = 6pi\n").unwrap_err();
        assert_eq!(
            err.0[0].kind,
            ViolationKind::UnknownKey {
                suggestion: Some("gamma_L".into())
            }
        );
        assert_eq!(suggest_key("zzzzzz"), None);
    }

    #[test]
    fn every_violation_is_reported() {
        let text =
            "mode = design\ng_cav = -1\ngamma_L = x\nbandwidth_w = 2e9\nfoo = 1\ngrid.dt = 0\n";
        let err = parse_config(text).unwrap_err();
        let keys: Vec<&str> = err.0.iter().map(|v| v.key.as_str()).collect();
        for k in [
            "g_cav",
            "gamma_L",
            "bandwidth_w",
            "foo",
            "grid.dt",
            "rho_offset",
        ] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
        assert!(err
            .0
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::UnitSuspect { value } if value == 2e9)));
    }

    #[test]
    fn duplicates_and_malformed_lines() {
        let err = parse_config("preset = fig2a\ng_cav = 1\ng_cav = 2\njust words\n").unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|v| v.kind == ViolationKind::Duplicate { first_line: 2 }));
        assert!(err.0.iter().any(|v| v.line == 4));
    }

    #[test]
    fn sweep_values_sorted_and_empty_rejected() {
        let cfg = parse_config("preset = fig4\nsweep.values = 25, 0.5, 2\n").unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.values, vec![0.5, 1.0, 2.0, 5.0, 25.0]);
        let base = "mode = sweep\ng_cav = 30pi\ngamma_L = 6pi\nbandwidth_w = 1\nrho_offset = 0.004\nsweep.param = delta2\n";
        let err = parse_config(&format!("{base}sweep.values = ,\n")).unwrap_err();
        assert!(err.mentions("sweep.values"));
        let cfg = parse_config(&format!("{base}sweep.values = 3, -3, 3\n")).unwrap();
        assert_eq!(cfg.sweep.unwrap().values, vec![-3.0, 3.0]);
    }

    #[test]
    fn sweep_keys_outside_sweep_mode() {
        let err = parse_config("preset = fig2a\nsweep.param = delta2\n").unwrap_err();
        assert!(err.mentions("sweep.param"));
    }

    #[test]
    fn missing_pulse_file() {
        let text =
            "mode = design\ng_cav = 30pi\ngamma_L = 6pi\nbandwidth_w = 2\nrho_offset = 0.002\n";
        let err = parse_config(&format!("{text}pulse = /definitely/not/here.txt\n")).unwrap_err();
        assert!(err.mentions("pulse"));
    }

    #[test]
    fn params_at_sweep_points() {
        let cfg = parse_config("preset = fig6\n").unwrap();
        let p = cfg.params_at(5.0).unwrap();
        assert_eq!((p.delta1, p.delta2), (5.0, 5.0));
        let cfg = parse_config("preset = fig4\n").unwrap();
        let p = cfg.params_at(2.0).unwrap();
        assert!((p.big_gamma - 16.03).abs() < 1e-3);
    }
}
