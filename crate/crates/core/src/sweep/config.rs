//! JSON sweep configuration: sections {system, bath, sweep, integrator,
//! sampling, output}, unit strings, dotted overrides and the presets.
//!
//! Energies are meV unless suffixed ("1 eV", "25 meV", "4 K"); times are ps
//! unless suffixed ("7500 fs"). `sweep.series` lists curves that share the
//! grid, each a label plus dotted overrides applied on top of the base.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bath::{BathKind, BathParams, SpectralDensity};
use crate::dynamics::IntegratorConfig;
use crate::fidelity::{DEFAULT_ETA_SQ, DEFAULT_SAMPLES};
use crate::qsystem::{Gate, SystemParams};
use crate::units::ps_to_internal;

use super::{Grid, Spacing, SweepConfig, SweepError, SweepResult, SweepVariable};

/// k_B in meV/K.
const KB_MEV_PER_K: f64 = 0.086_173_332_62;

pub const PRESET_NAMES: [&str; 5] = ["fig1", "fig1_inset", "fig2", "fig3", "fig3_inset"];

pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../../presets/fig1.json"),
        "fig1_inset" => include_str!("../../presets/fig1_inset.json"),
        "fig2" => include_str!("../../presets/fig2.json"),
        "fig3" => include_str!("../../presets/fig3.json"),
        "fig3_inset" => include_str!("../../presets/fig3_inset.json"),
        _ => return None,
    })
}

/// A number, or a string with an optional unit suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy)]
enum Dimension {
    /// meV
    Energy,
    /// ps
    Time,
    Plain,
}

impl Quantity {
    fn resolve(&self, dim: Dimension, field: &str) -> SweepResult<f64> {
        let s = match self {
            Quantity::Number(x) => return Ok(*x),
            Quantity::Text(s) => s.trim(),
        };
        let units: &[(&str, f64)] = match dim {
            Dimension::Energy => &[("meV", 1.0), ("eV", 1000.0), ("K", KB_MEV_PER_K)],
            Dimension::Time => &[("ps", 1.0), ("fs", 1e-3), ("ns", 1e3)],
            Dimension::Plain => &[],
        };
        let (num, factor) = units
            .iter()
            .find_map(|(u, f)| s.strip_suffix(u).map(|rest| (rest.trim(), *f)))
            .unwrap_or((s, 1.0));
        num.parse::<f64>()
            .map(|x| x * factor)
            .map_err(|_| SweepError::config(field, format!("cannot read `{s}` as a {dim:?} value")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    epsilon: Quantity,
    omega: Quantity,
    t_ad: Quantity,
    #[serde(default = "default_gate")]
    gate: Gate,
}

fn default_gate() -> Gate {
    Gate::Gate1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    kind: BathKind,
    #[serde(default)]
    k1: f64,
    #[serde(default)]
    k3: f64,
    omega_c: Quantity,
    temperature: Option<Quantity>,
    t_over_omega: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeries {
    label: String,
    #[serde(default)]
    set: BTreeMap<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: SweepVariable,
    min: Quantity,
    max: Quantity,
    count: usize,
    #[serde(default)]
    spacing: Spacing,
    #[serde(default)]
    fixed_alpha: bool,
    /// Held Ω·t_ad; implies `fixed_alpha`.
    alpha: Option<f64>,
    #[serde(default)]
    series: Vec<RawSeries>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSampling {
    n: usize,
    eta_sq: f64,
}

impl Default for RawSampling {
    fn default() -> Self {
        RawSampling {
            n: DEFAULT_SAMPLES,
            eta_sq: DEFAULT_ETA_SQ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Destination; stdout when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Also write `<path>.json` next to a CSV.
    pub json_mirror: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: RawSystem,
    bath: RawBath,
    sweep: RawSweep,
    #[serde(default)]
    integrator: IntegratorConfig,
    #[serde(default)]
    sampling: RawSampling,
    #[serde(default)]
    output: OutputConfig,
}

/// Everything one CLI invocation runs.
#[derive(Debug, Clone)]
pub struct Plan {
    pub sweeps: Vec<SweepConfig>,
    pub output: OutputConfig,
    /// `--set` overrides as given.
    pub overrides: Vec<String>,
    /// Preset name or config path.
    pub source: String,
    /// The configuration after overrides.
    pub resolved: Value,
}

/// Sets `a.b.c` in a JSON tree. The value is read as JSON when it parses,
/// otherwise as a string.
pub fn set_dotted(root: &mut Value, key: &str, value: Value) -> SweepResult<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(SweepError::Config(format!("malformed override key `{key}`")));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| SweepError::Config(format!("override `{key}`: `{}` is not a section", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("key has at least one part")
}

/// Parses `KEY=VALUE`.
pub fn parse_override(s: &str) -> SweepResult<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| SweepError::Config(format!("override `{s}` is not KEY=VALUE")))?;
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn parse_raw(value: &Value) -> SweepResult<RawConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        SweepError::Config(format!("at `{path}`: {}", e.inner()))
    })
}

fn build(raw: &RawConfig, label: &str) -> SweepResult<SweepConfig> {
    let s = &raw.system;
    let system = SystemParams {
        epsilon: s.epsilon.resolve(Dimension::Energy, "system.epsilon")?,
        omega: s.omega.resolve(Dimension::Energy, "system.omega")?,
        t_ad: ps_to_internal(s.t_ad.resolve(Dimension::Time, "system.t_ad")?),
        gate: s.gate,
    };
    system.validate().map_err(|e| SweepError::Config(format!("system: {e}")))?;

    let b = &raw.bath;
    let temperature = match (&b.temperature, b.t_over_omega) {
        (Some(_), Some(_)) => {
            return Err(SweepError::config("bath.temperature", "give temperature or t_over_omega, not both"))
        }
        (Some(t), None) => t.resolve(Dimension::Energy, "bath.temperature")?,
        (None, Some(r)) => r * system.omega,
        (None, None) => 0.0,
    };
    let bath = BathParams {
        spectral: SpectralDensity {
            kind: b.kind,
            k1: b.k1,
            k3: b.k3,
            omega_c: b.omega_c.resolve(Dimension::Energy, "bath.omega_c")?,
        },
        temperature,
    };
    bath.validate().map_err(|e| SweepError::Config(format!("bath: {e}")))?;

    let sw = &raw.sweep;
    let dim = match sw.variable {
        SweepVariable::Temperature => Dimension::Energy,
        SweepVariable::TAd => Dimension::Time,
        _ => Dimension::Plain,
    };
    let grid = Grid {
        min: sw.min.resolve(dim, "sweep.min")?,
        max: sw.max.resolve(dim, "sweep.max")?,
        count: sw.count,
        spacing: sw.spacing,
    };
    let fixed_alpha = match (sw.alpha, sw.fixed_alpha) {
        (Some(a), _) => Some(a),
        (None, true) => Some(system.alpha()),
        (None, false) => None,
    };
    let cfg = SweepConfig {
        label: label.to_string(),
        system,
        bath,
        variable: sw.variable,
        grid,
        fixed_alpha,
        samples: raw.sampling.n,
        eta_sq: raw.sampling.eta_sq,
        integrator: raw.integrator,
    };
    if cfg.samples == 0 {
        return Err(SweepError::config("sampling.n", "need at least one sample"));
    }
    if !(0.0..1.0).contains(&cfg.eta_sq) {
        return Err(SweepError::config("sampling.eta_sq", format!("must lie in [0, 1), got {}", cfg.eta_sq)));
    }
    cfg.integrator
        .resolve(&cfg.system, &cfg.bath)
        .map_err(|e| SweepError::Config(format!("integrator: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

impl Plan {
    pub fn from_value(mut value: Value, overrides: &[String], source: &str) -> SweepResult<Plan> {
        for o in overrides {
            let (k, v) = parse_override(o)?;
            set_dotted(&mut value, &k, v)?;
        }
        let raw = parse_raw(&value)?;
        let mut sweeps = Vec::new();
        if raw.sweep.series.is_empty() {
            sweeps.push(build(&raw, "base")?);
        } else {
            for series in &raw.sweep.series {
                let mut v = value.clone();
                for (k, x) in &series.set {
                    set_dotted(&mut v, k, x.clone())?;
                }
                let r = parse_raw(&v)?;
                sweeps.push(build(&r, &series.label).map_err(|e| match e {
                    SweepError::Config(m) => SweepError::Config(format!("series `{}`: {m}", series.label)),
                    other => other,
                })?);
            }
        }
        Ok(Plan {
            sweeps,
            output: raw.output,
            overrides: overrides.to_vec(),
            source: source.to_string(),
            resolved: value,
        })
    }

    pub fn from_json(text: &str, overrides: &[String], source: &str) -> SweepResult<Plan> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| SweepError::Config(format!("{source}: invalid JSON: {e}")))?;
        Plan::from_value(value, overrides, source)
    }

    pub fn from_preset(name: &str, overrides: &[String]) -> SweepResult<Plan> {
        let text = preset(name).ok_or_else(|| {
            SweepError::Config(format!("unknown preset `{name}`; available: {}", PRESET_NAMES.join(", ")))
        })?;
        Plan::from_json(text, overrides, name)
    }
}
