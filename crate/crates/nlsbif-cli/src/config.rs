//! Strict sectioned key-value configuration. Unknown sections or keys are
//! rejected with a line diagnostic: silent typos corrupt long parameter
//! studies.

use nlsbif_core::schrodinger::Normalization;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {}: {}", l, self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>, line: Option<usize>) -> ConfigError {
    ConfigError { message: message.into(), line }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Trace,
    Pitchfork,
    Scaling,
    Localized,
    ReproduceFigure,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Trace => "trace",
            Scenario::Pitchfork => "pitchfork",
            Scenario::Scaling => "scaling",
            Scenario::Localized => "localized",
            Scenario::ReproduceFigure => "reproduce_figure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trace" => Some(Self::Trace),
            "pitchfork" => Some(Self::Pitchfork),
            "scaling" => Some(Self::Scaling),
            "localized" => Some(Self::Localized),
            "reproduce_figure" => Some(Self::ReproduceFigure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig1a,
    Fig2,
    Fig2a,
    FigNew,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig1a => "fig1a",
            FigureId::Fig2 => "fig2",
            FigureId::Fig2a => "fig2a",
            FigureId::FigNew => "figNew",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig1" => Some(Self::Fig1),
            "fig1a" => Some(Self::Fig1a),
            "fig2" => Some(Self::Fig2),
            "fig2a" => Some(Self::Fig2a),
            "figNew" | "fignew" | "fig_new" => Some(Self::FigNew),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PotentialSpec {
    SingleWell,
    DoubleWell { s: f64 },
    Tabulated { file: PathBuf },
}

#[derive(Debug, Clone)]
pub enum LocalizedCenter {
    /// Numeric position.
    At(f64),
    /// The right-hand well minimum of the double well.
    WellMinimum,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub normalization: Normalization,
    pub p: f64,
    pub sigma: f64,
    pub potential: PotentialSpec,
    /// Domain half-width; `None` selects `max(25, s+15, 10/sqrt(E_max))`.
    pub half_width: Option<f64>,
    pub dx: f64,
    pub stencil_order: usize,
    pub e_start: Option<f64>,
    pub e_start_offset: f64,
    pub e_target: f64,
    pub de_init: Option<f64>,
    pub de_max: f64,
    pub de_min: f64,
    pub newton_tol: f64,
    pub a0_rel: f64,
    pub scaling_e_min: f64,
    pub scaling_e_max: f64,
    pub scaling_points: usize,
    pub scaling_x0: f64,
    pub localized_x0: LocalizedCenter,
    pub localized_e_list: Vec<f64>,
    pub probe_x0: Option<f64>,
    pub audit: bool,
    pub figure: Option<FigureId>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Trace,
            normalization: Normalization::Section5,
            p: 1.0,
            sigma: -2.0,
            potential: PotentialSpec::DoubleWell { s: 0.7 },
            half_width: None,
            dx: 0.0125,
            stencil_order: 4,
            e_start: None,
            e_start_offset: 0.02,
            e_target: 50.0,
            de_init: None,
            de_max: 0.25,
            de_min: 1e-7,
            newton_tol: 1e-10,
            a0_rel: 0.05,
            scaling_e_min: 50.0,
            scaling_e_max: 500.0,
            scaling_points: 16,
            scaling_x0: 0.0,
            localized_x0: LocalizedCenter::At(0.0),
            localized_e_list: vec![60.0, 100.0, 160.0, 260.0, 400.0],
            probe_x0: None,
            audit: false,
            figure: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Parse the sectioned key-value text. `scenario_arg` is the CLI
    /// subcommand; a `[run] scenario` key, when present, must agree.
    pub fn parse(text: &str, scenario_arg: Scenario) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig { scenario: scenario_arg, ..RunConfig::default() };
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err("malformed section header", Some(lineno)))?;
                section = name.trim().to_string();
                match section.as_str() {
                    "run" | "potential" | "grid" | "continuation" | "pitchfork" | "scaling"
                    | "localized" | "audit" | "figure" | "output" => {}
                    other => return Err(err(format!("unknown section [{other}]"), Some(lineno))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value", Some(lineno)))?;
            let key = key.trim();
            let value = value.trim();
            let full = format!("{section}.{key}");
            if let Some(prev) = seen.insert(full.clone(), lineno) {
                return Err(err(format!("duplicate key {full} (first at line {prev})"), Some(lineno)));
            }
            apply_key(&mut cfg, &section, key, value, lineno)?;
        }
        validate(&cfg)?;
        Ok(cfg)
    }

    pub fn parse_file(path: &Path, scenario_arg: Scenario) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display()), None))?;
        Self::parse(&text, scenario_arg)
    }
}

fn parse_f64(value: &str, lineno: usize) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|e| err(format!("expected a number, got '{value}' ({e})"), Some(lineno)))
}

fn parse_usize(value: &str, lineno: usize) -> Result<usize, ConfigError> {
    value
        .parse::<usize>()
        .map_err(|e| err(format!("expected an integer, got '{value}' ({e})"), Some(lineno)))
}

fn parse_bool(value: &str, lineno: usize) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(err(format!("expected a boolean, got '{other}'"), Some(lineno))),
    }
}

fn apply_key(
    cfg: &mut RunConfig,
    section: &str,
    key: &str,
    value: &str,
    lineno: usize,
) -> Result<(), ConfigError> {
    let unknown = || Err(err(format!("unknown key '{key}' in section [{section}]"), Some(lineno)));
    match section {
        "run" => match key {
            "scenario" => {
                let s = Scenario::parse(value)
                    .ok_or_else(|| err(format!("unknown scenario '{value}'"), Some(lineno)))?;
                if s != cfg.scenario {
                    return Err(err(
                        format!(
                            "config scenario '{}' disagrees with the CLI subcommand '{}'",
                            s.name(),
                            cfg.scenario.name()
                        ),
                        Some(lineno),
                    ));
                }
            }
            "normalization" => {
                cfg.normalization = match value {
                    "section1" => Normalization::Section1,
                    "section5" => Normalization::Section5,
                    other => {
                        return Err(err(format!("unknown normalization '{other}'"), Some(lineno)))
                    }
                }
            }
            "p" => cfg.p = parse_f64(value, lineno)?,
            "sigma" => cfg.sigma = parse_f64(value, lineno)?,
            _ => return unknown(),
        },
        "potential" => match key {
            "kind" => {
                cfg.potential = match value {
                    "single_well_sech2" => PotentialSpec::SingleWell,
                    "double_well_sech2" => match &cfg.potential {
                        PotentialSpec::DoubleWell { s } => PotentialSpec::DoubleWell { s: *s },
                        _ => PotentialSpec::DoubleWell { s: 0.7 },
                    },
                    "tabulated" => PotentialSpec::Tabulated { file: PathBuf::new() },
                    other => {
                        return Err(err(format!("unknown potential kind '{other}'"), Some(lineno)))
                    }
                }
            }
            "s" => {
                let s = parse_f64(value, lineno)?;
                cfg.potential = PotentialSpec::DoubleWell { s };
            }
            "file" => cfg.potential = PotentialSpec::Tabulated { file: PathBuf::from(value) },
            _ => return unknown(),
        },
        "grid" => match key {
            "half_width" => cfg.half_width = Some(parse_f64(value, lineno)?),
            "dx" => cfg.dx = parse_f64(value, lineno)?,
            "stencil_order" => cfg.stencil_order = parse_usize(value, lineno)?,
            _ => return unknown(),
        },
        "continuation" => match key {
            "e_start" => {
                cfg.e_start =
                    if value == "auto" { None } else { Some(parse_f64(value, lineno)?) }
            }
            "e_start_offset" => cfg.e_start_offset = parse_f64(value, lineno)?,
            "e_target" => cfg.e_target = parse_f64(value, lineno)?,
            "de_init" => cfg.de_init = Some(parse_f64(value, lineno)?),
            "de_max" => cfg.de_max = parse_f64(value, lineno)?,
            "de_min" => cfg.de_min = parse_f64(value, lineno)?,
            "newton_tol" => cfg.newton_tol = parse_f64(value, lineno)?,
            _ => return unknown(),
        },
        "pitchfork" => match key {
            "a0_rel" => cfg.a0_rel = parse_f64(value, lineno)?,
            _ => return unknown(),
        },
        "scaling" => match key {
            "e_min" => cfg.scaling_e_min = parse_f64(value, lineno)?,
            "e_max" => cfg.scaling_e_max = parse_f64(value, lineno)?,
            "points" => cfg.scaling_points = parse_usize(value, lineno)?,
            "x0" => cfg.scaling_x0 = parse_f64(value, lineno)?,
            _ => return unknown(),
        },
        "localized" => match key {
            "x0" => {
                cfg.localized_x0 = if value == "min" {
                    LocalizedCenter::WellMinimum
                } else {
                    LocalizedCenter::At(parse_f64(value, lineno)?)
                }
            }
            "e_list" => {
                let mut out = Vec::new();
                for tok in value.split(',') {
                    out.push(parse_f64(tok.trim(), lineno)?);
                }
                cfg.localized_e_list = out;
            }
            "probe_x0" => cfg.probe_x0 = Some(parse_f64(value, lineno)?),
            _ => return unknown(),
        },
        "audit" => match key {
            "enabled" => cfg.audit = parse_bool(value, lineno)?,
            _ => return unknown(),
        },
        "figure" => match key {
            "id" => {
                cfg.figure = Some(
                    FigureId::parse(value)
                        .ok_or_else(|| err(format!("unknown figure id '{value}'"), Some(lineno)))?,
                )
            }
            _ => return unknown(),
        },
        "output" => match key {
            "directory" => cfg.output_dir = PathBuf::from(value),
            _ => return unknown(),
        },
        "" => return Err(err(format!("key '{key}' outside any section"), Some(lineno))),
        _ => unreachable!("section names validated at the header"),
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if !(cfg.p > 0.0) {
        return Err(err(format!("p must be positive, got {}", cfg.p), None));
    }
    if cfg.sigma == 0.0 {
        return Err(err("sigma must be nonzero", None));
    }
    if !(cfg.dx > 0.0) {
        return Err(err(format!("dx must be positive, got {}", cfg.dx), None));
    }
    if cfg.stencil_order != 2 && cfg.stencil_order != 4 {
        return Err(err(format!("stencil_order must be 2 or 4, got {}", cfg.stencil_order), None));
    }
    if let Some(l) = cfg.half_width {
        if !(l > 0.0) {
            return Err(err(format!("half_width must be positive, got {l}"), None));
        }
    }
    if cfg.normalization == Normalization::Section5 && (cfg.sigma + 2.0).abs() > 1e-12 {
        return Err(err("section5 normalization requires sigma = -2", None));
    }
    if let PotentialSpec::DoubleWell { s } = cfg.potential {
        if !(s >= 0.0) {
            return Err(err(format!("separation must be >= 0, got {s}"), None));
        }
    }
    if cfg.scenario == Scenario::Scaling {
        if !(cfg.scaling_e_max > cfg.scaling_e_min && cfg.scaling_e_min > 0.0) {
            return Err(err("scaling window must satisfy 0 < e_min < e_max", None));
        }
        if cfg.scaling_points < 4 {
            return Err(err("scaling needs at least 4 points", None));
        }
    }
    if cfg.scenario == Scenario::ReproduceFigure && cfg.figure.is_none() {
        return Err(err("reproduce_figure requires [figure] id", None));
    }
    if cfg.de_max <= 0.0 || cfg.de_min <= 0.0 || cfg.de_min > cfg.de_max {
        return Err(err("need 0 < de_min <= de_max", None));
    }
    Ok(())
}

/// Domain half-width rule: wide double wells and narrow large-E solitons
/// both resolved.
pub fn default_half_width(cfg: &RunConfig) -> f64 {
    let s = match cfg.potential {
        PotentialSpec::DoubleWell { s } => s,
        _ => 0.0,
    };
    let e_max = cfg.e_target.abs().max(1.0);
    25.0f64.max(s + 15.0).max(10.0 / e_max.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complete_config() {
        let text = "\
[run]
scenario = pitchfork
normalization = section5
p = 1.0
sigma = -2.0

[potential]
kind = double_well_sech2
s = 0.7

[grid]
dx = 0.0125
stencil_order = 4

[continuation]
e_start = auto
e_target = 15.0
de_max = 0.25

[output]
directory = artifacts
";
        let cfg = RunConfig::parse(text, Scenario::Pitchfork).unwrap();
        assert_eq!(cfg.scenario, Scenario::Pitchfork);
        assert!(matches!(cfg.potential, PotentialSpec::DoubleWell { s } if (s - 0.7).abs() < 1e-15));
        assert_eq!(cfg.output_dir, PathBuf::from("artifacts"));
        assert_eq!(cfg.e_target, 15.0);
    }

    #[test]
    fn rejects_unknown_key_with_line() {
        let text = "[run]\np = 1.0\nwibble = 3\n";
        let e = RunConfig::parse(text, Scenario::Trace).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("wibble"));
    }

    #[test]
    fn rejects_unknown_section_and_duplicates() {
        assert!(RunConfig::parse("[sorcery]\nx = 1\n", Scenario::Trace).is_err());
        let e = RunConfig::parse("[run]\np = 1\np = 2\n", Scenario::Trace).unwrap_err();
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn rejects_invalid_numbers() {
        let e = RunConfig::parse("[grid]\ndx = -0.5\n", Scenario::Trace).unwrap_err();
        assert!(e.message.contains("dx"));
        assert!(RunConfig::parse("[run]\np = banana\n", Scenario::Trace).is_err());
    }

    #[test]
    fn scenario_mismatch_is_an_error() {
        let e = RunConfig::parse("[run]\nscenario = scaling\n", Scenario::Trace).unwrap_err();
        assert!(e.message.contains("disagrees"));
    }
}
