//! Scenario files.
//!
//! The format is `key = value` lines grouped in `[section]`s, with `#`
//! comments. Physical quantities may carry a unit suffix (`1 km/h`,
//! `120 s`, `2 min`) and are converted to SI when parsed; [`render_config`]
//! writes SI values back with explicit units so that parsing the rendered
//! text yields the same configuration.
//!
//! ```text
//! [run]
//! seed = 7
//!
//! [queuing]
//! N = 10
//! K = 8
//! new_call_rate = 0.1 /s
//! handover_rate = 0.075 /s
//! service_time = 120 s
//!
//! [cac]
//! velocity = 1 km/h
//! threshold_times = 0 s, 10 s, 20 s
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;

use crate::mobility::KMH;
use crate::queuing::{GuardChannelParams, OptimizationCriterion};
use crate::sim::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Command {
    Blocking,
    SweepK,
    OptimizeK,
    CacSim,
    SweepT,
    DesValidate,
    Flow,
}

impl Command {
    fn needs_queuing(&self) -> bool {
        matches!(
            self,
            Command::Blocking | Command::SweepK | Command::OptimizeK | Command::DesValidate
        )
    }

    fn needs_guard_threshold(&self) -> bool {
        matches!(self, Command::Blocking | Command::DesValidate)
    }
}

/// A config problem. `line` is 1-based; 0 means the problem is not tied to
/// a single line (e.g. a section that is absent altogether).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub const DEFAULT_THRESHOLD_TIMES: [f64; 3] = [0.0, 10.0, 20.0];
pub const DEFAULT_DES_HORIZON: f64 = 2.0e6;
pub const DEFAULT_CRITERION: OptimizationCriterion =
    OptimizationCriterion::MaxKWithinTarget { target: 0.30 };
const DEFAULT_RATIO_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Channel-pool traffic. Present whenever the `[queuing]` section is
    /// complete; the guard threshold defaults to N when omitted.
    pub queuing: Option<GuardChannelParams>,
    /// Admission-control scenario; also carries the run seed.
    pub scenario: ScenarioConfig,
    pub threshold_times: Vec<f64>,
    pub criterion: OptimizationCriterion,
    /// Seconds simulated by `des-validate`.
    pub des_horizon: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            queuing: None,
            scenario: ScenarioConfig::default(),
            threshold_times: DEFAULT_THRESHOLD_TIMES.to_vec(),
            criterion: DEFAULT_CRITERION,
            des_horizon: DEFAULT_DES_HORIZON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dim {
    Count,
    Plain,
    Length,
    Speed,
    Time,
    Rate,
    Decibel,
    DecibelMilliwatt,
}

impl Dim {
    /// Conversion factor to SI for `unit`; the empty unit means SI already.
    fn factor(&self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (_, "") => 1.0,
            (Dim::Length, "m") => 1.0,
            (Dim::Length, "km") => 1000.0,
            (Dim::Speed, "m/s") => 1.0,
            (Dim::Speed, "km/h" | "km/hr" | "kmh") => KMH,
            (Dim::Time, "s" | "sec") => 1.0,
            (Dim::Time, "ms") => 1e-3,
            (Dim::Time, "min") => 60.0,
            (Dim::Time, "h" | "hr") => 3600.0,
            (Dim::Rate, "/s" | "1/s" | "/sec") => 1.0,
            (Dim::Rate, "/min" | "1/min") => 1.0 / 60.0,
            (Dim::Rate, "/h" | "1/h" | "/hr") => 1.0 / 3600.0,
            (Dim::Decibel, "dB") => 1.0,
            (Dim::DecibelMilliwatt, "dBm") => 1.0,
            _ => return None,
        };
        Some(f)
    }

    fn si_unit(&self) -> &'static str {
        match self {
            Dim::Count | Dim::Plain => "",
            Dim::Length => "m",
            Dim::Speed => "m/s",
            Dim::Time => "s",
            Dim::Rate => "/s",
            Dim::Decibel => "dB",
            Dim::DecibelMilliwatt => "dBm",
        }
    }
}

struct KeySpec {
    section: &'static str,
    name: &'static str,
    aliases: &'static [&'static str],
    dim: Dim,
}

const KEYS: &[KeySpec] = &[
    KeySpec { section: "run", name: "seed", aliases: &[], dim: Dim::Count },
    KeySpec { section: "queuing", name: "num_channels", aliases: &["N"], dim: Dim::Count },
    KeySpec { section: "queuing", name: "guard_threshold", aliases: &["K"], dim: Dim::Count },
    KeySpec { section: "queuing", name: "new_call_rate", aliases: &["lambda_nf"], dim: Dim::Rate },
    KeySpec { section: "queuing", name: "handover_rate", aliases: &["lambda_hm"], dim: Dim::Rate },
    KeySpec { section: "queuing", name: "service_rate", aliases: &["mu"], dim: Dim::Rate },
    KeySpec { section: "queuing", name: "service_time", aliases: &[], dim: Dim::Time },
    KeySpec { section: "optimize", name: "criterion", aliases: &[], dim: Dim::Plain },
    KeySpec { section: "optimize", name: "target", aliases: &[], dim: Dim::Plain },
    KeySpec { section: "optimize", name: "ratio_threshold", aliases: &[], dim: Dim::Plain },
    KeySpec { section: "des", name: "horizon", aliases: &[], dim: Dim::Time },
    KeySpec { section: "cac", name: "radius", aliases: &[], dim: Dim::Length },
    KeySpec { section: "cac", name: "mean_velocity", aliases: &["velocity"], dim: Dim::Speed },
    KeySpec { section: "cac", name: "mean_call_life", aliases: &["call_life"], dim: Dim::Time },
    KeySpec { section: "cac", name: "velocity_threshold", aliases: &[], dim: Dim::Speed },
    KeySpec { section: "cac", name: "threshold_time", aliases: &["T", "min_dwell"], dim: Dim::Time },
    KeySpec { section: "cac", name: "threshold_times", aliases: &[], dim: Dim::Time },
    KeySpec { section: "cac", name: "cir_threshold", aliases: &[], dim: Dim::Decibel },
    KeySpec { section: "cac", name: "rssi_threshold", aliases: &[], dim: Dim::DecibelMilliwatt },
    KeySpec { section: "cac", name: "num_faps", aliases: &[], dim: Dim::Count },
    KeySpec { section: "cac", name: "trials", aliases: &[], dim: Dim::Count },
    KeySpec { section: "cac", name: "return_window", aliases: &[], dim: Dim::Time },
    KeySpec { section: "cac", name: "termination_window", aliases: &[], dim: Dim::Time },
];

const SECTIONS: &[&str] = &["run", "queuing", "optimize", "des", "cac"];

fn lookup(section: &str, key: &str) -> Option<&'static KeySpec> {
    KEYS.iter()
        .find(|k| k.section == section && (k.name == key || k.aliases.contains(&key)))
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    raw: String,
}

/// Raw entries keyed by (section, canonical key name).
#[derive(Debug, Default)]
struct Document {
    entries: BTreeMap<(&'static str, &'static str), Entry>,
    section_lines: BTreeMap<&'static str, usize>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::default();
        let mut section: &'static str = "run";
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, "unterminated section header"))?
                    .trim();
                section = SECTIONS
                    .iter()
                    .copied()
                    .find(|s| *s == name)
                    .ok_or_else(|| ConfigError::at(line, format!("unknown section [{name}]")))?;
                doc.section_lines.entry(section).or_insert(line);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, "expected `key = value`"))?;
            let key = key.trim();
            let spec = lookup(section, key)
                .ok_or_else(|| ConfigError::at(line, format!("unknown key `{key}` in [{section}]")))?;
            let previous = doc.entries.insert(
                (section, spec.name),
                Entry {
                    line,
                    raw: value.trim().to_string(),
                },
            );
            if let Some(prev) = previous {
                return Err(ConfigError::at(
                    line,
                    format!("`{}` already set on line {}", spec.name, prev.line),
                ));
            }
        }
        Ok(doc)
    }

    fn get(&self, section: &'static str, name: &'static str) -> Option<&Entry> {
        self.entries.get(&(section, name))
    }

    fn spec(section: &str, name: &str) -> &'static KeySpec {
        lookup(section, name).expect("key table covers every lookup")
    }

    fn quantity(&self, section: &'static str, name: &'static str) -> Result<Option<(f64, usize)>, ConfigError> {
        let Some(entry) = self.get(section, name) else {
            return Ok(None);
        };
        let value = parse_quantity(&entry.raw, Self::spec(section, name).dim)
            .map_err(|m| ConfigError::at(entry.line, format!("{name}: {m}")))?;
        Ok(Some((value, entry.line)))
    }

    fn count(&self, section: &'static str, name: &'static str) -> Result<Option<(u64, usize)>, ConfigError> {
        let Some(entry) = self.get(section, name) else {
            return Ok(None);
        };
        let value = entry
            .raw
            .parse::<u64>()
            .map_err(|_| ConfigError::at(entry.line, format!("{name}: expected a non-negative integer, got `{}`", entry.raw)))?;
        Ok(Some((value, entry.line)))
    }

    fn missing(&self, section: &'static str, name: &'static str) -> ConfigError {
        let line = self.section_lines.get(section).copied().unwrap_or(0);
        ConfigError::at(line, format!("missing required field `{name}` in [{section}]"))
    }
}

fn split_unit(raw: &str) -> (&str, &str) {
    let idx = raw
        .char_indices()
        .find(|(i, c)| {
            !(c.is_ascii_digit()
                || *c == '.'
                || *c == '-'
                || *c == '+'
                || ((*c == 'e' || *c == 'E') && *i > 0))
        })
        .map_or(raw.len(), |(i, _)| i);
    (raw[..idx].trim(), raw[idx..].trim())
}

fn parse_quantity(raw: &str, dim: Dim) -> Result<f64, String> {
    let (number, unit) = split_unit(raw);
    let value: f64 = number
        .parse()
        .map_err(|_| format!("expected a number, got `{raw}`"))?;
    if !value.is_finite() {
        return Err(format!("value `{raw}` is not finite"));
    }
    let factor = dim
        .factor(unit)
        .ok_or_else(|| format!("unit `{unit}` not valid here (expected {})", dim.si_unit()))?;
    Ok(value * factor)
}

fn positive(value: f64, line: usize, what: &str) -> Result<f64, ConfigError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::at(line, format!("{what} must be positive, got {value}")))
    }
}

fn non_negative(value: f64, line: usize, what: &str) -> Result<f64, ConfigError> {
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::at(line, format!("{what} must be non-negative, got {value}")))
    }
}

/// Parses and validates `text` for `command`. Omitted admission-control
/// fields take their defaults.
pub fn parse_config(text: &str, command: Command) -> Result<Config, ConfigError> {
    let doc = Document::parse(text)?;
    let mut config = Config::default();

    if let Some((seed, _)) = doc.count("run", "seed")? {
        config.scenario.seed = seed;
    }

    config.queuing = parse_queuing(&doc, command)?;
    config.criterion = parse_criterion(&doc)?;
    if let Some((horizon, line)) = doc.quantity("des", "horizon")? {
        config.des_horizon = positive(horizon, line, "horizon")?;
    }
    parse_cac(&doc, &mut config)?;
    Ok(config)
}

fn parse_queuing(doc: &Document, command: Command) -> Result<Option<GuardChannelParams>, ConfigError> {
    const S: &str = "queuing";
    let n = doc.count(S, "num_channels")?;
    let k = doc.count(S, "guard_threshold")?;
    let new_rate = doc.quantity(S, "new_call_rate")?;
    let ho_rate = doc.quantity(S, "handover_rate")?;
    let mu = doc.quantity(S, "service_rate")?;
    let service_time = doc.quantity(S, "service_time")?;

    if let (Some(_), Some(entry)) = (mu, doc.get(S, "service_time")) {
        return Err(ConfigError::at(
            entry.line,
            "give either service_rate or service_time, not both",
        ));
    }
    let mu = match (mu, service_time) {
        (Some((rate, line)), None) => Some((positive(rate, line, "service_rate")?, line)),
        (None, Some((t, line))) => Some((1.0 / positive(t, line, "service_time")?, line)),
        _ => None,
    };
    if let Some((n, line)) = n {
        if n == 0 {
            return Err(ConfigError::at(line, "num_channels must be at least 1"));
        }
        if let Some((k, k_line)) = k {
            if k > n {
                return Err(ConfigError::at(k_line, format!("K = {k} exceeds N = {n}")));
            }
        }
    }
    for (rate, name) in [(new_rate, "new_call_rate"), (ho_rate, "handover_rate")] {
        if let Some((r, line)) = rate {
            non_negative(r, line, name)?;
        }
    }

    let required = command.needs_queuing();
    let missing = |name| -> Result<Option<GuardChannelParams>, ConfigError> {
        if required {
            Err(doc.missing(S, name))
        } else {
            Ok(None)
        }
    };
    let Some((n, _)) = n else { return missing("num_channels") };
    let Some((new_rate, _)) = new_rate else { return missing("new_call_rate") };
    let Some((ho_rate, _)) = ho_rate else { return missing("handover_rate") };
    let Some((mu, _)) = mu else { return missing("service_rate") };
    let k = match k {
        Some((k, _)) => k,
        None if command.needs_guard_threshold() => return missing("guard_threshold"),
        None => n,
    };
    let params = GuardChannelParams {
        num_channels: n as usize,
        guard_threshold: k as usize,
        new_call_rate: new_rate,
        handover_rate: ho_rate,
        service_rate: mu,
    };
    params
        .validate()
        .map_err(|e| ConfigError::at(doc.section_lines.get(S).copied().unwrap_or(0), e.to_string()))?;
    Ok(Some(params))
}

fn parse_criterion(doc: &Document) -> Result<OptimizationCriterion, ConfigError> {
    const S: &str = "optimize";
    let target = doc.quantity(S, "target")?;
    let ratio = doc.quantity(S, "ratio_threshold")?;
    let kind = doc.get(S, "criterion");
    match kind.map(|e| (e.raw.as_str(), e.line)) {
        None | Some(("max-k", _)) => {
            let target = match target {
                Some((t, line)) => non_negative(t, line, "target")?,
                None => match DEFAULT_CRITERION {
                    OptimizationCriterion::MaxKWithinTarget { target } => target,
                    _ => unreachable!(),
                },
            };
            Ok(OptimizationCriterion::MaxKWithinTarget { target })
        }
        Some(("marginal", _)) => {
            let ratio_threshold = match ratio {
                Some((r, line)) => non_negative(r, line, "ratio_threshold")?,
                None => DEFAULT_RATIO_THRESHOLD,
            };
            Ok(OptimizationCriterion::MarginalTradeoff { ratio_threshold })
        }
        Some((other, line)) => Err(ConfigError::at(
            line,
            format!("criterion must be `max-k` or `marginal`, got `{other}`"),
        )),
    }
}

fn parse_cac(doc: &Document, config: &mut Config) -> Result<(), ConfigError> {
    const S: &str = "cac";
    let sc = &mut config.scenario;
    if let Some((r, line)) = doc.quantity(S, "radius")? {
        sc.geometry.radius = positive(r, line, "radius")?;
    }
    if let Some((v, line)) = doc.quantity(S, "mean_velocity")? {
        sc.mobility.mean_velocity = positive(v, line, "mean_velocity")?;
    }
    if let Some((c, line)) = doc.quantity(S, "mean_call_life")? {
        sc.mobility.mean_call_life = positive(c, line, "mean_call_life")?;
    }
    if let Some((v, line)) = doc.quantity(S, "velocity_threshold")? {
        sc.thresholds.velocity_threshold = positive(v, line, "velocity_threshold")?;
    }
    if let Some((t, line)) = doc.quantity(S, "threshold_time")? {
        sc.thresholds.min_dwell = non_negative(t, line, "threshold_time")?;
    }
    if let Some((c, _)) = doc.quantity(S, "cir_threshold")? {
        sc.thresholds.cir_threshold = c;
    }
    if let Some((r, _)) = doc.quantity(S, "rssi_threshold")? {
        sc.thresholds.rssi_threshold = r;
    }
    if let Some((n, line)) = doc.count(S, "num_faps")? {
        sc.num_faps = u32::try_from(n)
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| ConfigError::at(line, "num_faps must be between 1 and 2^32-1"))?;
    }
    if let Some((n, line)) = doc.count(S, "trials")? {
        if n == 0 {
            return Err(ConfigError::at(line, "trials must be at least 1"));
        }
        sc.trials = n;
    }
    if let Some((w, line)) = doc.quantity(S, "return_window")? {
        sc.windows.return_window = positive(w, line, "return_window")?;
    }
    if let Some((w, line)) = doc.quantity(S, "termination_window")? {
        sc.windows.termination_window = positive(w, line, "termination_window")?;
    }
    if let Some(entry) = doc.get(S, "threshold_times") {
        let times = entry
            .raw
            .split(',')
            .map(|item| {
                parse_quantity(item.trim(), Dim::Time)
                    .map_err(|m| ConfigError::at(entry.line, format!("threshold_times: {m}")))
                    .and_then(|t| non_negative(t, entry.line, "threshold_times"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if times.is_empty() {
            return Err(ConfigError::at(entry.line, "threshold_times is empty"));
        }
        config.threshold_times = times;
    }
    Ok(())
}

/// Renders `config` in SI units. `parse_config(&render_config(c), cmd)`
/// reproduces `c` for every command `c` was valid for.
pub fn render_config(config: &Config) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    let q = |v: f64, dim: Dim| match dim.si_unit() {
        "" => format!("{v}"),
        unit => format!("{v} {unit}"),
    };

    line("[run]".into());
    line(format!("seed = {}", config.scenario.seed));

    if let Some(p) = &config.queuing {
        line(String::new());
        line("[queuing]".into());
        line(format!("num_channels = {}", p.num_channels));
        line(format!("guard_threshold = {}", p.guard_threshold));
        line(format!("new_call_rate = {}", q(p.new_call_rate, Dim::Rate)));
        line(format!("handover_rate = {}", q(p.handover_rate, Dim::Rate)));
        line(format!("service_rate = {}", q(p.service_rate, Dim::Rate)));
    }

    line(String::new());
    line("[optimize]".into());
    match config.criterion {
        OptimizationCriterion::MaxKWithinTarget { target } => {
            line("criterion = max-k".into());
            line(format!("target = {target}"));
        }
        OptimizationCriterion::MarginalTradeoff { ratio_threshold } => {
            line("criterion = marginal".into());
            line(format!("ratio_threshold = {ratio_threshold}"));
        }
    }

    line(String::new());
    line("[des]".into());
    line(format!("horizon = {}", q(config.des_horizon, Dim::Time)));

    let sc = &config.scenario;
    line(String::new());
    line("[cac]".into());
    line(format!("radius = {}", q(sc.geometry.radius, Dim::Length)));
    line(format!("mean_velocity = {}", q(sc.mobility.mean_velocity, Dim::Speed)));
    line(format!("mean_call_life = {}", q(sc.mobility.mean_call_life, Dim::Time)));
    line(format!("velocity_threshold = {}", q(sc.thresholds.velocity_threshold, Dim::Speed)));
    line(format!("threshold_time = {}", q(sc.thresholds.min_dwell, Dim::Time)));
    line(format!("cir_threshold = {}", q(sc.thresholds.cir_threshold, Dim::Decibel)));
    line(format!("rssi_threshold = {}", q(sc.thresholds.rssi_threshold, Dim::DecibelMilliwatt)));
    line(format!("num_faps = {}", sc.num_faps));
    line(format!("trials = {}", sc.trials));
    line(format!("return_window = {}", q(sc.windows.return_window, Dim::Time)));
    line(format!("termination_window = {}", q(sc.windows.termination_window, Dim::Time)));
    let times: Vec<String> = config
        .threshold_times
        .iter()
        .map(|t| q(*t, Dim::Time))
        .collect();
    line(format!("threshold_times = {}", times.join(", ")));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Summary,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Command as ValueEnum>::from_str(s, true)
    }
}
