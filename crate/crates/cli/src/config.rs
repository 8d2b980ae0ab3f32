//! Run configuration: flat `key = value` lines grouped under `[section]`
//! headers, with `#` comments.
//!
//! Every length is a bare number in meters. Unit suffixes are refused rather
//! than guessed. Unknown sections and keys are errors that name the line.
//! [`RunConfig::to_text`] writes every field explicitly, so the text re-parses
//! to an identical config. Outputs embed that text as their header.

use std::fmt;
use std::str::FromStr;

use biphoton::experiment::{ModelKind, PairBudget, SlitScanConfig};
use biphoton::gaussfit::{Estimator, LogBase};
use biphoton::model::SpdcConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(entry: &Entry, message: impl Into<String>) -> Self {
        Self {
            line: Some(entry.line),
            key: Some(entry.key.clone()),
            message: message.into(),
        }
    }

    fn line(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: None,
            message: message.into(),
        }
    }

    pub fn plain(message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Report,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Report => "report",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "report" => Ok(Format::Report),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected report or csv)")),
        }
    }
}

/// One named estimator, or all three side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    One(Estimator),
    All,
}

impl EstimatorChoice {
    pub fn estimators(self) -> Vec<Estimator> {
        match self {
            EstimatorChoice::One(e) => vec![e],
            EstimatorChoice::All => Estimator::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorChoice::One(e) => e.name(),
            EstimatorChoice::All => "all",
        }
    }
}

impl FromStr for EstimatorChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "all" {
            return Ok(EstimatorChoice::All);
        }
        s.parse::<Estimator>()
            .map(EstimatorChoice::One)
            .map_err(|_| format!("unknown estimator `{s}` (expected moment, peak, exact or all)"))
    }
}

pub fn log_base_name(b: LogBase) -> &'static str {
    match b {
        LogBase::Two => "2",
        LogBase::E => "e",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutputSection {
    pub format: Format,
    pub log_base: LogBase,
    /// `None` until chosen in the config or on the command line.
    pub estimator: Option<EstimatorChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    KMinus,
    XMinus,
    Fits,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::KMinus => "k_minus",
            DensityKind::XMinus => "x_minus",
            DensityKind::Fits => "fits",
        }
    }
}

impl FromStr for DensityKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "k_minus" => Ok(DensityKind::KMinus),
            "x_minus" => Ok(DensityKind::XMinus),
            "fits" => Ok(DensityKind::Fits),
            other => Err(format!("unknown density `{other}` (expected k_minus, x_minus or fits)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySection {
    pub which: DensityKind,
    /// Grid in SI units of the coordinate: 1/m for k₋, m for x₋.
    pub grid: Option<(f64, f64, usize)>,
    /// Overrides L_z·λ_p/(4π), m².
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaneSet {
    /// z₁ = z₂ = z for each entry.
    Diagonal(Vec<f64>),
    /// Every (z₁, z₂) combination.
    Grid(Vec<f64>, Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateSection {
    pub planes: PlaneSet,
    /// Distances are z̄ = z/(k_p·σ₊·σ₋) rather than meters.
    pub reduced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SchmidtSection {
    pub n_max: Option<usize>,
    /// Overrides the N implied by [spdc].
    pub birth_zone_number: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSection {
    pub material: String,
    /// Defaults to the fixture table shipped with the library.
    pub material_table: Option<String>,
    /// m; defaults to [spdc] crystal_length.
    pub crystal_length: Option<f64>,
    /// m; needed only when the material name is ambiguous.
    pub center_wavelength: Option<f64>,
    /// (center, bandwidth) in m.
    pub filter: Option<(f64, f64)>,
    /// s.
    pub pump_coherence_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub spdc: Option<SpdcConfig>,
    pub output: OutputSection,
    pub density: Option<DensitySection>,
    pub propagate: Option<PropagateSection>,
    pub schmidt: Option<SchmidtSection>,
    pub temporal: Option<TemporalSection>,
    pub slit_scan: Option<SlitScanConfig>,
}

const SECTIONS: [&str; 7] = ["spdc", "output", "density", "propagate", "schmidt", "temporal", "slit_scan"];

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
    used: Vec<bool>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        self.used[i] = true;
        Some(self.entries[i].clone())
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError {
            line: Some(self.line),
            key: Some(key.to_string()),
            message: format!("required in [{}]", self.name),
        }
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key)
            .map(|e| e.value.parse::<T>().map_err(|m| ConfigError::at(&e, m)))
            .transpose()
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|e| number(&e, &e.value)).transpose()
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| self.missing(key))
    }

    fn integer(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|e| {
                e.value.parse::<u64>().map_err(|_| {
                    ConfigError::at(&e, format!("`{}` is not a non-negative integer", e.value))
                })
            })
            .transpose()
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key)
            .map(|e| {
                let items: Result<Vec<f64>> = e.value.split(',').map(|s| number(&e, s.trim())).collect();
                let items = items?;
                if items.is_empty() {
                    return Err(ConfigError::at(&e, "empty list"));
                }
                Ok(items)
            })
            .transpose()
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|e| match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(ConfigError::at(&e, format!("expected true or false, got `{other}`"))),
            })
            .transpose()
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().zip(&self.used).find(|(_, &u)| !u) {
            Some((e, _)) => Err(ConfigError::at(e, format!("unknown key in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn number(entry: &Entry, text: &str) -> Result<f64> {
    if let Ok(v) = text.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
        return Err(ConfigError::at(entry, format!("`{text}` is not finite")));
    }
    let numeric_prefix = text
        .char_indices()
        .take_while(|(_, c)| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        .map(|(i, c)| i + c.len_utf8())
        .last()
        .unwrap_or(0);
    let head = text[..numeric_prefix].trim_end_matches(['e', 'E']);
    if !head.is_empty() && head.parse::<f64>().is_ok() {
        return Err(ConfigError::at(
            entry,
            format!("`{text}` has a unit suffix; give a bare SI value (meters, seconds), e.g. 4e-5"),
        ));
    }
    Err(ConfigError::at(entry, format!("`{text}` is not a number")))
}

fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::line(line, format!("malformed section header `{s}`")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::line(
                    line,
                    format!("unknown section [{name}] (expected one of {})", SECTIONS.join(", ")),
                ));
            }
            if sections.iter().any(|sec| sec.name == name) {
                return Err(ConfigError::line(line, format!("section [{name}] appears twice")));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
                used: Vec::new(),
            });
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| ConfigError::line(line, format!("expected `key = value`, found `{s}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let entry = Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        };
        let Some(sec) = sections.last_mut() else {
            return Err(ConfigError::at(&entry, "key outside any [section]"));
        };
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(&entry, "empty key or value"));
        }
        if sec.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::at(&entry, "duplicate key"));
        }
        sec.entries.push(entry);
        sec.used.push(false);
    }
    Ok(sections)
}

fn invalid(sec: &Section, e: biphoton::Error) -> ConfigError {
    ConfigError {
        line: Some(sec.line),
        key: None,
        message: format!("[{}]: {e}", sec.name),
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for mut sec in parse_sections(text)? {
            match sec.name.as_str() {
                "spdc" => {
                    let lambda_p = sec.required_number("lambda_p")?;
                    let length = sec.required_number("crystal_length")?;
                    let sigma_p = sec.required_number("sigma_p")?;
                    let d_eff = sec.number("d_eff")?;
                    let power = sec.number("pump_power")?;
                    let mut spdc = SpdcConfig::new(lambda_p, length, sigma_p).map_err(|e| invalid(&sec, e))?;
                    match (d_eff, power) {
                        (Some(d), Some(p)) => spdc = spdc.with_brightness(d, p).map_err(|e| invalid(&sec, e))?,
                        (None, None) => {}
                        _ => return Err(sec.missing(if d_eff.is_none() { "d_eff" } else { "pump_power" })),
                    }
                    cfg.spdc = Some(spdc);
                }
                "output" => {
                    if let Some(f) = sec.parsed::<Format>("format")? {
                        cfg.output.format = f;
                    }
                    if let Some(e) = sec.take("log_base") {
                        cfg.output.log_base = e
                            .value
                            .parse()
                            .map_err(|_| ConfigError::at(&e, "expected 2 or e"))?;
                    }
                    cfg.output.estimator = sec.parsed::<EstimatorChoice>("estimator")?;
                }
                "density" => {
                    let which = sec.parsed::<DensityKind>("which")?.ok_or_else(|| sec.missing("which"))?;
                    let min = sec.number("min")?;
                    let max = sec.number("max")?;
                    let n = sec.integer("n_points")?;
                    let grid = match (min, max, n) {
                        (Some(lo), Some(hi), Some(n)) => {
                            if !(hi > lo) || n < 2 {
                                return Err(ConfigError::line(sec.line, "[density] needs min < max and n_points ≥ 2"));
                            }
                            Some((lo, hi, n as usize))
                        }
                        (None, None, None) => None,
                        _ => return Err(ConfigError::line(sec.line, "[density] grid needs all of min, max, n_points")),
                    };
                    if grid.is_none() && which != DensityKind::Fits {
                        return Err(sec.missing("min"));
                    }
                    let a = sec.number("a")?;
                    if a.is_some_and(|a| a <= 0.0) {
                        return Err(ConfigError::line(sec.line, "[density] a must be positive"));
                    }
                    cfg.density = Some(DensitySection { which, grid, a });
                }
                "propagate" => {
                    let z = sec.list("z")?;
                    let z1 = sec.list("z1")?;
                    let z2 = sec.list("z2")?;
                    let planes = match (z, z1, z2) {
                        (Some(z), None, None) => PlaneSet::Diagonal(z),
                        (None, Some(a), Some(b)) => PlaneSet::Grid(a, b),
                        _ => {
                            return Err(ConfigError::line(
                                sec.line,
                                "[propagate] needs either `z` or both `z1` and `z2`",
                            ))
                        }
                    };
                    let reduced = sec.boolean("reduced")?.unwrap_or(false);
                    cfg.propagate = Some(PropagateSection { planes, reduced });
                }
                "schmidt" => {
                    let n_max = sec.integer("n_max")?.map(|n| n as usize);
                    let birth_zone_number = sec.number("birth_zone_number")?;
                    if birth_zone_number.is_some_and(|n| n < 1.0) {
                        return Err(ConfigError::line(sec.line, "[schmidt] birth_zone_number must be ≥ 1"));
                    }
                    cfg.schmidt = Some(SchmidtSection { n_max, birth_zone_number });
                }
                "temporal" => {
                    let material = sec.take("material").ok_or_else(|| sec.missing("material"))?.value;
                    let material_table = sec.take("material_table").map(|e| e.value);
                    let crystal_length = sec.number("crystal_length")?;
                    let center_wavelength = sec.number("center_wavelength")?;
                    let center = sec.number("filter_center")?;
                    let width = sec.number("filter_bandwidth")?;
                    let filter = match (center, width) {
                        (Some(c), Some(w)) => Some((c, w)),
                        (None, None) => None,
                        _ => return Err(ConfigError::line(sec.line, "[temporal] filter needs both filter_center and filter_bandwidth")),
                    };
                    let pump_coherence_time = sec.number("pump_coherence_time")?;
                    cfg.temporal = Some(TemporalSection {
                        material,
                        material_table,
                        crystal_length,
                        center_wavelength,
                        filter,
                        pump_coherence_time,
                    });
                }
                "slit_scan" => {
                    let d = SlitScanConfig::default();
                    let per_step = sec.integer("pairs_per_step")?;
                    let total = sec.integer("total_pairs")?;
                    let budget = match (per_step, total) {
                        (Some(p), None) => PairBudget::PerStep(p),
                        (None, Some(t)) => PairBudget::Total(t),
                        (None, None) => d.budget,
                        _ => return Err(ConfigError::line(sec.line, "give pairs_per_step or total_pairs, not both")),
                    };
                    let model = match sec.take("model") {
                        Some(e) => e.value.parse::<ModelKind>().map_err(|m| ConfigError::at(&e, m.to_string()))?,
                        None => d.model,
                    };
                    let scan = SlitScanConfig {
                        slit_width: sec.number("slit_width")?.unwrap_or(d.slit_width),
                        fixed_slit_position: sec.number("fixed_slit_position")?.unwrap_or(d.fixed_slit_position),
                        scan_min: sec.number("scan_min")?.unwrap_or(d.scan_min),
                        scan_max: sec.number("scan_max")?.unwrap_or(d.scan_max),
                        scan_steps: sec.integer("scan_steps")?.map_or(d.scan_steps, |n| n as usize),
                        budget,
                        rng_seed: sec.integer("rng_seed")?.unwrap_or(d.rng_seed),
                        model,
                    };
                    scan.validate().map_err(|e| invalid(&sec, e))?;
                    cfg.slit_scan = Some(scan);
                }
                _ => unreachable!("section names are checked while parsing"),
            }
            sec.finish()?;
        }
        Ok(cfg)
    }
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn from_file(path: &str) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::plain(format!("cannot read config `{path}`: {e}")))?;
        text.parse()
    }

    /// Canonical text with every field written out. Re-parses to `self`.
    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        let mut kv = |k: &str, v: String| out.push(format!("{k} = {v}"));
        if let Some(s) = &self.spdc {
            kv("[spdc]", String::new());
            kv("lambda_p", format!("{:e}", s.lambda_p));
            kv("crystal_length", format!("{:e}", s.crystal_length));
            kv("sigma_p", format!("{:e}", s.sigma_p));
            if let (Some(d), Some(p)) = (s.d_eff, s.pump_power) {
                kv("d_eff", format!("{d:e}"));
                kv("pump_power", format!("{p:e}"));
            }
        }
        kv("[output]", String::new());
        kv("format", self.output.format.name().into());
        kv("log_base", log_base_name(self.output.log_base).into());
        if let Some(e) = self.output.estimator {
            kv("estimator", e.name().into());
        }
        if let Some(d) = &self.density {
            kv("[density]", String::new());
            kv("which", d.which.name().into());
            if let Some((lo, hi, n)) = d.grid {
                kv("min", format!("{lo:e}"));
                kv("max", format!("{hi:e}"));
                kv("n_points", n.to_string());
            }
            if let Some(a) = d.a {
                kv("a", format!("{a:e}"));
            }
        }
        if let Some(p) = &self.propagate {
            kv("[propagate]", String::new());
            match &p.planes {
                PlaneSet::Diagonal(z) => kv("z", list_text(z)),
                PlaneSet::Grid(a, b) => {
                    kv("z1", list_text(a));
                    kv("z2", list_text(b));
                }
            }
            kv("reduced", p.reduced.to_string());
        }
        if let Some(s) = &self.schmidt {
            kv("[schmidt]", String::new());
            if let Some(n) = s.n_max {
                kv("n_max", n.to_string());
            }
            if let Some(n) = s.birth_zone_number {
                kv("birth_zone_number", format!("{n:e}"));
            }
        }
        if let Some(t) = &self.temporal {
            kv("[temporal]", String::new());
            kv("material", t.material.clone());
            if let Some(p) = &t.material_table {
                kv("material_table", p.clone());
            }
            if let Some(l) = t.crystal_length {
                kv("crystal_length", format!("{l:e}"));
            }
            if let Some(w) = t.center_wavelength {
                kv("center_wavelength", format!("{w:e}"));
            }
            if let Some((c, w)) = t.filter {
                kv("filter_center", format!("{c:e}"));
                kv("filter_bandwidth", format!("{w:e}"));
            }
            if let Some(t) = t.pump_coherence_time {
                kv("pump_coherence_time", format!("{t:e}"));
            }
        }
        if let Some(s) = &self.slit_scan {
            kv("[slit_scan]", String::new());
            for (k, v) in s.echo() {
                kv(k, v);
            }
        }
        // Section headers were pushed as "[name] = "; strip the separator.
        out.iter()
            .map(|l| l.strip_suffix(" = ").unwrap_or(l).to_string() + "\n")
            .collect()
    }

    /// The config text as `# `-prefixed header lines.
    pub fn echo(&self) -> String {
        self.to_text().lines().map(|l| format!("# {l}\n")).collect()
    }

    /// Recovers a config from the `#` header of an output file.
    pub fn from_echo(output: &str) -> std::result::Result<Self, ConfigError> {
        let text: String = output
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')).to_string() + "\n")
            .collect();
        text.parse()
    }

    pub fn spdc(&self) -> std::result::Result<&SpdcConfig, ConfigError> {
        self.spdc
            .as_ref()
            .ok_or_else(|| ConfigError::plain("this command needs an [spdc] section"))
    }
}
