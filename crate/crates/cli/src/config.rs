//! Experiment configuration: `key = value` lines grouped into `[sections]`.
//!
//! Complex numbers are written `re+imi` (`0.2+1i`, `-1`, `2i`, `0.5-0.25i`).
//! Lists are comma separated, integer ranges are inclusive (`8..64`) and ray
//! angles are fractions of a turn (`1/3`).

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use buffdyn_core::rays::RayAngle;
use buffdyn_core::rectify::SweepGrid;
use buffdyn_core::{AnalyticMap, Complex};
use ini::{Ini, ParseOption};
use serde::Serialize;

use crate::error::{config_err, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TheoremA,
    TheoremB,
    Est2,
    SumRule,
    Gate,
    PhasePortrait,
    Spiral,
    ResidueAudit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::TheoremA,
        ExperimentKind::TheoremB,
        ExperimentKind::Est2,
        ExperimentKind::SumRule,
        ExperimentKind::Gate,
        ExperimentKind::PhasePortrait,
        ExperimentKind::Spiral,
        ExperimentKind::ResidueAudit,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::TheoremA => "theorem_a",
            ExperimentKind::TheoremB => "theorem_b",
            ExperimentKind::Est2 => "est2",
            ExperimentKind::SumRule => "sum_rule",
            ExperimentKind::Gate => "gate",
            ExperimentKind::PhasePortrait => "phase_portrait",
            ExperimentKind::Spiral => "spiral",
            ExperimentKind::ResidueAudit => "residue_audit",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| config_err(format!("unknown experiment '{s}'")))
    }
}

/// Parse `re+imi`.
pub fn parse_complex(s: &str) -> Result<Complex> {
    let bad = || config_err(format!("invalid complex number '{s}'"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let z = match t.strip_suffix('i') {
        None => Complex::new(t.parse::<f64>().map_err(|_| bad())?, 0.0),
        Some(body) => {
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            let (re, im) = match split {
                Some(k) => (&body[..k], &body[k..]),
                None => ("0", body),
            };
            let im = match im {
                "" | "+" => 1.0,
                "-" => -1.0,
                x => x.parse::<f64>().map_err(|_| bad())?,
            };
            Complex::new(re.parse::<f64>().map_err(|_| bad())?, im)
        }
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad());
    }
    Ok(z)
}

/// Inverse of [`parse_complex`] for echoing values.
pub fn format_complex(z: Complex) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

/// One `[section]` of key/value pairs; keys are marked as they are read so
/// that leftovers can be reported as typos.
#[derive(Debug)]
pub struct Section {
    pub name: String,
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Section {
    fn label(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("[{}] {key}", self.name)
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| config_err(format!("missing key {}", self.label(key))))
    }

    fn parsed<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| config_err(format!("{}: expected {what}, got '{v}'", self.label(key)))),
        }
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        let v = self.parsed::<f64>(key, "a real number")?;
        match v {
            Some(x) if !x.is_finite() => Err(config_err(format!("{}: not finite", self.label(key)))),
            _ => Ok(v),
        }
    }

    pub fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64> {
        let x = self.real_or(key, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(config_err(format!("{}: must be positive", self.label(key))))
        }
    }

    pub fn positive(&self, key: &str) -> Result<f64> {
        self.require(key)?;
        self.positive_or(key, 0.0)
    }

    pub fn uint_or(&self, key: &str, default: u32) -> Result<u32> {
        Ok(self.parsed::<u32>(key, "a non-negative integer")?.unwrap_or(default))
    }

    pub fn complex(&self, key: &str) -> Result<Option<Complex>> {
        self.raw(key)
            .map(|v| parse_complex(v).map_err(|e| config_err(format!("{}: {e}", self.label(key)))))
            .transpose()
    }

    pub fn complex_or(&self, key: &str, default: Complex) -> Result<Complex> {
        Ok(self.complex(key)?.unwrap_or(default))
    }

    pub fn complex_list(&self, key: &str) -> Result<Vec<Complex>> {
        let v = self.require(key)?;
        list(v)
            .map(|x| parse_complex(x).map_err(|e| config_err(format!("{}: {e}", self.label(key)))))
            .collect()
    }

    pub fn real_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let out = list(v)
            .map(|x| {
                x.parse::<f64>()
                    .ok()
                    .filter(|y| y.is_finite())
                    .ok_or_else(|| config_err(format!("{}: invalid number '{x}'", self.label(key))))
            })
            .collect::<Result<Vec<_>>>()?;
        if out.is_empty() {
            return Err(config_err(format!("{}: empty list", self.label(key))));
        }
        Ok(Some(out))
    }

    /// Inclusive range `a..b`, or a single integer.
    pub fn range(&self, key: &str) -> Result<Option<(i32, i32)>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let bad = || config_err(format!("{}: expected a range like 8..64, got '{v}'", self.label(key)));
        let (a, b) = match v.split_once("..") {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (v.trim(), v.trim()),
        };
        let a: i32 = a.parse().map_err(|_| bad())?;
        let b: i32 = b.parse().map_err(|_| bad())?;
        if b < a {
            return Err(config_err(format!("{}: empty range", self.label(key))));
        }
        Ok(Some((a, b)))
    }

    pub fn text_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }

    fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.entries.keys().filter(|k| !used.contains(*k)).map(|k| self.label(k)).collect()
    }
}

/// Parsed file before interpretation.
#[derive(Debug)]
pub struct RawConfig {
    sections: Vec<Section>,
    empty: Section,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let opt = ParseOption { enabled_quote: false, enabled_escape: false, ..Default::default() };
        let ini = Ini::load_from_str_opt(text, opt)
            .map_err(|e| config_err(format!("line {}: {}", e.line, e.msg)))?;
        let mut sections: Vec<Section> = Vec::new();
        for (name, props) in ini.iter() {
            let name = name.unwrap_or("").trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                if name.is_empty() && props.is_empty() {
                    continue;
                }
                return Err(config_err(format!("section [{name}] appears twice")));
            }
            let mut entries = BTreeMap::new();
            for (k, v) in props.iter() {
                if entries.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                    return Err(config_err(format!("key '{k}' repeated in [{name}]")));
                }
            }
            sections.push(Section { name, entries, used: RefCell::new(BTreeSet::new()) });
        }
        let empty = Section { name: String::new(), entries: BTreeMap::new(), used: RefCell::new(BTreeSet::new()) };
        Ok(RawConfig { sections, empty })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// The named section, or an empty one so that defaults apply.
    pub fn section_or_empty(&self, name: &str) -> &Section {
        self.section(name).unwrap_or(&self.empty)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name).ok_or_else(|| config_err(format!("missing section [{name}]")))
    }

    pub fn general(&self) -> &Section {
        self.section_or_empty("")
    }

    /// `[map]` and every `[map.<label>]`, in file order.
    pub fn map_sections(&self) -> Vec<&Section> {
        self.sections.iter().filter(|s| s.name == "map" || s.name.starts_with("map.")).collect()
    }

    fn echo(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.sections
            .iter()
            .filter(|s| !s.entries.is_empty())
            .map(|s| (s.name.clone(), s.entries.clone()))
            .collect()
    }

    fn check_unused(&self) -> Result<()> {
        let extra: Vec<String> = self.sections.iter().flat_map(|s| s.unused()).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!("unknown keys: {}", extra.join(", "))))
        }
    }
}

/// A polynomial, optionally iterated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSpec {
    pub label: String,
    pub coefficients: Vec<Complex>,
    pub power: u32,
    pub radius: f64,
    /// Validity radius of the base polynomial of an iterate.
    pub base_radius: f64,
}

impl MapSpec {
    pub fn from_section(s: &Section) -> Result<Self> {
        let coefficients = s.complex_list("coefficients")?;
        if coefficients.len() < 2 {
            return Err(config_err(format!("[{}] coefficients: need at least two", s.name)));
        }
        let radius = s.positive("radius")?;
        let power = s.uint_or("power", 1)?;
        if power == 0 {
            return Err(config_err(format!("[{}] power: must be at least 1", s.name)));
        }
        let base_radius = s.positive_or("base_radius", 2.0 * radius)?;
        let label = s.name.strip_prefix("map.").unwrap_or(&s.name).to_string();
        Ok(MapSpec { label, coefficients, power, radius, base_radius })
    }

    pub fn build(&self) -> buffdyn_core::Result<AnalyticMap> {
        if self.power == 1 {
            return AnalyticMap::polynomial(self.coefficients.clone(), self.radius);
        }
        let base = AnalyticMap::polynomial(self.coefficients.clone(), self.base_radius)?;
        AnalyticMap::iterate(base, self.power, self.radius)
    }

    pub fn with_coefficient(&self, index: usize, value: Complex) -> MapSpec {
        let mut out = self.clone();
        if out.coefficients.len() <= index {
            out.coefficients.resize(index + 1, Complex::new(0.0, 0.0));
        }
        out.coefficients[index] = value;
        out
    }
}

/// `lambda_n = lambda_0 exp(c/n)` in place of the linear coefficient of the
/// limit map, for `n` in an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub c: Complex,
    pub n_first: u32,
    pub n_last: u32,
    pub q: u32,
}

impl FamilySpec {
    fn from_section(s: &Section) -> Result<Self> {
        let c = s.complex_or("c", Complex::new(1.0, 0.0))?;
        if c == Complex::new(0.0, 0.0) {
            return Err(config_err("[family] c: must be nonzero"));
        }
        let (a, b) = s.range("n")?.ok_or_else(|| config_err("missing key [family] n"))?;
        if a < 1 {
            return Err(config_err("[family] n: must start at 1 or more"));
        }
        let q = s.uint_or("q", 1)?;
        if q == 0 {
            return Err(config_err("[family] q: must be at least 1"));
        }
        Ok(FamilySpec { c, n_first: a as u32, n_last: b as u32, q })
    }

    pub fn ns(&self) -> Vec<u32> {
        (self.n_first..=self.n_last).collect()
    }

    pub fn member(&self, limit: &MapSpec, n: u32) -> MapSpec {
        let lambda0 = limit.coefficients[1];
        limit.with_coefficient(1, lambda0 * (self.c / n as f64).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Fail unless the rays converge.
    Converge,
    /// Report what was seen without a verdict.
    Describe,
}

/// Rays of period `period` at angle `theta` for the maps obtained by adding
/// `shift * s^2` to coefficient `slot` of `[map]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaySpec {
    pub theta: RayAngle,
    pub period: u32,
    pub slot: usize,
    pub shift: Complex,
    /// `(k, s)`, with `k` present when `s = 2^-k`.
    pub steps: Vec<(Option<i32>, f64)>,
    pub t_min: f64,
    pub dt: f64,
    pub landing_tol: f64,
    pub tolerance: f64,
    pub expect: Expectation,
    /// Half-width of the plotted window around 0.
    pub view: f64,
}

pub fn parse_angle(v: &str) -> Result<RayAngle> {
    let bad = || config_err(format!("invalid ray angle '{v}'"));
    let (num, den) = match v.split_once('/') {
        Some((a, b)) => (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?),
        None => (v.trim().parse::<u64>().map_err(|_| bad())?, 1),
    };
    RayAngle::new(num, den).map_err(|e| config_err(format!("ray angle '{v}': {e}")))
}

impl RaySpec {
    fn from_section(s: &Section) -> Result<Self> {
        let theta = parse_angle(s.text_or("theta", "0"))?;
        let period = s.uint_or("period", 1)?;
        let slot = s.uint_or("slot", 0)? as usize;
        let shift = s.complex_or("shift", Complex::new(-1.0, 0.0))?;
        let steps: Vec<(Option<i32>, f64)> = match (s.range("k")?, s.real_list("s")?) {
            (Some(_), Some(_)) => return Err(config_err("[rays]: give either k or s, not both")),
            (Some((a, b)), None) => (a..=b).map(|k| (Some(k), 2f64.powi(-k))).collect(),
            (None, Some(v)) => v.into_iter().map(|x| (None, x)).collect(),
            (None, None) => return Err(config_err("[rays]: one of k or s is required")),
        };
        if steps.iter().any(|(_, x)| !(*x > 0.0)) {
            return Err(config_err("[rays] s: values must be positive"));
        }
        let expect = match s.text_or("expect", "converge") {
            "converge" => Expectation::Converge,
            "describe" => Expectation::Describe,
            x => return Err(config_err(format!("[rays] expect: '{x}' is not converge or describe"))),
        };
        let t_min = s.real_or("t_min", -64.0)?;
        if !(t_min < 0.0) {
            return Err(config_err("[rays] t_min: must be negative"));
        }
        Ok(RaySpec {
            theta,
            period,
            slot,
            shift,
            steps,
            t_min,
            dt: s.positive_or("dt", 1.0 / 32.0)?,
            landing_tol: s.positive_or("landing_tol", 1e-6)?,
            tolerance: s.positive_or("tolerance", 1e-2)?,
            expect,
            view: s.positive_or("view", 2.0)?,
        })
    }

    pub fn member(&self, limit: &MapSpec, s: f64) -> MapSpec {
        let base = limit.coefficients.get(self.slot).copied().unwrap_or_default();
        limit.with_coefficient(self.slot, base + self.shift * (s * s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateSpec {
    pub center: Complex,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremASpec {
    pub epsilon: f64,
    pub radii: Vec<f64>,
    pub grid: SweepGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// `alpha * chi_f` for `[map]`.
    Buff { map: MapSpec, alpha: Complex },
    /// `alpha * w^m / (1 + c w^(m-1))`.
    NormalForm { m: u32, c: Complex, alpha: Complex },
    /// `a (z - center)`.
    Linear { a: Complex, center: Complex },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitSpec {
    pub field: FieldSpec,
    pub center: Complex,
    pub disk: f64,
    pub trajectories: u32,
    /// Seed ring radius as a fraction of the disk radius.
    pub ring: f64,
    pub t_max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralSpec {
    pub map: MapSpec,
    pub center: Complex,
    pub r: f64,
    pub vertices: u32,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSpec {
    pub maps: Vec<MapSpec>,
    pub tolerance: f64,
    pub monodromy_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    TheoremA { limit: MapSpec, family: FamilySpec, sweep: TheoremASpec },
    TheoremB { map: MapSpec, rays: RaySpec },
    Est2 { limit: MapSpec, family: FamilySpec, tolerance: f64 },
    SumRule { limit: MapSpec, family: FamilySpec, envelope: f64 },
    Gate { map: MapSpec, rays: RaySpec, gate: GateSpec },
    PhasePortrait(PortraitSpec),
    Spiral(SpiralSpec),
    ResidueAudit(AuditSpec),
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::TheoremA { .. } => ExperimentKind::TheoremA,
            Experiment::TheoremB { .. } => ExperimentKind::TheoremB,
            Experiment::Est2 { .. } => ExperimentKind::Est2,
            Experiment::SumRule { .. } => ExperimentKind::SumRule,
            Experiment::Gate { .. } => ExperimentKind::Gate,
            Experiment::PhasePortrait(_) => ExperimentKind::PhasePortrait,
            Experiment::Spiral(_) => ExperimentKind::Spiral,
            Experiment::ResidueAudit(_) => ExperimentKind::ResidueAudit,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: Experiment,
    pub out_dir: Option<PathBuf>,
    /// Every key and value as written, for the report.
    pub echo: BTreeMap<String, BTreeMap<String, String>>,
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self> {
        ExperimentConfig::parse_as(text, None)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        ExperimentConfig::parse_as(&text, kind)
    }

    /// Parse, requiring the experiment to be `kind` when given. The
    /// `experiment` key may then be omitted.
    pub fn parse_as(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let g = raw.general();
        let declared = g.raw("experiment").map(ExperimentKind::from_str).transpose()?;
        let kind = match (declared, kind) {
            (Some(d), Some(k)) if d != k => {
                return Err(config_err(format!("config declares experiment {d}, command expects {k}")))
            }
            (Some(d), _) => d,
            (None, Some(k)) => k,
            (None, None) => return Err(config_err("missing key experiment")),
        };
        let name = g.text_or("name", kind.id()).to_string();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') {
            return Err(config_err(format!("name '{name}': use letters, digits, '_', '-' or '.'")));
        }
        let out_dir = g.raw("out_dir").map(PathBuf::from);
        let experiment = interpret(&raw, kind)?;
        raw.check_unused()?;
        Ok(ExperimentConfig { name, experiment, out_dir, echo: raw.echo() })
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind()
    }
}

fn map(raw: &RawConfig) -> Result<MapSpec> {
    MapSpec::from_section(raw.require_section("map")?)
}

fn interpret(raw: &RawConfig, kind: ExperimentKind) -> Result<Experiment> {
    Ok(match kind {
        ExperimentKind::TheoremA => {
            let s = raw.section_or_empty("theorem_a");
            let d = SweepGrid::default();
            let grid = SweepGrid {
                angles: s.uint_or("angles", d.angles as u32)? as usize,
                radii: s.uint_or("rings", d.radii as u32)? as usize,
                t_steps: s.uint_or("t_steps", d.t_steps as u32)? as usize,
            };
            if grid.angles == 0 || grid.radii == 0 || grid.t_steps == 0 {
                return Err(config_err("[theorem_a]: grid sizes must be positive"));
            }
            let radii = s.real_list("radii")?.unwrap_or_else(|| vec![0.05, 0.02, 0.01, 0.005]);
            Experiment::TheoremA {
                limit: map(raw)?,
                family: FamilySpec::from_section(raw.require_section("family")?)?,
                sweep: TheoremASpec { epsilon: s.real_or("epsilon", 0.25)?, radii, grid },
            }
        }
        ExperimentKind::Est2 => Experiment::Est2 {
            limit: map(raw)?,
            family: FamilySpec::from_section(raw.require_section("family")?)?,
            tolerance: raw.section_or_empty("est2").positive_or("tolerance", 0.05)?,
        },
        ExperimentKind::SumRule => Experiment::SumRule {
            limit: map(raw)?,
            family: FamilySpec::from_section(raw.require_section("family")?)?,
            envelope: raw.section_or_empty("sum_rule").positive_or("envelope", 2.0)?,
        },
        ExperimentKind::TheoremB => Experiment::TheoremB {
            map: map(raw)?,
            rays: RaySpec::from_section(raw.require_section("rays")?)?,
        },
        ExperimentKind::Gate => {
            let s = raw.require_section("gate")?;
            Experiment::Gate {
                map: map(raw)?,
                rays: RaySpec::from_section(raw.require_section("rays")?)?,
                gate: GateSpec {
                    center: s.complex("center")?.ok_or_else(|| config_err("missing key [gate] center"))?,
                    radius: s.positive("radius")?,
                },
            }
        }
        ExperimentKind::PhasePortrait => {
            let s = raw.require_section("portrait")?;
            let one = Complex::new(1.0, 0.0);
            let field = match s.text_or("field", "buff") {
                "buff" => FieldSpec::Buff { map: map(raw)?, alpha: s.complex_or("alpha", one)? },
                "normal_form" => {
                    let m = s.uint_or("m", 2)?;
                    if m < 2 {
                        return Err(config_err("[portrait] m: must be at least 2"));
                    }
                    FieldSpec::NormalForm { m, c: s.complex_or("c", Complex::new(0.0, 0.0))?, alpha: s.complex_or("alpha", one)? }
                }
                "linear" => FieldSpec::Linear {
                    a: s.complex("a")?.ok_or_else(|| config_err("missing key [portrait] a"))?,
                    center: s.complex_or("field_center", Complex::new(0.0, 0.0))?,
                },
                x => return Err(config_err(format!("[portrait] field: unknown field '{x}'"))),
            };
            let ring = s.positive_or("ring", 0.5)?;
            if ring >= 1.0 {
                return Err(config_err("[portrait] ring: must be below 1"));
            }
            let trajectories = s.uint_or("trajectories", 24)?;
            if trajectories == 0 {
                return Err(config_err("[portrait] trajectories: must be positive"));
            }
            Experiment::PhasePortrait(PortraitSpec {
                field,
                center: s.complex_or("center", Complex::new(0.0, 0.0))?,
                disk: s.positive("disk")?,
                trajectories,
                ring,
                t_max: s.positive_or("t_max", 50.0)?,
                step: s.positive_or("step", 0.05)?,
            })
        }
        ExperimentKind::Spiral => {
            let s = raw.require_section("spiral")?;
            let vertices = s.uint_or("vertices", 256)?;
            if vertices < 8 {
                return Err(config_err("[spiral] vertices: need at least 8"));
            }
            Experiment::Spiral(SpiralSpec {
                map: map(raw)?,
                center: s.complex_or("center", Complex::new(0.0, 0.0))?,
                r: s.positive("r")?,
                vertices,
                tolerance: s.positive_or("tolerance", 1e-6)?,
            })
        }
        ExperimentKind::ResidueAudit => {
            let maps = raw.map_sections().into_iter().map(MapSpec::from_section).collect::<Result<Vec<_>>>()?;
            if maps.is_empty() {
                return Err(config_err("residue_audit needs at least one [map] or [map.<label>] section"));
            }
            let s = raw.section_or_empty("audit");
            Experiment::ResidueAudit(AuditSpec {
                maps,
                tolerance: s.positive_or("tolerance", 1e-8)?,
                monodromy_tolerance: s.positive_or("monodromy_tolerance", 1e-9)?,
            })
        }
    })
}
