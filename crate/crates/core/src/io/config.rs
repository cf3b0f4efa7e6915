//! Sectioned key-value scenario files.
//!
//! ```text
//! # comment
//! [layout]
//! offsets = 1, 0, 2        # meters from the reference sensor
//! reference = 1            # 0-based sensor index
//! pairing = reference      # optional: reference | all
//!
//! [object]
//! distance = 10            # along the reference boresight, where the object is assumed to sit
//! ranges = 10.05, 10, 10.2 # optional literal true ranges
//!
//! [noise]
//! kind = uniform           # none | uniform (lo, hi) | gaussian (sigma, mean = 0)
//! lo = 0
//! hi = 0.1
//!
//! [detector]
//! threshold_mode = calibrated   # calibrated (k = 2) | chi_squared
//! k = 2
//! alpha = 0.95             # optional
//! sigma = 0.0288675        # optional, defaults to the noise model's std
//! dof = 2                  # optional, defaults to sensors - 1
//! temporal_threshold = auto     # optional
//!
//! [attack]                 # repeat per entry
//! sensor = 1
//! kind = deflection        # triggering (0.1 m) | deflection (100 m)
//! spoof_range = 100        # optional
//! onset = 150
//! duration = open          # optional: open | <runs>
//!
//! [sim]
//! runs = 500
//! seed = 7
//! calibration_runs = 500   # optional, defaults to runs
//! ```
//!
//! Unknown sections and keys are errors. An optional `[resolved]` section
//! (written by `simulate` into `scenario.echo.cfg`) pins the thresholds.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::attacks::{AttackEntry, AttackKind, AttackSchedule};
use crate::detector::{DetectorConfig, Pairing, ThresholdMode, Thresholds};
use crate::geometry::{ObjectState, Scene, SensorLayout};
use crate::harness::{ResolvedThresholds, ScenarioError, ScenarioSpec};
use crate::sensing::NoiseModel;

use super::IoError;

/// One problem found in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}")?,
            None => f.write_str("-")?,
        }
        if let Some(k) = &self.key {
            write!(f, " [{k}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{file}: cannot read: {source}")]
    Read {
        file: String,
        source: std::io::Error,
    },
    #[error("{file}: parse error\n{}", join_diagnostics(.diagnostics))]
    Parse {
        file: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{file}: invalid scenario: {source}")]
    Validation {
        file: String,
        source: ScenarioError,
    },
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub spec: ScenarioSpec,
    /// Thresholds pinned by a `[resolved]` section.
    pub resolved: Option<Thresholds>,
}

pub fn parse_scenario(path: &Path) -> Result<ScenarioFile, IoError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        file: file.clone(),
        source,
    })?;
    Ok(parse_scenario_str(&text, &file)?)
}

pub fn parse_scenario_str(text: &str, file: &str) -> Result<ScenarioFile, ConfigError> {
    let mut p = Parser::default();
    let sections = p.tokenize(text);
    let raw = p.extract(&sections);
    if !p.diagnostics.is_empty() {
        return Err(ConfigError::Parse {
            file: file.to_string(),
            diagnostics: p.diagnostics,
        });
    }
    let raw = raw.expect("no diagnostics implies a complete document");
    let validation = |source: ScenarioError| ConfigError::Validation {
        file: file.to_string(),
        source,
    };
    let spec = raw.build().map_err(validation)?;
    spec.validate_strict().map_err(validation)?;
    Ok(ScenarioFile {
        spec,
        resolved: raw.resolved,
    })
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 7] = ["layout", "object", "noise", "detector", "attack", "sim", "resolved"];

#[derive(Default)]
struct Parser {
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    fn err(&mut self, line: Option<usize>, key: Option<&str>, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            line,
            key: key.map(str::to_string),
            message: message.into(),
        });
    }

    fn tokenize(&mut self, text: &str) -> Vec<Section> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    self.err(Some(line), None, format!("malformed section header `{content}`"));
                    continue;
                };
                let name = name.trim().to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    self.err(Some(line), None, format!("unknown section [{name}]"));
                } else if name != "attack" && sections.iter().any(|s| s.name == name) {
                    self.err(Some(line), None, format!("duplicate section [{name}]"));
                }
                sections.push(Section {
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                self.err(Some(line), None, format!("expected `key = value`, got `{content}`"));
                continue;
            };
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            let Some(section) = sections.last_mut() else {
                self.err(Some(line), Some(&key), "key outside of any section");
                continue;
            };
            if section.entries.iter().any(|e| e.key == key) {
                let msg = format!("duplicate key in [{}]", section.name);
                self.err(Some(line), Some(&key), msg);
                continue;
            }
            section.entries.push(Entry { key, value, line });
        }
        sections
    }

    fn extract(&mut self, sections: &[Section]) -> Option<RawScenario> {
        let find = |name: &str| sections.iter().find(|s| s.name == name);
        let mut layout = Reader::new(find("layout"), "layout");
        let offsets = layout.req(self, "offsets", parse_list);
        let reference = layout.req(self, "reference", parse_num::<usize>);
        let pairing = layout
            .opt(self, "pairing", |v| match v {
                "reference" => Ok(Pairing::Reference),
                "all" => Ok(Pairing::AllPairs),
                _ => Err("expected `reference` or `all`".to_string()),
            })
            .unwrap_or_default();
        layout.finish(self);

        let mut object = Reader::new(find("object"), "object");
        let distance = object.req(self, "distance", parse_num::<f64>);
        let literal = object.opt(self, "ranges", parse_list);
        object.finish(self);

        let mut noise_r = Reader::new(find("noise"), "noise");
        let noise = match noise_r.req(self, "kind", parse_word(&["none", "uniform", "gaussian"])) {
            Some("none") => Some(NoiseModel::None),
            Some("uniform") => {
                let lo = noise_r.req(self, "lo", parse_num::<f64>);
                let hi = noise_r.req(self, "hi", parse_num::<f64>);
                lo.zip(hi).map(|(lo, hi)| NoiseModel::Uniform { lo, hi })
            }
            Some("gaussian") => {
                let mean = noise_r.opt(self, "mean", parse_num::<f64>).unwrap_or(0.0);
                let sigma = noise_r.req(self, "sigma", parse_num::<f64>);
                sigma.map(|sigma| NoiseModel::Gaussian { mean, sigma })
            }
            _ => None,
        };
        noise_r.finish(self);

        let mut det = Reader::new(find("detector"), "detector");
        let mode = match det.req(self, "threshold_mode", parse_word(&["calibrated", "chi_squared"])) {
            Some("calibrated") => {
                let k = det.opt(self, "k", parse_num::<f64>).unwrap_or(2.0);
                Some(ThresholdMode::Calibrated { k })
            }
            Some(_) => Some(ThresholdMode::ChiSquared),
            None => None,
        };
        let alpha = det.opt(self, "alpha", parse_num::<f64>);
        let sigma = det.opt(self, "sigma", parse_num::<f64>);
        let dof = det.opt(self, "dof", parse_num::<u32>);
        let temporal = det.opt(self, "temporal_threshold", |v| {
            if v == "auto" {
                Ok(None)
            } else {
                parse_num::<f64>(v).map(Some)
            }
        });
        det.finish(self);

        let mut attacks = Vec::new();
        for s in sections.iter().filter(|s| s.name == "attack") {
            let mut a = Reader::new(Some(s), "attack");
            let sensor = a.req(self, "sensor", parse_num::<usize>);
            let kind = a.req(self, "kind", parse_word(&["triggering", "deflection"]));
            let spoof = a.opt(self, "spoof_range", parse_num::<f64>);
            let onset = a.req(self, "onset", parse_num::<u64>);
            let duration = a
                .opt(self, "duration", |v| {
                    if v == "open" {
                        Ok(None)
                    } else {
                        parse_num::<u64>(v).map(Some)
                    }
                })
                .flatten();
            a.finish(self);
            if let (Some(sensor), Some(kind), Some(onset_run)) = (sensor, kind, onset) {
                let kind = match kind {
                    "triggering" => AttackKind::triggering(),
                    _ => AttackKind::deflection(),
                };
                attacks.push((
                    s.line,
                    AttackEntry {
                        sensor,
                        kind: spoof.map_or(kind, |r| kind.with_spoof_range(r)),
                        onset_run,
                        duration_runs: duration,
                    },
                ));
            }
        }

        let mut sim = Reader::new(find("sim"), "sim");
        let runs = sim.req(self, "runs", parse_num::<u64>);
        let seed = sim.req(self, "seed", parse_num::<u64>);
        let calibration_runs = sim.opt(self, "calibration_runs", parse_num::<u64>);
        sim.finish(self);

        let resolved = find("resolved").and_then(|s| {
            let mut r = Reader::new(Some(s), "resolved");
            let spatial = r.req(self, "spatial_threshold", parse_num::<f64>);
            let temporal = r.req(self, "temporal_threshold", parse_num::<f64>);
            // Provenance only.
            for key in ["chi_squared_threshold", "baseline_mean", "baseline_std"] {
                r.opt(self, key, parse_num::<f64>);
            }
            r.finish(self);
            spatial
                .zip(temporal)
                .map(|(spatial, temporal)| Thresholds { spatial, temporal })
        });

        Some(RawScenario {
            offsets: offsets?,
            reference: reference?,
            pairing,
            distance: distance?,
            literal,
            noise: noise?,
            mode: mode?,
            alpha,
            sigma,
            dof,
            temporal: temporal.flatten(),
            attacks,
            runs: runs?,
            seed: seed?,
            calibration_runs,
            resolved,
        })
    }
}

/// Pulls typed values out of one section, remembering which keys were used.
struct Reader<'a> {
    section: Option<&'a Section>,
    name: &'static str,
    used: BTreeSet<&'a str>,
}

impl<'a> Reader<'a> {
    fn new(section: Option<&'a Section>, name: &'static str) -> Self {
        Self {
            section,
            name,
            used: BTreeSet::new(),
        }
    }

    fn lookup(&mut self, key: &'static str) -> Option<&'a Entry> {
        let e = self.section?.entries.iter().find(|e| e.key == key)?;
        self.used.insert(&e.key);
        Some(e)
    }

    fn parse_entry<T>(
        p: &mut Parser,
        e: &Entry,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Option<T> {
        match parse(&e.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                p.err(Some(e.line), Some(&e.key), msg);
                None
            }
        }
    }

    fn req<T>(
        &mut self,
        p: &mut Parser,
        key: &'static str,
        parse: impl Fn(&'a str) -> Result<T, String>,
    ) -> Option<T> {
        match self.lookup(key) {
            Some(e) => match parse(&e.value) {
                Ok(v) => Some(v),
                Err(msg) => {
                    p.err(Some(e.line), Some(key), msg);
                    None
                }
            },
            None => {
                let line = self.section.map(|s| s.line);
                p.err(line, Some(key), format!("missing required key in [{}]", self.name));
                None
            }
        }
    }

    fn opt<T>(
        &mut self,
        p: &mut Parser,
        key: &'static str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Option<T> {
        let e = self.lookup(key)?;
        Self::parse_entry(p, e, parse)
    }

    fn finish(self, p: &mut Parser) {
        let Some(section) = self.section else { return };
        for e in &section.entries {
            if !self.used.contains(e.key.as_str()) {
                p.err(
                    Some(e.line),
                    Some(&e.key),
                    format!("unknown key in [{}]", self.name),
                );
            }
        }
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>()
        .map_err(|_| format!("expected a {}, got `{v}`", std::any::type_name::<T>()))
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|x| parse_num::<f64>(x.trim())).collect()
}

fn parse_word<'w>(allowed: &'static [&'static str]) -> impl Fn(&'w str) -> Result<&'static str, String> {
    move |v| {
        allowed
            .iter()
            .find(|a| **a == v)
            .copied()
            .ok_or_else(|| format!("expected one of {}, got `{v}`", allowed.join(" | ")))
    }
}

struct RawScenario {
    offsets: Vec<f64>,
    reference: usize,
    pairing: Pairing,
    distance: f64,
    literal: Option<Vec<f64>>,
    noise: NoiseModel,
    mode: ThresholdMode,
    alpha: Option<f64>,
    sigma: Option<f64>,
    dof: Option<u32>,
    temporal: Option<f64>,
    attacks: Vec<(usize, AttackEntry)>,
    runs: u64,
    seed: u64,
    calibration_runs: Option<u64>,
    resolved: Option<Thresholds>,
}

impl RawScenario {
    fn build(&self) -> Result<ScenarioSpec, ScenarioError> {
        let layout = SensorLayout::new(self.offsets.clone(), self.reference)?;
        let object = ObjectState::new(self.distance)?;
        let mut scene = Scene::new(layout, object);
        if let Some(r) = &self.literal {
            scene = scene.with_literal_ranges(r.clone())?;
        }
        self.noise.validate()?;
        let defaults = DetectorConfig::defaults_for(&scene.layout, &self.noise);
        let detector = DetectorConfig {
            sigma: self.sigma.unwrap_or(defaults.sigma),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            dof: self.dof.unwrap_or(defaults.dof),
            threshold_mode: self.mode,
            temporal_threshold: self.temporal,
            pairing: self.pairing,
        };
        let schedule =
            AttackSchedule::new(self.attacks.iter().map(|(_, e)| *e).collect())?;
        Ok(ScenarioSpec {
            scene,
            noise: self.noise,
            schedule,
            runs: self.runs,
            seed: self.seed,
            detector,
            calibration_runs: self.calibration_runs.unwrap_or(self.runs),
        })
    }
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders a spec as a fully explicit scenario file. `f64` values use the
/// shortest representation that parses back to the same bits.
pub fn render_scenario(spec: &ScenarioSpec, resolved: Option<&ResolvedThresholds>) -> String {
    let mut s = String::new();
    let layout = &spec.scene.layout;
    let _ = writeln!(s, "[layout]");
    let _ = writeln!(s, "offsets = {}", list(layout.offsets()));
    let _ = writeln!(s, "reference = {}", layout.reference());
    let pairing = match spec.detector.pairing {
        Pairing::Reference => "reference",
        Pairing::AllPairs => "all",
    };
    let _ = writeln!(s, "pairing = {pairing}");

    let _ = writeln!(s, "\n[object]");
    let _ = writeln!(s, "distance = {}", spec.scene.object.true_distance());
    if let Some(r) = spec.scene.literal_ranges() {
        let _ = writeln!(s, "ranges = {}", list(r));
    }

    let _ = writeln!(s, "\n[noise]");
    match spec.noise {
        NoiseModel::None => {
            let _ = writeln!(s, "kind = none");
        }
        NoiseModel::Uniform { lo, hi } => {
            let _ = writeln!(s, "kind = uniform\nlo = {lo}\nhi = {hi}");
        }
        NoiseModel::Gaussian { mean, sigma } => {
            let _ = writeln!(s, "kind = gaussian\nmean = {mean}\nsigma = {sigma}");
        }
    }

    let d = &spec.detector;
    let _ = writeln!(s, "\n[detector]");
    match d.threshold_mode {
        ThresholdMode::ChiSquared => {
            let _ = writeln!(s, "threshold_mode = chi_squared");
        }
        ThresholdMode::Calibrated { k } => {
            let _ = writeln!(s, "threshold_mode = calibrated\nk = {k}");
        }
    }
    let _ = writeln!(s, "alpha = {}\nsigma = {}\ndof = {}", d.alpha, d.sigma, d.dof);
    match d.temporal_threshold {
        Some(t) => {
            let _ = writeln!(s, "temporal_threshold = {t}");
        }
        None => {
            let _ = writeln!(s, "temporal_threshold = auto");
        }
    }

    for e in spec.schedule.entries() {
        let _ = writeln!(s, "\n[attack]");
        let _ = writeln!(s, "sensor = {}", e.sensor);
        let _ = writeln!(s, "kind = {}", e.kind.name());
        let _ = writeln!(s, "spoof_range = {}", e.kind.spoof_range());
        let _ = writeln!(s, "onset = {}", e.onset_run);
        match e.duration_runs {
            Some(n) => {
                let _ = writeln!(s, "duration = {n}");
            }
            None => {
                let _ = writeln!(s, "duration = open");
            }
        }
    }

    let _ = writeln!(s, "\n[sim]");
    let _ = writeln!(s, "runs = {}\nseed = {}", spec.runs, spec.seed);
    let _ = writeln!(s, "calibration_runs = {}", spec.calibration_runs);

    if let Some(r) = resolved {
        let _ = writeln!(s, "\n[resolved]");
        let _ = writeln!(s, "spatial_threshold = {}", r.thresholds.spatial);
        let _ = writeln!(s, "temporal_threshold = {}", r.thresholds.temporal);
        let _ = writeln!(s, "chi_squared_threshold = {}", r.chi_squared);
        if let Some(b) = r.baseline {
            let _ = writeln!(s, "baseline_mean = {}\nbaseline_std = {}", b.mean, b.std);
        }
    }
    s
}
