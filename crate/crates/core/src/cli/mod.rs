//! Batch experiments: a TOML config names a corpus entry and a list of
//! detectors; running it yields a JSON report plus CSV sidecars.

mod app;
mod output;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{build_example, BuildParams, CorpusEntry, ExampleId, Manifest, Property};
use crate::detect::{
    dichotomy_report, evaluate, omega_verdict, visit_times_verdict, BallSpec, DetectorParams,
    MatrixRow, RowStatus, Verdict,
};
use crate::error::{Error, Result};
use crate::space::Ball;
use crate::system::PeriodicSystem;

pub use app::{run_cli, Cli, Command};
pub use output::{emit_plot_data, write_outputs, PlotKind};

/// Version of the config and report layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    /// Drives every detector; detector-level seeds must be left unset.
    #[serde(default)]
    pub seed: u64,
    /// Where `run` writes the report; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub system: SystemSpec,
    #[serde(default)]
    pub detectors: Vec<DetectorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub example: ExampleId,
    #[serde(default)]
    pub build: BuildParams,
}

/// Which map a standalone detector runs on. Horizons count steps of that map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapChoice {
    /// The periodic system `f_1, f_2, ...`.
    F,
    /// The induced map `g = f_p o ... o f_1`.
    G,
}

impl MapChoice {
    fn name(self) -> &'static str {
        match self {
            MapChoice::F => "f",
            MapChoice::G => "g",
        }
    }
}

fn default_maps() -> Vec<MapChoice> {
    vec![MapChoice::F]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DetectorSpec {
    /// First hitting times of target balls from one point.
    VisitTimes {
        point: String,
        targets: Vec<BallSpec>,
        #[serde(default = "default_maps")]
        maps: Vec<MapChoice>,
        #[serde(default)]
        params: DetectorParams,
    },
    /// The detector behind one property.
    Property {
        property: Property,
        #[serde(default = "default_maps")]
        maps: Vec<MapChoice>,
        #[serde(default)]
        params: DetectorParams,
    },
    /// Omega-limit against non-wandering coverage at one point.
    Omega {
        point: String,
        #[serde(default = "default_maps")]
        maps: Vec<MapChoice>,
        #[serde(default)]
        params: DetectorParams,
    },
    /// Properties on `f` and `g` plus the consistency matrix.
    Report {
        properties: Vec<Property>,
        #[serde(default)]
        params: DetectorParams,
    },
}

impl DetectorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorSpec::VisitTimes { .. } => "visit-times",
            DetectorSpec::Property { .. } => "property",
            DetectorSpec::Omega { .. } => "omega",
            DetectorSpec::Report { .. } => "report",
        }
    }

    pub fn params(&self) -> &DetectorParams {
        match self {
            DetectorSpec::VisitTimes { params, .. }
            | DetectorSpec::Property { params, .. }
            | DetectorSpec::Omega { params, .. }
            | DetectorSpec::Report { params, .. } => params,
        }
    }

    fn maps(&self) -> &[MapChoice] {
        match self {
            DetectorSpec::VisitTimes { maps, .. }
            | DetectorSpec::Property { maps, .. }
            | DetectorSpec::Omega { maps, .. } => maps,
            DetectorSpec::Report { .. } => &[],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Checks everything short of running detectors; messages carry the
    /// offending field path.
    pub fn validate(&self) -> Result<()> {
        let bad = |path: String, msg: String| Err(Error::InvalidParameter(format!("{path}: {msg}")));
        if self.format_version != FORMAT_VERSION {
            return bad(
                "format_version".into(),
                format!("expected {FORMAT_VERSION}, found {}", self.format_version),
            );
        }
        let entry = build_example(self.system.example, &self.system.build)
            .map_err(|e| Error::InvalidParameter(format!("system: {e}")))?;
        let space = entry.space();
        for (i, d) in self.detectors.iter().enumerate() {
            let at = |field: &str| format!("detectors[{i}].{field}");
            let p = d.params();
            if let Err(e) = p.validate() {
                return bad(at("params"), e.to_string());
            }
            if p.seed != 0 {
                return bad(at("params.seed"), "set the top-level seed instead".into());
            }
            for (j, b) in p.balls.iter().enumerate() {
                if let Err(e) = space.parse_point(&b.center) {
                    return bad(at(&format!("params.balls[{j}].center")), e.to_string());
                }
            }
            if d.maps().is_empty() && !matches!(d, DetectorSpec::Report { .. }) {
                return bad(at("maps"), "at least one of \"f\", \"g\" is required".into());
            }
            match d {
                DetectorSpec::VisitTimes { point, targets, .. } => {
                    if let Err(e) = space.parse_point(point) {
                        return bad(at("point"), e.to_string());
                    }
                    if targets.is_empty() {
                        return bad(at("targets"), "no targets".into());
                    }
                    for (j, t) in targets.iter().enumerate() {
                        if let Err(e) = space.parse_point(&t.center) {
                            return bad(at(&format!("targets[{j}].center")), e.to_string());
                        }
                        if !(t.radius > 0.0) {
                            return bad(at(&format!("targets[{j}].radius")), "must be positive".into());
                        }
                    }
                }
                DetectorSpec::Omega { point, .. } => {
                    if let Err(e) = space.parse_point(point) {
                        return bad(at("point"), e.to_string());
                    }
                }
                DetectorSpec::Report { properties, .. } if properties.is_empty() => {
                    return bad(at("properties"), "no properties".into());
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One verdict of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Position of the producing detector in the config.
    pub detector_index: usize,
    pub map: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub id: String,
    pub period: usize,
    pub space: String,
    pub manifest: Manifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub perdyn: String,
    pub format: u32,
}

/// Wall-clock fields; everything else in a report is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub detector_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub system: SystemInfo,
    pub rows: Vec<ReportRow>,
    pub matrix: Vec<MatrixRow>,
    pub versions: Versions,
    pub timing: Timing,
}

impl ExperimentReport {
    pub fn has_violation(&self) -> bool {
        self.matrix.iter().any(|r| r.status == RowStatus::Violation)
    }

    /// Process exit status: 1 on any violation, else 0.
    pub fn exit_status(&self) -> u8 {
        u8::from(self.has_violation())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// JSON with the timing fields cleared, for reproducibility checks.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.timing = Timing::default();
        r.to_json()
    }
}

fn on(entry: &CorpusEntry, map: MapChoice) -> PeriodicSystem {
    match map {
        MapChoice::F => entry.system.clone(),
        MapChoice::G => entry.system.induced(),
    }
}

fn run_standalone(
    entry: &CorpusEntry,
    spec: &DetectorSpec,
    p: &DetectorParams,
    map: MapChoice,
) -> Verdict {
    let sys = on(entry, map);
    let space = sys.space().clone();
    let result = match spec {
        DetectorSpec::VisitTimes { point, targets, .. } => (|| {
            let x = space.parse_point(point)?;
            let balls = targets
                .iter()
                .map(|t| Ok(Ball::new(space.parse_point(&t.center)?, t.radius)))
                .collect::<Result<Vec<_>>>()?;
            visit_times_verdict(&sys, &x, &balls, p)
        })(),
        DetectorSpec::Property { property, .. } => evaluate(&sys, *property, p),
        DetectorSpec::Omega { point, .. } => {
            space.parse_point(point).and_then(|x| omega_verdict(&sys, &x, p))
        }
        DetectorSpec::Report { .. } => unreachable!("reports are not standalone"),
    };
    result.unwrap_or_else(|e| {
        let property = match spec {
            DetectorSpec::Property { property, .. } => Some(*property),
            _ => None,
        };
        Verdict::failed(spec.name(), property, &sys, p, &e)
    })
}

/// Runs every detector of a validated config. Detector failures become
/// rows carrying the error; only an invalid config aborts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let entry = build_example(config.system.example, &config.system.build)?;
    let mut rows = Vec::new();
    let mut matrix = Vec::new();
    let mut detector_seconds = Vec::new();
    for (i, spec) in config.detectors.iter().enumerate() {
        let t = Instant::now();
        let p = DetectorParams { seed: config.seed, ..spec.params().clone() };
        match spec {
            DetectorSpec::Report { properties, .. } => {
                let r = dichotomy_report(&entry, &p, properties);
                let tagged = |map: &str, vs: Vec<Verdict>| {
                    vs.into_iter()
                        .map(|verdict| ReportRow { detector_index: i, map: map.to_string(), verdict })
                        .collect::<Vec<_>>()
                };
                rows.extend(tagged("f", r.rows));
                rows.extend(tagged("g", r.induced_rows));
                for pair in r.restricted_rows.chunks(2) {
                    for (map, v) in ["f", "g"].iter().zip(pair) {
                        let map = format!("{map}[{}]", v.params.scope);
                        rows.push(ReportRow { detector_index: i, map, verdict: v.clone() });
                    }
                }
                matrix.extend(r.matrix);
            }
            _ => {
                for &map in spec.maps() {
                    let verdict = run_standalone(&entry, spec, &p, map);
                    rows.push(ReportRow { detector_index: i, map: map.name().to_string(), verdict });
                }
            }
        }
        detector_seconds.push(t.elapsed().as_secs_f64());
    }
    Ok(ExperimentReport {
        config: config.clone(),
        system: SystemInfo {
            id: entry.id.name().to_string(),
            period: entry.system.period(),
            space: entry.space().id().to_string(),
            manifest: entry.manifest.clone(),
        },
        rows,
        matrix,
        versions: Versions { perdyn: env!("CARGO_PKG_VERSION").to_string(), format: FORMAT_VERSION },
        timing: Timing { total_seconds: start.elapsed().as_secs_f64(), detector_seconds },
    })
}
