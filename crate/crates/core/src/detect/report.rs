use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    equicontinuity_verdict, eventual_sensitivity_check, hausdorff_sensitivity_verdict,
    induced_trans_empty, minimality_estimate, sensitivity_verdict,
    syndetic_equicontinuity_verdict, topological_equicontinuity_verdict, DetectorParams, Evidence,
    SensitivityMode, Verdict,
};
use crate::corpus::{CorpusEntry, Manifest, Property};
use crate::error::Result;
use crate::space::{Scope, SpaceKind};
use crate::system::PeriodicSystem;

/// Run the detector behind `property`.
pub fn evaluate(sys: &PeriodicSystem, property: Property, p: &DetectorParams) -> Result<Verdict> {
    use SensitivityMode::*;
    match property {
        Property::Minimal => minimality_estimate(sys, p),
        Property::Sensitive => sensitivity_verdict(sys, Plain, p),
        Property::Equicontinuous => equicontinuity_verdict(sys, p),
        Property::EventuallySensitive => eventual_sensitivity_check(sys, p, p.eps_d),
        Property::SyndeticallyEquicontinuous => syndetic_equicontinuity_verdict(sys, p),
        Property::ThicklySensitive => sensitivity_verdict(sys, Thick, p),
        Property::MultiSensitive => sensitivity_verdict(sys, Multi, p),
        Property::TopologicallyEquicontinuous => topological_equicontinuity_verdict(sys, false, p),
        Property::SyndeticallyTopologicallyEquicontinuous => {
            topological_equicontinuity_verdict(sys, true, p)
        }
        Property::HausdorffSensitive => hausdorff_sensitivity_verdict(sys, Plain, p),
        Property::ThicklyHausdorffSensitive => hausdorff_sensitivity_verdict(sys, Thick, p),
        Property::MultiHausdorffSensitive => hausdorff_sensitivity_verdict(sys, Multi, p),
        Property::InducedTransEmpty => induced_trans_empty(sys, p),
    }
}

/// Detector errors become inconclusive rows.
fn evaluate_row(sys: &PeriodicSystem, property: Property, p: &DetectorParams) -> Verdict {
    evaluate(sys, property, p)
        .unwrap_or_else(|e| Verdict::failed(property.name(), Some(property), sys, p, &e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RowStatus {
    Consistent,
    Violation,
    Inconclusive,
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    /// Observed verdict against the corpus expectation.
    Manifest,
    /// Exactly one of two horns under the stated hypotheses.
    Dichotomy,
    /// Two verdicts that must agree.
    Equivalence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub name: String,
    pub kind: RowKind,
    pub status: RowStatus,
    pub note: String,
    pub inputs: BTreeMap<String, Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub system: String,
    pub manifest: Manifest,
    /// Rows for the periodic system.
    pub rows: Vec<Verdict>,
    /// Rows for the induced map, on horizon `ceil(N / p)`.
    pub induced_rows: Vec<Verdict>,
    /// Copy-restricted rows (two-copy spaces only), periodic then induced.
    pub restricted_rows: Vec<Verdict>,
    pub matrix: Vec<MatrixRow>,
}

impl DichotomyReport {
    pub fn row(&self, property: Property) -> Option<&Verdict> {
        self.rows.iter().find(|v| v.property == Some(property))
    }

    pub fn matrix_row(&self, name: &str) -> Option<&MatrixRow> {
        self.matrix.iter().find(|r| r.name == name)
    }

    pub fn has_violation(&self) -> bool {
        self.matrix.iter().any(|r| r.status == RowStatus::Violation)
    }
}

struct Dichotomy {
    name: &'static str,
    horns: [Property; 2],
    needs_minimal: bool,
}

const DICHOTOMIES: [Dichotomy; 6] = [
    Dichotomy {
        name: "sensitive-or-equicontinuous",
        horns: [Property::Sensitive, Property::Equicontinuous],
        needs_minimal: true,
    },
    Dichotomy {
        name: "thickly-sensitive-or-syndetically-equicontinuous",
        horns: [Property::ThicklySensitive, Property::SyndeticallyEquicontinuous],
        needs_minimal: true,
    },
    Dichotomy {
        name: "equicontinuous-or-eventually-sensitive",
        horns: [Property::Equicontinuous, Property::EventuallySensitive],
        needs_minimal: false,
    },
    Dichotomy {
        name: "multi-sensitive-or-syndetically-equicontinuous",
        horns: [Property::MultiSensitive, Property::SyndeticallyEquicontinuous],
        needs_minimal: true,
    },
    Dichotomy {
        name: "topologically-equicontinuous-or-hausdorff-sensitive",
        horns: [Property::TopologicallyEquicontinuous, Property::HausdorffSensitive],
        needs_minimal: true,
    },
    Dichotomy {
        name: "syndetically-topologically-equicontinuous-or-thickly-hausdorff-sensitive",
        horns: [
            Property::SyndeticallyTopologicallyEquicontinuous,
            Property::ThicklyHausdorffSensitive,
        ],
        needs_minimal: true,
    },
];

/// Properties whose verdict must be the same for the periodic system and
/// its induced map.
const SHARED_WITH_INDUCED: [Property; 4] = [
    Property::SyndeticallyEquicontinuous,
    Property::ThicklySensitive,
    Property::HausdorffSensitive,
    Property::ThicklyHausdorffSensitive,
];

/// Pairs that coincide once the induced map has a transitive point.
const SAME_SYSTEM: [(Property, Property); 2] = [
    (Property::ThicklySensitive, Property::MultiSensitive),
    (Property::ThicklyHausdorffSensitive, Property::MultiHausdorffSensitive),
];

/// Runs the selected detectors on the periodic system and on its induced
/// map and assembles the consistency matrix.
pub fn dichotomy_report(entry: &CorpusEntry, p: &DetectorParams, properties: &[Property]) -> DichotomyReport {
    let sys = &entry.system;
    let period = sys.period() as u64;
    let induced = sys.induced();
    let gp = DetectorParams { horizon: p.horizon.div_ceil(period).max(1), ..p.clone() };

    let rows: Vec<Verdict> = properties.iter().map(|&q| evaluate_row(sys, q, p)).collect();
    let induced_rows: Vec<Verdict> = properties
        .iter()
        .filter(|q| **q != Property::InducedTransEmpty)
        .map(|&q| evaluate_row(&induced, q, &gp))
        .collect();

    let mut restricted_rows = Vec::new();
    if matches!(sys.space().kind(), SpaceKind::TwoCopySymbolic { .. }) {
        for scope in [Scope::A, Scope::B] {
            for q in [Property::ThicklySensitive, Property::SyndeticallyEquicontinuous] {
                if properties.contains(&q) {
                    let sp = DetectorParams { scope, ..p.clone() };
                    let sgp = DetectorParams { scope, ..gp.clone() };
                    restricted_rows.push(evaluate_row(sys, q, &sp));
                    restricted_rows.push(evaluate_row(&induced, q, &sgp));
                }
            }
        }
    }

    let observed = |q: Property| rows.iter().find(|v| v.property == Some(q)).map(|v| v.outcome);
    let observed_g = |q: Property| induced_rows.iter().find(|v| v.property == Some(q)).map(|v| v.outcome);
    let manifest = &entry.manifest;
    let mut matrix = Vec::new();

    for item in &manifest.items {
        let (Some(expected), Some(seen)) = (item.expected, observed(item.property)) else { continue };
        let status = match seen.as_bool() {
            None => RowStatus::Inconclusive,
            Some(b) if b == expected => RowStatus::Consistent,
            Some(_) => RowStatus::Violation,
        };
        matrix.push(MatrixRow {
            name: format!("expected:{}", item.property),
            kind: RowKind::Manifest,
            status,
            note: format!("expected {}; {}", Evidence::from_bool(expected), item.anchor),
            inputs: BTreeMap::from([(format!("f:{}", item.property), seen)]),
        });
    }

    let known = |q: Property| manifest.expected(q).or_else(|| observed(q).and_then(Evidence::as_bool));
    let trans_nonempty = known(Property::InducedTransEmpty).map(|b| !b);
    let minimal = known(Property::Minimal);

    for d in &DICHOTOMIES {
        let (Some(a), Some(b)) = (observed(d.horns[0]), observed(d.horns[1])) else { continue };
        let hypotheses = match (trans_nonempty, minimal) {
            (Some(false), _) => Some(false),
            (_, Some(false)) if d.needs_minimal => Some(false),
            (Some(true), Some(true)) => Some(true),
            (Some(true), _) if !d.needs_minimal => Some(true),
            _ => None,
        };
        let inputs = BTreeMap::from([
            (format!("f:{}", d.horns[0]), a),
            (format!("f:{}", d.horns[1]), b),
        ]);
        let any_open = a == Evidence::Inconclusive || b == Evidence::Inconclusive;
        let (status, note) = match hypotheses {
            Some(true) if any_open => (RowStatus::Inconclusive, "hypotheses hold; a horn is undecided".into()),
            Some(true) if a != b => (RowStatus::Consistent, "hypotheses hold; exactly one horn".into()),
            Some(true) => (
                RowStatus::Violation,
                format!("hypotheses hold but horns are both {}", a.name()),
            ),
            Some(false) if any_open => (
                RowStatus::Inconclusive,
                "hypotheses fail; a horn is undecided".into(),
            ),
            Some(false) if a == Evidence::Against && b == Evidence::Against => {
                let expected_neither = d
                    .horns
                    .iter()
                    .all(|h| manifest.expected(*h) == Some(false));
                let reason = if trans_nonempty == Some(false) {
                    "hypothesis Trans(X,g)≠∅ fails; neither horn holds"
                } else {
                    "minimality fails; neither horn holds"
                };
                let status = if expected_neither { RowStatus::Consistent } else { RowStatus::Info };
                (status, reason.to_string())
            }
            Some(false) => (
                RowStatus::Info,
                format!(
                    "hypotheses not applicable; observed {} / {}",
                    a.name(),
                    b.name()
                ),
            ),
            None => (RowStatus::Info, "hypotheses undetermined".into()),
        };
        matrix.push(MatrixRow { name: d.name.into(), kind: RowKind::Dichotomy, status, note, inputs });
    }

    for q in SHARED_WITH_INDUCED {
        if let (Some(a), Some(b)) = (observed(q), observed_g(q)) {
            matrix.push(agreement_row(format!("{q}:f-vs-g"), "f", "g", q, a, b, None));
        }
    }
    for pair in restricted_rows.chunks(2) {
        if let [f_row, g_row] = pair {
            let q = f_row.property.expect("restricted rows carry a property");
            let name = format!("{q}[{}]:f-vs-g", f_row.params.scope);
            matrix.push(agreement_row(name, "f", "g", q, f_row.outcome, g_row.outcome, None));
        }
    }
    for (q1, q2) in SAME_SYSTEM {
        if let (Some(a), Some(b)) = (observed(q1), observed(q2)) {
            let gate = (trans_nonempty != Some(true)).then_some("hypothesis Trans(X,g)≠∅ not established");
            let name = format!("{q1}-iff-{q2}");
            let mut row = agreement_row(name, &q1.to_string(), &q2.to_string(), q1, a, b, gate);
            row.inputs = BTreeMap::from([(format!("f:{q1}"), a), (format!("f:{q2}"), b)]);
            matrix.push(row);
        }
    }

    DichotomyReport {
        system: sys.id().to_string(),
        manifest: manifest.clone(),
        rows,
        induced_rows,
        restricted_rows,
        matrix,
    }
}

fn agreement_row(
    name: String,
    left: &str,
    right: &str,
    q: Property,
    a: Evidence,
    b: Evidence,
    gate: Option<&str>,
) -> MatrixRow {
    let (status, note) = match (gate, a.as_bool(), b.as_bool()) {
        (Some(why), _, _) => (RowStatus::Info, format!("{why}; observed {} / {}", a.name(), b.name())),
        (None, Some(x), Some(y)) if x == y => (RowStatus::Consistent, format!("both {}", a.name())),
        (None, Some(_), Some(_)) => (
            RowStatus::Violation,
            format!("{left} {} but {right} {}", a.name(), b.name()),
        ),
        _ => (RowStatus::Inconclusive, "a verdict is undecided".into()),
    };
    MatrixRow {
        name,
        kind: RowKind::Equivalence,
        status,
        note,
        inputs: BTreeMap::from([(format!("{left}:{q}"), a), (format!("{right}:{q}"), b)]),
    }
}
