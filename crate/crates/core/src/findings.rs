//! Ledger of devices, CVSS-scored findings and unscored observations.

use std::cmp::Reverse;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{AttackerType, Catalog};
use crate::cvss::{CvssVector, Score, Severity};
use crate::decision::CapabilityProfile;

pub const LEDGER_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeviceClass {
    Camera,
    VacuumCleaner,
    SmokeCoDetector,
    #[default]
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriceTier {
    HighEnd,
    MidRange,
    #[default]
    Unspecified,
}

/// Results of the public information-gathering steps. Every field is optional:
/// absent means the step was not performed or yielded nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InformationGathering {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_decompilable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub firmware_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_only: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_source_hardcoded_credentials: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub firmware_downloadable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Device {
    pub id: String,
    pub display_name: String,
    #[serde(default)]
    pub device_class: DeviceClass,
    #[serde(default)]
    pub price_tier: PriceTier,
    #[serde(default)]
    pub capabilities: CapabilityProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ig: Option<InformationGathering>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Finding {
    pub id: String,
    pub device: String,
    pub title: String,
    pub cvss: CvssVector,
    /// Cached base score; must equal the score recomputed from `cvss`.
    pub score: Score,
    #[serde(default)]
    pub test_cases: Vec<String>,
    pub best_practices: Vec<String>,
    /// Scenario contexts in which the finding was observed.
    #[serde(default)]
    pub scenarios: Vec<u8>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

impl Finding {
    pub fn severity(&self) -> Severity {
        self.score.severity()
    }
}

/// Assessment phase an observation was made in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    InformationGathering,
    Nearby,
    SameNetwork,
    Physical,
    ShellAccess,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::InformationGathering,
        Phase::Nearby,
        Phase::SameNetwork,
        Phase::Physical,
        Phase::ShellAccess,
    ];

    pub fn attacker(self) -> Option<AttackerType> {
        match self {
            Phase::InformationGathering => None,
            Phase::Nearby => Some(AttackerType::Nearby),
            Phase::SameNetwork => Some(AttackerType::SameNetwork),
            Phase::Physical => Some(AttackerType::Physical),
            Phase::ShellAccess => Some(AttackerType::ShellAccess),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Phase::InformationGathering => "Information Gathering",
            Phase::Nearby => "Nearby Attacker",
            Phase::SameNetwork => "Same Network Attacker",
            Phase::Physical => "Physical Attacker",
            Phase::ShellAccess => "Shell Access",
        }
    }
}

impl From<AttackerType> for Phase {
    fn from(a: AttackerType) -> Self {
        match a {
            AttackerType::Nearby => Phase::Nearby,
            AttackerType::SameNetwork => Phase::SameNetwork,
            AttackerType::Physical => Phase::Physical,
            AttackerType::ShellAccess => Phase::ShellAccess,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub device: String,
    pub phase: Phase,
    pub text: String,
    /// Id of the scored sibling finding, if the issue carries a CVSS vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finding: Option<String>,
}

impl Observation {
    pub fn is_scored(&self) -> bool {
        self.finding.is_some()
    }
}

/// Serialized form of a ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
    #[serde(default)]
    pub devices: Vec<Device>,
    #[serde(default)]
    pub findings: Vec<Finding>,
    #[serde(default)]
    pub observations: Vec<Observation>,
}

impl LedgerDocument {
    pub fn new() -> Self {
        LedgerDocument {
            schema_version: LEDGER_SCHEMA_VERSION,
            annotations: Vec::new(),
            devices: Vec::new(),
            findings: Vec::new(),
            observations: Vec::new(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("ledger documents always serialize")
    }
}

impl Default for LedgerDocument {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{} integrity violation(s):\n{}", .0.len(), .0.join("\n"))]
    Integrity(Vec<String>),
    #[error(
        "finding {finding}: cached score {cached} does not match recomputed score {recomputed}"
    )]
    ScoreMismatch {
        finding: String,
        cached: Score,
        recomputed: Score,
    },
    #[error("unknown device id {0:?}")]
    UnknownId(String),
}

#[derive(Debug, Clone)]
pub struct Ledger {
    doc: LedgerDocument,
    device_index: HashMap<String, usize>,
}

pub fn load_ledger(source: &str, catalog: &Catalog) -> Result<Ledger, LedgerError> {
    if source.trim().is_empty() {
        return Err(LedgerError::Schema("empty findings document".into()));
    }
    let doc: LedgerDocument =
        toml::from_str(source).map_err(|e| LedgerError::Schema(e.to_string()))?;
    Ledger::from_document(doc, catalog)
}

impl Ledger {
    pub fn empty() -> Ledger {
        Ledger {
            doc: LedgerDocument::new(),
            device_index: HashMap::new(),
        }
    }

    pub fn from_document(doc: LedgerDocument, catalog: &Catalog) -> Result<Ledger, LedgerError> {
        if doc.schema_version != LEDGER_SCHEMA_VERSION {
            return Err(LedgerError::Schema(format!(
                "unsupported schema_version {} (expected {LEDGER_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let mut problems = Vec::new();

        let mut device_index = HashMap::new();
        for (i, d) in doc.devices.iter().enumerate() {
            if d.id.is_empty() {
                problems.push("device with empty id".to_string());
            }
            if device_index.insert(d.id.clone(), i).is_some() {
                problems.push(format!("{}: duplicate device id", d.id));
            }
            if let Err(e) = d.capabilities.validate() {
                problems.push(format!("{}: {e}", d.id));
            }
        }

        let mut finding_ids = HashMap::new();
        for f in &doc.findings {
            if finding_ids
                .insert(f.id.as_str(), f.device.as_str())
                .is_some()
            {
                problems.push(format!("{}: duplicate finding id", f.id));
            }
            if !device_index.contains_key(&f.device) {
                problems.push(format!("{}: unknown device {:?}", f.id, f.device));
            }
            if f.best_practices.is_empty() {
                problems.push(format!("{}: cites no best practice", f.id));
            }
            for bp in &f.best_practices {
                if catalog.best_practice(bp).is_none() {
                    problems.push(format!("{}: unknown best practice {bp}", f.id));
                }
            }
            for tc in &f.test_cases {
                if catalog.test_case(tc).is_none() {
                    problems.push(format!("{}: unknown test case {tc}", f.id));
                }
            }
            for n in &f.scenarios {
                if catalog.scenario(*n).is_none() {
                    problems.push(format!("{}: unknown scenario {n}", f.id));
                }
            }
            let mut seen = HashSet::new();
            for bp in &f.best_practices {
                if !seen.insert(bp) {
                    problems.push(format!("{}: best practice {bp} cited twice", f.id));
                }
            }
        }

        for (i, o) in doc.observations.iter().enumerate() {
            if !device_index.contains_key(&o.device) {
                problems.push(format!(
                    "observation {}: unknown device {:?}",
                    i + 1,
                    o.device
                ));
            }
            if let Some(fid) = &o.finding {
                match finding_ids.get(fid.as_str()) {
                    None => {
                        problems.push(format!("observation {}: unknown finding {fid:?}", i + 1))
                    }
                    Some(dev) if *dev != o.device => problems.push(format!(
                        "observation {}: finding {fid} belongs to device {dev}",
                        i + 1
                    )),
                    Some(_) => {}
                }
            }
        }

        if !problems.is_empty() {
            return Err(LedgerError::Integrity(problems));
        }

        for f in &doc.findings {
            let recomputed = f.cvss.base_score().value;
            if recomputed != f.score {
                return Err(LedgerError::ScoreMismatch {
                    finding: f.id.clone(),
                    cached: f.score,
                    recomputed,
                });
            }
        }

        Ok(Ledger { doc, device_index })
    }

    /// Combines two ledgers. Device, finding and observation sets must not clash.
    pub fn merge(&self, other: &Ledger, catalog: &Catalog) -> Result<Ledger, LedgerError> {
        let mut doc = self.doc.clone();
        doc.annotations
            .extend(other.doc.annotations.iter().cloned());
        doc.devices.extend(other.doc.devices.iter().cloned());
        doc.findings.extend(other.doc.findings.iter().cloned());
        doc.observations
            .extend(other.doc.observations.iter().cloned());
        Ledger::from_document(doc, catalog)
    }

    pub fn annotations(&self) -> &[String] {
        &self.doc.annotations
    }

    pub fn devices(&self) -> &[Device] {
        &self.doc.devices
    }

    pub fn findings(&self) -> &[Finding] {
        &self.doc.findings
    }

    pub fn observations(&self) -> &[Observation] {
        &self.doc.observations
    }

    pub fn device(&self, id: &str) -> Option<&Device> {
        self.device_index.get(id).map(|&i| &self.doc.devices[i])
    }

    pub fn finding(&self, id: &str) -> Option<&Finding> {
        self.doc.findings.iter().find(|f| f.id == id)
    }

    pub fn document(&self) -> &LedgerDocument {
        &self.doc
    }

    /// Findings of one device, highest score first, ties by finding id.
    pub fn findings_by_device(&self, device_id: &str) -> Result<Vec<&Finding>, LedgerError> {
        if !self.device_index.contains_key(device_id) {
            return Err(LedgerError::UnknownId(device_id.to_string()));
        }
        let mut out: Vec<&Finding> = self
            .doc
            .findings
            .iter()
            .filter(|f| f.device == device_id)
            .collect();
        out.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        Ok(out)
    }

    pub fn observations_by_device(&self, device_id: &str) -> Vec<&Observation> {
        self.doc
            .observations
            .iter()
            .filter(|o| o.device == device_id)
            .collect()
    }

    /// Worst band and per-band counts for every device, in ledger order.
    pub fn device_severity_summary(&self) -> Vec<DeviceSeveritySummary> {
        self.doc
            .devices
            .iter()
            .map(|d| {
                let mut counts = [0usize; 5];
                let mut worst = None;
                for f in self.doc.findings.iter().filter(|f| f.device == d.id) {
                    let sev = f.severity();
                    counts[sev as usize] += 1;
                    worst = worst.max(Some(sev));
                }
                DeviceSeveritySummary {
                    device: d.id.clone(),
                    worst,
                    counts,
                }
            })
            .collect()
    }

    /// Canonical document: devices by id, findings by (device, id),
    /// observations by (device, phase) keeping input order within a group.
    pub fn to_canonical_document(&self) -> LedgerDocument {
        let mut doc = self.doc.clone();
        doc.devices.sort_by(|a, b| a.id.cmp(&b.id));
        doc.findings.sort_by(|a, b| {
            (a.device.as_str(), a.id.as_str()).cmp(&(b.device.as_str(), b.id.as_str()))
        });
        doc.observations
            .sort_by_key(|o| (o.device.clone(), o.phase));
        doc
    }

    pub fn to_canonical_toml(&self) -> String {
        self.to_canonical_document().to_toml()
    }

    /// Device ids sorted by worst finding score, then id. Used in reports.
    pub fn devices_by_risk(&self) -> Vec<&Device> {
        let mut devs: Vec<&Device> = self.doc.devices.iter().collect();
        let worst = |id: &str| {
            self.doc
                .findings
                .iter()
                .filter(|f| f.device == id)
                .map(|f| f.score)
                .max()
        };
        devs.sort_by_key(|d| (Reverse(worst(&d.id)), d.id.clone()));
        devs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceSeveritySummary {
    pub device: String,
    /// `None` when the device has no scored finding.
    pub worst: Option<Severity>,
    /// Counts indexed by [`Severity`] discriminant (None, Low, Medium, High, Critical).
    pub counts: [usize; 5],
}

impl DeviceSeveritySummary {
    pub fn at_least(&self, band: Severity) -> bool {
        self.worst.is_some_and(|w| w >= band)
    }

    pub fn count(&self, band: Severity) -> usize {
        self.counts[band as usize]
    }
}

impl fmt::Display for DeviceSeveritySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let worst = self.worst.map(Severity::as_str).unwrap_or("-");
        write!(f, "{} worst={worst}", self.device)?;
        for band in Severity::ALL {
            write!(f, " {}={}", band.as_str(), self.count(band))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Catalog {
        crate::bundled_catalog()
    }

    const ONE: &str = r#"
schema_version = 1

[[devices]]
id = "cam"
display_name = "Cam"

[[findings]]
id = "cam-uart"
device = "cam"
title = "UART"
cvss = "AV:P/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H"
score = 7.1
test_cases = ["TC-HW-04"]
best_practices = ["BP-HW-04"]
"#;

    #[test]
    fn loads_single_finding() {
        let l = load_ledger(ONE, &catalog()).unwrap();
        assert_eq!(l.findings().len(), 1);
        assert_eq!(l.findings_by_device("cam").unwrap()[0].id, "cam-uart");
    }

    #[test]
    fn score_mismatch_reports_both_values() {
        let bad = ONE.replace("score = 7.1", "score = 7.0");
        let err = load_ledger(&bad, &catalog()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, LedgerError::ScoreMismatch { .. }));
        assert!(msg.contains("7.0") && msg.contains("7.1"), "{msg}");
    }

    #[test]
    fn dangling_bp_is_integrity_error() {
        let bad = ONE.replace("BP-HW-04", "BP-XX-99");
        assert!(matches!(
            load_ledger(&bad, &catalog()),
            Err(LedgerError::Integrity(_))
        ));
    }

    #[test]
    fn scored_observation_needs_sibling() {
        let bad = format!(
            "{ONE}\n[[observations]]\ndevice = \"cam\"\nphase = \"physical\"\ntext = \"x\"\nfinding = \"nope\"\n"
        );
        assert!(matches!(
            load_ledger(&bad, &catalog()),
            Err(LedgerError::Integrity(_))
        ));
    }

    #[test]
    fn empty_document_is_schema_error() {
        assert!(matches!(
            load_ledger("", &catalog()),
            Err(LedgerError::Schema(_))
        ));
    }

    #[test]
    fn empty_ledger_summary() {
        assert!(Ledger::empty().device_severity_summary().is_empty());
    }
}
