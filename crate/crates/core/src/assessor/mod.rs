//! Simulated assessment: test cases evaluated as predicates over a
//! [`DeviceModel`], merged into a findings document.

mod checks;
pub mod model;
pub mod templates;

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::catalog::{AttackerType, Catalog};
use crate::cvss::CvssVector;
use crate::findings::{Finding, LedgerDocument, Observation, Phase};

pub use model::{
    load_model, AccountSpec, AuthKind, ChannelKind, CloudSpec, CredentialSpec, DebugInterface,
    DebugKind, DeviceModel, Exposure, FirmwareSpec, LinkSpec, ModelError, OnboardingChannel,
    OsPostureSpec, PasswordResetSpec, PhysicalSpec, ServiceSpec, TlsSpec,
};
pub use templates::{conservative_vector, TemplateSet, VectorTemplate};

pub const DEFAULT_PASSWORD_LONG_THRESHOLD: usize = 20;

/// Minimum length for any password to count as strong.
pub const PASSWORD_MIN_LENGTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        }
    }
}

/// How a failed check feeds into the findings document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Produces a scored finding on its own.
    Primary,
    /// Joins a primary finding on the same surface or its parent; otherwise
    /// reported as an observation.
    Contributing,
    /// Reported as an unscored observation only.
    Observation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub phase: Phase,
    /// `None` for information-gathering steps.
    pub scenario: Option<u8>,
    pub check_key: String,
    pub tag: String,
    /// `None` for information-gathering steps.
    pub test_case: Option<String>,
    pub surface: String,
    pub verdict: Verdict,
    pub rationale: String,
    pub role: Role,
    /// Failure mode naming the vector template, set on primary failures.
    pub mode: Option<String>,
    pub violated_bps: Vec<String>,
    /// The failure hands the attacker (root) shell or OS-level read access.
    pub grants_shell: bool,
    pub draft_finding: Option<Finding>,
}

impl CheckOutcome {
    pub fn is_fail(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    /// Identity of the check independent of its verdict.
    pub fn key(&self) -> (Option<u8>, &str, Option<&str>, &str) {
        (
            self.scenario,
            &self.check_key,
            self.test_case.as_deref(),
            &self.surface,
        )
    }
}

#[derive(Debug, Clone)]
pub struct AssessOptions {
    pub password_long_threshold: usize,
    pub templates: TemplateSet,
    pub information_gathering: bool,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions {
            password_long_threshold: DEFAULT_PASSWORD_LONG_THRESHOLD,
            templates: TemplateSet::bundled(),
            information_gathering: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum AssessError {
    #[error("attacker set is empty")]
    NoAttackers,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// At least eight characters, and either `long_threshold` characters or
/// three of the four classes lowercase, uppercase, digit, symbol.
pub fn password_strong_with(candidate: &str, long_threshold: usize) -> bool {
    let len = candidate.chars().count();
    if len < PASSWORD_MIN_LENGTH {
        return false;
    }
    if len >= long_threshold {
        return true;
    }
    let mut classes = [false; 4];
    for c in candidate.chars() {
        let idx = if c.is_lowercase() {
            0
        } else if c.is_uppercase() {
            1
        } else if c.is_numeric() {
            2
        } else {
            3
        };
        classes[idx] = true;
    }
    classes.iter().filter(|&&b| b).count() >= 3
}

pub fn password_strong(candidate: &str) -> bool {
    password_strong_with(candidate, DEFAULT_PASSWORD_LONG_THRESHOLD)
}

/// Runs the information-gathering steps and every scenario of `attackers`.
/// The shell-access scenario only runs when an earlier failure grants a shell.
pub fn assess(
    model: &DeviceModel,
    catalog: &Catalog,
    attackers: &BTreeSet<AttackerType>,
    opts: &AssessOptions,
) -> Result<Vec<CheckOutcome>, AssessError> {
    if attackers.is_empty() {
        return Err(AssessError::NoAttackers);
    }
    model.validate()?;
    let ctx = checks::Ctx {
        model,
        catalog,
        opts,
    };

    let mut out = Vec::new();
    if opts.information_gathering {
        out.extend(ctx.information_gathering());
    }

    let mut deferred = Vec::new();
    for scenario in catalog.scenarios() {
        if !attackers.contains(&scenario.attacker) {
            continue;
        }
        if catalog.is_conditional(scenario.attacker) {
            deferred.push(scenario);
            continue;
        }
        for check in &scenario.checks {
            out.extend(ctx.evaluate(scenario, check));
        }
    }

    let shell = out
        .iter()
        .find(|o| o.is_fail() && o.grants_shell)
        .map(|o| o.surface.clone());
    for scenario in deferred {
        for check in &scenario.checks {
            match &shell {
                Some(_) => out.extend(ctx.evaluate(scenario, check)),
                None => out.extend(ctx.not_reached(scenario, check)),
            }
        }
    }
    Ok(out)
}

fn surface_parent(model: &DeviceModel, surface: &str) -> Option<&'static str> {
    let name = surface.strip_prefix("service:")?;
    model
        .service(name)
        .filter(|s| s.onboarding_only())
        .map(|_| "onboarding")
}

pub(crate) fn describe_surface(surface: &str) -> String {
    if let Some(name) = surface.strip_prefix("service:") {
        return format!("the {name} service");
    }
    if let Some(rest) = surface.strip_prefix("debug:") {
        let kind = rest.rsplit_once('-').map(|(k, _)| k).unwrap_or(rest);
        return match kind {
            "storage" => "the removable storage interface".into(),
            other => format!("the {} interface", other.to_ascii_uppercase()),
        };
    }
    match surface {
        "cloud:app" => "the app-cloud link".into(),
        "cloud:device" => "the device-cloud link".into(),
        "cloud:account" => "the cloud account".into(),
        other => format!("the {other}"),
    }
}

fn slug(surface: &str) -> String {
    surface
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

/// Chooses the vector for a finding and says where it came from.
pub(crate) fn pick_vector(
    model: &DeviceModel,
    templates: &TemplateSet,
    surface: &str,
    mode: &str,
    phase: Phase,
) -> (CvssVector, String) {
    if let Some(v) = model.vector_overrides.get(surface) {
        return (*v, "CVSS vector set by the device model".into());
    }
    match templates.get(mode) {
        Some(t) => (
            t.vector,
            format!("CVSS vector from the default template for {mode}"),
        ),
        None => (
            conservative_vector(phase),
            format!("no template for {mode}; conservative fallback vector"),
        ),
    }
}

pub(crate) fn finding_title(templates: &TemplateSet, surface: &str, mode: &str) -> String {
    match templates.get(mode) {
        Some(t) => t.title.replace("{surface}", &describe_surface(surface)),
        None => format!("{mode} on {}", describe_surface(surface)),
    }
}

pub(crate) fn finding_id(device: &str, mode: &str, surface: &str) -> String {
    format!("{device}-{mode}-{}", slug(surface))
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

/// Merges failed outcomes into a findings document for the model's device.
///
/// Primary failures are grouped by (surface, failure mode), one finding each.
/// Contributing failures join every group on the same surface or on the
/// surface's parent. Everything else becomes an unscored observation.
pub fn outcomes_to_ledger(
    outcomes: &[CheckOutcome],
    model: &DeviceModel,
    opts: &AssessOptions,
) -> LedgerDocument {
    let device = &model.device.id;

    struct Group<'a> {
        surface: &'a str,
        mode: &'a str,
        members: Vec<usize>,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut index: HashMap<(&str, &str), usize> = HashMap::new();
    for (i, o) in outcomes.iter().enumerate() {
        if !o.is_fail() || o.role != Role::Primary {
            continue;
        }
        let mode = o.mode.as_deref().unwrap_or("unclassified");
        let gi = *index.entry((o.surface.as_str(), mode)).or_insert_with(|| {
            groups.push(Group {
                surface: &o.surface,
                mode,
                members: Vec::new(),
            });
            groups.len() - 1
        });
        groups[gi].members.push(i);
    }

    let mut merged: HashSet<usize> = HashSet::new();
    for g in &mut groups {
        let parent = surface_parent(model, g.surface);
        for (i, o) in outcomes.iter().enumerate() {
            if o.is_fail()
                && o.role == Role::Contributing
                && (o.surface == g.surface || Some(o.surface.as_str()) == parent)
            {
                g.members.push(i);
                merged.insert(i);
            }
        }
        g.members.sort_unstable();
    }

    let mut doc = LedgerDocument::new();
    doc.devices.push(model.device.clone());

    let mut finding_for: HashMap<usize, String> = HashMap::new();
    for g in &groups {
        let first = &outcomes[g.members[0]];
        let primary_phase = g
            .members
            .iter()
            .map(|&i| &outcomes[i])
            .find(|o| o.role == Role::Primary)
            .map(|o| o.phase)
            .unwrap_or(first.phase);
        let (vector, note) = pick_vector(model, &opts.templates, g.surface, g.mode, primary_phase);
        let mut test_cases = Vec::new();
        let mut bps = Vec::new();
        let mut scenarios = BTreeSet::new();
        for &i in &g.members {
            let o = &outcomes[i];
            if let Some(tc) = &o.test_case {
                push_unique(&mut test_cases, tc);
            }
            for bp in &o.violated_bps {
                push_unique(&mut bps, bp);
            }
            if let Some(s) = o.scenario {
                scenarios.insert(s);
            }
        }
        let id = finding_id(device, g.mode, g.surface);
        for &i in &g.members {
            if outcomes[i].role == Role::Primary {
                finding_for.insert(i, id.clone());
            }
        }
        doc.findings.push(Finding {
            id,
            device: device.clone(),
            title: finding_title(&opts.templates, g.surface, g.mode),
            cvss: vector,
            score: vector.base_score().value,
            test_cases,
            best_practices: bps,
            scenarios: scenarios.into_iter().collect(),
            notes: note,
        });
    }

    let mut seen: HashSet<(Phase, String, Option<String>)> = HashSet::new();
    for (i, o) in outcomes.iter().enumerate() {
        if !o.is_fail() || merged.contains(&i) {
            continue;
        }
        let finding = finding_for.get(&i).cloned();
        let text = match &finding {
            Some(id) => doc
                .findings
                .iter()
                .find(|f| &f.id == id)
                .map(|f| f.title.clone())
                .unwrap_or_default(),
            None => format!("{}: {}", o.tag, o.rationale),
        };
        if seen.insert((o.phase, text.clone(), finding.clone())) {
            doc.observations.push(Observation {
                device: device.clone(),
                phase: o.phase,
                text,
                finding,
            });
        }
    }
    doc
}

/// Bundled device model by device id.
pub fn bundled_model(device_id: &str) -> Option<DeviceModel> {
    crate::BUNDLED_DEVICE_MODELS
        .iter()
        .find(|(id, _)| *id == device_id)
        .map(|(_, src)| load_model(src).expect("bundled device model is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn password_examples() {
        assert!(!password_strong("admin"));
        assert!(password_strong("Tr0ub4dor&3"));
        assert!(!password_strong("aaaaaaaa"));
        assert!(password_strong("correcthorsebatterystaple"));
        assert!(!password_strong("abcdefgh1"));
        assert!(password_strong("abcdefG1"));
        assert!(password_strong_with("aaaaaaaaaa", 10));
    }

    #[test]
    fn surface_descriptions() {
        assert_eq!(describe_surface("service:rtsp"), "the rtsp service");
        assert_eq!(describe_surface("debug:uart-0"), "the UART interface");
        assert_eq!(
            describe_surface("debug:storage-1"),
            "the removable storage interface"
        );
        assert_eq!(slug("service:ble-gatt"), "service-ble-gatt");
    }
}
