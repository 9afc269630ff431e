//! Knowledge base of best practices (BPs), test cases (TCs), attacker types
//! and attack scenarios.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{Capability, DecisionRules};

pub const CATALOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackerType {
    Nearby,
    SameNetwork,
    Physical,
    ShellAccess,
}

impl AttackerType {
    pub const ALL: [AttackerType; 4] = [
        AttackerType::Nearby,
        AttackerType::SameNetwork,
        AttackerType::Physical,
        AttackerType::ShellAccess,
    ];

    /// Short code used in scenario check keys and on the command line.
    pub fn code(self) -> &'static str {
        match self {
            Self::Nearby => "na",
            Self::SameNetwork => "sna",
            Self::Physical => "pa",
            Self::ShellAccess => "sa",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Nearby => "Nearby Attacker",
            Self::SameNetwork => "Same-Network Attacker",
            Self::Physical => "Physical Attacker",
            Self::ShellAccess => "Shell Access",
        }
    }
}

impl fmt::Display for AttackerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackerType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "na" | "nearby" => Ok(Self::Nearby),
            "sna" | "same_network" | "same-network" => Ok(Self::SameNetwork),
            "pa" | "physical" => Ok(Self::Physical),
            "sa" | "shell" | "shell_access" | "shell-access" => Ok(Self::ShellAccess),
            other => Err(format!(
                "unknown attacker type {other:?} (expected na, sna, pa or sa)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpCategory {
    pub id: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerInfo {
    pub id: AttackerType,
    pub description: String,
    /// Only reachable after an earlier scenario yields a shell.
    #[serde(default)]
    pub conditional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestPractice {
    pub id: String,
    /// Short mnemonic such as `PWCrack`.
    pub label: String,
    pub category: String,
    pub text: String,
    #[serde(default)]
    pub sources: Vec<String>,
    pub testable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_reason: Option<String>,
    /// Set when the BP is checked implicitly by test cases of other categories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covered_elsewhere: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCase {
    pub id: String,
    pub label: String,
    pub text: String,
    pub covers: Vec<String>,
}

impl TestCase {
    pub fn category(&self) -> &str {
        category_of(&self.id).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCheck {
    pub key: String,
    /// Human-readable label for reports.
    pub tag: String,
    pub test_cases: Vec<String>,
    /// Name of the assessor predicate evaluating this check.
    pub probe: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackScenario {
    pub number: u8,
    pub title: String,
    pub attacker: AttackerType,
    pub checks: Vec<ScenarioCheck>,
}

impl AttackScenario {
    /// Distinct TC ids referenced by the scenario, in first-seen order.
    pub fn test_case_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.checks
            .iter()
            .flat_map(|c| c.test_cases.iter())
            .filter(|id| seen.insert(id.as_str()))
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeclaredTotals {
    categories: Option<usize>,
    best_practices: Option<usize>,
    test_cases: Option<usize>,
    scenarios: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDocument {
    schema_version: u32,
    #[serde(default)]
    declared: DeclaredTotals,
    categories: Vec<BpCategory>,
    #[serde(default)]
    attackers: Vec<AttackerInfo>,
    best_practices: Vec<BestPractice>,
    test_cases: Vec<TestCase>,
    scenarios: Vec<AttackScenario>,
    #[serde(default)]
    decision: Option<DecisionRules>,
}

/// One broken rule found while validating a catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrityViolation {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for IntegrityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{} integrity violation(s):\n{}", .0.len(), join_lines(.0))]
    Integrity(Vec<IntegrityViolation>),
    #[error("unknown {kind} id {id:?}")]
    UnknownId { kind: &'static str, id: String },
    #[error("unknown scenario {0}")]
    UnknownScenario(u8),
}

fn join_lines(v: &[IntegrityViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Validated, immutable catalog.
#[derive(Debug, Clone)]
pub struct Catalog {
    categories: Vec<BpCategory>,
    attackers: Vec<AttackerInfo>,
    best_practices: Vec<BestPractice>,
    test_cases: Vec<TestCase>,
    scenarios: Vec<AttackScenario>,
    decision: DecisionRules,
    bp_index: HashMap<String, usize>,
    tc_index: HashMap<String, usize>,
    warnings: Vec<String>,
}

/// `BP-HW-01` → `HW`. Returns `None` unless the id has the `XX-<CAT>-NN` shape.
fn category_of(id: &str) -> Option<&str> {
    let mut parts = id.splitn(3, '-');
    let _prefix = parts.next()?;
    let cat = parts.next()?;
    let num = parts.next()?;
    (num.len() == 2 && num.bytes().all(|b| b.is_ascii_digit()) && !cat.is_empty()).then_some(cat)
}

fn id_has_shape(id: &str, prefix: &str) -> bool {
    id.strip_prefix(prefix)
        .and_then(|rest| rest.strip_prefix('-'))
        .is_some()
        && category_of(id).is_some()
}

pub fn load_catalog(source: &str) -> Result<Catalog, CatalogError> {
    if source.trim().is_empty() {
        return Err(CatalogError::Schema("empty catalog document".into()));
    }
    let doc: CatalogDocument =
        toml::from_str(source).map_err(|e| CatalogError::Schema(e.to_string()))?;
    if doc.schema_version != CATALOG_SCHEMA_VERSION {
        return Err(CatalogError::Schema(format!(
            "unsupported schema_version {} (expected {CATALOG_SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    Catalog::from_document(doc)
}

impl Catalog {
    fn from_document(doc: CatalogDocument) -> Result<Catalog, CatalogError> {
        let mut violations = Vec::new();
        let mut v = |subject: &str, message: String| {
            violations.push(IntegrityViolation {
                subject: subject.to_string(),
                message,
            })
        };
        let mut warnings = Vec::new();

        let mut category_ids = HashSet::new();
        for c in &doc.categories {
            if !category_ids.insert(c.id.as_str()) {
                v(&c.id, "duplicate category id".into());
            }
        }

        let mut attacker_ids = HashSet::new();
        for a in &doc.attackers {
            if !attacker_ids.insert(a.id) {
                v(a.id.code(), "duplicate attacker entry".into());
            }
        }

        let mut bp_index = HashMap::new();
        for (i, bp) in doc.best_practices.iter().enumerate() {
            if bp_index.insert(bp.id.clone(), i).is_some() {
                v(&bp.id, "duplicate best practice id".into());
            }
            if !id_has_shape(&bp.id, "BP") {
                v(&bp.id, "id is not of the form BP-<CAT>-NN".into());
            } else if category_of(&bp.id) != Some(bp.category.as_str()) {
                v(
                    &bp.id,
                    format!("category {:?} does not match the id", bp.category),
                );
            }
            if !category_ids.contains(bp.category.as_str()) {
                v(&bp.id, format!("unknown category {:?}", bp.category));
            }
            match (bp.testable, &bp.exclusion_reason) {
                (false, None) => v(
                    &bp.id,
                    "testable = false requires an exclusion_reason".into(),
                ),
                (true, Some(_)) => v(
                    &bp.id,
                    "exclusion_reason given for a testable best practice".into(),
                ),
                _ => {}
            }
        }

        let mut tc_index = HashMap::new();
        let mut covered: HashSet<&str> = HashSet::new();
        for (i, tc) in doc.test_cases.iter().enumerate() {
            if tc_index.insert(tc.id.clone(), i).is_some() {
                v(&tc.id, "duplicate test case id".into());
            }
            if !id_has_shape(&tc.id, "TC") {
                v(&tc.id, "id is not of the form TC-<CAT>-NN".into());
            } else if !category_ids.contains(tc.category()) {
                v(&tc.id, format!("unknown category {:?}", tc.category()));
            }
            if tc.covers.is_empty() {
                v(&tc.id, "covers no best practice".into());
            }
            for bp_id in &tc.covers {
                match bp_index.get(bp_id) {
                    None => v(&tc.id, format!("covers unknown best practice {bp_id}")),
                    Some(&j) if !doc.best_practices[j].testable => {
                        v(&tc.id, format!("covers non-testable best practice {bp_id}"))
                    }
                    Some(_) => {
                        covered.insert(bp_id.as_str());
                    }
                }
            }
        }

        for bp in &doc.best_practices {
            if bp.testable && !covered.contains(bp.id.as_str()) && bp.covered_elsewhere.is_none() {
                warnings.push(format!(
                    "{}: testable best practice is covered by no test case",
                    bp.id
                ));
            }
        }

        let mut numbers = BTreeSet::new();
        let mut referenced: HashSet<&str> = HashSet::new();
        for s in &doc.scenarios {
            let subject = format!("scenario {}", s.number);
            if !numbers.insert(s.number) {
                v(&subject, "duplicate scenario number".into());
            }
            if !doc.attackers.is_empty() && !attacker_ids.contains(&s.attacker) {
                v(
                    &subject,
                    format!("attacker {:?} is not declared", s.attacker.code()),
                );
            }
            if s.checks.is_empty() {
                v(&subject, "has no checks".into());
            }
            let mut keys = HashSet::new();
            for check in &s.checks {
                if !keys.insert(check.key.as_str()) {
                    v(&subject, format!("duplicate check key {}", check.key));
                }
                if check.test_cases.is_empty() {
                    v(
                        &subject,
                        format!("check {} references no test case", check.key),
                    );
                }
                for tc in &check.test_cases {
                    if tc_index.contains_key(tc) {
                        referenced.insert(tc.as_str());
                    } else {
                        v(
                            &subject,
                            format!("check {} references unknown test case {tc}", check.key),
                        );
                    }
                }
            }
        }
        let expected: BTreeSet<u8> = (1..=doc.scenarios.len() as u8).collect();
        if numbers != expected {
            v(
                "scenarios",
                format!("numbers must run 1..={} without gaps", doc.scenarios.len()),
            );
        }
        for tc in &doc.test_cases {
            if !referenced.contains(tc.id.as_str()) {
                warnings.push(format!("{}: test case is referenced by no scenario", tc.id));
            }
        }

        let decision = doc.decision.clone().unwrap_or_default();
        let scenario_attacker: HashMap<u8, AttackerType> = doc
            .scenarios
            .iter()
            .map(|s| (s.number, s.attacker))
            .collect();
        for (i, rule) in decision.rules.iter().enumerate() {
            let subject = format!("decision rule {}", i + 1);
            if rule.requires.is_empty() {
                v(&subject, "requires no capability".into());
            }
            for n in &rule.scenarios {
                if !scenario_attacker.contains_key(n) {
                    v(&subject, format!("references unknown scenario {n}"));
                }
            }
        }
        if doc.decision.is_some() {
            match scenario_attacker.get(&decision.shell_scenario) {
                None => v(
                    "decision",
                    format!("shell_scenario {} does not exist", decision.shell_scenario),
                ),
                Some(AttackerType::ShellAccess) => {}
                Some(other) => v(
                    "decision",
                    format!(
                        "shell_scenario {} belongs to {} instead of shell access",
                        decision.shell_scenario,
                        other.code()
                    ),
                ),
            }
            for n in &decision.shell_yield_scenarios {
                if !scenario_attacker.contains_key(n) {
                    v(
                        "decision",
                        format!("shell_yield_scenarios references unknown scenario {n}"),
                    );
                }
            }
        }

        let d = &doc.declared;
        for (what, declared, actual) in [
            ("categories", d.categories, doc.categories.len()),
            ("best_practices", d.best_practices, doc.best_practices.len()),
            ("test_cases", d.test_cases, doc.test_cases.len()),
            ("scenarios", d.scenarios, doc.scenarios.len()),
        ] {
            if let Some(n) = declared {
                if n != actual {
                    v("declared", format!("{what}: declared {n}, found {actual}"));
                }
            }
        }

        if !violations.is_empty() {
            return Err(CatalogError::Integrity(violations));
        }

        let mut scenarios = doc.scenarios;
        scenarios.sort_by_key(|s| s.number);
        Ok(Catalog {
            categories: doc.categories,
            attackers: doc.attackers,
            best_practices: doc.best_practices,
            test_cases: doc.test_cases,
            scenarios,
            decision,
            bp_index,
            tc_index,
            warnings,
        })
    }

    pub fn categories(&self) -> &[BpCategory] {
        &self.categories
    }

    pub fn attackers(&self) -> &[AttackerInfo] {
        &self.attackers
    }

    pub fn best_practices(&self) -> &[BestPractice] {
        &self.best_practices
    }

    pub fn test_cases(&self) -> &[TestCase] {
        &self.test_cases
    }

    pub fn scenarios(&self) -> &[AttackScenario] {
        &self.scenarios
    }

    pub fn decision_rules(&self) -> &DecisionRules {
        &self.decision
    }

    /// Non-fatal findings of validation (uncovered BPs, unreferenced TCs).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn best_practice(&self, id: &str) -> Option<&BestPractice> {
        self.bp_index.get(id).map(|&i| &self.best_practices[i])
    }

    pub fn test_case(&self, id: &str) -> Option<&TestCase> {
        self.tc_index.get(id).map(|&i| &self.test_cases[i])
    }

    pub fn scenario(&self, number: u8) -> Option<&AttackScenario> {
        self.scenarios.iter().find(|s| s.number == number)
    }

    pub fn category(&self, id: &str) -> Option<&BpCategory> {
        self.categories.iter().find(|c| c.id == id)
    }

    /// Position of a BP in catalog order, used as a stable sort key.
    pub fn bp_position(&self, id: &str) -> Option<usize> {
        self.bp_index.get(id).copied()
    }

    pub fn tcs_for_bp(&self, bp_id: &str) -> Result<Vec<&TestCase>, CatalogError> {
        if !self.bp_index.contains_key(bp_id) {
            return Err(CatalogError::UnknownId {
                kind: "best practice",
                id: bp_id.to_string(),
            });
        }
        Ok(self
            .test_cases
            .iter()
            .filter(|tc| tc.covers.iter().any(|c| c == bp_id))
            .collect())
    }

    pub fn scenarios_for_attacker(&self, attacker: AttackerType) -> Vec<&AttackScenario> {
        self.scenarios
            .iter()
            .filter(|s| s.attacker == attacker)
            .collect()
    }

    pub fn excluded_bps(&self) -> Vec<(&BestPractice, &str)> {
        self.best_practices
            .iter()
            .filter_map(|bp| bp.exclusion_reason.as_deref().map(|r| (bp, r)))
            .collect()
    }

    /// Scenarios containing a check that references `tc_id`.
    pub fn scenarios_for_tc(&self, tc_id: &str) -> Vec<u8> {
        self.scenarios
            .iter()
            .filter(|s| {
                s.checks
                    .iter()
                    .any(|c| c.test_cases.iter().any(|t| t == tc_id))
            })
            .map(|s| s.number)
            .collect()
    }

    pub fn is_conditional(&self, attacker: AttackerType) -> bool {
        self.attackers
            .iter()
            .find(|a| a.id == attacker)
            .map(|a| a.conditional)
            .unwrap_or(attacker == AttackerType::ShellAccess)
    }

    /// Capabilities that appear in at least one decision rule.
    pub fn decision_capabilities(&self) -> BTreeSet<Capability> {
        self.decision
            .rules
            .iter()
            .flat_map(|r| r.requires.iter().copied())
            .collect()
    }
}
