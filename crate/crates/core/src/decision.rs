//! Capability-driven prioritization: which attack scenarios matter for a
//! device, and which best practices to address first for each.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::findings::Ledger;
use crate::ranking::{bps_for_scenario, sort_rankings, BpRanking, RankOptions, RankingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    NetworkInterface,
    WirelessOnboarding,
    CompanionApp,
    DeviceServicesOrApi,
    CloudEcosystem,
    PhysicallyExposed,
    FirmwareUpdates,
}

impl Capability {
    pub const ALL: [Capability; 7] = [
        Capability::NetworkInterface,
        Capability::WirelessOnboarding,
        Capability::CompanionApp,
        Capability::DeviceServicesOrApi,
        Capability::CloudEcosystem,
        Capability::PhysicallyExposed,
        Capability::FirmwareUpdates,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Capability::NetworkInterface => "network_interface",
            Capability::WirelessOnboarding => "wireless_onboarding",
            Capability::CompanionApp => "companion_app",
            Capability::DeviceServicesOrApi => "device_services_or_api",
            Capability::CloudEcosystem => "cloud_ecosystem",
            Capability::PhysicallyExposed => "physically_exposed",
            Capability::FirmwareUpdates => "firmware_updates",
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Capability {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Capability::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown capability {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityProfile {
    #[serde(default)]
    pub has_network_interface: bool,
    #[serde(default)]
    pub has_wireless_onboarding: bool,
    #[serde(default)]
    pub has_companion_app: bool,
    #[serde(default)]
    pub has_device_services_or_api: bool,
    #[serde(default)]
    pub has_cloud_ecosystem: bool,
    #[serde(default)]
    pub physically_exposed: bool,
    #[serde(default)]
    pub supports_firmware_updates: bool,
}

impl CapabilityProfile {
    pub fn all() -> Self {
        let mut p = Self::default();
        for c in Capability::ALL {
            p.set(c, true);
        }
        p
    }

    pub fn has(&self, c: Capability) -> bool {
        match c {
            Capability::NetworkInterface => self.has_network_interface,
            Capability::WirelessOnboarding => self.has_wireless_onboarding,
            Capability::CompanionApp => self.has_companion_app,
            Capability::DeviceServicesOrApi => self.has_device_services_or_api,
            Capability::CloudEcosystem => self.has_cloud_ecosystem,
            Capability::PhysicallyExposed => self.physically_exposed,
            Capability::FirmwareUpdates => self.supports_firmware_updates,
        }
    }

    pub fn set(&mut self, c: Capability, value: bool) {
        let slot = match c {
            Capability::NetworkInterface => &mut self.has_network_interface,
            Capability::WirelessOnboarding => &mut self.has_wireless_onboarding,
            Capability::CompanionApp => &mut self.has_companion_app,
            Capability::DeviceServicesOrApi => &mut self.has_device_services_or_api,
            Capability::CloudEcosystem => &mut self.has_cloud_ecosystem,
            Capability::PhysicallyExposed => &mut self.physically_exposed,
            Capability::FirmwareUpdates => &mut self.supports_firmware_updates,
        };
        *slot = value;
    }

    pub fn enabled(&self) -> Vec<Capability> {
        Capability::ALL
            .into_iter()
            .filter(|c| self.has(*c))
            .collect()
    }

    pub fn validate(&self) -> Result<(), DecisionError> {
        if self.has_wireless_onboarding && !self.has_network_interface {
            return Err(DecisionError::InvalidProfile(
                "wireless onboarding requires a network interface".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityRule {
    pub requires: Vec<Capability>,
    pub scenarios: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRules {
    #[serde(default = "default_shell_scenario")]
    pub shell_scenario: u8,
    /// Scenarios whose successful attacks may end in a (root) shell.
    #[serde(default)]
    pub shell_yield_scenarios: Vec<u8>,
    #[serde(default)]
    pub rules: Vec<CapabilityRule>,
}

fn default_shell_scenario() -> u8 {
    7
}

impl Default for DecisionRules {
    fn default() -> Self {
        DecisionRules {
            shell_scenario: default_shell_scenario(),
            shell_yield_scenarios: Vec::new(),
            rules: Vec::new(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecisionError {
    #[error("invalid capability profile: {0}")]
    InvalidProfile(String),
    #[error("profile document: {0}")]
    Schema(String),
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

/// Scenario numbers relevant to `profile`, ascending. The shell scenario is
/// appended when any selected scenario can yield a shell.
pub fn relevant_scenarios(rules: &DecisionRules, profile: &CapabilityProfile) -> Vec<u8> {
    let mut set: BTreeSet<u8> = rules
        .rules
        .iter()
        .filter(|r| r.requires.iter().all(|c| profile.has(*c)))
        .flat_map(|r| r.scenarios.iter().copied())
        .collect();
    if set.iter().any(|n| rules.shell_yield_scenarios.contains(n)) {
        set.insert(rules.shell_scenario);
    }
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGraph {
    pub profile: CapabilityProfile,
    pub relevant_scenarios: Vec<u8>,
    pub per_scenario_bps: BTreeMap<u8, Vec<BpRanking>>,
    pub shell_access_included: bool,
}

impl DecisionGraph {
    /// Distinct BPs over all relevant scenarios, in ranking order.
    pub fn union_bps(&self) -> Vec<BpRanking> {
        let mut by_bp: BTreeMap<&str, &BpRanking> = BTreeMap::new();
        for rows in self.per_scenario_bps.values() {
            for r in rows {
                by_bp.entry(r.bp.as_str()).or_insert(r);
            }
        }
        let mut out: Vec<BpRanking> = by_bp.into_values().cloned().collect();
        sort_rankings(&mut out);
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct GraphOptions {
    pub rank: RankOptions,
    /// Replaces the catalog's shell-yield scenario set when present.
    pub shell_yield_scenarios: Option<Vec<u8>>,
}

pub fn build_decision_graph(
    profile: &CapabilityProfile,
    ledger: &Ledger,
    catalog: &Catalog,
    opts: &GraphOptions,
) -> Result<DecisionGraph, DecisionError> {
    profile.validate()?;
    let mut rules = catalog.decision_rules().clone();
    if let Some(y) = &opts.shell_yield_scenarios {
        rules.shell_yield_scenarios = y.clone();
    }
    let relevant = relevant_scenarios(&rules, profile);
    let mut per_scenario_bps = BTreeMap::new();
    for &n in &relevant {
        per_scenario_bps.insert(n, bps_for_scenario(ledger, catalog, n, opts.rank)?);
    }
    Ok(DecisionGraph {
        profile: *profile,
        shell_access_included: relevant.contains(&rules.shell_scenario),
        relevant_scenarios: relevant,
        per_scenario_bps,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDocument {
    schema_version: u32,
    #[serde(default)]
    name: Option<String>,
    capabilities: CapabilityProfile,
}

/// Parses a profile document (`schema_version` plus a `[capabilities]` table).
pub fn load_profile(source: &str) -> Result<(Option<String>, CapabilityProfile), DecisionError> {
    let doc: ProfileDocument =
        toml::from_str(source).map_err(|e| DecisionError::Schema(e.to_string()))?;
    if doc.schema_version != 1 {
        return Err(DecisionError::Schema(format!(
            "unsupported schema_version {}",
            doc.schema_version
        )));
    }
    doc.capabilities.validate()?;
    Ok((doc.name, doc.capabilities))
}
