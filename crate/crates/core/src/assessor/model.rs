//! Declarative device model evaluated by the assessor.
//!
//! Optional sections mean "not examined": checks needing them come out
//! NotApplicable instead of guessing.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cvss::CvssVector;
use crate::findings::Device;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid device model:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CredentialSpec {
    pub value: String,
    #[serde(default)]
    pub per_device_unique: bool,
    #[serde(default)]
    pub user_changeable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsSpec {
    pub protocol_version: String,
    #[serde(default)]
    pub certificate_validated: bool,
    #[serde(default)]
    pub pinned: bool,
    #[serde(default)]
    pub payload_signed: bool,
    #[serde(default)]
    pub partner_verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    OpenWifi,
    Wpa2Wifi,
    BleJustWorks,
    BleSecurePairing,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnboardingChannel {
    pub kind: ChannelKind,
    /// Wi-Fi passphrase or pairing PIN protecting the channel itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential: Option<CredentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tls: Option<TlsSpec>,
    /// Key of an application-layer encryption wrapped around onboarding payloads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_layer_key: Option<CredentialSpec>,
    #[serde(default)]
    pub terminated_after_onboarding: bool,
    /// The device refuses to be claimed by an account other than the one that started onboarding.
    #[serde(default = "yes")]
    pub owner_bound: bool,
}

fn yes() -> bool {
    true
}

impl Default for OnboardingChannel {
    fn default() -> Self {
        OnboardingChannel {
            kind: ChannelKind::None,
            credential: None,
            tls: None,
            app_layer_key: None,
            terminated_after_onboarding: true,
            owner_bound: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exposure {
    /// Reachable on the onboarding network or pairing channel.
    Onboarding,
    /// Reachable from the home LAN after setup.
    Lan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthKind {
    NoAuth,
    DefaultCredential,
    UserCredential,
}

fn lan_only() -> Vec<Exposure> {
    vec![Exposure::Lan]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    pub name: String,
    /// Absent for services without a port, e.g. BLE GATT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port: Option<u16>,
    pub protocol: String,
    #[serde(default = "lan_only")]
    pub exposure: Vec<Exposure>,
    pub auth: AuthKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential: Option<CredentialSpec>,
    #[serde(default)]
    pub auth_bypassable: bool,
    #[serde(default)]
    pub brute_force_guard: bool,
    #[serde(default)]
    pub input_sanitized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tls: Option<TlsSpec>,
    #[serde(default)]
    pub necessary_for_function: bool,
}

impl ServiceSpec {
    pub fn exposed(&self, e: Exposure) -> bool {
        self.exposure.contains(&e)
    }

    pub fn onboarding_only(&self) -> bool {
        self.exposed(Exposure::Onboarding) && !self.exposed(Exposure::Lan)
    }

    pub fn surface(&self) -> String {
        format!("service:{}", self.name)
    }

    pub fn is_shell(&self) -> bool {
        matches!(self.protocol.as_str(), "telnet" | "ssh")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountSpec {
    /// The weakest password the setup flow accepted when tried.
    pub weakest_accepted_password: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    /// Absent means the link carries plaintext.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tls: Option<TlsSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PasswordResetSpec {
    pub code_digits: u8,
    pub rate_limited: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_link: Option<LinkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_link: Option<LinkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_factor: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub password_reset: Option<PasswordResetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_enumeration: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmwareSpec {
    pub auto_update: bool,
    /// Absent means updates travel in plaintext.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_tls: Option<TlsSpec>,
    pub encrypted: bool,
    pub signed: bool,
    pub verified_before_apply: bool,
    pub hardcoded_credentials: bool,
    pub rollback_prevented: bool,
    pub filesystem_encrypted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DebugKind {
    Uart,
    Jtag,
    /// Removable storage the firmware reads commands or config from.
    Storage,
}

impl DebugKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DebugKind::Uart => "uart",
            DebugKind::Jtag => "jtag",
            DebugKind::Storage => "storage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugInterface {
    pub kind: DebugKind,
    pub active: bool,
    pub authenticated: bool,
    pub read_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential: Option<CredentialSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSpec {
    pub tamper_evident_packaging: bool,
    pub pcb_tamper_protected: bool,
    pub security_chip: bool,
    #[serde(default)]
    pub debug_interfaces: Vec<DebugInterface>,
    pub factory_reset_wipes_credentials: bool,
}

impl PhysicalSpec {
    pub fn debug_surface(&self, idx: usize) -> String {
        format!("debug:{}-{idx}", self.debug_interfaces[idx].kind.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OsPostureSpec {
    pub secure_boot: bool,
    pub credentials_hashed_industry_standard: bool,
    pub services_least_privilege: bool,
    pub root_fs_user_writable: bool,
    pub firewall: bool,
    pub logs_sensitive_data: bool,
    pub breach_alerts: bool,
    /// Accepted here as well as at the top level of the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dos_resilient: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceModel {
    pub schema_version: u32,
    pub device: Device,
    #[serde(default)]
    pub onboarding_channel: OnboardingChannel,
    #[serde(default)]
    pub services: Vec<ServiceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accounts: Option<AccountSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<CloudSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub firmware: Option<FirmwareSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub os_posture: Option<OsPostureSpec>,
    /// Device stays reachable under Ping of Death and ICMP flood.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dos_resilient: Option<bool>,
    /// Core functions keep working with the internet sink-holed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions_offline: Option<bool>,
    /// Per-surface CVSS vectors replacing the default templates.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vector_overrides: BTreeMap<String, CvssVector>,
}

pub fn load_model(source: &str) -> Result<DeviceModel, ModelError> {
    let model: DeviceModel =
        toml::from_str(source).map_err(|e| ModelError::Schema(e.to_string()))?;
    if model.schema_version != MODEL_SCHEMA_VERSION {
        return Err(ModelError::Schema(format!(
            "unsupported schema_version {} (expected {MODEL_SCHEMA_VERSION})",
            model.schema_version
        )));
    }
    model.validate()?;
    Ok(model)
}

fn check_tls(problems: &mut Vec<String>, what: &str, tls: &Option<TlsSpec>) {
    if let Some(t) = tls {
        if t.pinned && !t.certificate_validated {
            problems.push(format!("{what}: pinned TLS requires certificate_validated"));
        }
    }
}

impl DeviceModel {
    pub fn effective_dos_resilient(&self) -> Option<bool> {
        self.dos_resilient
            .or_else(|| self.os_posture.as_ref().and_then(|o| o.dos_resilient))
    }

    pub fn service(&self, name: &str) -> Option<&ServiceSpec> {
        self.services.iter().find(|s| s.name == name)
    }

    /// Every surface name a check can report on for this model.
    pub fn surfaces(&self) -> Vec<String> {
        let mut out = vec!["onboarding".to_string(), "device".to_string()];
        out.extend(self.services.iter().map(ServiceSpec::surface));
        out.extend(["cloud:app", "cloud:device", "cloud:account"].map(String::from));
        out.extend(["firmware", "physical", "os", "ig"].map(String::from));
        if let Some(p) = &self.physical {
            out.extend((0..p.debug_interfaces.len()).map(|i| p.debug_surface(i)));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut problems = Vec::new();
        if self.device.id.is_empty() {
            problems.push("device.id is empty".to_string());
        }
        if let Err(e) = self.device.capabilities.validate() {
            problems.push(e.to_string());
        }
        let ch = &self.onboarding_channel;
        check_tls(&mut problems, "onboarding_channel", &ch.tls);
        if ch.kind == ChannelKind::None && (ch.credential.is_some() || ch.tls.is_some()) {
            problems.push("onboarding_channel: kind none cannot carry credential or tls".into());
        }

        let mut names = HashSet::new();
        let mut ports = HashSet::new();
        for s in &self.services {
            let what = format!("service {}", s.name);
            if s.name.is_empty() {
                problems.push("service with empty name".into());
            }
            if !names.insert(s.name.as_str()) {
                problems.push(format!("{what}: duplicate service name"));
            }
            if let Some(p) = s.port {
                if p == 0 {
                    problems.push(format!("{what}: port must be in 1..=65535"));
                } else if !ports.insert(p) {
                    problems.push(format!("{what}: port {p} used twice"));
                }
            }
            if s.exposure.is_empty() {
                problems.push(format!("{what}: exposure is empty"));
            }
            match (s.auth, &s.credential) {
                (AuthKind::NoAuth, Some(_)) => {
                    problems.push(format!("{what}: credential given for no_auth"))
                }
                (AuthKind::DefaultCredential | AuthKind::UserCredential, None) => {
                    problems.push(format!("{what}: credential required for {:?}", s.auth))
                }
                _ => {}
            }
            check_tls(&mut problems, &what, &s.tls);
        }

        if let Some(c) = &self.cloud {
            for (what, link) in [
                ("cloud.app_link", &c.app_link),
                ("cloud.device_link", &c.device_link),
            ] {
                if let Some(l) = link {
                    check_tls(&mut problems, what, &l.tls);
                }
            }
        }
        if let Some(f) = &self.firmware {
            check_tls(&mut problems, "firmware.channel_tls", &f.channel_tls);
        }
        if let Some(p) = &self.physical {
            for (i, d) in p.debug_interfaces.iter().enumerate() {
                if d.credential.is_some() && !d.authenticated {
                    problems.push(format!(
                        "{}: credential given but authenticated = false",
                        p.debug_surface(i)
                    ));
                }
            }
        }
        let surfaces: HashSet<String> = self.surfaces().into_iter().collect();
        for key in self.vector_overrides.keys() {
            if !surfaces.contains(key) {
                problems.push(format!("vector_overrides: unknown surface {key:?}"));
            }
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(problems))
        }
    }
}
