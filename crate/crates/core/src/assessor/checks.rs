//! Probe predicates. Each probe inspects one part of the device model and
//! reports a verdict per surface it looked at.

use crate::catalog::{AttackScenario, AttackerType, Catalog, ScenarioCheck};
use crate::findings::{Finding, Phase};

use super::model::{
    AuthKind, ChannelKind, CredentialSpec, DebugInterface, DebugKind, DeviceModel, Exposure,
    LinkSpec, ServiceSpec,
};
use super::{
    finding_id, finding_title, password_strong_with, pick_vector, AssessOptions, CheckOutcome,
    Role, Verdict,
};

/// Ping of Death and ICMP flood parameters used by the availability check.
pub(crate) const DOS_PARAMETERS: &str =
    "Ping of Death with fragmented IP packets of larger size than 65,535 bytes; \
     ICMP flood of 65,535-byte ICMP pings from 100 terminals for one minute";

struct Res {
    surface: String,
    verdict: Verdict,
    rationale: String,
    role: Role,
    mode: Option<&'static str>,
    bps: Vec<String>,
    shell: bool,
}

impl Res {
    fn pass(surface: impl Into<String>, why: impl Into<String>) -> Res {
        Res {
            surface: surface.into(),
            verdict: Verdict::Pass,
            rationale: why.into(),
            role: Role::Observation,
            mode: None,
            bps: Vec::new(),
            shell: false,
        }
    }

    fn na(surface: impl Into<String>, why: impl Into<String>) -> Res {
        Res {
            verdict: Verdict::NotApplicable,
            ..Res::pass(surface, why)
        }
    }

    fn observe(surface: impl Into<String>, why: impl Into<String>, bps: Vec<String>) -> Res {
        Res {
            verdict: Verdict::Fail,
            bps,
            ..Res::pass(surface, why)
        }
    }

    fn contributing(surface: impl Into<String>, why: impl Into<String>, bps: Vec<String>) -> Res {
        Res {
            role: Role::Contributing,
            ..Res::observe(surface, why, bps)
        }
    }

    fn primary(
        surface: impl Into<String>,
        why: impl Into<String>,
        mode: &'static str,
        bps: Vec<String>,
    ) -> Res {
        Res {
            role: Role::Primary,
            mode: Some(mode),
            ..Res::observe(surface, why, bps)
        }
    }

    fn shell(mut self) -> Res {
        self.shell = true;
        self
    }
}

fn bps(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

pub(super) struct Ctx<'a> {
    pub model: &'a DeviceModel,
    pub catalog: &'a Catalog,
    pub opts: &'a AssessOptions,
}

impl Ctx<'_> {
    fn strong(&self, password: &str) -> bool {
        password_strong_with(password, self.opts.password_long_threshold)
    }

    /// Weak value, or one shared by every unit of the product.
    fn credential_weak(&self, c: &CredentialSpec) -> Option<String> {
        if !self.strong(&c.value) {
            Some(format!(
                "credential {:?} fails the password policy",
                c.value
            ))
        } else if !c.per_device_unique {
            Some("credential is shared across all units".into())
        } else {
            None
        }
    }

    fn covers(&self, tc: &str) -> Vec<String> {
        self.catalog
            .test_case(tc)
            .map(|t| t.covers.clone())
            .unwrap_or_default()
    }

    fn services_for(&self, attacker: AttackerType) -> Vec<&ServiceSpec> {
        let exposure = match attacker {
            AttackerType::Nearby => Exposure::Onboarding,
            AttackerType::SameNetwork => Exposure::Lan,
            _ => return Vec::new(),
        };
        self.model
            .services
            .iter()
            .filter(|s| s.exposed(exposure))
            .collect()
    }

    fn outcome(
        &self,
        phase: Phase,
        scenario: Option<u8>,
        key: &str,
        tag: &str,
        tc: Option<&str>,
        r: Res,
    ) -> CheckOutcome {
        let draft_finding = match (r.verdict, r.role, r.mode) {
            (Verdict::Fail, Role::Primary, Some(mode)) => {
                let (vector, notes) =
                    pick_vector(self.model, &self.opts.templates, &r.surface, mode, phase);
                Some(Finding {
                    id: finding_id(&self.model.device.id, mode, &r.surface),
                    device: self.model.device.id.clone(),
                    title: finding_title(&self.opts.templates, &r.surface, mode),
                    cvss: vector,
                    score: vector.base_score().value,
                    test_cases: tc.map(|t| vec![t.to_string()]).unwrap_or_default(),
                    best_practices: r.bps.clone(),
                    scenarios: scenario.into_iter().collect(),
                    notes,
                })
            }
            _ => None,
        };
        CheckOutcome {
            phase,
            scenario,
            check_key: key.to_string(),
            tag: tag.to_string(),
            test_case: tc.map(str::to_string),
            surface: r.surface,
            verdict: r.verdict,
            rationale: r.rationale,
            role: r.role,
            mode: r.mode.map(str::to_string),
            violated_bps: if r.verdict == Verdict::Fail {
                r.bps
            } else {
                Vec::new()
            },
            grants_shell: r.verdict == Verdict::Fail && r.shell,
            draft_finding,
        }
    }

    pub fn evaluate(&self, scenario: &AttackScenario, check: &ScenarioCheck) -> Vec<CheckOutcome> {
        let phase = Phase::from(scenario.attacker);
        let mut out = Vec::new();
        for tc in &check.test_cases {
            for r in self.probe(scenario, &check.probe, tc) {
                out.push(self.outcome(
                    phase,
                    Some(scenario.number),
                    &check.key,
                    &check.tag,
                    Some(tc),
                    r,
                ));
            }
        }
        out
    }

    /// Outcomes for a conditional scenario whose precondition never held.
    pub fn not_reached(
        &self,
        scenario: &AttackScenario,
        check: &ScenarioCheck,
    ) -> Vec<CheckOutcome> {
        let phase = Phase::from(scenario.attacker);
        check
            .test_cases
            .iter()
            .map(|tc| {
                let r = Res::na("os", "no earlier check granted shell access");
                self.outcome(
                    phase,
                    Some(scenario.number),
                    &check.key,
                    &check.tag,
                    Some(tc),
                    r,
                )
            })
            .collect()
    }

    pub fn information_gathering(&self) -> Vec<CheckOutcome> {
        let ig = self.model.device.ig.clone().unwrap_or_default();
        let mut steps: Vec<(&str, &str, Res)> = Vec::new();

        steps.push((
            "IG-01",
            "Companion app",
            match (&ig.app_version, ig.app_decompilable) {
                (None, None) => Res::na("ig", "companion app not examined"),
                (v, d) => Res::pass(
                    "ig",
                    format!(
                        "app version {}; decompilable: {}",
                        v.as_deref().unwrap_or("unknown"),
                        d.map_or("unknown".to_string(), |b| b.to_string())
                    ),
                ),
            },
        ));
        steps.push((
            "IG-02",
            "Firmware version",
            match &ig.firmware_version {
                Some(v) => Res::pass("ig", format!("firmware version {v} recorded")),
                None => Res::na("ig", "firmware version not recorded"),
            },
        ));
        steps.push((
            "IG-03",
            "Cloud dependency",
            match ig.cloud_only {
                Some(true) => Res::pass("ig", "device is managed only through the vendor cloud"),
                Some(false) => Res::pass("ig", "device can be managed locally"),
                None => Res::na("ig", "cloud dependency not examined"),
            },
        ));
        steps.push((
            "IG-04",
            "Open-source components",
            match ig.open_source_hardcoded_credentials {
                Some(true) => Res::observe(
                    "ig",
                    "published open-source components contain hardcoded credentials",
                    bps(&["BP-DSP-02"]),
                ),
                Some(false) => Res::pass("ig", "no hardcoded credentials in published sources"),
                None => Res::na("ig", "published sources not examined"),
            },
        ));
        steps.push((
            "IG-05",
            "Firmware availability",
            match ig.firmware_downloadable {
                Some(d) => Res::pass("ig", format!("firmware image downloadable: {d}")),
                None => Res::na("ig", "firmware availability not examined"),
            },
        ));

        let cloud = self.model.cloud.as_ref();
        steps.push((
            "IG-Account",
            "Password reset",
            match cloud.and_then(|c| c.password_reset) {
                None => Res::na("cloud:account", "password reset flow not examined"),
                Some(p) if p.code_digits < 6 || !p.rate_limited => Res::primary(
                    "cloud:account",
                    format!(
                        "reset code has {} digits and attempts are {}rate limited",
                        p.code_digits,
                        if p.rate_limited { "" } else { "not " }
                    ),
                    "weak-password-reset",
                    bps(&["BP-AE-06"]),
                ),
                Some(_) => Res::pass("cloud:account", "reset codes resist guessing"),
            },
        ));
        steps.push((
            "IG-Enumeration",
            "Account enumeration",
            match cloud.and_then(|c| c.user_enumeration) {
                None => Res::na("cloud:account", "account enumeration not examined"),
                Some(true) => Res::observe(
                    "cloud:account",
                    "cloud login reveals whether an account exists",
                    bps(&["BP-AE-06"]),
                ),
                Some(false) => Res::pass("cloud:account", "cloud login does not reveal accounts"),
            },
        ));

        steps
            .into_iter()
            .map(|(key, tag, r)| self.outcome(Phase::InformationGathering, None, key, tag, None, r))
            .collect()
    }

    fn probe(&self, scenario: &AttackScenario, probe: &str, tc: &str) -> Vec<Res> {
        let m = self.model;
        let ch = &m.onboarding_channel;
        match probe {
            "channel-credential" => vec![self.channel_credential()],
            "channel-encryption" => {
                if ch.kind == ChannelKind::None {
                    return vec![Res::na("onboarding", "device has no onboarding channel")];
                }
                let validated_tls = ch.tls.as_ref().is_some_and(|t| t.certificate_validated);
                let locked_link = matches!(
                    ch.kind,
                    ChannelKind::Wpa2Wifi | ChannelKind::BleSecurePairing
                ) && ch
                    .credential
                    .as_ref()
                    .is_some_and(|c| self.credential_weak(c).is_none());
                if validated_tls {
                    vec![Res::pass(
                        "onboarding",
                        "onboarding payloads travel over validated TLS",
                    )]
                } else if ch.app_layer_key.is_some() {
                    vec![Res::pass(
                        "onboarding",
                        "onboarding payloads are encrypted at the application layer",
                    )]
                } else if locked_link {
                    vec![Res::pass(
                        "onboarding",
                        "link-layer encryption with a strong per-device key",
                    )]
                } else {
                    vec![Res::primary(
                        "onboarding",
                        "onboarding payloads, including home network credentials, are readable on the channel",
                        "onboarding-traffic-unprotected",
                        self.covers(tc),
                    )]
                }
            }
            "channel-signing" => {
                if ch.kind == ChannelKind::None {
                    return vec![Res::na("onboarding", "device has no onboarding channel")];
                }
                if ch.tls.as_ref().is_some_and(|t| t.payload_signed) {
                    vec![Res::pass("onboarding", "onboarding payloads are signed")]
                } else {
                    vec![Res::observe(
                        "onboarding",
                        "onboarding payloads are not signed",
                        self.covers(tc),
                    )]
                }
            }
            "user-password-policy" => match &m.accounts {
                None => vec![Res::na("cloud:account", "account creation not examined")],
                Some(a) if self.strong(&a.weakest_accepted_password) => {
                    vec![Res::pass("cloud:account", "weak passwords are rejected")]
                }
                Some(a) => vec![Res::observe(
                    "cloud:account",
                    format!(
                        "account accepted the password {:?}",
                        a.weakest_accepted_password
                    ),
                    self.covers(tc),
                )],
            },
            "service-brute-force" => self.per_service(
                scenario.attacker,
                |s| s.auth != AuthKind::NoAuth,
                "authenticated service",
                |s| {
                    if s.brute_force_guard {
                        Res::pass(s.surface(), "repeated login attempts are throttled")
                    } else {
                        Res::observe(
                            s.surface(),
                            "unlimited login attempts are accepted",
                            self.covers(tc),
                        )
                    }
                },
            ),
            "channel-partner" => {
                if ch.kind == ChannelKind::None {
                    return vec![Res::na("onboarding", "device has no onboarding channel")];
                }
                if ch.tls.as_ref().is_some_and(|t| t.partner_verified) {
                    vec![Res::pass(
                        "onboarding",
                        "the device verifies who it is being onboarded by",
                    )]
                } else if ch.owner_bound {
                    vec![Res::observe(
                        "onboarding",
                        "communication partner is not verified, but the device stays bound to its owner",
                        self.covers(tc),
                    )]
                } else {
                    vec![Res::primary(
                        "onboarding",
                        "an unverified partner can complete onboarding and claim the device",
                        "onboarding-takeover",
                        self.covers(tc),
                    )]
                }
            }
            "service-partner" => self.per_service(
                scenario.attacker,
                |_| true,
                "service",
                |s| {
                    if s.tls.as_ref().is_some_and(|t| t.partner_verified) {
                        Res::pass(s.surface(), "communication partner is verified")
                    } else if s.exposed(Exposure::Onboarding) && !ch.owner_bound {
                        Res::primary(
                        s.surface(),
                        "the setup service accepts any client on the network as the device's owner",
                        "onboarding-takeover",
                        self.covers(tc),
                    )
                    } else {
                        Res::observe(
                            s.surface(),
                            "communication partner is not verified",
                            self.covers(tc),
                        )
                    }
                },
            ),
            "open-ports" => self.per_service(
                scenario.attacker,
                |s| s.port.is_some(),
                "open port",
                |s| {
                    let port = s.port.unwrap_or_default();
                    if s.necessary_for_function {
                        Res::pass(
                            s.surface(),
                            format!("port {port} is needed for the device's function"),
                        )
                    } else {
                        Res::observe(
                            s.surface(),
                            format!("port {port} is open without being needed"),
                            self.covers(tc),
                        )
                    }
                },
            ),
            "dos" => vec![match m.effective_dos_resilient() {
                None => Res::na("device", "availability under flooding not examined"),
                Some(true) => Res::pass(
                    "device",
                    format!("{DOS_PARAMETERS}: device stayed reachable"),
                ),
                Some(false) => Res::primary(
                    "device",
                    format!("{DOS_PARAMETERS}: device became unreachable"),
                    "dos",
                    bps(&["BP-SIS-06"]),
                ),
            }],
            "service-authentication" => self.per_service(
                scenario.attacker,
                |_| true,
                "service",
                |s| {
                    if s.auth == AuthKind::NoAuth {
                        Res::primary(
                            s.surface(),
                            "service answers without authentication",
                            "unauthenticated-service",
                            bps(&["BP-SIS-07"]),
                        )
                    } else if s.auth_bypassable {
                        Res::primary(
                            s.surface(),
                            "service authentication can be bypassed",
                            "unauthenticated-service",
                            bps(&["BP-SIS-07"]),
                        )
                    } else {
                        Res::pass(s.surface(), "service requires authentication")
                    }
                },
            ),
            "input-sanitization" => self.per_service(
                scenario.attacker,
                |_| true,
                "service",
                |s| {
                    if s.input_sanitized {
                        Res::pass(s.surface(), "input is sanitized")
                    } else {
                        Res::primary(
                            s.surface(),
                            "unsanitized input reaches a command interpreter",
                            "input-injection",
                            self.covers(tc),
                        )
                        .shell()
                    }
                },
            ),
            "onboarding-termination" => vec![if ch.kind == ChannelKind::None {
                Res::na("onboarding", "device has no onboarding channel")
            } else if ch.terminated_after_onboarding {
                Res::pass("onboarding", "onboarding interface closes after setup")
            } else {
                Res::contributing(
                    "onboarding",
                    "onboarding interface stays reachable after setup",
                    bps(&["BP-SIS-04"]),
                )
            }],
            "cloud-app-encryption" => {
                vec![self.link_encryption("cloud:app", |c| c.app_link.as_ref(), tc)]
            }
            "cloud-device-encryption" => {
                vec![self.link_encryption("cloud:device", |c| c.device_link.as_ref(), tc)]
            }
            "cloud-app-signing" => {
                vec![self.link_signing("cloud:app", |c| c.app_link.as_ref(), tc)]
            }
            "cloud-device-signing" => {
                vec![self.link_signing("cloud:device", |c| c.device_link.as_ref(), tc)]
            }
            "two-factor" => vec![match m.cloud.as_ref().and_then(|c| c.two_factor) {
                None => Res::na("cloud:account", "two-factor support not examined"),
                Some(true) => Res::pass("cloud:account", "two-factor authentication offered"),
                Some(false) => Res::observe(
                    "cloud:account",
                    "no two-factor authentication",
                    self.covers(tc),
                ),
            }],
            "service-credential" => self.per_service(
                scenario.attacker,
                |_| true,
                "service",
                |s| {
                    let Some(c) = &s.credential else {
                        return Res::na(s.surface(), "service has no credential");
                    };
                    let problem = if !self.strong(&c.value) {
                        Some(format!(
                            "credential {:?} fails the password policy",
                            c.value
                        ))
                    } else if !c.per_device_unique && !c.user_changeable {
                        Some("credential is shared across all units and cannot be changed".into())
                    } else {
                        None
                    };
                    match problem {
                        None => Res::pass(s.surface(), "service credential is strong"),
                        Some(why) => {
                            let r = Res::primary(
                                s.surface(),
                                why,
                                "weak-service-credential",
                                self.covers(tc),
                            );
                            if s.is_shell() {
                                r.shell()
                            } else {
                                r
                            }
                        }
                    }
                },
            ),
            "offline-operation" => vec![match m.functions_offline {
                None => Res::na("device", "offline behaviour not examined"),
                Some(true) => Res::pass("device", "core functions work without internet access"),
                Some(false) => Res::observe(
                    "device",
                    "core functions stop without internet access",
                    self.covers(tc),
                ),
            }],
            "firmware-auto-update" => {
                self.firmware(|f| (f.auto_update, "updates install automatically"), tc)
            }
            "firmware-delivery" => match tc {
                "TC-FU-02" => self.firmware(
                    |f| {
                        (
                            f.channel_tls
                                .as_ref()
                                .is_some_and(|t| t.certificate_validated),
                            "updates are fetched over validated TLS",
                        )
                    },
                    tc,
                ),
                "TC-FU-04" => self.firmware(|f| (f.encrypted, "firmware images are encrypted"), tc),
                "TC-FU-05" => self.firmware(
                    |f| {
                        (
                            f.signed && f.verified_before_apply,
                            "firmware signatures are verified before install",
                        )
                    },
                    tc,
                ),
                other => vec![Res::na(
                    "firmware",
                    format!("no firmware delivery predicate for {other}"),
                )],
            },
            "firmware-credentials" => self.firmware(
                |f| {
                    (
                        !f.hardcoded_credentials,
                        "firmware contains no hardcoded credentials",
                    )
                },
                tc,
            ),
            "firmware-rollback" => {
                self.firmware(|f| (f.rollback_prevented, "older firmware is refused"), tc)
            }
            "filesystem-encryption" => {
                self.firmware(|f| (f.filesystem_encrypted, "file system is encrypted"), tc)
            }
            "tamper-evidence" => self.physical(
                |p| (p.tamper_evident_packaging, "packaging is tamper evident"),
                tc,
            ),
            "tamper-resistance" => self.physical(
                |p| (p.pcb_tamper_protected, "circuit board is tamper protected"),
                tc,
            ),
            "security-chip" => {
                self.physical(|p| (p.security_chip, "secrets sit in a security chip"), tc)
            }
            "factory-reset" => self.physical(
                |p| {
                    (
                        p.factory_reset_wipes_credentials,
                        "factory reset wipes stored credentials",
                    )
                },
                tc,
            ),
            "debug-interfaces" => self.debug_interfaces(),
            "debug-credential" => self.debug_credentials(tc),
            "secure-boot" => self.os(|o| (o.secure_boot, "boot chain is verified"), tc),
            "credential-hashing" => self.os(
                |o| {
                    (
                        o.credentials_hashed_industry_standard,
                        "stored credentials use a standard hash",
                    )
                },
                tc,
            ),
            "least-privilege" => self.os(
                |o| {
                    (
                        o.services_least_privilege,
                        "services run with least privilege",
                    )
                },
                tc,
            ),
            "root-fs" => self.os(
                |o| (!o.root_fs_user_writable, "root file system is not writable"),
                tc,
            ),
            "firewall" => self.os(|o| (o.firewall, "a host firewall is active"), tc),
            "breach-alerts" => {
                self.os(|o| (o.breach_alerts, "the user is alerted on a breach"), tc)
            }
            "sensitive-logging" => vec![match &m.os_posture {
                None => Res::na("os", "operating system not examined"),
                Some(o) if o.logs_sensitive_data => Res::primary(
                    "os",
                    "logs contain credentials or personal data",
                    "sensitive-logging",
                    bps(&["BP-LOG-03"]),
                ),
                Some(_) => Res::pass("os", "no sensitive data in logs"),
            }],
            other => vec![Res::na(
                "device",
                format!("no predicate for probe {other:?}"),
            )],
        }
    }

    fn per_service(
        &self,
        attacker: AttackerType,
        relevant: impl Fn(&ServiceSpec) -> bool,
        what: &str,
        eval: impl Fn(&ServiceSpec) -> Res,
    ) -> Vec<Res> {
        let services: Vec<_> = self
            .services_for(attacker)
            .into_iter()
            .filter(|s| relevant(s))
            .collect();
        if services.is_empty() {
            let surface = if attacker == AttackerType::Nearby {
                "onboarding"
            } else {
                "device"
            };
            return vec![Res::na(
                surface,
                format!("no {what} reachable by this attacker"),
            )];
        }
        services.into_iter().map(eval).collect()
    }

    fn channel_credential(&self) -> Res {
        let ch = &self.model.onboarding_channel;
        let surface = "onboarding";
        let problem = match (ch.kind, &ch.app_layer_key, &ch.credential) {
            (ChannelKind::None, _, _) => {
                return Res::na(surface, "device has no onboarding channel")
            }
            (_, Some(k), _) => self
                .credential_weak(k)
                .map(|why| format!("application-layer key: {why}")),
            (ChannelKind::OpenWifi, None, _) => Some("onboarding network is open".to_string()),
            (ChannelKind::BleJustWorks, None, _) => {
                Some("pairing uses Just Works without an authenticated key".into())
            }
            (_, None, None) => Some("onboarding channel has no credential".into()),
            (_, None, Some(c)) => self.credential_weak(c),
        };
        match problem {
            None => Res::pass(
                surface,
                "onboarding is protected by a strong per-device secret",
            ),
            Some(why) => Res::contributing(surface, why, bps(&["BP-DSP-02"])),
        }
    }

    fn link_encryption<'m>(
        &'m self,
        surface: &str,
        link: impl Fn(&'m super::model::CloudSpec) -> Option<&'m LinkSpec>,
        tc: &str,
    ) -> Res {
        let Some(l) = self.model.cloud.as_ref().and_then(link) else {
            return Res::na(surface, "link not examined");
        };
        match &l.tls {
            None => Res::primary(
                surface,
                "traffic is sent in plaintext",
                "cloud-traffic-unprotected",
                self.covers(tc),
            ),
            Some(t) if !t.certificate_validated => Res::primary(
                surface,
                format!(
                    "{} is used without certificate validation",
                    t.protocol_version
                ),
                "cloud-traffic-unprotected",
                self.covers(tc),
            ),
            Some(t) => Res::pass(
                surface,
                format!("{} with certificate validation", t.protocol_version),
            ),
        }
    }

    fn link_signing<'m>(
        &'m self,
        surface: &str,
        link: impl Fn(&'m super::model::CloudSpec) -> Option<&'m LinkSpec>,
        tc: &str,
    ) -> Res {
        let Some(l) = self.model.cloud.as_ref().and_then(link) else {
            return Res::na(surface, "link not examined");
        };
        if l.tls.as_ref().is_some_and(|t| t.payload_signed) {
            Res::pass(surface, "payloads are signed")
        } else {
            Res::observe(surface, "payloads are not signed", self.covers(tc))
        }
    }

    fn firmware(
        &self,
        pred: impl Fn(&super::model::FirmwareSpec) -> (bool, &'static str),
        tc: &str,
    ) -> Vec<Res> {
        let surface = if tc == "TC-FU-07" {
            "physical"
        } else {
            "firmware"
        };
        vec![match &self.model.firmware {
            None => Res::na(surface, "firmware not examined"),
            Some(f) => match pred(f) {
                (true, why) => Res::pass(surface, why),
                (false, why) => Res::observe(surface, format!("not met: {why}"), self.covers(tc)),
            },
        }]
    }

    fn physical(
        &self,
        pred: impl Fn(&super::model::PhysicalSpec) -> (bool, &'static str),
        tc: &str,
    ) -> Vec<Res> {
        vec![match &self.model.physical {
            None => Res::na("physical", "hardware not examined"),
            Some(p) => match pred(p) {
                (true, why) => Res::pass("physical", why),
                (false, why) => {
                    Res::observe("physical", format!("not met: {why}"), self.covers(tc))
                }
            },
        }]
    }

    fn os(
        &self,
        pred: impl Fn(&super::model::OsPostureSpec) -> (bool, &'static str),
        tc: &str,
    ) -> Vec<Res> {
        vec![match &self.model.os_posture {
            None => Res::na("os", "operating system not examined"),
            Some(o) => match pred(o) {
                (true, why) => Res::pass("os", why),
                (false, why) => Res::observe("os", format!("not met: {why}"), self.covers(tc)),
            },
        }]
    }

    fn debug_problem(&self, d: &DebugInterface) -> Option<String> {
        if !d.authenticated {
            let kind = match d.kind {
                DebugKind::Storage => "removable storage".to_string(),
                k => k.as_str().to_ascii_uppercase(),
            };
            return Some(format!(
                "{kind} interface is accessible without credentials"
            ));
        }
        d.credential.as_ref().and_then(|c| self.credential_weak(c))
    }

    fn debug_interfaces(&self) -> Vec<Res> {
        let Some(p) = &self.model.physical else {
            return vec![Res::na("physical", "hardware not examined")];
        };
        if p.debug_interfaces.is_empty() {
            return vec![Res::pass("physical", "no debug interface found")];
        }
        p.debug_interfaces
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let surface = p.debug_surface(i);
                if !d.active {
                    return Res::pass(surface, "interface is disabled");
                }
                match (self.debug_problem(d), d.read_only) {
                    (None, _) => Res::observe(
                        surface,
                        "active debug interface is protected by a strong credential",
                        bps(&["BP-HW-04"]),
                    ),
                    (Some(why), false) => Res::primary(
                        surface,
                        format!("{why}; it yields a root shell"),
                        "debug-shell",
                        bps(&["BP-HW-04", "BP-HW-05"]),
                    )
                    .shell(),
                    (Some(why), true) => Res::observe(
                        surface,
                        format!("{why}; it exposes a read-only console"),
                        bps(&["BP-HW-04"]),
                    )
                    .shell(),
                }
            })
            .collect()
    }

    fn debug_credentials(&self, tc: &str) -> Vec<Res> {
        let Some(p) = &self.model.physical else {
            return vec![Res::na("physical", "hardware not examined")];
        };
        let active: Vec<_> = p
            .debug_interfaces
            .iter()
            .enumerate()
            .filter(|(_, d)| d.active)
            .collect();
        if active.is_empty() {
            return vec![Res::na("physical", "no active debug interface")];
        }
        active
            .into_iter()
            .map(|(i, d)| {
                let surface = p.debug_surface(i);
                match self.debug_problem(d) {
                    None => Res::pass(surface, "debug credential is strong and unique"),
                    Some(why) => Res::contributing(surface, why, self.covers(tc)),
                }
            })
            .collect()
    }
}
