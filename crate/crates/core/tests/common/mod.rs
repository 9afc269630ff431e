//! Helpers shared by the property suites and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;

use iotsec_core::assessor::model::{
    AuthKind, ChannelKind, CredentialSpec, DeviceModel, PasswordResetSpec, TlsSpec,
};
use iotsec_core::assessor::{assess, bundled_model, AssessOptions, CheckOutcome};
use iotsec_core::catalog::{AttackerType, Catalog};
use iotsec_core::cvss::{
    base_score, AttackComplexity, AttackVector, CvssVector, Impact, PrivilegesRequired, Scope,
    UserInteraction,
};
use iotsec_core::decision::{Capability, CapabilityProfile};
use iotsec_core::findings::{Device, Finding, LedgerDocument};
use iotsec_core::BUNDLED_DEVICE_MODELS;

/// Reference round-up: smallest one-decimal number >= x, computed on
/// integers to avoid float noise.
pub fn oracle_roundup(x: f64) -> f64 {
    let i = (x * 100_000.0).round() as i64;
    if i % 10_000 == 0 {
        i as f64 / 100_000.0
    } else {
        ((i / 10_000) + 1) as f64 / 10.0
    }
}

pub fn oracle_score(vector: &str) -> f64 {
    let mut m = std::collections::HashMap::new();
    for part in vector.split('/') {
        let (k, v) = part.split_once(':').unwrap();
        m.insert(k, v);
    }
    let changed = m["S"] == "C";
    let av = match m["AV"] {
        "N" => 0.85,
        "A" => 0.62,
        "L" => 0.55,
        "P" => 0.2,
        x => panic!("AV {x}"),
    };
    let ac = if m["AC"] == "L" { 0.77 } else { 0.44 };
    let pr = match (m["PR"], changed) {
        ("N", _) => 0.85,
        ("L", false) => 0.62,
        ("L", true) => 0.68,
        ("H", false) => 0.27,
        ("H", true) => 0.5,
        x => panic!("PR {x:?}"),
    };
    let ui = if m["UI"] == "N" { 0.85 } else { 0.62 };
    let cia = |k: &str| match m[k] {
        "H" => 0.56,
        "L" => 0.22,
        _ => 0.0,
    };
    let iss: f64 = 1.0 - (1.0 - cia("C")) * (1.0 - cia("I")) * (1.0 - cia("A"));
    let impact = if changed {
        7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15)
    } else {
        6.42 * iss
    };
    let exploitability = 8.22 * av * ac * pr * ui;
    if impact <= 0.0 {
        return 0.0;
    }
    if changed {
        oracle_roundup(f64::min(1.08 * (impact + exploitability), 10.0))
    } else {
        oracle_roundup(f64::min(impact + exploitability, 10.0))
    }
}

pub const CASES: u32 = 1000;

pub fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

pub fn all_attackers() -> BTreeSet<AttackerType> {
    [
        AttackerType::Nearby,
        AttackerType::SameNetwork,
        AttackerType::Physical,
        AttackerType::ShellAccess,
    ]
    .into_iter()
    .collect()
}

pub fn strong_cred() -> CredentialSpec {
    CredentialSpec {
        value: "Zx9!kLm#4Tq2".into(),
        per_device_unique: true,
        user_changeable: true,
    }
}

pub fn weak_cred() -> CredentialSpec {
    CredentialSpec {
        value: "admin".into(),
        per_device_unique: false,
        user_changeable: false,
    }
}

pub fn good_tls() -> TlsSpec {
    TlsSpec {
        protocol_version: "TLS 1.3".into(),
        certificate_validated: true,
        pinned: true,
        payload_signed: true,
        partner_verified: true,
    }
}

pub fn weaken_tls(t: &mut TlsSpec, which: usize) {
    match which % 3 {
        0 => {
            t.certificate_validated = false;
            t.pinned = false;
        }
        1 => t.payload_signed = false,
        _ => t.partner_verified = false,
    }
}

pub const MOVES: usize = 27;

/// Moves one protection of `m` toward secure (`harden`) or insecure.
/// `i` picks the item or field the move applies to.
pub fn apply(m: &mut DeviceModel, mv: usize, i: usize, harden: bool) {
    let ns = m.services.len();
    let svc = if ns == 0 { None } else { Some(i % ns) };
    match mv {
        0 => {
            if let Some(k) = svc {
                m.services[k].auth_bypassable = !harden;
            }
        }
        1 => {
            if let Some(k) = svc {
                m.services[k].brute_force_guard = harden;
            }
        }
        2 => {
            if let Some(k) = svc {
                m.services[k].input_sanitized = harden;
            }
        }
        3 => {
            if let Some(k) = svc {
                let s = &mut m.services[k];
                if harden {
                    s.tls = Some(good_tls());
                } else if let Some(t) = &mut s.tls {
                    weaken_tls(t, i);
                }
            }
        }
        4 => {
            if let Some(k) = svc {
                let s = &mut m.services[k];
                if harden {
                    // Adding a login also exposes it to guessing, so a
                    // complete change includes throttling.
                    if s.auth == AuthKind::NoAuth {
                        s.auth = AuthKind::UserCredential;
                        s.brute_force_guard = true;
                    }
                    s.credential = Some(strong_cred());
                } else if s.credential.is_some() {
                    s.credential = Some(weak_cred());
                }
            }
        }
        5 => {
            if let Some(k) = svc {
                let s = &mut m.services[k];
                if !harden {
                    s.auth = AuthKind::NoAuth;
                    s.credential = None;
                }
            }
        }
        6 => m.onboarding_channel.terminated_after_onboarding = harden,
        7 => m.onboarding_channel.owner_bound = harden,
        8 => {
            let ch = &mut m.onboarding_channel;
            if ch.kind == ChannelKind::None {
                return;
            }
            if harden {
                ch.tls = Some(good_tls());
            } else if let Some(t) = &mut ch.tls {
                weaken_tls(t, i);
            }
        }
        9 => {
            let ch = &mut m.onboarding_channel;
            if ch.kind == ChannelKind::None {
                return;
            }
            ch.credential = Some(if harden { strong_cred() } else { weak_cred() });
        }
        10 => {
            let ch = &mut m.onboarding_channel;
            ch.kind = match (ch.kind, harden) {
                (ChannelKind::OpenWifi, true) => ChannelKind::Wpa2Wifi,
                (ChannelKind::BleJustWorks, true) => ChannelKind::BleSecurePairing,
                (ChannelKind::Wpa2Wifi, false) => ChannelKind::OpenWifi,
                (ChannelKind::BleSecurePairing, false) => ChannelKind::BleJustWorks,
                (k, _) => k,
            };
        }
        11 => {
            let ch = &mut m.onboarding_channel;
            if harden {
                if ch.kind != ChannelKind::None {
                    ch.app_layer_key = Some(strong_cred());
                }
            } else if ch.app_layer_key.is_some() {
                ch.app_layer_key = Some(weak_cred());
            }
        }
        12 => {
            if let Some(a) = &mut m.accounts {
                a.weakest_accepted_password = if harden { "Zx9!kLm#4Tq2" } else { "1234" }.into();
            }
        }
        13 => {
            if let Some(c) = &mut m.cloud {
                c.two_factor = Some(harden);
            }
        }
        14 => {
            if let Some(c) = &mut m.cloud {
                let p = c.password_reset.get_or_insert(PasswordResetSpec {
                    code_digits: 8,
                    rate_limited: true,
                });
                if harden {
                    p.code_digits = p.code_digits.max(8);
                    p.rate_limited = true;
                } else if i.is_multiple_of(2) {
                    p.code_digits = 4;
                } else {
                    p.rate_limited = false;
                }
            }
        }
        15 => {
            if let Some(c) = &mut m.cloud {
                c.user_enumeration = Some(!harden);
            }
        }
        16 | 17 => {
            if let Some(c) = &mut m.cloud {
                let link = if mv == 16 {
                    &mut c.app_link
                } else {
                    &mut c.device_link
                };
                if let Some(l) = link {
                    if harden {
                        l.tls = Some(good_tls());
                    } else if i % 4 == 3 {
                        l.tls = None;
                    } else if let Some(t) = &mut l.tls {
                        weaken_tls(t, i);
                    }
                }
            }
        }
        18 => {
            if let Some(f) = &mut m.firmware {
                match i % 8 {
                    0 => f.auto_update = harden,
                    1 => {
                        if harden {
                            f.channel_tls = Some(good_tls());
                        } else {
                            f.channel_tls = None;
                        }
                    }
                    2 => f.encrypted = harden,
                    3 => f.signed = harden,
                    4 => f.verified_before_apply = harden,
                    5 => f.hardcoded_credentials = !harden,
                    6 => f.rollback_prevented = harden,
                    _ => f.filesystem_encrypted = harden,
                }
            }
        }
        19 => {
            if let Some(p) = &mut m.physical {
                match i % 4 {
                    0 => p.tamper_evident_packaging = harden,
                    1 => p.pcb_tamper_protected = harden,
                    2 => p.security_chip = harden,
                    _ => p.factory_reset_wipes_credentials = harden,
                }
            }
        }
        20..=22 => {
            if let Some(p) = &mut m.physical {
                let n = p.debug_interfaces.len();
                if n == 0 {
                    return;
                }
                let d = &mut p.debug_interfaces[i % n];
                match mv {
                    20 => d.active = !harden,
                    21 => {
                        if harden {
                            d.authenticated = true;
                            d.credential = Some(strong_cred());
                        } else {
                            d.authenticated = false;
                            d.credential = None;
                        }
                    }
                    _ => d.read_only = harden,
                }
            }
        }
        23 => {
            if let Some(o) = &mut m.os_posture {
                match i % 7 {
                    0 => o.secure_boot = harden,
                    1 => o.credentials_hashed_industry_standard = harden,
                    2 => o.services_least_privilege = harden,
                    3 => o.root_fs_user_writable = !harden,
                    4 => o.firewall = harden,
                    5 => o.logs_sensitive_data = !harden,
                    _ => o.breach_alerts = harden,
                }
            }
        }
        24 => {
            if m.dos_resilient.is_some() {
                m.dos_resilient = Some(harden);
            }
        }
        25 => {
            if m.functions_offline.is_some() {
                m.functions_offline = Some(harden);
            }
        }
        26 => {
            if let Some(k) = svc {
                if harden {
                    let s = m.services.remove(k);
                    m.vector_overrides.remove(&s.surface());
                } else {
                    m.services[k].necessary_for_function = false;
                }
            }
        }
        _ => unreachable!(),
    }
}

pub fn harden_fully(m: &mut DeviceModel) {
    for _ in 0..2 {
        for mv in 0..MOVES {
            if mv == 26 {
                continue;
            }
            for i in 0..16 {
                apply(m, mv, i, true);
            }
        }
    }
    for s in &mut m.services {
        s.necessary_for_function = true;
    }
    if let Some(ig) = &mut m.device.ig {
        if ig.open_source_hardcoded_credentials.is_some() {
            ig.open_source_hardcoded_credentials = Some(false);
        }
    }
}

pub fn failing_keys(
    outcomes: &[CheckOutcome],
) -> BTreeSet<(Option<u8>, String, Option<String>, String)> {
    outcomes
        .iter()
        .filter(|o| o.is_fail())
        .map(|o| {
            let (s, k, t, f) = o.key();
            (s, k.to_string(), t.map(str::to_string), f.to_string())
        })
        .collect()
}

pub fn run(m: &DeviceModel, c: &Catalog) -> Vec<CheckOutcome> {
    assess(m, c, &all_attackers(), &AssessOptions::default()).expect("model stays valid")
}

pub fn device_index() -> impl Strategy<Value = usize> {
    0..BUNDLED_DEVICE_MODELS.len()
}

pub fn bundled(i: usize) -> DeviceModel {
    bundled_model(BUNDLED_DEVICE_MODELS[i].0).unwrap()
}

pub fn any_vector() -> impl Strategy<Value = CvssVector> {
    (
        0usize..4,
        0usize..2,
        0usize..3,
        0usize..2,
        0usize..2,
        0usize..3,
        0usize..3,
        0usize..3,
    )
        .prop_map(|(av, ac, pr, ui, s, c, i, a)| CvssVector {
            attack_vector: AttackVector::ALL[av],
            attack_complexity: AttackComplexity::ALL[ac],
            privileges_required: PrivilegesRequired::ALL[pr],
            user_interaction: UserInteraction::ALL[ui],
            scope: Scope::ALL[s],
            confidentiality: Impact::ALL[c],
            integrity: Impact::ALL[i],
            availability: Impact::ALL[a],
        })
}

/// Position of each metric value on a least-to-most-severe scale.
pub fn worsen(v: &CvssVector, metric: usize) -> Option<CvssVector> {
    fn step<T: Copy + PartialEq>(order: &[T], x: T) -> Option<T> {
        let p = order.iter().position(|y| *y == x)?;
        order.get(p + 1).copied()
    }
    let mut w = *v;
    match metric {
        0 => {
            w.attack_vector = step(
                &[
                    AttackVector::Physical,
                    AttackVector::Local,
                    AttackVector::Adjacent,
                    AttackVector::Network,
                ],
                v.attack_vector,
            )?
        }
        1 => {
            w.attack_complexity = step(
                &[AttackComplexity::High, AttackComplexity::Low],
                v.attack_complexity,
            )?
        }
        2 => {
            w.privileges_required = step(
                &[
                    PrivilegesRequired::High,
                    PrivilegesRequired::Low,
                    PrivilegesRequired::None,
                ],
                v.privileges_required,
            )?
        }
        3 => {
            w.user_interaction = step(
                &[UserInteraction::Required, UserInteraction::None],
                v.user_interaction,
            )?
        }
        m => {
            let order = [Impact::None, Impact::Low, Impact::High];
            let slot = match m {
                4 => &mut w.confidentiality,
                5 => &mut w.integrity,
                _ => &mut w.availability,
            };
            *slot = step(&order, *slot)?;
        }
    }
    Some(w)
}

pub const POOL: [&str; 8] = [
    "BP-DSP-02",
    "BP-CRYPTO-01",
    "BP-HW-04",
    "BP-HW-05",
    "BP-SIOH-01",
    "BP-SIS-07",
    "BP-LOG-03",
    "BP-STC-05",
];

pub fn random_ledger() -> impl Strategy<Value = LedgerDocument> {
    prop::collection::vec(
        (
            0usize..3,
            any_vector(),
            prop::sample::subsequence(POOL.to_vec(), 1..4),
            prop::collection::vec(1u8..=7, 0..3),
        ),
        0..12,
    )
    .prop_map(|rows| {
        let mut doc = LedgerDocument::new();
        for d in 0..3 {
            doc.devices.push(Device {
                id: format!("dev-{d}"),
                display_name: format!("Device {d}"),
                device_class: Default::default(),
                price_tier: Default::default(),
                capabilities: CapabilityProfile::default(),
                ig: None,
            });
        }
        for (n, (d, v, bps, scenarios)) in rows.into_iter().enumerate() {
            doc.findings.push(Finding {
                id: format!("f-{n:02}"),
                device: format!("dev-{d}"),
                title: format!("finding {n}"),
                cvss: v,
                score: base_score(&v).value,
                test_cases: Vec::new(),
                best_practices: bps.into_iter().map(str::to_string).collect(),
                scenarios,
                notes: String::new(),
            });
        }
        doc
    })
}

pub fn any_profile() -> impl Strategy<Value = CapabilityProfile> {
    prop::collection::vec(any::<bool>(), 7).prop_map(|bits| {
        let mut p = CapabilityProfile::default();
        for (c, b) in Capability::ALL.into_iter().zip(bits) {
            p.set(c, b);
        }
        p
    })
}
