//! CVSS v3.1 base metrics: vector parsing, base score and severity bands.
//!
//! Only the base metric group is supported. Temporal and environmental
//! metrics are rejected with [`CvssError::UnsupportedMetric`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CvssError {
    #[error("malformed vector {input:?}: {reason}")]
    MalformedVector { input: String, reason: String },
    #[error("unsupported metric {metric:?} in {input:?}: only base metrics are scored")]
    UnsupportedMetric { input: String, metric: String },
    #[error("score {0} is outside [0.0, 10.0]")]
    OutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackVector {
    Network,
    Adjacent,
    Local,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackComplexity {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrivilegesRequired {
    None,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UserInteraction {
    None,
    Required,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Unchanged,
    Changed,
}

/// Confidentiality, integrity or availability impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Impact {
    None,
    Low,
    High,
}

impl AttackVector {
    pub const ALL: [Self; 4] = [Self::Network, Self::Adjacent, Self::Local, Self::Physical];

    fn weight(self) -> f64 {
        match self {
            Self::Network => 0.85,
            Self::Adjacent => 0.62,
            Self::Local => 0.55,
            Self::Physical => 0.2,
        }
    }

    fn letter(self) -> char {
        match self {
            Self::Network => 'N',
            Self::Adjacent => 'A',
            Self::Local => 'L',
            Self::Physical => 'P',
        }
    }

    fn from_letter(c: &str) -> Option<Self> {
        Some(match c {
            "N" => Self::Network,
            "A" => Self::Adjacent,
            "L" => Self::Local,
            "P" => Self::Physical,
            _ => return None,
        })
    }
}

impl AttackComplexity {
    pub const ALL: [Self; 2] = [Self::Low, Self::High];

    fn weight(self) -> f64 {
        match self {
            Self::Low => 0.77,
            Self::High => 0.44,
        }
    }

    fn letter(self) -> char {
        match self {
            Self::Low => 'L',
            Self::High => 'H',
        }
    }

    fn from_letter(c: &str) -> Option<Self> {
        Some(match c {
            "L" => Self::Low,
            "H" => Self::High,
            _ => return None,
        })
    }
}

impl PrivilegesRequired {
    pub const ALL: [Self; 3] = [Self::None, Self::Low, Self::High];

    fn weight(self, scope: Scope) -> f64 {
        match (self, scope) {
            (Self::None, _) => 0.85,
            (Self::Low, Scope::Unchanged) => 0.62,
            (Self::Low, Scope::Changed) => 0.68,
            (Self::High, Scope::Unchanged) => 0.27,
            (Self::High, Scope::Changed) => 0.5,
        }
    }

    fn letter(self) -> char {
        match self {
            Self::None => 'N',
            Self::Low => 'L',
            Self::High => 'H',
        }
    }

    fn from_letter(c: &str) -> Option<Self> {
        Some(match c {
            "N" => Self::None,
            "L" => Self::Low,
            "H" => Self::High,
            _ => return None,
        })
    }
}

impl UserInteraction {
    pub const ALL: [Self; 2] = [Self::None, Self::Required];

    fn weight(self) -> f64 {
        match self {
            Self::None => 0.85,
            Self::Required => 0.62,
        }
    }

    fn letter(self) -> char {
        match self {
            Self::None => 'N',
            Self::Required => 'R',
        }
    }

    fn from_letter(c: &str) -> Option<Self> {
        Some(match c {
            "N" => Self::None,
            "R" => Self::Required,
            _ => return None,
        })
    }
}

impl Scope {
    pub const ALL: [Self; 2] = [Self::Unchanged, Self::Changed];

    fn letter(self) -> char {
        match self {
            Self::Unchanged => 'U',
            Self::Changed => 'C',
        }
    }

    fn from_letter(c: &str) -> Option<Self> {
        Some(match c {
            "U" => Self::Unchanged,
            "C" => Self::Changed,
            _ => return None,
        })
    }
}

impl Impact {
    pub const ALL: [Self; 3] = [Self::None, Self::Low, Self::High];

    fn weight(self) -> f64 {
        match self {
            Self::None => 0.0,
            Self::Low => 0.22,
            Self::High => 0.56,
        }
    }

    fn letter(self) -> char {
        match self {
            Self::None => 'N',
            Self::Low => 'L',
            Self::High => 'H',
        }
    }

    fn from_letter(c: &str) -> Option<Self> {
        Some(match c {
            "N" => Self::None,
            "L" => Self::Low,
            "H" => Self::High,
            _ => return None,
        })
    }
}

/// The eight CVSS v3.1 base metrics of one vulnerability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CvssVector {
    pub attack_vector: AttackVector,
    pub attack_complexity: AttackComplexity,
    pub privileges_required: PrivilegesRequired,
    pub user_interaction: UserInteraction,
    pub scope: Scope,
    pub confidentiality: Impact,
    pub integrity: Impact,
    pub availability: Impact,
}

/// Result of [`parse_vector`]: the vector plus non-fatal diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParsedVector {
    pub vector: CvssVector,
    /// Metrics were present but not in canonical `AV/AC/PR/UI/S/C/I/A` order.
    pub out_of_order: bool,
    /// The input carried a `CVSS:3.1/` prefix.
    pub had_prefix: bool,
}

const CANONICAL_ORDER: [&str; 8] = ["AV", "AC", "PR", "UI", "S", "C", "I", "A"];

const NON_BASE_METRICS: [&str; 14] = [
    "E", "RL", "RC", "CR", "IR", "AR", "MAV", "MAC", "MPR", "MUI", "MS", "MC", "MI", "MA",
];

/// Parses a base vector such as `AV:A/AC:H/PR:N/UI:R/S:U/C:L/I:N/A:L`.
///
/// An optional `CVSS:3.1/` prefix is accepted. Out-of-order metrics are
/// tolerated and flagged in [`ParsedVector::out_of_order`].
pub fn parse_vector(text: &str) -> Result<ParsedVector, CvssError> {
    let malformed = |reason: String| CvssError::MalformedVector {
        input: text.to_string(),
        reason,
    };

    let trimmed = text.trim();
    let (body, had_prefix) = match trimmed.strip_prefix("CVSS:") {
        Some(rest) => {
            let (version, body) = rest
                .split_once('/')
                .ok_or_else(|| malformed("prefix without metrics".into()))?;
            if version != "3.1" {
                return Err(malformed(format!("unsupported CVSS version {version:?}")));
            }
            (body, true)
        }
        None => (trimmed, false),
    };
    if body.is_empty() {
        return Err(malformed("empty vector".into()));
    }

    let mut slots: [Option<&str>; 8] = [None; 8];
    let mut seen_order = Vec::with_capacity(8);
    for component in body.split('/') {
        let (metric, value) = component
            .split_once(':')
            .ok_or_else(|| malformed(format!("component {component:?} is not METRIC:VALUE")))?;
        let Some(idx) = CANONICAL_ORDER.iter().position(|m| *m == metric) else {
            if NON_BASE_METRICS.contains(&metric) {
                return Err(CvssError::UnsupportedMetric {
                    input: text.to_string(),
                    metric: metric.to_string(),
                });
            }
            return Err(malformed(format!("unknown metric {metric:?}")));
        };
        if slots[idx].is_some() {
            return Err(malformed(format!("duplicate metric {metric:?}")));
        }
        slots[idx] = Some(value);
        seen_order.push(idx);
    }

    let value_of = |idx: usize| -> Result<&str, CvssError> {
        slots[idx].ok_or_else(|| malformed(format!("missing metric {:?}", CANONICAL_ORDER[idx])))
    };
    let bad = |idx: usize, v: &str| {
        malformed(format!(
            "illegal value {v:?} for metric {:?}",
            CANONICAL_ORDER[idx]
        ))
    };

    macro_rules! metric {
        ($idx:expr, $ty:ty) => {{
            let v = value_of($idx)?;
            <$ty>::from_letter(v).ok_or_else(|| bad($idx, v))?
        }};
    }

    let vector = CvssVector {
        attack_vector: metric!(0, AttackVector),
        attack_complexity: metric!(1, AttackComplexity),
        privileges_required: metric!(2, PrivilegesRequired),
        user_interaction: metric!(3, UserInteraction),
        scope: metric!(4, Scope),
        confidentiality: metric!(5, Impact),
        integrity: metric!(6, Impact),
        availability: metric!(7, Impact),
    };
    let out_of_order = seen_order.windows(2).any(|w| w[0] > w[1]);
    Ok(ParsedVector {
        vector,
        out_of_order,
        had_prefix,
    })
}

impl CvssVector {
    /// Every legal base vector (2592 of them), in a fixed order.
    pub fn all() -> impl Iterator<Item = CvssVector> {
        let mut out = Vec::with_capacity(2592);
        for attack_vector in AttackVector::ALL {
            for attack_complexity in AttackComplexity::ALL {
                for privileges_required in PrivilegesRequired::ALL {
                    for user_interaction in UserInteraction::ALL {
                        for scope in Scope::ALL {
                            for confidentiality in Impact::ALL {
                                for integrity in Impact::ALL {
                                    for availability in Impact::ALL {
                                        out.push(CvssVector {
                                            attack_vector,
                                            attack_complexity,
                                            privileges_required,
                                            user_interaction,
                                            scope,
                                            confidentiality,
                                            integrity,
                                            availability,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out.into_iter()
    }

    pub fn base_score(&self) -> BaseScore {
        base_score(self)
    }
}

impl fmt::Display for CvssVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AV:{}/AC:{}/PR:{}/UI:{}/S:{}/C:{}/I:{}/A:{}",
            self.attack_vector.letter(),
            self.attack_complexity.letter(),
            self.privileges_required.letter(),
            self.user_interaction.letter(),
            self.scope.letter(),
            self.confidentiality.letter(),
            self.integrity.letter(),
            self.availability.letter(),
        )
    }
}

impl FromStr for CvssVector {
    type Err = CvssError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_vector(s).map(|p| p.vector)
    }
}

impl Serialize for CvssVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CvssVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A score with exactly one fractional digit, stored as integer tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Score(u8);

impl Score {
    pub const ZERO: Score = Score(0);
    pub const MAX: Score = Score(100);

    pub fn from_tenths(tenths: u8) -> Option<Score> {
        (tenths <= 100).then_some(Score(tenths))
    }

    /// Accepts only values in [0, 10] that are (within float noise) multiples of 0.1.
    pub fn from_f64(value: f64) -> Option<Score> {
        if !(0.0..=10.0).contains(&value) {
            return None;
        }
        let tenths = (value * 10.0).round();
        ((value * 10.0 - tenths).abs() < 1e-6).then_some(Score(tenths as u8))
    }

    pub fn tenths(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    pub fn severity(self) -> Severity {
        Severity::from_tenths(self.0)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Score::from_f64(v).ok_or_else(|| {
            serde::de::Error::custom(format!("{v} is not a one-digit score in [0, 10]"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    NoneBand,
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub const ALL: [Severity; 5] = [
        Severity::NoneBand,
        Severity::Low,
        Severity::Medium,
        Severity::High,
        Severity::Critical,
    ];

    fn from_tenths(t: u8) -> Self {
        match t {
            0 => Self::NoneBand,
            1..=39 => Self::Low,
            40..=69 => Self::Medium,
            70..=89 => Self::High,
            _ => Self::Critical,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NoneBand => "None",
            Self::Low => "Low",
            Self::Medium => "Medium",
            Self::High => "High",
            Self::Critical => "Critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a score to its band. Scores between printed bands (e.g. 3.95) fall
/// into the band whose lower bound they have reached.
pub fn classify_severity(score: f64) -> Result<Severity, CvssError> {
    if !(0.0..=10.0).contains(&score) {
        return Err(CvssError::OutOfRange(score));
    }
    Ok(if score == 0.0 {
        Severity::NoneBand
    } else if score < 4.0 {
        Severity::Low
    } else if score < 7.0 {
        Severity::Medium
    } else if score < 9.0 {
        Severity::High
    } else {
        Severity::Critical
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseScore {
    pub value: Score,
    pub severity: Severity,
}

impl fmt::Display for BaseScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.severity)
    }
}

fn impact_subscore(v: &CvssVector) -> f64 {
    let iss = 1.0
        - (1.0 - v.confidentiality.weight())
            * (1.0 - v.integrity.weight())
            * (1.0 - v.availability.weight());
    match v.scope {
        Scope::Unchanged => 6.42 * iss,
        Scope::Changed => 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15),
    }
}

fn exploitability_subscore(v: &CvssVector) -> f64 {
    8.22 * v.attack_vector.weight()
        * v.attack_complexity.weight()
        * v.privileges_required.weight(v.scope)
        * v.user_interaction.weight()
}

/// The base score before the final round-up, capped at 10.
pub fn raw_base_score(v: &CvssVector) -> f64 {
    let impact = impact_subscore(v);
    if impact <= 0.0 {
        return 0.0;
    }
    let sum = impact + exploitability_subscore(v);
    match v.scope {
        Scope::Unchanged => sum.min(10.0),
        Scope::Changed => (1.08 * sum).min(10.0),
    }
}

/// Smallest one-digit decimal ≥ `x`, computed on an integer grid of 1e-5 so
/// float representation error (e.g. 4.000000000000001) does not bump a value
/// up a whole tenth.
fn roundup_tenths(x: f64) -> u8 {
    let scaled = (x * 100_000.0) as i64;
    let tenths = if scaled % 10_000 == 0 {
        scaled / 10_000
    } else {
        scaled / 10_000 + 1
    };
    tenths.clamp(0, 100) as u8
}

pub fn base_score(v: &CvssVector) -> BaseScore {
    let raw = raw_base_score(v);
    let value = Score(if raw <= 0.0 { 0 } else { roundup_tenths(raw) });
    BaseScore {
        value,
        severity: value.severity(),
    }
}
