//! Base scores checked against a second, independently written transcription
//! of the v3.1 equations and against the `cvss` crate.

mod common;

use std::collections::HashSet;

use iotsec_core::cvss::{
    base_score, classify_severity, parse_vector, CvssError, CvssVector, Severity,
};

use common::oracle_score;

#[test]
fn vector_space_has_2592_distinct_members() {
    let all: HashSet<String> = CvssVector::all().map(|v| v.to_string()).collect();
    assert_eq!(all.len(), 2592);
}

#[test]
fn matches_independent_transcription_on_every_vector() {
    let mut mismatches = Vec::new();
    for v in CvssVector::all() {
        let text = v.to_string();
        let want = oracle_score(&text);
        let got = base_score(&v).value.value();
        if (got * 10.0).round() as i64 != (want * 10.0).round() as i64 {
            mismatches.push(format!("{text}: got {got}, oracle {want}"));
        }
    }
    assert!(
        mismatches.is_empty(),
        "{} mismatches:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

#[test]
fn matches_cvss_crate_on_every_vector() {
    for v in CvssVector::all() {
        let text = v.to_string();
        let other: cvss::v3::Base = format!("CVSS:3.1/{text}").parse().unwrap();
        let want = other.score().value();
        let got = base_score(&v).value.value();
        assert_eq!((got * 10.0).round(), (want * 10.0).round(), "{text}");
    }
}

/// Vectors and scores of the reference findings whose printed score agrees
/// with the equations.
const GOLDEN: [(&str, &str); 15] = [
    ("AV:A/AC:H/PR:N/UI:R/S:U/C:L/I:N/A:L", "3.7"),
    ("AV:P/AC:H/PR:N/UI:N/S:U/C:L/I:N/A:N", "2.0"),
    ("AV:A/AC:L/PR:N/UI:R/S:U/C:N/I:N/A:H", "5.7"),
    ("AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:H", "7.4"),
    ("AV:A/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H", "8.3"),
    ("AV:A/AC:L/PR:N/UI:N/S:U/C:H/I:N/A:N", "6.5"),
    ("AV:A/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:N", "5.3"),
    ("AV:P/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H", "7.1"),
    ("AV:P/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H", "7.1"),
    ("AV:P/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:N", "4.2"),
    ("AV:A/AC:H/PR:N/UI:R/S:U/C:L/I:N/A:L", "3.7"),
    ("AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:N", "5.9"),
    ("AV:A/AC:L/PR:N/UI:R/S:U/C:H/I:N/A:N", "5.7"),
    ("AV:A/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:N", "5.3"),
    ("AV:P/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H", "7.1"),
];

#[test]
fn golden_reference_scores() {
    for (vector, score) in GOLDEN {
        let v: CvssVector = vector.parse().unwrap();
        assert_eq!(base_score(&v).value.to_string(), score, "{vector}");
    }
}

#[test]
fn adjacent_low_complexity_scope_changed_full_impact_is_nine_six() {
    // Printed as 9.3 in the source table; both oracles give 9.6.
    let text = "AV:A/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H";
    let v: CvssVector = text.parse().unwrap();
    assert_eq!(base_score(&v).value.to_string(), "9.6");
    assert_eq!(oracle_score(text), 9.6);
}

#[test]
fn network_full_impact_is_nine_eight() {
    let v: CvssVector = "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H".parse().unwrap();
    let s = base_score(&v);
    assert_eq!(s.value.to_string(), "9.8");
    assert_eq!(s.severity, Severity::Critical);
}

#[test]
fn no_impact_scores_zero() {
    let v: CvssVector = "AV:N/AC:L/PR:N/UI:N/S:C/C:N/I:N/A:N".parse().unwrap();
    let s = base_score(&v);
    assert_eq!(s.value.tenths(), 0);
    assert_eq!(s.severity, Severity::NoneBand);
}

#[test]
fn severity_band_edges() {
    let cases = [
        (0.0, Severity::NoneBand),
        (0.1, Severity::Low),
        (3.9, Severity::Low),
        (4.0, Severity::Medium),
        (6.9, Severity::Medium),
        (7.0, Severity::High),
        (8.9, Severity::High),
        (9.0, Severity::Critical),
        (10.0, Severity::Critical),
    ];
    for (x, band) in cases {
        assert_eq!(classify_severity(x).unwrap(), band, "{x}");
    }
    assert!(matches!(
        classify_severity(10.1),
        Err(CvssError::OutOfRange(_))
    ));
    assert!(classify_severity(-0.1).is_err());
    assert!(classify_severity(f64::NAN).is_err());
}

#[test]
fn parse_errors() {
    for bad in [
        "AV:Q/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
        "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H",
        "AV:N/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
        "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
        "",
        "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H/",
    ] {
        assert!(parse_vector(bad).is_err(), "{bad:?} should fail");
    }
    assert!(matches!(
        parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H/E:F"),
        Err(CvssError::UnsupportedMetric { .. })
    ));
}

#[test]
fn prefix_and_order_tolerated() {
    let p = parse_vector("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H").unwrap();
    assert!(p.had_prefix);
    assert!(!p.out_of_order);
    let q = parse_vector("AC:L/AV:N/PR:N/UI:N/S:U/C:H/I:H/A:H").unwrap();
    assert!(q.out_of_order);
    assert_eq!(q.vector, p.vector);
}
