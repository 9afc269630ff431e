//! Per-best-practice statistics over a findings ledger: how often a BP is
//! cited and the mean CVSS score of the findings citing it.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::catalog::Catalog;
use crate::cvss::{raw_base_score, Score};
use crate::findings::{Finding, Ledger};

/// Threshold for the high-average flag (7.0, in tenths).
pub const HIGH_AVERAGE_TENTHS: u8 = 70;

/// Which per-finding score is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreBasis {
    /// The rounded one-digit base score.
    #[default]
    Printed,
    /// The formula output before the final round-up.
    Raw,
}

/// How `bps_for_scenario` computes statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScenarioStatistics {
    /// Select the BPs cited by findings matched to the scenario, but report
    /// their occurrence and average over the whole ledger.
    #[default]
    Global,
    /// Aggregate only over the findings matched to the scenario.
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RankOptions {
    pub basis: ScoreBasis,
    pub scenario_statistics: ScenarioStatistics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpRanking {
    pub bp: String,
    pub occurrence: usize,
    /// Mean score rounded half away from zero to one digit.
    pub average_score: Score,
    /// Unrounded mean, for sensitivity analysis.
    pub mean: f64,
    pub high_flag: bool,
    pub contributing_findings: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankingError {
    #[error("unknown scenario {0}")]
    UnknownScenario(u8),
}

/// Rounds `sum / count` (non-negative integers, count > 0) half away from zero.
fn mean_tenths(sum: u32, count: u32) -> u8 {
    ((2 * sum + count) / (2 * count)) as u8
}

fn rank_findings<'a>(
    findings: impl IntoIterator<Item = &'a Finding>,
    basis: ScoreBasis,
) -> Vec<BpRanking> {
    let mut groups: BTreeMap<&str, Vec<&Finding>> = BTreeMap::new();
    for f in findings {
        let mut seen = HashSet::new();
        for bp in &f.best_practices {
            if seen.insert(bp.as_str()) {
                groups.entry(bp.as_str()).or_default().push(f);
            }
        }
    }

    let mut out: Vec<BpRanking> = groups
        .into_iter()
        .map(|(bp, mut fs)| {
            fs.sort_by(|a, b| a.id.cmp(&b.id));
            let n = fs.len();
            let (average_score, mean) = match basis {
                ScoreBasis::Printed => {
                    let sum: u32 = fs.iter().map(|f| u32::from(f.score.tenths())).sum();
                    let avg = Score::from_tenths(mean_tenths(sum, n as u32))
                        .expect("mean of scores is a score");
                    (avg, f64::from(sum) / 10.0 / n as f64)
                }
                ScoreBasis::Raw => {
                    let mean = fs.iter().map(|f| raw_base_score(&f.cvss)).sum::<f64>() / n as f64;
                    let tenths = (mean * 10.0).round().clamp(0.0, 100.0) as u8;
                    (Score::from_tenths(tenths).expect("clamped"), mean)
                }
            };
            BpRanking {
                bp: bp.to_string(),
                occurrence: n,
                average_score,
                mean,
                high_flag: average_score.tenths() >= HIGH_AVERAGE_TENTHS,
                contributing_findings: fs.iter().map(|f| f.id.clone()).collect(),
            }
        })
        .collect();
    sort_rankings(&mut out);
    out
}

/// Occurrence descending, then average descending, then BP id ascending.
pub fn sort_rankings(rows: &mut [BpRanking]) {
    rows.sort_by(|a, b| {
        b.occurrence
            .cmp(&a.occurrence)
            .then_with(|| b.average_score.cmp(&a.average_score))
            .then_with(|| a.bp.cmp(&b.bp))
    });
}

/// One row per BP cited by at least one finding.
pub fn rank_bps(ledger: &Ledger, opts: RankOptions) -> Vec<BpRanking> {
    rank_findings(ledger.findings(), opts.basis)
}

/// Findings whose triggering test cases include one of the scenario's TCs.
pub fn findings_for_scenario<'a>(
    ledger: &'a Ledger,
    catalog: &Catalog,
    scenario: u8,
) -> Result<Vec<&'a Finding>, RankingError> {
    let s = catalog
        .scenario(scenario)
        .ok_or(RankingError::UnknownScenario(scenario))?;
    let tcs: HashSet<&str> = s.test_case_ids().into_iter().collect();
    Ok(ledger
        .findings()
        .iter()
        .filter(|f| f.test_cases.iter().any(|t| tcs.contains(t.as_str())))
        .collect())
}

pub fn bps_for_scenario(
    ledger: &Ledger,
    catalog: &Catalog,
    scenario: u8,
    opts: RankOptions,
) -> Result<Vec<BpRanking>, RankingError> {
    let matched = findings_for_scenario(ledger, catalog, scenario)?;
    Ok(match opts.scenario_statistics {
        ScenarioStatistics::Restricted => rank_findings(matched, opts.basis),
        ScenarioStatistics::Global => {
            let selected: HashSet<&str> = matched
                .iter()
                .flat_map(|f| f.best_practices.iter().map(String::as_str))
                .collect();
            rank_bps(ledger, opts)
                .into_iter()
                .filter(|r| selected.contains(r.bp.as_str()))
                .collect()
        }
    })
}
