//! Text renderings for the CLI: aligned tables, Markdown and tab-separated
//! machine output.
//!
//! Every machine output starts with a `# iotsec machine v1 <kind>` line,
//! followed by a header line and one record per line.

use std::fmt::Write as _;

use crate::assessor::CheckOutcome;
use crate::catalog::Catalog;
use crate::decision::DecisionGraph;
use crate::findings::{Ledger, LedgerError, Phase};
use crate::ranking::{rank_bps, BpRanking, RankOptions};

pub const MACHINE_SCHEMA: &str = "# iotsec machine v1";

fn machine_header(kind: &str, columns: &[&str]) -> String {
    format!("{MACHINE_SCHEMA} {kind}\n{}\n", columns.join("\t"))
}

/// Tabs and line breaks would break the record structure.
fn field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn label<'a>(catalog: &'a Catalog, bp: &'a str) -> &'a str {
    catalog
        .best_practice(bp)
        .map(|b| b.label.as_str())
        .unwrap_or("")
}

pub fn rank_table(rows: &[BpRanking], catalog: &Catalog) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{:<14} {:>3}  {:>4}{}  {}",
            r.bp,
            r.occurrence,
            r.average_score,
            if r.high_flag { " *" } else { "  " },
            label(catalog, &r.bp)
        );
    }
    out
}

pub fn rank_machine(rows: &[BpRanking]) -> String {
    let mut out = machine_header(
        "rank",
        &["bp", "occurrence", "average", "mean", "high", "findings"],
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{}\t{}",
            r.bp,
            r.occurrence,
            r.average_score,
            r.mean,
            r.high_flag,
            r.contributing_findings.join(",")
        );
    }
    out
}

fn scenario_heading(catalog: &Catalog, n: u8) -> String {
    match catalog.scenario(n) {
        Some(s) => format!("Scenario {n} ({}): {}", s.attacker.name(), s.title),
        None => format!("Scenario {n}"),
    }
}

pub fn graph_tree(graph: &DecisionGraph, catalog: &Catalog, name: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(n) = name {
        let _ = writeln!(out, "profile {n}");
    }
    let caps: Vec<&str> = graph.profile.enabled().iter().map(|c| c.as_str()).collect();
    let _ = writeln!(
        out,
        "capabilities: {}",
        if caps.is_empty() {
            "(none)".to_string()
        } else {
            caps.join(", ")
        }
    );
    if graph.relevant_scenarios.is_empty() {
        let _ = writeln!(out, "  no relevant scenarios");
        return out;
    }
    for n in &graph.relevant_scenarios {
        let _ = writeln!(out, "  {}", scenario_heading(catalog, *n));
        let rows = &graph.per_scenario_bps[n];
        if rows.is_empty() {
            let _ = writeln!(out, "    (no findings cite this scenario's test cases)");
        }
        for r in rows {
            let _ = writeln!(
                out,
                "    {:<14} {:>3}  {:>4}{}  {}",
                r.bp,
                r.occurrence,
                r.average_score,
                if r.high_flag { " *" } else { "  " },
                label(catalog, &r.bp)
            );
        }
    }
    out
}

pub fn graph_machine(graph: &DecisionGraph) -> String {
    let mut out = machine_header(
        "graph",
        &["scenario", "bp", "occurrence", "average", "high"],
    );
    for (n, rows) in &graph.per_scenario_bps {
        // Relevant scenarios without cited BPs still get a row.
        if rows.is_empty() {
            let _ = writeln!(out, "{n}\t-\t0\t-\tfalse");
        }
        for r in rows {
            let _ = writeln!(
                out,
                "{n}\t{}\t{}\t{}\t{}",
                r.bp, r.occurrence, r.average_score, r.high_flag
            );
        }
    }
    out
}

/// Edge list: capability → scenario and scenario → best practice.
pub fn graph_dot_like(graph: &DecisionGraph, catalog: &Catalog) -> String {
    let mut out = String::from("graph {\n");
    let rules = catalog.decision_rules();
    for rule in &rules.rules {
        if !rule.requires.iter().all(|c| graph.profile.has(*c)) {
            continue;
        }
        let from: Vec<&str> = rule.requires.iter().map(|c| c.as_str()).collect();
        for s in &rule.scenarios {
            let _ = writeln!(out, "  {} -> scenario_{s};", from.join("+"));
        }
    }
    if graph.shell_access_included {
        let _ = writeln!(out, "  shell_yield -> scenario_{};", rules.shell_scenario);
    }
    for (n, rows) in &graph.per_scenario_bps {
        for r in rows {
            let _ = writeln!(
                out,
                "  scenario_{n} -> \"{}\" [occurrence={}, average={}];",
                r.bp, r.occurrence, r.average_score
            );
        }
    }
    out.push_str("}\n");
    out
}

pub fn outcomes_machine(outcomes: &[CheckOutcome]) -> String {
    let mut out = machine_header(
        "outcomes",
        &[
            "phase",
            "scenario",
            "check",
            "test_case",
            "surface",
            "verdict",
            "role",
            "bps",
            "rationale",
        ],
    );
    for o in outcomes {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            o.phase.title(),
            o.scenario
                .map(|s| s.to_string())
                .unwrap_or_else(|| "-".into()),
            o.check_key,
            o.test_case.as_deref().unwrap_or("-"),
            o.surface,
            o.verdict.as_str(),
            if o.is_fail() {
                format!("{:?}", o.role).to_lowercase()
            } else {
                "-".into()
            },
            o.violated_bps.join(","),
            field(&o.rationale)
        );
    }
    out
}

fn selected_devices<'a>(
    ledger: &'a Ledger,
    device: Option<&'a str>,
) -> Result<Vec<&'a str>, LedgerError> {
    match device {
        Some(id) => {
            ledger.findings_by_device(id)?;
            Ok(vec![ledger.device(id).map(|d| d.id.as_str()).unwrap_or(id)])
        }
        None => Ok(ledger.devices().iter().map(|d| d.id.as_str()).collect()),
    }
}

/// Findings, ranking, per-phase observations and severity summary.
/// With `device`, only that device's findings and observations.
pub fn workspace_markdown(
    ledger: &Ledger,
    catalog: &Catalog,
    rank: RankOptions,
    device: Option<&str>,
) -> Result<String, LedgerError> {
    let devices = selected_devices(ledger, device)?;
    let mut out = String::new();

    out.push_str("## Findings\n\n");
    out.push_str(
        "| Device | Finding | Test cases | Best practices | CVSS vector | Score | Severity |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|\n");
    for id in &devices {
        let name = ledger
            .device(id)
            .map(|d| d.display_name.as_str())
            .unwrap_or(id);
        for f in ledger.findings_by_device(id)? {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} |",
                md_cell(name),
                md_cell(&f.title),
                f.test_cases.join(", "),
                f.best_practices.join(", "),
                f.cvss,
                f.score,
                f.severity().as_str()
            );
        }
    }

    if device.is_none() {
        out.push_str("\n## Best practice ranking\n\n");
        out.push_str("| Best practice | Label | Occurrence | Average score |\n|---|---|---|---|\n");
        for r in rank_bps(ledger, rank) {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {}{} |",
                r.bp,
                md_cell(label(catalog, &r.bp)),
                r.occurrence,
                r.average_score,
                if r.high_flag { " (high)" } else { "" }
            );
        }
    }

    out.push_str("\n## Observations\n");
    for id in &devices {
        let name = ledger
            .device(id)
            .map(|d| d.display_name.as_str())
            .unwrap_or(id);
        let _ = writeln!(out, "\n### {name}\n");
        let obs = ledger.observations_by_device(id);
        if obs.is_empty() {
            out.push_str("No observations recorded.\n");
        }
        for phase in Phase::ALL {
            let in_phase: Vec<_> = obs.iter().filter(|o| o.phase == phase).collect();
            if in_phase.is_empty() {
                continue;
            }
            let _ = writeln!(out, "**{}**\n", phase.title());
            for o in in_phase {
                match ledger.finding(o.finding.as_deref().unwrap_or("")) {
                    Some(f) => {
                        let _ = writeln!(out, "- {} (CVSS {})", o.text, f.score);
                    }
                    None => {
                        let _ = writeln!(out, "- {}", o.text);
                    }
                }
            }
            out.push('\n');
        }
    }

    out.push_str("\n## Severity summary\n\n");
    out.push_str("| Device | Worst | None | Low | Medium | High | Critical |\n|---|---|---|---|---|---|---|\n");
    for s in ledger.device_severity_summary() {
        if !devices.contains(&s.device.as_str()) {
            continue;
        }
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            s.device,
            s.worst.map(|w| w.as_str()).unwrap_or("-"),
            s.counts[0],
            s.counts[1],
            s.counts[2],
            s.counts[3],
            s.counts[4]
        );
    }
    Ok(out)
}

/// One record per finding and per observation.
pub fn workspace_machine(ledger: &Ledger, device: Option<&str>) -> Result<String, LedgerError> {
    let devices = selected_devices(ledger, device)?;
    let mut out = machine_header(
        "report",
        &[
            "record",
            "device",
            "id",
            "phase",
            "score",
            "severity",
            "vector",
            "test_cases",
            "best_practices",
            "scenarios",
            "text",
        ],
    );
    for id in &devices {
        for f in ledger.findings_by_device(id)? {
            let scen: Vec<String> = f.scenarios.iter().map(u8::to_string).collect();
            let _ = writeln!(
                out,
                "finding\t{id}\t{}\t-\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                f.id,
                f.score,
                f.severity().as_str(),
                f.cvss,
                f.test_cases.join(","),
                f.best_practices.join(","),
                scen.join(","),
                field(&f.title)
            );
        }
        for o in ledger.observations_by_device(id) {
            let _ = writeln!(
                out,
                "observation\t{id}\t{}\t{}\t-\t-\t-\t-\t-\t-\t{}",
                o.finding.as_deref().unwrap_or("-"),
                o.phase.title(),
                field(&o.text)
            );
        }
    }
    Ok(out)
}

pub fn severity_summary_machine(ledger: &Ledger) -> String {
    let mut out = machine_header(
        "severity",
        &[
            "device", "worst", "none", "low", "medium", "high", "critical",
        ],
    );
    for s in ledger.device_severity_summary() {
        let c = s.counts;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.device,
            s.worst.map(|w| w.as_str()).unwrap_or("-"),
            c[0],
            c[1],
            c[2],
            c[3],
            c[4]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_rank_starts_with_schema() {
        let c = crate::bundled_catalog();
        let l = crate::bundled_ledger(&c);
        let text = rank_machine(&rank_bps(&l, RankOptions::default()));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# iotsec machine v1 rank"));
        assert!(lines.next().unwrap().starts_with("bp\toccurrence"));
        assert!(lines.next().unwrap().starts_with("BP-DSP-02\t7\t6.5\t"));
    }

    #[test]
    fn unknown_device_rejected() {
        let c = crate::bundled_catalog();
        let l = crate::bundled_ledger(&c);
        assert!(workspace_machine(&l, Some("nope")).is_err());
    }

    #[test]
    fn fields_have_no_tabs() {
        assert_eq!(field("a\tb\nc"), "a b c");
    }
}
