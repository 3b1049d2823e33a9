//! Run reports: one structure rendered as machine-readable JSON or a
//! human-readable text table, carrying identical information.

use serde::Serialize;

use crate::event::{EventLog, Outcome};
use crate::machine::{CostReport, Machine, cost_report};
use crate::scenario::{ExpectationReport, ExpectationStatus};

/// Everything a run produced: executed events, faults, refill count, and
/// cycle totals, plus expectation outcomes when the scenario declared any.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub events: Vec<crate::event::EventRecord>,
    pub faults: Vec<crate::event::FaultRecord>,
    pub refills: u64,
    pub cycles: CostReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectations: Option<ExpectationReport>,
}

/// Output format for reports.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportFormat {
    Json,
    Text,
}

/// Collects a report from a finished machine.
pub fn build_report(machine: &Machine, expectations: Option<ExpectationReport>) -> RunReport {
    let log = machine.log();
    RunReport {
        events: log.events().cloned().collect(),
        faults: log.faults().cloned().collect(),
        refills: log.refills(),
        cycles: cost_report(log),
        expectations,
    }
}

/// Renders a report in the requested format.
pub fn render_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        ReportFormat::Text => render_text(report),
    }
}

fn outcome_text(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Ok => "ok".to_string(),
        Outcome::Value(v) => format!("ok ({v:#x})"),
        Outcome::Faulted(cause) => format!("fault {cause}"),
        Outcome::Error(err) => format!("error {err}"),
    }
}

fn render_text(report: &RunReport) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    writeln!(out, "events ({}):", report.events.len()).unwrap();
    for e in &report.events {
        let charge = match e.class {
            Some(class) => format!(" [{} +{}]", class.name(), e.cycles),
            None => String::new(),
        };
        writeln!(
            out,
            "  #{} {}/e{} ia={:#x} {:?} -> {}{}",
            e.seq,
            e.thread,
            e.index,
            e.ia,
            e.op,
            outcome_text(&e.outcome),
            charge
        )
        .unwrap();
    }
    writeln!(out, "faults ({}):", report.faults.len()).unwrap();
    for f in &report.faults {
        let mut detail = format!("cause={} pkey={}", f.fault.cause, f.fault.pkey);
        if let Some(page) = f.fault.page {
            detail.push_str(&format!(" page={page}"));
        }
        if let Some(kind) = f.fault.kind {
            detail.push_str(&format!(" kind={kind:?}"));
        }
        writeln!(
            out,
            "  #{} {}/e{} ia={:#x} {}",
            f.seq, f.fault.thread, f.index, f.ia, detail
        )
        .unwrap();
    }
    writeln!(out, "refills: {}", report.refills).unwrap();
    writeln!(out, "cycles: total={}", report.cycles.total).unwrap();
    let by_class: Vec<String> = report
        .cycles
        .by_class
        .iter()
        .map(|(class, cycles)| format!("{}={}", class.name(), cycles))
        .collect();
    writeln!(out, "  by_class: {}", by_class.join(" ")).unwrap();
    let by_thread: Vec<String> = report
        .cycles
        .by_thread
        .iter()
        .map(|(thread, cycles)| format!("{thread}={cycles}"))
        .collect();
    writeln!(out, "  by_thread: {}", by_thread.join(" ")).unwrap();
    if let Some(expectations) = &report.expectations {
        writeln!(
            out,
            "expectations: {}/{} met",
            expectations.met_count(),
            expectations.applicable_count()
        )
        .unwrap();
        for outcome in &expectations.outcomes {
            let tag = match outcome.status {
                ExpectationStatus::Met => "met",
                ExpectationStatus::Unmet => "UNMET",
                ExpectationStatus::NotApplicable => "n/a",
            };
            writeln!(
                out,
                "  [{tag}] {:?} -- {}",
                outcome.expectation.check, outcome.detail
            )
            .unwrap();
        }
    }
    out
}

/// Serializes a full event log (all record kinds in order) to JSON; this is
/// the `--log` output and the byte-identical replay artifact.
pub fn render_log(log: &EventLog) -> String {
    serde_json::to_string_pretty(log).expect("log serializes")
}
