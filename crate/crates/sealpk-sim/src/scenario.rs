//! Scenario files: the CLI-facing description of a run.
//!
//! A scenario is a single JSON document with a `config` block (all fields
//! optional, defaults documented on [`SimConfig`] and [`CostModel`]), a
//! list of threads each carrying its event trace, and optional `expect`
//! annotations that make attack scenarios self-describing. Parsing is
//! strict: unknown fields, unknown operation or syscall names, keys of
//! 1024 or more, and pages of `2^27` or more are all rejected with a
//! located error.
//!
//! An expectation wraps one check, optionally guarded by `when_lazy` so a
//! single scenario can state different outcomes for the lazy and non-lazy
//! de-allocation modes. Event positions refer to the 0-based index within
//! the thread's event list.
//!
//! [`CostModel`]: crate::cost::CostModel

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::event::TraceEvent;
use crate::kernel::SyscallError;
use crate::machine::{Machine, SimConfig};
use crate::mmu::{FaultCause, ProtectionKey, ThreadId, Vpn};

/// A parsed scenario: config, per-thread traces, and expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub config: SimConfig,
    pub threads: Vec<ThreadSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreadSpec {
    pub id: ThreadId,
    pub events: Vec<TraceEvent>,
}

/// One asserted property of a run, optionally restricted to a mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// Evaluate only when `lazy_dealloc` equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_lazy: Option<bool>,
    pub check: Check,
}

/// The checkable properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// The event at (thread, index) executed without fault or error.
    Ok { thread: ThreadId, event: u32 },
    /// A fault with this cause was raised by this thread (at a specific
    /// event index, when given).
    Fault {
        thread: ThreadId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        event: Option<u32>,
        cause: FaultCause,
    },
    /// The syscall at (thread, index) failed with this error.
    SyscallError {
        thread: ThreadId,
        event: u32,
        error: SyscallError,
    },
    /// The event at (thread, index) returned this value (the key from
    /// `pkey_alloc`, or the row from `Rdpkr`).
    Returns {
        thread: ThreadId,
        event: u32,
        value: u64,
    },
    /// Final state: the page is mapped and tagged with this key.
    PagePkey { page: Vpn, pkey: ProtectionKey },
    /// Final state: the thread's pair for this key.
    PkrPair {
        thread: ThreadId,
        pkey: ProtectionKey,
        read_disable: bool,
        write_disable: bool,
    },
    /// The run performed exactly this many PK-CAM refills.
    Refills { count: u64 },
    /// No fault of any kind was raised.
    NoFaults,
}

/// Scenario parse or validation failure.
#[derive(Debug)]
pub enum ScenarioError {
    /// Malformed or non-conforming JSON, with its source location.
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    /// Structurally valid JSON that violates a scenario rule.
    Invalid(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse {
                message,
                line,
                column,
            } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            ScenarioError::Invalid(message) => write!(f, "invalid scenario: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|err| ScenarioError::Parse {
        message: err.to_string(),
        line: err.line(),
        column: err.column(),
    })?;
    validate_scenario(&scenario)?;
    Ok(scenario)
}

/// Structural checks beyond the type-level ones.
pub fn validate_scenario(scenario: &Scenario) -> Result<(), ScenarioError> {
    if scenario.config.cam_capacity < 1 {
        return Err(ScenarioError::Invalid(
            "cam_capacity must be at least 1".into(),
        ));
    }
    let mut ids: Vec<ThreadId> = scenario.threads.iter().map(|t| t.id).collect();
    ids.sort();
    let before = ids.len();
    ids.dedup();
    if ids.len() != before {
        return Err(ScenarioError::Invalid("thread ids must be unique".into()));
    }
    for (i, expectation) in scenario.expect.iter().enumerate() {
        let (thread, event) = match &expectation.check {
            Check::Ok { thread, event } => (Some(*thread), Some(*event)),
            Check::Fault { thread, event, .. } => (Some(*thread), *event),
            Check::SyscallError { thread, event, .. } => (Some(*thread), Some(*event)),
            Check::Returns { thread, event, .. } => (Some(*thread), Some(*event)),
            Check::PkrPair { thread, .. } => (Some(*thread), None),
            Check::PagePkey { .. } | Check::Refills { .. } | Check::NoFaults => (None, None),
        };
        if let Some(thread) = thread {
            let Some(spec) = scenario.threads.iter().find(|t| t.id == thread) else {
                return Err(ScenarioError::Invalid(format!(
                    "expect[{i}] references unknown thread {thread}"
                )));
            };
            if let Some(event) = event
                && event as usize >= spec.events.len()
            {
                return Err(ScenarioError::Invalid(format!(
                    "expect[{i}] references event {event} beyond {thread}'s trace"
                )));
            }
        }
    }
    Ok(())
}

/// Renders a scenario back to its JSON document form.
pub fn render_scenario(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(scenario).expect("scenario serializes")
}

/// Builds the machine for a scenario and runs it to completion.
pub fn run_scenario(scenario: &Scenario) -> Machine {
    let programs = scenario
        .threads
        .iter()
        .map(|t| (t.id, t.events.clone()))
        .collect();
    let mut machine = Machine::with_programs(scenario.config.clone(), programs);
    machine.run();
    machine
}

/// Result of evaluating one expectation.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationStatus {
    Met,
    Unmet,
    /// Guarded out by `when_lazy` in this mode.
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationOutcome {
    pub status: ExpectationStatus,
    pub detail: String,
    pub expectation: Expectation,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExpectationReport {
    pub outcomes: Vec<ExpectationOutcome>,
}

impl ExpectationReport {
    /// True when no applicable expectation is unmet.
    pub fn all_met(&self) -> bool {
        self.outcomes
            .iter()
            .all(|o| o.status != ExpectationStatus::Unmet)
    }

    pub fn met_count(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.status == ExpectationStatus::Met)
            .count()
    }

    pub fn applicable_count(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.status != ExpectationStatus::NotApplicable)
            .count()
    }
}

/// Evaluates a scenario's expectations against a finished run.
pub fn evaluate_expectations(scenario: &Scenario, machine: &Machine) -> ExpectationReport {
    let log = machine.log();
    let mut outcomes = Vec::new();
    for expectation in &scenario.expect {
        if let Some(lazy) = expectation.when_lazy
            && scenario.config.lazy_dealloc != lazy
        {
            outcomes.push(ExpectationOutcome {
                status: ExpectationStatus::NotApplicable,
                detail: format!("requires lazy_dealloc={lazy}"),
                expectation: expectation.clone(),
            });
            continue;
        }
        let (met, detail) = match &expectation.check {
            Check::Ok { thread, event } => match log.outcome_of(*thread, *event) {
                Some(outcome) if outcome.is_ok() => (true, "ok".to_string()),
                Some(outcome) => (false, format!("got {outcome:?}")),
                None => (false, "event did not execute".to_string()),
            },
            Check::Fault {
                thread,
                event,
                cause,
            } => {
                let found = log.faults().any(|f| {
                    f.fault.thread == *thread
                        && f.fault.cause == *cause
                        && event.is_none_or(|e| f.index == e)
                });
                if found {
                    (true, format!("{cause} raised"))
                } else {
                    (false, format!("no {cause} fault from {thread}"))
                }
            }
            Check::SyscallError {
                thread,
                event,
                error,
            } => match log.outcome_of(*thread, *event) {
                Some(crate::event::Outcome::Error(e)) if e == *error => {
                    (true, format!("failed with {error}"))
                }
                Some(outcome) => (false, format!("got {outcome:?}")),
                None => (false, "event did not execute".to_string()),
            },
            Check::Returns {
                thread,
                event,
                value,
            } => match log.outcome_of(*thread, *event) {
                Some(crate::event::Outcome::Value(v)) if v == *value => {
                    (true, format!("returned {value}"))
                }
                Some(outcome) => (false, format!("got {outcome:?}")),
                None => (false, "event did not execute".to_string()),
            },
            Check::PagePkey { page, pkey } => match machine.page_pkey(*page) {
                Some(actual) if actual == *pkey => (true, format!("page {page} has pkey {pkey}")),
                Some(actual) => (false, format!("page {page} has pkey {actual}")),
                None => (false, format!("page {page} not mapped")),
            },
            Check::PkrPair {
                thread,
                pkey,
                read_disable,
                write_disable,
            } => {
                let pair = machine.pkr_pair(*thread, *pkey);
                if pair.read_disable == *read_disable && pair.write_disable == *write_disable {
                    (true, format!("pair is {pair}"))
                } else {
                    (false, format!("pair is {pair}"))
                }
            }
            Check::Refills { count } => {
                let refills = log.refills();
                (refills == *count, format!("{refills} refills"))
            }
            Check::NoFaults => {
                let faults = log.faults().count();
                (faults == 0, format!("{faults} faults"))
            }
        };
        outcomes.push(ExpectationOutcome {
            status: if met {
                ExpectationStatus::Met
            } else {
                ExpectationStatus::Unmet
            },
            detail,
            expectation: expectation.clone(),
        });
    }
    ExpectationReport { outcomes }
}
