//! The machine's input vocabulary and its append-only event log.

use serde::{Deserialize, Serialize};

use crate::cost::CostClass;
use crate::kernel::SyscallError;
use crate::mmu::{Fault, FaultCause, PageRange, PermPair, Prot, ProtectionKey, ThreadId, Vpn};

/// One operation in a thread's trace.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum Op {
    Load {
        page: Vpn,
    },
    Store {
        page: Vpn,
    },
    /// User-level row write to PKR; gated by the seal unit.
    Wrpkr {
        pkey: ProtectionKey,
        row: u64,
    },
    /// User-level row read from PKR.
    Rdpkr {
        pkey: ProtectionKey,
    },
    /// Stages the start address of a key's permissible range.
    SealStart {
        pkey: ProtectionKey,
        addr: u64,
    },
    /// Stages the end address of a key's permissible range.
    SealEnd {
        pkey: ProtectionKey,
        addr: u64,
    },
    /// Function call marker; consumed by the shadow-stack instrumentation.
    Call {
        fn_id: u32,
        ret_addr: u64,
    },
    /// Function return marker.
    Return {
        ret_addr: u64,
    },
    /// Attacker overwrite of an architectural return slot.
    SmashStack {
        slot: u32,
        value: u64,
    },
    Mmap {
        pages: PageRange,
        prot: Prot,
    },
    Munmap {
        pages: PageRange,
    },
    Syscall(SyscallOp),
    /// Cooperative scheduling point.
    Yield,
}

/// The simulated syscalls.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(
    tag = "name",
    content = "args",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum SyscallOp {
    PkeyAlloc {
        init: PermPair,
    },
    PkeyFree {
        pkey: ProtectionKey,
    },
    PkeyMprotect {
        pages: PageRange,
        prot: Prot,
        pkey: ProtectionKey,
    },
    Mprotect {
        pages: PageRange,
        prot: Prot,
    },
    PkeySeal {
        pkey: ProtectionKey,
        seal_domain: bool,
        seal_page: bool,
    },
    PkeyPermSeal {
        pkey: ProtectionKey,
    },
}

/// One trace event: the operation plus the instruction address attributed
/// to it (used for permissible-range checks on `Wrpkr`).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    pub ia: u64,
    pub op: Op,
}

/// How an executed event ended.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    /// Successful with a result: the row read by `Rdpkr` or the key
    /// returned by `pkey_alloc`.
    Value(u64),
    Faulted(FaultCause),
    Error(SyscallError),
}

impl Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok | Outcome::Value(_))
    }
}

/// Log record for one executed event. `index` is the event's position in
/// its thread's program.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct EventRecord {
    pub seq: u64,
    pub thread: ThreadId,
    pub index: u32,
    pub ia: u64,
    pub op: Op,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<CostClass>,
    pub cycles: u64,
}

/// Log record for a fault report, following the event that raised it.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct FaultRecord {
    pub seq: u64,
    pub index: u32,
    pub ia: u64,
    pub fault: Fault,
}

/// Log record for a PK-CAM refill performed during a gate check.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct RefillRecord {
    pub seq: u64,
    pub thread: ThreadId,
    pub pkey: ProtectionKey,
    pub cycles: u64,
}

/// Log record for a scheduled transition between threads.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct SwitchRecord {
    pub seq: u64,
    pub from: ThreadId,
    pub to: ThreadId,
    pub cycles: u64,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogRecord {
    Event(EventRecord),
    Fault(FaultRecord),
    Refill(RefillRecord),
    ContextSwitch(SwitchRecord),
}

impl LogRecord {
    /// The charge this record carries, if any.
    pub fn charge(&self) -> Option<(ThreadId, CostClass, u64)> {
        match self {
            LogRecord::Event(e) => e.class.map(|c| (e.thread, c, e.cycles)),
            LogRecord::Fault(_) => None,
            LogRecord::Refill(r) => Some((r.thread, CostClass::CamRefill, r.cycles)),
            // A switch is attributed to the outgoing thread.
            LogRecord::ContextSwitch(s) => Some((s.from, CostClass::ContextSwitch, s.cycles)),
        }
    }
}

/// The machine's single output channel: an ordered, append-only record of
/// executed events, faults, refills, and context switches, plus the
/// accumulated cycle count. Replaying the same scenario yields a
/// bit-identical log.
#[derive(Clone, PartialEq, Debug, Default, Serialize)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
    pub total_cycles: u64,
}

impl EventLog {
    pub fn new() -> EventLog {
        EventLog::default()
    }

    pub(crate) fn push(&mut self, record: LogRecord) {
        if let Some((_, _, cycles)) = record.charge() {
            self.total_cycles += cycles;
        }
        self.records.push(record);
    }

    pub(crate) fn next_seq(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn events(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Event(e) => Some(e),
            _ => None,
        })
    }

    pub fn faults(&self) -> impl Iterator<Item = &FaultRecord> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Fault(f) => Some(f),
            _ => None,
        })
    }

    /// Number of PK-CAM refills in the log.
    pub fn refills(&self) -> u64 {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::Refill(_)))
            .count() as u64
    }

    /// Outcome of the event at (thread, per-thread index), if it executed.
    pub fn outcome_of(&self, thread: ThreadId, index: u32) -> Option<Outcome> {
        self.events()
            .find(|e| e.thread == thread && e.index == index)
            .map(|e| e.outcome)
    }

    /// Canonical JSON form, used for byte-identical replay comparison.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("event log serializes")
    }
}
