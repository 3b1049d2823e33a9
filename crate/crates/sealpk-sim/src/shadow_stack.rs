//! Shadow-stack case study: expands `Call`/`Return` traces into
//! shadow-stack pushes and pops under four isolation variants, runs them on
//! the machine, and reports return-address tampering plus cost comparisons.
//!
//! Variants:
//! - `Unprotected`: pushes and pops with no permission toggling; the shadow
//!   memory is writable by anything, so a front-end-only shadow stack
//!   cannot guarantee its own integrity.
//! - `SealPkWr`: each push is bracketed by blind row writes that carry only
//!   the shadow key's pair, clobbering the pairs of row-mate keys.
//! - `SealPkRdRw`: each bracket reads the row first and edits just the
//!   shadow key's two bits, preserving row-mates.
//! - `Mprotect`: each push is bracketed by two `mprotect` calls toggling
//!   the PTE permissions, the expensive baseline.
//!
//! The shadow domain is initialized read-only and, for the SealPk variants,
//! domain- and page-sealed after setup; a permission seal can additionally
//! pin the row-write instructions to the instrumentation's own address
//! range. Pops only read: the epilogue loads the shadow slot and compares,
//! so no write window opens on return.
//!
//! Trace files for this module use the scenario format restricted to
//! `Call`, `Return`, `SmashStack`, `Yield`, and plain `Load`/`Store`
//! events (the latter are how attacker accesses are expressed).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::event::{Op, Outcome, SyscallOp, TraceEvent};
use crate::machine::Machine;
use crate::mmu::{PageRange, PermPair, Prot, ProtectionKey, ThreadId, Vpn, pack_perm};
use crate::scenario::Scenario;

/// First virtual page of the shadow region; one page per thread follows.
pub const SHADOW_BASE_VPN: u64 = 0x7F0_0000;

/// Instruction addresses of the inserted instrumentation. The permission
/// seal range covers exactly the span of the two row-write sites.
pub const IA_ENABLE_WRITE: u64 = 0x1000_0000;
pub const IA_PUSH_STORE: u64 = 0x1000_0008;
pub const IA_DISABLE_WRITE: u64 = 0x1000_0010;
pub const IA_POP_LOAD: u64 = 0x1000_0018;
const IA_SETUP: u64 = 0x1000_0100;

/// The four instrumentation variants.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Unprotected,
    SealPkWr,
    SealPkRdRw,
    Mprotect,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Unprotected,
        Variant::SealPkWr,
        Variant::SealPkRdRw,
        Variant::Mprotect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Unprotected => "unprotected",
            Variant::SealPkWr => "sealpk-wr",
            Variant::SealPkRdRw => "sealpk-rdrw",
            Variant::Mprotect => "mprotect",
        }
    }

    fn uses_pkey(self) -> bool {
        matches!(self, Variant::SealPkWr | Variant::SealPkRdRw)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unprotected" => Ok(Variant::Unprotected),
            "sealpk-wr" => Ok(Variant::SealPkWr),
            "sealpk-rdrw" => Ok(Variant::SealPkRdRw),
            "mprotect" => Ok(Variant::Mprotect),
            other => Err(format!(
                "unknown variant `{other}` (expected unprotected, sealpk-wr, sealpk-rdrw, mprotect)"
            )),
        }
    }
}

/// Case-study knobs.
#[derive(Clone, Copy, Debug)]
pub struct CaseStudyOptions {
    /// Commit a permission seal restricting the shadow key's row writes to
    /// the instrumentation range (SealPk variants only).
    pub perm_seal: bool,
    /// Allocate a second key sharing the shadow key's PKR row, initialized
    /// to this pair in the primary thread; used to observe what blind row
    /// writes do to row-mates.
    pub row_mate: Option<PermPair>,
}

impl Default for CaseStudyOptions {
    fn default() -> Self {
        CaseStudyOptions {
            perm_seal: true,
            row_mate: None,
        }
    }
}

/// The configured shadow stack after setup.
#[derive(Clone, Debug)]
pub struct ShadowStack {
    pub variant: Variant,
    /// One shadow page per thread, in thread order.
    pub pages: PageRange,
    /// The shadow domain's key (SealPk variants).
    pub pkey: Option<ProtectionKey>,
    /// The row-mate key, when requested.
    pub row_mate: Option<ProtectionKey>,
    /// Domain and page seals applied.
    pub sealed: bool,
    /// Number of setup events executed on the primary thread.
    pub setup_events: u32,
    threads: Vec<ThreadId>,
}

impl ShadowStack {
    /// The shadow page assigned to a thread.
    pub fn page_of(&self, thread: ThreadId) -> Vpn {
        let ordinal = self
            .threads
            .iter()
            .position(|t| *t == thread)
            .expect("unknown thread") as u64;
        Vpn::new(self.pages.start().value() + ordinal).expect("in range")
    }

    pub fn contains(&self, page: Vpn) -> bool {
        self.pages.contains(page)
    }
}

/// Why a trace cannot be instrumented.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceError {
    ForbiddenOp {
        thread: ThreadId,
        index: u32,
        op: String,
    },
    ReturnUnderflow {
        thread: ThreadId,
        index: u32,
    },
    RetAddrMismatch {
        thread: ThreadId,
        index: u32,
        pushed: u64,
        returned: u64,
    },
    SmashSlotOutOfRange {
        thread: ThreadId,
        index: u32,
        slot: u32,
        depth: u32,
    },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::ForbiddenOp { thread, index, op } => {
                write!(
                    f,
                    "{thread} event {index}: op {op} not allowed in a shadow-stack trace"
                )
            }
            TraceError::ReturnUnderflow { thread, index } => {
                write!(f, "{thread} event {index}: Return without a matching Call")
            }
            TraceError::RetAddrMismatch {
                thread,
                index,
                pushed,
                returned,
            } => write!(
                f,
                "{thread} event {index}: Return address {returned:#x} does not match the \
                 matching Call's {pushed:#x}"
            ),
            TraceError::SmashSlotOutOfRange {
                thread,
                index,
                slot,
                depth,
            } => write!(
                f,
                "{thread} event {index}: SmashStack slot {slot} out of range at depth {depth}"
            ),
        }
    }
}

impl std::error::Error for TraceError {}

/// Where an expanded event came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    /// An event of the input trace, at this index.
    Original(u32),
    /// Instrumentation inserted for the original event at this index.
    Inserted(u32, Role),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    EnableWrite,
    PushStore,
    DisableWrite,
    PopLoad,
}

/// An instrumented per-thread trace with per-event provenance.
#[derive(Clone, Debug)]
pub struct Instrumented {
    pub events: Vec<TraceEvent>,
    pub provenance: Vec<Provenance>,
}

/// Validates the restricted vocabulary, well-nesting, return-address
/// pairing, and smash slots of a shadow-stack trace.
pub fn validate_trace(scenario: &Scenario) -> Result<(), TraceError> {
    for spec in &scenario.threads {
        let mut stack: Vec<u64> = Vec::new();
        for (i, event) in spec.events.iter().enumerate() {
            let index = i as u32;
            match &event.op {
                Op::Call { ret_addr, .. } => stack.push(*ret_addr),
                Op::Return { ret_addr } => {
                    let pushed = stack.pop().ok_or(TraceError::ReturnUnderflow {
                        thread: spec.id,
                        index,
                    })?;
                    if pushed != *ret_addr {
                        return Err(TraceError::RetAddrMismatch {
                            thread: spec.id,
                            index,
                            pushed,
                            returned: *ret_addr,
                        });
                    }
                }
                Op::SmashStack { slot, .. } => {
                    if *slot as usize >= stack.len() {
                        return Err(TraceError::SmashSlotOutOfRange {
                            thread: spec.id,
                            index,
                            slot: *slot,
                            depth: stack.len() as u32,
                        });
                    }
                }
                Op::Yield | Op::Load { .. } | Op::Store { .. } => {}
                other => {
                    return Err(TraceError::ForbiddenOp {
                        thread: spec.id,
                        index,
                        op: format!("{other:?}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Maps shadow pages, allocates and assigns the shadow key, applies the
/// seals, and (optionally) commits the permission seal — by executing the
/// setup syscalls on the first thread of a fresh machine. Returns the
/// configured shadow stack; `setup_events` tells how many events ran.
pub fn setup(
    machine: &mut Machine,
    threads: &[ThreadId],
    variant: Variant,
    options: &CaseStudyOptions,
) -> ShadowStack {
    assert!(!threads.is_empty(), "case study needs at least one thread");
    let mut threads = threads.to_vec();
    threads.sort();
    let primary = threads[0];
    let pages = PageRange::new(Vpn::new(SHADOW_BASE_VPN).unwrap(), threads.len() as u32)
        .expect("shadow region fits");

    let mut ops: Vec<Op> = vec![Op::Mmap {
        pages,
        prot: Prot::RW,
    }];
    if variant.uses_pkey() {
        ops.push(Op::Syscall(SyscallOp::PkeyAlloc {
            init: PermPair::READ_ONLY,
        }));
    }
    if let Some(pair) = options.row_mate {
        ops.push(Op::Syscall(SyscallOp::PkeyAlloc { init: pair }));
    }

    let mut index = 0u32;
    let mut exec = |machine: &mut Machine, op: Op| {
        let outcome = machine.exec(primary, index, IA_SETUP + 8 * index as u64, &op);
        assert!(outcome.is_ok(), "setup event {op:?} failed: {outcome:?}");
        index += 1;
        outcome
    };

    let mut alloc_results = Vec::new();
    for op in ops {
        let is_alloc = matches!(op, Op::Syscall(SyscallOp::PkeyAlloc { .. }));
        let outcome = exec(machine, op);
        if is_alloc {
            let Outcome::Value(v) = outcome else {
                unreachable!()
            };
            alloc_results.push(ProtectionKey::new(v as u16).expect("valid key"));
        }
    }
    let mut allocs = alloc_results.into_iter();
    let pkey = variant
        .uses_pkey()
        .then(|| allocs.next().expect("shadow key"));
    let row_mate = options
        .row_mate
        .map(|_| allocs.next().expect("row-mate key"));

    match variant {
        Variant::Unprotected => {}
        Variant::Mprotect => {
            // Isolation by PTE permissions alone: read-only outside the
            // push windows.
            exec(
                machine,
                Op::Syscall(SyscallOp::Mprotect {
                    pages,
                    prot: Prot::R,
                }),
            );
        }
        Variant::SealPkWr | Variant::SealPkRdRw => {
            let key = pkey.expect("shadow key");
            exec(
                machine,
                Op::Syscall(SyscallOp::PkeyMprotect {
                    pages,
                    prot: Prot::RW,
                    pkey: key,
                }),
            );
            exec(
                machine,
                Op::Syscall(SyscallOp::PkeySeal {
                    pkey: key,
                    seal_domain: true,
                    seal_page: true,
                }),
            );
            if options.perm_seal {
                exec(
                    machine,
                    Op::SealStart {
                        pkey: key,
                        addr: IA_ENABLE_WRITE,
                    },
                );
                exec(
                    machine,
                    Op::SealEnd {
                        pkey: key,
                        addr: IA_DISABLE_WRITE,
                    },
                );
                exec(machine, Op::Syscall(SyscallOp::PkeyPermSeal { pkey: key }));
            }
        }
    }

    ShadowStack {
        variant,
        pages,
        pkey,
        row_mate,
        sealed: variant.uses_pkey(),
        setup_events: index,
        threads,
    }
}

/// Expands one thread's trace for the shadow stack's variant. Row values
/// for the SealPk variants are derived from the thread's current PKR state
/// in `machine`, tracked across the expansion; this is exact because the
/// restricted vocabulary admits no other row writes.
pub fn instrument(
    shadow: &ShadowStack,
    machine: &Machine,
    thread: ThreadId,
    events: &[TraceEvent],
) -> Instrumented {
    let page = shadow.page_of(thread);
    let mut row = shadow.pkey.map_or(0, |k| machine.pkr_row(thread, k));
    let mut out = Instrumented {
        events: Vec::new(),
        provenance: Vec::new(),
    };

    let push = |out: &mut Instrumented, ia, op, prov| {
        out.events.push(TraceEvent { ia, op });
        out.provenance.push(prov);
    };

    for (i, event) in events.iter().enumerate() {
        let index = i as u32;
        match &event.op {
            Op::Call { .. } => {
                push(
                    &mut out,
                    event.ia,
                    event.op.clone(),
                    Provenance::Original(index),
                );
                // Enable the write window.
                match shadow.variant {
                    Variant::Unprotected => {}
                    Variant::Mprotect => push(
                        &mut out,
                        IA_ENABLE_WRITE,
                        Op::Syscall(SyscallOp::Mprotect {
                            pages: shadow.pages,
                            prot: Prot::RW,
                        }),
                        Provenance::Inserted(index, Role::EnableWrite),
                    ),
                    Variant::SealPkWr => {
                        let key = shadow.pkey.unwrap();
                        row = pack_perm(PermPair::UNRESTRICTED, key.column(), 0);
                        push(
                            &mut out,
                            IA_ENABLE_WRITE,
                            Op::Wrpkr { pkey: key, row },
                            Provenance::Inserted(index, Role::EnableWrite),
                        );
                    }
                    Variant::SealPkRdRw => {
                        let key = shadow.pkey.unwrap();
                        push(
                            &mut out,
                            IA_ENABLE_WRITE,
                            Op::Rdpkr { pkey: key },
                            Provenance::Inserted(index, Role::EnableWrite),
                        );
                        row = pack_perm(PermPair::UNRESTRICTED, key.column(), row);
                        push(
                            &mut out,
                            IA_ENABLE_WRITE,
                            Op::Wrpkr { pkey: key, row },
                            Provenance::Inserted(index, Role::EnableWrite),
                        );
                    }
                }
                // Push the return address into the shadow slot.
                push(
                    &mut out,
                    IA_PUSH_STORE,
                    Op::Store { page },
                    Provenance::Inserted(index, Role::PushStore),
                );
                // Close the window.
                match shadow.variant {
                    Variant::Unprotected => {}
                    Variant::Mprotect => push(
                        &mut out,
                        IA_DISABLE_WRITE,
                        Op::Syscall(SyscallOp::Mprotect {
                            pages: shadow.pages,
                            prot: Prot::R,
                        }),
                        Provenance::Inserted(index, Role::DisableWrite),
                    ),
                    Variant::SealPkWr => {
                        let key = shadow.pkey.unwrap();
                        row = pack_perm(PermPair::READ_ONLY, key.column(), 0);
                        push(
                            &mut out,
                            IA_DISABLE_WRITE,
                            Op::Wrpkr { pkey: key, row },
                            Provenance::Inserted(index, Role::DisableWrite),
                        );
                    }
                    Variant::SealPkRdRw => {
                        let key = shadow.pkey.unwrap();
                        push(
                            &mut out,
                            IA_DISABLE_WRITE,
                            Op::Rdpkr { pkey: key },
                            Provenance::Inserted(index, Role::DisableWrite),
                        );
                        row = pack_perm(PermPair::READ_ONLY, key.column(), row);
                        push(
                            &mut out,
                            IA_DISABLE_WRITE,
                            Op::Wrpkr { pkey: key, row },
                            Provenance::Inserted(index, Role::DisableWrite),
                        );
                    }
                }
            }
            Op::Return { .. } => {
                // The epilogue only reads: load the shadow slot, compare,
                // return.
                push(
                    &mut out,
                    IA_POP_LOAD,
                    Op::Load { page },
                    Provenance::Inserted(index, Role::PopLoad),
                );
                push(
                    &mut out,
                    event.ia,
                    event.op.clone(),
                    Provenance::Original(index),
                );
            }
            _ => push(
                &mut out,
                event.ia,
                event.op.clone(),
                Provenance::Original(index),
            ),
        }
    }
    out
}

/// A detected return-address mismatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub thread: ThreadId,
    /// Index of the `Return` in the original trace.
    pub event: u32,
    /// The value popped from the shadow stack.
    pub expected: u64,
    /// The architectural return target actually used.
    pub actual: u64,
}

/// What the run detected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DetectionReport {
    /// Returns whose architectural target differed from the shadow copy.
    pub mismatches: Vec<Mismatch>,
    /// Non-instrumentation stores to shadow pages that faulted (attacks
    /// stopped, and flagged, by isolation).
    pub blocked_shadow_stores: u32,
    /// Non-instrumentation stores to shadow pages that succeeded (silent
    /// corruption; only possible without isolation).
    pub silent_shadow_writes: u32,
    /// Instrumentation pushes that faulted (0 in a correct setup).
    pub instrumentation_faults: u32,
}

impl DetectionReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
            && self.blocked_shadow_stores == 0
            && self.silent_shadow_writes == 0
            && self.instrumentation_faults == 0
    }
}

/// A finished case-study run.
pub struct CaseStudyRun {
    pub variant: Variant,
    pub shadow: ShadowStack,
    pub machine: Machine,
    pub detection: DetectionReport,
    /// Cycles spent in setup (excluded from comparisons).
    pub setup_cycles: u64,
    /// Cycles spent executing the instrumented trace.
    pub trace_cycles: u64,
    /// `Call` events executed.
    pub calls: u64,
    /// Expanded traces with provenance, per thread.
    pub instrumented: BTreeMap<ThreadId, Instrumented>,
    /// Remaining shadow-stack contents per thread after the run.
    pub final_shadow: BTreeMap<ThreadId, Vec<u64>>,
}

/// Serializable summary of a case-study run.
#[derive(Clone, Debug, Serialize)]
pub struct CaseStudySummary {
    pub variant: Variant,
    pub shadow_pages: PageRange,
    pub shadow_pkey: Option<ProtectionKey>,
    pub calls: u64,
    pub setup_cycles: u64,
    pub trace_cycles: u64,
    pub total_cycles: u64,
    pub detection: DetectionReport,
}

impl CaseStudyRun {
    pub fn summary(&self) -> CaseStudySummary {
        CaseStudySummary {
            variant: self.variant,
            shadow_pages: self.shadow.pages,
            shadow_pkey: self.shadow.pkey,
            calls: self.calls,
            setup_cycles: self.setup_cycles,
            trace_cycles: self.trace_cycles,
            total_cycles: self.machine.log().total_cycles,
            detection: self.detection.clone(),
        }
    }
}

/// Runs a shadow-stack trace under one variant: validate, set up, expand,
/// execute, analyze.
pub fn run_case_study(
    scenario: &Scenario,
    variant: Variant,
    options: &CaseStudyOptions,
) -> Result<CaseStudyRun, TraceError> {
    validate_trace(scenario)?;
    let threads: Vec<ThreadId> = scenario.threads.iter().map(|t| t.id).collect();
    let mut machine = Machine::new(scenario.config.clone(), &threads);
    let shadow = setup(&mut machine, &threads, variant, options);
    let setup_cycles = machine.log().total_cycles;

    let mut instrumented = BTreeMap::new();
    for spec in &scenario.threads {
        let expanded = instrument(&shadow, &machine, spec.id, &spec.events);
        let base = if spec.id == shadow.threads[0] {
            shadow.setup_events
        } else {
            0
        };
        machine.load_program(spec.id, expanded.events.clone(), base);
        instrumented.insert(spec.id, expanded);
    }
    machine.run();

    let (detection, final_shadow, calls) = detect_rop(scenario, &shadow, &instrumented, &machine);
    let trace_cycles = machine.log().total_cycles - setup_cycles;
    Ok(CaseStudyRun {
        variant,
        shadow,
        detection,
        setup_cycles,
        trace_cycles,
        calls,
        instrumented,
        final_shadow,
        machine,
    })
}

/// Replays the per-thread log records against the provenance map,
/// maintaining the architectural stack (smashes applied) and the shadow
/// stack, and flags every return whose architectural target differs from
/// the popped shadow value.
fn detect_rop(
    scenario: &Scenario,
    shadow: &ShadowStack,
    instrumented: &BTreeMap<ThreadId, Instrumented>,
    machine: &Machine,
) -> (DetectionReport, BTreeMap<ThreadId, Vec<u64>>, u64) {
    let mut report = DetectionReport::default();
    let mut final_shadow = BTreeMap::new();
    let mut calls = 0u64;

    for spec in &scenario.threads {
        let expanded = &instrumented[&spec.id];
        let base = if spec.id == shadow.threads[0] {
            shadow.setup_events
        } else {
            0
        };
        let mut arch: Vec<u64> = Vec::new();
        let mut slots: Vec<u64> = Vec::new();

        for record in machine.log().events().filter(|e| e.thread == spec.id) {
            if record.index < base {
                continue; // setup
            }
            let position = (record.index - base) as usize;
            match expanded.provenance[position] {
                Provenance::Original(source) => match &spec.events[source as usize].op {
                    Op::Call { ret_addr, .. } => {
                        arch.push(*ret_addr);
                        calls += 1;
                    }
                    Op::Return { ret_addr } => {
                        let actual = arch.pop().unwrap_or(*ret_addr);
                        let expected = slots.pop().unwrap_or(*ret_addr);
                        if actual != expected {
                            report.mismatches.push(Mismatch {
                                thread: spec.id,
                                event: source,
                                expected,
                                actual,
                            });
                        }
                    }
                    Op::SmashStack { slot, value } => {
                        if let Some(entry) = arch.get_mut(*slot as usize) {
                            *entry = *value;
                        }
                    }
                    Op::Store { page } if shadow.contains(*page) => {
                        if record.outcome.is_ok() {
                            report.silent_shadow_writes += 1;
                        } else {
                            report.blocked_shadow_stores += 1;
                        }
                    }
                    _ => {}
                },
                Provenance::Inserted(source, Role::PushStore) => {
                    if !record.outcome.is_ok() {
                        report.instrumentation_faults += 1;
                    }
                    if let Op::Call { ret_addr, .. } = &spec.events[source as usize].op {
                        slots.push(*ret_addr);
                    }
                }
                Provenance::Inserted(..) => {}
            }
        }
        final_shadow.insert(spec.id, slots);
    }
    (report, final_shadow, calls)
}

/// One variant's cost line in a comparison.
#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub variant: Variant,
    pub trace_cycles: u64,
    /// Toggle cost per call over the unprotected baseline.
    pub toggle_cycles_per_call: f64,
    pub mismatches: usize,
}

/// Cost comparison of the four variants over one trace.
#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub calls: u64,
    /// Ratio of per-call toggle cost, mprotect over sealpk-rdrw.
    pub mprotect_over_rdrw: f64,
}

/// Runs the same trace under every variant and compares per-call toggle
/// costs against the unprotected baseline.
pub fn compare_costs(
    scenario: &Scenario,
    options: &CaseStudyOptions,
) -> Result<CompareReport, TraceError> {
    let mut cycles = BTreeMap::new();
    let mut rows = Vec::new();
    let mut calls = 0;
    for variant in Variant::ALL {
        let run = run_case_study(scenario, variant, options)?;
        calls = run.calls;
        cycles.insert(variant.name(), run.trace_cycles);
        rows.push((variant, run.trace_cycles, run.detection.mismatches.len()));
    }
    let baseline = cycles["unprotected"];
    let toggle = |total: u64| {
        if calls == 0 {
            0.0
        } else {
            (total.saturating_sub(baseline)) as f64 / calls as f64
        }
    };
    let rdrw_toggle = toggle(cycles["sealpk-rdrw"]);
    let mprotect_toggle = toggle(cycles["mprotect"]);
    Ok(CompareReport {
        rows: rows
            .into_iter()
            .map(|(variant, total, mismatches)| CompareRow {
                variant,
                trace_cycles: total,
                toggle_cycles_per_call: toggle(total),
                mismatches,
            })
            .collect(),
        calls,
        mprotect_over_rdrw: if rdrw_toggle == 0.0 {
            0.0
        } else {
            mprotect_toggle / rdrw_toggle
        },
    })
}
