//! The deterministic multi-thread trace executor.
//!
//! Threads run their events in program order; scheduling is round-robin at
//! explicit `Yield` events plus thread termination, and every scheduled
//! transition charges a context switch and save/restores the per-thread PKR
//! image. There is no host parallelism and no randomness: identical
//! scenario and config yield a byte-identical event log.
//!
//! Dispatch per event: loads and stores go through the DTLB and the
//! effective-permission check; `Wrpkr` reads the old row, consults the seal
//! gate (logging and charging any PK-CAM refills first), and writes the row
//! only on allow; seal and syscall events go to the seal unit and kernel.
//! Faults are reported through the kernel's pkey-attributed fault record
//! and, by default, terminate the faulting thread; `continue_on_fault`
//! downgrades that to log-and-continue.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cost::{CostClass, CostModel};
use crate::event::{
    EventLog, EventRecord, FaultRecord, LogRecord, Op, Outcome, RefillRecord, SwitchRecord,
    SyscallOp, TraceEvent,
};
use crate::kernel::{Kernel, PkrSet, SyscallError};
use crate::mmu::{
    AccessKind, AccessRequest, Dtlb, Fault, FaultCause, PermPair, ProtectionKey, ThreadId, Vpn,
    check_access_pte,
};
use crate::seal::{PkCam, SealError, SealReg};

/// Run-wide configuration; this is the `config` block of a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Lazy key de-allocation (the architecture's mode). Disable for the
    /// classic free-then-reuse behavior that exhibits the key
    /// use-after-free.
    pub lazy_dealloc: bool,
    /// PK-CAM capacity; must be at least 1.
    pub cam_capacity: usize,
    /// Log faults and keep the thread running instead of terminating it.
    pub continue_on_fault: bool,
    pub cost: CostModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            lazy_dealloc: true,
            cam_capacity: 4,
            continue_on_fault: false,
            cost: CostModel::default(),
        }
    }
}

struct ThreadRun {
    id: ThreadId,
    events: Vec<TraceEvent>,
    /// Offset added to program positions in log records; nonzero when a
    /// runner has already executed earlier events for this thread.
    base_index: u32,
    pc: usize,
    live: bool,
}

struct Step {
    outcome: Outcome,
    class: Option<CostClass>,
    fault: Option<Fault>,
    refilled: Vec<ProtectionKey>,
}

impl Step {
    fn ok(class: Option<CostClass>) -> Step {
        Step {
            outcome: Outcome::Ok,
            class,
            fault: None,
            refilled: Vec::new(),
        }
    }

    fn value(class: CostClass, value: u64) -> Step {
        Step {
            outcome: Outcome::Value(value),
            class: Some(class),
            fault: None,
            refilled: Vec::new(),
        }
    }

    fn faulted(class: Option<CostClass>, fault: Fault) -> Step {
        Step {
            outcome: Outcome::Faulted(fault.cause),
            class,
            fault: Some(fault),
            refilled: Vec::new(),
        }
    }

    fn error(class: CostClass, err: SyscallError, fault: Fault) -> Step {
        Step {
            outcome: Outcome::Error(err),
            class: Some(class),
            fault: Some(fault),
            refilled: Vec::new(),
        }
    }
}

/// The machine: kernel, MMU state, seal unit, per-thread PKR images, the
/// scheduler, and the event log.
pub struct Machine {
    config: SimConfig,
    kernel: Kernel,
    dtlb: Dtlb,
    seal: SealReg,
    cam: PkCam,
    pkrs: PkrSet,
    threads: Vec<ThreadRun>,
    current: usize,
    log: EventLog,
}

impl Machine {
    /// Builds a machine for the given thread ids with no programs loaded.
    /// Thread ids must be unique; they are scheduled in ascending order.
    pub fn new(config: SimConfig, thread_ids: &[ThreadId]) -> Machine {
        let mut ids: Vec<ThreadId> = thread_ids.to_vec();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), thread_ids.len(), "duplicate thread ids");
        let pkrs = PkrSet::new(ids.iter().copied());
        let threads = ids
            .into_iter()
            .map(|id| ThreadRun {
                id,
                events: Vec::new(),
                base_index: 0,
                pc: 0,
                live: true,
            })
            .collect();
        Machine {
            cam: PkCam::new(config.cam_capacity),
            kernel: Kernel::new(config.lazy_dealloc),
            dtlb: Dtlb::new(),
            seal: SealReg::new(),
            pkrs,
            threads,
            current: 0,
            log: EventLog::new(),
            config,
        }
    }

    /// Builds a machine with one program per thread, ready to [`run`].
    ///
    /// [`run`]: Machine::run
    pub fn with_programs(config: SimConfig, programs: Vec<(ThreadId, Vec<TraceEvent>)>) -> Machine {
        let ids: Vec<ThreadId> = programs.iter().map(|(id, _)| *id).collect();
        let mut machine = Machine::new(config, &ids);
        for (id, events) in programs {
            machine.load_program(id, events, 0);
        }
        machine
    }

    /// Replaces a thread's program. `base_index` offsets the program
    /// positions recorded in the log, for callers that already executed
    /// earlier events of this thread through [`exec`].
    ///
    /// [`exec`]: Machine::exec
    pub fn load_program(&mut self, thread: ThreadId, events: Vec<TraceEvent>, base_index: u32) {
        let run = self
            .threads
            .iter_mut()
            .find(|t| t.id == thread)
            .expect("unknown thread");
        run.events = events;
        run.base_index = base_index;
        run.pc = 0;
        run.live = true;
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn seal(&self) -> &SealReg {
        &self.seal
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Total PK-CAM refills so far.
    pub fn cam_refills(&self) -> u64 {
        self.cam.refill_count()
    }

    pub fn dtlb(&self) -> &Dtlb {
        &self.dtlb
    }

    /// A thread's current pair for a key.
    pub fn pkr_pair(&self, thread: ThreadId, pkey: ProtectionKey) -> PermPair {
        self.pkrs.get(thread).pair(pkey)
    }

    /// A thread's current row word holding a key's pair.
    pub fn pkr_row(&self, thread: ThreadId, pkey: ProtectionKey) -> u64 {
        self.pkrs.get(thread).read_row(pkey)
    }

    /// The key currently tagged on a page, if mapped.
    pub fn page_pkey(&self, page: Vpn) -> Option<ProtectionKey> {
        let pte = self.kernel.page_table().get(page);
        pte.valid.then_some(pte.pkey)
    }

    /// Runs all loaded programs to completion.
    pub fn run(&mut self) {
        if self.threads.is_empty() {
            return;
        }
        self.current = 0;
        loop {
            let t = &self.threads[self.current];
            if !t.live {
                if !self.advance() {
                    break;
                }
                continue;
            }
            if t.pc == t.events.len() {
                self.threads[self.current].live = false;
                if !self.advance() {
                    break;
                }
                continue;
            }
            let id = t.id;
            let index = t.base_index + t.pc as u32;
            let event = t.events[t.pc].clone();
            self.threads[self.current].pc += 1;

            if matches!(event.op, Op::Yield) {
                self.push_event(EventRecord {
                    seq: 0,
                    thread: id,
                    index,
                    ia: event.ia,
                    op: Op::Yield,
                    outcome: Outcome::Ok,
                    class: None,
                    cycles: 0,
                });
                self.advance();
                continue;
            }

            let faulted = !self.exec(id, index, event.ia, &event.op).is_ok();
            if faulted && !self.config.continue_on_fault {
                self.threads[self.current].live = false;
                if !self.advance() {
                    break;
                }
            }
        }
    }

    /// Executes one event as `thread` and logs it. Fault policy (thread
    /// termination) is not applied here; [`run`] layers it on top.
    ///
    /// [`run`]: Machine::run
    pub fn exec(&mut self, thread: ThreadId, index: u32, ia: u64, op: &Op) -> Outcome {
        let step = self.dispatch(thread, ia, op);
        for pkey in &step.refilled {
            let record = RefillRecord {
                seq: self.log.next_seq(),
                thread,
                pkey: *pkey,
                cycles: self.config.cost.charge(CostClass::CamRefill),
            };
            self.log.push(LogRecord::Refill(record));
        }
        self.push_event(EventRecord {
            seq: 0,
            thread,
            index,
            ia,
            op: op.clone(),
            outcome: step.outcome,
            class: step.class,
            cycles: step.class.map_or(0, |c| self.config.cost.charge(c)),
        });
        if let Some(fault) = step.fault {
            let record = FaultRecord {
                seq: self.log.next_seq(),
                index,
                ia,
                fault,
            };
            self.log.push(LogRecord::Fault(record));
        }
        step.outcome
    }

    fn push_event(&mut self, mut record: EventRecord) {
        record.seq = self.log.next_seq();
        self.log.push(LogRecord::Event(record));
    }

    /// Scheduled transition to the next live thread in round-robin order.
    /// Returns false when no thread is live. Staying on the only live
    /// thread is not a transition and charges nothing.
    fn advance(&mut self) -> bool {
        let n = self.threads.len();
        let from = self.threads[self.current].id;
        for step in 1..=n {
            let idx = (self.current + step) % n;
            if !self.threads[idx].live {
                continue;
            }
            if idx != self.current {
                let record = SwitchRecord {
                    seq: self.log.next_seq(),
                    from,
                    to: self.threads[idx].id,
                    cycles: self.config.cost.charge(CostClass::ContextSwitch),
                };
                self.log.push(LogRecord::ContextSwitch(record));
                self.current = idx;
            }
            return true;
        }
        false
    }

    fn dispatch(&mut self, thread: ThreadId, ia: u64, op: &Op) -> Step {
        match op {
            Op::Load { page } => self.access(thread, *page, AccessKind::Load),
            Op::Store { page } => self.access(thread, *page, AccessKind::Store),
            Op::Rdpkr { pkey } => {
                Step::value(CostClass::Rdpkr, self.pkrs.get(thread).read_row(*pkey))
            }
            Op::Wrpkr { pkey, row } => {
                let old = self.pkrs.get(thread).read_row(*pkey);
                let gate = self.seal.gate_wrpkr(&mut self.cam, *pkey, ia, old, *row);
                let mut step = match gate.verdict {
                    Ok(()) => {
                        self.pkrs.get_mut(thread).write_row(*pkey, *row);
                        Step::ok(Some(CostClass::Wrpkr))
                    }
                    Err(offender) => Step::faulted(
                        Some(CostClass::Wrpkr),
                        Fault::bare(thread, FaultCause::SealViolation, offender),
                    ),
                };
                step.refilled = gate.refilled;
                step
            }
            Op::SealStart { pkey, addr } => {
                let staged = self.seal.seal_start(*pkey, *addr);
                seal_stage(thread, *pkey, staged.err())
            }
            Op::SealEnd { pkey, addr } => {
                let staged = self.seal.seal_end(*pkey, *addr);
                seal_stage(thread, *pkey, staged.err())
            }
            Op::Call { .. } | Op::Return { .. } => Step::ok(None),
            Op::SmashStack { .. } => Step::ok(Some(CostClass::Store)),
            Op::Mmap { pages, prot } => {
                let result = self.kernel.mmap(*pages, *prot);
                syscall_step(
                    thread,
                    CostClass::PkeySyscall,
                    ProtectionKey::DEFAULT,
                    result,
                )
            }
            Op::Munmap { pages } => {
                let result = self.kernel.munmap(&mut self.dtlb, *pages);
                syscall_step(
                    thread,
                    CostClass::PkeySyscall,
                    ProtectionKey::DEFAULT,
                    result,
                )
            }
            Op::Syscall(call) => self.dispatch_syscall(thread, call),
            Op::Yield => Step::ok(None),
        }
    }

    fn dispatch_syscall(&mut self, thread: ThreadId, call: &SyscallOp) -> Step {
        match call {
            SyscallOp::PkeyAlloc { init } => {
                match self.kernel.pkey_alloc(&mut self.pkrs, thread, *init) {
                    Ok(key) => Step::value(CostClass::PkeySyscall, key.value() as u64),
                    Err(err) => Step::error(
                        CostClass::PkeySyscall,
                        err,
                        Fault::bare(thread, FaultCause::SyscallError, ProtectionKey::DEFAULT),
                    ),
                }
            }
            SyscallOp::PkeyFree { pkey } => {
                let result = self.kernel.pkey_free(&mut self.pkrs, *pkey);
                syscall_step(thread, CostClass::PkeySyscall, *pkey, result)
            }
            SyscallOp::PkeyMprotect { pages, prot, pkey } => {
                let result = self
                    .kernel
                    .pkey_mprotect(&mut self.dtlb, *pages, *prot, *pkey);
                syscall_step(thread, CostClass::PkeySyscall, *pkey, result)
            }
            SyscallOp::Mprotect { pages, prot } => {
                let result = self.kernel.mprotect(&mut self.dtlb, *pages, *prot);
                syscall_step(thread, CostClass::Mprotect, ProtectionKey::DEFAULT, result)
            }
            SyscallOp::PkeySeal {
                pkey,
                seal_domain,
                seal_page,
            } => {
                let result = self.kernel.pkey_seal(*pkey, *seal_domain, *seal_page);
                syscall_step(thread, CostClass::PkeySyscall, *pkey, result)
            }
            SyscallOp::PkeyPermSeal { pkey } => {
                match self.seal.commit_perm_seal(&mut self.cam, *pkey) {
                    Ok(()) => Step::ok(Some(CostClass::PkeySyscall)),
                    Err(SealError::AlreadySealed(k)) => Step::faulted(
                        Some(CostClass::PkeySyscall),
                        Fault::bare(thread, FaultCause::SealViolation, k),
                    ),
                    Err(_) => Step::error(
                        CostClass::PkeySyscall,
                        SyscallError::InvalidSealRange,
                        Fault::bare(thread, FaultCause::SyscallError, *pkey),
                    ),
                }
            }
        }
    }

    fn access(&mut self, thread: ThreadId, page: Vpn, kind: AccessKind) -> Step {
        let class = match kind {
            AccessKind::Load => CostClass::Load,
            AccessKind::Store => CostClass::Store,
        };
        let pte = self.dtlb.lookup(page, self.kernel.page_table());
        let pair = self.pkrs.get(thread).pair(pte.pkey);
        let req = AccessRequest { page, kind, thread };
        match check_access_pte(&req, &pte, pair) {
            Ok(()) => Step::ok(Some(class)),
            Err(fault) => Step::faulted(Some(class), fault),
        }
    }
}

fn seal_stage(thread: ThreadId, pkey: ProtectionKey, err: Option<SealError>) -> Step {
    match err {
        None => Step::ok(None),
        Some(_) => Step::faulted(None, Fault::bare(thread, FaultCause::SealViolation, pkey)),
    }
}

fn syscall_step(
    thread: ThreadId,
    class: CostClass,
    pkey: ProtectionKey,
    result: Result<(), SyscallError>,
) -> Step {
    match result {
        Ok(()) => Step::ok(Some(class)),
        Err(err) => Step::error(
            class,
            err,
            Fault::bare(thread, FaultCause::SyscallError, pkey),
        ),
    }
}

/// Cycle totals partitioned by event class and by thread. The grand total
/// equals the sum of either partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub total: u64,
    pub by_class: BTreeMap<CostClass, u64>,
    pub by_thread: BTreeMap<ThreadId, u64>,
}

/// Tallies the charges recorded in an event log.
pub fn cost_report(log: &EventLog) -> CostReport {
    let mut by_class: BTreeMap<CostClass, u64> = CostClass::ALL.iter().map(|c| (*c, 0)).collect();
    let mut by_thread = BTreeMap::new();
    let mut total = 0;
    for record in &log.records {
        if let Some((thread, class, cycles)) = record.charge() {
            *by_class.get_mut(&class).expect("all classes present") += cycles;
            *by_thread.entry(thread).or_insert(0) += cycles;
            total += cycles;
        }
    }
    debug_assert_eq!(total, log.total_cycles);
    CostReport {
        total,
        by_class,
        by_thread,
    }
}
