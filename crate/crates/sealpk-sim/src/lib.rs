//! A functional, desk-scale simulator of SealPK-style sealable memory
//! protection keys.
//!
//! The model covers per-page 10-bit protection keys housed in the reserved
//! PTE bits, a 1024-entry permission store (`PKR`) read and written a row
//! at a time by user-level instructions, kernel support with lazy key
//! de-allocation that removes the key use-after-free hazard, and three
//! sealing mechanisms that protect a domain's membership, its pages, and
//! its permission bits from tampering. A deterministic trace machine
//! executes multi-threaded scenarios against these mechanisms with a flat
//! cycle-cost model, and a shadow-stack case study reproduces the classic
//! isolation trade-off: permission toggling via row writes versus
//! `mprotect` round trips.
//!
//! Entry points:
//! - [`scenario::parse_scenario`] / [`scenario::run_scenario`] for running
//!   scenario files;
//! - [`builtins::builtin`] for the shipped attack and demo scenarios;
//! - [`shadow_stack`] for the instrumentation case study;
//! - [`mmu`], [`seal`], [`kernel`], [`machine`] for the pieces themselves.

pub mod builtins;
pub mod cost;
pub mod event;
pub mod kernel;
pub mod machine;
pub mod mmu;
pub mod report;
pub mod scenario;
pub mod seal;
pub mod shadow_stack;

pub use cost::{CostClass, CostModel};
pub use event::{EventLog, Op, Outcome, SyscallOp, TraceEvent};
pub use kernel::{Kernel, PkrSet, SyscallError};
pub use machine::{CostReport, Machine, SimConfig, cost_report};
pub use mmu::{
    AccessKind, Fault, FaultCause, PageRange, PermPair, PkrStore, Prot, ProtectionKey, ThreadId,
    Vpn,
};
pub use scenario::{Scenario, parse_scenario, render_scenario, run_scenario};
pub use seal::{PermissibleRange, PkCam, SealReg};
