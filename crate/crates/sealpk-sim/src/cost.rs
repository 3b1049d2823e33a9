//! Cycle-cost model: a flat per-event-class charge table.
//!
//! Total cost of a run is the sum of per-event charges, so costs are
//! additive and order-independent for a fixed trace; only the number of
//! context switches depends on scheduling, and that is fully determined by
//! the yield structure.
//!
//! Default charges:
//!
//! | class            | cycles | note                                        |
//! |------------------|-------:|---------------------------------------------|
//! | `load`           |      1 | simulator parameter                          |
//! | `store`          |      1 | simulator parameter                          |
//! | `wrpkr`          |    135 | midpoint of the measured 11–260 cycle range  |
//! | `rdpkr`          |     20 | simulator parameter                          |
//! | `mprotect`       |  1,094 | measured average for the mprotect syscall    |
//! | `pkey_syscall`   |    500 | simulator parameter (all other syscalls)     |
//! | `context_switch` |    200 | simulator parameter                          |
//! | `cam_refill`     |    300 | simulator parameter                          |
//!
//! Seal staging instructions and the `Call`/`Return`/`Yield` markers carry
//! no charge; `SmashStack` is charged as a store.

use serde::{Deserialize, Serialize};

/// The chargeable event classes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostClass {
    Load,
    Store,
    Wrpkr,
    Rdpkr,
    Mprotect,
    PkeySyscall,
    ContextSwitch,
    CamRefill,
}

impl CostClass {
    pub const ALL: [CostClass; 8] = [
        CostClass::Load,
        CostClass::Store,
        CostClass::Wrpkr,
        CostClass::Rdpkr,
        CostClass::Mprotect,
        CostClass::PkeySyscall,
        CostClass::ContextSwitch,
        CostClass::CamRefill,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostClass::Load => "load",
            CostClass::Store => "store",
            CostClass::Wrpkr => "wrpkr",
            CostClass::Rdpkr => "rdpkr",
            CostClass::Mprotect => "mprotect",
            CostClass::PkeySyscall => "pkey_syscall",
            CostClass::ContextSwitch => "context_switch",
            CostClass::CamRefill => "cam_refill",
        }
    }
}

/// Cycles charged per event class. Deserializes partially: absent fields
/// keep their defaults.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub load: u64,
    pub store: u64,
    pub wrpkr: u64,
    pub rdpkr: u64,
    pub mprotect: u64,
    pub pkey_syscall: u64,
    pub context_switch: u64,
    pub cam_refill: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            load: 1,
            store: 1,
            wrpkr: 135,
            rdpkr: 20,
            mprotect: 1094,
            pkey_syscall: 500,
            context_switch: 200,
            cam_refill: 300,
        }
    }
}

impl CostModel {
    pub fn charge(&self, class: CostClass) -> u64 {
        match class {
            CostClass::Load => self.load,
            CostClass::Store => self.store,
            CostClass::Wrpkr => self.wrpkr,
            CostClass::Rdpkr => self.rdpkr,
            CostClass::Mprotect => self.mprotect,
            CostClass::PkeySyscall => self.pkey_syscall,
            CostClass::ContextSwitch => self.context_switch,
            CostClass::CamRefill => self.cam_refill,
        }
    }
}
