//! The modified MMU: page table, data TLB, the `PKR` permission store, and
//! the effective-permission check applied to every data access.
//!
//! For each load or store, the effective permission is the intersection of
//! the PTE's R/W bits and the accessed page's pkey pair: the pkey layer can
//! only remove rights, never add them. A `(0,0)` pair is the identity and
//! defers entirely to the PTE. Protection keys never gate instruction
//! fetch; only data accesses are checked.

mod dtlb;
mod page;
mod pkr;

pub use dtlb::{DTLB_ENTRIES, Dtlb};
pub use page::{PageRange, PageTable, Prot, PteEntry, VPN_BITS, Vpn};
pub use pkr::{
    KEY_COUNT, KEYS_PER_ROW, KeyBitmap, PKR_ROWS, PermPair, PkrStore, ProtectionKey, pack_perm,
    unpack_perm,
};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a simulated thread.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThreadId(pub u32);

impl fmt::Display for ThreadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// Kind of data access; instruction fetch is not modeled.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum AccessKind {
    Load,
    Store,
}

/// One data access to check: which page, which kind, which thread.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AccessRequest {
    pub page: Vpn,
    pub kind: AccessKind,
    pub thread: ThreadId,
}

/// Why an operation faulted.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum FaultCause {
    /// The PTE itself denied the access.
    PteDenied,
    /// The PTE would have allowed the access; the pkey pair denied it.
    PkeyDenied,
    /// The page is not mapped.
    InvalidPage,
    /// A seal blocked a permission update.
    SealViolation,
    /// A syscall returned an error.
    SyscallError,
}

impl fmt::Display for FaultCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A pkey-attributed exception record. Page and kind are present for memory
/// faults; `pkey` names the involved domain where one is attributable and is
/// key 0 otherwise.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Fault {
    pub thread: ThreadId,
    pub cause: FaultCause,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub page: Option<Vpn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<AccessKind>,
    pub pkey: ProtectionKey,
}

impl Fault {
    /// A fault raised by a memory access.
    pub fn access(req: &AccessRequest, cause: FaultCause, pkey: ProtectionKey) -> Fault {
        Fault {
            thread: req.thread,
            cause,
            page: Some(req.page),
            kind: Some(req.kind),
            pkey,
        }
    }

    /// A fault not tied to a memory page (seal or syscall).
    pub fn bare(thread: ThreadId, cause: FaultCause, pkey: ProtectionKey) -> Fault {
        Fault {
            thread,
            cause,
            page: None,
            kind: None,
            pkey,
        }
    }
}

/// Effective R/W permission of one page for one thread: the intersection of
/// the PTE permissions and the pkey pair.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EffectivePerm {
    pub read: bool,
    pub write: bool,
}

/// Intersects the PTE permissions with the pkey pair. The entry must be
/// valid; invalid entries never reach this check.
pub fn effective_permission(pte: &PteEntry, pair: PermPair) -> EffectivePerm {
    debug_assert!(pte.valid);
    EffectivePerm {
        read: pte.readable && !pair.read_disable,
        write: pte.writable && !pair.write_disable,
    }
}

/// Checks one access against an already-looked-up PTE and pair. On denial
/// the fault cause distinguishes whether the PTE alone would have allowed
/// the access (`PkeyDenied`) or not (`PteDenied`).
pub fn check_access_pte(req: &AccessRequest, pte: &PteEntry, pair: PermPair) -> Result<(), Fault> {
    if !pte.valid {
        return Err(Fault::access(
            req,
            FaultCause::InvalidPage,
            ProtectionKey::DEFAULT,
        ));
    }
    let eff = effective_permission(pte, pair);
    let (allowed, pte_allowed) = match req.kind {
        AccessKind::Load => (eff.read, pte.readable),
        AccessKind::Store => (eff.write, pte.writable),
    };
    if allowed {
        return Ok(());
    }
    let cause = if pte_allowed {
        FaultCause::PkeyDenied
    } else {
        FaultCause::PteDenied
    };
    Err(Fault::access(req, cause, pte.pkey))
}

/// Checks one access straight against the page table and PKR store, with no
/// TLB in between. Never mutates state.
pub fn check_access(
    req: &AccessRequest,
    page_table: &PageTable,
    pkr: &PkrStore,
) -> Result<(), Fault> {
    let pte = page_table.get(req.page);
    let pair = pkr.pair(pte.pkey);
    check_access_pte(req, &pte, pair)
}
