//! Permission sealing: `SealReg`, the PK-CAM, and the gate consulted before
//! every `WRPKR`.
//!
//! A developer stages a contiguous range of instruction addresses for a key
//! with the `seal_start`/`seal_end` instructions and commits it with the
//! permission-seal syscall. Commitment behaves like a one-time fuse: the
//! sealed bit of a key transitions false to true at most once per process,
//! and the committed range is immutable afterwards. Once a key is sealed,
//! a `WRPKR` that changes that key's permission pair is allowed only when
//! executed from inside the committed range; from anywhere else it raises
//! an exception and the row is left untouched.
//!
//! Because `WRPKR` overwrites a whole 64-bit row, a write can change a
//! sealed key other than the one named by the instruction. The gate
//! therefore checks every sealed key whose two bits actually differ between
//! the old and new row value; writes that leave a sealed key's bits
//! bit-identical pass, which keeps legitimate read-modify-write sequences
//! working.
//!
//! The PK-CAM caches committed ranges. A gate check that needs a range
//! absent from the CAM triggers a refill (modeled as a synchronous handler
//! with its own cycle charge) before the decision; hit or miss never
//! changes the decision itself, only the refill count.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::mmu::{KeyBitmap, ProtectionKey, unpack_perm};

/// A contiguous, inclusive range of instruction addresses.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct PermissibleRange {
    pub start: u64,
    pub end: u64,
}

impl PermissibleRange {
    pub fn contains(&self, addr: u64) -> bool {
        addr >= self.start && addr <= self.end
    }
}

impl fmt::Display for PermissibleRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:#x}, {:#x}]", self.start, self.end)
    }
}

/// Errors from seal staging and commitment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SealError {
    /// The key's fuse is already blown.
    AlreadySealed(ProtectionKey),
    /// Commit attempted without both a staged start and end address.
    IncompleteRange(ProtectionKey),
    /// Commit attempted with start > end.
    InvalidRange(ProtectionKey, u64, u64),
}

impl fmt::Display for SealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SealError::AlreadySealed(k) => write!(f, "pkey {k} is already sealed"),
            SealError::IncompleteRange(k) => {
                write!(f, "pkey {k} has no complete staged range")
            }
            SealError::InvalidRange(k, s, e) => {
                write!(f, "pkey {k} staged range start {s:#x} > end {e:#x}")
            }
        }
    }
}

impl std::error::Error for SealError {}

#[derive(Clone, Copy, Default, Debug)]
struct PendingRange {
    start: Option<u64>,
    end: Option<u64>,
}

/// Per-process seal state: the sealed bitmap, committed ranges, and staged
/// (pre-commit) ranges. Staging is mutable last-writer-wins; only commit
/// blows the fuse.
#[derive(Clone, Debug, Default)]
pub struct SealReg {
    sealed: KeyBitmap,
    ranges: BTreeMap<u16, PermissibleRange>,
    pending: BTreeMap<u16, PendingRange>,
}

/// Result of a CAM consultation for a sealed key.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CamLookup {
    Hit,
    /// The range was absent and has been refilled (oldest entry evicted if
    /// the CAM was full).
    Refilled,
}

/// The PK-CAM: a small content-addressed cache of committed permissible
/// ranges with FIFO replacement.
#[derive(Clone, Debug)]
pub struct PkCam {
    entries: VecDeque<(u16, PermissibleRange)>,
    capacity: usize,
    refill_count: u64,
}

impl PkCam {
    /// Builds a CAM; capacity must be at least 1.
    pub fn new(capacity: usize) -> PkCam {
        assert!(capacity >= 1, "PK-CAM capacity must be positive");
        PkCam {
            entries: VecDeque::new(),
            capacity,
            refill_count: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of refills performed so far.
    pub fn refill_count(&self) -> u64 {
        self.refill_count
    }

    pub fn contains(&self, key: ProtectionKey) -> bool {
        self.entries.iter().any(|(k, _)| *k == key.value())
    }

    fn insert(&mut self, key: ProtectionKey, range: PermissibleRange) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((key.value(), range));
    }

    /// Consults the CAM for a sealed key, refilling on a miss. `range` is
    /// the committed range from `SealReg`, which the handler would fetch.
    fn lookup(&mut self, key: ProtectionKey, range: PermissibleRange) -> CamLookup {
        if self.contains(key) {
            CamLookup::Hit
        } else {
            self.refill_count += 1;
            self.insert(key, range);
            CamLookup::Refilled
        }
    }
}

/// Outcome of gating one `WRPKR`.
#[derive(Clone, Debug)]
pub struct GateOutcome {
    /// Keys whose ranges were refilled into the CAM during this check, in
    /// check order.
    pub refilled: Vec<ProtectionKey>,
    /// `Ok` to apply the write, or the first sealed key whose bits change
    /// from outside its permissible range.
    pub verdict: Result<(), ProtectionKey>,
}

impl SealReg {
    pub fn new() -> SealReg {
        SealReg::default()
    }

    pub fn is_sealed(&self, key: ProtectionKey) -> bool {
        self.sealed.get(key)
    }

    /// The committed range of a sealed key.
    pub fn range(&self, key: ProtectionKey) -> Option<PermissibleRange> {
        self.ranges.get(&key.value()).copied()
    }

    /// Stages the start address of `key`'s permissible range. Overwrites any
    /// previously staged start; fails once the key is sealed.
    pub fn seal_start(&mut self, key: ProtectionKey, addr: u64) -> Result<(), SealError> {
        if self.is_sealed(key) {
            return Err(SealError::AlreadySealed(key));
        }
        self.pending.entry(key.value()).or_default().start = Some(addr);
        Ok(())
    }

    /// Stages the end address of `key`'s permissible range.
    pub fn seal_end(&mut self, key: ProtectionKey, addr: u64) -> Result<(), SealError> {
        if self.is_sealed(key) {
            return Err(SealError::AlreadySealed(key));
        }
        self.pending.entry(key.value()).or_default().end = Some(addr);
        Ok(())
    }

    /// Commits the staged range: blows the fuse, records the range, and
    /// pre-inserts it into the CAM (not counted as a refill). Fails if the
    /// key is already sealed, the staged range is incomplete, or its start
    /// exceeds its end.
    pub fn commit_perm_seal(
        &mut self,
        cam: &mut PkCam,
        key: ProtectionKey,
    ) -> Result<(), SealError> {
        if self.is_sealed(key) {
            return Err(SealError::AlreadySealed(key));
        }
        let pending = self.pending.get(&key.value()).copied().unwrap_or_default();
        let (start, end) = match (pending.start, pending.end) {
            (Some(s), Some(e)) => (s, e),
            _ => return Err(SealError::IncompleteRange(key)),
        };
        if start > end {
            return Err(SealError::InvalidRange(key, start, end));
        }
        let range = PermissibleRange { start, end };
        self.sealed.set(key);
        self.ranges.insert(key.value(), range);
        self.pending.remove(&key.value());
        cam.insert(key, range);
        Ok(())
    }

    /// Consults the CAM for one sealed key.
    pub fn cam_lookup(&self, cam: &mut PkCam, key: ProtectionKey) -> CamLookup {
        let range = self.range(key).expect("cam_lookup requires a sealed key");
        cam.lookup(key, range)
    }

    /// Gates a `WRPKR` of `new_row` over `old_row` in the row addressed by
    /// `pkey`, executed at `instr_addr`.
    ///
    /// Every sealed key in the row whose pair differs between the two row
    /// values must have `instr_addr` inside its committed range. Keys whose
    /// bits are left bit-identical are exempt, as are unsealed keys. Needed
    /// ranges absent from the CAM are refilled before the decision.
    pub fn gate_wrpkr(
        &self,
        cam: &mut PkCam,
        pkey: ProtectionKey,
        instr_addr: u64,
        old_row: u64,
        new_row: u64,
    ) -> GateOutcome {
        let mut refilled = Vec::new();
        for key in ProtectionKey::keys_of_row(pkey.row()) {
            let column = key.column();
            if unpack_perm(old_row, column) == unpack_perm(new_row, column) {
                continue;
            }
            if !self.is_sealed(key) {
                continue;
            }
            if self.cam_lookup(cam, key) == CamLookup::Refilled {
                refilled.push(key);
            }
            let range = self.range(key).expect("sealed key has a committed range");
            if !range.contains(instr_addr) {
                return GateOutcome {
                    refilled,
                    verdict: Err(key),
                };
            }
        }
        GateOutcome {
            refilled,
            verdict: Ok(()),
        }
    }

    /// Number of sealed keys.
    pub fn sealed_count(&self) -> usize {
        self.sealed.count_set()
    }
}
