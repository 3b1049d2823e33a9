//! Data TLB model: a fully associative cache over the page table whose
//! entries carry the per-page protection key alongside the R/W/X bits.
//!
//! The cache must be functionally transparent: with correct invalidation, a
//! lookup is observationally equal to a direct page-table read. Geometry is
//! 32 entries with FIFO replacement; invalid (unmapped) results are never
//! cached, so a later mapping needs no negative-entry shootdown.

use std::collections::VecDeque;

use super::page::{PageTable, PteEntry, Vpn};

/// Number of DTLB entries.
pub const DTLB_ENTRIES: usize = 32;

#[derive(Clone, Debug)]
pub struct Dtlb {
    entries: VecDeque<(Vpn, PteEntry)>,
    hits: u64,
    misses: u64,
}

impl Default for Dtlb {
    fn default() -> Self {
        Dtlb::new()
    }
}

impl Dtlb {
    pub fn new() -> Dtlb {
        Dtlb {
            entries: VecDeque::with_capacity(DTLB_ENTRIES),
            hits: 0,
            misses: 0,
        }
    }

    /// Returns the PTE for `page`, from the cache on a hit or from the page
    /// table on a miss (inserting the entry, evicting the oldest one when
    /// full). The returned entry equals the page-table entry bit for bit,
    /// including the pkey.
    pub fn lookup(&mut self, page: Vpn, page_table: &PageTable) -> PteEntry {
        if let Some((_, pte)) = self.entries.iter().find(|(vpn, _)| *vpn == page) {
            self.hits += 1;
            return *pte;
        }
        self.misses += 1;
        let pte = page_table.get(page);
        if pte.valid {
            if self.entries.len() == DTLB_ENTRIES {
                self.entries.pop_front();
            }
            self.entries.push_back((page, pte));
        }
        pte
    }

    /// Drops the cached entry for `page`, if any. Every operation that
    /// rewrites a PTE must call this for the affected pages.
    pub fn invalidate(&mut self, page: Vpn) {
        self.entries.retain(|(vpn, _)| *vpn != page);
    }

    pub fn flush(&mut self) {
        self.entries.clear();
    }

    /// True if `page` is currently cached.
    pub fn is_cached(&self, page: Vpn) -> bool {
        self.entries.iter().any(|(vpn, _)| *vpn == page)
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}
