//! The simulated OS layer: pkey lifecycle syscalls, lazy de-allocation,
//! domain/page seal maps, and page mapping with per-key page counting.
//!
//! Key allocation hands out the lowest free, non-dirty key; key 0 is the
//! always-allocated default domain and can never be freed or sealed. A new
//! key's permission pair is initialized in the caller's PKR; every other
//! thread gets deny-all for it.
//!
//! Freeing a key whose domain still has mapped pages takes the lazy path:
//! the key is marked dirty (still unallocatable), its pair is forced to
//! `(0,0)` in every thread so the page-table permissions alone decide, and
//! a counter map tracks the remaining pages. Each page that leaves the
//! domain decrements the counter; at zero the dirty bit is erased and the
//! key becomes allocatable again. With `lazy_dealloc` disabled the kernel
//! behaves like the classic protection-key implementations: freeing only
//! clears the allocation bit, stale pages keep their tag, and a later
//! allocation of the same key silently shares it with them — the key
//! use-after-free hazard this design exists to remove.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::mmu::{
    Dtlb, KEY_COUNT, KeyBitmap, PageRange, PageTable, PermPair, PkrStore, Prot, ProtectionKey,
    PteEntry, ThreadId,
};

/// Error results of the simulated syscalls.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum SyscallError {
    /// No free, non-dirty key is available.
    NoFreeKey,
    /// The named key is unallocated, dirty, or the reserved key 0.
    InvalidKey,
    /// A seal forbids the requested change.
    #[serde(rename = "EPERM")]
    PermissionDenied,
    /// A target page is not mapped.
    UnmappedPage,
    /// A target page is already mapped.
    AlreadyMapped,
    /// Permission-seal commit without a complete, ordered staged range.
    InvalidSealRange,
}

impl fmt::Display for SyscallError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyscallError::PermissionDenied => write!(f, "EPERM"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl std::error::Error for SyscallError {}

/// The per-thread PKR images. The running thread's store is the live one;
/// a context switch is modeled as save/restore against this set.
#[derive(Clone, Debug)]
pub struct PkrSet {
    stores: BTreeMap<ThreadId, PkrStore>,
}

impl PkrSet {
    pub fn new(threads: impl IntoIterator<Item = ThreadId>) -> PkrSet {
        PkrSet {
            stores: threads.into_iter().map(|t| (t, PkrStore::new())).collect(),
        }
    }

    pub fn get(&self, thread: ThreadId) -> &PkrStore {
        self.stores.get(&thread).expect("unknown thread")
    }

    pub fn get_mut(&mut self, thread: ThreadId) -> &mut PkrStore {
        self.stores.get_mut(&thread).expect("unknown thread")
    }

    pub fn threads(&self) -> impl Iterator<Item = ThreadId> + '_ {
        self.stores.keys().copied()
    }

    fn for_each_mut(&mut self, mut f: impl FnMut(ThreadId, &mut PkrStore)) {
        for (t, store) in self.stores.iter_mut() {
            f(*t, store);
        }
    }
}

/// Kernel state: allocation/dirty/seal bitmaps, the per-key page counter
/// map, and the page table.
#[derive(Clone, Debug)]
pub struct Kernel {
    lazy_dealloc: bool,
    alloc_map: KeyBitmap,
    dirty_map: KeyBitmap,
    counter_map: Vec<u32>,
    sealed_domain: KeyBitmap,
    sealed_page: KeyBitmap,
    page_table: PageTable,
}

impl Kernel {
    pub fn new(lazy_dealloc: bool) -> Kernel {
        let mut alloc_map = KeyBitmap::new();
        alloc_map.set(ProtectionKey::DEFAULT);
        Kernel {
            lazy_dealloc,
            alloc_map,
            dirty_map: KeyBitmap::new(),
            counter_map: vec![0; KEY_COUNT],
            sealed_domain: KeyBitmap::new(),
            sealed_page: KeyBitmap::new(),
            page_table: PageTable::new(),
        }
    }

    pub fn lazy_dealloc(&self) -> bool {
        self.lazy_dealloc
    }

    pub fn page_table(&self) -> &PageTable {
        &self.page_table
    }

    pub fn is_allocated(&self, key: ProtectionKey) -> bool {
        self.alloc_map.get(key)
    }

    pub fn is_dirty(&self, key: ProtectionKey) -> bool {
        self.dirty_map.get(key)
    }

    /// Pages currently counted against `key`'s domain.
    pub fn page_count(&self, key: ProtectionKey) -> u32 {
        self.counter_map[key.value() as usize]
    }

    pub fn is_domain_sealed(&self, key: ProtectionKey) -> bool {
        self.sealed_domain.get(key)
    }

    pub fn is_page_sealed(&self, key: ProtectionKey) -> bool {
        self.sealed_page.get(key)
    }

    /// Allocates the lowest free, non-dirty key. The caller's pair for the
    /// new key becomes `init_perm`; every other thread's pair becomes
    /// deny-all.
    pub fn pkey_alloc(
        &mut self,
        pkrs: &mut PkrSet,
        caller: ThreadId,
        init_perm: PermPair,
    ) -> Result<ProtectionKey, SyscallError> {
        let key = self
            .alloc_map
            .first_clear_from(1)
            .ok_or(SyscallError::NoFreeKey)?;
        self.alloc_map.set(key);
        pkrs.for_each_mut(|t, store| {
            store.set_pair(
                key,
                if t == caller {
                    init_perm
                } else {
                    PermPair::DENY_ALL
                },
            );
        });
        Ok(key)
    }

    /// Frees a key. With no pages left the key is released immediately and
    /// is re-allocatable. Otherwise the lazy path marks it dirty and forces
    /// its pair to `(0,0)` in every thread; in non-lazy mode the allocation
    /// bit is simply cleared, leaving stale page tags behind.
    pub fn pkey_free(&mut self, pkrs: &mut PkrSet, key: ProtectionKey) -> Result<(), SyscallError> {
        if key.is_default() || !self.alloc_map.get(key) || self.dirty_map.get(key) {
            return Err(SyscallError::InvalidKey);
        }
        if self.page_count(key) == 0 || !self.lazy_dealloc {
            self.alloc_map.clear(key);
            self.release_seals(key);
        } else {
            self.dirty_map.set(key);
            pkrs.for_each_mut(|_, store| store.set_pair(key, PermPair::UNRESTRICTED));
        }
        Ok(())
    }

    /// Bookkeeping for one page leaving `key`'s domain (unmap or re-key).
    /// When a dirty key's count drains to zero the key is fully released.
    pub fn page_unmapped_hook(&mut self, key: ProtectionKey) {
        let count = &mut self.counter_map[key.value() as usize];
        assert!(*count > 0, "page counter underflow for pkey {key}");
        *count -= 1;
        if *count == 0 && self.dirty_map.get(key) {
            self.dirty_map.clear(key);
            self.alloc_map.clear(key);
            self.release_seals(key);
        }
    }

    /// Maps fresh pages with the given protections, keyed to the default
    /// domain.
    pub fn mmap(&mut self, pages: PageRange, prot: Prot) -> Result<(), SyscallError> {
        if pages.iter().any(|p| self.page_table.is_mapped(p)) {
            return Err(SyscallError::AlreadyMapped);
        }
        for page in pages.iter() {
            self.page_table.insert(page, PteEntry::mapped(prot));
            self.counter_map[0] += 1;
        }
        Ok(())
    }

    /// Unmaps pages, decrementing their domains' page counters and shooting
    /// down the affected DTLB entries. Unmapping is always allowed, sealed
    /// or not: freeing a domain's pages is the one way a seal dies.
    pub fn munmap(&mut self, dtlb: &mut Dtlb, pages: PageRange) -> Result<(), SyscallError> {
        if pages.iter().any(|p| !self.page_table.is_mapped(p)) {
            return Err(SyscallError::UnmappedPage);
        }
        for page in pages.iter() {
            let pte = self.page_table.remove(page).expect("checked mapped");
            self.page_unmapped_hook(pte.pkey);
            dtlb.invalidate(page);
        }
        Ok(())
    }

    /// Changes page protections and assigns the pages to `key`'s domain.
    ///
    /// Rejected when `key` is unallocated or dirty, when any target page's
    /// current domain is sealed (neither PTE permissions nor the key may
    /// change then), or when `key`'s pages are sealed and a target page is
    /// not already in the domain. Checks run before any page is touched.
    pub fn pkey_mprotect(
        &mut self,
        dtlb: &mut Dtlb,
        pages: PageRange,
        prot: Prot,
        key: ProtectionKey,
    ) -> Result<(), SyscallError> {
        if !self.alloc_map.get(key) || self.dirty_map.get(key) {
            return Err(SyscallError::InvalidKey);
        }
        if pages.iter().any(|p| !self.page_table.is_mapped(p)) {
            return Err(SyscallError::UnmappedPage);
        }
        for page in pages.iter() {
            let current = self.page_table.get(page).pkey;
            if self.sealed_domain.get(current) {
                return Err(SyscallError::PermissionDenied);
            }
            if self.sealed_page.get(key) && current != key {
                return Err(SyscallError::PermissionDenied);
            }
        }
        for page in pages.iter() {
            let old = self.page_table.get(page).pkey;
            {
                let pte = self.page_table.get_mut(page).expect("checked mapped");
                pte.set_prot(prot);
                pte.pkey = key;
            }
            if old != key {
                self.counter_map[key.value() as usize] += 1;
                self.page_unmapped_hook(old);
            }
            dtlb.invalidate(page);
        }
        Ok(())
    }

    /// Changes page protections only, preserving each page's key. Pages of
    /// a sealed domain are rejected: the domain seal covers PTE permissions
    /// as well as the key value.
    pub fn mprotect(
        &mut self,
        dtlb: &mut Dtlb,
        pages: PageRange,
        prot: Prot,
    ) -> Result<(), SyscallError> {
        if pages.iter().any(|p| !self.page_table.is_mapped(p)) {
            return Err(SyscallError::UnmappedPage);
        }
        if pages
            .iter()
            .any(|p| self.sealed_domain.get(self.page_table.get(p).pkey))
        {
            return Err(SyscallError::PermissionDenied);
        }
        for page in pages.iter() {
            self.page_table
                .get_mut(page)
                .expect("checked mapped")
                .set_prot(prot);
            dtlb.invalidate(page);
        }
        Ok(())
    }

    /// ORs the requested seal bits into the key's seal state. Seals are
    /// irreversible while the key lives; they clear only when the key and
    /// all its pages have been released.
    pub fn pkey_seal(
        &mut self,
        key: ProtectionKey,
        seal_domain: bool,
        seal_page: bool,
    ) -> Result<(), SyscallError> {
        if key.is_default() || !self.alloc_map.get(key) || self.dirty_map.get(key) {
            return Err(SyscallError::InvalidKey);
        }
        if seal_domain {
            self.sealed_domain.set(key);
        }
        if seal_page {
            self.sealed_page.set(key);
        }
        Ok(())
    }

    fn release_seals(&mut self, key: ProtectionKey) {
        self.sealed_domain.clear(key);
        self.sealed_page.clear(key);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vpn(v: u64) -> crate::mmu::Vpn {
        crate::mmu::Vpn::new(v).unwrap()
    }

    fn range(start: u64, count: u32) -> PageRange {
        PageRange::new(vpn(start), count).unwrap()
    }

    fn key(v: u16) -> ProtectionKey {
        ProtectionKey::new(v).unwrap()
    }

    fn fresh(lazy: bool) -> (Kernel, PkrSet, Dtlb) {
        (
            Kernel::new(lazy),
            PkrSet::new([ThreadId(0), ThreadId(1)]),
            Dtlb::new(),
        )
    }

    /// Independent oracle: count pages of a domain by scanning the table.
    fn scan_count(kernel: &Kernel, k: ProtectionKey) -> u32 {
        kernel
            .page_table()
            .iter()
            .filter(|(_, pte)| pte.pkey == k)
            .count() as u32
    }

    #[test]
    fn alloc_hands_out_lowest_key_and_initializes_pairs() {
        let (mut kernel, mut pkrs, _) = fresh(true);
        let init = PermPair::READ_ONLY;
        let k = kernel.pkey_alloc(&mut pkrs, ThreadId(0), init).unwrap();
        assert_eq!(k.value(), 1);
        assert_eq!(pkrs.get(ThreadId(0)).pair(k), init);
        assert_eq!(pkrs.get(ThreadId(1)).pair(k), PermPair::DENY_ALL);
    }

    #[test]
    fn exactly_1023_allocations_then_no_free_key() {
        let (mut kernel, mut pkrs, _) = fresh(true);
        for expected in 1..KEY_COUNT as u16 {
            let k = kernel
                .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
                .unwrap();
            assert_eq!(k.value(), expected);
        }
        assert_eq!(
            kernel.pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED),
            Err(SyscallError::NoFreeKey)
        );
    }

    #[test]
    fn alloc_skips_dirty_key() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        for _ in 1..=5 {
            kernel
                .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
                .unwrap();
        }
        kernel.mmap(range(10, 1), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(10, 1), Prot::RW, key(5))
            .unwrap();
        kernel.pkey_free(&mut pkrs, key(5)).unwrap();
        assert!(kernel.is_dirty(key(5)));
        let next = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        assert_eq!(next.value(), 6, "dirty key 5 skipped");
    }

    #[test]
    fn free_with_no_pages_is_immediately_reusable() {
        let (mut kernel, mut pkrs, _) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.pkey_free(&mut pkrs, k).unwrap();
        assert!(!kernel.is_dirty(k));
        let again = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        assert_eq!(again, k);
    }

    #[test]
    fn lazy_free_forces_pair_to_unrestricted_everywhere() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::DENY_ALL)
            .unwrap();
        kernel.mmap(range(20, 5), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(20, 5), Prot::RW, k)
            .unwrap();
        kernel.pkey_free(&mut pkrs, k).unwrap();
        assert!(kernel.is_dirty(k));
        assert!(kernel.is_allocated(k), "dirty key still unallocatable");
        for t in [ThreadId(0), ThreadId(1)] {
            assert_eq!(pkrs.get(t).pair(k), PermPair::UNRESTRICTED);
        }
    }

    #[test]
    fn double_free_is_invalid() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(1, 1), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(1, 1), Prot::RW, k)
            .unwrap();
        kernel.pkey_free(&mut pkrs, k).unwrap();
        assert_eq!(
            kernel.pkey_free(&mut pkrs, k),
            Err(SyscallError::InvalidKey)
        );
        assert_eq!(
            kernel.pkey_free(&mut pkrs, ProtectionKey::DEFAULT),
            Err(SyscallError::InvalidKey)
        );
    }

    #[test]
    fn non_lazy_free_reissues_key_with_stale_pages() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(false);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(30, 2), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(30, 2), Prot::RW, k)
            .unwrap();
        kernel.pkey_free(&mut pkrs, k).unwrap();

        // The stale pages still carry the tag, and the very same key comes
        // back from the next allocation: old and new domain now share it.
        let again = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        assert_eq!(again, k);
        assert_eq!(scan_count(&kernel, k), 2);
    }

    #[test]
    fn dirty_key_drains_page_by_page() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(40, 3), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(40, 3), Prot::RW, k)
            .unwrap();
        kernel.pkey_free(&mut pkrs, k).unwrap();

        kernel.munmap(&mut dtlb, range(40, 1)).unwrap();
        assert!(kernel.is_dirty(k));
        kernel.munmap(&mut dtlb, range(41, 1)).unwrap();
        assert!(kernel.is_dirty(k));
        kernel.munmap(&mut dtlb, range(42, 1)).unwrap();
        assert!(!kernel.is_dirty(k), "dirty bit erased at count zero");
        assert!(!kernel.is_allocated(k), "key fully released");
        assert_eq!(scan_count(&kernel, k), 0);
    }

    #[test]
    fn unmap_decrements_counter_of_live_key() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(50, 4), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(50, 4), Prot::RW, k)
            .unwrap();
        assert_eq!(kernel.page_count(k), 4);
        kernel.munmap(&mut dtlb, range(50, 1)).unwrap();
        assert_eq!(kernel.page_count(k), 3);
        assert!(kernel.is_allocated(k));
        assert_eq!(kernel.page_count(k), scan_count(&kernel, k));
    }

    #[test]
    fn sealed_domain_blocks_rekeying_and_mprotect() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let log_key = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::READ_ONLY)
            .unwrap();
        kernel.mmap(range(100, 2), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(100, 2), Prot::RW, log_key)
            .unwrap();
        kernel.pkey_seal(log_key, true, false).unwrap();

        // Re-keying the pages to a fresh key is denied.
        let attacker = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        assert_eq!(
            kernel.pkey_mprotect(&mut dtlb, range(100, 2), Prot::RW, attacker),
            Err(SyscallError::PermissionDenied)
        );
        // So is a plain mprotect of the sealed domain's pages.
        assert_eq!(
            kernel.mprotect(&mut dtlb, range(100, 2), Prot::RW),
            Err(SyscallError::PermissionDenied)
        );
        assert_eq!(kernel.page_table().get(vpn(100)).pkey, log_key);
    }

    #[test]
    fn sealed_pages_block_adding_but_not_reprotecting_members() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::READ_ONLY)
            .unwrap();
        kernel.mmap(range(100, 2), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(100, 2), Prot::RW, k)
            .unwrap();
        kernel.pkey_seal(k, false, true).unwrap();

        // Pages outside the domain cannot join it.
        kernel.mmap(range(200, 1), Prot::RW).unwrap();
        assert_eq!(
            kernel.pkey_mprotect(&mut dtlb, range(200, 1), Prot::R, k),
            Err(SyscallError::PermissionDenied)
        );
        // Member pages can still be re-protected (domain not sealed).
        kernel
            .pkey_mprotect(&mut dtlb, range(100, 2), Prot::R, k)
            .unwrap();
        assert!(!kernel.page_table().get(vpn(100)).writable);
    }

    #[test]
    fn seal_bits_are_sticky_and_key0_unsealable() {
        let (mut kernel, mut pkrs, _) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.pkey_seal(k, true, true).unwrap();
        kernel.pkey_seal(k, false, false).unwrap();
        assert!(kernel.is_domain_sealed(k) && kernel.is_page_sealed(k));
        assert_eq!(
            kernel.pkey_seal(ProtectionKey::DEFAULT, true, true),
            Err(SyscallError::InvalidKey)
        );
    }

    #[test]
    fn seals_release_only_when_key_fully_freed() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(60, 2), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(60, 2), Prot::RW, k)
            .unwrap();
        kernel.pkey_seal(k, true, true).unwrap();

        kernel.pkey_free(&mut pkrs, k).unwrap();
        assert!(
            kernel.is_domain_sealed(k),
            "seal survives while pages remain"
        );
        kernel.munmap(&mut dtlb, range(60, 2)).unwrap();
        assert!(!kernel.is_domain_sealed(k));
        assert!(!kernel.is_page_sealed(k));
    }

    #[test]
    fn mprotect_on_dirty_key_rejected() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(70, 1), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(70, 1), Prot::RW, k)
            .unwrap();
        kernel.pkey_free(&mut pkrs, k).unwrap();
        kernel.mmap(range(71, 1), Prot::RW).unwrap();
        assert_eq!(
            kernel.pkey_mprotect(&mut dtlb, range(71, 1), Prot::RW, k),
            Err(SyscallError::InvalidKey),
            "a lazily freed key must not grow"
        );
    }

    #[test]
    fn plain_mprotect_preserves_pkey() {
        let (mut kernel, mut pkrs, mut dtlb) = fresh(true);
        let k = kernel
            .pkey_alloc(&mut pkrs, ThreadId(0), PermPair::UNRESTRICTED)
            .unwrap();
        kernel.mmap(range(80, 1), Prot::RW).unwrap();
        kernel
            .pkey_mprotect(&mut dtlb, range(80, 1), Prot::RW, k)
            .unwrap();
        kernel.mprotect(&mut dtlb, range(80, 1), Prot::R).unwrap();
        let pte = kernel.page_table().get(vpn(80));
        assert_eq!(pte.pkey, k);
        assert!(!pte.writable);
    }

    #[test]
    fn mmap_rejects_overlap_and_counts_default_domain() {
        let (mut kernel, _, _) = fresh(true);
        kernel.mmap(range(90, 2), Prot::RW).unwrap();
        assert_eq!(
            kernel.mmap(range(91, 2), Prot::RW),
            Err(SyscallError::AlreadyMapped)
        );
        assert_eq!(kernel.page_count(ProtectionKey::DEFAULT), 2);
    }
}
