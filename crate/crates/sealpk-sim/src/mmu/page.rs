//! Virtual pages, page protections, and the simulated page table.
//!
//! One simulated page is one virtual page number; byte offsets are not
//! modeled, since every mechanism here operates at page granularity.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pkr::ProtectionKey;

/// Virtual page numbers are 27 bits wide.
pub const VPN_BITS: u32 = 27;

/// A virtual page number, below `2^27`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Vpn(u32);

impl Vpn {
    pub fn new(value: u64) -> Option<Vpn> {
        (value < 1 << VPN_BITS).then_some(Vpn(value as u32))
    }

    pub fn value(self) -> u64 {
        self.0 as u64
    }
}

impl TryFrom<u64> for Vpn {
    type Error = String;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Vpn::new(value).ok_or_else(|| format!("page {value} out of range (must be < 2^27)"))
    }
}

impl From<Vpn> for u64 {
    fn from(vpn: Vpn) -> u64 {
        vpn.value()
    }
}

impl fmt::Debug for Vpn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vpn({:#x})", self.0)
    }
}

impl fmt::Display for Vpn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// A contiguous run of virtual pages, `start .. start + count`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPageRange", into = "RawPageRange")]
pub struct PageRange {
    start: Vpn,
    count: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPageRange {
    start: u64,
    count: u64,
}

impl PageRange {
    pub fn new(start: Vpn, count: u32) -> Option<PageRange> {
        let end = start.value().checked_add(count as u64)?;
        (count > 0 && end <= 1 << VPN_BITS).then_some(PageRange { start, count })
    }

    /// Single-page range.
    pub fn one(page: Vpn) -> PageRange {
        PageRange {
            start: page,
            count: 1,
        }
    }

    pub fn start(&self) -> Vpn {
        self.start
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = Vpn> + '_ {
        (0..self.count).map(|i| Vpn(self.start.0 + i))
    }

    pub fn contains(&self, page: Vpn) -> bool {
        page.0 >= self.start.0 && page.0 < self.start.0 + self.count
    }
}

impl TryFrom<RawPageRange> for PageRange {
    type Error = String;

    fn try_from(raw: RawPageRange) -> Result<Self, Self::Error> {
        let start = Vpn::try_from(raw.start)?;
        if raw.count == 0 {
            return Err("page range count must be at least 1".to_string());
        }
        let count =
            u32::try_from(raw.count).map_err(|_| "page range count too large".to_string())?;
        PageRange::new(start, count)
            .ok_or_else(|| format!("page range {}+{} exceeds 2^27", raw.start, raw.count))
    }
}

impl From<PageRange> for RawPageRange {
    fn from(range: PageRange) -> RawPageRange {
        RawPageRange {
            start: range.start.value(),
            count: range.count as u64,
        }
    }
}

/// Page-table R/W/X permission bits.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prot {
    pub r: bool,
    pub w: bool,
    pub x: bool,
}

impl Prot {
    pub const fn new(r: bool, w: bool, x: bool) -> Prot {
        Prot { r, w, x }
    }

    pub const RW: Prot = Prot::new(true, true, false);
    pub const R: Prot = Prot::new(true, false, false);
    pub const NONE: Prot = Prot::new(false, false, false);
}

impl fmt::Display for Prot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |on, c| if on { c } else { '-' };
        write!(f, "{}{}{}", b(self.r, 'r'), b(self.w, 'w'), b(self.x, 'x'))
    }
}

/// A page-table entry: validity, R/W/X bits, and the 10-bit protection key
/// housed in the PTE's reserved bits. Freshly mapped pages carry key 0.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct PteEntry {
    pub valid: bool,
    pub readable: bool,
    pub writable: bool,
    pub executable: bool,
    pub pkey: ProtectionKey,
}

impl PteEntry {
    /// The entry returned for unmapped pages; satisfies no access.
    pub const INVALID: PteEntry = PteEntry {
        valid: false,
        readable: false,
        writable: false,
        executable: false,
        pkey: ProtectionKey::DEFAULT,
    };

    /// A valid entry with the given protections, keyed to the default domain.
    pub fn mapped(prot: Prot) -> PteEntry {
        PteEntry {
            valid: true,
            readable: prot.r,
            writable: prot.w,
            executable: prot.x,
            pkey: ProtectionKey::DEFAULT,
        }
    }

    pub fn prot(&self) -> Prot {
        Prot::new(self.readable, self.writable, self.executable)
    }

    pub fn set_prot(&mut self, prot: Prot) {
        self.readable = prot.r;
        self.writable = prot.w;
        self.executable = prot.x;
    }
}

/// The simulated page table: a flat map from virtual page number to entry.
/// Only mapped pages are stored; lookups of absent pages yield
/// [`PteEntry::INVALID`].
#[derive(Clone, Debug, Default)]
pub struct PageTable {
    entries: BTreeMap<Vpn, PteEntry>,
}

impl PageTable {
    pub fn new() -> PageTable {
        PageTable::default()
    }

    /// Direct page-table read; invalid entry for unmapped pages.
    pub fn get(&self, page: Vpn) -> PteEntry {
        self.entries
            .get(&page)
            .copied()
            .unwrap_or(PteEntry::INVALID)
    }

    pub fn is_mapped(&self, page: Vpn) -> bool {
        self.entries.contains_key(&page)
    }

    pub fn insert(&mut self, page: Vpn, entry: PteEntry) {
        debug_assert!(entry.valid);
        self.entries.insert(page, entry);
    }

    pub fn remove(&mut self, page: Vpn) -> Option<PteEntry> {
        self.entries.remove(&page)
    }

    pub fn get_mut(&mut self, page: Vpn) -> Option<&mut PteEntry> {
        self.entries.get_mut(&page)
    }

    /// Iterates all mapped pages in ascending page order.
    pub fn iter(&self) -> impl Iterator<Item = (Vpn, &PteEntry)> {
        self.entries.iter().map(|(vpn, pte)| (*vpn, pte))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
