//! Protection keys, permission pairs, and the `PKR` permission store.
//!
//! A protection key is a 10-bit tag stored in the page-table entry of every
//! virtual page; all pages carrying the same key form a protection domain.
//! Each key owns a 2-bit permission pair (read-disable, write-disable) held
//! in `PKR`, a small on-core memory of 32 rows where each 64-bit row packs
//! the pairs of 32 consecutive keys. The `RDPKR`/`WRPKR` instructions move
//! whole rows between registers and `PKR`; the upper 5 bits of a key select
//! the row and the lower 5 bits select the pair within it.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of distinct protection keys (10 tag bits).
pub const KEY_COUNT: usize = 1024;

/// Number of rows in the `PKR` permission store.
pub const PKR_ROWS: usize = 32;

/// Number of permission pairs packed into one 64-bit `PKR` row.
pub const KEYS_PER_ROW: usize = 32;

/// A 10-bit protection key. Key 0 is the reserved default domain that every
/// freshly mapped page belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct ProtectionKey(u16);

impl ProtectionKey {
    /// The reserved default domain, key 0.
    pub const DEFAULT: ProtectionKey = ProtectionKey(0);

    /// Builds a key, rejecting values outside `0..1024`.
    pub fn new(value: u16) -> Option<ProtectionKey> {
        (value < KEY_COUNT as u16).then_some(ProtectionKey(value))
    }

    /// The raw 10-bit value.
    pub fn value(self) -> u16 {
        self.0
    }

    /// Row index into `PKR`: the upper 5 bits of the key.
    pub fn row(self) -> usize {
        (self.0 >> 5) as usize
    }

    /// Column within the row: the lower 5 bits of the key.
    pub fn column(self) -> usize {
        (self.0 & 31) as usize
    }

    /// True for the reserved default key 0.
    pub fn is_default(self) -> bool {
        self.0 == 0
    }

    /// All 32 keys sharing PKR row `row`, in ascending order.
    pub fn keys_of_row(row: usize) -> impl Iterator<Item = ProtectionKey> {
        assert!(row < PKR_ROWS);
        (0..KEYS_PER_ROW as u16).map(move |c| ProtectionKey((row as u16) << 5 | c))
    }

    /// All 1024 keys in ascending order.
    pub fn all() -> impl Iterator<Item = ProtectionKey> {
        (0..KEY_COUNT as u16).map(ProtectionKey)
    }
}

impl TryFrom<u16> for ProtectionKey {
    type Error = String;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        ProtectionKey::new(value)
            .ok_or_else(|| format!("pkey {value} out of range (must be < 1024)"))
    }
}

impl From<ProtectionKey> for u16 {
    fn from(key: ProtectionKey) -> u16 {
        key.0
    }
}

impl fmt::Debug for ProtectionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pkey({})", self.0)
    }
}

impl fmt::Display for ProtectionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The 2-bit permission state of one protection key: a read-disable and a
/// write-disable bit. `(false, false)` imposes no restriction beyond the
/// page-table permissions; there is no execute-disable bit.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermPair {
    pub read_disable: bool,
    pub write_disable: bool,
}

impl PermPair {
    /// No pkey-level restriction; the PTE alone decides.
    pub const UNRESTRICTED: PermPair = PermPair::new(false, false);
    /// Reads allowed, writes disabled.
    pub const READ_ONLY: PermPair = PermPair::new(false, true);
    /// Writes allowed, reads disabled.
    pub const WRITE_ONLY: PermPair = PermPair::new(true, false);
    /// Both reads and writes disabled.
    pub const DENY_ALL: PermPair = PermPair::new(true, true);

    pub const fn new(read_disable: bool, write_disable: bool) -> PermPair {
        PermPair {
            read_disable,
            write_disable,
        }
    }

    /// Encodes the pair as 2 bits: bit 0 = read-disable, bit 1 = write-disable.
    pub fn to_bits(self) -> u64 {
        self.read_disable as u64 | (self.write_disable as u64) << 1
    }

    /// Decodes a pair from the low 2 bits of `bits`.
    pub fn from_bits(bits: u64) -> PermPair {
        PermPair::new(bits & 1 != 0, bits & 2 != 0)
    }
}

impl fmt::Display for PermPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(RD={},WD={})",
            self.read_disable as u8, self.write_disable as u8
        )
    }
}

/// Writes `pair` into `row_word` at `column`, leaving all other bits
/// untouched. Column `c` occupies bits `2c` (read-disable) and `2c + 1`
/// (write-disable), little-endian within the row.
pub fn pack_perm(pair: PermPair, column: usize, row_word: u64) -> u64 {
    assert!(column < KEYS_PER_ROW, "column {column} out of range");
    let shift = 2 * column;
    (row_word & !(0b11 << shift)) | pair.to_bits() << shift
}

/// Reads the pair stored at `column` of `row_word`.
pub fn unpack_perm(row_word: u64, column: usize) -> PermPair {
    assert!(column < KEYS_PER_ROW, "column {column} out of range");
    PermPair::from_bits(row_word >> (2 * column))
}

/// The 1024-entry permission store: 32 rows of 32 packed permission pairs.
///
/// `RDPKR` and `WRPKR` operate on whole rows; a row write replaces the pairs
/// of all 32 keys sharing that row. The store itself has no notion of key
/// allocation — that knowledge lives in the kernel.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PkrStore {
    rows: [u64; PKR_ROWS],
}

impl Default for PkrStore {
    fn default() -> Self {
        PkrStore {
            rows: [0; PKR_ROWS],
        }
    }
}

impl PkrStore {
    pub fn new() -> PkrStore {
        PkrStore::default()
    }

    /// `RDPKR`: returns the 64-bit row holding `pkey`'s pair.
    pub fn read_row(&self, pkey: ProtectionKey) -> u64 {
        self.rows[pkey.row()]
    }

    /// `WRPKR`: overwrites the row holding `pkey`'s pair. The caller is
    /// responsible for seal gating; this layer applies the write blindly.
    pub fn write_row(&mut self, pkey: ProtectionKey, row_word: u64) {
        self.rows[pkey.row()] = row_word;
    }

    /// The pair of a single key.
    pub fn pair(&self, pkey: ProtectionKey) -> PermPair {
        unpack_perm(self.rows[pkey.row()], pkey.column())
    }

    /// Replaces the pair of a single key, preserving its row-mates. This is
    /// the kernel-side maintenance path, not the `WRPKR` instruction.
    pub fn set_pair(&mut self, pkey: ProtectionKey, pair: PermPair) {
        self.rows[pkey.row()] = pack_perm(pair, pkey.column(), self.rows[pkey.row()]);
    }

    pub fn rows(&self) -> &[u64; PKR_ROWS] {
        &self.rows
    }
}

/// A 1024-bit map keyed by protection key, used for the kernel's allocation,
/// dirty, and seal maps and the seal unit's sealed bitmap.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct KeyBitmap([u64; KEY_COUNT / 64]);

impl KeyBitmap {
    pub fn new() -> KeyBitmap {
        KeyBitmap::default()
    }

    pub fn get(&self, key: ProtectionKey) -> bool {
        let i = key.value() as usize;
        self.0[i / 64] >> (i % 64) & 1 != 0
    }

    pub fn set(&mut self, key: ProtectionKey) {
        let i = key.value() as usize;
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, key: ProtectionKey) {
        let i = key.value() as usize;
        self.0[i / 64] &= !(1 << (i % 64));
    }

    /// Lowest key with a clear bit, scanning from `from` upward.
    pub fn first_clear_from(&self, from: u16) -> Option<ProtectionKey> {
        (from..KEY_COUNT as u16)
            .map(ProtectionKey)
            .find(|k| !self.get(*k))
    }

    pub fn count_set(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}
