//! Block geometry, cell and sub-block state, and the two index maps.
//!
//! All positions are 0-based: cell `j` of a sub-block, bit `i` of the
//! information vector. The cyclic predecessor of cell `j` is cell
//! `(j + k - 1) % k`. An index map returns `None` where the sub-block
//! carries no index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FlashError, Result};

/// Largest supported number of cell levels (levels are stored as `u8`).
pub const MAX_LEVELS: usize = 256;

/// Geometry of one erase block: `n` cells, `k` information bits, `q` levels,
/// and `m = n / k` sub-blocks of `k` cells each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CodeParams {
    n: usize,
    k: usize,
    q: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    k: usize,
    q: usize,
    #[serde(default, skip_deserializing)]
    m: usize,
}

impl TryFrom<RawParams> for CodeParams {
    type Error = FlashError;

    fn try_from(raw: RawParams) -> Result<Self> {
        CodeParams::new(raw.n, raw.k, raw.q)
    }
}

impl From<CodeParams> for RawParams {
    fn from(p: CodeParams) -> Self {
        RawParams {
            n: p.n,
            k: p.k,
            q: p.q,
            m: p.m(),
        }
    }
}

impl CodeParams {
    pub fn new(n: usize, k: usize, q: usize) -> Result<Self> {
        if k == 0 || !k.is_multiple_of(2) {
            return Err(FlashError::InvalidParams(format!(
                "k must be a positive even number, got {k}"
            )));
        }
        if !(2..=MAX_LEVELS).contains(&q) {
            return Err(FlashError::InvalidParams(format!(
                "q must be in 2..={MAX_LEVELS}, got {q}"
            )));
        }
        if n < k {
            return Err(FlashError::InvalidParams(format!(
                "n = {n} leaves no sub-block of k = {k} cells"
            )));
        }
        Ok(CodeParams { n, k, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of sub-blocks, `floor(n / k)`.
    pub fn m(&self) -> usize {
        self.n / self.k
    }

    /// Highest cell level, `q - 1`.
    pub fn top(&self) -> u8 {
        (self.q - 1) as u8
    }

    /// Code rate `k / n`.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Increments one sub-block absorbs between empty and full, `k(q-1)`.
    pub fn sub_block_capacity(&self) -> usize {
        self.k * (self.q - 1)
    }

    /// Total increments one block absorbs, `n(q-1)`.
    pub fn block_capacity(&self) -> usize {
        self.n * (self.q - 1)
    }

    pub fn check_bit(&self, bit: usize) -> Result<()> {
        if bit < self.k {
            Ok(())
        } else {
            Err(FlashError::BitOutOfRange { bit, k: self.k })
        }
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} k={} q={} m={}", self.n, self.k, self.q, self.m())
    }
}

/// Classification of a sub-block.
///
/// The plain view yields `Empty`, `Full` or `Active`. The layered view
/// yields `Clear(l)` when every cell sits at level `l` (so `Empty` is
/// `Clear(0)` and `Full` is `Clear(q-1)`) and `Active` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubBlockStatus {
    Empty,
    Full,
    Active,
    Clear(u8),
}

/// Borrowed view of the `k` cell levels of one sub-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubBlock<'a> {
    levels: &'a [u8],
}

impl<'a> SubBlock<'a> {
    pub fn new(levels: &'a [u8]) -> Self {
        SubBlock { levels }
    }

    pub fn levels(&self) -> &'a [u8] {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|&c| c == 0)
    }

    pub fn is_full(&self, q: usize) -> bool {
        self.levels.iter().all(|&c| c as usize == q - 1)
    }

    /// Sum of the cell levels.
    pub fn weight(&self) -> usize {
        weight(self.levels)
    }

    pub fn parity(&self) -> u8 {
        parity(self.levels)
    }

    /// The common level of a clear sub-block.
    pub fn layer(&self) -> Option<u8> {
        let (&first, rest) = self.levels.split_first()?;
        rest.iter().all(|&c| c == first).then_some(first)
    }

    pub fn status(&self, q: usize) -> SubBlockStatus {
        if self.is_empty() {
            SubBlockStatus::Empty
        } else if self.is_full(q) {
            SubBlockStatus::Full
        } else {
            SubBlockStatus::Active
        }
    }

    pub fn layered_status(&self) -> SubBlockStatus {
        match self.layer() {
            Some(l) => SubBlockStatus::Clear(l),
            None => SubBlockStatus::Active,
        }
    }

    pub fn index_ilifc(&self) -> Option<usize> {
        index_ilifc(self.levels)
    }

    pub fn index_layered(&self) -> Option<usize> {
        index_layered(self.levels)
    }
}

pub fn weight(levels: &[u8]) -> usize {
    levels.iter().map(|&c| c as usize).sum()
}

pub fn parity(levels: &[u8]) -> u8 {
    (weight(levels) % 2) as u8
}

/// Position maximizing `c[j] - c[pred(j)]`, smallest position on ties,
/// together with whether the maximum is attained only once.
pub fn cyclic_argmax(levels: &[u8]) -> (usize, bool) {
    let k = levels.len();
    let mut best = 0;
    let mut best_diff = i16::MIN;
    let mut unique = true;
    for j in 0..k {
        let diff = levels[j] as i16 - levels[(j + k - 1) % k] as i16;
        if diff > best_diff {
            best = j;
            best_diff = diff;
            unique = true;
        } else if diff == best_diff {
            unique = false;
        }
    }
    (best, unique)
}

/// Index map of the plain code: none for the all-zero sub-block, otherwise
/// the cyclic-difference argmax.
pub fn index_ilifc(levels: &[u8]) -> Option<usize> {
    if levels.iter().all(|&c| c == 0) {
        None
    } else {
        Some(cyclic_argmax(levels).0)
    }
}

/// Index map of the layered code: none for any clear sub-block, otherwise
/// the cyclic-difference argmax.
pub fn index_layered(levels: &[u8]) -> Option<usize> {
    if SubBlock::new(levels).layer().is_some() {
        None
    } else {
        Some(cyclic_argmax(levels).0)
    }
}

/// Cell state vector of one erase block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockState {
    cells: Vec<u8>,
}

impl BlockState {
    /// The erased (all-zero) block.
    pub fn zero(params: &CodeParams) -> Self {
        BlockState {
            cells: vec![0; params.n()],
        }
    }

    /// Builds a state after checking levels and the unused trailing cells.
    pub fn from_cells(params: &CodeParams, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != params.n() {
            return Err(FlashError::InvalidState(format!(
                "expected {} cells, got {}",
                params.n(),
                cells.len()
            )));
        }
        if let Some(j) = cells.iter().position(|&c| c as usize >= params.q()) {
            return Err(FlashError::InvalidState(format!(
                "cell {j} has level {} >= q = {}",
                cells[j],
                params.q()
            )));
        }
        let used = params.m() * params.k();
        if cells[used..].iter().any(|&c| c != 0) {
            return Err(FlashError::InvalidState(
                "unused trailing cells must stay at level 0".into(),
            ));
        }
        Ok(BlockState { cells })
    }

    /// Parses the comma-separated level list format, e.g. `"2,1,1,0"`.
    pub fn parse(params: &CodeParams, text: &str) -> Result<Self> {
        let cells = text.parse::<Levels>()?.0;
        Self::from_cells(params, cells)
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&c| c == 0)
    }

    pub fn total_weight(&self) -> usize {
        weight(&self.cells)
    }

    pub fn reset(&mut self) {
        self.cells.iter_mut().for_each(|c| *c = 0);
    }

    pub fn sub_block(&self, params: &CodeParams, j: usize) -> SubBlock<'_> {
        let k = params.k();
        SubBlock::new(&self.cells[j * k..(j + 1) * k])
    }

    pub fn sub_block_mut(&mut self, params: &CodeParams, j: usize) -> &mut [u8] {
        let k = params.k();
        &mut self.cells[j * k..(j + 1) * k]
    }

    pub fn sub_blocks<'a>(&'a self, params: &CodeParams) -> impl Iterator<Item = SubBlock<'a>> {
        self.cells
            .chunks_exact(params.k())
            .take(params.m())
            .map(SubBlock::new)
    }

    /// True iff every cell of `self` is at least the matching cell of `other`.
    pub fn is_higher(&self, other: &BlockState) -> Result<bool> {
        is_higher(&self.cells, &other.cells)
    }
}

pub fn is_higher(a: &[u8], b: &[u8]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(FlashError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).all(|(x, y)| x >= y))
}

impl fmt::Display for BlockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Levels(self.cells.clone()), f)
    }
}

/// Unvalidated comma-separated level list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels(pub Vec<u8>);

impl FromStr for Levels {
    type Err = FlashError;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .map_err(|e| FlashError::InvalidState(format!("bad level {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Levels)
    }
}

impl fmt::Display for Levels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, c) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The `k`-bit logical information vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InfoVector {
    bits: Vec<bool>,
}

impl InfoVector {
    pub fn zero(k: usize) -> Self {
        InfoVector {
            bits: vec![false; k],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        InfoVector { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn reset(&mut self) {
        self.bits.iter_mut().for_each(|b| *b = false);
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }
}

impl fmt::Display for InfoVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels = Levels(self.bits.iter().map(|&b| b as u8).collect());
        fmt::Display::fmt(&levels, f)
    }
}
