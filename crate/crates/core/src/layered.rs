//! Layered index-less indexed flash code.
//!
//! A sub-block fills one layer at a time. Starting from a clear sub-block at
//! layer `l`, bit `i` raises cell `i` and then the cells after it cyclically,
//! so the cells at `l + 1` always form a run beginning at `i`. After `k`
//! writes the sub-block is clear at `l + 1`, forgets its index, and can be
//! handed to any bit. New indices go to the lowest clear layer first.

use crate::code::{FlashCode, Step};
use crate::error::{FlashError, Result};
use crate::model::{index_layered, weight, BlockState, CodeParams, InfoVector, SubBlock};

/// Writes `index` into a clear sub-block below the top layer.
pub fn write_new2(index: usize, levels: &mut [u8], q: usize) -> Result<()> {
    match SubBlock::new(levels).layer() {
        None => Err(FlashError::Contract(
            "write_new2 on a sub-block that is not clear",
        )),
        Some(l) if l as usize >= q - 1 => {
            Err(FlashError::Contract("write_new2 on a full sub-block"))
        }
        Some(_) => {
            levels[index] += 1;
            Ok(())
        }
    }
}

/// Extends the run of a non-clear sub-block by one cell.
pub fn write2(levels: &mut [u8]) -> Result<()> {
    let index = index_layered(levels).ok_or(FlashError::Contract("write2 on a clear sub-block"))?;
    let k = levels.len();
    let target = (index + weight(levels)) % k;
    levels[target] += 1;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layered {
    params: CodeParams,
}

impl Layered {
    pub fn new(params: CodeParams) -> Self {
        Layered { params }
    }
}

impl FlashCode for Layered {
    fn params(&self) -> &CodeParams {
        &self.params
    }

    fn decode(&self, state: &BlockState) -> InfoVector {
        let mut info = InfoVector::zero(self.params.k());
        for x in state.sub_blocks(&self.params) {
            if let Some(i) = x.index_layered() {
                info.set(i, x.parity() == 1);
            }
        }
        info
    }

    fn write_flip(&self, state: &mut BlockState, bit: usize) -> Result<Step> {
        let p = &self.params;
        p.check_bit(bit)?;
        let holder = (0..p.m()).find(|&j| state.sub_block(p, j).index_layered() == Some(bit));
        if let Some(j) = holder {
            write2(state.sub_block_mut(p, j))?;
            return Ok(Step::Written);
        }
        // lowest clear layer first, first fit within a layer
        let fresh = (0..p.m())
            .filter_map(|j| {
                let l = state.sub_block(p, j).layer()?;
                ((l as usize) < p.q() - 1).then_some((l, j))
            })
            .min();
        match fresh {
            Some((_, j)) => {
                write_new2(bit, state.sub_block_mut(p, j), p.q())?;
                Ok(Step::Written)
            }
            None => Ok(Step::Erase),
        }
    }
}

/// States a single sub-block passes through when `index` is written into it
/// while clear at `layer`, ending at the next clear layer.
pub fn trajectory(k: usize, q: usize, index: usize, layer: u8) -> Vec<Vec<u8>> {
    let mut levels = vec![layer; k];
    let mut out = Vec::with_capacity(k);
    write_new2(index, &mut levels, q).expect("clear below the top layer");
    out.push(levels.clone());
    while SubBlock::new(&levels).layer().is_none() {
        write2(&mut levels).expect("not clear");
        out.push(levels.clone());
    }
    out
}
