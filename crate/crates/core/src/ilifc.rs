//! First-stage index-less indexed flash code.
//!
//! A sub-block holding bit `i` is filled in a staircase relative to `i`:
//! with position `p` meaning cell `(i + p) % k`, each level pass raises
//! positions `0..k-1` by one in order while position `k-1` stays at 0;
//! once positions `0..k-1` reach `q-1`, position `k-1` climbs to `q-1`.
//! Cell `i` then always leads its predecessor by at least one, so the
//! index map recovers `i` in every active state.

use crate::code::{FlashCode, Step};
use crate::error::{FlashError, Result};
use crate::model::{BlockState, CodeParams, InfoVector, SubBlock};

/// Programs the next cell of an active sub-block carrying `index`.
pub fn write_step(levels: &mut [u8], index: usize, q: usize) -> Result<()> {
    let k = levels.len();
    let top = (q - 1) as u8;
    if levels.iter().all(|&c| c == top) {
        return Err(FlashError::Contract("write_step on a full sub-block"));
    }
    let at = |p: usize| (index + p) % k;
    let lead = levels[at(0)];
    let target = match (1..k - 1).map(at).find(|&j| levels[j] < lead) {
        Some(j) => j,
        None if lead < top => at(0),
        None => at(k - 1),
    };
    levels[target] += 1;
    Ok(())
}

/// Starts an empty sub-block on `index` by raising cell `index` to 1.
pub fn write_new(index: usize, levels: &mut [u8]) -> Result<()> {
    if levels.iter().any(|&c| c != 0) {
        return Err(FlashError::Contract("write_new on a non-empty sub-block"));
    }
    levels[index] = 1;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ilifc {
    params: CodeParams,
}

impl Ilifc {
    pub fn new(params: CodeParams) -> Self {
        Ilifc { params }
    }
}

impl FlashCode for Ilifc {
    fn params(&self) -> &CodeParams {
        &self.params
    }

    fn decode(&self, state: &BlockState) -> InfoVector {
        let q = self.params.q();
        let mut info = InfoVector::zero(self.params.k());
        for x in state.sub_blocks(&self.params) {
            if x.is_empty() || x.is_full(q) {
                continue;
            }
            if let Some(i) = x.index_ilifc() {
                info.set(i, x.parity() == 1);
            }
        }
        info
    }

    fn write_flip(&self, state: &mut BlockState, bit: usize) -> Result<Step> {
        let p = &self.params;
        p.check_bit(bit)?;
        let q = p.q();
        let holder = (0..p.m()).find(|&j| {
            let x = state.sub_block(p, j);
            !x.is_empty() && !x.is_full(q) && x.index_ilifc() == Some(bit)
        });
        if let Some(j) = holder {
            write_step(state.sub_block_mut(p, j), bit, q)?;
            return Ok(Step::Written);
        }
        match (0..p.m()).find(|&j| state.sub_block(p, j).is_empty()) {
            Some(j) => {
                write_new(bit, state.sub_block_mut(p, j))?;
                Ok(Step::Written)
            }
            None => Ok(Step::Erase),
        }
    }
}

/// Every state a single sub-block passes through while carrying `index`,
/// from the first write up to full.
pub fn trajectory(k: usize, q: usize, index: usize) -> Vec<Vec<u8>> {
    let mut levels = vec![0u8; k];
    let mut out = Vec::with_capacity(k * (q - 1));
    write_new(index, &mut levels).expect("fresh sub-block is empty");
    out.push(levels.clone());
    while !SubBlock::new(&levels).is_full(q) {
        write_step(&mut levels, index, q).expect("not full");
        out.push(levels.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::EncodeOutcome;

    fn step(levels: &[u8], index: usize, q: usize) -> Vec<u8> {
        let mut x = levels.to_vec();
        write_step(&mut x, index, q).unwrap();
        x
    }

    #[test]
    fn staircase_examples() {
        assert_eq!(step(&[1, 1, 0, 0], 0, 3), vec![1, 1, 1, 0]);
        assert_eq!(step(&[2, 2, 2, 0], 0, 3), vec![2, 2, 2, 1]);
        assert_eq!(step(&[2, 2, 2, 1], 0, 3), vec![2, 2, 2, 2]);
        assert!(write_step(&mut [2, 2, 2, 2], 0, 3).is_err());
    }

    #[test]
    fn staircase_wraps_for_later_indices() {
        // index 2: positions are cells 2,3,0 then 1 last
        assert_eq!(
            trajectory(4, 2, 2),
            vec![
                vec![0, 0, 1, 0],
                vec![0, 0, 1, 1],
                vec![1, 0, 1, 1],
                vec![1, 1, 1, 1],
            ]
        );
    }

    #[test]
    fn full_trajectory_k4_q3() {
        let t = trajectory(4, 3, 0);
        assert_eq!(
            t,
            vec![
                vec![1, 0, 0, 0],
                vec![1, 1, 0, 0],
                vec![1, 1, 1, 0],
                vec![2, 1, 1, 0],
                vec![2, 2, 1, 0],
                vec![2, 2, 2, 0],
                vec![2, 2, 2, 1],
                vec![2, 2, 2, 2],
            ]
        );
    }

    #[test]
    fn write_new_examples() {
        let mut x = [0u8; 4];
        write_new(2, &mut x).unwrap();
        assert_eq!(x, [0, 0, 1, 0]);
        let mut x = [0u8; 2];
        write_new(0, &mut x).unwrap();
        assert_eq!(x, [1, 0]);
        let mut x = [0u8; 2];
        write_new(1, &mut x).unwrap();
        assert_eq!(x, [0, 1]);
        assert!(write_new(0, &mut [0, 1]).is_err());
    }

    fn code(n: usize, k: usize, q: usize) -> Ilifc {
        Ilifc::new(CodeParams::new(n, k, q).unwrap())
    }

    fn state(c: &Ilifc, cells: &[u8]) -> BlockState {
        BlockState::from_cells(c.params(), cells.to_vec()).unwrap()
    }

    #[test]
    fn decode_examples() {
        let c = code(4, 2, 2);
        assert_eq!(c.decode(&state(&c, &[1, 0, 0, 1])).bits(), &[true, true]);
        assert_eq!(c.decode(&state(&c, &[1, 1, 0, 1])).bits(), &[false, true]);
        assert!(c.decode(&BlockState::zero(c.params())).is_zero());
    }

    #[test]
    fn encode_examples() {
        let c = code(4, 2, 2);
        let z = BlockState::zero(c.params());
        assert_eq!(
            c.encode_flip(&z, 0).unwrap(),
            EncodeOutcome::Written(state(&c, &[1, 0, 0, 0]))
        );
        assert_eq!(
            c.encode_flip(&state(&c, &[1, 0, 0, 1]), 0).unwrap(),
            EncodeOutcome::Written(state(&c, &[1, 1, 0, 1]))
        );
        assert_eq!(
            c.encode_flip(&state(&c, &[1, 1, 0, 1]), 0).unwrap(),
            EncodeOutcome::Erase
        );
        assert_eq!(
            c.encode_flip(&z, 2),
            Err(FlashError::BitOutOfRange { bit: 2, k: 2 })
        );
    }

    #[test]
    fn erase_leaves_state_untouched() {
        let c = code(4, 2, 2);
        let mut s = state(&c, &[1, 1, 0, 1]);
        assert_eq!(c.write_flip(&mut s, 0).unwrap(), Step::Erase);
        assert_eq!(s.cells(), &[1, 1, 0, 1]);
    }

    #[test]
    fn capacity_is_k_times_q_minus_one() {
        for k in [2, 4, 6] {
            for q in [2, 3, 8] {
                for i in 0..k {
                    assert_eq!(trajectory(k, q, i).len(), k * (q - 1));
                }
            }
        }
    }

    #[test]
    fn trailing_cells_are_never_written() {
        let c = code(5, 2, 2);
        let mut s = BlockState::zero(c.params());
        for bit in [0, 1, 0, 1] {
            assert_eq!(c.write_flip(&mut s, bit).unwrap(), Step::Written);
        }
        assert_eq!(s.cells(), &[1, 1, 1, 1, 0]);
        assert_eq!(c.write_flip(&mut s, 0).unwrap(), Step::Erase);
    }
}
