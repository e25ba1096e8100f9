//! Brute-force oracles: exhaustive decode consistency, single sub-block
//! decodability, and adversarial worst-case search.
//!
//! These checks only use the public [`FlashCode`] surface and the index
//! maps, so a mutated codec can be plugged in as a negative control.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::code::{CodeKind, FlashCode, Step};
use crate::error::{FlashError, Result};
use crate::model::{cyclic_argmax, BlockState, CodeParams, InfoVector, SubBlock};
use crate::{ilifc, layered};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Offending flip sequence (0-based bits) on failure, or a witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<usize>>,
}

impl CheckOutcome {
    fn pass(name: impl Into<String>, detail: Option<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: true,
            detail,
            sequence: None,
        }
    }

    fn fail(name: impl Into<String>, detail: String, sequence: Option<Vec<usize>>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: false,
            detail: Some(detail),
            sequence,
        }
    }
}

/// A sub-block is live while it can still take writes.
pub fn is_live(x: SubBlock<'_>, q: usize) -> bool {
    !x.is_full(q)
}

/// Applies every flip sequence of length `depth` from the erased block,
/// tracking the information vector alongside (both reset on erase), and
/// checks after every flip that decode agrees, and that each write moves to
/// a higher state with total weight one larger.
pub fn exhaustive_consistency<C: FlashCode>(code: &C, depth: usize) -> Result<CheckOutcome> {
    let params = *code.params();
    let k = params.k();
    let name = "exhaustive_consistency";
    let mut seq = Vec::with_capacity(depth);
    let mut checked = 0u64;
    let start = BlockState::zero(&params);
    let info = InfoVector::zero(k);
    if let Some(detail) = consistency_dfs(code, &start, &info, depth, &mut seq, &mut checked)? {
        return Ok(CheckOutcome::fail(name, detail, Some(seq)));
    }
    Ok(CheckOutcome::pass(
        name,
        Some(format!("{checked} flip sequences of length {depth}")),
    ))
}

fn consistency_dfs<C: FlashCode>(
    code: &C,
    state: &BlockState,
    info: &InfoVector,
    remaining: usize,
    seq: &mut Vec<usize>,
    checked: &mut u64,
) -> Result<Option<String>> {
    if remaining == 0 {
        *checked += 1;
        return Ok(None);
    }
    for bit in 0..code.params().k() {
        seq.push(bit);
        let mut next = state.clone();
        let mut tracked = info.clone();
        match code.write_flip(&mut next, bit)? {
            Step::Written => {
                tracked.flip(bit);
                if !next.is_higher(state)? || next.total_weight() != state.total_weight() + 1 {
                    return Ok(Some(format!(
                        "write {state} -> {next} is not a single increment"
                    )));
                }
            }
            Step::Erase => {
                next.reset();
                tracked.reset();
            }
        }
        let decoded = code.decode(&next);
        if decoded != tracked {
            return Ok(Some(format!(
                "state {next} decodes to {decoded}, expected {tracked}"
            )));
        }
        if let Some(detail) = consistency_dfs(code, &next, &tracked, remaining - 1, seq, checked)? {
            return Ok(Some(detail));
        }
        seq.pop();
    }
    Ok(None)
}

/// Walks each index's write trajectory through a single sub-block and checks
/// that the index map recovers it uniquely in every intermediate state and
/// that trajectories of different indices never share such a state.
pub fn subblock_decodability(kind: CodeKind, k: usize, q: usize) -> Result<CheckOutcome> {
    CodeParams::new(k, k, q)?;
    let name = format!("subblock_decodability[{kind},k={k},q={q}]");
    let mut owner: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut visited = 0usize;
    for index in 0..k {
        let runs: Vec<Vec<Vec<u8>>> = match kind {
            CodeKind::Ilifc => vec![ilifc::trajectory(k, q, index)],
            CodeKind::Layered => (0..(q - 1) as u8)
                .map(|l| layered::trajectory(k, q, index, l))
                .collect(),
        };
        for (layer, run) in runs.iter().enumerate() {
            let expected_len = match kind {
                CodeKind::Ilifc => k * (q - 1),
                CodeKind::Layered => k,
            };
            if run.len() != expected_len {
                return Ok(CheckOutcome::fail(
                    name,
                    format!(
                        "index {index}: {} writes, expected {expected_len}",
                        run.len()
                    ),
                    None,
                ));
            }
            let (last, inner) = run.split_last().expect("nonempty trajectory");
            let end_ok = match kind {
                CodeKind::Ilifc => SubBlock::new(last).is_full(q),
                CodeKind::Layered => SubBlock::new(last).layer() == Some(layer as u8 + 1),
            };
            if !end_ok {
                return Ok(CheckOutcome::fail(
                    name,
                    format!("index {index}: trajectory ends at {last:?}"),
                    None,
                ));
            }
            for x in inner {
                visited += 1;
                if let Some(problem) = inspect(kind, x, index, layer as u8, q) {
                    return Ok(CheckOutcome::fail(name, problem, None));
                }
                if let Some(&other) = owner.get(x) {
                    if other != index {
                        return Ok(CheckOutcome::fail(
                            name,
                            format!("{x:?} reached by indices {other} and {index}"),
                            None,
                        ));
                    }
                }
                owner.insert(x.clone(), index);
            }
        }
    }
    Ok(CheckOutcome::pass(
        name,
        Some(format!("{visited} intermediate states")),
    ))
}

fn inspect(kind: CodeKind, x: &[u8], index: usize, layer: u8, q: usize) -> Option<String> {
    let sb = SubBlock::new(x);
    let (arg, unique) = cyclic_argmax(x);
    let mapped = match kind {
        CodeKind::Ilifc => {
            if sb.is_empty() || sb.is_full(q) {
                return Some(format!("{x:?} is not active"));
            }
            sb.index_ilifc()
        }
        CodeKind::Layered => {
            if sb.layer().is_some() {
                return Some(format!("{x:?} is clear mid-layer"));
            }
            let k = x.len();
            let raised = x.iter().filter(|&&c| c == layer + 1).count();
            let shape_ok = x.iter().all(|&c| c == layer || c == layer + 1)
                && (0..k).all(|p| (x[(index + p) % k] == layer + 1) == (p < raised));
            if !shape_ok {
                return Some(format!("{x:?} is not a run at layer {layer} from {index}"));
            }
            let max_diff = (0..k)
                .map(|j| x[j] as i16 - x[(j + k - 1) % k] as i16)
                .max()
                .unwrap_or(0);
            if max_diff != 1 {
                return Some(format!("{x:?} has maximum difference {max_diff}"));
            }
            sb.index_layered()
        }
    };
    if mapped != Some(index) || arg != index || !unique {
        return Some(format!(
            "{x:?} maps to {mapped:?} (unique: {unique}), expected {index}"
        ));
    }
    None
}

/// Fewest writes an adversary can force before the first erase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstCaseResult {
    pub code: CodeKind,
    pub params: CodeParams,
    pub min_writes: usize,
    /// Flip sequence (0-based bits): `min_writes` writes, then the erasing flip.
    pub witness: Vec<usize>,
    pub states_explored: usize,
}

/// Breadth-first search from the erased block for the closest state from
/// which some flip erases. Every edge is one write, so the depth of that
/// state is the adversarial minimum. `cap` bounds the states visited.
pub fn worst_case(kind: CodeKind, params: CodeParams, cap: usize) -> Result<WorstCaseResult> {
    let code = kind.codec(params);
    let zero = BlockState::zero(&params);
    let mut states = vec![zero.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut depth = vec![0usize];
    let mut index = HashMap::from([(zero, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let mut successors = Vec::with_capacity(params.k());
        for bit in 0..params.k() {
            let mut next = states[s].clone();
            match code.write_flip(&mut next, bit)? {
                Step::Written => successors.push((bit, next)),
                Step::Erase => {
                    let mut witness = vec![bit];
                    let mut at = s;
                    while let Some((prev, b)) = parent[at] {
                        witness.push(b);
                        at = prev;
                    }
                    witness.reverse();
                    return Ok(WorstCaseResult {
                        code: kind,
                        params,
                        min_writes: depth[s],
                        witness,
                        states_explored: states.len(),
                    });
                }
            }
        }
        for (bit, next) in successors {
            if index.contains_key(&next) {
                continue;
            }
            if states.len() >= cap {
                return Err(FlashError::StateCapExceeded { cap });
            }
            index.insert(next.clone(), states.len());
            queue.push_back(states.len());
            states.push(next);
            parent.push(Some((s, bit)));
            depth.push(depth[s] + 1);
        }
    }
    unreachable!("a finite state graph always reaches an erasing state")
}

/// Replay of a flip sequence from the erased block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replay {
    /// Writes before the first erase (or in total if none).
    pub writes: usize,
    /// Position of the first erasing flip.
    pub erased_at: Option<usize>,
}

pub fn replay<C: FlashCode>(code: &C, flips: &[usize]) -> Result<Replay> {
    let mut state = BlockState::zero(code.params());
    let mut writes = 0;
    for (pos, &bit) in flips.iter().enumerate() {
        match code.write_flip(&mut state, bit)? {
            Step::Written => writes += 1,
            Step::Erase => {
                return Ok(Replay {
                    writes,
                    erased_at: Some(pos),
                })
            }
        }
    }
    Ok(Replay {
        writes,
        erased_at: None,
    })
}

/// Flip sequence realizing the worst-case event for `m <= k`: bits
/// `1..m` each claim a sub-block with a single write, bit 0 fills the
/// last sub-block, and one more flip of bit 0 erases. Valid for both codes,
/// giving `k(q-1) + m - 1` writes.
pub fn constructive_witness(params: &CodeParams) -> Option<Vec<usize>> {
    let (k, m) = (params.k(), params.m());
    if m > k {
        return None;
    }
    let mut flips: Vec<usize> = (1..m).collect();
    flips.extend(std::iter::repeat_n(0, params.sub_block_capacity() + 1));
    Some(flips)
}

/// All checks for one geometry, as reported by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: CodeParams,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify_all(params: CodeParams, depth: usize, cap: usize) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut worst = Vec::new();
    for kind in CodeKind::ALL {
        let code = kind.codec(params);
        let mut c = exhaustive_consistency(&code, depth)?;
        c.name = format!("{}[{kind}]", c.name);
        checks.push(c);
        checks.push(subblock_decodability(kind, params.k(), params.q())?);

        let name = format!("worst_case[{kind}]");
        match worst_case(kind, params, cap) {
            Ok(w) => {
                let r = replay(&code, &w.witness)?;
                let ok = r.writes == w.min_writes && r.erased_at == Some(w.witness.len() - 1);
                let detail = format!("min_writes = {}", w.min_writes);
                checks.push(if ok {
                    CheckOutcome {
                        sequence: Some(w.witness.clone()),
                        ..CheckOutcome::pass(name, Some(detail))
                    }
                } else {
                    CheckOutcome::fail(
                        name,
                        format!("witness replay failed; {detail}"),
                        Some(w.witness.clone()),
                    )
                });
                worst.push(w.min_writes);
            }
            Err(e) => checks.push(CheckOutcome::fail(name, e.to_string(), None)),
        }
    }
    if let [a, b] = worst[..] {
        let name = "worst_case_equality";
        checks.push(if a == b {
            CheckOutcome::pass(name, Some(format!("both codes: {a}")))
        } else {
            CheckOutcome::fail(name, format!("ilifc {a} vs layered {b}"), None)
        });
    }
    Ok(VerifyReport { params, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, q: usize) -> CodeParams {
        CodeParams::new(n, k, q).unwrap()
    }

    #[test]
    fn live_means_not_full() {
        assert!(is_live(SubBlock::new(&[0, 0]), 2));
        assert!(is_live(SubBlock::new(&[1, 0]), 2));
        assert!(!is_live(SubBlock::new(&[1, 1]), 2));
    }

    #[test]
    fn worst_case_small() {
        let w = worst_case(CodeKind::Ilifc, params(4, 2, 2), 10_000).unwrap();
        assert_eq!(w.min_writes, 3);
        assert_eq!(w.witness.len(), 4);
        let w = worst_case(CodeKind::Layered, params(4, 2, 2), 10_000).unwrap();
        assert_eq!(w.min_writes, 3);
        let w = worst_case(CodeKind::Ilifc, params(4, 2, 4), 10_000).unwrap();
        assert_eq!(w.min_writes, 7);
    }

    #[test]
    fn replay_reports_first_erase() {
        let code = CodeKind::Ilifc.codec(params(4, 2, 2));
        let r = replay(&code, &[0, 0, 1, 0, 1]).unwrap();
        assert_eq!(
            r,
            Replay {
                writes: 3,
                erased_at: Some(3)
            }
        );
        let r = replay(&code, &[0, 1]).unwrap();
        assert_eq!(
            r,
            Replay {
                writes: 2,
                erased_at: None
            }
        );
    }

    #[test]
    fn constructive_witness_shape() {
        assert_eq!(
            constructive_witness(&params(4, 2, 2)),
            Some(vec![1, 0, 0, 0])
        );
        assert_eq!(constructive_witness(&params(8, 2, 2)), None);
    }

    #[test]
    fn verify_all_passes_on_small_geometry() {
        let report = verify_all(params(4, 2, 3), 6, 100_000).unwrap();
        assert!(report.passed(), "{report:#?}");
        assert_eq!(report.checks.len(), 7);
    }
}
