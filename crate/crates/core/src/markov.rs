//! Markov-chain analysis of average performance.
//!
//! States are the block states reachable from the erased block. Each flip
//! with nonzero probability contributes one transition; a flip the code
//! cannot absorb is an erase transition back to the erased block. From the
//! stationary distribution `pi` we get the per-step erase probability `s`.
//! Over one renewal cycle the block takes `1/s - 1` rewrites, so the erase
//! probability per rewrite is `s / (1 - s)` and its inverse is the average
//! number of rewrites between consecutive erases.

use std::collections::{HashMap, VecDeque};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::code::{CodeKind, FlashCode, Step};
use crate::dist::FlipDistribution;
use crate::error::{FlashError, Result};
use crate::model::{BlockState, CodeParams};
use crate::scalar::Scalar;

pub const DEFAULT_TRANSITION_CAP: usize = 1_000_000;

/// Chains up to this many states are solved by dense elimination.
pub const DIRECT_SOLVE_LIMIT: usize = 2_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub from: usize,
    pub to: usize,
    pub bit: usize,
    pub prob: T,
    pub erase: bool,
}

/// Reachable-state chain of one code under one flip distribution.
/// State 0 is the erased block; transitions are grouped by source state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel<T> {
    params: CodeParams,
    states: Vec<BlockState>,
    transitions: Vec<Transition<T>>,
    offsets: Vec<usize>,
}

/// Breadth-first closure of the erased block under every flip in the
/// distribution's support.
pub fn build_chain<C, T>(code: &C, dist: &FlipDistribution<T>, cap: usize) -> Result<ChainModel<T>>
where
    C: FlashCode,
    T: Scalar,
{
    let params = *code.params();
    if dist.k() != params.k() {
        return Err(FlashError::InvalidDistribution(format!(
            "{} probabilities for k = {}",
            dist.k(),
            params.k()
        )));
    }
    let support: Vec<usize> = dist.support().collect();
    let zero = BlockState::zero(&params);
    let mut index = HashMap::from([(zero.clone(), 0usize)]);
    let mut states = vec![zero];
    let mut transitions = Vec::new();
    let mut offsets = vec![0];
    let mut queue = VecDeque::from([0usize]);

    while let Some(from) = queue.pop_front() {
        for &bit in &support {
            let mut next = states[from].clone();
            let step = code.write_flip(&mut next, bit)?;
            let to = match step {
                Step::Erase => 0,
                Step::Written => match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        index.insert(next.clone(), id);
                        states.push(next);
                        queue.push_back(id);
                        id
                    }
                },
            };
            transitions.push(Transition {
                from,
                to,
                bit,
                prob: dist.prob(bit).clone(),
                erase: step == Step::Erase,
            });
            if transitions.len() > cap {
                return Err(FlashError::StateCapExceeded { cap });
            }
        }
        offsets.push(transitions.len());
    }
    Ok(ChainModel {
        params,
        states,
        transitions,
        offsets,
    })
}

impl<T: Scalar> ChainModel<T> {
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BlockState] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition<T>] {
        &self.transitions
    }

    pub fn outgoing(&self, state: usize) -> &[Transition<T>] {
        &self.transitions[self.offsets[state]..self.offsets[state + 1]]
    }

    pub fn outgoing_mass(&self, state: usize) -> T {
        self.outgoing(state)
            .iter()
            .fold(T::zero(), |acc, t| acc + t.prob.clone())
    }

    /// Probability that a step from `state` erases the block.
    pub fn erase_mass(&self, state: usize) -> T {
        self.outgoing(state)
            .iter()
            .filter(|t| t.erase)
            .fold(T::zero(), |acc, t| acc + t.prob.clone())
    }

    /// `pi * P`.
    pub fn step_distribution(&self, pi: &[T]) -> Vec<T> {
        let mut next = vec![T::zero(); self.len()];
        for t in &self.transitions {
            next[t.to] = next[t.to].clone() + pi[t.from].clone() * t.prob.clone();
        }
        next
    }

    /// Max-norm of `pi * P - pi`.
    pub fn residual(&self, pi: &[T]) -> T {
        self.step_distribution(pi)
            .into_iter()
            .zip(pi)
            .map(|(a, b)| (a - b.clone()).abs())
            .fold(T::zero(), |m, d| if d > m { d } else { m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Direct,
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult<T> {
    pub pi: Vec<T>,
    pub residual: T,
    /// Erase probability per step, the erasing flip counted as a step.
    pub step_erase_probability: T,
    /// Erase probability per rewrite.
    pub erase_probability: T,
    /// `1 / erase_probability`.
    pub avg_rewritings: T,
    pub method: SolveMethod,
    pub iterations: usize,
}

impl<T: Scalar> StationaryResult<T> {
    fn from_pi(chain: &ChainModel<T>, pi: Vec<T>, method: SolveMethod, iterations: usize) -> Self {
        let residual = chain.residual(&pi);
        let step = pi.iter().enumerate().fold(T::zero(), |acc, (s, p)| {
            acc + p.clone() * chain.erase_mass(s)
        });
        let rewrite = T::one() - step.clone();
        StationaryResult {
            erase_probability: step.clone() / rewrite.clone(),
            avg_rewritings: rewrite / step.clone(),
            step_erase_probability: step,
            residual,
            pi,
            method,
            iterations,
        }
    }
}

/// Stationary distribution by dense elimination for small chains and lazy
/// power iteration otherwise. A float direct solve whose residual misses
/// `tol` is polished by power iteration.
pub fn stationary<T: Scalar>(
    chain: &ChainModel<T>,
    tol: &T,
    max_iter: usize,
) -> Result<StationaryResult<T>> {
    if chain.len() <= DIRECT_SOLVE_LIMIT {
        let direct = solve_direct(chain)?;
        if direct.residual <= *tol {
            return Ok(direct);
        }
        return power_from(chain, direct.pi, tol, max_iter);
    }
    solve_power(chain, tol, max_iter)
}

/// Solves `(P^T - I) pi = 0` with the last equation replaced by `sum pi = 1`.
pub fn solve_direct<T: Scalar>(chain: &ChainModel<T>) -> Result<StationaryResult<T>> {
    let n = chain.len();
    let mut a = vec![vec![T::zero(); n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = -T::one();
    }
    for t in &chain.transitions {
        a[t.to][t.from] = a[t.to][t.from].clone() + t.prob.clone();
    }
    for x in a[n - 1].iter_mut() {
        *x = T::one();
    }
    let pi = gauss_solve(a)?;
    Ok(StationaryResult::from_pi(chain, pi, SolveMethod::Direct, 0))
}

/// Gaussian elimination on an augmented `n x (n+1)` system.
fn gauss_solve<T: Scalar>(mut a: Vec<Vec<T>>) -> Result<Vec<T>> {
    let n = a.len();
    for col in 0..n {
        let pivot = if T::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())
        } else {
            (col..n).filter(|&r| !a[r][col].is_zero()).max_by(|&r, &s| {
                a[r][col]
                    .abs()
                    .partial_cmp(&a[s][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        };
        let pivot = pivot.ok_or_else(|| {
            FlashError::InvalidState("singular transition system; chain is not irreducible".into())
        })?;
        a.swap(col, pivot);
        let (head, tail) = a.split_at_mut(col + 1);
        let prow = &head[col];
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / prow[col].clone();
            for c in col..=n {
                if !prow[c].is_zero() {
                    row[c] = row[c].clone() - factor.clone() * prow[c].clone();
                }
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = a[r][n].clone();
        for c in r + 1..n {
            if !a[r][c].is_zero() {
                acc = acc - a[r][c].clone() * x[c].clone();
            }
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}

/// Lazy power iteration `pi <- (pi + pi P) / 2` from the uniform vector.
/// The lazy step makes the iteration converge on periodic chains.
pub fn solve_power<T: Scalar>(
    chain: &ChainModel<T>,
    tol: &T,
    max_iter: usize,
) -> Result<StationaryResult<T>> {
    let n = chain.len();
    let start = vec![T::one() / T::from_usize(n).expect("state count fits the scalar"); n];
    power_from(chain, start, tol, max_iter)
}

fn power_from<T: Scalar>(
    chain: &ChainModel<T>,
    mut pi: Vec<T>,
    tol: &T,
    max_iter: usize,
) -> Result<StationaryResult<T>> {
    let two = T::one() + T::one();
    for iter in 0..=max_iter {
        if chain.residual(&pi) <= *tol {
            return Ok(StationaryResult::from_pi(
                chain,
                pi,
                SolveMethod::Power,
                iter,
            ));
        }
        if iter == max_iter {
            break;
        }
        let next = chain.step_distribution(&pi);
        pi = pi
            .into_iter()
            .zip(next)
            .map(|(a, b)| (a + b) / two.clone())
            .collect();
        let sum = pi.iter().fold(T::zero(), |acc, p| acc + p.clone());
        pi.iter_mut().for_each(|p| *p = p.clone() / sum.clone());
    }
    Err(FlashError::NoConvergence {
        iterations: max_iter,
        residual: chain.residual(&pi).to_f64_lossy(),
    })
}

/// Builds the chain of `kind` and solves it.
pub fn analyze<T: Scalar>(
    kind: CodeKind,
    params: CodeParams,
    dist: &FlipDistribution<T>,
    tol: &T,
    max_iter: usize,
    cap: usize,
) -> Result<StationaryResult<T>> {
    let code = kind.codec(params);
    let chain = build_chain(&code, dist, cap)?;
    stationary(&chain, tol, max_iter)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub rate: f64,
    pub avg_ilifc: f64,
    pub avg_layered: f64,
}

/// Average rewrites of both codes for each block length, ordered by
/// ascending `n` (descending rate).
pub fn sweep_tradeoff(
    k: usize,
    q: usize,
    n_list: &[usize],
    dist: &FlipDistribution<f64>,
    tol: f64,
    cap: usize,
) -> Result<Vec<SweepRow>> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    ns.par_iter()
        .map(|&n| {
            let params = CodeParams::new(n, k, q)?;
            let avg =
                |kind| analyze(kind, params, dist, &tol, 1_000_000, cap).map(|r| r.avg_rewritings);
            Ok(SweepRow {
                n,
                rate: params.rate(),
                avg_ilifc: avg(CodeKind::Ilifc)?,
                avg_layered: avg(CodeKind::Layered)?,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n,rate,avg_ilifc,avg_layered")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.rate, r.avg_ilifc, r.avg_layered)?;
    }
    Ok(())
}

/// One line per transition: `from,to,bit,prob,erase`.
pub fn write_chain_dump<T: Scalar, W: Write>(chain: &ChainModel<T>, mut out: W) -> io::Result<()> {
    writeln!(out, "from,to,bit,prob,erase")?;
    for t in chain.transitions() {
        writeln!(
            out,
            "{},{},{},{},{}",
            t.from,
            t.to,
            t.bit,
            t.prob.to_f64_lossy(),
            t.erase
        )?;
    }
    Ok(())
}
