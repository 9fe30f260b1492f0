//! Maximal independent set in the radio model, plus validity checking and a
//! message-passing (exact-knowledge) reference implementation.

pub mod decay;
pub mod eed;
mod program;

pub use decay::{ceil_log2, decay_program, DecayParams, DecayProgram};
pub use eed::{eed_program, DegreeVerdict, EedParams, EedProgram};
pub use program::{MisConstants, MisProgram, MisSchedule, MisStatus};

use crate::error::SimError;
use crate::graphs::GraphStats;
use crate::rng::{node_rng, STREAM_PROTOCOL};
use crate::sim::{run_with, Graph, RunOptions};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MisViolation {
    #[error("independence violated: edge ({0}, {1}) inside the set")]
    InternalEdge(u32, u32),
    #[error("maximality violated: node {0} has no neighbor in the set")]
    Uncovered(u32),
}

/// Valid iff no edge joins two set members and every non-member has a
/// member neighbor.
pub fn check_mis(graph: &Graph, in_set: &[bool]) -> Result<(), MisViolation> {
    assert_eq!(in_set.len(), graph.n());
    for (u, v) in graph.edges() {
        if in_set[u as usize] && in_set[v as usize] {
            return Err(MisViolation::InternalEdge(u, v));
        }
    }
    for v in 0..graph.n() {
        if !in_set[v] && !graph.neighbors(v).iter().any(|&u| in_set[u as usize]) {
            return Err(MisViolation::Uncovered(v as u32));
        }
    }
    Ok(())
}

/// Result of one radio MIS run.
#[derive(Debug, Clone)]
pub struct MisRun {
    pub in_mis: Vec<bool>,
    /// Outer round during which each node settled (joined, or saw a
    /// neighbor join); None if still active at the end.
    pub settled_round: Vec<Option<u32>>,
    pub outer_rounds: u32,
    /// Full schedule length in simulator time-steps (the protocol's cost;
    /// simulation may stop early once every node has settled).
    pub total_steps: u64,
    pub simulated_rounds: u64,
    pub validated_rounds: u64,
    pub fingerprint: u64,
    pub max_payload_bits: u64,
    /// Sparse per-node desire-level trajectories: (outer round, p_exp).
    pub p_trajectories: Vec<Vec<(u32, u32)>>,
}

impl MisRun {
    pub fn mis_nodes(&self) -> Vec<u32> {
        (0..self.in_mis.len() as u32)
            .filter(|&v| self.in_mis[v as usize])
            .collect()
    }

    /// First outer round at whose start no node is active; None if the
    /// budget ran out first.
    pub fn rounds_to_empty(&self) -> Option<u32> {
        let mut worst = 0;
        for s in &self.settled_round {
            match s {
                Some(r) => worst = worst.max(r + 1),
                None => return None,
            }
        }
        Some(worst)
    }

    pub fn active_at(&self, v: usize, outer: u32) -> bool {
        self.settled_round[v].map_or(true, |s| outer <= s)
    }

    pub fn p_exp_at(&self, v: usize, outer: u32) -> u32 {
        let mut exp = 1;
        for &(t, e) in &self.p_trajectories[v] {
            if t > outer {
                break;
            }
            exp = e;
        }
        exp
    }

    /// Exact effective degree at the start of an outer round, from the
    /// recorded trajectories; diagnostic only, never available on the air.
    pub fn effective_degree(&self, graph: &Graph, v: usize, outer: u32) -> f64 {
        graph
            .neighbors(v)
            .iter()
            .filter(|&&u| self.active_at(u as usize, outer))
            .map(|&u| (-(self.p_exp_at(u as usize, outer) as f64)).exp2())
            .sum()
    }
}

/// Run the radio MIS protocol. Constants come calibrated from
/// [`MisConstants::default`]; `stats.n` may be an over-estimate.
pub fn radio_mis(
    graph: &Graph,
    stats: &GraphStats,
    consts: &MisConstants,
    seed: u64,
) -> Result<MisRun, SimError> {
    let sched = MisSchedule::new(stats.n, consts);
    let programs: Vec<MisProgram> = (0..graph.n()).map(|_| MisProgram::new(sched)).collect();
    let opts = RunOptions::new(sched.total_rounds(), seed).check_every(sched.per_outer());
    let res = run_with(graph, programs, &opts, |_, progs: &[MisProgram]| {
        progs.iter().all(|p| p.status != MisStatus::Active)
    })?;
    let in_mis: Vec<bool> = res.programs.iter().map(|p| p.in_mis()).collect();
    let settled_round: Vec<Option<u32>> = res.programs.iter().map(|p| p.settled_at()).collect();
    let p_trajectories: Vec<Vec<(u32, u32)>> =
        res.programs.iter().map(|p| p.p_changes.clone()).collect();
    Ok(MisRun {
        in_mis,
        settled_round,
        outer_rounds: sched.outer_rounds,
        total_steps: sched.total_rounds(),
        simulated_rounds: res.trace.rounds,
        validated_rounds: res.trace.validated_rounds,
        fingerprint: res.trace.fingerprint,
        max_payload_bits: res.trace.max_payload_bits,
        p_trajectories,
    })
}

/// Message-passing reference: the same desire-level dynamics with exact
/// neighborhood knowledge (marks visible, effective degree computed
/// directly, threshold 2).
pub fn local_ghaffari_mis(graph: &Graph, rounds: u32, seed: u64) -> Vec<bool> {
    let n = graph.n();
    let mut rngs: Vec<_> = (0..n).map(|v| node_rng(seed, v, STREAM_PROTOCOL)).collect();
    let mut active = vec![true; n];
    let mut in_mis = vec![false; n];
    let mut p_exp = vec![1u32; n];
    let mut marked = vec![false; n];
    for _ in 0..rounds {
        if !active.iter().any(|&a| a) {
            break;
        }
        for v in 0..n {
            marked[v] = active[v] && rngs[v].gen::<f64>() < (-(p_exp[v] as f64)).exp2();
        }
        let joins: Vec<usize> = (0..n)
            .filter(|&v| {
                marked[v]
                    && !graph
                        .neighbors(v)
                        .iter()
                        .any(|&u| marked[u as usize])
            })
            .collect();
        for &v in &joins {
            in_mis[v] = true;
            active[v] = false;
            for &u in graph.neighbors(v) {
                active[u as usize] = false;
            }
        }
        for v in 0..n {
            if !active[v] {
                continue;
            }
            let d: f64 = graph
                .neighbors(v)
                .iter()
                .filter(|&&u| active[u as usize])
                .map(|&u| (-(p_exp[u as usize] as f64)).exp2())
                .sum();
            if d >= 2.0 {
                p_exp[v] += 1;
            } else {
                p_exp[v] = p_exp[v].saturating_sub(1).max(1);
            }
        }
    }
    in_mis
}
