//! Message dissemination with lexicographic override.
//!
//! Candidates hold ranked messages; when messages meet, the higher rank
//! wins. The main process computes an MIS, builds a coarse clustering over
//! the MIS centers (shift scale sqrt(D)), a bank of fine clusterings
//! (shift scales 2^-j for the admissible j range, several independent
//! copies each), lets every coarse center pick and announce a random
//! sequence of fine clusterings, then repeatedly runs intra-cluster
//! propagation on the sequenced clusterings. A background process with its
//! own clustering bank (all nodes as centers, shift scale D^0.1) runs
//! time-multiplexed throughout and ferries messages across coarse cluster
//! boundaries.

mod icp;
mod process;

pub use icp::{IcpSlot, Membership};
pub use process::{BgProcess, MainProcess, SharedSlot};

use crate::cluster::{fine_j_range, PartitionParams, PartitionTuning};
use crate::error::SimError;
use crate::graphs::GraphStats;
use crate::mis::{ceil_log2, MisConstants, MisSchedule};
use crate::rng::mix;
use crate::sim::{multiplex, run_with, Graph, Multiplex, RunOptions};
use crate::wire::{ClusterKind, ClusterTag, Rank, RankedMessage};
use std::sync::Arc;

/// All tuning constants of the dissemination pipeline, config-exposed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CompeteConstants {
    pub mis: MisConstants,
    pub partition: PartitionTuning,
    /// Decay iterations per propagation layer block.
    pub icp_decay_iters: u32,
    /// Fine propagation depth multiplier: ell = ceil(mult * log_D(alpha) * 2^j).
    pub ell_fine_mult: f64,
    /// Background propagation depth multiplier: ell = ceil(mult * log n / beta).
    pub ell_bg_mult: f64,
    /// Sequence dissemination depth multiplier (coarse-cluster radius cover).
    pub seq_radius_mult: f64,
    /// Round budget = kappa1 * D * max(1, log_D alpha) + kappa2 * log^4 n.
    pub budget_kappa1: f64,
    pub budget_kappa2: f64,
}

impl Default for CompeteConstants {
    fn default() -> Self {
        CompeteConstants {
            mis: MisConstants::default(),
            partition: PartitionTuning::default(),
            icp_decay_iters: 4,
            ell_fine_mult: 2.0,
            ell_bg_mult: 1.0,
            seq_radius_mult: 2.0,
            budget_kappa1: 3000.0,
            budget_kappa2: 1000.0,
        }
    }
}

/// Every schedule number of the pipeline, derived from the shared graph
/// statistics so all nodes agree on phase boundaries without communication.
#[derive(Debug, Clone)]
pub struct CompeteSchedule {
    pub log_n: u32,
    pub d: u32,
    pub alpha: u32,
    /// max(1, log alpha / log D).
    pub log_d_alpha: f64,
    pub fine_js: Vec<u32>,
    /// Independent clusterings per scale, and background bank size: ceil(D^0.2).
    pub copies: u32,
    /// Length of each coarse center's clustering sequence: ceil(D^0.99).
    pub seq_len: u64,
    /// No admissible fine scale (D < 2): the pipeline degrades to the
    /// background process alone.
    pub degraded: bool,
    pub icp_decay_iters: u32,
    pub ell_fine_mult: f64,
    pub mis_sched: MisSchedule,
    pub coarse: PartitionParams,
    pub fine: Vec<(u32, PartitionParams)>,
    pub mis_end: u64,
    pub coarse_end: u64,
    pub fine_ends: Vec<u64>,
    pub seq_layers: u32,
    pub seq_end: u64,
    pub slot_ell_max: u32,
    pub main_slot_len: u64,
    pub bg_beta: f64,
    bg_part_template: PartitionParams,
    pub bg_part_len: u64,
    pub ell_bg: u32,
    pub bg_slot_len: u64,
    /// Global (multiplexed) round budget.
    pub budget: u64,
}

impl CompeteSchedule {
    pub fn new(stats: &GraphStats, consts: &CompeteConstants) -> CompeteSchedule {
        let log_n = ceil_log2(stats.n);
        let d = stats.diameter.max(1);
        let alpha = stats.alpha.max(1);
        let log_d_alpha = if alpha <= 1 {
            1.0
        } else {
            ((alpha as f64).log2() / (d.max(2) as f64).log2()).max(1.0)
        };
        let fine_js = fine_j_range(d);
        let degraded = fine_js.is_empty();
        let copies = (d as f64).powf(0.2).ceil() as u32;
        let seq_len = (d as f64).powf(0.99).ceil() as u64;

        let mis_sched = MisSchedule::new(stats.n, &consts.mis);
        let mis_end = mis_sched.total_rounds();

        let beta_coarse = (d as f64).powf(-0.5);
        let coarse = PartitionParams::new(
            ClusterTag {
                kind: ClusterKind::Coarse,
                j: 0,
                copy: 0,
            },
            beta_coarse,
            stats,
            &consts.partition,
        );
        let coarse_end = mis_end + coarse.total_rounds();

        let mut fine = Vec::new();
        let mut fine_ends = Vec::new();
        let mut at = coarse_end;
        for &j in &fine_js {
            for copy in 0..copies {
                let params = PartitionParams::new(
                    ClusterTag {
                        kind: ClusterKind::Fine,
                        j: j as u8,
                        copy: copy as u16,
                    },
                    (-(j as f64)).exp2(),
                    stats,
                    &consts.partition,
                );
                at += params.total_rounds();
                fine.push((j, params));
                fine_ends.push(at);
            }
        }

        let seq_layers = (consts.seq_radius_mult * log_n as f64 / beta_coarse).ceil() as u32;
        let seq_end = at + seq_layers as u64 * coarse.layer_len();

        let ell_fine = |j: u32| -> u32 {
            (consts.ell_fine_mult * log_d_alpha * (j as f64).exp2()).ceil() as u32
        };
        let slot_ell_max = fine_js.iter().copied().map(ell_fine).max().unwrap_or(1);
        let icp_block = (consts.icp_decay_iters * log_n) as u64;
        let main_slot_len = 2 * 3 * slot_ell_max as u64 * icp_block;

        let bg_beta = (d as f64).powf(-0.1);
        let bg_part_template = PartitionParams::new(
            ClusterTag {
                kind: ClusterKind::Background,
                j: 0,
                copy: 0,
            },
            bg_beta,
            stats,
            &consts.partition,
        );
        let bg_part_len = bg_part_template.total_rounds();
        let ell_bg = (consts.ell_bg_mult * log_n as f64 / bg_beta).ceil() as u32;
        let bg_slot_len = 2 * 3 * ell_bg as u64 * icp_block;

        let budget = (consts.budget_kappa1 * d as f64 * log_d_alpha
            + consts.budget_kappa2 * (log_n as f64).powi(4))
        .ceil() as u64;

        CompeteSchedule {
            log_n,
            d,
            alpha,
            log_d_alpha,
            fine_js,
            copies,
            seq_len,
            degraded,
            icp_decay_iters: consts.icp_decay_iters,
            ell_fine_mult: consts.ell_fine_mult,
            mis_sched,
            coarse,
            fine,
            mis_end,
            coarse_end,
            fine_ends,
            seq_layers,
            seq_end,
            slot_ell_max,
            main_slot_len,
            bg_beta,
            bg_part_template,
            bg_part_len,
            ell_bg,
            bg_slot_len,
            budget,
        }
    }

    pub fn seq_start(&self) -> u64 {
        self.fine_ends.last().copied().unwrap_or(self.coarse_end)
    }

    pub fn ell_fine(&self, j: u32) -> u32 {
        (self.ell_fine_mult * self.log_d_alpha * (j as f64).exp2()).ceil() as u32
    }

    pub fn bank_index(&self, j: u32, copy: u32) -> usize {
        let jpos = self
            .fine_js
            .iter()
            .position(|&x| x == j)
            .expect("j in range");
        jpos * self.copies as usize + copy as usize
    }

    /// The coarse cluster's choice of fine clustering for a given slot,
    /// derived from its announced seed.
    pub fn pick(&self, seq_seed: u64, slot_idx: u64) -> (u32, u32) {
        let h = mix(seq_seed, slot_idx % self.seq_len, 0x5e9);
        let j = self.fine_js[(h as usize) % self.fine_js.len()];
        let copy = ((h >> 32) % self.copies as u64) as u32;
        (j, copy)
    }

    pub fn bg_part(&self, copy: u16) -> PartitionParams {
        let mut p = self.bg_part_template;
        p.tag = ClusterTag {
            kind: ClusterKind::Background,
            j: 0,
            copy,
        };
        p
    }

    /// Total setup length (everything before the propagation loop), in
    /// global rounds.
    pub fn setup_rounds_global(&self) -> u64 {
        2 * self.seq_end
    }
}

/// One competing source.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub node: u32,
    pub rank: Rank,
    pub payload: Vec<u8>,
}

/// Outcome of one dissemination run.
#[derive(Debug, Clone)]
pub struct CompeteOutcome {
    pub winner: Rank,
    /// Final message per node.
    pub per_node: Vec<Option<RankedMessage>>,
    pub success: bool,
    /// Global rounds until every node held the winner (modulo the polling
    /// interval); None when the budget ran out first.
    pub rounds_to_agreement: Option<u64>,
    pub budget: u64,
    pub degraded: bool,
    pub uninformed: Vec<u32>,
    pub rounds: u64,
    pub max_payload_bits: u64,
    pub validated_rounds: u64,
    pub fingerprint: u64,
    pub mis_size: usize,
}

/// Run Compete(S): disseminate the highest-ranked candidate message to
/// every node, within the configured round budget.
pub fn compete(
    graph: &Graph,
    stats: &GraphStats,
    candidates: &[Candidate],
    consts: &CompeteConstants,
    seed: u64,
) -> Result<CompeteOutcome, SimError> {
    assert!(
        !candidates.is_empty(),
        "compete needs a non-empty candidate set"
    );
    let sched = Arc::new(CompeteSchedule::new(stats, consts));
    let n = graph.n();
    let mut initial: Vec<Option<RankedMessage>> = vec![None; n];
    for c in candidates {
        let msg = RankedMessage {
            rank: c.rank,
            payload: c.payload.clone(),
        };
        match &initial[c.node as usize] {
            Some(held) if held.rank >= msg.rank => {}
            _ => initial[c.node as usize] = Some(msg),
        }
    }
    let winner = candidates.iter().map(|c| c.rank).max().expect("non-empty");

    let slots: Vec<SharedSlot> = initial.into_iter().map(SharedSlot::new).collect();
    let programs: Vec<Multiplex<MainProcess, BgProcess>> = (0..n)
        .map(|v| {
            multiplex(
                MainProcess::new(sched.clone(), slots[v].clone(), v as u32),
                BgProcess::new(sched.clone(), slots[v].clone(), v as u32),
            )
        })
        .collect();

    let opts = RunOptions::new(sched.budget, seed).check_every(64);
    let stop_slots = slots.clone();
    let res = run_with(graph, programs, &opts, move |_, _progs: &[_]| {
        stop_slots.iter().all(|s| s.rank() == Some(winner))
    })?;

    let per_node: Vec<Option<RankedMessage>> = slots
        .iter()
        .map(|s| s.get().map(|m| (*m).clone()))
        .collect();
    let success = per_node
        .iter()
        .all(|m| m.as_ref().map(|m| m.rank) == Some(winner));
    let uninformed: Vec<u32> = (0..n as u32)
        .filter(|&v| per_node[v as usize].as_ref().map(|m| m.rank) != Some(winner))
        .collect();
    let mis_size = res.programs.iter().filter(|p| p.main().is_mis).count();
    Ok(CompeteOutcome {
        winner,
        per_node,
        success,
        rounds_to_agreement: success.then_some(res.trace.rounds),
        budget: sched.budget,
        degraded: sched.degraded,
        uninformed,
        rounds: res.trace.rounds,
        max_payload_bits: res.trace.max_payload_bits,
        validated_rounds: res.trace.validated_rounds,
        fingerprint: res.trace.fingerprint,
        mis_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{compute_stats, AlphaMode};

    fn rank(p: u64) -> Rank {
        Rank {
            primary: p,
            tiebreak: p,
        }
    }

    #[test]
    fn single_node_keeps_its_message() {
        let g = Graph::empty(1);
        let stats = compute_stats(&g, AlphaMode::Exact).unwrap();
        let out = compete(
            &g,
            &stats,
            &[Candidate {
                node: 0,
                rank: rank(1),
                payload: b"m".to_vec(),
            }],
            &CompeteConstants::default(),
            1,
        )
        .unwrap();
        assert!(out.success);
        assert_eq!(out.per_node[0].as_ref().unwrap().payload, b"m".to_vec());
    }

    #[test]
    fn p3_broadcast_from_middle() {
        let g = Graph::path(3);
        let stats = compute_stats(&g, AlphaMode::Exact).unwrap();
        let out = compete(
            &g,
            &stats,
            &[Candidate {
                node: 1,
                rank: rank(5),
                payload: b"hello".to_vec(),
            }],
            &CompeteConstants::default(),
            7,
        )
        .unwrap();
        assert!(out.success, "uninformed: {:?}", out.uninformed);
        for v in 0..3 {
            assert_eq!(out.per_node[v].as_ref().unwrap().payload, b"hello".to_vec());
        }
    }

    #[test]
    fn all_candidates_agree_on_max() {
        let g = Graph::path(8);
        let stats = compute_stats(&g, AlphaMode::Exact).unwrap();
        let candidates: Vec<Candidate> = (0..8)
            .map(|v| Candidate {
                node: v,
                rank: rank(100 + v as u64),
                payload: vec![v as u8],
            })
            .collect();
        let out = compete(&g, &stats, &candidates, &CompeteConstants::default(), 3).unwrap();
        assert!(out.success, "uninformed: {:?}", out.uninformed);
        assert_eq!(out.winner, rank(107));
        for v in 0..8 {
            assert_eq!(out.per_node[v].as_ref().unwrap().payload, vec![7u8]);
        }
    }

    #[test]
    fn disconnected_components_never_mix() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let stats = compute_stats(&g, AlphaMode::Exact).unwrap();
        let out = compete(
            &g,
            &stats,
            &[Candidate {
                node: 0,
                rank: rank(9),
                payload: b"left".to_vec(),
            }],
            &CompeteConstants::default(),
            11,
        )
        .unwrap();
        assert!(!out.success);
        for v in 3..6 {
            assert!(out.per_node[v].is_none(), "node {v} crossed components");
        }
    }
}
