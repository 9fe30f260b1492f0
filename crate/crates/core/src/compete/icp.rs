//! One intra-cluster propagation call, as seen by a single node.
//!
//! The schedule timeline runs three phases over the cluster's flood layers:
//! center-out (the center's best message forward to radius ell), a
//! converge-cast of higher messages back toward the center, and center-out
//! again. Interleaved with it (odd sub-rounds) runs the patch timeline:
//! per damping level i, the whole cluster flips one coordinated coin with
//! probability 2^-i and, when it fires, holders of a message run one Decay
//! iteration. The patch traffic is what carries messages across cluster
//! boundaries, where the scheduled blocks collide.

use crate::rng::coordinated_unit;
use crate::sim::{Action, Payload};
use crate::wire::{ClusterTag, IcpPhase, Rank, RankedMessage, Wire};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Cluster membership for one propagation call.
#[derive(Debug, Clone, Copy)]
pub struct Membership {
    pub center: u32,
    pub hop: u32,
    pub cseed: u64,
}

pub struct IcpSlot {
    tag: ClusterTag,
    cycle: u32,
    /// Propagation radius for this node's own cluster.
    ell: u32,
    member: Option<Membership>,
    is_center: bool,
    log_n: u32,
    /// Rounds per flood layer on the schedule timeline.
    block: u64,
    /// Schedule-timeline length (3 * ell_max * block); the slot occupies
    /// twice this many process rounds.
    sched_len: u64,
    /// Rank broadcast by my center in the first out phase, as received.
    ph1_rank: Option<Rank>,
    out1_msg: Option<Payload>,
    out2_msg: Option<Payload>,
}

impl IcpSlot {
    pub fn new(
        tag: ClusterTag,
        cycle: u32,
        ell: u32,
        ell_max: u32,
        member: Option<Membership>,
        node: u32,
        log_n: u32,
        icp_decay_iters: u32,
    ) -> IcpSlot {
        let block = (icp_decay_iters * log_n) as u64;
        IcpSlot {
            tag,
            cycle,
            ell,
            member,
            is_center: member.map_or(false, |m| m.center == node && m.hop == 0),
            log_n,
            block,
            sched_len: 3 * ell_max as u64 * block,
            ph1_rank: None,
            out1_msg: None,
            out2_msg: None,
        }
    }

    pub fn slot_rounds(&self) -> u64 {
        2 * self.sched_len
    }

    /// Record a reception. The caller has already folded the message into
    /// its slot; this only tracks relay state for the scheduled phases.
    pub fn observe(&mut self, wire: &Wire, raw: &Payload) {
        let Wire::Icp {
            tag,
            cycle,
            phase,
            msg: _,
        } = wire
        else {
            return;
        };
        let Some(m) = self.member else { return };
        if *tag != self.tag || *cycle != self.cycle {
            return;
        }
        match phase {
            IcpPhase::Out1 => {
                if self.out1_msg.is_none() {
                    self.out1_msg = Some(raw.clone());
                    if let Wire::Icp { msg, .. } = wire {
                        self.ph1_rank = Some(msg.rank);
                    }
                }
            }
            IcpPhase::Out2 => {
                if self.out2_msg.is_none() {
                    self.out2_msg = Some(raw.clone());
                }
            }
            IcpPhase::Back | IcpPhase::Patch => {}
        }
        let _ = m;
    }

    fn encode(&self, phase: IcpPhase, msg: &RankedMessage) -> Payload {
        Wire::Icp {
            tag: self.tag,
            cycle: self.cycle,
            phase,
            msg: msg.clone(),
        }
        .encode()
    }

    /// Act for slot-local round `pos`. `best` is the node's current message.
    pub fn act(&mut self, pos: u64, best: Option<&RankedMessage>, rng: &mut ChaCha8Rng) -> Action {
        debug_assert!(pos < self.slot_rounds());
        let Some(m) = self.member else {
            return Action::Listen;
        };
        if pos % 2 == 0 {
            self.act_scheduled(pos / 2, m, best, rng)
        } else {
            self.act_patch(pos / 2, m, best, rng)
        }
    }

    fn decay_coin(&self, step: u64, rng: &mut ChaCha8Rng) -> bool {
        let i = (step % self.log_n as u64) as i32 + 1;
        rng.gen::<f64>() < (-i as f64).exp2()
    }

    fn act_scheduled(
        &mut self,
        t: u64,
        m: Membership,
        best: Option<&RankedMessage>,
        rng: &mut ChaCha8Rng,
    ) -> Action {
        let b = self.block;
        let ell = self.ell as u64;
        if ell == 0 || t >= 3 * ell * b {
            return Action::Listen;
        }
        if t < ell * b {
            // out phase 1: layer l transmits toward layer l+1
            let layer = (t / b) as u32;
            if layer == 0 && self.is_center {
                if let Some(msg) = best {
                    if self.decay_coin(t, rng) {
                        return Action::Transmit(self.encode(IcpPhase::Out1, msg));
                    }
                }
            } else if m.hop == layer && self.out1_msg.is_some() {
                if self.decay_coin(t, rng) {
                    return Action::Transmit(self.out1_msg.clone().unwrap());
                }
            }
            Action::Listen
        } else if t < 2 * ell * b {
            // converge-cast: layers ell..1, higher messages only
            let bt = t - ell * b;
            let layer = (ell - bt / b) as u32;
            let Some(msg) = best else {
                return Action::Listen;
            };
            let higher = match self.ph1_rank {
                Some(r) => msg.rank > r,
                None => true,
            };
            if m.hop == layer && higher && self.decay_coin(t, rng) {
                return Action::Transmit(self.encode(IcpPhase::Back, msg));
            }
            Action::Listen
        } else {
            // out phase 2, with the center's possibly improved message
            let layer = ((t - 2 * ell * b) / b) as u32;
            if layer == 0 && self.is_center {
                if let Some(msg) = best {
                    if self.decay_coin(t, rng) {
                        return Action::Transmit(self.encode(IcpPhase::Out2, msg));
                    }
                }
            } else if m.hop == layer && self.out2_msg.is_some() {
                if self.decay_coin(t, rng) {
                    return Action::Transmit(self.out2_msg.clone().unwrap());
                }
            }
            Action::Listen
        }
    }

    fn act_patch(
        &mut self,
        u: u64,
        m: Membership,
        best: Option<&RankedMessage>,
        rng: &mut ChaCha8Rng,
    ) -> Action {
        let Some(msg) = best else {
            return Action::Listen;
        };
        let log_n = self.log_n as u64;
        let phase_idx = u / log_n;
        let i = (phase_idx % log_n) as i32 + 1;
        // One coin per cluster per damping phase, derived from the center's
        // seed so every member agrees without communication.
        let fire = coordinated_unit(m.cseed, self.cycle as u64, phase_idx) < (-i as f64).exp2();
        if fire && self.decay_coin(u, rng) {
            return Action::Transmit(self.encode(IcpPhase::Patch, msg));
        }
        Action::Listen
    }

    /// First slot round at or after `pos` where this node might transmit;
    /// used for idle skipping. Every reception folds a message into the
    /// node's slot, so a node without a message has nothing to relay and
    /// can sleep until something arrives.
    pub fn next_action_round(&self, pos: u64, holds_message: bool) -> u64 {
        if self.member.is_none() || !holds_message {
            return u64::MAX;
        }
        pos
    }
}
