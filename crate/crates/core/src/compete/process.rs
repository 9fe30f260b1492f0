//! The per-node programs of the dissemination protocol: the main process
//! (MIS, coarse clustering, fine clustering bank, sequence agreement, then
//! scheduled propagation) and the background process (its own clustering
//! bank over all-node centers, cycled round-robin). The two run
//! time-multiplexed and share only the node's message slot.

use super::icp::{IcpSlot, Membership};
use super::CompeteSchedule;
use crate::cluster::PartitionProgram;
use crate::mis::MisProgram;
use crate::sim::{Action, NodeCtx, NodeProgram, Payload};
use crate::wire::{Rank, RankedMessage, Wire};
use std::sync::{Arc, Mutex};

/// A node's current message, shared between its two processes. The
/// override rule is enforced here: the slot only ever moves up in rank.
#[derive(Clone)]
pub struct SharedSlot(Arc<Mutex<Option<Arc<RankedMessage>>>>);

impl SharedSlot {
    pub fn new(initial: Option<RankedMessage>) -> SharedSlot {
        SharedSlot(Arc::new(Mutex::new(initial.map(Arc::new))))
    }

    pub fn fold(&self, msg: &RankedMessage) {
        let mut held = self.0.lock().unwrap();
        match held.as_ref() {
            Some(h) if msg.rank <= h.rank => {}
            _ => *held = Some(Arc::new(msg.clone())),
        }
    }

    pub fn get(&self) -> Option<Arc<RankedMessage>> {
        self.0.lock().unwrap().clone()
    }

    pub fn rank(&self) -> Option<Rank> {
        self.0.lock().unwrap().as_ref().map(|m| m.rank)
    }
}

enum MainCursor {
    Mis,
    Coarse,
    Fine(usize),
    Seq,
    Propagate,
}

pub struct MainProcess {
    sched: Arc<CompeteSchedule>,
    slot: SharedSlot,
    node: u32,
    cursor: MainCursor,
    mis: Option<Box<MisProgram>>,
    pub is_mis: bool,
    part: Option<PartitionProgram>,
    coarse_done: Option<Membership>,
    fine_done: Vec<Option<Membership>>,
    seq_seed: Option<u64>,
    seq_relay: Option<Payload>,
    icp: Option<(u64, IcpSlot)>,
    idle: u64,
}

impl MainProcess {
    pub fn new(sched: Arc<CompeteSchedule>, slot: SharedSlot, node: u32) -> MainProcess {
        let mis = MisProgram::new(sched.mis_sched);
        let fine_count = sched.fine.len();
        MainProcess {
            sched,
            slot,
            node,
            cursor: MainCursor::Mis,
            mis: Some(Box::new(mis)),
            is_mis: false,
            part: None,
            coarse_done: None,
            fine_done: vec![None; fine_count],
            seq_seed: None,
            seq_relay: None,
            icp: None,
            idle: 0,
        }
    }

    fn cursor_end(&self) -> u64 {
        match self.cursor {
            MainCursor::Mis => self.sched.mis_end,
            MainCursor::Coarse => self.sched.coarse_end,
            MainCursor::Fine(i) => self.sched.fine_ends[i],
            MainCursor::Seq => self.sched.seq_end,
            MainCursor::Propagate => u64::MAX,
        }
    }

    fn cursor_start(&self) -> u64 {
        match self.cursor {
            MainCursor::Mis => 0,
            MainCursor::Coarse => self.sched.mis_end,
            MainCursor::Fine(i) => {
                if i == 0 {
                    self.sched.coarse_end
                } else {
                    self.sched.fine_ends[i - 1]
                }
            }
            MainCursor::Seq => self.sched.seq_start(),
            MainCursor::Propagate => self.sched.seq_end,
        }
    }

    /// Advance past finished phases. When the step landed exactly one round
    /// past a boundary, the pending reception belongs to the finished phase
    /// and is routed into its final observation.
    fn advance(&mut self, ctx: &mut NodeCtx<'_>) {
        while ctx.round >= self.cursor_end() {
            let boundary = self.cursor_end();
            let start = self.cursor_start();
            let last_recv = if ctx.round == boundary { ctx.received } else { None };
            match self.cursor {
                MainCursor::Mis => {
                    let mut mis = self.mis.take().expect("mis runs once");
                    let mut sub = NodeCtx {
                        node: ctx.node,
                        id: ctx.id,
                        round: boundary - start,
                        received: last_recv,
                        rng: ctx.rng,
                    };
                    mis.finish(&mut sub);
                    self.is_mis = mis.in_mis();
                    self.part = Some(PartitionProgram::new(self.sched.coarse, self.is_mis));
                    self.cursor = MainCursor::Coarse;
                }
                MainCursor::Coarse => {
                    self.coarse_done = self.finish_partition(ctx, boundary - start, last_recv);
                    self.cursor = if self.sched.fine.is_empty() {
                        self.part = None;
                        MainCursor::Seq
                    } else {
                        self.part =
                            Some(PartitionProgram::new(self.sched.fine[0].1, self.is_mis));
                        MainCursor::Fine(0)
                    };
                }
                MainCursor::Fine(i) => {
                    self.fine_done[i] = self.finish_partition(ctx, boundary - start, last_recv);
                    if i + 1 < self.sched.fine.len() {
                        self.part =
                            Some(PartitionProgram::new(self.sched.fine[i + 1].1, self.is_mis));
                        self.cursor = MainCursor::Fine(i + 1);
                    } else {
                        self.part = None;
                        self.cursor = MainCursor::Seq;
                    }
                }
                MainCursor::Seq => {
                    self.cursor = MainCursor::Propagate;
                }
                MainCursor::Propagate => unreachable!("propagation never ends"),
            }
        }
    }

    fn finish_partition(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        final_round: u64,
        last_recv: Option<&Payload>,
    ) -> Option<Membership> {
        let mut part = self.part.take()?;
        let mut sub = NodeCtx {
            node: ctx.node,
            id: ctx.id,
            round: final_round,
            received: last_recv,
            rng: ctx.rng,
        };
        part.finish(&mut sub);
        part.assigned_center_seed()
            .map(|(center, hop, cseed)| Membership { center, hop, cseed })
    }

    /// I coordinate my coarse cluster iff I am its center.
    fn is_coarse_center(&self) -> bool {
        self.coarse_done
            .map_or(false, |m| m.center == self.node && m.hop == 0)
    }

    fn absorb_seq(&mut self, center: u32, seed: u64, raw: &Payload) {
        if self.seq_seed.is_some() {
            return;
        }
        let Some(mine) = self.coarse_done else { return };
        if mine.center == center {
            self.seq_seed = Some(seed);
            self.seq_relay = Some(raw.clone());
        }
    }

    fn act_seq(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        let pos = ctx.round - self.sched.seq_start();
        // Coarse centers mint their sequence seed at the phase start.
        if self.is_coarse_center() && self.seq_seed.is_none() {
            use rand::Rng;
            let seed: u64 = ctx.rng.gen();
            self.seq_seed = Some(seed);
            self.seq_relay = Some(
                Wire::Seq {
                    coarse_center: self.node,
                    seed,
                }
                .encode(),
            );
        }
        let layer_len = self.sched.coarse.layer_len();
        let layer = (pos / layer_len) as u32;
        let (Some(mine), Some(relay)) = (self.coarse_done, &self.seq_relay) else {
            self.idle = self.cursor_end();
            return Action::Listen;
        };
        if mine.hop == layer && layer < self.sched.seq_layers {
            use rand::Rng;
            let i = (pos % self.sched.log_n as u64) as i32 + 1;
            self.idle = ctx.round + 1;
            if ctx.rng.gen::<f64>() < (-i as f64).exp2() {
                return Action::Transmit(relay.clone());
            }
            return Action::Listen;
        }
        self.idle = if mine.hop > layer && mine.hop < self.sched.seq_layers {
            self.sched.seq_start() + mine.hop as u64 * layer_len
        } else {
            self.cursor_end()
        };
        Action::Listen
    }

    fn act_propagate(&mut self, ctx: &mut NodeCtx<'_>, decoded: Option<&Wire>) -> Action {
        let pos_total = ctx.round - self.sched.seq_end;
        let slot_len = self.sched.main_slot_len;
        let slot_idx = pos_total / slot_len;
        let pos = pos_total % slot_len;
        if self.icp.as_ref().map(|(s, _)| *s) != Some(slot_idx) {
            let icp = self.build_slot(slot_idx);
            self.icp = Some((slot_idx, icp));
        }
        let (_, icp) = self.icp.as_mut().expect("just built");
        if let (Some(w), Some(p)) = (decoded, ctx.received) {
            icp.observe(w, p);
        }
        let best = self.slot.get();
        let action = icp.act(pos, best.as_deref(), ctx.rng);
        self.idle = match icp.next_action_round(pos + 1, best.is_some()) {
            u64::MAX => u64::MAX,
            _ => ctx.round + 1,
        };
        action
    }

    fn build_slot(&self, slot_idx: u64) -> IcpSlot {
        let sched = &self.sched;
        match self.seq_seed {
            Some(seed) if !sched.degraded => {
                let (j, copy) = sched.pick(seed, slot_idx);
                let member = self.fine_done[sched.bank_index(j, copy)];
                IcpSlot::new(
                    crate::wire::ClusterTag {
                        kind: crate::wire::ClusterKind::Fine,
                        j: j as u8,
                        copy: copy as u16,
                    },
                    slot_idx as u32,
                    sched.ell_fine(j),
                    sched.slot_ell_max,
                    member,
                    self.node,
                    sched.log_n,
                    sched.icp_decay_iters,
                )
            }
            // Without the sequence (orphaned from the coarse clustering, or
            // degraded mode) the node cannot know which fine clustering is
            // in use: it stays silent in these slots and only listens.
            _ => IcpSlot::new(
                crate::wire::ClusterTag {
                    kind: crate::wire::ClusterKind::Fine,
                    j: 0,
                    copy: 0,
                },
                slot_idx as u32,
                0,
                sched.slot_ell_max,
                None,
                self.node,
                sched.log_n,
                sched.icp_decay_iters,
            ),
        }
    }
}

impl NodeProgram for MainProcess {
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        let decoded = ctx.received.and_then(|p| Wire::decode(p));
        if let Some(Wire::Icp { msg, .. }) = &decoded {
            self.slot.fold(msg);
        }
        if let Some(Wire::Seq { coarse_center, seed }) = &decoded {
            let raw = ctx.received.expect("decoded from reception").clone();
            self.absorb_seq(*coarse_center, *seed, &raw);
        }
        self.advance(ctx);
        let action = match self.cursor {
            MainCursor::Mis => {
                let mis = self.mis.as_mut().expect("in mis phase");
                let mut sub = NodeCtx {
                    node: ctx.node,
                    id: ctx.id,
                    round: ctx.round,
                    received: ctx.received,
                    rng: ctx.rng,
                };
                let a = mis.step(&mut sub);
                self.idle = mis.idle_until().min(self.cursor_end());
                a
            }
            MainCursor::Coarse | MainCursor::Fine(_) => {
                let start = self.cursor_start();
                let end = self.cursor_end();
                let part = self.part.as_mut().expect("partition phase");
                let mut sub = NodeCtx {
                    node: ctx.node,
                    id: ctx.id,
                    round: ctx.round - start,
                    received: ctx.received,
                    rng: ctx.rng,
                };
                let a = part.step(&mut sub);
                self.idle = part.idle_until().saturating_add(start).min(end);
                a
            }
            MainCursor::Seq => self.act_seq(ctx),
            MainCursor::Propagate => self.act_propagate(ctx, decoded.as_ref()),
        };
        action
    }

    fn idle_until(&self) -> u64 {
        self.idle
    }

    fn finish(&mut self, ctx: &mut NodeCtx<'_>) {
        let decoded = ctx.received.and_then(|p| Wire::decode(p));
        if let Some(Wire::Icp { msg, .. }) = &decoded {
            self.slot.fold(msg);
        }
    }
}

enum BgCursor {
    Part(usize),
    Cycle,
}

pub struct BgProcess {
    sched: Arc<CompeteSchedule>,
    slot: SharedSlot,
    node: u32,
    cursor: BgCursor,
    part: Option<PartitionProgram>,
    done: Vec<Option<Membership>>,
    icp: Option<(u64, IcpSlot)>,
    idle: u64,
}

impl BgProcess {
    pub fn new(sched: Arc<CompeteSchedule>, slot: SharedSlot, node: u32) -> BgProcess {
        let copies = sched.copies as usize;
        let first = PartitionProgram::new(sched.bg_part(0), true);
        BgProcess {
            sched,
            slot,
            node,
            cursor: BgCursor::Part(0),
            part: Some(first),
            done: vec![None; copies],
            icp: None,
            idle: 0,
        }
    }

    fn cursor_end(&self) -> u64 {
        match self.cursor {
            BgCursor::Part(i) => (i as u64 + 1) * self.sched.bg_part_len,
            BgCursor::Cycle => u64::MAX,
        }
    }

    fn advance(&mut self, ctx: &mut NodeCtx<'_>) {
        while ctx.round >= self.cursor_end() {
            let boundary = self.cursor_end();
            let last_recv = if ctx.round == boundary { ctx.received } else { None };
            match self.cursor {
                BgCursor::Part(i) => {
                    if let Some(mut part) = self.part.take() {
                        let mut sub = NodeCtx {
                            node: ctx.node,
                            id: ctx.id,
                            round: self.sched.bg_part_len,
                            received: last_recv,
                            rng: ctx.rng,
                        };
                        part.finish(&mut sub);
                        self.done[i] = part
                            .assigned_center_seed()
                            .map(|(center, hop, cseed)| Membership { center, hop, cseed });
                    }
                    if i + 1 < self.sched.copies as usize {
                        self.part = Some(PartitionProgram::new(
                            self.sched.bg_part(i as u16 + 1),
                            true,
                        ));
                        self.cursor = BgCursor::Part(i + 1);
                    } else {
                        self.cursor = BgCursor::Cycle;
                    }
                }
                BgCursor::Cycle => unreachable!("cycling never ends"),
            }
        }
    }
}

impl NodeProgram for BgProcess {
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        let decoded = ctx.received.and_then(|p| Wire::decode(p));
        if let Some(Wire::Icp { msg, .. }) = &decoded {
            self.slot.fold(msg);
        }
        self.advance(ctx);
        match self.cursor {
            BgCursor::Part(i) => {
                let start = i as u64 * self.sched.bg_part_len;
                let part = self.part.as_mut().expect("bg partition phase");
                let mut sub = NodeCtx {
                    node: ctx.node,
                    id: ctx.id,
                    round: ctx.round - start,
                    received: ctx.received,
                    rng: ctx.rng,
                };
                let a = part.step(&mut sub);
                self.idle = part
                    .idle_until()
                    .saturating_add(start)
                    .min(self.cursor_end());
                a
            }
            BgCursor::Cycle => {
                let bank_end = self.sched.copies as u64 * self.sched.bg_part_len;
                let pos_total = ctx.round - bank_end;
                let slot_len = self.sched.bg_slot_len;
                let slot_idx = pos_total / slot_len;
                let pos = pos_total % slot_len;
                if self.icp.as_ref().map(|(s, _)| *s) != Some(slot_idx) {
                    let copy = (slot_idx % self.sched.copies as u64) as u16;
                    let icp = IcpSlot::new(
                        crate::wire::ClusterTag {
                            kind: crate::wire::ClusterKind::Background,
                            j: 0,
                            copy,
                        },
                        slot_idx as u32,
                        self.sched.ell_bg,
                        self.sched.ell_bg,
                        self.done[copy as usize],
                        self.node,
                        self.sched.log_n,
                        self.sched.icp_decay_iters,
                    );
                    self.icp = Some((slot_idx, icp));
                }
                let (_, icp) = self.icp.as_mut().expect("just built");
                if let (Some(w), Some(p)) = (decoded.as_ref(), ctx.received) {
                    icp.observe(w, p);
                }
                let best = self.slot.get();
                let action = icp.act(pos, best.as_deref(), ctx.rng);
                self.idle = match icp.next_action_round(pos + 1, best.is_some()) {
                    u64::MAX => u64::MAX,
                    _ => ctx.round + 1,
                };
                action
            }
        }
    }

    fn idle_until(&self) -> u64 {
        self.idle
    }

    fn finish(&mut self, ctx: &mut NodeCtx<'_>) {
        let decoded = ctx.received.and_then(|p| Wire::decode(p));
        if let Some(Wire::Icp { msg, .. }) = &decoded {
            self.slot.fold(msg);
        }
    }
}
