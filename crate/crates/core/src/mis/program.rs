//! The per-node radio MIS state machine.
//!
//! Each outer round runs, in fixed schedule positions derived from the
//! round index: a marking draw, a Decay block announcing marks, the join
//! decision, a Decay block announcing joins, removal, and an
//! effective-degree probe sweep that drives the desire-level update
//! (halve on HIGH, double capped at 1/2 on LOW). Announcements carry their
//! outer round so stale messages are discarded.

use crate::sim::{Action, NodeCtx, NodeProgram, Payload};
use crate::wire::Wire;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisStatus {
    Active,
    InMis,
    Removed,
}

/// Tuning constants; all exposed through configuration. `c` scales the
/// outer-round budget (13 * c * log n); `big_c` the probe block length;
/// `decay_iters` the announcement amplification.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MisConstants {
    pub c: u32,
    pub big_c: u32,
    pub decay_iters: u32,
}

impl Default for MisConstants {
    fn default() -> Self {
        MisConstants {
            c: 4,
            big_c: 16,
            decay_iters: 30,
        }
    }
}

/// Fixed schedule arithmetic shared by every node.
#[derive(Debug, Clone, Copy)]
pub struct MisSchedule {
    pub log_n: u32,
    pub outer_rounds: u32,
    pub decay_iters: u32,
    pub big_c: u32,
}

impl MisSchedule {
    pub fn new(n_estimate: usize, consts: &MisConstants) -> MisSchedule {
        let log_n = super::decay::ceil_log2(n_estimate);
        MisSchedule {
            log_n,
            outer_rounds: 13 * consts.c * log_n,
            decay_iters: consts.decay_iters,
            big_c: consts.big_c,
        }
    }

    #[inline]
    pub fn decay_block(&self) -> u64 {
        (self.decay_iters * self.log_n) as u64
    }

    #[inline]
    pub fn eed_block(&self) -> u64 {
        ((self.log_n + 1) * self.big_c * self.log_n) as u64
    }

    #[inline]
    pub fn per_outer(&self) -> u64 {
        2 * self.decay_block() + self.eed_block()
    }

    pub fn total_rounds(&self) -> u64 {
        self.outer_rounds as u64 * self.per_outer()
    }

    fn eed_threshold(&self) -> f64 {
        (self.big_c * self.log_n) as f64 / 33.0
    }

    /// Which slot a given local round falls in.
    #[inline]
    fn slot(&self, round: u64) -> Slot {
        if round >= self.total_rounds() {
            return Slot::Done;
        }
        let per = self.per_outer();
        let outer = (round / per) as u32;
        let pos = round % per;
        let db = self.decay_block();
        if pos < db {
            Slot::MarkDecay {
                outer,
                i: (pos % self.log_n as u64) as u32 + 1,
            }
        } else if pos < 2 * db {
            let in_block = pos - db;
            Slot::JoinDecay {
                outer,
                first: in_block == 0,
                i: (in_block % self.log_n as u64) as u32 + 1,
            }
        } else {
            let in_block = pos - 2 * db;
            let sub = self.subround_len();
            Slot::Eed {
                outer,
                first: in_block == 0,
                i: (in_block / sub) as u32,
            }
        }
    }

    #[inline]
    fn subround_len(&self) -> u64 {
        (self.big_c * self.log_n) as u64
    }

    fn outer_start(&self, outer: u32) -> u64 {
        outer as u64 * self.per_outer()
    }

    fn eed_start(&self, outer: u32) -> u64 {
        self.outer_start(outer) + 2 * self.decay_block()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    MarkDecay { outer: u32, i: u32 },
    JoinDecay { outer: u32, first: bool, i: u32 },
    Eed { outer: u32, first: bool, i: u32 },
    Done,
}

pub struct MisProgram {
    sched: MisSchedule,
    pub status: MisStatus,
    /// Desire level p = 2^-p_exp, dyadic in (0, 1/2]; p_exp >= 1.
    pub p_exp: u32,
    cur_outer: u32,
    started: bool,
    marked: bool,
    heard_mark: bool,
    heard_join: bool,
    pub joined_at: Option<u32>,
    pub removed_at: Option<u32>,
    eed_counts: Vec<u32>,
    /// Sparse desire-level trajectory: (outer round, p_exp) on change.
    pub p_changes: Vec<(u32, u32)>,
    mark_msg: Payload,
    join_msg: Payload,
    probe_msg: Payload,
    idle: u64,
}

impl MisProgram {
    pub fn new(sched: MisSchedule) -> MisProgram {
        MisProgram {
            sched,
            status: MisStatus::Active,
            p_exp: 1,
            cur_outer: 0,
            started: false,
            marked: false,
            heard_mark: false,
            heard_join: false,
            joined_at: None,
            removed_at: None,
            eed_counts: vec![0; sched.log_n as usize + 1],
            p_changes: vec![(0, 1)],
            mark_msg: Wire::MisMark { round: 0 }.encode(),
            join_msg: Wire::MisJoin { round: 0 }.encode(),
            probe_msg: Wire::Probe.encode(),
            idle: 0,
        }
    }

    pub fn schedule(&self) -> &MisSchedule {
        &self.sched
    }

    pub fn in_mis(&self) -> bool {
        self.status == MisStatus::InMis
    }

    /// The outer round after which this node stopped being active, if any.
    pub fn settled_at(&self) -> Option<u32> {
        match self.status {
            MisStatus::Active => None,
            MisStatus::InMis => self.joined_at,
            MisStatus::Removed => self.removed_at,
        }
    }

    fn absorb(&mut self, round: u64, received: Option<&Payload>) {
        let Some(p) = received else { return };
        if round == 0 {
            return;
        }
        match self.sched.slot(round - 1) {
            Slot::MarkDecay { outer, .. } => {
                if let Some(Wire::MisMark { round: r }) = Wire::decode(p) {
                    if r == outer {
                        self.heard_mark = true;
                    }
                }
            }
            Slot::JoinDecay { outer, .. } => {
                if let Some(Wire::MisJoin { round: r }) = Wire::decode(p) {
                    if r == outer {
                        self.heard_join = true;
                    }
                }
            }
            Slot::Eed { i, .. } => {
                self.eed_counts[i as usize] += 1;
            }
            Slot::Done => {}
        }
    }

    /// Entering outer round `outer`: settle the previous round's probe
    /// verdict and draw this round's mark.
    fn enter_outer(&mut self, outer: u32, rng: &mut rand_chacha::ChaCha8Rng) {
        if self.started && outer > self.cur_outer {
            if self.status == MisStatus::Active {
                // Active nodes step through every probe block, so they
                // advance one outer round at a time; only settled nodes
                // (woken late by stray receptions) can jump.
                debug_assert_eq!(outer, self.cur_outer + 1);
                let thr = self.sched.eed_threshold();
                let high = self.eed_counts.iter().any(|&c| c as f64 >= thr);
                let new_exp = if high {
                    self.p_exp + 1
                } else {
                    self.p_exp.saturating_sub(1).max(1)
                };
                if new_exp != self.p_exp {
                    self.p_exp = new_exp;
                    self.p_changes.push((outer, new_exp));
                }
            }
        }
        self.started = true;
        self.cur_outer = outer;
        self.heard_mark = false;
        self.heard_join = false;
        self.eed_counts.iter_mut().for_each(|c| *c = 0);
        self.marked = false;
        if self.status == MisStatus::Active {
            self.marked = rng.gen::<f64>() < (-(self.p_exp as f64)).exp2();
            self.mark_msg = Wire::MisMark { round: outer }.encode();
            self.join_msg = Wire::MisJoin { round: outer }.encode();
        }
    }
}

impl NodeProgram for MisProgram {
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        self.absorb(ctx.round, ctx.received);
        let slot = self.sched.slot(ctx.round);
        let action = match slot {
            Slot::MarkDecay { outer, i } => {
                if !self.started || outer != self.cur_outer {
                    self.enter_outer(outer, ctx.rng);
                }
                if self.status == MisStatus::Active && self.marked {
                    self.idle = ctx.round + 1;
                    if ctx.rng.gen::<f64>() < (-(i as f64)).exp2() {
                        return Action::Transmit(self.mark_msg.clone());
                    }
                    return Action::Listen;
                }
                Action::Listen
            }
            Slot::JoinDecay { outer, first, i } => {
                if first && self.status == MisStatus::Active && self.marked && !self.heard_mark {
                    self.status = MisStatus::InMis;
                    self.joined_at = Some(outer);
                }
                if self.joined_at == Some(outer) {
                    self.idle = ctx.round + 1;
                    if ctx.rng.gen::<f64>() < (-(i as f64)).exp2() {
                        return Action::Transmit(self.join_msg.clone());
                    }
                    return Action::Listen;
                }
                Action::Listen
            }
            Slot::Eed { outer, first, i } => {
                if first && self.status == MisStatus::Active && self.heard_join {
                    self.status = MisStatus::Removed;
                    self.removed_at = Some(outer);
                }
                if self.status == MisStatus::Active {
                    self.idle = ctx.round + 1;
                    let p = -((self.p_exp + i) as f64);
                    if ctx.rng.gen::<f64>() < p.exp2() {
                        return Action::Transmit(self.probe_msg.clone());
                    }
                    return Action::Listen;
                }
                Action::Listen
            }
            Slot::Done => Action::Listen,
        };
        // Listening fallthrough: work out the next round this node must act.
        self.idle = match (self.status, slot) {
            (MisStatus::Active, Slot::MarkDecay { outer, .. })
            | (MisStatus::Active, Slot::JoinDecay { outer, .. }) => self.sched.eed_start(outer),
            (MisStatus::Active, Slot::Eed { .. }) => ctx.round + 1,
            // Joined or removed nodes never transmit again; receptions
            // still get delivered and absorbed.
            _ => u64::MAX,
        };
        action
    }

    fn idle_until(&self) -> u64 {
        self.idle
    }

    fn finish(&mut self, ctx: &mut NodeCtx<'_>) {
        self.absorb(ctx.round, ctx.received);
    }

    fn output(&self) -> Option<Vec<u8>> {
        self.in_mis().then(|| vec![1])
    }
}
