//! Effective-degree probing. The sum d(v) of the desire levels of v's
//! neighbors is never computed exactly over the air; instead every node
//! sweeps damped transmission probabilities p(v)/2^i and v counts how often
//! it hears a lone transmission. A band of receptions at some damping level
//! separates d(v) >= 1 from d(v) <= 0.01 with high probability; between
//! those, either verdict may come back.

use crate::sim::{Action, NodeCtx, NodeProgram, Payload};
use crate::wire::Wire;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeVerdict {
    High,
    Low,
}

#[derive(Debug, Clone, Copy)]
pub struct EedParams {
    /// ceil(log2 n); the sweep runs i = 0..=log_n.
    pub log_n: u32,
    /// Steps per damping level; the calibrated constant.
    pub big_c: u32,
}

impl EedParams {
    pub fn subround_len(&self) -> u64 {
        (self.big_c * self.log_n) as u64
    }

    pub fn total_rounds(&self) -> u64 {
        (self.log_n as u64 + 1) * self.subround_len()
    }

    /// Reception-count threshold for a HIGH verdict at some damping level.
    pub fn threshold(&self) -> f64 {
        (self.big_c * self.log_n) as f64 / 33.0
    }
}

/// Standalone probe program: the node holds a fixed desire level 2^-p_exp
/// and participates in the sweep while counting receptions.
pub struct EedProgram {
    params: EedParams,
    p_exp: u32,
    counts: Vec<u32>,
    probe: Payload,
}

pub fn eed_program(p_exp: u32, params: EedParams) -> EedProgram {
    EedProgram {
        params,
        p_exp,
        counts: vec![0; params.log_n as usize + 1],
        probe: Wire::Probe.encode(),
    }
}

impl EedProgram {
    fn absorb(&mut self, round: u64, received: Option<&Payload>) {
        if received.is_none() || round == 0 {
            return;
        }
        let prev = round - 1;
        if prev < self.params.total_rounds() {
            let i = (prev / self.params.subround_len()) as usize;
            self.counts[i] += 1;
        }
    }

    pub fn verdict(&self) -> DegreeVerdict {
        let thr = self.params.threshold();
        if self.counts.iter().any(|&c| c as f64 >= thr) {
            DegreeVerdict::High
        } else {
            DegreeVerdict::Low
        }
    }
}

impl NodeProgram for EedProgram {
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        self.absorb(ctx.round, ctx.received);
        if ctx.round >= self.params.total_rounds() {
            return Action::Listen;
        }
        let i = (ctx.round / self.params.subround_len()) as u32;
        let p = -((self.p_exp + i) as f64);
        if ctx.rng.gen::<f64>() < p.exp2() {
            Action::Transmit(self.probe.clone())
        } else {
            Action::Listen
        }
    }

    fn finish(&mut self, ctx: &mut NodeCtx<'_>) {
        self.absorb(ctx.round, ctx.received);
    }

    fn output(&self) -> Option<Vec<u8>> {
        Some(match self.verdict() {
            DegreeVerdict::High => b"HIGH".to_vec(),
            DegreeVerdict::Low => b"LOW".to_vec(),
        })
    }
}
