//! The synchronous-round simulator.
//!
//! Each round, every node commits to an [`Action`]; the engine then computes
//! the [`RoundOutcome`]: node `v` receives a message iff `v` listened and
//! exactly one neighbor of `v` transmitted. Transmitters hear nothing in
//! their own transmit round, and a listener cannot distinguish interference
//! from silence.

mod graph;
pub mod trace;

pub use graph::{Embedding, Graph};
pub use trace::{RoundRecord, Trace};

use crate::error::SimError;
use crate::rng::{self, STREAM_ID, STREAM_PROTOCOL};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Opaque message payload. Cheap to clone; the model does not bound payload
/// size, but the harness records the maximum observed bits as a diagnostic.
pub type Payload = Arc<[u8]>;

pub fn payload(bytes: &[u8]) -> Payload {
    Arc::from(bytes)
}

/// What a node does in one round: exactly one of transmit or listen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Listen,
    Transmit(Payload),
}

impl Action {
    pub fn is_transmit(&self) -> bool {
        matches!(self, Action::Transmit(_))
    }
}

/// Per-node receptions for one round.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundOutcome {
    pub received: Vec<Option<Payload>>,
}

/// Everything a program sees when stepped.
pub struct NodeCtx<'a> {
    /// Index of this node in the graph.
    pub node: usize,
    /// 64-bit identifier drawn uniformly at random at simulation start.
    /// Unique with high probability; nothing in the simulator assumes it.
    pub id: u64,
    /// Round index as observed by this program (contiguous, starts at 0).
    pub round: u64,
    /// What this program's previous round delivered, if anything.
    pub received: Option<&'a Payload>,
    /// This node's private randomness.
    pub rng: &'a mut ChaCha8Rng,
}

/// A per-node protocol state machine, stepped once per round.
pub trait NodeProgram {
    /// Observe the previous round's reception and commit to this round's
    /// action.
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action;

    /// Rounds strictly below the returned value may be skipped by the
    /// runner whenever nothing was received: the program promises it would
    /// listen and change no state (and draw no randomness) in them.
    fn idle_until(&self) -> u64 {
        0
    }

    /// Called once after the final round so the last reception is observed.
    fn finish(&mut self, _ctx: &mut NodeCtx<'_>) {}

    /// Declared terminal output, recorded in the trace.
    fn output(&self) -> Option<Vec<u8>> {
        None
    }
}

/// One round of the radio model, as a pure function. `actions[v]` is node
/// `v`'s action; the outcome satisfies the reception invariant exactly.
pub fn step_round(graph: &Graph, actions: &[Action]) -> Result<RoundOutcome, SimError> {
    if actions.len() != graph.n() {
        return Err(SimError::ActionCountMismatch {
            expected: graph.n(),
            got: actions.len(),
        });
    }
    let mut engine = Engine::new(graph.n());
    engine.resolve(graph, actions);
    let mut received = vec![None; graph.n()];
    for &(v, ref p) in &engine.delivered {
        received[v as usize] = Some(p.clone());
    }
    Ok(RoundOutcome { received })
}

/// Independent check of the reception invariant for one round. Listener-
/// centric: works from each node's own adjacency rather than the engine's
/// transmitter push, so it exercises a different code path.
pub fn verify_round(graph: &Graph, actions: &[Action], outcome: &RoundOutcome) -> Result<(), SimError> {
    verify_round_at(graph, actions, &outcome.received, 0)
}

fn verify_round_at(
    graph: &Graph,
    actions: &[Action],
    received: &[Option<Payload>],
    round: u64,
) -> Result<(), SimError> {
    let n = graph.n();
    let fail = |node: usize, msg: String| -> SimError {
        SimError::ReceptionViolation { round, node, msg }
    };
    let transmitters: Vec<u32> = (0..n as u32)
        .filter(|&v| actions[v as usize].is_transmit())
        .collect();
    match transmitters.len() {
        0 => {
            for v in 0..n {
                if received[v].is_some() {
                    return Err(fail(v, "received with no transmitter in the network".into()));
                }
            }
        }
        1 => {
            let u = transmitters[0] as usize;
            let p = match &actions[u] {
                Action::Transmit(p) => p,
                Action::Listen => unreachable!(),
            };
            for v in 0..n {
                let adjacent = graph.has_edge(v, u);
                let expect = v != u && adjacent && !actions[v].is_transmit();
                match (&received[v], expect) {
                    (Some(got), true) if got == p => {}
                    (None, false) => {}
                    (Some(_), true) => return Err(fail(v, "received wrong message".into())),
                    (Some(_), false) => return Err(fail(v, "received without a lone transmitting neighbor".into())),
                    (None, true) => return Err(fail(v, "missed a lone transmitting neighbor".into())),
                }
            }
        }
        _ => {
            let mut transmitting = vec![false; n];
            for &t in &transmitters {
                transmitting[t as usize] = true;
            }
            for v in 0..n {
                if actions[v].is_transmit() {
                    if received[v].is_some() {
                        return Err(fail(v, "transmitter received a message".into()));
                    }
                    continue;
                }
                // count transmitting neighbors, early exit at 2
                let mut count = 0u32;
                let mut the_one = 0u32;
                for &u in graph.neighbors(v) {
                    if transmitting[u as usize] {
                        count += 1;
                        the_one = u;
                        if count == 2 {
                            break;
                        }
                    }
                }
                match (&received[v], count) {
                    (None, 1) => return Err(fail(v, "missed a lone transmitting neighbor".into())),
                    (None, _) => {}
                    (Some(got), 1) => {
                        let p = match &actions[the_one as usize] {
                            Action::Transmit(p) => p,
                            Action::Listen => unreachable!(),
                        };
                        if got != p {
                            return Err(fail(v, "received wrong message".into()));
                        }
                    }
                    (Some(_), 0) => return Err(fail(v, "received out of silence".into())),
                    (Some(_), _) => return Err(fail(v, "received through a collision".into())),
                }
            }
        }
    }
    Ok(())
}

/// Reusable buffers for the round resolution inner loop.
struct Engine {
    /// Per-node transmit-neighbor count, valid when stamp matches epoch.
    counts: Vec<u32>,
    stamp: Vec<u32>,
    last_from: Vec<u32>,
    epoch: u32,
    touched: Vec<u32>,
    transmitters: Vec<u32>,
    /// (node, payload) pairs delivered this round.
    delivered: Vec<(u32, Payload)>,
}

impl Engine {
    fn new(n: usize) -> Engine {
        Engine {
            counts: vec![0; n],
            stamp: vec![0; n],
            last_from: vec![0; n],
            epoch: 0,
            touched: Vec::new(),
            transmitters: Vec::new(),
            delivered: Vec::new(),
        }
    }

    /// Compute this round's deliveries from `actions`.
    fn resolve(&mut self, graph: &Graph, actions: &[Action]) {
        self.epoch = self.epoch.wrapping_add(1);
        self.touched.clear();
        self.transmitters.clear();
        self.delivered.clear();
        for (v, a) in actions.iter().enumerate() {
            if a.is_transmit() {
                self.transmitters.push(v as u32);
            }
        }
        for &t in &self.transmitters {
            for &nb in graph.neighbors(t as usize) {
                let nbi = nb as usize;
                if self.stamp[nbi] != self.epoch {
                    self.stamp[nbi] = self.epoch;
                    self.counts[nbi] = 1;
                    self.touched.push(nb);
                } else {
                    self.counts[nbi] += 1;
                }
                self.last_from[nbi] = t;
            }
        }
        for &v in &self.touched {
            let vi = v as usize;
            if self.counts[vi] == 1 && !actions[vi].is_transmit() {
                let from = self.last_from[vi] as usize;
                if let Action::Transmit(p) = &actions[from] {
                    self.delivered.push((v, p.clone()));
                }
            }
        }
    }
}

/// Options for [`run_with`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub max_rounds: u64,
    pub seed: u64,
    /// Verify the reception invariant on every round, via [`verify_round`]'s
    /// independent listener-side logic.
    pub validate: bool,
    /// Record full per-round actions/receptions (memory-heavy; use for
    /// small runs and format export).
    pub record_full: bool,
    /// How often (in rounds) the stop predicate is polled; 0 disables it.
    pub check_interval: u64,
}

impl RunOptions {
    pub fn new(max_rounds: u64, seed: u64) -> RunOptions {
        RunOptions {
            max_rounds,
            seed,
            validate: true,
            record_full: false,
            check_interval: 0,
        }
    }

    pub fn full(mut self) -> Self {
        self.record_full = true;
        self
    }

    pub fn no_validate(mut self) -> Self {
        self.validate = false;
        self
    }

    pub fn check_every(mut self, interval: u64) -> Self {
        self.check_interval = interval;
        self
    }
}

/// A finished run: the trace plus the final program states.
pub struct RunResult<P> {
    pub trace: Trace,
    pub programs: Vec<P>,
    pub ids: Vec<u64>,
}

/// Run the programs lock-step for `max_rounds` rounds. Identical
/// `(graph, programs, seed)` yield bit-identical traces.
pub fn run<P: NodeProgram>(
    graph: &Graph,
    programs: Vec<P>,
    max_rounds: u64,
    seed: u64,
) -> Result<RunResult<P>, SimError> {
    run_with(
        graph,
        programs,
        &RunOptions::new(max_rounds, seed).full(),
        |_, _: &[P]| false,
    )
}

/// Run with options and an optional early-stop predicate (polled every
/// `check_interval` rounds over the current program states).
pub fn run_with<P, F>(
    graph: &Graph,
    mut programs: Vec<P>,
    opts: &RunOptions,
    mut stop: F,
) -> Result<RunResult<P>, SimError>
where
    P: NodeProgram,
    F: FnMut(u64, &[P]) -> bool,
{
    let n = graph.n();
    if programs.len() != n {
        return Err(SimError::ProgramCountMismatch {
            expected: n,
            got: programs.len(),
        });
    }
    let ids: Vec<u64> = (0..n)
        .map(|v| {
            use rand::RngCore;
            rng::node_rng(opts.seed, v, STREAM_ID).next_u64()
        })
        .collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|v| rng::node_rng(opts.seed, v, STREAM_PROTOCOL))
        .collect();

    let mut engine = Engine::new(n);
    let mut actions: Vec<Action> = vec![Action::Listen; n];
    // Sparse previous-round deliveries: (node, payload).
    let mut pending: Vec<(u32, Payload)> = Vec::new();
    let mut pending_lookup: Vec<Option<Payload>> = vec![None; n];

    let mut trace = Trace::new();
    let mut full: Vec<RoundRecord> = Vec::new();
    let mut rounds_done = 0u64;

    for r in 0..opts.max_rounds {
        // Step every node; idle nodes with nothing delivered implicitly listen.
        for v in 0..n {
            let received = pending_lookup[v].take();
            if received.is_none() && r < programs[v].idle_until() {
                if actions[v].is_transmit() {
                    actions[v] = Action::Listen;
                }
                continue;
            }
            let mut ctx = NodeCtx {
                node: v,
                id: ids[v],
                round: r,
                received: received.as_ref(),
                rng: &mut rngs[v],
            };
            actions[v] = programs[v].step(&mut ctx);
        }
        engine.resolve(graph, &actions);

        for &t in &engine.transmitters {
            if let Action::Transmit(p) = &actions[t as usize] {
                let bits = (p.len() as u64) * 8;
                if bits > trace.max_payload_bits {
                    trace.max_payload_bits = bits;
                }
            }
        }
        if !engine.transmitters.is_empty() {
            trace.fold_round(r, &engine.transmitters, &engine.delivered, &actions);
        }
        if opts.validate {
            if engine.transmitters.is_empty() {
                // No transmitter: the engine cannot have delivered anything;
                // the invariant holds vacuously.
                debug_assert!(engine.delivered.is_empty());
            } else {
                let mut received: Vec<Option<Payload>> = vec![None; n];
                for &(v, ref p) in &engine.delivered {
                    received[v as usize] = Some(p.clone());
                }
                verify_round_at(graph, &actions, &received, r)?;
            }
            trace.validated_rounds += 1;
        }
        if opts.record_full {
            let mut received: Vec<Option<Payload>> = vec![None; n];
            for &(v, ref p) in &engine.delivered {
                received[v as usize] = Some(p.clone());
            }
            full.push(RoundRecord {
                actions: actions.clone(),
                received,
            });
        }

        pending.clear();
        pending.extend(engine.delivered.iter().cloned());
        for &(v, ref p) in &pending {
            pending_lookup[v as usize] = Some(p.clone());
        }
        rounds_done = r + 1;

        if opts.check_interval > 0
            && rounds_done % opts.check_interval == 0
            && stop(rounds_done, &programs)
        {
            break;
        }
    }

    // Final observation pass so the last round's receptions are seen.
    for v in 0..n {
        let received = pending_lookup[v].take();
        let mut ctx = NodeCtx {
            node: v,
            id: ids[v],
            round: rounds_done,
            received: received.as_ref(),
            rng: &mut rngs[v],
        };
        programs[v].finish(&mut ctx);
    }

    trace.rounds = rounds_done;
    trace.outputs = programs.iter().map(|p| p.output()).collect();
    if opts.record_full {
        trace.full = Some(full);
    }
    Ok(RunResult {
        trace,
        programs,
        ids,
    })
}

/// Time-multiplex two programs onto one channel: even local rounds drive
/// `main`, odd rounds drive `background`. Each sub-program observes its own
/// contiguous round numbering, and receptions are routed to the program
/// whose slot they occurred in.
pub struct Multiplex<A, B> {
    main: A,
    background: B,
    pending_main: Option<Payload>,
    pending_bg: Option<Payload>,
    main_rounds: u64,
    bg_rounds: u64,
}

pub fn multiplex<A: NodeProgram, B: NodeProgram>(main: A, background: B) -> Multiplex<A, B> {
    Multiplex {
        main,
        background,
        pending_main: None,
        pending_bg: None,
        main_rounds: 0,
        bg_rounds: 0,
    }
}

impl<A, B> Multiplex<A, B> {
    pub fn main(&self) -> &A {
        &self.main
    }

    pub fn background(&self) -> &B {
        &self.background
    }

    fn stash(&mut self, prev_round: u64, received: Option<&Payload>) {
        if let Some(p) = received {
            if prev_round % 2 == 0 {
                self.pending_main = Some(p.clone());
            } else {
                self.pending_bg = Some(p.clone());
            }
        }
    }
}

impl<A: NodeProgram, B: NodeProgram> NodeProgram for Multiplex<A, B> {
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        if ctx.round > 0 {
            self.stash(ctx.round - 1, ctx.received);
        }
        if ctx.round % 2 == 0 {
            let received = self.pending_main.take();
            let mut sub = NodeCtx {
                node: ctx.node,
                id: ctx.id,
                round: self.main_rounds,
                received: received.as_ref(),
                rng: ctx.rng,
            };
            self.main_rounds += 1;
            self.main.step(&mut sub)
        } else {
            let received = self.pending_bg.take();
            let mut sub = NodeCtx {
                node: ctx.node,
                id: ctx.id,
                round: self.bg_rounds,
                received: received.as_ref(),
                rng: ctx.rng,
            };
            self.bg_rounds += 1;
            self.background.step(&mut sub)
        }
    }

    fn idle_until(&self) -> u64 {
        if self.pending_main.is_some() || self.pending_bg.is_some() {
            return 0;
        }
        let from_main = self.main.idle_until().saturating_mul(2);
        let from_bg = self.background.idle_until().saturating_mul(2).saturating_add(1);
        from_main.min(from_bg)
    }

    fn finish(&mut self, ctx: &mut NodeCtx<'_>) {
        if ctx.round > 0 {
            self.stash(ctx.round - 1, ctx.received);
        }
        let received = self.pending_main.take();
        let mut sub = NodeCtx {
            node: ctx.node,
            id: ctx.id,
            round: self.main_rounds,
            received: received.as_ref(),
            rng: ctx.rng,
        };
        self.main.finish(&mut sub);
        let received = self.pending_bg.take();
        let mut sub = NodeCtx {
            node: ctx.node,
            id: ctx.id,
            round: self.bg_rounds,
            received: received.as_ref(),
            rng: ctx.rng,
        };
        self.background.finish(&mut sub);
    }

    fn output(&self) -> Option<Vec<u8>> {
        self.main.output()
    }
}
