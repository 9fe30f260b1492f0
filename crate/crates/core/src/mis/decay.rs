//! The Decay transmission primitive: holders sweep transmission
//! probabilities 2^-1, 2^-2, ..., 2^-L so that for any local density of
//! holders, some step in the sweep gives a constant chance of a lone
//! transmission. Iterating amplifies the delivery probability.

use crate::sim::{Action, NodeCtx, NodeProgram, Payload};
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct DecayParams {
    /// Number of full sweeps (the amplification count).
    pub iterations: u32,
    /// Steps per sweep; ceil(log2 n) in the intended use.
    pub inner_length: u32,
}

impl DecayParams {
    pub fn new(iterations: u32, n: usize) -> DecayParams {
        assert!(iterations >= 1);
        DecayParams {
            iterations,
            inner_length: ceil_log2(n),
        }
    }

    pub fn total_rounds(&self) -> u64 {
        self.iterations as u64 * self.inner_length as u64
    }
}

/// ceil(log2(n)) floored at 1 so degenerate inputs still schedule a round.
pub fn ceil_log2(n: usize) -> u32 {
    let n = n.max(2);
    usize::BITS - (n - 1).leading_zeros()
}

/// A node running Decay: holders transmit `message` with probability 2^-i
/// in inner step i; everyone else listens. Terminal output is the first
/// message received, if any.
pub struct DecayProgram {
    params: DecayParams,
    message: Option<Payload>,
    first_received: Option<Vec<u8>>,
}

/// `message` must be set iff the node holds something to transmit.
pub fn decay_program(message: Option<Vec<u8>>, params: DecayParams) -> DecayProgram {
    DecayProgram {
        params,
        message: message.map(|m| Payload::from(m.as_slice())),
        first_received: None,
    }
}

impl DecayProgram {
    fn absorb(&mut self, received: Option<&Payload>) {
        if let Some(p) = received {
            if self.first_received.is_none() {
                self.first_received = Some(p.to_vec());
            }
        }
    }
}

impl NodeProgram for DecayProgram {
    fn step(&mut self, ctx: &mut NodeCtx<'_>) -> Action {
        self.absorb(ctx.received);
        if ctx.round >= self.params.total_rounds() {
            return Action::Listen;
        }
        if let Some(msg) = &self.message {
            let i = (ctx.round % self.params.inner_length as u64) as i32 + 1;
            if ctx.rng.gen::<f64>() < (-i as f64).exp2() {
                return Action::Transmit(msg.clone());
            }
        }
        Action::Listen
    }

    fn idle_until(&self) -> u64 {
        if self.message.is_some() {
            0
        } else {
            u64::MAX
        }
    }

    fn finish(&mut self, ctx: &mut NodeCtx<'_>) {
        self.absorb(ctx.received);
    }

    fn output(&self) -> Option<Vec<u8>> {
        self.first_received.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run, Graph};

    fn star(k: usize) -> Graph {
        // node 0 is the listener, 1..=k its neighbors
        Graph::from_edges(k + 1, (1..=k as u32).map(|v| (0, v))).unwrap()
    }

    /// Closed form for one sweep: listener with k transmitting neighbors.
    fn single_iteration_hear_probability(k: u32, inner: u32) -> f64 {
        let mut miss = 1.0;
        for i in 1..=inner as i32 {
            let q = (-i as f64).exp2();
            let hit = k as f64 * q * (1.0 - q).powi(k as i32 - 1);
            miss *= 1.0 - hit;
        }
        1.0 - miss
    }

    fn hearing_frequency(k: usize, iterations: u32, trials: u64) -> f64 {
        let g = star(k);
        let params = DecayParams {
            iterations,
            inner_length: 8, // as for n = 256
        };
        let mut heard = 0u64;
        for seed in 0..trials {
            let programs: Vec<DecayProgram> = (0..=k)
                .map(|v| decay_program((v > 0).then(|| vec![42]), params))
                .collect();
            let res = run(&g, programs, params.total_rounds(), seed).unwrap();
            if res.trace.outputs[0].is_some() {
                heard += 1;
            }
        }
        heard as f64 / trials as f64
    }

    #[test]
    fn single_neighbor_matches_closed_form() {
        let expect = single_iteration_hear_probability(1, 8);
        let got = hearing_frequency(1, 1, 4000);
        assert!((got - expect).abs() < 0.03, "got {got}, expect {expect}");
    }

    #[test]
    fn eight_neighbors_match_closed_form() {
        let expect = single_iteration_hear_probability(8, 8);
        let got = hearing_frequency(8, 1, 4000);
        assert!((got - expect).abs() < 0.03, "got {got}, expect {expect}");
    }

    #[test]
    fn no_transmitters_never_heard() {
        let g = star(3);
        let params = DecayParams::new(5, 256);
        let programs: Vec<DecayProgram> = (0..4).map(|_| decay_program(None, params)).collect();
        let res = run(&g, programs, params.total_rounds(), 7).unwrap();
        assert!(res.trace.outputs.iter().all(|o| o.is_none()));
        assert_eq!(res.trace.max_payload_bits, 0);
    }

    #[test]
    fn thirty_iterations_amplify_single_neighbor() {
        let got = hearing_frequency(1, 30, 1000);
        assert!(got >= 0.999, "got {got}");
    }
}
