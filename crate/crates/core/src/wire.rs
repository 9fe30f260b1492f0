//! On-the-air message formats shared by the protocol layers.
//!
//! Payloads are opaque bytes at the simulator level; the protocols encode
//! these structures into them. Stale messages are recognized (and dropped)
//! through the round/cycle tags carried here.

use serde::{Deserialize, Serialize};

use crate::sim::Payload;

/// Totally ordered message rank; the override rule keeps the maximum.
/// `tiebreak` (node id) makes ranks unique even when primaries collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rank {
    pub primary: u64,
    pub tiebreak: u64,
}

/// A ranked message competing for dissemination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedMessage {
    pub rank: Rank,
    pub payload: Vec<u8>,
}

impl RankedMessage {
    pub fn better_than(&self, other: &RankedMessage) -> bool {
        self.rank > other.rank
    }
}

/// Keep the higher-ranked of two messages in `slot`.
pub fn fold_max(slot: &mut Option<RankedMessage>, incoming: &RankedMessage) {
    match slot {
        Some(held) if !incoming.better_than(held) => {}
        _ => *slot = Some(incoming.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClusterKind {
    Coarse,
    Fine,
    Background,
}

/// Identifies one clustering in the bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClusterTag {
    pub kind: ClusterKind,
    /// Shift-scale exponent (beta = 2^-j) for fine clusterings; 0 otherwise.
    pub j: u8,
    pub copy: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IcpPhase {
    /// Center's message outward, first pass.
    Out1,
    /// Higher messages converge-cast back toward the center.
    Back,
    /// Center's (possibly improved) message outward again.
    Out2,
    /// Unscheduled patch-up transmissions worked in between schedule slots.
    Patch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Wire {
    /// MIS: "I marked myself", tagged by the outer round that produced it.
    MisMark { round: u32 },
    /// MIS: "I joined the independent set", tagged by outer round.
    MisJoin { round: u32 },
    /// MIS: effective-degree probe; carries no information beyond arrival.
    Probe,
    /// Clustering flood: `center` claims this listener at `hop + 1`.
    /// `frac_bits` is the tie-break key (fractional part of the center's
    /// shift, as IEEE-754 bits), `cseed` the center's coordination seed.
    Part {
        tag: ClusterTag,
        center: u32,
        hop: u16,
        frac_bits: u64,
        cseed: u64,
    },
    /// A coarse center's fine-clustering sequence seed.
    Seq { coarse_center: u32, seed: u64 },
    /// Intra-cluster propagation traffic.
    Icp {
        tag: ClusterTag,
        cycle: u32,
        phase: IcpPhase,
        msg: RankedMessage,
    },
}

impl Wire {
    pub fn encode(&self) -> Payload {
        let bytes = bincode::serialize(self).expect("wire messages always serialize");
        Payload::from(bytes.as_slice())
    }

    pub fn decode(bytes: &[u8]) -> Option<Wire> {
        bincode::deserialize(bytes).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let msgs = vec![
            Wire::MisMark { round: 7 },
            Wire::Probe,
            Wire::Part {
                tag: ClusterTag {
                    kind: ClusterKind::Fine,
                    j: 1,
                    copy: 3,
                },
                center: 12,
                hop: 4,
                frac_bits: 0.25f64.to_bits(),
                cseed: 99,
            },
            Wire::Icp {
                tag: ClusterTag {
                    kind: ClusterKind::Background,
                    j: 0,
                    copy: 0,
                },
                cycle: 2,
                phase: IcpPhase::Back,
                msg: RankedMessage {
                    rank: Rank {
                        primary: 5,
                        tiebreak: 6,
                    },
                    payload: b"hello".to_vec(),
                },
            },
        ];
        for m in msgs {
            let enc = m.encode();
            assert_eq!(Wire::decode(&enc), Some(m));
        }
    }

    #[test]
    fn rank_order_is_lexicographic() {
        let a = Rank { primary: 1, tiebreak: 9 };
        let b = Rank { primary: 2, tiebreak: 0 };
        let c = Rank { primary: 2, tiebreak: 1 };
        assert!(b > a && c > b);
    }

    #[test]
    fn frac_bits_order_matches_float_order() {
        // Non-negative IEEE-754 doubles compare like their bit patterns.
        let xs = [0.0f64, 0.125, 0.3, 0.5, 0.9999];
        for w in xs.windows(2) {
            assert!(w[0].to_bits() < w[1].to_bits());
        }
    }
}
