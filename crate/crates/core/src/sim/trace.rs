//! Run traces: summary statistics always, full per-round records on demand,
//! and a line-oriented JSON export (one round per line).

use super::{Action, Graph, Payload};
use crate::error::SimError;

/// Full record of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub actions: Vec<Action>,
    pub received: Vec<Option<Payload>>,
}

/// Immutable record of a finished run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rounds: u64,
    /// Largest transmitted payload, in bits. The model's O(log n)-bit
    /// message convention is monitored through this, not enforced.
    pub max_payload_bits: u64,
    /// Rounds that passed the independent reception-invariant check.
    pub validated_rounds: u64,
    /// Order-sensitive digest of all transmissions and deliveries; equal
    /// seeds must produce equal fingerprints.
    pub fingerprint: u64,
    /// Declared terminal outputs, one per node.
    pub outputs: Vec<Option<Vec<u8>>>,
    /// Per-round records, kept only when requested.
    pub full: Option<Vec<RoundRecord>>,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl Trace {
    pub fn new() -> Trace {
        Trace {
            fingerprint: FNV_OFFSET,
            ..Trace::default()
        }
    }

    pub(crate) fn fold_round(
        &mut self,
        round: u64,
        transmitters: &[u32],
        delivered: &[(u32, Payload)],
        actions: &[Action],
    ) {
        let mut h = self.fingerprint;
        h = fnv(h, &round.to_le_bytes());
        for &t in transmitters {
            h = fnv(h, &t.to_le_bytes());
            if let Action::Transmit(p) = &actions[t as usize] {
                h = fnv(h, p);
            }
        }
        h = fnv(h, b"|");
        for &(v, _) in delivered {
            h = fnv(h, &v.to_le_bytes());
        }
        self.fingerprint = h;
    }

    /// Serialize the full trace as line-oriented JSON: a header line, one
    /// line per round (`a` = actions, `rx` = receptions, payloads in hex,
    /// `null` = listen / nothing received), and an outputs line.
    pub fn to_jsonl(&self) -> Result<String, SimError> {
        let full = self
            .full
            .as_ref()
            .ok_or_else(|| SimError::TraceDecode("trace has no full records".into()))?;
        let mut out = String::new();
        let header = serde_json::json!({
            "v": 1,
            "rounds": self.rounds,
            "max_payload_bits": self.max_payload_bits,
            "fingerprint": format!("{:016x}", self.fingerprint),
        });
        out.push_str(&header.to_string());
        out.push('\n');
        for (r, rec) in full.iter().enumerate() {
            let a: Vec<serde_json::Value> = rec
                .actions
                .iter()
                .map(|act| match act {
                    Action::Listen => serde_json::Value::Null,
                    Action::Transmit(p) => serde_json::Value::String(hex::encode(&p[..])),
                })
                .collect();
            let rx: Vec<serde_json::Value> = rec
                .received
                .iter()
                .map(|m| match m {
                    None => serde_json::Value::Null,
                    Some(p) => serde_json::Value::String(hex::encode(&p[..])),
                })
                .collect();
            let line = serde_json::json!({ "r": r, "a": a, "rx": rx });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let outputs: Vec<serde_json::Value> = self
            .outputs
            .iter()
            .map(|o| match o {
                None => serde_json::Value::Null,
                Some(bytes) => serde_json::Value::String(hex::encode(bytes)),
            })
            .collect();
        let tail = serde_json::json!({ "outputs": outputs });
        out.push_str(&tail.to_string());
        out.push('\n');
        Ok(out)
    }

    /// Parse a trace produced by [`Trace::to_jsonl`].
    pub fn from_jsonl(text: &str) -> Result<Trace, SimError> {
        let bad = |msg: &str| SimError::TraceDecode(msg.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: serde_json::Value = serde_json::from_str(lines.next().ok_or_else(|| bad("empty"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let rounds = header["rounds"].as_u64().ok_or_else(|| bad("missing rounds"))?;
        let max_payload_bits = header["max_payload_bits"].as_u64().unwrap_or(0);
        let fingerprint = u64::from_str_radix(
            header["fingerprint"].as_str().ok_or_else(|| bad("missing fingerprint"))?,
            16,
        )
        .map_err(|e| bad(&e.to_string()))?;

        let decode_payload = |v: &serde_json::Value| -> Result<Option<Payload>, SimError> {
            match v {
                serde_json::Value::Null => Ok(None),
                serde_json::Value::String(s) => {
                    let bytes = hex::decode(s).map_err(|e| bad(&e.to_string()))?;
                    Ok(Some(Payload::from(bytes.as_slice())))
                }
                _ => Err(bad("payload must be null or hex string")),
            }
        };

        let mut full = Vec::with_capacity(rounds as usize);
        let mut outputs = Vec::new();
        for line in lines {
            let v: serde_json::Value = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
            if let Some(outs) = v.get("outputs") {
                let arr = outs.as_array().ok_or_else(|| bad("outputs not array"))?;
                for o in arr {
                    outputs.push(decode_payload(o)?.map(|p| p.to_vec()));
                }
                continue;
            }
            let a = v["a"].as_array().ok_or_else(|| bad("missing actions"))?;
            let rx = v["rx"].as_array().ok_or_else(|| bad("missing receptions"))?;
            let actions = a
                .iter()
                .map(|x| {
                    Ok(match decode_payload(x)? {
                        None => Action::Listen,
                        Some(p) => Action::Transmit(p),
                    })
                })
                .collect::<Result<Vec<_>, SimError>>()?;
            let received = rx.iter().map(decode_payload).collect::<Result<Vec<_>, _>>()?;
            full.push(RoundRecord { actions, received });
        }
        if full.len() as u64 != rounds {
            return Err(bad("round count mismatch"));
        }
        Ok(Trace {
            rounds,
            max_payload_bits,
            validated_rounds: 0,
            fingerprint,
            outputs,
            full: Some(full),
        })
    }
}

/// Replay a fully-recorded trace against the graph, checking the reception
/// invariant on every round. Returns the number of rounds checked.
pub fn replay_validate(graph: &Graph, trace: &Trace) -> Result<u64, SimError> {
    let full = trace
        .full
        .as_ref()
        .ok_or_else(|| SimError::TraceDecode("trace has no full records".into()))?;
    for (r, rec) in full.iter().enumerate() {
        let outcome = super::RoundOutcome {
            received: rec.received.clone(),
        };
        super::verify_round(graph, &rec.actions, &outcome).map_err(|e| match e {
            SimError::ReceptionViolation { node, msg, .. } => SimError::ReceptionViolation {
                round: r as u64,
                node,
                msg,
            },
            other => other,
        })?;
    }
    Ok(full.len() as u64)
}
