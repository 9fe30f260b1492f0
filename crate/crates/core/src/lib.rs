//! Synchronous radio network simulator and protocol suite.
//!
//! The model: time proceeds in synchronous rounds; in each round every node
//! either transmits a message or listens. A listening node receives a message
//! iff exactly one of its neighbors transmits in that round. There is no
//! collision detection: silence and interference are indistinguishable.
//!
//! On top of the simulator ([`sim`]) live the protocol layers:
//!
//! * [`graphs`] — generators for unit disk, quasi unit disk, unit ball,
//!   geometric radio and G(n,p) graphs, plus diameter/independence statistics.
//! * [`mis`] — a maximal independent set protocol for radio networks built
//!   from the Decay transmission primitive and a probe-based effective-degree
//!   estimator, together with checkers and a message-passing reference.
//! * [`cluster`] — exponential-shift clustering restricted to a center set,
//!   in an exact centralized form and a delayed-flood radio form, with the
//!   analytic quantities used to reason about cluster radii.
//! * [`compete`] — message dissemination with lexicographic override over
//!   coarse/fine clusterings, with its time-multiplexed background process.
//! * [`protocols`] — broadcast and leader election on top of `compete`.

pub mod cluster;
pub mod compete;
pub mod error;
pub mod graphs;
pub mod mis;
pub mod protocols;
pub mod rng;
pub mod sim;
pub mod wire;

pub use error::{GraphError, SimError};
pub use graphs::{AlphaMode, GraphStats};
pub use sim::{Action, Graph, NodeProgram, Payload, RoundOutcome, Trace};
