//! Exponential-shift clustering restricted to a center set: each center v
//! draws a shift delta_v ~ Exp(beta) and every node joins the center
//! minimizing dist(u, v) - delta_v. Larger beta gives smaller clusters.
//!
//! `partition_ideal` computes the assignment exactly (multi-source search
//! over shifted start values); [`radio`] holds the in-model implementation;
//! [`analytics`] the closed-form quantities describing the expected
//! distance to the assigned center.

pub mod analytics;
pub mod radio;

pub use analytics::{compute_analytics, count_bad_j, fine_j_range, growth_param_b, BadJReport, ClusterAnalytics};
pub use radio::{partition_radio, PartitionParams, PartitionProgram, PartitionTuning, RadioPartitionRun};

use crate::error::SimError;
use crate::sim::Graph;
use rand::Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// One node's cluster membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeAssign {
    pub center: u32,
    /// Hop distance to the assigned center.
    pub hop_dist: u32,
    /// dist(u, center) - delta_center.
    pub shifted_dist: f64,
}

/// A complete clustering: shifts per center, membership per node.
#[derive(Debug, Clone)]
pub struct ShiftAssignment {
    pub centers: Vec<u32>,
    /// Continuous shift per center, parallel to `centers`.
    pub shifts: Vec<f64>,
    /// None for nodes unreachable from every center.
    pub assignment: Vec<Option<NodeAssign>>,
}

impl ShiftAssignment {
    pub fn cluster_of(&self, v: usize) -> Option<u32> {
        self.assignment[v].map(|a| a.center)
    }

    /// Max hop radius over clusters (assigned nodes only).
    pub fn max_radius(&self) -> u32 {
        self.assignment
            .iter()
            .flatten()
            .map(|a| a.hop_dist)
            .max()
            .unwrap_or(0)
    }
}

/// Inverse-CDF sample of Exp(beta): -ln(1 - U) / beta.
pub fn sample_exp_shift<R: Rng>(rng: &mut R, beta: f64) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln() / beta
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    key: f64,
    frac: f64,
    center: u32,
    hop: u32,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Max-heap: highest priority = smallest shifted distance, ties broken
    // by larger shift fraction, then lower center id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(self.frac.total_cmp(&other.frac))
            .then(other.center.cmp(&self.center))
    }
}

/// Assignment for externally chosen effective shifts. `tie_frac` breaks
/// exact ties (larger wins, then lower center id); for continuous shifts
/// pass their fractional parts.
pub fn partition_with_shifts(
    graph: &Graph,
    centers: &[u32],
    effective_shifts: &[f64],
    tie_frac: &[f64],
) -> Vec<Option<NodeAssign>> {
    assert_eq!(centers.len(), effective_shifts.len());
    assert_eq!(centers.len(), tie_frac.len());
    let n = graph.n();
    let mut assignment: Vec<Option<NodeAssign>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for (idx, &c) in centers.iter().enumerate() {
        heap.push(HeapEntry {
            key: -effective_shifts[idx],
            frac: tie_frac[idx],
            center: c,
            hop: 0,
            node: c,
        });
    }
    while let Some(e) = heap.pop() {
        let v = e.node as usize;
        if assignment[v].is_some() {
            continue;
        }
        assignment[v] = Some(NodeAssign {
            center: e.center,
            hop_dist: e.hop,
            shifted_dist: e.key,
        });
        for &u in graph.neighbors(v) {
            if assignment[u as usize].is_none() {
                heap.push(HeapEntry {
                    key: e.key + 1.0,
                    frac: e.frac,
                    center: e.center,
                    hop: e.hop + 1,
                    node: u,
                });
            }
        }
    }
    assignment
}

/// Exact clustering with freshly sampled shifts.
pub fn partition_ideal<R: Rng>(
    graph: &Graph,
    centers: &[u32],
    beta: f64,
    rng: &mut R,
) -> Result<ShiftAssignment, SimError> {
    if centers.is_empty() && graph.n() > 0 {
        return Err(SimError::NoCenters);
    }
    let shifts: Vec<f64> = centers.iter().map(|_| sample_exp_shift(rng, beta)).collect();
    let tie_frac: Vec<f64> = shifts.iter().map(|d| d - d.floor()).collect();
    let assignment = partition_with_shifts(graph, centers, &shifts, &tie_frac);
    Ok(ShiftAssignment {
        centers: centers.to_vec(),
        shifts,
        assignment,
    })
}
