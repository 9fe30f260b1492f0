//! Closed-form quantities describing exponential-shift clustering around a
//! fixed node v: with mis_i the number of center-set nodes at hop distance
//! exactly i,
//!
//!   T_beta = sum_i i * mis_i * e^(-i*beta)
//!   B_beta = sum_i     mis_i * e^(-i*beta)
//!   S_beta = T_beta / B_beta
//!
//! bound the expected distance from v to its assigned center (within a
//! factor 5). The growth parameter b and the prefix counts s_j identify the
//! shift scales ("good j") at which S_beta stays O(b * 2^j).

use crate::graphs::GraphStats;
use crate::sim::Graph;
use serde::Serialize;

/// Analytics for one (node, shift-scale) pair; beta = 2^-j.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterAnalytics {
    pub v: u32,
    pub j: u32,
    pub beta: f64,
    /// mis_i for i = 0..=D (zero beyond v's component).
    pub mis_counts: Vec<u64>,
    pub t_beta: f64,
    pub b_beta: f64,
    pub s_beta: f64,
    /// Growth parameter: power of two with 4*log_D(alpha) <= b <= 8*log_D(alpha),
    /// floored at 4.
    pub b: u32,
    /// s_j = sum of mis_i for i <= 2^(j+1), truncated at D.
    pub s_prefix: Vec<u64>,
}

impl ClusterAnalytics {
    /// s at index `idx`: total centers within hop distance 2^(idx+1).
    pub fn s_at(&self, idx: u32) -> u64 {
        let cap = self.mis_counts.len() as u64 - 1;
        let reach = (1u64 << (idx + 1).min(62)).min(cap);
        self.s_prefix[reach as usize]
    }
}

/// b = max(4, 2^(ceil(log2(log_D alpha)) + 2)). When alpha < D the formula
/// degenerates; the floor keeps downstream arithmetic well-defined.
pub fn growth_param_b(stats: &GraphStats) -> u32 {
    let la = (stats.alpha.max(1) as f64).log2();
    if la <= 0.0 {
        return 4;
    }
    let ld = (stats.diameter.max(2) as f64).log2();
    let ratio = la / ld;
    if ratio <= 1.0 {
        return 4;
    }
    let exp = ratio.log2().ceil() as i32 + 2;
    1u32 << exp.clamp(2, 30)
}

/// Integer shift scales j with 0.01*log2(D) <= j <= 0.1*log2(D), both
/// bounds rounded up; empty when D < 2.
pub fn fine_j_range(diameter: u32) -> Vec<u32> {
    if diameter < 2 {
        return Vec::new();
    }
    let ld = (diameter as f64).log2();
    let lo = (0.01 * ld).ceil().max(1.0) as u32;
    let hi = (0.1 * ld).ceil().max(1.0) as u32;
    (lo..=hi).collect()
}

/// All analytics for node `v` at shift scale `j` (beta = 2^-j).
pub fn compute_analytics(
    graph: &Graph,
    mis: &[bool],
    v: usize,
    j: u32,
    stats: &GraphStats,
) -> ClusterAnalytics {
    let beta = (-(j as f64)).exp2();
    let d = stats.diameter as usize;
    let dist = graph.bfs_distances(v);
    let mut mis_counts = vec![0u64; d + 1];
    for u in 0..graph.n() {
        if mis[u] {
            let du = dist[u];
            if du != u32::MAX && (du as usize) <= d {
                mis_counts[du as usize] += 1;
            }
        }
    }
    let mut t_beta = 0.0;
    let mut b_beta = 0.0;
    for (i, &c) in mis_counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let w = c as f64 * (-(i as f64) * beta).exp();
        t_beta += i as f64 * w;
        b_beta += w;
    }
    let s_beta = if b_beta > 0.0 { t_beta / b_beta } else { 0.0 };
    // s_prefix[k] = sum of mis_i for i <= k
    let mut s_prefix = Vec::with_capacity(d + 1);
    let mut acc = 0u64;
    for &c in &mis_counts {
        acc += c;
        s_prefix.push(acc);
    }
    ClusterAnalytics {
        v: v as u32,
        j,
        beta,
        mis_counts,
        t_beta,
        b_beta,
        s_beta,
        b: growth_param_b(stats),
        s_prefix,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BadJReport {
    /// The examined scales.
    pub js: Vec<u32>,
    /// Scales where the center count expands too fast past radius
    /// b * 2^j around v.
    pub bad: Vec<u32>,
    pub b: u32,
}

impl BadJReport {
    pub fn good(&self) -> Vec<u32> {
        self.js
            .iter()
            .copied()
            .filter(|j| !self.bad.contains(j))
            .collect()
    }

    pub fn good_fraction(&self) -> f64 {
        if self.js.is_empty() {
            return 1.0;
        }
        self.good().len() as f64 / self.js.len() as f64
    }
}

/// A scale j is bad iff for some r >= 8,
/// s_(j + log b + r) > 2^(b * 2^(r-1)) * s_(j + log b).
/// Note the threshold exponent starts at b * 128 >= 512, so the condition
/// can only fire when center counts span hundreds of binary orders of
/// magnitude; at simulable sizes every scale is good, which is exactly
/// what the theory predicts for the bad-count bound 0.02 * log2(D).
pub fn count_bad_j(graph: &Graph, mis: &[bool], v: usize, stats: &GraphStats) -> BadJReport {
    let js = fine_j_range(stats.diameter);
    let analytics = compute_analytics(graph, mis, v, js.first().copied().unwrap_or(0), stats);
    let b = analytics.b;
    let log_b = b.trailing_zeros();
    let mut bad = Vec::new();
    for &j in &js {
        let base = analytics.s_at(j + log_b);
        for r in 8u32.. {
            let e = (b as u64) << (r - 1);
            if e >= 127 {
                // 2^e overflows any achievable count ratio; no further r can fire.
                break;
            }
            let big = analytics.s_at(j + log_b + r);
            if (big as u128) > (base as u128) << e {
                bad.push(j);
                break;
            }
        }
    }
    BadJReport { js, bad, b }
}
