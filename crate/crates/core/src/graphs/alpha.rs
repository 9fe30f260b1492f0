//! Independence number: exact branch-and-bound for small graphs, greedy
//! maximal-independent-set size as the polynomial-factor estimate otherwise.

use crate::sim::Graph;

/// Exact maximum independent set size. Caller must keep n <= 64; intended
/// for n <= 40 where the search is fast.
pub fn exact_alpha(graph: &Graph) -> u32 {
    let n = graph.n();
    assert!(n <= 64, "exact alpha limited to 64 nodes");
    if n == 0 {
        return 0;
    }
    let nbr: Vec<u64> = (0..n)
        .map(|v| {
            graph
                .neighbors(v)
                .iter()
                .fold(0u64, |m, &u| m | (1u64 << u))
        })
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0u32;
    branch(all, 0, &mut best, &nbr);
    best
}

fn branch(rem: u64, cur: u32, best: &mut u32, nbr: &[u64]) {
    if rem == 0 {
        *best = (*best).max(cur);
        return;
    }
    if cur + rem.count_ones() <= *best {
        return;
    }
    // Vertices of degree <= 1 in the remaining graph are always safe to take.
    let mut scan = rem;
    while scan != 0 {
        let v = scan.trailing_zeros() as usize;
        scan &= scan - 1;
        let d = (nbr[v] & rem).count_ones();
        if d <= 1 {
            branch(rem & !(nbr[v] | (1u64 << v)), cur + 1, best, nbr);
            return;
        }
    }
    // Branch on a maximum-degree vertex: either it is in the set or not.
    let mut pick = 0usize;
    let mut pick_deg = 0u32;
    let mut scan = rem;
    while scan != 0 {
        let v = scan.trailing_zeros() as usize;
        scan &= scan - 1;
        let d = (nbr[v] & rem).count_ones();
        if d >= pick_deg {
            pick_deg = d;
            pick = v;
        }
    }
    branch(rem & !(nbr[pick] | (1u64 << pick)), cur + 1, best, nbr);
    branch(rem & !(1u64 << pick), cur, best, nbr);
}

/// Size of the greedy maximal independent set (ascending degree order).
/// Any maximal independent set has size within [alpha/(Delta+1), alpha].
pub fn greedy_alpha(graph: &Graph) -> u32 {
    greedy_mis(graph).iter().filter(|&&b| b).count() as u32
}

/// The greedy maximal independent set itself, deterministic.
pub fn greedy_mis(graph: &Graph) -> Vec<bool> {
    let n = graph.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (graph.degree(v), v));
    let mut taken = vec![false; n];
    let mut blocked = vec![false; n];
    for v in order {
        if blocked[v] {
            continue;
        }
        taken[v] = true;
        blocked[v] = true;
        for &u in graph.neighbors(v) {
            blocked[u as usize] = true;
        }
    }
    taken
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    /// Independent oracle: brute force over all subsets (n <= 20).
    fn exhaustive_alpha(graph: &Graph) -> u32 {
        let n = graph.n();
        assert!(n <= 20);
        let nbr: Vec<u32> = (0..n)
            .map(|v| {
                graph
                    .neighbors(v)
                    .iter()
                    .fold(0u32, |m, &u| m | (1u32 << u))
            })
            .collect();
        let mut best = 0u32;
        for set in 0u32..(1 << n) {
            let mut ok = true;
            let mut s = set;
            while s != 0 {
                let v = s.trailing_zeros() as usize;
                s &= s - 1;
                if nbr[v] & set != 0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                best = best.max(set.count_ones());
            }
        }
        best
    }

    #[test]
    fn exact_matches_exhaustive_on_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..60 {
            let n = 4 + (trial % 13);
            let p = 0.05 + 0.9 * rng.gen::<f64>();
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::from_edges(n, edges).unwrap();
            assert_eq!(exact_alpha(&g), exhaustive_alpha(&g), "n={n} p={p}");
        }
    }

    #[test]
    fn exact_on_known_graphs() {
        assert_eq!(exact_alpha(&Graph::complete(5)), 1);
        assert_eq!(exact_alpha(&Graph::path(9)), 5);
        assert_eq!(exact_alpha(&Graph::cycle(5)), 2);
        assert_eq!(exact_alpha(&Graph::empty(7)), 7);
    }

    #[test]
    fn greedy_bounds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let n = 8 + (trial % 33);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen::<f64>() < 0.15 {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::from_edges(n, edges).unwrap();
            let exact = exact_alpha(&g);
            let greedy = greedy_alpha(&g);
            let delta = g.max_degree() as u32;
            assert!(greedy <= exact);
            assert!(greedy * (delta + 1) >= exact, "greedy={greedy} exact={exact} delta={delta}");
        }
    }
}
