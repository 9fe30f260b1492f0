use radionet::compete::CompeteConstants;
use radionet::graphs::*;
use radionet::protocols::{broadcast, leader_election, ElectionConstants};
use radionet::sim::Graph;

#[test]
#[ignore]
fn probe_broadcast_elect() {
    let consts = CompeteConstants::default();
    for (name, g) in [("grid16", gen_grid_udg(16)), ("P256", Graph::path(256))] {
        let stats = compute_stats(&g, AlphaMode::Greedy).unwrap();
        let mut ok = 0;
        let t0 = std::time::Instant::now();
        let seeds = 20u64;
        for seed in 0..seeds {
            let out = broadcast(&g, &stats, 0, b"payload-content", &consts, seed).unwrap();
            if out.success { ok += 1; } else { eprintln!("{name} seed {seed}: FAIL uninformed={}", out.compete.uninformed.len()); }
        }
        println!("{name} broadcast: {ok}/{seeds} [{:?}/run]", t0.elapsed() / seeds as u32);
    }
    let el = ElectionConstants::default();
    for (name, g) in [("K64", Graph::complete(64)), ("grid16", gen_grid_udg(16))] {
        let stats = compute_stats(&g, AlphaMode::Greedy).unwrap();
        let mut ok = 0;
        let mut cand_total = 0usize;
        let t0 = std::time::Instant::now();
        let seeds = 20u64;
        for seed in 0..seeds {
            let out = leader_election(&g, &stats, &el, &consts, seed).unwrap();
            cand_total += out.candidates.len();
            if out.success { ok += 1; } else { eprintln!("{name} seed {seed}: FAIL cands={}", out.candidates.len()); }
        }
        println!("{name} election: {ok}/{seeds}, mean |C| = {:.1} [{:?}/run]", cand_total as f64 / seeds as f64, t0.elapsed() / seeds as u32);
    }
}
