// Temporary probe: round scaling for the fit-based criteria.
use radionet::compete::{compete, Candidate, CompeteConstants};
use radionet::graphs::*;
use radionet::mis::{radio_mis, MisConstants};
use radionet::wire::Rank;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
#[ignore]
fn probe_mis_scaling() {
    let consts = MisConstants::default();
    for n in [32usize, 64, 128, 256, 512] {
        let g = gen_gnp(n, 0.1, &mut ChaCha8Rng::seed_from_u64(7));
        let stats = compute_stats(&g, AlphaMode::Greedy).unwrap();
        let mut sum = 0u64;
        let seeds = 20u64;
        let t0 = std::time::Instant::now();
        for seed in 0..seeds {
            let run = radio_mis(&g, &stats, &consts, seed).unwrap();
            sum += run.rounds_to_empty().unwrap() as u64;
        }
        let log_n = (n as f64).log2();
        let steps = radionet::mis::MisSchedule::new(n, &consts).total_rounds() as f64;
        println!(
            "n={n}: mean_outer={:.2} log_n={log_n:.1} steps/log^3={:.1} ({:?})",
            sum as f64 / seeds as f64,
            steps / log_n.powi(3),
            t0.elapsed()
        );
    }
}

#[test]
#[ignore]
fn probe_compete_scaling() {
    let consts = CompeteConstants::default();
    // grids with D = 8, 16, 32 (side = D/2 + 1)
    for side in [5usize, 9, 17] {
        let g = gen_grid_udg(side);
        let stats = compute_stats(&g, AlphaMode::Greedy).unwrap();
        let mut sum = 0u64;
        let seeds = 5u64;
        let t0 = std::time::Instant::now();
        let mut fails = 0;
        for seed in 0..seeds {
            let out = compete(&g, &stats, &[Candidate { node: 0, rank: Rank { primary: 1, tiebreak: 1 }, payload: vec![1] }], &consts, seed).unwrap();
            if let Some(r) = out.rounds_to_agreement { sum += r } else { fails += 1 }
        }
        println!("grid side={side} n={} D={}: mean_rounds={:.0} fails={fails} ({:?})", stats.n, stats.diameter, sum as f64 / seeds as f64, t0.elapsed());
    }
    // star-of-paths at matched D with alpha = Theta(n)
    for (arms, len) in [(128usize, 4usize), (64, 8), (32, 16)] {
        let g = gen_star_of_paths(arms, len);
        let stats = compute_stats(&g, AlphaMode::Greedy).unwrap();
        let mut sum = 0u64;
        let seeds = 3u64;
        let t0 = std::time::Instant::now();
        let mut fails = 0;
        for seed in 0..seeds {
            let out = compete(&g, &stats, &[Candidate { node: (1 + len - 1) as u32, rank: Rank { primary: 1, tiebreak: 1 }, payload: vec![1] }], &consts, seed).unwrap();
            if let Some(r) = out.rounds_to_agreement { sum += r } else { fails += 1 }
        }
        println!("star arms={arms} len={len} n={} D={} alpha={}: mean_rounds={:.0} fails={fails} ({:?})", stats.n, stats.diameter, stats.alpha, sum as f64 / seeds as f64, t0.elapsed());
    }
}
