// Temporary probe for MIS validity across families.
use radionet::graphs::*;
use radionet::mis::{check_mis, radio_mis, MisConstants};
use radionet::sim::Graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn udg_for(n: usize, seed: u64) -> Graph {
    let side = (n as f64 / 4.0).sqrt();
    gen_udg(n, side, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
#[ignore]
fn probe_families() {
    let consts = MisConstants::default();
    for n in [32usize, 64, 128, 256] {
        let t0 = std::time::Instant::now();
        let mut runs = 0u32;
        let mut fails = 0u32;
        for fam in 0..5 {
            let g: Graph = match fam {
                0 => gen_gnp(n, 0.1, &mut ChaCha8Rng::seed_from_u64(n as u64)),
                1 => gen_grid_udg((n as f64).sqrt().round() as usize),
                2 => udg_for(n, n as u64 + 9),
                3 => Graph::complete(n),
                _ => Graph::path(n),
            };
            let stats = compute_stats(&g, AlphaMode::Greedy).unwrap();
            for seed in 0..10u64 {
                let run = radio_mis(&g, &stats, &consts, seed).unwrap();
                runs += 1;
                if check_mis(&g, &run.in_mis).is_err() || run.rounds_to_empty().is_none() {
                    fails += 1;
                    eprintln!("FAIL fam={fam} n={n} seed={seed} err={:?} empty={:?}",
                        check_mis(&g, &run.in_mis), run.rounds_to_empty());
                }
            }
        }
        println!("n={n}: {runs} runs, {fails} fails, {:?} total", t0.elapsed());
    }
}
