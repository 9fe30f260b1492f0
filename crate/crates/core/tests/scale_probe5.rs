use radionet::mis::{eed_program, DegreeVerdict, EedParams};
use radionet::sim::{run_with, Graph, RunOptions};

fn eed_trial(g: &Graph, p_exps: &[u32], params: EedParams, seed: u64) -> DegreeVerdict {
    let programs: Vec<_> = p_exps.iter().map(|&e| eed_program(e, params)).collect();
    let opts = RunOptions::new(params.total_rounds(), seed);
    let res = run_with(g, programs, &opts, |_, _: &[_]| false).unwrap();
    res.programs[0].verdict()
}

#[test]
#[ignore]
fn probe_eed_rates() {
    let params = EedParams { log_n: 8, big_c: 16 };
    let trials = 10_000u64;
    // HIGH scenario: 4 neighbors at p = 1/2
    let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let t0 = std::time::Instant::now();
    let mut high = 0u64;
    for seed in 0..trials {
        if eed_trial(&g, &[1, 1, 1, 1, 1], params, seed) == DegreeVerdict::High {
            high += 1;
        }
    }
    println!("HIGH rate: {}/{} = {:.5} (need >= {:.5}) [{:?}]", high, trials, high as f64 / trials as f64, 1.0 - 1.0/256.0, t0.elapsed());
    // LOW scenario: one neighbor at p = 2^-10
    let g = Graph::from_edges(2, [(0, 1)]).unwrap();
    let mut low = 0u64;
    let t0 = std::time::Instant::now();
    for seed in 0..trials {
        if eed_trial(&g, &[1, 10], params, seed) == DegreeVerdict::Low {
            low += 1;
        }
    }
    println!("LOW rate: {}/{} = {:.5} (need >= {:.5}) [{:?}]", low, trials, low as f64 / trials as f64, 1.0 - 1.0/256.0, t0.elapsed());
}
