//! Simulates a few realizations and prints timing and connectivity figures.
//!
//! Usage: `cargo run -p vecsim-core --example sim_stats -- image.pgm config.cfg [count]`

use std::time::Instant;

use vecsim::config::parse_config;
use vecsim::ensemble::{connectivity_report, variability};
use vecsim::io::read_pgm;
use vecsim::{build_tvf, Simulator};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let grid = read_pgm(&args[1]).expect("read image");
    let cfg = parse_config(&args[2]).expect("read config");
    let count: u64 = args.get(3).map_or(4, |c| c.parse().expect("count"));
    let tvf = build_tvf(&grid, &cfg).expect("build");
    let sim = Simulator::new(&tvf, &cfg).expect("simulator");
    let t = Instant::now();
    let indices: Vec<u64> = (0..count).collect();
    let reals = sim.run_many(&indices, count as usize).expect("simulate");
    println!("{count} realizations in {:.2?}", t.elapsed());
    let facies: Vec<_> = reals.iter().map(|r| r.facies.clone()).collect();
    let report = connectivity_report(&facies, &grid).expect("report");
    print!("{}", report.to_csv());
    println!("median ratio {}", report.median_ratio);
    if facies.len() > 1 {
        println!(
            "variability {:.4}",
            variability(&facies, cfg.seed_rows_r, cfg.seed_cols_t).unwrap()
        );
    }
    let diff = facies[0]
        .cells()
        .iter()
        .zip(grid.cells())
        .filter(|(a, b)| a != b)
        .count();
    println!("realization 0 differs from training in {diff} cells");
}
