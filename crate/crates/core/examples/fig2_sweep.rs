//! A reduced version of the DE-vs-heuristic FER sweep on BSC(0.11); the
//! `polar fig2` command runs the full-size experiment.

use polarkit::channel::Dmc;
use polarkit::density::Grid;
use polarkit::harness::{parse_range, run_fig2, thread_count, Fig2Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Fig2Config {
        channel: Dmc::bsc(0.11)?,
        n: 9,
        rates: parse_range("0.3:0.45:0.05")?,
        trials: 5_000,
        seed: 2026,
        grid: Grid::standard(),
        output: None,
    };
    println!("rate,method,fer,ci,union_bound");
    for r in run_fig2(&cfg, thread_count())? {
        println!("{},{},{:.4e},{:.2e},{:.4e}", r.rate, r.method, r.fer, r.ci, r.union_bound);
    }
    Ok(())
}
