//! Capacity is conserved by every transform step, while the fraction of
//! unpolarized erasure channels decays with depth.

use polarkit::channel::Dmc;
use polarkit::kernel::Kernel;
use polarkit::lab::{capacity_martingale_check, unpolarized_fraction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = Dmc::bsc(0.11)?;
    let rep = capacity_martingale_check(&w, &Kernel::arikan(), 3, true)?;
    for (level, caps) in rep.levels.iter().enumerate() {
        let mean = caps.iter().sum::<f64>() / caps.len() as f64;
        println!("level {level}: mean capacity {mean:.6}, spread {:.4}", rep.spread[level]);
    }
    println!("max defect {:.2e}, conserved: {}", rep.max_defect, rep.conserved);
    let frac = unpolarized_fraction(0.5, 16, 0.1)?;
    println!("BEC(0.5) fraction with Z in (0.1, 0.9): {frac:.4?}");
    Ok(())
}
