//! Rate of polarization on BEC(0.5): how often Z_n falls below the
//! doubly-exponential threshold, against the Gaussian prediction.

use polarkit::kernel::Kernel;
use polarkit::lab::{scaling_experiment, ScalingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScalingConfig {
        eps: 0.5,
        n: 20,
        trials: 0,
        t_grid: vec![-1.0, 0.0, 1.0],
        betas: vec![0.75],
        seed: 1,
        enumerate: None,
    };
    let rep = scaling_experiment(&Kernel::arikan(), &cfg)?;
    println!("n = {}, {} paths ({})", rep.n, rep.samples, if rep.enumerated { "enumerated" } else { "sampled" });
    for row in &rep.rows {
        println!("t={:?} beta={:?}: empirical {:.5}, target {:.5}", row.t, row.beta, row.empirical, row.target);
    }
    println!("{} paths with Z < 1/2, KS distance to normal {:?}", rep.survivors, rep.ks);
    Ok(())
}
