//! Encode, transmit over BSC(0.05) and decode with successive cancellation,
//! then estimate the frame error rate.

use polarkit::channel::{Dmc, OutputSampler};
use polarkit::codec::{encode_message, sc_decode, simulate_fer, union_bound, PolarCode};
use polarkit::density::{construct, Grid};
use polarkit::kernel::Kernel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = Dmc::bsc(0.05)?;
    let n = 9;
    let design = construct(&w, n, 256, &Grid::standard())?;
    let code = PolarCode::new(Kernel::arikan(), n, &design.frozen)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let info: Vec<usize> = (0..code.info_indices().len()).map(|_| rng.gen_range(0..2)).collect();
    let x = encode_message(&code, &info)?;
    let sampler = OutputSampler::new(&w);
    let y: Vec<usize> = x.iter().map(|&s| sampler.sample(s, &mut rng)).collect();
    let flips = x.iter().zip(&y).filter(|(a, b)| a != b).count();
    let decoded = sc_decode(&code, &w, &y)?;
    println!("N = {}, rate {}, {flips} channel flips, decoded correctly: {}", code.len(), code.rate(), decoded.info_hat == info);
    let fer = simulate_fer(&code, &w, 2000, 11)?;
    println!("FER {:.4} ± {:.4} over {} frames, union bound {:.4}", fer.fer, fer.ci, fer.trials, union_bound(&code, &w)?);
    Ok(())
}
