//! A polar code over GF(3) with the Reed-Solomon kernel, decoded by the
//! probability-domain SC decoder on a ternary symmetric channel.

use polarkit::channel::{Dmc, OutputSampler};
use polarkit::codec::{encode_message, sc_decode, PolarCode};
use polarkit::kernel::{to_digits, Kernel};
use polarkit::lab::ZProcessState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = Dmc::from_rows(&[vec![0.9, 0.05, 0.05], vec![0.05, 0.9, 0.05], vec![0.05, 0.05, 0.9]])?;
    let kernel = Kernel::reed_solomon(3, 2)?;
    // Rank indices by the erasure probability of the matching erasure channel.
    let n = 3;
    let start = ZProcessState::exact_erasure(&kernel, 1.0 - w.capacity())?;
    let mut score: Vec<(f64, usize)> = (0..27)
        .map(|i| {
            let mut digits = [0; 3];
            to_digits(i, 3, &mut digits);
            let mut s = start.clone();
            digits.iter().for_each(|&d| s.apply(d));
            (s.z(), i)
        })
        .collect();
    score.sort_by(|a, b| b.0.total_cmp(&a.0));
    let frozen: Vec<usize> = score[..18].iter().map(|&(_, i)| i).collect();
    let code = PolarCode::new(kernel, n, &frozen)?;
    let sampler = OutputSampler::new(&w);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frames = 500;
    let mut errors = 0;
    for _ in 0..frames {
        let info: Vec<usize> = (0..code.info_indices().len()).map(|_| rng.gen_range(0..3)).collect();
        let y: Vec<usize> = encode_message(&code, &info)?.iter().map(|&s| sampler.sample(s, &mut rng)).collect();
        errors += usize::from(sc_decode(&code, &w, &y)?.info_hat != info);
    }
    println!("N = {}, K = {}, {errors}/{frames} frame errors", code.len(), code.info_indices().len());
    Ok(())
}
