//! Capacity, Bhattacharyya parameter and error probability of the standard
//! binary channels and a random ternary channel.

use polarkit::channel::Dmc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<22} {:>9} {:>9} {:>9} {:>9}", "channel", "I", "Z", "Pe", "R0");
    for spec in ["bec:0.5", "bsc:0.11", "bawgnc:0.97865:64"] {
        let w = Dmc::parse_spec(spec)?;
        let s = w.stats();
        println!("{spec:<22} {:>9.5} {:>9.5} {:>9.5} {:>9.5}", s.capacity, s.bhattacharyya, s.pe, s.cutoff);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = Dmc::random(3, 4, &mut rng);
    let (z_min, z_max) = w.z_extremes();
    println!("random GF(3) channel: I = {:.5}, Z = {:.5}, Z range [{z_min:.5}, {z_max:.5}]", w.capacity(), w.bhattacharyya());
    println!("{}", w.to_json());
    Ok(())
}
