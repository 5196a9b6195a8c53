//! Code construction for BSC(0.11) at N = 256: density evolution against the
//! erasure heuristic and a Monte-Carlo estimate.

use polarkit::channel::Dmc;
use polarkit::density::{construct, heuristic_bec_construct, monte_carlo_construct, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = Dmc::bsc(0.11)?;
    let (n, count) = (8, 96);
    let de = construct(&w, n, count, &Grid::standard())?;
    let heur = heuristic_bec_construct(&w, n, count)?;
    let mc = monte_carlo_construct(&w, n, count, 20_000, 1)?;
    println!("N = {}, K = {count}", 1 << n);
    println!("DE union bound {:.3e}", de.union_bound);
    let de_pe = |info: &[usize]| info.iter().map(|&i| de.pe_per_index[i]).sum::<f64>();
    println!("heuristic info set, DE-evaluated bound {:.3e}", de_pe(&heur.info));
    println!("Monte-Carlo info set, DE-evaluated bound {:.3e}", de_pe(&mc.info));
    let shared = de.info.iter().filter(|i| heur.info.contains(i)).count();
    println!("DE and heuristic agree on {shared} of {count} information indices");
    Ok(())
}
