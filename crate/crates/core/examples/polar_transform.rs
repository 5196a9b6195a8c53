//! The recursive polar transform: Kronecker powers, bit reversal and the
//! fast encoder checked against the dense generator product.

use polarkit::kernel::Kernel;
use polarkit::transform::{bit_reversal_perm, dense_encode, dense_generator, encode, kronecker_power};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = Kernel::arikan();
    let g = kronecker_power(&k, 3)?;
    println!("G^(x)3:");
    for row in g.chunks(8) {
        println!("  {row:?}");
    }
    println!("bit reversal for N = 8: {:?}", bit_reversal_perm(2, 3)?);
    let u = [1, 0, 1, 1, 0, 0, 1, 0];
    let x = encode(&u, &k, 3)?;
    let dense = dense_encode(&u, &dense_generator(&k, 3)?, &k);
    println!("u = {u:?}\nx = {x:?}\ndense product agrees: {}", x == dense);

    let rs = Kernel::parse_spec("rs:3")?;
    let u = [2, 0, 1, 1, 2, 0, 0, 1, 2];
    println!("RS(3) depth 2: {:?} -> {:?}", u, encode(&u, &rs, 2)?);
    Ok(())
}
