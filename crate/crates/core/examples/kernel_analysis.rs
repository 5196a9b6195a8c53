//! Partial distances, exponents and polarization certificates of Reed-Solomon
//! kernels over small fields, next to the binary 2x2 kernel.

use polarkit::field::Field;
use polarkit::kernel::{rs_exponent_bound, Kernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arikan = Kernel::arikan();
    let p = arikan.partial_distances()?;
    println!("arikan: D = {:?}, E = {}, certificate {:?}", p.d_min, p.e, arikan.check_polarization()?);
    for q in [3usize, 4, 5, 7, 8] {
        let gamma = Field::new(q)?.primitive_element();
        let k = Kernel::reed_solomon(q, gamma)?;
        let p = k.partial_distances()?;
        println!(
            "RS over GF({q}): D = {:?}, E = {:.5} (floor {:.5}), V = {:.5}, certificate {:?}",
            p.d_min,
            p.e,
            rs_exponent_bound(q),
            p.v,
            k.check_polarization()?
        );
    }
    let diagonal = Kernel::identity(Field::new(4)?, 3)?;
    println!("identity over GF(4): certificate {:?}", diagonal.check_polarization()?);
    Ok(())
}
