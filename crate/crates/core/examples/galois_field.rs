//! Arithmetic in GF(8): the primitive element, its powers and inverses.

use polarkit::field::Field;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = Field::new(8)?;
    let alpha = f.primitive_element();
    println!("GF({}) = GF({})^{}, modulus coefficients {:?}", f.q(), f.p(), f.m(), f.modulus());
    println!("primitive element {alpha} has order {:?}", f.order(alpha));
    for k in 0..7 {
        let a = f.alpha_pow(k);
        println!("alpha^{k} = {a}, inverse {}", f.inv(a)?);
    }
    let (a, b) = (f.element(5)?, f.element(6)?);
    println!("5 + 6 = {}, 5 * 6 = {}, 5 / 6 = {}", f.add(a, b), f.mul(a, b), f.div(a, b)?);
    Ok(())
}
