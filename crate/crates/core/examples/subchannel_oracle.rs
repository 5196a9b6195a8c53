//! Exact synthetic channels: one step of the transform on a BSC, iterated
//! paths with output merging, and the closed-form erasure ladder.

use polarkit::channel::Dmc;
use polarkit::kernel::Kernel;
use polarkit::transform::{bec_ladder, iterate_subchannel, subchannel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = Kernel::arikan();
    let w = Dmc::bsc(0.11)?;
    for i in 0..2 {
        let s = subchannel(&w, &k, i, None)?;
        println!("BSC(0.11) index {i}: {} outputs, I = {:.5}, Z = {:.5}", s.outputs(), s.capacity(), s.bhattacharyya());
    }
    for path in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let s = iterate_subchannel(&w, &k, &path, true)?;
        println!("path {path:?}: {} merged outputs, Pe = {:.5}", s.outputs(), s.error_probability());
    }
    println!("BEC(0.5) ladder at n = 3: {:?}", bec_ladder(0.5, 3));
    Ok(())
}
