//! Cross-checks of fast algorithms against exhaustive oracles.

mod common;

use common::*;
use polarkit::channel::Dmc;
use polarkit::codec::{llr_decision, sc_decode, GenieSc, PolarCode};
use polarkit::density::Grid;
use polarkit::kernel::Kernel;
use polarkit::lab::ErasureLadder;
use polarkit::transform::{encode, subchannel};
use rand::Rng;

#[test]
fn density_evolution_matches_exact_subchannels() {
    let gap = de_oracle_gap(&Grid::standard());
    assert!(gap < 1e-3, "gap {gap:e}");
}

#[test]
fn recursive_encoder_matches_dense_product() {
    let (cases, bad) = encoder_suite(1, 10);
    assert!(cases > 30);
    assert_eq!(bad, 0);
}

#[test]
fn sc_matches_brute_force_on_erasures() {
    let (decisions, bad) = sc_map_suite(2, 11);
    assert!(decisions > 1000);
    assert_eq!(bad, 0);
}

#[test]
fn sc_on_general_kernel_matches_brute_force() {
    let mut r = rng(12);
    let w = Dmc::random(3, 3, &mut r);
    let k = Kernel::reed_solomon(3, 2).unwrap();
    let code = PolarCode::new(k.clone(), 2, &[]).unwrap();
    for _ in 0..20 {
        let y: Vec<usize> = (0..9).map(|_| r.gen_range(0..3)).collect();
        let dec = polarkit::codec::sc_decode_probability(&code, &w, &y).unwrap();
        for i in 0..9 {
            assert!(is_map(&map_scores(&w, &k, 2, &y, &dec.u_hat[..i]), dec.u_hat[i]));
        }
    }
}

#[test]
fn frame_errors_are_genie_errors_on_the_information_set() {
    let mut r = rng(13);
    let w = Dmc::bsc(0.08).unwrap();
    let n = 6;
    let size = 1 << n;
    let frozen: Vec<usize> = (0..size).filter(|i| (*i as u32).count_ones() < 3).collect();
    let code = PolarCode::new(Kernel::arikan(), n, &frozen).unwrap();
    let mut genie = GenieSc::new(&w, n);
    let mut seen_errors = 0;
    for _ in 0..400 {
        let info: Vec<usize> = (0..code.info_indices().len()).map(|_| r.gen_range(0..2)).collect();
        let u = code.scatter(&info).unwrap();
        let x = encode(&u, code.kernel(), n).unwrap();
        let y: Vec<usize> = x.iter().map(|&b| if r.gen_bool(0.08) { 1 - b } else { b }).collect();
        let frame_error = sc_decode(&code, &w, &y).unwrap().info_hat != info;
        let llrs = genie.run_received(&u, &y).unwrap();
        let genie_error = code.info_indices().iter().any(|&i| usize::from(llr_decision(llrs[i])) != u[i]);
        assert_eq!(frame_error, genie_error);
        seen_errors += usize::from(frame_error);
    }
    assert!(seen_errors > 10);
}

#[test]
fn erasure_ladder_matches_exact_qary_subchannels() {
    // q-ary erasure channel: outputs 0..q are the symbols, output q is the erasure.
    for (q, gamma) in [(3, 1), (4, 2)] {
        let k = Kernel::reed_solomon(q, gamma).unwrap();
        let ladder = ErasureLadder::new(&k).unwrap();
        let eps = 0.35;
        let rows: Vec<Vec<f64>> = (0..q)
            .map(|x| (0..=q).map(|y| if y == q { eps } else if y == x { 1.0 - eps } else { 0.0 }).collect())
            .collect();
        let w = Dmc::from_rows(&rows).unwrap();
        for i in 0..k.ell() {
            let z = subchannel(&w, &k, i, None).unwrap().bhattacharyya();
            assert!((z - ladder.step(eps, i)).abs() < 1e-12, "q={q} i={i}");
        }
    }
}
