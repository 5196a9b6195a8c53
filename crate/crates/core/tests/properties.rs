//! Property tests of the algebraic and probabilistic invariants.

mod common;

use common::*;
use polarkit::channel::Dmc;
use polarkit::codec::{sc_decode, simulate_fer, PolarCode};
use polarkit::density::{check_conv, density_from_channel, evolve_all, var_conv, Grid};
use polarkit::field::Field;
use polarkit::kernel::Kernel;
use polarkit::lab::{capacity_martingale_check, step_z, ZProcessState};
use polarkit::transform::{bec_ladder, bit_reversal_perm, encode};
use proptest::prelude::*;
use rand::Rng;

const FIELDS: [usize; 12] = [2, 3, 4, 5, 7, 8, 9, 16, 27, 49, 128, 256];

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms(qi in 0..FIELDS.len(), a in 0usize..256, b in 0usize..256, c in 0usize..256) {
        let q = FIELDS[qi];
        let f = Field::new(q).unwrap();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn channel_statistics_are_output_permutation_invariant(seed in any::<u64>(), q in 2usize..5, outputs in 2usize..7) {
        let mut r = rng(seed);
        let w = Dmc::random(q, outputs, &mut r);
        let mut perm: Vec<usize> = (0..outputs).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut r);
        let p = w.permute_outputs(&perm).unwrap();
        prop_assert!((w.capacity() - p.capacity()).abs() < 1e-12);
        prop_assert!((w.bhattacharyya() - p.bhattacharyya()).abs() < 1e-12);
        prop_assert!((w.error_probability() - p.error_probability()).abs() < 1e-12);
        let i = w.capacity();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&i));
        let back = Dmc::from_json(&w.to_json()).unwrap();
        // Loading renormalizes rows, which may move the last bit.
        for (a, b) in back.matrix().iter().zip(w.matrix()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn canonical_form_keeps_partial_distances(seed in any::<u64>(), q in prop::sample::select(vec![2usize, 3, 4, 5]), ell in 2usize..5) {
        let mut r = rng(seed);
        let ell = if q > 3 { ell.min(3) } else { ell };
        let k = random_linear_kernel(q, ell, &mut r);
        let c = k.canonicalize().unwrap();
        prop_assert_eq!(k.partial_distances().unwrap().d, c.partial_distances().unwrap().d);
        prop_assert_eq!(Kernel::from_json(&k.to_json()).unwrap(), k);
    }

    #[test]
    fn linear_encoding_is_additive(seed in any::<u64>(), q in prop::sample::select(vec![2usize, 3, 4]), n in 1usize..4) {
        let mut r = rng(seed);
        let k = random_linear_kernel(q, 2, &mut r);
        let f = k.field().clone();
        let size = 1 << n;
        let u: Vec<usize> = (0..size).map(|_| r.gen_range(0..q)).collect();
        let v: Vec<usize> = (0..size).map(|_| r.gen_range(0..q)).collect();
        let sum: Vec<usize> = u.iter().zip(&v).map(|(&a, &b)| f.add(a, b)).collect();
        let (eu, ev) = (encode(&u, &k, n).unwrap(), encode(&v, &k, n).unwrap());
        let expected: Vec<usize> = eu.iter().zip(&ev).map(|(&a, &b)| f.add(a, b)).collect();
        prop_assert_eq!(encode(&sum, &k, n).unwrap(), expected);
    }

    #[test]
    fn nonlinear_encoding_is_a_bijection(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_nonlinear_kernel(2, 2, &mut r);
        let mut seen = std::collections::HashSet::new();
        for word in 0..256usize {
            let u: Vec<usize> = (0..8).map(|j| word >> j & 1).collect();
            prop_assert!(seen.insert(encode(&u, &k, 3).unwrap()));
        }
    }

    #[test]
    fn sc_decisions_are_map_given_the_prefix(seed in any::<u64>(), outputs in 2usize..5) {
        let mut r = rng(seed);
        let w = Dmc::random(2, outputs, &mut r);
        let n = 3;
        let frozen: Vec<usize> = (0..8).filter(|_| r.gen_bool(0.3)).collect();
        let code = PolarCode::new(Kernel::arikan(), n, &frozen).unwrap();
        let y: Vec<usize> = (0..8).map(|_| r.gen_range(0..outputs)).collect();
        let dec = sc_decode(&code, &w, &y).unwrap();
        for &i in code.info_indices() {
            let scores = map_scores(&w, &Kernel::arikan(), n, &y, &dec.u_hat[..i]);
            prop_assert!(is_map(&scores, dec.u_hat[i]), "index {} scores {:?}", i, scores);
        }
    }

    #[test]
    fn convolutions_conserve_mass(p in 0.01f64..0.49, s in 0.3f64..1.5) {
        let g = Grid::standard();
        let a = density_from_channel(&Dmc::bsc(p).unwrap(), &g).unwrap();
        let b = density_from_channel(&Dmc::bawgnc(s, 40).unwrap(), &g).unwrap();
        prop_assert!((var_conv(&a, &b).unwrap().total_mass() - 1.0).abs() < 1e-9);
        prop_assert!((check_conv(&a, &b).unwrap().total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn erasure_evolution_is_exact(eps in 0.0f64..1.0, n in 0usize..9) {
        let (pe, z) = evolve_all(&Dmc::bec(eps).unwrap(), n, &Grid::standard()).unwrap();
        for (i, e) in bec_ladder(eps, n).into_iter().enumerate() {
            prop_assert!((pe[i] - e / 2.0).abs() < 1e-12);
            prop_assert!((z[i] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity_martingale_on_random_channels(seed in any::<u64>(), q in 2usize..4) {
        let mut r = rng(seed);
        let w = Dmc::random(q, 2, &mut r);
        let k = random_kernel(q, 2, &mut r);
        let rep = capacity_martingale_check(&w, &k, 2, true).unwrap();
        prop_assert!(rep.conserved, "defect {:e}", rep.max_defect);
    }

    #[test]
    fn z_process_stays_in_the_open_interval(seed in any::<u64>(), eps in 0.001f64..0.999) {
        let mut r = rng(seed);
        let mut s = ZProcessState::exact_erasure(&Kernel::reed_solomon(4, 2).unwrap(), eps).unwrap();
        for _ in 0..40 {
            s = step_z(&s, &mut r);
            prop_assert!(s.neg_ln_z() > 0.0 && s.neg_ln_z().is_finite());
        }
    }

    #[test]
    fn bit_reversal_is_an_involution(ell in 2usize..5, n in 0usize..5) {
        let p = bit_reversal_perm(ell, n).unwrap();
        for (j, &pj) in p.iter().enumerate() {
            prop_assert_eq!(p[pj], j);
        }
    }
}

#[test]
fn simulation_is_reproducible() {
    let code = PolarCode::new(Kernel::arikan(), 5, &[0, 1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 16]).unwrap();
    let w = Dmc::bsc(0.06).unwrap();
    let a = simulate_fer(&code, &w, 500, 42).unwrap();
    assert_eq!(a, simulate_fer(&code, &w, 500, 42).unwrap());
    assert_ne!(a, simulate_fer(&code, &w, 500, 43).unwrap());
}
