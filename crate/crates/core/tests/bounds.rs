//! Information-theoretic inequalities on random channels and kernels.

mod common;

use common::*;

fn assert_suite(s: Suite) {
    assert!(s.ok(), "{}: {} of {} checks violated, worst excess {:e}", s.name, s.violations, s.checks, s.worst);
}

#[test]
fn binary_capacity_bhattacharyya() {
    assert_suite(binary_iz_suite(400, 1));
}

#[test]
fn binary_error_probability_bhattacharyya() {
    assert_suite(binary_pe_z_suite(400, 2));
}

#[test]
fn qary_capacity_bhattacharyya() {
    assert_suite(qary_iz_suite(400, 3));
}

#[test]
fn pairwise_triangle_inequality() {
    assert_suite(triangle_suite(200, 4));
}

#[test]
fn qary_error_probability() {
    assert_suite(pe_qz_suite(400, 5));
}

#[test]
fn binary_partial_distance_bounds() {
    assert_suite(binary_zd_suite(150, 6));
}

#[test]
fn pairwise_partial_distance_bounds() {
    assert_suite(pair_zd_suite(150, 7));
}

#[test]
fn extreme_pair_bounds() {
    assert_suite(extremes_suite(150, 8));
}

#[test]
fn capacity_is_conserved() {
    let (_, worst) = conservation_suite(60, 9);
    assert!(worst < 1e-9, "worst conservation defect {worst:e}");
}
