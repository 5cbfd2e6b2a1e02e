mod common;

use common::*;

const CASES: u32 = 1000;

#[test]
fn moreau_decomposition_is_exact() {
    suite_moreau(CASES).unwrap();
}

#[test]
fn eps_cone_is_homogeneous_and_monotone() {
    suite_homogeneity_monotonicity(CASES).unwrap();
}

#[test]
fn zero_eps_collapses_to_regular_normals() {
    suite_zero_collapse(CASES).unwrap();
}

#[test]
fn eps_scan_stabilizes_to_limiting_graph() {
    suite_eps_scan(CASES).unwrap();
}

#[test]
fn inverse_image_normals_lift() {
    suite_inverse_image(CASES).unwrap();
}

#[test]
fn tangent_cones_grow_near_the_base_point() {
    suite_tangent_stability(CASES).unwrap();
}
