//! Distance oracle invariants: cross-representation consistency,
//! nonnegativity, feasibility of the reported nearest point, and the
//! 1-Lipschitz bound.

use hotan_core::benchsets;
use hotan_core::setmodels::{DistanceConfig, DistanceOracle};

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*seed >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn cusp_representations_agree_on_a_grid() {
    let parametric = benchsets::cusp();
    let implicit = benchsets::cusp_implicit();
    let oracle_p = DistanceOracle::new(&parametric.set, parametric.distance_cfg.clone());
    let oracle_i = DistanceOracle::new(&implicit, DistanceConfig::default());
    for i in 0..21 {
        for j in 0..21 {
            let x = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
            let dp = oracle_p.distance(&x).unwrap().value;
            let di = oracle_i.distance(&x).unwrap().value;
            let tol = 1e-4 * (1.0 + (x[0] * x[0] + x[1] * x[1]).sqrt());
            assert!(
                (dp - di).abs() <= tol,
                "at {x:?}: parametric {dp} vs implicit {di}"
            );
        }
    }
}

#[test]
fn nearest_points_are_feasible_and_distances_nonnegative() {
    let mut seed = 7u64;
    for problem in benchsets::all() {
        let oracle = DistanceOracle::new(&problem.set, problem.distance_cfg.clone());
        for _ in 0..25 {
            let x = [4.0 * lcg(&mut seed) - 2.0, 4.0 * lcg(&mut seed) - 2.0];
            let r = oracle.distance(&x).unwrap();
            assert!(r.value >= 0.0);
            let back = oracle.distance(&r.nearest).unwrap();
            assert!(
                back.value <= 1e-8 * (1.0 + r.value),
                "{}: nearest point off-set by {}",
                problem.name,
                back.value
            );
        }
    }
}

#[test]
fn distance_is_one_lipschitz_up_to_oracle_tolerance() {
    let mut seed = 99u64;
    for problem in benchsets::all() {
        let oracle = DistanceOracle::new(&problem.set, problem.distance_cfg.clone());
        for _ in 0..25 {
            let x = [4.0 * lcg(&mut seed) - 2.0, 4.0 * lcg(&mut seed) - 2.0];
            let y = [4.0 * lcg(&mut seed) - 2.0, 4.0 * lcg(&mut seed) - 2.0];
            let dx = oracle.distance(&x).unwrap().value;
            let dy = oracle.distance(&y).unwrap().value;
            let sep = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            assert!(
                (dx - dy).abs() <= sep + 2e-8,
                "{}: |{dx} - {dy}| > {sep}",
                problem.name
            );
        }
    }
}
