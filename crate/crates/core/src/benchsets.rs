//! Built-in benchmark sets. These ship in the library so the verification
//! suites and the CLI run without external files.

use crate::cones::MembershipConfig;
use crate::expr::{default_variables, parse};
use crate::setmodels::{DistanceConfig, SetDesc};

/// A named set with its base point, a canonical tangent direction, the
/// angles where cone boundaries sit (grids avoid them), and a distance
/// config tuned to the representation.
#[derive(Debug, Clone)]
pub struct BenchProblem {
    pub name: &'static str,
    pub set: SetDesc,
    pub base: Vec<f64>,
    pub tangent: Vec<f64>,
    pub boundary_angles: Vec<f64>,
    pub distance_cfg: DistanceConfig,
}

impl BenchProblem {
    pub fn membership_cfg(&self) -> MembershipConfig {
        MembershipConfig {
            distance: self.distance_cfg.clone(),
            ..MembershipConfig::default()
        }
    }
}

/// Cusp curve {x1 >= 0, x1^2 = x2^3}, parameterized as (s^3, s^2) for
/// s in [0, 2].
pub fn cusp() -> BenchProblem {
    let s = ["s"];
    let set = SetDesc::parametric(
        vec![parse("s^3", &s).unwrap(), parse("s^2", &s).unwrap()],
        [0.0, 2.0],
    )
    .unwrap();
    BenchProblem {
        name: "cusp",
        set,
        base: vec![0.0, 0.0],
        tangent: vec![0.0, 1.0],
        boundary_angles: vec![
            std::f64::consts::FRAC_PI_2,
            3.0 * std::f64::consts::FRAC_PI_2,
        ],
        distance_cfg: DistanceConfig {
            grid_points: 1024,
            ..DistanceConfig::default()
        },
    }
}

/// The same cusp as an implicit system, for cross-representation checks.
pub fn cusp_implicit() -> SetDesc {
    let vars = default_variables(2);
    SetDesc::implicit(
        2,
        vec![parse("x1^2 - x2^3", &vars).unwrap()],
        vec![parse("-x1", &vars).unwrap()],
        None,
    )
    .unwrap()
}

/// Half-plane {x1 >= 0} as a single implicit inequality. One penalty start
/// suffices for a convex set, and the polish lands exactly on the boundary.
pub fn half_plane() -> BenchProblem {
    let vars = default_variables(2);
    let set = SetDesc::implicit(2, vec![], vec![parse("-x1", &vars).unwrap()], None).unwrap();
    BenchProblem {
        name: "half-plane",
        set,
        base: vec![0.0, 0.0],
        tangent: vec![1.0, 0.0],
        boundary_angles: vec![
            std::f64::consts::FRAC_PI_2,
            3.0 * std::f64::consts::FRAC_PI_2,
        ],
        distance_cfg: DistanceConfig {
            starts: 1,
            penalty_rhos: vec![1e6],
            descent_iters: 8,
            polish_iters: 20,
            ..DistanceConfig::default()
        },
    }
}

/// Parabola graph {x2 = x1^2} as the curve (s, s^2), s in [-2, 2].
pub fn parabola() -> BenchProblem {
    let s = ["s"];
    let set = SetDesc::parametric(
        vec![parse("s", &s).unwrap(), parse("s^2", &s).unwrap()],
        [-2.0, 2.0],
    )
    .unwrap();
    BenchProblem {
        name: "parabola",
        set,
        base: vec![0.0, 0.0],
        tangent: vec![1.0, 0.0],
        boundary_angles: vec![0.0, std::f64::consts::PI],
        distance_cfg: DistanceConfig {
            grid_points: 1024,
            ..DistanceConfig::default()
        },
    }
}

pub fn by_name(name: &str) -> Option<BenchProblem> {
    match name {
        "cusp" => Some(cusp()),
        "half-plane" | "halfplane" | "half_plane" => Some(half_plane()),
        "parabola" => Some(parabola()),
        _ => None,
    }
}

pub fn all() -> Vec<BenchProblem> {
    vec![cusp(), half_plane(), parabola()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setmodels::distance;

    #[test]
    fn base_points_lie_on_their_sets() {
        for p in all() {
            let d = distance(&p.set, &p.base, &p.distance_cfg).unwrap().value;
            assert!(d <= 1e-8, "{}: base point off-set by {d}", p.name);
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("cusp").is_some());
        assert!(by_name("half-plane").is_some());
        assert!(by_name("parabola").is_some());
        assert!(by_name("bogus").is_none());
    }
}
