//! Structural invariants of the membership estimators that are not part of
//! the named cross-check suites: positive homogeneity of the cone slices
//! and bit-level determinism.

use hotan_core::benchsets;
use hotan_core::setmodels::DistanceOracle;
use hotan_core::{
    member_slice, sample_directions, DirectionCollection, SliceSpec, VerdictStatus,
};

/// Extended, zero and asymptotic slices are cones: scaling an accepted
/// direction by a positive factor must not flip it to rejected. The proper
/// set is deliberately excluded, it need not be a cone.
#[test]
fn slice_verdicts_are_positively_homogeneous() {
    for problem in [benchsets::half_plane(), benchsets::parabola()] {
        let oracle = DistanceOracle::new(&problem.set, problem.distance_cfg.clone());
        let cfg = problem.membership_cfg();
        let coll = DirectionCollection::new(problem.base.clone(), vec![problem.tangent.clone()]);
        for spec in [SliceSpec::Extended, SliceSpec::Zero, SliceSpec::Infinity] {
            for w in sample_directions(2, 8, 0) {
                let v = member_slice(&oracle, &coll, &w, spec, &cfg);
                if v.status != VerdictStatus::Accepted {
                    continue;
                }
                for lambda in [0.5, 2.0] {
                    let scaled: Vec<f64> = w.iter().map(|c| c * lambda).collect();
                    let vs = member_slice(&oracle, &coll, &scaled, spec, &cfg);
                    assert_ne!(
                        vs.status,
                        VerdictStatus::Rejected,
                        "{}: {spec:?} accepts {w:?} but rejects {lambda} * w",
                        problem.name
                    );
                }
            }
        }
    }
}

#[test]
fn scans_are_bit_deterministic() {
    let problem = benchsets::cusp();
    let oracle_a = DistanceOracle::new(&problem.set, problem.distance_cfg.clone());
    let oracle_b = DistanceOracle::new(&problem.set, problem.distance_cfg.clone());
    let cfg = problem.membership_cfg();
    let coll = DirectionCollection::new(problem.base.clone(), vec![problem.tangent.clone()]);
    for w in sample_directions(2, 6, 0) {
        for spec in [SliceSpec::Proper, SliceSpec::Infinity, SliceSpec::Extended] {
            let a = member_slice(&oracle_a, &coll, &w, spec, &cfg);
            let b = member_slice(&oracle_b, &coll, &w, spec, &cfg);
            assert_eq!(a, b, "nondeterministic scan for {w:?} {spec:?}");
            assert_eq!(a.evidence_csv(), b.evidence_csv());
        }
    }
}

#[test]
fn direction_grids_are_deterministic_and_unit() {
    let a = sample_directions(2, 16, 1);
    let b = sample_directions(2, 16, 1);
    assert_eq!(a, b);
    assert_eq!(a[0], vec![1.0, 0.0]);
    assert_eq!(a[4], vec![0.0, 1.0]);
    let c = sample_directions(3, 20, 7);
    assert_eq!(c.len(), 20);
    for d in a.iter().chain(&c) {
        let n: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-12);
    }
    let hi = sample_directions(4, 10, 42);
    assert_eq!(hi, sample_directions(4, 10, 42));
    assert_ne!(hi, sample_directions(4, 10, 43));
}
