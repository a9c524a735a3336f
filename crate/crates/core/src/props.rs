//! Cross-checks between membership estimators: the executable property
//! suites behind `verify-props`.
//!
//! Each suite replays one structural identity of the tangent-cone family on
//! a benchmark set and counts hard contradictions, meaning an Accepted
//! verdict on one side against a Rejected verdict where the identity
//! forbids it. Inconclusive verdicts are tallied separately; they are an
//! honest numerical outcome, not a contradiction.

use std::collections::HashMap;

use crate::benchsets::BenchProblem;
use crate::cones::{
    self, DirectionCollection, MembershipConfig, SliceSpec, VerdictStatus,
};
use crate::setmodels::DistanceOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Pr2,
    Pr3,
    Pr5a,
    Pr6,
    Pr8,
    Pr9,
    Pr10,
    Cor1,
}

impl SuiteKind {
    pub fn all() -> [SuiteKind; 8] {
        [
            SuiteKind::Pr2,
            SuiteKind::Pr3,
            SuiteKind::Pr5a,
            SuiteKind::Pr6,
            SuiteKind::Pr8,
            SuiteKind::Pr9,
            SuiteKind::Pr10,
            SuiteKind::Cor1,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Pr2 => "pr2",
            SuiteKind::Pr3 => "pr3",
            SuiteKind::Pr5a => "pr5a",
            SuiteKind::Pr6 => "pr6",
            SuiteKind::Pr8 => "pr8",
            SuiteKind::Pr9 => "pr9",
            SuiteKind::Pr10 => "pr10",
            SuiteKind::Cor1 => "cor1",
        }
    }

    pub fn parse(name: &str) -> Option<SuiteKind> {
        match name {
            "pr2" => Some(SuiteKind::Pr2),
            "pr3" => Some(SuiteKind::Pr3),
            "pr5a" => Some(SuiteKind::Pr5a),
            "pr6" => Some(SuiteKind::Pr6),
            "pr8" => Some(SuiteKind::Pr8),
            "pr9" => Some(SuiteKind::Pr9),
            "pr10" => Some(SuiteKind::Pr10),
            "cor1" => Some(SuiteKind::Cor1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub resolution: usize,
    /// Angular margin (radians) kept between grid directions and known cone
    /// boundaries; boundary directions legitimately scan Inconclusive.
    pub margin: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            resolution: 16,
            margin: 0.1,
            alphas: vec![0.5, 2.0],
            betas: vec![0.5, 2.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub set_name: String,
    pub checks: usize,
    pub contradictions: usize,
    pub inconclusive: usize,
    pub notes: Vec<String>,
}

#[derive(Hash, PartialEq, Eq, Clone)]
struct MemberKey {
    tag: u8,
    alpha_bits: u64,
    dirs: Vec<u64>,
    w: Vec<u64>,
}

fn key(tag: u8, alpha: f64, dirs: &[Vec<f64>], w: &[f64]) -> MemberKey {
    MemberKey {
        tag,
        alpha_bits: alpha.to_bits(),
        dirs: dirs.iter().flatten().map(|v| v.to_bits()).collect(),
        w: w.iter().map(|v| v.to_bits()).collect(),
    }
}

/// Memoized membership verdicts for one benchmark problem. Scans are
/// deterministic, so caching only avoids repeated work across suites.
struct Memo<'a> {
    oracle: DistanceOracle<'a>,
    cfg: MembershipConfig,
    base: Vec<f64>,
    cache: HashMap<MemberKey, VerdictStatus>,
}

impl<'a> Memo<'a> {
    fn new(problem: &'a BenchProblem) -> Self {
        Memo {
            oracle: DistanceOracle::new(&problem.set, problem.distance_cfg.clone()),
            cfg: problem.membership_cfg(),
            base: problem.base.clone(),
            cache: HashMap::new(),
        }
    }

    fn first_order(&mut self, h: &[f64]) -> VerdictStatus {
        let k = key(0, 0.0, &[], h);
        if let Some(v) = self.cache.get(&k) {
            return *v;
        }
        let v = cones::member_first_order(&self.oracle, &self.base, h, &self.cfg).status;
        self.cache.insert(k, v);
        v
    }

    fn proper(&mut self, dirs: &[Vec<f64>], w: &[f64]) -> VerdictStatus {
        let k = key(1, 0.0, dirs, w);
        if let Some(v) = self.cache.get(&k) {
            return *v;
        }
        let coll = DirectionCollection::new(self.base.clone(), dirs.to_vec());
        let v = cones::member_proper(&self.oracle, &coll, w, &self.cfg).status;
        self.cache.insert(k, v);
        v
    }

    fn slice(&mut self, dirs: &[Vec<f64>], w: &[f64], spec: SliceSpec) -> VerdictStatus {
        let (tag, alpha) = match spec {
            SliceSpec::Proper => return self.proper(dirs, w),
            SliceSpec::Alpha(a) => (2, a),
            SliceSpec::Zero => (3, 0.0),
            SliceSpec::Infinity => (4, 0.0),
            SliceSpec::Extended => (5, 0.0),
            SliceSpec::FirstOrder => unreachable!("first-order handled separately"),
        };
        let k = key(tag, alpha, dirs, w);
        if let Some(v) = self.cache.get(&k) {
            return *v;
        }
        let coll = DirectionCollection::new(self.base.clone(), dirs.to_vec());
        let v = cones::member_slice(&self.oracle, &coll, w, spec, &self.cfg).status;
        self.cache.insert(k, v);
        v
    }
}

fn margin_grid(problem: &BenchProblem, cfg: &VerifyConfig, seed: u64) -> Vec<Vec<f64>> {
    let n = problem.base.len();
    let grid = cones::sample_directions(n, cfg.resolution, seed);
    if n != 2 {
        return grid;
    }
    grid.into_iter()
        .filter(|d| {
            let ang = d[1].atan2(d[0]).rem_euclid(2.0 * std::f64::consts::PI);
            problem.boundary_angles.iter().all(|b| {
                let diff = (ang - b).rem_euclid(2.0 * std::f64::consts::PI);
                diff.min(2.0 * std::f64::consts::PI - diff) >= cfg.margin
            })
        })
        .collect()
}

struct Tally {
    checks: usize,
    contradictions: usize,
    inconclusive: usize,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            contradictions: 0,
            inconclusive: 0,
            notes: Vec::new(),
        }
    }

    /// Count a one-sided implication `premise accepted => conclusion not
    /// rejected`.
    fn implies_not_rejected(
        &mut self,
        premise: VerdictStatus,
        conclusion: VerdictStatus,
        what: &str,
    ) {
        self.checks += 1;
        if premise == VerdictStatus::Inconclusive || conclusion == VerdictStatus::Inconclusive {
            self.inconclusive += 1;
        }
        if premise == VerdictStatus::Accepted && conclusion == VerdictStatus::Rejected {
            self.contradictions += 1;
            self.notes.push(what.to_string());
        }
    }

    /// Count a two-sided consistency check: no Accepted/Rejected pair in
    /// either order.
    fn no_flip(&mut self, a: VerdictStatus, b: VerdictStatus, what: &str) {
        self.checks += 1;
        if a == VerdictStatus::Inconclusive || b == VerdictStatus::Inconclusive {
            self.inconclusive += 1;
        }
        let flip = (a == VerdictStatus::Accepted && b == VerdictStatus::Rejected)
            || (a == VerdictStatus::Rejected && b == VerdictStatus::Accepted);
        if flip {
            self.contradictions += 1;
            self.notes.push(what.to_string());
        }
    }

    /// Strict implication `premise accepted => conclusion accepted`.
    fn implies_accepted(
        &mut self,
        premise: VerdictStatus,
        conclusion: VerdictStatus,
        what: &str,
    ) {
        self.checks += 1;
        if premise == VerdictStatus::Inconclusive || conclusion == VerdictStatus::Inconclusive {
            self.inconclusive += 1;
        }
        if premise == VerdictStatus::Accepted && conclusion != VerdictStatus::Accepted {
            self.contradictions += 1;
            self.notes.push(what.to_string());
        }
    }
}

fn zeros(n: usize, count: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; n]; count]
}

fn scale_vec(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|c| c * s).collect()
}

fn run_one(kind: SuiteKind, problem: &BenchProblem, memo: &mut Memo, cfg: &VerifyConfig) -> Tally {
    let n = problem.base.len();
    let h = problem.tangent.clone();
    let grid = margin_grid(problem, cfg, memo.cfg.sample_seed);
    let mut tally = Tally::new();
    match kind {
        // zero-padded collections collapse to the first-order cone
        SuiteKind::Pr2 => {
            for k in [2usize, 3] {
                let dirs = zeros(n, k - 1);
                for w in &grid {
                    let ext = memo.slice(&dirs, w, SliceSpec::Extended);
                    let fo = memo.first_order(w);
                    tally.no_flip(ext, fo, &format!("pr2 k={k} w={w:?}"));
                }
            }
        }
        // interior zero padding collapses to the order-2 cone
        SuiteKind::Pr3 => {
            let padded = vec![vec![0.0; n], h.clone()];
            let plain = vec![h.clone()];
            for w in &grid {
                let e3 = memo.slice(&padded, w, SliceSpec::Extended);
                let e2 = memo.slice(&plain, w, SliceSpec::Extended);
                tally.no_flip(e3, e2, &format!("pr3 w={w:?}"));
            }
        }
        // alpha slice is the 1/alpha-scaled proper set
        SuiteKind::Pr5a => {
            let dirs = vec![h.clone()];
            for &alpha in &cfg.alphas {
                for w in &grid {
                    let a = memo.slice(&dirs, w, SliceSpec::Alpha(alpha));
                    let p = memo.proper(&dirs, &scale_vec(w, alpha));
                    tally.no_flip(a, p, &format!("pr5a alpha={alpha} w={w:?}"));
                }
            }
        }
        // geometric rescaling of the collection leaves the ratio-invariant
        // slices unchanged
        SuiteKind::Pr6 => {
            let dirs = vec![h.clone()];
            for &beta in &cfg.betas {
                let scaled = vec![scale_vec(&h, beta)];
                for spec in [SliceSpec::Zero, SliceSpec::Infinity, SliceSpec::Extended] {
                    for w in &grid {
                        let a = memo.slice(&dirs, w, spec);
                        let b = memo.slice(&scaled, w, spec);
                        tally.no_flip(a, b, &format!("pr6 beta={beta} {spec:?} w={w:?}"));
                    }
                }
            }
        }
        // trailing zero padding embeds into the zero slice of the shorter
        // collection
        SuiteKind::Pr8 => {
            let padded = vec![h.clone(), vec![0.0; n]];
            let plain = vec![h.clone()];
            for w in &grid {
                let e = memo.slice(&padded, w, SliceSpec::Extended);
                let z = memo.slice(&plain, w, SliceSpec::Zero);
                tally.implies_not_rejected(e, z, &format!("pr8 w={w:?}"));
            }
        }
        // a nonempty zero slice forces 0 into the proper set
        SuiteKind::Pr9 => {
            let dirs = vec![h.clone()];
            let mut any_zero = VerdictStatus::Rejected;
            for w in &grid {
                let z = memo.slice(&dirs, w, SliceSpec::Zero);
                if z == VerdictStatus::Accepted {
                    any_zero = VerdictStatus::Accepted;
                } else if z == VerdictStatus::Inconclusive
                    && any_zero == VerdictStatus::Rejected
                {
                    any_zero = VerdictStatus::Inconclusive;
                }
            }
            let p0 = memo.proper(&dirs, &vec![0.0; n]);
            tally.implies_not_rejected(any_zero, p0, "pr9 zero-slice nonempty but 0 rejected");
        }
        // interleaved zeros: slices embed across orders in both directions
        SuiteKind::Pr10 => {
            let plain = vec![h.clone()];
            let interleaved = vec![vec![0.0; n], h.clone()];
            for w in &grid {
                let p = memo.proper(&plain, w);
                let z = memo.slice(&interleaved, w, SliceSpec::Zero);
                tally.implies_not_rejected(p, z, &format!("pr10 forward w={w:?}"));
            }
            for &alpha in &cfg.alphas {
                for w in &grid {
                    let a = memo.slice(&interleaved, w, SliceSpec::Alpha(alpha));
                    let inf = memo.slice(&plain, w, SliceSpec::Infinity);
                    tally.implies_not_rejected(
                        a,
                        inf,
                        &format!("pr10 swapped alpha={alpha} w={w:?}"),
                    );
                }
            }
        }
        // every slice member is an extended member
        SuiteKind::Cor1 => {
            let dirs = vec![h.clone()];
            for w in &grid {
                let ext = memo.slice(&dirs, w, SliceSpec::Extended);
                for &alpha in &cfg.alphas {
                    let a = memo.slice(&dirs, w, SliceSpec::Alpha(alpha));
                    tally.implies_accepted(a, ext, &format!("cor1 alpha={alpha} w={w:?}"));
                }
                let z = memo.slice(&dirs, w, SliceSpec::Zero);
                tally.implies_accepted(z, ext, &format!("cor1 zero w={w:?}"));
                let inf = memo.slice(&dirs, w, SliceSpec::Infinity);
                tally.implies_accepted(inf, ext, &format!("cor1 infinity w={w:?}"));
            }
        }
    }
    tally
}

/// Run `suites` against one benchmark problem, sharing one verdict cache.
pub fn run_suites(
    problem: &BenchProblem,
    suites: &[SuiteKind],
    cfg: &VerifyConfig,
) -> Vec<SuiteOutcome> {
    let mut memo = Memo::new(problem);
    suites
        .iter()
        .map(|kind| {
            let tally = run_one(*kind, problem, &mut memo, cfg);
            SuiteOutcome {
                suite: kind.name(),
                set_name: problem.name.to_string(),
                checks: tally.checks,
                contradictions: tally.contradictions,
                inconclusive: tally.inconclusive,
                notes: tally.notes,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchsets;

    #[test]
    fn half_plane_quick_suites_are_clean() {
        let problem = benchsets::half_plane();
        let cfg = VerifyConfig {
            resolution: 8,
            ..VerifyConfig::default()
        };
        let out = run_suites(
            &problem,
            &[SuiteKind::Pr2, SuiteKind::Pr5a, SuiteKind::Pr9],
            &cfg,
        );
        for o in &out {
            assert_eq!(
                o.contradictions, 0,
                "suite {} on {}: {:?}",
                o.suite, o.set_name, o.notes
            );
            assert!(o.checks > 0);
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for k in SuiteKind::all() {
            assert_eq!(SuiteKind::parse(k.name()), Some(k));
        }
        assert_eq!(SuiteKind::parse("bogus"), None);
    }
}
