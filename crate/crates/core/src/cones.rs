//! Membership estimators for first-order tangent cones, k-th order proper
//! tangent sets, the extended tangent cone, and its ratio slices.
//!
//! Every estimator watches the scaled distance
//! `d(base + t h1 + ... + t^(k-1) h_(k-1) + t^(k-1) tau w, Q) / (t^(k-1) tau)`
//! along a geometric refinement of t. Fixed-rule scans pin tau to t
//! (proper), to alpha*t (alpha slices), or leave it free inside a power-law
//! window whose ratio tau/t runs to 0 (zero slice), to infinity (asymptotic
//! slice), or spans both regimes (extended cone). Window scans minimize the
//! scaled distance over tau per level, which is the numerical stand-in for
//! the two-parameter lower limit.
//!
//! The three-valued verdict is deliberately conservative: Accepted needs a
//! clean downward tail, Rejected needs the scaled distance pinned above a
//! floor without systematic decay, everything else is Inconclusive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::setmodels::{dist, norm, DistanceOracle, OracleError};

/// Which slice of the extended tangent cone a scan targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceSpec {
    FirstOrder,
    Proper,
    Alpha(f64),
    Zero,
    Infinity,
    Extended,
}

/// Base point plus the ordered directions (h1, ..., h_(k-1)); the arc order
/// is k = directions + 1.
#[derive(Debug, Clone)]
pub struct DirectionCollection {
    base: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

impl DirectionCollection {
    pub fn new(base: Vec<f64>, directions: Vec<Vec<f64>>) -> Self {
        assert!(
            !directions.is_empty(),
            "a collection needs at least one direction (order k >= 2)"
        );
        let n = base.len();
        for d in &directions {
            assert_eq!(d.len(), n, "direction dimension mismatch");
        }
        DirectionCollection { base, directions }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn order(&self) -> usize {
        self.directions.len() + 1
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }
}

/// Tau rule paired with a geometric t ladder.
#[derive(Debug, Clone)]
pub enum TauRule {
    /// tau = alpha * t; the ratio is exactly alpha at every level.
    Proportional(f64),
    /// tau = t^e with e > 1; the ratio decays to zero.
    PowerLow(f64),
    /// tau = t^e with 0 < e < 1; the ratio grows without bound.
    PowerHigh(f64),
    /// Explicit (t, tau) rows.
    FreeScan(Vec<(f64, f64)>),
}

#[derive(Debug, Clone)]
pub struct RefinementSchedule {
    pub t0: f64,
    pub ratio: f64,
    pub levels: usize,
    pub tau_rule: TauRule,
}

impl Default for RefinementSchedule {
    fn default() -> Self {
        RefinementSchedule {
            t0: 0.1,
            ratio: 0.5,
            levels: 24,
            tau_rule: TauRule::Proportional(1.0),
        }
    }
}

impl RefinementSchedule {
    pub fn t_at(&self, level: usize) -> f64 {
        self.t0 * self.ratio.powi(level as i32)
    }

    /// Materialized (t, tau) rows.
    pub fn rows(&self) -> Vec<(f64, f64)> {
        match &self.tau_rule {
            TauRule::FreeScan(rows) => rows.clone(),
            rule => (0..self.levels)
                .map(|j| {
                    let t = self.t_at(j);
                    let tau = match rule {
                        TauRule::Proportional(a) => a * t,
                        TauRule::PowerLow(e) => t.powf(*e),
                        TauRule::PowerHigh(e) => t.powf(*e),
                        TauRule::FreeScan(_) => unreachable!(),
                    };
                    (t, tau)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Accepted,
    Rejected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceRow {
    pub level: usize,
    pub t: f64,
    pub tau: f64,
    pub ratio: f64,
    pub distance: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub status: VerdictStatus,
    pub evidence: Vec<EvidenceRow>,
    pub decisive_level: Option<usize>,
    pub note: Option<String>,
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl MembershipVerdict {
    fn accepted_trivially(note: &str) -> Self {
        MembershipVerdict {
            status: VerdictStatus::Accepted,
            evidence: Vec::new(),
            decisive_level: None,
            note: Some(note.to_string()),
        }
    }

    fn inconclusive_error(evidence: Vec<EvidenceRow>, err: OracleError) -> Self {
        MembershipVerdict {
            status: VerdictStatus::Inconclusive,
            evidence,
            decisive_level: None,
            note: Some(format!("oracle failure: {err}")),
        }
    }

    pub fn evidence_csv(&self) -> String {
        let mut out = String::from("level,t,tau,ratio,distance,scaled_distance\n");
        for r in &self.evidence {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.level,
                fmt17(r.t),
                fmt17(r.tau),
                fmt17(r.ratio),
                fmt17(r.distance),
                fmt17(r.scaled)
            ));
        }
        out
    }
}

/// Scan thresholds and schedule constants.
#[derive(Debug, Clone)]
pub struct MembershipConfig {
    /// Scaled distance at or below this counts toward acceptance.
    pub accept_tol: f64,
    /// Scaled distance at or above this at every level past warmup counts
    /// toward rejection.
    pub reject_floor: f64,
    /// Levels ignored by the rejection rule.
    pub warmup: usize,
    /// Consecutive terminal levels required for acceptance.
    pub accept_run: usize,
    /// Rejection also requires the per-level geometric decay of the scaled
    /// distance to stay above this factor; steadily vanishing sequences
    /// report Inconclusive instead of Rejected.
    pub decay_guard: f64,
    pub t0: f64,
    pub ratio: f64,
    pub levels: usize,
    /// First-order scans go deeper: curvature-unbounded sets reach the
    /// accept tolerance only at very small t.
    pub first_order_levels: usize,
    /// Log-spaced tau probes per level in window scans.
    pub tau_grid: usize,
    pub tau_refine_iters: usize,
    /// tau = t^e exponent windows per slice family.
    pub zero_exponents: [f64; 2],
    pub infinity_exponents: [f64; 2],
    pub extended_exponents: [f64; 2],
    pub sample_seed: u64,
    pub distance: crate::setmodels::DistanceConfig,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        MembershipConfig {
            accept_tol: 1e-6,
            reject_floor: 1e-2,
            warmup: 4,
            accept_run: 3,
            decay_guard: 0.92,
            t0: 0.1,
            ratio: 0.5,
            levels: 24,
            first_order_levels: 44,
            tau_grid: 15,
            tau_refine_iters: 42,
            zero_exponents: [1.25, 2.0],
            infinity_exponents: [0.25, 0.75],
            extended_exponents: [0.25, 2.0],
            sample_seed: 0,
            distance: crate::setmodels::DistanceConfig::default(),
        }
    }
}

impl MembershipConfig {
    pub fn t_levels(&self, count: usize) -> Vec<f64> {
        (0..count).map(|j| self.t0 * self.ratio.powi(j as i32)).collect()
    }
}

#[derive(Clone)]
struct LevelRow {
    t: f64,
    tau: f64,
    distance: f64,
    scaled: f64,
    raw_floor: f64,
}

impl LevelRow {
    fn passes(&self, accept_tol: f64) -> bool {
        self.scaled <= accept_tol || self.distance <= self.raw_floor
    }
}

/// Distance indistinguishable from zero at this magnitude: the point is on
/// the set to working precision no matter how small the scale divisor is.
fn raw_floor(base_norm: f64, offset: f64) -> f64 {
    256.0 * f64::EPSILON * (base_norm + offset)
}

fn decide(rows: &[LevelRow], cfg: &MembershipConfig) -> (VerdictStatus, Option<usize>) {
    let n = rows.len();
    let run = cfg.accept_run.max(1);
    if n >= run {
        let tail = &rows[n - run..];
        let floor_pass = |r: &LevelRow| r.distance <= r.raw_floor;
        let passes = tail
            .iter()
            .all(|r| r.scaled <= cfg.accept_tol || floor_pass(r));
        let trend = tail.windows(2).all(|w| {
            floor_pass(&w[1])
                || w[1].scaled <= w[0].scaled * 1.001
                || w[1].scaled <= cfg.accept_tol * 1e-2
        });
        if passes && trend {
            return (VerdictStatus::Accepted, Some(n - run));
        }
    }
    if n > cfg.warmup + 1 {
        let span = &rows[cfg.warmup..];
        if span.iter().all(|r| r.scaled >= cfg.reject_floor) {
            let first = span[0].scaled;
            let last = span[span.len() - 1].scaled;
            let steps = (span.len() - 1) as f64;
            let per_level = (last / first).powf(1.0 / steps);
            if per_level >= cfg.decay_guard {
                return (VerdictStatus::Rejected, Some(n - 1));
            }
        }
    }
    (VerdictStatus::Inconclusive, None)
}

enum TauPlan {
    Fixed(Box<dyn Fn(f64) -> f64>),
    Window(Box<dyn Fn(f64) -> (f64, f64)>),
}

/// Per-level plan after the resolution clamp.
enum LevelPlan {
    Fixed(f64),
    Window(f64, f64),
}

/// Tail displacements below this many ulps of the arc magnitude are not
/// representable against the arc; such levels carry no information and are
/// dropped rather than scored.
const RESOLVE_ULPS: f64 = 4096.0;

/// Evaluate one level: either a single (t, tau) probe or the tau window
/// minimum of the scaled distance.
fn level_sample(
    oracle: &DistanceOracle,
    base: &[f64],
    point_of: &dyn Fn(f64, f64) -> Vec<f64>,
    scale_of: &dyn Fn(f64, f64) -> f64,
    t: f64,
    plan: &LevelPlan,
    cfg: &MembershipConfig,
) -> Result<LevelRow, OracleError> {
    let base_norm = norm(base);
    let probe = |tau: f64| -> Result<LevelRow, OracleError> {
        let p = point_of(t, tau);
        let d = oracle.distance(&p)?.value;
        let scale = scale_of(t, tau);
        Ok(LevelRow {
            t,
            tau,
            distance: d,
            scaled: d / scale,
            raw_floor: raw_floor(base_norm, dist(&p, base)),
        })
    };
    match plan {
        LevelPlan::Fixed(tau) => probe(*tau),
        LevelPlan::Window(lo, hi) => {
            let (lo, hi) = (lo.min(*hi), lo.max(*hi));
            let m = cfg.tau_grid.max(3);
            let lln = lo.ln();
            let hln = hi.ln();
            let mut samples: Vec<LevelRow> = Vec::with_capacity(m);
            for i in 0..m {
                let tau = (lln + (hln - lln) * i as f64 / (m - 1) as f64).exp();
                samples.push(probe(tau)?);
            }
            let values: Vec<f64> = samples.iter().map(|s| s.scaled).collect();
            let mut minima: Vec<usize> = (0..m)
                .filter(|&i| {
                    (i == 0 || values[i] <= values[i - 1])
                        && (i + 1 == m || values[i] <= values[i + 1])
                })
                .collect();
            if minima.len() > 3 {
                minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
                minima.truncate(3);
                minima.sort_unstable();
            }
            // prefer rows that pass either accept criterion, then the
            // smallest scaled distance
            let better = |row: &LevelRow, best: &Option<LevelRow>| -> bool {
                match best {
                    None => true,
                    Some(b) => {
                        let (rp, bp) = (row.passes(cfg.accept_tol), b.passes(cfg.accept_tol));
                        (rp && !bp) || (rp == bp && row.scaled < b.scaled)
                    }
                }
            };
            let mut best = None::<LevelRow>;
            for s in &samples {
                if better(s, &best) {
                    best = Some(s.clone());
                }
            }
            for &i in &minima {
                let a = if i == 0 { lln } else { samples[i - 1].tau.ln() };
                let b = if i + 1 == m {
                    hln
                } else {
                    samples[i + 1].tau.ln()
                };
                let (u, _) = crate::setmodels::golden_min(
                    |u| {
                        let tau = u.exp();
                        probe(tau).map(|r| r.scaled)
                    },
                    a,
                    b,
                    0.0,
                    1e-6,
                    cfg.tau_refine_iters,
                )?;
                let row = probe(u.exp())?;
                if better(&row, &best) {
                    best = Some(row);
                }
            }
            Ok(best.expect("window scan sampled at least one tau"))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_scan(
    oracle: &DistanceOracle,
    base: &[f64],
    t_levels: &[f64],
    plan: TauPlan,
    point_of: &dyn Fn(f64, f64) -> Vec<f64>,
    scale_of: &dyn Fn(f64, f64) -> f64,
    arc_of: &dyn Fn(f64) -> Vec<f64>,
    tail_norm: f64,
    cfg: &MembershipConfig,
) -> MembershipVerdict {
    let mut rows = Vec::with_capacity(t_levels.len());
    for &t in t_levels {
        let level_plan = match &plan {
            TauPlan::Fixed(tau_of) => LevelPlan::Fixed(tau_of(t)),
            TauPlan::Window(window_of) => {
                let (lo, hi) = window_of(t);
                LevelPlan::Window(lo.min(hi), lo.max(hi))
            }
        };
        // drop levels whose tail displacement is not fully representable
        // against the arc point; a partially resolvable window could hide
        // the accepting regime and turn a member into a false reject
        if tail_norm > 0.0 {
            let arc_mag = norm(&arc_of(t));
            let disp_floor = RESOLVE_ULPS * f64::EPSILON * arc_mag;
            let smallest_scale = match &level_plan {
                LevelPlan::Fixed(tau) => scale_of(t, *tau),
                LevelPlan::Window(lo, _) => scale_of(t, *lo),
            };
            if smallest_scale * tail_norm < disp_floor {
                continue;
            }
        }
        match level_sample(oracle, base, point_of, scale_of, t, &level_plan, cfg) {
            Ok(r) => rows.push(r),
            Err(e) => {
                let evidence = to_evidence(&rows);
                return MembershipVerdict::inconclusive_error(evidence, e);
            }
        }
    }
    let (status, decisive_level) = decide(&rows, cfg);
    MembershipVerdict {
        status,
        evidence: to_evidence(&rows),
        decisive_level,
        note: None,
    }
}

fn to_evidence(rows: &[LevelRow]) -> Vec<EvidenceRow> {
    rows.iter()
        .enumerate()
        .map(|(level, r)| EvidenceRow {
            level,
            t: r.t,
            tau: r.tau,
            ratio: r.tau / r.t,
            distance: r.distance,
            scaled: r.scaled,
        })
        .collect()
}

fn arc_point(base: &[f64], directions: &[Vec<f64>], t: f64) -> Vec<f64> {
    let mut p = base.to_vec();
    let mut tp = 1.0;
    for h in directions {
        tp *= t;
        for (pi, hi) in p.iter_mut().zip(h) {
            *pi += tp * hi;
        }
    }
    p
}

fn tail_point(
    base: &[f64],
    directions: &[Vec<f64>],
    w: &[f64],
    t: f64,
    tau: f64,
) -> Vec<f64> {
    let mut p = arc_point(base, directions, t);
    let k = directions.len() + 1;
    let s = t.powi(k as i32 - 1) * tau;
    for (pi, wi) in p.iter_mut().zip(w) {
        *pi += s * wi;
    }
    p
}

fn tail_scale(k: usize, t: f64, tau: f64) -> f64 {
    t.powi(k as i32 - 1) * tau
}

/// First-order tangency of `h` at `base`: scan d(base + t h, Q) / t.
/// The zero direction is trivially tangent since the base point lies in Q.
pub fn member_first_order(
    oracle: &DistanceOracle,
    base: &[f64],
    h: &[f64],
    cfg: &MembershipConfig,
) -> MembershipVerdict {
    assert_eq!(base.len(), h.len(), "direction dimension mismatch");
    if norm(h) == 0.0 {
        return MembershipVerdict::accepted_trivially("zero direction, base point is in the set");
    }
    let levels = cfg.t_levels(cfg.first_order_levels);
    let base_v = base.to_vec();
    let base_arc = base.to_vec();
    let h_v = h.to_vec();
    let h_norm = norm(h);
    run_scan(
        oracle,
        base,
        &levels,
        TauPlan::Fixed(Box::new(|t| t)),
        &move |_t, tau| {
            base_v
                .iter()
                .zip(&h_v)
                .map(|(b, hi)| b + tau * hi)
                .collect()
        },
        &|_t, tau| tau,
        &move |_t| base_arc.clone(),
        h_norm,
        cfg,
    )
}

/// k-th order proper tangency: tail t^k w against scale t^k.
pub fn member_proper(
    oracle: &DistanceOracle,
    coll: &DirectionCollection,
    w: &[f64],
    cfg: &MembershipConfig,
) -> MembershipVerdict {
    assert_eq!(coll.dim(), w.len(), "tail dimension mismatch");
    let levels = cfg.t_levels(cfg.levels);
    let k = coll.order();
    let base = coll.base().to_vec();
    let dirs = coll.directions().to_vec();
    let arc_base = base.clone();
    let arc_dirs = dirs.clone();
    let w_v = w.to_vec();
    let w_norm = norm(w);
    run_scan(
        oracle,
        coll.base(),
        &levels,
        TauPlan::Fixed(Box::new(|t| t)),
        &move |t, tau| tail_point(&base, &dirs, &w_v, t, tau),
        &move |t, tau| tail_scale(k, t, tau),
        &move |t| arc_point(&arc_base, &arc_dirs, t),
        w_norm,
        cfg,
    )
}

/// Slice membership. Alpha pins tau = alpha t; Zero, Infinity and Extended
/// minimize over their power-law tau windows; Infinity unit-normalizes `w`
/// first. `FirstOrder` is not a valid slice here.
pub fn member_slice(
    oracle: &DistanceOracle,
    coll: &DirectionCollection,
    w: &[f64],
    slice: SliceSpec,
    cfg: &MembershipConfig,
) -> MembershipVerdict {
    assert_eq!(coll.dim(), w.len(), "tail dimension mismatch");
    let k = coll.order();
    let levels = cfg.t_levels(cfg.levels);
    let base = coll.base().to_vec();
    let dirs = coll.directions().to_vec();

    let (w_eff, plan): (Vec<f64>, TauPlan) = match slice {
        SliceSpec::FirstOrder => {
            panic!("first-order membership has its own scan; use member_first_order")
        }
        SliceSpec::Proper => return member_proper(oracle, coll, w, cfg),
        SliceSpec::Alpha(alpha) => {
            assert!(
                alpha.is_finite() && alpha > 0.0,
                "alpha slice needs a finite positive ratio"
            );
            (w.to_vec(), TauPlan::Fixed(Box::new(move |t| alpha * t)))
        }
        SliceSpec::Zero => {
            let [lo_e, hi_e] = cfg.zero_exponents;
            (
                w.to_vec(),
                TauPlan::Window(Box::new(move |t| (t.powf(hi_e), t.powf(lo_e)))),
            )
        }
        SliceSpec::Infinity => {
            let nw = norm(w);
            let w_unit = if nw > 0.0 {
                w.iter().map(|c| c / nw).collect()
            } else {
                w.to_vec()
            };
            let [lo_e, hi_e] = cfg.infinity_exponents;
            (
                w_unit,
                TauPlan::Window(Box::new(move |t| (t.powf(hi_e), t.powf(lo_e)))),
            )
        }
        SliceSpec::Extended => {
            let [lo_e, hi_e] = cfg.extended_exponents;
            (
                w.to_vec(),
                TauPlan::Window(Box::new(move |t| (t.powf(hi_e), t.powf(lo_e)))),
            )
        }
    };

    let arc_base = base.clone();
    let arc_dirs = dirs.clone();
    let w_norm = norm(&w_eff);
    run_scan(
        oracle,
        coll.base(),
        &levels,
        plan,
        &move |t, tau| tail_point(&base, &dirs, &w_eff, t, tau),
        &move |t, tau| tail_scale(k, t, tau),
        &move |t| arc_point(&arc_base, &arc_dirs, t),
        w_norm,
        cfg,
    )
}

/// Literal scan of an explicit schedule; rows are treated as successive
/// refinement levels.
pub fn scan_schedule(
    oracle: &DistanceOracle,
    coll: &DirectionCollection,
    w: &[f64],
    schedule: &RefinementSchedule,
    cfg: &MembershipConfig,
) -> MembershipVerdict {
    let k = coll.order();
    let base_norm = norm(coll.base());
    let mut rows = Vec::new();
    for (t, tau) in schedule.rows() {
        let p = tail_point(coll.base(), coll.directions(), w, t, tau);
        match oracle.distance(&p) {
            Ok(r) => {
                let scale = tail_scale(k, t, tau);
                rows.push(LevelRow {
                    t,
                    tau,
                    distance: r.value,
                    scaled: r.value / scale,
                    raw_floor: raw_floor(base_norm, dist(&p, coll.base())),
                });
            }
            Err(e) => return MembershipVerdict::inconclusive_error(to_evidence(&rows), e),
        }
    }
    let (status, decisive_level) = decide(&rows, cfg);
    MembershipVerdict {
        status,
        evidence: to_evidence(&rows),
        decisive_level,
        note: None,
    }
}

/// Admissibility chain: h1 against the first-order cone, each later h_s
/// against the order-s proper tangent set of its prefix.
pub fn is_admissible(
    oracle: &DistanceOracle,
    coll: &DirectionCollection,
    cfg: &MembershipConfig,
) -> Vec<MembershipVerdict> {
    let mut out = Vec::with_capacity(coll.directions().len());
    out.push(member_first_order(
        oracle,
        coll.base(),
        &coll.directions()[0],
        cfg,
    ));
    for s in 1..coll.directions().len() {
        let prefix = DirectionCollection::new(
            coll.base().to_vec(),
            coll.directions()[..s].to_vec(),
        );
        out.push(member_proper(oracle, &prefix, &coll.directions()[s], cfg));
    }
    out
}

/// Does the polynomial arc itself stay in Q along the refinement?
///
/// Accepts only when the raw arc distance sits at the on-set tolerance at
/// every level past warmup and at machine-zero scale on the terminal run;
/// rejects when the t^k-scaled distance stays above the floor without decay.
pub fn is_polynomially_admissible(
    oracle: &DistanceOracle,
    coll: &DirectionCollection,
    cfg: &MembershipConfig,
) -> MembershipVerdict {
    const ON_SET_TOL: f64 = 1e-9;
    const SLACK_TOL: f64 = 1e-6;
    let k = coll.order();
    let base_norm = norm(coll.base());
    let levels = cfg.t_levels(cfg.levels);
    let mut rows = Vec::with_capacity(levels.len());
    let mut mags = Vec::with_capacity(levels.len());
    for &t in &levels {
        let p = arc_point(coll.base(), coll.directions(), t);
        match oracle.distance(&p) {
            Ok(r) => {
                let scale = t.powi(k as i32);
                mags.push(1.0 + base_norm + dist(&p, coll.base()));
                rows.push(LevelRow {
                    t,
                    tau: t,
                    distance: r.value,
                    scaled: r.value / scale,
                    raw_floor: raw_floor(base_norm, dist(&p, coll.base())),
                });
            }
            Err(e) => return MembershipVerdict::inconclusive_error(to_evidence(&rows), e),
        }
    }
    let n = rows.len();
    let run = cfg.accept_run.max(1);
    let terminal_on_set = n >= run
        && rows[n - run..]
            .iter()
            .zip(&mags[n - run..])
            .all(|(r, m)| r.distance <= ON_SET_TOL * m);
    let never_off_set = rows
        .iter()
        .zip(&mags)
        .skip(cfg.warmup.min(n))
        .all(|(r, m)| r.distance <= SLACK_TOL * m);
    if terminal_on_set && never_off_set {
        return MembershipVerdict {
            status: VerdictStatus::Accepted,
            evidence: to_evidence(&rows),
            decisive_level: Some(n - run),
            note: None,
        };
    }
    let (status, decisive_level) = decide(&rows, cfg);
    let status = match status {
        VerdictStatus::Accepted => VerdictStatus::Inconclusive,
        other => other,
    };
    MembershipVerdict {
        status,
        evidence: to_evidence(&rows),
        decisive_level,
        note: None,
    }
}

/// Deterministic unit direction grid: equally spaced angles from 0 in the
/// plane, a Fibonacci sphere in R^3, seeded unit Gaussians above that.
/// Components within 1e-12 of zero are snapped so cardinal directions come
/// out exact.
pub fn sample_directions(n: usize, resolution: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(n >= 2, "direction grids need dimension >= 2");
    assert!(resolution >= 1);
    let snap = |mut v: Vec<f64>| -> Vec<f64> {
        for c in v.iter_mut() {
            if c.abs() <= 1e-12 {
                *c = 0.0;
            }
        }
        let nv = norm(&v);
        if nv > 0.0 {
            for c in v.iter_mut() {
                *c /= nv;
            }
        }
        v
    };
    match n {
        2 => (0..resolution)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                snap(vec![theta.cos(), theta.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..resolution)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / resolution as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    snap(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..resolution)
                .map(|_| {
                    loop {
                        let v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
                        if norm(&v) > 1e-6 {
                            return snap(v);
                        }
                    }
                })
                .collect()
        }
    }
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    // Box-Muller on open-interval uniforms
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Verdict per grid direction. `directions` carries the collection
/// (h1, ..., h_(k-1)); it must be empty exactly for first-order sampling.
pub fn sample_cone(
    oracle: &DistanceOracle,
    base: &[f64],
    directions: &[Vec<f64>],
    slice: SliceSpec,
    resolution: usize,
    cfg: &MembershipConfig,
) -> Vec<(Vec<f64>, MembershipVerdict)> {
    let grid = sample_directions(base.len(), resolution, cfg.sample_seed);
    match slice {
        SliceSpec::FirstOrder => {
            assert!(
                directions.is_empty(),
                "first-order sampling takes no collection directions"
            );
            grid.into_iter()
                .map(|h| {
                    let v = member_first_order(oracle, base, &h, cfg);
                    (h, v)
                })
                .collect()
        }
        _ => {
            let coll = DirectionCollection::new(base.to_vec(), directions.to_vec());
            grid.into_iter()
                .map(|w| {
                    let v = member_slice(oracle, &coll, &w, slice, cfg);
                    (w, v)
                })
                .collect()
        }
    }
}
