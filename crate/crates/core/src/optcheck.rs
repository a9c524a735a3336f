//! Necessary-condition checks for local minimality of f over Q.
//!
//! A collection (h1, ..., h_(k-1)) is eligible when every order-s
//! stationarity sum vanishes for s < k. For eligible collections the
//! order-k condition value must be nonnegative over the proper tangent set
//! and the gradient pairing must be nonnegative over the asymptotic cone.
//! Both tangent sets are sampled numerically, so a clean pass reads
//! "no violation found at this resolution", never "is a local minimizer";
//! a violation with an Accepted membership is a disqualification
//! certificate.

use crate::cones::{
    self, fmt17, DirectionCollection, MembershipConfig, SliceSpec, VerdictStatus,
};
use crate::expr::{DomainError, Expr};
use crate::jets::{self, Arc};
use crate::setmodels::DistanceOracle;
use crate::taylor;

#[derive(Debug, Clone)]
pub struct OptimalityConfig {
    pub resolution: usize,
    /// Residual gate, relative to 1 + |f(base)| + sum of direction norms.
    pub stationarity_tol: f64,
    /// Violation gate on condition values, same relative scale.
    pub violation_tol: f64,
    /// Ball radius quoted in reports; minimality claims are local to it.
    pub locality_radius: f64,
    /// Cap on proper-tangent extensions per order in the candidate search.
    pub max_extensions: usize,
    pub membership: MembershipConfig,
}

impl Default for OptimalityConfig {
    fn default() -> Self {
        OptimalityConfig {
            resolution: 16,
            stationarity_tol: 1e-8,
            violation_tol: 1e-8,
            locality_radius: 0.05,
            max_extensions: 6,
            membership: MembershipConfig::default(),
        }
    }
}

/// Witness that disqualifies the base point: an accepted tangent direction
/// whose condition value is decisively negative.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub w: Vec<f64>,
    pub slice: SliceSpec,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub enum CheckStatus {
    Violated(Certificate),
    Consistent,
    Inconclusive,
    /// The stationarity hypothesis failed, so the order-k conditions do not
    /// apply to this collection.
    NotApplicable,
}

impl CheckStatus {
    pub fn is_violated(&self) -> bool {
        matches!(self, CheckStatus::Violated(_))
    }
}

/// One sampled direction with its membership verdict and, when membership
/// was accepted, the condition value that applies to it.
#[derive(Debug, Clone)]
pub struct WCheck {
    pub w: Vec<f64>,
    pub verdict: VerdictStatus,
    pub value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimalityReport {
    pub order: usize,
    pub base: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub stationarity_residuals: Vec<f64>,
    pub proper_checks: Vec<WCheck>,
    pub asymptotic_checks: Vec<WCheck>,
    pub status: CheckStatus,
    pub locality_radius: f64,
}

#[derive(Debug, Clone)]
pub struct FirstOrderReport {
    pub base: Vec<f64>,
    pub checks: Vec<WCheck>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone)]
pub struct DisqualifyOutcome {
    pub first_order: FirstOrderReport,
    pub reports: Vec<OptimalityReport>,
}

impl DisqualifyOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        if let CheckStatus::Violated(c) = &self.first_order.status {
            return Some(c);
        }
        self.reports.iter().find_map(|r| match &r.status {
            CheckStatus::Violated(c) => Some(c),
            _ => None,
        })
    }

    pub fn any_consistent(&self) -> bool {
        matches!(self.first_order.status, CheckStatus::Consistent)
            || self
                .reports
                .iter()
                .any(|r| matches!(r.status, CheckStatus::Consistent))
    }
}

fn scale_factor(f: &Expr, base: &[f64], directions: &[Vec<f64>]) -> Result<f64, DomainError> {
    let fx = f.eval(base)?;
    let dir_norms: f64 = directions
        .iter()
        .map(|h| crate::setmodels::norm(h))
        .sum();
    Ok(1.0 + fx.abs() + dir_norms)
}

/// Residual vector of the order-s stationarity sums, s = 1..k-1, read off a
/// single arc jet.
pub fn stationarity_residuals(
    f: &Expr,
    coll: &DirectionCollection,
) -> Result<Vec<f64>, DomainError> {
    let k = coll.order();
    let arc = Arc::new(coll.base().to_vec(), coll.directions().to_vec());
    let jet = jets::eval_on_arc(f, &arc, k - 1)?;
    Ok((1..k).map(|s| jet.coeff(s)).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Check the order-k conditions for one collection against sampled proper
/// and asymptotic tangent directions.
pub fn check_collection(
    f: &Expr,
    oracle: &DistanceOracle,
    coll: &DirectionCollection,
    cfg: &OptimalityConfig,
) -> OptimalityReport {
    let k = coll.order();
    let base = coll.base().to_vec();
    let dirs = coll.directions().to_vec();
    let radius = cfg.locality_radius;

    let inconclusive = |residuals: Vec<f64>| OptimalityReport {
        order: k,
        base: base.clone(),
        directions: dirs.clone(),
        stationarity_residuals: residuals,
        proper_checks: Vec::new(),
        asymptotic_checks: Vec::new(),
        status: CheckStatus::Inconclusive,
        locality_radius: radius,
    };

    let scale = match scale_factor(f, &base, &dirs) {
        Ok(s) => s,
        Err(_) => return inconclusive(Vec::new()),
    };
    let residuals = match stationarity_residuals(f, coll) {
        Ok(r) => r,
        Err(_) => return inconclusive(Vec::new()),
    };
    if residuals.iter().any(|r| r.abs() > cfg.stationarity_tol * scale) {
        return OptimalityReport {
            order: k,
            base,
            directions: dirs,
            stationarity_residuals: residuals,
            proper_checks: Vec::new(),
            asymptotic_checks: Vec::new(),
            status: CheckStatus::NotApplicable,
            locality_radius: radius,
        };
    }

    let grad = match jets::gradient(f, &base) {
        Ok(g) => g,
        Err(_) => return inconclusive(residuals),
    };

    let mut sample = cones::sample_directions(base.len(), cfg.resolution, cfg.membership.sample_seed);
    sample.push(vec![0.0; base.len()]);

    let mut proper_checks = Vec::with_capacity(sample.len());
    for w in &sample {
        let verdict = cones::member_proper(oracle, coll, w, &cfg.membership);
        let value = if verdict.status == VerdictStatus::Accepted {
            taylor::sum_order_k(f, &base, &dirs, w).ok()
        } else {
            None
        };
        proper_checks.push(WCheck {
            w: w.clone(),
            verdict: verdict.status,
            value,
        });
    }

    let mut asymptotic_checks = Vec::with_capacity(sample.len());
    for w in sample.iter().filter(|w| crate::setmodels::norm(w) > 0.0) {
        let verdict = cones::member_slice(oracle, coll, w, SliceSpec::Infinity, &cfg.membership);
        let value = if verdict.status == VerdictStatus::Accepted {
            Some(dot(&grad, w))
        } else {
            None
        };
        asymptotic_checks.push(WCheck {
            w: w.clone(),
            verdict: verdict.status,
            value,
        });
    }

    // strongest violation wins; ties keep the earliest grid direction
    let mut cert: Option<Certificate> = None;
    let mut consider = |w: &[f64], slice: SliceSpec, value: f64| {
        if value < -cfg.violation_tol * scale
            && cert.as_ref().map_or(true, |c| value < c.value)
        {
            cert = Some(Certificate {
                w: w.to_vec(),
                slice,
                value,
            });
        }
    };
    for c in &proper_checks {
        if let Some(v) = c.value {
            consider(&c.w, SliceSpec::Proper, v);
        }
    }
    for c in &asymptotic_checks {
        if let Some(v) = c.value {
            consider(&c.w, SliceSpec::Infinity, v);
        }
    }
    if let Some(c) = cert {
        return OptimalityReport {
            order: k,
            base,
            directions: dirs,
            stationarity_residuals: residuals,
            proper_checks,
            asymptotic_checks,
            status: CheckStatus::Violated(c),
            locality_radius: radius,
        };
    }

    // the order-k conditions carry weight only if the extended cone is
    // nonempty; any accepted membership settles that, otherwise scan for one
    let any_accepted = proper_checks
        .iter()
        .chain(&asymptotic_checks)
        .any(|c| c.verdict == VerdictStatus::Accepted);
    let nonempty = any_accepted
        || sample.iter().any(|w| {
            cones::member_slice(oracle, coll, w, SliceSpec::Extended, &cfg.membership).status
                == VerdictStatus::Accepted
        });
    let status = if nonempty {
        CheckStatus::Consistent
    } else {
        CheckStatus::Inconclusive
    };
    OptimalityReport {
        order: k,
        base,
        directions: dirs,
        stationarity_residuals: residuals,
        proper_checks,
        asymptotic_checks,
        status,
        locality_radius: radius,
    }
}

/// First-order check: the gradient pairing must be nonnegative on every
/// accepted tangent direction.
pub fn check_first_order(
    f: &Expr,
    oracle: &DistanceOracle,
    base: &[f64],
    cfg: &OptimalityConfig,
) -> FirstOrderReport {
    let scale = match scale_factor(f, base, &[]) {
        Ok(s) => s,
        Err(_) => {
            return FirstOrderReport {
                base: base.to_vec(),
                checks: Vec::new(),
                status: CheckStatus::Inconclusive,
            }
        }
    };
    let grad = match jets::gradient(f, base) {
        Ok(g) => g,
        Err(_) => {
            return FirstOrderReport {
                base: base.to_vec(),
                checks: Vec::new(),
                status: CheckStatus::Inconclusive,
            }
        }
    };
    let sample = cones::sample_directions(base.len(), cfg.resolution, cfg.membership.sample_seed);
    let mut checks = Vec::with_capacity(sample.len());
    for h in &sample {
        let verdict = cones::member_first_order(oracle, base, h, &cfg.membership);
        let value = if verdict.status == VerdictStatus::Accepted {
            Some(dot(&grad, h))
        } else {
            None
        };
        checks.push(WCheck {
            w: h.clone(),
            verdict: verdict.status,
            value,
        });
    }
    let mut cert: Option<Certificate> = None;
    for c in &checks {
        if let Some(v) = c.value {
            if v < -cfg.violation_tol * scale && cert.as_ref().map_or(true, |b| v < b.value) {
                cert = Some(Certificate {
                    w: c.w.clone(),
                    slice: SliceSpec::FirstOrder,
                    value: v,
                });
            }
        }
    }
    let status = match cert {
        Some(c) => CheckStatus::Violated(c),
        None => {
            if checks.iter().any(|c| c.verdict == VerdictStatus::Accepted) {
                CheckStatus::Consistent
            } else {
                CheckStatus::Inconclusive
            }
        }
    };
    FirstOrderReport {
        base: base.to_vec(),
        checks,
        status,
    }
}

/// Search for a disqualification certificate: first-order conditions, then
/// collections grown from stationary tangent directions up to `max_order`.
/// Branches with an empty sampled proper tangent set are not extended;
/// emptiness at one order cannot be undone by appending directions.
pub fn disqualify(
    f: &Expr,
    oracle: &DistanceOracle,
    base: &[f64],
    max_order: usize,
    cfg: &OptimalityConfig,
) -> DisqualifyOutcome {
    assert!(
        (2..=6).contains(&max_order),
        "max order must lie in 2..=6"
    );
    let first_order = check_first_order(f, oracle, base, cfg);
    if first_order.status.is_violated() {
        return DisqualifyOutcome {
            first_order,
            reports: Vec::new(),
        };
    }

    let mut reports = Vec::new();
    let scale = scale_factor(f, base, &[]).unwrap_or(1.0);
    let grad = jets::gradient(f, base).unwrap_or_else(|_| vec![0.0; base.len()]);

    // stationary first-order-accepted directions seed the order-2 frontier
    let seeds: Vec<Vec<f64>> = first_order
        .checks
        .iter()
        .filter(|c| {
            c.verdict == VerdictStatus::Accepted
                && dot(&grad, &c.w).abs() <= cfg.stationarity_tol * scale
        })
        .map(|c| c.w.clone())
        .collect();

    let mut frontier: Vec<Vec<Vec<f64>>> = seeds.into_iter().map(|h| vec![h]).collect();
    for _order in 2..=max_order {
        let mut next_frontier = Vec::new();
        for dirs in &frontier {
            let coll = DirectionCollection::new(base.to_vec(), dirs.clone());
            let report = check_collection(f, oracle, &coll, cfg);
            let violated = report.status.is_violated();
            let mut extensions: Vec<Vec<f64>> = report
                .proper_checks
                .iter()
                .filter(|c| c.verdict == VerdictStatus::Accepted)
                .map(|c| c.w.clone())
                .collect();
            reports.push(report);
            if violated {
                return DisqualifyOutcome {
                    first_order,
                    reports,
                };
            }
            if !extensions.is_empty() {
                let zero = vec![0.0; base.len()];
                if !extensions.contains(&zero) {
                    extensions.push(zero);
                }
                extensions.truncate(cfg.max_extensions);
                for w in extensions {
                    let mut grown = dirs.clone();
                    grown.push(w);
                    next_frontier.push(grown);
                }
            }
        }
        frontier = next_frontier;
        if frontier.is_empty() {
            break;
        }
    }
    DisqualifyOutcome {
        first_order,
        reports,
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let inner: Vec<String> = v.iter().map(|c| fmt17(*c)).collect();
    format!("({})", inner.join(", "))
}

fn verdict_name(v: VerdictStatus) -> &'static str {
    match v {
        VerdictStatus::Accepted => "Accepted",
        VerdictStatus::Rejected => "Rejected",
        VerdictStatus::Inconclusive => "Inconclusive",
    }
}

fn slice_name(s: SliceSpec) -> String {
    match s {
        SliceSpec::FirstOrder => "first-order".into(),
        SliceSpec::Proper => "proper".into(),
        SliceSpec::Alpha(a) => format!("alpha:{a}"),
        SliceSpec::Zero => "zero".into(),
        SliceSpec::Infinity => "infinity".into(),
        SliceSpec::Extended => "extended".into(),
    }
}

impl OptimalityReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "order {} collection at {} with directions [{}]\n",
            self.order,
            fmt_vec(&self.base),
            self.directions
                .iter()
                .map(|d| fmt_vec(d))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!(
            "stationarity residuals: [{}]\n",
            self.stationarity_residuals
                .iter()
                .map(|r| fmt17(*r))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        match &self.status {
            CheckStatus::Violated(c) => out.push_str(&format!(
                "status: VIOLATED  certificate w = {} in {} cone, condition value {}\n",
                fmt_vec(&c.w),
                slice_name(c.slice),
                fmt17(c.value)
            )),
            CheckStatus::Consistent => out.push_str(
                "status: consistent (no violation found at this sampling resolution)\n",
            ),
            CheckStatus::Inconclusive => out.push_str("status: inconclusive\n"),
            CheckStatus::NotApplicable => out.push_str(
                "status: not applicable (stationarity hypothesis fails for this collection)\n",
            ),
        }
        out.push_str(&format!(
            "locality radius: {}\n",
            fmt17(self.locality_radius)
        ));
        out
    }

    /// One row per checked direction:
    /// order,slice,w components...,membership,value
    pub fn to_csv(&self) -> String {
        let n = self.base.len();
        let mut out = String::from("order,slice,");
        for i in 1..=n {
            out.push_str(&format!("w{i},"));
        }
        out.push_str("membership,value\n");
        let mut push_row = |slice: &str, c: &WCheck| {
            out.push_str(&format!("{},{slice},", self.order));
            for wi in &c.w {
                out.push_str(&fmt17(*wi));
                out.push(',');
            }
            out.push_str(verdict_name(c.verdict));
            out.push(',');
            match c.value {
                Some(v) => out.push_str(&fmt17(v)),
                None => out.push_str(""),
            }
            out.push('\n');
        };
        for c in &self.proper_checks {
            push_row("proper", c);
        }
        for c in &self.asymptotic_checks {
            push_row("infinity", c);
        }
        out
    }
}

impl FirstOrderReport {
    pub fn render_text(&self) -> String {
        let mut out = String::from("first-order tangent check\n");
        match &self.status {
            CheckStatus::Violated(c) => out.push_str(&format!(
                "status: VIOLATED  certificate h = {} with f'(base)h = {}\n",
                fmt_vec(&c.w),
                fmt17(c.value)
            )),
            CheckStatus::Consistent => out.push_str(
                "status: consistent (no violation found at this sampling resolution)\n",
            ),
            CheckStatus::Inconclusive => out.push_str("status: inconclusive\n"),
            CheckStatus::NotApplicable => out.push_str("status: not applicable\n"),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchsets;
    use crate::expr::{default_variables, parse};
    use crate::setmodels::{DistanceOracle, SetDesc};
    use approx::assert_relative_eq;

    fn vars() -> Vec<String> {
        default_variables(2)
    }

    #[test]
    fn residuals_frozen_values() {
        let f = parse("-x1 + x2^3", &vars()).unwrap();
        let coll = DirectionCollection::new(vec![0.0, 0.0], vec![vec![0.0, 1.0]]);
        let r = stationarity_residuals(&f, &coll).unwrap();
        assert_eq!(r, vec![0.0]);

        let f = parse("x1", &vars()).unwrap();
        let coll = DirectionCollection::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]);
        assert_eq!(stationarity_residuals(&f, &coll).unwrap(), vec![1.0]);

        let f = parse("x2", &vars()).unwrap();
        let coll = DirectionCollection::new(
            vec![0.0, 0.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        );
        assert_eq!(stationarity_residuals(&f, &coll).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn cusp_objective_is_disqualified_at_order_two() {
        let p = benchsets::cusp();
        let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());
        let f = parse("-x1 + x2^3", &vars()).unwrap();
        let cfg = OptimalityConfig {
            membership: p.membership_cfg(),
            ..OptimalityConfig::default()
        };
        let coll = DirectionCollection::new(p.base.clone(), vec![vec![0.0, 1.0]]);
        let report = check_collection(&f, &oracle, &coll, &cfg);
        match &report.status {
            CheckStatus::Violated(c) => {
                assert_eq!(c.w, vec![1.0, 0.0]);
                assert_relative_eq!(c.value, -1.0, epsilon = 1e-9);
                assert_eq!(c.slice, SliceSpec::Infinity);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn unconstrained_minimum_is_consistent() {
        let q = SetDesc::implicit(2, vec![], vec![], None).unwrap();
        let oracle = DistanceOracle::new(&q, Default::default());
        let f = parse("x1^2 + x2^2", &vars()).unwrap();
        let cfg = OptimalityConfig::default();
        let coll = DirectionCollection::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]);
        let report = check_collection(&f, &oracle, &coll, &cfg);
        assert!(
            matches!(report.status, CheckStatus::Consistent),
            "{:?}",
            report.status
        );
        let zero_check = report
            .proper_checks
            .iter()
            .find(|c| c.w == vec![0.0, 0.0])
            .unwrap();
        assert_eq!(zero_check.verdict, VerdictStatus::Accepted);
        assert_relative_eq!(zero_check.value.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn nonstationary_collection_is_not_applicable() {
        let p = benchsets::cusp();
        let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());
        let f = parse("x2", &vars()).unwrap();
        let cfg = OptimalityConfig {
            membership: p.membership_cfg(),
            ..OptimalityConfig::default()
        };
        let coll = DirectionCollection::new(p.base.clone(), vec![vec![0.0, 1.0]]);
        let report = check_collection(&f, &oracle, &coll, &cfg);
        assert!(matches!(report.status, CheckStatus::NotApplicable));
        assert_relative_eq!(report.stationarity_residuals[0], 1.0);
    }

    #[test]
    fn first_order_checks() {
        let p = benchsets::cusp();
        let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());
        let cfg = OptimalityConfig {
            membership: p.membership_cfg(),
            ..OptimalityConfig::default()
        };

        let f = parse("-x1 + x2^3", &vars()).unwrap();
        let r = check_first_order(&f, &oracle, &p.base, &cfg);
        assert!(matches!(r.status, CheckStatus::Consistent), "{:?}", r.status);

        let f = parse("-x2", &vars()).unwrap();
        let r = check_first_order(&f, &oracle, &p.base, &cfg);
        match &r.status {
            CheckStatus::Violated(c) => {
                assert_eq!(c.w, vec![0.0, 1.0]);
                assert_relative_eq!(c.value, -1.0, epsilon = 1e-12);
            }
            other => panic!("expected first-order violation, got {other:?}"),
        }

        let hp = benchsets::half_plane();
        let oracle = DistanceOracle::new(&hp.set, hp.distance_cfg.clone());
        let cfg = OptimalityConfig {
            membership: hp.membership_cfg(),
            ..OptimalityConfig::default()
        };
        let f = parse("x1", &vars()).unwrap();
        let r = check_first_order(&f, &oracle, &hp.base, &cfg);
        assert!(matches!(r.status, CheckStatus::Consistent), "{:?}", r.status);
    }

    #[test]
    fn disqualify_outcomes() {
        let p = benchsets::cusp();
        let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());
        let f = parse("-x1 + x2^3", &vars()).unwrap();
        let cfg = OptimalityConfig {
            membership: p.membership_cfg(),
            ..OptimalityConfig::default()
        };
        let out = disqualify(&f, &oracle, &p.base, 2, &cfg);
        let cert = out.certificate().expect("expected a certificate");
        assert_eq!(cert.w, vec![1.0, 0.0]);
        assert_relative_eq!(cert.value, -1.0, epsilon = 1e-9);

        // x2 over the parabola is globally minimal at the origin
        let pb = benchsets::parabola();
        let oracle = DistanceOracle::new(&pb.set, pb.distance_cfg.clone());
        let f = parse("x2", &vars()).unwrap();
        let cfg = OptimalityConfig {
            membership: pb.membership_cfg(),
            ..OptimalityConfig::default()
        };
        let out = disqualify(&f, &oracle, &pb.base, 3, &cfg);
        assert!(out.certificate().is_none());

        // a constant objective never violates anything
        let f = parse("2", &vars()).unwrap();
        let out = disqualify(&f, &oracle, &pb.base, 2, &cfg);
        assert!(out.certificate().is_none());
    }
}
