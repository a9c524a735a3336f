//! Set descriptions and the distance oracle d(x, Q).
//!
//! Every membership estimator reduces to distance queries, so this module is
//! the numerical foundation: exact minima over point clouds, dense-grid plus
//! golden-section projection for parametric curves, and multistart penalty
//! descent with a feasibility polish for implicit sets. Curve oracles cache
//! their sample table, which makes repeated queries against the same set
//! cheap.

use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::{DomainError, Expr};
use crate::jets;

/// Description of a closed subset of R^n.
#[derive(Debug, Clone)]
pub enum SetDesc {
    /// {x : eq_i(x) = 0, g_j(x) <= 0}, searched inside `bounding_box`.
    Implicit {
        equalities: Vec<Expr>,
        inequalities: Vec<Expr>,
        bounding_box: Vec<[f64; 2]>,
    },
    /// Image of `components` over the parameter interval `domain`.
    ParametricCurve {
        components: Vec<Expr>,
        domain: [f64; 2],
    },
    PointCloud { points: Vec<Vec<f64>> },
    Union { members: Vec<SetDesc> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("set must be nonempty")]
    Empty,
    #[error("invalid domain or bounding box")]
    BadDomain,
}

impl SetDesc {
    pub fn implicit(
        dim: usize,
        equalities: Vec<Expr>,
        inequalities: Vec<Expr>,
        bounding_box: Option<Vec<[f64; 2]>>,
    ) -> Result<SetDesc, SetError> {
        let bounding_box =
            bounding_box.unwrap_or_else(|| vec![[-10.0, 10.0]; dim]);
        if bounding_box.len() != dim {
            return Err(SetError::DimensionMismatch(
                "bounding box must have one interval per coordinate".into(),
            ));
        }
        if bounding_box.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(SetError::BadDomain);
        }
        for e in equalities.iter().chain(&inequalities) {
            if e.arity() != dim {
                return Err(SetError::DimensionMismatch(
                    "constraint arity must equal the set dimension".into(),
                ));
            }
        }
        Ok(SetDesc::Implicit {
            equalities,
            inequalities,
            bounding_box,
        })
    }

    pub fn parametric(components: Vec<Expr>, domain: [f64; 2]) -> Result<SetDesc, SetError> {
        if components.is_empty() {
            return Err(SetError::Empty);
        }
        if !(domain[0] < domain[1]) {
            return Err(SetError::BadDomain);
        }
        for c in &components {
            if c.arity() != 1 {
                return Err(SetError::DimensionMismatch(
                    "curve components take exactly one parameter".into(),
                ));
            }
        }
        Ok(SetDesc::ParametricCurve { components, domain })
    }

    pub fn point_cloud(points: Vec<Vec<f64>>) -> Result<SetDesc, SetError> {
        let n = match points.first() {
            Some(p) => p.len(),
            None => return Err(SetError::Empty),
        };
        if points.iter().any(|p| p.len() != n) {
            return Err(SetError::DimensionMismatch(
                "all points must share a dimension".into(),
            ));
        }
        Ok(SetDesc::PointCloud { points })
    }

    pub fn union(members: Vec<SetDesc>) -> Result<SetDesc, SetError> {
        let n = match members.first() {
            Some(m) => m.dim(),
            None => return Err(SetError::Empty),
        };
        if members.iter().any(|m| m.dim() != n) {
            return Err(SetError::DimensionMismatch(
                "union members must share a dimension".into(),
            ));
        }
        Ok(SetDesc::Union { members })
    }

    pub fn dim(&self) -> usize {
        match self {
            SetDesc::Implicit { bounding_box, .. } => bounding_box.len(),
            SetDesc::ParametricCurve { components, .. } => components.len(),
            SetDesc::PointCloud { points } => points[0].len(),
            SetDesc::Union { members } => members[0].dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistanceConfig {
    /// Dense parameter grid size for curve projection.
    pub grid_points: usize,
    /// Extra relative slack on curve refinement, 0 = refine to machine
    /// precision. Deep membership scans divide distances by tiny powers of
    /// t, so the projection must resolve far below the bracket width.
    pub refine_tol: f64,
    /// Multistart seed count for implicit sets.
    pub starts: usize,
    /// "On the set" threshold for feasibility.
    pub feasibility_tol: f64,
    /// Penalty continuation ladder.
    pub penalty_rhos: Vec<f64>,
    pub descent_iters: usize,
    pub polish_iters: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            grid_points: 4096,
            refine_tol: 0.0,
            starts: 16,
            feasibility_tol: 1e-10,
            penalty_rhos: vec![1e2, 1e4, 1e6, 1e8],
            descent_iters: 60,
            polish_iters: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMethod {
    PointCloud,
    CurveProjection,
    PenaltyProjection,
    UnionMin,
}

#[derive(Debug, Clone)]
pub struct DistanceResult {
    pub value: f64,
    pub nearest: Vec<f64>,
    pub method: DistanceMethod,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    /// Implicit search exhausted every start without reaching feasibility.
    /// Distinct from a legitimately large distance.
    #[error("oracle failure: no feasible point found within tolerance {tol:e}")]
    NoFeasiblePoint { tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Golden-section minimization of a unimodal function on [a, b].
///
/// Stops when the bracket shrinks to `tol`, to the floating-point floor of
/// the bracket position, or to `value_stop` times the best value seen; the
/// last keeps probes cheap away from minima while letting near-zero minima
/// refine all the way down. Returns the best sampled (argument, value).
pub(crate) fn golden_min<F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    value_stop: f64,
    max_iter: usize,
) -> Result<(f64, f64), OracleError>
where
    F: FnMut(f64) -> Result<f64, OracleError>,
{
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    const INVPHI2: f64 = 1.0 - INVPHI;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut h = b - a;
    let floor = |a: f64, b: f64, best: f64| {
        tol + 4.0 * f64::EPSILON * (a.abs() + b.abs()) + value_stop * best
    };
    if h <= floor(a, b, 0.0) {
        let m = 0.5 * (a + b);
        return Ok((m, f(m)?));
    }
    // both probes are re-evaluated every iteration: inheriting values the
    // classic way lets rounding drift steer the bracket once it shrinks
    // within a few hundred ulps of the minimizer
    let mut c = a + INVPHI2 * h;
    let mut d = a + INVPHI * h;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..max_iter {
        if h <= floor(a, b, fc.min(fd)) {
            break;
        }
        if fc < fd {
            b = d;
        } else {
            a = c;
        }
        h = b - a;
        c = a + INVPHI2 * h;
        d = a + INVPHI * h;
        fc = f(c)?;
        fd = f(d)?;
    }
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let mut best = (m, fm);
    if fc < best.1 {
        best = (c, fc);
    }
    if fd < best.1 {
        best = (d, fd);
    }
    Ok(best)
}

/// Indices of local minima of a sampled sequence, endpoints included.
fn local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || values[i] <= values[i - 1];
        let right_ok = i + 1 == n || values[i] <= values[i + 1];
        if left_ok && right_ok {
            out.push(i);
        }
    }
    out
}

struct CurveTable {
    params: Vec<f64>,
    points: Vec<Vec<f64>>,
}

/// Distance oracle bound to a set description. Construction is cheap; curve
/// sample tables are built lazily on first query and reused afterwards.
pub struct DistanceOracle<'a> {
    set: &'a SetDesc,
    cfg: DistanceConfig,
    table: OnceLock<CurveTable>,
    children: Vec<DistanceOracle<'a>>,
}

impl<'a> DistanceOracle<'a> {
    pub fn new(set: &'a SetDesc, cfg: DistanceConfig) -> Self {
        let children = match set {
            SetDesc::Union { members } => members
                .iter()
                .map(|m| DistanceOracle::new(m, cfg.clone()))
                .collect(),
            _ => Vec::new(),
        };
        DistanceOracle {
            set,
            cfg,
            table: OnceLock::new(),
            children,
        }
    }

    pub fn set(&self) -> &SetDesc {
        self.set
    }

    pub fn cfg(&self) -> &DistanceConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn distance(&self, x: &[f64]) -> Result<DistanceResult, OracleError> {
        if x.len() != self.set.dim() {
            return Err(OracleError::DimensionMismatch {
                expected: self.set.dim(),
                got: x.len(),
            });
        }
        match self.set {
            SetDesc::PointCloud { points } => {
                let mut best = 0usize;
                let mut best_d = dist(x, &points[0]);
                for (i, p) in points.iter().enumerate().skip(1) {
                    let d = dist(x, p);
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                Ok(DistanceResult {
                    value: best_d,
                    nearest: points[best].clone(),
                    method: DistanceMethod::PointCloud,
                })
            }
            SetDesc::ParametricCurve { components, domain } => {
                self.curve_distance(components, *domain, x)
            }
            SetDesc::Implicit {
                equalities,
                inequalities,
                bounding_box,
            } => self.implicit_distance(equalities, inequalities, bounding_box, x),
            SetDesc::Union { .. } => {
                let mut best: Option<DistanceResult> = None;
                for child in &self.children {
                    let r = child.distance(x)?;
                    if best.as_ref().map_or(true, |b| r.value < b.value) {
                        best = Some(r);
                    }
                }
                let mut r = best.expect("union is nonempty by construction");
                r.method = DistanceMethod::UnionMin;
                Ok(r)
            }
        }
    }

    /// True when x lies within `tol` of the set.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, OracleError> {
        assert!(tol > 0.0, "tolerance must be positive");
        Ok(self.distance(x)?.value <= tol)
    }

    fn curve_point(components: &[Expr], s: f64) -> Result<Vec<f64>, OracleError> {
        components
            .iter()
            .map(|c| c.eval(&[s]).map_err(OracleError::from))
            .collect()
    }

    fn curve_table(
        &self,
        components: &[Expr],
        domain: [f64; 2],
    ) -> Result<&CurveTable, OracleError> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let g = self.cfg.grid_points.max(2);
        let mut params = Vec::with_capacity(g);
        let mut points = Vec::with_capacity(g);
        for i in 0..g {
            let s = domain[0] + (domain[1] - domain[0]) * i as f64 / (g - 1) as f64;
            params.push(s);
            points.push(Self::curve_point(components, s)?);
        }
        let _ = self.table.set(CurveTable { params, points });
        Ok(self.table.get().unwrap())
    }

    fn curve_distance(
        &self,
        components: &[Expr],
        domain: [f64; 2],
        x: &[f64],
    ) -> Result<DistanceResult, OracleError> {
        let table = self.curve_table(components, domain)?;
        let values: Vec<f64> = table.points.iter().map(|p| dist(x, p)).collect();
        let mut minima = local_minima(&values);
        // keep refinement bounded on degenerate profiles; the value-relative
        // stop makes non-competitive brackets cheap anyway
        if minima.len() > 8 {
            minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
            minima.truncate(8);
            minima.sort_unstable();
        }
        let mut best_s = table.params[0];
        let mut best_d = f64::INFINITY;
        for &i in &minima {
            let lo = table.params[i.saturating_sub(1)];
            let hi = table.params[(i + 1).min(table.params.len() - 1)];
            let tol = self.cfg.refine_tol * (lo.abs() + hi.abs() + f64::MIN_POSITIVE);
            let (s, d) = golden_min(
                |s| Ok(dist(x, &Self::curve_point(components, s)?)),
                lo,
                hi,
                tol,
                1e-4,
                220,
            )?;
            // never worse than the raw table sample
            let (s, d) = if values[i] < d {
                (table.params[i], values[i])
            } else {
                (s, d)
            };
            if d < best_d {
                best_d = d;
                best_s = s;
            }
        }
        Ok(DistanceResult {
            value: best_d,
            nearest: Self::curve_point(components, best_s)?,
            method: DistanceMethod::CurveProjection,
        })
    }

    // Implicit machinery: squared constraint violation, its gradient, one
    // penalty descent per continuation stage, then a Gauss-Newton polish
    // back onto the constraint manifold.

    fn violation_sq(
        equalities: &[Expr],
        inequalities: &[Expr],
        y: &[f64],
    ) -> Result<f64, DomainError> {
        let mut v = 0.0;
        for e in equalities {
            let r = e.eval(y)?;
            v += r * r;
        }
        for g in inequalities {
            let r = g.eval(y)?.max(0.0);
            v += r * r;
        }
        Ok(v)
    }

    fn implicit_distance(
        &self,
        equalities: &[Expr],
        inequalities: &[Expr],
        bounding_box: &[[f64; 2]],
        x: &[f64],
    ) -> Result<DistanceResult, OracleError> {
        let n = x.len();
        let feas_tol = self.cfg.feasibility_tol;
        // fast path only for points on the set to working precision; the
        // reporting tolerance would blind deep scans to genuinely
        // infeasible nearby points, and so would any absolute floor
        let v0 = Self::violation_sq(equalities, inequalities, x)?;
        if v0.sqrt() <= 64.0 * f64::EPSILON * norm(x) {
            return Ok(DistanceResult {
                value: 0.0,
                nearest: x.to_vec(),
                method: DistanceMethod::PenaltyProjection,
            });
        }

        let clamp_to_box = |p: &[f64]| -> Vec<f64> {
            p.iter()
                .zip(bounding_box)
                .map(|(v, [lo, hi])| v.clamp(*lo, *hi))
                .collect()
        };

        let mut best: Option<(f64, Vec<f64>)> = None;
        let starts = self.cfg.starts.max(1);
        for si in 0..starts {
            let mut y = match si {
                0 => clamp_to_box(x),
                1 => bounding_box
                    .iter()
                    .map(|[lo, hi]| 0.5 * (lo + hi))
                    .collect(),
                _ => (0..n)
                    .map(|d| {
                        let u = halton(si as u64 - 1, PRIMES[d % PRIMES.len()]);
                        bounding_box[d][0] + u * (bounding_box[d][1] - bounding_box[d][0])
                    })
                    .collect(),
            };
            // direct projection of the start is a candidate in its own
            // right; the penalty stages then try to do better
            if let Some(p) = self.feasibility_polish(equalities, inequalities, y.clone()) {
                let p = self.tangential_refine(equalities, inequalities, x, p);
                let d = dist(x, &p);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, p));
                }
            }
            for &rho in &self.cfg.penalty_rhos {
                y = self.penalty_descent(equalities, inequalities, x, y, rho);
            }
            if let Some(p) = self.feasibility_polish(equalities, inequalities, y) {
                let p = self.tangential_refine(equalities, inequalities, x, p);
                let d = dist(x, &p);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, p));
                }
            }
        }
        match best {
            Some((value, nearest)) => Ok(DistanceResult {
                value,
                nearest,
                method: DistanceMethod::PenaltyProjection,
            }),
            None => Err(OracleError::NoFeasiblePoint { tol: feas_tol }),
        }
    }

    fn penalty_objective(
        equalities: &[Expr],
        inequalities: &[Expr],
        x: &[f64],
        y: &[f64],
        rho: f64,
    ) -> Option<f64> {
        let v = Self::violation_sq(equalities, inequalities, y).ok()?;
        Some(dist(x, y).powi(2) + rho * v)
    }

    fn penalty_gradient(
        equalities: &[Expr],
        inequalities: &[Expr],
        x: &[f64],
        y: &[f64],
        rho: f64,
    ) -> Option<Vec<f64>> {
        let mut g: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| 2.0 * (yi - xi)).collect();
        for e in equalities {
            let r = e.eval(y).ok()?;
            let ge = jets::gradient(e, y).ok()?;
            for (gi, gei) in g.iter_mut().zip(&ge) {
                *gi += 2.0 * rho * r * gei;
            }
        }
        for c in inequalities {
            let r = c.eval(y).ok()?;
            if r > 0.0 {
                let gc = jets::gradient(c, y).ok()?;
                for (gi, gci) in g.iter_mut().zip(&gc) {
                    *gi += 2.0 * rho * r * gci;
                }
            }
        }
        Some(g)
    }

    fn penalty_descent(
        &self,
        equalities: &[Expr],
        inequalities: &[Expr],
        x: &[f64],
        mut y: Vec<f64>,
        rho: f64,
    ) -> Vec<f64> {
        let mut fy = match Self::penalty_objective(equalities, inequalities, x, &y, rho) {
            Some(v) => v,
            None => return y,
        };
        let mut step: Option<f64> = None;
        for _ in 0..self.cfg.descent_iters {
            let g = match Self::penalty_gradient(equalities, inequalities, x, &y, rho) {
                Some(g) => g,
                None => break,
            };
            let gn2: f64 = g.iter().map(|v| v * v).sum();
            if gn2 <= 1e-28 * (1.0 + fy.abs()) {
                break;
            }
            // cap the first trial move at a unit-scale displacement; stiff
            // penalties otherwise fling the iterate across the box
            let mut s = step
                .unwrap_or((1.0 + dist(x, &y)) / gn2.sqrt())
                .min(10.0 / gn2.sqrt());
            let mut accepted = false;
            for _ in 0..40 {
                let cand: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - s * gi).collect();
                match Self::penalty_objective(equalities, inequalities, x, &cand, rho) {
                    Some(fc) if fc <= fy - 1e-4 * s * gn2 => {
                        y = cand;
                        fy = fc;
                        accepted = true;
                        step = Some(s * 2.0);
                        break;
                    }
                    _ => s *= 0.5,
                }
            }
            if !accepted {
                break;
            }
        }
        y
    }

    /// Gauss-Newton on the active constraint residuals; returns a feasible
    /// point or None.
    fn feasibility_polish(
        &self,
        equalities: &[Expr],
        inequalities: &[Expr],
        mut y: Vec<f64>,
    ) -> Option<Vec<f64>> {
        let n = y.len();
        for _ in 0..self.cfg.polish_iters {
            let mut residuals: Vec<f64> = Vec::new();
            let mut jac: Vec<Vec<f64>> = Vec::new();
            for e in equalities {
                residuals.push(e.eval(&y).ok()?);
                jac.push(jets::gradient(e, &y).ok()?);
            }
            for c in inequalities {
                let r = c.eval(&y).ok()?;
                if r > -1e-14 {
                    residuals.push(r.max(0.0));
                    jac.push(jets::gradient(c, &y).ok()?);
                }
            }
            let viol: f64 = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
            // converged means "on the set at working precision"; an absolute
            // cutoff here would fake zero distances for deep queries
            if viol <= 64.0 * f64::EPSILON * norm(&y) {
                return Some(y);
            }
            if residuals.is_empty() {
                return Some(y);
            }
            // minimum-norm step dy = -J^T (J J^T + lambda I)^(-1) r
            let m = residuals.len();
            let mut a = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in 0..m {
                    a[i][j] = jac[i].iter().zip(&jac[j]).map(|(u, v)| u * v).sum();
                }
                a[i][i] += 1e-14 * (1.0 + a[i][i]);
            }
            let u = solve_dense(a, residuals)?;
            let mut dy = vec![0.0; n];
            for (ui, row) in u.iter().zip(&jac) {
                for (d, r) in dy.iter_mut().zip(row) {
                    *d -= ui * r;
                }
            }
            let step_norm = norm(&dy);
            if !step_norm.is_finite() {
                return None;
            }
            for (yi, di) in y.iter_mut().zip(&dy) {
                *yi += di;
            }
            if step_norm <= 1e-16 * (1.0 + norm(&y)) {
                break;
            }
        }
        let v = Self::violation_sq(equalities, inequalities, &y).ok()?;
        if v.sqrt() <= self.cfg.feasibility_tol {
            Some(y)
        } else {
            None
        }
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Van der Corput radical inverse, the usual low-discrepancy seed source.
fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    i += 1;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Gaussian elimination with partial pivoting; `a` is consumed.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// One-shot distance query; builds a transient oracle.
pub fn distance(
    set: &SetDesc,
    x: &[f64],
    cfg: &DistanceConfig,
) -> Result<DistanceResult, OracleError> {
    DistanceOracle::new(set, cfg.clone()).distance(x)
}

/// One-shot membership query at tolerance `tol`.
pub fn contains(
    set: &SetDesc,
    x: &[f64],
    tol: f64,
    cfg: &DistanceConfig,
) -> Result<bool, OracleError> {
    DistanceOracle::new(set, cfg.clone()).contains(x, tol)
}
