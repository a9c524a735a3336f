//! Problem-file loading: a flat, sectioned key-value text format.
//!
//! ```text
//! dim 2
//! point 0 0
//! objective -x1 + x2^3
//! set parametric
//!   comp s^3
//!   comp s^2
//!   domain 0 2
//! end
//! collection h01
//!   dir 0 1
//! end
//! config levels 24
//! ```
//!
//! `#` starts a comment. Unknown keys are rejected with a line number.
//! `set builtin <name>` pulls in a benchmark set together with its tuned
//! distance configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use hotan_core::setmodels::{DistanceConfig, SetDesc};
use hotan_core::{default_variables, parse as parse_expr, Expr, MembershipConfig, OptimalityConfig};

#[derive(Debug)]
pub enum FileError {
    Io(String),
    Parse { line: usize, msg: String },
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileError::Io(msg) => write!(f, "{msg}"),
            FileError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> FileError {
    FileError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    values: BTreeMap<String, f64>,
}

const MEMBERSHIP_KEYS: &[&str] = &[
    "accept_tol",
    "reject_floor",
    "warmup",
    "accept_run",
    "decay_guard",
    "t0",
    "ratio",
    "levels",
    "first_order_levels",
    "tau_grid",
    "tau_refine_iters",
    "seed",
];
const DISTANCE_KEYS: &[&str] = &[
    "grid_points",
    "refine_tol",
    "starts",
    "feasibility_tol",
];
const OPT_KEYS: &[&str] = &[
    "stationarity_tol",
    "violation_tol",
    "locality_radius",
    "resolution",
    "max_order",
];

impl Overrides {
    fn set(&mut self, line: usize, key: &str, value: f64) -> Result<(), FileError> {
        let known = MEMBERSHIP_KEYS
            .iter()
            .chain(DISTANCE_KEYS)
            .chain(OPT_KEYS)
            .any(|k| *k == key);
        if !known {
            return Err(err(line, format!("unknown config key `{key}`")));
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn resolution(&self) -> Option<usize> {
        self.get("resolution").map(|v| v as usize)
    }

    pub fn max_order(&self) -> Option<usize> {
        self.get("max_order").map(|v| v as usize)
    }

    pub fn apply_distance(&self, cfg: &mut DistanceConfig) {
        if let Some(v) = self.get("grid_points") {
            cfg.grid_points = v as usize;
        }
        if let Some(v) = self.get("refine_tol") {
            cfg.refine_tol = v;
        }
        if let Some(v) = self.get("starts") {
            cfg.starts = v as usize;
        }
        if let Some(v) = self.get("feasibility_tol") {
            cfg.feasibility_tol = v;
        }
    }

    pub fn apply_membership(&self, cfg: &mut MembershipConfig) {
        if let Some(v) = self.get("accept_tol") {
            cfg.accept_tol = v;
        }
        if let Some(v) = self.get("reject_floor") {
            cfg.reject_floor = v;
        }
        if let Some(v) = self.get("warmup") {
            cfg.warmup = v as usize;
        }
        if let Some(v) = self.get("accept_run") {
            cfg.accept_run = v as usize;
        }
        if let Some(v) = self.get("decay_guard") {
            cfg.decay_guard = v;
        }
        if let Some(v) = self.get("t0") {
            cfg.t0 = v;
        }
        if let Some(v) = self.get("ratio") {
            cfg.ratio = v;
        }
        if let Some(v) = self.get("levels") {
            cfg.levels = v as usize;
        }
        if let Some(v) = self.get("first_order_levels") {
            cfg.first_order_levels = v as usize;
        }
        if let Some(v) = self.get("tau_grid") {
            cfg.tau_grid = v as usize;
        }
        if let Some(v) = self.get("tau_refine_iters") {
            cfg.tau_refine_iters = v as usize;
        }
        if let Some(v) = self.get("seed") {
            cfg.sample_seed = v as u64;
        }
        self.apply_distance(&mut cfg.distance);
    }

    pub fn apply_optimality(&self, cfg: &mut OptimalityConfig) {
        if let Some(v) = self.get("stationarity_tol") {
            cfg.stationarity_tol = v;
        }
        if let Some(v) = self.get("violation_tol") {
            cfg.violation_tol = v;
        }
        if let Some(v) = self.get("locality_radius") {
            cfg.locality_radius = v;
        }
        if let Some(v) = self.resolution() {
            cfg.resolution = v;
        }
        self.apply_membership(&mut cfg.membership);
    }
}

#[derive(Debug)]
pub struct ProblemFile {
    pub dim: usize,
    pub variables: Vec<String>,
    pub set: SetDesc,
    /// Distance configuration baseline; builtin sets carry tuned values.
    pub distance_cfg: DistanceConfig,
    pub objective: Option<Expr>,
    pub point: Option<Vec<f64>>,
    pub collections: BTreeMap<String, Vec<Vec<f64>>>,
    pub overrides: Overrides,
}

impl ProblemFile {
    pub fn membership_cfg(&self) -> MembershipConfig {
        let mut cfg = MembershipConfig {
            distance: self.distance_cfg.clone(),
            ..MembershipConfig::default()
        };
        self.overrides.apply_membership(&mut cfg);
        cfg
    }

    pub fn optimality_cfg(&self) -> OptimalityConfig {
        let mut cfg = OptimalityConfig {
            membership: self.membership_cfg(),
            ..OptimalityConfig::default()
        };
        self.overrides.apply_optimality(&mut cfg);
        cfg
    }
}

struct Lines<'a> {
    /// (1-based line number, tokens) with comments and blanks stripped.
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let body = raw.split('#').next().unwrap_or("").trim();
                if body.is_empty() {
                    None
                } else {
                    Some((i + 1, body.split_whitespace().collect()))
                }
            })
            .collect();
        Lines { items, pos: 0 }
    }

    fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.items.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let item = self.items.get(self.pos).cloned();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }
}

fn parse_floats(line: usize, toks: &[&str], what: &str) -> Result<Vec<f64>, FileError> {
    if toks.is_empty() {
        return Err(err(line, format!("expected {what}")));
    }
    toks.iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| err(line, format!("bad number `{t}` in {what}")))
        })
        .collect()
}

fn expr_from(line: usize, toks: &[&str], vars: &[String]) -> Result<Expr, FileError> {
    let text = toks.join(" ");
    parse_expr(&text, vars).map_err(|e| err(line, format!("in `{text}`: {e}")))
}

/// Parse one `set ...` block; the opening line has already been consumed.
fn parse_set(
    open_line: usize,
    kind_toks: &[&str],
    lines: &mut Lines,
    dim: usize,
    vars: &[String],
) -> Result<(SetDesc, Option<DistanceConfig>), FileError> {
    let kind = kind_toks
        .first()
        .ok_or_else(|| err(open_line, "set block needs a variant keyword"))?;
    match *kind {
        "builtin" => {
            let name = kind_toks
                .get(1)
                .ok_or_else(|| err(open_line, "builtin set needs a name"))?;
            let p = hotan_core::benchsets::by_name(name)
                .ok_or_else(|| err(open_line, format!("unknown builtin set `{name}`")))?;
            if p.set.dim() != dim {
                return Err(err(
                    open_line,
                    format!("builtin `{name}` has dimension {}", p.set.dim()),
                ));
            }
            // single-line form, no end keyword
            Ok((p.set, Some(p.distance_cfg)))
        }
        "parametric" => {
            let mut comps = Vec::new();
            let mut domain = None;
            loop {
                let (line, toks) = lines
                    .next()
                    .ok_or_else(|| err(open_line, "unterminated set block"))?;
                match toks[0] {
                    "comp" => comps.push(expr_from(line, &toks[1..], &["s".to_string()])?),
                    "domain" => {
                        let v = parse_floats(line, &toks[1..], "domain bounds")?;
                        if v.len() != 2 {
                            return Err(err(line, "domain takes two bounds"));
                        }
                        domain = Some([v[0], v[1]]);
                    }
                    "end" => break,
                    other => return Err(err(line, format!("unknown key `{other}` in set block"))),
                }
            }
            let domain = domain.ok_or_else(|| err(open_line, "parametric set needs a domain"))?;
            if comps.len() != dim {
                return Err(err(
                    open_line,
                    format!("parametric set needs {dim} components, got {}", comps.len()),
                ));
            }
            SetDesc::parametric(comps, domain)
                .map(|s| (s, None))
                .map_err(|e| err(open_line, e.to_string()))
        }
        "implicit" => {
            let mut eqs = Vec::new();
            let mut ineqs = Vec::new();
            let mut bbox = None;
            loop {
                let (line, toks) = lines
                    .next()
                    .ok_or_else(|| err(open_line, "unterminated set block"))?;
                match toks[0] {
                    "eq" => eqs.push(expr_from(line, &toks[1..], vars)?),
                    "ineq" => ineqs.push(expr_from(line, &toks[1..], vars)?),
                    "box" => {
                        let v = parse_floats(line, &toks[1..], "box bounds")?;
                        if v.len() != 2 * dim {
                            return Err(err(line, format!("box takes {} bounds", 2 * dim)));
                        }
                        bbox = Some(v.chunks(2).map(|c| [c[0], c[1]]).collect());
                    }
                    "end" => break,
                    other => return Err(err(line, format!("unknown key `{other}` in set block"))),
                }
            }
            SetDesc::implicit(dim, eqs, ineqs, bbox)
                .map(|s| (s, None))
                .map_err(|e| err(open_line, e.to_string()))
        }
        "pointcloud" => {
            let mut points = Vec::new();
            loop {
                let (line, toks) = lines
                    .next()
                    .ok_or_else(|| err(open_line, "unterminated set block"))?;
                match toks[0] {
                    "pt" => {
                        let v = parse_floats(line, &toks[1..], "point coordinates")?;
                        if v.len() != dim {
                            return Err(err(line, format!("point needs {dim} coordinates")));
                        }
                        points.push(v);
                    }
                    "end" => break,
                    other => return Err(err(line, format!("unknown key `{other}` in set block"))),
                }
            }
            SetDesc::point_cloud(points)
                .map(|s| (s, None))
                .map_err(|e| err(open_line, e.to_string()))
        }
        "union" => {
            let mut members = Vec::new();
            loop {
                let (line, toks) = lines
                    .next()
                    .ok_or_else(|| err(open_line, "unterminated set block"))?;
                match toks[0] {
                    "set" => {
                        let (member, _) = parse_set(line, &toks[1..], lines, dim, vars)?;
                        members.push(member);
                    }
                    "end" => break,
                    other => {
                        return Err(err(line, format!("unknown key `{other}` in union block")))
                    }
                }
            }
            SetDesc::union(members)
                .map(|s| (s, None))
                .map_err(|e| err(open_line, e.to_string()))
        }
        other => Err(err(open_line, format!("unknown set variant `{other}`"))),
    }
}

pub fn load(path: &Path) -> Result<ProblemFile, FileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FileError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_text(&text)
}

pub fn parse_text(text: &str) -> Result<ProblemFile, FileError> {
    let mut lines = Lines::new(text);

    // dim must come first so every later vector can be validated
    let (dline, dtoks) = lines
        .next()
        .ok_or_else(|| err(1, "empty problem file"))?;
    if dtoks[0] != "dim" {
        return Err(err(dline, "the first entry must be `dim <n>`"));
    }
    let dim: usize = dtoks
        .get(1)
        .and_then(|t| t.parse().ok())
        .filter(|n| *n >= 1)
        .ok_or_else(|| err(dline, "bad dimension"))?;

    let mut variables = default_variables(dim);
    if let Some((line, toks)) = lines.peek().cloned() {
        if toks[0] == "vars" {
            lines.next();
            let names: Vec<String> = toks[1..].iter().map(|s| s.to_string()).collect();
            if names.len() != dim {
                return Err(err(line, format!("vars takes {dim} names")));
            }
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    return Err(err(line, format!("variable `{n}` repeats")));
                }
            }
            variables = names;
        }
    }

    let mut set: Option<(SetDesc, Option<DistanceConfig>)> = None;
    let mut objective = None;
    let mut point = None;
    let mut collections: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    let mut overrides = Overrides::default();

    while let Some((line, toks)) = lines.next() {
        match toks[0] {
            "set" => {
                if set.is_some() {
                    return Err(err(line, "only one set block is allowed"));
                }
                set = Some(parse_set(line, &toks[1..], &mut lines, dim, &variables)?);
            }
            "objective" => {
                objective = Some(expr_from(line, &toks[1..], &variables)?);
            }
            "point" => {
                let v = parse_floats(line, &toks[1..], "base point")?;
                if v.len() != dim {
                    return Err(err(line, format!("point needs {dim} coordinates")));
                }
                point = Some(v);
            }
            "collection" => {
                let name = toks
                    .get(1)
                    .ok_or_else(|| err(line, "collection needs a name"))?
                    .to_string();
                if collections.contains_key(&name) {
                    return Err(err(line, format!("collection `{name}` repeats")));
                }
                let mut dirs = Vec::new();
                loop {
                    let (dl, dt) = lines
                        .next()
                        .ok_or_else(|| err(line, "unterminated collection block"))?;
                    match dt[0] {
                        "dir" => {
                            let v = parse_floats(dl, &dt[1..], "direction")?;
                            if v.len() != dim {
                                return Err(err(dl, format!("direction needs {dim} components")));
                            }
                            dirs.push(v);
                        }
                        "end" => break,
                        other => {
                            return Err(err(
                                dl,
                                format!("unknown key `{other}` in collection block"),
                            ))
                        }
                    }
                }
                if dirs.is_empty() {
                    return Err(err(line, "collection needs at least one direction"));
                }
                collections.insert(name, dirs);
            }
            "config" => {
                let key = toks
                    .get(1)
                    .ok_or_else(|| err(line, "config needs a key and a value"))?;
                let value: f64 = toks
                    .get(2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line, format!("bad value for config key `{key}`")))?;
                overrides.set(line, key, value)?;
            }
            "vars" => return Err(err(line, "vars must come directly after dim")),
            other => return Err(err(line, format!("unknown key `{other}`"))),
        }
    }

    let (set, tuned) =
        set.ok_or_else(|| err(1, "problem file needs exactly one set block"))?;
    let mut distance_cfg = tuned.unwrap_or_default();
    overrides.apply_distance(&mut distance_cfg);

    Ok(ProblemFile {
        dim,
        variables,
        set,
        distance_cfg,
        objective,
        point,
        collections,
        overrides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUSP_FILE: &str = "\
# cusp benchmark
dim 2
point 0 0
objective -x1 + x2^3

set parametric
  comp s^3
  comp s^2
  domain 0 2
end

collection h01
  dir 0 1
end

config levels 24
";

    #[test]
    fn parses_a_full_file() {
        let p = parse_text(CUSP_FILE).unwrap();
        assert_eq!(p.dim, 2);
        assert_eq!(p.variables, vec!["x1", "x2"]);
        assert_eq!(p.point, Some(vec![0.0, 0.0]));
        assert!(p.objective.is_some());
        assert_eq!(p.collections["h01"], vec![vec![0.0, 1.0]]);
        assert_eq!(p.membership_cfg().levels, 24);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let text = "dim 2\npoint 0 0\nset pointcloud\n  pt 0 0\nend\nbogus 1\n";
        match parse_text(text).unwrap_err() {
            FileError::Parse { line, msg } => {
                assert_eq!(line, 6);
                assert!(msg.contains("bogus"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let text = "dim 2\nconfig not_a_key 1\nset pointcloud\n  pt 0 0\nend\n";
        match parse_text(text).unwrap_err() {
            FileError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn renamed_variables_bind_positionally() {
        let text = "dim 2\nvars u v\npoint 1 2\nobjective u + v^2\nset pointcloud\n  pt 1 2\nend\n";
        let p = parse_text(text).unwrap();
        assert_eq!(p.variables, vec!["u", "v"]);
        assert_eq!(p.objective.unwrap().eval(&[1.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn builtin_sets_carry_tuned_distance_config() {
        let text = "dim 2\npoint 0 0\nset builtin half-plane\n";
        let p = parse_text(text).unwrap();
        assert_eq!(p.distance_cfg.starts, 1);
        assert!(matches!(p.set, SetDesc::Implicit { .. }));
    }

    #[test]
    fn unions_nest() {
        let text = "dim 2\npoint 0 0\nset union\n  set pointcloud\n    pt 0 0\n  end\n  set pointcloud\n    pt 1 1\n  end\nend\n";
        let p = parse_text(text).unwrap();
        assert!(matches!(p.set, SetDesc::Union { .. }));
    }

    #[test]
    fn duplicate_collections_are_rejected() {
        let text = "dim 2\nset pointcloud\n  pt 0 0\nend\ncollection a\n  dir 1 0\nend\ncollection a\n  dir 0 1\nend\n";
        assert!(matches!(
            parse_text(text),
            Err(FileError::Parse { line: 8, .. })
        ));
    }
}
