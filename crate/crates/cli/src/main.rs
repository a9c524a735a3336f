//! `hotan` — tangent-cone membership scans, cone sampling, optimality
//! checks, and the membership cross-check suites, over problem files or
//! built-in benchmark sets.

mod problem;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use hotan_core::benchsets;
use hotan_core::props::{self, SuiteKind, VerifyConfig};
use hotan_core::setmodels::DistanceOracle;
use hotan_core::{
    fmt17, DirectionCollection, MembershipVerdict, SliceSpec, VerdictStatus,
};
use problem::ProblemFile;

/// stdout writes that shrug off a closed pipe instead of panicking
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

const EXIT_ACCEPTED: u8 = 0;
const EXIT_REJECTED: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_FILE: u8 = 65;

#[derive(Parser)]
#[command(
    name = "hotan",
    version,
    about = "Numerical tangent cones and high-order necessary optimality checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide membership of one direction in a tangent cone or slice
    Member {
        /// Problem file
        file: PathBuf,
        /// first-order | proper | alpha:<a> | zero | infinity | extended
        #[arg(long)]
        slice: String,
        /// Named direction collection (not used for first-order)
        #[arg(long)]
        coll: Option<String>,
        /// Direction to test, comma-separated components
        #[arg(long)]
        w: String,
        /// Write the evidence table as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan a unit direction grid and report per-direction verdicts as CSV
    Sample {
        file: PathBuf,
        #[arg(long)]
        slice: String,
        #[arg(long)]
        coll: Option<String>,
        /// Grid size; defaults to the file's `config resolution` or 16
        #[arg(long)]
        resolution: Option<usize>,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a certificate that the base point is not a local minimizer
    Checkmin {
        file: PathBuf,
        /// Highest collection order to search (2..=6)
        #[arg(long = "max-order")]
        max_order: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Write per-direction check rows as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the membership cross-check suites on built-in benchmark sets
    VerifyProps {
        /// all | pr2 | pr3 | pr5a | pr6 | pr8 | pr9 | pr10 | cor1
        #[arg(long, default_value = "all")]
        suite: String,
        /// Comma-separated benchmark names
        #[arg(long, default_value = "cusp,half-plane,parabola")]
        sets: String,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
    },
}

enum CliError {
    Usage(String),
    File(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::File(msg)) => {
            eprintln!("file error: {msg}");
            ExitCode::from(EXIT_FILE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Member {
            file,
            slice,
            coll,
            w,
            out,
        } => cmd_member(&file, &slice, coll.as_deref(), &w, out.as_deref()),
        Cmd::Sample {
            file,
            slice,
            coll,
            resolution,
            out,
        } => cmd_sample(&file, &slice, coll.as_deref(), resolution, out.as_deref()),
        Cmd::Checkmin {
            file,
            max_order,
            resolution,
            out,
        } => cmd_checkmin(&file, max_order, resolution, out.as_deref()),
        Cmd::VerifyProps {
            suite,
            sets,
            resolution,
        } => cmd_verify_props(&suite, &sets, resolution),
    }
}

fn load(path: &Path) -> Result<ProblemFile, CliError> {
    problem::load(path).map_err(|e| CliError::File(e.to_string()))
}

fn parse_slice(text: &str) -> Result<SliceSpec, CliError> {
    match text {
        "first-order" | "firstorder" => Ok(SliceSpec::FirstOrder),
        "proper" => Ok(SliceSpec::Proper),
        "zero" => Ok(SliceSpec::Zero),
        "infinity" => Ok(SliceSpec::Infinity),
        "extended" => Ok(SliceSpec::Extended),
        _ => match text.strip_prefix("alpha:") {
            Some(a) => {
                let alpha: f64 = a
                    .parse()
                    .map_err(|_| usage(format!("bad alpha value `{a}`")))?;
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(usage("alpha must be a finite positive real"));
                }
                Ok(SliceSpec::Alpha(alpha))
            }
            None => Err(usage(format!(
                "unknown slice `{text}`; use first-order, proper, alpha:<a>, zero, infinity or extended"
            ))),
        },
    }
}

fn parse_vector(text: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let v: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let v = v.map_err(|_| usage(format!("bad vector `{text}`")))?;
    if v.len() != dim {
        return Err(usage(format!(
            "vector `{text}` has {} components, expected {dim}",
            v.len()
        )));
    }
    Ok(v)
}

fn base_point(p: &ProblemFile) -> Result<Vec<f64>, CliError> {
    p.point
        .clone()
        .ok_or_else(|| usage("this command needs a `point` entry in the problem file"))
}

fn named_collection(p: &ProblemFile, name: &str) -> Result<Vec<Vec<f64>>, CliError> {
    p.collections
        .get(name)
        .cloned()
        .ok_or_else(|| usage(format!("no collection named `{name}` in the problem file")))
}

fn write_out(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::File(format!("cannot write {}: {e}", p.display()))),
        None => {
            { use std::io::Write; let _ = write!(std::io::stdout(), "{content}"); }
            Ok(())
        }
    }
}

fn verdict_name(v: VerdictStatus) -> &'static str {
    match v {
        VerdictStatus::Accepted => "Accepted",
        VerdictStatus::Rejected => "Rejected",
        VerdictStatus::Inconclusive => "Inconclusive",
    }
}

fn print_verdict(v: &MembershipVerdict) {
    outln!("status: {}", verdict_name(v.status));
    if let Some(level) = v.decisive_level {
        outln!("decisive level: {level}");
    }
    if let Some(note) = &v.note {
        outln!("note: {note}");
    }
    if !v.evidence.is_empty() {
        outln!(
            "{:>5} {:>24} {:>24} {:>24} {:>24} {:>24}",
            "level", "t", "tau", "ratio", "distance", "scaled"
        );
        for r in &v.evidence {
            outln!(
                "{:>5} {:>24} {:>24} {:>24} {:>24} {:>24}",
                r.level,
                fmt17(r.t),
                fmt17(r.tau),
                fmt17(r.ratio),
                fmt17(r.distance),
                fmt17(r.scaled)
            );
        }
    }
}

fn cmd_member(
    path: &Path,
    slice: &str,
    coll: Option<&str>,
    w: &str,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let p = load(path)?;
    let slice = parse_slice(slice)?;
    let base = base_point(&p)?;
    let w = parse_vector(w, p.dim)?;
    let cfg = p.membership_cfg();
    let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());

    let verdict = match slice {
        SliceSpec::FirstOrder => {
            if coll.is_some() {
                return Err(usage("first-order membership takes no --coll"));
            }
            hotan_core::member_first_order(&oracle, &base, &w, &cfg)
        }
        _ => {
            let name = coll.ok_or_else(|| usage("this slice needs --coll <name>"))?;
            let dirs = named_collection(&p, name)?;
            let coll = DirectionCollection::new(base, dirs);
            hotan_core::member_slice(&oracle, &coll, &w, slice, &cfg)
        }
    };

    print_verdict(&verdict);
    if let Some(out) = out {
        write_out(Some(out), &verdict.evidence_csv())?;
    }
    Ok(match verdict.status {
        VerdictStatus::Accepted => EXIT_ACCEPTED,
        VerdictStatus::Rejected => EXIT_REJECTED,
        VerdictStatus::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_sample(
    path: &Path,
    slice: &str,
    coll: Option<&str>,
    resolution: Option<usize>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let p = load(path)?;
    let slice = parse_slice(slice)?;
    let base = base_point(&p)?;
    let resolution = resolution
        .or(p.overrides.resolution())
        .unwrap_or(16);
    let cfg = p.membership_cfg();
    let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());

    let dirs = match slice {
        SliceSpec::FirstOrder => {
            if coll.is_some() {
                return Err(usage("first-order sampling takes no --coll"));
            }
            Vec::new()
        }
        _ => {
            let name = coll.ok_or_else(|| usage("this slice needs --coll <name>"))?;
            named_collection(&p, name)?
        }
    };

    let rows = hotan_core::sample_cone(&oracle, &base, &dirs, slice, resolution, &cfg);
    let mut csv = String::from("index,");
    for i in 1..=p.dim {
        csv.push_str(&format!("w{i},"));
    }
    csv.push_str("status\n");
    for (i, (dir, verdict)) in rows.iter().enumerate() {
        csv.push_str(&i.to_string());
        for c in dir {
            csv.push(',');
            csv.push_str(&fmt17(*c));
        }
        csv.push(',');
        csv.push_str(verdict_name(verdict.status));
        csv.push('\n');
    }
    write_out(out, &csv)?;
    Ok(EXIT_ACCEPTED)
}

fn cmd_checkmin(
    path: &Path,
    max_order: Option<usize>,
    resolution: Option<usize>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let p = load(path)?;
    let f = p
        .objective
        .clone()
        .ok_or_else(|| usage("checkmin needs an `objective` entry in the problem file"))?;
    let base = base_point(&p)?;
    let max_order = max_order.or(p.overrides.max_order()).unwrap_or(2);
    if !(2..=6).contains(&max_order) {
        return Err(usage("--max-order must lie in 2..=6"));
    }
    let mut cfg = p.optimality_cfg();
    if let Some(r) = resolution {
        cfg.resolution = r;
    }
    let oracle = DistanceOracle::new(&p.set, p.distance_cfg.clone());
    let outcome = hotan_core::disqualify(&f, &oracle, &base, max_order, &cfg);

    outln!(
        "objective {f} in variables ({}), searching orders 2..={max_order}",
        p.variables.join(", ")
    );
    outln!("{}", outcome.first_order.render_text());
    for r in &outcome.reports {
        outln!("{}", r.render_text());
    }
    if let Some(out) = out {
        let mut csv = String::new();
        for r in &outcome.reports {
            csv.push_str(&r.to_csv());
        }
        write_out(Some(out), &csv)?;
    }

    if let Some(cert) = outcome.certificate() {
        outln!(
            "verdict: NOT a local minimizer; certificate w = ({}) with condition value {}",
            cert.w
                .iter()
                .map(|c| fmt17(*c))
                .collect::<Vec<_>>()
                .join(", "),
            fmt17(cert.value)
        );
        return Ok(EXIT_VIOLATED);
    }
    if outcome.any_consistent() {
        outln!("verdict: no violation found at this sampling resolution");
        Ok(EXIT_ACCEPTED)
    } else {
        outln!("verdict: inconclusive coverage only");
        Ok(EXIT_INCONCLUSIVE)
    }
}

fn cmd_verify_props(suite: &str, sets: &str, resolution: usize) -> Result<u8, CliError> {
    let suites: Vec<SuiteKind> = if suite == "all" {
        SuiteKind::all().to_vec()
    } else {
        vec![SuiteKind::parse(suite)
            .ok_or_else(|| usage(format!("unknown suite `{suite}`")))?]
    };
    let problems: Result<Vec<_>, CliError> = sets
        .split(',')
        .map(|name| {
            benchsets::by_name(name.trim())
                .ok_or_else(|| usage(format!("unknown benchmark set `{name}`")))
        })
        .collect();
    let problems = problems?;
    let cfg = VerifyConfig {
        resolution,
        ..VerifyConfig::default()
    };

    outln!(
        "{:<6} {:<12} {:>8} {:>15} {:>13}",
        "suite", "set", "checks", "contradictions", "inconclusive"
    );
    let mut total_contradictions = 0usize;
    for problem in &problems {
        for outcome in props::run_suites(problem, &suites, &cfg) {
            outln!(
                "{:<6} {:<12} {:>8} {:>15} {:>13}",
                outcome.suite,
                outcome.set_name,
                outcome.checks,
                outcome.contradictions,
                outcome.inconclusive
            );
            for note in &outcome.notes {
                outln!("    contradiction: {note}");
            }
            total_contradictions += outcome.contradictions;
        }
    }
    outln!("total contradictions: {total_contradictions}");
    Ok(if total_contradictions == 0 {
        EXIT_ACCEPTED
    } else {
        EXIT_REJECTED
    })
}
