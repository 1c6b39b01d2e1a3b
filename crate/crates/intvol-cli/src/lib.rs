//! Command-line front end. Every subcommand writes a CSV table or a JSON document.

mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;
use thiserror::Error;

use intvol::phase::{classify, overlay, rand_proj, sweep, Family, Functional, PhaseReport};
use intvol::specfun::buffon_probability;
use intvol::verify::{mc_rand_proj, McConfig, McEstimate};
use intvol::weighted::{distribution, reweight, to_rotation};
use intvol::{BodySpec, Kind, LogSequence};

use format::{float, opt_float, opt_int, Csv};

/// Exit status for malformed invocations.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for numeric or domain failures.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl From<intvol::Error> for CliError {
    fn from(e: intvol::Error) -> Self {
        match e {
            intvol::Error::Usage(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

const FUNCTIONALS: [&str; 4] = ["randproj", "randslice", "rotmean", "kinematic"];

fn body_args() -> Vec<Arg> {
    vec![
        Arg::new("ball")
            .long("ball")
            .num_args(2)
            .value_names(["N", "SCALE"])
            .allow_negative_numbers(true)
            .action(ArgAction::Append)
            .help("Euclidean ball of radius SCALE in dimension N"),
        Arg::new("cube")
            .long("cube")
            .num_args(2)
            .value_names(["N", "SCALE"])
            .allow_negative_numbers(true)
            .action(ArgAction::Append)
            .help("Cube with side SCALE in dimension N"),
        Arg::new("ptope")
            .long("ptope")
            .value_name("CSV")
            .action(ArgAction::Append)
            .help("Axis-aligned box with comma-separated side lengths"),
        Arg::new("body-json")
            .long("body-json")
            .value_name("PATH")
            .value_parser(value_parser!(PathBuf))
            .action(ArgAction::Append)
            .help("JSON body description, or an array of them"),
    ]
}

fn output_args(default_format: &'static str) -> Vec<Arg> {
    vec![
        Arg::new("format")
            .long("format")
            .value_parser(["csv", "json"])
            .default_value(default_format),
        Arg::new("out")
            .long("out")
            .value_name("PATH")
            .value_parser(value_parser!(PathBuf))
            .help("Write to a file instead of standard output"),
    ]
}

fn functional_arg() -> Arg {
    Arg::new("functional")
        .long("functional")
        .value_parser(FUNCTIONALS)
}

fn alpha_arg() -> Arg {
    Arg::new("alpha")
        .long("alpha")
        .value_parser(value_parser!(f64))
        .allow_negative_numbers(true)
        .default_value("0.01")
        .help("Probability level of the transition window")
}

fn kind_arg() -> Arg {
    Arg::new("kind")
        .long("kind")
        .value_parser(["intrinsic", "rotation", "rigid", "rigid_motion"])
        .default_value("intrinsic")
}

/// The argument grammar.
pub fn command() -> Command {
    Command::new("intvol")
        .about("Intrinsic volumes, weighted volume distributions and phase transitions")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("volumes")
                .about("Volume sequence of a body")
                .args(body_args())
                .arg(kind_arg())
                .args(output_args("csv")),
        )
        .subcommand(
            Command::new("distribution")
                .about("Law of the volume random variable of a body")
                .args(body_args())
                .arg(kind_arg())
                .args(output_args("csv")),
        )
        .subcommand(
            Command::new("phase")
                .about("Evaluate and classify a phase-transition functional")
                .args(body_args())
                .arg(functional_arg().required(true))
                .arg(alpha_arg())
                .arg(Arg::new("m").long("m").value_parser(value_parser!(usize)).help("Single subspace dimension"))
                .args(output_args("csv")),
        )
        .subcommand(
            Command::new("sweep")
                .about("Exact sweep of a functional over a body family")
                .arg(functional_arg().required(true))
                .arg(
                    Arg::new("family")
                        .long("family")
                        .value_parser(["cube", "cube-zeta", "ball"])
                        .default_value("cube"),
                )
                .arg(Arg::new("n").long("n").required(true).value_parser(value_parser!(usize)))
                .arg(
                    Arg::new("grid")
                        .long("grid")
                        .required(true)
                        .value_name("SPEC")
                        .help("AXIS[xAXIS], each AXIS a list a,b,c or a range a:b:count or log:a:b:count"),
                )
                .arg(alpha_arg())
                .arg(
                    Arg::new("overlay")
                        .long("overlay")
                        .value_name("PATH")
                        .value_parser(value_parser!(PathBuf))
                        .help("Also write normalized central volumes and their limits as CSV"),
                )
                .args(output_args("csv")),
        )
        .subcommand(
            Command::new("mc-verify")
                .about("Monte Carlo check of the projection functional on a cube")
                .args(body_args())
                .arg(functional_arg().default_value("randproj"))
                .arg(Arg::new("m").long("m").required(true).value_parser(value_parser!(usize)))
                .arg(Arg::new("seed").long("seed").required(true).value_parser(value_parser!(u64)))
                .arg(
                    Arg::new("samples")
                        .long("samples")
                        .value_parser(value_parser!(usize))
                        .default_value("10000"),
                )
                .args(output_args("json")),
        )
        .subcommand(
            Command::new("buffon")
                .about("Probability that a needle crosses a seam between planks")
                .arg(
                    Arg::new("ratio")
                        .long("ratio")
                        .value_parser(value_parser!(f64))
                        .conflicts_with_all(["length", "width"])
                        .required_unless_present_all(["length", "width"])
                        .help("Needle length over plank width"),
                )
                .arg(Arg::new("length").long("length").value_parser(value_parser!(f64)).requires("width"))
                .arg(Arg::new("width").long("width").value_parser(value_parser!(f64)).requires("length"))
                .args(output_args("csv")),
        )
}

/// Parses `argv` (program name first) and runs the subcommand, returning the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&matches, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(matches: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let text = match name {
        "volumes" => volumes(sub)?,
        "distribution" => distribution_cmd(sub)?,
        "phase" => phase(sub)?,
        "sweep" => sweep_cmd(sub)?,
        "mc-verify" => mc_verify(sub)?,
        "buffon" => buffon(sub)?,
        other => unreachable!("unknown subcommand {other}"),
    };
    match sub.get_one::<PathBuf>("out") {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_format(m: &ArgMatches) -> bool {
    m.get_one::<String>("format").map(String::as_str) == Some("json")
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Failure(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<T> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("invalid {what} '{s}'")))
}

/// Bodies in command-line order.
fn bodies(m: &ArgMatches) -> CliResult<Vec<BodySpec>> {
    let mut found: Vec<(usize, BodySpec)> = Vec::new();
    for flag in ["ball", "cube"] {
        let (Some(occ), Some(idx)) = (m.get_occurrences::<String>(flag), m.indices_of(flag)) else {
            continue;
        };
        let starts: Vec<usize> = idx.step_by(2).collect();
        for (vals, at) in occ.zip(starts) {
            let vals: Vec<&String> = vals.collect();
            let n: usize = parse_num(vals[0], "dimension")?;
            let scale: f64 = parse_num(vals[1], "scale")?;
            let body = if flag == "ball" {
                BodySpec::ball(n, scale)
            } else {
                BodySpec::cube(n, scale)
            };
            found.push((at, body));
        }
    }
    if let (Some(vals), Some(idx)) = (m.get_many::<String>("ptope"), m.indices_of("ptope")) {
        for (v, at) in vals.zip(idx) {
            let sides = v
                .split(',')
                .map(|x| parse_num::<f64>(x, "side length"))
                .collect::<CliResult<Vec<_>>>()?;
            found.push((at, BodySpec::parallelotope(sides)));
        }
    }
    if let (Some(paths), Some(idx)) = (
        m.get_many::<PathBuf>("body-json"),
        m.indices_of("body-json"),
    ) {
        for (p, at) in paths.zip(idx) {
            let text = std::fs::read_to_string(p)
                .map_err(|e| bad(format!("cannot read {}: {e}", p.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| bad(format!("{} is not JSON: {e}", p.display())))?;
            let specs: Vec<BodySpec> = if value.is_array() {
                serde_json::from_value(value)
            } else {
                serde_json::from_value(value).map(|b| vec![b])
            }
            .map_err(|e| bad(format!("{}: {e}", p.display())))?;
            found.extend(specs.into_iter().map(|b| (at, b)));
        }
    }
    found.sort_by_key(|(at, _)| *at);
    let specs: Vec<BodySpec> = found.into_iter().map(|(_, b)| b).collect();
    for b in &specs {
        b.validate()?;
    }
    Ok(specs)
}

fn one_body(m: &ArgMatches) -> CliResult<BodySpec> {
    let mut b = bodies(m)?;
    match b.len() {
        1 => Ok(b.remove(0)),
        0 => Err(bad(
            "a body is required (--ball, --cube, --ptope or --body-json)",
        )),
        k => Err(bad(format!("expected one body, got {k}"))),
    }
}

fn kind(m: &ArgMatches) -> Kind {
    match m.get_one::<String>("kind").map(String::as_str) {
        Some("rotation") => Kind::Rotation,
        Some("rigid") | Some("rigid_motion") => Kind::RigidMotion,
        _ => Kind::Intrinsic,
    }
}

fn functional(m: &ArgMatches) -> CliResult<Functional> {
    Ok(m.get_one::<String>("functional")
        .expect("functional has a value")
        .parse()?)
}

#[derive(Serialize)]
struct VolumesOut<'a> {
    body: &'a BodySpec,
    #[serde(flatten)]
    sequence: &'a LogSequence,
    values: Vec<f64>,
}

fn volumes(m: &ArgMatches) -> CliResult<String> {
    let body = one_body(m)?;
    let seq = reweight(&body.intrinsic()?, kind(m))?;
    let values = seq.values();
    if json_format(m) {
        return to_json(&VolumesOut {
            body: &body,
            sequence: &seq,
            values,
        });
    }
    let mut t = Csv::new(&["i", "V"]);
    for (i, v) in values.iter().enumerate() {
        t.row([i.to_string(), float(*v)]);
    }
    Ok(t.finish())
}

#[derive(Serialize)]
struct DistributionOut<'a> {
    body: &'a BodySpec,
    kind: Kind,
    n: usize,
    mean: f64,
    variance: f64,
    log_total: f64,
    pmf: Vec<f64>,
}

fn distribution_cmd(m: &ArgMatches) -> CliResult<String> {
    let body = one_body(m)?;
    let d = distribution(&reweight(&body.intrinsic()?, kind(m))?)?;
    let pmf = d.pmf();
    if json_format(m) {
        return to_json(&DistributionOut {
            body: &body,
            kind: d.kind,
            n: d.n(),
            mean: d.mean(),
            variance: d.variance(),
            log_total: d.log_total,
            pmf,
        });
    }
    let mut t = Csv::new(&["k", "pmf"]);
    for (k, p) in pmf.iter().enumerate() {
        t.row([k.to_string(), float(*p)]);
    }
    Ok(t.finish())
}

#[derive(Serialize)]
struct PhaseOut<'a> {
    bodies: &'a [BodySpec],
    #[serde(flatten)]
    report: &'a PhaseReport,
}

fn phase(m: &ArgMatches) -> CliResult<String> {
    let f = functional(m)?;
    let specs = bodies(m)?;
    let alpha = *m.get_one::<f64>("alpha").expect("alpha has a default");
    let single = m.get_one::<usize>("m").map(|&x| vec![x]);
    if single.is_some() && f.is_pair() {
        return Err(bad(format!("--m does not apply to {}", f.name())));
    }
    let report = classify(f, &specs, alpha, single.as_deref())?;
    if json_format(m) {
        return to_json(&PhaseOut {
            bodies: &specs,
            report: &report,
        });
    }
    let mut t = Csv::new(&[
        "functional",
        "n",
        "location",
        "width",
        "alpha",
        "param",
        "value",
        "classification",
    ]);
    for p in &report.points {
        t.row([
            f.name().to_string(),
            report.n.to_string(),
            float(report.location),
            float(report.width),
            float(alpha),
            float(p.param),
            float(p.value),
            p.classification.name().to_string(),
        ]);
    }
    Ok(t.finish())
}

/// One grid axis, either a comma list or a range `a:b:count` (prefix `log:` for geometric spacing).
fn parse_axis(s: &str) -> CliResult<Vec<f64>> {
    let s = s.trim();
    let (geometric, body) = match s.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let values = if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("range '{s}' must look like a:b:count")));
        }
        let a: f64 = parse_num(parts[0], "grid start")?;
        let b: f64 = parse_num(parts[1], "grid end")?;
        let count: usize = parse_num(parts[2], "grid count")?;
        if count == 0 {
            return Err(bad("grid count must be positive"));
        }
        if geometric && !(a > 0.0 && b > 0.0) {
            return Err(bad("geometric grids need positive end points"));
        }
        (0..count)
            .map(|j| {
                if count == 1 {
                    return a;
                }
                if j == count - 1 {
                    return b;
                }
                let u = j as f64 / (count - 1) as f64;
                if geometric {
                    (a.ln() + u * (b.ln() - a.ln())).exp()
                } else {
                    a + u * (b - a)
                }
            })
            .collect()
    } else if geometric {
        return Err(bad(format!("'log:' needs a range, got '{s}'")));
    } else {
        body.split(',')
            .map(|x| parse_num::<f64>(x, "grid value"))
            .collect::<CliResult<Vec<_>>>()?
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("grid values must be finite"));
    }
    Ok(values)
}

fn parse_grid(s: &str) -> CliResult<(Vec<f64>, Option<Vec<f64>>)> {
    let mut axes = s.split('x');
    let first = parse_axis(axes.next().unwrap_or_default())?;
    let second = axes.next().map(parse_axis).transpose()?;
    if axes.next().is_some() {
        return Err(bad("a grid has at most two axes"));
    }
    Ok((first, second))
}

fn sweep_cmd(m: &ArgMatches) -> CliResult<String> {
    let f = functional(m)?;
    let family: Family = m
        .get_one::<String>("family")
        .expect("family has a default")
        .parse()?;
    let n = *m.get_one::<usize>("n").expect("n is required");
    let alpha = *m.get_one::<f64>("alpha").expect("alpha has a default");
    let (g1, g2) = parse_grid(m.get_one::<String>("grid").expect("grid is required"))?;
    let g2 = match g2 {
        Some(g) => g,
        None if f.is_pair() => g1.clone(),
        None => (0..=n).map(|k| k as f64).collect(),
    };
    let rows = sweep(f, family, n, &g1, &g2, alpha)?;
    if let Some(path) = m.get_one::<PathBuf>("overlay") {
        let mut t = Csv::new(&[
            "param1",
            "param2",
            "normalized_location",
            "asymptotic_location",
        ]);
        for r in overlay(f, family, n, &g1, &g2)? {
            t.row([
                float(r.param1),
                opt_float(r.param2),
                float(r.normalized_location),
                opt_float(r.asymptotic_location),
            ]);
        }
        std::fs::write(path, t.finish())?;
    }
    if json_format(m) {
        return to_json(&rows);
    }
    let mut t = Csv::new(&[
        "functional",
        "n",
        "param1",
        "param2",
        "m",
        "value",
        "classification",
    ]);
    for r in &rows {
        t.row([
            r.functional.name().to_string(),
            r.n.to_string(),
            float(r.param1),
            opt_float(r.param2),
            opt_int(r.m),
            float(r.value),
            r.classification.name().to_string(),
        ]);
    }
    Ok(t.finish())
}

#[derive(Serialize)]
struct McOut {
    functional: Functional,
    n: usize,
    m: usize,
    exact: f64,
    estimate: f64,
    std_error: f64,
    samples: usize,
    seed: u64,
}

fn mc_verify(m: &ArgMatches) -> CliResult<String> {
    let f = functional(m)?;
    if f != Functional::RandProj {
        return Err(bad(format!(
            "Monte Carlo verification covers randproj only, not {}",
            f.name()
        )));
    }
    let (n, scale) = match one_body(m)? {
        BodySpec::Cube { n, scale } => (n, scale),
        other => {
            return Err(bad(format!(
                "Monte Carlo verification needs a cube, got {other:?}"
            )))
        }
    };
    let mc = McConfig {
        seed: *m.get_one::<u64>("seed").expect("seed is required"),
        samples: *m
            .get_one::<usize>("samples")
            .expect("samples has a default"),
        n,
        m: *m.get_one::<usize>("m").expect("m is required"),
    };
    let McEstimate {
        mean,
        std_error,
        samples,
    } = mc_rand_proj(scale, &mc)?;
    let d = distribution(&to_rotation(&BodySpec::cube(n, scale).intrinsic()?)?)?;
    let report = McOut {
        functional: f,
        n,
        m: mc.m,
        exact: rand_proj(&d, mc.m)?,
        estimate: mean,
        std_error,
        samples,
        seed: mc.seed,
    };
    if json_format(m) {
        return to_json(&report);
    }
    let mut t = Csv::new(&[
        "functional",
        "n",
        "m",
        "exact",
        "estimate",
        "std_error",
        "samples",
        "seed",
    ]);
    t.row([
        f.name().to_string(),
        n.to_string(),
        mc.m.to_string(),
        float(report.exact),
        float(report.estimate),
        float(report.std_error),
        samples.to_string(),
        mc.seed.to_string(),
    ]);
    Ok(t.finish())
}

fn buffon(m: &ArgMatches) -> CliResult<String> {
    let (length, width) = match m.get_one::<f64>("ratio") {
        Some(&r) => (r, 1.0),
        None => (
            *m.get_one::<f64>("length")
                .expect("length is required without ratio"),
            *m.get_one::<f64>("width")
                .expect("width is required without ratio"),
        ),
    };
    let p = buffon_probability(length, width)?;
    if json_format(m) {
        return to_json(
            &serde_json::json!({ "length": length, "width": width, "ratio": length / width, "p": p }),
        );
    }
    Ok(format!("p,{}\n", float(p)))
}
