use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use planeauto::automorphism::{classify, henon_normal_form, invert_map, jung_decompose, PolyMap, Witness};
use planeauto::conjugacy::{
    dedup_modulo_centralizer, screen_invariants, solve_bounded_degree, solve_diagonal_ansatz, conjugacy_degree_bound, Screen,
    SolveOptions, SolveOutcome,
};
use planeauto::exec::Exec;
use planeauto::green::{green_batch, raster_slice, Chart, GreenFunctions, GreenMode, DEFAULT_MAX_ITER};
use planeauto::groebner::GroebnerConfig;
use planeauto::io::{
    certificate_json, complex_json, field_to_json, henon_form_json, jung_word_json, map_to_json, orbit_json, parse_map,
    refutation_json, residual_json,
};
use planeauto::periodic::periodic_points;
use planeauto::{Error, FieldElement, FieldSpec, PlanePoly};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "planeauto", version, about = "Polynomial automorphisms of the plane: classification, Green functions, periodic orbits, conjugacy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Elliptic or loxodromic, with dynamical degree and witness.
    Classify(InputArgs),
    /// Jung word of the map.
    Decompose(InputArgs),
    /// Generalized Hénon normal form of a loxodromic map.
    NormalForm(InputArgs),
    /// Exact inverse.
    Invert(InputArgs),
    /// Green function values at given points.
    Green(GreenArgs),
    /// Green function over a complex-affine grid.
    Raster(RasterArgs),
    /// Periodic orbits of period dividing n.
    Periodic(PeriodicArgs),
    /// Screen invariants, then search for a conjugacy of bounded degree.
    Conjugate(ConjugateArgs),
    /// Degree bound guaranteeing that a conjugacy, when one exists, has been found.
    Bound(BoundArgs),
    /// The family f = (y, x + y^(m+1)), g = (y, x + d y^(m+1)), end to end.
    Example(ExampleArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Map JSON file.
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the report; commands here are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Gplus,
    Gminus,
    Gmax,
}

impl From<ModeArg> for GreenMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Gplus => GreenMode::Gplus,
            ModeArg::Gminus => GreenMode::Gminus,
            ModeArg::Gmax => GreenMode::Gmax,
        }
    }
}

#[derive(Args, Debug)]
struct NumericArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Gplus)]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: u32,
    /// Escape radius; defaults to the filtration radius of the map.
    #[arg(long)]
    radius: Option<f64>,
    /// Evaluate cells one by one instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct GreenArgs {
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Point as `re_x,im_x,re_y,im_y`; repeatable. Defaults to the origin.
    #[arg(long = "at", value_parser = parse_point)]
    at: Vec<[f64; 4]>,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq)]
enum Format {
    Json,
    Pgm,
    Csv,
}

#[derive(Args, Debug)]
struct RasterArgs {
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Grid size `nx,ny`.
    #[arg(long, value_parser = parse_grid, default_value = "64,64")]
    grid: (u32, u32),
    /// `ox,oy,ux,uy,vx,vy,r`: the cell (s, t) in [-1,1]^2 maps to o + r(s u + t v), all real directions.
    #[arg(long, value_parser = parse_chart, allow_hyphen_values = true)]
    chart: Option<[f64; 7]>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Where the PGM/CSV raster goes (the JSON report goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    numeric: NumericArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PeriodicArgs {
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Orbits of every period up to this one.
    #[arg(long, default_value_t = 1)]
    max_period: u32,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ConjugateArgs {
    #[arg(short = 'f')]
    f: PathBuf,
    #[arg(short = 'g')]
    g: PathBuf,
    #[arg(short = 'D', long = "degree-cap", default_value_t = 1)]
    degree_cap: u32,
    #[arg(long, default_value_t = 2)]
    max_period: u32,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(short = 'f')]
    f: Option<PathBuf>,
    #[arg(short = 'g')]
    g: Option<PathBuf>,
    #[arg(long, conflicts_with = "f")]
    df: Option<u64>,
    #[arg(long, conflicts_with = "g")]
    dg: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ExampleArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    d: i64,
    #[arg(long, default_value_t = 1)]
    max_period: u32,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    common: CommonArgs,
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    let arr: [f64; N] = v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))?;
    if arr.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(arr)
}

fn parse_point(s: &str) -> Result<[f64; 4], String> {
    floats::<4>(s)
}

fn parse_chart(s: &str) -> Result<[f64; 7], String> {
    let c = floats::<7>(s)?;
    if c[6] <= 0.0 {
        return Err("chart radius must be positive".into());
    }
    Ok(c)
}

fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected nx,ny")?;
    let nx: u32 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let ny: u32 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if nx == 0 || ny == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((nx, ny))
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Cap(String),
    Math(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_cap() {
            return Failure::Cap(e.to_string());
        }
        match e {
            Error::Parse { .. } | Error::InvalidInput(_) | Error::InvalidField(_) | Error::FieldMismatch | Error::NotAutomorphism(_) | Error::NotLoxodromic | Error::InvalidRadius { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Math(other.to_string()),
        }
    }
}

type Outcome = Result<Output, Failure>;

/// What a command produced: report body, plus whether a cap was hit.
struct Output {
    body: Value,
    parameters: Value,
    caps_hit: Vec<String>,
}

impl Output {
    fn new(body: Value, parameters: Value) -> Self {
        Output { body, parameters, caps_hit: Vec::new() }
    }
}

struct Inputs {
    digest: Sha256,
}

impl Inputs {
    fn new() -> Self {
        Inputs { digest: Sha256::new() }
    }

    fn map(&mut self, path: &Path) -> Result<PolyMap, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        self.digest.update((text.len() as u64).to_le_bytes());
        self.digest.update(text.as_bytes());
        Ok(parse_map(&text)?)
    }

    fn finish(self) -> String {
        hex::encode(self.digest.finalize())
    }
}

fn groebner_config() -> GroebnerConfig {
    let mut cfg = GroebnerConfig::default();
    if let Some(mb) = std::env::var("PLANEAUTO_CAP_MB").ok().and_then(|v| v.parse::<u64>().ok()) {
        // A coefficient of n digits takes about n/2 bytes; keep room for a few thousand live terms.
        let digits = (mb.saturating_mul(1 << 20) / 4096).clamp(16, cfg.max_height_digits as u64);
        cfg.max_height_digits = digits as usize;
        cfg.max_pairs = cfg.max_pairs.min((mb.saturating_mul(64)).max(100) as usize);
    }
    cfg
}

fn classify_cmd(args: &InputArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let c = classify(&f)?;
    let witness = match &c.witness {
        Witness::Loxodromic(h) => json!({ "henon_form": henon_form_json(h) }),
        Witness::Elliptic { conjugator, factor } => json!({
            "conjugator": map_to_json(conjugator),
            "factor": map_to_json(&factor.to_map()),
        }),
    };
    Ok(Output::new(json!({ "class": c.class, "lambda1": c.lambda1, "witness": witness }), json!({})))
}

fn decompose_cmd(args: &InputArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let w = jung_decompose(&f)?;
    let recomposes = w.recompose()? == f;
    Ok(Output::new(json!({ "factors": jung_word_json(&w), "length": w.len(), "recomposes": recomposes }), json!({})))
}

fn normal_form_cmd(args: &InputArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let h = henon_normal_form(&f)?;
    Ok(Output::new(json!({ "normal_form": henon_form_json(&h), "display": h.to_string() }), json!({})))
}

fn invert_cmd(args: &InputArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let inv = invert_map(&f)?;
    let verified = inv.compose(&f)?.is_identity() && f.compose(&inv)?.is_identity();
    Ok(Output::new(json!({ "inverse": map_to_json(&inv), "verified": verified }), json!({})))
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn green_cmd(args: &GreenArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let h = henon_normal_form(&f)?;
    let g = GreenFunctions::new(&h);
    let radius = args.numeric.radius.unwrap_or_else(|| g.filtration_radius());
    let points = if args.at.is_empty() { vec![[0.0; 4]] } else { args.at.clone() };
    // Points are given in the coordinates of the input map; the normal form lives in conjugated ones.
    let phi = h.conjugator.to_numeric();
    let zs: Vec<_> = points
        .iter()
        .map(|p| phi.apply((num_complex::Complex64::new(p[0], p[1]), num_complex::Complex64::new(p[2], p[3]))))
        .collect();
    let values = green_batch(&g, args.numeric.mode.into(), &zs, args.numeric.max_iter, radius, exec(args.numeric.sequential))?;
    let mut out = Vec::new();
    for (p, v) in points.iter().zip(values) {
        out.push(json!({
            "point": [[p[0], p[1]], [p[2], p[3]]],
            "value": v.value,
            "iterations_used": v.iterations_used,
            "error_bound": v.error_bound,
            "escaped": v.escaped,
        }));
    }
    Ok(Output::new(
        json!({ "values": out, "degree": g.degree(), "filtration_radius": g.filtration_radius(), "c_prime": g.c_prime() }),
        json!({ "mode": args.numeric.mode, "max_iter": args.numeric.max_iter, "escape_radius": radius }),
    ))
}

fn raster_cmd(args: &RasterArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let h = henon_normal_form(&f)?;
    let g = GreenFunctions::new(&h);
    let chart = match args.chart {
        None => Chart::real_square((0.0, 0.0), 2.0 * g.filtration_radius().min(10.0)),
        Some([ox, oy, ux, uy, vx, vy, r]) => {
            let c = |a: f64| num_complex::Complex64::new(a, 0.0);
            Chart { origin: (c(ox), c(oy)), u: (c(r * ux), c(r * uy)), v: (c(r * vx), c(r * vy)) }
        }
    };
    if args.numeric.radius.is_some() {
        return Err(Failure::Usage("raster uses the filtration radius; --radius applies to `green`".into()));
    }
    let raster = raster_slice(&g, &chart, args.grid, args.numeric.mode.into(), args.numeric.max_iter, exec(args.numeric.sequential))?;
    let parameters = json!({
        "mode": args.numeric.mode,
        "max_iter": args.numeric.max_iter,
        "grid": [args.grid.0, args.grid.1],
        "chart": { "origin": [complex_json(chart.origin.0), complex_json(chart.origin.1)],
                   "u": [complex_json(chart.u.0), complex_json(chart.u.1)],
                   "v": [complex_json(chart.v.0), complex_json(chart.v.1)] },
        "coordinates": "normal form",
    });
    let mut body = json!({ "nx": raster.nx, "ny": raster.ny, "g_max": raster.max_value(), "c_prime": g.c_prime() });
    let payload = match args.format {
        Format::Json => {
            body["values"] = json!(raster.values);
            None
        }
        Format::Pgm => Some(raster.to_pgm()),
        Format::Csv => Some(raster.to_csv()),
    };
    if let Some(text) = payload {
        match &args.out {
            Some(path) => {
                fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                body["path"] = json!(path.display().to_string());
            }
            None => body["data"] = json!(text),
        }
    }
    Ok(Output::new(body, parameters))
}

fn periodic_cmd(args: &PeriodicArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.input)?;
    let h = henon_normal_form(&f)?;
    if args.max_period == 0 {
        return Err(Failure::Usage("--max-period must be at least 1".into()));
    }
    let mut orbits = Vec::new();
    for n in 1..=args.max_period {
        orbits.extend(periodic_points(&h, n)?.into_iter().filter(|o| o.period == n));
    }
    let body = json!({
        "orbits": orbits.iter().map(orbit_json).collect::<Vec<_>>(),
        "count": orbits.len(),
        "clustered": orbits.iter().filter(|o| o.clustered()).count(),
    });
    Ok(Output::new(body, json!({ "max_period": args.max_period })))
}

fn conjugate_cmd(args: &ConjugateArgs, inputs: &mut Inputs) -> Outcome {
    let f = inputs.map(&args.f)?;
    let g = inputs.map(&args.g)?;
    let parameters = json!({ "degree_cap": args.degree_cap, "max_period": args.max_period, "tol": args.tol });
    let bound = conjugacy_degree_bound(f.degree() as u64, g.degree() as u64).ok().map(|b| b.to_string());
    let screen = screen_invariants(&f, &g, args.max_period, args.tol)?;
    let periods_checked = match screen {
        Screen::Refuted(r) => {
            return Ok(Output::new(json!({ "result": "refuted", "refutation": refutation_json(&r), "completeness_bound": bound }), parameters));
        }
        Screen::Pass { periods_checked } => periods_checked,
    };
    let opts = SolveOptions { groebner: groebner_config(), ..SolveOptions::default() };
    let mut out = match solve_bounded_degree(&f, &g, args.degree_cap, &opts)? {
        SolveOutcome::Certificate(cert) => {
            let class = dedup_modulo_centralizer(std::slice::from_ref(&cert), &f, args.degree_cap);
            Output::new(json!({ "result": "certificate", "certificate": certificate_json(&class[0], 1) }), parameters)
        }
        SolveOutcome::Refuted(r) => Output::new(json!({ "result": "refuted", "refutation": refutation_json(&r) }), parameters),
        SolveOutcome::Undecided { reason, residuals } => {
            let mut o = Output::new(
                json!({ "result": "undecided", "reason": reason, "residuals": residuals.iter().map(residual_json).collect::<Vec<_>>() }),
                parameters,
            );
            o.caps_hit.push(reason);
            o
        }
    };
    out.body["screen"] = json!({ "lambda1": "equal", "jacobian": "equal", "multiplier_periods_checked": periods_checked });
    out.body["completeness_bound"] = json!(bound);
    Ok(out)
}

fn bound_cmd(args: &BoundArgs, inputs: &mut Inputs) -> Outcome {
    let degree = |path: &Option<PathBuf>, given: Option<u64>, inputs: &mut Inputs| -> Result<u64, Failure> {
        match (path, given) {
            (_, Some(d)) => Ok(d),
            (Some(p), None) => Ok(inputs.map(p)?.degree() as u64),
            (None, None) => Err(Failure::Usage("give -f/-g map files or --df/--dg degrees".into())),
        }
    };
    let df = degree(&args.f, args.df, inputs)?;
    let dg = degree(&args.g, args.dg, inputs)?;
    let b = conjugacy_degree_bound(df, dg)?;
    Ok(Output::new(json!({ "bound": b.to_string(), "bits": b.bits() }), json!({ "df": df, "dg": dg })))
}

fn example_maps(m: u32, d: i64) -> Result<(PolyMap, PolyMap), Failure> {
    if m < 1 || d == 0 {
        return Err(Failure::Usage("need m >= 1 and d != 0".into()));
    }
    let q = FieldSpec::rationals();
    let build = |c: i64| -> Result<PolyMap, Failure> {
        let top = PlanePoly::monomial(FieldElement::from_int(&q, c), 0, m + 1);
        Ok(PolyMap::new(PlanePoly::y(&q), &PlanePoly::x(&q) + &top)?)
    };
    Ok((build(1)?, build(d)?))
}

fn example_cmd(args: &ExampleArgs, inputs: &mut Inputs) -> Outcome {
    let (f, g) = example_maps(args.m, args.d)?;
    inputs.digest.update(format!("example {} {}", args.m, args.d).as_bytes());
    let parameters = json!({ "m": args.m, "d": args.d, "max_period": args.max_period, "tol": args.tol });
    let maps = json!({ "f": map_to_json(&f), "g": map_to_json(&g) });
    if let Screen::Refuted(r) = screen_invariants(&f, &g, args.max_period, args.tol)? {
        return Ok(Output::new(json!({ "result": "refuted", "maps": maps, "refutation": refutation_json(&r) }), parameters));
    }
    match solve_diagonal_ansatz(&f, &g)? {
        Some(cert) => {
            let class_size = 1;
            let alpha = cert.psi.p().coeff(1, 0);
            let alpha = if alpha.is_zero() { cert.psi.p().coeff(0, 1) } else { alpha };
            let body = json!({
                "result": "certificate",
                "maps": maps,
                "certificate": certificate_json(&cert, class_size),
                "alpha": alpha.to_string(),
                "alpha_power_m": alpha.pow(args.m as i64)?.to_string(),
                "field": field_to_json(cert.field()),
            });
            Ok(Output::new(body, parameters))
        }
        None => Ok(Output::new(json!({ "result": "undecided", "maps": maps, "reason": "no diagonal conjugacy" }), parameters)),
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a str,
    argv: Vec<String>,
    inputs_digest: String,
    seed: u64,
    parameters: Value,
    outputs: Value,
    caps_hit: Vec<String>,
    timing_ms: f64,
}

fn run(cli: &Cli) -> (Result<Output, Failure>, String, &'static str, u64, Option<PathBuf>) {
    let mut inputs = Inputs::new();
    let (name, seed, out, result): (&'static str, u64, Option<PathBuf>, Outcome) = match &cli.command {
        Command::Classify(a) => ("classify", a.common.seed, a.common.out.clone(), classify_cmd(a, &mut inputs)),
        Command::Decompose(a) => ("decompose", a.common.seed, a.common.out.clone(), decompose_cmd(a, &mut inputs)),
        Command::NormalForm(a) => ("normal-form", a.common.seed, a.common.out.clone(), normal_form_cmd(a, &mut inputs)),
        Command::Invert(a) => ("invert", a.common.seed, a.common.out.clone(), invert_cmd(a, &mut inputs)),
        Command::Green(a) => ("green", a.common.seed, a.common.out.clone(), green_cmd(a, &mut inputs)),
        Command::Raster(a) => ("raster", a.seed, None, raster_cmd(a, &mut inputs)),
        Command::Periodic(a) => ("periodic", a.common.seed, a.common.out.clone(), periodic_cmd(a, &mut inputs)),
        Command::Conjugate(a) => ("conjugate", a.common.seed, a.common.out.clone(), conjugate_cmd(a, &mut inputs)),
        Command::Bound(a) => ("bound", a.common.seed, a.common.out.clone(), bound_cmd(a, &mut inputs)),
        Command::Example(a) => ("example", a.common.seed, a.common.out.clone(), example_cmd(a, &mut inputs)),
    };
    (result, inputs.finish(), name, seed, out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let (result, digest, name, seed, out) = run(&cli);
    let (outputs, parameters, caps_hit, code) = match result {
        Ok(o) => {
            let code = if o.caps_hit.is_empty() { 0 } else { EXIT_CAP };
            (o.body, o.parameters, o.caps_hit, code)
        }
        Err(Failure::Usage(msg)) => (json!({ "error": msg, "kind": "usage" }), json!({}), Vec::new(), EXIT_USAGE),
        Err(Failure::Cap(msg)) => (json!({ "error": msg, "kind": "cap" }), json!({}), vec![msg], EXIT_CAP),
        Err(Failure::Math(msg)) => (json!({ "error": msg, "kind": "numeric" }), json!({}), Vec::new(), EXIT_FAILURE),
    };
    let report = RunReport {
        command: name,
        argv: std::env::args().skip(1).collect(),
        inputs_digest: digest,
        seed,
        parameters,
        outputs,
        caps_hit,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match out {
        Some(path) => {
            if let Err(e) = fs::write(&path, &text) {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => print!("{text}"),
    }
    if code != 0 {
        if let Some(msg) = report.outputs.get("error").and_then(Value::as_str) {
            eprintln!("error: {msg}");
        }
    }
    ExitCode::from(code)
}
