//! `orthotree`: spectra, identity certificates, relation verification and
//! topographs from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use orthotree_core::identities::{
    basmajian_partial, basmajian_tn, boundary_product, bridgeman, BridgemanReport, Frontier, Policy,
};
use orthotree_core::orthotree::{pants_boundary_sectors, torus_sectors, Letter, SectorSpec};
use orthotree_core::topograph::{check_catalog, compare_cusped, enumerate_topograph, QuadraticForm};
use orthotree_core::verify::{default_tolerance, run_verify, VerifyConfig, VerifyError};
use orthotree_core::weights::{
    format_value, parse_rational, propagate, surface_spectrum, surface_spectrum_float, surface_trees, SeedSpec,
    Spectrum, SurfaceKind,
};
use orthotree_core::{Mp, Real, Scalar};

const SCHEMA: &str = "1";
const DEFAULT_PRECISION: u32 = 128;
const DEFAULT_TOL: f64 = 1e-9;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_NOT_INTEGRAL: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "orthotree", version, about = "Orthotrees, ortho spectra and identity certificates")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ORTHOTREE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ortho spectrum of a seed surface.
    Spectrum(SpectrumArgs),
    /// Convergence of an identity certificate.
    Identity {
        #[command(subcommand)]
        which: IdentityCommand,
    },
    /// Relation families against the half-plane oracle.
    Verify(VerifyArgs),
    /// Topographs of binary quadratic forms and the vertex equations.
    Topograph(TopographArgs),
}

#[derive(Args, Debug, Clone)]
struct SeedArgs {
    #[arg(long, default_value = "pants")]
    surface: String,
    /// Three basis weights, each an integer, p/q or a decimal.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    basis: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    seed: SeedArgs,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exit 2 with a witness if any weight is not an integer.
    #[arg(long)]
    expect_integral: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum IdentityCommand {
    /// Basmajian sum with exact frontier remainder.
    Basmajian(IdentityArgs),
    /// Bridgeman sum with certified tail bound.
    Bridgeman(IdentityArgs),
    /// Boundary product form of the Basmajian certificate.
    Product(IdentityArgs),
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[command(flatten)]
    seed: SeedArgs,
    /// Depth of the last row (tree depth for Bridgeman without a budget).
    #[arg(long)]
    depth: Option<u32>,
    /// Region budget for the adaptive Bridgeman expansion, e.g. 2e6.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Sector as three letters root,left,right (default abc).
    #[arg(long, default_value = "abc")]
    sector: String,
    /// Sum over all sectors glued at one boundary vertex instead of one sector.
    #[arg(long)]
    all_sectors: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    rng_seed: u64,
    /// Relative tolerance (default 1e-9 at 128 bits, tighter above).
    #[arg(long)]
    tol: Option<f64>,
    /// Family name or group prefix; repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("target").required(true).multiple(false).args(["form", "catalog", "compare_cusped_pants"])))]
struct TopographArgs {
    /// Coefficients a,b,c of a x² + b xy + c y².
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    form: Option<Vec<i128>>,
    /// Vertex equation to check against its seed trees.
    #[arg(long)]
    catalog: Option<String>,
    /// Side-by-side dump of cusped lambda lengths and the x² topograph.
    #[arg(long)]
    compare_cusped_pants: bool,
    #[arg(long)]
    depth: Option<u32>,
    /// Also write every topograph region as JSON lines.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure with its exit code; the message goes to stderr.
struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_USAGE, msg: msg.into() }
    }

    fn run(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_FAIL, msg: msg.into() }
    }
}

type Out = Result<u8, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    let result = match cli.command {
        Command::Spectrum(a) => run_spectrum(&a),
        Command::Identity { which } => match which {
            IdentityCommand::Basmajian(a) => run_basmajian(&a),
            IdentityCommand::Product(a) => run_product(&a),
            IdentityCommand::Bridgeman(a) => run_bridgeman(&a),
        },
        Command::Verify(a) => run_verify_cmd(&a),
        Command::Topograph(a) => run_topograph(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Fail> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Fail::run(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn io_fail(e: io::Error) -> Fail {
    Fail::run(format!("write failed: {e}"))
}

fn check_precision(p: u32) -> Result<(), Fail> {
    match p {
        64 | 128 | 256 | 512 => Ok(()),
        _ => Err(Fail::usage(format!("unsupported precision {p} (use 64, 128, 256 or 512)"))),
    }
}

/// Decimal inputs may carry at most as many significant digits as the
/// working precision holds.
fn max_decimal_digits(precision: u32) -> usize {
    (precision as f64 * std::f64::consts::LOG10_2).floor() as usize
}

fn parse_basis(args: &SeedArgs, precision: u32) -> Result<SeedSpec<BigRational>, Fail> {
    let kind: SurfaceKind = args.surface.parse().map_err(|e| Fail::usage(format!("{e}")))?;
    let raw: Vec<String> = if args.basis.is_empty() && kind == SurfaceKind::CuspedPants {
        vec!["1".into(); 3]
    } else {
        args.basis.clone()
    };
    if raw.len() != 3 {
        return Err(Fail::usage(format!("--basis needs three values, got {}", raw.len())));
    }
    let limit = max_decimal_digits(precision);
    let mut vals = Vec::with_capacity(3);
    for s in &raw {
        if let Some((_, frac)) = s.split_once('.') {
            let digits = s.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit()).count();
            let sig = s.trim_start_matches(['-', '0', '.']).chars().filter(|c| c.is_ascii_digit()).count();
            if sig > limit || digits > limit + frac.len() {
                return Err(Fail::usage(format!("{s:?} has more digits than {precision}-bit precision holds ({limit})")));
            }
        }
        vals.push(parse_rational(s).map_err(|e| Fail::usage(format!("{e}")))?);
    }
    let basis: [BigRational; 3] = [vals[0].clone(), vals[1].clone(), vals[2].clone()];
    SeedSpec::new(kind, basis).map_err(|e| Fail::usage(format!("{e}")))
}

fn basis_json(seed: &SeedSpec<BigRational>) -> Value {
    json!(seed.basis.iter().map(|v| v.to_string()).collect::<Vec<_>>())
}

fn header(command: &str, seed: Option<&SeedSpec<BigRational>>, extra: Value) -> Value {
    let mut h = json!({"schema": SCHEMA, "command": command});
    if let Some(s) = seed {
        h["surface"] = json!(s.kind.to_string());
        h["basis"] = basis_json(s);
    }
    if let (Value::Object(m), Value::Object(e)) = (&mut h, extra) {
        m.extend(e);
    }
    h
}

// ---------------------------------------------------------------- spectrum

fn run_spectrum(a: &SpectrumArgs) -> Out {
    check_precision(a.precision)?;
    let seed = parse_basis(&a.seed, a.precision)?;
    if a.expect_integral {
        if let Some(w) = integrality_witness(&seed, a.depth)? {
            eprintln!("not integral: {w}");
            return Ok(EXIT_NOT_INTEGRAL);
        }
    }
    let head = header(
        "spectrum",
        Some(&seed),
        json!({"depth": a.depth, "mode": format!("{:?}", a.mode).to_lowercase(), "precision": a.precision}),
    );
    let mut out = sink(&a.output)?;
    match a.mode {
        Mode::Exact => {
            let sp = surface_spectrum(&seed, a.depth).map_err(|e| Fail::run(e.to_string()))?;
            write_spectrum(&mut out, head, &sp, a.format)?;
        }
        Mode::Float => match a.precision {
            64 => float_spectrum::<Mp<64>>(&mut out, head, &seed, a)?,
            128 => float_spectrum::<Mp<128>>(&mut out, head, &seed, a)?,
            256 => float_spectrum::<Mp<256>>(&mut out, head, &seed, a)?,
            _ => float_spectrum::<Mp<512>>(&mut out, head, &seed, a)?,
        },
    }
    out.flush().map_err(io_fail)?;
    Ok(EXIT_OK)
}

fn float_spectrum<R: Real>(out: &mut dyn Write, head: Value, seed: &SeedSpec<BigRational>, a: &SpectrumArgs) -> Result<(), Fail> {
    let sp = surface_spectrum_float(&seed.cast::<R>(), a.depth).map_err(|e| Fail::run(e.to_string()))?;
    write_spectrum(out, head, &sp, a.format)
}

fn write_spectrum<S: Scalar>(out: &mut dyn Write, mut head: Value, sp: &Spectrum<S>, format: Format) -> Result<(), Fail> {
    head["complete_below"] = sp.complete_below.as_ref().map(|v| json!(format_value(v))).unwrap_or(Value::Null);
    head["entries"] = json!(sp.entries.len());
    match format {
        Format::Json => {
            let mut doc = head;
            doc["spectrum"] = sp.to_json();
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| Fail::run(e.to_string()))?;
            writeln!(out).map_err(io_fail)?;
        }
        Format::Csv => {
            writeln!(out, "# {head}").map_err(io_fail)?;
            out.write_all(sp.to_csv().as_bytes()).map_err(io_fail)?;
        }
    }
    Ok(())
}

/// First non-integer weight over the six sector trees, exactly.
fn integrality_witness(seed: &SeedSpec<BigRational>, depth: u32) -> Result<Option<String>, Fail> {
    let trees = surface_trees(seed, depth).map_err(|e| Fail::run(e.to_string()))?;
    let mut best: Option<(u32, String)> = None;
    for t in &trees {
        if let Some((r, v)) = t.first_non_integer() {
            let d = t.topology.regions[r as usize].depth;
            let s = t.topology.sector;
            let msg = format!(
                "sector {}{}{} region {} (depth {d}) has weight {v}",
                s.root,
                s.left,
                s.right,
                t.topology.region_word(r)
            );
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, msg));
            }
        }
    }
    Ok(best.map(|(_, m)| m))
}

// ---------------------------------------------------------------- identity

fn parse_sector(s: &str) -> Result<SectorSpec, Fail> {
    let letters: Vec<Letter> = s
        .chars()
        .filter(|c| *c != ',')
        .map(|c| Letter::parse(c).ok_or_else(|| Fail::usage(format!("bad sector letter {c:?}"))))
        .collect::<Result<_, _>>()?;
    if letters.len() != 3 {
        return Err(Fail::usage(format!("--sector needs three letters, got {s:?}")));
    }
    SectorSpec::new(letters[0], letters[1], letters[2]).map_err(|e| Fail::usage(format!("{e}")))
}

fn glued_sectors(kind: SurfaceKind, sector: SectorSpec) -> Vec<SectorSpec> {
    match kind {
        SurfaceKind::Torus => torus_sectors(),
        _ => pants_boundary_sectors(sector.root),
    }
}

fn fmt_real<R: Real>(v: &R) -> String {
    format_value(v)
}

fn run_basmajian(a: &IdentityArgs) -> Out {
    check_precision(a.precision)?;
    match a.precision {
        64 => basmajian_rows::<Mp<64>>(a),
        128 => basmajian_rows::<Mp<128>>(a),
        256 => basmajian_rows::<Mp<256>>(a),
        _ => basmajian_rows::<Mp<512>>(a),
    }
}

fn basmajian_rows<R: Real>(a: &IdentityArgs) -> Out {
    let seed = parse_basis(&a.seed, a.precision)?;
    let sector = parse_sector(&a.sector)?;
    let depth = a.depth.unwrap_or(15);
    let head = header(
        "identity basmajian",
        Some(&seed),
        json!({"depth": depth, "tol": a.tol, "precision": a.precision, "sector": a.sector,
               "all_sectors": a.all_sectors}),
    );
    let mut out = sink(&a.output)?;
    writeln!(out, "# {head}").map_err(io_fail)?;
    writeln!(out, "depth,partial,remainder_or_bound,target,abs_error").map_err(io_fail)?;
    let tree = if a.all_sectors { None } else { Some(propagate(&seed, sector, depth).map_err(|e| Fail::usage(e.to_string()))?) };
    let mut worst = 0.0f64;
    for d in 0..=depth {
        let cert = match &tree {
            Some(t) => basmajian_partial::<BigRational, R>(t, &Frontier::Depth(d)),
            None => basmajian_tn::<BigRational, R>(&seed, &glued_sectors(seed.kind, sector), d),
        }
        .map_err(|e| Fail::usage(e.to_string()))?;
        let err = cert.residual().abs();
        worst = worst.max(err.to_f64());
        writeln!(
            out,
            "{d},{},{},{},{:e}",
            fmt_real(&cert.partial),
            fmt_real(&cert.remainder),
            fmt_real(&cert.total),
            err.to_f64()
        )
        .map_err(io_fail)?;
    }
    out.flush().map_err(io_fail)?;
    if worst < a.tol {
        Ok(EXIT_OK)
    } else {
        eprintln!("certificate residual {worst:e} exceeds tolerance {:e}", a.tol);
        Ok(EXIT_FAIL)
    }
}

fn run_product(a: &IdentityArgs) -> Out {
    check_precision(a.precision)?;
    match a.precision {
        64 => product_rows::<Mp<64>>(a),
        128 => product_rows::<Mp<128>>(a),
        256 => product_rows::<Mp<256>>(a),
        _ => product_rows::<Mp<512>>(a),
    }
}

fn product_rows<R: Real>(a: &IdentityArgs) -> Out {
    let seed = parse_basis(&a.seed, a.precision)?;
    let sector = parse_sector(&a.sector)?;
    let depth = a.depth.unwrap_or(12);
    let tree = propagate(&seed, sector, depth).map_err(|e| Fail::usage(e.to_string()))?;
    let last = boundary_product::<BigRational, R>(&tree, depth).map_err(|e| Fail::usage(e.to_string()))?;
    let one = BigRational::from_integer(1.into());
    let factors: Vec<Value> = last
        .factors
        .iter()
        .filter(|(v, _)| last.complete_below.as_ref().is_none_or(|c| v <= c))
        .map(|(v, c)| json!({"factor": ((v + &one) / (v - &one)).to_string(), "power": c}))
        .collect();
    let mut extra = json!({"depth": depth, "tol": a.tol, "precision": a.precision, "sector": a.sector,
                           "factors": factors});
    if seed.basis.iter().all(|v| *v == BigRational::from_integer(3.into())) {
        extra["note"] = json!("target exp(total) = 3+sqrt(5) = 2*phi^2, where phi^2 = (3+sqrt(5))/2");
    }
    let head = header("identity product", Some(&seed), extra);
    let mut out = sink(&a.output)?;
    writeln!(out, "# {head}").map_err(io_fail)?;
    writeln!(out, "depth,partial,remainder_or_bound,target,abs_error").map_err(io_fail)?;
    let mut final_err = f64::INFINITY;
    for d in 0..=depth {
        let p = boundary_product::<BigRational, R>(&tree, d).map_err(|e| Fail::usage(e.to_string()))?;
        let err = (p.certified.clone() - p.expected.clone()).abs().to_f64();
        final_err = err;
        let closing = p.certified.clone() / p.partial_product.clone();
        writeln!(out, "{d},{},{},{},{err:e}", fmt_real(&p.partial_product), fmt_real(&closing), fmt_real(&p.expected))
            .map_err(io_fail)?;
    }
    out.flush().map_err(io_fail)?;
    if final_err < a.tol {
        Ok(EXIT_OK)
    } else {
        eprintln!("certified product off by {final_err:e}, tolerance {:e}", a.tol);
        Ok(EXIT_FAIL)
    }
}

fn parse_budget(s: &str) -> Result<usize, Fail> {
    let v: f64 = s.trim().parse().map_err(|_| Fail::usage(format!("cannot parse budget {s:?}")))?;
    if !(v >= 1.0) || v > 1e12 {
        return Err(Fail::usage(format!("budget {s} out of range")));
    }
    Ok(v as usize)
}

fn run_bridgeman(a: &IdentityArgs) -> Out {
    check_precision(a.precision)?;
    match a.precision {
        64 => bridgeman_rows::<Mp<64>>(a),
        128 => bridgeman_rows::<Mp<128>>(a),
        256 => bridgeman_rows::<Mp<256>>(a),
        _ => bridgeman_rows::<Mp<512>>(a),
    }
}

fn bridgeman_rows<R: Real>(a: &IdentityArgs) -> Out {
    let seed = parse_basis(&a.seed, a.precision)?;
    let (policy, checkpoints) = match (&a.budget, a.depth) {
        (Some(b), _) => {
            let budget = parse_budget(b)?;
            let mut cps = Vec::new();
            let mut c = 1000usize;
            while c < budget {
                cps.push(c);
                c *= 10;
            }
            (Policy::Adaptive { budget }, cps)
        }
        (None, d) => (Policy::Depth(d.unwrap_or(12)), Vec::new()),
    };
    let seed_r = seed.cast::<R>();
    let rep: BridgemanReport<R> = bridgeman(&seed_r, policy, &checkpoints).map_err(|e| Fail::usage(e.to_string()))?;
    let width = rep.bracket_width();
    let head = header(
        "identity bridgeman",
        Some(&seed),
        json!({"policy": match policy {
                   Policy::Adaptive { budget } => format!("adaptive budget {budget}"),
                   Policy::Depth(d) => format!("depth {d}"),
               }, "tol": a.tol, "precision": a.precision, "nodes": rep.nodes,
               "max_depth": rep.max_depth, "bound_checks_held": rep.bound_checks_held,
               "brackets_target": rep.brackets_target(), "bracket_width": width.to_f64(),
               "rounding": rep.rounding.to_f64(),
               "gamma": rep.constants.gamma.to_f64(), "rho": rep.constants.rho.to_f64()}),
    );
    let mut out = sink(&a.output)?;
    writeln!(out, "# {head}").map_err(io_fail)?;
    writeln!(out, "nodes,partial,remainder_or_bound,target,abs_error").map_err(io_fail)?;
    let target = rep.target.to_f64();
    for row in &rep.trace[..rep.trace.len() - 1] {
        writeln!(out, "{},{:.17e},{:.17e},{:.17e},{:e}", row.nodes, row.partial, row.bound, target, (target - row.partial).abs())
            .map_err(io_fail)?;
    }
    writeln!(
        out,
        "{},{},{},{},{:e}",
        rep.nodes,
        fmt_real(&rep.partial),
        fmt_real(&rep.tail_bound),
        fmt_real(&rep.target),
        rep.deficit().abs().to_f64()
    )
    .map_err(io_fail)?;
    out.flush().map_err(io_fail)?;
    if !rep.brackets_target() || !rep.bound_checks_held {
        eprintln!("tail certificate failed: bracket does not contain the target or a bound check was violated");
        return Ok(EXIT_FAIL);
    }
    if width.to_f64() < a.tol {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "budget exhausted: certified bracket width {:e} (deficit {:e}) above tolerance {:e}",
            width.to_f64(),
            rep.deficit().to_f64(),
            a.tol
        );
        Ok(EXIT_BUDGET)
    }
}

// ---------------------------------------------------------------- verify

fn run_verify_cmd(a: &VerifyArgs) -> Out {
    if a.samples == 0 {
        return Err(Fail::usage("--samples must be at least 1"));
    }
    let tol = a.tol.unwrap_or_else(|| default_tolerance(a.precision));
    let cfg = VerifyConfig { samples: a.samples, rng_seed: a.rng_seed, tol, precision: a.precision, only: a.only.clone() };
    let rep = match run_verify(&cfg) {
        Ok(r) => r,
        Err(e @ VerifyError::BelowFloor { .. }) => return Err(Fail::run(e.to_string())),
        Err(e @ (VerifyError::UnknownFamily(_) | VerifyError::Precision(_))) => return Err(Fail::usage(e.to_string())),
        Err(e) => return Err(Fail::usage(e.to_string())),
    };
    let mut doc = header("verify", None, json!({}));
    doc["report"] = serde_json::to_value(&rep).map_err(|e| Fail::run(e.to_string()))?;
    doc["passed"] = json!(rep.passed());
    let mut out = sink(&a.output)?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Fail::run(e.to_string()))?;
    writeln!(out).map_err(io_fail)?;
    out.flush().map_err(io_fail)?;
    for f in rep.families.iter().filter(|f| !f.passed()) {
        for ex in &f.examples {
            let what = match (&ex.residual, &ex.error) {
                (_, Some(e)) => e.clone(),
                (Some(r), None) => format!("residual {r:e}"),
                _ => String::new(),
            };
            eprintln!("FAIL {} seed {} sample {}{}: {what}", f.family, a.rng_seed, ex.index, if ex.moved { " (moved)" } else { "" });
        }
        eprintln!("{}: {} of {} samples failed", f.family, f.failures, f.samples);
    }
    Ok(if rep.passed() { EXIT_OK } else { EXIT_FAIL })
}

// ---------------------------------------------------------------- topograph

fn run_topograph(a: &TopographArgs) -> Out {
    let mut out = sink(&a.output)?;
    let code = if let Some(coeffs) = &a.form {
        if coeffs.len() != 3 {
            return Err(Fail::usage(format!("--form needs three coefficients, got {}", coeffs.len())));
        }
        let depth = a.depth.unwrap_or(8);
        let form = QuadraticForm::new(coeffs[0], coeffs[1], coeffs[2]);
        let topo = enumerate_topograph(&form, depth).map_err(|e| Fail::run(e.to_string()))?;
        let disc = form.discriminant().map_err(|e| Fail::run(e.to_string()))?;
        let doc = header(
            "topograph",
            None,
            json!({"form": form.to_string(), "coefficients": [form.a.to_string(), form.b.to_string(), form.c.to_string()],
                   "discriminant": disc.to_string(), "depth": depth, "regions": topo.nodes.len(),
                   "edges_checked": topo.edges_checked,
                   "residual_failure": topo.residual_failure.as_ref().map(|(p, r)| json!({"path": p, "residual": r.to_string()})),
                   "evaluation_failure": topo.evaluation_failure, "passed": topo.passed()}),
        );
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Fail::run(e.to_string()))?;
        writeln!(out).map_err(io_fail)?;
        if let Some(p) = &a.dump {
            let mut d = sink(&Some(p.clone()))?;
            topo.dump_jsonl(&mut d).map_err(io_fail)?;
            d.flush().map_err(io_fail)?;
        }
        if topo.passed() {
            EXIT_OK
        } else {
            EXIT_FAIL
        }
    } else if let Some(name) = &a.catalog {
        let depth = a.depth.unwrap_or(10);
        let rep = check_catalog(name, depth).map_err(|e| Fail::usage(e.to_string()))?;
        let mut doc = header("topograph", None, json!({"catalog": name, "depth": depth}));
        doc["report"] = serde_json::to_value(&rep).map_err(|e| Fail::run(e.to_string()))?;
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Fail::run(e.to_string()))?;
        writeln!(out).map_err(io_fail)?;
        if rep.all_zero {
            EXIT_OK
        } else {
            EXIT_FAIL
        }
    } else {
        let depth = a.depth.unwrap_or(6);
        let rows = compare_cusped(depth).map_err(|e| Fail::run(e.to_string()))?;
        let head = header("topograph", None, json!({"compare_cusped_pants": true, "depth": depth}));
        writeln!(out, "# {head}").map_err(io_fail)?;
        writeln!(out, "fraction,word,lambda,lambda_squared,topograph_ones,topograph_basis").map_err(io_fail)?;
        for r in rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.fraction, r.word, r.lambda, r.lambda_squared, r.topograph_ones, r.topograph_basis
            )
            .map_err(io_fail)?;
        }
        EXIT_OK
    };
    out.flush().map_err(io_fail)?;
    Ok(code)
}
