use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsign_core::diophantine::convergents;
use gsign_core::dynamics::{orbit_csv, run_orbit};
use gsign_core::mapper::{encode_field, render_field, FieldFormat, Transform, DEFAULT_STEPS};
use gsign_core::periodicity::{
    certify_auto_streaming, certify_constant, certify_periodic_streaming, CertificateKind,
    ConvergentChoice, PeriodHypothesis,
};
use gsign_core::regions::{
    pattern_region, periodic_forward_balls, rasterize_region, RegionPredicate,
};
use gsign_core::scalar::f64_from_hex_bits;
use gsign_core::search::{
    period_stats, random_search, to_jsonl, verify_period_doubling, AlphaSampler, SearchConfig,
};
use gsign_core::{Certificate64, Scalar};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::error::ShellError;
use crate::report::{self, OrbitOptions};

#[derive(Debug, Parser)]
#[command(
    name = "gsign",
    version,
    about = "Greedy sign dynamics z_n = z_{n-1} ± e^{2πiαn}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one orbit and report its sign period.
    Orbit(OrbitArgs),
    /// Render the min-ambiguity field over a grid of initial values.
    Map(MapArgs),
    /// Try to certify that a sign pattern persists forever.
    Certify(CertifyArgs),
    /// Recompute a certificate from its own parameters.
    Verify(VerifyArgs),
    /// Continued-fraction convergents of a number in (0, 1).
    Convergents(ConvergentsArgs),
    /// Constant-sign disks, or the region of a periodic pattern.
    Regions(RegionsArgs),
    /// Seeded random search over parameters.
    Search(SearchArgs),
    /// Check period doubling under alpha -> alpha + 1/2.
    Doubling(DoublingArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct OrbitInput {
    /// Rotation number, as an expression such as "sqrt(2)/3".
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Initial value z_{-1}, such as "1-i".
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Number of steps.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
}

#[derive(Debug, Args)]
struct PeriodArgs {
    /// Full periods that must be observed.
    #[arg(long, default_value_t = gsign_core::periodicity::DEFAULT_MIN_REPEATS)]
    min_repeats: usize,
    /// Largest period tried.
    #[arg(long)]
    p_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrbitFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OrbitArgs {
    #[command(flatten)]
    input: OrbitInput,
    #[command(flatten)]
    period: PeriodArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: OrbitFormat,
    /// Attach a certificate attempt when a period is found.
    #[arg(long)]
    certify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MapFormat {
    Pgm8,
    RawF32,
    Png,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Sqrt,
    Linear,
}

#[derive(Debug, Args)]
struct MapArgs {
    /// re_min,re_max,im_min,im_max
    #[arg(long, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
    rect: String,
    /// WxH or N
    #[arg(long, default_value = "512")]
    res: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, value_enum, default_value = "sqrt")]
    transform: TransformArg,
    #[arg(long, value_enum, default_value = "pgm8")]
    format: MapFormat,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Image path; the JSON sidecar goes to PATH.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: OrbitInput,
    #[command(flatten)]
    period: PeriodArgs,
    /// Start of the pattern; detected from the orbit when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Period; detected from the orbit when omitted.
    #[arg(long)]
    p: Option<usize>,
    /// Constant-sign certificate with this convergent denominator of alpha.
    #[arg(long, conflicts_with = "conv_index")]
    conv_q: Option<u128>,
    /// Constant-sign certificate with this 1-based convergent of alpha.
    #[arg(long)]
    conv_index: Option<usize>,
    /// Target 20L/Q for periodic certificates; chosen from the orbit when omitted.
    #[arg(long)]
    eta: Option<f64>,
    /// Longest orbit rerun while checking the window.
    #[arg(long, default_value_t = 100_000_000)]
    max_horizon: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Certificate JSON file.
    cert: PathBuf,
}

#[derive(Debug, Args)]
struct ConvergentsArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, default_value_t = u64::MAX as u128)]
    qmax: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegionFormat {
    Json,
    Pgm,
}

#[derive(Debug, Args)]
struct RegionsArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Initial value of an orbit whose periodic pattern defines the region.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Backward steps from the end of the first period.
    #[arg(long, default_value_t = 0)]
    depth: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: RegionFormat,
    #[arg(long, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
    rect: String,
    #[arg(long, default_value = "256")]
    res: String,
    /// Include the predicate tree in JSON output.
    #[arg(long)]
    tree: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// uniform, near_half:DELTA or near:X:DELTA
    #[arg(long, default_value = "uniform")]
    alpha_sampler: String,
    #[arg(long, default_value_t = 5.0)]
    z_radius: f64,
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[command(flatten)]
    period: PeriodArgs,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    certify: bool,
    /// JSONL records; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON; stderr when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DoublingArgs {
    #[command(flatten)]
    input: OrbitInput,
    #[arg(long, default_value_t = gsign_core::periodicity::DEFAULT_MIN_REPEATS)]
    min_repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured and environment bind address.
    #[arg(long)]
    bind: Option<String>,
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<(), ShellError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| ShellError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).map_err(|source| ShellError::Io {
                path: "stdout".into(),
                source,
            })
        }
    }
}

fn json_bytes(value: &impl Serialize) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("documents serialize");
    v.push(b'\n');
    v
}

fn period_options(p: &PeriodArgs, certify: bool) -> OrbitOptions {
    OrbitOptions {
        min_repeats: p.min_repeats,
        p_max: p.p_max,
        certify,
    }
}

fn cmd_orbit(a: OrbitArgs) -> Result<(), ShellError> {
    let params = report::params(&a.input.alpha, &a.input.z, a.input.n)?;
    let opts = period_options(&a.period, a.certify);
    let (orbit, rep) = report::orbit_report(&params, &opts);
    let bytes = match a.format {
        OrbitFormat::Json => json_bytes(&rep),
        OrbitFormat::Csv => {
            let mut footer = vec![(
                "period".to_string(),
                rep.period
                    .map_or("none".to_string(), |h| format!("k={},p={}", h.k, h.p)),
            )];
            footer.push((
                "min_ambiguity".into(),
                format!("{:e}", rep.orbit.min_ambiguity),
            ));
            if let Some(c) = &rep.circles {
                footer.push(("circles".into(), c.distinct_count.to_string()));
            }
            if let Some(c) = &rep.certificate {
                footer.push(("certificate".into(), format!("{:?}", c.verdict)));
            }
            orbit_csv(&orbit, &footer).into_bytes()
        }
    };
    write_out(a.out.as_deref(), &bytes)
}

fn cmd_map(a: MapArgs) -> Result<(), ShellError> {
    let transform = match a.transform {
        TransformArg::Sqrt => Transform::Sqrt,
        TransformArg::Linear => Transform::Linear,
    };
    let format = match a.format {
        MapFormat::Pgm8 => FieldFormat::Pgm8,
        MapFormat::RawF32 => FieldFormat::RawF32,
        MapFormat::Png => FieldFormat::Png,
    };
    let spec = report::field_spec(&a.rect, &a.res, &a.alpha, a.steps, transform)?;
    let field = render_field(&spec, a.workers).map_err(ShellError::domain)?;
    let (bytes, sidecar) = encode_field(&field, format).map_err(ShellError::domain)?;
    write_out(Some(&a.out), &bytes)?;
    let mut side_path = a.out.into_os_string();
    side_path.push(".json");
    write_out(Some(Path::new(&side_path)), &json_bytes(&sidecar))
}

fn cmd_certify(a: CertifyArgs) -> Result<(), ShellError> {
    let params = report::params(&a.input.alpha, &a.input.z, a.input.n)?;
    let cert = if a.conv_q.is_some() || a.conv_index.is_some() {
        let k = a.k.ok_or_else(|| {
            ShellError::Usage("--k is required with --conv-q or --conv-index".into())
        })?;
        let choice = match (a.conv_q, a.conv_index) {
            (Some(q), _) => ConvergentChoice::Denominator(q),
            (None, Some(i)) => ConvergentChoice::Index(i),
            (None, None) => unreachable!(),
        };
        let list = convergents(params.alpha(), u128::MAX).map_err(ShellError::domain)?;
        let q = match choice {
            ConvergentChoice::Denominator(q) => list.find_denominator(q),
            ConvergentChoice::Index(i) => list.get(i),
        }
        .ok_or_else(|| ShellError::Domain("no such convergent of alpha".into()))?
        .q;
        let needed = usize::try_from(q)
            .ok()
            .and_then(|q| q.checked_add(k + 1))
            .unwrap_or(usize::MAX);
        if needed > a.max_horizon {
            return Err(ShellError::TooLarge {
                what: "window end",
                value: needed,
                limit: a.max_horizon,
            });
        }
        let orbit = run_orbit(
            &params
                .with_horizon(params.horizon().max(needed))
                .map_err(ShellError::domain)?,
        );
        certify_constant(&orbit, k, choice).map_err(ShellError::domain)?
    } else {
        let orbit = run_orbit(&params);
        let hyp = match (a.k, a.p) {
            (Some(k), Some(p)) => PeriodHypothesis {
                k,
                p,
                repeats_observed: 0,
            },
            _ => report::detect(&orbit, &period_options(&a.period, false)).ok_or_else(|| {
                ShellError::Domain(format!("no period detected within n = {}", a.input.n))
            })?,
        };
        let long = params
            .with_horizon(a.max_horizon)
            .map_err(ShellError::domain)?;
        match a.eta {
            Some(eta) => certify_periodic_streaming(&long, &hyp, eta),
            None => {
                let observed = orbit.min_ambiguity(hyp.k).map_err(ShellError::domain)?;
                certify_auto_streaming(&long, &hyp, observed)
            }
        }
        .map_err(ShellError::domain)?
    };
    write_out(a.out.as_deref(), &json_bytes(&cert))
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    consistent: bool,
    claimed: String,
    recomputed: String,
    mismatches: Vec<String>,
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, ShellError> {
    let text = std::fs::read_to_string(&a.cert).map_err(|source| ShellError::Io {
        path: a.cert.display().to_string(),
        source,
    })?;
    let cert: Certificate64 = serde_json::from_str(&text)
        .map_err(|e| ShellError::Usage(format!("bad certificate: {e}")))?;
    let alpha = f64_from_hex_bits(&cert.alpha_hex)
        .ok_or_else(|| ShellError::Usage(format!("bad alpha_hex {:?}", cert.alpha_hex)))?;
    let z = Complex64::new(cert.z_init[0], cert.z_init[1]);
    let horizon = cert
        .required_horizon
        .unwrap_or(cert.window[1] + 1)
        .max(cert.k + 2 * cert.p + 1);
    let params =
        gsign_core::dynamics::Params::new(alpha, z, horizon).map_err(ShellError::domain)?;
    let hyp = cert.hypothesis();
    let again: Certificate64 = match cert.kind {
        CertificateKind::ConstantSign => {
            let q = cert
                .convergent
                .ok_or_else(|| ShellError::Usage("constant certificate without convergent".into()))?
                .q;
            certify_constant(
                &run_orbit(&params),
                cert.k,
                ConvergentChoice::Denominator(q),
            )
            .map_err(ShellError::domain)?
        }
        CertificateKind::Periodic => {
            let eta = cert
                .eta
                .ok_or_else(|| ShellError::Usage("periodic certificate without eta".into()))?;
            certify_periodic_streaming(&params, &hyp, eta).map_err(ShellError::domain)?
        }
    };
    let mut mismatches = Vec::new();
    if alpha.to_bits() != cert.alpha.to_bits() {
        mismatches.push("alpha does not match alpha_hex".to_string());
    }
    let fields: [(&str, f64, f64); 4] = [
        ("beta", cert.beta, again.beta),
        ("L", cert.lipschitz, again.lipschitz),
        ("threshold", cert.threshold, again.threshold),
        ("observed_min", cert.observed_min, again.observed_min),
    ];
    for (name, x, y) in fields {
        if !same(x, y) {
            mismatches.push(format!("{name}: claimed {x:e}, recomputed {y:e}"));
        }
    }
    if cert.verdict != again.verdict {
        mismatches.push(format!(
            "verdict: claimed {:?}, recomputed {:?}",
            cert.verdict, again.verdict
        ));
    }
    if cert.window != again.window || cert.convergent != again.convergent {
        mismatches.push("window or convergent differs".to_string());
    }
    let rep = VerifyReport {
        consistent: mismatches.is_empty(),
        claimed: format!("{:?}", cert.verdict),
        recomputed: format!("{:?}", again.verdict),
        mismatches,
    };
    write_out(None, &json_bytes(&rep))?;
    Ok(if rep.consistent { 0 } else { 1 })
}

fn cmd_convergents(a: ConvergentsArgs) -> Result<(), ShellError> {
    let x = report::parse_alpha(&a.x)?;
    let list = convergents(x, a.qmax).map_err(ShellError::domain)?;
    write_out(a.out.as_deref(), list.to_tsv().as_bytes())
}

#[derive(Debug, Serialize)]
struct PatternReport {
    alpha: f64,
    alpha_hex: String,
    period: PeriodHypothesis,
    balls: Vec<gsign_core::Ball64>,
    index: i64,
    depth: usize,
    predicate: Option<RegionPredicate<f64>>,
}

fn cmd_regions(a: RegionsArgs) -> Result<(), ShellError> {
    let alpha = report::parse_alpha(&a.alpha)?;
    let (region, doc): (RegionPredicate<f64>, Vec<u8>) = match &a.z {
        None => {
            let disks = report::disks_report(alpha)?;
            let region = RegionPredicate::or(vec![
                RegionPredicate::Ball(disks.minus_disk),
                RegionPredicate::Ball(disks.plus_disk),
            ]);
            (region, json_bytes(&disks))
        }
        Some(z) => {
            let params = report::params(&a.alpha, z, a.n)?;
            let orbit = run_orbit(&params);
            let hyp = report::detect(&orbit, &OrbitOptions::default()).ok_or_else(|| {
                ShellError::Domain(format!("no period detected within n = {}", a.n))
            })?;
            let balls = periodic_forward_balls(&orbit, &hyp).map_err(ShellError::domain)?;
            let pr = pattern_region(orbit.alpha(), hyp.k, &balls, a.depth)
                .map_err(ShellError::domain)?;
            let region = (*pr.predicate).clone();
            let doc = PatternReport {
                alpha: orbit.alpha(),
                alpha_hex: orbit.alpha().to_hex_bits(),
                period: hyp,
                balls,
                index: pr.index,
                depth: a.depth,
                predicate: a.tree.then(|| region.clone()),
            };
            (region, json_bytes(&doc))
        }
    };
    let bytes = match a.format {
        RegionFormat::Json => doc,
        RegionFormat::Pgm => {
            let rect = report::parse_rect(&a.rect)?;
            let res = report::parse_resolution(&a.res)?;
            rasterize_region(&region, &rect, res)
                .map_err(ShellError::domain)?
                .to_pgm()
        }
    };
    write_out(a.out.as_deref(), &bytes)
}

fn cmd_search(a: SearchArgs) -> Result<(), ShellError> {
    let config = SearchConfig {
        alpha_sampler: AlphaSampler::parse(&a.alpha_sampler)
            .map_err(|e| ShellError::Usage(e.to_string()))?,
        z_radius: a.z_radius,
        horizon: a.horizon,
        min_repeats: a.period.min_repeats,
        p_max: a.period.p_max,
        count: a.count,
        seed: a.seed,
        certify: a.certify,
    };
    config
        .validate()
        .map_err(|e| ShellError::Usage(e.to_string()))?;
    let records = random_search(&config).map_err(ShellError::domain)?;
    write_out(a.out.as_deref(), to_jsonl(&records).as_bytes())?;
    let stats = json_bytes(&period_stats(&records));
    match a.summary {
        Some(path) => write_out(Some(&path), &stats),
        None => std::io::stderr()
            .write_all(&stats)
            .map_err(|source| ShellError::Io {
                path: "stderr".into(),
                source,
            }),
    }
}

fn cmd_doubling(a: DoublingArgs) -> Result<(), ShellError> {
    let alpha = report::parse_alpha(&a.input.alpha)?;
    let z = report::parse_z(&a.input.z)?;
    let rep =
        verify_period_doubling(alpha, z, a.input.n, a.min_repeats).map_err(ShellError::domain)?;
    write_out(a.out.as_deref(), &json_bytes(&rep))
}

fn cmd_serve(a: ServeArgs) -> Result<(), ShellError> {
    let mut config = ServiceConfig::load(a.config.as_deref())?;
    if let Some(bind) = a.bind {
        config.bind = bind;
    }
    if let Some(dir) = a.static_dir {
        config.static_dir = Some(dir);
    }
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| ShellError::Io {
            path: "runtime".into(),
            source,
        })?;
    rt.block_on(crate::server::serve(config))
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Orbit(a) => cmd_orbit(a).map(|_| 0),
        Command::Map(a) => cmd_map(a).map(|_| 0),
        Command::Certify(a) => cmd_certify(a).map(|_| 0),
        Command::Verify(a) => cmd_verify(a),
        Command::Convergents(a) => cmd_convergents(a).map(|_| 0),
        Command::Regions(a) => cmd_regions(a).map(|_| 0),
        Command::Search(a) => cmd_search(a).map(|_| 0),
        Command::Doubling(a) => cmd_doubling(a).map(|_| 0),
        Command::Serve(a) => cmd_serve(a).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
