use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fastdscf::analysis::{
    fer_rate1, fer_rate1_approx, fer_spc, fer_spc_approx, pr_natural_correction_with_err,
};
use fastdscf::code::CodeConstructionSource;
use fastdscf::metric::FMode;
use fastdscf::schedule::ScheduleOptions;
use fastdscf::sequence::load_sequence;
use fastdscf::sim::{
    golden_check, golden_emit, run_campaign, run_node_study, summarize, write_csv,
    write_node_study_csv, Algorithm, CampaignConfig, CodeSpec, DecoderSpec, NodeKind, QuantChoice,
    StopRule,
};
use fastdscf::{Error, Result};

#[derive(Parser)]
#[command(name = "fastdscf", about = "Polar-code SC-flip decoding simulator", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo frame-error-rate campaign.
    Fer(FerArgs),
    /// Standalone special-node study: sampled FER vs theoretical limits.
    NodeStudy(NodeStudyArgs),
    /// Theoretical node FER sweeps (exact vs search-span approximation).
    Bounds(BoundsArgs),
    /// Emit or check fixed-point golden vectors.
    Golden(GoldenArgs),
}

#[derive(Args, Default)]
struct CampaignArgs {
    /// Config file with key=value lines mirroring these flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Code dimensions as N,K,C.
    #[arg(long)]
    code: Option<String>,
    /// Construction: "5g", "ga:<designSnrDb>", or "file:<path>".
    #[arg(long)]
    construction: Option<String>,
    /// Decoder: sc, fast-ssc, scf, dscf, fast-dscf, sco, fast-sco.
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    omega: Option<usize>,
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long = "sorter-len")]
    sorter_len: Option<usize>,
    /// Metric correction term: exact | const.
    #[arg(long)]
    fmode: Option<String>,
    /// Quantization profile: none | w1 | w2.
    #[arg(long)]
    quant: Option<String>,
    /// SNR points: "a:b:step" sweep or comma-separated list (Eb/N0 dB).
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "min-errors")]
    min_errors: Option<u64>,
    #[arg(long = "max-frames")]
    max_frames: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Include CRC bits in the rate used for noise scaling.
    #[arg(long = "rate-with-crc")]
    rate_with_crc: bool,
}

#[derive(Args)]
struct FerArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary output path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct NodeStudyArgs {
    /// Node kind: rate1 | spc.
    #[arg(long)]
    kind: String,
    #[arg(long = "node-size")]
    node_size: usize,
    #[arg(long, default_value_t = 1)]
    omega: usize,
    /// Search span for the approximate limit column.
    #[arg(long)]
    delta: Option<usize>,
    /// Mean sweep "a:b:step" or comma-separated list.
    #[arg(long)]
    mu: String,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Node kind: rate1 | spc.
    #[arg(long)]
    kind: String,
    #[arg(long = "node-size")]
    node_size: usize,
    #[arg(long, default_value_t = 1)]
    omega: usize,
    #[arg(long)]
    delta: Option<usize>,
    /// Mean sweep "a:b:step" or comma-separated list.
    #[arg(long)]
    mu: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GoldenArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    /// Number of frames to emit.
    #[arg(long, default_value_t = 100)]
    frames: u64,
    /// Emit vectors to this path (stdout when absent and not checking).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check an existing vector file instead of emitting.
    #[arg(long)]
    check: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidCode(_)
        | Error::InvalidInput(_)
        | Error::SequenceTooShort { .. } => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Fer(args) => cmd_fer(args),
        Cmd::NodeStudy(args) => cmd_node_study(args),
        Cmd::Bounds(args) => cmd_bounds(args),
        Cmd::Golden(args) => cmd_golden(args),
    }
}

/// key=value lines; '#' starts a comment.
fn load_config_file(path: &PathBuf) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("config line {} is not key=value", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_code_spec(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!("--code expects N,K,C, got '{s}'")));
    }
    let parse = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("bad code dimension '{t}'")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

fn parse_construction(s: &str) -> Result<CodeConstructionSource> {
    if s.eq_ignore_ascii_case("5g") {
        return Ok(CodeConstructionSource::FiveGSequence);
    }
    if let Some(db) = s.strip_prefix("ga:") {
        let design_snr_db: f64 = db
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad design SNR '{db}'")))?;
        return Ok(CodeConstructionSource::GaussianApproximation { design_snr_db });
    }
    if let Some(path) = s.strip_prefix("file:") {
        let seq = load_sequence(std::path::Path::new(path))?;
        return Ok(CodeConstructionSource::CustomSequence(seq));
    }
    Err(Error::InvalidConfig(format!("unknown construction '{s}'")))
}

fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = |_| Error::InvalidConfig(format!("bad numeric sweep '{s}'"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!("sweep '{s}' is not a:b:step")));
        }
        let a: f64 = parts[0].trim().parse().map_err(bad)?;
        let b: f64 = parts[1].trim().parse().map_err(bad)?;
        let step: f64 = parts[2].trim().parse().map_err(bad)?;
        if step <= 0.0 || b < a {
            return Err(Error::InvalidConfig(format!("empty sweep '{s}'")));
        }
        let mut out = Vec::new();
        let count = ((b - a) / step + 0.5).floor() as usize;
        for i in 0..=count {
            out.push(a + i as f64 * step);
        }
        return Ok(out);
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(bad))
        .collect()
}

fn parse_fmode(s: &str) -> Result<FMode> {
    match s.to_ascii_lowercase().as_str() {
        "exact" => Ok(FMode::Exact),
        "const" | "constant" => Ok(FMode::ConstantApprox),
        other => Err(Error::InvalidConfig(format!("unknown fmode '{other}'"))),
    }
}

fn build_campaign(args: &CampaignArgs) -> Result<CampaignConfig> {
    let file = match &args.config {
        Some(p) => load_config_file(p)?,
        None => HashMap::new(),
    };
    let get = |flag: Option<&String>, key: &str| -> Option<String> {
        flag.cloned().or_else(|| file.get(key).cloned())
    };
    let code_str = get(args.code.as_ref(), "code")
        .ok_or_else(|| Error::InvalidConfig("--code N,K,C is required".into()))?;
    let (n, k, c) = parse_code_spec(&code_str)?;
    let construction =
        parse_construction(&get(args.construction.as_ref(), "construction").unwrap_or_else(|| "5g".into()))?;
    let algorithm = Algorithm::parse(
        &get(args.decoder.as_ref(), "decoder").unwrap_or_else(|| "fast-dscf".into()),
    )?;
    let parse_num = |s: &str, what: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::InvalidConfig(format!("bad {what} '{s}'")))
    };
    let omega = match get(args.omega.map(|v| v.to_string()).as_ref(), "omega") {
        Some(s) => parse_num(&s, "omega")? as usize,
        None => 1,
    };
    let t_max = match get(args.tmax.map(|v| v.to_string()).as_ref(), "tmax") {
        Some(s) => parse_num(&s, "tmax")? as usize,
        None => 10,
    };
    let mut decoder = DecoderSpec::new(algorithm, omega, t_max);
    decoder.schedule = ScheduleOptions::for_order(omega);
    if let Some(s) = get(args.sorter_len.map(|v| v.to_string()).as_ref(), "sorter-len") {
        decoder.sorter_len = Some(parse_num(&s, "sorter-len")? as usize);
    }
    if let Some(s) = get(args.fmode.as_ref(), "fmode") {
        decoder.f_mode = parse_fmode(&s)?;
    }
    if let Some(s) = get(args.quant.as_ref(), "quant") {
        decoder.quant = QuantChoice::parse(&s)?;
    }
    let snr_str = get(args.snr.as_ref(), "snr")
        .ok_or_else(|| Error::InvalidConfig("--snr is required".into()))?;
    let snrs_db = parse_sweep(&snr_str)?;
    let seed = match get(args.seed.map(|v| v.to_string()).as_ref(), "seed") {
        Some(s) => parse_num(&s, "seed")?,
        None => 0,
    };
    let mut stop = StopRule::default();
    if let Some(s) = get(args.min_errors.map(|v| v.to_string()).as_ref(), "min-errors") {
        stop.min_errors = parse_num(&s, "min-errors")?;
    }
    if let Some(s) = get(args.max_frames.map(|v| v.to_string()).as_ref(), "max-frames") {
        stop.max_frames = parse_num(&s, "max-frames")?;
    }
    let workers = match get(args.workers.map(|v| v.to_string()).as_ref(), "workers") {
        Some(s) => parse_num(&s, "workers")? as usize,
        None => 0,
    };
    let rate_with_crc = args.rate_with_crc
        || file
            .get("rate-with-crc")
            .is_some_and(|v| v == "true" || v == "1");
    Ok(CampaignConfig {
        code: CodeSpec { n, k, c, construction },
        decoder,
        snrs_db,
        seed,
        stop,
        workers,
        rate_with_crc,
    })
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn std::io::Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    })
}

fn cmd_fer(args: FerArgs) -> Result<()> {
    let cfg = build_campaign(&args.campaign)?;
    let result = run_campaign(&cfg)?;
    let mut out = open_out(&args.out)?;
    write_csv(&result.points, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.summary {
        let summary = summarize(&cfg, &result);
        let json = serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::InvalidInput(format!("summary serialization: {e}")))?;
        fs::write(path, json)?;
    }
    Ok(())
}

fn cmd_node_study(args: NodeStudyArgs) -> Result<()> {
    let kind = NodeKind::parse(&args.kind)?;
    let mu = parse_sweep(&args.mu)?;
    let rows = run_node_study(
        kind,
        args.node_size,
        args.omega,
        args.delta,
        &mu,
        args.samples,
        args.seed,
    )?;
    let mut out = open_out(&args.out)?;
    write_node_study_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let kind = NodeKind::parse(&args.kind)?;
    let mu_list = parse_sweep(&args.mu)?;
    let delta = args.delta.unwrap_or(args.node_size);
    let mut out = open_out(&args.out)?;
    writeln!(out, "mu,fer_exact,fer_approx_delta,abs_error_estimate")?;
    for &mu in &mu_list {
        let (exact, approx, err) = match kind {
            NodeKind::Rate1 => (
                fer_rate1(args.node_size, mu, args.omega)?,
                fer_rate1_approx(args.node_size, mu, args.omega, delta)?,
                0.0,
            ),
            NodeKind::Spc => {
                let (_, err) = pr_natural_correction_with_err(
                    args.node_size,
                    mu,
                    (2.0 * mu).sqrt(),
                    2 * args.omega,
                )?;
                (
                    fer_spc(args.node_size, mu, args.omega)?,
                    fer_spc_approx(args.node_size, mu, args.omega, delta)?,
                    err,
                )
            }
        };
        writeln!(out, "{mu:.6},{exact:.10e},{approx:.10e},{err:.3e}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_golden(args: GoldenArgs) -> Result<()> {
    let cfg = build_campaign(&args.campaign)?;
    if let Some(check_path) = &args.check {
        let text = fs::read_to_string(check_path)?;
        let mismatches = golden_check(&cfg, &text)?;
        if mismatches > 0 {
            eprintln!("error: golden check failed on {mismatches} frame(s)");
            std::process::exit(2);
        }
        println!("golden check passed");
        return Ok(());
    }
    let mut out = open_out(&args.out)?;
    golden_emit(&cfg, args.frames, &mut out)?;
    out.flush()?;
    Ok(())
}
