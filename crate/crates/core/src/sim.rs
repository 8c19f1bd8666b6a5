//! Seeded parallel Monte Carlo campaigns, node-level theory/simulation
//! studies, and golden-vector emission for the fixed-point datapath.
//!
//! Every emitted number is a function of (seed, config) alone: frame i draws
//! from RNG stream i, frames are processed in fixed-size batches, and
//! results are merged with order-independent sums, so the worker count never
//! changes a counter.

use std::time::Instant;

use rand::prelude::*;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{fer_rate1, fer_rate1_approx, fer_spc, fer_spc_approx};
use crate::channel::{frame_rng, transmit, ChannelConfig};
use crate::code::{construct_code, CodeConstructionSource, PolarCode};
use crate::metric::{FMode, FlipSet, MetricConfig};
use crate::quant::{NumericModel, QuantProfile};
use crate::sc::{decode_fast, decode_leafwise};
use crate::schedule::{build_schedule, DecodeSchedule, ScheduleOptions};
use crate::scheduler::{
    fast_dscf_decode, fast_sco_decode, leaf_dscf_decode, sco_decode, SchedulerConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sc,
    FastSsc,
    Scf,
    Dscf,
    FastDscf,
    Sco,
    FastSco,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sc" => Self::Sc,
            "fast-ssc" | "fastssc" => Self::FastSsc,
            "scf" => Self::Scf,
            "dscf" => Self::Dscf,
            "fast-dscf" | "fastdscf" => Self::FastDscf,
            "sco" => Self::Sco,
            "fast-sco" | "fastsco" => Self::FastSco,
            other => return Err(Error::InvalidConfig(format!("unknown decoder '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sc => "sc",
            Self::FastSsc => "fast-ssc",
            Self::Scf => "scf",
            Self::Dscf => "dscf",
            Self::FastDscf => "fast-dscf",
            Self::Sco => "sco",
            Self::FastSco => "fast-sco",
        }
    }

    fn uses_schedule(self) -> bool {
        matches!(self, Self::FastSsc | Self::FastDscf | Self::FastSco)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantChoice {
    None,
    W1,
    W2,
}

impl QuantChoice {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "none" => Self::None,
            "w1" => Self::W1,
            "w2" => Self::W2,
            other => return Err(Error::InvalidConfig(format!("unknown quant profile '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::W1 => "w1",
            Self::W2 => "w2",
        }
    }

    pub fn profile(self) -> Option<QuantProfile> {
        match self {
            Self::None => None,
            Self::W1 => Some(QuantProfile::w1()),
            Self::W2 => Some(QuantProfile::w2()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CodeSpec {
    pub n: usize,
    pub k: usize,
    pub c: usize,
    pub construction: CodeConstructionSource,
}

#[derive(Debug, Clone)]
pub struct DecoderSpec {
    pub algorithm: Algorithm,
    pub omega: usize,
    pub t_max: usize,
    /// Sorter capacity; derived from omega and t_max when absent.
    pub sorter_len: Option<usize>,
    pub f_mode: FMode,
    pub span_rate1: usize,
    pub span_spc: usize,
    pub quant: QuantChoice,
    pub schedule: ScheduleOptions,
}

impl DecoderSpec {
    pub fn new(algorithm: Algorithm, omega: usize, t_max: usize) -> Self {
        Self {
            algorithm,
            omega,
            t_max,
            sorter_len: None,
            f_mode: FMode::Exact,
            span_rate1: 2,
            span_spc: 4,
            quant: QuantChoice::None,
            schedule: ScheduleOptions::for_order(omega),
        }
    }

    fn metric_config(&self) -> MetricConfig {
        MetricConfig {
            alpha: crate::metric::DEFAULT_ALPHA,
            f_mode: self.f_mode,
            span_rate1: self.span_rate1,
            span_spc: self.span_spc,
        }
    }

    fn scheduler_config(&self) -> SchedulerConfig {
        let mut cfg = SchedulerConfig::new(self.omega, self.t_max, self.metric_config());
        if let Some(l) = self.sorter_len {
            cfg.sorter_len = l;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_errors: 100, max_frames: 10_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub code: CodeSpec,
    pub decoder: DecoderSpec,
    pub snrs_db: Vec<f64>,
    pub seed: u64,
    pub stop: StopRule,
    /// 0 selects the thread pool default.
    pub workers: usize,
    /// Include the CRC bits in the rate used for noise scaling.
    pub rate_with_crc: bool,
}

impl CampaignConfig {
    pub fn rate(&self) -> f64 {
        let k = if self.rate_with_crc { self.code.k + self.code.c } else { self.code.k };
        k as f64 / self.code.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.code;
        if !c.n.is_power_of_two() || c.n < 2 {
            return Err(Error::InvalidConfig(format!("N = {} is not a power of two", c.n)));
        }
        if c.k == 0 || c.k + c.c > c.n {
            return Err(Error::InvalidConfig(format!(
                "K + C = {} does not fit N = {}",
                c.k + c.c,
                c.n
            )));
        }
        let d = &self.decoder;
        let needs_flips = matches!(d.algorithm, Algorithm::Scf | Algorithm::Dscf | Algorithm::FastDscf);
        if needs_flips && d.omega == 0 {
            return Err(Error::InvalidConfig("flip decoding requires omega >= 1".into()));
        }
        if needs_flips && c.c == 0 {
            return Err(Error::InvalidConfig("flip decoding requires a CRC".into()));
        }
        if let Some(l) = d.sorter_len {
            if l == 0 {
                return Err(Error::InvalidConfig("sorter length must be >= 1".into()));
            }
        }
        if d.span_rate1 == 0 || d.span_spc < 2 {
            return Err(Error::InvalidConfig("search spans must cover candidates".into()));
        }
        if self.stop.min_errors == 0 || self.stop.max_frames == 0 {
            return Err(Error::InvalidConfig("stop rule must be positive".into()));
        }
        if self.snrs_db.is_empty() {
            return Err(Error::InvalidConfig("no SNR points given".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SnrPointResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub fer_ci_low: f64,
    pub fer_ci_high: f64,
    pub ber: f64,
    pub avg_attempts: f64,
    pub avg_node_visits: f64,
    pub llr_saturations: u64,
    pub metric_saturations: u64,
    pub attempt_histogram: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignResult {
    pub points: Vec<SnrPointResult>,
    /// Excluded from the CSV body so re-runs stay byte-identical.
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default)]
struct FrameStats {
    error: bool,
    bit_errors: u64,
    attempts: u64,
    node_visits: u64,
    llr_saturations: u64,
    metric_saturations: u64,
}

#[derive(Debug, Clone)]
struct PointAccum {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
    attempts_sum: u64,
    node_visits_sum: u64,
    llr_saturations: u64,
    metric_saturations: u64,
    attempt_hist: Vec<u64>,
}

impl PointAccum {
    fn new(hist_len: usize) -> Self {
        Self {
            frames: 0,
            frame_errors: 0,
            bit_errors: 0,
            attempts_sum: 0,
            node_visits_sum: 0,
            llr_saturations: 0,
            metric_saturations: 0,
            attempt_hist: vec![0; hist_len],
        }
    }

    fn add_frame(&mut self, s: &FrameStats) {
        self.frames += 1;
        self.frame_errors += u64::from(s.error);
        self.bit_errors += s.bit_errors;
        self.attempts_sum += s.attempts;
        self.node_visits_sum += s.node_visits;
        self.llr_saturations += s.llr_saturations;
        self.metric_saturations += s.metric_saturations;
        let idx = (s.attempts as usize).min(self.attempt_hist.len() - 1);
        self.attempt_hist[idx] += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        self.frames += other.frames;
        self.frame_errors += other.frame_errors;
        self.bit_errors += other.bit_errors;
        self.attempts_sum += other.attempts_sum;
        self.node_visits_sum += other.node_visits_sum;
        self.llr_saturations += other.llr_saturations;
        self.metric_saturations += other.metric_saturations;
        for (a, b) in self.attempt_hist.iter_mut().zip(&other.attempt_hist) {
            *a += b;
        }
        self
    }
}

struct PointContext<'a> {
    code: &'a PolarCode,
    schedule: Option<&'a DecodeSchedule>,
    spec: &'a DecoderSpec,
    sched_cfg: SchedulerConfig,
    sigma2: f64,
    seed: u64,
}

fn simulate_frame(ctx: &PointContext<'_>, frame_idx: u64) -> Result<FrameStats> {
    let code = ctx.code;
    let mut rng = frame_rng(ctx.seed, frame_idx);
    let msg: Vec<u8> = (0..code.info_len).map(|_| rng.gen_range(0..2u8)).collect();
    let x = code.encode(&msg).expect("validated dimensions");
    let u_true = code.assemble_u(&msg).expect("validated dimensions");
    let y_raw = transmit(&x, ctx.sigma2, &mut rng);
    let model = match ctx.spec.quant.profile() {
        None => NumericModel::exact(),
        Some(p) => NumericModel::fixed(p),
    };
    let y: Vec<f64> = y_raw.iter().map(|&v| model.quantize_channel(v)).collect();

    let mut stats = FrameStats::default();
    match ctx.spec.algorithm {
        Algorithm::Sc => {
            let out = decode_leafwise(code, &y, &[], &model)?;
            stats.error = out.u_hat != u_true;
            stats.bit_errors = count_bit_errors(&out.info_bits, &msg);
            stats.node_visits = out.node_visits;
        }
        Algorithm::FastSsc => {
            let out = decode_fast(
                code,
                ctx.schedule.expect("schedule built"),
                &y,
                &FlipSet::empty(),
                &model,
                false,
            )?;
            stats.error = out.u_hat != u_true;
            stats.bit_errors = count_bit_errors(&out.info_bits, &msg);
            stats.node_visits = out.node_visits;
        }
        Algorithm::Scf | Algorithm::Dscf => {
            let use_perturbation = ctx.spec.algorithm == Algorithm::Dscf;
            let res = leaf_dscf_decode(code, &y, &ctx.sched_cfg, use_perturbation, &model, false)?;
            stats.error = res.outcome.u_hat != u_true;
            stats.bit_errors = count_bit_errors(&res.outcome.info_bits, &msg);
            stats.attempts = res.attempts as u64;
            stats.node_visits = res.outcome.node_visits;
        }
        Algorithm::FastDscf => {
            let res = fast_dscf_decode(
                code,
                ctx.schedule.expect("schedule built"),
                &y,
                &ctx.sched_cfg,
                &model,
                false,
            )?;
            stats.error = res.outcome.u_hat != u_true;
            stats.bit_errors = count_bit_errors(&res.outcome.info_bits, &msg);
            stats.attempts = res.attempts as u64;
            stats.node_visits = res.outcome.node_visits;
        }
        Algorithm::Sco => {
            let (ok, flips) = sco_decode(code, &y, &u_true, ctx.spec.omega, &model)?;
            stats.error = !ok;
            stats.attempts = flips;
        }
        Algorithm::FastSco => {
            let (ok, flips) = fast_sco_decode(
                code,
                ctx.schedule.expect("schedule built"),
                &y,
                &u_true,
                ctx.spec.omega,
                &model,
            )?;
            stats.error = !ok;
            stats.attempts = flips;
        }
    }
    stats.llr_saturations = model.llr_saturations();
    stats.metric_saturations = model.metric_saturations();
    Ok(stats)
}

fn count_bit_errors(info_bits: &[u8], msg: &[u8]) -> u64 {
    info_bits
        .iter()
        .zip(msg)
        .filter(|(a, b)| a != b)
        .count() as u64
}

/// Frames per scheduling unit; fixed so stop decisions are independent of
/// the worker count.
const BATCH_FRAMES: u64 = 256;

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let start = Instant::now();
    let code = construct_code(cfg.code.n, cfg.code.k, cfg.code.c, &cfg.code.construction)?;
    let schedule = if cfg.decoder.algorithm.uses_schedule() {
        Some(build_schedule(&code, &cfg.decoder.schedule))
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let mut points = Vec::new();
    for &ebn0_db in &cfg.snrs_db {
        let ch = ChannelConfig { ebn0_db, rate: cfg.rate(), seed: cfg.seed };
        let ctx = PointContext {
            code: &code,
            schedule: schedule.as_ref(),
            spec: &cfg.decoder,
            sched_cfg: cfg.decoder.scheduler_config(),
            sigma2: ch.noise_variance(),
            // decorrelate SNR points while keeping frame i reproducible
            seed: cfg.seed ^ (ebn0_db.to_bits().rotate_left(17)),
        };
        let hist_len = cfg.decoder.t_max + 1;
        let mut acc = PointAccum::new(hist_len);
        let mut next_frame = 0u64;
        while next_frame < cfg.stop.max_frames && acc.frame_errors < cfg.stop.min_errors {
            let count = BATCH_FRAMES.min(cfg.stop.max_frames - next_frame);
            let batch = pool.install(|| {
                (next_frame..next_frame + count)
                    .into_par_iter()
                    .map(|i| {
                        let s = simulate_frame(&ctx, i).expect("frame simulation");
                        let mut a = PointAccum::new(hist_len);
                        a.add_frame(&s);
                        a
                    })
                    .reduce(|| PointAccum::new(hist_len), PointAccum::merge)
            });
            acc = acc.merge(batch);
            next_frame += count;
        }
        points.push(finish_point(ebn0_db, &acc));
    }
    Ok(CampaignResult { points, wall_time_s: start.elapsed().as_secs_f64() })
}

fn finish_point(ebn0_db: f64, acc: &PointAccum) -> SnrPointResult {
    let frames = acc.frames.max(1);
    let fer = acc.frame_errors as f64 / frames as f64;
    let half = 1.96 * (fer * (1.0 - fer) / frames as f64).sqrt();
    SnrPointResult {
        ebn0_db,
        frames: acc.frames,
        frame_errors: acc.frame_errors,
        bit_errors: acc.bit_errors,
        fer,
        fer_ci_low: (fer - half).max(0.0),
        fer_ci_high: (fer + half).min(1.0),
        ber: acc.bit_errors as f64 / frames as f64,
        avg_attempts: acc.attempts_sum as f64 / frames as f64,
        avg_node_visits: acc.node_visits_sum as f64 / frames as f64,
        llr_saturations: acc.llr_saturations,
        metric_saturations: acc.metric_saturations,
        attempt_histogram: acc.attempt_hist.clone(),
    }
}

/// Fixed-column CSV body; deterministic for a given (seed, config).
pub fn write_csv<W: std::io::Write>(points: &[SnrPointResult], mut w: W) -> Result<()> {
    writeln!(
        w,
        "ebn0_db,frames,frame_errors,bit_errors,fer,fer_ci_low,fer_ci_high,ber,avg_attempts,avg_node_visits,llr_saturations,metric_saturations"
    )?;
    for p in points {
        writeln!(
            w,
            "{:.4},{},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{},{}",
            p.ebn0_db,
            p.frames,
            p.frame_errors,
            p.bit_errors,
            p.fer,
            p.fer_ci_low,
            p.fer_ci_high,
            p.ber,
            p.avg_attempts,
            p.avg_node_visits,
            p.llr_saturations,
            p.metric_saturations,
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignSummary {
    pub code_n: usize,
    pub code_k: usize,
    pub code_c: usize,
    pub decoder: String,
    pub omega: usize,
    pub t_max: usize,
    pub quant: String,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_s: f64,
    pub points: Vec<SnrPointResult>,
}

pub fn summarize(cfg: &CampaignConfig, result: &CampaignResult) -> CampaignSummary {
    CampaignSummary {
        code_n: cfg.code.n,
        code_k: cfg.code.k,
        code_c: cfg.code.c,
        decoder: cfg.decoder.algorithm.name().to_string(),
        omega: cfg.decoder.omega,
        t_max: cfg.decoder.t_max,
        quant: cfg.decoder.quant.name().to_string(),
        seed: cfg.seed,
        workers: cfg.workers,
        wall_time_s: result.wall_time_s,
        points: result.points.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Rate1,
    Spc,
}

impl NodeKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "rate1" | "rate-1" => Self::Rate1,
            "spc" => Self::Spc,
            other => return Err(Error::InvalidConfig(format!("unknown node kind '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeStudyRow {
    pub mu: f64,
    pub empirical_fer: f64,
    pub theory_exact: f64,
    pub theory_approx: Option<f64>,
    pub samples: u64,
}

/// Standalone-node study: direct Gaussian sampling of top-level LLRs with
/// genie correction, tabulated against the theoretical limits.
pub fn run_node_study(
    kind: NodeKind,
    node_size: usize,
    omega: usize,
    delta: Option<usize>,
    mu_list: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<NodeStudyRow>> {
    let mut rows = Vec::new();
    for (pi, &mu) in mu_list.iter().enumerate() {
        if mu <= 0.0 {
            return Err(Error::InvalidConfig("mu must be positive".into()));
        }
        let sigma = (2.0 * mu).sqrt();
        let mut fails = 0u64;
        let mut rng = frame_rng(seed, pi as u64);
        let mut llr = vec![0.0f64; node_size];
        for _ in 0..samples {
            for v in &mut llr {
                *v = mu + sigma * rng.sample::<f64, _>(StandardNormal);
            }
            let errors = llr.iter().filter(|&&v| v < 0.0).count();
            let failed = match kind {
                NodeKind::Rate1 => errors > omega,
                NodeKind::Spc => {
                    let after_fix = if errors % 2 == 0 {
                        errors
                    } else {
                        let mut i_min = 0;
                        for (i, &v) in llr.iter().enumerate().skip(1) {
                            if v.abs() < llr[i_min].abs() {
                                i_min = i;
                            }
                        }
                        if llr[i_min] < 0.0 {
                            errors - 1
                        } else {
                            errors + 1
                        }
                    };
                    after_fix > 2 * omega
                }
            };
            fails += u64::from(failed);
        }
        let theory_exact = match kind {
            NodeKind::Rate1 => fer_rate1(node_size, mu, omega)?,
            NodeKind::Spc => fer_spc(node_size, mu, omega)?,
        };
        let theory_approx = match delta {
            None => None,
            Some(d) => Some(match kind {
                NodeKind::Rate1 => fer_rate1_approx(node_size, mu, omega, d)?,
                NodeKind::Spc => fer_spc_approx(node_size, mu, omega, d)?,
            }),
        };
        rows.push(NodeStudyRow {
            mu,
            empirical_fer: fails as f64 / samples as f64,
            theory_exact,
            theory_approx,
            samples,
        });
    }
    Ok(rows)
}

pub fn write_node_study_csv<W: std::io::Write>(rows: &[NodeStudyRow], mut w: W) -> Result<()> {
    writeln!(w, "mu,empirical_fer,theory_exact,theory_approx,samples")?;
    for r in rows {
        let approx = r
            .theory_approx
            .map_or_else(|| "".to_string(), |v| format!("{v:.10e}"));
        writeln!(
            w,
            "{:.6},{:.10e},{:.10e},{},{}",
            r.mu, r.empirical_fer, r.theory_exact, approx, r.samples
        )?;
    }
    Ok(())
}

/// Emit golden vectors: per frame, the fixed-point channel LLRs (integer
/// units of the channel format step), the expected hard output, and the
/// attempt count. Requires a quantization profile.
pub fn golden_emit(cfg: &CampaignConfig, frames: u64, mut w: impl std::io::Write) -> Result<()> {
    cfg.validate()?;
    let profile = cfg
        .decoder
        .quant
        .profile()
        .ok_or_else(|| Error::InvalidConfig("golden vectors require a quant profile".into()))?;
    let step = profile.channel.step();
    let code = construct_code(cfg.code.n, cfg.code.k, cfg.code.c, &cfg.code.construction)?;
    let schedule = if cfg.decoder.algorithm.uses_schedule() {
        Some(build_schedule(&code, &cfg.decoder.schedule))
    } else {
        None
    };
    let ebn0_db = cfg.snrs_db[0];
    let ch = ChannelConfig { ebn0_db, rate: cfg.rate(), seed: cfg.seed };
    let ctx = PointContext {
        code: &code,
        schedule: schedule.as_ref(),
        spec: &cfg.decoder,
        sched_cfg: cfg.decoder.scheduler_config(),
        sigma2: ch.noise_variance(),
        seed: cfg.seed ^ (ebn0_db.to_bits().rotate_left(17)),
    };
    writeln!(
        w,
        "# golden vectors: decoder={} N={} K={} C={} quant={} ebn0_db={} seed={}",
        cfg.decoder.algorithm.name(),
        cfg.code.n,
        cfg.code.k,
        cfg.code.c,
        cfg.decoder.quant.name(),
        ebn0_db,
        cfg.seed
    )?;
    for i in 0..frames {
        let (y, out) = golden_frame(&ctx, i)?;
        writeln!(w, "frame {i}")?;
        let ints: Vec<String> = y.iter().map(|&v| format!("{}", (v / step).round() as i64)).collect();
        writeln!(w, "llr {}", ints.join(" "))?;
        let bits: String = out.u_hat.iter().map(|&b| char::from(b'0' + b)).collect();
        writeln!(w, "u {bits}")?;
        writeln!(w, "attempts {}", out.attempts)?;
    }
    Ok(())
}

struct GoldenFrame {
    u_hat: Vec<u8>,
    attempts: u64,
}

fn golden_frame(ctx: &PointContext<'_>, frame_idx: u64) -> Result<(Vec<f64>, GoldenFrame)> {
    let code = ctx.code;
    let mut rng = frame_rng(ctx.seed, frame_idx);
    let msg: Vec<u8> = (0..code.info_len).map(|_| rng.gen_range(0..2u8)).collect();
    let x = code.encode(&msg).expect("validated dimensions");
    let y_raw = transmit(&x, ctx.sigma2, &mut rng);
    let model = NumericModel::fixed(ctx.spec.quant.profile().expect("profile checked"));
    let y: Vec<f64> = y_raw.iter().map(|&v| model.quantize_channel(v)).collect();
    let (u_hat, attempts) = match ctx.spec.algorithm {
        Algorithm::Sc => (decode_leafwise(code, &y, &[], &model)?.u_hat, 0),
        Algorithm::FastSsc => (
            decode_fast(code, ctx.schedule.expect("schedule"), &y, &FlipSet::empty(), &model, false)?
                .u_hat,
            0,
        ),
        Algorithm::Scf | Algorithm::Dscf => {
            let res = leaf_dscf_decode(
                code,
                &y,
                &ctx.sched_cfg,
                ctx.spec.algorithm == Algorithm::Dscf,
                &model,
                false,
            )?;
            (res.outcome.u_hat, res.attempts as u64)
        }
        Algorithm::FastDscf => {
            let res = fast_dscf_decode(
                code,
                ctx.schedule.expect("schedule"),
                &y,
                &ctx.sched_cfg,
                &model,
                false,
            )?;
            (res.outcome.u_hat, res.attempts as u64)
        }
        Algorithm::Sco | Algorithm::FastSco => {
            return Err(Error::InvalidConfig("golden vectors target real decoders".into()))
        }
    };
    Ok((y, GoldenFrame { u_hat, attempts }))
}

/// Re-run the frames described by a golden-vector file and compare.
/// Returns the number of mismatching frames.
pub fn golden_check(cfg: &CampaignConfig, text: &str) -> Result<u64> {
    cfg.validate()?;
    let profile = cfg
        .decoder
        .quant
        .profile()
        .ok_or_else(|| Error::InvalidConfig("golden vectors require a quant profile".into()))?;
    let step = profile.channel.step();
    let code = construct_code(cfg.code.n, cfg.code.k, cfg.code.c, &cfg.code.construction)?;
    let schedule = if cfg.decoder.algorithm.uses_schedule() {
        Some(build_schedule(&code, &cfg.decoder.schedule))
    } else {
        None
    };
    let ebn0_db = cfg.snrs_db[0];
    let ch = ChannelConfig { ebn0_db, rate: cfg.rate(), seed: cfg.seed };
    let ctx = PointContext {
        code: &code,
        schedule: schedule.as_ref(),
        spec: &cfg.decoder,
        sched_cfg: cfg.decoder.scheduler_config(),
        sigma2: ch.noise_variance(),
        seed: cfg.seed ^ (ebn0_db.to_bits().rotate_left(17)),
    };
    let mut mismatches = 0u64;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    while let Some(header) = lines.next() {
        let idx: u64 = header
            .strip_prefix("frame ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("bad golden header '{header}'")))?;
        let llr_line = lines
            .next()
            .and_then(|l| l.strip_prefix("llr "))
            .ok_or_else(|| Error::InvalidInput("missing llr line".into()))?;
        let u_line = lines
            .next()
            .and_then(|l| l.strip_prefix("u "))
            .ok_or_else(|| Error::InvalidInput("missing u line".into()))?;
        let attempts_line = lines
            .next()
            .and_then(|l| l.strip_prefix("attempts "))
            .ok_or_else(|| Error::InvalidInput("missing attempts line".into()))?;
        let (y, out) = golden_frame(&ctx, idx)?;
        let expect_llr: Vec<i64> = llr_line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::InvalidInput("bad llr value".into())))
            .collect::<Result<_>>()?;
        let got_llr: Vec<i64> = y.iter().map(|&v| (v / step).round() as i64).collect();
        let expect_u: Vec<u8> = u_line.trim().bytes().map(|b| b - b'0').collect();
        let expect_attempts: u64 = attempts_line
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput("bad attempts value".into()))?;
        if got_llr != expect_llr || out.u_hat != expect_u || out.attempts != expect_attempts {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_campaign(workers: usize, algorithm: Algorithm) -> CampaignConfig {
        CampaignConfig {
            code: CodeSpec { n: 128, k: 48, c: 16, construction: CodeConstructionSource::FiveGSequence },
            decoder: DecoderSpec::new(algorithm, 1, 8),
            snrs_db: vec![2.0],
            seed: 99,
            stop: StopRule { min_errors: 30, max_frames: 3000 },
            workers,
            rate_with_crc: false,
        }
    }

    #[test]
    fn worker_count_invariance() {
        let a = run_campaign(&small_campaign(1, Algorithm::FastDscf)).unwrap();
        let b = run_campaign(&small_campaign(4, Algorithm::FastDscf)).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_csv(&a.points, &mut csv_a).unwrap();
        write_csv(&b.points, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        assert_eq!(a.points[0].attempt_histogram, b.points[0].attempt_histogram);
    }

    #[test]
    fn sc_at_high_snr_is_clean() {
        let mut cfg = small_campaign(0, Algorithm::Sc);
        cfg.snrs_db = vec![5.0];
        cfg.stop = StopRule { min_errors: 100, max_frames: 2000 };
        let res = run_campaign(&cfg).unwrap();
        let p = &res.points[0];
        assert!(p.fer < 0.05, "fer {}", p.fer);
        assert_eq!(p.avg_attempts, 0.0);
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let mut cfg = small_campaign(1, Algorithm::Dscf);
        cfg.code.k = 1000;
        assert!(cfg.validate().is_err());
        let mut cfg = small_campaign(1, Algorithm::Dscf);
        cfg.decoder.omega = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_campaign(1, Algorithm::Scf);
        cfg.code.c = 0;
        cfg.code.k = 64;
        assert!(cfg.validate().is_err());
        let mut cfg = small_campaign(1, Algorithm::Sc);
        cfg.snrs_db.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn node_study_matches_theory_within_ci() {
        let rows =
            run_node_study(NodeKind::Rate1, 16, 1, Some(16), &[6.0], 200_000, 5).unwrap();
        let r = &rows[0];
        let ci = 3.0 * (r.theory_exact * (1.0 - r.theory_exact) / r.samples as f64).sqrt();
        assert!((r.empirical_fer - r.theory_exact).abs() <= ci + 1e-9);
        assert!((r.theory_approx.unwrap() - r.theory_exact).abs() < 1e-10);
    }

    #[test]
    fn golden_roundtrip() {
        let mut cfg = small_campaign(1, Algorithm::FastDscf);
        cfg.decoder.quant = QuantChoice::W1;
        let mut buf = Vec::new();
        golden_emit(&cfg, 20, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(golden_check(&cfg, &text).unwrap(), 0);
        // a corrupted vector is detected
        let bad = text.replacen("attempts 0", "attempts 7", 1);
        if bad != text {
            assert!(golden_check(&cfg, &bad).unwrap() > 0);
        }
    }

    #[test]
    fn oracle_runs_and_lower_bounds_decoder() {
        let dec = run_campaign(&small_campaign(0, Algorithm::FastDscf)).unwrap();
        let ora = run_campaign(&small_campaign(0, Algorithm::FastSco)).unwrap();
        assert!(ora.points[0].fer <= dec.points[0].fer + 1e-12);
    }
}
