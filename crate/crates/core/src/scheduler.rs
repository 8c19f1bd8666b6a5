//! Dynamic SC-flip outer loop, bounded candidate sorter, and the
//! oracle-assisted performance-limit decoders.
//!
//! The candidate sorter keeps at most `l` elements in ascending metric
//! order. Metric ties break FIFO (the earlier insertion wins) so replays
//! are deterministic. Each pop renormalizes the remaining metrics by the
//! popped value, which keeps stored metrics small and non-negative.

use crate::code::PolarCode;
use crate::metric::{
    gen_candidates, gen_candidates_leafwise, FlipSet, MetricConfig,
};
use crate::quant::NumericModel;
use crate::sc::{decode_fast, decode_leafwise, sco_fast, sco_leafwise, DecodeOutcome};
use crate::schedule::DecodeSchedule;
use crate::Result;

/// A stored bit-flip candidate awaiting its decoding attempt.
#[derive(Debug, Clone)]
pub struct SortElement<T> {
    pub payload: T,
    /// Error order: number of flip coordinates in the payload.
    pub order: usize,
    pub metric: f64,
}

/// Bounded metric-ascending candidate list.
#[derive(Debug, Clone)]
pub struct CandidateList<T> {
    elems: Vec<SortElement<T>>,
    capacity: usize,
}

impl<T> CandidateList<T> {
    pub fn new(capacity: usize) -> Self {
        Self { elems: Vec::new(), capacity: capacity.max(1) }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn metrics(&self) -> Vec<f64> {
        self.elems.iter().map(|e| e.metric).collect()
    }

    /// Returns whether the element was retained.
    pub fn insert(&mut self, payload: T, order: usize, metric: f64) -> bool {
        // ties land after existing equals: FIFO tie-breaking
        let pos = self.elems.partition_point(|e| e.metric <= metric);
        if pos >= self.capacity {
            return false;
        }
        self.elems.insert(pos, SortElement { payload, order, metric });
        self.elems.truncate(self.capacity);
        true
    }

    /// Insert a pre-sorted batch (the hardware handles up to three per
    /// cycle; element order is what matters for tie-breaking).
    pub fn insert_batch(&mut self, batch: Vec<(T, usize, f64)>, model: &NumericModel) {
        let _ = model;
        for (payload, order, metric) in batch {
            self.insert(payload, order, metric);
        }
    }

    /// Remove and return the best element, renormalizing the remaining
    /// metrics by its metric.
    ///
    /// Popping an element whose metric is clamped at the quantization
    /// ceiling counts as a metric saturation: its rank among equally
    /// clamped candidates is arbitrary, which is the event that
    /// disorganizes the flip order.
    pub fn pop_best(&mut self, model: &NumericModel) -> Option<SortElement<T>> {
        if self.elems.is_empty() {
            return None;
        }
        let best = self.elems.remove(0);
        if model.metric_ceiling() == Some(best.metric) {
            model.note_metric_saturation();
        }
        for e in &mut self.elems {
            e.metric = model.metric_sub(e.metric, best.metric);
        }
        Some(best)
    }
}

#[derive(Debug, Clone)]
pub struct SchedulerConfig {
    /// Maximum error order.
    pub omega: usize,
    /// Maximum number of extra decoding attempts.
    pub t_max: usize,
    /// Sorter capacity.
    pub sorter_len: usize,
    pub metric: MetricConfig,
}

impl SchedulerConfig {
    pub fn new(omega: usize, t_max: usize, metric: MetricConfig) -> Self {
        Self { omega, t_max, sorter_len: default_sorter_len(omega, t_max), metric }
    }
}

/// Default sorter capacity: the full attempt budget at order 1, half of it
/// at higher orders.
pub fn default_sorter_len(omega: usize, t_max: usize) -> usize {
    let l = if omega <= 1 { t_max } else { t_max / 2 };
    l.max(1)
}

/// What one extra decoding attempt executed.
#[derive(Debug, Clone)]
pub enum FlipAction {
    Nodes(FlipSet),
    Leaves(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct AttemptRecord {
    pub t: usize,
    pub order: usize,
    pub action: FlipAction,
    pub metric: f64,
    pub crc_pass: bool,
}

impl AttemptRecord {
    /// One-line structured form for trace dumps.
    pub fn to_line(&self) -> String {
        let coords = match &self.action {
            FlipAction::Nodes(set) => set
                .coords()
                .iter()
                .map(|c| format!("{}:{:?}{:?}", c.node, c.kind, c.indices))
                .collect::<Vec<_>>()
                .join(","),
            FlipAction::Leaves(v) => v
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(","),
        };
        format!(
            "t={} order={} coords=[{}] metric={:.6} crc={}",
            self.t, self.order, coords, self.metric, self.crc_pass
        )
    }
}

#[derive(Debug, Clone)]
pub struct SchedulerResult {
    pub outcome: DecodeOutcome,
    /// Extra attempts consumed (0 when the initial pass already passes CRC).
    pub attempts: usize,
    pub crc_pass: bool,
    pub trace: Vec<AttemptRecord>,
}

/// Node-level dynamic SC-flip decoding over a pruned schedule.
pub fn fast_dscf_decode(
    code: &PolarCode,
    schedule: &DecodeSchedule,
    y: &[f64],
    cfg: &SchedulerConfig,
    model: &NumericModel,
    collect_trace: bool,
) -> Result<SchedulerResult> {
    let initial = decode_fast(code, schedule, y, &FlipSet::empty(), model, true)?;
    if initial.crc_pass || cfg.t_max == 0 {
        let crc_pass = initial.crc_pass;
        return Ok(SchedulerResult { outcome: initial, attempts: 0, crc_pass, trace: Vec::new() });
    }
    let mut list: CandidateList<FlipSet> = CandidateList::new(cfg.sorter_len);
    let base = FlipSet::empty();
    let batch: Vec<(FlipSet, usize, f64)> = gen_candidates(&initial.trace, &base, &cfg.metric, model)
        .into_iter()
        .map(|c| (base.extended(c.coord), 1, c.metric))
        .collect();
    list.insert_batch(batch, model);
    let mut trace = Vec::new();
    let mut last = initial;
    let mut attempts = 0;
    while attempts < cfg.t_max {
        let Some(elem) = list.pop_best(model) else {
            break;
        };
        attempts += 1;
        let expand = elem.order < cfg.omega;
        let out = decode_fast(code, schedule, y, &elem.payload, model, expand)?;
        if collect_trace {
            trace.push(AttemptRecord {
                t: attempts,
                order: elem.order,
                action: FlipAction::Nodes(elem.payload.clone()),
                metric: elem.metric,
                crc_pass: out.crc_pass,
            });
        }
        if out.crc_pass {
            return Ok(SchedulerResult { outcome: out, attempts, crc_pass: true, trace });
        }
        if expand {
            let next_order = elem.order + 1;
            let batch: Vec<(FlipSet, usize, f64)> =
                gen_candidates(&out.trace, &elem.payload, &cfg.metric, model)
                    .into_iter()
                    .map(|c| (elem.payload.extended(c.coord), next_order, c.metric))
                    .collect();
            list.insert_batch(batch, model);
        }
        last = out;
    }
    Ok(SchedulerResult { outcome: last, attempts, crc_pass: false, trace })
}

/// Leaf-level dynamic SC-flip decoding; with `use_perturbation` disabled the
/// metric reduces to plain LLR magnitudes (the non-dynamic SC-flip rule).
pub fn leaf_dscf_decode(
    code: &PolarCode,
    y: &[f64],
    cfg: &SchedulerConfig,
    use_perturbation: bool,
    model: &NumericModel,
    collect_trace: bool,
) -> Result<SchedulerResult> {
    let initial = decode_leafwise(code, y, &[], model)?;
    if initial.crc_pass || cfg.t_max == 0 {
        let crc_pass = initial.crc_pass;
        return Ok(SchedulerResult { outcome: initial, attempts: 0, crc_pass, trace: Vec::new() });
    }
    let mut list: CandidateList<Vec<usize>> = CandidateList::new(cfg.sorter_len);
    {
        let llrs = initial.leaf_llrs.as_ref().expect("leafwise decode records leaf LLRs");
        let batch: Vec<(Vec<usize>, usize, f64)> =
            gen_candidates_leafwise(code, llrs, &[], &cfg.metric, use_perturbation, model)
                .into_iter()
                .map(|(j, m)| (vec![j], 1, m))
                .collect();
        list.insert_batch(batch, model);
    }
    let mut trace = Vec::new();
    let mut last = initial;
    let mut attempts = 0;
    while attempts < cfg.t_max {
        let Some(elem) = list.pop_best(model) else {
            break;
        };
        attempts += 1;
        let out = decode_leafwise(code, y, &elem.payload, model)?;
        if collect_trace {
            trace.push(AttemptRecord {
                t: attempts,
                order: elem.order,
                action: FlipAction::Leaves(elem.payload.clone()),
                metric: elem.metric,
                crc_pass: out.crc_pass,
            });
        }
        if out.crc_pass {
            return Ok(SchedulerResult { outcome: out, attempts, crc_pass: true, trace });
        }
        if elem.order < cfg.omega {
            let llrs = out.leaf_llrs.as_ref().expect("leafwise decode records leaf LLRs");
            let next_order = elem.order + 1;
            let batch: Vec<(Vec<usize>, usize, f64)> = gen_candidates_leafwise(
                code,
                llrs,
                &elem.payload,
                &cfg.metric,
                use_perturbation,
                model,
            )
            .into_iter()
            .map(|(j, m)| {
                let mut flips = elem.payload.clone();
                flips.push(j);
                (flips, next_order, m)
            })
            .collect();
            list.insert_batch(batch, model);
        }
        last = out;
    }
    Ok(SchedulerResult { outcome: last, attempts, crc_pass: false, trace })
}

/// Leaf-level oracle decoder: correctable when at most `omega` wrong leaf
/// decisions need fixing. Returns the flag and the corrections counted.
pub fn sco_decode(
    code: &PolarCode,
    y: &[f64],
    u_true: &[u8],
    omega: usize,
    model: &NumericModel,
) -> Result<(bool, u64)> {
    let flips = sco_leafwise(code, y, u_true, model)?;
    Ok((flips <= omega as u64, flips))
}

/// Node-level oracle decoder over a schedule; Rep costs one correction,
/// Rate-1 one per wrong top index, SPC one per wrong index pair.
pub fn fast_sco_decode(
    code: &PolarCode,
    schedule: &DecodeSchedule,
    y: &[f64],
    u_true: &[u8],
    omega: usize,
    model: &NumericModel,
) -> Result<(bool, u64)> {
    let flips = sco_fast(code, schedule, y, u_true, model)?;
    Ok((flips <= omega as u64, flips))
}
