//! Flip-metric computation for dynamic SC-flip decoding.
//!
//! The metric of a flip set splits into an instantaneous part (the candidate
//! coordinate's own term) and an accumulative part carried along the decode.
//! The accumulative part is normalized: it restarts at zero on each extra
//! attempt and only grows past the last flipped coordinate, so the stored
//! per-candidate value stays small and quantizes well.

use crate::code::PolarCode;
use crate::quant::NumericModel;
use crate::sc::{rep_sum, NodeTrace};
use crate::schedule::LeafKind;

pub const DEFAULT_ALPHA: f64 = 0.3;
/// Constant approximation of the perturbation term.
pub const F_CONST_VALUE: f64 = 1.5;
/// Magnitudes up to this bound (inclusive) receive the constant value.
pub const F_CONST_THRESHOLD: f64 = 5.0;

/// How the logistic perturbation term is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMode {
    Exact,
    ConstantApprox,
}

#[derive(Debug, Clone, Copy)]
pub struct MetricConfig {
    pub alpha: f64,
    pub f_mode: FMode,
    /// Flip indices examined per Rate-1 node.
    pub span_rate1: usize,
    /// Least-reliable indices whose pairs are examined per SPC node.
    pub span_spc: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            f_mode: FMode::Exact,
            span_rate1: 2,
            span_spc: 4,
        }
    }
}

impl MetricConfig {
    pub fn with_mode(f_mode: FMode) -> Self {
        Self { f_mode, ..Self::default() }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self.f_mode {
            FMode::Exact => f_alpha_exact(self.alpha, x),
            FMode::ConstantApprox => f_alpha_const(x),
        }
    }
}

/// (1/alpha) * ln(1 + exp(-alpha * x)).
pub fn f_alpha_exact(alpha: f64, x: f64) -> f64 {
    (-alpha * x).exp().ln_1p() / alpha
}

/// Hardware-friendly constant approximation: 3/2 below the threshold, else 0.
pub fn f_alpha_const(x: f64) -> f64 {
    if x.abs() <= F_CONST_THRESHOLD {
        F_CONST_VALUE
    } else {
        0.0
    }
}

/// The node-kind a flip coordinate applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipKind {
    Rep,
    Rate1,
    Spc,
}

impl FlipKind {
    pub fn for_leaf(kind: LeafKind) -> Option<Self> {
        match kind {
            LeafKind::Rep => Some(Self::Rep),
            LeafKind::Rate1 => Some(Self::Rate1),
            LeafKind::Spc => Some(Self::Spc),
            LeafKind::Rate0 => None,
        }
    }
}

/// One flip action: a node ordinal plus the top indices it inverts.
/// Rep carries no indices, Rate-1 carries one, SPC a sorted pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipCoordinate {
    pub node: usize,
    pub kind: FlipKind,
    pub indices: Vec<usize>,
}

/// An ordered set of flip coordinates (non-decreasing node ordinals).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlipSet {
    coords: Vec<FlipCoordinate>,
}

impl FlipSet {
    pub fn empty() -> Self {
        Self { coords: Vec::new() }
    }

    pub fn single(coord: FlipCoordinate) -> Self {
        Self { coords: vec![coord] }
    }

    /// A new set with one more coordinate appended.
    pub fn extended(&self, coord: FlipCoordinate) -> Self {
        let mut coords = self.coords.clone();
        coords.push(coord);
        Self { coords }
    }

    pub fn coords(&self) -> &[FlipCoordinate] {
        &self.coords
    }

    pub fn order(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Ordinal of the last (largest) flipped node, if any.
    pub fn last_node(&self) -> Option<usize> {
        self.coords.last().map(|c| c.node)
    }
}

/// A prospective flip extension with its full metric value.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub coord: FlipCoordinate,
    pub metric: f64,
}

/// Indices of the k smallest magnitudes, ascending; ties to the lowest index.
pub fn smallest_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .abs()
            .partial_cmp(&values[b].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Generate the candidate flips arising from one decode pass.
///
/// `base` is the flip set that was applied during the pass. Only nodes
/// strictly after the last flipped node produce candidates; the accumulative
/// metric part restarts at zero there (normalized form). Each node's own
/// accumulative contribution is added before its candidates are emitted, and
/// per node the candidates come out sorted by metric.
pub fn gen_candidates(
    trace: &[NodeTrace],
    base: &FlipSet,
    cfg: &MetricConfig,
    model: &NumericModel,
) -> Vec<Candidate> {
    let last = base.last_node();
    let mut acc = 0.0;
    let mut out = Vec::new();
    for node in trace {
        if let Some(last) = last {
            if node.ordinal <= last {
                continue;
            }
        }
        let mut node_cands = node_candidates(node, cfg, model, &mut acc);
        node_cands.sort_by(|a, b| a.metric.partial_cmp(&b.metric).unwrap());
        out.extend(node_cands);
    }
    out
}

/// Accumulate the node's own metric contribution into `acc` and return its
/// candidates with full metric values.
fn node_candidates(
    node: &NodeTrace,
    cfg: &MetricConfig,
    model: &NumericModel,
    acc: &mut f64,
) -> Vec<Candidate> {
    match node.kind {
        LeafKind::Rate0 => Vec::new(),
        LeafKind::Rep => {
            let sum = rep_sum(&node.top_llrs, model).abs();
            *acc = model.metric_add(*acc, model.metric_value(cfg.f(sum)));
            vec![Candidate {
                coord: FlipCoordinate {
                    node: node.ordinal,
                    kind: FlipKind::Rep,
                    indices: Vec::new(),
                },
                metric: model.metric_add(*acc, model.metric_value(sum)),
            }]
        }
        LeafKind::Rate1 => {
            for &l in &node.top_llrs {
                *acc = model.metric_add(*acc, model.metric_value(cfg.f(l.abs())));
            }
            smallest_k(&node.top_llrs, cfg.span_rate1)
                .into_iter()
                .map(|i| Candidate {
                    coord: FlipCoordinate {
                        node: node.ordinal,
                        kind: FlipKind::Rate1,
                        indices: vec![i],
                    },
                    metric: model.metric_add(*acc, model.metric_value(node.top_llrs[i].abs())),
                })
                .collect()
        }
        LeafKind::Spc => {
            let min_mag = node.top_llrs[node.i_min].abs();
            let offset = if node.gamma == 1 { -min_mag } else { min_mag };
            for (i, &l) in node.top_llrs.iter().enumerate() {
                if i == node.i_min {
                    continue;
                }
                *acc = model.metric_add(*acc, model.metric_value(cfg.f(l.abs() + offset)));
            }
            let span = smallest_k(&node.top_llrs, cfg.span_spc);
            let sub = if node.gamma == 1 { min_mag } else { 0.0 };
            let mut cands = Vec::new();
            for a in 0..span.len() {
                for b in a + 1..span.len() {
                    let (mut i1, mut i2) = (span[a], span[b]);
                    if i1 > i2 {
                        std::mem::swap(&mut i1, &mut i2);
                    }
                    let m1 = model.metric_value(node.top_llrs[i1].abs() - sub);
                    let m2 = model.metric_value(node.top_llrs[i2].abs() - sub);
                    let m_inst = model.metric_add(m1, m2);
                    cands.push(Candidate {
                        coord: FlipCoordinate {
                            node: node.ordinal,
                            kind: FlipKind::Spc,
                            indices: vec![i1, i2],
                        },
                        metric: model.metric_add(*acc, m_inst),
                    });
                }
            }
            cands
        }
    }
}

/// Leaf-level flip metric for a candidate index, in normalized form.
///
/// `base` holds the leaf indices flipped during the pass (ascending). With
/// `use_perturbation` the logistic terms of every non-frozen index between
/// the last flipped index (exclusive) and the candidate (inclusive) are
/// added; without it the metric is the candidate's LLR magnitude alone.
pub fn metric_leafwise(
    code: &PolarCode,
    leaf_llrs: &[f64],
    base: &[usize],
    candidate: usize,
    cfg: &MetricConfig,
    use_perturbation: bool,
    model: &NumericModel,
) -> f64 {
    let start = base.last().map_or(0, |&j| j + 1);
    let mut m = model.metric_value(leaf_llrs[candidate].abs());
    if use_perturbation {
        for j in start..=candidate {
            if !code.is_frozen(j) {
                m = model.metric_add(m, model.metric_value(cfg.f(leaf_llrs[j].abs())));
            }
        }
    }
    m
}

/// All leaf-level candidates after the last flipped index, sorted by metric
/// (stable, so equal metrics keep ascending index order).
pub fn gen_candidates_leafwise(
    code: &PolarCode,
    leaf_llrs: &[f64],
    base: &[usize],
    cfg: &MetricConfig,
    use_perturbation: bool,
    model: &NumericModel,
) -> Vec<(usize, f64)> {
    let start = base.last().map_or(0, |&j| j + 1);
    let mut acc = 0.0;
    let mut out = Vec::new();
    for j in start..code.block_len {
        if code.is_frozen(j) {
            continue;
        }
        if use_perturbation {
            acc = model.metric_add(acc, model.metric_value(cfg.f(leaf_llrs[j].abs())));
        }
        out.push((j, model.metric_add(acc, model.metric_value(leaf_llrs[j].abs()))));
    }
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    out
}
