//! Min-sum SC and Fast-SSC decoding kernels.
//!
//! `decode_leafwise` runs the full binary tree leaf by leaf and serves as the
//! reference for the schedule-driven `decode_fast`, which decodes special
//! nodes in one shot and supports injected bit-flip actions. Both share the
//! same conventions: hard decisions resolve L = 0 to bit 0, and minimum-|LLR|
//! ties resolve to the lowest index.

use crate::code::{polar_transform, PolarCode};
use crate::metric::{FlipCoordinate, FlipKind, FlipSet};
use crate::quant::NumericModel;
use crate::schedule::{DecodeSchedule, LeafKind, LeafNode, TreeNode};
use crate::{Error, Result};

/// Elementwise min-sum check update.
pub fn f_branch(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

/// Elementwise variable update r + (1 - 2*beta) * l.
pub fn g_branch(l: f64, r: f64, beta: u8, model: &NumericModel) -> f64 {
    if beta & 1 == 0 {
        model.add_llr(r, l)
    } else {
        model.add_llr(r, -l)
    }
}

/// Partial-sum combine: first half beta_l XOR beta_r, second half beta_r.
pub fn combine(beta_l: &[u8], beta_r: &[u8], out: &mut [u8]) {
    let half = beta_l.len();
    debug_assert_eq!(beta_r.len(), half);
    debug_assert_eq!(out.len(), 2 * half);
    for i in 0..half {
        out[i] = beta_l[i] ^ beta_r[i];
        out[i + half] = beta_r[i];
    }
}

fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Lowest-index argmin of |LLR|.
fn argmin_abs(llrs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in llrs.iter().enumerate().skip(1) {
        if v.abs() < llrs[best].abs() {
            best = i;
        }
    }
    best
}

/// Top-level record of one special node, consumed by the flip metric.
#[derive(Debug, Clone)]
pub struct NodeTrace {
    pub ordinal: usize,
    pub kind: LeafKind,
    pub stage: usize,
    pub leaf_offset: usize,
    pub top_llrs: Vec<f64>,
    /// Initial parity of the hard decisions (SPC nodes).
    pub gamma: u8,
    /// Minimum-|LLR| top index (SPC nodes).
    pub i_min: usize,
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub u_hat: Vec<u8>,
    /// Leaf LLR record; present for leafwise decoding only.
    pub leaf_llrs: Option<Vec<f64>>,
    pub info_bits: Vec<u8>,
    pub crc_pass: bool,
    pub trace: Vec<NodeTrace>,
    pub node_visits: u64,
}

/// Full-tree SC decoding, optionally flipping the hard decisions at the
/// given non-frozen leaf indices.
pub fn decode_leafwise(
    code: &PolarCode,
    y: &[f64],
    leaf_flips: &[usize],
    model: &NumericModel,
) -> Result<DecodeOutcome> {
    let n = code.block_len;
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len() });
    }
    let mut ws = Workspace::new(code.n_bits);
    ws.llr[code.n_bits].copy_from_slice(y);
    let mut u_hat = vec![0u8; n];
    let mut leaf_llrs = vec![0f64; n];
    let mut visits = 0u64;
    leafwise_rec(
        code,
        code.n_bits,
        0,
        leaf_flips,
        model,
        &mut ws,
        &mut u_hat,
        &mut leaf_llrs,
        &mut visits,
    );
    let info_bits = code.extract_info(&u_hat);
    let crc_pass = code.crc_check(&info_bits);
    Ok(DecodeOutcome {
        u_hat,
        leaf_llrs: Some(leaf_llrs),
        info_bits,
        crc_pass,
        trace: Vec::new(),
        node_visits: visits,
    })
}

struct Workspace {
    /// llr[s] holds the 2^s LLRs of the node being processed at stage s.
    llr: Vec<Vec<f64>>,
    /// beta[s] holds partial sums; the first half doubles as scratch for the
    /// left child's output while the right child runs.
    beta: Vec<Vec<u8>>,
}

impl Workspace {
    fn new(n_bits: usize) -> Self {
        Self {
            llr: (0..=n_bits).map(|s| vec![0.0; 1 << s]).collect(),
            beta: (0..=n_bits).map(|s| vec![0; 1 << s]).collect(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn leafwise_rec(
    code: &PolarCode,
    stage: usize,
    offset: usize,
    leaf_flips: &[usize],
    model: &NumericModel,
    ws: &mut Workspace,
    u_hat: &mut [u8],
    leaf_llrs: &mut [f64],
    visits: &mut u64,
) {
    *visits += 1;
    if stage == 0 {
        let llr = ws.llr[0][0];
        leaf_llrs[offset] = llr;
        let mut bit = if code.is_frozen(offset) { 0 } else { hard_decision(llr) };
        if !code.is_frozen(offset) && leaf_flips.contains(&offset) {
            bit ^= 1;
        }
        u_hat[offset] = bit;
        ws.beta[0][0] = bit;
        return;
    }
    let half = 1 << (stage - 1);
    for i in 0..half {
        ws.llr[stage - 1][i] = f_branch(ws.llr[stage][i], ws.llr[stage][i + half]);
    }
    leafwise_rec(code, stage - 1, offset, leaf_flips, model, ws, u_hat, leaf_llrs, visits);
    // stash the left child's partial sums in our own buffer's first half
    let (head, tail) = ws.beta.split_at_mut(stage);
    tail[0][..half].copy_from_slice(&head[stage - 1][..half]);
    for i in 0..half {
        ws.llr[stage - 1][i] =
            g_branch(ws.llr[stage][i], ws.llr[stage][i + half], ws.beta[stage][i], model);
    }
    leafwise_rec(code, stage - 1, offset + half, leaf_flips, model, ws, u_hat, leaf_llrs, visits);
    let (head, tail) = ws.beta.split_at_mut(stage);
    let parent = &mut tail[0];
    let child = &head[stage - 1];
    for i in 0..half {
        parent[i] ^= child[i];
        parent[i + half] = child[i];
    }
}

/// Schedule-driven Fast-SSC decoding with optional flip actions.
///
/// Flip coordinates reference node ordinals of this schedule: Rep inverts
/// all partial sums of the node, Rate-1 inverts one top index, SPC inverts a
/// pair of top indices on top of the parity-corrected hard decision.
pub fn decode_fast(
    code: &PolarCode,
    schedule: &DecodeSchedule,
    y: &[f64],
    flips: &FlipSet,
    model: &NumericModel,
    collect_trace: bool,
) -> Result<DecodeOutcome> {
    let n = code.block_len;
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len() });
    }
    for coord in flips.coords() {
        validate_coord(schedule, coord)?;
    }
    let mut ws = Workspace::new(code.n_bits);
    ws.llr[code.n_bits].copy_from_slice(y);
    let mut exec = FastExec {
        model,
        flips,
        collect_trace,
        u_hat: vec![0u8; n],
        trace: Vec::new(),
        visits: 0,
    };
    exec.node(&schedule.tree, &mut ws);
    let info_bits = code.extract_info(&exec.u_hat);
    let crc_pass = code.crc_check(&info_bits);
    Ok(DecodeOutcome {
        u_hat: exec.u_hat,
        leaf_llrs: None,
        info_bits,
        crc_pass,
        trace: exec.trace,
        node_visits: exec.visits,
    })
}

fn validate_coord(schedule: &DecodeSchedule, coord: &FlipCoordinate) -> Result<()> {
    if coord.node >= schedule.num_leaves() {
        return Err(Error::FlipMismatch {
            ordinal: coord.node,
            reason: "node ordinal out of range".into(),
        });
    }
    let leaf = schedule.leaf(coord.node);
    let ok = match (leaf.kind, coord.kind) {
        (LeafKind::Rep, FlipKind::Rep) => coord.indices.is_empty(),
        (LeafKind::Rate1, FlipKind::Rate1) => {
            coord.indices.len() == 1 && coord.indices[0] < leaf.size()
        }
        (LeafKind::Spc, FlipKind::Spc) => {
            coord.indices.len() == 2
                && coord.indices[0] < coord.indices[1]
                && coord.indices[1] < leaf.size()
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::FlipMismatch {
            ordinal: coord.node,
            reason: format!("{:?} flip does not fit {:?} node", coord.kind, leaf.kind),
        })
    }
}

struct FastExec<'a> {
    model: &'a NumericModel,
    flips: &'a FlipSet,
    collect_trace: bool,
    u_hat: Vec<u8>,
    trace: Vec<NodeTrace>,
    visits: u64,
}

impl FastExec<'_> {
    fn node(&mut self, node: &TreeNode, ws: &mut Workspace) {
        match node {
            TreeNode::Leaf(leaf) => self.leaf(leaf, ws),
            TreeNode::Branch { stage, merged_rate0, left, right, .. } => {
                let stage = *stage;
                let half = 1 << (stage - 1);
                self.visits += 1;
                if *merged_rate0 {
                    // G with an all-zero left child folded in
                    for i in 0..half {
                        ws.llr[stage - 1][i] =
                            self.model.add_llr(ws.llr[stage][i + half], ws.llr[stage][i]);
                    }
                    if let TreeNode::Leaf(l) = left.as_ref() {
                        self.rate0(l);
                    }
                    self.node(right, ws);
                    self.visits += 1; // combine
                    let (head, tail) = ws.beta.split_at_mut(stage);
                    let parent = &mut tail[0];
                    let child = &head[stage - 1];
                    parent[..half].copy_from_slice(&child[..half]);
                    parent[half..2 * half].copy_from_slice(&child[..half]);
                } else {
                    for i in 0..half {
                        ws.llr[stage - 1][i] = f_branch(ws.llr[stage][i], ws.llr[stage][i + half]);
                    }
                    self.node(left, ws);
                    self.visits += 1; // g
                    let (head, tail) = ws.beta.split_at_mut(stage);
                    tail[0][..half].copy_from_slice(&head[stage - 1][..half]);
                    for i in 0..half {
                        ws.llr[stage - 1][i] = g_branch(
                            ws.llr[stage][i],
                            ws.llr[stage][i + half],
                            ws.beta[stage][i],
                            self.model,
                        );
                    }
                    self.node(right, ws);
                    self.visits += 1; // combine
                    let (head, tail) = ws.beta.split_at_mut(stage);
                    let parent = &mut tail[0];
                    let child = &head[stage - 1];
                    for i in 0..half {
                        parent[i] ^= child[i];
                        parent[i + half] = child[i];
                    }
                }
            }
        }
    }

    fn flip_for(&self, ordinal: usize) -> Option<&FlipCoordinate> {
        self.flips.coords().iter().find(|c| c.node == ordinal)
    }

    fn rate0(&mut self, leaf: &LeafNode) {
        self.visits += 1;
        let size = leaf.size();
        self.u_hat[leaf.leaf_offset..leaf.leaf_offset + size].fill(0);
        if self.collect_trace {
            self.trace.push(NodeTrace {
                ordinal: leaf.ordinal,
                kind: LeafKind::Rate0,
                stage: leaf.stage,
                leaf_offset: leaf.leaf_offset,
                top_llrs: Vec::new(),
                gamma: 0,
                i_min: 0,
            });
        }
    }

    fn leaf(&mut self, leaf: &LeafNode, ws: &mut Workspace) {
        let size = leaf.size();
        let stage = leaf.stage;
        match leaf.kind {
            LeafKind::Rate0 => {
                ws.beta[stage][..size].fill(0);
                self.rate0(leaf);
                return;
            }
            LeafKind::Rep => {
                self.visits += 1;
                let top = &ws.llr[stage][..size];
                let sum = rep_sum(top, self.model);
                let mut bit = hard_decision(sum);
                if self.flip_for(leaf.ordinal).is_some() {
                    bit ^= 1;
                }
                ws.beta[stage][..size].fill(bit);
                let span = &mut self.u_hat[leaf.leaf_offset..leaf.leaf_offset + size];
                span.fill(0);
                span[size - 1] = bit;
                if self.collect_trace {
                    self.trace.push(NodeTrace {
                        ordinal: leaf.ordinal,
                        kind: LeafKind::Rep,
                        stage,
                        leaf_offset: leaf.leaf_offset,
                        top_llrs: ws.llr[stage][..size].to_vec(),
                        gamma: 0,
                        i_min: 0,
                    });
                }
            }
            LeafKind::Rate1 => {
                self.visits += 1;
                for i in 0..size {
                    ws.beta[stage][i] = hard_decision(ws.llr[stage][i]);
                }
                if let Some(coord) = self.flip_for(leaf.ordinal) {
                    ws.beta[stage][coord.indices[0]] ^= 1;
                }
                let span = &mut self.u_hat[leaf.leaf_offset..leaf.leaf_offset + size];
                span.copy_from_slice(&ws.beta[stage][..size]);
                polar_transform(span);
                if self.collect_trace {
                    self.trace.push(NodeTrace {
                        ordinal: leaf.ordinal,
                        kind: LeafKind::Rate1,
                        stage,
                        leaf_offset: leaf.leaf_offset,
                        top_llrs: ws.llr[stage][..size].to_vec(),
                        gamma: 0,
                        i_min: 0,
                    });
                }
            }
            LeafKind::Spc => {
                self.visits += 1;
                let top = ws.llr[stage][..size].to_vec();
                let i_min = argmin_abs(&top);
                let mut gamma = 0u8;
                for i in 0..size {
                    ws.beta[stage][i] = hard_decision(top[i]);
                    gamma ^= ws.beta[stage][i];
                }
                if gamma == 1 {
                    ws.beta[stage][i_min] ^= 1;
                }
                if let Some(coord) = self.flip_for(leaf.ordinal) {
                    // pair flip on top of the parity-corrected decision;
                    // flipping two indices keeps the parity even
                    ws.beta[stage][coord.indices[0]] ^= 1;
                    ws.beta[stage][coord.indices[1]] ^= 1;
                }
                let span = &mut self.u_hat[leaf.leaf_offset..leaf.leaf_offset + size];
                span.copy_from_slice(&ws.beta[stage][..size]);
                polar_transform(span);
                if self.collect_trace {
                    self.trace.push(NodeTrace {
                        ordinal: leaf.ordinal,
                        kind: LeafKind::Spc,
                        stage,
                        leaf_offset: leaf.leaf_offset,
                        top_llrs: top,
                        gamma,
                        i_min,
                    });
                }
            }
        }
    }
}

/// Oracle-aided leafwise SC: every wrong non-frozen leaf decision is
/// corrected in place. Returns the number of corrections needed for a fully
/// correct frame.
pub fn sco_leafwise(
    code: &PolarCode,
    y: &[f64],
    u_true: &[u8],
    model: &NumericModel,
) -> Result<u64> {
    let n = code.block_len;
    if y.len() != n || u_true.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len().min(u_true.len()) });
    }
    let mut ws = Workspace::new(code.n_bits);
    ws.llr[code.n_bits].copy_from_slice(y);
    let mut count = 0u64;
    sco_leafwise_rec(code, code.n_bits, 0, u_true, model, &mut ws, &mut count);
    Ok(count)
}

fn sco_leafwise_rec(
    code: &PolarCode,
    stage: usize,
    offset: usize,
    u_true: &[u8],
    model: &NumericModel,
    ws: &mut Workspace,
    count: &mut u64,
) {
    if stage == 0 {
        let mut bit = if code.is_frozen(offset) { 0 } else { hard_decision(ws.llr[0][0]) };
        if !code.is_frozen(offset) && bit != u_true[offset] {
            *count += 1;
            bit = u_true[offset];
        }
        ws.beta[0][0] = bit;
        return;
    }
    let half = 1 << (stage - 1);
    for i in 0..half {
        ws.llr[stage - 1][i] = f_branch(ws.llr[stage][i], ws.llr[stage][i + half]);
    }
    sco_leafwise_rec(code, stage - 1, offset, u_true, model, ws, count);
    let (head, tail) = ws.beta.split_at_mut(stage);
    tail[0][..half].copy_from_slice(&head[stage - 1][..half]);
    for i in 0..half {
        ws.llr[stage - 1][i] =
            g_branch(ws.llr[stage][i], ws.llr[stage][i + half], ws.beta[stage][i], model);
    }
    sco_leafwise_rec(code, stage - 1, offset + half, u_true, model, ws, count);
    let (head, tail) = ws.beta.split_at_mut(stage);
    let parent = &mut tail[0];
    let child = &head[stage - 1];
    for i in 0..half {
        parent[i] ^= child[i];
        parent[i + half] = child[i];
    }
}

/// Oracle-aided node-level decoding over a schedule. Each special node whose
/// partial-sum output disagrees with the truth is forced to the true value;
/// the cost is 1 per Rep node, one per wrong top index at Rate-1 nodes, and
/// one per wrong index pair (half the mismatch count) at SPC nodes.
pub fn sco_fast(
    code: &PolarCode,
    schedule: &DecodeSchedule,
    y: &[f64],
    u_true: &[u8],
    model: &NumericModel,
) -> Result<u64> {
    let n = code.block_len;
    if y.len() != n || u_true.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len().min(u_true.len()) });
    }
    let mut ws = Workspace::new(code.n_bits);
    ws.llr[code.n_bits].copy_from_slice(y);
    let empty = FlipSet::empty();
    let mut exec = FastExec {
        model,
        flips: &empty,
        collect_trace: false,
        u_hat: vec![0u8; n],
        trace: Vec::new(),
        visits: 0,
    };
    let mut count = 0u64;
    sco_fast_node(&mut exec, &schedule.tree, u_true, &mut ws, &mut count);
    Ok(count)
}

fn sco_fast_node(
    exec: &mut FastExec<'_>,
    node: &TreeNode,
    u_true: &[u8],
    ws: &mut Workspace,
    count: &mut u64,
) {
    match node {
        TreeNode::Leaf(leaf) => {
            exec.leaf(leaf, ws);
            sco_correct_leaf(exec, leaf, u_true, ws, count);
        }
        TreeNode::Branch { stage, merged_rate0, left, right, .. } => {
            let stage = *stage;
            let half = 1 << (stage - 1);
            if *merged_rate0 {
                for i in 0..half {
                    ws.llr[stage - 1][i] =
                        exec.model.add_llr(ws.llr[stage][i + half], ws.llr[stage][i]);
                }
                if let TreeNode::Leaf(l) = left.as_ref() {
                    exec.rate0(l);
                }
                sco_fast_node(exec, right, u_true, ws, count);
                let (head, tail) = ws.beta.split_at_mut(stage);
                let parent = &mut tail[0];
                let child = &head[stage - 1];
                parent[..half].copy_from_slice(&child[..half]);
                parent[half..2 * half].copy_from_slice(&child[..half]);
            } else {
                for i in 0..half {
                    ws.llr[stage - 1][i] = f_branch(ws.llr[stage][i], ws.llr[stage][i + half]);
                }
                sco_fast_node(exec, left, u_true, ws, count);
                let (head, tail) = ws.beta.split_at_mut(stage);
                tail[0][..half].copy_from_slice(&head[stage - 1][..half]);
                for i in 0..half {
                    ws.llr[stage - 1][i] = g_branch(
                        ws.llr[stage][i],
                        ws.llr[stage][i + half],
                        ws.beta[stage][i],
                        exec.model,
                    );
                }
                sco_fast_node(exec, right, u_true, ws, count);
                let (head, tail) = ws.beta.split_at_mut(stage);
                let parent = &mut tail[0];
                let child = &head[stage - 1];
                for i in 0..half {
                    parent[i] ^= child[i];
                    parent[i + half] = child[i];
                }
            }
        }
    }
}

fn sco_correct_leaf(
    exec: &mut FastExec<'_>,
    leaf: &LeafNode,
    u_true: &[u8],
    ws: &mut Workspace,
    count: &mut u64,
) {
    let size = leaf.size();
    let span = leaf.leaf_offset..leaf.leaf_offset + size;
    let mut beta_true = u_true[span.clone()].to_vec();
    polar_transform(&mut beta_true);
    let mismatches = ws.beta[leaf.stage][..size]
        .iter()
        .zip(&beta_true)
        .filter(|(a, b)| a != b)
        .count() as u64;
    if mismatches == 0 {
        return;
    }
    match leaf.kind {
        LeafKind::Rate0 => unreachable!("frozen span cannot mismatch all-zero truth"),
        LeafKind::Rep => *count += 1,
        LeafKind::Rate1 => *count += mismatches,
        // both sides satisfy even parity, so mismatches come in pairs
        LeafKind::Spc => *count += mismatches / 2,
    }
    ws.beta[leaf.stage][..size].copy_from_slice(&beta_true);
    exec.u_hat[span].copy_from_slice(&u_true[leaf.leaf_offset..leaf.leaf_offset + size]);
}

/// Sequential sum of a Rep node's top LLRs under the arithmetic model.
pub fn rep_sum(top: &[f64], model: &NumericModel) -> f64 {
    let mut sum = top[0];
    for &v in &top[1..] {
        sum = model.add_llr(sum, v);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{construct_code, CodeConstructionSource};
    use crate::schedule::{build_schedule, ScheduleOptions};
    use rand::prelude::*;

    #[test]
    fn f_branch_cases() {
        assert_eq!(f_branch(2.0, 3.0), 2.0);
        assert_eq!(f_branch(-1.5, 4.0), -1.5);
        assert_eq!(f_branch(0.0, -7.0), 0.0);
        assert_eq!(f_branch(-2.0, -3.0), 2.0);
    }

    #[test]
    fn g_branch_cases() {
        let m = NumericModel::exact();
        assert_eq!(g_branch(2.0, 3.0, 0, &m), 5.0);
        assert_eq!(g_branch(2.0, 3.0, 1, &m), 1.0);
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let l: f64 = rng.gen_range(-10.0..10.0);
            let r: f64 = rng.gen_range(-10.0..10.0);
            let b = rng.gen_range(0..2u8);
            let expect = r + (1.0 - 2.0 * f64::from(b)) * l;
            assert_eq!(g_branch(l, r, b, &m), expect);
        }
    }

    #[test]
    fn combine_cases() {
        let mut out = vec![0u8; 2];
        combine(&[1], &[1], &mut out);
        assert_eq!(out, vec![0, 1]);
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let bl: Vec<u8> = (0..8).map(|_| rng.gen_range(0..2)).collect();
            let br: Vec<u8> = (0..8).map(|_| rng.gen_range(0..2)).collect();
            let mut out = vec![0u8; 16];
            combine(&bl, &br, &mut out);
            for i in 0..8 {
                assert_eq!(out[i], bl[i] ^ br[i]);
                assert_eq!(out[i + 8], br[i]);
            }
        }
    }

    fn bpsk_noiseless(x: &[u8]) -> Vec<f64> {
        x.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect()
    }

    #[test]
    fn leafwise_recovers_noiseless_frame() {
        let code = construct_code(64, 28, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let model = NumericModel::exact();
        for _ in 0..50 {
            let msg: Vec<u8> = (0..28).map(|_| rng.gen_range(0..2)).collect();
            let x = code.encode(&msg).unwrap();
            let out = decode_leafwise(&code, &bpsk_noiseless(&x), &[], &model).unwrap();
            assert!(out.crc_pass);
            assert_eq!(&out.info_bits[..28], &msg[..]);
        }
    }

    #[test]
    fn fast_matches_leafwise_on_noisy_frames() {
        let code = construct_code(256, 112, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        let model = NumericModel::exact();
        let mut rng = StdRng::seed_from_u64(4);
        let empty = FlipSet::empty();
        for _ in 0..500 {
            let y: Vec<f64> = (0..256).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let a = decode_leafwise(&code, &y, &[], &model).unwrap();
            let b = decode_fast(&code, &schedule, &y, &empty, &model, false).unwrap();
            assert_eq!(a.u_hat, b.u_hat);
        }
    }

    #[test]
    fn spc_output_has_even_parity_and_rep_is_constant() {
        let code = construct_code(128, 64, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        let model = NumericModel::exact();
        let mut rng = StdRng::seed_from_u64(5);
        let empty = FlipSet::empty();
        for _ in 0..200 {
            let y: Vec<f64> = (0..128).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let out = decode_fast(&code, &schedule, &y, &empty, &model, true).unwrap();
            for t in &out.trace {
                let span = &out.u_hat[t.leaf_offset..t.leaf_offset + (1 << t.stage)];
                match t.kind {
                    LeafKind::Spc => {
                        // leftmost leaf bit is the parity of the node's beta
                        assert_eq!(span[0], 0);
                    }
                    LeafKind::Rep => {
                        assert!(span[..span.len() - 1].iter().all(|&b| b == 0));
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn flip_coordinate_kind_mismatch_is_rejected() {
        let code = construct_code(128, 64, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        let model = NumericModel::exact();
        let rep_ordinal = schedule
            .leaves
            .iter()
            .find(|l| l.kind == LeafKind::Rep)
            .unwrap()
            .ordinal;
        let bad = FlipSet::single(FlipCoordinate {
            node: rep_ordinal,
            kind: FlipKind::Spc,
            indices: vec![0, 1],
        });
        let y = vec![1.0; 128];
        assert!(decode_fast(&code, &schedule, &y, &bad, &model, false).is_err());
    }

    #[test]
    fn genie_decoders_need_no_corrections_when_sc_succeeds() {
        let code = construct_code(128, 64, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        let model = NumericModel::exact();
        let mut rng = StdRng::seed_from_u64(7);
        let msg: Vec<u8> = (0..code.info_len).map(|_| rng.gen_range(0..2)).collect();
        let x = code.encode(&msg).unwrap();
        let u_true = code.assemble_u(&msg).unwrap();
        let y = bpsk_noiseless(&x);
        assert_eq!(sco_leafwise(&code, &y, &u_true, &model).unwrap(), 0);
        assert_eq!(sco_fast(&code, &schedule, &y, &u_true, &model).unwrap(), 0);
    }

    #[test]
    fn genie_counts_grow_with_injected_noise() {
        let code = construct_code(128, 64, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        let model = NumericModel::exact();
        let mut rng = StdRng::seed_from_u64(8);
        let msg: Vec<u8> = (0..code.info_len).map(|_| rng.gen_range(0..2)).collect();
        let x = code.encode(&msg).unwrap();
        let u_true = code.assemble_u(&msg).unwrap();
        let mut saw_positive = false;
        for _ in 0..50 {
            let y: Vec<f64> = x
                .iter()
                .map(|&b| {
                    let s = if b == 0 { 1.0 } else { -1.0 };
                    2.0 * (s + rng.gen_range(-1.2..1.2))
                })
                .collect();
            let leaf = sco_leafwise(&code, &y, &u_true, &model).unwrap();
            let node = sco_fast(&code, &schedule, &y, &u_true, &model).unwrap();
            // both oracles agree on whether any correction is needed at all
            assert_eq!(leaf == 0, node == 0);
            let plain = decode_leafwise(&code, &y, &[], &model).unwrap();
            if plain.u_hat == u_true {
                assert_eq!(leaf, 0);
            } else {
                assert!(leaf > 0);
                saw_positive = true;
            }
        }
        assert!(saw_positive);
    }

    #[test]
    fn determinism_of_fast_decode() {
        let code = construct_code(256, 128, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        let model = NumericModel::exact();
        let mut rng = StdRng::seed_from_u64(6);
        let y: Vec<f64> = (0..256).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let empty = FlipSet::empty();
        let a = decode_fast(&code, &schedule, &y, &empty, &model, true).unwrap();
        let b = decode_fast(&code, &schedule, &y, &empty, &model, true).unwrap();
        assert_eq!(a.u_hat, b.u_hat);
        assert_eq!(a.node_visits, b.node_visits);
    }
}
