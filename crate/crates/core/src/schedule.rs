//! Compilation of the pruned decoding-tree instruction schedule.
//!
//! A subtree is emitted as a special node when its frozen pattern matches
//! Rate-0 (all frozen), Rate-1 (none frozen), Rep (only the rightmost index
//! non-frozen) or SPC (only the leftmost index frozen). Otherwise the
//! recursion emits F-branch / G-branch / Combine instructions. A Rate-0 left
//! child can be merged into its parent's right-branch operation (G-0R).

use crate::code::PolarCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeafKind {
    Rate0,
    Rate1,
    Rep,
    Spc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstructionKind {
    FBranch,
    GBranch,
    /// Right-branch operation with the all-frozen left child folded in.
    G0R,
    Combine,
    Rate0,
    Rate1,
    Rep,
    Spc,
}

/// One step of the schedule. Leaf-producing instructions carry the ordinal
/// assigned in execution order; `G0R` covers its merged left half's leaves.
#[derive(Debug, Clone, Copy)]
pub struct NodeInstruction {
    pub kind: InstructionKind,
    pub stage: usize,
    pub node_size: usize,
    pub leaf_offset: usize,
    pub ordinal: Option<usize>,
}

impl NodeInstruction {
    /// Leaf range covered by this instruction, if it produces leaves.
    pub fn leaf_span(&self) -> Option<(usize, usize)> {
        match self.kind {
            InstructionKind::Rate0
            | InstructionKind::Rate1
            | InstructionKind::Rep
            | InstructionKind::Spc => Some((self.leaf_offset, self.node_size)),
            InstructionKind::G0R => Some((self.leaf_offset, self.node_size / 2)),
            _ => None,
        }
    }
}

/// A leaf of the pruned tree.
#[derive(Debug, Clone, Copy)]
pub struct LeafNode {
    pub kind: LeafKind,
    pub stage: usize,
    pub leaf_offset: usize,
    pub ordinal: usize,
}

impl LeafNode {
    pub fn size(&self) -> usize {
        1 << self.stage
    }
}

#[derive(Debug, Clone)]
pub enum TreeNode {
    Branch {
        stage: usize,
        leaf_offset: usize,
        /// Left child is an all-frozen node folded into the G operation.
        merged_rate0: bool,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf(LeafNode),
}

#[derive(Debug, Clone)]
pub struct ScheduleOptions {
    /// SPC nodes larger than this are split. Defaults follow the per-order
    /// hardware settings via [`ScheduleOptions::for_order`].
    pub max_spc_size: usize,
    /// Optional cap on Rate-1/Rep/SPC node sizes (single-leaf nodes are
    /// always emitted).
    pub max_special_size: Option<usize>,
    pub enable_rate1: bool,
    pub enable_rep: bool,
    pub enable_spc: bool,
    /// Merge a Rate-0 left child into the parent's right-branch operation.
    pub merge_rate0: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            max_spc_size: 64,
            max_special_size: None,
            enable_rate1: true,
            enable_rep: true,
            enable_spc: true,
            merge_rate0: true,
        }
    }
}

impl ScheduleOptions {
    /// Hardware defaults: maximum SPC sizes 64 / 8 / 4 for orders 1 / 2 / 3+.
    pub fn for_order(omega: usize) -> Self {
        let max_spc_size = match omega {
            0 | 1 => 64,
            2 => 8,
            _ => 4,
        };
        Self { max_spc_size, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct DecodeSchedule {
    pub block_len: usize,
    pub tree: TreeNode,
    pub instructions: Vec<NodeInstruction>,
    /// Leaves indexed by ordinal, in execution order.
    pub leaves: Vec<LeafNode>,
}

impl DecodeSchedule {
    pub fn leaf(&self, ordinal: usize) -> &LeafNode {
        &self.leaves[ordinal]
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }
}

/// Classify the frozen pattern of `frozen[offset .. offset + size]`.
fn classify(frozen: &[bool], offset: usize, size: usize, opts: &ScheduleOptions) -> Option<LeafKind> {
    let span = &frozen[offset..offset + size];
    let frozen_count = span.iter().filter(|&&f| f).count();
    if frozen_count == size {
        return Some(LeafKind::Rate0);
    }
    if size == 1 {
        return Some(LeafKind::Rate1);
    }
    let cap = opts.max_special_size.unwrap_or(usize::MAX);
    if size > cap {
        return None;
    }
    if frozen_count == 0 && opts.enable_rate1 {
        return Some(LeafKind::Rate1);
    }
    if frozen_count == size - 1 && !span[size - 1] && opts.enable_rep {
        return Some(LeafKind::Rep);
    }
    if frozen_count == 1 && span[0] && opts.enable_spc && size <= opts.max_spc_size {
        return Some(LeafKind::Spc);
    }
    None
}

/// Build the pruned decoding schedule for a code.
pub fn build_schedule(code: &PolarCode, opts: &ScheduleOptions) -> DecodeSchedule {
    let mut leaves = Vec::new();
    let tree = build_node(&code.frozen, code.n_bits, 0, opts, &mut leaves);
    let mut instructions = Vec::new();
    flatten(&tree, &mut instructions);
    DecodeSchedule {
        block_len: code.block_len,
        tree,
        instructions,
        leaves,
    }
}

fn build_node(
    frozen: &[bool],
    stage: usize,
    offset: usize,
    opts: &ScheduleOptions,
    leaves: &mut Vec<LeafNode>,
) -> TreeNode {
    let size = 1 << stage;
    if let Some(kind) = classify(frozen, offset, size, opts) {
        let leaf = LeafNode { kind, stage, leaf_offset: offset, ordinal: leaves.len() };
        leaves.push(leaf);
        return TreeNode::Leaf(leaf);
    }
    let half = size / 2;
    let left = build_node(frozen, stage - 1, offset, opts, leaves);
    let merged_rate0 = opts.merge_rate0
        && matches!(&left, TreeNode::Leaf(l) if l.kind == LeafKind::Rate0);
    let right = build_node(frozen, stage - 1, offset + half, opts, leaves);
    TreeNode::Branch {
        stage,
        leaf_offset: offset,
        merged_rate0,
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn flatten(node: &TreeNode, out: &mut Vec<NodeInstruction>) {
    match node {
        TreeNode::Leaf(l) => out.push(NodeInstruction {
            kind: match l.kind {
                LeafKind::Rate0 => InstructionKind::Rate0,
                LeafKind::Rate1 => InstructionKind::Rate1,
                LeafKind::Rep => InstructionKind::Rep,
                LeafKind::Spc => InstructionKind::Spc,
            },
            stage: l.stage,
            node_size: l.size(),
            leaf_offset: l.leaf_offset,
            ordinal: Some(l.ordinal),
        }),
        TreeNode::Branch { stage, leaf_offset, merged_rate0, left, right } => {
            let size = 1 << stage;
            if *merged_rate0 {
                let ordinal = match left.as_ref() {
                    TreeNode::Leaf(l) => l.ordinal,
                    _ => unreachable!("merged left child is a Rate-0 leaf"),
                };
                out.push(NodeInstruction {
                    kind: InstructionKind::G0R,
                    stage: *stage,
                    node_size: size,
                    leaf_offset: *leaf_offset,
                    ordinal: Some(ordinal),
                });
            } else {
                out.push(NodeInstruction {
                    kind: InstructionKind::FBranch,
                    stage: *stage,
                    node_size: size,
                    leaf_offset: *leaf_offset,
                    ordinal: None,
                });
                flatten(left, out);
                out.push(NodeInstruction {
                    kind: InstructionKind::GBranch,
                    stage: *stage,
                    node_size: size,
                    leaf_offset: *leaf_offset,
                    ordinal: None,
                });
            }
            flatten(right, out);
            out.push(NodeInstruction {
                kind: InstructionKind::Combine,
                stage: *stage,
                node_size: size,
                leaf_offset: *leaf_offset,
                ordinal: None,
            });
        }
    }
}

/// Leaf-coverage check: spans of leaf-producing instructions are disjoint,
/// ascending and cover [0, N).
pub fn verify_leaf_coverage(schedule: &DecodeSchedule) -> bool {
    let mut next = 0usize;
    for inst in &schedule.instructions {
        if let Some((off, len)) = inst.leaf_span() {
            if off != next {
                return false;
            }
            next = off + len;
        }
    }
    next == schedule.block_len
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{construct_code, CodeConstructionSource};

    fn code_from_frozen(frozen: Vec<bool>) -> PolarCode {
        let n = frozen.len();
        let info_set: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
        PolarCode {
            n_bits: n.trailing_zeros() as usize,
            block_len: n,
            info_len: info_set.len(),
            crc_len: 0,
            info_set,
            frozen,
            crc_poly: crate::code::CRC16_POLY,
        }
    }

    #[test]
    fn pc16_8_with_size_cap_yields_the_four_outlined_nodes() {
        // frozen pattern of the canonical PC(16,8) tree figure
        let frozen: Vec<bool> = (0..16).map(|i| [0, 1, 2, 3, 4, 5, 6, 8].contains(&i)).collect();
        let code = code_from_frozen(frozen);
        let opts = ScheduleOptions {
            max_special_size: Some(4),
            max_spc_size: 4,
            ..ScheduleOptions::default()
        };
        let schedule = build_schedule(&code, &opts);
        let kinds: Vec<(LeafKind, usize)> =
            schedule.leaves.iter().map(|l| (l.kind, l.size())).collect();
        assert_eq!(
            kinds,
            vec![
                (LeafKind::Rate0, 4),
                (LeafKind::Rep, 4),
                (LeafKind::Spc, 4),
                (LeafKind::Rate1, 4),
            ]
        );
        assert!(verify_leaf_coverage(&schedule));
    }

    #[test]
    fn all_frozen_collapses_to_single_rate0() {
        let code = code_from_frozen(vec![true; 32]);
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        assert_eq!(schedule.leaves.len(), 1);
        assert_eq!(schedule.leaves[0].kind, LeafKind::Rate0);
        assert_eq!(schedule.leaves[0].size(), 32);
    }

    #[test]
    fn spc_size_cap_is_respected_with_full_coverage() {
        let code = construct_code(1024, 512, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let opts = ScheduleOptions { max_spc_size: 4, ..ScheduleOptions::default() };
        let schedule = build_schedule(&code, &opts);
        for l in &schedule.leaves {
            if l.kind == LeafKind::Spc {
                assert!(l.size() <= 4);
            }
        }
        assert!(verify_leaf_coverage(&schedule));
    }

    #[test]
    fn patterns_match_frozen_definitions() {
        let code = construct_code(256, 120, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        for l in &schedule.leaves {
            let span = &code.frozen[l.leaf_offset..l.leaf_offset + l.size()];
            match l.kind {
                LeafKind::Rate0 => assert!(span.iter().all(|&f| f)),
                LeafKind::Rate1 => assert!(span.iter().all(|&f| !f)),
                LeafKind::Rep => {
                    assert!(span[..span.len() - 1].iter().all(|&f| f));
                    assert!(!span[span.len() - 1]);
                }
                LeafKind::Spc => {
                    assert!(span[0]);
                    assert!(span[1..].iter().all(|&f| !f));
                }
            }
        }
        assert!(verify_leaf_coverage(&schedule));
    }

    #[test]
    fn ordinals_are_execution_ordered() {
        let code = construct_code(512, 256, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let schedule = build_schedule(&code, &ScheduleOptions::default());
        for (i, l) in schedule.leaves.iter().enumerate() {
            assert_eq!(l.ordinal, i);
        }
        let mut seen = Vec::new();
        for inst in &schedule.instructions {
            if let Some(o) = inst.ordinal {
                seen.push(o);
            }
        }
        let mut sorted = seen.clone();
        sorted.sort_unstable();
        assert_eq!(seen, sorted);
        assert_eq!(seen.len(), schedule.leaves.len());
    }
}
