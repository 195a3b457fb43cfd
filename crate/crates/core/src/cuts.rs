//! Priority cut enumeration.
//!
//! Cuts are built bottom-up by merging fanin cuts. Each node keeps at most
//! `limit` non-dominated cuts ranked by size and by a structural area-flow
//! estimate of the leaves, followed by its trivial cut.

use std::collections::HashMap;

use thiserror::Error;

use crate::aig::{Aig, Lit, NodeId};
use crate::truth::{TruthTable, MAX_VARS};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cut {
    pub leaves: Vec<NodeId>,
    pub truth: TruthTable,
}

impl Cut {
    pub fn trivial(node: NodeId) -> Cut {
        Cut { leaves: vec![node], truth: TruthTable::var(0, 1) }
    }

    pub fn is_trivial_for(&self, node: NodeId) -> bool {
        self.leaves.len() == 1 && self.leaves[0] == node
    }

    /// True if every leaf of `self` is also a leaf of `other`.
    pub fn is_subset_of(&self, other: &Cut) -> bool {
        let mut j = 0;
        for &leaf in &self.leaves {
            while j < other.leaves.len() && other.leaves[j] < leaf {
                j += 1;
            }
            if j == other.leaves.len() || other.leaves[j] != leaf {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CutError {
    #[error("leaf set does not separate node {root} from input {input}")]
    NotACut { root: NodeId, input: NodeId },
    #[error("cut has {0} leaves, more than {MAX_VARS}")]
    TooWide(usize),
}

/// Cut lists per node, indexed by node id.
pub type CutSets = Vec<Vec<Cut>>;

/// Enumerates priority cuts with at most `k` leaves and at most `limit`
/// stored non-trivial cuts per node.
pub fn enumerate_cuts(aig: &Aig, k: usize, limit: usize) -> CutSets {
    assert!((2..=MAX_VARS).contains(&k), "cut size must be in 2..={MAX_VARS}");
    assert!(limit >= 1, "cut limit must be positive");
    let flow = structural_flow(aig);
    let mut sets: CutSets = Vec::with_capacity(aig.num_nodes());
    for node in 0..aig.num_nodes() {
        let Some([f0, f1]) = aig.fanins(node) else {
            sets.push(vec![Cut::trivial(node)]);
            continue;
        };
        let mut found: Vec<Cut> = Vec::new();
        for c0 in &sets[f0.node()] {
            for c1 in &sets[f1.node()] {
                let Some(leaves) = merge_leaves(&c0.leaves, &c1.leaves, k) else {
                    continue;
                };
                let t0 = lit_truth(c0, f0, &leaves);
                let t1 = lit_truth(c1, f1, &leaves);
                let cut = Cut { truth: t0.and(t1), leaves };
                insert_filtered(&mut found, cut);
            }
        }
        let leaf_flow = |c: &Cut| c.leaves.iter().map(|&l| flow[l]).sum::<f64>();
        found.sort_by(|a, b| {
            a.leaves
                .len()
                .cmp(&b.leaves.len())
                .then(leaf_flow(a).total_cmp(&leaf_flow(b)))
                .then_with(|| a.leaves.cmp(&b.leaves))
        });
        found.truncate(limit);
        found.push(Cut::trivial(node));
        sets.push(found);
    }
    sets
}

fn lit_truth(cut: &Cut, lit: Lit, leaves: &[NodeId]) -> TruthTable {
    cut.truth.expand(&cut.leaves, leaves).xor_phase(lit.is_complemented())
}

fn merge_leaves(a: &[NodeId], b: &[NodeId], k: usize) -> Option<Vec<NodeId>> {
    let mut out = Vec::with_capacity(k);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.len() == k {
            return None;
        }
        out.push(next);
    }
    Some(out)
}

/// Adds `cut` unless an existing cut dominates it; drops cuts it dominates.
fn insert_filtered(cuts: &mut Vec<Cut>, cut: Cut) {
    if cuts.iter().any(|c| c.is_subset_of(&cut)) {
        return;
    }
    cuts.retain(|c| !cut.is_subset_of(c));
    cuts.push(cut);
}

/// Area-flow estimate assuming one area unit per AND node.
fn structural_flow(aig: &Aig) -> Vec<f64> {
    let fanout = aig.fanout_counts();
    let mut flow = vec![0.0; aig.num_nodes()];
    for node in aig.first_and()..aig.num_nodes() {
        let [a, b] = aig.fanins(node).unwrap();
        let share = |l: Lit| flow[l.node()] / f64::from(fanout[l.node()].max(1));
        flow[node] = 1.0 + share(a) + share(b);
    }
    flow
}

/// Function of `root` over `leaves` (sorted ascending), by cone simulation.
pub fn cut_truth(aig: &Aig, root: NodeId, leaves: &[NodeId]) -> Result<TruthTable, CutError> {
    if leaves.len() > MAX_VARS {
        return Err(CutError::TooWide(leaves.len()));
    }
    let n = leaves.len();
    let mut memo: HashMap<NodeId, u64> = HashMap::new();
    for (i, &leaf) in leaves.iter().enumerate() {
        memo.insert(leaf, TruthTable::var(i, n.max(i + 1)).bits());
    }
    memo.entry(0).or_insert(0);
    let mut stack = vec![root];
    while let Some(&node) = stack.last() {
        if memo.contains_key(&node) {
            stack.pop();
            continue;
        }
        let Some([a, b]) = aig.fanins(node) else {
            return Err(CutError::NotACut { root, input: node });
        };
        match (memo.get(&a.node()), memo.get(&b.node())) {
            (Some(&va), Some(&vb)) => {
                let pa = if a.is_complemented() { !va } else { va };
                let pb = if b.is_complemented() { !vb } else { vb };
                memo.insert(node, pa & pb);
                stack.pop();
            }
            (va, vb) => {
                if va.is_none() {
                    stack.push(a.node());
                }
                if vb.is_none() {
                    stack.push(b.node());
                }
            }
        }
    }
    Ok(TruthTable::new(memo[&root], n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and() {
        let mut aig = Aig::new(2);
        let (a, b) = (aig.input_lit(0), aig.input_lit(1));
        let y = aig.add_and(a, b);
        aig.add_output(y);
        let sets = enumerate_cuts(&aig, 4, 8);
        assert_eq!(sets[3].len(), 2);
        assert_eq!(sets[3][0].leaves, vec![1, 2]);
        assert_eq!(sets[3][0].truth.bits(), 0b1000);
        assert!(sets[3][1].is_trivial_for(3));
        assert_eq!(sets[1], vec![Cut::trivial(1)]);
    }

    #[test]
    fn chain_respects_k() {
        let mut aig = Aig::new(3);
        let (a, b, c) = (aig.input_lit(0), aig.input_lit(1), aig.input_lit(2));
        let m = aig.add_and(a, b);
        let y = aig.add_and(m, c);
        aig.add_output(y);
        let sets = enumerate_cuts(&aig, 2, 8);
        let root = &sets[y.node()];
        assert!(root.iter().all(|c| c.leaves.len() <= 2));
        assert_eq!(root[0].leaves, vec![3, m.node()]);
    }

    #[test]
    fn truth_with_complemented_fanin() {
        let mut aig = Aig::new(2);
        let (a, b) = (aig.input_lit(0), aig.input_lit(1));
        let y = aig.add_and(!a, b);
        aig.add_output(y);
        // !a & b with a as variable 0: true at a=0,b=1 -> minterm 2
        assert_eq!(cut_truth(&aig, y.node(), &[1, 2]).unwrap().bits(), 0b0100);
        assert_eq!(cut_truth(&aig, y.node(), &[y.node()]).unwrap(), TruthTable::var(0, 1));
        assert_eq!(
            cut_truth(&aig, y.node(), &[1]).unwrap_err(),
            CutError::NotACut { root: y.node(), input: 2 }
        );
    }

    #[test]
    fn merge_bounds() {
        assert_eq!(merge_leaves(&[1, 3], &[2, 3], 3), Some(vec![1, 2, 3]));
        assert_eq!(merge_leaves(&[1, 3], &[2, 4], 3), None);
    }
}
