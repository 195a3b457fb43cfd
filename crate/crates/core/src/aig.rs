//! Combinational and-inverter graphs.
//!
//! Nodes are numbered the AIGER way: node 0 is constant false, nodes
//! `1..=num_inputs` are primary inputs and the AND nodes follow. Every AND
//! node's fanins refer to strictly smaller node indices, so ascending index
//! order is always a topological order.

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a node in an [`Aig`].
pub type NodeId = usize;

/// A possibly complemented reference to a node, encoded as `2 * node + complemented`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    pub fn new(node: NodeId, complemented: bool) -> Lit {
        Lit((node as u32) << 1 | complemented as u32)
    }

    pub fn from_code(code: u32) -> Lit {
        Lit(code)
    }

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn node(self) -> NodeId {
        (self.0 >> 1) as NodeId
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    /// Same node, complemented iff `phase` is set on top of the current polarity.
    pub fn xor_phase(self, phase: bool) -> Lit {
        Lit(self.0 ^ phase as u32)
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!{}", self.node())
        } else {
            write!(f, "{}", self.node())
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct AndNode {
    pub fanin0: Lit,
    pub fanin1: Lit,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigError {
    #[error("expected {expected} input values, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("AND node {node} references literal {lit} which is not below it")]
    FaninOrder { node: NodeId, lit: u32 },
    #[error("output {index} references undefined literal {lit}")]
    DanglingOutput { index: usize, lit: u32 },
}

/// A combinational and-inverter graph with optional port names.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Aig {
    num_inputs: usize,
    ands: Vec<AndNode>,
    outputs: Vec<Lit>,
    input_names: Vec<Option<String>>,
    output_names: Vec<Option<String>>,
    /// Free-form comment lines carried through from the source file.
    pub comments: Vec<String>,
}

impl Aig {
    pub fn new(num_inputs: usize) -> Aig {
        Aig {
            num_inputs,
            ands: Vec::new(),
            outputs: Vec::new(),
            input_names: vec![None; num_inputs],
            output_names: Vec::new(),
            comments: Vec::new(),
        }
    }

    /// Builds a network from raw parts, checking the ordering invariant.
    pub fn from_parts(num_inputs: usize, ands: Vec<AndNode>, outputs: Vec<Lit>) -> Result<Aig, AigError> {
        let first_and = num_inputs + 1;
        for (i, and) in ands.iter().enumerate() {
            let node = first_and + i;
            for lit in [and.fanin0, and.fanin1] {
                if lit.node() >= node {
                    return Err(AigError::FaninOrder { node, lit: lit.code() });
                }
            }
        }
        let num_nodes = first_and + ands.len();
        for (index, lit) in outputs.iter().enumerate() {
            if lit.node() >= num_nodes {
                return Err(AigError::DanglingOutput { index, lit: lit.code() });
            }
        }
        let num_outputs = outputs.len();
        Ok(Aig {
            num_inputs,
            ands,
            outputs,
            input_names: vec![None; num_inputs],
            output_names: vec![None; num_outputs],
            comments: Vec::new(),
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Constant node plus inputs plus AND nodes.
    pub fn num_nodes(&self) -> usize {
        1 + self.num_inputs + self.ands.len()
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    pub fn ands(&self) -> &[AndNode] {
        &self.ands
    }

    pub fn first_and(&self) -> NodeId {
        self.num_inputs + 1
    }

    pub fn is_input(&self, node: NodeId) -> bool {
        node >= 1 && node <= self.num_inputs
    }

    pub fn is_and(&self, node: NodeId) -> bool {
        node > self.num_inputs && node < self.num_nodes()
    }

    pub fn input_node(&self, index: usize) -> NodeId {
        index + 1
    }

    pub fn and_node(&self, node: NodeId) -> Option<&AndNode> {
        node.checked_sub(self.first_and()).and_then(|i| self.ands.get(i))
    }

    pub fn input_name(&self, index: usize) -> String {
        match self.input_names.get(index) {
            Some(Some(name)) => name.clone(),
            _ => format!("pi{index}"),
        }
    }

    pub fn output_name(&self, index: usize) -> String {
        match self.output_names.get(index) {
            Some(Some(name)) => name.clone(),
            _ => format!("po{index}"),
        }
    }

    pub fn raw_input_name(&self, index: usize) -> Option<&str> {
        self.input_names.get(index).and_then(|n| n.as_deref())
    }

    pub fn raw_output_name(&self, index: usize) -> Option<&str> {
        self.output_names.get(index).and_then(|n| n.as_deref())
    }

    pub fn set_input_name(&mut self, index: usize, name: impl Into<String>) {
        self.input_names[index] = Some(name.into());
    }

    pub fn set_output_name(&mut self, index: usize, name: impl Into<String>) {
        self.output_names[index] = Some(name.into());
    }

    pub fn input_lit(&self, index: usize) -> Lit {
        assert!(index < self.num_inputs, "input {index} out of range");
        Lit::new(index + 1, false)
    }

    /// Appends a raw AND node without any simplification.
    pub fn add_and(&mut self, a: Lit, b: Lit) -> Lit {
        let node = self.num_nodes();
        assert!(a.node() < node && b.node() < node, "fanin out of range");
        self.ands.push(AndNode { fanin0: a, fanin1: b });
        Lit::new(node, false)
    }

    pub fn add_output(&mut self, lit: Lit) -> usize {
        assert!(lit.node() < self.num_nodes(), "output literal out of range");
        self.outputs.push(lit);
        self.output_names.push(None);
        self.outputs.len() - 1
    }

    /// AND with constant folding and trivial fanin simplification.
    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == Lit::FALSE || b == Lit::FALSE || a == !b {
            Lit::FALSE
        } else if a == Lit::TRUE || a == b {
            b
        } else if b == Lit::TRUE {
            a
        } else if a < b {
            self.add_and(a, b)
        } else {
            self.add_and(b, a)
        }
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let x = self.and(a, !b);
        let y = self.and(!a, b);
        self.or(x, y)
    }

    /// `sel ? then : other`
    pub fn mux(&mut self, sel: Lit, then: Lit, other: Lit) -> Lit {
        let x = self.and(sel, then);
        let y = self.and(!sel, other);
        self.or(x, y)
    }

    pub fn fanins(&self, node: NodeId) -> Option<[Lit; 2]> {
        self.and_node(node).map(|n| [n.fanin0, n.fanin1])
    }

    /// Inputs and AND nodes in ascending index order; the constant node is omitted.
    pub fn topological_order(&self) -> Vec<NodeId> {
        (1..self.num_nodes()).collect()
    }

    /// Structural reference counts: AND fanins plus output references.
    pub fn fanout_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.num_nodes()];
        for and in &self.ands {
            counts[and.fanin0.node()] += 1;
            counts[and.fanin1.node()] += 1;
        }
        for lit in &self.outputs {
            counts[lit.node()] += 1;
        }
        counts
    }

    /// AND-level of every node (inputs and constant at level 0).
    pub fn levels(&self) -> Vec<u32> {
        let mut level = vec![0u32; self.num_nodes()];
        let first = self.first_and();
        for (i, and) in self.ands.iter().enumerate() {
            level[first + i] = 1 + level[and.fanin0.node()].max(level[and.fanin1.node()]);
        }
        level
    }

    /// Longest AND path from any input to any output.
    pub fn depth(&self) -> u32 {
        let level = self.levels();
        self.outputs.iter().map(|l| level[l.node()]).max().unwrap_or(0)
    }

    /// Evaluates the network on one input assignment.
    pub fn simulate(&self, assignment: &[bool]) -> Result<Vec<bool>, AigError> {
        let words: Vec<u64> = assignment.iter().map(|&b| if b { !0 } else { 0 }).collect();
        Ok(self.simulate_words(&words)?.into_iter().map(|w| w & 1 == 1).collect())
    }

    /// Evaluates 64 assignments at once; bit `j` of every word belongs to pattern `j`.
    pub fn simulate_words(&self, inputs: &[u64]) -> Result<Vec<u64>, AigError> {
        let values = self.node_words(inputs)?;
        Ok(self.outputs.iter().map(|&l| lit_word(&values, l)).collect())
    }

    /// Word-parallel values of every node.
    pub fn node_words(&self, inputs: &[u64]) -> Result<Vec<u64>, AigError> {
        if inputs.len() != self.num_inputs {
            return Err(AigError::WidthMismatch { expected: self.num_inputs, got: inputs.len() });
        }
        let mut values = Vec::with_capacity(self.num_nodes());
        values.push(0u64);
        values.extend_from_slice(inputs);
        for and in &self.ands {
            let v = lit_word(&values, and.fanin0) & lit_word(&values, and.fanin1);
            values.push(v);
        }
        Ok(values)
    }

    /// Folds constant fanins and AND nodes whose fanins share a node.
    ///
    /// Inputs, outputs and names are preserved; AND nodes that survive keep
    /// their relative order. Nodes are not hashed or otherwise restructured.
    pub fn sweep(&self) -> Aig {
        let mut out = Aig::new(self.num_inputs);
        out.input_names = self.input_names.clone();
        out.comments = self.comments.clone();
        let mut map: Vec<Lit> = Vec::with_capacity(self.num_nodes());
        map.push(Lit::FALSE);
        for i in 0..self.num_inputs {
            map.push(out.input_lit(i));
        }
        for and in &self.ands {
            let a = map[and.fanin0.node()].xor_phase(and.fanin0.is_complemented());
            let b = map[and.fanin1.node()].xor_phase(and.fanin1.is_complemented());
            let lit = if a.node() == b.node() || a.is_const() || b.is_const() {
                out.and(a, b)
            } else {
                out.add_and(a, b)
            };
            map.push(lit);
        }
        for (j, lit) in self.outputs.iter().enumerate() {
            let mapped = map[lit.node()].xor_phase(lit.is_complemented());
            out.add_output(mapped);
            out.output_names[j] = self.output_names[j].clone();
        }
        out
    }
}

#[inline]
pub(crate) fn lit_word(values: &[u64], lit: Lit) -> u64 {
    let v = values[lit.node()];
    if lit.is_complemented() {
        !v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> Aig {
        let mut aig = Aig::new(2);
        let a = aig.input_lit(0);
        let b = aig.input_lit(1);
        let n = aig.add_and(a, b);
        aig.add_output(n);
        aig
    }

    #[test]
    fn literal_encoding() {
        let l = Lit::new(7, true);
        assert_eq!(l.code(), 15);
        assert_eq!(l.node(), 7);
        assert!(l.is_complemented());
        assert_eq!(!l, Lit::new(7, false));
        assert_eq!(Lit::from_code(15), l);
        assert_eq!(!Lit::FALSE, Lit::TRUE);
    }

    #[test]
    fn and_truth_table() {
        let aig = and2();
        assert_eq!(aig.simulate(&[true, true]).unwrap(), vec![true]);
        assert_eq!(aig.simulate(&[true, false]).unwrap(), vec![false]);
        assert_eq!(aig.simulate(&[false, true]).unwrap(), vec![false]);
    }

    #[test]
    fn complemented_output() {
        let mut aig = and2();
        let n = aig.outputs()[0];
        aig.add_output(!n);
        assert_eq!(aig.simulate(&[true, true]).unwrap(), vec![true, false]);
    }

    #[test]
    fn width_mismatch() {
        let aig = and2();
        assert_eq!(
            aig.simulate(&[true]),
            Err(AigError::WidthMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn topological_order_single_and() {
        assert_eq!(and2().topological_order(), vec![1, 2, 3]);
    }

    #[test]
    fn topological_order_chain() {
        let mut aig = Aig::new(3);
        let a = aig.add_and(aig.input_lit(0), aig.input_lit(1));
        let b = aig.add_and(a, aig.input_lit(2));
        let c = aig.add_and(b, !aig.input_lit(0));
        aig.add_output(c);
        let order = aig.topological_order();
        assert_eq!(&order[3..], &[a.node(), b.node(), c.node()]);
    }

    #[test]
    fn fanout_pass_through() {
        let mut aig = Aig::new(1);
        aig.add_output(aig.input_lit(0));
        assert_eq!(aig.fanout_counts(), vec![0, 1]);
    }

    #[test]
    fn fanout_same_input_twice() {
        let mut aig = Aig::new(1);
        let a = aig.input_lit(0);
        let n = aig.add_and(a, a);
        aig.add_output(n);
        assert_eq!(aig.fanout_counts()[1], 2);
    }

    #[test]
    fn fanout_balanced_tree() {
        let mut aig = Aig::new(8);
        let mut layer: Vec<Lit> = (0..8).map(|i| aig.input_lit(i)).collect();
        while layer.len() > 1 {
            layer = layer.chunks(2).map(|p| aig.add_and(p[0], !p[1])).collect();
        }
        aig.add_output(layer[0]);
        let counts = aig.fanout_counts();
        assert!(counts[1..].iter().all(|&c| c == 1));
        assert_eq!(counts.iter().sum::<u32>() as usize, 2 * aig.num_ands() + aig.num_outputs());
        assert_eq!(aig.depth(), 3);
    }

    #[test]
    fn from_parts_rejects_forward_reference() {
        let ands = vec![AndNode { fanin0: Lit::new(3, false), fanin1: Lit::new(1, false) }];
        assert!(matches!(Aig::from_parts(2, ands, vec![]), Err(AigError::FaninOrder { node: 3, .. })));
    }

    #[test]
    fn sweep_folds_degenerate_nodes() {
        let mut aig = Aig::new(2);
        let a = aig.input_lit(0);
        let b = aig.input_lit(1);
        let same = aig.add_and(a, a);
        let contra = aig.add_and(b, !b);
        let c = aig.add_and(same, !contra);
        let d = aig.add_and(c, b);
        aig.add_output(d);
        aig.add_output(contra);
        let swept = aig.sweep();
        assert_eq!(swept.num_ands(), 1);
        assert_eq!(swept.outputs()[1], Lit::FALSE);
        for x in 0..4u32 {
            let asg = [x & 1 == 1, x & 2 == 2];
            assert_eq!(aig.simulate(&asg).unwrap(), swept.simulate(&asg).unwrap());
        }
    }
}
