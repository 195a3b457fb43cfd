//! Boolean matching of cut functions against library gates.
//!
//! The index is built by brute force: every gate with at most `k` inputs is
//! expanded under all input permutations, input negations and both output
//! polarities, and each resulting function is recorded as a key.

use std::collections::{HashMap, HashSet};

use log::warn;
use serde::Serialize;

use crate::genlib::CellLibrary;
use crate::truth::{TruthTable, MAX_VARS};

/// One way of realizing a cut function with a library gate.
///
/// Gate pin `j` is driven by cut leaf `input_order[j]`. Bit `i` of
/// `leaf_phases` set means leaf `i` must be supplied complemented. The gate's
/// output equals the key function complemented `output_phase` times, so a
/// match with `output_phase = true` implements the node's negative phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GateMatch {
    pub gate: usize,
    pub input_order: Vec<u8>,
    pub leaf_phases: u8,
    pub output_phase: bool,
}

impl GateMatch {
    pub fn leaf_phase(&self, leaf: usize) -> bool {
        self.leaf_phases >> leaf & 1 == 1
    }

    /// The key function this match realizes, over `input_order.len()` leaves.
    pub fn realized(&self, gate_truth: TruthTable) -> TruthTable {
        apply(gate_truth, &self.input_order, self.leaf_phases, self.output_phase)
    }
}

fn apply(gate_truth: TruthTable, order: &[u8], phases: u8, output_phase: bool) -> TruthTable {
    TruthTable::from_fn(order.len(), |m| {
        let mut pins = 0usize;
        for (j, &leaf) in order.iter().enumerate() {
            let bit = (m >> leaf & 1) ^ (phases as usize >> leaf & 1);
            pins |= bit << j;
        }
        gate_truth.value(pins) ^ output_phase
    })
}

#[derive(Clone, Debug, Default)]
pub struct MatchIndex {
    max_inputs: usize,
    map: HashMap<TruthTable, Vec<GateMatch>>,
}

impl MatchIndex {
    pub fn max_inputs(&self) -> usize {
        self.max_inputs
    }

    pub fn lookup(&self, key: &TruthTable) -> &[GateMatch] {
        self.map.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Keys in ascending order.
    pub fn keys(&self) -> Vec<TruthTable> {
        let mut keys: Vec<TruthTable> = self.map.keys().copied().collect();
        keys.sort();
        keys
    }
}

/// Builds the match index for gates with at most `k` inputs.
pub fn build_match_index(lib: &CellLibrary, k: usize) -> MatchIndex {
    let k = k.min(MAX_VARS);
    let mut map: HashMap<TruthTable, Vec<GateMatch>> = HashMap::new();
    let mut seen: HashSet<(TruthTable, usize, u8, bool)> = HashSet::new();
    for (gi, gate) in lib.gates().iter().enumerate() {
        let n = gate.num_inputs();
        if n > k {
            warn!("gate {} has {n} inputs, more than the cut size {k}; not matched", gate.name);
            continue;
        }
        // permutations are generated in lexicographic order, so the first
        // one seen for a (key, phases) pair is the minimal representative
        for order in permutations(n) {
            for phases in 0..1u16 << n {
                let phases = phases as u8;
                for output_phase in [false, true] {
                    let key = apply(gate.truth, &order, phases, output_phase);
                    if seen.insert((key, gi, phases, output_phase)) {
                        map.entry(key).or_default().push(GateMatch {
                            gate: gi,
                            input_order: order.clone(),
                            leaf_phases: phases,
                            output_phase,
                        });
                    }
                }
            }
        }
    }
    for list in map.values_mut() {
        list.sort_by(|a, b| {
            lib.gate(a.gate)
                .name
                .cmp(&lib.gate(b.gate).name)
                .then(a.output_phase.cmp(&b.output_phase))
                .then(a.leaf_phases.cmp(&b.leaf_phases))
                .then(a.input_order.cmp(&b.input_order))
        });
    }
    MatchIndex { max_inputs: k, map }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut current: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genlib::parse_genlib;

    const INV: &str = "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\n";

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0), vec![Vec::<u8>::new()]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn inverter_only_index() {
        let lib = parse_genlib(INV).unwrap();
        let idx = build_match_index(&lib, 4);
        assert_eq!(idx.keys(), vec![TruthTable::new(0b01, 1), TruthTable::new(0b10, 1)]);
    }

    #[test]
    fn and_is_nand_with_output_phase() {
        let lib = parse_genlib(&format!("{INV}GATE nand2 2 O=!(a*b); PIN * INV 1 999 1 0 1 0")).unwrap();
        let idx = build_match_index(&lib, 4);
        let and = TruthTable::new(0b1000, 2);
        let nand = lib.find("nand2").unwrap();
        assert!(idx
            .lookup(&and)
            .iter()
            .any(|m| m.gate == nand && m.output_phase && m.leaf_phases == 0));
        // symmetric gate: one entry per phase assignment, not one per permutation
        let direct: Vec<_> = idx.lookup(&and).iter().filter(|m| m.gate == nand && m.output_phase).collect();
        assert_eq!(direct.len(), 1);
        assert_eq!(direct[0].input_order, vec![0, 1]);
    }

    #[test]
    fn every_entry_reconstructs_its_key() {
        let lib = crate::genlib::mini_library();
        let idx = build_match_index(&lib, 4);
        for key in idx.keys() {
            for m in idx.lookup(&key) {
                assert_eq!(m.realized(lib.gate(m.gate).truth), key);
            }
        }
    }
}
