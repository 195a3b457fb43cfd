//! Gate-level netlists produced by the mapper or read back from BLIF.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::genlib::CellLibrary;
use crate::truth::TruthTable;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("unknown gate {0}")]
    UnknownGate(String),
    #[error("gate {gate} has {expected} pins but instance {output} binds {got}")]
    PinCount { gate: String, output: String, expected: usize, got: usize },
    #[error("net {0} has more than one driver")]
    MultipleDrivers(String),
    #[error("net {0} is used but never driven")]
    Undriven(String),
    #[error("combinational cycle through net {0}")]
    Cycle(String),
    #[error("expected {expected} input words, got {got}")]
    WidthMismatch { expected: usize, got: usize },
}

/// A library gate instance. `inputs[j]` drives gate pin `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub gate: String,
    pub inputs: Vec<String>,
    pub output: String,
}

/// A technology-independent function node, used for constants and for
/// `.names` covers read from BLIF. It contributes no area or delay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogicNode {
    pub inputs: Vec<String>,
    pub output: String,
    pub truth: TruthTable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputBinding {
    pub name: String,
    pub net: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MappedNetlist {
    pub model: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<OutputBinding>,
    pub instances: Vec<Instance>,
    pub logic: Vec<LogicNode>,
    pub area: f64,
    pub delay: f64,
}

enum Driver<'a> {
    Gate(&'a Instance, usize),
    Logic(&'a LogicNode),
}

impl<'a> Driver<'a> {
    fn inputs(&self) -> &'a [String] {
        match self {
            Driver::Gate(inst, _) => &inst.inputs,
            Driver::Logic(node) => &node.inputs,
        }
    }

    fn output(&self) -> &'a str {
        match self {
            Driver::Gate(inst, _) => &inst.output,
            Driver::Logic(node) => &node.output,
        }
    }
}

impl MappedNetlist {
    pub fn num_inverters(&self, lib: &CellLibrary) -> usize {
        let inv = &lib.inverter().name;
        self.instances.iter().filter(|i| &i.gate == inv).count()
    }

    /// Drivers in an order where every driver follows the drivers of its inputs.
    fn ordered_drivers<'a>(&'a self, lib: &CellLibrary) -> Result<Vec<Driver<'a>>, NetlistError> {
        let mut drivers: Vec<Driver<'a>> = Vec::new();
        for inst in &self.instances {
            let gi = lib.find(&inst.gate).ok_or_else(|| NetlistError::UnknownGate(inst.gate.clone()))?;
            let expected = lib.gate(gi).num_inputs();
            if expected != inst.inputs.len() {
                return Err(NetlistError::PinCount {
                    gate: inst.gate.clone(),
                    output: inst.output.clone(),
                    expected,
                    got: inst.inputs.len(),
                });
            }
            drivers.push(Driver::Gate(inst, gi));
        }
        drivers.extend(self.logic.iter().map(Driver::Logic));

        let mut driven: HashMap<&str, usize> = HashMap::new();
        let primary: HashSet<&str> = self.inputs.iter().map(String::as_str).collect();
        for (i, d) in drivers.iter().enumerate() {
            if primary.contains(d.output()) || driven.insert(d.output(), i).is_some() {
                return Err(NetlistError::MultipleDrivers(d.output().to_string()));
            }
        }
        let mut pending: Vec<usize> = vec![0; drivers.len()];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); drivers.len()];
        for (i, d) in drivers.iter().enumerate() {
            for net in d.inputs() {
                if primary.contains(net.as_str()) {
                    continue;
                }
                let &src = driven.get(net.as_str()).ok_or_else(|| NetlistError::Undriven(net.clone()))?;
                pending[i] += 1;
                users[src].push(i);
            }
        }
        for out in &self.outputs {
            if !primary.contains(out.net.as_str()) && !driven.contains_key(out.net.as_str()) {
                return Err(NetlistError::Undriven(out.net.clone()));
            }
        }
        let mut ready: Vec<usize> = (0..drivers.len()).filter(|&i| pending[i] == 0).collect();
        ready.reverse();
        let mut order = Vec::with_capacity(drivers.len());
        while let Some(i) = ready.pop() {
            order.push(i);
            for &u in &users[i] {
                pending[u] -= 1;
                if pending[u] == 0 {
                    ready.push(u);
                }
            }
        }
        if order.len() != drivers.len() {
            let stuck = (0..drivers.len()).find(|&i| pending[i] > 0).unwrap();
            return Err(NetlistError::Cycle(drivers[stuck].output().to_string()));
        }
        let mut slots: Vec<Option<Driver<'a>>> = drivers.into_iter().map(Some).collect();
        Ok(order.into_iter().map(|i| slots[i].take().unwrap()).collect())
    }

    /// Evaluates 64 input patterns at once, one word per primary input.
    pub fn simulate_words(&self, lib: &CellLibrary, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        let order = self.ordered_drivers(lib)?;
        self.simulate_ordered(lib, &order, inputs)
    }

    fn simulate_ordered(&self, lib: &CellLibrary, order: &[Driver<'_>], inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        if inputs.len() != self.inputs.len() {
            return Err(NetlistError::WidthMismatch { expected: self.inputs.len(), got: inputs.len() });
        }
        let mut values: HashMap<&str, u64> = HashMap::new();
        for (name, &w) in self.inputs.iter().zip(inputs) {
            values.insert(name, w);
        }
        for d in order {
            let words: Vec<u64> = d.inputs().iter().map(|n| values[n.as_str()]).collect();
            let truth = match d {
                Driver::Gate(_, gi) => lib.gate(*gi).truth,
                Driver::Logic(node) => node.truth,
            };
            values.insert(d.output(), eval_truth(truth, &words));
        }
        Ok(self.outputs.iter().map(|o| values[o.net.as_str()]).collect())
    }

    /// Returns a reusable evaluator, avoiding repeated ordering work.
    pub fn evaluator<'a>(&'a self, lib: &'a CellLibrary) -> Result<NetlistEvaluator<'a>, NetlistError> {
        Ok(NetlistEvaluator { netlist: self, lib, order: self.ordered_drivers(lib)? })
    }
}

pub struct NetlistEvaluator<'a> {
    netlist: &'a MappedNetlist,
    lib: &'a CellLibrary,
    order: Vec<Driver<'a>>,
}

impl NetlistEvaluator<'_> {
    pub fn simulate_words(&self, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        self.netlist.simulate_ordered(self.lib, &self.order, inputs)
    }
}

/// Word-parallel evaluation of a truth table: OR of its minterms.
fn eval_truth(truth: TruthTable, words: &[u64]) -> u64 {
    let mut out = 0u64;
    for m in 0..1usize << words.len() {
        if !truth.value(m) {
            continue;
        }
        let mut term = !0u64;
        for (j, &w) in words.iter().enumerate() {
            term &= if m >> j & 1 == 1 { w } else { !w };
        }
        out |= term;
    }
    out
}

/// Total instance area and longest pin-to-output path delay.
pub fn measure(netlist: &MappedNetlist, lib: &CellLibrary) -> Result<(f64, f64), NetlistError> {
    let order = netlist.ordered_drivers(lib)?;
    let mut area = 0.0;
    let mut arrival: HashMap<&str, f64> = netlist.inputs.iter().map(|n| (n.as_str(), 0.0)).collect();
    for d in &order {
        let t = match d {
            Driver::Gate(inst, gi) => {
                let gate = lib.gate(*gi);
                area += gate.area;
                inst.inputs
                    .iter()
                    .enumerate()
                    .map(|(j, n)| arrival[n.as_str()] + gate.pin_delay(j))
                    .fold(0.0, f64::max)
            }
            Driver::Logic(node) => node.inputs.iter().map(|n| arrival[n.as_str()]).fold(0.0, f64::max),
        };
        arrival.insert(d.output(), t);
    }
    let delay = netlist.outputs.iter().map(|o| arrival[o.net.as_str()]).fold(0.0, f64::max);
    Ok((area, delay))
}
