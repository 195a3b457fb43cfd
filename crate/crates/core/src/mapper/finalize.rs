//! Conversion of the final cover into a gate-level netlist.

use std::collections::{HashMap, HashSet};

use log::warn;

use super::state::{Config, Mapper};
use super::MapError;
use crate::aig::NodeId;
use crate::netlist::{measure, Instance, LogicNode, MappedNetlist, OutputBinding};
use crate::truth::TruthTable;

struct Namer {
    used: HashSet<String>,
}

impl Namer {
    fn fresh(&mut self, base: String) -> String {
        if self.used.insert(base.clone()) {
            return base;
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.used.contains(n))
            .inspect(|n| {
                self.used.insert(n.clone());
            })
            .unwrap()
    }
}

impl Mapper<'_> {
    /// Builds the netlist of the current cover and measures it.
    pub fn finalize(&self) -> Result<MappedNetlist, MapError> {
        let aig = &self.aig;
        let inv = self.lib.inverter().name.clone();
        let input_names: Vec<String> = (0..aig.num_inputs()).map(|i| aig.input_name(i)).collect();
        let output_names: Vec<String> = (0..aig.num_outputs()).map(|j| aig.output_name(j)).collect();
        let mut namer = Namer { used: input_names.iter().chain(&output_names).cloned().collect() };
        let mut nets: HashMap<(NodeId, usize), String> = HashMap::new();
        for (i, name) in input_names.iter().enumerate() {
            nets.insert((aig.input_node(i), 0), name.clone());
        }

        let mut netlist = MappedNetlist {
            inputs: input_names.clone(),
            ..Default::default()
        };

        for v in 0..aig.num_nodes() {
            let st = &self.nodes[v];
            let items = self.items(v);
            if v == 0 {
                for phase in 0..2 {
                    if !items[phase] {
                        continue;
                    }
                    let net = namer.fresh(format!("const{phase}"));
                    match self.lib.tie_index(phase == 1) {
                        Some(g) => netlist.instances.push(Instance {
                            gate: self.lib.gate(g).name.clone(),
                            inputs: Vec::new(),
                            output: net.clone(),
                        }),
                        None => {
                            warn!("library has no tie cell for constant {phase}; emitting a constant driver");
                            netlist.logic.push(LogicNode {
                                inputs: Vec::new(),
                                output: net.clone(),
                                truth: TruthTable::constant(phase == 1, 0),
                            });
                        }
                    }
                    nets.insert((0, phase), net);
                }
                continue;
            }
            if aig.is_input(v) {
                if items[2] {
                    let src = nets[&(v, 0)].clone();
                    let out = namer.fresh(format!("{src}_n"));
                    netlist.instances.push(Instance { gate: inv.clone(), inputs: vec![src], output: out.clone() });
                    nets.insert((v, 1), out);
                }
                continue;
            }
            for phase in 0..2 {
                if !items[phase] {
                    continue;
                }
                let ch = st.best[phase].ok_or(MapError::NoMatch { node: v, phase })?;
                let (gate, pins) = self.choice_pins(v, phase, &ch);
                let inputs = pins.iter().map(|p| nets[p].clone()).collect();
                let suffix = if phase == 1 { "_n" } else { "" };
                let out = namer.fresh(format!("n{v}{suffix}"));
                netlist.instances.push(Instance { gate: self.lib.gate(gate).name.clone(), inputs, output: out.clone() });
                nets.insert((v, phase), out);
            }
            if items[2] {
                let Config::Single(p) = st.config else { unreachable!("inverter without single configuration") };
                let q = 1 - p;
                let suffix = if q == 1 { "_n" } else { "" };
                let out = namer.fresh(format!("n{v}{suffix}"));
                netlist.instances.push(Instance { gate: inv.clone(), inputs: vec![nets[&(v, p)].clone()], output: out.clone() });
                nets.insert((v, q), out);
            }
        }

        for (j, lit) in aig.outputs().iter().enumerate() {
            let key = (lit.node(), lit.is_complemented() as usize);
            let net = nets.get(&key).cloned().ok_or(MapError::NoMatch { node: key.0, phase: key.1 })?;
            netlist.outputs.push(OutputBinding { name: output_names[j].clone(), net });
        }
        let (area, delay) = measure(&netlist, self.lib)?;
        netlist.area = area;
        netlist.delay = delay;
        Ok(netlist)
    }
}
