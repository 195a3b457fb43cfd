use std::collections::HashSet;

use serde::Serialize;

use super::{MapError, MappingParams, RoundKind, RoundStats};
use crate::aig::{Aig, NodeId};
use crate::cuts::enumerate_cuts;
use crate::genlib::CellLibrary;
use crate::matching::{GateMatch, MatchIndex};

/// A cut reduced to its support, with the matches for each output phase.
pub(super) struct Candidate {
    pub leaves: Vec<NodeId>,
    pub matches: [Vec<GateMatch>; 2],
}

/// A selected match for one phase, with its arrival time and area flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(super) struct Choice {
    pub cand: usize,
    pub m: usize,
    pub arrival: f64,
    pub flow: f64,
}

/// How a node's two phases are implemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Config {
    /// Each referenced phase uses its own gate.
    Both,
    /// Only this phase has a gate; the other is its inverted copy.
    Single(usize),
}

#[derive(Clone, Debug)]
pub(super) struct NodeState {
    pub best: [Option<Choice>; 2],
    pub config: Config,
    pub arrival: [f64; 2],
    pub flow: [f64; 2],
    pub required: [f64; 2],
    pub refs: [u32; 2],
    pub est_fanout: f64,
}

/// Read-only view of one (node, phase) entry of the mapping state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchRecord {
    pub gate: Option<String>,
    pub leaves: Vec<NodeId>,
    pub leaf_phases: Vec<bool>,
    /// True when the phase is the inverted copy of the other phase.
    pub via_inverter: bool,
    pub arrival: f64,
    pub flow: f64,
    pub required: f64,
    pub refs: u32,
    pub est_fanout: f64,
}

/// Mapping state for one network, advanced one round at a time.
pub struct Mapper<'a> {
    pub(super) aig: Aig,
    pub(super) lib: &'a CellLibrary,
    pub(super) params: MappingParams,
    pub(super) cands: Vec<Vec<Candidate>>,
    pub(super) fanout: Vec<u32>,
    pub(super) nodes: Vec<NodeState>,
    pub(super) inv_area: f64,
    pub(super) inv_delay: f64,
    pub(super) round: usize,
    pub(super) trace: Vec<RoundStats>,
    pub(super) cover_area: f64,
}

impl<'a> Mapper<'a> {
    /// Prepares cuts and candidate matches. The network is swept of constant
    /// and duplicate-fanin AND nodes first; node ids refer to the swept copy.
    pub fn new(aig: &Aig, lib: &'a CellLibrary, index: &MatchIndex, params: MappingParams) -> Result<Mapper<'a>, MapError> {
        params.validate()?;
        if index.max_inputs() < params.cut_size.min(lib.gates().iter().map(|g| g.num_inputs()).max().unwrap_or(0)) {
            return Err(MapError::InvalidParams(format!(
                "match index built for {} inputs, cut size is {}",
                index.max_inputs(),
                params.cut_size
            )));
        }
        let aig = aig.sweep();
        let cuts = enumerate_cuts(&aig, params.cut_size, params.cut_limit);
        let mut cands: Vec<Vec<Candidate>> = Vec::with_capacity(aig.num_nodes());
        for (node, node_cuts) in cuts.iter().enumerate() {
            let mut list = Vec::new();
            if aig.is_and(node) {
                let mut seen = HashSet::new();
                for cut in node_cuts.iter().filter(|c| !c.is_trivial_for(node)) {
                    let support = cut.truth.support();
                    let leaves: Vec<NodeId> = support.iter().map(|&i| cut.leaves[i]).collect();
                    let truth = cut.truth.project(&support);
                    if !seen.insert((leaves.clone(), truth)) {
                        continue;
                    }
                    let all = index.lookup(&truth);
                    let matches = [
                        all.iter().filter(|m| !m.output_phase).cloned().collect::<Vec<_>>(),
                        all.iter().filter(|m| m.output_phase).cloned().collect::<Vec<_>>(),
                    ];
                    if matches[0].is_empty() && matches[1].is_empty() {
                        continue;
                    }
                    list.push(Candidate { leaves, matches });
                }
            }
            cands.push(list);
        }
        let fanout = aig.fanout_counts();
        let inv = lib.inverter();
        let (inv_area, inv_delay) = (inv.area, inv.delay());
        let mut nodes = Vec::with_capacity(aig.num_nodes());
        for node in 0..aig.num_nodes() {
            let (arrival, flow, config) = if node == 0 {
                let tie = |v| lib.tie_index(v).map_or(0.0, |g| lib.gate(g).area);
                ([0.0, 0.0], [tie(false), tie(true)], Config::Both)
            } else if aig.is_input(node) {
                ([0.0, inv_delay], [0.0, inv_area], Config::Single(0))
            } else {
                ([f64::INFINITY; 2], [f64::INFINITY; 2], Config::Both)
            };
            nodes.push(NodeState {
                best: [None, None],
                config,
                arrival,
                flow,
                required: [f64::INFINITY; 2],
                refs: [0, 0],
                est_fanout: f64::from(fanout[node].max(1)),
            });
        }
        Ok(Mapper {
            aig,
            lib,
            params,
            cands,
            fanout,
            nodes,
            inv_area,
            inv_delay,
            round: 0,
            trace: Vec::new(),
            cover_area: 0.0,
        })
    }

    /// The swept network being mapped.
    pub fn aig(&self) -> &Aig {
        &self.aig
    }

    pub fn params(&self) -> &MappingParams {
        &self.params
    }

    pub fn rounds_done(&self) -> usize {
        self.round
    }

    pub fn trace(&self) -> &[RoundStats] {
        &self.trace
    }

    /// Area of the current cover.
    pub fn cover_area(&self) -> f64 {
        self.cover_area
    }

    /// Reference counts of both phases of every node.
    pub fn refs(&self) -> Vec<[u32; 2]> {
        self.nodes.iter().map(|n| n.refs).collect()
    }

    pub fn record(&self, node: NodeId, phase: usize) -> MatchRecord {
        let st = &self.nodes[node];
        let via_inverter = match st.config {
            Config::Single(p) => p != phase,
            Config::Both => false,
        } && node != 0;
        let mut rec = MatchRecord {
            gate: None,
            leaves: Vec::new(),
            leaf_phases: Vec::new(),
            via_inverter,
            arrival: st.arrival[phase],
            flow: st.flow[phase],
            required: st.required[phase],
            refs: st.refs[phase],
            est_fanout: st.est_fanout,
        };
        if via_inverter {
            rec.gate = Some(self.lib.inverter().name.clone());
        } else if let Some(ch) = st.best[phase] {
            let (gate, pins) = self.choice_pins(node, phase, &ch);
            rec.gate = Some(self.lib.gate(gate).name.clone());
            rec.leaves = pins.iter().map(|p| p.0).collect();
            rec.leaf_phases = pins.iter().map(|p| p.1 == 1).collect();
        }
        rec
    }

    /// Gate index and the (leaf, phase) driving each gate pin, in pin order.
    pub(super) fn choice_pins(&self, node: NodeId, phase: usize, ch: &Choice) -> (usize, Vec<(NodeId, usize)>) {
        let cand = &self.cands[node][ch.cand];
        let m = &cand.matches[phase][ch.m];
        let pins = m
            .input_order
            .iter()
            .map(|&pos| (cand.leaves[pos as usize], m.leaf_phase(pos as usize) as usize))
            .collect();
        (m.gate, pins)
    }

    /// Runs the next round and returns its statistics.
    pub fn run_round(&mut self) -> Result<RoundStats, MapError> {
        let r = self.round;
        if r >= self.params.total_rounds() {
            return Err(MapError::InvalidParams(format!("all {r} rounds already ran")));
        }
        let kind = self.params.round_kind(r);
        let alpha = self.params.alpha(r);
        match kind {
            RoundKind::Delay | RoundKind::Flow => {
                let alpha = alpha.unwrap_or(1.0);
                for v in self.aig.first_and()..self.aig.num_nodes() {
                    for phase in 0..2 {
                        self.nodes[v].best[phase] = self.match_phase(v, phase, kind, alpha);
                    }
                    self.match_drop_phase(v, kind);
                }
            }
            RoundKind::Exact => {
                for v in self.aig.first_and()..self.aig.num_nodes() {
                    self.exact_node(v)?;
                }
            }
        }
        let stats = self.finish_round(r, kind, alpha)?;
        self.round += 1;
        self.trace.push(stats.clone());
        Ok(stats)
    }

    fn finish_round(&mut self, round: usize, kind: RoundKind, alpha: Option<f64>) -> Result<RoundStats, MapError> {
        let area = self.rebuild_cover()?;
        let delay = self.cover_delay();
        let target = match self.params.target_delay {
            Some(t) => t.max(delay),
            None => delay,
        };
        self.propagate_required(target);
        for (node, st) in self.nodes.iter_mut().enumerate() {
            let used = f64::from(st.refs[0] + st.refs[1]);
            st.est_fanout = (0.5 * f64::from(self.fanout[node]) + 0.5 * used).max(1.0);
        }
        Ok(RoundStats { round, kind, alpha, area, delay })
    }

    /// Largest output arrival time of the current cover.
    pub fn cover_delay(&self) -> f64 {
        self.aig
            .outputs()
            .iter()
            .map(|l| self.nodes[l.node()].arrival[l.is_complemented() as usize])
            .fold(0.0, f64::max)
    }

    /// Every (node, phase) with a nonzero reference count.
    pub fn covered(&self) -> Vec<(NodeId, usize)> {
        let mut out = Vec::new();
        for (node, st) in self.nodes.iter().enumerate() {
            for phase in 0..2 {
                if st.refs[phase] > 0 {
                    out.push((node, phase));
                }
            }
        }
        out
    }
}
