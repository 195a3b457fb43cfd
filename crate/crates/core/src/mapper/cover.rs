//! Reference counting over the cover and required-time propagation.
//!
//! A node contributes up to three items to the cover: a gate for each phase
//! and an inverter deriving one phase from the other. Which items exist
//! follows from the node's configuration and its reference counts, so
//! referencing and dereferencing only need to diff the item sets.

use super::state::{Config, Mapper};
use super::MapError;
use crate::aig::NodeId;

type Items = [bool; 3];
const INVERTER: usize = 2;

impl Mapper<'_> {
    pub(super) fn items(&self, v: NodeId) -> Items {
        let st = &self.nodes[v];
        let [r0, r1] = st.refs;
        if v == 0 {
            return [r0 > 0, r1 > 0, false];
        }
        if self.aig.is_input(v) {
            return [false, false, r1 > 0];
        }
        match st.config {
            Config::Both => [r0 > 0, r1 > 0, false],
            Config::Single(p) => {
                let mut items = [false; 3];
                items[p] = r0 + r1 > 0;
                items[INVERTER] = st.refs[1 - p] > 0;
                items
            }
        }
    }

    /// Area of item `item` of `v`; pushes the (leaf, phase) pairs it consumes.
    fn item_cost(&self, v: NodeId, item: usize, leaves: &mut Vec<(NodeId, usize)>) -> Result<f64, MapError> {
        if item == INVERTER {
            return Ok(self.inv_area);
        }
        if v == 0 {
            return Ok(self.lib.tie_index(item == 1).map_or(0.0, |g| self.lib.gate(g).area));
        }
        let ch = self.nodes[v].best[item].ok_or(MapError::NoMatch { node: v, phase: item })?;
        let (gate, pins) = self.choice_pins(v, item, &ch);
        leaves.extend(pins);
        Ok(self.lib.gate(gate).area)
    }

    /// Area of items present in `to` but not in `from`.
    fn diff_cost(&self, v: NodeId, from: Items, to: Items, leaves: &mut Vec<(NodeId, usize)>) -> Result<f64, MapError> {
        let mut area = 0.0;
        for item in 0..3 {
            if to[item] && !from[item] {
                area += self.item_cost(v, item, leaves)?;
            }
        }
        Ok(area)
    }

    /// References every pair on the stack, recursively instantiating what
    /// becomes used. Returns the added area.
    pub(super) fn reference_all(&mut self, mut stack: Vec<(NodeId, usize)>) -> Result<f64, MapError> {
        let mut area = 0.0;
        while let Some((u, phase)) = stack.pop() {
            let before = self.items(u);
            self.nodes[u].refs[phase] += 1;
            let after = self.items(u);
            area += self.diff_cost(u, before, after, &mut stack)?;
        }
        Ok(area)
    }

    /// Inverse of [`Mapper::reference_all`]. Returns the released area.
    pub(super) fn dereference_all(&mut self, mut stack: Vec<(NodeId, usize)>) -> Result<f64, MapError> {
        let mut area = 0.0;
        while let Some((u, phase)) = stack.pop() {
            if self.nodes[u].refs[phase] == 0 {
                return Err(MapError::RefUnderflow { node: u, phase });
            }
            let before = self.items(u);
            self.nodes[u].refs[phase] -= 1;
            let after = self.items(u);
            area += self.diff_cost(u, after, before, &mut stack)?;
        }
        Ok(area)
    }

    /// Adds one reference to (`v`, `phase`); returns the area this adds to the cover.
    pub fn reference(&mut self, v: NodeId, phase: usize) -> Result<f64, MapError> {
        self.reference_all(vec![(v, phase)])
    }

    /// Removes one reference from (`v`, `phase`); returns the area released.
    pub fn dereference(&mut self, v: NodeId, phase: usize) -> Result<f64, MapError> {
        self.dereference_all(vec![(v, phase)])
    }

    /// Area (`v`, `phase`) would add to the current cover if referenced once more.
    pub fn trial_reference(&mut self, v: NodeId, phase: usize) -> Result<f64, MapError> {
        let area = self.reference(v, phase)?;
        self.dereference(v, phase)?;
        Ok(area)
    }

    /// Removes the items of `v` from the cover while keeping its own reference counts.
    pub fn release_node(&mut self, v: NodeId) -> Result<f64, MapError> {
        let mut leaves = Vec::new();
        let own = self.diff_cost(v, [false; 3], self.items(v), &mut leaves)?;
        let below = self.dereference_all(leaves)?;
        self.cover_area -= own + below;
        Ok(own + below)
    }

    /// Instantiates the items of `v` implied by its reference counts.
    pub fn acquire_node(&mut self, v: NodeId) -> Result<f64, MapError> {
        let mut leaves = Vec::new();
        let own = self.diff_cost(v, [false; 3], self.items(v), &mut leaves)?;
        let below = self.reference_all(leaves)?;
        self.cover_area += own + below;
        Ok(own + below)
    }

    /// Clears all reference counts and references every output again.
    pub(super) fn rebuild_cover(&mut self) -> Result<f64, MapError> {
        for st in &mut self.nodes {
            st.refs = [0, 0];
        }
        let outputs: Vec<(NodeId, usize)> = self
            .aig
            .outputs()
            .iter()
            .map(|l| (l.node(), l.is_complemented() as usize))
            .collect();
        let mut area = 0.0;
        for (node, phase) in outputs {
            area += self.reference(node, phase)?;
        }
        self.cover_area = area;
        Ok(area)
    }

    /// Sets output required times to `target` and propagates them backwards
    /// through the current cover.
    pub fn propagate_required(&mut self, target: f64) {
        for st in &mut self.nodes {
            st.required = [f64::INFINITY; 2];
        }
        for l in self.aig.outputs().to_vec() {
            let r = &mut self.nodes[l.node()].required[l.is_complemented() as usize];
            *r = r.min(target);
        }
        for v in (1..self.aig.num_nodes()).rev() {
            let items = self.items(v);
            if items[INVERTER] {
                let p = match self.nodes[v].config {
                    Config::Single(p) if self.aig.is_and(v) => p,
                    _ => 0,
                };
                let from = self.nodes[v].required[1 - p] - self.inv_delay;
                let r = &mut self.nodes[v].required[p];
                *r = r.min(from);
            }
            if !self.aig.is_and(v) {
                continue;
            }
            for phase in 0..2 {
                if !items[phase] {
                    continue;
                }
                let Some(ch) = self.nodes[v].best[phase] else { continue };
                let (gate, pins) = self.choice_pins(v, phase, &ch);
                let gate = self.lib.gate(gate);
                let req = self.nodes[v].required[phase];
                for (pin, (leaf, lp)) in pins.into_iter().enumerate() {
                    let r = &mut self.nodes[leaf].required[lp];
                    *r = r.min(req - gate.pin_delay(pin));
                }
            }
        }
    }
}
