//! The three per-node operators: phase matching, exact-area phase matching
//! and phase unification.

use std::cmp::Ordering;

use super::state::{Choice, Config, Mapper};
use super::{MapError, RoundKind, EPS};
use crate::aig::NodeId;
use crate::genome::TieBreak;

fn cmp_eps(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EPS {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

impl Mapper<'_> {
    /// Arrival time and area flow of match `m` of candidate `cand` for `phase`.
    pub(super) fn evaluate(&self, v: NodeId, phase: usize, cand: usize, m: usize) -> Choice {
        let c = &self.cands[v][cand];
        let gm = &c.matches[phase][m];
        let gate = self.lib.gate(gm.gate);
        let mut arrival: f64 = 0.0;
        let mut flow = gate.area;
        for (pin, &pos) in gm.input_order.iter().enumerate() {
            let leaf = &self.nodes[c.leaves[pos as usize]];
            let lp = gm.leaf_phase(pos as usize) as usize;
            arrival = arrival.max(leaf.arrival[lp] + gate.pin_delay(pin));
            flow += leaf.flow[lp] / leaf.est_fanout;
        }
        Choice { cand, m, arrival, flow }
    }

    fn refresh(&self, v: NodeId, phase: usize, ch: Option<Choice>) -> Option<Choice> {
        ch.map(|c| self.evaluate(v, phase, c.cand, c.m))
    }

    fn tie_less(&self, v: NodeId, phase: usize, c: &Choice, b: &Choice) -> bool {
        let leaves = |x: &Choice| self.cands[v][x.cand].leaves.len();
        let name = |x: &Choice| &self.lib.gate(self.cands[v][x.cand].matches[phase][x.m].gate).name;
        let by_delay = cmp_eps(c.arrival, b.arrival);
        let by_leaves = leaves(c).cmp(&leaves(b));
        let first = match self.params.genome.match_phase.tie_break {
            TieBreak::CostDelayLeaves => by_delay.then(by_leaves),
            TieBreak::CostLeavesDelay => by_leaves.then(by_delay),
        };
        first.then(cmp_eps(c.flow, b.flow)).then_with(|| name(c).cmp(name(b))) == Ordering::Less
    }

    /// True if candidate `c` should replace the current best `b`.
    fn prefers(&self, v: NodeId, phase: usize, kind: RoundKind, alpha: f64, c: &Choice, b: &Choice) -> bool {
        let cost = |x: &Choice| alpha * x.arrival + (1.0 - alpha) * x.flow;
        let (cc, cb) = (cost(c), cost(b));
        if cc < cb - EPS {
            return true;
        }
        let knobs = &self.params.genome.match_phase;
        let faster = c.arrival < b.arrival - EPS;
        match kind {
            RoundKind::Delay => {
                let t_tol = knobs.k_tol * self.inv_area;
                if faster
                    && cc <= cb + t_tol + EPS
                    && (c.flow - b.flow <= t_tol + EPS || b.arrival - c.arrival >= knobs.k_dgain * self.inv_delay - EPS)
                {
                    return true;
                }
            }
            RoundKind::Flow => {
                let t_slack = knobs.k_slack * self.inv_area;
                if faster && c.flow <= b.flow + t_slack + EPS {
                    return true;
                }
            }
            RoundKind::Exact => {}
        }
        (cc - cb).abs() <= EPS && self.tie_less(v, phase, c, b)
    }

    /// Selects the best match of `v` in `phase` under the blended cost.
    pub(super) fn match_phase(&self, v: NodeId, phase: usize, kind: RoundKind, alpha: f64) -> Option<Choice> {
        let required = self.nodes[v].required[phase];
        let feasible = |c: &Choice| c.arrival <= required + EPS;
        let mut best = self.refresh(v, phase, self.nodes[v].best[phase]).filter(feasible);
        let mut fastest: Option<Choice> = None;
        for cand in 0..self.cands[v].len() {
            for m in 0..self.cands[v][cand].matches[phase].len() {
                let c = self.evaluate(v, phase, cand, m);
                if !feasible(&c) {
                    if fastest.is_none_or(|f| c.arrival < f.arrival - EPS) {
                        fastest = Some(c);
                    }
                    continue;
                }
                match &best {
                    Some(b) if !self.prefers(v, phase, kind, alpha, &c, b) => {}
                    _ => best = Some(c),
                }
            }
        }
        best.or(fastest)
    }

    /// Recomputes the effective arrival and flow of both phases from the
    /// node's configuration.
    pub(super) fn update_effective(&mut self, v: NodeId) {
        let (inv_area, inv_delay) = (self.inv_area, self.inv_delay);
        let st = &mut self.nodes[v];
        match st.config {
            Config::Both => {
                for phase in 0..2 {
                    st.arrival[phase] = st.best[phase].map_or(f64::INFINITY, |c| c.arrival);
                    st.flow[phase] = st.best[phase].map_or(f64::INFINITY, |c| c.flow);
                }
            }
            Config::Single(p) => {
                let b = st.best[p].expect("single configuration without a match");
                st.arrival[p] = b.arrival;
                st.flow[p] = b.flow;
                st.arrival[1 - p] = b.arrival + inv_delay;
                st.flow[1 - p] = b.flow + inv_area;
            }
        }
    }

    /// Decides whether one phase of `v` is better served from the other
    /// through an inverter, in a delay or flow round.
    pub(super) fn match_drop_phase(&mut self, v: NodeId, kind: RoundKind) {
        let st = &self.nodes[v];
        let knobs = &self.params.genome.match_drop_phase;
        let config = match st.best {
            [None, None] => Config::Both,
            [Some(_), None] => Config::Single(0),
            [None, Some(_)] => Config::Single(1),
            [Some(b0), Some(b1)] => {
                let b = [b0, b1];
                let mut keep: Option<usize> = None;
                for p in 0..2 {
                    let q = 1 - p;
                    let via_inv = b[p].arrival + self.inv_delay;
                    if via_inv > st.required[q] + EPS {
                        continue;
                    }
                    let ok = match kind {
                        RoundKind::Delay => {
                            if !knobs.enabled_in_delay_round {
                                false
                            } else {
                                let area_ok =
                                    self.inv_area <= b[q].flow + knobs.drop_tol_delay_round * self.inv_area + EPS;
                                let faster = via_inv < b[q].arrival - EPS;
                                let tie_cheaper = (via_inv - b[q].arrival).abs() <= EPS && self.inv_area < b[q].flow - EPS;
                                (faster && area_ok) || tie_cheaper
                            }
                        }
                        _ => b[p].flow + self.inv_area < b[q].flow + knobs.drop_tol_other * self.inv_area - EPS,
                    };
                    if ok && keep.is_none_or(|k| b[p].flow < b[k].flow - EPS) {
                        keep = Some(p);
                    }
                }
                keep.map_or(Config::Both, Config::Single)
            }
        };
        self.nodes[v].config = config;
        self.update_effective(v);
    }

    /// Exact local area of `choice`: the gate plus everything its leaves
    /// would newly instantiate. The cover is left unchanged.
    fn exact_area(&mut self, v: NodeId, phase: usize, ch: &Choice) -> Result<f64, MapError> {
        let (gate, pins) = self.choice_pins(v, phase, ch);
        let added = self.reference_all(pins.clone())?;
        self.dereference_all(pins)?;
        Ok(self.lib.gate(gate).area + added)
    }

    /// Selects the match of `v` in `phase` with the smallest exact area
    /// within the timing limit.
    pub(super) fn match_phase_exact(&mut self, v: NodeId, phase: usize) -> Result<Option<Choice>, MapError> {
        let knobs = self.params.genome.match_phase_exact.clone();
        let t_gain = knobs.k_exact * self.inv_area;
        let current = self.nodes[v].arrival[phase];
        let required = self.nodes[v].required[phase];
        let limit = if required.is_infinite() {
            f64::INFINITY
        } else {
            current + knobs.slack_fraction * (required - current).max(0.0)
        };
        let mut best: Option<(Choice, f64)> = None;
        if let Some(inc) = self.refresh(v, phase, self.nodes[v].best[phase]) {
            best = Some((inc, self.exact_area(v, phase, &inc)?));
        }
        for cand in 0..self.cands[v].len() {
            for m in 0..self.cands[v][cand].matches[phase].len() {
                let c = self.evaluate(v, phase, cand, m);
                if c.arrival > limit + EPS {
                    continue;
                }
                let e = self.exact_area(v, phase, &c)?;
                let wins = match &best {
                    None => true,
                    Some((b, eb)) => {
                        (e < eb - EPS && (c.arrival <= b.arrival + EPS || eb - e >= t_gain - EPS))
                            || ((e - eb).abs() <= EPS && c.arrival < b.arrival - EPS)
                    }
                };
                if wins {
                    best = Some((c, e));
                }
            }
        }
        Ok(best.map(|(c, _)| c))
    }

    /// One exact-area step at `v`: release its gates, rematch both phases,
    /// pick the cheapest feasible configuration and instantiate it again.
    pub(super) fn exact_node(&mut self, v: NodeId) -> Result<(), MapError> {
        let used = self.nodes[v].refs.iter().any(|&r| r > 0);
        if used {
            self.release_node(v)?;
        }
        let old_best = [
            self.refresh(v, 0, self.nodes[v].best[0]),
            self.refresh(v, 1, self.nodes[v].best[1]),
        ];
        let old_config = self.nodes[v].config;
        let new_best = [self.match_phase_exact(v, 0)?, self.match_phase_exact(v, 1)?];

        let mut options: Vec<([Option<Choice>; 2], Config)> = Vec::new();
        if old_best[0].is_some() || old_best[1].is_some() {
            options.push((old_best, old_config));
        }
        if new_best[0].is_some() && new_best[1].is_some() {
            options.push((new_best, Config::Both));
        }
        for p in 0..2 {
            if new_best[p].is_some() {
                options.push((new_best, Config::Single(p)));
            }
        }
        if options.is_empty() {
            return Err(MapError::NoMatch { node: v, phase: 0 });
        }

        if !used {
            self.nodes[v].best = new_best;
            self.nodes[v].config = match new_best {
                [Some(_), Some(_)] => Config::Both,
                [Some(_), None] => Config::Single(0),
                [None, Some(_)] => Config::Single(1),
                [None, None] => {
                    self.nodes[v].best = old_best;
                    old_config
                }
            };
            self.update_effective(v);
            return Ok(());
        }

        let refs = self.nodes[v].refs;
        let mut chosen: Option<(usize, f64)> = None;
        for (i, &(best, config)) in options.iter().enumerate() {
            if config == Config::Both && (0..2).any(|p| refs[p] > 0 && best[p].is_none()) {
                continue;
            }
            self.nodes[v].best = best;
            self.nodes[v].config = config;
            self.update_effective(v);
            let st = &self.nodes[v];
            let feasible = (0..2).all(|p| refs[p] == 0 || st.arrival[p] <= st.required[p] + EPS);
            if !feasible {
                continue;
            }
            let area = self.acquire_node(v)?;
            self.release_node(v)?;
            if chosen.is_none_or(|(_, a)| area < a - EPS) {
                chosen = Some((i, area));
            }
        }
        let (best, config) = options[chosen.map_or(0, |c| c.0)];
        self.nodes[v].best = best;
        self.nodes[v].config = config;
        self.update_effective(v);
        self.acquire_node(v)?;
        Ok(())
    }
}
