//! Test-side generators and brute-force oracles, written independently of
//! the library's cut enumeration and matching code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use techmap::{Aig, CellLibrary, Lit};

/// Random network: every AND has two fanins on distinct, non-constant nodes.
pub fn random_aig(seed: u64, max_inputs: usize, max_ands: usize) -> Aig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_inputs);
    let m = rng.random_range(1..=max_ands);
    let mut aig = Aig::new(n);
    let mut used = vec![false; n + 1 + m];
    for i in 0..m {
        let avail = n + i;
        let a = 1 + rng.random_range(0..avail);
        let mut b = 1 + rng.random_range(0..avail);
        while b == a {
            b = 1 + rng.random_range(0..avail);
        }
        used[a] = true;
        used[b] = true;
        aig.add_and(Lit::new(a, rng.random()), Lit::new(b, rng.random()));
    }
    let last = n + m;
    aig.add_output(Lit::new(last, rng.random()));
    for node in (n + 1..last).rev() {
        if !used[node] || rng.random_bool(0.15) {
            aig.add_output(Lit::new(node, rng.random()));
        }
    }
    aig
}

/// Random fanout-free tree over distinct inputs with one output.
pub fn random_tree(seed: u64, leaves: usize) -> Aig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut aig = Aig::new(leaves);
    let mut pool: Vec<Lit> = (0..leaves).map(|i| aig.input_lit(i).xor_phase(rng.random())).collect();
    while pool.len() > 1 {
        let a = pool.swap_remove(rng.random_range(0..pool.len()));
        let b = pool.swap_remove(rng.random_range(0..pool.len()));
        let y = aig.add_and(a, b);
        pool.push(y.xor_phase(rng.random()));
    }
    aig.add_output(pool[0]);
    aig
}

/// Value of every node under one assignment, by recursive evaluation.
fn node_value(aig: &Aig, node: usize, assign: &dyn Fn(usize) -> Option<bool>) -> bool {
    if let Some(v) = assign(node) {
        return v;
    }
    if node == 0 {
        return false;
    }
    let [a, b] = aig.fanins(node).expect("path escaped the cut");
    let va = node_value(aig, a.node(), assign) ^ a.is_complemented();
    let vb = node_value(aig, b.node(), assign) ^ b.is_complemented();
    va && vb
}

/// True if every path from `root` to an input meets a node of `set`.
fn separates(aig: &Aig, root: usize, set: &[usize]) -> bool {
    if set.contains(&root) {
        return true;
    }
    match aig.fanins(root) {
        None => root == 0,
        Some([a, b]) => separates(aig, a.node(), set) && separates(aig, b.node(), set),
    }
}

fn cone(aig: &Aig, root: usize, out: &mut Vec<usize>) {
    if let Some([a, b]) = aig.fanins(root) {
        for l in [a, b] {
            if !out.contains(&l.node()) {
                out.push(l.node());
                cone(aig, l.node(), out);
            }
        }
    }
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &x in items {
        let grown: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut t = s.clone();
                t.push(x);
                t
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Every minimal leaf set of size 1..=k separating `root` from the inputs,
/// with the root function as a minterm list over the leaves (leaf 0 least
/// significant). Sets containing a smaller separating set are left out.
pub fn all_cuts(aig: &Aig, root: usize, k: usize) -> Vec<(Vec<usize>, Vec<bool>)> {
    let mut nodes = Vec::new();
    cone(aig, root, &mut nodes);
    nodes.retain(|&n| n != 0);
    nodes.sort();
    let mut out = Vec::new();
    for set in subsets(&nodes, k) {
        if set.is_empty() || !separates(aig, root, &set) {
            continue;
        }
        let minimal = (0..set.len()).all(|i| {
            let mut smaller = set.clone();
            smaller.remove(i);
            smaller.is_empty() || !separates(aig, root, &smaller)
        });
        if !minimal {
            continue;
        }
        let table = (0..1usize << set.len())
            .map(|m| {
                let lookup = |n: usize| set.iter().position(|&l| l == n).map(|i| m >> i & 1 == 1);
                node_value(aig, root, &lookup)
            })
            .collect();
        out.push((set, table));
    }
    out
}

/// A gate application found by brute force: gate index, leaf per pin, and
/// the leaf phase per pin.
#[derive(Clone, Debug)]
pub struct Implementation {
    pub gate: usize,
    pub pin_leaf: Vec<usize>,
    pub pin_phase: Vec<bool>,
}

fn injections(pins: usize, leaves: usize) -> Vec<Vec<usize>> {
    if pins == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in injections(pins - 1, leaves) {
        for l in 0..leaves {
            if !rest.contains(&l) {
                let mut v = rest.clone();
                v.push(l);
                out.push(v);
            }
        }
    }
    out
}

/// Every way a library gate computes `table` complemented `phase` times.
pub fn implementations(lib: &CellLibrary, table: &[bool], num_leaves: usize, phase: bool) -> Vec<Implementation> {
    let mut out = Vec::new();
    for (gi, gate) in lib.gates().iter().enumerate() {
        let n = gate.num_inputs();
        if n > num_leaves {
            continue;
        }
        for inj in injections(n, num_leaves) {
            for ph in 0..1usize << n {
                let ok = (0..1usize << num_leaves).all(|m| {
                    let mut pins = 0usize;
                    for (j, &leaf) in inj.iter().enumerate() {
                        let bit = (m >> leaf & 1) ^ (ph >> j & 1);
                        pins |= bit << j;
                    }
                    gate.truth.value(pins) == (table[m] ^ phase)
                });
                if ok {
                    out.push(Implementation {
                        gate: gi,
                        pin_leaf: inj.clone(),
                        pin_phase: (0..n).map(|j| ph >> j & 1 == 1).collect(),
                    });
                }
            }
        }
    }
    out
}

/// Per (node, phase) minimum of a cost that combines leaf costs with `join`,
/// with the inverter option between the two phases.
fn dp(
    aig: &Aig,
    lib: &CellLibrary,
    k: usize,
    input_cost: [f64; 2],
    inv_cost: f64,
    join: &dyn Fn(usize, &[f64]) -> f64,
) -> Vec<[f64; 2]> {
    let mut best = vec![[f64::INFINITY; 2]; aig.num_nodes()];
    best[0] = [0.0, 0.0];
    for i in 0..aig.num_inputs() {
        best[aig.input_node(i)] = input_cost;
    }
    for v in aig.first_and()..aig.num_nodes() {
        let mut gate_only = [f64::INFINITY; 2];
        for (leaves, table) in all_cuts(aig, v, k) {
            for phase in 0..2 {
                for imp in implementations(lib, &table, leaves.len(), phase == 1) {
                    let costs: Vec<f64> = imp
                        .pin_leaf
                        .iter()
                        .zip(&imp.pin_phase)
                        .map(|(&l, &p)| best[leaves[l]][p as usize])
                        .collect();
                    gate_only[phase] = gate_only[phase].min(join(imp.gate, &costs));
                }
            }
        }
        best[v] = [
            gate_only[0].min(gate_only[1] + inv_cost),
            gate_only[1].min(gate_only[0] + inv_cost),
        ];
    }
    best
}

/// Minimum achievable output delay over all covers built from cuts of at most `k` leaves.
pub fn min_delay(aig: &Aig, lib: &CellLibrary, k: usize) -> f64 {
    let d_inv = lib.inverter().delay();
    let join = |g: usize, arr: &[f64]| {
        let gate = lib.gate(g);
        arr.iter().enumerate().map(|(j, a)| a + gate.pin_delay(j)).fold(0.0, f64::max)
    };
    let best = dp(aig, lib, k, [0.0, d_inv], d_inv, &join);
    aig.outputs()
        .iter()
        .map(|l| best[l.node()][l.is_complemented() as usize])
        .fold(0.0, f64::max)
}

/// Minimum cover area of a single-output fanout-free network.
pub fn min_tree_area(aig: &Aig, lib: &CellLibrary, k: usize) -> f64 {
    let a_inv = lib.inverter().area;
    let join = |g: usize, areas: &[f64]| lib.gate(g).area + areas.iter().sum::<f64>();
    let best = dp(aig, lib, k, [0.0, a_inv], a_inv, &join);
    let out = aig.outputs()[0];
    best[out.node()][out.is_complemented() as usize]
}
