//! Writes the synthetic benchmark suites as binary AIGER files.
//!
//! Usage: `cargo run -p techmap-core --example gen_benchmarks -- <out_dir>`
//! creates `<out_dir>/bundled` and `<out_dir>/toy`.

use std::path::Path;

use techmap::{write_aig, Aig, Lit};

struct Builder {
    aig: Aig,
}

impl Builder {
    fn new(inputs: &[String]) -> Builder {
        let mut aig = Aig::new(inputs.len());
        for (i, n) in inputs.iter().enumerate() {
            aig.set_input_name(i, n.clone());
        }
        Builder { aig }
    }

    fn input(&self, i: usize) -> Lit {
        self.aig.input_lit(i)
    }

    fn output(&mut self, name: impl Into<String>, lit: Lit) {
        let j = self.aig.add_output(lit);
        self.aig.set_output_name(j, name);
    }

    fn nand(&mut self, a: Lit, b: Lit) -> Lit {
        !self.aig.and(a, b)
    }

    fn full_add(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let p = self.aig.xor(a, b);
        let s = self.aig.xor(p, c);
        let g = self.aig.and(a, b);
        let t = self.aig.and(p, c);
        (s, self.aig.or(g, t))
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn concat(parts: &[Vec<String>]) -> Vec<String> {
    parts.concat()
}

fn c17() -> Aig {
    let ins: Vec<String> = ["N1", "N2", "N3", "N6", "N7"].iter().map(|s| s.to_string()).collect();
    let mut b = Builder::new(&ins);
    let (n1, n2, n3, n6, n7) = (b.input(0), b.input(1), b.input(2), b.input(3), b.input(4));
    let n10 = b.nand(n1, n3);
    let n11 = b.nand(n3, n6);
    let n16 = b.nand(n2, n11);
    let n19 = b.nand(n11, n7);
    let n22 = b.nand(n10, n16);
    let n23 = b.nand(n16, n19);
    b.output("N22", n22);
    b.output("N23", n23);
    b.aig
}

fn ripple_adder(width: usize) -> Aig {
    let mut b = Builder::new(&concat(&[names("a", width), names("b", width)]));
    let mut carry = Lit::FALSE;
    for i in 0..width {
        let (x, y) = (b.input(i), b.input(width + i));
        let (s, c) = b.full_add(x, y, carry);
        b.output(format!("s{i}"), s);
        carry = c;
    }
    b.output("cout", carry);
    b.aig
}

fn multiplier(width: usize) -> Aig {
    let mut b = Builder::new(&concat(&[names("a", width), names("b", width)]));
    let mut acc = vec![Lit::FALSE; 2 * width];
    for j in 0..width {
        let mut carry = Lit::FALSE;
        for i in 0..width {
            let (x, y) = (b.input(i), b.input(width + j));
            let pp = b.aig.and(x, y);
            let (s, c) = b.full_add(acc[i + j], pp, carry);
            acc[i + j] = s;
            carry = c;
        }
        acc[j + width] = carry;
    }
    for (k, l) in acc.into_iter().enumerate() {
        b.output(format!("p{k}"), l);
    }
    b.aig
}

fn comparator(width: usize) -> Aig {
    let mut b = Builder::new(&concat(&[names("a", width), names("b", width)]));
    let mut lt = Lit::FALSE;
    let mut eq = Lit::TRUE;
    for i in 0..width {
        let (x, y) = (b.input(i), b.input(width + i));
        let bit_lt = b.aig.and(!x, y);
        let bit_eq = !b.aig.xor(x, y);
        let keep = b.aig.and(bit_eq, lt);
        lt = b.aig.or(bit_lt, keep);
        eq = b.aig.and(eq, bit_eq);
    }
    b.output("lt", lt);
    b.output("eq", eq);
    b.aig
}

fn mux_tree(sel_bits: usize) -> Aig {
    let n = 1 << sel_bits;
    let mut b = Builder::new(&concat(&[names("d", n), names("s", sel_bits)]));
    let mut level: Vec<Lit> = (0..n).map(|i| b.input(i)).collect();
    for s in 0..sel_bits {
        let sel = b.input(n + s);
        level = level.chunks(2).map(|p| b.aig.mux(sel, p[1], p[0])).collect();
    }
    b.output("y", level[0]);
    b.aig
}

fn parity(width: usize) -> Aig {
    let mut b = Builder::new(&names("x", width));
    let mut level: Vec<Lit> = (0..width).map(|i| b.input(i)).collect();
    while level.len() > 1 {
        level = level.chunks(2).map(|p| if p.len() == 2 { b.aig.xor(p[0], p[1]) } else { p[0] }).collect();
    }
    b.output("p", level[0]);
    b.aig
}

fn decoder(bits: usize) -> Aig {
    let mut b = Builder::new(&names("a", bits));
    for k in 0..1usize << bits {
        let mut t = Lit::TRUE;
        for i in 0..bits {
            let x = b.input(i).xor_phase(k >> i & 1 == 0);
            t = b.aig.and(t, x);
        }
        b.output(format!("y{k}"), t);
    }
    b.aig
}

fn alu(width: usize) -> Aig {
    let mut b = Builder::new(&concat(&[names("a", width), names("b", width), names("op", 2)]));
    let (op0, op1) = (b.input(2 * width), b.input(2 * width + 1));
    let mut carry = Lit::FALSE;
    for i in 0..width {
        let (x, y) = (b.input(i), b.input(width + i));
        let and = b.aig.and(x, y);
        let or = b.aig.or(x, y);
        let xor = b.aig.xor(x, y);
        let (sum, c) = b.full_add(x, y, carry);
        carry = c;
        let lo = b.aig.mux(op0, or, and);
        let hi = b.aig.mux(op0, sum, xor);
        let r = b.aig.mux(op1, hi, lo);
        b.output(format!("r{i}"), r);
    }
    let cout = b.aig.and(carry, op0);
    let cout = b.aig.and(cout, op1);
    b.output("cout", cout);
    b.aig
}

fn popcount(width: usize) -> Aig {
    let mut b = Builder::new(&names("x", width));
    // Column-wise reduction with full and half adders.
    let mut columns: Vec<Vec<Lit>> = vec![(0..width).map(|i| b.input(i)).collect()];
    let mut k = 0;
    while k < columns.len() {
        while columns[k].len() > 1 {
            let x = columns[k].remove(0);
            let y = columns[k].remove(0);
            let z = if columns[k].is_empty() { Lit::FALSE } else { columns[k].remove(0) };
            let (s, c) = b.full_add(x, y, z);
            columns[k].push(s);
            if columns.len() == k + 1 {
                columns.push(Vec::new());
            }
            columns[k + 1].push(c);
        }
        k += 1;
    }
    for (i, col) in columns.iter().enumerate() {
        b.output(format!("c{i}"), col.first().copied().unwrap_or(Lit::FALSE));
    }
    b.aig
}

fn priority_encoder(width: usize) -> Aig {
    let bits = width.trailing_zeros() as usize;
    let mut b = Builder::new(&names("r", width));
    // Highest-index request wins.
    let mut grant = Vec::with_capacity(width);
    let mut none_above = Lit::TRUE;
    for i in (0..width).rev() {
        let g = b.aig.and(b.input(i), none_above);
        grant.push((i, g));
        none_above = b.aig.and(none_above, !b.input(i));
    }
    for bit in 0..bits {
        let mut y = Lit::FALSE;
        for &(i, g) in &grant {
            if i >> bit & 1 == 1 {
                y = b.aig.or(y, g);
            }
        }
        b.output(format!("y{bit}"), y);
    }
    b.output("valid", !none_above);
    b.aig
}

fn barrel_rotate(width: usize) -> Aig {
    let bits = width.trailing_zeros() as usize;
    let mut b = Builder::new(&concat(&[names("d", width), names("s", bits)]));
    let mut level: Vec<Lit> = (0..width).map(|i| b.input(i)).collect();
    for s in 0..bits {
        let sel = b.input(width + s);
        let shift = 1 << s;
        level = (0..width).map(|i| b.aig.mux(sel, level[(i + width - shift) % width], level[i])).collect();
    }
    for (i, l) in level.into_iter().enumerate() {
        b.output(format!("y{i}"), l);
    }
    b.aig
}

fn majority(n: usize) -> Aig {
    let mut b = Builder::new(&names("x", n));
    // Sorting network; the middle wire carries the majority.
    let mut wires: Vec<Lit> = (0..n).map(|i| b.input(i)).collect();
    for i in 0..n {
        for j in (i + 1..n).rev() {
            let (hi, lo) = (b.aig.or(wires[i], wires[j]), b.aig.and(wires[i], wires[j]));
            wires[i] = hi;
            wires[j] = lo;
        }
    }
    b.output("maj", wires[n / 2]);
    b.aig
}

fn write(dir: &Path, name: &str, aig: &Aig) {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join(format!("{name}.aig"));
    std::fs::write(&path, write_aig(aig)).unwrap();
    println!("{} inputs={} ands={} depth={}", path.display(), aig.num_inputs(), aig.num_ands(), aig.depth());
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "benchmarks".into());
    let out = Path::new(&out);
    let bundled = out.join("bundled");
    write(&bundled, "c17", &c17());
    write(&bundled, "rca8", &ripple_adder(8));
    write(&bundled, "mult4", &multiplier(4));
    write(&bundled, "mult6", &multiplier(6));
    write(&bundled, "cmp8", &comparator(8));
    write(&bundled, "mux8", &mux_tree(3));
    write(&bundled, "parity16", &parity(16));
    write(&bundled, "dec4", &decoder(4));
    write(&bundled, "alu4", &alu(4));
    write(&bundled, "popcount8", &popcount(8));
    write(&bundled, "prio8", &priority_encoder(8));
    write(&bundled, "barrel8", &barrel_rotate(8));
    write(&bundled, "maj7", &majority(7));

    let toy = out.join("toy");
    write(&toy, "c17", &c17());
    write(&toy, "rca4", &ripple_adder(4));
    write(&toy, "mux4", &mux_tree(2));
    write(&toy, "cmp4", &comparator(4));
    write(&toy, "maj5", &majority(5));
}
