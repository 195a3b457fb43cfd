//! Truth tables over at most six variables.
//!
//! Bit `i` holds the function value at the assignment whose binary encoding
//! is `i`, with variable 0 as the least-significant bit.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const MAX_VARS: usize = 6;

const PROJECTIONS: [u64; MAX_VARS] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthTable {
    bits: u64,
    num_vars: u8,
}

impl TruthTable {
    pub fn new(bits: u64, num_vars: usize) -> TruthTable {
        assert!(num_vars <= MAX_VARS, "at most {MAX_VARS} variables");
        TruthTable { bits: bits & mask(num_vars), num_vars: num_vars as u8 }
    }

    pub fn constant(value: bool, num_vars: usize) -> TruthTable {
        TruthTable::new(if value { !0 } else { 0 }, num_vars)
    }

    /// The projection function `x_var` over `num_vars` variables.
    pub fn var(var: usize, num_vars: usize) -> TruthTable {
        assert!(var < num_vars);
        TruthTable::new(PROJECTIONS[var], num_vars)
    }

    pub fn from_fn(num_vars: usize, f: impl Fn(usize) -> bool) -> TruthTable {
        let mut bits = 0u64;
        for m in 0..1usize << num_vars {
            if f(m) {
                bits |= 1 << m;
            }
        }
        TruthTable::new(bits, num_vars)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn num_vars(self) -> usize {
        self.num_vars as usize
    }

    pub fn value(self, minterm: usize) -> bool {
        self.bits >> minterm & 1 == 1
    }

    pub fn not(self) -> TruthTable {
        TruthTable::new(!self.bits, self.num_vars())
    }

    pub fn and(self, other: TruthTable) -> TruthTable {
        debug_assert_eq!(self.num_vars, other.num_vars);
        TruthTable::new(self.bits & other.bits, self.num_vars())
    }

    pub fn xor_phase(self, phase: bool) -> TruthTable {
        if phase {
            self.not()
        } else {
            self
        }
    }

    pub fn depends_on(self, var: usize) -> bool {
        let shift = 1u32 << var;
        let p = PROJECTIONS[var] & mask(self.num_vars());
        ((self.bits & p) >> shift) != (self.bits & !p & mask(self.num_vars()))
    }

    /// Variables the function actually depends on, ascending.
    pub fn support(self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&v| self.depends_on(v)).collect()
    }

    /// Restricts the table to the listed variables (which must include the support).
    pub fn project(self, keep: &[usize]) -> TruthTable {
        TruthTable::from_fn(keep.len(), |m| {
            let mut full = 0usize;
            for (j, &v) in keep.iter().enumerate() {
                full |= (m >> j & 1) << v;
            }
            self.value(full)
        })
    }

    /// Re-expresses a function over `from` leaves as a function over `to` leaves.
    ///
    /// `from` must be a subset of `to`; both are sorted ascending.
    pub fn expand<T: Ord>(self, from: &[T], to: &[T]) -> TruthTable {
        debug_assert_eq!(from.len(), self.num_vars());
        let positions: Vec<usize> = from
            .iter()
            .map(|leaf| to.binary_search(leaf).expect("expand: leaf missing from target set"))
            .collect();
        TruthTable::from_fn(to.len(), |m| {
            let mut sub = 0usize;
            for (j, &p) in positions.iter().enumerate() {
                sub |= (m >> p & 1) << j;
            }
            self.value(sub)
        })
    }
}

fn mask(num_vars: usize) -> u64 {
    if num_vars >= MAX_VARS {
        !0
    } else {
        (1u64 << (1 << num_vars)) - 1
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = 1usize << self.num_vars;
        write!(f, "{}'b{:0width$b}", self.num_vars, self.bits, width = width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections() {
        let a = TruthTable::var(0, 2);
        let b = TruthTable::var(1, 2);
        assert_eq!(a.bits(), 0b1010);
        assert_eq!(b.bits(), 0b1100);
        assert_eq!(a.and(b).bits(), 0b1000);
        assert_eq!(a.and(b).not().bits(), 0b0111);
    }

    #[test]
    fn support_detection() {
        let t = TruthTable::var(0, 3).and(TruthTable::var(2, 3));
        assert_eq!(t.support(), vec![0, 2]);
        let p = t.project(&[0, 2]);
        assert_eq!(p, TruthTable::var(0, 2).and(TruthTable::var(1, 2)));
        assert!(TruthTable::constant(true, 4).support().is_empty());
        let six = TruthTable::var(5, 6);
        assert_eq!(six.support(), vec![5]);
    }

    #[test]
    fn expand_inserts_free_variables() {
        let and = TruthTable::var(0, 2).and(TruthTable::var(1, 2));
        let wide = and.expand(&[3, 7], &[1, 3, 7]);
        assert_eq!(wide, TruthTable::var(1, 3).and(TruthTable::var(2, 3)));
    }
}
