//! Genlib cell libraries.
//!
//! Only combinational `GATE` entries are supported. Pin timing is reduced to
//! a single block delay, `max(rise_block, fall_block)`; load-dependent terms
//! are parsed but not used.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use log::warn;
use serde::Serialize;
use thiserror::Error;

use crate::truth::{TruthTable, MAX_VARS};

#[derive(Debug, Error, PartialEq)]
pub enum GenlibError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("gate {gate}: bad function: {msg}")]
    Expression { gate: String, msg: String },
    #[error("unknown pin {0}")]
    UnknownPin(String),
    #[error("library has no inverter")]
    NoInverter,
    #[error("sequential cell {0} is not supported")]
    Latch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Boolean function of a gate, over named pins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, String> {
        let mut p = ExprParser { chars: text.chars().collect(), pos: 0 };
        let e = p.or_expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(format!("unexpected {:?} at offset {}", p.chars[p.pos], p.pos));
        }
        Ok(e)
    }

    /// Pin names in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone())
                    }
                }
                Expr::Not(a) => walk(a, out),
                Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn evaluate(&self, value_of: &dyn Fn(&str) -> Option<bool>) -> Result<bool, GenlibError> {
        Ok(match self {
            Expr::Const(b) => *b,
            Expr::Var(v) => value_of(v).ok_or_else(|| GenlibError::UnknownPin(v.clone()))?,
            Expr::Not(a) => !a.evaluate(value_of)?,
            Expr::And(a, b) => a.evaluate(value_of)? & b.evaluate(value_of)?,
            Expr::Or(a, b) => a.evaluate(value_of)? | b.evaluate(value_of)?,
            Expr::Xor(a, b) => a.evaluate(value_of)? ^ b.evaluate(value_of)?,
        })
    }

    /// Truth table with `pins[i]` as variable `i`.
    pub fn truth_table(&self, pins: &[String]) -> Result<TruthTable, GenlibError> {
        let mut bits = 0u64;
        for m in 0..1usize << pins.len() {
            let lookup = |name: &str| pins.iter().position(|p| p == name).map(|i| m >> i & 1 == 1);
            if self.evaluate(&lookup)? {
                bits |= 1 << m;
            }
        }
        Ok(TruthTable::new(bits, pins.len()))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(false) => write!(f, "CONST0"),
            Expr::Const(true) => write!(f, "CONST1"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Not(a) => write!(f, "!({a})"),
            Expr::And(a, b) => write!(f, "({a}*{b})"),
            Expr::Or(a, b) => write!(f, "({a}+{b})"),
            Expr::Xor(a, b) => write!(f, "({a}^{b})"),
        }
    }
}

/// Evaluates a genlib expression under named pin values.
pub fn evaluate_function(expr: &str, assignment: &[(&str, bool)]) -> Result<bool, GenlibError> {
    let e = Expr::parse(expr).map_err(|msg| GenlibError::Expression { gate: String::new(), msg })?;
    e.evaluate(&|name| assignment.iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn or_expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.xor_expr()?;
        while matches!(self.peek(), Some('+') | Some('|')) {
            self.pos += 1;
            lhs = Expr::Or(Box::new(lhs), Box::new(self.xor_expr()?));
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some('^') {
            self.pos += 1;
            lhs = Expr::Xor(Box::new(lhs), Box::new(self.and_expr()?));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some('*') | Some('&') => {
                    self.pos += 1;
                }
                // juxtaposition is AND
                Some(c) if c == '(' || c == '!' || is_ident_char(c) => {}
                _ => break,
            }
            lhs = Expr::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        let mut e = if self.peek() == Some('!') {
            self.pos += 1;
            Expr::Not(Box::new(self.unary()?))
        } else {
            self.primary()?
        };
        while self.chars.get(self.pos) == Some(&'\'') {
            self.pos += 1;
            e = Expr::Not(Box::new(e));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.or_expr()?;
                if self.peek() != Some(')') {
                    return Err(format!("expected ')' at offset {}", self.pos));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if is_ident_char(c) => {
                let start = self.pos;
                while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                Ok(match word.as_str() {
                    "CONST0" | "0" => Expr::Const(false),
                    "CONST1" | "1" => Expr::Const(true),
                    _ => Expr::Var(word),
                })
            }
            Some(c) => Err(format!("unexpected {c:?} at offset {}", self.pos)),
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '[' | ']' | '.' | '$')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PinPhase {
    Inv,
    NonInv,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pin {
    pub name: String,
    pub phase: PinPhase,
    pub input_load: f64,
    pub max_load: f64,
    pub rise_block: f64,
    pub rise_fanout: f64,
    pub fall_block: f64,
    pub fall_fanout: f64,
}

impl Pin {
    pub fn delay(&self) -> f64 {
        self.rise_block.max(self.fall_block)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellGate {
    pub name: String,
    pub area: f64,
    pub output: String,
    pub function: Expr,
    pub pins: Vec<Pin>,
    pub truth: TruthTable,
}

impl CellGate {
    pub fn num_inputs(&self) -> usize {
        self.pins.len()
    }

    /// Worst pin-to-output delay.
    pub fn delay(&self) -> f64 {
        self.pins.iter().map(Pin::delay).fold(0.0, f64::max)
    }

    pub fn pin_delay(&self, pin: usize) -> f64 {
        self.pins[pin].delay()
    }
}

#[derive(Clone, Debug)]
pub struct CellLibrary {
    gates: Vec<CellGate>,
    by_name: HashMap<String, usize>,
    inverter: usize,
    buffer: Option<usize>,
    tie_low: Option<usize>,
    tie_high: Option<usize>,
}

impl CellLibrary {
    pub fn from_gates(gates: Vec<CellGate>) -> Result<CellLibrary, GenlibError> {
        let pick = |pred: &dyn Fn(&CellGate) -> bool| {
            gates
                .iter()
                .enumerate()
                .filter(|(_, g)| pred(g))
                .min_by(|(_, a), (_, b)| a.area.total_cmp(&b.area).then_with(|| a.name.cmp(&b.name)))
                .map(|(i, _)| i)
        };
        let inverter = pick(&|g| g.num_inputs() == 1 && g.truth.bits() == 0b01).ok_or(GenlibError::NoInverter)?;
        let buffer = pick(&|g| g.num_inputs() == 1 && g.truth.bits() == 0b10);
        let tie_low = pick(&|g| g.num_inputs() == 0 && g.truth.bits() == 0);
        let tie_high = pick(&|g| g.num_inputs() == 0 && g.truth.bits() == 1);
        let by_name = gates.iter().enumerate().map(|(i, g)| (g.name.clone(), i)).collect();
        Ok(CellLibrary { gates, by_name, inverter, buffer, tie_low, tie_high })
    }

    pub fn gates(&self) -> &[CellGate] {
        &self.gates
    }

    pub fn gate(&self, index: usize) -> &CellGate {
        &self.gates[index]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn inverter_index(&self) -> usize {
        self.inverter
    }

    pub fn inverter(&self) -> &CellGate {
        &self.gates[self.inverter]
    }

    pub fn buffer(&self) -> Option<&CellGate> {
        self.buffer.map(|i| &self.gates[i])
    }

    /// Tie cell producing the given constant, if the library has one.
    pub fn tie_index(&self, value: bool) -> Option<usize> {
        if value {
            self.tie_high
        } else {
            self.tie_low
        }
    }
}

/// A small functionally complete library with uniform pin delays.
pub const MINI_GENLIB: &str = "\
# Default test library. Delays are uniform across pins of a gate.
GATE inv    1.0 O=!a;          PIN * INV    1 999 1.0 0.0 1.0 0.0
GATE nand2  2.0 O=!(a*b);      PIN * INV    1 999 1.0 0.0 1.0 0.0
GATE nor2   2.0 O=!(a+b);      PIN * INV    1 999 1.2 0.0 1.2 0.0
GATE and2   3.0 O=a*b;         PIN * NONINV 1 999 1.6 0.0 1.6 0.0
GATE or2    3.0 O=a+b;         PIN * NONINV 1 999 1.8 0.0 1.8 0.0
GATE aoi21  3.0 O=!(a*b+c);    PIN * INV    1 999 1.4 0.0 1.4 0.0
GATE xor2   5.0 O=a*!b+!a*b;   PIN * UNKNOWN 2 999 2.0 0.0 2.0 0.0
GATE mux2   5.0 O=a*!s+b*s;    PIN * UNKNOWN 1 999 2.0 0.0 2.0 0.0
";

pub fn mini_library() -> CellLibrary {
    parse_genlib(MINI_GENLIB).expect("built-in library parses")
}

pub fn read_genlib_file(path: impl AsRef<Path>) -> Result<CellLibrary, GenlibError> {
    let text = std::fs::read_to_string(path).map_err(|e| GenlibError::Io(e.to_string()))?;
    parse_genlib(&text)
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&self) -> usize {
        1 + self.text[..self.pos].matches('\n').count()
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        if rest.is_empty() {
            return None;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        self.pos += end;
        Some(&rest[..end])
    }

    fn peek_word(&mut self) -> Option<&'a str> {
        let save = self.pos;
        let w = self.word();
        self.pos = save;
        w
    }

    fn until(&mut self, stop: char) -> Option<&'a str> {
        let rest = &self.text[self.pos..];
        let end = rest.find(stop)?;
        self.pos += end + 1;
        Some(&rest[..end])
    }
}

fn strip_comments(text: &str) -> String {
    text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n")
}

pub fn parse_genlib(text: &str) -> Result<CellLibrary, GenlibError> {
    let clean = strip_comments(text);
    let mut cur = Cursor { text: &clean, pos: 0 };
    let mut gates: Vec<CellGate> = Vec::new();
    while let Some(word) = cur.word() {
        match word {
            "GATE" => {
                let line = cur.line();
                if let Some(gate) = parse_gate(&mut cur, line)? {
                    match gates.iter().position(|g| g.name == gate.name) {
                        Some(i) => {
                            warn!("duplicate gate {} in library, keeping the cheaper definition", gate.name);
                            if gate.area < gates[i].area {
                                gates[i] = gate;
                            }
                        }
                        None => gates.push(gate),
                    }
                }
            }
            "LATCH" => return Err(GenlibError::Latch(cur.word().unwrap_or("?").to_string())),
            other => {
                return Err(GenlibError::Syntax { line: cur.line(), msg: format!("expected GATE, found {other:?}") })
            }
        }
    }
    CellLibrary::from_gates(gates)
}

fn parse_gate(cur: &mut Cursor<'_>, line: usize) -> Result<Option<CellGate>, GenlibError> {
    let syntax = |msg: String| GenlibError::Syntax { line, msg };
    let name = cur.word().ok_or_else(|| syntax("missing gate name".into()))?.to_string();
    let area_text = cur.word().ok_or_else(|| syntax(format!("gate {name}: missing area")))?;
    let area: f64 = area_text.parse().map_err(|_| syntax(format!("gate {name}: bad area {area_text:?}")))?;
    if !(area >= 0.0) {
        return Err(syntax(format!("gate {name}: negative area")));
    }
    let func = cur.until(';').ok_or_else(|| syntax(format!("gate {name}: function not terminated by ';'")))?;
    let (output, body) = func.split_once('=').ok_or_else(|| syntax(format!("gate {name}: missing '='")))?;
    let function =
        Expr::parse(body).map_err(|msg| GenlibError::Expression { gate: name.clone(), msg })?;

    let mut pins: Vec<Pin> = Vec::new();
    let mut wildcard: Option<Pin> = None;
    while cur.peek_word() == Some("PIN") {
        cur.word();
        let fields: Vec<&str> = (0..8).filter_map(|_| cur.word()).collect();
        if fields.len() != 8 {
            return Err(syntax(format!("gate {name}: PIN entry needs 8 fields")));
        }
        let phase = match fields[1] {
            "INV" => PinPhase::Inv,
            "NONINV" => PinPhase::NonInv,
            "UNKNOWN" => PinPhase::Unknown,
            p => return Err(syntax(format!("gate {name}: bad pin phase {p:?}"))),
        };
        let mut nums = [0.0f64; 6];
        for (slot, text) in nums.iter_mut().zip(&fields[2..]) {
            *slot = text.parse().map_err(|_| syntax(format!("gate {name}: bad pin number {text:?}")))?;
        }
        let pin = Pin {
            name: fields[0].to_string(),
            phase,
            input_load: nums[0],
            max_load: nums[1],
            rise_block: nums[2],
            rise_fanout: nums[3],
            fall_block: nums[4],
            fall_fanout: nums[5],
        };
        if pin.name == "*" {
            wildcard = Some(pin);
        } else {
            pins.push(pin);
        }
    }

    let vars = function.variables();
    if let Some(w) = wildcard {
        pins = vars.iter().map(|v| Pin { name: v.clone(), ..w.clone() }).collect();
    } else if let Some(missing) = vars.iter().find(|v| !pins.iter().any(|p| &p.name == *v)) {
        return Err(GenlibError::Expression { gate: name, msg: format!("pin {missing} has no PIN entry") });
    }
    if pins.len() > MAX_VARS {
        warn!("gate {name} has {} inputs, more than {MAX_VARS}; skipped", pins.len());
        return Ok(None);
    }
    let names: Vec<String> = pins.iter().map(|p| p.name.clone()).collect();
    let truth = function.truth_table(&names)?;
    Ok(Some(CellGate { name, area, output: output.trim().to_string(), function, pins, truth }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_inverter_library() {
        let lib = parse_genlib("GATE inv 1.0 O=!a; PIN a INV 1 999 1.0 0.0 1.0 0.0").unwrap();
        let inv = lib.inverter();
        assert_eq!(inv.area, 1.0);
        assert_eq!(inv.delay(), 1.0);
        assert_eq!(inv.truth.bits(), 0b01);
    }

    #[test]
    fn nand_truth() {
        let lib = parse_genlib(
            "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\nGATE nand2 2.0 O=!(a*b); PIN * INV 1 999 1 0 1.5 0",
        )
        .unwrap();
        let nand = lib.gate(lib.find("nand2").unwrap());
        assert_eq!(nand.truth.bits(), 0b0111);
        assert_eq!(nand.delay(), 1.5);
    }

    #[test]
    fn evaluate_examples() {
        assert!(!evaluate_function("!a", &[("a", true)]).unwrap());
        assert!(evaluate_function("a*b+!c", &[("a", true), ("b", false), ("c", false)]).unwrap());
        assert!(evaluate_function("a b", &[("a", true), ("b", true)]).unwrap());
        assert!(!evaluate_function("a'", &[("a", true)]).unwrap());
        assert_eq!(evaluate_function("a*z", &[("a", true)]), Err(GenlibError::UnknownPin("z".into())));
    }

    #[test]
    fn missing_inverter() {
        assert_eq!(parse_genlib("GATE nand2 2 O=!(a*b); PIN * INV 1 999 1 0 1 0").unwrap_err(), GenlibError::NoInverter);
    }

    #[test]
    fn bad_expression() {
        let err = parse_genlib("GATE inv 1 O=!(a; PIN * INV 1 999 1 0 1 0").unwrap_err();
        assert!(matches!(err, GenlibError::Expression { .. }));
    }

    #[test]
    fn duplicate_keeps_cheaper() {
        let lib = parse_genlib(
            "GATE inv 2 O=!a; PIN * INV 1 999 1 0 1 0\nGATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0",
        )
        .unwrap();
        assert_eq!(lib.gates().len(), 1);
        assert_eq!(lib.inverter().area, 1.0);
    }

    #[test]
    fn explicit_pin_order_and_constants() {
        let lib = parse_genlib(
            "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\n\
             GATE zero 0.5 O=CONST0;\n\
             GATE andnot 2 O=b*!a;\n PIN a INV 1 999 1 0 1 0\n PIN b NONINV 1 999 2 0 1 0",
        )
        .unwrap();
        let g = lib.gate(lib.find("andnot").unwrap());
        assert_eq!(g.pins[0].name, "a");
        assert_eq!(g.pin_delay(1), 2.0);
        // b & !a with a as variable 0: true only at a=0, b=1 -> minterm 2
        assert_eq!(g.truth.bits(), 0b0100);
        assert_eq!(lib.tie_index(false), lib.find("zero"));
        assert_eq!(lib.tie_index(true), None);
    }

    #[test]
    fn mini_library_contents() {
        let lib = mini_library();
        assert_eq!(lib.gates().len(), 8);
        assert_eq!(lib.inverter().name, "inv");
        let mux = lib.gate(lib.find("mux2").unwrap());
        assert_eq!(mux.num_inputs(), 3);
        for g in lib.gates() {
            let d = g.delay();
            assert!(g.pins.iter().all(|p| p.delay() == d));
        }
    }
}
