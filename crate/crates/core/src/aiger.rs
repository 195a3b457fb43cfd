//! AIGER reader and writer for the combinational subset.
//!
//! Both the ASCII (`aag`) and binary (`aig`) encodings are accepted. ASCII
//! files may use arbitrary variable numbering; nodes are renumbered so that
//! fanins always precede the node that uses them.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::aig::{Aig, Lit};

#[derive(Debug, Error)]
pub enum AigerError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("sequential AIGER is not supported ({0} latches)")]
    Latches(usize),
    #[error("unsupported AIGER section: {0}")]
    Unsupported(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("literal {0} is used but never defined")]
    Dangling(u32),
    #[error("combinational cycle through variable {0}")]
    Cycle(u32),
    #[error("binary AND section is truncated")]
    Truncated,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
struct Header {
    binary: bool,
    max_var: usize,
    inputs: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str) -> Result<Header, AigerError> {
    let mut parts = line.split_whitespace();
    let binary = match parts.next() {
        Some("aag") => false,
        Some("aig") => true,
        other => return Err(AigerError::Header(format!("unknown format tag {other:?}"))),
    };
    let nums = parts
        .map(|p| p.parse::<usize>().map_err(|_| AigerError::Header(format!("bad number {p:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if nums.len() < 5 || nums.len() > 9 {
        return Err(AigerError::Header(format!("expected 5 to 9 fields, found {}", nums.len())));
    }
    if nums[2] > 0 {
        return Err(AigerError::Latches(nums[2]));
    }
    for (value, name) in nums[5..].iter().zip(["bad-state", "invariant", "justice", "fairness"]) {
        if *value > 0 {
            return Err(AigerError::Unsupported(format!("{value} {name} properties")));
        }
    }
    let header = Header { binary, max_var: nums[0], inputs: nums[1], outputs: nums[3], ands: nums[4] };
    if header.binary && header.max_var != header.inputs + header.ands {
        return Err(AigerError::Header(format!(
            "binary header requires M = I + A, got M={} I={} A={}",
            header.max_var, header.inputs, header.ands
        )));
    }
    Ok(header)
}

/// Line cursor over raw bytes, used for the text sections of both encodings.
struct Lines<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<String> {
        if self.pos >= self.data.len() {
            return None;
        }
        let rest = &self.data[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        let text = String::from_utf8_lossy(&rest[..end]).trim_end_matches('\r').to_string();
        self.pos += end + 1;
        self.line += 1;
        Some(text)
    }

    fn expect_line(&mut self, what: &str) -> Result<String, AigerError> {
        let line = self.line + 1;
        self.next_line()
            .ok_or_else(|| AigerError::Syntax { line, msg: format!("unexpected end of file, expected {what}") })
    }

    fn numbers(&mut self, what: &str, count: usize) -> Result<Vec<u32>, AigerError> {
        let text = self.expect_line(what)?;
        let line = self.line;
        let nums = text
            .split_whitespace()
            .map(|p| p.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| AigerError::Syntax { line, msg: format!("bad {what} line {text:?}") })?;
        if nums.len() != count {
            return Err(AigerError::Syntax { line, msg: format!("expected {count} numbers in {what} line") });
        }
        Ok(nums)
    }
}

/// Parses ASCII or binary combinational AIGER content.
pub fn parse_aiger(bytes: &[u8]) -> Result<Aig, AigerError> {
    let mut lines = Lines { data: bytes, pos: 0, line: 0 };
    let header = parse_header(&lines.expect_line("header")?)?;
    let mut aig = if header.binary { parse_binary_body(&mut lines, header)? } else { parse_ascii_body(&mut lines, header)? };
    parse_symbols(&mut lines, &mut aig)?;
    Ok(aig)
}

pub fn read_aiger_file(path: impl AsRef<Path>) -> Result<Aig, AigerError> {
    parse_aiger(&std::fs::read(path)?)
}

fn parse_ascii_body(lines: &mut Lines<'_>, h: Header) -> Result<Aig, AigerError> {
    let mut input_vars = Vec::with_capacity(h.inputs);
    for _ in 0..h.inputs {
        let lit = lines.numbers("input", 1)?[0];
        if lit & 1 == 1 || lit < 2 || (lit >> 1) as usize > h.max_var {
            return Err(AigerError::Syntax { line: lines.line, msg: format!("invalid input literal {lit}") });
        }
        input_vars.push(lit >> 1);
    }
    let mut output_lits = Vec::with_capacity(h.outputs);
    for _ in 0..h.outputs {
        output_lits.push(lines.numbers("output", 1)?[0]);
    }
    let mut and_defs: HashMap<u32, (u32, u32)> = HashMap::with_capacity(h.ands);
    let mut and_order = Vec::with_capacity(h.ands);
    for _ in 0..h.ands {
        let n = lines.numbers("and", 3)?;
        if n[0] & 1 == 1 || n[0] < 2 || (n[0] >> 1) as usize > h.max_var {
            return Err(AigerError::Syntax { line: lines.line, msg: format!("invalid AND literal {}", n[0]) });
        }
        let var = n[0] >> 1;
        if and_defs.insert(var, (n[1], n[2])).is_some() || input_vars.contains(&var) {
            return Err(AigerError::Syntax { line: lines.line, msg: format!("variable {var} defined twice") });
        }
        and_order.push(var);
    }

    let mut aig = Aig::new(h.inputs);
    let mut map: HashMap<u32, Lit> = HashMap::with_capacity(h.inputs + h.ands + 1);
    map.insert(0, Lit::FALSE);
    for (i, &var) in input_vars.iter().enumerate() {
        if map.insert(var, aig.input_lit(i)).is_some() {
            return Err(AigerError::Syntax { line: 0, msg: format!("input variable {var} repeated") });
        }
    }

    // Iterative DFS so deep chains do not overflow the stack.
    let mut on_stack: HashMap<u32, bool> = HashMap::new();
    for &root in &and_order {
        if map.contains_key(&root) {
            continue;
        }
        let mut stack = vec![root];
        while let Some(&var) = stack.last() {
            if map.contains_key(&var) {
                stack.pop();
                continue;
            }
            let (r0, r1) = *and_defs.get(&var).ok_or(AigerError::Dangling(var << 1))?;
            let pending: Vec<u32> = [r0 >> 1, r1 >> 1].into_iter().filter(|v| !map.contains_key(v)).collect();
            if pending.is_empty() {
                let a = map[&(r0 >> 1)].xor_phase(r0 & 1 == 1);
                let b = map[&(r1 >> 1)].xor_phase(r1 & 1 == 1);
                map.insert(var, aig.add_and(a, b));
                on_stack.remove(&var);
                stack.pop();
            } else {
                if on_stack.insert(var, true).is_some() {
                    return Err(AigerError::Cycle(var));
                }
                for v in pending {
                    if !and_defs.contains_key(&v) {
                        return Err(AigerError::Dangling(v << 1));
                    }
                    if on_stack.contains_key(&v) {
                        return Err(AigerError::Cycle(v));
                    }
                    stack.push(v);
                }
            }
        }
    }
    for lit in output_lits {
        let mapped = map.get(&(lit >> 1)).ok_or(AigerError::Dangling(lit))?;
        aig.add_output(mapped.xor_phase(lit & 1 == 1));
    }
    Ok(aig)
}

fn read_varint(lines: &mut Lines<'_>) -> Result<u32, AigerError> {
    let mut value: u64 = 0;
    let mut shift = 0;
    loop {
        let byte = *lines.data.get(lines.pos).ok_or(AigerError::Truncated)?;
        lines.pos += 1;
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            break;
        }
        shift += 7;
        if shift > 35 {
            return Err(AigerError::Header("varint overflow in AND section".into()));
        }
    }
    u32::try_from(value).map_err(|_| AigerError::Header("varint overflow in AND section".into()))
}

fn parse_binary_body(lines: &mut Lines<'_>, h: Header) -> Result<Aig, AigerError> {
    let mut output_lits = Vec::with_capacity(h.outputs);
    for _ in 0..h.outputs {
        output_lits.push(lines.numbers("output", 1)?[0]);
    }
    let mut aig = Aig::new(h.inputs);
    for i in 0..h.ands {
        let lhs = 2 * (h.inputs + 1 + i) as u32;
        let d0 = read_varint(lines)?;
        let d1 = read_varint(lines)?;
        let r0 = lhs.checked_sub(d0).filter(|&r| r < lhs).ok_or(AigerError::Dangling(lhs))?;
        let r1 = r0.checked_sub(d1).ok_or(AigerError::Dangling(lhs))?;
        aig.add_and(Lit::from_code(r0), Lit::from_code(r1));
    }
    for lit in output_lits {
        if (lit >> 1) as usize > h.max_var {
            return Err(AigerError::Dangling(lit));
        }
        aig.add_output(Lit::from_code(lit));
    }
    Ok(aig)
}

fn parse_symbols(lines: &mut Lines<'_>, aig: &mut Aig) -> Result<(), AigerError> {
    while let Some(text) = lines.next_line() {
        if text == "c" {
            while let Some(comment) = lines.next_line() {
                aig.comments.push(comment);
            }
            break;
        }
        if text.is_empty() {
            continue;
        }
        let (tag, rest) = text.split_at(1);
        let (pos, name) = rest.split_once(' ').unwrap_or((rest, ""));
        let pos: usize = pos
            .parse()
            .map_err(|_| AigerError::Syntax { line: lines.line, msg: format!("bad symbol line {text:?}") })?;
        match tag {
            "i" if pos < aig.num_inputs() => aig.set_input_name(pos, name),
            "o" if pos < aig.num_outputs() => aig.set_output_name(pos, name),
            "i" | "o" => {
                return Err(AigerError::Syntax { line: lines.line, msg: format!("symbol position {pos} out of range") })
            }
            _ => return Err(AigerError::Syntax { line: lines.line, msg: format!("unsupported symbol {text:?}") }),
        }
    }
    Ok(())
}

fn write_symbols(aig: &Aig, out: &mut Vec<u8>) {
    for i in 0..aig.num_inputs() {
        if let Some(name) = aig.raw_input_name(i) {
            out.extend_from_slice(format!("i{i} {name}\n").as_bytes());
        }
    }
    for j in 0..aig.num_outputs() {
        if let Some(name) = aig.raw_output_name(j) {
            out.extend_from_slice(format!("o{j} {name}\n").as_bytes());
        }
    }
    if !aig.comments.is_empty() {
        out.extend_from_slice(b"c\n");
        for c in &aig.comments {
            out.extend_from_slice(c.as_bytes());
            out.push(b'\n');
        }
    }
}

/// ASCII encoding with the canonical numbering of the in-memory network.
pub fn write_aag(aig: &Aig) -> Vec<u8> {
    let mut out = Vec::new();
    let max_var = aig.num_nodes() - 1;
    out.extend_from_slice(
        format!("aag {} {} 0 {} {}\n", max_var, aig.num_inputs(), aig.num_outputs(), aig.num_ands()).as_bytes(),
    );
    for i in 0..aig.num_inputs() {
        out.extend_from_slice(format!("{}\n", aig.input_lit(i).code()).as_bytes());
    }
    for lit in aig.outputs() {
        out.extend_from_slice(format!("{}\n", lit.code()).as_bytes());
    }
    for (i, and) in aig.ands().iter().enumerate() {
        let lhs = 2 * (aig.first_and() + i);
        out.extend_from_slice(format!("{} {} {}\n", lhs, and.fanin0.code(), and.fanin1.code()).as_bytes());
    }
    write_symbols(aig, &mut out);
    out
}

/// Binary encoding. Fanins of each AND are written larger-first as the format requires.
pub fn write_aig(aig: &Aig) -> Vec<u8> {
    let mut out = Vec::new();
    let max_var = aig.num_nodes() - 1;
    out.extend_from_slice(
        format!("aig {} {} 0 {} {}\n", max_var, aig.num_inputs(), aig.num_outputs(), aig.num_ands()).as_bytes(),
    );
    for lit in aig.outputs() {
        out.extend_from_slice(format!("{}\n", lit.code()).as_bytes());
    }
    for (i, and) in aig.ands().iter().enumerate() {
        let lhs = 2 * (aig.first_and() + i) as u32;
        let (r0, r1) = {
            let (a, b) = (and.fanin0.code(), and.fanin1.code());
            if a >= b {
                (a, b)
            } else {
                (b, a)
            }
        };
        for mut delta in [lhs - r0, r0 - r1] {
            while delta >= 0x80 {
                out.push((delta as u8 & 0x7f) | 0x80);
                delta >>= 7;
            }
            out.push(delta as u8);
        }
    }
    write_symbols(aig, &mut out);
    out
}
