//! BLIF reading and writing for mapped netlists.
//!
//! The writer emits `.gate` lines for library instances and `.names` covers
//! for constants and output aliases. The reader accepts the same subset plus
//! arbitrary single-output `.names` covers of up to six inputs.

use std::fmt::Write as _;

use thiserror::Error;

use crate::genlib::CellLibrary;
use crate::netlist::{Instance, LogicNode, MappedNetlist, OutputBinding};
use crate::truth::{TruthTable, MAX_VARS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlifError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown gate {gate}")]
    UnknownGate { line: usize, gate: String },
    #[error("line {line}: unsupported construct {what}")]
    Unsupported { line: usize, what: String },
}

pub fn write_blif(netlist: &MappedNetlist, lib: &CellLibrary) -> String {
    let mut s = String::new();
    let model = if netlist.model.is_empty() { "top" } else { &netlist.model };
    writeln!(s, ".model {model}").unwrap();
    writeln!(s, ".inputs {}", netlist.inputs.join(" ")).unwrap();
    let names: Vec<&str> = netlist.outputs.iter().map(|o| o.name.as_str()).collect();
    writeln!(s, ".outputs {}", names.join(" ")).unwrap();
    for inst in &netlist.instances {
        write!(s, ".gate {}", inst.gate).unwrap();
        match lib.find(&inst.gate) {
            Some(gi) => {
                let gate = lib.gate(gi);
                for (pin, net) in gate.pins.iter().zip(&inst.inputs) {
                    write!(s, " {}={}", pin.name, net).unwrap();
                }
                writeln!(s, " {}={}", gate.output, inst.output).unwrap();
            }
            None => {
                for (j, net) in inst.inputs.iter().enumerate() {
                    write!(s, " i{j}={net}").unwrap();
                }
                writeln!(s, " O={}", inst.output).unwrap();
            }
        }
    }
    for node in &netlist.logic {
        write_cover(&mut s, &node.inputs, &node.output, node.truth);
    }
    for out in &netlist.outputs {
        if out.net != out.name {
            writeln!(s, ".names {} {}\n1 1", out.net, out.name).unwrap();
        }
    }
    s.push_str(".end\n");
    s
}

fn write_cover(s: &mut String, inputs: &[String], output: &str, truth: TruthTable) {
    let mut header = inputs.to_vec();
    header.push(output.to_string());
    writeln!(s, ".names {}", header.join(" ")).unwrap();
    for m in 0..1usize << inputs.len() {
        if truth.value(m) {
            let row: String = (0..inputs.len()).map(|j| if m >> j & 1 == 1 { '1' } else { '0' }).collect();
            if inputs.is_empty() {
                writeln!(s, "1").unwrap();
            } else {
                writeln!(s, "{row} 1").unwrap();
            }
        }
    }
}

/// Joins continuation lines and strips comments, keeping original line numbers.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let (body, cont) = match line.trim_end().strip_suffix('\\') {
            Some(b) => (b, true),
            None => (line, false),
        };
        let entry = pending.get_or_insert_with(|| (i + 1, String::new()));
        entry.1.push(' ');
        entry.1.push_str(body);
        if !cont {
            let (n, l) = pending.take().unwrap();
            if !l.trim().is_empty() {
                out.push((n, l.trim().to_string()));
            }
        }
    }
    if let Some((n, l)) = pending {
        if !l.trim().is_empty() {
            out.push((n, l.trim().to_string()));
        }
    }
    out
}

pub fn parse_blif(text: &str, lib: &CellLibrary) -> Result<MappedNetlist, BlifError> {
    let lines = logical_lines(text);
    let mut net = MappedNetlist::default();
    let mut i = 0;
    while i < lines.len() {
        let (line_no, line) = &lines[i];
        let line_no = *line_no;
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        i += 1;
        match head {
            ".model" => net.model = words.next().unwrap_or("top").to_string(),
            ".inputs" => net.inputs.extend(words.map(str::to_string)),
            ".outputs" => net
                .outputs
                .extend(words.map(|w| OutputBinding { name: w.to_string(), net: w.to_string() })),
            ".gate" => {
                let gname = words.next().ok_or_else(|| BlifError::Syntax {
                    line: line_no,
                    msg: "missing gate name".into(),
                })?;
                let gi = lib
                    .find(gname)
                    .ok_or_else(|| BlifError::UnknownGate { line: line_no, gate: gname.to_string() })?;
                let gate = lib.gate(gi);
                let mut inputs: Vec<Option<String>> = vec![None; gate.num_inputs()];
                let mut output = None;
                for binding in words {
                    let (pin, wire) = binding.split_once('=').ok_or_else(|| BlifError::Syntax {
                        line: line_no,
                        msg: format!("expected pin=net, found {binding:?}"),
                    })?;
                    if pin == gate.output {
                        output = Some(wire.to_string());
                    } else if let Some(j) = gate.pins.iter().position(|p| p.name == pin) {
                        inputs[j] = Some(wire.to_string());
                    } else {
                        return Err(BlifError::Syntax { line: line_no, msg: format!("gate {gname} has no pin {pin}") });
                    }
                }
                let inputs = inputs
                    .into_iter()
                    .enumerate()
                    .map(|(j, n)| {
                        n.ok_or_else(|| BlifError::Syntax {
                            line: line_no,
                            msg: format!("pin {} of {gname} unbound", gate.pins[j].name),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let output = output
                    .ok_or_else(|| BlifError::Syntax { line: line_no, msg: format!("output of {gname} unbound") })?;
                net.instances.push(Instance { gate: gname.to_string(), inputs, output });
            }
            ".names" => {
                let mut signals: Vec<String> = words.map(str::to_string).collect();
                let output = signals
                    .pop()
                    .ok_or_else(|| BlifError::Syntax { line: line_no, msg: ".names without signals".into() })?;
                if signals.len() > MAX_VARS {
                    return Err(BlifError::Unsupported {
                        line: line_no,
                        what: format!(".names with {} inputs", signals.len()),
                    });
                }
                let mut rows = Vec::new();
                while i < lines.len() && !lines[i].1.starts_with('.') {
                    rows.push(lines[i].clone());
                    i += 1;
                }
                let truth = cover_truth(signals.len(), &rows)?;
                net.logic.push(LogicNode { inputs: signals, output, truth });
            }
            ".end" => break,
            other => {
                return Err(BlifError::Unsupported { line: line_no, what: other.to_string() });
            }
        }
    }
    Ok(net)
}

fn cover_truth(n: usize, rows: &[(usize, String)]) -> Result<TruthTable, BlifError> {
    let mut on = 0u64;
    let mut polarity: Option<bool> = None;
    for (line, row) in rows {
        let parts: Vec<&str> = row.split_whitespace().collect();
        let (pattern, value) = match (n, parts.as_slice()) {
            (0, [v]) => ("", *v),
            (_, [p, v]) => (*p, *v),
            _ => return Err(BlifError::Syntax { line: *line, msg: format!("bad cover row {row:?}") }),
        };
        if pattern.len() != n {
            return Err(BlifError::Syntax { line: *line, msg: format!("cover row {row:?} has wrong width") });
        }
        let bit = match value {
            "1" => true,
            "0" => false,
            _ => return Err(BlifError::Syntax { line: *line, msg: format!("bad output value {value:?}") }),
        };
        if polarity.replace(bit).is_some_and(|p| p != bit) {
            return Err(BlifError::Syntax { line: *line, msg: "mixed on-set and off-set rows".into() });
        }
        let cube = TruthTable::from_fn(n, |m| {
            pattern.chars().enumerate().all(|(j, c)| match c {
                '1' => m >> j & 1 == 1,
                '0' => m >> j & 1 == 0,
                _ => true,
            })
        });
        on |= cube.bits();
    }
    let truth = TruthTable::new(on, n);
    Ok(if polarity == Some(false) { truth.not() } else { truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genlib::mini_library;

    #[test]
    fn round_trip_gate_and_alias() {
        let lib = mini_library();
        let n = MappedNetlist {
            model: "t".into(),
            inputs: vec!["a".into(), "b".into()],
            outputs: vec![OutputBinding { name: "y".into(), net: "n3".into() }],
            instances: vec![Instance { gate: "and2".into(), inputs: vec!["a".into(), "b".into()], output: "n3".into() }],
            logic: vec![LogicNode { inputs: vec![], output: "k".into(), truth: TruthTable::constant(true, 0) }],
            ..Default::default()
        };
        let text = write_blif(&n, &lib);
        assert!(text.contains(".gate and2 a=a b=b O=n3"));
        let back = parse_blif(&text, &lib).unwrap();
        assert_eq!(back.instances, n.instances);
        assert_eq!(back.logic.len(), 2);
        let out = back.simulate_words(&lib, &[0b1010, 0b1100]).unwrap();
        assert_eq!(out[0] & 0xF, 0b1000);
    }

    #[test]
    fn continuation_and_dont_care() {
        let lib = mini_library();
        let text = ".model m\n.inputs a \\\n b\n.outputs y\n.names a b y\n1- 1\n-1 1\n.end\n";
        let n = parse_blif(text, &lib).unwrap();
        assert_eq!(n.inputs, vec!["a", "b"]);
        assert_eq!(n.logic[0].truth.bits(), 0b1110);
    }

    #[test]
    fn unknown_gate() {
        let lib = mini_library();
        let err = parse_blif(".model m\n.gate foo a=x O=y\n", &lib).unwrap_err();
        assert_eq!(err, BlifError::UnknownGate { line: 2, gate: "foo".into() });
    }
}
