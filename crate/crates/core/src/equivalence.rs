//! Simulation-based combinational equivalence checking.
//!
//! Small circuits are compared on every input pattern; larger ones on seeded
//! random patterns, where agreement is reported as inconclusive. An external
//! command can be plugged in for circuits beyond the exhaustive limit.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::Aig;
use crate::genlib::CellLibrary;
use crate::netlist::{MappedNetlist, NetlistError};

const PROJECTIONS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Random,
    External,
}

/// An input assignment (in the AIG's input order) and the first output that differs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub inputs: Vec<bool>,
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceResult {
    pub verdict: Verdict,
    pub method: Method,
    pub vectors_tested: u64,
    pub counterexample: Option<Counterexample>,
    /// Captured output of an external checker.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquivalenceLimits {
    pub exhaustive_limit: usize,
    pub random_vectors: u64,
    pub seed: u64,
}

impl Default for EquivalenceLimits {
    fn default() -> Self {
        EquivalenceLimits { exhaustive_limit: 16, random_vectors: 1 << 16, seed: 0 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("port mismatch: {0}")]
    PortMismatch(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("external checker failed to run: {0}")]
    External(String),
}

/// Position of each AIG port in the netlist's port list: by name when the
/// name sets agree, otherwise by position.
fn align(kind: &str, aig_names: &[String], net_names: &[String]) -> Result<Vec<usize>, EquivalenceError> {
    if aig_names.len() != net_names.len() {
        return Err(EquivalenceError::PortMismatch(format!(
            "{} {kind}s in the AIG, {} in the netlist",
            aig_names.len(),
            net_names.len()
        )));
    }
    let index: HashMap<&str, usize> = net_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    if index.len() == net_names.len() {
        let by_name: Option<Vec<usize>> = aig_names.iter().map(|n| index.get(n.as_str()).copied()).collect();
        if let Some(map) = by_name {
            let mut seen = vec![false; map.len()];
            if map.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                return Ok(map);
            }
        }
    }
    Ok((0..aig_names.len()).collect())
}

pub fn check_equivalence(
    aig: &Aig,
    netlist: &MappedNetlist,
    lib: &CellLibrary,
    limits: &EquivalenceLimits,
) -> Result<EquivalenceResult, EquivalenceError> {
    let n = aig.num_inputs();
    let aig_in: Vec<String> = (0..n).map(|i| aig.input_name(i)).collect();
    let aig_out: Vec<String> = (0..aig.num_outputs()).map(|j| aig.output_name(j)).collect();
    let net_out: Vec<String> = netlist.outputs.iter().map(|o| o.name.clone()).collect();
    let in_map = align("input", &aig_in, &netlist.inputs)?;
    let out_map = align("output", &aig_out, &net_out)?;
    let eval = netlist.evaluator(lib)?;

    let compare = |words: &[u64], mask: u64| -> Result<Option<(usize, u32)>, EquivalenceError> {
        let expected = aig.simulate_words(words).expect("input width checked");
        let mut permuted = vec![0u64; n];
        for (i, &p) in in_map.iter().enumerate() {
            permuted[p] = words[i];
        }
        let got = eval.simulate_words(&permuted)?;
        for (j, &p) in out_map.iter().enumerate() {
            let diff = (expected[j] ^ got[p]) & mask;
            if diff != 0 {
                return Ok(Some((j, diff.trailing_zeros())));
            }
        }
        Ok(None)
    };
    let mismatch = |words: &[u64], output: usize, bit: u32| Counterexample {
        inputs: words.iter().map(|w| w >> bit & 1 == 1).collect(),
        output,
    };

    if n <= limits.exhaustive_limit {
        let total: u64 = 1 << n;
        let num_words = total.div_ceil(64);
        let mask = if n >= 6 { !0 } else { (1u64 << total) - 1 };
        let mut words = vec![0u64; n];
        for w in 0..num_words {
            for (i, word) in words.iter_mut().enumerate() {
                *word = if i < 6 {
                    PROJECTIONS[i]
                } else if w >> (i - 6) & 1 == 1 {
                    !0
                } else {
                    0
                };
            }
            if let Some((output, bit)) = compare(&words, mask)? {
                return Ok(EquivalenceResult {
                    verdict: Verdict::NotEquivalent,
                    method: Method::Exhaustive,
                    vectors_tested: total,
                    counterexample: Some(mismatch(&words, output, bit)),
                    log: None,
                });
            }
        }
        return Ok(EquivalenceResult {
            verdict: Verdict::Equivalent,
            method: Method::Exhaustive,
            vectors_tested: total,
            counterexample: None,
            log: None,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
    let num_words = limits.random_vectors.div_ceil(64).max(1);
    let mut words = vec![0u64; n];
    for _ in 0..num_words {
        for word in words.iter_mut() {
            *word = rng.random();
        }
        if let Some((output, bit)) = compare(&words, !0)? {
            return Ok(EquivalenceResult {
                verdict: Verdict::NotEquivalent,
                method: Method::Random,
                vectors_tested: num_words * 64,
                counterexample: Some(mismatch(&words, output, bit)),
                log: None,
            });
        }
    }
    Ok(EquivalenceResult {
        verdict: Verdict::Inconclusive,
        method: Method::Random,
        vectors_tested: num_words * 64,
        counterexample: None,
        log: None,
    })
}

/// Runs a user-supplied checker. `{aig}` and `{blif}` in the template are
/// replaced by the file paths; the command runs under `sh -c`. Exit status 0
/// means equivalent and 1 not equivalent; anything else is inconclusive.
pub fn check_external(template: &str, aig_path: &Path, blif_path: &Path) -> Result<EquivalenceResult, EquivalenceError> {
    let cmd = template
        .replace("{aig}", &aig_path.display().to_string())
        .replace("{blif}", &blif_path.display().to_string());
    let out = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .output()
        .map_err(|e| EquivalenceError::External(e.to_string()))?;
    let verdict = match out.status.code() {
        Some(0) => Verdict::Equivalent,
        Some(1) => Verdict::NotEquivalent,
        _ => Verdict::Inconclusive,
    };
    Ok(EquivalenceResult {
        verdict,
        method: Method::External,
        vectors_tested: 0,
        counterexample: None,
        log: Some(String::from_utf8_lossy(&out.stdout).into_owned()),
    })
}

/// Fraction of results that are not equivalent; `None` for an empty list.
pub fn failure_rate(results: &[EquivalenceResult]) -> Option<f64> {
    if results.is_empty() {
        return None;
    }
    let failed = results.iter().filter(|r| r.verdict == Verdict::NotEquivalent).count();
    Some(failed as f64 / results.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genlib::mini_library;
    use crate::netlist::{Instance, OutputBinding};

    fn and_aig() -> Aig {
        let mut aig = Aig::new(2);
        let (a, b) = (aig.input_lit(0), aig.input_lit(1));
        let y = aig.add_and(a, b);
        aig.add_output(y);
        aig
    }

    fn netlist(gate: &str) -> MappedNetlist {
        MappedNetlist {
            inputs: vec!["pi0".into(), "pi1".into()],
            outputs: vec![OutputBinding { name: "po0".into(), net: "y".into() }],
            instances: vec![Instance { gate: gate.into(), inputs: vec!["pi0".into(), "pi1".into()], output: "y".into() }],
            ..Default::default()
        }
    }

    #[test]
    fn exhaustive_verdicts() {
        let lib = mini_library();
        let aig = and_aig();
        let ok = check_equivalence(&aig, &netlist("and2"), &lib, &EquivalenceLimits::default()).unwrap();
        assert_eq!(ok.verdict, Verdict::Equivalent);
        assert_eq!(ok.vectors_tested, 4);
        let bad = check_equivalence(&aig, &netlist("or2"), &lib, &EquivalenceLimits::default()).unwrap();
        assert_eq!(bad.verdict, Verdict::NotEquivalent);
        let cex = bad.counterexample.unwrap();
        assert_eq!(cex.inputs.iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn port_mismatch() {
        let lib = mini_library();
        let mut n = netlist("and2");
        n.outputs.push(OutputBinding { name: "z".into(), net: "y".into() });
        assert!(matches!(
            check_equivalence(&and_aig(), &n, &lib, &EquivalenceLimits::default()),
            Err(EquivalenceError::PortMismatch(_))
        ));
    }

    #[test]
    fn rates() {
        let r = |v| EquivalenceResult { verdict: v, method: Method::Exhaustive, vectors_tested: 1, counterexample: None, log: None };
        assert_eq!(failure_rate(&[]), None);
        assert_eq!(failure_rate(&[r(Verdict::Equivalent), r(Verdict::Inconclusive)]), Some(0.0));
        assert_eq!(failure_rate(&[r(Verdict::NotEquivalent)]), Some(1.0));
        let mut eleven = vec![r(Verdict::Equivalent); 10];
        eleven.push(r(Verdict::NotEquivalent));
        assert!((failure_rate(&eleven).unwrap() - 1.0 / 11.0).abs() < 1e-12);
    }
}
