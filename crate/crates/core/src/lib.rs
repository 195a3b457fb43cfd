//! Standard-cell technology mapping for and-inverter graphs.
//!
//! The mapper runs delay, area-flow and exact-area rounds over priority cuts,
//! choosing per node and phase among library gates matched by truth table.
//! Its heuristic thresholds are collected in a [`HeuristicGenome`] so that an
//! outer search can tune them.

pub mod aig;
pub mod aiger;
pub mod blif;
pub mod cuts;
pub mod equivalence;
pub mod genlib;
pub mod genome;
pub mod mapper;
pub mod matching;
pub mod netlist;
pub mod truth;

pub use aig::{Aig, AigError, AndNode, Lit, NodeId};
pub use aiger::{parse_aiger, read_aiger_file, write_aag, write_aig, AigerError};
pub use blif::{parse_blif, write_blif, BlifError};
pub use cuts::{cut_truth, enumerate_cuts, Cut, CutError, CutSets};
pub use equivalence::{check_equivalence, failure_rate, EquivalenceLimits, EquivalenceResult, Method, Verdict};
pub use genlib::{evaluate_function, mini_library, parse_genlib, read_genlib_file, CellGate, CellLibrary, GenlibError};
pub use genome::{GenomeError, HeuristicGenome, Knob, KnobKind, KnobValue, Operator, TieBreak};
pub use mapper::{run_mapping, run_mapping_with_index, MapError, Mapper, MappingParams, MappingResult, RoundKind, RoundStats};
pub use matching::{build_match_index, GateMatch, MatchIndex};
pub use netlist::{measure, Instance, LogicNode, MappedNetlist, NetlistError, OutputBinding};
pub use truth::TruthTable;
