//! Verification of fault-detection leakage in masked circuits with
//! redundancy-based countermeasures.
//!
//! A circuit netlist is parsed into a symbolic model, every single-bit fault
//! site yields a detection signal, and [`checker::check_fault`] decides
//! whether that signal can be statistically dependent on any unmasked secret.
//! The [`oracle`] module gives exact ground truth for small circuits.

pub mod builtin;
pub mod checker;
pub mod deps;
pub mod fault;
pub mod formula;
pub mod netlist;
pub mod oracle;
pub mod sat;

pub use checker::{
    check_fault, check_fault_traced, CheckTrace, CheckerConfig, SecureWitness, Verdict,
};
pub use fault::{build_detection, enumerate_fault_sites, DetectionInstance, FaultSite};
pub use formula::{Assignment, Formula, VarId};
pub use netlist::{CircuitNetlist, NetlistError};
pub use sat::{BudgetExhausted, SolverBudget};
