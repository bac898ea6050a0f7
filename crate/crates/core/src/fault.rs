//! Redundant-pair construction and fault-detection formulas.
//!
//! Two copies of the circuit read the same input variables. Copy 0 is
//! clean; in copy 1 one wire (an input or a gate output) is inverted, and
//! everything downstream in copy 1 sees the inverted value. The detection
//! signal is the OR over outputs of `faulty_i ^ clean_i`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{or_all, xor_all, Formula, VarId};
use crate::netlist::{CircuitNetlist, GateOp, SecretSpec, Wire};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaultError {
    #[error("malformed fault site `{0}` (expected `input:<id>` or `gate:<id>`)")]
    Malformed(String),
    #[error("fault site `{0}` does not exist in this circuit")]
    UnknownSite(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaultLocation {
    Input(String),
    Gate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum FaultKind {
    #[default]
    BitFlip,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaultSite {
    pub location: FaultLocation,
    pub kind: FaultKind,
}

impl FaultSite {
    pub fn input(id: &str) -> Self {
        FaultSite {
            location: FaultLocation::Input(id.to_string()),
            kind: FaultKind::BitFlip,
        }
    }

    pub fn gate(id: &str) -> Self {
        FaultSite {
            location: FaultLocation::Gate(id.to_string()),
            kind: FaultKind::BitFlip,
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self.location, FaultLocation::Input(_))
    }

    pub fn wire(&self) -> &str {
        match &self.location {
            FaultLocation::Input(w) | FaultLocation::Gate(w) => w,
        }
    }
}

impl fmt::Display for FaultSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            FaultLocation::Input(w) => write!(f, "input:{w}"),
            FaultLocation::Gate(w) => write!(f, "gate:{w}"),
        }
    }
}

impl FromStr for FaultSite {
    type Err = FaultError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("input", w)) if !w.is_empty() => Ok(FaultSite::input(w)),
            Some(("gate", w)) if !w.is_empty() => Ok(FaultSite::gate(w)),
            _ => Err(FaultError::Malformed(s.to_string())),
        }
    }
}

/// Inputs in declaration order, then gates in declaration order.
pub fn enumerate_fault_sites(c: &CircuitNetlist) -> Vec<FaultSite> {
    c.inputs()
        .iter()
        .map(|i| FaultSite::input(i.id.as_str()))
        .chain(c.gates().iter().map(|g| FaultSite::gate(&g.id)))
        .collect()
}

fn site_exists(c: &CircuitNetlist, site: &FaultSite) -> bool {
    match &site.location {
        FaultLocation::Input(w) => c.inputs().iter().any(|i| i.id.as_str() == w),
        FaultLocation::Gate(w) => c.gates().iter().any(|g| &g.id == w),
    }
}

/// Everything the checker needs about one faulted redundant pair.
#[derive(Debug, Clone)]
pub struct DetectionInstance {
    pub site: FaultSite,
    /// `faulty_i ^ clean_i`, one per circuit output.
    pub deltas: Vec<Formula>,
    /// OR of `deltas`.
    pub delta: Formula,
    pub masks: BTreeSet<VarId>,
    pub secrets: Vec<SecretSpec>,
    /// All circuit inputs in declaration order.
    pub inputs: Vec<VarId>,
}

/// Symbolic outputs of one circuit copy.
///
/// Each occurrence of a site in `flips` inverts that wire once, so listing a
/// site twice gives back the clean copy. Wires outside the fan-out of every
/// flip reuse the nodes of `clean` when it is provided.
pub fn symbolic_outputs(
    c: &CircuitNetlist,
    flips: &[FaultSite],
    clean: Option<&HashMap<String, Formula>>,
) -> Result<(Vec<Formula>, HashMap<String, Formula>), FaultError> {
    for site in flips {
        if !site_exists(c, site) {
            return Err(FaultError::UnknownSite(site.to_string()));
        }
    }
    let flip_count = |loc: &FaultLocation| flips.iter().filter(|s| &s.location == loc).count();
    let apply = |f: Formula, n: usize| (0..n).fold(f, |acc, _| acc.negate());

    let mut values: HashMap<String, Formula> = HashMap::new();
    let mut tainted: BTreeSet<&str> = BTreeSet::new();
    for input in c.inputs() {
        let n = flip_count(&FaultLocation::Input(input.id.as_str().to_string()));
        let base = match clean {
            Some(m) => m[input.id.as_str()].clone(),
            None => Formula::var(input.id.clone()),
        };
        if n > 0 {
            tainted.insert(input.id.as_str());
        }
        values.insert(input.id.as_str().to_string(), apply(base, n));
    }
    for gate in c.gates() {
        let n = flip_count(&FaultLocation::Gate(gate.id.clone()));
        let touched = n > 0
            || gate.operands.iter().any(|o| match &o.wire {
                Wire::Named(w) => tainted.contains(w.as_str()),
                Wire::Const(_) => false,
            });
        let value = match clean {
            Some(m) if !touched => m[&gate.id].clone(),
            _ => {
                let args: Vec<Formula> = gate
                    .operands
                    .iter()
                    .map(|o| {
                        let v = match &o.wire {
                            Wire::Const(b) => Formula::constant(*b),
                            Wire::Named(w) => values[w].clone(),
                        };
                        if o.negated {
                            v.negate()
                        } else {
                            v
                        }
                    })
                    .collect();
                let out = match gate.op {
                    GateOp::Not => args[0].negate(),
                    GateOp::And => args[0].and(&args[1]),
                    GateOp::Or => args[0].or(&args[1]),
                    GateOp::Xor => args[0].xor(&args[1]),
                };
                apply(out, n)
            }
        };
        if touched {
            tainted.insert(&gate.id);
        }
        values.insert(gate.id.clone(), value);
    }
    let outputs = c.outputs().iter().map(|o| values[o].clone()).collect();
    Ok((outputs, values))
}

/// Per-output differences and their disjunction for an arbitrary flip list.
pub fn detection_formulas(
    c: &CircuitNetlist,
    flips: &[FaultSite],
) -> Result<(Vec<Formula>, Formula), FaultError> {
    let (clean_out, clean_wires) = symbolic_outputs(c, &[], None)?;
    let (faulty_out, _) = symbolic_outputs(c, flips, Some(&clean_wires))?;
    let deltas: Vec<Formula> = faulty_out
        .iter()
        .zip(&clean_out)
        .map(|(f, g)| f.xor(g))
        .collect();
    let delta = or_all(&deltas);
    Ok((deltas, delta))
}

pub fn build_detection(
    c: &CircuitNetlist,
    site: &FaultSite,
) -> Result<DetectionInstance, FaultError> {
    let (deltas, delta) = detection_formulas(c, std::slice::from_ref(site))?;
    Ok(DetectionInstance {
        site: site.clone(),
        deltas,
        delta,
        masks: c.masks().into_iter().collect(),
        secrets: c.secrets(),
        inputs: c.input_vars(),
    })
}

/// `s_0 ^ ... ^ s_d`.
pub fn unmasked_secret_formula(s: &SecretSpec) -> Formula {
    let shares: Vec<Formula> = s.shares.iter().cloned().map(Formula::var).collect();
    xor_all(&shares)
}
