//! Exhaustive truth-table ground truth.
//!
//! Weights are counted by evaluating formulas 64 assignments at a time.
//! Nothing here touches the solver or the dependency analysis, so agreement
//! between the two paths is evidence rather than tautology.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::fault::{unmasked_secret_formula, DetectionInstance};
use crate::formula::{Formula, Kind, VarId};

/// Largest universe enumerated (2^24 assignments).
pub const MAX_UNIVERSE: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("universe of {size} variables exceeds the enumeration bound of {max}")]
    UniverseTooLarge { size: usize, max: usize },
    #[error("variable `{0}` is outside the universe")]
    OutsideUniverse(VarId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightReport {
    pub universe: Vec<VarId>,
    pub weight: u64,
}

#[derive(Clone, Copy)]
enum Op {
    Const(u64),
    Input(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Xor(usize, usize),
}

/// Several formulas flattened into one straight-line bit-parallel program.
struct Program {
    ops: Vec<Op>,
    roots: Vec<usize>,
    width: usize,
}

const LOW_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl Program {
    fn compile(formulas: &[&Formula], universe: &BTreeSet<VarId>) -> Result<Self, OracleError> {
        if universe.len() > MAX_UNIVERSE {
            return Err(OracleError::UniverseTooLarge {
                size: universe.len(),
                max: MAX_UNIVERSE,
            });
        }
        let position: HashMap<&VarId, usize> =
            universe.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut ops = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut roots = Vec::new();
        for f in formulas {
            for node in f.postorder() {
                if slot.contains_key(&node.node_id()) {
                    continue;
                }
                let s = |g: &Formula| slot[&g.node_id()];
                let op = match node.kind() {
                    Kind::Const(b) => Op::Const(if *b { u64::MAX } else { 0 }),
                    Kind::Var(v) => Op::Input(
                        *position
                            .get(v)
                            .ok_or_else(|| OracleError::OutsideUniverse(v.clone()))?,
                    ),
                    Kind::Not(a) => Op::Not(s(a)),
                    Kind::And(a, b) => Op::And(s(a), s(b)),
                    Kind::Or(a, b) => Op::Or(s(a), s(b)),
                    Kind::Xor(a, b) => Op::Xor(s(a), s(b)),
                };
                slot.insert(node.node_id(), ops.len());
                ops.push(op);
            }
            roots.push(slot[&f.node_id()]);
        }
        Ok(Program {
            ops,
            roots,
            width: universe.len(),
        })
    }

    /// Calls `visit(root_words, valid_mask)` once per block of 64 assignments.
    fn run(&self, mut visit: impl FnMut(&[u64], u64)) {
        let blocks = 1u64 << self.width.saturating_sub(6);
        let valid = if self.width >= 6 {
            u64::MAX
        } else {
            (1u64 << (1u32 << self.width)) - 1
        };
        let mut words = vec![0u64; self.ops.len()];
        let mut out = vec![0u64; self.roots.len()];
        for block in 0..blocks {
            for k in 0..self.ops.len() {
                words[k] = match self.ops[k] {
                    Op::Const(w) => w,
                    Op::Input(i) if i < 6 => LOW_PATTERNS[i],
                    Op::Input(i) => {
                        if (block >> (i - 6)) & 1 == 1 {
                            u64::MAX
                        } else {
                            0
                        }
                    }
                    Op::Not(a) => !words[a],
                    Op::And(a, b) => words[a] & words[b],
                    Op::Or(a, b) => words[a] | words[b],
                    Op::Xor(a, b) => words[a] ^ words[b],
                };
            }
            for (o, &r) in out.iter_mut().zip(&self.roots) {
                *o = words[r];
            }
            visit(&out, valid);
        }
    }
}

/// Number of assignments over `universe` satisfying `f`.
pub fn weight(f: &Formula, universe: &BTreeSet<VarId>) -> Result<u64, OracleError> {
    let program = Program::compile(&[f], universe)?;
    let mut total = 0u64;
    program.run(|w, valid| total += u64::from((w[0] & valid).count_ones()));
    Ok(total)
}

pub fn weight_report(f: &Formula, universe: &BTreeSet<VarId>) -> Result<WeightReport, OracleError> {
    Ok(WeightReport {
        universe: universe.iter().cloned().collect(),
        weight: weight(f, universe)?,
    })
}

pub fn is_balanced(f: &Formula, universe: &BTreeSet<VarId>) -> Result<bool, OracleError> {
    Ok(weight(f, universe)? == 1u64 << universe.len() >> 1 && !universe.is_empty())
}

/// The two sides `N(f & g) * N(!f)` and `N(!f & g) * N(f)` of the independence test.
pub fn dependence_products(
    f: &Formula,
    g: &Formula,
    universe: &BTreeSet<VarId>,
) -> Result<(u128, u128), OracleError> {
    let program = Program::compile(&[f, g], universe)?;
    let (mut fg, mut nfg, mut nf, mut pf) = (0u64, 0u64, 0u64, 0u64);
    program.run(|w, valid| {
        let (fw, gw) = (w[0] & valid, w[1] & valid);
        let nfw = !w[0] & valid;
        fg += u64::from((fw & gw).count_ones());
        nfg += u64::from((nfw & gw).count_ones());
        pf += u64::from(fw.count_ones());
        nf += u64::from(nfw.count_ones());
    });
    Ok((
        u128::from(fg) * u128::from(nf),
        u128::from(nfg) * u128::from(pf),
    ))
}

pub fn statistically_dependent(
    f: &Formula,
    g: &Formula,
    universe: &BTreeSet<VarId>,
) -> Result<bool, OracleError> {
    let (lhs, rhs) = dependence_products(f, g, universe)?;
    Ok(lhs != rhs)
}

/// Exact dependence of the detection signal on every unmasked secret, over
/// all circuit inputs.
pub fn confirm_leak(d: &DetectionInstance) -> Result<Vec<(String, bool)>, OracleError> {
    let universe: BTreeSet<VarId> = d.inputs.iter().cloned().collect();
    if universe.len() > MAX_UNIVERSE {
        return Err(OracleError::UniverseTooLarge {
            size: universe.len(),
            max: MAX_UNIVERSE,
        });
    }
    d.secrets
        .iter()
        .map(|s| {
            let g = unmasked_secret_formula(s);
            Ok((
                s.name.clone(),
                statistically_dependent(&d.delta, &g, &universe)?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{var, Assignment};

    fn universe(names: &[&str]) -> BTreeSet<VarId> {
        names.iter().map(|n| VarId::new(n).unwrap()).collect()
    }

    // Scalar reference count, one assignment at a time.
    fn slow_weight(f: &Formula, v: &BTreeSet<VarId>) -> u64 {
        (0..1u64 << v.len())
            .filter(|&bits| f.evaluate(&Assignment::from_bits(v, bits)).unwrap())
            .count() as u64
    }

    #[test]
    fn weight_examples() {
        let v = universe(&["a", "b", "c"]);
        assert_eq!(weight(&(var("a") & var("b")), &v).unwrap(), 2);
        assert_eq!(weight(&Formula::one(), &v).unwrap(), 8);
        assert_eq!(weight(&(var("b") ^ var("c")), &v).unwrap(), 4);
        let r = weight_report(&var("a"), &v).unwrap();
        assert_eq!(r.universe.len(), 3);
        assert_eq!(r.weight, 4);
    }

    #[test]
    fn balanced_examples() {
        let f = var("x") ^ (var("a") & var("b"));
        assert!(is_balanced(&f, &universe(&["x", "a", "b"])).unwrap());
        assert!(!is_balanced(&(var("a") & var("b")), &universe(&["a", "b"])).unwrap());
        assert!(!is_balanced(&Formula::zero(), &universe(&["a"])).unwrap());
    }

    #[test]
    fn dependence_examples() {
        let v = universe(&["a", "b", "c"]);
        let f = var("a") & var("b");
        let g = !var("a") | var("c");
        let h = var("b") ^ var("c");
        assert_eq!(dependence_products(&f, &g, &v).unwrap(), (6, 10));
        assert!(statistically_dependent(&f, &g, &v).unwrap());
        assert_eq!(dependence_products(&f, &h, &v).unwrap(), (6, 6));
        assert!(!statistically_dependent(&f, &h, &v).unwrap());

        let delta = (var("x") ^ var("s0")) | (var("y") ^ var("s1"));
        let s = var("s0") ^ var("s1");
        let v4 = universe(&["x", "y", "s0", "s1"]);
        assert_eq!(dependence_products(&delta, &s, &v4).unwrap(), (24, 24));
    }

    #[test]
    fn errors() {
        let big: BTreeSet<VarId> = (0..25)
            .map(|i| VarId::new(&format!("v{i}")).unwrap())
            .collect();
        assert_eq!(
            weight(&var("v0"), &big).unwrap_err(),
            OracleError::UniverseTooLarge { size: 25, max: 24 }
        );
        assert_eq!(
            weight(&var("z"), &universe(&["a"])).unwrap_err(),
            OracleError::OutsideUniverse(VarId::new("z").unwrap())
        );
    }

    #[test]
    fn block_evaluation_matches_scalar_evaluation() {
        let names: Vec<String> = (0..9).map(|i| format!("v{i}")).collect();
        let v: BTreeSet<VarId> = names.iter().map(|n| VarId::new(n).unwrap()).collect();
        let x = |i: usize| var(&names[i]);
        let f = (x(0) & x(7)) ^ (x(8) | !x(3)) ^ (x(5) & x(6) & x(1));
        assert_eq!(weight(&f, &v).unwrap(), slow_weight(&f, &v));
        let small = universe(&["v0", "v1"]);
        let g = x(0) | x(1);
        assert_eq!(weight(&g, &small).unwrap(), 3);
        assert_eq!(weight(&Formula::one(), &BTreeSet::new()).unwrap(), 1);
    }
}
