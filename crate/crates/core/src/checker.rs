//! Per-fault leakage verdicts.
//!
//! For one detection instance the checker tries, in order:
//!
//! 1. incompleteness: no secret has all of its shares in `ess(delta)`;
//! 2. hiding: some eligible random variable factors out of `delta`;
//! 3. a sweep over every XOR-combination of a linear basis of the per-output
//!    differences, where each combination must be incomplete or hidden
//!    according to the cheap set approximations [`xess`] and [`xfact`].
//!
//! Eligible hiding variables are the masks plus the shares of secrets that
//! are incomplete in `delta`. Shares of complete secrets never hide: this
//! also guarantees `x` is not essential in any secret it is meant to hide.
//!
//! Only `Secure` is a proof. `Unknown` means none of the checks applied to
//! the reported combination.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};

use crate::deps::{AnalysisSets, Analyzer};
use crate::fault::DetectionInstance;
use crate::formula::{xor_all, Formula, VarId};
use crate::netlist::SecretSpec;
use crate::sat::{is_contradiction, BudgetExhausted, SolverBudget};

/// Default bound on the number of basis combinations swept (2^20).
pub const DEFAULT_MAX_SUBSETS: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckerConfig {
    pub budget: SolverBudget,
    pub max_subsets: u64,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            budget: SolverBudget::UNLIMITED,
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecureWitness {
    /// Every secret is incomplete in the detection signal.
    NoCompleteSecret,
    /// This random variable factors out of the detection signal.
    HiddenBy(VarId),
    /// Every basis combination was shown incomplete or hidden.
    SubsetSweepPassed,
}

impl fmt::Display for SecureWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SecureWitness::NoCompleteSecret => f.write_str("no_complete_secret"),
            SecureWitness::HiddenBy(x) => write!(f, "hidden_by:{x}"),
            SecureWitness::SubsetSweepPassed => f.write_str("subset_sweep"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Secure(SecureWitness),
    /// First offending combination, as ascending indices into the
    /// instance's `deltas` (every basis member is one of the deltas).
    Unknown {
        subset: Vec<usize>,
    },
    AnalysisIncomplete(String),
}

impl Verdict {
    pub fn is_secure(&self) -> bool {
        matches!(self, Verdict::Secure(_))
    }
}

/// An XOR-combination of basis members and its approximated sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combination {
    pub subset: Vec<usize>,
    pub xess: BTreeSet<VarId>,
    pub xfact: BTreeSet<VarId>,
}

/// Verdict plus the intermediate state, for reporting.
#[derive(Debug, Clone)]
pub struct CheckTrace {
    pub verdict: Verdict,
    pub delta_sets: Option<AnalysisSets>,
    /// Names of the secrets complete in the detection signal.
    pub complete: Vec<String>,
    /// Variables allowed to hide.
    pub hiding: BTreeSet<VarId>,
    /// Basis members as indices into `deltas`.
    pub basis: Vec<usize>,
    /// Analysis of each basis member, aligned with `basis`.
    pub member_sets: Vec<AnalysisSets>,
    pub offending: Option<Combination>,
}

fn symmetric_difference_of_facts(members: &[&AnalysisSets]) -> BTreeSet<VarId> {
    let mut acc = BTreeSet::new();
    for m in members {
        for x in &m.fact {
            if !acc.remove(x) {
                acc.insert(x.clone());
            }
        }
    }
    acc
}

fn union_of_fnl_ess(members: &[&AnalysisSets]) -> BTreeSet<VarId> {
    members
        .iter()
        .flat_map(|m| m.fnl_ess.iter().cloned())
        .collect()
}

/// Under-approximation of the factors of the XOR of `members`.
pub fn xfact(members: &[&AnalysisSets]) -> BTreeSet<VarId> {
    let nonlinear = union_of_fnl_ess(members);
    symmetric_difference_of_facts(members)
        .into_iter()
        .filter(|x| !nonlinear.contains(x))
        .collect()
}

/// Over-approximation of the essential variables of the XOR of `members`.
pub fn xess(members: &[&AnalysisSets]) -> BTreeSet<VarId> {
    let mut out = symmetric_difference_of_facts(members);
    out.extend(union_of_fnl_ess(members));
    out
}

#[derive(Debug)]
enum BasisError {
    Budget(BudgetExhausted),
    TooLarge(usize),
}

const SIGNATURE_WORDS: usize = 4;
const SIGNATURE_SEED: u64 = 0x5eed_5eed;

/// Simulation signatures over a fixed pseudo-random input sample. A nonzero
/// signature is a concrete witness that a formula is not identically 0.
fn signatures(formulas: &[Formula]) -> Vec<[u64; SIGNATURE_WORDS]> {
    let vars: BTreeSet<VarId> = formulas.iter().flat_map(|f| f.free_vars()).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(SIGNATURE_SEED);
    let samples: Vec<HashMap<VarId, u64>> = (0..SIGNATURE_WORDS)
        .map(|_| vars.iter().map(|v| (v.clone(), rng.gen())).collect())
        .collect();
    formulas
        .iter()
        .map(|f| {
            let mut sig = [0u64; SIGNATURE_WORDS];
            for (w, sample) in sig.iter_mut().zip(&samples) {
                *w = f
                    .evaluate_words(sample)
                    .expect("sample covers all variables");
            }
            sig
        })
        .collect()
}

fn basis_capped(
    deltas: &[Formula],
    budget: SolverBudget,
    max_subsets: u64,
) -> Result<Vec<usize>, BasisError> {
    let sigs = signatures(deltas);
    let mut basis: Vec<usize> = Vec::new();
    for (i, delta) in deltas.iter().enumerate() {
        if basis.len() >= 63 || (1u64 << basis.len()) > max_subsets {
            return Err(BasisError::TooLarge(basis.len()));
        }
        let mut dependent = false;
        for mask in 0..1u64 << basis.len() {
            let chosen: Vec<usize> = (0..basis.len())
                .filter(|k| (mask >> k) & 1 == 1)
                .map(|k| basis[k])
                .collect();
            let mut sig = sigs[i];
            for &j in &chosen {
                for (w, s) in sig.iter_mut().zip(&sigs[j]) {
                    *w ^= s;
                }
            }
            if sig.iter().any(|&w| w != 0) {
                continue;
            }
            let combo: Vec<&Formula> = std::iter::once(delta)
                .chain(chosen.iter().map(|&j| &deltas[j]))
                .collect();
            if is_contradiction(&xor_all(combo), budget).map_err(BasisError::Budget)? {
                dependent = true;
                break;
            }
        }
        if !dependent {
            basis.push(i);
        }
    }
    Ok(basis)
}

/// Greedy maximal linearly independent subset of `deltas`, as indices.
///
/// `deltas[i]` joins when no XOR of already chosen members (including the
/// empty one) equals it, so identically-zero formulas never join.
pub fn build_basis(
    deltas: &[Formula],
    budget: SolverBudget,
) -> Result<Vec<usize>, BudgetExhausted> {
    match basis_capped(deltas, budget, u64::MAX) {
        Ok(b) => Ok(b),
        Err(BasisError::Budget(e)) => Err(e),
        Err(BasisError::TooLarge(n)) => panic!("basis of {n} members cannot be enumerated"),
    }
}

/// Lexicographic successor of a k-combination of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn complete_in(secret: &SecretSpec, vars: &BTreeSet<VarId>) -> bool {
    secret.shares.iter().all(|s| vars.contains(s))
}

pub fn check_fault(d: &DetectionInstance, config: &CheckerConfig) -> Verdict {
    check_fault_traced(d, config).verdict
}

pub fn check_fault_traced(d: &DetectionInstance, config: &CheckerConfig) -> CheckTrace {
    let mut trace = CheckTrace {
        verdict: Verdict::AnalysisIncomplete(String::new()),
        delta_sets: None,
        complete: Vec::new(),
        hiding: BTreeSet::new(),
        basis: Vec::new(),
        member_sets: Vec::new(),
        offending: None,
    };
    let mut analyzer = Analyzer::new(config.budget);

    let sets = match analyzer.analyze(&d.delta) {
        Ok(s) => s,
        Err(e) => {
            trace.verdict = Verdict::AnalysisIncomplete(e.to_string());
            return trace;
        }
    };
    let complete: Vec<&SecretSpec> = d
        .secrets
        .iter()
        .filter(|s| complete_in(s, &sets.ess))
        .collect();
    let mut hiding: BTreeSet<VarId> = d.masks.clone();
    for s in d.secrets.iter().filter(|s| !complete_in(s, &sets.ess)) {
        hiding.extend(s.shares.iter().filter(|x| sets.ess.contains(*x)).cloned());
    }
    trace.complete = complete.iter().map(|s| s.name.clone()).collect();
    trace.hiding = hiding.clone();
    let hidden_by = sets.fact.iter().find(|x| hiding.contains(*x)).cloned();
    trace.delta_sets = Some(sets);

    if complete.is_empty() {
        trace.verdict = Verdict::Secure(SecureWitness::NoCompleteSecret);
        return trace;
    }
    if let Some(x) = hidden_by {
        trace.verdict = Verdict::Secure(SecureWitness::HiddenBy(x));
        return trace;
    }

    let basis = match basis_capped(&d.deltas, config.budget, config.max_subsets) {
        Ok(b) => b,
        Err(BasisError::Budget(e)) => {
            trace.verdict = Verdict::AnalysisIncomplete(e.to_string());
            return trace;
        }
        Err(BasisError::TooLarge(n)) => {
            trace.verdict = Verdict::AnalysisIncomplete(format!(
                "basis reached {n} members; sweeping exceeds the cap of {} combinations",
                config.max_subsets
            ));
            return trace;
        }
    };
    trace.basis = basis.clone();
    if (basis.len() as u32) >= 64 || (1u64 << basis.len()) > config.max_subsets {
        trace.verdict = Verdict::AnalysisIncomplete(format!(
            "2^{} basis combinations exceed the cap of {}",
            basis.len(),
            config.max_subsets
        ));
        return trace;
    }
    for &i in &basis {
        match analyzer.analyze(&d.deltas[i]) {
            Ok(s) => trace.member_sets.push(s),
            Err(e) => {
                trace.verdict = Verdict::AnalysisIncomplete(e.to_string());
                return trace;
            }
        }
    }

    let n = basis.len();
    for k in 0..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let members: Vec<&AnalysisSets> =
                combo.iter().map(|&p| &trace.member_sets[p]).collect();
            let approx_ess = xess(&members);
            if complete.iter().any(|s| complete_in(s, &approx_ess)) {
                let approx_fact = xfact(&members);
                if approx_fact.is_disjoint(&hiding) {
                    let subset: Vec<usize> = combo.iter().map(|&p| basis[p]).collect();
                    trace.offending = Some(Combination {
                        subset: subset.clone(),
                        xess: approx_ess,
                        xfact: approx_fact,
                    });
                    trace.verdict = Verdict::Unknown { subset };
                    return trace;
                }
            }
            if k == 0 || !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    trace.verdict = Verdict::Secure(SecureWitness::SubsetSweepPassed);
    trace
}
