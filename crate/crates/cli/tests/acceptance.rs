//! Acceptance gate: one PASS/FAIL line per criterion, all must pass.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sifa_cli::VerdictReport;
use sifa_core::builtin::{builtin_circuit, builtin_names};
use sifa_core::checker::{
    check_fault, check_fault_traced, xess, xfact, CheckerConfig, SecureWitness, Verdict,
};
use sifa_core::deps::{analyze, essential_vars, factor_vars};
use sifa_core::fault::{build_detection, enumerate_fault_sites, DetectionInstance, FaultSite};
use sifa_core::formula::{or_all, var, xor_all, Assignment, Formula, VarId};
use sifa_core::netlist::SecretSpec;
use sifa_core::oracle::{confirm_leak, dependence_products, is_balanced, statistically_dependent};
use sifa_core::sat::{is_tautology, SolverBudget};

type Check = fn() -> Result<String, String>;

const U: SolverBudget = SolverBudget::UNLIMITED;
const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn sifa(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sifa"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn read_report(path: &std::path::Path) -> VerdictReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn id(n: &str) -> VarId {
    VarId::new(n).unwrap()
}

fn criterion_1() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("chi3.json");
    let start = Instant::now();
    let (code, _) = sifa(&[
        "verify",
        "--builtin",
        "chi3",
        "--jobs",
        "1",
        "--json",
        json.to_str().unwrap(),
    ]);
    let secs = start.elapsed().as_secs_f64();
    let r = read_report(&json);
    let secure = r.sites.iter().filter(|s| s.verdict == "secure").count();
    let detail = format!(
        "{secure}/{} secure, exit {code}, {secs:.2} s",
        r.sites.len()
    );
    if r.sites.len() == 39 && secure == 39 && code == 0 && secs < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, leaked) in [
        ("chi3_reuse_b0", "c"),
        ("chi3_reuse_c0", "a"),
        ("chi3_reuse_a0", "b"),
    ] {
        let json = dir.path().join(format!("{name}.json"));
        let (code, _) = sifa(&[
            "verify",
            "--builtin",
            name,
            "--oracle",
            "--json",
            json.to_str().unwrap(),
        ]);
        let r = read_report(&json);
        let flagged: Vec<&str> = r
            .sites
            .iter()
            .filter(|s| s.verdict != "secure")
            .map(|s| s.site.as_str())
            .collect();
        let v0 = r.sites.iter().find(|s| s.site == "gate:v0").unwrap();
        let expected_witness = format!("dependent:{leaked}");
        ok &= flagged == ["gate:v0"]
            && v0.verdict == "confirmed_leak"
            && v0.witness == expected_witness
            && code == 1;
        details.push(format!(
            "{name}: flagged {flagged:?} {} exit {code}",
            v0.witness
        ));
    }
    let detail = details.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3() -> Result<String, String> {
    let c = builtin_circuit("fig2_toy").unwrap();
    let d = build_detection(&c, &FaultSite::input("a0")).unwrap();
    let target = var("b0") | var("b1") | var("c1");
    let biconditional = !(d.delta.clone() ^ target);
    let equivalent = is_tautology(&biconditional, U).unwrap();
    let deps = confirm_leak(&d).unwrap();
    let leaks_b = deps.contains(&("b".to_string(), true));
    let detail = format!("delta == b0|b1|c1: {equivalent}, oracle {deps:?}");
    if equivalent && leaks_b {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Result<String, String> {
    let v: BTreeSet<VarId> = ["a", "b", "c"].iter().map(|n| id(n)).collect();
    let f = var("a") & var("b");
    let p1 = dependence_products(&f, &(!var("a") | var("c")), &v).unwrap();
    let d1 = statistically_dependent(&f, &(!var("a") | var("c")), &v).unwrap();
    let p2 = dependence_products(&f, &(var("b") ^ var("c")), &v).unwrap();
    let d2 = statistically_dependent(&f, &(var("b") ^ var("c")), &v).unwrap();
    let detail = format!(
        "{} vs {} dependent={d1}; {} vs {} dependent={d2}",
        p1.0, p1.1, p2.0, p2.1
    );
    if p1 == (6, 10) && d1 && p2 == (6, 6) && !d2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Result<String, String> {
    let deltas = vec![var("x") ^ var("s0"), var("y") ^ var("s1")];
    let delta = or_all(&deltas);
    let d = DetectionInstance {
        site: FaultSite::input("x"),
        deltas,
        delta: delta.clone(),
        masks: [id("x"), id("y")].into_iter().collect(),
        secrets: vec![SecretSpec {
            name: "s".into(),
            shares: vec![id("s0"), id("s1")],
        }],
        inputs: vec![id("x"), id("y"), id("s0"), id("s1")],
    };
    let trace = check_fault_traced(&d, &CheckerConfig::default());
    let sets = trace.delta_sets.clone().unwrap();
    let both_essential = sets.ess.contains(&id("s0")) && sets.ess.contains(&id("s1"));
    let universe: BTreeSet<VarId> = d.inputs.iter().cloned().collect();
    let products = dependence_products(&delta, &(var("s0") ^ var("s1")), &universe).unwrap();
    let detail = format!(
        "incomplete={}, fact(delta)={:?}, verdict {:?}, products {} = {}",
        !both_essential, sets.fact, trace.verdict, products.0, products.1
    );
    if both_essential
        && sets.fact.is_empty()
        && trace.verdict == Verdict::Secure(SecureWitness::SubsetSweepPassed)
        && products == (24, 24)
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_formula(rng: &mut StdRng, vars: usize, depth: u32) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return if rng.gen_ratio(1, 12) {
            Formula::constant(rng.gen())
        } else {
            var(NAMES[rng.gen_range(0..vars)])
        };
    }
    match rng.gen_range(0..4) {
        0 => !random_formula(rng, vars, depth - 1),
        1 => random_formula(rng, vars, depth - 1) & random_formula(rng, vars, depth - 1),
        2 => random_formula(rng, vars, depth - 1) | random_formula(rng, vars, depth - 1),
        _ => random_formula(rng, vars, depth - 1) ^ random_formula(rng, vars, depth - 1),
    }
}

fn table(f: &Formula, vars: &BTreeSet<VarId>) -> Vec<bool> {
    (0..1u64 << vars.len())
        .map(|bits| f.evaluate(&Assignment::from_bits(vars, bits)).unwrap())
        .collect()
}

fn brute_sets(f: &Formula, vars: &BTreeSet<VarId>) -> (BTreeSet<VarId>, BTreeSet<VarId>) {
    let t = table(f, vars);
    let (mut ess, mut fact) = (BTreeSet::new(), BTreeSet::new());
    for (k, x) in vars.iter().enumerate() {
        let flips = (0..t.len()).filter(|&i| t[i] != t[i ^ (1 << k)]).count();
        if flips > 0 {
            ess.insert(x.clone());
        }
        if flips == t.len() {
            fact.insert(x.clone());
        }
    }
    (ess, fact)
}

fn criterion_6() -> Result<String, String> {
    const CASES: usize = 1000;
    let mut rng = StdRng::seed_from_u64(2024);
    let all: BTreeSet<VarId> = NAMES.iter().map(|n| id(n)).collect();
    let (mut sets_bad, mut l1_bad, mut l2_bad, mut l5_bad, mut l7_bad) = (0, 0, 0, 0, 0);
    for _ in 0..CASES {
        let vars = rng.gen_range(1..=6);
        let universe: BTreeSet<VarId> = NAMES[..vars].iter().map(|n| id(n)).collect();
        let f = random_formula(&mut rng, vars, 5);
        let (ess, fact) = brute_sets(&f, &universe);
        if essential_vars(&f, U).unwrap() != ess || factor_vars(&f, U).unwrap() != fact {
            sets_bad += 1;
        }

        // x ^ g with x outside g is balanced
        let x = id(NAMES[rng.gen_range(0..6)]);
        let g = random_formula(&mut rng, 6, 4).substitute(&x, false);
        let xg = Formula::var(x.clone()) ^ g;
        if !is_balanced(&xg, &all).unwrap() {
            l1_bad += 1;
        }

        // for balanced f: dependence <=> unbalanced difference
        let h = random_formula(&mut rng, 6, 4);
        let dep = statistically_dependent(&xg, &h, &all).unwrap();
        if dep == is_balanced(&(xg.clone() ^ h), &all).unwrap() {
            l2_bad += 1;
        }

        // factorization biconditional
        let diff = f.substitute(&x, false) ^ f.substitute(&x, true);
        let factored = Formula::var(x.clone()) ^ f.substitute(&x, false);
        if is_tautology(&diff, U).unwrap() != (table(&factored, &all) == table(&f, &all)) {
            l5_bad += 1;
        }

        // approximations bracket the exact sets of an XOR-combination
        let terms: Vec<Formula> = (0..rng.gen_range(2..=4))
            .map(|_| random_formula(&mut rng, 6, 3))
            .collect();
        let parts: Vec<_> = terms.iter().map(|t| analyze(t, U).unwrap()).collect();
        let refs: Vec<_> = parts.iter().collect();
        let exact = analyze(&xor_all(&terms), U).unwrap();
        if !xfact(&refs).is_subset(&exact.fact) || !exact.ess.is_subset(&xess(&refs)) {
            l7_bad += 1;
        }
    }
    let detail = format!(
        "{CASES} formulas: ess/fact mismatches {sets_bad}, balance {l1_bad}, difference {l2_bad}, factorization {l5_bad}, approximation {l7_bad}"
    );
    if sets_bad + l1_bad + l2_bad + l5_bad + l7_bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Result<String, String> {
    let config = CheckerConfig::default();
    let (mut secure, mut counterexamples, mut incomplete) = (0, Vec::new(), 0);
    for name in builtin_names() {
        let c = builtin_circuit(name).unwrap();
        for site in enumerate_fault_sites(&c) {
            let d = build_detection(&c, &site).unwrap();
            match check_fault(&d, &config) {
                Verdict::Secure(_) => {
                    secure += 1;
                    for (s, dependent) in confirm_leak(&d).unwrap() {
                        if dependent {
                            counterexamples.push(format!("{name} {site} {s}"));
                        }
                    }
                }
                Verdict::AnalysisIncomplete(_) => incomplete += 1,
                Verdict::Unknown { .. } => {}
            }
        }
    }
    let detail = format!(
        "{secure} secure verdicts checked, {} counterexamples, {incomplete} incomplete",
        counterexamples.len()
    );
    if counterexamples.is_empty() && secure > 0 {
        Ok(detail)
    } else {
        Err(format!("{detail} {counterexamples:?}"))
    }
}

fn without_timing(json: &str) -> String {
    json.lines()
        .filter(|l| {
            !l.trim_start().starts_with("\"millis\"")
                && !l.trim_start().starts_with("\"total_millis\"")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut checked = Vec::new();
    for name in builtin_names() {
        let mut bodies = Vec::new();
        for jobs in ["1", "4"] {
            let json = dir.path().join(format!("{name}-{jobs}.json"));
            sifa(&[
                "verify",
                "--builtin",
                name,
                "--jobs",
                jobs,
                "--oracle",
                "--json",
                json.to_str().unwrap(),
            ]);
            bodies.push(without_timing(&std::fs::read_to_string(&json).unwrap()));
        }
        ok &= bodies[0] == bodies[1];
        checked.push(name);
    }
    let detail = format!("--jobs 1 vs 4 identical modulo timing for {checked:?}");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("chi3 secure at all 39 sites", criterion_1),
        ("reuse variants leak at the shared inverter", criterion_2),
        ("fig2 detection signal and leak", criterion_3),
        ("dependence products 6/10 and 6/6", criterion_4),
        ("masked OR secure via subset sweep", criterion_5),
        ("property suite against brute force", criterion_6),
        ("soundness sweep over bundled circuits", criterion_7),
        ("determinism across job counts", criterion_8),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {title} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {title} ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
