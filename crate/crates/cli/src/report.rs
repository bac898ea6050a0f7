//! JSON and text renderings of a verification run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sifa_core::checker::Verdict;
use sifa_core::fault::DetectionInstance;

use crate::SiteOutcome;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteReport {
    pub site: String,
    /// One of `secure`, `unknown`, `confirmed_leak`, `incomplete`.
    pub verdict: String,
    pub witness: String,
    /// Offending combination as indices into the per-output differences.
    pub subset: Option<Vec<usize>>,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub secure: usize,
    /// Includes confirmed leaks.
    pub unknown: usize,
    pub incomplete: usize,
    pub total_millis: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub circuit: String,
    pub tool_version: String,
    pub sites: Vec<SiteReport>,
    pub summary: Summary,
}

fn site_report(o: &SiteOutcome) -> SiteReport {
    let (verdict, witness, subset) = match &o.trace.verdict {
        Verdict::Secure(w) => ("secure", w.to_string(), None),
        Verdict::Unknown { subset } => {
            let leaked = o.leaked();
            let (verdict, witness) = match &o.oracle {
                Some(Ok(_)) if !leaked.is_empty() => {
                    ("confirmed_leak", format!("dependent:{}", leaked.join(",")))
                }
                Some(Ok(_)) => ("unknown", "oracle_independent".to_string()),
                Some(Err(_)) => ("unknown", "oracle_unavailable".to_string()),
                None => ("unknown", "offending_combination".to_string()),
            };
            (verdict, witness, Some(subset.clone()))
        }
        Verdict::AnalysisIncomplete(reason) => ("incomplete", reason.clone(), None),
    };
    SiteReport {
        site: o.site.to_string(),
        verdict: verdict.to_string(),
        witness,
        subset,
        millis: o.millis,
    }
}

impl VerdictReport {
    pub fn new(circuit: &str, outcomes: &[SiteOutcome], total_millis: u64) -> Self {
        let sites: Vec<SiteReport> = outcomes.iter().map(site_report).collect();
        let count = |v: &[&str]| {
            sites
                .iter()
                .filter(|s| v.contains(&s.verdict.as_str()))
                .count()
        };
        let summary = Summary {
            secure: count(&["secure"]),
            unknown: count(&["unknown", "confirmed_leak"]),
            incomplete: count(&["incomplete"]),
            total_millis,
        };
        VerdictReport {
            circuit: circuit.to_string(),
            tool_version: crate::TOOL_VERSION.to_string(),
            sites,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable listing, unknown and leaking sites first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let rank = |v: &str| match v {
            "confirmed_leak" | "unknown" => 0,
            "incomplete" => 1,
            _ => 2,
        };
        let mut order: Vec<&SiteReport> = self.sites.iter().collect();
        order.sort_by_key(|s| rank(&s.verdict));
        for s in order {
            let _ = write!(out, "{:<15} {:<16} {}", s.verdict, s.site, s.witness);
            if let Some(subset) = &s.subset {
                let _ = write!(out, " subset={subset:?}");
            }
            out.push('\n');
        }
        let m = &self.summary;
        let _ = writeln!(
            out,
            "{}: {} sites, {} secure, {} unknown, {} incomplete ({} ms)",
            self.circuit,
            self.sites.len(),
            m.secure,
            m.unknown,
            m.incomplete,
            m.total_millis
        );
        out
    }
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

/// Step-by-step account of how the verdict for one site was reached.
pub fn explain_text(d: &DetectionInstance, outputs: &[String], o: &SiteOutcome) -> String {
    let mut out = String::new();
    let t = &o.trace;
    let _ = writeln!(out, "site {}", o.site);
    for (i, (delta, name)) in d.deltas.iter().zip(outputs).enumerate() {
        let _ = writeln!(out, "  delta[{i}] ({name}) = {delta}");
    }
    if let Some(sets) = &t.delta_sets {
        let _ = writeln!(out, "ess(delta)  = {}", join(&sets.ess));
        let _ = writeln!(out, "fact(delta) = {}", join(&sets.fact));
        let _ = writeln!(out, "complete secrets = {}", join(&t.complete));
        let _ = writeln!(out, "hiding candidates = {}", join(&t.hiding));
    }
    if !t.basis.is_empty() {
        let _ = writeln!(
            out,
            "basis ({} members) = {}",
            t.basis.len(),
            join(t.basis.iter().map(|i| format!("delta[{i}]")))
        );
        for (i, sets) in t.basis.iter().zip(&t.member_sets) {
            let _ = writeln!(
                out,
                "  delta[{i}]: fact = {}, ess(fnl) = {}",
                join(&sets.fact),
                join(&sets.fnl_ess)
            );
        }
    }
    if let Some(c) = &t.offending {
        let names = c.subset.iter().map(|i| format!("delta[{i}]"));
        let _ = writeln!(out, "offending combination {}", join(names));
        let _ = writeln!(out, "  xess  = {}", join(&c.xess));
        let _ = writeln!(out, "  xfact = {}", join(&c.xfact));
    }
    let report = site_report(o);
    let _ = writeln!(out, "verdict: {} ({})", report.verdict, report.witness);
    match &o.oracle {
        Some(Ok(deps)) => {
            for (secret, dependent) in deps {
                let word = if *dependent {
                    "DEPENDENT"
                } else {
                    "independent"
                };
                let _ = writeln!(out, "oracle: secret {secret}: {word}");
            }
        }
        Some(Err(e)) => {
            let _ = writeln!(out, "oracle: {e}");
        }
        None => {}
    }
    out
}
