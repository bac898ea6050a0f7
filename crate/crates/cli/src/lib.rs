//! Orchestration and reporting behind the `sifa` binary.

pub mod report;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use sifa_core::builtin::builtin_circuit;
use sifa_core::checker::{check_fault_traced, CheckTrace, CheckerConfig, Verdict};
use sifa_core::fault::{build_detection, enumerate_fault_sites, FaultError, FaultSite};
use sifa_core::netlist::{parse_netlist, CircuitNetlist, NetlistError};
use sifa_core::oracle::{confirm_leak, OracleError};
use thiserror::Error;

pub use report::{SiteReport, Summary, VerdictReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Netlist { path: String, source: NetlistError },
    #[error(transparent)]
    Fault(#[from] FaultError),
    #[error("cannot create worker pool: {0}")]
    Pool(String),
}

/// Loads a netlist file, or a bundled circuit when `builtin` is given.
pub fn load_circuit(
    path: Option<&Path>,
    builtin: Option<&str>,
) -> Result<CircuitNetlist, CliError> {
    if let Some(name) = builtin {
        return builtin_circuit(name).map_err(|source| CliError::Netlist {
            path: format!("builtin:{name}"),
            source,
        });
    }
    let path = path.expect("either a path or a builtin name");
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_netlist(&bytes).map_err(|source| CliError::Netlist {
        path: shown,
        source,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub jobs: usize,
    pub oracle: bool,
    pub checker: CheckerConfig,
    pub fault_inputs: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            jobs: 1,
            oracle: false,
            checker: CheckerConfig::default(),
            fault_inputs: true,
        }
    }
}

pub fn fault_sites(c: &CircuitNetlist, fault_inputs: bool) -> Vec<FaultSite> {
    enumerate_fault_sites(c)
        .into_iter()
        .filter(|s| fault_inputs || !s.is_input())
        .collect()
}

/// Result of checking one site, before serialization.
#[derive(Debug, Clone)]
pub struct SiteOutcome {
    pub site: FaultSite,
    pub trace: CheckTrace,
    /// Exact dependence per secret, when the oracle ran.
    pub oracle: Option<Result<Vec<(String, bool)>, OracleError>>,
    pub millis: u64,
}

impl SiteOutcome {
    pub fn leaked(&self) -> Vec<&str> {
        match &self.oracle {
            Some(Ok(deps)) => deps
                .iter()
                .filter(|(_, d)| *d)
                .map(|(s, _)| s.as_str())
                .collect(),
            _ => Vec::new(),
        }
    }
}

pub fn check_site(
    c: &CircuitNetlist,
    site: &FaultSite,
    opts: &VerifyOptions,
) -> Result<SiteOutcome, CliError> {
    let start = Instant::now();
    let d = build_detection(c, site)?;
    let trace = check_fault_traced(&d, &opts.checker);
    let oracle = match trace.verdict {
        Verdict::Unknown { .. } if opts.oracle => Some(confirm_leak(&d)),
        _ => None,
    };
    Ok(SiteOutcome {
        site: site.clone(),
        trace,
        oracle,
        millis: start.elapsed().as_millis() as u64,
    })
}

/// Checks every site on `opts.jobs` workers; outcomes come back in site order.
pub fn verify(c: &CircuitNetlist, opts: &VerifyOptions) -> Result<Vec<SiteOutcome>, CliError> {
    let sites = fault_sites(c, opts.fault_inputs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| sites.par_iter().map(|s| check_site(c, s, opts)).collect())
}

/// 0 when every site is secure, 1 when any site is unknown or leaks, else 3.
pub fn exit_code(outcomes: &[SiteOutcome]) -> u8 {
    let mut code = 0;
    for o in outcomes {
        match o.trace.verdict {
            Verdict::Secure(_) => {}
            Verdict::Unknown { .. } => return 1,
            Verdict::AnalysisIncomplete(_) => code = 3,
        }
    }
    code
}

/// Verdict trace for a single site; with `opts.oracle` the exact oracle runs
/// whatever the verdict.
pub fn explain(
    c: &CircuitNetlist,
    site: &FaultSite,
    opts: &VerifyOptions,
) -> Result<String, CliError> {
    let d = build_detection(c, site)?;
    let mut outcome = check_site(c, site, opts)?;
    if opts.oracle && outcome.oracle.is_none() {
        outcome.oracle = Some(confirm_leak(&d));
    }
    Ok(report::explain_text(&d, c.outputs(), &outcome))
}
