//! `verify`: check a pair file against the sub- or supersolution inequalities.

use std::path::Path;

use anyhow::{Context, Result};
use robin_rd::io::load_pair_csv;
use robin_rd::subsuper::{verify_pair, PairKind, VerificationReport};

use crate::{Session, Status};

pub fn run(
    session: &Session,
    pair_file: &Path,
    lambda: f64,
    mu: f64,
    kind: PairKind,
    strict: bool,
) -> Result<(VerificationReport, Status)> {
    let pair = load_pair_csv(session.grid, pair_file)
        .with_context(|| format!("reading pair file {}", pair_file.display()))?;
    let report = verify_pair(session.grid, lambda, mu, &session.quad, &pair, kind, strict)?;
    session.write_report(&report)?;
    let status = Status::from_pass(report.pass);
    Ok((report, status))
}

pub fn print(report: &VerificationReport) {
    let kind = match report.kind {
        PairKind::Sub => "subsolution",
        PairKind::Super => "supersolution",
    };
    let strict = if report.strict { "strict " } else { "" };
    println!(
        "{strict}{kind} at lambda = {}, mu = {}: {}",
        report.lambda,
        report.mu,
        if report.pass { "PASS" } else { "FAIL" }
    );
    for (label, eq) in [("u", &report.u), ("v", &report.v)] {
        println!(
            "  {label}: worst interior row {:.6e} at x = {:.6}, worst boundary row {:.6e} at x = {:.6}",
            eq.interior.value, eq.interior.x, eq.boundary.value, eq.boundary.x
        );
    }
    if let Some((label, row)) = report.witness() {
        println!(
            "  witness: {label} row at node {} (x = {:.9}) has value {:.6e}",
            row.node, row.x, row.value
        );
    }
}
