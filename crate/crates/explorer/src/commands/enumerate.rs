//! `enumerate`: every solution the shooting oracle finds at one point.

use anyhow::Result;
use robin_rd::io::save_pair_csv;
use robin_rd::shooting::enumerate_solutions;
use serde::Serialize;

use super::RootSummary;
use crate::{solution_file_name, Session, Status};

#[derive(Clone, Debug, Serialize)]
pub struct EnumerationReport {
    pub lambda: f64,
    pub mu: f64,
    pub box_max: f64,
    pub scan_density: usize,
    pub unrefined_seeds: usize,
    pub positive_count: usize,
    pub trivial: Option<RootSummary>,
    pub positive: Vec<RootSummary>,
    pub other: Vec<RootSummary>,
    pub files: Vec<String>,
}

pub fn run(
    session: &Session,
    lambda: f64,
    mu: f64,
    box_max: Option<f64>,
    density: Option<usize>,
) -> Result<(EnumerationReport, Status)> {
    let shooting = &session.config.shooting;
    let box_max = box_max.or(shooting.box_max).unwrap_or(8.0);
    let density = density.unwrap_or(shooting.density);
    let e = enumerate_solutions(
        session.grid,
        lambda,
        mu,
        &session.quad,
        box_max,
        density,
        &shooting.options(),
    )?;
    let mut files = Vec::new();
    for (i, root) in e.positive.iter().enumerate() {
        let name = solution_file_name(lambda, mu, &format!("shoot{i}"));
        save_pair_csv(&root.record.pair, session.output(&name)?)?;
        files.push(name);
    }
    let report = EnumerationReport {
        lambda,
        mu,
        box_max: e.box_max,
        scan_density: e.scan_density,
        unrefined_seeds: e.unrefined_seeds,
        positive_count: e.count_positive(),
        trivial: e.trivial.as_ref().map(Into::into),
        positive: e.positive.iter().map(Into::into).collect(),
        other: e.other.iter().map(Into::into).collect(),
        files,
    };
    session.write_report(&report)?;
    Ok((report, Status::Success))
}

pub fn print(report: &EnumerationReport) {
    println!(
        "lambda = {}  mu = {}  box [0, {}]^2  density {}",
        report.lambda, report.mu, report.box_max, report.scan_density
    );
    println!("{} positive solutions", report.positive_count);
    for (i, r) in report.positive.iter().enumerate() {
        println!(
            "  #{i}: u(0) = {:.9} v(0) = {:.9} |u| = {:.9} |v| = {:.9} fd residual {:.2e}",
            r.u0, r.v0, r.u_sup, r.v_sup, r.fd_residual_interior
        );
    }
    if !report.other.is_empty() {
        println!(
            "{} sign-changing or boundary-touching roots",
            report.other.len()
        );
    }
    if report.unrefined_seeds > 0 {
        println!("{} seeds did not refine", report.unrefined_seeds);
    }
}
