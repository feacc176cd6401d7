//! `solve`: bracket, iterate from both ends, write both solutions.

use anyhow::{anyhow, Result};
use robin_rd::grid::compute_rho;
use robin_rd::io::{load_pair_csv, save_pair_csv};
use robin_rd::monotone::{residual, SolutionRecord};
use robin_rd::subsuper::SuperCase;
use serde::Serialize;

use super::{
    bracket_and_solve, hint, run_oracle, CertificateSummary, OracleMatch, SolutionSummary,
};
use crate::{solution_file_name, Session, Status};

#[derive(Clone, Debug, Serialize)]
pub struct WrittenSolution {
    pub file: String,
    pub summary: SolutionSummary,
    /// Interior and boundary residuals after reading the CSV back.
    pub reimported_residual: [f64; 2],
    pub oracle: Option<OracleMatch>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub box_max: f64,
    pub positive_roots: usize,
    pub unrefined_seeds: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
    pub a1: f64,
    pub rho: f64,
    pub case: SuperCase,
    pub subsolution: CertificateSummary,
    pub supersolution: CertificateSummary,
    pub minimal: WrittenSolution,
    pub maximal: WrittenSolution,
    pub oracle: Option<OracleSummary>,
    pub pass: bool,
}

fn write(session: &Session, record: &SolutionRecord) -> Result<(String, [f64; 2])> {
    let name = solution_file_name(record.lambda, record.mu, record.origin.tag());
    let path = session.output(&name)?;
    save_pair_csv(&record.pair, &path)?;
    let back = load_pair_csv(session.grid, &path)?;
    let (i, b) = residual(session.grid, record.lambda, record.mu, &session.quad, &back)?;
    Ok((name, [i, b]))
}

pub fn run(session: &Session, lambda: f64, mu: f64) -> Result<(SolveReport, Status)> {
    let a1 = session.a1()?;
    let t = lambda + mu;
    if !(t > a1) {
        return Err(anyhow!(
            "lambda + mu = {t} does not exceed A1 = {a1:.6}; {}",
            hint(&robin_rd::Error::ParameterRegime(String::new()))
        ));
    }
    let solved =
        bracket_and_solve(session, lambda, mu).map_err(|e| anyhow!("{e}; hint: {}", hint(&e)))?;
    let oracle = if session.oracle {
        Some(run_oracle(session, lambda, mu, Some(solved.sup.amplitude))?)
    } else {
        None
    };
    let tol = session.config.tolerances.oracle_match;
    let mut written = Vec::new();
    for record in [&solved.minimal, &solved.maximal] {
        let (file, reimported_residual) = write(session, record)?;
        written.push(WrittenSolution {
            file,
            summary: record.into(),
            reimported_residual,
            oracle: oracle.as_ref().map(|e| OracleMatch::find(e, record, tol)),
        });
    }
    let maximal = written.pop().unwrap();
    let minimal = written.pop().unwrap();
    let residual_tol = session.config.tolerances.residual;
    let ok = |w: &WrittenSolution| {
        w.summary.converged
            && w.summary.positive
            && w.reimported_residual.iter().all(|r| *r < residual_tol)
            && w.oracle.as_ref().map_or(true, |o| o.matched)
    };
    let pass = ok(&minimal) && ok(&maximal);
    let report = SolveReport {
        lambda,
        mu,
        t,
        a1,
        rho: compute_rho(session.grid, t, session.quad.g.deriv0())?,
        case: solved.case,
        subsolution: (&solved.sub).into(),
        supersolution: (&solved.sup).into(),
        minimal,
        maximal,
        oracle: oracle.map(|e| OracleSummary {
            box_max: e.box_max,
            positive_roots: e.count_positive(),
            unrefined_seeds: e.unrefined_seeds,
        }),
        pass,
    };
    session.write_report(&report)?;
    Ok((report, Status::from_pass(pass)))
}

pub fn print(report: &SolveReport) {
    println!(
        "lambda = {}  mu = {}  t = {}  A1 = {:.6}  rho = {:.4e}",
        report.lambda, report.mu, report.t, report.a1, report.rho
    );
    println!(
        "bracket: sub amplitude {:.6e}, {:?} supersolution amplitude {:.6e}",
        report.subsolution.amplitude, report.case, report.supersolution.amplitude
    );
    for (label, w) in [("minimal", &report.minimal), ("maximal", &report.maximal)] {
        let s = &w.summary;
        println!(
            "{label}: |u| = {:.9} |v| = {:.9} residual {:.2e}/{:.2e} after {} iterations{} -> {}",
            s.u_sup,
            s.v_sup,
            s.residual_interior,
            s.residual_boundary,
            s.iterations,
            if s.converged { "" } else { " (not converged)" },
            w.file
        );
        if let Some(o) = &w.oracle {
            match o.distance {
                Some(d) => println!(
                    "  oracle: closest positive root at distance {d:.3e}{}",
                    if o.matched { "" } else { "  NO MATCH" }
                ),
                None => println!("  oracle: no positive root found  NO MATCH"),
            }
        }
    }
    if let Some(o) = &report.oracle {
        println!(
            "oracle: {} positive roots in [0, {}]^2",
            o.positive_roots, o.box_max
        );
    }
}
