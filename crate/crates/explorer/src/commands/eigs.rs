//! `eigs`: the principal eigenvalue threshold and the sign table of ϱ.

use anyhow::Result;
use robin_rd::grid::{compute_rho, solve_k1};
use robin_rd::subsuper::xi;
use serde::Serialize;

use crate::{Session, Status};

/// Below this magnitude ϱ is labelled zero.
pub const RHO_ZERO_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    pub fn of(value: f64, tol: f64) -> Self {
        if value.abs() < tol {
            Sign::Zero
        } else if value > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoRow {
    pub t: f64,
    pub rho: f64,
    pub sign: Sign,
    /// Sign of `A₁ − t`.
    pub expected: Sign,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigsReport {
    pub grid: usize,
    pub gprime0: f64,
    pub tau: f64,
    pub k1: f64,
    pub a1: f64,
    pub xi_sup: f64,
    pub rho: Vec<RhoRow>,
    pub sign_pattern_ok: bool,
}

/// t-values of the configured parameters, with `A₁` itself added.
fn ladder(session: &Session, a1: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = session
        .config
        .params
        .points()
        .into_iter()
        .map(|(l, m)| l + m)
        .filter(|t| *t > 0.0)
        .collect();
    ts.push(a1);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

pub fn run(session: &Session) -> Result<(EigsReport, Status)> {
    let g0 = session.quad.g.deriv0();
    anyhow::ensure!(g0 > 0.0, "g'(0) must be positive, got {g0}");
    let tau = 1.0 / g0.sqrt();
    let k1 = solve_k1(session.grid, tau)?;
    let a1 = k1 / g0;
    let mut rows = Vec::new();
    for t in ladder(session, a1) {
        let rho = compute_rho(session.grid, t, g0)?;
        let sign = Sign::of(rho, RHO_ZERO_TOL);
        let expected = if t == a1 {
            Sign::Zero
        } else {
            Sign::of(a1 - t, 0.0)
        };
        rows.push(RhoRow {
            t,
            rho,
            sign,
            expected,
            matches: sign == expected,
        });
    }
    let report = EigsReport {
        grid: session.grid.interior(),
        gprime0: g0,
        tau,
        k1,
        a1,
        xi_sup: xi(session.grid)?.apex_sup_norm(),
        sign_pattern_ok: rows.iter().all(|r| r.matches),
        rho: rows,
    };
    session.write_report(&report)?;
    let status = Status::from_pass(report.sign_pattern_ok);
    Ok((report, status))
}

pub fn print(report: &EigsReport) {
    println!("g'(0) = {:.9}  tau = {:.9}", report.gprime0, report.tau);
    println!("K1(tau) = {:.9}", report.k1);
    println!("A1 = {:.9}", report.a1);
    println!("|xi|_inf = {:.10}", report.xi_sup);
    println!("{:>14} {:>14} {:>9} {:>9}", "t", "rho", "sign", "expected");
    for r in &report.rho {
        println!(
            "{:>14.9} {:>14.6e} {:>9} {:>9}{}",
            r.t,
            r.rho,
            format!("{:?}", r.sign).to_lowercase(),
            format!("{:?}", r.expected).to_lowercase(),
            if r.matches { "" } else { "  MISMATCH" }
        );
    }
}
