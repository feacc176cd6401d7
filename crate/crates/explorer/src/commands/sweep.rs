//! `sweep`: solve at every configured point and summarize the trends.

use std::fs::File;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use robin_rd::grid::compute_rho;
use serde::Serialize;

use super::{bracket_and_solve, run_oracle};
use crate::{Session, Status};

/// One line of `sweep.csv`. Missing solutions leave their cells empty.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
    pub u_min_sup: Option<f64>,
    pub v_min_sup: Option<f64>,
    pub u_max_sup: Option<f64>,
    pub v_max_sup: Option<f64>,
    pub count: Option<usize>,
    pub rho: f64,
    pub converged: bool,
}

/// Row details that do not go into the CSV.
#[derive(Clone, Debug, Serialize)]
pub struct RowNote {
    pub lambda: f64,
    pub mu: f64,
    pub error: Option<String>,
    /// Smallest sup-norm among the oracle's positive roots.
    pub oracle_min_u_sup: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trends {
    /// Least-squares slope of `ln ‖u‖∞` (maximal solution) against `ln t` over
    /// `t >= t_max/10`; absent unless every row there converged.
    pub top_decade_slope: Option<f64>,
    /// Converged rows in the top decade.
    pub top_decade_points: usize,
    /// Maximal-solution sup-norms strictly increasing in `t` over converged rows.
    pub max_sup_increasing: Option<bool>,
    /// Rows with `t` in `(A₁, A₁ + 0.2]`.
    pub near_threshold_points: usize,
    /// Minimal positive sup-norm decreasing as `t` decreases to `A₁`.
    pub near_threshold_decreasing: Option<bool>,
    pub rho_negative: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub a1: f64,
    pub rows: Vec<SweepRow>,
    pub notes: Vec<RowNote>,
    pub converged_rows: usize,
    pub trends: Trends,
}

fn sweep_point(session: &Session, lambda: f64, mu: f64) -> Result<(SweepRow, RowNote)> {
    let t = lambda + mu;
    let rho = compute_rho(session.grid, t, session.quad.g.deriv0())?;
    let mut row = SweepRow {
        lambda,
        mu,
        t,
        u_min_sup: None,
        v_min_sup: None,
        u_max_sup: None,
        v_max_sup: None,
        count: None,
        rho,
        converged: false,
    };
    let mut note = RowNote {
        lambda,
        mu,
        error: None,
        oracle_min_u_sup: None,
    };
    let mut amplitude = None;
    match bracket_and_solve(session, lambda, mu) {
        Ok(s) => {
            row.u_min_sup = Some(s.minimal.u_sup());
            row.v_min_sup = Some(s.minimal.v_sup());
            row.u_max_sup = Some(s.maximal.u_sup());
            row.v_max_sup = Some(s.maximal.v_sup());
            row.converged = s.minimal.converged && s.maximal.converged;
            amplitude = Some(s.sup.amplitude);
        }
        Err(e) => note.error = Some(e.to_string()),
    }
    if session.oracle {
        let e = run_oracle(session, lambda, mu, amplitude)?;
        row.count = Some(e.count_positive());
        note.oracle_min_u_sup = e
            .positive
            .iter()
            .map(|r| r.record.u_sup())
            .min_by(f64::total_cmp);
    }
    Ok((row, note))
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn strictly_increasing(values: &[f64]) -> Option<bool> {
    (values.len() >= 2).then(|| values.windows(2).all(|w| w[0] < w[1]))
}

pub fn trends(a1: f64, rows: &[SweepRow], notes: &[RowNote]) -> Trends {
    let converged: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.u_max_sup.filter(|u| *u > 0.0).map(|u| (r.t, u)))
        .collect();
    let t_max = rows.iter().map(|r| r.t).fold(0.0, f64::max);
    let top_rows = rows.iter().filter(|r| r.t >= t_max / 10.0).count();
    let top: Vec<(f64, f64)> = converged
        .iter()
        .filter(|(t, _)| *t >= t_max / 10.0)
        .map(|(t, u)| (t.ln(), u.ln()))
        .collect();
    // A slope over part of the decade says nothing about its top.
    let top_complete = top.len() == top_rows;
    let near: Vec<f64> = rows
        .iter()
        .zip(notes)
        .filter(|(r, _)| r.t > a1 && r.t <= a1 + 0.2)
        .filter_map(|(r, n)| n.oracle_min_u_sup.or(r.u_min_sup.filter(|_| r.converged)))
        .collect();
    Trends {
        top_decade_slope: if top_complete { slope(&top) } else { None },
        top_decade_points: top.len(),
        max_sup_increasing: strictly_increasing(
            &converged.iter().map(|(_, u)| *u).collect::<Vec<_>>(),
        ),
        near_threshold_points: near.len(),
        near_threshold_decreasing: strictly_increasing(&near),
        rho_negative: rows.iter().all(|r| r.rho < 0.0),
    }
}

pub fn run(session: &Session) -> Result<(SweepReport, Status)> {
    let a1 = session.a1()?;
    let mut points = session.config.params.points();
    if let Some((l, m)) = points.iter().find(|(l, m)| !(l + m > a1)) {
        bail!("every sweep point needs lambda + mu > A1 = {a1:.6}; ({l}, {m}) does not");
    }
    points.sort_by(|a, b| {
        (a.0 + a.1)
            .total_cmp(&(b.0 + b.1))
            .then(a.0.total_cmp(&b.0))
    });
    let results: Vec<(SweepRow, RowNote)> = points
        .par_iter()
        .map(|&(l, m)| sweep_point(session, l, m))
        .collect::<Result<_>>()?;
    let (rows, notes): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let path = session.output("sweep.csv")?;
    let mut writer = csv::Writer::from_writer(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    );
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    let report = SweepReport {
        a1,
        converged_rows: rows.iter().filter(|r| r.converged).count(),
        trends: trends(a1, &rows, &notes),
        rows,
        notes,
    };
    session.write_report(&report)?;
    let status = Status::from_pass(report.trends.rho_negative);
    Ok((report, status))
}

pub fn print(report: &SweepReport) {
    println!("A1 = {:.9}", report.a1);
    println!(
        "{:>10} {:>10} {:>10} {:>12} {:>12} {:>6} {:>11}",
        "lambda", "mu", "t", "|u_min|", "|u_max|", "count", "rho"
    );
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
    for (r, n) in report.rows.iter().zip(&report.notes) {
        println!(
            "{:>10.5} {:>10.5} {:>10.5} {:>12} {:>12} {:>6} {:>11.3e}{}",
            r.lambda,
            r.mu,
            r.t,
            cell(r.u_min_sup),
            cell(r.u_max_sup),
            r.count.map_or("-".to_string(), |c| c.to_string()),
            r.rho,
            n.error
                .as_ref()
                .map_or(String::new(), |e| format!("  [{e}]"))
        );
    }
    let t = &report.trends;
    println!(
        "converged {}/{}; top-decade slope {}; max sup increasing {:?}; rho negative {}",
        report.converged_rows,
        report.rows.len(),
        t.top_decade_slope
            .map_or("n/a".into(), |s| format!("{s:.3}")),
        t.max_sup_increasing,
        t.rho_negative
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|t| (t.ln(), (3.0 * t.powf(0.75)).ln()))
            .collect();
        assert!((slope(&pts).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(slope(&pts[..1]), None);
    }
}
