//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed. Pass a
//! substring to run only matching criteria. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robin_rd::grid::{compute_a1, compute_rho, solve_k1, Grid1D};
use robin_rd::monotone::{iterate_down, iterate_up, residual, IterationOptions};
use robin_rd::nonlinearity::{
    default_h_samples, example_family, q1, q2, validate_h, QuadSpec, ReactionQuad,
};
use robin_rd::shooting::{enumerate_solutions, step_halving_shift, Enumeration, ShootingOptions};
use robin_rd::subsuper::{
    eigen_subsolution, near_threshold_supersolution, supersolution, verify_pair, xi, zeta,
    OrderInterval, PairField, PairKind, SuperCase,
};
use robin_rd_explorer::commands::multiplicity;
use robin_rd_explorer::{Overrides, RunConfig, Session};

const N: usize = 1024;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn grid() -> Grid1D {
    Grid1D::new(N).unwrap()
}

fn family() -> ReactionQuad {
    example_family(1.0, 10.0).unwrap()
}

fn a1(quad: &ReactionQuad) -> f64 {
    compute_a1(grid(), quad.g.deriv0()).unwrap()
}

fn enumerate(lambda: f64, mu: f64, quad: &ReactionQuad, box_max: f64) -> Enumeration {
    enumerate_solutions(
        grid(),
        lambda,
        mu,
        quad,
        box_max,
        128,
        &ShootingOptions::default(),
    )
    .unwrap()
}

fn eigenvalue_closed_form() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for tau in [0.5f64, 1.0, 2.0] {
        let exact = (2.0 * tau.atan()).powi(2);
        let sizes = [128usize, 256, 512, 1024];
        let errors: Vec<f64> = sizes
            .iter()
            .map(|&n| (solve_k1(Grid1D::new(n).unwrap(), tau).unwrap() - exact).abs())
            .collect();
        let orders: Vec<f64> = (0..sizes.len() - 1)
            .map(|i| {
                let h_ratio = (sizes[i + 1] + 1) as f64 / (sizes[i] + 1) as f64;
                (errors[i] / errors[i + 1]).ln() / h_ratio.ln()
            })
            .collect();
        let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
        let ok = errors[3] < 1e-4 && min_order >= 1.9;
        pass &= ok;
        notes.push(format!(
            "tau {tau}: err {:.2e}, order >= {min_order:.3}",
            errors[3]
        ));
    }
    verdict(pass, notes.join("; "))
}

fn rho_trichotomy() -> Verdict {
    let quad = family();
    let g0 = quad.g.deriv0();
    let a1 = a1(&quad);
    let mut ts: Vec<f64> = (1..=10)
        .flat_map(|k| [a1 * (1.0 - 0.5f64.powi(k)), a1 * (1.0 + 0.5f64.powi(k))])
        .collect();
    ts.sort_by(f64::total_cmp);
    let wrong: Vec<f64> = ts
        .iter()
        .copied()
        .filter(|&t| {
            let rho = compute_rho(grid(), t, g0).unwrap();
            rho.signum() != (a1 - t).signum() || rho == 0.0
        })
        .collect();
    let at = compute_rho(grid(), a1, g0).unwrap();
    verdict(
        wrong.is_empty() && at.abs() < 1e-6,
        format!(
            "{} t-values, {} wrong signs; |rho(A1)| = {:.2e}",
            ts.len(),
            wrong.len(),
            at.abs()
        ),
    )
}

fn auxiliary_solutions() -> Verdict {
    let xs = xi(grid()).unwrap().apex_sup_norm();
    let mut pass = (xs - 0.625).abs() <= 1e-8;
    let mut notes = vec![format!("|xi| - 0.625 = {:.2e}", xs - 0.625)];
    for t in [1.0f64, 4.0, 9.0] {
        let zs = zeta(grid(), t / 2.0, t / 2.0).unwrap().apex_sup_norm();
        let exact = 0.125 + 0.5 / t.sqrt();
        pass &= (zs - exact).abs() <= 1e-8;
        notes.push(format!("t {t}: |zeta| err {:.2e}", zs - exact));
    }
    verdict(pass, notes.join("; "))
}

fn equilibrium_exactness() -> Verdict {
    let custom: QuadSpec = serde_json::from_str(
        r#"{
            "f": [{"kind": "power", "coeff": 1.0, "exponent": 1.0}],
            "g": [{"kind": "constant", "value": 1.0}, {"kind": "power", "coeff": -1.0, "exponent": -1.0, "shift": 1.0}],
            "h": [{"kind": "constant", "value": 1.0}, {"kind": "exp", "coeff": -1.0, "rate": -1.0}],
            "q": [{"from": 0.0, "terms": [{"kind": "power", "coeff": 2.0, "exponent": 0.5, "shift": 1.0}, {"kind": "constant", "value": -2.0}]},
                  {"from": 3.0, "terms": [{"kind": "power", "coeff": 0.5, "exponent": 1.0}, {"kind": "constant", "value": 0.5}]}]
        }"#,
    )
    .unwrap();
    let mut quads = vec![("custom".to_string(), custom.build().unwrap())];
    for (k, alpha) in [(0.5, 10.0), (1.0, 10.0), (1.0, 100.0), (1.5, 20.0)] {
        quads.push((
            format!("family({k}, {alpha})"),
            example_family(k, alpha).unwrap(),
        ));
    }
    let samples = default_h_samples();
    let mut worst = 0.0_f64;
    let mut pass = true;
    for (name, quad) in &quads {
        let h1 = validate_h(quad, &samples)
            .unwrap()
            .passed(robin_rd::nonlinearity::Hypothesis::H1);
        if h1 != Some(true) {
            return verdict(false, format!("{name} does not satisfy H1"));
        }
        for (l, m) in [(0.3, 0.2), (2.0, 2.0), (7.0, 0.5)] {
            let (i, b) = residual(grid(), l, m, quad, &PairField::zeros(grid())).unwrap();
            worst = worst.max(i).max(b);
            pass &= i <= 1e-12 && b <= 1e-12;
        }
    }
    verdict(
        pass,
        format!("{} quadruples, worst residual {worst:e}", quads.len()),
    )
}

fn existence_at_two_two() -> Verdict {
    let (l, m) = (2.0, 2.0);
    let quad = family();
    let g = grid();
    let oracle = enumerate(l, m, &quad, 8.0);
    let oracle_note = format!(
        "oracle finds {} positive roots in [0, 8]^2",
        oracle.count_positive()
    );
    let sub = match eigen_subsolution(g, l, m, &quad) {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("subsolution: {e}; {oracle_note}")),
    };
    let sup = match supersolution(g, l, m, &quad, SuperCase::Auto, Some(&sub.pair)) {
        Ok((_, s)) => s,
        Err(e) => return verdict(false, format!("supersolution: {e}; {oracle_note}")),
    };
    let sub_ok = verify_pair(g, l, m, &quad, &sub.pair, PairKind::Sub, false)
        .unwrap()
        .pass;
    let sup_ok = verify_pair(g, l, m, &quad, &sup.pair, PairKind::Super, false)
        .unwrap()
        .pass;
    let interval = OrderInterval::new(sub.pair, sup.pair).unwrap();
    let rec = match iterate_up(g, l, m, &quad, &interval, &IterationOptions::default()) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("iteration: {e}")),
    };
    let matched = oracle.closest_positive(&rec.pair).map(|(_, d)| d);
    let pass = sub_ok
        && sup_ok
        && rec.residual_interior < 1e-6
        && rec.residual_boundary < 1e-6
        && rec.is_positive()
        && matched.map_or(false, |d| d < 1e-3);
    verdict(
        pass,
        format!(
            "residual {:.2e}, positive {}, oracle distance {:?}",
            rec.residual_interior,
            rec.is_positive(),
            matched
        ),
    )
}

fn near_threshold_trend() -> Verdict {
    let quad = family();
    let a1 = a1(&quad);
    let mut sups = Vec::new();
    let mut missing = Vec::new();
    let mut oracle = Vec::new();
    for j in 3..=10 {
        let t = a1 * (1.0 + 0.5f64.powi(j));
        match near_threshold_supersolution(grid(), t / 2.0, t / 2.0, &quad, 1.0) {
            Ok(s) => sups.push(s.certified.pair.sup_norm()),
            Err(_) => missing.push(j),
        }
        let e = enumerate(t / 2.0, t / 2.0, &quad, 8.0);
        if let Some(s) = e
            .positive
            .iter()
            .map(|r| r.record.u_sup())
            .min_by(f64::total_cmp)
        {
            oracle.push(s);
        }
    }
    let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
    let last = if missing.contains(&10) {
        None
    } else {
        sups.last().copied()
    };
    let oracle_ok = oracle.windows(2).all(|w| w[1] <= w[0]);
    verdict(
        missing.is_empty() && decreasing && last.map_or(false, |v| v < 0.1) && oracle_ok,
        format!(
            "not constructed at j = {missing:?}; sup-norms {:?}; j = 10 value {:?}; oracle minimal roots nonincreasing {oracle_ok} ({} found)",
            sups.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(),
            last,
            oracle.len()
        ),
    )
}

fn growth_trend() -> Verdict {
    let quad = family();
    let g = grid();
    let ts = [3.0f64, 4.0, 6.0, 10.0, 20.0, 40.0];
    let mut sups: Vec<Option<f64>> = Vec::new();
    for &t in &ts {
        let (l, m) = (t / 2.0, t / 2.0);
        let solved = eigen_subsolution(g, l, m, &quad).and_then(|sub| {
            let (_, sup) = supersolution(g, l, m, &quad, SuperCase::Auto, Some(&sub.pair))?;
            let interval = OrderInterval::new(sub.pair, sup.pair)?;
            iterate_down(g, l, m, &quad, &interval, &IterationOptions::default())
        });
        sups.push(solved.ok().filter(|r| r.converged).map(|r| r.u_sup()));
    }
    let all: Option<Vec<f64>> = sups.iter().copied().collect();
    let detail = ts
        .iter()
        .zip(&sups)
        .map(|(t, s)| format!("t {t}: {}", s.map_or("none".into(), |s| format!("{s:.4}"))))
        .collect::<Vec<_>>()
        .join(", ");
    let Some(all) = all else {
        return verdict(false, format!("maximal solution missing; {detail}"));
    };
    let increasing = all.windows(2).all(|w| w[0] < w[1]);
    let top: Vec<(f64, f64)> = ts
        .iter()
        .zip(&all)
        .filter(|(t, _)| **t >= 4.0)
        .map(|(t, s)| (t.ln(), s.ln()))
        .collect();
    let n = top.len() as f64;
    let (mx, my) = top
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let slope = top.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / top.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    verdict(
        increasing && slope > 0.5,
        format!("{detail}; slope {slope:.3}"),
    )
}

fn multiplicity_consistency() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for alpha in [10.0, 100.0, 1000.0] {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::from_json(&format!(
            r#"{{"quad": {{"builtin": "family", "k": 1.0, "alpha": {alpha}}}}}"#
        ))
        .unwrap();
        let overrides = Overrides {
            out: Some(dir.path().to_path_buf()),
            ..Overrides::default()
        };
        let session = Session::new(config, overrides).unwrap();
        let (_, status) = multiplicity::run(&session).unwrap();
        let code = Some(i32::from(status.exit_code()));
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap())
                .unwrap();
        let status = report["status"].as_str().unwrap_or("").to_string();
        let gates_reported = ["ratio_gate", "threshold_gate"]
            .iter()
            .all(|g| report["window"][g]["lhs"].is_f64() && report["window"][g]["rhs"].is_f64())
            && report["window"]["left"].is_f64()
            && report["window"]["right"].is_f64();
        let points = report["points"].as_array().cloned().unwrap_or_default();
        let certified: Vec<&serde_json::Value> =
            points.iter().filter(|p| p["certified"] == true).collect();
        let ok = if certified.is_empty() {
            status == "no-certified-witness" && code == Some(2) && gates_reported
        } else {
            certified
                .iter()
                .all(|p| p["count"].as_u64().map_or(false, |c| c >= 3))
                && status == "certified"
                && code == Some(0)
        };
        pass &= ok;
        notes.push(format!(
            "alpha {alpha}: status {status}, exit {code:?}, {} of {} points certified, window ({:.4}, {:.4})",
            certified.len(),
            points.len(),
            report["window"]["left"].as_f64().unwrap_or(f64::NAN),
            report["window"]["right"].as_f64().unwrap_or(f64::NAN),
        ));
    }
    verdict(pass, notes.join("; "))
}

fn oracle_solver_equivalence() -> Verdict {
    let quad = family();
    let g = grid();
    let a1 = a1(&quad);
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut converged = 0;
    let mut worst_match = 0.0_f64;
    let mut worst_shift = 0.0_f64;
    let mut failures = Vec::new();
    let options = ShootingOptions::default();
    for _ in 0..10 {
        let t = rng.gen_range(a1..4.0 * a1);
        let share = rng.gen_range(0.2..0.8);
        let (l, m) = (t * share, t * (1.0 - share));
        let bracket = eigen_subsolution(g, l, m, &quad).and_then(|sub| {
            let (_, sup) = supersolution(g, l, m, &quad, SuperCase::Auto, Some(&sub.pair))?;
            Ok((sub, sup))
        });
        let amplitude = bracket.as_ref().ok().map(|(_, s)| s.amplitude);
        let box_max = robin_rd::shooting::default_box_max(l, m, amplitude).max(8.0);
        let e = enumerate(l, m, &quad, box_max);
        for root in e.positive.iter().chain(&e.other) {
            match step_halving_shift(
                l,
                m,
                &quad,
                &root.candidate,
                options.refine_steps,
                options.max_newton,
            ) {
                Some(s) => {
                    worst_shift = worst_shift.max(s);
                    if s >= 1e-6 {
                        failures.push(format!("({l:.3}, {m:.3}) root shift {s:e}"));
                    }
                }
                None => failures.push(format!("({l:.3}, {m:.3}) root did not refine twice")),
            }
        }
        let Ok((sub, sup)) = bracket else { continue };
        let interval = OrderInterval::new(sub.pair, sup.pair).unwrap();
        let opts = IterationOptions::default();
        for rec in [
            iterate_up(g, l, m, &quad, &interval, &opts),
            iterate_down(g, l, m, &quad, &interval, &opts),
        ]
        .into_iter()
        .flatten()
        .filter(|r| r.converged)
        {
            converged += 1;
            match e.closest_positive(&rec.pair) {
                Some((_, d)) => {
                    worst_match = worst_match.max(d);
                    if d >= 1e-3 {
                        failures.push(format!("({l:.3}, {m:.3}) distance {d:e}"));
                    }
                }
                None => failures.push(format!("({l:.3}, {m:.3}) no oracle root")),
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{converged} converged solutions at 10 points, worst distance {worst_match:.2e}, worst step-halving shift {worst_shift:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn example_reproduction() -> Verdict {
    let q1s: Vec<Result<f64, String>> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&k| {
            example_family(k, 10.0 * k)
                .and_then(|quad| q1(&quad, k))
                .map_err(|e| format!("k {k}: {e}"))
        })
        .collect();
    let q2s: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&a| q2(&example_family(1.0, a).unwrap(), a).unwrap())
        .collect();
    let q1_values: Result<Vec<f64>, String> = q1s.iter().cloned().collect();
    let q1_ok = q1_values
        .as_ref()
        .map_or(false, |v| v.windows(2).all(|w| w[0] < w[1]));
    let q2_ok = q2s.windows(2).all(|w| w[0] > w[1]);
    let closed = 1.0 / (2.0 * 2f64.sqrt() - 2.0);
    let q1_at_1 = q1s[0].clone().unwrap_or(f64::NAN);
    let closed_ok = (q1_at_1 - closed).abs() < 1e-6;
    let h_ok = validate_h(&family(), &default_h_samples())
        .unwrap()
        .all_passed();
    verdict(
        q1_ok && q2_ok && closed_ok && h_ok,
        format!(
            "Q1 increasing {q1_ok} ({}); Q2 decreasing {q2_ok} ({q2s:.4?}); Q1(1) err {:.1e}; H1-H3 {h_ok}",
            match &q1_values {
                Ok(v) => format!("{v:.4?}"),
                Err(e) => e.clone(),
            },
            (q1_at_1 - closed).abs()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Verdict); 10] = [
        (
            1,
            "eigenvalue closed form",
            Duration::from_secs(5),
            eigenvalue_closed_form,
        ),
        (2, "rho trichotomy", Duration::from_secs(5), rho_trichotomy),
        (
            3,
            "auxiliary solutions",
            Duration::from_secs(1),
            auxiliary_solutions,
        ),
        (
            4,
            "equilibrium exactness",
            Duration::from_secs(1),
            equilibrium_exactness,
        ),
        (
            5,
            "existence at lambda = mu = 2",
            Duration::from_secs(30),
            existence_at_two_two,
        ),
        (
            6,
            "near-threshold trend",
            Duration::from_secs(60),
            near_threshold_trend,
        ),
        (7, "growth trend", Duration::from_secs(60), growth_trend),
        (
            8,
            "multiplicity consistency",
            Duration::from_secs(180),
            multiplicity_consistency,
        ),
        (
            9,
            "oracle-solver equivalence",
            Duration::from_secs(120),
            oracle_solver_equivalence,
        ),
        (
            10,
            "example reproduction",
            Duration::from_secs(5),
            example_reproduction,
        ),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(v) => (v.pass && elapsed <= budget, v.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "ACCEPTANCE {id:>2} {name}: {} [{:.1}s of {}s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {failed} failing");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
