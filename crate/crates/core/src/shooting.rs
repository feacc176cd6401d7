//! Shooting enumeration of all solutions on `(0, 1)`.
//!
//! A solution is fixed by its traces `(u0, v0)` at `x = 0`: the Robin rows
//! there force `u'(0) = c u0` and `v'(0) = c v0` with `c = sqrt(λ + μ)`.
//! Marching the first-order system to `x = 1` with RK4 leaves the two Robin
//! rows at `x = 1` as a residual map `R(u0, v0)`, and every zero of `R` is a
//! solution. The map is scanned on a square grid, refined by damped Newton,
//! and deduplicated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid1D, ScalarField};
use crate::monotone::{record_for, Origin, SolutionRecord};
use crate::nonlinearity::ReactionQuad;
use crate::subsuper::{check_parameters, PairField};

/// Integration stops once any state component exceeds this.
pub const OVERFLOW_GUARD: f64 = 1e12;
/// Refined roots have both residual components below this.
pub const ROOT_TOL: f64 = 1e-9;
/// Roots closer than this in `(u0, v0)` are merged.
pub const DEDUPE_TOL: f64 = 1e-4;
/// Traces below this count as the trivial root.
pub const TRIVIAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootState {
    pub u: f64,
    pub up: f64,
    pub v: f64,
    pub vp: f64,
}

impl ShootState {
    fn axpy(&self, k: &ShootState, a: f64) -> ShootState {
        ShootState {
            u: self.u + a * k.u,
            up: self.up + a * k.up,
            v: self.v + a * k.v,
            vp: self.vp + a * k.vp,
        }
    }

    fn is_sane(&self) -> bool {
        [self.u, self.up, self.v, self.vp]
            .iter()
            .all(|x| x.is_finite() && x.abs() <= OVERFLOW_GUARD)
    }
}

/// Boundary condition the shot starts from and is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Unknowns are the traces; slopes follow from the Robin rows.
    Robin,
    /// Unknowns are the slopes; traces vanish and `μ` is ignored.
    Dirichlet,
}

/// The first-order system with fixed parameters.
#[derive(Clone, Copy, Debug)]
pub struct Shooter<'a> {
    pub lambda: f64,
    pub mu: f64,
    pub quad: &'a ReactionQuad,
    pub boundary: Boundary,
}

impl<'a> Shooter<'a> {
    pub fn robin(lambda: f64, mu: f64, quad: &'a ReactionQuad) -> Self {
        Self {
            lambda,
            mu,
            quad,
            boundary: Boundary::Robin,
        }
    }

    pub fn dirichlet(lambda: f64, quad: &'a ReactionQuad) -> Self {
        Self {
            lambda,
            mu: 0.0,
            quad,
            boundary: Boundary::Dirichlet,
        }
    }

    fn c(&self) -> f64 {
        (self.lambda + self.mu).sqrt()
    }

    fn initial(&self, a: f64, b: f64) -> ShootState {
        match self.boundary {
            Boundary::Robin => ShootState {
                u: a,
                up: self.c() * a,
                v: b,
                vp: self.c() * b,
            },
            Boundary::Dirichlet => ShootState {
                u: 0.0,
                up: a,
                v: 0.0,
                vp: b,
            },
        }
    }

    fn end_residual(&self, s: &ShootState) -> [f64; 2] {
        match self.boundary {
            Boundary::Robin => [s.up + self.c() * s.u, s.vp + self.c() * s.v],
            Boundary::Dirichlet => [s.u, s.v],
        }
    }

    fn rhs(&self, s: &ShootState) -> ShootState {
        let q = self.quad;
        ShootState {
            u: s.up,
            up: -(self.lambda * q.f.eval(s.v) + self.mu * q.h.eval(s.u)),
            v: s.vp,
            vp: -(self.lambda * q.g.eval(s.u) + self.mu * q.q.eval(s.v)),
        }
    }

    fn rk4(&self, s: &ShootState, dx: f64) -> ShootState {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&s.axpy(&k1, 0.5 * dx));
        let k3 = self.rhs(&s.axpy(&k2, 0.5 * dx));
        let k4 = self.rhs(&s.axpy(&k3, dx));
        ShootState {
            u: s.u + dx / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            up: s.up + dx / 6.0 * (k1.up + 2.0 * k2.up + 2.0 * k3.up + k4.up),
            v: s.v + dx / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            vp: s.vp + dx / 6.0 * (k1.vp + 2.0 * k2.vp + 2.0 * k3.vp + k4.vp),
        }
    }

    /// Residual at `x = 1`, or `None` if the overflow guard tripped.
    pub fn residual(&self, a: f64, b: f64, steps: usize) -> Option<[f64; 2]> {
        let dx = 1.0 / steps as f64;
        let mut s = self.initial(a, b);
        for _ in 0..steps {
            s = self.rk4(&s, dx);
            if !s.is_sane() {
                return None;
            }
        }
        Some(self.end_residual(&s))
    }

    /// Samples the shot on every node of `grid`, using at least `min_steps` RK4 steps.
    pub fn profile(&self, a: f64, b: f64, grid: Grid1D, min_steps: usize) -> Option<PairField> {
        let cells = grid.len() - 1;
        let per_cell = min_steps.div_ceil(cells).max(1);
        let dx = 1.0 / (cells * per_cell) as f64;
        let mut s = self.initial(a, b);
        let mut u = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        u.push(s.u);
        v.push(s.v);
        for _ in 0..cells {
            for _ in 0..per_cell {
                s = self.rk4(&s, dx);
            }
            if !s.is_sane() {
                return None;
            }
            u.push(s.u);
            v.push(s.v);
        }
        let u = ScalarField::from_values(grid, u).ok()?;
        let v = ScalarField::from_values(grid, v).ok()?;
        PairField::new(u, v).ok()
    }
}

/// Robin residual `(u'(1) + c u(1), v'(1) + c v(1))` for traces `(u0, v0)`.
/// `None` marks a diverged shot.
pub fn integrate(
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    u0: f64,
    v0: f64,
    steps: usize,
) -> Option<[f64; 2]> {
    Shooter::robin(lambda, mu, quad).residual(u0, v0, steps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingOptions {
    /// RK4 steps per shot while scanning.
    pub scan_steps: usize,
    /// RK4 steps per shot during Newton refinement and re-integration.
    pub refine_steps: usize,
    pub max_newton: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            scan_steps: 1000,
            refine_steps: 4096,
            max_newton: 60,
        }
    }
}

/// A zero of the residual map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCandidate {
    pub u0: f64,
    pub v0: f64,
    pub boundary_residual: [f64; 2],
    pub refined: bool,
    pub newton_iterations: usize,
}

fn norm(r: &[f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

fn newton(
    shooter: &Shooter,
    start: (f64, f64),
    steps: usize,
    max_iter: usize,
) -> Option<RootCandidate> {
    let (mut a, mut b) = start;
    let mut r = shooter.residual(a, b, steps)?;
    for iteration in 0..=max_iter {
        if norm(&r) < ROOT_TOL {
            return Some(RootCandidate {
                u0: a,
                v0: b,
                boundary_residual: r,
                refined: true,
                newton_iterations: iteration,
            });
        }
        if iteration == max_iter {
            break;
        }
        let da = 1e-6 * a.abs().max(1.0);
        let db = 1e-6 * b.abs().max(1.0);
        let ra = shooter.residual(a + da, b, steps)?;
        let rb = shooter.residual(a, b + db, steps)?;
        let j = [
            [(ra[0] - r[0]) / da, (rb[0] - r[0]) / db],
            [(ra[1] - r[1]) / da, (rb[1] - r[1]) / db],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_a = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let step_b = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (na, nb) = (a - damping * step_a, b - damping * step_b);
            if let Some(nr) = shooter.residual(na, nb, steps) {
                if norm(&nr) < norm(&r) {
                    a = na;
                    b = nb;
                    r = nr;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(RootCandidate {
        u0: a,
        v0: b,
        boundary_residual: r,
        refined: norm(&r) < ROOT_TOL,
        newton_iterations: max_iter,
    })
}

/// Residual scan over `[0, box_max]²` with `density` cells per side.
fn scan(
    shooter: &Shooter,
    box_max: f64,
    density: usize,
    steps: usize,
) -> Vec<Vec<Option<[f64; 2]>>> {
    let h = box_max / density as f64;
    (0..=density)
        .into_par_iter()
        .map(|i| {
            (0..=density)
                .map(|j| shooter.residual(i as f64 * h, j as f64 * h, steps))
                .collect()
        })
        .collect()
}

fn seeds(values: &[Vec<Option<[f64; 2]>>], box_max: f64) -> Vec<(f64, f64)> {
    let density = values.len() - 1;
    let h = box_max / density as f64;
    let mut out = Vec::new();
    for i in 0..density {
        for j in 0..density {
            let corners = [
                values[i][j],
                values[i + 1][j],
                values[i][j + 1],
                values[i + 1][j + 1],
            ];
            if corners.iter().any(|c| c.is_none()) {
                continue;
            }
            let changes = |k: usize| {
                let pos = corners.iter().any(|c| c.unwrap()[k] >= 0.0);
                let neg = corners.iter().any(|c| c.unwrap()[k] <= 0.0);
                pos && neg
            };
            if changes(0) && changes(1) {
                out.push(((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            }
        }
    }
    // Local minima of |R| catch tangential zeros that show no sign change.
    for i in 0..=density {
        for j in 0..=density {
            let Some(center) = values[i][j].map(|r| norm(&r)) else {
                continue;
            };
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni > density as i64 || nj > density as i64 {
                        continue;
                    }
                    if let Some(r) = values[ni as usize][nj as usize] {
                        if norm(&r) < center {
                            is_min = false;
                        }
                    }
                }
            }
            if is_min {
                out.push((i as f64 * h, j as f64 * h));
            }
        }
    }
    out
}

fn dedupe(mut roots: Vec<RootCandidate>) -> Vec<RootCandidate> {
    roots.sort_by(|a, b| a.u0.total_cmp(&b.u0).then(a.v0.total_cmp(&b.v0)));
    let mut out: Vec<RootCandidate> = Vec::new();
    for r in roots {
        let dup = out
            .iter_mut()
            .find(|o| (o.u0 - r.u0).abs() < DEDUPE_TOL && (o.v0 - r.v0).abs() < DEDUPE_TOL);
        match dup {
            Some(o) => {
                if norm(&r.boundary_residual) < norm(&o.boundary_residual) {
                    *o = r;
                }
            }
            None => out.push(r),
        }
    }
    out
}

/// Scans, refines and deduplicates the zeros of a shooter's residual map.
/// Returns the refined roots, the number of seeds that did not refine, and
/// whether the box was doubled.
pub fn find_roots(
    shooter: &Shooter,
    box_max: f64,
    density: usize,
    options: &ShootingOptions,
) -> (Vec<RootCandidate>, usize, f64) {
    let mut box_max = box_max;
    for attempt in 0..2 {
        let values = scan(shooter, box_max, density, options.scan_steps);
        let seeds = seeds(&values, box_max);
        let candidates: Vec<Option<RootCandidate>> = seeds
            .par_iter()
            .map(|&s| newton(shooter, s, options.refine_steps, options.max_newton))
            .collect();
        let unrefined = candidates
            .iter()
            .filter(|c| c.map_or(true, |c| !c.refined))
            .count();
        let roots = dedupe(
            candidates
                .into_iter()
                .flatten()
                .filter(|c| c.refined)
                .collect(),
        );
        let cell = box_max / density as f64;
        let on_edge = roots.iter().any(|r| r.u0.max(r.v0) >= box_max - cell);
        if attempt == 0 && on_edge {
            box_max *= 2.0;
            continue;
        }
        return (roots, unrefined, box_max);
    }
    unreachable!()
}

/// A root of the Robin residual map together with its discrete record.
#[derive(Clone, Debug)]
pub struct EnumeratedRoot {
    pub candidate: RootCandidate,
    pub record: SolutionRecord,
    pub positive: bool,
}

/// Every solution found in the box, split into trivial, positive and other.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub lambda: f64,
    pub mu: f64,
    pub box_max: f64,
    pub scan_density: usize,
    pub trivial: Option<EnumeratedRoot>,
    pub positive: Vec<EnumeratedRoot>,
    pub other: Vec<EnumeratedRoot>,
    pub unrefined_seeds: usize,
}

impl Enumeration {
    pub fn count_positive(&self) -> usize {
        self.positive.len()
    }

    /// Positive root closest to `pair` in sup-norm, with the distance.
    pub fn closest_positive(&self, pair: &PairField) -> Option<(&EnumeratedRoot, f64)> {
        self.positive
            .iter()
            .filter_map(|r| r.record.pair.distance(pair).ok().map(|d| (r, d)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Lists all solutions with traces in `[0, box_max]²`.
pub fn enumerate_solutions(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    box_max: f64,
    scan_density: usize,
    options: &ShootingOptions,
) -> Result<Enumeration> {
    check_parameters(lambda, mu)?;
    if !(box_max > 0.0) || scan_density < 64 || options.scan_steps < 1000 {
        return Err(crate::error::Error::InvalidInput(format!(
            "need box_max > 0, scan_density >= 64, scan_steps >= 1000 (got {box_max}, {scan_density}, {})",
            options.scan_steps
        )));
    }
    let shooter = Shooter::robin(lambda, mu, quad);
    let (roots, unrefined, box_used) = find_roots(&shooter, box_max, scan_density, options);
    let mut out = Enumeration {
        lambda,
        mu,
        box_max: box_used,
        scan_density,
        trivial: None,
        positive: Vec::new(),
        other: Vec::new(),
        unrefined_seeds: unrefined,
    };
    for candidate in roots {
        let Some(pair) = shooter.profile(candidate.u0, candidate.v0, grid, options.refine_steps)
        else {
            continue;
        };
        let record = record_for(
            grid,
            lambda,
            mu,
            quad,
            pair,
            Origin::Shooting,
            candidate.newton_iterations,
            1e-4,
        )?;
        let trivial = candidate.u0.abs() < TRIVIAL_TOL && candidate.v0.abs() < TRIVIAL_TOL;
        let positive = !trivial && record.pair.min() > 0.0;
        let root = EnumeratedRoot {
            candidate,
            record,
            positive,
        };
        if trivial {
            out.trivial = Some(root);
        } else if positive {
            out.positive.push(root);
        } else {
            out.other.push(root);
        }
    }
    if out.trivial.is_none() {
        // (0, 0) is always a root; the scan may merge it with nothing to refine.
        let candidate = RootCandidate {
            u0: 0.0,
            v0: 0.0,
            boundary_residual: [0.0, 0.0],
            refined: true,
            newton_iterations: 0,
        };
        let record = record_for(
            grid,
            lambda,
            mu,
            quad,
            PairField::zeros(grid),
            Origin::Shooting,
            0,
            1e-4,
        )?;
        out.trivial = Some(EnumeratedRoot {
            candidate,
            record,
            positive: false,
        });
    }
    Ok(out)
}

/// Number of strictly positive solutions found.
pub fn count_positive_solutions(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    box_max: f64,
    scan_density: usize,
    options: &ShootingOptions,
) -> Result<usize> {
    Ok(
        enumerate_solutions(grid, lambda, mu, quad, box_max, scan_density, options)?
            .count_positive(),
    )
}

/// Scan box `4 (λ+μ) A` from a supersolution amplitude `A`, or 8 without one.
pub fn default_box_max(lambda: f64, mu: f64, super_amplitude: Option<f64>) -> f64 {
    match super_amplitude {
        Some(a) if a.is_finite() && a > 0.0 => 4.0 * (lambda + mu) * a,
        _ => 8.0,
    }
}

/// Shift of a refined root when the RK4 step is halved.
pub fn step_halving_shift(
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    root: &RootCandidate,
    steps: usize,
    max_newton: usize,
) -> Option<f64> {
    let shooter = Shooter::robin(lambda, mu, quad);
    let coarse = newton(&shooter, (root.u0, root.v0), steps, max_newton)?;
    let fine = newton(&shooter, (coarse.u0, coarse.v0), 2 * steps, max_newton)?;
    if !(coarse.refined && fine.refined) {
        return None;
    }
    Some((coarse.u0 - fine.u0).abs().max((coarse.v0 - fine.v0).abs()))
}

/// Positive solutions of the Dirichlet system `-u'' = λ f(v)`, `-v'' = λ g(u)`
/// with initial slopes in `[0, slope_max]²`, sampled on `grid`.
pub fn dirichlet_roots(
    grid: Grid1D,
    lambda: f64,
    quad: &ReactionQuad,
    slope_max: f64,
    options: &ShootingOptions,
) -> Result<Vec<((f64, f64), PairField)>> {
    check_parameters(lambda, 0.0)?;
    let shooter = Shooter::dirichlet(lambda, quad);
    let (roots, _, _) = find_roots(&shooter, slope_max, 128, options);
    let mut out = Vec::new();
    for r in roots {
        if r.u0 <= TRIVIAL_TOL || r.v0 <= TRIVIAL_TOL {
            continue;
        }
        if let Some(mut pair) = shooter.profile(r.u0, r.v0, grid, options.refine_steps) {
            let last = grid.len() - 1;
            let interior_positive = (1..last).all(|i| pair.u.get(i) > 0.0 && pair.v.get(i) > 0.0);
            if !interior_positive {
                continue;
            }
            // The shot lands within ROOT_TOL of zero; pin the traces exactly.
            let mut u = pair.u.clone().into_values();
            let mut v = pair.v.clone().into_values();
            u[last] = 0.0;
            v[last] = 0.0;
            pair = PairField::new(
                ScalarField::from_values(grid, u)?,
                ScalarField::from_values(grid, v)?,
            )?;
            out.push(((r.u0, r.v0), pair));
        }
    }
    Ok(out)
}
