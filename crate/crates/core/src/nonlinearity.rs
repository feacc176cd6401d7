//! Reaction terms, the built-in example family, hypothesis evidence and the
//! threshold quantities that locate the multiplicity window.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A scalar reaction term `s ↦ F(s)` on `[0, ∞)`.
///
/// Negative arguments are answered by the linear extension `F'(0) s`; only the
/// shooting integrator ever leaves the positive half-line.
#[derive(Clone)]
pub struct Nonlinearity {
    label: String,
    func: Arc<ScalarFn>,
    deriv0: f64,
}

impl Nonlinearity {
    /// Step for finite-difference derivatives.
    pub const DERIV_STEP: f64 = 1e-6;

    pub fn new(
        label: impl Into<String>,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let d = Self::DERIV_STEP;
        // Centered difference about s = d, so only nonnegative arguments are touched.
        let deriv0 = (func(2.0 * d) - func(0.0)) / (2.0 * d);
        Self {
            label: label.into(),
            func: Arc::new(func),
            deriv0,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn deriv0(&self) -> f64 {
        self.deriv0
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 {
            self.deriv0 * s
        } else {
            (self.func)(s)
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let d = Self::DERIV_STEP * s.abs().max(1.0);
        (self.eval(s + d) - self.eval(s - d)) / (2.0 * d)
    }

    /// `(F(s+δ) − 2F(s) + F(s−δ)) / δ²` together with a bound on its rounding error.
    pub fn second_difference(&self, s: f64, step: f64) -> (f64, f64) {
        let (a, b, c) = (self.eval(s - step), self.eval(s), self.eval(s + step));
        let value = (a - 2.0 * b + c) / (step * step);
        let noise = 8.0 * f64::EPSILON * (a.abs() + 2.0 * b.abs() + c.abs()) / (step * step);
        (value, noise)
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("label", &self.label)
            .field("deriv0", &self.deriv0)
            .finish()
    }
}

/// The four reaction terms: `-u'' = λ f(v) + μ h(u)`, `-v'' = λ g(u) + μ q(v)`.
#[derive(Clone, Debug)]
pub struct ReactionQuad {
    pub f: Nonlinearity,
    pub g: Nonlinearity,
    pub h: Nonlinearity,
    pub q: Nonlinearity,
}

impl ReactionQuad {
    pub fn new(f: Nonlinearity, g: Nonlinearity, h: Nonlinearity, q: Nonlinearity) -> Self {
        Self { f, g, h, q }
    }

    /// `f(v) = v`, `g(u) = u`, `h = q = 0`: the linear coupling whose
    /// threshold is exactly `K₁(1)`.
    pub fn linear() -> Self {
        Self::new(
            Nonlinearity::new("f", |s| s),
            Nonlinearity::new("g", |s| s),
            Nonlinearity::new("h", |_| 0.0),
            Nonlinearity::new("q", |_| 0.0),
        )
    }

    pub fn members(&self) -> [&Nonlinearity; 4] {
        [&self.f, &self.g, &self.h, &self.q]
    }

    /// Fails unless `f'(0) >= g'(0)`, the ordering assumed when the roles of
    /// `u` and `v` are fixed. The comparison allows for the difference error
    /// of [`Nonlinearity::deriv0`].
    pub fn check_normalization(&self) -> Result<()> {
        let (f0, g0) = (self.f.deriv0(), self.g.deriv0());
        if f0 < g0 - 1e-5 * g0.abs().max(1.0) {
            return Err(Error::HypothesisViolation(format!(
                "f'(0) = {} is smaller than g'(0) = {}; swap the roles of u and v",
                self.f.deriv0(),
                self.g.deriv0()
            )));
        }
        Ok(())
    }
}

/// Built-in example family with splice point `k` and tail parameter `alpha`.
///
/// Below `k` the terms are `e^{s/(s+1)} − 1`, `2√(1+s) − 2`,
/// `e^{2s/(s+1)} − s − 1` and `3∛(1+s) − 3`. Above `k`, `f` and `h` follow
/// `e^{αs/(α+s)}` and `g`, `q` follow `(1+s)²/2` and `(1+s)³/3`, each shifted
/// to meet its left branch at `k`.
pub fn example_family(k: f64, alpha: f64) -> Result<ReactionQuad> {
    if !(k.is_finite() && alpha.is_finite() && k > 0.0 && alpha > k) {
        return Err(Error::ParameterOrder { k, alpha });
    }
    let f_left = |s: f64| (s / (s + 1.0)).exp() - 1.0;
    let h_left = |s: f64| (2.0 * s / (s + 1.0)).exp() - s - 1.0;
    let g_left = |s: f64| 2.0 * (1.0 + s).sqrt() - 2.0;
    let q_left = |s: f64| 3.0 * (1.0 + s).cbrt() - 3.0;
    let tail_exp = move |s: f64| (alpha * s / (alpha + s)).exp();

    let (fk, hk, gk, qk) = (f_left(k), h_left(k), g_left(k), q_left(k));
    let ek = tail_exp(k);
    let f = move |s: f64| {
        if s <= k {
            f_left(s)
        } else {
            tail_exp(s) - ek + fk
        }
    };
    let h = move |s: f64| {
        if s <= k {
            h_left(s)
        } else {
            tail_exp(s) - ek + hk
        }
    };
    let g = move |s: f64| {
        if s <= k {
            g_left(s)
        } else {
            0.5 * (1.0 + s).powi(2) - 0.5 * (1.0 + k).powi(2) + gk
        }
    };
    let q = move |s: f64| {
        if s <= k {
            q_left(s)
        } else {
            (1.0 + s).powi(3) / 3.0 - (1.0 + k).powi(3) / 3.0 + qk
        }
    };
    Ok(ReactionQuad::new(
        Nonlinearity::new("f", f),
        Nonlinearity::new("g", g),
        Nonlinearity::new("h", h),
        Nonlinearity::new("q", q),
    ))
}

/// One term of a user-defined reaction function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Constant {
        value: f64,
    },
    /// `coeff · (s + shift)^exponent`
    Power {
        coeff: f64,
        exponent: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `coeff · exp(rate · (s + shift))`
    Exp {
        coeff: f64,
        rate: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `coeff · exp(scale · s / (offset + s))`
    ExpRatio {
        coeff: f64,
        scale: f64,
        offset: f64,
    },
}

impl Term {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Term::Constant { value } => value,
            Term::Power {
                coeff,
                exponent,
                shift,
            } => coeff * (s + shift).powf(exponent),
            Term::Exp { coeff, rate, shift } => coeff * (rate * (s + shift)).exp(),
            Term::ExpRatio {
                coeff,
                scale,
                offset,
            } => coeff * (scale * s / (offset + s)).exp(),
        }
    }
}

/// Terms summed on `[from, next piece)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub from: f64,
    pub terms: Vec<Term>,
}

/// A reaction function as a single term list or as pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Pieces(Vec<Piece>),
    Terms(Vec<Term>),
}

impl FunctionSpec {
    fn into_pieces(self) -> Vec<Piece> {
        match self {
            FunctionSpec::Pieces(p) => p,
            FunctionSpec::Terms(terms) => vec![Piece { from: 0.0, terms }],
        }
    }

    pub fn build(self, label: &str) -> Result<Nonlinearity> {
        let pieces = self.into_pieces();
        if pieces.is_empty() || pieces[0].from != 0.0 {
            return Err(Error::InvalidInput(format!(
                "{label}: the first piece must start at 0"
            )));
        }
        if pieces.windows(2).any(|w| !(w[0].from < w[1].from)) {
            return Err(Error::InvalidInput(format!(
                "{label}: piece starts must be strictly increasing"
            )));
        }
        Ok(Nonlinearity::new(label, move |s| {
            let idx = pieces.partition_point(|p| p.from <= s).saturating_sub(1);
            pieces[idx].terms.iter().map(|t| t.eval(s)).sum()
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinQuad {
    #[serde(rename = "family", alias = "example", alias = "section5")]
    ExampleFamily,
}

/// Quadruple definition file: a built-in family or four term lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadSpec {
    Builtin {
        builtin: BuiltinQuad,
        k: f64,
        alpha: f64,
    },
    Terms {
        f: FunctionSpec,
        g: FunctionSpec,
        h: FunctionSpec,
        q: FunctionSpec,
    },
}

impl QuadSpec {
    pub fn example(k: f64, alpha: f64) -> Self {
        QuadSpec::Builtin {
            builtin: BuiltinQuad::ExampleFamily,
            k,
            alpha,
        }
    }

    pub fn build(&self) -> Result<ReactionQuad> {
        match self.clone() {
            QuadSpec::Builtin { k, alpha, .. } => example_family(k, alpha),
            QuadSpec::Terms { f, g, h, q } => Ok(ReactionQuad::new(
                f.build("f")?,
                g.build("g")?,
                h.build("h")?,
                q.build("q")?,
            )),
        }
    }

    /// The `(k, alpha)` pair of the built-in family, if this is one.
    pub fn family_parameters(&self) -> Option<(f64, f64)> {
        match self {
            QuadSpec::Builtin { k, alpha, .. } => Some((*k, *alpha)),
            QuadSpec::Terms { .. } => None,
        }
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self::example(1.0, 10.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    F1,
    F2,
    F3,
}

/// Where a check failed and by how much.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub function: String,
    pub at: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub witness: Option<Witness>,
    pub note: String,
}

impl CheckOutcome {
    fn from_witness(witness: Option<Witness>, note: impl Into<String>) -> Self {
        Self {
            passed: witness.is_none(),
            witness,
            note: note.into(),
        }
    }
}

/// Sampled evidence for the hypotheses. A failed check always has a witness.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: BTreeMap<Hypothesis, CheckOutcome>,
    pub samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    /// Boundedness evidence per function label, when F1 was examined.
    pub bounded: BTreeMap<String, bool>,
}

impl HypothesisReport {
    pub fn passed(&self, h: Hypothesis) -> Option<bool> {
        self.checks.get(&h).map(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|c| c.passed)
    }
}

/// `n` log-spaced points from `lo` to `hi`, endpoints included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Default ladder for the H-checks: 0 followed by 401 points from 1e-3 to 1e4.
pub fn default_h_samples() -> Vec<f64> {
    std::iter::once(0.0)
        .chain(logspace(1e-3, 1e4, 401))
        .collect()
}

/// Default ladder for the F-checks, long enough for bounded tails to flatten.
pub fn default_f_samples() -> Vec<f64> {
    logspace(1e-2, 1e7, 361)
}

pub const H2_SCALES: [f64; 3] = [1.0, 10.0, 100.0];
pub const H2_POINTS: [f64; 3] = [1e2, 1e3, 1e4];
pub const H2_DEFAULT_THRESHOLD: f64 = 0.1;

/// Evidence for H1–H3 with the default H2 threshold.
pub fn validate_h(quad: &ReactionQuad, samples: &[f64]) -> Result<HypothesisReport> {
    validate_h_with(quad, samples, H2_DEFAULT_THRESHOLD)
}

/// Evidence for H1–H3.
///
/// H2 passes when, for every scale `M`, `f(M g(s))/s` strictly decreases over
/// the three probe points and the last value is at most `threshold` times the
/// first.
pub fn validate_h_with(
    quad: &ReactionQuad,
    samples: &[f64],
    threshold: f64,
) -> Result<HypothesisReport> {
    check_samples(samples)?;
    if samples[0] > 0.0 || *samples.last().unwrap() < 1e3 {
        return Err(Error::InvalidInput(
            "H-samples must start at 0 and reach at least 1e3".into(),
        ));
    }
    let mut report = HypothesisReport {
        samples: samples.len(),
        s_min: samples[0],
        s_max: *samples.last().unwrap(),
        ..Default::default()
    };

    let mut worst: Option<Witness> = None;
    for func in quad.members() {
        let at_zero = func.eval(0.0);
        if at_zero != 0.0 {
            keep_worst(&mut worst, func.label(), 0.0, at_zero.abs());
        }
        let values: Vec<f64> = samples.iter().map(|&s| func.eval(s)).collect();
        for i in 1..values.len() {
            let drop = values[i - 1] - values[i];
            if drop > 1e-12 * values[i - 1].abs().max(1.0) || !values[i].is_finite() {
                keep_worst(&mut worst, func.label(), samples[i], drop);
            }
        }
    }
    report.checks.insert(
        Hypothesis::H1,
        CheckOutcome::from_witness(worst, "zero at the origin and nondecreasing on the samples"),
    );

    let mut witness = None;
    let mut tail = 0.0_f64;
    for m in H2_SCALES {
        let ratios: Vec<f64> = H2_POINTS
            .iter()
            .map(|&s| quad.f.eval(m * quad.g.eval(s)) / s)
            .collect();
        tail = tail.max(ratios[2]);
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        if !decreasing || !(ratios[2] <= threshold * ratios[0]) {
            witness = Some(Witness {
                function: format!("f(M g(s))/s, M = {m}"),
                at: H2_POINTS[2],
                magnitude: ratios[2],
            });
            break;
        }
    }
    report.checks.insert(
        Hypothesis::H2,
        CheckOutcome::from_witness(
            witness,
            format!("largest ratio at s = 1e4 is {tail:.4e}; relative threshold {threshold}"),
        ),
    );

    let mut worst = None;
    for func in quad.members() {
        if !(func.deriv0() > 0.0) {
            keep_worst(&mut worst, func.label(), 0.0, func.deriv0());
        }
    }
    report.checks.insert(
        Hypothesis::H3,
        CheckOutcome::from_witness(worst, "positive derivative at 0"),
    );
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FCase {
    F1,
    F2,
    F3,
}

impl FCase {
    fn hypothesis(self) -> Hypothesis {
        match self {
            FCase::F1 => Hypothesis::F1,
            FCase::F2 => Hypothesis::F2,
            FCase::F3 => Hypothesis::F3,
        }
    }
}

/// Sup bound a function must stay under to count as bounded.
pub const F1_BOUND: f64 = 1e9;
/// Largest relative growth allowed over the last sampled decade.
pub const F1_FLAT_TOL: f64 = 1e-3;

/// Boundedness evidence: below [`F1_BOUND`] and flat over the last decade.
pub fn looks_bounded(func: &Nonlinearity, samples: &[f64]) -> Option<Witness> {
    let s_max = *samples.last()?;
    let sup = samples.iter().map(|&s| func.eval(s)).fold(0.0, f64::max);
    if !(sup <= F1_BOUND) {
        return Some(Witness {
            function: func.label().into(),
            at: s_max,
            magnitude: sup,
        });
    }
    let top = func.eval(s_max);
    let decade = func.eval(s_max / 10.0);
    let growth = (top - decade) / top.abs().max(f64::MIN_POSITIVE);
    (growth >= F1_FLAT_TOL).then(|| Witness {
        function: func.label().into(),
        at: s_max,
        magnitude: growth,
    })
}

/// Evidence for one of F1–F3. `gamma` and `beta` are ignored for F1.
pub fn validate_f(
    quad: &ReactionQuad,
    case: FCase,
    gamma: f64,
    beta: f64,
    samples: &[f64],
) -> Result<HypothesisReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample range".into()));
    }
    check_samples(samples)?;
    let mut report = HypothesisReport {
        samples: samples.len(),
        s_min: samples[0],
        s_max: *samples.last().unwrap(),
        ..Default::default()
    };
    for func in quad.members() {
        report
            .bounded
            .insert(func.label().into(), looks_bounded(func, samples).is_none());
    }

    let outcome = match case {
        FCase::F1 => {
            let witness = quad
                .members()
                .into_iter()
                .find_map(|f| looks_bounded(f, samples));
            let unbounded: Vec<&str> = report
                .bounded
                .iter()
                .filter(|(_, b)| !**b)
                .map(|(l, _)| l.as_str())
                .collect();
            let note = if unbounded.is_empty() {
                "all four bounded".to_string()
            } else if report.bounded.get("f") == Some(&true) {
                format!(
                    "{} unbounded: F1 not applicable, f bounded so H2 governs",
                    unbounded.join(", ")
                )
            } else {
                format!("{} unbounded: F1 not applicable", unbounded.join(", "))
            };
            CheckOutcome::from_witness(witness, note)
        }
        FCase::F2 | FCase::F3 => {
            if !(gamma > 0.0 && beta > 0.0 && gamma * beta < 1.0) {
                CheckOutcome::from_witness(
                    Some(Witness {
                        function: "gamma*beta".into(),
                        at: gamma,
                        magnitude: gamma * beta,
                    }),
                    "requires gamma, beta > 0 with gamma*beta < 1",
                )
            } else {
                // F2: h sublinear, g ≤ s^γ, q ≤ s^β, g' > 0 at infinity; F3 mirrors it.
                let (sub, pg, pq, slope) = match case {
                    FCase::F2 => (&quad.h, &quad.g, &quad.q, &quad.g),
                    _ => (&quad.q, &quad.f, &quad.h, &quad.f),
                };
                let witness = sublinear_witness(sub, samples)
                    .or_else(|| power_bound_witness(pg, gamma, samples))
                    .or_else(|| power_bound_witness(pq, beta, samples))
                    .or_else(|| slope_witness(slope, samples));
                CheckOutcome::from_witness(
                    witness,
                    format!(
                        "gamma = {gamma}, beta = {beta}, gamma*beta = {}",
                        gamma * beta
                    ),
                )
            }
        }
    };
    report.checks.insert(case.hypothesis(), outcome);
    Ok(report)
}

fn tail_samples(samples: &[f64]) -> &[f64] {
    let s_max = *samples.last().unwrap();
    let start = samples.partition_point(|&s| s < (s_max * 1e-3).max(1.0));
    &samples[start.min(samples.len() - 1)..]
}

fn sublinear_witness(func: &Nonlinearity, samples: &[f64]) -> Option<Witness> {
    let tail: Vec<f64> = samples.iter().copied().filter(|&s| s >= 1.0).collect();
    let first = tail.first()?;
    let ratios: Vec<f64> = tail.iter().map(|&s| func.eval(s) / s).collect();
    let last = *ratios.last().unwrap();
    let growing = ratios.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-12));
    if let Some(i) = growing {
        return Some(Witness {
            function: format!("{}(s)/s", func.label()),
            at: tail[i + 1],
            magnitude: ratios[i + 1],
        });
    }
    (last > 0.1 * ratios[0] && last > 1e-12).then(|| Witness {
        function: format!("{}(s)/s", func.label()),
        at: *first,
        magnitude: last,
    })
}

fn power_bound_witness(func: &Nonlinearity, exponent: f64, samples: &[f64]) -> Option<Witness> {
    tail_samples(samples).iter().find_map(|&s| {
        let excess = func.eval(s) - s.powf(exponent);
        (excess > 0.0).then(|| Witness {
            function: format!("{}(s) - s^{exponent}", func.label()),
            at: s,
            magnitude: excess,
        })
    })
}

fn slope_witness(func: &Nonlinearity, samples: &[f64]) -> Option<Witness> {
    let n = samples.len();
    samples[n.saturating_sub(3)..].iter().find_map(|&s| {
        let slope = func.derivative(s);
        (!(slope > 1e-8)).then(|| Witness {
            function: format!("{}'", func.label()),
            at: s,
            magnitude: slope,
        })
    })
}

fn keep_worst(worst: &mut Option<Witness>, label: &str, at: f64, magnitude: f64) {
    let replace = match worst {
        None => true,
        Some(w) => magnitude.abs() > w.magnitude.abs() || magnitude.is_nan(),
    };
    if replace {
        *worst = Some(Witness {
            function: label.into(),
            at,
            magnitude,
        });
    }
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidInput(
            "samples must be finite and nonnegative".into(),
        ));
    }
    if samples.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "samples must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn ratios(quad: &ReactionQuad, x: f64) -> Result<[f64; 4]> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "argument must be positive, got {x}"
        )));
    }
    let mut out = [0.0; 4];
    for (slot, func) in out.iter_mut().zip(quad.members()) {
        let value = func.eval(x);
        if !(value > 0.0) {
            return Err(Error::DegenerateArgument {
                label: func.label().into(),
                at: x,
                value,
            });
        }
        *slot = x / value;
    }
    Ok(out)
}

/// `Q₁(a) = min(a/f(a), a/g(a), a/h(a), a/q(a))`.
pub fn q1(quad: &ReactionQuad, a: f64) -> Result<f64> {
    Ok(ratios(quad, a)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `Q₂(b) = max(b/f(b), b/g(b), b/h(b), b/q(b))`.
pub fn q2(quad: &ReactionQuad, b: f64) -> Result<f64> {
    Ok(ratios(quad, b)?.into_iter().fold(0.0, f64::max))
}

/// How the domain constant `C₁` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C1Interpretation {
    /// `inf over ε in (0, R) of N R^(N−1) / (ε^N (R − ε))`.
    #[default]
    InfRatio,
    Fixed(f64),
}

impl C1Interpretation {
    pub fn value(&self, dim: u32, radius: f64) -> f64 {
        match *self {
            C1Interpretation::InfRatio => c1(dim, radius),
            C1Interpretation::Fixed(v) => v,
        }
    }
}

/// Inscribed radius of the unit interval.
pub const INTERVAL_RADIUS: f64 = 0.5;

/// `C₁` under the default reading, minimized by golden-section search.
pub fn c1(dim: u32, radius: f64) -> f64 {
    let n = dim.max(1) as f64;
    let objective = |e: f64| n * radius.powf(n - 1.0) / (e.powf(n) * (radius - e));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, radius);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > 1e-10 * radius {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        }
    }
    objective(0.5 * (lo + hi))
}

/// A strict inequality `lhs > rhs` with both sides recorded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Gate {
    fn strict(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs > rhs,
        }
    }
}

/// The three-solution parameter window and the two conditions that open it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityWindow {
    pub a: f64,
    pub b: f64,
    pub q1: f64,
    pub q2: f64,
    pub a1: f64,
    pub xi_sup: f64,
    pub c1: f64,
    pub left: f64,
    pub right: f64,
    /// `Q₁(a)/Q₂(b) > 2 C₁ ‖ξ‖∞`
    pub ratio_gate: Gate,
    /// `Q₁(a) > 2 max(A₁, 1) ‖ξ‖∞`
    pub threshold_gate: Gate,
}

impl MultiplicityWindow {
    pub fn interval(&self) -> Option<(f64, f64)> {
        (self.left < self.right).then_some((self.left, self.right))
    }

    pub fn is_empty(&self) -> bool {
        self.interval().is_none()
    }
}

/// `(max(A₁, C₁ Q₂(b), 1), Q₁(a) / (2 ‖ξ‖∞))` with its gate conditions.
pub fn multiplicity_window(
    quad: &ReactionQuad,
    a: f64,
    b: f64,
    a1: f64,
    xi_sup: f64,
    c1: f64,
) -> Result<MultiplicityWindow> {
    if !(a < b) {
        return Err(Error::InvalidInput(format!(
            "need a < b, got a = {a}, b = {b}"
        )));
    }
    let q1 = q1(quad, a)?;
    let q2 = q2(quad, b)?;
    Ok(MultiplicityWindow {
        a,
        b,
        q1,
        q2,
        a1,
        xi_sup,
        c1,
        left: a1.max(c1 * q2).max(1.0),
        right: q1 / (2.0 * xi_sup),
        ratio_gate: Gate::strict(q1 / q2, 2.0 * c1 * xi_sup),
        threshold_gate: Gate::strict(q1, 2.0 * a1.max(1.0) * xi_sup),
    })
}

pub const CONCAVITY_LADDER: usize = 256;
pub const CONCAVITY_STEP: f64 = 1e-4;
pub const CONCAVITY_FLOOR: f64 = 1e-8;

/// Uniform concavity constant `M` with `F'' <= −M` on `(0, r)` for all four terms,
/// estimated from second differences on a 256-point ladder over `(0, 0.9 r)`.
pub fn concavity_bound_m(quad: &ReactionQuad, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!("r must be positive, got {r}")));
    }
    let top = 0.9 * r;
    let mut sup = f64::NEG_INFINITY;
    for i in 1..=CONCAVITY_LADDER {
        let s = top * i as f64 / CONCAVITY_LADDER as f64;
        for func in quad.members() {
            let (d2, noise) = func.second_difference(s, CONCAVITY_STEP.min(0.5 * s));
            if d2 >= -noise {
                return Err(Error::ConcavityViolation {
                    label: func.label().into(),
                    at: s,
                    second_difference: d2,
                });
            }
            sup = sup.max(d2);
        }
    }
    Ok((-sup).max(CONCAVITY_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> ReactionQuad {
        example_family(1.0, 10.0).unwrap()
    }

    #[test]
    fn builtin_family_tags() {
        for tag in ["family", "example", "section5"] {
            let json = format!(r#"{{"builtin": "{tag}", "k": 1.0, "alpha": 10.0}}"#);
            let spec: QuadSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(spec.family_parameters(), Some((1.0, 10.0)));
        }
        let out = serde_json::to_string(&QuadSpec::example(1.0, 10.0)).unwrap();
        assert!(out.contains(r#""builtin":"family""#), "{out}");
    }

    #[test]
    fn family_values_at_one() {
        let quad = family();
        let e = std::f64::consts::E;
        assert!((quad.f.eval(1.0) - (e.sqrt() - 1.0)).abs() < 1e-15);
        assert!((quad.g.eval(1.0) - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-15);
        assert!((quad.h.eval(1.0) - (e - 2.0)).abs() < 1e-15);
        assert!((quad.q.eval(1.0) - (3.0 * 2f64.cbrt() - 3.0)).abs() < 1e-15);
        assert!((quad.f.eval(1.0) - 0.64872).abs() < 1e-5);
        assert!((quad.q.eval(1.0) - 0.77976).abs() < 1e-5);
        for func in quad.members() {
            assert_eq!(func.eval(0.0), 0.0);
            assert!((func.deriv0() - 1.0).abs() < 1e-5, "{}", func.label());
        }
    }

    #[test]
    fn family_rejects_misordered_parameters() {
        assert!(matches!(
            example_family(2.0, 2.0),
            Err(Error::ParameterOrder { .. })
        ));
        assert!(example_family(0.0, 1.0).is_err());
    }

    #[test]
    fn family_is_continuous_at_the_splice() {
        for k in [0.5, 1.0, 3.0] {
            for alpha in [k + 1.0, 10.0 * k, 100.0] {
                let quad = example_family(k, alpha).unwrap();
                for func in quad.members() {
                    let gap = (func.eval(k) - func.eval(k * (1.0 + 1e-14))).abs();
                    assert!(gap < 1e-11, "{} k={k} alpha={alpha}: {gap}", func.label());
                }
            }
        }
    }

    #[test]
    fn linear_extension_below_zero() {
        let quad = family();
        assert!((quad.g.eval(-0.5) + 0.5 * quad.g.deriv0()).abs() < 1e-15);
    }

    #[test]
    fn h_checks_on_family_and_counterexamples() {
        let report = validate_h(&family(), &default_h_samples()).unwrap();
        assert!(report.all_passed(), "{report:?}");

        let mut linear = ReactionQuad::linear();
        linear.h = Nonlinearity::new("h", |s| s);
        linear.q = Nonlinearity::new("q", |s| s);
        let report = validate_h(&linear, &default_h_samples()).unwrap();
        assert_eq!(report.passed(Hypothesis::H2), Some(false));
        assert!(report.checks[&Hypothesis::H2].witness.is_some());

        let mut decreasing = family();
        decreasing.f = Nonlinearity::new("f", |s| -s);
        let report = validate_h(&decreasing, &default_h_samples()).unwrap();
        let h1 = &report.checks[&Hypothesis::H1];
        assert!(!h1.passed);
        let w = h1.witness.as_ref().unwrap();
        assert_eq!(w.function, "f");
        assert!(w.at > 0.0);
    }

    #[test]
    fn h_samples_must_reach_far() {
        assert!(validate_h(&family(), &[0.0, 1.0, 10.0]).is_err());
        assert!(validate_h(&family(), &[0.0, 2.0, 1.0, 1e4]).is_err());
    }

    #[test]
    fn f1_on_family_marks_g_and_q() {
        let report = validate_f(&family(), FCase::F1, 0.0, 0.0, &default_f_samples()).unwrap();
        assert_eq!(report.passed(Hypothesis::F1), Some(false));
        assert_eq!(report.bounded["f"], true);
        assert_eq!(report.bounded["h"], true);
        assert_eq!(report.bounded["g"], false);
        assert_eq!(report.bounded["q"], false);
        assert!(report.checks[&Hypothesis::F1].note.contains("H2 governs"));
    }

    #[test]
    fn f2_power_tails() {
        let quad = ReactionQuad::new(
            Nonlinearity::new("f", |s: f64| 1.0 - (-s).exp()),
            Nonlinearity::new("g", |s: f64| s.sqrt()),
            Nonlinearity::new("h", |s: f64| s.sqrt()),
            Nonlinearity::new("q", |s: f64| s.sqrt()),
        );
        let samples = default_f_samples();
        let report = validate_f(&quad, FCase::F2, 0.6, 0.6, &samples).unwrap();
        assert!(report.all_passed(), "{report:?}");
        let report = validate_f(&quad, FCase::F2, 2.0, 1.0, &samples).unwrap();
        assert_eq!(report.passed(Hypothesis::F2), Some(false));
        assert!(report.checks[&Hypothesis::F2].witness.is_some());
        assert!(validate_f(&quad, FCase::F2, 0.5, 0.5, &[]).is_err());
    }

    #[test]
    fn q_ratios() {
        let quad = family();
        let exact = 1.0 / (2.0 * 2f64.sqrt() - 2.0);
        assert!((q1(&quad, 1.0).unwrap() - exact).abs() < 1e-12);
        assert!((q1(&quad, 1e-4).unwrap() - 1.0).abs() < 1e-3);
        for x in [0.1, 1.0, 5.0] {
            assert!(q2(&quad, x).unwrap() >= q1(&quad, x).unwrap());
        }
        let wide = example_family(10.0, 100.0).unwrap();
        assert!(matches!(
            q1(&wide, 10.0),
            Err(Error::DegenerateArgument { .. })
        ));
    }

    #[test]
    fn c1_closed_forms() {
        assert!((c1(1, 0.5) - 16.0).abs() < 1e-8);
        assert!((c1(1, 1.0) - 4.0).abs() < 1e-8);
        let ladder: Vec<f64> = [0.25, 0.5, 1.0, 2.0].iter().map(|&r| c1(2, r)).collect();
        assert!(ladder.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(C1Interpretation::Fixed(3.0).value(1, 0.5), 3.0);
    }

    #[test]
    fn window_gates() {
        let quad = family();
        let xi = 0.625;
        let q1v = q1(&quad, 1.0).unwrap();
        // Pick A₁ so that the threshold gate sits exactly on its boundary.
        let a1 = q1v / (2.0 * xi);
        let w = multiplicity_window(&quad, 1.0, 10.0, a1, xi, 16.0).unwrap();
        assert!(!w.threshold_gate.holds);
        assert!(w.is_empty());
        assert!(multiplicity_window(&quad, 2.0, 1.0, 2.0, xi, 16.0).is_err());
    }

    #[test]
    fn concavity_constant() {
        let m = concavity_bound_m(&family(), 1.0).unwrap();
        assert!(m > 0.0);
        let f_only = Nonlinearity::new("f", |s: f64| (s / (s + 1.0)).exp() - 1.0);
        let quad = ReactionQuad::new(f_only.clone(), f_only.clone(), f_only.clone(), f_only);
        let m = concavity_bound_m(&quad, 1.0).unwrap();
        // f''(s) = −(2s + 1) e^{s/(s+1)} / (s+1)^4, increasing toward s = 0.9.
        let exact_sup = (0..=900)
            .map(|i| {
                let s = 0.9 * i as f64 / 900.0;
                -(2.0 * s + 1.0) * (s / (s + 1.0)).exp() / (s + 1.0).powi(4)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(m <= -exact_sup + 1e-3, "{m} vs {}", -exact_sup);
        assert!(matches!(
            concavity_bound_m(&ReactionQuad::linear(), 1.0),
            Err(Error::ConcavityViolation { .. })
        ));
    }
}
