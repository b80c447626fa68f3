//! Proximal point runs, resolvent curves, and verification of the rate bounds
//! on the data they produce.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::checkers::{SampleConfig, ViolationReport, Witness};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, Space};
use crate::rates::{self, Counterfunction, DivergenceModulus, Modulus};
use crate::resolvents::{Family, FixedSet};
use crate::sampling::substream;

/// Slack allowed when comparing a computed distance with `ε`.
pub const BOUND_SLACK: f64 = 1e-9;

/// Step sizes `(γ_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant { c: f64 },
    /// `γ_n = 1/(n + 1)`.
    Harmonic,
    Explicit { values: Vec<f64> },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            StepSchedule::Constant { c } if !(*c > 0.0 && c.is_finite()) => invalid(format!("step {c} must be > 0")),
            StepSchedule::Explicit { values } if values.is_empty() => invalid("explicit schedule is empty"),
            StepSchedule::Explicit { values } if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) => {
                invalid("explicit schedule entries must be finite and > 0")
            }
            _ => Ok(()),
        }
    }

    pub fn gamma(&self, n: usize) -> Result<f64> {
        match self {
            StepSchedule::Constant { c } => Ok(*c),
            StepSchedule::Harmonic => Ok(1.0 / (n as f64 + 1.0)),
            StepSchedule::Explicit { values } => values
                .get(n)
                .copied()
                .ok_or(Error::InsufficientLength { required: n + 1, available: values.len() }),
        }
    }

    /// Finite length, if any.
    pub fn finite_len(&self) -> Option<usize> {
        match self {
            StepSchedule::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        match self {
            StepSchedule::Constant { .. } => true,
            StepSchedule::Harmonic => false,
            StepSchedule::Explicit { values } => values.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

/// Divergence modulus of a schedule: `Σ_{n <= θ(x)} γ_n >= x`.
///
/// Constant `c`: `θ(x) = max(0, ⌈x/c⌉ - 1)`. Harmonic: `θ(x) = ⌈eˣ⌉`, since
/// `Σ_{n <= N} 1/(n+1) >= ln(N + 2)`. Explicit: scan of the partial sums;
/// evaluating past the last partial sum yields `InsufficientSchedule`.
pub fn theta_for_schedule(schedule: &StepSchedule) -> Result<DivergenceModulus> {
    schedule.validate()?;
    Ok(match schedule {
        StepSchedule::Constant { c } => DivergenceModulus::ConstantStep { c: *c },
        StepSchedule::Harmonic => DivergenceModulus::Harmonic,
        StepSchedule::Explicit { values } => DivergenceModulus::PartialSums {
            sums: values
                .iter()
                .scan(0.0, |acc, v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaRow {
    pub n: usize,
    pub gamma: f64,
    /// `d(x_n, p)` when a reference point was supplied.
    pub d_to_p: Option<f64>,
    /// `d(x_n, x_{n+1})`.
    pub step: f64,
}

/// Iterates `x_0, ..., x_steps` of `x_{n+1} = T_{γ_n} x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaTrace {
    pub rows: Vec<PpaRow>,
    pub points: Vec<Point>,
    pub final_d_to_p: Option<f64>,
}

impl PpaTrace {
    /// `d(x_n, p)` for `n = 0..=steps`, when `p` was supplied.
    pub fn distances(&self) -> Option<Vec<f64>> {
        let mut out: Vec<f64> = self.rows.iter().map(|r| r.d_to_p).collect::<Option<_>>()?;
        out.push(self.final_d_to_p?);
        Some(out)
    }

    /// Largest recorded `d(x_n, p)`.
    pub fn max_distance(&self) -> Option<f64> {
        self.distances().map(|d| d.into_iter().fold(0.0, f64::max))
    }
}

/// Streaming proximal point iteration; yields one row per step and keeps
/// only the current iterate.
pub struct PpaRun<'a> {
    space: &'a Space,
    family: &'a dyn Family,
    schedule: &'a StepSchedule,
    p: Option<&'a Point>,
    x: Point,
    n: usize,
}

impl<'a> PpaRun<'a> {
    pub fn new(space: &'a Space, family: &'a dyn Family, schedule: &'a StepSchedule, x0: Point, p: Option<&'a Point>) -> Result<Self> {
        schedule.validate()?;
        space.check_point(&x0)?;
        if let Some(p) = p {
            space.check_point(p)?;
        }
        Ok(PpaRun { space, family, schedule, p, x: x0, n: 0 })
    }

    /// The current iterate `x_n`.
    pub fn current(&self) -> &Point {
        &self.x
    }

    pub fn current_d_to_p(&self) -> Option<f64> {
        self.p.map(|p| self.space.dist_unchecked(&self.x, p))
    }

    /// Advances one step, returning the row for the step just taken.
    pub fn step(&mut self) -> Result<PpaRow> {
        let gamma = self.schedule.gamma(self.n)?;
        let next = self.family.apply(self.space, gamma, &self.x)?;
        let step = self.space.dist(&self.x, &next)?;
        let row = PpaRow { n: self.n, gamma, d_to_p: self.current_d_to_p(), step };
        if !(step.is_finite() && row.d_to_p.is_none_or(f64::is_finite)) {
            return Err(Error::NumericFailure(format!("non-finite value at step {}", self.n)));
        }
        self.x = next;
        self.n += 1;
        Ok(row)
    }
}

pub fn run_ppa(space: &Space, family: &dyn Family, schedule: &StepSchedule, x0: &Point, steps: usize, p: Option<&Point>) -> Result<PpaTrace> {
    if steps == 0 {
        return invalid("steps must be >= 1");
    }
    let mut run = PpaRun::new(space, family, schedule, x0.clone(), p)?;
    let mut rows = Vec::with_capacity(steps);
    let mut points = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        points.push(run.current().clone());
        rows.push(run.step()?);
    }
    let final_d_to_p = run.current_d_to_p();
    points.push(run.current().clone());
    Ok(PpaTrace { rows, points, final_d_to_p })
}

/// Outcome of the rate check for one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub eps: f64,
    pub bound: u64,
    pub pass: bool,
    /// First `n >= bound` with `d(x_n, p) > ε + BOUND_SLACK`.
    pub first_violation: Option<usize>,
    /// `ε - max_{n >= bound} d(x_n, p)` over the inspected range.
    pub margin: f64,
}

/// Incremental form of [`verify_ppa_rate`] for runs too long to store.
#[derive(Debug, Clone)]
pub struct RateVerifier {
    checks: Vec<RateCheck>,
    worst: Vec<f64>,
    seen: usize,
}

impl RateVerifier {
    pub fn new(theta: &DivergenceModulus, b: f64, phi: &Modulus, eps_list: &[f64]) -> Result<Self> {
        if eps_list.is_empty() {
            return invalid("ε list is empty");
        }
        let checks = eps_list
            .iter()
            .map(|&eps| {
                let bound = rates::ppa_rate_bound(theta, b, phi, eps)?;
                Ok(RateCheck { eps, bound, pass: true, first_violation: None, margin: f64::INFINITY })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RateVerifier { worst: vec![f64::NEG_INFINITY; checks.len()], checks, seen: 0 })
    }

    /// Largest bound over all `ε`; a trace must be longer than this.
    pub fn max_bound(&self) -> u64 {
        self.checks.iter().map(|c| c.bound).max().unwrap_or(0)
    }

    /// Feeds `d(x_n, p)` for the next `n`.
    pub fn push(&mut self, d: f64) {
        let n = self.seen;
        for (c, worst) in self.checks.iter_mut().zip(self.worst.iter_mut()) {
            if n as u64 >= c.bound {
                *worst = worst.max(d);
                if d > c.eps + BOUND_SLACK && c.first_violation.is_none() {
                    c.first_violation = Some(n);
                    c.pass = false;
                }
            }
        }
        self.seen += 1;
    }

    pub fn finish(mut self) -> Result<Vec<RateCheck>> {
        let required = self.max_bound() as usize + 1;
        if self.seen < required {
            return Err(Error::InsufficientLength { required, available: self.seen });
        }
        for (c, worst) in self.checks.iter_mut().zip(&self.worst) {
            c.margin = c.eps - worst;
        }
        Ok(self.checks)
    }
}

/// Checks `d(x_n, p) <= ε` for all recorded `n >= ppa_rate_bound(θ, b, φ, ε)`.
pub fn verify_ppa_rate(trace: &PpaTrace, theta: &DivergenceModulus, b: f64, phi: &Modulus, eps_list: &[f64]) -> Result<Vec<RateCheck>> {
    let distances = trace
        .distances()
        .ok_or_else(|| Error::InvalidInput("trace was recorded without a reference point".into()))?;
    let mut verifier = RateVerifier::new(theta, b, phi, eps_list)?;
    for d in distances {
        verifier.push(d);
    }
    verifier.finish()
}

/// Empirical `T_γ(C) ⊆ C` for the closed ball `C = B(p, b)`: samples `x ∈ C`
/// and reports `d(T_γx, p) - b` for each `γ`. Witness points: `x, T_γx`; params: `γ`.
pub fn check_ball_invariance(space: &Space, family: &dyn Family, gammas: &[f64], p: &Point, b: f64, cfg: &SampleConfig, tol: f64) -> Result<ViolationReport> {
    let ball = SampleConfig { radius: b, base: p.clone(), ..cfg.clone() };
    ball.validate(space)?;
    let mut worst: Option<(f64, Witness)> = None;
    let mut checked = 0;
    for i in 0..ball.count {
        let mut rng = substream(ball.seed, i as u64);
        let x = space.sample_ball(&mut rng, p, b)?;
        for &g in gammas {
            let tx = family.apply(space, g, &x)?;
            let raw = space.dist(&tx, p)? - b;
            let normalized = raw / (1.0 + b);
            checked += 1;
            if worst.as_ref().is_none_or(|(w, _)| normalized > *w) {
                worst = Some((normalized, Witness { index: i, points: vec![x.clone(), tx], params: vec![g], raw }));
            }
        }
    }
    let max_violation = worst.as_ref().map_or(0.0, |w| w.0);
    Ok(ViolationReport {
        check: "ball_invariance".into(),
        eps: None,
        max_violation,
        worst_witness: worst.map(|w| w.1),
        checked,
        tolerance: tol,
        pass: max_violation <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub gamma: f64,
    pub point: Point,
    /// `d(x, T_γx)`.
    pub d_from_base: f64,
}

/// `T_γx` along a strictly increasing list of orders.
pub fn sample_curve(space: &Space, family: &dyn Family, x: &Point, gammas: &[f64]) -> Result<Vec<CurveSample>> {
    if gammas.is_empty() {
        return invalid("γ list is empty");
    }
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("γ list must be strictly increasing");
    }
    gammas
        .iter()
        .map(|&gamma| {
            let point = family.apply(space, gamma, x)?;
            let d_from_base = space.dist(x, &point)?;
            Ok(CurveSample { gamma, point, d_from_base })
        })
        .collect()
}

/// `start·ratio^k` for `k = 0..count`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && ratio > 1.0 && start.is_finite() && ratio.is_finite()) {
        return invalid(format!("geometric grid needs start > 0 and ratio > 1, got {start}, {ratio}"));
    }
    Ok((0..count).map(|k| start * ratio.powi(k as i32)).collect())
}

/// Nearest point of an analytic fixed set.
pub fn project_fixed_set(space: &Space, fixed: &FixedSet, x: &Point) -> Result<Point> {
    match fixed {
        FixedSet::Set { set } => set.project(space, x),
        FixedSet::Empty => Err(Error::UnsupportedSet("fixed set is empty".into())),
        FixedSet::Unknown => Err(Error::UnsupportedSet("fixed set has no analytic description".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveLimitCheck {
    pub eps: f64,
    pub distance: f64,
    pub pass: bool,
}

/// `d(T_{γ_max}x, P_F x) <= ε` for the last sample of a curve.
pub fn verify_curve_limit(space: &Space, samples: &[CurveSample], projection: &Point, eps: f64) -> Result<CurveLimitCheck> {
    let last = samples.last().ok_or_else(|| Error::InvalidInput("no curve samples".into()))?;
    let distance = space.dist(&last.point, projection)?;
    Ok(CurveLimitCheck { eps, distance, pass: distance <= eps })
}

/// Along increasing `γ`, `d²(x, T_μx) >= d²(x, T_λx) + d²(T_λx, T_μx)` for
/// every `λ <= μ`. Checks consecutive samples and each sample against the
/// first. Violations are absolute. Witness points: `T_λx, T_μx`; params: `λ, μ`.
pub fn check_curve_growth(space: &Space, x: &Point, samples: &[CurveSample], tol: f64) -> Result<ViolationReport> {
    let mut pairs: Vec<(usize, usize)> = (1..samples.len()).map(|j| (j - 1, j)).collect();
    pairs.extend((2..samples.len()).map(|j| (0, j)));
    let mut worst: Option<(f64, Witness)> = None;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let (a, b) = (&samples[i], &samples[j]);
        let gap = space.dist(&a.point, &b.point)?;
        let _ = x;
        let raw = a.d_from_base.powi(2) + gap * gap - b.d_from_base.powi(2);
        if worst.as_ref().is_none_or(|(w, _)| raw > *w) {
            worst = Some((raw, Witness { index: k, points: vec![a.point.clone(), b.point.clone()], params: vec![a.gamma, b.gamma], raw }));
        }
    }
    let max_violation = worst.as_ref().map_or(0.0, |w| w.0);
    Ok(ViolationReport {
        check: "curve_growth".into(),
        eps: None,
        max_violation,
        worst_witness: worst.map(|w| w.1),
        checked: pairs.len(),
        tolerance: tol,
        pass: max_violation <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetastabilityCheck {
    pub eps: f64,
    pub g: Counterfunction,
    pub bound: String,
    pub witness: Option<usize>,
    pub pass: bool,
}

/// Brute-force metastability witness of the curve samples against
/// `g̃^(⌈b²/ε²⌉)(0)`. The window condition is `d(T_ix, T_jx) <= ε` for all
/// `i, j` in `[N, N + g(N)]`.
pub fn verify_curve_metastability(space: &Space, samples: &[CurveSample], b: f64, eps: f64, g: &Counterfunction) -> Result<MetastabilityCheck> {
    let bound = rates::curve_metastability_bound(b, eps, g)?;
    let limit = bound.to_u64().unwrap_or(u64::MAX);
    let witness = rates::find_metastable_witness_by(
        samples.len(),
        |i, j| space.dist_unchecked(&samples[i].point, &samples[j].point),
        eps,
        g,
        limit,
    )?;
    let pass = witness.is_some_and(|n| BigUint::from(n) <= bound);
    Ok(MetastabilityCheck { eps, g: g.clone(), bound: bound.to_string(), witness, pass })
}

/// Samples `λ ∈ [Γ, γ_max - δ']` and `μ ∈ [λ, λ + δ']` with
/// `δ = curve_continuity_delta(Γ, b, ε)`, `δ' = min(δ, (γ_max - Γ)/2)`, and
/// checks `d(T_λx, T_μx) <= ε`.
///
/// `b` must bound `d(x, T_γx)` for `γ <= γ_max`. Violation: `d - ε`, absolute.
/// Witness points: `T_λx, T_μx`; params: `λ, μ, δ`.
#[allow(clippy::too_many_arguments)]
pub fn check_curve_continuity(
    space: &Space,
    family: &dyn Family,
    x: &Point,
    gamma_min: f64,
    gamma_max: f64,
    b: f64,
    eps: f64,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<ViolationReport> {
    let delta = rates::curve_continuity_delta(gamma_min, b, eps)?;
    if !(gamma_max > gamma_min && gamma_max.is_finite()) {
        return invalid(format!("γ range [{gamma_min}, {gamma_max}] is empty"));
    }
    // μ - λ never exceeds δ; the cap keeps λ inside the range when δ is wide
    let step = delta.min(0.5 * (gamma_max - gamma_min));
    let mut worst: Option<(f64, Witness)> = None;
    for i in 0..count {
        let mut rng = substream(seed, i as u64);
        let span = gamma_max - step - gamma_min;
        // half the samples near Γ, where the estimate is tightest
        let lambda = if i % 2 == 0 {
            gamma_min + span * rng.random::<f64>()
        } else {
            gamma_min + (span.min(1.0)) * rng.random::<f64>()
        };
        let mu = lambda + step * rng.random::<f64>();
        let tl = family.apply(space, lambda, x)?;
        let tm = family.apply(space, mu, x)?;
        let raw = space.dist(&tl, &tm)? - eps;
        if worst.as_ref().is_none_or(|(w, _)| raw > *w) {
            worst = Some((raw, Witness { index: i, points: vec![tl, tm], params: vec![lambda, mu, delta], raw }));
        }
    }
    let max_violation = worst.as_ref().map_or(0.0, |w| w.0);
    Ok(ViolationReport {
        check: "curve_continuity".into(),
        eps: Some(eps),
        max_violation,
        worst_witness: worst.map(|w| w.1),
        checked: count,
        tolerance: tol,
        pass: max_violation <= tol,
    })
}
