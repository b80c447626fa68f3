//! Sampled verification of the defining inequalities of resolvent families.
//!
//! Each check draws `count` samples from a geodesic ball, evaluates a
//! violation `lhs - rhs` of one inequality per sample, and reports the largest.
//! Violations are normalized by `1 + |lhs| + |rhs|` before comparison with the
//! additive tolerance, so one tolerance works across spaces and scales.
//!
//! Sample `i` draws from [`crate::sampling::substream`]`(seed, i)` and
//! samples are evaluated in parallel; the reduction picks the maximum with
//! the lowest index on ties, so reports do not depend on scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point, Space};
use crate::rates::Modulus;
use crate::resolvents::{Family, SelfMap};
use crate::sampling::substream;

pub const DEFAULT_TOL: f64 = 1e-8;

/// Resolvent-identity samples use `t ∈ [0, 1 - T_MARGIN]`; `T_0` is not part of a family.
pub const T_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    pub radius: f64,
    pub base: Point,
}

impl SampleConfig {
    pub fn new(seed: u64, count: usize, radius: f64, base: Point) -> Self {
        SampleConfig { seed, count, radius, base }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        if self.count == 0 {
            return invalid("sample count must be >= 1");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return invalid(format!("sampling radius {} must be finite and > 0", self.radius));
        }
        space.check_point(&self.base)
    }

    fn draw<R: Rng>(&self, space: &Space, rng: &mut R) -> Result<Point> {
        space.sample_ball(rng, &self.base, self.radius)
    }
}

/// Parameters `(λ, μ, δ)` of a mutual firm nonexpansiveness instance, with
/// `α = 1 - δ/λ` and `β = 1 - δ/μ`, so that `(1 - α)λ = (1 - β)μ = δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualParams {
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
}

impl MutualParams {
    pub fn new(lambda: f64, mu: f64, delta: f64) -> Result<Self> {
        check_order("λ", lambda)?;
        check_order("μ", mu)?;
        if !(delta > 0.0 && delta <= lambda.min(mu)) {
            return invalid(format!("δ = {delta} must lie in (0, min(λ, μ)]"));
        }
        Ok(MutualParams { lambda, mu, delta })
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.delta / self.lambda
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.delta / self.mu
    }
}

fn check_order(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} = {v} must be finite and > 0"))
    }
}

/// The sample that produced the largest violation.
///
/// `points` and `params` are listed in the order documented by each check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub points: Vec<Point>,
    pub params: Vec<f64>,
    /// Violation before normalization.
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub check: String,
    /// Present for checks that are evaluated per `ε`.
    pub eps: Option<f64>,
    /// Largest normalized violation; `0` when no sample qualified.
    pub max_violation: f64,
    pub worst_witness: Option<Witness>,
    /// Samples that entered the maximum (pairs with `d(Tx, Ty) < ε` are skipped).
    pub checked: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ViolationReport {
    fn from_samples(check: &str, eps: Option<f64>, tol: f64, samples: impl Iterator<Item = Option<Sample>>) -> Self {
        let mut checked = 0;
        let mut worst: Option<Sample> = None;
        for s in samples.flatten() {
            checked += 1;
            // strict comparison keeps the lowest index on ties
            if worst.as_ref().is_none_or(|w| s.normalized > w.normalized) {
                worst = Some(s);
            }
        }
        let max_violation = worst.as_ref().map_or(0.0, |w| w.normalized);
        ViolationReport {
            check: check.to_string(),
            eps,
            max_violation,
            worst_witness: worst.map(|w| w.witness),
            checked,
            tolerance: tol,
            pass: max_violation <= tol,
        }
    }
}

#[derive(Debug, Clone)]
struct Sample {
    normalized: f64,
    witness: Witness,
}

impl Sample {
    fn new(index: usize, lhs: f64, rhs: f64, points: Vec<Point>, params: Vec<f64>) -> Self {
        let raw = lhs - rhs;
        let normalized = if raw.is_nan() { f64::INFINITY } else { raw / (1.0 + lhs.abs() + rhs.abs()) };
        Sample { normalized, witness: Witness { index, points, params, raw } }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        invalid(format!("tolerance {tol} must be finite and >= 0"))
    }
}

/// Evaluates `f` on every sample index in parallel; results are in index order.
fn per_sample<T: Send>(cfg: &SampleConfig, f: impl Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

fn sq(v: f64) -> f64 {
    v * v
}

/// `(λ, μ)`-mutual firm nonexpansiveness:
/// `d(Tx, Uy) <= d((1-α)x ⊕ αTx, (1-β)y ⊕ βUy)` with `(1-α)λ = (1-β)μ`.
///
/// Samples `x, y` from the ball and `δ = (1-α)λ` uniformly from `(0, min(λ, μ)]`.
/// Witness points: `x, y, Tx, Uy`; params: `λ, μ, δ`.
pub fn check_mutual_fne(
    space: &Space,
    t: &dyn SelfMap,
    u: &dyn SelfMap,
    lambda: f64,
    mu: f64,
    cfg: &SampleConfig,
    tol: f64,
) -> Result<ViolationReport> {
    cfg.validate(space)?;
    check_tol(tol)?;
    MutualParams::new(lambda, mu, lambda.min(mu))?;
    let samples = per_sample(cfg, |i, rng| {
        let x = cfg.draw(space, rng)?;
        let y = cfg.draw(space, rng)?;
        let delta = lambda.min(mu) * (1.0 - rng.random::<f64>());
        let p = MutualParams { lambda, mu, delta };
        let tx = t.apply(space, &x)?;
        let uy = u.apply(space, &y)?;
        let lhs = space.dist(&tx, &uy)?;
        let rhs = space.dist(&space.combine(&x, &tx, p.alpha())?, &space.combine(&y, &uy, p.beta())?)?;
        Ok(Some(Sample::new(i, lhs, rhs, vec![x, y, tx, uy], vec![lambda, mu, delta])))
    })?;
    Ok(ViolationReport::from_samples("mutual_fne", None, tol, samples.into_iter()))
}

/// `(λ, μ)`-mutual (P₂): `(1/μ)<TxUy, yUy> <= (1/λ)<TxUy, xTx>`.
///
/// Draws `x, y` exactly as [`check_mutual_fne`] does, so both checks see the
/// same points under one config. Witness points: `x, y, Tx, Uy`; params: `λ, μ`.
pub fn check_mutual_p2(
    space: &Space,
    t: &dyn SelfMap,
    u: &dyn SelfMap,
    lambda: f64,
    mu: f64,
    cfg: &SampleConfig,
    tol: f64,
) -> Result<ViolationReport> {
    cfg.validate(space)?;
    check_tol(tol)?;
    check_order("λ", lambda)?;
    check_order("μ", mu)?;
    let samples = per_sample(cfg, |i, rng| {
        let x = cfg.draw(space, rng)?;
        let y = cfg.draw(space, rng)?;
        let tx = t.apply(space, &x)?;
        let uy = u.apply(space, &y)?;
        let lhs = space.quasi_inner(&tx, &uy, &y, &uy)? / mu;
        let rhs = space.quasi_inner(&tx, &uy, &x, &tx)? / lambda;
        Ok(Some(Sample::new(i, lhs, rhs, vec![x, y, tx, uy], vec![lambda, mu])))
    })?;
    Ok(ViolationReport::from_samples("mutual_p2", None, tol, samples.into_iter()))
}

/// Resolvent identity `T_{(1-t)γ}((1-t)x ⊕ tT_γx) = T_γx`, with `t` uniform
/// on `[0, 1 - T_MARGIN]`. Violation: the distance between both sides.
/// Witness points: `x, T_γx, left side`; params: `γ, t`.
pub fn check_resolvent_identity(
    space: &Space,
    family: &dyn Family,
    gamma: f64,
    cfg: &SampleConfig,
    tol: f64,
) -> Result<ViolationReport> {
    cfg.validate(space)?;
    check_tol(tol)?;
    check_order("γ", gamma)?;
    let samples = per_sample(cfg, |i, rng| {
        let x = cfg.draw(space, rng)?;
        let t = rng.random::<f64>() * (1.0 - T_MARGIN);
        let tx = family.apply(space, gamma, &x)?;
        let moved = space.combine(&x, &tx, t)?;
        let left = family.apply(space, (1.0 - t) * gamma, &moved)?;
        let gap = space.dist(&left, &tx)?;
        // normalize by the size of the step T_γ moves x
        let scale = space.dist(&x, &tx)?;
        let mut s = Sample::new(i, gap, 0.0, vec![x, tx, left], vec![gamma, t]);
        s.normalized = gap / (1.0 + scale);
        Ok(Some(s))
    })?;
    Ok(ViolationReport::from_samples("resolvent_identity", None, tol, samples.into_iter()))
}

/// `d(Tx, Ty) <= d(x, y)`. Witness points: `x, y, Tx, Ty`.
pub fn check_nonexpansive(space: &Space, t: &dyn SelfMap, cfg: &SampleConfig, tol: f64) -> Result<ViolationReport> {
    cfg.validate(space)?;
    check_tol(tol)?;
    let samples = per_sample(cfg, |i, rng| {
        let x = cfg.draw(space, rng)?;
        let y = cfg.draw(space, rng)?;
        let tx = t.apply(space, &x)?;
        let ty = t.apply(space, &y)?;
        let lhs = space.dist(&tx, &ty)?;
        let rhs = space.dist(&x, &y)?;
        Ok(Some(Sample::new(i, lhs, rhs, vec![x, y, tx, ty], vec![])))
    })?;
    Ok(ViolationReport::from_samples("nonexpansive", None, tol, samples.into_iter()))
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return invalid("ε list is empty");
    }
    for &e in eps_list {
        if !(e > 0.0 && e.is_finite()) {
            return invalid(format!("ε = {e} must be finite and > 0"));
        }
    }
    Ok(())
}

/// Uniform (P₂) on the closed ball `C = B(center, b)` with modulus `scale·φ`:
/// whenever `d(Tx, Ty) >= ε`,
/// `<TxTy, yTy> <= <TxTy, xTx> - scale·φ(ε)`.
///
/// `cfg.base` and `cfg.radius` are ignored; samples come from `C`.
/// One report per `ε`. Witness points: `x, y, Tx, Ty`; params: `ε, scale·φ(ε)`.
#[allow(clippy::too_many_arguments)]
pub fn check_uniform_p2(
    space: &Space,
    t: &dyn SelfMap,
    center: &Point,
    b: f64,
    phi: &Modulus,
    scale: f64,
    cfg: &SampleConfig,
    tol: f64,
    eps_list: &[f64],
) -> Result<Vec<ViolationReport>> {
    check_eps_list(eps_list)?;
    check_order("scale", scale)?;
    phi.validate()?;
    let ball = SampleConfig { radius: b, base: center.clone(), ..cfg.clone() };
    ball.validate(space)?;
    check_tol(tol)?;
    let evaluated = per_sample(&ball, |_, rng| {
        let x = ball.draw(space, rng)?;
        let y = ball.draw(space, rng)?;
        let tx = t.apply(space, &x)?;
        let ty = t.apply(space, &y)?;
        let sep = space.dist(&tx, &ty)?;
        let left = space.quasi_inner(&tx, &ty, &y, &ty)?;
        let right = space.quasi_inner(&tx, &ty, &x, &tx)?;
        Ok((sep, left, right, [x, y, tx, ty]))
    })?;
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let slack = scale * phi.eval(eps);
            let samples = evaluated.iter().enumerate().map(|(i, (sep, left, right, pts))| {
                (*sep >= eps).then(|| Sample::new(i, left + slack, *right, pts.to_vec(), vec![eps, slack]))
            });
            ViolationReport::from_samples("uniform_p2", Some(eps), tol, samples)
        })
        .collect())
}

/// For `λ <= μ` and mutually (P₂) `T, U`:
/// `d²(x, Ux) >= d²(x, Tx) + d²(Tx, Ux)`. Witness points: `x, Tx, Ux`.
pub fn check_halp(space: &Space, t: &dyn SelfMap, u: &dyn SelfMap, cfg: &SampleConfig, tol: f64) -> Result<ViolationReport> {
    cfg.validate(space)?;
    check_tol(tol)?;
    let samples = per_sample(cfg, |i, rng| {
        let x = cfg.draw(space, rng)?;
        let tx = t.apply(space, &x)?;
        let ux = u.apply(space, &x)?;
        let lhs = sq(space.dist(&x, &tx)?) + sq(space.dist(&tx, &ux)?);
        let rhs = sq(space.dist(&x, &ux)?);
        Ok(Some(Sample::new(i, lhs, rhs, vec![x, tx, ux], vec![])))
    })?;
    Ok(ViolationReport::from_samples("halp", None, tol, samples.into_iter()))
}

/// For a fixed point `z` of a map that is uniformly (P₂) with modulus
/// `scale·φ`: whenever `d(Tx, z) >= ε`, `scale·φ(ε) <= <Txz, xTx>`.
///
/// One report per `ε`. Witness points: `x, Tx`; params: `ε, scale·φ(ε)`.
#[allow(clippy::too_many_arguments)]
pub fn check_uniq_lemma(
    space: &Space,
    t: &dyn SelfMap,
    z: &Point,
    cfg: &SampleConfig,
    phi: &Modulus,
    scale: f64,
    eps_list: &[f64],
    tol: f64,
) -> Result<Vec<ViolationReport>> {
    cfg.validate(space)?;
    check_eps_list(eps_list)?;
    check_order("scale", scale)?;
    phi.validate()?;
    check_tol(tol)?;
    let tz = t.apply(space, z)?;
    let drift = space.dist(&tz, z)?;
    if drift > 1e-8 {
        return invalid(format!("z is not a fixed point: d(Tz, z) = {drift:e}"));
    }
    let evaluated = per_sample(cfg, |_, rng| {
        let x = cfg.draw(space, rng)?;
        let tx = t.apply(space, &x)?;
        let sep = space.dist(&tx, z)?;
        let pairing = space.quasi_inner(&tx, z, &x, &tx)?;
        Ok((sep, pairing, [x, tx]))
    })?;
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let slack = scale * phi.eval(eps);
            let samples = evaluated.iter().enumerate().map(|(i, (sep, pairing, pts))| {
                (*sep >= eps).then(|| Sample::new(i, slack, *pairing, pts.to_vec(), vec![eps, slack]))
            });
            ViolationReport::from_samples("uniq_lemma", Some(eps), tol, samples)
        })
        .collect())
}

/// `d(T_γp, p) <= tol` for every listed point `p` and every `γ`.
/// Witness points: `p, T_γp`; params: `γ`.
pub fn check_fixed_points(space: &Space, family: &dyn Family, gammas: &[f64], points: &[Point], tol: f64) -> Result<ViolationReport> {
    check_tol(tol)?;
    let mut samples = Vec::with_capacity(gammas.len() * points.len());
    for (gi, &gamma) in gammas.iter().enumerate() {
        for (pi, p) in points.iter().enumerate() {
            let tp = family.apply(space, gamma, p)?;
            let d = space.dist(&tp, p)?;
            let mut s = Sample::new(gi * points.len() + pi, d, 0.0, vec![p.clone(), tp], vec![gamma]);
            s.normalized = d;
            samples.push(Some(s));
        }
    }
    Ok(ViolationReport::from_samples("fixed_points", None, tol, samples.into_iter()))
}

/// Both sides of the resolvent-identity equivalence for one family:
/// nonexpansiveness and the resolvent identity at each `γ`, and mutual firm
/// nonexpansiveness for each `(λ, μ)` pair.
pub fn equivalence_suite(
    space: &Space,
    family: &dyn Family,
    gammas: &[f64],
    pairs: &[(f64, f64)],
    cfg: &SampleConfig,
    tol: f64,
) -> Result<Vec<ViolationReport>> {
    struct At<'a>(&'a dyn Family, f64);
    impl SelfMap for At<'_> {
        fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
            self.0.apply(space, self.1, x)
        }
    }
    let mut out = Vec::new();
    for &g in gammas {
        let mut r = check_nonexpansive(space, &At(family, g), cfg, tol)?;
        r.check = format!("nonexpansive[γ={g}]");
        out.push(r);
        let mut r = check_resolvent_identity(space, family, g, cfg, tol)?;
        r.check = format!("resolvent_identity[γ={g}]");
        out.push(r);
    }
    for &(l, m) in pairs {
        let mut r = check_mutual_fne(space, &At(family, l), &At(family, m), l, m, cfg, tol)?;
        r.check = format!("mutual_fne[λ={l},μ={m}]");
        out.push(r);
    }
    Ok(out)
}

/// Names of the reports returned by [`check_geometry`], in order.
pub const GEOMETRY_CHECKS: [&str; 8] = [
    "geodesic_law",
    "cat0_inequality",
    "quasi_axiom_i",
    "quasi_axiom_ii",
    "quasi_axiom_iii",
    "quasi_axiom_iv",
    "cauchy_schwarz",
    "hilbert_reduction",
];

/// Metric identities and inequalities of the space itself, on points drawn
/// from the sampling ball:
///
/// - geodesic law `d(c(t), c(t')) = |t - t'|·d(p, q)` for `c(t) = (1-t)p ⊕ tq`
/// - CAT(0) inequality `d²(z, c(t)) <= (1-t)d²(z, p) + t d²(z, q) - t(1-t)d²(p, q)`
/// - quasi-linearization axioms `<xy,xy> = d²(x,y)`, `<xy,uv> = <uv,xy>`,
///   `<yx,uv> = -<xy,uv>`, `<xy,uv> + <xy,vw> = <xy,uw>`
/// - Cauchy–Schwarz `<xy,uv> <= d(x,y)·d(u,v)`
/// - on Euclidean space, `<xy,uv> = <x - y, u - v>`
///
/// Identities report `|lhs - rhs|`, normalized like every other check. The
/// Hilbert reduction report is omitted on non-Euclidean spaces. Witness points:
/// `x, y, u, v, w`; params: `t, t'`.
pub fn check_geometry(space: &Space, cfg: &SampleConfig, tol: f64) -> Result<Vec<ViolationReport>> {
    cfg.validate(space)?;
    check_tol(tol)?;
    let euclidean = matches!(space, Space::Euclidean { .. });
    let rows = per_sample(cfg, |i, rng| {
        let pts: Vec<Point> = (0..5).map(|_| cfg.draw(space, rng)).collect::<Result<_>>()?;
        let (t, s): (f64, f64) = (rng.random(), rng.random());
        let [x, y, u, v, w] = [&pts[0], &pts[1], &pts[2], &pts[3], &pts[4]];
        let d = |a: &Point, b: &Point| space.dist_unchecked(a, b);
        let q = |a: &Point, b: &Point, c: &Point, e: &Point| space.quasi_inner_unchecked(a, b, c, e);
        let sample = |lhs: f64, rhs: f64| Sample::new(i, lhs, rhs, pts.clone(), vec![t, s]);
        let gap = |lhs: f64, rhs: f64| {
            let mut out = sample(lhs, rhs);
            out.normalized = out.normalized.abs();
            out
        };
        let (ct, cs) = (space.combine_unchecked(x, y, t), space.combine_unchecked(x, y, s));
        let cat0_rhs = (1.0 - t) * sq(d(u, x)) + t * sq(d(u, y)) - t * (1.0 - t) * sq(d(x, y));
        let xy_uv = q(x, y, u, v);
        let mut out = vec![
            gap(d(&ct, &cs), (t - s).abs() * d(x, y)),
            sample(sq(d(u, &ct)), cat0_rhs),
            gap(q(x, y, x, y), sq(d(x, y))),
            gap(xy_uv, q(u, v, x, y)),
            gap(q(y, x, u, v), -xy_uv),
            gap(xy_uv + q(x, y, v, w), q(x, y, u, w)),
            sample(xy_uv, d(x, y) * d(u, v)),
        ];
        if euclidean {
            let (a, b, c, e) = (x.coords().unwrap(), y.coords().unwrap(), u.coords().unwrap(), v.coords().unwrap());
            let dot: f64 = (0..a.len()).map(|k| (a[k] - b[k]) * (c[k] - e[k])).sum();
            out.push(gap(xy_uv, dot));
        }
        Ok(out)
    })?;
    let count = if euclidean { GEOMETRY_CHECKS.len() } else { GEOMETRY_CHECKS.len() - 1 };
    Ok((0..count)
        .map(|k| ViolationReport::from_samples(GEOMETRY_CHECKS[k], None, tol, rows.iter().map(|r| Some(r[k].clone()))))
        .collect())
}
