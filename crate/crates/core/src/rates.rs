//! Explicit quantitative bounds and brute-force witness finders.
//!
//! A counterfunction `g: ℕ → ℕ` induces `g̃(n) = n + g(n)`; metastability
//! bounds are iterates `g̃^(k)(0)` for `k` a ceiling of a ratio of reals.
//! Iterates are computed in arbitrary-width integers and every ceiling is
//! taken on the exact rational value of the floating-point inputs, so the
//! bounds are never rounded below their true value.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Iterates whose bit length exceeds this are reported as numeric failures.
pub const MAX_BOUND_BITS: u64 = 4096;

/// A counterfunction `g: ℕ → ℕ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterfunction {
    /// `g(n) = k`.
    Constant { k: u64 },
    /// `g(n) = a·n + b`.
    Linear { a: u64, b: u64 },
    /// `g(n) = values[n]`, extended by the last entry.
    Table { values: Vec<u64> },
}

impl Counterfunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            Counterfunction::Table { values } if values.is_empty() => invalid("counterfunction table is empty"),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, n: &BigUint) -> BigUint {
        match self {
            Counterfunction::Constant { k } => BigUint::from(*k),
            Counterfunction::Linear { a, b } => n * *a + *b,
            Counterfunction::Table { values } => {
                let idx = n.to_usize().unwrap_or(usize::MAX).min(values.len() - 1);
                BigUint::from(values[idx])
            }
        }
    }

    /// `g(n)` for machine-sized `n`; `None` if it does not fit in `usize`.
    pub fn eval_usize(&self, n: usize) -> Option<usize> {
        self.eval(&BigUint::from(n)).to_usize()
    }

    /// `g̃(n) = n + g(n)`.
    pub fn shifted(&self, n: &BigUint) -> BigUint {
        n + self.eval(n)
    }

    pub fn describe(&self) -> String {
        match self {
            Counterfunction::Constant { k } => format!("const {k}"),
            Counterfunction::Linear { a, b } => format!("{a}n+{b}"),
            Counterfunction::Table { values } => format!("table[{}]", values.len()),
        }
    }
}

fn check_bits(v: &BigUint) -> Result<()> {
    if v.bits() > MAX_BOUND_BITS {
        Err(Error::NumericFailure(format!("iterate exceeds {MAX_BOUND_BITS} bits")))
    } else {
        Ok(())
    }
}

/// `g̃^(k)(0)`.
pub fn gtilde_iterate(g: &Counterfunction, k: u64) -> Result<BigUint> {
    g.validate()?;
    let out = match g {
        Counterfunction::Constant { k: c } => BigUint::from(k) * *c,
        Counterfunction::Linear { a: 0, b } => BigUint::from(k) * *b,
        Counterfunction::Linear { a, b } => {
            // g̃(n) = (1 + a)n + b, so g̃^(k)(0) = b((1 + a)^k - 1)/a.
            let growth = BigUint::from(*a) + 1u32;
            let approx_bits = (k as f64) * (growth.to_f64().unwrap_or(f64::INFINITY)).log2();
            if approx_bits > MAX_BOUND_BITS as f64 + 64.0 {
                return Err(Error::NumericFailure(format!("iterate exceeds {MAX_BOUND_BITS} bits")));
            }
            let power = growth.pow(u32::try_from(k).map_err(|_| Error::NumericFailure("iteration count too large".into()))?);
            (power - 1u32) / *a * *b
        }
        Counterfunction::Table { values } => {
            let last = BigUint::from(*values.last().unwrap());
            let mut n = BigUint::zero();
            let mut i = 0u64;
            while i < k {
                if n >= BigUint::from(values.len() - 1) {
                    n += BigUint::from(k - i) * &last;
                    break;
                }
                let next = g.shifted(&n);
                if next == n {
                    break;
                }
                n = next;
                i += 1;
            }
            n
        }
    };
    check_bits(&out)?;
    Ok(out)
}

/// Exact rational value of a finite float.
pub fn exact(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::InvalidInput(format!("{v} is not finite")))
}

fn ceil_u64(r: &BigRational) -> Result<u64> {
    let c = r.ceil().to_integer();
    if c.sign() == num_bigint::Sign::Minus {
        return Ok(0);
    }
    c.to_u64().ok_or_else(|| Error::NumericFailure(format!("ceiling of {r} does not fit in 64 bits")))
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} = {v} must be finite and >= 0"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} = {v} must be finite and > 0"))
    }
}

/// `g̃^(⌈b/ε⌉)(0)`: every nondecreasing sequence in `[0, b]` has an `N` below
/// this with oscillation at most `ε` on `[N, N + g(N)]`.
pub fn qmcp_bound(b: f64, eps: f64, g: &Counterfunction) -> Result<BigUint> {
    nonnegative("b", b)?;
    positive("eps", eps)?;
    let k = ceil_u64(&(exact(b)? / exact(eps)?))?;
    gtilde_iterate(g, k)
}

/// `g̃^(⌈b²/ε²⌉)(0)`, the metastability rate of a resolvent curve `(T_{γ_n}x)`
/// with nondecreasing `γ_n` and `d(x, T_{γ_n}x) <= b`.
pub fn curve_metastability_bound(b: f64, eps: f64, g: &Counterfunction) -> Result<BigUint> {
    nonnegative("b", b)?;
    positive("eps", eps)?;
    let ratio = exact(b)? / exact(eps)?;
    let k = ceil_u64(&(&ratio * &ratio))?;
    gtilde_iterate(g, k)
}

/// A modulus `φ: (0, ∞) → (0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `φ(ε) = c·ε²`.
    Quadratic { c: f64 },
    /// `φ(ε) = c·ε`.
    Linear { c: f64 },
    /// Step function: `φ(ε)` is the value of the largest threshold `<= ε`, or
    /// the first value when `ε` is below every threshold. Thresholds must be
    /// increasing and values positive.
    Table { points: Vec<(f64, f64)> },
}

impl Modulus {
    pub fn validate(&self) -> Result<()> {
        match self {
            Modulus::Quadratic { c } | Modulus::Linear { c } => positive("modulus scale", *c),
            Modulus::Table { points } => {
                if points.is_empty() {
                    return invalid("modulus table is empty");
                }
                if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return invalid("modulus thresholds must be increasing");
                }
                for (t, v) in points {
                    positive("modulus threshold", *t)?;
                    positive("modulus value", *v)?;
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            Modulus::Quadratic { c } => c * eps * eps,
            Modulus::Linear { c } => c * eps,
            Modulus::Table { points } => table_value(points, eps),
        }
    }

    /// Exact value of `φ(ε)` on the float inputs.
    pub fn eval_exact(&self, eps: f64) -> Result<BigRational> {
        self.validate()?;
        positive("eps", eps)?;
        let e = exact(eps)?;
        Ok(match self {
            Modulus::Quadratic { c } => exact(*c)? * &e * &e,
            Modulus::Linear { c } => exact(*c)? * e,
            Modulus::Table { points } => exact(table_value(points, eps))?,
        })
    }
}

fn table_value(points: &[(f64, f64)], eps: f64) -> f64 {
    points.iter().rev().find(|(t, _)| *t <= eps).unwrap_or(&points[0]).1
}

/// A divergence modulus `θ` with `Σ_{n=0}^{θ(x)} γ_n >= x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceModulus {
    /// `θ(x) = max(0, ⌈x/c⌉ - 1)`, for the constant schedule `γ_n = c`.
    ConstantStep { c: f64 },
    /// `θ(x) = ⌈eˣ⌉`, for `γ_n = 1/(n+1)`.
    Harmonic,
    /// Smallest `N` with `partial_sums[N] >= x`, for a finite schedule.
    PartialSums { sums: Vec<f64> },
    /// `θ(x) = ⌈scale·x⌉`.
    Ceiling { scale: f64 },
}

impl DivergenceModulus {
    pub fn eval(&self, x: &BigRational) -> Result<u64> {
        match self {
            DivergenceModulus::ConstantStep { c } => {
                positive("step", *c)?;
                Ok(ceil_u64(&(x / exact(*c)?))?.saturating_sub(1))
            }
            DivergenceModulus::Ceiling { scale } => {
                positive("scale", *scale)?;
                ceil_u64(&(exact(*scale)? * x))
            }
            DivergenceModulus::Harmonic => {
                let mut xf = x.to_f64().unwrap_or(f64::INFINITY);
                if exact(xf).map(|e| &e < x).unwrap_or(false) {
                    xf = xf.next_up();
                }
                let v = xf.exp() * (1.0 + 4.0 * f64::EPSILON);
                if !v.is_finite() || v >= 2f64.powi(63) {
                    return Err(Error::NumericFailure(format!("θ(x) = ⌈exp({xf})⌉ overflows")));
                }
                Ok(v.ceil().max(0.0) as u64)
            }
            DivergenceModulus::PartialSums { sums } => {
                for (n, s) in sums.iter().enumerate() {
                    if &exact(*s)? >= x {
                        return Ok(n as u64);
                    }
                }
                Err(Error::InsufficientSchedule {
                    target: x.to_f64().unwrap_or(f64::INFINITY),
                    max_reachable: sums.last().copied().unwrap_or(0.0),
                })
            }
        }
    }

    pub fn eval_f64(&self, x: f64) -> Result<u64> {
        self.eval(&exact(x)?)
    }
}

/// `θ((b+1)/φ(ε)) + 1`: once a nonnegative sequence with `w_0 <= b` decreases
/// by at least `γ_n φ(ε)` whenever `w_{n+1} > ε`, it stays below `ε` from here on.
pub fn kp_bound(theta: &DivergenceModulus, b: f64, phi: &Modulus, eps: f64) -> Result<u64> {
    nonnegative("b", b)?;
    let arg = (exact(b)? + BigRational::one()) / phi.eval_exact(eps)?;
    Ok(theta.eval(&arg)? + 1)
}

/// `θ((b+1)²/φ(ε)) + 1`: proximal point iterates inside the ball of radius `b`
/// around a common fixed point `p` satisfy `d(x_n, p) <= ε` from here on.
pub fn ppa_rate_bound(theta: &DivergenceModulus, b: f64, phi: &Modulus, eps: f64) -> Result<u64> {
    nonnegative("b", b)?;
    let b1 = exact(b)? + BigRational::one();
    let arg = &b1 * &b1 / phi.eval_exact(eps)?;
    Ok(theta.eval(&arg)? + 1)
}

/// `δ = Γε²/(2b²)`: for `λ, μ >= Γ` with `|μ - λ| <= δ`,
/// `d(T_λx, T_μx) <= sqrt(|μ - λ|)·b·sqrt(2)/sqrt(Γ) <= ε`.
/// `b = 0` (a constant curve) gives `δ = ∞`.
pub fn curve_continuity_delta(gamma_min: f64, b: f64, eps: f64) -> Result<f64> {
    positive("Γ", gamma_min)?;
    nonnegative("b", b)?;
    positive("eps", eps)?;
    Ok(gamma_min * eps * eps / (2.0 * b * b))
}

/// Smallest `N <= limit` such that `max - min <= ε` on `values[N..=N + g(N)]`.
///
/// Fails with [`Error::InsufficientLength`] when a window that must be
/// inspected runs past the end of `values`.
pub fn find_metastable_witness(values: &[f64], eps: f64, g: &Counterfunction, limit: u64) -> Result<Option<usize>> {
    scan_windows(values.len(), eps, g, limit, |start, end| {
        let window = &values[start..=end];
        let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo <= eps
    })
}

/// Metric version of [`find_metastable_witness`]: the window condition is
/// `dist(i, j) <= ε` for every pair `i, j` in `[N, N + g(N)]`.
pub fn find_metastable_witness_by(
    len: usize,
    dist: impl Fn(usize, usize) -> f64,
    eps: f64,
    g: &Counterfunction,
    limit: u64,
) -> Result<Option<usize>> {
    scan_windows(len, eps, g, limit, |start, end| {
        (start..=end).all(|i| (i + 1..=end).all(|j| dist(i, j) <= eps))
    })
}

fn scan_windows(
    len: usize,
    eps: f64,
    g: &Counterfunction,
    limit: u64,
    window_ok: impl Fn(usize, usize) -> bool,
) -> Result<Option<usize>> {
    positive("eps", eps)?;
    g.validate()?;
    let too_short = |required| Error::InsufficientLength { required, available: len };
    let mut n = 0usize;
    while (n as u64) <= limit {
        let end = g
            .eval_usize(n)
            .and_then(|span| n.checked_add(span))
            .ok_or_else(|| too_short(usize::MAX))?;
        if end >= len {
            return Err(too_short(end + 1));
        }
        if window_ok(n, end) {
            return Ok(Some(n));
        }
        n += 1;
    }
    Ok(None)
}
