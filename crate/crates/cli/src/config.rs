//! Scenario configuration schema.

use std::path::{Path, PathBuf};

use proxcat_core::checkers::DEFAULT_TOL;
use proxcat_core::engine::StepSchedule;
use proxcat_core::rates::{Counterfunction, DivergenceModulus, Modulus};
use proxcat_core::resolvents::{Family, NonexpansiveMap, ResolventFamily, SelfMap};
use proxcat_core::{Point, Space};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Ppa,
    Curve,
    Rates,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Ppa => "ppa",
            Command::Curve => "curve",
            Command::Rates => "rates",
        }
    }
}

/// Families outside the resolvent catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtraFamily {
    /// `T_γ x = (1 + γ)x`.
    Expansive,
    /// The same map for every `γ`.
    FixedMap { map: NonexpansiveMap },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Catalog(ResolventFamily),
    Extra(ExtraFamily),
}

impl FamilySpec {
    pub fn validate(&self, space: &Space) -> Result<(), CliError> {
        match self {
            FamilySpec::Catalog(f) => f.validate(space)?,
            FamilySpec::Extra(ExtraFamily::Expansive) => {
                if !matches!(space, Space::Euclidean { .. }) {
                    return Err(CliError::Config("expansive family needs a Euclidean space".into()));
                }
            }
            FamilySpec::Extra(ExtraFamily::FixedMap { map }) => {
                let probe = match space {
                    Space::Euclidean { dim } => Point::euclidean(vec![0.0; *dim]),
                    Space::HalfPlane => Point::half_plane(0.0, 1.0),
                    Space::Spider { .. } => Point::hub(),
                };
                map.apply(space, &probe)?;
            }
        }
        Ok(())
    }

    pub fn catalog(&self) -> Option<&ResolventFamily> {
        match self {
            FamilySpec::Catalog(f) => Some(f),
            FamilySpec::Extra(_) => None,
        }
    }
}

impl Family for FamilySpec {
    fn apply(&self, space: &Space, gamma: f64, x: &Point) -> proxcat_core::Result<Point> {
        match self {
            FamilySpec::Catalog(f) => f.apply(space, gamma, x),
            FamilySpec::Extra(ExtraFamily::Expansive) => proxcat_core::resolvents::ExpansiveFamily.apply(space, gamma, x),
            FamilySpec::Extra(ExtraFamily::FixedMap { map }) => map.apply(space, x),
        }
    }

    fn name(&self) -> String {
        match self {
            FamilySpec::Catalog(f) => f.name(),
            FamilySpec::Extra(ExtraFamily::Expansive) => "expansive".into(),
            FamilySpec::Extra(ExtraFamily::FixedMap { .. }) => "fixed_map".into(),
        }
    }
}

/// One space/family combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub space: Space,
    pub family: FamilySpec,
    /// Overrides the scenario sampling base point for this target.
    #[serde(default)]
    pub base: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default)]
    pub seed: u64,
    pub count: usize,
    pub radius: f64,
    /// Center of the sampling ball; defaults to the origin, `(0, 1)` or the hub.
    #[serde(default)]
    pub base: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Normalized violation tolerance of sampled checks.
    #[serde(default = "default_tol")]
    pub check: f64,
    /// Absolute slack on continuity distances.
    #[serde(default = "default_tol")]
    pub continuity: f64,
    /// Tolerance of the curve growth inequality.
    #[serde(default = "default_tol")]
    pub growth: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { check: DEFAULT_TOL, continuity: DEFAULT_TOL, growth: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Metric identities and inequalities of `spaces` and of every target space.
    Geometry {
        #[serde(default)]
        spaces: Vec<Space>,
    },
    Nonexpansive { gammas: Vec<f64> },
    ResolventIdentity { gammas: Vec<f64> },
    MutualFne { pairs: Vec<(f64, f64)> },
    MutualP2 { pairs: Vec<(f64, f64)> },
    /// Nonexpansiveness and resolvent identity per `γ`, mutual FNE per pair.
    Equivalence { gammas: Vec<f64>, pairs: Vec<(f64, f64)> },
    /// Pairs must satisfy `λ <= μ`.
    Halp { pairs: Vec<(f64, f64)> },
    /// Modulus `scale·φ` on `B(center, b)`; `scale` defaults to `γ`.
    UniformP2 {
        gammas: Vec<f64>,
        center: Point,
        b: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    /// `z` must be a fixed point; `scale` defaults to `γ`.
    UniqLemma {
        gammas: Vec<f64>,
        z: Point,
        #[serde(default)]
        scale: Option<f64>,
    },
    FixedPoints { gammas: Vec<f64>, points: Vec<Point> },
    BallInvariance { gammas: Vec<f64>, center: Point, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpaSpec {
    pub x0: Point,
    /// Reference fixed point; defaults to the projection of `x0` onto the fixed set.
    #[serde(default)]
    pub p: Option<Point>,
    /// Defaults to one more than the largest rate bound.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Radius of the ball `C = B(p, b)`; defaults to `d(x0, p)`.
    #[serde(default)]
    pub b: Option<f64>,
    /// Divergence modulus; defaults to the one derived from the schedule.
    #[serde(default)]
    pub theta: Option<DivergenceModulus>,
    /// Write every k-th row of the trace CSV (the last row is always written).
    #[serde(default = "one")]
    pub csv_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaGrid {
    Explicit { values: Vec<f64> },
    Geometric { start: f64, ratio: f64, count: usize },
    /// `count` log-spaced values from `start` to `end`, both included.
    LogSpaced { start: f64, end: f64, count: usize },
}

impl GammaGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GammaGrid::Explicit { values } => Ok(values.clone()),
            GammaGrid::Geometric { start, ratio, count } => Ok(proxcat_core::engine::geometric_grid(*start, *ratio, *count)?),
            GammaGrid::LogSpaced { start, end, count } => {
                if !(*start > 0.0 && end > start && *count >= 2) {
                    return Err(CliError::Config(format!("log-spaced grid needs 0 < start < end and count >= 2, got {start}, {end}, {count}")));
                }
                let (a, b) = (start.ln(), end.ln());
                let last = (*count - 1) as f64;
                Ok((0..*count)
                    .map(|k| match k {
                        0 => *start,
                        k if k == *count - 1 => *end,
                        k => (a + (b - a) * k as f64 / last).exp(),
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuitySpec {
    pub gamma_min: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    /// Base point; when absent, `sampling.count` base points are drawn from the sampling ball.
    #[serde(default)]
    pub x: Option<Point>,
    pub gammas: GammaGrid,
    /// Checks `d(T_{γ_max}x, P_F x) <= limit_eps` when set.
    #[serde(default)]
    pub limit_eps: Option<f64>,
    /// Metastability over `eps_list × g` when true.
    #[serde(default)]
    pub metastability: bool,
    #[serde(default)]
    pub continuity: Option<ContinuitySpec>,
    /// Write curve CSVs for the first k base points only.
    #[serde(default)]
    pub csv_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    Qmcp { b: f64, eps: f64, g: Counterfunction, expect: Option<String> },
    CurveMetastability { b: f64, eps: f64, g: Counterfunction, expect: Option<String> },
    Kp { theta: DivergenceModulus, b: f64, phi: Modulus, eps: f64, expect: Option<String> },
    PpaRate { theta: DivergenceModulus, b: f64, phi: Modulus, eps: f64, expect: Option<String> },
    Gtilde { g: Counterfunction, k: u64, expect: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneSpec {
    /// Sequences per `(b, g)` combination.
    pub count: usize,
    pub b_list: Vec<f64>,
    /// `ε` is drawn uniformly from `[eps_min·b, b]`.
    pub eps_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSpec {
    #[serde(default)]
    pub evaluations: Vec<BoundSpec>,
    #[serde(default)]
    pub monotone: Option<MonotoneSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub command: Command,
    #[serde(default)]
    pub space: Option<Space>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// Additional space/family combinations, run in order after `space`/`family`.
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default)]
    pub schedule: Option<StepSchedule>,
    #[serde(default)]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    /// Counterfunctions for metastability checks.
    #[serde(default)]
    pub g: Vec<Counterfunction>,
    #[serde(default)]
    pub phi: Option<Modulus>,
    /// Output directory; defaults to `out/<name>`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub ppa: Option<PpaSpec>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    #[serde(default)]
    pub rates: Option<RatesSpec>,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// All space/family combinations.
    pub fn all_targets(&self) -> Vec<Target> {
        let mut out = Vec::new();
        if let (Some(space), Some(family)) = (self.space, &self.family) {
            out.push(Target { space, family: family.clone(), base: None });
        }
        out.extend(self.targets.iter().cloned());
        out
    }

    pub fn eps(&self) -> Result<&[f64], CliError> {
        match &self.eps_list {
            Some(list) => Ok(list),
            None => config_err("eps_list is required"),
        }
    }

    pub fn sampling(&self) -> Result<&Sampling, CliError> {
        self.sampling.as_ref().ok_or_else(|| CliError::Config("sampling is required".into()))
    }

    pub fn phi(&self) -> Result<&Modulus, CliError> {
        self.phi.as_ref().ok_or_else(|| CliError::Config("phi is required".into()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return config_err(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return config_err("name must be non-empty and contain no path separators");
        }
        if self.family.is_some() && self.space.is_none() {
            return config_err("family needs a space");
        }
        if let Some(list) = &self.eps_list {
            if list.is_empty() {
                return config_err("eps_list is empty");
            }
            if list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return config_err("eps_list entries must be finite and > 0");
            }
        }
        for g in &self.g {
            g.validate()?;
        }
        if let Some(phi) = &self.phi {
            phi.validate()?;
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        for (name, tol) in [
            ("tolerances.check", self.tolerances.check),
            ("tolerances.continuity", self.tolerances.continuity),
            ("tolerances.growth", self.tolerances.growth),
        ] {
            if !(tol >= 0.0 && tol.is_finite()) {
                return config_err(format!("{name} must be finite and >= 0"));
            }
        }
        let targets = self.all_targets();
        for t in &targets {
            t.space.validate()?;
            t.family.validate(&t.space)?;
        }
        match self.command {
            Command::Check => {
                if self.checks.is_empty() {
                    return config_err("check command needs a non-empty checks list");
                }
                if targets.is_empty() && self.checks.iter().any(|c| !matches!(c, CheckSpec::Geometry { .. })) {
                    return config_err("family checks need space and family or targets");
                }
                for c in &self.checks {
                    if let CheckSpec::Geometry { spaces } = c {
                        if spaces.is_empty() && self.space.is_none() && self.targets.is_empty() {
                            return config_err("geometry check needs a space");
                        }
                        for s in spaces {
                            s.validate()?;
                        }
                    }
                }
                self.sampling()?;
                if self.checks.iter().any(|c| matches!(c, CheckSpec::UniformP2 { .. } | CheckSpec::UniqLemma { .. })) {
                    self.eps()?;
                    self.phi()?;
                }
                for c in &self.checks {
                    if let CheckSpec::Halp { pairs } = c {
                        if pairs.iter().any(|(l, m)| l > m) {
                            return config_err("halp pairs need λ <= μ");
                        }
                    }
                }
            }
            Command::Ppa => {
                if targets.len() != 1 {
                    return config_err("ppa command needs exactly one space/family");
                }
                let Some(ppa) = &self.ppa else { return config_err("ppa section is required") };
                if self.schedule.is_none() {
                    return config_err("schedule is required");
                }
                self.eps()?;
                self.phi()?;
                self.sampling()?;
                if ppa.csv_every == 0 {
                    return config_err("csv_every must be >= 1");
                }
                if ppa.steps == Some(0) {
                    return config_err("steps must be >= 1");
                }
            }
            Command::Curve => {
                if targets.is_empty() {
                    return config_err("curve command needs space and family or targets");
                }
                let Some(curve) = &self.curve else { return config_err("curve section is required") };
                if curve.x.is_none() {
                    self.sampling()?;
                }
                if curve.metastability {
                    self.eps()?;
                    if self.g.is_empty() {
                        return config_err("metastability needs a non-empty g list");
                    }
                }
                if curve.continuity.is_some() {
                    self.eps()?;
                }
                curve.gammas.values()?;
            }
            Command::Rates => {
                let Some(rates) = &self.rates else { return config_err("rates section is required") };
                if rates.evaluations.is_empty() && rates.monotone.is_none() {
                    return config_err("rates section is empty");
                }
                if let Some(m) = &rates.monotone {
                    if self.g.is_empty() {
                        return config_err("monotone sequences need a non-empty g list");
                    }
                    if m.b_list.is_empty() || m.b_list.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
                        return config_err("b_list entries must be finite and > 0");
                    }
                    if !(m.eps_min > 0.0 && m.eps_min <= 1.0) {
                        return config_err("eps_min must lie in (0, 1]");
                    }
                    self.sampling()?;
                }
            }
        }
        Ok(())
    }
}

/// Default sampling center of a space.
pub fn default_base(space: &Space) -> Point {
    match space {
        Space::Euclidean { dim } => Point::euclidean(vec![0.0; *dim]),
        Space::HalfPlane => Point::half_plane(0.0, 1.0),
        Space::Spider { .. } => Point::hub(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PPA: &str = r#"{
        "schema_version": 1, "name": "t", "command": "ppa",
        "space": {"kind": "euclidean", "dim": 1},
        "family": {"kind": "prox_scaled_squared_norm", "c": 1.0},
        "schedule": {"kind": "constant", "c": 1.0},
        "sampling": {"seed": 1, "count": 10, "radius": 1.0},
        "eps_list": [1.0, 0.5],
        "phi": {"kind": "quadratic", "c": 1.0},
        "ppa": {"x0": {"kind": "euclidean", "coords": [1.0]}}
    }"#;

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(PPA).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn config_error(text: &str) -> String {
        match ScenarioConfig::from_json(text) {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_ppa() {
        let c = ScenarioConfig::from_json(PPA).unwrap();
        assert_eq!(c.command, Command::Ppa);
        assert_eq!(c.eps().unwrap(), &[1.0, 0.5]);
        assert_eq!(c.all_targets().len(), 1);
        assert_eq!(c.ppa.as_ref().unwrap().csv_every, 1);
        assert_eq!(c.output_dir(), PathBuf::from("out/t"));
    }

    #[test]
    fn empty_eps_list_is_rejected() {
        let msg = config_error(&edit(|v| v["eps_list"] = serde_json::json!([])));
        assert!(msg.contains("eps_list"), "{msg}");
        assert_eq!(CliError::Config(msg).exit_code(), 2);
    }

    #[test]
    fn unknown_family_kind_is_rejected() {
        config_error(&edit(|v| v["family"] = serde_json::json!({"kind": "no_such_family"})));
    }

    #[test]
    fn parse_errors_carry_position() {
        let msg = config_error("{\n  \"schema_version\": 1,\n  \"name\": }");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let msg = config_error(&edit(|v| v["schema_version"] = serde_json::json!(2)));
        assert!(msg.contains("schema_version"), "{msg}");
    }

    #[test]
    fn ppa_needs_schedule() {
        let msg = config_error(&edit(|v| {
            v.as_object_mut().unwrap().remove("schedule");
        }));
        assert!(msg.contains("schedule"), "{msg}");
    }

    #[test]
    fn halp_pairs_must_be_ordered() {
        let text = r#"{
            "schema_version": 1, "name": "h", "command": "check",
            "space": {"kind": "euclidean", "dim": 1},
            "family": {"kind": "prox_scaled_squared_norm", "c": 1.0},
            "sampling": {"seed": 1, "count": 10, "radius": 1.0},
            "checks": [{"kind": "halp", "pairs": [[2.0, 1.0]]}]
        }"#;
        assert!(config_error(text).contains("λ <= μ"));
    }

    #[test]
    fn names_with_separators_are_rejected() {
        config_error(&edit(|v| v["name"] = serde_json::json!("../escape")));
    }

    #[test]
    fn log_spaced_grid_hits_endpoints() {
        let g = GammaGrid::LogSpaced { start: 0.01, end: 100.0, count: 5 }.values().unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[4] - 100.0).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-12);
    }
}
