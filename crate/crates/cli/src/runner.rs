use std::path::{Path, PathBuf};

use log::{debug, info};
use num_bigint::BigUint;
use proxcat_core::checkers::{self, SampleConfig, ViolationReport};
use proxcat_core::engine::{self, PpaRun, RateVerifier};
use proxcat_core::rates::{self, Counterfunction};
use proxcat_core::resolvents::{Family, FixedSet};
use proxcat_core::sampling::{substream, substream_seed};
use proxcat_core::{Point, Space};
use rand::Rng;

use crate::config::{default_base, BoundSpec, CheckSpec, Command, ScenarioConfig, Target};
use crate::output::{format_number, opt_number, write_checks_csv, write_report, CsvOut};
use crate::{CheckLine, CliError, RateLine, RunReport};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Must match the config's command when set.
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads, runs and writes one scenario.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut config = ScenarioConfig::from_path(path)?;
    if let Some(cmd) = opts.command {
        if cmd != config.command {
            return Err(CliError::Config(format!(
                "{} declares command {}, not {}",
                path.display(),
                config.command.as_str(),
                cmd.as_str()
            )));
        }
    }
    if let (Some(seed), Some(s)) = (opts.seed, config.sampling.as_mut()) {
        s.seed = seed;
    }
    let out = opts.out.clone().unwrap_or_else(|| config.output_dir());
    run_config(&config, &out)
}

/// Runs a validated config, writing outputs into `out_dir`.
pub fn run_config(config: &ScenarioConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    info!("scenario {} ({}) -> {}", config.name, config.command.as_str(), out_dir.display());
    let mut run = Run { config, out_dir, checks: Vec::new(), rates: Vec::new(), files: Vec::new() };
    match config.command {
        Command::Check => run.check()?,
        Command::Ppa => run.ppa()?,
        Command::Curve => run.curve()?,
        Command::Rates => run.rates()?,
    }
    if !run.checks.is_empty() {
        write_checks_csv(&out_dir.join("checks.csv"), &run.checks)?;
        run.files.push("checks.csv".into());
    }
    run.files.push("report.json".into());
    let report = RunReport {
        schema_version: config.schema_version,
        name: config.name.clone(),
        command: config.command,
        seed: config.sampling.as_ref().map(|s| s.seed),
        pass: run.checks.iter().all(|c| c.pass) && run.rates.iter().all(|r| r.pass),
        checks: run.checks,
        rates: run.rates,
        files: run.files,
        out_dir: out_dir.to_path_buf(),
    };
    write_report(&out_dir.join("report.json"), &report)?;
    Ok(report)
}

struct Run<'a> {
    config: &'a ScenarioConfig,
    out_dir: &'a Path,
    checks: Vec<CheckLine>,
    rates: Vec<RateLine>,
    files: Vec<String>,
}

fn space_label(space: &Space) -> String {
    match space {
        Space::Euclidean { dim } => format!("euclidean{dim}"),
        Space::HalfPlane => "half_plane".into(),
        Space::Spider { rays } => format!("spider{rays}"),
    }
}

fn target_label(t: &Target) -> String {
    format!("{}@{}", t.family.name(), space_label(&t.space))
}

fn fixed_set_of(t: &Target) -> FixedSet {
    t.family.catalog().map_or(FixedSet::Unknown, |f| f.fixed_set(&t.space))
}

impl Run<'_> {
    fn push_report(&mut self, prefix: &str, r: ViolationReport) {
        let name = if prefix.is_empty() { r.check } else { format!("{prefix}:{}", r.check) };
        debug!("{name}: max violation {:e} over {}", r.max_violation, r.checked);
        self.checks.push(CheckLine {
            name,
            max_violation: r.max_violation,
            tolerance: r.tolerance,
            checked: r.checked,
            pass: r.pass,
            witness: r.worst_witness,
        });
    }

    fn sample_config(&self, space: &Space, base: Option<&Point>) -> Result<SampleConfig, CliError> {
        let s = self.config.sampling()?;
        let base = base.or(s.base.as_ref()).cloned().unwrap_or_else(|| default_base(space));
        Ok(SampleConfig::new(s.seed, s.count, s.radius, base))
    }

    fn check(&mut self) -> Result<(), CliError> {
        let config = self.config;
        let tol = config.tolerances.check;
        if let Some(CheckSpec::Geometry { spaces: listed }) = config.checks.iter().find(|c| matches!(c, CheckSpec::Geometry { .. })) {
            let mut spaces: Vec<Space> = Vec::new();
            for s in listed.iter().chain(&config.space).chain(config.targets.iter().map(|t| &t.space)) {
                if !spaces.contains(s) {
                    spaces.push(*s);
                }
            }
            for space in spaces {
                let cfg = self.sample_config(&space, None)?;
                for r in checkers::check_geometry(&space, &cfg, tol)? {
                    self.push_report(&space_label(&space), r);
                }
            }
        }
        for target in config.all_targets() {
            let (space, fam) = (&target.space, &target.family);
            let cfg = self.sample_config(space, target.base.as_ref())?;
            let label = target_label(&target);
            info!("checking {label}");
            for spec in &config.checks {
                match spec {
                    CheckSpec::Geometry { .. } => {}
                    CheckSpec::Nonexpansive { gammas } => {
                        for &g in gammas {
                            let mut r = checkers::check_nonexpansive(space, &fam.at(g), &cfg, tol)?;
                            r.check = format!("nonexpansive[γ={g}]");
                            self.push_report(&label, r);
                        }
                    }
                    CheckSpec::ResolventIdentity { gammas } => {
                        for &g in gammas {
                            let mut r = checkers::check_resolvent_identity(space, fam, g, &cfg, tol)?;
                            r.check = format!("resolvent_identity[γ={g}]");
                            self.push_report(&label, r);
                        }
                    }
                    CheckSpec::MutualFne { pairs } => {
                        for &(l, m) in pairs {
                            let mut r = checkers::check_mutual_fne(space, &fam.at(l), &fam.at(m), l, m, &cfg, tol)?;
                            r.check = format!("mutual_fne[λ={l},μ={m}]");
                            self.push_report(&label, r);
                        }
                    }
                    CheckSpec::MutualP2 { pairs } => {
                        for &(l, m) in pairs {
                            let mut r = checkers::check_mutual_p2(space, &fam.at(l), &fam.at(m), l, m, &cfg, tol)?;
                            r.check = format!("mutual_p2[λ={l},μ={m}]");
                            self.push_report(&label, r);
                        }
                    }
                    CheckSpec::Equivalence { gammas, pairs } => {
                        for r in checkers::equivalence_suite(space, fam, gammas, pairs, &cfg, tol)? {
                            self.push_report(&label, r);
                        }
                    }
                    CheckSpec::Halp { pairs } => {
                        for &(l, m) in pairs {
                            let mut r = checkers::check_halp(space, &fam.at(l), &fam.at(m), &cfg, tol)?;
                            r.check = format!("halp[λ={l},μ={m}]");
                            self.push_report(&label, r);
                        }
                    }
                    CheckSpec::UniformP2 { gammas, center, b, scale } => {
                        for &g in gammas {
                            let reports = checkers::check_uniform_p2(
                                space,
                                &fam.at(g),
                                center,
                                *b,
                                config.phi()?,
                                scale.unwrap_or(g),
                                &cfg,
                                tol,
                                config.eps()?,
                            )?;
                            for mut r in reports {
                                r.check = format!("uniform_p2[γ={g},ε={}]", r.eps.unwrap_or_default());
                                self.push_report(&label, r);
                            }
                        }
                    }
                    CheckSpec::UniqLemma { gammas, z, scale } => {
                        for &g in gammas {
                            let reports = checkers::check_uniq_lemma(
                                space,
                                &fam.at(g),
                                z,
                                &cfg,
                                config.phi()?,
                                scale.unwrap_or(g),
                                config.eps()?,
                                tol,
                            )?;
                            for mut r in reports {
                                r.check = format!("uniq_lemma[γ={g},ε={}]", r.eps.unwrap_or_default());
                                self.push_report(&label, r);
                            }
                        }
                    }
                    CheckSpec::FixedPoints { gammas, points } => {
                        let r = checkers::check_fixed_points(space, fam, gammas, points, tol)?;
                        self.push_report(&label, r);
                    }
                    CheckSpec::BallInvariance { gammas, center, b } => {
                        let r = engine::check_ball_invariance(space, fam, gammas, center, *b, &cfg, tol)?;
                        self.push_report(&label, r);
                    }
                }
            }
        }
        Ok(())
    }

    fn ppa(&mut self) -> Result<(), CliError> {
        let config = self.config;
        let target = &config.all_targets()[0];
        let (space, fam) = (&target.space, &target.family);
        let spec = config.ppa.as_ref().expect("validated");
        let schedule = config.schedule.as_ref().expect("validated");
        let p = match &spec.p {
            Some(p) => p.clone(),
            None => engine::project_fixed_set(space, &fixed_set_of(target), &spec.x0)?,
        };
        let d0 = space.dist(&spec.x0, &p)?;
        let b = spec.b.unwrap_or(d0);
        if !(b >= 0.0 && b.is_finite()) {
            return Err(CliError::Config(format!("ball radius {b} must be finite and >= 0")));
        }
        let slack = 1e-12 * (1.0 + b);
        self.checks.push(CheckLine {
            name: "x0_in_ball".into(),
            max_violation: d0 - b,
            tolerance: slack,
            checked: 1,
            pass: d0 <= b + slack,
            witness: None,
        });

        let theta = match &spec.theta {
            Some(t) => t.clone(),
            None => engine::theta_for_schedule(schedule)?,
        };
        let mut verifier = RateVerifier::new(&theta, b, config.phi()?, config.eps()?)?;
        let max_bound = usize::try_from(verifier.max_bound())
            .map_err(|_| CliError::Config("rate bound exceeds the addressable trace length".into()))?;
        let steps = spec.steps.unwrap_or(max_bound.max(1));
        info!("ppa: {steps} steps, largest rate bound {max_bound}");

        // T_n(C) ⊆ C on the first members of the schedule
        let probe: Vec<f64> = (0..steps.min(16)).map(|n| schedule.gamma(n)).collect::<proxcat_core::Result<_>>()?;
        let mut gammas = probe.clone();
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        if b > 0.0 {
            let cfg = self.sample_config(space, Some(&p))?;
            let r = engine::check_ball_invariance(space, fam, &gammas, &p, b, &cfg, config.tolerances.check)?;
            self.push_report("", r);
        } else {
            let r = checkers::check_fixed_points(space, fam, &gammas, std::slice::from_ref(&p), config.tolerances.check)?;
            self.push_report("", r);
        }

        let mut csv = CsvOut::create(&self.out_dir.join("trace.csv"), &["n", "gamma_n", "d_to_p", "step"])?;
        let mut run = PpaRun::new(space, fam, schedule, spec.x0.clone(), Some(&p))?;
        let mut max_d = 0.0f64;
        for n in 0..steps {
            let row = run.step()?;
            let d = row.d_to_p.expect("reference point supplied");
            max_d = max_d.max(d);
            verifier.push(d);
            if n % spec.csv_every == 0 || n + 1 == steps {
                csv.row(&[n.to_string(), format_number(row.gamma), opt_number(row.d_to_p), format_number(row.step)])?;
            }
        }
        let last = run.current_d_to_p().expect("reference point supplied");
        max_d = max_d.max(last);
        verifier.push(last);
        csv.finish()?;
        self.files.push("trace.csv".into());

        self.checks.push(CheckLine {
            name: "trace_in_ball".into(),
            max_violation: max_d - b,
            tolerance: slack,
            checked: steps + 1,
            pass: max_d <= b + slack,
            witness: None,
        });
        for c in verifier.finish()? {
            self.rates.push(RateLine {
                name: format!("ppa_rate[ε={}]", c.eps),
                eps: Some(c.eps),
                bound: c.bound.to_string(),
                value: c.first_violation.map(|n| n.to_string()),
                margin: Some(c.margin),
                pass: c.pass,
            });
        }
        Ok(())
    }

    fn curve(&mut self) -> Result<(), CliError> {
        let config = self.config;
        let spec = config.curve.as_ref().expect("validated");
        let gammas = spec.gammas.values()?;
        let gamma_max = *gammas.last().expect("validated grid");
        let targets = config.all_targets();
        for (ti, target) in targets.iter().enumerate() {
            let (space, fam) = (&target.space, &target.family);
            let label = target_label(target);
            let bases: Vec<Point> = match &spec.x {
                Some(x) => vec![x.clone()],
                None => {
                    let cfg = self.sample_config(space, target.base.as_ref())?;
                    (0..cfg.count)
                        .map(|i| space.sample_ball(&mut substream(cfg.seed, i as u64), &cfg.base, cfg.radius))
                        .collect::<proxcat_core::Result<_>>()?
                }
            };
            info!("curve {label}: {} base points, {} orders", bases.len(), gammas.len());
            let fixed = fixed_set_of(target);
            let mut agg = CurveAggregate::new(config, spec.continuity.is_some(), spec.limit_eps);
            for (bi, x) in bases.iter().enumerate() {
                let samples = engine::sample_curve(space, fam, x, &gammas)?;
                let limit = match &fixed {
                    FixedSet::Set { set } => Some(set.project(space, x)?),
                    _ => None,
                };
                let d_to_limit: Vec<Option<f64>> =
                    samples.iter().map(|s| limit.as_ref().map(|l| space.dist(&s.point, l)).transpose()).collect::<Result<_, _>>()?;
                if bi < spec.csv_points.unwrap_or(usize::MAX) {
                    let file = if targets.len() == 1 && bases.len() == 1 {
                        "curve.csv".to_string()
                    } else {
                        format!("curve-{ti:02}-{bi:03}.csv")
                    };
                    let mut csv = CsvOut::create(&self.out_dir.join(&file), &["gamma", "d_from_base", "d_to_limit"])?;
                    for (s, dl) in samples.iter().zip(&d_to_limit) {
                        csv.row(&[format_number(s.gamma), format_number(s.d_from_base), opt_number(*dl)])?;
                    }
                    csv.finish()?;
                    self.files.push(file);
                }

                agg.growth.absorb(bi, engine::check_curve_growth(space, x, &samples, config.tolerances.growth)?);
                let b = samples.iter().map(|s| s.d_from_base).fold(0.0, f64::max);
                if let Some(eps) = spec.limit_eps {
                    let Some(l) = &limit else {
                        return Err(CliError::Config(format!("{label}: fixed set has no analytic projection")));
                    };
                    let c = engine::verify_curve_limit(space, &samples, l, eps)?;
                    agg.limit.absorb_value(bi, c.distance - eps, c.pass);
                }
                if spec.metastability {
                    for (k, (eps, g)) in agg.meta_keys.iter().enumerate() {
                        let c = engine::verify_curve_metastability(space, &samples, b, *eps, g)?;
                        agg.meta[k].absorb(c.witness, &c.bound, c.pass);
                    }
                }
                if let Some(cont) = &spec.continuity {
                    for (k, &eps) in config.eps()?.iter().enumerate() {
                        let seed = substream_seed(config.sampling.as_ref().map_or(0, |s| s.seed), bi as u64);
                        let r = engine::check_curve_continuity(
                            space,
                            fam,
                            x,
                            cont.gamma_min,
                            gamma_max,
                            b,
                            eps,
                            cont.samples,
                            seed,
                            config.tolerances.continuity,
                        )?;
                        agg.continuity[k].absorb(bi, r);
                    }
                }
            }
            agg.emit(self, &label);
        }
        Ok(())
    }

    fn rates(&mut self) -> Result<(), CliError> {
        let config = self.config;
        let spec = config.rates.as_ref().expect("validated");
        for (i, e) in spec.evaluations.iter().enumerate() {
            let (name, value, expect) = match e {
                BoundSpec::Qmcp { b, eps, g, expect } => {
                    (format!("qmcp[b={b},ε={eps},g={}]", g.describe()), rates::qmcp_bound(*b, *eps, g)?.to_string(), expect)
                }
                BoundSpec::CurveMetastability { b, eps, g, expect } => (
                    format!("curve_metastability[b={b},ε={eps},g={}]", g.describe()),
                    rates::curve_metastability_bound(*b, *eps, g)?.to_string(),
                    expect,
                ),
                BoundSpec::Kp { theta, b, phi, eps, expect } => {
                    (format!("kp[b={b},ε={eps}]"), rates::kp_bound(theta, *b, phi, *eps)?.to_string(), expect)
                }
                BoundSpec::PpaRate { theta, b, phi, eps, expect } => {
                    (format!("ppa_rate[b={b},ε={eps}]"), rates::ppa_rate_bound(theta, *b, phi, *eps)?.to_string(), expect)
                }
                BoundSpec::Gtilde { g, k, expect } => {
                    (format!("gtilde[g={},k={k}]", g.describe()), rates::gtilde_iterate(g, *k)?.to_string(), expect)
                }
            };
            debug!("evaluation {i}: {name} = {value}");
            self.rates.push(RateLine {
                name,
                eps: None,
                pass: expect.as_ref().is_none_or(|x| *x == value),
                bound: value,
                value: expect.clone(),
                margin: None,
            });
        }
        if let Some(m) = &spec.monotone {
            let seed = config.sampling()?.seed;
            let mut stream = 0u64;
            for &b in &m.b_list {
                for g in &config.g {
                    let mut worst_witness = 0usize;
                    let mut max_bound = 0u64;
                    let mut failures = 0usize;
                    for _ in 0..m.count {
                        let mut rng = substream(seed, stream);
                        stream += 1;
                        let eps = b * (m.eps_min + (1.0 - m.eps_min) * rng.random::<f64>());
                        let bound = monotone_bound(b, eps, g)?;
                        let values = monotone_sequence(&mut rng, b, eps, g, bound);
                        match rates::find_metastable_witness(&values, eps, g, bound)? {
                            Some(n) => worst_witness = worst_witness.max(n),
                            None => failures += 1,
                        }
                        max_bound = max_bound.max(bound);
                    }
                    self.rates.push(RateLine {
                        name: format!("monotone[b={b},g={},sequences={}]", g.describe(), m.count),
                        eps: None,
                        bound: max_bound.to_string(),
                        value: Some(if failures == 0 { worst_witness.to_string() } else { format!("{failures} without witness") }),
                        margin: None,
                        pass: failures == 0,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Sequences longer than this are not generated.
const MAX_SEQUENCE_LEN: u64 = 1 << 24;

fn monotone_bound(b: f64, eps: f64, g: &Counterfunction) -> Result<u64, CliError> {
    let bound = rates::qmcp_bound(b, eps, g)?;
    u64::try_from(&bound)
        .ok()
        .filter(|&v| v <= MAX_SEQUENCE_LEN)
        .ok_or_else(|| CliError::Config(format!("bound {bound} for b={b}, ε={eps} is too large to test; raise eps_min")))
}

/// A nondecreasing sequence in `[0, b]` long enough to hold every window
/// `[N, N + g(N)]` with `N <= bound`. Even streams are sorted uniform draws;
/// odd streams are staircases whose jumps sit just above `ε`.
fn monotone_sequence<R: Rng>(rng: &mut R, b: f64, eps: f64, g: &Counterfunction, bound: u64) -> Vec<f64> {
    let n = bound as usize;
    let len = n + g.eval_usize(n).unwrap_or(0) + 1;
    if rng.random::<bool>() {
        let mut v: Vec<f64> = (0..len).map(|_| b * rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        v
    } else {
        let mut level = 0.0f64;
        (0..len)
            .map(|_| {
                if rng.random::<f64>() < 0.3 {
                    level = (level + eps * (1.0 + 0.2 * rng.random::<f64>())).min(b);
                }
                level
            })
            .collect()
    }
}

/// Aggregates of a per-base-point quantity: worst value and its base index.
#[derive(Default)]
struct Worst {
    value: Option<(f64, usize)>,
    checked: usize,
    pass: bool,
    tol: f64,
    witness: Option<proxcat_core::checkers::Witness>,
}

impl Worst {
    fn new() -> Self {
        Worst { pass: true, ..Default::default() }
    }

    fn absorb(&mut self, index: usize, r: ViolationReport) {
        self.checked += r.checked;
        self.pass &= r.pass;
        self.tol = r.tolerance;
        if self.value.is_none_or(|(w, _)| r.max_violation > w) {
            self.value = Some((r.max_violation, index));
            self.witness = r.worst_witness;
        }
    }

    fn absorb_value(&mut self, index: usize, v: f64, pass: bool) {
        self.checked += 1;
        self.pass &= pass;
        if self.value.is_none_or(|(w, _)| v > w) {
            self.value = Some((v, index));
        }
    }

    fn line(self, name: String) -> CheckLine {
        CheckLine {
            name,
            max_violation: self.value.map_or(0.0, |v| v.0),
            tolerance: self.tol,
            checked: self.checked,
            pass: self.pass,
            witness: self.witness,
        }
    }
}

#[derive(Default)]
struct MetaAggregate {
    cases: usize,
    failures: usize,
    max_witness: Option<usize>,
    max_bound: Option<BigUint>,
}

impl MetaAggregate {
    fn absorb(&mut self, witness: Option<usize>, bound: &str, pass: bool) {
        self.cases += 1;
        if !pass {
            self.failures += 1;
        }
        if let Some(w) = witness {
            self.max_witness = Some(self.max_witness.map_or(w, |m| m.max(w)));
        }
        let b: BigUint = bound.parse().expect("decimal bound");
        if self.max_bound.as_ref().is_none_or(|m| b > *m) {
            self.max_bound = Some(b);
        }
    }
}

struct CurveAggregate {
    growth: Worst,
    limit: Worst,
    has_limit: bool,
    meta_keys: Vec<(f64, Counterfunction)>,
    meta: Vec<MetaAggregate>,
    eps: Vec<f64>,
    continuity: Vec<Worst>,
}

impl CurveAggregate {
    fn new(config: &ScenarioConfig, continuity: bool, limit_eps: Option<f64>) -> Self {
        let eps: Vec<f64> = config.eps_list.clone().unwrap_or_default();
        let spec = config.curve.as_ref().expect("validated");
        let meta_keys: Vec<(f64, Counterfunction)> = if spec.metastability {
            eps.iter().flat_map(|&e| config.g.iter().map(move |g| (e, g.clone()))).collect()
        } else {
            Vec::new()
        };
        let mut limit = Worst::new();
        limit.tol = 0.0;
        CurveAggregate {
            growth: Worst::new(),
            limit,
            has_limit: limit_eps.is_some(),
            meta: meta_keys.iter().map(|_| MetaAggregate::default()).collect(),
            meta_keys,
            continuity: if continuity { eps.iter().map(|_| Worst::new()).collect() } else { Vec::new() },
            eps,
        }
    }

    fn emit(self, run: &mut Run<'_>, label: &str) {
        run.checks.push(self.growth.line(format!("{label}:curve_growth")));
        if self.has_limit {
            run.checks.push(self.limit.line(format!("{label}:curve_limit")));
        }
        for (w, eps) in self.continuity.into_iter().zip(&self.eps) {
            run.checks.push(w.line(format!("{label}:curve_continuity[ε={eps}]")));
        }
        for ((eps, g), m) in self.meta_keys.iter().zip(self.meta) {
            run.rates.push(RateLine {
                name: format!("{label}:curve_metastability[ε={eps},g={},points={}]", g.describe(), m.cases),
                eps: Some(*eps),
                bound: m.max_bound.map(|b| b.to_string()).unwrap_or_default(),
                value: Some(if m.failures == 0 {
                    m.max_witness.map_or_else(String::new, |w| w.to_string())
                } else {
                    format!("{} of {} points without witness", m.failures, m.cases)
                }),
                margin: None,
                pass: m.failures == 0,
            });
        }
    }
}
