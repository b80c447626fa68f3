//! Runs the shipped scenarios and prints one PASS/FAIL line per acceptance criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use proxcat::{run_scenario, RunOptions, RunReport};
use proxcat_core::geometry::{Point, Space};
use proxcat_core::resolvents::{Family, ResolventFamily};

type Outcome = Result<String, String>;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(name: &str, out: &Path) -> RunReport {
    let path = scenario_dir().join(format!("{name}.json"));
    let opts = RunOptions { command: None, out: Some(out.join(name)), seed: None };
    run_scenario(&path, &opts).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Part of a check name after `family@space:` and before any `[...]`.
fn kind(name: &str) -> &str {
    let tail = name.rsplit(':').next().unwrap_or(name);
    tail.split('[').next().unwrap_or(tail)
}

fn geometry(r: &RunReport) -> Outcome {
    ensure(r.pass, "geometry suite failed")?;
    let mut per_space: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for c in &r.checks {
        ensure(c.checked >= 10_000, format!("{} used {} samples", c.name, c.checked))?;
        ensure(c.tolerance <= 1e-9, format!("{} tolerance {}", c.name, c.tolerance))?;
        let space = c.name.split(':').next().unwrap_or("");
        per_space.entry(space).or_default().insert(kind(&c.name));
    }
    ensure(per_space.len() == 3, format!("spaces covered: {:?}", per_space.keys()))?;
    for (space, kinds) in &per_space {
        for k in ["geodesic_law", "cat0_inequality", "quasi_axiom_i", "quasi_axiom_ii", "quasi_axiom_iii", "quasi_axiom_iv", "cauchy_schwarz"] {
            ensure(kinds.contains(k), format!("{space} lacks {k}"))?;
        }
    }
    let worst = r.checks.iter().map(|c| c.max_violation).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("{} checks on 3 spaces, max violation {worst:e}", r.checks.len()))
}

fn equivalence(cat: &RunReport, bad: &RunReport) -> Outcome {
    let mut families = BTreeSet::new();
    let mut pairs: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &cat.checks {
        ensure(c.pass, format!("{} failed: {:e}", c.name, c.max_violation))?;
        let k = kind(&c.name);
        if ["nonexpansive", "resolvent_identity", "mutual_fne"].contains(&k) {
            ensure(c.checked >= 1000 && c.tolerance <= 1e-6, format!("{} settings", c.name))?;
        }
        if k == "mutual_fne" {
            *pairs.entry(c.name.split(':').next().unwrap()).or_default() += 1;
        }
        families.insert(c.name.split('@').next().unwrap());
    }
    ensure(families.len() == 6, format!("families covered: {families:?}"))?;
    // targets sharing a name contribute 9 lines each
    ensure(pairs.values().all(|&n| n > 0 && n % 9 == 0), "each target needs 9 (λ,μ) pairs")?;
    ensure(!bad.pass, "expansive family passed")?;
    for side in ["nonexpansive", "resolvent_identity", "mutual_fne"] {
        let lines: Vec<_> = bad.checks.iter().filter(|c| kind(&c.name) == side).collect();
        ensure(!lines.is_empty(), format!("expansive run has no {side} lines"))?;
        for c in lines {
            ensure(!c.pass && c.witness.is_some(), format!("{} should fail with a witness", c.name))?;
        }
    }
    let targets: usize = pairs.values().sum::<usize>() / 9;
    Ok(format!("{} catalog checks pass over {targets} targets; expansive family fails all {}", cat.checks.len(), bad.checks.len()))
}

fn halp(r: &RunReport) -> Outcome {
    ensure(r.pass, "halp scenario failed")?;
    ensure(r.checks.iter().all(|c| c.checked >= 1000 && c.tolerance <= 1e-8), "halp settings")?;
    let line = Space::Euclidean { dim: 1 };
    let fam = ResolventFamily::ProxScaledSquaredNorm { c: 1.0 };
    let x = Point::euclidean([6.0]);
    let t = fam.apply(&line, 1.0, &x).unwrap();
    let u = fam.apply(&line, 2.0, &x).unwrap();
    let d2 = |p: &Point, q: &Point| line.dist(p, q).unwrap().powi(2);
    let (xu, xt, tu) = (d2(&x, &u), d2(&x, &t), d2(&t, &u));
    ensure(xu == 16.0 && xt == 9.0 && tu == 1.0, format!("closed form gave {xu} ≥ {xt} + {tu}"))?;
    Ok(format!("{} pair checks pass; x=6 gives {xu} ≥ {xt} + {tu}", r.checks.len()))
}

fn monotone(r: &RunReport) -> Outcome {
    ensure(r.pass, "monotone-rates failed")?;
    let find = |prefix: &str| r.rates.iter().find(|l| l.name.starts_with(prefix));
    let q = find("qmcp[b=1,ε=0.25,g=1n+1]").ok_or("qmcp line missing")?;
    let g = find("gtilde[g=1n+1,k=4]").ok_or("gtilde line missing")?;
    ensure(q.bound == "15" && g.bound == "15", format!("qmcp {} gtilde {}", q.bound, g.bound))?;
    let mono: Vec<_> = r.rates.iter().filter(|l| l.name.starts_with("monotone[")).collect();
    ensure(mono.len() == 6, format!("{} monotone lines", mono.len()))?;
    ensure(mono.iter().all(|l| l.pass && l.name.contains("sequences=1000")), "monotone sweep")?;
    Ok("qmcp(1,0.25,n+1) = 15 = gtilde^4(0); 6000 sequences within bound".to_string())
}

fn ppa(constant: &RunReport, harmonic: &RunReport, out: &Path) -> Outcome {
    ensure(constant.pass, "constant schedule run failed")?;
    ensure(harmonic.pass, "harmonic schedule run failed")?;
    let bounds: Vec<&str> = constant.rates.iter().map(|l| l.bound.as_str()).collect();
    ensure(bounds == ["4", "16", "400"], format!("constant bounds {bounds:?}"))?;
    ensure(harmonic.rates.len() == 2, "harmonic needs ε ∈ {1, 0.5}")?;
    let trace = std::fs::read_to_string(out.join("euclid-ppa-rate/trace.csv")).map_err(|e| e.to_string())?;
    ensure(trace.starts_with("n,gamma_n,d_to_p,step\n"), "trace header")?;
    let margins: Vec<String> = constant.rates.iter().map(|l| format!("{:e}", l.margin.unwrap_or(f64::NAN))).collect();
    let hb: Vec<&str> = harmonic.rates.iter().map(|l| l.bound.as_str()).collect();
    Ok(format!("constant bounds 4/16/400 (margins {}); harmonic bounds {}", margins.join("/"), hb.join("/")))
}

fn curve_meta(r: &RunReport) -> Outcome {
    ensure(r.pass, "curve metastability failed")?;
    let lines: Vec<_> = r.rates.iter().filter(|l| l.name.contains("curve_metastability")).collect();
    ensure(!lines.is_empty(), "no metastability lines")?;
    ensure(lines.iter().all(|l| l.pass && l.name.contains("points=100")), "each line covers 100 base points")?;
    for space in ["euclidean", "half_plane", "spider"] {
        ensure(lines.iter().any(|l| l.name.contains(&format!("@{space}"))), format!("{space} missing"))?;
    }
    for eps in ["ε=0.5", "ε=0.1"] {
        for g in ["g=const 1", "g=1n+0"] {
            ensure(lines.iter().any(|l| l.name.contains(eps) && l.name.contains(g)), format!("{eps} {g} missing"))?;
        }
    }
    Ok(format!("{} (family, ε, g) combinations within bound", lines.len()))
}

fn curve_limit(r: &RunReport, out: &Path) -> Outcome {
    ensure(r.pass, "curve-limit failed")?;
    let csv = std::fs::read_to_string(out.join("curve-limit/curve.csv")).map_err(|e| e.to_string())?;
    let last = csv.lines().last().ok_or("empty curve csv")?;
    let cols: Vec<f64> = last.split(',').map(|s| s.parse().unwrap()).collect();
    ensure(cols[0] == 1024.0 && cols[2] <= 1e-3, format!("last curve row {last}"))?;
    let cont: Vec<_> = r.checks.iter().filter(|c| kind(&c.name) == "curve_continuity").collect();
    ensure(cont.len() == 2 && cont.iter().all(|c| c.pass && c.tolerance <= 1e-8), "continuity lines")?;
    Ok(format!("d(T_1024 x, P_F x) = {:e}; continuity holds for ε ∈ {{0.1, 0.01}}", cols[2]))
}

fn uniform(good: &RunReport, identity: &RunReport) -> Outcome {
    ensure(good.pass, "prox family failed uniform (P2) or the uniqueness lemma")?;
    for k in ["uniform_p2", "uniq_lemma"] {
        let n = good.checks.iter().filter(|c| kind(&c.name) == k).count();
        ensure(n == 9, format!("{n} {k} lines, want 3 γ × 3 ε"))?;
    }
    ensure(!identity.pass, "identity passed uniform (P2)")?;
    ensure(
        identity.checks.iter().filter(|c| kind(&c.name) == "uniform_p2").all(|c| !c.pass && c.witness.is_some()),
        "identity lines need failing witnesses",
    )?;
    Ok(format!("{} prox lines pass; identity fails {} lines with witnesses", good.checks.len(), identity.checks.len()))
}

fn determinism(names: &[String], first: &Path, second: &Path) -> Outcome {
    let mut files = 0;
    for name in names {
        run(name, second);
        let dir = first.join(name);
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let entry = entry.map_err(|e| e.to_string())?;
            let a = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
            let b = std::fs::read(second.join(name).join(entry.file_name())).map_err(|e| e.to_string())?;
            ensure(a == b, format!("{name}/{} differs", entry.file_name().to_string_lossy()))?;
            files += 1;
        }
    }
    Ok(format!("{files} files byte-identical across {} scenarios", names.len()))
}

fn main() {
    let start = Instant::now();
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut names: Vec<String> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "json").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    let reports: BTreeMap<String, RunReport> = names.iter().map(|n| (n.clone(), run(n, first.path()))).collect();
    let r = |n: &str| &reports[n];
    let out = first.path();

    let results: [(&str, Outcome); 9] = [
        ("1 geometry suite", geometry(r("geometry-suite"))),
        ("2 equivalence of characterizations", equivalence(r("equivalence-catalog"), r("expansive-check"))),
        ("3 resolvent pair inequality", halp(r("halp-lemma"))),
        ("4 monotone metastability", monotone(r("monotone-rates"))),
        ("5 uniform PPA rate", ppa(r("euclid-ppa-rate"), r("euclid-ppa-harmonic"), out)),
        ("6 curve metastability", curve_meta(r("curve-metastability"))),
        ("7 curve limit and continuity", curve_limit(r("curve-limit"), out)),
        ("8 uniform (P2) and uniqueness inequality", uniform(r("uniform-p2"), r("identity-uniform-p2"))),
        ("9 determinism", determinism(&names, out, second.path())),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("{} of 9 criteria passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
