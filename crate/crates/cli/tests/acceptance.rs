//! Acceptance suite: one line per criterion, at the default configuration.
//!
//! Criteria listed in `EXPECTED_FAIL` are known not to hold at desk scale;
//! the suite fails if any criterion's outcome differs from its expectation.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use alphaloc_cli::campaign::*;
use alphaloc_cli::{CheckRecord, ExperimentConfig};

const EXPECTED_FAIL: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_records(records: &[CheckRecord], limit: Option<Duration>, elapsed: Duration) -> Outcome {
    let failed: Vec<&str> = records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    let in_time = limit.map_or(true, |l| elapsed < l);
    let mut detail = format!("{}/{} checks", records.len() - failed.len(), records.len());
    if !failed.is_empty() {
        let shown: Vec<&str> = failed.iter().copied().take(4).collect();
        detail += &format!(", failing {}", shown.join(" "));
        if failed.len() > shown.len() {
            detail += &format!(" and {} more", failed.len() - shown.len());
        }
    }
    if let Some(l) = limit {
        detail += &format!(", {:.1}s of {}s", elapsed.as_secs_f64(), l.as_secs());
    }
    Outcome {
        pass: failed.is_empty() && in_time && !records.is_empty(),
        detail,
    }
}

fn timed(cfg: &ExperimentConfig, limit: Option<u64>, run: impl Fn(&ExperimentConfig) -> Vec<CheckRecord>) -> Outcome {
    let start = Instant::now();
    let records = run(cfg);
    from_records(&records, limit.map(Duration::from_secs), start.elapsed())
}

fn measured(records: &[CheckRecord], name: &str, key: &str) -> f64 {
    records
        .iter()
        .find(|r| r.name == name)
        .and_then(|r| r.measured.get(key).copied())
        .unwrap_or(f64::NAN)
}

fn axioms_per_alpha(cfg: &ExperimentConfig) -> Outcome {
    let mut records = Vec::new();
    let mut slowest = Duration::ZERO;
    for &a in &cfg.alphas {
        let single = ExperimentConfig {
            alphas: vec![a],
            ..cfg.clone()
        };
        let start = Instant::now();
        records.extend(axiom_constants(&single));
        slowest = slowest.max(start.elapsed());
    }
    let mut out = from_records(&records, None, Duration::ZERO);
    out.pass &= slowest < Duration::from_secs(10);
    out.detail += &format!(", slowest alpha {:.2}s of 10s", slowest.as_secs_f64());
    out
}

fn counterexample_alphas(cfg: &ExperimentConfig) -> Outcome {
    let cfg = ExperimentConfig {
        alphas: vec![0.0, 0.25, 0.75, 1.0],
        ..cfg.clone()
    };
    let mut out = timed(&cfg, None, counterexamples);
    out.pass &= cfg.axioms.counterexample_c == 100.0;
    out
}

fn molecule_pipeline(cfg: &ExperimentConfig) -> Outcome {
    let records = [molecule_conditions(cfg), gaussian_pair(cfg), gram_checks(cfg)].concat();
    let mut out = from_records(&records, None, Duration::ZERO);
    let count = measured(&records, "gram_localization", "molecules");
    out.pass &= count <= 300.0 && cfg.molecules.gram_grid.j_range().1 == 3;
    out.detail += &format!(", {count} molecules");
    out
}

fn admissibility(cfg: &ExperimentConfig) -> Outcome {
    let records = admissibility_growth(cfg);
    let mut out = from_records(&records, None, Duration::ZERO);
    let growth: Vec<f64> = records.iter().filter_map(|r| r.measured.get("growth").copied()).collect();
    let lo = growth.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = growth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.detail = format!(
        "{}, last-step growth {:.1}% to {:.1}% against {}%",
        out.detail.split(", failing").next().unwrap_or_default(),
        100.0 * lo,
        100.0 * hi,
        100.0 * cfg.admissibility.growth_limit
    );
    out
}

fn pinv_full(cfg: &ExperimentConfig) -> Outcome {
    let mut out = timed(cfg, None, pinv_correctness);
    let size = cfg.pinv.grid.build().map_or(usize::MAX, |g| g.len());
    out.pass &= size <= 400;
    out.detail += &format!(", {size} indices");
    out
}

fn full_report(seed: u64) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_alphaloc"))
        .args(["full", "--seed", &seed.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0 | 1) => Ok(out.stdout),
        code => Err(format!("exit {code:?}: {}", String::from_utf8_lossy(&out.stderr))),
    }
}

fn determinism(cfg: &ExperimentConfig) -> Outcome {
    match (full_report(cfg.seed), full_report(cfg.seed)) {
        (Ok(a), Ok(b)) => Outcome {
            pass: a == b && !a.is_empty(),
            detail: format!("{} and {} bytes, identical: {}", a.len(), b.len(), a == b),
        },
        (Err(e), _) | (_, Err(e)) => Outcome { pass: false, detail: e },
    }
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default();
    type Criterion = (u32, &'static str, Box<dyn Fn(&ExperimentConfig) -> Outcome>);
    let criteria: Vec<Criterion> = vec![
        (1, "axiom constants", Box::new(axioms_per_alpha)),
        (2, "scalar lemmas", Box::new(|c| timed(c, Some(5), lemmas))),
        (3, "pseudo-triangle counterexamples", Box::new(counterexample_alphas)),
        (4, "grid separation", Box::new(|c| timed(c, Some(60), separation))),
        (5, "2-admissibility convergence", Box::new(admissibility)),
        (6, "submultiplicativity", Box::new(|c| timed(c, None, submultiplicativity))),
        (7, "pseudoinverse correctness", Box::new(pinv_full)),
        (8, "N+ formula", Box::new(|c| timed(c, None, n_plus_checks))),
        (9, "pseudoinverse decay", Box::new(|c| timed(c, Some(300), pinv_decay))),
        (10, "molecule pipeline", Box::new(molecule_pipeline)),
        (11, "Schur bounds", Box::new(|c| timed(c, None, schur_bounds))),
        (12, "determinism of full", Box::new(determinism)),
    ];

    let mut unexpected = Vec::new();
    for (id, title, run) in &criteria {
        let outcome = run(&cfg);
        let expected = !EXPECTED_FAIL.contains(id);
        let note = if outcome.pass == expected {
            ""
        } else if outcome.pass {
            " (unexpected pass)"
        } else {
            " (unexpected fail)"
        };
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {title}: {}{note}", outcome.detail);
        if outcome.pass != expected {
            unexpected.push(*id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: outcomes match expectations (expected failures: {EXPECTED_FAIL:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcomes for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
