use alphaloc::phase::{dtilde_counterexample, estimate_axiom_constants, maxmin_holds, trimin_holds};
use alphaloc::PhaseBox;
use rand::Rng;

use super::{attempt, fmt_alpha, rng};
use crate::config::{alpha, ExperimentConfig};
use crate::report::CheckRecord;

const SYMMETRY: &str = "ω(p,q) ≤ C_S ω(q,p) with C_S ≤ 2";
const PSEUDO_TRIANGLE: &str = "ω(p,q) ≤ C_T ω(p,r) ω(r,q) with C_T ≤ 4";
const TRIMIN: &str = "|t−t'| + β min(t,t') ≤ |t−t''| + |t''−t'| + β min(t,t',t''), β ≤ 2";
const TRIMIN_PAIR: &str = "|t−t'| + β min(t,t') ≤ |t−t''| + |t''−t'| + β min(t,t''), β ∈ [0,2]";
const MAXMIN: &str = "max(min(t,t''), min(t'',t')) ≤ min(max(t,t''), max(t'',t'))";
const DTILDE: &str = "d̃_α satisfies a pseudo-triangle inequality iff α = 1/2";

pub fn axiom_constants(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let ax = &cfg.axioms;
    let mut out = Vec::new();
    for &a in &cfg.alphas {
        let tag = fmt_alpha(a);
        let est = PhaseBox::new(ax.s_min, ax.s_max, ax.half_width)
            .and_then(|b| estimate_axiom_constants(alpha(a), &b, ax.triples, cfg.seed));
        match est {
            Ok(c) => {
                let samples = c.samples as f64;
                out.push(
                    CheckRecord::new(format!("c_s[{tag}]"), SYMMETRY)
                        .measure("c_s_hat", c.c_s_hat)
                        .measure("samples", samples)
                        .bound(2.0)
                        .pass(c.c_s_hat <= 2.0 + ax.tolerance),
                );
                out.push(
                    CheckRecord::new(format!("c_t[{tag}]"), PSEUDO_TRIANGLE)
                        .measure("c_t_hat", c.c_t_hat)
                        .measure("samples", samples)
                        .bound(4.0)
                        .pass(c.c_t_hat <= 4.0 + ax.tolerance),
                );
            }
            Err(e) => {
                out.push(CheckRecord::errored(format!("c_s[{tag}]"), SYMMETRY, &e));
                out.push(CheckRecord::errored(format!("c_t[{tag}]"), PSEUDO_TRIANGLE, &e));
            }
        }
    }
    out
}

/// A lemma input: usually uniform, sometimes a small integer so ties occur.
fn lemma_value(rng: &mut impl Rng, range: f64) -> f64 {
    if rng.gen_ratio(1, 4) {
        f64::from(rng.gen_range(0u8..4))
    } else {
        rng.gen_range(0.0..=range)
    }
}

pub fn lemmas(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let ax = &cfg.axioms;
    let n = ax.lemma_samples;
    let range = ax.lemma_range;
    let count = |stream: u64, f: &dyn Fn(&mut rand_chacha::ChaCha8Rng) -> bool| {
        let mut r = rng(cfg.seed, stream);
        (0..n).filter(|_| !f(&mut r)).count()
    };
    let trimin = count(1, &|r| {
        let (t, t2, t3) = (lemma_value(r, range), lemma_value(r, range), lemma_value(r, range));
        trimin_holds(t, t2, t3, r.gen_range(-range..=2.0))
    });
    let trimin_pair = count(2, &|r| {
        let (t, t2, t3) = (lemma_value(r, range), lemma_value(r, range), lemma_value(r, range));
        trimin_holds(t, t2, t3, r.gen_range(0.0..=2.0))
    });
    let maxmin = count(3, &|r| maxmin_holds(lemma_value(r, range), lemma_value(r, range), lemma_value(r, range)));
    [("trimin", TRIMIN, trimin), ("trimin_pair", TRIMIN_PAIR, trimin_pair), ("maxmin", MAXMIN, maxmin)]
        .into_iter()
        .map(|(name, anchor, violations)| {
            CheckRecord::new(name, anchor)
                .measure("samples", n as f64)
                .measure("violations", violations as f64)
                .bound(0.0)
                .pass(violations == 0)
        })
        .collect()
}

pub fn counterexamples(cfg: &ExperimentConfig) -> Vec<CheckRecord> {
    let c = cfg.axioms.counterexample_c;
    cfg.alphas
        .iter()
        .map(|&a| {
            let name = format!("dtilde_counterexample[{}]", fmt_alpha(a));
            if a == 0.5 {
                // The construction must refuse: d̃ is a pseudo-distance at α = 1/2.
                let refused = dtilde_counterexample(alpha(a), c).is_err();
                return CheckRecord::new(name, DTILDE).measure("refused", f64::from(u8::from(refused))).pass(refused);
            }
            attempt(name.clone(), DTILDE, || {
                let factor = dtilde_counterexample(alpha(a), c)?.violation_factor(alpha(a));
                Ok(CheckRecord::new(name, DTILDE)
                    .measure("violation_factor", factor)
                    .bound(c)
                    .pass(factor > c))
            })
        })
        .collect()
}
