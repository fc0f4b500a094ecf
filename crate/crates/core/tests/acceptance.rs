//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so every line is printed; exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use lao_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const ANCHOR_TOL: f64 = 0.05;
const ANCHOR_D21: f64 = 2.24;
const ANCHOR_D32: f64 = 1.38;
const ORACLE_RESOLUTION: f64 = 1e-4;
const ORACLE_TOL: f64 = 2e-3;
const ORACLE_CASES_BINARY: usize = 30;
const ORACLE_CASES_TERNARY: usize = 25;
const STRUCTURE_TOL: f64 = 1e-9;
const STRUCTURE_CASES: usize = 20;
const ZERO_OVERSHOOT: f64 = 0.01;
const SWEEP_THRESHOLD: f64 = 1.4;
const SWEEP_TOL: f64 = 0.05;
const SWEEP_STEP: f64 = 0.01;
const CONVERGENCE_GRID: [u32; 5] = [20, 30, 40, 50, 60];
const CONVERGENCE_REL_TOL: f64 = 0.15;
const CONVERGENCE_SPEC: [f64; 2] = [0.04, 0.5];
const PRODUCT_REL_TOL: f64 = 1e-12;
const PRODUCT_NS: [u32; 4] = [5, 10, 20, 30];
const RENUMBER_TOL: f64 = 1e-9;
const IDENT_LIMIT_RADIUS: f64 = 1e-12;
const IDENT_LIMIT_TOL: f64 = 1e-6;
const MC_N: usize = 20;
const MC_TRIALS: u64 = 100_000;
const MC_SEEDS: u64 = 20;
const MC_SIGMAS: f64 = 4.0;
const MC_MIN_FRACTION: f64 = 0.99;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn bits() -> LogBase {
    LogBase::new(2.0).unwrap()
}

fn example_family() -> HypothesisFamily {
    HypothesisFamily::from_rows(&[vec![0.10, 0.90], vec![0.85, 0.15], vec![0.23, 0.77]], bits()).unwrap()
}

fn random_distribution(rng: &mut ChaCha8Rng, k: usize) -> Distribution {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.02..1.0)).collect();
    Distribution::from_weights(&w).unwrap()
}

fn ball_oracle(center: &Distribution, target: &Distribution, radius: f64, base: LogBase) -> OracleResult {
    let ln_c: Vec<f64> = center.probs().iter().map(|p| p.ln()).collect();
    let r = base.to_nats(radius);
    grid_oracle_min_div(|p: &GridPoint| p.divergence_nats(&ln_c) <= r, target, ORACLE_RESOLUTION, base).unwrap()
}

fn divergence_anchors() -> Verdict {
    let fam = example_family();
    let d21 = fam.divergence(1, 0).unwrap();
    let d32 = fam.divergence(2, 1).unwrap();
    let ok = (d21 - ANCHOR_D21).abs() <= ANCHOR_TOL && (d32 - ANCHOR_D32).abs() <= ANCHOR_TOL;
    verdict(ok, format!("D(G2||G1) = {d21:.4}, D(G3||G2) = {d32:.4} bits"))
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a0);
    let base = bits();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut failures = 0;
    let mut cases = 0;
    for (k, count) in [(2, ORACLE_CASES_BINARY), (3, ORACLE_CASES_TERNARY)] {
        for _ in 0..count {
            let c = random_distribution(&mut rng, k);
            let t = random_distribution(&mut rng, k);
            let d = divergence(&t, &c, base).unwrap();
            let radius = rng.random_range(0.01..0.3f64).max(d * rng.random_range(0.05..1.2));
            let solved = min_div_in_ball(&c, &t, radius, base).unwrap();
            let oracle = ball_oracle(&c, &t, radius, base);
            let bound = discretization_bound(&solved.argmin, &t, oracle.spacing, base);
            let excess = (solved.value - oracle.value).abs() - (ORACLE_TOL + bound);
            worst_excess = worst_excess.max(excess);
            if excess > 0.0 {
                failures += 1;
            }
            cases += 1;
        }
    }
    verdict(
        failures == 0,
        format!("{cases} cases, {failures} outside 2e-3 + discretization bound (worst slack {worst_excess:.2e})"),
    )
}

fn diagonal_structure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3b1);
    let mut worst: f64 = 0.0;
    for _ in 0..STRUCTURE_CASES {
        let m = rng.random_range(2..=4usize);
        let k = rng.random_range(2..=3usize);
        let rows: Vec<Distribution> = (0..m).map(|_| random_distribution(&mut rng, k)).collect();
        let fam = HypothesisFamily::new(Alphabet::indexed(k).unwrap(), rows, bits()).unwrap();
        let fractions: Vec<f64> = (0..m - 1).map(|_| rng.random_range(0.1..0.9)).collect();
        let spec = compatible_spec(&fam, &fractions).unwrap();
        if !check_compatibility(&fam, &spec).unwrap().ok {
            return verdict(false, "generated specification is not compatible");
        }
        let mx = reliability_matrix(&fam, &spec).unwrap();
        for r in 0..m {
            worst = worst.max((mx.get(r, r) - mx.get(r, m - 1)).abs());
            worst = worst.max((mx.get(r, r) - mx.row_min_off_diagonal(r)).abs());
        }
    }
    verdict(
        worst <= STRUCTURE_TOL,
        format!("{STRUCTURE_CASES} compatible families, max deviation {worst:.2e}"),
    )
}

fn zero_onset() -> Verdict {
    let fam = example_family();
    let mut notes = Vec::new();
    let mut ok = true;
    // first condition exceeded
    let base_spec = DiagonalSpec::new(vec![0.05, 0.5]).unwrap();
    let report = check_compatibility(&fam, &base_spec).unwrap();
    let over1 = DiagonalSpec::new(vec![report.conditions[0].bound + ZERO_OVERSHOOT, 0.5]).unwrap();
    let z1 = reliability_matrix(&fam, &over1).unwrap().has_zero();
    ok &= z1 && report.ok;
    notes.push(format!("condition 1 exceeded: zero entry {z1}"));
    // second condition exceeded
    let over2 = DiagonalSpec::new(vec![0.05, report.conditions[1].bound + ZERO_OVERSHOOT]).unwrap();
    let z2 = reliability_matrix(&fam, &over2).unwrap().has_zero();
    ok &= z2;
    notes.push(format!("condition 2 exceeded: zero entry {z2}"));
    // compound sweep of the second diagonal value of object 1
    let spec = CompoundSpec::uniform(fam.clone(), 2, vec![0.05, 0.5]).unwrap();
    let values: Vec<f64> = (0..=80).map(|i| 1.0 + SWEEP_STEP * i as f64).collect();
    let probe = SweepProbe { truth: vec![2, 2], accepted: vec![1, 2] };
    let axis = SweepAxis { object: 0, hypothesis: 1, values };
    let pts = compound_sweep(&spec, &[axis], &[probe]).unwrap();
    let onset = pts.iter().find(|p| p.entries[0] == 0.0).map(|p| p.coords[0]);
    let nonincreasing = pts.windows(2).all(|w| w[1].entries[0] <= w[0].entries[0]);
    match onset {
        Some(x) => {
            ok &= (x - SWEEP_THRESHOLD).abs() <= SWEEP_TOL && nonincreasing;
            notes.push(format!("sweep reaches 0 at {x:.2} (D(G3||G2) = {:.4})", fam.divergence(2, 1).unwrap()));
        }
        None => {
            ok = false;
            notes.push("sweep never reaches 0".into());
        }
    }
    verdict(ok, notes.join("; "))
}

fn exponent_convergence() -> Verdict {
    let fam = example_family();
    let spec = DiagonalSpec::new(CONVERGENCE_SPEC.to_vec()).unwrap();
    let compatible = check_compatibility(&fam, &spec).unwrap().ok;
    let mx = reliability_matrix(&fam, &spec).unwrap();
    let rule = build_rule(&fam, &spec).unwrap();
    let fit = exponent_fit(|_| Ok(rule.clone()), &fam, &CONVERGENCE_GRID).unwrap();
    let mut worst = (0.0f64, 0, 0);
    for m in 0..fam.len() {
        for l in 0..fam.len() {
            let want = mx.get(m, l);
            let rel = (fit.limit(m, l) - want).abs() / want;
            if rel > worst.0 {
                worst = (rel, m, l);
            }
        }
    }
    let mut sandwich_failures = 0;
    for ex in &fit.exact {
        sandwich_failures += sandwich_check(ex, &mx, fam.alphabet_size())
            .unwrap()
            .iter()
            .filter(|e| !e.ok)
            .count();
    }
    let (rel, m, l) = worst;
    verdict(
        compatible && rel <= CONVERGENCE_REL_TOL && sandwich_failures == 0,
        format!(
            "spec {CONVERGENCE_SPEC:?}: worst relative error {rel:.3} at E{}|{} (fitted {:.4}, exact {:.4}); sandwich failures {sandwich_failures}",
            l + 1,
            m + 1,
            fit.limit(m, l),
            mx.get(m, l)
        ),
    )
}

fn product_law() -> Verdict {
    let fam = HypothesisFamily::from_rows(&[vec![0.2, 0.8], vec![0.7, 0.3]], bits()).unwrap();
    let e = 0.3 * fam.divergence(1, 0).unwrap();
    let lao = compound_lao(&CompoundSpec::uniform(fam.clone(), 2, vec![e]).unwrap()).unwrap();
    let rule = lao.rule().unwrap();
    let composite = renumbered_family(&fam, 2).unwrap();
    let single = build_rule(&fam, &DiagonalSpec::new(vec![e]).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for n in PRODUCT_NS {
        let joint = exact_error_matrix(&rule, &composite, n).unwrap();
        let per = exact_error_matrix(&single, &fam, n).unwrap();
        for t in 0..4 {
            for a in 0..4 {
                let want = per.prob(t / 2, a / 2) * per.prob(t % 2, a % 2);
                let got = joint.prob(t, a);
                worst = worst.max((got - want).abs() / want);
            }
        }
    }
    // exponents of differing slots add
    let three = example_family();
    let spec = CompoundSpec::new(three, vec![vec![0.05, 0.5], vec![0.03, 0.9]]).unwrap();
    let comp = compound_lao(&spec).unwrap();
    let per_object = comp.reliability.per_object();
    let mut additive = true;
    for (truth, acc, v) in comp.reliability.iter().unwrap() {
        if truth == acc {
            continue;
        }
        let sum: f64 = (0..2)
            .filter(|&i| truth[i] != acc[i])
            .map(|i| per_object[i].get(truth[i], acc[i]))
            .sum();
        additive &= v == sum;
    }
    verdict(
        worst <= PRODUCT_REL_TOL && additive,
        format!("max relative deviation {worst:.2e} over n in {PRODUCT_NS:?}; exponent sums exact: {additive}"),
    )
}

fn renumbered_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7c2);
    let mut worst: f64 = 0.0;
    let mut shared = 0;
    let mut families = 0;
    while families < 5 {
        let rows = vec![random_distribution(&mut rng, 2), random_distribution(&mut rng, 2)];
        let fam = HypothesisFamily::new(Alphabet::indexed(2).unwrap(), rows, bits()).unwrap();
        let e = rng.random_range(0.1..0.3) * fam.divergence(1, 0).unwrap();
        let comp = renumbered_family(&fam, 2).unwrap();
        let comp_spec = DiagonalSpec::new(vec![e; 3]).unwrap();
        if !check_compatibility(&comp, &comp_spec).unwrap().ok {
            continue;
        }
        families += 1;
        let composite = reliability_matrix(&comp, &comp_spec).unwrap();
        let lao = compound_lao(&CompoundSpec::uniform(fam, 2, vec![e]).unwrap()).unwrap();
        for t in 0..4 {
            for a in 0..4 {
                let (tt, at) = ([t / 2, t % 2], [a / 2, a % 2]);
                let differing: Vec<usize> = (0..2).filter(|&i| tt[i] != at[i]).collect();
                if differing.len() == 1 && at[differing[0]] != 1 {
                    let v = lao.reliability.entry(&tt, &at).unwrap();
                    worst = worst.max((composite.get(t, a) - v).abs());
                    shared += 1;
                }
            }
        }
    }
    verdict(
        worst <= RENUMBER_TOL && shared > 0,
        format!("{families} binary families, {shared} shared entries, max deviation {worst:.2e}"),
    )
}

fn identification() -> Verdict {
    let fam = example_family();
    let base = fam.base();
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (r, e) in [(0, 0.05), (1, 0.3), (1, 1.0), (2, 0.05)] {
        let v = identification_reliability(&fam, r, e).unwrap();
        let mut oracle = f64::INFINITY;
        let mut bound: f64 = 0.0;
        for m in (0..fam.len()).filter(|&m| m != r) {
            let g = fam.hypothesis(m).unwrap();
            let o = ball_oracle(fam.hypothesis(r).unwrap(), g, e, base);
            if let Some(q) = &o.argmin {
                bound = bound.max(discretization_bound(q, g, o.spacing, base));
            }
            oracle = oracle.min(o.value);
        }
        worst = worst.max((v - oracle).abs() - bound);
    }
    ok &= worst <= ORACLE_TOL;
    // gate: below A(r) accepted, at or above rejected
    let a0 = identification_condition(&fam, 0, 0.0).unwrap().threshold;
    let a1 = identification_condition(&fam, 1, 0.0).unwrap().threshold;
    let a = a0.min(a1);
    let gate_ok = identify_pair(&fam, 0, 1, 0.5 * a).is_ok()
        && matches!(identify_pair(&fam, 0, 1, a), Err(Error::Precondition { .. }))
        && matches!(identify_pair(&fam, 0, 1, a0 + 0.01), Err(Error::Precondition { .. }));
    ok &= gate_ok;
    // vanishing radius: pure divergence minima
    let mut limit_dev: f64 = 0.0;
    for r in 0..fam.len() {
        let v = identification_reliability(&fam, r, IDENT_LIMIT_RADIUS).unwrap();
        let want = (0..fam.len())
            .filter(|&m| m != r)
            .map(|m| fam.divergence(r, m).unwrap())
            .fold(f64::INFINITY, f64::min);
        limit_dev = limit_dev.max((v - want).abs());
    }
    let pair = pair_identification_exponent(&fam, 0, 1, IDENT_LIMIT_RADIUS).unwrap();
    let pair_want = [(0, 1), (0, 2), (1, 0), (1, 2)]
        .iter()
        .map(|&(r, m)| fam.divergence(r, m).unwrap())
        .fold(f64::INFINITY, f64::min);
    limit_dev = limit_dev.max((pair - pair_want).abs());
    ok &= limit_dev <= IDENT_LIMIT_TOL;
    verdict(
        ok,
        format!("oracle slack {worst:.2e}, gate correct {gate_ok}, vanishing-radius deviation {limit_dev:.2e}"),
    )
}

fn monte_carlo() -> Verdict {
    let fam = example_family();
    let rule = build_rule(&fam, &DiagonalSpec::new(vec![0.05, 0.5]).unwrap()).unwrap();
    let exact = exact_error_matrix(&rule, &fam, MC_N as u32).unwrap();
    let z = MC_SIGMAS;
    let mut inside = 0usize;
    let mut total = 0usize;
    for seed in 0..MC_SEEDS {
        let mc = mc_error_matrix(&rule, &fam, MC_N, MC_TRIALS, seed).unwrap();
        for m in 0..exact.hypotheses() {
            for o in 0..exact.outcomes() {
                let (lo, hi) = mc.interval(m, o, z);
                let p = exact.prob(m, o);
                if lo <= p && p <= hi {
                    inside += 1;
                }
                total += 1;
            }
        }
    }
    let frac = inside as f64 / total as f64;
    verdict(
        frac >= MC_MIN_FRACTION,
        format!("{inside}/{total} entries inside the 4-sigma Wilson interval ({MC_SEEDS} seeds x {MC_TRIALS} trials, n = {MC_N})"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("divergence anchors", divergence_anchors),
        ("ball minimum matches grid oracle", oracle_equivalence),
        ("diagonal equals last column and row minimum", diagonal_structure),
        ("zero exponent onset", zero_onset),
        ("exponent convergence and sandwich", exponent_convergence),
        ("product law and additivity", product_law),
        ("renumbered composite agrees with compound", renumbered_equivalence),
        ("identification", identification),
        ("Monte Carlo consistency", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
