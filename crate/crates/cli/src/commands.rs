//! Subcommand implementations. Each returns a [`Report`]; indices are
//! 1-based in everything shown to the user.

use std::path::Path;

use lao_core::{
    build_rule, check_compatibility, classify, compound_lao, compound_sweep, dependent_pair_lao,
    divergence, empirical_type, exponent_fit, identification_condition, identification_reliability,
    identify_pair, mc_error_matrix, pair_identification_exponent, rejection_reliability_matrix,
    rejection_rule, reliability_matrix, sandwich_check, BindingTerm, CompatibilityCondition,
    CompatibilityReport, CompoundSpec, DecisionRule, DependentPairSpec, DiagonalSpec, HypothesisFamily,
    RejectionSpec, Sample, SweepAxis, SweepProbe,
};
use lao_core::empirics::{MAX_ENUMERATION_ALPHABET, MAX_ENUMERATION_N};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::family::LoadedFamily;
use crate::output::{cell, ext, ext_matrix, ext_vec, to_value, Report, Table};
use crate::parse;

/// Entries at or below this are reported as zero exponents.
pub const ZERO_EXPONENT: f64 = 1e-12;

/// Standard deviations allowed between simulated and exact frequencies.
pub const AGREEMENT_SIGMAS: f64 = 4.0;

pub struct Ctx {
    pub family: LoadedFamily,
    pub family_path: String,
    pub seed: Option<u64>,
}

impl Ctx {
    fn report(&self, command: &'static str, mut inputs: Value, result: Value, table: Table) -> Report {
        inputs["family"] = json!({
            "path": self.family_path,
            "contents": to_value(&self.family.source),
        });
        Report {
            command,
            log_base: self.family.base.value(),
            seed: None,
            inputs,
            result,
            table,
            warnings: Vec::new(),
        }
    }
}

fn label(i: usize) -> String {
    (i + 1).to_string()
}

fn tuple_label(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|&i| label(i)).collect();
    format!("({})", parts.join(","))
}

fn one_based(t: &[usize]) -> Vec<usize> {
    t.iter().map(|i| i + 1).collect()
}

fn binding_json(b: BindingTerm) -> Value {
    match b {
        BindingTerm::Divergence { other } => json!({"kind": "divergence", "other": other + 1}),
        BindingTerm::BallMinimum { other } => json!({"kind": "ball-minimum", "other": other + 1}),
    }
}

fn binding_text(b: BindingTerm, m: usize) -> String {
    match b {
        BindingTerm::Divergence { other } => {
            format!("the divergence D(G{} || G{})", other + 1, m + 1)
        }
        BindingTerm::BallMinimum { other } => format!(
            "the smallest divergence from G{} within the ball of hypothesis {}",
            m + 1,
            other + 1
        ),
    }
}

/// Message naming the hypothesis whose condition fails and what binds it.
pub fn violation_message(c: &CompatibilityCondition) -> String {
    format!(
        "compatibility condition for hypothesis {} fails: E{}|{} = {} is not below {} set by {}",
        c.index + 1,
        c.index + 1,
        c.index + 1,
        c.given,
        c.bound,
        binding_text(c.binding, c.index)
    )
}

fn compat_json(r: &CompatibilityReport) -> Value {
    let conditions: Vec<Value> = r
        .conditions
        .iter()
        .map(|c| {
            json!({
                "hypothesis": c.index + 1,
                "given": ext(c.given),
                "bound": ext(c.bound),
                "margin": ext(c.margin),
                "ok": c.margin > 0.0,
                "binding": binding_json(c.binding),
            })
        })
        .collect();
    json!({"compatible": r.ok, "conditions": conditions})
}

fn compat_warnings(r: &CompatibilityReport, prefix: &str) -> Vec<String> {
    r.conditions
        .iter()
        .filter(|c| c.margin <= 0.0)
        .map(|c| format!("{prefix}{}", violation_message(c)))
        .collect()
}

fn matrix_table(entries: &[Vec<f64>], reject_column: bool) -> Table {
    let mut t = Table::new(&["true", "accepted", "exponent"]);
    for (m, row) in entries.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            let acc = if reject_column && l == entries.len() {
                "reject".to_string()
            } else {
                label(l)
            };
            t.push(vec![label(m), acc, cell(*v)]);
        }
    }
    t
}

fn diagonal_spec(fam: &HypothesisFamily, arg: &str) -> Result<DiagonalSpec, CliError> {
    let v = parse::values(arg, "spec")?;
    if v.len() + 1 != fam.len() {
        return Err(CliError::Validation(format!(
            "spec needs {} values (one per hypothesis but the last), got {}",
            fam.len() - 1,
            v.len()
        )));
    }
    Ok(DiagonalSpec::new(v)?)
}

fn rejection_spec(fam: &HypothesisFamily, arg: &str) -> Result<RejectionSpec, CliError> {
    let v = parse::values(arg, "spec")?;
    if v.len() != fam.len() {
        return Err(CliError::Validation(format!(
            "rejection spec needs {} values (one per hypothesis), got {}",
            fam.len(),
            v.len()
        )));
    }
    Ok(RejectionSpec::new(v)?)
}

fn rule_for(fam: &HypothesisFamily, spec: &str, reject: bool) -> Result<DecisionRule, CliError> {
    Ok(if reject {
        rejection_rule(fam, &rejection_spec(fam, spec)?)?
    } else {
        build_rule(fam, &diagonal_spec(fam, spec)?)?
    })
}

fn outcome_label(rule: &DecisionRule, o: usize) -> String {
    if rule.has_reject() && o == rule.radii().len() {
        "reject".into()
    } else {
        label(o)
    }
}

/// Runs `f` over `items` on scoped threads, preserving order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len()).max(1);
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

pub fn compat(ctx: &Ctx, spec: &str) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let spec = diagonal_spec(fam, spec)?;
    let r = check_compatibility(fam, &spec)?;
    let mut t = Table::new(&["hypothesis", "given", "bound", "margin", "binding", "other", "ok"]);
    for c in &r.conditions {
        let (kind, other) = match c.binding {
            BindingTerm::Divergence { other } => ("divergence", other),
            BindingTerm::BallMinimum { other } => ("ball-minimum", other),
        };
        t.push(vec![
            label(c.index),
            cell(c.given),
            cell(c.bound),
            cell(c.margin),
            kind.into(),
            label(other),
            (c.margin > 0.0).to_string(),
        ]);
    }
    let mut rep = ctx.report("compat", json!({"spec": ext_vec(spec.values())}), compat_json(&r), t);
    rep.warnings = compat_warnings(&r, "");
    Ok(rep)
}

pub fn reliability(ctx: &Ctx, spec: &str, strict: bool) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let spec = diagonal_spec(fam, spec)?;
    let r = check_compatibility(fam, &spec)?;
    if strict {
        if let Some(c) = r.first_violation() {
            return Err(CliError::Validation(violation_message(c)));
        }
    }
    let matrix = reliability_matrix(fam, &spec)?;
    let result = json!({
        "matrix": to_value(&matrix),
        "compatibility": compat_json(&r),
        "has_zero": matrix.has_zero(),
    });
    let mut rep = ctx.report(
        "reliability",
        json!({"spec": ext_vec(spec.values()), "strict": strict}),
        result,
        matrix_table(matrix.entries(), false),
    );
    rep.warnings = compat_warnings(&r, "");
    if matrix.has_zero() {
        rep.warnings.push("the matrix has a zero exponent".into());
    }
    Ok(rep)
}

pub fn reject(ctx: &Ctx, spec: &str) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let spec = rejection_spec(fam, spec)?;
    let matrix = rejection_reliability_matrix(fam, &spec)?;
    let result = json!({
        "matrix": to_value(&matrix),
        "reject": ext_vec(&(0..fam.len()).map(|m| matrix.reject(m)).collect::<Vec<_>>()),
    });
    Ok(ctx.report(
        "reject",
        json!({"spec": ext_vec(spec.values())}),
        result,
        matrix_table(matrix.entries(), true),
    ))
}

pub fn classify_cmd(ctx: &Ctx, spec: &str, sample: &Path, reject: bool) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let rule = rule_for(fam, spec, reject)?;
    let text = std::fs::read_to_string(sample)
        .map_err(|e| CliError::Io(format!("{}: {e}", sample.display())))?;
    let mut results = Vec::new();
    let mut t = Table::new(&["sample", "n", "outcome"]);
    let lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    for (i, line) in lines.enumerate() {
        let labels = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let s = Sample::from_labels(labels, fam.alphabet())
            .map_err(|e| CliError::Validation(format!("sample {}: {e}", i + 1)))?;
        let ty = empirical_type(&s, fam.alphabet())?;
        let q = ty.distribution();
        let divs = fam
            .hypotheses()
            .iter()
            .map(|g| divergence(&q, g, fam.base()))
            .collect::<Result<Vec<_>, _>>()?;
        let o = classify(&rule, &s)?;
        let out = outcome_label(&rule, o);
        t.push(vec![label(i), s.len().to_string(), out.clone()]);
        results.push(json!({
            "sample": i + 1,
            "n": s.len(),
            "type": ty.counts(),
            "divergences": ext_vec(&divs),
            "outcome": out,
        }));
    }
    if results.is_empty() {
        return Err(CliError::Parse(format!("{}: no samples found", sample.display())));
    }
    Ok(ctx.report(
        "classify",
        json!({"spec": ext_vec(rule.radii()), "reject": reject, "sample_file": sample.display().to_string()}),
        json!({"samples": results}),
        t,
    ))
}

pub fn identify(ctx: &Ctx, r: usize, r2: Option<usize>, e: f64, force: bool) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let r0 = parse::index(&r.to_string(), fam.len(), "--r")?;
    let c1 = identification_condition(fam, r0, e)?;
    let cond_json = |c: &lao_core::IdentificationCheck, h: usize| {
        json!({"hypothesis": h + 1, "holds": c.holds, "threshold": ext(c.threshold), "margin": ext(c.margin)})
    };
    let mut warnings = Vec::new();
    let mut t = Table::new(&["hypotheses", "e", "exponent", "condition_holds"]);
    let (value, conditions, target) = match r2 {
        None => {
            let v = identification_reliability(fam, r0, e)?;
            if !c1.holds {
                warnings.push(format!(
                    "identification condition for hypothesis {} fails: e must be below {}",
                    r0 + 1,
                    c1.threshold
                ));
            }
            (v, vec![cond_json(&c1, r0)], vec![r0 + 1])
        }
        Some(r2) => {
            let r1 = parse::index(&r2.to_string(), fam.len(), "--r2")?;
            let c2 = identification_condition(fam, r1, e)?;
            let v = if c1.holds && c2.holds {
                identify_pair(fam, r0, r1, e)?
            } else if force {
                warnings.push("identification conditions fail; value computed without them".into());
                pair_identification_exponent(fam, r0, r1, e)?
            } else {
                let (h, c) = if c1.holds { (r1, &c2) } else { (r0, &c1) };
                return Err(CliError::Validation(format!(
                    "identification condition for hypothesis {} fails: e = {e} is not below {} (use --force to evaluate anyway)",
                    h + 1,
                    c.threshold
                )));
            };
            (v, vec![cond_json(&c1, r0), cond_json(&c2, r1)], vec![r0 + 1, r1 + 1])
        }
    };
    let holds = conditions.iter().all(|c| c["holds"] == json!(true));
    let names: Vec<String> = target.iter().map(|h| h.to_string()).collect();
    t.push(vec![names.join(" "), cell(e), cell(value), holds.to_string()]);
    let mut rep = ctx.report(
        "identify",
        json!({"hypotheses": target, "e": e, "force": force}),
        json!({"exponent": ext(value), "conditions": conditions}),
        t,
    );
    rep.warnings = warnings;
    Ok(rep)
}

fn compound_spec(fam: &HypothesisFamily, objects: usize, arg: &str) -> Result<CompoundSpec, CliError> {
    let rows = parse::rows(arg, "spec")?;
    let given = match rows.len() {
        1 => vec![rows[0].clone(); objects],
        n if n == objects => rows,
        n => {
            return Err(CliError::Validation(format!(
                "compound spec needs 1 or {objects} rows, got {n}"
            )))
        }
    };
    if let Some(row) = given.iter().find(|r| r.len() + 1 != fam.len()) {
        return Err(CliError::Validation(format!(
            "each compound spec row needs {} values, got {}",
            fam.len() - 1,
            row.len()
        )));
    }
    Ok(CompoundSpec::new(fam.clone(), given)?)
}

pub fn compound(ctx: &Ctx, objects: usize, spec: &str) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let spec = compound_spec(fam, objects, spec)?;
    let lao = compound_lao(&spec)?;
    let mut warnings = Vec::new();
    for (i, r) in lao.compatibility.iter().enumerate() {
        warnings.extend(compat_warnings(r, &format!("object {}: ", i + 1)));
    }
    let mut t = Table::new(&["true", "accepted", "exponent"]);
    let mut entries = Vec::new();
    for (truth, acc, v) in lao.reliability.iter()? {
        t.push(vec![tuple_label(&truth), tuple_label(&acc), cell(v)]);
        entries.push(json!({"true": one_based(&truth), "accepted": one_based(&acc), "exponent": ext(v)}));
    }
    let per_object: Vec<Value> = lao
        .reliability
        .per_object()
        .iter()
        .zip(&lao.compatibility)
        .map(|(m, c)| json!({"matrix": to_value(m), "compatibility": compat_json(c)}))
        .collect();
    if lao.reliability.has_zero() {
        warnings.push("the compound matrix has a zero exponent".into());
    }
    let mut rep = ctx.report(
        "compound",
        json!({"objects": objects, "spec": ext_matrix(spec.given())}),
        json!({
            "objects": objects,
            "hypotheses": fam.len(),
            "compatible": lao.compatible,
            "has_zero": lao.reliability.has_zero(),
            "per_object": per_object,
            "entries": entries,
        }),
        t,
    );
    rep.warnings = warnings;
    Ok(rep)
}

pub fn dependent(ctx: &Ctx, marginal: &str, conditional: &str) -> Result<Report, CliError> {
    let fam = ctx.family.dependent()?;
    let spec = DependentPairSpec {
        marginal: parse::values(marginal, "marginal spec")?,
        conditional: parse::rows(conditional, "conditional spec")?,
    };
    let lao = dependent_pair_lao(fam, &spec)?;
    let (m1, m2) = (lao.first_count(), lao.second_count());
    let mut warnings = compat_warnings(&lao.marginal_compatibility, "first object: ");
    for (i, r) in lao.conditional_compatibility.iter().enumerate() {
        warnings.extend(compat_warnings(r, &format!("second object given first = {}: ", i + 1)));
    }
    let mut t = Table::new(&["true", "accepted", "exponent"]);
    let mut entries = Vec::new();
    for a in 0..m1 {
        for b in 0..m2 {
            for c in 0..m1 {
                for d in 0..m2 {
                    let v = lao.entry((a, b), (c, d))?;
                    t.push(vec![tuple_label(&[a, b]), tuple_label(&[c, d]), cell(v)]);
                    entries.push(json!({"true": [a + 1, b + 1], "accepted": [c + 1, d + 1], "exponent": ext(v)}));
                }
            }
        }
    }
    if lao.has_zero() {
        warnings.push("the pair matrix has a zero exponent".into());
    }
    let conditional: Vec<Value> = lao
        .conditional
        .iter()
        .zip(&lao.conditional_compatibility)
        .map(|(m, c)| json!({"matrix": to_value(m), "compatibility": compat_json(c)}))
        .collect();
    let mut rep = ctx.report(
        "dependent",
        json!({"marginal_spec": ext_vec(&spec.marginal), "conditional_spec": ext_matrix(&spec.conditional)}),
        json!({
            "compatible": lao.compatible,
            "has_zero": lao.has_zero(),
            "marginal": {"matrix": to_value(&lao.marginal), "compatibility": compat_json(&lao.marginal_compatibility)},
            "conditional": conditional,
            "entries": entries,
        }),
        t,
    );
    rep.warnings = warnings;
    Ok(rep)
}

pub fn enumerate(ctx: &Ctx, spec: &str, grid: &str, reject: bool) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let grid = parse::n_grid(grid)?;
    let rule = rule_for(fam, spec, reject)?;
    let fit = exponent_fit(|_| Ok(rule.clone()), fam, &grid)?;
    let theory: Vec<Vec<f64>> = if reject {
        let s = RejectionSpec::new(rule.radii().to_vec())?;
        rejection_reliability_matrix(fam, &s)?.entries().to_vec()
    } else {
        let s = DiagonalSpec::new(rule.radii().to_vec())?;
        reliability_matrix(fam, &s)?.entries().to_vec()
    };
    let matrix = if reject {
        None
    } else {
        Some(reliability_matrix(fam, &DiagonalSpec::new(rule.radii().to_vec())?)?)
    };
    let mut t = Table::new(&["n", "true", "outcome", "probability", "alpha"]);
    let mut per_n = Vec::new();
    let mut sandwich_failures = 0usize;
    for ex in &fit.exact {
        for m in 0..ex.hypotheses() {
            for o in 0..ex.outcomes() {
                t.push(vec![
                    ex.n.to_string(),
                    label(m),
                    outcome_label(&rule, o),
                    cell(ex.prob(m, o)),
                    cell(ex.alpha(m, o)),
                ]);
            }
        }
        let sandwich = match &matrix {
            Some(mx) => {
                let s = sandwich_check(ex, mx, fam.alphabet_size())?;
                sandwich_failures += s.iter().filter(|e| !e.ok).count();
                let rows: Vec<Value> = s
                    .iter()
                    .map(|e| {
                        json!({
                            "true": e.truth + 1,
                            "outcome": e.outcome + 1,
                            "alpha": ext(e.alpha),
                            "exponent": ext(e.exponent),
                            "lower": ext(e.lower),
                            "upper": ext(e.upper),
                            "ok": e.ok,
                        })
                    })
                    .collect();
                Value::Array(rows)
            }
            None => Value::Null,
        };
        per_n.push(json!({"n": ex.n, "probabilities": ext_matrix(&ex.probs), "sandwich": sandwich}));
    }
    let mut fits = Vec::new();
    for (m, row) in fit.entries.iter().enumerate() {
        for (o, f) in row.iter().enumerate() {
            fits.push(json!({
                "true": m + 1,
                "outcome": outcome_label(&rule, o),
                "fitted_exponent": ext(f.limit),
                "slope": ext(f.slope),
                "residual": ext(f.residual),
                "rates": ext_vec(&f.rates),
                "exponent": ext(theory[m][o]),
                "monotone": f.monotone,
                "infinite": f.infinite,
            }));
        }
    }
    let mut rep = ctx.report(
        "enumerate",
        json!({"spec": ext_vec(rule.radii()), "reject": reject, "n_grid": grid}),
        json!({"per_n": per_n, "fits": fits, "sandwich_failures": sandwich_failures}),
        t,
    );
    if sandwich_failures > 0 {
        rep.warnings.push(format!("{sandwich_failures} entries fall outside the polynomial sandwich"));
    }
    Ok(rep)
}

pub fn simulate(ctx: &Ctx, spec: &str, grid: &str, trials: u64, reject: bool) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let grid = parse::n_grid(grid)?;
    let rule = rule_for(fam, spec, reject)?;
    let seed = ctx.seed.unwrap_or(1);
    let exact_ok = fam.alphabet_size() <= MAX_ENUMERATION_ALPHABET;
    let runs = parallel_map(&grid, |&n| -> Result<_, CliError> {
        let mc = mc_error_matrix(&rule, fam, n as usize, trials, seed)?;
        let exact = if exact_ok && n <= MAX_ENUMERATION_N {
            Some(lao_core::exact_error_matrix(&rule, fam, n)?)
        } else {
            None
        };
        Ok((mc, exact))
    });
    let mut t = Table::new(&["n", "true", "outcome", "hits", "estimate", "lower", "upper", "exact", "z"]);
    let mut per_n = Vec::new();
    let mut disagreements = 0usize;
    for run in runs {
        let (mc, exact) = run?;
        let mut entries = Vec::new();
        for m in 0..mc.counts.len() {
            for o in 0..mc.counts[m].len() {
                let (lo, hi) = mc.interval(m, o, lao_core::empirics::Z95);
                let p_hat = mc.estimates[m][o];
                let (p, z) = match &exact {
                    Some(ex) => {
                        let p = ex.prob(m, o);
                        let sd = (p * (1.0 - p) / trials as f64).sqrt();
                        let z = if sd > 0.0 {
                            (p_hat - p).abs() / sd
                        } else if (p_hat - p).abs() < 1e-15 {
                            0.0
                        } else {
                            f64::INFINITY
                        };
                        if z > AGREEMENT_SIGMAS {
                            disagreements += 1;
                        }
                        (Some(p), Some(z))
                    }
                    None => (None, None),
                };
                t.push(vec![
                    mc.n.to_string(),
                    label(m),
                    outcome_label(&rule, o),
                    mc.counts[m][o].to_string(),
                    cell(p_hat),
                    cell(lo),
                    cell(hi),
                    p.map(cell).unwrap_or_default(),
                    z.map(cell).unwrap_or_default(),
                ]);
                entries.push(json!({
                    "true": m + 1,
                    "outcome": outcome_label(&rule, o),
                    "hits": mc.counts[m][o],
                    "estimate": ext(p_hat),
                    "wilson95": [ext(lo), ext(hi)],
                    "exact": p.map(ext),
                    "z": z.map(ext),
                }));
            }
        }
        per_n.push(json!({"n": mc.n, "entries": entries}));
    }
    let mut rep = ctx.report(
        "simulate",
        json!({"spec": ext_vec(rule.radii()), "reject": reject, "n_grid": grid, "trials": trials}),
        json!({"per_n": per_n, "agreement_sigmas": AGREEMENT_SIGMAS, "disagreements": disagreements}),
        t,
    );
    rep.seed = Some(seed);
    if disagreements > 0 {
        rep.warnings.push(format!(
            "{disagreements} entries differ from the exact probability by more than {AGREEMENT_SIGMAS} standard deviations"
        ));
    }
    Ok(rep)
}

/// Single-slot probes for each swept object, the other slots at the last
/// hypothesis.
fn default_probes(objects: usize, hyps: usize, swept: &[usize]) -> Vec<SweepProbe> {
    let mut seen = Vec::new();
    let mut probes = Vec::new();
    for &i in swept {
        if seen.contains(&i) {
            continue;
        }
        seen.push(i);
        for m in 0..hyps {
            for l in 0..hyps {
                if l == m {
                    continue;
                }
                let mut truth = vec![hyps - 1; objects];
                let mut accepted = truth.clone();
                truth[i] = m;
                accepted[i] = l;
                probes.push(SweepProbe { truth, accepted });
            }
        }
    }
    probes
}

pub fn sweep(ctx: &Ctx, objects: usize, spec: &str, axes: &[String], probes: &[String]) -> Result<Report, CliError> {
    let fam = ctx.family.single()?;
    let spec = compound_spec(fam, objects, spec)?;
    let m = fam.len();
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Validation(format!("sweep takes 1 or 2 axes, got {}", axes.len())));
    }
    let axes: Vec<SweepAxis> = axes
        .iter()
        .map(|a| {
            let (object, hypothesis, values) = parse::axis(a, objects, m)?;
            Ok(SweepAxis { object, hypothesis, values })
        })
        .collect::<Result<_, CliError>>()?;
    let probes: Vec<SweepProbe> = if probes.is_empty() {
        let swept: Vec<usize> = axes.iter().map(|a| a.object).collect();
        default_probes(objects, m, &swept)
    } else {
        probes
            .iter()
            .map(|p| {
                let (accepted, truth) = parse::probe(p, objects, m)?;
                Ok(SweepProbe { truth, accepted })
            })
            .collect::<Result<_, CliError>>()?
    };
    let first = axes[0].values.clone();
    let chunks: Vec<Vec<f64>> = first
        .chunks(first.len().div_ceil(std::thread::available_parallelism().map_or(1, |n| n.get())))
        .map(|c| c.to_vec())
        .collect();
    let parts = parallel_map(&chunks, |chunk| {
        let mut local = axes.clone();
        local[0].values = chunk.clone();
        compound_sweep(&spec, &local, &probes)
    });
    let mut points = Vec::new();
    for p in parts {
        points.extend(p?);
    }
    let probe_names: Vec<String> = probes
        .iter()
        .map(|p| format!("E{}|{}", tuple_label(&p.accepted), tuple_label(&p.truth)))
        .collect();
    let mut header: Vec<String> = axes
        .iter()
        .map(|a| format!("E{}|{}@object{}", a.hypothesis + 1, a.hypothesis + 1, a.object + 1))
        .collect();
    header.extend(probe_names.iter().cloned());
    header.push("compatible".into());
    let mut t = Table { header, rows: Vec::new() };
    for p in &points {
        let mut row: Vec<String> = p.coords.iter().map(|c| cell(*c)).collect();
        row.extend(p.entries.iter().map(|v| cell(*v)));
        row.push(p.compatible.to_string());
        t.push(row);
    }
    // first coordinate (along the first axis, single-axis sweeps only) where
    // each probe vanishes
    let onsets: Vec<Value> = (0..probes.len())
        .map(|j| {
            let onset = if axes.len() == 1 {
                points.iter().find(|p| p.entries[j] <= ZERO_EXPONENT).map(|p| p.coords[0])
            } else {
                None
            };
            json!({"probe": probe_names[j], "zero_onset": onset})
        })
        .collect();
    let probes_json: Vec<Value> = probes
        .iter()
        .zip(&probe_names)
        .map(|(p, name)| json!({"name": name, "true": one_based(&p.truth), "accepted": one_based(&p.accepted)}))
        .collect();
    let points_json: Vec<Value> = points
        .iter()
        .map(|p| json!({"coords": ext_vec(&p.coords), "entries": ext_vec(&p.entries), "compatible": p.compatible}))
        .collect();
    let axes_json: Vec<Value> = axes
        .iter()
        .map(|a| json!({"object": a.object + 1, "hypothesis": a.hypothesis + 1, "values": ext_vec(&a.values)}))
        .collect();
    Ok(ctx.report(
        "sweep",
        json!({"objects": objects, "spec": ext_matrix(spec.given()), "axes": axes_json}),
        json!({"probes": probes_json, "points": points_json, "zero_onsets": onsets}),
        t,
    ))
}
