//! Finite-sample ground truth for the exponents.
//!
//! [`exact_error_matrix`] sums exact type-class probabilities over the
//! decision regions of a rule. [`mc_error_matrix`] estimates the same
//! quantities by simulation. [`exponent_fit`] turns exact probabilities over
//! a grid of sample sizes into extrapolated exponents, and [`sandwich_check`]
//! tests them against the method-of-types polynomial bounds.
//!
//! Error matrices follow the reliability-matrix layout: row = true
//! hypothesis, column = outcome.

use serde::Serialize;

use crate::simplex::{count_symbols, enumerate_types, ln_probs, ln_type_class_prob, sample, LogBase};
use crate::single::{Classifier, HypothesisFamily, ReliabilityMatrix};
use crate::{Error, Result};

/// Largest alphabet enumerated exactly.
pub const MAX_ENUMERATION_ALPHABET: usize = 4;
/// Largest sample size enumerated exactly.
pub const MAX_ENUMERATION_N: u32 = 120;

fn check_rule<C: Classifier + ?Sized>(rule: &C, fam: &HypothesisFamily) -> Result<()> {
    if rule.alphabet_size() != fam.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: rule.alphabet_size(),
            found: fam.alphabet_size(),
        });
    }
    Ok(())
}

/// Exact outcome probabilities at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorMatrixExact {
    pub n: u32,
    /// `probs[m][l]`: probability of outcome `l` under hypothesis `m`.
    pub probs: Vec<Vec<f64>>,
}

impl ErrorMatrixExact {
    pub fn prob(&self, truth: usize, outcome: usize) -> f64 {
        self.probs[truth][outcome]
    }

    /// Error probability: the outcome probability for `outcome != truth`,
    /// and the total probability of every other outcome for
    /// `outcome == truth`.
    pub fn alpha(&self, truth: usize, outcome: usize) -> f64 {
        if outcome != truth {
            return self.probs[truth][outcome];
        }
        self.probs[truth]
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != truth)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn hypotheses(&self) -> usize {
        self.probs.len()
    }

    pub fn outcomes(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }
}

/// Exact probabilities of each outcome of `rule` under each hypothesis of
/// `fam`, by summing over all types of length `n`.
pub fn exact_error_matrix<C: Classifier + ?Sized>(
    rule: &C,
    fam: &HypothesisFamily,
    n: u32,
) -> Result<ErrorMatrixExact> {
    check_rule(rule, fam)?;
    let k = fam.alphabet_size();
    if k > MAX_ENUMERATION_ALPHABET || n > MAX_ENUMERATION_N {
        return Err(Error::GuardExceeded(format!(
            "exact enumeration limited to {MAX_ENUMERATION_ALPHABET} symbols and n <= {MAX_ENUMERATION_N}, got {k} symbols and n = {n}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidSpec("sample size must be positive".into()));
    }
    let lns: Vec<Vec<f64>> = fam.hypotheses().iter().map(ln_probs).collect();
    let mut probs = vec![vec![0.0; rule.outcome_count()]; fam.len()];
    for t in enumerate_types(n, k) {
        let outcome = rule.outcome(&t);
        for (row, ln_g) in probs.iter_mut().zip(&lns) {
            let lp = ln_type_class_prob(&t, ln_g);
            if lp > f64::NEG_INFINITY {
                row[outcome] += lp.exp();
            }
        }
    }
    Ok(ErrorMatrixExact { n, probs })
}

/// Wilson score interval for `hits` successes in `trials`, at `z` standard
/// deviations.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the endpoints are exactly 0 and 1 at the extremes
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Monte Carlo outcome frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// `counts[m][l]`: trials under hypothesis `m` with outcome `l`.
    pub counts: Vec<Vec<u64>>,
    pub estimates: Vec<Vec<f64>>,
    /// Half-widths of the 95% Wilson intervals.
    pub radii: Vec<Vec<f64>>,
}

impl McEstimate {
    pub fn interval(&self, truth: usize, outcome: usize, z: f64) -> (f64, f64) {
        wilson_interval(self.counts[truth][outcome], self.trials, z)
    }

    /// Counts for the error event of [`ErrorMatrixExact::alpha`].
    pub fn error_hits(&self, truth: usize, outcome: usize) -> u64 {
        if outcome != truth {
            return self.counts[truth][outcome];
        }
        self.trials - self.counts[truth][truth]
    }
}

/// Seed for one (hypothesis, trial) pair; independent of evaluation order.
fn trial_seed(seed: u64, hypothesis: usize, trial: u64) -> u64 {
    let mut z = seed
        ^ (hypothesis as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
        ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simulated outcome frequencies of `rule`: `trials` samples of size `n`
/// per hypothesis.
pub fn mc_error_matrix<C: Classifier + ?Sized>(
    rule: &C,
    fam: &HypothesisFamily,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_rule(rule, fam)?;
    if trials == 0 || n == 0 {
        return Err(Error::InvalidSpec(
            "sample size and trial count must be positive".into(),
        ));
    }
    let k = fam.alphabet_size();
    let outcomes = rule.outcome_count();
    let mut counts = vec![vec![0u64; outcomes]; fam.len()];
    for (m, g) in fam.hypotheses().iter().enumerate() {
        for trial in 0..trials {
            let s = sample(g, n, trial_seed(seed, m, trial));
            let t = count_symbols(&s, k)?;
            counts[m][rule.outcome(&t)] += 1;
        }
    }
    let estimates = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / trials as f64).collect())
        .collect();
    let radii = counts
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| {
                    let (lo, hi) = wilson_interval(c, trials, Z95);
                    (hi - lo) / 2.0
                })
                .collect()
        })
        .collect();
    Ok(McEstimate {
        n,
        trials,
        seed,
        counts,
        estimates,
        radii,
    })
}

/// Least-squares fit of `y_n = -(1/n) log alpha_n` against
/// `a + b log(n+1)/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryFit {
    /// `-(1/n) log alpha_n` per grid point (`inf` where `alpha_n = 0`).
    #[serde(with = "crate::extended::vec")]
    pub rates: Vec<f64>,
    /// Extrapolated exponent `a`; `inf` when every `alpha_n` is zero.
    #[serde(with = "crate::extended::value")]
    pub limit: f64,
    pub slope: f64,
    /// Root-mean-square fit residual.
    pub residual: f64,
    /// `alpha_n = 0` at every grid point.
    pub infinite: bool,
    /// Some but not all `alpha_n` vanish; the fit uses the positive ones.
    pub partial: bool,
    /// Rates are nondecreasing in `n` (diagnostic only).
    pub monotone: bool,
}

/// Fits one error-probability sequence; `ns` ascending.
pub fn fit_entry(ns: &[u32], alphas: &[f64], base: LogBase) -> EntryFit {
    let rates: Vec<f64> = ns
        .iter()
        .zip(alphas)
        .map(|(&n, &a)| -base.from_nats(a.ln()) / n as f64)
        .collect();
    let points: Vec<(f64, f64)> = ns
        .iter()
        .zip(&rates)
        .filter(|(_, r)| r.is_finite())
        .map(|(&n, &r)| (base.from_nats(((n + 1) as f64).ln()) / n as f64, r))
        .collect();
    let monotone = rates.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let partial = !points.is_empty() && points.len() < rates.len();
    if points.is_empty() {
        return EntryFit {
            rates,
            limit: f64::INFINITY,
            slope: 0.0,
            residual: 0.0,
            infinite: true,
            partial: false,
            monotone,
        };
    }
    let (a, b) = if points.len() == 1 {
        (points[0].1, 0.0)
    } else {
        let len = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
        let my = points.iter().map(|p| p.1).sum::<f64>() / len;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (my - b * mx, b)
    };
    let residual = (points
        .iter()
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    EntryFit {
        rates,
        limit: a,
        slope: b,
        residual,
        infinite: false,
        partial,
        monotone,
    }
}

/// Exponent fits for every (truth, outcome) entry of a rule over a grid of
/// sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub grid: Vec<u32>,
    /// `entries[m][l]` fits [`ErrorMatrixExact::alpha`]`(m, l)`.
    pub entries: Vec<Vec<EntryFit>>,
    pub exact: Vec<ErrorMatrixExact>,
}

impl ExponentFit {
    pub fn limit(&self, truth: usize, outcome: usize) -> f64 {
        self.entries[truth][outcome].limit
    }
}

/// Exact error probabilities of `build(n)` at each `n` of `grid`, fitted
/// entry by entry with [`fit_entry`].
pub fn exponent_fit<C, F>(build: F, fam: &HypothesisFamily, grid: &[u32]) -> Result<ExponentFit>
where
    C: Classifier,
    F: Fn(u32) -> Result<C>,
{
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty sample-size grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("sample-size grid must be strictly ascending".into()));
    }
    let exact = grid
        .iter()
        .map(|&n| exact_error_matrix(&build(n)?, fam, n))
        .collect::<Result<Vec<_>>>()?;
    let rows = exact[0].hypotheses();
    let cols = exact[0].outcomes();
    let entries = (0..rows)
        .map(|m| {
            (0..cols)
                .map(|l| {
                    let alphas: Vec<f64> = exact.iter().map(|e| e.alpha(m, l)).collect();
                    fit_entry(grid, &alphas, fam.base())
                })
                .collect()
        })
        .collect();
    Ok(ExponentFit {
        grid: grid.to_vec(),
        entries,
        exact,
    })
}

/// One entry of the polynomial sandwich
/// `(n+1)^-k b^(-n E) <= alpha <= (n+1)^k b^(-n E)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichEntry {
    pub truth: usize,
    pub outcome: usize,
    pub alpha: f64,
    #[serde(with = "crate::extended::value")]
    pub exponent: f64,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

/// Checks every entry of `exact` against the exponents in `reliability`
/// with the polynomial factor `(n+1)^k`, `k` the alphabet size.
pub fn sandwich_check(
    exact: &ErrorMatrixExact,
    reliability: &ReliabilityMatrix,
    alphabet_size: usize,
) -> Result<Vec<SandwichEntry>> {
    if reliability.size() != exact.hypotheses() || exact.outcomes() != exact.hypotheses() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} error matrix against {}x{} exponents",
            exact.hypotheses(),
            exact.outcomes(),
            reliability.size(),
            reliability.size()
        )));
    }
    let base = reliability.base();
    let n = exact.n as f64;
    let ln_poly = alphabet_size as f64 * (n + 1.0).ln();
    let mut out = Vec::new();
    for m in 0..exact.hypotheses() {
        for l in 0..exact.outcomes() {
            let alpha = exact.alpha(m, l);
            let e = reliability.get(m, l);
            let ln_core = -n * base.to_nats(e);
            let lower = (ln_core - ln_poly).exp();
            let upper = (ln_core + ln_poly).exp().min(1.0);
            // relative slack for rounding in the enumeration sums
            let ok = alpha >= lower * (1.0 - 1e-9) && alpha <= upper * (1.0 + 1e-9) + 1e-15;
            out.push(SandwichEntry {
                truth: m,
                outcome: l,
                alpha,
                exponent: e,
                lower,
                upper,
                ok,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi::{compound_lao, renumbered_family, CompoundSpec};
    use crate::single::{build_rule, reliability_matrix, DecisionRule, DiagonalSpec};
    use crate::simplex::EmpiricalType;

    const B: LogBase = LogBase::BITS;

    fn example() -> HypothesisFamily {
        HypothesisFamily::from_rows(&[vec![0.10, 0.90], vec![0.85, 0.15], vec![0.23, 0.77]], B).unwrap()
    }

    struct Always(usize, usize);

    impl Classifier for Always {
        fn alphabet_size(&self) -> usize {
            self.1
        }
        fn outcome_count(&self) -> usize {
            2
        }
        fn outcome(&self, _: &EmpiricalType) -> usize {
            self.0
        }
    }

    struct FirstSymbol;

    impl Classifier for FirstSymbol {
        fn alphabet_size(&self) -> usize {
            2
        }
        fn outcome_count(&self) -> usize {
            2
        }
        fn outcome(&self, t: &EmpiricalType) -> usize {
            usize::from(t.counts()[0] == 0)
        }
    }

    #[test]
    fn columns_sum_to_one() {
        let fam = example();
        let rule = build_rule(&fam, &DiagonalSpec::new(vec![0.05, 0.5]).unwrap()).unwrap();
        for n in [1, 10, 60] {
            let ex = exact_error_matrix(&rule, &fam, n).unwrap();
            for m in 0..3 {
                let s: f64 = ex.probs[m].iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!((ex.alpha(m, m) - (1.0 - ex.prob(m, m))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_draw_by_hand() {
        let fam = HypothesisFamily::from_rows(&[vec![0.3, 0.7], vec![0.8, 0.2]], B).unwrap();
        let ex = exact_error_matrix(&FirstSymbol, &fam, 1).unwrap();
        assert_eq!(ex.alpha(0, 1), 0.7);
        assert_eq!(ex.alpha(1, 0), 0.8);
    }

    #[test]
    fn guards() {
        let fam = example();
        let rule = build_rule(&fam, &DiagonalSpec::new(vec![0.05, 0.5]).unwrap()).unwrap();
        assert!(matches!(exact_error_matrix(&rule, &fam, 121), Err(Error::GuardExceeded(_))));
        let five = HypothesisFamily::from_rows(&[vec![0.2; 5], vec![0.1, 0.1, 0.2, 0.3, 0.3]], B).unwrap();
        let r5 = build_rule(&five, &DiagonalSpec::new(vec![0.1]).unwrap()).unwrap();
        assert!(matches!(exact_error_matrix(&r5, &five, 3), Err(Error::GuardExceeded(_))));
        assert!(exponent_fit(|_| Ok(rule.clone()), &fam, &[]).is_err());
    }

    #[test]
    fn constant_rule_monte_carlo() {
        let fam = example();
        let est = mc_error_matrix(&Always(0, 2), &fam, 5, 100, 1).unwrap();
        for m in 0..3 {
            assert_eq!(est.estimates[m][0], 1.0);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let fam = example();
        let rule = build_rule(&fam, &DiagonalSpec::new(vec![0.05, 0.5]).unwrap()).unwrap();
        let a = mc_error_matrix(&rule, &fam, 20, 2000, 42).unwrap();
        let b = mc_error_matrix(&rule, &fam, 20, 2000, 42).unwrap();
        assert_eq!(a, b);
        let c = mc_error_matrix(&rule, &fam, 20, 2000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let fam = example();
        let rule = build_rule(&fam, &DiagonalSpec::new(vec![0.05, 0.5]).unwrap()).unwrap();
        let ex = exact_error_matrix(&rule, &fam, 20).unwrap();
        let est = mc_error_matrix(&rule, &fam, 20, 20_000, 7).unwrap();
        for m in 0..3 {
            for l in 0..3 {
                let (lo, hi) = est.interval(m, l, 4.0);
                assert!(lo <= ex.prob(m, l) && ex.prob(m, l) <= hi, "({m},{l})");
            }
        }
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((hi - lo) / 2.0 < 0.1);
        let (lo, hi) = wilson_interval(100, 100, Z95);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.95);
    }

    #[test]
    fn geometric_sequence_fit() {
        let ns = [20, 30, 40, 50, 60];
        let beta: f64 = 0.7;
        let alphas: Vec<f64> = ns.iter().map(|&n| beta.powi(n as i32)).collect();
        let fit = fit_entry(&ns, &alphas, B);
        assert!((fit.limit + beta.log2()).abs() < 1e-12);
        assert!(fit.slope.abs() < 1e-9);
        // polynomial prefactor (n+1)^2 is absorbed by the log term
        let alphas: Vec<f64> = ns.iter().map(|&n| ((n + 1) as f64).powi(2) * beta.powi(n as i32)).collect();
        let fit = fit_entry(&ns, &alphas, B);
        assert!((fit.limit + beta.log2()).abs() < 1e-9);
        assert!((fit.slope + 2.0).abs() < 1e-9);
        let zeros = fit_entry(&ns, &[0.0; 5], B);
        assert!(zeros.infinite && zeros.limit == f64::INFINITY);
    }

    #[test]
    fn incompatible_zero_entry_has_vanishing_slope() {
        let fam = example();
        let d31 = fam.divergence(2, 0).unwrap();
        let spec = DiagonalSpec::new(vec![d31 + 0.05, 0.5]).unwrap();
        let mat = reliability_matrix(&fam, &spec).unwrap();
        assert_eq!(mat.get(2, 0), 0.0);
        let fit = exponent_fit(|_| build_rule(&fam, &spec), &fam, &[20, 30, 40, 50, 60]).unwrap();
        let e = &fit.entries[2][0];
        assert!(fit.exact.iter().all(|x| x.alpha(2, 0) > 0.4));
        assert!(e.limit.abs() < 0.02, "{}", e.limit);
    }

    #[test]
    fn sandwich_holds_for_example() {
        let fam = example();
        let spec = DiagonalSpec::new(vec![0.05, 0.5]).unwrap();
        let rule = build_rule(&fam, &spec).unwrap();
        let mat = reliability_matrix(&fam, &spec).unwrap();
        for n in [20, 40, 60] {
            let ex = exact_error_matrix(&rule, &fam, n).unwrap();
            for entry in sandwich_check(&ex, &mat, 2).unwrap() {
                assert!(entry.ok, "{entry:?}");
            }
        }
    }

    #[test]
    fn product_law_for_independent_objects() {
        let fam = HypothesisFamily::from_rows(&[vec![0.2, 0.8], vec![0.7, 0.3]], B).unwrap();
        let e = 0.3 * fam.divergence(1, 0).unwrap();
        let lao = compound_lao(&CompoundSpec::uniform(fam.clone(), 2, vec![e]).unwrap()).unwrap();
        let rule = lao.rule().unwrap();
        let composite = renumbered_family(&fam, 2).unwrap();
        let single: DecisionRule = build_rule(&fam, &DiagonalSpec::new(vec![e]).unwrap()).unwrap();
        for n in [5, 17, 30] {
            let joint = exact_error_matrix(&rule, &composite, n).unwrap();
            let per = exact_error_matrix(&single, &fam, n).unwrap();
            for t in 0..4 {
                for a in 0..4 {
                    let (t1, t2, a1, a2) = (t / 2, t % 2, a / 2, a % 2);
                    if t1 != a1 && t2 != a2 {
                        let want = per.prob(t1, a1) * per.prob(t2, a2);
                        let got = joint.prob(t, a);
                        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
                    }
                }
            }
        }
    }
}
