//! Single-object LAO testing.
//!
//! Hypotheses are indexed from 0. The last hypothesis `M-1` plays the special
//! role: the first `M-1` hypotheses get divergence balls whose radii are the
//! prescribed diagonal exponents, and the last one receives whatever is left.
//!
//! Matrices are stored row-major with `entries[m][l]` the exponent of
//! accepting `l` when `m` is true.

use serde::{Deserialize, Serialize};

use crate::projection::{min_div_in_ball, min_div_outside_balls, BallConstraint};
use crate::simplex::{count_symbols, kl_nats, Alphabet, Distribution, EmpiricalType, LogBase, Sample};
use crate::{Error, Result};

/// Smallest pairwise divergence for two hypotheses to count as distinct.
pub const DISTINCTNESS_THRESHOLD: f64 = 1e-9;

/// `M >= 2` pairwise-distinct distributions on a shared alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisFamily {
    alphabet: Alphabet,
    hypotheses: Vec<Distribution>,
    base: LogBase,
}

impl HypothesisFamily {
    pub fn new(alphabet: Alphabet, hypotheses: Vec<Distribution>, base: LogBase) -> Result<Self> {
        if hypotheses.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "a family needs at least 2 hypotheses, got {}",
                hypotheses.len()
            )));
        }
        for g in &hypotheses {
            if g.len() != alphabet.len() {
                return Err(Error::AlphabetMismatch {
                    expected: alphabet.len(),
                    found: g.len(),
                });
            }
        }
        for (first, a) in hypotheses.iter().enumerate() {
            for (second, b) in hypotheses.iter().enumerate() {
                if first == second {
                    continue;
                }
                let divergence = base.from_nats(kl_nats(a.probs(), b.probs()));
                if divergence <= DISTINCTNESS_THRESHOLD {
                    return Err(Error::NotDistinct {
                        first,
                        second,
                        divergence,
                    });
                }
            }
        }
        Ok(HypothesisFamily {
            alphabet,
            hypotheses,
            base,
        })
    }

    /// Family over the alphabet `0..k` built from probability rows.
    pub fn from_rows(rows: &[Vec<f64>], base: LogBase) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        let hypotheses = rows
            .iter()
            .map(|r| Distribution::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        HypothesisFamily::new(Alphabet::indexed(k)?, hypotheses, base)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn hypotheses(&self) -> &[Distribution] {
        &self.hypotheses
    }

    pub fn hypothesis(&self, m: usize) -> Result<&Distribution> {
        self.hypotheses.get(m).ok_or(Error::IndexOutOfRange {
            index: m,
            bound: self.hypotheses.len(),
        })
    }

    /// Number of hypotheses `M`.
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    /// `D(G_l || G_m)` in the family's base.
    pub fn divergence(&self, l: usize, m: usize) -> Result<f64> {
        let (a, b) = (self.hypothesis(l)?, self.hypothesis(m)?);
        Ok(self.base.from_nats(kl_nats(a.probs(), b.probs())))
    }

    /// Family with hypothesis `perm[i]` moved to position `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        let hypotheses = perm.iter().map(|&p| self.hypotheses[p].clone()).collect();
        HypothesisFamily::new(self.alphabet.clone(), hypotheses, self.base)
    }

    fn ball(&self, m: usize, radius: f64) -> Result<BallConstraint> {
        BallConstraint::new(self.hypotheses[m].clone(), radius)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {n} items",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidSpec(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

fn check_radii(values: &[f64]) -> Result<()> {
    for &v in values {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "prescribed exponents must be finite and strictly positive, got {v}"
            )));
        }
    }
    Ok(())
}

/// Prescribed diagonal exponents `E_{m|m}` for `m = 0..M-1` (the last
/// hypothesis excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpec {
    values: Vec<f64>,
}

impl DiagonalSpec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("no prescribed exponents".into()));
        }
        check_radii(&values)?;
        Ok(DiagonalSpec { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_for(&self, fam: &HypothesisFamily) -> Result<()> {
        if self.values.len() + 1 != fam.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} hypotheses need {} prescribed exponents, got {}",
                fam.len(),
                fam.len() - 1,
                self.values.len()
            )));
        }
        Ok(())
    }
}

/// Ball radii `E_{m|m}` for every hypothesis of a rejection rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSpec {
    values: Vec<f64>,
}

impl RejectionSpec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("no radii".into()));
        }
        check_radii(&values)?;
        Ok(RejectionSpec { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_for(&self, fam: &HypothesisFamily) -> Result<()> {
        if self.values.len() != fam.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} hypotheses need {} radii, got {}",
                fam.len(),
                fam.len(),
                self.values.len()
            )));
        }
        Ok(())
    }
}

/// Which term attains the right-hand side of a compatibility condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BindingTerm {
    /// `D(G_other || G_m)` for a later hypothesis.
    Divergence { other: usize },
    /// Ball minimum `min { D(Q||G_m) : D(Q||G_other) <= E_other }` for an
    /// earlier hypothesis.
    BallMinimum { other: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityCondition {
    pub index: usize,
    pub given: f64,
    #[serde(with = "crate::extended::value")]
    pub bound: f64,
    /// `bound - given`; the condition holds iff this is positive.
    #[serde(with = "crate::extended::value")]
    pub margin: f64,
    pub binding: BindingTerm,
}

/// Per-hypothesis compatibility margins. `ok` iff every margin is positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub ok: bool,
    pub conditions: Vec<CompatibilityCondition>,
}

impl CompatibilityReport {
    pub fn margins(&self) -> Vec<f64> {
        self.conditions.iter().map(|c| c.margin).collect()
    }

    pub fn first_violation(&self) -> Option<&CompatibilityCondition> {
        self.conditions.iter().find(|c| c.margin <= 0.0)
    }
}

/// Upper bound on `E_{m|m}` that keeps every exponent positive, given the
/// earlier radii `values[..m]`.
fn compatibility_bound(fam: &HypothesisFamily, values: &[f64], m: usize) -> Result<(f64, BindingTerm)> {
    let mut best = (f64::INFINITY, BindingTerm::Divergence { other: m });
    for l in 0..m {
        let v = min_div_in_ball(&fam.hypotheses[l], &fam.hypotheses[m], values[l], fam.base)?.value;
        if v < best.0 {
            best = (v, BindingTerm::BallMinimum { other: l });
        }
    }
    for l in m + 1..fam.len() {
        let v = fam.divergence(l, m)?;
        if v < best.0 {
            best = (v, BindingTerm::Divergence { other: l });
        }
    }
    Ok(best)
}

/// Evaluates the compatibility conditions: for each `m < M-1`,
/// `E_{m|m} < min( min_{l<m} E*_{l|m}(E_{l|l}), min_{l>m} D(G_l||G_m) )`.
pub fn check_compatibility(fam: &HypothesisFamily, spec: &DiagonalSpec) -> Result<CompatibilityReport> {
    spec.check_for(fam)?;
    let mut conditions = Vec::with_capacity(spec.values.len());
    for (m, &given) in spec.values.iter().enumerate() {
        let (bound, binding) = compatibility_bound(fam, &spec.values, m)?;
        conditions.push(CompatibilityCondition {
            index: m,
            given,
            bound,
            margin: bound - given,
            binding,
        });
    }
    Ok(CompatibilityReport {
        ok: conditions.iter().all(|c| c.margin > 0.0),
        conditions,
    })
}

/// Builds a compatible spec by setting each `E_{m|m}` to `fractions[m]` times
/// its compatibility bound, in order. Fractions must lie in `(0, 1)`.
pub fn compatible_spec(fam: &HypothesisFamily, fractions: &[f64]) -> Result<DiagonalSpec> {
    if fractions.len() + 1 != fam.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} hypotheses need {} fractions, got {}",
            fam.len(),
            fam.len() - 1,
            fractions.len()
        )));
    }
    let mut values = Vec::with_capacity(fractions.len());
    for (m, &f) in fractions.iter().enumerate() {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidSpec(format!("fraction {f} outside (0, 1)")));
        }
        let (bound, _) = compatibility_bound(fam, &values, m)?;
        values.push(f * bound);
    }
    DiagonalSpec::new(values)
}

/// Matrix of exponents; `entries[m][l]` is the exponent of accepting `l` when
/// `m` is true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityMatrix {
    #[serde(with = "crate::extended::matrix")]
    entries: Vec<Vec<f64>>,
    base: LogBase,
}

impl ReliabilityMatrix {
    pub fn from_entries(entries: Vec<Vec<f64>>, base: LogBase) -> Result<Self> {
        let m = entries.len();
        if m < 2 || entries.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "reliability matrix must be square with at least 2 rows, got {m} rows"
            )));
        }
        Ok(ReliabilityMatrix { entries, base })
    }

    /// Exponent of accepting `accepted` when `truth` holds.
    pub fn get(&self, truth: usize, accepted: usize) -> f64 {
        self.entries[truth][accepted]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size()).map(|m| self.entries[m][m]).collect()
    }

    /// `min_{l != m} entries[m][l]`.
    pub fn row_min_off_diagonal(&self, m: usize) -> f64 {
        self.entries[m]
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != m)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn has_zero(&self) -> bool {
        self.entries.iter().flatten().any(|v| *v == 0.0)
    }

    /// Relabels hypotheses: row and column `i` of the result are row and
    /// column `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.size())?;
        let entries = perm
            .iter()
            .map(|&a| perm.iter().map(|&b| self.entries[a][b]).collect())
            .collect();
        Ok(ReliabilityMatrix {
            entries,
            base: self.base,
        })
    }
}

/// The ball-partition exponents for a prescribed diagonal.
///
/// * `E_{m|m}` is the prescribed value for `m < M-1`;
/// * accepting `l < M-1` costs `min { D(Q||G_m) : D(Q||G_l) <= E_{l|l} }`;
/// * accepting the last hypothesis costs the divergence minimum outside all
///   balls;
/// * the last diagonal is the row minimum.
///
/// Incompatible specs are still evaluated; some entries are then zero.
pub fn reliability_matrix(fam: &HypothesisFamily, spec: &DiagonalSpec) -> Result<ReliabilityMatrix> {
    spec.check_for(fam)?;
    let m_count = fam.len();
    let last = m_count - 1;
    let base = fam.base;
    let mut entries = vec![vec![0.0; m_count]; m_count];
    for (l, &radius) in spec.values.iter().enumerate() {
        for (m, row) in entries.iter_mut().enumerate() {
            row[l] = if m == l {
                radius
            } else {
                min_div_in_ball(&fam.hypotheses[l], &fam.hypotheses[m], radius, base)?.value
            };
        }
    }
    let balls = spec
        .values
        .iter()
        .enumerate()
        .map(|(l, &r)| fam.ball(l, r))
        .collect::<Result<Vec<_>>>()?;
    for (m, row) in entries.iter_mut().enumerate().take(last) {
        row[last] = min_div_outside_balls(&balls, &fam.hypotheses[m], base)?.value;
    }
    entries[last][last] = entries[last][..last].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ReliabilityMatrix { entries, base })
}

/// Anything that maps an empirical type to an outcome index.
pub trait Classifier {
    /// Symbols of the alphabet the types live on.
    fn alphabet_size(&self) -> usize;
    /// Number of distinct outcomes (`M`, or `M+1` with a reject outcome).
    fn outcome_count(&self) -> usize;
    /// Outcome for a type; the caller guarantees `t.len() == alphabet_size()`.
    fn outcome(&self, t: &EmpiricalType) -> usize;
}

/// Accepts the smallest `m` whose ball `D(t||G_m) <= radius_m` contains the
/// type, otherwise the fallback outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRule {
    family: HypothesisFamily,
    radii: Vec<f64>,
    rejection: bool,
    #[serde(skip)]
    ln_centers: Vec<Vec<f64>>,
    #[serde(skip)]
    radii_nats: Vec<f64>,
}

impl DecisionRule {
    fn new(family: HypothesisFamily, radii: Vec<f64>, rejection: bool) -> Self {
        let ln_centers = family
            .hypotheses
            .iter()
            .map(|g| g.probs().iter().map(|p| p.ln()).collect())
            .collect();
        let radii_nats = radii.iter().map(|r| family.base.to_nats(*r)).collect();
        DecisionRule {
            family,
            radii,
            rejection,
            ln_centers,
            radii_nats,
        }
    }

    pub fn family(&self) -> &HypothesisFamily {
        &self.family
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Whether the last outcome is a reject (index `M`) rather than
    /// hypothesis `M-1`.
    pub fn has_reject(&self) -> bool {
        self.rejection
    }

    /// Outcome for an already-normalised distribution.
    pub fn outcome_of(&self, q: &[f64]) -> usize {
        let ln_q: Vec<f64> = q.iter().map(|p| p.ln()).collect();
        self.decide(q, &ln_q)
    }

    fn decide(&self, q: &[f64], ln_q: &[f64]) -> usize {
        for (m, (lc, r)) in self.ln_centers.iter().zip(&self.radii_nats).enumerate() {
            let mut d = 0.0;
            for ((&p, &lp), &lg) in q.iter().zip(ln_q).zip(lc) {
                if p > 0.0 {
                    d += p * (lp - lg);
                }
            }
            if d <= *r {
                return m;
            }
        }
        self.radii.len()
    }
}

impl Classifier for DecisionRule {
    fn alphabet_size(&self) -> usize {
        self.family.alphabet_size()
    }

    fn outcome_count(&self) -> usize {
        self.radii.len() + 1
    }

    fn outcome(&self, t: &EmpiricalType) -> usize {
        let q: Vec<f64> = t.counts().iter().map(|&c| c as f64 / t.n() as f64).collect();
        let ln_q = t.ln_probs();
        self.decide(&q, &ln_q)
    }
}

/// The ball-partition rule: outcome `m < M-1` for the first ball containing
/// the type, `M-1` otherwise.
pub fn build_rule(fam: &HypothesisFamily, spec: &DiagonalSpec) -> Result<DecisionRule> {
    spec.check_for(fam)?;
    Ok(DecisionRule::new(fam.clone(), spec.values.clone(), false))
}

/// Ball partition with a reject option: outcome `m <= M-1` for the first of
/// `M` balls containing the type, `M` (reject) otherwise.
pub fn rejection_rule(fam: &HypothesisFamily, spec: &RejectionSpec) -> Result<DecisionRule> {
    spec.check_for(fam)?;
    Ok(DecisionRule::new(fam.clone(), spec.values.clone(), true))
}

/// Classifies a sample through its empirical type.
pub fn classify<C: Classifier + ?Sized>(rule: &C, s: &Sample) -> Result<usize> {
    let t = count_symbols(s, rule.alphabet_size())?;
    Ok(rule.outcome(&t))
}

/// Identification exponent for hypothesis `r` with radius `e`:
/// `min_{m != r} min { D(Q||G_m) : D(Q||G_r) <= e }`.
pub fn identification_reliability(fam: &HypothesisFamily, r: usize, e: f64) -> Result<f64> {
    let center = fam.hypothesis(r)?;
    let mut best = f64::INFINITY;
    for (m, g) in fam.hypotheses.iter().enumerate() {
        if m != r {
            best = best.min(min_div_in_ball(center, g, e, fam.base)?.value);
        }
    }
    Ok(best)
}

/// Positivity condition for identifying `r`: `e < min_{m != r} D(G_m||G_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentificationCheck {
    pub holds: bool,
    #[serde(with = "crate::extended::value")]
    pub threshold: f64,
    #[serde(with = "crate::extended::value")]
    pub margin: f64,
}

pub fn identification_condition(fam: &HypothesisFamily, r: usize, e: f64) -> Result<IdentificationCheck> {
    fam.hypothesis(r)?;
    let mut threshold = f64::INFINITY;
    for m in 0..fam.len() {
        if m != r {
            threshold = threshold.min(fam.divergence(m, r)?);
        }
    }
    Ok(IdentificationCheck {
        holds: e < threshold,
        threshold,
        margin: threshold - e,
    })
}

/// Exponents of a rejection rule: `M` rows, `M+1` columns, the last column
/// being the reject outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionMatrix {
    #[serde(with = "crate::extended::matrix")]
    entries: Vec<Vec<f64>>,
    base: LogBase,
}

impl RejectionMatrix {
    pub fn get(&self, truth: usize, outcome: usize) -> f64 {
        self.entries[truth][outcome]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    pub fn hypotheses(&self) -> usize {
        self.entries.len()
    }

    /// Exponent of refusing to decide when `truth` holds.
    pub fn reject(&self, truth: usize) -> f64 {
        self.entries[truth][self.entries.len()]
    }
}

/// Exponents of [`rejection_rule`]: ball minima off the diagonal, the
/// divergence minimum outside all balls in the reject column, and the row
/// minimum on the diagonal.
pub fn rejection_reliability_matrix(fam: &HypothesisFamily, spec: &RejectionSpec) -> Result<RejectionMatrix> {
    spec.check_for(fam)?;
    let m_count = fam.len();
    let base = fam.base;
    let balls = spec
        .values
        .iter()
        .enumerate()
        .map(|(l, &r)| fam.ball(l, r))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = vec![vec![0.0; m_count + 1]; m_count];
    for (m, row) in entries.iter_mut().enumerate() {
        let g = &fam.hypotheses[m];
        for (l, ball) in balls.iter().enumerate() {
            if l != m {
                row[l] = min_div_in_ball(&ball.center, g, ball.radius, base)?.value;
            }
        }
        row[m_count] = min_div_outside_balls(&balls, g, base)?.value;
        row[m] = row
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != m)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
    }
    Ok(RejectionMatrix { entries, base })
}
