//! Tests for several objects.
//!
//! Independent objects share one hypothesis family. Composite hypotheses are
//! index tuples; when flattened they are ordered lexicographically with the
//! first object most significant, which matches [`Distribution::product`].
//!
//! A dependent pair has a first object with its own family and a second
//! object whose family depends on the first object's hypothesis index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::projection::min_div_in_ball;
use crate::simplex::{count_symbols, Alphabet, Distribution, EmpiricalType, LogBase, Sample};
use crate::single::{
    build_rule, check_compatibility, reliability_matrix, Classifier, CompatibilityReport, DecisionRule,
    DiagonalSpec, HypothesisFamily, ReliabilityMatrix,
};
use crate::{Error, Result};

/// Largest product alphabet [`renumbered_family`] and [`CompoundRule`] build.
pub const MAX_PRODUCT_ALPHABET: usize = 4096;

/// Largest number of (truth, accepted) pairs materialised by
/// [`CompoundReliability::to_sparse_map`].
pub const MAX_MATERIALISED_ENTRIES: usize = 1 << 20;

/// Digits of `index` in base `radix`, most significant first.
fn digits(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

fn undigits(tuple: &[usize], radix: usize) -> usize {
    tuple.iter().fold(0, |acc, d| acc * radix + d)
}

fn checked_power(base: usize, exp: usize, limit: usize, what: &str) -> Result<usize> {
    let mut acc = 1usize;
    for _ in 0..exp {
        acc = acc.checked_mul(base).filter(|v| *v <= limit).ok_or_else(|| {
            Error::GuardExceeded(format!("{what}: {base}^{exp} exceeds {limit}"))
        })?;
    }
    Ok(acc)
}

/// Per-object prescribed exponents for `K` independent objects sharing a
/// family. `given[i][m]` is the exponent of accepting the all-last tuple when
/// only object `i` deviates, with hypothesis `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundSpec {
    family: HypothesisFamily,
    given: Vec<Vec<f64>>,
}

impl CompoundSpec {
    pub fn new(family: HypothesisFamily, given: Vec<Vec<f64>>) -> Result<Self> {
        if given.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "a compound test needs at least 2 objects, got {}",
                given.len()
            )));
        }
        for row in &given {
            if row.len() + 1 != family.len() {
                return Err(Error::DimensionMismatch(format!(
                    "each object needs {} prescribed exponents, got {}",
                    family.len() - 1,
                    row.len()
                )));
            }
            DiagonalSpec::new(row.clone())?;
        }
        Ok(CompoundSpec { family, given })
    }

    /// Same prescribed exponents for every object.
    pub fn uniform(family: HypothesisFamily, objects: usize, given: Vec<f64>) -> Result<Self> {
        CompoundSpec::new(family, vec![given; objects])
    }

    pub fn family(&self) -> &HypothesisFamily {
        &self.family
    }

    pub fn objects(&self) -> usize {
        self.given.len()
    }

    pub fn given(&self) -> &[Vec<f64>] {
        &self.given
    }

    /// Diagonal spec of object `i`.
    pub fn object_spec(&self, i: usize) -> Result<DiagonalSpec> {
        let row = self.given.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            bound: self.given.len(),
        })?;
        DiagonalSpec::new(row.clone())
    }
}

/// Exponents of a compound test, stored as per-object matrices.
///
/// The exponent for (truth tuple, accepted tuple) is the sum of per-object
/// exponents over the objects where the tuples differ; when they coincide it
/// is the minimum over all differing accepted tuples, which reduces to the
/// smallest per-object off-diagonal row minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundReliability {
    per_object: Vec<ReliabilityMatrix>,
}

impl CompoundReliability {
    pub fn per_object(&self) -> &[ReliabilityMatrix] {
        &self.per_object
    }

    pub fn objects(&self) -> usize {
        self.per_object.len()
    }

    /// Hypotheses per object.
    pub fn hypotheses(&self) -> usize {
        self.per_object[0].size()
    }

    fn check_tuple(&self, tuple: &[usize]) -> Result<()> {
        if tuple.len() != self.objects() {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for {} objects",
                tuple.len(),
                self.objects()
            )));
        }
        let m = self.hypotheses();
        if let Some(&bad) = tuple.iter().find(|&&v| v >= m) {
            return Err(Error::IndexOutOfRange { index: bad, bound: m });
        }
        Ok(())
    }

    /// Exponent of accepting `accepted` when `truth` holds.
    pub fn entry(&self, truth: &[usize], accepted: &[usize]) -> Result<f64> {
        self.check_tuple(truth)?;
        self.check_tuple(accepted)?;
        if truth == accepted {
            return Ok(self.diagonal_unchecked(truth));
        }
        Ok(truth
            .iter()
            .zip(accepted)
            .zip(&self.per_object)
            .filter(|((t, a), _)| t != a)
            .map(|((t, a), mat)| mat.get(*t, *a))
            .sum())
    }

    /// Exponent of rejecting `truth` when it holds.
    pub fn diagonal(&self, truth: &[usize]) -> Result<f64> {
        self.check_tuple(truth)?;
        Ok(self.diagonal_unchecked(truth))
    }

    fn diagonal_unchecked(&self, truth: &[usize]) -> f64 {
        truth
            .iter()
            .zip(&self.per_object)
            .map(|(t, mat)| mat.row_min_off_diagonal(*t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of composite hypotheses `M^K`, if it fits in memory limits.
    pub fn composite_count(&self) -> Result<usize> {
        checked_power(
            self.hypotheses(),
            self.objects(),
            MAX_MATERIALISED_ENTRIES,
            "composite hypotheses",
        )
    }

    /// All (truth, accepted, exponent) triples in lexicographic order.
    pub fn iter(&self) -> Result<impl Iterator<Item = (Vec<usize>, Vec<usize>, f64)> + '_> {
        let n = self.composite_count()?;
        if n.saturating_mul(n) > MAX_MATERIALISED_ENTRIES {
            return Err(Error::GuardExceeded(format!(
                "{n}^2 compound entries exceed {MAX_MATERIALISED_ENTRIES}"
            )));
        }
        let (m, k) = (self.hypotheses(), self.objects());
        Ok((0..n * n).map(move |idx| {
            let truth = digits(idx / n, m, k);
            let accepted = digits(idx % n, m, k);
            let v = self
                .entry(&truth, &accepted)
                .expect("tuples generated within range");
            (truth, accepted, v)
        }))
    }

    /// Full tensor keyed by (truth, accepted).
    pub fn to_sparse_map(&self) -> Result<BTreeMap<(Vec<usize>, Vec<usize>), f64>> {
        Ok(self.iter()?.map(|(t, a, v)| ((t, a), v)).collect())
    }

    /// Flattened `M^K x M^K` matrix over lexicographically ordered tuples.
    pub fn to_matrix(&self) -> Result<ReliabilityMatrix> {
        let n = self.composite_count()?;
        let mut entries = vec![vec![0.0; n]; n];
        for (t, a, v) in self.iter()? {
            entries[undigits(&t, self.hypotheses())][undigits(&a, self.hypotheses())] = v;
        }
        ReliabilityMatrix::from_entries(entries, self.per_object[0].base())
    }

    /// Whether some compound exponent vanishes.
    pub fn has_zero(&self) -> bool {
        self.per_object.iter().any(|mat| {
            (0..mat.size()).any(|t| (0..mat.size()).any(|a| a != t && mat.get(t, a) == 0.0))
        })
    }
}

/// Assembles compound exponents from per-object matrices of equal size.
pub fn compound_reliability(per_object: Vec<ReliabilityMatrix>) -> Result<CompoundReliability> {
    let first = per_object
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no per-object matrices".into()))?;
    if per_object.len() < 2 {
        return Err(Error::DimensionMismatch(
            "a compound test needs at least 2 objects".into(),
        ));
    }
    let (size, base) = (first.size(), first.base());
    for mat in &per_object {
        if mat.size() != size {
            return Err(Error::DimensionMismatch(format!(
                "per-object matrices of sizes {size} and {}",
                mat.size()
            )));
        }
        if mat.base() != base {
            return Err(Error::DimensionMismatch(
                "per-object matrices use different log bases".into(),
            ));
        }
    }
    Ok(CompoundReliability { per_object })
}

/// Compound test built from per-object ball partitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundLao {
    pub reliability: CompoundReliability,
    /// Per-object compatibility; all must hold for every exponent to be
    /// positive.
    pub compatibility: Vec<CompatibilityReport>,
    pub compatible: bool,
    spec: CompoundSpec,
}

impl CompoundLao {
    pub fn spec(&self) -> &CompoundSpec {
        &self.spec
    }

    pub fn rule(&self) -> Result<CompoundRule> {
        let rules = (0..self.spec.objects())
            .map(|i| build_rule(&self.spec.family, &self.spec.object_spec(i)?))
            .collect::<Result<Vec<_>>>()?;
        CompoundRule::new(rules)
    }
}

/// Compound LAO exponents. Object `i`'s prescribed values become its
/// per-object diagonal; each object then gets the single-object ball
/// partition.
pub fn compound_lao(spec: &CompoundSpec) -> Result<CompoundLao> {
    let mut matrices = Vec::with_capacity(spec.objects());
    let mut compatibility = Vec::with_capacity(spec.objects());
    for i in 0..spec.objects() {
        let object_spec = spec.object_spec(i)?;
        compatibility.push(check_compatibility(&spec.family, &object_spec)?);
        matrices.push(reliability_matrix(&spec.family, &object_spec)?);
    }
    Ok(CompoundLao {
        reliability: compound_reliability(matrices)?,
        compatible: compatibility.iter().all(|r| r.ok),
        compatibility,
        spec: spec.clone(),
    })
}

/// Per-object rules applied to the marginals of a composite sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundRule {
    rules: Vec<DecisionRule>,
    symbols: usize,
    outcomes: usize,
}

impl CompoundRule {
    pub fn new(rules: Vec<DecisionRule>) -> Result<Self> {
        if rules.len() < 2 {
            return Err(Error::DimensionMismatch(
                "a compound rule needs at least 2 objects".into(),
            ));
        }
        let k = rules[0].alphabet_size();
        let per = rules[0].outcome_count();
        if rules.iter().any(|r| r.alphabet_size() != k || r.outcome_count() != per) {
            return Err(Error::DimensionMismatch(
                "per-object rules disagree on alphabet or outcome count".into(),
            ));
        }
        Ok(CompoundRule {
            symbols: checked_power(k, rules.len(), MAX_PRODUCT_ALPHABET, "product alphabet")?,
            outcomes: per.pow(rules.len() as u32),
            rules,
        })
    }

    pub fn rules(&self) -> &[DecisionRule] {
        &self.rules
    }

    /// Per-object outcomes for a type over the product alphabet.
    pub fn outcomes(&self, t: &EmpiricalType) -> Vec<usize> {
        let k = self.rules[0].alphabet_size();
        let objects = self.rules.len();
        let mut marginals = vec![vec![0u32; k]; objects];
        for (symbol, &c) in t.counts().iter().enumerate() {
            if c > 0 {
                for (slot, x) in digits(symbol, k, objects).into_iter().enumerate() {
                    marginals[slot][x] += c;
                }
            }
        }
        marginals
            .into_iter()
            .zip(&self.rules)
            .map(|(counts, rule)| {
                let t = EmpiricalType::new(counts).expect("marginal of a valid type");
                rule.outcome(&t)
            })
            .collect()
    }

    /// Classifies one sample per object.
    pub fn classify_samples(&self, samples: &[Sample]) -> Result<Vec<usize>> {
        if samples.len() != self.rules.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for {} objects",
                samples.len(),
                self.rules.len()
            )));
        }
        if samples.iter().any(|s| s.len() != samples[0].len()) {
            return Err(Error::DimensionMismatch(
                "per-object samples differ in length".into(),
            ));
        }
        samples
            .iter()
            .zip(&self.rules)
            .map(|(s, r)| Ok(r.outcome(&count_symbols(s, r.alphabet_size())?)))
            .collect()
    }
}

impl Classifier for CompoundRule {
    fn alphabet_size(&self) -> usize {
        self.symbols
    }

    fn outcome_count(&self) -> usize {
        self.outcomes
    }

    fn outcome(&self, t: &EmpiricalType) -> usize {
        undigits(&self.outcomes(t), self.rules[0].outcome_count())
    }
}

/// The `M^K` product hypotheses of `K` independent objects, as a single
/// family on the product alphabet. Tuple `(m_1, ..., m_K)` has index
/// `sum m_i M^(K-i)` (first object most significant).
pub fn renumbered_family(fam: &HypothesisFamily, objects: usize) -> Result<HypothesisFamily> {
    if objects < 2 {
        return Err(Error::InvalidSpec(format!(
            "renumbering needs at least 2 objects, got {objects}"
        )));
    }
    let k = fam.alphabet_size();
    let symbols = checked_power(k, objects, MAX_PRODUCT_ALPHABET, "product alphabet")?;
    let m = fam.len();
    let count = checked_power(m, objects, MAX_PRODUCT_ALPHABET, "composite hypotheses")?;
    let labels = fam.alphabet().symbols();
    let alphabet = Alphabet::new((0..symbols).map(|s| {
        let parts: Vec<&str> = digits(s, k, objects)
            .into_iter()
            .map(|x| labels[x].as_str())
            .collect();
        format!("({})", parts.join(","))
    }))?;
    let hypotheses = (0..count)
        .map(|idx| {
            let tuple = digits(idx, m, objects);
            let mut d = fam.hypotheses()[tuple[0]].clone();
            for &t in &tuple[1..] {
                d = d.product(&fam.hypotheses()[t]);
            }
            d
        })
        .collect();
    HypothesisFamily::new(alphabet, hypotheses, fam.base())
}

/// Identification exponent for the pair "object 1 has `r1`, object 2 has
/// `r2`" with common radius `e`:
/// `min_{m1 != r1, m2 != r2} min(E(r1, m1), E(r2, m2))`, where
/// `E(r, m) = min { D(Q||G_m) : D(Q||G_r) <= e }`.
///
/// Requires `e < min(A(r1), A(r2))` with `A(r) = min_{l != r} D(G_l||G_r)`.
pub fn identify_pair(fam: &HypothesisFamily, r1: usize, r2: usize, e: f64) -> Result<f64> {
    let m = fam.len();
    for r in [r1, r2] {
        fam.hypothesis(r)?;
    }
    if !(e.is_finite() && e >= 0.0) {
        return Err(Error::NegativeRadius(e));
    }
    for r in [r1, r2] {
        let a = (0..m)
            .filter(|&l| l != r)
            .map(|l| fam.divergence(l, r))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if e >= a {
            return Err(Error::Precondition {
                condition: format!("pair identification bound A({r})"),
                detail: format!("radius {e} is not below A({r}) = {a}"),
            });
        }
    }
    pair_identification_exponent(fam, r1, r2, e)
}

/// The pair identification expression of [`identify_pair`] without the
/// radius gate.
pub fn pair_identification_exponent(fam: &HypothesisFamily, r1: usize, r2: usize, e: f64) -> Result<f64> {
    let m = fam.len();
    let ball = |r: usize, t: usize| -> Result<f64> {
        Ok(min_div_in_ball(fam.hypothesis(r)?, fam.hypothesis(t)?, e, fam.base())?.value)
    };
    let first: Vec<f64> = (0..m).filter(|&x| x != r1).map(|x| ball(r1, x)).collect::<Result<_>>()?;
    let second: Vec<f64> = (0..m).filter(|&x| x != r2).map(|x| ball(r2, x)).collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    for a in &first {
        for b in &second {
            best = best.min(a.min(*b));
        }
    }
    Ok(best)
}

/// First-object family plus, for each first-object hypothesis `m1`, the
/// family of the second object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependentPairFamily {
    marginal: HypothesisFamily,
    conditional: Vec<HypothesisFamily>,
}

impl DependentPairFamily {
    pub fn new(marginal: HypothesisFamily, conditional: Vec<HypothesisFamily>) -> Result<Self> {
        if conditional.len() != marginal.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} first-object hypotheses but {} conditional families",
                marginal.len(),
                conditional.len()
            )));
        }
        let m2 = conditional[0].len();
        for fam in &conditional {
            if fam.len() != m2 {
                return Err(Error::DimensionMismatch(
                    "conditional families differ in size".into(),
                ));
            }
            if fam.alphabet() != conditional[0].alphabet() {
                return Err(Error::AlphabetMismatch {
                    expected: conditional[0].alphabet_size(),
                    found: fam.alphabet_size(),
                });
            }
            if fam.base() != marginal.base() {
                return Err(Error::InvalidSpec(
                    "conditional and marginal families use different log bases".into(),
                ));
            }
        }
        Ok(DependentPairFamily {
            marginal,
            conditional,
        })
    }

    /// Builds the families from probability rows; `conditional[m1][m2]` is
    /// the second object's law under hypotheses `(m1, m2)`.
    pub fn from_rows(marginal: &[Vec<f64>], conditional: &[Vec<Vec<f64>>], base: LogBase) -> Result<Self> {
        DependentPairFamily::new(
            HypothesisFamily::from_rows(marginal, base)?,
            conditional
                .iter()
                .map(|rows| HypothesisFamily::from_rows(rows, base))
                .collect::<Result<_>>()?,
        )
    }

    pub fn marginal(&self) -> &HypothesisFamily {
        &self.marginal
    }

    pub fn conditional(&self, m1: usize) -> Result<&HypothesisFamily> {
        self.conditional.get(m1).ok_or(Error::IndexOutOfRange {
            index: m1,
            bound: self.conditional.len(),
        })
    }

    pub fn first_count(&self) -> usize {
        self.marginal.len()
    }

    pub fn second_count(&self) -> usize {
        self.conditional[0].len()
    }

    pub fn base(&self) -> LogBase {
        self.marginal.base()
    }
}

/// Prescribed exponents for a dependent pair: ball radii for the first
/// object (`M1-1` values) and, for every first-object hypothesis, ball radii
/// for the second object (`M1 x (M2-1)` values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentPairSpec {
    pub marginal: Vec<f64>,
    pub conditional: Vec<Vec<f64>>,
}

impl DependentPairSpec {
    fn check_for(&self, fam: &DependentPairFamily) -> Result<()> {
        if self.conditional.len() != fam.first_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows of second-object radii for {} first-object hypotheses",
                self.conditional.len(),
                fam.first_count()
            )));
        }
        Ok(())
    }
}

/// Exponents of the dependent-pair test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependentPairLao {
    pub marginal: ReliabilityMatrix,
    /// Second-object matrix given the first object's true hypothesis.
    pub conditional: Vec<ReliabilityMatrix>,
    pub marginal_compatibility: CompatibilityReport,
    pub conditional_compatibility: Vec<CompatibilityReport>,
    pub compatible: bool,
}

impl DependentPairLao {
    pub fn first_count(&self) -> usize {
        self.marginal.size()
    }

    pub fn second_count(&self) -> usize {
        self.conditional[0].size()
    }

    /// Exponent of accepting `accepted = (l1, l2)` when `truth = (m1, m2)`.
    pub fn entry(&self, truth: (usize, usize), accepted: (usize, usize)) -> Result<f64> {
        let (m1, m2) = truth;
        let (l1, l2) = accepted;
        for (v, bound) in [(m1, self.first_count()), (l1, self.first_count())] {
            if v >= bound {
                return Err(Error::IndexOutOfRange { index: v, bound });
            }
        }
        for (v, bound) in [(m2, self.second_count()), (l2, self.second_count())] {
            if v >= bound {
                return Err(Error::IndexOutOfRange { index: v, bound });
            }
        }
        let first = self.marginal.get(m1, l1);
        let second = self.conditional[m1].get(m2, l2);
        Ok(match (l1 == m1, l2 == m2) {
            (false, true) => first,
            (true, false) => second,
            (false, false) => first + second,
            (true, true) => self
                .marginal
                .row_min_off_diagonal(m1)
                .min(self.conditional[m1].row_min_off_diagonal(m2)),
        })
    }

    /// Flattened `(M1 M2) x (M1 M2)` matrix with pairs ordered
    /// lexicographically (first object most significant).
    pub fn to_matrix(&self) -> Result<ReliabilityMatrix> {
        let (a, b) = (self.first_count(), self.second_count());
        let n = a * b;
        let mut entries = vec![vec![0.0; n]; n];
        for (t, row) in entries.iter_mut().enumerate() {
            for (s, slot) in row.iter_mut().enumerate() {
                *slot = self.entry((t / b, t % b), (s / b, s % b))?;
            }
        }
        ReliabilityMatrix::from_entries(entries, self.marginal.base())
    }

    pub fn has_zero(&self) -> bool {
        self.to_matrix()
            .map(|m| m.has_zero())
            .unwrap_or(false)
    }
}

/// Dependent-pair exponents: ball partitions for the first object and, for
/// each first-object hypothesis, for the second object; composite exponents
/// add across the objects that are misclassified.
pub fn dependent_pair_lao(fam: &DependentPairFamily, spec: &DependentPairSpec) -> Result<DependentPairLao> {
    spec.check_for(fam)?;
    let marginal_spec = DiagonalSpec::new(spec.marginal.clone())?;
    let marginal = reliability_matrix(&fam.marginal, &marginal_spec)?;
    let marginal_compatibility = check_compatibility(&fam.marginal, &marginal_spec)?;
    let mut conditional = Vec::with_capacity(fam.first_count());
    let mut conditional_compatibility = Vec::with_capacity(fam.first_count());
    for (m1, radii) in spec.conditional.iter().enumerate() {
        let s = DiagonalSpec::new(radii.clone())?;
        conditional.push(reliability_matrix(&fam.conditional[m1], &s)?);
        conditional_compatibility.push(check_compatibility(&fam.conditional[m1], &s)?);
    }
    Ok(DependentPairLao {
        compatible: marginal_compatibility.ok && conditional_compatibility.iter().all(|r| r.ok),
        marginal,
        conditional,
        marginal_compatibility,
        conditional_compatibility,
    })
}

/// One swept coordinate: the prescribed exponent of object `object` for
/// hypothesis `hypothesis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub object: usize,
    pub hypothesis: usize,
    pub values: Vec<f64>,
}

/// A compound entry to report at every sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepProbe {
    pub truth: Vec<usize>,
    pub accepted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Value of each axis at this point.
    pub coords: Vec<f64>,
    /// Probed exponents, in probe order.
    #[serde(with = "crate::extended::vec")]
    pub entries: Vec<f64>,
    pub compatible: bool,
}

/// Evaluates compound exponents over the grid spanned by one or two axes,
/// starting from `spec` and overriding the swept prescribed exponents. The
/// last axis varies fastest.
pub fn compound_sweep(spec: &CompoundSpec, axes: &[SweepAxis], probes: &[SweepProbe]) -> Result<Vec<SweepPoint>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::InvalidSpec(format!(
            "a sweep takes one or two axes, got {}",
            axes.len()
        )));
    }
    for axis in axes {
        if axis.object >= spec.objects() || axis.hypothesis + 1 >= spec.family.len() {
            return Err(Error::IndexOutOfRange {
                index: axis.object.max(axis.hypothesis),
                bound: spec.objects().min(spec.family.len() - 1),
            });
        }
        if axis.values.is_empty() {
            return Err(Error::InvalidSpec("sweep axis has no values".into()));
        }
    }
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    grid.into_iter()
        .map(|coords| {
            let mut given = spec.given.clone();
            for (axis, &v) in axes.iter().zip(&coords) {
                given[axis.object][axis.hypothesis] = v;
            }
            let lao = compound_lao(&CompoundSpec::new(spec.family.clone(), given)?)?;
            let entries = probes
                .iter()
                .map(|p| lao.reliability.entry(&p.truth, &p.accepted))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepPoint {
                coords,
                entries,
                compatible: lao.compatible,
            })
        })
        .collect()
}

/// Product of `fam`'s hypotheses for a tuple, first object most significant.
pub fn product_hypothesis(fam: &HypothesisFamily, tuple: &[usize]) -> Result<Distribution> {
    let mut iter = tuple.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty tuple".into()))?;
    let mut d = fam.hypothesis(*first)?.clone();
    for &t in iter {
        d = d.product(fam.hypothesis(t)?);
    }
    Ok(d)
}
