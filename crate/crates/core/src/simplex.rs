//! Probability primitives on a finite alphabet.
//!
//! Distributions, empirical types (count vectors), Shannon entropy,
//! Kullback-Leibler divergence, exact type-class probabilities and seeded
//! i.i.d. sampling. Conventions: `0 log 0 = 0`, `0 log(0/0) = 0`, and a
//! positive mass against a zero reference mass gives `+inf`.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance on `sum(p) == 1` accepted by [`Distribution::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Logarithm base in which all information quantities are reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);
    pub const NATS: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self> {
        if base.is_finite() && base > 1.0 {
            Ok(LogBase(base))
        } else {
            Err(Error::InvalidSpec(format!(
                "logarithm base must be a finite number > 1, got {base}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `ln(base)`, the number of nats in one unit.
    pub fn ln(self) -> f64 {
        self.0.ln()
    }

    pub fn from_nats(self, x: f64) -> f64 {
        x / self.ln()
    }

    pub fn to_nats(self, x: f64) -> f64 {
        x * self.ln()
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::BITS
    }
}

impl TryFrom<f64> for LogBase {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        LogBase::new(value)
    }
}

impl From<LogBase> for f64 {
    fn from(b: LogBase) -> f64 {
        b.0
    }
}

/// Ordered set of distinct symbol labels. Indexing is positional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Alphabet labelled `0, 1, ..., k-1`.
    pub fn indexed(k: usize) -> Result<Self> {
        Alphabet::new((0..k).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

/// Probability mass function on a `k`-symbol alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates against [`SIMPLEX_TOLERANCE`] and renormalises.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Distribution::with_tolerance(probs, SIMPLEX_TOLERANCE)
    }

    /// Like [`Distribution::new`] with an explicit tolerance on the total mass.
    pub fn with_tolerance(probs: Vec<f64>, tolerance: f64) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 entries, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tolerance {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1 (tolerance {tolerance:e})"
            )));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Distribution { probs })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Distribution::new(vec![1.0 / k as f64; k])
    }

    /// Normalises arbitrary nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be nonnegative with a positive finite sum".into(),
            ));
        }
        Distribution::new(weights.iter().map(|w| w / total).collect())
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
    }

    /// Product distribution on the alphabet `self x other`, first factor most significant.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let probs = self
            .probs
            .iter()
            .flat_map(|p| other.probs.iter().map(move |q| p * q))
            .collect();
        Distribution { probs }
    }

    pub(crate) fn check_same_alphabet(&self, other: &Distribution) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::AlphabetMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            probs: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        Distribution::new(raw.probs).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Count vector of a length-`n` sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EmpiricalType {
    counts: Vec<u32>,
    n: u32,
}

impl EmpiricalType {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidDistribution(
                "a type needs at least 2 symbols".into(),
            ));
        }
        let n: u32 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidDistribution(
                "a type needs a positive sample size".into(),
            ));
        }
        Ok(EmpiricalType { counts, n })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// The induced distribution `count / n`.
    pub fn distribution(&self) -> Distribution {
        let n = self.n as f64;
        Distribution::from_raw(self.counts.iter().map(|&c| c as f64 / n).collect())
    }

    /// `ln` of the induced distribution's entries (`-inf` for zero counts).
    pub(crate) fn ln_probs(&self) -> Vec<f64> {
        let ln_n = (self.n as f64).ln();
        self.counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    f64::NEG_INFINITY
                } else {
                    (c as f64).ln() - ln_n
                }
            })
            .collect()
    }
}

/// A length-`N` sequence of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    symbols: Vec<usize>,
}

impl Sample {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidSpec("a sample needs at least one symbol".into()));
        }
        Ok(Sample { symbols })
    }

    /// Parses symbol labels against `alphabet`.
    pub fn from_labels<'a>(
        labels: impl IntoIterator<Item = &'a str>,
        alphabet: &Alphabet,
    ) -> Result<Self> {
        let symbols = labels
            .into_iter()
            .map(|s| {
                alphabet.index_of(s).ok_or_else(|| {
                    Error::InvalidSpec(format!("symbol {s:?} not in alphabet"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Sample::new(symbols)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Shannon entropy `-sum q log q`.
pub fn entropy(q: &Distribution, base: LogBase) -> f64 {
    base.from_nats(entropy_nats(q.probs()))
}

pub(crate) fn entropy_nats(q: &[f64]) -> f64 {
    -q.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Kullback-Leibler divergence `D(q || g)`; `+inf` when `q` is not absolutely
/// continuous with respect to `g`.
pub fn divergence(q: &Distribution, g: &Distribution, base: LogBase) -> Result<f64> {
    q.check_same_alphabet(g)?;
    Ok(base.from_nats(kl_nats(q.probs(), g.probs())))
}

pub(crate) fn kl_nats(q: &[f64], g: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&p, &r) in q.iter().zip(g) {
        if p > 0.0 {
            if r <= 0.0 {
                return f64::INFINITY;
            }
            total += p * (p / r).ln();
        }
    }
    // rounding can push a zero divergence slightly negative
    total.max(0.0)
}

/// Counts symbol occurrences of `s` over `alphabet`.
pub fn empirical_type(s: &Sample, alphabet: &Alphabet) -> Result<EmpiricalType> {
    count_symbols(s, alphabet.len())
}

pub(crate) fn count_symbols(s: &Sample, k: usize) -> Result<EmpiricalType> {
    let mut counts = vec![0u32; k];
    for &x in s.symbols() {
        let slot = counts
            .get_mut(x)
            .ok_or(Error::IndexOutOfRange { index: x, bound: k })?;
        *slot += 1;
    }
    EmpiricalType::new(counts)
}

/// Number of types of length `n` on `k` symbols, `C(n + k - 1, k - 1)`.
pub fn type_count(n: u32, k: usize) -> u128 {
    let r = (k - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = acc * (n as u128 + i) / i;
    }
    acc
}

/// Every composition of `n` into `k` nonnegative parts, in ascending
/// lexicographic order of the count vectors.
pub fn enumerate_types(n: u32, k: usize) -> TypeIter {
    assert!(n >= 1 && k >= 2, "enumerate_types needs n >= 1 and k >= 2");
    let mut first = vec![0u32; k];
    first[k - 1] = n;
    TypeIter {
        next: Some(first),
        n,
    }
}

/// Iterator returned by [`enumerate_types`].
#[derive(Debug, Clone)]
pub struct TypeIter {
    next: Option<Vec<u32>>,
    n: u32,
}

impl Iterator for TypeIter {
    type Item = EmpiricalType;

    fn next(&mut self) -> Option<EmpiricalType> {
        let current = self.next.take()?;
        let k = current.len();
        // bump the rightmost slot that still has mass to its right
        let mut suffix = current[k - 1];
        let mut successor = None;
        for j in (0..k - 1).rev() {
            if suffix > 0 {
                let mut next = current.clone();
                next[j] += 1;
                for slot in next.iter_mut().take(k - 1).skip(j + 1) {
                    *slot = 0;
                }
                next[k - 1] = suffix - 1;
                successor = Some(next);
                break;
            }
            suffix += current[j];
        }
        self.next = successor;
        Some(EmpiricalType {
            counts: current,
            n: self.n,
        })
    }
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// `ln` of the multinomial coefficient `n! / prod(count!)`, i.e. `ln |T_Q|`.
pub(crate) fn ln_type_class_size(t: &EmpiricalType) -> f64 {
    ln_factorial(t.n) - t.counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

/// `ln g^n(T_Q)` given `ln g` entries.
pub(crate) fn ln_type_class_prob(t: &EmpiricalType, ln_g: &[f64]) -> f64 {
    let mut total = ln_type_class_size(t);
    for (&c, &lg) in t.counts.iter().zip(ln_g) {
        if c > 0 {
            if lg == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            total += c as f64 * lg;
        }
    }
    total
}

pub(crate) fn ln_probs(g: &Distribution) -> Vec<f64> {
    g.probs().iter().map(|p| p.ln()).collect()
}

/// Log-probability that `n` i.i.d. draws from `g` have type `t`:
/// `log[ multinomial(n; counts) * prod g(x)^count(x) ]`.
pub fn type_class_log_prob(t: &EmpiricalType, g: &Distribution, base: LogBase) -> Result<f64> {
    if t.len() != g.len() {
        return Err(Error::AlphabetMismatch {
            expected: g.len(),
            found: t.len(),
        });
    }
    Ok(base.from_nats(ln_type_class_prob(t, &ln_probs(g))))
}

/// `n` i.i.d. draws from `g`, deterministic in `(g, n, seed)`.
pub fn sample(g: &Distribution, n: usize, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = WeightedIndex::new(g.probs()).expect("a valid distribution has positive mass");
    Sample {
        symbols: (0..n.max(1)).map(|_| index.sample(&mut rng)).collect(),
    }
}
