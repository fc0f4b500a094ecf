//! Family files: a TOML document with an alphabet, hypothesis rows and an
//! optional dependent-pair block.

use std::path::Path;

use lao_core::{Alphabet, DependentPairFamily, Distribution, HypothesisFamily, LogBase};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Rows may miss the simplex by this much; they are renormalised.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_base: Option<f64>,
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependent: Option<DependentBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependentBlock {
    pub marginals: Vec<Vec<f64>>,
    pub conditionals: Vec<ConditionalRow>,
}

/// Law of the second object under hypotheses `(m1, m2)`, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalRow {
    pub m1: usize,
    pub m2: usize,
    pub probs: Vec<f64>,
}

/// Validated contents of a family file.
#[derive(Debug, Clone)]
pub struct LoadedFamily {
    pub source: FamilyFile,
    pub base: LogBase,
    pub single: Option<HypothesisFamily>,
    pub dependent: Option<DependentPairFamily>,
}

impl LoadedFamily {
    pub fn single(&self) -> Result<&HypothesisFamily, CliError> {
        self.single
            .as_ref()
            .ok_or_else(|| CliError::Validation("the family file has no `hypotheses` rows".into()))
    }

    pub fn dependent(&self) -> Result<&DependentPairFamily, CliError> {
        self.dependent
            .as_ref()
            .ok_or_else(|| CliError::Validation("the family file has no `[dependent]` block".into()))
    }
}

pub fn load_family(path: &Path, base_override: Option<f64>) -> Result<LoadedFamily, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_family(&text, base_override)
}

pub fn parse_family(text: &str, base_override: Option<f64>) -> Result<LoadedFamily, CliError> {
    let source: FamilyFile =
        toml::from_str(text).map_err(|e| CliError::Parse(format!("family file: {e}")))?;
    if source.schema != SCHEMA {
        return Err(CliError::Parse(format!(
            "unsupported family schema {} (expected {SCHEMA})",
            source.schema
        )));
    }
    let base = LogBase::new(base_override.or(source.log_base).unwrap_or(2.0))?;
    let alphabet = Alphabet::new(source.alphabet.iter().cloned())?;
    let rows = |rows: &[Vec<f64>], what: &str| -> Result<Vec<Distribution>, CliError> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != alphabet.len() {
                    return Err(CliError::Validation(format!(
                        "{what} row {} has {} entries for {} symbols",
                        i + 1,
                        r.len(),
                        alphabet.len()
                    )));
                }
                Distribution::with_tolerance(r.clone(), ROW_TOLERANCE)
                    .map_err(|e| CliError::Validation(format!("{what} row {}: {e}", i + 1)))
            })
            .collect()
    };
    let single = match &source.hypotheses {
        Some(h) => Some(HypothesisFamily::new(alphabet.clone(), rows(h, "hypothesis")?, base)?),
        None => None,
    };
    let dependent = match &source.dependent {
        Some(block) => {
            let marginal = HypothesisFamily::new(alphabet.clone(), rows(&block.marginals, "marginal")?, base)?;
            let m1 = marginal.len();
            let m2 = block.conditionals.iter().map(|c| c.m2).max().unwrap_or(0);
            let mut grid: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; m2]; m1];
            for c in &block.conditionals {
                if c.m1 == 0 || c.m1 > m1 || c.m2 == 0 {
                    return Err(CliError::Validation(format!(
                        "conditional row labelled ({}, {}) is out of range",
                        c.m1, c.m2
                    )));
                }
                let slot = &mut grid[c.m1 - 1][c.m2 - 1];
                if slot.replace(c.probs.clone()).is_some() {
                    return Err(CliError::Validation(format!(
                        "conditional row ({}, {}) given twice",
                        c.m1, c.m2
                    )));
                }
            }
            let mut families = Vec::with_capacity(m1);
            for (i, row) in grid.into_iter().enumerate() {
                let probs: Vec<Vec<f64>> = row
                    .into_iter()
                    .enumerate()
                    .map(|(j, p)| {
                        p.ok_or_else(|| {
                            CliError::Validation(format!("conditional row ({}, {}) missing", i + 1, j + 1))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                let dists = rows(&probs, &format!("conditional m1={}", i + 1))?;
                families.push(HypothesisFamily::new(alphabet.clone(), dists, base)?);
            }
            Some(DependentPairFamily::new(marginal, families)?)
        }
        None => None,
    };
    if single.is_none() && dependent.is_none() {
        return Err(CliError::Validation(
            "the family file needs `hypotheses` rows or a `[dependent]` block".into(),
        ));
    }
    Ok(LoadedFamily {
        source,
        base,
        single,
        dependent,
    })
}
