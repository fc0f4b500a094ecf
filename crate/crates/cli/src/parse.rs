//! Parsers for the compact command-line value syntaxes.

use std::path::Path;

use crate::error::CliError;

/// Reads `arg` as a file when such a file exists, otherwise as literal text.
fn inline_or_file(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn number(tok: &str, what: &str) -> Result<f64, CliError> {
    tok.parse::<f64>()
        .map_err(|_| CliError::Parse(format!("{what}: {tok:?} is not a number")))
}

fn split_numbers(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| number(t, what))
        .collect()
}

/// A list of numbers separated by commas or whitespace, inline or in a file.
pub fn values(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let v = split_numbers(&inline_or_file(arg)?, what)?;
    if v.is_empty() {
        return Err(CliError::Parse(format!("{what}: no values given")));
    }
    Ok(v)
}

/// Rows of numbers separated by `;` or newlines, inline or in a file.
pub fn rows(arg: &str, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let rows: Vec<Vec<f64>> = inline_or_file(arg)?
        .split([';', '\n'])
        .map(|r| r.trim())
        .filter(|r| !r.is_empty() && !r.starts_with('#'))
        .map(|r| split_numbers(r, what))
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(CliError::Parse(format!("{what}: no rows given")));
    }
    Ok(rows)
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn range(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(CliError::Parse(format!("{what}: expected start:stop:step, got {text:?}")));
    };
    let (a, b, step) = (number(a, what)?, number(b, what)?, number(step, what)?);
    if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(CliError::Parse(format!(
            "{what}: need finite start <= stop and a positive step, got {text:?}"
        )));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::Guard(format!("{what}: {count} points requested")));
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

/// Sample sizes as `a:b:step` or a comma list.
pub fn n_grid(text: &str) -> Result<Vec<u32>, CliError> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| CliError::Parse(format!("n grid: {t:?} is not a sample size")))
    };
    let grid: Vec<u32> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(CliError::Parse(format!("n grid: expected a:b:step, got {text:?}")));
        };
        let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
        if step == 0 || b < a {
            return Err(CliError::Parse(format!("n grid: need a <= b and step >= 1, got {text:?}")));
        }
        (a..=b).step_by(step as usize).collect()
    } else {
        text.split(',').map(parse).collect::<Result<_, _>>()?
    };
    if grid.contains(&0) {
        return Err(CliError::Parse("n grid: sample sizes must be positive".into()));
    }
    Ok(grid)
}

/// 1-based hypothesis index, returned 0-based.
pub fn index(tok: &str, bound: usize, what: &str) -> Result<usize, CliError> {
    let i: usize = tok
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("{what}: {tok:?} is not an index")))?;
    if i == 0 || i > bound {
        return Err(CliError::Validation(format!("{what}: {i} is outside 1..={bound}")));
    }
    Ok(i - 1)
}

/// `OBJECT:HYPOTHESIS=start:stop:step`, indices 1-based.
pub fn axis(text: &str, objects: usize, hypotheses: usize) -> Result<(usize, usize, Vec<f64>), CliError> {
    let (slot, span) = text
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("axis: expected OBJECT:HYP=start:stop:step, got {text:?}")))?;
    let (obj, hyp) = slot
        .split_once(':')
        .ok_or_else(|| CliError::Parse(format!("axis: expected OBJECT:HYP before '=', got {slot:?}")))?;
    let object = index(obj, objects, "axis object")?;
    let hypothesis = index(hyp, hypotheses - 1, "axis hypothesis")?;
    Ok((object, hypothesis, range(span, "axis")?))
}

/// `l1,l2,...|m1,m2,...`: accepted tuple then true tuple, 1-based.
pub fn probe(text: &str, objects: usize, hypotheses: usize) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    let (acc, truth) = text
        .split_once('|')
        .ok_or_else(|| CliError::Parse(format!("probe: expected accepted|true, got {text:?}")))?;
    let tuple = |s: &str| -> Result<Vec<usize>, CliError> {
        let t: Vec<usize> = s
            .split(',')
            .map(|x| index(x, hypotheses, "probe"))
            .collect::<Result<_, _>>()?;
        if t.len() != objects {
            return Err(CliError::Validation(format!(
                "probe: tuple {s:?} has {} slots for {objects} objects",
                t.len()
            )));
        }
        Ok(t)
    };
    Ok((tuple(acc)?, tuple(truth)?))
}
