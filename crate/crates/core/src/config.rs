//! Flat key=value model configuration files.
//!
//! ```text
//! # Z₂² square model
//! dim   = 2
//! roots = 1,0; -1,0; 0,1; 0,-1
//! k     = 0.8, 0.8, 0.8, 0.8
//! ```
//!
//! Numeric literals (decimals or fractions like `4/5`) are converted to exact
//! rationals, so models built from files always carry exact data for the
//! symbolic operator path.

use crate::error::{Error, Result};
use crate::poly::parse_rational;
use crate::reflection::DunklModel;
use num::rational::BigRational;

/// Parses a model configuration from text.
pub fn parse_model_config(text: &str) -> Result<DunklModel> {
    let mut dim: Option<usize> = None;
    let mut roots: Option<Vec<Vec<BigRational>>> = None;
    let mut ks: Option<Vec<BigRational>> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((head, _)) => head,
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        match key.trim() {
            "dim" => {
                let d: usize = value.trim().parse().map_err(|_| {
                    Error::Config(format!("line {}: bad dimension {:?}", lineno + 1, value.trim()))
                })?;
                dim = Some(d);
            }
            "roots" => {
                let mut parsed = Vec::new();
                for part in value.split(';') {
                    let root: Result<Vec<BigRational>> = part
                        .split(',')
                        .map(|t| parse_rational(t.trim()))
                        .collect();
                    parsed.push(root.map_err(|e| {
                        Error::Config(format!("line {}: {e}", lineno + 1))
                    })?);
                }
                roots = Some(parsed);
            }
            "k" => {
                let parsed: Result<Vec<BigRational>> = value
                    .split(',')
                    .map(|t| parse_rational(t.trim()))
                    .collect();
                ks = Some(parsed.map_err(|e| {
                    Error::Config(format!("line {}: {e}", lineno + 1))
                })?);
            }
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key {other:?} (expected dim, roots, k)",
                    lineno + 1
                )));
            }
        }
    }

    let dim = dim.ok_or_else(|| Error::Config("missing key: dim".into()))?;
    let roots = roots.ok_or_else(|| Error::Config("missing key: roots".into()))?;
    let ks = ks.ok_or_else(|| Error::Config("missing key: k".into()))?;
    DunklModel::from_rational(dim, roots, ks)
}

/// Loads a model configuration from a file.
pub fn load_model(path: &std::path::Path) -> Result<DunklModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_square_model() {
        let text = "
            # square
            dim   = 2
            roots = 1,0; -1,0; 0,1; 0,-1
            k     = 0.8, 0.8, 0.8, 0.8
        ";
        let m = parse_model_config(text).unwrap();
        assert_eq!(m.dim(), 2);
        assert_abs_diff_eq!(m.gamma(), 3.2, epsilon = 1e-15);
        assert!(m.exact().is_some());
        assert!(m.product_structure().is_some());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_model_config("dim = 1").is_err());
        assert!(parse_model_config("dim = 1\nroots = 1; -1\nk = 1").is_err());
        assert!(parse_model_config("wat = 3").is_err());
        // λ < 0 surfaces as a standing-assumption error.
        let text = "dim = 1\nroots = 1; -1\nk = 0.2, 0.2";
        match parse_model_config(text) {
            Err(Error::StandingAssumption(_)) => {}
            other => panic!("expected standing-assumption error, got {other:?}"),
        }
    }

    #[test]
    fn fractions_parse_exactly() {
        let text = "dim = 1\nroots = 1; -1\nk = 4/5, 4/5";
        let m = parse_model_config(text).unwrap();
        assert_abs_diff_eq!(m.gamma(), 1.6, epsilon = 1e-15);
    }
}
