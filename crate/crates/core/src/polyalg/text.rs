//! Plain-text polynomial records.
//!
//! One term per line, `γ₁ … γ_d c`, with the coefficient written in decimal
//! at enough digits to round-trip the working precision. A leading
//! `# dim <d>` line lets the zero polynomial (which has no lines) round-trip
//! too; other `#` lines and blank lines are ignored.

use std::fmt::Write as _;

use rug::Float;

use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};

impl Polynomial {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# dim {}", self.dim());
        self.write_terms(&mut out);
        out
    }

    /// Term lines only, no header.
    pub(crate) fn write_terms(&self, out: &mut String) {
        for (m, c) in self.terms() {
            let _ = writeln!(out, "{m} {}", format_scalar(c));
        }
    }

    /// Parses text written by [`Polynomial::to_text`] at precision `prec`.
    pub fn parse_text(text: &str, prec: u32) -> Result<Self> {
        let mut dim = None;
        let mut terms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(d) = comment.trim().strip_prefix("dim") {
                    let d: usize = d.trim().parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad dimension header `{line}`"),
                    })?;
                    dim = Some(d);
                }
                continue;
            }
            let (index, c) = parse_term(line, line_no, prec)?;
            match dim {
                None => dim = Some(index.dim()),
                Some(d) if d != index.dim() => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected {d} exponents, found {}", index.dim()),
                    })
                }
                _ => {}
            }
            terms.push((index, c));
        }
        let dim = dim.ok_or(Error::Parse {
            line: 0,
            message: "no terms and no `# dim` header".into(),
        })?;
        Polynomial::from_terms(dim, prec, terms)
    }
}

pub(crate) fn format_scalar(c: &Float) -> String {
    c.to_string_radix(10, None)
}

pub(crate) fn parse_scalar(s: &str, prec: u32, line: usize) -> Result<Float> {
    let parsed = Float::parse(s).map_err(|e| Error::Parse {
        line,
        message: format!("bad scalar `{s}`: {e}"),
    })?;
    Ok(Float::with_val(prec, parsed))
}

pub(crate) fn parse_term(line: &str, line_no: usize, prec: u32) -> Result<(MultiIndex, Float)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected exponents and a coefficient in `{line}`"),
        });
    }
    let (exps, coeff) = fields.split_at(fields.len() - 1);
    let exps = exps
        .iter()
        .map(|e| {
            e.parse::<u32>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad exponent `{e}`"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let index = MultiIndex::new(&exps).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    Ok((index, parse_scalar(coeff[0], prec, line_no)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_lines() {
        let p = Polynomial::from_f64_terms(
            2,
            64,
            [
                (MultiIndex::new(&[2, 0]).unwrap(), 3.0),
                (MultiIndex::new(&[0, 0]).unwrap(), -1.0),
            ],
        )
        .unwrap();
        let text = p.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# dim 2");
        assert!(lines[1].starts_with("0 0 -1"));
        assert!(lines[2].starts_with("2 0 3"));
        assert_eq!(Polynomial::parse_text(&text, 64).unwrap(), p);
    }

    #[test]
    fn zero_polynomial_keeps_dimension() {
        let z = Polynomial::zero(3, 80);
        let back = Polynomial::parse_text(&z.to_text(), 80).unwrap();
        assert!(back.is_zero());
        assert_eq!(back.dim(), 3);
    }

    #[test]
    fn parse_errors() {
        assert!(Polynomial::parse_text("1 2", 64).is_ok());
        assert!(matches!(
            Polynomial::parse_text("1 x 2", 64),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Polynomial::parse_text("1 0 2\n1 1 1 1", 64),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(Polynomial::parse_text("", 64).is_err());
    }
}
