//! Text export of an [`OrthoBasis`].
//!
//! ```text
//! ballproj-basis 1
//! d 2
//! alpha 0.5
//! max_degree 3
//! precision_bits 96
//! certificate 3.1e-29
//! element <k> <i> <terms>
//! <γ₁ … γ_d c>            one line per term
//! ```
//!
//! `i` numbers elements within block `k`. Import rebuilds the Gram data at
//! the recorded precision and recomputes the certificate.

use std::fmt::Write as _;

use super::OrthoBasis;
use crate::error::{Error, Result};
use crate::moments::WeightParam;
use crate::polyalg::text::parse_term;
use crate::polyalg::Polynomial;

const MAGIC: &str = "ballproj-basis";
const VERSION: u32 = 1;

impl OrthoBasis {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = self.weight();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "d {}", w.dim());
        let _ = writeln!(out, "alpha {}", w.alpha());
        let _ = writeln!(out, "max_degree {}", self.max_degree());
        let _ = writeln!(out, "precision_bits {}", self.precision());
        let _ = writeln!(out, "certificate {:e}", self.certificate());
        for k in 0..=self.max_degree() {
            for (i, idx) in self.block_range(k).enumerate() {
                let e = self.element(idx);
                let _ = writeln!(out, "element {k} {i} {}", e.num_terms());
                e.write_terms(&mut out);
            }
        }
        out
    }

    /// Reads [`OrthoBasis::to_text`] output. The stored certificate is
    /// informational; the returned basis carries a freshly computed one.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("missing `{key}` line"),
            })?;
            let value = line
                .strip_prefix(key)
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .ok_or(Error::Parse {
                    line: n,
                    message: format!("expected `{key} <value>`, found `{line}`"),
                })?;
            Ok((n, value.to_string()))
        };
        let (n, version) = header(MAGIC)?;
        if version != VERSION.to_string() {
            return Err(Error::Parse {
                line: n,
                message: format!("unsupported basis format version {version}"),
            });
        }
        let d: usize = parse_field(header("d")?)?;
        let alpha: f64 = parse_field(header("alpha")?)?;
        let max_degree: usize = parse_field(header("max_degree")?)?;
        let prec: u32 = parse_field(header("precision_bits")?)?;
        let _: f64 = parse_field(header("certificate")?)?;
        let w = WeightParam::new(d, alpha)?;

        let mut polys = Vec::new();
        let mut current: Option<(usize, Vec<_>)> = None;
        let mut expected_terms = 0;
        let finish = |cur: Option<(usize, Vec<_>)>, want: usize, polys: &mut Vec<Polynomial>| -> Result<()> {
            if let Some((line, terms)) = cur {
                if terms.len() != want {
                    return Err(Error::Parse {
                        line,
                        message: format!("element declares {want} terms, found {}", terms.len()),
                    });
                }
                polys.push(Polynomial::from_terms(d, prec, terms)?);
            }
            Ok(())
        };
        for (n, line) in lines {
            if let Some(rest) = line.strip_prefix("element") {
                finish(current.take(), expected_terms, &mut polys)?;
                let fields: Vec<usize> = rest
                    .split_whitespace()
                    .map(|f| f.parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Parse {
                        line: n,
                        message: format!("bad element record `{line}`"),
                    })?;
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: n,
                        message: format!("expected `element <k> <i> <terms>`, found `{line}`"),
                    });
                }
                expected_terms = fields[2];
                current = Some((n, Vec::new()));
            } else {
                let (index, c) = parse_term(line, n, prec)?;
                match current.as_mut() {
                    Some((_, terms)) => terms.push((index, c)),
                    None => {
                        return Err(Error::Parse {
                            line: n,
                            message: "term line before any element record".into(),
                        })
                    }
                }
            }
        }
        finish(current.take(), expected_terms, &mut polys)?;
        OrthoBasis::from_polynomials(w, max_degree, prec, &polys)
    }
}

fn parse_field<T: std::str::FromStr>((line, value): (usize, String)) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad value `{value}`"),
    })
}
