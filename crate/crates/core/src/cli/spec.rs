//! The name-spec mini-language:
//!
//! ```text
//! spec := linear(N) | listfile(PATH) | alternating | rho(one | two | seq(P/Q))
//!       | sum(spec, spec) | product(spec, spec) | star(spec [, N])
//! ```

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::analysis::rho_generator;
use crate::combinators::{product_name, sum_name};
use crate::diagonal::rho_from_label;
use crate::error::{Error, Result};
use crate::names::{star, Name};

/// Prefix length used by `star(spec)` when none is given.
pub const DEFAULT_STAR_LEN: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NameSpec {
    /// `f(k) = k + a`.
    Linear(u64),
    /// One decimal exponent per line; read when the name is built.
    ListFile(String),
    /// Sorted name with `u(n) = 2^n` for even `n` and `u(n) = 1` for odd `n`.
    Alternating,
    /// Sorted name with `u = r` for a rate label `one`, `two` or `seq(p/q)`.
    Rho(String),
    Sum(Box<NameSpec>, Box<NameSpec>),
    Product(Box<NameSpec>, Box<NameSpec>),
    Star(Box<NameSpec>, usize),
}

impl fmt::Display for NameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NameSpec::Linear(a) => write!(f, "linear({a})"),
            NameSpec::ListFile(p) => write!(f, "listfile({p})"),
            NameSpec::Alternating => write!(f, "alternating"),
            NameSpec::Rho(r) => write!(f, "rho({r})"),
            NameSpec::Sum(a, b) => write!(f, "sum({a},{b})"),
            NameSpec::Product(a, b) => write!(f, "product({a},{b})"),
            NameSpec::Star(a, n) => write!(f, "star({a},{n})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn peek(&mut self, c: char) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(c)
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..].find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(self.src.len() - start);
        self.pos += len;
        &self.src[start..start + len]
    }

    fn number(&mut self) -> Result<u64> {
        let at = self.pos;
        let w = self.word();
        w.parse().or_else(|_| {
            self.pos = at;
            self.skip_ws();
            self.err("expected a non-negative integer")
        })
    }

    /// Raw text up to the closing parenthesis that balances the one just read.
    fn balanced(&mut self) -> Result<&'a str> {
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.src[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => {
                    self.pos = start + i;
                    return Ok(self.src[start..start + i].trim());
                }
                ')' => depth -= 1,
                _ => {}
            }
        }
        self.pos = self.src.len();
        self.err("unclosed '('")
    }

    fn spec(&mut self) -> Result<NameSpec> {
        self.skip_ws();
        let at = self.pos;
        let head = self.word();
        let spec = match head {
            "alternating" => return Ok(NameSpec::Alternating),
            "linear" => {
                self.eat('(')?;
                NameSpec::Linear(self.number()?)
            }
            "listfile" => {
                self.eat('(')?;
                let path = self.balanced()?;
                if path.is_empty() {
                    return self.err("empty path");
                }
                NameSpec::ListFile(path.to_string())
            }
            "rho" => {
                self.eat('(')?;
                let label_at = self.pos;
                let label = self.balanced()?;
                if rho_from_label(label).is_err() {
                    self.pos = label_at;
                    self.skip_ws();
                    return self.err(format!("unknown rate {label:?}; expected one, two or seq(p/q)"));
                }
                NameSpec::Rho(label.to_string())
            }
            "sum" | "product" => {
                self.eat('(')?;
                let a = self.spec()?;
                self.eat(',')?;
                let b = self.spec()?;
                if head == "sum" {
                    NameSpec::Sum(Box::new(a), Box::new(b))
                } else {
                    NameSpec::Product(Box::new(a), Box::new(b))
                }
            }
            "star" => {
                self.eat('(')?;
                let a = self.spec()?;
                let n = if self.peek(',') {
                    self.eat(',')?;
                    self.number()? as usize
                } else {
                    DEFAULT_STAR_LEN
                };
                NameSpec::Star(Box::new(a), n)
            }
            "" => {
                self.pos = at;
                return self.err("expected a name spec");
            }
            other => {
                self.pos = at;
                return self.err(format!("unknown name constructor {other:?}"));
            }
        };
        self.eat(')')?;
        Ok(spec)
    }
}

pub fn parse_name_spec(text: &str) -> Result<NameSpec> {
    let mut p = Parser { src: text, pos: 0 };
    let spec = p.spec()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.err("trailing input");
    }
    Ok(spec)
}

fn read_list(path: &str) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse().map_err(|_| {
            Error::InvalidParameter(format!("{path}:{}: not a decimal exponent: {line:?}", line_no + 1))
        })?);
    }
    Ok(values)
}

impl NameSpec {
    /// Builds the name. File reads and rate validation happen here, not at parse time.
    pub fn build(&self) -> Result<Name> {
        Ok(match self {
            NameSpec::Linear(a) => Name::linear(*a),
            NameSpec::ListFile(p) => Name::from_list(format!("listfile({p})"), read_list(p)?),
            NameSpec::Alternating => Name::from_profile(
                "alternating",
                Arc::new(|n| if n % 2 == 0 { BigUint::from(1u32) << n } else { BigUint::from(1u32) }),
            ),
            NameSpec::Rho(label) => {
                let gen = rho_generator(&rho_from_label(label)?)?;
                Name::from_profile(format!("rho({label})"), gen.multiplicity())
            }
            NameSpec::Sum(a, b) => sum_name(a.build()?, b.build()?),
            NameSpec::Product(a, b) => product_name(a.build()?, b.build()?),
            NameSpec::Star(a, n) => star(&mut a.build()?, *n)?,
        })
    }
}
