//! Parser for the polynomial string grammar used by the CLI and spec files.
//!
//! Variables are `z1..z<d>`, exponents use `^`, products use `*` (required
//! between variables), and coefficients may be real (`2`, `0.5`), imaginary
//! (`3i`), or parenthesized complex (`(1+2i)`, `(0-1i)`). Non-homogeneous
//! input is rejected with both offending degrees named.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::multiindex::MultiIndex;
use crate::poly::HomogPoly;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at column {col}")]
    UnexpectedChar { ch: char, col: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected} at column {col}")]
    Expected { expected: &'static str, col: usize },
    #[error("unknown variable z{var} (expected z1..z{dim})")]
    UnknownVariable { var: usize, dim: usize },
    #[error("missing '*' between variables at column {col}")]
    MissingStar { col: usize },
    #[error("non-homogeneous: degrees {0} and {1}")]
    NonHomogeneous(u32, u32),
    #[error("exponent must be a non-negative integer at column {col}")]
    BadExponent { col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Imag(f64),
    Var(usize), // zero-based
    Caret,
    Star,
    Plus,
    Minus,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let ch = chars[i];
        match ch {
            ' ' | '\t' => {
                i += 1;
            }
            '^' => {
                out.push((Token::Caret, col));
                i += 1;
            }
            '*' => {
                out.push((Token::Star, col));
                i += 1;
            }
            '+' => {
                out.push((Token::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, col));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, col));
                i += 1;
            }
            'i' => {
                out.push((Token::Imag(1.0), col));
                i += 1;
            }
            'z' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(ParseError::UnexpectedChar { ch, col });
                }
                let idx: usize = chars[start..j].iter().collect::<String>().parse().unwrap();
                if idx == 0 {
                    return Err(ParseError::UnexpectedChar { ch: '0', col: start + 1 });
                }
                out.push((Token::Var(idx - 1), col));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut j = i;
                let mut seen_dot = false;
                while j < chars.len() && (chars[j].is_ascii_digit() || (chars[j] == '.' && !seen_dot)) {
                    if chars[j] == '.' {
                        seen_dot = true;
                    }
                    j += 1;
                }
                let lit: String = chars[start..j].iter().collect();
                let value: f64 = lit
                    .parse()
                    .map_err(|_| ParseError::UnexpectedChar { ch, col })?;
                if j < chars.len() && chars[j] == 'i' {
                    out.push((Token::Imag(value), col));
                    i = j + 1;
                } else {
                    out.push((Token::Num(value), col));
                    i = j;
                }
            }
            _ => return Err(ParseError::UnexpectedChar { ch, col }),
        }
    }
    Ok(out)
}

/// General (possibly mixed-degree) polynomial used internally while parsing.
type GenPoly = BTreeMap<MultiIndex, Complex64>;

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| self.tokens.last().map(|(_, c)| c + 1).unwrap_or(1))
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<GenPoly, ParseError> {
        let mut acc = match self.peek() {
            Some(Token::Minus) => {
                self.bump();
                scale(&self.term()?, -Complex64::ONE)
            }
            Some(Token::Plus) => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    add_into(&mut acc, &t, Complex64::ONE);
                }
                Some(Token::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    add_into(&mut acc, &t, -Complex64::ONE);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<GenPoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    let f = self.factor()?;
                    acc = mul(&acc, &f);
                }
                // Juxtaposition: a coefficient directly followed by a variable
                // or a parenthesized factor, e.g. `2z1` or `3(z1+z2)`. Two
                // variables in a row require an explicit `*`.
                Some(Token::Var(_)) | Some(Token::LParen) => {
                    let col = self.col();
                    if self.prev_is_var() {
                        return Err(ParseError::MissingStar { col });
                    }
                    let f = self.factor()?;
                    acc = mul(&acc, &f);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn prev_is_var(&self) -> bool {
        self.pos > 0 && matches!(self.tokens[self.pos - 1].0, Token::Var(_))
    }

    fn factor(&mut self) -> Result<GenPoly, ParseError> {
        let col = self.col();
        let base = match self.bump() {
            Some(Token::Num(x)) => constant(self.dim, Complex64::new(x, 0.0)),
            Some(Token::Imag(x)) => constant(self.dim, Complex64::new(0.0, x)),
            Some(Token::Var(v)) => {
                if v >= self.dim {
                    return Err(ParseError::UnknownVariable {
                        var: v + 1,
                        dim: self.dim,
                    });
                }
                let mut p = GenPoly::new();
                p.insert(MultiIndex::unit(self.dim, v), Complex64::ONE);
                p
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => inner,
                    Some(_) => {
                        return Err(ParseError::Expected {
                            expected: "')'",
                            col: self.tokens[self.pos - 1].1,
                        })
                    }
                    None => return Err(ParseError::UnexpectedEnd),
                }
            }
            Some(_) => {
                return Err(ParseError::Expected {
                    expected: "a coefficient, variable, or '('",
                    col,
                })
            }
            None => return Err(ParseError::UnexpectedEnd),
        };
        if self.peek() == Some(&Token::Caret) {
            self.bump();
            let ecol = self.col();
            match self.bump() {
                Some(Token::Num(x)) if x >= 0.0 && x.fract() == 0.0 => {
                    let mut acc = constant(self.dim, Complex64::ONE);
                    for _ in 0..(x as u32) {
                        acc = mul(&acc, &base);
                    }
                    return Ok(acc);
                }
                _ => return Err(ParseError::BadExponent { col: ecol }),
            }
        }
        Ok(base)
    }
}

fn constant(dim: usize, c: Complex64) -> GenPoly {
    let mut p = GenPoly::new();
    if c != Complex64::ZERO {
        p.insert(MultiIndex::zero(dim), c);
    }
    p
}

fn scale(p: &GenPoly, c: Complex64) -> GenPoly {
    p.iter().map(|(a, v)| (a.clone(), v * c)).collect()
}

fn add_into(acc: &mut GenPoly, other: &GenPoly, sign: Complex64) {
    for (a, c) in other {
        let entry = acc.entry(a.clone()).or_insert(Complex64::ZERO);
        *entry += c * sign;
    }
    acc.retain(|_, c| *c != Complex64::ZERO);
}

fn mul(a: &GenPoly, b: &GenPoly) -> GenPoly {
    let mut out = GenPoly::new();
    for (x, cx) in a {
        for (y, cy) in b {
            let entry = out.entry(x.add(y)).or_insert(Complex64::ZERO);
            *entry += cx * cy;
        }
    }
    out.retain(|_, c| *c != Complex64::ZERO);
    out
}

/// Parses a homogeneous polynomial in `dim` variables.
pub fn parse_homog_poly(text: &str, dim: usize) -> Result<HomogPoly, ParseError> {
    assert!(dim >= 1);
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0, dim };
    let poly = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        return Err(ParseError::Expected {
            expected: "'+', '-', '*', or end of input",
            col: parser.col(),
        });
    }
    let mut degree: Option<u32> = None;
    for alpha in poly.keys() {
        match degree {
            None => degree = Some(alpha.degree()),
            Some(k) if k != alpha.degree() => {
                return Err(ParseError::NonHomogeneous(k, alpha.degree()))
            }
            _ => {}
        }
    }
    Ok(HomogPoly::from_terms(dim, poly).expect("degrees checked above"))
}

/// Parses a homogeneous polynomial, inferring the dimension from the highest
/// variable index that occurs (at least 1).
pub fn parse_homog_poly_auto(text: &str) -> Result<HomogPoly, ParseError> {
    let tokens = tokenize(text)?;
    let dim = tokens
        .iter()
        .filter_map(|(t, _)| match t {
            Token::Var(v) => Some(v + 1),
            _ => None,
        })
        .max()
        .unwrap_or(1);
    parse_homog_poly(text, dim)
}

/// Parses a coefficient vector: `e<j>` (standard basis) or a tuple of complex
/// components `(c1, ..., cr)`.
pub fn parse_vector(text: &str, rank: usize) -> Result<Vec<Complex64>, ParseError> {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix('e') {
        if let Ok(j) = rest.parse::<usize>() {
            if j == 0 || j > rank {
                return Err(ParseError::Expected {
                    expected: "basis index within 1..rank",
                    col: 2,
                });
            }
            let mut v = vec![Complex64::ZERO; rank];
            v[j - 1] = Complex64::ONE;
            return Ok(v);
        }
    }
    let inner = trimmed
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or(ParseError::Expected {
            expected: "'e<j>' or '(c1, ..., cr)'",
            col: 1,
        })?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != rank {
        return Err(ParseError::Expected {
            expected: "rank-many components",
            col: 1,
        });
    }
    parts.iter().map(|p| parse_complex_literal(p)).collect()
}

/// A standalone complex literal: `a`, `bi`, `a+bi`, or `a-bi`.
pub fn parse_complex_literal(text: &str) -> Result<Complex64, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        dim: 1,
    };
    let poly = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        return Err(ParseError::Expected {
            expected: "end of literal",
            col: parser.col(),
        });
    }
    if poly.keys().any(|a| a.degree() > 0) {
        return Err(ParseError::Expected {
            expected: "a constant (no variables)",
            col: 1,
        });
    }
    Ok(poly
        .get(&MultiIndex::zero(1))
        .copied()
        .unwrap_or(Complex64::ZERO))
}
