//! Polynomial expression parser for the CLI surface.
//!
//! Grammar, loosest to tightest: binary `+`/`-`, then `*`, then unary `-`,
//! then `^` with a nonnegative integer literal exponent, then rational
//! literals (`p/q` or integers), coordinate identifiers and parentheses.
//! There is no division operator; `/` only occurs inside rational literals.

use num::{BigInt, One, Zero};

use crate::jet::{Jet, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(Rational),
    /// Resolved 0-based coordinate index.
    Coordinate(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Exact lowering to a jet; polynomial degrees above `order` truncate.
    pub fn to_jet(&self, num_vars: usize, order: u32) -> Result<Jet> {
        match self {
            Expr::Number(value) => Ok(Jet::constant(num_vars, order, value.clone())),
            Expr::Coordinate(index) => Jet::coordinate(num_vars, order, *index),
            Expr::Neg(inner) => Ok(inner.to_jet(num_vars, order)?.neg()),
            Expr::Add(a, b) => a.to_jet(num_vars, order)?.add(&b.to_jet(num_vars, order)?),
            Expr::Sub(a, b) => a.to_jet(num_vars, order)?.sub(&b.to_jet(num_vars, order)?),
            Expr::Mul(a, b) => a.to_jet(num_vars, order)?.mul(&b.to_jet(num_vars, order)?),
            Expr::Pow(base, exponent) => base.to_jet(num_vars, order)?.pow(*exponent),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

fn parse_error(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let mut tokens = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (tok_line, tok_col) = (line, col);
        let mut advance = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        let token = match c {
            '+' => {
                advance(&mut chars);
                Token::Plus
            }
            '-' => {
                advance(&mut chars);
                Token::Minus
            }
            '*' => {
                advance(&mut chars);
                Token::Star
            }
            '^' => {
                advance(&mut chars);
                Token::Caret
            }
            '(' => {
                advance(&mut chars);
                Token::LParen
            }
            ')' => {
                advance(&mut chars);
                Token::RParen
            }
            '0'..='9' => {
                let mut digits = String::new();
                while matches!(chars.peek(), Some(d) if d.is_ascii_digit()) {
                    digits.push(advance(&mut chars));
                }
                let numerator: BigInt = digits
                    .parse()
                    .map_err(|_| parse_error(tok_line, tok_col, "malformed integer literal"))?;
                if matches!(chars.peek(), Some('/')) {
                    advance(&mut chars);
                    let mut denom_digits = String::new();
                    while matches!(chars.peek(), Some(d) if d.is_ascii_digit()) {
                        denom_digits.push(advance(&mut chars));
                    }
                    if denom_digits.is_empty() {
                        return Err(parse_error(
                            tok_line,
                            tok_col,
                            "malformed rational literal: missing denominator",
                        ));
                    }
                    let denominator: BigInt = denom_digits.parse().map_err(|_| {
                        parse_error(tok_line, tok_col, "malformed rational literal")
                    })?;
                    if denominator.is_zero() {
                        return Err(parse_error(
                            tok_line,
                            tok_col,
                            "malformed rational literal: zero denominator",
                        ));
                    }
                    Token::Number(Rational::new(numerator, denominator))
                } else {
                    Token::Number(Rational::from(numerator))
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while matches!(chars.peek(), Some(d) if d.is_alphanumeric() || *d == '_') {
                    name.push(advance(&mut chars));
                }
                Token::Ident(name)
            }
            other => {
                return Err(parse_error(
                    tok_line,
                    tok_col,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        tokens.push(Spanned {
            token,
            line: tok_line,
            col: tok_col,
        });
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    position: usize,
    coordinates: &'a [String],
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.position)
    }

    fn next(&mut self) -> Option<Spanned> {
        let token = self.tokens.get(self.position).cloned();
        if token.is_some() {
            self.position += 1;
        }
        token
    }

    fn end_error(&self, msg: &str) -> Error {
        parse_error(
            1,
            self.src_len + 1,
            format!("unexpected end of input: {msg}"),
        )
    }

    fn expression(&mut self) -> Result<Expr> {
        let mut node = self.term()?;
        while let Some(spanned) = self.peek() {
            match spanned.token {
                Token::Plus => {
                    self.next();
                    node = Expr::Add(Box::new(node), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.next();
                    node = Expr::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut node = self.factor()?;
        while matches!(self.peek().map(|s| &s.token), Some(Token::Star)) {
            self.next();
            node = Expr::Mul(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek().map(|s| &s.token), Some(Token::Minus)) {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if matches!(self.peek().map(|s| &s.token), Some(Token::Caret)) {
            self.next();
            let spanned = self
                .next()
                .ok_or_else(|| self.end_error("expected an exponent"))?;
            let exponent = match &spanned.token {
                Token::Number(value)
                    if value.denom().is_one() && value.numer() >= &BigInt::zero() =>
                {
                    u32::try_from(value.numer().clone())
                        .map_err(|_| parse_error(spanned.line, spanned.col, "exponent too large"))?
                }
                _ => {
                    return Err(parse_error(
                        spanned.line,
                        spanned.col,
                        "exponent must be a nonnegative integer literal",
                    ));
                }
            };
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let spanned = self
            .next()
            .ok_or_else(|| self.end_error("expected a value"))?;
        match spanned.token {
            Token::Number(value) => Ok(Expr::Number(value)),
            Token::Ident(name) => {
                let index = self
                    .coordinates
                    .iter()
                    .position(|c| c == &name)
                    .ok_or_else(|| {
                        parse_error(
                            spanned.line,
                            spanned.col,
                            format!("unknown identifier `{name}`"),
                        )
                    })?;
                Ok(Expr::Coordinate(index))
            }
            Token::LParen => {
                let inner = self.expression()?;
                match self.next() {
                    Some(Spanned {
                        token: Token::RParen,
                        ..
                    }) => Ok(inner),
                    Some(other) => Err(parse_error(
                        other.line,
                        other.col,
                        "expected a closing parenthesis",
                    )),
                    None => Err(self.end_error("expected a closing parenthesis")),
                }
            }
            other => Err(parse_error(
                spanned.line,
                spanned.col,
                format!("unexpected token `{other:?}`"),
            )),
        }
    }
}

/// Parse an expression over the named coordinates.
pub fn parse_expression(src: &str, coordinates: &[String]) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        position: 0,
        coordinates,
        src_len: src.len(),
    };
    let expr = parser.expression()?;
    if let Some(extra) = parser.peek() {
        return Err(parse_error(
            extra.line,
            extra.col,
            format!("unexpected trailing token `{:?}`", extra.token),
        ));
    }
    Ok(expr)
}

/// Parse and lower in one step.
pub fn parse_to_jet(src: &str, coordinates: &[String], num_vars: usize, order: u32) -> Result<Jet> {
    parse_expression(src, coordinates)?.to_jet(num_vars, order)
}
