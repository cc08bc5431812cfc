//! Text formats for polynomials, automorphisms and derivations.
//!
//! Polynomial grammar (whitespace-insensitive):
//!
//! ```text
//! poly   := term (('+' | '-') term)*
//! term   := factor ('*' factor | '/' int)*
//! factor := ('-' | '+') factor | int | var ('^' nat)? | '(' poly ')' ('^' nat)?
//! var    := 'x' nat        (nat >= 1)
//! ```
//!
//! Automorphism files hold one or more blocks of the form
//!
//! ```text
//! n=3
//! x1 -> x1
//! x2 -> x2 + x1^2
//! x3 -> x3 + x2^2
//! ```
//!
//! and derivation files use `dx<i> <- <poly>` lines instead. Blank lines and
//! lines starting with `#` are ignored.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::deriv::TriangularDerivation;
use crate::error::{Error, Result};
use crate::poly::{Polynomial, Rational};
use crate::triaut::TriangularAutomorphism;

/// Parsed expression tree; see the module docs for the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, BigInt),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn eval(&self) -> Polynomial {
        match self {
            Expr::Int(k) => Polynomial::constant(Rational::from_integer(k.clone()), 0),
            Expr::Var(i) => Polynomial::var(*i, *i),
            Expr::Neg(e) => -e.eval(),
            Expr::Add(a, b) => a.eval() + b.eval(),
            Expr::Sub(a, b) => a.eval() - b.eval(),
            Expr::Mul(a, b) => a.eval() * b.eval(),
            Expr::Div(a, d) => a.eval().scale(&Rational::new(BigInt::from(1), d.clone())),
            Expr::Pow(a, e) => a.eval().pow(*e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Dot,
}

struct Lexed {
    tok: Tok,
    column: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let column = col0 + k;
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Lexed { tok, column });
            k += 1;
        } else if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let digits: String = chars[start..k].iter().collect();
            let value = digits.parse::<BigInt>().expect("ascii digits");
            out.push(Lexed {
                tok: Tok::Int(value),
                column,
            });
        } else if c == 'x' {
            k += 1;
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            if start == k {
                return Err(Error::parse(
                    line,
                    column,
                    "expected variable index after `x`",
                ));
            }
            let digits: String = chars[start..k].iter().collect();
            let index = digits
                .parse::<usize>()
                .map_err(|_| Error::parse(line, column, "variable index too large"))?;
            if index == 0 {
                return Err(Error::parse(
                    line,
                    column,
                    "variable index must be at least 1",
                ));
            }
            out.push(Lexed {
                tok: Tok::Var(index),
                column,
            });
        } else {
            return Err(Error::parse(
                line,
                column,
                format!("unexpected character `{c}`"),
            ));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    line: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|l| l.column)
            .unwrap_or(self.end_column)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.column(), message)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|l| l.tok.clone());
        self.pos += 1;
        tok
    }

    fn poly(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Int(d)) if d.is_zero() => {
                            self.pos -= 1;
                            return Err(self.error("division by zero"));
                        }
                        Some(Tok::Int(d)) => {
                            if matches!(self.peek(), Some(Tok::Dot)) {
                                return Err(self.error("decimal literals are not supported"));
                            }
                            lhs = Expr::Div(Box::new(lhs), d);
                        }
                        _ => {
                            self.pos -= 1;
                            return Err(
                                self.error("division is only allowed by an integer literal")
                            );
                        }
                    }
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        match self.bump() {
            Some(Tok::Int(e)) => {
                let value = e.to_u32().ok_or_else(|| {
                    self.pos -= 1;
                    self.error("exponent too large")
                })?;
                if matches!(self.peek(), Some(Tok::Slash) | Some(Tok::Dot)) {
                    return Err(self.error("fractional exponent"));
                }
                Ok(value)
            }
            Some(Tok::Minus) => {
                self.pos -= 1;
                Err(self.error("negative exponent"))
            }
            Some(Tok::LParen) => {
                self.pos -= 1;
                Err(self.error("exponent must be a non-negative integer literal"))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected exponent"))
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = match self.bump() {
            Some(Tok::Minus) => return Ok(Expr::Neg(Box::new(self.factor()?))),
            Some(Tok::Plus) => return self.factor(),
            Some(Tok::Int(k)) => {
                if matches!(self.peek(), Some(Tok::Dot)) {
                    return Err(self.error("decimal literals are not supported"));
                }
                Expr::Int(k)
            }
            Some(Tok::Var(i)) => Expr::Var(i),
            Some(Tok::LParen) => {
                let inner = self.poly()?;
                match self.bump() {
                    Some(Tok::RParen) => inner,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected `)`"));
                    }
                }
            }
            Some(_) => {
                self.pos -= 1;
                return Err(self.error("expected a number, variable or `(`"));
            }
            None => return Err(self.error("unexpected end of input")),
        };
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }
}

fn parse_expr_at(text: &str, line: usize, col0: usize) -> Result<Expr> {
    let toks = lex(text, line, col0)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        line,
        end_column: col0 + text.chars().count(),
    };
    let expr = parser.poly()?;
    if parser.pos < parser.toks.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_expr_at(text, 1, 1)
}

/// Parses a single polynomial; its arity is its largest variable index.
pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    Ok(parse_expr(text)?.eval())
}

fn parse_rational_at(text: &str, line: usize, col0: usize) -> Result<Rational> {
    let p = parse_expr_at(text, line, col0)?.eval();
    if !p.is_constant() {
        return Err(Error::parse(
            line,
            col0,
            format!("expected a rational constant, got {p}"),
        ));
    }
    Ok(p.constant_term())
}

/// Parses a rational constant such as `3`, `-1/2` or `(1+1)/3`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    parse_rational_at(text.trim(), 1, 1)
}

struct Block<'a> {
    n: usize,
    header_line: usize,
    /// (line number, column of rhs, lhs index, rhs text)
    rows: Vec<(usize, usize, usize, &'a str)>,
}

fn split_blocks<'a>(text: &'a str, prefix: &str, arrow: &str) -> Result<Vec<Block<'a>>> {
    let mut blocks: Vec<Block<'a>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if let Some(rest) = trimmed
            .strip_prefix("n=")
            .or_else(|| trimmed.strip_prefix("n ="))
        {
            let n = rest.trim().parse::<usize>().map_err(|_| {
                Error::parse(line, indent + 1, "malformed header, expected `n=<int>`")
            })?;
            if n == 0 {
                return Err(Error::parse(
                    line,
                    indent + 1,
                    "dimension must be at least 1",
                ));
            }
            blocks.push(Block {
                n,
                header_line: line,
                rows: Vec::new(),
            });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(Error::parse(line, indent + 1, "expected header `n=<int>`"));
        };
        let Some(arrow_at) = trimmed.find(arrow) else {
            return Err(Error::parse(
                line,
                indent + 1,
                format!("expected `{prefix}<i> {arrow} <polynomial>`"),
            ));
        };
        let lhs = trimmed[..arrow_at].trim();
        let index = lhs
            .strip_prefix(prefix)
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| {
                Error::parse(
                    line,
                    indent + 1,
                    format!("left-hand side must be `{prefix}<i>`, got `{lhs}`"),
                )
            })?;
        let rhs = &trimmed[arrow_at + arrow.len()..];
        let col = indent + arrow_at + arrow.len() + 1;
        block.rows.push((line, col, index, rhs));
    }
    Ok(blocks)
}

fn block_polys(block: &Block<'_>, prefix: &str) -> Result<Vec<Polynomial>> {
    let mut slots: Vec<Option<Polynomial>> = vec![None; block.n];
    for &(line, col, index, rhs) in &block.rows {
        if index > block.n {
            return Err(Error::parse(
                line,
                1,
                format!("{prefix}{index} exceeds n={}", block.n),
            ));
        }
        if slots[index - 1].is_some() {
            return Err(Error::parse(
                line,
                1,
                format!("{prefix}{index} given twice"),
            ));
        }
        let p = parse_expr_at(rhs, line, col)?.eval();
        if p.max_variable() > block.n {
            return Err(Error::NotTriangular {
                coord: index,
                detail: format!("{p} mentions x{} beyond n={}", p.max_variable(), block.n),
            });
        }
        slots[index - 1] = Some(p.promoted(block.n));
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                Error::parse(
                    block.header_line,
                    1,
                    format!("missing line for {prefix}{}", i + 1),
                )
            })
        })
        .collect()
}

pub fn parse_automorphisms(text: &str) -> Result<Vec<TriangularAutomorphism>> {
    split_blocks(text, "x", "->")?
        .iter()
        .map(|b| TriangularAutomorphism::from_coordinates(block_polys(b, "x")?))
        .collect()
}

pub fn parse_derivations(text: &str) -> Result<Vec<TriangularDerivation>> {
    split_blocks(text, "dx", "<-")?
        .iter()
        .map(|b| TriangularDerivation::new(block_polys(b, "dx")?))
        .collect()
}

fn exactly_one<T>(mut items: Vec<T>, what: &str) -> Result<T> {
    match items.len() {
        1 => Ok(items.pop().expect("one item")),
        k => Err(Error::parse(
            1,
            1,
            format!("expected exactly one {what}, found {k}"),
        )),
    }
}

pub fn parse_automorphism(text: &str) -> Result<TriangularAutomorphism> {
    exactly_one(parse_automorphisms(text)?, "automorphism")
}

pub fn parse_derivation(text: &str) -> Result<TriangularDerivation> {
    exactly_one(parse_derivations(text)?, "derivation")
}

/// Blocks separated by blank lines.
pub fn format_blocks<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{integer, rational};

    #[test]
    fn parses_degree_four_coordinate() {
        let p = parse_polynomial("x3 + 2*x2^2 + 2*x1^2*x2 + x1^4").unwrap();
        assert_eq!(p.to_string(), "x3 + 2*x2^2 + 2*x1^2*x2 + x1^4");
        assert_eq!(p.nvars(), 3);
    }

    #[test]
    fn parses_zero_and_scalar_division() {
        assert!(parse_polynomial("0").unwrap().is_zero());
        assert_eq!(
            parse_polynomial("3/2*x1 - x1/2").unwrap(),
            Polynomial::var(1, 1)
        );
        assert_eq!(parse_polynomial("  -x1 ").unwrap().to_string(), "-x1");
        assert_eq!(
            parse_polynomial("(x1+1)^2").unwrap().to_string(),
            "1 + 2*x1 + x1^2"
        );
    }

    #[test]
    fn rejects_bad_exponents_and_variables() {
        let err = parse_polynomial("x1^-2").unwrap_err();
        assert!(matches!(err, Error::Parse { column: 4, .. }), "{err}");
        assert!(parse_polynomial("x1^1/2").is_err());
        assert!(parse_polynomial("x1^1.5").is_err());
        assert!(parse_polynomial("x1^(2)").is_err());
        let err = parse_polynomial("x0 + 1").unwrap_err();
        assert!(matches!(
            err,
            Error::Parse {
                line: 1,
                column: 1,
                ..
            }
        ));
        assert!(parse_polynomial("x1 / x2").is_err());
        assert!(parse_polynomial("x1 / 0").is_err());
        assert!(parse_polynomial("x1 +").is_err());
        assert!(parse_polynomial("(x1").is_err());
        assert!(parse_polynomial("y1").is_err());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-1/2").unwrap(), rational(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), integer(7));
        assert!(parse_rational("x1").is_err());
    }

    #[test]
    fn automorphism_file() {
        let text = "n=3\nx1 -> x1\nx2 -> x2 + x1^2\nx3 -> x3 + x2^2\n";
        let phi = parse_automorphism(text).unwrap();
        assert_eq!(phi.to_string(), text);
        assert_eq!(phi.tails()[2], parse_polynomial("x2^2").unwrap());
    }

    #[test]
    fn identity_file() {
        let phi = parse_automorphism("# identity\nn=2\nx1 -> x1\n\nx2 -> x2\n").unwrap();
        assert!(phi.is_identity());
    }

    #[test]
    fn triangularity_errors_name_the_coordinate() {
        let err = parse_automorphism("n=3\nx1 -> x1\nx2 -> x2 + x3\nx3 -> x3\n").unwrap_err();
        assert!(
            matches!(err, Error::NotTriangular { coord: 2, .. }),
            "{err}"
        );
        let err = parse_automorphism("n=2\nx1 -> x1\nx2 -> x2^2\n").unwrap_err();
        assert!(matches!(
            err,
            Error::ZeroScale { coord: 2 } | Error::NotTriangular { coord: 2, .. }
        ));
        let err = parse_automorphism("n=2\nx1 -> x1 + x2\nx2 -> x2\n").unwrap_err();
        assert!(matches!(err, Error::NotTriangular { coord: 1, .. }));
        let err = parse_automorphism("n=2\nx1 -> x1\nx2 -> x2*x1\n").unwrap_err();
        assert!(matches!(
            err,
            Error::ZeroScale { coord: 2 } | Error::NotTriangular { coord: 2, .. }
        ));
    }

    #[test]
    fn structural_errors() {
        assert!(parse_automorphism("x1 -> x1\n").is_err());
        assert!(parse_automorphism("n=2\nx1 -> x1\n").is_err());
        assert!(parse_automorphism("n=1\nx1 -> x1\nx1 -> x1\n").is_err());
        assert!(parse_automorphism("n=1\nx2 -> x2\n").is_err());
        assert!(parse_automorphism("n=1\nx1 => x1\n").is_err());
        let err = parse_automorphism("n=1\nx1 -> x1 + $\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 12,
                message: "unexpected character `$`".into()
            }
        );
    }

    #[test]
    fn derivation_files() {
        let text = "n=2\ndx1 <- 1\ndx2 <- 0\n\nn=2\ndx1 <- 0\ndx2 <- x1\n";
        let ds = parse_derivations(text).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(format_blocks(&ds), text);
        assert!(parse_derivation("n=2\ndx1 <- 0\ndx2 <- x2\n").is_err());
        assert!(parse_derivation(text).is_err());
    }

    #[test]
    fn expression_tree_shape() {
        let e = parse_expr("2*x1^3 - 1/3").unwrap();
        let expected = Expr::Sub(
            Box::new(Expr::Mul(
                Box::new(Expr::Int(2.into())),
                Box::new(Expr::Pow(Box::new(Expr::Var(1)), 3)),
            )),
            Box::new(Expr::Div(Box::new(Expr::Int(1.into())), 3.into())),
        );
        assert_eq!(e, expected);
    }
}
