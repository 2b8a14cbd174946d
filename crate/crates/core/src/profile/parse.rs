//! Recursive-descent parser for profile expressions.
//!
//! ```text
//! expr   := term   { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | power
//! power  := atom [ "^" factor ]
//! atom   := number | "t" | "i" | "pi" | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus (`-t^2` is `-(t^2)`) and is
//! right-associative. Exponents must not reference `t`. Arithmetic on two
//! literals is folded on the spot, so printed complex constants read back
//! as single constants.

use num_complex::Complex64;

use super::expr::{Expr, Func};
use super::ProfileError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ProfileError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let ch = bytes[pos];
        if ch.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let simple = match ch {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((start, tok));
            pos += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == b'.' {
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'.' {
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            // exponent part only if followed by digits (optionally signed)
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                let mut look = pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    pos = look;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let text = &src[start..pos];
            let value: f64 = text.parse().map_err(|_| ProfileError::Syntax {
                offset: start,
                message: format!("malformed number `{}`", text),
            })?;
            out.push((start, Token::Number(value)));
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            out.push((start, Token::Ident(src[start..pos].to_string())));
            continue;
        }
        let bad = src[start..].chars().next().unwrap_or('?');
        return Err(ProfileError::Syntax {
            offset: start,
            message: format!("unexpected character `{}`", bad),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(o, _)| *o)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ProfileError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ProfileError::Syntax {
                offset: self.offset(),
                message: format!("expected {}", what),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ProfileError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?)).fold_literal();
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Subtract(Box::new(lhs), Box::new(self.term()?)).fold_literal();
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ProfileError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Expr::Multiply(Box::new(lhs), Box::new(self.factor()?)).fold_literal();
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Divide(Box::new(lhs), Box::new(self.factor()?)).fold_literal();
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ProfileError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Expr::Negate(Box::new(self.factor()?)).fold_literal());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ProfileError> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            let caret_at = self.offset();
            self.pos += 1;
            let exponent = self.factor()?;
            if !exponent.is_constant() {
                return Err(ProfileError::NonConstantExponent {
                    offset: Some(caret_at),
                });
            }
            return Ok(Expr::Power(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ProfileError> {
        let at = self.offset();
        match self.bump().cloned() {
            Some(Token::Number(v)) => Ok(Expr::real(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::Time),
                "i" => Ok(Expr::Constant(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Expr::real(std::f64::consts::PI)),
                _ => match Func::from_name(&name) {
                    Some(func) => {
                        self.expect(Token::LParen, &format!("`(` after `{}`", name))?;
                        let arg = self.expr()?;
                        self.expect(Token::RParen, "`)`")?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => Err(ProfileError::UnknownIdentifier { name, offset: at }),
                },
            },
            Some(_) => Err(ProfileError::Syntax {
                offset: at,
                message: "expected a number, identifier or `(`".into(),
            }),
            None => Err(ProfileError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses a profile expression.
pub fn parse(source: &str) -> Result<Expr, ProfileError> {
    let tokens = tokenize(source)?;
    if tokens.is_empty() {
        return Err(ProfileError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        end: source.len(),
    };
    let e = p.expr()?;
    if p.pos < tokens.len() {
        return Err(ProfileError::Syntax {
            offset: p.offset(),
            message: "trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Box<Expr> {
        Box::new(Expr::real(x))
    }

    #[test]
    fn sum_with_scaled_sine() {
        let e = parse("2+0.5*sin(t)").unwrap();
        let want = Expr::Add(
            re(2.0),
            Box::new(Expr::Multiply(
                re(0.5),
                Box::new(Expr::Call(Func::Sin, Box::new(Expr::Time))),
            )),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn complex_exponential_drive() {
        let e = parse("0.4*exp(i*t)").unwrap();
        let want = Expr::Multiply(
            re(0.4),
            Box::new(Expr::Call(
                Func::Exp,
                Box::new(Expr::Multiply(
                    Box::new(Expr::Constant(Complex64::new(0.0, 1.0))),
                    Box::new(Expr::Time),
                )),
            )),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn time_dependent_exponent_is_rejected() {
        assert_eq!(
            parse("t^t"),
            Err(ProfileError::NonConstantExponent { offset: Some(1) })
        );
        assert!(parse("2^(1+t)").is_err());
        assert!(parse("t^(2*pi)").is_ok());
    }

    #[test]
    fn unary_minus_binds_below_power() {
        let e = parse("-t^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), Complex64::new(-9.0, 0.0));
        let e = parse("2^-1").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn left_associative_and_right_associative_power() {
        assert_eq!(parse("8/4/2").unwrap().eval(0.0).unwrap().re, 1.0);
        assert_eq!(parse("10-4-3").unwrap().eval(0.0).unwrap().re, 3.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0).unwrap().re, 512.0);
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::real(1.5e-3));
        assert_eq!(parse("2E+2").unwrap(), Expr::real(200.0));
        assert_eq!(parse(".25").unwrap(), Expr::real(0.25));
    }

    #[test]
    fn error_offsets() {
        assert_eq!(
            parse("2 + foo(t)"),
            Err(ProfileError::UnknownIdentifier {
                name: "foo".into(),
                offset: 4
            })
        );
        match parse("2 + (t") {
            Err(ProfileError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("unexpected {:?}", other),
        }
        match parse("2 $ t") {
            Err(ProfileError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {:?}", other),
        }
        assert!(parse("").is_err());
        assert!(parse("sin t").is_err());
        assert!(parse("t t").is_err());
    }

    #[test]
    fn negated_literal_sits_above_the_cut() {
        let z = parse("sqrt(-4)").unwrap().eval(0.0).unwrap();
        assert_eq!(z, Complex64::new(0.0, 2.0));
        assert_eq!(
            parse("(2+(-0.5)*i)").unwrap(),
            Expr::Constant(Complex64::new(2.0, -0.5))
        );
        assert!(matches!(parse("1/0").unwrap(), Expr::Divide(_, _)));
    }
}
