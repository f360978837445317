//! Recursive-descent parser for coefficient expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```

use super::expr::{Expr, Func};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(src: &str) -> Result<Lexer> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit()) {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{text}`"),
                expected: vec!["number".into()],
            })?;
            toks.push((Tok::Num(v), start));
        } else if c.is_ascii_lowercase() || c == '_' {
            while i < bytes.len() {
                let d = bytes[i] as char;
                if d.is_ascii_lowercase() || d.is_ascii_digit() || d == '_' {
                    i += 1;
                } else {
                    break;
                }
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Op(c), start));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: start,
                msg: format!("unexpected character `{c}`"),
                expected: vec!["number".into(), "identifier".into(), "operator".into()],
            });
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(Lexer { toks })
}

struct Parser {
    lx: Lexer,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.lx.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.lx.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.lx.toks[self.at].0.clone();
        if self.at + 1 < self.lx.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: &str, expected: &[&str]) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::neg(self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let expected = ["number", "identifier", "("];
        match self.bump() {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() != &Tok::Op('(') {
                        return self.fail(&format!("function `{name}` needs an argument"), &["("]);
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return Ok(Expr::call(func, arg));
                }
                if self.peek() == &Tok::Op('(') {
                    return Err(Error::UnknownIdentifier { name });
                }
                Ok(match name.as_str() {
                    "x" => Expr::var(),
                    "pi" => Expr::constant(std::f64::consts::PI),
                    _ => Expr::param(&name),
                })
            }
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::End => {
                self.at = self.lx.toks.len() - 1;
                self.fail("unexpected end of input", &expected)
            }
            Tok::Op(c) => {
                self.at -= 1;
                self.fail(&format!("unexpected `{c}`"), &expected)
            }
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if self.peek() == &Tok::Op(')') {
            self.bump();
            Ok(())
        } else {
            self.fail("unbalanced parenthesis", &[")", "operator"])
        }
    }
}

/// Parse source text into an expression with free parameters left symbolic.
pub fn parse(source: &str) -> Result<Expr> {
    let mut p = Parser { lx: lex(source)?, at: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return p.fail("trailing input", &["operator", "end of input"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2").unwrap().eval(3.0), -9.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(parse("x^-1").unwrap().eval(4.0), 0.25);
        assert_eq!(parse("1 - 2 - 3").unwrap().eval(0.0), -4.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0), 1.0);
        assert_eq!(parse(" 2 * x+1").unwrap().eval(2.0), 5.0);
        assert!((parse("1.5e-3*.5").unwrap().eval(0.0) - 7.5e-4).abs() < 1e-18);
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x + * 2") {
            Err(Error::Syntax { pos, expected, .. }) => {
                assert_eq!(pos, 4);
                assert!(expected.contains(&"number".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("(x + 1"), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse("x $ 1"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("foo(x)"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse("x x"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "mu*x^2",
            "(1+c)*x/(1+c*x)",
            "-(x-1)^(-2)",
            "exp(-sqrt(mu)*x)/(1 - exp(-x))^2",
            "x^(1/2) - atan(tan(x))",
            "2 - -x",
        ] {
            let e = parse(src).unwrap().bind(&|n| if n == "mu" { Some(4.0) } else { Some(1.0) }).unwrap();
            let again = parse(&e.to_string()).unwrap();
            for x in [0.3, 0.7, 1.1] {
                let (a, b) = (e.eval(x), again.eval(x));
                assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()), "{src}: {a} vs {b}");
            }
        }
    }
}
