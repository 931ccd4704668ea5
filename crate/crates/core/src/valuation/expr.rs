//! Arithmetic expressions over a single integer variable `z`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := base ("^" uint)?
//! base   := "z" | number | "-" base | "(" expr ")"
//! ```
//!
//! Unary minus applies to the whole power that follows it, so `-z^2` is
//! `-(z^2)` and `-(z+1)^2` is `-((z+1)^2)`. Divisors must not mention `z`
//! and must evaluate to a finite nonzero constant.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Num(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
        let mut parser = Parser { src: text, pos: 0 };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos < text.len() {
            return Err(parser.error("operator or end of input"));
        }
        Ok(expr)
    }

    /// Evaluates at `z`. Powers use repeated multiplication so results do
    /// not depend on the platform's `powi`.
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Expr::Var => z,
            Expr::Num(v) => *v,
            Expr::Neg(e) => -e.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Div(a, b) => a.eval(z) / b.eval(z),
            Expr::Pow(base, exp) => {
                let b = base.eval(z);
                let mut acc = 1.0;
                for _ in 0..*exp {
                    acc *= b;
                }
                acc
            }
        }
    }

    pub fn mentions_var(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Num(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.mentions_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.mentions_var() || b.mentions_var()
            }
        }
    }
}

/// Fully parenthesized rendering; re-parses to an extensionally equal
/// expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => write!(f, "z"),
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{})", -v)
            }
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(e, n) => write!(f, "({e}^{n})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let found = match self.peek_raw() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        SyntaxError {
            position: self.pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some('/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let divisor = self.factor()?;
                    let value = divisor.eval(0.0);
                    if divisor.mentions_var() || !value.is_finite() || value == 0.0 {
                        return Err(SyntaxError {
                            position: at,
                            expected: "nonzero constant divisor".to_string(),
                            found: divisor.to_string(),
                        });
                    }
                    lhs = Expr::Div(Box::new(lhs), Box::new(divisor));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.base()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.uint()?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some('z') => {
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some('-') => {
                self.pos += 1;
                // binds looser than '^'
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            _ => Err(self.error("'z', number, '-' or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) if text != "." => {
                self.pos = end;
                Ok(Expr::Num(v))
            }
            _ => Err(self.error("decimal number")),
        }
    }

    fn uint(&mut self) -> Result<u32, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        match self.src[start..end].parse::<u32>() {
            Ok(v) => {
                self.pos = end;
                Ok(v)
            }
            Err(_) => Err(self.error("non-negative integer exponent")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(text: &str, z: f64) -> f64 {
        Expr::parse(text).unwrap().eval(z)
    }

    #[test]
    fn precedence() {
        assert_eq!(at("2*z + 3", 1.0), 5.0);
        assert_eq!(at("z^3 - 4", 2.0), 4.0);
        assert_eq!(at("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(at("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(at("10 - 4 - 3", 0.0), 3.0);
        assert_eq!(at("12 / 3 / 2", 0.0), 2.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(at("-z^2", 3.0), -9.0);
        assert_eq!(at("-(z+1)^2", 1.0), -4.0);
        assert_eq!(at("--z", 2.0), 2.0);
        assert_eq!(at("3 - -z", 2.0), 5.0);
    }

    #[test]
    fn decimals() {
        assert_eq!(at("0.5*z", 4.0), 2.0);
        assert_eq!(at("1.", 0.0), 1.0);
        assert_eq!(at(".25", 0.0), 0.25);
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = Expr::parse("2*").unwrap_err();
        assert_eq!(err.position, 2);
        let err = Expr::parse("(z + 1").unwrap_err();
        assert_eq!(err.expected, "')'");
        let err = Expr::parse("z z").unwrap_err();
        assert_eq!(err.position, 2);
        assert!(Expr::parse("x").is_err());
        assert!(Expr::parse("z^-1").is_err());
        assert!(Expr::parse("z^1.5").is_err());
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse(".").is_err());
    }

    #[test]
    fn divisor_must_be_nonzero_constant() {
        assert!(Expr::parse("1 / z").is_err());
        assert!(Expr::parse("z / 0").is_err());
        assert!(Expr::parse("z / (2 - 2)").is_err());
        assert_eq!(at("z / (1 + 1)", 6.0), 3.0);
    }

    #[test]
    fn display_reparses() {
        for text in ["2*z + 3", "-z^2 + 4", "(z - 1)^3 / 4", "0.1 * z - -3"] {
            let e = Expr::parse(text).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            for z in -5..=5 {
                assert_eq!(e.eval(z as f64), back.eval(z as f64), "{text}");
            }
        }
        let neg_lit = Expr::Add(Box::new(Expr::Var), Box::new(Expr::Num(-2.5)));
        let back = Expr::parse(&neg_lit.to_string()).unwrap();
        assert_eq!(back.eval(1.0), -1.5);
    }
}
