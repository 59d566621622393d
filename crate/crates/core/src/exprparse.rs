//! Arithmetic expressions for parameter values.
//!
//! Grammar (whitespace is insignificant between tokens):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | "+" unary | power ;
//! power   = primary { "^" ["-" | "+"] integer } ;
//! primary = number | hexbits | "pi" | "i" | "sqrt" "(" expr ")" | "(" expr ")" ;
//! number  = digits ["." digits] [("e" | "E") ["+" | "-"] digits] ["i"] ;
//! hexbits = "0x" 16 * hexdigit ;      (* IEEE-754 binary64 bit pattern *)
//! ```
//!
//! Operators of equal precedence associate left to right, `^` binds tighter
//! than unary minus (`-2^2 = -4`), and a number directly followed by `i` is
//! an imaginary literal (`4.8585i`). Subexpressions that never touch `i`
//! are evaluated in plain real arithmetic, so real inputs produce the same
//! bits through [`parse_real`] and [`parse_complex`].

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("imaginary unit in a real-valued expression (byte {position})")]
    ImaginaryInReal { position: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("empty expression")]
    Empty,
}

impl ExprError {
    /// Byte offset of the offending token, when there is one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { position, .. } | ExprError::ImaginaryInReal { position } => {
                Some(*position)
            }
            ExprError::DivisionByZero | ExprError::Empty => None,
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Imaginary(f64),
    Pi,
    I,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(ExprError::Syntax {
            position: tok.at,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(expr)
}

/// Evaluates `text` as a real number in double precision.
pub fn parse_real(text: &str) -> Result<f64, ExprError> {
    if let Some(position) = find_imaginary(text) {
        return Err(ExprError::ImaginaryInReal { position });
    }
    match parse_expr(text)?.eval()? {
        Value::Real(x) => Ok(x),
        Value::Complex(z) if z.im == 0.0 => Ok(z.re),
        Value::Complex(_) => Err(ExprError::ImaginaryInReal { position: 0 }),
    }
}

/// Evaluates `text` as a complex number.
pub fn parse_complex(text: &str) -> Result<Complex64, ExprError> {
    Ok(parse_expr(text)?.eval()?.to_complex())
}

fn find_imaginary(text: &str) -> Option<usize> {
    let tokens = lex(text).ok()?;
    tokens.iter().find_map(|t| match t.kind {
        TokenKind::I | TokenKind::Imaginary(_) => Some(t.at),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Value::Real(x) => Complex64::new(x, 0.0),
            Value::Complex(z) => z,
        }
    }
}

impl Expr {
    pub fn eval(&self) -> Result<Value, ExprError> {
        use Value::{Complex as C, Real as R};
        Ok(match self {
            Expr::Number(x) => R(*x),
            Expr::Imaginary(x) => C(Complex64::new(0.0, *x)),
            Expr::Pi => R(std::f64::consts::PI),
            Expr::I => C(Complex64::new(0.0, 1.0)),
            Expr::Neg(e) => match e.eval()? {
                R(x) => R(-x),
                C(z) => C(-z),
            },
            Expr::Add(a, b) => match (a.eval()?, b.eval()?) {
                (R(x), R(y)) => R(x + y),
                (x, y) => C(x.to_complex() + y.to_complex()),
            },
            Expr::Sub(a, b) => match (a.eval()?, b.eval()?) {
                (R(x), R(y)) => R(x - y),
                (x, y) => C(x.to_complex() - y.to_complex()),
            },
            Expr::Mul(a, b) => match (a.eval()?, b.eval()?) {
                (R(x), R(y)) => R(x * y),
                (R(x), C(z)) | (C(z), R(x)) => C(z.scale(x)),
                (C(z), C(w)) => C(z * w),
            },
            Expr::Div(a, b) => {
                let (num, den) = (a.eval()?, b.eval()?);
                if den.to_complex() == Complex64::new(0.0, 0.0) {
                    return Err(ExprError::DivisionByZero);
                }
                match (num, den) {
                    (R(x), R(y)) => R(x / y),
                    (C(z), R(y)) => C(z.unscale(y)),
                    (x, C(w)) => C(x.to_complex() / w),
                }
            }
            Expr::Pow(base, exp) => {
                let b = base.eval()?;
                if *exp < 0 && b.to_complex() == Complex64::new(0.0, 0.0) {
                    return Err(ExprError::DivisionByZero);
                }
                match b {
                    R(x) => R(x.powi(*exp)),
                    C(z) => C(z.powi(*exp)),
                }
            }
            Expr::Sqrt(e) => match e.eval()? {
                R(x) if x >= 0.0 => R(x.sqrt()),
                R(x) => C(Complex64::new(0.0, (-x).sqrt())),
                C(z) => C(z.sqrt()),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Imaginary(f64),
    Pi,
    I,
    Sqrt,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(x) => format!("number {x}"),
            TokenKind::Imaginary(x) => format!("imaginary literal {x}i"),
            TokenKind::Pi => "'pi'".into(),
            TokenKind::I => "'i'".into(),
            TokenKind::Sqrt => "'sqrt'".into(),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Caret => "'^'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    at: usize,
    /// Source slice, kept so `^` can insist on an integer literal.
    text: String,
}

fn syntax(position: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            i += 1;
            out.push(Token {
                kind,
                at: start,
                text: text[start..i].to_string(),
            });
            continue;
        }
        if c == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X')) {
            let digits_start = i + 2;
            let mut j = digits_start;
            while j < bytes.len() && bytes[j].is_ascii_hexdigit() {
                j += 1;
            }
            if j - digits_start != 16 {
                return Err(syntax(start, "hex bit pattern needs exactly 16 hex digits"));
            }
            let bits = u64::from_str_radix(&text[digits_start..j], 16)
                .map_err(|_| syntax(start, "malformed hex bit pattern"))?;
            i = j;
            out.push(Token {
                kind: TokenKind::Number(f64::from_bits(bits)),
                at: start,
                text: text[start..i].to_string(),
            });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'.' {
                j += 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let mantissa = &text[i..j];
            if !mantissa.bytes().any(|b| b.is_ascii_digit()) {
                return Err(syntax(start, "malformed number"));
            }
            if j < bytes.len() && matches!(bytes[j], b'e' | b'E') {
                let mut k = j + 1;
                if k < bytes.len() && matches!(bytes[k], b'+' | b'-') {
                    k += 1;
                }
                let exp_digits = k;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                if k == exp_digits {
                    return Err(syntax(j, "exponent has no digits"));
                }
                j = k;
            }
            let value: f64 = text[i..j]
                .parse()
                .map_err(|_| syntax(start, "malformed number"))?;
            let imaginary = j < bytes.len()
                && bytes[j] == b'i'
                && !bytes.get(j + 1).is_some_and(|b| b.is_ascii_alphanumeric());
            let kind = if imaginary {
                j += 1;
                TokenKind::Imaginary(value)
            } else {
                TokenKind::Number(value)
            };
            i = j;
            out.push(Token {
                kind,
                at: start,
                text: text[start..i].to_string(),
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
                j += 1;
            }
            let word = &text[i..j];
            let kind = match word {
                "pi" => TokenKind::Pi,
                "i" => TokenKind::I,
                "sqrt" => TokenKind::Sqrt,
                _ => return Err(syntax(start, format!("unknown identifier '{word}'"))),
            };
            i = j;
            out.push(Token {
                kind,
                at: start,
                text: word.to_string(),
            });
            continue;
        }
        return Err(syntax(
            start,
            format!(
                "unexpected character '{}'",
                &text[start..].chars().next().unwrap_or('?')
            ),
        ));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.at)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&TokenKind::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&TokenKind::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&TokenKind::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&TokenKind::Slash) {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(&TokenKind::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&TokenKind::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.primary()?;
        while self.eat(&TokenKind::Caret) {
            let negative = if self.eat(&TokenKind::Minus) {
                true
            } else {
                self.eat(&TokenKind::Plus);
                false
            };
            let at = self.here();
            let exp = match self.next() {
                Some(Token {
                    kind: TokenKind::Number(_),
                    text,
                    ..
                }) if text.bytes().all(|b| b.is_ascii_digit()) => text
                    .parse::<i32>()
                    .map_err(|_| syntax(at, "exponent out of range"))?,
                _ => return Err(syntax(at, "'^' expects an integer literal exponent")),
            };
            base = Expr::Pow(Box::new(base), if negative { -exp } else { exp });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.here();
        let Some(tok) = self.next() else {
            return Err(syntax(at, "unexpected end of input"));
        };
        match tok.kind {
            TokenKind::Number(x) => Ok(Expr::Number(x)),
            TokenKind::Imaginary(x) => Ok(Expr::Imaginary(x)),
            TokenKind::Pi => Ok(Expr::Pi),
            TokenKind::I => Ok(Expr::I),
            TokenKind::Sqrt => {
                if !self.eat(&TokenKind::LParen) {
                    return Err(syntax(self.here(), "expected '(' after sqrt"));
                }
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            other => Err(syntax(tok.at, format!("unexpected {}", other.describe()))),
        }
    }

    fn close_paren(&mut self) -> Result<(), ExprError> {
        if self.eat(&TokenKind::RParen) {
            Ok(())
        } else {
            Err(syntax(self.here(), "expected ')'"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_real("0.5").unwrap(), 0.5);
        assert_eq!(parse_real("1e-7").unwrap(), 1e-7);
        assert_eq!(parse_real(" 2.5E+2 ").unwrap(), 250.0);
        assert_eq!(parse_real("0x3fe0000000000000").unwrap(), 0.5);
        assert_eq!(parse_complex("0").unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn published_parameter_strings() {
        assert_eq!(
            parse_complex("0.747467+0.445271*i").unwrap(),
            Complex64::new(0.747467, 0.445271)
        );
        assert_eq!(
            parse_complex("-1/2 - i").unwrap(),
            Complex64::new(-0.5, -1.0)
        );
        assert_eq!(
            parse_complex("2.0176+4.8585i").unwrap(),
            Complex64::new(2.0176, 4.8585)
        );
        assert_eq!(parse_complex("1-i").unwrap(), Complex64::new(1.0, -1.0));
        let a = parse_real("1.0415/sqrt(2*pi^2)").unwrap();
        assert_eq!(a, 1.0415 / (2.0 * std::f64::consts::PI.powi(2)).sqrt());
    }

    #[test]
    fn one_over_root_six_is_within_an_ulp_of_high_precision() {
        // 1/sqrt(6) to 30 digits from a 200-bit evaluation
        let oracle = 0.408_248_290_463_863_016_366_214_012_451_f64;
        let got = parse_real("1/sqrt(6)").unwrap();
        let ulp = f64::from_bits(oracle.to_bits() + 1) - oracle;
        assert!((got - oracle).abs() <= ulp, "{got:e} vs {oracle:e}");
    }

    #[test]
    fn real_context_rejects_imaginary_unit() {
        assert!(matches!(
            parse_real("1+i"),
            Err(ExprError::ImaginaryInReal { position: 2 })
        ));
        assert!(matches!(
            parse_real("2i"),
            Err(ExprError::ImaginaryInReal { .. })
        ));
        assert!(matches!(
            parse_real("sqrt(-1)"),
            Err(ExprError::ImaginaryInReal { .. })
        ));
        assert_eq!(parse_complex("sqrt(-4)").unwrap(), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn errors_report_positions() {
        assert_eq!(
            parse_real("1 + * 2"),
            Err(ExprError::Syntax {
                position: 4,
                message: "unexpected '*'".into()
            })
        );
        assert!(matches!(
            parse_real("(1+2"),
            Err(ExprError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse_real("foo"),
            Err(ExprError::Syntax { position: 0, .. })
        ));
        assert!(matches!(
            parse_real("2^0.5"),
            Err(ExprError::Syntax { position: 2, .. })
        ));
        assert_eq!(parse_real("1/0"), Err(ExprError::DivisionByZero));
        assert_eq!(parse_complex("i/(1-1)"), Err(ExprError::DivisionByZero));
        assert_eq!(parse_real("0^-1"), Err(ExprError::DivisionByZero));
        assert_eq!(parse_real("  "), Err(ExprError::Empty));
    }

    #[test]
    fn precedence_table() {
        let cases: [(&str, f64); 20] = [
            ("1+2*3", 7.0),
            ("(1+2)*3", 9.0),
            ("2*3+1", 7.0),
            ("8/4/2", 1.0),
            ("8-4-2", 2.0),
            ("2^3^2", 64.0),
            ("-2^2", -4.0),
            ("(-2)^2", 4.0),
            ("2^-1", 0.5),
            ("-3*-2", 6.0),
            ("1-2+3", 2.0),
            ("2*3^2", 18.0),
            ("6/2*3", 9.0),
            ("--1", 1.0),
            ("+1-+1", 0.0),
            ("sqrt(4)*3", 6.0),
            ("sqrt(2*8)^2", 16.0),
            ("1+2^2*3", 13.0),
            ("10-2*3^2/6", 7.0),
            ("-(1+1)^3", -8.0),
        ];
        for (text, want) in cases {
            assert_eq!(parse_real(text).unwrap(), want, "{text}");
        }
    }

    #[test]
    fn complex_arithmetic() {
        let z = parse_complex("(1+i)*(1-i)").unwrap();
        assert_eq!(z, Complex64::new(2.0, 0.0));
        let w = parse_complex("1/i").unwrap();
        assert_eq!(w, Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("i^2").unwrap(), Complex64::new(-1.0, 0.0));
    }
}
