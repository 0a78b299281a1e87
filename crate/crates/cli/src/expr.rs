//! Source expressions: a closed arithmetic vocabulary over the node
//! coordinates and the two leading eigenmodes.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 'y' | 'pi' | 'mode1' | 'mode2'
//!        | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func  := pos | max | min | abs | sin | cos | exp | mode
//! ```
//!
//! `mode(k)` is the `k`-th computed eigenmode, `k ∈ {1, 2}`; `pos(e)` is
//! `max(e, 0)`.

use std::fmt;

use signlab::{DomainSpectrum, GridFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at character {}: {}", self.at, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Pos,
    Max,
    Min,
    Abs,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "pos" => (Func::Pos, 1),
            "max" => (Func::Max, 2),
            "min" => (Func::Min, 2),
            "abs" => (Func::Abs, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            _ => return None,
        })
    }

    fn apply(self, a: &[f64]) -> f64 {
        match self {
            Func::Pos => a[0].max(0.0),
            Func::Max => a[0].max(a[1]),
            Func::Min => a[0].min(a[1]),
            Func::Abs => a[0].abs(),
            Func::Sin => a[0].sin(),
            Func::Cos => a[0].cos(),
            Func::Exp => a[0].exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Mode(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = vec![];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| ParseError { at: start, message: format!("bad number '{text}'") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError { at: i, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(at, _)| *at)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { at: self.here(), message: message.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            self.err(format!("expected '{op}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.toks.get(self.pos).map(|(_, t)| t.clone()) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "mode1" => Ok(Expr::Mode(1)),
                    "mode2" => Ok(Expr::Mode(2)),
                    "mode" => {
                        self.expect('(')?;
                        let k = match self.peek() {
                            Some(&Tok::Num(k)) if k == 1.0 || k == 2.0 => k as usize,
                            _ => return self.err("mode(k) takes k = 1 or 2"),
                        };
                        self.pos += 1;
                        self.expect(')')?;
                        Ok(Expr::Mode(k))
                    }
                    _ => {
                        let Some((func, arity)) = Func::lookup(&name) else {
                            return Err(ParseError { at, message: format!("unknown name '{name}'") });
                        };
                        self.expect('(')?;
                        let mut args = vec![self.expr()?];
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                        if args.len() != arity {
                            return Err(ParseError {
                                at,
                                message: format!("{name} takes {arity} argument(s), got {}", args.len()),
                            });
                        }
                        Ok(Expr::Call(func, args))
                    }
                }
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of expression"),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, len: src.chars().count() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl Expr {
    fn at(&self, x: f64, y: f64, modes: [f64; 2]) -> f64 {
        let bin = |a: &Expr, b: &Expr| (a.at(x, y, modes), b.at(x, y, modes));
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Mode(k) => modes[k - 1],
            Expr::Neg(a) => -a.at(x, y, modes),
            Expr::Add(a, b) => {
                let (a, b) = bin(a, b);
                a + b
            }
            Expr::Sub(a, b) => {
                let (a, b) = bin(a, b);
                a - b
            }
            Expr::Mul(a, b) => {
                let (a, b) = bin(a, b);
                a * b
            }
            Expr::Div(a, b) => {
                let (a, b) = bin(a, b);
                a / b
            }
            Expr::Pow(a, b) => {
                let (a, b) = bin(a, b);
                a.powf(b)
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|e| e.at(x, y, modes)).collect();
                f.apply(&v)
            }
        }
    }

    /// Samples the expression on the spectrum's grid; non-finite values are rejected.
    pub fn sample(&self, spectrum: &DomainSpectrum) -> Result<GridFunction, String> {
        let grid = *spectrum.grid();
        let (p1, p2) = (spectrum.phi1.values(), spectrum.phi2.values());
        let mut values = Vec::with_capacity(grid.node_count());
        for i in 0..grid.node_count() {
            let [x, y] = grid.coordinates(i);
            let v = self.at(x, y, [p1[i], p2[i]]);
            if !v.is_finite() {
                return Err(format!("value {v} at node ({x}, {y})"));
            }
            values.push(v);
        }
        GridFunction::new(grid, values).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use signlab::{leading_eigenpairs, DomainGrid};

    fn eval(src: &str, x: f64) -> f64 {
        parse(src).unwrap().at(x, 0.0, [0.0, 0.0])
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(eval("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(eval("-2 ^ 2", 0.0), -4.0);
        assert_eq!(eval("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(eval("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(eval("x*(1-x)", 0.25), 0.1875);
        assert_eq!(eval("1.5e-1 + 2E2", 0.0), 200.15);
    }

    #[test]
    fn functions() {
        assert_eq!(eval("pos(x - 0.5)", 0.25), 0.0);
        assert_eq!(eval("pos(x - 0.5)", 0.75), 0.25);
        assert_eq!(eval("max(x, 0.3) + min(x, 0.3)", 0.1), 0.4);
        assert!((eval("sin(pi * x)", 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_names_and_arity() {
        assert!(parse("foo(1)").unwrap_err().message.contains("unknown name"));
        assert!(parse("max(1)").unwrap_err().message.contains("2 argument"));
        assert!(parse("mode(3)").is_err());
        assert!(parse("1 +").is_err());
        assert!(parse("(1").is_err());
        assert!(parse("1 2").is_err());
        assert_eq!(parse("x $ 1").unwrap_err().at, 2);
    }

    #[test]
    fn modes_sample_the_spectrum() {
        let s = leading_eigenpairs(&DomainGrid::interval(1.0, 31).unwrap()).unwrap();
        assert_eq!(parse("mode1").unwrap().sample(&s).unwrap(), s.phi1);
        assert_eq!(parse("mode(2)").unwrap().sample(&s).unwrap(), s.phi2);
        assert!(parse("1 / (x - x)").unwrap().sample(&s).is_err());
    }
}
