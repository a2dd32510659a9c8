//! Small expression language over Euclidean numbers.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := 'a' '^' rational | primary ('^' integer)?
//! primary := number | 'a' | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `a` (or `α`) is the infinite unit. The exponent of `a` is read as a
//! rational literal, so `a^1/2` is `α^(1/2)`, not `α/2`. Functions: `st`,
//! `inv`, `abs`, `class`, `relate`.

use std::fmt;

use super::{EuclideanScalar, Exponent, OrderClass, OrderTag, Relation};
use crate::error::{Error, Result};

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(EuclideanScalar),
    Real(f64),
    Class(OrderClass),
    Relation(Relation),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(x) => write!(f, "{x}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Class(c) => {
                let tag = match c.tag {
                    OrderTag::Infinitesimal => "infinitesimal",
                    OrderTag::FiniteNonzeroSt => "finite_nonzero_st",
                    OrderTag::Infinite => "infinite",
                };
                match c.leading_exponent {
                    Some(e) if e.is_integer() => write!(f, "{tag} (leading exponent {})", e.numer()),
                    Some(e) => write!(f, "{tag} (leading exponent {}/{})", e.numer(), e.denom()),
                    None => write!(f, "{tag} (leading exponent -inf)"),
                }
            }
            Value::Relation(r) => {
                let name = match r {
                    Relation::InfinitelyClose => "infinitely_close",
                    Relation::FinitelySeparated => "finitely_separated",
                    Relation::InfinitelySeparated => "infinitely_separated",
                };
                write!(f, "{name}")
            }
        }
    }
}

impl Value {
    fn into_scalar(self) -> Result<EuclideanScalar> {
        match self {
            Value::Scalar(x) => Ok(x),
            Value::Real(r) if r.is_finite() => Ok(EuclideanScalar::from_real(r)),
            other => Err(Error::parse(format!("`{other}` is not a number"))),
        }
    }
}

/// Parses and evaluates `text`.
pub fn evaluate(text: &str) -> Result<Value> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let value = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::parse(format!(
            "unexpected `{}` in `{text}`",
            parser.tokens[parser.pos]
        )));
    }
    Ok(value)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64, String),
    Integer(i64),
    Ident(String),
    Alpha,
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(_, s) => write!(f, "{s}"),
            Token::Integer(i) => write!(f, "{i}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Alpha => write!(f, "a"),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            let lit: String = chars[start..i].iter().collect();
            match lit.parse::<i64>() {
                Ok(n) => out.push(Token::Integer(n)),
                Err(_) => {
                    let v = lit
                        .parse::<f64>()
                        .map_err(|_| Error::parse(format!("bad number `{lit}`")))?;
                    out.push(Token::Number(v, lit));
                }
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            if ident == "a" || ident == "α" {
                out.push(Token::Alpha);
            } else {
                out.push(Token::Ident(ident));
            }
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(Error::parse(format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                let rhs = self.term()?;
                acc = Value::Scalar(acc.into_scalar()? + rhs.into_scalar()?);
            } else if self.eat_op('-') {
                let rhs = self.term()?;
                acc = Value::Scalar(acc.into_scalar()? - rhs.into_scalar()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_op('*') {
                let rhs = self.unary()?;
                acc = Value::Scalar(acc.into_scalar()? * rhs.into_scalar()?);
            } else if self.eat_op('/') {
                let rhs = self.unary()?.into_scalar()?;
                acc = Value::Scalar(acc.into_scalar()? * rhs.invert()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat_op('-') {
            Ok(Value::Scalar(-self.unary()?.into_scalar()?))
        } else if self.eat_op('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Value> {
        if self.peek() == Some(&Token::Alpha) {
            self.pos += 1;
            if self.eat_op('^') {
                let e = self.rational()?;
                return Ok(Value::Scalar(EuclideanScalar::monomial(1.0, e)));
            }
            return Ok(Value::Scalar(EuclideanScalar::alpha()));
        }
        let base = self.primary()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let e = self.rational()?;
        if !e.is_integer() {
            return Err(Error::parse("only `a` may carry a fractional exponent"));
        }
        let n = *e.numer();
        let x = base.into_scalar()?;
        let mut acc = EuclideanScalar::one().truncated(x.order());
        for _ in 0..n.unsigned_abs() {
            acc = acc * x.clone();
        }
        if n < 0 {
            acc = acc.invert()?;
        }
        Ok(Value::Scalar(acc))
    }

    fn rational(&mut self) -> Result<Exponent> {
        if self.eat_op('(') {
            let e = self.rational()?;
            self.expect_op(')')?;
            return Ok(e);
        }
        let negative = if self.eat_op('-') {
            true
        } else {
            self.eat_op('+');
            false
        };
        let num = self.integer()?;
        let den = if self.eat_op('/') { self.integer()? } else { 1 };
        if den == 0 {
            return Err(Error::parse("zero denominator in exponent"));
        }
        let e = Exponent::new(num, den);
        Ok(if negative { -e } else { e })
    }

    fn integer(&mut self) -> Result<i64> {
        match self.peek() {
            Some(Token::Integer(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            Some(t) => Err(Error::parse(format!("expected an integer, got `{t}`"))),
            None => Err(Error::parse("expected an integer, got end of input")),
        }
    }

    fn primary(&mut self) -> Result<Value> {
        let token = self
            .peek()
            .cloned()
            .ok_or_else(|| Error::parse("unexpected end of input"))?;
        self.pos += 1;
        match token {
            Token::Integer(n) => Ok(Value::Scalar(EuclideanScalar::from_real(n as f64))),
            Token::Number(v, _) => Ok(Value::Scalar(EuclideanScalar::from_real(v))),
            Token::Op('(') => {
                let v = self.expr()?;
                self.expect_op(')')?;
                Ok(v)
            }
            Token::Ident(name) => {
                self.expect_op('(')?;
                let mut args = vec![self.expr()?];
                while self.eat_op(',') {
                    args.push(self.expr()?);
                }
                self.expect_op(')')?;
                call(&name, args)
            }
            t => Err(Error::parse(format!("unexpected `{t}`"))),
        }
    }
}

fn call(name: &str, args: Vec<Value>) -> Result<Value> {
    let arity = match name {
        "relate" => 2,
        "st" | "inv" | "abs" | "class" => 1,
        _ => return Err(Error::parse(format!("unknown function `{name}`"))),
    };
    if args.len() != arity {
        return Err(Error::parse(format!("`{name}` takes {arity} argument(s)")));
    }
    let mut scalars = args.into_iter().map(Value::into_scalar);
    let x = scalars.next().expect("arity checked")?;
    Ok(match name {
        "st" => Value::Real(x.standard_part()),
        "inv" => Value::Scalar(x.invert()?),
        "abs" => Value::Scalar(x.abs()),
        "class" => Value::Class(x.classify()),
        _ => {
            let y = scalars.next().expect("arity checked")?;
            Value::Relation(x.relate(&y))
        }
    })
}

impl Value {
    /// Standard part of a numeric value.
    pub fn standard_part(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(x.standard_part()),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_part_of_expression() {
        assert_eq!(evaluate("st(3 + 5*a^-1)").unwrap().to_string(), "3");
        assert_eq!(evaluate("st(a)").unwrap(), Value::Real(f64::INFINITY));
    }

    #[test]
    fn fractional_exponents_and_division() {
        let v = evaluate("a^1/2 * a^1/2").unwrap();
        assert_eq!(v, Value::Scalar(EuclideanScalar::alpha()));
        let v = evaluate("(6*a^2 + 3*a) / (3*a)").unwrap();
        assert_eq!(v.to_string(), "2*a^1 + 1");
        assert_eq!(evaluate("(1 + a^-1)^2").unwrap().to_string(), "1 + 2*a^-1 + 1*a^-2");
    }

    #[test]
    fn functions() {
        assert_eq!(evaluate("relate(3, 3 + a^-1)").unwrap().to_string(), "infinitely_close");
        assert_eq!(
            evaluate("class(a^1/2)").unwrap().to_string(),
            "infinite (leading exponent 1/2)"
        );
        assert_eq!(evaluate("abs(-2*a^-1)").unwrap().to_string(), "2*a^-1");
    }

    #[test]
    fn errors() {
        assert!(evaluate("1 +").is_err());
        assert!(evaluate("foo(1)").is_err());
        assert!(evaluate("inv(0)").is_err());
        assert!(evaluate("2^1/2").is_err());
        assert!(evaluate("3 $ 4").is_err());
    }
}
