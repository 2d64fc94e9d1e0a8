//! A tiny expression language for integer sequences given as binomial sums.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' unsigned)?
//! atom   := integer | 'n' | 'i' | '(' expr ')'
//!         | 'binom(' expr ',' expr ')' | 'fact(' expr ')'
//!         | 'pow(' expr ',' expr ')'
//!         | 'sum(' ident ',' expr ',' expr ',' expr ')'
//!         | '-' atom
//! ```
//!
//! `n` is the one free variable; `i` is only valid inside a `sum`, which must
//! bind `i`.  Evaluation is exact: rationals may appear in sub-expressions
//! (negative `pow` exponents), but every sequence value must come out an
//! integer, which is checked.  A modular evaluator computes values mod a
//! prime power without building huge integers, tracking prime valuations of
//! factorials separately so binomial quotients divide exactly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numkernel::Rational;

/// Abstract syntax of a sequence expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqExpr {
    Int(BigInt),
    N,
    I,
    Add(Box<SeqExpr>, Box<SeqExpr>),
    Sub(Box<SeqExpr>, Box<SeqExpr>),
    Mul(Box<SeqExpr>, Box<SeqExpr>),
    /// `base ^ literal` with a non-negative literal exponent.
    PowLit(Box<SeqExpr>, u32),
    /// `pow(base, exponent)` with an arbitrary integer-valued exponent.
    Pow(Box<SeqExpr>, Box<SeqExpr>),
    Binom(Box<SeqExpr>, Box<SeqExpr>),
    Fact(Box<SeqExpr>),
    Neg(Box<SeqExpr>),
    /// `sum(i, lo, hi, body)`.
    Sum {
        lo: Box<SeqExpr>,
        hi: Box<SeqExpr>,
        body: Box<SeqExpr>,
    },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let bump = |ch: char, line: &mut u32, col: &mut u32| {
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if c.is_whitespace() {
            chars.next();
            bump(c, &mut line, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    s.push(d);
                    chars.next();
                    bump(d, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let v = s.parse::<BigInt>().expect("digit run parses");
            out.push(Spanned { tok: Tok::Int(v), line: l, col: co });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    chars.next();
                    bump(d, &mut line, &mut col);
                } else {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Ident(s), line: l, col: co });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(Error::Parse(format!(
                    "line {l}, column {co}: unexpected character '{c}'"
                )))
            }
        };
        chars.next();
        bump(c, &mut line, &mut col);
        out.push(Spanned { tok, line: l, col: co });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    in_sum: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map_or((1, 1), |s| (s.line, s.col))
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::Parse(format!("line {l}, column {c}: {msg}")))
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<SeqExpr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    e = SeqExpr::Add(Box::new(e), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    e = SeqExpr::Sub(Box::new(e), Box::new(self.term()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<SeqExpr> {
        let mut e = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            e = SeqExpr::Mul(Box::new(e), Box::new(self.factor()?));
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<SeqExpr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(v)) => {
                    self.pos += 1;
                    let e = v
                        .to_u32()
                        .ok_or_else(|| {
                            Error::Parse("literal exponent out of range".into())
                        })?;
                    Ok(SeqExpr::PowLit(Box::new(base), e))
                }
                _ => self.fail("expected an unsigned literal exponent after '^'"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<SeqExpr> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(SeqExpr::Int(v))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(SeqExpr::Neg(Box::new(self.atom()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "n" => Ok(SeqExpr::N),
                    "i" => {
                        if self.in_sum == 0 {
                            self.pos -= 1;
                            return self.fail("'i' is only bound inside sum(...)");
                        }
                        Ok(SeqExpr::I)
                    }
                    "binom" => {
                        self.eat(&Tok::LParen, "'(' after binom")?;
                        let a = self.expr()?;
                        self.eat(&Tok::Comma, "',' between binom arguments")?;
                        let b = self.expr()?;
                        self.eat(&Tok::RParen, "')'")?;
                        Ok(SeqExpr::Binom(Box::new(a), Box::new(b)))
                    }
                    "fact" => {
                        self.eat(&Tok::LParen, "'(' after fact")?;
                        let a = self.expr()?;
                        self.eat(&Tok::RParen, "')'")?;
                        Ok(SeqExpr::Fact(Box::new(a)))
                    }
                    "pow" => {
                        self.eat(&Tok::LParen, "'(' after pow")?;
                        let b = self.expr()?;
                        self.eat(&Tok::Comma, "',' between pow arguments")?;
                        let e = self.expr()?;
                        self.eat(&Tok::RParen, "')'")?;
                        Ok(SeqExpr::Pow(Box::new(b), Box::new(e)))
                    }
                    "sum" => {
                        self.eat(&Tok::LParen, "'(' after sum")?;
                        match self.peek().cloned() {
                            Some(Tok::Ident(v)) if v == "i" => {
                                self.pos += 1;
                            }
                            Some(Tok::Ident(v)) => {
                                return self.fail(&format!(
                                    "sum binds 'i', not '{v}'"
                                ))
                            }
                            _ => return self.fail("expected the bound variable 'i'"),
                        }
                        self.eat(&Tok::Comma, "','")?;
                        let lo = self.expr()?;
                        self.eat(&Tok::Comma, "','")?;
                        let hi = self.expr()?;
                        self.eat(&Tok::Comma, "','")?;
                        self.in_sum += 1;
                        let body = self.expr();
                        self.in_sum -= 1;
                        let body = body?;
                        self.eat(&Tok::RParen, "')'")?;
                        Ok(SeqExpr::Sum {
                            lo: Box::new(lo),
                            hi: Box::new(hi),
                            body: Box::new(body),
                        })
                    }
                    other => {
                        self.pos -= 1;
                        self.fail(&format!("unknown name '{other}'"))
                    }
                }
            }
            _ => self.fail("expected a value"),
        }
    }
}

/// Parse an expression; diagnostics carry line and column.
pub fn parse(text: &str) -> Result<SeqExpr> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, in_sum: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input after the expression");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Pretty-printer (round-trips through `parse`)
// ---------------------------------------------------------------------------

impl SeqExpr {
    fn prec(&self) -> u8 {
        match self {
            SeqExpr::Add(..) | SeqExpr::Sub(..) => 1,
            SeqExpr::Mul(..) => 2,
            SeqExpr::PowLit(..) => 3,
            _ => 4,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, e: &SeqExpr, min: u8| -> fmt::Result {
            if e.prec() < min {
                write!(f, "(")?;
                e.write(f)?;
                write!(f, ")")
            } else {
                e.write(f)
            }
        };
        match self {
            SeqExpr::Int(v) => {
                if v.is_negative() {
                    // negative literals do not exist in the grammar
                    write!(f, "-{}", v.magnitude())
                } else {
                    write!(f, "{v}")
                }
            }
            SeqExpr::N => write!(f, "n"),
            SeqExpr::I => write!(f, "i"),
            SeqExpr::Add(a, b) => {
                paren(f, a, 1)?;
                write!(f, " + ")?;
                paren(f, b, 2)
            }
            SeqExpr::Sub(a, b) => {
                paren(f, a, 1)?;
                write!(f, " - ")?;
                paren(f, b, 2)
            }
            SeqExpr::Mul(a, b) => {
                paren(f, a, 2)?;
                write!(f, "*")?;
                paren(f, b, 3)
            }
            SeqExpr::PowLit(b, e) => {
                paren(f, b, 4)?;
                write!(f, "^{e}")
            }
            SeqExpr::Pow(b, e) => {
                write!(f, "pow(")?;
                b.write(f)?;
                write!(f, ", ")?;
                e.write(f)?;
                write!(f, ")")
            }
            SeqExpr::Binom(a, b) => {
                write!(f, "binom(")?;
                a.write(f)?;
                write!(f, ", ")?;
                b.write(f)?;
                write!(f, ")")
            }
            SeqExpr::Fact(a) => {
                write!(f, "fact(")?;
                a.write(f)?;
                write!(f, ")")
            }
            SeqExpr::Neg(a) => {
                write!(f, "-")?;
                paren(f, a, 4)
            }
            SeqExpr::Sum { lo, hi, body } => {
                write!(f, "sum(i, ")?;
                lo.write(f)?;
                write!(f, ", ")?;
                hi.write(f)?;
                write!(f, ", ")?;
                body.write(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f)
    }
}

// ---------------------------------------------------------------------------
// Exact evaluation
// ---------------------------------------------------------------------------

fn as_integer(v: &Rational, what: &str) -> Result<BigInt> {
    if v.is_integer() {
        Ok(v.numer().clone())
    } else {
        Err(Error::Invalid(format!("{what} is not an integer: {v}")))
    }
}

fn binom_exact(a: &BigInt, b: &BigInt) -> Result<BigInt> {
    if a.is_negative() {
        return Err(Error::Invalid(format!("binomial with negative top {a}")));
    }
    if b.is_negative() || b > a {
        return Ok(BigInt::zero());
    }
    Ok(num_integer::binomial(a.clone(), b.clone()))
}

fn fact_exact(a: &BigInt) -> Result<BigInt> {
    if a.is_negative() {
        return Err(Error::Invalid(format!("factorial of negative {a}")));
    }
    let k = a
        .to_u64()
        .filter(|&k| k <= 1_000_000)
        .ok_or_else(|| Error::Invalid("factorial argument too large".into()))?;
    let mut r = BigInt::one();
    for j in 2..=k {
        r *= BigInt::from(j);
    }
    Ok(r)
}

fn eval_rat(e: &SeqExpr, n: &BigInt, i: Option<&BigInt>) -> Result<Rational> {
    match e {
        SeqExpr::Int(v) => Ok(Rational::from(v.clone())),
        SeqExpr::N => Ok(Rational::from(n.clone())),
        SeqExpr::I => i
            .map(|v| Rational::from(v.clone()))
            .ok_or_else(|| Error::Invalid("'i' used outside a sum".into())),
        SeqExpr::Add(a, b) => Ok(eval_rat(a, n, i)? + eval_rat(b, n, i)?),
        SeqExpr::Sub(a, b) => Ok(eval_rat(a, n, i)? - eval_rat(b, n, i)?),
        SeqExpr::Mul(a, b) => Ok(eval_rat(a, n, i)? * eval_rat(b, n, i)?),
        SeqExpr::Neg(a) => Ok(-eval_rat(a, n, i)?),
        SeqExpr::PowLit(b, e) => {
            let base = eval_rat(b, n, i)?;
            Ok(num_traits::pow::pow(base, *e as usize))
        }
        SeqExpr::Pow(b, e) => {
            let base = eval_rat(b, n, i)?;
            let ex = as_integer(&eval_rat(e, n, i)?, "pow exponent")?;
            let mag = ex
                .magnitude()
                .to_usize()
                .ok_or_else(|| Error::Invalid("pow exponent too large".into()))?;
            let p = num_traits::pow::pow(base.clone(), mag);
            if ex.is_negative() {
                if p.is_zero() {
                    return Err(Error::Invalid(
                        "negative power of zero in sequence term".into(),
                    ));
                }
                Ok(p.recip())
            } else {
                Ok(p)
            }
        }
        SeqExpr::Binom(a, b) => {
            let a = as_integer(&eval_rat(a, n, i)?, "binom argument")?;
            let b = as_integer(&eval_rat(b, n, i)?, "binom argument")?;
            Ok(Rational::from(binom_exact(&a, &b)?))
        }
        SeqExpr::Fact(a) => {
            let a = as_integer(&eval_rat(a, n, i)?, "factorial argument")?;
            Ok(Rational::from(fact_exact(&a)?))
        }
        SeqExpr::Sum { lo, hi, body } => {
            let lo = as_integer(&eval_rat(lo, n, i)?, "sum lower bound")?;
            let hi = as_integer(&eval_rat(hi, n, i)?, "sum upper bound")?;
            let mut acc = Rational::from(BigInt::zero());
            let mut v = lo;
            while v <= hi {
                acc += eval_rat(body, n, Some(&v))?;
                v += 1;
            }
            Ok(acc)
        }
    }
}

/// Exact value of the sequence at index `n`; must come out an integer.
pub fn eval(e: &SeqExpr, n: &BigInt) -> Result<BigInt> {
    if n.is_negative() {
        return Err(Error::Invalid("sequence index must be non-negative".into()));
    }
    let v = eval_rat(e, n, None)?;
    as_integer(&v, "sequence value")
}

// ---------------------------------------------------------------------------
// Modular evaluation
// ---------------------------------------------------------------------------

/// Shared unit-product tables for factorials modulo a prime power.
struct PadicTable {
    p: u64,
    q: BigInt,
    q_u64: u64,
    /// product of all units in `[1, q)`, lazily built on first large input
    wilson: OnceLock<BigInt>,
}

impl PadicTable {
    /// `(v, u)` with `N! = p^v * u`, `u` a unit taken mod `q = p^m`.
    fn factorial(&self, n: u64) -> (u64, BigInt) {
        if n == 0 {
            return (0, BigInt::one());
        }
        let (v_rest, u_rest) = self.factorial(n / self.p);
        let mut u = u_rest;
        if n >= self.q_u64 {
            let w = self.wilson.get_or_init(|| {
                let mut w = BigInt::one();
                for j in 1..self.q_u64 {
                    if j % self.p != 0 {
                        w = w * BigInt::from(j) % &self.q;
                    }
                }
                w
            });
            u = u * w.modpow(&BigInt::from(n / self.q_u64), &self.q) % &self.q;
        }
        for j in 1..=(n % self.q_u64) {
            if j % self.p != 0 {
                u = u * BigInt::from(j) % &self.q;
            }
        }
        (v_rest + n / self.p, u)
    }

    fn binom(&self, a: u64, b: u64, m_exp: u32) -> Result<BigInt> {
        let (va, ua) = self.factorial(a);
        let (vb, ub) = self.factorial(b);
        let (vc, uc) = self.factorial(a - b);
        let v = va - vb - vc;
        if v >= m_exp as u64 {
            return Ok(BigInt::zero());
        }
        let inv = mod_inverse(&(ub * uc % &self.q), &self.q)
            .ok_or_else(|| Error::Numeric("factorial unit not invertible".into()))?;
        Ok(ua * inv % &self.q * BigInt::from(self.p).pow(v as u32) % &self.q)
    }
}

fn padic_tables() -> &'static Mutex<HashMap<(u64, u32), Arc<PadicTable>>> {
    static TABLES: OnceLock<Mutex<HashMap<(u64, u32), Arc<PadicTable>>>> = OnceLock::new();
    TABLES.get_or_init(|| Mutex::new(HashMap::new()))
}

fn padic_table(p: u64, m: u32) -> Arc<PadicTable> {
    let mut map = padic_tables().lock().expect("table lock poisoned");
    map.entry((p, m))
        .or_insert_with(|| {
            let q = BigInt::from(p).pow(m);
            let q_u64 = q.to_u64().expect("prime power fits u64");
            Arc::new(PadicTable { p, q, q_u64, wilson: OnceLock::new() })
        })
        .clone()
}

/// Modular inverse of `a` mod `m`, when `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Write `modulus` as `p^m` with `p` its smallest prime factor, when it is a
/// prime power with `p^m` fitting in 64 bits.
fn prime_power_split(modulus: &BigInt) -> Option<(u64, u32)> {
    let m_u64 = modulus.to_u64()?;
    let mut p = 0u64;
    let mut d = 2u64;
    while d.saturating_mul(d) <= m_u64 && d < 1 << 20 {
        if m_u64 % d == 0 {
            p = d;
            break;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if p == 0 {
        // no small factor: treat as prime
        return Some((m_u64, 1));
    }
    let mut rest = m_u64;
    let mut e = 0u32;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest == 1 {
        Some((p, e))
    } else {
        None
    }
}

struct ModCtx {
    table: Arc<PadicTable>,
    m_exp: u32,
}

impl ModCtx {
    fn reduce(&self, v: &BigInt) -> BigInt {
        v.mod_floor(&self.table.q)
    }

    fn eval(&self, e: &SeqExpr, n: &BigInt, i: Option<&BigInt>) -> Result<BigInt> {
        match e {
            SeqExpr::Int(v) => Ok(self.reduce(v)),
            SeqExpr::N => Ok(self.reduce(n)),
            SeqExpr::I => i
                .map(|v| self.reduce(v))
                .ok_or_else(|| Error::Invalid("'i' used outside a sum".into())),
            SeqExpr::Add(a, b) => {
                Ok(self.reduce(&(self.eval(a, n, i)? + self.eval(b, n, i)?)))
            }
            SeqExpr::Sub(a, b) => {
                Ok(self.reduce(&(self.eval(a, n, i)? - self.eval(b, n, i)?)))
            }
            SeqExpr::Mul(a, b) => {
                Ok(self.reduce(&(self.eval(a, n, i)? * self.eval(b, n, i)?)))
            }
            SeqExpr::Neg(a) => Ok(self.reduce(&(-self.eval(a, n, i)?))),
            SeqExpr::PowLit(b, e) => {
                let base = self.eval(b, n, i)?;
                Ok(base.modpow(&BigInt::from(*e), &self.table.q))
            }
            SeqExpr::Pow(b, e) => {
                // exponents are evaluated as plain integers, not residues
                let ex = as_integer(&eval_rat(e, n, i)?, "pow exponent")?;
                let base = self.eval(b, n, i)?;
                if ex.is_negative() {
                    let inv = mod_inverse(&base, &self.table.q).ok_or_else(|| {
                        Error::Numeric(
                            "negative power of a non-invertible residue".into(),
                        )
                    })?;
                    Ok(inv.modpow(&(-ex.clone()), &self.table.q))
                } else {
                    Ok(base.modpow(&ex, &self.table.q))
                }
            }
            SeqExpr::Binom(a, b) => {
                let a = as_integer(&eval_rat(a, n, i)?, "binom argument")?;
                let b = as_integer(&eval_rat(b, n, i)?, "binom argument")?;
                if a.is_negative() {
                    return Err(Error::Invalid(format!(
                        "binomial with negative top {a}"
                    )));
                }
                if b.is_negative() || b > a {
                    return Ok(BigInt::zero());
                }
                let (a, b) = (
                    a.to_u64()
                        .ok_or_else(|| Error::Invalid("binom argument too large".into()))?,
                    b.to_u64().expect("0 <= b <= a fits"),
                );
                self.table.binom(a, b, self.m_exp)
            }
            SeqExpr::Fact(a) => {
                let a = as_integer(&eval_rat(a, n, i)?, "factorial argument")?;
                if a.is_negative() {
                    return Err(Error::Invalid(format!("factorial of negative {a}")));
                }
                let a = a
                    .to_u64()
                    .ok_or_else(|| Error::Invalid("factorial argument too large".into()))?;
                let (v, u) = self.table.factorial(a);
                if v >= self.m_exp as u64 {
                    return Ok(BigInt::zero());
                }
                Ok(u * BigInt::from(self.table.p).pow(v as u32) % &self.table.q)
            }
            SeqExpr::Sum { lo, hi, body } => {
                let lo = as_integer(&eval_rat(lo, n, i)?, "sum lower bound")?;
                let hi = as_integer(&eval_rat(hi, n, i)?, "sum upper bound")?;
                let mut acc = BigInt::zero();
                let mut v = lo;
                while v <= hi {
                    acc += self.eval(body, n, Some(&v))?;
                    v += 1;
                }
                Ok(self.reduce(&acc))
            }
        }
    }
}

/// `eval(e, n) mod modulus` without building huge intermediates for
/// prime-power moduli; other moduli fall back to exact evaluation.
pub fn eval_mod(e: &SeqExpr, n: &BigInt, modulus: &BigInt) -> Result<BigInt> {
    if modulus < &BigInt::from(2) {
        return Err(Error::Invalid("modulus must be at least 2".into()));
    }
    if let Some((p, m)) = prime_power_split(modulus) {
        let ctx = ModCtx { table: padic_table(p, m), m_exp: m };
        match ctx.eval(e, n, None) {
            Ok(v) => return Ok(v),
            Err(Error::Numeric(_)) => {} // fall back below
            Err(other) => return Err(other),
        }
    }
    Ok(eval(e, n)?.mod_floor(modulus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> SeqExpr {
        parse(text).unwrap()
    }

    fn ev(text: &str, n: i64) -> BigInt {
        eval(&p(text), &BigInt::from(n)).unwrap()
    }

    const ALPHA: &str =
        "binom(2*n,n)^2 * sum(i,0,n, binom(n,i)^2*binom(2*i,i)*binom(2*n-2*i,n-i))";
    const DELTA: &str = "binom(2*n,n)^2 * sum(i,0,n, pow(-1,i)*pow(3,n-3*i)*\
                         binom(3*i,i)*binom(2*i,i)*binom(n,3*i)*binom(n+i,i))";

    #[test]
    fn central_binomial_powers() {
        assert_eq!(ev("binom(2*n,n)^5", 2), BigInt::from(7776));
        assert_eq!(ev("binom(2*n,n)^5", 1), BigInt::from(32));
    }

    #[test]
    fn sums_with_inner_binomials() {
        assert_eq!(ev(ALPHA, 1), BigInt::from(16));
        assert_eq!(
            ev("binom(2*n,n)^3*binom(4*n,2*n)*binom(6*n,2*n)", 1),
            BigInt::from(720)
        );
    }

    #[test]
    fn rational_subterms_with_integer_totals() {
        // the 3^(n-3i) factor is rational when 3i > n, but those terms carry
        // a vanishing binomial
        assert_eq!(ev(DELTA, 0), BigInt::from(1));
        assert_eq!(ev(DELTA, 1), BigInt::from(12));
    }

    #[test]
    fn parse_errors_carry_positions() {
        for (text, needle) in [
            ("sum(j,0,n,j)", "binds 'i'"),
            ("binom(2*n n)", "','"),
            ("q + 1", "unknown name"),
            ("i + n", "only bound inside"),
            ("2 ^ n", "literal exponent"),
            ("", "empty"),
            ("1 + ", "expected a value"),
            ("(1 + 2", "')'"),
            ("1 ) 2", "trailing"),
        ] {
            let err = parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn eval_contract_errors() {
        assert!(eval(&p("binom(2*n,n)"), &BigInt::from(-1)).is_err());
        assert!(eval(&p("pow(2,-n) "), &BigInt::from(1)).is_err()); // 1/2
        assert!(eval(&p("binom(n-5,n)"), &BigInt::from(1)).is_err()); // negative top
        assert!(eval(&p("fact(n-2)"), &BigInt::from(0)).is_err());
        assert!(eval(&p("pow(n,-1)"), &BigInt::from(0)).is_err()); // 1/0
    }

    #[test]
    fn pretty_print_round_trips() {
        let samples = [
            "binom(2*n,n)^5",
            ALPHA,
            DELTA,
            "1 + n - (2 - n)",
            "-(n^2) * -3",
            "-n^2",
            "pow(-1, n)*fact(3*n)",
            "sum(i,0,n, pow(-1,i)*i^2 - -i)",
            "(n + 1)*(n + 2)^3",
            "n - (n - (n - 1))",
            "sum(i,0,n, sum(i,0,i, binom(i,i)))",
        ];
        for s in samples {
            let ast = p(s);
            let text = ast.to_string();
            assert_eq!(p(&text), ast, "{s} -> {text}");
        }
    }

    #[test]
    fn negated_power_binds_like_the_grammar() {
        // '-' applies to the atom, so -2^2 is (-2)^2
        assert_eq!(ev("-2^2", 0), BigInt::from(4));
        assert_eq!(ev("-(2^2)", 0), BigInt::from(-4));
    }

    #[test]
    fn modular_matches_exact() {
        let exprs = [p("binom(2*n,n)^5"), p(ALPHA), p(DELTA)];
        let moduli = [
            BigInt::from(16807),     // 7^5
            BigInt::from(2476099),   // 19^5
            BigInt::from(103823),    // 47^3
            BigInt::from(720720),    // composite fallback
            BigInt::from(1_000_003), // prime
        ];
        for e in &exprs {
            for m in &moduli {
                for n in [0i64, 1, 3, 7, 20, 31] {
                    let n = BigInt::from(n);
                    let want = eval(e, &n).unwrap().mod_floor(m);
                    assert_eq!(eval_mod(e, &n, m).unwrap(), want, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn central_binomial_at_wilson_boundary() {
        // n = p - 1 exercises the carry structure of the factorial tables
        for p_ in [5i64, 13, 29, 47] {
            let e = p("binom(2*n,n)");
            let n = BigInt::from(p_ - 1);
            let m = BigInt::from(p_);
            let want = eval(&e, &n).unwrap().mod_floor(&m);
            assert_eq!(eval_mod(&e, &n, &m).unwrap(), want);
        }
    }

    #[test]
    fn bad_moduli_rejected() {
        assert!(eval_mod(&p("n"), &BigInt::from(1), &BigInt::from(1)).is_err());
        assert!(eval_mod(&p("n"), &BigInt::from(1), &BigInt::from(0)).is_err());
    }

    fn arb_expr() -> impl proptest::strategy::Strategy<Value = SeqExpr> {
        use proptest::prelude::*;
        let leaf = prop_oneof![
            (0u64..1000).prop_map(|v| SeqExpr::Int(BigInt::from(v))),
            proptest::strategy::Just(SeqExpr::N),
        ];
        leaf.prop_recursive(4, 32, 3, |e| {
            prop_oneof![
                (e.clone(), e.clone())
                    .prop_map(|(a, b)| SeqExpr::Add(Box::new(a), Box::new(b))),
                (e.clone(), e.clone())
                    .prop_map(|(a, b)| SeqExpr::Sub(Box::new(a), Box::new(b))),
                (e.clone(), e.clone())
                    .prop_map(|(a, b)| SeqExpr::Mul(Box::new(a), Box::new(b))),
                (e.clone(), 0u32..6).prop_map(|(a, k)| SeqExpr::PowLit(Box::new(a), k)),
                (e.clone(), e.clone())
                    .prop_map(|(a, b)| SeqExpr::Pow(Box::new(a), Box::new(b))),
                (e.clone(), e.clone())
                    .prop_map(|(a, b)| SeqExpr::Binom(Box::new(a), Box::new(b))),
                e.clone().prop_map(|a| SeqExpr::Fact(Box::new(a))),
                e.clone().prop_map(|a| SeqExpr::Neg(Box::new(a))),
                (e.clone(), e.clone(), e.clone()).prop_map(|(a, b, c)| SeqExpr::Sum {
                    lo: Box::new(a),
                    hi: Box::new(b),
                    body: Box::new(c),
                }),
            ]
        })
    }

    proptest::proptest! {
        #[test]
        fn pretty_parse_is_identity(ast in arb_expr()) {
            let text = ast.to_string();
            proptest::prop_assert_eq!(parse(&text).unwrap(), ast);
        }
    }

    #[test]
    fn modular_negative_power_falls_back() {
        // pow(7, -1) mod 7^2 cannot be inverted; the integer value 1/7 is not
        // an integer either, so the fallback also errors: both paths refuse
        let e = p("pow(7,-1)");
        assert!(eval_mod(&e, &BigInt::from(0), &BigInt::from(49)).is_err());
        // but an invertible negative power that yields an integer works:
        // pow(2,-n) * 4 at n = 1 is 2
        let e2 = p("pow(2,-n) * 4");
        assert_eq!(
            eval_mod(&e2, &BigInt::from(1), &BigInt::from(243)).unwrap(),
            BigInt::from(2)
        );
    }
}
