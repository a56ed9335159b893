//! Sparse multivariate polynomials over exact rational or float coefficients.
//!
//! The symbolic Dunkl Laplacian needs ring operations, linear changes of
//! variables (reflections), and exact division by the linear forms `⟨α,x⟩`.
//! Coefficients are `BigRational` whenever the model data is rational (the
//! common case: config files hold decimal literals, which convert exactly);
//! `f64` coefficients are the fallback for irrational root systems, with
//! division remainders checked against a relative tolerance instead of zero.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Coefficient ring abstraction: exact rationals or floats.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Displays the coefficient (used by polynomial formatting).
    fn fmt_coeff(&self) -> String;
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn fmt_coeff(&self) -> String {
        self.to_string()
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn fmt_coeff(&self) -> String {
        format!("{self}")
    }
}

/// Exponent vector of a monomial; length equals the ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }
}

/// Sparse multivariate polynomial with deterministic term order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<C: Coeff> {
    dim: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(Monomial(vec![0; dim]), c);
        }
        p
    }

    /// The coordinate polynomial `x_{i}` (0-based index).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut exps = vec![0u16; dim];
        exps[i] = 1;
        let mut p = Self::zero(dim);
        p.terms.insert(Monomial(exps), C::one());
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_add(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = old.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(m.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.dim);
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            let s = v.mul(c);
            if !s.is_zero() {
                out.terms.insert(m.clone(), s);
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut out = Self::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let exps: Vec<u16> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.insert_add(Monomial(exps), ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, e: u16) -> Self {
        let mut out = Self::constant(self.dim, C::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative ∂/∂x_i.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.dim);
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[i] = e - 1;
            out.insert_add(Monomial(exps), c.mul(&C::from_i64(e as i64)));
        }
        out
    }

    /// Classical Laplacian Σ ∂²/∂x_i².
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 0..self.dim {
            out = out.add(&self.partial(i).partial(i));
        }
        out
    }

    /// ⟨∇p, α⟩ = Σ α_i ∂_i p.
    pub fn grad_dot(&self, alpha: &[C]) -> Self {
        assert_eq!(alpha.len(), self.dim);
        let mut out = Self::zero(self.dim);
        for (i, a) in alpha.iter().enumerate() {
            if !a.is_zero() {
                out = out.add(&self.partial(i).scale(a));
            }
        }
        out
    }

    /// p(Mx) for the linear map with rows `rows` (row i gives the new
    /// expression of coordinate i).
    pub fn compose_linear(&self, rows: &[Vec<C>]) -> Self {
        assert_eq!(rows.len(), self.dim);
        let images: Vec<Self> = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), self.dim);
                let mut li = Self::zero(self.dim);
                for (j, c) in r.iter().enumerate() {
                    if !c.is_zero() {
                        li = li.add(&Self::var(self.dim, j).scale(c));
                    }
                }
                li
            })
            .collect();

        // Memoized powers of each coordinate image.
        let max_exp: Vec<u16> = (0..self.dim)
            .map(|i| self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<Self>> = (0..self.dim)
            .map(|i| {
                let mut v = vec![Self::constant(self.dim, C::one())];
                for e in 1..=max_exp[i] {
                    let next = v[(e - 1) as usize].mul(&images[i]);
                    v.push(next);
                }
                v
            })
            .collect();

        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mut t = Self::constant(self.dim, c.clone());
            for i in 0..self.dim {
                if m.0[i] > 0 {
                    t = t.mul(&powers[i][m.0[i] as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// p(σ_α x) where σ_α is the reflection in the hyperplane α⊥:
    /// σ_α x = x − 2(⟨x,α⟩/|α|²) α.
    pub fn reflect(&self, alpha: &[C]) -> Self {
        assert_eq!(alpha.len(), self.dim);
        let norm2 = alpha
            .iter()
            .fold(C::zero(), |acc, a| acc.add(&a.mul(a)));
        assert!(!norm2.is_zero(), "reflection through the zero vector");
        let two = C::from_i64(2);
        let rows: Vec<Vec<C>> = (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        let delta = if i == j { C::one() } else { C::zero() };
                        delta.sub(&two.mul(&alpha[i]).mul(&alpha[j]).div(&norm2))
                    })
                    .collect()
            })
            .collect();
        self.compose_linear(&rows)
    }

    /// Division by the linear form L = ⟨α, x⟩: returns (q, r) with
    /// `self = q·L + r` and r free of the pivot variable (the coordinate with
    /// the largest |α_i|). Divisibility holds exactly when r = 0.
    pub fn divide_linear(&self, alpha: &[C]) -> (Self, Self) {
        assert_eq!(alpha.len(), self.dim);
        let pivot = (0..self.dim)
            .max_by(|&i, &j| {
                alpha[i]
                    .to_f64()
                    .abs()
                    .total_cmp(&alpha[j].to_f64().abs())
            })
            .expect("nonzero dimension");
        assert!(
            !alpha[pivot].is_zero(),
            "division by the zero linear form"
        );

        let mut q = Self::zero(self.dim);
        let mut r = self.clone();
        loop {
            // Highest pivot-exponent term still present in r.
            let target = r
                .terms
                .iter()
                .filter(|(m, _)| m.0[pivot] > 0)
                .max_by_key(|(m, _)| m.0[pivot])
                .map(|(m, c)| (m.clone(), c.clone()));
            let Some((m, c)) = target else { break };

            let mut qexps = m.0.clone();
            qexps[pivot] -= 1;
            let qc = c.div(&alpha[pivot]);

            // r -= qt · L, which cancels the chosen term exactly.
            for (i, a) in alpha.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut exps = qexps.clone();
                exps[i] += 1;
                r.insert_add(Monomial(exps), qc.mul(a).neg());
            }
            q.insert_add(Monomial(qexps), qc);
        }
        (q, r)
    }

    /// Largest |coefficient| (0 for the zero polynomial).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Evaluates at a float point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= x[i].powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Drops terms whose coefficient magnitude is below `eps` times the
    /// largest coefficient magnitude. Used by the float pipeline only.
    pub fn prune(&self, eps: f64) -> Self {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return self.clone();
        }
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            if c.to_f64().abs() > eps * scale {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }
}

impl MultiPoly<BigRational> {
    /// Exact-to-float coefficient conversion.
    pub fn to_float(&self) -> MultiPoly<f64> {
        let mut out = MultiPoly::<f64>::zero(self.dim);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), Coeff::to_f64(c));
        }
        out
    }
}

impl<C: Coeff> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Descending total degree, then descending exponent order.
        let mut terms: Vec<(&Monomial, &C)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            b.0.total_degree()
                .cmp(&a.0.total_degree())
                .then(b.0.cmp(a.0))
        });
        for (idx, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = if neg { c.neg() } else { (*c).clone() };
            let is_const = m.total_degree() == 0;
            let coeff_is_one = mag == C::one();
            if is_const || !coeff_is_one {
                write!(f, "{}", mag.fmt_coeff())?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses "c1*x1^2*x2 - 3/4*x3 + 0.5" into an exact-rational polynomial.
///
/// Grammar: a signed sum of terms; each term is a '*'-separated product of
/// numeric literals (decimal or fraction, converted exactly) and powers
/// `xI^E` with 1-based variable index I ≤ dim. Errors carry byte offsets.
pub fn parse_poly(src: &str, dim: usize) -> Result<MultiPoly<BigRational>> {
    Parser {
        src: src.as_bytes(),
        pos: 0,
        dim,
    }
    .parse()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<MultiPoly<BigRational>> {
        self.skip_ws();
        if self.pos == self.src.len() {
            return self.err(0, "empty polynomial");
        }
        let mut acc = MultiPoly::zero(self.dim);
        let mut sign_neg = false;
        if let Some(c) = self.peek() {
            if c == b'-' {
                sign_neg = true;
                self.pos += 1;
            } else if c == b'+' {
                self.pos += 1;
            }
        }
        loop {
            let term = self.parse_term()?;
            acc = if sign_neg {
                acc.sub(&term)
            } else {
                acc.add(&term)
            };
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => {
                    sign_neg = false;
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign_neg = true;
                    self.pos += 1;
                }
                Some(c) => {
                    return self.err(
                        self.pos,
                        format!("expected '+', '-' or end of input, found {:?}", c as char),
                    )
                }
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<MultiPoly<BigRational>> {
        let mut acc = self.parse_factor()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                let f = self.parse_factor()?;
                acc = acc.mul(&f);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_factor(&mut self) -> Result<MultiPoly<BigRational>> {
        self.skip_ws();
        match self.peek() {
            Some(b'x') => {
                let idx = self.parse_var_index()?;
                let mut exp = 1u16;
                self.skip_ws();
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    exp = self.parse_exponent()?;
                }
                Ok(MultiPoly::var(self.dim, idx).pow(exp))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let num = self.parse_number()?;
                self.skip_ws();
                if self.peek() == Some(b'/') {
                    let slash = self.pos;
                    self.pos += 1;
                    self.skip_ws();
                    let den = self.parse_number()?;
                    if Coeff::is_zero(&den) {
                        return self.err(slash, "division by zero");
                    }
                    Ok(MultiPoly::constant(self.dim, &num / &den))
                } else {
                    Ok(MultiPoly::constant(self.dim, num))
                }
            }
            Some(c) => self.err(
                self.pos,
                format!("expected a number or variable, found {:?}", c as char),
            ),
            None => self.err(self.pos, "expected a number or variable, found end of input"),
        }
    }

    fn parse_var_index(&mut self) -> Result<usize> {
        let start = self.pos;
        self.pos += 1; // consume 'x'
        let digits_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return self.err(start, "variable must be xN with a numeric index");
        }
        let text = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
        let idx: usize = match text.parse() {
            Ok(v) => v,
            Err(_) => return self.err(digits_start, "variable index out of range"),
        };
        if idx == 0 || idx > self.dim {
            return self.err(
                start,
                format!("variable x{idx} exceeds dimension {}", self.dim),
            );
        }
        Ok(idx - 1)
    }

    fn parse_exponent(&mut self) -> Result<u16> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(start, "expected a nonnegative integer exponent after '^'");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<u16>() {
            Ok(e) if e <= 64 => Ok(e),
            Ok(_) => self.err(start, "exponent larger than 64"),
            Err(_) => self.err(start, "exponent out of range"),
        }
    }

    /// Decimal literal with optional fractional part and exponent, converted
    /// exactly to a rational.
    fn parse_number(&mut self) -> Result<BigRational> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let mut frac_digits = 0usize;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let fs = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            frac_digits = self.pos - fs;
        }
        let mantissa_end = self.pos;
        if mantissa_end == start || (frac_digits == 0 && self.src[start] == b'.') {
            return self.err(start, "malformed numeric literal");
        }
        let mantissa: String = std::str::from_utf8(&self.src[start..mantissa_end])
            .unwrap()
            .chars()
            .filter(|&c| c != '.')
            .collect();
        if mantissa.is_empty() {
            return self.err(start, "malformed numeric literal");
        }
        let mut exp10: i64 = -(frac_digits as i64);
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            let mut esign = 1i64;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                if self.peek() == Some(b'-') {
                    esign = -1;
                }
                self.pos += 1;
            }
            let es = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == es {
                return self.err(es, "malformed exponent in numeric literal");
            }
            let text = std::str::from_utf8(&self.src[es..self.pos]).unwrap();
            let e: i64 = match text.parse() {
                Ok(v) => v,
                Err(_) => return self.err(es, "exponent out of range"),
            };
            exp10 += esign * e;
        }
        let digits: BigInt = mantissa.parse().unwrap();
        let ten = BigInt::from(10);
        let value = if exp10 >= 0 {
            BigRational::from_integer(digits * ten.pow(exp10 as u32))
        } else {
            BigRational::new(digits, ten.pow((-exp10) as u32))
        };
        Ok(value)
    }
}

/// Parses a standalone numeric literal (decimal or `p/q`) exactly.
pub fn parse_rational(src: &str) -> Result<BigRational> {
    let mut p = Parser {
        src: src.trim().as_bytes(),
        pos: 0,
        dim: 0,
    };
    let mut neg = false;
    p.skip_ws();
    if matches!(p.peek(), Some(b'+') | Some(b'-')) {
        neg = p.peek() == Some(b'-');
        p.pos += 1;
    }
    let num = p.parse_number()?;
    p.skip_ws();
    let value = if p.peek() == Some(b'/') {
        p.pos += 1;
        p.skip_ws();
        let den = p.parse_number()?;
        if Coeff::is_zero(&den) {
            return Err(Error::Parse {
                offset: 0,
                message: "division by zero".into(),
            });
        }
        &num / &den
    } else {
        num
    };
    if p.pos != p.src.len() {
        return Err(Error::Parse {
            offset: p.pos,
            message: "trailing characters after numeric literal".into(),
        });
    }
    Ok(if neg { -value } else { value })
}
