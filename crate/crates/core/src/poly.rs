//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are numbered from 1 (`x1, x2, ...`). Terms are kept in a
//! `BTreeMap` keyed by [`Monomial`], whose ordering is graded lexicographic
//! with `x1 < x2 < ... < xn`; iteration order is therefore the printing order
//! (constants first, then by increasing degree, "earlier" variables first).
//! No stored coefficient is ever zero.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Total degree with a distinct value for the zero polynomial.
///
/// `NegInfinity` sorts below every finite degree, so it is absorbed by `max`
/// and satisfies every upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    pub fn at_most(self, bound: u32) -> bool {
        match self {
            Degree::NegInfinity => true,
            Degree::Finite(d) => d <= bound,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Exponent vector; position `i` holds the exponent of `x(i+1)`.
///
/// Stored with trailing zeros trimmed, so two monomials compare equal exactly
/// when their exponent sequences agree after padding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial { exps }
    }

    /// `x_index`, 1-based.
    pub fn var(index: usize) -> Self {
        assert!(index >= 1, "variables are numbered from 1");
        let mut exps = vec![0; index];
        exps[index - 1] = 1;
        Monomial { exps }
    }

    /// Exponent of `x_index` (1-based); zero past the stored length.
    pub fn exponent(&self, index: usize) -> u32 {
        if index == 0 {
            return 0;
        }
        self.exps.get(index - 1).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// Largest variable index that occurs, 0 for the constant monomial.
    pub fn max_variable(&self) -> usize {
        self.exps.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (long, short) = if self.exps.len() >= other.exps.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut exps = long.exps.clone();
        for (e, s) in exps.iter_mut().zip(&short.exps) {
            *e += s;
        }
        Monomial { exps }
    }

    /// All monomials in `x1..x_nvars` of total degree at most `max_degree`,
    /// in ascending term order.
    pub fn all_up_to_degree(nvars: usize, max_degree: u32) -> Vec<Monomial> {
        fn rec(pos: usize, nvars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if pos == nvars {
                out.push(Monomial::new(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[pos] = e;
                rec(pos + 1, nvars, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        let mut out = Vec::new();
        let mut cur = vec![0; nvars];
        rec(0, nvars, max_degree, &mut cur, &mut out);
        out.sort();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let len = self.exps.len().max(other.exps.len());
            for i in (1..=len).rev() {
                match self.exponent(i).cmp(&other.exponent(i)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e >= 2 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Exact sparse polynomial in `x1..x_nvars`.
///
/// `nvars` is the ambient arity. Binary operations promote to the larger
/// arity; equality ignores it and compares terms only.
#[derive(Debug, Clone, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
    nvars: usize,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            terms: BTreeMap::new(),
            nvars,
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(Rational::one(), nvars)
    }

    pub fn constant(c: Rational, nvars: usize) -> Self {
        Self::term(c, Monomial::one(), nvars)
    }

    /// `x_index` in an ambient arity of at least `index`.
    pub fn var(index: usize, nvars: usize) -> Self {
        Self::term(Rational::one(), Monomial::var(index), nvars.max(index))
    }

    pub fn term(c: Rational, m: Monomial, nvars: usize) -> Self {
        let nvars = nvars.max(m.max_variable());
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms, nvars }
    }

    /// Builds a polynomial from possibly repeated, possibly zero terms.
    pub fn from_terms<I>(terms: I, nvars: usize) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Polynomial::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        self.nvars = self.nvars.max(m.max_variable());
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Same polynomial in ambient arity `max(nvars, self.nvars())`.
    pub fn promoted(mut self, nvars: usize) -> Self {
        self.nvars = self.nvars.max(nvars);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending term order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn total_degree(&self) -> Degree {
        // the last key has the largest degree under the graded order
        match self.terms.keys().next_back() {
            None => Degree::NegInfinity,
            Some(m) => Degree::Finite(m.degree()),
        }
    }

    /// Largest `i` such that `x_i` occurs, or 0 for constants.
    pub fn max_variable(&self) -> usize {
        self.terms
            .keys()
            .map(Monomial::max_variable)
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
            nvars: self.nvars,
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replaces `x_i` by `images[i-1]` and expands.
    ///
    /// `images` must cover the ambient arity of `self`.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial> {
        if images.len() < self.nvars {
            return Err(Error::SubstitutionArity {
                needed: self.nvars,
                got: images.len(),
            });
        }
        let out_vars = images.iter().map(Polynomial::nvars).max().unwrap_or(0);

        let mut max_exp = vec![0u32; self.max_variable()];
        for m in self.terms.keys() {
            for (slot, &e) in max_exp.iter_mut().zip(m.exponents()) {
                *slot = (*slot).max(e);
            }
        }
        // powers[i][e] = images[i]^e
        let powers: Vec<Vec<Polynomial>> = max_exp
            .iter()
            .enumerate()
            .map(|(i, &top)| {
                let mut row = Vec::with_capacity(top as usize + 1);
                row.push(Polynomial::one(out_vars));
                for e in 1..=top as usize {
                    let next = &row[e - 1] * &images[i];
                    row.push(next);
                }
                row
            })
            .collect();

        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(c.clone(), out_vars);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    prod = &prod * &powers[i][e as usize];
                }
            }
            for (pm, pc) in prod.terms {
                *acc.entry(pm).or_insert_with(Rational::zero) += pc;
            }
        }
        Ok(Polynomial::from_accumulator(acc, out_vars))
    }

    /// Formal partial derivative with respect to `x_index` (1-based).
    pub fn partial(&self, index: usize) -> Result<Polynomial> {
        if index == 0 || index > self.nvars {
            return Err(Error::VariableOutOfRange {
                index,
                n: self.nvars,
            });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponent(index);
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[index - 1] -= 1;
            out.add_term(Monomial::new(exps), c * integer(e as i64));
        }
        Ok(out)
    }

    fn from_accumulator(acc: HashMap<Monomial, Rational>, nvars: usize) -> Polynomial {
        let terms: BTreeMap<_, _> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let nvars = terms
            .keys()
            .map(Monomial::max_variable)
            .max()
            .unwrap_or(0)
            .max(nvars);
        Polynomial { terms, nvars }
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone().promoted(rhs.nvars);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone().promoted(rhs.nvars);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let nvars = self.nvars.max(rhs.nvars);
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero(nvars);
        }
        let mut acc: HashMap<Monomial, Rational> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Polynomial::from_accumulator(acc, nvars)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            nvars: self.nvars,
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

pub(crate) fn fmt_rational(c: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Canonical text: ascending term order, explicit `*`, `^` only for
/// exponents of at least 2, coefficients as reduced fractions.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (k == 0, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                fmt_rational(&mag, f)?;
            } else {
                if !mag.is_one() {
                    fmt_rational(&mag, f)?;
                    f.write_str("*")?;
                }
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}
