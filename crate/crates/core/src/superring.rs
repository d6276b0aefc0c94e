//! Exact arithmetic in `K[x_0..x_n, θ_1..θ_m]` with Laurent exponents in the
//! even variables.
//!
//! Odd monomials are kept in the normal form `θ_{j1}…θ_{jk}` with
//! `j1 < … < jk`; every product is brought back to that form with the Koszul
//! sign of the sorting permutation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Coefficient field.
pub type Q = BigRational;

/// Largest odd dimension supported by the bitmask representation.
pub const MAX_ODD: usize = 32;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Signature `(n, m)` of the projective superspace `P^{n|m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuperSpaceSig {
    pub n: usize,
    pub m: usize,
}

impl SuperSpaceSig {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m > MAX_ODD {
            return Err(Error::Invalid(format!(
                "odd dimension {m} exceeds the supported maximum {MAX_ODD}"
            )));
        }
        Ok(Self { n, m })
    }

    /// Number of even coordinates `x_0..x_n`.
    pub fn nvars(&self) -> usize {
        self.n + 1
    }

    /// The bosonic reduction `P^{n|0}`.
    pub fn reduced(&self) -> Self {
        Self { n: self.n, m: 0 }
    }
}

impl fmt::Display for SuperSpaceSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P^{{{}|{}}}", self.n, self.m)
    }
}

/// A normal-form monomial `x^e θ_J`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    xexp: SmallVec<[i32; 4]>,
    odd: u32,
}

impl Monomial {
    /// `odd` must be strictly increasing and 1-based.
    pub fn new(xexp: &[i32], odd: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        let mut last = 0usize;
        for &j in odd {
            if j == 0 || j > MAX_ODD {
                return Err(Error::Invalid(format!("odd index {j} out of range")));
            }
            if j <= last {
                return Err(Error::Invalid(format!(
                    "odd indices must be strictly increasing, got {odd:?}"
                )));
            }
            last = j;
            mask |= 1 << (j - 1);
        }
        Ok(Self {
            xexp: SmallVec::from_slice(xexp),
            odd: mask,
        })
    }

    pub fn from_parts(xexp: &[i32], odd_mask: u32) -> Self {
        Self {
            xexp: SmallVec::from_slice(xexp),
            odd: odd_mask,
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self {
            xexp: SmallVec::from_elem(0, nvars),
            odd: 0,
        }
    }

    pub fn x(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.xexp[i] = 1;
        m
    }

    /// `θ_j`, 1-based.
    pub fn theta(nvars: usize, j: usize) -> Self {
        let mut m = Self::one(nvars);
        m.odd = 1 << (j - 1);
        m
    }

    pub fn xexp(&self) -> &[i32] {
        &self.xexp
    }

    pub fn odd_mask(&self) -> u32 {
        self.odd
    }

    /// Odd indices, 1-based and increasing.
    pub fn odd_indices(&self) -> Vec<usize> {
        (0..MAX_ODD)
            .filter(|b| self.odd & (1 << b) != 0)
            .map(|b| b + 1)
            .collect()
    }

    pub fn odd_count(&self) -> usize {
        self.odd.count_ones() as usize
    }

    pub fn nvars(&self) -> usize {
        self.xexp.len()
    }

    pub fn degree(&self) -> i64 {
        self.xexp.iter().map(|&e| e as i64).sum::<i64>() + self.odd_count() as i64
    }

    pub fn parity(&self) -> u8 {
        (self.odd_count() % 2) as u8
    }

    pub fn is_bosonic(&self) -> bool {
        self.odd == 0
    }

    /// Product in normal form, or `None` when a θ repeats. The flag is `true`
    /// when the reordering contributes a minus sign.
    pub fn mul(&self, other: &Monomial) -> Option<(bool, Monomial)> {
        if self.odd & other.odd != 0 {
            return None;
        }
        debug_assert_eq!(self.xexp.len(), other.xexp.len());
        let mut swaps = 0u32;
        let mut rest = other.odd;
        while rest != 0 {
            let b = rest.trailing_zeros();
            rest &= rest - 1;
            // number of indices of `self` greater than b that θ_b must pass
            let above = if b == 31 { 0 } else { self.odd >> (b + 1) };
            swaps += above.count_ones();
        }
        let xexp = self
            .xexp
            .iter()
            .zip(other.xexp.iter())
            .map(|(a, b)| a + b)
            .collect();
        Some((
            swaps % 2 == 1,
            Monomial {
                xexp,
                odd: self.odd | other.odd,
            },
        ))
    }

    /// Largest pole order among the even variables.
    pub fn pole_order(&self) -> i32 {
        self.xexp.iter().map(|&e| (-e).max(0)).max().unwrap_or(0)
    }
}

fn cmp_odd(a: u32, b: u32) -> Ordering {
    // lexicographic comparison of the increasing index lists
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (a.trailing_zeros(), b.trailing_zeros());
        if ta != tb {
            return ta.cmp(&tb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.xexp
            .cmp(&other.xexp)
            .then_with(|| cmp_odd(self.odd, other.odd))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse super polynomial: normal-form monomials with nonzero rational
/// coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SuperPoly {
    terms: BTreeMap<Monomial, Q>,
}

impl SuperPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::term(c, Monomial::one(nvars))
    }

    pub fn term(c: Q, mono: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mono, c);
        }
        Self { terms }
    }

    pub fn monomial(mono: Monomial) -> Self {
        Self::term(Q::one(), mono)
    }

    pub fn x(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::x(nvars, i))
    }

    pub fn theta(nvars: usize, j: usize) -> Self {
        Self::monomial(Monomial::theta(nvars, j))
    }

    /// Laurent monomial `c · x^e` without odd part.
    pub fn laurent(c: Q, xexp: &[i32]) -> Self {
        Self::term(c, Monomial::from_parts(xexp, 0))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, mono: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| c.is_one() && m.is_bosonic() && m.xexp.iter().all(|&e| e == 0))
                .unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Q {
        self.terms.get(mono).cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    /// Multiply by a single monomial.
    pub fn mul_monomial(&self, mono: &Monomial, c: &Q) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            if let Some((neg, prod)) = m.mul(mono) {
                let mut coeff = v * c;
                if neg {
                    coeff = -coeff;
                }
                out.add_term(prod, coeff);
            }
        }
        out
    }

    /// `mono · self`, the monomial on the left.
    pub fn lmul_monomial(&self, mono: &Monomial, c: &Q) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            if let Some((neg, prod)) = mono.mul(m) {
                let mut coeff = c * v;
                if neg {
                    coeff = -coeff;
                }
                out.add_term(prod, coeff);
            }
        }
        out
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &SuperPoly) -> SuperPoly {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((neg, prod)) = a.mul(b) {
                    let mut c = ca * cb;
                    if neg {
                        c = -c;
                    }
                    out.add_term(prod, c);
                }
            }
        }
        out
    }

    /// Quotient by the ideal generated by the odd variables.
    pub fn bosonic_reduce(&self) -> SuperPoly {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.is_bosonic())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The part lying in the odd ideal `J`.
    pub fn nilpotent_part(&self) -> SuperPoly {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.is_bosonic())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Negative exponents only ever occur on even variables; odd variables
    /// cannot be inverted and the type has no way to express `θ^{-1}`.
    pub fn localize_check(&self) -> bool {
        self.terms.keys().all(|m| m.odd_count() <= MAX_ODD)
    }

    /// `Some((degree, parity))` when all terms share both gradings. The zero
    /// polynomial is homogeneous of every degree and reports `None`.
    pub fn homogeneity(&self) -> Option<(i64, u8)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let (d, p) = (first.degree(), first.parity());
        if it.all(|m| m.degree() == d && m.parity() == p) {
            Some((d, p))
        } else {
            None
        }
    }

    pub fn is_homogeneous_of(&self, degree: i64, parity: u8) -> bool {
        self.terms
            .keys()
            .all(|m| m.degree() == degree && m.parity() == parity)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.xexp.iter().all(|&e| e >= 0))
    }

    /// Largest pole order in even variable `var` (0 if none).
    pub fn pole_in(&self, var: usize) -> i32 {
        self.terms
            .keys()
            .map(|m| (-m.xexp[var]).max(0))
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_exponent(&self) -> i32 {
        self.terms
            .keys()
            .flat_map(|m| m.xexp.iter().map(|e| e.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// The unique term when the polynomial is a single monomial.
    pub fn as_single_term(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn nvars(&self) -> Option<usize> {
        self.terms.keys().next().map(|m| m.nvars())
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(m, c)| TermJson {
                c: c.to_string(),
                x: m.xexp.to_vec(),
                theta: m.odd_indices(),
            })
            .collect()
    }

    pub fn from_json(terms: &[TermJson], nvars: usize) -> Result<Self> {
        let mut p = Self::zero();
        for t in terms {
            if t.x.len() != nvars {
                return Err(Error::Invalid(format!(
                    "term has {} exponents, expected {nvars}",
                    t.x.len()
                )));
            }
            let c = parse_rational(&t.c)?;
            p.add_term(Monomial::new(&t.x, &t.theta)?, c);
        }
        Ok(p)
    }
}

pub fn parse_rational(s: &str) -> Result<Q> {
    let bad = || Error::Invalid(format!("bad rational coefficient {s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(num, den))
}

/// One term in the JSON form `{"c": "p/q", "x": [...], "theta": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub c: String,
    pub x: Vec<i32>,
    pub theta: Vec<usize>,
}

impl<'a> Add for &'a SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &'a SuperPoly) -> SuperPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub for &'a SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &'a SuperPoly) -> SuperPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul for &'a SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &'a SuperPoly) -> SuperPoly {
        SuperPoly::mul(self, rhs)
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            for (i, &e) in m.xexp.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{i}")),
                    _ => factors.push(format!("x{i}^{e}")),
                }
            }
            for j in m.odd_indices() {
                factors.push(format!("t{j}"));
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if k > 0 {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            } else if neg {
                write!(f, "-")?;
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NV: usize = 2;

    fn th(j: usize) -> SuperPoly {
        SuperPoly::theta(NV, j)
    }

    fn x(i: usize) -> SuperPoly {
        SuperPoly::x(NV, i)
    }

    #[test]
    fn odd_generators_anticommute() {
        let p = th(2).mul(&th(1));
        let expect = -&th(1).mul(&th(2));
        assert_eq!(p, expect);
        let (m, c) = p.as_single_term().unwrap();
        assert_eq!(m.odd_indices(), vec![1, 2]);
        assert_eq!(*c, q(-1));
    }

    #[test]
    fn odd_square_is_zero() {
        assert!(th(1).mul(&th(1)).is_zero());
    }

    #[test]
    fn conjugate_product_drops_nilpotent_square() {
        let t12 = th(1).mul(&th(2));
        let x0 = x(0);
        let a = &x0 + &t12;
        let b = &x0 - &t12;
        assert_eq!(a.mul(&b), x0.mul(&x0));
    }

    #[test]
    fn reduce_drops_odd_terms() {
        let x0 = x(0);
        let p = &x0.mul(&x0) + &x(1).mul(&th(1));
        assert_eq!(p.bosonic_reduce(), x0.mul(&x0));
        assert!(th(1).mul(&th(2)).bosonic_reduce().is_zero());
    }

    #[test]
    fn localization_membership() {
        let p = SuperPoly::term(q(1), Monomial::new(&[-1, 0], &[1]).unwrap());
        assert!(p.localize_check());
        let p = SuperPoly::laurent(q(1), &[1, -2]);
        assert!(p.localize_check());
        assert_eq!(p.pole_in(1), 2);
    }

    #[test]
    fn rejects_unsorted_odd_list() {
        assert!(Monomial::new(&[0, 0], &[2, 1]).is_err());
        assert!(Monomial::new(&[0, 0], &[1, 1]).is_err());
        assert!(Monomial::new(&[0, 0], &[0]).is_err());
    }

    #[test]
    fn monomial_order_is_x_then_odd() {
        let a = Monomial::new(&[0, 1], &[2]).unwrap();
        let b = Monomial::new(&[0, 1], &[1, 3]).unwrap();
        let c = Monomial::new(&[1, 0], &[]).unwrap();
        assert!(b < a);
        assert!(a < c);
    }

    #[test]
    fn degree_and_parity() {
        let m = Monomial::new(&[2, -1], &[1, 3]).unwrap();
        assert_eq!(m.degree(), 3);
        assert_eq!(m.parity(), 0);
    }

    #[test]
    fn json_round_trip() {
        let p = &SuperPoly::term(q_frac(3, 2), Monomial::new(&[1, -1], &[1]).unwrap())
            + &SuperPoly::laurent(q(-2), &[0, 0]);
        let js = serde_json::to_string(&p.to_json()).unwrap();
        let back: Vec<TermJson> = serde_json::from_str(&js).unwrap();
        assert_eq!(SuperPoly::from_json(&back, 2).unwrap(), p);
        assert!(js.contains("\"3/2\""));
    }
}
