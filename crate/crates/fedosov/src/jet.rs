//! Truncated multivariate power series ("jets") with exact rational
//! coefficients — the coefficient ring for the whole crate.
//!
//! A `Jet` represents a function near the basepoint through its Taylor
//! coefficients up to a declared truncation `order`. Only nonzero
//! coefficients are stored, keyed by exponent vectors in graded-lex order so
//! iteration, rendering and serialization are deterministic.
//!
//! Invariants:
//! - no stored zero coefficients
//! - every stored exponent vector has total degree `<= eff_order <= order`
//! - two jets are equal iff they have the same shape and the same term map
//!
//! # Effective order
//!
//! Differentiation of a degree-`J` truncation is only trustworthy to degree
//! `J - 1`. Each jet therefore carries an `eff_order` alongside its declared
//! `order`: coefficients above `eff_order` are unknown and never stored.
//! Fresh jets start with `eff_order == order`; `diff` lowers it by one and
//! arithmetic takes the minimum of its inputs. Comparisons of quantities
//! computed along routes of different derivative depth should use
//! [`Jet::agrees_with`], which compares the commonly-trusted truncations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational number, always reduced, denominator > 0.
pub type Rational = BigRational;

/// `n/d` as a [`Rational`].
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `n` as a [`Rational`].
pub fn integer(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Exponent vector of a monomial in the base coordinates.
///
/// Ordered graded-lexicographically: lower total degree first, and within a
/// degree `x1`-major (so `x1^2 < x1*x2 < x2^2`).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Exponents(Vec<u32>);

impl Exponents {
    pub fn new(exponents: Vec<u32>) -> Self {
        Exponents(exponents)
    }

    pub fn zeros(num_vars: usize) -> Self {
        Exponents(vec![0; num_vars])
    }

    pub fn unit(num_vars: usize, index: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[index] = 1;
        Exponents(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> u32 {
        self.0[index]
    }

    /// Copy with `exponent[index] += 1`.
    pub fn raised(&self, index: usize) -> Self {
        let mut e = self.0.clone();
        e[index] += 1;
        Exponents(e)
    }

    /// Copy with `exponent[index] -= 1`. Caller ensures positivity.
    pub fn lowered(&self, index: usize) -> Self {
        let mut e = self.0.clone();
        e[index] -= 1;
        Exponents(e)
    }

    pub fn combined(&self, other: &Self) -> Self {
        Exponents(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            // x1-major within a degree
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for Exponents {
    fn from(v: Vec<u32>) -> Self {
        Exponents(v)
    }
}

/// Truncated power series in `num_vars` coordinates around the basepoint.
#[derive(Clone, Debug)]
pub struct Jet {
    num_vars: usize,
    order: u32,
    eff_order: u32,
    terms: BTreeMap<Exponents, Rational>,
}

impl Jet {
    pub fn zero(num_vars: usize, order: u32) -> Self {
        Jet {
            num_vars,
            order,
            eff_order: order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, order: u32, value: Rational) -> Self {
        let mut jet = Jet::zero(num_vars, order);
        if !value.is_zero() {
            jet.terms.insert(Exponents::zeros(num_vars), value);
        }
        jet
    }

    pub fn one(num_vars: usize, order: u32) -> Self {
        Jet::constant(num_vars, order, Rational::one())
    }

    /// The coordinate function `x_{index}` (0-based index).
    pub fn coordinate(num_vars: usize, order: u32, index: usize) -> Result<Self> {
        if index >= num_vars {
            return Err(Error::IndexOutOfRange {
                index,
                dim: num_vars,
            });
        }
        let mut jet = Jet::zero(num_vars, order);
        if order >= 1 {
            jet.terms
                .insert(Exponents::unit(num_vars, index), Rational::one());
        }
        jet.check_invariants();
        Ok(jet)
    }

    /// Build from `(exponents, coefficient)` pairs; degrees above `order`
    /// are truncated away, repeated keys accumulate.
    pub fn from_terms<I>(num_vars: usize, order: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut jet = Jet::zero(num_vars, order);
        for (expo, coeff) in terms {
            if expo.len() != num_vars {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector of length {} in a {}-variable jet",
                    expo.len(),
                    num_vars
                )));
            }
            let key = Exponents::new(expo);
            if key.total_degree() > order {
                continue;
            }
            let entry = jet.terms.entry(key).or_insert_with(Rational::zero);
            *entry += coeff;
        }
        jet.terms.retain(|_, c| !c.is_zero());
        Ok(jet)
    }

    /// Monomial `coeff * x^expo`.
    pub fn monomial(num_vars: usize, order: u32, expo: Vec<u32>, coeff: Rational) -> Result<Self> {
        Jet::from_terms(num_vars, order, [(expo, coeff)])
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eff_order(&self) -> u32 {
        self.eff_order
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Rational> {
        &self.terms
    }

    /// True when no coefficients are stored. A jet with `eff_order < order`
    /// may still be an unknown tail rather than the true zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero content at full trust.
    pub fn is_true_zero(&self) -> bool {
        self.terms.is_empty() && self.eff_order == self.order
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.total_degree() == 0)
    }

    pub fn coefficient(&self, expo: &[u32]) -> Rational {
        self.terms
            .get(&Exponents::new(expo.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.num_vars])
    }

    fn check_invariants(&self) {
        debug_assert!(self.eff_order <= self.order);
        debug_assert!(self
            .terms
            .iter()
            .all(|(e, c)| e.total_degree() <= self.eff_order && !c.is_zero()));
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.num_vars != other.num_vars || self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "jet with {} vars at order {} combined with {} vars at order {}",
                self.num_vars, self.order, other.num_vars, other.order
            )));
        }
        Ok(())
    }

    /// Lower the effective order, dropping now-untrusted terms.
    pub fn with_eff_order(mut self, eff: u32) -> Self {
        let eff = eff.min(self.order);
        if eff < self.eff_order {
            self.eff_order = eff;
            self.terms.retain(|e, _| e.total_degree() <= eff);
        }
        self
    }

    /// Truncation to total degree `<= degree`; also caps the effective order.
    pub fn truncated_to(&self, degree: u32) -> Self {
        self.clone().with_eff_order(degree)
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let eff = self.eff_order.min(other.eff_order);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += c;
        }
        terms.retain(|e, c| e.total_degree() <= eff && !c.is_zero());
        let jet = Jet {
            num_vars: self.num_vars,
            order: self.order,
            eff_order: eff,
            terms,
        };
        jet.check_invariants();
        Ok(jet)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        Jet {
            num_vars: self.num_vars,
            order: self.order,
            eff_order: self.eff_order,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> Jet {
        if factor.is_zero() {
            let mut z = Jet::zero(self.num_vars, self.order);
            z.eff_order = self.eff_order;
            return z;
        }
        Jet {
            num_vars: self.num_vars,
            order: self.order,
            eff_order: self.eff_order,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * factor))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let eff = self.eff_order.min(other.eff_order);
        let mut terms: BTreeMap<Exponents, Rational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            let da = ea.total_degree();
            if da > eff {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + eb.total_degree() > eff {
                    continue;
                }
                let key = ea.combined(eb);
                let entry = terms.entry(key).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        let jet = Jet {
            num_vars: self.num_vars,
            order: self.order,
            eff_order: eff,
            terms,
        };
        jet.check_invariants();
        Ok(jet)
    }

    pub fn pow(&self, exponent: u32) -> Result<Jet> {
        let mut acc = Jet::one(self.num_vars, self.order);
        for _ in 0..exponent {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative along coordinate `index` (0-based).
    ///
    /// The top retained degree of the input is no longer trustworthy in the
    /// output, so the effective order drops by one.
    pub fn diff(&self, index: usize) -> Result<Jet> {
        if index >= self.num_vars {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.num_vars,
            });
        }
        let eff = self.eff_order.saturating_sub(1);
        let mut terms: BTreeMap<Exponents, Rational> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e.get(index);
            if k == 0 {
                continue;
            }
            let key = e.lowered(index);
            if key.total_degree() > eff {
                continue;
            }
            terms.insert(key, c * Rational::from(BigInt::from(k)));
        }
        let jet = Jet {
            num_vars: self.num_vars,
            order: self.order,
            eff_order: eff,
            terms,
        };
        jet.check_invariants();
        Ok(jet)
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn invert(&self) -> Result<Jet> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NonUnit);
        }
        let c0_inv = Rational::one() / c0.clone();
        // a = c0 (1 - u) with val(u) >= 1; 1/a = (1/c0) (1 + u + u^2 + ...)
        let u = Jet::constant(self.num_vars, self.order, c0.clone())
            .sub(self)?
            .scale(&c0_inv);
        let one = Jet::one(self.num_vars, self.order);
        let mut acc = one.clone();
        for _ in 0..self.eff_order {
            acc = one.add(&u.mul(&acc)?)?;
        }
        let mut result = acc.scale(&c0_inv);
        result.eff_order = self.eff_order;
        result
            .terms
            .retain(|e, _| e.total_degree() <= self.eff_order);
        result.check_invariants();
        Ok(result)
    }

    /// Equality of the commonly-trusted truncations.
    pub fn agrees_with(&self, other: &Jet) -> bool {
        if self.num_vars != other.num_vars || self.order != other.order {
            return false;
        }
        let d = self.eff_order.min(other.eff_order);
        self.truncated_to(d).terms == other.truncated_to(d).terms
    }
}

/// Equality compares shape and stored terms; the effective order is
/// bookkeeping, not content.
impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.order == other.order && self.terms == other.terms
    }
}

impl Eq for Jet {}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = crate::render::default_names(self.num_vars);
        write!(f, "{}", crate::render::jet_polynomial(self, &names))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$method(self, rhs).expect("jet shape mismatch")
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(self)
    }
}

/// Identity matrix over the jet ring.
pub fn matrix_identity(num_vars: usize, order: u32, n: usize) -> Vec<Vec<Jet>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Jet::one(num_vars, order)
                    } else {
                        Jet::zero(num_vars, order)
                    }
                })
                .collect()
        })
        .collect()
}

/// Matrix product over the jet ring.
pub fn matrix_mul(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Jet::zero(a[i][0].num_vars(), a[i][0].order());
            for (k, aik) in a[i].iter().enumerate() {
                acc = acc.add(&aik.mul(&b[k][j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

/// Inverse of a square jet matrix whose constant-term matrix is invertible.
///
/// Gauss-Jordan elimination; pivots must be units in the jet ring, which is
/// exactly invertibility of the constant-term matrix. The result is verified
/// by multiplying back.
pub fn matrix_inverse(a: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch("non-square matrix".into()));
    }
    let num_vars = a[0][0].num_vars();
    let order = a[0][0].order();
    let mut work: Vec<Vec<Jet>> = a.to_vec();
    let mut inv = matrix_identity(num_vars, order, n);

    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !work[r][col].constant_term().is_zero())
            .ok_or(Error::DegenerateForm)?;
        work.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot_inv = work[col][col].invert()?;
        for j in 0..n {
            work[col][j] = work[col][j].mul(&pivot_inv)?;
            inv[col][j] = inv[col][j].mul(&pivot_inv)?;
        }
        for r in 0..n {
            if r == col || work[r][col].is_zero() {
                continue;
            }
            let factor = work[r][col].clone();
            for j in 0..n {
                work[r][j] = work[r][j].sub(&factor.mul(&work[col][j])?)?;
                inv[r][j] = inv[r][j].sub(&factor.mul(&inv[col][j])?)?;
            }
        }
    }

    let check = matrix_mul(a, &inv)?;
    for (i, row) in check.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let expected = if i == j {
                Jet::one(num_vars, order)
            } else {
                Jet::zero(num_vars, order)
            };
            if !entry.agrees_with(&expected) {
                return Err(Error::Internal(format!(
                    "matrix inverse verification failed at entry ({i},{j})"
                )));
            }
        }
    }
    Ok(inv)
}

/// Render a rational in `p/q` form.
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse a `p/q` or integer literal.
pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().ok()?;
        let den: BigInt = q.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Rational::new(num, den))
    } else {
        let num: BigInt = s.trim().parse().ok()?;
        Some(Rational::from(num))
    }
}

/// `i^power` reduced mod 4 into `(sign, residual i-power in {0,1})`.
pub(crate) fn normalize_i_power(power: u32) -> (i8, u8) {
    match power % 4 {
        0 => (1, 0),
        1 => (1, 1),
        2 => (-1, 0),
        3 => (-1, 1),
        _ => unreachable!(),
    }
}
