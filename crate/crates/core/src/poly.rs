//! Exact integer arithmetic: dense univariate polynomials in `s` and sparse
//! multivariate polynomials in the branch indeterminates `z_i`, truncated at
//! total degree two.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision signed integer used for every coefficient.
pub type BigScalar = BigInt;

/// Dense polynomial in `s` with coefficients in ascending powers.
///
/// The coefficient vector never carries trailing zeros, so the zero
/// polynomial is the empty vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<BigScalar>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigScalar::one())
    }

    pub fn constant(c: BigScalar) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `s - root`
    pub fn linear_factor(root: &BigScalar) -> Self {
        UniPoly {
            coeffs: vec![-root.clone(), BigScalar::one()],
        }
    }

    /// `c * s^power`
    pub fn monomial(c: BigScalar, power: usize) -> Self {
        let mut coeffs = vec![BigScalar::zero(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigScalar>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigScalar::from(c)).collect())
    }

    /// Ascending coefficients; empty for the zero polynomial.
    pub fn coeffs(&self) -> &[BigScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> BigScalar {
        self.coeffs.get(power).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&BigScalar> {
        self.coeffs.last()
    }

    pub fn eval(&self, s: &BigScalar) -> BigScalar {
        self.coeffs
            .iter()
            .rev()
            .fold(BigScalar::zero(), |acc, c| acc * s + c)
    }

    pub fn scale(&self, k: &BigScalar) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Multiplies in place by `s - root`.
    pub fn mul_linear_factor(&mut self, root: &BigScalar) {
        if self.is_zero() {
            return;
        }
        self.coeffs.push(BigScalar::zero());
        for i in (0..self.coeffs.len()).rev() {
            let shifted = if i > 0 {
                self.coeffs[i - 1].clone()
            } else {
                BigScalar::zero()
            };
            let scaled = &self.coeffs[i] * root;
            self.coeffs[i] = shifted - scaled;
        }
    }

    pub fn max_abs_coeff(&self) -> BigScalar {
        self.coeffs
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_default()
    }

    fn add_impl(&self, other: &Self, sign: i8) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.coeffs.get(i);
            let b = other.coeffs.get(i);
            let c = match (a, b) {
                (Some(a), Some(b)) if sign > 0 => a + b,
                (Some(a), Some(b)) => a - b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) if sign > 0 => b.clone(),
                (None, Some(b)) => -b,
                (None, None) => unreachable!(),
            };
            coeffs.push(c);
        }
        Self::from_coeffs(coeffs)
    }
}

impl<'a> Add<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &'a UniPoly) -> UniPoly {
        self.add_impl(rhs, 1)
    }
}

impl<'a> Sub<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &'a UniPoly) -> UniPoly {
        self.add_impl(rhs, -1)
    }
}

impl<'a> Mul<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &'a UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![BigScalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(coeffs)
    }
}

impl Add for UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: UniPoly) -> UniPoly {
        &self + &rhs
    }
}

impl Sub for UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: UniPoly) -> UniPoly {
        &self - &rhs
    }
}

impl Mul for UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: UniPoly) -> UniPoly {
        &self * &rhs
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (power, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let magnitude = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let unit = magnitude.is_one();
            match power {
                0 => write!(f, "{magnitude}")?,
                1 if unit => write!(f, "s")?,
                1 => write!(f, "{magnitude}*s")?,
                _ if unit => write!(f, "s^{power}")?,
                _ => write!(f, "{magnitude}*s^{power}")?,
            }
        }
        Ok(())
    }
}

/// Exact `m[0][0]*m[1][1] - m[0][1]*m[1][0]`.
pub fn det2x2(m: &[[UniPoly; 2]; 2]) -> UniPoly {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

/// Polynomial in the indeterminates `z_i` keeping only total degree <= 2.
///
/// Zero coefficients are never stored; quadratic keys are ordered pairs
/// `(i, j)` with `i <= j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TruncPoly2 {
    constant: BigScalar,
    linear: BTreeMap<usize, BigScalar>,
    quadratic: BTreeMap<(usize, usize), BigScalar>,
}

fn pair(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, BigScalar>, key: K, value: BigScalar) {
    if value.is_zero() {
        return;
    }
    *map.entry(key).or_default() += value;
}

fn prune<K: Ord + Clone>(map: &mut BTreeMap<K, BigScalar>) {
    map.retain(|_, v| !v.is_zero());
}

impl TruncPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigScalar) -> Self {
        TruncPoly2 {
            constant: c,
            ..Self::default()
        }
    }

    /// The indeterminate `z_i`.
    pub fn var(i: usize) -> Self {
        let mut p = Self::zero();
        p.linear.insert(i, BigScalar::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.linear.is_empty() && self.quadratic.is_empty()
    }

    pub fn constant_term(&self) -> &BigScalar {
        &self.constant
    }

    pub fn linear_terms(&self) -> &BTreeMap<usize, BigScalar> {
        &self.linear
    }

    pub fn quadratic_terms(&self) -> &BTreeMap<(usize, usize), BigScalar> {
        &self.quadratic
    }

    pub fn linear_coeff(&self, i: usize) -> BigScalar {
        self.linear.get(&i).cloned().unwrap_or_default()
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> BigScalar {
        self.quadratic.get(&pair(i, j)).cloned().unwrap_or_default()
    }

    pub fn add_constant(&mut self, c: &BigScalar) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: BigScalar) {
        accumulate(&mut self.linear, i, c);
        prune(&mut self.linear);
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, c: BigScalar) {
        accumulate(&mut self.quadratic, pair(i, j), c);
        prune(&mut self.quadratic);
    }

    /// Part of total degree exactly `degree` (0, 1 or 2).
    pub fn homogeneous_part(&self, degree: usize) -> Self {
        let mut p = Self::zero();
        match degree {
            0 => p.constant = self.constant.clone(),
            1 => p.linear = self.linear.clone(),
            2 => p.quadratic = self.quadratic.clone(),
            _ => {}
        }
        p
    }

    /// Part of total degree <= `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        let mut p = self.clone();
        if degree < 2 {
            p.quadratic.clear();
        }
        if degree < 1 {
            p.linear.clear();
        }
        p
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        self.constant += &other.constant;
        for (k, v) in &other.linear {
            *self.linear.entry(*k).or_default() += v;
        }
        for (k, v) in &other.quadratic {
            *self.quadratic.entry(*k).or_default() += v;
        }
        prune(&mut self.linear);
        prune(&mut self.quadratic);
    }

    /// `z_i * self`, truncated at degree two.
    pub fn mul_var(&self, i: usize) -> Self {
        let mut p = Self::zero();
        if !self.constant.is_zero() {
            p.linear.insert(i, self.constant.clone());
        }
        for (j, c) in &self.linear {
            p.quadratic.insert(pair(i, *j), c.clone());
        }
        p
    }

    /// Product with every term of total degree >= 3 discarded.
    pub fn trunc2_mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        p.constant = &self.constant * &other.constant;
        if !self.constant.is_zero() {
            for (i, c) in &other.linear {
                *p.linear.entry(*i).or_default() += &self.constant * c;
            }
            for (k, c) in &other.quadratic {
                *p.quadratic.entry(*k).or_default() += &self.constant * c;
            }
        }
        if !other.constant.is_zero() {
            for (i, c) in &self.linear {
                *p.linear.entry(*i).or_default() += &other.constant * c;
            }
            for (k, c) in &self.quadratic {
                *p.quadratic.entry(*k).or_default() += &other.constant * c;
            }
        }
        for (i, a) in &self.linear {
            for (j, b) in &other.linear {
                *p.quadratic.entry(pair(*i, *j)).or_default() += a * b;
            }
        }
        prune(&mut p.linear);
        prune(&mut p.quadratic);
        p
    }

    pub fn max_abs_coeff(&self) -> BigScalar {
        std::iter::once(&self.constant)
            .chain(self.linear.values())
            .chain(self.quadratic.values())
            .map(Signed::abs)
            .max()
            .unwrap_or_default()
    }
}

impl fmt::Display for TruncPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        for ((i, j), c) in &self.quadratic {
            let mono = if i == j {
                format!("z{i}^2")
            } else {
                format!("z{i}*z{j}")
            };
            terms.push(coeff_term(c, &mono));
        }
        for (i, c) in &self.linear {
            terms.push(coeff_term(c, &format!("z{i}")));
        }
        if !self.constant.is_zero() {
            terms.push(self.constant.to_string());
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", terms.join(" + ").replace("+ -", "- "))
    }
}

fn coeff_term(c: &BigScalar, mono: &str) -> String {
    if c.is_one() {
        mono.to_string()
    } else if (-c).is_one() {
        format!("-{mono}")
    } else {
        format!("{c}*{mono}")
    }
}
