//! Leverrier–Faddeev evaluation of `T(s, α) = C (sI - A)^{-1} B` at an
//! integer diagonal assignment `α`, and the pointwise rank classifier.
//!
//! With `A = A0 + diag(α)`, `R_1 = I`, `R_{k+1} = A R_k + a_k I` and
//! `a_k = -tr(A R_k) / k`, the characteristic polynomial is
//! `Δ(s) = s^n + a_1 s^{n-1} + ... + a_n` and the numerator matrix is
//! `N(s, α) = Δ(s) T(s, α) = Σ_k (C R_k B) s^{n-k}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SystemStructure;
use crate::poly::{det2x2, BigScalar, UniPoly};

/// Dense square matrix of exact integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<BigScalar>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![BigScalar::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigScalar::one();
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigScalar {
        &self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[BigScalar] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> BigScalar {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> BigScalar {
        self.data.iter().map(Signed::abs).max().unwrap_or_default()
    }
}

/// Columns `c` per row `i` where branch `c` reaches branch `i` (or `c = i`).
/// Every polynomial in `A` vanishes outside this pattern.
fn reach_support(structure: &SystemStructure) -> Vec<Vec<usize>> {
    let n = structure.n;
    (0..n)
        .map(|i| {
            let mut seen = vec![false; n];
            seen[i] = true;
            let mut stack = vec![i];
            while let Some(v) = stack.pop() {
                for &j in &structure.feeders[v] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            (0..n).filter(|&c| seen[c]).collect()
        })
        .collect()
}

/// `A0 + diag(alpha)` applied on the left of `r`, every entry computed.
fn apply_system(structure: &SystemStructure, alpha: &[BigScalar], r: &Matrix) -> Matrix {
    let n = structure.n;
    let mut out = Vec::with_capacity(n * n);
    for (i, a) in alpha.iter().enumerate() {
        for c in 0..n {
            let mut acc = a * r.get(i, c);
            for &j in &structure.feeders[i] {
                acc += r.get(j, c);
            }
            out.push(acc);
        }
    }
    Matrix { n, data: out }
}

/// Coefficients `(a_0 = 1, a_1, ..., a_n)` of `Δ(s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub a: Vec<BigScalar>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// `Δ(s)` in ascending powers of `s`.
    pub fn to_poly(&self) -> UniPoly {
        UniPoly::from_coeffs(self.a.iter().rev().cloned().collect())
    }

    pub fn max_abs(&self) -> BigScalar {
        self.a[1..].iter().map(Signed::abs).max().unwrap_or_default()
    }
}

/// `N(s, α)`: the 2x2 polynomial numerator of the transfer matrix, with the
/// stacked coefficients `R̄_k = C R_k B` it was assembled from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumeratorMatrix {
    /// `rbar[k - 1]` is `R̄_k`.
    pub rbar: Vec<[[BigScalar; 2]; 2]>,
    pub entries: [[UniPoly; 2]; 2],
}

impl NumeratorMatrix {
    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(UniPoly::is_zero)
    }

    pub fn max_abs(&self) -> BigScalar {
        self.rbar
            .iter()
            .flat_map(|m| m.iter().flatten())
            .map(Signed::abs)
            .max()
            .unwrap_or_default()
    }

    pub fn delta(&self) -> UniPoly {
        det2x2(&self.entries)
    }
}

/// Full Faddeev output, including the resolvent coefficient matrices.
#[derive(Clone, Debug)]
pub struct FaddeevTrace {
    pub char_poly: CharPoly,
    pub numerator: NumeratorMatrix,
    /// `resolvent[k - 1]` is `R_k`.
    pub resolvent: Vec<Matrix>,
}

fn check_point(structure: &SystemStructure, alpha: &[BigScalar]) -> Result<()> {
    if alpha.len() != structure.n {
        return Err(Error::Invariant(format!(
            "point has {} coordinates for {} branches",
            alpha.len(),
            structure.n
        )));
    }
    Ok(())
}

fn project(structure: &SystemStructure, r: &Matrix) -> [[BigScalar; 2]; 2] {
    let mut out: [[BigScalar; 2]; 2] = Default::default();
    for (j, row) in out.iter_mut().enumerate() {
        for (m, cell) in row.iter_mut().enumerate() {
            for &i in &structure.output_branches[j] {
                for &l in &structure.input_branches[m] {
                    *cell += r.get(i, l);
                }
            }
        }
    }
    out
}

fn run_faddeev(
    structure: &SystemStructure,
    alpha: &[BigScalar],
    keep_resolvent: bool,
) -> Result<FaddeevTrace> {
    check_point(structure, alpha)?;
    let n = structure.n;
    let mut a = vec![BigScalar::one()];
    let mut rbar = Vec::with_capacity(n);
    let mut resolvent = Vec::new();
    let mut r = Matrix::identity(n);
    for k in 1..=n {
        rbar.push(project(structure, &r));
        let mut ar = apply_system(structure, alpha, &r);
        let trace = ar.trace();
        let (quotient, remainder) = trace.div_rem(&BigInt::from(k));
        if !remainder.is_zero() {
            return Err(Error::DivisibilityViolation {
                k,
                trace: trace.to_string(),
            });
        }
        let a_k = -quotient;
        for i in 0..n {
            ar.data[i * n + i] += &a_k;
        }
        a.push(a_k);
        if keep_resolvent {
            resolvent.push(std::mem::replace(&mut r, ar));
        } else {
            r = ar;
        }
    }
    // After the loop `r` holds A R_n + a_n I, which Cayley–Hamilton forces to zero.
    if n > 0 && r.data.iter().any(|x| !x.is_zero()) {
        return Err(Error::Invariant(
            "A R_n + a_n I is not the zero matrix".to_string(),
        ));
    }

    let entries = numerator_entries(n, &rbar);
    Ok(FaddeevTrace {
        char_poly: CharPoly { a },
        numerator: NumeratorMatrix { rbar, entries },
        resolvent,
    })
}

fn numerator_entries(n: usize, rbar: &[[[BigScalar; 2]; 2]]) -> [[UniPoly; 2]; 2] {
    let mut entries: [[UniPoly; 2]; 2] = Default::default();
    for (j, row) in entries.iter_mut().enumerate() {
        for (m, cell) in row.iter_mut().enumerate() {
            // N_jm(s) = Σ_k R̄_k[j][m] s^{n-k}
            let coeffs: Vec<BigScalar> = (0..n).map(|p| rbar[n - 1 - p][j][m].clone()).collect();
            *cell = UniPoly::from_coeffs(coeffs);
        }
    }
    entries
}

/// Exact integer arithmetic with overflow reported as `None`.
trait Exact: Clone {
    fn nil() -> Self;
    fn unit() -> Self;
    fn add_to(&mut self, other: &Self) -> Option<()>;
    fn times(&self, other: &Self) -> Option<Self>;
    fn negated(&self) -> Option<Self>;
    /// `Err(())` when `k` does not divide `self`.
    fn div_exact(&self, k: usize) -> std::result::Result<Self, ()>;
    fn is_nil(&self) -> bool;
    fn to_big(&self) -> BigScalar;
}

impl Exact for i128 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn add_to(&mut self, other: &Self) -> Option<()> {
        *self = self.checked_add(*other)?;
        Some(())
    }
    fn times(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn negated(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn div_exact(&self, k: usize) -> std::result::Result<Self, ()> {
        let k = k as i128;
        if self % k != 0 {
            return Err(());
        }
        Ok(self / k)
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn to_big(&self) -> BigScalar {
        BigScalar::from(*self)
    }
}

impl Exact for BigScalar {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn add_to(&mut self, other: &Self) -> Option<()> {
        *self += other;
        Some(())
    }
    fn times(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn negated(&self) -> Option<Self> {
        Some(-self)
    }
    fn div_exact(&self, k: usize) -> std::result::Result<Self, ()> {
        let (q, r) = self.div_rem(&BigInt::from(k));
        if r.is_zero() {
            Ok(q)
        } else {
            Err(())
        }
    }
    fn is_nil(&self) -> bool {
        self.is_zero()
    }
    fn to_big(&self) -> BigScalar {
        self.clone()
    }
}

/// One exact recurrence over the reachability pattern; `Ok(None)` reports
/// an arithmetic overflow.
fn run_faddeev_sparse<T: Exact>(
    structure: &SystemStructure,
    support: &[Vec<usize>],
    alpha: &[T],
) -> Result<Option<(CharPoly, NumeratorMatrix)>> {
    let n = structure.n;
    let mut r = vec![T::nil(); n * n];
    for i in 0..n {
        r[i * n + i] = T::unit();
    }
    let mut a = vec![T::unit()];
    let mut rbar: Vec<[[T; 2]; 2]> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut bar: [[T; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| T::nil()));
        for (j, row) in bar.iter_mut().enumerate() {
            for (m, cell) in row.iter_mut().enumerate() {
                for &i in &structure.output_branches[j] {
                    for &l in &structure.input_branches[m] {
                        if cell.add_to(&r[i * n + l]).is_none() {
                            return Ok(None);
                        }
                    }
                }
            }
        }
        rbar.push(bar);
        let mut ar = vec![T::nil(); n * n];
        let mut trace = T::nil();
        for i in 0..n {
            for &c in &support[i] {
                let Some(mut acc) = alpha[i].times(&r[i * n + c]) else {
                    return Ok(None);
                };
                for &j in &structure.feeders[i] {
                    if acc.add_to(&r[j * n + c]).is_none() {
                        return Ok(None);
                    }
                }
                if c == i && trace.add_to(&acc).is_none() {
                    return Ok(None);
                }
                ar[i * n + c] = acc;
            }
        }
        let Ok(quotient) = trace.div_exact(k) else {
            return Err(Error::DivisibilityViolation {
                k,
                trace: trace.to_big().to_string(),
            });
        };
        let Some(a_k) = quotient.negated() else {
            return Ok(None);
        };
        for i in 0..n {
            if ar[i * n + i].add_to(&a_k).is_none() {
                return Ok(None);
            }
        }
        a.push(a_k);
        r = ar;
    }
    // Cayley–Hamilton: A R_n + a_n I = 0.
    if r.iter().any(|x| !x.is_nil()) {
        return Err(Error::Invariant(
            "A R_n + a_n I is not the zero matrix".to_string(),
        ));
    }
    let rbar: Vec<[[BigScalar; 2]; 2]> = rbar
        .iter()
        .map(|m| std::array::from_fn(|j| std::array::from_fn(|l| m[j][l].to_big())))
        .collect();
    Ok(Some((
        CharPoly {
            a: a.iter().map(Exact::to_big).collect(),
        },
        NumeratorMatrix {
            entries: numerator_entries(n, &rbar),
            rbar,
        },
    )))
}

/// Characteristic polynomial and numerator matrix at the point `alpha`.
///
/// Runs in `i128` while every intermediate value fits and in big integers
/// otherwise, skipping entries of `R_k` that vanish structurally.
/// [`faddeev_dense`] is the plain dense recurrence.
pub fn faddeev(structure: &SystemStructure, alpha: &[BigScalar]) -> Result<(CharPoly, NumeratorMatrix)> {
    check_point(structure, alpha)?;
    let support = reach_support(structure);
    // rough size of the largest coefficient, about n·log2 max|α| bits; the
    // checked arithmetic stays exact either way
    let norm_bits = alpha.iter().map(|x| x.bits()).max().unwrap_or(0) + 2;
    let small = (norm_bits * structure.n as u64) < 192;
    if let Some(small) = alpha
        .iter()
        .map(ToPrimitive::to_i128)
        .collect::<Option<Vec<i128>>>()
        .filter(|_| small)
    {
        if let Some(out) = run_faddeev_sparse(structure, &support, &small)? {
            return Ok(out);
        }
    }
    Ok(run_faddeev_sparse(structure, &support, alpha)?.expect("big integers do not overflow"))
}

/// The full recurrence, every entry of every `R_k` in big integers.
pub fn faddeev_dense(structure: &SystemStructure, alpha: &[BigScalar]) -> Result<(CharPoly, NumeratorMatrix)> {
    let t = run_faddeev(structure, alpha, false)?;
    Ok((t.char_poly, t.numerator))
}

/// As [`faddeev`], keeping every `R_k`.
pub fn faddeev_trace(structure: &SystemStructure, alpha: &[BigScalar]) -> Result<FaddeevTrace> {
    run_faddeev(structure, alpha, true)
}

/// Rank of `T(s, α)` and the determinant numerator `δ(s, α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointRank {
    pub point: Vec<BigScalar>,
    pub rank: u8,
    /// `N11 N22 - N12 N21`; absent when `N` is the zero matrix.
    pub delta: Option<UniPoly>,
}

pub fn classify_numerator(point: Vec<BigScalar>, numerator: &NumeratorMatrix) -> PointRank {
    if numerator.is_zero() {
        return PointRank {
            point,
            rank: 0,
            delta: None,
        };
    }
    let delta = numerator.delta();
    let rank = if delta.is_zero() { 1 } else { 2 };
    PointRank {
        point,
        rank,
        delta: Some(delta),
    }
}

pub fn rank_at_point(structure: &SystemStructure, alpha: &[BigScalar]) -> Result<PointRank> {
    let (_, numerator) = faddeev(structure, alpha)?;
    Ok(classify_numerator(alpha.to_vec(), &numerator))
}

/// `2 n^(2n^2)` and `2 n^(2n^2 + 2)` for a fixed branch count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientBounds {
    pub n: usize,
    pub char_poly: BigScalar,
    pub numerator: BigScalar,
}

impl CoefficientBounds {
    pub fn for_size(n: usize) -> Self {
        let base = BigScalar::from(n);
        let e = 2 * n * n;
        CoefficientBounds {
            n,
            char_poly: BigScalar::from(2) * Pow::pow(&base, e as u64),
            numerator: BigScalar::from(2) * Pow::pow(&base, (e + 2) as u64),
        }
    }
}

/// Measured coefficient maxima at one point against the size bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    #[serde(serialize_with = "crate::report::ser_big")]
    pub a_max: BigScalar,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub rbar_max: BigScalar,
    pub char_poly_within: bool,
    pub numerator_within: bool,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.char_poly_within && self.numerator_within
    }

    pub fn into_result(self) -> Result<Self> {
        if self.holds() {
            Ok(self)
        } else {
            Err(Error::BoundViolation(format!(
                "|a_max| = {}, |R̄_max| = {}",
                self.a_max, self.rbar_max
            )))
        }
    }
}

/// Strict comparison of `max |a_k|` against `2 n^(2n^2)` and of
/// `max |R̄_k entries|` against `2 n^(2n^2+2)`.
pub fn bound_check(cp: &CharPoly, nm: &NumeratorMatrix, bounds: &CoefficientBounds) -> BoundCheck {
    let a_max = cp.max_abs();
    let rbar_max = nm.max_abs();
    BoundCheck {
        char_poly_within: a_max < bounds.char_poly,
        numerator_within: rbar_max < bounds.numerator,
        a_max,
        rbar_max,
    }
}

/// Checks `(sI - A) · Σ_k R_k s^{n-k} = Δ(s) I` by explicit polynomial
/// matrix multiplication.
pub fn verify_resolvent_identity(structure: &SystemStructure, alpha: &[BigScalar]) -> Result<bool> {
    let trace = faddeev_trace(structure, alpha)?;
    let n = structure.n;
    let adjugate: Vec<UniPoly> = (0..n * n)
        .map(|idx| {
            let coeffs = (0..n)
                .map(|p| trace.resolvent[n - 1 - p].data[idx].clone())
                .collect();
            UniPoly::from_coeffs(coeffs)
        })
        .collect();
    let delta = trace.char_poly.to_poly();
    for i in 0..n {
        // row i of (sI - A): s - α_i on the diagonal, -1 at each feeder
        let diag = UniPoly::linear_factor(&alpha[i]);
        for c in 0..n {
            let mut acc = &diag * &adjugate[i * n + c];
            for &j in &structure.feeders[i] {
                acc = &acc - &adjugate[j * n + c];
            }
            let expected = if i == c { delta.clone() } else { UniPoly::zero() };
            if acc != expected {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
