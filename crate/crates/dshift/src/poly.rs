//! Homogeneous polynomials, vector-valued polynomials, and the Drury–Arveson
//! inner product.
//!
//! The space carries the inner product determined on monomials by
//! `⟨z^α, z^β⟩ = δ_{αβ} · α!/|α|!`, extended sesquilinearly (conjugate-linear
//! in the second slot). Monomial weights are computed exactly as big rationals
//! and only converted to `f64` at the point of use.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::multiindex::MultiIndex;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("non-homogeneous: degrees {0} and {1}")]
    NonHomogeneous(u32, u32),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
}

/// `α!/|α|!` as an exact rational; this is `⟨z^α, z^α⟩`.
pub fn da_weight(alpha: &MultiIndex) -> BigRational {
    let num = BigInt::from(alpha.factorial());
    let mut den = BigInt::from(1u32);
    for j in 2..=u64::from(alpha.degree()) {
        den *= j;
    }
    BigRational::new(num, den)
}

/// `α!/|α|!` rounded to double precision.
pub fn da_weight_f64(alpha: &MultiIndex) -> f64 {
    rational_to_f64(&da_weight(alpha))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // to_f64 on BigRational goes through the exact quotient.
    r.to_f64().expect("rational out of f64 range")
}

/// A homogeneous polynomial stored as a sparse multi-index → coefficient map.
///
/// The zero polynomial keeps an explicit degree tag. Coefficients that are
/// exactly zero are never stored; no numerical drop tolerance is applied at
/// this layer.
#[derive(Clone, PartialEq)]
pub struct HomogPoly {
    dim: usize,
    degree: u32,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl HomogPoly {
    pub fn zero(dim: usize, degree: u32) -> Self {
        HomogPoly {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Single-term polynomial `c·z^α`.
    pub fn monomial(alpha: MultiIndex, coeff: Complex64) -> Self {
        let mut p = HomogPoly::zero(alpha.dim(), alpha.degree());
        if coeff != Complex64::ZERO {
            p.terms.insert(alpha, coeff);
        }
        p
    }

    /// The coordinate polynomial `z_{i+1}` (zero-based `i`).
    pub fn variable(dim: usize, i: usize) -> Self {
        HomogPoly::monomial(MultiIndex::unit(dim, i), Complex64::ONE)
    }

    /// Builds a polynomial from terms, checking that all degrees agree.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        let mut degree: Option<u32> = None;
        for (alpha, c) in terms {
            assert_eq!(alpha.dim(), dim, "term dimension mismatch");
            match degree {
                None => degree = Some(alpha.degree()),
                Some(k) if k != alpha.degree() => {
                    return Err(PolyError::NonHomogeneous(k, alpha.degree()))
                }
                _ => {}
            }
            let entry = map.entry(alpha).or_insert(Complex64::ZERO);
            *entry += c;
        }
        map.retain(|_, c| *c != Complex64::ZERO);
        Ok(HomogPoly {
            dim,
            degree: degree.unwrap_or(0),
            terms: map,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn is_linear(&self) -> bool {
        self.degree == 1
    }

    pub fn scale(&self, c: Complex64) -> HomogPoly {
        if c == Complex64::ZERO {
            return HomogPoly::zero(self.dim, self.degree);
        }
        HomogPoly {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
        }
    }

    /// Sum of two polynomials of the same dimension and degree.
    pub fn add(&self, other: &HomogPoly) -> HomogPoly {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
        let mut terms = self.terms.clone();
        for (a, c) in &other.terms {
            let entry = terms.entry(a.clone()).or_insert(Complex64::ZERO);
            *entry += c;
        }
        terms.retain(|_, c| *c != Complex64::ZERO);
        HomogPoly {
            dim: self.dim,
            degree: self.degree,
            terms,
        }
    }

    pub fn sub(&self, other: &HomogPoly) -> HomogPoly {
        self.add(&other.scale(-Complex64::ONE))
    }

    /// Multiplication by a monomial: `z^α · p`.
    pub fn multiply_mono(&self, alpha: &MultiIndex) -> HomogPoly {
        assert_eq!(self.dim, alpha.dim(), "dimension mismatch");
        HomogPoly {
            dim: self.dim,
            degree: self.degree + alpha.degree(),
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.add(alpha), *c))
                .collect(),
        }
    }

    /// Coefficient-convolution product; degrees add.
    pub fn multiply(&self, other: &HomogPoly) -> HomogPoly {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut terms: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let entry = terms.entry(a.add(b)).or_insert(Complex64::ZERO);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| *c != Complex64::ZERO);
        HomogPoly {
            dim: self.dim,
            degree: self.degree + other.degree,
            terms,
        }
    }

    /// `∂^α p` with falling-factorial coefficients; the zero polynomial when
    /// every term lacks the required exponents.
    pub fn partial(&self, alpha: &MultiIndex) -> HomogPoly {
        assert_eq!(self.dim, alpha.dim(), "dimension mismatch");
        let out_degree = self.degree.saturating_sub(alpha.degree());
        let mut terms: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        if alpha.degree() <= self.degree {
            for (beta, c) in &self.terms {
                if let Some(gamma) = beta.checked_sub(alpha) {
                    // β!/(β−α)! componentwise: β_i (β_i−1) ⋯ (β_i−α_i+1).
                    let mut factor = 1.0f64;
                    for i in 0..self.dim {
                        for j in 0..alpha.exp(i) {
                            factor *= f64::from(beta.exp(i) - j);
                        }
                    }
                    let entry = terms.entry(gamma).or_insert(Complex64::ZERO);
                    *entry += c * factor;
                }
            }
        }
        terms.retain(|_, c| *c != Complex64::ZERO);
        HomogPoly {
            dim: self.dim,
            degree: out_degree,
            terms,
        }
    }

    /// `∂_i p` (zero-based variable index).
    pub fn partial_var(&self, i: usize) -> HomogPoly {
        self.partial(&MultiIndex::unit(self.dim, i))
    }

    /// Inner product of scalar polynomials; zero when the degrees differ.
    pub fn da_inner(&self, other: &HomogPoly) -> Result<Complex64, PolyError> {
        if self.dim != other.dim {
            return Err(PolyError::DimMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Ok(Complex64::ZERO);
        }
        let mut acc = Complex64::ZERO;
        for (alpha, a) in &self.terms {
            let b = other.coeff(alpha);
            if b != Complex64::ZERO {
                acc += da_weight_f64(alpha) * a * b.conj();
            }
        }
        Ok(acc)
    }

    pub fn da_norm_sq(&self) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| da_weight_f64(alpha) * c.norm_sqr())
            .sum()
    }

    pub fn da_norm(&self) -> f64 {
        self.da_norm_sq().sqrt()
    }

    /// Zero-based indices of the variables that actually occur.
    pub fn support_vars(&self) -> std::collections::BTreeSet<usize> {
        let mut vars = std::collections::BTreeSet::new();
        for alpha in self.terms.keys() {
            vars.extend(alpha.support());
        }
        vars
    }

    /// Re-embeds into a larger variable count (appends unused variables).
    pub fn embed(&self, dim: usize) -> HomogPoly {
        assert!(dim >= self.dim);
        HomogPoly {
            dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.embed(dim), *c))
                .collect(),
        }
    }

    /// True when `other = c·self` for some nonzero scalar `c`.
    pub fn colinear_with(&self, other: &HomogPoly, tol: f64) -> bool {
        if self.dim != other.dim || self.degree != other.degree {
            return false;
        }
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        // Cauchy–Schwarz saturates exactly on colinear pairs.
        let ip = match self.da_inner(other) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let bound = self.da_norm() * other.da_norm();
        (ip.norm() - bound).abs() <= tol * bound
    }
}

impl fmt::Display for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Print z1-dominant terms first.
        let order = crate::multiindex::MonomialOrder::graded_lex(self.dim);
        let mut keys: Vec<&MultiIndex> = self.terms.keys().collect();
        keys.sort_by(|a, b| order.cmp(b, a));
        for (i, alpha) in keys.iter().enumerate() {
            let c = self.terms[*alpha];
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", fmt_coeff_mono(c, alpha))?;
        }
        Ok(())
    }
}

impl fmt::Debug for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub(crate) fn fmt_coeff_mono(c: Complex64, alpha: &MultiIndex) -> String {
    let coeff = fmt_complex(c);
    if alpha.degree() == 0 {
        coeff
    } else if c == Complex64::ONE {
        format!("{alpha}")
    } else {
        format!("{coeff}*{alpha}")
    }
}

pub(crate) fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        fmt_real(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_real(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}i)", fmt_real(c.re), fmt_real(-c.im))
    } else {
        format!("({}+{}i)", fmt_real(c.re), fmt_real(c.im))
    }
}

fn fmt_real(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        // Shortest round-trip representation.
        format!("{x}")
    }
}

/// A homogeneous element of the rank-`r` module, stored componentwise: the
/// element `Σ p_j ⊗ e_j` keeps the scalar polynomial `p_j` per coordinate.
#[derive(Clone, PartialEq)]
pub struct VectorPoly {
    dim: usize,
    rank: usize,
    degree: u32,
    components: Vec<HomogPoly>,
}

impl VectorPoly {
    pub fn zero(dim: usize, rank: usize, degree: u32) -> Self {
        assert!(rank >= 1);
        VectorPoly {
            dim,
            rank,
            degree,
            components: vec![HomogPoly::zero(dim, degree); rank],
        }
    }

    /// The simple tensor `p ⊗ ξ`.
    pub fn tensor(p: &HomogPoly, xi: &[Complex64]) -> Self {
        assert!(!xi.is_empty());
        VectorPoly {
            dim: p.dim(),
            rank: xi.len(),
            degree: p.degree(),
            components: xi.iter().map(|c| p.scale(*c)).collect(),
        }
    }

    /// A rank-1 wrapper around a scalar polynomial.
    pub fn scalar(p: &HomogPoly) -> Self {
        VectorPoly::tensor(p, &[Complex64::ONE])
    }

    pub fn from_components(components: Vec<HomogPoly>) -> Result<Self, PolyError> {
        assert!(!components.is_empty());
        let dim = components[0].dim();
        let degree = components[0].degree();
        for c in &components {
            if c.dim() != dim {
                return Err(PolyError::DimMismatch(dim, c.dim()));
            }
            if c.degree() != degree {
                return Err(PolyError::DegreeMismatch(degree, c.degree()));
            }
        }
        Ok(VectorPoly {
            dim,
            rank: components.len(),
            degree,
            components,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn component(&self, j: usize) -> &HomogPoly {
        &self.components[j]
    }

    pub fn components(&self) -> &[HomogPoly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(HomogPoly::is_zero)
    }

    pub fn scale(&self, c: Complex64) -> VectorPoly {
        VectorPoly {
            dim: self.dim,
            rank: self.rank,
            degree: self.degree,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &VectorPoly) -> VectorPoly {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.rank, other.rank);
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
        VectorPoly {
            dim: self.dim,
            rank: self.rank,
            degree: self.degree,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &VectorPoly) -> VectorPoly {
        self.add(&other.scale(-Complex64::ONE))
    }

    /// `z^α · v` (the module action of a monomial).
    pub fn multiply_mono(&self, alpha: &MultiIndex) -> VectorPoly {
        VectorPoly {
            dim: self.dim,
            rank: self.rank,
            degree: self.degree + alpha.degree(),
            components: self
                .components
                .iter()
                .map(|p| p.multiply_mono(alpha))
                .collect(),
        }
    }

    /// `q · v` for a scalar homogeneous polynomial `q`.
    pub fn multiply(&self, q: &HomogPoly) -> VectorPoly {
        VectorPoly {
            dim: self.dim,
            rank: self.rank,
            degree: self.degree + q.degree(),
            components: self.components.iter().map(|p| p.multiply(q)).collect(),
        }
    }

    /// Attempts to factor as a simple tensor `p ⊗ ξ` (rank-one coefficient
    /// structure); returns the factors with `p` normalized to its first
    /// nonzero coefficient.
    pub fn as_simple_tensor(&self, tol: f64) -> Option<(HomogPoly, Vec<Complex64>)> {
        // Pivot component: largest norm.
        let (jmax, pivot) = self
            .components
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.da_norm_sq().total_cmp(&b.1.da_norm_sq()))?;
        if pivot.is_zero() {
            return None;
        }
        let p = pivot.clone();
        let pn = p.da_norm_sq();
        let mut xi = vec![Complex64::ZERO; self.rank];
        for (j, comp) in self.components.iter().enumerate() {
            if j == jmax {
                xi[j] = Complex64::ONE;
                continue;
            }
            // comp must be a scalar multiple of p: λ = ⟨comp, p⟩/‖p‖².
            let lambda = comp.da_inner(&p).ok()? / pn;
            let residual = comp.sub(&p.scale(lambda));
            if residual.da_norm() > tol * (1.0 + comp.da_norm()) {
                return None;
            }
            xi[j] = lambda;
        }
        Some((p, xi))
    }
}

impl fmt::Display for VectorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank == 1 {
            return write!(f, "{}", self.components[0]);
        }
        let mut first = true;
        for (j, p) in self.components.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({p}) @ e{}", j + 1)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VectorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Inner product on the rank-`r` module: `Σ_α (α!/|α|!)·⟨a_α, b_α⟩_{ℂ^r}`,
/// conjugate-linear in `q`. Zero when the degrees differ.
pub fn da_inner(p: &VectorPoly, q: &VectorPoly) -> Result<Complex64, PolyError> {
    if p.dim != q.dim {
        return Err(PolyError::DimMismatch(p.dim, q.dim));
    }
    if p.rank != q.rank {
        return Err(PolyError::RankMismatch(p.rank, q.rank));
    }
    let mut acc = Complex64::ZERO;
    for j in 0..p.rank {
        acc += p.components[j].da_inner(&q.components[j])?;
    }
    Ok(acc)
}

pub fn da_norm_sq(p: &VectorPoly) -> f64 {
    p.components.iter().map(HomogPoly::da_norm_sq).sum()
}

pub fn da_norm(p: &VectorPoly) -> f64 {
    da_norm_sq(p).sqrt()
}

/// Modified Gram–Schmidt in the module inner product. Inputs whose residual
/// drops below `rel_tol` times their original norm are treated as linearly
/// dependent and dropped.
pub fn gram_schmidt_da(polys: &[VectorPoly], rel_tol: f64) -> Result<Vec<VectorPoly>, PolyError> {
    let mut basis: Vec<VectorPoly> = Vec::new();
    for p in polys {
        if let Some(first) = basis.first() {
            if p.dim() != first.dim() {
                return Err(PolyError::DimMismatch(first.dim(), p.dim()));
            }
            if p.rank() != first.rank() {
                return Err(PolyError::RankMismatch(first.rank(), p.rank()));
            }
            if p.degree() != first.degree() {
                return Err(PolyError::DegreeMismatch(first.degree(), p.degree()));
            }
        }
        let original = da_norm(p);
        if original == 0.0 {
            continue;
        }
        let mut v = p.clone();
        // Two projection passes for orthogonality near machine precision.
        for _ in 0..2 {
            for b in &basis {
                let c = da_inner(&v, b)?;
                v = v.sub(&b.scale(c));
            }
        }
        let norm = da_norm(&v);
        if norm > rel_tol * original {
            basis.push(v.scale(Complex64::from(1.0 / norm)));
        }
    }
    Ok(basis)
}

/// Default relative tolerance for rank decisions in the linear-algebra layer.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mi(exps: &[u32]) -> MultiIndex {
        MultiIndex::new(exps.to_vec())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn weight_values() {
        // 1!·1!/2! = 1/2
        assert_relative_eq!(da_weight_f64(&mi(&[1, 1])), 0.5);
        // k!/k! = 1 on a pure power
        assert_relative_eq!(da_weight_f64(&mi(&[7, 0, 0])), 1.0);
        // 1/3!
        assert_relative_eq!(da_weight_f64(&mi(&[1, 1, 1])), 1.0 / 6.0);
    }

    #[test]
    fn weight_is_exact_at_high_degree() {
        // 20!·20!/40! needs big integers; saturating arithmetic would be wrong.
        let w = da_weight(&mi(&[20, 20]));
        let f = rational_to_f64(&w);
        assert!(f > 0.0 && f < 1e-11);
        let back = da_weight(&mi(&[20, 20]));
        assert_eq!(w, back);
    }

    #[test]
    fn inner_product_examples() {
        let z1z2 = HomogPoly::monomial(mi(&[1, 1]), c(1.0));
        let v = VectorPoly::scalar(&z1z2);
        assert_relative_eq!(da_inner(&v, &v).unwrap().re, 0.5);

        // Distinct monomials are orthogonal.
        let z11 = HomogPoly::monomial(mi(&[2, 0]), c(1.0));
        let w = VectorPoly::scalar(&z11);
        assert_eq!(da_inner(&v, &w).unwrap(), Complex64::ZERO);

        // Orthogonal vector parts.
        let z1 = HomogPoly::variable(2, 0);
        let a = VectorPoly::tensor(&z1, &[c(1.0), c(0.0)]);
        let b = VectorPoly::tensor(&z1, &[c(0.0), c(1.0)]);
        assert_eq!(da_inner(&a, &b).unwrap(), Complex64::ZERO);

        // Degrees differ: zero, not an error.
        let z1sq = VectorPoly::scalar(&z11);
        let z1v = VectorPoly::scalar(&z1);
        assert_eq!(da_inner(&z1sq, &z1v).unwrap(), Complex64::ZERO);

        // Rank mismatch is an error.
        assert!(da_inner(&a, &z1v).is_err());
    }

    #[test]
    fn multiplication() {
        let z1 = HomogPoly::variable(3, 0);
        let sq = z1.multiply(&z1);
        assert_eq!(sq.coeff(&mi(&[2, 0, 0])), c(1.0));
        assert_eq!(sq.degree(), 2);

        // (z1² + z2z3)·z2 = z1²z2 + z2²z3
        let p = HomogPoly::from_terms(3, vec![(mi(&[2, 0, 0]), c(1.0)), (mi(&[0, 1, 1]), c(1.0))])
            .unwrap();
        let q = p.multiply_mono(&mi(&[0, 1, 0]));
        assert_eq!(q.coeff(&mi(&[2, 1, 0])), c(1.0));
        assert_eq!(q.coeff(&mi(&[0, 2, 1])), c(1.0));
        assert_eq!(q.num_terms(), 2);

        // p·0 keeps the degree bookkeeping.
        let zero = HomogPoly::zero(3, 2);
        let pz = p.multiply(&zero);
        assert!(pz.is_zero());
        assert_eq!(pz.degree(), 4);
    }

    #[test]
    fn partial_derivatives() {
        let z1sq = HomogPoly::monomial(mi(&[2, 0]), c(1.0));
        let d = z1sq.partial(&mi(&[2, 0]));
        assert_eq!(d.coeff(&mi(&[0, 0])), c(2.0));

        assert!(z1sq.partial(&mi(&[0, 1])).is_zero());

        // ∂1∂2 of z1² + z2z3 vanishes term by term.
        let p = HomogPoly::from_terms(3, vec![(mi(&[2, 0, 0]), c(1.0)), (mi(&[0, 1, 1]), c(1.0))])
            .unwrap();
        assert!(p.partial(&mi(&[1, 1, 0])).is_zero());
    }

    #[test]
    fn partial_composition() {
        let p = HomogPoly::from_terms(
            3,
            vec![
                (mi(&[3, 1, 0]), c(2.0)),
                (mi(&[1, 2, 1]), c(-1.0)),
                (mi(&[0, 0, 4]), c(0.5)),
            ],
        )
        .unwrap();
        let a = mi(&[1, 0, 1]);
        let b = mi(&[1, 1, 0]);
        let lhs = p.partial(&a).partial(&b);
        let rhs = p.partial(&a.add(&b));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn gram_schmidt_examples() {
        let z1 = VectorPoly::scalar(&HomogPoly::variable(2, 0));
        let z2 = VectorPoly::scalar(&HomogPoly::variable(2, 1));

        // Already orthogonal: unchanged up to normalization.
        let ortho = gram_schmidt_da(&[z1.clone(), z2.clone()], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(ortho.len(), 2);
        assert_relative_eq!(da_norm(&ortho[0]), 1.0, epsilon = 1e-12);
        assert!(da_inner(&ortho[0], &ortho[1]).unwrap().norm() < 1e-12);

        // Dependent inputs collapse.
        let dup = gram_schmidt_da(&[z1.clone(), z1.clone()], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(dup.len(), 1);

        // [z1, z1+z2] → {z1, z2} up to phase.
        let sum = z1.add(&z2);
        let gs = gram_schmidt_da(&[z1.clone(), sum], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(gs.len(), 2);
        let second = &gs[1];
        assert!(second.component(0).coeff(&mi(&[1, 0])).norm() < 1e-12);
        assert_relative_eq!(second.component(0).coeff(&mi(&[0, 1])).norm(), 1.0, epsilon = 1e-12);

        assert!(gram_schmidt_da(&[], DEFAULT_RANK_TOL).unwrap().is_empty());
    }

    #[test]
    fn simple_tensor_factorization() {
        let p = HomogPoly::from_terms(3, vec![(mi(&[2, 0, 0]), c(1.0)), (mi(&[0, 1, 1]), c(3.0))])
            .unwrap();
        let v = VectorPoly::tensor(&p, &[c(2.0), Complex64::new(0.0, 1.0)]);
        let (pf, xi) = v.as_simple_tensor(1e-12).unwrap();
        let rebuilt = VectorPoly::tensor(&pf, &xi);
        assert!(da_norm(&rebuilt.sub(&v)) < 1e-12);

        // Genuinely rank-two coefficient structure does not factor.
        let q = HomogPoly::monomial(mi(&[0, 2, 0]), c(1.0));
        let w = VectorPoly::from_components(vec![p, q]).unwrap();
        assert!(w.as_simple_tensor(1e-10).is_none());
    }
}
