//! Multi-index combinatorics: exponent vectors, degree-slice enumeration,
//! and monomial orders.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

/// Exponent vector of a monomial in `d` variables, with its total degree cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    /// Builds a multi-index from its exponents. Panics on `d = 0`.
    pub fn new(exps: Vec<u32>) -> Self {
        assert!(!exps.is_empty(), "multi-index needs at least one variable");
        let degree = exps.iter().sum();
        MultiIndex { exps, degree }
    }

    /// The zero index `(0, …, 0)` in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// The unit index `e_i` (exponent 1 in variable `i`, zero-based).
    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut exps = vec![0; dim];
        exps[i] = 1;
        MultiIndex::new(exps)
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise subtraction; `None` when any component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.dim(), other.dim());
        let mut exps = Vec::with_capacity(self.dim());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex::new(exps))
    }

    /// Componentwise `≤`, i.e. `z^self` divides `z^other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    pub fn lcm(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    /// `α! = α_1! ⋯ α_d!` as an exact big integer.
    pub fn factorial(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &e in &self.exps {
            for j in 2..=u64::from(e) {
                acc *= j;
            }
        }
        acc
    }

    /// Variables with nonzero exponent (zero-based indices).
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    /// Pads with trailing zero exponents up to `dim` variables.
    pub fn embed(&self, dim: usize) -> MultiIndex {
        assert!(dim >= self.dim());
        let mut exps = self.exps.clone();
        exps.resize(dim, 0);
        MultiIndex::new(exps)
    }
}

// Canonical order for map keys: degree first, then lexicographic on exponents.
// Bases and display use `MonomialOrder` / `enumerate_monomials` explicitly.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    /// Monomial notation, e.g. `z1^2*z3`; the empty product prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "z{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Number of monomials of degree `k` in `d` variables, `C(k+d−1, d−1)`.
pub fn slice_dimension(dim: usize, degree: u32) -> usize {
    // Exact binomial; stays within u128 for every desk-scale (d, k).
    let n = u128::from(degree) + dim as u128 - 1;
    let r = dim as u128 - 1;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for j in 0..r {
        num *= n - j;
        den *= j + 1;
    }
    usize::try_from(num / den).expect("slice dimension overflows usize")
}

/// All multi-indices of degree `k` in `d` variables, in graded-lex order
/// (z1-dominant first): `(k,0,…,0)` down to `(0,…,0,k)`.
pub fn enumerate_monomials(dim: usize, degree: u32) -> Vec<MultiIndex> {
    assert!(dim >= 1);
    let mut out = Vec::with_capacity(slice_dimension(dim, degree));
    let mut current = vec![0u32; dim];
    fill(&mut out, &mut current, 0, degree);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, var: usize, remaining: u32) {
    if var == current.len() - 1 {
        current[var] = remaining;
        out.push(MultiIndex::new(current.clone()));
        current[var] = 0;
        return;
    }
    // Highest exponent on the leading variable first.
    for e in (0..=remaining).rev() {
        current[var] = e;
        fill(out, current, var + 1, remaining - e);
    }
    current[var] = 0;
}

/// Kind of term order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonomialOrderKind {
    /// Degree first, ties broken lexicographically.
    GradedLex,
    /// Pure lexicographic.
    Lex,
}

/// A total order on same-dimension multi-indices, with an optional variable
/// permutation (`perm[j]` = index of the j-th most significant variable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    pub kind: MonomialOrderKind,
    perm: Vec<usize>,
}

impl MonomialOrder {
    pub fn graded_lex(dim: usize) -> Self {
        MonomialOrder {
            kind: MonomialOrderKind::GradedLex,
            perm: (0..dim).collect(),
        }
    }

    pub fn lex(dim: usize) -> Self {
        MonomialOrder {
            kind: MonomialOrderKind::Lex,
            perm: (0..dim).collect(),
        }
    }

    /// Same order with the variables permuted; `perm[j]` is the j-th most
    /// significant variable. Panics unless `perm` is a permutation of `0..dim`.
    pub fn with_permutation(kind: MonomialOrderKind, perm: Vec<usize>) -> Self {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            assert!(p < perm.len() && !seen[p], "not a permutation");
            seen[p] = true;
        }
        MonomialOrder { kind, perm }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn cmp(&self, a: &MultiIndex, b: &MultiIndex) -> Ordering {
        debug_assert_eq!(a.dim(), self.dim());
        debug_assert_eq!(b.dim(), self.dim());
        if self.kind == MonomialOrderKind::GradedLex {
            match a.degree().cmp(&b.degree()) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        for &v in &self.perm {
            match a.exp(v).cmp(&b.exp(v)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// The greatest element of a nonempty iterator under this order.
    pub fn max<'a, I: Iterator<Item = &'a MultiIndex>>(&self, iter: I) -> Option<&'a MultiIndex> {
        iter.max_by(|a, b| self.cmp(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_single_variable() {
        let ms = enumerate_monomials(1, 5);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].exps(), &[5]);
    }

    #[test]
    fn enumerate_constants() {
        let ms = enumerate_monomials(3, 0);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0], MultiIndex::zero(3));
    }

    #[test]
    fn enumerate_degree_two_three_vars() {
        // Stars-and-bars: C(4,2) = 6, checked against a brute-force scan.
        let ms = enumerate_monomials(3, 2);
        assert_eq!(ms.len(), 6);
        let mut brute = Vec::new();
        for a in 0..=2u32 {
            for b in 0..=2u32 {
                for c in 0..=2u32 {
                    if a + b + c == 2 {
                        brute.push(MultiIndex::new(vec![a, b, c]));
                    }
                }
            }
        }
        assert_eq!(brute.len(), 6);
        for m in &brute {
            assert!(ms.contains(m));
        }
        // z1-dominant comes first.
        assert_eq!(ms[0].exps(), &[2, 0, 0]);
        assert_eq!(ms[5].exps(), &[0, 0, 2]);
    }

    #[test]
    fn enumeration_is_strictly_decreasing_in_graded_lex() {
        let order = MonomialOrder::graded_lex(4);
        let ms = enumerate_monomials(4, 3);
        assert_eq!(ms.len(), slice_dimension(4, 3));
        for w in ms.windows(2) {
            assert_eq!(order.cmp(&w[0], &w[1]), Ordering::Greater);
        }
    }

    #[test]
    fn slice_dimensions_match_pascal() {
        assert_eq!(slice_dimension(2, 5), 6);
        assert_eq!(slice_dimension(3, 2), 6);
        assert_eq!(slice_dimension(4, 10), 286);
        assert_eq!(slice_dimension(1, 17), 1);
    }

    #[test]
    fn lex_vs_graded_lex() {
        let a = MultiIndex::new(vec![3, 0]);
        let b = MultiIndex::new(vec![1, 4]);
        // Lex: z1-exponent dominates regardless of degree.
        assert_eq!(MonomialOrder::lex(2).cmp(&a, &b), Ordering::Greater);
        // Graded-lex: the higher total degree wins.
        assert_eq!(MonomialOrder::graded_lex(2).cmp(&a, &b), Ordering::Less);
    }

    #[test]
    fn factorial_and_arithmetic() {
        let a = MultiIndex::new(vec![3, 1, 2]);
        assert_eq!(a.factorial(), BigUint::from(12u32));
        assert_eq!(a.degree(), 6);
        let b = MultiIndex::new(vec![1, 1, 0]);
        assert_eq!(a.checked_sub(&b).unwrap().exps(), &[2, 0, 2]);
        assert!(a.checked_sub(&MultiIndex::new(vec![0, 2, 0])).is_none());
        assert!(b.divides(&a));
        assert_eq!(a.lcm(&b).exps(), &[3, 1, 2]);
    }
}
