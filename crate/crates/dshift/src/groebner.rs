//! Small-scale Buchberger algorithm over exact complex-rational arithmetic.
//!
//! Inputs arrive with `f64` coefficients; every coefficient is converted to
//! an exact rational (every finite `f64` is one), the whole reduction runs
//! exactly, and the reduced basis is converted back at the end. Zero tests
//! during division are therefore exact, which keeps the algorithm
//! deterministic for a fixed monomial order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};

use crate::multiindex::{MonomialOrder, MultiIndex};
use crate::poly::{rational_to_f64, HomogPoly};

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Debug)]
struct QC {
    re: BigRational,
    im: BigRational,
}

impl QC {
    fn zero() -> Self {
        QC {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn from_c64(c: Complex64) -> Self {
        QC {
            re: BigRational::from_f64(c.re).expect("non-finite coefficient"),
            im: BigRational::from_f64(c.im).expect("non-finite coefficient"),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, other: &QC) -> QC {
        QC {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    fn mul(&self, other: &QC) -> QC {
        QC {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    fn div(&self, other: &QC) -> QC {
        let denom = &other.re * &other.re + &other.im * &other.im;
        assert!(!denom.is_zero(), "division by zero coefficient");
        QC {
            re: (&self.re * &other.re + &self.im * &other.im) / denom.clone(),
            im: (&self.im * &other.re - &self.re * &other.im) / denom,
        }
    }

    fn neg(&self) -> QC {
        QC {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// Sparse polynomial with exact coefficients; no degree constraint (reduction
/// of homogeneous inputs stays homogeneous on its own).
#[derive(Clone, PartialEq, Debug)]
struct ExactPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, QC>,
}

impl ExactPoly {
    fn zero(dim: usize) -> Self {
        ExactPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    fn from_homog(p: &HomogPoly) -> Self {
        ExactPoly {
            dim: p.dim(),
            terms: p
                .terms()
                .map(|(a, c)| (a.clone(), QC::from_c64(*c)))
                .collect(),
        }
    }

    fn to_homog(&self) -> HomogPoly {
        HomogPoly::from_terms(self.dim, self.terms.iter().map(|(a, c)| (a.clone(), c.to_c64())))
            .expect("homogeneous by construction")
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn leading(&self, order: &MonomialOrder) -> Option<(&MultiIndex, &QC)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| order.cmp(a, b))
    }

    fn add_scaled_shift(&mut self, other: &ExactPoly, coeff: &QC, shift: &MultiIndex) {
        for (a, c) in &other.terms {
            let key = a.add(shift);
            let v = self
                .terms
                .remove(&key)
                .unwrap_or_else(QC::zero)
                .add(&coeff.mul(c));
            if !v.is_zero() {
                self.terms.insert(key, v);
            }
        }
    }

    fn scaled(&self, coeff: &QC) -> ExactPoly {
        if coeff.is_zero() {
            return ExactPoly::zero(self.dim);
        }
        ExactPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), coeff.mul(c)))
                .collect(),
        }
    }
}

/// Full reduction of `f` modulo `basis`: repeatedly cancels any reducible
/// term, not just the leading one, so the result is a normal form.
fn reduce(f: &ExactPoly, basis: &[ExactPoly], order: &MonomialOrder) -> ExactPoly {
    let leads: Vec<(MultiIndex, QC)> = basis
        .iter()
        .filter_map(|g| g.leading(order).map(|(a, c)| (a.clone(), c.clone())))
        .collect();
    let mut rem = f.clone();
    'outer: loop {
        // Scan terms from the largest down; restart after each cancellation.
        let mut keys: Vec<MultiIndex> = rem.terms.keys().cloned().collect();
        keys.sort_by(|a, b| order.cmp(b, a));
        for key in keys {
            let coeff = match rem.terms.get(&key) {
                Some(c) => c.clone(),
                None => continue,
            };
            for (g, (lead, lead_c)) in basis.iter().zip(&leads) {
                if lead.divides(&key) {
                    let shift = key.checked_sub(lead).unwrap();
                    let factor = coeff.div(lead_c).neg();
                    rem.add_scaled_shift(g, &factor, &shift);
                    continue 'outer;
                }
            }
        }
        break;
    }
    rem
}

fn s_poly(f: &ExactPoly, g: &ExactPoly, order: &MonomialOrder) -> ExactPoly {
    let (lf, cf) = f.leading(order).expect("nonzero");
    let (lg, cg) = g.leading(order).expect("nonzero");
    let lcm = lf.lcm(lg);
    let mut s = ExactPoly::zero(f.dim);
    let one = QC::from_c64(Complex64::ONE);
    s.add_scaled_shift(f, &one.div(cf), &lcm.checked_sub(lf).unwrap());
    s.add_scaled_shift(g, &one.div(cg).neg(), &lcm.checked_sub(lg).unwrap());
    s
}

/// Computes a reduced Groebner basis of the ideal generated by the inputs.
///
/// Homogeneous inputs yield homogeneous basis elements; the output is monic,
/// interreduced, and sorted by leading term (largest first), hence
/// deterministic for a fixed order. Zero generators are ignored.
pub fn buchberger(generators: &[HomogPoly], order: &MonomialOrder) -> Vec<HomogPoly> {
    let mut basis: Vec<ExactPoly> = generators
        .iter()
        .filter(|p| !p.is_zero())
        .map(ExactPoly::from_homog)
        .collect();
    if basis.is_empty() {
        return Vec::new();
    }
    for p in generators {
        assert_eq!(p.dim(), generators[0].dim(), "dimension mismatch");
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pairs.push((i, j));
        }
    }
    while let Some(&(i, j)) = pairs.first() {
        // Process pairs with the smallest lcm first (normal selection).
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, (i1, j1)), (_, (i2, j2))| {
                let l1 = lead(&basis[*i1], order).lcm(&lead(&basis[*j1], order));
                let l2 = lead(&basis[*i2], order).lcm(&lead(&basis[*j2], order));
                order.cmp(&l1, &l2).then((i1, j1).cmp(&(i2, j2)))
            })
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        let (i, j) = if best == 0 { (i, j) } else { pairs[best] };
        pairs.swap_remove(best);

        // Buchberger's first criterion: coprime leading terms reduce to zero.
        let li = lead(&basis[i], order);
        let lj = lead(&basis[j], order);
        if li.add(&lj) == li.lcm(&lj) {
            continue;
        }
        let s = s_poly(&basis[i], &basis[j], order);
        let r = reduce(&s, &basis, order);
        if !r.is_zero() {
            let k = basis.len();
            for idx in 0..k {
                pairs.push((idx, k));
            }
            basis.push(r);
        }
    }

    // Interreduce: drop elements whose leading term is divisible by another
    // leading term, then fully reduce each survivor against the others.
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if i != j && keep[j] {
                let li = lead(&basis[i], order);
                let lj = lead(&basis[j], order);
                if lj.divides(&li) && (li != lj || j < i) {
                    keep[i] = false;
                    break;
                }
            }
        }
    }
    let survivors: Vec<ExactPoly> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    let mut reduced: Vec<ExactPoly> = Vec::with_capacity(survivors.len());
    for i in 0..survivors.len() {
        let others: Vec<ExactPoly> = survivors
            .iter()
            .enumerate()
            .filter_map(|(j, p)| (j != i).then(|| p.clone()))
            .collect();
        let r = reduce(&survivors[i], &others, order);
        if !r.is_zero() {
            let (_, lc) = r.leading(order).map(|(a, c)| (a.clone(), c.clone())).unwrap();
            let one = QC::from_c64(Complex64::ONE);
            reduced.push(r.scaled(&one.div(&lc)));
        }
    }
    reduced.sort_by(|a, b| order.cmp(lead(b, order), lead(a, order)));
    reduced.iter().map(ExactPoly::to_homog).collect()
}

fn lead<'a>(p: &'a ExactPoly, order: &MonomialOrder) -> &'a MultiIndex {
    p.leading(order).expect("nonzero basis element").0
}

/// Normal form of `f` modulo `basis` (exact division remainder). A zero
/// remainder certifies ideal membership when `basis` is a Groebner basis.
pub fn normal_form(f: &HomogPoly, basis: &[HomogPoly], order: &MonomialOrder) -> HomogPoly {
    let exact_basis: Vec<ExactPoly> = basis
        .iter()
        .filter(|p| !p.is_zero())
        .map(ExactPoly::from_homog)
        .collect();
    reduce(&ExactPoly::from_homog(f), &exact_basis, order).to_homog()
}
