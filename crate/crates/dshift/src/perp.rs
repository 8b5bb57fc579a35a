//! Perpendicularity certificates for families of submodules.
//!
//! A family is perpendicular exactly when its projections commute, so the
//! definitive numeric check is the per-degree commutator norm
//! `‖P_iP_j − P_jP_i‖`. Cheaper sufficient criteria are layered on top: the
//! frame-operator test (if the operators `Σ_j M_{p_ij}M_{p_ij}^*` pairwise
//! commute, the family is perpendicular), syntactic rules for monomial /
//! disjoint-variable / orthogonal-linear generator sets, and orthogonality of
//! top-order partials or gradient spans. Sufficient criteria that fail never
//! produce a "not perpendicular" verdict.
//!
//! The frame-operator machinery rests on an expansion of `M_p^*M_q` as a
//! weighted sum of operators `M_{∂^α q}M_{∂^α p}^*` whose scalar weights are
//! number-operator brackets `[f(N)]` built from factorial ratios. Two sign
//! variants of the bracket are implemented (see [`BracketVariant`]); the
//! matrix-level checks [`verify_guo_wang`] and [`commutator_formula_check`]
//! arbitrate between them empirically, and the `Corrected` variant is the
//! default once confirmed.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{operator_norm, CMat};
use crate::multiindex::MultiIndex;
use crate::poly::{rational_to_f64, HomogPoly};
use crate::slices::{multiplication_block, GradedSubmodule};

/// Default tolerance on commutator norms; verdicts use a 10× hysteresis band.
pub const DEFAULT_COMM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Perpendicular,
    NotPerpendicular,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Projections,
    FrameOperators,
    LinearRule,
    MonomialRule,
    DisjointVars,
    DerivativeOrth,
    GradientOrth,
}

/// Vector witnessing a failed commutation, with the degree and pair it lives
/// on.
#[derive(Clone, Debug, Serialize)]
pub struct PerpWitness {
    pub degree: u32,
    pub pair: (usize, usize),
    pub commutator_norm: f64,
    /// Coordinates (re, im) in the ambient slice basis of the degree.
    pub vector: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCommutator {
    pub degree: u32,
    pub max_commutator: f64,
}

/// Outcome of a perpendicularity check.
///
/// "Perpendicular" requires every checked commutator below tolerance with the
/// criterion's hypotheses verified; "not perpendicular" requires a concrete
/// witness with commutator norm above 10× tolerance; everything in between is
/// inconclusive.
#[derive(Clone, Debug, Serialize)]
pub struct PerpCertificate {
    pub verdict: Verdict,
    pub criterion: Criterion,
    pub max_commutator: f64,
    pub per_degree: Vec<DegreeCommutator>,
    pub witness: Option<PerpWitness>,
}

fn verdict_from_norms(max_comm: f64, tol: f64, witness: Option<PerpWitness>) -> (Verdict, Option<PerpWitness>) {
    if max_comm < tol {
        (Verdict::Perpendicular, None)
    } else if max_comm > 10.0 * tol {
        (Verdict::NotPerpendicular, witness)
    } else {
        (Verdict::Inconclusive, None)
    }
}

/// Definitive per-degree check: commutators of the slice projections.
pub fn projections_commute(
    modules: &[GradedSubmodule],
    degrees: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> PerpCertificate {
    let rank_tol = crate::poly::DEFAULT_RANK_TOL;
    let ks: Vec<u32> = degrees.collect();
    let rows: Vec<(DegreeCommutator, Option<PerpWitness>)> = ks
        .par_iter()
        .map(|&k| {
            let projections: Vec<CMat> = modules
                .iter()
                .map(|m| m.slice(k, rank_tol).projection())
                .collect();
            let mut max_comm = 0.0f64;
            let mut witness = None;
            for i in 0..projections.len() {
                for j in (i + 1)..projections.len() {
                    let comm = &projections[i] * &projections[j]
                        - &projections[j] * &projections[i];
                    let svd = comm.clone().svd(false, true);
                    let (norm, top) = {
                        let mut best = (0.0f64, 0usize);
                        for (idx, s) in svd.singular_values.iter().enumerate() {
                            if *s > best.0 {
                                best = (*s, idx);
                            }
                        }
                        best
                    };
                    if norm > max_comm {
                        max_comm = norm;
                        witness = svd.v_t.as_ref().map(|vt| PerpWitness {
                            degree: k,
                            pair: (i, j),
                            commutator_norm: norm,
                            vector: vt
                                .row(top)
                                .iter()
                                .map(|c| {
                                    let v = c.conj();
                                    (v.re, v.im)
                                })
                                .collect(),
                        });
                    }
                }
            }
            (
                DegreeCommutator {
                    degree: k,
                    max_commutator: max_comm,
                },
                witness,
            )
        })
        .collect();

    let mut per_degree = Vec::with_capacity(rows.len());
    let mut max_comm = 0.0f64;
    let mut witness = None;
    for (row, w) in rows {
        if row.max_commutator > max_comm {
            max_comm = row.max_commutator;
            witness = w;
        }
        per_degree.push(row);
    }
    let (verdict, witness) = verdict_from_norms(max_comm, tol, witness);
    PerpCertificate {
        verdict,
        criterion: Criterion::Projections,
        max_commutator: max_comm,
        per_degree,
        witness,
    }
}

/// Per-degree frame operator `Σ_j M_{p_j}M_{p_j}^*` of one generator family,
/// as a matrix on the degree-`k` ambient slice.
pub fn frame_operator_block(family: &[HomogPoly], k: u32) -> CMat {
    let d = family[0].dim();
    let dk = crate::multiindex::slice_dimension(d, k);
    let mut g = CMat::zeros(dk, dk);
    for p in family {
        if p.degree() <= k && !p.is_zero() {
            let a = multiplication_block(p, 1, k - p.degree());
            g += &a * a.adjoint();
        }
    }
    g
}

/// Sufficient criterion: if the frame operators of the families pairwise
/// commute, the family of generated submodules is perpendicular. A failed
/// commutator here is inconclusive, never a refutation.
pub fn frame_operators_commute(
    families: &[Vec<HomogPoly>],
    degrees: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> PerpCertificate {
    let ks: Vec<u32> = degrees.collect();
    let rows: Vec<DegreeCommutator> = ks
        .par_iter()
        .map(|&k| {
            let blocks: Vec<CMat> = families
                .iter()
                .map(|fam| frame_operator_block(fam, k))
                .collect();
            let mut max_comm = 0.0f64;
            for i in 0..blocks.len() {
                for j in (i + 1)..blocks.len() {
                    let scale = (operator_norm(&blocks[i]) * operator_norm(&blocks[j])).max(1.0);
                    let comm = &blocks[i] * &blocks[j] - &blocks[j] * &blocks[i];
                    max_comm = max_comm.max(operator_norm(&comm) / scale);
                }
            }
            DegreeCommutator {
                degree: k,
                max_commutator: max_comm,
            }
        })
        .collect();
    let max_comm = rows.iter().map(|r| r.max_commutator).fold(0.0, f64::max);
    let verdict = if max_comm < tol {
        Verdict::Perpendicular
    } else {
        Verdict::Inconclusive
    };
    PerpCertificate {
        verdict,
        criterion: Criterion::FrameOperators,
        max_commutator: max_comm,
        per_degree: rows,
        witness: None,
    }
}

/// Which reading of the printed bracket exponents to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketVariant {
    /// Exponent signs as printed: `(N−n−|α|)!` and `(N−m−n−|α|)!`.
    Paper,
    /// Derivation-consistent signs: `(N−n+|α|)!` and `(N−m−n+|α|)!`.
    Corrected,
}

/// A number-operator bracket `[f(N)]`: a scalar factorial-ratio function of
/// the degree. Evaluation annihilates (returns 0) exactly when a falling
/// factorial runs through a negative argument.
#[derive(Clone, Debug)]
pub struct BracketFn {
    /// Numerator factorial arguments as offsets from the degree.
    num: [i64; 2],
    /// Denominator factorial arguments as offsets from the degree.
    den: [i64; 2],
}

impl BracketFn {
    /// Bracket of the adjoint-product expansion
    /// `M_p^*M_q = Σ_α (1/α!)·[N!(N+m−n)!/((N+m)!(N−n±|α|)!)]·M_{∂^α q}M_{∂^α p}^*`
    /// for `deg p = m`, `deg q = n`; it multiplies vectors of degree
    /// `deg f − m + n`.
    pub fn guo_wang(m: u32, n: u32, alpha_abs: u32, variant: BracketVariant) -> Self {
        let (m, n, a) = (i64::from(m), i64::from(n), i64::from(alpha_abs));
        let sign = match variant {
            BracketVariant::Paper => -1,
            BracketVariant::Corrected => 1,
        };
        BracketFn {
            num: [0, m - n],
            den: [m, -n + sign * a],
        }
    }

    /// Bracket of the frame-operator commutator expansion,
    /// `[(N−m)!(N−n)!/(N!(N−m−n±|α|)!)]`, evaluated at the degree of the
    /// (degree-preserving) operand.
    pub fn commutator(m: u32, n: u32, alpha_abs: u32, variant: BracketVariant) -> Self {
        let (m, n, a) = (i64::from(m), i64::from(n), i64::from(alpha_abs));
        let sign = match variant {
            BracketVariant::Paper => -1,
            BracketVariant::Corrected => 1,
        };
        BracketFn {
            num: [-m, -n],
            den: [0, -m - n + sign * a],
        }
    }

    /// Evaluates at degree `k` (exact rational arithmetic, rounded at the
    /// end). Any negative factorial argument annihilates the value.
    pub fn eval(&self, k: i64) -> f64 {
        let mut num = BigRational::one();
        for off in self.num {
            match factorial(k + off) {
                Some(f) => num *= BigRational::from_integer(f),
                None => return 0.0,
            }
        }
        for off in self.den {
            match factorial(k + off) {
                Some(f) => num /= BigRational::from_integer(f),
                None => return 0.0,
            }
        }
        rational_to_f64(&num)
    }
}

fn factorial(x: i64) -> Option<BigInt> {
    if x < 0 {
        return None;
    }
    let mut acc = BigInt::one();
    for j in 2..=x {
        acc *= j;
    }
    Some(acc)
}

/// `M_g^* f` for homogeneous scalar `g` and `f`:
/// `((k−l)!/k!)·Σ_γ conj(g_γ)·∂^γ f` with `l = deg g`, `k = deg f`; zero when
/// `k < l`.
pub fn adjoint_multiply_apply(g: &HomogPoly, f: &HomogPoly) -> HomogPoly {
    assert_eq!(g.dim(), f.dim());
    let (l, k) = (g.degree(), f.degree());
    if k < l || g.is_zero() || f.is_zero() {
        return HomogPoly::zero(f.dim(), k.saturating_sub(l));
    }
    // (k−l)!/k! = 1/(k·(k−1)⋯(k−l+1))
    let mut scale = 1.0f64;
    for j in 0..l {
        scale /= f64::from(k - j);
    }
    let mut acc = HomogPoly::zero(f.dim(), k - l);
    for (gamma, c) in g.terms() {
        let term = f.partial(gamma).scale(c.conj() * scale);
        acc = acc.add(&term);
    }
    acc
}

/// Multi-indices `α` (including 0) with `∂^α p ≠ 0`.
fn partial_support(p: &HomogPoly) -> Vec<MultiIndex> {
    let d = p.dim();
    let mut max_exp = vec![0u32; d];
    for (alpha, _) in p.terms() {
        for i in 0..d {
            max_exp[i] = max_exp[i].max(alpha.exp(i));
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    enumerate_box(&max_exp, 0, &mut current, &mut out);
    out.retain(|a| !p.partial(a).is_zero());
    out
}

fn enumerate_box(bounds: &[u32], var: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if var == bounds.len() {
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for e in 0..=bounds[var] {
        current[var] = e;
        enumerate_box(bounds, var + 1, current, out);
    }
    current[var] = 0;
}

/// The adjoint-product expansion applied to `f`:
/// `Σ_α (1/α!)·[bracket]·(∂^α q)·(M_{∂^α p}^* f)`, the bracket evaluated at
/// the output degree `deg f − deg p + deg q`.
pub fn guo_wang_apply(
    p: &HomogPoly,
    q: &HomogPoly,
    f: &HomogPoly,
    variant: BracketVariant,
) -> HomogPoly {
    assert_eq!(p.dim(), q.dim());
    assert_eq!(p.dim(), f.dim());
    let (m, n, k) = (p.degree(), q.degree(), f.degree());
    let out_degree = i64::from(k) + i64::from(n) - i64::from(m);
    if out_degree < 0 {
        return HomogPoly::zero(f.dim(), 0);
    }
    let out_degree_u = out_degree as u32;
    let mut acc = HomogPoly::zero(f.dim(), out_degree_u);
    for alpha in partial_support(p) {
        let dq = q.partial(&alpha);
        if dq.is_zero() {
            continue;
        }
        let dp = p.partial(&alpha);
        let lowered = adjoint_multiply_apply(&dp, f);
        if lowered.is_zero() {
            continue;
        }
        let bracket = BracketFn::guo_wang(m, n, alpha.degree(), variant).eval(out_degree);
        if bracket == 0.0 {
            continue;
        }
        let inv_alpha_fact =
            1.0 / rational_to_f64(&BigRational::from_integer(BigInt::from(alpha.factorial())));
        let term = dq.multiply(&lowered).scale(Complex64::from(bracket * inv_alpha_fact));
        acc = acc.add(&term);
    }
    acc
}

/// Largest deviation, over all monomials of degree up to `max_degree`,
/// between `M_p^*M_q` computed from multiplication-block matrices and the
/// bracket expansion [`guo_wang_apply`]. The two routes share no code: the
/// left side is dense matrix algebra on normalized slices, the right side is
/// exact polynomial differentiation.
pub fn verify_guo_wang(
    p: &HomogPoly,
    q: &HomogPoly,
    max_degree: u32,
    variant: BracketVariant,
) -> f64 {
    assert_eq!(p.dim(), q.dim());
    let d = p.dim();
    let (m, n) = (p.degree(), q.degree());
    let mut max_residual = 0.0f64;
    for k in 0..=max_degree {
        let source = crate::slices::AmbientBasis::new(d, 1, k);
        let out_degree = i64::from(k) + i64::from(n) - i64::from(m);
        // LHS block: (M_p block into degree k+n)^H · (M_q block from degree k).
        let mq = multiplication_block(q, 1, k);
        let lhs_block = if out_degree >= 0 {
            let mp = multiplication_block(p, 1, out_degree as u32);
            Some(mp.adjoint() * &mq)
        } else {
            None
        };
        let target = (out_degree >= 0)
            .then(|| crate::slices::AmbientBasis::new(d, 1, out_degree as u32));
        for (col, beta) in source.monomials().iter().enumerate() {
            // Normalized basis monomial e_β.
            let scale = 1.0 / crate::poly::da_weight_f64(beta).sqrt();
            let f = HomogPoly::monomial(beta.clone(), Complex64::from(scale));
            let rhs = guo_wang_apply(p, q, &f, variant);
            let residual = match (&lhs_block, &target) {
                (Some(block), Some(t)) => {
                    let lhs_col = block.column(col).into_owned();
                    let rhs_col = t.coords(&crate::poly::VectorPoly::scalar(&rhs));
                    (lhs_col - rhs_col).norm()
                }
                _ => crate::poly::da_norm(&crate::poly::VectorPoly::scalar(&rhs)),
            };
            max_residual = max_residual.max(residual);
        }
    }
    max_residual
}

/// Outcome of the frame-operator commutator identity check.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorCheck {
    pub max_residual: f64,
    pub max_lhs_norm: f64,
}

/// Checks, degree by degree, the expansion of
/// `M_pM_p^*M_qM_q^* − M_qM_q^*M_pM_p^*` as
/// `Σ_{α≠0} (1/α!)·[bracket]·(T_α − T_α^H)` with
/// `T_α = M_pM_{∂^α q}M_{∂^α p}^*M_q^*`, computing the left side directly
/// from multiplication blocks.
pub fn commutator_formula_check(
    p: &HomogPoly,
    q: &HomogPoly,
    max_degree: u32,
    variant: BracketVariant,
) -> CommutatorCheck {
    assert_eq!(p.dim(), q.dim());
    let (m, n) = (p.degree(), q.degree());
    let mut max_residual = 0.0f64;
    let mut max_lhs = 0.0f64;
    for k in 0..=max_degree {
        let gp = frame_operator_block(std::slice::from_ref(p), k);
        let gq = frame_operator_block(std::slice::from_ref(q), k);
        let lhs = &gp * &gq - &gq * &gp;
        max_lhs = max_lhs.max(operator_norm(&lhs));

        let dk = gp.nrows();
        let mut rhs = CMat::zeros(dk, dk);
        if k >= m && k >= n {
            for alpha in partial_support(p) {
                let a = alpha.degree();
                if a == 0 {
                    continue;
                }
                let dq = q.partial(&alpha);
                if dq.is_zero() {
                    continue;
                }
                // T_α needs source degree k−n−m+|α| ≥ 0.
                let low = i64::from(k) - i64::from(n) - i64::from(m) + i64::from(a);
                if low < 0 {
                    continue;
                }
                let bracket = BracketFn::commutator(m, n, a, variant).eval(i64::from(k));
                if bracket == 0.0 {
                    continue;
                }
                let dp = p.partial(&alpha);
                let low = low as u32;
                let b_q = multiplication_block(q, 1, k - n);
                let b_dp = multiplication_block(&dp, 1, low);
                let b_dq = multiplication_block(&dq, 1, low);
                let b_p = multiplication_block(p, 1, k - m);
                let t = b_p * (b_dq * (b_dp.adjoint() * b_q.adjoint()));
                let skew = &t - t.adjoint();
                let inv_alpha_fact = 1.0
                    / rational_to_f64(&BigRational::from_integer(BigInt::from(
                        alpha.factorial(),
                    )));
                rhs += skew * Complex64::from(bracket * inv_alpha_fact);
            }
        }
        max_residual = max_residual.max(operator_norm(&(lhs - rhs)));
    }
    CommutatorCheck {
        max_residual,
        max_lhs_norm: max_lhs,
    }
}

/// How a pair verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairTier {
    /// Exact rule for linear pairs: commute iff colinear or orthogonal.
    LinearSymbolic,
    /// Every `T_α` (α ≠ 0) self-adjoint — sufficient.
    PerAlphaSelfAdjoint,
    /// Direct frame-block commutators over the swept degrees.
    DirectBlocks,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairVerdict {
    pub verdict: Verdict,
    pub tier: PairTier,
    pub max_commutator: f64,
}

/// Do `M_pM_p^*` and `M_qM_q^*` commute? Three tiers: the exact linear rule,
/// the per-α self-adjointness criterion, and the direct commutator of frame
/// blocks over the degree range (definitive up to the cutoff).
pub fn pair_commutes(
    p: &HomogPoly,
    q: &HomogPoly,
    degrees: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> PairVerdict {
    assert_eq!(p.dim(), q.dim());
    // (c) both linear: commute iff p, q colinear or ⟨p,q⟩ = 0.
    if p.degree() == 1 && q.degree() == 1 && !p.is_zero() && !q.is_zero() {
        let ip = p.da_inner(q).expect("same dimension").norm();
        let bound = p.da_norm() * q.da_norm();
        let verdict = if p.colinear_with(q, 1e-12) || ip <= 1e-12 * bound {
            Verdict::Perpendicular
        } else {
            Verdict::NotPerpendicular
        };
        return PairVerdict {
            verdict,
            tier: PairTier::LinearSymbolic,
            max_commutator: f64::NAN,
        };
    }

    // (b) sufficient: every T_α self-adjoint across the swept degrees.
    let ks: Vec<u32> = degrees.clone().collect();
    let mut self_adjoint = true;
    'outer: for &k in &ks {
        if k < p.degree() || k < q.degree() {
            continue;
        }
        for alpha in partial_support(p) {
            if alpha.degree() == 0 {
                continue;
            }
            let dq = q.partial(&alpha);
            if dq.is_zero() {
                continue;
            }
            let low =
                i64::from(k) - i64::from(q.degree()) - i64::from(p.degree()) + i64::from(alpha.degree());
            if low < 0 {
                continue;
            }
            let dp = p.partial(&alpha);
            let b_q = multiplication_block(q, 1, k - q.degree());
            let b_dp = multiplication_block(&dp, 1, low as u32);
            let b_dq = multiplication_block(&dq, 1, low as u32);
            let b_p = multiplication_block(p, 1, k - p.degree());
            let t = b_p * (b_dq * (b_dp.adjoint() * b_q.adjoint()));
            if operator_norm(&(&t - t.adjoint())) > tol * operator_norm(&t).max(1.0) {
                self_adjoint = false;
                break 'outer;
            }
        }
    }
    if self_adjoint {
        return PairVerdict {
            verdict: Verdict::Perpendicular,
            tier: PairTier::PerAlphaSelfAdjoint,
            max_commutator: 0.0,
        };
    }

    // (a) direct commutators of the frame blocks.
    let mut max_comm = 0.0f64;
    for &k in &ks {
        let gp = frame_operator_block(std::slice::from_ref(p), k);
        let gq = frame_operator_block(std::slice::from_ref(q), k);
        let scale = (operator_norm(&gp) * operator_norm(&gq)).max(1.0);
        max_comm = max_comm.max(operator_norm(&(&gp * &gq - &gq * &gp)) / scale);
    }
    let (verdict, _) = verdict_from_norms(max_comm, tol, None);
    PairVerdict {
        verdict,
        tier: PairTier::DirectBlocks,
        max_commutator: max_comm,
    }
}

/// Pairwise outcome of a syntactic orthogonality test between families.
#[derive(Clone, Debug, Serialize)]
pub struct PairOrth {
    pub families: (usize, usize),
    pub orthogonal: bool,
    pub max_overlap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthPairReport {
    pub pairwise: Vec<PairOrth>,
    pub all_orthogonal: bool,
}

/// Tests mutual orthogonality of the sets `{∂^α p : |α| = deg p − 1}` across
/// families; a pass certifies perpendicularity of the generated submodules.
pub fn derivative_orthogonality(families: &[Vec<HomogPoly>], tol: f64) -> OrthPairReport {
    let sets: Vec<Vec<HomogPoly>> = families
        .iter()
        .map(|fam| {
            let mut set = Vec::new();
            for p in fam {
                if p.is_zero() {
                    continue;
                }
                for alpha in crate::multiindex::enumerate_monomials(p.dim(), p.degree() - 1) {
                    let d = p.partial(&alpha);
                    if !d.is_zero() {
                        set.push(d);
                    }
                }
            }
            set
        })
        .collect();
    pairwise_orthogonality(&sets, tol, |a, b| {
        let mut worst = 0.0f64;
        for u in a {
            for v in b {
                let ip = u.da_inner(v).expect("same dimension").norm();
                worst = worst.max(ip / (u.da_norm() * v.da_norm()));
            }
        }
        worst
    })
}

/// Tests mutual orthogonality of the gradient spans `span{∇p(z) : z ∈ ℂ^d}`
/// across families. The span of one polynomial's gradients is the span of the
/// vectors `v_β = (coeff of z^β in ∂_1 p, …, ∂_d p)` over monomials `β`.
pub fn gradient_orthogonality(families: &[Vec<HomogPoly>], tol: f64) -> OrthPairReport {
    let spans: Vec<CMat> = families
        .iter()
        .map(|fam| {
            let d = fam[0].dim();
            let mut columns: Vec<nalgebra::DVector<Complex64>> = Vec::new();
            for p in fam {
                let partials: Vec<HomogPoly> = (0..d).map(|i| p.partial_var(i)).collect();
                let mut betas = std::collections::BTreeSet::new();
                for dp in &partials {
                    for (beta, _) in dp.terms() {
                        betas.insert(beta.clone());
                    }
                }
                for beta in betas {
                    let v = nalgebra::DVector::from_fn(d, |i, _| partials[i].coeff(&beta));
                    columns.push(v);
                }
            }
            if columns.is_empty() {
                CMat::zeros(d, 0)
            } else {
                crate::linalg::orthonormalize_cols(&CMat::from_columns(&columns), 1e-12)
            }
        })
        .collect();
    pairwise_orthogonality(&spans, tol, |u, v| operator_norm(&(u.adjoint() * v)))
}

fn pairwise_orthogonality<T, F>(sets: &[T], tol: f64, overlap: F) -> OrthPairReport
where
    F: Fn(&T, &T) -> f64,
{
    let mut pairwise = Vec::new();
    let mut all = true;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let max_overlap = overlap(&sets[i], &sets[j]);
            let orthogonal = max_overlap <= tol;
            all &= orthogonal;
            pairwise.push(PairOrth {
                families: (i, j),
                orthogonal,
                max_overlap,
            });
        }
    }
    OrthPairReport {
        pairwise,
        all_orthogonal: all,
    }
}

impl OrthPairReport {
    fn max_overlap(&self) -> f64 {
        self.pairwise.iter().map(|p| p.max_overlap).fold(0.0, f64::max)
    }
}

/// Syntactic classification of rank-1 generator families for the cheap
/// perpendicularity rules: all monomials, disjoint variable supports, or
/// mutually orthogonal linear sets.
pub fn syntactic_criterion(families: &[Vec<HomogPoly>]) -> Option<Criterion> {
    if families
        .iter()
        .all(|fam| fam.iter().all(HomogPoly::is_monomial))
    {
        return Some(Criterion::MonomialRule);
    }
    let supports: Vec<std::collections::BTreeSet<usize>> = families
        .iter()
        .map(|fam| {
            fam.iter()
                .flat_map(HomogPoly::support_vars)
                .collect()
        })
        .collect();
    let disjoint = (0..supports.len()).all(|i| {
        ((i + 1)..supports.len()).all(|j| supports[i].is_disjoint(&supports[j]))
    });
    if disjoint {
        return Some(Criterion::DisjointVars);
    }
    let all_linear = families
        .iter()
        .all(|fam| fam.iter().all(HomogPoly::is_linear));
    if all_linear {
        let mut orthogonal = true;
        for i in 0..families.len() {
            for j in (i + 1)..families.len() {
                for u in &families[i] {
                    for v in &families[j] {
                        let ip = u.da_inner(v).expect("same dimension").norm();
                        if ip > 1e-12 * u.da_norm() * v.da_norm() {
                            orthogonal = false;
                        }
                    }
                }
            }
        }
        if orthogonal {
            return Some(Criterion::LinearRule);
        }
    }
    None
}

/// Combined entry point used by the CLI: runs the definitive projection check
/// and, when the modules are rank-1 with scalar generators, refines the
/// criterion tag with the matching syntactic rule or the orthogonality tests.
pub fn certify_perpendicularity(
    modules: &[GradedSubmodule],
    degrees: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> PerpCertificate {
    let mut cert = projections_commute(modules, degrees, tol);
    if cert.verdict != Verdict::Perpendicular {
        return cert;
    }
    let scalar_families: Option<Vec<Vec<HomogPoly>>> = modules
        .iter()
        .map(|m| {
            (m.rank() == 1)
                .then(|| {
                    m.generators()
                        .iter()
                        .map(|g| g.component(0).clone())
                        .collect()
                })
        })
        .collect();
    if let Some(families) = scalar_families {
        if let Some(c) = syntactic_criterion(&families) {
            cert.criterion = c;
        } else if derivative_orthogonality(&families, 1e-12).all_orthogonal {
            cert.criterion = Criterion::DerivativeOrth;
        } else if gradient_orthogonality(&families, 1e-12).all_orthogonal {
            cert.criterion = Criterion::GradientOrth;
        }
    }
    cert
}

/// Reports the numeric overlap behind [`derivative_orthogonality`] /
/// [`gradient_orthogonality`] as a certificate.
pub fn orthogonality_certificate(report: &OrthPairReport, criterion: Criterion) -> PerpCertificate {
    PerpCertificate {
        verdict: if report.all_orthogonal {
            Verdict::Perpendicular
        } else {
            Verdict::Inconclusive
        },
        criterion,
        max_commutator: report.max_overlap(),
        per_degree: Vec::new(),
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_homog_poly;
    use approx::assert_relative_eq;

    fn p(text: &str, dim: usize) -> HomogPoly {
        parse_homog_poly(text, dim).unwrap()
    }

    fn scalar_module(label: &str, texts: &[&str], dim: usize) -> GradedSubmodule {
        let polys: Vec<HomogPoly> = texts.iter().map(|t| p(t, dim)).collect();
        GradedSubmodule::from_scalar_generators(label, &polys).unwrap()
    }

    #[test]
    fn coordinate_modules_are_perpendicular() {
        let modules = vec![
            scalar_module("N1", &["z1"], 3),
            scalar_module("N2", &["z2"], 3),
            scalar_module("N3", &["z3"], 3),
        ];
        let cert = projections_commute(&modules, 1..=6, DEFAULT_COMM_TOL);
        assert_eq!(cert.verdict, Verdict::Perpendicular);
        assert!(cert.max_commutator < 1e-12);
    }

    #[test]
    fn overlapping_lines_are_not_perpendicular() {
        let modules = vec![
            scalar_module("N1", &["z1"], 2),
            scalar_module("N2", &["z1 + z2"], 2),
        ];
        let cert = projections_commute(&modules, 1..=4, DEFAULT_COMM_TOL);
        assert_eq!(cert.verdict, Verdict::NotPerpendicular);
        let w = cert.witness.expect("witness required");
        assert_eq!(w.degree, 1);
        assert!(w.commutator_norm > 0.4);
    }

    #[test]
    fn duplicated_module_is_perpendicular_to_itself() {
        let n = scalar_module("N", &["z1^2 + z2^2"], 2);
        let cert = projections_commute(&[n.clone(), n], 2..=5, DEFAULT_COMM_TOL);
        assert_eq!(cert.verdict, Verdict::Perpendicular);
    }

    #[test]
    fn frame_criterion_on_batteries() {
        // Monomial families always pass.
        let fams = vec![vec![p("z1^2", 3), p("z1*z2", 3)], vec![p("z3", 3)]];
        let cert = frame_operators_commute(&fams, 0..=6, DEFAULT_COMM_TOL);
        assert_eq!(cert.verdict, Verdict::Perpendicular);

        // Disjoint-variable families pass.
        let fams = vec![vec![p("z1^2 + z2^2", 4)], vec![p("z3*z4", 4)]];
        let cert = frame_operators_commute(&fams, 0..=6, DEFAULT_COMM_TOL);
        assert_eq!(cert.verdict, Verdict::Perpendicular);

        // Overlapping non-orthogonal linear pair: inconclusive here, while
        // the projection check refutes it outright.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = HomogPoly::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![1, 0]), Complex64::from(s)),
                (MultiIndex::new(vec![0, 1]), Complex64::from(s)),
            ],
        )
        .unwrap();
        let fams = vec![vec![p("z1", 2)], vec![mixed]];
        let cert = frame_operators_commute(&fams, 0..=5, DEFAULT_COMM_TOL);
        assert_eq!(cert.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn corrected_bracket_reproduces_the_diagonal_action() {
        // p = q = z1 on z1^k: both sides act as the identity.
        let z1 = p("z1", 1);
        for k in 0..8u32 {
            let f = HomogPoly::monomial(MultiIndex::new(vec![k]), Complex64::ONE);
            let rhs = guo_wang_apply(&z1, &z1, &f, BracketVariant::Corrected);
            let diff = rhs.sub(&f);
            assert!(crate::poly::da_norm(&crate::poly::VectorPoly::scalar(&diff)) < 1e-13);
        }
    }

    #[test]
    fn monomial_weight_ratio_oracle() {
        // p = q = z^γ acts diagonally with eigenvalue ‖z^{β+γ}‖²/‖z^β‖².
        let gamma = MultiIndex::new(vec![1, 2]);
        let zg = HomogPoly::monomial(gamma.clone(), Complex64::ONE);
        for beta in crate::multiindex::enumerate_monomials(2, 3) {
            let f = HomogPoly::monomial(beta.clone(), Complex64::ONE);
            let rhs = guo_wang_apply(&zg, &zg, &f, BracketVariant::Corrected);
            let expected = crate::poly::da_weight_f64(&beta.add(&gamma))
                / crate::poly::da_weight_f64(&beta);
            let got = rhs.coeff(&beta);
            assert_relative_eq!(got.re, expected, epsilon = 1e-12);
            assert_eq!(rhs.num_terms(), 1);
        }
    }

    #[test]
    fn disjoint_variables_leave_only_the_alpha_zero_term() {
        // ∂^α p and ∂^α q never both survive, so the expansion collapses.
        let pp = p("z1^2", 3);
        let qq = p("z2*z3", 3);
        let f = p("z1^2*z2", 3);
        let rhs = guo_wang_apply(&pp, &qq, &f, BracketVariant::Corrected);
        // α = 0 term alone: [bracket]·q·(M_p^* f).
        let bracket = BracketFn::guo_wang(2, 2, 0, BracketVariant::Corrected)
            .eval(i64::from(f.degree()));
        let expected = qq
            .multiply(&adjoint_multiply_apply(&pp, &f))
            .scale(Complex64::from(bracket));
        let diff = rhs.sub(&expected);
        assert!(crate::poly::da_norm(&crate::poly::VectorPoly::scalar(&diff)) < 1e-13);
    }

    #[test]
    fn verify_guo_wang_arbitrates_variants() {
        let z1 = p("z1", 1);
        let corrected = verify_guo_wang(&z1, &z1, 8, BracketVariant::Corrected);
        assert!(corrected < 1e-12, "corrected residual {corrected}");
        let paper = verify_guo_wang(&z1, &z1, 8, BracketVariant::Paper);
        assert!(paper > 1e-6, "paper-variant residual {paper}");
    }

    #[test]
    fn verify_guo_wang_on_mixed_pair() {
        let a = p("z1^2 + z2*z3", 3);
        let b = p("z2^2", 3);
        let corrected = verify_guo_wang(&a, &b, 8, BracketVariant::Corrected);
        assert!(corrected < 1e-10, "corrected residual {corrected}");
    }

    #[test]
    fn commutator_formula_examples() {
        // Monomials: both sides vanish.
        let check = commutator_formula_check(&p("z1*z2", 3), &p("z2^2", 3), 8, BracketVariant::Corrected);
        assert!(check.max_residual < 1e-12);
        assert!(check.max_lhs_norm < 1e-12);

        // Disjoint variables: the left side is exactly zero.
        let check = commutator_formula_check(&p("z1", 2), &p("z2", 2), 8, BracketVariant::Corrected);
        assert!(check.max_lhs_norm < 1e-14);
        assert!(check.max_residual < 1e-14);

        // Non-commuting linear pair: nonzero left side, identity still holds.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = HomogPoly::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![1, 0]), Complex64::from(s)),
                (MultiIndex::new(vec![0, 1]), Complex64::from(s)),
            ],
        )
        .unwrap();
        let check = commutator_formula_check(&p("z1", 2), &mixed, 8, BracketVariant::Corrected);
        assert!(check.max_lhs_norm > 1e-3);
        assert!(check.max_residual < 1e-10, "residual {}", check.max_residual);
    }

    #[test]
    fn pair_commutes_tiers() {
        // Orthogonal linear pair: exact rule.
        let v = pair_commutes(&p("z1", 3), &p("z2", 3), 1..=6, DEFAULT_COMM_TOL);
        assert_eq!(v.verdict, Verdict::Perpendicular);
        assert_eq!(v.tier, PairTier::LinearSymbolic);

        // Colinear pair commutes.
        let double = p("z1", 3).scale(Complex64::from(2.0));
        let v = pair_commutes(&p("z1", 3), &double, 1..=6, DEFAULT_COMM_TOL);
        assert_eq!(v.verdict, Verdict::Perpendicular);

        // Overlapping linear pair does not commute; a witness degree exists.
        let v = pair_commutes(&p("z1", 2), &p("z1 + z2", 2), 1..=6, DEFAULT_COMM_TOL);
        assert_eq!(v.verdict, Verdict::NotPerpendicular);

        // Monomial pair: certified via per-α self-adjointness.
        let v = pair_commutes(&p("z1^2*z2", 3), &p("z2*z3^2", 3), 1..=8, DEFAULT_COMM_TOL);
        assert_eq!(v.verdict, Verdict::Perpendicular);
        assert_eq!(v.tier, PairTier::PerAlphaSelfAdjoint);
    }

    #[test]
    fn derivative_orthogonality_examples() {
        // Disjoint variables: partials stay in disjoint variables.
        let fams = vec![vec![p("z1^2", 3)], vec![p("z3^2", 3)]];
        assert!(derivative_orthogonality(&fams, 1e-12).all_orthogonal);

        // {z1²} vs {z1z2}: the partial sets share the z1 direction.
        let fams = vec![vec![p("z1^2", 2)], vec![p("z1*z2", 2)]];
        assert!(!derivative_orthogonality(&fams, 1e-12).all_orthogonal);

        // {z1²+z2²} vs {z3²}: partial sets {z1, z2} vs {z3}.
        let fams = vec![vec![p("z1^2 + z2^2", 3)], vec![p("z3^2", 3)]];
        assert!(derivative_orthogonality(&fams, 1e-12).all_orthogonal);
    }

    #[test]
    fn gradient_orthogonality_examples() {
        // z1² vs z2²: spans e1 vs e2.
        let fams = vec![vec![p("z1^2", 2)], vec![p("z2^2", 2)]];
        assert!(gradient_orthogonality(&fams, 1e-12).all_orthogonal);

        // z1z2 sweeps the whole (e1, e2) plane, so it conflicts with z1².
        let fams = vec![vec![p("z1*z2", 2)], vec![p("z1^2", 2)]];
        assert!(!gradient_orthogonality(&fams, 1e-12).all_orthogonal);

        // {z1z2} vs {z3z4}: planes {e1,e2} ⊥ {e3,e4}.
        let fams = vec![vec![p("z1*z2", 4)], vec![p("z3*z4", 4)]];
        assert!(gradient_orthogonality(&fams, 1e-12).all_orthogonal);
    }

    #[test]
    fn bracket_annihilation_matches_term_dropout() {
        // The bracket vanishes exactly when the falling factorial runs
        // negative, for both variants.
        for variant in [BracketVariant::Paper, BracketVariant::Corrected] {
            let b = BracketFn::guo_wang(3, 2, 1, variant);
            for k in 0..10i64 {
                let v = b.eval(k);
                assert!(v >= 0.0);
                assert!(v.is_finite());
            }
        }
        // Corrected commutator bracket at m = n = 1, |α| = 1 is 1/K.
        let b = BracketFn::commutator(1, 1, 1, BracketVariant::Corrected);
        for k in 1..8i64 {
            assert_relative_eq!(b.eval(k), 1.0 / k as f64, epsilon = 1e-14);
        }
        assert_eq!(b.eval(0), 0.0);
    }

    #[test]
    fn frame_pass_implies_projection_pass() {
        // Agreement of criteria on the batteries that satisfy the frame rule.
        let batteries: Vec<Vec<Vec<&str>>> = vec![
            vec![vec!["z1^2"], vec!["z2*z3"]],
            vec![vec!["z1", "z2"], vec!["z3"]],
            vec![vec!["z1^3", "z1^2*z2"], vec!["z3^2"]],
        ];
        for battery in batteries {
            let fams: Vec<Vec<HomogPoly>> = battery
                .iter()
                .map(|texts| texts.iter().map(|t| p(t, 3)).collect())
                .collect();
            let frame = frame_operators_commute(&fams, 0..=6, DEFAULT_COMM_TOL);
            assert_eq!(frame.verdict, Verdict::Perpendicular);
            let modules: Vec<GradedSubmodule> = fams
                .iter()
                .enumerate()
                .map(|(i, f)| GradedSubmodule::from_scalar_generators(format!("F{i}"), f).unwrap())
                .collect();
            let proj = projections_commute(&modules, 1..=6, DEFAULT_COMM_TOL);
            assert_eq!(proj.verdict, Verdict::Perpendicular);
        }
    }

    #[test]
    fn lattice_elements_stay_perpendicular() {
        // Meets and joins of a perpendicular family remain perpendicular:
        // checked numerically per degree on the commutators of the derived
        // projections.
        let modules = vec![
            scalar_module("N1", &["z1"], 3),
            scalar_module("N2", &["z2"], 3),
            scalar_module("N3", &["z3"], 3),
        ];
        let tol = crate::poly::DEFAULT_RANK_TOL;
        for k in 1..=5u32 {
            let s: Vec<_> = modules.iter().map(|m| m.slice(k, tol)).collect();
            let join12 = s[0].join(&s[1], tol).unwrap();
            let meet13 = s[0].meet(&s[2], tol).unwrap();
            let derived = [join12.projection(), meet13.projection(), s[2].projection()];
            for a in &derived {
                for b in &derived {
                    let comm = a * b - b * a;
                    assert!(operator_norm(&comm) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn syntactic_tags() {
        let fams = vec![vec![p("z1^2", 3)], vec![p("z2*z3", 3)]];
        assert_eq!(syntactic_criterion(&fams), Some(Criterion::MonomialRule));
        let fams = vec![vec![p("z1 + z2", 4)], vec![p("z3^2 + z4^2", 4)]];
        assert_eq!(syntactic_criterion(&fams), Some(Criterion::DisjointVars));
        let fams = vec![vec![p("z1 + z2", 3)], vec![p("z1 - z2", 3)]];
        assert_eq!(syntactic_criterion(&fams), Some(Criterion::LinearRule));
        let fams = vec![vec![p("z1 + z2", 2)], vec![p("z1", 2)]];
        assert_eq!(syntactic_criterion(&fams), None);
    }
}
