//! Essential-normality diagnostics and the decomposition certification
//! pipeline.
//!
//! For a graded submodule `N`, the commutator `M_{z_i}P_N − P_N M_{z_i}`
//! splits exactly into blocks `B_k` mapping the degree-`k` ambient slice to
//! the degree-`k+1` slice, because `P_N` is degree-diagonal and `M_{z_i}`
//! raises degree by one. Membership of the commutator in a Schatten class is
//! probed by partial sums `Σ_k Σ_j σ_j(B_k)^{2p}` and by the log-log decay of
//! `‖B_k‖` — the reports state sums and slopes only and never assert
//! convergence.
//!
//! The certification pipeline classifies decomposition pieces syntactically
//! (single generator, all-linear, all-monomial, two effective variables via a
//! Groebner basis, or a tensor of a classified rank-1 piece with a coefficient
//! subspace), gathers angle and perpendicularity evidence, and certifies a
//! decomposition at the swept cutoff when every piece is classified and the
//! minimal gap of `ΣP_i` on the join stays above a configured δ.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::angles::{graded_cosine, min_gap, AngleMethod, AngleReport, Trend};
use crate::groebner::buchberger;
use crate::linalg::{singular_values, CMat};
use crate::multiindex::MonomialOrder;
use crate::perp::{projections_commute, PerpCertificate};
use crate::poly::HomogPoly;
use crate::slices::{shift_block, GradedSubmodule, SubspaceSlice};

#[derive(Debug, Error, PartialEq)]
pub enum EssNormError {
    #[error("insufficient data: need at least {needed} nonzero entries, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

/// Commutator blocks `B_k = M_i^{(k)}·P_{N_k} − P_{N_{k+1}}·M_i^{(k)}` for a
/// contiguous range of source degrees; each maps the degree-`k` ambient slice
/// to the degree-`k+1` ambient slice.
pub fn commutator_blocks(
    module: &GradedSubmodule,
    var: usize,
    degrees: std::ops::RangeInclusive<u32>,
    rank_tol: f64,
) -> Vec<CMat> {
    let ks: Vec<u32> = degrees.collect();
    ks.par_iter()
        .map(|&k| {
            let shift = shift_block(module.dim(), module.rank(), var, k);
            let pk = module.slice(k, rank_tol).projection();
            let pk1 = module.slice(k + 1, rank_tol).projection();
            &shift * pk - pk1 * shift
        })
        .collect()
}

/// Schatten exponent for partial sums; `Infinity` tracks the running maximum
/// block norm instead of a sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

/// Cumulative Schatten-(2p) partial sums `Σ_{k≤K} Σ_j σ_j(B_k)^{2p}` per
/// cutoff; monotone non-decreasing by construction. For `p = ∞` the running
/// maximum of block norms is returned.
pub fn schatten_partial(blocks: &[CMat], p: SchattenP) -> Vec<f64> {
    let mut out = Vec::with_capacity(blocks.len());
    match p {
        SchattenP::Finite(p) => {
            assert!(p > 0.0, "Schatten exponent must be positive");
            let mut acc = 0.0f64;
            for b in blocks {
                acc += singular_values(b)
                    .iter()
                    .map(|s| s.powf(2.0 * p))
                    .sum::<f64>();
                out.push(acc);
            }
        }
        SchattenP::Infinity => {
            let mut acc = 0.0f64;
            for b in blocks {
                acc = acc.max(singular_values(b).first().copied().unwrap_or(0.0));
                out.push(acc);
            }
        }
    }
    out
}

/// One self-commutator block `S_i^*S_j − S_jS_i^*` of the restricted tuple at
/// one degree, expressed in the slice bases.
#[derive(Clone, Debug, Serialize)]
pub struct SelfCommutatorBlock {
    pub degree: u32,
    pub vars: (usize, usize),
    pub norm: f64,
    #[serde(skip)]
    pub block: CMat,
}

/// Degree-preserving self-commutator blocks of the restricted tuple
/// `S_i = P_{N_{k+1}} M_{z_i} P_{N_k}` for all variable pairs over the range.
pub fn restricted_tuple_selfcommutators(
    module: &GradedSubmodule,
    degrees: std::ops::RangeInclusive<u32>,
    rank_tol: f64,
) -> Vec<SelfCommutatorBlock> {
    let d = module.dim();
    let ks: Vec<u32> = degrees.collect();
    ks.par_iter()
        .flat_map(|&k| {
            let slice_km1 = (k > 0).then(|| module.slice(k - 1, rank_tol));
            let slice_k = module.slice(k, rank_tol);
            let slice_k1 = module.slice(k + 1, rank_tol);
            let m = slice_k.rank();
            // S_i from degree k: m_{k+1} × m_k; from degree k−1: m_k × m_{k−1}.
            let s_up: Vec<CMat> = (0..d)
                .map(|i| restricted_shift(module, i, &slice_k, &slice_k1))
                .collect();
            let s_down: Vec<Option<CMat>> = (0..d)
                .map(|i| {
                    slice_km1
                        .as_ref()
                        .map(|low| restricted_shift(module, i, low, &slice_k))
                })
                .collect();
            let mut rows = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    let mut block = s_up[i].adjoint() * &s_up[j];
                    if let Some(si) = &s_down[i] {
                        if let Some(sj) = &s_down[j] {
                            block -= sj * si.adjoint();
                        }
                    }
                    debug_assert_eq!(block.nrows(), m);
                    rows.push(SelfCommutatorBlock {
                        degree: k,
                        vars: (i, j),
                        norm: crate::linalg::operator_norm(&block),
                        block,
                    });
                }
            }
            rows
        })
        .collect()
}

fn restricted_shift(
    module: &GradedSubmodule,
    var: usize,
    from: &SubspaceSlice,
    to: &SubspaceSlice,
) -> CMat {
    let shift = shift_block(module.dim(), module.rank(), var, from.degree());
    to.basis().adjoint() * shift * from.basis()
}

/// Least-squares fit of `log‖B_k‖` against `log k` over the tail half of the
/// sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit, as fit confidence.
    pub residual_rms: f64,
    pub points_used: usize,
}

/// Fits the tail-half decay of a norm sequence indexed by degree. Requires at
/// least 5 nonzero entries (zero norms and degree 0 are excluded from the
/// log-log fit).
pub fn decay_fit(points: &[(u32, f64)]) -> Result<DecayFit, EssNormError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, v)| *k > 0 && *v > 0.0)
        .map(|(k, v)| (f64::from(*k).ln(), v.ln()))
        .collect();
    if usable.len() < 5 {
        return Err(EssNormError::InsufficientData {
            needed: 5,
            got: usable.len(),
        });
    }
    let tail = &usable[usable.len() / 2..];
    let n = tail.len() as f64;
    let sx: f64 = tail.iter().map(|(x, _)| x).sum();
    let sy: f64 = tail.iter().map(|(_, y)| y).sum();
    let sxx: f64 = tail.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = tail.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual_rms = (tail
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        residual_rms,
        points_used: tail.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRow {
    pub degree: u32,
    pub norm: f64,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariableDiagnostics {
    pub var: usize,
    pub per_degree: Vec<BlockRow>,
    /// Cumulative Schatten-(2p) partial sums aligned with `per_degree`.
    pub schatten_partial: Vec<f64>,
    pub decay: Option<DecayFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfCommutatorRow {
    pub degree: u32,
    pub vars: (usize, usize),
    pub norm: f64,
}

/// Full diagnostic sweep for one module: per-variable commutator blocks,
/// Schatten partial sums, decay fits, and restricted-tuple self-commutators.
#[derive(Clone, Debug, Serialize)]
pub struct EssNormReport {
    pub schatten_p: f64,
    pub degrees: (u32, u32),
    pub variables: Vec<VariableDiagnostics>,
    pub self_commutators: Vec<SelfCommutatorRow>,
    /// Reporting heuristic only: negative decay slope below −0.25 and
    /// eventually decreasing Schatten increments for every variable.
    pub consistent_with_p_normality: bool,
    pub heuristic_note: &'static str,
}

/// Runs the essential-normality diagnostics for `module` with Schatten
/// exponent `p` over the degree range.
pub fn ess_norm_report(
    module: &GradedSubmodule,
    degrees: std::ops::RangeInclusive<u32>,
    p: f64,
    rank_tol: f64,
) -> EssNormReport {
    let (lo, hi) = (*degrees.start(), *degrees.end());
    let mut variables = Vec::with_capacity(module.dim());
    let mut consistent = true;
    for var in 0..module.dim() {
        let blocks = commutator_blocks(module, var, lo..=hi, rank_tol);
        let per_degree: Vec<BlockRow> = blocks
            .iter()
            .zip(lo..=hi)
            .map(|(b, k)| {
                let sv = singular_values(b);
                BlockRow {
                    degree: k,
                    norm: sv.first().copied().unwrap_or(0.0),
                    singular_values: sv,
                }
            })
            .collect();
        let partial = schatten_partial(&blocks, SchattenP::Finite(p));
        let points: Vec<(u32, f64)> = per_degree.iter().map(|r| (r.degree, r.norm)).collect();
        let decay = decay_fit(&points).ok();
        let increments_decreasing = decreasing_increments(&partial);
        let negative_slope = decay.map(|d| d.slope < -0.25).unwrap_or(false);
        // Variables whose blocks vanish identically are trivially consistent.
        let all_zero = per_degree.iter().all(|r| r.norm == 0.0);
        if !all_zero && !(negative_slope && increments_decreasing) {
            consistent = false;
        }
        variables.push(VariableDiagnostics {
            var,
            per_degree,
            schatten_partial: partial,
            decay,
        });
    }
    let self_commutators = restricted_tuple_selfcommutators(module, lo..=hi, rank_tol)
        .into_iter()
        .map(|b| SelfCommutatorRow {
            degree: b.degree,
            vars: b.vars,
            norm: b.norm,
        })
        .collect();
    EssNormReport {
        schatten_p: p,
        degrees: (lo, hi),
        variables,
        self_commutators,
        consistent_with_p_normality: consistent,
        heuristic_note:
            "heuristic flag only: partial sums and decay slopes are reported as data; convergence of the infinite sums is never asserted",
    }
}

/// Strict decrease of increments over the tail half of a cumulative sequence.
fn decreasing_increments(partial: &[f64]) -> bool {
    if partial.len() < 3 {
        return false;
    }
    let mut increments: Vec<f64> = Vec::with_capacity(partial.len() - 1);
    for w in partial.windows(2) {
        increments.push(w[1] - w[0]);
    }
    let tail = &increments[increments.len() / 2..];
    tail.windows(2).all(|w| w[1] < w[0] + 1e-15)
}

/// Piece classification for the certification pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PieceClass {
    /// One homogeneous (vector-valued) generator.
    SingleHomogeneous,
    /// All generators of degree one.
    Linear,
    /// All generators single-term.
    Monomial,
    /// A reduced Groebner basis of the scalar generators involves at most two
    /// variables.
    TwoVariable,
    /// A classified rank-1 piece tensored with a coefficient subspace.
    Tensor { inner: Box<PieceClass> },
    Unclassified,
}

impl PieceClass {
    pub fn is_classified(&self) -> bool {
        match self {
            PieceClass::Unclassified => false,
            PieceClass::Tensor { inner } => inner.is_classified(),
            _ => true,
        }
    }
}

fn classify_scalar(polys: &[HomogPoly]) -> PieceClass {
    if polys.len() == 1 {
        return PieceClass::SingleHomogeneous;
    }
    if polys.iter().all(HomogPoly::is_monomial) {
        return PieceClass::Monomial;
    }
    if polys.iter().all(HomogPoly::is_linear) {
        return PieceClass::Linear;
    }
    let dim = polys[0].dim();
    let basis = buchberger(polys, &MonomialOrder::graded_lex(dim));
    let mut support = std::collections::BTreeSet::new();
    for b in &basis {
        support.extend(b.support_vars());
    }
    if support.len() <= 2 {
        return PieceClass::TwoVariable;
    }
    PieceClass::Unclassified
}

/// Syntactic classification of one decomposition piece.
pub fn classify_piece(module: &GradedSubmodule, tol: f64) -> PieceClass {
    if module.generators().len() == 1 {
        return PieceClass::SingleHomogeneous;
    }
    if module.rank() == 1 {
        let polys: Vec<HomogPoly> = module
            .generators()
            .iter()
            .map(|g| g.component(0).clone())
            .collect();
        return classify_scalar(&polys);
    }
    // Rank > 1 with several generators: recognize N ⊗ V structure, where
    // every generator is a simple tensor and each distinct polynomial
    // direction carries the same coefficient span V.
    let mut factored: Vec<(HomogPoly, Vec<Complex64>)> = Vec::new();
    for g in module.generators() {
        match g.as_simple_tensor(tol) {
            Some(f) => factored.push(f),
            None => return PieceClass::Unclassified,
        }
    }
    let mut groups: Vec<(HomogPoly, Vec<Vec<Complex64>>)> = Vec::new();
    for (p, xi) in factored {
        match groups.iter_mut().find(|(q, _)| q.colinear_with(&p, tol)) {
            Some((_, vecs)) => vecs.push(xi),
            None => groups.push((p, vec![xi])),
        }
    }
    let span_of = |vecs: &[Vec<Complex64>]| -> CMat {
        let r = vecs[0].len();
        let m = CMat::from_fn(r, vecs.len(), |i, j| vecs[j][i]);
        crate::linalg::orthonormalize_cols(&m, 1e-10)
    };
    let first_span = span_of(&groups[0].1);
    for (_, vecs) in &groups[1..] {
        let span = span_of(vecs);
        if span.ncols() != first_span.ncols() {
            return PieceClass::Unclassified;
        }
        let overlap = first_span.adjoint() * &span;
        // Equal spans: the cross-Gram of orthonormal bases is unitary.
        let dist = crate::linalg::operator_norm(
            &(overlap.adjoint() * &overlap - CMat::identity(span.ncols(), span.ncols())),
        );
        if dist > 1e-8 {
            return PieceClass::Unclassified;
        }
    }
    let scalars: Vec<HomogPoly> = groups.into_iter().map(|(p, _)| p).collect();
    PieceClass::Tensor {
        inner: Box::new(classify_scalar(&scalars)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompVerdict {
    CertifiedAtCutoff,
    UnclassifiedPiece,
    GapTooSmall,
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceReport {
    pub label: String,
    pub class: PieceClass,
}

/// Outcome of the decomposition certification pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct DecompCertificate {
    pub pieces: Vec<PieceReport>,
    pub angle: Option<AngleReport>,
    pub perp: Option<PerpCertificate>,
    /// Infimum over the sweep of λ_min(ΣP_i) on the join slice.
    pub min_gap: Option<f64>,
    pub delta: f64,
    pub verdict: DecompVerdict,
    pub reasons: Vec<String>,
}

/// Classifies the pieces, sweeps the angle and gap evidence, runs the
/// perpendicularity check, and certifies when every piece is classified and
/// the minimal gap stays at or above `delta` across the swept degrees.
pub fn certify_decomposition(
    pieces: &[GradedSubmodule],
    degrees: std::ops::RangeInclusive<u32>,
    delta: f64,
    rank_tol: f64,
    comm_tol: f64,
) -> DecompCertificate {
    let piece_reports: Vec<PieceReport> = pieces
        .iter()
        .map(|m| PieceReport {
            label: m.label().to_string(),
            class: classify_piece(m, 1e-10),
        })
        .collect();
    let mut reasons = Vec::new();
    for p in &piece_reports {
        if !p.class.is_classified() {
            reasons.push(format!("piece '{}' is not classified by any rule", p.label));
        }
    }

    let (lo, hi) = (*degrees.start(), *degrees.end());
    let angle = if pieces.len() >= 2 {
        graded_cosine(pieces, lo..=hi, AngleMethod::Bgm, rank_tol).ok()
    } else {
        None
    };
    let perp = (pieces.len() >= 2).then(|| projections_commute(pieces, lo..=hi, comm_tol));

    // Gap sweep: λ_min of ΣP_i on the join, per degree, ignoring empty joins.
    let min_gap_value = match &angle {
        Some(report) => report
            .per_degree
            .iter()
            .filter_map(|r| r.lambda_min)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.min(v)))
            }),
        None => {
            let ks: Vec<u32> = (lo..=hi).collect();
            ks.par_iter()
                .filter_map(|&k| {
                    let s = pieces[0].slice(k, rank_tol);
                    min_gap(std::slice::from_ref(&s), &s)
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        }
    };

    let all_classified = piece_reports.iter().all(|p| p.class.is_classified());
    let verdict = if !all_classified {
        DecompVerdict::UnclassifiedPiece
    } else {
        match min_gap_value {
            Some(g) if g >= delta => DecompVerdict::CertifiedAtCutoff,
            Some(g) => {
                reasons.push(format!(
                    "minimal gap {g:.6e} fell below delta {delta:.3e} within the sweep"
                ));
                DecompVerdict::GapTooSmall
            }
            None => {
                reasons.push("no degree in the sweep produced a nonzero join".to_string());
                DecompVerdict::GapTooSmall
            }
        }
    };
    if let Some(report) = &angle {
        if report.summary.trend == Trend::Increasing && report.summary.max_cosine > 0.99 {
            reasons.push("angle evidence degrades toward 1 over the sweep".to_string());
        }
    }
    DecompCertificate {
        pieces: piece_reports,
        angle,
        perp,
        min_gap: min_gap_value,
        delta,
        verdict,
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use crate::parse::parse_homog_poly;
    use crate::poly::{VectorPoly, DEFAULT_RANK_TOL};
    use crate::slices::AmbientBasis;
    use approx::assert_relative_eq;

    fn p(text: &str, dim: usize) -> HomogPoly {
        parse_homog_poly(text, dim).unwrap()
    }

    fn scalar_module(label: &str, texts: &[&str], dim: usize) -> GradedSubmodule {
        let polys: Vec<HomogPoly> = texts.iter().map(|t| p(t, dim)).collect();
        GradedSubmodule::from_scalar_generators(label, &polys).unwrap()
    }

    #[test]
    fn commutator_blocks_vanish_for_trivial_modules() {
        // The full module: P = I commutes with everything. The slice of
        // ⟨z1, z2⟩ is full from degree 1 on.
        let full = scalar_module("full", &["z1", "z2"], 2);
        for b in commutator_blocks(&full, 0, 1..=5, DEFAULT_RANK_TOL) {
            assert!(crate::linalg::operator_norm(&b) < 1e-12);
        }
    }

    #[test]
    fn principal_module_block_norm_hand_value() {
        // ⟨z1⟩ in two variables at k = 1: the only contribution comes from
        // e_{(0,1)}, pushed to sqrt(1/2)·e_{(1,1)} inside the degree-2 slice.
        let m = scalar_module("N", &["z1"], 2);
        let blocks = commutator_blocks(&m, 0, 1..=1, DEFAULT_RANK_TOL);
        let norm = crate::linalg::operator_norm(&blocks[0]);
        assert_relative_eq!(norm, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn blocks_agree_with_dense_truncated_computation() {
        let m = scalar_module("N", &["z1^2 + z2^2"], 2);
        let k_max = 6u32;
        let blocks = commutator_blocks(&m, 1, 0..=k_max - 1, DEFAULT_RANK_TOL);
        // Dense truncation: block-diagonal P and superdiagonal shift on
        // ⊕_{k≤K} slice_k; the commutator must reproduce the B_k blocks and
        // vanish elsewhere.
        let dims: Vec<usize> = (0..=k_max)
            .map(|k| AmbientBasis::new(2, 1, k).dimension())
            .collect();
        let offs: Vec<usize> = dims
            .iter()
            .scan(0usize, |acc, d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let total: usize = dims.iter().sum();
        let mut proj = CMat::zeros(total, total);
        let mut shift = CMat::zeros(total, total);
        for k in 0..=k_max {
            let pk = m.slice(k, DEFAULT_RANK_TOL).projection();
            proj.view_mut((offs[k as usize], offs[k as usize]), (dims[k as usize], dims[k as usize]))
                .copy_from(&pk);
            if k < k_max {
                let sk = shift_block(2, 1, 1, k);
                shift
                    .view_mut((offs[k as usize + 1], offs[k as usize]), (dims[k as usize + 1], dims[k as usize]))
                    .copy_from(&sk);
            }
        }
        let dense = &shift * &proj - &proj * &shift;
        for k in 0..k_max as usize {
            let got = dense.view((offs[k + 1], offs[k]), (dims[k + 1], dims[k]));
            assert!(
                crate::linalg::frobenius_distance(&got.into_owned(), &blocks[k]) < 1e-12
            );
        }
    }

    #[test]
    fn schatten_partial_examples() {
        // All-zero blocks.
        let zeros = vec![CMat::zeros(3, 2), CMat::zeros(4, 3)];
        assert_eq!(schatten_partial(&zeros, SchattenP::Finite(1.0)), vec![0.0, 0.0]);

        // Single block diag(1, 1/2) at p = 1: 1² + (1/2)² = 1.25.
        let mut b = CMat::zeros(2, 2);
        b[(0, 0)] = Complex64::ONE;
        b[(1, 1)] = Complex64::from(0.5);
        let sums = schatten_partial(std::slice::from_ref(&b), SchattenP::Finite(1.0));
        assert_relative_eq!(sums[0], 1.25, epsilon = 1e-14);

        // p = ∞ tracks the running max norm.
        let sums = schatten_partial(&[b.clone(), CMat::zeros(2, 2)], SchattenP::Infinity);
        assert_eq!(sums, vec![1.0, 1.0]);
    }

    #[test]
    fn schatten_increments_decay_for_principal_module() {
        // ‖B_k‖ = (k+1)^{-1/2} for ⟨z1⟩ in two variables; at 2p = 6 the
        // increments (k+1)^{-3} decrease strictly.
        let m = scalar_module("N", &["z1"], 2);
        let blocks = commutator_blocks(&m, 0, 1..=30, DEFAULT_RANK_TOL);
        let sums = schatten_partial(&blocks, SchattenP::Finite(3.0));
        for w in sums.windows(3) {
            assert!((w[2] - w[1]) < (w[1] - w[0]));
        }
    }

    #[test]
    fn restricted_tuple_on_the_line_is_normal_away_from_degree_zero() {
        // d = 1 full module (generated by the constant 1): the restricted
        // shift has unit weights, so all self-commutator blocks vanish for
        // k ≥ 1; the degree-0 block is the vacuum projection.
        let m = scalar_module("H", &["1"], 1);
        for b in restricted_tuple_selfcommutators(&m, 1..=10, DEFAULT_RANK_TOL) {
            assert!(b.norm < 1e-13);
        }
        let at_zero = restricted_tuple_selfcommutators(&m, 0..=0, DEFAULT_RANK_TOL);
        assert_relative_eq!(at_zero[0].norm, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn full_module_selfcommutators_are_monomial_diagonal() {
        // On the full rank-1 module the S_i are weighted shifts on monomials,
        // so every self-commutator block is diagonal in the monomial basis.
        let m = scalar_module("full", &["z1", "z2"], 2);
        for b in restricted_tuple_selfcommutators(&m, 1..=5, DEFAULT_RANK_TOL) {
            if b.vars.0 != b.vars.1 {
                continue;
            }
            let n = b.block.nrows();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        assert!(b.block[(i, j)].norm() < 1e-12);
                    }
                }
            }
        }

        // Zero module slices give empty blocks.
        let zero_range = scalar_module("late", &["z1^4"], 2);
        for b in restricted_tuple_selfcommutators(&zero_range, 0..=2, DEFAULT_RANK_TOL) {
            assert_eq!(b.block.nrows(), 0);
        }
    }

    #[test]
    fn decay_fit_examples() {
        // Exact power law c/k: slope −1.
        let pts: Vec<(u32, f64)> = (1..=20).map(|k| (k, 3.0 / f64::from(k))).collect();
        let fit = decay_fit(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.1);

        // Constant sequence: slope 0.
        let pts: Vec<(u32, f64)> = (1..=20).map(|k| (k, 0.7)).collect();
        let fit = decay_fit(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-12);

        // Fewer than 5 nonzero entries.
        let pts = vec![(1u32, 1.0), (2, 0.5), (3, 0.0), (4, 0.0), (5, 0.0)];
        assert_eq!(
            decay_fit(&pts).unwrap_err(),
            EssNormError::InsufficientData { needed: 5, got: 2 }
        );
    }

    #[test]
    fn principal_module_has_negative_decay() {
        let m = scalar_module("N", &["z1"], 2);
        let blocks = commutator_blocks(&m, 0, 1..=40, DEFAULT_RANK_TOL);
        let pts: Vec<(u32, f64)> = blocks
            .iter()
            .zip(1..=40u32)
            .map(|(b, k)| (k, crate::linalg::operator_norm(b)))
            .collect();
        let fit = decay_fit(&pts).unwrap();
        assert!(fit.slope < -0.25);
    }

    #[test]
    fn qualitative_agreement_of_block_and_selfcommutator_decay() {
        // Battery: both diagnostics decay together (no quantitative claim).
        for gens in [&["z1"][..], &["z1*z2"][..], &["z1^2 + z2^2"][..]] {
            let m = scalar_module("N", gens, 2);
            let blocks = commutator_blocks(&m, 0, 2..=24, DEFAULT_RANK_TOL);
            let block_pts: Vec<(u32, f64)> = blocks
                .iter()
                .zip(2..=24u32)
                .map(|(b, k)| (k, crate::linalg::operator_norm(b)))
                .collect();
            let self_pts: Vec<(u32, f64)> = restricted_tuple_selfcommutators(&m, 2..=24, DEFAULT_RANK_TOL)
                .into_iter()
                .filter(|b| b.vars == (0, 0))
                .map(|b| (b.degree, b.norm))
                .collect();
            let bf = decay_fit(&block_pts).unwrap();
            let sf = decay_fit(&self_pts).unwrap();
            assert!(bf.slope < 0.0, "{gens:?}: block slope {}", bf.slope);
            assert!(sf.slope < 0.0, "{gens:?}: self-commutator slope {}", sf.slope);
        }
    }

    #[test]
    fn classification_rules() {
        assert_eq!(
            classify_piece(&scalar_module("a", &["z1^2 + z2*z3"], 3), 1e-10),
            PieceClass::SingleHomogeneous
        );
        assert_eq!(
            classify_piece(&scalar_module("b", &["z1^2", "z2*z3"], 3), 1e-10),
            PieceClass::Monomial
        );
        assert_eq!(
            classify_piece(&scalar_module("c", &["z1 + z2", "z3"], 3), 1e-10),
            PieceClass::Linear
        );
        // Two effective variables via the Groebner support rule.
        assert_eq!(
            classify_piece(&scalar_module("d", &["z1^3 + z2^3", "z1^2*z2"], 3), 1e-10),
            PieceClass::TwoVariable
        );
        // Three entangled variables: no rule applies.
        assert_eq!(
            classify_piece(
                &scalar_module("e", &["z1^2 + z2*z3", "z2^2 + z1*z3"], 3),
                1e-10
            ),
            PieceClass::Unclassified
        );
    }

    #[test]
    fn tensor_classification() {
        let scalar = scalar_module("m", &["z1^2", "z1*z2"], 3);
        let tensored = scalar
            .tensor(
                &[
                    vec![Complex64::ONE, Complex64::ZERO],
                    vec![Complex64::ONE, Complex64::ONE],
                ],
                "m (x) V",
            )
            .unwrap();
        match classify_piece(&tensored, 1e-10) {
            PieceClass::Tensor { inner } => assert_eq!(*inner, PieceClass::Monomial),
            other => panic!("expected tensor classification, got {other:?}"),
        }

        // Mixed vector structure that is not a tensor product.
        let z1 = p("z1^2", 2);
        let z2 = p("z2^2", 2);
        let mixed = GradedSubmodule::new(
            "mixed",
            vec![
                VectorPoly::tensor(&z1, &[Complex64::ONE, Complex64::ZERO]),
                VectorPoly::tensor(&z2, &[Complex64::ZERO, Complex64::ONE]),
            ],
        )
        .unwrap();
        assert_eq!(classify_piece(&mixed, 1e-10), PieceClass::Unclassified);
    }

    #[test]
    fn certify_monomial_battery() {
        let pieces = vec![
            scalar_module("K1", &["z1^2"], 3),
            scalar_module("K2", &["z1*z2"], 3),
            scalar_module("K3", &["z3"], 3),
        ];
        let cert = certify_decomposition(&pieces, 1..=8, 0.05, DEFAULT_RANK_TOL, 1e-10);
        assert_eq!(cert.verdict, DecompVerdict::CertifiedAtCutoff);
        assert!(cert.min_gap.unwrap() >= 0.05);
    }

    #[test]
    fn close_pair_fails_on_gap() {
        let pieces = vec![
            scalar_module("N1", &["z1^2 + z2*z3"], 3),
            scalar_module("N2", &["z2^2"], 3),
        ];
        let cert = certify_decomposition(&pieces, 2..=10, 0.05, DEFAULT_RANK_TOL, 1e-10);
        assert_eq!(cert.verdict, DecompVerdict::GapTooSmall);
        assert!(!cert.reasons.is_empty());
    }

    #[test]
    fn single_piece_certifies_with_unit_gap() {
        let piece = vec![scalar_module("N", &["z1^2 + z2^2"], 2)];
        let cert = certify_decomposition(&piece, 2..=6, 0.05, DEFAULT_RANK_TOL, 1e-10);
        assert_eq!(cert.verdict, DecompVerdict::CertifiedAtCutoff);
        assert_relative_eq!(cert.min_gap.unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn mixed_index_helper() {
        // Guard: AmbientBasis positions are vector-fastest.
        let basis = AmbientBasis::new(2, 2, 1);
        let a = MultiIndex::new(vec![1, 0]);
        assert_eq!(basis.position(&a, 0), 0);
        assert_eq!(basis.position(&a, 1), 1);
    }
}
