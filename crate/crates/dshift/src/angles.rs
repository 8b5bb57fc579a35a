//! The cosine of the angle between finitely many submodules, per degree slice,
//! in three formulations, plus stable-division constants and minimal-norm
//! decomposition witnesses.
//!
//! For submodules `N_1, …, N_n` with join `N`, the cosine is
//!
//! ```text
//! c = sup { (1/(n−1))·Σ_{i≠j}⟨x_i, x_j⟩ / Σ‖x_i‖²  :  0 ≠ (x_i) ∈ ×(N_i^⊥ ∩ N) }
//! ```
//!
//! Because graded submodules block-diagonalize over degrees, the global
//! cosine is the supremum of per-degree cosines; a sweep up to a cutoff is
//! the honest computable surrogate and is never reported as the true
//! supremum. Three per-degree routes are implemented: the projection-norm
//! formula `c = n/(n−1)·‖(1/n)ΣP_i − P_N‖ − 1/(n−1)`, a Rayleigh-quotient
//! eigenproblem on the restricted cross-Gram block matrix, and the ordered
//! complement product `‖P_{N_1^⊥}⋯P_{N_n^⊥}P_N‖` (which shares with the
//! cosine only the dichotomy "< 1 vs = 1", not its numeric value).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{hermitian_eigenvalues, operator_norm, pinv_solve, CMat};
use crate::poly::{da_norm_sq, VectorPoly};
use crate::slices::{GradedSubmodule, SliceError, SubspaceSlice};

#[derive(Debug, Error)]
pub enum AngleError {
    #[error("cosine undefined for a single submodule")]
    SingleModule,
    #[error("supplied join differs from the lattice join (distance {0:.3e})")]
    JoinMismatch(f64),
    #[error("degree range is empty")]
    EmptyDegreeRange,
    #[error("modules disagree in dimension or rank")]
    ModuleMismatch,
    #[error("target lies outside the join slice (residual {0:.3e})")]
    TargetNotInJoin(f64),
    #[error(transparent)]
    Slice(#[from] SliceError),
}

/// Which per-degree formulation the sweep uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleMethod {
    /// `n/(n−1)·‖(1/n)ΣP_i − P_N‖ − 1/(n−1)`.
    Bgm,
    /// `λ_max` of the zero-diagonal cross-Gram block matrix over `⊕(N_i^⊥∩N)`,
    /// divided by `n−1`.
    Rayleigh,
    /// `‖P_{N_1^⊥}⋯P_{N_n^⊥}P_N‖`; equals 1 exactly when the angle vanishes,
    /// but is not numerically the cosine.
    Borwein,
}

impl std::fmt::Display for AngleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AngleMethod::Bgm => write!(f, "bgm-formula"),
            AngleMethod::Rayleigh => write!(f, "rayleigh"),
            AngleMethod::Borwein => write!(f, "borwein"),
        }
    }
}

/// Friedrichs cosine of a pair: `‖P_s·P_t − P_{s∧t}‖₂`.
///
/// Returns 0 when either slice reduces to the intersection (in particular
/// for `s = t` and for orthogonal slices).
pub fn friedrichs_pair(
    s: &SubspaceSlice,
    t: &SubspaceSlice,
    rank_tol: f64,
) -> Result<f64, AngleError> {
    let meet = s.meet(t, rank_tol)?;
    let product = s.projection() * t.projection();
    Ok(operator_norm(&(product - meet.projection())))
}

fn computed_join(slices: &[SubspaceSlice], rank_tol: f64) -> Result<SubspaceSlice, AngleError> {
    let mut it = slices.iter();
    let first = it.next().ok_or(AngleError::SingleModule)?;
    let mut join = first.clone();
    for s in it {
        join = join.join(s, rank_tol)?;
    }
    Ok(join)
}

/// Smallest eigenvalue of `ΣP_i` restricted to the join slice; `None` when
/// the join is zero. Positivity at every degree encodes closedness of the
/// vector sum of the submodules.
pub fn min_gap(slices: &[SubspaceSlice], join: &SubspaceSlice) -> Option<f64> {
    if join.is_empty() {
        return None;
    }
    let m = join.rank();
    let mut a = CMat::zeros(m, m);
    for s in slices {
        if s.is_empty() {
            continue;
        }
        // B_N^H P_i B_N = C^H C with C = B_i^H B_N.
        let c = s.basis().adjoint() * join.basis();
        a += c.adjoint() * c;
    }
    hermitian_eigenvalues(&a).first().copied()
}

/// Projection-norm formula for the cosine. The `join` argument must equal
/// the lattice join of the slices (checked). Degenerate families (duplicated
/// subspaces) can push the raw value below zero; it is returned unclamped.
pub fn bgm_formula(
    slices: &[SubspaceSlice],
    join: &SubspaceSlice,
    rank_tol: f64,
) -> Result<f64, AngleError> {
    let n = slices.len();
    if n < 2 {
        return Err(AngleError::SingleModule);
    }
    let actual = computed_join(slices, rank_tol)?;
    let dist = actual.projection_distance(join);
    if dist > 1e-8 {
        return Err(AngleError::JoinMismatch(dist));
    }
    let ambient = join.ambient_dim();
    let mut avg = CMat::zeros(ambient, ambient);
    for s in slices {
        avg += s.projection();
    }
    avg /= Complex64::from(n as f64);
    let nf = n as f64;
    Ok(nf / (nf - 1.0) * operator_norm(&(avg - join.projection())) - 1.0 / (nf - 1.0))
}

/// Rayleigh-quotient formulation: assembles the Hermitian block matrix with
/// blocks `U_i^H U_j` (`i ≠ j`, zero diagonal) over orthonormal bases `U_i`
/// of `N_i^⊥ ∩ N`, and returns `λ_max/(n−1)`. Returns 0 when every
/// constraint space is zero.
pub fn rayleigh_cosine(slices: &[SubspaceSlice], rank_tol: f64) -> Result<f64, AngleError> {
    let n = slices.len();
    if n < 2 {
        return Err(AngleError::SingleModule);
    }
    let join = computed_join(slices, rank_tol)?;
    let mut bases: Vec<CMat> = Vec::with_capacity(n);
    for s in slices {
        let q = s.complement_within(&join, rank_tol)?;
        bases.push(q.basis().clone());
    }
    let sizes: Vec<usize> = bases.iter().map(CMat::ncols).collect();
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return Ok(0.0);
    }
    let mut a = CMat::zeros(total, total);
    let mut row = 0;
    for i in 0..n {
        let mut col = 0;
        for j in 0..n {
            if i != j && sizes[i] > 0 && sizes[j] > 0 {
                let block = bases[i].adjoint() * &bases[j];
                a.view_mut((row, col), (sizes[i], sizes[j])).copy_from(&block);
            }
            col += sizes[j];
        }
        row += sizes[i];
    }
    let lambda_max = hermitian_eigenvalues(&a).last().copied().unwrap_or(0.0);
    Ok(lambda_max / (n as f64 - 1.0))
}

/// Ordered product `‖P_{N_1^⊥}⋯P_{N_n^⊥}·P_N‖₂`, complements taken within
/// the full ambient slice. Always `< 1` on a finite slice; its trend over a
/// degree sweep tracks the cosine trend.
pub fn borwein_product(slices: &[SubspaceSlice], rank_tol: f64) -> Result<f64, AngleError> {
    if slices.is_empty() {
        return Err(AngleError::SingleModule);
    }
    let join = computed_join(slices, rank_tol)?;
    let mut acc = join.projection();
    for s in slices.iter().rev() {
        acc = s.complement(rank_tol).projection() * acc;
    }
    Ok(operator_norm(&acc))
}

/// Per-degree record of a cosine sweep.
#[derive(Clone, Debug, Serialize)]
pub struct AngleDegree {
    pub degree: u32,
    pub cosine: f64,
    pub lambda_min: Option<f64>,
    pub join_rank: usize,
    pub slice_ranks: Vec<usize>,
    /// The join slice was zero; the cosine is 0 by convention.
    pub empty_join: bool,
    /// Raw formula value fell below zero (duplicate/degenerate family).
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
    Mixed,
    Empty,
}

#[derive(Clone, Debug, Serialize)]
pub struct AngleSummary {
    pub max_cosine: f64,
    pub argmax_degree: Option<u32>,
    pub trend: Trend,
}

/// Result of a cosine sweep over a degree range.
#[derive(Clone, Debug, Serialize)]
pub struct AngleReport {
    pub method: AngleMethod,
    pub per_degree: Vec<AngleDegree>,
    pub summary: AngleSummary,
}

pub(crate) fn trend_of(values: &[f64]) -> Trend {
    if values.len() < 2 {
        return if values.is_empty() { Trend::Empty } else { Trend::Flat };
    }
    let tol = 1e-9;
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        let diff = w[1] - w[0];
        if diff > tol {
            up = true;
        } else if diff < -tol {
            down = true;
        }
    }
    match (up, down) {
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (false, false) => Trend::Flat,
        (true, true) => Trend::Mixed,
    }
}

fn check_family(modules: &[GradedSubmodule]) -> Result<(), AngleError> {
    let first = modules.first().ok_or(AngleError::SingleModule)?;
    for m in modules {
        if m.dim() != first.dim() || m.rank() != first.rank() {
            return Err(AngleError::ModuleMismatch);
        }
    }
    Ok(())
}

/// Sweeps the cosine of a family of graded submodules over a degree range.
///
/// Degrees with an empty join contribute cosine 0 (flagged). The summary
/// reports the maximum over the sweep only; no claim is made about the
/// supremum over all degrees.
pub fn graded_cosine(
    modules: &[GradedSubmodule],
    degrees: std::ops::RangeInclusive<u32>,
    method: AngleMethod,
    rank_tol: f64,
) -> Result<AngleReport, AngleError> {
    if modules.len() < 2 {
        return Err(AngleError::SingleModule);
    }
    check_family(modules)?;
    if degrees.is_empty() {
        return Err(AngleError::EmptyDegreeRange);
    }
    let ks: Vec<u32> = degrees.collect();
    let rows: Result<Vec<AngleDegree>, AngleError> = ks
        .par_iter()
        .map(|&k| cosine_at_degree(modules, k, method, rank_tol))
        .collect();
    let per_degree = rows?;
    Ok(assemble_report(method, per_degree))
}

fn assemble_report(method: AngleMethod, per_degree: Vec<AngleDegree>) -> AngleReport {
    let mut max_cosine = 0.0f64;
    let mut argmax = None;
    for row in &per_degree {
        if !row.empty_join && row.cosine > max_cosine {
            max_cosine = row.cosine;
            argmax = Some(row.degree);
        }
    }
    let values: Vec<f64> = per_degree
        .iter()
        .filter(|r| !r.empty_join)
        .map(|r| r.cosine)
        .collect();
    let trend = trend_of(&values);
    AngleReport {
        method,
        per_degree,
        summary: AngleSummary {
            max_cosine,
            argmax_degree: argmax,
            trend,
        },
    }
}

pub(crate) fn cosine_at_degree(
    modules: &[GradedSubmodule],
    k: u32,
    method: AngleMethod,
    rank_tol: f64,
) -> Result<AngleDegree, AngleError> {
    let slices: Vec<SubspaceSlice> = modules.iter().map(|m| m.slice(k, rank_tol)).collect();
    let slice_ranks: Vec<usize> = slices.iter().map(SubspaceSlice::rank).collect();
    let join = computed_join(&slices, rank_tol)?;
    if join.is_empty() {
        return Ok(AngleDegree {
            degree: k,
            cosine: 0.0,
            lambda_min: None,
            join_rank: 0,
            slice_ranks,
            empty_join: true,
            degenerate: false,
        });
    }
    let cosine = match method {
        AngleMethod::Bgm => bgm_formula(&slices, &join, rank_tol)?,
        AngleMethod::Rayleigh => rayleigh_cosine(&slices, rank_tol)?,
        AngleMethod::Borwein => borwein_product(&slices, rank_tol)?,
    };
    let lambda_min = min_gap(&slices, &join);
    Ok(AngleDegree {
        degree: k,
        cosine,
        lambda_min,
        join_rank: join.rank(),
        slice_ranks,
        empty_join: false,
        degenerate: cosine < 0.0,
    })
}

/// One step of the pairwise reduction at one degree.
#[derive(Clone, Debug, Serialize)]
pub struct PairwiseStep {
    pub degree: u32,
    /// Friedrichs cosines of (N_1∨…∨N_{k−1}, N_k) for k = 2..n.
    pub pair_cosines: Vec<f64>,
}

/// Outcome of the pairwise reduction criterion: if every running-join pair
/// has cosine < 1 then the whole family has cosine < 1. Only this implication
/// direction is claimed.
#[derive(Clone, Debug, Serialize)]
pub struct PairwiseReduction {
    pub per_degree: Vec<PairwiseStep>,
    pub max_pair_cosine: f64,
    /// Margin `1 − max_pair_cosine` observed over the sweep.
    pub delta: f64,
    pub all_bounded: bool,
    pub note: &'static str,
}

pub fn pairwise_reduction_check(
    modules: &[GradedSubmodule],
    degrees: std::ops::RangeInclusive<u32>,
    rank_tol: f64,
) -> Result<PairwiseReduction, AngleError> {
    if modules.len() < 2 {
        return Err(AngleError::SingleModule);
    }
    check_family(modules)?;
    let ks: Vec<u32> = degrees.collect();
    if ks.is_empty() {
        return Err(AngleError::EmptyDegreeRange);
    }
    let per_degree: Result<Vec<PairwiseStep>, AngleError> = ks
        .par_iter()
        .map(|&k| {
            let mut running = modules[0].slice(k, rank_tol);
            let mut pair_cosines = Vec::with_capacity(modules.len() - 1);
            for m in &modules[1..] {
                let next = m.slice(k, rank_tol);
                pair_cosines.push(friedrichs_pair(&running, &next, rank_tol)?);
                running = running.join(&next, rank_tol)?;
            }
            Ok(PairwiseStep {
                degree: k,
                pair_cosines,
            })
        })
        .collect();
    let per_degree = per_degree?;
    let max_pair_cosine = per_degree
        .iter()
        .flat_map(|s| s.pair_cosines.iter().copied())
        .fold(0.0f64, f64::max);
    let delta = 1.0 - max_pair_cosine;
    Ok(PairwiseReduction {
        per_degree,
        max_pair_cosine,
        delta,
        all_bounded: delta > 1e-9,
        note:
            "sufficient only: bounded pair cosines imply a bounded family cosine; no converse is claimed",
    })
}

/// Per-degree stable-division data.
#[derive(Clone, Debug, Serialize)]
pub struct StableDivDegree {
    pub degree: u32,
    /// `C_k = 1/λ⁺_min`; `None` on empty joins.
    pub constant: Option<f64>,
    pub lambda_min_pos: Option<f64>,
    pub join_rank: usize,
}

/// Minimal-norm decomposition of a requested target.
#[derive(Clone, Debug, Serialize)]
pub struct DivisionWitness {
    pub degree: u32,
    /// The summands, one per submodule, as polynomial strings.
    pub parts: Vec<String>,
    /// `Σ‖p_i‖² / ‖p‖²` achieved by the minimal-norm split.
    pub ratio: f64,
    pub target_norm_sq: f64,
    #[serde(skip)]
    pub part_polys: Vec<VectorPoly>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableDivSummary {
    pub sup_constant: Option<f64>,
    pub at_degree: Option<u32>,
    pub trend: Trend,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableDivReport {
    pub per_degree: Vec<StableDivDegree>,
    pub witness: Option<DivisionWitness>,
    pub summary: StableDivSummary,
}

/// Absolute eigenvalue floor that separates true kernel directions from small
/// gaps at desk scale.
const EIGEN_ZERO_FLOOR: f64 = 1e-12;

/// Per-degree stable-division constants `C_k`, and (optionally) the
/// minimal-norm decomposition of a target element of the join.
///
/// `C_k` is `1/λ⁺_min` for the smallest nonzero eigenvalue of `ΣP_i`
/// restricted to the join slice; this equals `‖S^{-1}‖²` for the summation
/// map from `⊕N_i` onto the join, restricted to the complement of its kernel.
pub fn stable_division(
    modules: &[GradedSubmodule],
    degrees: std::ops::RangeInclusive<u32>,
    target: Option<&VectorPoly>,
    rank_tol: f64,
) -> Result<StableDivReport, AngleError> {
    if modules.is_empty() {
        return Err(AngleError::SingleModule);
    }
    check_family(modules)?;
    let ks: Vec<u32> = degrees.collect();
    if ks.is_empty() {
        return Err(AngleError::EmptyDegreeRange);
    }
    let per_degree: Result<Vec<StableDivDegree>, AngleError> = ks
        .par_iter()
        .map(|&k| {
            let slices: Vec<SubspaceSlice> =
                modules.iter().map(|m| m.slice(k, rank_tol)).collect();
            let join = computed_join(&slices, rank_tol)?;
            if join.is_empty() {
                return Ok(StableDivDegree {
                    degree: k,
                    constant: None,
                    lambda_min_pos: None,
                    join_rank: 0,
                });
            }
            let m = join.rank();
            let mut a = CMat::zeros(m, m);
            for s in &slices {
                if !s.is_empty() {
                    let c = s.basis().adjoint() * join.basis();
                    a += c.adjoint() * c;
                }
            }
            let lambda = hermitian_eigenvalues(&a)
                .into_iter()
                .find(|&v| v > EIGEN_ZERO_FLOOR);
            Ok(StableDivDegree {
                degree: k,
                constant: lambda.map(|l| 1.0 / l),
                lambda_min_pos: lambda,
                join_rank: m,
            })
        })
        .collect();
    let per_degree = per_degree?;

    let witness = match target {
        None => None,
        Some(p) => Some(decompose_target(modules, p, rank_tol)?),
    };

    let mut sup = None;
    let mut at = None;
    for row in &per_degree {
        if let Some(c) = row.constant {
            if sup.is_none_or(|s| c > s) {
                sup = Some(c);
                at = Some(row.degree);
            }
        }
    }
    let values: Vec<f64> = per_degree.iter().filter_map(|r| r.constant).collect();
    Ok(StableDivReport {
        per_degree,
        witness,
        summary: StableDivSummary {
            sup_constant: sup,
            at_degree: at,
            trend: trend_of(&values),
        },
    })
}

fn decompose_target(
    modules: &[GradedSubmodule],
    target: &VectorPoly,
    rank_tol: f64,
) -> Result<DivisionWitness, AngleError> {
    let k = target.degree();
    let slices: Vec<SubspaceSlice> = modules.iter().map(|m| m.slice(k, rank_tol)).collect();
    let join = computed_join(&slices, rank_tol)?;
    let ambient = crate::slices::AmbientBasis::new(modules[0].dim(), modules[0].rank(), k);
    let x = ambient.coords(target);
    let xn = x.norm();
    let residual = if join.is_empty() {
        xn
    } else {
        join.residual_norm(&x)
    };
    if residual > 1e-8 * xn.max(1.0) {
        return Err(AngleError::TargetNotInJoin(residual));
    }
    // Stacked-basis summation map ⊕ℂ^{m_i} → ambient; the pseudo-inverse
    // gives the minimal Σ‖c_i‖² solution.
    let total: usize = slices.iter().map(SubspaceSlice::rank).sum();
    let mut stacked = CMat::zeros(ambient.dimension(), total);
    let mut col = 0;
    for s in &slices {
        if !s.is_empty() {
            stacked.columns_mut(col, s.rank()).copy_from(s.basis());
            col += s.rank();
        }
    }
    let c = pinv_solve(&stacked, &x, rank_tol);
    let mut parts = Vec::with_capacity(slices.len());
    let mut achieved = 0.0;
    let mut col = 0;
    for s in &slices {
        if s.is_empty() {
            parts.push(VectorPoly::zero(modules[0].dim(), modules[0].rank(), k));
            continue;
        }
        let ci = c.rows(col, s.rank()).into_owned();
        col += s.rank();
        let coords = s.basis() * ci;
        achieved += coords.norm_squared();
        parts.push(ambient.vector_poly(&coords));
    }
    let target_norm_sq = da_norm_sq(target);
    Ok(DivisionWitness {
        degree: k,
        parts: parts.iter().map(|p| p.to_string()).collect(),
        ratio: achieved / target_norm_sq,
        target_norm_sq,
        part_polys: parts,
    })
}

/// Sum of the projections of the given slices (shared by diagnostics and
/// tests).
pub fn projection_sum(slices: &[SubspaceSlice]) -> DMatrix<Complex64> {
    let ambient = slices[0].ambient_dim();
    let mut acc = CMat::zeros(ambient, ambient);
    for s in slices {
        acc += s.projection();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_homog_poly;
    use crate::poly::{HomogPoly, DEFAULT_RANK_TOL};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn scalar_module(label: &str, texts: &[&str], dim: usize) -> GradedSubmodule {
        let polys: Vec<HomogPoly> = texts
            .iter()
            .map(|t| parse_homog_poly(t, dim).unwrap())
            .collect();
        GradedSubmodule::from_scalar_generators(label, &polys).unwrap()
    }

    fn coordinate_family() -> Vec<GradedSubmodule> {
        vec![
            scalar_module("N1", &["z1"], 3),
            scalar_module("N2", &["z2"], 3),
            scalar_module("N3", &["z3"], 3),
        ]
    }

    fn line(ambient: usize, angle: f64) -> SubspaceSlice {
        // A line in the degree-1 slice of d = ambient variables.
        let mut v = DVector::zeros(ambient);
        v[0] = Complex64::from(angle.cos());
        v[1] = Complex64::from(angle.sin());
        SubspaceSlice::from_orthonormal(ambient, 1, 1, CMat::from_columns(&[v]))
    }

    #[test]
    fn friedrichs_pair_examples() {
        // Orthogonal lines.
        let s = line(2, 0.0);
        let t = line(2, std::f64::consts::FRAC_PI_2);
        assert!(friedrichs_pair(&s, &t, DEFAULT_RANK_TOL).unwrap() < 1e-12);

        // Equal slices: the intersection removes everything.
        assert!(friedrichs_pair(&s, &s, DEFAULT_RANK_TOL).unwrap() < 1e-12);

        // Lines at angle θ: cosine is cos θ.
        let theta = 0.4f64;
        let u = line(2, theta);
        assert_relative_eq!(
            friedrichs_pair(&s, &u, DEFAULT_RANK_TOL).unwrap(),
            theta.cos(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn coordinate_family_has_cosine_one_half() {
        let family = coordinate_family();
        for k in 1..=8u32 {
            let slices: Vec<SubspaceSlice> = family
                .iter()
                .map(|m| m.slice(k, DEFAULT_RANK_TOL))
                .collect();
            let join = slices
                .iter()
                .skip(1)
                .fold(slices[0].clone(), |a, b| a.join(b, DEFAULT_RANK_TOL).unwrap());
            let c = bgm_formula(&slices, &join, DEFAULT_RANK_TOL).unwrap();
            assert_relative_eq!(c, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn bgm_rejects_single_module_and_wrong_join() {
        let family = coordinate_family();
        let s = family[0].slice(2, DEFAULT_RANK_TOL);
        assert!(matches!(
            bgm_formula(std::slice::from_ref(&s), &s, DEFAULT_RANK_TOL),
            Err(AngleError::SingleModule)
        ));
        let t = family[1].slice(2, DEFAULT_RANK_TOL);
        let bad_join = s.clone();
        assert!(matches!(
            bgm_formula(&[s, t], &bad_join, DEFAULT_RANK_TOL),
            Err(AngleError::JoinMismatch(_))
        ));
    }

    #[test]
    fn duplicate_pair_reports_raw_negative_value() {
        let s = line(2, 0.3);
        let join = s.clone();
        let raw = bgm_formula(&[s.clone(), s], &join, DEFAULT_RANK_TOL).unwrap();
        assert_relative_eq!(raw, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn rayleigh_matches_hand_value_at_degree_one() {
        let family = coordinate_family();
        let slices: Vec<SubspaceSlice> = family
            .iter()
            .map(|m| m.slice(1, DEFAULT_RANK_TOL))
            .collect();
        let c = rayleigh_cosine(&slices, DEFAULT_RANK_TOL).unwrap();
        assert_relative_eq!(c, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn rayleigh_zero_for_perpendicular_pair() {
        // Two-submodule case: cosine 0 exactly when the pair is perpendicular.
        let s = line(2, 0.0);
        let t = line(2, std::f64::consts::FRAC_PI_2);
        assert!(rayleigh_cosine(&[s, t], DEFAULT_RANK_TOL).unwrap().abs() < 1e-10);
    }

    #[test]
    fn borwein_examples() {
        let family = coordinate_family();
        let slices: Vec<SubspaceSlice> = family
            .iter()
            .map(|m| m.slice(1, DEFAULT_RANK_TOL))
            .collect();
        let v = borwein_product(&slices, DEFAULT_RANK_TOL).unwrap();
        assert!(v < 1.0);
        // The coordinate complements are simultaneously diagonal, so the
        // ordered product annihilates the join entirely at every degree.
        assert!(v.abs() < 1e-12);

        // A single slice: the complement kills the join.
        let single = family[0].slice(3, DEFAULT_RANK_TOL);
        assert!(borwein_product(&[single], DEFAULT_RANK_TOL).unwrap() < 1e-12);
    }

    #[test]
    fn graded_cosine_sweeps() {
        let family = coordinate_family();
        let report = graded_cosine(&family, 1..=8, AngleMethod::Bgm, DEFAULT_RANK_TOL).unwrap();
        assert_relative_eq!(report.summary.max_cosine, 0.5, epsilon = 1e-9);
        for row in &report.per_degree {
            assert!(row.cosine <= 1.0 + 1e-9);
            assert!(row.lambda_min.unwrap() >= -1e-9);
            assert_relative_eq!(row.lambda_min.unwrap(), 1.0, epsilon = 1e-9);
        }

        // Degrees below every generator give empty joins, flagged, cosine 0.
        let high = vec![
            scalar_module("A", &["z1^3"], 2),
            scalar_module("B", &["z2^3"], 2),
        ];
        let r = graded_cosine(&high, 0..=2, AngleMethod::Bgm, DEFAULT_RANK_TOL).unwrap();
        assert!(r
            .per_degree
            .iter()
            .all(|row| row.empty_join && row.cosine == 0.0));

        assert!(matches!(
            graded_cosine(&family, 5..=1, AngleMethod::Bgm, DEFAULT_RANK_TOL),
            Err(AngleError::EmptyDegreeRange)
        ));
    }

    #[test]
    fn two_generator_pair_cosine_climbs_toward_one() {
        let pair = vec![
            scalar_module("N1", &["z1^2 + z2*z3"], 3),
            scalar_module("N2", &["z2^2"], 3),
        ];
        let report = graded_cosine(&pair, 2..=8, AngleMethod::Bgm, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(report.summary.trend, Trend::Increasing);
        let values: Vec<f64> = report.per_degree.iter().map(|r| r.cosine).collect();
        for w in values.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(*values.last().unwrap() < 1.0);
        assert!(*values.last().unwrap() > 0.9);
    }

    #[test]
    fn pairwise_reduction_on_batteries() {
        let family = coordinate_family();
        let ok = pairwise_reduction_check(&family, 1..=6, DEFAULT_RANK_TOL).unwrap();
        assert!(ok.all_bounded);
        assert!(ok.max_pair_cosine < 1.0 - 1e-3);

        let pair = vec![
            scalar_module("N1", &["z1^2 + z2*z3"], 3),
            scalar_module("N2", &["z2^2"], 3),
        ];
        let close = pairwise_reduction_check(&pair, 2..=10, DEFAULT_RANK_TOL).unwrap();
        assert!(close.max_pair_cosine > 0.95);
    }

    #[test]
    fn stable_division_of_z1z2() {
        let modules = vec![
            scalar_module("N1", &["z1"], 2),
            scalar_module("N2", &["z2"], 2),
        ];
        let target = VectorPoly::scalar(&parse_homog_poly("z1*z2", 2).unwrap());
        let report = stable_division(&modules, 1..=8, Some(&target), DEFAULT_RANK_TOL).unwrap();

        // C_k = 1 for all k: the minimal eigenvalue of P_1+P_2 on the join is 1.
        for row in &report.per_degree {
            assert_relative_eq!(row.constant.unwrap(), 1.0, epsilon = 1e-9);
        }

        // Minimal split of z1z2 is (½z1z2, ½z1z2) with ratio ½.
        let w = report.witness.unwrap();
        assert_relative_eq!(w.ratio, 0.5, epsilon = 1e-10);
        let half = VectorPoly::scalar(&parse_homog_poly("z1*z2", 2).unwrap())
            .scale(Complex64::from(0.5));
        for part in &w.part_polys {
            assert!(crate::poly::da_norm(&part.sub(&half)) < 1e-10);
        }
    }

    #[test]
    fn stable_division_rejects_outside_targets() {
        let modules = vec![
            scalar_module("N1", &["z1"], 2),
            scalar_module("N2", &["z1"], 2),
        ];
        let target = VectorPoly::scalar(&parse_homog_poly("z2^2", 2).unwrap());
        assert!(matches!(
            stable_division(&modules, 1..=3, Some(&target), DEFAULT_RANK_TOL),
            Err(AngleError::TargetNotInJoin(_))
        ));
    }

    #[test]
    fn divergent_pair_constants_increase() {
        let modules = vec![
            scalar_module("N1", &["z1^2 + z2*z3"], 3),
            scalar_module("N2", &["z2^2"], 3),
        ];
        let report = stable_division(&modules, 2..=10, None, DEFAULT_RANK_TOL).unwrap();
        let cs: Vec<f64> = report
            .per_degree
            .iter()
            .filter_map(|r| r.constant)
            .collect();
        for w in cs.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(cs.last().unwrap() / cs.first().unwrap() > 10.0);
    }

    #[test]
    fn bgm_equals_one_minus_gap_over_n_minus_one() {
        // The identity behind the stable-division constant: c = 1 − λ_min/(n−1).
        let family = vec![
            scalar_module("A", &["z1", "z2^2"], 3),
            scalar_module("B", &["z2"], 3),
            scalar_module("C", &["z1 + z3"], 3),
        ];
        for k in 1..=5u32 {
            let slices: Vec<SubspaceSlice> = family
                .iter()
                .map(|m| m.slice(k, DEFAULT_RANK_TOL))
                .collect();
            let join = slices
                .iter()
                .skip(1)
                .fold(slices[0].clone(), |a, b| a.join(b, DEFAULT_RANK_TOL).unwrap());
            let c = bgm_formula(&slices, &join, DEFAULT_RANK_TOL).unwrap();
            let gap = min_gap(&slices, &join).unwrap();
            assert_relative_eq!(c, 1.0 - gap / 2.0, epsilon = 1e-9);
        }
    }
}
