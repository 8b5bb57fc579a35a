//! Degree slices of graded submodules.
//!
//! A submodule generated by homogeneous elements splits over degrees, so its
//! geometry is captured by one finite-dimensional subspace per degree. The
//! ambient degree-`k` slice of the rank-`r` module carries the orthonormal
//! basis `e_α ⊗ e_j` with `e_α = sqrt(|α|!/α!)·z^α`, monomials in graded-lex
//! order and the vector index varying fastest; in these coordinates the
//! module inner product is the Euclidean one and all matrices below are
//! reproducible entry for entry.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    null_space, operator_norm, orthonormalize_cols, projection_from_basis, CMat, CVec,
};
use crate::multiindex::{enumerate_monomials, slice_dimension, MultiIndex};
use crate::poly::{da_weight_f64, rational_to_f64, HomogPoly, PolyError, VectorPoly};

#[derive(Debug, Error, PartialEq)]
pub enum SliceError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("ambient mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("submodule needs at least one nonzero homogeneous generator")]
    NoGenerators,
    #[error("tensor factor must have rank 1, got {0}")]
    TensorRank(usize),
    #[error("tensor subspace is zero")]
    ZeroSubspace,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The normalized monomial ⊗ standard-vector basis of a degree slice.
pub struct AmbientBasis {
    d: usize,
    r: usize,
    degree: u32,
    monos: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl AmbientBasis {
    pub fn new(d: usize, r: usize, degree: u32) -> Self {
        let monos = enumerate_monomials(d, degree);
        let index = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        AmbientBasis {
            d,
            r,
            degree,
            monos,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Ambient dimension `D_k = r·C(k+d−1, d−1)`.
    pub fn dimension(&self) -> usize {
        self.monos.len() * self.r
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monos
    }

    /// Coordinate of `e_α ⊗ e_j`: vector index fastest.
    pub fn position(&self, alpha: &MultiIndex, j: usize) -> usize {
        debug_assert!(j < self.r);
        self.index[alpha] * self.r + j
    }

    /// Euclidean coordinates of a vector polynomial of the slice degree.
    pub fn coords(&self, v: &VectorPoly) -> CVec {
        assert_eq!(v.dim(), self.d);
        assert_eq!(v.rank(), self.r);
        assert_eq!(v.degree(), self.degree, "degree does not match the slice");
        let mut out = CVec::zeros(self.dimension());
        for j in 0..self.r {
            for (alpha, c) in v.component(j).terms() {
                // z^α = sqrt(α!/|α|!)·e_α
                out[self.position(alpha, j)] += c * da_weight_f64(alpha).sqrt();
            }
        }
        out
    }

    /// Inverse of [`AmbientBasis::coords`].
    pub fn vector_poly(&self, coords: &CVec) -> VectorPoly {
        assert_eq!(coords.len(), self.dimension());
        let mut components = vec![HomogPoly::zero(self.d, self.degree); self.r];
        for (i, alpha) in self.monos.iter().enumerate() {
            let scale = 1.0 / da_weight_f64(alpha).sqrt();
            for j in 0..self.r {
                let c = coords[i * self.r + j];
                if c != Complex64::ZERO {
                    components[j] = components[j].add(&HomogPoly::monomial(
                        alpha.clone(),
                        c * scale,
                    ));
                }
            }
        }
        VectorPoly::from_components(components).expect("uniform degree by construction")
    }
}

/// An orthonormal-basis description of a subspace of one ambient degree slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceSlice {
    d: usize,
    r: usize,
    degree: u32,
    basis: CMat, // D_k × m, orthonormal columns
}

impl SubspaceSlice {
    /// The zero subspace of the degree-`k` slice.
    pub fn empty(d: usize, r: usize, degree: u32) -> Self {
        let ambient = slice_dimension(d, degree) * r;
        SubspaceSlice {
            d,
            r,
            degree,
            basis: CMat::zeros(ambient, 0),
        }
    }

    /// The whole ambient degree slice.
    pub fn full(d: usize, r: usize, degree: u32) -> Self {
        let ambient = slice_dimension(d, degree) * r;
        SubspaceSlice {
            d,
            r,
            degree,
            basis: CMat::identity(ambient, ambient),
        }
    }

    /// Orthonormalizes a spanning set of coordinate columns into a slice.
    pub fn from_span(d: usize, r: usize, degree: u32, span: &CMat, rank_tol: f64) -> Self {
        let ambient = slice_dimension(d, degree) * r;
        assert!(span.ncols() == 0 || span.nrows() == ambient);
        SubspaceSlice {
            d,
            r,
            degree,
            basis: orthonormalize_cols(span, rank_tol),
        }
    }

    /// Wraps an already-orthonormal basis matrix.
    pub fn from_orthonormal(d: usize, r: usize, degree: u32, basis: CMat) -> Self {
        let ambient = slice_dimension(d, degree) * r;
        assert!(basis.ncols() == 0 || basis.nrows() == ambient);
        SubspaceSlice { d, r, degree, basis }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn module_rank(&self) -> usize {
        self.r
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn ambient_dim(&self) -> usize {
        slice_dimension(self.d, self.degree) * self.r
    }

    /// Dimension of the subspace.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn ambient_basis(&self) -> AmbientBasis {
        AmbientBasis::new(self.d, self.r, self.degree)
    }

    /// The orthogonal projection `P = B·B^H`.
    pub fn projection(&self) -> CMat {
        projection_from_basis(&self.basis, self.ambient_dim())
    }

    /// Orthogonal complement within the full ambient slice.
    pub fn complement(&self, rank_tol: f64) -> SubspaceSlice {
        if self.is_empty() {
            return SubspaceSlice::full(self.d, self.r, self.degree);
        }
        // Null space of B^H; the residual after projecting out the columns.
        let ns = null_space(&self.basis.adjoint(), rank_tol.max(1e-12));
        SubspaceSlice {
            d: self.d,
            r: self.r,
            degree: self.degree,
            basis: ns,
        }
    }

    fn check_compatible(&self, other: &SubspaceSlice) -> Result<(), SliceError> {
        if self.degree != other.degree {
            return Err(SliceError::DegreeMismatch(self.degree, other.degree));
        }
        if self.ambient_dim() != other.ambient_dim() {
            return Err(SliceError::AmbientMismatch(
                self.ambient_dim(),
                other.ambient_dim(),
            ));
        }
        Ok(())
    }

    /// Span of the union.
    pub fn join(&self, other: &SubspaceSlice, rank_tol: f64) -> Result<SubspaceSlice, SliceError> {
        self.check_compatible(other)?;
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        let mut stacked = CMat::zeros(self.ambient_dim(), self.rank() + other.rank());
        stacked.columns_mut(0, self.rank()).copy_from(&self.basis);
        stacked
            .columns_mut(self.rank(), other.rank())
            .copy_from(&other.basis);
        Ok(SubspaceSlice {
            d: self.d,
            r: self.r,
            degree: self.degree,
            basis: orthonormalize_cols(&stacked, rank_tol),
        })
    }

    /// Intersection, computed as the joint null space of the two stacked
    /// complement bases.
    pub fn meet(&self, other: &SubspaceSlice, rank_tol: f64) -> Result<SubspaceSlice, SliceError> {
        self.check_compatible(other)?;
        if self.is_empty() || other.is_empty() {
            return Ok(SubspaceSlice::empty(self.d, self.r, self.degree));
        }
        let ca = self.complement(rank_tol);
        let cb = other.complement(rank_tol);
        if ca.is_empty() {
            return Ok(other.clone());
        }
        if cb.is_empty() {
            return Ok(self.clone());
        }
        let mut stacked = CMat::zeros(ca.rank() + cb.rank(), self.ambient_dim());
        stacked.rows_mut(0, ca.rank()).copy_from(&ca.basis.adjoint());
        stacked
            .rows_mut(ca.rank(), cb.rank())
            .copy_from(&cb.basis.adjoint());
        // x ⊥ both complements ⇔ x lies in both subspaces.
        let ns = null_space(&stacked, 1e-8);
        Ok(SubspaceSlice {
            d: self.d,
            r: self.r,
            degree: self.degree,
            basis: ns,
        })
    }

    /// Orthogonal complement of `self` within `ambient`: `ambient ∩ self^⊥`.
    pub fn complement_within(
        &self,
        ambient: &SubspaceSlice,
        rank_tol: f64,
    ) -> Result<SubspaceSlice, SliceError> {
        self.check_compatible(ambient)?;
        if self.is_empty() {
            return Ok(ambient.clone());
        }
        self.complement(rank_tol).meet(ambient, rank_tol)
    }

    /// `‖(I − P_self)·v‖` for a coordinate vector `v`: distance from the span.
    pub fn residual_norm(&self, v: &CVec) -> f64 {
        let inside = &self.basis * (self.basis.adjoint() * v);
        (v - inside).norm()
    }

    /// Distance between projections, `‖P_self − P_other‖₂`.
    pub fn projection_distance(&self, other: &SubspaceSlice) -> f64 {
        operator_norm(&(self.projection() - other.projection()))
    }
}

/// A graded submodule of the rank-`r` module, given by finitely many
/// homogeneous vector-valued generators.
#[derive(Clone, Debug)]
pub struct GradedSubmodule {
    d: usize,
    r: usize,
    generators: Vec<VectorPoly>,
    label: String,
}

impl GradedSubmodule {
    pub fn new(
        label: impl Into<String>,
        generators: Vec<VectorPoly>,
    ) -> Result<Self, SliceError> {
        let nonzero: Vec<VectorPoly> = generators.into_iter().filter(|g| !g.is_zero()).collect();
        let first = nonzero.first().ok_or(SliceError::NoGenerators)?;
        let (d, r) = (first.dim(), first.rank());
        for g in &nonzero {
            if g.dim() != d {
                return Err(PolyError::DimMismatch(d, g.dim()).into());
            }
            if g.rank() != r {
                return Err(PolyError::RankMismatch(r, g.rank()).into());
            }
        }
        Ok(GradedSubmodule {
            d,
            r,
            generators: nonzero,
            label: label.into(),
        })
    }

    /// Rank-1 submodule of the scalar space generated by polynomials.
    pub fn from_scalar_generators(
        label: impl Into<String>,
        polys: &[HomogPoly],
    ) -> Result<Self, SliceError> {
        GradedSubmodule::new(
            label,
            polys.iter().map(VectorPoly::scalar).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generators(&self) -> &[VectorPoly] {
        &self.generators
    }

    /// The degree-`k` component: the span of `z^β·g` over generators `g` and
    /// monomials `z^β` with `|β| = k − deg g`.
    pub fn slice(&self, degree: u32, rank_tol: f64) -> SubspaceSlice {
        let ambient = AmbientBasis::new(self.d, self.r, degree);
        let mut columns: Vec<CVec> = Vec::new();
        for g in &self.generators {
            if g.degree() > degree {
                continue;
            }
            for beta in enumerate_monomials(self.d, degree - g.degree()) {
                columns.push(ambient.coords(&g.multiply_mono(&beta)));
            }
        }
        if columns.is_empty() {
            return SubspaceSlice::empty(self.d, self.r, degree);
        }
        let span = CMat::from_columns(&columns);
        SubspaceSlice::from_span(self.d, self.r, degree, &span, rank_tol)
    }

    /// Tensors a rank-1 submodule with a subspace of ℂ^r given by spanning
    /// vectors: generators become `p ⊗ v` over an orthonormal basis of the
    /// span.
    pub fn tensor(
        &self,
        spanning: &[Vec<Complex64>],
        label: impl Into<String>,
    ) -> Result<GradedSubmodule, SliceError> {
        if self.r != 1 {
            return Err(SliceError::TensorRank(self.r));
        }
        let rank = spanning.first().map(Vec::len).ok_or(SliceError::ZeroSubspace)?;
        assert!(spanning.iter().all(|v| v.len() == rank));
        let span = CMat::from_fn(rank, spanning.len(), |i, j| spanning[j][i]);
        let basis = orthonormalize_cols(&span, 1e-12);
        if basis.ncols() == 0 {
            return Err(SliceError::ZeroSubspace);
        }
        let mut generators = Vec::new();
        for g in &self.generators {
            let p = g.component(0);
            for j in 0..basis.ncols() {
                let xi: Vec<Complex64> = basis.column(j).iter().copied().collect();
                generators.push(VectorPoly::tensor(p, &xi));
            }
        }
        GradedSubmodule::new(label, generators)
    }
}

/// Matrix of `M_{z_i}` from the degree-`k` slice to the degree-`k+1` slice in
/// normalized coordinates: `e_α ⊗ ξ ↦ sqrt((α_i+1)/(k+1))·e_{α+e_i} ⊗ ξ`.
pub fn shift_block(d: usize, r: usize, var: usize, degree: u32) -> CMat {
    assert!(var < d);
    let source = AmbientBasis::new(d, r, degree);
    let target = AmbientBasis::new(d, r, degree + 1);
    let mut m = CMat::zeros(target.dimension(), source.dimension());
    let step = MultiIndex::unit(d, var);
    for alpha in source.monomials() {
        let entry = f64::sqrt(
            f64::from(alpha.exp(var) + 1) / f64::from(degree + 1),
        );
        let raised = alpha.add(&step);
        for j in 0..r {
            m[(target.position(&raised, j), source.position(alpha, j))] = Complex64::from(entry);
        }
    }
    m
}

/// Matrix of `M_p ⊗ I` from the degree-`k` slice to the degree-`k+deg p`
/// slice in normalized coordinates. The adjoint block is the conjugate
/// transpose, which realizes `M_{z_i}^* = (N+1)^{-1}∂_i` without ever forming
/// an unbounded operator.
pub fn multiplication_block(p: &HomogPoly, r: usize, degree: u32) -> CMat {
    let d = p.dim();
    let source = AmbientBasis::new(d, r, degree);
    let target = AmbientBasis::new(d, r, degree + p.degree());
    let mut m = CMat::zeros(target.dimension(), source.dimension());
    for beta in source.monomials() {
        // e_β = sqrt(|β|!/β!)·z^β, so p·e_β lands on sqrt-weight ratios.
        let scale_in = 1.0 / da_weight_f64(beta).sqrt();
        for (gamma, c) in p.terms() {
            let raised = beta.add(gamma);
            let w = rational_to_f64(&crate::poly::da_weight(&raised)).sqrt();
            let entry = c * (scale_in * w);
            for j in 0..r {
                m[(target.position(&raised, j), source.position(beta, j))] += entry;
            }
        }
    }
    m
}
