//! Dense linear operators on a Euclidean model space.
//!
//! Three thin wrappers around [`nalgebra::DMatrix`] encode the symmetry class
//! of an operator in the type: [`EndOp`] (no constraint), [`SymOp`]
//! (self-adjoint) and [`SkewOp`] (skew-adjoint).  The symmetric operators form
//! the ambient inner-product space in which curvature-operator curves live;
//! skew operators generate the one-parameter rotation groups that drive those
//! curves.  Free functions provide the handful of algebraic operations the
//! rest of the crate is built on: Frobenius inner product, matrix exponential,
//! conjugation, commutator ("derivation") action and numerical rank.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default relative threshold used when counting numerically nonzero singular
/// values in [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Relative tolerance on the defective (wrong-symmetry) part accepted by the
/// [`SymOp`] / [`SkewOp`] constructors before the input is rejected.
const SYMMETRY_TOL: f64 = 1e-12;

fn check_square_finite(mat: &DMatrix<f64>) -> Result<()> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::DimMismatch {
            left: mat.nrows(),
            right: mat.ncols(),
        });
    }
    if mat.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// General (unconstrained) linear endomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct EndOp {
    mat: DMatrix<f64>,
}

impl EndOp {
    /// Wraps a square matrix with finite entries.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&mat)?;
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Inverse via LU; errors when the matrix is numerically singular.
    pub fn try_inverse(&self) -> Result<EndOp> {
        self.mat
            .clone()
            .try_inverse()
            .map(|mat| EndOp { mat })
            .ok_or(Error::Singular)
    }
}

/// Self-adjoint operator.  The stored matrix is exactly symmetric: the
/// constructor rejects inputs whose skew part exceeds `1e-12` of the norm and
/// symmetrizes what remains.
#[derive(Debug, Clone, PartialEq)]
pub struct SymOp {
    mat: DMatrix<f64>,
}

impl SymOp {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&mat)?;
        let defect = (&mat - mat.transpose()).norm();
        let scale = mat.norm();
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric {
                asymmetry: defect / scale,
            });
        }
        let n = mat.nrows();
        let mut sym = DMatrix::zeros(n, n);
        for i in 0..n {
            sym[(i, i)] = mat[(i, i)];
            for j in (i + 1)..n {
                let v = 0.5 * (mat[(i, j)] + mat[(j, i)]);
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }
        Ok(Self { mat: sym })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn as_end(&self) -> EndOp {
        EndOp {
            mat: self.mat.clone(),
        }
    }

    pub fn scale(&self, factor: f64) -> SymOp {
        SymOp {
            mat: &self.mat * factor,
        }
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }
}

impl std::ops::Add for &SymOp {
    type Output = SymOp;
    fn add(self, rhs: &SymOp) -> SymOp {
        SymOp {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &SymOp {
    type Output = SymOp;
    fn sub(self, rhs: &SymOp) -> SymOp {
        SymOp {
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// Skew-adjoint operator; same tolerance policy as [`SymOp`], with the stored
/// matrix exactly antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewOp {
    mat: DMatrix<f64>,
}

impl SkewOp {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&mat)?;
        let defect = (&mat + mat.transpose()).norm();
        let scale = mat.norm();
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::NotSkew {
                defect: defect / scale,
            });
        }
        let n = mat.nrows();
        let mut skew = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (mat[(i, j)] - mat[(j, i)]);
                skew[(i, j)] = v;
                skew[(j, i)] = -v;
            }
        }
        Ok(Self { mat: skew })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn as_end(&self) -> EndOp {
        EndOp {
            mat: self.mat.clone(),
        }
    }

    /// The square of a skew operator is symmetric (negative semidefinite).
    pub fn squared(&self) -> SymOp {
        let sq = &self.mat * &self.mat;
        SymOp::new(sq).expect("square of a skew matrix is symmetric")
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }
}

/// Frobenius inner product `tr(K1^T K2)` of two self-adjoint operators.
pub fn frobenius_inner(k1: &SymOp, k2: &SymOp) -> Result<f64> {
    if k1.dim() != k2.dim() {
        return Err(Error::DimMismatch {
            left: k1.dim(),
            right: k2.dim(),
        });
    }
    Ok(k1.mat.dot(&k2.mat))
}

/// Matrix exponential `exp(t S)` of a scaled skew operator.
///
/// For skew `S` the result is a rotation: orthogonal with determinant one.
/// Evaluation uses the scaling-and-squaring Padé scheme, which is accurate to
/// machine roundoff for the operator norms that arise here.
pub fn mat_exp(s: &SkewOp, t: f64) -> EndOp {
    EndOp {
        mat: (&s.mat * t).exp(),
    }
}

/// Conjugation `g R g^{-1}` of a self-adjoint operator.
///
/// When `g` is orthogonal this is the pushforward of `R` under the rotation
/// and stays self-adjoint; a `g` far from orthogonal is rejected because the
/// result would leave the symmetric class.
pub fn adjoint_action(g: &EndOp, r: &SymOp) -> Result<SymOp> {
    if g.dim() != r.dim() {
        return Err(Error::DimMismatch {
            left: g.dim(),
            right: r.dim(),
        });
    }
    let g_inv = g.try_inverse()?;
    SymOp::new(g.matrix() * r.matrix() * g_inv.matrix())
}

/// Commutator action `S R - R S` of a skew operator on an endomorphism.
///
/// This is the infinitesimal version of [`adjoint_action`] along
/// `t -> exp(t S)`; it acts as a derivation of the matrix product.
pub fn derivation_action(s: &SkewOp, r: &EndOp) -> Result<EndOp> {
    if s.dim() != r.dim() {
        return Err(Error::DimMismatch {
            left: s.dim(),
            right: r.dim(),
        });
    }
    Ok(EndOp {
        mat: &s.mat * &r.mat - &r.mat * &s.mat,
    })
}

/// [`derivation_action`] restricted to self-adjoint input, where the result is
/// again self-adjoint.
pub fn derivation_action_sym(s: &SkewOp, r: &SymOp) -> Result<SymOp> {
    let end = derivation_action(s, &r.as_end())?;
    SymOp::new(end.mat)
}

/// Dimension of the span of a family of self-adjoint operators.
///
/// Builds the Gram matrix under the Frobenius inner product and counts
/// singular values above `tol` times the largest one.  An all-zero family has
/// rank 0; an empty list is an error.
pub fn numerical_rank(ops: &[SymOp], tol: f64) -> Result<usize> {
    if ops.is_empty() {
        return Err(Error::EmptyList);
    }
    let dim = ops[0].dim();
    for op in ops {
        if op.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: op.dim(),
            });
        }
    }
    let k = ops.len();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = frobenius_inner(&ops[i], &ops[j])?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let singular = gram.singular_values();
    let max = singular.max();
    if max <= 0.0 {
        return Ok(0);
    }
    Ok(singular.iter().filter(|&&s| s > tol * max).count())
}

/// Rank of an arbitrary matrix by singular-value count, relative threshold.
pub fn matrix_rank(mat: &DMatrix<f64>, tol: f64) -> usize {
    let singular = mat.clone().singular_values();
    let max = singular.max();
    if max <= 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > tol * max).count()
}
