//! Reductive decompositions `g = m + k` with dense bracket tables.
//!
//! A [`ReductiveAlgebra`] stores the structure constants of a Lie algebra `g`
//! split into a "tangent" part `m` (carrying an inner product) and an isotropy
//! part `k` with `[k, m] ⊆ m`.  All geometric operators of the canonical
//! connection on the associated homogeneous space are basis computations on
//! these tables:
//!
//! * torsion         `T_u : x -> -[u, x]_m`
//! * curvature       `R~_u : x -> [[u, x]_k, u]`
//! * rotation part   `S_u : x -> (1/2) [u, x]_m`
//! * Jacobi operator `R_u = R~_u - S_u^2` (for unit `u`)
//!
//! plus the full two-slot curvature operator and the test for a bi-invariant
//! metric extension to `g`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::opspace::{EndOp, SkewOp, SymOp};

/// Violation threshold below which an algebra counts as naturally reductive.
pub const NATURAL_REDUCTIVITY_TOL: f64 = 1e-10;

/// Residual threshold for the Jacobi identity, enforced at construction.
const JACOBI_IDENTITY_TOL: f64 = 1e-10;

/// Relative unit-norm tolerance for directions fed to the Jacobi operator.
const UNIT_NORM_TOL: f64 = 1e-9;

/// Largest supported `m` dimension (dense tables, small-dimension scope).
const MAX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    MmM,
    MmK,
    Km,
    Kk,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::MmM => "mm_m",
            Kind::MmK => "mm_k",
            Kind::Km => "km",
            Kind::Kk => "kk",
        }
    }
}

/// Incremental construction of a [`ReductiveAlgebra`].
///
/// Bracket coefficients are recorded sparsely; for the kinds that are
/// antisymmetric in the bracketed slots (`mm_m`, `mm_k`, `kk`) the mirrored
/// entry is filled in automatically, and explicitly providing both orders
/// with `v_ij + v_ji != 0` is rejected.  Omitted coefficients are zero.
#[derive(Debug, Clone)]
pub struct ReductiveAlgebraBuilder {
    dim_m: usize,
    dim_k: usize,
    metric: DMatrix<f64>,
    entries: BTreeMap<(Kind, usize, usize, usize), f64>,
}

impl ReductiveAlgebraBuilder {
    pub fn new(dim_m: usize, dim_k: usize) -> Self {
        Self {
            dim_m,
            dim_k,
            metric: DMatrix::identity(dim_m, dim_m),
            entries: BTreeMap::new(),
        }
    }

    /// Sets the inner product on `m` (row-major validation happens in
    /// [`build`](Self::build)).
    pub fn metric(mut self, metric: DMatrix<f64>) -> Self {
        self.metric = metric;
        self
    }

    /// `([x_i, x_j]_m)^k = value`
    pub fn bracket_mm_m(self, i: usize, j: usize, k: usize, value: f64) -> Result<Self> {
        self.insert(Kind::MmM, i, j, k, value)
    }

    /// `([x_i, x_j]_k)^a = value` (third index into the `k` basis)
    pub fn bracket_mm_k(self, i: usize, j: usize, a: usize, value: f64) -> Result<Self> {
        self.insert(Kind::MmK, i, j, a, value)
    }

    /// `([A_a, x_j])^k = value` (first index into the `k` basis)
    pub fn bracket_km(self, a: usize, j: usize, k: usize, value: f64) -> Result<Self> {
        self.insert(Kind::Km, a, j, k, value)
    }

    /// `([A_a, A_b])^c = value` (all indices into the `k` basis)
    pub fn bracket_kk(self, a: usize, b: usize, c: usize, value: f64) -> Result<Self> {
        self.insert(Kind::Kk, a, b, c, value)
    }

    fn insert(mut self, kind: Kind, i: usize, j: usize, k: usize, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        let (ni, nj, nk) = self.bounds(kind);
        if i >= ni || j >= nj || k >= nk {
            return Err(Error::InvalidBracket(format!(
                "{} index ({i}, {j}, {k}) out of range for dims ({ni}, {nj}, {nk})",
                kind.name()
            )));
        }
        if kind != Kind::Km && i == j && value != 0.0 {
            return Err(Error::InvalidBracket(format!(
                "{} entry ({i}, {i}, {k}) must vanish (bracket of an element with itself)",
                kind.name()
            )));
        }
        if self.entries.insert((kind, i, j, k), value).is_some() {
            return Err(Error::InvalidBracket(format!(
                "duplicate {} entry ({i}, {j}, {k})",
                kind.name()
            )));
        }
        Ok(self)
    }

    fn bounds(&self, kind: Kind) -> (usize, usize, usize) {
        let (m, k) = (self.dim_m, self.dim_k);
        match kind {
            Kind::MmM => (m, m, m),
            Kind::MmK => (m, m, k),
            Kind::Km => (k, m, m),
            Kind::Kk => (k, k, k),
        }
    }

    /// Validates everything and produces the algebra: index/antisymmetry
    /// checks, symmetric positive-definite metric, Jacobi identity.
    pub fn build(self) -> Result<ReductiveAlgebra> {
        let (m, k) = (self.dim_m, self.dim_k);
        if m == 0 || m > MAX_DIM || k > MAX_DIM {
            return Err(Error::InvalidParam(format!(
                "dimensions out of supported range: dim_m = {m} (1..={MAX_DIM}), dim_k = {k} (0..={MAX_DIM})"
            )));
        }
        if self.metric.nrows() != m || self.metric.ncols() != m {
            return Err(Error::DimMismatch {
                left: self.metric.nrows() * self.metric.ncols(),
                right: m * m,
            });
        }
        let defect = (&self.metric - self.metric.transpose()).norm();
        if defect > 1e-12 * self.metric.norm() {
            return Err(Error::InvalidParam("metric must be symmetric".into()));
        }
        let metric = 0.5 * (&self.metric + self.metric.transpose());
        if nalgebra::Cholesky::new(metric.clone()).is_none() {
            return Err(Error::MetricNotPositiveDefinite);
        }

        let mut alg = ReductiveAlgebra {
            dim_m: m,
            dim_k: k,
            mm_m: vec![0.0; m * m * m],
            mm_k: vec![0.0; m * m * k],
            km: vec![0.0; k * m * m],
            kk: vec![0.0; k * k * k],
            metric,
        };

        for (&(kind, i, j, kk), &value) in &self.entries {
            if kind != Kind::Km {
                // Antisymmetric kinds: verify any explicit mirror, else fill it.
                if let Some(&mirror) = self.entries.get(&(kind, j, i, kk)) {
                    if value + mirror != 0.0 {
                        return Err(Error::InvalidBracket(format!(
                            "{} entries ({i}, {j}, {kk}) and ({j}, {i}, {kk}) are not antisymmetric",
                            kind.name()
                        )));
                    }
                } else {
                    *alg.table_mut(kind, j, i, kk) = -value;
                }
            }
            *alg.table_mut(kind, i, j, kk) = value;
        }

        let residual = alg.jacobi_identity_residual();
        if residual > JACOBI_IDENTITY_TOL {
            return Err(Error::JacobiIdentity { residual });
        }
        Ok(alg)
    }
}

/// Lie algebra with reductive decomposition and inner product on `m`.
///
/// Construction goes through [`ReductiveAlgebraBuilder`] or the JSON loaders,
/// so every value of this type satisfies antisymmetry of the bracket tables,
/// `[k, m] ⊆ m` (structural), a symmetric positive-definite metric and the
/// Jacobi identity on all basis triples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductiveAlgebra {
    dim_m: usize,
    dim_k: usize,
    /// `[x_i, x_j]_m` coefficients, index `(i * dim_m + j) * dim_m + k`.
    mm_m: Vec<f64>,
    /// `[x_i, x_j]_k` coefficients, index `(i * dim_m + j) * dim_k + a`.
    mm_k: Vec<f64>,
    /// `[A_a, x_j]` coefficients, index `(a * dim_m + j) * dim_m + k`.
    km: Vec<f64>,
    /// `[A_a, A_b]` coefficients, index `(a * dim_k + b) * dim_k + c`.
    kk: Vec<f64>,
    metric: DMatrix<f64>,
}

/// Outcome of the natural-reductivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalReductivity {
    pub is_naturally_reductive: bool,
    /// Largest cyclic-invariance violation `|<[x,y]_m, z> + <[x,z]_m, y>|`
    /// over basis triples.
    pub max_violation: f64,
}

/// Candidate bi-invariant extension of the metric to all of `g`, scaling the
/// (one-dimensional) `k` block by `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiInvariantCandidate {
    pub r: f64,
    pub base: ReductiveAlgebra,
}

impl BiInvariantCandidate {
    /// Largest ad-invariance violation `|B([x,y], z) + B([x,z], y)|` of the
    /// extended form over basis triples of `g`.
    pub fn max_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        self.base.for_each_invariance_triple(|alpha, beta| {
            worst = worst.max((alpha + beta * self.r).abs());
        });
        worst
    }
}

/// Result of the search for a bi-invariant extension (`dim k = 1` only).
#[derive(Debug, Clone, PartialEq)]
pub enum BiInvariantExtension {
    /// Exactly one positive `r` makes the extended form ad-invariant.
    Unique(BiInvariantCandidate),
    /// Every `r` works (the constraints put no weight on the `k` block);
    /// reported with `r = 1`.
    Any(BiInvariantCandidate),
    /// No positive `r` yields an ad-invariant extension.
    None { best_residual: f64 },
}

impl BiInvariantExtension {
    /// The scaling factor when a distinguished extension exists.
    pub fn unique_r(&self) -> Option<f64> {
        match self {
            BiInvariantExtension::Unique(c) => Some(c.r),
            _ => None,
        }
    }
}

impl ReductiveAlgebra {
    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    fn table_mut(&mut self, kind: Kind, i: usize, j: usize, k: usize) -> &mut f64 {
        let (m, dk) = (self.dim_m, self.dim_k);
        match kind {
            Kind::MmM => &mut self.mm_m[(i * m + j) * m + k],
            Kind::MmK => &mut self.mm_k[(i * m + j) * dk + k],
            Kind::Km => &mut self.km[(i * m + j) * m + k],
            Kind::Kk => &mut self.kk[(i * dk + j) * dk + k],
        }
    }

    /// Coefficient `([x_i, x_j]_m)^k`.
    pub fn mm_m_coef(&self, i: usize, j: usize, k: usize) -> f64 {
        self.mm_m[(i * self.dim_m + j) * self.dim_m + k]
    }

    /// Coefficient `([x_i, x_j]_k)^a`.
    pub fn mm_k_coef(&self, i: usize, j: usize, a: usize) -> f64 {
        self.mm_k[(i * self.dim_m + j) * self.dim_k + a]
    }

    /// Coefficient `([A_a, x_j])^k`.
    pub fn km_coef(&self, a: usize, j: usize, k: usize) -> f64 {
        self.km[(a * self.dim_m + j) * self.dim_m + k]
    }

    /// Coefficient `([A_a, A_b])^c`.
    pub fn kk_coef(&self, a: usize, b: usize, c: usize) -> f64 {
        self.kk[(a * self.dim_k + b) * self.dim_k + c]
    }

    /// Inner product of two `m` vectors.
    pub fn m_inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.metric * y)[(0, 0)]
    }

    /// `m` component of `[x, y]` for `x, y` in `m`.
    pub fn bracket_mm_m(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim_m;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let c = x[i] * y[j];
                if c == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += c * self.mm_m_coef(i, j, k);
                }
            }
        }
        out
    }

    /// `k` component of `[x, y]` for `x, y` in `m`.
    pub fn bracket_mm_k(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim_m;
        let mut out = DVector::zeros(self.dim_k);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let c = x[i] * y[j];
                if c == 0.0 {
                    continue;
                }
                for a in 0..self.dim_k {
                    out[a] += c * self.mm_k_coef(i, j, a);
                }
            }
        }
        out
    }

    /// `[w, x]` for `w` in `k`, `x` in `m` (lands in `m`).
    pub fn bracket_km(&self, w: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        self.adk_matrix(w) * x
    }

    /// Matrix of `ad_w` restricted to `m`, for `w` in `k`.
    fn adk_matrix(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim_m;
        let mut mat = DMatrix::zeros(n, n);
        for a in 0..self.dim_k {
            if w[a] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    mat[(k, j)] += w[a] * self.km_coef(a, j, k);
                }
            }
        }
        mat
    }

    /// Matrix of `x -> [u, x]_m`.
    fn ad_m_matrix(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim_m;
        let mut mat = DMatrix::zeros(n, n);
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    mat[(k, j)] += u[i] * self.mm_m_coef(i, j, k);
                }
            }
        }
        mat
    }

    fn check_m_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim_m {
            return Err(Error::DimMismatch {
                left: v.len(),
                right: self.dim_m,
            });
        }
        Ok(())
    }

    /// Cyclic-invariance test `<[x, y]_m, z> + <[x, z]_m, y> = 0` over all
    /// basis triples; reports the worst violation.
    pub fn check_naturally_reductive(&self) -> NaturalReductivity {
        let n = self.dim_m;
        let basis: Vec<DVector<f64>> = (0..n)
            .map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let bij = self.bracket_mm_m(&basis[i], &basis[j]);
                for k in 0..n {
                    let bik = self.bracket_mm_m(&basis[i], &basis[k]);
                    let v = self.m_inner(&bij, &basis[k]) + self.m_inner(&bik, &basis[j]);
                    worst = worst.max(v.abs());
                }
            }
        }
        NaturalReductivity {
            is_naturally_reductive: worst < NATURAL_REDUCTIVITY_TOL,
            max_violation: worst,
        }
    }

    /// Torsion operator of the canonical connection at direction `u`:
    /// `x -> -[u, x]_m`.
    pub fn torsion(&self, u: &DVector<f64>) -> Result<EndOp> {
        self.check_m_dim(u)?;
        EndOp::new(-self.ad_m_matrix(u))
    }

    /// Half-bracket rotation operator `S_u : x -> (1/2) [u, x]_m`.
    ///
    /// Skew for a naturally reductive algebra in an orthonormal basis; inputs
    /// for which the matrix is not skew are rejected by the wrapper type.
    pub fn s_operator(&self, u: &DVector<f64>) -> Result<SkewOp> {
        self.check_m_dim(u)?;
        SkewOp::new(0.5 * self.ad_m_matrix(u))
    }

    /// Curvature operator of the canonical connection at `u`:
    /// `x -> [[u, x]_k, u]`.
    pub fn canonical_curvature(&self, u: &DVector<f64>) -> Result<SymOp> {
        self.check_m_dim(u)?;
        let n = self.dim_m;
        // w_a = [A_a, u] for each isotropy basis element.
        let w: Vec<DVector<f64>> = (0..self.dim_k)
            .map(|a| DVector::from_fn(n, |k, _| (0..n).map(|l| u[l] * self.km_coef(a, l, k)).sum()))
            .collect();
        let mut mat = DMatrix::zeros(n, n);
        for j in 0..n {
            for (a, wa) in w.iter().enumerate() {
                // ([u, x_j]_k)^a
                let coef: f64 = (0..n).map(|i| u[i] * self.mm_k_coef(i, j, a)).sum();
                if coef == 0.0 {
                    continue;
                }
                for k in 0..n {
                    mat[(k, j)] += coef * wa[k];
                }
            }
        }
        SymOp::new(mat)
    }

    /// Jacobi operator `R_u = R~_u - S_u^2` of the underlying metric
    /// connection, for unit `u`.
    pub fn riemann_jacobi_operator(&self, u: &DVector<f64>) -> Result<SymOp> {
        self.check_m_dim(u)?;
        let norm_sq = self.m_inner(u, u);
        if (norm_sq - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnit {
                norm: norm_sq.max(0.0).sqrt(),
            });
        }
        let rtilde = self.canonical_curvature(u)?;
        let s = self.s_operator(u)?;
        SymOp::new(rtilde.matrix() - s.matrix() * s.matrix())
    }

    /// Two-slot curvature operator of the metric connection,
    /// `R_{x,y} = R~_{x,y} - [S_x, S_y] + 2 S_{S_x y}` with
    /// `R~_{x,y} = ad([x, y]_k)` on `m`.
    ///
    /// Sign convention: for orthonormal `x, y` the sectional curvature of
    /// their plane is `<R_{x,y} x, y>`.
    pub fn full_curvature(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<EndOp> {
        self.check_m_dim(x)?;
        self.check_m_dim(y)?;
        let rt = self.adk_matrix(&self.bracket_mm_k(x, y));
        let sx = 0.5 * self.ad_m_matrix(x);
        let sy = 0.5 * self.ad_m_matrix(y);
        let sxy = &sx * y;
        let s_sxy = 0.5 * self.ad_m_matrix(&sxy);
        EndOp::new(rt - (&sx * &sy - &sy * &sx) + 2.0 * s_sxy)
    }

    /// Residual of the Jacobi identity over all basis triples of `g`.
    ///
    /// Construction rejects algebras whose residual exceeds the built-in
    /// tolerance, so for any live value this is a diagnostic: it reports how
    /// far from an exact Lie algebra the supplied structure constants are.
    pub fn jacobi_identity_residual(&self) -> f64 {
        let total = self.dim_m + self.dim_k;
        let elems: Vec<(DVector<f64>, DVector<f64>)> = (0..total)
            .map(|idx| {
                let mut xm = DVector::zeros(self.dim_m);
                let mut xk = DVector::zeros(self.dim_k);
                if idx < self.dim_m {
                    xm[idx] = 1.0;
                } else {
                    xk[idx - self.dim_m] = 1.0;
                }
                (xm, xk)
            })
            .collect();
        let mut worst = 0.0_f64;
        for x in &elems {
            for y in &elems {
                let xy = self.bracket_full(x, y);
                for z in &elems {
                    let yz = self.bracket_full(y, z);
                    let zx = self.bracket_full(z, x);
                    let t1 = self.bracket_full(&xy, z);
                    let t2 = self.bracket_full(&yz, x);
                    let t3 = self.bracket_full(&zx, y);
                    let m = &t1.0 + &t2.0 + &t3.0;
                    let k = &t1.1 + &t2.1 + &t3.1;
                    worst = worst.max((m.norm_squared() + k.norm_squared()).sqrt());
                }
            }
        }
        worst
    }

    /// Full bracket on `g = m + k` of elements given as `(m part, k part)`.
    fn bracket_full(
        &self,
        x: &(DVector<f64>, DVector<f64>),
        y: &(DVector<f64>, DVector<f64>),
    ) -> (DVector<f64>, DVector<f64>) {
        let m_part = self.bracket_mm_m(&x.0, &y.0) + self.bracket_km(&x.1, &y.0)
            - self.bracket_km(&y.1, &x.0);
        let mut k_part = self.bracket_mm_k(&x.0, &y.0);
        for a in 0..self.dim_k {
            for b in 0..self.dim_k {
                let c = x.1[a] * y.1[b];
                if c == 0.0 {
                    continue;
                }
                for cc in 0..self.dim_k {
                    k_part[cc] += c * self.kk_coef(a, b, cc);
                }
            }
        }
        (m_part, k_part)
    }

    /// Visits every ordered basis triple `(x, y, z)` of `g`, passing the
    /// coefficients of the ad-invariance condition for the extended form
    /// `B_r`: the condition reads `alpha + beta * r = 0` where `alpha`
    /// collects the `m`-metric terms and `beta` the `k`-block terms.
    fn for_each_invariance_triple(&self, mut visit: impl FnMut(f64, f64)) {
        debug_assert_eq!(self.dim_k, 1);
        let total = self.dim_m + 1;
        let elems: Vec<(DVector<f64>, DVector<f64>)> = (0..total)
            .map(|idx| {
                let mut xm = DVector::zeros(self.dim_m);
                let mut xk = DVector::zeros(1);
                if idx < self.dim_m {
                    xm[idx] = 1.0;
                } else {
                    xk[0] = 1.0;
                }
                (xm, xk)
            })
            .collect();
        for x in &elems {
            for y in &elems {
                let xy = self.bracket_full(x, y);
                for z in &elems {
                    let xz = self.bracket_full(x, z);
                    let alpha = self.m_inner(&xy.0, &z.0) + self.m_inner(&xz.0, &y.0);
                    let beta = xy.1[0] * z.1[0] + xz.1[0] * y.1[0];
                    visit(alpha, beta);
                }
            }
        }
    }

    /// Searches for `r` such that the block form `metric on m (+) r on k` is
    /// ad-invariant on `g`, i.e. extends the metric bi-invariantly.
    ///
    /// Least squares in `r` over all basis triples; only `r > 0` qualifies
    /// (the extension must stay positive definite).  Requires `dim k = 1`.
    pub fn bi_invariant_extension(&self) -> Result<BiInvariantExtension> {
        if self.dim_k != 1 {
            return Err(Error::InvalidParam(format!(
                "bi-invariant extension requires dim_k = 1, got {}",
                self.dim_k
            )));
        }
        let mut sum_ab = 0.0;
        let mut sum_bb = 0.0;
        let mut max_alpha_unconstrained = 0.0_f64;
        self.for_each_invariance_triple(|alpha, beta| {
            sum_ab += alpha * beta;
            sum_bb += beta * beta;
            if beta == 0.0 {
                max_alpha_unconstrained = max_alpha_unconstrained.max(alpha.abs());
            }
        });

        const RESIDUAL_TOL: f64 = 1e-10;
        if sum_bb == 0.0 {
            return Ok(if max_alpha_unconstrained < RESIDUAL_TOL {
                BiInvariantExtension::Any(BiInvariantCandidate {
                    r: 1.0,
                    base: self.clone(),
                })
            } else {
                BiInvariantExtension::None {
                    best_residual: max_alpha_unconstrained,
                }
            });
        }

        let r = -sum_ab / sum_bb;
        let candidate = BiInvariantCandidate {
            r,
            base: self.clone(),
        };
        let residual = candidate.max_violation();
        if residual < RESIDUAL_TOL && r > 0.0 {
            Ok(BiInvariantExtension::Unique(candidate))
        } else {
            Ok(BiInvariantExtension::None {
                best_residual: residual,
            })
        }
    }

    /// Loads an algebra from its JSON description.
    ///
    /// Schema: top-level `dim_m`, `dim_k`, `metric_m` (row-major array of
    /// `dim_m * dim_m` numbers) and `brackets`, a list of entries
    /// `{"kind": "mm_m" | "mm_k" | "km" | "kk", "i": .., "j": .., "k": ..,
    /// "value": ..}` with 0-based indices.  Zero coefficients may be omitted;
    /// antisymmetric counterparts are filled in automatically.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: AlgebraSpec = serde_json::from_str(text)?;
        parsed.into_algebra()
    }

    /// [`from_json_str`](Self::from_json_str) on the contents of a file.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraSpec {
    dim_m: usize,
    dim_k: usize,
    metric_m: Vec<f64>,
    brackets: Vec<BracketEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketEntry {
    kind: String,
    i: usize,
    j: usize,
    k: usize,
    value: f64,
}

impl AlgebraSpec {
    fn into_algebra(self) -> Result<ReductiveAlgebra> {
        if self.metric_m.len() != self.dim_m * self.dim_m {
            return Err(Error::InvalidParam(format!(
                "metric_m has {} entries, expected dim_m^2 = {}",
                self.metric_m.len(),
                self.dim_m * self.dim_m
            )));
        }
        let metric = DMatrix::from_row_slice(self.dim_m, self.dim_m, &self.metric_m);
        let mut builder = ReductiveAlgebraBuilder::new(self.dim_m, self.dim_k).metric(metric);
        for e in &self.brackets {
            builder = match e.kind.as_str() {
                "mm_m" => builder.bracket_mm_m(e.i, e.j, e.k, e.value)?,
                "mm_k" => builder.bracket_mm_k(e.i, e.j, e.k, e.value)?,
                "km" => builder.bracket_km(e.i, e.j, e.k, e.value)?,
                "kk" => builder.bracket_kk(e.i, e.j, e.k, e.value)?,
                other => {
                    return Err(Error::InvalidBracket(format!(
                        "unknown bracket kind {other:?}"
                    )))
                }
            };
        }
        builder.build()
    }
}
