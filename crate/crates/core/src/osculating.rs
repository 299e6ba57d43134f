//! Curves of symmetric operators driven by a fixed rotation generator.
//!
//! Along a geodesic with initial direction `u`, parallel transport turns the
//! Jacobi operator into the curve
//!
//! ```text
//! K(t) = exp(t S) K(0) exp(-t S)
//! ```
//!
//! inside the space of symmetric operators, where `S` is the skew rotation
//! generator of the direction.  Its derivatives at `t = 0` are iterated
//! commutators `S.K, S.(S.K), ...`; the dimension of their span (the
//! *osculating rank*) controls how the curve sits in operator space.  Rank 2
//! means the curve is a round circle, whose center, radius and period this
//! module recovers numerically.

use crate::error::{Error, Result};
use crate::m3::{operator_data, Direction, M3Params};
use crate::opspace::{
    adjoint_action, derivation_action_sym, frobenius_inner, mat_exp, numerical_rank, SkewOp, SymOp,
};

/// Relative tolerance for "the curve returned to its starting point" when
/// detecting the period.
const PERIOD_RETURN_TOL: f64 = 1e-8;

/// Relative spread above which a rank-2 curve is rejected as not circular.
const CIRCLE_SPREAD_TOL: f64 = 1e-8;

/// The conjugation orbit `t -> exp(t S) K exp(-t S)` of a symmetric operator
/// under a one-parameter rotation group, with its derivatives at zero cached
/// up to order `n (n - 1) / 2` (the largest number of iterated commutators
/// that can stay linearly independent in dimension `n`).
#[derive(Debug, Clone)]
pub struct OperatorCurve {
    base: SymOp,
    generator: SkewOp,
    /// `derivatives[i]` is the `(i + 1)`-th iterated commutator action.
    derivatives: Vec<SymOp>,
}

/// Circle parameters of a rank-2 operator curve.
#[derive(Debug, Clone)]
pub struct CircleFit {
    pub center: SymOp,
    pub radius: f64,
    pub period: f64,
    /// Relative spread `(d_max - d_min) / radius` of the sample distances, a
    /// quality measure of the fit (tiny for a true circle).
    pub relative_spread: f64,
}

impl OperatorCurve {
    /// Builds the curve from its value and generator at `t = 0`.
    pub fn new(base: SymOp, generator: SkewOp) -> Result<Self> {
        if base.dim() != generator.dim() {
            return Err(Error::DimMismatch {
                left: base.dim(),
                right: generator.dim(),
            });
        }
        let n = base.dim();
        let max_order = n * (n - 1) / 2;
        let mut derivatives = Vec::with_capacity(max_order);
        let mut current = base.clone();
        for _ in 0..max_order {
            current = derivation_action_sym(&generator, &current)?;
            derivatives.push(current.clone());
        }
        Ok(Self {
            base,
            generator,
            derivatives,
        })
    }

    /// Curve of the Jacobi operator of `M3(kappa, tau)` along direction
    /// `(theta, phi)`: base `R_u`, generator `S_u`.
    pub fn for_m3(params: &M3Params, direction: &Direction) -> Self {
        let data = operator_data(params, direction);
        Self::new(data.r, data.s).expect("model operators share dimension 3")
    }

    pub fn base(&self) -> &SymOp {
        &self.base
    }

    pub fn generator(&self) -> &SkewOp {
        &self.generator
    }

    /// Largest cached derivative order, `n (n - 1) / 2`.
    pub fn max_order(&self) -> usize {
        self.derivatives.len()
    }

    /// Value `exp(t S) K exp(-t S)` at parameter `t`.
    pub fn curve_at(&self, t: f64) -> SymOp {
        let g = mat_exp(&self.generator, t);
        adjoint_action(&g, &self.base).expect("conjugation by a rotation preserves symmetry")
    }

    /// `i`-th derivative at `t = 0` (iterated commutator), `i >= 1`.
    ///
    /// Orders beyond [`max_order`](Self::max_order) are computed on demand;
    /// they are linear combinations of the cached ones.
    pub fn derivative_at_zero(&self, i: usize) -> Result<SymOp> {
        if i == 0 {
            return Err(Error::InvalidParam(
                "derivative order must be at least 1".into(),
            ));
        }
        if i <= self.derivatives.len() {
            return Ok(self.derivatives[i - 1].clone());
        }
        let mut current = self.derivatives.last().cloned().unwrap_or_else(|| {
            // max_order = 0 only in dimension 1, where everything commutes.
            self.base.clone()
        });
        for _ in self.derivatives.len()..i {
            current = derivation_action_sym(&self.generator, &current)?;
        }
        Ok(current)
    }

    /// Number of linearly independent derivatives among the first
    /// `max_order`, measured with [`numerical_rank`].
    ///
    /// Derivatives are first screened against the noise floor of the input
    /// data: the `i`-th derivative is an `i`-fold commutator, bounded by
    /// `|K| (2 |S|)^i`, so anything smaller than `tol` times that bound is
    /// rounding residue of a vanishing commutator, not signal.  Without the
    /// screen, a curve that is constant to machine precision would have its
    /// noise counted as full-rank.
    pub fn osculating_rank(&self, tol: f64) -> Result<usize> {
        let mut scale = self.base.norm();
        let gen_scale = 2.0 * self.generator.norm();
        let mut significant = Vec::new();
        for derivative in &self.derivatives {
            scale *= gen_scale;
            if derivative.norm() > tol * scale {
                significant.push(derivative.clone());
            }
        }
        if significant.is_empty() {
            return Ok(0);
        }
        numerical_rank(&significant, tol)
    }

    /// The companion curve shifted by the square of the generator
    /// (`K(t) + S^2`, the canonical-curvature curve in the model setting).
    ///
    /// Same derivatives as the main curve, since `S^2` is conjugation-fixed.
    pub fn tilde_curve_at(&self, t: f64) -> SymOp {
        &self.curve_at(t) + &self.generator.squared()
    }

    /// Detects the period and fits center/radius of a rank-2 curve.
    ///
    /// The period comes from the eigenfrequencies of the generator (the curve
    /// oscillates at differences of its eigenvalues, so the fundamental
    /// period is `pi / w` or `2 pi / w` with `w` the largest frequency); a
    /// direct scan for the return time backs this up if neither candidate
    /// closes the curve.  The center is the mean over one uniform period of
    /// samples, and every sample must be equidistant from it within
    /// `1e-8` relative spread.
    pub fn fit_circle(&self, samples: usize) -> Result<CircleFit> {
        let rank = self.osculating_rank(crate::opspace::DEFAULT_RANK_TOL)?;
        if rank != 2 {
            return Err(Error::RankNotTwo { rank });
        }
        if samples < 8 {
            return Err(Error::InvalidParam(format!(
                "circle fit needs at least 8 samples, got {samples}"
            )));
        }
        let period = self.detect_period()?;

        let n = samples;
        let points: Vec<SymOp> = (0..n)
            .map(|j| self.curve_at(period * j as f64 / n as f64))
            .collect();
        let mut center = SymOp::zeros(self.base.dim());
        for p in &points {
            center = &center + p;
        }
        let center = center.scale(1.0 / n as f64);

        let mut d_min = f64::INFINITY;
        let mut d_max = 0.0_f64;
        let mut d_sum = 0.0;
        for p in &points {
            let diff = p - &center;
            let d = frobenius_inner(&diff, &diff)?.sqrt();
            d_min = d_min.min(d);
            d_max = d_max.max(d);
            d_sum += d;
        }
        let radius = d_sum / n as f64;
        let relative_spread = if radius > 0.0 {
            (d_max - d_min) / radius
        } else {
            f64::INFINITY
        };
        if relative_spread >= CIRCLE_SPREAD_TOL {
            return Err(Error::NotACircle {
                spread: relative_spread,
            });
        }
        Ok(CircleFit {
            center,
            radius,
            period,
            relative_spread,
        })
    }

    fn detect_period(&self) -> Result<f64> {
        let eigs = self.generator.matrix().clone().complex_eigenvalues();
        let omega = eigs.iter().map(|z| z.im.abs()).fold(0.0_f64, f64::max);
        if omega <= 0.0 {
            return Err(Error::Domain(
                "generator has no rotation frequency; curve cannot be periodic".into(),
            ));
        }
        let scale = self.base.norm().max(1.0);
        let returns = |t: f64| {
            let diff = &self.curve_at(t) - &self.base;
            diff.norm() < PERIOD_RETURN_TOL * scale
        };
        let full = std::f64::consts::TAU / omega;
        for candidate in [0.5 * full, full] {
            if returns(candidate) {
                return Ok(candidate);
            }
        }
        // Fallback: coarse autocorrelation-style scan for the first return,
        // refined by local minimization of the return distance.
        let steps = 4096;
        let mut best = (f64::INFINITY, full);
        for k in 1..=steps {
            let t = 2.0 * full * k as f64 / steps as f64;
            let d = (&self.curve_at(t) - &self.base).norm();
            if d < best.0 {
                best = (d, t);
            }
        }
        let mut lo = best.1 - 2.0 * full / steps as f64;
        let mut hi = best.1 + 2.0 * full / steps as f64;
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let d1 = (&self.curve_at(m1) - &self.base).norm();
            let d2 = (&self.curve_at(m2) - &self.base).norm();
            if d1 < d2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        if returns(t) {
            Ok(t)
        } else {
            Err(Error::Domain(
                "no return time found; curve does not appear periodic".into(),
            ))
        }
    }
}
