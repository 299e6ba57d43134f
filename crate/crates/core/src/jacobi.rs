//! Jacobi fields along geodesics of `M3(kappa, tau)`.
//!
//! In the left-invariant frame along a unit-speed geodesic with direction
//! `u`, the Jacobi equation of the model reads
//!
//! ```text
//! X'' + 2 S_u X' + R~_u X = 0,      X(0) = 0,
//! ```
//!
//! whose solutions with `X(0) = 0` this module produces in closed form, next
//! to a generic Runge-Kutta integrator used as an independent cross-check.
//!
//! All closed forms are organized around one singularity-free representation.
//! Writing `X'(0) = (a, b, c)` in the azimuth-zero frame and
//!
//! ```text
//! q = -tau (a cos(theta) - c sin(theta)),
//! E(t) = (1 - cos(w t)) / lambda,   F(t) = sin(w t) / w,   G(t) = (t - F(t)) / lambda
//! ```
//!
//! with `w = sqrt(lambda)` (entire functions of `lambda`; hyperbolic for
//! `lambda < 0`, polynomial near `lambda = 0`), the solution off the fiber is
//!
//! ```text
//! X1 = a t + tau cos(theta) (b E + q G)
//! X2 = b F + q E
//! X3 = c t - tau sin(theta) (b E + q G)
//! ```
//!
//! and on the fiber (`theta` in `{0, pi}`, `w = tau cos(theta)`):
//!
//! ```text
//! X1 = [a sin(w t) + b (1 - cos(w t))] / w
//! X2 = [-a (1 - cos(w t)) + b sin(w t)] / w
//! X3 = c t
//! ```
//!
//! Nonzero azimuth is handled equivariantly: rotate the initial derivative
//! back to azimuth zero, solve there, rotate the field forward.

use nalgebra::{DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::m3::{rotation_phi, Direction, M3Params, LAMBDA_ZERO_TOL};
use crate::opspace::EndOp;
use crate::reductive::ReductiveAlgebra;

/// Half-width of the `theta` band around `pi/2` inside which solutions are
/// reported in the equator coefficient convention (the generic convention
/// divides by `cos(theta)`).  Evaluation itself never branches on this.
pub const THETA_EQUATOR_TOL: f64 = 1e-6;

/// Angular collinearity tolerance of the isotropy test.
const ISOTROPY_ANGLE_TOL: f64 = 1e-10;

/// Default divergence bound for the numeric integrator.
const DIVERGENCE_BOUND: f64 = 1e12;

/// Which closed-form regime a solution lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiBranch {
    /// Fiber direction (`theta` exactly `0` or `pi`).
    HopfFiber,
    /// `lambda(theta) > 0`: trigonometric oscillation.
    LambdaPositive,
    /// `|lambda(theta)|` below the zero cut: polynomial regime with
    /// first-order `lambda` corrections.
    LambdaZero,
    /// `lambda(theta) < 0`: hyperbolic growth.
    LambdaNegative,
}

impl JacobiBranch {
    pub fn name(&self) -> &'static str {
        match self {
            JacobiBranch::HopfFiber => "hopf_fiber",
            JacobiBranch::LambdaPositive => "lambda_positive",
            JacobiBranch::LambdaZero => "lambda_zero",
            JacobiBranch::LambdaNegative => "lambda_negative",
        }
    }
}

/// Closed-form Jacobi field with `X(0) = 0` along a model geodesic.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    params: M3Params,
    direction: Direction,
    /// `X'(0)` in the ambient frame (as supplied).
    initial_derivative: Vector3<f64>,
    /// `X'(0)` rotated to the azimuth-zero frame: the `(a, b, c)` of the
    /// closed forms.
    frame_derivative: Vector3<f64>,
    branch: JacobiBranch,
    /// Branch-dependent coefficient triple `(A, B, C)`; see
    /// [`coefficients`](Self::coefficients).
    coefficients: [f64; 3],
    lambda: f64,
    q: f64,
    tcos: f64,
    tsin: f64,
    rot: Matrix3<f64>,
}

/// Outcome of the isotropy test for an initial derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyVerdict {
    /// Whether the Jacobi field is the restriction of a Killing field
    /// vanishing at the base point.
    pub is_isotropic: bool,
    /// Coefficient `A` with `X'(0) = [A * rot_generator, u]` when isotropic.
    pub killing_coefficient: Option<f64>,
}

/// Result of numeric integration: positions sampled at multiples of the step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    step: f64,
    positions: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Sample time of index `k` (`k * step`).
    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    pub fn position(&self, k: usize) -> &DVector<f64> {
        &self.positions[k]
    }
}

/// The entire kernels `E, F, G`; branch chooses the numerically safe series.
fn efg(branch: JacobiBranch, lambda: f64, t: f64) -> (f64, f64, f64) {
    match branch {
        JacobiBranch::LambdaPositive => {
            let w = lambda.sqrt();
            let (s, c) = (w * t).sin_cos();
            let f = s / w;
            ((1.0 - c) / lambda, f, (t - f) / lambda)
        }
        JacobiBranch::LambdaNegative => {
            let m = (-lambda).sqrt();
            let f = (m * t).sinh() / m;
            (((m * t).cosh() - 1.0) / -lambda, f, (f - t) / (m * m))
        }
        // |lambda| below the zero cut: truncated series; the omitted terms
        // are O(lambda^2 t^6) < 1e-12 for the supported ranges.
        _ => {
            let t2 = t * t;
            (
                t2 / 2.0 - lambda * t2 * t2 / 24.0,
                t - lambda * t * t2 / 6.0,
                t * t2 / 6.0 - lambda * t2 * t2 * t / 120.0,
            )
        }
    }
}

/// Time derivatives of the kernels: `E' = F`, `F' = cos-like`, `G' = E`.
fn efg_prime(branch: JacobiBranch, lambda: f64, t: f64) -> (f64, f64, f64) {
    let (e, f, _) = efg(branch, lambda, t);
    let cos_like = match branch {
        JacobiBranch::LambdaPositive => (lambda.sqrt() * t).cos(),
        JacobiBranch::LambdaNegative => ((-lambda).sqrt() * t).cosh(),
        _ => 1.0 - lambda * t * t / 2.0,
    };
    (f, cos_like, e)
}

/// Solves the initial value problem `X(0) = 0`, `X'(0) = xprime0` in closed
/// form.  Branch selection: fiber directions by exact `theta` in `{0, pi}`,
/// otherwise by the sign of `lambda(theta)` against the zero cut.
pub fn solve_closed_form(
    params: &M3Params,
    direction: &Direction,
    xprime0: Vector3<f64>,
) -> Result<JacobiSolution> {
    if !xprime0.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let theta = direction.theta();
    let tau = params.tau();
    let lambda = params.theta_invariants(theta).lambda;
    let rot = rotation_phi(direction.phi());
    let fd = rot.transpose() * xprime0;
    let (a, b, c) = (fd.x, fd.y, fd.z);
    let tcos = tau * theta.cos();
    let tsin = tau * theta.sin();
    let q = -(a * tcos - c * tsin);

    let (branch, coefficients) = if direction.is_hopf() {
        // omega = tau * cos(theta) = +-tau, never zero here.
        let omega = tcos;
        (JacobiBranch::HopfFiber, [b / omega, -a / omega, c])
    } else if lambda.abs() < LAMBDA_ZERO_TOL {
        (JacobiBranch::LambdaZero, [b, q, a])
    } else {
        let branch = if lambda > 0.0 {
            JacobiBranch::LambdaPositive
        } else {
            JacobiBranch::LambdaNegative
        };
        let w = lambda.abs().sqrt();
        let coefficients = if (theta - std::f64::consts::FRAC_PI_2).abs() < THETA_EQUATOR_TOL {
            [b, q / w, a]
        } else {
            let bb = q / w;
            [b, bb, bb + a * w / tcos]
        };
        debug_assert!(coefficients.iter().all(|x| x.is_finite()));
        (branch, coefficients)
    };

    Ok(JacobiSolution {
        params: *params,
        direction: *direction,
        initial_derivative: xprime0,
        frame_derivative: fd,
        branch,
        coefficients,
        lambda,
        q,
        tcos,
        tsin,
        rot,
    })
}

impl JacobiSolution {
    pub fn params(&self) -> &M3Params {
        &self.params
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn initial_derivative(&self) -> Vector3<f64> {
        self.initial_derivative
    }

    pub fn branch(&self) -> JacobiBranch {
        self.branch
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Branch-dependent coefficient triple `(A, B, C)`:
    ///
    /// * `HopfFiber` — oscillation coefficients `(b/w, -a/w, c)` with
    ///   `w = tau cos(theta)`: the field is
    ///   `(A (1 - cos(w t)) - B sin(w t), A sin(w t) + B (1 - cos(w t)), C t)`.
    /// * `LambdaPositive` / `LambdaNegative` away from the equator —
    ///   `(b, q/w, q/w + a w / (tau cos(theta)))` with `w = sqrt(|lambda|)`.
    /// * within [`THETA_EQUATOR_TOL`] of `theta = pi/2` — `(b, q/w, a)`.
    /// * `LambdaZero` — `(b, q, a)`.
    pub fn coefficients(&self) -> [f64; 3] {
        self.coefficients
    }

    /// The field at parameter `t`.
    pub fn evaluate(&self, t: f64) -> Vector3<f64> {
        let (a, b, c) = (
            self.frame_derivative.x,
            self.frame_derivative.y,
            self.frame_derivative.z,
        );
        let x0 = if self.branch == JacobiBranch::HopfFiber {
            let omega = self.tcos;
            let (s, co) = (omega * t).sin_cos();
            let one_c = 1.0 - co;
            Vector3::new(
                (a * s + b * one_c) / omega,
                (-a * one_c + b * s) / omega,
                c * t,
            )
        } else {
            let (e, f, g) = efg(self.branch, self.lambda, t);
            let core = b * e + self.q * g;
            Vector3::new(
                a * t + self.tcos * core,
                b * f + self.q * e,
                c * t - self.tsin * core,
            )
        };
        self.rot * x0
    }

    /// Exact time derivative of the field at `t` (equals the initial
    /// derivative at `t = 0`).
    pub fn derivative(&self, t: f64) -> Vector3<f64> {
        let (a, b, c) = (
            self.frame_derivative.x,
            self.frame_derivative.y,
            self.frame_derivative.z,
        );
        let x0 = if self.branch == JacobiBranch::HopfFiber {
            let omega = self.tcos;
            let (s, co) = (omega * t).sin_cos();
            Vector3::new(a * co + b * s, -a * s + b * co, c)
        } else {
            let (e, f, cos_like) = {
                let (ep, fp, gp) = efg_prime(self.branch, self.lambda, t);
                (gp, ep, fp)
            };
            let core = b * f + self.q * e;
            Vector3::new(
                a + self.tcos * core,
                b * cos_like + self.q * f,
                c - self.tsin * core,
            )
        };
        self.rot * x0
    }
}

/// The three basis solutions (initial derivatives `e1, e2, e3`), bundled for
/// repeated evaluation of the solution matrix and its determinant.
#[derive(Debug, Clone)]
pub struct SolutionBasis {
    sols: [JacobiSolution; 3],
}

impl SolutionBasis {
    pub fn new(params: &M3Params, direction: &Direction) -> Result<Self> {
        Ok(Self {
            sols: [
                solve_closed_form(params, direction, Vector3::x())?,
                solve_closed_form(params, direction, Vector3::y())?,
                solve_closed_form(params, direction, Vector3::z())?,
            ],
        })
    }

    /// Matrix whose column `j` is the basis solution `j` at time `t`.
    pub fn matrix_at(&self, t: f64) -> Matrix3<f64> {
        Matrix3::from_columns(&[
            self.sols[0].evaluate(t),
            self.sols[1].evaluate(t),
            self.sols[2].evaluate(t),
        ])
    }

    pub fn det_at(&self, t: f64) -> f64 {
        self.matrix_at(t).determinant()
    }

    /// Conjugate-point multiplicity at `t`: dimension of the kernel of the
    /// solution matrix, via singular values under a relative cut.
    pub fn multiplicity_at(&self, t: f64, tol: f64) -> usize {
        let sv = self.matrix_at(t).singular_values();
        let max = sv.max();
        if max <= 0.0 {
            return 3;
        }
        3 - sv.iter().filter(|&&s| s > tol * max).count()
    }
}

/// Solution matrix at time `t`: columns are the basis Jacobi fields.  Its
/// kernel consists of the initial derivatives whose field vanishes at `t`.
pub fn solution_matrix(params: &M3Params, direction: &Direction, t: f64) -> Result<EndOp> {
    let m = SolutionBasis::new(params, direction)?.matrix_at(t);
    EndOp::new(nalgebra::DMatrix::from_fn(3, 3, |i, j| m[(i, j)]))
}

/// Dimension of the space of isotropic initial derivatives: 1 off the fiber
/// (spanned by the rotation-Killing direction), 0 on it.
pub fn isotropic_space_dim(direction: &Direction) -> usize {
    if direction.is_hopf() {
        0
    } else {
        1
    }
}

/// Tests whether the Jacobi field with `X(0) = 0`, `X'(0) = xprime0` comes
/// from a Killing field vanishing at the base point.
///
/// The isotropy algebra is spanned by the rotation generator `A`, whose
/// candidate derivative is `v = [A, u] = sin(theta) (-sin(phi), cos(phi), 0)`;
/// the field is isotropic iff `xprime0` is collinear with `v` (angle below
/// `1e-10`), or zero.  On the fiber `v` vanishes and only `xprime0 = 0`
/// qualifies.
pub fn isotropy_test(
    _params: &M3Params,
    direction: &Direction,
    xprime0: Vector3<f64>,
) -> IsotropyVerdict {
    let norm = xprime0.norm();
    if norm == 0.0 {
        return IsotropyVerdict {
            is_isotropic: true,
            killing_coefficient: Some(0.0),
        };
    }
    if direction.is_hopf() {
        return IsotropyVerdict {
            is_isotropic: false,
            killing_coefficient: None,
        };
    }
    let st = direction.theta().sin();
    let (sp, cp) = direction.phi().sin_cos();
    let v = Vector3::new(-st * sp, st * cp, 0.0);
    let v_norm = v.norm();
    let sin_angle = xprime0.cross(&v).norm() / (norm * v_norm);
    if sin_angle < ISOTROPY_ANGLE_TOL {
        IsotropyVerdict {
            is_isotropic: true,
            killing_coefficient: Some(xprime0.dot(&v) / (v_norm * v_norm)),
        }
    } else {
        IsotropyVerdict {
            is_isotropic: false,
            killing_coefficient: None,
        }
    }
}

/// Runge-Kutta(4) integration of the Jacobi initial value problem on an
/// arbitrary reductive algebra: `X'' - T_u X' + R~_u X = 0`, `X(0) = 0`.
///
/// Positions are recorded at `t = 0, step, 2 step, ...` up to `t_end`
/// (the last multiple not exceeding it).  Uses the default divergence bound.
pub fn integrate_numeric(
    alg: &ReductiveAlgebra,
    u: &DVector<f64>,
    xprime0: &DVector<f64>,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    integrate_numeric_bounded(alg, u, xprime0, t_end, step, DIVERGENCE_BOUND)
}

/// [`integrate_numeric`] with an explicit divergence bound on the state norm.
pub fn integrate_numeric_bounded(
    alg: &ReductiveAlgebra,
    u: &DVector<f64>,
    xprime0: &DVector<f64>,
    t_end: f64,
    step: f64,
    divergence_bound: f64,
) -> Result<Trajectory> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParam(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "t_end must be nonnegative, got {t_end}"
        )));
    }
    let n = alg.dim_m();
    if u.len() != n || xprime0.len() != n {
        return Err(Error::DimMismatch {
            left: u.len().max(xprime0.len()),
            right: n,
        });
    }
    let norm_sq = alg.m_inner(u, u);
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit {
            norm: norm_sq.max(0.0).sqrt(),
        });
    }

    let torsion = alg.torsion(u)?.into_matrix();
    let rtilde = alg.canonical_curvature(u)?;
    let rtilde = rtilde.matrix();

    let steps = ((t_end / step) * (1.0 + 1e-12)).floor() as usize;
    let mut x = DVector::<f64>::zeros(n);
    let mut v = xprime0.clone();
    let mut positions = Vec::with_capacity(steps + 1);
    positions.push(x.clone());

    // Acceleration X'' = T_u X' - R~_u X.
    let acc = |x: &DVector<f64>, v: &DVector<f64>| &torsion * v - rtilde * x;

    for k in 0..steps {
        let h = step;
        let a1 = acc(&x, &v);
        let x2 = &x + 0.5 * h * &v;
        let v2 = &v + 0.5 * h * &a1;
        let a2 = acc(&x2, &v2);
        let x3 = &x + 0.5 * h * &v2;
        let v3 = &v + 0.5 * h * &a2;
        let a3 = acc(&x3, &v3);
        let x4 = &x + h * &v3;
        let v4 = &v + h * &a3;
        let a4 = acc(&x4, &v4);

        x += (h / 6.0) * (&v + 2.0 * &v2 + 2.0 * &v3 + &v4);
        v += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);

        let t = step * (k + 1) as f64;
        let state_norm = x.norm().max(v.norm());
        if !state_norm.is_finite() || state_norm > divergence_bound {
            return Err(Error::Diverged { t });
        }
        positions.push(x.clone());
    }
    Ok(Trajectory { step, positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

    fn sol(kappa: f64, tau: f64, theta: f64, phi: f64, xp: [f64; 3]) -> JacobiSolution {
        let p = M3Params::new(kappa, tau).unwrap();
        let d = Direction::new(theta, phi).unwrap();
        solve_closed_form(&p, &d, Vector3::new(xp[0], xp[1], xp[2])).unwrap()
    }

    /// Sup-norm comparison of a closed-form solution against RK4 on the
    /// generic algebra over [0, t_end].
    fn closed_vs_rk4(kappa: f64, tau: f64, theta: f64, phi: f64, xp: [f64; 3], t_end: f64) -> f64 {
        let p = M3Params::new(kappa, tau).unwrap();
        let d = Direction::new(theta, phi).unwrap();
        let s = solve_closed_form(&p, &d, Vector3::new(xp[0], xp[1], xp[2])).unwrap();
        let alg = p.build_algebra();
        let traj = integrate_numeric(
            &alg,
            &d.unit_dvector(),
            &DVector::from_column_slice(&xp),
            t_end,
            1e-3,
        )
        .unwrap();
        let mut sup = 0.0_f64;
        for k in 0..traj.len() {
            let t = traj.time(k);
            let closed = s.evaluate(t);
            let numeric = traj.position(k);
            for i in 0..3 {
                sup = sup.max((closed[i] - numeric[i]).abs());
            }
        }
        sup
    }

    #[test]
    fn branch_selection() {
        assert_eq!(
            sol(1.0, 2.0, 0.0, 0.0, [1.0, 0.0, 0.0]).branch(),
            JacobiBranch::HopfFiber
        );
        assert_eq!(
            sol(1.0, 2.0, PI, 0.0, [1.0, 0.0, 0.0]).branch(),
            JacobiBranch::HopfFiber
        );
        assert_eq!(
            sol(1.0, 2.0, FRAC_PI_3, 0.0, [1.0, 0.0, 0.0]).branch(),
            JacobiBranch::LambdaPositive
        );
        assert_eq!(
            sol(-1.0, 1.0, FRAC_PI_2, 0.0, [1.0, 0.0, 0.0]).branch(),
            JacobiBranch::LambdaNegative
        );
        assert_eq!(
            sol(0.0, 1.0, FRAC_PI_2, 0.0, [1.0, 0.0, 0.0]).branch(),
            JacobiBranch::LambdaZero
        );
        // kappa = -1, tau = 1, theta = pi/4: lambda cancels exactly to 0.
        assert_eq!(
            sol(-1.0, 1.0, std::f64::consts::FRAC_PI_4, 0.0, [1.0, 0.0, 0.0]).branch(),
            JacobiBranch::LambdaZero
        );
    }

    #[test]
    fn hopf_solution_and_coefficients() {
        // theta = 0: (A, B, C) = (b/tau, -a/tau, c); the transverse part
        // closes up at t = 2 pi / tau.
        let tau = 2.0;
        let (a, b, c) = (0.3, -1.1, 0.7);
        let s = sol(1.0, tau, 0.0, 0.0, [a, b, c]);
        let [ca, cb, cc] = s.coefficients();
        assert_abs_diff_eq!(ca, b / tau, epsilon = 1e-15);
        assert_abs_diff_eq!(cb, -a / tau, epsilon = 1e-15);
        assert_abs_diff_eq!(cc, c, epsilon = 1e-15);

        let t = TAU / tau;
        let x = s.evaluate(t);
        assert_abs_diff_eq!(x.x, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x.y, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x.z, TAU * c / tau, epsilon = 1e-14);
    }

    #[test]
    fn initial_conditions_are_reproduced() {
        for (kappa, tau, theta, phi) in [
            (1.0, 2.0, FRAC_PI_3, 0.0),
            (4.0, 1.0, FRAC_PI_2, 1.3),
            (-1.0, 1.0, FRAC_PI_2, 0.0),
            (0.0, 1.0, FRAC_PI_2, 5.1),
            (1.0, 2.0, 0.0, 0.0),
            (-4.0, 0.5, PI, 2.0),
        ] {
            let xp = Vector3::new(0.37, -1.4, 0.92);
            let p = M3Params::new(kappa, tau).unwrap();
            let d = Direction::new(theta, phi).unwrap();
            let s = solve_closed_form(&p, &d, xp).unwrap();
            assert!(s.evaluate(0.0).norm() < 1e-15);
            assert!((s.derivative(0.0) - xp).norm() < 1e-12);
            // Finite-difference confirmation of the analytic derivative.
            let h = 1e-6;
            let fd = (s.evaluate(h) - s.evaluate(-h)) / (2.0 * h);
            assert!((fd - xp).norm() < 1e-8);
        }
    }

    #[test]
    fn solutions_are_linear_in_initial_data() {
        let p = M3Params::new(-1.0, 1.0).unwrap();
        let d = Direction::new(1.1, 0.8).unwrap();
        let u = Vector3::new(0.5, -0.2, 1.0);
        let v = Vector3::new(-1.0, 0.4, 0.3);
        let su = solve_closed_form(&p, &d, u).unwrap();
        let sv = solve_closed_form(&p, &d, v).unwrap();
        let sw = solve_closed_form(&p, &d, 2.0 * u - 0.5 * v).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let combo = 2.0 * su.evaluate(t) - 0.5 * sv.evaluate(t);
            assert!((sw.evaluate(t) - combo).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_rk4_all_branches() {
        // One representative per branch; sup error over [0, 5] at step 1e-3.
        assert!(closed_vs_rk4(1.0, 2.0, FRAC_PI_3, 0.0, [1.0, -0.5, 0.3], 5.0) < 1e-6);
        assert!(closed_vs_rk4(4.0, 1.0, FRAC_PI_2, 1.3, [0.2, 1.0, -0.7], 5.0) < 1e-6);
        assert!(closed_vs_rk4(0.0, 1.0, FRAC_PI_2, 0.0, [1.0, 1.0, 1.0], 5.0) < 1e-6);
        assert!(closed_vs_rk4(-1.0, 1.0, FRAC_PI_2, 2.0, [0.4, -0.9, 0.6], 5.0) < 1e-6);
        assert!(closed_vs_rk4(1.0, 2.0, 0.0, 0.0, [1.0, 0.5, -0.2], 5.0) < 1e-6);
    }

    #[test]
    fn branch_continuity_across_lambda_zero() {
        // lambda = +-1e-8 (trig/hyperbolic branches) against lambda ~ 0
        // (polynomial branch): fields agree to 1e-6 on [0, 5].
        let d = Direction::new(FRAC_PI_2, 0.7).unwrap();
        let xp = Vector3::new(0.8, -0.6, 0.4);
        let zero = solve_closed_form(&M3Params::new(0.0, 1.0).unwrap(), &d, xp).unwrap();
        assert_eq!(zero.branch(), JacobiBranch::LambdaZero);
        let plus = solve_closed_form(&M3Params::new(1e-8, 1.0).unwrap(), &d, xp).unwrap();
        assert_eq!(plus.branch(), JacobiBranch::LambdaPositive);
        let minus = solve_closed_form(&M3Params::new(-1e-8, 1.0).unwrap(), &d, xp).unwrap();
        assert_eq!(minus.branch(), JacobiBranch::LambdaNegative);
        for k in 0..=50 {
            let t = 5.0 * k as f64 / 50.0;
            assert!(
                (zero.evaluate(t) - plus.evaluate(t)).norm() < 1e-6,
                "t = {t}"
            );
            assert!(
                (zero.evaluate(t) - minus.evaluate(t)).norm() < 1e-6,
                "t = {t}"
            );
        }
    }

    #[test]
    fn isotropic_solution_formula() {
        // X'(0) = lambda * (rotated e2) generates the distinguished isotropic
        // field (tau cos(theta) (1 - cos(w t)), w sin(w t), -tau sin(theta) (1 - cos(w t))).
        let (kappa, tau, theta, phi) = (1.0, 2.0, FRAC_PI_3, 1.1);
        let p = M3Params::new(kappa, tau).unwrap();
        let d = Direction::new(theta, phi).unwrap();
        let lambda = p.theta_invariants(theta).lambda;
        let w = lambda.sqrt();
        let rot = rotation_phi(phi);
        let xp = rot * Vector3::new(0.0, lambda, 0.0);
        let s = solve_closed_form(&p, &d, xp).unwrap();
        for t in [0.2, 0.9, 2.4, 4.8] {
            let expect = rot
                * Vector3::new(
                    tau * theta.cos() * (1.0 - (w * t).cos()),
                    w * (w * t).sin(),
                    -tau * theta.sin() * (1.0 - (w * t).cos()),
                );
            assert!((s.evaluate(t) - expect).norm() < 1e-12, "t = {t}");
        }
        // It vanishes exactly at the lattice times 2 pi p / w.
        let t1 = TAU / w;
        assert!(s.evaluate(t1).norm() < 1e-12);
        assert!(isotropy_test(&p, &d, xp).is_isotropic);
    }

    #[test]
    fn solution_matrix_determinant_identity() {
        // det M(t) = (2 tau^2 / lambda^2) t f(sqrt(lambda) t) where
        // f(s) = 1 - cos(s) - mu s sin(s), for lambda > 0.
        for (kappa, tau, theta, phi) in [
            (1.0, 2.0, FRAC_PI_3, 0.0),
            (4.0, 1.0, FRAC_PI_2, 2.2),
            (0.0, 1.0, std::f64::consts::FRAC_PI_4, 0.9),
        ] {
            let p = M3Params::new(kappa, tau).unwrap();
            let d = Direction::new(theta, phi).unwrap();
            let inv = p.theta_invariants(theta);
            let basis = SolutionBasis::new(&p, &d).unwrap();
            for t in [0.3, 1.1, 2.9, 7.7] {
                let s = inv.lambda.sqrt() * t;
                let f = 1.0 - s.cos() - inv.mu * s * s.sin();
                let expect = 2.0 * tau * tau / (inv.lambda * inv.lambda) * t * f;
                let det = basis.det_at(t);
                assert!(
                    (det - expect).abs() < 1e-9 * (1.0 + expect.abs()),
                    "det {det} vs {expect} at t = {t}"
                );
            }
        }
    }

    #[test]
    fn isotropy_classification_examples() {
        let p = M3Params::new(1.0, 2.0).unwrap();

        // Collinear with sin(theta) e2 at phi = 0.
        let d = Direction::new(FRAC_PI_3, 0.0).unwrap();
        let verdict = isotropy_test(&p, &d, Vector3::new(0.0, 2.5, 0.0));
        assert!(verdict.is_isotropic);
        assert_abs_diff_eq!(
            verdict.killing_coefficient.unwrap(),
            2.5 / FRAC_PI_3.sin(),
            epsilon = 1e-12
        );

        // Rotated by phi = pi/2 the Killing direction is -e1.
        let d = Direction::new(FRAC_PI_3, FRAC_PI_2).unwrap();
        assert!(isotropy_test(&p, &d, Vector3::new(-1.0, 0.0, 0.0)).is_isotropic);

        // Perturbed off the line: not isotropic.
        let d = Direction::new(FRAC_PI_3, 0.0).unwrap();
        assert!(!isotropy_test(&p, &d, Vector3::new(0.1, 2.5, 0.0)).is_isotropic);

        // Fiber: only the zero derivative is isotropic.
        let d = Direction::new(0.0, 0.0).unwrap();
        assert!(!isotropy_test(&p, &d, Vector3::new(0.3, 0.0, 0.0)).is_isotropic);
        let z = isotropy_test(&p, &d, Vector3::zeros());
        assert!(z.is_isotropic);
        assert_eq!(z.killing_coefficient, Some(0.0));

        assert_eq!(
            isotropic_space_dim(&Direction::new(FRAC_PI_3, 0.0).unwrap()),
            1
        );
        assert_eq!(isotropic_space_dim(&Direction::new(PI, 0.0).unwrap()), 0);
    }

    #[test]
    fn integrator_validation_and_divergence() {
        let p = M3Params::new(-4.0, 0.5).unwrap();
        let alg = p.build_algebra();
        let u = Direction::new(FRAC_PI_2, 0.0).unwrap().unit_dvector();
        let xp = DVector::from_column_slice(&[0.0, 1.0, 0.0]);

        assert!(integrate_numeric(&alg, &u, &xp, 1.0, 0.0).is_err());
        assert!(integrate_numeric(&alg, &u, &xp, -1.0, 0.1).is_err());
        let not_unit = DVector::from_column_slice(&[2.0, 0.0, 0.0]);
        assert!(matches!(
            integrate_numeric(&alg, &not_unit, &xp, 1.0, 0.1),
            Err(Error::NotUnit { .. })
        ));

        // lambda = -4: hyperbolic growth exceeds a tiny divergence bound.
        let err = integrate_numeric_bounded(&alg, &u, &xp, 30.0, 1e-2, 1e6);
        assert!(matches!(err, Err(Error::Diverged { .. })));
    }

    #[test]
    fn trajectory_sampling_grid() {
        let p = M3Params::new(1.0, 2.0).unwrap();
        let alg = p.build_algebra();
        let u = Direction::new(FRAC_PI_3, 0.0).unwrap().unit_dvector();
        let xp = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let traj = integrate_numeric(&alg, &u, &xp, 1.0, 0.25).unwrap();
        assert_eq!(traj.len(), 5);
        assert_abs_diff_eq!(traj.time(4), 1.0, epsilon = 1e-15);
        assert!(traj.position(0).norm() == 0.0);
    }
}
