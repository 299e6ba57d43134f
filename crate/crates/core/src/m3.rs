//! The two-parameter family `M3(kappa, tau)` of homogeneous 3-manifolds.
//!
//! These are the total spaces of Riemannian submersions over surfaces of
//! constant curvature `kappa`, with geodesic fibers tangent to a unit Killing
//! field `xi`; `tau > 0` measures the twisting of the fibration
//! (`grad_X xi = (tau/2) X x xi`).  Excluding the round spheres
//! (`kappa = tau^2`) the family splits into Berger spheres (`kappa > 0`),
//! covers of SL(2, R) with special metrics (`kappa < 0`) and the Heisenberg
//! group (`kappa = 0`).
//!
//! The module provides the parameter/direction types, the associated
//! reductive algebra (orthonormal basis `e1, e2, e3` of `m` with `e3 = xi`,
//! one-dimensional isotropy spanned by the rotation generator `A`), the
//! direction invariants
//!
//! ```text
//! lambda(theta) = kappa sin^2(theta) + tau^2 cos^2(theta)
//! mu(theta)     = (tau^2 - kappa) sin^2(theta) / (2 tau^2)
//! ```
//!
//! and explicit closed-form matrices for the geometric operators along a
//! geodesic direction, used as an independent cross-check of the generic
//! bracket computations.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::opspace::{SkewOp, SymOp};
use crate::reductive::{ReductiveAlgebra, ReductiveAlgebraBuilder};

/// Absolute threshold under which `lambda(theta)` is treated as zero.
///
/// Floating-point angles cannot hit the transition angles exactly (e.g.
/// `theta = pi/2` on the Heisenberg group leaves `lambda ~ 1e-33`), so every
/// consumer of the sign of `lambda` — branch selection, conjugate-point
/// existence, geodesic classification — shares this cut.
pub const LAMBDA_ZERO_TOL: f64 = 1e-9;

/// Which member of the family the parameters select.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceType {
    /// `kappa > 0`: Berger sphere (round sphere excluded by `kappa != tau^2`).
    BergerSphere,
    /// `kappa < 0`: universal-type cover of SL(2, R).
    SL2Cover,
    /// `kappa = 0`: Heisenberg group.
    Heisenberg,
}

impl std::fmt::Display for SpaceType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SpaceType::BergerSphere => "BergerSphere",
            SpaceType::SL2Cover => "SL2Cover",
            SpaceType::Heisenberg => "Heisenberg",
        };
        f.write_str(name)
    }
}

/// Validated parameter pair `(kappa, tau)` with `tau > 0`, `kappa != tau^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M3Params {
    kappa: f64,
    tau: f64,
}

impl M3Params {
    pub fn new(kappa: f64, tau: f64) -> Result<Self> {
        if !kappa.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParam("kappa and tau must be finite".into()));
        }
        if tau <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "tau must be positive, got {tau}"
            )));
        }
        if kappa == tau * tau {
            return Err(Error::InvalidParam(format!(
                "kappa = tau^2 = {kappa} selects a round sphere, outside this family"
            )));
        }
        Ok(Self { kappa, tau })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn space_type(&self) -> SpaceType {
        if self.kappa > 0.0 {
            SpaceType::BergerSphere
        } else if self.kappa < 0.0 {
            SpaceType::SL2Cover
        } else {
            SpaceType::Heisenberg
        }
    }

    /// Direction invariants at polar angle `theta`.
    pub fn theta_invariants(&self, theta: f64) -> ThetaInvariants {
        let sin2 = theta.sin().powi(2);
        let cos2 = theta.cos().powi(2);
        let tau2 = self.tau * self.tau;
        ThetaInvariants {
            lambda: self.kappa * sin2 + tau2 * cos2,
            mu: (tau2 - self.kappa) * sin2 / (2.0 * tau2),
        }
    }

    /// Curvature scalars that do not depend on a direction.
    pub fn scalar_invariants(&self) -> ScalarInvariants {
        let tau2 = self.tau * self.tau;
        let fiber_length = match self.space_type() {
            // Closed Hopf fibers only on Berger spheres.
            SpaceType::BergerSphere => Some(4.0 * std::f64::consts::PI * self.tau / self.kappa),
            _ => None,
        };
        ScalarInvariants {
            space_type: self.space_type(),
            xi_sectional: tau2 / 4.0,
            ricci: [self.kappa - tau2 / 2.0, self.kappa - tau2 / 2.0, tau2 / 2.0],
            fiber_length,
        }
    }

    /// The reductive algebra of the model: orthonormal `e1, e2, e3` spanning
    /// `m` and a single isotropy generator `A` rotating the `(e1, e2)` plane.
    pub fn build_algebra(&self) -> ReductiveAlgebra {
        raw_algebra(self.kappa, self.tau)
    }
}

/// Bracket tables of the model family for arbitrary `(kappa, tau)`, including
/// the round-sphere locus `kappa = tau^2` that [`M3Params`] excludes (useful
/// as a degenerate-rank reference).
///
/// Nonzero brackets: `[e1, e2] = tau e3 + (kappa - tau^2) A`,
/// `[e1, e3] = -tau e2`, `[e2, e3] = tau e1`, `[A, e1] = e2`, `[A, e2] = -e1`.
pub fn raw_algebra(kappa: f64, tau: f64) -> ReductiveAlgebra {
    assert!(tau > 0.0 && tau.is_finite() && kappa.is_finite());
    ReductiveAlgebraBuilder::new(3, 1)
        .bracket_mm_m(0, 1, 2, tau)
        .and_then(|b| b.bracket_mm_k(0, 1, 0, kappa - tau * tau))
        .and_then(|b| b.bracket_mm_m(0, 2, 1, -tau))
        .and_then(|b| b.bracket_mm_m(1, 2, 0, tau))
        .and_then(|b| b.bracket_km(0, 0, 1, 1.0))
        .and_then(|b| b.bracket_km(0, 1, 0, -1.0))
        .and_then(|b| b.build())
        .expect("model bracket tables are always a valid reductive algebra")
}

/// Unit direction in spherical coordinates: polar angle `theta` from the
/// fiber axis `e3`, azimuth `phi` in the `(e1, e2)` plane.
///
/// `theta` exactly `0` or `pi` marks a Hopf-fiber direction; those code paths
/// key on exact equality because the fiber behavior is structurally different
/// and unreachable by nearby floating-point angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidParam(format!(
                "theta must lie in [0, pi], got {theta}"
            )));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::InvalidParam(format!(
                "phi must lie in [0, 2 pi), got {phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Whether this is a fiber direction (`theta` exactly `0` or `pi`).
    pub fn is_hopf(&self) -> bool {
        self.theta == 0.0 || self.theta == std::f64::consts::PI
    }

    /// Cartesian coordinates
    /// `(sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))`.
    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        Vector3::new(st * cp, st * sp, ct)
    }

    pub fn unit_dvector(&self) -> DVector<f64> {
        let v = self.unit_vector();
        DVector::from_column_slice(&[v.x, v.y, v.z])
    }
}

/// Direction invariants `lambda(theta)`, `mu(theta)`.
///
/// `lambda` is the squared frequency of the Jacobi oscillation transverse to
/// the geodesic; `mu` normalizes the curvature anisotropy (`mu < 1/2` iff
/// `lambda > 0`, with `lambda = tau^2 (1 - 2 mu)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaInvariants {
    pub lambda: f64,
    pub mu: f64,
}

impl ThetaInvariants {
    /// Whether `lambda` is numerically indistinguishable from zero.
    pub fn lambda_effectively_zero(&self) -> bool {
        self.lambda.abs() < LAMBDA_ZERO_TOL
    }

    /// Whether `lambda` is genuinely positive (above the zero cut).
    pub fn lambda_positive(&self) -> bool {
        self.lambda >= LAMBDA_ZERO_TOL
    }
}

/// Direction-free curvature data of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarInvariants {
    pub space_type: SpaceType,
    /// Sectional curvature of any plane containing the fiber direction.
    pub xi_sectional: f64,
    /// Ricci eigenvalues in the basis `e1, e2, e3`.
    pub ricci: [f64; 3],
    /// Length of the closed Hopf fibers (Berger spheres only).
    pub fiber_length: Option<f64>,
}

/// Explicit operator matrices along a geodesic direction.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorData {
    /// Rotation generator `S_u` (half-bracket operator).
    pub s: SkewOp,
    /// Canonical-connection curvature operator.
    pub rtilde: SymOp,
    /// Jacobi operator `R_u = R~_u - S_u^2`.
    pub r: SymOp,
}

/// Rotation by `phi` around the fiber axis (the isotropy flow `exp(phi A)`).
pub fn rotation_phi(phi: f64) -> Matrix3<f64> {
    let (s, c) = phi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn to_dmatrix(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

/// Closed-form `S_u`, `R~_u`, `R_u` at direction `(theta, phi)`.
///
/// Built at azimuth zero —
///
/// ```text
/// S_0  = (tau/2) * cross(u),   u = (sin(theta), 0, cos(theta))
/// R~_0 = 2 tau^2 mu(theta) * diag(0, -1, 0)
/// ```
///
/// — then pushed to azimuth `phi` by conjugation with [`rotation_phi`], under
/// which the whole geodesic picture is equivariant.
pub fn operator_data(params: &M3Params, direction: &Direction) -> OperatorData {
    let (st, ct) = (direction.theta().sin(), direction.theta().cos());
    let tau = params.tau();
    let half_tau = 0.5 * tau;
    let s0 = Matrix3::new(
        0.0,
        -half_tau * ct,
        0.0,
        half_tau * ct,
        0.0,
        -half_tau * st,
        0.0,
        half_tau * st,
        0.0,
    );
    let mu = params.theta_invariants(direction.theta()).mu;
    let rt0 = Matrix3::from_diagonal(&Vector3::new(0.0, -2.0 * tau * tau * mu, 0.0));

    let rot = rotation_phi(direction.phi());
    let s_mat = rot * s0 * rot.transpose();
    let rt_mat = rot * rt0 * rot.transpose();
    let r_mat = rt_mat - s_mat * s_mat;

    OperatorData {
        s: SkewOp::new(to_dmatrix(&s_mat)).expect("rotated cross-product matrix is skew"),
        rtilde: SymOp::new(to_dmatrix(&rt_mat)).expect("rotated diagonal matrix is symmetric"),
        r: SymOp::new(to_dmatrix(&r_mat)).expect("curvature matrix is symmetric"),
    }
}

/// Orthonormal frame `(v1, v2, v3)` of the symmetric-operator subspace in
/// which the Jacobi-operator curve at angle `theta` winds.
///
/// With `c = cos(theta)`, `s = sin(theta)` and prefactor `sqrt(2)/2`:
///
/// ```text
/// v1 = (s2/2) [[0, c, 0], [c, 0, -s], [0, -s, 0]]
/// v2 = (s2/2) [[-c^2, 0, s c], [0, 1, 0], [s c, 0, -s^2]]
/// v3 = (s2/2) [[-c^2, 0, s c], [0, -1, 0], [s c, 0, -s^2]]
/// ```
///
/// Undefined on the fiber (`theta` in `{0, pi}`), where the curve degenerates
/// to a point.
pub fn frame_v(theta: f64) -> Result<[SymOp; 3]> {
    if theta == 0.0 || theta == std::f64::consts::PI {
        return Err(Error::Domain(
            "operator frame is undefined along Hopf-fiber directions".into(),
        ));
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidParam(format!(
            "theta must lie in [0, pi], got {theta}"
        )));
    }
    let (s, c) = (theta.sin(), theta.cos());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v1 = Matrix3::new(0.0, c, 0.0, c, 0.0, -s, 0.0, -s, 0.0) * h;
    let v2 = Matrix3::new(-c * c, 0.0, s * c, 0.0, 1.0, 0.0, s * c, 0.0, -s * s) * h;
    let v3 = Matrix3::new(-c * c, 0.0, s * c, 0.0, -1.0, 0.0, s * c, 0.0, -s * s) * h;
    Ok([
        SymOp::new(to_dmatrix(&v1)).expect("v1 is symmetric"),
        SymOp::new(to_dmatrix(&v2)).expect("v2 is symmetric"),
        SymOp::new(to_dmatrix(&v3)).expect("v3 is symmetric"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspace::frobenius_inner;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

    #[test]
    fn params_validation() {
        assert!(M3Params::new(1.0, 2.0).is_ok());
        assert!(M3Params::new(-1.0, 0.5).is_ok());
        assert!(M3Params::new(1.0, 0.0).is_err());
        assert!(M3Params::new(1.0, -2.0).is_err());
        assert!(
            M3Params::new(4.0, 2.0).is_err(),
            "round sphere must be rejected"
        );
        assert!(M3Params::new(f64::NAN, 1.0).is_err());
        // A hair away from the round sphere is accepted.
        assert!(M3Params::new(4.0 + 1e-12, 2.0).is_ok());
    }

    #[test]
    fn space_type_classification() {
        assert_eq!(
            M3Params::new(4.0, 1.0).unwrap().space_type(),
            SpaceType::BergerSphere
        );
        assert_eq!(
            M3Params::new(1.0, 2.0).unwrap().space_type(),
            SpaceType::BergerSphere
        );
        assert_eq!(
            M3Params::new(-1.0, 1.0).unwrap().space_type(),
            SpaceType::SL2Cover
        );
        assert_eq!(
            M3Params::new(0.0, 3.0).unwrap().space_type(),
            SpaceType::Heisenberg
        );
    }

    #[test]
    fn theta_invariants_values() {
        let p = M3Params::new(1.0, 2.0).unwrap();
        let inv = p.theta_invariants(FRAC_PI_3);
        assert_abs_diff_eq!(inv.lambda, 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.mu, 9.0 / 32.0, epsilon = 1e-15);

        // Heisenberg: lambda vanishes at theta = pi/2.
        let h = M3Params::new(0.0, 3.0).unwrap();
        let inv = h.theta_invariants(FRAC_PI_2);
        assert!(inv.lambda.abs() < 1e-30);
        assert!(inv.lambda_effectively_zero());
        assert_abs_diff_eq!(inv.mu, 0.5, epsilon = 1e-15);

        // lambda = tau^2 (1 - 2 mu) ties the two invariants together.
        for theta in [0.1, FRAC_PI_4, 1.0, FRAC_PI_2, 2.0, PI - 0.3] {
            for (k, t) in [(1.0, 2.0), (-4.0, 0.5), (0.0, 1.0), (4.0, 1.0)] {
                let inv = M3Params::new(k, t).unwrap().theta_invariants(theta);
                assert_abs_diff_eq!(inv.lambda, t * t * (1.0 - 2.0 * inv.mu), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sl2_positivity_window() {
        // kappa < 0: lambda(theta) > 0 iff theta < eps or theta > pi - eps,
        // eps = arctan(tau / sqrt(-kappa)).
        let p = M3Params::new(-1.0, 1.0).unwrap();
        let eps = (1.0_f64 / 1.0_f64.sqrt()).atan();
        assert_abs_diff_eq!(eps, FRAC_PI_4, epsilon = 1e-15);
        for i in 0..200 {
            let theta = PI * (i as f64 + 0.5) / 200.0;
            let inv = p.theta_invariants(theta);
            let inside = theta < eps || theta > PI - eps;
            if (theta - eps).abs() > 1e-3 && (theta - (PI - eps)).abs() > 1e-3 {
                assert_eq!(inv.lambda > 0.0, inside, "theta = {theta}");
            }
        }
    }

    #[test]
    fn direction_validation_and_vector() {
        assert!(Direction::new(-0.1, 0.0).is_err());
        assert!(Direction::new(PI + 0.1, 0.0).is_err());
        assert!(Direction::new(1.0, -0.5).is_err());
        assert!(Direction::new(1.0, std::f64::consts::TAU).is_err());

        let d = Direction::new(FRAC_PI_3, 1.3).unwrap();
        assert_abs_diff_eq!(d.unit_vector().norm(), 1.0, epsilon = 1e-15);
        assert!(!d.is_hopf());
        assert!(Direction::new(0.0, 0.0).unwrap().is_hopf());
        assert!(Direction::new(PI, 2.0).unwrap().is_hopf());

        let up = Direction::new(0.0, 0.0).unwrap().unit_vector();
        assert_abs_diff_eq!(up.z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn scalar_invariants_berger() {
        let p = M3Params::new(4.0, 1.0).unwrap();
        let inv = p.scalar_invariants();
        assert_eq!(inv.space_type, SpaceType::BergerSphere);
        assert_abs_diff_eq!(inv.xi_sectional, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.ricci[0], 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.ricci[1], 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.ricci[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.fiber_length.unwrap(), PI, epsilon = 1e-15);

        assert!(M3Params::new(-1.0, 1.0)
            .unwrap()
            .scalar_invariants()
            .fiber_length
            .is_none());
        assert!(M3Params::new(0.0, 1.0)
            .unwrap()
            .scalar_invariants()
            .fiber_length
            .is_none());
    }

    #[test]
    fn ricci_matches_operator_traces() {
        use nalgebra::dvector;
        for (k, t) in [(4.0, 1.0), (1.0, 2.0), (-1.0, 1.0), (0.0, 0.5)] {
            let p = M3Params::new(k, t).unwrap();
            let alg = p.build_algebra();
            let ricci = p.scalar_invariants().ricci;
            let dirs = [
                dvector![1.0, 0.0, 0.0],
                dvector![0.0, 1.0, 0.0],
                dvector![0.0, 0.0, 1.0],
            ];
            let mut scalar = 0.0;
            for (i, u) in dirs.iter().enumerate() {
                let tr = alg.riemann_jacobi_operator(u).unwrap().trace();
                assert_abs_diff_eq!(tr, ricci[i], epsilon = 1e-13);
                scalar += tr;
            }
            assert_abs_diff_eq!(scalar, ricci.iter().sum::<f64>(), epsilon = 1e-13);
        }
    }

    #[test]
    fn operator_data_matches_generic_algebra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let tau: f64 = rng.gen_range(0.3..2.5);
            let mut kappa: f64 = rng.gen_range(-4.0..4.0);
            if (kappa - tau * tau).abs() < 1e-3 {
                kappa += 0.1;
            }
            let p = M3Params::new(kappa, tau).unwrap();
            let d = Direction::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU)).unwrap();
            let alg = p.build_algebra();
            let u = d.unit_dvector();
            let data = operator_data(&p, &d);
            let s = alg.s_operator(&u).unwrap();
            let rt = alg.canonical_curvature(&u).unwrap();
            let r = alg.riemann_jacobi_operator(&u).unwrap();
            assert!((s.matrix() - data.s.matrix()).amax() < 1e-11);
            assert!((rt.matrix() - data.rtilde.matrix()).amax() < 1e-11);
            assert!((r.matrix() - data.r.matrix()).amax() < 1e-11);
        }
    }

    #[test]
    fn operator_data_at_equator() {
        // theta = pi/2, phi = 0: R~ = diag(0, kappa - tau^2, 0).
        let p = M3Params::new(1.0, 2.0).unwrap();
        let d = Direction::new(FRAC_PI_2, 0.0).unwrap();
        let data = operator_data(&p, &d);
        assert_abs_diff_eq!(data.rtilde.get(1, 1), -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(data.rtilde.get(0, 0), 0.0, epsilon = 1e-12);
        // R annihilates the direction u = e1.
        let u = d.unit_dvector();
        assert!((data.r.matrix() * &u).norm() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal_and_spans_operators() {
        let theta = FRAC_PI_3;
        let [v1, v2, v3] = frame_v(theta).unwrap();
        for (a, b, expect) in [
            (&v1, &v1, 1.0),
            (&v2, &v2, 1.0),
            (&v3, &v3, 1.0),
            (&v1, &v2, 0.0),
            (&v1, &v3, 0.0),
            (&v2, &v3, 0.0),
        ] {
            assert_abs_diff_eq!(frobenius_inner(a, b).unwrap(), expect, epsilon = 1e-14);
        }

        // Operator expansions in the frame at kappa = 1, tau = 2.
        let p = M3Params::new(1.0, 2.0).unwrap();
        let d = Direction::new(theta, 0.0).unwrap();
        let data = operator_data(&p, &d);
        let tau2 = 4.0;
        let mu = p.theta_invariants(theta).mu;
        let s2 = std::f64::consts::SQRT_2;

        let rt_expect = &v3.scale(s2 * tau2 * mu) - &v2.scale(s2 * tau2 * mu);
        assert!((data.rtilde.matrix() - rt_expect.matrix()).amax() < 1e-13);

        let s_sq = data.s.squared();
        let s2_expect = v3.scale(s2 / 4.0 * tau2);
        assert!((s_sq.matrix() - s2_expect.matrix()).amax() < 1e-13);

        let r_expect =
            &v2.scale(-s2 / 4.0 * tau2 * 4.0 * mu) - &v3.scale(s2 / 4.0 * tau2 * (1.0 - 4.0 * mu));
        assert!((data.r.matrix() - r_expect.matrix()).amax() < 1e-13);
    }

    #[test]
    fn frame_undefined_on_fiber() {
        assert!(frame_v(0.0).is_err());
        assert!(frame_v(PI).is_err());
        assert!(frame_v(1e-8).is_ok());
    }
}
