//! Conjugate points, conjugate radii, and tangent conjugate-locus surfaces.
//!
//! Along a unit-speed geodesic with slope angle `theta`, conjugate times are
//! controlled by the scalar function
//!
//! ```text
//! f(s) = 1 - cos(s) - mu(theta) s sin(s),      s = sqrt(lambda(theta)) t,
//! ```
//!
//! provided `lambda(theta) > 0`; directions with `lambda <= 0` carry no
//! conjugate points.  The positive zeros of `f` split into two families: the
//! lattice `s = 2 p pi` (whose kernel fields are isotropic) and the roots of
//! `tan(s/2) = mu s` (non-isotropic kernel).  Fiber directions have their own
//! family `t = 2 p pi / tau` with two-dimensional kernels.
//!
//! The locus of conjugate vectors `t u(theta, phi)` in the tangent space is a
//! union of surfaces of revolution satisfying
//! `kappa (x^2 + y^2) + tau^2 z^2 = s^2`,
//! sampled here for mesh export.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::jacobi::SolutionBasis;
use crate::m3::{Direction, M3Params, LAMBDA_ZERO_TOL};
use crate::report::{fmt_f64, JsonObject, JsonValue};

/// Root residual guaranteed by the branch root-finder, measured on the
/// pole-free form `g(s) = sin(s/2) - mu s cos(s/2)`.
pub const BRANCH_ROOT_RESIDUAL_TOL: f64 = 1e-13;

/// Normalized determinant threshold used when re-verifying reported
/// conjugate points against the solution matrix.
const DET_VERIFY_TOL: f64 = 1e-8;

/// Relative singular-value cut used to read conjugate multiplicities off the
/// solution matrix.
const MULTIPLICITY_RANK_TOL: f64 = 1e-7;

/// Branch roots closer than this to a lattice point are dropped as
/// numerical duplicates of the lattice point.
const LATTICE_MERGE_TOL: f64 = 1e-10;

/// The conjugate-time indicator `1 - cos(s) - mu(theta) s sin(s)`.
///
/// For `lambda(theta) > 0` its positive zeros are exactly the conjugate
/// values `s = sqrt(lambda) t`: the lattice `2 p pi` together with the roots
/// of `tan(s/2) = mu s`.
pub fn f_theta(params: &M3Params, theta: f64, s: f64) -> f64 {
    let mu = params.theta_invariants(theta).mu;
    1.0 - s.cos() - mu * s * s.sin()
}

/// Pole-free form of the branch equation: `g(s) = sin(s/2) - mu s cos(s/2)`.
/// Shares its roots with `tan(s/2) = mu s` and satisfies
/// `f(s) = 2 sin(s/2) g(s)`.
fn g_branch(mu: f64, s: f64) -> f64 {
    let half = 0.5 * s;
    half.sin() - mu * s * half.cos()
}

fn g_branch_prime(mu: f64, s: f64) -> f64 {
    let half = 0.5 * s;
    (0.5 - mu) * half.cos() + 0.5 * mu * s * half.sin()
}

/// A localized root of `tan(s/2) = mu s` with its achieved residual `|g(s)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRoot {
    pub s: f64,
    pub residual: f64,
}

/// Bisection to machine width followed by Newton polishing; the bracket is
/// guaranteed analytically, with a degenerate fallback for `|mu|` so small
/// that the endpoint sign drowns in rounding (the root then coincides with
/// the window endpoint to well below every tolerance in this crate).
fn bisect_branch(mu: f64, lo0: f64, hi0: f64, degenerate_endpoint: f64) -> BranchRoot {
    let (mut lo, mut hi) = (lo0, hi0);
    let (mut glo, ghi) = (g_branch(mu, lo), g_branch(mu, hi));
    if glo == 0.0 {
        return BranchRoot {
            s: lo,
            residual: 0.0,
        };
    }
    if ghi == 0.0 {
        return BranchRoot {
            s: hi,
            residual: 0.0,
        };
    }
    if glo.signum() == ghi.signum() {
        return BranchRoot {
            s: degenerate_endpoint,
            residual: g_branch(mu, degenerate_endpoint).abs(),
        };
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g_branch(mu, mid);
        if gm == 0.0 {
            return BranchRoot {
                s: mid,
                residual: 0.0,
            };
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    let mut best = g_branch(mu, s).abs();
    for _ in 0..3 {
        let d = g_branch_prime(mu, s);
        if d == 0.0 {
            break;
        }
        let candidate = s - g_branch(mu, s) / d;
        if candidate <= lo0 || candidate >= hi0 {
            break;
        }
        let res = g_branch(mu, candidate).abs();
        if res < best {
            s = candidate;
            best = res;
        } else {
            break;
        }
    }
    BranchRoot { s, residual: best }
}

/// The unique root of `tan(s/2) = mu(theta) s` in window `p`:
/// `(2 p pi, (2p+1) pi)` when `mu > 0`, `((2p+1) pi, 2(p+1) pi)` when
/// `mu < 0`.  Window `p = 0` exists only for `mu < 0` (requesting it
/// otherwise is an error); `mu = 0` has no branch roots at all (`None`).
pub fn branch_root(params: &M3Params, theta: f64, p: u32) -> Result<Option<BranchRoot>> {
    if !theta.is_finite() {
        return Err(Error::InvalidParam(format!(
            "theta must be finite, got {theta}"
        )));
    }
    let mu = params.theta_invariants(theta).mu;
    if p == 0 && mu >= 0.0 {
        return Err(Error::Domain(format!(
            "window p = 0 requires mu(theta) < 0, got mu = {mu}"
        )));
    }
    if mu == 0.0 {
        return Ok(None);
    }
    let pf = p as f64;
    let root = if mu > 0.0 {
        // Endpoint signs: g(2 p pi) = -2 p pi mu (-1)^p, g((2p+1) pi) = (-1)^p.
        bisect_branch(mu, TAU * pf, (2.0 * pf + 1.0) * PI, TAU * pf)
    } else {
        bisect_branch(
            mu,
            (2.0 * pf + 1.0) * PI,
            TAU * (pf + 1.0),
            TAU * (pf + 1.0),
        )
    };
    Ok(Some(root))
}

/// Which zero family a conjugate point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugateKind {
    /// `s = 2 p pi`; the kernel field is isotropic.  Multiplicity 1.
    IsotropicLattice(u32),
    /// Root of `tan(s/2) = mu s` in window `p`; non-isotropic kernel.
    /// Multiplicity 1.
    NonIsotropicBranch(u32),
    /// Fiber direction, `t = 2 p pi / tau`; non-isotropic kernel.
    /// Multiplicity 2.
    HopfFiber(u32),
}

impl ConjugateKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConjugateKind::IsotropicLattice(_) => "IsotropicLattice",
            ConjugateKind::NonIsotropicBranch(_) => "NonIsotropicBranch",
            ConjugateKind::HopfFiber(_) => "HopfFiber",
        }
    }

    pub fn index(&self) -> u32 {
        match self {
            ConjugateKind::IsotropicLattice(p)
            | ConjugateKind::NonIsotropicBranch(p)
            | ConjugateKind::HopfFiber(p) => *p,
        }
    }
}

/// One conjugate point along a geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePoint {
    /// Arc length of the conjugate point.
    pub t: f64,
    /// Rescaled value `sqrt(lambda) t` (equal to `tau t` on the fiber).
    pub s: f64,
    pub kind: ConjugateKind,
    /// Kernel dimension of the solution matrix at `t`, read off its
    /// singular values (1 for both off-fiber families, 2 on the fiber).
    pub multiplicity: usize,
}

/// All conjugate points with `0 < t <= t_max`, sorted by `t`.
///
/// Empty when `lambda(theta) <= 0`.  Fiber directions report the family
/// `t = 2 p pi / tau` with multiplicity 2; other admissible directions merge
/// the lattice family `t = 2 p pi / sqrt(lambda)` with the branch roots
/// `t = s_p / sqrt(lambda)`.  Every candidate is re-verified on the solution
/// matrix: its normalized determinant must vanish below `1e-8` and the
/// stored multiplicity is the measured kernel dimension.
pub fn conjugate_points(
    params: &M3Params,
    direction: &Direction,
    t_max: f64,
) -> Result<Vec<ConjugatePoint>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParam(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }
    let tau = params.tau();
    let theta = direction.theta();
    let inv = params.theta_invariants(theta);

    let mut points: Vec<ConjugatePoint> = Vec::new();
    if direction.is_hopf() {
        let period = TAU / tau;
        let mut p = 1u32;
        while period * p as f64 <= t_max {
            points.push(ConjugatePoint {
                t: period * p as f64,
                s: TAU * p as f64,
                kind: ConjugateKind::HopfFiber(p),
                multiplicity: 2,
            });
            p += 1;
        }
    } else {
        if inv.lambda < LAMBDA_ZERO_TOL {
            return Ok(points);
        }
        let w = inv.lambda.sqrt();
        let s_max = w * t_max;
        let mut p = 1u32;
        while TAU * p as f64 <= s_max {
            let s = TAU * p as f64;
            points.push(ConjugatePoint {
                t: s / w,
                s,
                kind: ConjugateKind::IsotropicLattice(p),
                multiplicity: 1,
            });
            p += 1;
        }
        let mut p = if inv.mu > 0.0 { 1u32 } else { 0u32 };
        loop {
            let window_lo = if inv.mu > 0.0 {
                TAU * p as f64
            } else {
                (2.0 * p as f64 + 1.0) * PI
            };
            if window_lo > s_max {
                break;
            }
            if let Some(root) = branch_root(params, theta, p)? {
                let nearest_lattice = (root.s / TAU).round() * TAU;
                if root.s <= s_max && (root.s - nearest_lattice).abs() >= LATTICE_MERGE_TOL {
                    points.push(ConjugatePoint {
                        t: root.s / w,
                        s: root.s,
                        kind: ConjugateKind::NonIsotropicBranch(p),
                        multiplicity: 1,
                    });
                }
            }
            p += 1;
        }
        points.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite times"));
    }

    // Independent confirmation on the solution matrix.  The determinant is
    // normalized by its structural prefactor (2 tau^2 / lambda^2) t off the
    // fiber and t on it, so the check is scale-free.
    let basis = SolutionBasis::new(params, direction)?;
    for point in &mut points {
        let scale = if direction.is_hopf() {
            point.t
        } else {
            2.0 * tau * tau / (inv.lambda * inv.lambda) * point.t
        };
        let normalized = basis.det_at(point.t) / scale;
        if normalized.abs() > DET_VERIFY_TOL {
            return Err(Error::Domain(format!(
                "conjugate candidate t = {} failed determinant confirmation ({normalized:e})",
                point.t
            )));
        }
        point.multiplicity = basis.multiplicity_at(point.t, MULTIPLICITY_RANK_TOL);
    }
    Ok(points)
}

/// Distance to the first conjugate point along slope angle `theta`:
/// infinite when `lambda(theta) <= 0`, `s_0(theta)/sqrt(lambda)` when
/// `mu(theta) < 0`, and `2 pi / sqrt(lambda)` otherwise.
pub fn conjugate_radius(params: &M3Params, theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::InvalidParam(format!(
            "theta must be finite, got {theta}"
        )));
    }
    let inv = params.theta_invariants(theta);
    if inv.lambda < LAMBDA_ZERO_TOL {
        return Ok(f64::INFINITY);
    }
    let w = inv.lambda.sqrt();
    if inv.mu < 0.0 {
        let root = branch_root(params, theta, 0)?.expect("mu < 0 always has a p = 0 root");
        Ok(root.s / w)
    } else {
        Ok(TAU / w)
    }
}

/// Infimum of [`conjugate_radius`] over all directions: `2 pi / tau` when
/// `kappa < tau^2` (attained on the fiber), `s_0(pi/2)/sqrt(kappa)` when
/// `kappa > tau^2` (attained at the equator).
pub fn global_conjugate_radius(params: &M3Params) -> f64 {
    let tau = params.tau();
    if params.kappa() < tau * tau {
        TAU / tau
    } else {
        let root = branch_root(params, FRAC_PI_2, 0)
            .expect("pi/2 is finite")
            .expect("kappa > tau^2 gives mu(pi/2) < 0");
        root.s / params.kappa().sqrt()
    }
}

/// Conjugate behavior class of the geodesic with slope angle `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicClass {
    /// Fiber geodesic (`theta` exactly `0` or `pi`).
    HopfFiber,
    /// `lambda(theta) <= 0`: all its Jacobi fields vanishing at the origin
    /// that vanish again are isotropic -- equivalently, it has no conjugate
    /// points.
    Isotropic,
    /// `lambda(theta) > 0`: carries non-isotropic conjugate points.
    HasNonIsotropicConjugates,
}

impl GeodesicClass {
    pub fn name(&self) -> &'static str {
        match self {
            GeodesicClass::HopfFiber => "HopfFiber",
            GeodesicClass::Isotropic => "Isotropic",
            GeodesicClass::HasNonIsotropicConjugates => "HasNonIsotropicConjugates",
        }
    }
}

/// Classifies the geodesic with slope angle `theta` in `[0, pi]`.
pub fn classify_geodesic(params: &M3Params, theta: f64) -> Result<GeodesicClass> {
    if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
        return Err(Error::InvalidParam(format!(
            "theta must lie in [0, pi], got {theta}"
        )));
    }
    if theta == 0.0 || theta == PI {
        return Ok(GeodesicClass::HopfFiber);
    }
    if params.theta_invariants(theta).lambda < LAMBDA_ZERO_TOL {
        Ok(GeodesicClass::Isotropic)
    } else {
        Ok(GeodesicClass::HasNonIsotropicConjugates)
    }
}

/// The closedness invariant `(length / 2 pi) (tau^2 - kappa) cos(theta)` of a
/// geodesic on a positively curved model that closes up after `length`.
///
/// Only defined for `kappa > 0` and off-fiber slope angles; `length` must be
/// an integer multiple of the lattice period `2 pi / sqrt(lambda(theta))`
/// (validated to `1e-9`).  The geodesic closes precisely when the returned
/// quantity is rational; deciding rationality of a float is the caller's
/// business and deliberately not attempted here.
pub fn closed_geodesic_invariant(params: &M3Params, theta: f64, length: f64) -> Result<f64> {
    if params.kappa() <= 0.0 {
        return Err(Error::Domain(format!(
            "closed-geodesic invariant requires kappa > 0, got kappa = {}",
            params.kappa()
        )));
    }
    if !(theta.is_finite() && theta > 0.0 && theta < PI) {
        return Err(Error::InvalidParam(format!(
            "theta must lie strictly inside (0, pi), got {theta}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParam(format!(
            "length must be positive, got {length}"
        )));
    }
    let lambda = params.theta_invariants(theta).lambda;
    let period = TAU / lambda.sqrt();
    let k = (length / period).round();
    if k < 1.0 || (length - k * period).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "length {length} is not an integer multiple of the lattice period {period}"
        )));
    }
    let tau = params.tau();
    Ok(length / TAU * (tau * tau - params.kappa()) * theta.cos())
}

/// Which family of locus surfaces to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocusFamily {
    /// Lattice surfaces `s = 2 p pi` (isotropic conjugate points), `p >= 1`.
    Isotropic,
    /// Branch-root surfaces `s = s_p(theta)`; `p = 0` exists only when
    /// `kappa > tau^2`.
    Branch,
}

impl LocusFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LocusFamily::Isotropic => "isotropic",
            LocusFamily::Branch => "branch",
        }
    }
}

/// A sampled tangent conjugate-locus surface of revolution.
///
/// Points are stored row-major (`theta` rows, `phi` columns); the generating
/// value `s` is constant along each row and every sample satisfies
/// `kappa (x^2 + y^2) + tau^2 z^2 = s^2` up to the reported residual.
#[derive(Debug, Clone)]
pub struct LocusSurface {
    family: LocusFamily,
    index: u32,
    theta: Vec<f64>,
    phi: Vec<f64>,
    s: Vec<f64>,
    points: Vec<Vector3<f64>>,
    max_quadric_residual: f64,
}

impl LocusSurface {
    pub fn family(&self) -> LocusFamily {
        self.family
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn rows(&self) -> usize {
        self.theta.len()
    }

    pub fn cols(&self) -> usize {
        self.phi.len()
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    pub fn phi(&self, j: usize) -> f64 {
        self.phi[j]
    }

    /// Generating `s` of row `i`.
    pub fn s(&self, i: usize) -> f64 {
        self.s[i]
    }

    pub fn point(&self, i: usize, j: usize) -> Vector3<f64> {
        self.points[i * self.phi.len() + j]
    }

    /// Largest relative violation of the implicit quadric over all samples.
    pub fn max_quadric_residual(&self) -> f64 {
        self.max_quadric_residual
    }

    /// Wavefront OBJ export: vertices row-major, then two triangles per
    /// grid quad with wraparound in `phi`.  Rows at the poles produce
    /// degenerate fans, which OBJ consumers treat as zero-area faces.
    pub fn write_obj(&self, mut w: impl Write) -> Result<()> {
        for point in &self.points {
            writeln!(
                w,
                "v {} {} {}",
                fmt_f64(point.x),
                fmt_f64(point.y),
                fmt_f64(point.z)
            )?;
        }
        let cols = self.cols();
        for i in 0..self.rows().saturating_sub(1) {
            for j in 0..cols {
                let j2 = (j + 1) % cols;
                let a = i * cols + j + 1;
                let b = (i + 1) * cols + j + 1;
                let c = (i + 1) * cols + j2 + 1;
                let d = i * cols + j2 + 1;
                writeln!(w, "f {a} {b} {c}")?;
                writeln!(w, "f {a} {c} {d}")?;
            }
        }
        Ok(())
    }

    /// JSON export: grid axes as flat arrays, points as a rows x cols x 3
    /// nested array in the same row-major order as the other formats.
    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        let rows: Vec<JsonValue> = (0..self.rows())
            .map(|i| {
                JsonValue::array((0..self.cols()).map(|j| {
                    let point = self.point(i, j);
                    JsonValue::array([point.x, point.y, point.z].map(JsonValue::number))
                }))
            })
            .collect();
        let obj = JsonObject::new()
            .field("family", JsonValue::string(self.family.name()))
            .field("index", JsonValue::integer(i64::from(self.index)))
            .field("rows", JsonValue::integer(self.rows() as i64))
            .field("cols", JsonValue::integer(self.cols() as i64))
            .field(
                "theta",
                JsonValue::array(self.theta.iter().map(|&v| JsonValue::number(v))),
            )
            .field(
                "phi",
                JsonValue::array(self.phi.iter().map(|&v| JsonValue::number(v))),
            )
            .field(
                "s",
                JsonValue::array(self.s.iter().map(|&v| JsonValue::number(v))),
            )
            .field(
                "max_quadric_residual",
                JsonValue::number(self.max_quadric_residual),
            )
            .field("points", JsonValue::array(rows));
        writeln!(w, "{}", obj.render())?;
        Ok(())
    }

    /// CSV export with header `theta,phi,x,y,z,s`, row-major sample order.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "theta,phi,x,y,z,s")?;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let point = self.point(i, j);
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt_f64(self.theta[i]),
                    fmt_f64(self.phi[j]),
                    fmt_f64(point.x),
                    fmt_f64(point.y),
                    fmt_f64(point.z),
                    fmt_f64(self.s[i])
                )?;
            }
        }
        Ok(())
    }
}

/// Samples the locus surface of family/index over explicit grids.
///
/// Every grid angle must satisfy `lambda(theta) > 0`.  Rows at the exact
/// poles (`sin(theta) = 0`, where the branch equation degenerates) use the
/// continuous limit of `s_p`: `2 p pi` when `kappa < tau^2`, `2 (p+1) pi`
/// when `kappa > tau^2`.
pub fn sample_locus(
    params: &M3Params,
    family: LocusFamily,
    p: u32,
    theta_grid: &[f64],
    phi_grid: &[f64],
) -> Result<LocusSurface> {
    if theta_grid.is_empty() || phi_grid.is_empty() {
        return Err(Error::EmptyList);
    }
    let tau = params.tau();
    let kappa = params.kappa();
    match family {
        LocusFamily::Isotropic => {
            if p == 0 {
                return Err(Error::InvalidParam(
                    "lattice surfaces require p >= 1".to_string(),
                ));
            }
        }
        LocusFamily::Branch => {
            if p == 0 && kappa < tau * tau {
                return Err(Error::InvalidParam(
                    "branch surface p = 0 requires kappa > tau^2".to_string(),
                ));
            }
        }
    }
    for &phi in phi_grid {
        if !phi.is_finite() {
            return Err(Error::NonFinite);
        }
    }

    let mut s_values = Vec::with_capacity(theta_grid.len());
    let mut points = Vec::with_capacity(theta_grid.len() * phi_grid.len());
    let mut max_residual = 0.0_f64;
    for &theta in theta_grid {
        if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
            return Err(Error::InvalidParam(format!(
                "grid angle {theta} outside [0, pi]"
            )));
        }
        let inv = params.theta_invariants(theta);
        if inv.lambda < LAMBDA_ZERO_TOL {
            return Err(Error::Domain(format!(
                "grid angle {theta} has lambda(theta) <= 0; no conjugate points there"
            )));
        }
        let s = match family {
            LocusFamily::Isotropic => TAU * p as f64,
            LocusFamily::Branch => {
                if inv.mu == 0.0 {
                    // Pole rows: continuous endpoint limit of s_p.
                    if kappa < tau * tau {
                        TAU * p as f64
                    } else {
                        TAU * (p + 1) as f64
                    }
                } else {
                    branch_root(params, theta, p)?
                        .expect("mu != 0 windows always contain a root")
                        .s
                }
            }
        };
        let t = s / inv.lambda.sqrt();
        let (st, ct) = theta.sin_cos();
        for &phi in phi_grid {
            let (sp, cp) = phi.sin_cos();
            let point = Vector3::new(t * st * cp, t * st * sp, t * ct);
            let quadric =
                kappa * (point.x * point.x + point.y * point.y) + tau * tau * point.z * point.z;
            let residual = (quadric - s * s).abs() / (s * s).max(1.0);
            max_residual = max_residual.max(residual);
            points.push(point);
        }
        s_values.push(s);
    }
    Ok(LocusSurface {
        family,
        index: p,
        theta: theta_grid.to_vec(),
        phi: phi_grid.to_vec(),
        s: s_values,
        points,
        max_quadric_residual: max_residual,
    })
}

/// Maximal contiguous runs of the uniform `[0, pi]` grid (`samples` points,
/// endpoints included) on which `lambda(theta) > 0`.  One run covering the
/// whole grid when `kappa > 0`; otherwise polar caps.
pub fn admissible_theta_runs(params: &M3Params, samples: usize) -> Vec<Vec<f64>> {
    let mut runs = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    if samples < 2 {
        return runs;
    }
    for i in 0..samples {
        let theta = PI * i as f64 / (samples - 1) as f64;
        if params.theta_invariants(theta).lambda >= LAMBDA_ZERO_TOL {
            current.push(theta);
        } else if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Whether `point` lies on the isotropic part of the tangent conjugate locus:
/// on some lattice surface `kappa (x^2+y^2) + tau^2 z^2 = (2 p pi)^2`
/// (`p >= 1`, within `tol`) and away from that surface's two polar points
/// `(0, 0, +-2 p pi / tau)`, which belong to the fiber family instead.
pub fn isotropic_locus_membership(params: &M3Params, point: &Vector3<f64>, tol: f64) -> bool {
    let tau = params.tau();
    let quadric =
        params.kappa() * (point.x * point.x + point.y * point.y) + tau * tau * point.z * point.z;
    let mut p = 1u32;
    loop {
        let s = TAU * p as f64;
        let target = s * s;
        if target > quadric + tol {
            return false;
        }
        if (quadric - target).abs() <= tol {
            let pole_z = s / tau;
            let near_pole = [pole_z, -pole_z]
                .iter()
                .any(|&z| (point - Vector3::new(0.0, 0.0, z)).norm() <= tol);
            return !near_pole;
        }
        p += 1;
    }
}

/// CSV export of the conjugate-time indicator: header `s,f_theta_s`, then
/// `samples` uniform values on `[0, s_max]`.
pub fn write_fcurve_csv(
    params: &M3Params,
    theta: f64,
    s_max: f64,
    samples: usize,
    mut w: impl Write,
) -> Result<()> {
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(Error::InvalidParam(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParam(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidParam(format!(
            "theta must be finite, got {theta}"
        )));
    }
    writeln!(w, "s,f_theta_s")?;
    for i in 0..samples {
        let s = s_max * i as f64 / (samples - 1) as f64;
        writeln!(w, "{},{}", fmt_f64(s), fmt_f64(f_theta(params, theta, s)))?;
    }
    Ok(())
}
