//! Self-verification suites.
//!
//! [`run_all`] re-derives the library's structural guarantees numerically
//! and reports one pass/fail line per criterion.  The same reports back both
//! the acceptance test target and the CLI `verify` command; `Quick` trims
//! the seeded sample counts and integration spans to keep the wall time in
//! seconds, `Full` runs the complete sweeps.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conjugate::{
    admissible_theta_runs, branch_root, conjugate_points, conjugate_radius,
    global_conjugate_radius, sample_locus, ConjugateKind, LocusFamily,
};
use crate::jacobi::{
    integrate_numeric, isotropic_space_dim, isotropy_test, solve_closed_form, SolutionBasis,
};
use crate::m3::{raw_algebra, rotation_phi, Direction, M3Params, LAMBDA_ZERO_TOL};
use crate::opspace::DEFAULT_RANK_TOL;
use crate::osculating::OperatorCurve;
use crate::reductive::BiInvariantExtension;

/// How exhaustively to run the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    /// Reduced seeded counts and spans; completes in a few seconds.
    Quick,
    /// The full sweeps.
    Full,
}

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// One criterion: returns a detail string on success, a diagnosis on failure.
type Criterion = fn(VerifyLevel) -> Result<String, String>;

/// Runs every criterion and returns the reports in a fixed order.
pub fn run_all(level: VerifyLevel) -> Vec<CriterionReport> {
    let checks: Vec<(&'static str, Criterion)> = vec![
        ("natural-reductivity", natural_reductivity),
        ("osculating-rank", osculating_rank),
        ("circle-law", circle_law),
        ("derivative-recursions", derivative_recursions),
        ("closed-form-vs-rk4", closed_form_vs_rk4),
        ("conjugate-points", conjugate_points_check),
        ("isotropy-classification", isotropy_classification),
        ("conjugate-radius", conjugate_radius_check),
        ("no-conjugate-regime", no_conjugate_regime),
        ("locus-surfaces", locus_surfaces),
        ("bi-invariance", bi_invariance),
        ("equivariance", equivariance),
        ("scalar-invariants", scalar_invariants),
    ];
    checks
        .into_iter()
        .map(|(name, check)| match check(level) {
            Ok(detail) => CriterionReport {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CriterionReport {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}

/// True when every report passed.
pub fn all_passed(reports: &[CriterionReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// The parameter grid used throughout: `kappa` in {-4, -1, 0, 1, 4} crossed
/// with `tau` in {0.5, 1, 2}, omitting the excluded `kappa = tau^2` pairs.
fn grid() -> Vec<M3Params> {
    let mut members = Vec::new();
    for kappa in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        for tau in [0.5, 1.0, 2.0] {
            if kappa != tau * tau {
                members.push(M3Params::new(kappa, tau).expect("grid members are valid"));
            }
        }
    }
    members
}

fn off_fiber_thetas() -> [f64; 5] {
    [0.1, FRAC_PI_4, FRAC_PI_2, 2.0 * FRAC_PI_3, PI - 0.1]
}

fn natural_reductivity(_level: VerifyLevel) -> Result<String, String> {
    let mut worst = 0.0_f64;
    for params in grid() {
        let report = params.build_algebra().check_naturally_reductive();
        worst = worst.max(report.max_violation);
        if !report.is_naturally_reductive || report.max_violation >= 1e-12 {
            return Err(format!(
                "(kappa, tau) = ({}, {}): violation {:e}",
                params.kappa(),
                params.tau(),
                report.max_violation
            ));
        }
    }
    Ok(format!("13 models, max violation {worst:.2e}"))
}

fn osculating_rank(_level: VerifyLevel) -> Result<String, String> {
    let mut cases = 0usize;
    for params in grid() {
        for theta in off_fiber_thetas() {
            for phi in [0.0, 1.3] {
                let direction = Direction::new(theta, phi).map_err(|e| e.to_string())?;
                let curve = OperatorCurve::for_m3(&params, &direction);
                let rank = curve
                    .osculating_rank(DEFAULT_RANK_TOL)
                    .map_err(|e| e.to_string())?;
                if rank != 2 {
                    return Err(format!(
                        "rank {rank} != 2 at (kappa, tau, theta, phi) = ({}, {}, {theta}, {phi})",
                        params.kappa(),
                        params.tau()
                    ));
                }
                cases += 1;
            }
        }
        for theta in [0.0, PI] {
            let direction = Direction::new(theta, 0.0).map_err(|e| e.to_string())?;
            let curve = OperatorCurve::for_m3(&params, &direction);
            let rank = curve
                .osculating_rank(DEFAULT_RANK_TOL)
                .map_err(|e| e.to_string())?;
            if rank != 0 {
                return Err(format!("fiber rank {rank} != 0 at theta = {theta}"));
            }
            cases += 1;
        }
    }
    // The excluded round-sphere locus is flat in this sense: rank 0 at every
    // test angle.
    let round = raw_algebra(4.0, 2.0);
    for theta in off_fiber_thetas() {
        for phi in [0.0, 1.3] {
            let u = Direction::new(theta, phi)
                .map_err(|e| e.to_string())?
                .unit_dvector();
            let base = round
                .riemann_jacobi_operator(&u)
                .map_err(|e| e.to_string())?;
            let generator = round.s_operator(&u).map_err(|e| e.to_string())?;
            let curve = OperatorCurve::new(base, generator).map_err(|e| e.to_string())?;
            let rank = curve
                .osculating_rank(DEFAULT_RANK_TOL)
                .map_err(|e| e.to_string())?;
            if rank != 0 {
                return Err(format!("round-sphere rank {rank} != 0 at theta = {theta}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} rank checks"))
}

fn circle_law(_level: VerifyLevel) -> Result<String, String> {
    let mut worst_law = 0.0_f64;
    let mut worst_radius = 0.0_f64;
    let mut worst_period = 0.0_f64;
    let mut worst_center = 0.0_f64;
    for params in grid() {
        let tau = params.tau();
        for theta in [0.1, FRAC_PI_4, FRAC_PI_2, 2.0 * FRAC_PI_3] {
            for phi in [0.0, 1.3] {
                let direction = Direction::new(theta, phi).map_err(|e| e.to_string())?;
                let curve = OperatorCurve::for_m3(&params, &direction);
                let d1 = curve.derivative_at_zero(1).map_err(|e| e.to_string())?;
                let d2 = curve.derivative_at_zero(2).map_err(|e| e.to_string())?;
                let period = TAU / tau;
                for k in 0..100 {
                    let t = period * k as f64 / 100.0;
                    let direct = curve.curve_at(t);
                    let law = &(curve.base() + &d1.scale((tau * t).sin() / tau))
                        + &d2.scale((1.0 - (tau * t).cos()) / (tau * tau));
                    let err = (direct.matrix() - law.matrix()).amax();
                    worst_law = worst_law.max(err);
                    if err >= 1e-10 {
                        return Err(format!(
                            "law error {err:e} at (kappa, tau, theta, phi, t) = ({}, {tau}, {theta}, {phi}, {t})",
                            params.kappa()
                        ));
                    }
                }

                let fit = curve.fit_circle(64).map_err(|e| e.to_string())?;
                let mu = params.theta_invariants(theta).mu;
                let radius_expect =
                    0.5 * 2.0_f64.sqrt() * (tau * tau - params.kappa()).abs() * theta.sin().powi(2);
                let radius_err = (fit.radius - radius_expect).abs() / radius_expect;
                worst_radius = worst_radius.max(radius_err);
                if radius_err >= 1e-8 {
                    return Err(format!("radius error {radius_err:e} at theta = {theta}"));
                }
                let period_err = (fit.period - period).abs();
                worst_period = worst_period.max(period_err);
                if period_err >= 1e-8 {
                    return Err(format!("period error {period_err:e} at theta = {theta}"));
                }
                let s_sq = crate::m3::operator_data(&params, &direction).s.squared();
                let center_expect = s_sq.scale(4.0 * mu - 1.0);
                let center_err = (fit.center.matrix() - center_expect.matrix()).amax();
                worst_center = worst_center.max(center_err);
                if center_err >= 1e-10 {
                    return Err(format!("center error {center_err:e} at theta = {theta}"));
                }
            }
        }
    }
    Ok(format!(
        "law {worst_law:.2e}, radius {worst_radius:.2e}, period {worst_period:.2e}, center {worst_center:.2e}"
    ))
}

fn derivative_recursions(_level: VerifyLevel) -> Result<String, String> {
    let mut worst = 0.0_f64;
    for params in grid() {
        let tau2 = params.tau() * params.tau();
        for theta in off_fiber_thetas() {
            for phi in [0.0, 1.3] {
                let direction = Direction::new(theta, phi).map_err(|e| e.to_string())?;
                let curve = OperatorCurve::for_m3(&params, &direction);
                for (low, high) in [(1usize, 3usize), (2, 4)] {
                    let d_low = curve.derivative_at_zero(low).map_err(|e| e.to_string())?;
                    let d_high = curve.derivative_at_zero(high).map_err(|e| e.to_string())?;
                    let err = (d_high.matrix() + tau2 * d_low.matrix()).amax();
                    worst = worst.max(err);
                    if err >= 1e-10 {
                        return Err(format!(
                            "recursion D{high} = -tau^2 D{low} violated by {err:e} at (kappa, tau, theta) = ({}, {}, {theta})",
                            params.kappa(),
                            params.tau()
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("max recursion defect {worst:.2e}"))
}

/// Draws a seeded case of the requested branch class; returns
/// `(params, direction, xprime0)`.
fn draw_case(rng: &mut ChaCha8Rng, class: usize) -> (M3Params, Direction, Vector3<f64>) {
    let xprime0 = Vector3::new(
        rng.gen_range(-1.5..1.5),
        rng.gen_range(-1.5..1.5),
        rng.gen_range(-1.5..1.5),
    );
    let phi = rng.gen_range(0.0..TAU);
    loop {
        let tau: f64 = rng.gen_range(0.5..2.0);
        let (params, theta) = match class {
            // Oscillatory, generic theta.
            0 => {
                let kappa = rng.gen_range(-4.0..4.0);
                let theta = rng.gen_range(0.2..PI - 0.2);
                (M3Params::new(kappa, tau), theta)
            }
            // Oscillatory at the equator.
            1 => (M3Params::new(rng.gen_range(0.5..4.0), tau), FRAC_PI_2),
            // Effectively zero lambda.
            2 => (M3Params::new(0.0, tau), FRAC_PI_2),
            // Hyperbolic, bounded growth rate.
            3 => {
                let kappa = rng.gen_range(-1.5..-0.2);
                let theta = rng.gen_range(1.0..PI - 1.0);
                (M3Params::new(kappa, tau), theta)
            }
            // Fiber.
            _ => {
                let kappa = rng.gen_range(-4.0..4.0);
                let theta = if rng.gen_bool(0.5) { 0.0 } else { PI };
                (M3Params::new(kappa, tau), theta)
            }
        };
        let Ok(params) = params else { continue };
        let lambda = params.theta_invariants(theta).lambda;
        let admissible = match class {
            0 => lambda > 0.05 && (theta - FRAC_PI_2).abs() > 0.1,
            1 => lambda > 0.05,
            3 => (-1.5..=-0.2).contains(&lambda),
            _ => true,
        };
        if admissible {
            let direction = Direction::new(
                theta,
                if theta == 0.0 || theta == PI {
                    0.0
                } else {
                    phi
                },
            )
            .expect("constructed in range");
            return (params, direction, xprime0);
        }
    }
}

fn closed_form_vs_rk4(level: VerifyLevel) -> Result<String, String> {
    let (cases, t_end) = match level {
        VerifyLevel::Quick => (8usize, 5.0),
        VerifyLevel::Full => (50usize, 10.0),
    };
    let step = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0_f64;
    for case in 0..cases {
        let (params, direction, xprime0) = draw_case(&mut rng, case % 5);
        let solution =
            solve_closed_form(&params, &direction, xprime0).map_err(|e| e.to_string())?;
        let algebra = params.build_algebra();
        let trajectory = integrate_numeric(
            &algebra,
            &direction.unit_dvector(),
            &DVector::from_column_slice(xprime0.as_slice()),
            t_end,
            step,
        )
        .map_err(|e| e.to_string())?;
        let mut sup = 0.0_f64;
        for k in 0..trajectory.len() {
            let closed = solution.evaluate(trajectory.time(k));
            let numeric = trajectory.position(k);
            for i in 0..3 {
                sup = sup.max((closed[i] - numeric[i]).abs());
            }
        }
        worst = worst.max(sup);
        if sup >= 1e-6 {
            return Err(format!(
                "case {case} ({:?}): sup error {sup:e} for (kappa, tau, theta) = ({}, {}, {})",
                solution.branch(),
                params.kappa(),
                params.tau(),
                direction.theta()
            ));
        }
    }
    Ok(format!(
        "{cases} cases on [0, {t_end}], sup error {worst:.2e}"
    ))
}

/// Zeros of the solution-matrix determinant by sign scan plus bisection.
fn det_scan_roots(basis: &SolutionBasis, t_max: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_t = step;
    let mut prev = basis.det_at(prev_t);
    let mut k = 2usize;
    loop {
        let t = step * k as f64;
        if t > t_max {
            break;
        }
        let cur = basis.det_at(t);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (prev_t, t);
            let mut flo = prev;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = basis.det_at(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev = cur;
        k += 1;
    }
    roots
}

fn conjugate_cases() -> Vec<(f64, f64, f64)> {
    vec![
        (0.0, 1.0, FRAC_PI_4),
        (4.0, 1.0, FRAC_PI_2),
        (1.0, 2.0, FRAC_PI_3),
    ]
}

fn conjugate_points_check(_level: VerifyLevel) -> Result<String, String> {
    let t_max = 25.0;
    let mut worst = 0.0_f64;
    let mut total = 0usize;
    for (kappa, tau, theta) in conjugate_cases() {
        let params = M3Params::new(kappa, tau).map_err(|e| e.to_string())?;
        let direction = Direction::new(theta, 0.0).map_err(|e| e.to_string())?;
        let points = conjugate_points(&params, &direction, t_max).map_err(|e| e.to_string())?;
        let basis = SolutionBasis::new(&params, &direction).map_err(|e| e.to_string())?;
        let scan = det_scan_roots(&basis, t_max, 1e-3);
        if points.len() != scan.len() {
            return Err(format!(
                "({kappa}, {tau}, {theta}): {} listed vs {} scanned",
                points.len(),
                scan.len()
            ));
        }
        for (point, root) in points.iter().zip(&scan) {
            let err = (point.t - root).abs();
            worst = worst.max(err);
            if err >= 1e-6 {
                return Err(format!(
                    "({kappa}, {tau}, {theta}): t = {} vs scan {root}, error {err:e}",
                    point.t
                ));
            }
            if point.multiplicity != 1 {
                return Err(format!(
                    "({kappa}, {tau}, {theta}): multiplicity {} != 1 at t = {}",
                    point.multiplicity, point.t
                ));
            }
        }
        total += points.len();
    }
    // Fiber family: t = pi, 2 pi, 3 pi with multiplicity 2 for tau = 2.
    let params = M3Params::new(1.0, 2.0).map_err(|e| e.to_string())?;
    let direction = Direction::new(0.0, 0.0).map_err(|e| e.to_string())?;
    let points = conjugate_points(&params, &direction, 10.0).map_err(|e| e.to_string())?;
    let expect = [PI, TAU, 3.0 * PI];
    if points.len() != 3 {
        return Err(format!("fiber case: {} points != 3", points.len()));
    }
    for (point, t) in points.iter().zip(expect) {
        if (point.t - t).abs() >= 1e-9 || point.multiplicity != 2 {
            return Err(format!(
                "fiber case: got (t, mult) = ({}, {}), want ({t}, 2)",
                point.t, point.multiplicity
            ));
        }
    }
    total += 3;
    Ok(format!(
        "{total} points confirmed, max scan gap {worst:.2e}"
    ))
}

fn isotropy_classification(_level: VerifyLevel) -> Result<String, String> {
    let mut checked = 0usize;
    for (kappa, tau, theta) in conjugate_cases() {
        let params = M3Params::new(kappa, tau).map_err(|e| e.to_string())?;
        let direction = Direction::new(theta, 0.0).map_err(|e| e.to_string())?;
        if isotropic_space_dim(&direction) != 1 {
            return Err("isotropic space dimension off the fiber must be 1".into());
        }
        let basis = SolutionBasis::new(&params, &direction).map_err(|e| e.to_string())?;
        let points = conjugate_points(&params, &direction, 25.0).map_err(|e| e.to_string())?;
        for point in points {
            let svd = basis.matrix_at(point.t).svd(false, true);
            let v_t = svd.v_t.as_ref().expect("requested");
            let sigma_max = svd.singular_values.max();
            for (i, sigma) in svd.singular_values.iter().enumerate() {
                if *sigma > 1e-6 * sigma_max {
                    continue;
                }
                let kernel_dir = Vector3::new(v_t[(i, 0)], v_t[(i, 1)], v_t[(i, 2)]);
                let verdict = isotropy_test(&params, &direction, kernel_dir);
                let expect_isotropic = matches!(point.kind, ConjugateKind::IsotropicLattice(_));
                if verdict.is_isotropic != expect_isotropic {
                    return Err(format!(
                        "({kappa}, {tau}, {theta}) at t = {}: kernel isotropy {} but kind {:?}",
                        point.t, verdict.is_isotropic, point.kind
                    ));
                }
                checked += 1;
            }
        }
    }
    // Fiber case: two-dimensional kernels, nothing isotropic there.
    let params = M3Params::new(1.0, 2.0).map_err(|e| e.to_string())?;
    let direction = Direction::new(0.0, 0.0).map_err(|e| e.to_string())?;
    if isotropic_space_dim(&direction) != 0 {
        return Err("isotropic space dimension on the fiber must be 0".into());
    }
    let basis = SolutionBasis::new(&params, &direction).map_err(|e| e.to_string())?;
    for point in conjugate_points(&params, &direction, 10.0).map_err(|e| e.to_string())? {
        let svd = basis.matrix_at(point.t).svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested");
        let sigma_max = svd.singular_values.max();
        let mut kernel = 0usize;
        for (i, sigma) in svd.singular_values.iter().enumerate() {
            if *sigma > 1e-6 * sigma_max {
                continue;
            }
            kernel += 1;
            let kernel_dir = Vector3::new(v_t[(i, 0)], v_t[(i, 1)], v_t[(i, 2)]);
            if isotropy_test(&params, &direction, kernel_dir).is_isotropic {
                return Err(format!(
                    "fiber kernel at t = {} must not be isotropic",
                    point.t
                ));
            }
            checked += 1;
        }
        if kernel != 2 {
            return Err(format!(
                "fiber kernel dimension {kernel} != 2 at t = {}",
                point.t
            ));
        }
    }
    Ok(format!("{checked} kernel directions classified"))
}

fn conjugate_radius_check(_level: VerifyLevel) -> Result<String, String> {
    let mut worst_scan = 0.0_f64;
    let mut scanned = 0usize;
    for params in grid() {
        for theta in [0.3, FRAC_PI_4, FRAC_PI_2, 2.5] {
            let rho = conjugate_radius(&params, theta).map_err(|e| e.to_string())?;
            if !rho.is_finite() {
                continue;
            }
            let direction = Direction::new(theta, 0.0).map_err(|e| e.to_string())?;
            let basis = SolutionBasis::new(&params, &direction).map_err(|e| e.to_string())?;
            let roots = det_scan_roots(&basis, rho * 1.25, 1e-3);
            let first = roots
                .first()
                .ok_or_else(|| format!("no scan zero below 1.25 rho at theta = {theta}"))?;
            let err = (first - rho).abs();
            worst_scan = worst_scan.max(err);
            if err >= 1e-6 {
                return Err(format!(
                    "(kappa, tau, theta) = ({}, {}, {theta}): radius {rho} vs scan {first}",
                    params.kappa(),
                    params.tau()
                ));
            }
            scanned += 1;
        }

        // Closed-form global radius, its grid infimum, and the dichotomy.
        let tau = params.tau();
        let kappa = params.kappa();
        let global = global_conjugate_radius(&params);
        if kappa < tau * tau {
            if (global - TAU / tau).abs() >= 1e-12 {
                return Err(format!(
                    "global radius {global} != 2 pi / tau for kappa < tau^2"
                ));
            }
        } else {
            let root = branch_root(&params, FRAC_PI_2, 0)
                .map_err(|e| e.to_string())?
                .ok_or("missing equatorial branch root")?;
            if !(root.s > PI && root.s < TAU) {
                return Err(format!("s0 = {} outside (pi, 2 pi)", root.s));
            }
            if root.residual >= 1e-13 {
                return Err(format!("s0 residual {:e} above 1e-13", root.residual));
            }
            if (global - root.s / kappa.sqrt()).abs() >= 1e-12 {
                return Err(format!("global radius {global} != s0/sqrt(kappa)"));
            }
        }
        let mut inf = f64::INFINITY;
        for i in 0..=1000 {
            let theta = PI * i as f64 / 1000.0;
            inf = inf.min(conjugate_radius(&params, theta).map_err(|e| e.to_string())?);
        }
        if (inf - global).abs() >= 1e-6 {
            return Err(format!(
                "(kappa, tau) = ({kappa}, {tau}): grid infimum {inf} vs global {global}"
            ));
        }

        // First conjugate point is isotropic exactly when kappa < tau^2 and
        // the direction is off the fiber.
        for theta in [0.3, FRAC_PI_2, 2.5] {
            let inv = params.theta_invariants(theta);
            if inv.lambda < LAMBDA_ZERO_TOL {
                continue;
            }
            let direction = Direction::new(theta, 0.0).map_err(|e| e.to_string())?;
            let rho = conjugate_radius(&params, theta).map_err(|e| e.to_string())?;
            let points =
                conjugate_points(&params, &direction, rho * 1.001).map_err(|e| e.to_string())?;
            let first = points.first().ok_or("no first conjugate point")?;
            let isotropic = matches!(first.kind, ConjugateKind::IsotropicLattice(_));
            if isotropic != (kappa < tau * tau) {
                return Err(format!(
                    "dichotomy broken at (kappa, tau, theta) = ({kappa}, {tau}, {theta})"
                ));
            }
        }
        let fiber = Direction::new(0.0, 0.0).map_err(|e| e.to_string())?;
        let fiber_first =
            conjugate_points(&params, &fiber, TAU / tau * 1.001).map_err(|e| e.to_string())?;
        let first = fiber_first.first().ok_or("no fiber conjugate point")?;
        if !matches!(first.kind, ConjugateKind::HopfFiber(1)) {
            return Err("fiber first conjugate point must be in the fiber family".into());
        }
    }
    Ok(format!("{scanned} radii scanned, max gap {worst_scan:.2e}"))
}

fn no_conjugate_regime(level: VerifyLevel) -> Result<String, String> {
    let (cases, t_max): (usize, f64) = match level {
        VerifyLevel::Quick => (5, 20.0),
        VerifyLevel::Full => (20, 50.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_abs = f64::INFINITY;
    for case in 0..cases {
        // lambda(theta) <= -0.05 keeps the hyperbolic determinant growth
        // well clear of the zero threshold.
        let (params, theta) = loop {
            let kappa = rng.gen_range(-4.0..-0.1);
            let tau: f64 = rng.gen_range(0.5..2.0);
            let theta = rng.gen_range(0.5..PI - 0.5);
            let Ok(params) = M3Params::new(kappa, tau) else {
                continue;
            };
            if params.theta_invariants(theta).lambda <= -0.05 {
                break (params, theta);
            }
        };
        let direction =
            Direction::new(theta, rng.gen_range(0.0..TAU)).map_err(|e| e.to_string())?;
        let basis = SolutionBasis::new(&params, &direction).map_err(|e| e.to_string())?;
        // The matrix entries grow like exp(m t) while the determinant only
        // grows like t^2 exp(m t), so the 3x3 determinant loses a factor
        // exp(2 m t) to cancellation.  Cap the scan where f64 still resolves
        // the sign with a comfortable margin.
        let m = (-params.theta_invariants(theta).lambda).sqrt();
        let t_cap = t_max.min(13.8 / m);
        let mut prev = basis.det_at(1e-3);
        let mut k = 2usize;
        loop {
            let t = 1e-3 * k as f64;
            if t > t_cap {
                break;
            }
            let det = basis.det_at(t);
            if det != 0.0 && prev != 0.0 && det.signum() != prev.signum() {
                return Err(format!(
                    "case {case}: determinant sign change near t = {t} for (kappa, tau, theta) = ({}, {}, {theta})",
                    params.kappa(),
                    params.tau()
                ));
            }
            if t >= 0.1 {
                let abs = det.abs();
                min_abs = min_abs.min(abs);
                if abs <= 1e-10 {
                    return Err(format!("case {case}: |det| = {abs:e} too small at t = {t}"));
                }
            }
            prev = det;
            k += 1;
        }
    }
    Ok(format!(
        "{cases} cases, min |det| beyond t = 0.1 is {min_abs:.2e}"
    ))
}

fn locus_surfaces(_level: VerifyLevel) -> Result<String, String> {
    let phi_grid: Vec<f64> = (0..24).map(|j| TAU * j as f64 / 24.0).collect();
    let mut worst_quadric = 0.0_f64;
    let mut surfaces = 0usize;
    for params in grid() {
        let tau = params.tau();
        let kappa = params.kappa();
        let runs = admissible_theta_runs(&params, 65);
        if runs.is_empty() {
            return Err(format!(
                "no admissible angles for (kappa, tau) = ({kappa}, {tau})"
            ));
        }
        for run in &runs {
            for p in [1u32, 2] {
                let surface = sample_locus(&params, LocusFamily::Isotropic, p, run, &phi_grid)
                    .map_err(|e| e.to_string())?;
                worst_quadric = worst_quadric.max(surface.max_quadric_residual());
                if surface.max_quadric_residual() >= 1e-9 {
                    return Err(format!(
                        "lattice surface p = {p} quadric residual {:e} for (kappa, tau) = ({kappa}, {tau})",
                        surface.max_quadric_residual()
                    ));
                }
                // Heisenberg lattice surfaces are planes z = +-2 p pi / tau.
                if kappa == 0.0 {
                    let z_expect = TAU * p as f64 / tau;
                    for i in 0..surface.rows() {
                        for j in 0..surface.cols() {
                            let z = surface.point(i, j).z;
                            if (z.abs() - z_expect).abs() >= 1e-12 {
                                return Err(format!(
                                    "plane defect |{z}| != {z_expect} at tau = {tau}, p = {p}"
                                ));
                            }
                        }
                    }
                }
                surfaces += 1;
            }
            let p_branch = if kappa > tau * tau { 0u32 } else { 1u32 };
            let surface = sample_locus(&params, LocusFamily::Branch, p_branch, run, &phi_grid)
                .map_err(|e| e.to_string())?;
            worst_quadric = worst_quadric.max(surface.max_quadric_residual());
            if surface.max_quadric_residual() >= 1e-9 {
                return Err(format!(
                    "branch surface quadric residual {:e} for (kappa, tau) = ({kappa}, {tau})",
                    surface.max_quadric_residual()
                ));
            }
            surfaces += 1;
        }

        // Branch windows are strict (for any sign of lambda) and the
        // theta -> 0 endpoint limits hold.
        let theta_probe = 0.9;
        for p in 1..=4u32 {
            let root = branch_root(&params, theta_probe, p)
                .map_err(|e| e.to_string())?
                .ok_or("unexpected missing window root")?;
            let pf = p as f64;
            let inside = if kappa < tau * tau {
                root.s > TAU * pf && root.s < (2.0 * pf + 1.0) * PI
            } else {
                root.s > (2.0 * pf + 1.0) * PI && root.s < TAU * (pf + 1.0)
            };
            if !inside {
                return Err(format!(
                    "window violation: s_{p} = {} for (kappa, tau) = ({kappa}, {tau})",
                    root.s
                ));
            }
        }
        let p_limit = if kappa > tau * tau { 0u32 } else { 1u32 };
        let limit = if kappa > tau * tau {
            TAU * (p_limit + 1) as f64
        } else {
            TAU * p_limit as f64
        };
        let near_pole = branch_root(&params, 1e-5, p_limit)
            .map_err(|e| e.to_string())?
            .ok_or("missing near-pole root")?;
        if (near_pole.s - limit).abs() >= 1e-4 {
            return Err(format!(
                "endpoint limit: s_{p_limit}(1e-5) = {} vs {limit} for (kappa, tau) = ({kappa}, {tau})",
                near_pole.s
            ));
        }
    }
    Ok(format!(
        "{surfaces} surfaces, max quadric residual {worst_quadric:.2e}"
    ))
}

fn bi_invariance(_level: VerifyLevel) -> Result<String, String> {
    let mut unique = 0usize;
    for params in grid() {
        let tau = params.tau();
        let kappa = params.kappa();
        let extension = params
            .build_algebra()
            .bi_invariant_extension()
            .map_err(|e| e.to_string())?;
        if kappa > tau * tau {
            let r = extension.unique_r().ok_or_else(|| {
                format!("no unique extension for (kappa, tau) = ({kappa}, {tau})")
            })?;
            let expect = 1.0 / (kappa - tau * tau);
            if (r - expect).abs() >= 1e-12 {
                return Err(format!("r = {r} vs expected {expect}"));
            }
            unique += 1;
        } else if !matches!(extension, BiInvariantExtension::None { .. }) {
            return Err(format!(
                "unexpected extension {extension:?} for (kappa, tau) = ({kappa}, {tau})"
            ));
        }
    }
    Ok(format!("{unique} positive-r extensions recovered"))
}

fn equivariance(_level: VerifyLevel) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let tau: f64 = rng.gen_range(0.3..2.5);
        let kappa = loop {
            let kappa = rng.gen_range(-4.0..4.0);
            if kappa != tau * tau {
                break kappa;
            }
        };
        let params = M3Params::new(kappa, tau).map_err(|e| e.to_string())?;
        let theta = rng.gen_range(0.05..PI - 0.05);
        let phi = rng.gen_range(0.0..TAU);
        let t = rng.gen_range(0.0..8.0);
        let rotated = Direction::new(theta, phi).map_err(|e| e.to_string())?;
        let aligned = Direction::new(theta, 0.0).map_err(|e| e.to_string())?;
        let direct = OperatorCurve::for_m3(&params, &rotated).curve_at(t);
        let base = OperatorCurve::for_m3(&params, &aligned).curve_at(t);
        let rot = rotation_phi(phi);
        let base_mat = nalgebra::Matrix3::from_fn(|i, j| base.get(i, j));
        let conjugated = rot * base_mat * rot.transpose();
        let mut err = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                err = err.max((direct.get(i, j) - conjugated[(i, j)]).abs());
            }
        }
        worst = worst.max(err);
        if err >= 1e-10 {
            return Err(format!(
                "equivariance defect {err:e} at (kappa, tau, theta, phi, t) = ({kappa}, {tau}, {theta}, {phi}, {t})"
            ));
        }
    }
    Ok(format!("100 cases, max defect {worst:.2e}"))
}

fn scalar_invariants(_level: VerifyLevel) -> Result<String, String> {
    let mut worst = 0.0_f64;
    for params in grid() {
        let tau = params.tau();
        let kappa = params.kappa();
        let invariants = params.scalar_invariants();
        let algebra = params.build_algebra();
        let expect_ricci = [
            kappa - tau * tau / 2.0,
            kappa - tau * tau / 2.0,
            tau * tau / 2.0,
        ];
        for (i, expect) in expect_ricci.iter().enumerate() {
            let mut u = DVector::zeros(3);
            u[i] = 1.0;
            let trace = algebra
                .riemann_jacobi_operator(&u)
                .map_err(|e| e.to_string())?
                .trace();
            let err = (trace - expect)
                .abs()
                .max((invariants.ricci[i] - expect).abs());
            worst = worst.max(err);
            if err >= 1e-12 {
                return Err(format!(
                    "Ricci[{i}] error {err:e} for (kappa, tau) = ({kappa}, {tau})"
                ));
            }
        }
        // Fiber-plane sectional curvature tau^2/4 from the Jacobi operator
        // along e3.
        let fiber = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
        let op = algebra
            .riemann_jacobi_operator(&fiber)
            .map_err(|e| e.to_string())?;
        let expect = tau * tau / 4.0;
        for i in 0..2 {
            let err = (op.get(i, i) - expect)
                .abs()
                .max((invariants.xi_sectional - expect).abs());
            worst = worst.max(err);
            if err >= 1e-12 {
                return Err(format!(
                    "fiber sectional error {err:e} for (kappa, tau) = ({kappa}, {tau})"
                ));
            }
        }
        match invariants.fiber_length {
            Some(length) => {
                if kappa <= 0.0 {
                    return Err(format!("fiber length reported for kappa = {kappa}"));
                }
                let expect = 4.0 * PI * tau / kappa;
                if (length - expect).abs() >= 1e-12 {
                    return Err(format!("fiber length {length} vs {expect}"));
                }
            }
            None => {
                if kappa > 0.0 {
                    return Err(format!("missing fiber length for kappa = {kappa}"));
                }
            }
        }
    }
    Ok(format!("13 models, max invariant error {worst:.2e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_level_passes_everything() {
        let reports = run_all(VerifyLevel::Quick);
        assert_eq!(reports.len(), 13);
        for report in &reports {
            assert!(report.passed, "{}: {}", report.name, report.detail);
            assert!(!report.detail.is_empty());
        }
        assert!(all_passed(&reports));
    }
}
