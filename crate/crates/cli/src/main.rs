//! Command-line frontend: model invariants, osculating-rank analysis,
//! closed-form Jacobi fields, conjugate points and loci, and the built-in
//! verification suite, all reported as deterministic JSON on stdout.
//!
//! Exit codes: 0 success, 2 invalid input, 3 failed computation or I/O,
//! 4 verification failure.

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DVector, Vector3};

use m3jacobi::conjugate::{
    admissible_theta_runs, classify_geodesic, conjugate_points, conjugate_radius,
    global_conjugate_radius, sample_locus, write_fcurve_csv, LocusFamily,
};
use m3jacobi::jacobi::{isotropy_test, solve_closed_form};
use m3jacobi::m3::{Direction, M3Params};
use m3jacobi::opspace::DEFAULT_RANK_TOL;
use m3jacobi::osculating::OperatorCurve;
use m3jacobi::reductive::{BiInvariantExtension, ReductiveAlgebra};
use m3jacobi::report::{JsonObject, JsonValue};
use m3jacobi::verify::{run_all, VerifyLevel};
use m3jacobi::Error;

#[derive(Parser)]
#[command(
    name = "m3jacobi",
    version,
    about = "Jacobi fields and conjugate loci on the homogeneous 3-manifolds M3(kappa, tau)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shared `--kappa`/`--tau` pair.
#[derive(Args)]
struct ModelArgs {
    /// Base curvature parameter (any real except tau^2).
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
    /// Bundle curvature parameter (positive).
    #[arg(long)]
    tau: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<M3Params, Failure> {
        Ok(M3Params::new(self.kappa, self.tau)?)
    }
}

/// Model plus a geodesic direction.  Angles accept either plain radians or a
/// `pi` suffix (`0.5pi`, `pi`, `-0.25pi`).
#[derive(Args)]
struct DirectedArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Slope angle against the fiber direction, in [0, pi].
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    theta: f64,
    /// Rotation angle about the fiber direction.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "0")]
    phi: f64,
}

impl DirectedArgs {
    fn direction(&self) -> Result<Direction, Failure> {
        Ok(Direction::new(self.theta, self.phi)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Isotropic,
    Branch,
}

impl From<FamilyArg> for LocusFamily {
    fn from(arg: FamilyArg) -> Self {
        match arg {
            FamilyArg::Isotropic => LocusFamily::Isotropic,
            FamilyArg::Branch => LocusFamily::Branch,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Obj,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar invariants of the model M3(kappa, tau).
    Info(ModelArgs),
    /// Osculating rank of the Jacobi-operator curve, with circle parameters
    /// when the rank is 2.
    Rank(DirectedArgs),
    /// Conjugate points along the geodesic, up to arc length --t-max.
    Conjugate {
        #[command(flatten)]
        direction: DirectedArgs,
        /// Upper end of the scanned arc-length interval.
        #[arg(long)]
        t_max: f64,
    },
    /// Conjugate radius at --theta, or the global conjugate radius when
    /// --theta is omitted.
    Radius {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: Option<f64>,
    },
    /// Closed-form Jacobi field with X(0) = 0, sampled at the given times.
    Jacobi {
        #[command(flatten)]
        direction: DirectedArgs,
        /// Initial derivative X'(0) as "a,b,c".
        #[arg(long)]
        xprime0: String,
        /// Comma-separated sample times.
        #[arg(long)]
        times: String,
    },
    /// Sample surfaces of the tangent conjugate locus and write them to disk.
    ///
    /// One file per surface index and per contiguous admissible band of
    /// slope angles.  With several indices the file name gains a -p<index>
    /// suffix; with two bands it gains a -north / -south suffix.
    Locus {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// First surface index within the family.
        #[arg(long, default_value_t = 1)]
        p_min: u32,
        /// Last surface index; defaults to --p-min.
        #[arg(long)]
        p_max: Option<u32>,
        /// Number of slope-angle samples of [0, pi] before admissibility
        /// filtering.
        #[arg(long, default_value_t = 65)]
        theta_samples: usize,
        /// Number of rotation-angle samples of [0, 2 pi).
        #[arg(long, default_value_t = 48)]
        phi_samples: usize,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Obj)]
        format: FormatArg,
    },
    /// Tabulate the conjugate-distance function f for one slope angle as CSV.
    Fcurve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: f64,
        /// Upper end of the tabulated s-interval.
        #[arg(long)]
        s_max: f64,
        /// Number of rows (uniform grid including both endpoints).
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the Jacobi identity, natural reductivity and osculating ranks
    /// for an algebra described by a JSON file.
    Check {
        /// Path to the JSON description.
        path: PathBuf,
        /// Direction in the tangent space as comma-separated coordinates;
        /// repeatable.  Defaults to the metric-normalized basis vectors.
        #[arg(long = "u")]
        directions: Vec<String>,
    },
    /// Run the built-in verification suite and report each criterion.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Full)]
        level: LevelArg,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Singular
            | Error::Diverged { .. }
            | Error::RankNotTwo { .. }
            | Error::NotACircle { .. }
            | Error::Io(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure {
            code: 3,
            message: err.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Parses an angle, accepting a `pi` suffix: `0.5pi`, `pi`, `-pi`, `1.5`.
fn parse_angle(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    let value = if let Some(prefix) = trimmed.strip_suffix("pi") {
        let factor = match prefix.trim() {
            "" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("invalid angle '{text}'"))?,
        };
        factor * PI
    } else {
        trimmed
            .parse::<f64>()
            .map_err(|_| format!("invalid angle '{text}'"))?
    };
    Ok(value)
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect();
    values.map_err(|_| {
        invalid(format!(
            "invalid {what} '{text}': expected comma-separated numbers"
        ))
    })
}

fn number_array(values: impl IntoIterator<Item = f64>) -> JsonValue {
    JsonValue::array(values.into_iter().map(JsonValue::number))
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli.command) {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Info(model) => cmd_info(&model),
        Command::Rank(direction) => cmd_rank(&direction),
        Command::Conjugate { direction, t_max } => cmd_conjugate(&direction, t_max),
        Command::Radius { model, theta } => cmd_radius(&model, theta),
        Command::Jacobi {
            direction,
            xprime0,
            times,
        } => cmd_jacobi(&direction, &xprime0, &times),
        Command::Locus {
            model,
            family,
            p_min,
            p_max,
            theta_samples,
            phi_samples,
            out,
            format,
        } => cmd_locus(
            &model,
            family,
            p_min,
            p_max,
            theta_samples,
            phi_samples,
            &out,
            format,
        ),
        Command::Fcurve {
            model,
            theta,
            s_max,
            samples,
            out,
        } => cmd_fcurve(&model, theta, s_max, samples, &out),
        Command::Check { path, directions } => cmd_check(&path, &directions),
        Command::Verify { level } => cmd_verify(level),
    }
}

fn cmd_info(model: &ModelArgs) -> Result<(), Failure> {
    let params = model.params()?;
    let invariants = params.scalar_invariants();
    let extension = params.build_algebra().bi_invariant_extension()?;
    let mut obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()))
        .field(
            "space_type",
            JsonValue::string(&invariants.space_type.to_string()),
        )
        .field("ricci", number_array(invariants.ricci))
        .field("xi_sectional", JsonValue::number(invariants.xi_sectional))
        .field(
            "global_conjugate_radius",
            JsonValue::number(global_conjugate_radius(&params)),
        );
    if let Some(length) = invariants.fiber_length {
        obj = obj.field("fiber_length", JsonValue::number(length));
    }
    let status = match &extension {
        BiInvariantExtension::Unique(_) => "unique",
        BiInvariantExtension::Any(_) => "any",
        BiInvariantExtension::None { .. } => "none",
    };
    obj = obj.field("biinvariant", JsonValue::string(status));
    if let Some(r) = extension.unique_r() {
        obj = obj.field("biinvariant_r", JsonValue::number(r));
    }
    println!("{}", obj.render());
    Ok(())
}

fn cmd_rank(direction: &DirectedArgs) -> Result<(), Failure> {
    let params = direction.model.params()?;
    let dir = direction.direction()?;
    let curve = OperatorCurve::for_m3(&params, &dir);
    let rank = curve.osculating_rank(DEFAULT_RANK_TOL)?;
    let mut obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()))
        .field("theta", JsonValue::number(dir.theta()))
        .field("phi", JsonValue::number(dir.phi()))
        .field("rank", JsonValue::integer(rank as i64));
    if rank == 2 {
        let fit = curve.fit_circle(64)?;
        obj = obj.field(
            "circle",
            JsonValue::object(
                JsonObject::new()
                    .field("radius", JsonValue::number(fit.radius))
                    .field("period", JsonValue::number(fit.period))
                    .field("relative_spread", JsonValue::number(fit.relative_spread)),
            ),
        );
    }
    println!("{}", obj.render());
    Ok(())
}

fn cmd_conjugate(direction: &DirectedArgs, t_max: f64) -> Result<(), Failure> {
    let params = direction.model.params()?;
    let dir = direction.direction()?;
    let class = classify_geodesic(&params, dir.theta())?;
    let points = conjugate_points(&params, &dir, t_max)?;
    let items: Vec<JsonValue> = points
        .iter()
        .map(|point| {
            JsonValue::object(
                JsonObject::new()
                    .field("t", JsonValue::number(point.t))
                    .field("s", JsonValue::number(point.s))
                    .field("kind", JsonValue::string(point.kind.name()))
                    .field("index", JsonValue::integer(i64::from(point.kind.index())))
                    .field(
                        "multiplicity",
                        JsonValue::integer(point.multiplicity as i64),
                    ),
            )
        })
        .collect();
    let obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()))
        .field("theta", JsonValue::number(dir.theta()))
        .field("phi", JsonValue::number(dir.phi()))
        .field("t_max", JsonValue::number(t_max))
        .field("class", JsonValue::string(class.name()))
        .field("count", JsonValue::integer(points.len() as i64))
        .field("points", JsonValue::array(items));
    println!("{}", obj.render());
    Ok(())
}

fn cmd_radius(model: &ModelArgs, theta: Option<f64>) -> Result<(), Failure> {
    let params = model.params()?;
    let mut obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()));
    match theta {
        Some(theta) => {
            let class = classify_geodesic(&params, theta)?;
            obj = obj
                .field("theta", JsonValue::number(theta))
                .field("class", JsonValue::string(class.name()))
                .field(
                    "radius",
                    JsonValue::number(conjugate_radius(&params, theta)?),
                );
        }
        None => {
            obj = obj.field(
                "radius",
                JsonValue::number(global_conjugate_radius(&params)),
            );
        }
    }
    println!("{}", obj.render());
    Ok(())
}

fn cmd_jacobi(direction: &DirectedArgs, xprime0: &str, times: &str) -> Result<(), Failure> {
    let params = direction.model.params()?;
    let dir = direction.direction()?;
    let w = parse_floats(xprime0, "--xprime0")?;
    if w.len() != 3 {
        return Err(invalid(format!(
            "--xprime0 must have exactly 3 components, got {}",
            w.len()
        )));
    }
    let w = Vector3::new(w[0], w[1], w[2]);
    let sample_times = parse_floats(times, "--times")?;
    if sample_times.is_empty() {
        return Err(invalid("--times must list at least one sample time"));
    }
    let solution = solve_closed_form(&params, &dir, w)?;
    let verdict = isotropy_test(&params, &dir, w);
    let samples: Vec<JsonValue> = sample_times
        .iter()
        .map(|&t| {
            let x = solution.evaluate(t);
            let dx = solution.derivative(t);
            JsonValue::object(
                JsonObject::new()
                    .field("t", JsonValue::number(t))
                    .field("x", number_array([x.x, x.y, x.z]))
                    .field("dx", number_array([dx.x, dx.y, dx.z])),
            )
        })
        .collect();
    let mut obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()))
        .field("theta", JsonValue::number(dir.theta()))
        .field("phi", JsonValue::number(dir.phi()))
        .field("xprime0", number_array([w.x, w.y, w.z]))
        .field("branch", JsonValue::string(solution.branch().name()))
        .field("lambda", JsonValue::number(solution.lambda()))
        .field("isotropic", JsonValue::boolean(verdict.is_isotropic));
    if let Some(coefficient) = verdict.killing_coefficient {
        obj = obj.field("killing_coefficient", JsonValue::number(coefficient));
    }
    obj = obj.field("samples", JsonValue::array(samples));
    println!("{}", obj.render());
    Ok(())
}

/// File name for one surface: the requested path, with an optional suffix
/// (`p2`, `north`, `p2-north`, ...) inserted before the extension.
fn surface_file_name(out: &Path, suffix: Option<&str>) -> PathBuf {
    let Some(suffix) = suffix else {
        return out.to_path_buf();
    };
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("locus");
    let name = match out.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-{suffix}.{ext}"),
        None => format!("{stem}-{suffix}"),
    };
    out.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
fn cmd_locus(
    model: &ModelArgs,
    family: FamilyArg,
    p_min: u32,
    p_max: Option<u32>,
    theta_samples: usize,
    phi_samples: usize,
    out: &Path,
    format: FormatArg,
) -> Result<(), Failure> {
    let params = model.params()?;
    let p_max = p_max.unwrap_or(p_min);
    if p_max < p_min {
        return Err(invalid(format!(
            "--p-max ({p_max}) must be at least --p-min ({p_min})"
        )));
    }
    if theta_samples < 2 {
        return Err(invalid("--theta-samples must be at least 2"));
    }
    if phi_samples < 3 {
        return Err(invalid("--phi-samples must be at least 3"));
    }
    let runs = admissible_theta_runs(&params, theta_samples);
    if runs.is_empty() {
        return Err(invalid("no admissible slope angles for these parameters"));
    }
    let phi_grid: Vec<f64> = (0..phi_samples)
        .map(|j| TAU * j as f64 / phi_samples as f64)
        .collect();
    let mut surfaces = Vec::new();
    for p in p_min..=p_max {
        for (index, run) in runs.iter().enumerate() {
            let surface = sample_locus(&params, family.into(), p, run, &phi_grid)?;
            let mut parts: Vec<String> = Vec::new();
            if p_max > p_min {
                parts.push(format!("p{p}"));
            }
            if runs.len() > 1 {
                parts.push(String::from(if index == 0 { "north" } else { "south" }));
            }
            let suffix = if parts.is_empty() {
                None
            } else {
                Some(parts.join("-"))
            };
            let path = surface_file_name(out, suffix.as_deref());
            let writer = BufWriter::new(File::create(&path)?);
            match format {
                FormatArg::Obj => surface.write_obj(writer)?,
                FormatArg::Csv => surface.write_csv(writer)?,
                FormatArg::Json => surface.write_json(writer)?,
            }
            surfaces.push(JsonValue::object(
                JsonObject::new()
                    .field("file", JsonValue::string(&path.display().to_string()))
                    .field("p", JsonValue::integer(i64::from(p)))
                    .field("rows", JsonValue::integer(surface.rows() as i64))
                    .field("cols", JsonValue::integer(surface.cols() as i64))
                    .field(
                        "theta_min",
                        JsonValue::number(*run.first().expect("runs are non-empty")),
                    )
                    .field(
                        "theta_max",
                        JsonValue::number(*run.last().expect("runs are non-empty")),
                    )
                    .field(
                        "max_quadric_residual",
                        JsonValue::number(surface.max_quadric_residual()),
                    ),
            ));
        }
    }
    let family_name: LocusFamily = family.into();
    let obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()))
        .field("family", JsonValue::string(family_name.name()))
        .field("p_min", JsonValue::integer(i64::from(p_min)))
        .field("p_max", JsonValue::integer(i64::from(p_max)))
        .field("surfaces", JsonValue::array(surfaces));
    println!("{}", obj.render());
    Ok(())
}

fn cmd_fcurve(
    model: &ModelArgs,
    theta: f64,
    s_max: f64,
    samples: usize,
    out: &Path,
) -> Result<(), Failure> {
    let params = model.params()?;
    let writer = BufWriter::new(File::create(out)?);
    write_fcurve_csv(&params, theta, s_max, samples, writer)?;
    let obj = JsonObject::new()
        .field("kappa", JsonValue::number(params.kappa()))
        .field("tau", JsonValue::number(params.tau()))
        .field("theta", JsonValue::number(theta))
        .field("s_max", JsonValue::number(s_max))
        .field("samples", JsonValue::integer(samples as i64))
        .field("file", JsonValue::string(&out.display().to_string()));
    println!("{}", obj.render());
    Ok(())
}

fn cmd_check(path: &Path, directions: &[String]) -> Result<(), Failure> {
    let algebra = ReductiveAlgebra::from_json_file(path)?;
    let report = algebra.check_naturally_reductive();
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if directions.is_empty() {
        for i in 0..algebra.dim_m() {
            let mut u = DVector::zeros(algebra.dim_m());
            u[i] = 1.0;
            candidates.push(u);
        }
    } else {
        for text in directions {
            let values = parse_floats(text, "--u")?;
            if values.len() != algebra.dim_m() {
                return Err(invalid(format!(
                    "--u must have {} components, got {}",
                    algebra.dim_m(),
                    values.len()
                )));
            }
            candidates.push(DVector::from_column_slice(&values));
        }
    }
    let mut direction_reports = Vec::new();
    for u in &candidates {
        let norm_sq = algebra.m_inner(u, u);
        if norm_sq <= 0.0 {
            return Err(invalid("direction must have positive length"));
        }
        let unit = u / norm_sq.sqrt();
        let curve = OperatorCurve::new(
            algebra.riemann_jacobi_operator(&unit)?,
            algebra.s_operator(&unit)?,
        )?;
        let rank = curve.osculating_rank(DEFAULT_RANK_TOL)?;
        direction_reports.push(JsonValue::object(
            JsonObject::new()
                .field("u", number_array(unit.iter().copied()))
                .field("rank", JsonValue::integer(rank as i64)),
        ));
    }
    let mut obj = JsonObject::new()
        .field("dim_m", JsonValue::integer(algebra.dim_m() as i64))
        .field("dim_k", JsonValue::integer(algebra.dim_k() as i64))
        .field(
            "jacobi_residual",
            JsonValue::number(algebra.jacobi_identity_residual()),
        )
        .field(
            "naturally_reductive",
            JsonValue::boolean(report.is_naturally_reductive),
        )
        .field("max_violation", JsonValue::number(report.max_violation))
        .field("directions", JsonValue::array(direction_reports));
    if algebra.dim_k() == 1 {
        let extension = algebra.bi_invariant_extension()?;
        let status = match &extension {
            BiInvariantExtension::Unique(_) => "unique",
            BiInvariantExtension::Any(_) => "any",
            BiInvariantExtension::None { .. } => "none",
        };
        obj = obj.field("biinvariant", JsonValue::string(status));
        if let Some(r) = extension.unique_r() {
            obj = obj.field("biinvariant_r", JsonValue::number(r));
        }
    }
    println!("{}", obj.render());
    Ok(())
}

fn cmd_verify(level: LevelArg) -> Result<(), Failure> {
    let verify_level = match level {
        LevelArg::Quick => VerifyLevel::Quick,
        LevelArg::Full => VerifyLevel::Full,
    };
    let reports = run_all(verify_level);
    let failed = reports.iter().filter(|r| !r.passed).count();
    let criteria: Vec<JsonValue> = reports
        .iter()
        .map(|report| {
            JsonValue::object(
                JsonObject::new()
                    .field("name", JsonValue::string(report.name))
                    .field("passed", JsonValue::boolean(report.passed))
                    .field("detail", JsonValue::string(&report.detail)),
            )
        })
        .collect();
    let obj = JsonObject::new()
        .field(
            "level",
            JsonValue::string(match level {
                LevelArg::Quick => "quick",
                LevelArg::Full => "full",
            }),
        )
        .field("passed", JsonValue::boolean(failed == 0))
        .field("criteria", JsonValue::array(criteria));
    println!("{}", obj.render());
    if failed > 0 {
        return Err(Failure {
            code: 4,
            message: format!("verification failed: {failed} criteria did not pass"),
        });
    }
    Ok(())
}
