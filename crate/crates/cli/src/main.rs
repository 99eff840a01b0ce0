use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use critlab::atoms::{format_atoms, read_atoms, AtomFile};
use critlab::ensembles::{generate, EnsembleSpec, Family, Law, Seed};
use critlab::geometry::ConvexHull;
use critlab::harness::{self, ExperimentSpec, ProbeKind};
use critlab::measures::{
    angular_discrepancy, field_sup_distance, potential_field, w1_exact, w1_sliced, Grid,
};
use critlab::rootfind::{aberth_roots, critical_points, DEFAULT_MAX_ITER, DEFAULT_TOL};
use critlab::{Complex, EmpiricalMeasure, Error, Polynomial, RootSet};

/// Zeros and critical points of random polynomials.
///
/// Exit status: 0 on success, 1 on invalid input or configuration, 2 on a
/// numeric failure (non-convergence, failed rows, failed checks).
#[derive(Parser, Debug)]
#[command(name = "critlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a TOML config and write its results.
    Run {
        /// Experiment config.
        config: PathBuf,
        /// Write results here instead of the config's `output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Draw one ensemble and write its atoms.
    Gen {
        /// A built-in name (see --help) or a TOML file holding an ensemble table.
        ///
        /// Built-in names: roots-of-unity, dyadic, removed-root, example1
        /// (needs --radii), lemniscate (needs --poly-roots), pairwise,
        /// triangular, iid-disk, iid-circle, iid-gaussian, cauchy.
        ensemble: String,
        /// Size parameter of the ensemble.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output atom file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Circle radii for example1, comma separated and increasing.
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        /// Zeros of P for lemniscate, as `re:im` pairs separated by commas.
        #[arg(long, value_delimiter = ',')]
        poly_roots: Vec<String>,
    },
    /// Find zeros of a polynomial, or critical points of a zero set.
    ///
    /// With --critical the file holds zeros and the critical points are
    /// written after a Gauss–Lucas hull check. Without it the file holds
    /// coefficients, constant term first, and the zeros are written.
    Roots {
        atomfile: PathBuf,
        #[arg(long)]
        critical: bool,
        /// Output atom file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stopping tolerance of the root finder.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Distance between the empirical measures of two atom files.
    Dist {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value_t = DistMetric::W1Exact)]
        metric: DistMetric,
        /// Projections for w1_sliced.
        #[arg(long, default_value_t = 64)]
        projections: usize,
        /// Seed for w1_sliced projections.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a single probe with the ensemble, ladder and options of a config.
    Probe {
        #[arg(value_enum)]
        kind: ProbeArg,
        config: PathBuf,
        /// Write the probe CSV here instead of the config's `output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Redraw the SVG charts of a finished run.
    Plot { resultdir: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum DistMetric {
    /// Exact Wasserstein-1 (min-cost flow).
    W1Exact,
    /// Sliced Wasserstein-1 (random projections).
    W1Sliced,
    /// Absolute difference of the angular discrepancies.
    AngularDiscrepancy,
    /// Sup distance of log potentials on a grid over [-2, 2]².
    PotentialField,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ProbeArg {
    A1a2,
    A3,
    PoissonJensen,
    RealFraction,
    Mixture,
}

impl From<ProbeArg> for ProbeKind {
    fn from(p: ProbeArg) -> Self {
        match p {
            ProbeArg::A1a2 => ProbeKind::A1a2,
            ProbeArg::A3 => ProbeKind::A3,
            ProbeArg::PoissonJensen => ProbeKind::PoissonJensen,
            ProbeArg::RealFraction => ProbeKind::RealFraction,
            ProbeArg::Mixture => ProbeKind::Mixture,
        }
    }
}

enum Failure {
    /// Bad input: exit code 1.
    Invalid(String),
    /// Numeric failure: exit code 2.
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::Gen {
            ensemble,
            n,
            seed,
            out,
            radii,
            poly_roots,
        } => gen(&ensemble, n, seed, out.as_deref(), radii, &poly_roots),
        Command::Roots {
            atomfile,
            critical,
            out,
            tol,
        } => roots(&atomfile, critical, out.as_deref(), tol),
        Command::Dist {
            file_a,
            file_b,
            metric,
            projections,
            seed,
        } => dist(&file_a, &file_b, metric, projections, seed),
        Command::Probe {
            kind,
            config,
            output_dir,
        } => probe(kind.into(), &config, output_dir),
        Command::Plot { resultdir } => plot(&resultdir),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("critlab: {f}");
            match f {
                Failure::Invalid(_) => ExitCode::from(1),
                Failure::Numeric(_) => ExitCode::from(2),
            }
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(Error::from)?,
    }
    Ok(())
}

fn run(config: &Path, output_dir: Option<PathBuf>) -> CliResult {
    let mut spec = ExperimentSpec::load(config)?;
    if let Some(dir) = output_dir {
        spec.output_dir = dir;
    }
    let result = harness::run(&spec)?;
    let files = harness::write_outputs(&result, &spec.output_dir)?;
    for s in result.summary.iter().filter(|s| s.column.ends_with("crit_ref")) {
        println!("n={:<6} {:<28} median={:.6e}", s.n, s.column, s.median);
    }
    for p in &result.probes {
        match &p.result {
            Some(r) => println!("probe {} {}: {:?}", p.kind.name(), p.label, r.estimates),
            None => println!("probe {} {}: failed: {}", p.kind.name(), p.label, p.message),
        }
    }
    println!("wrote {} files to {}", files.written.len(), spec.output_dir.display());
    if !result.all_ok() {
        return Err(Failure::Numeric(format!(
            "{} of {} rows and {} probes failed",
            result.failed_rows(),
            result.rows.len(),
            result.failed_probes()
        )));
    }
    Ok(())
}

fn parse_point(s: &str) -> Result<Complex, Failure> {
    let bad = || Failure::Invalid(format!("expected re:im, got {s:?}"));
    let (re, im) = s.split_once(':').ok_or_else(bad)?;
    Ok(Complex::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

fn named_ensemble(name: &str, radii: Vec<f64>, poly_roots: &[String]) -> Result<EnsembleSpec, Failure> {
    let det = |family| EnsembleSpec::Deterministic {
        family,
        radii: vec![],
        poly_roots: vec![],
    };
    Ok(match name {
        "roots-of-unity" => det(Family::RootsOfUnity),
        "dyadic" => det(Family::Dyadic),
        "removed-root" => det(Family::RemovedRoot),
        "example1" => EnsembleSpec::Deterministic {
            family: Family::Example1,
            radii,
            poly_roots: vec![],
        },
        "lemniscate" => EnsembleSpec::Deterministic {
            family: Family::Lemniscate,
            radii: vec![],
            poly_roots: poly_roots.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?,
        },
        "pairwise" => EnsembleSpec::pairwise_circle(),
        "triangular" => EnsembleSpec::TriangularPairwise { offset: 1.0 },
        "iid-disk" => EnsembleSpec::Iid { law: Law::UniformDisk },
        "iid-circle" => EnsembleSpec::Iid { law: Law::UniformCircle },
        "iid-gaussian" => EnsembleSpec::Iid { law: Law::ComplexGaussian },
        "cauchy" => EnsembleSpec::CauchyPairs,
        other => {
            return Err(Failure::Invalid(format!(
                "unknown ensemble {other:?}; see `critlab gen --help`"
            )))
        }
    })
}

fn ensemble_from_file(path: &Path) -> Result<EnsembleSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    EnsembleSpec::from_toml_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn gen(
    name: &str,
    n: usize,
    seed: u64,
    out: Option<&Path>,
    radii: Vec<f64>,
    poly_roots: &[String],
) -> CliResult {
    let spec = if name.ends_with(".toml") {
        ensemble_from_file(Path::new(name))?
    } else {
        named_ensemble(name, radii, poly_roots)?
    };
    let g = generate(&spec, n, Seed(seed))?;
    if g.zeros().is_none() {
        log::warn!("writing the poles of a rational sum; weights are not written");
    }
    emit(out, &format_atoms(g.atoms(), None))
}

fn roots(path: &Path, critical: bool, out: Option<&Path>, tol: f64) -> CliResult {
    let file = read_atoms(path)?;
    if file.weights.is_some() {
        return Err(Failure::Invalid("roots expects an unweighted file".into()));
    }
    if !critical {
        let p = Polynomial::new(file.atoms);
        let report = aberth_roots(&p, tol, DEFAULT_MAX_ITER)?;
        return emit(out, &format_atoms(&report.roots, None));
    }
    let zeros = RootSet::new(file.atoms);
    let report = critical_points(&zeros, tol)?;
    let hull = ConvexHull::new(&zeros);
    let slack = 1e-8 * (1.0 + zeros.max_modulus());
    if let Some(c) = report.roots.iter().find(|&&c| hull.distance(c) > slack) {
        return Err(Failure::Numeric(format!(
            "critical point {c} lies {:e} outside the convex hull of the zeros",
            hull.distance(*c)
        )));
    }
    emit(out, &format_atoms(&report.roots, None))
}

fn measure(file: AtomFile) -> Result<EmpiricalMeasure, Error> {
    match file.weights {
        Some(w) => EmpiricalMeasure::weighted(file.atoms, w),
        None => EmpiricalMeasure::uniform(file.atoms),
    }
}

fn dist(a: &Path, b: &Path, metric: DistMetric, projections: usize, seed: u64) -> CliResult {
    let mu = measure(read_atoms(a)?)?;
    let nu = measure(read_atoms(b)?)?;
    let d = match metric {
        DistMetric::W1Exact => w1_exact(&mu, &nu)?,
        DistMetric::W1Sliced => w1_sliced(&mu, &nu, projections, Seed(seed))?,
        DistMetric::AngularDiscrepancy => {
            (angular_discrepancy(&mu)? - angular_discrepancy(&nu)?).abs()
        }
        DistMetric::PotentialField => {
            let grid = Grid::square(2.0, 65);
            let mut all = mu.atoms().to_vec();
            all.extend(nu.atoms());
            let mask = grid.default_mask(&all);
            field_sup_distance(&potential_field(&mu, grid), &potential_field(&nu, grid), &mask)?
        }
    };
    println!("{d:e}");
    Ok(())
}

fn probe(kind: ProbeKind, config: &Path, output_dir: Option<PathBuf>) -> CliResult {
    let mut spec = ExperimentSpec::load(config)?;
    spec.metrics.clear();
    spec.probes = vec![kind];
    spec.plot = false;
    if let Some(dir) = output_dir {
        spec.output_dir = dir;
    }
    let result = harness::run(&spec)?;
    harness::write_outputs(&result, &spec.output_dir)?;
    let mut failed = None;
    for p in &result.probes {
        match &p.result {
            Some(r) => {
                println!("# {} {}", p.kind.name(), p.label);
                print!("{}", r.to_csv());
            }
            None => failed = Some(p.message.clone()),
        }
    }
    match failed {
        Some(m) => Err(Failure::Numeric(m)),
        None => Ok(()),
    }
}

fn plot(dir: &Path) -> CliResult {
    let result = harness::read_result(dir)?;
    for path in harness::write_plots(&result, dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
