//! Experiment specs, seeded parallel runs, and result files.
//!
//! One TOML document fully determines an experiment. [`run`] draws every
//! `(n, trial)` cell on a bounded rayon pool, computes zeros and critical
//! points, evaluates the requested metrics against a reference measure, runs
//! the requested probes, and returns an [`ExperimentResult`] that
//! [`write_outputs`] persists as CSV, JSON and (optionally) SVG.

mod output;
mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{
    a1a2_probe, a3_integral, log_abs_rational, mixture_limit_probe, poisson_jensen_residual,
    random_probe_point, real_critical_fraction, ProbeResult, QuadratureSpec,
};
use crate::ensembles::{generate, BaseSequence, EnsembleSpec, Generated, SequenceKind, Seed};
use crate::measures::{
    angular_discrepancy, field_sup_distance, potential_field, w1_exact, w1_sliced,
    EmpiricalMeasure, Grid,
};
use crate::rootfind::{critical_points, rational_zeros, DEFAULT_TOL};
use crate::{Complex, Error, Result, RootSet};

pub use output::{read_result, write_outputs, write_plots, OutputFiles};
pub use svg::{loglog_chart, scatter_plot, Series};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "CRITLAB_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    W1Exact,
    W1Sliced,
    AngularDiscrepancy,
    PotentialField,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::W1Exact => "w1_exact",
            Metric::W1Sliced => "w1_sliced",
            Metric::AngularDiscrepancy => "angular_discrepancy",
            Metric::PotentialField => "potential_field",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    A1a2,
    A3,
    PoissonJensen,
    RealFraction,
    Mixture,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::A1a2 => "a1a2",
            ProbeKind::A3 => "a3",
            ProbeKind::PoissonJensen => "poisson_jensen",
            ProbeKind::RealFraction => "real_fraction",
            ProbeKind::Mixture => "mixture",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub half: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half: 2.0,
            count: 65,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixtureOptions {
    pub a: BaseSequence,
    pub b: BaseSequence,
    pub p: f64,
    /// Atoms per component in the reference mixture.
    pub reference: usize,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        let a = BaseSequence::new(SequenceKind::BitReversedCircle);
        MixtureOptions {
            b: a.clone().scaled(2.0),
            a,
            p: 0.5,
            reference: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeOptions {
    pub eps: f64,
    /// Fixed probe point; drawn uniformly from the disk of radius
    /// `probe_radius` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Complex>,
    pub probe_radius: f64,
    pub a3_radius: f64,
    pub quadrature: QuadratureSpec,
    pub pj_radius: f64,
    pub pj_points: usize,
    pub im_tol: f64,
    pub mixture: MixtureOptions,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            eps: 0.05,
            z: None,
            probe_radius: 0.9,
            a3_radius: 2.0,
            quadrature: QuadratureSpec::default(),
            pj_radius: 1.5,
            pj_points: 4096,
            im_tol: 1e-8,
            mixture: MixtureOptions::default(),
        }
    }
}

fn default_trials() -> usize {
    1
}

fn default_projections() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n_ladder: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub probes: Vec<ProbeKind>,
    pub master_seed: Seed,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub plot: bool,
    /// Reference prefix size; defaults to `4 · max(n_ladder)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_size: Option<usize>,
    #[serde(default = "default_projections")]
    pub sliced_projections: usize,
    #[serde(default)]
    pub potential_grid: GridSpec,
    #[serde(default)]
    pub probe: ProbeOptions,
    pub ensemble: EnsembleSpec,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a spec; a relative `output_dir` is resolved against the current
    /// directory, not the config location.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_ladder.is_empty() {
            return bad("n_ladder must not be empty");
        }
        if self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_ladder must be strictly increasing");
        }
        if self.n_ladder[0] < 2 {
            return bad("n_ladder entries must be at least 2");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.sliced_projections == 0 {
            return bad("sliced_projections must be at least 1");
        }
        if self.potential_grid.count < 2 || !(self.potential_grid.half > 0.0) {
            return bad("potential_grid needs half > 0 and count ≥ 2");
        }
        if self.reference_size == Some(0) {
            return bad("reference_size must be positive");
        }
        self.ensemble.validate()
    }

    pub fn reference_size(&self) -> usize {
        self.reference_size
            .unwrap_or(4 * self.n_ladder.last().copied().unwrap_or(1))
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> Result<String> {
        let text = self.to_toml_string()?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Row status; failed rows keep their place with an error message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub trial: usize,
    pub seed: Seed,
    pub ok: bool,
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub message: String,
}

/// Quantiles of one value column at one `n`, over the successful rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub column: String,
    pub count: usize,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_sha256: String,
    pub master_seed: Seed,
    pub tool_version: String,
    pub reference_size: usize,
    /// Size of the discretization bias of the reference, `1/reference_size`.
    pub reference_bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub kind: ProbeKind,
    /// Probe name suffix, e.g. `above` and `below` for A1/A2.
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ProbeResult>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub message: String,
    /// Probe point, when the probe uses one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub spec: ExperimentSpec,
    pub rows: Vec<Row>,
    pub summary: Vec<Summary>,
    pub probes: Vec<ProbeOutcome>,
    /// Atoms of the first trial at the largest `n`, for the scatter plot.
    #[serde(skip)]
    pub sample: Option<(RootSet, RootSet)>,
}

impl ExperimentResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok).count()
    }

    pub fn failed_probes(&self) -> usize {
        self.probes.iter().filter(|p| p.result.is_none()).count()
    }

    pub fn all_ok(&self) -> bool {
        self.failed_rows() == 0 && self.failed_probes() == 0
    }

    /// Sorted column names over all rows.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self
            .rows
            .iter()
            .flat_map(|r| r.values.keys().cloned())
            .collect();
        cols.sort();
        cols.dedup();
        cols
    }

    pub fn summary_for(&self, column: &str) -> Vec<&Summary> {
        self.summary.iter().filter(|s| s.column == column).collect()
    }
}

/// Builds a pool with `CRITLAB_WORKERS` threads, or rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV}={v:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

/// Seed stream reserved for the probe point.
const PROBE_POINT_STREAM: u64 = u64::MAX - 7;

struct Cell {
    atoms: RootSet,
    crit: RootSet,
}

fn draw_cell(spec: &EnsembleSpec, n: usize, seed: Seed) -> Result<Cell> {
    let g = generate(spec, n, seed)?;
    let crit = match &g {
        Generated::Zeros(z) => critical_points(z, DEFAULT_TOL)?.roots,
        Generated::Rational(l) => rational_zeros(l, DEFAULT_TOL)?.roots,
    };
    Ok(Cell {
        atoms: RootSet::new(g.atoms().to_vec()),
        crit,
    })
}

fn evaluate_metrics(
    spec: &ExperimentSpec,
    cell: &Cell,
    reference: &EmpiricalMeasure,
    seed: Seed,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let zeros = EmpiricalMeasure::from_rootset(&cell.atoms)?;
    let crit = EmpiricalMeasure::from_rootset(&cell.crit)?;
    let pairs = [
        ("crit_ref", &crit, reference),
        ("zeros_ref", &zeros, reference),
        ("crit_zeros", &crit, &zeros),
    ];
    for &metric in &spec.metrics {
        match metric {
            Metric::W1Exact => {
                for (label, a, b) in pairs {
                    out.insert(format!("w1_exact_{label}"), w1_exact(a, b)?);
                }
            }
            Metric::W1Sliced => {
                for (label, a, b) in pairs {
                    let v = w1_sliced(a, b, spec.sliced_projections, seed)?;
                    out.insert(format!("w1_sliced_{label}"), v);
                }
            }
            Metric::AngularDiscrepancy => {
                out.insert("angular_discrepancy_crit".into(), angular_discrepancy(&crit)?);
                out.insert("angular_discrepancy_zeros".into(), angular_discrepancy(&zeros)?);
            }
            Metric::PotentialField => {
                let g = &spec.potential_grid;
                let grid = Grid::square(g.half, g.count);
                let mut all: Vec<Complex> = cell.atoms.to_vec();
                all.extend(cell.crit.iter());
                all.extend(reference.atoms());
                let mask = grid.default_mask(&all);
                let fields = [
                    potential_field(&crit, grid),
                    potential_field(&zeros, grid),
                    potential_field(reference, grid),
                ];
                for (label, i, j) in [("crit_ref", 0, 2), ("zeros_ref", 1, 2), ("crit_zeros", 0, 1)] {
                    let v = field_sup_distance(&fields[i], &fields[j], &mask)?;
                    out.insert(format!("potential_field_{label}"), v);
                }
            }
        }
    }
    Ok(out)
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(n_ladder: &[usize], rows: &[Row]) -> Vec<Summary> {
    let mut columns: Vec<&String> = rows.iter().flat_map(|r| r.values.keys()).collect();
    columns.sort();
    columns.dedup();
    let mut out = Vec::new();
    for &n in n_ladder {
        for col in &columns {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n && r.ok)
                .filter_map(|r| r.values.get(*col).copied())
                .filter(|x| x.is_finite())
                .collect();
            v.sort_by(f64::total_cmp);
            out.push(Summary {
                n,
                column: (*col).clone(),
                count: v.len(),
                q10: quantile(&v, 0.1),
                median: quantile(&v, 0.5),
                q90: quantile(&v, 0.9),
            });
        }
    }
    out
}

fn mean_result(n_values: &[usize], per_n: Vec<Vec<f64>>, trials: usize, seed: Seed) -> ProbeResult {
    let (mut estimates, mut stderr) = (Vec::new(), Vec::new());
    for v in per_n {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len().max(2) - 1) as f64;
        estimates.push(m);
        stderr.push((var / v.len() as f64).sqrt());
    }
    ProbeResult {
        n_values: n_values.to_vec(),
        estimates,
        stderr,
        trials,
        seed,
    }
}

/// `f(n, trial_seed)` over the ladder and trials, in parallel.
fn per_cell<F>(spec: &ExperimentSpec, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, Seed) -> Result<f64> + Sync,
{
    spec.n_ladder
        .iter()
        .map(|&n| {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| f(n, spec.master_seed.derive(t as u64)))
                .collect()
        })
        .collect()
}

fn run_probe(spec: &ExperimentSpec, kind: ProbeKind, z: Complex) -> Vec<ProbeOutcome> {
    let o = &spec.probe;
    let seed = spec.master_seed;
    let outcome = |label: &str, r: Result<ProbeResult>, z: Option<Complex>| match r {
        Ok(result) => ProbeOutcome {
            kind,
            label: label.into(),
            result: Some(result),
            message: String::new(),
            z,
        },
        Err(e) => {
            log::error!("probe {} failed: {e}", kind.name());
            ProbeOutcome {
                kind,
                label: label.into(),
                result: None,
                message: e.to_string(),
                z,
            }
        }
    };
    match kind {
        ProbeKind::A1a2 => {
            match a1a2_probe(&spec.ensemble, z, o.eps, &spec.n_ladder, spec.trials, seed) {
                Ok(p) => vec![
                    outcome("above", Ok(p.above), Some(p.z)),
                    outcome("below", Ok(p.below), Some(p.z)),
                ],
                Err(e) => vec![outcome("above", Err(e), Some(z))],
            }
        }
        ProbeKind::A3 => {
            let r = per_cell(spec, |n, s| {
                a3_integral(&spec.ensemble, o.a3_radius, n, &o.quadrature, s)
            })
            .map(|v| mean_result(&spec.n_ladder, v, spec.trials, seed));
            vec![outcome("mean", r, None)]
        }
        ProbeKind::PoissonJensen => {
            let zp = z * (0.5 * o.pj_radius / o.probe_radius.max(f64::MIN_POSITIVE));
            let r = per_cell(spec, |n, s| {
                let l = generate(&spec.ensemble, n, s)?.to_rational();
                poisson_jensen_residual(&l, o.pj_radius, zp, o.pj_points)
            })
            .map(|per_n| {
                // worst case over trials
                let max: Vec<f64> = per_n.iter().map(|v| v.iter().cloned().fold(0.0, f64::max)).collect();
                ProbeResult {
                    n_values: spec.n_ladder.clone(),
                    stderr: vec![0.0; max.len()],
                    estimates: max,
                    trials: spec.trials,
                    seed,
                }
            });
            vec![outcome("max_residual", r, Some(zp))]
        }
        ProbeKind::RealFraction => {
            let r = real_critical_fraction(&spec.n_ladder, spec.trials, seed, o.im_tol);
            vec![outcome("median", r, None)]
        }
        ProbeKind::Mixture => {
            let m = &o.mixture;
            let r = per_cell(spec, |n, s| mixture_limit_probe(&m.a, &m.b, m.p, n, m.reference, s))
                .map(|v| mean_result(&spec.n_ladder, v, spec.trials, seed));
            vec![outcome("mean", r, None)]
        }
    }
}

/// Runs every `(n, trial)` cell and every probe. Numeric failures are
/// recorded in their row or probe entry instead of aborting the run.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let pool = worker_pool()?;
    pool.install(|| run_in_pool(spec))
}

fn run_in_pool(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let ref_size = spec.reference_size();
    let reference = if spec.metrics.is_empty() {
        None
    } else {
        let atoms = spec.ensemble.reference(ref_size, spec.master_seed)?;
        Some(EmpiricalMeasure::from_rootset(&atoms)?)
    };

    let cells: Vec<(usize, usize)> = spec
        .n_ladder
        .iter()
        .flat_map(|&n| (0..spec.trials).map(move |t| (n, t)))
        .collect();
    let max_n = *spec.n_ladder.last().expect("validated");
    let results: Vec<(Row, Option<Cell>)> = cells
        .par_iter()
        .map(|&(n, trial)| {
            let seed = spec.master_seed.derive(trial as u64);
            let outcome = draw_cell(&spec.ensemble, n, seed).and_then(|cell| {
                let values = match &reference {
                    Some(r) => evaluate_metrics(spec, &cell, r, seed)?,
                    None => BTreeMap::new(),
                };
                Ok((cell, values))
            });
            match outcome {
                Ok((cell, values)) => {
                    let keep = (n == max_n && trial == 0).then_some(cell);
                    let row = Row {
                        n,
                        trial,
                        seed,
                        ok: true,
                        values,
                        message: String::new(),
                    };
                    (row, keep)
                }
                Err(e) => {
                    log::error!("n={n} trial={trial}: {e}");
                    let row = Row {
                        n,
                        trial,
                        seed,
                        ok: false,
                        values: BTreeMap::new(),
                        message: e.to_string(),
                    };
                    (row, None)
                }
            }
        })
        .collect();
    let mut sample = None;
    let mut rows = Vec::with_capacity(results.len());
    for (row, cell) in results {
        if let Some(c) = cell {
            sample = Some((c.atoms, c.crit));
        }
        rows.push(row);
    }

    let z = spec.probe.z.unwrap_or_else(|| {
        let z = random_probe_point(spec.master_seed.derive(PROBE_POINT_STREAM), spec.probe.probe_radius);
        log::info!("probe point {z} drawn from seed {}", spec.master_seed.0);
        z
    });
    let mut kinds = spec.probes.clone();
    kinds.sort();
    kinds.dedup();
    let probes = kinds.into_iter().flat_map(|k| run_probe(spec, k, z)).collect();

    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            spec_sha256: spec.hash()?,
            master_seed: spec.master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            reference_size: ref_size,
            reference_bias: 1.0 / ref_size as f64,
        },
        summary: summarize(&spec.n_ladder, &rows),
        spec: spec.clone(),
        rows,
        probes,
        sample,
    })
}

/// `log|L_n(z)| / n` for one draw; exposed for the CLI.
pub fn normalized_log_abs(spec: &EnsembleSpec, n: usize, seed: Seed, z: Complex) -> Result<f64> {
    let l = generate(spec, n, seed)?.to_rational();
    Ok(log_abs_rational(&l, z)? / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(dir: &Path) -> ExperimentSpec {
        ExperimentSpec {
            n_ladder: vec![8, 16],
            trials: 2,
            metrics: vec![Metric::W1Exact, Metric::AngularDiscrepancy],
            probes: vec![],
            master_seed: Seed(42),
            output_dir: dir.to_path_buf(),
            plot: false,
            reference_size: None,
            sliced_projections: 16,
            potential_grid: GridSpec::default(),
            probe: ProbeOptions::default(),
            ensemble: EnsembleSpec::pairwise_circle(),
        }
    }

    #[test]
    fn toml_round_trip() {
        let mut spec = toy(Path::new("out"));
        spec.probes = vec![ProbeKind::A1a2, ProbeKind::Mixture];
        spec.probe.z = Some(Complex::new(0.25, -0.5));
        let text = spec.to_toml_string().unwrap();
        let back = ExperimentSpec::from_toml_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_toml_string().unwrap(), text);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let text = r#"
            n_ladder = [4, 8]
            master_seed = 1
            output_dir = "x"
            [ensemble]
            kind = "pairwise_choice"
            a = { sequence = "bit_reversed_circle" }
        "#;
        let spec = ExperimentSpec::from_toml_str(text).unwrap();
        assert_eq!(spec.trials, 1);
        assert_eq!(spec.reference_size(), 32);
        assert_eq!(spec.probe, ProbeOptions::default());
    }

    #[test]
    fn rejects_bad_ladders() {
        let mut spec = toy(Path::new("o"));
        spec.n_ladder = vec![16, 8];
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        spec.n_ladder = vec![8, 16];
        spec.trials = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn rows_and_summary_shape() {
        let spec = toy(Path::new("o"));
        let r = run(&spec).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.all_ok());
        assert_eq!(
            r.columns(),
            vec![
                "angular_discrepancy_crit",
                "angular_discrepancy_zeros",
                "w1_exact_crit_ref",
                "w1_exact_crit_zeros",
                "w1_exact_zeros_ref",
            ]
        );
        assert_eq!(r.summary.len(), 2 * 5);
        assert!(!r.provenance.spec_sha256.is_empty());
        assert_eq!(r.provenance.reference_size, 64);
    }

    #[test]
    fn roots_of_unity_stay_at_distance_one() {
        let mut spec = toy(Path::new("o"));
        spec.ensemble = EnsembleSpec::Deterministic {
            family: crate::ensembles::Family::RootsOfUnity,
            radii: vec![],
            poly_roots: vec![],
        };
        spec.n_ladder = vec![16, 64];
        spec.trials = 1;
        spec.metrics = vec![Metric::W1Exact];
        let r = run(&spec).unwrap();
        for row in &r.rows {
            let v = row.values["w1_exact_crit_ref"];
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn numeric_failures_are_flagged_rows() {
        let mut spec = toy(Path::new("o"));
        // the exact transport size limit trips at this reference size
        spec.reference_size = Some(1 << 20);
        spec.n_ladder = vec![8, 16];
        spec.trials = 1;
        spec.metrics = vec![Metric::W1Exact];
        let r = run(&spec).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.failed_rows(), 2);
        assert!(r.rows.iter().all(|row| row.message.contains("exact transport limit")));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }
}
