//! Monte Carlo and quadrature probes on `L_n = Σ a_k/(z - z_k)`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{generate, BaseSequence, EnsembleSpec, Seed};
use crate::measures::{w1_exact, EmpiricalMeasure};
use crate::polycore::{eval_rational, pairwise_sum};
use crate::rootfind::{
    aberth_roots, critical_points, merge_multiple, merge_poles, rational_zeros, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::{Complex, Error, RationalSum, Result};

/// One estimate per `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub n_values: Vec<usize>,
    pub estimates: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: usize,
    pub seed: Seed,
}

impl ProbeResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,estimate,stderr,trials,seed\n");
        for (k, n) in self.n_values.iter().enumerate() {
            writeln!(
                out,
                "{n},{:e},{:e},{},{}",
                self.estimates[k], self.stderr[k], self.trials, self.seed.0
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

fn binomial_stderr(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Uniform point in the disk of radius `radius`, used as the probe location.
pub fn random_probe_point(seed: Seed, radius: f64) -> Complex {
    let mut rng = seed.rng();
    let r = radius * rng.random::<f64>().sqrt();
    Complex::from_polar(r, TAU * rng.random::<f64>())
}

/// Outcome of [`a1a2_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A1A2Probe {
    /// Fraction of trials with `(1/n) log|L_n(z)| > ε`.
    pub above: ProbeResult,
    /// Fraction of trials with `(1/n) log|L_n(z)| < -ε`.
    pub below: ProbeResult,
    /// The probe point actually used.
    pub z: Complex,
    /// How many times `z` was moved because it hit an atom.
    pub resamples: usize,
}

const MAX_RESAMPLES: usize = 16;

/// `(1/n) log|L_n(z)|` for every `n` and trial, indexed `[n][trial]`.
///
/// Fails with [`Error::PoleHit`] when `z` is an atom of some generated `L_n`.
pub fn a1a2_values(
    spec: &EnsembleSpec,
    z: Complex,
    n_values: &[usize],
    trials: usize,
    seed: Seed,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.derive(t as u64);
            n_values
                .iter()
                .map(|&n| {
                    let l = generate(spec, n, s)?.to_rational();
                    Ok(log_abs_rational(&l, z)? / n as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..n_values.len())
        .map(|i| per_trial.iter().map(|row| row[i]).collect())
        .collect())
}

/// Threshold counts over values from [`a1a2_values`].
pub fn a1a2_from_values(
    values: &[Vec<f64>],
    eps: f64,
    n_values: &[usize],
    seed: Seed,
) -> (ProbeResult, ProbeResult) {
    let trials = values.first().map_or(0, Vec::len);
    let frac = |pred: &dyn Fn(f64) -> bool| -> Vec<f64> {
        values
            .iter()
            .map(|row| row.iter().filter(|&&v| pred(v)).count() as f64 / trials.max(1) as f64)
            .collect()
    };
    let build = |estimates: Vec<f64>| ProbeResult {
        n_values: n_values.to_vec(),
        stderr: estimates.iter().map(|&p| binomial_stderr(p, trials)).collect(),
        estimates,
        trials,
        seed,
    };
    (build(frac(&|v| v > eps)), build(frac(&|v| v < -eps)))
}

/// Probability that `(1/n) log|L_n(z)|` exceeds `ε` (and falls below `-ε`).
///
/// If `z` coincides with an atom, it is moved by a random offset of size
/// `1e-6·(1 + |z|)` and the whole probe is rerun; the move is logged.
pub fn a1a2_probe(
    spec: &EnsembleSpec,
    z: Complex,
    eps: f64,
    n_values: &[usize],
    trials: usize,
    seed: Seed,
) -> Result<A1A2Probe> {
    if !(eps > 0.0) {
        return Err(Error::InvalidSpec("eps must be positive".into()));
    }
    if trials == 0 || n_values.is_empty() {
        return Err(Error::InvalidSpec("need at least one trial and one n".into()));
    }
    let mut z = z;
    let mut jitter = seed.derive(u64::MAX).rng();
    for resamples in 0..=MAX_RESAMPLES {
        match a1a2_values(spec, z, n_values, trials, seed) {
            Ok(values) => {
                let (above, below) = a1a2_from_values(&values, eps, n_values, seed);
                return Ok(A1A2Probe {
                    above,
                    below,
                    z,
                    resamples,
                });
            }
            Err(Error::PoleHit { .. }) => {
                let step = 1e-6 * (1.0 + z.norm());
                let moved = z + Complex::from_polar(step, TAU * jitter.random::<f64>());
                log::warn!("probe point {z} is an atom, resampled to {moved}");
                z = moved;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidSpec(format!(
        "probe point kept hitting atoms after {MAX_RESAMPLES} resamples"
    )))
}

/// Polar product rule on `D_r`: Gauss–Legendre panels in the radius,
/// trapezoid in the angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub radial_panels: usize,
    pub radial_order: usize,
    pub angular: usize,
    /// Excision radius as a fraction of `r`.
    pub excision: f64,
    /// Largest tolerated fraction of singularities whose excision disks overlap.
    pub max_overlap: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_panels: 64,
            radial_order: 8,
            angular: 2048,
            excision: 1e-4,
            max_overlap: 0.05,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.radial_panels == 0 || self.radial_order == 0 || self.angular < 3 {
            return Err(Error::InvalidSpec("quadrature needs panels, order ≥ 1 and ≥ 3 angles".into()));
        }
        if !(self.excision > 0.0 && self.excision < 0.5) {
            return Err(Error::InvalidSpec("excision fraction must lie in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { t } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (t * p - pm1) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            dp = 1.0;
        }
        x[i] = -t;
        x[m - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m == 1 {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    (x, w)
}

/// `∫_{|w|<δ} log|w| dm = πδ²(log δ − 1/2)`.
pub fn disk_log_integral(delta: f64) -> f64 {
    PI * delta * delta * (delta.ln() - 0.5)
}

/// `∫_{|w|<δ} log²|w| dm = πδ²(log²δ − log δ + 1/2)`.
pub fn disk_log2_integral(delta: f64) -> f64 {
    let l = delta.ln();
    PI * delta * delta * (l * l - l + 0.5)
}

/// A point where `log|L|` behaves like `order · log|z - at|`.
#[derive(Clone, Copy, Debug)]
struct Singularity {
    at: Complex,
    order: f64,
}

/// Sorted by real part so that disk lookups are a binary search.
struct SingularityIndex {
    items: Vec<Singularity>,
}

impl SingularityIndex {
    fn new(mut items: Vec<Singularity>) -> Self {
        items.sort_by(|a, b| a.at.re.total_cmp(&b.at.re).then(a.at.im.total_cmp(&b.at.im)));
        SingularityIndex { items }
    }

    fn any_within(&self, z: Complex, radius: f64) -> bool {
        let start = self.items.partition_point(|s| s.at.re < z.re - radius);
        self.items[start..]
            .iter()
            .take_while(|s| s.at.re <= z.re + radius)
            .any(|s| (s.at - z).norm() < radius)
    }

    fn overlapping(&self, radius: f64) -> usize {
        (0..self.items.len())
            .filter(|&i| {
                let z = self.items[i].at;
                let start = self.items.partition_point(|s| s.at.re < z.re - 2.0 * radius);
                self.items[start..]
                    .iter()
                    .enumerate()
                    .take_while(|(_, s)| s.at.re <= z.re + 2.0 * radius)
                    .any(|(j, s)| start + j != i && (s.at - z).norm() < 2.0 * radius)
            })
            .count()
    }
}

fn canonical(l: &RationalSum) -> Result<RationalSum> {
    let mut pairs: Vec<(Complex, Complex)> =
        l.poles().iter().copied().zip(l.weights().iter().copied()).collect();
    pairs.sort_by(|a, b| {
        (a.0.re, a.0.im, a.1.re, a.1.im)
            .partial_cmp(&(b.0.re, b.0.im, b.1.re, b.1.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (poles, weights) = pairs.into_iter().unzip();
    RationalSum::new(weights, poles)
}

fn log_abs_l(l: &RationalSum, z: Complex) -> Option<f64> {
    let v = eval_rational(l, z).ok()?.s1.norm().ln();
    v.is_finite().then_some(v)
}

/// Relative size of `|L(z)|` against `Σ|a_k/(z - z_k)|` below which the
/// direct sum is treated as cancelled.
const CANCELLATION_RATIO: f64 = 1e-8;

/// `log|L(z)|` by direct summation, with the cancellation ratio
/// `|L(z)| / Σ|a_k/(z - z_k)|`.
fn direct_log(l: &RationalSum, z: Complex) -> Option<(f64, f64)> {
    let (w, p) = (l.weights(), l.poles());
    if p.contains(&z) {
        return None;
    }
    let s1 = pairwise_sum(l.len(), |k| w[k] / (z - p[k]));
    let mag = pairwise_sum(l.len(), |k| w[k].norm() / (z - p[k]).norm());
    Some((s1.norm().ln(), s1.norm() / mag))
}

/// `log|L|` from `L = c · Π(z - ζ_j) / Π(z - z_k)`.
///
/// Direct summation loses all relative accuracy where `L` is exponentially
/// small (inside a circle of poles, for instance); the factored form does not.
/// `log|c|` is calibrated at the best-conditioned of a few far-away points.
struct FactoredLog {
    zeros: Vec<Complex>,
    poles: Vec<Complex>,
    log_lead: f64,
}

impl FactoredLog {
    /// `l` must have merged poles with nonzero weights; `zeros` are its finite
    /// zeros with multiplicity.
    fn new(l: &RationalSum, zeros: Vec<Complex>) -> Result<Self> {
        let mut f = FactoredLog {
            zeros,
            poles: l.poles().to_vec(),
            log_lead: 0.0,
        };
        let far = 2.0 * f.poles.iter().chain(&f.zeros).map(|z| z.norm()).fold(0.0, f64::max) + 1.0;
        let (z, (v, _)) = (0..8)
            .filter_map(|k| {
                let z = Complex::from_polar(far, 0.3 + TAU * k as f64 / 8.0);
                direct_log(l, z).map(|d| (z, d))
            })
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .ok_or(Error::ZeroAtEvaluationPoint)?;
        if !v.is_finite() {
            return Err(Error::InvalidPolynomial("rational sum vanishes identically".into()));
        }
        f.log_lead = v - f.eval(z);
        Ok(f)
    }

    fn eval(&self, z: Complex) -> f64 {
        // running product of squared moduli, flushed into the log before it
        // can overflow
        let (mut acc, mut log) = (1.0f64, 0.0f64);
        let mut push = |x: f64| {
            acc *= x;
            if !(1e-150..=1e150).contains(&acc) {
                log += acc.ln();
                acc = 1.0;
            }
        };
        let m = self.zeros.len().max(self.poles.len());
        for k in 0..m {
            let num = self.zeros.get(k).map_or(1.0, |c| (z - c).norm_sqr());
            let den = self.poles.get(k).map_or(1.0, |c| (z - c).norm_sqr());
            push(num / den);
        }
        self.log_lead + 0.5 * (log + acc.ln())
    }
}

/// Poles merged, zero-weight poles dropped.
fn reduced(l: &RationalSum) -> Result<RationalSum> {
    let l = merge_poles(l)?;
    let (w, p): (Vec<Complex>, Vec<Complex>) = l
        .weights()
        .iter()
        .zip(l.poles())
        .filter(|(w, _)| w.norm() > 0.0)
        .map(|(&w, &p)| (w, p))
        .unzip();
    RationalSum::new(w, p)
}

fn zeros_lenient(l: &RationalSum) -> Result<Vec<Complex>> {
    match rational_zeros(l, DEFAULT_TOL) {
        Ok(r) => Ok(r.roots.into_inner()),
        Err(Error::DidNotConverge(report)) => {
            log::warn!(
                "{} zeros of L did not converge; using best approximations",
                report.unconverged()
            );
            Ok(report.roots.into_inner())
        }
        Err(e) => Err(e),
    }
}

/// `log|L(z)|`, falling back to the factored form when the pole sum cancels.
pub fn log_abs_rational(l: &RationalSum, z: Complex) -> Result<f64> {
    if let Some(index) = l.poles().iter().position(|&p| p == z) {
        return Err(Error::PoleHit { index });
    }
    let (v, ratio) = direct_log(l, z).expect("z is not a pole");
    if ratio >= CANCELLATION_RATIO {
        return Ok(v);
    }
    let l = reduced(l)?;
    let zeros = zeros_lenient(&l)?;
    Ok(FactoredLog::new(&l, zeros)?.eval(z))
}

const GRADED_LEVELS: usize = 12;

/// `(1/norm²) ∫_{D_r} log²|L(z)| dm` for a given rational sum.
///
/// Zeros and poles of `L` inside the disk are excised with disks of radius
/// `quad.excision · r`; each excised disk contributes the exact integral of
/// `(s·log|w| + h)²`, where `s` is the signed order and `h` the local regular
/// part, taken as the circle mean of `log|L| - s·log δ` on the excision circle.
pub fn a3_integral_rational(
    l: &RationalSum,
    r: f64,
    norm: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidSpec("radius must be positive".into()));
    }
    quad.validate()?;
    let l = reduced(&canonical(l)?)?;
    let delta = quad.excision * r;
    let zeros = zeros_lenient(&l)?;

    let mut sing: Vec<Singularity> = l
        .poles()
        .iter()
        .filter(|c| c.norm() < r + delta)
        .map(|&at| Singularity { at, order: -1.0 })
        .collect();
    sing.extend(
        merge_multiple(&zeros)
            .into_iter()
            .filter(|(c, _)| c.norm() < r + delta)
            .map(|(at, m)| Singularity {
                at,
                order: m as f64,
            }),
    );
    let logl = FactoredLog::new(&l, zeros)?;
    let index = SingularityIndex::new(sing);
    let overlap = index.overlapping(delta);
    if !index.items.is_empty()
        && overlap as f64 > quad.max_overlap * index.items.len() as f64
    {
        return Err(Error::QuadratureFailure(format!(
            "{overlap} of {} excision disks overlap",
            index.items.len()
        )));
    }

    let (gx, gw) = gauss_legendre(quad.radial_order);
    let h = r / quad.radial_panels as f64;
    // geometric grading toward the polar centre, with an edge exactly at the
    // excision radius so a singularity there is cut on a panel boundary
    let mut edges: Vec<f64> = vec![0.0];
    edges.extend((1..=GRADED_LEVELS).rev().map(|k| delta * 0.5f64.powi(k as i32)));
    let mut e = delta;
    while e < h {
        edges.push(e);
        e *= 2.0;
    }
    edges.extend((1..=quad.radial_panels).map(|p| p as f64 * h));
    let radial: Vec<(f64, f64)> = edges
        .windows(2)
        .flat_map(|e| {
            let (a, len) = (e[0], e[1] - e[0]);
            gx.iter()
                .zip(&gw)
                .map(move |(&x, &w)| (a + 0.5 * len * (x + 1.0), 0.5 * len * w))
                .collect::<Vec<_>>()
        })
        .collect();
    let m = quad.angular;
    let dtheta = TAU / m as f64;
    let ring_sums: Vec<f64> = radial
        .par_iter()
        .map(|&(rho, w)| {
            let ring = pairwise_sum(m, |j| {
                let z = Complex::from_polar(rho, dtheta * j as f64);
                if index.any_within(z, delta) {
                    return 0.0;
                }
                let v = logl.eval(z);
                if v.is_finite() {
                    v * v
                } else {
                    0.0
                }
            });
            ring * w * rho * dtheta
        })
        .collect();
    let body: f64 = pairwise_sum(ring_sums.len(), |k| ring_sums[k]);

    const PATCH_POINTS: usize = 16;
    let a1 = disk_log_integral(delta);
    let a2 = disk_log2_integral(delta);
    let patches: f64 = index
        .items
        .iter()
        .map(|s| {
            let mean = pairwise_sum(PATCH_POINTS, |j| {
                let w = s.at + Complex::from_polar(delta, TAU * j as f64 / PATCH_POINTS as f64);
                logl.eval(w)
            }) / PATCH_POINTS as f64;
            let hbar = mean - s.order * delta.ln();
            s.order * s.order * a2 + 2.0 * s.order * hbar * a1 + hbar * hbar * PI * delta * delta
        })
        .sum();
    Ok((body + patches) / (norm * norm))
}

/// `(1/n²) ∫_{D_r} log²|L_n(z)| dm` for one draw of the ensemble.
pub fn a3_integral(
    spec: &EnsembleSpec,
    r: f64,
    n: usize,
    quad: &QuadratureSpec,
    seed: Seed,
) -> Result<f64> {
    let l = generate(spec, n, seed)?.to_rational();
    a3_integral_rational(&l, r, n as f64, quad)
}

/// Distance from the circle below which a singularity counts as on it.
pub const CIRCLE_CLEARANCE: f64 = 1e-6;

/// Degree up to which the zeros of `L` come from its expanded numerator.
pub const NUMERATOR_MAX_POLES: usize = 512;

/// Zeros of `L`, with multiplicity.
fn zeros_of(l: &RationalSum) -> Result<Vec<Complex>> {
    if l.len() <= NUMERATOR_MAX_POLES {
        let num = l.numerator();
        if num.degree() == 0 {
            return Ok(vec![]);
        }
        Ok(aberth_roots(&num, DEFAULT_TOL, DEFAULT_MAX_ITER)?.roots.into_inner())
    } else {
        Ok(rational_zeros(l, DEFAULT_TOL)?.roots.into_inner())
    }
}

/// Absolute residual of the Poisson–Jensen identity for `log|L(z)|` on the
/// disk of radius `big_r`, with `quad_points` trapezoid nodes on the circle.
pub fn poisson_jensen_residual(
    l: &RationalSum,
    big_r: f64,
    z: Complex,
    quad_points: usize,
) -> Result<f64> {
    if !(big_r > 0.0) || z.norm() >= big_r {
        return Err(Error::InvalidSpec("need 0 ≤ |z| < R".into()));
    }
    if quad_points < 3 {
        return Err(Error::InvalidSpec("need at least 3 quadrature points".into()));
    }
    let l = merge_poles(l)?;
    let poles: Vec<Complex> = l
        .poles()
        .iter()
        .zip(l.weights())
        .filter(|(_, w)| w.norm() > 0.0)
        .map(|(&c, _)| c)
        .collect();
    let zeros = zeros_of(&l)?;
    let scale = 1.0 + z.norm();
    let distance = poles
        .iter()
        .chain(&zeros)
        .map(|c| (c.norm() - big_r).abs())
        .fold(f64::INFINITY, f64::min);
    if distance < CIRCLE_CLEARANCE {
        return Err(Error::SingularityOnCircle { distance });
    }
    if poles.iter().chain(&zeros).any(|&c| (c - z).norm() <= 1e-12 * scale) {
        return Err(Error::ZeroAtEvaluationPoint);
    }
    let lhs = match eval_rational(&l, z) {
        Ok(v) if v.s1.norm() > 0.0 => v.s1.norm().ln(),
        _ => return Err(Error::ZeroAtEvaluationPoint),
    };

    let dtheta = TAU / quad_points as f64;
    let boundary = pairwise_sum(quad_points, |j| {
        let w = Complex::from_polar(big_r, dtheta * j as f64);
        let kernel = ((w + z) / (w - z)).re;
        log_abs_l(&l, w).unwrap_or(0.0) * kernel
    }) / quad_points as f64;
    let r2 = Complex::new(big_r * big_r, 0.0);
    let blaschke = |c: &Complex| ((r2 - c.conj() * z) / (big_r * (z - c))).norm().ln();
    let zero_term: f64 = zeros.iter().filter(|c| c.norm() < big_r).map(blaschke).sum();
    let pole_term: f64 = poles.iter().filter(|c| c.norm() < big_r).map(blaschke).sum();
    Ok((lhs - (boundary - zero_term + pole_term)).abs())
}

/// Candidate ball centres: the samples and midpoints of pairs within `delta`.
pub fn candidate_centers(samples: &[Complex], delta: f64) -> Vec<Complex> {
    let grid = CellGrid::new(samples, delta);
    let mut out = samples.to_vec();
    for (i, &a) in samples.iter().enumerate() {
        grid.for_each_near(a, |j| {
            if j > i && (samples[j] - a).norm() <= delta {
                out.push(0.5 * (a + samples[j]));
            }
        });
    }
    out
}

/// Largest fraction of samples in a closed ball of radius `delta` about one of
/// `centers`.
pub fn concentration_with_centers(samples: &[Complex], centers: &[Complex], delta: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let grid = CellGrid::new(samples, delta);
    let best = centers
        .par_iter()
        .map(|&c| {
            let mut count = 0usize;
            grid.for_each_near(c, |j| {
                if (samples[j] - c).norm() <= delta {
                    count += 1;
                }
            });
            count
        })
        .max()
        .unwrap_or(0);
    best as f64 / samples.len() as f64
}

/// Empirical concentration function `sup_a #{|X_i - a| ≤ δ} / N`, with the
/// sup taken over [`candidate_centers`].
pub fn concentration_estimate(samples: &[Complex], delta: f64) -> f64 {
    concentration_with_centers(samples, &candidate_centers(samples, delta), delta)
}

/// Upper bound on the concentration function: every ball of radius `δ` lies
/// in some 3×3 block of grid cells of side `δ`.
pub fn concentration_upper_bound(samples: &[Complex], delta: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let grid = CellGrid::new(samples, delta);
    let best = grid
        .cells
        .keys()
        .map(|&(cx, cy)| {
            let mut total = 0;
            for dx in -2..=0 {
                for dy in -2..=0 {
                    let mut block = 0;
                    for ex in 0..3 {
                        for ey in 0..3 {
                            block += grid
                                .cells
                                .get(&(cx + dx + ex, cy + dy + ey))
                                .map_or(0, Vec::len);
                        }
                    }
                    total = total.max(block);
                }
            }
            total
        })
        .max()
        .unwrap_or(0);
    best as f64 / samples.len() as f64
}

struct CellGrid {
    cell: f64,
    cells: std::collections::HashMap<(i64, i64), Vec<usize>>,
}

impl CellGrid {
    fn new(points: &[Complex], cell: f64) -> Self {
        let mut cells: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
        for (i, z) in points.iter().enumerate() {
            cells.entry(Self::key(*z, cell)).or_default().push(i);
        }
        CellGrid { cell, cells }
    }

    fn key(z: Complex, cell: f64) -> (i64, i64) {
        ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64)
    }

    fn for_each_near(&self, z: Complex, mut f: impl FnMut(usize)) {
        let (cx, cy) = Self::key(z, self.cell);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    v.iter().for_each(|&j| f(j));
                }
            }
        }
    }
}

/// Fraction of real critical points of the Cauchy likelihood polynomial.
///
/// A critical point counts as real when `|Im c| ≤ im_tol · max(1, |c|)`.
/// The estimate for each `n` is the median over trials; the standard error is
/// the binomial one over the `2n - 1` critical points.
pub fn real_critical_fraction(
    n_values: &[usize],
    trials: usize,
    seed: Seed,
    im_tol: f64,
) -> Result<ProbeResult> {
    if !(im_tol > 0.0) || trials == 0 {
        return Err(Error::InvalidSpec("need im_tol > 0 and trials ≥ 1".into()));
    }
    let mut estimates = Vec::with_capacity(n_values.len());
    let mut stderr = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut fractions: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let zeros = generate(&EnsembleSpec::CauchyPairs, n, seed.derive(t as u64))?;
                let crit = critical_points(zeros.zeros().expect("zeros"), DEFAULT_TOL)?.roots;
                let real = crit
                    .iter()
                    .filter(|c| c.im.abs() <= im_tol * c.norm().max(1.0))
                    .count();
                Ok(real as f64 / crit.len() as f64)
            })
            .collect::<Result<_>>()?;
        fractions.sort_by(f64::total_cmp);
        let mid = fractions.len() / 2;
        let median = if fractions.len() % 2 == 1 {
            fractions[mid]
        } else {
            0.5 * (fractions[mid - 1] + fractions[mid])
        };
        estimates.push(median);
        stderr.push(binomial_stderr(median, 2 * n - 1));
    }
    Ok(ProbeResult {
        n_values: n_values.to_vec(),
        estimates,
        stderr,
        trials,
        seed,
    })
}

/// W1 distance between the first `n` terms of `ξ_k = a_k` (probability `p`)
/// or `b_k`, and `p·𝓜(a_1..a_m) + (1-p)·𝓜(b_1..b_m)` with `m = reference`.
pub fn mixture_limit_probe(
    a: &BaseSequence,
    b: &BaseSequence,
    p: f64,
    n: usize,
    reference: usize,
    seed: Seed,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidSpec("p must lie in [0, 1]".into()));
    }
    if n == 0 || reference == 0 {
        return Err(Error::InvalidSpec("n and the reference size must be positive".into()));
    }
    let (ta, tb) = (a.terms(n)?, b.terms(n)?);
    let mut rng = seed.rng();
    let xi: Vec<Complex> = ta
        .iter()
        .zip(tb.iter())
        .map(|(&x, &y)| if rng.random_bool(p) { x } else { y })
        .collect();
    let mu = EmpiricalMeasure::uniform(a.terms(reference)?.into_inner())?;
    let nu = EmpiricalMeasure::uniform(b.terms(reference)?.into_inner())?;
    let target = EmpiricalMeasure::mixture(p, &mu, &nu)?;
    w1_exact(&EmpiricalMeasure::uniform(xi)?, &target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{Family, SequenceKind};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in 1..12 {
            let (x, w) = gauss_legendre(m);
            for deg in 0..2 * m {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg + 1) as f64 };
                assert!((got - want).abs() < 1e-13, "m={m} deg={deg}");
            }
        }
    }

    #[test]
    fn disk_patch_matches_numeric_quadrature() {
        // ∫_0^δ 2π ρ log²ρ dρ by substitution ρ = δ e^{-t}
        let delta = 3e-3;
        let (x, w) = gauss_legendre(40);
        let mut num = (0.0, 0.0);
        for p in 0..40 {
            let (a, h) = (p as f64, 1.0);
            for (x, w) in x.iter().zip(&w) {
                let t = a + 0.5 * h * (x + 1.0);
                let rho = delta * (-t).exp();
                let jac = 0.5 * h * w * rho;
                num.0 += TAU * rho * rho.ln() * jac;
                num.1 += TAU * rho * rho.ln().powi(2) * jac;
            }
        }
        assert!((num.0 - disk_log_integral(delta)).abs() < 1e-12);
        assert!((num.1 - disk_log2_integral(delta)).abs() < 1e-12);
    }

    #[test]
    fn single_pole_at_origin() {
        let l = RationalSum::classical(&[c(0.0, 0.0)]);
        let got = a3_integral_rational(&l, 1.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((got - PI / 2.0).abs() < 1e-4, "{got}");
    }

    #[test]
    fn roots_of_unity_inner_disk_is_refinement_stable() {
        let spec = EnsembleSpec::Deterministic {
            family: Family::RootsOfUnity,
            radii: vec![],
            poly_roots: vec![],
        };
        let coarse = QuadratureSpec {
            radial_panels: 32,
            angular: 512,
            ..Default::default()
        };
        let fine = QuadratureSpec {
            radial_panels: 64,
            angular: 1024,
            ..Default::default()
        };
        let a = a3_integral(&spec, 0.5, 16, &coarse, Seed(0)).unwrap();
        let b = a3_integral(&spec, 0.5, 16, &fine, Seed(0)).unwrap();
        assert!((a - b).abs() < 1e-5, "{a} {b}");
        // reference from adaptive 2-D quadrature of the closed form
        // log|16 z^15 / (z^16 - 1)|
        assert!((b - 0.874381626131199).abs() < 1e-9, "{b}");
    }

    #[test]
    fn refinement_residual_shrinks_on_smooth_integrand() {
        // poles well outside the disk: the integrand is smooth
        let poles: Vec<Complex> = (0..5).map(|k| Complex::from_polar(3.0, 1.3 * k as f64)).collect();
        let l = RationalSum::classical(&poles);
        let at = |panels| {
            let q = QuadratureSpec {
                radial_panels: panels,
                radial_order: 2,
                angular: 64,
                ..Default::default()
            };
            a3_integral_rational(&l, 1.0, 1.0, &q).unwrap()
        };
        let (i1, i2, i4) = (at(2), at(4), at(8));
        assert!((i4 - i2).abs() * 2.0 <= (i2 - i1).abs(), "{i1} {i2} {i4}");
    }

    #[test]
    fn a3_is_invariant_under_relabeling() {
        let zeros: Vec<Complex> = (0..12)
            .map(|k| Complex::from_polar(1.0 + 0.05 * k as f64, 2.1 * k as f64))
            .collect();
        let mut shuffled = zeros.clone();
        shuffled.reverse();
        shuffled.swap(0, 5);
        let q = QuadratureSpec {
            radial_panels: 16,
            angular: 256,
            ..Default::default()
        };
        let a = a3_integral_rational(&RationalSum::classical(&zeros), 2.0, 12.0, &q).unwrap();
        let b = a3_integral_rational(&RationalSum::classical(&shuffled), 2.0, 12.0, &q).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn overlapping_excision_fails() {
        let l = RationalSum::classical(&[c(0.1, 0.0), c(0.1 + 1e-5, 0.0), c(0.5, 0.5)]);
        let q = QuadratureSpec {
            max_overlap: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            a3_integral_rational(&l, 1.0, 1.0, &q),
            Err(Error::QuadratureFailure(_))
        ));
    }

    #[test]
    fn poisson_jensen_without_singularities() {
        let l = RationalSum::classical(&[c(2.0, 0.0)]);
        let res = poisson_jensen_residual(&l, 1.0, c(0.0, 0.0), 4096).unwrap();
        assert!(res <= 1e-8, "{res}");
        let res = poisson_jensen_residual(&l, 1.0, c(0.3, -0.4), 4096).unwrap();
        assert!(res <= 1e-8, "{res}");
    }

    #[test]
    fn poisson_jensen_with_pole_and_zero_inside() {
        // zero of L at 0.8 + 0.35·... lies inside; one pole inside
        let l = RationalSum::new(
            vec![c(1.0, 0.0), c(2.0, 0.5)],
            vec![c(0.2, 0.1), c(-3.0, 0.5)],
        )
        .unwrap();
        let res = poisson_jensen_residual(&l, 1.5, c(-0.4, 0.6), 4096).unwrap();
        assert!(res <= 1e-6, "{res}");
    }

    #[test]
    fn poisson_jensen_preconditions() {
        let l = RationalSum::classical(&[c(0.5, 0.0), c(-2.0, 0.0)]);
        assert!(matches!(
            poisson_jensen_residual(&l, 1.0, c(0.5, 0.0), 64),
            Err(Error::ZeroAtEvaluationPoint)
        ));
        let on = RationalSum::classical(&[c(1.0, 0.0), c(-3.0, 0.0)]);
        assert!(matches!(
            poisson_jensen_residual(&on, 1.0, c(0.0, 0.0), 64),
            Err(Error::SingularityOnCircle { .. })
        ));
    }

    #[test]
    fn concentration_trivial_cases() {
        let same = vec![c(0.3, 0.3); 50];
        assert_eq!(concentration_estimate(&same, 0.01), 1.0);
        let delta = 0.1;
        let mut two: Vec<Complex> = vec![c(0.0, 0.0); 20];
        two.extend(vec![c(10.0 * delta, 0.0); 20]);
        assert_eq!(concentration_estimate(&two, delta), 0.5);
    }

    #[test]
    fn concentration_uniform_disk() {
        let mut rng = Seed(11).rng();
        let samples: Vec<Complex> = (0..10_000)
            .map(|_| crate::ensembles::Law::UniformDisk.sample(&mut rng))
            .collect();
        let delta = 0.1;
        let q = concentration_estimate(&samples, delta);
        let upper = concentration_upper_bound(&samples, delta);
        assert!(q >= delta * delta, "{q}");
        assert!(q <= 2.0 * delta * delta, "{q}");
        assert!(upper >= q);
    }

    #[test]
    fn concentration_monotone_in_delta() {
        let mut rng = Seed(3).rng();
        let samples: Vec<Complex> = (0..500)
            .map(|_| crate::ensembles::Law::ComplexGaussian.sample(&mut rng))
            .collect();
        let centers = candidate_centers(&samples, 0.3);
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let d = 0.3 * 0.8f64.powi(k);
            let q = concentration_with_centers(&samples, &centers, d);
            assert!(q <= last);
            last = q;
        }
    }

    #[test]
    fn a1a2_deterministic_is_indicator() {
        let base = BaseSequence::new(SequenceKind::BitReversedCircle);
        let spec = EnsembleSpec::PairwiseChoice {
            a: base.clone(),
            b: Some(base),
        };
        let p = a1a2_probe(&spec, c(0.37, 0.41), 0.05, &[16, 64], 5, Seed(1)).unwrap();
        for r in [&p.above, &p.below] {
            assert!(r.estimates.iter().all(|&e| e == 0.0 || e == 1.0));
            assert!(r.stderr.iter().all(|&s| s == 0.0));
        }
        assert_eq!(p.resamples, 0);
    }

    #[test]
    fn a1a2_monotone_in_eps() {
        let spec = EnsembleSpec::pairwise_circle();
        let ns = [32, 128];
        let values = a1a2_values(&spec, c(0.2, -0.5), &ns, 40, Seed(5)).unwrap();
        let mut last = (vec![1.0; 2], vec![1.0; 2]);
        for k in 0..20 {
            let (a, b) = a1a2_from_values(&values, 0.01 * (k + 1) as f64, &ns, Seed(5));
            for i in 0..2 {
                assert!(a.estimates[i] <= last.0[i] && b.estimates[i] <= last.1[i]);
            }
            last = (a.estimates, b.estimates);
        }
    }

    #[test]
    fn a1a2_resamples_on_atom() {
        let spec = EnsembleSpec::Deterministic {
            family: Family::RootsOfUnity,
            radii: vec![],
            poly_roots: vec![],
        };
        let p = a1a2_probe(&spec, c(1.0, 0.0), 0.05, &[8], 2, Seed(2)).unwrap();
        assert!(p.resamples >= 1);
        assert_ne!(p.z, c(1.0, 0.0));
    }

    #[test]
    fn probe_result_csv() {
        let r = ProbeResult {
            n_values: vec![4, 8],
            estimates: vec![0.5, 0.25],
            stderr: vec![0.1, 0.05],
            trials: 10,
            seed: Seed(9),
        };
        let csv = r.to_csv();
        assert!(csv.starts_with("n,estimate,stderr,trials,seed\n4,"));
        assert_eq!(csv.lines().count(), 3);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ProbeResult>(&json).unwrap(), r);
    }

    #[test]
    fn cauchy_small_cases() {
        let one = real_critical_fraction(&[1], 5, Seed(4), 1e-8).unwrap();
        assert_eq!(one.estimates, vec![1.0]);
        for s in 0..30 {
            let r = real_critical_fraction(&[2], 1, Seed(s), 1e-8).unwrap();
            let f = r.estimates[0];
            assert!((f - 1.0 / 3.0).abs() < 1e-12 || f == 1.0, "seed {s}: {f}");
        }
    }

    #[test]
    fn cauchy_two_pairs_against_companion() {
        use crate::polycore::{derivative, poly_from_roots};
        use crate::rootfind::{companion_roots, match_rootsets};
        for s in 0..10 {
            let g = generate(&EnsembleSpec::CauchyPairs, 2, Seed(s).derive(0)).unwrap();
            let zeros = g.zeros().unwrap();
            let ours = critical_points(zeros, DEFAULT_TOL).unwrap().roots;
            let oracle = companion_roots(&derivative(&poly_from_roots(zeros))).unwrap();
            let scale = 1.0 + zeros.max_modulus();
            assert!(match_rootsets(&ours, &oracle).unwrap() < 1e-8 * scale);
        }
    }

    #[test]
    fn mixture_degenerate_p() {
        let a = BaseSequence::new(SequenceKind::BitReversedCircle);
        let b = a.clone().scaled(2.0);
        let d1 = mixture_limit_probe(&a, &b, 1.0, 64, 256, Seed(0)).unwrap();
        let direct = w1_exact(
            &EmpiricalMeasure::uniform(a.terms(64).unwrap().into_inner()).unwrap(),
            &EmpiricalMeasure::uniform(a.terms(256).unwrap().into_inner()).unwrap(),
        )
        .unwrap();
        assert!((d1 - direct).abs() < 1e-12);
        let d0 = mixture_limit_probe(&a, &b, 0.0, 64, 256, Seed(0)).unwrap();
        assert!((d0 - 2.0 * direct).abs() < 1e-9, "{d0} {direct}");
        assert!(mixture_limit_probe(&a, &b, 1.5, 64, 256, Seed(0)).is_err());
    }
}
