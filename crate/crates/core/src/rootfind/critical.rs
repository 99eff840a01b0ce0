//! Zeros of `L(z) = Σ a_k / (z - z_k)` and critical points in root form.
//!
//! The finite zeros of `L` are the zeros of `Q(z) = Π(z - c_j) · L(z)` where
//! `c_j` are the distinct poles. `Q` is never expanded; the Aberth correction
//! only needs the Newton ratio
//!
//! ```text
//! Q/Q' = S1 / (S1·T1 - S2),   S1 = Σ a/(z-c),  S2 = Σ a/(z-c)^2,  T1 = Σ 1/(z-c)
//! ```
//!
//! which is evaluated with pairwise sums and never overflows. For unit
//! weights `T1 = S1` and this reduces to `S1 / (S1^2 - S2)`.
//!
//! Multiple zeros of `L` come out of the iteration as a ring of approximations
//! whose radius is set by rounding noise. They are detected afterwards: a
//! zero of multiplicity `μ` at `c` is exactly the condition
//! `Σ a_k (c - z_k)^{-j} = 0` for `j = 1..μ`, which is tested at the refined
//! cluster centre. When that test cannot settle the order in double
//! precision, or the result fails the trace check (the sum of the zeros of `L`
//! is known in closed form), the approximations are polished with
//! double-double sums instead. The result is then the set of exact zeros for
//! the rounded input, where a high-order zero has split into a ring.

use std::ops::Add;

use num_complex::Complex64 as Complex;
use rayon::prelude::*;

use super::aberth::PARALLEL_THRESHOLD;
use super::{RootFindReport, DEFAULT_MAX_ITER};
use crate::dd::DdComplex;
use crate::polycore::{pairwise_sum, UNIT_ROUNDOFF};
use crate::{Error, RationalSum, Result, RootSet};

/// Zeros closer than this times `1 + |z|` are merged into one atom.
pub const MULTIPLE_ZERO_RELATIVE_GAP: f64 = 1e-12;

/// Relative size below which a power sum counts as zero in the multiplicity test.
const POWER_SUM_TOL: f64 = 1e-9;

/// A-posteriori forward error above which an approximation is treated as a
/// possible member of a multiple-zero cluster.
const SUSPECT_FORWARD_ERROR: f64 = 1e-9;

/// Allowed deviation of the computed zero sum from its closed form, relative
/// to `(d - 1) · Σ|a_k c_k| / |Σ a_k|`.
const TRACE_TOL: f64 = 1e-10;

/// Groups atoms closer than [`MULTIPLE_ZERO_RELATIVE_GAP`]` · (1 + |z|)` and
/// returns `(representative, multiplicity)` pairs.
pub fn merge_multiple(atoms: &[Complex]) -> Vec<(Complex, usize)> {
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| {
        (atoms[a].re, atoms[a].im)
            .partial_cmp(&(atoms[b].re, atoms[b].im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut used = vec![false; atoms.len()];
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let zi = atoms[i];
        let gap = MULTIPLE_ZERO_RELATIVE_GAP * (1.0 + zi.norm());
        let mut mult = 1;
        for &j in &order[pos + 1..] {
            if atoms[j].re - zi.re > gap {
                break;
            }
            if !used[j] && (atoms[j] - zi).norm() <= gap {
                used[j] = true;
                mult += 1;
            }
        }
        out.push((zi, mult));
    }
    out
}

/// Critical points of `Π (z - ξ_k)`: `n - 1` atoms for `n` zeros.
///
/// A zero of multiplicity `m` contributes `m - 1` atoms placed exactly on it;
/// the rest are the zeros of `Σ m_j / (z - c_j)` over the distinct zeros.
pub fn critical_points(zeros: &RootSet, tol: f64) -> Result<RootFindReport> {
    let n = zeros.len();
    if n < 2 {
        return Err(Error::InvalidSpec(format!(
            "critical points need at least 2 zeros, got {n}"
        )));
    }
    let merged = merge_multiple(zeros);
    let mut forced = Vec::new();
    for &(z, m) in &merged {
        forced.extend(std::iter::repeat_n(z, m - 1));
    }
    let weights = merged.iter().map(|&(_, m)| Complex::new(m as f64, 0.0)).collect();
    let poles = merged.iter().map(|&(z, _)| z).collect();
    let l = RationalSum::new(weights, poles)?;

    let finish = |mut r: RootFindReport| {
        let k = forced.len();
        r.roots.extend(forced.iter().cloned());
        r.converged.extend(std::iter::repeat_n(true, k));
        r.residuals.extend(std::iter::repeat_n(0.0, k));
        r
    };
    if merged.len() == 1 {
        return Ok(finish(RootFindReport {
            roots: RootSet::default(),
            iterations: 0,
            max_residual: 0.0,
            residuals: vec![],
            converged: vec![],
        }));
    }
    match solve(&l, tol, DEFAULT_MAX_ITER) {
        Ok(r) => Ok(finish(r)),
        Err(Error::DidNotConverge(r)) => Err(Error::DidNotConverge(Box::new(finish(*r)))),
        Err(e) => Err(e),
    }
}

/// Merges coincident poles (within [`MULTIPLE_ZERO_RELATIVE_GAP`]) by adding
/// their weights.
pub fn merge_poles(l: &RationalSum) -> Result<RationalSum> {
    let merged = merge_multiple(l.poles());
    if merged.len() == l.len() {
        return Ok(l.clone());
    }
    let mut weights = Vec::with_capacity(merged.len());
    for &(c, _) in &merged {
        let gap = MULTIPLE_ZERO_RELATIVE_GAP * (1.0 + c.norm());
        let w = l
            .poles()
            .iter()
            .zip(l.weights())
            .filter(|(p, _)| (*p - c).norm() <= gap)
            .map(|(_, &w)| w)
            .sum();
        weights.push(w);
    }
    RationalSum::new(weights, merged.iter().map(|&(c, _)| c).collect())
}

/// Finite zeros of a rational sum. Coincident poles are merged (weights
/// added) first; the result has `d - 1` atoms for `d` distinct poles when the
/// total weight is nonzero.
pub fn rational_zeros(l: &RationalSum, tol: f64) -> Result<RootFindReport> {
    let l = merge_poles(l)?;
    if l.len() < 2 {
        return Ok(RootFindReport {
            roots: RootSet::default(),
            iterations: 0,
            max_residual: 0.0,
            residuals: vec![],
            converged: vec![],
        });
    }
    solve(&l, tol, DEFAULT_MAX_ITER)
}

#[derive(Clone, Copy, Default)]
struct Sums {
    s1: Complex,
    s2: Complex,
    t1: Complex,
    abs1: f64,
}

impl Add for Sums {
    type Output = Sums;
    fn add(self, o: Sums) -> Sums {
        Sums {
            s1: self.s1 + o.s1,
            s2: self.s2 + o.s2,
            t1: self.t1 + o.t1,
            abs1: self.abs1 + o.abs1,
        }
    }
}

fn sums(l: &RationalSum, z: Complex) -> Sums {
    let (w, p) = (l.weights(), l.poles());
    pairwise_sum(p.len(), |k| {
        let inv = (z - p[k]).inv();
        let t = w[k] * inv;
        Sums {
            s1: t,
            s2: t * inv,
            t1: inv,
            abs1: t.norm(),
        }
    })
}

/// Evaluation noise of `S1` relative to `Σ|a|/|z - c|`.
fn noise_level(d: usize) -> f64 {
    4.0 * ((d as f64).log2() + 4.0) * UNIT_ROUNDOFF
}

struct Probe {
    ratio: Complex,
    backward: f64,
    forward: f64,
}

/// [`sums`] accumulated in double-double; `z` is exact, so `z - c` is too.
fn sums_precise(l: &RationalSum, z: Complex) -> Sums {
    let (w, p) = (l.weights(), l.poles());
    let (mut s1, mut s2, mut t1) = (DdComplex::ZERO, DdComplex::ZERO, DdComplex::ZERO);
    let mut abs1 = 0.0;
    for k in 0..p.len() {
        let inv = DdComplex::diff(z, p[k]).inv();
        let t = inv.mul_f64c(w[k]);
        s1 = s1.add(t);
        s2 = s2.add(t.mul(inv));
        t1 = t1.add(inv);
        abs1 += w[k].norm() * inv.to_complex().norm();
    }
    Sums {
        s1: s1.to_complex(),
        s2: s2.to_complex(),
        t1: t1.to_complex(),
        abs1,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Precision {
    Double,
    DoubleDouble,
}

impl Precision {
    fn noise(self, d: usize) -> f64 {
        match self {
            Precision::Double => noise_level(d),
            Precision::DoubleDouble => noise_level(d) * UNIT_ROUNDOFF,
        }
    }
}

fn probe(l: &RationalSum, z: Complex, noise: f64, precision: Precision) -> Probe {
    let s = match precision {
        Precision::Double => sums(l, z),
        Precision::DoubleDouble => sums_precise(l, z),
    };
    let ratio = s.s1 / (s.s1 * s.t1 - s.s2);
    let backward = if s.abs1 > 0.0 { s.s1.norm() / s.abs1 } else { 0.0 };
    let forward = noise * s.abs1 / s.s2.norm();
    Probe {
        ratio,
        backward,
        forward,
    }
}

fn initial_guesses(l: &RationalSum) -> Vec<Complex> {
    let poles = l.poles();
    let d = poles.len();
    let centroid = pairwise_sum(d, |k| poles[k]) / d as f64;
    let mut idx: Vec<usize> = (0..d).collect();
    // drop the pole farthest from the centroid: d - 1 guesses for d - 1 zeros
    idx.sort_by(|&a, &b| {
        (poles[a] - centroid)
            .norm()
            .partial_cmp(&(poles[b] - centroid).norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    idx.truncate(d - 1);
    idx.sort_unstable();
    let twist = Complex::from_polar(1.0, 0.1);
    idx.into_iter()
        .map(|k| {
            let c = poles[k];
            let nearest = poles
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &p)| (p - c).norm())
                .fold(f64::INFINITY, f64::min);
            let to_centre = centroid - c;
            let step = if to_centre.norm() > 0.0 {
                let len = (to_centre.norm() / d as f64).min(0.5 * nearest);
                to_centre / to_centre.norm() * len
            } else {
                Complex::new(0.5 * nearest, 0.0)
            };
            c + step * twist
        })
        .collect()
}

fn circle_guesses(l: &RationalSum) -> Vec<Complex> {
    let poles = l.poles();
    let d = poles.len();
    let centroid = pairwise_sum(d, |k| poles[k]) / d as f64;
    let radius = pairwise_sum(d, |k| (poles[k] - centroid).norm()) / d as f64;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    (0..d - 1)
        .map(|k| {
            centroid
                + Complex::from_polar(
                    radius,
                    std::f64::consts::TAU * k as f64 / (d - 1) as f64 + 0.7,
                )
        })
        .collect()
}

fn solve(l: &RationalSum, tol: f64, max_iter: usize) -> Result<RootFindReport> {
    let d = l.len();
    let double = Precision::Double;
    let first = iterate(l, initial_guesses(l), vec![false; d - 1], tol, max_iter, double);
    let mut report = if first.all_converged() {
        first
    } else {
        let second = iterate(l, circle_guesses(l), vec![false; d - 1], tol, max_iter, double);
        if second.unconverged() < first.unconverged() {
            second
        } else {
            first
        }
    };
    // an approximation can stall inside the noise disc of a multiple zero
    // that already has its full share; restart those from the outer circle
    let mut clusters = refine_clusters(l, &mut report);
    for _ in 0..3 {
        if clusters.excess.is_empty() {
            break;
        }
        let restart = circle_guesses(l);
        let mut z = report.roots.0.clone();
        let mut frozen = vec![true; z.len()];
        for (k, &i) in clusters.excess.iter().enumerate() {
            z[i] = restart[(k * 7 + 3) % restart.len()];
            frozen[i] = false;
        }
        let iterations = report.iterations;
        report = iterate(l, z, frozen, tol, max_iter, double);
        report.iterations += iterations;
        clusters = refine_clusters(l, &mut report);
    }
    let settled = !clusters.unresolved && clusters.excess.is_empty() && report.all_converged();
    if !(settled && trace_ok(l, &report.roots)) {
        log::debug!("polishing {} zeros in double-double", report.roots.len());
        let z = spread_coincident(l, report.roots.0.clone());
        let iterations = report.iterations;
        report = iterate(l, z, vec![false; d - 1], tol, max_iter, Precision::DoubleDouble);
        report.iterations += iterations;
    }
    if report.all_converged() {
        Ok(report)
    } else {
        Err(Error::DidNotConverge(Box::new(report)))
    }
}

/// The zeros of `L` sum to `Σ c_k - Σ a_k c_k / Σ a_k`; checks the computed
/// ones against that.
fn trace_ok(l: &RationalSum, roots: &[Complex]) -> bool {
    let (w, p) = (l.weights(), l.poles());
    let total = pairwise_sum(w.len(), |k| w[k]);
    let total_abs = pairwise_sum(w.len(), |k| w[k].norm());
    if total.norm() <= 1e-12 * total_abs {
        return true;
    }
    let moment = pairwise_sum(p.len(), |k| w[k] * p[k]);
    let expected = pairwise_sum(p.len(), |k| p[k]) - moment / total;
    let computed = pairwise_sum(roots.len(), |k| roots[k]);
    let scale = pairwise_sum(p.len(), |k| w[k].norm() * p[k].norm()) / total.norm();
    (computed - expected).norm() <= TRACE_TOL * roots.len().max(1) as f64 * scale.max(f64::MIN_POSITIVE)
}

/// Moves coincident approximations apart so the Aberth sums stay finite.
fn spread_coincident(l: &RationalSum, mut z: Vec<Complex>) -> Vec<Complex> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].re.total_cmp(&z[b].re).then(z[a].im.total_cmp(&z[b].im)));
    let mut start = 0;
    while start < order.len() {
        let c = z[order[start]];
        let mut end = start + 1;
        while end < order.len() && z[order[end]] == c {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let nearest = l.poles().iter().map(|p| (p - c).norm()).fold(f64::INFINITY, f64::min);
            let rho = 0.25 * nearest;
            for (k, &i) in order[start..end].iter().enumerate() {
                z[i] = c + Complex::from_polar(rho, std::f64::consts::TAU * k as f64 / m as f64 + 0.3);
            }
        }
        start = end;
    }
    z
}

/// Aberth sweeps over the approximations not marked `done`; the others stay
/// fixed but still take part in the implicit deflation.
fn iterate(
    l: &RationalSum,
    mut z: Vec<Complex>,
    mut done: Vec<bool>,
    tol: f64,
    max_iter: usize,
    precision: Precision,
) -> RootFindReport {
    let m = z.len();
    let noise = precision.noise(l.len());
    let mut iterations = 0;
    let one = Complex::new(1.0, 0.0);
    while iterations < max_iter && done.iter().any(|&c| !c) {
        iterations += 1;
        let step = |i: usize| -> (Complex, bool) {
            if done[i] {
                return (z[i], true);
            }
            let zi = z[i];
            let pr = probe(l, zi, noise, precision);
            if pr.backward <= noise {
                return (zi, true);
            }
            let mut sum = Complex::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    sum += (zi - zj).inv();
                }
            }
            let mut w = pr.ratio / (one - pr.ratio * sum);
            if !w.is_finite() {
                w = Complex::from_polar(1e-3 * (1.0 + zi.norm()), i as f64);
            }
            let next = zi - w;
            (next, w.norm() <= tol * (1.0 + next.norm()))
        };
        let updates: Vec<(Complex, bool)> = if m >= PARALLEL_THRESHOLD {
            (0..m).into_par_iter().map(step).collect()
        } else {
            (0..m).map(step).collect()
        };
        for (i, (zi, ok)) in updates.into_iter().enumerate() {
            // an iterate landing exactly on a pole would poison every sum
            z[i] = if l.poles().contains(&zi) {
                zi + Complex::new(1e-9 * (1.0 + zi.norm()), 0.0)
            } else {
                zi
            };
            done[i] = ok;
        }
    }
    let residuals: Vec<f64> = z.iter().map(|&zi| probe(l, zi, noise, precision).backward).collect();
    RootFindReport {
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        roots: RootSet::new(z),
        iterations,
        residuals,
        converged: done,
    }
}

/// `Σ a_k (c - z_k)^{-j}` and `Σ |a_k| |c - z_k|^{-j}`.
fn power_sum(l: &RationalSum, c: Complex, j: i32) -> (Complex, f64) {
    let (w, p) = (l.weights(), l.poles());
    let s = pairwise_sum(p.len(), |k| (c - p[k]).inv().powi(j) * w[k]);
    let a = pairwise_sum(p.len(), |k| w[k].norm() * (c - p[k]).norm().powi(-j));
    (s, a)
}

/// Outcome of [`refine_clusters`].
struct Clusters {
    /// Ring members beyond the confirmed order, to be iterated again.
    excess: Vec<usize>,
    /// Some ring could not be resolved to a multiple zero.
    unresolved: bool,
}

/// `Σ a_k (c - z_k)^{-j}` vanishes for `j = 1..=mu`. Powers are built up
/// incrementally and rescaled each step, since only the ratio to
/// `Σ |a_k| |c - z_k|^{-j}` matters.
fn vanishes(l: &RationalSum, c: Complex, mu: usize) -> bool {
    let (w, p) = (l.weights(), l.poles());
    if p.contains(&c) {
        return false;
    }
    let inv: Vec<Complex> = p.iter().map(|&pk| (c - pk).inv()).collect();
    let mut pw: Vec<Complex> = w.to_vec();
    for _ in 0..mu {
        let mut big: f64 = 0.0;
        for (x, &q) in pw.iter_mut().zip(&inv) {
            *x *= q;
            big = big.max(x.norm());
        }
        if !(big > 0.0 && big.is_finite()) {
            return false;
        }
        let (mut s, mut a) = (Complex::new(0.0, 0.0), 0.0);
        for x in pw.iter_mut() {
            *x /= big;
            s += *x;
            a += x.norm();
        }
        if s.norm() > POWER_SUM_TOL * a {
            return false;
        }
    }
    true
}

/// Replaces rings of noise-limited approximations by an exact multiple zero
/// when the power-sum test confirms it. The order is scanned upward from the
/// ring size, since a ring can miss members; the closest approximations are
/// then snapped to the centre and leftover ring members are reported.
fn refine_clusters(l: &RationalSum, report: &mut RootFindReport) -> Clusters {
    let noise = noise_level(l.len());
    let z = &report.roots;
    let suspects: Vec<usize> = (0..z.len())
        .filter(|&i| {
            let pr = probe(l, z[i], noise, Precision::Double);
            !(pr.forward <= SUSPECT_FORWARD_ERROR * (1.0 + z[i].norm()))
        })
        .collect();
    let mut out = Clusters {
        excess: vec![],
        unresolved: false,
    };
    if suspects.len() < 2 {
        return out;
    }

    // single-linkage grouping at a few times the typical suspect spacing
    let nn: Vec<f64> = suspects
        .iter()
        .map(|&i| {
            suspects
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (z[i] - z[j]).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut sorted_nn = nn.clone();
    sorted_nn.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let threshold = 3.0 * sorted_nn[sorted_nn.len() / 2];
    let mut group = vec![usize::MAX; suspects.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for s in 0..suspects.len() {
        if group[s] != usize::MAX {
            continue;
        }
        let g = groups.len();
        group[s] = g;
        let mut stack = vec![s];
        let mut members = vec![];
        while let Some(a) = stack.pop() {
            members.push(suspects[a]);
            for b in 0..suspects.len() {
                if group[b] == usize::MAX && (z[suspects[a]] - z[suspects[b]]).norm() <= threshold {
                    group[b] = g;
                    stack.push(b);
                }
            }
        }
        groups.push(members);
    }

    let mut snapped = vec![false; report.roots.len()];
    for members in groups {
        let members: Vec<usize> = members.into_iter().filter(|&i| !snapped[i]).collect();
        if members.len() < 2 {
            continue;
        }
        let centroid =
            members.iter().map(|&i| report.roots[i]).sum::<Complex>() / members.len() as f64;
        let confirmed = (2..=members.len()).rev().find_map(|mu| {
            let centre = refine_centre(l, centroid, mu as i32)?;
            vanishes(l, centre, mu).then_some((mu, centre))
        });
        let Some((mut mu, mut centre)) = confirmed else {
            out.unresolved = true;
            continue;
        };
        let cap = snapped.iter().filter(|&&s| !s).count();
        if vanishes(l, centre, cap + 1) {
            // the order is not determined in double precision
            out.unresolved = true;
            continue;
        }
        while mu < cap {
            match refine_centre(l, centre, mu as i32 + 1) {
                Some(next) if vanishes(l, next, mu + 1) => {
                    mu += 1;
                    centre = next;
                }
                _ => break,
            }
        }
        log::debug!("merged {mu} approximations into a multiple zero at {centre}");
        let mut nearest: Vec<usize> = (0..report.roots.len()).filter(|&i| !snapped[i]).collect();
        nearest.sort_by(|&a, &b| {
            (report.roots[a] - centre)
                .norm()
                .total_cmp(&(report.roots[b] - centre).norm())
        });
        for &i in &nearest[..mu] {
            report.roots[i] = centre;
            report.converged[i] = true;
            report.residuals[i] = 0.0;
            snapped[i] = true;
        }
        out.excess.extend(members.iter().filter(|&&i| !snapped[i]));
    }
    out.excess.retain(|&i| !snapped[i]);
    report.max_residual = report.residuals.iter().cloned().fold(0.0, f64::max);
    out
}

/// Newton iteration on `f(c) = Σ a (c - z)^{-μ}`, whose simple zero is the
/// centre of a `μ`-fold zero of `L`.
fn refine_centre(l: &RationalSum, start: Complex, mu: i32) -> Option<Complex> {
    let mut c = start;
    for _ in 0..50 {
        if l.poles().contains(&c) {
            return None;
        }
        let (f, _) = power_sum(l, c, mu);
        let (g, _) = power_sum(l, c, mu + 1);
        let df = g * (-(mu as f64));
        if df.norm() == 0.0 {
            return Some(c);
        }
        let step = f / df;
        if !step.is_finite() {
            return None;
        }
        c -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + c.norm()) {
            break;
        }
    }
    (c - start).norm().is_finite().then_some(c)
}
