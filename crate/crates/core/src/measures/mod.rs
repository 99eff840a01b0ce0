//! Empirical measures and the distances used to compare them.

mod transport;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::Seed;
use crate::polycore::pairwise_sum;
use crate::{Complex, Error, Polynomial, Result, RootSet};

/// Largest `|μ|·|ν|` accepted by [`w1_exact`].
pub const W1_EXACT_MAX_PAIRS: usize = 1 << 22;

/// Scale for fixed-point supplies when weights are not uniform.
const FIXED_POINT_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<Complex>,
    weights: Vec<f64>,
    uniform: bool,
}

impl EmpiricalMeasure {
    /// Uniform weights `1/|R|`.
    pub fn from_rootset(r: &RootSet) -> Result<Self> {
        Self::uniform(r.to_vec())
    }

    pub fn uniform(atoms: Vec<Complex>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySet);
        }
        let w = 1.0 / atoms.len() as f64;
        Ok(EmpiricalMeasure {
            weights: vec![w; atoms.len()],
            atoms,
            uniform: true,
        })
    }

    /// Positive weights, normalized to total mass 1.
    pub fn weighted(atoms: Vec<Complex>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySet);
        }
        if atoms.len() != weights.len() {
            return Err(Error::SizeMismatch {
                left: atoms.len(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidSpec("weights must be positive and finite".into()));
        }
        let total = pairwise_sum(weights.len(), |k| weights[k]);
        Ok(EmpiricalMeasure {
            atoms,
            weights: weights.iter().map(|w| w / total).collect(),
            uniform: false,
        })
    }

    /// `p·μ + (1-p)·ν`.
    pub fn mixture(p: f64, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSpec("mixture weight must lie in [0, 1]".into()));
        }
        if p == 1.0 {
            return Ok(mu.clone());
        }
        if p == 0.0 {
            return Ok(nu.clone());
        }
        let atoms = mu.atoms.iter().chain(&nu.atoms).cloned().collect();
        let weights = mu
            .weights
            .iter()
            .map(|w| w * p)
            .chain(nu.weights.iter().map(|w| w * (1.0 - p)))
            .collect();
        Self::weighted(atoms, weights)
    }

    pub fn atoms(&self) -> &[Complex] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Total mass on atoms within `radius` of `z`.
    pub fn mass_near(&self, z: Complex, radius: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| (*a - z).norm() <= radius)
            .map(|(_, w)| w)
            .sum()
    }

    #[cfg(test)]
    fn translated(&self, shift: Complex) -> Self {
        EmpiricalMeasure {
            atoms: self.atoms.iter().map(|a| a + shift).collect(),
            ..self.clone()
        }
    }
}

/// Coincident atoms merged, with integer masses.
fn integer_supplies(mu: &EmpiricalMeasure, unit: impl Fn(usize) -> i64) -> (Vec<Complex>, Vec<i64>) {
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (mu.atoms[a], mu.atoms[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    let mut atoms: Vec<Complex> = Vec::new();
    let mut mass: Vec<i64> = Vec::new();
    for i in order {
        let s = unit(i);
        if s == 0 {
            continue;
        }
        if atoms.last() == Some(&mu.atoms[i]) {
            *mass.last_mut().unwrap() += s;
        } else {
            atoms.push(mu.atoms[i]);
            mass.push(s);
        }
    }
    (atoms, mass)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rounds `w·scale` to integers summing to exactly `scale`.
fn fixed_point(weights: &[f64], scale: i64) -> Vec<i64> {
    let mut s: Vec<i64> = weights.iter().map(|w| (w * scale as f64).round() as i64).collect();
    let mut diff = scale - s.iter().sum::<i64>();
    // the residual is at most a few units per atom; spread it over the largest
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].cmp(&s[a]));
    let mut k = 0;
    while diff != 0 {
        let i = order[k % order.len()];
        let step = diff.signum();
        if s[i] + step >= 0 {
            s[i] += step;
            diff -= step;
        }
        k += 1;
    }
    s
}

/// Exact Wasserstein-1 distance by min-cost flow on the complete bipartite
/// graph.
///
/// Two uniform measures get integer supplies `L/|μ|` and `L/|ν|` with
/// `L = lcm(|μ|, |ν|)`, so the result is exact up to rounding of the costs.
/// Otherwise weights are rounded to multiples of `2^-40`; the total
/// rounding is at most `(|μ| + |ν|)·2^-40` of mass, far below `1e-9`.
pub fn w1_exact(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    let pairs = mu.len().saturating_mul(nu.len());
    if pairs > W1_EXACT_MAX_PAIRS {
        return Err(Error::TooLarge {
            pairs,
            limit: W1_EXACT_MAX_PAIRS,
        });
    }
    let ((a, sa), (b, sb), scale) = if mu.uniform && nu.uniform {
        let (m, n) = (mu.len() as u64, nu.len() as u64);
        let l = m / gcd(m, n) * n;
        (
            integer_supplies(mu, |_| (l / m) as i64),
            integer_supplies(nu, |_| (l / n) as i64),
            l as f64,
        )
    } else {
        let scale = FIXED_POINT_SCALE as i64;
        let fa = fixed_point(&mu.weights, scale);
        let fb = fixed_point(&nu.weights, scale);
        (
            integer_supplies(mu, |i| fa[i]),
            integer_supplies(nu, |i| fb[i]),
            FIXED_POINT_SCALE,
        )
    };
    if a.len() == 1 || b.len() == 1 {
        // a point mass moves everything straight to it
        let (pt, atoms, mass) = if a.len() == 1 { (a[0], &b, &sb) } else { (b[0], &a, &sa) };
        let total = pairwise_sum(atoms.len(), |k| mass[k] as f64 * (atoms[k] - pt).norm());
        return Ok(total / scale);
    }
    Ok(transport::transport_cost(&a, &sa, &b, &sb) / scale)
}

/// 1-D Wasserstein-1 between weighted point sets: `∫ |F - G| dx`.
fn w1_line(x: &mut [(f64, f64)], y: &mut [(f64, f64)]) -> f64 {
    x.sort_by(|p, q| p.0.total_cmp(&q.0));
    y.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut i, mut j) = (0, 0);
    let (mut f, mut g) = (0.0f64, 0.0f64);
    let mut last = x[0].0.min(y[0].0);
    let mut acc = 0.0;
    while i < x.len() || j < y.len() {
        let take_x = j == y.len() || (i < x.len() && x[i].0 <= y[j].0);
        let pos = if take_x { x[i].0 } else { y[j].0 };
        acc += (f - g).abs() * (pos - last);
        last = pos;
        if take_x {
            f += x[i].1;
            i += 1;
        } else {
            g += y[j].1;
            j += 1;
        }
    }
    acc
}

/// Average over `n_projections` random directions of the 1-D Wasserstein-1
/// distance between the projected measures.
pub fn w1_sliced(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, n_projections: usize, seed: Seed) -> Result<f64> {
    if n_projections == 0 {
        return Err(Error::InvalidSpec("need at least one projection".into()));
    }
    let mut rng = seed.rng();
    let angles: Vec<f64> = (0..n_projections).map(|_| PI * rng.random::<f64>()).collect();
    let project = |m: &EmpiricalMeasure, d: Complex| -> Vec<(f64, f64)> {
        m.atoms
            .iter()
            .zip(&m.weights)
            .map(|(z, &w)| (z.re * d.re + z.im * d.im, w))
            .collect()
    };
    let total = pairwise_sum(angles.len(), |k| {
        let d = Complex::from_polar(1.0, angles[k]);
        w1_line(&mut project(mu, d), &mut project(nu, d))
    });
    Ok(total / n_projections as f64)
}

/// `sup` over arcs `[θ, φ)` of `|μ(arc) - (φ - θ)/2π|`.
///
/// With `G(x) = μ{arg < 2πx} - x` every arc, wrapping or not, has discrepancy
/// `G(φ) - G(θ)`, so the supremum is `sup G - inf G`. Over sorted distinct
/// angles `x_k` with cumulative masses `F_k` this is
/// `max_k (F_k - x_k) - min_k (F_{k-1} - x_k)`.
pub fn angular_discrepancy(mu: &EmpiricalMeasure) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(mu.len());
    for (z, &w) in mu.atoms.iter().zip(&mu.weights) {
        if z.norm() == 0.0 {
            return Err(Error::AtomAtOrigin);
        }
        pts.push((turns(*z), w));
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    let mut cum = 0.0;
    let mut k = 0;
    while k < pts.len() {
        let x = pts[k].0;
        lo = lo.min(cum - x);
        while k < pts.len() && pts[k].0 == x {
            cum += pts[k].1;
            k += 1;
        }
        hi = hi.max(cum - x);
    }
    Ok(hi - lo)
}

/// Argument as a fraction of a turn in `[0, 1)`.
fn turns(z: Complex) -> f64 {
    let t = z.im.atan2(z.re) / TAU;
    if t < 0.0 {
        let s = t + 1.0;
        if s < 1.0 {
            s
        } else {
            0.0
        }
    } else {
        t
    }
}

/// `(C/N) · log(Σ|a_k| / sqrt(|a_0 a_N|))`.
pub fn erdos_turan_rhs(p: &Polynomial, c: f64) -> Result<f64> {
    let a = p.coeffs();
    let n = p.degree();
    if n == 0 || a[0].norm() == 0.0 || a[n].norm() == 0.0 {
        return Err(Error::ZeroEndCoefficient);
    }
    let total = pairwise_sum(a.len(), |k| a[k].norm());
    let log_ratio = total.ln() - 0.5 * (a[0].norm().ln() + a[n].norm().ln());
    Ok(c / n as f64 * log_ratio)
}

/// `Σ w_k log|z - a_k|`, `-∞` at an atom.
pub fn log_potential(mu: &EmpiricalMeasure, z: Complex) -> f64 {
    if mu.atoms.contains(&z) {
        return f64::NEG_INFINITY;
    }
    pairwise_sum(mu.len(), |k| mu.weights[k] * (z - mu.atoms[k]).norm().ln())
}

/// Lattice `corner + (i·spacing, j·spacing)` for `i < nx`, `j < ny`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub corner: Complex,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Square `[-half, half]²` with `count` nodes per side.
    pub fn square(half: f64, count: usize) -> Self {
        let count = count.max(2);
        Grid {
            corner: Complex::new(-half, -half),
            spacing: 2.0 * half / (count - 1) as f64,
            nx: count,
            ny: count,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `k` in row-major order.
    pub fn node(&self, k: usize) -> Complex {
        let (i, j) = (k % self.nx, k / self.nx);
        self.corner + Complex::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Nodes at distance `≥ 2·spacing` from every atom.
    pub fn default_mask(&self, atoms: &[Complex]) -> Vec<bool> {
        let h = 2.0 * self.spacing;
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let z = self.node(k);
                atoms.iter().all(|a| (z - a).norm() >= h)
            })
            .collect()
    }

    pub fn mask_where(&self, keep: impl Fn(Complex) -> bool + Sync) -> Vec<bool> {
        (0..self.len()).into_par_iter().map(|k| keep(self.node(k))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn from_fn(grid: Grid, f: impl Fn(Complex) -> f64 + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|k| f(grid.node(k))).collect();
        GridField { grid, values }
    }
}

/// [`log_potential`] at every node, evaluated in parallel.
pub fn potential_field(mu: &EmpiricalMeasure, grid: Grid) -> GridField {
    GridField::from_fn(grid, |z| log_potential(mu, z))
}

/// `sup` over masked nodes of `|F1 - F2|`. Nodes where either field is
/// infinite must be masked out.
pub fn field_sup_distance(f1: &GridField, f2: &GridField, mask: &[bool]) -> Result<f64> {
    if f1.grid != f2.grid || mask.len() != f1.values.len() || f2.values.len() != mask.len() {
        return Err(Error::GridMismatch);
    }
    let mut sup: f64 = 0.0;
    for k in 0..mask.len() {
        if mask[k] {
            sup = sup.max((f1.values[k] - f2.values[k]).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::bit_reversed_circle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn unif(z: &[Complex]) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform(z.to_vec()).unwrap()
    }

    fn unity(n: usize) -> Vec<Complex> {
        (0..n).map(|k| Complex::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex> {
        (0..n).map(|_| c(rng.random(), rng.random())).collect()
    }

    /// Exact W1 for equal-size uniform measures: an assignment problem,
    /// solved by brute force over permutations.
    fn brute_assignment(a: &[Complex], b: &[Complex]) -> f64 {
        fn rec(a: &[Complex], b: &[Complex], used: &mut [bool], i: usize, cur: f64, best: &mut f64) {
            if i == a.len() {
                *best = best.min(cur);
                return;
            }
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(a, b, used, i + 1, cur + (a[i] - b[j]).norm(), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
        best / a.len() as f64
    }

    #[test]
    fn from_rootset_examples() {
        assert!(matches!(EmpiricalMeasure::from_rootset(&RootSet::default()), Err(Error::EmptySet)));
        let m = EmpiricalMeasure::from_rootset(&RootSet::new(vec![c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let cp = crate::rootfind::critical_points(&RootSet::new(unity(8)), 1e-12).unwrap();
        let m = EmpiricalMeasure::from_rootset(&cp.roots).unwrap();
        assert_eq!(m.len(), 7);
        assert!((m.mass_near(c(0.0, 0.0), 1e-12) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w1_examples() {
        let a = unif(&[c(0.3, 0.1), c(-1.0, 2.0)]);
        assert_eq!(w1_exact(&a, &a).unwrap(), 0.0);
        assert_eq!(w1_exact(&unif(&[c(0.0, 0.0)]), &unif(&[c(1.0, 0.0)])).unwrap(), 1.0);
        let r = w1_exact(&unif(&[c(0.0, 0.0), c(1.0, 0.0)]), &unif(&[c(0.0, 0.0)])).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w1_matches_brute_force_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=7 {
            for _ in 0..10 {
                let a = random_cloud(&mut rng, n);
                let b = random_cloud(&mut rng, n);
                let got = w1_exact(&unif(&a), &unif(&b)).unwrap();
                let want = brute_assignment(&a, &b);
                assert!((got - want).abs() <= 1e-12, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn w1_unequal_sizes_match_replicated_assignment() {
        // replicating atoms L/m and L/n times turns it into an assignment problem
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = random_cloud(&mut rng, 2);
            let b = random_cloud(&mut rng, 3);
            let ra: Vec<Complex> = a.iter().flat_map(|&z| [z; 3]).collect();
            let rb: Vec<Complex> = b.iter().flat_map(|&z| [z; 2]).collect();
            let got = w1_exact(&unif(&a), &unif(&b)).unwrap();
            let want = brute_assignment(&ra, &rb);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn w1_weighted_matches_uniform_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_cloud(&mut rng, 12);
        let b = random_cloud(&mut rng, 9);
        let exact = w1_exact(&unif(&a), &unif(&b)).unwrap();
        let wa = EmpiricalMeasure::weighted(a.clone(), vec![2.0; 12]).unwrap();
        let wb = EmpiricalMeasure::weighted(b.clone(), vec![0.5; 9]).unwrap();
        let got = w1_exact(&wa, &wb).unwrap();
        assert!((got - exact).abs() <= 1e-9, "{got} vs {exact}");
    }

    #[test]
    fn w1_metric_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let sizes: Vec<usize> = (0..3).map(|_| rng.random_range(1..=20)).collect();
            let m: Vec<EmpiricalMeasure> = sizes.iter().map(|&s| unif(&random_cloud(&mut rng, s))).collect();
            let d01 = w1_exact(&m[0], &m[1]).unwrap();
            let d10 = w1_exact(&m[1], &m[0]).unwrap();
            let d12 = w1_exact(&m[1], &m[2]).unwrap();
            let d02 = w1_exact(&m[0], &m[2]).unwrap();
            assert!((d01 - d10).abs() <= 1e-12);
            assert!(d02 <= d01 + d12 + 1e-9);
        }
    }

    #[test]
    fn w1_large_uniform_circle() {
        // 1023 critical atoms at 0 vs a 4096-atom circle: every unit of mass moves 1
        let zeros = vec![c(0.0, 0.0); 1023];
        let r = w1_exact(&unif(&zeros), &unif(&bit_reversed_circle(4096))).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // a rotated copy of a circle: the identity shift is optimal
        let a = unity(512);
        let b: Vec<Complex> = a.iter().map(|z| z * Complex::from_polar(1.0, 0.3 * TAU / 512.0)).collect();
        let want = 2.0 * (0.3 * PI / 512.0).sin();
        let got = w1_exact(&unif(&a), &unif(&b)).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn w1_too_large() {
        let a = unif(&vec![c(0.0, 0.0); 4097]);
        let b = unif(&bit_reversed_circle(1024));
        assert!(matches!(w1_exact(&a, &b), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn sliced_examples_and_bounds() {
        let a = unif(&[c(0.0, 0.0)]);
        let b = unif(&[c(1.0, 0.0)]);
        assert_eq!(w1_sliced(&a, &a, 10, Seed(1)).unwrap(), 0.0);
        let s = w1_sliced(&a, &b, 20_000, Seed(1)).unwrap();
        assert!((0.0..=1.0).contains(&s));
        assert!((s - 2.0 / PI).abs() < 0.01, "{s}");

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let x = unif(&random_cloud(&mut rng, 100));
            let y = unif(&random_cloud(&mut rng, 100));
            let exact = w1_exact(&x, &y).unwrap();
            let sliced = w1_sliced(&x, &y, 64, Seed(2)).unwrap();
            assert!(sliced <= exact + 1e-12);
            assert!(sliced * PI / 2.0 <= exact * (1.0 + 1e-9) + 1e-12);
        }
    }

    /// Brute force over arcs with endpoints at the atoms and just past them.
    fn brute_discrepancy(z: &[Complex]) -> f64 {
        let n = z.len() as f64;
        let t: Vec<f64> = z.iter().map(|&w| turns(w)).collect();
        let mut ends: Vec<f64> = Vec::new();
        for &x in &t {
            ends.push(x);
            ends.push((x + 1e-12) % 1.0);
        }
        let mut best: f64 = 0.0;
        for &a in &ends {
            for &b in &ends {
                let len = (b - a).rem_euclid(1.0);
                let inside = t.iter().filter(|&&x| (x - a).rem_euclid(1.0) < len).count() as f64;
                best = best.max((inside / n - len).abs());
            }
        }
        best
    }

    #[test]
    fn discrepancy_examples() {
        let d = angular_discrepancy(&unif(&unity(8))).unwrap();
        assert!((d - 0.125).abs() < 1e-12);
        assert!((brute_discrepancy(&unity(8)) - 0.125).abs() < 1e-9);
        assert!((angular_discrepancy(&unif(&[c(0.0, 2.0)])).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(angular_discrepancy(&unif(&[c(0.0, 0.0)])), Err(Error::AtomAtOrigin)));
        let d = angular_discrepancy(&unif(&bit_reversed_circle(256))).unwrap();
        assert!(d <= 16.0 * 256f64.ln() / 256.0);
    }

    #[test]
    fn discrepancy_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..40 {
            let mut z: Vec<Complex> = (0..n).map(|_| Complex::from_polar(1.0 + rng.random::<f64>(), TAU * rng.random::<f64>())).collect();
            if n > 3 {
                z[1] = z[0] * 2.0; // a repeated angle
            }
            let fast = angular_discrepancy(&unif(&z)).unwrap();
            let slow = brute_discrepancy(&z);
            assert!((fast - slow).abs() < 1e-9, "n={n}: {fast} vs {slow}");
        }
    }

    #[test]
    fn discrepancy_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z: Vec<Complex> = (0..300).map(|_| Complex::from_polar(1.0, TAU * rng.random::<f64>())).collect();
        let d = angular_discrepancy(&unif(&z)).unwrap();
        for k in 1..4 {
            let rot = Complex::from_polar(1.0, 1.234 * k as f64);
            let r: Vec<Complex> = z.iter().map(|w| w * rot).collect();
            assert!((angular_discrepancy(&unif(&r)).unwrap() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_circle_discrepancy_is_small() {
        use crate::ensembles::{generate, EnsembleSpec, Law};
        let spec = EnsembleSpec::Iid { law: Law::UniformCircle };
        let seeds = 200;
        let good = (0..seeds)
            .filter(|&s| {
                let g = generate(&spec, 4096, Seed(9).derive(s)).unwrap();
                angular_discrepancy(&unif(g.zeros().unwrap())).unwrap() <= 0.05
            })
            .count();
        assert!(good as f64 >= 0.99 * seeds as f64);
    }

    #[test]
    fn erdos_turan_examples() {
        let n = 10;
        let mut a = vec![0.0; n + 1];
        a[0] = -1.0;
        a[n] = 1.0;
        let p = Polynomial::from_real(&a);
        assert!((erdos_turan_rhs(&p, 1.0).unwrap() - 2f64.ln() / n as f64).abs() < 1e-15);
        assert!((erdos_turan_rhs(&p, 2.0).unwrap() - 2.0 * erdos_turan_rhs(&p, 1.0).unwrap()).abs() < 1e-15);

        let n = 1024usize;
        let mut a = vec![0.0; n + 2];
        a[0] = 1.0;
        a[n] = -(n as f64 + 1.0);
        a[n + 1] = n as f64;
        let p = Polynomial::from_real(&a);
        let want = ((2.0 * n as f64 + 2.0) / (n as f64).sqrt()).ln() / (n as f64 + 1.0);
        assert!((erdos_turan_rhs(&p, 1.0).unwrap() - want).abs() < 1e-15);
        assert!(matches!(
            erdos_turan_rhs(&Polynomial::from_real(&[0.0, 1.0, 1.0]), 1.0),
            Err(Error::ZeroEndCoefficient)
        ));
    }

    #[test]
    fn potential_examples() {
        let e = std::f64::consts::E;
        assert!((log_potential(&unif(&[c(0.0, 0.0)]), c(e, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(log_potential(&unif(&[c(0.0, 0.0)]), c(0.0, 0.0)), f64::NEG_INFINITY);

        let got = log_potential(&unif(&unity(64)), c(2.0, 0.0));
        let want = 2f64.ln() + (-(2f64.powi(-64))).ln_1p() / 64.0;
        assert!((got - want).abs() <= 1e-15, "{}", got - want);
    }

    #[test]
    fn circle_potential_limit() {
        let mu = unif(&bit_reversed_circle(4096));
        let grid = Grid::square(2.0, 81);
        let mask = grid.mask_where(|z| (z.norm() - 1.0).abs() >= 0.2);
        let f = potential_field(&mu, grid);
        let limit = GridField::from_fn(grid, |z| z.norm().ln().max(0.0));
        assert!(field_sup_distance(&f, &limit, &mask).unwrap() <= 5e-3);
    }

    #[test]
    fn potential_shift_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mu = unif(&random_cloud(&mut rng, 50));
        let shift = c(0.7, -1.3);
        let moved = mu.translated(shift);
        for _ in 0..20 {
            let z = c(3.0 * rng.random::<f64>(), 3.0 * rng.random::<f64>());
            assert!((log_potential(&mu, z) - log_potential(&moved, z + shift)).abs() <= 1e-12);
        }
    }

    #[test]
    fn field_distance_examples() {
        let g = Grid::square(1.0, 11);
        let d = unif(&[c(0.0, 0.0)]);
        let f = potential_field(&d, g);
        let mask = g.default_mask(d.atoms());
        assert!(!mask[60]);
        assert_eq!(field_sup_distance(&f, &f, &mask).unwrap(), 0.0);
        let other = potential_field(&d, Grid::square(1.0, 12));
        assert!(matches!(field_sup_distance(&f, &other, &mask), Err(Error::GridMismatch)));
    }
}
