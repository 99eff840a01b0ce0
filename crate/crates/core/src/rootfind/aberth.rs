use std::f64::consts::PI;

use num_complex::Complex64 as Complex;
use rayon::prelude::*;

use super::RootFindReport;
use crate::polycore::UNIT_ROUNDOFF;
use crate::{Error, Polynomial, Result, RootSet};

/// Root counts at or above this run the per-root sweep on the rayon pool.
pub(crate) const PARALLEL_THRESHOLD: usize = 96;

const ANGLE_OFFSET: f64 = 0.7;

/// Starting points on circles read off the upper convex hull of
/// `(k, log|a_k|)`: each hull edge from `i` to `j` contributes `j - i` points on
/// the circle of radius `(|a_i|/|a_j|)^(1/(j-i))`.
///
/// Requires `a_0 != 0`, `a_d != 0`.
pub fn bini_initial_guesses(coeffs: &[Complex]) -> Vec<Complex> {
    let d = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord a -> p
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(d);
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let m = j - i;
        let radius = ((li - lj) / m as f64).exp();
        for l in 0..m {
            let theta = 2.0 * PI * l as f64 / m as f64 + 2.0 * PI * i as f64 / d as f64 + ANGLE_OFFSET;
            guesses.push(Complex::from_polar(radius, theta));
        }
    }
    guesses
}

/// Newton ratio `p/p'`, plus the backward-error ratio `|p(z)| / Σ|a_k||z|^k`.
/// For `|z| > 1` the reversed polynomial is used so nothing overflows.
fn newton_ratio(coeffs: &[Complex], z: Complex) -> (Complex, f64) {
    let d = coeffs.len() - 1;
    let zero = Complex::new(0.0, 0.0);
    if z.norm() <= 1.0 {
        let r = z.norm();
        let (mut p, mut dp, mut abs) = (zero, zero, 0.0);
        for &a in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
            abs = abs * r + a.norm();
        }
        (p / dp, p.norm() / abs)
    } else {
        let y = z.inv();
        let r = y.norm();
        let (mut p, mut dp, mut abs) = (zero, zero, 0.0);
        for &a in coeffs.iter() {
            dp = dp * y + p;
            p = p * y + a;
            abs = abs * r + a.norm();
        }
        // p(z) = z^d rev(y), p'(z) = z^(d-1) (d rev(y) - y rev'(y))
        (z * p / (p * d as f64 - y * dp), p.norm() / abs)
    }
}

/// All zeros of `p` by the Aberth–Ehrlich iteration.
///
/// Each sweep updates every unconverged approximation from the previous
/// sweep's values (Jacobi style), so the sweep can run in parallel. A root is
/// frozen once its correction is below `tol * (1 + |z|)` or once `p(z)` is
/// indistinguishable from zero in floating point.
pub fn aberth_roots(p: &Polynomial, tol: f64, max_iter: usize) -> Result<RootFindReport> {
    let d = p.degree();
    if d == 0 || p.is_zero() {
        return Err(Error::InvalidPolynomial(
            "root finding needs degree >= 1".into(),
        ));
    }
    let zero = Complex::new(0.0, 0.0);
    let coeffs = p.coeffs();
    let shift = coeffs.iter().take_while(|&&c| c == zero).count();
    let reduced = &coeffs[shift..];
    let m = d - shift;

    let mut roots = vec![zero; shift];
    let mut converged = vec![true; shift];
    let mut residuals = vec![0.0; shift];
    let mut iterations = 0;

    if m == 1 {
        roots.push(-reduced[0] / reduced[1]);
        converged.push(true);
        residuals.push(0.0);
    } else if m > 1 {
        let mut z = bini_initial_guesses(reduced);
        let mut done = vec![false; m];
        let backward_tol = 4.0 * (m as f64 + 1.0) * UNIT_ROUNDOFF;
        while iterations < max_iter && done.iter().any(|&c| !c) {
            iterations += 1;
            let step = |i: usize| -> (Complex, bool) {
                if done[i] {
                    return (z[i], true);
                }
                let zi = z[i];
                let (ratio, backward) = newton_ratio(reduced, zi);
                if backward <= backward_tol {
                    return (zi, true);
                }
                let mut sum = zero;
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        sum += (zi - zj).inv();
                    }
                }
                let mut w = ratio / (Complex::new(1.0, 0.0) - ratio * sum);
                if !w.is_finite() {
                    // derivative vanished or two approximations collided
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
                z[i] = zi;
                done[i] = ok;
            }
        }
        for (i, &zi) in z.iter().enumerate() {
            residuals.push(newton_ratio(reduced, zi).1);
            converged.push(done[i]);
            roots.push(zi);
        }
    }

    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let report = RootFindReport {
        roots: RootSet::new(roots),
        iterations,
        max_residual,
        residuals,
        converged,
    };
    if report.all_converged() {
        Ok(report)
    } else {
        Err(Error::DidNotConverge(Box::new(report)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::poly_from_roots;
    use crate::rootfind::{companion_roots, match_rootsets, DEFAULT_MAX_ITER, DEFAULT_TOL};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn quadratic() {
        let r = aberth_roots(&Polynomial::from_real(&[-1.0, 0.0, 1.0]), DEFAULT_TOL, 100).unwrap();
        let want = RootSet::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(match_rootsets(&r.roots, &want).unwrap() <= 1e-12);
    }

    #[test]
    fn unity_roots_64() {
        let mut coeffs = vec![0.0; 65];
        coeffs[0] = -1.0;
        coeffs[64] = 1.0;
        let r = aberth_roots(&Polynomial::from_real(&coeffs), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let want: RootSet = (0..64)
            .map(|k| Complex::from_polar(1.0, 2.0 * PI * k as f64 / 64.0))
            .collect();
        assert!(match_rootsets(&r.roots, &want).unwrap() <= 1e-10);
    }

    #[test]
    fn zero_roots_are_exact() {
        let r = aberth_roots(&Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]), DEFAULT_TOL, 10).unwrap();
        assert!(r.roots.iter().all(|z| *z == c(0.0, 0.0)));
        let r = aberth_roots(&Polynomial::from_real(&[0.0, 0.0, -2.0, 1.0]), DEFAULT_TOL, 50).unwrap();
        let want = RootSet::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert!(match_rootsets(&r.roots, &want).unwrap() <= 1e-14);
    }

    #[test]
    fn removed_root_polynomial_matches_companion_oracle() {
        let n = 16usize;
        let mut coeffs = vec![0.0; n + 2];
        coeffs[0] = 1.0;
        coeffs[n] = -(n as f64 + 1.0);
        coeffs[n + 1] = n as f64;
        let p = Polynomial::from_real(&coeffs);
        let a = aberth_roots(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let b = companion_roots(&p).unwrap();
        // z = 1 is a double root, so agreement there is only to ~sqrt(eps)
        let simple_a: RootSet = a.roots.iter().cloned().filter(|z| (z - 1.0).norm() > 1e-4).collect();
        let simple_b: RootSet = b.iter().cloned().filter(|z| (z - 1.0).norm() > 1e-4).collect();
        assert_eq!(simple_a.len(), n - 1);
        assert!(match_rootsets(&simple_a, &simple_b).unwrap() <= 1e-8);
        assert!(match_rootsets(&a.roots, &b).unwrap() <= 1e-6);
    }

    #[test]
    fn repeat_runs_agree() {
        let roots: RootSet = (0..100)
            .map(|k| Complex::from_polar(0.2 + 0.8 * ((k * 37 % 100) as f64 / 100.0), 2.4 * k as f64))
            .collect();
        let p = poly_from_roots(&roots);
        let a = aberth_roots(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        let b = aberth_roots(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a.roots, b.roots),
            (Err(Error::DidNotConverge(a)), Err(Error::DidNotConverge(b))) => (a.roots, b.roots),
            _ => panic!("runs disagree on convergence"),
        };
        assert!(match_rootsets(&a, &b).unwrap() <= 1e-9);
    }

    #[test]
    fn guesses_follow_coefficient_scale() {
        // roots of z^3 - 1000: radius 10
        let g = bini_initial_guesses(&[c(-1000.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(g.len(), 3);
        for z in g {
            assert!((z.norm() - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_rejected() {
        assert!(aberth_roots(&Polynomial::from_real(&[3.0]), DEFAULT_TOL, 10).is_err());
    }
}
