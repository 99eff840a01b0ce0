//! Eigenvalues of the companion matrix by shifted Hessenberg QR.
//!
//! Only used to cross-check [`super::aberth_roots`], so it shares no code with
//! it: balancing, Givens-based single-shift QR with Wilkinson shifts and
//! deflation on small subdiagonals.

use num_complex::Complex64 as Complex;

use crate::{Error, Polynomial, Result, RootSet};

pub const COMPANION_MAX_DEGREE: usize = 64;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

pub fn companion_roots(p: &Polynomial) -> Result<RootSet> {
    let d = p.degree();
    if d > COMPANION_MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree: d,
            limit: COMPANION_MAX_DEGREE,
        });
    }
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
    if m == 0 {
        return Ok(RootSet::new(roots));
    }
    let lead = reduced[m];
    let mut h = vec![vec![zero; m]; m];
    for j in 0..m {
        h[0][j] = -reduced[m - 1 - j] / lead;
    }
    for i in 1..m {
        h[i][i - 1] = Complex::new(1.0, 0.0);
    }
    balance(&mut h);
    let eig = hessenberg_qr(h).ok_or_else(|| {
        Error::InvalidPolynomial("companion QR failed to converge".into())
    })?;
    roots.extend(eig);
    Ok(RootSet::new(roots))
}

/// Diagonal similarity scaling (Parlett–Reinsch, powers of two).
fn balance(h: &mut [Vec<Complex>]) {
    let n = h.len();
    let radix = 2.0_f64;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j][i].l1_norm();
                    r += h[i][j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                changed = true;
                for j in 0..n {
                    h[i][j] /= f;
                }
                for row in h.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Givens rotation `[c s; -conj(s) c]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex, y: Complex) -> (f64, Complex) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn hessenberg_qr(mut h: Vec<Vec<Complex>>) -> Option<Vec<Complex>> {
    let n = h.len();
    let mut eig = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig.push(h[0][0]);
            break;
        }
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let s = h[lo - 1][lo - 1].l1_norm() + h[lo][lo].l1_norm();
            if h[lo][lo - 1].l1_norm() <= f64::EPSILON * s {
                h[lo][lo - 1] = Complex::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig.push(h[hi][hi]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return None;
        }

        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            h[hi][hi] + Complex::new(0.75 * h[hi][hi - 1].norm(), 0.0)
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };

        for k in lo..=hi {
            h[k][k] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            for j in k..=hi {
                let (u, v) = (h[k][j], h[k + 1][j]);
                h[k][j] = u * c + s * v;
                h[k + 1][j] = -s.conj() * u + v * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            let last = (k + 2).min(hi);
            for i in lo..=last {
                let (u, v) = (h[i][k], h[i][k + 1]);
                h[i][k] = u * c + v * s.conj();
                h[i][k + 1] = -u * s + v * c;
            }
        }
        for k in lo..=hi {
            h[k][k] += mu;
        }
    }
    Some(eig)
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: Complex, b: Complex, c: Complex, d: Complex) -> Complex {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let e1 = mean + disc;
    let e2 = mean - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}
