use num_complex::Complex64 as Complex;

use crate::{Error, Result, RootSet};

pub const MATCHING_MAX_SIZE: usize = 4096;

/// Bottleneck distance between two equal-size root sets: the minimum over
/// bijections of the largest matched distance.
///
/// The optimum is one of the pairwise distances. Candidates are restricted
/// to the interval between a lower bound (every point must reach its nearest
/// partner) and the cost of a greedy matching, then bisected with a
/// Hopcroft–Karp perfect-matching test.
pub fn match_rootsets(a: &RootSet, b: &RootSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n > MATCHING_MAX_SIZE {
        return Err(Error::DegreeTooLarge {
            degree: n,
            limit: MATCHING_MAX_SIZE,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let dist = |i: usize, j: usize| (a[i] - b[j]).norm();

    let mut lower: f64 = 0.0;
    for i in 0..n {
        lower = lower.max((0..n).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min));
    }
    for j in 0..n {
        lower = lower.max((0..n).map(|i| dist(i, j)).fold(f64::INFINITY, f64::min));
    }
    let upper = greedy_cost(a, b);

    let mut candidates: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let d = dist(i, j);
            if d >= lower && d <= upper {
                candidates.push(d);
            }
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
    candidates.dedup();

    // smallest candidate admitting a perfect matching; `upper` always does
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

fn greedy_cost(a: &[Complex], b: &[Complex]) -> f64 {
    let n = a.len();
    let mut used = vec![false; n];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (j, d) = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (j, (x - b[j]).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn perfect_matching(a: &[Complex], b: &[Complex], t: f64) -> bool {
    let n = a.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| (a[i] - b[j]).norm() <= t).collect())
        .collect();
    hopcroft_karp(&adj, n) == n
}

fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> usize {
    const NIL: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices
        let mut queue = std::collections::VecDeque::new();
        for u in 0..n_left {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n_left];
        for u in 0..n_left {
            if match_l[u] == NIL && augment(u, adj, &mut match_l, &mut match_r, &mut dist, &mut it) {
                matched += 1;
            }
        }
    }
    matched
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    // iterative DFS along the BFS layers
    let mut stack = vec![u];
    let mut path: Vec<(usize, usize)> = Vec::new();
    while let Some(&x) = stack.last() {
        let mut advanced = false;
        while it[x] < adj[x].len() {
            let v = adj[x][it[x]];
            it[x] += 1;
            let w = match_r[v];
            if w == usize::MAX {
                path.push((x, v));
                for &(l, r) in &path {
                    match_l[l] = r;
                    match_r[r] = l;
                }
                return true;
            }
            if dist[w] == dist[x].wrapping_add(1) {
                path.push((x, v));
                stack.push(w);
                advanced = true;
                break;
            }
        }
        if !advanced {
            dist[x] = usize::MAX;
            stack.pop();
            path.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// Brute force over all permutations for tiny sets.
    fn brute(a: &[Complex], b: &[Complex]) -> f64 {
        fn rec(a: &[Complex], b: &[Complex], used: &mut Vec<bool>, i: usize, cur: f64, best: &mut f64) {
            if i == a.len() {
                *best = best.min(cur);
                return;
            }
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(a, b, used, i + 1, cur.max((a[i] - b[j]).norm()), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
        best
    }

    #[test]
    fn examples() {
        let a = RootSet::new(vec![c(0.0, 0.0), c(1.0, 1.0)]);
        assert_eq!(match_rootsets(&a, &a).unwrap(), 0.0);
        let r = match_rootsets(&RootSet::new(vec![c(0.0, 0.0)]), &RootSet::new(vec![c(1.0, 0.0)]));
        assert_eq!(r.unwrap(), 1.0);
        assert!(matches!(
            match_rootsets(&a, &RootSet::new(vec![c(0.0, 0.0)])),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=7 {
            for _ in 0..20 {
                let a: RootSet = (0..n).map(|_| c(rng.random(), rng.random())).collect();
                let b: RootSet = (0..n).map(|_| c(rng.random(), rng.random())).collect();
                assert_eq!(match_rootsets(&a, &b).unwrap(), brute(&a, &b));
            }
        }
    }
}
