//! Floating-point lattice toolkit: LLL reduction, Cholesky factors and
//! Fincke–Pohst ball enumeration. Only used to *propose* lattice points;
//! every membership decision is redone exactly by the caller.

use num_traits::{One, Zero};

use crate::rational::Rational;
use crate::{Error, Result};

/// Exact inverse of a square rational matrix by Gauss–Jordan elimination.
pub fn invert(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::DegenerateBasis("basis matrix is singular".into()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] = &a[r][j] - t;
                let t = &f * &inv[col][j];
                inv[r][j] = &inv[r][j] - t;
            }
        }
    }
    Ok(inv)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LLL reduction (δ = 0.99) of the rows of `basis`. Returns the unimodular
/// integer matrix `u` with `reduced = u · basis`.
pub fn lll(basis: &[Vec<f64>]) -> Vec<Vec<i64>> {
    let n = basis.len();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let rows = |u: &[Vec<i64>]| -> Vec<Vec<f64>> {
        u.iter()
            .map(|c| {
                let mut v = vec![0.0; basis[0].len()];
                for (k, &ck) in c.iter().enumerate() {
                    for (vj, bj) in v.iter_mut().zip(&basis[k]) {
                        *vj += ck as f64 * bj;
                    }
                }
                v
            })
            .collect()
    };
    let gram_schmidt = |b: &[Vec<f64>]| -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut mu = vec![vec![0.0; n]; n];
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut norms = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = dot(&b[i], &star[j]) / norms[j];
                for (vk, sk) in v.iter_mut().zip(&star[j]) {
                    *vk -= mu[i][j] * sk;
                }
            }
            norms.push(dot(&v, &v));
            star.push(v);
        }
        (mu, norms)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&rows(&u));
            let q = mu[k][j].round() as i64;
            if q != 0 {
                for c in 0..n {
                    u[k][c] -= q * u[j][c];
                }
            }
        }
        let (mu, norms) = gram_schmidt(&rows(&u));
        if norms[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            u.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    u
}

/// Upper-triangular `r` with `gram = rᵀ r`.
pub fn cholesky(gram: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = gram.len();
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut d = gram[i][i];
        for k in 0..i {
            d -= r[k][i] * r[k][i];
        }
        if !(d > 0.0) {
            return Err(Error::DegenerateBasis("Gram matrix is not positive definite".into()));
        }
        r[i][i] = d.sqrt();
        for j in i + 1..n {
            let mut s = gram[i][j];
            for k in 0..i {
                s -= r[k][i] * r[k][j];
            }
            r[i][j] = s / r[i][i];
        }
    }
    Ok(r)
}

/// Calls `visit` with every integer vector `k` satisfying
/// `‖r (k − center)‖² ≤ radius_sq` (plus a small relative margin).
pub fn ball_points(r: &[Vec<f64>], center: &[f64], radius_sq: f64, mut visit: impl FnMut(&[i64])) {
    let n = r.len();
    let budget = radius_sq * (1.0 + 1e-9) + 1e-12;
    let mut k = vec![0i64; n];
    fn level(
        i: usize,
        r: &[Vec<f64>],
        c: &[f64],
        budget: f64,
        k: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64]),
    ) {
        let n = r.len();
        let s: f64 = (i + 1..n).map(|j| r[i][j] * (k[j] as f64 - c[j])).sum();
        let half = budget.max(0.0).sqrt() / r[i][i];
        let mid = c[i] - s / r[i][i];
        let lo = (mid - half).ceil() as i64;
        let hi = (mid + half).floor() as i64;
        for ki in lo..=hi {
            k[i] = ki;
            let term = r[i][i] * (ki as f64 - c[i]) + s;
            let rest = budget - term * term;
            if rest < 0.0 {
                continue;
            }
            if i == 0 {
                visit(k);
            } else {
                level(i - 1, r, c, rest, k, visit);
            }
        }
    }
    if n > 0 {
        level(n - 1, r, center, budget, &mut k, &mut visit);
    }
}

/// Solves the small dense system `a x = b` by partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Covering radius of the lattice spanned by the (reduced) rows of `basis`:
/// the largest distance from a Voronoi vertex to the origin. Candidate
/// relevant vectors are small integer combinations of the reduced basis.
pub fn covering_radius(basis: &[Vec<f64>]) -> f64 {
    let n = basis.len();
    if n == 1 {
        return dot(&basis[0], &basis[0]).sqrt() / 2.0;
    }
    let span: i64 = if n <= 2 { 2 } else { 1 };
    let mut coeffs: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        coeffs = coeffs
            .into_iter()
            .flat_map(|c| {
                (-span..=span).map(move |x| {
                    let mut c = c.clone();
                    c.push(x);
                    c
                })
            })
            .collect();
    }
    let vectors: Vec<Vec<f64>> = coeffs
        .iter()
        .filter(|c| c.iter().any(|&x| x != 0))
        .map(|c| {
            let mut v = vec![0.0; basis[0].len()];
            for (k, &ck) in c.iter().enumerate() {
                for (vj, bj) in v.iter_mut().zip(&basis[k]) {
                    *vj += ck as f64 * bj;
                }
            }
            v
        })
        .collect();
    let halves: Vec<f64> = vectors.iter().map(|v| dot(v, v) / 2.0).collect();
    let mut best = 0.0f64;
    let mut pick = vec![0usize; n];
    fn choose(
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        vectors: &[Vec<f64>],
        halves: &[f64],
        best: &mut f64,
    ) {
        let n = pick.len();
        if depth == n {
            let a: Vec<Vec<f64>> = pick.iter().map(|&i| vectors[i].clone()).collect();
            let b: Vec<f64> = pick.iter().map(|&i| halves[i]).collect();
            if let Some(z) = solve(a, b) {
                let inside = vectors.iter().zip(halves).all(|(v, h)| dot(v, &z) <= h + 1e-9 * (1.0 + h));
                if inside {
                    *best = best.max(dot(&z, &z).sqrt());
                }
            }
            return;
        }
        for i in start..vectors.len() {
            pick[depth] = i;
            choose(i + 1, depth + 1, pick, vectors, halves, best);
        }
    }
    choose(0, 0, &mut pick, &vectors, &halves, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lll_reduces_skewed_basis() {
        let basis = vec![vec![1.0, 0.0], vec![7.0, 1.0]];
        let u = lll(&basis);
        let reduced: Vec<Vec<f64>> = u
            .iter()
            .map(|c| (0..2).map(|j| c[0] as f64 * basis[0][j] + c[1] as f64 * basis[1][j]).collect())
            .collect();
        for row in reduced {
            assert!(dot(&row, &row) <= 1.0 + 1e-12);
        }
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        assert_eq!(det.abs(), 1);
    }

    #[test]
    fn square_and_hexagonal_covering_radius() {
        let square = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((covering_radius(&square) - 0.5f64.sqrt()).abs() < 1e-12);
        let hex = vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        assert!((covering_radius(&hex) - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let cube = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((covering_radius(&cube) - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ball_points_counts_unit_disk() {
        let r = cholesky(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut count = 0;
        ball_points(&r, &[0.0, 0.0], 25.0, |_| count += 1);
        // lattice points with ‖k‖ ≤ 5, including the origin
        assert_eq!(count, 81);
    }
}
