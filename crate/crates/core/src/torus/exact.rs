//! Exact incidence tests for straight segments in `R^n / Z^n` (lattice
//! coordinates). Everything is reduced to checked `i128` arithmetic.

use crate::rational::{self as q, from_i128, integerize, Rational, RationalError};

type R<T> = std::result::Result<T, RationalError>;

fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0, |g, &x| q::gcd_i128(g, x))
}

/// Whether the segment of displacement `w / den` from a point to a
/// translate of another (or the same) point is light: its primitive-step
/// scale `gcd(w) / den` is at most one.
pub fn is_light(w: &[i128], den: i128) -> bool {
    gcd_all(w) <= den
}

/// Fractions `f ∈ (0, 1)` at which `start + f·v` is congruent to `point`
/// modulo `Z^n`, in increasing order.
pub fn hit_fractions(start: &[Rational], v: &[Rational], point: &[Rational]) -> R<Vec<Rational>> {
    let (sd, s) = integerize(start)?;
    let (vd, w) = integerize(v)?;
    let (pd, p) = integerize(point)?;
    hit_fractions_int((&s, sd), (&w, vd), (&p, pd))
}

/// [`hit_fractions`] on integerized vectors `(numerators, denominator)`.
pub fn hit_fractions_int(start: (&[i128], i128), v: (&[i128], i128), point: (&[i128], i128)) -> R<Vec<Rational>> {
    let ((w, den), (s, sd), (p, pd)) = (v, start, point);
    let g = gcd_all(w);
    if g == 0 {
        return Ok(Vec::new());
    }
    // v = s·u with u primitive, s = g / den
    let u: Vec<i128> = w.iter().map(|x| x / g).collect();
    let e_den = q::mul(sd / q::gcd_i128(sd, pd), pd)?;
    let (ks, kp) = (e_den / sd, e_den / pd);
    let f = p
        .iter()
        .zip(s)
        .map(|(pi, si)| q::sub(q::mul(*pi, kp)?, q::mul(*si, ks)?))
        .collect::<R<Vec<i128>>>()?;
    let (_, a) = q::bezout(&u)?;
    // λ ≡ a·e (mod 1) is the only candidate class
    let mut af = 0i128;
    for (ai, fi) in a.iter().zip(&f) {
        af = q::add(af, q::mul(*ai, fi.rem_euclid(e_den))?)?;
    }
    let lam0 = af.rem_euclid(e_den);
    for (ui, fi) in u.iter().zip(&f) {
        if q::sub(q::mul(lam0, *ui)?, *fi)?.rem_euclid(e_den) != 0 {
            return Ok(Vec::new());
        }
    }
    // λ = (lam0 + j·e_den) / e_den with 0 < λ < g / den
    let mut out = Vec::new();
    let bound = q::mul(g, e_den)?;
    let mut num = lam0;
    if num == 0 {
        num = e_den;
    }
    while q::mul(num, den)? < bound {
        out.push(from_i128(q::mul(num, den)?, q::mul(e_den, g)?));
        num = q::add(num, e_den)?;
    }
    Ok(out)
}

/// Integer range of `m` with `0 < k + c·m < delta` (unbounded when `c = 0`).
fn strip(k: i128, c: i128, delta: i128) -> Option<(i128, i128)> {
    if c == 0 {
        return (k > 0 && k < delta).then_some((i128::MIN, i128::MAX));
    }
    let (lo, hi) = if c > 0 {
        // -k/c < m < (delta-k)/c
        (q::div_floor(-k, c) + 1, q::div_ceil(delta - k, c) - 1)
    } else {
        let c = -c;
        // (k-delta)/c < m < k/c
        (q::div_floor(k - delta, c) + 1, q::div_ceil(k, c) - 1)
    };
    (lo <= hi).then_some((lo, hi))
}

/// Whether the open segments `a0 + (0,1)·va` and `b0 + (0,1)·vb` share a
/// point modulo `Z^n`.
pub fn open_segments_meet(a0: &[Rational], va: &[Rational], b0: &[Rational], vb: &[Rational]) -> R<bool> {
    let all: Vec<Rational> = a0.iter().chain(va).chain(b0).chain(vb).cloned().collect();
    let (l, nums) = integerize(&all)?;
    let n = a0.len();
    let a0 = &nums[0..n];
    let va = &nums[n..2 * n];
    let b0 = &nums[2 * n..3 * n];
    let vb = &nums[3 * n..4 * n];
    let r: Vec<i128> = b0.iter().zip(a0).map(|(b, a)| b - a).collect();

    // a nonzero 2x2 minor means the directions are independent
    for i in 0..n {
        for j in i + 1..n {
            let delta = q::sub(q::mul(va[i], vb[j])?, q::mul(va[j], vb[i])?)?;
            if delta != 0 {
                return crossing(l, va, vb, &r, i, j, delta);
            }
        }
    }
    parallel(l, va, vb, &r)
}

fn crossing(l: i128, va: &[i128], vb: &[i128], r: &[i128], i: usize, j: usize, delta: i128) -> R<bool> {
    // t·va − t'·vb = r + l·m ;  rows i, j give t = n1/Δ, t' = n2/Δ
    let sigma = delta.signum();
    let delta = delta.abs();
    let lo_i = va[i].min(0) - vb[i].max(0);
    let hi_i = va[i].max(0) - vb[i].min(0);
    let m_lo = q::div_ceil(lo_i - r[i], l);
    let m_hi = q::div_floor(hi_i - r[i], l);
    let n = va.len();
    for mi in m_lo..=m_hi {
        let pi = q::add(r[i], q::mul(l, mi)?)?;
        // n1 = σ(p_i·vb_j − vb_i·p_j), n2 = σ(p_i·va_j − va_i·p_j), p_j = r_j + l·m_j
        let k1 = sigma * q::sub(q::mul(pi, vb[j])?, q::mul(vb[i], r[j])?)?;
        let c1 = -sigma * q::mul(vb[i], l)?;
        let k2 = sigma * q::sub(q::mul(pi, va[j])?, q::mul(va[i], r[j])?)?;
        let c2 = -sigma * q::mul(va[i], l)?;
        let (Some((a_lo, a_hi)), Some((b_lo, b_hi))) = (strip(k1, c1, delta), strip(k2, c2, delta)) else {
            continue;
        };
        let lo = a_lo.max(b_lo);
        let hi = a_hi.min(b_hi);
        if lo > hi {
            continue;
        }
        if n == 2 {
            return Ok(true);
        }
        if lo == i128::MIN || hi == i128::MAX {
            // both coefficients vanish only if va_i = vb_i = 0, impossible with Δ ≠ 0
            unreachable!("unbounded crossing strip");
        }
        for mj in lo..=hi {
            let pj = q::add(r[j], q::mul(l, mj)?)?;
            let n1 = sigma * q::sub(q::mul(pi, vb[j])?, q::mul(vb[i], pj)?)?;
            let n2 = sigma * q::sub(q::mul(pi, va[j])?, q::mul(va[i], pj)?)?;
            let ok = (0..n).filter(|&k| k != i && k != j).all(|k| {
                let lhs = q::mul(n1, va[k])
                    .and_then(|x| q::sub(x, q::mul(n2, vb[k])?))
                    .and_then(|x| q::sub(x, q::mul(delta, r[k])?));
                match lhs.and_then(|x| Ok((x, q::mul(delta, l)?))) {
                    Ok((x, m)) => x.rem_euclid(m) == 0,
                    Err(_) => false,
                }
            });
            if ok {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn parallel(l: i128, va: &[i128], vb: &[i128], r: &[i128]) -> R<bool> {
    let ga = gcd_all(va);
    let gb = gcd_all(vb);
    if ga == 0 || gb == 0 {
        return Ok(false);
    }
    let u: Vec<i128> = va.iter().map(|x| x / ga).collect();
    let pivot = u.iter().position(|&x| x != 0).expect("nonzero direction");
    let sign = (vb[pivot] / gb).signum() * u[pivot].signum();
    // points a0 + λu (0<λ<ga), b0 + σμu (0<μ<gb); need (λ − σμ)u ≡ r mod l
    let (_, a) = q::bezout(&u)?;
    let mut nu0 = 0i128;
    for (ai, ri) in a.iter().zip(r) {
        nu0 = q::add(nu0, q::mul(*ai, *ri)?)?;
    }
    nu0 = nu0.rem_euclid(l);
    for (ui, ri) in u.iter().zip(r) {
        if q::sub(q::mul(nu0, *ui)?, *ri)?.rem_euclid(l) != 0 {
            return Ok(false);
        }
    }
    let (lo, hi) = if sign > 0 { (-gb, ga) } else { (0, q::add(ga, gb)?) };
    let j = q::div_floor(lo - nu0, l) + 1;
    Ok(q::add(nu0, q::mul(j, l)?)? < hi)
}
