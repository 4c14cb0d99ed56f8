//! Tube tests on sampled polylines.
//!
//! A numeric ray's interior is the part of its polyline with parameter in
//! `(√tol, length − √tol)`. The margin is wider than `tol` itself because a
//! chord of arc length `tol` is shorter than `tol`, so a `(tol, length − tol)`
//! window would register the endpoints as interior hits.

use super::{HitParam, Sample};

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn endpoint_margin(tol: f64) -> f64 {
    tol.sqrt()
}

/// Closest point of segment `[a, b]` to `p`: (segment fraction, distance).
pub fn point_segment(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let s = if len2 > 0.0 { (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = lerp(a, b, s);
    (s, distance(p, &q))
}

/// Minimum distance between segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_segment(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let d1 = sub(p1, p0);
    let d2 = sub(q1, q0);
    let r = sub(p0, q0);
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    const EPS: f64 = 1e-300;
    let (s, t);
    if a <= EPS && e <= EPS {
        return distance(p0, q0);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(&d1, &r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(&d1, &d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    distance(&lerp(p0, p1, s), &lerp(q0, q1, t))
}

/// The polyline restricted to the parameter window `[lo, hi]`, with the
/// boundary points interpolated.
pub fn trim(samples: &[Sample], lo: f64, hi: f64) -> Vec<Sample> {
    let mut out = Vec::new();
    if samples.len() < 2 || hi <= lo {
        return out;
    }
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.t < lo || a.t > hi {
            continue;
        }
        let span = b.t - a.t;
        let at = |t: f64| Sample { t, point: lerp(&a.point, &b.point, if span > 0.0 { (t - a.t) / span } else { 0.0 }) };
        if out.is_empty() {
            out.push(if a.t < lo { at(lo) } else { a.clone() });
        }
        out.push(if b.t > hi { at(hi) } else { b.clone() });
    }
    out
}

/// Interior passages of the polyline within `tol` of `p`: one parameter per
/// connected run of close segments, at the closest approach.
pub fn tube_hits(samples: &[Sample], length: f64, p: &[f64], tol: f64) -> Vec<HitParam> {
    let margin = endpoint_margin(tol);
    let inner = trim(samples, margin, length - margin);
    let mut hits = Vec::new();
    let mut run: Option<(f64, f64)> = None; // (best distance, parameter)
    for w in inner.windows(2) {
        let (s, d) = point_segment(p, &w[0].point, &w[1].point);
        if d < tol {
            let t = w[0].t + s * (w[1].t - w[0].t);
            run = match run {
                Some((best, bt)) if best <= d => Some((best, bt)),
                _ => Some((d, t)),
            };
        } else if let Some((_, t)) = run.take() {
            hits.push(HitParam { t, fraction: None });
        }
    }
    if let Some((_, t)) = run {
        hits.push(HitParam { t, fraction: None });
    }
    hits
}

struct Chunk {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
}

fn chunks(samples: &[Sample], size: usize) -> Vec<Chunk> {
    let mut out = Vec::new();
    let n = samples.len();
    let mut start = 0;
    while start + 1 < n {
        let end = (start + size).min(n - 1);
        let dim = samples[start].point.len();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for s in &samples[start..=end] {
            for k in 0..dim {
                lo[k] = lo[k].min(s.point[k]);
                hi[k] = hi[k].max(s.point[k]);
            }
        }
        out.push(Chunk { lo, hi, start, end });
        start = end;
    }
    out
}

fn box_gap(a: &Chunk, b: &Chunk) -> f64 {
    let mut s = 0.0;
    for k in 0..a.lo.len() {
        let d = (b.lo[k] - a.hi[k]).max(a.lo[k] - b.hi[k]).max(0.0);
        s += d * d;
    }
    s.sqrt()
}

/// Minimum distance between the interiors of two sampled rays, stopping early
/// once a distance at or below `stop_below` is found.
pub fn interior_distance(a: &[Sample], la: f64, b: &[Sample], lb: f64, tol: f64, stop_below: f64) -> f64 {
    let margin = endpoint_margin(tol);
    let pa = trim(a, margin, la - margin);
    let pb = trim(b, margin, lb - margin);
    if pa.len() < 2 || pb.len() < 2 {
        return f64::INFINITY;
    }
    let ca = chunks(&pa, 32);
    let cb = chunks(&pb, 32);
    let mut best = f64::INFINITY;
    for x in &ca {
        for y in &cb {
            if box_gap(x, y) >= best {
                continue;
            }
            for i in x.start..x.end {
                for j in y.start..y.end {
                    let d = segment_segment(&pa[i].point, &pa[i + 1].point, &pb[j].point, &pb[j + 1].point);
                    if d < best {
                        best = d;
                        if best <= stop_below {
                            return best;
                        }
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(from: [f64; 2], to: [f64; 2], n: usize) -> Vec<Sample> {
        let len = distance(&from, &to);
        (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                Sample { t: s * len, point: vec![from[0] + (to[0] - from[0]) * s, from[1] + (to[1] - from[1]) * s] }
            })
            .collect()
    }

    #[test]
    fn segment_distances() {
        assert!((segment_segment(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(segment_segment(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]), 0.0);
        assert!((segment_segment(&[0.0, 0.0], &[1.0, 0.0], &[2.0, 1.0], &[3.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tube_excludes_endpoints() {
        let path = line([0.0, 0.0], [1.0, 0.0], 100);
        assert!(tube_hits(&path, 1.0, &[0.0, 0.0], 1e-6).is_empty());
        assert!(tube_hits(&path, 1.0, &[1.0, 0.0], 1e-6).is_empty());
        let mid = tube_hits(&path, 1.0, &[0.5, 0.0], 1e-6);
        assert_eq!(mid.len(), 1);
        assert!((mid[0].t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rays_sharing_endpoints_are_interior_disjoint() {
        // two sides of a square from (0,0) to (1,1)
        let mut a = line([0.0, 0.0], [1.0, 0.0], 50);
        let tail: Vec<Sample> = line([1.0, 0.0], [1.0, 1.0], 50).into_iter().skip(1).map(|s| Sample { t: s.t + 1.0, ..s }).collect();
        a.extend(tail);
        let mut b = line([0.0, 0.0], [0.0, 1.0], 50);
        let tail: Vec<Sample> = line([0.0, 1.0], [1.0, 1.0], 50).into_iter().skip(1).map(|s| Sample { t: s.t + 1.0, ..s }).collect();
        b.extend(tail);
        let d = interior_distance(&a, 2.0, &b, 2.0, 1e-6, 0.0);
        assert!(d > 1e-4, "{d}");
        let c = line([0.0, 0.0], [1.0, 1.0], 80);
        let crossing = line([0.0, 1.0], [1.0, 0.0], 80);
        assert!(interior_distance(&c, 2f64.sqrt(), &crossing, 2f64.sqrt(), 1e-6, 0.0) < 1e-12);
    }
}
