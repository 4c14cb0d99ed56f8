//! Growth series of geodesic and light counts, entropy estimates, and the
//! counting inequalities relating segments, light rays and blockers.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::blocking::{verify_blocking, GeodesicSpace, LightRay};
use crate::rational::{rat, to_f64};
use crate::{Error, Result};

/// Cumulative counts `n_T` (geodesic segments) and `m_T` (light rays) from
/// `source` to `target` at increasing horizons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub source: String,
    pub target: String,
    pub horizons: Vec<f64>,
    pub n: Vec<u128>,
    pub m: Vec<u128>,
    /// Injectivity radius of the space, when it is meaningful.
    pub inj: Option<f64>,
}

impl GrowthSeries {
    pub fn new(
        source: String,
        target: String,
        horizons: Vec<f64>,
        n: Vec<u128>,
        m: Vec<u128>,
        inj: Option<f64>,
    ) -> Result<Self> {
        if horizons.len() != n.len() || horizons.len() != m.len() {
            return Err(Error::Invalid(format!(
                "series lengths differ: {} horizons, {} n, {} m",
                horizons.len(),
                n.len(),
                m.len()
            )));
        }
        if horizons.iter().any(|t| !(t.is_finite() && *t > 0.0)) || horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("horizons must be positive and strictly increasing".into()));
        }
        if n.windows(2).any(|w| w[0] > w[1]) || m.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("counts must be nondecreasing".into()));
        }
        if let Some(i) = m.iter().zip(&n).position(|(m, n)| m > n) {
            return Err(Error::Invalid(format!("m exceeds n at horizon {}", horizons[i])));
        }
        if let Some(inj) = inj {
            if !(inj.is_finite() && inj > 0.0) {
                return Err(Error::Invalid(format!("injectivity radius {inj} must be positive")));
            }
        }
        Ok(Self { source, target, horizons, n, m, inj })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,n,m\n");
        for ((t, n), m) in self.horizons.iter().zip(&self.n).zip(&self.m) {
            let _ = writeln!(out, "{t},{n},{m}");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManeEstimate {
    /// Least-squares slope of `log n_T` against `T` over the top half.
    pub estimate: f64,
    /// Root-mean-square residual of that fit.
    pub residual: f64,
    /// `log n_T / T` at the largest horizon.
    pub last_ratio: f64,
    /// `(T, log n_T / T)` for every horizon with `n_T > 0`.
    pub ratios: Vec<(f64, f64)>,
    pub fitted_horizons: usize,
}

/// Entropy estimate from the growth of `n_T`. This is a finite-horizon
/// estimate, never the limit itself.
pub fn mane_estimate(series: &GrowthSeries) -> Result<ManeEstimate> {
    let points: Vec<(f64, f64)> = series
        .horizons
        .iter()
        .zip(&series.n)
        .filter(|(_, &n)| n > 0)
        .map(|(&t, &n)| (t, (n as f64).ln()))
        .collect();
    if points.is_empty() {
        return Err(Error::AllZero);
    }
    if points.len() < 4 {
        return Err(Error::TooFewHorizons);
    }
    let tail = &points[points.len() / 2..];
    let k = tail.len() as f64;
    let mean_t = tail.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_l = tail.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_l)).sum();
    let slope = sxy / sxx;
    let residual = (tail
        .iter()
        .map(|p| (p.1 - (mean_l + slope * (p.0 - mean_t))).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let ratios: Vec<(f64, f64)> = points.iter().map(|&(t, l)| (t, l / t)).collect();
    Ok(ManeEstimate {
        estimate: slope,
        residual,
        last_ratio: ratios.last().expect("nonempty").1,
        ratios,
        fitted_horizons: tail.len(),
    })
}

/// The image of every segment under the projection onto light.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightProjection {
    /// Distinct image rays, in canonical order.
    pub rays: Vec<LightRay>,
    /// For each input segment, the index of its image in `rays`.
    pub images: Vec<usize>,
    /// Number of segments mapped onto each ray.
    pub fibers: Vec<usize>,
}

pub fn light_projection<S: GeodesicSpace + ?Sized>(
    space: &S,
    segments: &[LightRay],
    x: &S::Point,
    y: &S::Point,
) -> Result<LightProjection> {
    let mut images_raw = Vec::with_capacity(segments.len());
    for s in segments {
        if s.source != space.point_label(x) || s.target != space.point_label(y) {
            return Err(Error::MixedEndpoints(format!("segment `{}` runs {}→{}", s.id, s.source, s.target)));
        }
        images_raw.push(space.project_to_light(s, x, y)?);
    }
    let mut rays: Vec<LightRay> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for img in &images_raw {
        if let Some(&i) = by_id.get(&img.id) {
            if !space.same_geodesic(&rays[i], img)? {
                return Err(Error::Invalid(format!("distinct projections share the id `{}`", img.id)));
            }
        } else {
            by_id.insert(img.id.clone(), rays.len());
            rays.push(img.clone());
        }
    }
    crate::blocking::sort_canonical(&mut rays);
    let order: HashMap<&str, usize> = rays.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let images: Vec<usize> = images_raw.iter().map(|r| order[r.id.as_str()]).collect();
    let mut fibers = vec![0usize; rays.len()];
    for &i in &images {
        fibers[i] += 1;
    }
    Ok(LightProjection { rays, images, fibers })
}

/// `(T / 2I)²`, the bound on how many segments of length `≤ T` share a
/// light image.
pub fn fiber_bound(horizon: f64, inj: f64) -> f64 {
    (horizon / (2.0 * inj)).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub horizon: f64,
    pub n: u128,
    pub m: u128,
    /// `(T / 2I)² · m_T`.
    pub bound: f64,
    /// `n_T / bound`; at most one when the inequality holds.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub inj: f64,
    pub rows: Vec<CountingRow>,
    pub tightest_ratio: f64,
    pub holds: bool,
}

/// Tabulates `n_T` against `(T / 2I)² · m_T` without judging the outcome.
pub fn counting_inequality_report(series: &GrowthSeries) -> Result<CountingReport> {
    let inj = series
        .inj
        .ok_or_else(|| Error::Invalid("the counting inequality needs an injectivity radius".into()))?;
    let rows: Vec<CountingRow> = series
        .horizons
        .iter()
        .zip(&series.n)
        .zip(&series.m)
        .map(|((&horizon, &n), &m)| {
            let bound = fiber_bound(horizon, inj) * m as f64;
            let ratio = if n == 0 {
                0.0
            } else if bound > 0.0 {
                n as f64 / bound
            } else {
                f64::INFINITY
            };
            CountingRow { horizon, n, m, bound, ratio }
        })
        .collect();
    let tightest_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let holds = rows.iter().all(|r| r.ratio <= 1.0 + 1e-12);
    Ok(CountingReport { inj, rows, tightest_ratio, holds })
}

/// Asserts `n_T ≤ (T / 2I)² · m_T` at every horizon.
pub fn counting_inequality_check(series: &GrowthSeries) -> Result<CountingReport> {
    let report = counting_inequality_report(series)?;
    if let Some(row) = report.rows.iter().find(|r| r.ratio > 1.0 + 1e-12) {
        return Err(Error::InequalityViolated {
            horizon: row.horizon,
            detail: format!("n = {} > (T/2I)^2 m = {}", row.n, row.bound),
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitSide {
    SourceToBlocker,
    BlockerToTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMatch {
    pub ray_id: String,
    pub blocker: usize,
    pub side: SplitSide,
    /// Id of the matching half-horizon segment.
    pub segment_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub horizon: f64,
    pub m_t: usize,
    /// `n_{T/2}(x, b_j) + n_{T/2}(b_j, y)` for each blocker.
    pub per_blocker: Vec<(usize, usize)>,
    pub rhs: usize,
    pub matches: Vec<SplitMatch>,
    pub holds: bool,
}

/// Checks `m_T(x, y) ≤ Σ_j n_{T/2}(x, b_j) + n_{T/2}(b_j, y)`, matching every
/// light ray to the half of it (before or after its blocker) that has length
/// at most `T / 2`.
pub fn blocker_split_check<S: GeodesicSpace + ?Sized>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    blockers: &[S::Point],
    horizon: f64,
) -> Result<SplitReport> {
    let rays = space.enumerate_light(x, y, horizon)?;
    let half = horizon / 2.0;
    let mut to_blocker = Vec::with_capacity(blockers.len());
    let mut from_blocker = Vec::with_capacity(blockers.len());
    for b in blockers {
        to_blocker.push(space.enumerate_geodesics(x, b, half)?);
        from_blocker.push(space.enumerate_geodesics(b, y, half)?);
    }
    let per_blocker: Vec<(usize, usize)> =
        to_blocker.iter().zip(&from_blocker).map(|(a, b)| (a.len(), b.len())).collect();
    let rhs = per_blocker.iter().map(|(a, b)| a + b).sum();
    if rays.is_empty() {
        return Ok(SplitReport { horizon, m_t: 0, per_blocker, rhs, matches: Vec::new(), holds: true });
    }
    let certificate = verify_blocking(space, blockers, &rays, 0.0)?.into_certificate()?;
    let xl = space.point_label(x);
    let yl = space.point_label(y);
    let mut sorted = rays.clone();
    crate::blocking::sort_canonical(&mut sorted);
    let mut matches = Vec::with_capacity(sorted.len());
    for (ray, hit) in sorted.iter().zip(&certificate.hits) {
        let f = hit.fraction.clone().ok_or_else(|| Error::Unsupported("blocker split needs exact hits".into()))?;
        let bl = &certificate.blocker_labels[hit.blocker];
        let (side, piece, pool) = if f <= rat(1, 2) {
            (SplitSide::SourceToBlocker, space.sub_ray(ray, &Zero::zero(), &f, &xl, bl)?, &to_blocker[hit.blocker])
        } else {
            (SplitSide::BlockerToTarget, space.sub_ray(ray, &f, &One::one(), bl, &yl)?, &from_blocker[hit.blocker])
        };
        let mut found = None;
        for seg in pool {
            if space.same_geodesic(seg, &piece)? {
                found = Some(seg.id.clone());
                break;
            }
        }
        let segment_id = found.ok_or_else(|| {
            Error::Invalid(format!(
                "half of `{}` of length {} is missing from the half-horizon enumeration",
                ray.id,
                to_f64(&(piece.length_sq.clone().unwrap_or_default())).sqrt()
            ))
        })?;
        matches.push(SplitMatch { ray_id: ray.id.clone(), blocker: hit.blocker, side, segment_id });
    }
    let m_t = rays.len();
    Ok(SplitReport { horizon, m_t, per_blocker, rhs, matches, holds: m_t <= rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: Vec<u128>, m: Vec<u128>, inj: Option<f64>) -> GrowthSeries {
        let horizons = (1..=n.len()).map(|i| i as f64).collect();
        GrowthSeries::new("x".into(), "y".into(), horizons, n, m, inj).unwrap()
    }

    #[test]
    fn constant_series_has_zero_entropy() {
        let s = series(vec![1; 6], vec![1; 6], None);
        let e = mane_estimate(&s).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert_eq!(e.last_ratio, 0.0);
    }

    #[test]
    fn exponential_series_recovers_rate() {
        let n: Vec<u128> = (1..=12).map(|t| 2 * (3u128.pow(t) - 1)).collect();
        let s = series(n, vec![4; 12], Some(0.5));
        let e = mane_estimate(&s).unwrap();
        assert!((e.estimate - 3f64.ln()).abs() < 1e-3);
        let report = counting_inequality_report(&s).unwrap();
        assert!(!report.holds);
        assert!(matches!(counting_inequality_check(&s), Err(Error::InequalityViolated { .. })));
    }

    #[test]
    fn rejects_bad_series() {
        let h = vec![1.0, 2.0];
        assert!(GrowthSeries::new("x".into(), "y".into(), h.clone(), vec![2, 1], vec![0, 0], None).is_err());
        assert!(GrowthSeries::new("x".into(), "y".into(), h.clone(), vec![1, 1], vec![2, 2], None).is_err());
        assert!(GrowthSeries::new("x".into(), "y".into(), vec![2.0, 1.0], vec![1, 1], vec![1, 1], None).is_err());
        let zero = series(vec![0; 5], vec![0; 5], None);
        assert!(matches!(mane_estimate(&zero), Err(Error::AllZero)));
        let short = series(vec![1, 1, 1], vec![1, 1, 1], None);
        assert!(matches!(mane_estimate(&short), Err(Error::TooFewHorizons)));
    }

    #[test]
    fn csv_layout() {
        let s = series(vec![1, 2], vec![1, 1], None);
        assert_eq!(s.to_csv(), "T,n,m\n1,1,1\n2,2,1\n");
    }
}
