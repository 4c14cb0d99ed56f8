//! Geometry-agnostic light rays and blocking.
//!
//! A [`LightRay`] is a geodesic segment between two marked points whose open
//! interior avoids both of them. A finite point set *blocks* a family of rays
//! when it meets the interior of every one; the smallest such set size is the
//! blocking number `b(x, y)`.
//!
//! Everything here is horizon-relative: rays come from an enumerator run to a
//! finite length `T`, so a [`BlockingCertificate`] certifies an upper bound
//! and a [`DisjointFamily`] a lower bound for the rays of length at most `T`
//! only. The spaces implement [`RaySpace`] (incidence and intersection tests
//! on ray paths) and [`LightSource`] (enumeration and metric data).

mod family;
mod hitting;
mod ray;
pub mod sampled;

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rational::{rat, serde_rational, Rational};
use crate::{Error, Result};

pub use family::{blocking_lower_bound, DisjointFamily, DEFAULT_EXACT_LIMIT};
pub use hitting::{min_blockers, min_hitting_set, MinBlockers};
pub use ray::{EdgePiece, LightRay, RayPath, Sample};

/// An interior incidence of a ray with a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitParam {
    /// Arc-length parameter, `0 < t < length`.
    pub t: f64,
    /// Exact fraction `t / length` for exact paths.
    #[serde(with = "serde_rational::option", default)]
    pub fraction: Option<Rational>,
}

impl HitParam {
    pub fn exact(fraction: Rational, length: f64) -> Self {
        let t = crate::rational::to_f64(&fraction) * length;
        Self { t, fraction: Some(fraction) }
    }

    /// Distance to the midpoint used to pick the canonical hit of a ray.
    fn midpoint_order(&self, other: &Self, length: f64) -> Ordering {
        match (&self.fraction, &other.fraction) {
            (Some(a), Some(b)) => {
                let half = rat(1, 2);
                let da = (a - &half).abs();
                let db = (b - &half).abs();
                da.cmp(&db).then_with(|| a.cmp(b))
            }
            _ => {
                let da = (self.t - length / 2.0).abs();
                let db = (other.t - length / 2.0).abs();
                da.total_cmp(&db).then_with(|| self.t.total_cmp(&other.t))
            }
        }
    }
}

/// Incidence and intersection tests for the rays of one space.
pub trait RaySpace: Sync {
    type Point: Clone + fmt::Debug + Serialize + Send + Sync;

    /// Identifier stamped on every ray this space emits.
    fn tag(&self) -> String;

    /// Whether ray paths are exact (tolerances are then ignored).
    fn exact(&self) -> bool;

    fn point_label(&self, p: &Self::Point) -> String;

    /// All interior parameters at which `ray` passes through `point`.
    fn interior_hits(&self, ray: &LightRay, point: &Self::Point, tol: f64) -> Result<Vec<HitParam>>;

    /// [`RaySpace::interior_hits`] for every point of a family.
    fn family_hits(&self, ray: &LightRay, points: &[Self::Point], tol: f64) -> Result<Vec<Vec<HitParam>>> {
        points.iter().map(|p| self.interior_hits(ray, p, tol)).collect()
    }

    /// Whether the open interiors of two rays share a point.
    fn interiors_meet(&self, a: &LightRay, b: &LightRay, tol: f64) -> Result<bool>;

    /// Minimum distance between interiors, for numeric spaces.
    fn interior_gap(&self, _a: &LightRay, _b: &LightRay) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Enumeration and metric data needed for pair classification.
pub trait LightSource: RaySpace {
    fn enumerate_light(&self, x: &Self::Point, y: &Self::Point, horizon: f64) -> Result<Vec<LightRay>>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;

    fn diameter(&self) -> Result<f64>;

    fn same_point(&self, x: &Self::Point, y: &Self::Point) -> bool;

    /// A structural blocker pool for the pair, if the geometry has one.
    fn candidate_blockers(&self, _x: &Self::Point, _y: &Self::Point) -> Result<Option<Vec<Self::Point>>> {
        Ok(None)
    }
}

fn check_space<'a, S: RaySpace + ?Sized>(space: &S, rays: impl IntoIterator<Item = &'a LightRay>) -> Result<()> {
    let tag = space.tag();
    match rays.into_iter().find(|r| r.space != tag) {
        Some(r) => Err(Error::SpaceMismatch(r.space.clone(), tag)),
        None => Ok(()),
    }
}

fn check_tolerance<S: RaySpace + ?Sized>(space: &S, tol: f64) -> Result<()> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::Invalid(format!("tolerance {tol} must be a finite nonnegative number")));
    }
    if tol == 0.0 && !space.exact() {
        return Err(Error::ZeroToleranceOnSampled);
    }
    Ok(())
}

/// True iff the open interiors of `a` and `b` are disjoint (exact paths) or
/// further apart than `tol` (sampled paths).
pub fn interiors_disjoint<S: RaySpace + ?Sized>(space: &S, a: &LightRay, b: &LightRay, tol: f64) -> Result<bool> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch(a.space.clone(), b.space.clone()));
    }
    check_space(space, [a])?;
    check_tolerance(space, tol)?;
    Ok(!space.interiors_meet(a, b, tol)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub ray_id: String,
    pub blocker: usize,
    pub t: f64,
    #[serde(with = "serde_rational::option", default)]
    pub fraction: Option<Rational>,
}

/// A finite blocker set plus, for every ray, an interior witness point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockingCertificate<P> {
    pub space: String,
    pub source: String,
    pub target: String,
    pub horizon: Option<f64>,
    pub blockers: Vec<P>,
    pub blocker_labels: Vec<String>,
    /// One entry per ray, in canonical ray order.
    pub hits: Vec<Hit>,
    pub tolerance: f64,
}

impl<P> BlockingCertificate<P> {
    /// Blocker indices that witness at least one hit.
    pub fn used_blockers(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.hits.iter().map(|h| h.blocker).collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Checks every hit against `rays` again.
    pub fn replay<S>(&self, space: &S, rays: &[LightRay]) -> Result<()>
    where
        S: RaySpace<Point = P>,
    {
        if rays.len() != self.hits.len() {
            return Err(Error::Invalid(format!(
                "certificate lists {} hits for {} rays",
                self.hits.len(),
                rays.len()
            )));
        }
        let mut sorted: Vec<&LightRay> = rays.iter().collect();
        sorted.sort_by(|a, b| a.canonical_cmp(b));
        for (ray, hit) in sorted.iter().zip(&self.hits) {
            if ray.id != hit.ray_id {
                return Err(Error::Invalid(format!("hit for `{}` recorded against `{}`", ray.id, hit.ray_id)));
            }
            let blocker = self
                .blockers
                .get(hit.blocker)
                .ok_or_else(|| Error::Invalid(format!("blocker index {} out of range", hit.blocker)))?;
            if !(hit.t > 0.0 && hit.t < ray.length) {
                return Err(Error::UnverifiedBlockers(ray.id.clone()));
            }
            let params = space.interior_hits(ray, blocker, self.tolerance)?;
            let matched = params.iter().any(|p| match (&p.fraction, &hit.fraction) {
                (Some(a), Some(b)) => a == b,
                _ => (p.t - hit.t).abs() <= self.tolerance.max(1e-12) * 10.0 + 1e-9,
            });
            if !matched {
                return Err(Error::UnverifiedBlockers(ray.id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureWitness {
    /// The first unblocked ray in canonical order, with its full path.
    pub ray: LightRay,
    pub blockers_tested: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Verification<P> {
    Certified(BlockingCertificate<P>),
    Failed(FailureWitness),
}

impl<P> Verification<P> {
    pub fn certificate(&self) -> Option<&BlockingCertificate<P>> {
        match self {
            Verification::Certified(c) => Some(c),
            Verification::Failed(_) => None,
        }
    }

    pub fn into_certificate(self) -> Result<BlockingCertificate<P>> {
        match self {
            Verification::Certified(c) => Ok(c),
            Verification::Failed(w) => Err(Error::UnverifiedBlockers(w.ray.id)),
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Verification::Certified(_))
    }
}

/// Canonical hit of one ray: the interior incidence closest to the ray's
/// midpoint, ties to the smaller parameter then the smaller blocker index.
pub(crate) fn best_hit<S: RaySpace + ?Sized>(
    space: &S,
    ray: &LightRay,
    blockers: &[S::Point],
    tol: f64,
) -> Result<Option<(usize, HitParam)>> {
    let mut best: Option<(usize, HitParam)> = None;
    for (index, params) in space.family_hits(ray, blockers, tol)?.into_iter().enumerate() {
        for param in params {
            if !(param.t > 0.0 && param.t < ray.length) {
                continue;
            }
            if let Some(f) = &param.fraction {
                if !(f.is_positive() && f < &Rational::one()) {
                    continue;
                }
            }
            let better = match &best {
                None => true,
                Some((_, current)) => param.midpoint_order(current, ray.length) == Ordering::Less,
            };
            if better {
                best = Some((index, param));
            }
        }
    }
    Ok(best)
}

/// Sorts rays into canonical order (length, then path data).
pub fn sort_canonical(rays: &mut [LightRay]) {
    rays.sort_by(|a, b| a.canonical_cmp(b));
}

fn shared_endpoints(rays: &[LightRay]) -> Result<(String, String)> {
    let first = rays.first().ok_or(Error::EmptyRays)?;
    for r in rays {
        if r.source != first.source || r.target != first.target {
            return Err(Error::MixedEndpoints(format!(
                "`{}` runs {}→{}, `{}` runs {}→{}",
                first.id, first.source, first.target, r.id, r.source, r.target
            )));
        }
    }
    Ok((first.source.clone(), first.target.clone()))
}

/// Checks that every ray meets some blocker in its interior.
///
/// Rays are processed in canonical order; the first unblocked one is returned
/// as the failure witness. Blockers that coincide with the endpoints are
/// accepted and simply never hit anything.
pub fn verify_blocking<S: RaySpace + ?Sized>(
    space: &S,
    blockers: &[S::Point],
    rays: &[LightRay],
    tol: f64,
) -> Result<Verification<S::Point>> {
    check_tolerance(space, tol)?;
    let (source, target) = shared_endpoints(rays)?;
    check_space(space, rays)?;
    let mut sorted: Vec<&LightRay> = rays.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    let hits: Vec<Option<(usize, HitParam)>> = sorted
        .par_iter()
        .map(|ray| best_hit(space, ray, blockers, tol))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(hits.len());
    for (ray, hit) in sorted.iter().zip(hits) {
        match hit {
            Some((blocker, param)) => out.push(Hit {
                ray_id: ray.id.clone(),
                blocker,
                t: param.t,
                fraction: param.fraction,
            }),
            None => {
                return Ok(Verification::Failed(FailureWitness {
                    ray: (*ray).clone(),
                    blockers_tested: blockers.len(),
                }))
            }
        }
    }
    Ok(Verification::Certified(BlockingCertificate {
        space: space.tag(),
        source,
        target,
        horizon: None,
        blockers: blockers.to_vec(),
        blocker_labels: blockers.iter().map(|b| space.point_label(b)).collect(),
        hits: out,
        tolerance: if space.exact() { 0.0 } else { tol },
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    CrossBlockedConsistent,
    CrossBlockedViolated,
    SphereBlockedConsistent,
    SphereBlockedViolated,
    Indeterminate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::CrossBlockedConsistent => "cross-blocked-consistent",
            Classification::CrossBlockedViolated => "cross-blocked-violated",
            Classification::SphereBlockedConsistent => "sphere-blocked-consistent",
            Classification::SphereBlockedViolated => "sphere-blocked-violated",
            Classification::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

/// Horizon-relative blocking summary for one pair of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub space: String,
    pub x: String,
    pub y: String,
    pub horizon: f64,
    pub distance: f64,
    pub diameter: f64,
    pub m_t: usize,
    pub lower_bound: usize,
    /// From a verified certificate over the space's structural blocker pool.
    pub upper_bound: Option<usize>,
    pub classification: Classification,
    pub family: Option<DisjointFamily>,
    pub horizon_relative: bool,
}

/// Enumerates light to `horizon`, bounds the blocking number from both sides
/// and classifies the pair against cross blocking (`x ≠ y`) or sphere
/// blocking (`x = y`).
pub fn classify_pair<S: LightSource + ?Sized>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    horizon: f64,
    tol: f64,
) -> Result<PairReport> {
    check_tolerance(space, tol)?;
    let rays = space.enumerate_light(x, y, horizon)?;
    let same = space.same_point(x, y);
    let distance = if same { 0.0 } else { space.distance(x, y)? };
    let diameter = space.diameter()?;
    let family = if rays.is_empty() {
        None
    } else {
        Some(blocking_lower_bound(space, &rays, DEFAULT_EXACT_LIMIT, tol)?)
    };
    let lower_bound = family.as_ref().map_or(0, |f| f.rays.len());
    let upper_bound = match space.candidate_blockers(x, y)? {
        Some(pool) if !rays.is_empty() => match min_blockers(space, &rays, &pool, tol) {
            Ok(found) => Some(found.count),
            Err(Error::InsufficientCandidates(_)) => None,
            Err(e) => return Err(e),
        },
        Some(_) => Some(0),
        None => None,
    };
    let classification = if same {
        if lower_bound >= 2 {
            Classification::SphereBlockedViolated
        } else {
            Classification::SphereBlockedConsistent
        }
    } else if distance > tol && distance < diameter - tol {
        if lower_bound >= 3 {
            Classification::CrossBlockedViolated
        } else {
            Classification::CrossBlockedConsistent
        }
    } else {
        Classification::Indeterminate
    };
    Ok(PairReport {
        space: space.tag(),
        x: space.point_label(x),
        y: space.point_label(y),
        horizon,
        distance,
        diameter,
        m_t: rays.len(),
        lower_bound,
        upper_bound,
        classification,
        family,
        horizon_relative: true,
    })
}

/// Spaces with exact geodesic enumeration (not only light), sub-segments and
/// the last-exit/first-arrival projection onto light.
pub trait GeodesicSpace: LightSource {
    /// Every geodesic segment from `x` to `y` of length at most `horizon`.
    fn enumerate_geodesics(&self, x: &Self::Point, y: &Self::Point, horizon: f64) -> Result<Vec<LightRay>>;

    /// The part of an exact ray between two fractions of its length,
    /// relabelled with the given endpoint labels.
    fn sub_ray(&self, ray: &LightRay, from: &Rational, to: &Rational, source: &str, target: &str) -> Result<LightRay>;

    /// Whether two rays with the same endpoints are the same geodesic.
    fn same_geodesic(&self, a: &LightRay, b: &LightRay) -> Result<bool>;

    /// Restriction of a segment to `[t1, t2]`, where `t1` is its last visit to
    /// `x` before the end and `t2` its first visit to `y` after `t1`.
    fn project_to_light(&self, segment: &LightRay, x: &Self::Point, y: &Self::Point) -> Result<LightRay>;
}
