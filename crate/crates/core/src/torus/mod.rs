//! Flat tori `R^n / Λ` with exact rational arithmetic.
//!
//! Points are stored as canonical representatives in the half-open
//! fundamental parallelepiped of the basis. Geodesic segments from `x` to `y`
//! are the straight segments `x̄ → ȳ + λ` in the cover, `λ ∈ Λ`. Ball
//! enumeration runs over an LLL-reduced basis in floating point and every
//! membership decision (norm against the horizon, light test, incidences)
//! is exact.

mod exact;
pub mod lattice;

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::blocking::{GeodesicSpace, HitParam, LightRay, LightSource, RayPath, RaySpace};
use crate::entropy::GrowthSeries;
use crate::rational::{self as q, format_rational_vec, from_i128, integerize, serde_rational, to_f64, Rational};
use crate::{Error, Result};

pub use exact::{hit_fractions, hit_fractions_int, is_light, open_segments_meet};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorusPoint {
    #[serde(with = "serde_rational::vec")]
    pub coords: Vec<Rational>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self { coords }
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", format_rational_vec(&self.coords))
    }
}

/// One lattice translate found by ball enumeration: displacement `w / den`
/// in lattice coordinates with exact squared norm `qnum / (gram_den·den²)`.
#[derive(Clone, Debug)]
struct Translate {
    w: Vec<i128>,
    qnum: i128,
}

struct Ball {
    den: i128,
    found: Vec<Translate>,
}

#[derive(Clone, Debug)]
pub struct TorusSpace {
    basis: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
    inverse_int: (i128, Vec<Vec<i128>>),
    identity: bool,
    gram_den: i128,
    gram_num: Vec<Vec<i128>>,
    reduction: Vec<Vec<i64>>,
    reduction_inv: Vec<Vec<i64>>,
    cholesky: Vec<Vec<f64>>,
    shortest_sq: Rational,
    covering: f64,
}

fn mat_vec_rows(rows: &[Vec<Rational>], c: &[Rational]) -> Vec<Rational> {
    // Σ_i c_i · rows_i
    let dim = rows[0].len();
    let mut out = vec![Rational::zero(); dim];
    for (ci, row) in c.iter().zip(rows) {
        if ci.is_zero() {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o += ci * r;
        }
    }
    out
}

impl TorusSpace {
    /// Lattice generated by the rows of `basis`.
    pub fn new(basis: Vec<Vec<Rational>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 || basis.iter().any(|r| r.len() != n) {
            return Err(Error::DegenerateBasis(format!("basis must be a square matrix, got {n} rows")));
        }
        let inverse = lattice::invert(&basis)?;
        let (inv_den, flat) = integerize(&inverse.concat())?;
        let inverse_int = (inv_den, flat.chunks(n).map(<[i128]>::to_vec).collect());
        let identity = (0..n).all(|i| (0..n).all(|j| basis[i][j] == if i == j { Rational::one() } else { Rational::zero() }));
        let gram: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum::<Rational>())
                    .collect()
            })
            .collect();
        let flat: Vec<Rational> = gram.iter().flatten().cloned().collect();
        let (gram_den, nums) = integerize(&flat)?;
        let gram_num: Vec<Vec<i128>> = nums.chunks(n).map(|c| c.to_vec()).collect();

        let basis_f: Vec<Vec<f64>> = basis.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let reduction = lattice::lll(&basis_f);
        let reduction_rat: Vec<Vec<Rational>> =
            reduction.iter().map(|r| r.iter().map(|&x| q::int(x)).collect()).collect();
        let reduction_inv: Vec<Vec<i64>> = lattice::invert(&reduction_rat)?
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        if !x.is_integer() {
                            return Err(Error::DegenerateBasis("reduction is not unimodular".into()));
                        }
                        i64::try_from(q::to_i128(&x.to_integer())?).map_err(|_| q::RationalError::Overflow("i64").into())
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let gram_f: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        // reduced Gram = U G Uᵀ
        let reduced_gram: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut s = 0.0;
                        for a in 0..n {
                            for b in 0..n {
                                s += reduction[i][a] as f64 * gram_f[a][b] * reduction[j][b] as f64;
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        let cholesky = lattice::cholesky(&reduced_gram)?;
        let reduced_rows: Vec<Vec<f64>> = reduction
            .iter()
            .map(|c| {
                let mut v = vec![0.0; n];
                for (k, &ck) in c.iter().enumerate() {
                    for (vj, bj) in v.iter_mut().zip(&basis_f[k]) {
                        *vj += ck as f64 * bj;
                    }
                }
                v
            })
            .collect();
        let covering = lattice::covering_radius(&reduced_rows);

        let mut space = Self {
            basis,
            inverse,
            inverse_int,
            identity,
            gram_den,
            gram_num,
            reduction,
            reduction_inv,
            cholesky,
            shortest_sq: Rational::zero(),
            covering,
        };
        let bound = reduced_gram.iter().enumerate().map(|(i, r)| r[i]).fold(f64::INFINITY, f64::min);
        let zero = vec![Rational::zero(); n];
        let ball = space.ball(&zero, bound.sqrt() * (1.0 + 1e-9))?;
        let min = ball.found.iter().map(|t| t.qnum).min().ok_or_else(|| {
            Error::DegenerateBasis("no nonzero lattice vector found within the reduced basis norm".into())
        })?;
        space.shortest_sq = from_i128(min, space.gram_den);
        Ok(space)
    }

    /// The standard lattice `Z^n`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| q::int(i64::from(i == j))).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn shortest_vector_sq(&self) -> &Rational {
        &self.shortest_sq
    }

    /// Half the shortest nonzero lattice vector length.
    pub fn injectivity_radius(&self) -> f64 {
        to_f64(&self.shortest_sq).sqrt() / 2.0
    }

    pub fn covering_radius(&self) -> f64 {
        self.covering
    }

    /// Coordinates with respect to the lattice basis.
    pub fn lattice_coords(&self, p: &[Rational]) -> Vec<Rational> {
        if self.identity {
            return p.to_vec();
        }
        // p = c·B  ⇒  c = p·B⁻¹
        mat_vec_rows(&self.inverse, p)
    }

    /// Lattice coordinates as `(denominator, numerators)`, not necessarily reduced.
    fn lattice_int(&self, p: &[Rational]) -> Result<(i128, Vec<i128>)> {
        let (d, v) = integerize(p)?;
        if self.identity {
            return Ok((d, v));
        }
        let (inv_den, m) = &self.inverse_int;
        let mut out = vec![0i128; v.len()];
        for (vi, row) in v.iter().zip(m) {
            for (o, r) in out.iter_mut().zip(row) {
                *o = q::add(*o, q::mul(*vi, *r)?)?;
            }
        }
        Ok((q::mul(d, *inv_den)?, out))
    }

    pub fn ambient(&self, c: &[Rational]) -> Vec<Rational> {
        if self.identity {
            return c.to_vec();
        }
        mat_vec_rows(&self.basis, c)
    }

    /// Canonical representative of an arbitrary rational point.
    pub fn point(&self, coords: Vec<Rational>) -> Result<TorusPoint> {
        if coords.len() != self.dim() {
            return Err(Error::Invalid(format!("point has {} coordinates, torus has dimension {}", coords.len(), self.dim())));
        }
        Ok(self.canonical(&coords))
    }

    fn canonical(&self, coords: &[Rational]) -> TorusPoint {
        let c: Vec<Rational> = self.lattice_coords(coords).iter().map(|x| x - x.floor()).collect();
        TorusPoint { coords: self.ambient(&c) }
    }

    fn canonical_lattice(&self, p: &TorusPoint) -> Vec<Rational> {
        self.lattice_coords(&p.coords).iter().map(|x| x - x.floor()).collect()
    }

    fn norm_sq(&self, v: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                s += vi * vj * from_i128(self.gram_num[i][j], 1);
            }
        }
        s / from_i128(self.gram_den, 1)
    }

    fn qnum(&self, w: &[i128]) -> Result<i128> {
        let mut s = 0i128;
        for (i, &wi) in w.iter().enumerate() {
            for (j, &wj) in w.iter().enumerate() {
                s = q::add(s, q::mul(q::mul(wi, wj)?, self.gram_num[i][j])?)?;
            }
        }
        Ok(s)
    }

    /// Whether `qnum / (gram_den·den²) ≤ t²`, exactly.
    fn within(&self, qnum: i128, den: i128, t: f64) -> bool {
        let scale = self.gram_den as f64 * (den as f64) * (den as f64);
        let approx = qnum as f64 / scale;
        let t2 = t * t;
        if approx < t2 * (1.0 - 1e-12) {
            return true;
        }
        if approx > t2 * (1.0 + 1e-12) {
            return false;
        }
        let exact = from_i128(qnum, 1) / (from_i128(self.gram_den, 1) * from_i128(den, 1) * from_i128(den, 1));
        let t = q::from_f64(t).unwrap_or_else(Rational::zero);
        exact <= &t * &t
    }

    /// Nonzero translates `d + k` (`d` in lattice coordinates, `k ∈ Z^n`)
    /// with norm at most `radius`, sorted by (norm, w).
    fn ball(&self, d: &[Rational], radius: f64) -> Result<Ball> {
        let n = self.dim();
        let (den, w0) = integerize(d)?;
        let d_f: Vec<f64> = d.iter().map(to_f64).collect();
        // reduced coordinates: d = Uᵀ d'  ⇒  d'_i = Σ_j (U⁻¹)_{ji} d_j
        let center: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| self.reduction_inv[j][i] as f64 * d_f[j]).sum::<f64>())
            .collect();
        let mut ks: Vec<Vec<i64>> = Vec::new();
        lattice::ball_points(&self.cholesky, &center, radius * radius, |k| ks.push(k.to_vec()));
        let mut found = Vec::with_capacity(ks.len());
        for kr in ks {
            let mut w = w0.clone();
            for (i, wi) in w.iter_mut().enumerate() {
                let mut ki = 0i128;
                for (j, &kj) in kr.iter().enumerate() {
                    ki = q::add(ki, q::mul(self.reduction[j][i] as i128, kj as i128)?)?;
                }
                *wi = q::add(*wi, q::mul(den, ki)?)?;
            }
            if w.iter().all(|&x| x == 0) {
                continue;
            }
            let qnum = self.qnum(&w)?;
            if self.within(qnum, den, radius) {
                found.push(Translate { w, qnum });
            }
        }
        found.sort_by(|a, b| a.qnum.cmp(&b.qnum).then_with(|| a.w.cmp(&b.w)));
        Ok(Ball { den, found })
    }

    fn displacement(&self, x: &TorusPoint, y: &TorusPoint) -> Vec<Rational> {
        let cx = self.canonical_lattice(x);
        let cy = self.canonical_lattice(y);
        cy.iter().zip(&cx).map(|(a, b)| a - b).collect()
    }

    fn check_horizon(horizon: f64) -> Result<()> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Invalid(format!("horizon {horizon} must be positive and finite")));
        }
        Ok(())
    }

    /// Builds the ray from the canonical lift of `x` with lattice displacement `v`.
    fn ray(&self, x: &TorusPoint, source: &str, target: &str, v: &[Rational], len_sq: Rational) -> LightRay {
        let start = self.canonical(&x.coords).coords;
        let step = self.ambient(v);
        let end: Vec<Rational> = start.iter().zip(&step).map(|(a, b)| a + b).collect();
        LightRay {
            id: format!("v=({})", format_rational_vec(v)),
            space: self.tag(),
            source: source.to_string(),
            target: target.to_string(),
            length: to_f64(&len_sq).sqrt(),
            length_sq: Some(len_sq),
            path: RayPath::ExactSegment { start, end },
        }
    }

    fn rays_from_ball(&self, x: &TorusPoint, y: &TorusPoint, ball: &Ball, light_only: bool) -> Vec<LightRay> {
        let source = self.point_label(x);
        let target = self.point_label(y);
        ball.found
            .iter()
            .filter(|t| !light_only || is_light(&t.w, ball.den))
            .map(|t| {
                let v: Vec<Rational> = t.w.iter().map(|&wi| from_i128(wi, ball.den)).collect();
                let len_sq = from_i128(t.qnum, q::mul(self.gram_den, q::mul(ball.den, ball.den).unwrap_or(i128::MAX)).unwrap_or(i128::MAX));
                self.ray(x, &source, &target, &v, len_sq)
            })
            .collect()
    }

    /// All segments `x̄ → ȳ + λ` with `0 < ‖ȳ + λ − x̄‖ ≤ horizon`, by length.
    pub fn enumerate_geodesics(&self, x: &TorusPoint, y: &TorusPoint, horizon: f64) -> Result<Vec<LightRay>> {
        Self::check_horizon(horizon)?;
        let ball = self.ball(&self.displacement(x, y), horizon)?;
        self.check_scale(&ball)?;
        Ok(self.rays_from_ball(x, y, &ball, false))
    }

    /// The segments of [`enumerate_geodesics`](Self::enumerate_geodesics)
    /// whose open interior contains no lift of `x` or `y`.
    pub fn enumerate_light(&self, x: &TorusPoint, y: &TorusPoint, horizon: f64) -> Result<Vec<LightRay>> {
        Self::check_horizon(horizon)?;
        let ball = self.ball(&self.displacement(x, y), horizon)?;
        self.check_scale(&ball)?;
        Ok(self.rays_from_ball(x, y, &ball, true))
    }

    fn check_scale(&self, ball: &Ball) -> Result<()> {
        q::mul(self.gram_den, q::mul(ball.den, ball.den)?)?;
        Ok(())
    }

    /// The `2^n` points `(x̄ + ȳ + λ)/2`, `λ ∈ {0,1}^n` in lattice
    /// coordinates (first coordinate varying fastest).
    pub fn midpoint_blocking_set(&self, x: &TorusPoint, y: &TorusPoint) -> Vec<TorusPoint> {
        let cx = self.canonical_lattice(x);
        let cy = self.canonical_lattice(y);
        let n = self.dim();
        let half = q::rat(1, 2);
        (0..1u32 << n)
            .map(|mask| {
                let c: Vec<Rational> = (0..n)
                    .map(|i| (&cx[i] + &cy[i] + q::int(i64::from(mask >> i & 1))) * &half)
                    .collect();
                self.canonical(&self.ambient(&c))
            })
            .collect()
    }

    /// Cumulative counts `n_T` (segments) and `m_T` (light rays) of length at
    /// most `T` for `T = step, 2·step, …, ≤ t_max`.
    pub fn growth_series(&self, x: &TorusPoint, y: &TorusPoint, t_max: f64, step: f64) -> Result<GrowthSeries> {
        if !(step > 0.0 && step <= t_max) || !t_max.is_finite() {
            return Err(Error::Invalid(format!("need 0 < step ≤ T_max, got step {step}, T_max {t_max}")));
        }
        let horizons: Vec<f64> = (1..)
            .map(|i| step * i as f64)
            .take_while(|t| *t <= t_max * (1.0 + 1e-12))
            .collect();
        let ball = self.ball(&self.displacement(x, y), *horizons.last().expect("step ≤ t_max"))?;
        let mut n_at = vec![0u128; horizons.len()];
        let mut m_at = vec![0u128; horizons.len()];
        for t in &ball.found {
            let first = horizons.partition_point(|&h| !self.within(t.qnum, ball.den, h));
            if first < horizons.len() {
                n_at[first] += 1;
                if is_light(&t.w, ball.den) {
                    m_at[first] += 1;
                }
            }
        }
        let mut n = Vec::with_capacity(horizons.len());
        let mut m = Vec::with_capacity(horizons.len());
        let (mut cn, mut cm) = (0u128, 0u128);
        for i in 0..horizons.len() {
            cn += n_at[i];
            cm += m_at[i];
            n.push(cn);
            m.push(cm);
        }
        GrowthSeries::new(self.point_label(x), self.point_label(y), horizons, n, m, Some(self.injectivity_radius()))
    }

    fn segment_lattice(&self, ray: &LightRay) -> Result<(Vec<Rational>, Vec<Rational>)> {
        match &ray.path {
            RayPath::ExactSegment { start, end } if start.len() == self.dim() && end.len() == self.dim() => {
                let step: Vec<Rational> = end.iter().zip(start).map(|(a, b)| a - b).collect();
                Ok((self.lattice_coords(start), self.lattice_coords(&step)))
            }
            _ => Err(Error::Invalid(format!("ray `{}` is not an exact {}-dimensional segment", ray.id, self.dim()))),
        }
    }
}

impl RaySpace for TorusSpace {
    type Point = TorusPoint;

    fn tag(&self) -> String {
        let rows: Vec<String> = self.basis.iter().map(|r| format_rational_vec(r)).collect();
        format!("torus[{}]", rows.join(";"))
    }

    fn exact(&self) -> bool {
        true
    }

    fn point_label(&self, p: &TorusPoint) -> String {
        self.canonical(&p.coords).to_string()
    }

    fn interior_hits(&self, ray: &LightRay, point: &TorusPoint, _tol: f64) -> Result<Vec<HitParam>> {
        let (start, v) = self.segment_lattice(ray)?;
        let b = self.lattice_coords(&point.coords);
        Ok(hit_fractions(&start, &v, &b)?
            .into_iter()
            .map(|f| HitParam::exact(f, ray.length))
            .collect())
    }

    fn family_hits(&self, ray: &LightRay, points: &[TorusPoint], _tol: f64) -> Result<Vec<Vec<HitParam>>> {
        let RayPath::ExactSegment { start, end } = &ray.path else {
            return Err(Error::Invalid(format!("ray `{}` is not an exact segment", ray.id)));
        };
        if start.len() != self.dim() || end.len() != self.dim() {
            return Err(Error::Invalid(format!("ray `{}` is not {}-dimensional", ray.id, self.dim())));
        }
        let (sd, s) = self.lattice_int(start)?;
        let (ed, e) = self.lattice_int(end)?;
        let vd = q::mul(sd / q::gcd_i128(sd, ed), ed)?;
        let (ks, ke) = (vd / sd, vd / ed);
        let w = e
            .iter()
            .zip(&s)
            .map(|(a, b)| q::sub(q::mul(*a, ke)?, q::mul(*b, ks)?))
            .collect::<std::result::Result<Vec<i128>, _>>()?;
        points
            .iter()
            .map(|p| {
                let (pd, b) = self.lattice_int(&p.coords)?;
                let hits = hit_fractions_int((&s, sd), (&w, vd), (&b, pd))?;
                Ok(hits.into_iter().map(|f| HitParam::exact(f, ray.length)).collect())
            })
            .collect()
    }

    fn interiors_meet(&self, a: &LightRay, b: &LightRay, _tol: f64) -> Result<bool> {
        let (a0, va) = self.segment_lattice(a)?;
        let (b0, vb) = self.segment_lattice(b)?;
        Ok(open_segments_meet(&a0, &va, &b0, &vb)?)
    }
}

impl LightSource for TorusSpace {
    fn enumerate_light(&self, x: &TorusPoint, y: &TorusPoint, horizon: f64) -> Result<Vec<LightRay>> {
        TorusSpace::enumerate_light(self, x, y, horizon)
    }

    fn distance(&self, x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
        let d = self.displacement(x, y);
        if d.iter().all(Zero::is_zero) {
            return Ok(0.0);
        }
        let ball = self.ball(&d, self.covering * (1.0 + 1e-6) + 1e-9)?;
        let t = ball
            .found
            .first()
            .ok_or_else(|| Error::Invalid("no lattice translate within the covering radius".into()))?;
        Ok((t.qnum as f64 / (self.gram_den as f64 * (ball.den as f64).powi(2))).sqrt())
    }

    fn diameter(&self) -> Result<f64> {
        Ok(self.covering)
    }

    fn same_point(&self, x: &TorusPoint, y: &TorusPoint) -> bool {
        self.canonical_lattice(x) == self.canonical_lattice(y)
    }

    fn candidate_blockers(&self, x: &TorusPoint, y: &TorusPoint) -> Result<Option<Vec<TorusPoint>>> {
        Ok(Some(self.midpoint_blocking_set(x, y)))
    }
}

impl GeodesicSpace for TorusSpace {
    fn enumerate_geodesics(&self, x: &TorusPoint, y: &TorusPoint, horizon: f64) -> Result<Vec<LightRay>> {
        TorusSpace::enumerate_geodesics(self, x, y, horizon)
    }

    fn sub_ray(&self, ray: &LightRay, from: &Rational, to: &Rational, source: &str, target: &str) -> Result<LightRay> {
        let RayPath::ExactSegment { start, end } = &ray.path else {
            return Err(Error::Invalid(format!("ray `{}` is not an exact segment", ray.id)));
        };
        if !(from < to) {
            return Err(Error::Invalid("sub-ray fractions must satisfy from < to".into()));
        }
        let step: Vec<Rational> = end.iter().zip(start).map(|(a, b)| a - b).collect();
        let s: Vec<Rational> = start.iter().zip(&step).map(|(a, d)| a + d * from).collect();
        let e: Vec<Rational> = start.iter().zip(&step).map(|(a, d)| a + d * to).collect();
        let v: Vec<Rational> = self.lattice_coords(&step).iter().map(|d| d * (to - from)).collect();
        let span = to - from;
        let len_sq = ray
            .length_sq
            .clone()
            .map(|l| l * &span * &span)
            .unwrap_or_else(|| self.norm_sq(&v));
        Ok(LightRay {
            id: format!("v=({})", format_rational_vec(&v)),
            space: ray.space.clone(),
            source: source.to_string(),
            target: target.to_string(),
            length: to_f64(&len_sq).sqrt(),
            length_sq: Some(len_sq),
            path: RayPath::ExactSegment { start: s, end: e },
        })
    }

    fn same_geodesic(&self, a: &LightRay, b: &LightRay) -> Result<bool> {
        let (_, va) = self.segment_lattice(a)?;
        let (_, vb) = self.segment_lattice(b)?;
        Ok(va == vb)
    }

    fn project_to_light(&self, segment: &LightRay, x: &TorusPoint, y: &TorusPoint) -> Result<LightRay> {
        let (start, v) = self.segment_lattice(segment)?;
        let lift_of = |p: &[Rational], target: &TorusPoint| {
            let c = self.canonical_lattice(target);
            p.iter().zip(&c).all(|(a, b)| (a - b).is_integer())
        };
        let end: Vec<Rational> = start.iter().zip(&v).map(|(a, b)| a + b).collect();
        if !lift_of(&start, x) || !lift_of(&end, y) {
            return Err(Error::ProjectionFailure(segment.id.clone()));
        }
        let (den, w) = integerize(&v)?;
        let g = w.iter().fold(0i128, |g, &x| q::gcd_i128(g, x));
        if g == 0 {
            return Err(Error::ProjectionFailure(segment.id.clone()));
        }
        // v = s·u, s = g/den; last visit to x before the end is at the largest
        // integer λ₁ < s, and the first later arrival at y is the endpoint.
        let lambda1 = q::div_ceil(g, den) - 1;
        let keep = from_i128(q::sub(g, q::mul(lambda1, den)?)?, den);
        let v_light: Vec<Rational> = w.iter().map(|&wi| from_i128(wi, g) * &keep).collect();
        let len_sq = self.norm_sq(&v_light);
        Ok(self.ray(x, &segment.source, &segment.target, &v_light, len_sq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational_vec, rat};

    fn pt(s: &TorusSpace, text: &str) -> TorusPoint {
        s.point(parse_rational_vec(text).unwrap()).unwrap()
    }

    #[test]
    fn unit_square_loops() {
        let s = TorusSpace::unit(2).unwrap();
        let o = pt(&s, "0,0");
        let g = s.enumerate_geodesics(&o, &o, 1.0).unwrap();
        assert_eq!(g.len(), 4);
        let l = s.enumerate_light(&o, &o, 1.0).unwrap();
        assert_eq!(l.len(), 4);
        assert_eq!(s.injectivity_radius(), 0.5);
        assert!((s.covering_radius() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn half_offset_census() {
        let s = TorusSpace::unit(2).unwrap();
        let x = pt(&s, "0,0");
        let y = pt(&s, "1/2,0");
        let g = s.enumerate_geodesics(&x, &y, 1.6).unwrap();
        assert_eq!(g.len(), 8);
        let l = s.enumerate_light(&x, &y, 1.6).unwrap();
        let mut ids: Vec<String> = l.iter().map(|r| r.id.clone()).collect();
        ids.sort();
        assert_eq!(ids, ["v=(-1/2,-1)", "v=(-1/2,0)", "v=(-1/2,1)", "v=(1/2,-1)", "v=(1/2,0)", "v=(1/2,1)"]);
    }

    #[test]
    fn canonical_points() {
        let s = TorusSpace::unit(2).unwrap();
        assert_eq!(pt(&s, "-1/4,5/2").coords, vec![rat(3, 4), rat(1, 2)]);
        let skew = TorusSpace::new(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 1)]]).unwrap();
        let p = pt(&skew, "3/2,1");
        assert_eq!(p.coords, vec![rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn midpoints_of_diagonal_pair() {
        let s = TorusSpace::unit(2).unwrap();
        let m = s.midpoint_blocking_set(&pt(&s, "0,0"), &pt(&s, "1/2,1/2"));
        let labels: Vec<String> = m.iter().map(|p| p.to_string()).collect();
        assert_eq!(labels, ["(1/4,1/4)", "(3/4,1/4)", "(1/4,3/4)", "(3/4,3/4)"]);
    }

    #[test]
    fn projection_of_long_segment() {
        let s = TorusSpace::unit(2).unwrap();
        let x = pt(&s, "0,0");
        let y = pt(&s, "1/2,0");
        let seg = s.ray(&x, "x", "y", &[rat(3, 2), rat(0, 1)], rat(9, 4));
        let image = s.project_to_light(&seg, &x, &y).unwrap();
        assert_eq!(image.id, "v=(1/2,0)");
    }

    #[test]
    fn shortest_vector_of_skew_lattice() {
        let skew = TorusSpace::new(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(7, 1), rat(1, 3)]]).unwrap();
        assert_eq!(skew.shortest_vector_sq(), &rat(1, 9));
    }
}
