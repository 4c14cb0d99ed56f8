//! Box-shaped Coxeter chambers.
//!
//! The chamber `W = Π [0, sᵢ]` and the group `Λ` generated by reflections in
//! its facets tessellate `R^r`. Per axis `Λ` acts as the infinite dihedral
//! group, its translation subgroup `Λ′` is generated by the shifts `2sᵢ`, and
//! the index is `m = [Λ : Λ′] = 2^r`. The folding map `ρ` sends a position to
//! its *type* in `W` (a triangle wave per axis).

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::blocking::{verify_blocking, BlockingCertificate, HitParam, LightRay, RayPath, RaySpace};
use crate::rational::{self as q, format_rational_vec, serde_rational, to_f64, Rational};
use crate::{Error, Result};

/// A point of `R^r` (a position or a type).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coords(#[serde(with = "serde_rational::vec")] pub Vec<Rational>);

impl Coords {
    pub fn label(&self) -> String {
        format!("({})", format_rational_vec(&self.0))
    }
}

/// Closed axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    #[serde(with = "serde_rational::vec")]
    pub lo: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub hi: Vec<Rational>,
}

impl Window {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Self {
        Self { lo, hi }
    }

    /// The box of half-width `radius` (rounded up to integers) around `center`.
    pub fn around(center: &[Rational], radius: f64) -> Self {
        let r = q::int(radius.ceil() as i64);
        Self {
            lo: center.iter().map(|c| c - &r).collect(),
            hi: center.iter().map(|c| c + &r).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApartmentGroup {
    #[serde(with = "serde_rational::vec")]
    sides: Vec<Rational>,
}

/// Per-axis triangle wave of period `2s` onto `[0, s]`.
pub fn fold_axis(z: &Rational, side: &Rational) -> Rational {
    let period = side * q::int(2);
    let r = q::rem_euclid(z, &period);
    if &r > side {
        period - r
    } else {
        r
    }
}

impl ApartmentGroup {
    pub fn new(sides: Vec<Rational>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::Invalid("apartment rank must be positive".into()));
        }
        if let Some(s) = sides.iter().find(|s| !s.is_positive()) {
            return Err(Error::Invalid(format!("side length {} must be positive", q::format_rational(s))));
        }
        Ok(Self { sides })
    }

    pub fn rank(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[Rational] {
        &self.sides
    }

    /// `m = [Λ : Λ′] = 2^r`.
    pub fn index(&self) -> u64 {
        1 << self.rank()
    }

    /// `2^r · m²`.
    pub fn midpoint_bound(&self) -> u64 {
        (1 << self.rank()) * self.index() * self.index()
    }

    fn check_dim(&self, v: &[Rational]) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::Invalid(format!("expected {} coordinates, got {}", self.rank(), v.len())));
        }
        Ok(())
    }

    pub fn fold(&self, position: &[Rational]) -> Result<Coords> {
        self.check_dim(position)?;
        Ok(Coords(position.iter().zip(&self.sides).map(|(z, s)| fold_axis(z, s)).collect()))
    }

    pub fn in_chamber(&self, t: &[Rational]) -> bool {
        t.len() == self.rank() && t.iter().zip(&self.sides).all(|(x, s)| !x.is_negative() && x <= s)
    }

    /// Reflection of `p` in the facet hyperplane `x_axis = 0` (`upper = false`)
    /// or `x_axis = s_axis` (`upper = true`).
    pub fn reflect(&self, p: &[Rational], axis: usize, upper: bool) -> Vec<Rational> {
        let mut out = p.to_vec();
        out[axis] = if upper { &self.sides[axis] * q::int(2) - &p[axis] } else { -&p[axis] };
        out
    }

    fn check_type(&self, t: &[Rational]) -> Result<()> {
        self.check_dim(t)?;
        if !self.in_chamber(t) {
            return Err(Error::TypeOutsideChamber(format!("({})", format_rational_vec(t))));
        }
        Ok(())
    }

    fn axis_orbit(&self, t: &Rational, axis: usize, lo: &Rational, hi: &Rational) -> Vec<Rational> {
        let s = &self.sides[axis];
        let period = s * q::int(2);
        let mut out = BTreeSet::new();
        for base in [t.clone(), -t] {
            // smallest base + k·period ≥ lo
            let k = ((lo - &base) / &period).ceil();
            let mut z = &base + &k * &period;
            while &z <= hi {
                out.insert(z.clone());
                z += &period;
            }
        }
        out.into_iter().collect()
    }

    /// Every position in `window` of type `t`: per axis `{±t + 2k·s}`.
    pub fn orbit_points(&self, t: &[Rational], window: &Window) -> Result<Vec<Coords>> {
        self.check_type(t)?;
        self.check_dim(&window.lo)?;
        self.check_dim(&window.hi)?;
        let axes: Vec<Vec<Rational>> = (0..self.rank())
            .map(|i| self.axis_orbit(&t[i], i, &window.lo[i], &window.hi[i]))
            .collect();
        let mut points: Vec<Vec<Rational>> = vec![vec![]];
        for axis in axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |z| {
                        let mut p = p.clone();
                        p.push(z.clone());
                        p
                    })
                })
                .collect();
        }
        Ok(points.into_iter().map(Coords).collect())
    }

    fn types_in(&self, x: &[Rational], y: &[Rational], window: &Window) -> Result<BTreeSet<Coords>> {
        let half = q::rat(1, 2);
        let ps = self.orbit_points(x, window)?;
        let qs = self.orbit_points(y, window)?;
        let mut out = BTreeSet::new();
        for p in &ps {
            for qv in &qs {
                let mid: Vec<Rational> = p.0.iter().zip(&qv.0).map(|(a, b)| (a + b) * &half).collect();
                out.insert(self.fold(&mid)?);
            }
        }
        Ok(out)
    }

    /// Types of the midpoints `(p + q)/2` over orbit points of the two types
    /// inside `window`, sorted. Completeness is checked by enlarging the
    /// window by one period per axis and requiring the same answer.
    pub fn midpoint_types(&self, x_type: &[Rational], y_type: &[Rational], window: &Window) -> Result<Vec<Coords>> {
        self.check_type(x_type)?;
        self.check_type(y_type)?;
        self.check_dim(&window.lo)?;
        self.check_dim(&window.hi)?;
        for (i, s) in self.sides.iter().enumerate() {
            if &window.hi[i] - &window.lo[i] < s * q::int(4) {
                return Err(Error::WindowTooSmall(format!(
                    "axis {i} spans {} but two periods need {}",
                    q::format_rational(&(&window.hi[i] - &window.lo[i])),
                    q::format_rational(&(s * q::int(4)))
                )));
            }
        }
        let base = self.types_in(x_type, y_type, window)?;
        let wider = Window {
            lo: window.lo.clone(),
            hi: window.hi.iter().zip(&self.sides).map(|(h, s)| h + s * q::int(2)).collect(),
        };
        if self.types_in(x_type, y_type, &wider)? != base {
            return Err(Error::WindowTooSmall("midpoint types change under one period of enlargement".into()));
        }
        Ok(base.into_iter().collect())
    }

    /// A window spanning two periods per axis, starting at the origin.
    pub fn saturating_window(&self) -> Window {
        Window {
            lo: vec![Rational::zero(); self.rank()],
            hi: self.sides.iter().map(|s| s * q::int(4)).collect(),
        }
    }
}

/// `R^r` tessellated by the group, with chamber types as blockers: a ray
/// is hit by a type wherever it passes a position of that type.
pub struct ApartmentSpace<'a> {
    pub group: &'a ApartmentGroup,
}

impl ApartmentSpace<'_> {
    fn segment<'r>(&self, ray: &'r LightRay) -> Result<(&'r [Rational], Vec<Rational>)> {
        match &ray.path {
            RayPath::ExactSegment { start, end } if start.len() == self.group.rank() => {
                Ok((start, end.iter().zip(start).map(|(a, b)| a - b).collect()))
            }
            _ => Err(Error::Invalid(format!("ray `{}` is not an exact segment of this apartment", ray.id))),
        }
    }
}

impl RaySpace for ApartmentSpace<'_> {
    type Point = Coords;

    fn tag(&self) -> String {
        format!("apartment[{}]", format_rational_vec(self.group.sides()))
    }

    fn exact(&self) -> bool {
        true
    }

    fn point_label(&self, p: &Coords) -> String {
        format!("type{}", p.label())
    }

    fn interior_hits(&self, ray: &LightRay, t: &Coords, _tol: f64) -> Result<Vec<HitParam>> {
        let (start, v) = self.segment(ray)?;
        let g = self.group;
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return Ok(Vec::new());
        };
        // candidate fractions from the pivot axis: start + f·v ∈ ±t + 2k·s
        let s = &g.sides()[pivot];
        let period = s * q::int(2);
        let (lo, hi) = if v[pivot].is_positive() {
            (start[pivot].clone(), &start[pivot] + &v[pivot])
        } else {
            (&start[pivot] + &v[pivot], start[pivot].clone())
        };
        let mut fractions = BTreeSet::new();
        for base in [t.0[pivot].clone(), -&t.0[pivot]] {
            let k = ((&lo - &base) / &period).ceil();
            let mut z = &base + &k * &period;
            while z <= hi {
                let f = (&z - &start[pivot]) / &v[pivot];
                if f.is_positive() && f < Rational::from_integer(1.into()) {
                    fractions.insert(f);
                }
                z += &period;
            }
        }
        let mut out = Vec::new();
        for f in fractions {
            let p: Vec<Rational> = start.iter().zip(&v).map(|(a, d)| a + d * &f).collect();
            if g.fold(&p)? == *t {
                out.push(HitParam::exact(f, ray.length));
            }
        }
        Ok(out)
    }

    fn interiors_meet(&self, _a: &LightRay, _b: &LightRay, _tol: f64) -> Result<bool> {
        Err(Error::Unsupported("interior intersection of apartment segments".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApartmentCertificate {
    pub midpoint_types: Vec<Coords>,
    /// Types that witness at least one hit.
    pub realized: Vec<Coords>,
    pub certificate: BlockingCertificate<Coords>,
}

impl ApartmentGroup {
    /// Segments from `x` to every position of type `y_type` at distance in
    /// `(0, horizon]`, sorted by length.
    pub fn segments(&self, x: &[Rational], y_type: &[Rational], horizon: f64, window: &Window) -> Result<Vec<LightRay>> {
        let space = ApartmentSpace { group: self };
        let targets = self.orbit_points(y_type, window)?;
        let x_label = format!("x{}", Coords(x.to_vec()).label());
        let y_label = format!("type{}", Coords(y_type.to_vec()).label());
        let limit = q::from_f64(horizon).ok_or_else(|| Error::Invalid(format!("horizon {horizon} is not finite")))?;
        let limit_sq = &limit * &limit;
        let mut rays = Vec::new();
        for qv in targets {
            let v: Vec<Rational> = qv.0.iter().zip(x).map(|(a, b)| a - b).collect();
            let len_sq: Rational = v.iter().map(|d| d * d).sum();
            if len_sq.is_zero() || len_sq > limit_sq {
                continue;
            }
            rays.push(LightRay {
                id: format!("q={}", qv.label()),
                space: space.tag(),
                source: x_label.clone(),
                target: y_label.clone(),
                length: to_f64(&len_sq).sqrt(),
                length_sq: Some(len_sq),
                path: RayPath::ExactSegment { start: x.to_vec(), end: qv.0 },
            });
        }
        crate::blocking::sort_canonical(&mut rays);
        Ok(rays)
    }

    /// Checks that every segment from `x` to an orbit point of `y_type`
    /// within `horizon` has its midpoint's type among the midpoint types of
    /// `(fold(x), y_type)`. The window must contain the ball of radius
    /// `horizon` around `x` and span two periods per axis.
    pub fn verify_apartment_blocking(
        &self,
        x: &[Rational],
        y_type: &[Rational],
        horizon: f64,
        window: &Window,
    ) -> Result<ApartmentCertificate> {
        self.check_dim(x)?;
        self.check_type(y_type)?;
        let radius = q::from_f64(horizon).ok_or_else(|| Error::Invalid(format!("horizon {horizon} is not finite")))?;
        for i in 0..self.rank() {
            if &x[i] - &radius < window.lo[i] || &x[i] + &radius > window.hi[i] {
                return Err(Error::WindowTooSmall(format!("window does not contain the radius-{horizon} ball around x")));
            }
        }
        let x_type = self.fold(x)?;
        let types = self.midpoint_types(&x_type.0, y_type, window)?;
        let rays = self.segments(x, y_type, horizon, window)?;
        let space = ApartmentSpace { group: self };
        let certificate = if rays.is_empty() {
            BlockingCertificate {
                space: space.tag(),
                source: format!("x{}", Coords(x.to_vec()).label()),
                target: format!("type{}", Coords(y_type.to_vec()).label()),
                horizon: Some(horizon),
                blocker_labels: types.iter().map(|t| space.point_label(t)).collect(),
                blockers: types.clone(),
                hits: Vec::new(),
                tolerance: 0.0,
            }
        } else {
            let mut c = verify_blocking(&space, &types, &rays, 0.0)?.into_certificate()?;
            c.horizon = Some(horizon);
            c
        };
        let realized = certificate.used_blockers().into_iter().map(|i| types[i].clone()).collect();
        Ok(ApartmentCertificate { midpoint_types: types, realized, certificate })
    }
}
