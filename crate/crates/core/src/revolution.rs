//! Metrics of revolution `(1 + h(cos r))² dr² + sin² r dφ²` on the 2-sphere.
//!
//! Geodesics are integrated on the embedded unit sphere `S² ⊂ R³`, where the
//! metric reads `|v|² + q(z) v_z²` with `q = (2h + h²) / (1 − z²)`. Because an
//! admissible profile vanishes at `±1`, `q` is a polynomial and the equations
//! are regular everywhere, poles included. Rotation about the `z` axis is an
//! isometry, so the Clairaut quantity `(p × v)_z = sin² r · dφ/ds` is
//! conserved along every geodesic.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocking::sampled::{interior_distance, tube_hits};
use crate::blocking::{
    blocking_lower_bound, Classification, HitParam, LightRay, LightSource, RayPath, RaySpace, Sample,
    DEFAULT_EXACT_LIMIT,
};
use crate::{Error, Result};

type V3 = [f64; 3];

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn axpy(a: f64, x: &V3, y: &V3) -> V3 {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

fn dist(a: &V3, b: &V3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * u + x)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &x)| k as f64 * x).collect()
}

fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Profile `h(u) = Σ c_k u^k` and the derived coefficient `q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevolutionMetric {
    coeffs: Vec<f64>,
    #[serde(skip)]
    q: Vec<f64>,
    #[serde(skip)]
    dq: Vec<f64>,
}

impl RevolutionMetric {
    /// Validates that `h` is odd, vanishes at `u = 1` and has `sup |h| < 1` on
    /// `[−1, 1]`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let mut coeffs = coeffs;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InadmissibleProfile("coefficients must be finite".into()));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.iter().step_by(2).any(|c| *c != 0.0) {
            return Err(Error::InadmissibleProfile("h must be odd".into()));
        }
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
        if horner(&coeffs, 1.0).abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::InadmissibleProfile(format!("h(1) = {} ≠ 0", horner(&coeffs, 1.0))));
        }
        let lipschitz: f64 = coeffs.iter().enumerate().map(|(k, c)| k as f64 * c.abs()).sum();
        let n = 20_000;
        let sup = (0..=n).map(|i| horner(&coeffs, -1.0 + 2.0 * i as f64 / n as f64).abs()).fold(0.0, f64::max);
        if sup + lipschitz / n as f64 >= 1.0 {
            return Err(Error::InadmissibleProfile(format!("sup |h| ≈ {sup:.6} is not below 1")));
        }
        // h = (1 − u²) p
        let d = coeffs.len();
        let mut p = vec![0.0; d.saturating_sub(2)];
        for k in 0..p.len() {
            p[k] = coeffs[k] + if k >= 2 { p[k - 2] } else { 0.0 };
        }
        let mut two_plus_h = coeffs.clone();
        if two_plus_h.is_empty() {
            two_plus_h.push(0.0);
        }
        two_plus_h[0] += 2.0;
        let q = multiply(&p, &two_plus_h);
        let dq = derivative(&q);
        Ok(Self { coeffs, q, dq })
    }

    pub fn round() -> Self {
        Self::new(Vec::new()).expect("round profile is admissible")
    }

    /// The profile `h(u) = ε u (1 − u²)`.
    pub fn zoll(epsilon: f64) -> Result<Self> {
        Self::new(vec![0.0, epsilon, 0.0, -epsilon])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_round(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn h(&self, u: f64) -> f64 {
        horner(&self.coeffs, u)
    }

    /// Squared metric norm of an ambient tangent vector `v` at height `z`.
    fn norm_sq(&self, z: f64, v: &V3) -> f64 {
        dot(v, v) + horner(&self.q, z) * v[2] * v[2]
    }

    fn accel(&self, p: &V3, v: &V3) -> V3 {
        let z = p[2];
        let q = horner(&self.q, z);
        let s = 0.5 * horner(&self.dq, z) * v[2] * v[2];
        let mu = (-dot(v, v) * (1.0 + q) + z * s) / (1.0 + q * (1.0 - z * z));
        let c = (q * mu * z + s) / (1.0 + q);
        [mu * p[0], mu * p[1], mu * p[2] - c]
    }

    pub fn tag(&self) -> String {
        if self.is_round() {
            return "revolution[round]".into();
        }
        let c: Vec<String> = self.coeffs.iter().map(|c| format!("{c}")).collect();
        format!("revolution[{}]", c.join(","))
    }
}

impl fmt::Display for RevolutionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Polar distance `r ∈ [0, π]` from the north pole and longitude `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub r: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && phi.is_finite()) || !(-1e-12..=PI + 1e-12).contains(&r) {
            return Err(Error::Invalid(format!("polar distance {r} outside [0, π]")));
        }
        Ok(Self { r: r.clamp(0.0, PI), phi: phi.rem_euclid(TAU) })
    }

    pub fn xyz(&self) -> V3 {
        let s = self.r.sin();
        [s * self.phi.cos(), s * self.phi.sin(), self.r.cos()]
    }

    pub fn from_xyz(p: &V3) -> Self {
        let r = p[2].clamp(-1.0, 1.0).acos();
        let phi = p[1].atan2(p[0]).rem_euclid(TAU);
        Self { r, phi }
    }

    pub fn label(&self) -> String {
        format!("({:.9},{:.9})", self.r, self.phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct State {
    p: V3,
    v: V3,
}

impl State {
    /// Unit-speed initial state at `x` heading at angle `theta` from the
    /// southward meridian direction towards increasing `φ`.
    fn initial(metric: &RevolutionMetric, x: &SpherePoint, theta: f64) -> Self {
        let (sr, cr) = x.r.sin_cos();
        let (sp, cp) = x.phi.sin_cos();
        let u1 = [cr * cp, cr * sp, -sr];
        let u2 = [-sp, cp, 0.0];
        let stretch = 1.0 + metric.h(cr);
        let v = axpy(theta.cos() / stretch, &u1, &[theta.sin() * u2[0], theta.sin() * u2[1], 0.0]);
        Self { p: x.xyz(), v }
    }

    fn clairaut(&self) -> f64 {
        cross(&self.p, &self.v)[2]
    }
}

fn rk4(m: &RevolutionMetric, s: &State, h: f64) -> State {
    let k1v = s.v;
    let k1a = m.accel(&s.p, &s.v);
    let p2 = axpy(h / 2.0, &k1v, &s.p);
    let v2 = axpy(h / 2.0, &k1a, &s.v);
    let k2a = m.accel(&p2, &v2);
    let p3 = axpy(h / 2.0, &v2, &s.p);
    let v3 = axpy(h / 2.0, &k2a, &s.v);
    let k3a = m.accel(&p3, &v3);
    let p4 = axpy(h, &v3, &s.p);
    let v4 = axpy(h, &k3a, &s.v);
    let k4a = m.accel(&p4, &v4);
    let mut p = s.p;
    let mut v = s.v;
    for i in 0..3 {
        p[i] += h / 6.0 * (k1v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
        v[i] += h / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
    }
    State { p, v }
}

/// Projects back onto the unit tangent bundle; returns the speed defect.
fn renormalize(m: &RevolutionMetric, s: &mut State) -> f64 {
    let n = dot(&s.p, &s.p).sqrt();
    for x in s.p.iter_mut() {
        *x /= n;
    }
    let radial = dot(&s.v, &s.p);
    s.v = axpy(-radial, &s.p, &s.v);
    let g = m.norm_sq(s.p[2], &s.v);
    let scale = g.sqrt();
    for x in s.v.iter_mut() {
        *x /= scale;
    }
    (g - 1.0).abs()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    /// Largest deviation of the Clairaut quantity from its initial value.
    pub clairaut: f64,
    /// Accumulated unit-speed correction.
    pub speed: f64,
}

/// Integrates from `start` over `[0, length]` with the largest step `≤ step`
/// that divides `length`; `visit` sees every state including the first.
fn integrate(
    m: &RevolutionMetric,
    start: State,
    length: f64,
    step: f64,
    mut visit: impl FnMut(usize, f64, &State),
) -> (State, Drift, f64) {
    let n = (length / step).ceil().max(1.0) as usize;
    let h = length / n as f64;
    let mut s = start;
    let j0 = s.clairaut();
    let mut drift = Drift::default();
    visit(0, 0.0, &s);
    for i in 1..=n {
        s = rk4(m, &s, h);
        drift.speed += renormalize(m, &mut s);
        drift.clairaut = drift.clairaut.max((s.clairaut() - j0).abs());
        visit(i, i as f64 * h, &s);
    }
    (s, drift, h)
}

fn breach_scale(length: f64, step: f64) -> f64 {
    length.max(1.0) * (step / 1e-3).powi(4).max(1.0)
}

fn check_drift(drift: &Drift, length: f64, step: f64) -> Result<()> {
    let scale = breach_scale(length, step);
    if drift.clairaut > 1e-7 * scale {
        return Err(Error::ToleranceBreach(format!("Clairaut drift {:.3e} over length {length}", drift.clairaut)));
    }
    if drift.speed > 1e-9 * scale {
        return Err(Error::ToleranceBreach(format!("unit-speed drift {:.3e} over length {length}", drift.speed)));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowPath {
    pub samples: Vec<Sample>,
    pub end: V3,
    pub end_velocity: V3,
    pub drift: Drift,
}

/// Unit-speed geodesic from `point` in direction `direction` (radians from
/// the southward meridian), sampled at every integration step.
pub fn geodesic_flow(
    metric: &RevolutionMetric,
    point: &SpherePoint,
    direction: f64,
    length: f64,
    step: f64,
) -> Result<FlowPath> {
    if !(step > 0.0 && length > 0.0 && length.is_finite()) {
        return Err(Error::Invalid(format!("need step > 0 and finite length > 0, got {step}, {length}")));
    }
    let mut samples = Vec::new();
    let (end, drift, _) = integrate(metric, State::initial(metric, point, direction), length, step, |_, t, s| {
        samples.push(Sample { t, point: s.p.to_vec() })
    });
    check_drift(&drift, length, step)?;
    Ok(FlowPath { samples, end: end.p, end_velocity: end.v, drift })
}

/// Position and velocity mismatch after one period `2π`.
pub fn closure_error(metric: &RevolutionMetric, point: &SpherePoint, direction: f64, step: f64) -> Result<(f64, f64)> {
    let start = State::initial(metric, point, direction);
    let (end, drift, _) = integrate(metric, start, TAU, step, |_, _, _| {});
    check_drift(&drift, TAU, step)?;
    Ok((dist(&end.p, &start.p), dist(&end.v, &start.v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Integration step for refinement and emitted rays.
    pub step: f64,
    /// Coarser step for the initial fan of directions.
    pub fan_step: f64,
    /// Number of initial directions scanned.
    pub resolution: usize,
    /// Tube radius for interior tests.
    pub tol: f64,
    /// Arc-length spacing of stored ray samples.
    pub sample_spacing: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { step: 1e-3, fan_step: 5e-3, resolution: 360, tol: 1e-4, sample_spacing: 1e-2 }
    }
}

impl ShootOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.step, self.fan_step, self.tol, self.sample_spacing];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || self.resolution < 8 {
            return Err(Error::Invalid(format!("invalid shooting options {self:?}")));
        }
        Ok(())
    }
}

/// One refined light ray found by shooting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub origin: SpherePoint,
    pub angle: f64,
    pub length: f64,
    pub terminal: V3,
    pub miss: f64,
    pub clairaut_drift: f64,
    pub ray: LightRay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LightCensus {
    Finite { results: Vec<ShootingResult> },
    /// Almost every scanned direction reaches the target at a common length;
    /// `loops` holds one ray per such direction.
    Continuum { length: f64, hits: usize, scanned: usize, loops: Vec<ShootingResult> },
}

impl LightCensus {
    pub fn rays(&self) -> Vec<LightRay> {
        match self {
            LightCensus::Finite { results } | LightCensus::Continuum { loops: results, .. } => {
                results.iter().map(|r| r.ray.clone()).collect()
            }
        }
    }

    pub fn is_continuum(&self) -> bool {
        matches!(self, LightCensus::Continuum { .. })
    }
}

fn hermite(a: &State, b: &State, h: f64, u: f64) -> (V3, V3) {
    let (u2, u3) = (u * u, u * u * u);
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let d00 = 6.0 * u2 - 6.0 * u;
    let d10 = 3.0 * u2 - 4.0 * u + 1.0;
    let d01 = -6.0 * u2 + 6.0 * u;
    let d11 = 3.0 * u2 - 2.0 * u;
    let mut p = [0.0; 3];
    let mut v = [0.0; 3];
    for i in 0..3 {
        p[i] = h00 * a.p[i] + h10 * h * a.v[i] + h01 * b.p[i] + h11 * h * b.v[i];
        v[i] = (d00 * a.p[i] + d01 * b.p[i]) / h + d10 * a.v[i] + d11 * b.v[i];
    }
    (p, v)
}

/// A local minimum of the distance to the target along one direction.
#[derive(Clone, Copy, Debug)]
struct Approach {
    t: f64,
    miss: f64,
    /// `(p × v) · y`, a signed cross-track offset that changes sign as the
    /// geodesic sweeps across `y`.
    side: f64,
}

/// Closest approach to `y` on the Hermite interpolant of `states[i-1..=i+1]`.
fn refine_approach(states: &[State], i: usize, h: f64, y: &V3) -> Approach {
    let eval = |u: f64| {
        let (k, f) = if u < 1.0 { (i - 1, u) } else { (i, u - 1.0) };
        hermite(&states[k], &states[k + 1], h, f)
    };
    let f = |u: f64| {
        let (p, _) = eval(u);
        dist(&p, y)
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let u = 0.5 * (a + b);
    let (p, v) = eval(u);
    Approach { t: (i as f64 - 1.0 + u) * h, miss: dist(&p, y), side: dot(&cross(&p, &v), y) }
}

fn approaches(states: &[State], h: f64, y: &V3, t_min: f64, t_max: f64) -> Vec<Approach> {
    let d: Vec<f64> = states.iter().map(|s| dist(&s.p, y)).collect();
    let mut out = Vec::new();
    for i in 1..d.len().saturating_sub(1) {
        let t = i as f64 * h;
        if t < t_min - h || t > t_max + h {
            continue;
        }
        if d[i - 1] > d[i] && d[i] <= d[i + 1] {
            let a = refine_approach(states, i, h, y);
            if a.t > t_min && a.t <= t_max {
                out.push(a);
            }
        }
    }
    out
}

/// Geodesics from one point in `resolution` equally spaced directions.
struct Fan {
    origin: SpherePoint,
    angles: Vec<f64>,
    h: f64,
    states: Vec<Vec<State>>,
}

impl Fan {
    fn build(metric: &RevolutionMetric, origin: SpherePoint, resolution: usize, length: f64, step: f64) -> Self {
        let angles: Vec<f64> = (0..resolution).map(|k| TAU * k as f64 / resolution as f64).collect();
        let runs: Vec<(Vec<State>, f64)> = angles
            .par_iter()
            .map(|&theta| {
                let mut states = Vec::new();
                let (_, _, h) =
                    integrate(metric, State::initial(metric, &origin, theta), length, step, |_, _, s| states.push(*s));
                (states, h)
            })
            .collect();
        let h = runs[0].1;
        Self { origin, angles, h, states: runs.into_iter().map(|r| r.0).collect() }
    }
}

struct Bracket {
    lo: f64,
    hi: f64,
    t: f64,
}

/// Everything a shooting query shares: metric, options and the fan at `x`.
struct Shooter<'a> {
    metric: &'a RevolutionMetric,
    opts: ShootOptions,
    fan: &'a Fan,
}

const MATCH_WINDOW: f64 = 0.2;
const CAPTURE: f64 = 0.3;
const EXACT_MISS: f64 = 1e-6;

impl Shooter<'_> {
    fn t_min(&self) -> f64 {
        self.opts.tol.sqrt()
    }

    fn fan_approaches(&self, y: &V3, horizon: f64) -> Vec<Vec<Approach>> {
        let t_min = self.t_min();
        self.fan.states.iter().map(|s| approaches(s, self.fan.h, y, t_min, horizon + MATCH_WINDOW)).collect()
    }

    fn brackets(&self, per_dir: &[Vec<Approach>], horizon: f64) -> Vec<Bracket> {
        let n = per_dir.len();
        let mut out = Vec::new();
        for k in 0..n {
            let lo = self.fan.angles[k];
            let hi = if k + 1 < n { self.fan.angles[k + 1] } else { self.fan.angles[0] + TAU };
            for a in &per_dir[k] {
                for b in &per_dir[(k + 1) % n] {
                    if (a.t - b.t).abs() < MATCH_WINDOW
                        && a.side * b.side <= 0.0
                        && a.miss < CAPTURE
                        && b.miss < CAPTURE
                        && a.t.min(b.t) <= horizon + MATCH_WINDOW / 2.0
                    {
                        out.push(Bracket { lo, hi, t: 0.5 * (a.t + b.t) });
                    }
                }
            }
        }
        out
    }

    /// Closest approach near `t_guess` along direction `theta`, precise step.
    fn approach_at(&self, theta: f64, t_guess: f64, y: &V3) -> Option<Approach> {
        let w = MATCH_WINDOW;
        let mut states = Vec::new();
        let (_, _, h) = integrate(
            self.metric,
            State::initial(self.metric, &self.fan.origin, theta),
            t_guess + w,
            self.opts.step,
            |_, _, s| states.push(*s),
        );
        approaches(&states, h, y, (t_guess - w).max(self.t_min()), t_guess + w)
            .into_iter()
            .min_by(|a, b| (a.t - t_guess).abs().total_cmp(&(b.t - t_guess).abs()))
    }

    /// Illinois iteration on the signed offset. Returns `(angle, approach)` if
    /// the miss distance drops below `1e-8`.
    fn refine(&self, bracket: &Bracket, y: &V3) -> Result<Option<(f64, Approach)>> {
        let Some(mut fa) = self.approach_at(bracket.lo, bracket.t, y) else { return Ok(None) };
        let Some(mut fb) = self.approach_at(bracket.hi, bracket.t, y) else { return Ok(None) };
        let (mut a, mut b) = (bracket.lo, bracket.hi);
        if fa.side * fb.side > 0.0 {
            return Ok(None);
        }
        let mut best = if fa.miss < fb.miss { (a, fa) } else { (b, fb) };
        for _ in 0..100 {
            if best.1.miss < 1e-10 || (b - a).abs() < 1e-15 {
                break;
            }
            let mut c = (a * fb.side - b * fa.side) / (fb.side - fa.side);
            if !(c > a.min(b) && c < a.max(b)) {
                c = 0.5 * (a + b);
            }
            let Some(fc) = self.approach_at(c, best.1.t, y) else { break };
            if fc.miss < best.1.miss {
                best = (c, fc);
            }
            if fc.side * fb.side <= 0.0 {
                a = b;
                fa = fb;
                b = c;
                fb = fc;
            } else {
                b = c;
                fb = fc;
                fa.side /= 2.0;
            }
        }
        if best.1.miss < 1e-8 {
            return Ok(Some(best));
        }
        if best.1.miss < 1e-4 {
            return Err(Error::UnresolvedBracket { angle: best.0 });
        }
        Ok(None)
    }

    fn trace(&self, theta: f64, length: f64, target: &SpherePoint, space_tag: &str) -> Result<ShootingResult> {
        let mut samples = Vec::new();
        let stride = ((self.opts.sample_spacing / self.opts.step).round() as usize).max(1);
        let n_steps = (length / self.opts.step).ceil().max(1.0) as usize;
        let (end, drift, _) = integrate(
            self.metric,
            State::initial(self.metric, &self.fan.origin, theta),
            length,
            self.opts.step,
            |i, t, s| {
                if i % stride == 0 || i == n_steps {
                    samples.push(Sample { t, point: s.p.to_vec() });
                }
            },
        );
        check_drift(&drift, length, self.opts.step)?;
        let ray = LightRay {
            id: format!("θ={theta:.9} L={length:.9}"),
            space: space_tag.to_string(),
            source: self.fan.origin.label(),
            target: target.label(),
            length,
            length_sq: None,
            path: RayPath::SampledPath { samples },
        };
        Ok(ShootingResult {
            origin: self.fan.origin,
            angle: theta,
            length,
            terminal: end.p,
            miss: dist(&end.p, &target.xyz()),
            clairaut_drift: drift.clairaut,
            ray,
        })
    }

    fn is_light(&self, r: &ShootingResult, y: &V3) -> bool {
        let LightRay { path: RayPath::SampledPath { samples }, length, .. } = &r.ray else { return false };
        let tol = self.opts.tol;
        tube_hits(samples, *length, &self.fan.origin.xyz(), tol).is_empty()
            && tube_hits(samples, *length, y, tol).is_empty()
    }

    fn census(&self, y: &SpherePoint, horizon: f64) -> Result<LightCensus> {
        let tag = self.metric.tag();
        let yx = y.xyz();
        let per_dir = self.fan_approaches(&yx, horizon);
        let exact: Vec<(usize, f64)> = per_dir
            .iter()
            .enumerate()
            .filter_map(|(k, a)| {
                a.iter()
                    .filter(|a| a.miss < EXACT_MISS && a.t <= horizon + 1e-6)
                    .map(|a| a.t)
                    .min_by(f64::total_cmp)
                    .map(|t| (k, t))
            })
            .collect();
        let n = per_dir.len();
        if exact.len() * 10 >= n * 9 {
            let mut lengths: Vec<f64> = exact.iter().map(|e| e.1).collect();
            lengths.sort_by(f64::total_cmp);
            let length = lengths[lengths.len() / 2];
            let mut loops = Vec::new();
            for &(k, t) in &exact {
                let r = self.trace(self.fan.angles[k], t, y, &tag)?;
                if self.is_light(&r, &yx) {
                    loops.push(r);
                }
            }
            return Ok(LightCensus::Continuum { length, hits: exact.len(), scanned: n, loops });
        }
        let mut found: Vec<(f64, f64)> = Vec::new();
        for b in self.brackets(&per_dir, horizon) {
            if let Some((theta, a)) = self.refine(&b, &yx)? {
                if a.t <= horizon + 1e-9 {
                    found.push((theta.rem_euclid(TAU), a.t));
                }
            }
        }
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
        let mut unique: Vec<(f64, f64)> = Vec::new();
        for f in found {
            let dup = unique.iter().any(|u| {
                let d = (u.0 - f.0).abs();
                d.min(TAU - d) < 1e-5 && (u.1 - f.1).abs() < 1e-5
            });
            if !dup {
                unique.push(f);
            }
        }
        let mut results = Vec::new();
        for (theta, t) in unique {
            let r = self.trace(theta, t, y, &tag)?;
            if self.is_light(&r, &yx) {
                results.push(r);
            }
        }
        results.sort_by(|a, b| a.ray.canonical_cmp(&b.ray));
        Ok(LightCensus::Finite { results })
    }

    /// Shortest arrival at `y` among the fan's passages.
    fn distance(&self, y: &SpherePoint, horizon: f64) -> Result<Option<f64>> {
        let yx = y.xyz();
        if dist(&yx, &self.fan.origin.xyz()) < 1e-12 {
            return Ok(Some(0.0));
        }
        let per_dir = self.fan_approaches(&yx, horizon);
        let mut best = per_dir
            .iter()
            .flatten()
            .filter(|a| a.miss < EXACT_MISS && a.t <= horizon)
            .map(|a| a.t)
            .fold(f64::INFINITY, f64::min);
        let mut brackets = self.brackets(&per_dir, horizon);
        brackets.sort_by(|a, b| a.t.total_cmp(&b.t));
        for b in brackets {
            if b.t > best + MATCH_WINDOW {
                break;
            }
            if let Some((_, a)) = self.refine(&b, &yx)? {
                best = best.min(a.t);
            }
        }
        Ok(best.is_finite().then_some(best))
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0) {
        return Err(Error::Invalid(format!("horizon {horizon} must be positive")));
    }
    if horizon > TAU + 1e-9 {
        return Err(Error::HorizonTooLong(horizon));
    }
    Ok(())
}

/// Light rays from `x` to `y` of length at most `horizon ≤ 2π`.
pub fn shoot_light(
    metric: &RevolutionMetric,
    x: &SpherePoint,
    y: &SpherePoint,
    horizon: f64,
    opts: &ShootOptions,
) -> Result<LightCensus> {
    opts.validate()?;
    check_horizon(horizon)?;
    let fan = Fan::build(metric, *x, opts.resolution, horizon + MATCH_WINDOW, opts.fan_step);
    Shooter { metric, opts: *opts, fan: &fan }.census(y, horizon)
}

/// Riemannian distance by shooting: the shortest geodesic arrival.
pub fn distance(metric: &RevolutionMetric, x: &SpherePoint, y: &SpherePoint, opts: &ShootOptions) -> Result<f64> {
    opts.validate()?;
    let fan = Fan::build(metric, *x, opts.resolution, DISTANCE_REACH, opts.fan_step);
    Shooter { metric, opts: *opts, fan: &fan }
        .distance(y, DISTANCE_REACH - MATCH_WINDOW)?
        .ok_or_else(|| Error::Invalid(format!("no geodesic from {} reaches {}", x.label(), y.label())))
}

/// Every pair of points lies on a closed geodesic of length `2π`, so
/// distances never exceed `π`.
const DISTANCE_REACH: f64 = PI + 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub value: f64,
    pub grid: usize,
    pub argmax: (SpherePoint, SpherePoint),
}

/// Largest distance over a polar grid. Sources are taken on the meridian
/// `φ = 0` and targets in `φ ∈ [0, π]`, which covers all pairs up to the
/// rotation and reflection symmetries.
pub fn diameter_estimate(metric: &RevolutionMetric, grid: usize, opts: &ShootOptions) -> Result<DiameterEstimate> {
    opts.validate()?;
    if grid < 2 {
        return Err(Error::Invalid("diameter grid needs at least 2 divisions".into()));
    }
    let step = PI / grid as f64;
    let mut best: Option<DiameterEstimate> = None;
    for i in 0..=grid {
        let x = SpherePoint::new(i as f64 * step, 0.0)?;
        let fan = Fan::build(metric, x, opts.resolution, DISTANCE_REACH, opts.fan_step);
        let shooter = Shooter { metric, opts: *opts, fan: &fan };
        let targets: Vec<SpherePoint> = (0..=grid)
            .flat_map(|j| (0..=grid).map(move |l| (j, l)))
            .map(|(j, l)| SpherePoint::new(j as f64 * step, l as f64 * step))
            .collect::<Result<_>>()?;
        let distances: Vec<Result<Option<f64>>> =
            targets.par_iter().map(|y| shooter.distance(y, DISTANCE_REACH - MATCH_WINDOW)).collect();
        for (y, d) in targets.iter().zip(distances) {
            if let Some(d) = d? {
                if best.as_ref().is_none_or(|b| d > b.value) {
                    best = Some(DiameterEstimate { value: d, grid, argmax: (x, *y) });
                }
            }
        }
    }
    best.ok_or_else(|| Error::Invalid("no distances computed".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPair {
    pub x: SpherePoint,
    pub y: SpherePoint,
    pub distance: f64,
    pub m_t: usize,
    pub lower_bound: usize,
    pub continuum: bool,
    pub classification: Classification,
    /// Ids of a largest interior-disjoint family when the pair violates cross
    /// blocking.
    pub family: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub space: String,
    /// Polar grid divisions, absent for sampled pairs.
    pub grid: Option<usize>,
    /// Seed of the pair sampler, absent for grid scans.
    pub seed: Option<u64>,
    pub horizon: f64,
    pub diameter: f64,
    pub margin: f64,
    pub pairs: Vec<ScanPair>,
}

impl ScanReport {
    pub fn violated(&self) -> impl Iterator<Item = &ScanPair> {
        self.pairs.iter().filter(|p| p.classification == Classification::CrossBlockedViolated)
    }
}

/// Pairs of a polar grid: sources on the meridian `φ = 0` away from the
/// poles, targets over `r ∈ [0, π]`, `φ ∈ [0, π]`.
pub fn grid_pairs(grid: usize) -> Result<Vec<(SpherePoint, SpherePoint)>> {
    if grid < 2 {
        return Err(Error::Invalid("scan grid needs at least 2 divisions".into()));
    }
    let step = PI / grid as f64;
    let mut pairs = Vec::new();
    for i in 1..grid {
        let x = SpherePoint::new(i as f64 * step, 0.0)?;
        for j in 0..=grid {
            for l in 0..=grid {
                if j == i && l == 0 {
                    continue;
                }
                pairs.push((x, SpherePoint::new(j as f64 * step, l as f64 * step)?));
            }
        }
    }
    Ok(pairs)
}

/// `count` pairs drawn from a seeded generator: sources uniform in `r` on the
/// meridian `φ = 0`, targets uniform with respect to round area.
pub fn random_pairs(count: usize, seed: u64) -> Result<Vec<(SpherePoint, SpherePoint)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let x = SpherePoint::new(rng.gen_range(0.05..PI - 0.05), 0.0)?;
        let r = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
        let y = SpherePoint::new(r, rng.gen_range(0.0..2.0 * PI))?;
        pairs.push((x, y));
    }
    Ok(pairs)
}

/// Classifies every grid pair against cross blocking. A pair is violated
/// when `margin < d(x, y) < diameter − margin` and at least three of its
/// light rays have pairwise disjoint interiors.
pub fn scan(
    metric: &RevolutionMetric,
    grid: usize,
    horizon: f64,
    diameter: f64,
    margin: f64,
    opts: &ShootOptions,
) -> Result<ScanReport> {
    let pairs = scan_pairs(metric, &grid_pairs(grid)?, horizon, diameter, margin, opts)?;
    Ok(ScanReport { space: metric.tag(), grid: Some(grid), seed: None, horizon, diameter, margin, pairs })
}

/// Classifies the given pairs; consecutive pairs sharing a source reuse one
/// geodesic fan.
pub fn scan_pairs(
    metric: &RevolutionMetric,
    pairs: &[(SpherePoint, SpherePoint)],
    horizon: f64,
    diameter: f64,
    margin: f64,
    opts: &ShootOptions,
) -> Result<Vec<ScanPair>> {
    opts.validate()?;
    check_horizon(horizon)?;
    let space = SphereSpace::new(metric.clone(), *opts).with_diameter(diameter);
    let mut out = Vec::with_capacity(pairs.len());
    for group in pairs.chunk_by(|a, b| a.0 == b.0) {
        let x = group[0].0;
        let fan = Fan::build(metric, x, opts.resolution, horizon + MATCH_WINDOW, opts.fan_step);
        let shooter = Shooter { metric, opts: *opts, fan: &fan };
        let found: Vec<Result<ScanPair>> = group
            .par_iter()
            .map(|(_, y)| {
                let census = shooter.census(y, horizon)?;
                let rays = census.rays();
                let distance = match &census {
                    LightCensus::Continuum { length, .. } => *length,
                    LightCensus::Finite { .. } => rays.iter().map(|r| r.length).fold(f64::INFINITY, f64::min),
                };
                let interior = distance > margin && distance < diameter - margin;
                let (lower_bound, family) = if interior && !census.is_continuum() && rays.len() >= 3 {
                    let f = blocking_lower_bound(&space, &rays, DEFAULT_EXACT_LIMIT, opts.tol)?;
                    (f.size(), f.rays)
                } else {
                    (rays.len().min(2), Vec::new())
                };
                let classification = if !interior || census.is_continuum() {
                    Classification::Indeterminate
                } else if lower_bound >= 3 {
                    Classification::CrossBlockedViolated
                } else {
                    Classification::CrossBlockedConsistent
                };
                let family = if classification == Classification::CrossBlockedViolated { family } else { Vec::new() };
                Ok(ScanPair {
                    x,
                    y: *y,
                    distance,
                    m_t: rays.len(),
                    lower_bound,
                    continuum: census.is_continuum(),
                    classification,
                    family,
                })
            })
            .collect();
        for p in found {
            out.push(p?);
        }
    }
    Ok(out)
}

/// A metric of revolution as a ray space for the blocking machinery.
#[derive(Debug)]
pub struct SphereSpace {
    metric: RevolutionMetric,
    opts: ShootOptions,
    diameter_grid: usize,
    diameter: OnceLock<f64>,
}

impl SphereSpace {
    pub fn new(metric: RevolutionMetric, opts: ShootOptions) -> Self {
        Self { metric, opts, diameter_grid: 8, diameter: OnceLock::new() }
    }

    /// Uses a known diameter instead of estimating it.
    pub fn with_diameter(self, diameter: f64) -> Self {
        let _ = self.diameter.set(diameter);
        self
    }

    pub fn with_diameter_grid(mut self, grid: usize) -> Self {
        self.diameter_grid = grid;
        self
    }

    pub fn metric(&self) -> &RevolutionMetric {
        &self.metric
    }

    pub fn options(&self) -> &ShootOptions {
        &self.opts
    }

    pub fn census(&self, x: &SpherePoint, y: &SpherePoint, horizon: f64) -> Result<LightCensus> {
        shoot_light(&self.metric, x, y, horizon, &self.opts)
    }
}

fn samples_of(ray: &LightRay) -> Result<&[Sample]> {
    match &ray.path {
        RayPath::SampledPath { samples } => Ok(samples),
        _ => Err(Error::Invalid(format!("ray `{}` is not a sampled path", ray.id))),
    }
}

impl RaySpace for SphereSpace {
    type Point = SpherePoint;

    fn tag(&self) -> String {
        self.metric.tag()
    }

    fn exact(&self) -> bool {
        false
    }

    fn point_label(&self, p: &SpherePoint) -> String {
        p.label()
    }

    fn interior_hits(&self, ray: &LightRay, point: &SpherePoint, tol: f64) -> Result<Vec<HitParam>> {
        Ok(tube_hits(samples_of(ray)?, ray.length, &point.xyz(), tol))
    }

    fn interiors_meet(&self, a: &LightRay, b: &LightRay, tol: f64) -> Result<bool> {
        Ok(interior_distance(samples_of(a)?, a.length, samples_of(b)?, b.length, tol, tol) <= tol)
    }

    fn interior_gap(&self, a: &LightRay, b: &LightRay) -> Result<Option<f64>> {
        Ok(Some(interior_distance(samples_of(a)?, a.length, samples_of(b)?, b.length, self.opts.tol, 0.0)))
    }
}

impl LightSource for SphereSpace {
    fn enumerate_light(&self, x: &SpherePoint, y: &SpherePoint, horizon: f64) -> Result<Vec<LightRay>> {
        Ok(self.census(x, y, horizon)?.rays())
    }

    fn distance(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        distance(&self.metric, x, y, &self.opts)
    }

    fn diameter(&self) -> Result<f64> {
        if let Some(d) = self.diameter.get() {
            return Ok(*d);
        }
        let d = diameter_estimate(&self.metric, self.diameter_grid, &self.opts)?.value;
        Ok(*self.diameter.get_or_init(|| d))
    }

    fn same_point(&self, x: &SpherePoint, y: &SpherePoint) -> bool {
        dist(&x.xyz(), &y.xyz()) < 1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inadmissible_profiles() {
        assert!(matches!(RevolutionMetric::new(vec![0.1, 0.2]), Err(Error::InadmissibleProfile(_))));
        assert!(matches!(RevolutionMetric::new(vec![0.0, 0.5]), Err(Error::InadmissibleProfile(_))));
        assert!(matches!(RevolutionMetric::zoll(3.0), Err(Error::InadmissibleProfile(_))));
        assert!(RevolutionMetric::zoll(0.3).is_ok());
    }

    #[test]
    fn q_matches_definition() {
        let m = RevolutionMetric::zoll(0.3).unwrap();
        for &z in &[-0.9, -0.3, 0.0, 0.4, 0.95] {
            let h = m.h(z);
            let direct = (2.0 * h + h * h) / (1.0 - z * z);
            assert!((horner(&m.q, z) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn round_equator_reaches_antipode() {
        let m = RevolutionMetric::round();
        let x = SpherePoint::new(PI / 2.0, 0.0).unwrap();
        let path = geodesic_flow(&m, &x, PI / 2.0, PI, 1e-3).unwrap();
        let antipode = SpherePoint::new(PI / 2.0, PI).unwrap().xyz();
        assert!(dist(&path.end, &antipode) < 1e-6);
    }

    #[test]
    fn meridian_from_pole_has_length_pi() {
        let m = RevolutionMetric::zoll(0.3).unwrap();
        let pole = SpherePoint::new(0.0, 0.0).unwrap();
        let path = geodesic_flow(&m, &pole, 0.0, PI, 1e-3).unwrap();
        assert!(dist(&path.end, &[0.0, 0.0, -1.0]) < 1e-6);
    }
}
