//! Executes a validated experiment and renders its artifact.

use geoblock::apartment::{ApartmentGroup, ApartmentSpace, Coords, Window};
use geoblock::artifact::{envelope, BlockData, Continuum, EntropyData, EnumerateData};
use geoblock::blocking::{
    blocking_lower_bound, classify_pair, verify_blocking, LightRay, LightSource, RaySpace, Verification,
    DEFAULT_EXACT_LIMIT,
};
use geoblock::entropy::{counting_inequality_report, mane_estimate, GrowthSeries};
use geoblock::graph::{GraphPoint, QuotientGraph};
use geoblock::rational::{parse_rational_vec, to_f64};
use geoblock::revolution::{
    diameter_estimate, grid_pairs, random_pairs, scan_pairs, LightCensus, RevolutionMetric, ScanReport,
    SphereSpace, SpherePoint,
};
use geoblock::torus::{TorusPoint, TorusSpace};
use geoblock::{Error, Rational, Result};
use serde::Serialize;

use crate::config::{Experiment, Operation, SpaceSpec};

pub enum Space {
    Torus(TorusSpace),
    Graph { graph: QuotientGraph, inj: Option<f64> },
    Apartment(ApartmentGroup),
    Revolution { space: SphereSpace, metric: RevolutionMetric, diameter: Option<f64>, diameter_grid: usize },
}

impl Space {
    pub fn build(spec: &SpaceSpec) -> Result<Self> {
        Ok(match spec {
            SpaceSpec::Torus { basis } => Space::Torus(TorusSpace::new(basis.clone())?),
            SpaceSpec::Graph { vertices, edges, inj } => Space::Graph {
                graph: QuotientGraph::new(vertices.clone(), edges.clone())?,
                inj: inj.as_ref().map(to_f64),
            },
            SpaceSpec::Apartment { sides } => Space::Apartment(ApartmentGroup::new(sides.clone())?),
            SpaceSpec::Revolution { coeffs, options, diameter_grid, diameter } => {
                let metric = RevolutionMetric::new(coeffs.clone())?;
                let mut space = SphereSpace::new(metric.clone(), *options).with_diameter_grid(*diameter_grid);
                if let Some(d) = diameter {
                    space = space.with_diameter(*d);
                }
                Space::Revolution { space, metric, diameter: *diameter, diameter_grid: *diameter_grid }
            }
        })
    }
}

fn torus_point(space: &TorusSpace, text: &str) -> Result<TorusPoint> {
    space.point(parse_rational_vec(text)?)
}

fn coords(text: &str) -> Result<Vec<Rational>> {
    Ok(parse_rational_vec(text)?)
}

pub fn sphere_point(text: &str) -> Result<SpherePoint> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("malformed sphere point `{text}`"))))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [r, phi] => SpherePoint::new(*r, *phi),
        _ => Err(Error::Invalid(format!("sphere point `{text}` needs `r,phi`"))),
    }
}

fn each<P>(texts: &[String], f: impl Fn(&str) -> Result<P>) -> Result<Vec<P>> {
    texts.iter().map(|t| f(t)).collect()
}

/// A window containing the radius-`horizon` ball around `x` and two full
/// periods per axis.
fn apartment_window(group: &ApartmentGroup, x: &[Rational], horizon: f64) -> Window {
    let span = group.sides().iter().map(to_f64).fold(0.0, f64::max) * 2.0;
    Window::around(x, horizon + span)
}

pub struct Outcome {
    pub kind: &'static str,
    pub json: String,
    pub csv: Option<String>,
}

fn outcome<T: Serialize>(kind: &'static str, data: &T) -> Result<Outcome> {
    Ok(Outcome { kind, json: envelope(kind, data)?, csv: None })
}

fn req(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or_default()
}

pub fn execute(exp: &Experiment) -> Result<Outcome> {
    let space = Space::build(&exp.space)?;
    let (x, y) = (req(&exp.x), req(&exp.y));
    let horizon = exp.horizon.unwrap_or_default();
    match exp.operation {
        Operation::Enumerate => enumerate(&space, x, y, horizon, exp.geodesics),
        Operation::Block | Operation::Verify => block(&space, exp, x, y, horizon),
        Operation::Classify => match &space {
            Space::Torus(s) => outcome("classify", &classify_pair(s, &torus_point(s, x)?, &torus_point(s, y)?, horizon, 0.0)?),
            Space::Graph { graph, .. } => {
                outcome("classify", &classify_pair(graph, &graph.parse_point(x)?, &graph.parse_point(y)?, horizon, 0.0)?)
            }
            Space::Revolution { space, .. } => outcome(
                "classify",
                &classify_pair(space, &sphere_point(x)?, &sphere_point(y)?, horizon, space.options().tol)?,
            ),
            Space::Apartment(_) => Err(Error::Unsupported("classify on an apartment (interiors are not compared)".into())),
        },
        Operation::Growth => {
            let series = growth(&space, x, y, exp.t_max.unwrap_or_default(), exp.t_step)?;
            let csv = series.to_csv();
            let mut out = outcome("growth", &series)?;
            out.csv = Some(csv);
            Ok(out)
        }
        Operation::Entropy => {
            let series = growth(&space, x, y, exp.t_max.unwrap_or_default(), exp.t_step)?;
            let estimate = mane_estimate(&series)?;
            let (tag, oracle_rate) = match &space {
                Space::Graph { graph, .. } => (graph.tag(), Some(graph.growth_oracle()?)),
                Space::Torus(s) => (s.tag(), None),
                _ => unreachable!("growth rejects other spaces"),
            };
            let counting = match series.inj {
                Some(_) => Some(counting_inequality_report(&series)?),
                None => None,
            };
            let csv = series.to_csv();
            let data = EntropyData {
                space: tag,
                series,
                estimate,
                oracle_rate,
                oracle_entropy: oracle_rate.map(f64::ln),
                counting,
            };
            let mut out = outcome("entropy", &data)?;
            out.csv = Some(csv);
            Ok(out)
        }
        Operation::Scan => scan(&space, exp),
    }
}

fn growth(space: &Space, x: &str, y: &str, t_max: f64, step: f64) -> Result<GrowthSeries> {
    match space {
        Space::Torus(s) => s.growth_series(&torus_point(s, x)?, &torus_point(s, y)?, t_max, step),
        Space::Graph { graph, inj } => graph.growth_series(&graph.parse_point(x)?, &graph.parse_point(y)?, t_max, step, *inj),
        Space::Apartment(_) => Err(Error::Unsupported("growth series on an apartment".into())),
        Space::Revolution { .. } => Err(Error::Unsupported(
            "growth series on a surface of revolution (the round sphere has conjugate points)".into(),
        )),
    }
}

fn enumerate(space: &Space, x: &str, y: &str, horizon: f64, geodesics: bool) -> Result<Outcome> {
    fn data<S: RaySpace>(s: &S, x: &S::Point, y: &S::Point, horizon: f64, geodesics: bool, rays: Vec<LightRay>) -> EnumerateData {
        EnumerateData {
            space: s.tag(),
            source: s.point_label(x),
            target: s.point_label(y),
            horizon,
            geodesics,
            count: rays.len(),
            rays,
            continuum: None,
        }
    }
    let d = match space {
        Space::Torus(s) => {
            let (px, py) = (torus_point(s, x)?, torus_point(s, y)?);
            let rays =
                if geodesics { s.enumerate_geodesics(&px, &py, horizon)? } else { s.enumerate_light(&px, &py, horizon)? };
            data(s, &px, &py, horizon, geodesics, rays)
        }
        Space::Graph { graph, .. } => {
            let (px, py) = (graph.parse_point(x)?, graph.parse_point(y)?);
            let rays = if geodesics {
                graph.enumerate_geodesics(&px, &py, horizon)?
            } else {
                graph.enumerate_light(&px, &py, horizon)?
            };
            data(graph, &px, &py, horizon, geodesics, rays)
        }
        Space::Apartment(group) => {
            let (px, ty) = (coords(x)?, coords(y)?);
            let rays = group.segments(&px, &ty, horizon, &apartment_window(group, &px, horizon))?;
            EnumerateData {
                space: ApartmentSpace { group }.tag(),
                source: format!("x{}", Coords(px).label()),
                target: format!("type{}", Coords(ty).label()),
                horizon,
                geodesics: true,
                count: rays.len(),
                rays,
                continuum: None,
            }
        }
        Space::Revolution { space, .. } => {
            if geodesics {
                return Err(Error::Unsupported("geodesic enumeration on a surface of revolution; light only".into()));
            }
            let (px, py) = (sphere_point(x)?, sphere_point(y)?);
            let census = space.census(&px, &py, horizon)?;
            let continuum = match &census {
                LightCensus::Continuum { length, hits, scanned, .. } => {
                    Some(Continuum { length: *length, hits: *hits, scanned: *scanned })
                }
                LightCensus::Finite { .. } => None,
            };
            EnumerateData { continuum, ..data(space, &px, &py, horizon, false, census.rays()) }
        }
    };
    outcome("enumerate", &d)
}

fn certify<S: LightSource>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    horizon: f64,
    blockers: &[S::Point],
    tol: f64,
    lower: bool,
) -> Result<BlockData<S::Point>> {
    let rays = space.enumerate_light(x, y, horizon)?;
    let mut verification = verify_blocking(space, blockers, &rays, tol)?;
    if let Verification::Certified(c) = &mut verification {
        c.horizon = Some(horizon);
    }
    let lower_bound = if lower { Some(blocking_lower_bound(space, &rays, DEFAULT_EXACT_LIMIT, tol)?) } else { None };
    let realized = verification
        .certificate()
        .map(|c| c.used_blockers().into_iter().map(|i| blockers[i].clone()).collect());
    Ok(BlockData { space: space.tag(), horizon, m_t: rays.len(), verification, lower_bound, realized })
}

fn block(space: &Space, exp: &Experiment, x: &str, y: &str, horizon: f64) -> Result<Outcome> {
    let kind = exp.operation.name();
    let given = exp.blockers.as_deref();
    let lower = exp.operation == Operation::Block;
    match space {
        Space::Torus(s) => {
            let (px, py) = (torus_point(s, x)?, torus_point(s, y)?);
            let blockers = match given {
                Some(list) => each(list, |t| torus_point(s, t))?,
                None => s.midpoint_blocking_set(&px, &py),
            };
            outcome(if lower { "block" } else { "verify" }, &certify(s, &px, &py, horizon, &blockers, 0.0, lower)?)
        }
        Space::Graph { graph, .. } => {
            let (px, py) = (graph.parse_point(x)?, graph.parse_point(y)?);
            let blockers: Vec<GraphPoint> = match given {
                Some(list) => each(list, |t| graph.parse_point(t))?,
                None => graph.type_blocking_set(&px, &py)?,
            };
            outcome(if lower { "block" } else { "verify" }, &certify(graph, &px, &py, horizon, &blockers, 0.0, lower)?)
        }
        Space::Apartment(group) => {
            let (px, ty) = (coords(x)?, coords(y)?);
            let window = apartment_window(group, &px, horizon);
            let data = match given {
                None => {
                    let cert = group.verify_apartment_blocking(&px, &ty, horizon, &window)?;
                    BlockData {
                        space: cert.certificate.space.clone(),
                        horizon,
                        m_t: cert.certificate.hits.len(),
                        verification: Verification::Certified(cert.certificate),
                        lower_bound: None,
                        realized: Some(cert.realized),
                    }
                }
                Some(list) => {
                    let blockers: Vec<Coords> = each(list, |t| Ok(Coords(coords(t)?)))?;
                    let aspace = ApartmentSpace { group };
                    let rays = group.segments(&px, &ty, horizon, &window)?;
                    let mut verification = verify_blocking(&aspace, &blockers, &rays, 0.0)?;
                    if let Verification::Certified(c) = &mut verification {
                        c.horizon = Some(horizon);
                    }
                    let realized = verification
                        .certificate()
                        .map(|c| c.used_blockers().into_iter().map(|i| blockers[i].clone()).collect());
                    BlockData { space: aspace.tag(), horizon, m_t: rays.len(), verification, lower_bound: None, realized }
                }
            };
            outcome(if lower { "block" } else { "verify" }, &data)
        }
        Space::Revolution { space, metric, .. } => {
            let (px, py) = (sphere_point(x)?, sphere_point(y)?);
            let blockers = match given {
                Some(list) => each(list, sphere_point)?,
                None if metric.is_round() && space.same_point(&px, &py) => {
                    vec![SpherePoint::new(std::f64::consts::PI - px.r, px.phi + std::f64::consts::PI)?]
                }
                None => {
                    return Err(Error::Unsupported(format!(
                        "no structural blocker set on a surface of revolution; pass explicit blockers ({kind})"
                    )))
                }
            };
            let tol = space.options().tol;
            outcome(if lower { "block" } else { "verify" }, &certify(space, &px, &py, horizon, &blockers, tol, lower)?)
        }
    }
}

fn scan(space: &Space, exp: &Experiment) -> Result<Outcome> {
    let Space::Revolution { metric, diameter, diameter_grid, space } = space else {
        return Err(Error::Unsupported("scan runs on surfaces of revolution only".into()));
    };
    let opts = *space.options();
    let horizon = exp.horizon.unwrap_or_default();
    let diameter = match diameter {
        Some(d) => *d,
        None => diameter_estimate(metric, *diameter_grid, &opts)?.value,
    };
    let (pairs, grid, seed) = match (exp.grid, exp.pairs) {
        (Some(g), _) => (grid_pairs(g)?, Some(g), None),
        (None, Some(n)) => (random_pairs(n, exp.seed)?, None, Some(exp.seed)),
        (None, None) => unreachable!("validated"),
    };
    let found = scan_pairs(metric, &pairs, horizon, diameter, exp.margin, &opts)?;
    let report = ScanReport { space: metric.tag(), grid, seed, horizon, diameter, margin: exp.margin, pairs: found };
    outcome("scan", &report)
}
