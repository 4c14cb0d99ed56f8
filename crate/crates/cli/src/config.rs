//! Key-value configuration files.
//!
//! ```text
//! file    := line*
//! line    := blank | comment | entry
//! comment := ws* '#' any*
//! entry   := ws* key ws* '=' ws* value ws* comment?
//! key     := [a-z] [a-z0-9_]*
//! value   := any character except '#', at least one non-blank
//! ```
//!
//! Every key may appear once except `edge`, which repeats. Unknown keys and
//! keys that do not apply to the chosen space are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geoblock::rational::{parse_rational, parse_rational_vec};
use geoblock::revolution::ShootOptions;
use geoblock::Rational;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::config(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        let mut chars = key.chars();
        let valid_key = chars.next().is_some_and(|c| c.is_ascii_lowercase())
            && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if !valid_key {
            return Err(CliError::config(line, format!("malformed key `{key}`")));
        }
        if value.is_empty() {
            return Err(CliError::config(line, format!("key `{key}` has an empty value")));
        }
        out.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(out)
}

/// Entries grouped by key, consumed as they are read so leftovers can be
/// reported as unknown.
struct Table {
    map: BTreeMap<String, Vec<Entry>>,
}

impl Table {
    fn new(entries: Vec<Entry>) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
        for e in entries {
            if let Some(prev) = map.get(&e.key) {
                if e.key != "edge" {
                    return Err(CliError::config(
                        e.line,
                        format!("duplicate key `{}` (first set on line {})", e.key, prev[0].line),
                    ));
                }
            }
            map.entry(e.key.clone()).or_default().push(e);
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.map.remove(key).map(|mut v| v.remove(0))
    }

    fn take_all(&mut self, key: &str) -> Vec<Entry> {
        self.map.remove(key).unwrap_or_default()
    }

    fn require(&mut self, key: &str, what: &str) -> Result<Entry, CliError> {
        self.take(key).ok_or_else(|| CliError::Config { line: None, message: format!("{what} needs key `{key}`") })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn finish(self, context: &str) -> Result<(), CliError> {
        match self.map.into_values().next() {
            None => Ok(()),
            Some(v) => {
                let e = &v[0];
                let message = if ALL_KEYS.contains(&e.key.as_str()) {
                    format!("key `{}` does not apply to {context}", e.key)
                } else {
                    format!("unknown key `{}`", e.key)
                };
                Err(CliError::config(e.line, message))
            }
        }
    }
}

const ALL_KEYS: &[&str] = &[
    "space",
    "basis",
    "dim",
    "preset",
    "vertices",
    "edge",
    "inj",
    "sides",
    "profile",
    "epsilon",
    "coeffs",
    "step",
    "fan_step",
    "resolution",
    "tol",
    "sample_spacing",
    "diameter_grid",
    "diameter",
    "space_file",
    "operation",
    "x",
    "y",
    "horizon",
    "t_max",
    "t_step",
    "blockers",
    "geodesics",
    "grid",
    "pairs",
    "margin",
    "seed",
    "output",
    "csv",
];

fn rational(e: &Entry) -> Result<Rational, CliError> {
    parse_rational(&e.value).map_err(|err| CliError::config(e.line, format!("`{}`: {err}", e.key)))
}

fn float(e: &Entry) -> Result<f64, CliError> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(e.line, format!("`{}` expects a number, found `{}`", e.key, e.value)))
}

fn integer<T: std::str::FromStr>(e: &Entry) -> Result<T, CliError> {
    e.value
        .parse::<T>()
        .map_err(|_| CliError::config(e.line, format!("`{}` expects a nonnegative integer, found `{}`", e.key, e.value)))
}

fn boolean(e: &Entry) -> Result<bool, CliError> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CliError::config(e.line, format!("`{}` expects true or false, found `{other}`", e.key))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    Torus {
        basis: Vec<Vec<Rational>>,
    },
    Graph {
        vertices: Vec<String>,
        edges: Vec<(String, String, String)>,
        inj: Option<Rational>,
    },
    Apartment {
        sides: Vec<Rational>,
    },
    Revolution {
        coeffs: Vec<f64>,
        options: ShootOptions,
        diameter_grid: usize,
        diameter: Option<f64>,
    },
}

impl SpaceSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SpaceSpec::Torus { .. } => "torus",
            SpaceSpec::Graph { .. } => "graph",
            SpaceSpec::Apartment { .. } => "apartment",
            SpaceSpec::Revolution { .. } => "revolution",
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut table = Table::new(parse_entries(text)?)?;
        let spec = Self::from_table(&mut table)?;
        table.finish(&format!("a {} space", spec.kind()))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?).map_err(|e| e.in_file(path))
    }

    fn from_table(t: &mut Table) -> Result<Self, CliError> {
        let space = t.require("space", "a configuration")?;
        match space.value.as_str() {
            "torus" => {
                let basis = match (t.take("basis"), t.take("dim")) {
                    (Some(b), None) => b
                        .value
                        .split(';')
                        .map(|row| parse_rational_vec(row.trim()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|err| CliError::config(b.line, format!("`basis`: {err}")))?,
                    (None, Some(d)) => {
                        let n: usize = integer(&d)?;
                        (0..n).map(|i| (0..n).map(|j| Rational::from_integer(((i == j) as i64).into())).collect()).collect()
                    }
                    (None, None) => {
                        return Err(CliError::Config { line: None, message: "a torus space needs `basis` or `dim`".into() })
                    }
                    (Some(b), Some(_)) => return Err(CliError::config(b.line, "set either `basis` or `dim`, not both".into())),
                };
                Ok(SpaceSpec::Torus { basis })
            }
            "graph" => {
                let inj = t.take("inj").map(|e| rational(&e)).transpose()?;
                let (vertices, edges) = match t.take("preset") {
                    Some(p) => {
                        if t.has("vertices") || t.has("edge") {
                            return Err(CliError::config(p.line, "`preset` excludes `vertices` and `edge`".into()));
                        }
                        preset(&p)?
                    }
                    None => {
                        let v = t.require("vertices", "a graph space")?;
                        let vertices: Vec<String> =
                            v.value.split([',', ' ']).filter(|s| !s.is_empty()).map(str::to_string).collect();
                        let mut edges = Vec::new();
                        for e in t.take_all("edge") {
                            let parts: Vec<&str> = e.value.split_whitespace().collect();
                            match parts.as_slice() {
                                [name, tail, head] => edges.push((name.to_string(), tail.to_string(), head.to_string())),
                                _ => return Err(CliError::config(e.line, "`edge` expects `name tail head`".into())),
                            }
                        }
                        (vertices, edges)
                    }
                };
                Ok(SpaceSpec::Graph { vertices, edges, inj })
            }
            "apartment" => {
                let s = t.require("sides", "an apartment space")?;
                let sides = parse_rational_vec(&s.value).map_err(|err| CliError::config(s.line, format!("`sides`: {err}")))?;
                Ok(SpaceSpec::Apartment { sides })
            }
            "revolution" => {
                let coeffs = match (t.take("profile"), t.take("coeffs")) {
                    (Some(p), None) => {
                        let eps = t.take("epsilon");
                        match (p.value.as_str(), eps) {
                            ("round", None) => vec![0.0],
                            ("zoll", Some(e)) => {
                                let eps = float(&e)?;
                                vec![0.0, eps, 0.0, -eps]
                            }
                            ("zoll", None) => return Err(CliError::config(p.line, "profile `zoll` needs `epsilon`".into())),
                            ("round", Some(e)) => {
                                return Err(CliError::config(e.line, "profile `round` takes no `epsilon`".into()))
                            }
                            (other, _) => {
                                return Err(CliError::config(p.line, format!("unknown profile `{other}` (round or zoll)")))
                            }
                        }
                    }
                    (None, Some(c)) => c
                        .value
                        .split(',')
                        .map(|v| Entry { key: "coeffs".into(), value: v.trim().to_string(), line: c.line })
                        .map(|e| float(&e))
                        .collect::<Result<_, _>>()?,
                    (None, None) => return Err(CliError::Config { line: None, message: "a revolution space needs `profile` or `coeffs`".into() }),
                    (Some(p), Some(_)) => {
                        return Err(CliError::config(p.line, "set either `profile` or `coeffs`, not both".into()))
                    }
                };
                let mut options = ShootOptions::default();
                if let Some(e) = t.take("step") {
                    options.step = float(&e)?;
                }
                if let Some(e) = t.take("fan_step") {
                    options.fan_step = float(&e)?;
                }
                if let Some(e) = t.take("resolution") {
                    options.resolution = integer(&e)?;
                }
                if let Some(e) = t.take("tol") {
                    options.tol = float(&e)?;
                }
                if let Some(e) = t.take("sample_spacing") {
                    options.sample_spacing = float(&e)?;
                }
                options.validate()?;
                let diameter_grid = t.take("diameter_grid").map(|e| integer(&e)).transpose()?.unwrap_or(8);
                let diameter = t.take("diameter").map(|e| float(&e)).transpose()?;
                Ok(SpaceSpec::Revolution { coeffs, options, diameter_grid, diameter })
            }
            other => Err(CliError::config(
                space.line,
                format!("unknown space `{other}` (torus, graph, apartment or revolution)"),
            )),
        }
    }
}

fn preset(e: &Entry) -> Result<(Vec<String>, Vec<(String, String, String)>), CliError> {
    let s = |x: &str| x.to_string();
    match e.value.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["wedge"] => Ok((vec![s("v")], vec![(s("a"), s("v"), s("v")), (s("b"), s("v"), s("v"))])),
        ["theta"] => Ok((
            vec![s("u"), s("w")],
            vec![(s("a"), s("u"), s("w")), (s("b"), s("u"), s("w")), (s("c"), s("u"), s("w"))],
        )),
        ["cycle", n] => {
            let n: usize = n
                .parse()
                .map_err(|_| CliError::config(e.line, format!("`cycle` expects a length, found `{n}`")))?;
            let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let edges = (0..n).map(|i| (format!("e{i}"), format!("v{i}"), format!("v{}", (i + 1) % n.max(1)))).collect();
            Ok((vertices, edges))
        }
        _ => Err(CliError::config(e.line, format!("unknown preset `{}` (wedge, theta or cycle N)", e.value))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Enumerate,
    Block,
    Verify,
    Classify,
    Growth,
    Entropy,
    Scan,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Enumerate => "enumerate",
            Operation::Block => "block",
            Operation::Verify => "verify",
            Operation::Classify => "classify",
            Operation::Growth => "growth",
            Operation::Entropy => "entropy",
            Operation::Scan => "scan",
        }
    }

    fn parse(e: &Entry) -> Result<Self, CliError> {
        Ok(match e.value.as_str() {
            "enumerate" => Operation::Enumerate,
            "block" => Operation::Block,
            "verify" => Operation::Verify,
            "classify" => Operation::Classify,
            "growth" => Operation::Growth,
            "entropy" => Operation::Entropy,
            "scan" => Operation::Scan,
            other => return Err(CliError::config(e.line, format!("unknown operation `{other}`"))),
        })
    }
}

/// One fully validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub space: SpaceSpec,
    pub operation: Operation,
    pub x: Option<String>,
    pub y: Option<String>,
    pub horizon: Option<f64>,
    pub t_max: Option<f64>,
    pub t_step: f64,
    /// Blocker points separated by `;`.
    pub blockers: Option<Vec<String>>,
    pub geodesics: bool,
    pub grid: Option<usize>,
    pub pairs: Option<usize>,
    pub margin: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Experiment {
    pub fn new(space: SpaceSpec, operation: Operation) -> Self {
        Self {
            space,
            operation,
            x: None,
            y: None,
            horizon: None,
            t_max: None,
            t_step: 1.0,
            blockers: None,
            geodesics: false,
            grid: None,
            pairs: None,
            margin: 0.05,
            seed: 0,
            output: None,
            csv: None,
        }
    }

    /// Reads an experiment file. Relative paths (`space_file`, `output`,
    /// `csv`) resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&read(path)?, &base).map_err(|e| e.in_file(path))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut t = Table::new(parse_entries(text)?)?;
        let space = match t.take("space_file") {
            Some(e) => {
                if t.has("space") {
                    return Err(CliError::config(e.line, "`space_file` excludes an inline `space`".into()));
                }
                SpaceSpec::load(&base.join(&e.value))?
            }
            None => SpaceSpec::from_table(&mut t)?,
        };
        let op = t.require("operation", "an experiment")?;
        let mut exp = Experiment::new(space, Operation::parse(&op)?);
        exp.x = t.take("x").map(|e| e.value);
        exp.y = t.take("y").map(|e| e.value);
        exp.horizon = t.take("horizon").map(|e| float(&e)).transpose()?;
        exp.t_max = t.take("t_max").map(|e| float(&e)).transpose()?;
        if let Some(e) = t.take("t_step") {
            exp.t_step = float(&e)?;
        }
        exp.blockers = t.take("blockers").map(|e| split_points(&e.value));
        if let Some(e) = t.take("geodesics") {
            exp.geodesics = boolean(&e)?;
        }
        exp.grid = t.take("grid").map(|e| integer(&e)).transpose()?;
        exp.pairs = t.take("pairs").map(|e| integer(&e)).transpose()?;
        if let Some(e) = t.take("margin") {
            exp.margin = float(&e)?;
        }
        if let Some(e) = t.take("seed") {
            exp.seed = integer(&e)?;
        }
        exp.output = t.take("output").map(|e| base.join(e.value));
        exp.csv = t.take("csv").map(|e| base.join(e.value));
        t.finish(&format!("a {} experiment", exp.space.kind()))?;
        exp.validate()?;
        Ok(exp)
    }

    /// Checks that the keys the operation needs are present and sane.
    pub fn validate(&self) -> Result<(), CliError> {
        let missing = |what: &str| CliError::Config {
            line: None,
            message: format!("operation `{}` needs {what}", self.operation.name()),
        };
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config { line: None, message: format!("{what} must be positive, found {v}") })
            }
        };
        match self.operation {
            Operation::Scan => {
                positive(self.horizon.ok_or_else(|| missing("a horizon"))?, "horizon")?;
                if self.grid.is_none() == self.pairs.is_none() {
                    return Err(missing("exactly one of a grid or a pair count"));
                }
                if !(self.margin >= 0.0) {
                    return Err(CliError::Config { line: None, message: "margin must be nonnegative".into() });
                }
            }
            Operation::Growth | Operation::Entropy => {
                self.x.as_ref().ok_or_else(|| missing("a point x"))?;
                self.y.as_ref().ok_or_else(|| missing("a point y"))?;
                positive(self.t_max.ok_or_else(|| missing("a maximal horizon"))?, "maximal horizon")?;
                positive(self.t_step, "horizon step")?;
            }
            _ => {
                self.x.as_ref().ok_or_else(|| missing("a point x"))?;
                self.y.as_ref().ok_or_else(|| missing("a point y"))?;
                positive(self.horizon.ok_or_else(|| missing("a horizon"))?, "horizon")?;
                if self.operation == Operation::Verify && self.blockers.is_none() {
                    return Err(missing("a blocker list"));
                }
            }
        }
        Ok(())
    }
}

pub fn split_points(text: &str) -> Vec<String> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let e = parse_entries("# c\n\n space = torus  # trailing\nbasis=1,0;0,1\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], Entry { key: "space".into(), value: "torus".into(), line: 3 });
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        let err = SpaceSpec::parse("space = torus\ndim = 2\ncolour = red\n").unwrap_err();
        assert!(err.to_string().contains("unknown key `colour`"));
        let err = SpaceSpec::parse("space = torus\ndim = 2\nsides = 1\n").unwrap_err();
        assert!(err.to_string().contains("does not apply"));
        assert!(SpaceSpec::parse("space = torus\nspace = graph\n").is_err());
    }

    #[test]
    fn rejects_float_rationals() {
        assert!(SpaceSpec::parse("space = torus\nbasis = 0.5,0;0,1\n").is_err());
    }

    #[test]
    fn graph_edges_repeat() {
        let spec = SpaceSpec::parse("space = graph\nvertices = u w\nedge = a u w\nedge = b u w\nedge = c w u\n").unwrap();
        match spec {
            SpaceSpec::Graph { vertices, edges, .. } => {
                assert_eq!(vertices, vec!["u", "w"]);
                assert_eq!(edges.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zoll_profile() {
        let spec = SpaceSpec::parse("space = revolution\nprofile = zoll\nepsilon = 0.3\nresolution = 90\n").unwrap();
        match spec {
            SpaceSpec::Revolution { coeffs, options, .. } => {
                assert_eq!(coeffs, vec![0.0, 0.3, 0.0, -0.3]);
                assert_eq!(options.resolution, 90);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn experiment_requires_operation_inputs() {
        let base = Path::new(".");
        let err = Experiment::parse("space = graph\npreset = wedge\noperation = block\nx = v\n", base).unwrap_err();
        assert!(err.to_string().contains("needs a point y"));
        let exp = Experiment::parse(
            "space = graph\npreset = wedge\noperation = growth\nx = v\ny = v\nt_max = 12\nseed = 7\n",
            base,
        )
        .unwrap();
        assert_eq!(exp.seed, 7);
        assert_eq!(exp.t_step, 1.0);
    }
}
