use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geoblock::artifact::{envelope, Artifact, BlockData, EntropyData, EnumerateData, ErrorData};
use geoblock::blocking::PairReport;
use geoblock::entropy::GrowthSeries;
use geoblock::revolution::ScanReport;
use geoblock::torus::TorusPoint;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

const TORUS: &str = "space = torus\ndim = 2\n";
const WEDGE: &str = "# two loops at one vertex\nspace = graph\npreset = wedge\n";
const ROUND: &str = "space = revolution\nprofile = round\nresolution = 120\ndiameter = 3.141592653589793\n";
const ZOLL: &str = "space = revolution\nprofile = zoll\nepsilon = 0.3\nresolution = 180\ndiameter = 3.141592653589793\n";

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("geoblock-cli-{}-{name}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn geoblock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoblock")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sha(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Decodes the artifact and checks that re-serializing the domain value
/// reproduces the file byte for byte.
fn round_trip<T: DeserializeOwned + Serialize>(path: &Path) -> T {
    let text = std::fs::read_to_string(path).unwrap();
    let art = Artifact::parse(&text).unwrap();
    let value: T = art.decode().unwrap();
    let again = envelope(&art.kind, &value).unwrap();
    if let Some(i) = again.bytes().zip(text.bytes()).position(|(a, b)| a != b) {
        let lo = i.saturating_sub(200);
        panic!("{} does not round-trip near\n{}\nvs\n{}", path.display(), &text[lo..i + 40], &again[lo..i + 40]);
    }
    assert_eq!(again.len(), text.len());
    value
}

#[test]
fn torus_block_certifies_four_midpoints() {
    let dir = Scratch::new("block");
    let space = dir.file("torus.cfg", TORUS);
    let out = dir.path("block.json");
    let o = geoblock(&["block", "--space", s(&space), "--x", "0,0", "--y", "1/2,1/2", "--T", "30", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stderr(&o).trim(), "block: b(x,y) ≤ 4 (horizon 30), lower bound 4");
    let data: BlockData<TorusPoint> = round_trip(&out);
    let cert = data.verification.certificate().unwrap();
    assert_eq!(cert.blockers.len(), 4);
    assert_eq!(cert.hits.len(), data.m_t);
    assert!(cert.hits.iter().all(|h| h.fraction.as_ref().map(|f| f.to_string()) == Some("1/2".into())));
}

#[test]
fn verify_failure_is_reported_and_fails_report() {
    let dir = Scratch::new("verify");
    let space = dir.file("torus.cfg", TORUS);
    let out = dir.path("verify.json");
    let o = geoblock(&[
        "verify", "--space", s(&space), "--x", "0,0", "--y", "1/2,0", "--T", "3", "--blockers", "1/4,0", "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("blocking failed"));
    let data: BlockData<TorusPoint> = round_trip(&out);
    assert!(!data.verification.is_certified());
    let r = geoblock(&["report", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stdout).contains("FAIL"));
}

#[test]
fn wedge_growth_matches_closed_form() {
    let dir = Scratch::new("growth");
    let space = dir.file("wedge.cfg", WEDGE);
    let (out, csv) = (dir.path("growth.json"), dir.path("growth.csv"));
    let o = geoblock(&[
        "growth", "--space", s(&space), "--x", "v", "--y", "v", "--Tmax", "12", "--csv", s(&csv), "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("T,n,m"));
    let mut previous = 0u128;
    for (t, line) in (1u32..=12).zip(lines) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], t.to_string());
        let n: u128 = cols[1].parse().unwrap();
        assert_eq!(n - previous, 4 * 3u128.pow(t - 1), "new geodesics of length {t}");
        assert_eq!(cols[2], "4");
        previous = n;
    }
    let series: GrowthSeries = round_trip(&out);
    assert_eq!(series.horizons.len(), 12);
}

#[test]
fn wedge_entropy_against_oracle() {
    let dir = Scratch::new("entropy");
    let space = dir.file("wedge.cfg", WEDGE);
    let out = dir.path("entropy.json");
    let o = geoblock(&["entropy", "--space", s(&space), "--x", "v", "--y", "v", "--Tmax", "12", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("entropy: estimate 1.10 vs oracle log 3"), "{}", stderr(&o));
    let data: EntropyData = round_trip(&out);
    let log3 = 3f64.ln();
    assert!((data.estimate.estimate - log3).abs() <= 0.05 * log3);
    assert!((data.oracle_entropy.unwrap() - log3).abs() < 1e-8);
    assert!(data.counting.is_none());
}

#[test]
fn round_sphere_classifies_consistent() {
    let dir = Scratch::new("classify");
    let space = dir.file("round.cfg", ROUND);
    let out = dir.path("classify.json");
    let o = geoblock(&["classify", "--space", s(&space), "--x", "1,0", "--y", "2,1", "--T", "6.2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stderr(&o).trim(), "classify: cross-blocked-consistent, m_T = 2");
    let report: PairReport = round_trip(&out);
    assert_eq!(report.m_t, 2);
    let r = geoblock(&["report", s(&out)]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).contains("cross-blocked-consistent, m_T = 2"));
}

#[test]
fn enumerate_round_trips() {
    let dir = Scratch::new("enumerate");
    let space = dir.file("wedge.cfg", WEDGE);
    let out = dir.path("enum.json");
    let o = geoblock(&["enumerate", "--space", s(&space), "--x", "a@1/2", "--y", "v", "--T", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data: EnumerateData = round_trip(&out);
    assert_eq!(data.count, data.rays.len());
    assert!(data.count > 0);
}

#[test]
fn zoll_scan_is_deterministic_across_workers() {
    let dir = Scratch::new("scan");
    let space = dir.file("zoll.cfg", ZOLL);
    let mut hashes = Vec::new();
    for (i, workers) in ["1", "8", "1"].iter().enumerate() {
        let out = dir.path(&format!("scan{i}.json"));
        let o = geoblock(&["--workers", workers, "scan", "--space", s(&space), "--grid", "4", "--T", "6.2831", "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        hashes.push(sha(&out));
    }
    assert!(hashes.windows(2).all(|w| w[0] == w[1]), "{hashes:?}");
    let report: ScanReport = round_trip(&dir.path("scan0.json"));
    let violated: Vec<_> = report.violated().collect();
    assert!(!violated.is_empty());
    for p in violated {
        assert!(p.lower_bound >= 3 && p.family.len() >= 3);
        assert!(p.distance > 0.05 && p.distance < report.diameter - 0.05);
    }
}

#[test]
fn run_config_with_seed_is_reproducible() {
    let dir = Scratch::new("run");
    dir.file("zoll.cfg", ZOLL);
    let config = dir.file(
        "exp.cfg",
        "space_file = zoll.cfg\noperation = scan\nhorizon = 6.2831\npairs = 3\nseed = 11\noutput = a.json\n",
    );
    let o = geoblock(&["run", "--config", s(&config)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = sha(&dir.path("a.json"));
    let o = geoblock(&["run", "--config", s(&config)]);
    assert!(o.status.success());
    assert_eq!(sha(&dir.path("a.json")), first);
    let o = geoblock(&["--seed", "11", "run", "--config", s(&config)]);
    assert!(o.status.success());
    assert_eq!(sha(&dir.path("a.json")), first);
    let o = geoblock(&["--seed", "12", "run", "--config", s(&config)]);
    assert!(o.status.success());
    assert_ne!(sha(&dir.path("a.json")), first);
    let report: ScanReport = round_trip(&dir.path("a.json"));
    assert_eq!((report.seed, report.grid, report.pairs.len()), (Some(12), None, 3));
}

#[test]
fn config_errors_are_json() {
    let dir = Scratch::new("errors");
    let space = dir.file("bad.cfg", "space = torus\ndim = 2\ncolour = red\n");
    let o = geoblock(&["block", "--space", s(&space), "--x", "0,0", "--y", "1/2,0", "--T", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let art = Artifact::parse(&stderr(&o)).unwrap();
    let err: ErrorData = art.decode().unwrap();
    assert_eq!(err.code, "config");
    assert!(err.message.contains("line 3") && err.message.contains("colour"));

    let good = dir.file("torus.cfg", TORUS);
    let o = geoblock(&["block", "--space", s(&good), "--x", "0.5,0", "--y", "1/2,0", "--T", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(Artifact::parse(&stderr(&o)).unwrap().decode::<ErrorData>().unwrap().code, "rational");

    let o = geoblock(&["report", s(&dir.path("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let corrupt = dir.file("corrupt.json", "{\"schema\": \"geoblock/v1\"");
    let o = geoblock(&["report", s(&corrupt)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_flag_prints_json() {
    let o = geoblock(&["--schema"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["properties"]["schema"]["const"], "geoblock/v1");
}
