//! One-line summaries and the `report` table.

use geoblock::artifact::{Artifact, BlockData, EntropyData, EnumerateData, ErrorData};
use geoblock::blocking::{PairReport, Verification};
use geoblock::entropy::GrowthSeries;
use geoblock::revolution::ScanReport;
use geoblock::Result;
use serde_json::Value;

pub struct Summary {
    pub space: String,
    pub text: String,
    /// `Some(false)` when an embedded check failed.
    pub check: Option<bool>,
}

fn number(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round())
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn summarize(art: &Artifact) -> Result<Summary> {
    Ok(match art.kind.as_str() {
        "enumerate" => {
            let d: EnumerateData = art.decode()?;
            let what = if d.geodesics { "geodesic segments" } else { "light rays" };
            let text = match d.continuum {
                Some(c) => format!(
                    "continuum of loops at length {:.6} ({} of {} directions), {} sampled",
                    c.length, c.hits, c.scanned, d.count
                ),
                None => format!("{} {what} from {} to {} within T = {}", d.count, d.source, d.target, number(d.horizon)),
            };
            Summary { space: d.space, text, check: None }
        }
        "block" | "verify" => {
            let d: BlockData<Value> = art.decode()?;
            let upper = d.upper_bound();
            let text = match &d.verification {
                Verification::Certified(c) => {
                    let ub = upper.unwrap_or_default();
                    if art.kind == "block" {
                        let lower = d.lower_bound.as_ref().map_or("n/a".to_string(), |f| f.rays.len().to_string());
                        format!("b(x,y) ≤ {ub} (horizon {}), lower bound {lower}", number(d.horizon))
                    } else {
                        format!(
                            "certified: {ub} of {} blockers cover {} rays (horizon {})",
                            c.blockers.len(),
                            d.m_t,
                            number(d.horizon)
                        )
                    }
                }
                Verification::Failed(w) => {
                    format!("blocking failed at horizon {}: ray `{}` is unblocked", number(d.horizon), w.ray.id)
                }
            };
            Summary { space: d.space, text, check: Some(d.verification.is_certified()) }
        }
        "classify" => {
            let d: PairReport = art.decode()?;
            Summary { space: d.space, text: format!("{}, m_T = {}", d.classification, d.m_t), check: None }
        }
        "growth" => {
            let d: GrowthSeries = art.decode()?;
            let last = d.horizons.len() - 1;
            let text = format!("n_T = {}, m_T = {} at T = {}", d.n[last], d.m[last], number(d.horizons[last]));
            Summary { space: format!("{} -> {}", d.source, d.target), text, check: None }
        }
        "entropy" => {
            let d: EntropyData = art.decode()?;
            let mut text = format!("estimate {:.2}", d.estimate.estimate);
            match d.oracle_rate {
                Some(rate) => text.push_str(&format!(" vs oracle log {}", number(rate))),
                None => text.push_str(" (no oracle)"),
            }
            if let Some(c) = &d.counting {
                let verdict = if c.holds { "holds" } else { "FAILS" };
                text.push_str(&format!(
                    "; counting inequality {verdict} (tightest ratio {:.3})",
                    c.tightest_ratio
                ));
            }
            Summary { space: d.space, text, check: d.counting.as_ref().map(|c| c.holds) }
        }
        "scan" => {
            let d: ScanReport = art.decode()?;
            let text = format!(
                "{} cross-blocked-violated pairs out of {} (diameter {})",
                d.violated().count(),
                d.pairs.len(),
                number(d.diameter)
            );
            Summary { space: d.space, text, check: None }
        }
        _ => {
            let d: ErrorData = art.decode()?;
            Summary { space: "-".into(), text: format!("error [{}]: {}", d.code, d.message), check: Some(false) }
        }
    })
}

/// Aligned text table, one row per artifact.
pub fn table(rows: &[(String, String, Summary)]) -> String {
    let header = ["artifact", "kind", "space", "check", "summary"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|(path, kind, s)| {
            let check = match s.check {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "-",
            };
            [path.clone(), kind.clone(), s.space.clone(), check.to_string(), s.text.clone()]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cols: &[String]| {
        let padded: Vec<String> = cols
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i + 1 == cols.len() { c.clone() } else { format!("{c:<w$}") })
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(&header.map(String::from));
    for row in &cells {
        line(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_trim() {
        assert_eq!(number(30.0), "30");
        assert_eq!(number(3.0000000001), "3");
        assert_eq!(number(1.2345), "1.2345");
        assert_eq!(number(2.5), "2.5");
    }
}
