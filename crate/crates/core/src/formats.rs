//! Bit-stable serialization: schedule JSON, profile CSV, and the plot-ready
//! CSV emissions for curves, traces, and scaling tables.
//!
//! All reals are written in shortest round-trip decimal form, so
//! read(write(x)) reproduces every f64 bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::TraceSample;
use crate::error::{Error, Result};
use crate::sensitivity::{FidelityCurve, SensitivityReport, Threshold};
use crate::synthesis::{SiteProbabilityProfile, SynthesisSchedule};

pub const SCHEMA_VERSION: u32 = 1;

const PROFILE_FILE_TOL: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchDoc {
    m: i64,
    n: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaDoc {
    tool_version: String,
    schema: u32,
}

/// On-disk schedule document. Unknown fields are rejected on read.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    n: usize,
    j1: f64,
    couplings: Vec<f64>,
    intervals: Vec<f64>,
    tails: Vec<f64>,
    phases: Vec<f64>,
    branch: BranchDoc,
    meta: MetaDoc,
}

pub fn schedule_to_json(schedule: &SynthesisSchedule) -> Result<String> {
    let doc = ScheduleDoc {
        n: schedule.size().n(),
        j1: schedule.j1(),
        couplings: schedule.couplings().values().to_vec(),
        intervals: schedule.intervals().to_vec(),
        tails: schedule.tails().to_vec(),
        phases: schedule.phases().to_vec(),
        branch: BranchDoc {
            m: 0,
            n: "N".into(),
        },
        meta: MetaDoc {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            schema: SCHEMA_VERSION,
        },
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn schedule_from_json(text: &str) -> Result<SynthesisSchedule> {
    let doc: ScheduleDoc = serde_json::from_str(text)?;
    if doc.meta.schema != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: doc.meta.schema,
            expected: SCHEMA_VERSION,
        });
    }
    if doc.branch.m != 0 || doc.branch.n != "N" {
        return Err(Error::InvalidSchedule(format!(
            "unsupported branch m = {}, n = {:?}; this tool only emits m = 0, n = N",
            doc.branch.m, doc.branch.n
        )));
    }
    if doc.couplings.len() != doc.n {
        return Err(Error::InvalidSchedule(format!(
            "declared n = {} but {} couplings present",
            doc.n,
            doc.couplings.len()
        )));
    }
    SynthesisSchedule::from_parts(doc.j1, doc.couplings, doc.intervals, doc.tails, doc.phases)
}

pub fn write_schedule(path: impl AsRef<Path>, schedule: &SynthesisSchedule) -> Result<()> {
    let json = schedule_to_json(schedule)?;
    write_atomic(path, &json)
}

pub fn read_schedule(path: impl AsRef<Path>) -> Result<SynthesisSchedule> {
    schedule_from_json(&fs::read_to_string(path)?)
}

/// Parse a probability profile: one value per line or a single
/// comma-separated line (mixtures are fine); `#` starts a comment. The sum
/// may deviate from 1 by at most 1e-6 and is renormalized exactly.
pub fn parse_profile(text: &str) -> Result<SiteProbabilityProfile> {
    let mut values = Vec::new();
    for line in text.lines() {
        let data = line.split('#').next().unwrap_or("");
        for token in data.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let v: f64 = token
                .parse()
                .map_err(|_| Error::Parse(format!("not a number: {token:?}")))?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::Parse("profile file contains no values".into()));
    }
    SiteProbabilityProfile::with_tolerance(values, PROFILE_FILE_TOL)
}

/// Shortest round-trip decimal for an f64.
fn fmt(x: f64) -> String {
    format!("{x}")
}

/// Coupling and timing profile of a schedule: columns `k,coupling,interval,tail`.
pub fn schedule_table_csv(schedule: &SynthesisSchedule) -> String {
    let mut out = String::from("k,coupling,interval,tail\n");
    for k in 0..schedule.size().n() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k + 1,
            fmt(schedule.couplings().values()[k]),
            fmt(schedule.intervals()[k]),
            fmt(schedule.tails()[k]),
        ));
    }
    out
}

/// Fidelity curve: columns `eps_scaled,fidelity`, with the threshold as a
/// trailing comment row.
pub fn curve_csv(curve: &FidelityCurve, threshold: Option<(f64, Threshold)>) -> String {
    let mut out = String::from("eps_scaled,fidelity\n");
    for &(eps, f) in &curve.points {
        out.push_str(&format!("{},{}\n", fmt(eps), fmt(f)));
    }
    if let Some((f_star, th)) = threshold {
        out.push_str(&format!(
            "# eps_star,{},f_star={}{}\n",
            fmt(th.eps_star),
            fmt(f_star),
            if th.unbounded { ",unbounded" } else { "" }
        ));
    }
    out
}

/// Scaling table: columns `N,eps_star,N_times_eps_star`.
pub fn scaling_csv(report: &SensitivityReport) -> String {
    let mut out = String::from("N,eps_star,N_times_eps_star\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.n,
            fmt(row.eps_star),
            fmt(row.n_times_eps_star)
        ));
    }
    let unbounded: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.unbounded)
        .map(|r| r.n.to_string())
        .collect();
    if !unbounded.is_empty() {
        out.push_str(&format!("# unbounded,{}\n", unbounded.join(",")));
    }
    out
}

/// Evolution trace: columns `time,p1,...,p2N`.
pub fn trace_csv(trace: &[TraceSample]) -> String {
    let sites = trace.first().map_or(0, |row| row.probabilities.len());
    let mut out = String::from("time");
    for s in 1..=sites {
        out.push_str(&format!(",p{s}"));
    }
    out.push('\n');
    for row in trace {
        out.push_str(&fmt(row.time));
        for p in &row.probabilities {
            out.push_str(&format!(",{}", fmt(*p)));
        }
        out.push('\n');
    }
    out
}

/// Per-site probability table with one column per supplied series.
pub fn probability_table_csv(columns: &[(&str, &[f64])]) -> String {
    let mut out = String::from("site");
    for (name, _) in columns {
        out.push_str(&format!(",{name}"));
    }
    out.push('\n');
    let rows = columns.first().map_or(0, |(_, v)| v.len());
    for site in 0..rows {
        out.push_str(&format!("{}", site + 1));
        for (_, values) in columns {
            out.push_str(&format!(",{}", fmt(values[site])));
        }
        out.push('\n');
    }
    out
}

/// Write a file all at once via a sibling temp file and rename, so a
/// failing command never leaves a partial file behind.
pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::w_state_profile;
    use crate::synthesis::synthesize;

    #[test]
    fn schedule_roundtrip_is_bit_exact() {
        let p = w_state_profile(5).unwrap();
        let s = synthesize(&p, 1.0).unwrap();
        let json = schedule_to_json(&s).unwrap();
        let back = schedule_from_json(&json).unwrap();
        assert_eq!(s.j1().to_bits(), back.j1().to_bits());
        for (a, b) in s
            .couplings()
            .values()
            .iter()
            .chain(s.intervals())
            .chain(s.tails())
            .chain(s.phases())
            .zip(
                back.couplings()
                    .values()
                    .iter()
                    .chain(back.intervals())
                    .chain(back.tails())
                    .chain(back.phases()),
            )
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn schedule_rejects_unknown_fields_and_versions() {
        let p = w_state_profile(2).unwrap();
        let s = synthesize(&p, 1.0).unwrap();
        let json = schedule_to_json(&s).unwrap();

        let extra = json.replacen("\"n\":", "\"surprise\": 1, \"n\":", 1);
        assert!(schedule_from_json(&extra).is_err());

        let wrong_version = json.replace("\"schema\": 1", "\"schema\": 99");
        assert!(matches!(
            schedule_from_json(&wrong_version),
            Err(Error::SchemaVersion { found: 99, .. })
        ));

        assert!(schedule_from_json("{not json").is_err());
    }

    #[test]
    fn profile_parsing_accepts_both_layouts() {
        let p = parse_profile("0,0.5,0,0.5").unwrap();
        assert_eq!(p.values(), &[0.0, 0.5, 0.0, 0.5]);

        let p = parse_profile("# W profile\n0\n0.5\n0 # ancilla\n0.5\n").unwrap();
        assert_eq!(p.values(), &[0.0, 0.5, 0.0, 0.5]);

        // Slightly off-normalized input is renormalized.
        let p = parse_profile("0,0.499999,0,0.5").unwrap();
        let sum: f64 = p.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);

        assert!(parse_profile("0,-0.5,0,1.5").is_err());
        assert!(parse_profile("0,0.5,0.5").is_err());
        assert!(parse_profile("0,0.4,0,0.5").is_err());
        assert!(parse_profile("").is_err());
        assert!(parse_profile("a,b").is_err());
    }

    #[test]
    fn csv_emissions_have_expected_shape() {
        let p = w_state_profile(2).unwrap();
        let s = synthesize(&p, 1.0).unwrap();
        let table = schedule_table_csv(&s);
        let mut lines = table.lines();
        assert_eq!(lines.next(), Some("k,coupling,interval,tail"));
        assert_eq!(table.lines().count(), 3);

        let curve = FidelityCurve {
            label: "w".into(),
            n: 2,
            points: vec![(0.0, 1.0), (0.01, 0.99)],
        };
        let th = Threshold {
            eps_star: 0.01,
            unbounded: false,
        };
        let csv = curve_csv(&curve, Some((0.99, th)));
        assert!(csv.starts_with("eps_scaled,fidelity\n0,1\n"));
        assert!(csv.trim_end().ends_with("# eps_star,0.01,f_star=0.99"));
    }
}
