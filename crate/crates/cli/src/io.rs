//! Domain files and comma-delimited dumps.
//!
//! Domain files are JSON: `{"disks": [{"x": .., "y": .., "r": ..}, ..],
//! "gaps": [[i, j, k], ..]}` with `gaps` optional. Floats are written with
//! 17 significant digits so every value survives a round trip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use apollo_qmc_core::domain::{detect_gaps, DiskCoveredDomain, Gap};
use apollo_qmc_core::greedy::GreedyRow;
use apollo_qmc_core::{Circle, CubatureRule, Emission, TangencyTolerance, Vec2};
use serde::Deserialize;

use crate::parse::builtin_domain;
use crate::Error;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    disks: Vec<DiskRecord>,
    gaps: Option<Vec<[usize; 3]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiskRecord {
    x: f64,
    y: f64,
    r: f64,
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn domain_to_json(domain: &DiskCoveredDomain) -> String {
    let mut out = String::from("{\n  \"disks\": [\n");
    let disks = domain.base_disks();
    for (i, c) in disks.iter().enumerate() {
        let sep = if i + 1 < disks.len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"x\": {}, \"y\": {}, \"r\": {}}}{sep}",
            full(c.center.x),
            full(c.center.y),
            full(c.radius)
        );
    }
    out.push_str("  ],\n  \"gaps\": [");
    let gaps: Vec<String> = domain.gaps().iter().map(|g| format!("{:?}", g.members)).collect();
    out.push_str(&gaps.join(", "));
    out.push_str("]\n}\n");
    out
}

/// Parses and validates a domain document. Missing `gaps` are detected.
pub fn domain_from_json(text: &str, path: &Path, tol: &TangencyTolerance) -> Result<DiskCoveredDomain, Error> {
    let file: DomainFile =
        serde_json::from_str(text).map_err(|source| Error::Format { path: path.to_owned(), source })?;
    let disks = file
        .disks
        .iter()
        .map(|d| Circle::new(Vec2::new(d.x, d.y), d.r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::Input { path: path.to_owned(), message: e.to_string() })?;
    let gaps = match file.gaps {
        Some(g) => g.into_iter().map(|[a, b, c]| Gap::new(a, b, c)).collect(),
        None => {
            let violations = DiskCoveredDomain::from_parts(disks.clone(), Vec::new()).validate(tol);
            if !violations.is_empty() {
                return Err(Error::Invalid(violations));
            }
            detect_gaps(&disks, tol)?
        }
    };
    let domain = DiskCoveredDomain::from_parts(disks, gaps);
    let violations = domain.validate(tol);
    if violations.is_empty() {
        Ok(domain)
    } else {
        Err(Error::Invalid(violations))
    }
}

/// Reads a domain file, or builds a `builtin:` domain.
pub fn load_domain(spec: &str, tol: &TangencyTolerance) -> Result<DiskCoveredDomain, Error> {
    if let Some(built) = builtin_domain(spec) {
        return built;
    }
    let path = Path::new(spec);
    domain_from_json(&read(path)?, path, tol)
}

pub fn save_domain(domain: &DiskCoveredDomain, path: &Path) -> Result<(), Error> {
    write(path, &domain_to_json(domain))
}

pub fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub const PACKING_HEADER: &str = "index,x,y,r,curvature,parent_a,parent_b,parent_c";

pub fn packing_csv(emitted: &[Emission]) -> String {
    let mut out = String::with_capacity(120 * (emitted.len() + 1));
    out.push_str(PACKING_HEADER);
    out.push('\n');
    for (i, e) in emitted.iter().enumerate() {
        let c = &e.circle;
        let [a, b, p] = e.parents.map_or([-1i64; 3], |p| p.map(|v| v as i64));
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{a},{b},{p}",
            full(c.center.x),
            full(c.center.y),
            full(c.radius),
            full(c.curvature)
        );
    }
    out
}

/// One parsed row of a packing dump.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingRow {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub curvature: f64,
    pub parents: Option<[usize; 3]>,
}

pub fn parse_packing_csv(text: &str, path: &Path) -> Result<Vec<PackingRow>, Error> {
    let bad = |message: String| Error::Input { path: path.to_owned(), message };
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != PACKING_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| -> Result<f64, Error> {
            record[i].parse().map_err(|_| bad(format!("bad number {:?}", &record[i])))
        };
        let p = |i: usize| -> Result<i64, Error> {
            record[i].parse().map_err(|_| bad(format!("bad index {:?}", &record[i])))
        };
        let parents = match [p(5)?, p(6)?, p(7)?] {
            [-1, -1, -1] => None,
            [a, b, c] if a >= 0 && b >= 0 && c >= 0 => Some([a as usize, b as usize, c as usize]),
            other => return Err(bad(format!("bad parents {other:?}"))),
        };
        rows.push(PackingRow {
            index: p(0)? as usize,
            x: f(1)?,
            y: f(2)?,
            r: f(3)?,
            curvature: f(4)?,
            parents,
        });
    }
    Ok(rows)
}

pub fn rule_csv(rule: &CubatureRule) -> String {
    let mut out = String::from("index,x,y,weight\n");
    for (i, (x, w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let _ = writeln!(out, "{i},{},{},{}", full(x.x), full(x.y), full(*w));
    }
    let _ = writeln!(out, "# N={} residual_bound={}", rule.len(), full(rule.residual_bound()));
    out
}

pub fn greedy_csv(series: &[GreedyRow]) -> String {
    let mut out = String::from("N,residual,radius_accepted\n");
    for row in series {
        let _ = writeln!(out, "{},{},{}", row.n, full(row.residual), full(row.radius));
    }
    out
}

/// Comma-delimited table with a header row.
pub fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn cell(v: f64) -> String {
    full(v)
}
