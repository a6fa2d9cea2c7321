//! The on-disk interchange format for scan matches.
//!
//! A scan writes one TSV row per (observation, verdict): the pipeline's
//! downstream stages (set algebra, timelines, lexical reports) re-read these
//! rows instead of re-scanning the corpus. Rows are sorted on the full value
//! tuple before writing, so equal match sets serialize byte-identically no
//! matter how the scan was parallelised.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{ScanMatch, SquatKind};
use crate::ingest::DnsSource;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    MalformedRow { path: PathBuf, line: u64, detail: String },
}

/// One match row: an observation (date, source, qname, volume, addresses)
/// joined with one verdict (kind, trademark, span within the e2LD).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MatchRecord {
    pub date: NaiveDate,
    pub source: DnsSource,
    pub qname: String,
    pub e2ld: String,
    pub kind: SquatKind,
    pub trademark: String,
    /// Byte span of the trademark inside the e2LD; absent for typo matches,
    /// where the trademark is not a substring.
    pub span: Option<(usize, usize)>,
    pub lookups: u64,
    pub ips: BTreeSet<IpAddr>,
}

impl MatchRecord {
    pub fn from_scan(m: &ScanMatch) -> MatchRecord {
        MatchRecord {
            date: m.observation.date,
            source: m.observation.source,
            qname: m.observation.qname.clone(),
            e2ld: m.e2ld.clone(),
            kind: m.verdict.kind,
            trademark: m.verdict.trademark.clone(),
            span: m.verdict.match_span,
            lookups: m.observation.lookup_count,
            ips: m.observation.rdata_ips.clone(),
        }
    }
}

pub const MATCH_HEADER: &str =
    "# date\tsource\tqname\te2ld\tkind\ttrademark\tstart\tend\tlookups\tips";

/// Writes match rows as TSV, sorted on the full tuple. Empty span and
/// address columns hold `-`.
pub fn write_match_records<W: Write>(
    out: W,
    records: &mut Vec<MatchRecord>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    records.sort();
    records.dedup();
    writeln!(w, "{MATCH_HEADER}")?;
    for r in records.iter() {
        let (start, end) = match r.span {
            Some((s, e)) => (s.to_string(), e.to_string()),
            None => ("-".to_string(), "-".to_string()),
        };
        let ips = if r.ips.is_empty() {
            "-".to_string()
        } else {
            r.ips.iter().map(|ip| ip.to_string()).collect::<Vec<_>>().join(",")
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.date, r.source, r.qname, r.e2ld, r.kind, r.trademark, start, end, r.lookups, ips
        )?;
    }
    w.flush()
}

pub fn write_match_records_to(
    path: impl AsRef<Path>,
    records: &mut Vec<MatchRecord>,
) -> Result<(), FormatError> {
    let path = path.as_ref();
    let file =
        File::create(path).map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
    write_match_records(file, records)
        .map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })
}

/// Reads rows written by [`write_match_records`]. This is our own
/// intermediate format, so unlike the corpus readers any malformed row is a
/// hard error, not a counter.
pub fn read_match_records(path: impl AsRef<Path>) -> Result<Vec<MatchRecord>, FormatError> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| FormatError::Io { path: path.to_path_buf(), source: e })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |detail: String| FormatError::MalformedRow {
            path: path.to_path_buf(),
            line: idx as u64 + 1,
            detail,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(malformed(format!("expected 10 fields, found {}", fields.len())));
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d")
            .map_err(|e| malformed(format!("date: {e}")))?;
        let source: DnsSource = fields[1].parse().map_err(|e: String| malformed(e))?;
        let kind: SquatKind = fields[4].parse().map_err(|e: String| malformed(e))?;
        let span = match (fields[6], fields[7]) {
            ("-", "-") => None,
            (s, e) => Some((
                s.parse().map_err(|e| malformed(format!("start: {e}")))?,
                e.parse().map_err(|e| malformed(format!("end: {e}")))?,
            )),
        };
        let lookups: u64 =
            fields[8].parse().map_err(|e| malformed(format!("lookups: {e}")))?;
        let ips: BTreeSet<IpAddr> = if fields[9] == "-" {
            BTreeSet::new()
        } else {
            fields[9]
                .split(',')
                .map(|t| t.parse().map_err(|e| malformed(format!("ip: {e}"))))
                .collect::<Result<_, _>>()?
        };
        records.push(MatchRecord {
            date,
            source,
            qname: fields[2].to_string(),
            e2ld: fields[3].to_string(),
            kind,
            trademark: fields[5].to_string(),
            span,
            lookups,
            ips,
        });
    }
    Ok(records)
}
