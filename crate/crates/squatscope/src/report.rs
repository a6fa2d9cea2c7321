//! Writers that turn analysis structures into report files.
//!
//! Everything here is deterministic: inputs arrive pre-sorted (or in ordered
//! maps), floats use Rust's shortest-round-trip formatting, and files end
//! with a trailing newline. Equal inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::analytics::{CategoryCount, KeyShare, RankHistogram, VolumeSeries, RANK_BIN_WIDTH};
use crate::ingest::{CertStats, SetSummary};
use crate::lexical::Placement;
use crate::stats::Cdf;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("encoding {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>, ReportError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| ReportError::Io { path: path.to_path_buf(), source: e })?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })?))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ReportError + '_ {
    move |e| ReportError::Io { path: path.to_path_buf(), source: e }
}

/// Serializes any report structure as pretty-printed JSON.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| ReportError::Json { path: path.to_path_buf(), source: e })?;
    writeln!(w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Writes a distribution as `value,count,cumulative,fraction` rows.
pub fn write_cdf_csv(path: impl AsRef<Path>, cdf: &Cdf) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    cdf.write_csv(&mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Writes the set-by-vantage matrix.
pub fn write_set_summary_csv(
    path: impl AsRef<Path>,
    summary: &SetSummary,
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(
        w,
        "set,e2lds,pdns_e2lds,pdns_trademarks,pdns_categories,adns_e2lds,adns_trademarks,adns_categories"
    )
    .map_err(io_err(path))?;
    for row in &summary.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.set,
            row.e2lds,
            row.pdns.e2lds,
            row.pdns.trademarks,
            row.pdns.categories,
            row.adns.e2lds,
            row.adns.trademarks,
            row.adns.categories
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `key,domains,share` rows (hosting concentration).
pub fn write_key_shares_csv(path: impl AsRef<Path>, rows: &[KeyShare]) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "key,domains,share").map_err(io_err(path))?;
    for row in rows {
        writeln!(w, "{},{},{}", row.key, row.domains, row.share).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `word,count` rows.
pub fn write_word_counts_csv(
    path: impl AsRef<Path>,
    rows: &[(String, u64)],
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "word,count").map_err(io_err(path))?;
    for (word, count) in rows {
        writeln!(w, "{word},{count}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes trademark placement tallies.
pub fn write_placements_csv(
    path: impl AsRef<Path>,
    counts: &BTreeMap<Placement, u64>,
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "placement,count").map_err(io_err(path))?;
    for (placement, count) in counts {
        writeln!(w, "{placement},{count}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `date,count` rows (daily active domains and similar series).
pub fn write_daily_counts_csv(
    path: impl AsRef<Path>,
    series: &BTreeMap<NaiveDate, u64>,
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "date,count").map_err(io_err(path))?;
    for (date, count) in series {
        writeln!(w, "{date},{count}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `date,lookups,normalized` rows.
pub fn write_volume_csv(path: impl AsRef<Path>, series: &VolumeSeries) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "date,lookups,normalized").map_err(io_err(path))?;
    for (date, raw) in &series.raw {
        let norm = series.normalized.get(date).copied().unwrap_or(0.0);
        writeln!(w, "{date},{raw},{norm}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes one row per rank bin: `bin_start,bin_end,abusive,other`.
pub fn write_rank_histogram_csv(
    path: impl AsRef<Path>,
    hist: &RankHistogram,
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "bin_start,bin_end,abusive,other").map_err(io_err(path))?;
    for (i, (abusive, other)) in hist.abusive.iter().zip(&hist.other).enumerate() {
        let start = i as u64 * RANK_BIN_WIDTH as u64 + 1;
        let end = (i as u64 + 1) * RANK_BIN_WIDTH as u64;
        writeln!(w, "{start},{end},{abusive},{other}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `category,domains,seeds,domains_per_seed` rows.
pub fn write_category_counts_csv(
    path: impl AsRef<Path>,
    rows: &[CategoryCount],
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "category,domains,seeds,domains_per_seed").map_err(io_err(path))?;
    for row in rows {
        // Category names contain no commas today, but quote defensively.
        writeln!(
            w,
            "\"{}\",{},{},{}",
            row.category, row.domains, row.seeds, row.domains_per_seed
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `issuer,certificates,share` rows for combosquatting certificates.
pub fn write_issuer_shares_csv(
    path: impl AsRef<Path>,
    stats: &CertStats,
) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "issuer,certificates,share").map_err(io_err(path))?;
    for (issuer, count, share) in stats.issuer_shares() {
        writeln!(w, "\"{issuer}\",{count},{share}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
