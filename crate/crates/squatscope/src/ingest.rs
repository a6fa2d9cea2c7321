//! Readers for the external corpora (DNS observations, abuse label feeds,
//! trademark seed lists, rank lists, certificate logs) and the labeled set
//! algebra built on top of scan output.
//!
//! Corpus readers stream line by line in constant memory and never abort on a
//! bad record: malformed rows are counted in [`ReaderStats`] and skipped, so a
//! single mangled line in a million-record file costs one counter increment,
//! not the run. Seed lists are the opposite — they are small, curated inputs,
//! and any malformed row there is a hard error.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::domain::{parse_domain, SuffixList};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    MalformedRow { path: PathBuf, line: u64, detail: String },
    #[error("duplicate trademark {trademark:?} on line {line}")]
    DuplicateTrademark { trademark: String, line: u64 },
}

/// Which DNS vantage a record came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DnsSource {
    /// Passive DNS: aggregated resolutions with client lookup volume.
    Passive,
    /// Active DNS: daily probes of zone snapshots; no client volume.
    Active,
}

impl fmt::Display for DnsSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DnsSource::Passive => "pdns",
            DnsSource::Active => "adns",
        })
    }
}

impl FromStr for DnsSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pdns" | "passive" => Ok(DnsSource::Passive),
            "adns" | "active" => Ok(DnsSource::Active),
            other => Err(format!("unknown DNS source {other:?}")),
        }
    }
}

/// One aggregated DNS resolution record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DnsObservation {
    pub date: NaiveDate,
    pub qname: String,
    pub rrtype: String,
    /// IP addresses present in the record data; non-address rdata tokens
    /// (CNAME targets and the like) are dropped at parse time.
    pub rdata_ips: BTreeSet<IpAddr>,
    /// Client lookups that day. Zero only ever comes from active DNS, which
    /// probes names itself and sees no client traffic.
    pub lookup_count: u64,
    pub source: DnsSource,
}

/// Counters a streaming reader accumulates while it runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReaderStats {
    /// Input lines seen, comments and blanks included.
    pub lines: u64,
    /// Records successfully produced.
    pub records: u64,
    /// Malformed or out-of-period rows dropped.
    pub skipped: u64,
    /// Comment and blank lines.
    pub comments: u64,
    /// Duplicate rows dropped by readers that deduplicate.
    pub duplicates: u64,
}

/// Streaming reader for the tab-separated DNS corpus format:
/// `date  qname  rrtype  rdata  lookup_count`.
///
/// `rdata` is a comma-separated address list (possibly empty). The trailing
/// lookup field is required and positive for passive data; for active data it
/// may be absent or empty and defaults to zero.
pub struct DnsReader<R: BufRead> {
    input: R,
    source: DnsSource,
    period: Option<(NaiveDate, NaiveDate)>,
    stats: ReaderStats,
    buf: String,
}

impl DnsReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, source: DnsSource) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let file = File::open(path)
            .map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
        Ok(Self::from_reader(BufReader::new(file), source))
    }
}

impl<R: BufRead> DnsReader<R> {
    pub fn from_reader(input: R, source: DnsSource) -> Self {
        DnsReader { input, source, period: None, stats: ReaderStats::default(), buf: String::new() }
    }

    /// Restricts the reader to records dated within `[start, end]`; rows
    /// outside the window count as skipped.
    pub fn with_period(mut self, start: NaiveDate, end: NaiveDate) -> Self {
        self.period = Some((start, end));
        self
    }

    /// Counters so far; complete once the iterator has been drained.
    pub fn stats(&self) -> ReaderStats {
        self.stats
    }

    fn parse_line(&self, line: &str) -> Option<DnsObservation> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 || fields.len() > 5 {
            return None;
        }
        let date = NaiveDate::parse_from_str(fields[0].trim(), "%Y-%m-%d").ok()?;
        if let Some((start, end)) = self.period {
            if date < start || date > end {
                return None;
            }
        }
        let qname = fields[1].trim();
        if qname.is_empty() {
            return None;
        }
        let rrtype = fields[2].trim();
        let rdata = fields[3].trim();
        let rdata_ips: BTreeSet<IpAddr> = rdata
            .split(',')
            .filter_map(|tok| tok.trim().parse().ok())
            .collect();
        let lookup_field = fields.get(4).map(|f| f.trim()).filter(|f| !f.is_empty());
        let lookup_count = match (self.source, lookup_field) {
            (DnsSource::Passive, Some(v)) => {
                let n: u64 = v.parse().ok()?;
                if n == 0 {
                    return None;
                }
                n
            }
            // Passive data without client volume is not a valid aggregate.
            (DnsSource::Passive, None) => return None,
            (DnsSource::Active, Some(v)) => v.parse().ok()?,
            (DnsSource::Active, None) => 0,
        };
        Some(DnsObservation {
            date,
            qname: qname.to_ascii_lowercase(),
            rrtype: rrtype.to_string(),
            rdata_ips,
            lookup_count,
            source: self.source,
        })
    }
}

impl<R: BufRead> Iterator for DnsReader<R> {
    type Item = DnsObservation;

    fn next(&mut self) -> Option<DnsObservation> {
        loop {
            self.buf.clear();
            // I/O errors mid-file end the stream; the shortfall shows up in
            // `stats().records` versus the caller's expectations.
            let n = self.input.read_line(&mut self.buf).ok()?;
            if n == 0 {
                return None;
            }
            self.stats.lines += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                self.stats.comments += 1;
                continue;
            }
            match self.parse_line(line) {
                Some(obs) => {
                    self.stats.records += 1;
                    return Some(obs);
                }
                None => self.stats.skipped += 1,
            }
        }
    }
}

/// Where an abuse or whitelist label came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    /// Public blacklists.
    Pbl,
    /// Malware execution traces (C&C and distribution domains).
    Mal,
    /// Domains named in public APT reports.
    Apt,
    /// Spam-trap caught senders and advertised domains.
    Spa,
    /// Long-running top-rank whitelist.
    Ale,
}

impl LabelSource {
    pub const ALL: [LabelSource; 5] =
        [LabelSource::Pbl, LabelSource::Mal, LabelSource::Apt, LabelSource::Spa, LabelSource::Ale];

    /// Sources that count as abusive (everything but the whitelist).
    pub const ABUSE: [LabelSource; 4] =
        [LabelSource::Pbl, LabelSource::Mal, LabelSource::Apt, LabelSource::Spa];
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelSource::Pbl => "pbl",
            LabelSource::Mal => "mal",
            LabelSource::Apt => "apt",
            LabelSource::Spa => "spa",
            LabelSource::Ale => "ale",
        })
    }
}

impl FromStr for LabelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pbl" => Ok(LabelSource::Pbl),
            "mal" => Ok(LabelSource::Mal),
            "apt" => Ok(LabelSource::Apt),
            "spa" => Ok(LabelSource::Spa),
            "ale" => Ok(LabelSource::Ale),
            other => Err(format!("unknown label source {other:?}")),
        }
    }
}

/// One dated labeling of a domain by an external feed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LabelEvent {
    pub date: NaiveDate,
    pub domain: String,
    pub source: LabelSource,
    pub detail: Option<String>,
}

/// Reads a label feed (`date  domain  detail?` TSV). Rows are deduplicated on
/// `(date, domain)` — re-ingesting a feed is idempotent — and returned sorted.
pub fn read_labels(
    path: impl AsRef<Path>,
    source: LabelSource,
) -> Result<(Vec<LabelEvent>, ReaderStats), IngestError> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
    let mut stats = ReaderStats::default();
    let mut seen: HashSet<(NaiveDate, String)> = HashSet::new();
    let mut events = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
        stats.lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            stats.comments += 1;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parsed = (|| {
            if fields.len() < 2 || fields.len() > 3 {
                return None;
            }
            let date = NaiveDate::parse_from_str(fields[0].trim(), "%Y-%m-%d").ok()?;
            let domain = fields[1].trim().to_ascii_lowercase();
            if domain.is_empty() {
                return None;
            }
            let detail = fields.get(2).map(|d| d.trim().to_string()).filter(|d| !d.is_empty());
            Some(LabelEvent { date, domain, source, detail })
        })();
        match parsed {
            Some(ev) => {
                if seen.insert((ev.date, ev.domain.clone())) {
                    stats.records += 1;
                    events.push(ev);
                } else {
                    stats.duplicates += 1;
                }
            }
            None => stats.skipped += 1,
        }
    }
    events.sort();
    Ok((events, stats))
}

/// The business categories trademarks are curated under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    AdultContent,
    Blogging,
    Computers,
    Couriers,
    ELearning,
    EShopAuctions,
    EShopOnline,
    EShopPhysical,
    Energy,
    FileSharing,
    Financial,
    Lifestyle,
    News,
    Photography,
    Politics,
    RadioTv,
    SearchEngines,
    SocialNetworks,
    SoftwareWeb,
    Streaming,
    Telecom,
    Travel,
}

impl Category {
    pub const ALL: [Category; 22] = [
        Category::AdultContent,
        Category::Blogging,
        Category::Computers,
        Category::Couriers,
        Category::ELearning,
        Category::EShopAuctions,
        Category::EShopOnline,
        Category::EShopPhysical,
        Category::Energy,
        Category::FileSharing,
        Category::Financial,
        Category::Lifestyle,
        Category::News,
        Category::Photography,
        Category::Politics,
        Category::RadioTv,
        Category::SearchEngines,
        Category::SocialNetworks,
        Category::SoftwareWeb,
        Category::Streaming,
        Category::Telecom,
        Category::Travel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Category::AdultContent => "Adult Content",
            Category::Blogging => "Blogging",
            Category::Computers => "Computers",
            Category::Couriers => "Couriers",
            Category::ELearning => "E-Learning",
            Category::EShopAuctions => "E-Shop (Auctions)",
            Category::EShopOnline => "E-Shop (Online)",
            Category::EShopPhysical => "E-Shop (Physical)",
            Category::Energy => "Energy",
            Category::FileSharing => "File Sharing",
            Category::Financial => "Financial",
            Category::Lifestyle => "Lifestyle",
            Category::News => "News",
            Category::Photography => "Photography",
            Category::Politics => "Politics",
            Category::RadioTv => "Radio & TV",
            Category::SearchEngines => "Search Engines",
            Category::SocialNetworks => "Social Networks",
            Category::SoftwareWeb => "Software & Web",
            Category::Streaming => "Streaming",
            Category::Telecom => "Telecom",
            Category::Travel => "Travel",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    /// Accepts the canonical display names and any spelling that matches them
    /// after dropping everything but letters — `"e-shop (online)"`,
    /// `"EShopOnline"` and `"E-Shop (Online)"` all parse alike.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(char::is_ascii_alphabetic).collect::<String>().to_ascii_lowercase();
        Category::ALL
            .iter()
            .find(|c| {
                let canon: String =
                    c.name().chars().filter(char::is_ascii_alphabetic).collect::<String>().to_ascii_lowercase();
                canon == key
            })
            .copied()
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// How a trademark entered the seed list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedOrigin {
    AlexaTop500,
    ManualPolitics,
    ManualEnergy,
}

impl fmt::Display for SeedOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedOrigin::AlexaTop500 => "alexa",
            SeedOrigin::ManualPolitics => "politics",
            SeedOrigin::ManualEnergy => "energy",
        })
    }
}

impl FromStr for SeedOrigin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "alexa" | "alexatop500" => Ok(SeedOrigin::AlexaTop500),
            "politics" | "manualpolitics" => Ok(SeedOrigin::ManualPolitics),
            "energy" | "manualenergy" => Ok(SeedOrigin::ManualEnergy),
            other => Err(format!("unknown seed origin {other:?}")),
        }
    }
}

/// One curated trademark.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrademarkSeed {
    /// The string searched for inside candidate e2LDs.
    pub trademark: String,
    /// The brand's own registrable domain.
    pub domain: String,
    pub category: Category,
    pub alexa_rank: Option<u32>,
    pub origin: SeedOrigin,
}

/// Why a seed was flagged for analyst review. Flagged seeds stay in the list —
/// short or dictionary-word trademarks match floods of benign names, and that
/// is a curation judgement, not a loader decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlagReason {
    TooShort,
    DictionaryWord,
}

impl fmt::Display for FlagReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlagReason::TooShort => "too-short",
            FlagReason::DictionaryWord => "dictionary-word",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedFlag {
    pub trademark: String,
    pub line: u64,
    pub reason: FlagReason,
}

/// A loaded seed list plus any curation flags raised while loading.
#[derive(Debug, Default)]
pub struct SeedCorpus {
    pub seeds: Vec<TrademarkSeed>,
    pub flags: Vec<SeedFlag>,
    by_trademark: HashMap<String, usize>,
}

impl SeedCorpus {
    pub fn trademarks(&self) -> Vec<String> {
        self.seeds.iter().map(|s| s.trademark.clone()).collect()
    }

    pub fn get(&self, trademark: &str) -> Option<&TrademarkSeed> {
        self.by_trademark.get(trademark).map(|&i| &self.seeds[i])
    }

    pub fn category_of(&self, trademark: &str) -> Option<Category> {
        self.get(trademark).map(|s| s.category)
    }

    pub fn seeds_per_category(&self) -> BTreeMap<Category, u64> {
        let mut counts = BTreeMap::new();
        for seed in &self.seeds {
            *counts.entry(seed.category).or_insert(0) += 1;
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

fn is_valid_trademark(tm: &str) -> bool {
    tm.len() >= 2
        && tm.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

/// Loads a seed CSV (`trademark,domain,category,rank,origin`; header row
/// optional). Trademarks shorter than four characters or present in the
/// general dictionary are flagged, not dropped. Duplicate trademarks and
/// malformed rows are hard errors.
pub fn load_seeds(
    path: impl AsRef<Path>,
    general_dictionary: Option<&crate::lexical::WordList>,
) -> Result<SeedCorpus, IngestError> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut corpus = SeedCorpus::default();
    let malformed = |line: u64, detail: String| IngestError::MalformedRow {
        path: path.to_path_buf(),
        line,
        detail,
    };
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 1;
        let record = record.map_err(|e| malformed(line, e.to_string()))?;
        if line == 1 && record.get(0) == Some("trademark") {
            continue;
        }
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() != 5 {
            return Err(malformed(line, format!("expected 5 fields, found {}", record.len())));
        }
        let trademark = record[0].trim().to_ascii_lowercase();
        if !is_valid_trademark(&trademark) {
            return Err(malformed(line, format!("invalid trademark {:?}", record[0].trim())));
        }
        let domain = record[1].trim().to_ascii_lowercase();
        if domain.is_empty() {
            return Err(malformed(line, String::from("empty domain")));
        }
        let category: Category =
            record[2].trim().parse().map_err(|e: String| malformed(line, e))?;
        let rank_field = record[3].trim();
        let alexa_rank = if rank_field.is_empty() {
            None
        } else {
            Some(rank_field.parse::<u32>().map_err(|e| malformed(line, format!("rank: {e}")))?)
        };
        let origin: SeedOrigin =
            record[4].trim().parse().map_err(|e: String| malformed(line, e))?;
        if corpus.by_trademark.contains_key(&trademark) {
            return Err(IngestError::DuplicateTrademark { trademark, line });
        }
        if trademark.len() < 4 {
            corpus.flags.push(SeedFlag {
                trademark: trademark.clone(),
                line,
                reason: FlagReason::TooShort,
            });
        }
        if general_dictionary.is_some_and(|d| d.contains(&trademark)) {
            corpus.flags.push(SeedFlag {
                trademark: trademark.clone(),
                line,
                reason: FlagReason::DictionaryWord,
            });
        }
        corpus.by_trademark.insert(trademark.clone(), corpus.seeds.len());
        corpus.seeds.push(TrademarkSeed { trademark, domain, category, alexa_rank, origin });
    }
    Ok(corpus)
}

/// One logged certificate, as read from a JSON-lines transparency dump:
/// `{"names": [...], "issuer": "...", "logged_at": "YYYY-MM-DD"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertRecord {
    pub names: Vec<String>,
    pub issuer: String,
    pub logged_at: NaiveDate,
}

/// Streams certificate records from a JSON-lines file, skipping (and
/// counting) undecodable lines.
pub struct CertReader<R: BufRead> {
    input: R,
    stats: ReaderStats,
    buf: String,
}

impl CertReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let file = File::open(path)
            .map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
        Ok(Self::from_reader(BufReader::new(file)))
    }
}

impl<R: BufRead> CertReader<R> {
    pub fn from_reader(input: R) -> Self {
        CertReader { input, stats: ReaderStats::default(), buf: String::new() }
    }

    pub fn stats(&self) -> ReaderStats {
        self.stats
    }
}

impl<R: BufRead> Iterator for CertReader<R> {
    type Item = CertRecord;

    fn next(&mut self) -> Option<CertRecord> {
        loop {
            self.buf.clear();
            let n = self.input.read_line(&mut self.buf).ok()?;
            if n == 0 {
                return None;
            }
            self.stats.lines += 1;
            let line = self.buf.trim();
            if line.is_empty() || line.starts_with('#') {
                self.stats.comments += 1;
                continue;
            }
            match serde_json::from_str::<CertRecord>(line) {
                Ok(rec) => {
                    self.stats.records += 1;
                    return Some(rec);
                }
                Err(_) => self.stats.skipped += 1,
            }
        }
    }
}

/// Certificate-transparency scan summary.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CertStats {
    pub certs_total: u64,
    /// Certificates covering at least one combosquatting name.
    pub combo_certs: u64,
    /// Certificates covering at least one typosquatting name.
    pub typo_certs: u64,
    /// Distinct covered FQDNs whose e2LD got a combosquatting verdict
    /// (wildcard prefixes stripped).
    pub combo_fqdns: BTreeSet<String>,
    pub typo_fqdns: BTreeSet<String>,
    /// Issuer → count over combosquatting certificates.
    pub issuer_combo_counts: BTreeMap<String, u64>,
    /// SAN entries that did not parse to a registrable domain.
    pub skipped_names: u64,
}

impl CertStats {
    /// Issuers of combosquatting certificates with their share of that total,
    /// busiest first.
    pub fn issuer_shares(&self) -> Vec<(String, u64, f64)> {
        let mut rows: Vec<(String, u64, f64)> = self
            .issuer_combo_counts
            .iter()
            .map(|(i, &n)| (i.clone(), n, n as f64 / self.combo_certs as f64))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }
}

/// Classifies every name on every certificate. A certificate counts toward a
/// category when at least one of its names lands there; wildcard SANs are
/// scanned with the `*.` stripped.
pub fn cert_scan<I>(certs: I, scanner: &crate::classify::Scanner<'_>) -> CertStats
where
    I: IntoIterator<Item = CertRecord>,
{
    use crate::classify::SquatKind;
    let mut stats = CertStats::default();
    for cert in certs {
        stats.certs_total += 1;
        let mut cert_combo = false;
        let mut cert_typo = false;
        for name in &cert.names {
            let bare = name.strip_prefix("*.").unwrap_or(name);
            let Ok(parsed) = parse_domain(bare, scanner.suffixes) else {
                stats.skipped_names += 1;
                continue;
            };
            let verdicts = crate::classify::classify_multi(&parsed.e2ld, scanner.automaton);
            if verdicts.iter().any(|v| v.kind == SquatKind::Combosquatting) {
                cert_combo = true;
                stats.combo_fqdns.insert(parsed.fqdn.clone());
            }
            if verdicts.iter().any(|v| v.kind == SquatKind::Typosquatting) {
                cert_typo = true;
                stats.typo_fqdns.insert(parsed.fqdn);
            }
        }
        if cert_combo {
            stats.combo_certs += 1;
            *stats.issuer_combo_counts.entry(cert.issuer.clone()).or_insert(0) += 1;
        }
        if cert_typo {
            stats.typo_certs += 1;
        }
    }
    stats
}

/// The labeled set algebra over scan output.
///
/// All sets contain e2LDs. `pdns`/`adns` are the distinct combosquatting
/// e2LDs per vantage; `labeled[src]` is the subset of their union a feed
/// labeled; `abuse` is the union of the four abuse feeds (the whitelist is
/// deliberately not part of it).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivedSets {
    pub pdns: BTreeSet<String>,
    pub adns: BTreeSet<String>,
    /// e2LD → trademarks it matched, per vantage (drives trademark and
    /// category counts in the summary).
    pub pdns_trademarks: BTreeMap<String, BTreeSet<String>>,
    pub adns_trademarks: BTreeMap<String, BTreeSet<String>>,
    pub labeled: BTreeMap<LabelSource, BTreeSet<String>>,
    pub abuse: BTreeSet<String>,
    /// Label-feed domains that did not parse to a registrable domain.
    pub skipped_label_domains: u64,
}

impl DerivedSets {
    /// Every combosquatting e2LD seen on either vantage.
    pub fn universe(&self) -> BTreeSet<String> {
        self.pdns.union(&self.adns).cloned().collect()
    }

    pub fn labeled(&self, source: LabelSource) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.labeled.get(&source).unwrap_or(&EMPTY)
    }
}

/// Builds the labeled sets from match streams and label feeds.
///
/// Match streams supply `(e2LD, trademark)` pairs as produced by the scanner.
/// Feed domains may be FQDNs; each is reduced to its e2LD before membership
/// is tested, so a blacklisted host taints its whole registrable domain.
pub fn derive_sets<P, A>(
    pdns_matches: P,
    adns_matches: A,
    labels: &[LabelEvent],
    suffixes: &SuffixList,
) -> DerivedSets
where
    P: IntoIterator<Item = (String, String)>,
    A: IntoIterator<Item = (String, String)>,
{
    let mut sets = DerivedSets::default();
    for (e2ld, tm) in pdns_matches {
        sets.pdns.insert(e2ld.clone());
        sets.pdns_trademarks.entry(e2ld).or_default().insert(tm);
    }
    for (e2ld, tm) in adns_matches {
        sets.adns.insert(e2ld.clone());
        sets.adns_trademarks.entry(e2ld).or_default().insert(tm);
    }
    let universe = sets.universe();
    for src in LabelSource::ALL {
        sets.labeled.insert(src, BTreeSet::new());
    }
    for event in labels {
        let Ok(parsed) = parse_domain(&event.domain, suffixes) else {
            sets.skipped_label_domains += 1;
            continue;
        };
        if universe.contains(&parsed.e2ld) {
            sets.labeled.get_mut(&event.source).unwrap().insert(parsed.e2ld);
        }
    }
    for src in LabelSource::ABUSE {
        sets.abuse.extend(sets.labeled[&src].iter().cloned());
    }
    sets
}

/// One side (vantage) of a summary row.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SideStats {
    /// e2LDs of the set seen on this vantage.
    pub e2lds: u64,
    /// Distinct trademarks those e2LDs matched.
    pub trademarks: u64,
    /// Distinct categories those trademarks belong to.
    pub categories: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetRow {
    pub set: String,
    pub e2lds: u64,
    pub pdns: SideStats,
    pub adns: SideStats,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SetSummary {
    pub rows: Vec<SetRow>,
}

impl DerivedSets {
    fn side_stats(
        &self,
        members: &BTreeSet<String>,
        vantage: &BTreeSet<String>,
        tm_map: &BTreeMap<String, BTreeSet<String>>,
        seeds: &SeedCorpus,
    ) -> SideStats {
        let inter: Vec<&String> = members.intersection(vantage).collect();
        let mut trademarks: BTreeSet<&String> = BTreeSet::new();
        for d in &inter {
            if let Some(tms) = tm_map.get(*d) {
                trademarks.extend(tms);
            }
        }
        let categories: BTreeSet<Category> =
            trademarks.iter().filter_map(|tm| seeds.category_of(tm)).collect();
        SideStats {
            e2lds: inter.len() as u64,
            trademarks: trademarks.len() as u64,
            categories: categories.len() as u64,
        }
    }

    /// The full set-by-vantage matrix: one row per set with per-vantage
    /// intersection size, trademark count and category count.
    pub fn summary(&self, seeds: &SeedCorpus) -> SetSummary {
        let mut rows = Vec::new();
        let mut push = |name: &str, members: &BTreeSet<String>| {
            rows.push(SetRow {
                set: name.to_string(),
                e2lds: members.len() as u64,
                pdns: self.side_stats(members, &self.pdns, &self.pdns_trademarks, seeds),
                adns: self.side_stats(members, &self.adns, &self.adns_trademarks, seeds),
            });
        };
        push("CP", &self.pdns);
        push("CA", &self.adns);
        for src in LabelSource::ALL {
            push(&format!("C_{src}"), self.labeled(src));
        }
        push("C_abuse", &self.abuse);
        SetSummary { rows }
    }
}

/// One row of a daily rank list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankObservation {
    pub date: NaiveDate,
    pub rank: u32,
    pub domain: String,
}

/// Reads a `date,rank,domain` CSV (header optional); malformed rows are
/// counted and skipped.
pub fn read_ranks(path: impl AsRef<Path>) -> Result<(Vec<RankObservation>, ReaderStats), IngestError> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
    let mut stats = ReaderStats::default();
    let mut rows = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
        stats.lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed == "date,rank,domain" {
            stats.comments += 1;
            continue;
        }
        let mut parts = trimmed.split(',');
        let parsed = (|| {
            let date = NaiveDate::parse_from_str(parts.next()?.trim(), "%Y-%m-%d").ok()?;
            let rank: u32 = parts.next()?.trim().parse().ok()?;
            let domain = parts.next()?.trim().to_ascii_lowercase();
            if domain.is_empty() || parts.next().is_some() || rank == 0 {
                return None;
            }
            Some(RankObservation { date, rank, domain })
        })();
        match parsed {
            Some(row) => {
                stats.records += 1;
                rows.push(row);
            }
            None => stats.skipped += 1,
        }
    }
    Ok((rows, stats))
}

/// Mean rank per domain over a rank list.
pub fn mean_ranks(rows: &[RankObservation]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for row in rows {
        let slot = acc.entry(row.domain.clone()).or_insert((0, 0));
        slot.0 += row.rank as u64;
        slot.1 += 1;
    }
    acc.into_iter().map(|(d, (sum, n))| (d, sum as f64 / n as f64)).collect()
}

/// Derives whitelist label events from a daily rank list: a domain ranked at
/// or above `top_n` for at least `window_days` consecutive days earns one
/// event, dated on the day the streak completes.
pub fn rank_whitelist(
    rows: &[RankObservation],
    top_n: u32,
    window_days: u32,
) -> Vec<LabelEvent> {
    assert!(window_days >= 1, "window must cover at least one day");
    let mut days: BTreeMap<&str, BTreeSet<NaiveDate>> = BTreeMap::new();
    for row in rows {
        if row.rank <= top_n {
            days.entry(row.domain.as_str()).or_default().insert(row.date);
        }
    }
    let mut events = Vec::new();
    for (domain, dates) in days {
        let mut run_start: Option<NaiveDate> = None;
        let mut prev: Option<NaiveDate> = None;
        for &d in &dates {
            match prev {
                Some(p) if (d - p).num_days() == 1 => {}
                _ => run_start = Some(d),
            }
            prev = Some(d);
            let start = run_start.expect("set on first iteration");
            if (d - start).num_days() + 1 >= window_days as i64 {
                events.push(LabelEvent {
                    date: d,
                    domain: domain.to_string(),
                    source: LabelSource::Ale,
                    detail: Some(format!("top-{top_n} for {window_days} consecutive days")),
                });
                break;
            }
        }
    }
    events.sort();
    events
}
