//! Temporal and infrastructure analytics over match rows: domain lifetimes,
//! detection lag against label feeds, daily activity and lookup volume,
//! popularity-rank histograms, and routing-based hosting concentration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::domain::{parse_domain, SuffixList};
use crate::formats::MatchRecord;
use crate::ingest::{Category, LabelEvent, LabelSource, ReaderStats, SeedCorpus};
use crate::stats::{Cdf, CdfBuilder};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("rank {rank} is outside the tracked range 1..={max}", max = RANK_BIN_WIDTH as u64 * RANK_BIN_COUNT as u64)]
    RankOutOfRange { rank: f64 },
}

/// Activity record of one domain: when it was seen and how much it was
/// looked up, day by day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DomainTimeline {
    pub first_seen: NaiveDate,
    pub last_seen: NaiveDate,
    /// Lookup volume per active day. Active-DNS sightings contribute the day
    /// with zero volume.
    pub daily_lookups: BTreeMap<NaiveDate, u64>,
}

impl DomainTimeline {
    fn new(date: NaiveDate, lookups: u64) -> Self {
        DomainTimeline {
            first_seen: date,
            last_seen: date,
            daily_lookups: BTreeMap::from([(date, lookups)]),
        }
    }

    pub fn observe(&mut self, date: NaiveDate, lookups: u64) {
        self.first_seen = self.first_seen.min(date);
        self.last_seen = self.last_seen.max(date);
        *self.daily_lookups.entry(date).or_insert(0) += lookups;
    }

    /// Combines two timelines built from disjoint observation sets.
    pub fn merge(&mut self, other: &DomainTimeline) {
        self.first_seen = self.first_seen.min(other.first_seen);
        self.last_seen = self.last_seen.max(other.last_seen);
        for (&date, &lookups) in &other.daily_lookups {
            *self.daily_lookups.entry(date).or_insert(0) += lookups;
        }
    }

    /// Days between first and last sighting; a single-day domain lives 0 days.
    pub fn lifetime_days(&self) -> i64 {
        (self.last_seen - self.first_seen).num_days()
    }

    pub fn total_lookups(&self) -> u64 {
        self.daily_lookups.values().sum()
    }
}

/// Daily lookup volume summed over a set of domains, raw and rescaled to the
/// peak day.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VolumeSeries {
    pub raw: BTreeMap<NaiveDate, u64>,
    /// `raw` divided by its maximum, so the peak day is exactly 1.0. Empty
    /// when there is no volume at all.
    pub normalized: BTreeMap<NaiveDate, f64>,
}

/// Timelines for a set of domains, keyed by e2LD.
///
/// Building one deduplicates on the observation key (date, source, qname): a
/// qname matched by several trademarks produced several match rows, but its
/// client volume happened once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimelineSet {
    pub per_domain: BTreeMap<String, DomainTimeline>,
}

impl TimelineSet {
    /// Builds timelines from match rows. Callers filter rows to the verdict
    /// kind they care about first; every row passed in counts as activity.
    pub fn build<'a, I>(records: I) -> TimelineSet
    where
        I: IntoIterator<Item = &'a MatchRecord>,
    {
        let mut observations: BTreeMap<(NaiveDate, crate::ingest::DnsSource, &str), (&str, u64)> =
            BTreeMap::new();
        for r in records {
            observations.insert((r.date, r.source, &r.qname), (&r.e2ld, r.lookups));
        }
        let mut set = TimelineSet::default();
        for ((date, _, _), (e2ld, lookups)) in observations {
            set.per_domain
                .entry(e2ld.to_string())
                .and_modify(|t| t.observe(date, lookups))
                .or_insert_with(|| DomainTimeline::new(date, lookups));
        }
        set
    }

    /// Merges another timeline set built from disjoint observations (shards
    /// of one corpus, or the passive and active vantages).
    pub fn merge(&mut self, other: TimelineSet) {
        for (domain, timeline) in other.per_domain {
            match self.per_domain.get_mut(&domain) {
                Some(t) => t.merge(&timeline),
                None => {
                    self.per_domain.insert(domain, timeline);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.per_domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_domain.is_empty()
    }

    /// Distribution of domain lifetimes in days.
    pub fn lifetime_cdf(&self) -> Cdf {
        self.per_domain.values().map(|t| t.lifetime_days()).collect::<CdfBuilder>().build()
    }

    /// Distinct active domains per day.
    pub fn daily_active(&self) -> BTreeMap<NaiveDate, u64> {
        let mut counts = BTreeMap::new();
        for timeline in self.per_domain.values() {
            for &date in timeline.daily_lookups.keys() {
                *counts.entry(date).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Total lookup volume per day across all domains.
    pub fn volume_series(&self) -> VolumeSeries {
        let mut raw: BTreeMap<NaiveDate, u64> = BTreeMap::new();
        for timeline in self.per_domain.values() {
            for (&date, &lookups) in &timeline.daily_lookups {
                *raw.entry(date).or_insert(0) += lookups;
            }
        }
        let max = raw.values().copied().max().unwrap_or(0);
        let normalized = if max == 0 {
            BTreeMap::new()
        } else {
            raw.iter().map(|(&d, &v)| (d, v as f64 / max as f64)).collect()
        };
        VolumeSeries { raw, normalized }
    }
}

/// Days from a domain's first DNS sighting to its first labeling by each
/// feed, as a distribution per feed. Negative lags are real: a feed can list
/// a domain before our vantage first resolves it.
pub fn detection_lags(
    timelines: &TimelineSet,
    labels: &[LabelEvent],
    suffixes: &SuffixList,
) -> BTreeMap<LabelSource, Cdf> {
    let mut first_label: BTreeMap<(LabelSource, String), NaiveDate> = BTreeMap::new();
    for event in labels {
        let Ok(parsed) = parse_domain(&event.domain, suffixes) else { continue };
        first_label
            .entry((event.source, parsed.e2ld))
            .and_modify(|d| *d = (*d).min(event.date))
            .or_insert(event.date);
    }
    let mut builders: BTreeMap<LabelSource, CdfBuilder> = BTreeMap::new();
    for ((source, e2ld), label_date) in first_label {
        let Some(timeline) = timelines.per_domain.get(&e2ld) else { continue };
        let lag = (label_date - timeline.first_seen).num_days();
        builders.entry(source).or_default().add(lag);
    }
    builders.into_iter().map(|(s, b)| (s, b.build())).collect()
}

pub const RANK_BIN_WIDTH: u32 = 20_000;
pub const RANK_BIN_COUNT: usize = 50;

/// Histogram of mean popularity ranks, split into abusive and
/// other domains. Bin `i` covers ranks `(i*20000, (i+1)*20000]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankHistogram {
    pub abusive: Vec<u64>,
    pub other: Vec<u64>,
}

fn rank_bin(rank: f64) -> Result<usize, AnalyticsError> {
    let max = RANK_BIN_WIDTH as f64 * RANK_BIN_COUNT as f64;
    if !(1.0..=max).contains(&rank) {
        return Err(AnalyticsError::RankOutOfRange { rank });
    }
    Ok((rank.ceil() as u64 - 1) as usize / RANK_BIN_WIDTH as usize)
}

/// Bins `(mean rank, is_abusive)` pairs. Ranks outside `1..=1_000_000` are an
/// error: the caller is expected to feed ranks from the tracked list only.
pub fn rank_histogram<I>(entries: I) -> Result<RankHistogram, AnalyticsError>
where
    I: IntoIterator<Item = (f64, bool)>,
{
    let mut hist = RankHistogram {
        abusive: vec![0; RANK_BIN_COUNT],
        other: vec![0; RANK_BIN_COUNT],
    };
    for (rank, abusive) in entries {
        let bin = rank_bin(rank)?;
        if abusive {
            hist.abusive[bin] += 1;
        } else {
            hist.other[bin] += 1;
        }
    }
    Ok(hist)
}

/// One route: an announced prefix with its origin AS and registration
/// country.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RouteInfo {
    pub prefix: String,
    pub asn: u32,
    pub country: String,
}

/// A longest-prefix-match table over announced routes.
///
/// Routes are bucketed by address family and prefix length; a lookup probes
/// lengths from most to least specific, so the first hit is the longest
/// match. Re-announcing a prefix replaces the earlier route (last wins).
#[derive(Clone, Debug, Default)]
pub struct RoutingSnapshot {
    routes: Vec<RouteInfo>,
    v4: BTreeMap<u8, HashMap<u32, usize>>,
    v6: BTreeMap<u8, HashMap<u128, usize>>,
    pub duplicate_prefixes: u64,
}

fn mask_v4(addr: u32, len: u8) -> u32 {
    if len == 0 {
        0
    } else {
        addr & (u32::MAX << (32 - len))
    }
}

fn mask_v6(addr: u128, len: u8) -> u128 {
    if len == 0 {
        0
    } else {
        addr & (u128::MAX << (128 - len))
    }
}

impl RoutingSnapshot {
    pub fn len(&self) -> usize {
        self.v4.values().map(HashMap::len).sum::<usize>()
            + self.v6.values().map(HashMap::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.v4.is_empty() && self.v6.is_empty()
    }

    /// Adds one route. Returns false if the prefix string is malformed.
    pub fn insert(&mut self, prefix: &str, asn: u32, country: &str) -> bool {
        let Some((addr, len)) = prefix.split_once('/') else { return false };
        let Ok(addr) = addr.trim().parse::<IpAddr>() else { return false };
        let Ok(len) = len.trim().parse::<u8>() else { return false };
        let info = RouteInfo {
            prefix: prefix.trim().to_string(),
            asn,
            country: country.to_string(),
        };
        let idx = self.routes.len();
        let slot = match addr {
            IpAddr::V4(a) => {
                if len > 32 {
                    return false;
                }
                self.v4.entry(len).or_default().insert(mask_v4(a.into(), len), idx)
            }
            IpAddr::V6(a) => {
                if len > 128 {
                    return false;
                }
                self.v6.entry(len).or_default().insert(mask_v6(a.into(), len), idx)
            }
        };
        if slot.is_some() {
            self.duplicate_prefixes += 1;
        }
        self.routes.push(info);
        true
    }

    /// Parses `prefix<TAB>asn<TAB>country` lines; malformed rows are counted
    /// and skipped.
    pub fn parse(text: &str) -> (Self, ReaderStats) {
        let mut snapshot = RoutingSnapshot::default();
        let mut stats = ReaderStats::default();
        for line in text.lines() {
            stats.lines += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                stats.comments += 1;
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let ok = fields.len() == 3
                && fields[1]
                    .trim()
                    .parse::<u32>()
                    .is_ok_and(|asn| snapshot.insert(fields[0], asn, fields[2].trim()));
            if ok {
                stats.records += 1;
            } else {
                stats.skipped += 1;
            }
        }
        (snapshot, stats)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, ReaderStats), AnalyticsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AnalyticsError::Io { path: path.to_path_buf(), source: e })?;
        Ok(Self::parse(&text))
    }

    /// Longest-prefix match; `None` when no announced route covers the
    /// address.
    pub fn lookup(&self, ip: IpAddr) -> Option<&RouteInfo> {
        match ip {
            IpAddr::V4(a) => {
                let addr: u32 = a.into();
                for (&len, table) in self.v4.iter().rev() {
                    if let Some(&idx) = table.get(&mask_v4(addr, len)) {
                        return Some(&self.routes[idx]);
                    }
                }
                None
            }
            IpAddr::V6(a) => {
                let addr: u128 = a.into();
                for (&len, table) in self.v6.iter().rev() {
                    if let Some(&idx) = table.get(&mask_v6(addr, len)) {
                        return Some(&self.routes[idx]);
                    }
                }
                None
            }
        }
    }
}

/// One key's slice of the hosting pie.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyShare {
    pub key: String,
    /// Distinct domains with at least one address routed under this key.
    pub domains: u64,
    /// `domains` over the number of routed domains.
    pub share: f64,
}

/// Where matched domains are hosted, by origin AS and by country.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConcentrationReport {
    /// Domains with at least one routed address.
    pub routed_domains: u64,
    /// Domains with no addresses, or none covered by any route.
    pub unrouted_domains: u64,
    pub by_asn: Vec<KeyShare>,
    pub by_country: Vec<KeyShare>,
    /// Distinct addresses per domain, over all domains.
    pub ips_per_domain_cdf: Cdf,
    /// Distinct origin ASes per domain, over all domains.
    pub asns_per_domain_cdf: Cdf,
    /// Distinct hosting countries per domain, over all domains.
    pub countries_per_domain_cdf: Cdf,
}

fn shares(counts: BTreeMap<String, BTreeSet<&str>>, routed: u64) -> Vec<KeyShare> {
    let mut rows: Vec<KeyShare> = counts
        .into_iter()
        .map(|(key, domains)| KeyShare {
            key,
            domains: domains.len() as u64,
            share: domains.len() as f64 / routed as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.domains.cmp(&a.domains).then_with(|| a.key.cmp(&b.key)));
    rows
}

/// Computes hosting concentration for a map of domain → addresses. A domain
/// counts once toward every AS and country that routes at least one of its
/// addresses; shares are relative to domains with any routed address.
pub fn concentration_report(
    domain_ips: &BTreeMap<String, BTreeSet<IpAddr>>,
    routing: &RoutingSnapshot,
) -> ConcentrationReport {
    let mut report = ConcentrationReport::default();
    let mut asn_domains: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut country_domains: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut ips_cdf = CdfBuilder::new();
    let mut asns_cdf = CdfBuilder::new();
    let mut countries_cdf = CdfBuilder::new();
    for (domain, ips) in domain_ips {
        let mut asns: BTreeSet<u32> = BTreeSet::new();
        let mut countries: BTreeSet<&str> = BTreeSet::new();
        for &ip in ips {
            if let Some(route) = routing.lookup(ip) {
                asns.insert(route.asn);
                countries.insert(&route.country);
            }
        }
        ips_cdf.add(ips.len() as i64);
        asns_cdf.add(asns.len() as i64);
        countries_cdf.add(countries.len() as i64);
        if asns.is_empty() {
            report.unrouted_domains += 1;
            continue;
        }
        report.routed_domains += 1;
        for asn in asns {
            asn_domains.entry(format!("AS{asn}")).or_default().insert(domain);
        }
        for country in countries {
            country_domains.entry(country.to_string()).or_default().insert(domain);
        }
    }
    report.by_asn = shares(asn_domains, report.routed_domains);
    report.by_country = shares(country_domains, report.routed_domains);
    report.ips_per_domain_cdf = ips_cdf.build();
    report.asns_per_domain_cdf = asns_cdf.build();
    report.countries_per_domain_cdf = countries_cdf.build();
    report
}

/// Match volume per trademark category, absolute and per seed trademark.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryCount {
    pub category: Category,
    /// Distinct domains matching at least one trademark in the category.
    pub domains: u64,
    /// Seed trademarks curated under the category.
    pub seeds: u64,
    pub domains_per_seed: f64,
}

/// Tallies matched domains per category. A domain matching trademarks in
/// two categories counts once in each. Rows come back busiest-first.
pub fn category_counts(
    domain_trademarks: &BTreeMap<String, BTreeSet<String>>,
    seeds: &SeedCorpus,
) -> Vec<CategoryCount> {
    let mut per_category: BTreeMap<Category, BTreeSet<&str>> = BTreeMap::new();
    for (domain, trademarks) in domain_trademarks {
        for tm in trademarks {
            if let Some(cat) = seeds.category_of(tm) {
                per_category.entry(cat).or_default().insert(domain);
            }
        }
    }
    let seed_counts = seeds.seeds_per_category();
    let mut rows: Vec<CategoryCount> = per_category
        .into_iter()
        .map(|(category, domains)| {
            let seeds = seed_counts.get(&category).copied().unwrap_or(0);
            CategoryCount {
                category,
                domains: domains.len() as u64,
                seeds,
                domains_per_seed: if seeds == 0 {
                    0.0
                } else {
                    domains.len() as f64 / seeds as f64
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| b.domains.cmp(&a.domains).then_with(|| a.category.cmp(&b.category)));
    rows
}
