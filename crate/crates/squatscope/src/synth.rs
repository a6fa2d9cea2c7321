//! Deterministic synthetic corpus generation.
//!
//! Large-scale tests and benchmarks need DNS corpora with realistic structure
//! — a mix of matching and unrelated names, subdomain shapes, volumes and
//! addresses — at sizes no fixture file should be checked in at. Everything
//! here is driven by a seeded ChaCha stream: the same config produces the
//! same bytes on every platform, so two processes can generate the corpus
//! independently and agree on it.

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ingest::DnsSource;
use crate::typo::{generate_typos, KeyboardLayout};

/// Shape of a generated corpus.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub records: usize,
    /// RNG seed; equal seeds give byte-identical corpora.
    pub seed: u64,
    pub start: NaiveDate,
    /// Dates are drawn uniformly from `start .. start + days`.
    pub days: u32,
    pub source: DnsSource,
    /// Malformed lines injected per 10,000 records, to exercise reader
    /// tolerance.
    pub malformed_per_10k: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            records: 10_000,
            seed: 42,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            days: 300,
            source: DnsSource::Passive,
            malformed_per_10k: 5,
        }
    }
}

const FILLER_WORDS: &[&str] = &[
    "login", "secure", "online", "free", "best", "shop", "mail", "pay", "update", "support",
    "news", "store", "app", "web", "my", "the", "account", "verify", "service", "cheap",
];

const TLDS: &[&str] = &["com", "net", "org", "biz", "info", "ru", "co.uk", "com.br"];

const HOST_PREFIXES: &[&str] = &["", "", "", "www.", "mail.", "ns1.", "cdn."];

fn random_word(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let len = rng.gen_range(min..=max);
    (0..len).map(|_| (b'a' + rng.gen_range(0..26)) as char).collect()
}

/// Generates `count` distinct lowercase trademarks with lengths in
/// `min_len..=max_len`.
pub fn synth_trademarks(count: usize, min_len: usize, max_len: usize, seed: u64) -> Vec<String> {
    assert!(min_len >= 2, "trademarks need at least two characters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let tm = random_word(&mut rng, min_len, max_len);
        if seen.insert(tm.clone()) {
            out.push(tm);
        }
    }
    out
}

fn random_ip(rng: &mut ChaCha8Rng) -> String {
    // Addresses cluster in a handful of /8s so routing tables built over the
    // same blocks get hits.
    let first = *[10u8, 20, 30, 40, 192, 198].choose(rng).expect("non-empty");
    if rng.gen_bool(0.05) {
        format!("2001:db8::{:x}", rng.gen_range(1..=0xffff_u32))
    } else {
        format!("{}.{}.{}.{}", first, rng.gen_range(0..256), rng.gen_range(0..256), rng.gen_range(1..255))
    }
}

/// Generates one corpus as raw TSV lines (comments and malformed lines
/// included), ready to be written to a file or parsed directly.
///
/// Roughly 30% of records involve a trademark with added material, 10% are
/// single-edit variants, 5% hit a trademark exactly, and the rest are
/// unrelated; those are sampling targets, not guarantees — the classifier is
/// the judge of what a line actually is.
pub fn synth_corpus(trademarks: &[String], cfg: &SynthConfig) -> Vec<String> {
    assert!(!trademarks.is_empty(), "need at least one trademark");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layout = KeyboardLayout::qwerty();
    // One variant list per trademark, generated lazily: large trademark sets
    // would otherwise pay full generation for rarely-sampled entries.
    let mut typo_cache: Vec<Option<Vec<String>>> = vec![None; trademarks.len()];
    // Unrelated names come from a bounded pool: real corpora see the same
    // names on many days, and the pool keeps the distinct-name count
    // proportional to, not equal to, the record count.
    let pool_size = (cfg.records / 20).clamp(100, 50_000);
    let unrelated_pool: Vec<String> = (0..pool_size)
        .map(|_| {
            let mut name = random_word(&mut rng, 4, 14);
            if rng.gen_bool(0.2) {
                name.push('-');
                name.push_str(FILLER_WORDS.choose(&mut rng).expect("non-empty"));
            }
            name
        })
        .collect();
    let mut lines = Vec::with_capacity(cfg.records + cfg.records / 128 + 2);
    lines.push(String::from("# synthetic corpus"));
    for i in 0..cfg.records {
        if i % 4096 == 0 && i > 0 {
            lines.push(format!("# checkpoint {i}"));
        }
        if u64::from(cfg.malformed_per_10k) > 0
            && rng.gen_range(0..10_000) < cfg.malformed_per_10k
        {
            lines.push(String::from("this line is not a record"));
        }
        let date = cfg.start
            + chrono::Days::new(u64::from(rng.gen_range(0..cfg.days.max(1))));
        let tm_idx = rng.gen_range(0..trademarks.len());
        let tm = &trademarks[tm_idx];
        let sep = *["", "-", ""].choose(&mut rng).expect("non-empty");
        let word = *FILLER_WORDS.choose(&mut rng).expect("non-empty");
        let e2ld = match rng.gen_range(0..100) {
            // trademark plus added material: before, after, or both sides
            0..=11 => format!("{word}{sep}{tm}"),
            12..=23 => format!("{tm}{sep}{word}"),
            24..=29 => {
                let w2 = *FILLER_WORDS.choose(&mut rng).expect("non-empty");
                format!("{word}{sep}{tm}{sep}{w2}")
            }
            // single-edit variant of the trademark
            30..=39 => {
                let variants = typo_cache[tm_idx].get_or_insert_with(|| {
                    generate_typos(tm, layout)
                        .expect("synth trademarks are long enough")
                        .variants
                        .into_iter()
                        .collect()
                });
                variants.choose(&mut rng).expect("every trademark has variants").clone()
            }
            // the trademark itself
            40..=44 => tm.clone(),
            // unrelated material
            _ => unrelated_pool.choose(&mut rng).expect("non-empty").clone(),
        };
        let tld = *TLDS.choose(&mut rng).expect("non-empty");
        let host = *HOST_PREFIXES.choose(&mut rng).expect("non-empty");
        let qname = format!("{host}{e2ld}.{tld}");
        let rrtype = *["A", "A", "A", "AAAA", "CNAME"].choose(&mut rng).expect("non-empty");
        let rdata = if rrtype == "CNAME" {
            format!("target-{}.example.net", random_word(&mut rng, 3, 6))
        } else {
            let n = rng.gen_range(1..=3);
            (0..n).map(|_| random_ip(&mut rng)).collect::<Vec<_>>().join(",")
        };
        let line = match cfg.source {
            DnsSource::Passive => {
                let lookups = rng.gen_range(1..=500);
                format!("{date}\t{qname}\t{rrtype}\t{rdata}\t{lookups}")
            }
            DnsSource::Active => {
                if rng.gen_bool(0.5) {
                    format!("{date}\t{qname}\t{rrtype}\t{rdata}")
                } else {
                    format!("{date}\t{qname}\t{rrtype}\t{rdata}\t0")
                }
            }
        };
        lines.push(line);
    }
    lines
}
