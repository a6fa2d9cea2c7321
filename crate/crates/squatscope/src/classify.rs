//! The squatting taxonomy and the multi-trademark scanner.
//!
//! Verdict precedence per trademark, applied to a candidate e2LD:
//!
//! 1. equal to the trademark → `Exact`;
//! 2. a single-edit variant ([`crate::typo`]) → `Typosquatting`, even when the
//!    candidate also contains the trademark (`youtubee`);
//! 3. contains the trademark as a substring → `Combosquatting`;
//! 4. otherwise → `Unrelated`.
//!
//! For corpus scans the substring test runs over an Aho–Corasick automaton of
//! all trademarks at once, and the typo test is one hash probe into the
//! materialized variant index, so per-record cost stays flat as the seed list
//! grows.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use serde::Serialize;
use thiserror::Error;

use crate::domain::SuffixList;
use crate::ingest::DnsObservation;
use crate::typo::{generate_typos, is_typo, KeyboardLayout, TypoError};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("no trademarks supplied")]
    NoTrademarks,
    #[error(transparent)]
    Typo(#[from] TypoError),
    #[error("building trademark automaton: {0}")]
    Automaton(String),
}

/// Relationship between one candidate e2LD and one trademark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SquatKind {
    Exact,
    Typosquatting,
    Combosquatting,
    Unrelated,
}

impl fmt::Display for SquatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SquatKind::Exact => "exact",
            SquatKind::Typosquatting => "typosquatting",
            SquatKind::Combosquatting => "combosquatting",
            SquatKind::Unrelated => "unrelated",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for SquatKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SquatKind::Exact),
            "typosquatting" => Ok(SquatKind::Typosquatting),
            "combosquatting" => Ok(SquatKind::Combosquatting),
            "unrelated" => Ok(SquatKind::Unrelated),
            other => Err(format!("unknown squat kind {other:?}")),
        }
    }
}

/// One classification outcome.
///
/// `match_span` is the leftmost occurrence of the trademark in the scanned
/// text as a half-open byte range; present exactly for `Exact` (the whole
/// string) and `Combosquatting` verdicts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SquatVerdict {
    pub trademark: String,
    pub kind: SquatKind,
    pub match_span: Option<(usize, usize)>,
}

/// Classifies one candidate against one trademark.
pub fn classify(candidate: &str, trademark: &str, layout: &KeyboardLayout) -> SquatVerdict {
    let (kind, match_span) = if candidate == trademark {
        (SquatKind::Exact, Some((0, candidate.len())))
    } else if is_typo(candidate, trademark, layout) {
        (SquatKind::Typosquatting, None)
    } else if let Some(start) = candidate.find(trademark) {
        (SquatKind::Combosquatting, Some((start, start + trademark.len())))
    } else {
        (SquatKind::Unrelated, None)
    };
    SquatVerdict { trademark: trademark.to_string(), kind, match_span }
}

/// All trademarks compiled for simultaneous matching: an Aho–Corasick
/// automaton for the substring test plus an exact-match index of every
/// single-edit variant for the typo test (typo variants — omissions in
/// particular — need not be substrings of the candidate, so the automaton
/// alone cannot express them).
pub struct TrademarkAutomaton {
    trademarks: Vec<String>,
    ac: AhoCorasick,
    typo_index: HashMap<String, Vec<u32>>,
}

impl TrademarkAutomaton {
    /// Deduplicates, sorts and compiles `trademarks`. Variant generation
    /// happens once here; lookups afterwards never touch the keyboard layout.
    pub fn build<I, S>(trademarks: I, layout: &KeyboardLayout) -> Result<Self, ClassifyError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> =
            trademarks.into_iter().map(|s| s.as_ref().to_ascii_lowercase()).collect();
        if set.is_empty() {
            return Err(ClassifyError::NoTrademarks);
        }
        let trademarks: Vec<String> = set.into_iter().collect();
        let ac = AhoCorasickBuilder::new()
            .match_kind(MatchKind::Standard)
            .build(&trademarks)
            .map_err(|e| ClassifyError::Automaton(e.to_string()))?;
        let mut typo_index: HashMap<String, Vec<u32>> = HashMap::new();
        for (idx, tm) in trademarks.iter().enumerate() {
            for variant in generate_typos(tm, layout)?.variants {
                typo_index.entry(variant).or_default().push(idx as u32);
            }
        }
        Ok(TrademarkAutomaton { trademarks, ac, typo_index })
    }

    /// Sorted, deduplicated trademark list; indices elsewhere refer to it.
    pub fn trademarks(&self) -> &[String] {
        &self.trademarks
    }

    /// Leftmost occurrence per trademark present in `text` as
    /// `(trademark index, start offset)`.
    pub fn substring_hits(&self, text: &str) -> BTreeMap<u32, usize> {
        let mut leftmost: BTreeMap<u32, usize> = BTreeMap::new();
        for m in self.ac.find_overlapping_iter(text) {
            let id = m.pattern().as_u32();
            let start = m.start();
            leftmost.entry(id).and_modify(|s| *s = (*s).min(start)).or_insert(start);
        }
        leftmost
    }

    /// Trademark indices for which `candidate` is a single-edit variant.
    pub fn typo_hits(&self, candidate: &str) -> &[u32] {
        self.typo_index.get(candidate).map_or(&[], Vec::as_slice)
    }
}

/// Classifies `candidate` against every trademark in the automaton at once,
/// returning only positive verdicts (no `Unrelated` entries), ordered by
/// trademark. Agrees with calling [`classify`] per trademark.
pub fn classify_multi(candidate: &str, automaton: &TrademarkAutomaton) -> Vec<SquatVerdict> {
    let substr = automaton.substring_hits(candidate);
    let typos = automaton.typo_hits(candidate);
    let mut ids: BTreeSet<u32> = substr.keys().copied().collect();
    ids.extend(typos.iter().copied());
    ids.into_iter()
        .map(|id| {
            let trademark = automaton.trademarks[id as usize].clone();
            let (kind, match_span) = if candidate == trademark {
                (SquatKind::Exact, Some((0, candidate.len())))
            } else if typos.contains(&id) {
                (SquatKind::Typosquatting, None)
            } else {
                let start = substr[&id];
                (SquatKind::Combosquatting, Some((start, start + trademark.len())))
            };
            SquatVerdict { trademark, kind, match_span }
        })
        .collect()
}

/// Scan configuration: suffix split, compiled trademarks, and whether labels
/// left of the e2LD are searched too.
pub struct Scanner<'a> {
    pub suffixes: &'a SuffixList,
    pub automaton: &'a TrademarkAutomaton,
    /// When set, the substring test additionally runs over all non-suffix
    /// labels joined with `.` (catching `youtube.evil.com`); spans from that
    /// path index into the joined string. Exact/typo verdicts always judge the
    /// e2LD alone. Off by default: the taxonomy is defined on e2LDs.
    pub subdomain_matching: bool,
}

impl<'a> Scanner<'a> {
    pub fn new(suffixes: &'a SuffixList, automaton: &'a TrademarkAutomaton) -> Self {
        Scanner { suffixes, automaton, subdomain_matching: false }
    }

    pub fn with_subdomains(mut self, on: bool) -> Self {
        self.subdomain_matching = on;
        self
    }

    /// Verdicts for one observation, or `None` when the qname does not parse
    /// to a registrable domain. The e2LD accompanies the verdicts.
    pub fn scan_record(&self, obs: &DnsObservation) -> Option<(String, Vec<SquatVerdict>)> {
        let parsed = crate::domain::parse_domain(&obs.qname, self.suffixes).ok()?;
        let mut verdicts = classify_multi(&parsed.e2ld, self.automaton);
        if self.subdomain_matching && parsed.labels.len() > 1 {
            let joined = parsed.labels.join(".");
            let seen: BTreeSet<&str> = verdicts.iter().map(|v| v.trademark.as_str()).collect();
            let extra: Vec<SquatVerdict> = classify_multi(&joined, self.automaton)
                .into_iter()
                .filter(|v| v.kind == SquatKind::Combosquatting && !seen.contains(v.trademark.as_str()))
                .collect();
            verdicts.extend(extra);
            verdicts.sort();
        }
        Some((parsed.e2ld, verdicts))
    }
}

/// One emitted combosquatting (or, in the side channel, typosquatting) match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanMatch {
    pub observation: DnsObservation,
    pub e2ld: String,
    pub verdict: SquatVerdict,
}

/// Counters for one scan, in the shape reports serialize.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScanStats {
    pub records_in: u64,
    pub records_skipped: u64,
    pub matches: u64,
    pub distinct_e2lds: u64,
    pub per_trademark_counts: BTreeMap<String, u64>,
}

/// Everything a scan produced. Shards can each build one and be merged; the
/// result is invariant under how the record stream was split.
#[derive(Default)]
pub struct ScanOutcome {
    /// Combosquatting matches — the scan's primary output.
    pub matches: Vec<ScanMatch>,
    /// Typosquatting matches, kept separately for baseline comparisons.
    pub typo_matches: Vec<ScanMatch>,
    /// Records whose e2LD equals a trademark outright (counted, not emitted).
    pub exact_records: u64,
    pub records_in: u64,
    pub records_skipped: u64,
    combo_e2lds: BTreeSet<String>,
    per_trademark: BTreeMap<String, u64>,
}

impl ScanOutcome {
    pub fn merge(&mut self, other: ScanOutcome) {
        self.matches.extend(other.matches);
        self.typo_matches.extend(other.typo_matches);
        self.exact_records += other.exact_records;
        self.records_in += other.records_in;
        self.records_skipped += other.records_skipped;
        self.combo_e2lds.extend(other.combo_e2lds);
        for (tm, n) in other.per_trademark {
            *self.per_trademark.entry(tm).or_insert(0) += n;
        }
    }

    pub fn stats(&self) -> ScanStats {
        ScanStats {
            records_in: self.records_in,
            records_skipped: self.records_skipped,
            matches: self.matches.len() as u64,
            distinct_e2lds: self.combo_e2lds.len() as u64,
            per_trademark_counts: self.per_trademark.clone(),
        }
    }

    fn absorb(&mut self, obs: DnsObservation, e2ld: String, verdicts: Vec<SquatVerdict>) {
        for verdict in verdicts {
            match verdict.kind {
                SquatKind::Combosquatting => {
                    self.combo_e2lds.insert(e2ld.clone());
                    *self.per_trademark.entry(verdict.trademark.clone()).or_insert(0) += 1;
                    self.matches.push(ScanMatch {
                        observation: obs.clone(),
                        e2ld: e2ld.clone(),
                        verdict,
                    });
                }
                SquatKind::Typosquatting => {
                    self.typo_matches.push(ScanMatch {
                        observation: obs.clone(),
                        e2ld: e2ld.clone(),
                        verdict,
                    });
                }
                SquatKind::Exact => self.exact_records += 1,
                SquatKind::Unrelated => {}
            }
        }
    }
}

/// Single-pass scan of a record stream. Unparseable qnames are counted in
/// `records_skipped` and dropped; every parseable record is classified against
/// every trademark.
pub fn scan_stream<I>(records: I, scanner: &Scanner<'_>) -> ScanOutcome
where
    I: IntoIterator<Item = DnsObservation>,
{
    let mut out = ScanOutcome::default();
    for obs in records {
        out.records_in += 1;
        match scanner.scan_record(&obs) {
            Some((e2ld, verdicts)) => out.absorb(obs, e2ld, verdicts),
            None => out.records_skipped += 1,
        }
    }
    out
}
