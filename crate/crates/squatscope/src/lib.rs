//! Toolkit for finding and characterizing *combosquatting* domains: names whose
//! effective second-level domain (e2LD) embeds a trademark verbatim together with
//! extra characters — `youtube-login.com`, `securepaypal.net` — as opposed to
//! typosquatting names that a single keyboard slip explains.
//!
//! The pipeline, in dependency order:
//!
//! * [`domain`] — public-suffix aware parsing of raw query names into e2LDs.
//! * [`typo`] — the five single-edit typo generation models and the membership
//!   test used to keep typo domains out of the combosquatting verdicts.
//! * [`classify`] — per-candidate taxonomy (exact / typo / combo / unrelated)
//!   and the multi-trademark streaming scanner.
//! * [`lexical`] — unigram word segmentation of the non-trademark residue and
//!   dictionary-based word/segment accounting.
//! * [`ingest`] — readers for DNS corpora, abuse label feeds, seed trademark
//!   lists and certificate logs, plus the labeled set algebra.
//! * [`analytics`] — per-domain timelines, lifetime and detection-lag CDFs,
//!   rank histograms, longest-prefix-match routing attribution and
//!   infrastructure concentration summaries.
//! * [`formats`] / [`report`] — stable on-disk encodings for match streams and
//!   the CSV/JSON report emitters.

pub mod analytics;
pub mod classify;
pub mod domain;
pub mod formats;
pub mod ingest;
pub mod lexical;
pub mod report;
pub mod stats;
pub mod synth;
pub mod typo;

pub use classify::{classify, classify_multi, scan_stream, Scanner, SquatKind, SquatVerdict, TrademarkAutomaton};
pub use domain::{parse_domain, suffix_lookup, DomainName, SuffixList};
pub use typo::{generate_typos, is_typo, typo_upper_bound, KeyboardLayout, TypoKind, TypoSet};
