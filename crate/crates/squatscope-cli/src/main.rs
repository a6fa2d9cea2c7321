//! Command-line front end for the squatscope library.
//!
//! Subcommands cover the whole pipeline: seed validation, typo-variant
//! enumeration, one-off domain classification, corpus scanning, labeled-set
//! derivation, report generation, and certificate-log scanning.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when an
//! input corpus exceeds the skip-rate threshold (`--max-skip-rate`). The
//! environment variable `SQUATSCOPE_CONFIG` may name a TOML file whose keys
//! mirror the long flags; explicit flags win over config values.
//!
//! Every output file is sorted before write, so identical inputs produce
//! byte-identical artifacts regardless of `--shards`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use squatscope::analytics::{
    category_counts, concentration_report, detection_lags, rank_histogram, RoutingSnapshot,
    TimelineSet,
};
use squatscope::classify::{
    scan_stream, ScanOutcome, ScanStats, Scanner, SquatKind, TrademarkAutomaton,
};
use squatscope::domain::{parse_domain, SuffixList};
use squatscope::formats::{read_match_records, write_match_records_to, MatchRecord};
use squatscope::ingest::{
    cert_scan, derive_sets, load_seeds, mean_ranks, read_labels, read_ranks, CertReader,
    DerivedSets, DnsObservation, DnsReader, DnsSource, LabelEvent, LabelSource, ReaderStats,
    SeedCorpus,
};
use squatscope::lexical::{
    bundled_dictionaries, bundled_unigrams, lexical_report, DictionarySet, UnigramModel,
};
use squatscope::report as rpt;
use squatscope::typo::{generate_typos, KeyboardLayout};

/// Suffix rules compiled into the binary; `--suffixes` overrides them.
const BUNDLED_SUFFIXES: &str = include_str!("../../../data/public_suffix_snapshot.dat");

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version surface here too; they are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<SkipRateExceeded>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        // A downstream `head` closing stdout is not an error worth reporting.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

/// Raised when a corpus sheds more records than `--max-skip-rate` allows;
/// mapped to exit code 2 so pipelines can tell corrupt data from bad usage.
#[derive(Debug)]
struct SkipRateExceeded {
    bad: u64,
    attempted: u64,
    limit: f64,
}

impl fmt::Display for SkipRateExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} records were malformed or unparseable ({:.4} > limit {})",
            self.bad,
            self.attempted,
            self.bad as f64 / self.attempted.max(1) as f64,
            self.limit
        )
    }
}

impl std::error::Error for SkipRateExceeded {}

#[derive(Parser)]
#[command(
    name = "squatscope",
    version,
    about = "Detects combosquatting domains in DNS corpora and reports on them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a trademark seed list and print rows flagged for human review
    ValidateSeeds(ValidateSeedsArgs),
    /// Enumerate the single-edit typo variants of one trademark
    GenTypos(GenTyposArgs),
    /// Classify one domain name against every seed trademark
    Classify(ClassifyArgs),
    /// Scan DNS corpora for combosquatting matches
    Scan(ScanArgs),
    /// Intersect scan output with blacklist/whitelist feeds
    DeriveSets(DeriveSetsArgs),
    /// Produce plot-ready CSV/JSON artifacts from scan output
    Report(ReportArgs),
    /// Scan a certificate-log JSONL dump for squatting names
    CertScan(CertScanArgs),
}

/// Optional config file named by `SQUATSCOPE_CONFIG`. Keys mirror the long
/// flags; a flag given on the command line always wins.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seeds: Option<PathBuf>,
    suffixes: Option<PathBuf>,
    keyboard: Option<PathBuf>,
    dictionaries: Option<PathBuf>,
    unigrams: Option<PathBuf>,
    pdns: Option<Vec<PathBuf>>,
    adns: Option<Vec<PathBuf>>,
    labels: Option<Vec<String>>,
    routes: Option<PathBuf>,
    ranks: Option<PathBuf>,
    certs: Option<PathBuf>,
    out: Option<PathBuf>,
    subdomains: Option<bool>,
    shards: Option<usize>,
    max_skip_rate: Option<f64>,
}

fn load_file_config() -> Result<FileConfig> {
    let Some(path) = std::env::var_os("SQUATSCOPE_CONFIG") else {
        return Ok(FileConfig::default());
    };
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_file_config()?;
    match cli.command {
        Command::ValidateSeeds(a) => cmd_validate_seeds(a, &cfg),
        Command::GenTypos(a) => cmd_gen_typos(a, &cfg),
        Command::Classify(a) => cmd_classify(a, &cfg),
        Command::Scan(a) => cmd_scan(a, &cfg),
        Command::DeriveSets(a) => cmd_derive_sets(a, &cfg),
        Command::Report(a) => cmd_report(a, &cfg),
        Command::CertScan(a) => cmd_cert_scan(a, &cfg),
    }
}

// ---------------------------------------------------------------------------
// flag/config resolution and shared loaders

fn require(flag: Option<PathBuf>, cfg: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| cfg.clone())
        .ok_or_else(|| anyhow!("--{name} is required (flag or config file)"))
}

fn optional(flag: Option<PathBuf>, cfg: &Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| cfg.clone())
}

fn paths_or(flags: Vec<PathBuf>, cfg: &Option<Vec<PathBuf>>) -> Vec<PathBuf> {
    if flags.is_empty() {
        cfg.clone().unwrap_or_default()
    } else {
        flags
    }
}

fn load_suffixes(path: &Option<PathBuf>) -> Result<SuffixList> {
    match path {
        Some(p) => {
            SuffixList::from_file(p).with_context(|| format!("loading suffixes {}", p.display()))
        }
        None => SuffixList::parse(BUNDLED_SUFFIXES).context("parsing bundled suffix rules"),
    }
}

fn load_keyboard(path: &Option<PathBuf>) -> Result<KeyboardLayout> {
    match path {
        Some(p) => {
            KeyboardLayout::from_file(p).with_context(|| format!("loading keyboard {}", p.display()))
        }
        None => Ok(KeyboardLayout::qwerty().clone()),
    }
}

fn load_unigrams(path: &Option<PathBuf>) -> Result<UnigramModel> {
    match path {
        Some(p) => {
            UnigramModel::from_file(p).with_context(|| format!("loading unigrams {}", p.display()))
        }
        None => Ok(bundled_unigrams()),
    }
}

fn load_dictionaries(dir: &Option<PathBuf>) -> Result<DictionarySet> {
    match dir {
        Some(d) => DictionarySet::load(d)
            .with_context(|| format!("loading dictionaries from {}", d.display())),
        None => Ok(bundled_dictionaries()),
    }
}

fn load_seed_corpus(path: &Path, english: Option<&squatscope::lexical::WordList>) -> Result<SeedCorpus> {
    load_seeds(path, english).with_context(|| format!("loading seeds {}", path.display()))
}

/// Parses repeated `--labels source=path` specs and reads every feed.
fn load_label_feeds(specs: &[String]) -> Result<Vec<LabelEvent>> {
    let mut events = Vec::new();
    for spec in specs {
        let (source, path) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--labels expects source=path, got {spec:?}"))?;
        let source: LabelSource = source
            .parse()
            .map_err(|e| anyhow!("--labels {spec:?}: {e}"))?;
        let (mut batch, _) = read_labels(path, source)
            .with_context(|| format!("reading label feed {path}"))?;
        events.append(&mut batch);
    }
    Ok(events)
}

fn label_specs(flags: Vec<String>, cfg: &Option<Vec<String>>) -> Vec<String> {
    if flags.is_empty() {
        cfg.clone().unwrap_or_default()
    } else {
        flags
    }
}

/// Reads match-record files and keeps rows of one verdict kind.
fn read_matches_of_kind(paths: &[PathBuf], kind: SquatKind) -> Result<Vec<MatchRecord>> {
    let mut rows = Vec::new();
    for path in paths {
        let batch = read_match_records(path)
            .with_context(|| format!("reading matches {}", path.display()))?;
        rows.extend(batch.into_iter().filter(|r| r.kind == kind));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// validate-seeds

#[derive(Args)]
struct ValidateSeedsArgs {
    /// Seed trademark CSV (trademark,domain,category,alexa_rank,origin)
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Directory of dictionary word lists (defaults to the bundled set)
    #[arg(long)]
    dictionaries: Option<PathBuf>,
}

fn cmd_validate_seeds(args: ValidateSeedsArgs, cfg: &FileConfig) -> Result<()> {
    let seeds_path = require(args.seeds, &cfg.seeds, "seeds")?;
    let dicts = load_dictionaries(&optional(args.dictionaries, &cfg.dictionaries))?;
    let corpus = load_seed_corpus(&seeds_path, Some(&dicts.english))?;
    for flag in &corpus.flags {
        println!("{}\tline {}\t{}", flag.trademark, flag.line, flag.reason);
    }
    println!("{} seeds loaded, {} flagged for review", corpus.len(), corpus.flags.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-typos

#[derive(Args)]
struct GenTyposArgs {
    /// Trademark to enumerate variants for
    #[arg(long)]
    trademark: String,
    /// Keyboard adjacency file (defaults to the built-in QWERTY layout)
    #[arg(long)]
    keyboard: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_gen_typos(args: GenTyposArgs, cfg: &FileConfig) -> Result<()> {
    let layout = load_keyboard(&optional(args.keyboard, &cfg.keyboard))?;
    let set = generate_typos(&args.trademark, &layout)?;
    let mut out: Box<dyn Write> = match optional(args.out, &cfg.out) {
        Some(path) => Box::new(std::fs::File::create(&path).with_context(|| {
            format!("creating {}", path.display())
        })?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "# trademark: {}", set.trademark)?;
    for (kind, count) in &set.per_model {
        writeln!(out, "# {kind}: {count}")?;
    }
    writeln!(out, "# total: {}", set.variants.len())?;
    for variant in &set.variants {
        writeln!(out, "{variant}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify

#[derive(Args)]
struct ClassifyArgs {
    /// Domain name to classify
    #[arg(long)]
    domain: String,
    /// Seed trademark CSV
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Public-suffix rules (defaults to the bundled snapshot)
    #[arg(long)]
    suffixes: Option<PathBuf>,
    /// Keyboard adjacency file
    #[arg(long)]
    keyboard: Option<PathBuf>,
    /// Also scan subdomain labels for combosquatting trademarks
    #[arg(long)]
    subdomains: bool,
}

fn cmd_classify(args: ClassifyArgs, cfg: &FileConfig) -> Result<()> {
    let seeds_path = require(args.seeds, &cfg.seeds, "seeds")?;
    let suffixes = load_suffixes(&optional(args.suffixes, &cfg.suffixes))?;
    let layout = load_keyboard(&optional(args.keyboard, &cfg.keyboard))?;
    let seeds = load_seed_corpus(&seeds_path, None)?;
    let automaton = TrademarkAutomaton::build(seeds.trademarks(), &layout)?;
    let scanner = Scanner::new(&suffixes, &automaton)
        .with_subdomains(args.subdomains || cfg.subdomains.unwrap_or(false));
    let obs = DnsObservation {
        date: NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date"),
        qname: args.domain.to_ascii_lowercase(),
        rrtype: "A".to_string(),
        rdata_ips: BTreeSet::new(),
        lookup_count: 0,
        source: DnsSource::Active,
    };
    let Some((e2ld, verdicts)) = scanner.scan_record(&obs) else {
        bail!("{} does not parse to a registrable domain", args.domain);
    };
    for v in verdicts.iter().filter(|v| v.kind != SquatKind::Unrelated) {
        println!("{}\t{}\t{}", v.trademark, v.kind, e2ld);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scan

#[derive(Args)]
struct ScanArgs {
    /// Passive-DNS corpus files (repeatable)
    #[arg(long)]
    pdns: Vec<PathBuf>,
    /// Active-DNS corpus files (repeatable)
    #[arg(long)]
    adns: Vec<PathBuf>,
    /// Seed trademark CSV
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Public-suffix rules (defaults to the bundled snapshot)
    #[arg(long)]
    suffixes: Option<PathBuf>,
    /// Keyboard adjacency file
    #[arg(long)]
    keyboard: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also scan subdomain labels for combosquatting trademarks
    #[arg(long)]
    subdomains: bool,
    /// Worker threads to scan with; output is identical for any value
    #[arg(long)]
    shards: Option<usize>,
    /// Abort (exit 2) when this fraction of records is malformed/unparseable
    #[arg(long)]
    max_skip_rate: Option<f64>,
}

/// Per-vantage slice of the stats file `scan` writes.
#[derive(Serialize)]
struct SourceReport {
    reader: ReaderStats,
    scan: ScanStats,
    exact_records: u64,
    typo_rows: u64,
}

/// Scans every file of one vantage, fanning records out to `shards` worker
/// threads. Order of arrival never shows in the output: matches are sorted
/// before write and all counters merge associatively.
fn scan_source(
    paths: &[PathBuf],
    source: DnsSource,
    scanner: &Scanner<'_>,
    shards: usize,
) -> Result<(ScanOutcome, ReaderStats)> {
    let mut outcome = ScanOutcome::default();
    let mut totals = ReaderStats::default();
    for path in paths {
        let mut reader = DnsReader::open(path, source)
            .with_context(|| format!("opening corpus {}", path.display()))?;
        let part = if shards <= 1 {
            scan_stream(&mut reader, scanner)
        } else {
            std::thread::scope(|scope| {
                let mut senders = Vec::with_capacity(shards);
                let mut workers = Vec::with_capacity(shards);
                for _ in 0..shards {
                    let (tx, rx) = std::sync::mpsc::sync_channel::<DnsObservation>(4096);
                    senders.push(tx);
                    workers.push(scope.spawn(move || scan_stream(rx, scanner)));
                }
                for (i, obs) in reader.by_ref().enumerate() {
                    // A send only fails if a worker panicked; the join below
                    // propagates that panic with its original message.
                    let _ = senders[i % shards].send(obs);
                }
                drop(senders);
                let mut merged = ScanOutcome::default();
                for worker in workers {
                    merged.merge(worker.join().expect("scan worker panicked"));
                }
                merged
            })
        };
        let s = reader.stats();
        totals.lines += s.lines;
        totals.records += s.records;
        totals.skipped += s.skipped;
        totals.comments += s.comments;
        totals.duplicates += s.duplicates;
        outcome.merge(part);
    }
    Ok((outcome, totals))
}

fn check_skip_rate(outcome: &ScanOutcome, reader: &ReaderStats, limit: f64) -> Result<()> {
    let attempted = reader.records + reader.skipped;
    let bad = reader.skipped + outcome.records_skipped;
    if attempted > 0 && bad as f64 / attempted as f64 > limit {
        return Err(SkipRateExceeded { bad, attempted, limit }.into());
    }
    Ok(())
}

fn cmd_scan(args: ScanArgs, cfg: &FileConfig) -> Result<()> {
    let pdns = paths_or(args.pdns, &cfg.pdns);
    let adns = paths_or(args.adns, &cfg.adns);
    if pdns.is_empty() && adns.is_empty() {
        bail!("scan needs at least one --pdns or --adns corpus");
    }
    let seeds_path = require(args.seeds, &cfg.seeds, "seeds")?;
    let out_dir = require(args.out, &cfg.out, "out")?;
    let shards = args.shards.or(cfg.shards).unwrap_or(1);
    if shards == 0 {
        bail!("--shards must be at least 1");
    }
    let max_skip_rate = args.max_skip_rate.or(cfg.max_skip_rate).unwrap_or(0.01);
    if !(0.0..=1.0).contains(&max_skip_rate) {
        bail!("--max-skip-rate must be between 0 and 1");
    }

    let suffixes = load_suffixes(&optional(args.suffixes, &cfg.suffixes))?;
    let layout = load_keyboard(&optional(args.keyboard, &cfg.keyboard))?;
    let seeds = load_seed_corpus(&seeds_path, None)?;
    let automaton = TrademarkAutomaton::build(seeds.trademarks(), &layout)?;
    let scanner = Scanner::new(&suffixes, &automaton)
        .with_subdomains(args.subdomains || cfg.subdomains.unwrap_or(false));

    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut stats_file: BTreeMap<&str, SourceReport> = BTreeMap::new();
    for (paths, source, name) in
        [(&pdns, DnsSource::Passive, "pdns"), (&adns, DnsSource::Active, "adns")]
    {
        if paths.is_empty() {
            continue;
        }
        let (outcome, reader) = scan_source(paths, source, &scanner, shards)?;
        check_skip_rate(&outcome, &reader, max_skip_rate)?;
        let mut combo: Vec<MatchRecord> =
            outcome.matches.iter().map(MatchRecord::from_scan).collect();
        write_match_records_to(out_dir.join(format!("combo_{name}.tsv")), &mut combo)?;
        let mut typo: Vec<MatchRecord> =
            outcome.typo_matches.iter().map(MatchRecord::from_scan).collect();
        write_match_records_to(out_dir.join(format!("typo_{name}.tsv")), &mut typo)?;
        eprintln!(
            "{name}: {} records in, {} combosquatting rows, {} typosquatting rows",
            outcome.records_in,
            outcome.matches.len(),
            outcome.typo_matches.len()
        );
        stats_file.insert(
            name,
            SourceReport {
                reader,
                scan: outcome.stats(),
                exact_records: outcome.exact_records,
                typo_rows: outcome.typo_matches.len() as u64,
            },
        );
    }
    rpt::write_json(out_dir.join("scan_stats.json"), &stats_file)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// derive-sets

#[derive(Args)]
struct DeriveSetsArgs {
    /// Combosquatting match file from a passive-DNS scan
    #[arg(long)]
    combo_pdns: Option<PathBuf>,
    /// Combosquatting match file from an active-DNS scan
    #[arg(long)]
    combo_adns: Option<PathBuf>,
    /// Label feed as source=path, repeatable; sources: pbl mal apt spa ale
    #[arg(long)]
    labels: Vec<String>,
    /// Seed trademark CSV
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Public-suffix rules (defaults to the bundled snapshot)
    #[arg(long)]
    suffixes: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Serializable view of the derived sets (the library type keeps its
/// internals private; reports want plain sorted sets).
#[derive(Serialize)]
struct SetsView {
    pdns: BTreeSet<String>,
    adns: BTreeSet<String>,
    labeled: BTreeMap<String, BTreeSet<String>>,
    abusive: BTreeSet<String>,
    skipped_label_domains: u64,
}

impl SetsView {
    fn of(sets: &DerivedSets) -> SetsView {
        SetsView {
            pdns: sets.pdns.clone(),
            adns: sets.adns.clone(),
            labeled: LabelSource::ALL
                .iter()
                .map(|&s| (s.to_string(), sets.labeled(s).clone()))
                .collect(),
            abusive: sets.abuse.clone(),
            skipped_label_domains: sets.skipped_label_domains,
        }
    }
}

fn combo_pairs(path: &Option<PathBuf>) -> Result<Vec<(String, String)>> {
    let Some(path) = path else { return Ok(Vec::new()) };
    let rows = read_matches_of_kind(std::slice::from_ref(path), SquatKind::Combosquatting)?;
    Ok(rows.into_iter().map(|r| (r.e2ld, r.trademark)).collect())
}

fn cmd_derive_sets(args: DeriveSetsArgs, cfg: &FileConfig) -> Result<()> {
    let seeds_path = require(args.seeds, &cfg.seeds, "seeds")?;
    let out_dir = require(args.out, &cfg.out, "out")?;
    let suffixes = load_suffixes(&optional(args.suffixes, &cfg.suffixes))?;
    let seeds = load_seed_corpus(&seeds_path, None)?;
    let labels = load_label_feeds(&label_specs(args.labels, &cfg.labels))?;
    let pdns = combo_pairs(&args.combo_pdns)?;
    let adns = combo_pairs(&args.combo_adns)?;
    if pdns.is_empty() && adns.is_empty() {
        bail!("derive-sets needs --combo-pdns and/or --combo-adns match files");
    }
    let sets = derive_sets(pdns, adns, &labels, &suffixes);
    rpt::write_set_summary_csv(out_dir.join("set_summary.csv"), &sets.summary(&seeds))?;
    rpt::write_json(out_dir.join("sets.json"), &SetsView::of(&sets))?;
    eprintln!(
        "{} passive + {} active e2LDs, {} abusive",
        sets.pdns.len(),
        sets.adns.len(),
        sets.abuse.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// report

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    /// Token counts, residual words, trademark placement
    Lexical,
    /// Lifetimes, daily activity, lookup volume, detection lag
    Temporal,
    /// Hosting concentration by AS/country plus popularity ranks
    Infra,
    /// Labeled set summary and per-category normalization
    Sets,
    /// Certificate issuer shares
    Certs,
}

#[derive(Args)]
struct ReportArgs {
    /// Which report to produce
    #[arg(value_enum)]
    kind: ReportKind,
    /// Match-record files from `scan` (repeatable)
    #[arg(long)]
    matches: Vec<PathBuf>,
    /// Combosquatting match file from a passive-DNS scan (sets report)
    #[arg(long)]
    combo_pdns: Option<PathBuf>,
    /// Combosquatting match file from an active-DNS scan (sets report)
    #[arg(long)]
    combo_adns: Option<PathBuf>,
    /// Label feed as source=path, repeatable
    #[arg(long)]
    labels: Vec<String>,
    /// Routing table (prefix\tasn\tcountry) for the infra report
    #[arg(long)]
    routes: Option<PathBuf>,
    /// Popularity rank CSV (date,rank,domain) for the infra report
    #[arg(long)]
    ranks: Option<PathBuf>,
    /// Certificate-log JSONL for the certs report
    #[arg(long)]
    certs: Option<PathBuf>,
    /// Seed trademark CSV
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Public-suffix rules (defaults to the bundled snapshot)
    #[arg(long)]
    suffixes: Option<PathBuf>,
    /// Keyboard adjacency file (certs report)
    #[arg(long)]
    keyboard: Option<PathBuf>,
    /// Unigram frequency table (defaults to the bundled model)
    #[arg(long)]
    unigrams: Option<PathBuf>,
    /// Directory of dictionary word lists (defaults to the bundled set)
    #[arg(long)]
    dictionaries: Option<PathBuf>,
    /// How many top residual words to keep
    #[arg(long, default_value_t = 20)]
    top: usize,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_report(mut args: ReportArgs, cfg: &FileConfig) -> Result<()> {
    let out_dir = require(args.out.take(), &cfg.out, "out")?;
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    match args.kind {
        ReportKind::Lexical => report_lexical(args, cfg, &out_dir),
        ReportKind::Temporal => report_temporal(args, cfg, &out_dir),
        ReportKind::Infra => report_infra(args, cfg, &out_dir),
        ReportKind::Sets => report_sets(args, cfg, &out_dir),
        ReportKind::Certs => report_certs(args, cfg, &out_dir),
    }
}

fn matches_required(args_matches: Vec<PathBuf>, kind: &str) -> Result<Vec<PathBuf>> {
    if args_matches.is_empty() {
        bail!("the {kind} report needs at least one --matches file");
    }
    Ok(args_matches)
}

fn report_lexical(args: ReportArgs, cfg: &FileConfig, out: &Path) -> Result<()> {
    let paths = matches_required(args.matches, "lexical")?;
    let seeds_path = require(args.seeds, &cfg.seeds, "seeds")?;
    let seeds = load_seed_corpus(&seeds_path, None)?;
    let model = load_unigrams(&optional(args.unigrams, &cfg.unigrams))?;
    let dicts = load_dictionaries(&optional(args.dictionaries, &cfg.dictionaries))?;
    let rows = read_matches_of_kind(&paths, SquatKind::Combosquatting)?;
    let pairs = rows.into_iter().map(|r| (r.e2ld, r.trademark));
    let report = lexical_report(pairs, &model, &dicts, &seeds, args.top);
    rpt::write_json(out.join("lexical.json"), &report)?;
    rpt::write_word_counts_csv(out.join("top_words.csv"), &report.top_words)?;
    rpt::write_placements_csv(out.join("placements.csv"), &report.placement_counts)?;
    rpt::write_cdf_csv(out.join("token_count_cdf.csv"), &report.token_count_cdf)?;
    rpt::write_cdf_csv(out.join("residual_length_cdf.csv"), &report.residual_length_cdf)?;
    eprintln!("{} matched pairs profiled", report.pairs);
    Ok(())
}

fn report_temporal(args: ReportArgs, cfg: &FileConfig, out: &Path) -> Result<()> {
    let paths = matches_required(args.matches, "temporal")?;
    let suffixes = load_suffixes(&optional(args.suffixes, &cfg.suffixes))?;
    let rows = read_matches_of_kind(&paths, SquatKind::Combosquatting)?;
    let timelines = TimelineSet::build(&rows);
    rpt::write_cdf_csv(out.join("lifetime_cdf.csv"), &timelines.lifetime_cdf())?;
    rpt::write_daily_counts_csv(out.join("daily_active.csv"), &timelines.daily_active())?;
    rpt::write_volume_csv(out.join("volume.csv"), &timelines.volume_series())?;
    let labels = load_label_feeds(&label_specs(args.labels, &cfg.labels))?;
    if !labels.is_empty() {
        for (source, cdf) in detection_lags(&timelines, &labels, &suffixes) {
            rpt::write_cdf_csv(out.join(format!("detection_lag_{source}.csv")), &cdf)?;
        }
    }
    eprintln!("{} domain timelines", timelines.len());
    Ok(())
}

fn report_infra(args: ReportArgs, cfg: &FileConfig, out: &Path) -> Result<()> {
    let paths = matches_required(args.matches, "infra")?;
    let routes_path = require(args.routes, &cfg.routes, "routes")?;
    let suffixes = load_suffixes(&optional(args.suffixes, &cfg.suffixes))?;
    let rows = read_matches_of_kind(&paths, SquatKind::Combosquatting)?;
    let (routing, route_stats) = RoutingSnapshot::load(&routes_path)
        .with_context(|| format!("loading routes {}", routes_path.display()))?;
    if route_stats.skipped > 0 {
        eprintln!("routes: {} malformed rows skipped", route_stats.skipped);
    }
    let mut domain_ips: BTreeMap<String, BTreeSet<IpAddr>> = BTreeMap::new();
    for r in &rows {
        domain_ips.entry(r.e2ld.clone()).or_default().extend(r.ips.iter().copied());
    }
    let report = concentration_report(&domain_ips, &routing);
    rpt::write_json(out.join("concentration.json"), &report)?;
    rpt::write_key_shares_csv(out.join("by_asn.csv"), &report.by_asn)?;
    rpt::write_key_shares_csv(out.join("by_country.csv"), &report.by_country)?;
    rpt::write_cdf_csv(out.join("ips_per_domain_cdf.csv"), &report.ips_per_domain_cdf)?;
    rpt::write_cdf_csv(out.join("asns_per_domain_cdf.csv"), &report.asns_per_domain_cdf)?;
    rpt::write_cdf_csv(
        out.join("countries_per_domain_cdf.csv"),
        &report.countries_per_domain_cdf,
    )?;

    // Optional popularity histogram: mean rank per matched e2LD, split into
    // abusive and other by the label feeds.
    if let Some(ranks_path) = optional(args.ranks, &cfg.ranks) {
        let (observations, _) = read_ranks(&ranks_path)
            .with_context(|| format!("reading ranks {}", ranks_path.display()))?;
        let means = mean_ranks(&observations);
        let labels = load_label_feeds(&label_specs(args.labels, &cfg.labels))?;
        let mut abusive: BTreeSet<String> = BTreeSet::new();
        for event in &labels {
            if !LabelSource::ABUSE.contains(&event.source) {
                continue;
            }
            if let Ok(parsed) = parse_domain(&event.domain, &suffixes) {
                abusive.insert(parsed.e2ld);
            }
        }
        let matched: BTreeSet<&str> = rows.iter().map(|r| r.e2ld.as_str()).collect();
        let mut entries = Vec::new();
        for (domain, &rank) in &means {
            let Ok(parsed) = parse_domain(domain, &suffixes) else { continue };
            if matched.contains(parsed.e2ld.as_str()) {
                entries.push((rank, abusive.contains(&parsed.e2ld)));
            }
        }
        let hist = rank_histogram(entries)?;
        rpt::write_rank_histogram_csv(out.join("rank_histogram.csv"), &hist)?;
    }
    eprintln!(
        "{} routed domains, {} unrouted",
        report.routed_domains, report.unrouted_domains
    );
    Ok(())
}

fn report_sets(args: ReportArgs, cfg: &FileConfig, out: &Path) -> Result<()> {
    let seeds_path = require(args.seeds, &cfg.seeds, "seeds")?;
    let suffixes = load_suffixes(&optional(args.suffixes, &cfg.suffixes))?;
    let seeds = load_seed_corpus(&seeds_path, None)?;
    let labels = load_label_feeds(&label_specs(args.labels, &cfg.labels))?;
    let pdns = combo_pairs(&args.combo_pdns)?;
    let adns = combo_pairs(&args.combo_adns)?;
    if pdns.is_empty() && adns.is_empty() {
        bail!("the sets report needs --combo-pdns and/or --combo-adns match files");
    }
    let mut domain_trademarks: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (e2ld, tm) in pdns.iter().chain(&adns) {
        domain_trademarks.entry(e2ld.clone()).or_default().insert(tm.clone());
    }
    let sets = derive_sets(pdns, adns, &labels, &suffixes);
    rpt::write_set_summary_csv(out.join("set_summary.csv"), &sets.summary(&seeds))?;
    rpt::write_json(out.join("sets.json"), &SetsView::of(&sets))?;
    rpt::write_category_counts_csv(
        out.join("category_counts.csv"),
        &category_counts(&domain_trademarks, &seeds),
    )?;
    Ok(())
}

fn report_certs(args: ReportArgs, cfg: &FileConfig, out: &Path) -> Result<()> {
    let stats = run_cert_scan(
        optional(args.certs, &cfg.certs),
        optional(args.seeds.clone(), &cfg.seeds),
        optional(args.suffixes, &cfg.suffixes),
        optional(args.keyboard, &cfg.keyboard),
    )?;
    rpt::write_json(out.join("cert_stats.json"), &stats)?;
    rpt::write_issuer_shares_csv(out.join("issuer_shares.csv"), &stats)?;
    eprintln!(
        "{} certificates, {} with combosquatting names",
        stats.certs_total, stats.combo_certs
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// cert-scan

#[derive(Args)]
struct CertScanArgs {
    /// Certificate-log JSONL dump (one object per line)
    #[arg(long)]
    certs: Option<PathBuf>,
    /// Seed trademark CSV
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Public-suffix rules (defaults to the bundled snapshot)
    #[arg(long)]
    suffixes: Option<PathBuf>,
    /// Keyboard adjacency file
    #[arg(long)]
    keyboard: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_cert_scan(
    certs: Option<PathBuf>,
    seeds: Option<PathBuf>,
    suffixes: Option<PathBuf>,
    keyboard: Option<PathBuf>,
) -> Result<squatscope::ingest::CertStats> {
    let certs_path = certs.ok_or_else(|| anyhow!("--certs is required (flag or config file)"))?;
    let seeds_path = seeds.ok_or_else(|| anyhow!("--seeds is required (flag or config file)"))?;
    let suffixes = load_suffixes(&suffixes)?;
    let layout = load_keyboard(&keyboard)?;
    let corpus = load_seed_corpus(&seeds_path, None)?;
    let automaton = TrademarkAutomaton::build(corpus.trademarks(), &layout)?;
    let scanner = Scanner::new(&suffixes, &automaton);
    let reader = CertReader::open(&certs_path)
        .with_context(|| format!("opening certs {}", certs_path.display()))?;
    Ok(cert_scan(reader, &scanner))
}

fn cmd_cert_scan(args: CertScanArgs, cfg: &FileConfig) -> Result<()> {
    let out_dir = require(args.out, &cfg.out, "out")?;
    let stats = run_cert_scan(
        optional(args.certs, &cfg.certs),
        optional(args.seeds, &cfg.seeds),
        optional(args.suffixes, &cfg.suffixes),
        optional(args.keyboard, &cfg.keyboard),
    )?;
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    rpt::write_json(out_dir.join("cert_stats.json"), &stats)?;
    rpt::write_issuer_shares_csv(out_dir.join("issuer_shares.csv"), &stats)?;
    let mut names = std::io::BufWriter::new(
        std::fs::File::create(out_dir.join("combo_names.tsv"))
            .with_context(|| format!("writing to {}", out_dir.display()))?,
    );
    for fqdn in &stats.combo_fqdns {
        writeln!(names, "{fqdn}")?;
    }
    names.flush()?;
    eprintln!(
        "{} certificates, {} with combosquatting names covering {} FQDNs",
        stats.certs_total,
        stats.combo_certs,
        stats.combo_fqdns.len()
    );
    Ok(())
}
