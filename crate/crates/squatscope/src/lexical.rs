//! Lexical analysis of matched e2LDs: what words squatters combine with a
//! trademark.
//!
//! The centrepiece is a word segmenter: a dynamic program that splits a run of
//! letters into the most probable word sequence under a unigram language
//! model, the classic approach for unspaced text. Domains mix letters, digits
//! and separators, so segmentation first partitions the name into
//! character-class runs (letters / digits / other) and only the letter runs
//! are segmented; a digit or separator run is always a single token. Tokens
//! never straddle a class boundary.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{Category, SeedCorpus};
use crate::stats::{Cdf, CdfBuilder};

#[derive(Debug, Error)]
pub enum LexicalError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    MalformedRow { path: PathBuf, line: u64, detail: String },
    #[error("unigram model has no mass")]
    EmptyModel,
    #[error("{trademark:?} does not occur in {e2ld:?}")]
    NotContained { e2ld: String, trademark: String },
}

/// A named set of lowercase words.
#[derive(Clone, Debug)]
pub struct WordList {
    pub name: String,
    words: HashSet<String>,
}

impl WordList {
    pub fn from_words<I, S>(name: &str, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        WordList {
            name: name.to_string(),
            words: words.into_iter().map(|w| w.as_ref().trim().to_ascii_lowercase()).collect(),
        }
    }

    /// Loads one word per line; `#` lines are comments.
    pub fn from_file(name: &str, path: impl AsRef<Path>) -> Result<Self, LexicalError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| LexicalError::Io { path: path.to_path_buf(), source: e })?;
        Ok(Self::from_words(
            name,
            text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// The four reference dictionaries token membership is reported against.
#[derive(Clone, Debug)]
pub struct DictionarySet {
    pub english: WordList,
    pub profanity: WordList,
    pub scrabble: WordList,
    pub slang: WordList,
}

/// Which dictionaries contain a token. Memberships overlap freely.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DictionaryHits {
    pub english: bool,
    pub profanity: bool,
    pub scrabble: bool,
    pub slang: bool,
}

impl DictionaryHits {
    pub fn any(&self) -> bool {
        self.english || self.profanity || self.scrabble || self.slang
    }
}

impl DictionarySet {
    /// Loads `english.txt`, `profanity.txt`, `scrabble.txt` and `slang.txt`
    /// from a directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, LexicalError> {
        let dir = dir.as_ref();
        Ok(DictionarySet {
            english: WordList::from_file("english", dir.join("english.txt"))?,
            profanity: WordList::from_file("profanity", dir.join("profanity.txt"))?,
            scrabble: WordList::from_file("scrabble", dir.join("scrabble.txt"))?,
            slang: WordList::from_file("slang", dir.join("slang.txt"))?,
        })
    }

    pub fn hits(&self, token: &str) -> DictionaryHits {
        DictionaryHits {
            english: self.english.contains(token),
            profanity: self.profanity.contains(token),
            scrabble: self.scrabble.contains(token),
            slang: self.slang.contains(token),
        }
    }
}

/// Unigram language model over word frequencies.
///
/// Known tokens score `ln(count / total)`. Unknown tokens are penalised by
/// length: `ln(10 / (total * 10^len))`, so every extra character costs a
/// factor of ten. The penalty keeps the segmenter from shattering unknown
/// material into single letters while still letting genuinely frequent words
/// win.
#[derive(Clone, Debug)]
pub struct UnigramModel {
    counts: HashMap<String, u64>,
    total: u64,
    ln_total: f64,
}

impl UnigramModel {
    pub fn from_counts<I, S>(entries: I) -> Result<Self, LexicalError>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for (word, count) in entries {
            *counts.entry(word.as_ref().to_ascii_lowercase()).or_insert(0) += count;
        }
        counts.retain(|_, c| *c > 0);
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(LexicalError::EmptyModel);
        }
        Ok(UnigramModel { counts, total, ln_total: (total as f64).ln() })
    }

    /// Loads a `token<TAB>count` table; `#` lines are comments.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LexicalError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| LexicalError::Io { path: path.to_path_buf(), source: e })?;
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |detail: String| LexicalError::MalformedRow {
                path: path.to_path_buf(),
                line: idx as u64 + 1,
                detail,
            };
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| malformed(String::from("expected token<TAB>count")))?;
            let count: u64 =
                count.trim().parse().map_err(|e| malformed(format!("count: {e}")))?;
            entries.push((word.trim().to_string(), count));
        }
        Self::from_counts(entries)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    /// Natural log-probability of a token.
    pub fn logp(&self, token: &str) -> f64 {
        match self.counts.get(token) {
            Some(&c) => (c as f64).ln() - self.ln_total,
            None => {
                let len = token.chars().count() as f64;
                (1.0 - len) * std::f64::consts::LN_10 - self.ln_total
            }
        }
    }
}

/// The result of segmenting a string: tokens in order, concatenating back to
/// the input, plus the summed log-probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tokenization {
    pub tokens: Vec<String>,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CharClass {
    Alpha,
    Digit,
    Other,
}

fn char_class(c: char) -> CharClass {
    if c.is_ascii_alphabetic() {
        CharClass::Alpha
    } else if c.is_ascii_digit() {
        CharClass::Digit
    } else {
        CharClass::Other
    }
}

/// True for tokens that count as words in reports (letter or digit runs);
/// separator runs such as `-` are structural, not lexical.
pub fn is_word_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| char_class(c) != CharClass::Other)
}

// Strictly-better-than over (score, token count, tokens): higher score wins,
// then fewer tokens, then lexicographically smaller sequence.
fn better(a: (f64, usize, &[String]), b: (f64, usize, &[String])) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.1 != b.1 {
        return a.1 < b.1;
    }
    a.2 < b.2
}

fn segment_alpha(run: &str, model: &UnigramModel) -> Tokenization {
    let chars: Vec<char> = run.chars().collect();
    let n = chars.len();
    // best[i]: optimal segmentation of the first i characters.
    let mut best: Vec<Option<(f64, Vec<String>)>> = vec![None; n + 1];
    best[0] = Some((0.0, Vec::new()));
    for i in 1..=n {
        for j in 0..i {
            let Some((prefix_score, prefix_tokens)) = &best[j] else { continue };
            let token: String = chars[j..i].iter().collect();
            let score = prefix_score + model.logp(&token);
            let count = prefix_tokens.len() + 1;
            let replace = match &best[i] {
                None => true,
                Some((cur_score, cur_tokens)) => {
                    // Cheap pre-check avoids building the candidate vec on
                    // clear losses.
                    if score < *cur_score {
                        false
                    } else {
                        let mut cand = prefix_tokens.clone();
                        cand.push(token.clone());
                        better((score, count, &cand), (*cur_score, cur_tokens.len(), cur_tokens))
                    }
                }
            };
            if replace {
                let mut tokens = prefix_tokens.clone();
                tokens.push(token);
                best[i] = Some((score, tokens));
            }
        }
    }
    let (score, tokens) = best[n].take().expect("every position is reachable");
    Tokenization { tokens, score }
}

/// Segments a string into tokens. Letter runs are split by the unigram
/// dynamic program; digit and separator runs pass through as single tokens
/// scored like any other token. The concatenation of the tokens is always
/// exactly the input.
pub fn segment(input: &str, model: &UnigramModel) -> Tokenization {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut score = 0.0;
    let mut i = 0;
    while i < chars.len() {
        let class = char_class(chars[i]);
        let mut j = i + 1;
        while j < chars.len() && char_class(chars[j]) == class {
            j += 1;
        }
        let run: String = chars[i..j].iter().collect();
        match class {
            CharClass::Alpha => {
                let t = segment_alpha(&run, model);
                score += t.score;
                tokens.extend(t.tokens);
            }
            CharClass::Digit | CharClass::Other => {
                score += model.logp(&run);
                tokens.push(run);
            }
        }
        i = j;
    }
    Tokenization { tokens, score }
}

/// The residue of an e2LD once the first occurrence of the trademark is cut
/// out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Residual {
    pub prefix: String,
    pub suffix: String,
}

impl Residual {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.suffix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.suffix.is_empty()
    }
}

/// Splits an e2LD around the first occurrence of a trademark.
pub fn residual(e2ld: &str, trademark: &str) -> Result<Residual, LexicalError> {
    match e2ld.find(trademark) {
        Some(idx) => Ok(Residual {
            prefix: e2ld[..idx].to_string(),
            suffix: e2ld[idx + trademark.len()..].to_string(),
        }),
        None => Err(LexicalError::NotContained {
            e2ld: e2ld.to_string(),
            trademark: trademark.to_string(),
        }),
    }
}

/// Where the trademark sits inside the e2LD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Trademark first, added material after it.
    Leading,
    /// Added material only before the trademark.
    Trailing,
    /// Material on both sides.
    Interior,
}

impl Placement {
    fn of(res: &Residual) -> Placement {
        match (res.prefix.is_empty(), res.suffix.is_empty()) {
            (true, _) => Placement::Leading,
            (false, true) => Placement::Trailing,
            (false, false) => Placement::Interior,
        }
    }
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Placement::Leading => "leading",
            Placement::Trailing => "trailing",
            Placement::Interior => "interior",
        })
    }
}

/// Share of residual word tokens found in each dictionary. A token may count
/// toward several dictionaries; `unknown` is the share found in none.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DictionaryShares {
    pub tokens: u64,
    pub english: f64,
    pub profanity: f64,
    pub scrabble: f64,
    pub slang: f64,
    pub unknown: f64,
}

/// Aggregate lexical profile of a set of (e2LD, trademark) matches.
#[derive(Clone, Debug, Serialize)]
pub struct LexicalReport {
    /// Distinct (e2LD, trademark) pairs analysed.
    pub pairs: u64,
    /// Words per matched name: trademark plus residual word tokens
    /// (separator tokens excluded).
    pub token_count_cdf: Cdf,
    /// Residual length in characters (e2LD minus the trademark).
    pub residual_length_cdf: Cdf,
    /// How often the trademark leads, trails, or sits inside the name.
    pub placement_counts: BTreeMap<Placement, u64>,
    pub dictionary_shares: DictionaryShares,
    /// Most frequent residual word tokens overall, count descending.
    pub top_words: Vec<(String, u64)>,
    /// Most frequent residual word tokens per trademark category.
    pub top_words_by_category: BTreeMap<Category, Vec<(String, u64)>>,
}

fn top_k(counts: &BTreeMap<String, u64>, k: usize) -> Vec<(String, u64)> {
    let mut rows: Vec<(String, u64)> = counts.iter().map(|(w, &c)| (w.clone(), c)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}

/// Builds the lexical profile for a stream of (e2LD, trademark) matches.
/// Input pairs are deduplicated; each distinct pair contributes once. Pairs
/// where the trademark does not occur in the e2LD (typo matches, say) are
/// skipped.
pub fn lexical_report<I>(
    matches: I,
    model: &UnigramModel,
    dicts: &DictionarySet,
    seeds: &SeedCorpus,
    k: usize,
) -> LexicalReport
where
    I: IntoIterator<Item = (String, String)>,
{
    let pairs: BTreeSet<(String, String)> = matches.into_iter().collect();
    let mut token_counts = CdfBuilder::new();
    let mut residual_lengths = CdfBuilder::new();
    let mut placement_counts: BTreeMap<Placement, u64> = BTreeMap::new();
    let mut word_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut word_counts_by_cat: BTreeMap<Category, BTreeMap<String, u64>> = BTreeMap::new();
    let mut total_tokens = 0u64;
    let mut hit_tokens = (0u64, 0u64, 0u64, 0u64); // english, profanity, scrabble, slang
    let mut unknown_tokens = 0u64;
    let mut analysed = 0u64;

    for (e2ld, trademark) in &pairs {
        let Ok(res) = residual(e2ld, trademark) else { continue };
        analysed += 1;
        residual_lengths.add(res.len() as i64);
        *placement_counts.entry(Placement::of(&res)).or_insert(0) += 1;
        let mut words: Vec<String> = Vec::new();
        for side in [&res.prefix, &res.suffix] {
            if side.is_empty() {
                continue;
            }
            words.extend(segment(side, model).tokens.into_iter().filter(|t| is_word_token(t)));
        }
        // The trademark itself is one word of the composed name.
        token_counts.add(1 + words.len() as i64);
        let category = seeds.category_of(trademark);
        for word in words {
            total_tokens += 1;
            let hits = dicts.hits(&word);
            hit_tokens.0 += u64::from(hits.english);
            hit_tokens.1 += u64::from(hits.profanity);
            hit_tokens.2 += u64::from(hits.scrabble);
            hit_tokens.3 += u64::from(hits.slang);
            unknown_tokens += u64::from(!hits.any());
            *word_counts.entry(word.clone()).or_insert(0) += 1;
            if let Some(cat) = category {
                *word_counts_by_cat.entry(cat).or_default().entry(word).or_insert(0) += 1;
            }
        }
    }

    let share = |n: u64| if total_tokens == 0 { 0.0 } else { n as f64 / total_tokens as f64 };
    LexicalReport {
        pairs: analysed,
        token_count_cdf: token_counts.build(),
        residual_length_cdf: residual_lengths.build(),
        placement_counts,
        dictionary_shares: DictionaryShares {
            tokens: total_tokens,
            english: share(hit_tokens.0),
            profanity: share(hit_tokens.1),
            scrabble: share(hit_tokens.2),
            slang: share(hit_tokens.3),
            unknown: share(unknown_tokens),
        },
        top_words: top_k(&word_counts, k),
        top_words_by_category: word_counts_by_cat
            .into_iter()
            .map(|(cat, counts)| (cat, top_k(&counts, k)))
            .collect(),
    }
}

/// The bundled unigram table.
pub fn bundled_unigrams() -> UnigramModel {
    UnigramModel::from_file_str(include_str!("../../../data/unigram_counts.tsv"))
        .expect("bundled unigram table is well-formed")
}

/// The bundled dictionaries.
pub fn bundled_dictionaries() -> DictionarySet {
    DictionarySet {
        english: WordList::from_words(
            "english",
            include_str!("../../../data/dict/english.txt")
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ),
        profanity: WordList::from_words(
            "profanity",
            include_str!("../../../data/dict/profanity.txt")
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ),
        scrabble: WordList::from_words(
            "scrabble",
            include_str!("../../../data/dict/scrabble.txt")
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ),
        slang: WordList::from_words(
            "slang",
            include_str!("../../../data/dict/slang.txt")
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ),
    }
}

impl UnigramModel {
    /// Parses a `token<TAB>count` table from a string (used for the bundled
    /// table; file paths go through [`UnigramModel::from_file`]).
    pub fn from_file_str(text: &str) -> Result<Self, LexicalError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or(LexicalError::MalformedRow {
                path: PathBuf::from("<builtin>"),
                line: idx as u64 + 1,
                detail: String::from("expected token<TAB>count"),
            })?;
            let count: u64 = count.trim().parse().map_err(|e| LexicalError::MalformedRow {
                path: PathBuf::from("<builtin>"),
                line: idx as u64 + 1,
                detail: format!("count: {e}"),
            })?;
            entries.push((word.trim().to_string(), count));
        }
        Self::from_counts(entries)
    }
}
