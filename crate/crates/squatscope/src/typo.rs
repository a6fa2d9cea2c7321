//! Single-edit typo models over trademark e2LDs.
//!
//! Combosquatting is defined negatively against typosquatting: a candidate
//! that one keyboard slip away from the trademark explains is *not* a
//! combosquatting name, even when it happens to contain the trademark
//! (`youtubee` contains `youtube` but is a duplication typo). Five generation
//! models cover the classic squatting taxonomy, each exactly one edit:
//!
//! * missing-dot — `www` glued onto the name (`wwwyoutube`);
//! * character omission — one character deleted (`yotube`);
//! * character permutation — two neighboring characters swapped (`yuotube`);
//! * character replacement — one character replaced by a key adjacent to it
//!   (`youtibe`);
//! * character insertion — one character inserted next to the key it is
//!   adjacent to, duplication included (`youtubee`, `youtuvbe`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KeyboardError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("keyboard map line {line} is malformed: {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("keyboard map is asymmetric: {a:?} lists {b:?} but not vice versa")]
    Asymmetric { a: char, b: char },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypoError {
    #[error("trademark {0:?} is too short to mutate (need at least 2 characters)")]
    TrademarkTooShort(String),
}

/// Physical key adjacency. Characters not listed (hyphen, underscore) simply
/// have no neighbors; they still participate in omission and permutation.
#[derive(Clone, Debug, Default)]
pub struct KeyboardLayout {
    adjacent: BTreeMap<char, BTreeSet<char>>,
}

impl KeyboardLayout {
    /// Parses `key: neighbors` lines; `#` starts a comment. The map must be
    /// symmetric — a one-way adjacency is a data error, not a layout.
    pub fn parse(text: &str) -> Result<Self, KeyboardError> {
        let mut adjacent: BTreeMap<char, BTreeSet<char>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let malformed = || KeyboardError::MalformedLine { line, text: raw.to_string() };
            let (key, rest) = trimmed.split_once(':').ok_or_else(malformed)?;
            let key = key.trim();
            if key.chars().count() != 1 {
                return Err(malformed());
            }
            let key = key.chars().next().unwrap().to_ascii_lowercase();
            let neighbors: BTreeSet<char> = rest
                .trim()
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| c.to_ascii_lowercase())
                .collect();
            if neighbors.contains(&key) {
                return Err(malformed());
            }
            adjacent.entry(key).or_default().extend(neighbors);
        }
        for (&a, neighs) in &adjacent {
            for &b in neighs {
                if !adjacent.get(&b).map_or(false, |ns| ns.contains(&a)) {
                    return Err(KeyboardError::Asymmetric { a, b });
                }
            }
        }
        Ok(KeyboardLayout { adjacent })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, KeyboardError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| KeyboardError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// The standard QWERTY map (letters and digit row).
    pub fn qwerty() -> &'static KeyboardLayout {
        static QWERTY: OnceLock<KeyboardLayout> = OnceLock::new();
        QWERTY.get_or_init(|| {
            KeyboardLayout::parse(include_str!("../../../data/qwerty.keys"))
                .expect("bundled QWERTY map is well-formed")
        })
    }

    pub fn neighbors(&self, c: char) -> impl Iterator<Item = char> + '_ {
        self.adjacent.get(&c).into_iter().flatten().copied()
    }

    pub fn are_adjacent(&self, a: char, b: char) -> bool {
        self.adjacent.get(&a).map_or(false, |ns| ns.contains(&b))
    }
}

/// The five single-edit generation models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypoKind {
    MissingDot,
    CharOmission,
    CharPermutation,
    CharReplacement,
    CharInsertion,
}

impl TypoKind {
    pub const ALL: [TypoKind; 5] = [
        TypoKind::MissingDot,
        TypoKind::CharOmission,
        TypoKind::CharPermutation,
        TypoKind::CharReplacement,
        TypoKind::CharInsertion,
    ];
}

impl fmt::Display for TypoKind {
    // Display and the serde rename agree, so report columns round-trip.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TypoKind::MissingDot => "missing-dot",
            TypoKind::CharOmission => "char-omission",
            TypoKind::CharPermutation => "char-permutation",
            TypoKind::CharReplacement => "char-replacement",
            TypoKind::CharInsertion => "char-insertion",
        };
        f.write_str(name)
    }
}

/// All single-edit variants of one trademark.
#[derive(Clone, Debug, Serialize)]
pub struct TypoSet {
    pub trademark: String,
    /// Union across models, trademark itself excluded.
    pub variants: BTreeSet<String>,
    /// Distinct variants per model; models may overlap, so these can sum to
    /// more than `variants.len()`.
    pub per_model: BTreeMap<TypoKind, usize>,
}

fn model_variants(chars: &[char], kind: TypoKind, layout: &KeyboardLayout) -> BTreeSet<String> {
    let n = chars.len();
    let mut out = BTreeSet::new();
    let original: String = chars.iter().collect();
    match kind {
        TypoKind::MissingDot => {
            out.insert(format!("www{original}"));
        }
        TypoKind::CharOmission => {
            for skip in 0..n {
                let v: String = chars
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, c)| *c)
                    .collect();
                out.insert(v);
            }
        }
        TypoKind::CharPermutation => {
            for i in 0..n - 1 {
                if chars[i] == chars[i + 1] {
                    continue;
                }
                let mut v = chars.to_vec();
                v.swap(i, i + 1);
                out.insert(v.into_iter().collect());
            }
        }
        TypoKind::CharReplacement => {
            for i in 0..n {
                for r in layout.neighbors(chars[i]) {
                    let mut v = chars.to_vec();
                    v[i] = r;
                    out.insert(v.into_iter().collect());
                }
            }
        }
        TypoKind::CharInsertion => {
            // A stray press lands beside the key of an adjacent character, so
            // at slot `p` anything equal or keyboard-adjacent to either
            // neighbor character qualifies (duplication included).
            for p in 0..=n {
                let mut insertable = BTreeSet::new();
                if p < n {
                    insertable.insert(chars[p]);
                    insertable.extend(layout.neighbors(chars[p]));
                }
                if p > 0 {
                    insertable.insert(chars[p - 1]);
                    insertable.extend(layout.neighbors(chars[p - 1]));
                }
                for c in insertable {
                    let mut v = Vec::with_capacity(n + 1);
                    v.extend_from_slice(&chars[..p]);
                    v.push(c);
                    v.extend_from_slice(&chars[p..]);
                    out.insert(v.into_iter().collect());
                }
            }
        }
    }
    out.remove(&original);
    out
}

/// Enumerates every variant each model produces for `trademark`.
pub fn generate_typos(trademark: &str, layout: &KeyboardLayout) -> Result<TypoSet, TypoError> {
    let chars: Vec<char> = trademark.chars().collect();
    if chars.len() < 2 {
        return Err(TypoError::TrademarkTooShort(trademark.to_string()));
    }
    let mut variants = BTreeSet::new();
    let mut per_model = BTreeMap::new();
    for kind in TypoKind::ALL {
        let set = model_variants(&chars, kind, layout);
        per_model.insert(kind, set.len());
        variants.extend(set);
    }
    Ok(TypoSet { trademark: trademark.to_string(), variants, per_model })
}

/// Whether `candidate` is a single-edit variant of `trademark`, without
/// materializing the variant set. Agrees exactly with
/// `generate_typos(trademark).variants.contains(candidate)`.
pub fn is_typo(candidate: &str, trademark: &str, layout: &KeyboardLayout) -> bool {
    if candidate == trademark {
        return false;
    }
    let t: Vec<char> = trademark.chars().collect();
    let c: Vec<char> = candidate.chars().collect();
    if t.len() < 2 {
        return false;
    }
    let n = t.len();
    match c.len() as i64 - n as i64 {
        3 => candidate.strip_prefix("www").map_or(false, |rest| rest.chars().eq(t.iter().copied())),
        -1 => (0..n).any(|skip| {
            c.iter()
                .copied()
                .eq(t.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, ch)| *ch))
        }),
        0 => {
            let diffs: Vec<usize> = (0..n).filter(|&i| t[i] != c[i]).collect();
            match diffs.as_slice() {
                [i] => layout.are_adjacent(t[*i], c[*i]),
                [i, j] if *j == i + 1 => c[*i] == t[*j] && c[*j] == t[*i],
                _ => false,
            }
        }
        1 => (0..=n).any(|p| {
            c[..p] == t[..p]
                && c[p + 1..] == t[p..]
                && ((p < n && (c[p] == t[p] || layout.are_adjacent(t[p], c[p])))
                    || (p > 0 && (c[p] == t[p - 1] || layout.are_adjacent(t[p - 1], c[p]))))
        }),
        _ => false,
    }
}

/// Per-trademark variant counts plus the distinct union size across a seed
/// list — the ceiling on how many domains pure typosquatting can ever produce,
/// the baseline combosquatting counts get compared against.
#[derive(Clone, Debug, Serialize)]
pub struct TypoUpperBound {
    pub per_trademark: BTreeMap<String, usize>,
    pub total_distinct: usize,
}

pub fn typo_upper_bound<S: AsRef<str>>(
    trademarks: &[S],
    layout: &KeyboardLayout,
) -> Result<TypoUpperBound, TypoError> {
    let mut per_trademark = BTreeMap::new();
    let mut union = BTreeSet::new();
    for tm in trademarks {
        let set = generate_typos(tm.as_ref(), layout)?;
        per_trademark.insert(set.trademark.clone(), set.variants.len());
        union.extend(set.variants);
    }
    Ok(TypoUpperBound { per_trademark, total_distinct: union.len() })
}
