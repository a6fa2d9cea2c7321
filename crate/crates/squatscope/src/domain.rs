//! Query-name normalization against a public-suffix snapshot.
//!
//! Every downstream consumer reasons about the *effective second-level domain*
//! (e2LD): the label immediately left of the public suffix. Suffix rules follow
//! the usual list semantics — exact rules, wildcard rules (`*.zone`) and
//! exception rules (`!host.zone`), longest match winning and exceptions
//! trumping wildcards. Names under a TLD the snapshot does not know fall back
//! to treating the rightmost label as the suffix.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

/// Longest name accepted, in octets of the dotted form.
const MAX_NAME_LEN: usize = 253;
/// Longest single label accepted.
const MAX_LABEL_LEN: usize = 63;

#[derive(Debug, Error)]
pub enum SuffixListError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("suffix rule on line {line} is malformed: {text:?}")]
    MalformedRule { line: usize, text: String },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("empty domain name")]
    EmptyInput,
    #[error("invalid label in {name:?}: {detail}")]
    InvalidLabel { name: String, detail: String },
    #[error("{0:?} is itself a public suffix; no registrable domain")]
    NoRegistrableDomain(String),
}

/// Parsed public-suffix snapshot.
///
/// Rules are stored as joined lowercase label strings; wildcard rules keep the
/// portion after `*.` and exception rules drop the leading `!`.
#[derive(Clone, Debug)]
pub struct SuffixList {
    version: String,
    exact: HashSet<String>,
    wildcard: HashSet<String>,
    exception: HashSet<String>,
    max_rule_labels: usize,
}

impl SuffixList {
    /// Parses snapshot text. Lines starting with `#` or `//` are comments; a
    /// `# version:` comment names the snapshot, defaulting to `"unknown"`.
    pub fn parse(text: &str) -> Result<Self, SuffixListError> {
        let mut list = SuffixList {
            version: String::from("unknown"),
            exact: HashSet::new(),
            wildcard: HashSet::new(),
            exception: HashSet::new(),
            max_rule_labels: 0,
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#').or_else(|| trimmed.strip_prefix("//")) {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    list.version = v.trim().to_string();
                }
                continue;
            }
            let rule = trimmed.to_ascii_lowercase();
            let malformed = || SuffixListError::MalformedRule { line, text: raw.to_string() };
            if let Some(rest) = rule.strip_prefix("!") {
                // The implied public suffix is the exception minus its leftmost
                // label, so a one-label exception would leave nothing.
                let labels: Vec<&str> = rest.split('.').collect();
                if labels.len() < 2 || !labels.iter().all(|l| is_valid_rule_label(l)) {
                    return Err(malformed());
                }
                list.note_rule_len(labels.len());
                list.exception.insert(rest.to_string());
            } else if let Some(rest) = rule.strip_prefix("*.") {
                let labels: Vec<&str> = rest.split('.').collect();
                if labels.is_empty() || !labels.iter().all(|l| is_valid_rule_label(l)) {
                    return Err(malformed());
                }
                list.note_rule_len(labels.len() + 1);
                list.wildcard.insert(rest.to_string());
            } else {
                let labels: Vec<&str> = rule.split('.').collect();
                if labels.is_empty() || !labels.iter().all(|l| is_valid_rule_label(l)) {
                    return Err(malformed());
                }
                list.note_rule_len(labels.len());
                list.exact.insert(rule);
            }
        }
        Ok(list)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SuffixListError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| SuffixListError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    fn note_rule_len(&mut self, labels: usize) {
        self.max_rule_labels = self.max_rule_labels.max(labels);
    }

    /// Snapshot tag from the `# version:` comment.
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn rule_count(&self) -> usize {
        self.exact.len() + self.wildcard.len() + self.exception.len()
    }

    /// Number of trailing labels that form the public suffix of `labels`.
    ///
    /// Follows list precedence: a matching exception rule wins outright and
    /// yields the rule minus its leftmost label; otherwise the longest exact or
    /// wildcard match; otherwise the rightmost label alone (default rule).
    /// May consume every label — callers decide whether that is an error.
    pub fn suffix_label_count(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let upper = n.min(self.max_rule_labels);
        for k in (1..=upper).rev() {
            if self.exception.contains(&labels[n - k..].join(".")) {
                return k - 1;
            }
        }
        for k in (1..=upper).rev() {
            if self.exact.contains(&labels[n - k..].join(".")) {
                return k;
            }
            if k >= 2 && self.wildcard.contains(&labels[n - k + 1..].join(".")) {
                return k;
            }
        }
        1
    }
}

fn is_valid_rule_label(label: &str) -> bool {
    !label.is_empty()
        && label.len() <= MAX_LABEL_LEN
        && label.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

/// A normalized, suffix-split domain name.
///
/// `labels` holds everything left of the public suffix, so
/// `labels.join(".") + "." + public_suffix` reconstructs `fqdn` exactly and
/// `e2ld` is always the last element of `labels`.
#[derive(Clone, Debug, Serialize)]
pub struct DomainName {
    /// Input as given, before normalization.
    pub raw: String,
    /// Lowercased dotted name without the trailing dot.
    pub fqdn: String,
    /// Labels left of the public suffix, leftmost first.
    pub labels: Vec<String>,
    /// Effective second-level domain: the label just left of the suffix.
    pub e2ld: String,
    pub public_suffix: String,
}

impl DomainName {
    /// Registrable domain: `e2ld` joined with the public suffix.
    pub fn registrable(&self) -> String {
        format!("{}.{}", self.e2ld, self.public_suffix)
    }
}

// `raw` records presentation only; identity is the normalized split. This is
// what makes parsing idempotent: `parse_domain(&d.fqdn, list)? == d`.
impl PartialEq for DomainName {
    fn eq(&self, other: &Self) -> bool {
        self.fqdn == other.fqdn && self.public_suffix == other.public_suffix
    }
}

impl Eq for DomainName {}

impl Hash for DomainName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fqdn.hash(state);
        self.public_suffix.hash(state);
    }
}

impl fmt::Display for DomainName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fqdn)
    }
}

/// Normalizes `input` (trim, drop one trailing dot, ASCII-lowercase) and
/// splits it against the suffix list.
///
/// Punycode labels (`xn--…`) pass through in their ASCII form. Underscores are
/// accepted because passive DNS corpora contain service names (`_dmarc.…`).
pub fn parse_domain(input: &str, suffixes: &SuffixList) -> Result<DomainName, DomainError> {
    let trimmed = input.trim();
    let trimmed = trimmed.strip_suffix('.').unwrap_or(trimmed);
    if trimmed.is_empty() {
        return Err(DomainError::EmptyInput);
    }
    let fqdn = trimmed.to_ascii_lowercase();
    let invalid = |detail: String| DomainError::InvalidLabel { name: fqdn.clone(), detail };
    if fqdn.len() > MAX_NAME_LEN {
        return Err(invalid(format!("name is {} octets, limit {MAX_NAME_LEN}", fqdn.len())));
    }
    let labels: Vec<&str> = fqdn.split('.').collect();
    for label in &labels {
        if label.is_empty() {
            return Err(invalid(String::from("empty label")));
        }
        if label.len() > MAX_LABEL_LEN {
            return Err(invalid(format!("label {label:?} is {} octets, limit {MAX_LABEL_LEN}", label.len())));
        }
        if let Some(bad) = label.bytes().find(|b| !(b.is_ascii_lowercase() || b.is_ascii_digit() || *b == b'-' || *b == b'_')) {
            return Err(invalid(format!("label {label:?} contains byte {:?}", bad as char)));
        }
    }
    let suffix_len = suffixes.suffix_label_count(&labels);
    if suffix_len >= labels.len() {
        return Err(DomainError::NoRegistrableDomain(fqdn));
    }
    let split = labels.len() - suffix_len;
    let public_suffix = labels[split..].join(".");
    let prefix: Vec<String> = labels[..split].iter().map(|l| l.to_string()).collect();
    let e2ld = prefix.last().expect("at least one non-suffix label").clone();
    Ok(DomainName { raw: input.to_string(), fqdn, labels: prefix, e2ld, public_suffix })
}

/// Public suffix of an already well-formed name, using the same rule
/// precedence as [`parse_domain`]. The whole name may be the suffix.
pub fn suffix_lookup(fqdn: &str, suffixes: &SuffixList) -> Result<String, DomainError> {
    let trimmed = fqdn.trim();
    let trimmed = trimmed.strip_suffix('.').unwrap_or(trimmed);
    if trimmed.is_empty() {
        return Err(DomainError::EmptyInput);
    }
    let lower = trimmed.to_ascii_lowercase();
    let labels: Vec<&str> = lower.split('.').collect();
    if labels.iter().any(|l| l.is_empty()) {
        return Err(DomainError::InvalidLabel { name: lower.clone(), detail: String::from("empty label") });
    }
    let k = suffixes.suffix_label_count(&labels);
    Ok(labels[labels.len() - k..].join("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list() -> SuffixList {
        SuffixList::parse(
            "# version: test-1\ncom\nnet\norg\nco\nuk\nco.uk\ncom.br\n*.ck\n!www.ck\n*.bd\n",
        )
        .unwrap()
    }

    #[test]
    fn splits_ordinary_com_name() {
        let d = parse_domain("www.Google.COM.", &list()).unwrap();
        assert_eq!(d.fqdn, "www.google.com");
        assert_eq!(d.e2ld, "google");
        assert_eq!(d.public_suffix, "com");
        assert_eq!(d.labels, vec!["www", "google"]);
        assert_eq!(d.registrable(), "google.com");
    }

    #[test]
    fn longest_suffix_rule_wins() {
        let d = parse_domain("shop.example.co.uk", &list()).unwrap();
        assert_eq!(d.public_suffix, "co.uk");
        assert_eq!(d.e2ld, "example");
        // "co" alone is also a TLD rule; a plain .co name still splits.
        let d = parse_domain("drive-google.co", &list()).unwrap();
        assert_eq!(d.public_suffix, "co");
        assert_eq!(d.e2ld, "drive-google");
    }

    #[test]
    fn wildcard_and_exception_rules() {
        let d = parse_domain("b.foo.ck", &list()).unwrap();
        assert_eq!(d.public_suffix, "foo.ck");
        assert_eq!(d.e2ld, "b");
        // The exception host is registrable directly under ck.
        let d = parse_domain("www.ck", &list()).unwrap();
        assert_eq!(d.public_suffix, "ck");
        assert_eq!(d.e2ld, "www");
        let d = parse_domain("mail.www.ck", &list()).unwrap();
        assert_eq!(d.e2ld, "www");
        assert_eq!(d.labels, vec!["mail", "www"]);
        assert!(matches!(
            parse_domain("foo.ck", &list()),
            Err(DomainError::NoRegistrableDomain(_))
        ));
        assert!(matches!(
            parse_domain("x.bd", &list()),
            Err(DomainError::NoRegistrableDomain(_))
        ));
        let d = parse_domain("a.x.bd", &list()).unwrap();
        assert_eq!(d.public_suffix, "x.bd");
    }

    #[test]
    fn unknown_tld_falls_back_to_rightmost_label() {
        let d = parse_domain("foo.bar.zz-unknown", &list()).unwrap();
        assert_eq!(d.public_suffix, "zz-unknown");
        assert_eq!(d.e2ld, "bar");
    }

    #[test]
    fn bare_suffix_has_no_registrable_domain() {
        for name in ["com", "co.uk", "uk"] {
            assert!(matches!(
                parse_domain(name, &list()),
                Err(DomainError::NoRegistrableDomain(_))
            ));
        }
    }

    #[test]
    fn rejects_malformed_names() {
        assert_eq!(parse_domain("", &list()), Err(DomainError::EmptyInput));
        assert_eq!(parse_domain("  . ", &list()).is_err(), true);
        assert!(matches!(parse_domain("a..com", &list()), Err(DomainError::InvalidLabel { .. })));
        assert!(matches!(parse_domain("exa mple.com", &list()), Err(DomainError::InvalidLabel { .. })));
        let long = "a".repeat(64);
        assert!(matches!(
            parse_domain(&format!("{long}.com"), &list()),
            Err(DomainError::InvalidLabel { .. })
        ));
        let name = format!("{}.com", ["abcdefgh"; 32].join("."));
        assert!(name.len() > 253);
        assert!(matches!(parse_domain(&name, &list()), Err(DomainError::InvalidLabel { .. })));
    }

    #[test]
    fn punycode_and_underscore_labels_pass() {
        let d = parse_domain("xn--facebook-06k.com", &list()).unwrap();
        assert_eq!(d.e2ld, "xn--facebook-06k");
        let d = parse_domain("_dmarc.example.com", &list()).unwrap();
        assert_eq!(d.labels[0], "_dmarc");
    }

    #[test]
    fn parsing_is_idempotent_modulo_raw() {
        let list = list();
        for input in ["WWW.Example.COM.", "b.foo.ck", "x.y.z.co.uk", "deltae.com.br"] {
            let once = parse_domain(input, &list).unwrap();
            let twice = parse_domain(&once.fqdn, &list).unwrap();
            assert_eq!(once, twice);
            assert_eq!(once.labels, twice.labels);
            assert_eq!(once.e2ld, twice.e2ld);
        }
    }

    #[test]
    fn e2ld_is_single_nonempty_label() {
        let list = list();
        for input in ["a.com", "very.deep.chain.of.labels.example.co.uk", "www.ck"] {
            let d = parse_domain(input, &list).unwrap();
            assert!(!d.e2ld.is_empty());
            assert!(!d.e2ld.contains('.'));
            assert_eq!(format!("{}.{}", d.labels.join("."), d.public_suffix), d.fqdn);
        }
    }

    #[test]
    fn suffix_lookup_may_consume_whole_name() {
        let list = list();
        assert_eq!(suffix_lookup("google.com", &list).unwrap(), "com");
        assert_eq!(suffix_lookup("com", &list).unwrap(), "com");
        assert_eq!(suffix_lookup("foo.ck", &list).unwrap(), "foo.ck");
        assert_eq!(suffix_lookup("www.ck", &list).unwrap(), "ck");
    }

    #[test]
    fn version_comment_is_reported() {
        assert_eq!(list().version(), "test-1");
        let unversioned = SuffixList::parse("com\n").unwrap();
        assert_eq!(unversioned.version(), "unknown");
    }

    #[test]
    fn malformed_rules_are_rejected() {
        assert!(matches!(
            SuffixList::parse("com\n!single\n"),
            Err(SuffixListError::MalformedRule { line: 2, .. })
        ));
        assert!(SuffixList::parse("UPPER case rule\n").is_err());
    }
}
