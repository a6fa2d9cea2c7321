//! Independent reference implementations ("oracles") shared by the
//! integration suites. Each one re-derives a result by the most literal
//! method available — exhaustive enumeration or linear scan — deliberately
//! sharing no code with the library.
#![allow(dead_code)] // each integration test binary uses a subset

use std::net::IpAddr;

use squatscope::lexical::UnigramModel;

/// Public-suffix rules held as plain label vectors, parsed independently of
/// the library's reader.
pub struct NaiveRules {
    pub plain: Vec<Vec<String>>,
    pub exceptions: Vec<Vec<String>>,
}

pub fn parse_naive_rules(text: &str) -> NaiveRules {
    let mut rules = NaiveRules { plain: Vec::new(), exceptions: Vec::new() };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("//") {
            continue;
        }
        if let Some(rest) = line.strip_prefix('!') {
            rules.exceptions.push(rest.split('.').map(str::to_string).collect());
        } else {
            rules.plain.push(line.split('.').map(str::to_string).collect());
        }
    }
    rules
}

fn rule_matches(rule: &[String], labels: &[&str]) -> bool {
    if rule.len() > labels.len() {
        return false;
    }
    rule.iter().rev().zip(labels.iter().rev()).all(|(r, l)| r == "*" || r == l)
}

/// Literal suffix-matching semantics: a matching exception rule wins outright
/// and names a suffix one label shorter than itself; otherwise the longest
/// matching rule wins; otherwise the rightmost label is the suffix.
pub fn naive_suffix_len(labels: &[&str], rules: &NaiveRules) -> usize {
    for rule in &rules.exceptions {
        if rule_matches(rule, labels) {
            return rule.len() - 1;
        }
    }
    rules
        .plain
        .iter()
        .filter(|r| rule_matches(r, labels))
        .map(Vec::len)
        .max()
        .unwrap_or(1)
}

fn char_kind(c: char) -> u8 {
    if c.is_ascii_alphabetic() {
        0
    } else if c.is_ascii_digit() {
        1
    } else {
        2
    }
}

fn pure_token(token: &[char]) -> bool {
    token.iter().all(|&c| char_kind(c) == char_kind(token[0]))
}

/// Best achievable segmentation score by trying every one of the 2^(n-1)
/// split masks. Tokens mixing character classes disqualify their split.
pub fn exhaustive_best_score(input: &str, model: &UnigramModel) -> f64 {
    let chars: Vec<char> = input.chars().collect();
    let n = chars.len();
    if n == 0 {
        return 0.0;
    }
    assert!(n <= 20, "exhaustive split enumeration is exponential");
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << (n - 1)) {
        let mut score = 0.0;
        let mut start = 0;
        let mut ok = true;
        for end in 1..=n {
            let boundary = end == n || mask & (1 << (end - 1)) != 0;
            if !boundary {
                continue;
            }
            let token = &chars[start..end];
            if !pure_token(token) {
                ok = false;
                break;
            }
            score += model.logp(&token.iter().collect::<String>());
            start = end;
        }
        if ok && score > best {
            best = score;
        }
    }
    best
}

/// One parsed route for the linear-scan reference.
#[derive(Clone, Debug)]
pub struct LinearRoute {
    pub addr: IpAddr,
    pub len: u8,
    pub asn: u32,
    pub country: String,
}

fn covers(route: &LinearRoute, ip: IpAddr) -> bool {
    match (route.addr, ip) {
        (IpAddr::V4(net), IpAddr::V4(ip)) => {
            let (net, ip): (u32, u32) = (net.into(), ip.into());
            route.len == 0 || (net ^ ip) >> (32 - route.len) == 0
        }
        (IpAddr::V6(net), IpAddr::V6(ip)) => {
            let (net, ip): (u128, u128) = (net.into(), ip.into());
            route.len == 0 || (net ^ ip) >> (128 - route.len) == 0
        }
        _ => false,
    }
}

/// Longest-prefix match by scanning every route. Among equally long covering
/// prefixes the one announced last wins, mirroring replace-on-duplicate.
pub fn linear_lpm(routes: &[LinearRoute], ip: IpAddr) -> Option<(u32, String)> {
    let mut best: Option<&LinearRoute> = None;
    for route in routes {
        if covers(route, ip) && best.is_none_or(|b| route.len >= b.len) {
            best = Some(route);
        }
    }
    best.map(|r| (r.asn, r.country.clone()))
}
