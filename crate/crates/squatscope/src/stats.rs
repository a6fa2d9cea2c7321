//! Integer-valued empirical distributions, shared by the lexical and temporal
//! reports. Builders hold exact per-value counts so partial results from
//! concurrent shards can be merged before the CDF is finalized.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

/// One step of an empirical CDF: `fraction` of the population is `<= value`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdfPoint {
    pub value: i64,
    /// Observations equal to `value`.
    pub count: u64,
    /// Observations `<= value`.
    pub cumulative: u64,
    pub fraction: f64,
}

/// Empirical cumulative distribution over integer observations.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Cdf {
    pub points: Vec<CdfPoint>,
    pub total: u64,
}

impl Cdf {
    /// Fraction of observations `<= value`, 0.0 for an empty distribution.
    pub fn fraction_at(&self, value: i64) -> f64 {
        match self.points.iter().rev().find(|p| p.value <= value) {
            Some(p) => p.fraction,
            None => 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Writes `value,count,cumulative,fraction` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "value,count,cumulative,fraction")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", p.value, p.count, p.cumulative, p.fraction)?;
        }
        Ok(())
    }
}

/// Accumulates per-value counts; mergeable across shards.
#[derive(Clone, Debug, Default)]
pub struct CdfBuilder {
    counts: BTreeMap<i64, u64>,
}

impl CdfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: i64) {
        *self.counts.entry(value).or_insert(0) += 1;
    }

    pub fn add_count(&mut self, value: i64, count: u64) {
        *self.counts.entry(value).or_insert(0) += count;
    }

    pub fn merge(&mut self, other: &CdfBuilder) {
        for (&v, &c) in &other.counts {
            self.add_count(v, c);
        }
    }

    pub fn build(&self) -> Cdf {
        let total: u64 = self.counts.values().sum();
        let mut cumulative = 0;
        let points = self
            .counts
            .iter()
            .map(|(&value, &count)| {
                cumulative += count;
                CdfPoint { value, count, cumulative, fraction: cumulative as f64 / total as f64 }
            })
            .collect();
        Cdf { points, total }
    }
}

impl FromIterator<i64> for CdfBuilder {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut b = CdfBuilder::new();
        for v in iter {
            b.add(v);
        }
        b
    }
}

/// Builds a CDF directly from observations.
pub fn cdf_of(values: impl IntoIterator<Item = i64>) -> Cdf {
    values.into_iter().collect::<CdfBuilder>().build()
}
