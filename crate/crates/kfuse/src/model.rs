//! Domain types shared by every stage: triples, data items, extraction
//! records, provenance identities at configurable granularity, accuracy
//! state and fusion output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A (subject, predicate, object) assertion. Equality is exact byte equality
/// on all three fields; object values are opaque strings, never parsed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn data_item(&self) -> DataItem {
        data_item(self)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

/// The fusion unit: all triples sharing a (subject, predicate) pair compete
/// under the single-truth normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataItem {
    pub subject: String,
    pub predicate: String,
}

/// Projects a triple onto its data item (object dropped).
pub fn data_item(t: &Triple) -> DataItem {
    DataItem {
        subject: t.subject.clone(),
        predicate: t.predicate.clone(),
    }
}

/// One extracted triple with its raw provenance attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionRecord {
    pub triple: Triple,
    pub extractor: String,
    pub url: String,
    /// Extraction pattern identifier; empty when the extractor has none.
    pub pattern: String,
    /// Extraction confidence in [0, 1] when the extractor reports one.
    pub confidence: Option<f64>,
}

/// How records are grouped into data sources for fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Granularity {
    /// (extractor, URL) — the finest source identity.
    ExtractorUrl,
    /// (extractor, site): URL host prefix pools pages of one site.
    ExtractorSite,
    /// (extractor, site, predicate).
    ExtractorSitePredicate,
    /// (extractor, site, predicate, pattern).
    ExtractorSitePredicatePattern,
}

impl Granularity {
    pub const ALL: [Granularity; 4] = [
        Granularity::ExtractorUrl,
        Granularity::ExtractorSite,
        Granularity::ExtractorSitePredicate,
        Granularity::ExtractorSitePredicatePattern,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::ExtractorUrl => "extractor-url",
            Granularity::ExtractorSite => "extractor-site",
            Granularity::ExtractorSitePredicate => "extractor-site-pred",
            Granularity::ExtractorSitePredicatePattern => "extractor-site-pred-pattern",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extractor-url" => Ok(Granularity::ExtractorUrl),
            "extractor-site" => Ok(Granularity::ExtractorSite),
            "extractor-site-pred" => Ok(Granularity::ExtractorSitePredicate),
            "extractor-site-pred-pattern" => Ok(Granularity::ExtractorSitePredicatePattern),
            other => Err(Error::InvalidInput(format!(
                "unknown granularity `{other}` (expected extractor-url, extractor-site, \
                 extractor-site-pred or extractor-site-pred-pattern)"
            ))),
        }
    }
}

/// Host prefix of a URL: strips a leading `http://`/`https://`, truncates at
/// the first `/`, lowercases. A URL without a path is its own site.
pub fn site_of(url: &str) -> String {
    let rest = if url.len() >= 7 && url[..7].eq_ignore_ascii_case("http://") {
        &url[7..]
    } else if url.len() >= 8 && url[..8].eq_ignore_ascii_case("https://") {
        &url[8..]
    } else {
        url
    };
    let host = match rest.find('/') {
        Some(i) => &rest[..i],
        None => rest,
    };
    host.to_lowercase()
}

/// Source identity of one record at the chosen granularity. Two records map
/// to the same key iff all active parts are byte-equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProvenanceKey {
    parts: Vec<String>,
}

impl ProvenanceKey {
    pub fn from_parts(parts: Vec<String>) -> Self {
        ProvenanceKey { parts }
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }
}

impl fmt::Display for ProvenanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.parts.join(" / "))
    }
}

/// Assembles the provenance key of a record at granularity `g`.
pub fn provenance_key(r: &ExtractionRecord, g: Granularity) -> ProvenanceKey {
    let parts = match g {
        Granularity::ExtractorUrl => vec![r.extractor.clone(), r.url.clone()],
        Granularity::ExtractorSite => vec![r.extractor.clone(), site_of(&r.url)],
        Granularity::ExtractorSitePredicate => vec![
            r.extractor.clone(),
            site_of(&r.url),
            r.triple.predicate.clone(),
        ],
        Granularity::ExtractorSitePredicatePattern => vec![
            r.extractor.clone(),
            site_of(&r.url),
            r.triple.predicate.clone(),
            r.pattern.clone(),
        ],
    };
    ProvenanceKey { parts }
}

/// Per-provenance accuracy state iterated by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEntry {
    /// Estimated probability that a value from this provenance is true,
    /// clamped into [epsilon, 1 - epsilon].
    pub accuracy: f64,
    /// Number of distinct triples this provenance extracted.
    pub support: u64,
    /// True until the accuracy is first recomputed from data or gold labels.
    pub is_default: bool,
}

/// Accuracy entries keyed by provenance, deterministic iteration order.
#[derive(Debug, Clone, Default)]
pub struct AccuracyTable {
    entries: BTreeMap<ProvenanceKey, AccuracyEntry>,
}

impl AccuracyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: ProvenanceKey, entry: AccuracyEntry) {
        self.entries.insert(key, entry);
    }

    pub fn get(&self, key: &ProvenanceKey) -> Option<&AccuracyEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProvenanceKey, &AccuracyEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Count of entries never recomputed from data or gold.
    pub fn default_count(&self) -> usize {
        self.entries.values().filter(|e| e.is_default).count()
    }
}

/// Output row for one unique triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleVerdict {
    /// Estimated probability the triple is true; absent when every supporting
    /// provenance was filtered away.
    pub probability: Option<f64>,
    /// Distinct provenances (at the run's granularity) that extracted it.
    pub provenance_count: u32,
    /// Distinct extractors that extracted it.
    pub extractor_count: u32,
    /// Distinct URLs it was extracted from.
    pub source_count: u32,
}

/// Fusion output: one row per unique triple.
#[derive(Debug, Clone, Default)]
pub struct FusionResult {
    pub rows: BTreeMap<Triple, TripleVerdict>,
    /// Fraction of unique triples that received a probability.
    pub coverage: f64,
}

impl FusionResult {
    /// Writes the 4-column probabilities TSV: subject, predicate, object,
    /// probability with 9 decimal digits (empty field when absent).
    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_tsv_to(&mut w).map_err(|e| Error::io(path, e))
    }

    pub fn write_tsv_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (t, v) in &self.rows {
            let prob = match v.probability {
                Some(p) => format!("{p:.9}"),
                None => String::new(),
            };
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                crate::ingest::escape_field(&t.subject),
                crate::ingest::escape_field(&t.predicate),
                crate::ingest::escape_field(&t.object),
                prob
            )?;
        }
        Ok(())
    }
}
