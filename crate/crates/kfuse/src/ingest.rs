//! File ingestion: extraction-record and KB TSV parsing, validation,
//! deduplication and confidence filtering.
//!
//! Both formats are tab-separated, UTF-8, no header, with `\t`, `\n` and `\\`
//! backslash-escaped inside fields. Files may be plain or gzip, detected by
//! magic bytes.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::model::{provenance_key, ExtractionRecord, Granularity, Triple};
use crate::{Error, Result};

/// Escapes tab, newline and backslash inside a TSV field.
pub fn escape_field(s: &str) -> Cow<'_, str> {
    if !s.contains(['\t', '\n', '\\']) {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len() + 4);
    for c in s.chars() {
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    Cow::Owned(out)
}

/// Reverses [`escape_field`]. Unknown escapes are kept literally.
pub fn unescape_field(s: &str) -> Cow<'_, str> {
    if !s.contains('\\') {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    Cow::Owned(out)
}

fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(flate2::read::MultiGzDecoder::new(
            file,
        ))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Counts describing a [`Corpus`], recomputable from its records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub records: u64,
    pub unique_triples: u64,
    pub data_items: u64,
    /// Distinct provenance keys at each granularity, finest to coarsest use.
    pub provenances_extractor_url: u64,
    pub provenances_extractor_site: u64,
    pub provenances_extractor_site_pred: u64,
    pub provenances_extractor_site_pred_pattern: u64,
    /// Lines skipped while parsing: wrong field count or failed validation.
    pub skipped_lines: u64,
    /// Confidences outside [0, 1] clamped at ingest.
    pub clamped_confidences: u64,
    /// Duplicate (triple, extractor, url, pattern) observations collapsed.
    pub duplicates_collapsed: u64,
}

/// A deduplicated set of extraction records plus ingest statistics.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<ExtractionRecord>,
    stats: CorpusStats,
}

#[derive(PartialEq, Eq, Hash)]
struct RecordKey {
    triple: Triple,
    extractor: String,
    url: String,
    pattern: String,
}

fn dedup_records(
    input: impl IntoIterator<Item = ExtractionRecord>,
    stats: &mut CorpusStats,
) -> Vec<ExtractionRecord> {
    let mut seen: HashMap<RecordKey, usize> = HashMap::new();
    let mut records: Vec<ExtractionRecord> = Vec::new();
    for mut r in input {
        if r.triple.subject.is_empty()
            || r.triple.predicate.is_empty()
            || r.extractor.is_empty()
            || r.url.is_empty()
        {
            stats.skipped_lines += 1;
            continue;
        }
        if let Some(c) = r.confidence {
            if !c.is_finite() {
                stats.skipped_lines += 1;
                continue;
            }
            if !(0.0..=1.0).contains(&c) {
                r.confidence = Some(c.clamp(0.0, 1.0));
                stats.clamped_confidences += 1;
            }
        }
        let key = RecordKey {
            triple: r.triple.clone(),
            extractor: r.extractor.clone(),
            url: r.url.clone(),
            pattern: r.pattern.clone(),
        };
        match seen.get(&key) {
            Some(&idx) => {
                stats.duplicates_collapsed += 1;
                let kept = &mut records[idx];
                kept.confidence = match (kept.confidence, r.confidence) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (Some(a), None) => Some(a),
                    (None, Some(b)) => Some(b),
                    (None, None) => None,
                };
            }
            None => {
                seen.insert(key, records.len());
                records.push(r);
            }
        }
    }
    records
}

fn count_stats(records: &[ExtractionRecord], stats: &mut CorpusStats) {
    stats.records = records.len() as u64;
    let mut triples: HashSet<&Triple> = HashSet::new();
    let mut items: HashSet<(&str, &str)> = HashSet::new();
    for r in records {
        triples.insert(&r.triple);
        items.insert((&r.triple.subject, &r.triple.predicate));
    }
    stats.unique_triples = triples.len() as u64;
    stats.data_items = items.len() as u64;
    for g in Granularity::ALL {
        let n = records
            .iter()
            .map(|r| provenance_key(r, g))
            .collect::<HashSet<_>>()
            .len() as u64;
        match g {
            Granularity::ExtractorUrl => stats.provenances_extractor_url = n,
            Granularity::ExtractorSite => stats.provenances_extractor_site = n,
            Granularity::ExtractorSitePredicate => stats.provenances_extractor_site_pred = n,
            Granularity::ExtractorSitePredicatePattern => {
                stats.provenances_extractor_site_pred_pattern = n
            }
        }
    }
}

impl Corpus {
    /// Builds a corpus from in-memory records, applying the same validation
    /// and deduplication as file parsing.
    pub fn from_records(input: impl IntoIterator<Item = ExtractionRecord>) -> Corpus {
        let mut stats = CorpusStats::default();
        let records = dedup_records(input, &mut stats);
        count_stats(&records, &mut stats);
        Corpus { records, stats }
    }

    pub fn records(&self) -> &[ExtractionRecord] {
        &self.records
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Recomputes the count fields from the records (skip/clamp/dup counters
    /// are ingest history and are carried over unchanged).
    pub fn recompute_stats(&self) -> CorpusStats {
        let mut stats = CorpusStats {
            skipped_lines: self.stats.skipped_lines,
            clamped_confidences: self.stats.clamped_confidences,
            duplicates_collapsed: self.stats.duplicates_collapsed,
            ..CorpusStats::default()
        };
        count_stats(&self.records, &mut stats);
        stats
    }

    /// Writes the 7-column records TSV this module parses.
    pub fn write_records(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_records_to(&mut w).map_err(|e| Error::io(path, e))
    }

    pub fn write_records_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        for r in &self.records {
            let conf = match r.confidence {
                Some(c) => format!("{c}"),
                None => String::new(),
            };
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                escape_field(&r.triple.subject),
                escape_field(&r.triple.predicate),
                escape_field(&r.triple.object),
                escape_field(&r.extractor),
                escape_field(&r.url),
                escape_field(&r.pattern),
                conf
            )?;
        }
        Ok(())
    }
}

/// Parses a records file: 7 tab-separated columns — subject, predicate,
/// object, extractor, url, pattern (may be empty), confidence (may be empty).
/// Malformed lines are skipped and counted; duplicates collapse keeping the
/// maximum confidence.
pub fn parse_records(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let reader = open_maybe_gzip(path)?;
    let mut stats = CorpusStats::default();
    let mut raw = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            stats.skipped_lines += 1;
            continue;
        }
        let confidence = if fields[6].is_empty() {
            None
        } else {
            match fields[6].parse::<f64>() {
                Ok(c) => Some(c),
                Err(_) => {
                    stats.skipped_lines += 1;
                    continue;
                }
            }
        };
        raw.push(ExtractionRecord {
            triple: Triple::new(
                unescape_field(fields[0]).into_owned(),
                unescape_field(fields[1]).into_owned(),
                unescape_field(fields[2]).into_owned(),
            ),
            extractor: unescape_field(fields[3]).into_owned(),
            url: unescape_field(fields[4]).into_owned(),
            pattern: unescape_field(fields[5]).into_owned(),
            confidence,
        });
    }
    let records = dedup_records(raw, &mut stats);
    count_stats(&records, &mut stats);
    if stats.skipped_lines > 0 || stats.clamped_confidences > 0 {
        eprintln!(
            "warning: {}: skipped {} malformed line(s), clamped {} confidence value(s)",
            path.display(),
            stats.skipped_lines,
            stats.clamped_confidences
        );
    }
    Ok(Corpus { records, stats })
}

/// Keeps records whose confidence is at least `tau`; records without a
/// confidence always pass. Returns the filtered corpus and the fraction of
/// records retained.
pub fn filter_by_confidence(c: &Corpus, tau: f64) -> (Corpus, f64) {
    let retained: Vec<ExtractionRecord> = c
        .records
        .iter()
        .filter(|r| r.confidence.is_none_or(|conf| conf >= tau))
        .cloned()
        .collect();
    let fraction = if c.records.is_empty() {
        1.0
    } else {
        retained.len() as f64 / c.records.len() as f64
    };
    let mut stats = CorpusStats {
        skipped_lines: c.stats.skipped_lines,
        clamped_confidences: c.stats.clamped_confidences,
        duplicates_collapsed: c.stats.duplicates_collapsed,
        ..CorpusStats::default()
    };
    count_stats(&retained, &mut stats);
    (
        Corpus {
            records: retained,
            stats,
        },
        fraction,
    )
}

/// A parsed reference KB: the set of its triples plus a malformed-line count.
#[derive(Debug, Clone, Default)]
pub struct KbFile {
    pub triples: BTreeSet<Triple>,
    pub skipped_lines: u64,
}

/// Parses a 3-column KB TSV into a set of reference-true triples.
pub fn parse_kb(path: impl AsRef<Path>) -> Result<KbFile> {
    let path = path.as_ref();
    let reader = open_maybe_gzip(path)?;
    let mut kb = KbFile::default();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields[0].is_empty() || fields[1].is_empty() {
            kb.skipped_lines += 1;
            continue;
        }
        kb.triples.insert(Triple::new(
            unescape_field(fields[0]).into_owned(),
            unescape_field(fields[1]).into_owned(),
            unescape_field(fields[2]).into_owned(),
        ));
    }
    Ok(kb)
}

/// Writes a KB TSV (3 columns) for a set of triples.
pub fn write_kb(triples: &BTreeSet<Triple>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for t in triples {
        writeln!(
            w,
            "{}\t{}\t{}",
            escape_field(&t.subject),
            escape_field(&t.predicate),
            escape_field(&t.object)
        )
        .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
