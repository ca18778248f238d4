//! Gold standard derived from a reference KB under the local closed-world
//! assumption: a triple present in the KB is true; a missing triple whose
//! data item the KB knows is false; otherwise no label.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::ingest::Corpus;
use crate::model::{data_item, DataItem, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    True,
    False,
    Unknown,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::True => "true",
            Label::False => "false",
            Label::Unknown => "unknown",
        })
    }
}

/// Reference-KB triples and the data items they cover.
#[derive(Debug, Clone, Default)]
pub struct GoldStandard {
    kb_triples: HashSet<Triple>,
    kb_items: HashSet<DataItem>,
}

impl GoldStandard {
    pub fn from_kb(triples: impl IntoIterator<Item = Triple>) -> Self {
        let kb_triples: HashSet<Triple> = triples.into_iter().collect();
        let kb_items = kb_triples.iter().map(data_item).collect();
        GoldStandard {
            kb_triples,
            kb_items,
        }
    }

    /// Local closed-world label for one triple.
    pub fn lcwa_label(&self, t: &Triple) -> Label {
        if self.kb_triples.contains(t) {
            Label::True
        } else if self.kb_items.contains(&data_item(t)) {
            Label::False
        } else {
            Label::Unknown
        }
    }

    pub fn kb_triples(&self) -> &HashSet<Triple> {
        &self.kb_triples
    }

    pub fn kb_items(&self) -> &HashSet<DataItem> {
        &self.kb_items
    }

    pub fn len(&self) -> usize {
        self.kb_triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kb_triples.is_empty()
    }
}

/// Label coverage over a corpus's unique triples.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct LabelSummary {
    pub unique_triples: u64,
    pub labeled: u64,
    pub labeled_true: u64,
    /// labeled / unique_triples.
    pub labeled_fraction: f64,
    /// labeled_true / labeled.
    pub true_fraction: f64,
}

/// Labels every unique triple of the corpus and reports coverage statistics.
pub fn label_corpus(gs: &GoldStandard, c: &Corpus) -> (BTreeMap<Triple, Label>, LabelSummary) {
    let mut labels: BTreeMap<Triple, Label> = BTreeMap::new();
    for r in c.records() {
        labels
            .entry(r.triple.clone())
            .or_insert_with(|| gs.lcwa_label(&r.triple));
    }
    let unique = labels.len() as u64;
    let labeled = labels.values().filter(|l| **l != Label::Unknown).count() as u64;
    let labeled_true = labels.values().filter(|l| **l == Label::True).count() as u64;
    let summary = LabelSummary {
        unique_triples: unique,
        labeled,
        labeled_true,
        labeled_fraction: if unique == 0 {
            0.0
        } else {
            labeled as f64 / unique as f64
        },
        true_fraction: if labeled == 0 {
            0.0
        } else {
            labeled_true as f64 / labeled as f64
        },
    };
    (labels, summary)
}
