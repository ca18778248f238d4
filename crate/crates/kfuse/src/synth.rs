//! Synthetic extraction corpus with known ground truth: latent true triples,
//! Web pages (grouped into sites) claiming values with sampled accuracies,
//! and extractors that corrupt claims through three error channels —
//! triple identification, entity linkage and predicate linkage.
//!
//! Generation is single-threaded and fully determined by the seed.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::ingest::{escape_field, Corpus};
use crate::model::{ExtractionRecord, Triple};
use crate::{Error, Result};

/// Per-extractor corruption probabilities, one per error channel.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorRates {
    /// Object replaced by an out-of-domain string.
    pub triple_identification: f64,
    /// Subject replaced by another entity.
    pub entity_linkage: f64,
    /// Predicate replaced by a sibling predicate.
    pub predicate_linkage: f64,
}

impl ErrorRates {
    pub fn none() -> Self {
        ErrorRates::default()
    }

    /// Splits a total error budget across the channels in the 44/44/20
    /// proportions observed for real extractor mistakes.
    pub fn split(total: f64) -> Self {
        ErrorRates {
            triple_identification: total * 0.44 / 1.08,
            entity_linkage: total * 0.44 / 1.08,
            predicate_linkage: total * 0.20 / 1.08,
        }
    }

    fn any(&self) -> bool {
        self.triple_identification > 0.0 || self.entity_linkage > 0.0 || self.predicate_linkage > 0.0
    }
}

/// Beta parameters for emitted confidences, chosen by the correctness of the
/// emitted triple.
#[derive(Debug, Clone, Copy)]
pub struct ConfidenceParams {
    pub when_true: (f64, f64),
    pub when_false: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct ExtractorProfile {
    pub error_rates: ErrorRates,
    /// Probability the extractor processes any given source claim.
    pub coverage: f64,
    /// `None` means the extractor never reports a confidence.
    pub confidence: Option<ConfidenceParams>,
    /// Number of extraction patterns; 0 leaves the pattern field empty.
    pub patterns: u32,
}

impl ExtractorProfile {
    /// Sees everything, corrupts nothing, reports no confidence.
    pub fn noiseless() -> Self {
        ExtractorProfile {
            error_rates: ErrorRates::none(),
            coverage: 1.0,
            confidence: None,
            patterns: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_items: usize,
    /// Predicate pool size; items tile entities x predicates.
    pub n_predicates: usize,
    /// Number of Web pages.
    pub n_sources: usize,
    /// Pages per site; page j belongs to site j / pages_per_site.
    pub pages_per_site: usize,
    /// Sample one accuracy per site (pages inherit it) instead of per page.
    pub site_level_accuracy: bool,
    /// Beta(alpha, beta) parameters for source accuracies. A beta of 0 pins
    /// every accuracy at alpha exactly.
    pub source_accuracy: (f64, f64),
    pub extractors: Vec<ExtractorProfile>,
    /// Inclusive range of claims per page, each on a distinct item.
    pub claims_per_source: (u32, u32),
    /// Number of distinct false candidate values per item.
    pub value_domain_size: usize,
    /// Zipf exponent skewing which items pages claim on; 0 is uniform.
    pub item_popularity: f64,
    /// Distribution of the number of true values per item.
    pub truths_per_item: Vec<(u32, f64)>,
    /// Fraction of items whose truths are emitted into the KB file; items
    /// left out produce Unknown labels.
    pub kb_fraction: f64,
    /// Probability that an extractor reuses the claim's shared corruption
    /// outcome, correlating extractor mistakes.
    pub shared_error_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_items: 1000,
            n_predicates: 8,
            n_sources: 500,
            pages_per_site: 10,
            site_level_accuracy: false,
            source_accuracy: (8.0, 2.0),
            extractors: vec![
                ExtractorProfile {
                    error_rates: ErrorRates::split(0.15),
                    coverage: 0.7,
                    confidence: Some(ConfidenceParams {
                        when_true: (5.0, 2.0),
                        when_false: (2.0, 5.0),
                    }),
                    patterns: 4,
                },
                ExtractorProfile {
                    error_rates: ErrorRates::split(0.10),
                    coverage: 0.5,
                    confidence: Some(ConfidenceParams {
                        when_true: (4.0, 2.0),
                        when_false: (2.0, 4.0),
                    }),
                    patterns: 0,
                },
                ExtractorProfile {
                    error_rates: ErrorRates::split(0.25),
                    coverage: 0.3,
                    confidence: None,
                    patterns: 0,
                },
            ],
            claims_per_source: (1, 20),
            value_domain_size: 10,
            item_popularity: 1.0,
            truths_per_item: vec![(1, 0.95), (2, 0.05)],
            kb_fraction: 1.0,
            shared_error_rate: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// A corpus that exactly matches the Bayesian fusion model: one true
    /// value per item, one noiseless extractor, uniform item popularity, and
    /// `value_domain_size` false candidates (use it as the fusion N).
    pub fn model_matched(
        n_items: usize,
        n_sources: usize,
        claims_per_source: u32,
        value_domain_size: usize,
        source_accuracy: (f64, f64),
        seed: u64,
    ) -> Self {
        SynthConfig {
            n_items,
            n_sources,
            pages_per_site: 1,
            site_level_accuracy: false,
            source_accuracy,
            extractors: vec![ExtractorProfile::noiseless()],
            claims_per_source: (claims_per_source, claims_per_source),
            value_domain_size,
            item_popularity: 0.0,
            truths_per_item: vec![(1, 1.0)],
            kb_fraction: 1.0,
            shared_error_rate: 0.0,
            seed,
            ..SynthConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.n_items < 1 || self.n_predicates < 1 || self.n_sources < 1 {
            return bad("n_items, n_predicates and n_sources must be >= 1");
        }
        if self.pages_per_site < 1 {
            return bad("pages_per_site must be >= 1");
        }
        if self.value_domain_size < 1 {
            return bad("value_domain_size must be >= 1");
        }
        if self.extractors.is_empty() {
            return bad("at least one extractor profile is required");
        }
        if self.claims_per_source.0 < 1 || self.claims_per_source.0 > self.claims_per_source.1 {
            return bad("claims_per_source must be a nonempty range starting at >= 1");
        }
        if self.truths_per_item.is_empty()
            || self.truths_per_item.iter().any(|(k, w)| *k < 1 || *w < 0.0)
            || self.truths_per_item.iter().map(|(_, w)| w).sum::<f64>() <= 0.0
        {
            return bad("truths_per_item must be a nonempty distribution over counts >= 1");
        }
        if !(0.0..=1.0).contains(&self.kb_fraction) {
            return bad("kb_fraction must be in [0, 1]");
        }
        for (i, e) in self.extractors.iter().enumerate() {
            let rates = [
                e.error_rates.triple_identification,
                e.error_rates.entity_linkage,
                e.error_rates.predicate_linkage,
                e.coverage,
            ];
            if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return bad(&format!("extractor {i}: rates must be probabilities"));
            }
        }
        if !(0.0..=1.0).contains(&self.shared_error_rate) {
            return bad("shared_error_rate must be in [0, 1]");
        }
        Ok(())
    }
}

/// Generated corpus plus the exact ground truth behind it.
#[derive(Debug)]
pub struct SynthOutput {
    pub corpus: Corpus,
    /// Reference KB: true triples of the items selected by `kb_fraction`.
    pub kb: BTreeSet<Triple>,
    /// Exact truth of every unique emitted triple.
    pub truth_log: BTreeMap<Triple, bool>,
    /// Sampled accuracy per page URL.
    pub source_accuracy: BTreeMap<String, f64>,
}

impl SynthOutput {
    /// Writes records, KB and truth-log TSVs (truth log: s, p, o, {0|1}).
    pub fn write_files(
        &self,
        records_path: impl AsRef<Path>,
        kb_path: impl AsRef<Path>,
        truth_path: impl AsRef<Path>,
    ) -> Result<()> {
        self.corpus.write_records(records_path)?;
        crate::ingest::write_kb(&self.kb, kb_path)?;
        let truth_path = truth_path.as_ref();
        let file = std::fs::File::create(truth_path).map_err(|e| Error::io(truth_path, e))?;
        let mut w = std::io::BufWriter::new(file);
        use std::io::Write;
        for (t, truth) in &self.truth_log {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                escape_field(&t.subject),
                escape_field(&t.predicate),
                escape_field(&t.object),
                u8::from(*truth)
            )
            .map_err(|e| Error::io(truth_path, e))?;
        }
        Ok(())
    }
}

struct Claim {
    item: u32,
    value: u32, // index into the item's value names: < truths is true
    page: u32,
    shared_corruption: Corruption,
}

#[derive(Debug, Clone, Copy, Default)]
struct Corruption {
    garble_object: bool,
    swap_subject: Option<u32>,
    swap_predicate: Option<u32>,
}

impl Corruption {
    fn is_clean(&self) -> bool {
        !self.garble_object && self.swap_subject.is_none() && self.swap_predicate.is_none()
    }
}

fn sample_beta(rng: &mut ChaCha8Rng, (alpha, beta): (f64, f64)) -> f64 {
    if beta <= 0.0 {
        return alpha.clamp(0.0, 1.0);
    }
    Beta::new(alpha, beta)
        .expect("beta parameters must be positive")
        .sample(rng)
}

/// Cumulative Zipf weights over item indices; exponent 0 gives uniform.
fn zipf_cumulative(n: usize, exponent: f64) -> Vec<f64> {
    let mut cum = Vec::with_capacity(n);
    let mut total = 0.0;
    for i in 0..n {
        let w = if exponent <= 0.0 {
            1.0
        } else {
            1.0 / ((i + 1) as f64).powf(exponent)
        };
        total += w;
        cum.push(total);
    }
    cum
}

fn sample_zipf(rng: &mut ChaCha8Rng, cum: &[f64]) -> usize {
    let total = *cum.last().unwrap();
    let x: f64 = rng.random_range(0.0..total);
    cum.partition_point(|&c| c <= x).min(cum.len() - 1)
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_entities = cfg.n_items.div_ceil(cfg.n_predicates);

    let subject_of = |item: u32| format!("e{}", item as usize / cfg.n_predicates);
    let predicate_index = |item: u32| item as usize % cfg.n_predicates;
    let predicate_name = |idx: usize| format!("p{idx}");

    // Latent truths: per item, how many of its values are true.
    let truth_weights: f64 = cfg.truths_per_item.iter().map(|(_, w)| w).sum();
    let mut truths_per_item = Vec::with_capacity(cfg.n_items);
    for _ in 0..cfg.n_items {
        let mut x: f64 = rng.random_range(0.0..truth_weights);
        let mut k = cfg.truths_per_item[0].0;
        for (count, w) in &cfg.truths_per_item {
            if x < *w {
                k = *count;
                break;
            }
            x -= w;
        }
        truths_per_item.push(k);
    }

    let value_name = |item: u32, value: u32| {
        let truths = truths_per_item[item as usize];
        if value < truths {
            format!("v{item}.t{value}")
        } else {
            format!("v{item}.f{}", value - truths)
        }
    };

    let mut truth_set: HashSet<Triple> = HashSet::new();
    for item in 0..cfg.n_items as u32 {
        for t in 0..truths_per_item[item as usize] {
            truth_set.insert(Triple::new(
                subject_of(item),
                predicate_name(predicate_index(item)),
                value_name(item, t),
            ));
        }
    }

    // Source accuracies: per site or per page.
    let n_sites = cfg.n_sources.div_ceil(cfg.pages_per_site);
    let site_acc: Vec<f64> = (0..n_sites)
        .map(|_| sample_beta(&mut rng, cfg.source_accuracy))
        .collect();
    let page_acc: Vec<f64> = (0..cfg.n_sources)
        .map(|j| {
            if cfg.site_level_accuracy {
                site_acc[j / cfg.pages_per_site]
            } else {
                sample_beta(&mut rng, cfg.source_accuracy)
            }
        })
        .collect();
    let page_url =
        |j: usize| format!("site{}.test/page{}", j / cfg.pages_per_site, j);

    let zipf = zipf_cumulative(cfg.n_items, cfg.item_popularity);

    let draw_corruption = |rng: &mut ChaCha8Rng, rates: &ErrorRates, item: u32| {
        let mut c = Corruption::default();
        if rates.triple_identification > 0.0 && rng.random_bool(rates.triple_identification) {
            c.garble_object = true;
        }
        if rates.entity_linkage > 0.0 && n_entities > 1 && rng.random_bool(rates.entity_linkage) {
            let current = item as usize / cfg.n_predicates;
            let mut other = rng.random_range(0..n_entities - 1);
            if other >= current {
                other += 1;
            }
            c.swap_subject = Some(other as u32);
        }
        if rates.predicate_linkage > 0.0
            && cfg.n_predicates > 1
            && rng.random_bool(rates.predicate_linkage)
        {
            let current = predicate_index(item);
            let mut other = rng.random_range(0..cfg.n_predicates - 1);
            if other >= current {
                other += 1;
            }
            c.swap_predicate = Some(other as u32);
        }
        c
    };

    // The strongest error channel across extractors decides whether shared
    // corruption outcomes need to be drawn at all.
    let shared_rates = ErrorRates {
        triple_identification: avg(cfg.extractors.iter().map(|e| e.error_rates.triple_identification)),
        entity_linkage: avg(cfg.extractors.iter().map(|e| e.error_rates.entity_linkage)),
        predicate_linkage: avg(cfg.extractors.iter().map(|e| e.error_rates.predicate_linkage)),
    };
    let want_shared = cfg.shared_error_rate > 0.0 && shared_rates.any();

    // Pages claim values.
    let mut claims: Vec<Claim> = Vec::new();
    for (page, &accuracy) in page_acc.iter().enumerate() {
        let lo = cfg.claims_per_source.0 as usize;
        let hi = cfg.claims_per_source.1 as usize;
        let n_claims = rng.random_range(lo..=hi).min(cfg.n_items);
        let mut chosen: HashSet<usize> = HashSet::with_capacity(n_claims);
        let mut picked: Vec<usize> = Vec::with_capacity(n_claims);
        let mut attempts = 0usize;
        while picked.len() < n_claims && attempts < 30 * n_claims + 100 {
            attempts += 1;
            let item = sample_zipf(&mut rng, &zipf);
            if chosen.insert(item) {
                picked.push(item);
            }
        }
        let mut fill = 0usize;
        while picked.len() < n_claims {
            if chosen.insert(fill) {
                picked.push(fill);
            }
            fill += 1;
        }
        for item in picked {
            let item = item as u32;
            let truths = truths_per_item[item as usize];
            let value = if rng.random_bool(accuracy) {
                rng.random_range(0..truths)
            } else {
                truths + rng.random_range(0..cfg.value_domain_size as u32)
            };
            let shared_corruption = if want_shared {
                draw_corruption(&mut rng, &shared_rates, item)
            } else {
                Corruption::default()
            };
            claims.push(Claim {
                item,
                value,
                page: page as u32,
                shared_corruption,
            });
        }
    }

    // Extractors observe and corrupt claims.
    let mut records: Vec<ExtractionRecord> = Vec::new();
    for claim in &claims {
        for (e, profile) in cfg.extractors.iter().enumerate() {
            if profile.coverage < 1.0 && !rng.random_bool(profile.coverage) {
                continue;
            }
            let corruption = if want_shared && rng.random_bool(cfg.shared_error_rate) {
                claim.shared_corruption
            } else if profile.error_rates.any() {
                draw_corruption(&mut rng, &profile.error_rates, claim.item)
            } else {
                Corruption::default()
            };
            let mut subject = subject_of(claim.item);
            let mut pred_idx = predicate_index(claim.item);
            let mut object = value_name(claim.item, claim.value);
            if !corruption.is_clean() {
                if let Some(s) = corruption.swap_subject {
                    subject = format!("e{s}");
                }
                if let Some(p) = corruption.swap_predicate {
                    pred_idx = p as usize;
                }
                if corruption.garble_object {
                    object = format!("junk.{:08x}", rng.random::<u32>());
                }
            }
            let triple = Triple::new(subject, predicate_name(pred_idx), object);
            let confidence = profile.confidence.map(|cp| {
                let params = if truth_set.contains(&triple) {
                    cp.when_true
                } else {
                    cp.when_false
                };
                sample_beta(&mut rng, params)
            });
            let pattern = if profile.patterns > 0 {
                format!("pat{e}.{}", pred_idx as u32 % profile.patterns)
            } else {
                String::new()
            };
            records.push(ExtractionRecord {
                triple,
                extractor: format!("E{e}"),
                url: page_url(claim.page as usize),
                pattern,
                confidence,
            });
        }
    }

    let corpus = Corpus::from_records(records);
    let mut truth_log: BTreeMap<Triple, bool> = BTreeMap::new();
    for r in corpus.records() {
        truth_log
            .entry(r.triple.clone())
            .or_insert_with(|| truth_set.contains(&r.triple));
    }

    let kb: BTreeSet<Triple> = if cfg.kb_fraction >= 1.0 {
        truth_set.iter().cloned().collect()
    } else {
        let kb_seed = crate::hashing::mix(cfg.seed, 0x6b62);
        truth_set
            .iter()
            .filter(|t| {
                // keep or drop whole items so excluded items label as Unknown
                let item_hash = crate::hashing::fnv1a_parts(&[&t.subject, &t.predicate]);
                crate::hashing::unit_f64(crate::hashing::mix(kb_seed, item_hash)) < cfg.kb_fraction
            })
            .cloned()
            .collect()
    };

    let source_accuracy: BTreeMap<String, f64> = (0..cfg.n_sources)
        .map(|j| (page_url(j), page_acc[j]))
        .collect();

    Ok(SynthOutput {
        corpus,
        kb,
        truth_log,
        source_accuracy,
    })
}

fn avg(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{vote_fuse, ItemGroup};
    use crate::model::{provenance_key, Granularity};
    use std::collections::HashMap;

    #[test]
    fn noiseless_corpus_is_all_true() {
        let cfg = SynthConfig::model_matched(200, 50, 20, 5, (1.0, 0.0), 7);
        let out = generate(&cfg).unwrap();
        assert!(out.truth_log.values().all(|t| *t));
        // Vote over any item gives probability 1.0
        let mut groups: HashMap<(String, String), Vec<(String, String)>> = HashMap::new();
        for r in out.corpus.records() {
            groups
                .entry((r.triple.subject.clone(), r.triple.predicate.clone()))
                .or_default()
                .push((
                    r.triple.object.clone(),
                    provenance_key(r, Granularity::ExtractorUrl).to_string(),
                ));
        }
        for obs in groups.into_values() {
            let g = ItemGroup::new(obs);
            let probs = vote_fuse(&g).unwrap();
            assert_eq!(probs.len(), 1);
            assert_eq!(probs[0].1, 1.0);
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let cfg = SynthConfig {
            n_items: 300,
            n_sources: 80,
            seed: 42,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.corpus.write_records_to(&mut buf_a).unwrap();
        b.corpus.write_records_to(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
        assert_eq!(a.kb, b.kb);
        assert_eq!(a.truth_log, b.truth_log);
    }

    #[test]
    fn truth_log_agrees_with_full_kb() {
        let cfg = SynthConfig {
            n_items: 300,
            n_sources: 120,
            kb_fraction: 1.0,
            seed: 3,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        for (t, truth) in &out.truth_log {
            assert_eq!(out.kb.contains(t), *truth, "triple {t}");
        }
    }

    #[test]
    fn partial_kb_leaves_unknown_items() {
        let cfg = SynthConfig {
            n_items: 400,
            n_sources: 100,
            kb_fraction: 0.5,
            seed: 9,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        assert!(!out.kb.is_empty());
        // some true triples are not in the KB
        assert!(out
            .truth_log
            .iter()
            .any(|(t, truth)| *truth && !out.kb.contains(t)));
    }

    #[test]
    fn empirical_source_accuracy_converges() {
        let cfg = SynthConfig::model_matched(6000, 15, 1500, 10, (8.0, 2.0), 21);
        let out = generate(&cfg).unwrap();
        let mut per_page: HashMap<&str, (u64, u64)> = HashMap::new();
        for r in out.corpus.records() {
            let e = per_page.entry(&r.url).or_insert((0, 0));
            e.0 += 1;
            e.1 += u64::from(out.truth_log[&r.triple]);
        }
        for (url, (n, trues)) in per_page {
            assert!(n >= 1000, "page {url} has {n} claims");
            let empirical = trues as f64 / n as f64;
            let sampled = out.source_accuracy[url];
            assert!(
                (empirical - sampled).abs() <= 0.03,
                "{url}: |{empirical} - {sampled}| > 0.03"
            );
        }
    }

    #[test]
    fn zipf_skew_concentrates_support() {
        let cfg = SynthConfig {
            n_items: 1000,
            n_sources: 200,
            claims_per_source: (30, 30),
            item_popularity: 1.0,
            extractors: vec![ExtractorProfile::noiseless()],
            seed: 5,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        let mut per_item: HashMap<(String, String), u64> = HashMap::new();
        for r in out.corpus.records() {
            *per_item
                .entry((r.triple.subject.clone(), r.triple.predicate.clone()))
                .or_default() += 1;
        }
        let mut counts: Vec<u64> = per_item.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let total: u64 = counts.iter().sum();
        let mean = total as f64 / cfg.n_items as f64;
        let top = counts.len().div_ceil(100);
        let top_mean =
            counts[..top].iter().sum::<u64>() as f64 / top as f64;
        assert!(
            top_mean >= 10.0 * mean,
            "top-1% mean {top_mean} < 10x overall mean {mean}"
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let backwards_range = SynthConfig {
            claims_per_source: (5, 2),
            ..SynthConfig::default()
        };
        assert!(generate(&backwards_range).is_err());
        let no_extractors = SynthConfig {
            extractors: Vec::new(),
            ..SynthConfig::default()
        };
        assert!(generate(&no_extractors).is_err());
        let bad_fraction = SynthConfig {
            kb_fraction: 1.5,
            ..SynthConfig::default()
        };
        assert!(generate(&bad_fraction).is_err());
    }
}
