//! Three-stage iterative fusion executor. Stage I groups observations by
//! data item and computes per-value probabilities; Stage II groups
//! (value, probability) pairs by provenance and recomputes accuracies;
//! the stages repeat until the round budget or until accuracies stop moving;
//! Stage III deduplicates to one row per unique triple.
//!
//! Work inside a stage is data-parallel over group keys with a barrier
//! between stages. Sampling is seeded per group, so results are
//! byte-identical for any worker count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::fusion::{
    accu_fuse, popaccu_fuse, popaccu_popularity, provenance_accuracy, vote_fuse, FusionParams,
    ItemGroup,
};
use crate::gold::GoldStandard;
use crate::hashing;
use crate::ingest::Corpus;
use crate::model::{
    provenance_key, site_of, AccuracyEntry, AccuracyTable, FusionResult, Granularity,
    ProvenanceKey, Triple, TripleVerdict,
};
use crate::{Error, Result};

pub const DEFAULT_ROUNDS: u32 = 5;
pub const DEFAULT_SAMPLE_LIMIT: usize = 1_000_000;
pub const DEFAULT_ACCURACY_DELTA_STOP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Vote,
    Accu,
    PopAccu,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Vote => "vote",
            Method::Accu => "accu",
            Method::PopAccu => "popaccu",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" => Ok(Method::Vote),
            "accu" => Ok(Method::Accu),
            "popaccu" => Ok(Method::PopAccu),
            other => Err(Error::InvalidInput(format!(
                "unknown method `{other}` (expected vote, accu or popaccu)"
            ))),
        }
    }
}

/// Bootstrap provenance accuracies from a reference KB before round one.
#[derive(Debug, Clone)]
pub struct GoldInit {
    pub standard: GoldStandard,
    /// Fraction of the gold labels made visible to initialization, in (0, 1].
    pub sample_rate: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub method: Method,
    pub granularity: Granularity,
    pub params: FusionParams,
    /// Hard round budget R.
    pub rounds: u32,
    /// Per-group sampling cap L applied in both stages.
    pub sample_limit: usize,
    /// Skip items without repeated support in round one, then ignore
    /// provenances still carrying the default accuracy.
    pub filter_coverage: bool,
    /// Ignore provenances whose accuracy falls below this threshold; items
    /// losing every provenance fall back to averaged provenance accuracy.
    pub min_prov_accuracy: Option<f64>,
    pub gold_init: Option<GoldInit>,
    /// Stop early when no accuracy moved by at least this much; 0 disables.
    pub accuracy_delta_stop: f64,
    pub seed: u64,
    pub workers: usize,
}

impl PipelineConfig {
    pub fn new(method: Method, granularity: Granularity) -> Self {
        PipelineConfig {
            method,
            granularity,
            params: FusionParams::default(),
            rounds: DEFAULT_ROUNDS,
            sample_limit: DEFAULT_SAMPLE_LIMIT,
            filter_coverage: false,
            min_prov_accuracy: None,
            gold_init: None,
            accuracy_delta_stop: DEFAULT_ACCURACY_DELTA_STOP,
            seed: 0,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.rounds < 1 {
            return bad("rounds must be >= 1".into());
        }
        if self.sample_limit < 1 {
            return bad("sample_limit must be >= 1".into());
        }
        if self.workers < 1 {
            return bad("workers must be >= 1".into());
        }
        let eps = self.params.epsilon_clamp;
        if !(eps > 0.0 && eps < 0.5) {
            return bad("epsilon_clamp must lie in (0, 0.5)".into());
        }
        if !(self.params.default_accuracy > eps && self.params.default_accuracy < 1.0 - eps) {
            return bad("default_accuracy must lie in (epsilon, 1 - epsilon)".into());
        }
        if self.params.n_false < 1 {
            return bad("n_false must be >= 1".into());
        }
        if let Some(theta) = self.min_prov_accuracy {
            if !(0.0..=1.0).contains(&theta) {
                return bad("min_prov_accuracy must lie in [0, 1]".into());
            }
        }
        if let Some(g) = &self.gold_init {
            if !(g.sample_rate > 0.0 && g.sample_rate <= 1.0) {
                return bad("gold sample_rate must lie in (0, 1]".into());
            }
        }
        if self.method == Method::Vote
            && (self.filter_coverage || self.min_prov_accuracy.is_some() || self.gold_init.is_some())
        {
            return bad(
                "vote runs a single pass without accuracies; coverage/accuracy filters and \
                 gold initialization require accu or popaccu"
                    .into(),
            );
        }
        Ok(())
    }

    pub fn resolved(&self) -> ResolvedConfig {
        ResolvedConfig {
            method: self.method.to_string(),
            granularity: self.granularity.to_string(),
            n_false: self.params.n_false,
            default_accuracy: self.params.default_accuracy,
            epsilon_clamp: self.params.epsilon_clamp,
            rounds: self.rounds,
            sample_limit: self.sample_limit as u64,
            filter_coverage: self.filter_coverage,
            min_prov_accuracy: self.min_prov_accuracy,
            gold_init_sample_rate: self.gold_init.as_ref().map(|g| g.sample_rate),
            accuracy_delta_stop: self.accuracy_delta_stop,
            seed: self.seed,
            workers: self.workers,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// The full refinement stack: coverage filtering, finest granularity,
/// accuracy threshold 0.5, and gold-initialized accuracies when a gold
/// standard is supplied (without one the run stays unsupervised).
pub fn popaccu_plus_preset(gold_init: Option<GoldInit>) -> PipelineConfig {
    PipelineConfig {
        filter_coverage: true,
        min_prov_accuracy: Some(0.5),
        gold_init,
        ..PipelineConfig::new(
            Method::PopAccu,
            Granularity::ExtractorSitePredicatePattern,
        )
    }
}

/// Every defaulted value pinned, for reproducing a run from its artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub method: String,
    pub granularity: String,
    pub n_false: u32,
    pub default_accuracy: f64,
    pub epsilon_clamp: f64,
    pub rounds: u32,
    pub sample_limit: u64,
    pub filter_coverage: bool,
    pub min_prov_accuracy: Option<f64>,
    pub gold_init_sample_rate: Option<f64>,
    pub accuracy_delta_stop: f64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundDiagnostics {
    pub round: u32,
    pub max_accuracy_delta: f64,
    pub provenances_recomputed: u64,
    pub provenances_default: u64,
    pub triples_with_probability: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunDiagnostics {
    pub config: ResolvedConfig,
    pub data_items: u64,
    pub unique_triples: u64,
    pub provenances: u64,
    pub rounds: Vec<RoundDiagnostics>,
    pub coverage: f64,
    pub wall_ms: u64,
}

impl RunDiagnostics {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))
    }
}

pub struct RunOutput {
    pub result: FusionResult,
    pub accuracies: AccuracyTable,
    pub diagnostics: RunDiagnostics,
}

/// Deterministic, order-independent group sampling: when `items` exceeds
/// `limit`, every item is ranked by a stable hash of (seed, group_key, item)
/// and the `limit` smallest ranks are kept. The selection depends only on
/// the multiset of items, never on input order or worker scheduling.
pub fn sample_group<T>(
    items: Vec<T>,
    limit: usize,
    group_key: u64,
    seed: u64,
    item_hash: impl Fn(&T) -> u64,
) -> Vec<T> {
    if items.len() <= limit {
        return items;
    }
    let base = hashing::mix(seed, group_key);
    let mut ranked: Vec<(u64, u64, T)> = items
        .into_iter()
        .map(|it| {
            let h = item_hash(&it);
            (hashing::mix(base, h), h, it)
        })
        .collect();
    ranked.sort_unstable_by_key(|r| (r.0, r.1));
    ranked.truncate(limit);
    ranked.into_iter().map(|(_, _, it)| it).collect()
}

/// Initial provenance accuracies from gold labels: per provenance, the
/// fraction of its distinct labeled triples that are true, over a seeded
/// `sample_rate` subsample of the gold standard. Provenances without labeled
/// triples keep the default accuracy and stay flagged as default.
pub fn init_accuracies_from_gold(
    c: &Corpus,
    g: Granularity,
    gold: &GoldStandard,
    sample_rate: f64,
    seed: u64,
    params: &FusionParams,
) -> AccuracyTable {
    let mut per_prov: BTreeMap<ProvenanceKey, BTreeSet<&Triple>> = BTreeMap::new();
    for r in c.records() {
        per_prov
            .entry(provenance_key(r, g))
            .or_default()
            .insert(&r.triple);
    }
    let sub_seed = hashing::mix(seed, 0x676f_6c64);
    let mut table = AccuracyTable::new();
    for (key, triples) in per_prov {
        let mut labeled = 0u64;
        let mut trues = 0u64;
        for t in &triples {
            let label = gold.lcwa_label(t);
            if label == crate::gold::Label::Unknown {
                continue;
            }
            if sample_rate < 1.0 {
                let th = hashing::fnv1a_parts(&[&t.subject, &t.predicate, &t.object]);
                if hashing::unit_f64(hashing::mix(sub_seed, th)) >= sample_rate {
                    continue;
                }
            }
            labeled += 1;
            trues += u64::from(label == crate::gold::Label::True);
        }
        let entry = if labeled > 0 {
            AccuracyEntry {
                accuracy: params.clamp_accuracy(trues as f64 / labeled as f64),
                support: triples.len() as u64,
                is_default: false,
            }
        } else {
            AccuracyEntry {
                accuracy: params.clamp_accuracy(params.default_accuracy),
                support: triples.len() as u64,
                is_default: true,
            }
        };
        table.insert(key, entry);
    }
    table
}

// ---------------------------------------------------------------------------
// Interned representation

struct Interner {
    map: HashMap<String, u32>,
    strings: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            map: HashMap::new(),
            strings: Vec::new(),
        }
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.map.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_string());
        self.map.insert(s.to_string(), id);
        id
    }

    fn get(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }
}

struct ItemInfo {
    subject: u32,
    predicate: u32,
    pair_start: u32,
    pair_end: u32,
    hash: u64,
}

struct PairInfo {
    item: u32,
    value: u32,
    obs_start: u32,
    obs_end: u32,
    hash: u64,
    extractor_count: u32,
    source_count: u32,
}

struct ProvInfo {
    parts: [u32; 4],
    parts_len: u8,
    support: u32,
    hash: u64,
}

struct Prepared {
    strings: Interner,
    items: Vec<ItemInfo>,
    pairs: Vec<PairInfo>,
    /// Provenance index per observation, grouped by pair.
    obs_prov: Vec<u32>,
    provs: Vec<ProvInfo>,
    /// CSR rows: pair indices per provenance, sorted.
    prov_pairs: Vec<u32>,
    prov_pairs_off: Vec<u32>,
}

impl Prepared {
    fn provenance_key(&self, prov: &ProvInfo) -> ProvenanceKey {
        let parts = prov.parts[..prov.parts_len as usize]
            .iter()
            .map(|&id| self.strings.get(id).to_string())
            .collect();
        ProvenanceKey::from_parts(parts)
    }
}

fn prepare(corpus: &Corpus, granularity: Granularity) -> Prepared {
    let mut strings = Interner::new();
    let mut site_of_url: HashMap<u32, u32> = HashMap::new();
    let mut item_index: HashMap<(u32, u32), u32> = HashMap::new();
    let mut item_keys: Vec<(u32, u32)> = Vec::new();
    let mut prov_index: HashMap<([u32; 4], u8), u32> = HashMap::new();
    let mut prov_keys: Vec<([u32; 4], u8)> = Vec::new();
    // (item, value, prov, extractor, url) per record
    let mut tuples: Vec<(u32, u32, u32, u32, u32)> = Vec::with_capacity(corpus.len());

    for r in corpus.records() {
        let s = strings.intern(&r.triple.subject);
        let p = strings.intern(&r.triple.predicate);
        let o = strings.intern(&r.triple.object);
        let e = strings.intern(&r.extractor);
        let u = strings.intern(&r.url);
        let item = match item_index.get(&(s, p)) {
            Some(&i) => i,
            None => {
                let i = item_keys.len() as u32;
                item_index.insert((s, p), i);
                item_keys.push((s, p));
                i
            }
        };
        let site = |strings: &mut Interner, site_of_url: &mut HashMap<u32, u32>| {
            if let Some(&sid) = site_of_url.get(&u) {
                sid
            } else {
                let sid = strings.intern(&site_of(&r.url));
                site_of_url.insert(u, sid);
                sid
            }
        };
        let (parts, len): ([u32; 4], u8) = match granularity {
            Granularity::ExtractorUrl => ([e, u, 0, 0], 2),
            Granularity::ExtractorSite => {
                let sid = site(&mut strings, &mut site_of_url);
                ([e, sid, 0, 0], 2)
            }
            Granularity::ExtractorSitePredicate => {
                let sid = site(&mut strings, &mut site_of_url);
                ([e, sid, p, 0], 3)
            }
            Granularity::ExtractorSitePredicatePattern => {
                let sid = site(&mut strings, &mut site_of_url);
                let pat = strings.intern(&r.pattern);
                ([e, sid, p, pat], 4)
            }
        };
        let prov = match prov_index.get(&(parts, len)) {
            Some(&i) => i,
            None => {
                let i = prov_keys.len() as u32;
                prov_index.insert((parts, len), i);
                prov_keys.push((parts, len));
                i
            }
        };
        tuples.push((item, o, prov, e, u));
    }

    // Unique (item, value, prov) observations, grouped by (item, value).
    let mut obs: Vec<(u32, u32, u32)> = tuples.iter().map(|&(i, v, s, _, _)| (i, v, s)).collect();
    obs.sort_unstable();
    obs.dedup();

    let mut pairs: Vec<PairInfo> = Vec::new();
    let mut obs_prov: Vec<u32> = Vec::with_capacity(obs.len());
    for (idx, &(item, value, prov)) in obs.iter().enumerate() {
        let extend = match pairs.last() {
            Some(last) => last.item == item && last.value == value,
            None => false,
        };
        if extend {
            pairs.last_mut().unwrap().obs_end = idx as u32 + 1;
        } else {
            pairs.push(PairInfo {
                item,
                value,
                obs_start: idx as u32,
                obs_end: idx as u32 + 1,
                hash: 0,
                extractor_count: 0,
                source_count: 0,
            });
        }
        obs_prov.push(prov);
    }

    // Item spans over the pair array (pairs are sorted by item id).
    let mut items: Vec<ItemInfo> = item_keys
        .iter()
        .map(|&(s, p)| ItemInfo {
            subject: s,
            predicate: p,
            pair_start: 0,
            pair_end: 0,
            hash: hashing::fnv1a_parts(&[strings.get(s), strings.get(p)]),
        })
        .collect();
    for (pi, pair) in pairs.iter_mut().enumerate() {
        let item = &mut items[pair.item as usize];
        // pair_end == 0 means the span has not started (real ends are >= 1)
        if item.pair_end == 0 {
            item.pair_start = pi as u32;
        }
        item.pair_end = pi as u32 + 1;
        pair.hash = hashing::fnv1a_parts(&[
            strings.get(item.subject),
            strings.get(item.predicate),
            strings.get(pair.value),
        ]);
    }

    // Distinct extractors and URLs per pair, from the raw records.
    let mut per_pair_ext: Vec<(u32, u32)> = Vec::with_capacity(tuples.len());
    let mut per_pair_url: Vec<(u32, u32)> = Vec::with_capacity(tuples.len());
    for &(i, v, _, e, u) in &tuples {
        let pi = pairs
            .binary_search_by(|p| (p.item, p.value).cmp(&(i, v)))
            .expect("every record maps to a pair") as u32;
        per_pair_ext.push((pi, e));
        per_pair_url.push((pi, u));
    }
    drop(tuples);
    per_pair_ext.sort_unstable();
    per_pair_ext.dedup();
    for &(pi, _) in &per_pair_ext {
        pairs[pi as usize].extractor_count += 1;
    }
    drop(per_pair_ext);
    per_pair_url.sort_unstable();
    per_pair_url.dedup();
    for &(pi, _) in &per_pair_url {
        pairs[pi as usize].source_count += 1;
    }
    drop(per_pair_url);

    // CSR provenance -> pairs, and per-provenance support.
    let mut pp: Vec<(u32, u32)> = obs
        .iter()
        .enumerate()
        .map(|(idx, &(_, _, prov))| {
            let pair = pairs.partition_point(|p| p.obs_start <= idx as u32) as u32 - 1;
            (prov, pair)
        })
        .collect();
    drop(obs);
    pp.sort_unstable();
    let mut prov_pairs_off = vec![0u32; prov_keys.len() + 1];
    for &(prov, _) in &pp {
        prov_pairs_off[prov as usize + 1] += 1;
    }
    for i in 1..prov_pairs_off.len() {
        prov_pairs_off[i] += prov_pairs_off[i - 1];
    }
    let prov_pairs: Vec<u32> = pp.iter().map(|&(_, pair)| pair).collect();

    let provs: Vec<ProvInfo> = prov_keys
        .iter()
        .enumerate()
        .map(|(si, &(parts, parts_len))| {
            let strs: Vec<&str> = parts[..parts_len as usize]
                .iter()
                .map(|&id| strings.get(id))
                .collect();
            ProvInfo {
                parts,
                parts_len,
                support: prov_pairs_off[si + 1] - prov_pairs_off[si],
                hash: hashing::fnv1a_parts(&strs),
            }
        })
        .collect();

    Prepared {
        strings,
        items,
        pairs,
        obs_prov,
        provs,
        prov_pairs,
        prov_pairs_off,
    }
}

// ---------------------------------------------------------------------------
// Stages

fn stage_one(
    prep: &Prepared,
    acc: &[f64],
    is_default: &[bool],
    prev: Option<&Vec<Option<f64>>>,
    round: u32,
    cfg: &PipelineConfig,
) -> Vec<Option<f64>> {
    let round_seed = hashing::mix(cfg.seed, u64::from(round));
    let per_item: Vec<Vec<(u32, f64)>> = prep
        .items
        .par_iter()
        .map(|item| {
            let mut full: Vec<(u32, u32)> = Vec::new();
            for pi in item.pair_start..item.pair_end {
                let pair = &prep.pairs[pi as usize];
                for oi in pair.obs_start..pair.obs_end {
                    full.push((pi, prep.obs_prov[oi as usize]));
                }
            }
            let drop_defaults = cfg.filter_coverage && round >= 2;
            let filtered: Vec<(u32, u32)> = full
                .iter()
                .copied()
                .filter(|&(_, s)| {
                    let s = s as usize;
                    if drop_defaults && is_default[s] {
                        return false;
                    }
                    if let Some(theta) = cfg.min_prov_accuracy {
                        if acc[s] < theta {
                            return false;
                        }
                    }
                    true
                })
                .collect();
            if filtered.is_empty() {
                if cfg.min_prov_accuracy.is_some() && !full.is_empty() {
                    return fallback_probs(item, &full, acc, is_default, cfg);
                }
                return Vec::new();
            }
            let sampled = sample_group(filtered, cfg.sample_limit, item.hash, round_seed, |&(pi, s)| {
                hashing::mix(prep.pairs[pi as usize].hash, prep.provs[s as usize].hash)
            });
            let group: ItemGroup<u32, u32> = ItemGroup::new(sampled);
            if cfg.filter_coverage && round == 1 && !group.values().iter().any(|(_, n)| *n >= 2) {
                return Vec::new();
            }
            let lookup = |s: &u32| Some(acc[*s as usize]);
            let probs = match cfg.method {
                Method::Vote => vote_fuse(&group),
                Method::Accu => accu_fuse(&group, lookup, &cfg.params),
                Method::PopAccu => {
                    let pop = match prev {
                        Some(prev_probs) => {
                            let prior = |v: &u32| prev_probs[*v as usize];
                            popaccu_popularity(&group, Some(&prior))
                        }
                        None => popaccu_popularity(&group, None),
                    };
                    pop.and_then(|pop| popaccu_fuse(&group, lookup, &pop, &cfg.params))
                }
            };
            probs.expect("pipeline pre-populates accuracies for every provenance")
        })
        .collect();

    let mut out = vec![None; prep.pairs.len()];
    for probs in per_item {
        for (pi, p) in probs {
            out[pi as usize] = Some(p);
        }
    }
    out
}

/// Average-accuracy compensation for items whose provenances were all
/// filtered: each triple gets the mean accuracy of its own (pre-filter)
/// provenances. With coverage filtering on, only re-evaluated provenances
/// have a known accuracy; a triple supported solely by defaults stays absent.
fn fallback_probs(
    item: &ItemInfo,
    full: &[(u32, u32)],
    acc: &[f64],
    is_default: &[bool],
    cfg: &PipelineConfig,
) -> Vec<(u32, f64)> {
    let n_pairs = (item.pair_end - item.pair_start) as usize;
    let mut sums = vec![(0.0f64, 0u32); n_pairs];
    for &(pair, s) in full {
        if cfg.filter_coverage && is_default[s as usize] {
            continue;
        }
        let slot = &mut sums[(pair - item.pair_start) as usize];
        slot.0 += acc[s as usize];
        slot.1 += 1;
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(i, (sum, n))| (item.pair_start + i as u32, sum / f64::from(n)))
        .collect()
}

fn stage_two(
    prep: &Prepared,
    probs: &[Option<f64>],
    round: u32,
    cfg: &PipelineConfig,
    acc: &mut [f64],
    is_default: &mut [bool],
) -> (f64, u64) {
    let round_seed = hashing::mix(cfg.seed, hashing::mix(u64::from(round), 0x5353));
    let updates: Vec<Option<f64>> = prep
        .provs
        .par_iter()
        .enumerate()
        .map(|(si, prov)| {
            let row = &prep.prov_pairs
                [prep.prov_pairs_off[si] as usize..prep.prov_pairs_off[si + 1] as usize];
            let with_prob: Vec<u32> = row
                .iter()
                .copied()
                .filter(|&pi| probs[pi as usize].is_some())
                .collect();
            let mut sampled = sample_group(with_prob, cfg.sample_limit, prov.hash, round_seed, |&pi| {
                prep.pairs[pi as usize].hash
            });
            sampled.sort_unstable();
            let values: Vec<f64> = sampled
                .iter()
                .map(|&pi| probs[pi as usize].unwrap())
                .collect();
            provenance_accuracy(&values, &cfg.params)
        })
        .collect();

    let mut max_delta = 0.0f64;
    let mut recomputed = 0u64;
    for (si, update) in updates.into_iter().enumerate() {
        if let Some(a) = update {
            let delta = (a - acc[si]).abs();
            max_delta = max_delta.max(delta);
            acc[si] = a;
            is_default[si] = false;
            recomputed += 1;
        }
    }
    (max_delta, recomputed)
}

/// Runs the configured estimator over the corpus and returns per-triple
/// probabilities, the final accuracy table and per-round diagnostics.
pub fn run_fusion(corpus: &Corpus, cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput("corpus has no records".into()));
    }
    let t_start = Instant::now();
    let prep = prepare(corpus, cfg.granularity);

    let default_acc = cfg.params.clamp_accuracy(cfg.params.default_accuracy);
    let mut acc = vec![default_acc; prep.provs.len()];
    let mut is_default = vec![true; prep.provs.len()];
    if let Some(gold) = &cfg.gold_init {
        let table = init_accuracies_from_gold(
            corpus,
            cfg.granularity,
            &gold.standard,
            gold.sample_rate,
            cfg.seed,
            &cfg.params,
        );
        for (si, prov) in prep.provs.iter().enumerate() {
            let key = prep.provenance_key(prov);
            let entry = table
                .get(&key)
                .expect("gold initialization covers every provenance");
            acc[si] = entry.accuracy;
            is_default[si] = entry.is_default;
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

    let mut probs: Vec<Option<f64>> = Vec::new();
    let mut rounds_diag: Vec<RoundDiagnostics> = Vec::new();
    pool.install(|| {
        let mut have_prev = false;
        for round in 1..=cfg.rounds {
            let t_round = Instant::now();
            let prev = if have_prev { Some(&probs) } else { None };
            let new_probs = stage_one(&prep, &acc, &is_default, prev, round, cfg);
            let (delta, recomputed) = if cfg.method == Method::Vote {
                (0.0, 0)
            } else {
                stage_two(&prep, &new_probs, round, cfg, &mut acc, &mut is_default)
            };
            let with_prob = new_probs.iter().filter(|p| p.is_some()).count() as u64;
            probs = new_probs;
            have_prev = true;
            rounds_diag.push(RoundDiagnostics {
                round,
                max_accuracy_delta: delta,
                provenances_recomputed: recomputed,
                provenances_default: is_default.iter().filter(|d| **d).count() as u64,
                triples_with_probability: with_prob,
                wall_ms: t_round.elapsed().as_millis() as u64,
            });
            if cfg.method == Method::Vote {
                break;
            }
            if cfg.accuracy_delta_stop > 0.0 && delta < cfg.accuracy_delta_stop {
                break;
            }
        }
    });

    // Stage III: one row per unique triple.
    let mut rows: BTreeMap<Triple, TripleVerdict> = BTreeMap::new();
    let mut with_prob = 0u64;
    for (pi, pair) in prep.pairs.iter().enumerate() {
        let item = &prep.items[pair.item as usize];
        let probability = probs[pi];
        if probability.is_some() {
            with_prob += 1;
        }
        rows.insert(
            Triple::new(
                prep.strings.get(item.subject),
                prep.strings.get(item.predicate),
                prep.strings.get(pair.value),
            ),
            TripleVerdict {
                probability,
                provenance_count: pair.obs_end - pair.obs_start,
                extractor_count: pair.extractor_count,
                source_count: pair.source_count,
            },
        );
    }
    let coverage = with_prob as f64 / prep.pairs.len() as f64;

    let mut accuracies = AccuracyTable::new();
    for (si, prov) in prep.provs.iter().enumerate() {
        accuracies.insert(
            prep.provenance_key(prov),
            AccuracyEntry {
                accuracy: acc[si],
                support: u64::from(prov.support),
                is_default: is_default[si],
            },
        );
    }

    let diagnostics = RunDiagnostics {
        config: cfg.resolved(),
        data_items: prep.items.len() as u64,
        unique_triples: prep.pairs.len() as u64,
        provenances: prep.provs.len() as u64,
        rounds: rounds_diag,
        coverage,
        wall_ms: t_start.elapsed().as_millis() as u64,
    };

    Ok(RunOutput {
        result: FusionResult { rows, coverage },
        accuracies,
        diagnostics,
    })
}
