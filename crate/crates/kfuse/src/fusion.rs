//! The three per-data-item estimators (vote counting, Bayesian accuracy
//! fusion, Bayesian fusion with an empirical false-value distribution),
//! provenance-accuracy recomputation, and a brute-force enumeration oracle
//! used to validate the log-space implementations.
//!
//! All operations are pure; the generic value/provenance parameters let the
//! pipeline run them on interned integer ids while tests and examples use
//! strings.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shared estimator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    /// Assumed number of uniformly distributed false values per data item.
    pub n_false: u32,
    /// Accuracy assigned to a provenance before any recomputation.
    pub default_accuracy: f64,
    /// Accuracies are clamped into [epsilon, 1 - epsilon] before entering
    /// logarithms; zero popularities are floored at epsilon as well.
    pub epsilon_clamp: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams {
            n_false: 100,
            default_accuracy: 0.8,
            epsilon_clamp: 1e-4,
        }
    }
}

impl FusionParams {
    pub fn clamp_accuracy(&self, a: f64) -> f64 {
        a.clamp(self.epsilon_clamp, 1.0 - self.epsilon_clamp)
    }
}

/// The conflicting observations for one data item: deduplicated
/// (value, provenance) pairs plus per-value provenance counts.
#[derive(Debug, Clone)]
pub struct ItemGroup<V, S> {
    /// Sorted by (value, provenance), unique.
    observations: Vec<(V, S)>,
    /// Distinct values with their provenance counts, sorted by value;
    /// counts sum to `n_total`.
    values: Vec<(V, u32)>,
}

impl<V: Ord + Clone, S: Ord> ItemGroup<V, S> {
    pub fn new(mut observations: Vec<(V, S)>) -> Self {
        observations.sort_unstable();
        observations.dedup();
        let mut values: Vec<(V, u32)> = Vec::new();
        for (v, _) in &observations {
            match values.last_mut() {
                Some((last, n)) if last == v => *n += 1,
                _ => values.push((v.clone(), 1)),
            }
        }
        ItemGroup {
            observations,
            values,
        }
    }

    pub fn observations(&self) -> &[(V, S)] {
        &self.observations
    }

    pub fn values(&self) -> &[(V, u32)] {
        &self.values
    }

    pub fn n_total(&self) -> u32 {
        self.observations.len() as u32
    }

    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Observation slice supporting the i-th distinct value.
    fn value_obs(&self, i: usize) -> &[(V, S)] {
        let start: u32 = self.values[..i].iter().map(|(_, n)| n).sum();
        let end = start + self.values[i].1;
        &self.observations[start as usize..end as usize]
    }
}

/// Vote estimator: each value's probability is its share of the item's
/// provenance observations; probabilities sum to 1.
pub fn vote_fuse<V: Ord + Clone, S: Ord>(g: &ItemGroup<V, S>) -> Result<Vec<(V, f64)>> {
    if g.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let n = f64::from(g.n_total());
    Ok(g.values()
        .iter()
        .map(|(v, m)| (v.clone(), f64::from(*m) / n))
        .collect())
}

/// Additive log-likelihood contribution of one supporting provenance:
/// ln(N * a / (1 - a)), with the accuracy clamped first.
pub fn accu_vote_count(accuracy: f64, p: &FusionParams) -> f64 {
    let a = p.clamp_accuracy(accuracy);
    (f64::from(p.n_false) * a / (1.0 - a)).ln()
}

fn lookup_accuracy<S: Ord + Debug>(
    s: &S,
    acc: &impl Fn(&S) -> Option<f64>,
) -> Result<f64> {
    acc(s).ok_or_else(|| Error::MissingAccuracy(format!("{s:?}")))
}

/// Bayesian accuracy estimator. Assumes one true value per item, N uniformly
/// distributed false values and independent provenances: the posterior of an
/// observed value is softmax over per-value vote-count sums, with
/// `N + 1 - |values|` unobserved candidates at vote count zero. Computed in
/// log space with a max shift.
pub fn accu_fuse<V: Ord + Clone, S: Ord + Debug>(
    g: &ItemGroup<V, S>,
    acc: impl Fn(&S) -> Option<f64>,
    p: &FusionParams,
) -> Result<Vec<(V, f64)>> {
    if g.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut scores = Vec::with_capacity(g.n_values());
    for i in 0..g.n_values() {
        let mut c = 0.0;
        for (_, s) in g.value_obs(i) {
            c += accu_vote_count(lookup_accuracy(s, &acc)?, p);
        }
        scores.push(c);
    }
    let unobserved = (i64::from(p.n_false) + 1 - g.n_values() as i64).max(0) as f64;
    softmax_with_rest(g, &scores, unobserved)
}

/// Softmax over observed candidates' log scores plus `rest_count` candidates
/// at log score zero.
fn softmax_with_rest<V: Ord + Clone, S: Ord>(
    g: &ItemGroup<V, S>,
    scores: &[f64],
    rest_count: f64,
) -> Result<Vec<(V, f64)>> {
    let mut m = f64::NEG_INFINITY;
    for &c in scores {
        m = m.max(c);
    }
    if rest_count > 0.0 {
        m = m.max(0.0);
    }
    let mut denom = rest_count * (-m).exp();
    for &c in scores {
        denom += (c - m).exp();
    }
    Ok(g.values()
        .iter()
        .zip(scores)
        .map(|((v, _), &c)| (v.clone(), (c - m).exp() / denom))
        .collect())
}

/// Previous-round truth probability lookup used to update popularity.
pub type PriorLookup<'a, V> = dyn Fn(&V) -> Option<f64> + 'a;

/// Empirical false-value distribution over an item's observed values.
///
/// Without a prior (first round) it is plain count normalization. Given prior
/// truth probabilities, each value's expected false support is
/// `n(v) * (1 - prior(v))`, normalized; if every value is certainly true the
/// popularity falls back to count normalization.
pub fn popaccu_popularity<V: Ord + Clone, S: Ord>(
    g: &ItemGroup<V, S>,
    prior: Option<&PriorLookup<'_, V>>,
) -> Result<Vec<(V, f64)>> {
    if g.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let n = f64::from(g.n_total());
    let counts = || {
        g.values()
            .iter()
            .map(|(v, m)| (v.clone(), f64::from(*m) / n))
            .collect::<Vec<_>>()
    };
    let Some(prior) = prior else {
        return Ok(counts());
    };
    let false_support: Vec<f64> = g
        .values()
        .iter()
        .map(|(v, m)| {
            let pr = prior(v).unwrap_or(0.0).clamp(0.0, 1.0);
            f64::from(*m) * (1.0 - pr)
        })
        .collect();
    let total: f64 = false_support.iter().sum();
    if total <= 0.0 {
        return Ok(counts());
    }
    Ok(g.values()
        .iter()
        .zip(&false_support)
        .map(|((v, _), f)| (v.clone(), f / total))
        .collect())
}

/// Bayesian estimator with popularity-weighted false values. Candidates are
/// the observed values plus a single "none of the observed" candidate; a
/// provenance supports its value with its accuracy and any other value v'
/// with (1 - accuracy) * popularity(v'). Zero popularities are floored at
/// epsilon inside logarithms.
///
/// `pop` must align with `g.values()` (same values, same order), as produced
/// by [`popaccu_popularity`].
pub fn popaccu_fuse<V: Ord + Clone, S: Ord + Debug>(
    g: &ItemGroup<V, S>,
    acc: impl Fn(&S) -> Option<f64>,
    pop: &[(V, f64)],
    p: &FusionParams,
) -> Result<Vec<(V, f64)>> {
    if g.is_empty() {
        return Err(Error::EmptyGroup);
    }
    if pop.len() != g.n_values() || pop.iter().zip(g.values()).any(|((a, _), (b, _))| a != b) {
        return Err(Error::InvalidInput(
            "popularity does not align with the group's values".into(),
        ));
    }
    // Relative to the "all observations are false" candidate, a value's log
    // score is the sum over its supporters of ln(A) - ln((1-A) * pop(v)).
    let mut scores = Vec::with_capacity(g.n_values());
    for (i, (_, pop_raw)) in pop.iter().enumerate() {
        let pop_v = pop_raw.max(p.epsilon_clamp);
        let mut c = 0.0;
        for (_, s) in g.value_obs(i) {
            let a = p.clamp_accuracy(lookup_accuracy(s, &acc)?);
            c += a.ln() - ((1.0 - a) * pop_v).ln();
        }
        scores.push(c);
    }
    softmax_with_rest(g, &scores, 1.0)
}

/// Mean probability of the values one provenance supplied, clamped. `None`
/// when the provenance has no evaluated values this round (callers keep the
/// previous accuracy).
pub fn provenance_accuracy(value_probs: &[f64], p: &FusionParams) -> Option<f64> {
    if value_probs.is_empty() {
        return None;
    }
    let mean = value_probs.iter().sum::<f64>() / value_probs.len() as f64;
    Some(p.clamp_accuracy(mean))
}

/// Which posterior the oracle enumerates.
#[derive(Debug, Clone, Copy)]
pub enum OracleModel<'a, V> {
    Accu,
    PopAccu { popularity: &'a [(V, f64)] },
}

/// Brute-force posterior by direct candidate enumeration with raw
/// probability products (no log space). Limited to small instances; must
/// agree with [`accu_fuse`] / [`popaccu_fuse`] to within 1e-9.
pub fn oracle_fuse<V: Ord + Clone, S: Ord + Debug>(
    g: &ItemGroup<V, S>,
    acc: impl Fn(&S) -> Option<f64>,
    p: &FusionParams,
    model: OracleModel<'_, V>,
) -> Result<Vec<(V, f64)>> {
    if g.is_empty() {
        return Err(Error::EmptyGroup);
    }
    if g.n_values() > 16 {
        return Err(Error::OracleLimit(format!("{} values > 16", g.n_values())));
    }
    let mut provs: Vec<&S> = g.observations().iter().map(|(_, s)| s).collect();
    provs.sort_unstable();
    provs.dedup();
    if provs.len() > 16 {
        return Err(Error::OracleLimit(format!(
            "{} provenances > 16",
            provs.len()
        )));
    }

    let accuracy_of = |s: &S| -> Result<f64> { Ok(p.clamp_accuracy(lookup_accuracy(s, &acc)?)) };

    // Likelihood of the full observation set given that candidate `truth`
    // (an index into values, or None for "something unobserved") is true.
    let mut likelihoods = Vec::with_capacity(g.n_values());
    match model {
        OracleModel::Accu => {
            let n = f64::from(p.n_false);
            for ci in 0..g.n_values() {
                let truth = &g.values()[ci].0;
                let mut like = 1.0;
                for (v, s) in g.observations() {
                    let a = accuracy_of(s)?;
                    like *= if v == truth { a } else { (1.0 - a) / n };
                }
                likelihoods.push(like);
            }
            let mut unobserved_like = 1.0;
            for (_, s) in g.observations() {
                let a = accuracy_of(s)?;
                unobserved_like *= (1.0 - a) / n;
            }
            let rest = (i64::from(p.n_false) + 1 - g.n_values() as i64).max(0) as f64;
            let total: f64 = likelihoods.iter().sum::<f64>() + rest * unobserved_like;
            Ok(g.values()
                .iter()
                .zip(&likelihoods)
                .map(|((v, _), &l)| (v.clone(), l / total))
                .collect())
        }
        OracleModel::PopAccu { popularity } => {
            if popularity.len() != g.n_values()
                || popularity
                    .iter()
                    .zip(g.values())
                    .any(|((a, _), (b, _))| a != b)
            {
                return Err(Error::InvalidInput(
                    "popularity does not align with the group's values".into(),
                ));
            }
            let pop_of = |v: &V| -> f64 {
                let i = popularity.binary_search_by(|(x, _)| x.cmp(v)).unwrap();
                popularity[i].1.max(p.epsilon_clamp)
            };
            for ci in 0..g.n_values() {
                let truth = &g.values()[ci].0;
                let mut like = 1.0;
                for (v, s) in g.observations() {
                    let a = accuracy_of(s)?;
                    like *= if v == truth {
                        a
                    } else {
                        (1.0 - a) * pop_of(v)
                    };
                }
                likelihoods.push(like);
            }
            let mut none_like = 1.0;
            for (v, s) in g.observations() {
                let a = accuracy_of(s)?;
                none_like *= (1.0 - a) * pop_of(v);
            }
            let total: f64 = likelihoods.iter().sum::<f64>() + none_like;
            Ok(g.values()
                .iter()
                .zip(&likelihoods)
                .map(|((v, _), &l)| (v.clone(), l / total))
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    type G = ItemGroup<&'static str, &'static str>;

    fn group(obs: &[(&'static str, &'static str)]) -> G {
        ItemGroup::new(obs.to_vec())
    }

    fn const_acc(a: f64) -> impl Fn(&&'static str) -> Option<f64> {
        move |_| Some(a)
    }

    fn prob_of<V: Ord>(probs: &[(V, f64)], v: &V) -> f64 {
        probs.iter().find(|(x, _)| x == v).unwrap().1
    }

    #[test]
    fn vote_seven_of_ten() {
        let obs = vec![
            ("a", "p0"),
            ("a", "p1"),
            ("a", "p2"),
            ("a", "p3"),
            ("a", "p4"),
            ("a", "p5"),
            ("a", "p6"),
            ("b", "p7"),
            ("c", "p8"),
            ("d", "p9"),
        ];
        let g = group(&obs);
        let probs = vote_fuse(&g).unwrap();
        assert_eq!(prob_of(&probs, &"a"), 0.7);
        let sum: f64 = probs.iter().map(|(_, p)| p).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn vote_singleton_and_split() {
        let g = group(&[("a", "p0")]);
        assert_eq!(vote_fuse(&g).unwrap()[0].1, 1.0);
        let g = group(&[("a", "p0"), ("b", "p1")]);
        let probs = vote_fuse(&g).unwrap();
        assert_eq!(prob_of(&probs, &"a"), 0.5);
        assert_eq!(prob_of(&probs, &"b"), 0.5);
    }

    #[test]
    fn vote_empty_group_errors() {
        let g: G = ItemGroup::new(Vec::new());
        assert!(matches!(vote_fuse(&g), Err(Error::EmptyGroup)));
    }

    #[test]
    fn vote_count_examples() {
        let p = FusionParams::default();
        assert!((accu_vote_count(0.8, &p) - 400f64.ln()).abs() < 1e-12);
        let p1 = FusionParams {
            n_false: 1,
            ..FusionParams::default()
        };
        assert!(accu_vote_count(0.5, &p1).abs() < 1e-12);
        let clamped = accu_vote_count(1.0, &FusionParams::default());
        assert!((clamped - (100.0 * 0.9999 / 0.0001f64).ln()).abs() < 1e-12);
        assert!((clamped - 13.8155).abs() < 1e-4);
    }

    #[test]
    fn accu_singleton_default_is_exactly_the_default() {
        let g = group(&[("a", "p0")]);
        let probs = accu_fuse(&g, const_acc(0.8), &FusionParams::default()).unwrap();
        // 400 / (400 + 100) with N=100, A=0.8
        assert!((probs[0].1 - 0.8).abs() <= 1e-12);
    }

    #[test]
    fn accu_two_values_one_provenance_each() {
        let g = group(&[("a", "p0"), ("b", "p1")]);
        let probs = accu_fuse(&g, const_acc(0.8), &FusionParams::default()).unwrap();
        let expect = 400.0 / (400.0 + 400.0 + 99.0);
        assert!((prob_of(&probs, &"a") - expect).abs() <= 1e-12);
        assert!((expect - 0.44494).abs() < 1e-5);
    }

    #[test]
    fn accu_two_supporters() {
        let g = group(&[("a", "p0"), ("a", "p1")]);
        let probs = accu_fuse(&g, const_acc(0.8), &FusionParams::default()).unwrap();
        let expect = 160_000.0 / 160_100.0;
        assert!((probs[0].1 - expect).abs() <= 1e-12);
    }

    #[test]
    fn accu_missing_accuracy_errors() {
        let g = group(&[("a", "p0")]);
        let acc = |_: &&str| None;
        assert!(matches!(
            accu_fuse(&g, acc, &FusionParams::default()),
            Err(Error::MissingAccuracy(_))
        ));
    }

    #[test]
    fn accu_supporter_above_threshold_increases_probability() {
        let p = FusionParams::default();
        let base = group(&[("a", "p0"), ("b", "p1")]);
        let before = prob_of(&accu_fuse(&base, const_acc(0.8), &p).unwrap(), &"a");

        // a > 1/(N+1): strictly increases
        let neutral = 1.0 / (f64::from(p.n_false) + 1.0);
        let more = group(&[("a", "p0"), ("b", "p1"), ("a", "p2")]);
        let acc = |s: &&str| Some(if *s == "p2" { 0.5 } else { 0.8 });
        let after = prob_of(&accu_fuse(&more, acc, &p).unwrap(), &"a");
        assert!(after > before);

        // a == 1/(N+1): vote count zero, probability unchanged
        let acc_neutral = move |s: &&str| Some(if *s == "p2" { neutral } else { 0.8 });
        let same = prob_of(&accu_fuse(&more, acc_neutral, &p).unwrap(), &"a");
        assert!((same - before).abs() <= 1e-12);
    }

    #[test]
    fn popularity_counts_without_prior() {
        let g = group(&[("a", "p0"), ("a", "p1"), ("a", "p2"), ("b", "p3")]);
        let pop = popaccu_popularity(&g, None).unwrap();
        assert_eq!(prob_of(&pop, &"a"), 0.75);
        assert_eq!(prob_of(&pop, &"b"), 0.25);
    }

    #[test]
    fn popularity_with_prior_shifts_to_false_values() {
        let g = group(&[("a", "p0"), ("a", "p1"), ("a", "p2"), ("b", "p3")]);
        let prior = |v: &&str| Some(if *v == "a" { 1.0 } else { 0.0 });
        let pop = popaccu_popularity(&g, Some(&prior)).unwrap();
        assert_eq!(prob_of(&pop, &"a"), 0.0);
        assert_eq!(prob_of(&pop, &"b"), 1.0);
    }

    #[test]
    fn popularity_all_true_prior_falls_back_to_counts() {
        let g = group(&[("a", "p0"), ("a", "p1"), ("a", "p2"), ("b", "p3")]);
        let prior = |_: &&str| Some(1.0);
        let pop = popaccu_popularity(&g, Some(&prior)).unwrap();
        assert_eq!(prob_of(&pop, &"a"), 0.75);
    }

    #[test]
    fn popaccu_singleton_default() {
        let g = group(&[("a", "p0")]);
        let pop = popaccu_popularity(&g, None).unwrap();
        let probs = popaccu_fuse(&g, const_acc(0.8), &pop, &FusionParams::default()).unwrap();
        // ln 0.8 vs ln(0.2 * 1.0): posterior 0.8 / (0.8 + 0.2)
        assert!((probs[0].1 - 0.8).abs() <= 1e-12);
    }

    #[test]
    fn popaccu_symmetry() {
        let g = group(&[("a", "p0"), ("b", "p1")]);
        let pop = popaccu_popularity(&g, None).unwrap();
        let probs = popaccu_fuse(&g, const_acc(0.8), &pop, &FusionParams::default()).unwrap();
        assert!((prob_of(&probs, &"a") - prob_of(&probs, &"b")).abs() <= 1e-15);
        let sum: f64 = probs.iter().map(|(_, p)| p).sum();
        assert!(sum <= 1.0 + 1e-9);
    }

    #[test]
    fn provenance_accuracy_examples() {
        let p = FusionParams::default();
        let mean = provenance_accuracy(&[0.9, 0.7, 0.8], &p).unwrap();
        assert!((mean - 0.8).abs() <= 1e-12);
        assert_eq!(provenance_accuracy(&[1.0], &p), Some(0.9999));
        assert_eq!(provenance_accuracy(&[0.0, 1.0], &p), Some(0.5));
        assert_eq!(provenance_accuracy(&[], &p), None);
    }

    #[test]
    fn oracle_rejects_oversized_instances() {
        let obs: Vec<(String, String)> = (0..17).map(|i| (format!("v{i}"), "p".into())).collect();
        let g = ItemGroup::new(obs);
        let acc = |_: &String| Some(0.8);
        assert!(matches!(
            oracle_fuse(&g, acc, &FusionParams::default(), OracleModel::Accu),
            Err(Error::OracleLimit(_))
        ));
    }

    #[test]
    fn oracle_matches_hand_cases() {
        let g = group(&[("a", "p0")]);
        let probs = oracle_fuse(&g, const_acc(0.8), &FusionParams::default(), OracleModel::Accu)
            .unwrap();
        assert!((probs[0].1 - 0.8).abs() <= 1e-12);

        let g = group(&[("a", "p0"), ("b", "p1")]);
        let probs = oracle_fuse(&g, const_acc(0.8), &FusionParams::default(), OracleModel::Accu)
            .unwrap();
        assert!((prob_of(&probs, &"a") - prob_of(&probs, &"b")).abs() <= 1e-15);
    }

    fn random_instance(
        n_values: usize,
        n_provs: usize,
        seed: u64,
    ) -> (ItemGroup<String, String>, BTreeMap<String, f64>) {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut obs = Vec::new();
        let mut accs = BTreeMap::new();
        for s in 0..n_provs {
            let prov = format!("p{s}");
            accs.insert(prov.clone(), rng.random_range(0.05..=0.95));
            let v = rng.random_range(0..n_values);
            obs.push((format!("v{v}"), prov));
        }
        (ItemGroup::new(obs), accs)
    }

    proptest! {
        #[test]
        fn accu_matches_oracle(seed in 0u64..500, n_values in 1usize..5, n_provs in 1usize..8) {
            let (g, accs) = random_instance(n_values, n_provs, seed);
            let acc = |s: &String| accs.get(s).copied();
            let p = FusionParams::default();
            let fast = accu_fuse(&g, acc, &p).unwrap();
            let slow = oracle_fuse(&g, acc, &p, OracleModel::Accu).unwrap();
            for ((v1, p1), (v2, p2)) in fast.iter().zip(&slow) {
                prop_assert_eq!(v1, v2);
                prop_assert!((p1 - p2).abs() <= 1e-9);
            }
        }

        #[test]
        fn popaccu_matches_oracle(seed in 0u64..500, n_values in 1usize..5, n_provs in 1usize..8) {
            let (g, accs) = random_instance(n_values, n_provs, seed);
            let acc = |s: &String| accs.get(s).copied();
            let p = FusionParams::default();
            let pop = popaccu_popularity(&g, None).unwrap();
            let fast = popaccu_fuse(&g, acc, &pop, &p).unwrap();
            let slow = oracle_fuse(&g, acc, &p, OracleModel::PopAccu { popularity: &pop }).unwrap();
            for ((v1, p1), (v2, p2)) in fast.iter().zip(&slow) {
                prop_assert_eq!(v1, v2);
                prop_assert!((p1 - p2).abs() <= 1e-9);
            }
        }

        // Reordering observations never changes any probability.
        #[test]
        fn permutation_invariance(seed in 0u64..200, rot in 0usize..8) {
            let (g, accs) = random_instance(4, 7, seed);
            let mut obs = g.observations().to_vec();
            let rot = rot % obs.len().max(1);
            obs.rotate_left(rot);
            let g2 = ItemGroup::new(obs);
            let acc = |s: &String| accs.get(s).copied();
            let p = FusionParams::default();
            let a = accu_fuse(&g, acc, &p).unwrap();
            let b = accu_fuse(&g2, acc, &p).unwrap();
            prop_assert_eq!(a, b);
            let va = vote_fuse(&g).unwrap();
            let vb = vote_fuse(&g2).unwrap();
            prop_assert_eq!(va, vb);
        }

        // Vote sums to exactly one; accu/popaccu leave nonnegative rest mass;
        // probabilities stay in [0, 1] even with extreme accuracies.
        #[test]
        fn probability_mass_invariants(seed in 0u64..200, extreme in proptest::bool::ANY) {
            let (g, accs) = random_instance(4, 8, seed);
            let acc = |s: &String| {
                accs.get(s).map(|a| if extreme { if *a > 0.5 { 1.0 } else { 0.0 } } else { *a })
            };
            let p = FusionParams::default();
            let vote: f64 = vote_fuse(&g).unwrap().iter().map(|(_, x)| x).sum();
            prop_assert!((vote - 1.0).abs() <= 1e-12);
            let accu = accu_fuse(&g, acc, &p).unwrap();
            let accu_sum: f64 = accu.iter().map(|(_, x)| x).sum();
            prop_assert!(accu_sum <= 1.0 + 1e-9);
            for (_, x) in &accu {
                prop_assert!((0.0..=1.0).contains(x));
            }
            let pop = popaccu_popularity(&g, None).unwrap();
            let pa = popaccu_fuse(&g, acc, &pop, &p).unwrap();
            let pa_sum: f64 = pa.iter().map(|(_, x)| x).sum();
            prop_assert!(pa_sum <= 1.0 + 1e-9);
            for (_, x) in &pa {
                prop_assert!((0.0..=1.0).contains(x));
            }
        }
    }
}
