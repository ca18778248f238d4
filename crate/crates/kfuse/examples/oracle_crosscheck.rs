//! Cross-check the log-space estimators against brute-force posterior
//! enumeration on random small instances.
//!
//! Run: cargo run --example oracle_crosscheck

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kfuse::fusion::{
    accu_fuse, oracle_fuse, popaccu_fuse, popaccu_popularity, FusionParams, ItemGroup,
    OracleModel,
};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = FusionParams::default();
    let mut max_accu = 0.0f64;
    let mut max_popaccu = 0.0f64;
    for _ in 0..2000 {
        let n_values = rng.random_range(1..=5usize);
        let n_provs = rng.random_range(1..=8usize);
        let mut obs = Vec::new();
        let mut accs = BTreeMap::new();
        for s in 0..n_provs {
            let prov = format!("p{s}");
            accs.insert(prov.clone(), rng.random_range(0.05..=0.95));
            obs.push((format!("v{}", rng.random_range(0..n_values)), prov));
        }
        let group = ItemGroup::new(obs);
        let acc = |s: &String| accs.get(s).copied();

        let fast = accu_fuse(&group, acc, &params).unwrap();
        let slow = oracle_fuse(&group, acc, &params, OracleModel::Accu).unwrap();
        for ((_, a), (_, b)) in fast.iter().zip(&slow) {
            max_accu = max_accu.max((a - b).abs());
        }

        let pop = popaccu_popularity(&group, None).unwrap();
        let fast = popaccu_fuse(&group, acc, &pop, &params).unwrap();
        let slow =
            oracle_fuse(&group, acc, &params, OracleModel::PopAccu { popularity: &pop }).unwrap();
        for ((_, a), (_, b)) in fast.iter().zip(&slow) {
            max_popaccu = max_popaccu.max((a - b).abs());
        }
    }
    println!("2000 random instances (<=5 values, <=8 provenances):");
    println!("  max |accu - oracle|    = {max_accu:.3e}");
    println!("  max |popaccu - oracle| = {max_popaccu:.3e}");

    // one instance by hand: the singleton default case
    let group: ItemGroup<&str, &str> = ItemGroup::new(vec![("v", "p")]);
    let p = accu_fuse(&group, |_| Some(0.8), &params).unwrap()[0].1;
    println!("\nsingleton with default accuracy 0.8 and N=100:");
    println!("  400 / (400 + 100) = {p:.6} (the default accuracy carries through)");
}
