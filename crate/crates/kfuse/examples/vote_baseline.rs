//! The Vote baseline: a value's probability is its share of the data item's
//! provenances. Shows why plain counting misjudges small-support items.
//!
//! Run: cargo run --example vote_baseline

use kfuse::fusion::{vote_fuse, ItemGroup};

fn show(name: &str, obs: Vec<(&'static str, &'static str)>) {
    let group = ItemGroup::new(obs);
    let probs = vote_fuse(&group).unwrap();
    let rendered: Vec<String> = probs
        .iter()
        .map(|(v, p)| format!("{v}={p:.3}"))
        .collect();
    println!("{name:28} -> {}", rendered.join("  "));
}

fn main() {
    // One value extracted from 7 provenances, three competitors with one each.
    // Vote says 0.7 even though the first value is almost certainly right.
    show(
        "7-of-10 support",
        vec![
            ("1962-07-03", "DOM1 | wiki.org/tc"),
            ("1962-07-03", "DOM1 | bio.com/tc"),
            ("1962-07-03", "TXT1 | wiki.org/tc"),
            ("1962-07-03", "TXT1 | news.net/a"),
            ("1962-07-03", "TBL1 | tables.org/1"),
            ("1962-07-03", "ANO1 | fan.site/tc"),
            ("1962-07-03", "DOM2 | wiki.org/tc"),
            ("1962-07-30", "TXT2 | blog.me/x"),
            ("1962-03-07", "DOM3 | scrape.io/9"),
            ("1926-07-03", "TXT3 | old.org/z"),
        ],
    );

    // Singleton and two-way conflicts: Vote can only answer 1.0 or 0.5,
    // which is exactly where single-pass counting is least trustworthy.
    show("singleton", vec![("acme corp", "TXT1 | a.com/1")]);
    show(
        "two-way split",
        vec![("blue", "DOM1 | x.org/1"), ("green", "DOM2 | y.org/2")],
    );

    let group = ItemGroup::new(vec![
        ("a", "p1"),
        ("a", "p2"),
        ("a", "p3"),
        ("b", "p4"),
    ]);
    let total: f64 = vote_fuse(&group).unwrap().iter().map(|(_, p)| p).sum();
    println!("\nper-item probabilities always sum to 1 (here: {total})");
}
