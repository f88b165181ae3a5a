//! Shared fixtures for the criterion benches.

use scalemetrics_core::metrics::ProductionMeasure;
use scalemetrics_core::simulate::{sample_pareto, simulate_zipf_growth, ZipfGrowthConfig};
use scalemetrics_core::tails::ContributionDistribution;
use scalemetrics_core::ProjectHistory;

pub fn pareto_contributions(mu: f64, n: usize, seed: u64) -> ContributionDistribution {
    let values = sample_pareto(mu, 1.0, n, seed).expect("valid Pareto parameters");
    ContributionDistribution::new(values, ProductionMeasure::Commits).expect("positive sample")
}

pub fn growth_history() -> ProjectHistory {
    simulate_zipf_growth(&ZipfGrowthConfig::default())
        .expect("default config is valid")
        .history
}

/// A source-like text of about `len` bytes and a lightly edited copy.
pub fn edited_pair(len: usize) -> (String, String) {
    let line = "let value = compute(input, offset) + 1;\n";
    let a: String = line.repeat(len / line.len() + 1)[..len].to_string();
    let mut b = a.clone();
    let step = (len / 8).max(1);
    for i in (0..len).step_by(step).rev() {
        b.replace_range(i..i + 1, "#");
    }
    b.insert_str(len / 2, "inserted();\n");
    (a, b)
}
