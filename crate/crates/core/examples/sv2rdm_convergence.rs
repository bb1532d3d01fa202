//! Shadow-constrained v2RDM on H4: error against the number of shadows.
//!
//! `cargo run --release --example sv2rdm_convergence -- 3` averages over 3 seeds.

use shadowrdm::experiments::{run_with_reference, Reference, ScenarioConfig};
use shadowrdm::v2rdm::ConditionSet;

fn main() -> shadowrdm::Result<()> {
    let n_seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let reference = Reference::from_key("h4@1.0")?;
    let counts = vec![0, 1, 3, 5, 9];
    for cond in [ConditionSet::D, ConditionSet::DQG] {
        let cfg = ScenarioConfig {
            conditions: cond,
            shadow_counts: counts.clone(),
            seeds: (1..=n_seeds).collect(),
            ..ScenarioConfig::default()
        };
        let rows = run_with_reference(&reference, &cfg)?;
        for &m in &counts {
            let sel: Vec<_> = rows.iter().filter(|r| r.m == m).collect();
            let n = sel.len() as f64;
            let de = sel.iter().map(|r| r.energy_error.abs()).sum::<f64>() / n;
            let err = sel.iter().map(|r| r.rdm_error).sum::<f64>() / n;
            println!("{:>3} m = {m:>2}: mean |dE| = {de:.3e}  mean 2-RDM error = {err:.3e}", cond.to_string());
        }
    }
    Ok(())
}
