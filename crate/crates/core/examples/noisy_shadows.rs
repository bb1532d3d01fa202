//! Gaussian-noised shadows enforced as intervals of half-width epsilon.

use shadowrdm::experiments::{run_with_reference, Reference, ScenarioConfig};

fn main() -> shadowrdm::Result<()> {
    let reference = Reference::from_key("h4@1.0")?;
    for sigma in [1e-3, 1e-4] {
        let cfg = ScenarioConfig {
            shadow_counts: vec![15],
            seeds: vec![1, 2],
            sigma,
            ..ScenarioConfig::default()
        };
        for r in run_with_reference(&reference, &cfg)? {
            println!(
                "sigma = {sigma:.0e} seed {}: dE = {:+.3e}  2-RDM error = {:.3e}  {} after {} iters",
                r.seed, r.energy_error, r.rdm_error, r.status, r.iterations
            );
        }
    }
    Ok(())
}
