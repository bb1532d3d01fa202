//! H2 dissociation curve: FCI, v2RDM and shadow-constrained v2RDM per bond length.

use shadowrdm::experiments::{pes_scan, ScenarioConfig};

fn main() -> shadowrdm::Result<()> {
    let cfg = ScenarioConfig { shadow_counts: vec![2], seeds: vec![1], ..ScenarioConfig::default() };
    let geoms = [0.5, 0.6, 0.7, 0.7414, 0.9, 1.2, 1.6, 2.0, 2.5];
    println!("{:>7} {:>14} {:>11} {:>11}", "R (A)", "E_FCI", "v2RDM", "sv2RDM");
    for p in pes_scan("h2", &geoms, &cfg)? {
        println!(
            "{:>7.4} {:>14.8} {:>+11.2e} {:>+11.2e}",
            p.geometry,
            p.e_fci,
            p.v2rdm.energy - p.e_fci,
            p.sv2rdm[0].energy - p.e_fci
        );
    }
    Ok(())
}
