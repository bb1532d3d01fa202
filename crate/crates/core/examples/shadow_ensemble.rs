//! Sample rotated-basis shadows of an FCI 2-RDM and round-trip them through JSON.

use shadowrdm::experiments::Reference;
use shadowrdm::numerics::RngStream;
use shadowrdm::shadows::{sample_shadow_ensemble, shadow_constraint_rows, ShadowEnsemble, SpinRotationMode};

fn main() -> shadowrdm::Result<()> {
    let reference = Reference::from_key("h2@0.7414")?;
    let mode = SpinRotationMode::SpatialReplicated;
    let shadows = sample_shadow_ensemble(&reference.d2, 3, mode, &mut RngStream::new(11))?;

    for (k, s) in shadows.iter().enumerate() {
        let rows = shadow_constraint_rows(&s.u);
        let worst = rows
            .iter()
            .zip(&s.values)
            .map(|(r, v)| (r.evaluate(&reference.d2) - v).abs())
            .fold(0.0, f64::max);
        println!("shadow {k}: total = {:.10}, max row residual = {worst:.1e}", s.total());
    }

    let ens = ShadowEnsemble { seed: 11, mode, sigma: 0.0, shadows };
    let json = ens.to_json()?;
    let back = ShadowEnsemble::from_json(&json)?;
    println!("JSON: {} bytes, round trip exact: {}", json.len(), back.shadows == ens.shadows);
    Ok(())
}
