//! Lower bounds from D, DQ and DQG positivity on H4, against FCI.

use shadowrdm::experiments::Reference;
use shadowrdm::sdp::SolverOptions;
use shadowrdm::v2rdm::{frobenius_error, v2rdm, ConditionSet};

fn main() -> shadowrdm::Result<()> {
    let reference = Reference::from_key("h4@1.0")?;
    println!("E_FCI = {:.8}", reference.e_fci);
    for cond in [ConditionSet::D, ConditionSet::DQ, ConditionSet::DQG] {
        let r = v2rdm(&reference.k2, cond, &SolverOptions::default())?;
        println!(
            "{:>3}: E = {:.8}  E - E_FCI = {:+.3e}  |D - D_FCI| = {:.3e}  {} iters, {:.2}s",
            cond.to_string(),
            r.energy,
            r.energy - reference.e_fci,
            frobenius_error(&r.d2, &reference.d2)?,
            r.solution.iterations,
            r.solution.wall_time
        );
    }
    Ok(())
}
