//! Exact ground state of small Hubbard chains, compared with the dimer's closed form.

use shadowrdm::fci::{compute_2rdm, contract_to_1rdm, solve_fci};
use shadowrdm::hamiltonians::hubbard_chain;

fn main() -> shadowrdm::Result<()> {
    let exact_dimer = (4.0 - 32f64.sqrt()) / 2.0;
    for (sites, periodic) in [(2, false), (3, false), (4, false), (4, true)] {
        let ints = hubbard_chain(sites, 1.0, 4.0, periodic)?;
        let (na, nb) = ints.electron_split()?;
        let sol = solve_fci(&ints, na, nb)?;
        let d2 = compute_2rdm(&sol)?;
        let d1 = contract_to_1rdm(&d2, na + nb)?;
        println!(
            "{sites} sites{}: {} determinants, E = {:.10}, tr(1-RDM) = {:.6}",
            if periodic { " (pbc)" } else { "" },
            sol.basis.len(),
            sol.energy,
            d1.trace()
        );
    }
    println!("dimer closed form: {exact_dimer:.10}");
    Ok(())
}
