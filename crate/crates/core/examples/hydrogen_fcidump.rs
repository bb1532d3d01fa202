//! STO-3G hydrogen chain integrals, written to FCIDUMP and read back.

use shadowrdm::fci::solve_fci;
use shadowrdm::hamiltonians::{hydrogen_chain_sto3g, parse_fcidump, write_fcidump};

fn main() -> shadowrdm::Result<()> {
    let ints = hydrogen_chain_sto3g(4, 1.0)?;
    let text = write_fcidump(&ints);
    let back = parse_fcidump(&text)?;

    let e = solve_fci(&ints, 2, 2)?.energy;
    let e_back = solve_fci(&back, 2, 2)?.energy;
    println!("H4 at 1.0 A: {} spatial orbitals, e_nuc = {:.10}", ints.n_spatial(), ints.e_nuc());
    println!("FCI from integrals: {e:.12}");
    println!("FCI after FCIDUMP:  {e_back:.12}  (diff {:.1e})", (e - e_back).abs());
    println!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
