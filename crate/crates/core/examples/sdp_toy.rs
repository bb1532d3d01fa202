//! Two small SDPs with known optima.

use nalgebra::{DMatrix, DVector};
use shadowrdm::sdp::{solve_sdp, BlockKind, SdpProblem, SolverOptions, Term};

fn main() -> shadowrdm::Result<()> {
    let opts = SolverOptions { tol_primal: 1e-10, tol_dual: 1e-10, tol_gap: 1e-10, ..Default::default() };

    // min X_00 subject to tr X = 1, X ⪰ 0: optimum 0 at X = diag(0, 1).
    let mut p = SdpProblem::new();
    let b = p.add_block("X", 2, BlockKind::Psd);
    p.objective.push(Term::new(b, 0, 0, 1.0));
    p.add_equality(vec![Term::new(b, 0, 0, 1.0), Term::new(b, 1, 1, 1.0)], 1.0);
    let s = solve_sdp(&p, &opts)?;
    println!("min X00:          {:+.3e} after {} iterations ({})", s.objective_value, s.iterations, s.status);

    // Smallest eigenvalue of a symmetric C as min tr(CX) subject to tr X = 1.
    let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
    let mut p = SdpProblem::new();
    let b = p.add_block("X", 3, BlockKind::Psd);
    p.add_objective_matrix(b, &c);
    p.add_equality((0..3).map(|i| Term::new(b, i, i, 1.0)).collect(), 1.0);
    let s = solve_sdp(&p, &opts)?;
    let lambda = c.symmetric_eigen().eigenvalues.min();
    println!("min eig via SDP:  {:.10} (exact {lambda:.10})", s.objective_value);

    // A bounded nonnegative vector: min -x0 - x1 with x0 + x1 in [0, 3].
    let mut p = SdpProblem::new();
    let b = p.add_block("x", 2, BlockKind::NonnegativeDiagonal);
    p.add_objective_matrix(b, &DMatrix::from_diagonal(&DVector::from_element(2, -1.0)));
    p.add_interval(vec![Term::new(b, 0, 0, 1.0), Term::new(b, 1, 1, 1.0)], 0.0, 3.0)?;
    let s = solve_sdp(&p, &opts)?;
    println!("bounded LP:       {:.10} (exact -3)", s.objective_value);
    Ok(())
}
