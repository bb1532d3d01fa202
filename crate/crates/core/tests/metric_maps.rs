mod common;

use common::*;
use nalgebra::DMatrix;
use shadowrdm::fci::{compute_2rdm, contract_to_1rdm, solve_fci};
use shadowrdm::hamiltonians::{hubbard_chain, hydrogen_chain_sto3g, reduced_hamiltonian, MolecularIntegrals};
use shadowrdm::numerics::RngStream;
use shadowrdm::rdm::TwoRdm;
use shadowrdm::sdp::SdpProblem;
use shadowrdm::shadows::{add_gaussian_noise, sample_shadow_ensemble, SpinRotationMode};
use shadowrdm::v2rdm::{build_sdp, constraint_count, map_d_to_g, map_d_to_q, ConditionSet};

fn systems() -> Vec<(&'static str, MolecularIntegrals)> {
    vec![
        ("h2", hydrogen_chain_sto3g(2, 0.7414).unwrap()),
        ("h3", hydrogen_chain_sto3g(3, 1.0).unwrap()),
        ("h4", hydrogen_chain_sto3g(4, 1.0).unwrap()),
        ("hub3", hubbard_chain(3, 1.0, 4.0, false).unwrap()),
        ("hub4", hubbard_chain(4, 1.0, 4.0, true).unwrap()),
    ]
}

#[test]
fn q_and_g_match_operator_evaluation() {
    for (name, ints) in systems() {
        let (na, nb) = ints.electron_split().unwrap();
        let sol = solve_fci(&ints, na, nb).unwrap();
        let psi = state_of(&sol);
        let r = ints.n_spin();
        let d2 = compute_2rdm(&sol).unwrap();
        let d1 = contract_to_1rdm(&d2, na + nb).unwrap();
        let q = map_d_to_q(&d2, &d1).unwrap();
        let g = map_d_to_g(&d2, &d1).unwrap();
        let q_err = (&q - direct_q(&psi, r)).abs().max();
        let g_err = (&g - direct_g(&psi, r)).abs().max();
        assert!(q_err <= 1e-10, "{name}: Q error {q_err}");
        assert!(g_err <= 1e-10, "{name}: G error {g_err}");
        assert!(min_eig(&q) >= -1e-10, "{name}");
        assert!(min_eig(&g) >= -1e-10, "{name}");
    }
}

#[test]
fn g_of_a_single_determinant() {
    // Aufbau determinant of H2 as a CI vector with one nonzero entry.
    let ints = hydrogen_chain_sto3g(2, 0.7414).unwrap();
    let mut sol = solve_fci(&ints, 1, 1).unwrap();
    sol.ci.fill(0.0);
    sol.ci[0] = 1.0;
    let psi = state_of(&sol);
    let d2 = compute_2rdm(&sol).unwrap();
    let d1 = contract_to_1rdm(&d2, 2).unwrap();
    let g = map_d_to_g(&d2, &d1).unwrap();
    assert!((&g - direct_g(&psi, 4)).abs().max() <= 1e-12);
    assert!(min_eig(&g) >= -1e-10);
}

fn blocks_for(d2: &TwoRdm, conditions: ConditionSet) -> Vec<DMatrix<f64>> {
    let n = d2.implied_electrons().round() as usize;
    let d1 = contract_to_1rdm(d2, n).unwrap();
    let mut blocks = vec![d2.matrix().clone()];
    if conditions.q {
        blocks.push(map_d_to_q(d2, &d1).unwrap());
    }
    if conditions.g {
        blocks.push(map_d_to_g(d2, &d1).unwrap());
    }
    blocks
}

fn check_feasible(prob: &SdpProblem, blocks: &[DMatrix<f64>], tol: f64) {
    let v = prob.max_violation(blocks);
    assert!(v <= tol, "violation {v}");
}

#[test]
fn fci_point_satisfies_every_built_constraint() {
    for (name, ints) in systems() {
        let (na, nb) = ints.electron_split().unwrap();
        let n = na + nb;
        let sol = solve_fci(&ints, na, nb).unwrap();
        let d2 = compute_2rdm(&sol).unwrap();
        let k2 = reduced_hamiltonian(&ints, n).unwrap();
        let shadows =
            sample_shadow_ensemble(&d2, 3, SpinRotationMode::FullSpinOrbital, &mut RngStream::new(7)).unwrap();
        for cond in [ConditionSet::D, ConditionSet::DQ, ConditionSet::DQG] {
            let prob = build_sdp(&k2, cond, &shadows).unwrap();
            assert_eq!(prob.n_constraints(), constraint_count(ints.n_spin(), cond, 3), "{name}");
            let blocks = blocks_for(&d2, cond);
            check_feasible(&prob, &blocks, 1e-10);
            let e = prob.objective_value(&blocks) + k2.e_nuc();
            assert!((e - sol.energy).abs() <= 1e-10, "{name}");
        }
    }
}

#[test]
fn noisy_shadows_become_intervals() {
    let ints = hydrogen_chain_sto3g(2, 0.7414).unwrap();
    let sol = solve_fci(&ints, 1, 1).unwrap();
    let d2 = compute_2rdm(&sol).unwrap();
    let k2 = reduced_hamiltonian(&ints, 2).unwrap();
    let mut rng = RngStream::new(1);
    let clean = sample_shadow_ensemble(&d2, 2, SpinRotationMode::SpatialReplicated, &mut rng).unwrap();
    let noisy: Vec<_> = clean
        .iter()
        .map(|s| add_gaussian_noise(s, 1e-3, &mut rng).unwrap())
        .collect();
    let prob = build_sdp(&k2, ConditionSet::DQG, &noisy).unwrap();
    assert_eq!(prob.intervals.len(), 12);
    assert_eq!(prob.equalities.len(), constraint_count(4, ConditionSet::DQG, 0));
    // ε = σ; the exact point survives when every deviation is below σ.
    let within = noisy
        .iter()
        .zip(&clean)
        .all(|(n, c)| n.values.iter().zip(&c.values).all(|(a, b)| (a - b).abs() <= 1e-3));
    if within {
        check_feasible(&prob, &blocks_for(&d2, ConditionSet::DQG), 1e-10);
    }
    let minimal = build_sdp(&k2, ConditionSet::D, &[]).unwrap();
    assert_eq!(minimal.blocks.len(), 1);
    assert_eq!(minimal.n_constraints(), 1);
}
