use proptest::prelude::*;

use rdsim::harness::RngStream;
use rdsim::numeric::{hermitian_eigensystem, OperatorMatrix};
use rdsim::spinchain::{
    build_heisenberg, commutator_norm, global_unitary, ground_space, sensitivity_scan, su2_rotation, u_phi, u_pi, Boundary,
    ChainSpec,
};

fn all_specs(max_sites: usize) -> Vec<ChainSpec> {
    let mut out = Vec::new();
    for n in 2..=max_sites {
        for sign in [1, -1] {
            for boundary in [Boundary::Open, Boundary::Periodic] {
                out.push(ChainSpec::new(n, sign, boundary).unwrap());
            }
        }
    }
    out
}

#[test]
fn two_site_spectrum_from_minimal_polynomial() {
    // σ⃗₁·σ⃗₂ = 2·SWAP − 1 satisfies (H + 3)(H − 1) = 0 with trace 0,
    // so the eigenvalues are −3 once and 1 three times.
    let h = build_heisenberg(&ChainSpec::antiferromagnetic(2, Boundary::Open).unwrap()).unwrap();
    let id = OperatorMatrix::identity(4);
    let p = h.add(&id.scale_real(3.0)).unwrap().matmul(&h.sub(&id).unwrap()).unwrap();
    assert_eq!(p.max_abs(), 0.0);
    assert_eq!(h.trace().re, 0.0);
    let es = hermitian_eigensystem(&h).unwrap();
    let expected = [-3.0, 1.0, 1.0, 1.0];
    for (got, want) in es.eigenvalues.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn spin_flip_commutes_with_every_chain() {
    for spec in all_specs(8) {
        let h = build_heisenberg(&spec).unwrap();
        let flip = global_unitary(&u_pi(), spec.n_sites()).unwrap();
        assert!(commutator_norm(&h, &flip).unwrap() < 1e-10, "{spec:?}");
    }
}

#[test]
fn random_su2_rotations_commute_with_small_chains() {
    let mut rng = RngStream::new(99, 0);
    for spec in all_specs(5) {
        let h = build_heisenberg(&spec).unwrap();
        for _ in 0..10 {
            let a = [rng.standard_normal(), rng.standard_normal(), rng.standard_normal()];
            let u = global_unitary(&su2_rotation(a), spec.n_sites()).unwrap();
            assert!(commutator_norm(&h, &u).unwrap() < 1e-10, "{spec:?} {a:?}");
        }
    }
}

#[test]
fn phase_rotations_commute() {
    let spec = ChainSpec::antiferromagnetic(6, Boundary::Periodic).unwrap();
    let h = build_heisenberg(&spec).unwrap();
    for phi in [0.1, 1.0, std::f64::consts::PI] {
        let u = global_unitary(&u_phi(phi), 6).unwrap();
        assert!(commutator_norm(&h, &u).unwrap() < 1e-10);
    }
}

#[test]
fn commutator_norm_of_paulis() {
    let n = commutator_norm(&OperatorMatrix::pauli_z(), &OperatorMatrix::pauli_x()).unwrap();
    assert!((n - 2.0).abs() < 1e-15);
    assert!(commutator_norm(&OperatorMatrix::identity(2), &OperatorMatrix::identity(4)).is_err());
}

#[test]
fn open_ferromagnet_ground_energy_is_extensive() {
    // each bond of the polarized state has σ⃗·σ⃗ = +1, so E₀ = −(N − 1)
    for n in 2..=6 {
        let h = build_heisenberg(&ChainSpec::ferromagnetic(n, Boundary::Open).unwrap()).unwrap();
        let gs = ground_space(&h, 1e-9).unwrap();
        assert!((gs.energy + (n as f64 - 1.0)).abs() < 1e-10, "N={n}: {}", gs.energy);
        // spin-N/2 multiplet
        assert_eq!(gs.degeneracy, n + 1);
    }
}

#[test]
fn ground_states_have_ground_energy() {
    let h = build_heisenberg(&ChainSpec::ferromagnetic(4, Boundary::Periodic).unwrap()).unwrap();
    let gs = ground_space(&h, 1e-9).unwrap();
    for s in &gs.states {
        let e = h.expectation(s).unwrap().re;
        assert!((e - gs.energy).abs() < gs.tol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn magnetization_is_odd_in_the_field(h in 1e-7f64..2.0, sites in 2usize..=6, periodic in any::<bool>()) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let spec = ChainSpec::ferromagnetic(sites, boundary).unwrap();
        let scan = sensitivity_scan(&spec, &[h, -h]).unwrap();
        let (up, down) = (scan[0].order_parameter.unwrap(), scan[1].order_parameter.unwrap());
        prop_assert!((up + down).abs() < 1e-9);
        prop_assert!(up > 0.0);
    }
}

#[test]
fn sensitivity_grid_for_four_sites() {
    let spec = ChainSpec::ferromagnetic(4, Boundary::Open).unwrap();
    let fields = [-1e-2, -1e-4, -1e-6, 0.0, 1e-6, 1e-4, 1e-2];
    let scan = sensitivity_scan(&spec, &fields).unwrap();
    for p in &scan {
        match p.order_parameter {
            Some(m) => assert!((m - p.h.signum()).abs() < 1e-9, "{p:?}"),
            None => assert_eq!(p.h, 0.0),
        }
    }
}
