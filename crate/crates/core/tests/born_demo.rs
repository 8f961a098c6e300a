use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use rdsim::born::{
    born_probability, demo_model, equal_amplitude_theorem, fine_grain, outcome_counts, DemoModel, DemoSpec,
};
use rdsim::harness::RngStream;
use rdsim::numeric::StateVector;

fn shipped(n: usize) -> &'static DemoModel {
    static MODELS: [OnceLock<DemoModel>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    MODELS[n - 2].get_or_init(|| demo_model(&DemoSpec::shipped(n, 42).unwrap()).unwrap())
}

#[test]
fn basis_inputs_read_their_own_label_for_every_member() {
    for n in [2, 3, 4] {
        let demo = shipped(n);
        for k in 0..n {
            let psi = StateVector::basis(n, k).unwrap();
            let outcomes = demo.outcomes(&psi).unwrap();
            assert!(outcomes.iter().all(|&o| o == Some(k)), "n={n} k={k}");
            // labels never produced count zero
            let c = demo.counts(&psi).unwrap();
            assert!((0..n).filter(|&j| j != k).all(|j| c.count(j) == 0));
        }
    }
}

#[test]
fn equal_amplitudes_split_the_ensemble_evenly() {
    for n in [2, 3, 4] {
        let demo = shipped(n);
        let size = demo.ensemble().len() as u64;
        let theorem = equal_amplitude_theorem(n).unwrap();
        for phases in [None, Some(vec![0.3, -1.2, 2.2, 0.9])] {
            let psi = demo.equal_amplitude_state(phases.as_deref()).unwrap();
            let c = demo.counts(&psi).unwrap();
            assert_eq!(c.unresolved(), 0);
            for j in 0..n {
                assert_eq!(c.count(j) * n as u64, size, "n={n}");
                assert_eq!(c.proportion(j), theorem[j]);
            }
        }
    }
}

#[test]
fn two_label_model_gives_thirty_two_each() {
    let demo = shipped(2);
    assert_eq!(demo.ensemble().len(), 64);
    let c = demo.counts(&demo.equal_amplitude_state(None).unwrap()).unwrap();
    assert_eq!(c.counts(), &[32, 32]);
}

#[test]
fn ensemble_is_closed_under_declared_symmetries() {
    for n in [2, 3, 4] {
        let demo = shipped(n);
        for d in demo.ensemble().declared_symmetries() {
            let r = demo.ensemble().closure(&d.name, &d.u_rest).unwrap();
            assert!(r.is_permutation, "{}", d.name);
        }
    }
}

#[test]
fn p1_holds_for_the_derivation_phase() {
    let demo = shipped(2);
    let (alpha, beta) = (Complex64::from_polar(0.6, 0.4), Complex64::from_polar(0.8, -1.3));
    let psi = StateVector::from_amplitudes(vec![alpha, beta]).unwrap();
    let phi = 2.0 * (alpha.conj() * beta).arg();
    let report = demo.check_p1(&psi, &[0.0, phi, std::f64::consts::PI]).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn p2_swaps_amplitudes_and_labels() {
    let demo = shipped(2);
    let a = StateVector::basis(2, 0).unwrap();
    let b = StateVector::basis(2, 1).unwrap();
    assert!(demo.check_p2(&a).unwrap().pass);
    assert_eq!(demo.counts(&a).unwrap().count(0), demo.counts(&b).unwrap().count(1));

    let r = 0.5f64.sqrt();
    let psi = StateVector::from_amplitudes(vec![Complex64::new(r, 0.0), Complex64::from_polar(r, 0.8)]).unwrap();
    assert!(demo.check_p2(&psi).unwrap().pass);
    let swapped = StateVector::from_amplitudes(vec![psi.amplitudes()[1], psi.amplitudes()[0]]).unwrap();
    let (c, cs) = (demo.counts(&psi).unwrap(), demo.counts(&swapped).unwrap());
    assert_eq!((c.count(0), c.count(1)), (cs.count(1), cs.count(0)));

    for state in demo.test_states(12).unwrap() {
        assert!(demo.check_p2(&state).unwrap().pass);
    }
}

#[test]
fn symmetry_rule_holds_on_every_shipped_model() {
    for n in [2, 3, 4] {
        let demo = shipped(n);
        let tests = demo.test_states(20).unwrap();
        for sym in demo.standard_symmetries() {
            let report = demo.verify_symmetry_rule(&sym, &tests).unwrap();
            assert!(report.pass, "n={n} {}: {:?}", sym.name, report.violations);
            assert_eq!(report.rows.len(), 20);
        }
    }
}

#[test]
fn branch_linearity_matches_direct_evolution() {
    let demo = shipped(2);
    let model = demo.model();
    let psi = StateVector::from_amplitudes(vec![Complex64::new(0.3, 0.4), Complex64::new(0.0, -0.866_025_403_784_438_6)])
        .unwrap();
    let via_table = demo.outcomes(&psi).unwrap();
    let direct: Vec<_> = demo
        .ensemble()
        .members()
        .iter()
        .map(|chi| model.outcome(&psi, chi).unwrap())
        .collect();
    assert_eq!(via_table, direct);
    assert_eq!(outcome_counts(model, &psi, demo.ensemble()).unwrap(), demo.counts(&psi).unwrap());
}

#[test]
fn outcomes_vary_across_the_ensemble() {
    let demo = shipped(2);
    let outcomes = demo.outcomes(&demo.equal_amplitude_state(None).unwrap()).unwrap();
    assert!(outcomes.contains(&Some(0)) && outcomes.contains(&Some(1)));
}

#[test]
fn construction_is_deterministic() {
    let a = demo_model(&DemoSpec::shipped(2, 7).unwrap()).unwrap();
    let b = demo_model(&DemoSpec::shipped(2, 7).unwrap()).unwrap();
    assert_eq!(a.diagnostics(), b.diagnostics());
    assert_eq!(a.ensemble().members(), b.ensemble().members());
}

/// Random rational amplitude vector with common denominator `M ≤ 64`.
fn rational_amplitudes(rng: &mut RngStream) -> (Vec<Complex64>, Vec<u64>, u64) {
    let n = 2 + (rng.next_u64() % 4) as usize;
    let m_total = n as u64 + rng.next_u64() % (65 - n as u64);
    // split m_total into n non-negative parts
    let mut cuts: Vec<u64> = (0..n - 1).map(|_| rng.next_u64() % (m_total + 1)).collect();
    cuts.sort_unstable();
    let mut weights = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(m_total)) {
        weights.push(c - prev);
        prev = c;
    }
    let amps = weights
        .iter()
        .map(|&w| Complex64::from_polar((w as f64 / m_total as f64).sqrt(), std::f64::consts::TAU * rng.uniform()))
        .collect();
    (amps, weights, m_total)
}

#[test]
fn fine_graining_reproduces_born_weights() {
    let mut rng = RngStream::new(1234, 0);
    for _ in 0..100 {
        let (amps, weights, m_total) = rational_amplitudes(&mut rng);
        let f = fine_grain(&amps).unwrap();
        assert!(f.denominator <= m_total && m_total % f.denominator == 0);
        let psi = StateVector::from_amplitudes(amps.clone()).unwrap();
        for j in 0..amps.len() {
            let born = born_probability(&psi, j).unwrap();
            assert!((f.probabilities[j] - born).abs() < 1e-12);
            assert_eq!(f.branch_counts[j] * m_total, weights[j] * f.denominator);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fine_grain_weights_sum_to_denominator(parts in prop::collection::vec(0u64..20, 2..6)) {
        let total: u64 = parts.iter().sum();
        prop_assume!(total > 0);
        let amps: Vec<Complex64> = parts.iter().map(|&p| Complex64::new((p as f64 / total as f64).sqrt(), 0.0)).collect();
        let f = fine_grain(&amps).unwrap();
        prop_assert_eq!(f.branch_counts.iter().sum::<u64>(), f.denominator);
        prop_assert!((f.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
