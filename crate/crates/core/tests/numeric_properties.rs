use num_complex::Complex64;
use proptest::prelude::*;

use rdsim::numeric::{hermitian_eigensystem, matrix_exponential, tensor_product, OperatorMatrix, StateVector};

fn hermitian_from(dim: usize, raw: &[f64]) -> OperatorMatrix {
    let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let k = 2 * (i * dim + j);
            e[i * dim + j] = Complex64::new(raw[k], raw[k + 1]);
        }
    }
    let a = OperatorMatrix::new(dim, e).unwrap();
    a.add(&a.adjoint()).unwrap().scale_real(0.5)
}

fn arb_hermitian(max_dim: usize) -> impl Strategy<Value = OperatorMatrix> {
    (1..=max_dim).prop_flat_map(|d| prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |raw| hermitian_from(d, &raw)))
}

fn arb_square(dim: usize) -> impl Strategy<Value = OperatorMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |raw| {
        let e = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        OperatorMatrix::new(dim, e).unwrap()
    })
}

fn arb_state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim).prop_filter_map("zero vector", |raw| {
        let amps = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        StateVector::from_amplitudes(amps).ok()?.normalized().ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitary_evolution_preserves_norm(h in arb_hermitian(16), t in -10.0f64..10.0, seed in any::<u64>()) {
        let dim = h.dim();
        let u = matrix_exponential(&h.scale(Complex64::new(0.0, t))).unwrap();
        let mut rng = rdsim::harness::RngStream::new(seed, 0);
        let amps = (0..dim).map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal())).collect();
        let s = StateVector::from_amplitudes(amps).unwrap().normalized().unwrap();
        let out = u.apply(&s).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn propagator_times_inverse_is_identity(h in arb_hermitian(64), t in -10.0f64..10.0) {
        let i = Complex64::new(0.0, 1.0);
        let fwd = matrix_exponential(&h.scale(i * t)).unwrap();
        let back = matrix_exponential(&h.scale(-i * t)).unwrap();
        let prod = fwd.matmul(&back).unwrap();
        prop_assert!(prod.max_deviation(&OperatorMatrix::identity(h.dim())).unwrap() < 1e-9);
    }

    #[test]
    fn spectral_reconstruction(h in arb_hermitian(32)) {
        let dim = h.dim();
        let es = hermitian_eigensystem(&h).unwrap();
        prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let mut rebuilt = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (lambda, v) in es.eigenvalues.iter().zip(&es.eigenvectors) {
            let a = v.amplitudes();
            for r in 0..dim {
                for c in 0..dim {
                    rebuilt[r * dim + c] += a[r] * a[c].conj() * lambda;
                }
            }
            // residual ‖Hv − λv‖
            let hv = h.apply(v).unwrap();
            let res: f64 = hv.amplitudes().iter().zip(a).map(|(x, y)| (x - y * lambda).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(res < 1e-9);
        }
        let rebuilt = OperatorMatrix::new(dim, rebuilt).unwrap();
        prop_assert!(rebuilt.max_deviation(&h).unwrap() < 1e-9);
        for (i, a) in es.eigenvectors.iter().enumerate() {
            for (j, b) in es.eigenvectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((a.inner(b).unwrap() - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn tensor_product_is_associative(a in arb_square(2), b in arb_square(3), c in arb_square(2)) {
        let left = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_deviation(&right).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_entries_follow_kronecker_formula(a in arb_square(3), b in arb_square(2)) {
        let t = tensor_product(&a, &b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..2 {
                    for l in 0..2 {
                        prop_assert_eq!(t.get(i * 2 + k, j * 2 + l), a.get(i, j) * b.get(k, l));
                    }
                }
            }
        }
    }

    #[test]
    fn inner_product_is_real_and_non_negative(s in arb_state(8)) {
        let n = s.inner(&s).unwrap();
        prop_assert!(n.im.abs() < 1e-15 && n.re >= 0.0);
        prop_assert!((n.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_is_linear(m in arb_square(4), x in arb_state(4), y in arb_state(4), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let c = Complex64::new(re, im);
        let combo: Vec<Complex64> = x.amplitudes().iter().zip(y.amplitudes()).map(|(a, b)| a * c + b).collect();
        let combo = StateVector::from_amplitudes(combo).unwrap();
        let lhs = m.apply(&combo).unwrap();
        let mx = m.apply(&x).unwrap();
        let my = m.apply(&y).unwrap();
        for ((l, a), b) in lhs.amplitudes().iter().zip(mx.amplitudes()).zip(my.amplitudes()) {
            prop_assert!((l - (a * c + b)).norm() < 1e-12);
        }
    }
}

#[test]
fn apply_examples() {
    let s = StateVector::from_real(&[0.6, 0.8]).unwrap();
    assert_eq!(rdsim::numeric::apply(&OperatorMatrix::identity(2), &s).unwrap(), s);
    assert!((rdsim::numeric::inner(&s, &s).unwrap().re - 1.0).abs() < 1e-15);
    let flipped = rdsim::numeric::apply(&OperatorMatrix::pauli_x(), &StateVector::basis(2, 0).unwrap()).unwrap();
    assert_eq!(flipped, StateVector::basis(2, 1).unwrap());
    assert!(rdsim::numeric::apply(&OperatorMatrix::identity(3), &s).is_err());
}

#[test]
fn dimension_cap_enforced() {
    let a = OperatorMatrix::identity(128);
    let b = OperatorMatrix::identity(64);
    assert!(tensor_product(&a, &b).is_err());
}
