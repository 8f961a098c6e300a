use num_complex::Complex64;

use super::{NumericError, OperatorMatrix, Result, Spectrum};
use crate::tolerances;

/// `exp(A)` for a square complex matrix.
///
/// Hermitian and anti-Hermitian inputs (the `i·H·t` propagators) go through
/// the spectral decomposition, which keeps the result unitary to rounding.
/// Anything else uses scaling and squaring of a truncated Taylor series.
pub fn matrix_exponential(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !a.is_finite() {
        return Err(NumericError::NonFinite);
    }
    let scale = a.max_abs().max(1.0);
    let i = Complex64::new(0.0, 1.0);

    let generator = a.scale(-i);
    if generator.hermiticity_defect() <= tolerances::HERMITIAN * scale {
        let spectrum = Spectrum::of(&symmetrize(&generator))?;
        return spectrum.function(|lambda| (i * lambda).exp()).mark_unitary();
    }
    if a.hermiticity_defect() <= tolerances::HERMITIAN * scale {
        let spectrum = Spectrum::of(&symmetrize(a))?;
        let out = spectrum.function(|lambda| Complex64::new(lambda.exp(), 0.0));
        return Ok(symmetrize(&out));
    }
    Ok(taylor_scaling_squaring(a))
}

/// `(A + A†)/2`, flagged Hermitian.
fn symmetrize(a: &OperatorMatrix) -> OperatorMatrix {
    let sym = a.add(&a.adjoint()).expect("same dimension").scale_real(0.5);
    sym.mark_hermitian().expect("exactly Hermitian")
}

fn taylor_scaling_squaring(a: &OperatorMatrix) -> OperatorMatrix {
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let scaled = a.scale_real(0.5f64.powi(squarings as i32));
    let dim = a.dim();
    let mut result = OperatorMatrix::identity(dim);
    let mut term = OperatorMatrix::identity(dim);
    for k in 1..=24 {
        term = term.matmul(&scaled).expect("same dimension").scale_real(1.0 / k as f64);
        result = result.add(&term).expect("same dimension");
        if term.max_abs() < f64::EPSILON * 1e-3 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result).expect("same dimension");
    }
    result
}

fn one_norm(a: &OperatorMatrix) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
