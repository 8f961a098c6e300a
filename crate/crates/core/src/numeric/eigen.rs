//! Hermitian eigensolver: cyclic complex Jacobi, applied independently to
//! every connected block of the matrix's sparsity pattern.

use num_complex::Complex64;

use super::{NumericError, OperatorMatrix, Result, StateVector};
use crate::tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

/// Eigendecomposition of `h`.
///
/// Eigenvalues are ascending. Within a degenerate eigenvalue the order is
/// that of the deterministic Jacobi sweep. Every eigenvector has its
/// largest-magnitude component (first one on ties) real and positive.
pub fn hermitian_eigensystem(h: &OperatorMatrix) -> Result<Eigensystem> {
    Spectrum::of(h).map(Spectrum::into_eigensystem)
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    values: Vec<f64>,
    /// Column `c` holds eigenvector `c`: `vectors[r * b + c]`.
    vectors: Vec<Complex64>,
}

/// Block-diagonal spectral decomposition of a Hermitian matrix.
///
/// Used for functions of the matrix (`exp(iHt)`) and for evolving single
/// states without forming the dense propagator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    blocks: Vec<Block>,
}

impl Spectrum {
    pub fn of(h: &OperatorMatrix) -> Result<Self> {
        if !h.is_finite() {
            return Err(NumericError::NonFinite);
        }
        let defect = h.hermiticity_defect();
        if defect > tolerances::HERMITIAN {
            return Err(NumericError::NotHermitian(defect));
        }
        let dim = h.dim();
        let blocks = connected_blocks(h)
            .into_iter()
            .map(|indices| diagonalize_block(h, indices))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sizes of the independent blocks found in the sparsity pattern.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.values.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// `V f(Λ) V†` as a dense matrix.
    pub fn function(&self, f: impl Fn(f64) -> Complex64) -> OperatorMatrix {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for block in &self.blocks {
            let b = block.indices.len();
            let fv: Vec<Complex64> = block.values.iter().map(|&v| f(v)).collect();
            for (r, &gr) in block.indices.iter().enumerate() {
                for (c, &gc) in block.indices.iter().enumerate() {
                    let mut acc = ZERO;
                    for k in 0..b {
                        acc += block.vectors[r * b + k] * fv[k] * block.vectors[c * b + k].conj();
                    }
                    entries[gr * n + gc] = acc;
                }
            }
        }
        OperatorMatrix::from_parts_unchecked(n, entries)
    }

    /// `V f(Λ) V† |state⟩` without building the dense matrix.
    pub fn apply_function(&self, state: &[Complex64], f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for block in &self.blocks {
            let b = block.indices.len();
            let local: Vec<Complex64> = block.indices.iter().map(|&g| state[g]).collect();
            if local.iter().all(|c| *c == ZERO) {
                continue;
            }
            // coefficients in the eigenbasis
            let coeffs: Vec<Complex64> = (0..b)
                .map(|k| {
                    let proj: Complex64 = (0..b)
                        .map(|r| block.vectors[r * b + k].conj() * local[r])
                        .sum();
                    proj * f(block.values[k])
                })
                .collect();
            for (r, &g) in block.indices.iter().enumerate() {
                out[g] = (0..b).map(|k| block.vectors[r * b + k] * coeffs[k]).sum();
            }
        }
        out
    }

    pub fn into_eigensystem(self) -> Eigensystem {
        let n = self.dim;
        let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n);
        for block in &self.blocks {
            let b = block.indices.len();
            for k in 0..b {
                let mut v = vec![ZERO; n];
                for (r, &g) in block.indices.iter().enumerate() {
                    v[g] = block.vectors[r * b + k];
                }
                fix_phase(&mut v);
                pairs.push((block.values[k], v));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (eigenvalues, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = pairs.into_iter().unzip();
        let eigenvectors = vectors
            .into_iter()
            .map(|v| StateVector::from_amplitudes(v).expect("non-empty"))
            .collect();
        Eigensystem {
            eigenvalues,
            eigenvectors,
        }
    }
}

/// Rotates `v` so its largest-magnitude component is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (k, c) in v.iter().enumerate() {
        let norm = c.norm();
        if norm > best_norm + 1e-12 {
            best = k;
            best_norm = norm;
        }
    }
    if best_norm <= 0.0 {
        return;
    }
    let phase = v[best].conj() / best_norm;
    for c in v.iter_mut() {
        *c *= phase;
    }
    v[best] = Complex64::new(v[best].re, 0.0);
}

/// Connected components of the graph with an edge wherever `h[i][j] != 0`,
/// each sorted ascending, ordered by smallest member.
fn connected_blocks(h: &OperatorMatrix) -> Vec<Vec<usize>> {
    let n = h.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for (j, c) in h.row(i).iter().enumerate().skip(i + 1) {
            if *c != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn diagonalize_block(h: &OperatorMatrix, indices: Vec<usize>) -> Result<Block> {
    let b = indices.len();
    let mut a = vec![ZERO; b * b];
    for (r, &gr) in indices.iter().enumerate() {
        for (c, &gc) in indices.iter().enumerate() {
            a[r * b + c] = h.get(gr, gc);
        }
    }
    // enforce exact Hermitian symmetry inside the block
    for r in 0..b {
        a[r * b + r] = Complex64::new(a[r * b + r].re, 0.0);
        for c in r + 1..b {
            let avg = (a[r * b + c] + a[c * b + r].conj()) * 0.5;
            a[r * b + c] = avg;
            a[c * b + r] = avg.conj();
        }
    }
    let mut v = vec![ZERO; b * b];
    for k in 0..b {
        v[k * b + k] = Complex64::new(1.0, 0.0);
    }
    jacobi(&mut a, &mut v, b)?;
    Ok(Block {
        values: (0..b).map(|k| a[k * b + k].re).collect(),
        indices,
        vectors: v,
    })
}

fn off_diagonal_sqr(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[r * n + c].norm_sqr();
            }
        }
    }
    s
}

fn jacobi(a: &mut [Complex64], v: &mut [Complex64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    let frob_sqr: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    let target = frob_sqr * 1e-32;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sqr(a, n) <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(a, v, n, p, q);
            }
        }
    }
    if off_diagonal_sqr(a, n) <= target * 1e4 {
        return Ok(());
    }
    Err(NumericError::NoConvergence(MAX_SWEEPS))
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let z = a[p * n + q];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    // Phase step: D = diag(.., e^{-iθ} at q, ..) makes a[p][q] real positive.
    let phase = z.conj() / r;
    for k in 0..n {
        a[k * n + q] *= phase;
        v[k * n + q] *= phase;
    }
    let phase_c = phase.conj();
    for k in 0..n {
        a[q * n + k] *= phase_c;
    }
    // Real rotation on the (p, q) plane.
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * s;
        a[k * n + q] = akp * s + akq * c;
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * s;
        v[k * n + q] = vkp * s + vkq * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * s;
        a[q * n + k] = apk * s + aqk * c;
    }
    a[p * n + p] = Complex64::new(app - t * r, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::tensor_product;

    fn heisenberg_pair() -> OperatorMatrix {
        let x = OperatorMatrix::pauli_x();
        let y = OperatorMatrix::pauli_y();
        let z = OperatorMatrix::pauli_z();
        tensor_product(&x, &x)
            .unwrap()
            .add(&tensor_product(&y, &y).unwrap())
            .unwrap()
            .add(&tensor_product(&z, &z).unwrap())
            .unwrap()
    }

    #[test]
    fn pauli_z_spectrum() {
        let es = hermitian_eigensystem(&OperatorMatrix::pauli_z()).unwrap();
        assert_eq!(es.eigenvalues, vec![-1.0, 1.0]);
        assert_eq!(es.eigenvectors[0], StateVector::basis(2, 1).unwrap());
    }

    #[test]
    fn pauli_x_spectrum_and_vectors() {
        let es = hermitian_eigensystem(&OperatorMatrix::pauli_x()).unwrap();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = StateVector::from_real(&[h, -h]).unwrap();
        let plus = StateVector::from_real(&[h, h]).unwrap();
        // (1, -1)/√2 up to the sign convention
        assert!(es.eigenvectors[0].infidelity(&minus).unwrap().abs() < 1e-14);
        assert!(es.eigenvectors[1].max_distance(&plus).unwrap() < 1e-14);
    }

    #[test]
    fn two_spin_heisenberg_spectrum() {
        let es = hermitian_eigensystem(&heisenberg_pair()).unwrap();
        let expected = [-3.0, 1.0, 1.0, 1.0];
        for (got, want) in es.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = OperatorMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigensystem(&m), Err(NumericError::NotHermitian(_))));
    }

    #[test]
    fn blocks_follow_sparsity() {
        let spectrum = Spectrum::of(&heisenberg_pair()).unwrap();
        let mut sizes = spectrum.block_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
    }

    #[test]
    fn phase_convention_makes_largest_component_positive() {
        let h = OperatorMatrix::pauli_y();
        let es = hermitian_eigensystem(&h).unwrap();
        for v in &es.eigenvectors {
            let largest = v.amplitudes()[0];
            assert!(largest.im.abs() < 1e-15 && largest.re > 0.0);
        }
    }
}
