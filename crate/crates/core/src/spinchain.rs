//! Heisenberg spin chains as quantum randomizing devices.
//!
//! Site 0 is the most significant qubit of the basis index and `|0⟩` is spin
//! up (`σ_z = +1`), matching [`tensor_product`] ordering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{hermitian_eigensystem, tensor_product, NumericError, OperatorMatrix, StateVector, MAX_DIMENSION};
use crate::tolerances;

/// Largest chain handled.
pub const MAX_SITES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinChainError {
    #[error("a chain needs at least 2 sites (got {0})")]
    TooFewSites(usize),
    #[error("2^{0} exceeds the dense dimension limit")]
    TooLarge(usize),
    #[error("coupling sign must be +1 or -1 (got {0})")]
    InvalidSign(i64),
    #[error("sensitivity scans need the ferromagnetic sign (-1)")]
    NotFerromagnetic,
    #[error("state of length {len} is not a {sites}-site chain state")]
    NotChainState { len: usize, sites: usize },
    #[error("expected a 2x2 single-site operator, got dimension {0}")]
    NotSingleSite(usize),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

pub type Result<T> = std::result::Result<T, SpinChainError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `H = sign · Σ_bonds σ⃗_l·σ⃗_{l+1}`; `+1` is the antiferromagnet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    coupling_sign: i8,
    boundary: Boundary,
}

impl ChainSpec {
    pub fn new(n_sites: usize, coupling_sign: i64, boundary: Boundary) -> Result<Self> {
        if n_sites < 2 {
            return Err(SpinChainError::TooFewSites(n_sites));
        }
        if n_sites > MAX_SITES || (1usize << n_sites) > MAX_DIMENSION {
            return Err(SpinChainError::TooLarge(n_sites));
        }
        let coupling_sign = match coupling_sign {
            1 => 1,
            -1 => -1,
            other => return Err(SpinChainError::InvalidSign(other)),
        };
        Ok(Self {
            n_sites,
            coupling_sign,
            boundary,
        })
    }

    pub fn ferromagnetic(n_sites: usize, boundary: Boundary) -> Result<Self> {
        Self::new(n_sites, -1, boundary)
    }

    pub fn antiferromagnetic(n_sites: usize, boundary: Boundary) -> Result<Self> {
        Self::new(n_sites, 1, boundary)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling_sign(&self) -> i8 {
        self.coupling_sign
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.coupling_sign < 0
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Bonds `(l, l+1)`, plus `(N−1, 0)` when periodic. For `N = 2` the
    /// periodic wrap repeats the single bond, as the literal sum does.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|l| (l, l + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

fn site_bit(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - 1 - site)
}

/// Builds the chain Hamiltonian from `σ⃗_i·σ⃗_j = 2·SWAP_ij − 1`.
pub fn build_heisenberg(spec: &ChainSpec) -> Result<OperatorMatrix> {
    let n = spec.n_sites;
    let dim = spec.dim();
    let sign = spec.coupling_sign as f64;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, j) in spec.bonds() {
        let (bi, bj) = (site_bit(n, i), site_bit(n, j));
        for k in 0..dim {
            let aligned = (k & bi == 0) == (k & bj == 0);
            if aligned {
                entries[k * dim + k] += sign;
            } else {
                entries[k * dim + k] -= sign;
                let swapped = k ^ bi ^ bj;
                entries[swapped * dim + k] += 2.0 * sign;
            }
        }
    }
    Ok(OperatorMatrix::new(dim, entries)?.mark_hermitian()?)
}

/// `σ_z` field term `Σ_l σ_l^z` as a diagonal.
fn total_sz_diagonal(n_sites: usize) -> Vec<f64> {
    (0..1usize << n_sites)
        .map(|k| n_sites as f64 - 2.0 * k.count_ones() as f64)
        .collect()
}

/// `u^{⊗n}`.
pub fn global_unitary(u: &OperatorMatrix, n: usize) -> Result<OperatorMatrix> {
    if u.dim() != 2 {
        return Err(SpinChainError::NotSingleSite(u.dim()));
    }
    let defect = u.unitarity_defect();
    if defect > tolerances::UNITARY {
        return Err(NumericError::NotUnitary(defect).into());
    }
    if n == 0 {
        return Ok(OperatorMatrix::identity(1));
    }
    let mut out = u.clone();
    for _ in 1..n {
        out = tensor_product(&out, u)?;
    }
    Ok(out)
}

/// `max |(AB − BA)_ij|`.
pub fn commutator_norm(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    Ok(a.commutator(b)?.max_abs())
}

/// `diag(e^{iφ}, e^{−iφ})`.
pub fn u_phi(phi: f64) -> OperatorMatrix {
    OperatorMatrix::from_diagonal(&[Complex64::from_polar(1.0, phi), Complex64::from_polar(1.0, -phi)])
}

/// The spin flip `U_π = σ_x`.
pub fn u_pi() -> OperatorMatrix {
    OperatorMatrix::pauli_x()
}

/// `exp(i a⃗·σ⃗) = cos|a| I + i sin|a| (â·σ⃗)`.
pub fn su2_rotation(a: [f64; 3]) -> OperatorMatrix {
    let theta = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let (c, s) = (theta.cos(), if theta > 0.0 { theta.sin() / theta } else { 1.0 });
    let i = Complex64::new(0.0, 1.0);
    let (x, y, z) = (a[0] * s, a[1] * s, a[2] * s);
    OperatorMatrix::from_rows(&[
        vec![c + i * z, i * x + y],
        vec![i * x - y, c - i * z],
    ])
    .expect("2x2")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliConjugationReport {
    /// `max |U_π σ_z U_π + σ_z|`.
    pub z_flipped: f64,
    /// `max |U_π σ_x U_π − σ_x|`.
    pub x_preserved: f64,
    /// `max |U_π σ_y U_π + σ_y|`.
    pub y_flipped: f64,
    pub pass: bool,
}

pub fn pauli_conjugation_check() -> Result<PauliConjugationReport> {
    let u = u_pi();
    let conj = |s: &OperatorMatrix| -> Result<OperatorMatrix> { Ok(u.matmul(s)?.matmul(&u)?) };
    let (x, y, z) = (OperatorMatrix::pauli_x(), OperatorMatrix::pauli_y(), OperatorMatrix::pauli_z());
    let z_flipped = conj(&z)?.max_deviation(&z.scale_real(-1.0))?;
    let x_preserved = conj(&x)?.max_deviation(&x)?;
    let y_flipped = conj(&y)?.max_deviation(&y.scale_real(-1.0))?;
    let tol = tolerances::PAULI_CONJUGATION;
    Ok(PauliConjugationReport {
        z_flipped,
        x_preserved,
        y_flipped,
        pass: z_flipped <= tol && x_preserved <= tol && y_flipped <= tol,
    })
}

#[derive(Debug, Clone)]
pub struct GroundSpace {
    pub energy: f64,
    pub states: Vec<StateVector>,
    pub degeneracy: usize,
    pub tol: f64,
}

/// Every eigenvector within `tol` of the lowest eigenvalue, re-orthonormalized.
pub fn ground_space(h: &OperatorMatrix, tol: f64) -> Result<GroundSpace> {
    let es = hermitian_eigensystem(h)?;
    let energy = es.eigenvalues[0];
    let candidates: Vec<StateVector> = es
        .eigenvalues
        .iter()
        .zip(es.eigenvectors)
        .take_while(|(&e, _)| e - energy <= tol)
        .map(|(_, v)| v)
        .collect();
    let states = gram_schmidt(candidates)?;
    Ok(GroundSpace {
        energy,
        degeneracy: states.len(),
        states,
        tol,
    })
}

fn gram_schmidt(vectors: Vec<StateVector>) -> Result<Vec<StateVector>> {
    let mut basis: Vec<StateVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w: Vec<Complex64> = v.amplitudes().to_vec();
        for b in &basis {
            let proj = b.inner(&v)?;
            for (wi, bi) in w.iter_mut().zip(b.amplitudes()) {
                *wi -= proj * bi;
            }
        }
        let w = StateVector::new(w, v.dims().to_vec())?;
        if w.norm() > tolerances::ORTHONORMAL {
            basis.push(w.normalized()?);
        }
    }
    Ok(basis)
}

/// `⟨Σ_l σ_l^axis⟩ / N` for a normalized state of an `n_sites` qubit chain.
pub fn order_parameter(s: &StateVector, axis: Axis, n_sites: usize) -> Result<f64> {
    if n_sites == 0 || n_sites > MAX_SITES || s.len() != 1 << n_sites {
        return Err(SpinChainError::NotChainState {
            len: s.len(),
            sites: n_sites,
        });
    }
    let c = s.amplitudes();
    let mut total = 0.0;
    for site in 0..n_sites {
        let bit = site_bit(n_sites, site);
        let value: f64 = match axis {
            Axis::Z => c
                .iter()
                .enumerate()
                .map(|(k, a)| if k & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum(),
            // σ_x|k⟩ = |k ^ bit⟩
            Axis::X => c.iter().enumerate().map(|(k, a)| (c[k ^ bit].conj() * a).re).sum(),
            // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
            Axis::Y => c
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let phase = if k & bit == 0 { Complex64::i() } else { -Complex64::i() };
                    (c[k ^ bit].conj() * phase * a).re
                })
                .sum(),
        };
        total += value;
    }
    Ok(total / n_sites as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub h: f64,
    pub ground_energy: f64,
    /// Multiplicity of the lowest level of `H − hΣσ^z`.
    pub degeneracy: usize,
    /// z order parameter of the ground state; `None` when it is not unique.
    pub order_parameter: Option<f64>,
}

impl SensitivityPoint {
    pub fn is_degenerate(&self) -> bool {
        self.order_parameter.is_none()
    }
}

/// Ground-state magnetization of `H − hΣ_l σ_l^z` for each field `h`.
pub fn sensitivity_scan(spec: &ChainSpec, fields: &[f64]) -> Result<Vec<SensitivityPoint>> {
    if !spec.is_ferromagnetic() {
        return Err(SpinChainError::NotFerromagnetic);
    }
    let h0 = build_heisenberg(spec)?;
    let sz = total_sz_diagonal(spec.n_sites);
    let dim = spec.dim();
    fields
        .iter()
        .map(|&h| {
            if !h.is_finite() {
                return Err(NumericError::NonFinite.into());
            }
            let mut entries = h0.entries().to_vec();
            for (k, m) in sz.iter().enumerate() {
                entries[k * dim + k] -= h * m;
            }
            let hh = OperatorMatrix::new(dim, entries)?;
            let gs = ground_space(&hh, tolerances::DEGENERACY)?;
            let order_parameter = if h == 0.0 || gs.degeneracy != 1 {
                None
            } else {
                Some(order_parameter(&gs.states[0], Axis::Z, spec.n_sites)?)
            };
            Ok(SensitivityPoint {
                h,
                ground_energy: gs.energy,
                degeneracy: gs.degeneracy,
                order_parameter,
            })
        })
        .collect()
}
