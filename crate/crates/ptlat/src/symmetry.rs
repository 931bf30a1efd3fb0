//! Parity-type operators and antilinear-symmetry diagnostics.
//!
//! For the clean open chain the reflection 𝒫 (exchange site k ↔ N+1−k)
//! commutes with the Hamiltonian and, combined with complex conjugation 𝒯,
//! protects a real spectrum up to the breaking threshold. Periodic disorder
//! commensurate with the chain replaces 𝒫 by a generalized operator Π built
//! from the disordered eigenbasis with staggered signs; its structure — which
//! antidiagonal entries survive at exactly ±1 — encodes whether gain/loss
//! pairs remain protected.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{PtError, Result};
use crate::model::{DisorderKind, Hamiltonian};
use crate::spectral::Spectrum;

/// Eigenvalue-gap floor below which spectrum-derived operators are refused:
/// near-degenerate eigenvectors make the basis (and hence the operator)
/// arbitrary.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-9;

/// A string of ±1 signs, one per eigenvector, defining a spectral reflection
/// `P = U diag(s) Uᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignString(Vec<i8>);

impl SignString {
    /// Alternating +1, −1, +1, … (index 1-based: s_α = (−1)^{α−1}).
    pub fn staggered(n: usize) -> Self {
        Self((0..n).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect())
    }

    /// All +1 (yields the identity operator for any orthonormal basis).
    pub fn uniform(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(PtError::InvalidSpec(
                "sign string must be non-empty with entries ±1".into(),
            ));
        }
        Ok(Self(signs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }
}

/// How a parity operator was constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// The exact site reflection k ↔ N+1−k.
    LatticeReflection,
    /// Built from an eigenbasis with the recorded sign string.
    FromSpectrum(SignString),
}

/// A real symmetric involution on the lattice (P = Pᵀ, P² = 1).
#[derive(Debug, Clone)]
pub struct ParityOperator {
    pub matrix: Array2<f64>,
    pub provenance: Provenance,
}

impl ParityOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry on the main antidiagonal at 1-based site k, i.e. P_{k, N+1−k}.
    pub fn antidiagonal(&self, k: usize) -> f64 {
        let n = self.dim();
        self.matrix[[k - 1, n - k]]
    }

    /// Frobenius distance to another operator of the same dimension.
    pub fn distance(&self, other: &ParityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(PtError::DimensionMismatch(format!(
                "parity operators have dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok((&self.matrix - &other.matrix).iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

/// The exact site reflection: ones on the antidiagonal.
pub fn lattice_reflection(n: usize) -> ParityOperator {
    let mut m = Array2::<f64>::zeros((n, n));
    for k in 0..n {
        m[[k, n - 1 - k]] = 1.0;
    }
    ParityOperator { matrix: m, provenance: Provenance::LatticeReflection }
}

/// Builds `P = U diag(s) Uᵀ` from a real orthonormal eigenbasis.
///
/// Refuses spectra with eigenvalue gaps below `gap_floor` (the eigenvectors,
/// and hence P, would be arbitrary within the degenerate subspace) and
/// spectra with meaningfully complex eigenvectors.
pub fn parity_from_spectrum(
    spectrum: &Spectrum,
    signs: &SignString,
    gap_floor: f64,
) -> Result<ParityOperator> {
    let n = spectrum.n();
    if signs.len() != n {
        return Err(PtError::DimensionMismatch(format!(
            "sign string has length {}, spectrum has {} states",
            signs.len(),
            n
        )));
    }
    let gap = spectrum.min_gap();
    if gap < gap_floor {
        return Err(PtError::DegenerateSpectrum { gap, floor: gap_floor });
    }
    let u = spectrum.real_vectors(1e-9)?;
    let mut scaled = u.clone();
    for (alpha, &s) in signs.signs().iter().enumerate() {
        if s < 0 {
            scaled.column_mut(alpha).mapv_inplace(|x| -x);
        }
    }
    Ok(ParityOperator {
        matrix: scaled.dot(&u.t()),
        provenance: Provenance::FromSpectrum(signs.clone()),
    })
}

/// The generalized parity Π: staggered signs over the eigenbasis of the
/// disordered Hermitian Hamiltonian. For the clean chain this reproduces the
/// site reflection exactly.
pub fn pi_operator(spectrum: &Spectrum, gap_floor: f64) -> Result<ParityOperator> {
    parity_from_spectrum(spectrum, &SignString::staggered(spectrum.n()), gap_floor)
}

/// Site-resolved reflection asymmetry of an eigenbasis:
/// `A(k) = Σ_α |U_{N+1−k, α} + (−1)^α U_{k, α}|` (α 1-based).
///
/// A(k) vanishes exactly at sites whose reflected partner keeps the
/// alternating-sign relation of the clean chain, and is invariant under the
/// per-column sign freedom of the eigensolver.
pub fn asymmetry(spectrum: &Spectrum) -> Result<Vec<f64>> {
    let u = spectrum.real_vectors(1e-9)?;
    let n = spectrum.n();
    let mut a = vec![0.0; n];
    for k in 0..n {
        let kbar = n - 1 - k;
        let mut acc = 0.0;
        for alpha in 0..n {
            // (−1)^α with α = alpha + 1
            let sign = if alpha % 2 == 0 { -1.0 } else { 1.0 };
            acc += (u[[kbar, alpha]] + sign * u[[k, alpha]]).abs();
        }
        a[k] = acc;
    }
    Ok(a)
}

/// Frobenius norm of the antilinear commutator `H P − P H̄` (H̄ is the entry-
/// wise conjugate). Vanishes iff H commutes with the antilinear operator
/// P∘𝒯, the defining symmetry of a protected gain/loss configuration.
pub fn antilinear_commutator_norm(h: &Hamiltonian, p: &ParityOperator) -> Result<f64> {
    let n = h.dim();
    if p.dim() != n {
        return Err(PtError::DimensionMismatch(format!(
            "operator dim {} does not match lattice dim {}",
            p.dim(),
            n
        )));
    }
    let pc = p.matrix.mapv(|x| Complex64::new(x, 0.0));
    let hp = h.matrix().dot(&pc);
    let ph_conj = pc.dot(&h.matrix().mapv(|z| z.conj()));
    Ok((&hp - &ph_conj).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Whether a disorder period `p` protects the gain/loss pair at `m0` on the
/// N-site chain:
///
/// * any disorder kind: `(N+1) ≡ 0 (mod p)` **and** `m0 ≡ 0 (mod p)`, or
/// * on-site disorder with `p = 2` on an odd chain (the midpoint reflection
///   maps the disorder pattern onto itself for every m0).
pub fn protection_predicate(n: usize, p: usize, m0: usize, kind: DisorderKind) -> bool {
    if p == 0 || m0 == 0 || m0 > n {
        return false;
    }
    let commensurate = (n + 1).is_multiple_of(p) && m0.is_multiple_of(p);
    let onsite_odd = kind == DisorderKind::OnSite && p == 2 && n % 2 == 1;
    commensurate || onsite_odd
}
