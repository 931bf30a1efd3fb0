//! Tight-binding operators in the site basis.
//!
//! This module builds every operator of the dimensionless lattice model as a
//! dense complex matrix: the clean open-chain hopping `H0`, the balanced
//! gain/loss potential `Γ`, and the two classes of periodic disorder
//! (tunneling and on-site). Site indices are 1-based in all public
//! signatures and converted to 0-based storage at this boundary only.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{PtError, Result};

/// The clean lattice: `N` sites coupled by a uniform nearest-neighbour
/// tunneling amplitude `J` (the energy unit of the model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Number of sites (N ≥ 2).
    pub n: usize,
    /// Tunneling energy (J > 0); all energies are reported in units of J.
    pub j: f64,
}

impl LatticeSpec {
    /// Validates `N ≥ 2` and `J > 0`.
    pub fn new(n: usize, j: f64) -> Result<Self> {
        if n < 2 {
            return Err(PtError::InvalidSpec(format!("lattice needs N >= 2, got {n}")));
        }
        if !(j > 0.0) || !j.is_finite() {
            return Err(PtError::InvalidSpec(format!("tunneling J must be positive, got {j}")));
        }
        Ok(Self { n, j })
    }
}

/// Balanced gain/loss pair: `+iγ` on site `m0`, `−iγ` on the reflected site
/// `m̄0 = N + 1 − m0`. The gain site lives on the left half (`m0 ≤ ⌊N/2⌋`),
/// so `m0 < m̄0` always holds and the pair distance is `d = m̄0 − m0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainLossSpec {
    /// Gain site, 1-based.
    pub m0: usize,
    /// Gain/loss strength γ ≥ 0, same energy units as J.
    pub gamma: f64,
}

impl GainLossSpec {
    /// Validates `γ ≥ 0` and `m0 ≥ 1`; the upper bound on `m0` depends on the
    /// lattice and is checked by [`build_gain_loss`].
    pub fn new(m0: usize, gamma: f64) -> Result<Self> {
        if m0 == 0 {
            return Err(PtError::InvalidSpec("gain site m0 is 1-based; got 0".into()));
        }
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(PtError::InvalidSpec(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self { m0, gamma })
    }

    /// The loss site `m̄0 = N + 1 − m0` (1-based).
    pub fn loss_site(&self, n: usize) -> usize {
        n + 1 - self.m0
    }

    /// Gain/loss separation `d = m̄0 − m0`.
    pub fn distance(&self, n: usize) -> usize {
        self.loss_site(n) - self.m0
    }
}

/// Which matrix elements the disorder perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisorderKind {
    /// Random bond strengths: total hopping `J_k = J(1 + λ r_k)` on bond k.
    Tunneling,
    /// Random site energies: `V_k = J Δ r_k` on site k.
    OnSite,
}

/// Distribution of the i.i.d. base draws (always zero mean, unit variance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Standard normal.
    Gaussian,
    /// Uniform on `[−√3, +√3]` (the unique zero-mean unit-variance support).
    Uniform,
}

/// A periodic-disorder prescription: `p` independent draws repeated across
/// the lattice, scaled by the dimensionless strength (λ for tunneling,
/// Δ for on-site).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// λ (tunneling) or Δ (on-site); ≥ 0, dimensionless.
    pub strength: f64,
    /// Disorder period p ≥ 1. Periods beyond N/2 are legal inputs; protection
    /// only ever arises when p divides N + 1.
    pub period: usize,
    pub distribution: Distribution,
    /// Seed of the reproducible sampling stream.
    pub seed: u64,
}

impl DisorderSpec {
    pub fn new(
        kind: DisorderKind,
        strength: f64,
        period: usize,
        distribution: Distribution,
        seed: u64,
    ) -> Result<Self> {
        if period == 0 {
            return Err(PtError::InvalidSpec("disorder period must be >= 1".into()));
        }
        if strength < 0.0 || !strength.is_finite() {
            return Err(PtError::InvalidSpec(format!(
                "disorder strength must be >= 0, got {strength}"
            )));
        }
        Ok(Self { kind, strength, period, distribution, seed })
    }
}

/// One concrete realization: the `p` base draws and their periodic expansion
/// over the lattice (`N − 1` bonds for tunneling, `N` sites for on-site).
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    /// The i.i.d. draws `r_1..r_p`.
    pub base: Vec<f64>,
    /// `expanded[k] = base[((k−1) mod p) + 1]` in 1-based indexing.
    pub expanded: Vec<f64>,
}

impl DisorderRealization {
    /// Expands `base` periodically to `target_len` entries.
    pub fn from_base(base: Vec<f64>, target_len: usize) -> Result<Self> {
        let expanded = expand_periodic(&base, target_len)?;
        Ok(Self { base, expanded })
    }
}

/// Periodic expansion: `out[k] = base[((k−1) mod p) + 1]` (1-based), i.e. the
/// base pattern tiled across `target_len` slots, truncating the last period.
pub fn expand_periodic(base: &[f64], target_len: usize) -> Result<Vec<f64>> {
    if base.is_empty() {
        return Err(PtError::InvalidSpec("periodic expansion needs a non-empty base".into()));
    }
    if target_len == 0 {
        return Err(PtError::InvalidSpec("periodic expansion needs target_len >= 1".into()));
    }
    Ok((0..target_len).map(|k| base[k % base.len()]).collect())
}

/// A dense complex operator in the site basis, tagged with whether it was
/// assembled purely from Hermitian parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    data: Array2<Complex64>,
    hermitian: bool,
}

impl Hamiltonian {
    /// Wraps an existing matrix. `hermitian` asserts that the data equals its
    /// conjugate transpose exactly; this is the caller's responsibility.
    pub fn from_matrix(data: Array2<Complex64>, hermitian: bool) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(PtError::DimensionMismatch(format!("{r}x{c} matrix is not square")));
        }
        Ok(Self { n: r, data, hermitian })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// True iff assembled exclusively from Hermitian parts (γ = 0 throughout).
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.data
    }

    /// Frobenius norm of the matrix.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise sum with another operator of the same dimension.
    pub fn add(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        if self.n != other.n {
            return Err(PtError::DimensionMismatch(format!(
                "cannot add {}x{0} and {}x{1} operators",
                self.n, other.n
            )));
        }
        Ok(Hamiltonian {
            n: self.n,
            data: &self.data + &other.data,
            hermitian: self.hermitian && other.hermitian,
        })
    }
}

/// Clean open-chain hopping: tridiagonal with `−J` on both off-diagonals and
/// zero diagonal. Hermitian by construction.
pub fn build_h0(spec: &LatticeSpec) -> Hamiltonian {
    let mut data = Array2::<Complex64>::zeros((spec.n, spec.n));
    for k in 0..spec.n - 1 {
        data[[k, k + 1]] = Complex64::new(-spec.j, 0.0);
        data[[k + 1, k]] = Complex64::new(-spec.j, 0.0);
    }
    Hamiltonian { n: spec.n, data, hermitian: true }
}

/// Balanced gain/loss potential: diagonal matrix with `+iγ` at `m0` and `−iγ`
/// at `N + 1 − m0`. Anti-Hermitian and traceless; `hermitian` only when γ = 0.
///
/// Rejects `m0 > ⌊N/2⌋`: the gain site is confined to the left half, matching
/// the phase-diagram axes (the loss site is always the mirror image).
pub fn build_gain_loss(spec: &LatticeSpec, gl: &GainLossSpec) -> Result<Hamiltonian> {
    if gl.m0 > spec.n / 2 {
        return Err(PtError::InvalidSpec(format!(
            "gain site m0 = {} must satisfy 1 <= m0 <= floor(N/2) = {}",
            gl.m0,
            spec.n / 2
        )));
    }
    let mut data = Array2::<Complex64>::zeros((spec.n, spec.n));
    data[[gl.m0 - 1, gl.m0 - 1]] = Complex64::new(0.0, gl.gamma);
    let loss = gl.loss_site(spec.n) - 1;
    data[[loss, loss]] = Complex64::new(0.0, -gl.gamma);
    Ok(Hamiltonian { n: spec.n, data, hermitian: gl.gamma == 0.0 })
}

/// Tunneling disorder: tridiagonal with `J λ r_k` on bond k (zero diagonal),
/// so that assembly with `H0` yields total hoppings `J_k = J(1 + λ r_k)`.
pub fn build_tunneling_disorder(
    spec: &LatticeSpec,
    d: &DisorderSpec,
    rz: &DisorderRealization,
) -> Result<Hamiltonian> {
    if d.kind != DisorderKind::Tunneling {
        return Err(PtError::KindMismatch("expected a tunneling DisorderSpec".into()));
    }
    if rz.expanded.len() != spec.n - 1 {
        return Err(PtError::DimensionMismatch(format!(
            "tunneling realization covers {} bonds; lattice has {}",
            rz.expanded.len(),
            spec.n - 1
        )));
    }
    let mut data = Array2::<Complex64>::zeros((spec.n, spec.n));
    for (k, &r) in rz.expanded.iter().enumerate() {
        let v = Complex64::new(spec.j * d.strength * r, 0.0);
        data[[k, k + 1]] = v;
        data[[k + 1, k]] = v;
    }
    Ok(Hamiltonian { n: spec.n, data, hermitian: true })
}

/// On-site disorder: diagonal matrix with site energies `V_k = J Δ r_k`.
pub fn build_onsite_disorder(
    spec: &LatticeSpec,
    d: &DisorderSpec,
    rz: &DisorderRealization,
) -> Result<Hamiltonian> {
    if d.kind != DisorderKind::OnSite {
        return Err(PtError::KindMismatch("expected an on-site DisorderSpec".into()));
    }
    if rz.expanded.len() != spec.n {
        return Err(PtError::DimensionMismatch(format!(
            "on-site realization covers {} sites; lattice has {}",
            rz.expanded.len(),
            spec.n
        )));
    }
    let mut data = Array2::<Complex64>::zeros((spec.n, spec.n));
    for (k, &r) in rz.expanded.iter().enumerate() {
        data[[k, k]] = Complex64::new(spec.j * d.strength * r, 0.0);
    }
    Ok(Hamiltonian { n: spec.n, data, hermitian: true })
}

/// Entrywise sum of operator parts; the result is flagged Hermitian iff every
/// part is.
pub fn assemble(parts: &[&Hamiltonian]) -> Result<Hamiltonian> {
    let first = parts
        .first()
        .ok_or_else(|| PtError::InvalidSpec("assemble needs at least one part".into()))?;
    let mut acc = (*first).clone();
    for part in &parts[1..] {
        acc = acc.add(part)?;
    }
    Ok(acc)
}

/// Convenience: the full disordered PT Hamiltonian `H0 + V + Γ` for one
/// realization (λ/Δ = 0 is fine; the disorder part is then a zero matrix).
pub fn assemble_pt(
    spec: &LatticeSpec,
    d: &DisorderSpec,
    rz: &DisorderRealization,
    gl: &GainLossSpec,
) -> Result<Hamiltonian> {
    let h0 = build_h0(spec);
    let v = match d.kind {
        DisorderKind::Tunneling => build_tunneling_disorder(spec, d, rz)?,
        DisorderKind::OnSite => build_onsite_disorder(spec, d, rz)?,
    };
    let g = build_gain_loss(spec, gl)?;
    assemble(&[&h0, &v, &g])
}

/// Hermitian part only: `H0 + V` for one realization.
pub fn assemble_hermitian(
    spec: &LatticeSpec,
    d: &DisorderSpec,
    rz: &DisorderRealization,
) -> Result<Hamiltonian> {
    let h0 = build_h0(spec);
    let v = match d.kind {
        DisorderKind::Tunneling => build_tunneling_disorder(spec, d, rz)?,
        DisorderKind::OnSite => build_onsite_disorder(spec, d, rz)?,
    };
    assemble(&[&h0, &v])
}
