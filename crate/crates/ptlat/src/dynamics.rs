//! Time evolution under `G(t) = exp(−iHt)` and dynamical phase detection.
//!
//! Hermitian and well-conditioned non-Hermitian Hamiltonians evolve through
//! their spectral decomposition (one factorization, any number of times).
//! Near exceptional points the eigenbasis degenerates, so the propagator
//! falls back to a scaling-and-squaring matrix exponential with a degree-13
//! Padé approximant, which needs no diagonalizability at all.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{PtError, Result};
use crate::model::{
    assemble_hermitian, assemble_pt, DisorderKind, DisorderRealization, DisorderSpec,
    GainLossSpec, Hamiltonian, LatticeSpec,
};
use crate::spectral::{eig_general, eig_hermitian};

/// Eigenvector condition number above which the spectral propagator is
/// abandoned for the Padé exponential.
pub const SPECTRAL_COND_LIMIT: f64 = 1e8;

/// Fraction of the trace used by [`classify_phase`] for the growth fit.
pub const DEFAULT_CLASSIFY_WINDOW: f64 = 0.5;

/// Dynamical phase of a gain/loss lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Bounded, quasi-periodic total intensity (real spectrum).
    Symmetric,
    /// Exponential intensity growth (complex eigenvalue pair).
    Broken,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Symmetric => write!(f, "Symmetric"),
            Phase::Broken => write!(f, "Broken"),
        }
    }
}

/// Parameters of a single-excitation evolution run.
#[derive(Debug, Clone, Copy)]
pub struct EvolutionConfig {
    /// Final time (in units of 1/J when J = 1).
    pub t_max: f64,
    /// Number of uniform steps; the trace holds `n_steps + 1` frames.
    pub n_steps: usize,
    /// Initially excited site (1-based).
    pub initial_site: usize,
}

impl EvolutionConfig {
    pub fn new(t_max: f64, n_steps: usize, initial_site: usize) -> Result<Self> {
        if !(t_max > 0.0) || n_steps == 0 || initial_site == 0 {
            return Err(PtError::InvalidSpec(format!(
                "evolution needs t_max > 0, n_steps >= 1, initial_site >= 1; \
                 got t_max = {t_max}, n_steps = {n_steps}, initial_site = {initial_site}"
            )));
        }
        Ok(Self { t_max, n_steps, initial_site })
    }
}

/// Site-resolved intensity `I(k, t) = |ψ_k(t)|²` on a uniform time grid.
#[derive(Debug, Clone)]
pub struct IntensityTrace {
    /// `n_steps + 1` sample times from 0 to `t_max`.
    pub times: Vec<f64>,
    /// Row k−1 holds site k; column j holds time `times[j]`.
    pub intensity: Array2<f64>,
    /// Number of disorder realizations averaged into this trace (1 = single).
    pub averaged_over: usize,
}

impl IntensityTrace {
    pub fn n_sites(&self) -> usize {
        self.intensity.nrows()
    }

    /// Intensity at 1-based site k and time index j.
    pub fn at(&self, k: usize, j: usize) -> f64 {
        self.intensity[[k - 1, j]]
    }

    /// Total intensity Σ_k I(k, t_j) per time index.
    pub fn totals(&self) -> Vec<f64> {
        (0..self.times.len()).map(|j| self.intensity.column(j).sum()).collect()
    }

    /// Time-averaged intensity of 1-based site k over the whole trace.
    pub fn time_average(&self, k: usize) -> f64 {
        self.intensity.row(k - 1).mean().unwrap_or(0.0)
    }
}

struct SpectralDecomp {
    values: Vec<Complex64>,
    v: Array2<Complex64>,
    vinv: Array2<Complex64>,
}

impl SpectralDecomp {
    /// `G(t) = V diag(e^{−iλt}) V⁻¹` applied as a matrix.
    fn propagator(&self, t: f64) -> Array2<Complex64> {
        let mut scaled = self.v.clone();
        for (alpha, &lambda) in self.values.iter().enumerate() {
            let phase = (-Complex64::i() * lambda * t).exp();
            scaled.column_mut(alpha).mapv_inplace(|z| z * phase);
        }
        scaled.dot(&self.vinv)
    }
}

/// Diagonalizes H if it is safe to use the eigenbasis for propagation:
/// Hermitian matrices always are; general matrices only when the eigenvector
/// matrix is numerically invertible (condition number below
/// [`SPECTRAL_COND_LIMIT`]).
fn decompose(h: &Hamiltonian) -> Result<Option<SpectralDecomp>> {
    use ndarray_linalg::{Inverse, SVD};
    if h.is_hermitian() {
        let spec = eig_hermitian(h)?;
        let vinv = spec.vectors.t().mapv(|z| z.conj());
        return Ok(Some(SpectralDecomp { values: spec.values, v: spec.vectors, vinv }));
    }
    let spec = eig_general(h)?;
    let (_, s, _) = spec.vectors.svd(false, false)?;
    let (smax, smin) = (s[0], s[s.len() - 1]);
    if smin <= 0.0 || smax / smin >= SPECTRAL_COND_LIMIT {
        return Ok(None);
    }
    let vinv = spec.vectors.inv()?;
    Ok(Some(SpectralDecomp { values: spec.values, v: spec.vectors, vinv }))
}

/// The propagator `G(t) = exp(−iHt)` as a dense matrix.
pub fn propagator(h: &Hamiltonian, t: f64) -> Result<Array2<Complex64>> {
    match decompose(h)? {
        Some(d) => Ok(d.propagator(t)),
        None => {
            let a = h.matrix().mapv(|z| -Complex64::i() * z * t);
            expm(&a)
        }
    }
}

/// Matrix 1-norm (maximum absolute column sum).
fn one_norm(a: &Array2<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a diagonal Padé approximant of
/// degree 13, the standard choice balancing work against round-off for
/// double precision.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    use ndarray_linalg::Inverse;
    if a.nrows() != a.ncols() {
        return Err(PtError::DimensionMismatch(format!(
            "matrix exponential needs a square matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    const THETA_13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(PtError::Numerical("matrix exponential of non-finite matrix".into()));
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new((0.5f64).powi(squarings as i32), 0.0);
    let a1 = a.mapv(|z| z * scale);
    let c = |k: usize| Complex64::new(B[k], 0.0);
    let eye = Array2::<Complex64>::eye(n);
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = &(&a6 * c(13)) + &(&a4 * c(11)) + &(&a2 * c(9));
    let u = a1.dot(
        &(a6.dot(&u_inner) + &(&a6 * c(7)) + &(&a4 * c(5)) + &(&a2 * c(3)) + &(&eye * c(1))),
    );
    let v_inner = &(&a6 * c(12)) + &(&a4 * c(10)) + &(&a2 * c(8));
    let v = a6.dot(&v_inner) + &(&a6 * c(6)) + &(&a4 * c(4)) + &(&a2 * c(2)) + &(&eye * c(0));
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den.inv()?.dot(&num);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Evolves a single-site excitation and records `|ψ_k(t)|²` on a uniform
/// grid. The Hamiltonian is factorized once; all time samples reuse it.
pub fn evolve(h: &Hamiltonian, config: &EvolutionConfig) -> Result<IntensityTrace> {
    let n = h.dim();
    if config.initial_site > n {
        return Err(PtError::InvalidSpec(format!(
            "initial site {} outside 1..={n}",
            config.initial_site
        )));
    }
    let times: Vec<f64> =
        (0..=config.n_steps).map(|j| config.t_max * j as f64 / config.n_steps as f64).collect();
    let mut intensity = Array2::<f64>::zeros((n, config.n_steps + 1));

    match decompose(h)? {
        Some(d) => {
            // c = V⁻¹ e_{k0} is a column of V⁻¹
            let c: Array1<Complex64> = d.vinv.column(config.initial_site - 1).to_owned();
            for (j, &t) in times.iter().enumerate() {
                let amps: Array1<Complex64> = Array1::from_iter(
                    d.values
                        .iter()
                        .zip(c.iter())
                        .map(|(&lambda, &ca)| (-Complex64::i() * lambda * t).exp() * ca),
                );
                let psi = d.v.dot(&amps);
                for k in 0..n {
                    intensity[[k, j]] = psi[k].norm_sqr();
                }
            }
        }
        None => {
            let dt = config.t_max / config.n_steps as f64;
            let g = expm(&h.matrix().mapv(|z| -Complex64::i() * z * dt))?;
            let mut psi = Array1::<Complex64>::zeros(n);
            psi[config.initial_site - 1] = Complex64::new(1.0, 0.0);
            for j in 0..=config.n_steps {
                for k in 0..n {
                    intensity[[k, j]] = psi[k].norm_sqr();
                }
                if j < config.n_steps {
                    psi = g.dot(&psi);
                }
            }
        }
    }
    Ok(IntensityTrace { times, intensity, averaged_over: 1 })
}

/// Disorder-averaged intensity ⟨I(k, t)⟩ over `m` realizations drawn from
/// `disorder`'s seed (realization i uses stream index i). With `gain = None`
/// the evolution is Hermitian. Realizations run in parallel; the average is
/// accumulated in realization order, so the result is bitwise reproducible.
pub fn disorder_averaged_intensity(
    lattice: &LatticeSpec,
    disorder: &DisorderSpec,
    gain: Option<&GainLossSpec>,
    config: &EvolutionConfig,
    m: usize,
) -> Result<IntensityTrace> {
    if m == 0 {
        return Err(PtError::InvalidSpec("averaging needs at least one realization".into()));
    }
    let traces: Vec<Result<IntensityTrace>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let base = crate::ensemble::sample_base(
                disorder.distribution,
                disorder.period,
                disorder.seed,
                i as u64,
            );
            let target = match disorder.kind {
                DisorderKind::Tunneling => lattice.n - 1,
                DisorderKind::OnSite => lattice.n,
            };
            let rz = DisorderRealization::from_base(base, target)?;
            let h = match gain {
                Some(g) => assemble_pt(lattice, disorder, &rz, g)?,
                None => assemble_hermitian(lattice, disorder, &rz)?,
            };
            evolve(&h, config)
        })
        .collect();

    let mut mean: Option<Array2<f64>> = None;
    let mut times = Vec::new();
    for t in traces {
        let t = t?;
        times = t.times;
        match &mut mean {
            None => mean = Some(t.intensity),
            Some(acc) => *acc += &t.intensity,
        }
    }
    let mut intensity = mean.expect("m >= 1");
    intensity.mapv_inplace(|x| x / m as f64);
    Ok(IntensityTrace { times, intensity, averaged_over: m })
}

/// Classifies a trace as [`Phase::Broken`] iff the log-total-intensity slope
/// over the trailing `window` fraction exceeds `1e−3·J` **and** the final
/// total exceeds ten times the initial total. Everything else — bounded
/// oscillation, decay, transient growth that saturates — is
/// [`Phase::Symmetric`].
pub fn classify_phase(trace: &IntensityTrace, j: f64, window: f64) -> Phase {
    let totals = trace.totals();
    let len = totals.len();
    if len < 2 {
        return Phase::Symmetric;
    }
    let tail = ((window * len as f64).ceil() as usize).clamp(2, len);
    let start = len - tail;
    let ts = &trace.times[start..];
    let ys: Vec<f64> = totals[start..].iter().map(|&s| s.max(f64::MIN_POSITIVE).ln()).collect();
    let tbar = ts.iter().sum::<f64>() / tail as f64;
    let ybar = ys.iter().sum::<f64>() / tail as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &y) in ts.iter().zip(&ys) {
        num += (t - tbar) * (y - ybar);
        den += (t - tbar) * (t - tbar);
    }
    if den == 0.0 {
        return Phase::Symmetric;
    }
    let slope = num / den;
    let grew = totals[len - 1] > 10.0 * totals[0];
    if slope > 1e-3 * j && grew {
        Phase::Broken
    } else {
        Phase::Symmetric
    }
}
