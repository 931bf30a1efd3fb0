//! Reproducible disorder ensembles and threshold statistics.
//!
//! Sampling is counter-based: the k-th draw of realization `index` under a
//! given `seed` is a pure function of `(seed, index, k)`, independent of
//! evaluation order and worker count. Realizations are therefore safe to
//! evaluate in parallel, and every reduction below collects results in
//! realization order so ensemble outputs are bitwise reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{PtError, Result};
use crate::model::{
    assemble_hermitian, DisorderKind, DisorderRealization, DisorderSpec, Distribution,
    LatticeSpec,
};
use crate::spectral::{find_threshold, ThresholdSearch};
use crate::symmetry::protection_predicate;

/// Half-width of the zero-mean unit-variance uniform distribution.
pub const UNIFORM_HALF_WIDTH: f64 = 1.732_050_807_568_877_2; // √3

/// A disorder ensemble: `M` independent realizations of `disorder` on
/// `lattice`, probed at gain site `gain_site`.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec {
    /// Realization count M ≥ 1.
    pub m: usize,
    /// Stream seed for the whole ensemble (realization i uses stream index i).
    pub seed: u64,
    pub disorder: DisorderSpec,
    pub lattice: LatticeSpec,
    /// Gain site m0 (1-based).
    pub gain_site: usize,
}

impl EnsembleSpec {
    pub fn new(
        m: usize,
        seed: u64,
        disorder: DisorderSpec,
        lattice: LatticeSpec,
        gain_site: usize,
    ) -> Result<Self> {
        if m == 0 {
            return Err(PtError::InvalidSpec("ensemble needs M >= 1".into()));
        }
        Ok(Self { m, seed, disorder, lattice, gain_site })
    }
}

/// Draws the `p` i.i.d. base values of realization `index`: standard normal
/// draws for [`Distribution::Gaussian`], uniform on `[−√3, √3]` for
/// [`Distribution::Uniform`] (the support forced by zero mean / unit
/// variance). Identical `(seed, index)` always reproduce the same vector,
/// bitwise.
pub fn sample_base(dist: Distribution, p: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    match dist {
        Distribution::Gaussian => {
            (0..p).map(|_| rng.sample(rand_distr::StandardNormal)).collect()
        }
        Distribution::Uniform => {
            let u = rand::distr::Uniform::new_inclusive(-UNIFORM_HALF_WIDTH, UNIFORM_HALF_WIDTH)
                .expect("static bounds are valid");
            (0..p).map(|_| rng.sample(u)).collect()
        }
    }
}

/// Thresholds sampled from an ensemble, in units of J, in realization order.
#[derive(Debug, Clone)]
pub struct ThresholdSamples {
    /// γ_PT/J per successful realization (realization order preserved).
    pub samples: Vec<f64>,
    /// Realizations whose threshold search failed (recorded, excluded).
    pub failures: usize,
}

impl ThresholdSamples {
    pub fn min(&self) -> Option<f64> {
        self.samples.iter().copied().reduce(f64::min)
    }
}

/// Runs `find_threshold` over all M realizations of the ensemble. Realization
/// i draws its base from stream `(es.seed, i)`; evaluation is parallel with
/// an ordered collect, so the sample vector is a pure function of the spec.
pub fn sample_thresholds(es: &EnsembleSpec, search: &ThresholdSearch) -> Result<ThresholdSamples> {
    let outcomes: Vec<std::result::Result<f64, String>> = (0..es.m)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<f64> {
                let base =
                    sample_base(es.disorder.distribution, es.disorder.period, es.seed, i as u64);
                let target = match es.disorder.kind {
                    DisorderKind::Tunneling => es.lattice.n - 1,
                    DisorderKind::OnSite => es.lattice.n,
                };
                let rz = DisorderRealization::from_base(base, target)?;
                let h = assemble_hermitian(&es.lattice, &es.disorder, &rz)?;
                let r = find_threshold(&es.lattice, &h, es.gain_site, search)?;
                Ok(r.gamma_pt / es.lattice.j)
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let mut samples = Vec::with_capacity(es.m);
    let mut failures = 0usize;
    for o in outcomes {
        match o {
            Ok(g) => samples.push(g),
            Err(msg) => {
                log::warn!("realization excluded from ensemble: {msg}");
                failures += 1;
            }
        }
    }
    if samples.is_empty() {
        return Err(PtError::Numerical("every ensemble realization failed".into()));
    }
    Ok(ThresholdSamples { samples, failures })
}

/// A binned threshold distribution (all values in units of J).
#[derive(Debug, Clone)]
pub struct Histogram {
    /// `bins + 1` uniformly spaced edges over `[0, gamma_max/J]`.
    pub bin_edges: Vec<f64>,
    /// Occupancy per bin; the last bin is closed on the right, so samples at
    /// exactly `gamma_max/J` are counted.
    pub counts: Vec<u64>,
    /// The raw samples (needed by moments and KS comparisons).
    pub samples: Vec<f64>,
    /// Realizations excluded due to solver failure.
    pub failures: usize,
}

impl Histogram {
    /// Bins `samples` into `bins` uniform bins over `[0, hi]`.
    pub fn from_samples(samples: Vec<f64>, failures: usize, bins: usize, hi: f64) -> Result<Self> {
        if bins == 0 || !(hi > 0.0) {
            return Err(PtError::InvalidSpec(format!(
                "histogram needs bins >= 1 and hi > 0, got bins = {bins}, hi = {hi}"
            )));
        }
        let width = hi / bins as f64;
        let bin_edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &s in &samples {
            let idx = ((s / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Self { bin_edges, counts, samples, failures })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Probability density of bin i (counts normalized by total and width).
    pub fn density(&self, i: usize) -> f64 {
        let width = self.bin_edges[i + 1] - self.bin_edges[i];
        self.counts[i] as f64 / (self.total() as f64 * width)
    }
}

/// Monte-Carlo PDF of γ_PT/J: M realizations, 100 bins over `[0, gamma_max]`.
/// If the (N, p, m0, kind) cell is unprotected a warning is logged — the
/// distribution then collapses at zero.
pub fn threshold_pdf(es: &EnsembleSpec, gamma_max: f64, tol: f64) -> Result<Histogram> {
    if !protection_predicate(
        es.lattice.n,
        es.disorder.period,
        es.gain_site,
        es.disorder.kind,
    ) {
        log::warn!(
            "unprotected cell (N = {}, p = {}, m0 = {}): threshold will be numerically zero",
            es.lattice.n,
            es.disorder.period,
            es.gain_site
        );
    }
    let search = ThresholdSearch { gamma_max, tol };
    let ts = sample_thresholds(es, &search)?;
    Histogram::from_samples(ts.samples, ts.failures, 100, gamma_max / es.lattice.j)
}

/// Summary statistics of a sample set.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased sample variance (divisor n − 1).
    pub variance: f64,
    /// Central-moment ratio m₃/m₂^{3/2} (0 for constant samples).
    pub skewness: f64,
    /// m₄/m₂² − 3 (0 for constant samples, by convention).
    pub excess_kurtosis: f64,
    pub min: f64,
    pub max: f64,
}

/// Moments of the retained raw samples. Kurtosis requires at least four
/// samples.
pub fn moments(h: &Histogram) -> Result<Moments> {
    let xs = &h.samples;
    if xs.len() < 4 {
        return Err(PtError::InsufficientSamples(format!(
            "kurtosis needs M >= 4 samples, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let m2 = s2 / n;
    let (skewness, excess_kurtosis) = if m2 == 0.0 {
        (0.0, 0.0)
    } else {
        ((s3 / n) / m2.powf(1.5), (s4 / n) / (m2 * m2) - 3.0)
    };
    Ok(Moments {
        mean,
        variance: s2 / (n - 1.0),
        skewness,
        excess_kurtosis,
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Two-sample Kolmogorov–Smirnov distance: the sup-norm difference between
/// the empirical CDFs.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(PtError::InsufficientSamples("KS distance needs non-empty samples".into()));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let t = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= t {
            i += 1;
        }
        while j < xb.len() && xb[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Empirical minimum threshold γ_min/J of the ensemble (the largest γ that is
/// below threshold for *every* sampled realization).
pub fn min_threshold(es: &EnsembleSpec) -> Result<f64> {
    let search = ThresholdSearch::defaults(&es.lattice);
    let ts = sample_thresholds(es, &search)?;
    ts.min().ok_or_else(|| PtError::Numerical("no successful realizations".into()))
}
