//! Experiment pipelines: build library specs from the resolved
//! configuration, compute, and emit plot-ready CSV artifacts plus a JSON
//! summary for the manifest.
//!
//! Conventions shared by every pipeline:
//! * every CSV starts with a header row whose column names carry the units
//!   (`gamma_pt_over_J`, `x_um`, `z_cm`, …);
//! * energies are reported in units of J, times as Jt;
//! * all disorder randomness flows from the run seed through numbered
//!   streams, so artifacts are bitwise reproducible at any worker count.

use num_complex::Complex64;
use serde_json::json;

use ptlat::dynamics::{self, EvolutionConfig};
use ptlat::ensemble::{self, EnsembleSpec, Histogram};
use ptlat::model::{self, DisorderKind, DisorderRealization, DisorderSpec, GainLossSpec};
use ptlat::spectral::{self, ThresholdSearch};
use ptlat::symmetry;
use ptlat::{bpm, GridSpec, WaveguideArraySpec};

use crate::config::{DistArg, Experiment, RunConfig};
use crate::error::{cfg_err, run_err, CliError};
use crate::manifest::RunDir;

/// Executes the configured experiment and writes its run directory.
pub fn run(cfg: &RunConfig, notes: &[String]) -> Result<(), CliError> {
    println!("experiment: {}", cfg.experiment);
    let mut rd = RunDir::create(&cfg.output_dir, cfg.experiment.dir_name())?;
    println!("output: {}", rd.path().display());
    let summary = match cfg.experiment {
        Experiment::Threshold => threshold(cfg, &mut rd)?,
        Experiment::PhaseDiagram => phase_diagram(cfg, &mut rd)?,
        Experiment::Pdf => pdf(cfg, &mut rd)?,
        Experiment::Evolve => evolve(cfg, &mut rd)?,
        Experiment::Asymmetry => asymmetry(cfg, &mut rd)?,
        Experiment::Parity => parity(cfg, &mut rd)?,
        Experiment::Bpm => beam_propagation(cfg, &mut rd)?,
    };
    rd.finish(cfg, notes, summary)
}

/// Compact, round-trippable float formatting: plain decimal in the
/// human-friendly range, scientific notation outside it (Rust's `{}` never
/// switches to scientific and would print hundreds of digits for underflow-
/// scale intensities).
fn fmt_f(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e7).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// The disorder realization of stream `index` expanded over the lattice.
fn realization(
    d: &DisorderSpec,
    n: usize,
    index: u64,
) -> Result<DisorderRealization, CliError> {
    let base = ensemble::sample_base(d.distribution, d.period, d.seed, index);
    let target = match d.kind {
        DisorderKind::Tunneling => n - 1,
        DisorderKind::OnSite => n,
    };
    DisorderRealization::from_base(base, target).map_err(run_err)
}

/// γ_PT for one Hermitian background, either at the configured gain site or
/// swept over every site of the left half.
fn threshold(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let lat = cfg.lattice_spec()?;
    let d = cfg.disorder_spec()?;
    let search = ThresholdSearch {
        gamma_max: cfg.threshold.gamma_max * lat.j,
        tol: cfg.threshold.tol * lat.j,
    };
    let h = if cfg.disorder.strength > 0.0 {
        let rz = realization(&d, lat.n, cfg.threshold.index)?;
        model::assemble_hermitian(&lat, &d, &rz).map_err(run_err)?
    } else {
        model::build_h0(&lat)
    };
    let sites: Vec<usize> =
        if cfg.threshold.sweep_m0 { (1..=lat.n / 2).collect() } else { vec![cfg.gain.m0] };

    let mut csv = String::from(
        "m0,distance_d,gamma_pt_over_J,bracket_lo_over_J,bracket_hi_over_J,iterations,converged\n",
    );
    let (mut lo, mut hi, mut unconverged) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for &m0 in &sites {
        let r = spectral::find_threshold(&lat, &h, m0, &search).map_err(run_err)?;
        let g = r.gamma_pt / lat.j;
        csv.push_str(&format!(
            "{m0},{},{},{},{},{},{}\n",
            lat.n + 1 - 2 * m0,
            fmt_f(g),
            fmt_f(r.bracket_lo / lat.j),
            fmt_f(r.bracket_hi / lat.j),
            r.iterations,
            r.converged,
        ));
        lo = lo.min(g);
        hi = hi.max(g);
        unconverged += usize::from(!r.converged);
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;
    if sites.len() == 1 {
        println!("gamma_PT = {} J at m0 = {}", fmt_f(hi), sites[0]);
    } else {
        println!("gamma_PT/J over m0 = 1..={}: min {}, max {}", sites.len(), fmt_f(lo), fmt_f(hi));
    }
    Ok(json!({
        "sites": sites.len(),
        "gamma_pt_over_J_min": lo,
        "gamma_pt_over_J_max": hi,
        "unconverged": unconverged,
    }))
}

/// The full (gain site × disorder period) threshold map.
fn phase_diagram(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let lat = cfg.lattice_spec()?;
    let d = cfg.disorder_spec()?;
    let pd = spectral::phase_diagram(&lat, &d).map_err(run_err)?;

    let mut csv = String::from("m0,period_p,gamma_pt_over_J\n");
    let (mut max_g, mut finite) = (0.0f64, 0usize);
    for m0 in 1..=pd.half {
        for p in 1..=pd.half {
            let g = pd.gamma_pt(m0, p) / lat.j;
            csv.push_str(&format!("{m0},{p},{}\n", fmt_f(g)));
            max_g = max_g.max(g);
            // Unprotected cells sit at the bisection floor; 1e-3 J separates
            // them cleanly from genuinely finite thresholds.
            finite += usize::from(g > 1e-3);
        }
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;
    println!(
        "{} of {} cells have a finite threshold; largest gamma_PT = {} J",
        finite,
        pd.half * pd.half,
        fmt_f(max_g)
    );
    Ok(json!({
        "grid_half": pd.half,
        "finite_cells": finite,
        "gamma_pt_over_J_max": max_g,
    }))
}

/// Monte-Carlo distribution of γ_PT over disorder realizations, optionally
/// overlaying both draw distributions.
fn pdf(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let lat = cfg.lattice_spec()?;
    let d0 = cfg.disorder_spec()?;
    let dists: Vec<DistArg> = if cfg.ensemble.compare_distributions {
        vec![DistArg::Gaussian, DistArg::Uniform]
    } else {
        vec![cfg.disorder.distribution]
    };

    let mut csv = String::from(
        "distribution,bin_lo_gamma_over_J,bin_hi_gamma_over_J,count,probability_density\n",
    );
    let mut summary = serde_json::Map::new();
    let mut sample_sets: Vec<(DistArg, Vec<f64>)> = Vec::new();
    for &dist in &dists {
        let d = DisorderSpec { distribution: dist.to_distribution(), ..d0 };
        let es = EnsembleSpec::new(cfg.ensemble.m, cfg.seed, d, cfg.lattice_spec()?, cfg.gain.m0)
            .map_err(cfg_err)?;
        let raw = ensemble::threshold_pdf(
            &es,
            cfg.ensemble.gamma_max * lat.j,
            cfg.ensemble.tol * lat.j,
        )
        .map_err(run_err)?;
        // Rebin to the configured resolution (samples are γ/J already).
        let hist =
            Histogram::from_samples(raw.samples, raw.failures, cfg.ensemble.bins, cfg.ensemble.gamma_max)
                .map_err(run_err)?;
        for i in 0..cfg.ensemble.bins {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                dist.name(),
                fmt_f(hist.bin_edges[i]),
                fmt_f(hist.bin_edges[i + 1]),
                hist.counts[i],
                fmt_f(hist.density(i)),
            ));
        }
        let mo = ensemble::moments(&hist).map_err(run_err)?;
        println!(
            "{}: mean gamma_PT = {} J, excess kurtosis = {}",
            dist.name(),
            fmt_f(mo.mean),
            fmt_f(mo.excess_kurtosis)
        );
        summary.insert(
            dist.name().to_string(),
            json!({
                "mean_over_J": mo.mean,
                "variance": mo.variance,
                "skewness": mo.skewness,
                "excess_kurtosis": mo.excess_kurtosis,
                "min_over_J": mo.min,
                "max_over_J": mo.max,
                "samples_retained": hist.samples.len(),
                "failures": hist.failures,
            }),
        );
        sample_sets.push((dist, hist.samples));
    }
    if let [(_, a), (_, b)] = &sample_sets[..] {
        let ks = ensemble::ks_distance(a, b).map_err(run_err)?;
        println!("KS distance (gaussian vs uniform): {}", fmt_f(ks));
        summary.insert("ks_distance".to_string(), json!(ks));
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;
    let moments_json = serde_json::to_vec_pretty(&serde_json::Value::Object(summary.clone()))
        .map_err(run_err)?;
    rd.write_artifact("moments.json", &moments_json)?;
    Ok(serde_json::Value::Object(summary))
}

/// Disorder-averaged single-site excitation dynamics; with gain enabled the
/// CSV also carries the passive baseline for comparison.
fn evolve(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let lat = cfg.lattice_spec()?;
    let d = cfg.disorder_spec()?;
    let ec = EvolutionConfig::new(
        cfg.evolution.t_max / lat.j,
        cfg.evolution.steps,
        cfg.evolution.initial_site,
    )
    .map_err(cfg_err)?;
    let m = if cfg.disorder.strength > 0.0 { cfg.evolution.m } else { 1 };
    let gammas: Vec<f64> =
        if cfg.gain.gamma > 0.0 { vec![0.0, cfg.gain.gamma] } else { vec![0.0] };

    let mut csv = String::from("gamma_over_J,Jt,site_k,intensity\n");
    let mut runs = Vec::new();
    let mut classification = None;
    for &g in &gammas {
        let gain = if g > 0.0 {
            Some(GainLossSpec::new(cfg.gain.m0, g * lat.j).map_err(cfg_err)?)
        } else {
            None
        };
        let trace =
            dynamics::disorder_averaged_intensity(&lat, &d, gain.as_ref(), &ec, m).map_err(run_err)?;
        for (j_idx, &t) in trace.times.iter().enumerate() {
            let jt = t * lat.j;
            for k in 1..=lat.n {
                csv.push_str(&format!(
                    "{},{},{k},{}\n",
                    fmt_f(g),
                    fmt_f(jt),
                    fmt_f(trace.at(k, j_idx))
                ));
            }
        }
        let final_total = *trace.totals().last().expect("trace has at least one frame");
        if g > 0.0 {
            let phase = dynamics::classify_phase(&trace, lat.j, dynamics::DEFAULT_CLASSIFY_WINDOW);
            println!("classification: {phase}");
            classification = Some(phase.to_string());
        }
        runs.push(json!({ "gamma_over_J": g, "final_total_intensity": final_total }));
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;
    Ok(json!({
        "averaged_over": m,
        "initial_site": cfg.evolution.initial_site,
        "runs": runs,
        "classification": classification,
    }))
}

/// Site-resolved eigenbasis asymmetry A(k), aggregated over realizations
/// for each requested disorder period.
fn asymmetry(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let lat = cfg.lattice_spec()?;
    let d0 = cfg.disorder_spec()?;
    let n = lat.n;

    let mut csv = String::from("period_p,site_k,asymmetry_min,asymmetry_mean,asymmetry_max\n");
    let mut period_summaries = Vec::new();
    for &p in &cfg.asymmetry.periods {
        let d = DisorderSpec { period: p, ..d0 };
        let mut mins = vec![f64::INFINITY; n];
        let mut maxs = vec![f64::NEG_INFINITY; n];
        let mut sums = vec![0.0f64; n];
        for i in 0..cfg.asymmetry.m as u64 {
            let rz = realization(&d, n, i)?;
            let h = model::assemble_hermitian(&lat, &d, &rz).map_err(run_err)?;
            let spec = spectral::eig_hermitian(&h).map_err(run_err)?;
            let a = symmetry::asymmetry(&spec).map_err(run_err)?;
            for k in 0..n {
                mins[k] = mins[k].min(a[k]);
                maxs[k] = maxs[k].max(a[k]);
                sums[k] += a[k];
            }
        }
        let (mut worst_multiple, mut best_other) = (0.0f64, f64::INFINITY);
        for k in 1..=n {
            csv.push_str(&format!(
                "{p},{k},{},{},{}\n",
                fmt_f(mins[k - 1]),
                fmt_f(sums[k - 1] / cfg.asymmetry.m as f64),
                fmt_f(maxs[k - 1]),
            ));
            if k % p == 0 {
                worst_multiple = worst_multiple.max(maxs[k - 1]);
            } else {
                best_other = best_other.min(mins[k - 1]);
            }
        }
        println!(
            "p = {p}: max A over all realizations at multiples of p = {}, min elsewhere = {}",
            fmt_f(worst_multiple),
            fmt_f(best_other)
        );
        period_summaries.push(json!({
            "p": p,
            "max_at_period_multiples": worst_multiple,
            "min_at_other_sites": best_other,
        }));
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;
    Ok(json!({ "realizations": cfg.asymmetry.m, "periods": period_summaries }))
}

/// The generalized reflection Π of one disorder realization, as a full
/// matrix (long form) for heat-map plotting.
fn parity(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let lat = cfg.lattice_spec()?;
    let d = cfg.disorder_spec()?;
    let rz = realization(&d, lat.n, cfg.parity.index)?;
    let h = model::assemble_hermitian(&lat, &d, &rz).map_err(run_err)?;
    let spec = spectral::eig_hermitian(&h).map_err(run_err)?;
    // A near-degenerate spectrum aborts here (exit 3): Π is not defined.
    let pi = symmetry::pi_operator(&spec, symmetry::DEFAULT_GAP_FLOOR).map_err(run_err)?;

    let n = lat.n;
    let mut csv = String::from("row_k,col_k,pi_entry\n");
    for r in 1..=n {
        for c in 1..=n {
            csv.push_str(&format!("{r},{c},{}\n", fmt_f(pi.matrix[[r - 1, c - 1]])));
        }
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;

    let antidiagonal: Vec<f64> = (1..=n).map(|k| pi.antidiagonal(k)).collect();
    let mirror_entries =
        antidiagonal.iter().filter(|a| (a.abs() - 1.0).abs() <= 1e-8).count();
    println!("antidiagonal entries of magnitude 1: {mirror_entries} of {n}");
    let mut summary = json!({
        "antidiagonal": antidiagonal,
        "mirror_entries": mirror_entries,
        "min_eigenvalue_gap": spec.min_gap(),
    });
    if cfg.gain.gamma > 0.0 {
        let gl = cfg.gain_spec()?;
        let h_pt = model::assemble_pt(&lat, &d, &rz, &gl).map_err(run_err)?;
        let comm = symmetry::antilinear_commutator_norm(&h_pt, &pi).map_err(run_err)?;
        println!("||[PiT, H]||_F = {}", fmt_f(comm));
        summary["pt_commutator_fro"] = json!(comm);
    }
    Ok(summary)
}

/// Paraxial beam propagation through the configured waveguide array.
fn beam_propagation(cfg: &RunConfig, rd: &mut RunDir) -> Result<serde_json::Value, CliError> {
    let b = &cfg.bpm;
    let pattern = &b.contrast_pattern;
    let mut contrast: Vec<Complex64> =
        (0..b.guides).map(|i| Complex64::new(pattern[i % pattern.len()], 0.0)).collect();
    let passive = WaveguideArraySpec::new(
        b.guides,
        b.width_um,
        b.separation_um,
        b.cladding_index,
        b.wavelength_nm,
        contrast.clone(),
    )
    .map_err(cfg_err)?;

    let mut calibrated_im = 0.0;
    let spec = if b.gain_guide > 0 && b.gamma_cm != 0.0 {
        let im = bpm::calibrate_gain(b.gamma_cm, &passive).map_err(run_err)?;
        calibrated_im = im;
        contrast[b.gain_guide - 1].im = im;
        contrast[b.guides - b.gain_guide].im = -im;
        println!(
            "calibrated Im(contrast) = {} for {} 1/cm on guide {}",
            fmt_f(im),
            fmt_f(b.gamma_cm),
            b.gain_guide
        );
        WaveguideArraySpec::new(
            b.guides,
            b.width_um,
            b.separation_um,
            b.cladding_index,
            b.wavelength_nm,
            contrast,
        )
        .map_err(run_err)?
    } else {
        passive
    };

    let grid = GridSpec {
        dx_um: b.dx_um,
        x_extent_um: spec.span_um() + 2.0 * b.x_margin_um,
        dz_um: b.dz_um,
        z_extent_cm: b.z_extent_cm,
        absorber_width_um: b.absorber_width_um,
    };
    grid.validate_for(&spec).map_err(cfg_err)?;
    let launch = bpm::gaussian_initial_state(&spec, &grid, b.launch_guide).map_err(cfg_err)?;
    let map = bpm::propagate(&launch, &spec, &grid).map_err(run_err)?;
    let phase = bpm::classify_phase_bpm(&map);

    let mut csv = String::from("z_cm,x_um,intensity\n");
    for (fi, &z) in map.frame_z_cm.iter().enumerate() {
        for (xi, &x) in map.x_um.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_f(z),
                fmt_f(x),
                fmt_f(map.intensity[[fi, xi]])
            ));
        }
    }
    rd.write_artifact("data.csv", csv.as_bytes())?;

    let mut power = String::from("z_cm,total_power");
    for g in 1..=map.n_guides() {
        power.push_str(&format!(",power_guide_{g}"));
    }
    power.push('\n');
    for (zi, &z) in map.power_z_cm.iter().enumerate() {
        power.push_str(&format!("{},{}", fmt_f(z), fmt_f(map.total_power[zi])));
        for g in 0..map.n_guides() {
            power.push_str(&format!(",{}", fmt_f(map.guide_power[[zi, g]])));
        }
        power.push('\n');
    }
    rd.write_artifact("guide_power.csv", power.as_bytes())?;

    let launch_power = map.total_power.first().copied().unwrap_or(0.0);
    let final_power = map.total_power.last().copied().unwrap_or(0.0);
    println!("classification: {phase}");
    Ok(json!({
        "classification": phase.to_string(),
        "gain_guide": map.gain_guide,
        "calibrated_im_contrast": calibrated_im,
        "launch_power": launch_power,
        "final_power": final_power,
        "power_ratio": if launch_power > 0.0 { final_power / launch_power } else { 0.0 },
    }))
}
