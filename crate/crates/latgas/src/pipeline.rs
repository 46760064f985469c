//! The artifact pipeline. Each stage reads the job description (and the
//! artifacts of earlier stages), writes its outputs into the result
//! directory, and refreshes the checksum manifest. Every stage is
//! deterministic: rerunning with the same job and seed reproduces each
//! artifact byte for byte.
//!
//! Stages and their artifacts:
//! - check: `conditions.txt` — model summary and regime conditions.
//! - simulate: `samples.bin`, `stats.txt` — recorded configurations and
//!   chain diagnostics.
//! - analyze: `correlations_spin.tsv`, `correlations_density.tsv`,
//!   `fits.txt` (plus `stats.txt` in exact mode).
//! - diffract: `spectrum.tsv`, `structure_factor.tsv`, `checks.txt`.
//! - report: `report.md` — a human summary quoting the verified manifest
//!   (and therefore itself outside it).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{AnalysisMode, JobConfig};
use crate::correlation::{
    estimate_correlations, fit_algebraic, fit_exponential, fit_oz, spin_to_density,
    tail_certificate, CorrelationTable, DecayFit, FitWindow,
};
use crate::diffraction::{
    bragg_maxima_check, bragg_weight_estimate, density_series, empirical_structure_factor,
    evenness_check, parseval_check, periodicity_check, positivity_check, smoothness_indicator,
    two_route_check, CheckStatus, PropertyReport, SmoothnessClass, DEFAULT_BRAGG_WEIGHT,
};
use crate::error::{Error, Result};
use crate::io;
use crate::lattice::LatticeTorus;
use crate::model::{alg_moment, dobrushin_check, exp_moment, LatticeBasis, CONVENTION_TAG};
use crate::oracle::enumerate_exact;
use crate::sampler::{parallel_chains, run, RunParams, SampleStats};
use crate::stats::{batch_means, DEFAULT_BATCHES};

/// Command-line overrides that beat the job file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
}

pub fn resolve_out_dir(job: &JobConfig, ov: &Overrides) -> PathBuf {
    ov.out_dir
        .clone()
        .or_else(|| job.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("latgas-out"))
}

fn effective_seed(job: &JobConfig, ov: &Overrides) -> u64 {
    ov.seed.unwrap_or(job.run.seed)
}

fn effective_chains(job: &JobConfig, ov: &Overrides) -> usize {
    ov.chains.or(job.run.chains).unwrap_or(1)
}

fn kv(key: impl Into<String>, value: impl Into<String>) -> (String, String) {
    (key.into(), value.into())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn join_usize(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Evaluates the regime conditions for the configured model and writes
/// `conditions.txt`. Failing a condition is a finding, not an error: the
/// stage succeeds whenever the model itself is well formed.
pub fn cmd_check(job: &JobConfig, ov: &Overrides) -> Result<PathBuf> {
    let coupling = job.coupling_map()?;
    let torus = LatticeTorus::new(&job.run.lengths)?;
    torus.admits_range(coupling.range())?;
    let beta = job.run.beta;
    let mut pairs = vec![
        kv("convention", CONVENTION_TAG),
        kv("dimension", job.model.dimension.to_string()),
        kv("lengths", join_usize(&job.run.lengths)),
        kv("n_sites", torus.n_sites().to_string()),
        kv("beta", fmt(beta)),
        kv(
            "coupling_support",
            format!("{} displacements", coupling.support_size()),
        ),
        kv("coupling_range", fmt(coupling.range())),
        kv("ferromagnetic", coupling.is_ferromagnetic().to_string()),
    ];
    if let Some(basis) = &job.model.basis {
        let b = LatticeBasis::new(&basis.matrix)?;
        pairs.push(kv("basis_spectral_norm", fmt(b.spectral_norm())));
    }
    if beta > 0.0 {
        let report = dobrushin_check(&coupling, beta)?;
        pairs.push(kv(
            "uniqueness_tanh",
            format!(
                "beta * sum over r != 0 of tanh|J(r)| = {}; uniqueness of the Gibbs state needs < 1 (strict): {}",
                fmt(report.sum),
                if report.holds { "holds" } else { "fails" }
            ),
        ));
        pairs.push(kv(
            "uniqueness_abs",
            format!(
                "beta * sum over r != 0 of |J(r)| = {}; the coarser sufficient variant needs <= 1: {}",
                fmt(report.sufficient_sum),
                if report.sufficient_holds { "holds" } else { "fails" }
            ),
        ));
        if let Some(t) = job.analysis.exp_moment_t {
            pairs.push(kv(
                "exp_moment",
                format!(
                    "beta * sum over r != 0 of e^(t*||r||) |J(r)| at t = {t} = {}; finite, so exponentially weighted coupling moments exist",
                    fmt(exp_moment(&coupling, beta, t)?)
                ),
            ));
        }
        if let Some(p) = job.analysis.alg_moment_p {
            pairs.push(kv(
                "alg_moment",
                format!(
                    "beta * sum over r != 0 of ||r||^p |J(r)| at p = {p} = {}; finite, so the p-th coupling moment exists",
                    fmt(alg_moment(&coupling, beta, p)?)
                ),
            ));
        }
    } else {
        pairs.push(kv(
            "uniqueness_tanh",
            "beta = 0: spins are independent, the product measure is the unique Gibbs state",
        ));
    }
    let dir = resolve_out_dir(job, ov);
    ensure_dir(&dir)?;
    let path = dir.join("conditions.txt");
    io::write_key_values(&path, &pairs)?;
    io::write_manifest(&dir)?;
    Ok(path)
}

fn stats_pairs(prefix: &str, stats: &SampleStats) -> Vec<(String, String)> {
    vec![
        kv(format!("{prefix}n_samples"), stats.n_samples.to_string()),
        kv(format!("{prefix}mean_spin"), fmt(stats.mean_spin)),
        kv(
            format!("{prefix}mean_spin_std_err"),
            fmt(stats.mean_spin_std_err),
        ),
        kv(
            format!("{prefix}mean_energy_per_site"),
            fmt(stats.mean_energy_per_site),
        ),
        kv(
            format!("{prefix}mean_energy_per_site_std_err"),
            fmt(stats.mean_energy_per_site_std_err),
        ),
        kv(
            format!("{prefix}integrated_autocorr_sweeps"),
            fmt(stats.integrated_autocorr_sweeps),
        ),
    ]
}

/// Runs the configured chain(s) and writes `samples.bin` and `stats.txt`.
pub fn cmd_simulate(job: &JobConfig, ov: &Overrides) -> Result<PathBuf> {
    let coupling = job.coupling_map()?;
    let torus = LatticeTorus::new(&job.run.lengths)?;
    let seed = effective_seed(job, ov);
    let chains = effective_chains(job, ov);
    if chains == 0 {
        return Err(Error::InvalidParams("chain count must be at least 1".into()));
    }
    let params = RunParams {
        torus,
        coupling,
        beta: job.run.beta,
        seed,
        algorithm: job.algorithm(),
        burn_in_sweeps: job.run.burn_in_sweeps,
        n_samples: job.run.n_samples,
        thin_sweeps: job.run.thin_sweeps,
    };
    let mut pairs = vec![
        kv("convention", CONVENTION_TAG),
        kv("lengths", join_usize(&job.run.lengths)),
        kv("beta", fmt(job.run.beta)),
        kv("algorithm", params.algorithm.as_str()),
        kv("seed", seed.to_string()),
        kv("chains", chains.to_string()),
        kv("thin_sweeps", job.run.thin_sweeps.to_string()),
    ];
    let dir = resolve_out_dir(job, ov);
    ensure_dir(&dir)?;
    let meta = io::SampleFileMeta {
        lengths: job.run.lengths.clone(),
        beta: job.run.beta,
        seed,
        algorithm: params.algorithm,
    };
    if chains == 1 {
        let out = run(&params)?;
        pairs.push(kv("burn_in_sweeps", out.burn_in_used.to_string()));
        if let Some(a) = out.acceptance_rate {
            pairs.push(kv("acceptance_rate", fmt(a)));
        }
        if let Some(c) = out.mean_cluster_size {
            pairs.push(kv("mean_cluster_size", fmt(c)));
        }
        pairs.extend(stats_pairs("", &out.stats));
        io::write_samples(&dir.join("samples.bin"), &meta, &out.samples)?;
    } else {
        let merged = parallel_chains(&params, chains)?;
        for (i, ch) in merged.chains.iter().enumerate() {
            let mut line = format!(
                "seed {} burn_in {} autocorr_sweeps {:.3}",
                ch.seed, ch.burn_in_used, ch.stats.integrated_autocorr_sweeps
            );
            if let Some(a) = ch.acceptance_rate {
                let _ = write!(line, " acceptance {a:.4}");
            }
            if let Some(c) = ch.mean_cluster_size {
                let _ = write!(line, " mean_cluster {c:.2}");
            }
            pairs.push(kv(format!("chain_{i}"), line));
        }
        pairs.extend(stats_pairs("", &merged.stats));
        io::write_samples(&dir.join("samples.bin"), &meta, &merged.samples)?;
    }
    io::write_key_values(&dir.join("stats.txt"), &pairs)?;
    io::write_manifest(&dir)?;
    Ok(dir)
}

fn smoothness_class_str(class: &SmoothnessClass) -> String {
    match class {
        SmoothnessClass::SmoothAllOrders => "smooth-all-orders".into(),
        SmoothnessClass::FinitelyDifferentiable(k) => format!("{k}-times-differentiable"),
        SmoothnessClass::Continuous => "continuous".into(),
        SmoothnessClass::Uncertified => "uncertified".into(),
    }
}

fn fit_pairs(label: &str, fit: &DecayFit) -> Vec<(String, String)> {
    let mut pairs = vec![
        kv(format!("{label}.amplitude"), fmt(fit.amplitude)),
        kv(format!("{label}.rate"), fmt(fit.rate)),
        kv(format!("{label}.residual_rms"), fmt(fit.residual_rms)),
        kv(format!("{label}.n_points"), fit.n_points.to_string()),
        kv(format!("{label}.poor_fit"), fit.poor_fit.to_string()),
    ];
    if let Some(se) = fit.rate_std_err {
        pairs.insert(2, kv(format!("{label}.rate_std_err"), fmt(se)));
    }
    if let Some(note) = &fit.note {
        pairs.push(kv(format!("{label}.note"), note.clone()));
    }
    pairs
}

/// Builds the correlation tables (sampled or exact), fits decay laws, and
/// writes `correlations_spin.tsv`, `correlations_density.tsv`, `fits.txt`.
/// In exact mode this stage also writes `stats.txt`, since no chain ran.
pub fn cmd_analyze(job: &JobConfig, ov: &Overrides) -> Result<PathBuf> {
    let dir = resolve_out_dir(job, ov);
    ensure_dir(&dir)?;
    let coupling = job.coupling_map()?;
    let window = job.analysis_window();
    let table = match job.analysis.mode {
        AnalysisMode::Mcmc => {
            let path = dir.join("samples.bin");
            if !path.is_file() {
                return Err(Error::MissingArtifact(format!(
                    "{} (run the simulate stage first)",
                    path.display()
                )));
            }
            let (meta, samples) = io::read_samples(&path)?;
            if meta.lengths != job.run.lengths || meta.beta != job.run.beta {
                return Err(Error::Config(format!(
                    "sample stream was recorded for lengths {:?} at beta {}, but the job says {:?} at {}",
                    meta.lengths, meta.beta, job.run.lengths, job.run.beta
                )));
            }
            let mut table = estimate_correlations(&samples, &window)?;
            table.beta = Some(meta.beta);
            table.ferromagnetic_model = Some(coupling.is_ferromagnetic());
            table
        }
        AnalysisMode::Exact => {
            let torus = LatticeTorus::new(&job.run.lengths)?;
            let exact = enumerate_exact(&torus, &coupling, job.run.beta, &window)?;
            let pairs = vec![
                kv("convention", CONVENTION_TAG),
                kv("lengths", join_usize(&job.run.lengths)),
                kv("beta", fmt(job.run.beta)),
                kv("source", "exact enumeration"),
                kv("log_partition", fmt(exact.log_partition)),
                kv("mean_spin", fmt(exact.mean_spin)),
                kv("mean_spin_std_err", fmt(0.0)),
                kv("mean_energy_per_site", fmt(exact.mean_energy_per_site)),
                kv("mean_energy_per_site_std_err", fmt(0.0)),
                kv("max_abs_site_mean", fmt(exact.max_abs_site_mean)),
            ];
            io::write_key_values(&dir.join("stats.txt"), &pairs)?;
            exact.correlations
        }
    };
    io::write_correlation_table(&dir.join("correlations_spin.tsv"), &table)?;
    let density = spin_to_density(&table)?;
    io::write_correlation_table(&dir.join("correlations_density.tsv"), &density)?;

    let d = table.dimension();
    let max_r = window.iter().copied().min().unwrap_or(0) as f64;
    let mut pairs = vec![
        kv("convention", CONVENTION_TAG),
        kv("window", join_usize(&window)),
        kv("certified_window", table.certified_window().to_string()),
        kv("fit_r_min", fmt(job.analysis.fit_r_min)),
        kv("fit_r_max", fmt(max_r)),
    ];
    let mut best: Option<DecayFit> = None;
    if max_r > job.analysis.fit_r_min {
        let fw = FitWindow::new(job.analysis.fit_r_min, max_r)?;
        match fit_exponential(&table, fw) {
            Ok(fit) => {
                pairs.extend(fit_pairs("exponential", &fit));
                if !fit.poor_fit {
                    best = Some(fit);
                }
            }
            Err(e) => pairs.push(kv("exponential", format!("not fit: {e}"))),
        }
        match fit_algebraic(&table, fw) {
            Ok(fit) => {
                pairs.extend(fit_pairs("algebraic", &fit));
                if best.is_none() && !fit.poor_fit {
                    best = Some(fit);
                }
            }
            Err(e) => pairs.push(kv("algebraic", format!("not fit: {e}"))),
        }
        let mut direction = vec![0i64; d];
        direction[0] = 1;
        match fit_oz(&table, fw, &direction) {
            Ok(fit) => pairs.extend(fit_pairs("ornstein_zernike", &fit)),
            Err(e) => pairs.push(kv("ornstein_zernike", format!("not fit: {e}"))),
        }
    } else {
        pairs.push(kv(
            "fits",
            format!(
                "skipped: window radius {max_r} leaves no points past fit_r_min {}",
                job.analysis.fit_r_min
            ),
        ));
    }
    let smooth = smoothness_indicator(best.as_ref(), d);
    pairs.push(kv("smoothness_class", smoothness_class_str(&smooth.class)));
    pairs.push(kv("smoothness", smooth.details));
    io::write_key_values(&dir.join("fits.txt"), &pairs)?;
    io::write_manifest(&dir)?;
    Ok(dir)
}

/// Builds the diffraction density from the analyzed correlations, runs the
/// property checks, and writes `spectrum.tsv`, `structure_factor.tsv`, and
/// `checks.txt`. Any FAIL row is an error (after the artifacts are written,
/// so the failure is inspectable).
pub fn cmd_diffract(job: &JobConfig, ov: &Overrides) -> Result<PathBuf> {
    let dir = resolve_out_dir(job, ov);
    ensure_dir(&dir)?;
    let spin_path = dir.join("correlations_spin.tsv");
    if !spin_path.is_file() {
        return Err(Error::MissingArtifact(format!(
            "{} (run the analyze stage first)",
            spin_path.display()
        )));
    }
    let table = io::read_correlation_table(&spin_path)?;
    let d = table.dimension();
    let certified = table.certified_window();

    // Truncate the series to displacements resolved above the noise floor;
    // beyond them the entries are noise and would only jitter the checks.
    // With nothing resolved past the origin, keep the full table but carry
    // no certificate.
    let mut trunc_bound = f64::INFINITY;
    let series_table: CorrelationTable;
    if certified > 0 {
        series_table = table.truncated(certified)?;
        if certified as f64 > job.analysis.fit_r_min {
            let fw = FitWindow::new(job.analysis.fit_r_min, certified as f64)?;
            let cert = fit_exponential(&series_table, fw)
                .ok()
                .and_then(|fit| tail_certificate(&fit, d, certified))
                .or_else(|| {
                    fit_algebraic(&series_table, fw)
                        .ok()
                        .and_then(|fit| tail_certificate(&fit, d, certified))
                });
            if let Some(c) = cert {
                // The density carries the correlations with a factor 1/4.
                trunc_bound = 0.25 * c.bound;
            }
        }
    } else {
        series_table = table.clone();
    }

    // Pure point weight: estimated from the samples when the magnetization
    // is resolved away from zero, else the half-occupation value 1/4.
    let samples_path = dir.join("samples.bin");
    let mut sf = None;
    let (bragg_weight, bragg_note) = if samples_path.is_file() {
        let (_, samples) = io::read_samples(&samples_path)?;
        let est = empirical_structure_factor(&samples)?;
        let spin_series: Vec<f64> = samples.iter().map(|s| s.mean_spin()).collect();
        let (m, m_se) = batch_means(&spin_series, DEFAULT_BATCHES);
        let out = if m.abs() > 3.0 * m_se && m.abs() > 1e-8 {
            let (b, b_se) = bragg_weight_estimate(&est);
            (
                b,
                format!(
                    "mean spin {m:.6e} resolved away from zero; point weight estimated from the samples (std err {b_se:.3e})"
                ),
            )
        } else {
            (
                DEFAULT_BRAGG_WEIGHT,
                format!("mean spin {m:.3e} consistent with zero; half-occupation weight 1/4 used"),
            )
        };
        sf = Some(est);
        out
    } else {
        (
            DEFAULT_BRAGG_WEIGHT,
            "no sample stream present; half-occupation weight 1/4 assumed".to_string(),
        )
    };

    let result = density_series(
        &series_table,
        job.diffraction.grid_m,
        trunc_bound,
        bragg_weight,
        Some(bragg_note),
    )?;

    let seed = effective_seed(job, ov);
    let mut checks = vec![
        periodicity_check(&result, 100, seed),
        evenness_check(&result, 100, seed.wrapping_add(1)),
        parseval_check(&result, &series_table),
        positivity_check(&result),
        bragg_maxima_check(&result),
    ];
    match &sf {
        Some(est) => checks.push(two_route_check(&result, est, 3.0)),
        None => checks.push(PropertyReport {
            name: "two-route".into(),
            status: CheckStatus::Warn,
            details: "skipped: no sample stream to estimate the intensity from".into(),
        }),
    }

    io::write_spectrum(&dir.join("spectrum.tsv"), &result)?;
    if let Some(est) = &sf {
        io::write_structure_factor(&dir.join("structure_factor.tsv"), est)?;
    }
    io::write_checks(&dir.join("checks.txt"), &checks)?;
    io::write_manifest(&dir)?;

    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(Error::CheckFailed(format!(
            "{} (details in checks.txt)",
            failed.join(", ")
        )));
    }
    Ok(dir)
}

fn quote_artifact(doc: &mut String, dir: &Path, name: &str, title: &str) -> Result<()> {
    let path = dir.join(name);
    if !path.is_file() {
        return Ok(());
    }
    let text = std::fs::read_to_string(&path)?;
    let _ = writeln!(doc, "## {title}\n\n```\n{}```\n", text);
    Ok(())
}

/// Verifies the manifest and writes `report.md` summarizing every artifact.
/// The report quotes the manifest, so it stays outside it.
pub fn cmd_report(job: &JobConfig, ov: &Overrides) -> Result<PathBuf> {
    let dir = resolve_out_dir(job, ov);
    let verified = io::verify_manifest(&dir)?;
    let mut doc = String::new();
    let _ = writeln!(doc, "# Lattice-gas scattering report\n");
    let _ = writeln!(
        doc,
        "Energy convention: `{CONVENTION_TAG}` — every unordered interacting pair counts once.\n"
    );
    let _ = writeln!(doc, "## Job\n");
    let _ = writeln!(doc, "- dimension: {}", job.model.dimension);
    let _ = writeln!(doc, "- lengths: {}", join_usize(&job.run.lengths));
    let _ = writeln!(doc, "- beta: {}", job.run.beta);
    let _ = writeln!(doc, "- algorithm: {}", job.run.algorithm);
    let _ = writeln!(doc, "- seed: {}", effective_seed(job, ov));
    let _ = writeln!(doc, "- chains: {}", effective_chains(job, ov));
    let _ = writeln!(doc, "- samples per chain: {}", job.run.n_samples);
    let _ = writeln!(doc, "- thinning: {} sweeps", job.run.thin_sweeps);
    let _ = writeln!(doc);
    quote_artifact(&mut doc, &dir, "conditions.txt", "Regime conditions")?;
    quote_artifact(&mut doc, &dir, "stats.txt", "Chain statistics")?;

    let spin_path = dir.join("correlations_spin.tsv");
    if spin_path.is_file() {
        let table = io::read_correlation_table(&spin_path)?;
        let _ = writeln!(doc, "## Correlations\n");
        let _ = writeln!(
            doc,
            "- window: {} ({} displacement classes)",
            join_usize(table.window()),
            table.len()
        );
        let _ = writeln!(
            doc,
            "- certified window (all entries at least 10 standard errors from zero): {}",
            table.certified_window()
        );
        let _ = writeln!(doc);
    }
    quote_artifact(&mut doc, &dir, "fits.txt", "Decay fits")?;

    let spectrum_path = dir.join("spectrum.tsv");
    if spectrum_path.is_file() {
        let _ = writeln!(doc, "## Diffraction\n");
        let text = std::fs::read_to_string(&spectrum_path)?;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let _ = writeln!(doc, "- {}", line.trim_start_matches('#').trim());
        }
        let _ = writeln!(doc);
    }
    quote_artifact(&mut doc, &dir, "checks.txt", "Property checks")?;

    let _ = writeln!(doc, "## Verified artifacts\n");
    for name in &verified {
        let _ = writeln!(doc, "- {name}");
    }
    let _ = writeln!(doc);
    let _ = writeln!(doc, "## Scope notes\n");
    let _ = writeln!(
        doc,
        "- Decay-law fits are least-squares indicators with heuristic error bars, not proofs; the poor-fit flag marks log-space residuals past 0.25."
    );
    let _ = writeln!(
        doc,
        "- Models stated on non-cubic lattices enter through an integer change of basis; spectra are computed on the cubic torus after that identification."
    );
    let _ = writeln!(
        doc,
        "- All quantities are finite-volume estimates at the recorded sizes; nothing is extrapolated to infinite volume."
    );
    let path = dir.join("report.md");
    std::fs::write(&path, doc)?;
    Ok(path)
}

/// Runs every stage in order.
pub fn cmd_all(job: &JobConfig, ov: &Overrides) -> Result<PathBuf> {
    cmd_check(job, ov)?;
    cmd_simulate(job, ov)?;
    cmd_analyze(job, ov)?;
    cmd_diffract(job, ov)?;
    cmd_report(job, ov)
}
