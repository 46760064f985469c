//! Markov chain Monte Carlo sampling of the Gibbs measure: single-site
//! Metropolis sweeps, Wolff cluster updates, burn-in calibration, and
//! independent parallel chains.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::lattice::{LatticeTorus, SpinConfiguration};
use crate::model::{BondTable, CouplingMap};
use crate::stats::{batch_means, integrated_autocorr_time, DEFAULT_BATCHES};

/// Update rule for the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Single-site Metropolis proposals at uniformly random sites.
    Metropolis,
    /// Wolff cluster flips; requires a ferromagnetic model. One "sweep" is
    /// one cluster update.
    Wolff,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Metropolis => "metropolis",
            Algorithm::Wolff => "wolff",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metropolis" => Ok(Algorithm::Metropolis),
            "wolff" => Ok(Algorithm::Wolff),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm '{other}' (expected 'metropolis' or 'wolff')"
            ))),
        }
    }
}

/// Everything needed to reproduce a sampling run.
#[derive(Debug, Clone)]
pub struct RunParams {
    pub torus: LatticeTorus,
    pub coupling: CouplingMap,
    pub beta: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Sweeps to discard before sampling; `None` calibrates from a pilot run.
    pub burn_in_sweeps: Option<usize>,
    pub n_samples: usize,
    /// Sweeps between recorded samples.
    pub thin_sweeps: usize,
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "inverse temperature must be finite and nonnegative, got {}",
                self.beta
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParams(
                "need at least 2 samples for error estimation".into(),
            ));
        }
        if self.thin_sweeps == 0 {
            return Err(Error::InvalidParams("thinning interval must be positive".into()));
        }
        if self.algorithm == Algorithm::Wolff && !self.coupling.is_ferromagnetic() {
            return Err(Error::NonFerromagnetic);
        }
        // Surfaces dimension/admissibility problems before any work is done.
        BondTable::new(&self.torus, &self.coupling)?;
        Ok(())
    }
}

/// One Metropolis sweep: N proposals at uniformly random sites, each flip
/// accepted with probability min(1, exp(-beta ΔE)). Returns the number of
/// accepted flips. Exactly two variates (site, uniform) are drawn per
/// proposal, accepted or not, so the random stream consumed is independent
/// of the trajectory.
///
/// Proposal sites are random rather than scanned in a fixed order: a
/// deterministic scan is reducible on zero-field models, because moves with
/// ΔE = 0 are always accepted and a fixed pass order then carries domain
/// walls across the torus deterministically — configurations such as a
/// single isolated up-spin can never survive a full pass, and the chain gets
/// trapped in a closed subfamily of states. Random-site proposals make each
/// single-site kernel act in isolation, which yields an irreducible chain in
/// detailed balance with the Gibbs measure, and reproducibility is
/// unaffected since site choices come from the seeded stream.
pub fn metropolis_sweep(
    config: &mut SpinConfiguration,
    bonds: &BondTable,
    beta: f64,
    rng: &mut impl Rng,
) -> usize {
    let n = config.n_sites();
    let mut accepted = 0;
    for _ in 0..n {
        let site = rng.random_range(0..n);
        let delta = bonds.flip_delta_of(config.spins(), site);
        let u: f64 = rng.random();
        if delta <= 0.0 || u < (-beta * delta).exp() {
            config.flip(site);
            accepted += 1;
        }
    }
    accepted
}

/// One Wolff cluster update: grow a cluster from a random seed site, adding
/// each aligned interaction partner with probability 1 - exp(-2 beta J), and
/// flip the whole cluster. Returns the cluster size.
///
/// Only valid for ferromagnetic couplings (all J >= 0); at beta = 0 the
/// cluster is always a single random site, so the chain stays ergodic.
pub fn wolff_step(
    config: &mut SpinConfiguration,
    bonds: &BondTable,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<usize> {
    if !bonds.is_ferromagnetic() {
        return Err(Error::NonFerromagnetic);
    }
    let n = config.n_sites();
    let seed_site = rng.random_range(0..n);
    let cluster_spin = config.spin(seed_site);
    let mut in_cluster = vec![false; n];
    in_cluster[seed_site] = true;
    let mut cluster = vec![seed_site];
    let mut frontier = std::collections::VecDeque::from([seed_site]);
    while let Some(site) = frontier.pop_front() {
        for &(nb, j) in bonds.neighbors(site) {
            if in_cluster[nb] || config.spin(nb) != cluster_spin {
                continue;
            }
            let p = 1.0 - (-2.0 * beta * j).exp();
            if rng.random::<f64>() < p {
                in_cluster[nb] = true;
                cluster.push(nb);
                frontier.push_back(nb);
            }
        }
    }
    for &site in &cluster {
        config.flip(site);
    }
    Ok(cluster.len())
}

/// Scalar summaries of a sample stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub n_samples: usize,
    pub mean_spin: f64,
    pub mean_spin_std_err: f64,
    pub mean_energy_per_site: f64,
    pub mean_energy_per_site_std_err: f64,
    /// Integrated autocorrelation time of the magnetization, in sweeps
    /// (estimated on the thinned series and rescaled by the thinning).
    pub integrated_autocorr_sweeps: f64,
}

impl SampleStats {
    pub fn from_samples(
        samples: &[SpinConfiguration],
        bonds: &BondTable,
        thin_sweeps: usize,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        let n = samples[0].n_sites() as f64;
        let spin_series: Vec<f64> = samples.iter().map(|s| s.mean_spin()).collect();
        let energy_series: Vec<f64> = samples
            .iter()
            .map(|s| bonds.energy_of(s.spins()) / n)
            .collect();
        let (mean_spin, spin_se) = batch_means(&spin_series, DEFAULT_BATCHES);
        let (mean_energy, energy_se) = batch_means(&energy_series, DEFAULT_BATCHES);
        let tau_samples = integrated_autocorr_time(&spin_series);
        Ok(Self {
            n_samples: samples.len(),
            mean_spin,
            mean_spin_std_err: spin_se,
            mean_energy_per_site: mean_energy,
            mean_energy_per_site_std_err: energy_se,
            integrated_autocorr_sweeps: tau_samples * thin_sweeps as f64,
        })
    }
}

/// A completed sampling run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub params: RunParams,
    pub burn_in_used: usize,
    pub samples: Vec<SpinConfiguration>,
    pub stats: SampleStats,
    /// Fraction of accepted Metropolis proposals during sampling.
    pub acceptance_rate: Option<f64>,
    /// Mean Wolff cluster size during sampling.
    pub mean_cluster_size: Option<f64>,
}

const PILOT_SWEEPS: usize = 512;
const MIN_DEFAULT_BURN_IN: usize = 1000;
const BURN_IN_TAU_MULTIPLE: f64 = 100.0;

/// Calibrates a burn-in length from a short pilot chain on a separate random
/// stream: at least [`MIN_DEFAULT_BURN_IN`] sweeps, or 100 estimated
/// autocorrelation times, whichever is larger.
pub fn default_burn_in(params: &RunParams) -> Result<usize> {
    params.validate()?;
    let bonds = BondTable::new(&params.torus, &params.coupling)?;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    let mut config = SpinConfiguration::all_plus(&params.torus);
    let mut series = Vec::with_capacity(PILOT_SWEEPS);
    for _ in 0..PILOT_SWEEPS {
        advance(&mut config, &bonds, params.beta, params.algorithm, &mut rng)?;
        series.push(config.mean_spin());
    }
    let tau = integrated_autocorr_time(&series);
    Ok(MIN_DEFAULT_BURN_IN.max((BURN_IN_TAU_MULTIPLE * tau).ceil() as usize))
}

fn advance(
    config: &mut SpinConfiguration,
    bonds: &BondTable,
    beta: f64,
    algorithm: Algorithm,
    rng: &mut impl Rng,
) -> Result<usize> {
    match algorithm {
        Algorithm::Metropolis => Ok(metropolis_sweep(config, bonds, beta, rng)),
        Algorithm::Wolff => wolff_step(config, bonds, beta, rng),
    }
}

/// Runs one chain: burn-in, then `n_samples` configurations recorded every
/// `thin_sweeps` sweeps. Identical parameters reproduce identical output
/// bit for bit.
pub fn run(params: &RunParams) -> Result<RunOutput> {
    params.validate()?;
    let bonds = BondTable::new(&params.torus, &params.coupling)?;
    let burn_in = match params.burn_in_sweeps {
        Some(b) => b,
        None => default_burn_in(params)?,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    rng.set_stream(0);
    let mut config = SpinConfiguration::all_plus(&params.torus);
    for _ in 0..burn_in {
        advance(&mut config, &bonds, params.beta, params.algorithm, &mut rng)?;
    }
    let mut samples = Vec::with_capacity(params.n_samples);
    let mut event_total = 0usize;
    let n_events = params.n_samples * params.thin_sweeps;
    for _ in 0..params.n_samples {
        for _ in 0..params.thin_sweeps {
            event_total += advance(&mut config, &bonds, params.beta, params.algorithm, &mut rng)?;
        }
        samples.push(config.clone());
    }
    let stats = SampleStats::from_samples(&samples, &bonds, params.thin_sweeps)?;
    let (acceptance_rate, mean_cluster_size) = match params.algorithm {
        Algorithm::Metropolis => (
            Some(event_total as f64 / (n_events * params.torus.n_sites()) as f64),
            None,
        ),
        Algorithm::Wolff => (None, Some(event_total as f64 / n_events as f64)),
    };
    Ok(RunOutput {
        params: params.clone(),
        burn_in_used: burn_in,
        samples,
        stats,
        acceptance_rate,
        mean_cluster_size,
    })
}

/// Per-chain summary kept after merging parallel chains.
#[derive(Debug, Clone)]
pub struct ChainSummary {
    pub seed: u64,
    pub burn_in_used: usize,
    pub stats: SampleStats,
    pub acceptance_rate: Option<f64>,
    pub mean_cluster_size: Option<f64>,
}

/// Samples pooled from independent chains.
#[derive(Debug, Clone)]
pub struct MergedRun {
    pub chains: Vec<ChainSummary>,
    /// All samples, chain-major: chain 0's stream first, then chain 1's, ...
    pub samples: Vec<SpinConfiguration>,
    /// Statistics over the pooled stream.
    pub stats: SampleStats,
}

/// Runs one chain per seed on its own thread and pools the samples in seed
/// order. Seeds must be pairwise distinct: merging identically-seeded chains
/// would silently duplicate data.
pub fn parallel_chains_seeded(params: &RunParams, seeds: &[u64]) -> Result<MergedRun> {
    if seeds.is_empty() {
        return Err(Error::InvalidParams("need at least one chain seed".into()));
    }
    let mut seen = BTreeSet::new();
    for &s in seeds {
        if !seen.insert(s) {
            return Err(Error::DuplicateSeed(s));
        }
    }
    params.validate()?;
    let outputs: Vec<Result<RunOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let chain_params = RunParams {
                    seed,
                    ..params.clone()
                };
                scope.spawn(move || run(&chain_params))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });
    let mut chains = Vec::with_capacity(seeds.len());
    let mut samples = Vec::with_capacity(seeds.len() * params.n_samples);
    for output in outputs {
        let output = output?;
        chains.push(ChainSummary {
            seed: output.params.seed,
            burn_in_used: output.burn_in_used,
            stats: output.stats,
            acceptance_rate: output.acceptance_rate,
            mean_cluster_size: output.mean_cluster_size,
        });
        samples.extend(output.samples);
    }
    let bonds = BondTable::new(&params.torus, &params.coupling)?;
    let stats = SampleStats::from_samples(&samples, &bonds, params.thin_sweeps)?;
    Ok(MergedRun {
        chains,
        samples,
        stats,
    })
}

/// [`parallel_chains_seeded`] with seeds `seed, seed+1, ..., seed+n-1`.
pub fn parallel_chains(params: &RunParams, n_chains: usize) -> Result<MergedRun> {
    let seeds: Vec<u64> = (0..n_chains as u64)
        .map(|i| params.seed.wrapping_add(i))
        .collect();
    parallel_chains_seeded(params, &seeds)
}
