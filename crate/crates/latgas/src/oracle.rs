//! Exact reference computations for small systems: full Gibbs enumeration
//! over all spin configurations, and closed-form one-dimensional
//! nearest-neighbor results. These anchor the Monte Carlo estimators.

use crate::correlation::{canonical_displacements, CorrelationTable, Observable, TableSource};
use crate::error::{Error, Result};
use crate::lattice::{LatticeTorus, SpinConfiguration};
use crate::model::{BondTable, CouplingMap};
use crate::stats::KahanSum;

/// Largest site count enumerable by exhaustive state sweep (2^24 states).
pub const ENUMERATION_CAP: usize = 24;

/// Largest site count for which the full per-state probability table is
/// materialized (2^20 doubles).
pub const STATE_TABLE_CAP: usize = 20;

/// Everything the exhaustive enumeration produces.
#[derive(Debug, Clone)]
pub struct ExactResult {
    /// Spin-spin correlations with zero standard errors.
    pub correlations: CorrelationTable,
    /// ln of the partition function at the given inverse temperature.
    pub log_partition: f64,
    /// Gibbs mean of the per-site magnetization (zero by symmetry at h = 0).
    pub mean_spin: f64,
    pub mean_energy_per_site: f64,
    /// Largest |<sigma_y>| over sites; a spin-flip symmetry diagnostic.
    pub max_abs_site_mean: f64,
    /// Per-state Gibbs probabilities indexed by the configuration's state
    /// index, when the system is small enough to materialize them.
    pub state_probabilities: Option<Vec<f64>>,
}

/// Walks all 2^N configurations in Gray-code order, flipping one site per
/// step and updating the energy incrementally.
fn gray_walk(
    torus: &LatticeTorus,
    bonds: &BondTable,
    mut visit: impl FnMut(u64, f64, Option<usize>, &SpinConfiguration),
) -> Result<()> {
    let n = torus.n_sites();
    let mut config = SpinConfiguration::from_state_index(torus, 0)?;
    let mut energy = bonds.energy_of(config.spins());
    visit(0, energy, None, &config);
    for i in 1u64..(1u64 << n) {
        // Gray codes of i-1 and i differ exactly in bit trailing_zeros(i).
        let site = i.trailing_zeros() as usize;
        energy += bonds.flip_delta_of(config.spins(), site);
        config.flip(site);
        visit(i ^ (i >> 1), energy, Some(site), &config);
    }
    debug_assert!(
        (energy - bonds.energy_of(config.spins())).abs() <= 1e-9 * (1.0 + energy.abs()),
        "incremental energy drifted"
    );
    Ok(())
}

/// Exhaustive Gibbs sums over all configurations of a small torus.
///
/// Correlations are translation-averaged (exactly, via integer pair sums per
/// state), so the table inherits the lattice symmetries up to floating-point
/// roundoff in the weighted accumulation. The weights are normalized against
/// the maximum Boltzmann exponent, so any finite beta is safe.
pub fn enumerate_exact(
    torus: &LatticeTorus,
    coupling: &CouplingMap,
    beta: f64,
    window: &[usize],
) -> Result<ExactResult> {
    let n = torus.n_sites();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCapExceeded {
            n_sites: n,
            cap: ENUMERATION_CAP,
        });
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParams(format!(
            "inverse temperature must be finite and nonnegative, got {beta}"
        )));
    }
    if window.len() != torus.dimension() {
        return Err(Error::DimensionMismatch {
            expected: torus.dimension(),
            got: window.len(),
        });
    }
    for (&w, &side) in window.iter().zip(torus.lengths()) {
        if 2 * w > side {
            return Err(Error::WindowTooLarge { window: w, side });
        }
    }
    let bonds = BondTable::new(torus, coupling)?;

    // Pass 1: the largest Boltzmann exponent, for overflow-safe weights.
    let mut max_exp = f64::NEG_INFINITY;
    gray_walk(torus, &bonds, |_, energy, _, _| {
        let e = -beta * energy;
        if e > max_exp {
            max_exp = e;
        }
    })?;

    // Per-displacement shift tables and exact integer pair sums, updated
    // incrementally as the walk flips single sites.
    let disps: Vec<Vec<i64>> = canonical_displacements(window)
        .into_iter()
        .filter(|x| x.iter().any(|&c| c != 0))
        .collect();
    let fwd: Vec<Vec<usize>> = disps
        .iter()
        .map(|x| (0..n).map(|s| torus.translate(s, x)).collect())
        .collect();
    let bwd: Vec<Vec<usize>> = disps
        .iter()
        .map(|x| {
            let neg: Vec<i64> = x.iter().map(|&c| -c).collect();
            (0..n).map(|s| torus.translate(s, &neg)).collect()
        })
        .collect();

    // State 0 is all spins down: every pair product is +1.
    let mut pair_sums: Vec<i64> = vec![n as i64; disps.len()];
    let mut magnetization: i64 = -(n as i64);

    let mut z = KahanSum::new();
    let mut corr_num: Vec<KahanSum> = vec![KahanSum::new(); disps.len()];
    let mut mag_num = KahanSum::new();
    let mut energy_num = KahanSum::new();
    let mut site_sums = vec![0.0f64; n];
    let mut probs = if n <= STATE_TABLE_CAP {
        Some(vec![0.0f64; 1usize << n])
    } else {
        None
    };

    gray_walk(torus, &bonds, |state, energy, flipped, config| {
        if let Some(site) = flipped {
            // `config` is already flipped; the old spin is the negation.
            let spins = config.spins();
            let new_spin = spins[site] as i64;
            for (j, (f, b)) in fwd.iter().zip(&bwd).enumerate() {
                let p_new = new_spin * (spins[f[site]] as i64 + spins[b[site]] as i64);
                // Both pair products through this site changed sign.
                pair_sums[j] += 2 * p_new;
            }
            magnetization += 2 * new_spin;
        }
        let w = (-beta * energy - max_exp).exp();
        z.add(w);
        for (j, &s) in pair_sums.iter().enumerate() {
            corr_num[j].add(w * s as f64);
        }
        mag_num.add(w * magnetization as f64);
        energy_num.add(w * energy);
        for (sum, &spin) in site_sums.iter_mut().zip(config.spins()) {
            *sum += w * spin as f64;
        }
        if let Some(p) = probs.as_mut() {
            p[state as usize] = w;
        }
    })?;

    let z_val = z.value();
    let mut table = CorrelationTable::new(
        torus.dimension(),
        window.to_vec(),
        TableSource::Exact,
        Observable::Spin,
    )?;
    table.beta = Some(beta);
    table.ferromagnetic_model = Some(coupling.is_ferromagnetic());
    table.set(&vec![0; torus.dimension()], 1.0, 0.0)?;
    for (j, x) in disps.iter().enumerate() {
        let eta = corr_num[j].value() / (z_val * n as f64);
        table.set(x, eta.clamp(-1.0, 1.0), 0.0)?;
    }
    let probabilities = probs.map(|p| {
        let mut out = p;
        for w in &mut out {
            *w /= z_val;
        }
        out
    });
    Ok(ExactResult {
        correlations: table,
        log_partition: max_exp + z_val.ln(),
        mean_spin: mag_num.value() / (z_val * n as f64),
        mean_energy_per_site: energy_num.value() / (z_val * n as f64),
        max_abs_site_mean: site_sums
            .iter()
            .map(|s| (s / z_val).abs())
            .fold(0.0, f64::max),
        state_probabilities: probabilities,
    })
}

/// Closed-form spin correlations and log partition function for a
/// nearest-neighbor ring of `length` sites at per-bond coupling strength
/// `beta_j` (the product of inverse temperature and coupling):
///
/// ```text
/// eta(x) = (t^x + t^{L-x}) / (1 + t^L),   t = tanh(beta_j),
/// ln Z   = L ln(2 cosh beta_j) + ln(1 + t^L).
/// ```
///
/// Valid for couplings of either sign; antiferromagnetic rings give
/// alternating-sign correlations.
pub fn transfer_matrix_1d_torus(
    length: usize,
    beta_j: f64,
    window: usize,
) -> Result<(CorrelationTable, f64)> {
    if length < 3 {
        return Err(Error::InvalidParams(format!(
            "ring needs at least 3 sites, got {length}"
        )));
    }
    if !beta_j.is_finite() {
        return Err(Error::InvalidParams("coupling strength must be finite".into()));
    }
    if 2 * window > length {
        return Err(Error::WindowTooLarge {
            window,
            side: length,
        });
    }
    let t = beta_j.tanh();
    let t_l = t.powi(length as i32);
    let mut table = CorrelationTable::new(1, vec![window], TableSource::Exact, Observable::Spin)?;
    table.beta = Some(beta_j);
    table.ferromagnetic_model = Some(beta_j >= 0.0);
    for x in 0..=window {
        let eta = (t.powi(x as i32) + t.powi((length - x) as i32)) / (1.0 + t_l);
        table.set(&[x as i64], eta.clamp(-1.0, 1.0), 0.0)?;
    }
    let log_z = length as f64 * (2.0 * beta_j.cosh()).ln() + t_l.ln_1p();
    Ok((table, log_z))
}

/// Infinite-chain limit of [`transfer_matrix_1d_torus`]: eta(x) = t^{|x|}.
pub fn transfer_matrix_1d_infinite(beta_j: f64, window: usize) -> Result<CorrelationTable> {
    if !beta_j.is_finite() {
        return Err(Error::InvalidParams("coupling strength must be finite".into()));
    }
    let t = beta_j.tanh();
    let mut table = CorrelationTable::new(1, vec![window], TableSource::Exact, Observable::Spin)?;
    table.beta = Some(beta_j);
    table.ferromagnetic_model = Some(beta_j >= 0.0);
    for x in 0..=window {
        table.set(&[x as i64], t.powi(x as i32), 0.0)?;
    }
    Ok(table)
}
