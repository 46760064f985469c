//! Two-point correlation tables, their estimation from samples, decay-law
//! fits, and certified summability/tail bounds for the fitted laws.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::SpinConfiguration;
use crate::stats::{batch_means, KahanSum, DEFAULT_BATCHES};

/// Where a table's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSource {
    Mcmc,
    Exact,
}

impl TableSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            TableSource::Mcmc => "mcmc",
            TableSource::Exact => "exact",
        }
    }
}

/// Which two-point function the table holds: spin-spin eta(x) or the
/// lattice-gas occupation correlation (eta(x) + 1) / 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Spin,
    Density,
}

impl Observable {
    pub fn as_str(&self) -> &'static str {
        match self {
            Observable::Spin => "spin",
            Observable::Density => "density",
        }
    }
}

/// A two-point correlation table over a displacement window.
///
/// Values are stored once per displacement pair {x, -x} (canonical sign) and
/// mirrored on read, so the even symmetry eta(x) = eta(-x) holds exactly by
/// construction. Each value carries a standard error (zero for exact
/// sources).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    dimension: usize,
    window: Vec<usize>,
    entries: BTreeMap<Vec<i64>, (f64, f64)>,
    pub source: TableSource,
    pub observable: Observable,
    /// Inverse temperature the values correspond to, when known.
    pub beta: Option<f64>,
    /// Whether the generating model was ferromagnetic, when known.
    pub ferromagnetic_model: Option<bool>,
}

impl CorrelationTable {
    pub fn new(
        dimension: usize,
        window: Vec<usize>,
        source: TableSource,
        observable: Observable,
    ) -> Result<Self> {
        if dimension == 0 || window.len() != dimension {
            return Err(Error::InvalidArgument(format!(
                "window must list one extent per axis ({} axes, {} extents)",
                dimension,
                window.len()
            )));
        }
        Ok(Self {
            dimension,
            window,
            entries: BTreeMap::new(),
            source,
            observable,
            beta: None,
            ferromagnetic_model: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    /// Records a value for the pair {x, -x}. Spin values outside [-1, 1] are
    /// rejected; the standard error must be finite and nonnegative.
    pub fn set(&mut self, x: &[i64], value: f64, std_err: f64) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        for (c, &w) in x.iter().zip(&self.window) {
            if c.unsigned_abs() as usize > w {
                return Err(Error::InvalidArgument(format!(
                    "displacement {x:?} outside window {:?}",
                    self.window
                )));
            }
        }
        if !value.is_finite() || !std_err.is_finite() || std_err < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad table entry at {x:?}: value {value}, std_err {std_err}"
            )));
        }
        if self.observable == Observable::Spin && value.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "spin correlation {value} at {x:?} exceeds 1 in magnitude"
            )));
        }
        self.entries
            .insert(crate::model::canonical_displacement(x), (value, std_err));
        Ok(())
    }

    /// Value and standard error at a displacement, through the mirror
    /// symmetry. `None` when the displacement was never recorded.
    pub fn value(&self, x: &[i64]) -> Option<(f64, f64)> {
        self.entries
            .get(&crate::model::canonical_displacement(x))
            .copied()
    }

    /// Entries under their canonical sign, in deterministic order.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (&[i64], f64, f64)> {
        self.entries.iter().map(|(x, &(v, se))| (x.as_slice(), v, se))
    }

    /// Every recorded displacement with both signs expanded (origin once).
    pub fn full_entries(&self) -> Vec<(Vec<i64>, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for (x, &(v, _)) in &self.entries {
            out.push((x.clone(), v));
            if x.iter().any(|&c| c != 0) {
                out.push((x.iter().map(|&c| -c).collect(), v));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True iff every recorded value is nonnegative.
    pub fn all_nonnegative(&self) -> bool {
        self.entries.values().all(|&(v, _)| v >= 0.0)
    }

    /// Copy restricted to the cube ||x||_inf <= w.
    pub fn truncated(&self, w: usize) -> Result<Self> {
        if self.window.iter().any(|&wi| w > wi) {
            return Err(Error::InvalidArgument(format!(
                "cannot widen window {:?} to {w}",
                self.window
            )));
        }
        let mut out = Self {
            dimension: self.dimension,
            window: vec![w; self.dimension],
            entries: BTreeMap::new(),
            source: self.source,
            observable: self.observable,
            beta: self.beta,
            ferromagnetic_model: self.ferromagnetic_model,
        };
        for (x, &(v, se)) in &self.entries {
            if norm_inf(x) <= w as i64 {
                out.entries.insert(x.clone(), (v, se));
            }
        }
        Ok(out)
    }

    /// Largest cube radius n such that every entry with ||x||_inf <= n clears
    /// the noise floor |value| >= NOISE_FLOOR_FACTOR * std_err. Exact tables
    /// (zero errors) certify their whole window.
    pub fn certified_window(&self) -> usize {
        let max_w = self.window.iter().copied().min().unwrap_or(0);
        let mut worst = vec![true; max_w + 1];
        for (x, &(v, se)) in &self.entries {
            let n = norm_inf(x) as usize;
            if n <= max_w && se > 0.0 && v.abs() < NOISE_FLOOR_FACTOR * se {
                worst[n] = false;
            }
        }
        let mut edge = 0;
        for (n, ok) in worst.iter().enumerate() {
            if *ok {
                edge = n;
            } else {
                break;
            }
        }
        edge
    }
}

fn norm_inf(x: &[i64]) -> i64 {
    x.iter().map(|c| c.abs()).max().unwrap_or(0)
}

fn norm2(x: &[i64]) -> f64 {
    x.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
}

/// Displacements with |x_i| <= w_i whose first nonzero component is positive,
/// plus the origin, in deterministic order.
pub fn canonical_displacements(window: &[usize]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let d = window.len();
    let mut cur = vec![0i64; d];
    fn rec(axis: usize, window: &[usize], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if axis == window.len() {
            let canonical = match cur.iter().find(|&&c| c != 0) {
                Some(&c) => c > 0,
                None => true,
            };
            if canonical {
                out.push(cur.clone());
            }
            return;
        }
        let w = window[axis] as i64;
        for c in -w..=w {
            cur[axis] = c;
            rec(axis + 1, window, cur, out);
        }
        cur[axis] = 0;
    }
    rec(0, window, &mut cur, &mut out);
    out.sort();
    out
}

/// Estimates spin-spin correlations from a sample stream by translation
/// averaging over the torus, with batch-means standard errors.
///
/// Every sample must live on the same torus; the window may not exceed half
/// the torus side on any axis. At least two samples are required for error
/// bars.
pub fn estimate_correlations(
    samples: &[SpinConfiguration],
    window: &[usize],
) -> Result<CorrelationTable> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 2 samples for error bars, got {}",
            samples.len()
        )));
    }
    let torus = samples[0].torus().clone();
    if samples.iter().any(|s| s.torus() != &torus) {
        return Err(Error::InvalidArgument(
            "samples live on different tori".into(),
        ));
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

    let n_sites = torus.n_sites();
    let mut table = CorrelationTable::new(
        torus.dimension(),
        window.to_vec(),
        TableSource::Mcmc,
        Observable::Spin,
    )?;

    let mut per_sample = vec![0.0f64; samples.len()];
    for x in canonical_displacements(window) {
        // Shift table: site -> site + x, computed once per displacement.
        let shift: Vec<usize> = (0..n_sites).map(|s| torus.translate(s, &x)).collect();
        for (si, sample) in samples.iter().enumerate() {
            let spins = sample.spins();
            let mut acc = 0i64;
            for (site, &other) in shift.iter().enumerate() {
                acc += (spins[site] * spins[other]) as i64;
            }
            per_sample[si] = acc as f64 / n_sites as f64;
        }
        let (mean, se) = batch_means(&per_sample, DEFAULT_BATCHES);
        // Products of +/-1 spins average into [-1, 1]; clamp away the last
        // ulp of rounding so the table's range check never trips.
        table.set(&x, mean.clamp(-1.0, 1.0), se)?;
    }
    Ok(table)
}

/// Maps a spin-spin table to the lattice-gas occupation correlation
/// <n_0 n_x> = (eta(x) + 1) / 4, with errors scaled by the same affine map.
pub fn spin_to_density(table: &CorrelationTable) -> Result<CorrelationTable> {
    if table.observable != Observable::Spin {
        return Err(Error::InvalidArgument(
            "density conversion expects a spin table".into(),
        ));
    }
    let mut out = CorrelationTable::new(
        table.dimension(),
        table.window().to_vec(),
        table.source,
        Observable::Density,
    )?;
    out.beta = table.beta;
    out.ferromagnetic_model = table.ferromagnetic_model;
    for (x, v, se) in table.canonical_entries() {
        out.set(x, (v + 1.0) / 4.0, se / 4.0)?;
    }
    Ok(out)
}

/// Noise floor: displacements with |value| below this multiple of their
/// standard error are excluded from log-space fits.
pub const NOISE_FLOOR_FACTOR: f64 = 10.0;

/// Default smallest displacement length entering decay fits; the first
/// lattice spacing is skewed by onset effects.
pub const DEFAULT_FIT_R_MIN: f64 = 2.0;

/// Log-space residual RMS above which a fit is flagged as a poor model match.
pub const POOR_FIT_RESIDUAL_RMS: f64 = 0.25;

/// Decay law hypotheses for correlation tails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayLaw {
    /// |eta(x)| ~ C * exp(-rate * ||x||)
    Exponential,
    /// |eta(x)| ~ C * ||x||^{-rate}
    Algebraic,
    /// eta(x) ~ C * ||x||^{-(d-1)/2} * exp(-rate * ||x||) along a direction
    OrnsteinZernike,
}

impl DecayLaw {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayLaw::Exponential => "exponential",
            DecayLaw::Algebraic => "algebraic",
            DecayLaw::OrnsteinZernike => "ornstein-zernike",
        }
    }
}

/// Displacement-length window [r_min, r_max] a fit draws points from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub r_min: f64,
    pub r_max: f64,
}

impl FitWindow {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min >= 0.0) || !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::InvalidFitWindow(format!(
                "need 0 <= r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        Ok(Self { r_min, r_max })
    }
}

/// Result of a weighted least-squares decay fit in log space.
///
/// `rate` is the decay exponent of the law (epsilon, p, or the inverse
/// correlation length xi); `amplitude` is the prefactor C (or Phi). A fit
/// that completes but matches the data badly -- nonpositive rate or large
/// log-space residual -- is flagged `poor_fit` rather than erroring.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub law: DecayLaw,
    pub amplitude: f64,
    pub rate: f64,
    /// Standard error of `rate` propagated from the table's error bars
    /// (weighted fits) or from residual scatter (unweighted fits with more
    /// than two points).
    pub rate_std_err: Option<f64>,
    /// Fit direction for the directional law; `None` for isotropic fits.
    pub direction: Option<Vec<i64>>,
    pub window: FitWindow,
    /// RMS of log-space residuals.
    pub residual_rms: f64,
    pub n_points: usize,
    pub poor_fit: bool,
    pub note: Option<String>,
}

struct FitPoint {
    u: f64,
    y: f64,
    weight: f64,
}

/// Weighted least squares of y against u. Returns (intercept, slope,
/// slope standard error if available, residual RMS).
fn weighted_line(points: &[FitPoint], weights_are_variances: bool) -> (f64, f64, Option<f64>, f64) {
    let wsum: f64 = points.iter().map(|p| p.weight).sum();
    let u_bar: f64 = points.iter().map(|p| p.weight * p.u).sum::<f64>() / wsum;
    let y_bar: f64 = points.iter().map(|p| p.weight * p.y).sum::<f64>() / wsum;
    let s_uu: f64 = points
        .iter()
        .map(|p| p.weight * (p.u - u_bar) * (p.u - u_bar))
        .sum();
    let s_uy: f64 = points
        .iter()
        .map(|p| p.weight * (p.u - u_bar) * (p.y - y_bar))
        .sum();
    let slope = s_uy / s_uu;
    let intercept = y_bar - slope * u_bar;
    let residual_sq: f64 = points
        .iter()
        .map(|p| {
            let r = p.y - intercept - slope * p.u;
            r * r
        })
        .sum();
    let residual_rms = (residual_sq / points.len() as f64).sqrt();
    let slope_se = if weights_are_variances {
        // Weights are inverse variances of y, so Var(slope) = 1 / S_uu.
        Some((1.0 / s_uu).sqrt())
    } else if points.len() > 2 {
        let s2 = residual_sq / (points.len() as f64 - 2.0);
        let plain_suu: f64 = {
            let ub: f64 = points.iter().map(|p| p.u).sum::<f64>() / points.len() as f64;
            points.iter().map(|p| (p.u - ub) * (p.u - ub)).sum()
        };
        Some((s2 / plain_suu).sqrt())
    } else {
        None
    };
    (intercept, slope, slope_se, residual_rms)
}

/// Shared point assembly: displacement length, log magnitude, and inverse
/// log-variance weights, after noise-floor filtering.
fn collect_fit_points(
    table: &CorrelationTable,
    window: FitWindow,
    direction: Option<&[i64]>,
    log_transform: impl Fn(f64, f64) -> (f64, f64),
) -> Result<(Vec<FitPoint>, bool, usize)> {
    let mut raw = Vec::new();
    let mut excluded = 0usize;
    for (x, v, se) in table.canonical_entries() {
        if x.iter().all(|&c| c == 0) {
            continue;
        }
        if let Some(dir) = direction {
            if !is_positive_multiple(x, dir) {
                continue;
            }
        }
        let r = norm2(x);
        if r < window.r_min || r > window.r_max {
            continue;
        }
        if v == 0.0 || (se > 0.0 && v.abs() < NOISE_FLOOR_FACTOR * se) {
            excluded += 1;
            continue;
        }
        raw.push((r, v, se));
    }
    let weighted = !raw.is_empty() && raw.iter().all(|&(_, _, se)| se > 0.0);
    let points = raw
        .into_iter()
        .map(|(r, v, se)| {
            let (u, y) = log_transform(r, v);
            let weight = if weighted {
                // Delta method: Var(ln|v|) = (se / v)^2.
                let ratio = v / se;
                ratio * ratio
            } else {
                1.0
            };
            FitPoint { u, y, weight }
        })
        .collect();
    Ok((points, weighted, excluded))
}

fn is_positive_multiple(x: &[i64], dir: &[i64]) -> bool {
    // x == m * dir for some integer m >= 1.
    let pair = x.iter().zip(dir).find(|&(_, &d)| d != 0);
    let Some((&xc, &dc)) = pair else { return false };
    if xc % dc != 0 {
        return false;
    }
    let m = xc / dc;
    m >= 1 && x.iter().zip(dir).all(|(&xi, &di)| xi == m * di)
}

fn finish_fit(
    law: DecayLaw,
    window: FitWindow,
    direction: Option<Vec<i64>>,
    points: Vec<FitPoint>,
    weighted: bool,
    excluded: usize,
    min_points: usize,
) -> Result<DecayFit> {
    if points.len() < min_points {
        return Err(Error::InsufficientSignal(format!(
            "{} usable points in window [{}, {}] ({} below noise floor), need {}",
            points.len(),
            window.r_min,
            window.r_max,
            excluded,
            min_points
        )));
    }
    let (intercept, slope, slope_se, residual_rms) = weighted_line(&points, weighted);
    let rate = -slope;
    let mut poor = false;
    let mut notes = Vec::new();
    if rate <= 0.0 {
        poor = true;
        notes.push(format!("nonpositive decay rate {rate:.6}"));
    }
    if residual_rms > POOR_FIT_RESIDUAL_RMS {
        poor = true;
        notes.push(format!(
            "log-space residual RMS {residual_rms:.4} exceeds {POOR_FIT_RESIDUAL_RMS}"
        ));
    }
    if excluded > 0 {
        notes.push(format!("{excluded} displacements below noise floor excluded"));
    }
    Ok(DecayFit {
        law,
        amplitude: intercept.exp(),
        rate,
        rate_std_err: slope_se,
        direction,
        window,
        residual_rms,
        n_points: points.len(),
        poor_fit: poor,
        note: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    })
}

/// Fits |eta(x)| ~ C * exp(-epsilon * ||x||) by weighted least squares on
/// (||x||, ln|eta|) over the window. Needs at least two usable points above
/// the noise floor.
pub fn fit_exponential(table: &CorrelationTable, window: FitWindow) -> Result<DecayFit> {
    let (points, weighted, excluded) =
        collect_fit_points(table, window, None, |r, v| (r, v.abs().ln()))?;
    finish_fit(DecayLaw::Exponential, window, None, points, weighted, excluded, 2)
}

/// Fits |eta(x)| ~ C * ||x||^{-p} by weighted least squares on
/// (ln ||x||, ln|eta|). A constant table comes back with rate 0 and the
/// poor-fit flag set rather than an error.
pub fn fit_algebraic(table: &CorrelationTable, window: FitWindow) -> Result<DecayFit> {
    if window.r_min <= 0.0 {
        return Err(Error::InvalidFitWindow(
            "algebraic fit needs r_min > 0 (log of displacement length)".into(),
        ));
    }
    let (points, weighted, excluded) =
        collect_fit_points(table, window, None, |r, v| (r.ln(), v.abs().ln()))?;
    finish_fit(DecayLaw::Algebraic, window, None, points, weighted, excluded, 2)
}

/// Fits the directional form eta ~ Phi * ||x||^{-(d-1)/2} * exp(-xi * ||x||)
/// restricted to positive multiples of `direction`. Needs at least three
/// usable points.
pub fn fit_oz(table: &CorrelationTable, window: FitWindow, direction: &[i64]) -> Result<DecayFit> {
    if direction.len() != table.dimension() {
        return Err(Error::DimensionMismatch {
            expected: table.dimension(),
            got: direction.len(),
        });
    }
    if direction.iter().all(|&c| c == 0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let half_power = (table.dimension() as f64 - 1.0) / 2.0;
    let (points, weighted, excluded) = collect_fit_points(table, window, Some(direction), |r, v| {
        (r, v.abs().ln() + half_power * r.ln())
    })?;
    finish_fit(
        DecayLaw::OrnsteinZernike,
        window,
        Some(direction.to_vec()),
        points,
        weighted,
        excluded,
        3,
    )
}

/// Closed-form bound on the full-lattice sum of an exponential profile:
///
/// ```text
/// sum_{x in Z^d} C e^{-eps ||x||}  <=  C * coth(eps / (2 sqrt(d)))^d
/// ```
///
/// using e^{-eps||x||_2} <= e^{-(eps/sqrt d)||x||_1} and the product
/// structure of the right side. Tight (an identity) in one dimension.
pub fn coth_bound(epsilon: f64, dimension: usize, amplitude: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "coth bound needs epsilon > 0, got {epsilon}"
        )));
    }
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let a = epsilon / (2.0 * (dimension as f64).sqrt());
    Ok(amplitude * (1.0 / a.tanh()).powi(dimension as i32))
}

/// Number of lattice points on the cube shell ||x||_inf = n.
fn shell_count(dimension: usize, n: f64) -> f64 {
    (2.0 * n + 1.0).powi(dimension as i32) - (2.0 * n - 1.0).powi(dimension as i32)
}

/// Upper bound on the lattice sum of an algebraic profile,
///
/// ```text
/// C * (1 + sum_{n>=1} s_d(n) n^{-p}),   s_d(n) = (2n+1)^d - (2n-1)^d,
/// ```
///
/// which dominates sum_{x} C ||x||_inf^{-p} (and hence the Euclidean-norm
/// sum). Evaluated with `partial_terms` shells plus an integral tail bound;
/// requires p > d or the sum diverges.
pub fn zeta_bound(p: f64, dimension: usize, amplitude: f64, partial_terms: usize) -> Result<f64> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(p > dimension as f64) {
        return Err(Error::InvalidArgument(format!(
            "shell sum diverges unless p > d (p = {p}, d = {dimension})"
        )));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let k = partial_terms.max(1);
    let mut acc = KahanSum::new();
    for n in 1..=k {
        let nf = n as f64;
        acc.add(shell_count(dimension, nf) * nf.powf(-p));
    }
    Ok(amplitude * (1.0 + acc.value() + shell_tail(p, dimension, k as f64)))
}

/// Integral bound on sum_{n > k} s_d(n) n^{-p}: s_d(n) <= 2d (3n)^{d-1}
/// (mean value theorem plus 2n+1 <= 3n), then compare with the integral of
/// the decreasing function t^{d-1-p}.
fn shell_tail(p: f64, dimension: usize, k: f64) -> f64 {
    let d = dimension as f64;
    2.0 * d * 3.0f64.powf(d - 1.0) * k.powf(d - p) / (p - d)
}

/// Bound on the tail sum_{||x||_inf > window} C e^{-eps ||x||}, via the same
/// l1 product majorant as [`coth_bound`] with the central cube subtracted:
/// S^d - S_r^d, computed in factored form to avoid cancellation.
pub fn exp_tail_bound(
    amplitude: f64,
    epsilon: f64,
    dimension: usize,
    window: usize,
) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tail bound needs epsilon > 0, got {epsilon}"
        )));
    }
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let a = epsilon / (dimension as f64).sqrt();
    let q = (-a).exp();
    let s = (1.0 + q) / (1.0 - q);
    // One-axis sum truncated to |n| <= window differs from the full line sum
    // by delta = 2 q^{window+1} / (1 - q).
    let delta = 2.0 * q.powi(window as i32 + 1) / (1.0 - q);
    let s_r = s - delta;
    // S^d - S_r^d = delta * sum_i S^i S_r^{d-1-i}, exact and cancellation-free.
    let mut poly = 0.0;
    for i in 0..dimension {
        poly += s.powi(i as i32) * s_r.powi((dimension - 1 - i) as i32);
    }
    Ok(amplitude * delta * poly)
}

/// Bound on the tail sum_{||x||_inf > window} C ||x||^{-p}: shell sums from
/// window+1 out to window+partial_terms, then the integral bound. Requires
/// p > d.
pub fn alg_tail_bound(
    amplitude: f64,
    p: f64,
    dimension: usize,
    window: usize,
    partial_terms: usize,
) -> Result<f64> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(p > dimension as f64) {
        return Err(Error::InvalidArgument(format!(
            "shell tail diverges unless p > d (p = {p}, d = {dimension})"
        )));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let k = partial_terms.max(1);
    let mut acc = KahanSum::new();
    for n in window + 1..=window + k {
        let nf = n as f64;
        acc.add(shell_count(dimension, nf) * nf.powf(-p));
    }
    Ok(amplitude * (acc.value() + shell_tail(p, dimension, (window + k) as f64)))
}

/// A certified bound on the spin-correlation mass outside a cube window,
/// derived from a decay fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCertificate {
    /// Bound on sum_{||x||_inf > window} |eta(x)|.
    pub bound: f64,
    pub law: DecayLaw,
    pub window: usize,
}

/// Derives a tail certificate from a fit, when the fit supports one: the fit
/// must not be flagged poor, and an algebraic law must decay faster than the
/// dimension. Directional (Ornstein-Zernike) fits do not certify isotropic
/// tails.
pub fn tail_certificate(fit: &DecayFit, dimension: usize, window: usize) -> Option<TailCertificate> {
    if fit.poor_fit {
        return None;
    }
    match fit.law {
        DecayLaw::Exponential => {
            let bound = exp_tail_bound(fit.amplitude, fit.rate, dimension, window).ok()?;
            Some(TailCertificate {
                bound,
                law: fit.law,
                window,
            })
        }
        DecayLaw::Algebraic => {
            if fit.rate <= dimension as f64 {
                return None;
            }
            let bound = alg_tail_bound(fit.amplitude, fit.rate, dimension, window, 100_000).ok()?;
            Some(TailCertificate {
                bound,
                law: fit.law,
                window,
            })
        }
        DecayLaw::OrnsteinZernike => None,
    }
}
