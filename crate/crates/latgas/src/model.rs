//! Translation-invariant pair interactions, their energy on a torus, and the
//! analytic conditions (uniqueness, moment bounds) used to certify decay.
//!
//! Energy convention: every unordered pair of sites contributes once,
//!
//! ```text
//! E(sigma) = -1/2 * sum_x sum_{r != 0} J(r) sigma_x sigma_{x+r}
//! ```
//!
//! and the Gibbs weight is exp(-beta * E). With this convention the
//! nearest-neighbor chain has the textbook correlation eta(x) = tanh(beta*J)^x
//! in infinite volume. All file formats stamp this choice with the
//! `unordered-pairs` convention tag.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{LatticeTorus, SpinConfiguration};

/// Convention tag written into every artifact header: each unordered pair of
/// sites contributes one bond to the energy (the half-sum convention above).
pub const CONVENTION_TAG: &str = "unordered-pairs";

/// Canonical representative of a displacement pair {r, -r}: the one whose
/// first nonzero component is positive.
pub(crate) fn canonical_displacement(r: &[i64]) -> Vec<i64> {
    match r.iter().find(|&&c| c != 0) {
        Some(&c) if c < 0 => r.iter().map(|&x| -x).collect(),
        _ => r.to_vec(),
    }
}

/// A finite-range, even pair coupling J on Z^d.
///
/// Invariants enforced at construction: J(r) = J(-r) (entries are stored once
/// per pair, under the canonical sign), J(0) = 0 (self-couplings are
/// dropped), all values finite, zero values dropped from the support.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMap {
    dimension: usize,
    /// Canonical displacement -> value. BTreeMap keeps iteration (and thus
    /// serialization) deterministic.
    entries: BTreeMap<Vec<i64>, f64>,
    range: f64,
    ferromagnetic: bool,
}

impl CouplingMap {
    /// Builds a coupling map from (displacement, value) pairs.
    ///
    /// Listing only one of r/-r is enough; listing both is accepted when the
    /// values agree exactly and rejected otherwise.
    pub fn new(dimension: usize, entries: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (r, value) in entries {
            if r.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: r.len(),
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFiniteCoupling { displacement: r });
            }
            if r.iter().all(|&c| c == 0) {
                continue; // J(0) is forced to zero
            }
            let key = canonical_displacement(&r);
            if let Some(&prev) = map.get(&key) {
                if prev != value {
                    return Err(Error::ConflictingCoupling {
                        displacement: r,
                        first: prev,
                        second: value,
                    });
                }
            } else {
                map.insert(key, value);
            }
        }
        map.retain(|_, v| *v != 0.0);
        let range = map
            .keys()
            .map(|r| euclid_norm_i(r))
            .fold(0.0f64, f64::max);
        let ferromagnetic = map.values().all(|&v| v >= 0.0);
        Ok(Self {
            dimension,
            entries: map,
            range,
            ferromagnetic,
        })
    }

    /// Nearest-neighbor coupling of strength `j` in `dimension` dimensions.
    pub fn nearest_neighbor(dimension: usize, j: f64) -> Result<Self> {
        let entries = (0..dimension).map(|axis| {
            let mut r = vec![0i64; dimension];
            r[axis] = 1;
            (r, j)
        });
        Self::new(dimension, entries)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Largest Euclidean displacement length in the support (0 when empty).
    pub fn range(&self) -> f64 {
        self.range
    }

    /// True iff every coupling value is nonnegative.
    pub fn is_ferromagnetic(&self) -> bool {
        self.ferromagnetic
    }

    /// J(r), looked up through the even symmetry; 0 off the support.
    pub fn value(&self, r: &[i64]) -> f64 {
        self.entries
            .get(&canonical_displacement(r))
            .copied()
            .unwrap_or(0.0)
    }

    /// One entry per unordered pair {r, -r}, canonical sign, sorted.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.entries.iter().map(|(r, &v)| (r.as_slice(), v))
    }

    /// Both signs of every support displacement, sorted canonically first.
    pub fn full_entries(&self) -> Vec<(Vec<i64>, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for (r, &v) in &self.entries {
            out.push((r.clone(), v));
            out.push((r.iter().map(|&c| -c).collect(), v));
        }
        out
    }

    /// Number of displacements in the full (two-sided) support.
    pub fn support_size(&self) -> usize {
        2 * self.entries.len()
    }
}

fn euclid_norm_i(r: &[i64]) -> f64 {
    r.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
}

/// The interaction of a coupling map compiled against a concrete torus:
/// per-site neighbor lists with coupling values. Validates dimension
/// agreement and the admissibility condition (every side > 2 * range) once,
/// so the hot sampling loops can skip those checks.
#[derive(Debug, Clone)]
pub struct BondTable {
    torus: LatticeTorus,
    /// neighbors[site] = (neighbor site, J(r)) over the full two-sided support.
    neighbors: Vec<Vec<(usize, f64)>>,
    ferromagnetic: bool,
}

impl BondTable {
    pub fn new(torus: &LatticeTorus, coupling: &CouplingMap) -> Result<Self> {
        if coupling.dimension() != torus.dimension() {
            return Err(Error::DimensionMismatch {
                expected: torus.dimension(),
                got: coupling.dimension(),
            });
        }
        torus.admits_range(coupling.range())?;
        let full = coupling.full_entries();
        let neighbors = (0..torus.n_sites())
            .map(|site| {
                full.iter()
                    .map(|(r, v)| (torus.translate(site, r), *v))
                    .collect()
            })
            .collect();
        Ok(Self {
            torus: torus.clone(),
            neighbors,
            ferromagnetic: coupling.is_ferromagnetic(),
        })
    }

    pub fn torus(&self) -> &LatticeTorus {
        &self.torus
    }

    pub fn n_sites(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.ferromagnetic
    }

    pub fn neighbors(&self, site: usize) -> &[(usize, f64)] {
        &self.neighbors[site]
    }

    /// Total energy under the unordered-pair convention.
    pub fn energy_of(&self, spins: &[i8]) -> f64 {
        let mut acc = 0.0f64;
        for (site, nb) in self.neighbors.iter().enumerate() {
            let s = spins[site] as f64;
            for &(other, j) in nb {
                acc += j * s * spins[other] as f64;
            }
        }
        -0.5 * acc
    }

    /// Energy change from flipping one site: 2 * sigma_site * sum_r J(r) * sigma_{site+r}.
    #[inline]
    pub fn flip_delta_of(&self, spins: &[i8], site: usize) -> f64 {
        let mut field = 0.0f64;
        for &(other, j) in &self.neighbors[site] {
            field += j * spins[other] as f64;
        }
        2.0 * spins[site] as f64 * field
    }
}

/// Total energy of a configuration: -1/2 sum_x sum_{r != 0} J(r) sigma_x sigma_{x+r}.
///
/// Convenience form that compiles the interaction on the fly; build a
/// [`BondTable`] once for repeated evaluation.
pub fn energy(config: &SpinConfiguration, coupling: &CouplingMap) -> Result<f64> {
    let bonds = BondTable::new(config.torus(), coupling)?;
    Ok(bonds.energy_of(config.spins()))
}

/// Energy change from flipping `site`, equal to
/// `energy(flipped) - energy(config)` up to rounding.
pub fn flip_delta(config: &SpinConfiguration, coupling: &CouplingMap, site: usize) -> Result<f64> {
    if site >= config.n_sites() {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: config.n_sites(),
        });
    }
    let bonds = BondTable::new(config.torus(), coupling)?;
    Ok(bonds.flip_delta_of(config.spins(), site))
}

/// Outcome of the uniqueness condition check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// beta * sum_{r != 0} tanh|J(r)|; uniqueness certified when < 1 (strict).
    pub sum: f64,
    pub holds: bool,
    /// The simpler sufficient variant beta * sum_{r != 0} |J(r)|, which
    /// certifies when <= 1.
    pub sufficient_sum: f64,
    pub sufficient_holds: bool,
}

/// High-temperature uniqueness condition: beta * sum_{r != 0} tanh|J(r)| < 1.
///
/// The boundary case (sum exactly 1) is reported as failing the strict
/// condition. Also evaluates the coarser sufficient variant
/// beta * sum |J(r)| <= 1.
pub fn dobrushin_check(coupling: &CouplingMap, beta: f64) -> Result<ConditionReport> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "uniqueness check needs finite beta > 0, got {beta}"
        )));
    }
    let mut tanh_sum = 0.0f64;
    let mut abs_sum = 0.0f64;
    for (_, v) in coupling.full_entries() {
        tanh_sum += v.abs().tanh();
        abs_sum += v.abs();
    }
    let sum = beta * tanh_sum;
    let sufficient_sum = beta * abs_sum;
    Ok(ConditionReport {
        sum,
        holds: sum < 1.0,
        sufficient_sum,
        sufficient_holds: sufficient_sum <= 1.0,
    })
}

/// Exponential moment of the coupling: beta * sum_{r != 0} e^{t * ||r||} * |J(r)|.
/// Finite for every finite-range map; the decay machinery requires t > 0.
pub fn exp_moment(coupling: &CouplingMap, beta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "exponential moment needs t > 0, got {t}"
        )));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "exponential moment needs finite beta > 0, got {beta}"
        )));
    }
    let mut acc = 0.0f64;
    for (r, v) in coupling.full_entries() {
        acc += (t * euclid_norm_i(&r)).exp() * v.abs();
    }
    Ok(beta * acc)
}

/// Algebraic moment of the coupling: beta * sum_{r != 0} ||r||^p * |J(r)|.
pub fn alg_moment(coupling: &CouplingMap, beta: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "algebraic moment needs p > 0, got {p}"
        )));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "algebraic moment needs finite beta > 0, got {beta}"
        )));
    }
    let mut acc = 0.0f64;
    for (r, v) in coupling.full_entries() {
        acc += euclid_norm_i(&r).powf(p) * v.abs();
    }
    Ok(beta * acc)
}

/// An invertible linear map identifying an arbitrary lattice with Z^d.
/// Displacements of a coupling on the lattice are given in its integer
/// lattice coordinates; the map carries them onto Z^d displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    matrix: DMatrix<f64>,
}

impl LatticeBasis {
    /// Builds the basis from rows. The matrix must be square and invertible;
    /// near-singular matrices (condition of the singular values worse than
    /// 1e12) are rejected.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(
                "basis matrix must be square and non-empty".into(),
            ));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("basis matrix must be finite".into()));
        }
        let matrix = DMatrix::from_row_iterator(d, d, rows.iter().flatten().copied());
        let svd = matrix.clone().svd(false, false);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        if !(s_min > 0.0) || s_min < 1e-12 * s_max {
            return Err(Error::SingularBasis);
        }
        Ok(Self { matrix })
    }

    pub fn identity(dimension: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dimension, dimension),
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Operator (spectral) norm: the largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.matrix.clone().svd(false, false).singular_values.max()
    }

    /// Image of an integer displacement under the basis map.
    pub fn apply(&self, r: &[i64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_iterator(r.len(), r.iter().map(|&c| c as f64));
        (&self.matrix * v).iter().copied().collect()
    }
}

/// Transports a coupling given in the integer coordinates of an arbitrary
/// lattice onto Z^d through the basis map A: displacement c becomes A*c.
///
/// Every image must be an integer vector (within 1e-9); the resulting range
/// is bounded by `basis.spectral_norm() * coupling.range()`.
pub fn lattice_to_zd(coupling: &CouplingMap, basis: &LatticeBasis) -> Result<CouplingMap> {
    if basis.dimension() != coupling.dimension() {
        return Err(Error::DimensionMismatch {
            expected: coupling.dimension(),
            got: basis.dimension(),
        });
    }
    let mut entries = Vec::new();
    for (r, v) in coupling.canonical_entries() {
        let image = basis.apply(r);
        let mut integral = Vec::with_capacity(image.len());
        for &x in &image {
            let rounded = x.round();
            if (x - rounded).abs() > 1e-9 {
                return Err(Error::NonIntegerImage {
                    displacement: r.to_vec(),
                });
            }
            integral.push(rounded as i64);
        }
        if integral.iter().all(|&c| c == 0) {
            // An invertible map sends nonzero vectors to nonzero vectors;
            // landing on zero means the rounding tolerance was abused.
            return Err(Error::NonIntegerImage {
                displacement: r.to_vec(),
            });
        }
        entries.push((integral, v));
    }
    CouplingMap::new(coupling.dimension(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chain_nn(j: f64) -> CouplingMap {
        CouplingMap::nearest_neighbor(1, j).unwrap()
    }

    #[test]
    fn coupling_symmetrizes_and_drops_zero() {
        let j = CouplingMap::new(2, vec![(vec![-1, 0], 2.0), (vec![0, 0], 9.0), (vec![0, 1], 0.0)])
            .unwrap();
        assert_eq!(j.value(&[1, 0]), 2.0);
        assert_eq!(j.value(&[-1, 0]), 2.0);
        assert_eq!(j.value(&[0, 0]), 0.0);
        assert_eq!(j.value(&[0, 1]), 0.0);
        assert_eq!(j.support_size(), 2);
        assert_relative_eq!(j.range(), 1.0);
        assert!(j.is_ferromagnetic());
    }

    #[test]
    fn coupling_rejects_conflicts_and_nonfinite() {
        let err = CouplingMap::new(1, vec![(vec![1], 1.0), (vec![-1], 2.0)]);
        assert!(matches!(err, Err(Error::ConflictingCoupling { .. })));
        // Listing both signs with equal values is fine.
        assert!(CouplingMap::new(1, vec![(vec![1], 1.0), (vec![-1], 1.0)]).is_ok());
        assert!(CouplingMap::new(1, vec![(vec![1], f64::NAN)]).is_err());
        assert!(CouplingMap::new(1, vec![(vec![1, 2], 1.0)]).is_err());
    }

    #[test]
    fn ferromagnetic_flag_tracks_signs() {
        assert!(chain_nn(1.0).is_ferromagnetic());
        assert!(!chain_nn(-1.0).is_ferromagnetic());
        // Empty support is vacuously ferromagnetic.
        assert!(CouplingMap::new(1, vec![]).unwrap().is_ferromagnetic());
    }

    #[test]
    fn range_is_euclidean() {
        let j = CouplingMap::new(2, vec![(vec![1, 1], 0.5), (vec![2, 0], 0.25)]).unwrap();
        assert_relative_eq!(j.range(), 2.0);
        let j2 = CouplingMap::new(2, vec![(vec![1, 1], 0.5)]).unwrap();
        assert_relative_eq!(j2.range(), 2.0f64.sqrt());
    }

    #[test]
    fn chain_energy_matches_hand_count() {
        // 4-site ring, all spins up: 4 bonds, each contributing -1.
        let torus = LatticeTorus::new(&[4]).unwrap();
        let j = chain_nn(1.0);
        let up = SpinConfiguration::all_plus(&torus);
        assert_relative_eq!(energy(&up, &j).unwrap(), -4.0);
        // Alternating spins: every bond frustrated.
        let alt = SpinConfiguration::from_spins(&torus, vec![1, -1, 1, -1]).unwrap();
        assert_relative_eq!(energy(&alt, &j).unwrap(), 4.0);
    }

    #[test]
    fn flip_delta_on_aligned_ring() {
        // Flipping one spin in the aligned 4-ring breaks two unit bonds: +4.
        let torus = LatticeTorus::new(&[4]).unwrap();
        let j = chain_nn(1.0);
        let up = SpinConfiguration::all_plus(&torus);
        assert_relative_eq!(flip_delta(&up, &j, 0).unwrap(), 4.0);
    }

    #[test]
    fn flip_delta_matches_energy_difference() {
        // 100 random configurations/sites on a 2D torus with a range-2 map.
        let torus = LatticeTorus::new(&[5, 6]).unwrap();
        let j = CouplingMap::new(
            2,
            vec![(vec![1, 0], 1.0), (vec![0, 1], -0.5), (vec![1, 1], 0.25), (vec![2, 0], -0.125)],
        )
        .unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..100 {
            let spins: Vec<i8> = (0..torus.n_sites())
                .map(|_| if next() & 1 == 1 { 1 } else { -1 })
                .collect();
            let mut config = SpinConfiguration::from_spins(&torus, spins).unwrap();
            let site = (next() % torus.n_sites() as u64) as usize;
            let before = energy(&config, &j).unwrap();
            let predicted = flip_delta(&config, &j, site).unwrap();
            config.flip(site);
            let after = energy(&config, &j).unwrap();
            assert!((after - before - predicted).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_is_translation_invariant_and_z2_even() {
        // Integer-valued couplings keep the arithmetic exact, so equality is
        // literal here, not approximate.
        let torus = LatticeTorus::new(&[5, 7]).unwrap();
        let j = CouplingMap::new(2, vec![(vec![1, 0], 2.0), (vec![0, 1], 3.0), (vec![1, -1], 1.0)])
            .unwrap();
        let spins: Vec<i8> = (0..torus.n_sites())
            .map(|i| if (i * i + 3 * i) % 5 < 2 { 1 } else { -1 })
            .collect();
        let config = SpinConfiguration::from_spins(&torus, spins.clone()).unwrap();
        let e0 = energy(&config, &j).unwrap();

        // Shift the whole field by (2, 3).
        let shifted: Vec<i8> = (0..torus.n_sites())
            .map(|i| {
                let c = torus.coords_of(i);
                spins[torus.index_of(&[c[0] - 2, c[1] - 3])]
            })
            .collect();
        let shifted = SpinConfiguration::from_spins(&torus, shifted).unwrap();
        assert_eq!(energy(&shifted, &j).unwrap(), e0);

        let mut negated = config.clone();
        negated.negate();
        assert_eq!(energy(&negated, &j).unwrap(), e0);
    }

    #[test]
    fn bond_table_rejects_inadmissible_torus() {
        let torus = LatticeTorus::new(&[4]).unwrap();
        let j = CouplingMap::new(1, vec![(vec![2], 1.0)]).unwrap(); // range 2 needs side > 4
        assert!(matches!(
            BondTable::new(&torus, &j),
            Err(Error::TorusTooSmall { .. })
        ));
        let torus5 = LatticeTorus::new(&[5]).unwrap();
        assert!(BondTable::new(&torus5, &j).is_ok());
    }

    #[test]
    fn dobrushin_sums_match_frozen_values() {
        // 1D nearest-neighbor J = 1: sum = beta * 2 * tanh(1).
        let j = chain_nn(1.0);
        let r = dobrushin_check(&j, 0.3).unwrap();
        assert_relative_eq!(r.sum, 0.4569564935734589, max_relative = 1e-14);
        assert!(r.holds);
        assert_relative_eq!(r.sufficient_sum, 0.6, max_relative = 1e-14);
        assert!(r.sufficient_holds);

        let r = dobrushin_check(&j, 0.7).unwrap();
        assert_relative_eq!(r.sum, 1.0662318183380708, max_relative = 1e-14);
        assert!(!r.holds);
        assert_relative_eq!(r.sufficient_sum, 1.4, max_relative = 1e-14);
        assert!(!r.sufficient_holds);
    }

    #[test]
    fn dobrushin_boundary_fails_strict_condition() {
        // beta chosen so the tanh sum is exactly 1 within rounding: the
        // strict check must report failure at the boundary.
        let j = chain_nn(1.0);
        let beta_star = 1.0 / (2.0 * 1.0f64.tanh());
        let r = dobrushin_check(&j, beta_star).unwrap();
        assert!((r.sum - 1.0).abs() < 1e-15);
        assert!(!r.holds || r.sum < 1.0);
    }

    #[test]
    fn dobrushin_is_monotone_in_beta() {
        let j = CouplingMap::new(2, vec![(vec![1, 0], 0.7), (vec![0, 1], -0.3), (vec![1, 1], 0.1)])
            .unwrap();
        let mut prev_holds = true;
        for i in 1..200 {
            let beta = i as f64 * 0.02;
            let r = dobrushin_check(&j, beta).unwrap();
            // Once the condition fails it must stay failed as beta grows.
            if !prev_holds {
                assert!(!r.holds, "condition regained at beta = {beta}");
            }
            prev_holds = r.holds;
        }
    }

    #[test]
    fn moments_match_frozen_values() {
        // 1D NN, beta = 1, t = 0.1: 2 * e^0.1.
        let j = chain_nn(1.0);
        assert_relative_eq!(
            exp_moment(&j, 1.0, 0.1).unwrap(),
            2.2103418361512954,
            max_relative = 1e-14
        );
        // 2D NN, beta = 0.5, t = 1: 0.5 * 4 * e.
        let j2 = CouplingMap::nearest_neighbor(2, 1.0).unwrap();
        assert_relative_eq!(
            exp_moment(&j2, 0.5, 1.0).unwrap(),
            5.43656365691809,
            max_relative = 1e-14
        );
        // 1D NN, beta = 0.5, p = 2: 0.5 * 2 * 1.
        assert_relative_eq!(alg_moment(&j, 0.5, 2.0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(exp_moment(&j, 1.0, 0.0).is_err());
        assert!(exp_moment(&j, 0.0, 0.1).is_err());
        assert!(alg_moment(&j, 1.0, -1.0).is_err());
    }

    #[test]
    fn basis_rejects_singular_matrices() {
        assert!(LatticeBasis::new(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
        assert!(LatticeBasis::new(&[vec![1.0, 0.0], vec![0.0, 1e-15]]).is_err());
        assert!(LatticeBasis::new(&[vec![1.0, 0.0]]).is_err()); // not square
        assert!(LatticeBasis::new(&[vec![2.0, 0.0], vec![0.0, 1.0]]).is_ok());
    }

    #[test]
    fn spectral_norm_of_diagonal_and_rotation() {
        let b = LatticeBasis::new(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_relative_eq!(b.spectral_norm(), 2.0, max_relative = 1e-12);
        // Rotations are isometries.
        let (s, c) = 0.7f64.sin_cos();
        let rot = LatticeBasis::new(&[vec![c, -s], vec![s, c]]).unwrap();
        assert_relative_eq!(rot.spectral_norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn lattice_map_stretches_displacements() {
        let j = CouplingMap::nearest_neighbor(2, 1.5).unwrap();
        let basis = LatticeBasis::new(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mapped = lattice_to_zd(&j, &basis).unwrap();
        assert_eq!(mapped.value(&[2, 0]), 1.5);
        assert_eq!(mapped.value(&[0, 1]), 1.5);
        assert_eq!(mapped.value(&[1, 0]), 0.0);
        // Range bounded by ||A||_2 * input range.
        assert!(mapped.range() <= basis.spectral_norm() * j.range() + 1e-12);
    }

    #[test]
    fn lattice_map_identity_is_noop() {
        let j = CouplingMap::new(2, vec![(vec![1, 0], 1.0), (vec![1, -1], -0.5)]).unwrap();
        let mapped = lattice_to_zd(&j, &LatticeBasis::identity(2)).unwrap();
        assert_eq!(mapped, j);
    }

    #[test]
    fn lattice_map_preserves_coupling_multiset_on_unimodular_skew() {
        // Six-neighbor star in triangular-lattice coordinates, pushed through
        // a unimodular skew: six images, same coupling values.
        let j = CouplingMap::new(
            2,
            vec![(vec![1, 0], 1.0), (vec![0, 1], 1.0), (vec![1, -1], 1.0)],
        )
        .unwrap();
        let basis = LatticeBasis::new(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let mapped = lattice_to_zd(&j, &basis).unwrap();
        assert_eq!(mapped.support_size(), 6);
        let mut values: Vec<f64> = mapped.canonical_entries().map(|(_, v)| v).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values, vec![1.0, 1.0, 1.0]);
        assert!(mapped.range() <= basis.spectral_norm() * j.range() + 1e-12);
    }

    #[test]
    fn lattice_map_rejects_non_integer_images() {
        let j = CouplingMap::nearest_neighbor(2, 1.0).unwrap();
        let basis = LatticeBasis::new(&[vec![0.5, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            lattice_to_zd(&j, &basis),
            Err(Error::NonIntegerImage { .. })
        ));
    }
}
