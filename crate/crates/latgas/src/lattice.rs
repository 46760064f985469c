//! Periodic simulation volumes and the +/-1 spin fields living on them.

use crate::error::{Error, Result};

/// A d-dimensional periodic box of sites Z_{L_1} x ... x Z_{L_d}.
///
/// Sites are stored row-major: the last axis varies fastest. Every side must
/// be at least 2 so that each axis actually wraps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeTorus {
    lengths: Vec<usize>,
}

impl LatticeTorus {
    pub fn new(lengths: &[usize]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::EmptyTorus);
        }
        for &side in lengths {
            if side < 2 {
                return Err(Error::DegenerateTorus { side });
            }
        }
        Ok(Self {
            lengths: lengths.to_vec(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn n_sites(&self) -> usize {
        self.lengths.iter().product()
    }

    /// Checks that every side exceeds twice the interaction range, so a
    /// displacement and its mirror never alias to the same neighbor.
    pub fn admits_range(&self, range: f64) -> Result<()> {
        for &side in &self.lengths {
            if side as f64 <= 2.0 * range {
                return Err(Error::TorusTooSmall { side, range });
            }
        }
        Ok(())
    }

    /// Flat index of a coordinate vector; coordinates wrap modulo the sides.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.lengths.len());
        let mut idx = 0usize;
        for (c, &side) in coords.iter().zip(&self.lengths) {
            let wrapped = c.rem_euclid(side as i64) as usize;
            idx = idx * side + wrapped;
        }
        idx
    }

    /// Coordinate vector of a flat site index.
    pub fn coords_of(&self, index: usize) -> Vec<i64> {
        debug_assert!(index < self.n_sites());
        let mut coords = vec![0i64; self.lengths.len()];
        let mut rest = index;
        for axis in (0..self.lengths.len()).rev() {
            coords[axis] = (rest % self.lengths[axis]) as i64;
            rest /= self.lengths[axis];
        }
        coords
    }

    /// Site reached from `index` by a displacement vector (with wraparound).
    pub fn translate(&self, index: usize, displacement: &[i64]) -> usize {
        let mut coords = self.coords_of(index);
        for (c, d) in coords.iter_mut().zip(displacement) {
            *c += d;
        }
        self.index_of(&coords)
    }
}

/// A +/-1 spin field on a torus. In lattice-gas form, spin sigma corresponds
/// to occupation n = (sigma + 1)/2 in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    torus: LatticeTorus,
    spins: Vec<i8>,
}

impl SpinConfiguration {
    /// The all-up configuration, the documented deterministic initial state
    /// of every sampling run.
    pub fn all_plus(torus: &LatticeTorus) -> Self {
        Self {
            spins: vec![1; torus.n_sites()],
            torus: torus.clone(),
        }
    }

    pub fn from_spins(torus: &LatticeTorus, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != torus.n_sites() {
            return Err(Error::InvalidArgument(format!(
                "expected {} spins, got {}",
                torus.n_sites(),
                spins.len()
            )));
        }
        if let Some(bad) = spins.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidArgument(format!(
                "spins must be +1 or -1, got {bad}"
            )));
        }
        Ok(Self {
            torus: torus.clone(),
            spins,
        })
    }

    /// Configuration encoded by a state index: bit j set means spin +1 at
    /// site j. Inverse of [`state_index`](Self::state_index).
    pub fn from_state_index(torus: &LatticeTorus, state: u64) -> Result<Self> {
        let n = torus.n_sites();
        if n > 63 {
            return Err(Error::InvalidArgument(format!(
                "state index encoding supports at most 63 sites, torus has {n}"
            )));
        }
        let spins = (0..n)
            .map(|j| if state >> j & 1 == 1 { 1 } else { -1 })
            .collect();
        Ok(Self {
            torus: torus.clone(),
            spins,
        })
    }

    pub fn torus(&self) -> &LatticeTorus {
        &self.torus
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, site: usize) -> i8 {
        self.spins[site]
    }

    pub fn flip(&mut self, site: usize) {
        self.spins[site] = -self.spins[site];
    }

    /// Flips every spin (global Z2 action).
    pub fn negate(&mut self) {
        for s in &mut self.spins {
            *s = -*s;
        }
    }

    pub fn mean_spin(&self) -> f64 {
        let total: i64 = self.spins.iter().map(|&s| s as i64).sum();
        total as f64 / self.spins.len() as f64
    }

    /// Occupation number at a site: 1 for spin up, 0 for spin down.
    pub fn occupation(&self, site: usize) -> u8 {
        ((self.spins[site] + 1) / 2) as u8
    }

    /// Compact state label for small systems: bit j set iff spin at site j is
    /// +1. `None` when the system has more than 63 sites.
    pub fn state_index(&self) -> Option<u64> {
        if self.spins.len() > 63 {
            return None;
        }
        let mut state = 0u64;
        for (j, &s) in self.spins.iter().enumerate() {
            if s == 1 {
                state |= 1 << j;
            }
        }
        Some(state)
    }
}
