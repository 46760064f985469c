//! TOML job descriptions. A job file pins everything a run needs — model,
//! chain parameters, analysis window, grid resolution — so results are
//! reproducible from the file plus the seed alone. Unknown keys are
//! rejected rather than ignored: a typo must not silently change a run.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{lattice_to_zd, CouplingMap, LatticeBasis};
use crate::sampler::Algorithm;

pub const SUPPORTED_SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub spec_version: u32,
    pub model: ModelConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub diffraction: DiffractionConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    /// `"nearest-neighbor"` with `coupling`, or explicit `entries`.
    pub preset: Option<String>,
    pub coupling: Option<f64>,
    pub entries: Option<Vec<CouplingEntry>>,
    /// Change of basis for models stated on a non-cubic lattice; entries are
    /// integer coordinates in that lattice's own basis and the matrix maps
    /// them onto the simulation grid.
    pub basis: Option<BasisConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub x: Vec<i64>,
    pub j: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lengths: Vec<usize>,
    pub beta: f64,
    pub seed: u64,
    pub algorithm: String,
    pub n_samples: usize,
    #[serde(default = "default_thin")]
    pub thin_sweeps: usize,
    /// `None` calibrates burn-in from a pilot run.
    pub burn_in_sweeps: Option<usize>,
    /// Independent chains pooled into one sample set (default 1).
    pub chains: Option<usize>,
}

fn default_thin() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisMode {
    /// Estimate correlations from recorded samples.
    Mcmc,
    /// Enumerate the Gibbs measure exactly (small systems only).
    Exact,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_mode")]
    pub mode: AnalysisMode,
    /// Correlation window per axis; `None` picks min(16, (L-1)/2).
    pub window: Option<Vec<usize>>,
    #[serde(default = "default_fit_r_min")]
    pub fit_r_min: f64,
    /// Exponential-moment rate to check, when set.
    pub exp_moment_t: Option<f64>,
    /// Algebraic-moment exponent to check, when set.
    pub alg_moment_p: Option<f64>,
}

fn default_mode() -> AnalysisMode {
    AnalysisMode::Mcmc
}

fn default_fit_r_min() -> f64 {
    crate::correlation::DEFAULT_FIT_R_MIN
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            window: None,
            fit_r_min: default_fit_r_min(),
            exp_moment_t: None,
            alg_moment_p: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffractionConfig {
    #[serde(default = "default_grid")]
    pub grid_m: usize,
}

fn default_grid() -> usize {
    128
}

impl Default for DiffractionConfig {
    fn default() -> Self {
        Self { grid_m: default_grid() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

impl JobConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: JobConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read job file {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.spec_version != SUPPORTED_SPEC_VERSION {
            return fail(format!(
                "spec_version {} is not supported (this build reads version {SUPPORTED_SPEC_VERSION})",
                self.spec_version
            ));
        }
        let d = self.model.dimension;
        if d == 0 {
            return fail("model.dimension must be at least 1".into());
        }
        match (&self.model.preset, &self.model.entries) {
            (Some(p), None) => {
                if p != "nearest-neighbor" {
                    return fail(format!("unknown model preset '{p}'"));
                }
                if self.model.coupling.is_none() {
                    return fail("preset 'nearest-neighbor' needs model.coupling".into());
                }
            }
            (None, Some(entries)) => {
                if entries.is_empty() {
                    return fail("model.entries must not be empty".into());
                }
                if self.model.coupling.is_some() {
                    return fail("model.coupling only accompanies a preset".into());
                }
            }
            (Some(_), Some(_)) => {
                return fail("give model.preset or model.entries, not both".into())
            }
            (None, None) => return fail("model needs a preset or explicit entries".into()),
        }
        if let Some(basis) = &self.model.basis {
            if basis.matrix.len() != d || basis.matrix.iter().any(|row| row.len() != d) {
                return fail(format!("basis.matrix must be {d}x{d}"));
            }
        }
        if self.run.lengths.len() != d {
            return fail(format!(
                "run.lengths lists {} sides for a {d}-dimensional model",
                self.run.lengths.len()
            ));
        }
        if !self.run.beta.is_finite() || self.run.beta < 0.0 {
            return fail(format!(
                "run.beta must be finite and nonnegative, got {}",
                self.run.beta
            ));
        }
        Algorithm::from_str(&self.run.algorithm)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.run.n_samples < 2 {
            return fail("run.n_samples must be at least 2".into());
        }
        if self.run.thin_sweeps == 0 {
            return fail("run.thin_sweeps must be at least 1".into());
        }
        if self.run.chains == Some(0) {
            return fail("run.chains must be at least 1".into());
        }
        if let Some(window) = &self.analysis.window {
            if window.len() != d {
                return fail(format!(
                    "analysis.window lists {} extents for a {d}-dimensional model",
                    window.len()
                ));
            }
        }
        if !(self.analysis.fit_r_min > 0.0) {
            return fail(format!(
                "analysis.fit_r_min must be positive, got {}",
                self.analysis.fit_r_min
            ));
        }
        if let Some(t) = self.analysis.exp_moment_t {
            if !(t > 0.0) {
                return fail(format!("analysis.exp_moment_t must be positive, got {t}"));
            }
        }
        if let Some(p) = self.analysis.alg_moment_p {
            if !(p > 0.0) {
                return fail(format!("analysis.alg_moment_p must be positive, got {p}"));
            }
        }
        if self.diffraction.grid_m < 2 {
            return fail(format!(
                "diffraction.grid_m must be at least 2, got {}",
                self.diffraction.grid_m
            ));
        }
        Ok(())
    }

    /// The model's coupling on the simulation grid: presets expand, explicit
    /// entries validate, and a basis (when given) transports the entries.
    pub fn coupling_map(&self) -> Result<CouplingMap> {
        let d = self.model.dimension;
        let raw = if let Some(j) = self.model.coupling {
            CouplingMap::nearest_neighbor(d, j)?
        } else {
            let entries = self
                .model
                .entries
                .as_ref()
                .expect("validated: entries present when no preset")
                .iter()
                .map(|e| (e.x.clone(), e.j))
                .collect::<Vec<_>>();
            CouplingMap::new(d, entries)?
        };
        match &self.model.basis {
            Some(b) => {
                let rows: Vec<Vec<f64>> = b.matrix.clone();
                let basis = LatticeBasis::new(&rows)?;
                lattice_to_zd(&raw, &basis)
            }
            None => Ok(raw),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        Algorithm::from_str(&self.run.algorithm).expect("validated")
    }

    /// Analysis window per axis: explicit, or min(16, (L-1)/2). The cap at
    /// just under the half-period avoids the displacement class that the
    /// torus counts once but the infinite-volume series counts twice.
    pub fn analysis_window(&self) -> Vec<usize> {
        match &self.analysis.window {
            Some(w) => w.clone(),
            None => self
                .run
                .lengths
                .iter()
                .map(|&l| 16.min(l.saturating_sub(1) / 2))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        spec_version = 1

        [model]
        dimension = 1
        preset = "nearest-neighbor"
        coupling = 1.0

        [run]
        lengths = [64]
        beta = 0.5
        seed = 1
        algorithm = "metropolis"
        n_samples = 100
    "#;

    #[test]
    fn minimal_job_parses_with_defaults() {
        let job = JobConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(job.run.thin_sweeps, 1);
        assert_eq!(job.run.burn_in_sweeps, None);
        assert_eq!(job.analysis.mode, AnalysisMode::Mcmc);
        assert_eq!(job.analysis.fit_r_min, 2.0);
        assert_eq!(job.diffraction.grid_m, 128);
        assert_eq!(job.analysis_window(), vec![16]);
        assert_eq!(job.algorithm(), Algorithm::Metropolis);
        let coupling = job.coupling_map().unwrap();
        assert_eq!(coupling.value(&[1]), 1.0);
        assert_eq!(coupling.value(&[-1]), 1.0);
    }

    #[test]
    fn window_default_respects_small_tori() {
        let text = MINIMAL.replace("lengths = [64]", "lengths = [7]");
        let job = JobConfig::from_toml_str(&text).unwrap();
        assert_eq!(job.analysis_window(), vec![3]);
    }

    #[test]
    fn explicit_entries_and_basis_transport() {
        let job = JobConfig::from_toml_str(
            r#"
            spec_version = 1

            [model]
            dimension = 2
            entries = [{ x = [1, 0], j = 0.5 }, { x = [0, 1], j = 0.25 }]

            [model.basis]
            matrix = [[1.0, 1.0], [0.0, 1.0]]

            [run]
            lengths = [8, 8]
            beta = 0.3
            seed = 9
            algorithm = "wolff"
            n_samples = 50

            [analysis]
            mode = "exact"
            window = [2, 2]
            "#,
        )
        .unwrap();
        let coupling = job.coupling_map().unwrap();
        // (1,0) maps to (1,0); (0,1) maps to (1,1) under the shear.
        assert_eq!(coupling.value(&[1, 0]), 0.5);
        assert_eq!(coupling.value(&[1, 1]), 0.25);
        assert_eq!(coupling.value(&[0, 1]), 0.0);
        assert_eq!(job.analysis.mode, AnalysisMode::Exact);
    }

    #[test]
    fn rejections_cover_each_field() {
        let cases: Vec<(&str, &str)> = vec![
            ("spec_version = 1", "spec_version = 2"),
            ("dimension = 1", "dimension = 0"),
            ("lengths = [64]", "lengths = [64, 64]"),
            ("beta = 0.5", "beta = -0.5"),
            ("beta = 0.5", "beta = inf"),
            ("algorithm = \"metropolis\"", "algorithm = \"glauber\""),
            ("n_samples = 100", "n_samples = 1"),
            ("preset = \"nearest-neighbor\"", "preset = \"next-nearest\""),
        ];
        for (from, to) in cases {
            let text = MINIMAL.replace(from, to);
            assert!(
                matches!(JobConfig::from_toml_str(&text), Err(Error::Config(_))),
                "expected rejection after {from} -> {to}"
            );
        }
        // Unknown keys are config errors, not silently dropped.
        let text = format!("{MINIMAL}\n[analysis]\nwindw = [3]\n");
        assert!(matches!(
            JobConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
        // Missing model body entirely.
        assert!(matches!(
            JobConfig::from_toml_str("spec_version = 1"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn preset_and_entries_are_mutually_exclusive() {
        let text = MINIMAL.replace(
            "coupling = 1.0",
            "coupling = 1.0\nentries = [{ x = [1], j = 1.0 }]",
        );
        assert!(matches!(
            JobConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
    }
}
