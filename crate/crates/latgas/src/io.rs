//! Artifact serialization: correlation and spectrum tables as
//! tab-separated text with self-describing headers, sample streams as a
//! compact bit-packed binary, and a checksum manifest that makes a result
//! directory tamper-evident. All writers are deterministic — identical
//! inputs produce byte-identical files — so reruns can be diffed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::correlation::{CorrelationTable, Observable, TableSource};
use crate::diffraction::{DiffractionResult, PropertyReport, StructureFactorEstimate};
use crate::error::{Error, Result};
use crate::lattice::{LatticeTorus, SpinConfiguration};
use crate::model::CONVENTION_TAG;
use crate::sampler::Algorithm;

const CORRELATION_FORMAT: &str = "latgas-correlations v1";
const SPECTRUM_FORMAT: &str = "latgas-spectrum v1";
const STRUCTURE_FACTOR_FORMAT: &str = "latgas-structure-factor v1";
const SAMPLES_MAGIC: &[u8; 8] = b"LATGASMC";
const SAMPLES_VERSION: u32 = 1;

/// Artifacts the manifest covers, in the order the pipeline produces them.
pub const KNOWN_ARTIFACTS: &[&str] = &[
    "conditions.txt",
    "samples.bin",
    "stats.txt",
    "correlations_spin.tsv",
    "correlations_density.tsv",
    "fits.txt",
    "spectrum.tsv",
    "structure_factor.tsv",
    "checks.txt",
];

pub const MANIFEST_NAME: &str = "MANIFEST.tsv";

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::FileFormat {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Writes a correlation table as TSV: `#`-prefixed `key: value` headers,
/// then one row per canonical displacement.
pub fn write_correlation_table(path: &Path, table: &CorrelationTable) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# format: {CORRELATION_FORMAT}")?;
    writeln!(out, "# convention: {CONVENTION_TAG}")?;
    writeln!(out, "# dimension: {}", table.dimension())?;
    writeln!(out, "# observable: {}", table.observable.as_str())?;
    writeln!(out, "# source: {}", table.source.as_str())?;
    if let Some(beta) = table.beta {
        writeln!(out, "# beta: {beta:.16e}")?;
    }
    if let Some(ferro) = table.ferromagnetic_model {
        writeln!(out, "# ferromagnetic: {ferro}")?;
    }
    let window: Vec<String> = table.window().iter().map(|w| w.to_string()).collect();
    writeln!(out, "# window: {}", window.join(" "))?;
    let axes: Vec<String> = (1..=table.dimension()).map(|i| format!("x{i}")).collect();
    writeln!(out, "# columns: {} value std_err", axes.join(" "))?;
    for (x, v, se) in table.canonical_entries() {
        let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}\t{v:.16e}\t{se:.16e}", coords.join("\t"))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a table written by [`write_correlation_table`], re-validating every
/// entry against the table invariants.
pub fn read_correlation_table(path: &Path) -> Result<CorrelationTable> {
    let file = BufReader::new(File::open(path)?);
    let mut headers: Vec<(String, String)> = Vec::new();
    let mut rows: Vec<String> = Vec::new();
    for line in file.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            match rest.trim().split_once(':') {
                Some((k, v)) => headers.push((k.trim().to_string(), v.trim().to_string())),
                None => return Err(format_err(path, format!("malformed header line: {line}"))),
            }
        } else if !line.trim().is_empty() {
            rows.push(line);
        }
    }
    let header = |key: &str| -> Option<&str> {
        headers
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let require = |key: &str| -> Result<&str> {
        header(key).ok_or_else(|| format_err(path, format!("missing header: {key}")))
    };
    match headers.first() {
        Some((k, v)) if k == "format" && v == CORRELATION_FORMAT => {}
        _ => {
            return Err(format_err(
                path,
                format!("first header must be 'format: {CORRELATION_FORMAT}'"),
            ))
        }
    }
    let convention = require("convention")?;
    if convention != CONVENTION_TAG {
        return Err(format_err(
            path,
            format!("energy convention '{convention}' is not '{CONVENTION_TAG}'"),
        ));
    }
    let dimension: usize = require("dimension")?
        .parse()
        .map_err(|e| format_err(path, format!("bad dimension: {e}")))?;
    let observable = match require("observable")? {
        "spin" => Observable::Spin,
        "density" => Observable::Density,
        other => return Err(format_err(path, format!("unknown observable '{other}'"))),
    };
    let source = match require("source")? {
        "mcmc" => TableSource::Mcmc,
        "exact" => TableSource::Exact,
        other => return Err(format_err(path, format!("unknown source '{other}'"))),
    };
    let window: Vec<usize> = require("window")?
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format_err(path, format!("bad window: {e}")))?;
    let mut table = CorrelationTable::new(dimension, window, source, observable)?;
    if let Some(beta) = header("beta") {
        table.beta = Some(
            beta.parse::<f64>()
                .map_err(|e| format_err(path, format!("bad beta: {e}")))?,
        );
    }
    if let Some(ferro) = header("ferromagnetic") {
        table.ferromagnetic_model = Some(
            ferro
                .parse::<bool>()
                .map_err(|e| format_err(path, format!("bad ferromagnetic flag: {e}")))?,
        );
    }
    for row in rows {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != dimension + 2 {
            return Err(format_err(
                path,
                format!(
                    "row has {} fields, expected {}: {row}",
                    fields.len(),
                    dimension + 2
                ),
            ));
        }
        let x: Vec<i64> = fields[..dimension]
            .iter()
            .map(|t| t.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format_err(path, format!("bad displacement in row '{row}': {e}")))?;
        let value: f64 = fields[dimension]
            .parse()
            .map_err(|e| format_err(path, format!("bad value in row '{row}': {e}")))?;
        let std_err: f64 = fields[dimension + 1]
            .parse()
            .map_err(|e| format_err(path, format!("bad std_err in row '{row}': {e}")))?;
        if table.value(&x).is_some() {
            return Err(format_err(path, format!("duplicate displacement {x:?}")));
        }
        table.set(&x, value, std_err)?;
    }
    if table.is_empty() {
        return Err(format_err(path, "table holds no entries"));
    }
    Ok(table)
}

/// Writes the diffraction density grid plus its pure point summary as TSV.
pub fn write_spectrum(path: &Path, result: &DiffractionResult) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# format: {SPECTRUM_FORMAT}")?;
    writeln!(out, "# convention: {CONVENTION_TAG}")?;
    writeln!(out, "# dimension: {}", result.dimension)?;
    writeln!(out, "# grid: {}", result.grid_m)?;
    writeln!(out, "# bragg_weight: {:.16e}", result.bragg_weight)?;
    if let Some(note) = &result.bragg_note {
        writeln!(out, "# bragg_note: {}", note.replace(['\t', '\n'], " "))?;
    }
    writeln!(out, "# truncation_error: {:.16e}", result.truncation_error)?;
    writeln!(out, "# window: {}", result.window)?;
    writeln!(out, "# source_nonnegative: {}", result.source_nonnegative)?;
    if let Some(ferro) = result.ferromagnetic_source {
        writeln!(out, "# ferromagnetic: {ferro}")?;
    }
    let axes: Vec<String> = (1..=result.dimension).map(|i| format!("k{i}")).collect();
    writeln!(out, "# columns: {} density", axes.join(" "))?;
    for (flat, &v) in result.values.iter().enumerate() {
        let k = result.wave_vector(flat);
        let coords: Vec<String> = k.iter().map(|ki| format!("{ki:.16e}")).collect();
        writeln!(out, "{}\t{v:.16e}", coords.join("\t"))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the sample-estimated intensity on the dual grid as TSV.
pub fn write_structure_factor(path: &Path, sf: &StructureFactorEstimate) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# format: {STRUCTURE_FACTOR_FORMAT}")?;
    writeln!(out, "# convention: {CONVENTION_TAG}")?;
    writeln!(out, "# dimension: {}", sf.dimension)?;
    let lengths: Vec<String> = sf.lengths.iter().map(|l| l.to_string()).collect();
    writeln!(out, "# lengths: {}", lengths.join(" "))?;
    writeln!(out, "# n_samples: {}", sf.n_samples)?;
    let axes: Vec<String> = (1..=sf.dimension).map(|i| format!("k{i}")).collect();
    writeln!(out, "# columns: {} intensity std_err", axes.join(" "))?;
    for (flat, (&v, &se)) in sf.values.iter().zip(&sf.std_errs).enumerate() {
        let k = sf.wave_vector(flat);
        let coords: Vec<String> = k.iter().map(|ki| format!("{ki:.16e}")).collect();
        writeln!(out, "{}\t{v:.16e}\t{se:.16e}", coords.join("\t"))?;
    }
    out.flush()?;
    Ok(())
}

/// Provenance recorded alongside a binary sample stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFileMeta {
    pub lengths: Vec<usize>,
    pub beta: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
}

fn algorithm_byte(a: Algorithm) -> u8 {
    match a {
        Algorithm::Metropolis => 0,
        Algorithm::Wolff => 1,
    }
}

/// Writes configurations bit-packed: magic, version, convention tag,
/// geometry and run provenance, then one byte-aligned block per sample with
/// site bits in index order, least significant bit first (bit 1 means spin
/// +1 / site occupied).
pub fn write_samples(
    path: &Path,
    meta: &SampleFileMeta,
    samples: &[SpinConfiguration],
) -> Result<()> {
    let torus = LatticeTorus::new(&meta.lengths)?;
    if samples.iter().any(|s| s.torus() != &torus) {
        return Err(Error::InvalidArgument(
            "sample geometry does not match the metadata".into(),
        ));
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(SAMPLES_MAGIC)?;
    out.write_all(&SAMPLES_VERSION.to_le_bytes())?;
    let tag = CONVENTION_TAG.as_bytes();
    out.write_all(&(tag.len() as u32).to_le_bytes())?;
    out.write_all(tag)?;
    out.write_all(&(meta.lengths.len() as u32).to_le_bytes())?;
    for &l in &meta.lengths {
        out.write_all(&(l as u32).to_le_bytes())?;
    }
    out.write_all(&meta.beta.to_le_bytes())?;
    out.write_all(&meta.seed.to_le_bytes())?;
    out.write_all(&[algorithm_byte(meta.algorithm)])?;
    out.write_all(&(samples.len() as u64).to_le_bytes())?;
    let n_sites = torus.n_sites();
    let bytes_per_sample = n_sites.div_ceil(8);
    let mut block = vec![0u8; bytes_per_sample];
    for sample in samples {
        block.fill(0);
        for (site, &s) in sample.spins().iter().enumerate() {
            if s > 0 {
                block[site / 8] |= 1 << (site % 8);
            }
        }
        out.write_all(&block)?;
    }
    out.flush()?;
    Ok(())
}

fn read_exact_buf(r: &mut impl Read, n: usize, path: &Path, what: &str) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|_| format_err(path, format!("truncated while reading {what}")))?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read, path: &Path, what: &str) -> Result<u32> {
    let b = read_exact_buf(r, 4, path, what)?;
    Ok(u32::from_le_bytes(b.try_into().unwrap()))
}

fn read_u64(r: &mut impl Read, path: &Path, what: &str) -> Result<u64> {
    let b = read_exact_buf(r, 8, path, what)?;
    Ok(u64::from_le_bytes(b.try_into().unwrap()))
}

/// Reads a stream written by [`write_samples`].
pub fn read_samples(path: &Path) -> Result<(SampleFileMeta, Vec<SpinConfiguration>)> {
    let mut r = BufReader::new(File::open(path)?);
    let magic = read_exact_buf(&mut r, 8, path, "magic")?;
    if magic != SAMPLES_MAGIC {
        return Err(format_err(path, "not a sample stream (bad magic)"));
    }
    let version = read_u32(&mut r, path, "version")?;
    if version != SAMPLES_VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    let tag_len = read_u32(&mut r, path, "tag length")? as usize;
    if tag_len > 256 {
        return Err(format_err(path, "implausible convention tag length"));
    }
    let tag = read_exact_buf(&mut r, tag_len, path, "convention tag")?;
    if tag != CONVENTION_TAG.as_bytes() {
        return Err(format_err(
            path,
            format!(
                "energy convention '{}' is not '{CONVENTION_TAG}'",
                String::from_utf8_lossy(&tag)
            ),
        ));
    }
    let dimension = read_u32(&mut r, path, "dimension")? as usize;
    if dimension == 0 || dimension > 16 {
        return Err(format_err(path, format!("implausible dimension {dimension}")));
    }
    let mut lengths = Vec::with_capacity(dimension);
    for _ in 0..dimension {
        lengths.push(read_u32(&mut r, path, "axis length")? as usize);
    }
    let beta = f64::from_le_bytes(
        read_exact_buf(&mut r, 8, path, "beta")?
            .try_into()
            .unwrap(),
    );
    let seed = read_u64(&mut r, path, "seed")?;
    let algorithm = match read_exact_buf(&mut r, 1, path, "algorithm")?[0] {
        0 => Algorithm::Metropolis,
        1 => Algorithm::Wolff,
        b => return Err(format_err(path, format!("unknown algorithm byte {b}"))),
    };
    let n_samples = read_u64(&mut r, path, "sample count")?;
    if n_samples > 100_000_000 {
        return Err(format_err(path, format!("implausible sample count {n_samples}")));
    }
    let n_samples = n_samples as usize;
    let torus = LatticeTorus::new(&lengths)?;
    let n_sites = torus.n_sites();
    let bytes_per_sample = n_sites.div_ceil(8);
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let block = read_exact_buf(&mut r, bytes_per_sample, path, &format!("sample {i}"))?;
        let spins: Vec<i8> = (0..n_sites)
            .map(|site| {
                if block[site / 8] >> (site % 8) & 1 == 1 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        samples.push(SpinConfiguration::from_spins(&torus, spins)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(format_err(path, "trailing bytes after the last sample"));
    }
    Ok((
        SampleFileMeta {
            lengths,
            beta,
            seed,
            algorithm,
        },
        samples,
    ))
}

/// Writes `key = value` lines.
pub fn write_key_values(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (k, v) in pairs {
        writeln!(out, "{k} = {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes property check outcomes as `name<TAB>status<TAB>details` rows.
pub fn write_checks(path: &Path, reports: &[PropertyReport]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# columns: check status details")?;
    for r in reports {
        writeln!(
            out,
            "{}\t{}\t{}",
            r.name,
            r.status.as_str(),
            r.details.replace(['\t', '\n'], " ")
        )?;
    }
    out.flush()?;
    Ok(())
}

/// SHA-256 of a file, lowercase hex.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

/// Rewrites the manifest over every known artifact present in `dir`:
/// `sha256<TAB>name` per line, sorted by name.
pub fn write_manifest(dir: &Path) -> Result<()> {
    let mut names: Vec<&str> = KNOWN_ARTIFACTS
        .iter()
        .copied()
        .filter(|name| dir.join(name).is_file())
        .collect();
    names.sort_unstable();
    let mut out = BufWriter::new(File::create(dir.join(MANIFEST_NAME))?);
    for name in names {
        writeln!(out, "{}\t{name}", sha256_hex(&dir.join(name))?)?;
    }
    out.flush()?;
    Ok(())
}

/// Recomputes every checksum in the manifest. Returns the verified names;
/// a missing manifest, a missing listed file, or any mismatch is an error.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let manifest = dir.join(MANIFEST_NAME);
    if !manifest.is_file() {
        return Err(Error::MissingArtifact(manifest.display().to_string()));
    }
    let mut verified = Vec::new();
    for line in BufReader::new(File::open(&manifest)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (expected, name) = line
            .split_once('\t')
            .ok_or_else(|| format_err(&manifest, format!("malformed manifest line: {line}")))?;
        let target = dir.join(name);
        if !target.is_file() {
            return Err(Error::Integrity(format!(
                "manifest lists {name} but the file is missing"
            )));
        }
        let actual = sha256_hex(&target)?;
        if actual != expected {
            return Err(Error::Integrity(format!(
                "checksum mismatch for {name}: manifest {expected}, file {actual}"
            )));
        }
        verified.push(name.to_string());
    }
    Ok(verified)
}
