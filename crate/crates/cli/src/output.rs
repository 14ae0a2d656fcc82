//! Trajectory CSV, run manifests and checksums.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use momenta_core::Trajectory;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// 17 significant digits; `{:e}` formatting does not depend on locale.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diagnostic_columns(traj: &Trajectory) -> Vec<String> {
    let v = &traj.variables;
    let mut cols = vec!["H_Q".to_string()];
    for d in 0..traj.dofs {
        cols.push(format!("margin_{}_{}", v[2 * d], v[2 * d + 1]));
    }
    cols.push(format!("validity_{}", v[0]));
    cols.push(format!("validity_{}", v[1]));
    cols.push(format!("ratio_d{}_d{}", v[0], v[1]));
    cols
}

pub fn trajectory_csv(traj: &Trajectory) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(traj.variables.iter().cloned());
    header.extend(diagnostic_columns(traj));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..traj.len() {
        let d = &traj.diagnostics[i];
        let mut rec = Vec::with_capacity(header.len());
        rec.push(fmt_f64(traj.times[i]));
        rec.extend(traj.states[i].iter().map(|&x| fmt_f64(x)));
        rec.push(fmt_f64(d.energy));
        rec.extend(d.margins.iter().map(|&x| fmt_f64(x)));
        rec.push(fmt_f64(d.validity_position));
        rec.push(fmt_f64(d.validity_momentum));
        rec.push(fmt_f64(d.dispersion_ratio));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

/// Column-major numeric table read back from a trajectory CSV.
#[derive(Clone, Debug)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(&self.columns[i])
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    parse_table(&bytes, &path.display().to_string())
}

pub fn parse_table(bytes: &[u8], origin: &str) -> CliResult<Table> {
    let err = |e: csv::Error| CliError::Usage(format!("{origin}: {e}"));
    let mut r = csv::Reader::from_reader(bytes);
    let headers: Vec<String> = r.headers().map_err(err)?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(err)?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Usage(format!(
                    "{origin}: row {}, column `{}`: not a number: {field:?}",
                    line + 2,
                    headers[j]
                ))
            })?;
            columns[j].push(v);
        }
    }
    Ok(Table { headers, columns })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes `bytes` to `dir/name` and records its checksum.
pub struct OutputDir {
    pub dir: PathBuf,
    pub files: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepCounts {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: String,
    /// Relative to the manifest; rerun with `momenta integrate --scenario <this>`.
    pub scenario_file: String,
    pub seed: u64,
    pub order: u32,
    pub hbar: f64,
    pub rule: String,
    pub hamiltonian_cut: String,
    pub method: String,
    pub equations: Option<String>,
    pub termination: String,
    pub completed: bool,
    pub samples: usize,
    pub final_time: f64,
    pub steps: StepCounts,
    pub notices: Vec<String>,
    /// sha256 of every file written by the run, manifest excluded.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CliError::Usage(format!("manifest: {e}")))
    }
}

/// Recomputes checksums of the files listed in a manifest; returns the mismatches.
pub fn check_manifest(dir: &Path, m: &Manifest) -> CliResult<Vec<String>> {
    let mut bad = Vec::new();
    for (name, sum) in &m.files {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(CliError::io(&path))?;
        if &sha256_hex(&bytes) != sum {
            bad.push(name.clone());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
