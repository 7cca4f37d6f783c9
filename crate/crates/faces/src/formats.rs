//! On-disk formats: JSON documents, JSON-lines circuits and CSV tables.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use faces_core::design::{Circuit, DesignMatrix, GateRegistry};
use faces_core::fermion::{GateId, GateInstance, PauliLabel};
use faces_core::kravchuk::{BornDistribution, CircuitKind, EigenvalueVector};
use faces_core::noise::{noise_pair, GateNoiseModel, PauliChannel};
use faces_core::simulate::ShotRecord;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// File layout of an experiment directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn noise_model(&self) -> PathBuf {
        self.root.join("noise_model.json")
    }

    pub fn circuits(&self) -> PathBuf {
        self.root.join("circuits.jsonl")
    }

    pub fn design(&self) -> PathBuf {
        self.root.join("design.csv")
    }

    pub fn shots_dir(&self) -> PathBuf {
        self.root.join("shots")
    }

    pub fn shot_file(&self, circuit: usize) -> PathBuf {
        self.shots_dir().join(format!("circuit_{circuit:05}.csv"))
    }

    pub fn probabilities_dir(&self) -> PathBuf {
        self.root.join("probabilities")
    }

    pub fn probability_file(&self, circuit: usize) -> PathBuf {
        self.probabilities_dir().join(format!("circuit_{circuit:05}.csv"))
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("run_manifest.json")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.root.join("report.csv")
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn histogram_csv(&self) -> PathBuf {
        self.root.join("histogram.csv")
    }

    pub fn histogram_json(&self) -> PathBuf {
        self.root.join("histogram.json")
    }

    pub fn summary(&self) -> PathBuf {
        self.root.join("summary.txt")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(path.to_path_buf()))
    }
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    require(path)?;
    fs::read(path).map_err(io_err(path))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

/// Lower-case hex SHA-256 of the concatenated files.
pub fn hash_files(paths: &[PathBuf]) -> Result<String> {
    let mut hasher = Sha256::new();
    for p in paths {
        hasher.update(read_bytes(p)?);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn parse_kind(label: &str) -> Option<CircuitKind> {
    match label {
        "z" => Some(CircuitKind::Z),
        "x" => Some(CircuitKind::X),
        _ => None,
    }
}

/// Noise of one gate: its twirled eigenvalues and, when known, the sparse Pauli
/// probabilities over the full register keyed by labels such as `"IXZI"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateNoiseEntry {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[usize; 2]>,
    pub xi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModelFile {
    pub qubits: usize,
    pub modes: usize,
    pub gates: Vec<GateNoiseEntry>,
}

impl NoiseModelFile {
    pub fn from_model(model: &GateNoiseModel) -> Self {
        let qubits = model.qubits();
        let gates = model
            .iter()
            .map(|(gate, noise)| GateNoiseEntry {
                gate: gate.to_string(),
                pair: noise.pauli.as_ref().filter(|_| qubits > 1).map(|_| {
                    let (a, b) = noise_pair(gate, qubits);
                    [a, b]
                }),
                xi: noise.xi.as_slice().to_vec(),
                pauli: noise
                    .pauli
                    .as_ref()
                    .map(|ch| ch.iter().map(|(l, p)| (l.to_string(), *p)).collect()),
            })
            .collect();
        Self {
            qubits,
            modes: 2 * qubits,
            gates,
        }
    }

    pub fn to_model(&self) -> Result<GateNoiseModel> {
        let mut model = GateNoiseModel::new(self.qubits);
        for entry in &self.gates {
            let gate: GateId = entry.gate.parse()?;
            let pauli = match &entry.pauli {
                Some(table) => {
                    let entries = table
                        .iter()
                        .map(|(l, p)| Ok((l.parse::<PauliLabel>()?, *p)))
                        .collect::<Result<Vec<_>>>()?;
                    Some(PauliChannel::new(self.qubits, entries)?)
                }
                None => None,
            };
            model.insert(gate, pauli, Some(EigenvalueVector::new(entry.xi.clone())?))?;
        }
        Ok(model)
    }
}

pub fn write_noise_model(path: &Path, model: &GateNoiseModel) -> Result<()> {
    write_json(path, &NoiseModelFile::from_model(model))
}

pub fn read_noise_model(path: &Path) -> Result<GateNoiseModel> {
    read_json::<NoiseModelFile>(path)?.to_model()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateLine {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

/// One line of the circuit file. `seed` and `stream` identify the generator that drew it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitLine {
    pub id: usize,
    pub kind: String,
    pub seed: u64,
    pub stream: u64,
    pub gates: Vec<GateLine>,
}

impl CircuitLine {
    pub fn from_circuit(circuit: &Circuit, seed: u64, stream: u64) -> Self {
        Self {
            id: circuit.id,
            kind: circuit.kind.label().to_string(),
            seed,
            stream,
            gates: circuit
                .gates
                .iter()
                .map(|g| GateLine {
                    gate: g.id.to_string(),
                    theta: g.theta,
                })
                .collect(),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let kind = parse_kind(&self.kind)
            .ok_or_else(|| Error::Config(format!("circuit {}: unknown kind {:?}", self.id, self.kind)))?;
        let gates = self
            .gates
            .iter()
            .map(|g| {
                Ok(GateInstance {
                    id: g.gate.parse()?,
                    theta: g.theta,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Circuit {
            id: self.id,
            kind,
            gates,
        })
    }
}

pub fn write_circuits(path: &Path, circuits: &[Circuit], seed: u64, stream: u64) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for c in circuits {
        let line = serde_json::to_string(&CircuitLine::from_circuit(c, seed, stream)).map_err(|source| {
            Error::Json {
                path: path.to_path_buf(),
                source,
            }
        })?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_circuits(path: &Path) -> Result<Vec<Circuit>> {
    require(path)?;
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CircuitLine = serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if parsed.id != out.len() {
            return Err(Error::format(path, format!("line {}: expected circuit id {}", i + 1, out.len())));
        }
        out.push(parsed.to_circuit()?);
    }
    Ok(out)
}

/// Gate-count matrix with a `circuit,kind` prefix and one column per registry gate.
pub fn write_design(path: &Path, design: &DesignMatrix, registry: &GateRegistry) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["circuit".to_string(), "kind".to_string()];
    header.extend(registry.gates().iter().map(|g| g.to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for j in 0..design.rows() {
        let mut record = vec![j.to_string(), design.kind(j).label().to_string()];
        record.extend(design.row(j).iter().map(|c| c.to_string()));
        w.write_record(&record).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a design file as `(kinds, counts)`, checking the header against `registry`.
pub fn read_design(path: &Path, registry: &GateRegistry) -> Result<(Vec<CircuitKind>, Vec<Vec<u32>>)> {
    require(path)?;
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    let expected: Vec<String> = ["circuit".to_string(), "kind".to_string()]
        .into_iter()
        .chain(registry.gates().iter().map(|g| g.to_string()))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::format(path, "header does not match the gate registry"));
    }
    let mut kinds = Vec::new();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err(path))?;
        let kind = parse_kind(&record[1]).ok_or_else(|| Error::format(path, format!("bad kind {:?}", &record[1])))?;
        let counts = record
            .iter()
            .skip(2)
            .map(|c| c.parse::<u32>().map_err(|e| Error::format(path, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        kinds.push(kind);
        rows.push(counts);
    }
    Ok((kinds, rows))
}

/// Readout bin labels in canonical order: `w<k>` for `z` circuits, `+w<k>` then `-w<k>` for `x`.
pub fn bin_labels(kind: CircuitKind, qubits: usize) -> Vec<String> {
    match kind {
        CircuitKind::Z => (0..=qubits).map(|w| format!("w{w}")).collect(),
        CircuitKind::X => (0..qubits)
            .map(|w| format!("+w{w}"))
            .chain((0..qubits).map(|w| format!("-w{w}")))
            .collect(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CountRow {
    circuit_id: usize,
    kind: String,
    bin_label: String,
    count: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProbabilityRow {
    circuit_id: usize,
    kind: String,
    bin_label: String,
    probability: f64,
}

pub fn write_shot_record(path: &Path, record: &ShotRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let labels = bin_labels(record.kind, record.qubits);
    for (label, &count) in labels.into_iter().zip(&record.counts) {
        w.serialize(CountRow {
            circuit_id: record.circuit,
            kind: record.kind.label().to_string(),
            bin_label: label,
            count,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn check_row(path: &Path, circuit: usize, kind: CircuitKind, row_circuit: usize, row_kind: &str) -> Result<()> {
    if row_circuit != circuit || parse_kind(row_kind) != Some(kind) {
        return Err(Error::format(
            path,
            format!("row for circuit {row_circuit} ({row_kind}) where circuit {circuit} ({}) was expected", kind.label()),
        ));
    }
    Ok(())
}

fn bin_index(path: &Path, labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::format(path, format!("unknown bin label {label:?}")))
}

pub fn read_shot_record(path: &Path, circuit: usize, kind: CircuitKind, qubits: usize) -> Result<ShotRecord> {
    require(path)?;
    let labels = bin_labels(kind, qubits);
    let mut counts = vec![0u64; labels.len()];
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    for row in r.deserialize::<CountRow>() {
        let row = row.map_err(csv_err(path))?;
        check_row(path, circuit, kind, row.circuit_id, &row.kind)?;
        counts[bin_index(path, &labels, &row.bin_label)?] += row.count;
    }
    Ok(ShotRecord {
        circuit,
        kind,
        qubits,
        counts,
    })
}

pub fn write_probabilities(path: &Path, circuit: usize, born: &BornDistribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let labels = bin_labels(born.kind(), born.qubits());
    for (label, p) in labels.into_iter().zip(born.bins()) {
        w.serialize(ProbabilityRow {
            circuit_id: circuit,
            kind: born.kind().label().to_string(),
            bin_label: label,
            probability: p,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_probabilities(path: &Path, circuit: usize, kind: CircuitKind, qubits: usize) -> Result<BornDistribution> {
    require(path)?;
    let labels = bin_labels(kind, qubits);
    let mut bins = vec![0.0; labels.len()];
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    for row in r.deserialize::<ProbabilityRow>() {
        let row = row.map_err(csv_err(path))?;
        check_row(path, circuit, kind, row.circuit_id, &row.kind)?;
        bins[bin_index(path, &labels, &row.bin_label)?] = row.probability;
    }
    Ok(BornDistribution::from_bins(kind, qubits, &bins)?)
}

/// Provenance of a simulated run. Circuit `j` draws its shots from stream
/// `shot_stream_base + j` of the generator seeded with `seed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub seed: u64,
    pub shot_stream_base: u64,
    /// Shots per circuit; absent for exact probabilities.
    pub shots: Option<u64>,
    pub exact_probabilities: bool,
    pub circuits: usize,
    /// SHA-256 of `noise_model.json` followed by `circuits.jsonl`.
    pub model_hash: String,
}

/// One estimated gate eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub gate_id: String,
    pub degree: usize,
    pub xi_true: f64,
    pub xi_hat: f64,
    pub rel_error: f64,
    /// Circuit kinds informing this degree: `x`, `z` or `xz`.
    pub estimate_type: String,
    /// Shots per circuit, or `exact`.
    pub shots: String,
}

pub fn write_report_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    if rows.is_empty() {
        w.write_record(["gate_id", "degree", "xi_true", "xi_hat", "rel_error", "estimate_type", "shots"])
            .map_err(csv_err(path))?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_report_rows(path: &Path) -> Result<Vec<ReportRow>> {
    require(path)?;
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}
